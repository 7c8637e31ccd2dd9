//! Globally adaptive Gauss-Kronrod (7/15) quadrature with a doubling
//! truncation rule for integrals over `[a, inf)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Truncate an improper integral once the integrand at the cut falls
    /// below this fraction of its running peak.
    pub tail_ratio: f64,
    /// First trial upper limit is `a + initial_span`.
    pub initial_span: f64,
    pub max_subdivisions: usize,
    pub max_doublings: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            tail_ratio: 1e-12,
            initial_span: 1.0,
            max_subdivisions: 4000,
            max_doublings: 80,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.tail_ratio > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be > 0"));
        }
        if !(self.initial_span > 0.0) {
            return Err(Error::invalid("initial_span must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over the finite interval `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    spec.validate()?;
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error_estimate: 0.0,
        });
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut err = error;
    let mut splits = 0;
    while err > spec.abs_tol.max(spec.rel_tol * total.abs()) {
        if splits >= spec.max_subdivisions || !total.is_finite() {
            return Err(Error::ToleranceNotMet {
                estimate: total,
                error_estimate: err,
            });
        }
        let seg = heap.pop().expect("non-empty");
        let mid = 0.5 * (seg.a + seg.b);
        let (v1, e1) = gk15(&f, seg.a, mid);
        let (v2, e2) = gk15(&f, mid, seg.b);
        total += v1 + v2 - seg.value;
        err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        splits += 1;
        if splits % 64 == 0 {
            // re-sum to shed accumulated rounding
            total = heap.iter().map(|s| s.value).sum();
            err = heap.iter().map(|s| s.error).sum();
        }
    }
    Ok(Integral {
        value: heap.iter().map(|s| s.value).sum(),
        error_estimate: err,
    })
}

/// Integrate `f` over `[a, inf)` by doubling a truncation point until the
/// integrand has decayed below `tail_ratio` of its peak and the last added
/// piece is within tolerance.
pub fn integrate_to_infinity(f: impl Fn(f64) -> f64, a: f64, spec: &QuadratureSpec) -> Result<Integral> {
    spec.validate()?;
    let mut lo = a;
    let mut hi = a + spec.initial_span;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut peak = 0.0f64;
    for _ in 0..spec.max_doublings {
        let piece = integrate(&f, lo, hi, spec)?;
        for j in 0..=32 {
            peak = peak.max(f(lo + (hi - lo) * j as f64 / 32.0).abs());
        }
        total += piece.value;
        err += piece.error_estimate;
        let decayed = f(hi).abs() <= spec.tail_ratio * peak;
        let small = piece.value.abs() <= spec.abs_tol.max(spec.rel_tol * total.abs());
        if decayed && small {
            return Ok(Integral {
                value: total,
                error_estimate: err,
            });
        }
        let span = hi - a;
        lo = hi;
        hi = a + 2.0 * span;
    }
    Err(Error::ToleranceNotMet {
        estimate: total,
        error_estimate: err,
    })
}

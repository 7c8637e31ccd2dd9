//! Line-oriented text dump: one node per line, `index x y out...`.

use std::io::{BufRead, Write};

use super::ISGraph;
use crate::spatial::Point2;
use crate::{Error, Result};

pub fn write_dump(g: &ISGraph, mut w: impl Write) -> Result<()> {
    for (i, p) in g.positions().iter().enumerate() {
        write!(w, "{i} {:?} {:?}", p.x, p.y)?;
        for j in g.out_neighbors(i) {
            write!(w, " {j}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_dump(r: impl BufRead) -> Result<ISGraph> {
    let mut positions = Vec::new();
    let mut out = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::invalid(format!("dump line {}: {what}", lineno + 1));
        let mut fields = line.split_whitespace();
        let index: usize = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("missing index"))?;
        if index != positions.len() {
            return Err(bad("node indices must be consecutive from 0"));
        }
        let mut coord = || -> Result<f64> {
            fields
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("bad coordinate"))
        };
        let p = Point2::new(coord()?, coord()?);
        let neigh: Vec<u32> = fields
            .map(|s| s.parse().map_err(|_| bad("bad neighbour")))
            .collect::<Result<_>>()?;
        positions.push(p);
        out.push(neigh);
    }
    ISGraph::from_out_lists(positions, out)
}

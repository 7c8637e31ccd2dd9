use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::ISGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    /// Nodes reachable from the start along directed edges.
    Out,
    /// Nodes that reach the start.
    In,
    /// Connected component when edges are taken in either direction.
    Weak,
    /// Connected component over edges present in both directions.
    Strong,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 4] = [
        ComponentKind::Out,
        ComponentKind::In,
        ComponentKind::Weak,
        ComponentKind::Strong,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ComponentKind::Out => "out",
            ComponentKind::In => "in",
            ComponentKind::Weak => "weak",
            ComponentKind::Strong => "strong",
        }
    }
}

/// Simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    pub adj: Vec<Vec<u32>>,
}

impl UndirectedGraph {
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&(j as u32)).is_ok()
    }

    /// Undirected edges `{i, j}` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(i, l)| {
            l.iter()
                .filter(move |&&j| (j as usize) > i)
                .map(move |&j| (i, j as usize))
        })
    }
}

fn merge_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Edge `{i, j}` iff `i -> j` or `j -> i`.
pub fn weak_projection(g: &ISGraph) -> UndirectedGraph {
    UndirectedGraph {
        adj: (0..g.len())
            .map(|i| merge_sorted(g.out_neighbors(i), g.in_neighbors(i)))
            .collect(),
    }
}

/// Edge `{i, j}` iff `i -> j` and `j -> i`.
pub fn strong_projection(g: &ISGraph) -> UndirectedGraph {
    UndirectedGraph {
        adj: (0..g.len())
            .map(|i| intersect_sorted(g.out_neighbors(i), g.in_neighbors(i)))
            .collect(),
    }
}

fn neighbors_into(g: &ISGraph, kind: ComponentKind, i: usize, buf: &mut Vec<u32>) {
    buf.clear();
    match kind {
        ComponentKind::Out => buf.extend_from_slice(g.out_neighbors(i)),
        ComponentKind::In => buf.extend_from_slice(g.in_neighbors(i)),
        ComponentKind::Weak => {
            buf.extend_from_slice(g.out_neighbors(i));
            buf.extend_from_slice(g.in_neighbors(i));
        }
        ComponentKind::Strong => buf.extend(intersect_sorted(g.out_neighbors(i), g.in_neighbors(i))),
    }
}

/// Breadth-first search from `start`, stopping as soon as `stop` accepts a
/// visited node. Returns whether it stopped early, and the visit marks.
fn search(g: &ISGraph, start: usize, kind: ComponentKind, mut stop: impl FnMut(usize) -> bool) -> (bool, Vec<bool>) {
    let mut seen = vec![false; g.len()];
    seen[start] = true;
    if stop(start) {
        return (true, seen);
    }
    let mut queue = VecDeque::from([start]);
    let mut buf = Vec::new();
    while let Some(i) = queue.pop_front() {
        neighbors_into(g, kind, i, &mut buf);
        for &j in &buf {
            let j = j as usize;
            if !seen[j] {
                seen[j] = true;
                if stop(j) {
                    return (true, seen);
                }
                queue.push_back(j);
            }
        }
    }
    (false, seen)
}

/// The `kind`-component of `node`, as sorted ordinals. Always contains
/// `node` itself.
pub fn component(g: &ISGraph, node: usize, kind: ComponentKind) -> Vec<usize> {
    let (_, seen) = search(g, node, kind, |_| false);
    seen.iter()
        .enumerate()
        .filter_map(|(i, &s)| s.then_some(i))
        .collect()
}

/// Whether the `kind`-component of `node` contains a node accepted by
/// `target`. Stops at the first hit.
pub fn reaches(g: &ISGraph, node: usize, kind: ComponentKind, target: impl Fn(usize) -> bool) -> bool {
    search(g, node, kind, target).0
}

/// Per-node `(in_degree, out_degree)`.
pub fn degrees(g: &ISGraph) -> Vec<(usize, usize)> {
    (0..g.len())
        .map(|i| (g.in_neighbors(i).len(), g.out_neighbors(i).len()))
        .collect()
}

use std::collections::VecDeque;

use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::StochasticMatrix;

/// Structural facts about the support graph of a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainDiagnostics {
    pub irreducible: bool,
    pub aperiodic: bool,
    /// Period of the chain when irreducible; otherwise the largest period
    /// among the closed classes.
    pub period: usize,
    pub num_closed_classes: usize,
}

pub fn diagnose_chain(p: &StochasticMatrix, edge_tol: f64) -> ChainDiagnostics {
    diagnose_support(p.matrix(), edge_tol)
}

/// Diagnose the directed graph with an edge `i → j` iff `m[(i, j)] > edge_tol`.
pub fn diagnose_support(m: &DMatrix<f64>, edge_tol: f64) -> ChainDiagnostics {
    let n = m.nrows();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<NodeIndex> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if m[(i, j)] > edge_tol {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }

    let components = tarjan_scc(&graph);
    let mut component_of = vec![usize::MAX; n];
    for (c, members) in components.iter().enumerate() {
        for node in members {
            component_of[node.index()] = c;
        }
    }

    let mut closed = 0;
    let mut period = 0;
    for (c, members) in components.iter().enumerate() {
        let leaves = members
            .iter()
            .any(|&u| graph.neighbors(u).any(|v| component_of[v.index()] != c));
        if leaves {
            continue;
        }
        closed += 1;
        if let Some(d) = class_period(&graph, members, &component_of, c) {
            period = period.max(d);
        }
    }

    let irreducible = components.len() == 1 && n > 0;
    let period = period.max(1);
    ChainDiagnostics {
        irreducible,
        aperiodic: period == 1,
        period,
        num_closed_classes: closed,
    }
}

/// gcd of `level(u) + 1 - level(v)` over the edges `u → v` inside one strongly
/// connected component, with levels from a breadth-first search. `None` when
/// the component has no internal edge (a transient singleton).
fn class_period(
    graph: &DiGraph<(), ()>,
    members: &[NodeIndex],
    component_of: &[usize],
    c: usize,
) -> Option<usize> {
    let root = *members.first()?;
    let mut level = vec![usize::MAX; component_of.len()];
    level[root.index()] = 0;
    let mut queue = VecDeque::from([root]);
    let mut g = 0usize;
    let mut has_edge = false;
    while let Some(u) = queue.pop_front() {
        for v in graph.neighbors(u) {
            if component_of[v.index()] != c {
                continue;
            }
            has_edge = true;
            if level[v.index()] == usize::MAX {
                level[v.index()] = level[u.index()] + 1;
                queue.push_back(v);
            } else {
                let diff = (level[u.index()] + 1).abs_diff(level[v.index()]);
                g = gcd(g, diff);
            }
        }
    }
    has_edge.then_some(g.max(1))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

//! Statistics of the uncolored ("bad") set left by a randomized phase, and
//! the deterministic cleanup that finishes it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{greedy_extend, Coloring, Graph, ListColoringInstance, Vertex};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShatterKnobs {
    pub c: f64,
    pub c_prime: f64,
    /// Edge threshold is `c_edge * n`.
    pub c_edge: f64,
}

impl Default for ShatterKnobs {
    fn default() -> Self {
        ShatterKnobs {
            c: 1.0,
            c_prime: 2.0,
            c_edge: 1.0,
        }
    }
}

impl ShatterKnobs {
    /// `(c'/c) * Δ^{2c} * log_Δ n`, with Δ floored at 2.
    pub fn size_threshold(&self, delta: usize, n: usize) -> f64 {
        let d = delta.max(2) as f64;
        let log_d_n = (n.max(2) as f64).ln() / d.ln();
        (self.c_prime / self.c) * d.powf(2.0 * self.c) * log_d_n
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BadSetReport {
    pub bad_vertices: usize,
    /// Descending.
    pub component_sizes: Vec<usize>,
    pub max_component_size: usize,
    pub edges_within_bad: usize,
    pub size_threshold: f64,
    pub edge_threshold: f64,
    pub size_pass: bool,
    pub edge_pass: bool,
}

/// Connected components of the subgraph induced by `inside`, each sorted
/// ascending, ordered by smallest member.
pub fn components(graph: &Graph, inside: &[bool]) -> Vec<Vec<Vertex>> {
    let n = graph.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if !inside[s] || seen[s] {
            continue;
        }
        seen[s] = true;
        queue.push_back(s as Vertex);
        let mut comp = Vec::new();
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &u in graph.neighbors(v) {
                if inside[u as usize] && !seen[u as usize] {
                    seen[u as usize] = true;
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn analyze_bad_set(graph: &Graph, bad: &[bool], knobs: &ShatterKnobs) -> BadSetReport {
    let comps = components(graph, bad);
    let mut sizes: Vec<usize> = comps.iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let edges = (0..graph.n() as Vertex)
        .filter(|&v| bad[v as usize])
        .map(|v| graph.degree_within(v, |u| bad[u as usize] && u > v))
        .sum();
    let size_threshold = knobs.size_threshold(graph.max_degree(), graph.n());
    let edge_threshold = knobs.c_edge * graph.n() as f64;
    let max = sizes.first().copied().unwrap_or(0);
    BadSetReport {
        bad_vertices: sizes.iter().sum(),
        max_component_size: max,
        component_sizes: sizes,
        edges_within_bad: edges,
        size_threshold,
        edge_threshold,
        size_pass: max as f64 <= size_threshold,
        edge_pass: edges as f64 <= edge_threshold,
    }
}

/// Colors every uncolored vertex by greedy in ascending id. Components of
/// the uncolored set are mutually non-adjacent, so this is the same as
/// finishing each component on its own.
pub fn color_components(instance: &ListColoringInstance, coloring: &mut Coloring) -> Result<()> {
    let order: Vec<Vertex> = coloring.uncolored().collect();
    greedy_extend(
        instance.graph(),
        |v| instance.palette(v).as_slice(),
        coloring,
        order,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate_coloring, Palette};

    #[test]
    fn empty_and_singleton() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let r = analyze_bad_set(&g, &[false; 3], &ShatterKnobs::default());
        assert_eq!((r.bad_vertices, r.max_component_size, r.edges_within_bad), (0, 0, 0));
        assert!(r.size_pass && r.edge_pass);
        let r = analyze_bad_set(&g, &[false, false, true], &ShatterKnobs::default());
        assert_eq!((r.max_component_size, r.edges_within_bad), (1, 0));
    }

    #[test]
    fn one_surviving_color() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let inst = ListColoringInstance::new(g, vec![Palette::new([1, 2]); 2], 0).unwrap();
        let mut c = Coloring::from_vec(vec![Some(1), None]);
        color_components(&inst, &mut c).unwrap();
        assert_eq!(c.get(1), Some(2));
    }

    #[test]
    fn bad_triangle_completion() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let inst = ListColoringInstance::uniform(g);
        let mut c = Coloring::from_vec(vec![None, None, None, Some(0)]);
        color_components(&inst, &mut c).unwrap();
        assert!(validate_coloring(&inst, &c).is_valid_total());
    }
}

//! Proximity graph, beam search and Vamana construction.

mod build;
mod search;

pub use build::{build_index, medoid, robust_prune, BuildParams};
pub use search::{
    beam_search, AlwaysStop, BeamOutcome, ExactScorer, NeverStop, Scorer, SearchStats,
    StopContext, StopPredicate,
};

use crate::{Error, Result};

/// Directed graph with bounded out-degree and a list of search entry
/// points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProximityGraph {
    max_degree: usize,
    adjacency: Vec<Vec<u32>>,
    start: Vec<u32>,
}

impl ProximityGraph {
    /// Graph with `n` isolated nodes.
    pub fn empty(n: usize, max_degree: usize) -> Self {
        ProximityGraph {
            max_degree,
            adjacency: vec![Vec::new(); n],
            start: Vec::new(),
        }
    }

    /// Assembles a graph from parts, checking every structural invariant.
    pub fn from_parts(max_degree: usize, adjacency: Vec<Vec<u32>>, start: Vec<u32>) -> Result<Self> {
        let g = ProximityGraph {
            max_degree,
            adjacency,
            start,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn start(&self) -> &[u32] {
        &self.start
    }

    pub fn set_start(&mut self, start: Vec<u32>) {
        self.start = start;
    }

    #[inline]
    pub fn neighbors(&self, id: u32) -> &[u32] {
        &self.adjacency[id as usize]
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adjacency
    }

    pub(crate) fn adjacency_mut(&mut self) -> &mut [Vec<u32>] {
        &mut self.adjacency
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    /// Checks the degree bound, id ranges, self-loops and duplicate edges.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        for (node, list) in self.adjacency.iter().enumerate() {
            if list.len() > self.max_degree {
                return bad(format!(
                    "node {node} has degree {} > {}",
                    list.len(),
                    self.max_degree
                ));
            }
            for (k, &nb) in list.iter().enumerate() {
                if nb as usize >= n {
                    return bad(format!("node {node} links to {nb}, outside {n} nodes"));
                }
                if nb as usize == node {
                    return bad(format!("node {node} has a self-loop"));
                }
                if list[..k].contains(&nb) {
                    return bad(format!("node {node} lists neighbor {nb} twice"));
                }
            }
        }
        if let Some(&s) = self.start.iter().find(|&&s| s as usize >= n) {
            return bad(format!("start point {s} outside {n} nodes"));
        }
        if n > 0 && self.start.is_empty() {
            return bad("non-empty graph has no start point".into());
        }
        Ok(())
    }

    /// Nodes reachable from the start points by following out-edges.
    pub fn reachable_from_start(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<u32> = self.start.clone();
        for &s in &self.start {
            seen[s as usize] = true;
        }
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

use std::collections::HashSet;

use crate::error::{DaptError, Result};

/// A simple undirected guest graph on vertices `1..=n`.
///
/// Most operations expect a tree; forests and other simple graphs are accepted
/// so the exact oracle can handle unions of stars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuestGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    // index 0 unused so vertex ids index directly
    adjacency: Vec<Vec<usize>>,
    root: Option<usize>,
    binary_height: Option<u32>,
}

impl GuestGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(DaptError::InvalidGuest("guest needs at least one vertex".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); n + 1];
        for &(u, v) in &edges {
            if u == 0 || v == 0 || u > n || v > n {
                return Err(DaptError::InvalidGuest(format!("edge ({u},{v}) leaves the vertex range 1..={n}")));
            }
            if u == v {
                return Err(DaptError::InvalidGuest(format!("self-loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(DaptError::InvalidGuest(format!("duplicate edge ({u},{v})")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self { n, edges, adjacency, root: None, binary_height: None })
    }

    /// Like [`GuestGraph::new`] but also requires a connected acyclic graph.
    pub fn tree(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let g = Self::new(n, edges)?;
        if !g.is_tree() {
            return Err(DaptError::InvalidGuest("edges do not form a spanning tree".into()));
        }
        Ok(g)
    }

    /// Complete binary tree with heap labelling: vertex `v` has children `2v`, `2v+1`.
    pub fn complete_binary(h_g: u32) -> Result<Self> {
        if h_g > 30 {
            return Err(DaptError::Overflow(format!("complete binary guest of height {h_g}")));
        }
        let n = (1usize << (h_g + 1)) - 1;
        let edges = (2..=n).map(|v| (v / 2, v)).collect();
        let mut g = Self::new(n, edges)?;
        g.root = Some(1);
        g.binary_height = Some(h_g);
        Ok(g)
    }

    /// Star with center 1 and leaves `2..=n`.
    pub fn star(n: usize) -> Result<Self> {
        let mut g = Self::new(n, (2..=n).map(|v| (1, v)).collect())?;
        g.root = Some(1);
        Ok(g)
    }

    pub fn with_root(mut self, root: usize) -> Result<Self> {
        if root == 0 || root > self.n {
            return Err(DaptError::InvalidGuest(format!("root {root} outside 1..={}", self.n)));
        }
        self.root = Some(root);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    /// Height `h_G` when built by [`GuestGraph::complete_binary`].
    pub fn binary_height(&self) -> Option<u32> {
        self.binary_height
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n + 1];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 1..=self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &w in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.n && self.component_count() == 1
    }

    pub fn is_forest(&self) -> bool {
        self.edges.len() + self.component_count() == self.n
    }
}

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::Player;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameVertex {
    pub id: String,
    pub owner: Player,
}

/// An outgoing edge; the source is implicit in the adjacency list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub action: usize,
    pub to: usize,
    pub weight: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(String),
    #[error("vertex index {0} out of range")]
    NoSuchVertex(usize),
    #[error("action index {0} out of range")]
    NoSuchAction(usize),
    #[error("vertex {vertex} already has an edge for action {action}")]
    DuplicateEdge { vertex: String, action: String },
    #[error("unknown vertex id {0}")]
    UnknownVertex(String),
}

/// A finite two-player game graph with integer edge weights.
///
/// Vertices and actions are addressed by dense indices; the `(vertex,
/// action)` pair determines at most one edge.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PricedGameGraph {
    vertices: Vec<GameVertex>,
    actions: Vec<String>,
    out: Vec<Vec<Edge>>,
    targets: BTreeSet<usize>,
    index: HashMap<String, usize>,
    action_index: HashMap<String, usize>,
}

impl PricedGameGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, id: impl Into<String>, owner: Player) -> Result<usize, GraphError> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(GraphError::DuplicateVertex(id));
        }
        let v = self.vertices.len();
        self.index.insert(id.clone(), v);
        self.vertices.push(GameVertex { id, owner });
        self.out.push(Vec::new());
        Ok(v)
    }

    /// Returns the index of `name`, registering it on first use.
    pub fn action(&mut self, name: &str) -> usize {
        if let Some(&a) = self.action_index.get(name) {
            return a;
        }
        let a = self.actions.len();
        self.actions.push(name.to_string());
        self.action_index.insert(name.to_string(), a);
        a
    }

    pub fn add_edge(&mut self, from: usize, action: usize, to: usize, weight: i64) -> Result<(), GraphError> {
        if from >= self.vertices.len() {
            return Err(GraphError::NoSuchVertex(from));
        }
        if to >= self.vertices.len() {
            return Err(GraphError::NoSuchVertex(to));
        }
        if action >= self.actions.len() {
            return Err(GraphError::NoSuchAction(action));
        }
        if self.out[from].iter().any(|e| e.action == action) {
            return Err(GraphError::DuplicateEdge {
                vertex: self.vertices[from].id.clone(),
                action: self.actions[action].clone(),
            });
        }
        self.out[from].push(Edge { action, to, weight });
        Ok(())
    }

    pub fn set_target(&mut self, v: usize) -> Result<(), GraphError> {
        if v >= self.vertices.len() {
            return Err(GraphError::NoSuchVertex(v));
        }
        self.targets.insert(v);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[GameVertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &GameVertex {
        &self.vertices[v]
    }

    pub fn owner(&self, v: usize) -> Player {
        self.vertices[v].owner
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn action_name(&self, a: usize) -> &str {
        &self.actions[a]
    }

    pub fn edges(&self, v: usize) -> &[Edge] {
        &self.out[v]
    }

    pub fn edge(&self, v: usize, action: usize) -> Option<&Edge> {
        self.out[v].iter().find(|e| e.action == action)
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn is_target(&self, v: usize) -> bool {
        self.targets.contains(&v)
    }

    pub fn targets(&self) -> &BTreeSet<usize> {
        &self.targets
    }

    /// Largest absolute edge weight (0 for an edgeless graph).
    pub fn max_abs_weight(&self) -> i64 {
        self.out
            .iter()
            .flatten()
            .map(|e| e.weight.abs())
            .max()
            .unwrap_or(0)
    }

    /// Deadlock check: every non-target vertex needs an outgoing edge.
    pub fn validate(&self) -> Vec<String> {
        (0..self.len())
            .filter(|&v| !self.is_target(v) && self.out[v].is_empty())
            .map(|v| format!("non-target vertex {} has no outgoing edge", self.vertices[v].id))
            .collect()
    }

    /// Vertices reachable from `start`, in index order.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for e in &self.out[v] {
                if !seen[e.to] {
                    seen[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        seen
    }

    /// The subgraph induced by `keep`; vertex and action order is preserved.
    /// Returns the new graph and, for each old vertex, its new index.
    pub fn restrict(&self, keep: &[bool]) -> (PricedGameGraph, Vec<Option<usize>>) {
        let mut g = PricedGameGraph::new();
        let mut map = vec![None; self.len()];
        for (v, vert) in self.vertices.iter().enumerate() {
            if keep[v] {
                map[v] = Some(g.add_vertex(vert.id.clone(), vert.owner).expect("ids are unique"));
            }
        }
        for name in &self.actions {
            g.action(name);
        }
        for (v, edges) in self.out.iter().enumerate() {
            let Some(nv) = map[v] else { continue };
            for e in edges {
                if let Some(nt) = map[e.to] {
                    g.add_edge(nv, e.action, nt, e.weight).expect("edges stay functional");
                }
            }
            if self.is_target(v) {
                g.set_target(nv).expect("index in range");
            }
        }
        (g, map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_are_functional_per_action() {
        let mut g = PricedGameGraph::new();
        let v = g.add_vertex("v", Player::One).unwrap();
        let f = g.add_vertex("f", Player::One).unwrap();
        let a = g.action("a");
        g.add_edge(v, a, f, 3).unwrap();
        assert!(matches!(g.add_edge(v, a, v, 1), Err(GraphError::DuplicateEdge { .. })));
        assert!(g.add_vertex("v", Player::Two).is_err());
        assert_eq!(g.validate().len(), 1, "f is a deadlocked non-target");
        g.set_target(f).unwrap();
        assert!(g.validate().is_empty());
    }

    #[test]
    fn restrict_drops_unreachable() {
        let mut g = PricedGameGraph::new();
        let v = g.add_vertex("v", Player::One).unwrap();
        let f = g.add_vertex("f", Player::One).unwrap();
        let iso = g.add_vertex("iso", Player::Two).unwrap();
        let a = g.action("a");
        g.add_edge(v, a, f, 1).unwrap();
        g.add_edge(iso, a, f, 1).unwrap();
        g.set_target(f).unwrap();
        let (h, map) = g.restrict(&g.reachable_from(v));
        assert_eq!(h.len(), 2);
        assert_eq!(map[iso], None);
        assert!(h.is_target(map[f].unwrap()));
    }
}

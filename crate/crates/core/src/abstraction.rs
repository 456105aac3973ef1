//! The border abstraction of a bounded one-clock bi-valued arena.
//!
//! Vertices are pairs `(l, I)` with `I` a useful η-region inside `Inv(l)`.
//! Actions are pairs `(J, a)`: wait until region `J` and fire label `a`.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::arena::{
    bi_valued_profile, validate_arena, GraphError, Player, PricedGameGraph, ProfileRejection, PtgArena, Violation,
};
use crate::regions::{delay, region_satisfies, ConstantLadder, EtaRegion, RegionError};

/// Name of the zero-weight self-loop given to deadlocked vertices.
pub const STALL: &str = "stall";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AbstractionError {
    #[error("invalid arena: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("location {0} has an unbounded invariant; apply make_bounded first")]
    Unbounded(String),
    #[error(transparent)]
    NotBiValued(#[from] ProfileRejection),
    #[error(transparent)]
    Region(#[from] RegionError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbstractVertex {
    pub location: String,
    pub region: EtaRegion,
}

impl AbstractVertex {
    pub fn id(&self) -> String {
        format!("({},{})", self.location, self.region)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbstractAction {
    pub target_region: EtaRegion,
    pub label: String,
}

impl AbstractAction {
    pub fn name(&self) -> String {
        format!("({},{})", self.target_region, self.label)
    }
}

/// The abstraction graph together with the meaning of its indices.
#[derive(Clone, Debug)]
pub struct BorderAbstraction {
    pub graph: PricedGameGraph,
    pub ladder: ConstantLadder,
    /// Indexed like the graph's vertices.
    pub vertices: Vec<AbstractVertex>,
    /// Indexed like the graph's actions; `None` is the stall loop.
    pub actions: Vec<Option<AbstractAction>>,
    index: HashMap<(String, EtaRegion), usize>,
}

impl BorderAbstraction {
    pub fn vertex_of(&self, location: &str, region: &EtaRegion) -> Option<usize> {
        self.index.get(&(location.to_string(), *region)).copied()
    }

    /// The action at graph index `a`, or `None` for the stall loop.
    pub fn action(&self, a: usize) -> Option<&AbstractAction> {
        self.actions[a].as_ref()
    }

    /// Restriction to the vertices reachable from `v0`.
    pub fn reachable_from(&self, v0: usize) -> BorderAbstraction {
        let (graph, map) = self.graph.restrict(&self.graph.reachable_from(v0));
        let mut vertices = Vec::with_capacity(graph.len());
        let mut index = HashMap::new();
        for (old, new) in map.iter().enumerate() {
            if let Some(new) = new {
                debug_assert_eq!(*new, vertices.len());
                let v = self.vertices[old].clone();
                index.insert((v.location.clone(), v.region), *new);
                vertices.push(v);
            }
        }
        BorderAbstraction {
            graph,
            ladder: self.ladder.clone(),
            vertices,
            actions: self.actions.clone(),
            index,
        }
    }
}

/// Builds the border abstraction of a valid, bounded, bi-valued arena.
///
/// Vertices are ordered by location id, then by region; actions by target
/// region, then label, with the stall loop last. A non-target vertex
/// without any edge gets a weight-0 stall self-loop, so deadlocks count as
/// never reaching the target.
pub fn build_border_abstraction(arena: &PtgArena) -> Result<BorderAbstraction, AbstractionError> {
    let violations = validate_arena(arena);
    if !violations.is_empty() {
        return Err(AbstractionError::Invalid(violations));
    }
    if let Some(l) = arena.locations.iter().find(|l| !l.invariant.is_bounded_above()) {
        return Err(AbstractionError::Unbounded(l.id.clone()));
    }
    bi_valued_profile(arena)?;

    let ladder = ConstantLadder::of_arena(arena);
    let regions = ladder.useful_regions();
    let mut locations: Vec<_> = arena.locations.iter().collect();
    locations.sort_by(|a, b| a.id.cmp(&b.id));

    let mut graph = PricedGameGraph::new();
    let mut vertices = Vec::new();
    let mut index = HashMap::new();
    // Per location: which regions lie inside its invariant.
    let mut inside: HashMap<&str, Vec<bool>> = HashMap::new();
    for loc in &locations {
        let mut row = Vec::with_capacity(regions.len());
        for r in &regions {
            let ok = region_satisfies(r, &loc.invariant, &ladder)?;
            row.push(ok);
            if ok {
                let vx = AbstractVertex {
                    location: loc.id.clone(),
                    region: *r,
                };
                let v = graph.add_vertex(vx.id(), loc.owner).expect("ids are unique");
                if arena.is_target(&loc.id) {
                    graph.set_target(v).expect("fresh vertex");
                }
                index.insert((loc.id.clone(), *r), v);
                vertices.push(vx);
            }
        }
        inside.insert(loc.id.as_str(), row);
    }

    let labels: Vec<&str> = arena.labels().into_iter().collect();
    let mut actions = Vec::new();
    let mut action_index = HashMap::new();
    for r in &regions {
        for label in &labels {
            let act = AbstractAction {
                target_region: *r,
                label: label.to_string(),
            };
            let a = graph.action(&act.name());
            action_index.insert((*r, *label), a);
            actions.push(Some(act));
        }
    }
    let stall = graph.action(STALL);
    actions.push(None);

    for (v, vx) in vertices.iter().enumerate() {
        let loc = arena.location(&vx.location).expect("vertex location exists");
        let row = &inside[loc.id.as_str()];
        let start = regions.iter().position(|r| *r == vx.region).expect("useful region");
        let mut outgoing: Vec<&crate::arena::Transition> = arena.transitions_from(&loc.id).collect();
        outgoing.sort_by(|a, b| a.label.cmp(&b.label));
        for (j, target_region) in regions.iter().enumerate().skip(start) {
            if !row[j] {
                // Every region between I and J must satisfy the invariant.
                break;
            }
            for t in &outgoing {
                if !region_satisfies(target_region, &t.guard, &ladder)? {
                    continue;
                }
                let next = if t.reset { ladder.at(0) } else { *target_region };
                let Some(&succ) = index.get(&(t.target.clone(), next)) else {
                    continue;
                };
                let weight = loc.rate * delay(&vx.region, target_region)? + t.price;
                let a = action_index[&(*target_region, t.label.as_str())];
                graph.add_edge(v, a, succ, weight).expect("one edge per action");
            }
        }
        if graph.edges(v).is_empty() && !graph.is_target(v) {
            graph.add_edge(v, stall, v, 0).expect("no other edge");
        }
    }

    Ok(BorderAbstraction {
        graph,
        ladder,
        vertices,
        actions,
        index,
    })
}

/// Restriction of `g` to the vertices reachable from the vertex named `v0`.
pub fn reachable_subgraph(g: &PricedGameGraph, v0: &str) -> Result<PricedGameGraph, GraphError> {
    let start = g.vertex_index(v0).ok_or_else(|| GraphError::UnknownVertex(v0.to_string()))?;
    Ok(g.restrict(&g.reachable_from(start)).0)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Deterministic DOT rendering: Player 1 vertices are ellipses, Player 2
/// vertices boxes, targets double-bordered; edges are labelled `action / w`.
pub fn export_dot(g: &PricedGameGraph) -> String {
    let mut out = String::from("digraph abstraction {\n");
    for (v, vx) in g.vertices().iter().enumerate() {
        let shape = match vx.owner {
            Player::One => "ellipse",
            Player::Two => "box",
        };
        let peripheries = if g.is_target(v) { 2 } else { 1 };
        writeln!(
            out,
            "  n{v} [label={}, shape={shape}, peripheries={peripheries}];",
            quote(&vx.id)
        )
        .unwrap();
    }
    for v in 0..g.len() {
        for e in g.edges(v) {
            let label = format!("{} / {}", g.action_name(e.action), e.weight);
            writeln!(out, "  n{v} -> n{} [label={}];", e.to, quote(&label)).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

//! Interdependent network data model and structural transforms.
//!
//! A network consists of two constituent layers. Nodes in [`Layer::Control`]
//! host orchestration functions; nodes in [`Layer::Infra`] are infrastructure.
//! Intra-edges join nodes of the same layer, dependency arcs join nodes of
//! different layers (the arc tail supports the arc head). A pair of nodes
//! with arcs in both directions is a *support pair*: the seed from which
//! functionality can bootstrap after a total failure.

mod parse;

pub use parse::{format_topology, parse_topology, LoadError};

use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

/// Dense node index, stable within one network instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Constituent layer of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    /// Function/control layer (layer 0 in topology files).
    Control,
    /// Infrastructure layer (layer 1 in topology files).
    Infra,
}

impl Layer {
    pub fn index(self) -> u8 {
        match self {
            Layer::Control => 0,
            Layer::Infra => 1,
        }
    }

    pub fn from_index(i: u8) -> Option<Layer> {
        match i {
            0 => Some(Layer::Control),
            1 => Some(Layer::Infra),
            _ => None,
        }
    }
}

/// Cross-layer node pair with dependency arcs in both directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SupportPair {
    /// Member in the control layer.
    pub v0: NodeId,
    /// Member in the infrastructure layer.
    pub v1: NodeId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetError {
    #[error("node {0} out of range (network has {1} nodes)")]
    UnknownNode(NodeId, usize),
    #[error("edge ({0}, {1}) is not an intra-edge of the network")]
    UnknownEdge(NodeId, NodeId),
    #[error("attribute vectors disagree with layer vector length {0}")]
    LengthMismatch(usize),
    #[error("network is not one-layered: control nodes {0:?} have nonzero demand")]
    NotOneLayered(Vec<NodeId>),
    #[error("control-layer nodes {0:?} have nonzero utility")]
    ControlUtility(Vec<NodeId>),
    #[error("network has no control-layer node")]
    NoControlNode,
    #[error("no functional node in the supplied state")]
    NoFunctionalNode,
}

/// Structural invariant violation reported by [`InterdependentNetwork::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    CrossLayerEdge(NodeId, NodeId),
    SameLayerArc(NodeId, NodeId),
    SelfLoopEdge(NodeId),
    SelfLoopArc(NodeId),
    DuplicateEdge(NodeId, NodeId),
    DuplicateArc(NodeId, NodeId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CrossLayerEdge(a, b) => write!(f, "intra-edge ({a}, {b}) joins different layers"),
            Violation::SameLayerArc(a, b) => write!(f, "dependency arc ({a}, {b}) joins the same layer"),
            Violation::SelfLoopEdge(v) => write!(f, "self-loop edge at node {v}"),
            Violation::SelfLoopArc(v) => write!(f, "self-loop arc at node {v}"),
            Violation::DuplicateEdge(a, b) => write!(f, "duplicate intra-edge ({a}, {b})"),
            Violation::DuplicateArc(a, b) => write!(f, "duplicate dependency arc ({a}, {b})"),
        }
    }
}

/// Two-layer interdependent network. Immutable after construction; all
/// transforms return new instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterdependentNetwork {
    layers: Vec<Layer>,
    demand: Vec<u32>,
    utility: Vec<u32>,
    intra_edges: Vec<(NodeId, NodeId)>,
    dep_arcs: Vec<(NodeId, NodeId)>,
    // Derived, deduplicated adjacency with sorted neighbor order.
    intra_adj: Vec<Vec<NodeId>>,
    arc_out: Vec<Vec<NodeId>>,
    arc_in: Vec<Vec<NodeId>>,
    /// Undirected view over intra-edges and arcs combined.
    adj: Vec<Vec<NodeId>>,
}

impl InterdependentNetwork {
    /// Builds a network from raw parts. Node ids in edges/arcs are bounds
    /// checked; semantic invariants are left to [`Self::validate`].
    pub fn from_parts(
        layers: Vec<Layer>,
        demand: Vec<u32>,
        utility: Vec<u32>,
        intra_edges: Vec<(NodeId, NodeId)>,
        dep_arcs: Vec<(NodeId, NodeId)>,
    ) -> Result<Self, NetError> {
        let n = layers.len();
        if demand.len() != n || utility.len() != n {
            return Err(NetError::LengthMismatch(n));
        }
        let check = |v: NodeId| {
            if v.0 < n {
                Ok(())
            } else {
                Err(NetError::UnknownNode(v, n))
            }
        };
        // Normalize edges to (lo, hi) so duplicates are detectable.
        let mut edges = Vec::with_capacity(intra_edges.len());
        for (a, b) in intra_edges {
            check(a)?;
            check(b)?;
            edges.push(if a.0 <= b.0 { (a, b) } else { (b, a) });
        }
        edges.sort();
        let mut arcs = dep_arcs;
        for &(a, b) in &arcs {
            check(a)?;
            check(b)?;
        }
        arcs.sort();

        let mut intra_adj = vec![Vec::new(); n];
        for &(a, b) in &edges {
            if a != b {
                intra_adj[a.0].push(b);
                intra_adj[b.0].push(a);
            }
        }
        let mut arc_out = vec![Vec::new(); n];
        let mut arc_in = vec![Vec::new(); n];
        for &(from, to) in &arcs {
            if from != to {
                arc_out[from.0].push(to);
                arc_in[to.0].push(from);
            }
        }
        let mut adj = vec![Vec::new(); n];
        for v in 0..n {
            let mut nbrs: Vec<NodeId> = intra_adj[v]
                .iter()
                .chain(&arc_out[v])
                .chain(&arc_in[v])
                .copied()
                .collect();
            nbrs.sort();
            nbrs.dedup();
            adj[v] = nbrs;
            intra_adj[v].sort();
            intra_adj[v].dedup();
            arc_out[v].sort();
            arc_out[v].dedup();
            arc_in[v].sort();
            arc_in[v].dedup();
        }
        Ok(Self {
            layers,
            demand,
            utility,
            intra_edges: edges,
            dep_arcs: arcs,
            intra_adj,
            arc_out,
            arc_in,
            adj,
        })
    }

    pub fn node_count(&self) -> usize {
        self.layers.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count()).map(NodeId)
    }

    pub fn layer(&self, v: NodeId) -> Layer {
        self.layers[v.0]
    }

    pub fn demand(&self, v: NodeId) -> u32 {
        self.demand[v.0]
    }

    pub fn utility(&self, v: NodeId) -> u32 {
        self.utility[v.0]
    }

    pub fn demands(&self) -> &[u32] {
        &self.demand
    }

    pub fn utilities(&self) -> &[u32] {
        &self.utility
    }

    pub fn intra_edges(&self) -> &[(NodeId, NodeId)] {
        &self.intra_edges
    }

    pub fn dep_arcs(&self) -> &[(NodeId, NodeId)] {
        &self.dep_arcs
    }

    pub fn intra_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.intra_adj[v.0]
    }

    /// Nodes adjacent to `v` through intra-edges or arcs in either direction.
    pub fn adjacent(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v.0]
    }

    pub fn has_arc(&self, from: NodeId, to: NodeId) -> bool {
        self.arc_out[from.0].binary_search(&to).is_ok()
    }

    pub fn has_intra_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.intra_adj[a.0].binary_search(&b).is_ok()
    }

    /// Copy of the network with one node's demand replaced.
    pub fn with_demand(&self, v: NodeId, demand: u32) -> Result<Self, NetError> {
        if v.0 >= self.node_count() {
            return Err(NetError::UnknownNode(v, self.node_count()));
        }
        let mut demands = self.demand.clone();
        demands[v.0] = demand;
        Self::from_parts(
            self.layers.clone(),
            demands,
            self.utility.clone(),
            self.intra_edges.clone(),
            self.dep_arcs.clone(),
        )
    }

    /// Checks the structural invariants and returns one entry per violation.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for w in self.intra_edges.windows(2) {
            if w[0] == w[1] {
                out.push(Violation::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        for w in self.dep_arcs.windows(2) {
            if w[0] == w[1] {
                out.push(Violation::DuplicateArc(w[0].0, w[0].1));
            }
        }
        for &(a, b) in &self.intra_edges {
            if a == b {
                out.push(Violation::SelfLoopEdge(a));
            } else if self.layer(a) != self.layer(b) {
                out.push(Violation::CrossLayerEdge(a, b));
            }
        }
        for &(from, to) in &self.dep_arcs {
            if from == to {
                out.push(Violation::SelfLoopArc(from));
            } else if self.layer(from) == self.layer(to) {
                out.push(Violation::SameLayerArc(from, to));
            }
        }
        out
    }

    /// All support pairs, ordered by (control member, infra member).
    pub fn find_support_pairs(&self) -> Vec<SupportPair> {
        let mut pairs = Vec::new();
        for &(from, to) in &self.dep_arcs {
            if self.layer(from) == Layer::Control
                && self.layer(to) == Layer::Infra
                && self.has_arc(to, from)
            {
                pairs.push(SupportPair { v0: from, v1: to });
            }
        }
        pairs.sort();
        pairs.dedup();
        pairs
    }

    /// Nodes that belong to at least one support pair, sorted.
    pub fn support_pair_members(&self) -> Vec<NodeId> {
        let mut members: Vec<NodeId> = self
            .find_support_pairs()
            .iter()
            .flat_map(|p| [p.v0, p.v1])
            .collect();
        members.sort();
        members.dedup();
        members
    }

    /// Support-pair partners of `v`, sorted.
    pub fn pair_partners(&self, v: NodeId) -> Vec<NodeId> {
        self.arc_out[v.0]
            .iter()
            .copied()
            .filter(|&w| self.has_arc(w, v))
            .collect()
    }

    /// Replaces a failed intra-edge with a failed proxy node and two intact
    /// edges. The proxy joins the endpoints' layer with the caller-supplied
    /// repair demand and zero utility; its id is the next free index. Callers
    /// append the proxy to their failed sets.
    pub fn edge_failure_to_node_failure(
        &self,
        edge: (NodeId, NodeId),
        proxy_demand: u32,
    ) -> Result<(Self, NodeId), NetError> {
        let (a, b) = if edge.0 .0 <= edge.1 .0 {
            (edge.0, edge.1)
        } else {
            (edge.1, edge.0)
        };
        if self.intra_edges.binary_search(&(a, b)).is_err() {
            return Err(NetError::UnknownEdge(edge.0, edge.1));
        }
        let proxy = NodeId(self.node_count());
        let mut layers = self.layers.clone();
        layers.push(self.layer(a));
        let mut demand = self.demand.clone();
        demand.push(proxy_demand);
        let mut utility = self.utility.clone();
        utility.push(0);
        let mut edges: Vec<(NodeId, NodeId)> = self
            .intra_edges
            .iter()
            .copied()
            .filter(|&e| e != (a, b))
            .collect();
        edges.push((a, proxy));
        edges.push((proxy, b));
        let net = Self::from_parts(layers, demand, utility, edges, self.dep_arcs.clone())?;
        Ok((net, proxy))
    }

    /// Converts a general network with zero-utility control nodes into a
    /// one-layered network: a fresh node `x` (demand 0, utility 0) becomes
    /// the sole control node, all original nodes move to the infrastructure
    /// layer with their edges and arcs preserved as intra-edges, and `x`
    /// forms a support pair with every node that was in the control layer.
    /// Original node ids are unchanged; `x` takes the next free index.
    pub fn to_one_layered(&self) -> Result<(Self, NodeMapping), NetError> {
        let offenders: Vec<NodeId> = self
            .nodes()
            .filter(|&v| self.layer(v) == Layer::Control && self.utility(v) > 0)
            .collect();
        if !offenders.is_empty() {
            return Err(NetError::ControlUtility(offenders));
        }
        let n = self.node_count();
        let x = NodeId(n);
        let mut layers = vec![Layer::Infra; n];
        layers.push(Layer::Control);
        let mut demand = self.demand.clone();
        demand.push(0);
        let mut utility = self.utility.clone();
        utility.push(0);
        let mut edges = self.intra_edges.clone();
        // Arcs between the old layers become intra-edges of the new infra
        // layer; a support pair collapses to a single undirected edge.
        for &(from, to) in &self.dep_arcs {
            let e = if from.0 <= to.0 { (from, to) } else { (to, from) };
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
        let mut arcs = Vec::new();
        for v in self.nodes() {
            if self.layer(v) == Layer::Control {
                arcs.push((x, v));
                arcs.push((v, x));
            }
        }
        let net = Self::from_parts(layers, demand, utility, edges, arcs)?;
        let mapping = NodeMapping {
            map: (0..n).map(NodeId).collect(),
            added: vec![x],
        };
        Ok((net, mapping))
    }

    /// Merges all control-layer nodes of a one-layered network into a single
    /// logical control node. Infra nodes keep their attributes and intra
    /// edges; the merged node inherits the union of the cross-layer
    /// adjacency (pairs stay pairs, one-way arcs stay one-way). Infra nodes
    /// are renumbered densely in id order; the merged node takes the next
    /// free index.
    pub fn aggregate_control_nodes(&self) -> Result<(Self, NodeMapping), NetError> {
        let bad: Vec<NodeId> = self
            .nodes()
            .filter(|&v| self.layer(v) == Layer::Control && self.demand(v) > 0)
            .collect();
        if !bad.is_empty() {
            return Err(NetError::NotOneLayered(bad));
        }
        if !self.nodes().any(|v| self.layer(v) == Layer::Control) {
            return Err(NetError::NoControlNode);
        }
        let infra: Vec<NodeId> = self.nodes().filter(|&v| self.layer(v) == Layer::Infra).collect();
        let merged = NodeId(infra.len());
        let mut map = vec![merged; self.node_count()];
        for (new_idx, &old) in infra.iter().enumerate() {
            map[old.0] = NodeId(new_idx);
        }
        let mut layers = vec![Layer::Infra; infra.len()];
        layers.push(Layer::Control);
        let mut demand: Vec<u32> = infra.iter().map(|&v| self.demand(v)).collect();
        demand.push(0);
        let mut utility: Vec<u32> = infra.iter().map(|&v| self.utility(v)).collect();
        utility.push(0);
        let mut edges = Vec::new();
        for &(a, b) in &self.intra_edges {
            if self.layer(a) == Layer::Infra && self.layer(b) == Layer::Infra {
                edges.push((map[a.0], map[b.0]));
            }
            // Control-layer intra-edges collapse into the merged node.
        }
        let mut arcs = Vec::new();
        for &(from, to) in &self.dep_arcs {
            let (nf, nt) = (map[from.0], map[to.0]);
            if nf != nt && !arcs.contains(&(nf, nt)) {
                arcs.push((nf, nt));
            }
        }
        let net = Self::from_parts(layers, demand, utility, edges, arcs)?;
        Ok((
            net,
            NodeMapping {
                map,
                added: vec![],
            },
        ))
    }

    /// Logical star of the recovery frontier: the nonfunctional nodes
    /// adjacent to any functional node, each joined to a virtual functional
    /// center. Errors when no node is functional.
    pub fn pseudo_star(&self, functional: &[bool]) -> Result<PseudoStar, NetError> {
        if !functional.iter().any(|&f| f) {
            return Err(NetError::NoFunctionalNode);
        }
        let mut leaves = Vec::new();
        for v in self.nodes() {
            if functional[v.0] {
                continue;
            }
            if self.adjacent(v).iter().any(|&w| functional[w.0]) {
                leaves.push(v);
            }
        }
        Ok(PseudoStar { leaves })
    }

    /// True when every component of the subgraph induced by `keep` is
    /// connected to the rest of `keep` as in a single component.
    pub fn is_connected_over(&self, keep: &[bool]) -> bool {
        let n = self.node_count();
        let kept: Vec<NodeId> = (0..n).map(NodeId).filter(|v| keep[v.0]).collect();
        let Some(&start) = kept.first() else {
            return true;
        };
        let mut seen = vec![false; n];
        seen[start.0] = true;
        let mut queue = VecDeque::from([start]);
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in self.adjacent(v) {
                if keep[w.0] && !seen[w.0] {
                    seen[w.0] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == kept.len()
    }
}

/// Old-to-new node id mapping returned by the structural transforms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeMapping {
    map: Vec<NodeId>,
    added: Vec<NodeId>,
}

impl NodeMapping {
    pub fn new_id(&self, old: NodeId) -> NodeId {
        self.map[old.0]
    }

    /// Nodes introduced by the transform, in creation order.
    pub fn added_nodes(&self) -> &[NodeId] {
        &self.added
    }
}

/// Frontier view produced by [`InterdependentNetwork::pseudo_star`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoStar {
    /// Nonfunctional nodes adjacent to the functional set, sorted by id.
    pub leaves: Vec<NodeId>,
}

/// Per-step repair budget schedule. Step indices start at 1; no resources
/// arrive at the failure instant t0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResourceSchedule {
    /// The same budget at every step.
    Constant(u32),
    /// Explicit budgets for steps 1, 2, ... in order.
    Sequence(Vec<u32>),
}

impl ResourceSchedule {
    /// Budget available at recovery step `step` (1-based).
    pub fn budget(&self, step: usize) -> Option<u32> {
        match self {
            ResourceSchedule::Constant(c) => Some(*c),
            ResourceSchedule::Sequence(seq) => seq.get(step.checked_sub(1)?).copied(),
        }
    }

    pub fn constant_budget(&self) -> Option<u32> {
        match self {
            ResourceSchedule::Constant(c) => Some(*c),
            ResourceSchedule::Sequence(_) => None,
        }
    }

    /// Smallest step count whose cumulative capacity covers `total_demand`.
    pub fn horizon_for(&self, total_demand: u64) -> Option<usize> {
        if total_demand == 0 {
            return Some(0);
        }
        match self {
            ResourceSchedule::Constant(c) => {
                (*c > 0).then(|| total_demand.div_ceil(*c as u64) as usize)
            }
            ResourceSchedule::Sequence(seq) => {
                let mut acc = 0u64;
                for (i, &c) in seq.iter().enumerate() {
                    acc += c as u64;
                    if acc >= total_demand {
                        return Some(i + 1);
                    }
                }
                None
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioViolation {
    Network(Violation),
    FailedOutOfRange(NodeId),
    DuplicateFailed(NodeId),
    ZeroBudget(usize),
    InsufficientCapacity { capacity: u64, demand: u64 },
}

impl fmt::Display for ScenarioViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioViolation::Network(v) => write!(f, "{v}"),
            ScenarioViolation::FailedOutOfRange(v) => write!(f, "failed node {v} out of range"),
            ScenarioViolation::DuplicateFailed(v) => write!(f, "node {v} listed failed twice"),
            ScenarioViolation::ZeroBudget(step) => write!(f, "budget at step {step} is zero"),
            ScenarioViolation::InsufficientCapacity { capacity, demand } => {
                write!(f, "schedule capacity {capacity} below failed demand {demand}")
            }
        }
    }
}

/// A failure instance: the network, the initially nonfunctional nodes, and
/// the resource schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureScenario {
    pub network: InterdependentNetwork,
    /// Initially nonfunctional nodes, sorted by id.
    pub failed_init: Vec<NodeId>,
    pub resources: ResourceSchedule,
}

impl FailureScenario {
    pub fn new(
        network: InterdependentNetwork,
        mut failed_init: Vec<NodeId>,
        resources: ResourceSchedule,
    ) -> Self {
        failed_init.sort();
        failed_init.dedup();
        Self {
            network,
            failed_init,
            resources,
        }
    }

    pub fn is_failed(&self, v: NodeId) -> bool {
        self.failed_init.binary_search(&v).is_ok()
    }

    /// Total repair demand of the initially failed nodes.
    pub fn total_failed_demand(&self) -> u64 {
        self.failed_init
            .iter()
            .map(|&v| self.network.demand(v) as u64)
            .collect::<Vec<_>>()
            .iter()
            .sum()
    }

    pub fn constant_budget(&self) -> Option<u32> {
        self.resources.constant_budget()
    }

    /// Number of recovery steps needed to saturate every failed node.
    pub fn horizon(&self) -> Option<usize> {
        self.resources.horizon_for(self.total_failed_demand())
    }

    pub fn validate(&self) -> Vec<ScenarioViolation> {
        let mut out: Vec<ScenarioViolation> = self
            .network
            .validate()
            .into_iter()
            .map(ScenarioViolation::Network)
            .collect();
        let n = self.network.node_count();
        for w in self.failed_init.windows(2) {
            if w[0] == w[1] {
                out.push(ScenarioViolation::DuplicateFailed(w[0]));
            }
        }
        for &v in &self.failed_init {
            if v.0 >= n {
                out.push(ScenarioViolation::FailedOutOfRange(v));
            }
        }
        match &self.resources {
            ResourceSchedule::Constant(c) => {
                if *c == 0 {
                    out.push(ScenarioViolation::ZeroBudget(1));
                }
            }
            ResourceSchedule::Sequence(seq) => {
                for (i, &c) in seq.iter().enumerate() {
                    if c == 0 {
                        out.push(ScenarioViolation::ZeroBudget(i + 1));
                    }
                }
                let capacity: u64 = seq.iter().map(|&c| c as u64).sum();
                let demand = self.total_failed_demand();
                if capacity < demand {
                    out.push(ScenarioViolation::InsufficientCapacity { capacity, demand });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(i: usize) -> NodeId {
        NodeId(i)
    }

    /// Two control nodes paired with two infra nodes, infra chain between them.
    fn supporting_pairs_instance() -> InterdependentNetwork {
        InterdependentNetwork::from_parts(
            vec![Layer::Infra, Layer::Infra, Layer::Control, Layer::Control],
            vec![1, 2, 0, 0],
            vec![3, 4, 0, 0],
            vec![(node(0), node(1))],
            vec![
                (node(2), node(0)),
                (node(0), node(2)),
                (node(3), node(1)),
                (node(1), node(3)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn validate_flags_cross_layer_edge() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Control, Layer::Infra],
            vec![0, 1],
            vec![0, 1],
            vec![(node(0), node(1))],
            vec![],
        )
        .unwrap();
        let violations = net.validate();
        assert_eq!(violations, vec![Violation::CrossLayerEdge(node(0), node(1))]);
    }

    #[test]
    fn validate_accepts_clean_two_layer_network() {
        let net = supporting_pairs_instance();
        assert!(net.validate().is_empty());
    }

    #[test]
    fn validate_flags_duplicates_and_self_loops() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Infra, Layer::Infra],
            vec![1, 1],
            vec![1, 1],
            vec![(node(0), node(1)), (node(1), node(0)), (node(0), node(0))],
            vec![],
        )
        .unwrap();
        let violations = net.validate();
        assert!(violations.contains(&Violation::DuplicateEdge(node(0), node(1))));
        assert!(violations.contains(&Violation::SelfLoopEdge(node(0))));
    }

    #[test]
    fn edge_failure_inserts_proxy_node() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Infra, Layer::Infra],
            vec![1, 1],
            vec![1, 1],
            vec![(node(0), node(1))],
            vec![],
        )
        .unwrap();
        let (out, proxy) = net.edge_failure_to_node_failure((node(0), node(1)), 2).unwrap();
        assert_eq!(proxy, node(2));
        assert_eq!(out.node_count(), 3);
        assert!(!out.has_intra_edge(node(0), node(1)));
        assert!(out.has_intra_edge(node(0), proxy));
        assert!(out.has_intra_edge(proxy, node(1)));
        assert_eq!(out.demand(proxy), 2);
        assert_eq!(out.utility(proxy), 0);
        assert!(out.validate().is_empty());
    }

    #[test]
    fn edge_failure_twice_grows_by_two_nodes() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Infra; 3],
            vec![1; 3],
            vec![1; 3],
            vec![(node(0), node(1)), (node(1), node(2))],
            vec![],
        )
        .unwrap();
        let (net2, _) = net.edge_failure_to_node_failure((node(0), node(1)), 1).unwrap();
        let (net3, _) = net2.edge_failure_to_node_failure((node(1), node(2)), 1).unwrap();
        assert_eq!(net3.node_count(), net.node_count() + 2);
        assert!(net3.validate().is_empty());
    }

    #[test]
    fn edge_failure_unknown_edge_errors() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Infra, Layer::Infra],
            vec![1, 1],
            vec![1, 1],
            vec![],
            vec![],
        )
        .unwrap();
        let err = net.edge_failure_to_node_failure((node(0), node(1)), 1).unwrap_err();
        assert_eq!(err, NetError::UnknownEdge(node(0), node(1)));
    }

    #[test]
    fn support_pairs_require_both_arcs() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Control, Layer::Control, Layer::Infra, Layer::Infra],
            vec![0, 0, 1, 1],
            vec![0, 0, 1, 1],
            vec![],
            vec![(node(0), node(2)), (node(2), node(0)), (node(1), node(3))],
        )
        .unwrap();
        let pairs = net.find_support_pairs();
        assert_eq!(pairs, vec![SupportPair { v0: node(0), v1: node(2) }]);
    }

    #[test]
    fn support_pairs_empty_without_arcs() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Infra, Layer::Infra],
            vec![1, 1],
            vec![1, 1],
            vec![(node(0), node(1))],
            vec![],
        )
        .unwrap();
        assert!(net.find_support_pairs().is_empty());
    }

    #[test]
    fn support_pairs_found_in_paired_instance() {
        let pairs = supporting_pairs_instance().find_support_pairs();
        assert_eq!(
            pairs,
            vec![
                SupportPair { v0: node(2), v1: node(0) },
                SupportPair { v0: node(3), v1: node(1) },
            ]
        );
    }

    #[test]
    fn one_layered_conversion_adds_aggregating_node() {
        let net = supporting_pairs_instance();
        let (out, mapping) = net.to_one_layered().unwrap();
        let x = mapping.added_nodes()[0];
        assert_eq!(x, node(4));
        assert_eq!(out.node_count(), 5);
        assert_eq!(out.layer(x), Layer::Control);
        assert_eq!(out.demand(x), 0);
        assert_eq!(out.utility(x), 0);
        // Every original control node is now an infra node paired with x.
        let pairs = out.find_support_pairs();
        assert_eq!(
            pairs,
            vec![
                SupportPair { v0: x, v1: node(2) },
                SupportPair { v0: x, v1: node(3) },
            ]
        );
        // Old arcs became intra-edges of the new infra layer.
        assert!(out.has_intra_edge(node(2), node(0)));
        assert!(out.has_intra_edge(node(3), node(1)));
        assert!(out.has_intra_edge(node(0), node(1)));
        // Definition of one-layered: no control node needs repair.
        assert!(out
            .nodes()
            .filter(|&v| out.layer(v) == Layer::Control)
            .all(|v| out.demand(v) == 0));
        assert!(out.validate().is_empty());
    }

    #[test]
    fn one_layered_conversion_rejects_control_utility() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Control, Layer::Infra],
            vec![0, 1],
            vec![5, 1],
            vec![],
            vec![(node(0), node(1)), (node(1), node(0))],
        )
        .unwrap();
        assert_eq!(
            net.to_one_layered().unwrap_err(),
            NetError::ControlUtility(vec![node(0)])
        );
    }

    #[test]
    fn one_layered_conversion_of_one_layered_input_only_adds_x() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Control, Layer::Infra, Layer::Infra],
            vec![0, 1, 2],
            vec![0, 3, 4],
            vec![(node(1), node(2))],
            vec![(node(0), node(1)), (node(1), node(0))],
        )
        .unwrap();
        let (out, mapping) = net.to_one_layered().unwrap();
        let x = mapping.added_nodes()[0];
        assert_eq!(out.node_count(), net.node_count() + 1);
        assert_eq!(out.find_support_pairs(), vec![SupportPair { v0: x, v1: node(0) }]);
        assert!(out.has_intra_edge(node(0), node(1)));
        assert!(out.has_intra_edge(node(1), node(2)));
        for v in net.nodes() {
            assert_eq!(out.demand(v), net.demand(v));
            assert_eq!(out.utility(v), net.utility(v));
        }
    }

    #[test]
    fn aggregate_merges_disjoint_hubs_into_star() {
        // Two control hubs, each paired with two disjoint infra leaves.
        let net = InterdependentNetwork::from_parts(
            vec![
                Layer::Control,
                Layer::Control,
                Layer::Infra,
                Layer::Infra,
                Layer::Infra,
                Layer::Infra,
            ],
            vec![0, 0, 1, 1, 1, 1],
            vec![0, 0, 1, 2, 3, 4],
            vec![],
            vec![
                (node(0), node(2)),
                (node(2), node(0)),
                (node(0), node(3)),
                (node(3), node(0)),
                (node(1), node(4)),
                (node(4), node(1)),
                (node(1), node(5)),
                (node(5), node(1)),
            ],
        )
        .unwrap();
        let (out, mapping) = net.aggregate_control_nodes().unwrap();
        assert_eq!(out.node_count(), 5);
        let merged = mapping.new_id(node(0));
        assert_eq!(merged, mapping.new_id(node(1)));
        assert_eq!(out.layer(merged), Layer::Control);
        let pairs = out.find_support_pairs();
        assert_eq!(pairs.len(), 4);
        assert!(pairs.iter().all(|p| p.v0 == merged));
        // Infra attributes carried over.
        assert_eq!(out.utility(mapping.new_id(node(5))), 4);
        assert!(out.validate().is_empty());
    }

    #[test]
    fn aggregate_single_control_is_isomorphic() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Infra, Layer::Infra, Layer::Control],
            vec![1, 2, 0],
            vec![3, 4, 0],
            vec![(node(0), node(1))],
            vec![(node(2), node(0)), (node(0), node(2))],
        )
        .unwrap();
        let (out, mapping) = net.aggregate_control_nodes().unwrap();
        assert_eq!(out.node_count(), 3);
        assert_eq!(mapping.new_id(node(0)), node(0));
        assert_eq!(mapping.new_id(node(2)), node(2));
        assert_eq!(out.demands(), net.demands());
        assert_eq!(out.utilities(), net.utilities());
        assert_eq!(out.intra_edges(), net.intra_edges());
        assert_eq!(out.dep_arcs(), net.dep_arcs());
    }

    #[test]
    fn aggregate_rejects_control_with_demand() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Control, Layer::Infra],
            vec![2, 1],
            vec![0, 1],
            vec![],
            vec![(node(0), node(1)), (node(1), node(0))],
        )
        .unwrap();
        assert_eq!(
            net.aggregate_control_nodes().unwrap_err(),
            NetError::NotOneLayered(vec![node(0)])
        );
    }

    #[test]
    fn pseudo_star_on_path() {
        // s* - a - b, s* functional.
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Infra; 3],
            vec![0, 1, 1],
            vec![1, 1, 1],
            vec![(node(0), node(1)), (node(1), node(2))],
            vec![],
        )
        .unwrap();
        let star = net.pseudo_star(&[true, false, false]).unwrap();
        assert_eq!(star.leaves, vec![node(1)]);
    }

    #[test]
    fn pseudo_star_all_functional_has_no_leaves() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Infra; 2],
            vec![1, 1],
            vec![1, 1],
            vec![(node(0), node(1))],
            vec![],
        )
        .unwrap();
        assert!(net.pseudo_star(&[true, true]).unwrap().leaves.is_empty());
    }

    #[test]
    fn pseudo_star_requires_functional_node() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Infra],
            vec![1],
            vec![1],
            vec![],
            vec![],
        )
        .unwrap();
        assert_eq!(net.pseudo_star(&[false]).unwrap_err(), NetError::NoFunctionalNode);
    }

    #[test]
    fn schedule_horizon_matches_ceiling_for_constant_budget() {
        let sched = ResourceSchedule::Constant(3);
        assert_eq!(sched.horizon_for(7), Some(3));
        assert_eq!(sched.horizon_for(0), Some(0));
        let seq = ResourceSchedule::Sequence(vec![1, 2, 3]);
        assert_eq!(seq.horizon_for(4), Some(3));
        assert_eq!(seq.horizon_for(10), None);
    }

    #[test]
    fn scenario_validation_checks_capacity() {
        let net = InterdependentNetwork::from_parts(
            vec![Layer::Infra, Layer::Control],
            vec![5, 0],
            vec![1, 0],
            vec![],
            vec![(node(1), node(0)), (node(0), node(1))],
        )
        .unwrap();
        let scn = FailureScenario::new(net, vec![node(0)], ResourceSchedule::Sequence(vec![1, 2]));
        let violations = scn.validate();
        assert_eq!(
            violations,
            vec![ScenarioViolation::InsufficientCapacity { capacity: 3, demand: 5 }]
        );
    }
}

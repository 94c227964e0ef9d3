//! Scenario construction: random graph generation, attribute sampling,
//! shipped fixtures, and adversarial-motif injection.

use crate::netmodel::{
    parse_topology, FailureScenario, InterdependentNetwork, Layer, LoadError, NodeId,
    ResourceSchedule,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

const GNP_RETRY_LIMIT: usize = 500;

const IBM_TOPOLOGY: &str = include_str!("../data/v1/ibm.net");
const BT_TOPOLOGY: &str = include_str!("../data/v1/bt_north_america.net");

#[derive(Debug, Error, PartialEq)]
pub enum ScenError {
    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("edge probability {0} outside (0, 1)")]
    BadProbability(f64),
    #[error("no connected graph after {attempts} draws of G({n}, {p}); try a larger p")]
    RetryLimit { n: usize, p: f64, attempts: usize },
    #[error("invalid attribute ranges: {0}")]
    BadRanges(String),
    #[error("anchor node {0} does not exist")]
    UnknownAnchor(NodeId),
    #[error("motif scale x must be at least 1")]
    BadMotifScale,
    #[error("fixture data failed to parse: {0}")]
    Fixture(#[from] LoadError),
}

/// Uniform integer attribute ranges plus the constant per-step budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttributeRanges {
    pub utility_lo: u32,
    pub utility_hi: u32,
    pub demand_lo: u32,
    pub demand_hi: u32,
    pub budget: u32,
}

impl Default for AttributeRanges {
    /// Utility in [1,4], demand in [1,2], one resource unit per step.
    fn default() -> Self {
        Self {
            utility_lo: 1,
            utility_hi: 4,
            demand_lo: 1,
            demand_hi: 2,
            budget: 1,
        }
    }
}

impl AttributeRanges {
    pub fn validate(&self) -> Result<(), ScenError> {
        if self.utility_lo < 1 || self.utility_lo > self.utility_hi {
            return Err(ScenError::BadRanges(format!(
                "utility range [{}, {}]",
                self.utility_lo, self.utility_hi
            )));
        }
        if self.demand_lo < 1 || self.demand_lo > self.demand_hi {
            return Err(ScenError::BadRanges(format!(
                "demand range [{}, {}]",
                self.demand_lo, self.demand_hi
            )));
        }
        if self.budget < 1 {
            return Err(ScenError::BadRanges("budget must be at least 1".into()));
        }
        Ok(())
    }
}

/// One draw of G(n, p): every unordered pair becomes an edge independently.
pub fn sample_gnp_edges(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    edges
}

fn edges_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

/// Connected G(n, p) graph arranged as a one-layered network: one uniformly
/// chosen node becomes the control node (demand 0, utility 0) and its
/// sampled edges become support pairs; the rest stay infra intra-edges.
/// Infra attributes are placeholders (d=1, u=1) until
/// [`assign_attributes`] samples them.
pub fn gnp_connected(n: usize, p: f64, seed: u64) -> Result<InterdependentNetwork, ScenError> {
    if n < 2 {
        return Err(ScenError::TooFewNodes(n));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(ScenError::BadProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = None;
    for _ in 0..GNP_RETRY_LIMIT {
        let draw = sample_gnp_edges(n, p, &mut rng);
        if edges_connected(n, &draw) {
            edges = Some(draw);
            break;
        }
    }
    let edges = edges.ok_or(ScenError::RetryLimit {
        n,
        p,
        attempts: GNP_RETRY_LIMIT,
    })?;
    let control = rng.gen_range(0..n);

    let layers: Vec<Layer> = (0..n)
        .map(|i| if i == control { Layer::Control } else { Layer::Infra })
        .collect();
    let demand: Vec<u32> = (0..n).map(|i| if i == control { 0 } else { 1 }).collect();
    let utility: Vec<u32> = (0..n).map(|i| if i == control { 0 } else { 1 }).collect();
    let mut intra = Vec::new();
    let mut arcs = Vec::new();
    for (a, b) in edges {
        if a == control || b == control {
            let other = if a == control { b } else { a };
            arcs.push((NodeId(control), NodeId(other)));
            arcs.push((NodeId(other), NodeId(control)));
        } else {
            intra.push((NodeId(a), NodeId(b)));
        }
    }
    Ok(InterdependentNetwork::from_parts(layers, demand, utility, intra, arcs)
        .expect("generated ids are in range"))
}

/// Samples per-node attributes and wraps the network in a total-failure
/// scenario: infra attributes uniform in the given ranges, control nodes at
/// demand 0 / utility 0, all infra nodes initially failed, constant budget.
pub fn assign_attributes(
    network: &InterdependentNetwork,
    ranges: &AttributeRanges,
    seed: u64,
) -> Result<FailureScenario, ScenError> {
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut demand = Vec::with_capacity(network.node_count());
    let mut utility = Vec::with_capacity(network.node_count());
    let mut failed = Vec::new();
    for v in network.nodes() {
        match network.layer(v) {
            Layer::Control => {
                demand.push(0);
                utility.push(0);
            }
            Layer::Infra => {
                utility.push(rng.gen_range(ranges.utility_lo..=ranges.utility_hi));
                demand.push(rng.gen_range(ranges.demand_lo..=ranges.demand_hi));
                failed.push(v);
            }
        }
    }
    let layers = network.nodes().map(|v| network.layer(v)).collect();
    let net = InterdependentNetwork::from_parts(
        layers,
        demand,
        utility,
        network.intra_edges().to_vec(),
        network.dep_arcs().to_vec(),
    )
    .expect("same ids as input");
    Ok(FailureScenario::new(
        net,
        failed,
        ResourceSchedule::Constant(ranges.budget),
    ))
}

/// The four-server fixture behind the published recovery-order comparison:
/// infra chain v1-v2-v3-v4 (ids 0..3) with demands (2,3,1,1) and unit
/// utilities; control functions f1, f2 (ids 4, 5) support-paired with v1,
/// v2; functions f3, f4 (ids 6, 7) hosted on v3, v4 through one-way arcs.
/// All servers start failed; one resource unit arrives per step.
pub fn motivating_fixture() -> FailureScenario {
    let v = NodeId;
    let net = InterdependentNetwork::from_parts(
        vec![
            Layer::Infra,
            Layer::Infra,
            Layer::Infra,
            Layer::Infra,
            Layer::Control,
            Layer::Control,
            Layer::Control,
            Layer::Control,
        ],
        vec![2, 3, 1, 1, 0, 0, 0, 0],
        vec![1, 1, 1, 1, 0, 0, 0, 0],
        vec![(v(0), v(1)), (v(1), v(2)), (v(2), v(3))],
        vec![
            (v(4), v(0)),
            (v(0), v(4)),
            (v(5), v(1)),
            (v(1), v(5)),
            (v(2), v(6)),
            (v(3), v(7)),
        ],
    )
    .expect("fixture ids are dense");
    FailureScenario::new(net, vec![v(0), v(1), v(2), v(3)], ResourceSchedule::Constant(1))
}

/// The three-node trap that defeats utility/demand greed: a cheap decoy A,
/// a low-ratio shield B, and a high-utility node C hidden behind B.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdversarialMotif {
    /// Scale of the trap; the planner gap grows linearly in it.
    pub x: u32,
    /// Existing node the motif attaches to.
    pub anchor: NodeId,
}

/// Appends the motif nodes A (u=1, d=x), B (u=1, d=x+1), C (u=10, d=x) to
/// the scenario's network, marks them failed, and wires anchor-A, anchor-B,
/// B-C. A control anchor is joined through support pairs, an infra anchor
/// through intra-edges. Pre-existing attributes are untouched.
pub fn inject_adversarial(
    scenario: &FailureScenario,
    motif: AdversarialMotif,
) -> Result<FailureScenario, ScenError> {
    if motif.x < 1 {
        return Err(ScenError::BadMotifScale);
    }
    let net = &scenario.network;
    let n = net.node_count();
    if motif.anchor.0 >= n {
        return Err(ScenError::UnknownAnchor(motif.anchor));
    }
    let a = NodeId(n);
    let b = NodeId(n + 1);
    let c = NodeId(n + 2);
    let mut layers: Vec<Layer> = net.nodes().map(|v| net.layer(v)).collect();
    layers.extend([Layer::Infra; 3]);
    let mut demand = net.demands().to_vec();
    demand.extend([motif.x, motif.x + 1, motif.x]);
    let mut utility = net.utilities().to_vec();
    utility.extend([1, 1, 10]);
    let mut edges = net.intra_edges().to_vec();
    let mut arcs = net.dep_arcs().to_vec();
    match net.layer(motif.anchor) {
        Layer::Control => {
            for leaf in [a, b] {
                arcs.push((motif.anchor, leaf));
                arcs.push((leaf, motif.anchor));
            }
        }
        Layer::Infra => {
            edges.push((motif.anchor, a));
            edges.push((motif.anchor, b));
        }
    }
    edges.push((b, c));
    let network = InterdependentNetwork::from_parts(layers, demand, utility, edges, arcs)
        .expect("appended ids are dense");
    let mut failed = scenario.failed_init.clone();
    failed.extend([a, b, c]);
    Ok(FailureScenario::new(
        network,
        failed,
        scenario.resources.clone(),
    ))
}

/// The motif alone behind a single saturated control node, unit budget.
pub fn standalone_motif(x: u32) -> Result<FailureScenario, ScenError> {
    let control = NodeId(0);
    let net = InterdependentNetwork::from_parts(
        vec![Layer::Control],
        vec![0],
        vec![0],
        vec![],
        vec![],
    )
    .expect("single node");
    let base = FailureScenario::new(net, vec![], ResourceSchedule::Constant(1));
    inject_adversarial(&base, AdversarialMotif { x, anchor: control })
}

/// The shipped 18-node IBM backbone fixture (17 infra nodes in a tree plus
/// the control node paired with node 0). The adversarial variant raises the
/// demand of node 2 from 2 to 3 and changes nothing else. Attributes are
/// synthetic defaults.
pub fn ibm_fixture(adversarial: bool) -> Result<FailureScenario, ScenError> {
    let scenario = parse_topology(IBM_TOPOLOGY)?;
    if !adversarial {
        return Ok(scenario);
    }
    let network = scenario
        .network
        .with_demand(NodeId(2), 3)
        .expect("node 2 exists in the fixture");
    Ok(FailureScenario::new(
        network,
        scenario.failed_init,
        scenario.resources,
    ))
}

/// The shipped 36-node backbone stand-in with 76 links and one control node.
pub fn bt_north_america() -> Result<FailureScenario, ScenError> {
    Ok(parse_topology(BT_TOPOLOGY)?)
}

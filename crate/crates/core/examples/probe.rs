use progrec::netmodel::{FailureScenario, InterdependentNetwork, Layer, NodeId, ResourceSchedule};
use progrec::scenlab::{assign_attributes, gnp_connected, AttributeRanges};
use progrec::solvers::{brute_force, dp_opt};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Random two-layer instance whose cross-layer adjacency is support pairs only.
fn random_two_layer(seed: u64) -> FailureScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n0 = rng.gen_range(1..=2usize);
    let n1 = rng.gen_range(3..=4usize);
    let _n = n0 + n1;
    // controls first (ids 0..n0), infra after
    let mut layers = vec![Layer::Control; n0];
    layers.extend(vec![Layer::Infra; n1]);
    let mut demand: Vec<u32> = (0..n0).map(|_| rng.gen_range(0..=2)).collect();
    demand.extend((0..n1).map(|_| rng.gen_range(1..=2u32)));
    let utility: Vec<u32> = (0..n0).map(|_| 0).chain((0..n1).map(|_| rng.gen_range(1..=4u32))).collect();
    let mut edges = Vec::new();
    let mut arcs = Vec::new();
    // every control pairs with >=1 infra node
    for c in 0..n0 {
        let partner = n0 + rng.gen_range(0..n1);
        arcs.push((NodeId(c), NodeId(partner)));
        arcs.push((NodeId(partner), NodeId(c)));
    }
    // random infra tree + extra edges
    for i in 1..n1 {
        let j = rng.gen_range(0..i);
        edges.push((NodeId(n0 + i), NodeId(n0 + j)));
    }
    if n1 >= 3 && rng.gen_bool(0.5) {
        edges.push((NodeId(n0), NodeId(n0 + n1 - 1)));
    }
    if n0 == 2 && rng.gen_bool(0.5) {
        edges.push((NodeId(0), NodeId(1))); // control intra edge
    }
    // extra pair sometimes
    if rng.gen_bool(0.4) {
        let c = rng.gen_range(0..n0);
        let partner = n0 + rng.gen_range(0..n1);
        let a = (NodeId(c), NodeId(partner));
        if !arcs.contains(&a) {
            arcs.push(a);
            arcs.push((a.1, a.0));
        }
    }
    let net = InterdependentNetwork::from_parts(layers, demand, utility, edges, arcs).unwrap();
    let failed: Vec<NodeId> = net.nodes().filter(|&v| net.demand(v) > 0).collect();
    FailureScenario::new(net, failed, ResourceSchedule::Constant(1))
}

fn main() {
    let t = Instant::now();
    let mut checked = 0;
    for seed in 0..40u64 {
        let scn = random_two_layer(seed);
        let orig = match brute_force(&scn, 10) {
            Ok(r) => r.total_utility,
            Err(e) => { println!("seed {seed}: skipped ({e})"); continue; }
        };
        let (converted, map) = scn.network.to_one_layered().unwrap();
        let conv_failed: Vec<NodeId> = scn.failed_init.iter().map(|&v| map.new_id(v)).collect();
        let conv = FailureScenario::new(converted, conv_failed, scn.resources.clone());
        let conv_opt = brute_force(&conv, 10).unwrap().total_utility;
        let (agg, amap) = conv.network.aggregate_control_nodes().unwrap();
        let agg_failed: Vec<NodeId> = conv.failed_init.iter().map(|&v| amap.new_id(v)).collect();
        let agg_scn = FailureScenario::new(agg, agg_failed, conv.resources.clone());
        let agg_opt = brute_force(&agg_scn, 10).unwrap().total_utility;
        if orig != conv_opt || conv_opt != agg_opt {
            println!("seed {seed}: MISMATCH orig={orig} conv={conv_opt} agg={agg_opt}");
        }
        checked += 1;
    }
    println!("invariance checked {checked} instances in {:.1}s", t.elapsed().as_secs_f64());

    // criterion 3 timing: dp == brute over 200 GNP instances
    let t = Instant::now();
    let mut agree = 0;
    for seed in 0..200u64 {
        let n = 5 + (seed as usize % 4);
        let net = gnp_connected(n, 0.2, seed).unwrap();
        let scn = assign_attributes(&net, &AttributeRanges::default(), seed ^ 0xabcd).unwrap();
        let dp = dp_opt(&scn).unwrap().total_utility;
        let bf = brute_force(&scn, 10).unwrap().total_utility;
        if dp == bf { agree += 1; } else { println!("seed {seed}: dp {dp} != brute {bf}"); }
    }
    println!("dp==brute on {agree}/200 in {:.1}s", t.elapsed().as_secs_f64());
}

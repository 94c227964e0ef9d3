//! Property tests over the model invariants.

use progrec::agent::{
    action_count, action_from_index, action_index, Experience, ExplorationSchedule, ReplayBuffer,
};
use progrec::dynamics::{apply_allocation, compute_functional, initial_state, RecoveryPlan};
use progrec::netmodel::{
    format_topology, parse_topology, FailureScenario, InterdependentNetwork, Layer, NodeId,
    ResourceSchedule, SupportPair,
};
use progrec::solvers::random_step;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Arbitrary small two-layer network with a few pairs and edges.
fn arb_network() -> impl Strategy<Value = InterdependentNetwork> {
    (2usize..8, any::<u64>()).prop_map(|(infra, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let controls = 1 + (seed as usize % 2);
        let n = infra + controls;
        let mut layers = vec![Layer::Infra; infra];
        layers.extend(vec![Layer::Control; controls]);
        let demand: Vec<u32> = (0..n)
            .map(|i| if i < infra { rng.gen_range(1..=3) } else { 0 })
            .collect();
        let utility: Vec<u32> = (0..n)
            .map(|i| if i < infra { rng.gen_range(0..=4) } else { 0 })
            .collect();
        let mut edges = Vec::new();
        for i in 1..infra {
            edges.push((NodeId(i), NodeId(rng.gen_range(0..i))));
        }
        let mut arcs = Vec::new();
        for c in 0..controls {
            let partner = rng.gen_range(0..infra);
            arcs.push((NodeId(infra + c), NodeId(partner)));
            arcs.push((NodeId(partner), NodeId(infra + c)));
        }
        if rng.gen_bool(0.5) {
            // One-way hosting arc from an infra node to a control node.
            arcs.push((NodeId(rng.gen_range(0..infra)), NodeId(infra)));
        }
        InterdependentNetwork::from_parts(layers, demand, utility, edges, arcs).unwrap()
    })
}

proptest! {
    #[test]
    fn epsilon_schedule_matches_closed_form(k in 0usize..=20_000) {
        let s = ExplorationSchedule::default();
        let expect = (1.0 - k as f64 * 1e-4).max(0.1);
        prop_assert!((s.epsilon(k) - expect).abs() < 1e-12);
        prop_assert!(s.epsilon(k) >= s.epsilon(k + 1));
    }

    #[test]
    fn action_indexing_round_trips(n in 2usize..12, idx_seed in any::<u64>()) {
        let idx = (idx_seed % action_count(n) as u64) as usize;
        let action = action_from_index(idx, n);
        prop_assert_ne!(action.first, action.second);
        prop_assert_eq!(action_index(action, n), idx);
    }

    #[test]
    fn replay_buffer_is_fifo_and_self_contained(
        capacity in 1usize..12,
        pushes in 0usize..40,
        seed in any::<u64>(),
    ) {
        let mut buffer = ReplayBuffer::new(capacity);
        let mut model: Vec<usize> = Vec::new();
        for tag in 0..pushes {
            buffer.push(Experience {
                state: vec![tag as f64],
                action: tag,
                reward: 0.0,
                next_state: vec![],
                terminal: false,
            });
            model.push(tag);
            if model.len() > capacity {
                model.remove(0);
            }
        }
        prop_assert_eq!(buffer.len(), model.len());
        let stored: Vec<usize> = buffer.iter().map(|e| e.action).collect();
        prop_assert_eq!(&stored, &model);
        if !buffer.is_empty() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for idx in buffer.sample_indices(32, &mut rng) {
                prop_assert!(model.contains(&buffer.get(idx).action));
            }
        }
    }

    #[test]
    fn network_transforms_keep_invariants(net in arb_network()) {
        prop_assert!(net.validate().is_empty());
        let (one, mapping) = net.to_one_layered().unwrap();
        prop_assert!(one.validate().is_empty());
        // Definition of one-layered: every control node repairs for free.
        for v in one.nodes() {
            if one.layer(v) == Layer::Control {
                prop_assert_eq!(one.demand(v), 0);
            }
        }
        // The fresh node pairs with every original control node.
        let x = mapping.added_nodes()[0];
        let pairs = one.find_support_pairs();
        for v in net.nodes() {
            if net.layer(v) == Layer::Control {
                prop_assert!(pairs.contains(&SupportPair { v0: x, v1: mapping.new_id(v) }));
            }
        }
        let (agg, _) = one.aggregate_control_nodes().unwrap();
        prop_assert!(agg.validate().is_empty());
        let controls = agg.nodes().filter(|&v| agg.layer(v) == Layer::Control).count();
        prop_assert_eq!(controls, 1);
    }

    #[test]
    fn edge_failure_preserves_components_of_surviving_nodes(
        net in arb_network(),
        pick in any::<u64>(),
    ) {
        prop_assume!(!net.intra_edges().is_empty());
        let edge = net.intra_edges()[(pick % net.intra_edges().len() as u64) as usize];
        let (out, proxy) = net.edge_failure_to_node_failure(edge, 1).unwrap();
        prop_assert!(out.validate().is_empty());
        // Components over the original nodes (proxy excluded) match the
        // graph with the failed edge removed.
        let reach = |g: &InterdependentNetwork, skip_edge: Option<(NodeId, NodeId)>, keep: usize| {
            let mut seen = vec![false; g.node_count()];
            let mut comp = Vec::new();
            for start in 0..keep {
                if seen[start] {
                    continue;
                }
                let mut stack = vec![NodeId(start)];
                seen[start] = true;
                let mut members = vec![start];
                while let Some(v) = stack.pop() {
                    for &w in g.adjacent(v) {
                        if w.0 >= keep || seen[w.0] {
                            continue;
                        }
                        if let Some((a, b)) = skip_edge {
                            if (v == a && w == b) || (v == b && w == a) {
                                continue;
                            }
                        }
                        seen[w.0] = true;
                        members.push(w.0);
                        stack.push(w);
                    }
                }
                members.sort();
                comp.push(members);
            }
            comp.sort();
            comp
        };
        let before = reach(&net, Some(edge), net.node_count());
        let after = reach(&out, None, net.node_count());
        prop_assert_eq!(before, after);
        // With the proxy recovered the endpoints reconnect.
        prop_assert!(out.has_intra_edge(edge.0, proxy) || out.has_intra_edge(proxy, edge.0));
    }

    #[test]
    fn functional_nodes_are_always_saturated(net in arb_network(), mask_seed in any::<u64>()) {
        let n = net.node_count();
        let saturated: Vec<bool> = (0..n).map(|i| mask_seed >> (i % 64) & 1 == 1).collect();
        let functional = compute_functional(&net, &saturated);
        for i in 0..n {
            prop_assert!(!functional[i] || saturated[i]);
        }
    }

    #[test]
    fn plan_csv_round_trips(net in arb_network(), seed in any::<u64>()) {
        let failed: Vec<NodeId> = net
            .nodes()
            .filter(|&v| net.demand(v) > 0)
            .collect();
        let scn = FailureScenario::new(net, failed, ResourceSchedule::Constant(1));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let result = progrec::solvers::run_planner(&scn, |s, st| random_step(s, st, &mut rng)).unwrap();
        let text = result.plan.to_csv();
        let parsed = RecoveryPlan::from_csv(
            &text,
            result.plan.steps(),
            scn.network.node_count(),
        )
        .unwrap();
        prop_assert_eq!(result.plan, parsed);
    }

    #[test]
    fn topology_text_round_trips(net in arb_network()) {
        let failed: Vec<NodeId> = net.nodes().filter(|&v| net.demand(v) > 0).collect();
        let scn = FailureScenario::new(net, failed, ResourceSchedule::Constant(2));
        let text = format_topology(&scn);
        let parsed = parse_topology(&text).unwrap();
        prop_assert_eq!(scn, parsed);
    }

    #[test]
    fn functional_set_never_shrinks_under_random_recovery(
        net in arb_network(),
        seed in any::<u64>(),
    ) {
        let failed: Vec<NodeId> = net.nodes().filter(|&v| net.demand(v) > 0).collect();
        let scn = FailureScenario::new(net, failed, ResourceSchedule::Constant(1));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = initial_state(&scn).unwrap();
        let mut prev = state.functional().to_vec();
        while !state.is_done() {
            let row = random_step(&scn, &state, &mut rng).unwrap();
            state = apply_allocation(&scn, &state, &row).unwrap().next_state;
            for (b, a) in prev.iter().zip(state.functional()) {
                prop_assert!(!b || *a);
            }
            prev = state.functional().to_vec();
        }
    }
}

//! Recovery planners: the RATIO and RANDOM heuristics, the exact subset-DP
//! planner (DP-OPT), and an enumeration oracle used as ground truth in tests.
//!
//! All planners speak the same protocol: a policy maps the current
//! [`RecoveryState`] to one allocation row, and [`run_planner`] rolls the
//! environment to completion while assembling the plan.

use crate::dynamics::{
    apply_allocation, evaluate_plan, initial_state, DynamicsError, RecoveryPlan, RecoveryState,
};
use crate::netmodel::{FailureScenario, NodeId};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::time::Instant;
use thiserror::Error;

/// Failed sets above this size would need more than a few GiB of DP tables.
pub const DP_MAX_FAILED: usize = 26;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("no unsaturated node left to receive resources")]
    NoTarget,
    #[error("DP-OPT requires a constant budget")]
    NonConstantBudget,
    #[error("demand condition violated by failed pair ({0}, {1}): d({0})+d({1}) <= 2C-1")]
    DemandCondition(NodeId, NodeId),
    #[error("{0} failed nodes exceed the DP cap of {1}")]
    TooManyFailed(usize, usize),
    #[error("instance too large for enumeration: {0} failed nodes > {1}")]
    TooLarge(usize, usize),
    #[error("failed nodes unreachable from any recovery seed")]
    Unreachable,
    #[error("policy step failed: {0}")]
    Policy(String),
}

/// First failed pair violating d(a)+d(b) > 2C-1, if any.
pub fn demand_condition_violation(
    scenario: &FailureScenario,
    budget: u32,
) -> Option<(NodeId, NodeId)> {
    let net = &scenario.network;
    let bound = 2 * budget as u64 - 1;
    for (i, &a) in scenario.failed_init.iter().enumerate() {
        for &b in &scenario.failed_init[i + 1..] {
            if net.demand(a) as u64 + net.demand(b) as u64 <= bound {
                return Some((a, b));
            }
        }
    }
    None
}

/// Outcome of one planner run.
#[derive(Debug, Clone)]
pub struct PlannerResult {
    pub plan: RecoveryPlan,
    pub total_utility: u64,
    /// Failed nodes in the order they reached saturation.
    pub order: Vec<NodeId>,
    /// Wall time of the run in seconds.
    pub elapsed: f64,
}

/// Unsaturated nodes eligible for resources under the adjacency discipline:
/// nodes adjacent to a functional node. While no such node exists, fall back
/// to support-pair members whose partner is already saturated (saturating
/// one completes the pair, so it turns functional the same step), then to
/// any support-pair member, then to any unsaturated node.
pub fn allocation_frontier(scenario: &FailureScenario, state: &RecoveryState) -> Vec<NodeId> {
    let net = &scenario.network;
    let unsaturated = || net.nodes().filter(|&v| state.remaining_of(v) > 0);
    let frontier: Vec<NodeId> = unsaturated()
        .filter(|&v| net.adjacent(v).iter().any(|&w| state.is_functional(w)))
        .collect();
    if !frontier.is_empty() {
        return frontier;
    }
    let seeding: Vec<NodeId> = unsaturated()
        .filter(|&v| net.pair_partners(v).iter().any(|&w| state.is_saturated(w)))
        .collect();
    if !seeding.is_empty() {
        return seeding;
    }
    let members: Vec<NodeId> = unsaturated()
        .filter(|&v| !net.pair_partners(v).is_empty())
        .collect();
    if !members.is_empty() {
        return members;
    }
    unsaturated().collect()
}

/// Superset of [`allocation_frontier`] used by the exhaustive search: every
/// order that could matter starts a step at a node adjacent to a functional
/// node or at a support-pair member (the only way to seed a new functional
/// region). Nodes outside the union only receive resources when nothing
/// else is left.
fn oracle_candidates(scenario: &FailureScenario, state: &RecoveryState) -> Vec<NodeId> {
    let net = &scenario.network;
    let candidates: Vec<NodeId> = net
        .nodes()
        .filter(|&v| state.remaining_of(v) > 0)
        .filter(|&v| {
            net.adjacent(v).iter().any(|&w| state.is_functional(w))
                || !net.pair_partners(v).is_empty()
        })
        .collect();
    if candidates.is_empty() {
        net.nodes().filter(|&v| state.remaining_of(v) > 0).collect()
    } else {
        candidates
    }
}

/// Frontier sorted by utility/demand descending, ties by ascending id.
pub fn ratio_candidates(scenario: &FailureScenario, state: &RecoveryState) -> Vec<NodeId> {
    let net = &scenario.network;
    let mut c = allocation_frontier(scenario, state);
    // u(a)/d(a) > u(b)/d(b)  <=>  u(a)*d(b) > u(b)*d(a); demands are >= 1 here.
    c.sort_by(|&a, &b| {
        let lhs = net.utility(a) as u64 * net.demand(b) as u64;
        let rhs = net.utility(b) as u64 * net.demand(a) as u64;
        rhs.cmp(&lhs).then(a.cmp(&b))
    });
    c
}

/// Pours the step budget down `priority`, saturating each node in turn, and
/// spills whatever is left into the remaining unsaturated nodes by id.
fn concentrate(
    scenario: &FailureScenario,
    state: &RecoveryState,
    priority: &[NodeId],
) -> Result<Vec<u32>, SolverError> {
    let n = scenario.network.node_count();
    let step = state.step() + 1;
    let budget = scenario
        .resources
        .budget(step)
        .ok_or(DynamicsError::NoBudget { step })? as u64;
    let mut left = budget.min(state.total_remaining());
    if left == 0 {
        return Err(SolverError::NoTarget);
    }
    let mut row = vec![0u32; n];
    let pour = |v: NodeId, row: &mut Vec<u32>, left: &mut u64| {
        let rem = (state.remaining_of(v) - row[v.0]) as u64;
        let give = rem.min(*left) as u32;
        row[v.0] += give;
        *left -= give as u64;
    };
    for &v in priority {
        if left == 0 {
            break;
        }
        pour(v, &mut row, &mut left);
    }
    if left > 0 {
        for v in scenario.network.nodes() {
            if left == 0 {
                break;
            }
            if state.remaining_of(v) > 0 {
                pour(v, &mut row, &mut left);
            }
        }
    }
    Ok(row)
}

/// One RATIO step: concentrating allocation down the frontier ordered by
/// utility/demand.
pub fn ratio_step(
    scenario: &FailureScenario,
    state: &RecoveryState,
) -> Result<Vec<u32>, SolverError> {
    let candidates = ratio_candidates(scenario, state);
    concentrate(scenario, state, &candidates)
}

/// One RANDOM step: concentrating allocation down a uniformly shuffled
/// frontier.
pub fn random_step(
    scenario: &FailureScenario,
    state: &RecoveryState,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<u32>, SolverError> {
    let mut candidates = allocation_frontier(scenario, state);
    // Fisher-Yates on the sorted candidate list keeps the draw seeded and
    // independent of discovery order.
    for i in (1..candidates.len()).rev() {
        let j = rng.gen_range(0..=i);
        candidates.swap(i, j);
    }
    concentrate(scenario, state, &candidates)
}

/// Rolls the environment to completion under `policy`, assembling the plan,
/// the saturation order, and the total utility (t0 term included).
pub fn run_planner<F>(scenario: &FailureScenario, mut policy: F) -> Result<PlannerResult, SolverError>
where
    F: FnMut(&FailureScenario, &RecoveryState) -> Result<Vec<u32>, SolverError>,
{
    let start = Instant::now();
    let mut state = initial_state(scenario)?;
    let n = scenario.network.node_count();
    let mut plan = RecoveryPlan::zeros(state.horizon(), n);
    let mut total = crate::dynamics::state_utility(&scenario.network, state.functional());
    let mut order = Vec::new();
    while !state.is_done() {
        let row = policy(scenario, &state)?;
        let outcome = apply_allocation(scenario, &state, &row)?;
        let step = state.step() + 1;
        plan.alloc[step] = row;
        for &v in &scenario.failed_init {
            if !state.is_saturated(v) && outcome.next_state.is_saturated(v) {
                order.push(v);
            }
        }
        total += outcome.reward;
        state = outcome.next_state;
    }
    Ok(PlannerResult {
        plan,
        total_utility: total,
        order,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Subset-DP tables: per-subset best value and best first choice, indexed by
/// bitmask over the failed node list.
#[derive(Debug, Clone)]
pub struct DpTables {
    /// Failed nodes in bit order.
    pub nodes: Vec<NodeId>,
    /// Optimal utility-to-go per subset; entry 0 is the empty set.
    pub best_value: Vec<i64>,
    /// Index into `nodes` of the best first recovery per subset.
    pub best_choice: Vec<u8>,
}

impl DpTables {
    /// Number of subsets the bottom-up pass touched (the empty set included).
    pub fn subsets_visited(&self) -> u64 {
        self.best_value.len() as u64
    }
}

fn check_demand_condition(scenario: &FailureScenario, budget: u32) -> Result<(), SolverError> {
    match demand_condition_violation(scenario, budget) {
        Some((a, b)) => Err(SolverError::DemandCondition(a, b)),
        None => Ok(()),
    }
}

/// Exact planner for constant budgets under the pairwise demand condition
/// d(a)+d(b) > 2C-1 (at most one node saturates per step). Bottom-up over
/// subsets X of the failed set: the first node recovered from X must be
/// adjacent, through intra-edges or a support pair, to a node outside X, and
/// contributes its utility for one step plus the time the rest of X needs.
pub fn dp_opt_with_tables(
    scenario: &FailureScenario,
) -> Result<(PlannerResult, DpTables), SolverError> {
    let start = Instant::now();
    let budget = scenario
        .constant_budget()
        .ok_or(SolverError::NonConstantBudget)?;
    check_demand_condition(scenario, budget)?;
    let failed = scenario.failed_init.clone();
    let k = failed.len();
    if k > DP_MAX_FAILED {
        return Err(SolverError::TooManyFailed(k, DP_MAX_FAILED));
    }
    let net = &scenario.network;
    let bit_of: HashMap<NodeId, usize> =
        failed.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    // Adjacency that guarantees recovery on saturation: intra-edges plus
    // support pairs (a saturated pair partner seeds functionality itself).
    let mut nbr_mask = vec![0u64; k];
    let mut outside = vec![false; k];
    for (i, &v) in failed.iter().enumerate() {
        let mut nbrs: Vec<NodeId> = net.intra_neighbors(v).to_vec();
        nbrs.extend(net.pair_partners(v));
        for w in nbrs {
            match bit_of.get(&w) {
                Some(&j) => nbr_mask[i] |= 1 << j,
                None => outside[i] = true,
            }
        }
    }

    let size = 1usize << k;
    let mut best_value = vec![i64::MIN; size];
    let mut best_choice = vec![u8::MAX; size];
    best_value[0] = 0;
    let full: u64 = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    for mask in 1..size as u64 {
        let total_demand: u64 = (0..k)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| net.demand(failed[i]) as u64)
            .sum();
        let mut best = i64::MIN;
        let mut choice = u8::MAX;
        for i in 0..k {
            if mask >> i & 1 == 0 {
                continue;
            }
            let reachable = outside[i] || nbr_mask[i] & (full & !mask) != 0;
            if !reachable {
                continue;
            }
            let rest = mask & !(1 << i);
            if best_value[rest as usize] == i64::MIN {
                continue;
            }
            let rest_demand = total_demand - net.demand(failed[i]) as u64;
            let steps_functional = 1 + rest_demand.div_ceil(budget as u64);
            let value =
                net.utility(failed[i]) as i64 * steps_functional as i64 + best_value[rest as usize];
            if value > best {
                best = value;
                choice = i as u8;
            }
        }
        best_value[mask as usize] = best;
        best_choice[mask as usize] = choice;
    }

    if k > 0 && best_value[size - 1] == i64::MIN {
        return Err(SolverError::Unreachable);
    }

    // Reconstruct the recovery order, earliest first.
    let mut order = Vec::with_capacity(k);
    let mut mask = full;
    while mask != 0 {
        let i = best_choice[mask as usize] as usize;
        order.push(failed[i]);
        mask &= !(1 << i);
    }
    let plan = plan_from_order(scenario, &order)?;
    let total_utility = evaluate_plan(scenario, &plan)?;
    debug_assert_eq!(total_utility as i64, best_value[size - 1].max(0));
    let tables = DpTables {
        nodes: failed,
        best_value,
        best_choice,
    };
    Ok((
        PlannerResult {
            plan,
            total_utility,
            order,
            elapsed: start.elapsed().as_secs_f64(),
        },
        tables,
    ))
}

/// See [`dp_opt_with_tables`].
pub fn dp_opt(scenario: &FailureScenario) -> Result<PlannerResult, SolverError> {
    dp_opt_with_tables(scenario).map(|(result, _)| result)
}

/// Concentrating plan that saturates the failed nodes in `order`.
pub fn plan_from_order(
    scenario: &FailureScenario,
    order: &[NodeId],
) -> Result<RecoveryPlan, SolverError> {
    let horizon = scenario.horizon().ok_or(DynamicsError::UnfinishableScenario)?;
    let n = scenario.network.node_count();
    let mut plan = RecoveryPlan::zeros(horizon, n);
    let mut remaining: Vec<u64> = (0..n)
        .map(|i| {
            if scenario.is_failed(NodeId(i)) {
                scenario.network.demand(NodeId(i)) as u64
            } else {
                0
            }
        })
        .collect();
    let mut cursor = 0usize;
    for step in 1..=horizon {
        let mut left = scenario
            .resources
            .budget(step)
            .ok_or(DynamicsError::NoBudget { step })? as u64;
        while left > 0 && cursor < order.len() {
            let v = order[cursor];
            let give = remaining[v.0].min(left);
            plan.alloc[step][v.0] += give as u32;
            remaining[v.0] -= give;
            left -= give;
            if remaining[v.0] == 0 {
                cursor += 1;
            }
        }
    }
    Ok(plan)
}

/// Exhaustive oracle: the exact optimum over recovery orders whose every
/// prefix respects the allocation frontier. When the pairwise demand
/// condition fails (several nodes can saturate in one step), falls back to a
/// memoized search over general concentrating assignments.
pub fn brute_force(
    scenario: &FailureScenario,
    max_nodes: usize,
) -> Result<PlannerResult, SolverError> {
    let start = Instant::now();
    let budget = scenario
        .constant_budget()
        .ok_or(SolverError::NonConstantBudget)?;
    let k = scenario.failed_init.len();
    if k > max_nodes {
        return Err(SolverError::TooLarge(k, max_nodes));
    }
    let sequential = check_demand_condition(scenario, budget).is_ok();
    let (order, plan) = if sequential {
        let (order, _) = best_order_search(scenario)?.ok_or(SolverError::Unreachable)?;
        let plan = plan_from_order(scenario, &order)?;
        (order, plan)
    } else {
        // The search branches over one primary target per step; rebuild the
        // plan by replaying those choices.
        let (targets, _) = best_concentrating_search(scenario)?.ok_or(SolverError::Unreachable)?;
        let mut state = initial_state(scenario)?;
        let n = scenario.network.node_count();
        let mut plan = RecoveryPlan::zeros(state.horizon(), n);
        let mut order = Vec::new();
        for &target in &targets {
            let row = concentrate(scenario, &state, &[target])?;
            let outcome = apply_allocation(scenario, &state, &row)?;
            plan.alloc[state.step() + 1] = row;
            for &v in &scenario.failed_init {
                if !state.is_saturated(v) && outcome.next_state.is_saturated(v) {
                    order.push(v);
                }
            }
            state = outcome.next_state;
        }
        (order, plan)
    };
    let total_utility = evaluate_plan(scenario, &plan)?;
    Ok(PlannerResult {
        plan,
        total_utility,
        order,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Depth-first search over frontier-consistent saturation orders, evaluated
/// through the environment.
fn best_order_search(
    scenario: &FailureScenario,
) -> Result<Option<(Vec<NodeId>, u64)>, SolverError> {
    fn recurse(
        scenario: &FailureScenario,
        state: &RecoveryState,
        acc_reward: u64,
        prefix: &mut Vec<NodeId>,
        best: &mut Option<(Vec<NodeId>, u64)>,
    ) -> Result<(), SolverError> {
        if state.is_done() {
            if best.as_ref().map_or(true, |(_, b)| acc_reward > *b) {
                *best = Some((prefix.clone(), acc_reward));
            }
            return Ok(());
        }
        for v in oracle_candidates(scenario, state) {
            // Saturate v across as many steps as its remaining demand needs.
            let mut inner = state.clone();
            let mut reward = acc_reward;
            while inner.remaining_of(v) > 0 {
                let row = concentrate(scenario, &inner, &[v])?;
                let outcome = apply_allocation(scenario, &inner, &row)?;
                reward += outcome.reward;
                inner = outcome.next_state;
            }
            prefix.push(v);
            recurse(scenario, &inner, reward, prefix, best)?;
            prefix.pop();
        }
        Ok(())
    }

    let state = initial_state(scenario)?;
    let t0 = crate::dynamics::state_utility(&scenario.network, state.functional());
    let mut best = None;
    let mut prefix = Vec::new();
    recurse(scenario, &state, t0, &mut prefix, &mut best)?;
    Ok(best)
}

/// Memoized search over concentrating per-step target choices for instances
/// where one step can saturate several nodes. Returns the best utility and a
/// concentration order achieving it.
fn best_concentrating_search(
    scenario: &FailureScenario,
) -> Result<Option<(Vec<NodeId>, u64)>, SolverError> {
    fn value_to_go(
        scenario: &FailureScenario,
        state: &RecoveryState,
        memo: &mut HashMap<Vec<u32>, (u64, Vec<NodeId>)>,
    ) -> Result<(u64, Vec<NodeId>), SolverError> {
        if state.is_done() {
            return Ok((0, Vec::new()));
        }
        if let Some(hit) = memo.get(state.remaining()) {
            return Ok(hit.clone());
        }
        let mut targets = oracle_candidates(scenario, state);
        if targets.is_empty() {
            return Err(SolverError::Unreachable);
        }
        // The frontier recomputes every step, so spill order within one row
        // still matters; branch over the primary target and spill by id.
        let mut best: Option<(u64, Vec<NodeId>)> = None;
        targets.sort();
        for &v in &targets {
            let row = concentrate(scenario, state, &[v])?;
            let outcome = apply_allocation(scenario, state, &row)?;
            let (tail, mut tail_order) = value_to_go(scenario, &outcome.next_state, memo)?;
            let total = outcome.reward + tail;
            tail_order.insert(0, v);
            if best.as_ref().map_or(true, |(b, _)| total > *b) {
                best = Some((total, tail_order));
            }
        }
        let best = best.expect("targets nonempty");
        memo.insert(state.remaining().to_vec(), best.clone());
        Ok(best)
    }

    let state = initial_state(scenario)?;
    let t0 = crate::dynamics::state_utility(&scenario.network, state.functional());
    let mut memo = HashMap::new();
    match value_to_go(scenario, &state, &mut memo) {
        Ok((value, order)) => Ok(Some((order, t0 + value))),
        Err(SolverError::Unreachable) => Ok(None),
        Err(e) => Err(e),
    }
}

/// One CSV row of the planner-comparison export.
pub fn result_csv_row(
    algo: &str,
    seed: u64,
    n: usize,
    total: u64,
    optimal: Option<u64>,
    elapsed: Option<f64>,
) -> String {
    let (opt_s, ratio_s) = match optimal {
        Some(opt) if opt > 0 => (opt.to_string(), format!("{:.4}", total as f64 / opt as f64)),
        Some(opt) => (opt.to_string(), "NA".to_string()),
        None => ("NA".to_string(), "NA".to_string()),
    };
    let elapsed_s = match elapsed {
        Some(t) => format!("{t:.3}"),
        None => "0.000".to_string(),
    };
    format!("{algo},{seed},{n},{total},{opt_s},{ratio_s},{elapsed_s}\n")
}

/// Header matching [`result_csv_row`].
pub const RESULT_CSV_HEADER: &str = "algo,seed,n,total_utility,optimal_utility,ratio_to_opt,elapsed_s\n";

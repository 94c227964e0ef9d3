//! Recovery semantics: saturation, functionality propagation, plan
//! evaluation, and the step/reward environment shared by all planners.
//!
//! A node is *saturated* once its cumulative allocation meets its demand,
//! and *functional* once it is saturated and connected to a completed
//! support pair through saturated nodes. Utility accrues at the end of each
//! step from every functional node; a node recovered at step t contributes
//! from step t through the horizon. The horizon is the smallest step count
//! whose cumulative budget covers the failed demand, so full-budget plans
//! finish exactly at the horizon. No resources arrive at t0; the t0 term of
//! the total counts nodes functional right after the failure.

use crate::netmodel::{FailureScenario, InterdependentNetwork, NodeId};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("allocation row has {got} entries, network has {want} nodes")]
    RowLength { got: usize, want: usize },
    #[error("step {step}: row sums to {got}, budget is {budget}")]
    OverBudget { step: usize, got: u64, budget: u64 },
    #[error("step {step}: allocation to node {node} with no remaining demand")]
    ZeroRemainingTarget { step: usize, node: NodeId },
    #[error("step {step}: no budget scheduled")]
    NoBudget { step: usize },
    #[error("episode already done at step {0}")]
    AlreadyDone(usize),
    #[error("scenario schedule cannot cover the failed demand")]
    UnfinishableScenario,
    #[error("step {step}: row sums to {got}, expected {expected}")]
    MalformedPlanRow { step: usize, got: u64, expected: u64 },
    #[error("plan has {got} rows, expected horizon+1 = {want}")]
    PlanLength { got: usize, want: usize },
    #[error("plan row 0 must be empty (resources arrive from step 1)")]
    NonzeroInitialRow,
}

/// Mutable per-step view of a recovery in progress.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryState {
    remaining: Vec<u32>,
    saturated: Vec<bool>,
    functional: Vec<bool>,
    step: usize,
    horizon: usize,
}

impl RecoveryState {
    pub fn remaining(&self) -> &[u32] {
        &self.remaining
    }

    pub fn remaining_of(&self, v: NodeId) -> u32 {
        self.remaining[v.0]
    }

    pub fn saturated(&self) -> &[bool] {
        &self.saturated
    }

    pub fn is_saturated(&self, v: NodeId) -> bool {
        self.saturated[v.0]
    }

    pub fn functional(&self) -> &[bool] {
        &self.functional
    }

    pub fn is_functional(&self, v: NodeId) -> bool {
        self.functional[v.0]
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn total_remaining(&self) -> u64 {
        self.remaining.iter().map(|&r| r as u64).sum()
    }

    /// Done once every failed node is saturated or the horizon is reached.
    pub fn is_done(&self) -> bool {
        self.saturated.iter().all(|&s| s) || self.step >= self.horizon
    }
}

/// Result of applying one allocation row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    pub next_state: RecoveryState,
    /// Sum of utilities of nodes functional at the end of the step.
    pub reward: u64,
    pub done: bool,
}

/// State right after the failure, before any resources arrive.
pub fn initial_state(scenario: &FailureScenario) -> Result<RecoveryState, DynamicsError> {
    let horizon = scenario.horizon().ok_or(DynamicsError::UnfinishableScenario)?;
    let net = &scenario.network;
    let mut remaining = vec![0u32; net.node_count()];
    for &v in &scenario.failed_init {
        remaining[v.0] = net.demand(v);
    }
    let saturated: Vec<bool> = remaining.iter().map(|&r| r == 0).collect();
    let functional = compute_functional(net, &saturated);
    Ok(RecoveryState {
        remaining,
        saturated,
        functional,
        step: 0,
        horizon,
    })
}

/// Fixed point of the functionality rule: a completed support pair (both
/// members saturated) seeds functionality, which then spreads to saturated
/// nodes through intra-edges and dependency arcs.
pub fn compute_functional(net: &InterdependentNetwork, saturated: &[bool]) -> Vec<bool> {
    let n = net.node_count();
    let mut functional = vec![false; n];
    let mut queue = VecDeque::new();
    for pair in net.find_support_pairs() {
        if saturated[pair.v0 .0] && saturated[pair.v1 .0] {
            for v in [pair.v0, pair.v1] {
                if !functional[v.0] {
                    functional[v.0] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in net.adjacent(v) {
            if saturated[w.0] && !functional[w.0] {
                functional[w.0] = true;
                queue.push_back(w);
            }
        }
    }
    functional
}

/// Total utility of the functional nodes under `functional`.
pub fn state_utility(net: &InterdependentNetwork, functional: &[bool]) -> u64 {
    net.nodes()
        .filter(|v| functional[v.0])
        .map(|v| net.utility(v) as u64)
        .sum()
}

/// True when some node could be saturated this step by a feasible row of the
/// same total, but this row saturates none.
pub fn is_splitting(state: &RecoveryState, row: &[u32]) -> bool {
    let budget: u64 = row.iter().map(|&x| x as u64).sum();
    let some_possible = state
        .remaining
        .iter()
        .any(|&r| r > 0 && (r as u64) <= budget);
    let achieved = row
        .iter()
        .zip(&state.remaining)
        .any(|(&give, &rem)| rem > 0 && give >= rem);
    some_possible && !achieved
}

fn check_row(
    scenario: &FailureScenario,
    state: &RecoveryState,
    row: &[u32],
) -> Result<u64, DynamicsError> {
    let n = scenario.network.node_count();
    if row.len() != n {
        return Err(DynamicsError::RowLength { got: row.len(), want: n });
    }
    if state.is_done() {
        return Err(DynamicsError::AlreadyDone(state.step));
    }
    let step = state.step + 1;
    let budget = scenario
        .resources
        .budget(step)
        .ok_or(DynamicsError::NoBudget { step })? as u64;
    let total: u64 = row.iter().map(|&x| x as u64).sum();
    if total > budget {
        return Err(DynamicsError::OverBudget { step, got: total, budget });
    }
    for (i, &give) in row.iter().enumerate() {
        if give > 0 && state.remaining[i] == 0 {
            return Err(DynamicsError::ZeroRemainingTarget { step, node: NodeId(i) });
        }
    }
    Ok(total)
}

/// Applies one allocation row: decrements remaining demand, recomputes the
/// saturated and functional sets, and returns the end-of-step reward.
pub fn apply_allocation(
    scenario: &FailureScenario,
    state: &RecoveryState,
    row: &[u32],
) -> Result<StepOutcome, DynamicsError> {
    check_row(scenario, state, row)?;
    let net = &scenario.network;
    let mut next = state.clone();
    for (i, &give) in row.iter().enumerate() {
        next.remaining[i] = next.remaining[i].saturating_sub(give);
        if next.remaining[i] == 0 {
            next.saturated[i] = true;
        }
    }
    next.functional = compute_functional(net, &next.saturated);
    next.step += 1;
    let reward = state_utility(net, &next.functional);
    let done = next.is_done();
    Ok(StepOutcome { next_state: next, reward, done })
}

/// Allocation table with one row per time step (row 0 is the failure
/// instant and stays empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryPlan {
    pub alloc: Vec<Vec<u32>>,
}

impl RecoveryPlan {
    pub fn zeros(horizon: usize, nodes: usize) -> Self {
        Self {
            alloc: vec![vec![0; nodes]; horizon + 1],
        }
    }

    pub fn steps(&self) -> usize {
        self.alloc.len().saturating_sub(1)
    }

    /// CSV with header `step,node,alloc`, nonzero entries only, sorted.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,node,alloc\n");
        for (step, row) in self.alloc.iter().enumerate() {
            for (node, &amount) in row.iter().enumerate() {
                if amount > 0 {
                    out.push_str(&format!("{step},{node},{amount}\n"));
                }
            }
        }
        out
    }

    /// Parses the `step,node,alloc` CSV back into a table of the given shape.
    pub fn from_csv(text: &str, horizon: usize, nodes: usize) -> Result<Self, String> {
        let mut plan = Self::zeros(horizon, nodes);
        let mut lines = text.lines();
        match lines.next() {
            Some("step,node,alloc") => {}
            other => return Err(format!("bad header: {other:?}")),
        }
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(format!("row {}: expected 3 fields", i + 2));
            }
            let step: usize = fields[0].parse().map_err(|_| format!("row {}: bad step", i + 2))?;
            let node: usize = fields[1].parse().map_err(|_| format!("row {}: bad node", i + 2))?;
            let amount: u32 = fields[2].parse().map_err(|_| format!("row {}: bad alloc", i + 2))?;
            if step > horizon || node >= nodes {
                return Err(format!("row {}: index out of range", i + 2));
            }
            plan.alloc[step][node] += amount;
        }
        Ok(plan)
    }
}

/// Per-step rewards of a plan replay; index 0 holds the t0 term.
pub fn replay_rewards(
    scenario: &FailureScenario,
    plan: &RecoveryPlan,
) -> Result<Vec<u64>, DynamicsError> {
    let mut state = initial_state(scenario)?;
    let want = state.horizon() + 1;
    if plan.alloc.len() != want {
        return Err(DynamicsError::PlanLength { got: plan.alloc.len(), want });
    }
    if plan.alloc[0].iter().any(|&x| x > 0) {
        return Err(DynamicsError::NonzeroInitialRow);
    }
    let net = &scenario.network;
    let mut rewards = vec![state_utility(net, state.functional())];
    for (step, row) in plan.alloc.iter().enumerate().skip(1) {
        let budget = scenario
            .resources
            .budget(step)
            .ok_or(DynamicsError::NoBudget { step })? as u64;
        let expected = budget.min(state.total_remaining());
        let got: u64 = row.iter().map(|&x| x as u64).sum();
        if got != expected {
            return Err(DynamicsError::MalformedPlanRow { step, got, expected });
        }
        let outcome = apply_allocation(scenario, &state, row)?;
        rewards.push(outcome.reward);
        state = outcome.next_state;
    }
    debug_assert!(state.is_done());
    Ok(rewards)
}

/// Total utility of the plan: the sum over the whole window, including the
/// t0 term, of the utilities of functional nodes.
pub fn evaluate_plan(scenario: &FailureScenario, plan: &RecoveryPlan) -> Result<u64, DynamicsError> {
    Ok(replay_rewards(scenario, plan)?.iter().sum())
}

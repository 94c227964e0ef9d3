//! DeepPR: a DQN planner over the recovery environment.
//!
//! States are remaining-demand vectors, actions are ordered node pairs
//! (the first node gets as much of the step budget as it can absorb, the
//! second gets the leftover), rewards are the end-of-step functional
//! utility. Exploration mixes the RATIO heuristic and uniform legal actions
//! under a decaying epsilon; exploitation follows the legality-masked
//! argmax of the evaluation network.

use crate::dynamics::{apply_allocation, initial_state, state_utility, DynamicsError, RecoveryState};
use crate::netmodel::{FailureScenario, NodeId};
use crate::neural::{
    adam_update, sync_target, td_loss, AdamState, Checkpoint, NeuralError, QNetParams,
    TdTransition,
};
use crate::solvers::{demand_condition_violation, ratio_candidates, SolverError};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AgentError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("illegal action ({0}, {1}): first node has no remaining demand")]
    IllegalAction(NodeId, NodeId),
    #[error("action nodes must differ")]
    DegenerateAction,
    #[error("no legal action in the current state")]
    NoLegalAction,
    #[error("config: {0}")]
    Config(String),
    #[error("failed pair ({0}, {1}) violates the one-recovery-per-step demand condition")]
    DemandCondition(NodeId, NodeId),
}

/// Ordered node pair: pour into `first`, spill into `second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Action {
    pub first: NodeId,
    pub second: NodeId,
}

/// Fixed enumeration of the n*(n-1) ordered pairs: first-major,
/// second-minor, skipping the diagonal.
pub fn action_index(action: Action, nodes: usize) -> usize {
    let f = action.first.0;
    let s = action.second.0;
    debug_assert!(f != s && f < nodes && s < nodes);
    f * (nodes - 1) + if s < f { s } else { s - 1 }
}

pub fn action_from_index(index: usize, nodes: usize) -> Action {
    let f = index / (nodes - 1);
    let r = index % (nodes - 1);
    let s = if r < f { r } else { r + 1 };
    Action {
        first: NodeId(f),
        second: NodeId(s),
    }
}

pub fn action_count(nodes: usize) -> usize {
    nodes * (nodes - 1)
}

/// State vector: the remaining demand of each node in id order.
pub fn encode_state(state: &RecoveryState) -> Vec<f64> {
    state.remaining().iter().map(|&r| r as f64).collect()
}

/// An action is legal iff its first node still has remaining demand. The
/// mask is all false exactly when the episode is done.
pub fn legal_mask(state: &RecoveryState) -> Vec<bool> {
    let n = state.remaining().len();
    let mut mask = vec![false; action_count(n)];
    for f in 0..n {
        if state.remaining()[f] > 0 {
            for s in 0..n {
                if s != f {
                    mask[action_index(Action { first: NodeId(f), second: NodeId(s) }, n)] = true;
                }
            }
        }
    }
    mask
}

/// Allocation row for one action: the first node receives
/// min(budget, remaining), the second the leftover capped at its own
/// remaining demand. Leftover beyond both is discarded.
pub fn action_to_allocation(
    scenario: &FailureScenario,
    state: &RecoveryState,
    action: Action,
) -> Result<Vec<u32>, AgentError> {
    if action.first == action.second {
        return Err(AgentError::DegenerateAction);
    }
    if state.remaining_of(action.first) == 0 {
        return Err(AgentError::IllegalAction(action.first, action.second));
    }
    let step = state.step() + 1;
    let budget = scenario
        .resources
        .budget(step)
        .ok_or(DynamicsError::NoBudget { step })?;
    let mut row = vec![0u32; scenario.network.node_count()];
    let first_amount = budget.min(state.remaining_of(action.first));
    row[action.first.0] = first_amount;
    let leftover = budget - first_amount;
    row[action.second.0] = leftover.min(state.remaining_of(action.second));
    Ok(row)
}

/// Epsilon decay plus the heuristic share of exploration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplorationSchedule {
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Subtracted from epsilon after every episode until the floor.
    pub epsilon_decrement: f64,
    /// Probability that an exploratory action follows RATIO.
    pub omega_ratio: f64,
}

impl Default for ExplorationSchedule {
    fn default() -> Self {
        Self {
            epsilon_start: 1.0,
            epsilon_end: 0.1,
            epsilon_decrement: 1e-4,
            omega_ratio: 0.5,
        }
    }
}

impl ExplorationSchedule {
    /// Closed form: eps(k) = max(end, start - k * decrement).
    pub fn epsilon(&self, episode: usize) -> f64 {
        (self.epsilon_start - episode as f64 * self.epsilon_decrement).max(self.epsilon_end)
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let ok = (0.0..=1.0).contains(&self.epsilon_end)
            && self.epsilon_end <= self.epsilon_start
            && self.epsilon_start <= 1.0
            && self.epsilon_decrement >= 0.0
            && (0.0..=1.0).contains(&self.omega_ratio);
        if ok {
            Ok(())
        } else {
            Err(AgentError::Config("exploration schedule out of range".into()))
        }
    }
}

/// How an action was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    Exploit,
    ExploreRatio,
    ExploreUniform,
}

fn lowest_unsaturated(state: &RecoveryState) -> Option<NodeId> {
    state
        .remaining()
        .iter()
        .position(|&r| r > 0)
        .map(NodeId)
}

/// The action RATIO would take: its head candidate first, its spill
/// candidate second (or the lowest-id other node when the frontier has a
/// single member).
pub fn ratio_action(
    scenario: &FailureScenario,
    state: &RecoveryState,
) -> Result<Action, AgentError> {
    let candidates = ratio_candidates(scenario, state);
    let first = candidates
        .first()
        .copied()
        .or_else(|| lowest_unsaturated(state))
        .ok_or(AgentError::NoLegalAction)?;
    let second = candidates
        .get(1)
        .copied()
        .or_else(|| {
            (0..scenario.network.node_count())
                .map(NodeId)
                .find(|&v| v != first)
        })
        .ok_or(AgentError::NoLegalAction)?;
    Ok(Action { first, second })
}

/// Legality-masked argmax of the evaluation network; ties go to the lowest
/// action index.
pub fn greedy_action(
    params: &QNetParams,
    state: &RecoveryState,
) -> Result<Action, AgentError> {
    let n = state.remaining().len();
    let mask = legal_mask(state);
    let values = params.forward(&encode_state(state))?;
    let mut best: Option<(usize, f64)> = None;
    for (idx, (&legal, &q)) in mask.iter().zip(&values).enumerate() {
        if legal && best.map_or(true, |(_, b)| q > b) {
            best = Some((idx, q));
        }
    }
    let (idx, _) = best.ok_or(AgentError::NoLegalAction)?;
    Ok(action_from_index(idx, n))
}

/// Epsilon-greedy selection with the integrated exploration: with
/// probability 1-eps the greedy action, otherwise RATIO's action with
/// probability omega_ratio and a uniform legal action with the rest.
pub fn select_action(
    scenario: &FailureScenario,
    state: &RecoveryState,
    params: &QNetParams,
    schedule: &ExplorationSchedule,
    episode: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Action, SelectionMode), AgentError> {
    let epsilon = schedule.epsilon(episode);
    if rng.gen::<f64>() < epsilon {
        if rng.gen::<f64>() < schedule.omega_ratio {
            Ok((ratio_action(scenario, state)?, SelectionMode::ExploreRatio))
        } else {
            let mask = legal_mask(state);
            let legal: Vec<usize> = mask
                .iter()
                .enumerate()
                .filter_map(|(i, &ok)| ok.then_some(i))
                .collect();
            if legal.is_empty() {
                return Err(AgentError::NoLegalAction);
            }
            let idx = legal[rng.gen_range(0..legal.len())];
            Ok((
                action_from_index(idx, state.remaining().len()),
                SelectionMode::ExploreUniform,
            ))
        }
    } else {
        Ok((greedy_action(params, state)?, SelectionMode::Exploit))
    }
}

/// One replayed transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// FIFO ring buffer with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    items: VecDeque<Experience>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            items: VecDeque::with_capacity(capacity.min(1 << 20)),
            capacity,
        }
    }

    pub fn push(&mut self, exp: Experience) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(exp);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, idx: usize) -> &Experience {
        &self.items[idx]
    }

    /// Uniform indices with replacement.
    pub fn sample_indices(&self, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        (0..count).map(|_| rng.gen_range(0..self.items.len())).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.items.iter()
    }
}

/// Training configuration. Unstated knobs default to common DQN practice;
/// the schedule defaults follow the published setup.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub episodes: usize,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Target refresh period in gradient steps.
    pub sync_period: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub hidden_dim: usize,
    pub schedule: ExplorationSchedule,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            episodes: 3000,
            replay_capacity: 20_000,
            batch_size: 32,
            sync_period: 200,
            gamma: 0.6,
            learning_rate: 1e-3,
            hidden_dim: 200,
            schedule: ExplorationSchedule::default(),
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        if self.batch_size == 0 {
            return Err(AgentError::Config("batch size must be positive".into()));
        }
        if self.replay_capacity < self.batch_size {
            return Err(AgentError::Config(
                "replay capacity smaller than batch size".into(),
            ));
        }
        if self.sync_period == 0 {
            return Err(AgentError::Config("sync period must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(AgentError::Config("gamma outside [0, 1]".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(AgentError::Config("learning rate must be positive".into()));
        }
        if self.hidden_dim == 0 {
            return Err(AgentError::Config("hidden layer must be nonempty".into()));
        }
        self.schedule.validate()
    }
}

/// One learning-curve row.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub episode: usize,
    /// Undiscounted episode return, equal to the plan's total utility.
    pub ret: u64,
    pub epsilon: f64,
    /// Mean TD loss over the episode's gradient steps (0 before the buffer
    /// holds a batch).
    pub loss_mean: f64,
}

/// Training output: final parameter snapshot plus the learning curve.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub checkpoint: Checkpoint,
    pub curve: Vec<CurvePoint>,
}

/// Runs the episode loop: roll the environment with the integrated
/// exploration, buffer experiences, and take one gradient step per
/// environment step once the buffer holds a batch.
pub fn train(scenario: &FailureScenario, config: &AgentConfig) -> Result<TrainOutput, AgentError> {
    config.validate()?;
    if let Some(budget) = scenario.constant_budget() {
        if let Some((a, b)) = demand_condition_violation(scenario, budget) {
            return Err(AgentError::DemandCondition(a, b));
        }
    }
    let n = scenario.network.node_count();
    let actions = action_count(n);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut eval = QNetParams::new(n, config.hidden_dim, actions, &mut rng);
    let mut target = sync_target(&eval);
    let mut adam = AdamState::new(&eval, config.learning_rate);
    let mut buffer = ReplayBuffer::new(config.replay_capacity);
    let mut curve = Vec::with_capacity(config.episodes);
    let mut gradient_steps = 0usize;

    for episode in 0..config.episodes {
        let mut state = initial_state(scenario)?;
        let mut ret = state_utility(&scenario.network, state.functional());
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        while !state.is_done() {
            let (action, _) =
                select_action(scenario, &state, &eval, &config.schedule, episode, &mut rng)?;
            let row = action_to_allocation(scenario, &state, action)?;
            let outcome = apply_allocation(scenario, &state, &row)?;
            buffer.push(Experience {
                state: encode_state(&state),
                action: action_index(action, n),
                reward: outcome.reward as f64,
                next_state: encode_state(&outcome.next_state),
                terminal: outcome.done,
            });
            ret += outcome.reward;
            state = outcome.next_state;

            if buffer.len() >= config.batch_size {
                let indices = buffer.sample_indices(config.batch_size, &mut rng);
                let masks: Vec<Vec<bool>> = indices
                    .iter()
                    .map(|&i| next_mask(buffer.get(i), n))
                    .collect();
                let batch: Vec<TdTransition> = indices
                    .iter()
                    .zip(&masks)
                    .map(|(&i, mask)| {
                        let e = buffer.get(i);
                        TdTransition {
                            state: &e.state,
                            action: e.action,
                            reward: e.reward,
                            next_state: &e.next_state,
                            next_legal: mask,
                            terminal: e.terminal,
                        }
                    })
                    .collect();
                let (loss, grad) = td_loss(&eval, &target, &batch, config.gamma)?;
                adam_update(&mut eval, &mut adam, &grad)?;
                loss_sum += loss;
                loss_count += 1;
                gradient_steps += 1;
                if gradient_steps % config.sync_period == 0 {
                    target = sync_target(&eval);
                }
            }
        }
        curve.push(CurvePoint {
            episode,
            ret,
            epsilon: config.schedule.epsilon(episode),
            loss_mean: if loss_count > 0 {
                loss_sum / loss_count as f64
            } else {
                0.0
            },
        });
    }
    Ok(TrainOutput {
        checkpoint: Checkpoint {
            eval,
            target,
            adam,
        },
        curve,
    })
}

/// Legality mask of a stored next-state vector.
fn next_mask(exp: &Experience, nodes: usize) -> Vec<bool> {
    let mut mask = vec![false; action_count(nodes)];
    for f in 0..nodes {
        if exp.next_state[f] > 0.0 {
            for s in 0..nodes {
                if s != f {
                    mask[f * (nodes - 1) + if s < f { s } else { s - 1 }] = true;
                }
            }
        }
    }
    mask
}

/// Deterministic greedy rollout policy for [`crate::solvers::run_planner`].
pub fn greedy_policy(
    params: &QNetParams,
) -> impl FnMut(&FailureScenario, &RecoveryState) -> Result<Vec<u32>, SolverError> + '_ {
    move |scenario, state| {
        let action =
            greedy_action(params, state).map_err(|e| SolverError::Policy(e.to_string()))?;
        action_to_allocation(scenario, state, action)
            .map_err(|e| SolverError::Policy(e.to_string()))
    }
}

/// Learning-curve CSV with header `episode,return,epsilon,loss_mean`.
pub fn curve_to_csv(curve: &[CurvePoint]) -> String {
    let mut out = String::from("episode,return,epsilon,loss_mean\n");
    for p in curve {
        out.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            p.episode, p.ret, p.epsilon, p.loss_mean
        ));
    }
    out
}

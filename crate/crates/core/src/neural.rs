//! Minimal dense value network: one rectified hidden layer, squared
//! temporal-difference loss with a frozen target copy, hand-rolled
//! backpropagation, and Adam updates. Everything is 64-bit and
//! deterministic given the seed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NeuralError {
    #[error("input has {got} entries, network expects {want}")]
    InputShape { got: usize, want: usize },
    #[error("mask has {got} entries, network outputs {want}")]
    MaskShape { got: usize, want: usize },
    #[error("gradient and parameters have different shapes")]
    GradShape,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("empty training batch")]
    EmptyBatch,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Weights of the value approximator. Matrices are row-major over the
/// destination dimension: `w1` is hidden x input, `w2` is output x hidden.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetParams {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl QNetParams {
    /// Uniform init in +-sqrt(6 / (fan_in + fan_out)) per layer.
    pub fn new(input_dim: usize, hidden_dim: usize, output_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut init = |rows: usize, cols: usize| {
            let bound = (6.0 / (rows + cols) as f64).sqrt();
            (0..rows * cols)
                .map(|_| rng.gen_range(-bound..bound))
                .collect::<Vec<f64>>()
        };
        Self {
            input_dim,
            hidden_dim,
            output_dim,
            w1: init(hidden_dim, input_dim),
            b1: vec![0.0; hidden_dim],
            w2: init(output_dim, hidden_dim),
            b2: vec![0.0; output_dim],
        }
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            output_dim,
            w1: vec![0.0; hidden_dim * input_dim],
            b1: vec![0.0; hidden_dim],
            w2: vec![0.0; output_dim * hidden_dim],
            b2: vec![0.0; output_dim],
        }
    }

    fn same_shape(&self, other: &Gradients) -> bool {
        self.w1.len() == other.w1.len()
            && self.b1.len() == other.b1.len()
            && self.w2.len() == other.w2.len()
            && self.b2.len() == other.b2.len()
    }

    fn hidden(&self, state: &[f64]) -> Vec<f64> {
        let mut h = self.b1.clone();
        for (j, hj) in h.iter_mut().enumerate() {
            let row = &self.w1[j * self.input_dim..(j + 1) * self.input_dim];
            let mut acc = 0.0;
            for (w, s) in row.iter().zip(state) {
                acc += w * s;
            }
            *hj = (*hj + acc).max(0.0);
        }
        h
    }

    /// Action values for one state vector.
    pub fn forward(&self, state: &[f64]) -> Result<Vec<f64>, NeuralError> {
        if state.len() != self.input_dim {
            return Err(NeuralError::InputShape {
                got: state.len(),
                want: self.input_dim,
            });
        }
        let h = self.hidden(state);
        let mut out = self.b2.clone();
        for (a, oa) in out.iter_mut().enumerate() {
            let row = &self.w2[a * self.hidden_dim..(a + 1) * self.hidden_dim];
            let mut acc = 0.0;
            for (w, hj) in row.iter().zip(&h) {
                acc += w * hj;
            }
            *oa += acc;
        }
        Ok(out)
    }
}

/// Gradient (or moment) container matching [`QNetParams`] layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(params: &QNetParams) -> Self {
        Self {
            w1: vec![0.0; params.w1.len()],
            b1: vec![0.0; params.b1.len()],
            w2: vec![0.0; params.w2.len()],
            b2: vec![0.0; params.b2.len()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w1.iter().all(|x| x.is_finite())
            && self.b1.iter().all(|x| x.is_finite())
            && self.w2.iter().all(|x| x.is_finite())
            && self.b2.iter().all(|x| x.is_finite())
    }
}

/// One replayed transition prepared for the loss. `next_legal` masks the
/// bootstrap maximum to actions that are legal in the next state; terminal
/// transitions (or empty masks) drop the bootstrap term.
#[derive(Debug, Clone)]
pub struct TdTransition<'a> {
    pub state: &'a [f64],
    pub action: usize,
    pub reward: f64,
    pub next_state: &'a [f64],
    pub next_legal: &'a [bool],
    pub terminal: bool,
}

/// Mean squared temporal-difference error over the batch and its gradient
/// with respect to the evaluation parameters. Targets come from the frozen
/// target copy and are not differentiated through.
pub fn td_loss(
    eval: &QNetParams,
    target: &QNetParams,
    batch: &[TdTransition<'_>],
    gamma: f64,
) -> Result<(f64, Gradients), NeuralError> {
    if batch.is_empty() {
        return Err(NeuralError::EmptyBatch);
    }
    let mut grad = Gradients::zeros_like(eval);
    let mut loss = 0.0;
    let scale = 1.0 / batch.len() as f64;
    for sample in batch {
        if sample.next_legal.len() != target.output_dim {
            return Err(NeuralError::MaskShape {
                got: sample.next_legal.len(),
                want: target.output_dim,
            });
        }
        let bootstrap = if sample.terminal {
            0.0
        } else {
            let next_q = target.forward(sample.next_state)?;
            next_q
                .iter()
                .zip(sample.next_legal)
                .filter(|(_, &legal)| legal)
                .map(|(&q, _)| q)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let y = if bootstrap.is_finite() {
            sample.reward + gamma * bootstrap
        } else {
            sample.reward // no legal next action
        };

        // Forward pass with cached hidden activations.
        if sample.state.len() != eval.input_dim {
            return Err(NeuralError::InputShape {
                got: sample.state.len(),
                want: eval.input_dim,
            });
        }
        let h = eval.hidden(sample.state);
        let a = sample.action;
        let row2 = &eval.w2[a * eval.hidden_dim..(a + 1) * eval.hidden_dim];
        let q: f64 = eval.b2[a] + row2.iter().zip(&h).map(|(w, hj)| w * hj).sum::<f64>();
        let err = q - y;
        loss += scale * err * err;

        // Backward: only the taken action's output row carries gradient.
        let g_out = 2.0 * scale * err;
        grad.b2[a] += g_out;
        for (j, &hj) in h.iter().enumerate() {
            grad.w2[a * eval.hidden_dim + j] += g_out * hj;
            if hj > 0.0 {
                let g_hidden = g_out * row2[j];
                grad.b1[j] += g_hidden;
                for (i, &si) in sample.state.iter().enumerate() {
                    grad.w1[j * eval.input_dim + i] += g_hidden * si;
                }
            }
        }
    }
    Ok((loss, grad))
}

/// Adam accumulator state plus hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
    pub step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &QNetParams, learning_rate: f64) -> Self {
        Self {
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One bias-corrected Adam step in place.
pub fn adam_update(
    params: &mut QNetParams,
    state: &mut AdamState,
    grad: &Gradients,
) -> Result<(), NeuralError> {
    if !params.same_shape(grad) || !params.same_shape(&state.m) {
        return Err(NeuralError::GradShape);
    }
    if !grad.is_finite() {
        return Err(NeuralError::NonFinite("gradient"));
    }
    state.step += 1;
    let t = state.step as i32;
    let correction1 = 1.0 - state.beta1.powi(t);
    let correction2 = 1.0 - state.beta2.powi(t);
    let update = |theta: &mut [f64], m: &mut [f64], v: &mut [f64], g: &[f64]| {
        for i in 0..theta.len() {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            let m_hat = m[i] / correction1;
            let v_hat = v[i] / correction2;
            theta[i] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    };
    update(&mut params.w1, &mut state.m.w1, &mut state.v.w1, &grad.w1);
    update(&mut params.b1, &mut state.m.b1, &mut state.v.b1, &grad.b1);
    update(&mut params.w2, &mut state.m.w2, &mut state.v.w2, &grad.w2);
    update(&mut params.b2, &mut state.m.b2, &mut state.v.b2, &grad.b2);
    Ok(())
}

/// Deep copy for the periodic target refresh.
pub fn sync_target(eval: &QNetParams) -> QNetParams {
    eval.clone()
}

const CHECKPOINT_MAGIC: &[u8; 4] = b"QNCK";
const CHECKPOINT_VERSION: u32 = 1;

/// Training snapshot: evaluation and target parameters plus optimizer state.
/// The binary encoding round-trips bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub eval: QNetParams,
    pub target: QNetParams,
    pub adam: AdamState,
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, vs: &[f64]) {
    put_u64(out, vs.len() as u64);
    for v in vs {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NeuralError> {
        let end = self.pos + n;
        if end > self.data.len() {
            return Err(NeuralError::Checkpoint("truncated data".into()));
        }
        let slice = &self.data[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u64(&mut self) -> Result<u64, NeuralError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self) -> Result<Vec<f64>, NeuralError> {
        let len = self.u64()? as usize;
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(f64::from_le_bytes(self.take(8)?.try_into().unwrap()));
        }
        Ok(out)
    }
}

fn put_params(out: &mut Vec<u8>, p: &QNetParams) {
    put_u64(out, p.input_dim as u64);
    put_u64(out, p.hidden_dim as u64);
    put_u64(out, p.output_dim as u64);
    put_f64s(out, &p.w1);
    put_f64s(out, &p.b1);
    put_f64s(out, &p.w2);
    put_f64s(out, &p.b2);
}

fn read_params(cur: &mut Cursor<'_>) -> Result<QNetParams, NeuralError> {
    let input_dim = cur.u64()? as usize;
    let hidden_dim = cur.u64()? as usize;
    let output_dim = cur.u64()? as usize;
    let p = QNetParams {
        input_dim,
        hidden_dim,
        output_dim,
        w1: cur.f64s()?,
        b1: cur.f64s()?,
        w2: cur.f64s()?,
        b2: cur.f64s()?,
    };
    if p.w1.len() != hidden_dim * input_dim
        || p.b1.len() != hidden_dim
        || p.w2.len() != output_dim * hidden_dim
        || p.b2.len() != output_dim
    {
        return Err(NeuralError::Checkpoint("shape mismatch".into()));
    }
    Ok(p)
}

fn put_grads(out: &mut Vec<u8>, g: &Gradients) {
    put_f64s(out, &g.w1);
    put_f64s(out, &g.b1);
    put_f64s(out, &g.w2);
    put_f64s(out, &g.b2);
}

fn read_grads(cur: &mut Cursor<'_>) -> Result<Gradients, NeuralError> {
    Ok(Gradients {
        w1: cur.f64s()?,
        b1: cur.f64s()?,
        w2: cur.f64s()?,
        b2: cur.f64s()?,
    })
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        put_params(&mut out, &self.eval);
        put_params(&mut out, &self.target);
        put_grads(&mut out, &self.adam.m);
        put_grads(&mut out, &self.adam.v);
        put_u64(&mut out, self.adam.step);
        for h in [
            self.adam.learning_rate,
            self.adam.beta1,
            self.adam.beta2,
            self.adam.epsilon,
        ] {
            out.extend_from_slice(&h.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, NeuralError> {
        let mut cur = Cursor { data, pos: 0 };
        if cur.take(4)? != CHECKPOINT_MAGIC {
            return Err(NeuralError::Checkpoint("bad magic".into()));
        }
        let version = u32::from_le_bytes(cur.take(4)?.try_into().unwrap());
        if version != CHECKPOINT_VERSION {
            return Err(NeuralError::Checkpoint(format!(
                "unsupported version {version}"
            )));
        }
        let eval = read_params(&mut cur)?;
        let target = read_params(&mut cur)?;
        let m = read_grads(&mut cur)?;
        let v = read_grads(&mut cur)?;
        let step = cur.u64()?;
        let mut hyper = [0.0f64; 4];
        for h in hyper.iter_mut() {
            *h = f64::from_le_bytes(cur.take(8)?.try_into().unwrap());
        }
        Ok(Self {
            eval,
            target,
            adam: AdamState {
                m,
                v,
                step,
                learning_rate: hyper[0],
                beta1: hyper[1],
                beta2: hyper[2],
                epsilon: hyper[3],
            },
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), NeuralError> {
        let mut file = std::fs::File::create(path)
            .map_err(|e| NeuralError::Checkpoint(format!("create {path:?}: {e}")))?;
        file.write_all(&self.to_bytes())
            .map_err(|e| NeuralError::Checkpoint(format!("write {path:?}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, NeuralError> {
        let mut data = Vec::new();
        std::fs::File::open(path)
            .map_err(|e| NeuralError::Checkpoint(format!("open {path:?}: {e}")))?
            .read_to_end(&mut data)
            .map_err(|e| NeuralError::Checkpoint(format!("read {path:?}: {e}")))?;
        Self::from_bytes(&data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn zero_parameters_give_zero_outputs() {
        let p = QNetParams::zeros(3, 4, 5);
        assert_eq!(p.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn constant_bias_survives_zero_weights() {
        let mut p = QNetParams::zeros(2, 3, 2);
        p.b2 = vec![4.5, -1.25];
        assert_eq!(p.forward(&[7.0, 9.0]).unwrap(), vec![4.5, -1.25]);
    }

    #[test]
    fn dead_hidden_layer_passes_output_bias() {
        let mut p = QNetParams::new(2, 3, 2, &mut rng(0));
        p.b1 = vec![-100.0; 3]; // all pre-activations negative
        p.b2 = vec![0.5, 0.75];
        assert_eq!(p.forward(&[1.0, 1.0]).unwrap(), vec![0.5, 0.75]);
    }

    #[test]
    fn forward_rejects_shape_mismatch() {
        let p = QNetParams::zeros(3, 2, 2);
        assert_eq!(
            p.forward(&[1.0]).unwrap_err(),
            NeuralError::InputShape { got: 1, want: 3 }
        );
    }

    #[test]
    fn loss_is_zero_when_q_matches_target() {
        // Zero weights, zero reward, terminal: target equals output.
        let eval = QNetParams::zeros(2, 2, 3);
        let target = sync_target(&eval);
        let batch = [TdTransition {
            state: &[1.0, 0.0],
            action: 1,
            reward: 0.0,
            next_state: &[0.0, 0.0],
            next_legal: &[false, false, false],
            terminal: true,
        }];
        let (loss, grad) = td_loss(&eval, &target, &batch, 0.6).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.w1.iter().all(|&g| g == 0.0));
        assert!(grad.b2.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn myopic_loss_is_squared_reward_gap() {
        let eval = QNetParams::zeros(2, 2, 2);
        let target = sync_target(&eval);
        let batch = [TdTransition {
            state: &[1.0, 1.0],
            action: 0,
            reward: 3.0,
            next_state: &[0.0, 1.0],
            next_legal: &[true, true],
            terminal: false,
        }];
        let (loss, _) = td_loss(&eval, &target, &batch, 0.0).unwrap();
        assert_eq!(loss, 9.0); // (r - Q)^2 with Q = 0
    }

    #[test]
    fn empty_batch_is_rejected() {
        let eval = QNetParams::zeros(1, 1, 1);
        let target = sync_target(&eval);
        assert_eq!(
            td_loss(&eval, &target, &[], 0.5).unwrap_err(),
            NeuralError::EmptyBatch
        );
    }

    fn relative_error(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
    }

    /// Central-difference check of the backprop gradient on a tiny network.
    fn gradcheck_once(seed: u64) -> f64 {
        let mut r = rng(seed);
        let input = 3;
        let hidden = 4;
        let output = 6;
        let eval = QNetParams::new(input, hidden, output, &mut r);
        let target = QNetParams::new(input, hidden, output, &mut r);
        let batch_len = 1 + (seed as usize % 8);
        let mut states = Vec::new();
        let mut nexts = Vec::new();
        let mut masks = Vec::new();
        for _ in 0..batch_len {
            states.push((0..input).map(|_| r.gen_range(0.0..3.0)).collect::<Vec<f64>>());
            nexts.push((0..input).map(|_| r.gen_range(0.0..3.0)).collect::<Vec<f64>>());
            masks.push((0..output).map(|_| r.gen_bool(0.7)).collect::<Vec<bool>>());
        }
        let samples: Vec<TdTransition> = (0..batch_len)
            .map(|i| TdTransition {
                state: &states[i],
                action: (seed as usize + i) % output,
                reward: ((i % 5) as f64) - 1.0,
                next_state: &nexts[i],
                next_legal: &masks[i],
                terminal: i % 4 == 0,
            })
            .collect();
        let gamma = 0.6;
        let (_, grad) = td_loss(&eval, &target, &samples, gamma).unwrap();

        let h = 1e-5;
        let mut worst = 0.0f64;
        let loss_at = |p: &QNetParams| td_loss(p, &target, &samples, gamma).unwrap().0;
        let blocks: [(fn(&QNetParams) -> &Vec<f64>, fn(&mut QNetParams) -> &mut Vec<f64>, &Vec<f64>); 4] = [
            (|p| &p.w1, |p| &mut p.w1, &grad.w1),
            (|p| &p.b1, |p| &mut p.b1, &grad.b1),
            (|p| &p.w2, |p| &mut p.w2, &grad.w2),
            (|p| &p.b2, |p| &mut p.b2, &grad.b2),
        ];
        for (_, get_mut, analytic) in blocks {
            for i in 0..analytic.len() {
                let mut plus = eval.clone();
                get_mut(&mut plus)[i] += h;
                let mut minus = eval.clone();
                get_mut(&mut minus)[i] -= h;
                let numeric = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
                worst = worst.max(relative_error(numeric, analytic[i]));
            }
        }
        worst
    }

    #[test]
    fn backprop_matches_central_differences() {
        for seed in 0..10 {
            let worst = gradcheck_once(seed);
            assert!(worst < 1e-4, "seed {seed}: relative error {worst}");
        }
    }

    #[test]
    fn adam_with_zero_gradient_only_advances_the_counter() {
        let mut p = QNetParams::new(2, 3, 2, &mut rng(4));
        let before = p.clone();
        let mut adam = AdamState::new(&p, 1e-3);
        let grad = Gradients::zeros_like(&p);
        adam_update(&mut p, &mut adam, &grad).unwrap();
        assert_eq!(p, before);
        assert_eq!(adam.step, 1);
    }

    #[test]
    fn first_adam_step_has_learning_rate_magnitude() {
        let mut p = QNetParams::zeros(1, 1, 1);
        let mut adam = AdamState::new(&p, 1e-3);
        let mut grad = Gradients::zeros_like(&p);
        grad.b2[0] = 7.0;
        grad.w1[0] = -0.3;
        adam_update(&mut p, &mut adam, &grad).unwrap();
        // Bias correction makes the first step lr * g/|g| up to epsilon.
        assert!((p.b2[0] + 1e-3).abs() < 1e-9);
        assert!((p.w1[0] - 1e-3).abs() < 1e-8);
    }

    #[test]
    fn adam_converges_on_scalar_quadratic() {
        // Minimize (theta - 3)^2 over the single output bias.
        let mut p = QNetParams::zeros(1, 1, 1);
        let mut adam = AdamState::new(&p, 0.1);
        for _ in 0..200 {
            let mut grad = Gradients::zeros_like(&p);
            grad.b2[0] = 2.0 * (p.b2[0] - 3.0);
            adam_update(&mut p, &mut adam, &grad).unwrap();
        }
        assert!((p.b2[0] - 3.0).abs() < 0.1, "theta = {}", p.b2[0]);
    }

    #[test]
    fn adam_rejects_non_finite_gradient() {
        let mut p = QNetParams::zeros(1, 1, 1);
        let mut adam = AdamState::new(&p, 1e-3);
        let mut grad = Gradients::zeros_like(&p);
        grad.b1[0] = f64::NAN;
        assert_eq!(
            adam_update(&mut p, &mut adam, &grad).unwrap_err(),
            NeuralError::NonFinite("gradient")
        );
    }

    #[test]
    fn target_sync_decouples_future_updates() {
        let mut eval = QNetParams::new(3, 4, 5, &mut rng(8));
        let target = sync_target(&eval);
        let probes: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..3).map(|j| (i * 3 + j) as f64 * 0.25).collect())
            .collect();
        for s in &probes {
            assert_eq!(eval.forward(s).unwrap(), target.forward(s).unwrap());
        }
        // Idempotent.
        assert_eq!(sync_target(&eval), target);
        // One eval update later the two diverge on some probe.
        let mut adam = AdamState::new(&eval, 0.05);
        let mut grad = Gradients::zeros_like(&eval);
        grad.b2[0] = 1.0;
        adam_update(&mut eval, &mut adam, &grad).unwrap();
        assert!(probes
            .iter()
            .any(|s| eval.forward(s).unwrap() != target.forward(s).unwrap()));
    }

    #[test]
    fn identical_seeds_give_bit_identical_trajectories() {
        let run = || {
            let mut r = rng(99);
            let mut p = QNetParams::new(3, 5, 4, &mut r);
            let target = sync_target(&p);
            let mut adam = AdamState::new(&p, 1e-3);
            let state: Vec<f64> = (0..3).map(|_| r.gen_range(0.0..2.0)).collect();
            let next: Vec<f64> = (0..3).map(|_| r.gen_range(0.0..2.0)).collect();
            let mask = vec![true; 4];
            for step in 0..50 {
                let batch = [TdTransition {
                    state: &state,
                    action: step % 4,
                    reward: 1.0,
                    next_state: &next,
                    next_legal: &mask,
                    terminal: false,
                }];
                let (_, grad) = td_loss(&p, &target, &batch, 0.6).unwrap();
                adam_update(&mut p, &mut adam, &grad).unwrap();
            }
            p
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let mut r = rng(31);
        let eval = QNetParams::new(4, 6, 12, &mut r);
        let mut target = sync_target(&eval);
        target.b2[3] = 0.125;
        let mut adam = AdamState::new(&eval, 2e-3);
        adam.step = 17;
        adam.m.w1[0] = -0.001953125;
        let ck = Checkpoint { eval, target, adam };
        let bytes = ck.to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(ck, back);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn checkpoint_rejects_garbage() {
        assert!(Checkpoint::from_bytes(b"nope").is_err());
        let mut bytes = Checkpoint {
            eval: QNetParams::zeros(1, 1, 1),
            target: QNetParams::zeros(1, 1, 1),
            adam: AdamState::new(&QNetParams::zeros(1, 1, 1), 1e-3),
        }
        .to_bytes();
        bytes.truncate(bytes.len() - 3);
        assert!(Checkpoint::from_bytes(&bytes).is_err());
    }
}

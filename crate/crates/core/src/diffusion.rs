//! DDPM sampling over per-slot latent strategies, decoding of latents into
//! feasible slot decisions, and reward-weighted denoiser training.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::wrap_phase;
use crate::error::{check_len, Error, Result};
use crate::game::{Action, SlotDecision};
use crate::nn::{Activation, Adam, Mlp, MlpSpec};
use crate::scenario::Task;

/// β_t, α_t, ᾱ_t and β̃_t tables for t = 1..=T.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    pub steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    betas: Vec<f64>,
    /// ᾱ_0 = 1 at index 0.
    alpha_bars: Vec<f64>,
    posterior_vars: Vec<f64>,
}

impl NoiseSchedule {
    /// β_t = 1 − exp(−β_min/T − (2t−1)/(2T²)·(β_max − β_min)).
    pub fn new(steps: usize, beta_min: f64, beta_max: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Config {
                field: "diffusion_steps",
                reason: "must be at least 1",
            });
        }
        if !(beta_min > 0.0 && beta_min <= beta_max && beta_max.is_finite()) {
            return Err(Error::Config {
                field: "beta_min",
                reason: "need 0 < beta_min <= beta_max",
            });
        }
        let tf = steps as f64;
        let betas: Vec<f64> = (1..=steps)
            .map(|t| {
                let e = beta_min / tf + (2.0 * t as f64 - 1.0) / (2.0 * tf * tf) * (beta_max - beta_min);
                -(-e).exp_m1()
            })
            .collect();
        if betas.iter().any(|b| !(*b > 0.0 && *b < 1.0)) {
            return Err(Error::Config {
                field: "beta_max",
                reason: "schedule leaves (0, 1)",
            });
        }
        let mut alpha_bars = Vec::with_capacity(steps + 1);
        alpha_bars.push(1.0);
        for b in &betas {
            let prev = alpha_bars[alpha_bars.len() - 1];
            alpha_bars.push(prev * (1.0 - b));
        }
        let posterior_vars = (1..=steps)
            .map(|t| (1.0 - alpha_bars[t - 1]) / (1.0 - alpha_bars[t]) * betas[t - 1])
            .collect();
        Ok(Self {
            steps,
            beta_min,
            beta_max,
            betas,
            alpha_bars,
            posterior_vars,
        })
    }

    pub fn beta(&self, t: usize) -> f64 {
        self.betas[t - 1]
    }

    pub fn alpha(&self, t: usize) -> f64 {
        1.0 - self.betas[t - 1]
    }

    /// ᾱ_t, with ᾱ_0 = 1.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bars[t]
    }

    /// β̃_t = (1−ᾱ_{t−1})/(1−ᾱ_t)·β_t.
    pub fn posterior_variance(&self, t: usize) -> f64 {
        self.posterior_vars[t - 1]
    }

    fn check_step(&self, t: usize) -> Result<()> {
        if (1..=self.steps).contains(&t) {
            Ok(())
        } else {
            Err(Error::Domain("diffusion step outside [1, T]"))
        }
    }
}

/// x_t = √ᾱ_t·x0 + √(1−ᾱ_t)·ε.
pub fn forward_sample(x0: &[f64], t: usize, eps: &[f64], schedule: &NoiseSchedule) -> Result<Vec<f64>> {
    schedule.check_step(t)?;
    check_len("noise", x0.len(), eps.len())?;
    let ab = schedule.alpha_bar(t);
    let (a, b) = (ab.sqrt(), (1.0 - ab).sqrt());
    Ok(x0.iter().zip(eps).map(|(x, e)| a * x + b * e).collect())
}

/// x0 ≈ (x_t − √(1−ᾱ_t)·ε̂)/√ᾱ_t.
pub fn predict_x0(xt: &[f64], eps_pred: &[f64], t: usize, schedule: &NoiseSchedule) -> Result<Vec<f64>> {
    schedule.check_step(t)?;
    check_len("predicted noise", xt.len(), eps_pred.len())?;
    let ab = schedule.alpha_bar(t);
    let (a, b) = (ab.sqrt(), (1.0 - ab).sqrt());
    Ok(xt.iter().zip(eps_pred).map(|(x, e)| (x - b * e) / a).collect())
}

/// μ = (x_t − β_t/√(1−ᾱ_t)·ε̂)/√α_t.
pub fn posterior_mean(xt: &[f64], eps_pred: &[f64], t: usize, schedule: &NoiseSchedule) -> Result<Vec<f64>> {
    schedule.check_step(t)?;
    check_len("predicted noise", xt.len(), eps_pred.len())?;
    let coef = schedule.beta(t) / (1.0 - schedule.alpha_bar(t)).sqrt();
    let scale = 1.0 / schedule.alpha(t).sqrt();
    Ok(xt.iter().zip(eps_pred).map(|(x, e)| scale * (x - coef * e)).collect())
}

/// One reverse step x_t → x_{t−1}. No noise is added at t = 1 or when
/// `deterministic` is set.
pub fn posterior_step<R: Rng + ?Sized>(
    xt: &[f64],
    t: usize,
    eps_pred: &[f64],
    schedule: &NoiseSchedule,
    rng: &mut R,
    deterministic: bool,
) -> Result<Vec<f64>> {
    let mut x = posterior_mean(xt, eps_pred, t, schedule)?;
    if !deterministic && t > 1 {
        let sd = schedule.posterior_variance(t).sqrt();
        for v in &mut x {
            let z: f64 = StandardNormal.sample(rng);
            *v += sd * z;
        }
    }
    Ok(x)
}

/// ε_δ(x_t, t).
pub trait NoisePredictor {
    fn dim(&self) -> usize;
    fn predict(&self, x: &[f64], t: usize) -> Result<Vec<f64>>;
}

/// Predicts zero noise everywhere.
#[derive(Debug, Clone, Copy)]
pub struct ZeroPredictor(pub usize);

impl NoisePredictor for ZeroPredictor {
    fn dim(&self) -> usize {
        self.0
    }

    fn predict(&self, x: &[f64], _t: usize) -> Result<Vec<f64>> {
        Ok(vec![0.0; x.len()])
    }
}

/// Reverse chain from a given x_T down to x_0; T predictor calls.
pub fn reverse_from<P, R>(
    predictor: &P,
    schedule: &NoiseSchedule,
    x_t: Vec<f64>,
    rng: &mut R,
    deterministic: bool,
) -> Result<Vec<f64>>
where
    P: NoisePredictor + ?Sized,
    R: Rng + ?Sized,
{
    check_len("latent", predictor.dim(), x_t.len())?;
    let mut x = x_t;
    for t in (1..=schedule.steps).rev() {
        let eps = predictor.predict(&x, t)?;
        x = posterior_step(&x, t, &eps, schedule, rng, deterministic)?;
    }
    Ok(x)
}

/// Draws x_T ~ N(0, I) and runs the reverse chain.
pub fn reverse_sample<P, R>(predictor: &P, schedule: &NoiseSchedule, rng: &mut R, deterministic: bool) -> Result<Vec<f64>>
where
    P: NoisePredictor + ?Sized,
    R: Rng + ?Sized,
{
    let x_t = standard_normal_vec(predictor.dim(), rng);
    reverse_from(predictor, schedule, x_t, rng, deterministic)
}

pub fn standard_normal_vec<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// Sinusoidal embedding of step `t`: [sin(t·ω_j), cos(t·ω_j)] pairs with
/// ω_j = 10000^(−2j/dim).
pub fn time_embedding(t: usize, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    let half = dim / 2;
    for j in 0..half {
        let w = 10000f64.powf(-(2.0 * j as f64) / dim as f64);
        out[2 * j] = (t as f64 * w).sin();
        out[2 * j + 1] = (t as f64 * w).cos();
    }
    if dim % 2 == 1 {
        out[dim - 1] = t as f64 / 100.0;
    }
    out
}

/// MLP noise predictor fed with [x_t, embed(t)].
#[derive(Debug, Clone, PartialEq)]
pub struct Denoiser {
    pub net: Mlp,
    pub dim: usize,
    pub embed_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiserConfig {
    pub embed_dim: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
}

impl Default for DenoiserConfig {
    fn default() -> Self {
        Self {
            embed_dim: 16,
            hidden: vec![64, 64],
            activation: Activation::Tanh,
        }
    }
}

impl Denoiser {
    /// Glorot init with the output layer zeroed, so the untrained denoiser
    /// predicts no noise.
    pub fn new<R: Rng + ?Sized>(dim: usize, config: &DenoiserConfig, rng: &mut R) -> Result<Self> {
        let mut widths = Vec::with_capacity(config.hidden.len() + 2);
        widths.push(dim + config.embed_dim);
        widths.extend_from_slice(&config.hidden);
        widths.push(dim);
        let spec = MlpSpec::uniform(widths, config.activation)?;
        let mut net = Mlp::init(spec, rng);
        net.scale_output_layer(0.0);
        Ok(Self {
            net,
            dim,
            embed_dim: config.embed_dim,
        })
    }

    pub fn from_mlp(net: Mlp, embed_dim: usize) -> Result<Self> {
        let out = net.spec.output_dim();
        check_len("denoiser input", out + embed_dim, net.spec.input_dim())?;
        Ok(Self {
            net,
            dim: out,
            embed_dim,
        })
    }

    pub fn input(&self, x: &[f64], t: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim + self.embed_dim);
        v.extend_from_slice(x);
        v.extend(time_embedding(t, self.embed_dim));
        v
    }
}

impl NoisePredictor for Denoiser {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[f64], t: usize) -> Result<Vec<f64>> {
        check_len("latent", self.dim, x.len())?;
        self.net.forward(&self.input(x, t))
    }
}

/// Best latents found so far with their scores, kept sorted best first.
#[derive(Debug, Clone, PartialEq)]
pub struct EliteBuffer {
    pub capacity: usize,
    entries: Vec<(Vec<f64>, f64)>,
}

impl EliteBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            entries: Vec::with_capacity(capacity.max(1)),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Vec<f64>, f64)] {
        &self.entries
    }

    /// Returns whether the latent was kept.
    pub fn insert(&mut self, latent: Vec<f64>, score: f64) -> bool {
        if !score.is_finite() {
            return false;
        }
        let pos = self.entries.iter().position(|(_, s)| score > *s).unwrap_or(self.entries.len());
        if pos >= self.capacity {
            return false;
        }
        self.entries.insert(pos, (latent, score));
        self.entries.truncate(self.capacity);
        true
    }

    /// softmax(score/τ) over the buffer.
    pub fn weights(&self, temperature: f64) -> Vec<f64> {
        softmax_scaled(self.entries.iter().map(|(_, s)| *s), temperature)
    }
}

fn softmax_scaled(scores: impl Iterator<Item = f64> + Clone, temperature: f64) -> Vec<f64> {
    let max = scores.clone().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.map(|s| ((s - max) / temperature).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Temperature τ of the softmax reward weighting.
    pub temperature: f64,
    /// Draws per step, sampled from the buffer in proportion to their
    /// weights. `None` visits every entry once with its weight.
    pub batch: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            temperature: 1.0,
            batch: Some(16),
        }
    }
}

/// One optimizer step on the reward-weighted denoising loss
/// Σ_k w_k·‖ε_δ(x_t, t) − ε‖²/dim. Returns the loss before the update.
pub fn train_step<R: Rng + ?Sized>(
    denoiser: &mut Denoiser,
    optimizer: &mut Adam,
    buffer: &EliteBuffer,
    schedule: &NoiseSchedule,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<f64> {
    if buffer.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    let weights = buffer.weights(config.temperature);
    let draws: Vec<(usize, f64)> = match config.batch {
        None => weights.iter().copied().enumerate().collect(),
        Some(b) => {
            let b = b.max(1);
            (0..b).map(|_| (sample_index(&weights, rng), 1.0 / b as f64)).collect()
        }
    };
    let dim = denoiser.dim as f64;
    let mut grads = vec![0.0; denoiser.net.num_params()];
    let mut loss = 0.0;
    for (k, w) in draws {
        let x0 = &buffer.entries[k].0;
        let t = rng.random_range(1..=schedule.steps);
        let eps = standard_normal_vec(denoiser.dim, rng);
        let xt = forward_sample(x0, t, &eps, schedule)?;
        let cache = denoiser.net.forward_cached(&denoiser.input(&xt, t))?;
        let diff: Vec<f64> = cache.output().iter().zip(&eps).map(|(p, e)| p - e).collect();
        loss += w * diff.iter().map(|d| d * d).sum::<f64>() / dim;
        let upstream: Vec<f64> = diff.iter().map(|d| 2.0 * w * d / dim).collect();
        denoiser.net.backward(&cache, &upstream, &mut grads)?;
    }
    optimizer.update(&mut denoiser.net.params, &grads)?;
    Ok(loss)
}

/// Weighted denoising loss on fixed probes (entry, t, ε), for monitoring.
pub fn probe_loss(denoiser: &Denoiser, buffer: &EliteBuffer, schedule: &NoiseSchedule, temperature: f64, probes: &[(usize, usize, Vec<f64>)]) -> Result<f64> {
    let weights = buffer.weights(temperature);
    let mut loss = 0.0;
    for (k, t, eps) in probes {
        let xt = forward_sample(&buffer.entries[*k].0, *t, eps, schedule)?;
        let pred = denoiser.predict(&xt, *t)?;
        let sq: f64 = pred.iter().zip(eps).map(|(p, e)| (p - e) * (p - e)).sum();
        loss += weights[*k] * sq / denoiser.dim as f64;
    }
    Ok(loss)
}

fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Per-slot latent layout: two action logits (local, offload) per vehicle,
/// one phase per IRS element, one resource share per vehicle, and one
/// utilization coordinate scaling the BS capacity handed out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatentLayout {
    pub vehicles: usize,
    pub elements: usize,
}

impl LatentLayout {
    pub fn new(vehicles: usize, elements: usize) -> Self {
        Self { vehicles, elements }
    }

    pub fn dim(&self) -> usize {
        3 * self.vehicles + self.elements + 1
    }

    pub fn action_logits(&self, x: &[f64], i: usize) -> (f64, f64) {
        (x[2 * i], x[2 * i + 1])
    }

    pub fn phase_offset(&self) -> usize {
        2 * self.vehicles
    }

    pub fn share_offset(&self) -> usize {
        2 * self.vehicles + self.elements
    }

    pub fn utilization_index(&self) -> usize {
        3 * self.vehicles + self.elements
    }
}

/// Snaps decoded phases to {2πk/P} and BS shares to multiples of f_b^max/G.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeGrid {
    pub phase_points: usize,
    pub resource_points: usize,
}

impl DecodeGrid {
    pub fn phases(&self) -> Vec<f64> {
        (0..self.phase_points)
            .map(|k| TAU * k as f64 / self.phase_points as f64)
            .collect()
    }

    pub fn snap_phase(&self, theta: f64) -> f64 {
        let p = self.phase_points as f64;
        let k = (wrap_phase(theta) / TAU * p).round() as usize % self.phase_points;
        TAU * k as f64 / p
    }
}

fn finite_or_zero(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        0.0
    }
}

/// Latent → (O, θ, F). Vehicles without a task stay idle; phases land in
/// [0, 2π); the offloaders' shares never exceed f_b^max in total.
pub fn decode(x: &[f64], layout: &LatentLayout, tasks: &[Option<Task>], fmax: f64, grid: Option<&DecodeGrid>) -> Result<SlotDecision> {
    check_len("latent", layout.dim(), x.len())?;
    check_len("tasks", layout.vehicles, tasks.len())?;
    let x: Vec<f64> = x.iter().map(|v| finite_or_zero(*v)).collect();
    let mut actions: Vec<Action> = (0..layout.vehicles)
        .map(|i| {
            if tasks[i].is_none() {
                return Action::Idle;
            }
            let (local, offload) = layout.action_logits(&x, i);
            if offload > local {
                Action::Offload
            } else {
                Action::Local
            }
        })
        .collect();
    let phases = x[layout.phase_offset()..layout.share_offset()]
        .iter()
        .map(|&t| match grid {
            Some(g) => g.snap_phase(t),
            None => wrap_phase(t),
        })
        .collect();
    let utilization = x[layout.utilization_index()].exp().min(1.0);
    let shares = &x[layout.share_offset()..layout.utilization_index()];
    let mut offloaders: Vec<usize> = (0..layout.vehicles).filter(|&i| actions[i] == Action::Offload).collect();
    let mut freqs = vec![0.0; layout.vehicles];
    if !offloaders.is_empty() {
        match grid {
            None => {
                let w = softmax_scaled(offloaders.iter().map(|&i| shares[i]), 1.0);
                for (&i, wi) in offloaders.iter().zip(&w) {
                    freqs[i] = (fmax * utilization * wi).max(f64::MIN_POSITIVE);
                }
            }
            Some(g) => {
                let levels = g.resource_points;
                if offloaders.len() > levels {
                    offloaders.sort_by(|&a, &b| shares[b].total_cmp(&shares[a]));
                    for &i in &offloaders[levels..] {
                        actions[i] = Action::Local;
                    }
                    offloaders.truncate(levels);
                    offloaders.sort_unstable();
                }
                let w = softmax_scaled(offloaders.iter().map(|&i| shares[i]), 1.0);
                let m = offloaders.len();
                let total = ((utilization * levels as f64).round() as usize).clamp(m, levels);
                let counts = apportion(&w, total - m);
                for (&i, c) in offloaders.iter().zip(counts) {
                    freqs[i] = (c + 1) as f64 * fmax / levels as f64;
                }
            }
        }
        crate::game::fit_budget(&mut freqs, fmax);
    }
    Ok(SlotDecision { actions, phases, freqs })
}

/// Largest-remainder split of `total` units by `weights`.
fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let exact: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

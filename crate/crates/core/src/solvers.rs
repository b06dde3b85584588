//! The diffusion-driven Stackelberg search, the four benchmark policies and
//! an exhaustive oracle for tiny instances.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::diffusion::{decode, reverse_sample, train_step, DecodeGrid, Denoiser, DenoiserConfig, EliteBuffer, LatentLayout, NoiseSchedule, TrainConfig};
use crate::error::{Error, Result};
use crate::game::{self, Action, SlotDecision, SlotOutcome, SlotProblem};
use crate::model::{Instance, SlotInstance};
use crate::nn::{Activation, Adam, ForwardCache, Mlp, MlpSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct GdmConfig {
    pub steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub denoiser: DenoiserConfig,
    pub learning_rate: f64,
    pub buffer_size: usize,
    pub train: TrainConfig,
    /// Latents drawn per slot and iteration.
    pub samples_per_iter: usize,
    pub train_steps_per_iter: usize,
}

impl Default for GdmConfig {
    fn default() -> Self {
        Self {
            steps: 20,
            beta_min: 0.1,
            beta_max: 10.0,
            denoiser: DenoiserConfig::default(),
            learning_rate: 1e-3,
            buffer_size: 64,
            train: TrainConfig::default(),
            samples_per_iter: 8,
            train_steps_per_iter: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpoConfig {
    pub episodes: usize,
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub clip: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub episodes_per_update: usize,
    pub init_log_std: f64,
    pub entropy_coef: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            episodes: 200,
            hidden: vec![64, 64],
            learning_rate: 3e-4,
            clip: 0.2,
            gamma: 0.9,
            lambda: 0.95,
            epochs: 4,
            episodes_per_update: 2,
            init_log_std: 0.0,
            entropy_coef: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// J_iter.
    pub max_iters: usize,
    /// Iterations before the convergence test is first applied.
    pub min_iters: usize,
    /// ε of the stopping rule |R^j − R^{j−1}| < ε.
    pub epsilon: f64,
    pub gdm: GdmConfig,
    /// Restricts decoded phases and shares to a grid.
    pub decode_grid: Option<DecodeGrid>,
    pub oracle_grid: DecodeGrid,
    pub ppo: PpoConfig,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 300,
            min_iters: 100,
            epsilon: 1e-2,
            gdm: GdmConfig::default(),
            decode_grid: None,
            oracle_grid: DecodeGrid {
                phase_points: 8,
                resource_points: 8,
            },
            ppo: PpoConfig::default(),
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let cfg = |field, reason| Err(Error::Config { field, reason });
        if self.max_iters == 0 {
            return cfg("max_iters", "must be at least 1");
        }
        if !(self.epsilon > 0.0) {
            return cfg("epsilon", "must be positive");
        }
        if self.oracle_grid.phase_points < 2 || self.oracle_grid.resource_points < 2 {
            return cfg("oracle_grid", "grid sizes must be at least 2");
        }
        if let Some(g) = &self.decode_grid {
            if g.phase_points < 2 || g.resource_points < 2 {
                return cfg("decode_grid", "grid sizes must be at least 2");
            }
        }
        if self.gdm.samples_per_iter == 0 {
            return cfg("samples_per_iter", "must be at least 1");
        }
        if !(self.gdm.train.temperature > 0.0) {
            return cfg("temperature", "must be positive");
        }
        if !(self.gdm.learning_rate > 0.0) {
            return cfg("learning_rate", "must be positive");
        }
        if self.ppo.episodes == 0 || self.ppo.episodes_per_update == 0 {
            return cfg("ppo_episodes", "must be at least 1");
        }
        NoiseSchedule::new(self.gdm.steps, self.gdm.beta_min, self.gdm.beta_max).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveResult {
    /// Best decision found for every slot.
    pub decisions: Vec<SlotDecision>,
    /// Executed outcome of each best decision.
    pub outcomes: Vec<SlotOutcome>,
    /// U^j per iteration (per episode for the learned baseline).
    pub utility_trace: Vec<f64>,
    /// R^j per iteration.
    pub reward_trace: Vec<f64>,
    pub iterations: usize,
    /// Seconds; filled in by callers that own a clock.
    pub wall_time: f64,
}

impl SolveResult {
    pub fn utility(&self) -> f64 {
        self.outcomes.iter().map(|o| o.utility).sum()
    }

    pub fn failed(&self) -> usize {
        self.outcomes.iter().map(|o| o.failed).sum()
    }
}

/// Scores executed slots and turns utilities into rewards.
pub trait Objective {
    fn slot_score(&mut self, outcome: &SlotOutcome) -> f64 {
        outcome.utility
    }

    fn reward(&mut self, current: f64, previous: f64) -> f64 {
        game::reward(current, previous)
    }
}

/// U = w_i·U_QoE + w_b·U_Revenue with rewards on strict improvement.
#[derive(Debug, Clone, Copy, Default)]
pub struct TotalUtility;

impl Objective for TotalUtility {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Gdmsg,
    Ropsra,
    Rpsgora,
    Ergops,
    Dopsra,
    Oracle,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::Gdmsg,
        SolverKind::Ropsra,
        SolverKind::Rpsgora,
        SolverKind::Ergops,
        SolverKind::Dopsra,
        SolverKind::Oracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Gdmsg => "gdmsg",
            SolverKind::Ropsra => "ropsra",
            SolverKind::Rpsgora => "rpsgora",
            SolverKind::Ergops => "ergops",
            SolverKind::Dopsra => "dopsra",
            SolverKind::Oracle => "oracle",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Whether the solver produces a per-iteration trace.
    pub fn is_iterative(&self) -> bool {
        !matches!(self, SolverKind::Ropsra | SolverKind::Oracle)
    }
}

pub fn solve(kind: SolverKind, instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
    match kind {
        SolverKind::Gdmsg => gdmsg_solve(instance, config),
        SolverKind::Ropsra => ropsra(instance, &mut seeded(config.seed, 1)),
        SolverKind::Rpsgora => rpsgora(instance, config),
        SolverKind::Ergops => ergops(instance, config),
        SolverKind::Dopsra => dopsra(instance, config),
        SolverKind::Oracle => brute_force_oracle(instance, &config.oracle_grid),
    }
}

fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn problem<'a>(instance: &'a Instance, slot: &'a SlotInstance) -> SlotProblem<'a> {
    SlotProblem::new(&instance.params, slot)
}

fn idle_slot(instance: &Instance, slot: &SlotInstance) -> Result<(SlotDecision, SlotOutcome)> {
    let d = SlotDecision::all_local(&slot.tasks, instance.params.num_elements());
    let out = problem(instance, slot).evaluate(&d)?;
    Ok((d, out))
}

/// How the diffusion search fills the parts of the strategy it does not own.
#[derive(Debug, Clone, PartialEq)]
enum Variant {
    Full,
    /// One fixed phase vector per slot.
    FrozenPhases(Vec<Vec<f64>>),
    /// BS capacity split evenly over the offloaders.
    EqualSplit,
}

fn equal_split(actions: &[Action], fmax: f64) -> Vec<f64> {
    let m = actions.iter().filter(|a| **a == Action::Offload).count();
    let mut freqs: Vec<f64> = actions
        .iter()
        .map(|a| if *a == Action::Offload { fmax / m as f64 } else { 0.0 })
        .collect();
    game::fit_budget(&mut freqs, fmax);
    freqs
}

/// Leader–follower search with a diffusion sampler per slot.
pub fn gdmsg_solve(instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
    gdmsg_solve_with(instance, config, &mut TotalUtility)
}

pub fn gdmsg_solve_with(instance: &Instance, config: &SolverConfig, objective: &mut dyn Objective) -> Result<SolveResult> {
    diffusion_search(instance, config, Variant::Full, objective)
}

/// Random phases frozen per slot; offloading and allocation by the diffusion search.
pub fn rpsgora(instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
    let mut rng = seeded(config.seed, 3);
    let k = instance.params.num_elements();
    let phases = instance
        .slots
        .iter()
        .map(|_| (0..k).map(|_| rng.random_range(0.0..TAU)).collect())
        .collect();
    diffusion_search(instance, config, Variant::FrozenPhases(phases), &mut TotalUtility)
}

/// Equal BS allocation; offloading and phases by the diffusion search.
pub fn ergops(instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
    diffusion_search(instance, config, Variant::EqualSplit, &mut TotalUtility)
}

struct SlotSearch {
    denoiser: Denoiser,
    optimizer: Adam,
    buffer: EliteBuffer,
    best: Option<(f64, SlotDecision, SlotOutcome)>,
}

fn diffusion_search(instance: &Instance, config: &SolverConfig, variant: Variant, objective: &mut dyn Objective) -> Result<SolveResult> {
    instance.params.validate()?;
    config.validate()?;
    let params = &instance.params;
    let layout = LatentLayout::new(params.num_vehicles(), params.num_elements());
    let schedule = NoiseSchedule::new(config.gdm.steps, config.gdm.beta_min, config.gdm.beta_max)?;
    let fmax = params.compute.bs_max_freq;
    let mut rng = seeded(config.seed, 0);

    // Slots without tasks have nothing to decide.
    let mut fixed: Vec<Option<(SlotDecision, SlotOutcome)>> = Vec::with_capacity(instance.num_slots());
    let mut searches: Vec<Option<SlotSearch>> = Vec::with_capacity(instance.num_slots());
    for slot in &instance.slots {
        if slot.num_tasks() == 0 {
            fixed.push(Some(idle_slot(instance, slot)?));
            searches.push(None);
        } else {
            let denoiser = Denoiser::new(layout.dim(), &config.gdm.denoiser, &mut rng)?;
            let optimizer = Adam::new(denoiser.net.num_params(), config.gdm.learning_rate);
            fixed.push(None);
            searches.push(Some(SlotSearch {
                denoiser,
                optimizer,
                buffer: EliteBuffer::new(config.gdm.buffer_size),
                best: None,
            }));
        }
    }
    let fixed_score: f64 = fixed.iter().flatten().map(|(_, o)| objective.slot_score(o)).sum();
    let active = searches.iter().any(Option::is_some);

    let mut result = SolveResult::default();
    let (mut prev_u, mut prev_r) = (0.0, 0.0);
    for j in 1..=config.max_iters {
        let mut u = fixed_score;
        for (n, search) in searches.iter_mut().enumerate() {
            let Some(s) = search else { continue };
            let slot = &instance.slots[n];
            let prob = problem(instance, slot);
            let mut iter_best = f64::NEG_INFINITY;
            for _ in 0..config.gdm.samples_per_iter {
                let x = reverse_sample(&s.denoiser, &schedule, &mut rng, false)?;
                let proposal = decode(&x, &layout, &slot.tasks, fmax, config.decode_grid.as_ref())?;
                let freqs = match variant {
                    Variant::EqualSplit => equal_split(&proposal.actions, fmax),
                    _ => proposal.freqs,
                };
                let candidates = match &variant {
                    Variant::FrozenPhases(p) => vec![p[n].clone()],
                    _ => vec![proposal.phases],
                };
                let (mut decision, mut outcome) = prob.play(&freqs, &candidates)?;
                if variant == Variant::EqualSplit {
                    decision.freqs = equal_split(&decision.actions, fmax);
                    outcome = prob.evaluate(&decision)?;
                }
                let score = objective.slot_score(&outcome);
                s.buffer.insert(x, score);
                iter_best = iter_best.max(score);
                if s.best.as_ref().is_none_or(|b| score > b.0) {
                    s.best = Some((score, decision, outcome));
                }
            }
            u += iter_best;
            for _ in 0..config.gdm.train_steps_per_iter {
                train_step(&mut s.denoiser, &mut s.optimizer, &s.buffer, &schedule, &config.gdm.train, &mut rng)?;
            }
        }
        let r = objective.reward(u, prev_u);
        result.utility_trace.push(u);
        result.reward_trace.push(r);
        result.iterations = j;
        if !active || (j >= config.min_iters && (r - prev_r).abs() < config.epsilon) {
            break;
        }
        prev_r = r;
        prev_u = u;
    }

    for (f, s) in fixed.into_iter().zip(searches) {
        let (d, o) = match (f, s) {
            (Some(pair), _) => pair,
            (None, Some(SlotSearch { best: Some((_, d, o)), .. })) => (d, o),
            _ => return Err(Error::Precondition("slot search produced no decision")),
        };
        result.decisions.push(d);
        result.outcomes.push(o);
    }
    Ok(result)
}

/// Uniformly random offloading, phases and allocation, executed as drawn.
pub fn ropsra<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Result<SolveResult> {
    instance.params.validate()?;
    let params = &instance.params;
    let fmax = params.compute.bs_max_freq;
    let mut result = SolveResult {
        iterations: 1,
        ..SolveResult::default()
    };
    for slot in &instance.slots {
        let actions: Vec<Action> = slot
            .tasks
            .iter()
            .map(|t| match t {
                None => Action::Idle,
                Some(_) if rng.random::<bool>() => Action::Offload,
                Some(_) => Action::Local,
            })
            .collect();
        let phases = (0..params.num_elements()).map(|_| rng.random_range(0.0..TAU)).collect();
        let draws: Vec<f64> = actions
            .iter()
            .map(|a| if *a == Action::Offload { Exp1.sample(rng) } else { 0.0 })
            .collect();
        let total: f64 = draws.iter().sum();
        let mut freqs: Vec<f64> = draws
            .iter()
            .map(|d| if *d > 0.0 { (fmax * d / total).max(f64::MIN_POSITIVE) } else { 0.0 })
            .collect();
        game::fit_budget(&mut freqs, fmax);
        let decision = SlotDecision { actions, phases, freqs };
        let outcome = problem(instance, slot).evaluate(&decision)?;
        result.decisions.push(decision);
        result.outcomes.push(outcome);
    }
    let u = result.utility();
    result.utility_trace.push(u);
    result.reward_trace.push(game::reward(u, 0.0));
    Ok(result)
}

/// Enumeration bounds accepted by the oracle.
pub const ORACLE_MAX_VEHICLES: usize = 3;
pub const ORACLE_MAX_ELEMENTS: usize = 4;
pub const ORACLE_MAX_SLOTS: usize = 2;

/// Exhaustive search over {local, offload}^V × phase grid^K × resource
/// levels (multiples of f_b^max/G, each offloader ≥ 1 level, Σ ≤ G). The
/// chosen decision misses the fewest deadlines and, among those, has the
/// highest utility.
pub fn brute_force_oracle(instance: &Instance, grid: &DecodeGrid) -> Result<SolveResult> {
    instance.params.validate()?;
    let params = &instance.params;
    if params.num_vehicles() > ORACLE_MAX_VEHICLES || params.num_elements() > ORACLE_MAX_ELEMENTS || instance.num_slots() > ORACLE_MAX_SLOTS {
        return Err(Error::TooLarge("oracle needs V <= 3, K <= 4, N <= 2"));
    }
    if grid.phase_points < 2 || grid.resource_points < 2 {
        return Err(Error::Config {
            field: "oracle_grid",
            reason: "grid sizes must be at least 2",
        });
    }
    let phase_values = grid.phases();
    let levels = grid.resource_points;
    let fmax = params.compute.bs_max_freq;
    let k = params.num_elements();
    let mut result = SolveResult {
        iterations: 1,
        ..SolveResult::default()
    };
    for slot in &instance.slots {
        let prob = problem(instance, slot);
        let with_task: Vec<usize> = (0..slot.tasks.len()).filter(|&i| slot.tasks[i].is_some()).collect();
        let mut best: Option<(usize, f64, SlotDecision, SlotOutcome)> = None;
        let mut phase_idx = vec![0usize; k];
        loop {
            let phases: Vec<f64> = phase_idx.iter().map(|&p| phase_values[p]).collect();
            for mask in 0u32..(1 << with_task.len()) {
                let mut actions = SlotDecision::all_local(&slot.tasks, k).actions;
                let offloaders: Vec<usize> = with_task
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &i)| i)
                    .collect();
                for &i in &offloaders {
                    actions[i] = Action::Offload;
                }
                for counts in compositions(offloaders.len(), levels) {
                    let mut freqs = vec![0.0; slot.tasks.len()];
                    for (&i, c) in offloaders.iter().zip(&counts) {
                        freqs[i] = *c as f64 * fmax / levels as f64;
                    }
                    game::fit_budget(&mut freqs, fmax);
                    let decision = SlotDecision {
                        actions: actions.clone(),
                        phases: phases.clone(),
                        freqs,
                    };
                    let outcome = prob.evaluate(&decision)?;
                    let better = match &best {
                        None => true,
                        Some((f, u, _, _)) => outcome.failed < *f || (outcome.failed == *f && outcome.utility > *u),
                    };
                    if better {
                        best = Some((outcome.failed, outcome.utility, decision, outcome));
                    }
                }
            }
            if !advance(&mut phase_idx, phase_values.len()) {
                break;
            }
        }
        let (_, _, d, o) = best.expect("enumeration is nonempty");
        result.decisions.push(d);
        result.outcomes.push(o);
    }
    let u = result.utility();
    result.utility_trace.push(u);
    result.reward_trace.push(game::reward(u, 0.0));
    Ok(result)
}

/// Odometer increment; false once every digit wrapped.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// All vectors of `m` positive integers with sum ≤ `total`.
fn compositions(m: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        let rest = m - cur.len() - 1;
        for c in 1..=left.saturating_sub(rest) {
            cur.push(c);
            rec(m, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m <= total {
        rec(m, total, &mut Vec::with_capacity(m), &mut out);
    }
    out
}

/// Observation of one slot for the learned baseline: per vehicle task flag,
/// normalized size, intensity, deadline and log direct-link power, then the
/// slot position.
pub fn slot_features(instance: &Instance, n: usize) -> Vec<f64> {
    let cfg = &instance.params.scenario;
    let slot = &instance.slots[n];
    let mut out = Vec::with_capacity(5 * slot.tasks.len() + 1);
    for (i, task) in slot.tasks.iter().enumerate() {
        let g: f64 = slot.channel.h_ib[i].iter().map(|c| c.norm_sqr()).sum();
        let lg = (g.max(1e-30).log10() + 7.0) / 3.0;
        match task {
            Some(t) => out.extend_from_slice(&[
                1.0,
                t.data_bits / cfg.data_size.max,
                t.intensity / cfg.intensity.max,
                t.deadline / cfg.deadline.max,
                lg,
            ]),
            None => out.extend_from_slice(&[0.0, 0.0, 0.0, 0.0, lg]),
        }
    }
    out.push(n as f64 / cfg.num_slots.max(1) as f64);
    out
}

/// Gaussian policy over latents with a state-independent log-std.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    pub mean: Mlp,
    pub log_std: Vec<f64>,
}

impl GaussianPolicy {
    pub fn log_prob(&self, mean: &[f64], action: &[f64]) -> f64 {
        let half_ln_tau = 0.5 * TAU.ln();
        mean.iter()
            .zip(action)
            .zip(&self.log_std)
            .map(|((m, a), ls)| {
                let z = (a - m) / ls.exp();
                -0.5 * z * z - ls - half_ln_tau
            })
            .sum()
    }
}

/// One stored transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub advantage: f64,
    pub ret: f64,
}

/// Clipped-surrogate loss over a batch (minus the entropy bonus), with its
/// gradient with respect to the mean network and the log-std vector.
pub fn ppo_actor_loss(policy: &GaussianPolicy, batch: &[Transition], clip: f64, entropy_coef: f64) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let mut g_net = vec![0.0; policy.mean.num_params()];
    let mut g_std = vec![0.0; policy.log_std.len()];
    let mut loss = 0.0;
    let scale = 1.0 / batch.len().max(1) as f64;
    for tr in batch {
        let cache = policy.mean.forward_cached(&tr.state)?;
        let mean = cache.output();
        let ratio = (policy.log_prob(mean, &tr.action) - tr.log_prob).exp();
        let a = tr.advantage;
        let clipped = ratio.clamp(1.0 - clip, 1.0 + clip);
        loss -= scale * (ratio * a).min(clipped * a);
        let active = !((a > 0.0 && ratio > 1.0 + clip) || (a < 0.0 && ratio < 1.0 - clip));
        if !active {
            continue;
        }
        // d(−r·A)/d log π = −r·A.
        let d_logp = -scale * ratio * a;
        let mut up = vec![0.0; mean.len()];
        for (d, ((m, act), ls)) in mean.iter().zip(&tr.action).zip(&policy.log_std).enumerate() {
            let var = (2.0 * ls).exp();
            up[d] = d_logp * (act - m) / var;
            g_std[d] += d_logp * ((act - m) * (act - m) / var - 1.0);
        }
        policy.mean.backward(&cache, &up, &mut g_net)?;
    }
    // Entropy of a diagonal Gaussian grows by one per unit of log-std.
    let ent: f64 = policy.log_std.iter().sum();
    loss -= entropy_coef * ent;
    g_std.iter_mut().for_each(|g| *g -= entropy_coef);
    Ok((loss, g_net, g_std))
}

/// ½·mean (V(s) − return)² and its gradient.
pub fn critic_loss(critic: &Mlp, batch: &[Transition]) -> Result<(f64, Vec<f64>)> {
    let mut g = vec![0.0; critic.num_params()];
    let mut loss = 0.0;
    let scale = 1.0 / batch.len().max(1) as f64;
    for tr in batch {
        let cache: ForwardCache = critic.forward_cached(&tr.state)?;
        let err = cache.output()[0] - tr.ret;
        loss += 0.5 * scale * err * err;
        critic.backward(&cache, &[scale * err], &mut g)?;
    }
    Ok((loss, g))
}

/// GAE(γ, λ) advantages and returns for one episode.
pub fn gae(rewards: &[f64], values: &[f64], gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let next = if t + 1 < n { values[t + 1] } else { 0.0 };
        let delta = rewards[t] + gamma * next - values[t];
        acc = delta + gamma * lambda * acc;
        adv[t] = acc;
    }
    let ret = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, ret)
}

/// Result of the learned baseline plus its per-episode training returns.
#[derive(Debug, Clone, PartialEq)]
pub struct PpoRun {
    pub result: SolveResult,
    pub episode_returns: Vec<f64>,
    pub policy: GaussianPolicy,
    pub critic: Mlp,
}

/// PPO-trained actor-critic over the decoded action space.
pub fn dopsra(instance: &Instance, config: &SolverConfig) -> Result<SolveResult> {
    dopsra_train(instance, config).map(|r| r.result)
}

pub fn dopsra_train(instance: &Instance, config: &SolverConfig) -> Result<PpoRun> {
    instance.params.validate()?;
    config.validate()?;
    let ppo = &config.ppo;
    let params = &instance.params;
    let layout = LatentLayout::new(params.num_vehicles(), params.num_elements());
    let fmax = params.compute.bs_max_freq;
    let mut rng = seeded(config.seed, 4);
    let states: Vec<Vec<f64>> = (0..instance.num_slots()).map(|n| slot_features(instance, n)).collect();
    let sdim = states.first().map_or(5 * params.num_vehicles() + 1, Vec::len);

    let widths = |out| {
        let mut w = vec![sdim];
        w.extend_from_slice(&ppo.hidden);
        w.push(out);
        w
    };
    let mut actor = Mlp::init(MlpSpec::uniform(widths(layout.dim()), Activation::Tanh)?, &mut rng);
    actor.scale_output_layer(0.01);
    let mut policy = GaussianPolicy {
        mean: actor,
        log_std: vec![ppo.init_log_std; layout.dim()],
    };
    let mut critic = Mlp::init(MlpSpec::uniform(widths(1), Activation::Tanh)?, &mut rng);
    let mut opt_actor = Adam::new(policy.mean.num_params(), ppo.learning_rate);
    let mut opt_std = Adam::new(layout.dim(), ppo.learning_rate);
    let mut opt_critic = Adam::new(critic.num_params(), ppo.learning_rate);

    let step = |x: &[f64], n: usize| -> Result<SlotOutcome> {
        let slot = &instance.slots[n];
        if slot.num_tasks() == 0 {
            return idle_slot(instance, slot).map(|p| p.1);
        }
        let d = decode(x, &layout, &slot.tasks, fmax, config.decode_grid.as_ref())?;
        problem(instance, slot).play(&d.freqs, &[d.phases]).map(|p| p.1)
    };

    let mut reward_scale = 0.0;
    let mut pending: Vec<Transition> = Vec::new();
    let mut episode_returns = Vec::with_capacity(ppo.episodes);
    let mut result = SolveResult::default();
    let mut prev_u = 0.0;
    for ep in 0..ppo.episodes {
        let mut rewards = Vec::with_capacity(states.len());
        let mut values = Vec::with_capacity(states.len());
        let mut steps = Vec::with_capacity(states.len());
        for (n, s) in states.iter().enumerate() {
            let mean = policy.mean.forward(s)?;
            let action: Vec<f64> = mean
                .iter()
                .zip(&policy.log_std)
                .map(|(m, ls)| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + ls.exp() * z
                })
                .collect();
            let log_prob = policy.log_prob(&mean, &action);
            let out = step(&action, n)?;
            rewards.push(out.utility);
            values.push(critic.forward(s)?[0]);
            steps.push((s.clone(), action, log_prob));
        }
        let total: f64 = rewards.iter().sum();
        episode_returns.push(total);
        result.utility_trace.push(total);
        result.reward_trace.push(game::reward(total, prev_u));
        prev_u = total;
        if reward_scale == 0.0 {
            let mean_abs = rewards.iter().map(|r| r.abs()).sum::<f64>() / rewards.len().max(1) as f64;
            reward_scale = if mean_abs > 0.0 { mean_abs } else { 1.0 };
        }
        let scaled: Vec<f64> = rewards.iter().map(|r| r / reward_scale).collect();
        let (adv, ret) = gae(&scaled, &values, ppo.gamma, ppo.lambda);
        for ((s, a, lp), (ad, rt)) in steps.into_iter().zip(adv.into_iter().zip(ret)) {
            pending.push(Transition {
                state: s,
                action: a,
                log_prob: lp,
                advantage: ad,
                ret: rt,
            });
        }
        if (ep + 1) % ppo.episodes_per_update != 0 && ep + 1 != ppo.episodes {
            continue;
        }
        normalize_advantages(&mut pending);
        for _ in 0..ppo.epochs {
            let (_, g_net, g_std) = ppo_actor_loss(&policy, &pending, ppo.clip, ppo.entropy_coef)?;
            opt_actor.update(&mut policy.mean.params, &g_net)?;
            opt_std.update(&mut policy.log_std, &g_std)?;
            let (_, g_c) = critic_loss(&critic, &pending)?;
            opt_critic.update(&mut critic.params, &g_c)?;
        }
        pending.clear();
    }

    for (n, s) in states.iter().enumerate() {
        let slot = &instance.slots[n];
        let (d, o) = if slot.num_tasks() == 0 {
            idle_slot(instance, slot)?
        } else {
            let mean = policy.mean.forward(s)?;
            let d = decode(&mean, &layout, &slot.tasks, fmax, config.decode_grid.as_ref())?;
            problem(instance, slot).play(&d.freqs, &[d.phases])?
        };
        result.decisions.push(d);
        result.outcomes.push(o);
    }
    result.iterations = ppo.episodes;
    Ok(PpoRun {
        result,
        episode_returns,
        policy,
        critic,
    })
}

fn normalize_advantages(batch: &mut [Transition]) {
    let n = batch.len() as f64;
    if n < 2.0 {
        return;
    }
    let mean = batch.iter().map(|t| t.advantage).sum::<f64>() / n;
    let var = batch.iter().map(|t| (t.advantage - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt().max(1e-8);
    for t in batch {
        t.advantage = (t.advantage - mean) / sd;
    }
}

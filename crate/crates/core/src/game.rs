//! Stackelberg utilities, constraint checking and the follower best response.
//!
//! The BS (leader) commits to a per-slot frequency allocation F. Vehicles
//! (followers) then receive a phase configuration θ and pick local or
//! offloaded execution to maximize their own utility U_{i,a}.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::TAU;

use crate::channel::{rate, sinr};
use crate::compute::{local_delay, local_energy, offload_energy, transmission_delay};
use crate::error::{check_len, Error, Result};
use crate::model::{Instance, SlotInstance, SystemParams};
use crate::scenario::Task;

#[derive(Debug, Clone, PartialEq)]
pub struct GameParams {
    /// w_i, weight of the vehicles' QoE.
    pub vehicle_weight: f64,
    /// w_b, weight of the BS revenue.
    pub bs_weight: f64,
    /// c, shift inside the revenue log.
    pub revenue_shift: f64,
    /// G_i^max, per-task budget of a vehicle.
    pub budget: f64,
    /// G_b^min, price floor of the BS.
    pub price_floor: f64,
    /// ρ_{b,i}, price per allocated Hz.
    pub unit_price: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        Self {
            vehicle_weight: 0.5,
            bs_weight: 0.5,
            revenue_shift: 1.0,
            budget: 10.0,
            price_floor: 1.0,
            unit_price: 5e-8,
        }
    }
}

impl GameParams {
    pub fn validate(&self) -> Result<()> {
        let cfg = |field, reason| Error::Config { field, reason };
        if !(0.0..=1.0).contains(&self.vehicle_weight) {
            return Err(cfg("vehicle_weight", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.bs_weight) {
            return Err(cfg("bs_weight", "must lie in [0, 1]"));
        }
        if !(self.revenue_shift > 0.0 && self.revenue_shift.is_finite()) {
            return Err(cfg("revenue_shift", "must be positive"));
        }
        for (field, x) in [
            ("budget", self.budget),
            ("price_floor", self.price_floor),
            ("unit_price", self.unit_price),
        ] {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(cfg(field, "must be nonnegative and finite"));
            }
        }
        Ok(())
    }
}

/// ln(c + T^max − T).
pub fn task_revenue(deadline: f64, delay: f64, shift: f64) -> Result<f64> {
    let arg = shift + deadline - delay;
    if arg > 0.0 {
        Ok(arg.ln())
    } else {
        Err(Error::DeadlineViolation)
    }
}

/// The cost-relevant quantities of the branch a vehicle executes on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    Local {
        energy: f64,
    },
    Offload {
        tran_energy: f64,
        comp_energy: f64,
        /// Allocated BS frequency f_{b,i}.
        freq: f64,
    },
}

/// Vehicle cost: E^l locally, E^o + (G^max − f·ρ) when offloading.
pub fn task_cost(branch: &Branch, game: &GameParams) -> f64 {
    match *branch {
        Branch::Local { energy } => energy,
        Branch::Offload {
            tran_energy,
            comp_energy,
            freq,
        } => tran_energy + comp_energy + (game.budget - freq * game.unit_price),
    }
}

/// U_{i,a} = w·revenue − (1−w)·cost, where the offload cost counts only the
/// uplink energy (execution energy is borne by the BS).
pub fn vehicle_utility(weight: f64, revenue: f64, branch: &Branch, game: &GameParams) -> f64 {
    let cost = match *branch {
        Branch::Local { energy } => energy,
        Branch::Offload { tran_energy, freq, .. } => tran_energy + game.budget - freq * game.unit_price,
    };
    weight * revenue - (1.0 - weight) * cost
}

/// U_{b,i} = w_b·(f·ρ − G_b^min) − (1−w_b)·E_comp.
pub fn bs_utility(weight: f64, freq: f64, price: f64, floor: f64, comp_energy: f64) -> f64 {
    weight * (freq * price - floor) - (1.0 - weight) * comp_energy
}

/// U = w_i·U_QoE + w_b·U_Revenue.
pub fn total_utility(qoe: f64, revenue: f64, vehicle_weight: f64, bs_weight: f64) -> f64 {
    vehicle_weight * qoe + bs_weight * revenue
}

/// Only strict improvements are rewarded.
pub fn reward(current: f64, previous: f64) -> f64 {
    if current > previous {
        current - previous
    } else {
        0.0
    }
}

/// Offloading action O_i^a for one vehicle in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Action {
    /// No task, nothing to execute.
    #[default]
    Idle,
    Local,
    Offload,
}

/// (O, θ, F) for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotDecision {
    pub actions: Vec<Action>,
    /// Phase shifts θ_k in radians.
    pub phases: Vec<f64>,
    /// Allocated BS frequency f_{b,i} per vehicle, Hz.
    pub freqs: Vec<f64>,
}

impl SlotDecision {
    /// Everyone with a task computes locally, θ = 0, F = 0.
    pub fn all_local(tasks: &[Option<Task>], elements: usize) -> Self {
        Self {
            actions: tasks
                .iter()
                .map(|t| if t.is_some() { Action::Local } else { Action::Idle })
                .collect(),
            phases: vec![0.0; elements],
            freqs: vec![0.0; tasks.len()],
        }
    }

    pub fn offloaders(&self) -> impl Iterator<Item = usize> + '_ {
        self.actions
            .iter()
            .enumerate()
            .filter(|(_, a)| **a == Action::Offload)
            .map(|(i, _)| i)
    }
}

/// Per-vehicle result of executing a slot decision.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleOutcome {
    pub action: Action,
    /// Completion delay of the executed branch (0 without a task).
    pub delay: f64,
    /// Energy of the executed branch; offloading counts uplink and BS energy.
    pub energy: f64,
    /// U_{i,a}.
    pub qoe: f64,
    /// U_{b,i}; zero unless the vehicle offloads.
    pub bs_utility: f64,
    /// The task missed its deadline (or was dropped).
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlotOutcome {
    pub vehicles: Vec<VehicleOutcome>,
    pub delay: f64,
    pub energy: f64,
    pub qoe: f64,
    pub revenue: f64,
    pub utility: f64,
    pub failed: usize,
}

impl SlotOutcome {
    fn from_vehicles(vehicles: Vec<VehicleOutcome>, game: &GameParams) -> Self {
        let mut out = SlotOutcome::default();
        for v in &vehicles {
            out.delay += v.delay;
            out.energy += v.energy;
            out.qoe += v.qoe;
            out.revenue += v.bs_utility;
            out.failed += usize::from(v.failed);
        }
        out.utility = total_utility(out.qoe, out.revenue, game.vehicle_weight, game.bs_weight);
        out.vehicles = vehicles;
        out
    }
}

/// Utility index of `a`'s first maximum. Ties keep the earlier entry.
pub fn argmax_first(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

/// A slot of an instance bound to its parameters.
#[derive(Debug, Clone, Copy)]
pub struct SlotProblem<'a> {
    pub params: &'a SystemParams,
    pub slot: &'a SlotInstance,
}

/// Follower best response: actions plus the phase vector they were chosen under.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerResponse {
    pub actions: Vec<Action>,
    pub phases: Vec<f64>,
    /// Σ_i U_{i,a} under the followers' transmit assumption.
    pub vehicle_utility: f64,
}

impl<'a> SlotProblem<'a> {
    pub fn new(params: &'a SystemParams, slot: &'a SlotInstance) -> Self {
        Self { params, slot }
    }

    pub fn num_vehicles(&self) -> usize {
        self.slot.tasks.len()
    }

    pub fn tasks(&self) -> &'a [Option<Task>] {
        &self.slot.tasks
    }

    fn local_outcome(&self, task: &Task) -> VehicleOutcome {
        let p = self.params;
        let cycles = task.required_cycles();
        let delay = local_delay(cycles, p.compute.vehicle_freq);
        let energy = local_energy(cycles, p.compute.vehicle_freq, p.compute.vehicle_kappa);
        self.finish(task, Action::Local, delay, energy, &Branch::Local { energy }, 0.0)
    }

    fn offload_outcome(&self, task: &Task, rate: f64, freq: f64) -> Option<VehicleOutcome> {
        if !(rate > 0.0 && freq > 0.0) {
            return None;
        }
        let p = self.params;
        let cycles = task.required_cycles();
        let t_tran = transmission_delay(task.data_bits, rate);
        let delay = t_tran + cycles / freq;
        let e = offload_energy(p.scenario.tx_power, t_tran, cycles, freq, p.compute.bs_kappa);
        let branch = Branch::Offload {
            tran_energy: e.transmission,
            comp_energy: e.computation,
            freq,
        };
        let g = &p.game;
        let bs = bs_utility(g.bs_weight, freq, g.unit_price, g.price_floor, e.computation);
        Some(self.finish(task, Action::Offload, delay, e.total(), &branch, bs))
    }

    fn finish(&self, task: &Task, action: Action, delay: f64, energy: f64, branch: &Branch, bs: f64) -> VehicleOutcome {
        let g = &self.params.game;
        let failed = !(delay <= task.deadline);
        // A task that misses its deadline is abandoned there.
        let charged = if failed { task.deadline } else { delay };
        let revenue = task_revenue(task.deadline, charged, g.revenue_shift).unwrap_or(0.0);
        VehicleOutcome {
            action,
            delay: charged,
            energy,
            qoe: vehicle_utility(g.vehicle_weight, revenue, branch, g),
            bs_utility: bs,
            failed,
        }
    }

    fn dropped(&self, task: &Task) -> VehicleOutcome {
        let g = &self.params.game;
        let revenue = task_revenue(task.deadline, task.deadline, g.revenue_shift).unwrap_or(0.0);
        VehicleOutcome {
            action: Action::Idle,
            delay: task.deadline,
            qoe: g.vehicle_weight * revenue,
            failed: true,
            ..VehicleOutcome::default()
        }
    }

    /// Uplink rates given effective channel powers and the transmitting set.
    fn rates(&self, gains: &[f64], transmitting: &[bool]) -> Vec<f64> {
        let p = self.params;
        let powers: Vec<f64> = transmitting
            .iter()
            .map(|&on| if on { p.scenario.tx_power } else { 0.0 })
            .collect();
        let v = self.num_vehicles();
        (0..v)
            .map(|i| {
                if transmitting[i] {
                    rate(
                        p.channel.bandwidth,
                        v,
                        sinr(i, &powers, gains, p.channel.noise_power, p.channel.interference),
                    )
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn check_shape(&self, decision: &SlotDecision) -> Result<()> {
        let v = self.num_vehicles();
        check_len("actions", v, decision.actions.len())?;
        check_len("frequencies", v, decision.freqs.len())?;
        check_len("phases", self.params.num_elements(), decision.phases.len())
    }

    /// Executes a slot decision. Only vehicles that actually offload
    /// transmit, so they alone contribute interference.
    pub fn evaluate(&self, decision: &SlotDecision) -> Result<SlotOutcome> {
        self.check_shape(decision)?;
        let gains = self.slot.channel.gains(&decision.phases)?;
        let transmitting: Vec<bool> = decision
            .actions
            .iter()
            .zip(self.tasks())
            .map(|(a, t)| t.is_some() && *a == Action::Offload)
            .collect();
        let rates = self.rates(&gains, &transmitting);
        let mut vehicles = Vec::with_capacity(self.num_vehicles());
        for (i, task) in self.tasks().iter().enumerate() {
            let out = match (task, decision.actions[i]) {
                (None, _) => VehicleOutcome::default(),
                (Some(t), Action::Idle) => self.dropped(t),
                (Some(t), Action::Local) => self.local_outcome(t),
                (Some(t), Action::Offload) => self
                    .offload_outcome(t, rates[i], decision.freqs[i])
                    .ok_or(Error::InfeasibleOffload { vehicle: i })?,
            };
            vehicles.push(out);
        }
        Ok(SlotOutcome::from_vehicles(vehicles, &self.params.game))
    }

    /// Checks frequency bounds and the BS budget over the vehicles that could use their allocation.
    pub fn allocation_is_feasible(&self, freqs: &[f64]) -> bool {
        let fmax = self.params.compute.bs_max_freq;
        if freqs.len() != self.num_vehicles() {
            return false;
        }
        if !freqs.iter().all(|f| (0.0..=fmax).contains(f)) {
            return false;
        }
        let used: f64 = freqs
            .iter()
            .zip(self.tasks())
            .filter(|(_, t)| t.is_some())
            .map(|(f, _)| *f)
            .sum();
        used <= fmax
    }

    /// Best response of the vehicles to the leader allocation `freqs`.
    ///
    /// Every vehicle with a task and a positive allocation is scheduled on the
    /// uplink and is assumed to transmit when rates are computed. Each phase
    /// candidate is scored by the summed vehicle utility of the induced best
    /// responses; the first best candidate wins. A vehicle picks the action
    /// with the higher U_{i,a} among those meeting its deadline; when neither
    /// does, the task fails and the cheaper branch is executed.
    pub fn follower_response(&self, freqs: &[f64], candidates: &[Vec<f64>]) -> Result<FollowerResponse> {
        if !self.allocation_is_feasible(freqs) {
            return Err(Error::Precondition("leader allocation exceeds the BS capacity"));
        }
        if candidates.is_empty() {
            return Err(Error::Precondition("no phase candidates"));
        }
        let scheduled: Vec<bool> = freqs
            .iter()
            .zip(self.tasks())
            .map(|(f, t)| t.is_some() && *f > 0.0)
            .collect();
        let mut best: Option<FollowerResponse> = None;
        for phases in candidates {
            check_len("phases", self.params.num_elements(), phases.len())?;
            let gains = self.slot.channel.gains(phases)?;
            let rates = self.rates(&gains, &scheduled);
            let mut actions = vec![Action::Idle; self.num_vehicles()];
            let mut total = 0.0;
            for (i, task) in self.tasks().iter().enumerate() {
                let Some(t) = task else { continue };
                let local = self.local_outcome(t);
                let offload = self.offload_outcome(t, rates[i], freqs[i]);
                let chosen = match offload {
                    Some(o) => choose(&local, &o),
                    None => local,
                };
                actions[i] = chosen.action;
                total += chosen.qoe;
            }
            if best.as_ref().is_none_or(|b| total > b.vehicle_utility) {
                best = Some(FollowerResponse {
                    actions,
                    phases: phases.clone(),
                    vehicle_utility: total,
                });
            }
        }
        Ok(best.expect("at least one candidate"))
    }

    /// Leader allocation → follower response → executed outcome. The
    /// allocation of vehicles that decline to offload is released.
    pub fn play(&self, freqs: &[f64], candidates: &[Vec<f64>]) -> Result<(SlotDecision, SlotOutcome)> {
        let resp = self.follower_response(freqs, candidates)?;
        let freqs = freqs
            .iter()
            .zip(&resp.actions)
            .map(|(f, a)| if *a == Action::Offload { *f } else { 0.0 })
            .collect();
        let decision = SlotDecision {
            actions: resp.actions,
            phases: resp.phases,
            freqs,
        };
        let outcome = self.evaluate(&decision)?;
        Ok((decision, outcome))
    }
}

fn choose(local: &VehicleOutcome, offload: &VehicleOutcome) -> VehicleOutcome {
    match (local.failed, offload.failed) {
        (false, true) => *local,
        (true, false) => *offload,
        _ => {
            if offload.qoe > local.qoe {
                *offload
            } else {
                *local
            }
        }
    }
}

/// Constraints of the joint problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    /// Binary offloading variables.
    Binary,
    /// At most one action per vehicle.
    SingleAction,
    /// Completion before the deadline.
    Deadline,
    /// At most one task per vehicle, and no action without a task.
    TaskCount,
    /// 0 ≤ f_{b,i} ≤ f_b^max.
    FrequencyBounds,
    /// Σ_{i∈I₀} f_{b,i} ≤ f_b^max.
    FrequencyBudget,
    /// 0 ≤ θ_k < 2π.
    PhaseRange,
}

impl Constraint {
    pub const ALL: [Constraint; 7] = [
        Constraint::Binary,
        Constraint::SingleAction,
        Constraint::Deadline,
        Constraint::TaskCount,
        Constraint::FrequencyBounds,
        Constraint::FrequencyBudget,
        Constraint::PhaseRange,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Constraint::Binary => "binary",
            Constraint::SingleAction => "single-action",
            Constraint::Deadline => "deadline",
            Constraint::TaskCount => "task-count",
            Constraint::FrequencyBounds => "frequency-bounds",
            Constraint::FrequencyBudget => "frequency-budget",
            Constraint::PhaseRange => "phase-range",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub constraint: Constraint,
    pub slot: usize,
    /// Vehicle, element or (for slot-level budget checks) `usize::MAX`.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintReport {
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn passes(&self, c: Constraint) -> bool {
        !self.violations.iter().any(|v| v.constraint == c)
    }

    pub fn violating(&self, c: Constraint) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.constraint == c)
    }

    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Feasible when deadline misses are tolerated (they are logged as
    /// failed tasks instead).
    pub fn structurally_feasible(&self) -> bool {
        self.violations.iter().all(|v| v.constraint == Constraint::Deadline)
    }
}

/// Checks every constraint for a full-horizon decision against its instance.
pub fn check_constraints(decision: &[SlotDecision], instance: &Instance) -> ConstraintReport {
    let mut report = ConstraintReport::default();
    let params = &instance.params;
    let fmax = params.compute.bs_max_freq;
    let v = params.num_vehicles();
    let k = params.num_elements();
    let mut push = |constraint, slot, index| report.violations.push(Violation { constraint, slot, index });
    if decision.len() != instance.num_slots() {
        push(Constraint::Binary, usize::MAX, usize::MAX);
    }
    for (n, (d, slot)) in decision.iter().zip(&instance.slots).enumerate() {
        if d.actions.len() != v {
            push(Constraint::Binary, n, usize::MAX);
            continue;
        }
        for (i, (a, t)) in d.actions.iter().zip(&slot.tasks).enumerate() {
            if t.is_none() && *a != Action::Idle {
                push(Constraint::TaskCount, n, i);
            }
        }
        if d.freqs.len() != v {
            push(Constraint::FrequencyBounds, n, usize::MAX);
        } else {
            for (i, f) in d.freqs.iter().enumerate() {
                if !(0.0..=fmax).contains(f) {
                    push(Constraint::FrequencyBounds, n, i);
                }
            }
            let used: f64 = d.offloaders().map(|i| d.freqs[i]).sum();
            if !(used <= fmax) {
                push(Constraint::FrequencyBudget, n, usize::MAX);
            }
        }
        if d.phases.len() != k {
            push(Constraint::PhaseRange, n, usize::MAX);
            continue;
        }
        for (j, t) in d.phases.iter().enumerate() {
            if !(0.0..TAU).contains(t) {
                push(Constraint::PhaseRange, n, j);
            }
        }
        if d.freqs.len() != v {
            continue;
        }
        match SlotProblem::new(params, slot).evaluate(d) {
            Ok(out) => {
                for (i, o) in out.vehicles.iter().enumerate() {
                    if o.failed {
                        push(Constraint::Deadline, n, i);
                    }
                }
            }
            Err(Error::InfeasibleOffload { vehicle }) => push(Constraint::Deadline, n, vehicle),
            Err(_) => push(Constraint::Binary, n, usize::MAX),
        }
    }
    report
}

/// Shaves rounding excess off the largest share so Σf ≤ f_b^max holds in
/// floating point.
pub fn fit_budget(freqs: &mut [f64], fmax: f64) {
    loop {
        let sum: f64 = freqs.iter().sum();
        if sum <= fmax {
            return;
        }
        let (i, _) = freqs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let excess = (sum - fmax).max(freqs[i] * f64::EPSILON);
        freqs[i] = (freqs[i] - excess).max(0.0);
    }
}

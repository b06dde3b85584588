//! Geometry, vehicle mobility and per-slot task arrivals.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::{Euclid, Float};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Reference distance d₀ of the path-loss model; shorter links are clamped to it.
pub const REFERENCE_DISTANCE: f64 = 1.0;

/// Closed interval sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub const fn point(value: f64) -> Self {
        Self {
            min: value,
            max: value,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min <= self.max
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub num_vehicles: usize,
    pub num_antennas: usize,
    pub num_elements: usize,
    pub num_slots: usize,
    /// Slot length δ_t in seconds.
    pub slot_duration: f64,
    /// Width and depth of the road area in meters.
    pub area: [f64; 2],
    pub bs_position: Vec3,
    pub irs_position: Vec3,
    /// Per-vehicle, per-slot task arrival probability.
    pub task_prob: f64,
    /// Task size D in bits.
    pub data_size: Interval,
    /// Computation intensity C in cycles per bit.
    pub intensity: Interval,
    /// Deadline T^max in seconds.
    pub deadline: Interval,
    /// Uplink transmit power p^tr in watts.
    pub tx_power: f64,
    /// Initial speed in m/s.
    pub speed: Interval,
    /// Signed acceleration along the initial heading, m/s².
    pub accel: Interval,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_vehicles: 6,
            num_antennas: 4,
            num_elements: 16,
            num_slots: 10,
            slot_duration: 1.0,
            area: [100.0, 100.0],
            bs_position: [80.0, 40.0, 0.0],
            irs_position: [0.0, 0.0, 50.0],
            task_prob: 0.8,
            data_size: Interval::new(0.5e6, 2.0e6),
            intensity: Interval::new(500.0, 1500.0),
            deadline: Interval::new(0.1, 10.0),
            tx_power: 1.0,
            speed: Interval::new(5.0, 15.0),
            accel: Interval::new(-1.0, 1.0),
        }
    }
}

fn field(field: &'static str, reason: &'static str) -> Error {
    Error::Config { field, reason }
}

fn finite3(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_vehicles", self.num_vehicles),
            ("num_antennas", self.num_antennas),
            ("num_elements", self.num_elements),
            ("num_slots", self.num_slots),
        ];
        for (name, n) in counts {
            if n == 0 {
                return Err(field(name, "must be at least 1"));
            }
        }
        if !(self.slot_duration > 0.0 && self.slot_duration.is_finite()) {
            return Err(field("slot_duration", "must be positive and finite"));
        }
        if !self.area.iter().all(|a| a.is_finite() && *a >= 0.0) {
            return Err(field("area", "must be finite and nonnegative"));
        }
        if !finite3(&self.bs_position) {
            return Err(field("bs_position", "must be finite"));
        }
        if !finite3(&self.irs_position) {
            return Err(field("irs_position", "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.task_prob) {
            return Err(field("task_prob", "must lie in [0, 1]"));
        }
        let positive_ranges = [
            ("data_size", self.data_size),
            ("intensity", self.intensity),
            ("deadline", self.deadline),
        ];
        for (name, r) in positive_ranges {
            if !r.is_valid() {
                return Err(field(name, "needs finite bounds with min <= max"));
            }
            if r.min <= 0.0 {
                return Err(field(name, "must be strictly positive"));
            }
        }
        if !self.speed.is_valid() || self.speed.min < 0.0 {
            return Err(field("speed", "needs finite bounds 0 <= min <= max"));
        }
        if !self.accel.is_valid() {
            return Err(field("accel", "needs finite bounds with min <= max"));
        }
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            return Err(field("tx_power", "must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    /// Position in meters; z stays 0.
    pub position: Vec3,
    pub velocity: [f64; 2],
    pub acceleration: [f64; 2],
}

impl VehicleState {
    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }
}

/// A task U_i[n] = (D, C, T^max). Absence of a task is `None` in a task set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub data_bits: f64,
    pub intensity: f64,
    pub deadline: f64,
}

impl Task {
    pub fn new(data_bits: f64, intensity: f64, deadline: f64) -> Result<Self> {
        if !(data_bits > 0.0 && data_bits.is_finite()) {
            return Err(Error::Domain("task data size must be positive"));
        }
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(Error::Domain("task intensity must be positive"));
        }
        if !(deadline > 0.0 && deadline.is_finite()) {
            return Err(Error::Domain("task deadline must be positive"));
        }
        Ok(Self {
            data_bits,
            intensity,
            deadline,
        })
    }

    /// Required CPU cycles, D·C.
    pub fn required_cycles(&self) -> f64 {
        self.data_bits * self.intensity
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioState {
    pub config: ScenarioConfig,
    pub vehicles: Vec<VehicleState>,
    pub slot: usize,
}

pub fn init_scenario(config: ScenarioConfig, seed: u64) -> Result<ScenarioState> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = Interval::new(0.0, config.area[0]);
    let depth = Interval::new(0.0, config.area[1]);
    let vehicles = (0..config.num_vehicles)
        .map(|_| {
            let x = width.sample(&mut rng);
            let y = depth.sample(&mut rng);
            let heading = rng.random_range(0.0..core::f64::consts::TAU);
            let speed = config.speed.sample(&mut rng);
            let accel = config.accel.sample(&mut rng);
            let (s, c) = heading.sin_cos();
            VehicleState {
                position: [x, y, 0.0],
                velocity: [speed * c, speed * s],
                acceleration: [accel * c, accel * s],
            }
        })
        .collect();
    Ok(ScenarioState {
        config,
        vehicles,
        slot: 0,
    })
}

/// Folds a coordinate back into `[0, extent]` as if mirrored at both walls.
/// Returns the folded coordinate and whether the motion direction flipped.
fn fold(p: f64, extent: f64) -> (f64, bool) {
    if extent <= 0.0 {
        return (0.0, false);
    }
    if (0.0..=extent).contains(&p) {
        return (p, false);
    }
    let period = 2.0 * extent;
    let m = Euclid::rem_euclid(&p, &period);
    if m > extent {
        (period - m, true)
    } else {
        (m, false)
    }
}

/// Advances every vehicle by one slot of constant-acceleration motion.
///
/// Coordinates that leave the area are mirrored at the boundary; the
/// velocity and acceleration components along that axis change sign so the
/// trajectory stays the mirror image of the unbounded one.
pub fn step_mobility(state: &ScenarioState) -> ScenarioState {
    let dt = state.config.slot_duration;
    let mut next = state.clone();
    for v in &mut next.vehicles {
        for axis in 0..2 {
            let raw = v.position[axis] + v.velocity[axis] * dt + 0.5 * v.acceleration[axis] * dt * dt;
            let vel = v.velocity[axis] + v.acceleration[axis] * dt;
            let (pos, flipped) = fold(raw, state.config.area[axis]);
            v.position[axis] = pos;
            if flipped {
                v.velocity[axis] = -vel;
                v.acceleration[axis] = -v.acceleration[axis];
            } else {
                v.velocity[axis] = vel;
            }
        }
    }
    next.slot += 1;
    next
}

pub fn generate_tasks<R: Rng + ?Sized>(state: &ScenarioState, rng: &mut R) -> Vec<Option<Task>> {
    let cfg = &state.config;
    (0..cfg.num_vehicles)
        .map(|_| {
            if rng.random::<f64>() < cfg.task_prob {
                Some(Task {
                    data_bits: cfg.data_size.sample(rng),
                    intensity: cfg.intensity.sample(rng),
                    deadline: cfg.deadline.sample(rng),
                })
            } else {
                None
            }
        })
        .collect()
}

pub fn distance(a: &Vec3, b: &Vec3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn clamped(a: &Vec3, b: &Vec3) -> f64 {
    distance(a, b).max(REFERENCE_DISTANCE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distances {
    pub vehicle_bs: Vec<f64>,
    pub vehicle_irs: Vec<f64>,
    pub irs_bs: f64,
}

pub fn distances(state: &ScenarioState) -> Distances {
    let cfg = &state.config;
    Distances {
        vehicle_bs: state
            .vehicles
            .iter()
            .map(|v| clamped(&v.position, &cfg.bs_position))
            .collect(),
        vehicle_irs: state
            .vehicles
            .iter()
            .map(|v| clamped(&v.position, &cfg.irs_position))
            .collect(),
        irs_bs: clamped(&cfg.irs_position, &cfg.bs_position),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_vehicle(pos: [f64; 2], vel: [f64; 2], acc: [f64; 2]) -> ScenarioState {
        let config = ScenarioConfig {
            num_vehicles: 1,
            ..ScenarioConfig::default()
        };
        ScenarioState {
            config,
            vehicles: alloc::vec![VehicleState {
                position: [pos[0], pos[1], 0.0],
                velocity: vel,
                acceleration: acc,
            }],
            slot: 0,
        }
    }

    #[test]
    fn init_places_vehicles_in_area() {
        let s = init_scenario(ScenarioConfig::default(), 42).unwrap();
        assert_eq!(s.vehicles.len(), 6);
        for v in &s.vehicles {
            assert!((0.0..=100.0).contains(&v.position[0]));
            assert!((0.0..=100.0).contains(&v.position[1]));
            assert_eq!(v.position[2], 0.0);
        }
    }

    #[test]
    fn degenerate_area_puts_vehicle_at_origin() {
        let cfg = ScenarioConfig {
            num_vehicles: 1,
            area: [0.0, 0.0],
            ..ScenarioConfig::default()
        };
        let s = init_scenario(cfg, 7).unwrap();
        assert_eq!(s.vehicles[0].position, [0.0, 0.0, 0.0]);
        let next = step_mobility(&s);
        assert_eq!(next.vehicles[0].position, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_scenario(ScenarioConfig::default(), 9).unwrap();
        let b = init_scenario(ScenarioConfig::default(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_config_names_field() {
        let cfg = ScenarioConfig {
            task_prob: 1.5,
            ..ScenarioConfig::default()
        };
        match init_scenario(cfg, 0) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "task_prob"),
            other => panic!("unexpected {other:?}"),
        }
        let cfg = ScenarioConfig {
            deadline: Interval::new(2.0, 1.0),
            ..ScenarioConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(Error::Config {
                field: "deadline",
                ..
            })
        ));
    }

    #[test]
    fn straight_line_kinematics() {
        let s = one_vehicle([0.0, 0.0], [1.0, 0.0], [0.0, 0.0]);
        let n = step_mobility(&s);
        assert_eq!(n.vehicles[0].position, [1.0, 0.0, 0.0]);
        assert_eq!(n.slot, 1);
    }

    #[test]
    fn constant_acceleration() {
        let s = one_vehicle([10.0, 10.0], [0.0, 0.0], [2.0, 0.0]);
        let n = step_mobility(&s);
        assert_eq!(n.vehicles[0].position, [11.0, 10.0, 0.0]);
        assert_eq!(n.vehicles[0].velocity, [2.0, 0.0]);
    }

    #[test]
    fn reflection_at_far_wall() {
        let s = one_vehicle([99.5, 0.0], [1.0, 0.0], [0.0, 0.0]);
        let n = step_mobility(&s);
        assert!((n.vehicles[0].position[0] - 99.5).abs() < 1e-12);
        assert_eq!(n.vehicles[0].position[1], 0.0);
        assert_eq!(n.vehicles[0].velocity, [-1.0, 0.0]);
    }

    #[test]
    fn task_probability_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = init_scenario(ScenarioConfig::default(), 1).unwrap();
        s.config.task_prob = 0.0;
        assert!(generate_tasks(&s, &mut rng).iter().all(Option::is_none));
        s.config.task_prob = 1.0;
        let tasks = generate_tasks(&s, &mut rng);
        assert_eq!(tasks.len(), 6);
        for t in tasks {
            let t = t.expect("task present");
            assert!(s.config.data_size.contains(t.data_bits));
            assert!(s.config.intensity.contains(t.intensity));
            assert!(s.config.deadline.contains(t.deadline));
        }
    }

    #[test]
    fn task_rate_matches_probability() {
        let cfg = ScenarioConfig {
            num_vehicles: 1,
            task_prob: 0.5,
            ..ScenarioConfig::default()
        };
        let s = init_scenario(cfg, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| generate_tasks(&s, &mut rng)[0].is_some())
            .count();
        let rate = hits as f64 / draws as f64;
        assert!((rate - 0.5).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn distance_examples() {
        let mut s = one_vehicle([80.0, 40.0], [0.0; 2], [0.0; 2]);
        let d = distances(&s);
        assert_eq!(d.vehicle_bs[0], 1.0);
        assert!((d.irs_bs - 10500f64.sqrt()).abs() < 1e-9);
        assert!((d.irs_bs - 102.47).abs() < 0.01);
        s.vehicles[0].position = [0.0, 0.0, 0.0];
        assert_eq!(distances(&s).vehicle_irs[0], 50.0);
    }

    #[test]
    fn task_rejects_nonpositive_fields() {
        assert!(Task::new(0.0, 1.0, 1.0).is_err());
        assert!(Task::new(1.0, -1.0, 1.0).is_err());
        assert!(Task::new(1.0, 1.0, 0.0).is_err());
        assert_eq!(Task::new(1e6, 1000.0, 1.0).unwrap().required_cycles(), 1e9);
    }

    #[test]
    fn reflection_stays_inside_for_many_steps() {
        let cfg = ScenarioConfig {
            accel: Interval::new(-3.0, 3.0),
            speed: Interval::new(0.0, 40.0),
            ..ScenarioConfig::default()
        };
        let mut s = init_scenario(cfg, 5).unwrap();
        for _ in 0..1_000_000 / 6 {
            s = step_mobility(&s);
            for v in &s.vehicles {
                assert!((0.0..=100.0).contains(&v.position[0]));
                assert!((0.0..=100.0).contains(&v.position[1]));
            }
        }
    }

    proptest! {
        #[test]
        fn fold_lands_inside(p in -1e7f64..1e7, w in 0.1f64..500.0) {
            let (x, _) = fold(p, w);
            prop_assert!((0.0..=w).contains(&x));
        }

        #[test]
        fn distance_symmetric_and_translation_invariant(
            a in prop::array::uniform3(-1e3f64..1e3),
            b in prop::array::uniform3(-1e3f64..1e3),
            t in prop::array::uniform3(-1e3f64..1e3),
        ) {
            let d = distance(&a, &b);
            prop_assert!((d - distance(&b, &a)).abs() <= 1e-12 * d.max(1.0));
            let at = [a[0] + t[0], a[1] + t[1], a[2] + t[2]];
            let bt = [b[0] + t[0], b[1] + t[1], b[2] + t[2]];
            prop_assert!((d - distance(&at, &bt)).abs() <= 1e-9 * d.max(1.0));
        }
    }
}

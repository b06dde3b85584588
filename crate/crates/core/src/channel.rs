//! Fading channels, IRS reflection and the uplink SINR/rate model.
//!
//! Channels are complex baseband gains. The direct vehicle→BS link is
//! Rayleigh; the vehicle→IRS and IRS→BS links are Rician with a
//! half-wavelength uniform-linear-array line-of-sight component. Arrays
//! (IRS and BS) are laid out along the global x axis.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::{Euclid, Float};
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::scenario::{distances, ScenarioState, Vec3, REFERENCE_DISTANCE};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Linear power gain ρ at the reference distance.
    pub ref_pathloss: f64,
    pub exponent_vehicle_bs: f64,
    pub exponent_vehicle_irs: f64,
    pub exponent_irs_bs: f64,
    /// Linear Rician factor γ.
    pub rician_factor: f64,
    /// System bandwidth Ω in Hz, split evenly across vehicles.
    pub bandwidth: f64,
    /// Receiver noise power σ² in watts.
    pub noise_power: f64,
    /// Count co-scheduled uplinks as interference in the SINR.
    pub interference: bool,
    /// Extra linear power gain on the direct vehicle→BS link (building
    /// penetration); 1.0 leaves the link unobstructed.
    pub direct_link_gain: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            ref_pathloss: db_to_linear(-20.0),
            exponent_vehicle_bs: 3.0,
            exponent_vehicle_irs: 2.5,
            exponent_irs_bs: 2.2,
            rician_factor: db_to_linear(3.0),
            bandwidth: 10e6,
            noise_power: dbm_to_watts(-114.0),
            interference: true,
            direct_link_gain: 1.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let cfg = |field, reason| Error::Config { field, reason };
        if !(self.ref_pathloss > 0.0 && self.ref_pathloss.is_finite()) {
            return Err(cfg("ref_pathloss", "must be positive"));
        }
        for (name, a) in [
            ("exponent_vehicle_bs", self.exponent_vehicle_bs),
            ("exponent_vehicle_irs", self.exponent_vehicle_irs),
            ("exponent_irs_bs", self.exponent_irs_bs),
        ] {
            if !(a > 0.0 && a.is_finite()) {
                return Err(cfg(name, "path-loss exponent must be positive"));
            }
        }
        if !(self.rician_factor >= 0.0 && self.rician_factor.is_finite()) {
            return Err(cfg("rician_factor", "must be nonnegative"));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(cfg("bandwidth", "must be positive"));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(cfg("noise_power", "must be positive"));
        }
        if !(self.direct_link_gain > 0.0 && self.direct_link_gain <= 1.0) {
            return Err(cfg("direct_link_gain", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        check_len("matrix data", rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

fn large_scale_amplitude(d: f64, exponent: f64, ref_pathloss: f64) -> Result<f64> {
    if !(d >= REFERENCE_DISTANCE) {
        return Err(Error::Domain("link distance below the reference distance"));
    }
    Ok((ref_pathloss * d.powf(-exponent)).sqrt())
}

/// Rayleigh gain with the small-scale component supplied by the caller.
pub fn rayleigh_from_scatter(
    d: f64,
    exponent: f64,
    ref_pathloss: f64,
    scatter: &[Complex64],
) -> Result<Vec<Complex64>> {
    let amp = large_scale_amplitude(d, exponent, ref_pathloss)?;
    Ok(scatter.iter().map(|h| h * amp).collect())
}

pub fn rayleigh_gain<R: Rng + ?Sized>(
    d: f64,
    exponent: f64,
    ref_pathloss: f64,
    antennas: usize,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let scatter: Vec<Complex64> = (0..antennas).map(|_| complex_gaussian(rng)).collect();
    rayleigh_from_scatter(d, exponent, ref_pathloss, &scatter)
}

/// Rician gain with both components supplied by the caller.
pub fn rician_from_parts(
    d: f64,
    exponent: f64,
    ref_pathloss: f64,
    factor: f64,
    los: &[Complex64],
    nlos: &[Complex64],
) -> Result<Vec<Complex64>> {
    if !(factor >= 0.0) {
        return Err(Error::Domain("Rician factor must be nonnegative"));
    }
    check_len("NLoS component", los.len(), nlos.len())?;
    let amp = large_scale_amplitude(d, exponent, ref_pathloss)?;
    let w_los = (factor / (1.0 + factor)).sqrt();
    let w_nlos = (1.0 / (1.0 + factor)).sqrt();
    Ok(los
        .iter()
        .zip(nlos)
        .map(|(l, n)| (l * w_los + n * w_nlos) * amp)
        .collect())
}

/// Rician gain; the output has the shape (flattened) of `los`.
pub fn rician_gain<R: Rng + ?Sized>(
    d: f64,
    exponent: f64,
    ref_pathloss: f64,
    factor: f64,
    los: &[Complex64],
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if !(factor >= 0.0) {
        return Err(Error::Domain("Rician factor must be nonnegative"));
    }
    let nlos: Vec<Complex64> = los.iter().map(|_| complex_gaussian(rng)).collect();
    rician_from_parts(d, exponent, ref_pathloss, factor, los, &nlos)
}

/// Half-wavelength ULA response at `rx` for a plane wave arriving from `tx`.
/// Entry k is exp(ι·π·k·cos φ), φ measured from the array (x) axis.
pub fn los_component(tx: &Vec3, rx: &Vec3, elements: usize) -> Result<Vec<Complex64>> {
    let d = [tx[0] - rx[0], tx[1] - rx[1], tx[2] - rx[2]];
    let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if !(norm > 0.0) {
        return Err(Error::Domain("coincident positions have no arrival angle"));
    }
    let cos_phi = d[0] / norm;
    Ok(steering(cos_phi, elements))
}

pub(crate) fn steering(cos_phi: f64, elements: usize) -> Vec<Complex64> {
    (0..elements)
        .map(|k| Complex64::from_polar(1.0, PI * k as f64 * cos_phi))
        .collect()
}

/// Diagonal of Θ = diag(e^{ιθ_1}, …, e^{ιθ_K}) (unit reflection amplitude).
pub fn reflection_matrix(phases: &[f64]) -> Result<Vec<Complex64>> {
    phases
        .iter()
        .map(|&t| {
            if (0.0..TAU).contains(&t) {
                Ok(Complex64::from_polar(1.0, t))
            } else {
                Err(Error::Domain("phase shift outside [0, 2π)"))
            }
        })
        .collect()
}

/// Maps any finite angle into [0, 2π).
pub fn wrap_phase(t: f64) -> f64 {
    let w = Euclid::rem_euclid(&t, &TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// h_ib + h_ir · Θ · h_rb for one vehicle; Θ given by its diagonal.
pub fn effective_channel(
    h_ib: &[Complex64],
    h_ir: &[Complex64],
    theta: &[Complex64],
    h_rb: &CMatrix,
) -> Result<Vec<Complex64>> {
    check_len("IRS elements (h_ir)", h_rb.rows, h_ir.len())?;
    check_len("IRS elements (Θ)", h_rb.rows, theta.len())?;
    check_len("BS antennas", h_rb.cols, h_ib.len())?;
    let mut out = h_ib.to_vec();
    for k in 0..h_rb.rows {
        let w = h_ir[k] * theta[k];
        for (o, g) in out.iter_mut().zip(h_rb.row(k)) {
            *o += w * g;
        }
    }
    Ok(out)
}

pub fn squared_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// SINR of vehicle `i` from per-vehicle transmit powers and effective
/// channel powers ‖h_eff,j‖². Vehicles with zero power do not interfere.
pub fn sinr(i: usize, powers: &[f64], channel_gains: &[f64], noise_power: f64, interference: bool) -> f64 {
    let signal = powers[i] * channel_gains[i];
    let interf: f64 = if interference {
        powers
            .iter()
            .zip(channel_gains)
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (p, g))| p * g)
            .sum()
    } else {
        0.0
    };
    signal / (interf + noise_power)
}

/// FDMA uplink rate (Ω/V)·log₂(1+δ) in bits/s.
pub fn rate(bandwidth: f64, vehicles: usize, sinr: f64) -> f64 {
    bandwidth / vehicles as f64 * (1.0 + sinr).log2()
}

/// One slot's channel state: per-vehicle direct and vehicle→IRS gains and
/// the shared IRS→BS matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// h_{i,b}: S entries per vehicle.
    pub h_ib: Vec<Vec<Complex64>>,
    /// h_{i,r}: K entries per vehicle.
    pub h_ir: Vec<Vec<Complex64>>,
    /// h_{r,b}: K × S.
    pub h_rb: CMatrix,
}

impl ChannelRealization {
    pub fn realize<R: Rng + ?Sized>(
        params: &ChannelParams,
        state: &ScenarioState,
        rng: &mut R,
    ) -> Result<Self> {
        let cfg = &state.config;
        let d = distances(state);
        let s = cfg.num_antennas;
        let k = cfg.num_elements;
        let direct_amp = params.direct_link_gain.sqrt();
        let mut h_ib = Vec::with_capacity(cfg.num_vehicles);
        let mut h_ir = Vec::with_capacity(cfg.num_vehicles);
        for (i, v) in state.vehicles.iter().enumerate() {
            let mut g = rayleigh_gain(d.vehicle_bs[i], params.exponent_vehicle_bs, params.ref_pathloss, s, rng)?;
            g.iter_mut().for_each(|x| *x *= direct_amp);
            h_ib.push(g);
            let los = los_component(&v.position, &cfg.irs_position, k)?;
            h_ir.push(rician_gain(
                d.vehicle_irs[i],
                params.exponent_vehicle_irs,
                params.ref_pathloss,
                params.rician_factor,
                &los,
                rng,
            )?);
        }
        let depart = los_component(&cfg.bs_position, &cfg.irs_position, k)?;
        let arrive = los_component(&cfg.irs_position, &cfg.bs_position, s)?;
        let los_rb: Vec<Complex64> = depart
            .iter()
            .flat_map(|a| arrive.iter().map(move |b| a * b))
            .collect();
        let rb = rician_gain(
            d.irs_bs,
            params.exponent_irs_bs,
            params.ref_pathloss,
            params.rician_factor,
            &los_rb,
            rng,
        )?;
        Ok(Self {
            h_ib,
            h_ir,
            h_rb: CMatrix::new(k, s, rb)?,
        })
    }

    pub fn num_vehicles(&self) -> usize {
        self.h_ib.len()
    }

    pub fn num_elements(&self) -> usize {
        self.h_rb.rows
    }

    pub fn effective(&self, i: usize, theta: &[Complex64]) -> Result<Vec<Complex64>> {
        effective_channel(&self.h_ib[i], &self.h_ir[i], theta, &self.h_rb)
    }

    /// ‖h_eff,i‖² for every vehicle under phase vector `phases`.
    pub fn gains(&self, phases: &[f64]) -> Result<Vec<f64>> {
        let theta = reflection_matrix(phases)?;
        check_len("phase vector", self.num_elements(), theta.len())?;
        let mut out = Vec::with_capacity(self.num_vehicles());
        let mut acc = vec![Complex64::new(0.0, 0.0); self.h_rb.cols];
        for i in 0..self.num_vehicles() {
            acc.copy_from_slice(&self.h_ib[i]);
            for k in 0..self.h_rb.rows {
                let w = self.h_ir[i][k] * theta[k];
                for (o, g) in acc.iter_mut().zip(self.h_rb.row(k)) {
                    *o += w * g;
                }
            }
            out.push(squared_norm(&acc));
        }
        Ok(out)
    }

    pub fn sinr(&self, i: usize, powers: &[f64], phases: &[f64], params: &ChannelParams) -> Result<f64> {
        check_len("power vector", self.num_vehicles(), powers.len())?;
        let gains = self.gains(phases)?;
        Ok(sinr(i, powers, &gains, params.noise_power, params.interference))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{init_scenario, ScenarioConfig};
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn db_conversions() {
        assert!((db_to_linear(-20.0) - 0.01).abs() < 1e-15);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-12);
        assert!((dbm_to_watts(-114.0) - 3.981e-15).abs() < 1e-18);
        assert!((db_to_linear(3.0) - 1.995).abs() < 1e-3);
    }

    #[test]
    fn rayleigh_with_unit_scatter() {
        let g = rayleigh_from_scatter(1.0, 3.0, 0.01, &[c(1.0, 0.0); 4]).unwrap();
        for x in g {
            assert!((x.re - 0.1).abs() < 1e-15 && x.im == 0.0);
        }
    }

    #[test]
    fn rayleigh_rejects_short_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(rayleigh_gain(0.5, 3.0, 0.01, 2, &mut rng), Err(Error::Domain(_))));
    }

    #[test]
    fn rayleigh_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 200_000;
        let p: f64 = (0..n)
            .map(|_| rayleigh_gain(10.0, 3.0, 0.01, 1, &mut rng).unwrap()[0].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((p / 1e-5 - 1.0).abs() < 0.02, "mean power {p}");
    }

    #[test]
    fn rician_limits() {
        let los = [c(0.0, 1.0), c(-1.0, 0.0)];
        let nlos = [c(0.3, -0.2), c(1.1, 0.4)];
        let amp = (0.01f64 * 20f64.powf(-2.5)).sqrt();
        let g = rician_from_parts(20.0, 2.5, 0.01, 1e12, &los, &nlos).unwrap();
        for (x, l) in g.iter().zip(&los) {
            assert!((x - l * amp).norm() / amp < 1e-5);
        }
        let g = rician_from_parts(20.0, 2.5, 0.01, 0.0, &los, &nlos).unwrap();
        for (x, n) in g.iter().zip(&nlos) {
            assert!((x - n * amp).norm() < 1e-15);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(rician_gain(2.0, 2.0, 0.01, -1.0, &los, &mut rng).is_err());
    }

    #[test]
    fn los_examples() {
        let broadside = los_component(&[0.0, 5.0, 0.0], &[0.0, 0.0, 0.0], 4).unwrap();
        for x in broadside {
            assert!((x - c(1.0, 0.0)).norm() < 1e-12);
        }
        let endfire = los_component(&[3.0, 0.0, 0.0], &[0.0, 0.0, 0.0], 2).unwrap();
        assert!((endfire[1] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!(los_component(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 3).is_err());
    }

    #[test]
    fn reflection_examples() {
        let id = reflection_matrix(&[0.0; 3]).unwrap();
        assert!(id.iter().all(|x| *x == c(1.0, 0.0)));
        let m = reflection_matrix(&[PI]).unwrap();
        assert!((m[0] - c(-1.0, 0.0)).norm() < 1e-12);
        let m = reflection_matrix(&[PI / 2.0]).unwrap();
        assert!((m[0] - c(0.0, 1.0)).norm() < 1e-12);
        assert!(reflection_matrix(&[TAU]).is_err());
        assert!(reflection_matrix(&[-0.1]).is_err());
    }

    #[test]
    fn wrap_phase_half_open() {
        assert_eq!(wrap_phase(TAU), 0.0);
        assert!(wrap_phase(-1e-18) < TAU);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn effective_channel_examples() {
        let h_rb = CMatrix::new(1, 1, vec![c(3.0, 0.0)]).unwrap();
        let out = effective_channel(&[c(0.0, 0.0)], &[c(2.0, 0.0)], &[c(1.0, 0.0)], &h_rb).unwrap();
        assert_eq!(out, vec![c(6.0, 0.0)]);

        let h_rb = CMatrix::new(2, 2, vec![c(1.0, 2.0); 4]).unwrap();
        let h_ib = [c(0.5, -0.5), c(0.25, 1.0)];
        let out = effective_channel(&h_ib, &[c(0.0, 0.0); 2], &[c(1.0, 0.0); 2], &h_rb).unwrap();
        assert_eq!(out, h_ib.to_vec());

        let err = effective_channel(&h_ib, &[c(0.0, 0.0); 3], &[c(1.0, 0.0); 2], &h_rb);
        assert!(matches!(err, Err(Error::Shape { .. })));
    }

    #[test]
    fn effective_channel_matches_hand_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (k, s) = (4, 2);
        let h_ib: Vec<Complex64> = (0..s).map(|_| complex_gaussian(&mut rng)).collect();
        let h_ir: Vec<Complex64> = (0..k).map(|_| complex_gaussian(&mut rng)).collect();
        let h_rb = CMatrix::new(k, s, (0..k * s).map(|_| complex_gaussian(&mut rng)).collect()).unwrap();
        let phases: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..TAU)).collect();
        let theta = reflection_matrix(&phases).unwrap();
        let out = effective_channel(&h_ib, &h_ir, &theta, &h_rb).unwrap();
        // Full K×K diagonal matrix product, written out longhand.
        for col in 0..s {
            let mut acc = h_ib[col];
            for a in 0..k {
                for b in 0..k {
                    let diag = if a == b { theta[a] } else { c(0.0, 0.0) };
                    acc += h_ir[a] * diag * h_rb.get(b, col);
                }
            }
            assert!((acc - out[col]).norm() < 1e-12);
        }
    }

    #[test]
    fn sinr_examples() {
        let noise = 3.981e-15;
        assert!((sinr(0, &[1.0], &[1e-10], noise, true) - 1e-10 / noise).abs() < 1e-3);
        assert_eq!(sinr(0, &[0.0, 1.0], &[1e-10, 1e-10], noise, true), 0.0);
        let d = sinr(0, &[1.0, 1.0], &[1e-10, 1e-10], noise, true);
        assert!((d - 1e-10 / (1e-10 + noise)).abs() < 1e-12);
        assert!((d - 0.99996).abs() < 1e-5);
        let d = sinr(0, &[1.0, 1.0], &[1e-10, 1e-10], noise, false);
        assert!((d - 1e-10 / noise).abs() < 1e-3);
    }

    #[test]
    fn rate_examples() {
        assert!((rate(10e6, 6, 1.0) - 1.6667e6).abs() < 1e2);
        assert_eq!(rate(10e6, 6, 0.0), 0.0);
        assert!((rate(10e6, 6, 3.0) - 3.3333e6).abs() < 1e2);
    }

    #[test]
    fn rate_strictly_increasing_and_concave() {
        let grid: Vec<f64> = (0..400).map(|i| i as f64 * 0.05).collect();
        let r: Vec<f64> = grid.iter().map(|&d| rate(10e6, 6, d)).collect();
        for w in r.windows(3) {
            assert!(w[1] > w[0]);
            assert!(w[2] - 2.0 * w[1] + w[0] < 0.0);
        }
    }

    #[test]
    fn sinr_without_irs_ignores_phases() {
        let state = init_scenario(ScenarioConfig::default(), 3).unwrap();
        let params = ChannelParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut ch = ChannelRealization::realize(&params, &state, &mut rng).unwrap();
        for h in &mut ch.h_ir {
            h.iter_mut().for_each(|x| *x = c(0.0, 0.0));
        }
        let p = vec![1.0; 6];
        let k = ch.num_elements();
        let a = ch.sinr(2, &p, &vec![0.0; k], &params).unwrap();
        let phases: Vec<f64> = (0..k).map(|j| (j as f64 * 0.7) % TAU).collect();
        let b = ch.sinr(2, &p, &phases, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn realization_shapes() {
        let state = init_scenario(ScenarioConfig::default(), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = ChannelRealization::realize(&ChannelParams::default(), &state, &mut rng).unwrap();
        assert_eq!(ch.h_ib.len(), 6);
        assert!(ch.h_ib.iter().all(|h| h.len() == 4));
        assert!(ch.h_ir.iter().all(|h| h.len() == 16));
        assert_eq!((ch.h_rb.rows, ch.h_rb.cols), (16, 4));
        assert!(ch.h_rb.data.iter().all(|x| x.re.is_finite() && x.im.is_finite()));
    }

    proptest! {
        #[test]
        fn reflection_entries_unit_modulus(phases in prop::collection::vec(0.0f64..TAU, 1..32)) {
            for x in reflection_matrix(&phases).unwrap() {
                prop_assert!((x.norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn los_unit_modulus(
            tx in prop::array::uniform3(-100f64..100.0),
            rx in prop::array::uniform3(-100f64..100.0),
            n in 1usize..20,
        ) {
            prop_assume!(distance3(&tx, &rx) > 1e-6);
            for x in los_component(&tx, &rx, n).unwrap() {
                prop_assert!((x.norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn sinr_monotone_in_powers(
            gains in prop::collection::vec(1e-12f64..1e-6, 3),
            p in prop::collection::vec(0.0f64..2.0, 3),
            bump in 0.0f64..1.0,
        ) {
            let noise = 4e-15;
            let base = sinr(0, &p, &gains, noise, true);
            let mut up = p.clone();
            up[0] += bump;
            prop_assert!(sinr(0, &up, &gains, noise, true) >= base);
            let mut other = p.clone();
            other[1] += bump;
            prop_assert!(sinr(0, &other, &gains, noise, true) <= base);
        }
    }

    fn distance3(a: &Vec3, b: &Vec3) -> f64 {
        crate::scenario::distance(a, b)
    }
}

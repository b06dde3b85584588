//! Delay and energy of local and offloaded execution.

use crate::error::{Error, Result};
use crate::scenario::Task;

#[derive(Debug, Clone, PartialEq)]
pub struct ComputeParams {
    /// Vehicle CPU frequency f_i (Hz).
    pub vehicle_freq: f64,
    pub vehicle_kappa: f64,
    /// BS capacity f_b^max shared by all offloaders in a slot (Hz).
    pub bs_max_freq: f64,
    pub bs_kappa: f64,
}

impl Default for ComputeParams {
    fn default() -> Self {
        Self {
            vehicle_freq: 1e9,
            vehicle_kappa: 1e-27,
            bs_max_freq: 5e9,
            bs_kappa: 1e-26,
        }
    }
}

impl ComputeParams {
    pub fn validate(&self) -> Result<()> {
        for (field, x) in [
            ("vehicle_freq", self.vehicle_freq),
            ("vehicle_kappa", self.vehicle_kappa),
            ("bs_max_freq", self.bs_max_freq),
            ("bs_kappa", self.bs_kappa),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Config {
                    field,
                    reason: "must be positive and finite",
                });
            }
        }
        Ok(())
    }
}

/// Required cycles of a (possibly absent) task.
pub fn required_cycles(task: Option<&Task>) -> Result<f64> {
    match task {
        Some(t) if t.data_bits > 0.0 && t.intensity > 0.0 => Ok(t.required_cycles()),
        Some(_) => Err(Error::Domain("task needs positive size and intensity")),
        None => Err(Error::Domain("no task present")),
    }
}

pub fn local_delay(cycles: f64, freq: f64) -> f64 {
    cycles / freq
}

pub fn local_energy(cycles: f64, freq: f64, kappa: f64) -> f64 {
    kappa * freq * freq * cycles
}

/// Transmission time D/R.
pub fn transmission_delay(data_bits: f64, rate: f64) -> f64 {
    data_bits / rate
}

/// D/R + cycles/f_bi.
pub fn offload_delay(data_bits: f64, rate: f64, cycles: f64, bs_freq: f64) -> Result<f64> {
    if !(rate > 0.0) || !(bs_freq > 0.0) {
        return Err(Error::InfeasibleOffload { vehicle: usize::MAX });
    }
    Ok(transmission_delay(data_bits, rate) + cycles / bs_freq)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffloadEnergy {
    /// Uplink energy p·T_tran, paid by the vehicle.
    pub transmission: f64,
    /// BS execution energy κ_b·f_bi²·cycles.
    pub computation: f64,
}

impl OffloadEnergy {
    pub fn total(&self) -> f64 {
        self.transmission + self.computation
    }
}

pub fn offload_energy(tx_power: f64, transmission_time: f64, cycles: f64, bs_freq: f64, bs_kappa: f64) -> OffloadEnergy {
    OffloadEnergy {
        transmission: tx_power * transmission_time,
        computation: bs_kappa * bs_freq * bs_freq * cycles,
    }
}

/// One (vehicle, slot) accounting entry. At most one branch may carry cost.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExecutionRecord {
    pub local_delay: f64,
    pub local_energy: f64,
    pub offload_delay: f64,
    pub offload_energy: f64,
}

impl ExecutionRecord {
    pub fn local(delay: f64, energy: f64) -> Self {
        Self {
            local_delay: delay,
            local_energy: energy,
            ..Self::default()
        }
    }

    pub fn offload(delay: f64, energy: f64) -> Self {
        Self {
            offload_delay: delay,
            offload_energy: energy,
            ..Self::default()
        }
    }
}

/// (T_total, E_total) over every record.
pub fn totals(records: &[ExecutionRecord]) -> Result<(f64, f64)> {
    let mut delay = 0.0;
    let mut energy = 0.0;
    for (index, r) in records.iter().enumerate() {
        let local = r.local_delay != 0.0 || r.local_energy != 0.0;
        let offload = r.offload_delay != 0.0 || r.offload_energy != 0.0;
        if local && offload {
            return Err(Error::Accounting { index });
        }
        delay += r.local_delay + r.offload_delay;
        energy += r.local_energy + r.offload_energy;
    }
    Ok((delay, energy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn cycles_product() {
        let t = Task::new(1e6, 1000.0, 1.0).unwrap();
        assert_eq!(required_cycles(Some(&t)).unwrap(), 1e9);
        let t = Task::new(2e6, 500.0, 1.0).unwrap();
        assert_eq!(required_cycles(Some(&t)).unwrap(), 1e9);
        assert!(required_cycles(None).is_err());
        let zero = Task {
            data_bits: 0.0,
            intensity: 1000.0,
            deadline: 1.0,
        };
        assert!(required_cycles(Some(&zero)).is_err());
    }

    #[test]
    fn local_examples() {
        assert_eq!(local_delay(1e9, 1e9), 1.0);
        assert!(close(local_energy(1e9, 1e9, 1e-27), 1.0, 1e-12));
        assert_eq!(local_delay(0.0, 1e9), 0.0);
        assert_eq!(local_energy(0.0, 1e9, 1e-27), 0.0);
    }

    #[test]
    fn offload_examples() {
        let t = offload_delay(1e6, 1.6667e6, 1e9, 5e9).unwrap();
        assert!((t - 0.8).abs() < 1e-4, "{t}");
        let e = offload_energy(1.0, 0.6, 1e9, 5e9, 1e-26);
        assert!(close(e.transmission, 0.6, 1e-12));
        assert!(close(e.computation, 250.0, 1e-12));
        assert!(matches!(offload_delay(1e6, 0.0, 1e9, 5e9), Err(Error::InfeasibleOffload { .. })));
        assert!(matches!(offload_delay(1e6, 1e6, 1e9, 0.0), Err(Error::InfeasibleOffload { .. })));
    }

    #[test]
    fn totals_examples() {
        assert_eq!(totals(&[ExecutionRecord::local(1.0, 1.0)]).unwrap().0, 1.0);
        assert_eq!(totals(&[]).unwrap(), (0.0, 0.0));
        assert_eq!(totals(&[ExecutionRecord::default(); 3]).unwrap(), (0.0, 0.0));
        let recs = [
            ExecutionRecord::local(1.0, 0.1),
            ExecutionRecord::offload(0.8, 2.0),
            ExecutionRecord::local(0.5, 0.1),
            ExecutionRecord::offload(0.7, 2.0),
        ];
        assert!((totals(&recs).unwrap().0 - 3.0).abs() < 1e-12);
        let bad = ExecutionRecord {
            local_delay: 1.0,
            offload_delay: 1.0,
            ..ExecutionRecord::default()
        };
        assert_eq!(totals(&[ExecutionRecord::default(), bad]), Err(Error::Accounting { index: 1 }));
    }

    proptest! {
        #[test]
        fn local_costs_homogeneous_in_cycles(c in 1.0f64..1e10, f in 1e8f64..1e10) {
            prop_assert!(close(local_delay(2.0 * c, f), 2.0 * local_delay(c, f), 1e-15));
            prop_assert!(close(local_energy(2.0 * c, f, 1e-27), 2.0 * local_energy(c, f, 1e-27), 1e-15));
        }

        #[test]
        fn frequency_trades_delay_for_energy(c in 1.0f64..1e10, f in 1e8f64..1e10, step in 1.01f64..3.0) {
            prop_assert!(local_energy(c, f * step, 1e-27) > local_energy(c, f, 1e-27));
            prop_assert!(local_delay(c, f * step) < local_delay(c, f));
        }
    }
}

//! Diffusion search versus exhaustive enumeration on tiny instances.

use irsmec_core::solvers::{brute_force_oracle, gdmsg_solve, SolverConfig};
use irsmec_core::{Instance, SystemParams};

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    pub seed: u64,
    pub search: f64,
    pub oracle: f64,
}

impl OracleComparison {
    /// Within `tolerance` of the oracle, measured relative to |oracle|, so
    /// the test keeps its meaning when utilities are negative.
    pub fn near_optimal(&self, tolerance: f64) -> bool {
        self.search >= self.oracle - tolerance * self.oracle.abs()
    }

    pub fn ratio(&self) -> f64 {
        self.search / self.oracle
    }
}

/// Runs both solvers on the same instance; the search decodes onto the
/// oracle's grid.
pub fn compare_with_oracle(params: &SystemParams, solver: &SolverConfig, seed: u64) -> Result<OracleComparison, Error> {
    let instance = Instance::realize(params, seed)?;
    let cfg = SolverConfig {
        decode_grid: Some(solver.oracle_grid),
        seed,
        ..solver.clone()
    };
    let oracle = brute_force_oracle(&instance, &solver.oracle_grid)?.utility();
    let search = gdmsg_solve(&instance, &cfg)?.utility();
    Ok(OracleComparison { seed, search, oracle })
}

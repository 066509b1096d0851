use serde::Serialize;

use crate::error::Result;
use crate::lemma_lab::{
    residuals_eps, standard_suites, tightness_grid_search, tightness_witness_k3, GridSearchReport,
    SuiteReport, TightnessReport,
};
use crate::solvers::{epsilon_default, epsilon_max, general_ratio, implied_ratio, k3_constant};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsRow {
    pub k: usize,
    pub eps: f64,
    pub residuals: [f64; 3],
    pub feasible: bool,
    pub eps_hat: f64,
    pub implied_ratio: f64,
    pub ratio_at_default: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub suites: Vec<SuiteReport>,
    pub tightness: TightnessReport,
    pub grid: GridSearchReport,
    pub eps: Vec<EpsRow>,
    pub passed: bool,
}

/// Every residual suite with `count` scenarios, the k = 3 tightness checks
/// with a simplex grid of step `grid_step`, and the `eps` table for k = 3..=64.
pub fn run_lemmas(count: u64, master_seed: u64, grid_step: f64) -> Result<LemmaReport> {
    let suites = standard_suites(count, master_seed)?;
    let tightness = tightness_witness_k3()?;
    let grid = tightness_grid_search(k3_constant() - 0.01, grid_step)?;
    let eps = (3..=64)
        .map(|k| {
            let eps = epsilon_default(k)?;
            let r = residuals_eps(k, eps)?;
            let eps_hat = epsilon_max(k, 1e-12)?;
            Ok(EpsRow {
                k,
                eps,
                residuals: r.as_array(),
                feasible: r.feasible(),
                eps_hat,
                implied_ratio: implied_ratio(eps_hat),
                ratio_at_default: general_ratio(k),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = suites.iter().all(|s| s.passed)
        && tightness.holds()
        && !grid.satisfiable
        && eps.iter().all(|r| r.feasible && r.eps_hat >= r.eps);
    Ok(LemmaReport {
        suites,
        tightness,
        grid,
        eps,
        passed,
    })
}

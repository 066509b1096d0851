use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::lemma_lab::{check_rule, sample_scenario, Category, Grid, Residual, SamplerOptions, YProfile};
use crate::seed::derive_seed;
use crate::solvers::{descending_order, flowchart_l, k3_constant, ProbabilityRule, TailExponent};

/// Residuals at or above this count as passing.
pub const RESIDUAL_TOL: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "suite", rename_all = "snake_case")]
pub enum SuiteKind {
    /// The k = 3 rule on unrestricted scenarios.
    K3,
    /// The general rule on all-positive `y`.
    GeneralPositive { k: usize },
    /// The general rule's tail branch on `y` with a nonpositive minimum.
    GeneralNegative { k: usize, tail: TailExponent },
}

impl SuiteKind {
    pub fn k(&self) -> usize {
        match *self {
            SuiteKind::K3 => 3,
            SuiteKind::GeneralPositive { k } | SuiteKind::GeneralNegative { k, .. } => k,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            SuiteKind::K3 => "k3".into(),
            SuiteKind::GeneralPositive { k } => format!("general_positive_k{k}"),
            SuiteKind::GeneralNegative { k, tail: TailExponent::KMinusTwo } => {
                format!("general_negative_k{k}")
            }
            SuiteKind::GeneralNegative { k, tail: TailExponent::KMinusOne } => {
                format!("general_negative_k{k}_tail_k_minus_1")
            }
        }
    }

    pub fn rule(&self) -> ProbabilityRule {
        let eps = 1.0 / (self.k() * self.k()) as f64;
        match *self {
            SuiteKind::K3 => ProbabilityRule::KThree,
            SuiteKind::GeneralPositive { .. } => ProbabilityRule::general(eps),
            SuiteKind::GeneralNegative { tail, .. } => ProbabilityRule::GeneralK { eps, tail },
        }
    }

    /// The constant the suite checks against.
    pub fn constant(&self) -> f64 {
        let k = self.k() as f64;
        match self {
            SuiteKind::K3 => k3_constant(),
            SuiteKind::GeneralPositive { .. } => 1.0 / (1.0 + 1.0 / (k * k)),
            SuiteKind::GeneralNegative { .. } => 1.0 - 1.0 / (k - 1.0),
        }
    }

    fn profile(&self) -> YProfile {
        match self {
            SuiteKind::K3 => YProfile::Any,
            SuiteKind::GeneralPositive { .. } => YProfile::AllPositive,
            SuiteKind::GeneralNegative { .. } => YProfile::NonpositiveMin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchStat {
    pub count: u64,
    pub min_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub k: usize,
    pub rule: String,
    pub c: f64,
    pub count: u64,
    pub min_residual: f64,
    pub branches: BTreeMap<String, BranchStat>,
    pub cases: BTreeMap<String, u64>,
    pub worst: Option<Residual>,
    pub passed: bool,
}

/// Scenario `i` of a suite uses seed `derive_seed(master, i)`; even indices
/// draw from the negative category and odd ones from the nonnegative one.
pub fn run_suite(kind: SuiteKind, count: u64, master_seed: u64, grid: Grid) -> Result<SuiteReport> {
    let rule = kind.rule();
    let c = kind.constant();
    let options = SamplerOptions {
        profile: kind.profile(),
        grid,
    };
    let residuals: Vec<Residual> = (0..count)
        .into_par_iter()
        .map(|i| {
            let category = if i % 2 == 0 { Category::Negative } else { Category::Nonnegative };
            let s = sample_scenario(kind.k(), derive_seed(master_seed, i), category, options)?;
            check_rule(&s, rule, c)
        })
        .collect::<Result<_>>()?;

    let mut branches: BTreeMap<String, BranchStat> = BTreeMap::new();
    let mut cases: BTreeMap<String, u64> = BTreeMap::new();
    let mut worst: Option<&Residual> = None;
    for r in &residuals {
        let stat = branches.entry(r.branch.to_string()).or_insert(BranchStat {
            count: 0,
            min_residual: f64::INFINITY,
        });
        stat.count += 1;
        stat.min_residual = stat.min_residual.min(r.value);
        let case = serde_json::to_value(r.scenario.case())?;
        *cases.entry(case.as_str().unwrap_or_default().to_string()).or_default() += 1;
        if worst.map_or(true, |w| r.value < w.value) {
            worst = Some(r);
        }
    }
    let min_residual = worst.map_or(f64::INFINITY, |w| w.value);
    Ok(SuiteReport {
        name: kind.name(),
        k: kind.k(),
        rule: rule.to_string(),
        c,
        count,
        min_residual,
        branches,
        cases,
        worst: worst.cloned(),
        passed: min_residual >= RESIDUAL_TOL,
    })
}

/// The suites that must pass: k = 3, and the positive and tail branches of the
/// general rule for k = 3, 4, 5.
pub fn standard_kinds() -> Vec<SuiteKind> {
    let mut kinds = vec![SuiteKind::K3];
    for k in 3..=5 {
        kinds.push(SuiteKind::GeneralPositive { k });
    }
    for k in 3..=5 {
        kinds.push(SuiteKind::GeneralNegative {
            k,
            tail: TailExponent::KMinusTwo,
        });
    }
    kinds
}

pub fn standard_suites(count: u64, master_seed: u64) -> Result<Vec<SuiteReport>> {
    standard_kinds()
        .into_iter()
        .enumerate()
        .map(|(i, kind)| run_suite(kind, count, derive_seed(master_seed, i as u64), Grid::Dyadic))
        .collect()
}

/// How often each flowchart level is reached on all-positive sampled `y`.
pub fn level_census(k: usize, eps: f64, count: u64, master_seed: u64) -> Result<BTreeMap<usize, u64>> {
    let options = SamplerOptions {
        profile: YProfile::AllPositive,
        grid: Grid::Dyadic,
    };
    let levels: Vec<usize> = (0..count)
        .into_par_iter()
        .map(|i| {
            let s = sample_scenario(k, derive_seed(master_seed, i), Category::Nonnegative, options)?;
            let ys: Vec<f64> = descending_order(&s.y).iter().map(|&j| s.y[j]).collect();
            flowchart_l(&ys, eps)
        })
        .collect::<Result<_>>()?;
    let mut census = BTreeMap::new();
    for l in levels {
        *census.entry(l).or_default() += 1;
    }
    Ok(census)
}

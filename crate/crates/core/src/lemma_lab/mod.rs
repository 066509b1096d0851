//! Step-level inequalities behind the approximation guarantees.
//!
//! One step of the framework is summarized by an [`AdversaryScenario`]: the
//! marginals `a` at the optimum-side solution, the marginals `y` at the
//! algorithm's solution, the optimal label `i*` and the label `i₋` with a
//! negative `a` (if any). A rule with constant `c` is sound when
//! `f(p) <= c·g(p)` for every scenario, where `p` is what the rule plays on `y`.

mod sampler;
mod suites;
mod tightness;
mod trace;

pub use sampler::{sample_scenario, Category, Grid, SamplerOptions, YProfile};
pub use suites::{
    level_census, run_suite, standard_kinds, standard_suites, BranchStat, SuiteKind, SuiteReport,
    RESIDUAL_TOL,
};
pub use tightness::{tightness_grid_search, tightness_witness_k3, GridSearchReport, TightnessReport};
pub use trace::{extend_to_full, trace_against_reference, TraceReport, TraceStep};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::MarginalVector;
use crate::solvers::{Branch, ProbabilityRule, StepDistribution};

/// Tolerance for the constraint checks on scenarios drawn off the dyadic grid.
pub const CONTINUOUS_SLACK: f64 = 1e-12;

/// Labels are 1-based, matching assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryScenario {
    pub a: Vec<f64>,
    pub y: Vec<f64>,
    pub i_star: u8,
    pub i_minus: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioCase {
    MinusIsStar,
    MinusNotStar,
    NoMinus,
}

impl AdversaryScenario {
    /// Builds a scenario, deriving `i₋` from the signs of `a`.
    pub fn new(a: Vec<f64>, y: Vec<f64>, i_star: u8) -> Result<Self> {
        let i_minus = a.iter().position(|v| *v < 0.0).map(|i| i as u8 + 1);
        let s = Self { a, y, i_star, i_minus };
        s.check(0.0)?;
        Ok(s)
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    pub fn case(&self) -> ScenarioCase {
        match self.i_minus {
            Some(m) if m == self.i_star => ScenarioCase::MinusIsStar,
            Some(_) => ScenarioCase::MinusNotStar,
            None => ScenarioCase::NoMinus,
        }
    }

    /// Checks `a <= y`, the pairwise sums of `a` and of `y`, and that `i₋` is
    /// the unique negative entry of `a`.
    pub fn check(&self, slack: f64) -> Result<()> {
        let k = self.k();
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if k < 2 || self.y.len() != k {
            return bad(format!("need k >= 2 and |a| = |y|, got {} and {}", k, self.y.len()));
        }
        if self.a.iter().chain(&self.y).any(|v| !v.is_finite()) {
            return bad("non-finite entry".into());
        }
        if self.i_star == 0 || self.i_star as usize > k {
            return bad(format!("i* = {} out of range", self.i_star));
        }
        for i in 0..k {
            if self.a[i] > self.y[i] + slack {
                return bad(format!("a_{} = {} > y_{} = {}", i + 1, self.a[i], i + 1, self.y[i]));
            }
            for j in (i + 1)..k {
                if self.a[i] + self.a[j] < -slack {
                    return bad(format!("a_{} + a_{} < 0", i + 1, j + 1));
                }
                if self.y[i] + self.y[j] < -slack {
                    return bad(format!("y_{} + y_{} < 0", i + 1, j + 1));
                }
            }
        }
        let negatives: Vec<u8> = (0..k)
            .filter(|&i| self.a[i] < 0.0)
            .map(|i| i as u8 + 1)
            .collect();
        match (negatives.as_slice(), self.i_minus) {
            ([], None) => Ok(()),
            ([m], Some(i)) if *m == i => Ok(()),
            _ => bad(format!("i₋ = {:?} but negative entries at {negatives:?}", self.i_minus)),
        }
    }

    fn check_p(&self, p: &StepDistribution) -> Result<()> {
        if p.k() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                actual: p.k(),
            });
        }
        Ok(())
    }
}

/// The loss bound of a step: `0`, `(1-p*)a* + (1-p*-2p₋)a₋` or `(1-p*)a*`
/// according to the scenario case.
pub fn f_of_p(s: &AdversaryScenario, p: &StepDistribution) -> Result<f64> {
    s.check_p(p)?;
    let p = p.probs();
    let star = s.i_star as usize - 1;
    Ok(match s.case() {
        ScenarioCase::MinusIsStar => 0.0,
        ScenarioCase::MinusNotStar => {
            let m = s.i_minus.expect("case has i₋") as usize - 1;
            (1.0 - p[star]) * s.a[star] + (1.0 - p[star] - 2.0 * p[m]) * s.a[m]
        }
        ScenarioCase::NoMinus => (1.0 - p[star]) * s.a[star],
    })
}

/// The expected gain of a step, `Σ y_i p_i`.
pub fn g_of_p(s: &AdversaryScenario, p: &StepDistribution) -> Result<f64> {
    s.check_p(p)?;
    Ok(s.y.iter().zip(p.probs()).map(|(y, p)| y * p).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    /// `c·g(p) − f(p)`; negative means the inequality fails.
    pub value: f64,
    pub branch: Branch,
    pub p: Vec<f64>,
    pub scenario: AdversaryScenario,
}

/// Plays `rule` on the scenario's `y` and returns `c·g(p) − f(p)`.
pub fn check_rule(s: &AdversaryScenario, rule: ProbabilityRule, c: f64) -> Result<Residual> {
    rule.check_compatible(s.k())?;
    let (p, branch) = rule.distribution(&MarginalVector(s.y.clone()))?;
    let value = c * g_of_p(s, &p)? - f_of_p(s, &p)?;
    Ok(Residual {
        value,
        branch,
        p: p.into_vec(),
        scenario: s.clone(),
    })
}

/// Slacks of the three conditions on `eps`; all must be nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsResiduals {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl EpsResiduals {
    pub fn feasible(&self) -> bool {
        self.q1 >= 0.0 && self.q2 >= 0.0 && self.q3 >= 0.0
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.q1, self.q2, self.q3]
    }
}

pub fn residuals_eps(k: usize, eps: f64) -> Result<EpsResiduals> {
    if k < 3 {
        return Err(Error::Precondition(format!("eps residuals need k >= 3, got {k}")));
    }
    let e1 = 1.0 + eps;
    let km1 = (k - 1) as f64;
    let q1 = 2f64.sqrt() / e1.sqrt() - eps / e1 - e1;
    let q2 = 1.0 / km1 + (1.0 - eps) / e1 - e1;
    let prod: f64 = (2..k).map(|j| 1.0 + 1.0 / (j as f64 * e1)).product();
    let q3 = prod / km1 - (1.0 + 2.0 * eps) / 2.0;
    Ok(EpsResiduals { q1, q2, q3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{k3_constant, k3_ratio};

    #[test]
    fn scenario_checks() {
        assert!(AdversaryScenario::new(vec![1.0, -0.5, 0.5], vec![1.0, 0.0, 0.5], 1).is_ok());
        // a > y
        assert!(AdversaryScenario::new(vec![2.0, 0.0], vec![1.0, 0.0], 1).is_err());
        // two negatives in a
        assert!(AdversaryScenario::new(vec![-1.0, -1.0, 3.0], vec![0.0, 0.0, 3.0], 1).is_err());
        // y pair sum
        assert!(AdversaryScenario::new(vec![-2.0, 1.0], vec![-1.5, 1.0], 1).is_err());
        let mut s = AdversaryScenario::new(vec![1.0, 0.0], vec![1.0, 1.0], 1).unwrap();
        s.i_minus = Some(2);
        assert!(s.check(0.0).is_err());
    }

    #[test]
    fn f_and_g_examples() {
        let al = k3_ratio();
        let s = AdversaryScenario::new(vec![1.0, -al, al], vec![1.0, 1.0, al], 1).unwrap();
        assert_eq!(s.i_minus, Some(2));
        let u = StepDistribution::new(vec![1.0 / 3.0; 3]).unwrap();
        assert!((f_of_p(&s, &u).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((g_of_p(&s, &u).unwrap() - (2.0 + al) / 3.0).abs() < 1e-15);
        assert!((k3_constant() * g_of_p(&s, &u).unwrap() - 2.0 / 3.0).abs() < 1e-12);

        let s = AdversaryScenario::new(vec![1.0, 0.5, 0.0], vec![2.0, 1.0, 0.5], 2).unwrap();
        let on_star = StepDistribution::point_mass(3, 1);
        assert_eq!(f_of_p(&s, &on_star).unwrap(), 0.0);
        let on_max = StepDistribution::point_mass(3, 0);
        assert_eq!(g_of_p(&s, &on_max).unwrap(), 2.0);

        let s = AdversaryScenario::new(vec![-1.0, 1.0, 1.0], vec![0.0, 1.0, 1.0], 1).unwrap();
        assert_eq!(s.case(), ScenarioCase::MinusIsStar);
        assert_eq!(f_of_p(&s, &on_max).unwrap(), 0.0);
        assert_eq!(f_of_p(&s, &u).unwrap(), 0.0);

        let zero = AdversaryScenario::new(vec![0.0; 3], vec![0.0; 3], 1).unwrap();
        assert_eq!(g_of_p(&zero, &u).unwrap(), 0.0);
        assert!(f_of_p(&zero, &StepDistribution::point_mass(2, 0)).is_err());
    }

    #[test]
    fn eps_residual_examples() {
        let r = residuals_eps(3, 1.0 / 9.0).unwrap();
        assert!((r.q1 - 0.13053).abs() < 1e-5, "{r:?}");
        assert!((r.q2 - 0.18889).abs() < 1e-5);
        assert!((r.q3 - 0.11389).abs() < 1e-5);
        assert!(r.feasible());
        let r = residuals_eps(3, 1e-12).unwrap();
        assert!((r.q1 - (2f64.sqrt() - 1.0)).abs() < 1e-9);
        let r = residuals_eps(3, 1.0).unwrap();
        assert!((r.q2 + 1.5).abs() < 1e-15);
        assert!(!r.feasible());
        assert!(residuals_eps(2, 0.1).is_err());
    }

    #[test]
    fn eps_residuals_decrease() {
        for k in 3..=64 {
            let mut prev = residuals_eps(k, 1e-4).unwrap().as_array();
            for step in 1..=200 {
                let eps = 1e-4 + step as f64 * (1.0 - 1e-4) / 200.0;
                let cur = residuals_eps(k, eps).unwrap().as_array();
                for q in 0..3 {
                    assert!(cur[q] < prev[q], "k = {k}, q{} at {eps}", q + 1);
                }
                prev = cur;
            }
        }
    }
}

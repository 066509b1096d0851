//! The sequential randomized framework and its probability rules.
//!
//! Every algorithm here visits the elements once, in a fixed order. At each
//! step it computes the marginal vector `y` of the current element at the
//! current partial solution, turns `y` into a distribution over labels with a
//! [`ProbabilityRule`], and samples the label. The rules differ only in that
//! distribution.

mod epsilon;
mod exact;
mod framework;
mod rules;

pub use epsilon::{epsilon_default, epsilon_max, implied_ratio};
pub use exact::{brute_force_opt, exact_expected_value};
pub use framework::{run_randomized, ElementOrder, RunReport, StepRecord};
pub use rules::{descending_order, flowchart_l, rule_general, rule_k3, rule_monotone, rule_uniform};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::MarginalVector;
use crate::lemma_lab::residuals_eps;

/// Entries below this are treated as rounding noise when checking a distribution.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A probability vector over the labels `1..=k` (position `i` is label `i+1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StepDistribution(Vec<f64>);

impl StepDistribution {
    /// Accepts `p` if its entries are nonnegative and sum to one within
    /// [`SIMPLEX_TOL`], then divides by the sum.
    pub fn new(mut p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        if p.iter().any(|v| !v.is_finite() || *v < -SIMPLEX_TOL) {
            return Err(Error::InvalidDistribution(format!(
                "entries must be finite and nonnegative: {p:?}"
            )));
        }
        for v in p.iter_mut() {
            *v = v.max(0.0);
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        for v in p.iter_mut() {
            *v /= total;
        }
        Ok(Self(p))
    }

    /// All mass on position `index`.
    pub fn point_mass(k: usize, index: usize) -> Self {
        let mut p = vec![0.0; k];
        p[index] = 1.0;
        Self(p)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Rearranges a distribution given in descending-`y` order back to label
    /// order; `order[r]` is the label position ranked `r`.
    fn unsort(sorted: Vec<f64>, order: &[usize]) -> Result<Self> {
        let mut p = vec![0.0; sorted.len()];
        for (rank, &pos) in order.iter().enumerate() {
            p[pos] = sorted[rank];
        }
        Self::new(p)
    }
}

/// Which case of a rule produced a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "branch", content = "level", rename_all = "snake_case")]
pub enum Branch {
    /// Powers of the (clamped) marginals.
    MonotoneWeighted,
    /// All powers vanish; label 1 is chosen.
    MonotoneFallback,
    /// k = 3, `γ <= 0`: split between the top two labels.
    K3NonPositive,
    /// k = 3, `γ > 0, δ > 0`: top two labels only.
    K3TopTwo,
    /// k = 3, `γ > 0, δ <= 0`: all three labels.
    K3AllThree,
    /// Largest marginal is nonpositive; the top-ranked label is chosen.
    Degenerate,
    /// General k with a nonpositive smallest marginal: powers over the top `k-1`.
    NegativeTail,
    /// General k with all marginals positive, at the flowchart level `l`.
    Level(usize),
    Uniform,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::MonotoneWeighted => write!(f, "monotone_weighted"),
            Branch::MonotoneFallback => write!(f, "monotone_fallback"),
            Branch::K3NonPositive => write!(f, "k3_nonpositive"),
            Branch::K3TopTwo => write!(f, "k3_top_two"),
            Branch::K3AllThree => write!(f, "k3_all_three"),
            Branch::Degenerate => write!(f, "degenerate"),
            Branch::NegativeTail => write!(f, "negative_tail"),
            Branch::Level(l) => write!(f, "level_{l}"),
            Branch::Uniform => write!(f, "uniform"),
        }
    }
}

/// Exponent used by the general-k rule when the smallest marginal is nonpositive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailExponent {
    /// `y_i^(k-2)`, the exponent for which the `1 - 1/(k-1)` bound is proved.
    #[default]
    KMinusTwo,
    /// `y_i^(k-1)`, kept for comparison.
    KMinusOne,
}

/// How labels are drawn at each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ProbabilityRule {
    /// `p_i ∝ y_i^(k-1)`; for monotone functions.
    Monotone,
    /// The three-branch rule for k = 3.
    KThree,
    /// The flowchart rule for k >= 3 with slack `eps`.
    GeneralK { eps: f64, tail: TailExponent },
    /// `p_i = 1/k`.
    Uniform,
}

impl ProbabilityRule {
    pub fn general(eps: f64) -> Self {
        Self::GeneralK {
            eps,
            tail: TailExponent::KMinusTwo,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProbabilityRule::Monotone => "monotone",
            ProbabilityRule::KThree => "k3",
            ProbabilityRule::GeneralK { .. } => "general",
            ProbabilityRule::Uniform => "uniform",
        }
    }

    pub fn eps(&self) -> Option<f64> {
        match self {
            ProbabilityRule::GeneralK { eps, .. } => Some(*eps),
            _ => None,
        }
    }

    /// Fails if the rule cannot run with `k` labels.
    pub fn check_compatible(&self, k: usize) -> Result<()> {
        let incompatible = |reason: &str| Error::IncompatibleRule {
            rule: self.name().to_string(),
            k,
            reason: reason.to_string(),
        };
        match self {
            ProbabilityRule::KThree if k != 3 => Err(incompatible("requires k = 3")),
            ProbabilityRule::GeneralK { eps, .. } => {
                if k < 3 {
                    return Err(incompatible("requires k >= 3"));
                }
                check_eps(k, *eps)
            }
            _ => Ok(()),
        }
    }

    /// The step distribution for marginal vector `y`, with the branch taken.
    pub fn distribution(&self, y: &MarginalVector) -> Result<(StepDistribution, Branch)> {
        match self {
            ProbabilityRule::Monotone => rule_monotone(y),
            ProbabilityRule::KThree => rule_k3(y),
            ProbabilityRule::GeneralK { eps, tail } => rules::general_with_tail(y, *eps, *tail),
            ProbabilityRule::Uniform => rule_uniform(y),
        }
    }

    /// The per-step constant `c` this rule is proved to achieve on `branch`
    /// (so the step inequality reads `f(p) <= c g(p)`), if any.
    pub fn branch_constant(&self, branch: Branch, k: usize) -> Option<f64> {
        match (self, branch) {
            (ProbabilityRule::Monotone, _) => Some(1.0 - 1.0 / k as f64),
            (ProbabilityRule::KThree, _) => Some(k3_constant()),
            (ProbabilityRule::GeneralK { tail, .. }, Branch::NegativeTail) => {
                (*tail == TailExponent::KMinusTwo).then(|| 1.0 - 1.0 / (k as f64 - 1.0))
            }
            (ProbabilityRule::GeneralK { eps, .. }, _) => Some(1.0 / (1.0 + eps)),
            (ProbabilityRule::Uniform, _) => None,
        }
    }

    /// The constant `c` covering every branch, giving ratio `1/(1+c)`.
    pub fn constant(&self, k: usize) -> Option<f64> {
        match self {
            ProbabilityRule::Monotone => Some(1.0 - 1.0 / k as f64),
            ProbabilityRule::KThree => Some(k3_constant()),
            ProbabilityRule::GeneralK { eps, .. } => {
                Some((1.0 / (1.0 + eps)).max(1.0 - 1.0 / (k as f64 - 1.0)))
            }
            ProbabilityRule::Uniform => None,
        }
    }

    /// The proved approximation ratio; the monotone rule only has one on
    /// monotone functions.
    pub fn guarantee(&self, k: usize, monotone_instance: bool) -> Option<f64> {
        if matches!(self, ProbabilityRule::Monotone) && !monotone_instance {
            return None;
        }
        if let ProbabilityRule::GeneralK { tail, .. } = self {
            if *tail == TailExponent::KMinusOne {
                return None;
            }
        }
        self.constant(k).map(|c| 1.0 / (1.0 + c))
    }
}

impl fmt::Display for ProbabilityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbabilityRule::GeneralK { eps, tail } => {
                write!(f, "general(eps={eps}")?;
                if *tail == TailExponent::KMinusOne {
                    write!(f, ", tail=k-1")?;
                }
                write!(f, ")")
            }
            other => write!(f, "{}", other.name()),
        }
    }
}

/// Parses the rule names used on the command line; `general` needs an epsilon
/// and is resolved later, so it maps to `GeneralK` with `eps = NaN`.
impl FromStr for ProbabilityRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "monotone" => Ok(Self::Monotone),
            "k3" => Ok(Self::KThree),
            "general" => Ok(Self::general(f64::NAN)),
            "uniform" => Ok(Self::Uniform),
            other => Err(format!(
                "unknown rule {other:?} (expected monotone, k3, general or uniform)"
            )),
        }
    }
}

/// `(√17 − 1) / 4`.
pub fn k3_constant() -> f64 {
    (17f64.sqrt() - 1.0) / 4.0
}

/// `(√17 − 3) / 2`, the k = 3 approximation ratio.
pub fn k3_ratio() -> f64 {
    (17f64.sqrt() - 3.0) / 2.0
}

/// `(k² + 1) / (2k² + 1)`.
pub fn general_ratio(k: usize) -> f64 {
    let k2 = (k * k) as f64;
    (k2 + 1.0) / (2.0 * k2 + 1.0)
}

/// `k / (2k − 1)`.
pub fn monotone_ratio(k: usize) -> f64 {
    k as f64 / (2.0 * k as f64 - 1.0)
}

pub(crate) fn check_eps(k: usize, eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InfeasibleEpsilon {
            k,
            eps,
            residuals: [f64::NAN; 3],
        });
    }
    let r = residuals_eps(k, eps)?;
    if r.feasible() {
        Ok(())
    } else {
        Err(Error::InfeasibleEpsilon {
            k,
            eps,
            residuals: r.as_array(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_normalizes_and_rejects() {
        let p = StepDistribution::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(p.probs(), &[0.25, 0.75]);
        assert!(StepDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(StepDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(StepDistribution::new(vec![]).is_err());
        assert!(StepDistribution::new(vec![f64::NAN, 1.0]).is_err());
        let q = StepDistribution::new(vec![1.0 + 1e-14, -1e-14]).unwrap();
        assert_eq!(q.probs()[1], 0.0);
    }

    #[test]
    fn closed_form_ratios() {
        assert!((k3_ratio() - 0.561_552_812_808_830_3).abs() < 1e-15);
        assert_eq!(general_ratio(3), 10.0 / 19.0);
        assert_eq!(general_ratio(4), 17.0 / 33.0);
        assert_eq!(general_ratio(5), 26.0 / 51.0);
        assert_eq!(monotone_ratio(3), 0.6);
        // 1 / (1 + c) for each rule's constant.
        assert!((1.0 / (1.0 + k3_constant()) - k3_ratio()).abs() < 1e-15);
        let g = ProbabilityRule::general(1.0 / 16.0).guarantee(4, false).unwrap();
        assert!((g - 17.0 / 33.0).abs() < 1e-15);
        assert_eq!(ProbabilityRule::Monotone.guarantee(3, false), None);
        assert!((ProbabilityRule::Monotone.guarantee(3, true).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn compatibility() {
        assert!(ProbabilityRule::KThree.check_compatible(3).is_ok());
        assert!(ProbabilityRule::KThree.check_compatible(4).is_err());
        assert!(ProbabilityRule::general(1.0 / 9.0).check_compatible(3).is_ok());
        assert!(ProbabilityRule::general(1.0 / 9.0).check_compatible(2).is_err());
        assert!(matches!(
            ProbabilityRule::general(1.0).check_compatible(3),
            Err(Error::InfeasibleEpsilon { .. })
        ));
        assert!(ProbabilityRule::general(f64::NAN).check_compatible(3).is_err());
    }

    #[test]
    fn parse_rule_names() {
        assert_eq!("k3".parse::<ProbabilityRule>().unwrap(), ProbabilityRule::KThree);
        assert!(matches!(
            "general".parse::<ProbabilityRule>().unwrap(),
            ProbabilityRule::GeneralK { .. }
        ));
        assert!("greedy".parse::<ProbabilityRule>().is_err());
    }
}

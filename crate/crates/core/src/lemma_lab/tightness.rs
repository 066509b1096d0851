use serde::Serialize;

use crate::error::Result;
use crate::kernel::MarginalVector;
use crate::lemma_lab::{f_of_p, g_of_p, AdversaryScenario};
use crate::solvers::{k3_constant, k3_ratio, rule_k3, StepDistribution};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    pub scenarios: [AdversaryScenario; 2],
    /// What the k = 3 rule plays on the shared `y`.
    pub p: Vec<f64>,
    pub f: [f64; 2],
    /// `c'·g` for each scenario.
    pub cg: [f64; 2],
    pub rule_is_uniform: bool,
    pub equality: bool,
    /// `f₁ + f₂ = ((1 + α)/2)(g₁ + g₂)`.
    pub averaged_identity: bool,
}

impl TightnessReport {
    pub fn holds(&self) -> bool {
        self.rule_is_uniform && self.equality && self.averaged_identity
    }
}

/// The two k = 3 scenarios on which the rule's constant is attained exactly.
pub fn tightness_witness_k3() -> Result<TightnessReport> {
    let al = k3_ratio();
    let y = vec![1.0, 1.0, al];
    let s1 = AdversaryScenario::new(vec![1.0, -al, al], y.clone(), 1)?;
    let s2 = AdversaryScenario::new(vec![-al, 1.0, al], y.clone(), 2)?;
    let (p, _) = rule_k3(&MarginalVector(y))?;
    let rule_is_uniform = p.probs().iter().all(|v| (v - 1.0 / 3.0).abs() <= 1e-12);
    let c = k3_constant();
    let f = [f_of_p(&s1, &p)?, f_of_p(&s2, &p)?];
    let g = [g_of_p(&s1, &p)?, g_of_p(&s2, &p)?];
    let cg = [c * g[0], c * g[1]];
    let equality = (0..2).all(|i| (f[i] - cg[i]).abs() <= 1e-12);
    let averaged_identity = (f[0] + f[1] - (1.0 + al) / 2.0 * (g[0] + g[1])).abs() <= 1e-12;
    Ok(TightnessReport {
        scenarios: [s1, s2],
        p: p.into_vec(),
        f,
        cg,
        rule_is_uniform,
        equality,
        averaged_identity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearchReport {
    pub c: f64,
    pub step: f64,
    /// `min over p of max(f₁ − c·g₁, f₂ − c·g₂)`.
    pub best: f64,
    pub argmin: Vec<f64>,
    /// Whether some `p` satisfies both inequalities at `c`.
    pub satisfiable: bool,
}

/// Scans the simplex on a grid of the given step for a `p` that satisfies
/// both witness inequalities with constant `c`.
pub fn tightness_grid_search(c: f64, step: f64) -> Result<GridSearchReport> {
    let witness = tightness_witness_k3()?;
    let [s1, s2] = &witness.scenarios;
    let m = (1.0 / step).round() as u64;
    let mut best = f64::INFINITY;
    let mut argmin = vec![];
    for i in 0..=m {
        for j in 0..=(m - i) {
            let p1 = i as f64 / m as f64;
            let p2 = j as f64 / m as f64;
            let p = StepDistribution::new(vec![p1, p2, (1.0 - p1 - p2).max(0.0)])?;
            let v1 = f_of_p(s1, &p)? - c * g_of_p(s1, &p)?;
            let v2 = f_of_p(s2, &p)? - c * g_of_p(s2, &p)?;
            let v = v1.max(v2);
            if v < best {
                best = v;
                argmin = p.into_vec();
            }
        }
    }
    Ok(GridSearchReport {
        c,
        step,
        best,
        argmin,
        satisfiable: best <= 0.0,
    })
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{ensure_enumerable, probe_element, Assignment};
use crate::lemma_lab::{f_of_p, g_of_p, AdversaryScenario};
use crate::oracle::{CountingOracle, OracleSpec};
use crate::solvers::{run_randomized, Branch, ElementOrder, ProbabilityRule, StepDistribution};

/// Slack for comparisons between oracle values.
const TRACE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub t: usize,
    pub element: usize,
    /// Marginals at the optimum-side solution with the element cleared.
    pub a: Vec<f64>,
    /// Marginals at the algorithm's partial solution.
    pub y: Vec<f64>,
    pub i_star: u8,
    pub i_minus: Option<u8>,
    pub p: Vec<f64>,
    pub branch: Branch,
    pub label: u8,
    pub f_p: f64,
    pub g_p: f64,
    pub c: Option<f64>,
    /// `E[f(o^(t-1)) − f(o^(t))]` over the step's label.
    pub expected_loss: f64,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub steps: Vec<TraceStep>,
    pub value: f64,
    pub reference_value: f64,
    /// The optimum-side solution after the last step equals the output.
    pub final_matches: bool,
}

impl TraceReport {
    pub fn violations(&self) -> impl Iterator<Item = (usize, &String)> {
        self.steps
            .iter()
            .flat_map(|s| s.violations.iter().map(move |v| (s.t, v)))
    }

    pub fn ok(&self) -> bool {
        self.final_matches && self.violations().next().is_none()
    }
}

/// Fills every unassigned element of `x`, in index order, with the label of
/// largest marginal (smallest label on ties). For a pairwise monotone `f` with
/// `k >= 2` the value never decreases, so an optimum stays optimal.
pub fn extend_to_full(spec: &OracleSpec, x: &Assignment) -> Result<Assignment> {
    let mut x = x.clone();
    x.check(spec.dims())?;
    let mut oracle = spec;
    for e in 0..x.len() {
        if x.get(e) != 0 {
            continue;
        }
        let y = probe_element(&mut oracle, &x, e, None)?.marginals();
        let mut best = 0;
        for (i, v) in y.values().iter().enumerate() {
            if *v > y.values()[best] {
                best = i;
            }
        }
        x.set(e, best as u8 + 1);
    }
    Ok(x)
}

/// Replays the path `run_randomized(spec, rule, seed, order)` takes and checks
/// every step against the full-support `reference`.
///
/// At step `t` on element `e`: `o^(t-1)` agrees with the output on processed
/// elements and with `reference` elsewhere; `a_i` is the marginal of `e → i`
/// at `o^(t-1)` with `e` cleared, and `y_i` the marginal at `s^(t-1)`. The
/// checks are `a <= y`, the pairwise sums of `a` and `y`, at most one negative
/// entry in each, `E[loss] <= f(p)`, and `f(p) <= c·g(p)` when the rule has a
/// constant on the branch taken.
pub fn trace_against_reference(
    spec: &OracleSpec,
    rule: ProbabilityRule,
    reference: &Assignment,
    seed: u64,
    order: ElementOrder,
) -> Result<TraceReport> {
    let dims = spec.dims();
    ensure_enumerable("trace replay", dims.k() as u64 + 1, dims.n())?;
    reference.check(dims)?;
    if reference.support_size() != dims.n() {
        return Err(Error::Precondition(format!(
            "reference {reference} must assign every element"
        )));
    }
    let mut counting = CountingOracle::new(spec);
    let run = run_randomized(&mut counting, rule, seed, order, true)?;
    let records = run.trace.expect("trace requested");

    let k = dims.k();
    let mut oracle = spec;
    let mut s = Assignment::zeros(dims.n());
    let mut o = reference.clone();
    let mut steps = Vec::with_capacity(records.len());
    for (t, rec) in records.into_iter().enumerate() {
        let e = rec.element;
        let mut violations = Vec::new();

        let y = probe_element(&mut oracle, &s, e, None)?.marginals().0;
        if y != rec.marginals {
            violations.push(format!("replayed y {y:?} differs from run {:?}", rec.marginals));
        }
        let cleared = o.with(e, 0);
        let a = probe_element(&mut oracle, &cleared, e, None)?.marginals().0;
        let i_star = o.get(e);
        let scenario = AdversaryScenario {
            i_minus: a.iter().position(|v| *v < 0.0).map(|i| i as u8 + 1),
            a: a.clone(),
            y: y.clone(),
            i_star,
        };
        if let Err(err) = scenario.check(TRACE_SLACK) {
            violations.push(err.to_string());
        }
        if a.iter().filter(|v| **v < 0.0).count() > 1 {
            violations.push(format!("several negative a: {a:?}"));
        }
        if y.iter().filter(|v| **v < 0.0).count() > 1 {
            violations.push(format!("several negative y: {y:?}"));
        }

        let p = StepDistribution::new(rec.distribution.clone())?;
        let f_p = f_of_p(&scenario, &p)?;
        let g_p = g_of_p(&scenario, &p)?;
        let star = i_star as usize - 1;
        let expected_loss: f64 = (0..k).map(|i| p.probs()[i] * (a[star] - a[i])).sum();
        if expected_loss > f_p + TRACE_SLACK {
            violations.push(format!("expected loss {expected_loss} > f(p) = {f_p}"));
        }
        let c = rule.branch_constant(rec.branch, k);
        if let Some(c) = c {
            if f_p > c * g_p + TRACE_SLACK {
                violations.push(format!("f(p) = {f_p} > c·g(p) = {}", c * g_p));
            }
        }

        s.set(e, rec.label);
        o.set(e, rec.label);
        steps.push(TraceStep {
            t: t + 1,
            element: e,
            a,
            y,
            i_star,
            i_minus: scenario.i_minus,
            p: rec.distribution,
            branch: rec.branch,
            label: rec.label,
            f_p,
            g_p,
            c,
            expected_loss,
            violations,
        });
    }
    Ok(TraceReport {
        steps,
        value: run.value,
        reference_value: spec.value(reference)?,
        final_matches: o == run.assignment && s == run.assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Dims;
    use crate::lemma_lab::ScenarioCase;
    use crate::oracle::{generate, GeneratorConfig};
    use crate::solvers::brute_force_opt;

    fn optimum(spec: &OracleSpec) -> Assignment {
        let (x, v) = brute_force_opt(spec).unwrap();
        let full = extend_to_full(spec, &x).unwrap();
        assert_eq!(spec.value(&full).unwrap(), v);
        full
    }

    #[test]
    fn nonmonotone_paths_hold() {
        let dims = Dims::new(4, 3).unwrap();
        for seed in 0..6 {
            let spec = generate(&GeneratorConfig::nonmonotone(dims), seed).unwrap();
            let o = optimum(&spec);
            for path in 0..5 {
                let r = trace_against_reference(&spec, ProbabilityRule::KThree, &o, path, ElementOrder::Given)
                    .unwrap();
                assert!(r.ok(), "{:?}", r.violations().collect::<Vec<_>>());
                assert_eq!(r.steps.len(), 4);
            }
        }
    }

    #[test]
    fn monotone_paths_only_see_the_third_case() {
        let dims = Dims::new(4, 3).unwrap();
        let spec = generate(&GeneratorConfig::monotone(dims), 5).unwrap();
        let o = optimum(&spec);
        for path in 0..5 {
            let r = trace_against_reference(&spec, ProbabilityRule::Monotone, &o, path, ElementOrder::Given)
                .unwrap();
            assert!(r.ok());
            for st in &r.steps {
                assert!(st.a.iter().all(|v| *v >= 0.0));
                let sc = AdversaryScenario {
                    a: st.a.clone(),
                    y: st.y.clone(),
                    i_star: st.i_star,
                    i_minus: st.i_minus,
                };
                assert_eq!(sc.case(), ScenarioCase::NoMinus);
            }
        }
    }

    #[test]
    fn partial_reference_is_rejected() {
        let spec = OracleSpec::unary(vec![1.0, 1.0, 1.0]).unwrap();
        let partial = Assignment::zeros(1);
        assert!(trace_against_reference(&spec, ProbabilityRule::KThree, &partial, 0, ElementOrder::Given)
            .is_err());
        let full = extend_to_full(&spec, &partial).unwrap();
        assert_eq!(full.labels(), &[1]);
    }
}

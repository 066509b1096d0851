use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{probe_element, Assignment, ValueOracle};
use crate::oracle::CountingOracle;
use crate::seed::{rng_from_seed, substream};
use crate::solvers::{descending_order, Branch, ProbabilityRule, StepDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "order", content = "seed", rename_all = "snake_case")]
pub enum ElementOrder {
    #[default]
    Given,
    Shuffled(u64),
}

impl ElementOrder {
    pub fn resolve(&self, n: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        if let ElementOrder::Shuffled(seed) = self {
            order.shuffle(&mut rng_from_seed(*seed));
        }
        order
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub element: usize,
    /// Marginals in label order.
    pub marginals: Vec<f64>,
    /// Marginals sorted descending.
    pub sorted: Vec<f64>,
    pub branch: Branch,
    pub distribution: Vec<f64>,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub assignment: Assignment,
    pub value: f64,
    pub queries: u64,
    pub trace: Option<Vec<StepRecord>>,
}

/// Draws a label (1-based) from `p` using one uniform draw.
pub(crate) fn sample_label<R: Rng>(p: &StepDistribution, rng: &mut R) -> u8 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &pi) in p.probs().iter().enumerate() {
        if pi <= 0.0 {
            continue;
        }
        acc += pi;
        last = i;
        if u < acc {
            return i as u8 + 1;
        }
    }
    last as u8 + 1
}

/// One pass of the sequential framework.
///
/// Step `t` draws from the substream `(seed, t)`. The value of the current
/// partial solution is carried over between steps, so a run costs `n·k + 1`
/// queries.
pub fn run_randomized(
    oracle: &mut CountingOracle<'_>,
    rule: ProbabilityRule,
    seed: u64,
    order: ElementOrder,
    record_trace: bool,
) -> Result<RunReport> {
    let dims = oracle.dims();
    rule.check_compatible(dims.k())?;
    let start = oracle.queries();
    let mut s = Assignment::zeros(dims.n());
    let mut value: Option<f64> = None;
    let mut trace = record_trace.then(Vec::new);
    for (t, e) in order.resolve(dims.n()).into_iter().enumerate() {
        let probe = probe_element(oracle, &s, e, value)?;
        let y = probe.marginals();
        let (p, branch) = rule.distribution(&y)?;
        let label = sample_label(&p, &mut substream(seed, t as u64));
        s.set(e, label);
        value = Some(probe.extended[label as usize - 1]);
        if let Some(trace) = trace.as_mut() {
            let order = descending_order(y.values());
            trace.push(StepRecord {
                element: e,
                sorted: order.iter().map(|&i| y.values()[i]).collect(),
                marginals: y.0,
                branch,
                distribution: p.into_vec(),
                label,
            });
        }
    }
    let value = match value {
        Some(v) => v,
        None => oracle.evaluate(&s)?,
    };
    if !value.is_finite() {
        return Err(Error::InvalidSpec(format!("oracle returned {value}")));
    }
    Ok(RunReport {
        assignment: s,
        value,
        queries: oracle.queries() - start,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Dims;
    use crate::oracle::{generate, GeneratorConfig, OracleSpec};

    #[test]
    fn constant_weights_give_value_one() {
        let spec = OracleSpec::unary(vec![1.0, 1.0, 1.0]).unwrap();
        for seed in 0..20 {
            let mut o = CountingOracle::new(&spec);
            let r = run_randomized(&mut o, ProbabilityRule::KThree, seed, ElementOrder::Given, false)
                .unwrap();
            assert_eq!(r.value, 1.0);
            assert_eq!(r.queries, 4);
        }
    }

    #[test]
    fn label_frequencies_follow_the_rule() {
        let spec = OracleSpec::unary(vec![2.0, 1.0, 1.0]).unwrap();
        let trials = 20_000;
        let mut counts = [0usize; 3];
        let mut total = 0.0;
        for seed in 0..trials {
            let mut o = CountingOracle::new(&spec);
            let r = run_randomized(&mut o, ProbabilityRule::KThree, seed, ElementOrder::Given, false)
                .unwrap();
            counts[r.assignment.get(0) as usize - 1] += 1;
            total += r.value;
        }
        let mean = total / trials as f64;
        // sd of a single draw is sqrt(0.25); 5 standard errors.
        assert!((mean - 1.5).abs() < 5.0 * 0.5 / (trials as f64).sqrt(), "{mean}");
        let f0 = counts[0] as f64 / trials as f64;
        assert!((f0 - 0.5).abs() < 0.02, "{counts:?}");
    }

    #[test]
    fn runs_are_deterministic_and_count_queries() {
        let dims = Dims::new(5, 3).unwrap();
        let spec = generate(&GeneratorConfig::nonmonotone(dims), 3).unwrap();
        let run = |seed, order| {
            let mut o = CountingOracle::new(&spec);
            run_randomized(&mut o, ProbabilityRule::KThree, seed, order, true).unwrap()
        };
        let a = run(9, ElementOrder::Given);
        assert_eq!(a, run(9, ElementOrder::Given));
        assert_eq!(a.queries, 5 * 3 + 1);
        assert_eq!(a.value, spec.value(&a.assignment).unwrap());
        let trace = a.trace.as_ref().unwrap();
        assert_eq!(trace.len(), 5);
        assert_eq!(trace.iter().map(|r| r.element).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);

        let b = run(9, ElementOrder::Shuffled(4));
        assert_eq!(b.value, spec.value(&b.assignment).unwrap());
        let mut elems: Vec<usize> = b.trace.unwrap().iter().map(|r| r.element).collect();
        elems.sort();
        assert_eq!(elems, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn incompatible_rule_is_rejected() {
        let spec = OracleSpec::unary(vec![1.0, 1.0]).unwrap();
        let mut o = CountingOracle::new(&spec);
        assert!(matches!(
            run_randomized(&mut o, ProbabilityRule::KThree, 0, ElementOrder::Given, false),
            Err(Error::IncompatibleRule { .. })
        ));
    }

    #[test]
    fn sampler_skips_zero_mass() {
        let p = StepDistribution::new(vec![0.0, 1.0, 0.0]).unwrap();
        for s in 0..100 {
            assert_eq!(sample_label(&p, &mut rng_from_seed(s)), 2);
        }
    }
}

use crate::error::Result;
use crate::kernel::{ensure_enumerable, probe_element, Assignment};
use crate::oracle::OracleSpec;
use crate::solvers::{ElementOrder, ProbabilityRule};

/// `E[f(s)]` over the rule's randomness, by depth-first branching on every
/// label with positive probability.
///
/// Leaves are summed in DFS order (labels ascending), so the result is
/// bitwise reproducible. Requires `k^n` within the enumeration guard.
pub fn exact_expected_value(
    spec: &OracleSpec,
    rule: ProbabilityRule,
    order: ElementOrder,
) -> Result<f64> {
    let dims = spec.dims();
    rule.check_compatible(dims.k())?;
    ensure_enumerable("exact expected value", dims.k() as u64, dims.n())?;
    let order = order.resolve(dims.n());
    let mut s = Assignment::zeros(dims.n());
    let base = spec.value(&s)?;
    let mut acc = 0.0;
    descend(spec, rule, &order, &mut s, base, 1.0, &mut acc)?;
    Ok(acc)
}

fn descend(
    spec: &OracleSpec,
    rule: ProbabilityRule,
    order: &[usize],
    s: &mut Assignment,
    value: f64,
    prob: f64,
    acc: &mut f64,
) -> Result<()> {
    let Some((&e, rest)) = order.split_first() else {
        *acc += prob * value;
        return Ok(());
    };
    let mut oracle = spec;
    let probe = probe_element(&mut oracle, s, e, Some(value))?;
    let (p, _) = rule.distribution(&probe.marginals())?;
    for (i, &pi) in p.probs().iter().enumerate() {
        if pi <= 0.0 {
            continue;
        }
        s.set(e, i as u8 + 1);
        descend(spec, rule, rest, s, probe.extended[i], prob * pi, acc)?;
    }
    s.set(e, 0);
    Ok(())
}

/// The lexicographically smallest maximizer over all `(k+1)^n` points.
pub fn brute_force_opt(spec: &OracleSpec) -> Result<(Assignment, f64)> {
    let dims = spec.dims();
    ensure_enumerable("brute-force optimum", dims.k() as u64 + 1, dims.n())?;
    let values = spec.tabulate()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    Ok((Assignment::from_index(dims, best as u64)?, values[best]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Dims;
    use crate::oracle::{generate, CountingOracle, GeneratorConfig};
    use crate::solvers::{epsilon_default, run_randomized};

    #[test]
    fn single_step_expectation() {
        let spec = OracleSpec::unary(vec![2.0, 1.0, 1.0]).unwrap();
        let v = exact_expected_value(&spec, ProbabilityRule::KThree, ElementOrder::Given).unwrap();
        assert!((v - 1.5).abs() < 1e-15);
    }

    #[test]
    fn constant_function() {
        let spec = OracleSpec::constant(Dims::new(3, 3).unwrap(), 2.5).unwrap();
        for rule in [
            ProbabilityRule::KThree,
            ProbabilityRule::Monotone,
            ProbabilityRule::Uniform,
            ProbabilityRule::general(1.0 / 9.0),
        ] {
            let v = exact_expected_value(&spec, rule, ElementOrder::Given).unwrap();
            assert!((v - 2.5).abs() < 1e-12, "{rule}: {v}");
        }
    }

    #[test]
    fn brute_force_examples() {
        let spec = OracleSpec::unary(vec![5.0, 3.0]).unwrap();
        let (x, v) = brute_force_opt(&spec).unwrap();
        assert_eq!(x.labels(), &[1]);
        assert_eq!(v, 5.0);

        let dims = Dims::new(4, 3).unwrap();
        let mut cfg = GeneratorConfig::monotone(dims);
        cfg.unary = 0;
        cfg.embedded = 0;
        for seed in 0..10 {
            let spec = generate(&cfg, seed).unwrap();
            let values = spec.tabulate().unwrap();
            let (_, opt) = brute_force_opt(&spec).unwrap();
            let full_max = dims
                .full_points()
                .map(|x| values[x.index(dims)])
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(full_max, opt);
        }
    }

    #[test]
    fn opt_dominates_expectation() {
        let dims = Dims::new(4, 3).unwrap();
        for seed in 0..10 {
            let spec = generate(&GeneratorConfig::nonmonotone(dims), seed).unwrap();
            let (_, opt) = brute_force_opt(&spec).unwrap();
            for rule in [
                ProbabilityRule::KThree,
                ProbabilityRule::Uniform,
                ProbabilityRule::general(epsilon_default(3).unwrap()),
            ] {
                let ev = exact_expected_value(&spec, rule, ElementOrder::Given).unwrap();
                assert!(ev <= opt + 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_matches_exact() {
        let dims = Dims::new(4, 3).unwrap();
        let spec = generate(&GeneratorConfig::nonmonotone(dims), 21).unwrap();
        let rule = ProbabilityRule::KThree;
        let exact = exact_expected_value(&spec, rule, ElementOrder::Given).unwrap();
        let trials = 100_000u64;
        let (mut sum, mut sq) = (0.0, 0.0);
        for seed in 0..trials {
            let mut o = CountingOracle::new(&spec);
            let v = run_randomized(&mut o, rule, seed, ElementOrder::Given, false).unwrap().value;
            sum += v;
            sq += v * v;
        }
        let mean = sum / trials as f64;
        let var = (sq / trials as f64 - mean * mean).max(0.0);
        let se = (var / trials as f64).sqrt();
        assert!((mean - exact).abs() <= 3.0 * se + 1e-12, "{mean} vs {exact} (se {se})");
    }

    #[test]
    fn guards() {
        let dims = Dims::new(30, 3).unwrap();
        let spec = generate(&GeneratorConfig::nonmonotone(dims), 1).unwrap();
        assert!(exact_expected_value(&spec, ProbabilityRule::KThree, ElementOrder::Given)
            .unwrap_err()
            .is_guard());
        assert!(brute_force_opt(&spec).unwrap_err().is_guard());
    }
}

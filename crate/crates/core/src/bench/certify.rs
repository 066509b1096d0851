use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::bench::output::{format_sig, opt_sig, CsvRow};
use crate::error::Result;
use crate::oracle::{generate, is_monotone, CountingOracle, GeneratorConfig, InstanceKind, OracleSpec};
use crate::seed::derive_seed;
use crate::solvers::{brute_force_opt, exact_expected_value, run_randomized, ElementOrder, ProbabilityRule};

/// Ratios may fall short of their bound by at most this much.
pub const RATIO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub instance: String,
    pub k: usize,
    pub n: usize,
    pub rule: String,
    pub eps: Option<f64>,
    pub expected: f64,
    pub opt: f64,
    /// `expected / opt`, absent when `opt = 0`.
    pub ratio: Option<f64>,
    /// The rule's proved ratio on this instance, if it has one.
    pub bound: Option<f64>,
    pub queries: u64,
    pub wall_ms: f64,
    pub passed: bool,
}

impl CsvRow for BenchRecord {
    fn header() -> Vec<&'static str> {
        vec![
            "instance", "k", "n", "rule", "eps", "expected", "opt", "ratio", "bound", "queries",
            "wall_ms", "passed",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.instance.clone(),
            self.k.to_string(),
            self.n.to_string(),
            self.rule.clone(),
            opt_sig(self.eps),
            format_sig(self.expected),
            format_sig(self.opt),
            opt_sig(self.ratio),
            opt_sig(self.bound),
            self.queries.to_string(),
            format!("{:.3}", self.wall_ms),
            self.passed.to_string(),
        ]
    }
}

/// `count` instances; instance `i` is generated from `derive_seed(master, i)`.
pub fn instance_suite(
    config: &GeneratorConfig,
    count: usize,
    master_seed: u64,
) -> Result<Vec<(String, OracleSpec)>> {
    let kind = match config.kind {
        InstanceKind::Nonmonotone => "nonmono",
        InstanceKind::Monotone => "mono",
    };
    (0..count)
        .into_par_iter()
        .map(|i| {
            let id = format!("k{}_n{}_{kind}_{i:04}", config.dims.k(), config.dims.n());
            Ok((id, generate(config, derive_seed(master_seed, i as u64))?))
        })
        .collect()
}

/// Exact expectation and optimum for every instance and rule, in input order.
pub fn certify(instances: &[(String, OracleSpec)], rules: &[ProbabilityRule]) -> Result<Vec<BenchRecord>> {
    let per_instance: Vec<Vec<BenchRecord>> = instances
        .par_iter()
        .map(|(id, spec)| certify_one(id, spec, rules))
        .collect::<Result<_>>()?;
    Ok(per_instance.into_iter().flatten().collect())
}

fn certify_one(id: &str, spec: &OracleSpec, rules: &[ProbabilityRule]) -> Result<Vec<BenchRecord>> {
    let dims = spec.dims();
    let (_, opt) = brute_force_opt(spec)?;
    let monotone = is_monotone(spec)?;
    let mut out = Vec::with_capacity(rules.len());
    for &rule in rules {
        let start = Instant::now();
        let expected = exact_expected_value(spec, rule, ElementOrder::Given)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let mut oracle = CountingOracle::new(spec);
        let queries = run_randomized(&mut oracle, rule, 0, ElementOrder::Given, false)?.queries;
        let ratio = (opt > 0.0).then(|| expected / opt);
        let bound = rule.guarantee(dims.k(), monotone);
        let passed = match (ratio, bound) {
            (Some(r), Some(b)) => r >= b - RATIO_TOL,
            _ => true,
        };
        out.push(BenchRecord {
            instance: id.to_string(),
            k: dims.k(),
            n: dims.n(),
            rule: rule.name().to_string(),
            eps: rule.eps(),
            expected,
            opt,
            ratio,
            bound,
            queries,
            wall_ms,
            passed,
        });
    }
    Ok(out)
}

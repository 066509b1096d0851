use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ksubmax_core::bench::{
    certify, format_sig, instance_suite, opt_sig, ratio_table, run_lemmas, write_csv, write_json, BenchRecord,
    CsvRow,
};
use ksubmax_core::kernel::Dims;
use ksubmax_core::lemma_lab::residuals_eps;
use ksubmax_core::oracle::{
    read_instance, validate, write_instance, BodyKind, GeneratorConfig, ValidationMethod,
    ValidationReport,
};
use ksubmax_core::solvers::{epsilon_default, epsilon_max, implied_ratio, run_randomized, StepRecord};
use ksubmax_core::{CountingOracle, ElementOrder, Error, OracleSpec, ProbabilityRule, Result};
use serde::Serialize;

use crate::{
    BodyArg, CertifyArgs, Command, EpsMode, EpsilonArgs, Format, GenerateArgs, KindArg, LemmasArgs, MethodArg,
    OrderMode, Output, RatioTableArgs, RuleArgs, RuleName, RunArgs, ValidateArgs,
};

/// Bisection tolerance for `--eps bisect`.
const BISECT_TOL: f64 = 1e-12;

pub enum Outcome {
    Pass,
    Violation,
}

impl Outcome {
    fn from_ok(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Violation
        }
    }
}

pub fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Validate(a) => validate_files(a),
        Command::Certify(a) => certify_cmd(a),
        Command::Run(a) => run(a),
        Command::Lemmas(a) => lemmas(a),
        Command::Epsilon(a) => epsilon(a),
        Command::RatioTable(a) => ratio_table_cmd(a),
    }
}

fn generator_config(k: usize, n: usize, kind: KindArg) -> Result<GeneratorConfig> {
    let dims = Dims::new(n, k)?;
    Ok(match kind {
        KindArg::Nonmonotone => GeneratorConfig::nonmonotone(dims),
        KindArg::Monotone => GeneratorConfig::monotone(dims),
    })
}

fn resolve_eps(mode: EpsMode, k: usize) -> Result<f64> {
    match mode {
        EpsMode::Default => epsilon_default(k),
        EpsMode::Bisect => epsilon_max(k, BISECT_TOL),
        EpsMode::Value(v) => Ok(v),
    }
}

fn resolve_rules(args: &RuleArgs, k: usize) -> Result<Vec<ProbabilityRule>> {
    let names = if args.rule.is_empty() {
        vec![if k == 3 { RuleName::K3 } else { RuleName::General }]
    } else {
        args.rule.clone()
    };
    names
        .into_iter()
        .map(|name| {
            let rule = match name {
                RuleName::Monotone => ProbabilityRule::Monotone,
                RuleName::K3 => ProbabilityRule::KThree,
                RuleName::General => ProbabilityRule::general(resolve_eps(args.eps, k)?),
                RuleName::Uniform => ProbabilityRule::Uniform,
            };
            rule.check_compatible(k)?;
            Ok(rule)
        })
        .collect()
}

fn sink(out: &Option<std::path::PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit<R: CsvRow + Serialize>(rows: &[R], output: &Output) -> Result<()> {
    let mut w = sink(&output.out)?;
    match output.format {
        Format::Csv => write_csv(rows, &mut w)?,
        Format::Json => write_json(rows, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn verdict_line(path: &Path, report: &ValidationReport) -> String {
    match report {
        ValidationReport::Ok => format!("{}\tok", path.display()),
        ValidationReport::Counterexample(v) => format!("{}\tcounterexample\t{v}", path.display()),
    }
}

fn generate(args: GenerateArgs) -> Result<Outcome> {
    let s = &args.suite;
    let mut config = generator_config(s.k, s.n, s.kind)?;
    config.body = match args.body {
        BodyArg::Blocks => BodyKind::Blocks,
        BodyArg::Table => BodyKind::Table,
    };
    let instances = instance_suite(&config, s.count, s.seed)?;
    fs::create_dir_all(&args.out)?;
    let mut all_ok = true;
    let mut stdout = io::stdout().lock();
    for (id, spec) in &instances {
        let path = args.out.join(format!("{id}.json"));
        write_instance(&path, spec)?;
        match validate(spec, ValidationMethod::Characterization) {
            Ok(report) => {
                all_ok &= report.is_ok();
                writeln!(stdout, "{}", verdict_line(&path, &report))?;
            }
            Err(err) if err.is_guard() => {
                writeln!(stdout, "{}\tunchecked\t{err}", path.display())?;
            }
            Err(err) => return Err(err),
        }
    }
    Ok(Outcome::from_ok(all_ok))
}

fn validate_files(args: ValidateArgs) -> Result<Outcome> {
    let method = match args.method {
        MethodArg::Direct => ValidationMethod::Direct,
        MethodArg::Characterization => ValidationMethod::Characterization,
    };
    let mut all_ok = true;
    let mut stdout = io::stdout().lock();
    for path in &args.files {
        let report = validate(&read_instance(path)?, method)?;
        all_ok &= report.is_ok();
        writeln!(stdout, "{}", verdict_line(path, &report))?;
    }
    Ok(Outcome::from_ok(all_ok))
}

fn load(files: &[std::path::PathBuf]) -> Result<Vec<(String, OracleSpec)>> {
    files
        .iter()
        .map(|p| {
            let id = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok((id, read_instance(p)?))
        })
        .collect()
}

/// Certifies instances of mixed `k`, keeping input order.
fn certify_mixed(
    instances: &[(String, OracleSpec)],
    rules_for: impl Fn(usize) -> Result<Vec<ProbabilityRule>>,
) -> Result<Vec<BenchRecord>> {
    let mut by_k: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, (_, spec)) in instances.iter().enumerate() {
        by_k.entry(spec.dims().k()).or_default().push(i);
    }
    let mut slots: Vec<Vec<BenchRecord>> = vec![Vec::new(); instances.len()];
    for (k, idx) in by_k {
        let rules = rules_for(k)?;
        let group: Vec<_> = idx.iter().map(|&i| instances[i].clone()).collect();
        let records = certify(&group, &rules)?;
        for (&i, chunk) in idx.iter().zip(records.chunks(rules.len())) {
            slots[i] = chunk.to_vec();
        }
    }
    Ok(slots.into_iter().flatten().collect())
}

fn certify_cmd(args: CertifyArgs) -> Result<Outcome> {
    let instances = if args.files.is_empty() {
        let (Some(k), Some(n)) = (args.k, args.n) else {
            return Err(Error::Precondition("certify needs instance files or both --k and --n".into()));
        };
        instance_suite(&generator_config(k, n, args.kind)?, args.count, args.seed)?
    } else {
        load(&args.files)?
    };
    let records = certify_mixed(&instances, |k| resolve_rules(&args.rules, k))?;
    emit(&records, &args.output)?;
    let failed = records.iter().filter(|r| !r.passed).count();
    eprintln!("{} records, {failed} below bound", records.len());
    Ok(Outcome::from_ok(failed == 0))
}

#[derive(Serialize)]
struct RunRow {
    instance: String,
    rule: String,
    eps: Option<f64>,
    seed: u64,
    order: String,
    value: f64,
    queries: u64,
    assignment: Vec<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<StepRecord>>,
}

impl CsvRow for RunRow {
    fn header() -> Vec<&'static str> {
        vec!["instance", "rule", "eps", "seed", "order", "value", "queries", "assignment"]
    }

    fn fields(&self) -> Vec<String> {
        let labels: Vec<String> = self.assignment.iter().map(u8::to_string).collect();
        vec![
            self.instance.clone(),
            self.rule.clone(),
            opt_sig(self.eps),
            self.seed.to_string(),
            self.order.clone(),
            format_sig(self.value),
            self.queries.to_string(),
            labels.join(" "),
        ]
    }
}

fn run(args: RunArgs) -> Result<Outcome> {
    if args.trace && args.output.format == Format::Csv {
        return Err(Error::Precondition("--trace needs --format json".into()));
    }
    let spec = read_instance(&args.file)?;
    let rules = resolve_rules(&args.rules, spec.dims().k())?;
    let [rule] = rules[..] else {
        return Err(Error::Precondition("run takes exactly one --rule".into()));
    };
    let (order, order_name) = match args.order {
        OrderMode::Given => (ElementOrder::Given, "given"),
        OrderMode::Shuffle => (ElementOrder::Shuffled(args.seed), "shuffle"),
    };
    let mut oracle = CountingOracle::new(&spec);
    let report = run_randomized(&mut oracle, rule, args.seed, order, args.trace)?;
    let row = RunRow {
        instance: args.file.display().to_string(),
        rule: rule.name().to_string(),
        eps: rule.eps(),
        seed: args.seed,
        order: order_name.into(),
        value: report.value,
        queries: report.queries,
        assignment: report.assignment.into_labels(),
        trace: report.trace,
    };
    match args.output.format {
        Format::Csv => emit(&[row], &args.output)?,
        Format::Json => {
            let mut w = sink(&args.output.out)?;
            write_json(&row, &mut w)?;
            w.flush()?;
        }
    }
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct BranchRow {
    suite: String,
    k: usize,
    rule: String,
    c: f64,
    branch: String,
    count: u64,
    min_residual: f64,
    passed: bool,
}

impl CsvRow for BranchRow {
    fn header() -> Vec<&'static str> {
        vec!["suite", "k", "rule", "c", "branch", "count", "min_residual", "passed"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.suite.clone(),
            self.k.to_string(),
            self.rule.clone(),
            format_sig(self.c),
            self.branch.clone(),
            self.count.to_string(),
            format_sig(self.min_residual),
            self.passed.to_string(),
        ]
    }
}

fn lemmas(args: LemmasArgs) -> Result<Outcome> {
    let report = run_lemmas(args.count, args.seed, args.grid_step)?;
    match args.output.format {
        Format::Json => {
            let mut w = sink(&args.output.out)?;
            write_json(&report, &mut w)?;
            w.flush()?;
        }
        Format::Csv => {
            let rows: Vec<BranchRow> = report
                .suites
                .iter()
                .flat_map(|s| {
                    s.branches.iter().map(move |(branch, stat)| BranchRow {
                        suite: s.name.clone(),
                        k: s.k,
                        rule: s.rule.clone(),
                        c: s.c,
                        branch: branch.clone(),
                        count: stat.count,
                        min_residual: stat.min_residual,
                        passed: s.passed,
                    })
                })
                .collect();
            emit(&rows, &args.output)?;
        }
    }
    for s in &report.suites {
        eprintln!(
            "{:<24} {} min residual {:.3e}",
            s.name,
            if s.passed { "PASS" } else { "FAIL" },
            s.min_residual
        );
    }
    eprintln!(
        "tightness {} / grid best {:.3e} / eps table {}",
        if report.tightness.holds() { "PASS" } else { "FAIL" },
        report.grid.best,
        if report.eps.iter().all(|r| r.feasible) { "PASS" } else { "FAIL" },
    );
    Ok(Outcome::from_ok(report.passed))
}

#[derive(Serialize)]
struct EpsCliRow {
    k: usize,
    eps: f64,
    q1: f64,
    q2: f64,
    q3: f64,
    feasible: bool,
    ratio: f64,
}

impl CsvRow for EpsCliRow {
    fn header() -> Vec<&'static str> {
        vec!["k", "eps", "q1", "q2", "q3", "feasible", "ratio"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            format_sig(self.eps),
            format_sig(self.q1),
            format_sig(self.q2),
            format_sig(self.q3),
            self.feasible.to_string(),
            format_sig(self.ratio),
        ]
    }
}

fn epsilon(args: EpsilonArgs) -> Result<Outcome> {
    let ks = match args.k {
        Some(k) => k..=k,
        None => args.k_min..=args.k_max,
    };
    let rows = ks
        .map(|k| {
            let eps = resolve_eps(args.eps, k)?;
            let r = residuals_eps(k, eps)?;
            Ok(EpsCliRow {
                k,
                eps,
                q1: r.q1,
                q2: r.q2,
                q3: r.q3,
                feasible: r.feasible(),
                ratio: implied_ratio(eps),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    emit(&rows, &args.output)?;
    Ok(Outcome::from_ok(rows.iter().all(|r| r.feasible)))
}

fn ratio_table_cmd(args: RatioTableArgs) -> Result<Outcome> {
    let instances = load(&args.files)?;
    let records = certify_mixed(&instances, |k| Ok(vec![ProbabilityRule::general(epsilon_default(k)?)]))?;
    let mut measured: BTreeMap<usize, f64> = BTreeMap::new();
    for r in &records {
        if let Some(ratio) = r.ratio {
            let m = measured.entry(r.k).or_insert(f64::INFINITY);
            *m = m.min(ratio);
        }
    }
    for k in measured.keys() {
        if !(args.k_min..=args.k_max).contains(k) {
            eprintln!("warning: measured ratios for k = {k} fall outside the table range");
        }
    }
    let rows = ratio_table(args.k_min..=args.k_max, &measured)?;
    emit(&rows, &args.output)?;
    Ok(Outcome::Pass)
}

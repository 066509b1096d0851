//! Seeded instance generation.
//!
//! Instances are nonnegative sums of blocks:
//!
//! - unary blocks with weights on the 1/64 grid; in nonmonotone instances the
//!   smallest weight is negated half of the time, which keeps `w_i + w_j >= 0`;
//! - weighted-coverage blocks, one coverage function per label over a shared
//!   universe (monotone);
//! - embedded tables on at most three elements, found by rejection sampling of
//!   small integer tables that must pass the characterization check.
//!
//! Scales are drawn from `{1/2, 1, 3/2, 2}`, so every value is dyadic and the
//! validators compare exactly. A constant offset lifts the minimum to zero.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Dims;
use crate::oracle::validate::{check_table, is_monotone, ValidationMethod};
use crate::oracle::{validate, Block, OracleSpec, ScaledBlock, MAX_EMBEDDED_SUPPORT};
use crate::seed::rng_from_seed;

/// Weights are multiples of `1 / WEIGHT_GRID`.
pub const WEIGHT_GRID: f64 = 64.0;

const EMBEDDED_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    /// Negative unary weights allowed; enumerable instances must have a
    /// negative marginal somewhere.
    Nonmonotone,
    /// Every marginal gain is nonnegative.
    Monotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    Blocks,
    /// Materialize the result as an explicit table (needs enumeration).
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub dims: Dims,
    pub kind: InstanceKind,
    pub unary: usize,
    pub coverage: usize,
    pub embedded: usize,
    /// Items in each coverage universe (at most 64).
    pub universe: usize,
    /// Largest unary / item weight, in grid units.
    pub weight_units: u32,
    pub body: BodyKind,
    pub rejection_budget: usize,
}

impl GeneratorConfig {
    pub fn nonmonotone(dims: Dims) -> Self {
        Self {
            dims,
            kind: InstanceKind::Nonmonotone,
            unary: dims.n(),
            coverage: 1,
            embedded: 1,
            universe: 6,
            weight_units: 128,
            body: BodyKind::Blocks,
            rejection_budget: 256,
        }
    }

    pub fn monotone(dims: Dims) -> Self {
        Self {
            kind: InstanceKind::Monotone,
            coverage: 2,
            ..Self::nonmonotone(dims)
        }
    }

    /// Only unary blocks.
    pub fn unary_only(dims: Dims, count: usize) -> Self {
        Self {
            unary: count,
            coverage: 0,
            embedded: 0,
            ..Self::nonmonotone(dims)
        }
    }
}

/// Builds a validated instance; deterministic in `(config, seed)`.
pub fn generate(config: &GeneratorConfig, seed: u64) -> Result<OracleSpec> {
    let dims = config.dims;
    if config.universe > crate::oracle::MAX_COVERAGE_UNIVERSE {
        return Err(Error::InvalidSpec(format!(
            "coverage universe {} exceeds {}",
            config.universe,
            crate::oracle::MAX_COVERAGE_UNIVERSE
        )));
    }
    let enumerable = dims
        .num_points()
        .is_some_and(|p| p <= crate::kernel::enumeration_guard());
    if config.body == BodyKind::Table && !enumerable {
        crate::kernel::ensure_enumerable("table body", dims.k() as u64 + 1, dims.n())?;
    }
    let mut rng = rng_from_seed(seed);

    for _ in 0..config.rejection_budget.max(1) {
        let Some(blocks) = draw_blocks(config, &mut rng)? else {
            continue;
        };
        let raw = OracleSpec::blocks(dims, 0.0, blocks.clone())?;
        let spec = if enumerable {
            let values = raw.tabulate()?;
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let offset = if lo < 0.0 { -lo } else { 0.0 };
            if hi + offset <= 0.0 {
                continue;
            }
            let spec = OracleSpec::blocks(dims, offset, blocks)?;
            match config.kind {
                InstanceKind::Nonmonotone if is_monotone(&spec)? => continue,
                InstanceKind::Monotone if !is_monotone(&spec)? => continue,
                _ => {}
            }
            if !validate(&spec, ValidationMethod::Characterization)?.is_ok() {
                continue;
            }
            spec
        } else {
            let lo = raw.lower_bound();
            OracleSpec::blocks(dims, if lo < 0.0 { -lo } else { 0.0 }, blocks)?
        };
        return match config.body {
            BodyKind::Blocks => Ok(spec),
            BodyKind::Table => spec.to_table(),
        };
    }
    Err(Error::RejectionBudget {
        seed,
        attempts: config.rejection_budget,
    })
}

fn scale(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(1..=4) as f64 / 2.0
}

fn draw_blocks(config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<Option<Vec<ScaledBlock>>> {
    let dims = config.dims;
    let (n, k) = (dims.n(), dims.k());
    let mut blocks = Vec::new();

    for u in 0..config.unary {
        // Cycle through elements so every element gets a unary term early on.
        let element = if u < n { u } else { rng.random_range(0..n) };
        let weights = unary_weights(k, config.weight_units, config.kind, rng);
        blocks.push(ScaledBlock {
            block: Block::Unary { element, weights },
            scale: scale(rng),
        });
    }

    for _ in 0..config.coverage {
        let universe = config.universe.max(1);
        let item_weights = (0..universe)
            .map(|_| rng.random_range(1..=config.weight_units.max(1)) as f64 / WEIGHT_GRID)
            .collect();
        let covers = (0..k)
            .map(|_| {
                (0..n)
                    .map(|_| (0..universe).filter(|_| rng.random_bool(0.35)).collect())
                    .collect()
            })
            .collect();
        blocks.push(ScaledBlock {
            block: Block::Coverage {
                item_weights,
                covers,
            },
            scale: scale(rng),
        });
    }

    for _ in 0..config.embedded {
        let Some(block) = embedded_table(dims, config.kind, rng)? else {
            return Ok(None);
        };
        blocks.push(ScaledBlock {
            block,
            scale: scale(rng),
        });
    }
    Ok(Some(blocks))
}

fn unary_weights(k: usize, units: u32, kind: InstanceKind, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k)
        .map(|_| rng.random_range(0..=units) as f64 / WEIGHT_GRID)
        .collect();
    if kind == InstanceKind::Nonmonotone && k >= 2 && rng.random_bool(0.5) {
        let (argmin, _) = w
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, &v)| if v < best.1 { (i, v) } else { best });
        w[argmin] = -w[argmin];
    }
    w
}

/// Integer table on a random support of at most three elements: pairwise
/// monotone unary terms, a concave increasing function of the support size,
/// optional label-conflict penalties and 0/1 noise, kept only if k-submodular.
fn embedded_table(dims: Dims, kind: InstanceKind, rng: &mut ChaCha8Rng) -> Result<Option<Block>> {
    let (n, k) = (dims.n(), dims.k());
    let max_support = n.min(MAX_EMBEDDED_SUPPORT);
    let s = rng.random_range(1..=max_support);
    let mut elements: Vec<usize> = (0..n).collect();
    elements.shuffle(rng);
    let mut support = elements[..s].to_vec();
    support.sort_unstable();
    let local = Dims::new(s, k)?;

    for _ in 0..EMBEDDED_BUDGET {
        let unaries: Vec<Vec<i64>> = (0..s)
            .map(|_| {
                let mut w: Vec<i64> = (0..k).map(|_| rng.random_range(0..=4)).collect();
                if kind == InstanceKind::Nonmonotone && k >= 2 && rng.random_bool(0.5) {
                    let m = (0..k).min_by_key(|&i| w[i]).unwrap_or(0);
                    w[m] = -w[m];
                }
                w
            })
            .collect();
        let mut steps: Vec<i64> = (0..s).map(|_| rng.random_range(0..=4)).collect();
        steps.sort_unstable_by(|a, b| b.cmp(a));
        let conflicts: Vec<i64> = if kind == InstanceKind::Nonmonotone && rng.random_bool(0.5) {
            (0..s * s).map(|_| rng.random_range(0..=2)).collect()
        } else {
            vec![0; s * s]
        };
        let values: Vec<f64> = local
            .points()
            .map(|x| {
                let labels = x.labels();
                let mut v: i64 = 0;
                for (e, &l) in labels.iter().enumerate() {
                    if l != 0 {
                        v += unaries[e][l as usize - 1];
                    }
                }
                v += steps[..x.support_size()].iter().sum::<i64>();
                for a in 0..s {
                    for b in (a + 1)..s {
                        if labels[a] != 0 && labels[b] != 0 && labels[a] != labels[b] {
                            v -= conflicts[a * s + b];
                        }
                    }
                }
                v += rng.random_range(0..=1);
                v as f64
            })
            .collect();
        if !check_table(local, &values, ValidationMethod::Characterization, false).is_ok() {
            continue;
        }
        if kind == InstanceKind::Monotone {
            let shifted: Vec<f64> = values.iter().map(|v| v - values[0]).collect();
            if !is_monotone(&OracleSpec::table(local, shifted)?)? {
                continue;
            }
        }
        return Ok(Some(Block::EmbeddedTable { support, values }));
    }
    Ok(None)
}

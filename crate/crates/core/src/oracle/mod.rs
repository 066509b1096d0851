//! Nonnegative k-submodular functions and value-oracle access.
//!
//! An [`OracleSpec`] is either an explicit table over all `(k+1)^n` points or
//! a nonnegative combination of [`Block`]s plus a constant offset. Each block
//! family is k-submodular on its own, and the defining inequalities are linear
//! in `f`, so nonnegative sums stay k-submodular.

mod generate;
mod io;
mod validate;

pub use generate::{generate, BodyKind, GeneratorConfig, InstanceKind};
pub use io::{read_instance, write_instance, FORMAT_VERSION};
pub use validate::{is_monotone, validate, ValidationMethod, ValidationReport, Violation};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{ensure_enumerable, Assignment, Dims, ValueOracle};

/// Largest support of an [`Block::EmbeddedTable`].
pub const MAX_EMBEDDED_SUPPORT: usize = 3;

/// Coverage universes are evaluated with a 64-bit mask.
pub const MAX_COVERAGE_UNIVERSE: usize = 64;

/// One k-submodular building block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum Block {
    /// `w_{x(e)}` when `e` is assigned, `0` otherwise. Weights are k-submodular
    /// exactly when `w_i + w_j >= 0` for `i != j`.
    Unary { element: usize, weights: Vec<f64> },
    /// `Σ_i g_i(X_i)` where `g_i(S)` is the weight of the items covered by
    /// `covers[i-1][e]` over `e ∈ S`.
    Coverage {
        item_weights: Vec<f64>,
        covers: Vec<Vec<Vec<usize>>>,
    },
    /// A table on `{0..=k}^support`, extended to `V` by ignoring other elements.
    EmbeddedTable { support: Vec<usize>, values: Vec<f64> },
}

impl Block {
    fn check(&self, dims: Dims) -> Result<()> {
        let (n, k) = (dims.n(), dims.k());
        match self {
            Block::Unary { element, weights } => {
                if *element >= n {
                    return Err(Error::InvalidSpec(format!(
                        "unary element {element} out of range"
                    )));
                }
                if weights.len() != k {
                    return Err(Error::InvalidSpec(format!(
                        "unary block needs {k} weights, got {}",
                        weights.len()
                    )));
                }
                finite("unary weight", weights)
            }
            Block::Coverage {
                item_weights,
                covers,
            } => {
                if item_weights.len() > MAX_COVERAGE_UNIVERSE {
                    return Err(Error::InvalidSpec(format!(
                        "coverage universe of {} items exceeds {MAX_COVERAGE_UNIVERSE}",
                        item_weights.len()
                    )));
                }
                finite("coverage item weight", item_weights)?;
                if item_weights.iter().any(|&w| w < 0.0) {
                    return Err(Error::InvalidSpec(
                        "coverage item weights must be nonnegative".into(),
                    ));
                }
                if covers.len() != k || covers.iter().any(|c| c.len() != n) {
                    return Err(Error::InvalidSpec(format!(
                        "coverage block needs a {k} x {n} cover matrix"
                    )));
                }
                let universe = item_weights.len();
                if covers.iter().flatten().flatten().any(|&u| u >= universe) {
                    return Err(Error::InvalidSpec("coverage item out of range".into()));
                }
                Ok(())
            }
            Block::EmbeddedTable { support, values } => {
                if support.len() > MAX_EMBEDDED_SUPPORT {
                    return Err(Error::InvalidSpec(format!(
                        "embedded table support {} exceeds {MAX_EMBEDDED_SUPPORT}",
                        support.len()
                    )));
                }
                if support.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidSpec(
                        "embedded table support must be strictly increasing".into(),
                    ));
                }
                if support.iter().any(|&e| e >= n) {
                    return Err(Error::InvalidSpec("embedded support out of range".into()));
                }
                let expected = (k + 1).pow(support.len() as u32);
                if values.len() != expected {
                    return Err(Error::InvalidSpec(format!(
                        "embedded table needs {expected} values, got {}",
                        values.len()
                    )));
                }
                finite("embedded table value", values)
            }
        }
    }

    /// Block value at `x`; `x` is assumed well-formed.
    pub fn value(&self, x: &Assignment, k: usize) -> f64 {
        match self {
            Block::Unary { element, weights } => match x.get(*element) {
                0 => 0.0,
                l => weights[l as usize - 1],
            },
            Block::Coverage {
                item_weights,
                covers,
            } => {
                let mut total = 0.0;
                for (label_idx, per_element) in covers.iter().enumerate() {
                    let label = label_idx as u8 + 1;
                    let mut mask = 0u64;
                    for (e, items) in per_element.iter().enumerate() {
                        if x.get(e) == label {
                            for &u in items {
                                mask |= 1 << u;
                            }
                        }
                    }
                    for (u, w) in item_weights.iter().enumerate() {
                        if mask & (1 << u) != 0 {
                            total += w;
                        }
                    }
                }
                total
            }
            Block::EmbeddedTable { support, values } => {
                let idx = support
                    .iter()
                    .fold(0usize, |acc, &e| acc * (k + 1) + x.get(e) as usize);
                values[idx]
            }
        }
    }

    /// A lower bound on the block's value over all assignments.
    fn lower_bound(&self) -> f64 {
        match self {
            Block::Unary { weights, .. } => weights.iter().copied().fold(0.0, f64::min),
            Block::Coverage { .. } => 0.0,
            Block::EmbeddedTable { values, .. } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{what} must be finite")))
    }
}

/// A block with its nonnegative multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledBlock {
    #[serde(flatten)]
    pub block: Block,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    /// Values of all `(k+1)^n` points in mixed-radix order.
    Table(Vec<f64>),
    /// `offset + Σ scale_b · block_b(x)`.
    Blocks {
        offset: f64,
        blocks: Vec<ScaledBlock>,
    },
}

/// A function on `{0..=k}^V`. Construction checks shape only; use
/// [`validate`] to certify k-submodularity and nonnegativity.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpec {
    dims: Dims,
    body: Body,
}

impl OracleSpec {
    pub fn new(dims: Dims, body: Body) -> Result<Self> {
        match &body {
            Body::Table(values) => {
                let expected = dims
                    .num_points()
                    .ok_or_else(|| Error::InvalidSpec("table too large".into()))?;
                if values.len() as u64 != expected {
                    return Err(Error::InvalidSpec(format!(
                        "table for {dims} needs {expected} values, got {}",
                        values.len()
                    )));
                }
                finite("table value", values)?;
            }
            Body::Blocks { offset, blocks } => {
                finite("offset", &[*offset])?;
                for b in blocks {
                    if !(b.scale.is_finite() && b.scale >= 0.0) {
                        return Err(Error::InvalidSpec(format!(
                            "block scale {} must be finite and nonnegative",
                            b.scale
                        )));
                    }
                    b.block.check(dims)?;
                }
            }
        }
        Ok(Self { dims, body })
    }

    pub fn table(dims: Dims, values: Vec<f64>) -> Result<Self> {
        Self::new(dims, Body::Table(values))
    }

    pub fn blocks(dims: Dims, offset: f64, blocks: Vec<ScaledBlock>) -> Result<Self> {
        Self::new(dims, Body::Blocks { offset, blocks })
    }

    /// A single unscaled unary block on element 0 of a one-element ground set.
    pub fn unary(weights: Vec<f64>) -> Result<Self> {
        let dims = Dims::new(1, weights.len())?;
        Self::blocks(
            dims,
            0.0,
            vec![ScaledBlock {
                block: Block::Unary {
                    element: 0,
                    weights,
                },
                scale: 1.0,
            }],
        )
    }

    /// The constant function `f ≡ c`.
    pub fn constant(dims: Dims, c: f64) -> Result<Self> {
        Self::blocks(dims, c, Vec::new())
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    /// `f(x)` without query accounting.
    pub fn value(&self, x: &Assignment) -> Result<f64> {
        x.check(self.dims)?;
        Ok(self.value_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: &Assignment) -> f64 {
        match &self.body {
            Body::Table(values) => values[x.index(self.dims)],
            Body::Blocks { offset, blocks } => {
                let k = self.dims.k();
                blocks
                    .iter()
                    .fold(*offset, |acc, b| acc + b.scale * b.block.value(x, k))
            }
        }
    }

    /// Values at every point in mixed-radix order, under the enumeration guard.
    pub fn tabulate(&self) -> Result<Vec<f64>> {
        ensure_enumerable("tabulation", self.dims.k() as u64 + 1, self.dims.n())?;
        match &self.body {
            Body::Table(values) => Ok(values.clone()),
            Body::Blocks { .. } => Ok(self
                .dims
                .points()
                .map(|x| self.value_unchecked(&x))
                .collect()),
        }
    }

    /// The same function as an explicit table.
    pub fn to_table(&self) -> Result<Self> {
        Ok(Self {
            dims: self.dims,
            body: Body::Table(self.tabulate()?),
        })
    }

    /// Lower bound on `f` that needs no enumeration (exact for tables).
    pub fn lower_bound(&self) -> f64 {
        match &self.body {
            Body::Table(values) => values.iter().copied().fold(f64::INFINITY, f64::min),
            Body::Blocks { offset, blocks } => blocks
                .iter()
                .fold(*offset, |acc, b| acc + b.scale * b.block.lower_bound()),
        }
    }
}

impl ValueOracle for &OracleSpec {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn evaluate(&mut self, x: &Assignment) -> Result<f64> {
        self.value(x)
    }
}

/// Query-counting access to an [`OracleSpec`].
///
/// With the memo enabled, re-querying the most recently evaluated point is
/// answered from memory and not counted.
#[derive(Debug, Clone)]
pub struct CountingOracle<'a> {
    spec: &'a OracleSpec,
    queries: u64,
    memo: Option<Option<(Assignment, f64)>>,
}

impl<'a> CountingOracle<'a> {
    pub fn new(spec: &'a OracleSpec) -> Self {
        Self {
            spec,
            queries: 0,
            memo: None,
        }
    }

    pub fn with_memo(spec: &'a OracleSpec) -> Self {
        Self {
            spec,
            queries: 0,
            memo: Some(None),
        }
    }

    pub fn spec(&self) -> &'a OracleSpec {
        self.spec
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn reset(&mut self) {
        self.queries = 0;
        if let Some(m) = self.memo.as_mut() {
            *m = None;
        }
    }
}

impl ValueOracle for CountingOracle<'_> {
    fn dims(&self) -> Dims {
        self.spec.dims
    }

    fn evaluate(&mut self, x: &Assignment) -> Result<f64> {
        if let Some(Some((last, v))) = &self.memo {
            if last == x {
                return Ok(*v);
            }
        }
        let v = self.spec.value(x)?;
        self.queries += 1;
        if let Some(m) = self.memo.as_mut() {
            *m = Some((x.clone(), v));
        }
        Ok(v)
    }
}

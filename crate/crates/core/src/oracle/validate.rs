//! Exhaustive k-submodularity checks.
//!
//! Two independent routes are provided and must agree:
//!
//! - [`ValidationMethod::Direct`] tests `f(x) + f(y) >= f(x ⊓ y) + f(x ⊔ y)` on
//!   every unordered pair of points.
//! - [`ValidationMethod::Characterization`] tests pairwise monotonicity at every
//!   `(x, e, i != j)` and orthant submodularity on single-step pairs
//!   `x ⪯ x + (e' -> j)`; longer chains follow by transitivity.
//!
//! Both then require `f >= 0`. Comparisons allow an absolute slack of
//! [`SLACK`]; generated instances use dyadic values so the slack is never
//! needed in practice.

use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::kernel::{Assignment, Dims};
use crate::oracle::OracleSpec;

pub const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationMethod {
    Direct,
    Characterization,
}

impl std::str::FromStr for ValidationMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" => Ok(Self::Direct),
            "characterization" => Ok(Self::Characterization),
            other => Err(format!("unknown validation method {other:?}")),
        }
    }
}

/// The first inequality found violated.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Negative {
        x: Assignment,
        value: f64,
    },
    PairwiseMonotonicity {
        x: Assignment,
        element: usize,
        labels: (u8, u8),
        sum: f64,
    },
    OrthantSubmodularity {
        x: Assignment,
        y: Assignment,
        element: usize,
        label: u8,
        gain_at_x: f64,
        gain_at_y: f64,
    },
    Definition {
        x: Assignment,
        y: Assignment,
        lhs: f64,
        rhs: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Negative { x, value } => write!(f, "f{x} = {value} < 0"),
            Violation::PairwiseMonotonicity {
                x,
                element,
                labels: (i, j),
                sum,
            } => write!(
                f,
                "pairwise monotonicity: Δ_{{{element},{i}}} + Δ_{{{element},{j}}} = {sum} < 0 at {x}"
            ),
            Violation::OrthantSubmodularity {
                x,
                y,
                element,
                label,
                gain_at_x,
                gain_at_y,
            } => write!(
                f,
                "orthant submodularity: Δ_{{{element},{label}}} f{x} = {gain_at_x} < Δ_{{{element},{label}}} f{y} = {gain_at_y}"
            ),
            Violation::Definition { x, y, lhs, rhs } => write!(
                f,
                "f{x} + f{y} = {lhs} < f(meet) + f(join) = {rhs}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ValidationReport {
    Ok,
    Counterexample(Violation),
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, ValidationReport::Ok)
    }
}

/// Checks `spec` exhaustively; fails only when the enumeration guard is exceeded.
pub fn validate(spec: &OracleSpec, method: ValidationMethod) -> Result<ValidationReport> {
    let values = spec.tabulate()?;
    Ok(check_table(spec.dims(), &values, method, true))
}

/// Whether every marginal gain is nonnegative (up to [`SLACK`]).
pub fn is_monotone(spec: &OracleSpec) -> Result<bool> {
    let values = spec.tabulate()?;
    let dims = spec.dims();
    let places: Vec<usize> = (0..dims.n()).map(|e| dims.place_value(e)).collect();
    for (idx, x) in dims.points().enumerate() {
        for (e, &w) in places.iter().enumerate() {
            if x.get(e) != 0 {
                continue;
            }
            for i in 1..=dims.k() {
                if values[idx + i * w] - values[idx] < -SLACK {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

pub(crate) fn check_table(
    dims: Dims,
    values: &[f64],
    method: ValidationMethod,
    require_nonnegative: bool,
) -> ValidationReport {
    let found = match method {
        ValidationMethod::Direct => direct(dims, values),
        ValidationMethod::Characterization => characterization(dims, values),
    };
    if let Some(v) = found {
        return ValidationReport::Counterexample(v);
    }
    if require_nonnegative {
        if let Some((idx, &value)) = values.iter().enumerate().find(|(_, &v)| v < -SLACK) {
            return ValidationReport::Counterexample(Violation::Negative {
                x: Assignment::from_index(dims, idx as u64).expect("index in range"),
                value,
            });
        }
    }
    ValidationReport::Ok
}

fn direct(dims: Dims, values: &[f64]) -> Option<Violation> {
    let points: Vec<Assignment> = dims.points().collect();
    let radix = dims.k() + 1;
    for (ix, x) in points.iter().enumerate() {
        for (iy, y) in points.iter().enumerate().skip(ix + 1) {
            let mut meet = 0usize;
            let mut join = 0usize;
            for (&a, &b) in x.labels().iter().zip(y.labels()) {
                let (m, j) = match (a, b) {
                    (a, b) if a == b => (a, a),
                    (0, b) => (0, b),
                    (a, 0) => (0, a),
                    _ => (0, 0),
                };
                meet = meet * radix + m as usize;
                join = join * radix + j as usize;
            }
            let lhs = values[ix] + values[iy];
            let rhs = values[meet] + values[join];
            if lhs < rhs - SLACK {
                return Some(Violation::Definition {
                    x: x.clone(),
                    y: y.clone(),
                    lhs,
                    rhs,
                });
            }
        }
    }
    None
}

fn characterization(dims: Dims, values: &[f64]) -> Option<Violation> {
    let (n, k) = (dims.n(), dims.k());
    let places: Vec<usize> = (0..n).map(|e| dims.place_value(e)).collect();
    let mut gains = vec![0.0; k];
    for (idx, x) in dims.points().enumerate() {
        for e in 0..n {
            if x.get(e) != 0 {
                continue;
            }
            for (i, g) in gains.iter_mut().enumerate() {
                *g = values[idx + (i + 1) * places[e]] - values[idx];
            }
            for i in 0..k {
                for j in (i + 1)..k {
                    let sum = gains[i] + gains[j];
                    if sum < -SLACK {
                        return Some(Violation::PairwiseMonotonicity {
                            x,
                            element: e,
                            labels: (i as u8 + 1, j as u8 + 1),
                            sum,
                        });
                    }
                }
            }
            for other in (0..n).filter(|&o| o != e && x.get(o) == 0) {
                for j in 1..=k {
                    let up = idx + j * places[other];
                    for (i, &g) in gains.iter().enumerate() {
                        let g_up = values[up + (i + 1) * places[e]] - values[up];
                        if g < g_up - SLACK {
                            return Some(Violation::OrthantSubmodularity {
                                x: x.clone(),
                                y: x.with(other, j as u8),
                                element: e,
                                label: i as u8 + 1,
                                gain_at_x: g,
                                gain_at_y: g_up,
                            });
                        }
                    }
                }
            }
        }
    }
    None
}

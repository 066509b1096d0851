//! Ground set, assignments and the k-submodular lattice.
//!
//! An [`Assignment`] is a point of `{0, 1, ..., k}^V` stored as a dense label
//! array: element indices are 0-based, labels are `1..=k` and `0` means the
//! element is unassigned. The set view `(X_1, ..., X_k)` is available through
//! [`Assignment::label_set`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable overriding the enumeration limit.
pub const GUARD_ENV: &str = "KSUBMAX_GUARD";

/// Default limit on the number of points an exhaustive routine may enumerate.
pub const DEFAULT_GUARD: u64 = 10_000_000;

/// Current enumeration limit, honouring [`GUARD_ENV`].
pub fn enumeration_guard() -> u64 {
    std::env::var(GUARD_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u64>().ok())
        .unwrap_or(DEFAULT_GUARD)
}

/// `base^exp` if it fits in a `u64`.
pub fn checked_power(base: u64, exp: usize) -> Option<u64> {
    let exp = u32::try_from(exp).ok()?;
    base.checked_pow(exp)
}

/// Fails with [`Error::GuardExceeded`] unless `base^exp` is within the guard.
pub fn ensure_enumerable(what: &str, base: u64, exp: usize) -> Result<u64> {
    let limit = enumeration_guard();
    match checked_power(base, exp) {
        Some(count) if count <= limit => Ok(count),
        Some(count) => Err(Error::GuardExceeded {
            what: what.to_string(),
            required: count.to_string(),
            limit,
        }),
        None => Err(Error::GuardExceeded {
            what: what.to_string(),
            required: format!("{base}^{exp}"),
            limit,
        }),
    }
}

/// Size of the ground set and number of labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    n: usize,
    k: usize,
}

impl Dims {
    /// Labels are stored as `u8`, so `k` is capped at 255.
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDims("ground set must be nonempty".into()));
        }
        if k == 0 {
            return Err(Error::InvalidDims("k must be at least 1".into()));
        }
        if k > u8::MAX as usize {
            return Err(Error::InvalidDims(format!("k = {k} exceeds 255")));
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `(k+1)^n`, the number of assignments, if it fits in a `u64`.
    pub fn num_points(&self) -> Option<u64> {
        checked_power(self.k as u64 + 1, self.n)
    }

    /// Mixed-radix weight of element `e`: element 0 is the most significant digit.
    pub fn place_value(&self, e: usize) -> usize {
        (self.k + 1).pow((self.n - 1 - e) as u32)
    }

    /// All assignments in mixed-radix order (element 0 most significant, radix
    /// `k+1`), which is also lexicographic order of the label arrays.
    pub fn points(&self) -> Points {
        Points {
            k: self.k as u8,
            next: Some(vec![0; self.n]),
        }
    }

    /// All assignments with every element labelled, in lexicographic order.
    pub fn full_points(&self) -> FullPoints {
        FullPoints {
            k: self.k as u8,
            next: Some(vec![1; self.n]),
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}, k={}", self.n, self.k)
    }
}

/// Iterator over every point of `{0..=k}^n`.
pub struct Points {
    k: u8,
    next: Option<Vec<u8>>,
}

impl Iterator for Points {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if odometer_step(&mut succ, 0, self.k) {
            self.next = Some(succ);
        }
        Some(Assignment { labels: current })
    }
}

/// Iterator over every point of `{1..=k}^n`.
pub struct FullPoints {
    k: u8,
    next: Option<Vec<u8>>,
}

impl Iterator for FullPoints {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if odometer_step(&mut succ, 1, self.k) {
            self.next = Some(succ);
        }
        Some(Assignment { labels: current })
    }
}

// Advances the last digit fastest; false once every digit wrapped.
fn odometer_step(digits: &mut [u8], lo: u8, hi: u8) -> bool {
    for d in digits.iter_mut().rev() {
        if *d < hi {
            *d += 1;
            return true;
        }
        *d = lo;
    }
    false
}

/// A point of `{0, 1, ..., k}^V`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    labels: Vec<u8>,
}

impl Assignment {
    /// The all-unassigned vector `0`.
    pub fn zeros(n: usize) -> Self {
        Self { labels: vec![0; n] }
    }

    pub fn new(dims: Dims, labels: Vec<u8>) -> Result<Self> {
        let x = Self { labels };
        x.check(dims)?;
        Ok(x)
    }

    /// Verifies length and label range against `dims`.
    pub fn check(&self, dims: Dims) -> Result<()> {
        if self.labels.len() != dims.n() {
            return Err(Error::DimensionMismatch {
                expected: dims.n(),
                actual: self.labels.len(),
            });
        }
        if let Some((e, &l)) = self
            .labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l as usize > dims.k())
        {
            return Err(Error::MalformedAssignment(format!(
                "element {e} has label {l} > k = {}",
                dims.k()
            )));
        }
        Ok(())
    }

    /// Inverse of [`Assignment::index`].
    pub fn from_index(dims: Dims, mut index: u64) -> Result<Self> {
        let radix = dims.k() as u64 + 1;
        let mut labels = vec![0u8; dims.n()];
        for slot in labels.iter_mut().rev() {
            *slot = (index % radix) as u8;
            index /= radix;
        }
        if index != 0 {
            return Err(Error::MalformedAssignment(
                "index out of range for dims".into(),
            ));
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<u8> {
        self.labels
    }

    pub fn get(&self, e: usize) -> u8 {
        self.labels[e]
    }

    pub fn set(&mut self, e: usize, label: u8) {
        self.labels[e] = label;
    }

    /// Copy of `self` with element `e` relabelled.
    pub fn with(&self, e: usize, label: u8) -> Self {
        let mut out = self.clone();
        out.labels[e] = label;
        out
    }

    /// Mixed-radix rank, element 0 most significant.
    pub fn index(&self, dims: Dims) -> usize {
        let radix = dims.k() + 1;
        self.labels
            .iter()
            .fold(0usize, |acc, &l| acc * radix + l as usize)
    }

    /// Number of assigned elements.
    pub fn support_size(&self) -> usize {
        self.labels.iter().filter(|&&l| l != 0).count()
    }

    /// `X_label`, the elements carrying `label`.
    pub fn label_set(&self, label: u8) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label && l != 0)
            .map(|(e, _)| e)
            .collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

fn same_len(x: &Assignment, y: &Assignment) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    Ok(())
}

/// `x ⊓ y`: keeps a label only where both agree on it.
pub fn meet(x: &Assignment, y: &Assignment) -> Result<Assignment> {
    same_len(x, y)?;
    let labels = x
        .labels
        .iter()
        .zip(&y.labels)
        .map(|(&a, &b)| if a == b { a } else { 0 })
        .collect();
    Ok(Assignment { labels })
}

/// `x ⊔ y`: union of supports, with conflicting labels cancelling to 0.
pub fn join(x: &Assignment, y: &Assignment) -> Result<Assignment> {
    same_len(x, y)?;
    let labels = x
        .labels
        .iter()
        .zip(&y.labels)
        .map(|(&a, &b)| match (a, b) {
            (0, b) => b,
            (a, 0) => a,
            (a, b) if a == b => a,
            _ => 0,
        })
        .collect();
    Ok(Assignment { labels })
}

/// The partial order `x ⪯ y`: every label of `x` is kept in `y`.
pub fn precedes(x: &Assignment, y: &Assignment) -> Result<bool> {
    same_len(x, y)?;
    Ok(x
        .labels
        .iter()
        .zip(&y.labels)
        .all(|(&a, &b)| a == 0 || a == b))
}

/// Per-label marginal gains `(Δ_{e,1} f(x), ..., Δ_{e,k} f(x))`.
///
/// Position `i` holds the gain of label `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarginalVector(pub Vec<f64>);

impl MarginalVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn negative_count(&self) -> usize {
        self.0.iter().filter(|&&v| v < 0.0).count()
    }

    /// `min_{i != j} y_i + y_j`, or `+inf` when `k < 2`.
    pub fn min_pair_sum(&self) -> f64 {
        if self.0.len() < 2 {
            return f64::INFINITY;
        }
        let mut lo = f64::INFINITY;
        let mut second = f64::INFINITY;
        for &v in &self.0 {
            if v < lo {
                second = lo;
                lo = v;
            } else if v < second {
                second = v;
            }
        }
        lo + second
    }
}

/// Anything that answers value queries on assignments.
pub trait ValueOracle {
    fn dims(&self) -> Dims;
    fn evaluate(&mut self, x: &Assignment) -> Result<f64>;
}

/// Values observed while probing one element at a fixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementProbe {
    /// `f(x)`.
    pub base: f64,
    /// `f(x with e -> i)` for `i = 1..=k`.
    pub extended: Vec<f64>,
}

impl ElementProbe {
    pub fn marginals(&self) -> MarginalVector {
        MarginalVector(self.extended.iter().map(|v| v - self.base).collect())
    }
}

/// Evaluates `f(x)` (unless `cached` supplies it) and `f(x with e -> i)` for every label.
///
/// Issues `k + 1` queries, or `k` with a cached base value.
pub fn probe_element<O: ValueOracle + ?Sized>(
    oracle: &mut O,
    x: &Assignment,
    e: usize,
    cached: Option<f64>,
) -> Result<ElementProbe> {
    let dims = oracle.dims();
    x.check(dims)?;
    if e >= dims.n() {
        return Err(Error::MalformedAssignment(format!(
            "element {e} out of range for n = {}",
            dims.n()
        )));
    }
    if x.get(e) != 0 {
        return Err(Error::ElementAssigned {
            element: e,
            label: x.get(e),
        });
    }
    let base = match cached {
        Some(v) => v,
        None => oracle.evaluate(x)?,
    };
    let mut probe = x.clone();
    let mut extended = Vec::with_capacity(dims.k());
    for label in 1..=dims.k() as u8 {
        probe.set(e, label);
        extended.push(oracle.evaluate(&probe)?);
    }
    Ok(ElementProbe { base, extended })
}

/// `(Δ_{e,1} f(x), ..., Δ_{e,k} f(x))`.
pub fn marginal_vector<O: ValueOracle + ?Sized>(
    oracle: &mut O,
    x: &Assignment,
    e: usize,
    cached: Option<f64>,
) -> Result<MarginalVector> {
    Ok(probe_element(oracle, x, e, cached)?.marginals())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a(labels: &[u8]) -> Assignment {
        Assignment {
            labels: labels.to_vec(),
        }
    }

    #[test]
    fn meet_examples() {
        assert_eq!(meet(&a(&[1, 0, 2]), &a(&[1, 2, 0])).unwrap(), a(&[1, 0, 0]));
        assert_eq!(meet(&a(&[1]), &a(&[2])).unwrap(), a(&[0]));
        let x = a(&[3, 0, 1, 2]);
        assert_eq!(meet(&x, &x).unwrap(), x);
    }

    #[test]
    fn join_examples() {
        assert_eq!(join(&a(&[1, 0, 2]), &a(&[1, 2, 0])).unwrap(), a(&[1, 2, 2]));
        assert_eq!(join(&a(&[1]), &a(&[2])).unwrap(), a(&[0]));
        let x = a(&[3, 0, 1, 2]);
        assert_eq!(join(&x, &Assignment::zeros(4)).unwrap(), x);
    }

    #[test]
    fn precedes_examples() {
        assert!(precedes(&a(&[0, 2]), &a(&[1, 2])).unwrap());
        assert!(!precedes(&a(&[1, 2]), &a(&[2, 2])).unwrap());
        assert!(precedes(&Assignment::zeros(2), &a(&[2, 1])).unwrap());
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let x = a(&[1, 0]);
        let y = a(&[1]);
        assert!(matches!(meet(&x, &y), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(join(&x, &y), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(precedes(&x, &y), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn dims_reject_degenerate_sizes() {
        assert!(Dims::new(0, 2).is_err());
        assert!(Dims::new(2, 0).is_err());
        assert!(Dims::new(2, 256).is_err());
        assert_eq!(Dims::new(3, 2).unwrap().num_points(), Some(27));
    }

    #[test]
    fn points_follow_mixed_radix_order() {
        let dims = Dims::new(3, 2).unwrap();
        let pts: Vec<_> = dims.points().collect();
        assert_eq!(pts.len(), 27);
        for (i, x) in pts.iter().enumerate() {
            assert_eq!(x.index(dims), i);
            assert_eq!(&Assignment::from_index(dims, i as u64).unwrap(), x);
        }
        assert_eq!(pts[1], a(&[0, 0, 1]));
        assert_eq!(pts[3], a(&[0, 1, 0]));
        assert_eq!(dims.full_points().count(), 8);
    }

    #[test]
    fn assignment_checks_label_range() {
        let dims = Dims::new(2, 2).unwrap();
        assert!(Assignment::new(dims, vec![0, 2]).is_ok());
        assert!(matches!(
            Assignment::new(dims, vec![0, 3]),
            Err(Error::MalformedAssignment(_))
        ));
        assert!(matches!(
            Assignment::new(dims, vec![0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(a(&[1, 0, 1, 2]).label_set(1), vec![0, 2]);
    }

    struct Unary {
        weights: Vec<f64>,
        queries: usize,
    }

    impl ValueOracle for Unary {
        fn dims(&self) -> Dims {
            Dims::new(1, self.weights.len()).unwrap()
        }
        fn evaluate(&mut self, x: &Assignment) -> Result<f64> {
            self.queries += 1;
            Ok(match x.get(0) {
                0 => 0.0,
                l => self.weights[l as usize - 1],
            })
        }
    }

    #[test]
    fn unary_marginals_equal_weights() {
        let mut u = Unary {
            weights: vec![2.0, 1.0],
            queries: 0,
        };
        let y = marginal_vector(&mut u, &Assignment::zeros(1), 0, None).unwrap();
        assert_eq!(y.values(), &[2.0, 1.0]);
        assert_eq!(u.queries, 3);
        marginal_vector(&mut u, &Assignment::zeros(1), 0, Some(0.0)).unwrap();
        assert_eq!(u.queries, 5);
    }

    #[test]
    fn probing_an_assigned_element_fails() {
        let mut u = Unary {
            weights: vec![2.0, 1.0],
            queries: 0,
        };
        let err = marginal_vector(&mut u, &a(&[1]), 0, None).unwrap_err();
        assert!(matches!(err, Error::ElementAssigned { element: 0, label: 1 }));
    }

    #[test]
    fn min_pair_sum_picks_two_smallest() {
        assert_eq!(MarginalVector(vec![3.0, -1.0, 2.0]).min_pair_sum(), 1.0);
        assert_eq!(MarginalVector(vec![1.0]).min_pair_sum(), f64::INFINITY);
    }

    fn assignment(n: usize, k: u8) -> impl Strategy<Value = Assignment> {
        proptest::collection::vec(0..=k, n).prop_map(|labels| Assignment { labels })
    }

    proptest! {
        #[test]
        fn lattice_laws(
            (x, y, z) in (1usize..6, 1u8..5).prop_flat_map(|(n, k)| {
                (assignment(n, k), assignment(n, k), assignment(n, k))
            })
        ) {
            let m = meet(&x, &y).unwrap();
            prop_assert!(precedes(&m, &x).unwrap());
            prop_assert!(precedes(&m, &y).unwrap());
            prop_assert_eq!(&m, &meet(&y, &x).unwrap());
            prop_assert_eq!(
                meet(&meet(&x, &y).unwrap(), &z).unwrap(),
                meet(&x, &meet(&y, &z).unwrap()).unwrap()
            );
            prop_assert_eq!(join(&x, &y).unwrap(), join(&y, &x).unwrap());
            prop_assert!(precedes(&m, &join(&x, &y).unwrap()).unwrap());
        }
    }
}

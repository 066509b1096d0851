use crate::error::{Error, Result};
use crate::lemma_lab::residuals_eps;

fn need_k3(k: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::Precondition(format!("epsilon needs k >= 3, got {k}")));
    }
    Ok(())
}

/// `1 / k²`.
pub fn epsilon_default(k: usize) -> Result<f64> {
    need_k3(k)?;
    Ok(1.0 / (k * k) as f64)
}

fn feasible(k: usize, eps: f64) -> Result<bool> {
    Ok(residuals_eps(k, eps)?.feasible())
}

/// The largest feasible `eps` in `(0, 1]`, to within `tol`, by bisection
/// starting from the bracket `[1/k², 1]`.
///
/// The result is feasible and `result + tol` is not (unless the result is 1).
pub fn epsilon_max(k: usize, tol: f64) -> Result<f64> {
    need_k3(k)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Precondition(format!("tol must be positive, got {tol}")));
    }
    let mut lo = epsilon_default(k)?;
    let mut hi = 1.0;
    if feasible(k, hi)? {
        return Ok(hi);
    }
    while hi - lo > tol {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(k, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `(1 + eps) / (2 + eps)`.
pub fn implied_ratio(eps: f64) -> f64 {
    (1.0 + eps) / (2.0 + eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::general_ratio;

    #[test]
    fn defaults() {
        assert_eq!(epsilon_default(3).unwrap(), 1.0 / 9.0);
        assert_eq!(epsilon_default(4).unwrap(), 1.0 / 16.0);
        assert!(epsilon_default(2).is_err());
        for k in 3..=64 {
            let r = residuals_eps(k, epsilon_default(k).unwrap()).unwrap();
            assert!(r.feasible(), "k = {k}: {r:?}");
        }
    }

    #[test]
    fn bisection_bracket() {
        let tol = 1e-9;
        for k in 3..=16 {
            let e = epsilon_max(k, tol).unwrap();
            assert!(e >= epsilon_default(k).unwrap());
            assert!(feasible(k, e).unwrap());
            assert!(!feasible(k, e + tol).unwrap(), "k = {k}");
            assert!(implied_ratio(e) >= general_ratio(k) - 1e-15);
        }
        assert!(epsilon_max(2, tol).is_err());
        assert!(epsilon_max(3, 0.0).is_err());
    }
}

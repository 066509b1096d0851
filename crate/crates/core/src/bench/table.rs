use std::collections::BTreeMap;

use serde::Serialize;

use crate::bench::output::{format_sig, opt_sig, CsvRow};
use crate::error::{Error, Result};
use crate::solvers::{epsilon_max, general_ratio, implied_ratio, k3_ratio, monotone_ratio};

/// Bisection tolerance for the `eps_hat` column.
pub const EPS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub k: usize,
    /// `k / (2k − 1)`, monotone functions.
    pub monotone: f64,
    /// The earlier `1/2` for nonmonotone functions.
    pub half: f64,
    /// `1 / (1 + max(1, √((k−1)/4)))`.
    pub ward_zivny: f64,
    /// `(k² + 1) / (2k² + 1)`.
    pub general: f64,
    /// Largest feasible `eps` found by bisection.
    pub eps_hat: f64,
    /// `(1 + eps_hat) / (2 + eps_hat)`.
    pub general_bisected: f64,
    /// `(√17 − 3) / 2`, only for k = 3.
    pub k3: Option<f64>,
    /// Smallest exact ratio measured on supplied instances.
    pub measured: Option<f64>,
}

impl CsvRow for RatioRow {
    fn header() -> Vec<&'static str> {
        vec![
            "k", "monotone", "half", "ward_zivny", "general", "eps_hat", "general_bisected", "k3",
            "measured",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.k.to_string(),
            format_sig(self.monotone),
            format_sig(self.half),
            format_sig(self.ward_zivny),
            format_sig(self.general),
            format_sig(self.eps_hat),
            format_sig(self.general_bisected),
            opt_sig(self.k3),
            opt_sig(self.measured),
        ]
    }
}

pub fn ward_zivny_ratio(k: usize) -> f64 {
    let a = ((k as f64 - 1.0) / 4.0).sqrt().max(1.0);
    1.0 / (1.0 + a)
}

/// One row per `k` in `ks`, which must lie in `3..=64`.
pub fn ratio_table(ks: impl IntoIterator<Item = usize>, measured: &BTreeMap<usize, f64>) -> Result<Vec<RatioRow>> {
    ks.into_iter()
        .map(|k| {
            if !(3..=64).contains(&k) {
                return Err(Error::Precondition(format!("ratio table needs 3 <= k <= 64, got {k}")));
            }
            let eps_hat = epsilon_max(k, EPS_TOL)?;
            Ok(RatioRow {
                k,
                monotone: monotone_ratio(k),
                half: 0.5,
                ward_zivny: ward_zivny_ratio(k),
                general: general_ratio(k),
                eps_hat,
                general_bisected: implied_ratio(eps_hat),
                k3: (k == 3).then(k3_ratio),
                measured: measured.get(&k).copied(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_match_closed_forms() {
        let rows = ratio_table(3..=64, &BTreeMap::from([(3, 0.9)])).unwrap();
        assert!((rows[0].general - 10.0 / 19.0).abs() < 1e-15);
        assert!((rows[0].k3.unwrap() - 0.561553).abs() < 1e-6);
        assert_eq!(rows[0].measured, Some(0.9));
        assert_eq!(rows[1].k3, None);
        assert_eq!(rows[2].ward_zivny, 0.5);
        for w in rows.windows(2) {
            assert!(w[0].general > w[1].general);
        }
        for r in &rows {
            assert!(r.general > 0.5);
            assert!(r.general_bisected >= r.general);
        }
        assert!(ratio_table([2], &BTreeMap::new()).is_err());
    }
}

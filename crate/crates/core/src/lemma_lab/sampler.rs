use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lemma_lab::AdversaryScenario;
use crate::seed::rng_from_seed;

/// Grid step of the dyadic sampler.
const UNIT: f64 = 1.0 / 64.0;
/// Largest magnitude drawn.
const BOUND: f64 = 2.0;

/// Whether `a` has a negative entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Negative,
    Nonnegative,
}

/// Shape of the `y` vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YProfile {
    /// Nonnegative draws whose minimum is negated half of the time.
    Any,
    /// Every entry positive. Half of the draws are clustered near a common
    /// value so that the deeper flowchart levels are visited.
    AllPositive,
    /// The minimum is nonpositive.
    NonpositiveMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    /// Multiples of 1/64 in [-2, 2]; constraint checks are exact.
    Dyadic,
    /// Uniform reals in the same range.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerOptions {
    pub profile: YProfile,
    pub grid: Grid,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            profile: YProfile::Any,
            grid: Grid::Dyadic,
        }
    }
}

struct Draw {
    rng: ChaCha8Rng,
    grid: Grid,
}

impl Draw {
    /// A value in `[lo, hi]`; on the dyadic grid both ends must be multiples of the unit.
    fn between(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo <= hi, "{lo} > {hi}");
        match self.grid {
            Grid::Dyadic => {
                let (a, b) = ((lo / UNIT).round() as i64, (hi / UNIT).round() as i64);
                self.rng.random_range(a..=b) as f64 * UNIT
            }
            Grid::Continuous => (lo + (hi - lo) * self.rng.random::<f64>()).clamp(lo, hi),
        }
    }

    fn smallest_positive(&self) -> f64 {
        match self.grid {
            Grid::Dyadic => UNIT,
            Grid::Continuous => 1e-9,
        }
    }

    fn coin(&mut self) -> bool {
        self.rng.random_bool(0.5)
    }
}

/// Index of the smallest entry (first on ties).
fn argmin(v: &[f64]) -> usize {
    let mut m = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[m] {
            m = i;
        }
    }
    m
}

fn min_except(v: &[f64], skip: usize) -> f64 {
    v.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .map(|(_, x)| *x)
        .fold(f64::INFINITY, f64::min)
}

/// Draws a scenario satisfying all step constraints, without rejection.
///
/// `y` is drawn nonnegative and its minimum may then be negated down to minus
/// the second smallest entry. `a` is drawn below `y` the same way: in the
/// negative category one entry becomes `-u` and every other entry is drawn
/// from `[u, y_i]`. `i*` is uniform and independent of `a` and `y`.
pub fn sample_scenario(
    k: usize,
    seed: u64,
    category: Category,
    options: SamplerOptions,
) -> Result<AdversaryScenario> {
    if k < 2 {
        return Err(Error::Precondition(format!("scenarios need k >= 2, got {k}")));
    }
    let mut d = Draw {
        rng: rng_from_seed(seed),
        grid: options.grid,
    };
    let tiny = d.smallest_positive();

    let mut y: Vec<f64> = match options.profile {
        YProfile::AllPositive if d.coin() => {
            let centre = d.between(0.5, BOUND);
            let spread = d.between(0.0, 0.25);
            (0..k).map(|_| d.between((centre - spread).max(tiny), centre)).collect()
        }
        YProfile::AllPositive => (0..k).map(|_| d.between(tiny, BOUND)).collect(),
        _ => (0..k).map(|_| d.between(0.0, BOUND)).collect(),
    };
    let negate = match options.profile {
        YProfile::Any => d.coin(),
        YProfile::AllPositive => false,
        YProfile::NonpositiveMin => true,
    };
    if negate && category == Category::Negative {
        let m = argmin(&y);
        let second = min_except(&y, m);
        y[m] = -d.between(0.0, second);
    } else if negate {
        // a <= y would force a negative entry in a; the nonnegative category keeps y_min at 0.
        let m = argmin(&y);
        y[m] = 0.0;
    }

    let mut a = vec![0.0; k];
    match category {
        Category::Nonnegative => {
            for i in 0..k {
                a[i] = d.between(0.0, y[i].max(0.0));
            }
        }
        Category::Negative => {
            let m = if negate || y.iter().any(|v| *v < 0.0) {
                argmin(&y)
            } else {
                d.rng.random_range(0..k)
            };
            let lo = (-y[m]).max(tiny);
            for (i, v) in y.iter_mut().enumerate() {
                if i != m && *v < lo {
                    *v = lo;
                }
            }
            let u = d.between(lo, min_except(&y, m));
            for i in 0..k {
                a[i] = if i == m { -u } else { d.between(u, y[i]) };
            }
        }
    }
    let i_star = d.rng.random_range(1..=k as u8);
    let s = AdversaryScenario::new(a, y, i_star)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lemma_lab::ScenarioCase;
    use std::collections::BTreeSet;

    fn opts(profile: YProfile, grid: Grid) -> SamplerOptions {
        SamplerOptions { profile, grid }
    }

    #[test]
    fn samples_satisfy_constraints() {
        for k in 2..=6 {
            for seed in 0..2000 {
                for cat in [Category::Negative, Category::Nonnegative] {
                    for profile in [YProfile::Any, YProfile::AllPositive, YProfile::NonpositiveMin] {
                        let s = sample_scenario(k, seed, cat, opts(profile, Grid::Dyadic)).unwrap();
                        s.check(0.0).unwrap();
                        assert!(s.a.iter().chain(&s.y).all(|v| v.abs() <= BOUND));
                        assert!(s.a.iter().chain(&s.y).all(|v| (v * 64.0).fract() == 0.0));
                        match cat {
                            Category::Negative => assert!(s.i_minus.is_some()),
                            Category::Nonnegative => {
                                assert!(s.i_minus.is_none());
                                assert!(s.a.iter().all(|v| *v >= 0.0));
                            }
                        }
                        match profile {
                            YProfile::AllPositive => assert!(s.y.iter().all(|v| *v > 0.0)),
                            YProfile::NonpositiveMin => {
                                assert!(s.y.iter().any(|v| *v <= 0.0))
                            }
                            YProfile::Any => {}
                        }
                        let c = sample_scenario(k, seed, cat, opts(profile, Grid::Continuous))
                            .unwrap();
                        c.check(super::super::CONTINUOUS_SLACK).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let o = SamplerOptions::default();
        assert_eq!(
            sample_scenario(4, 5, Category::Negative, o).unwrap(),
            sample_scenario(4, 5, Category::Negative, o).unwrap()
        );
        assert!(sample_scenario(1, 5, Category::Negative, o).is_err());
    }

    #[test]
    fn all_cases_occur() {
        let mut seen = BTreeSet::new();
        for seed in 0..10_000u64 {
            let cat = if seed % 2 == 0 { Category::Negative } else { Category::Nonnegative };
            seen.insert(sample_scenario(3, seed, cat, SamplerOptions::default()).unwrap().case());
        }
        assert_eq!(
            seen,
            BTreeSet::from([ScenarioCase::MinusIsStar, ScenarioCase::MinusNotStar, ScenarioCase::NoMinus])
        );
    }
}

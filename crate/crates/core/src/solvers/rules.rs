use crate::error::{Error, Result};
use crate::kernel::MarginalVector;
use crate::solvers::{check_eps, Branch, StepDistribution, TailExponent};

/// Label positions sorted by descending value; ties keep index order.
pub fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order
}

fn sorted(y: &MarginalVector) -> (Vec<usize>, Vec<f64>) {
    let order = descending_order(y.values());
    let ys = order.iter().map(|&i| y.values()[i]).collect();
    (order, ys)
}

fn check_finite(y: &MarginalVector) -> Result<()> {
    if y.k() == 0 || y.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition(format!(
            "marginal vector must be nonempty and finite: {:?}",
            y.values()
        )));
    }
    Ok(())
}

/// `p_i ∝ max(y_i, 0)^(k-1)`, or label 1 when every weight is zero.
pub fn rule_monotone(y: &MarginalVector) -> Result<(StepDistribution, Branch)> {
    check_finite(y)?;
    let k = y.k();
    let weights: Vec<f64> = y
        .values()
        .iter()
        .map(|v| v.max(0.0).powi(k as i32 - 1))
        .collect();
    let beta: f64 = weights.iter().sum();
    if beta > 0.0 {
        let p = weights.iter().map(|w| w / beta).collect();
        Ok((StepDistribution::new(p)?, Branch::MonotoneWeighted))
    } else {
        Ok((StepDistribution::point_mass(k, 0), Branch::MonotoneFallback))
    }
}

pub fn rule_uniform(y: &MarginalVector) -> Result<(StepDistribution, Branch)> {
    check_finite(y)?;
    let k = y.k();
    Ok((StepDistribution::new(vec![1.0 / k as f64; k])?, Branch::Uniform))
}

pub fn rule_k3(y: &MarginalVector) -> Result<(StepDistribution, Branch)> {
    check_finite(y)?;
    if y.k() != 3 {
        return Err(Error::IncompatibleRule {
            rule: "k3".into(),
            k: y.k(),
            reason: "requires k = 3".into(),
        });
    }
    let (order, ys) = sorted(y);
    if ys[0] <= 0.0 {
        return Ok((StepDistribution::point_mass(3, order[0]), Branch::Degenerate));
    }
    let b = ys[1] / ys[0];
    let g = ys[2] / ys[0];
    let (p, branch) = if g <= 0.0 {
        (vec![1.0 / (1.0 + b), b / (1.0 + b), 0.0], Branch::K3NonPositive)
    } else {
        // Evaluated in this order; at y = (1, 1, (√17-3)/2) it rounds to exactly 0.
        let delta = (1.0 - b - g) / 2.0 + b / (1.0 + g) - g / (b + g);
        if delta > 0.0 {
            let d = 1.0 + b + 2.0 * g;
            (vec![(1.0 + g) / d, (b + g) / d, 0.0], Branch::K3TopTwo)
        } else {
            let d = 2.0 + b + 3.0 * g;
            (
                vec![(2.0 - b + g) / d, (b + g) / d, (b + g) / d],
                Branch::K3AllThree,
            )
        }
    };
    Ok((StepDistribution::unsort(p, &order)?, branch))
}

/// The flowchart level for a descending, all-positive `y`.
pub fn flowchart_l(y_sorted: &[f64], eps: f64) -> Result<usize> {
    let k = y_sorted.len();
    if k < 3 {
        return Err(Error::Precondition(format!("flowchart needs k >= 3, got {k}")));
    }
    if y_sorted.windows(2).any(|w| !(w[0] >= w[1])) || !(y_sorted[k - 1] > 0.0) {
        return Err(Error::Precondition(format!(
            "flowchart needs y sorted descending with y_k > 0: {y_sorted:?}"
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Precondition(format!("eps must be positive, got {eps}")));
    }
    let (y1, y2) = (y_sorted[0], y_sorted[1]);
    let kf = k as f64;
    if y_sorted[k - 1] > (y2 - eps * y1) / (1.0 + eps) {
        return Ok(if y2 <= y1 * (kf - 1.0) / (2.0 * (kf - 2.0)) { 0 } else { 1 });
    }
    let mut l = 2;
    let mut prefix = y1 + y2;
    while l < k && y_sorted[l] > prefix / (l as f64 * (1.0 + eps)) {
        prefix += y_sorted[l];
        l += 1;
    }
    Ok(l)
}

pub fn rule_general(y: &MarginalVector, eps: f64) -> Result<(StepDistribution, Branch)> {
    general_with_tail(y, eps, TailExponent::KMinusTwo)
}

pub(crate) fn general_with_tail(
    y: &MarginalVector,
    eps: f64,
    tail: TailExponent,
) -> Result<(StepDistribution, Branch)> {
    check_finite(y)?;
    let k = y.k();
    if k < 3 {
        return Err(Error::IncompatibleRule {
            rule: "general".into(),
            k,
            reason: "requires k >= 3".into(),
        });
    }
    check_eps(k, eps)?;
    let (order, ys) = sorted(y);
    if ys[0] <= 0.0 {
        return Ok((StepDistribution::point_mass(k, order[0]), Branch::Degenerate));
    }
    let kf = k as f64;
    if ys[k - 1] <= 0.0 {
        let exp = match tail {
            TailExponent::KMinusTwo => k - 2,
            TailExponent::KMinusOne => k - 1,
        } as i32;
        let mut p: Vec<f64> = ys[..k - 1].iter().map(|v| v.max(0.0).powi(exp)).collect();
        let beta: f64 = p.iter().sum();
        for v in p.iter_mut() {
            *v /= beta;
        }
        p.push(0.0);
        return Ok((StepDistribution::unsort(p, &order)?, Branch::NegativeTail));
    }
    let l = flowchart_l(&ys, eps)?;
    let b = ys[1] / ys[0];
    let p = match l {
        0 => {
            let rest = 2.0 * b / ((kf - 1.0) * (1.0 + 2.0 * b));
            let mut p = vec![rest; k];
            p[0] = 1.0 - 2.0 * b / (1.0 + 2.0 * b);
            p
        }
        1 => {
            let rest = b / ((kf - 1.0) + b);
            let mut p = vec![rest; k];
            p[0] = 1.0 - (kf - 1.0) * b / ((kf - 1.0) + b);
            p
        }
        l => (0..k).map(|i| if i < l { 1.0 / l as f64 } else { 0.0 }).collect(),
    };
    Ok((StepDistribution::unsort(p, &order)?, Branch::Level(l)))
}

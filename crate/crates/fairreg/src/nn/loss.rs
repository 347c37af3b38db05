//! Scalar losses and their gradients with respect to the model output.
//!
//! All three return `(value, grad)` where `grad` has one entry per sample,
//! already scaled so that summing parameter gradients over the batch yields
//! the gradient of the batch-mean loss.

use crate::error::{Error, Result};
use crate::linalg::RealVector;

/// Predictions are clamped into `[BCE_EPS, 1 - BCE_EPS]` before the log.
pub const BCE_EPS: f64 = 1e-7;

/// Mean squared error: `(1/n) Σ (pred - target)^2`, gradient `(2/n)(pred - target)`.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<(f64, RealVector)> {
    if pred.is_empty() {
        return Err(Error::Domain("mse_loss: empty input".into()));
    }
    if pred.len() != target.len() {
        return Err(Error::Shape(format!(
            "mse_loss: {} predictions vs {} targets",
            pred.len(),
            target.len()
        )));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(pred.len());
    for (&p, &t) in pred.iter().zip(target) {
        let d = p - t;
        loss += d * d;
        grad.push(2.0 * d / n);
    }
    Ok((loss / n, grad))
}

/// Binary cross-entropy in nats against labels in `{0, 1}`.
///
/// `-(1/n) Σ [a ln p + (1-a) ln(1-p)]`; the returned gradient is with
/// respect to the (clamped) predictions.
pub fn bce_loss(pred: &[f64], labels: &[f64]) -> Result<(f64, RealVector)> {
    if pred.is_empty() {
        return Err(Error::Domain("bce_loss: empty input".into()));
    }
    if pred.len() != labels.len() {
        return Err(Error::Shape(format!(
            "bce_loss: {} predictions vs {} labels",
            pred.len(),
            labels.len()
        )));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(pred.len());
    for (&p, &a) in pred.iter().zip(labels) {
        let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
        loss -= a * p.ln() + (1.0 - a) * (1.0 - p).ln();
        grad.push((p - a) / (p * (1.0 - p) * n));
    }
    Ok((loss / n, grad))
}

/// Group-mean difference used as the Wasserstein critic objective:
/// `|mean(out | group 0) - mean(out | group 1)|`.
///
/// Returns `Ok(None)` when the batch contains a single group; the caller
/// skips the penalty for that step. The gradient is the subgradient of the
/// absolute difference with respect to each critic output.
pub fn wasserstein_penalty(
    critic_out: &[f64],
    groups: &[u8],
) -> Result<Option<(f64, RealVector)>> {
    if critic_out.len() != groups.len() {
        return Err(Error::Shape(format!(
            "wasserstein_penalty: {} outputs vs {} groups",
            critic_out.len(),
            groups.len()
        )));
    }
    let mut sum = [0.0f64; 2];
    let mut count = [0usize; 2];
    for (&v, &g) in critic_out.iter().zip(groups) {
        if g > 1 {
            return Err(Error::Domain("group labels must be 0 or 1".into()));
        }
        sum[g as usize] += v;
        count[g as usize] += 1;
    }
    if count[0] == 0 || count[1] == 0 {
        return Ok(None);
    }
    let mean0 = sum[0] / count[0] as f64;
    let mean1 = sum[1] / count[1] as f64;
    let diff = mean1 - mean0;
    // sign of d|diff|/d(diff); 0 at the kink
    let sign = if diff > 0.0 {
        1.0
    } else if diff < 0.0 {
        -1.0
    } else {
        0.0
    };
    let grad = groups
        .iter()
        .map(|&g| {
            if g == 1 {
                sign / count[1] as f64
            } else {
                -sign / count[0] as f64
            }
        })
        .collect();
    Ok(Some((diff.abs(), grad)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        let (zero, _) = mse_loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(zero, 0.0);
        let (five, _) = mse_loss(&[0.0, 0.0], &[1.0, 3.0]).unwrap();
        assert_eq!(five, 5.0);
        let (four, grad) = mse_loss(&[2.0], &[0.0]).unwrap();
        assert_eq!(four, 4.0);
        assert_eq!(grad, vec![4.0]);
        assert!(mse_loss(&[], &[]).is_err());
    }

    #[test]
    fn mse_is_nonnegative_and_zero_iff_equal() {
        let (l, _) = mse_loss(&[0.1, 0.2], &[0.1, 0.2000001]).unwrap();
        assert!(l > 0.0);
    }

    #[test]
    fn bce_examples() {
        let (ln2, _) = bce_loss(&[0.5, 0.5, 0.5], &[1.0, 0.0, 1.0]).unwrap();
        assert!((ln2 - std::f64::consts::LN_2).abs() < 1e-12);

        let (near_zero, _) = bce_loss(&[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!(near_zero >= 0.0 && near_zero < 1e-6);

        let (two_three, _) = bce_loss(&[0.9], &[0.0]).unwrap();
        assert!((two_three - (-(0.1f64).ln())).abs() < 1e-12);
    }

    #[test]
    fn bce_gradient_matches_finite_differences() {
        let labels = [1.0, 0.0, 1.0];
        let pred = [0.3, 0.6, 0.8];
        let (_, grad) = bce_loss(&pred, &labels).unwrap();
        let step = 1e-7;
        for i in 0..pred.len() {
            let mut up = pred;
            up[i] += step;
            let mut down = pred;
            down[i] -= step;
            let fd = (bce_loss(&up, &labels).unwrap().0 - bce_loss(&down, &labels).unwrap().0)
                / (2.0 * step);
            assert!((fd - grad[i]).abs() < 1e-5, "i={i} fd={fd} grad={}", grad[i]);
        }
    }

    #[test]
    fn penalty_examples() {
        let (v, _) = wasserstein_penalty(&[1.0, 1.0, 3.0, 3.0], &[0, 0, 1, 1])
            .unwrap()
            .unwrap();
        assert_eq!(v, 2.0);

        let (z, _) = wasserstein_penalty(&[2.0, 2.0], &[0, 1]).unwrap().unwrap();
        assert_eq!(z, 0.0);

        let (v, grad) = wasserstein_penalty(&[0.0, 4.0], &[0, 1]).unwrap().unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(grad, vec![-1.0, 1.0]);
    }

    #[test]
    fn penalty_skips_single_group_batches() {
        assert!(wasserstein_penalty(&[1.0, 2.0], &[0, 0]).unwrap().is_none());
        assert!(wasserstein_penalty(&[1.0], &[1]).unwrap().is_none());
    }
}

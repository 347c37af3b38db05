//! Group-conditional evaluation metrics and one-dimensional statistical
//! distances between empirical distributions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::RealVector;

/// Default histogram resolution for total-variation estimates.
pub const DEFAULT_TV_BINS: usize = 50;

/// Predictions, targets, and binary group labels for one evaluated sample.
#[derive(Debug, Clone)]
pub struct GroupedPredictions {
    pred: RealVector,
    target: RealVector,
    group: Vec<u8>,
}

impl GroupedPredictions {
    pub fn new(pred: RealVector, target: RealVector, group: Vec<u8>) -> Result<Self> {
        if pred.len() != target.len() || pred.len() != group.len() {
            return Err(Error::Shape(format!(
                "grouped predictions: lengths {}, {}, {} differ",
                pred.len(),
                target.len(),
                group.len()
            )));
        }
        if pred.is_empty() {
            return Err(Error::Domain("grouped predictions: empty sample".into()));
        }
        if group.iter().any(|&g| g > 1) {
            return Err(Error::Domain("group labels must be 0 or 1".into()));
        }
        Ok(GroupedPredictions { pred, target, group })
    }

    pub fn len(&self) -> usize {
        self.pred.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pred.is_empty()
    }

    pub fn pred(&self) -> &[f64] {
        &self.pred
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn group(&self) -> &[u8] {
        &self.group
    }

    /// Indices of samples in group `a`.
    fn members(&self, a: u8) -> Vec<usize> {
        self.group
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == a)
            .map(|(i, _)| i)
            .collect()
    }

    /// Predictions of group `a`.
    pub fn group_pred(&self, a: u8) -> RealVector {
        self.members(a).iter().map(|&i| self.pred[i]).collect()
    }

    /// Targets of group `a`.
    pub fn group_target(&self, a: u8) -> RealVector {
        self.members(a).iter().map(|&i| self.target[i]).collect()
    }

    /// Fraction of samples in group 0.
    pub fn alpha(&self) -> f64 {
        let n0 = self.group.iter().filter(|&&g| g == 0).count();
        n0 as f64 / self.len() as f64
    }
}

/// Everything `evaluate` reports for one model/dataset pair.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    /// Mean squared error conditioned on group 0.
    pub err0: f64,
    /// Mean squared error conditioned on group 1.
    pub err1: f64,
    /// `|err0 - err1|`.
    pub err_gap: f64,
    pub r2: f64,
    /// Threshold-0.5 accuracy; only present when the targets are binary.
    pub accuracy: Option<f64>,
    /// Wasserstein-1 distance between the group label distributions.
    pub w1_labels: f64,
    /// Wasserstein-1 distance between the group prediction distributions.
    pub w1_preds: f64,
    /// Total-variation estimate between the group label distributions.
    pub tv_labels: f64,
}

/// Mean squared error over the samples with group label `a`.
pub fn group_error(gp: &GroupedPredictions, a: u8) -> Result<f64> {
    let idx = gp.members(a);
    if idx.is_empty() {
        return Err(Error::Domain(format!("group {a} is empty")));
    }
    let sse: f64 = idx
        .iter()
        .map(|&i| {
            let d = gp.pred[i] - gp.target[i];
            d * d
        })
        .sum();
    Ok(sse / idx.len() as f64)
}

/// Absolute difference of the two group-conditional errors.
pub fn error_gap(gp: &GroupedPredictions) -> Result<f64> {
    Ok((group_error(gp, 0)? - group_error(gp, 1)?).abs())
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2_score(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::Shape("r2_score: length mismatch".into()));
    }
    if target.len() < 2 {
        return Err(Error::Domain("r2_score: need at least 2 samples".into()));
    }
    if target.iter().all(|&t| t == target[0]) {
        return Err(Error::Domain("r2_score: constant target".into()));
    }
    let mean = target.iter().sum::<f64>() / target.len() as f64;
    let ss_tot: f64 = target.iter().map(|&t| (t - mean) * (t - mean)).sum();
    let ss_res: f64 = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Fraction of samples where thresholding the prediction at 0.5 recovers
/// the binary target.
pub fn binary_accuracy(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::Shape("binary_accuracy: length mismatch".into()));
    }
    if pred.is_empty() {
        return Err(Error::Domain("binary_accuracy: empty input".into()));
    }
    let hits = pred
        .iter()
        .zip(target)
        .filter(|(&p, &t)| (p >= 0.5) == (t == 1.0))
        .count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Exact Wasserstein-1 distance between two empirical distributions on the
/// real line.
///
/// Integrates `|F_p^{-1}(u) - F_q^{-1}(u)|` over `u in (0,1)` by walking the
/// merged breakpoints of the two empirical quantile functions, which is
/// exact for unequal sample counts. Breakpoint comparisons are done in
/// integer cross-multiplied form so ties advance both sides.
pub fn wasserstein1d_exact(samples_p: &[f64], samples_q: &[f64]) -> Result<f64> {
    if samples_p.is_empty() || samples_q.is_empty() {
        return Err(Error::Domain("wasserstein1d_exact: empty sample".into()));
    }
    let mut p = samples_p.to_vec();
    let mut q = samples_q.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    q.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let (n, m) = (p.len() as u64, q.len() as u64);

    let mut total = 0.0;
    let mut i = 0u64; // next breakpoint of p is (i+1)/n
    let mut j = 0u64;
    let mut u = 0.0f64;
    while i < n && j < m {
        // segment upper end: min((i+1)/n, (j+1)/m), compared exactly
        let lhs = (i + 1) * m;
        let rhs = (j + 1) * n;
        let next_u = if lhs <= rhs {
            (i + 1) as f64 / n as f64
        } else {
            (j + 1) as f64 / m as f64
        };
        total += (p[i as usize] - q[j as usize]).abs() * (next_u - u);
        if lhs <= rhs {
            i += 1;
        }
        if rhs <= lhs {
            j += 1;
        }
        u = next_u;
    }
    Ok(total)
}

/// Histogram estimate of the total-variation distance `½ Σ |p̂ - q̂|`.
///
/// When the pooled samples take at most `bins` distinct values the bins are
/// aligned to those values and the estimate is exact for the empirical
/// distributions; otherwise `bins` equal-width bins span the pooled range.
pub fn tv_histogram(samples_p: &[f64], samples_q: &[f64], bins: usize) -> Result<f64> {
    if samples_p.is_empty() || samples_q.is_empty() {
        return Err(Error::Domain("tv_histogram: empty sample".into()));
    }
    if bins == 0 {
        return Err(Error::Domain("tv_histogram: bins must be >= 1".into()));
    }
    let mut pooled: Vec<f64> = samples_p.iter().chain(samples_q).copied().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    pooled.dedup();

    let (p_counts, q_counts) = if pooled.len() <= bins {
        // discrete mode: one bin per distinct value
        let index = |v: f64| pooled.binary_search_by(|x| x.partial_cmp(&v).unwrap()).unwrap();
        let mut pc = vec![0usize; pooled.len()];
        let mut qc = vec![0usize; pooled.len()];
        for &v in samples_p {
            pc[index(v)] += 1;
        }
        for &v in samples_q {
            qc[index(v)] += 1;
        }
        (pc, qc)
    } else {
        let lo = pooled[0];
        let hi = pooled[pooled.len() - 1];
        let width = (hi - lo) / bins as f64;
        let index = |v: f64| (((v - lo) / width) as usize).min(bins - 1);
        let mut pc = vec![0usize; bins];
        let mut qc = vec![0usize; bins];
        for &v in samples_p {
            pc[index(v)] += 1;
        }
        for &v in samples_q {
            qc[index(v)] += 1;
        }
        (pc, qc)
    };

    let np = samples_p.len() as f64;
    let nq = samples_q.len() as f64;
    let l1: f64 = p_counts
        .iter()
        .zip(&q_counts)
        .map(|(&a, &b)| (a as f64 / np - b as f64 / nq).abs())
        .sum();
    // accumulated rounding can push the sum a few ulps past 2
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gp(pred: &[f64], target: &[f64], group: &[u8]) -> GroupedPredictions {
        GroupedPredictions::new(pred.to_vec(), target.to_vec(), group.to_vec()).unwrap()
    }

    #[test]
    fn group_error_examples() {
        let g = gp(&[1.0, 2.0, 0.0, 0.0], &[1.0, 2.0, 1.0, 3.0], &[0, 0, 1, 1]);
        assert_eq!(group_error(&g, 0).unwrap(), 0.0);
        assert_eq!(group_error(&g, 1).unwrap(), 5.0);
        assert_eq!(error_gap(&g).unwrap(), 5.0);

        let lone = gp(&[1.0], &[1.0], &[0]);
        assert!(group_error(&lone, 1).is_err());
    }

    #[test]
    fn error_gap_is_label_swap_invariant() {
        let g = gp(&[0.0, 1.0, 2.0, 5.0], &[1.0, 1.0, 1.0, 1.0], &[0, 1, 0, 1]);
        let swapped = gp(&[0.0, 1.0, 2.0, 5.0], &[1.0, 1.0, 1.0, 1.0], &[1, 0, 1, 0]);
        assert!((error_gap(&g).unwrap() - error_gap(&swapped).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn r2_examples() {
        let target = [1.0, 2.0, 3.0];
        assert_eq!(r2_score(&target, &target).unwrap(), 1.0);
        assert_eq!(r2_score(&[2.0, 2.0, 2.0], &target).unwrap(), 0.0);
        assert_eq!(
            r2_score(&[0.0, 0.0, 0.0, 0.0], &[-1.0, 1.0, -1.0, 1.0]).unwrap(),
            0.0
        );
        assert!(r2_score(&[1.0, 2.0], &[5.0, 5.0]).is_err());
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(binary_accuracy(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(binary_accuracy(&[0.4, 0.4], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(binary_accuracy(&[0.6, 0.4], &[1.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn w1_examples() {
        assert_eq!(wasserstein1d_exact(&[1.0, 2.0], &[2.0, 1.0]).unwrap(), 0.0);
        assert!((wasserstein1d_exact(&[0.0, 0.0], &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((wasserstein1d_exact(&[0.0, 4.0], &[1.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn w1_unequal_counts() {
        // p = {0}, q = {0, 1}: quantile functions differ on u in (1/2, 1)
        let w = wasserstein1d_exact(&[0.0], &[0.0, 1.0]).unwrap();
        assert!((w - 0.5).abs() < 1e-15);
        // p = {0,0,0}, q = {1,1}: unit translation regardless of counts
        let w = wasserstein1d_exact(&[0.0, 0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_histogram(&[1.0, 2.0], &[1.0, 2.0], 50).unwrap(), 0.0);
        assert_eq!(tv_histogram(&[0.0, 0.1], &[5.0, 5.1], 2).unwrap(), 1.0);

        // fraction arithmetic on a two-value fixture
        let mut p = vec![0.0; 20988];
        p.extend(vec![1.0; 9539]);
        let mut q = vec![0.0; 13026];
        q.extend(vec![1.0; 1669]);
        let tv = tv_histogram(&p, &q, 50).unwrap();
        let expected = (9539.0 / 30527.0f64 - 1669.0 / 14695.0).abs();
        assert!((tv - expected).abs() < 1e-12);
        assert!((tv - 0.19890).abs() < 1e-4);
    }

    #[test]
    fn empirical_w1_bounded_by_root_group_error() {
        // the paired coupling between targets and predictions is feasible,
        // so W1(target_a, pred_a) <= sqrt(group_error(a)) exactly
        let g = gp(
            &[0.2, 1.4, -0.3, 2.2, 0.9, 1.1],
            &[0.0, 1.0, 0.0, 2.0, 1.0, 1.5],
            &[0, 0, 0, 1, 1, 1],
        );
        for a in [0u8, 1] {
            let w = wasserstein1d_exact(&g.group_target(a), &g.group_pred(a)).unwrap();
            assert!(w <= group_error(&g, a).unwrap().sqrt() + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn w1_translation_property(
            base in proptest::collection::vec(-100.0f64..100.0, 1..40),
            shift in -50.0f64..50.0,
        ) {
            let shifted: Vec<f64> = base.iter().map(|v| v + shift).collect();
            let w = wasserstein1d_exact(&base, &shifted).unwrap();
            prop_assert!((w - shift.abs()).abs() < 1e-12);
        }

        #[test]
        fn w1_symmetry_and_nonnegativity(
            p in proptest::collection::vec(-10.0f64..10.0, 1..16),
            q in proptest::collection::vec(-10.0f64..10.0, 1..16),
        ) {
            let ab = wasserstein1d_exact(&p, &q).unwrap();
            let ba = wasserstein1d_exact(&q, &p).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() < 1e-12);
        }

        #[test]
        fn w1_triangle_inequality(
            p in proptest::collection::vec(-10.0f64..10.0, 1..16),
            q in proptest::collection::vec(-10.0f64..10.0, 1..16),
            r in proptest::collection::vec(-10.0f64..10.0, 1..16),
        ) {
            let pq = wasserstein1d_exact(&p, &q).unwrap();
            let qr = wasserstein1d_exact(&q, &r).unwrap();
            let pr = wasserstein1d_exact(&p, &r).unwrap();
            prop_assert!(pr <= pq + qr + 1e-9);
        }

        #[test]
        fn tv_is_bounded_and_symmetric(
            p in proptest::collection::vec(-10.0f64..10.0, 1..60),
            q in proptest::collection::vec(-10.0f64..10.0, 1..60),
        ) {
            let ab = tv_histogram(&p, &q, 20).unwrap();
            let ba = tv_histogram(&q, &p, 20).unwrap();
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((ab - ba).abs() < 1e-12);
        }
    }

    #[test]
    fn w1_zero_iff_identical_multisets() {
        let p = [0.5, 0.5, 1.5];
        let q = [1.5, 0.5, 0.5];
        assert_eq!(wasserstein1d_exact(&p, &q).unwrap(), 0.0);
        let r = [0.5, 0.5, 1.5000001];
        assert!(wasserstein1d_exact(&p, &r).unwrap() > 0.0);
    }
}

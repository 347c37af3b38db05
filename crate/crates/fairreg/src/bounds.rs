//! Evaluators for the error-decomposition bounds: the joint-error lower
//! bound, its group-weighted corollary, the error-gap upper bound, the
//! constant-predictor parity check, discrete entropy tools, and the
//! feasible-region polygon of group-wise errors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::GroupedPredictions;

/// Inputs of the two bound evaluators for one evaluated sample.
#[derive(Debug, Clone, Serialize)]
pub struct BoundContext {
    /// Empirical bound on `max(|Y|, |Ŷ|)` over the sample.
    pub m_bound: f64,
    /// Fraction of samples in group 0.
    pub alpha: f64,
    pub w1_labels: f64,
    pub w1_preds: f64,
    pub tv_labels: f64,
    /// Estimated discrepancy between group-conditional mean predictions.
    pub cond_discrepancy: f64,
}

/// Lower bound on `Err0 + Err1`: `½ [(W1(labels) - W1(preds))₊]²`.
pub fn lower_bound_joint(w1_labels: f64, w1_preds: f64) -> f64 {
    let d = (w1_labels - w1_preds).max(0.0);
    0.5 * d * d
}

/// Lower bound on the α-weighted joint error:
/// `min(α, 1-α) · ½ [(W1(labels) - W1(preds))₊]²`.
pub fn lower_bound_weighted(alpha: f64, w1_labels: f64, w1_preds: f64) -> f64 {
    alpha.min(1.0 - alpha) * lower_bound_joint(w1_labels, w1_preds)
}

/// Upper bound on the error gap: `8 M² d_TV + 3 M · cond_discrepancy`.
pub fn upper_bound_gap(ctx: &BoundContext) -> f64 {
    8.0 * ctx.m_bound * ctx.m_bound * ctx.tv_labels + 3.0 * ctx.m_bound * ctx.cond_discrepancy
}

/// Estimates `min{ E_{D0}[|E_{D0^y}[Ŷ] - E_{D1^y}[Ŷ]|], E_{D1}[...] }`.
///
/// The targets are partitioned into quantile bins (exact distinct values
/// when there are at most `y_bins` of them). Within each bin containing both
/// groups the absolute difference of group-mean predictions is taken; the
/// two expectations weight those differences by each group's bin occupancy,
/// renormalized over the included bins. Bins hosting a single group are
/// excluded from both expectations.
pub fn conditional_discrepancy(gp: &GroupedPredictions, y_bins: usize) -> Result<f64> {
    if y_bins == 0 {
        return Err(Error::Domain("conditional_discrepancy: y_bins must be >= 1".into()));
    }
    let n = gp.len();
    let bin_of = assign_y_bins(gp.target(), y_bins);
    let nbins = 1 + bin_of.iter().copied().max().unwrap_or(0);

    // per bin and group: count and prediction sum
    let mut count = vec![[0usize; 2]; nbins];
    let mut sum = vec![[0.0f64; 2]; nbins];
    for i in 0..n {
        let b = bin_of[i];
        let g = gp.group()[i] as usize;
        count[b][g] += 1;
        sum[b][g] += gp.pred()[i];
    }

    let mut weighted = [0.0f64; 2];
    let mut included = [0usize; 2];
    for b in 0..nbins {
        if count[b][0] == 0 || count[b][1] == 0 {
            continue;
        }
        let diff =
            (sum[b][0] / count[b][0] as f64 - sum[b][1] / count[b][1] as f64).abs();
        for g in 0..2 {
            weighted[g] += count[b][g] as f64 * diff;
            included[g] += count[b][g];
        }
    }
    if included[0] == 0 {
        return Err(Error::Domain(
            "conditional_discrepancy: no label bin contains both groups".into(),
        ));
    }
    let e0 = weighted[0] / included[0] as f64;
    let e1 = weighted[1] / included[1] as f64;
    Ok(e0.min(e1))
}

/// Maps each target to a bin index: one bin per distinct value when there
/// are at most `y_bins` distinct values, otherwise `y_bins` quantile bins
/// of the pooled sample (duplicate edges collapse).
fn assign_y_bins(y: &[f64], y_bins: usize) -> Vec<usize> {
    let mut distinct = y.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite targets"));
    distinct.dedup();
    if distinct.len() <= y_bins {
        return y
            .iter()
            .map(|v| distinct.binary_search_by(|x| x.partial_cmp(v).unwrap()).unwrap())
            .collect();
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite targets"));
    let n = sorted.len();
    // upper edges of the first y_bins - 1 quantile bins
    let mut edges: Vec<f64> = (1..y_bins)
        .map(|k| sorted[(k * n / y_bins).saturating_sub(1).min(n - 1)])
        .collect();
    edges.dedup();
    y.iter()
        .map(|v| edges.partition_point(|e| e < v))
        .collect()
}

/// True when the two groups share their first two label moments within
/// `tol` — the premise under which a constant predictor achieves parity.
pub fn constant_predictor_check(y: &[f64], a: &[u8], tol: f64) -> Result<bool> {
    if y.len() != a.len() {
        return Err(Error::Shape("constant_predictor_check: length mismatch".into()));
    }
    let mut sum = [0.0f64; 2];
    let mut sum_sq = [0.0f64; 2];
    let mut count = [0usize; 2];
    for (&v, &g) in y.iter().zip(a) {
        if g > 1 {
            return Err(Error::Domain("group labels must be 0 or 1".into()));
        }
        sum[g as usize] += v;
        sum_sq[g as usize] += v * v;
        count[g as usize] += 1;
    }
    if count[0] == 0 || count[1] == 0 {
        return Err(Error::Domain("constant_predictor_check: empty group".into()));
    }
    let m1 = (sum[0] / count[0] as f64 - sum[1] / count[1] as f64).abs();
    let m2 = (sum_sq[0] / count[0] as f64 - sum_sq[1] / count[1] as f64).abs();
    Ok(m1 <= tol && m2 <= tol)
}

/// Discrete joint distribution over `(A, Z, Y)`.
#[derive(Debug, Clone)]
pub struct DiscreteJoint {
    dims: (usize, usize, usize),
    /// `probs[a][z][y]` flattened as `a * nz * ny + z * ny + y`.
    probs: Vec<f64>,
}

impl DiscreteJoint {
    pub fn new(dims: (usize, usize, usize), probs: Vec<f64>) -> Result<Self> {
        let (na, nz, ny) = dims;
        if na == 0 || nz == 0 || ny == 0 {
            return Err(Error::Domain("discrete joint: empty support".into()));
        }
        if probs.len() != na * nz * ny {
            return Err(Error::Shape(format!(
                "discrete joint: {} entries for dims {dims:?}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Domain("discrete joint: probabilities must be >= 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "discrete joint: probabilities sum to {total}, not 1"
            )));
        }
        Ok(DiscreteJoint { dims, probs })
    }

    /// Builds the empirical joint from per-cell counts.
    pub fn from_counts(dims: (usize, usize, usize), counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Domain("discrete joint: zero total count".into()));
        }
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::new(dims, probs)
    }

    #[inline]
    fn p(&self, a: usize, z: usize, y: usize) -> f64 {
        let (_, nz, ny) = self.dims;
        self.probs[a * nz * ny + z * ny + y]
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }
}

/// `H(A | Z, Y)` in nats; cells with `p(z, y) = 0` are skipped.
pub fn conditional_entropy(joint: &DiscreteJoint) -> f64 {
    let (na, nz, ny) = joint.dims;
    let mut h = 0.0;
    for z in 0..nz {
        for y in 0..ny {
            let pzy: f64 = (0..na).map(|a| joint.p(a, z, y)).sum();
            if pzy == 0.0 {
                continue;
            }
            for a in 0..na {
                let p = joint.p(a, z, y);
                if p > 0.0 {
                    h -= p * (p / pzy).ln();
                }
            }
        }
    }
    h
}

/// `H(A | Y)` in nats, marginalizing out `Z`.
pub fn conditional_entropy_given_y(joint: &DiscreteJoint) -> f64 {
    let (na, nz, ny) = joint.dims;
    let mut h = 0.0;
    for y in 0..ny {
        let py: f64 = (0..na).flat_map(|a| (0..nz).map(move |z| (a, z))).map(|(a, z)| joint.p(a, z, y)).sum();
        if py == 0.0 {
            continue;
        }
        for a in 0..na {
            let pay: f64 = (0..nz).map(|z| joint.p(a, z, y)).sum();
            if pay > 0.0 {
                h -= pay * (pay / py).ln();
            }
        }
    }
    h
}

/// `I(A; Z | Y) = H(A|Y) - H(A|Z,Y)`; nonnegative up to rounding.
pub fn conditional_mutual_information(joint: &DiscreteJoint) -> f64 {
    conditional_entropy_given_y(joint) - conditional_entropy(joint)
}

/// Convex polygon of `(Err0, Err1)` pairs compatible with a gap upper
/// bound and a joint-error lower bound.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibleRegion {
    /// Width of the gap band `|e0 - e1| <= a_gap`.
    pub a_gap: f64,
    /// Level of the joint-error line `e0 + e1 >= b_joint`.
    pub b_joint: f64,
    /// Polygon vertices in counter-clockwise order.
    pub vertices: Vec<(f64, f64)>,
}

/// Computes the polygon `{(e0,e1) : |e0-e1| <= a_gap, e0+e1 >= b_joint,
/// 0 <= e0,e1 <= err_cap}` by clipping the cap square against the three
/// half-planes. Vertices come out counter-clockwise; when `a_gap <=
/// b_joint` the two bottom vertices are `((b±a)/2, (b∓a)/2)`.
pub fn feasible_region(a_gap: f64, b_joint: f64, err_cap: f64) -> Result<FeasibleRegion> {
    if a_gap < 0.0 || b_joint < 0.0 {
        return Err(Error::Domain("feasible_region: bounds must be >= 0".into()));
    }
    if err_cap <= a_gap.max(b_joint) {
        return Err(Error::Domain(
            "feasible_region: err_cap must exceed both bound levels".into(),
        ));
    }
    // CCW square, then Sutherland-Hodgman clips with "inside" = g(p) >= 0
    let square = vec![(0.0, 0.0), (err_cap, 0.0), (err_cap, err_cap), (0.0, err_cap)];
    let halfplanes: [Box<dyn Fn(f64, f64) -> f64>; 3] = [
        Box::new(move |x, y| x + y - b_joint),
        Box::new(move |x, y| a_gap - (x - y)),
        Box::new(move |x, y| a_gap - (y - x)),
    ];
    let mut poly = square;
    for g in &halfplanes {
        poly = clip_halfplane(&poly, g.as_ref());
        if poly.is_empty() {
            return Err(Error::Domain("feasible_region: empty region".into()));
        }
    }
    // drop duplicate consecutive vertices introduced by clipping
    let mut vertices: Vec<(f64, f64)> = Vec::with_capacity(poly.len());
    for v in poly {
        if vertices
            .last()
            .map_or(true, |u| (u.0 - v.0).abs() > 1e-12 || (u.1 - v.1).abs() > 1e-12)
        {
            vertices.push(v);
        }
    }
    if vertices.len() > 1 {
        let (first, last) = (vertices[0], *vertices.last().unwrap());
        if (first.0 - last.0).abs() <= 1e-12 && (first.1 - last.1).abs() <= 1e-12 {
            vertices.pop();
        }
    }
    Ok(FeasibleRegion { a_gap, b_joint, vertices })
}

fn clip_halfplane(poly: &[(f64, f64)], g: &dyn Fn(f64, f64) -> f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for (k, &p) in poly.iter().enumerate() {
        let q = poly[(k + 1) % poly.len()];
        let (gp, gq) = (g(p.0, p.1), g(q.0, q.1));
        if gp >= 0.0 {
            out.push(p);
        }
        if (gp > 0.0 && gq < 0.0) || (gp < 0.0 && gq > 0.0) {
            let t = gp / (gp - gq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

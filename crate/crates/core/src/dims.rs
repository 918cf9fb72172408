//! Closed-form dimension bounds and finite-scale estimators of the local
//! and quantization dimensions.

use alloc::vec::Vec;
#[allow(unused_imports)] // unused when another crate in the graph links std
use num_traits::Float;

use crate::ifs::{RecurrentIfs, SscReport, System};
use crate::measure::{ball_measure_until, Target};
use crate::quantizer::QuantizationCurve;
use crate::stats::{linear_fit, pairwise_sum, quantile, xlogx};
use crate::symbolic::{chaos_game, lyapunov_pair, markov_entropy};
use crate::{Error, Point, Result};

/// Enclosures wider than this fraction of their upper end are not used.
pub const MAX_RELATIVE_WIDTH: f64 = 0.1;
/// Radii needed for a local-dimension slope.
pub const MIN_RESOLVED_RADII: usize = 4;

/// Summary of per-point local-dimension slopes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalDimStats {
    pub count: usize,
    /// Points where too few radii were resolved.
    pub failed: usize,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
}

impl LocalDimStats {
    pub fn from_slopes(slopes: &[f64], failed: usize) -> Self {
        let q = |t| quantile(slopes, t);
        Self { count: slopes.len(), failed, q05: q(0.05), q25: q(0.25), median: q(0.5), q75: q(0.75), q95: q(0.95) }
    }
}

/// Slope of `log n` against `−ê_n` plus the two-point increments.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuantDimEstimate {
    pub d: f64,
    pub stderr: f64,
    /// `log(n₂/n₁)/(ê₁ − ê₂)` for consecutive entries over the whole curve.
    pub increments: Vec<f64>,
    /// Smallest and largest `n` in the regression window.
    pub window: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DimensionReport {
    pub alpha1: f64,
    pub alpha2: f64,
    /// `h = Σ_i Σ_j p_i p_ij log p_ij ≤ 0`.
    pub markov_entropy: f64,
    /// `Σ p_i log s̲_i`.
    pub lyap_low: f64,
    /// `Σ p_i log s̄_i`.
    pub lyap_high: f64,
    pub d_estimate: Option<QuantDimEstimate>,
    pub local_dim_stats: Option<LocalDimStats>,
}

/// `α₁ = h/Σp_i log s̲_i` and `α₂ = h/Σp_i log s̄_i`; the estimate fields
/// are left empty.
pub fn alpha_bounds(ifs: &RecurrentIfs) -> DimensionReport {
    let h = markov_entropy(ifs);
    let (lyap_low, lyap_high) = lyapunov_pair(ifs);
    DimensionReport {
        alpha1: h / lyap_low,
        alpha2: h / lyap_high,
        markov_entropy: h,
        lyap_low,
        lyap_high,
        d_estimate: None,
        local_dim_stats: None,
    }
}

/// `Σ p_i log p_i / Σ p_i log s_i`, the common value of both bounds when the
/// maps are similarities and every row of the matrix equals `p`.
pub fn collapsed_dimension(ifs: &RecurrentIfs) -> f64 {
    let p = &ifs.stationary().p;
    let num: Vec<f64> = p.iter().map(|&q| xlogx(q)).collect();
    let den: Vec<f64> = ifs.maps().iter().zip(p).map(|(m, q)| q * m.upper().ln()).collect();
    pairwise_sum(&num) / pairwise_sum(&den)
}

/// True when every map has `s̲_i = s̄_i`, every row of the matrix equals the
/// stationary vector, and both bounds then agree with
/// [`collapsed_dimension`] to 1e-12.
pub fn special_case_check(ifs: &RecurrentIfs) -> bool {
    const TOL: f64 = 1e-12;
    let p = &ifs.stationary().p;
    let similar = ifs.maps().iter().all(|m| (m.upper() - m.lower()).abs() <= TOL);
    let memoryless = (0..ifs.len()).all(|i| ifs.matrix().row(i).iter().zip(p).all(|(a, b)| (a - b).abs() <= TOL));
    if !(similar && memoryless) {
        return false;
    }
    let rep = alpha_bounds(ifs);
    let d = collapsed_dimension(ifs);
    let ok = (rep.alpha1 - d).abs() <= TOL && (rep.alpha2 - d).abs() <= TOL;
    if !ok {
        log::error!("collapsed bound {d} disagrees with ({}, {})", rep.alpha1, rep.alpha2);
    }
    ok
}

/// Regression of `log n` on `−ê_n` over the largest `max(3, ⌈len·fraction⌉)`
/// entries. `fraction = 0.5` uses the upper half of the curve.
pub fn estimate_quantization_dimension_window(curve: &QuantizationCurve, fraction: f64) -> Result<QuantDimEstimate> {
    let len = curve.entries.len();
    if len < 4 {
        return Err(Error::CurveTooShort(len));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter("regression window fraction must lie in (0, 1]"));
    }
    if let Some(w) = curve.entries.windows(2).find(|w| w[1].e_best >= w[0].e_best) {
        return Err(Error::MonotonicityFailure(w[1].n));
    }
    let increments = curve
        .entries
        .windows(2)
        .map(|w| (w[1].n as f64 / w[0].n as f64).ln() / (w[0].e_best - w[1].e_best))
        .collect();
    let take = ((len as f64 * fraction).ceil() as usize).clamp(3, len);
    let tail = &curve.entries[len - take..];
    let xs: Vec<f64> = tail.iter().map(|e| -e.e_best).collect();
    let ys: Vec<f64> = tail.iter().map(|e| (e.n as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or(Error::InvalidParameter("degenerate curve"))?;
    Ok(QuantDimEstimate { d: fit.slope, stderr: fit.slope_stderr, increments, window: (tail[0].n, tail[take - 1].n) })
}

pub fn estimate_quantization_dimension(curve: &QuantizationCurve) -> Result<QuantDimEstimate> {
    estimate_quantization_dimension_window(curve, 0.5)
}

/// `count` radii log-spaced from `r_max` down to `r_min`.
pub fn log_grid(r_min: f64, r_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_max > r_min && count >= 2) {
        return Err(Error::InvalidParameter("radius grid needs 0 < rMin < rMax and two or more radii"));
    }
    let step = (r_max / r_min).ln() / (count - 1) as f64;
    Ok((0..count).map(|i| r_max * (-(i as f64) * step).exp()).collect())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalDimEstimate {
    pub point: Point,
    pub slope: f64,
    /// Smallest and largest resolved radius.
    pub r_range: (f64, f64),
    /// Largest relative width among the enclosures used.
    pub enc_width_max: f64,
    pub radii_used: usize,
}

/// Least-squares slope of `log μ(B(x, r))` against `log r`, using the
/// midpoint of the log-enclosure at every radius whose enclosure is
/// resolved to relative width 0.1.
pub fn estimate_local_dimension(sys: &System, x: &[f64], r_grid: &[f64], depth_cap: usize) -> Result<LocalDimEstimate> {
    if r_grid.len() < 6 {
        return Err(Error::InvalidParameter("local dimension needs six or more radii"));
    }
    if !sys.ifs.ambient().contains(x, 0.0) {
        return Err(Error::InvalidParameter("point lies outside the ambient box"));
    }
    let resolved = |lo: f64, hi: f64| hi <= 0.0 || hi - lo <= MAX_RELATIVE_WIDTH * hi;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut widest = 0.0f64;
    for &r in r_grid {
        let enc = match ball_measure_until(sys, Target::Full, x, r, depth_cap, resolved) {
            Ok(enc) => enc,
            Err(Error::DepthCapReached(_)) => continue,
            Err(e) => return Err(e),
        };
        if enc.lo <= 0.0 || !resolved(enc.lo, enc.hi) {
            continue;
        }
        widest = widest.max((enc.hi - enc.lo) / enc.hi);
        xs.push(r.ln());
        ys.push(0.5 * (enc.lo.ln() + enc.hi.ln()));
    }
    if xs.len() < MIN_RESOLVED_RADII {
        return Err(Error::InsufficientResolvedRadii(xs.len()));
    }
    let fit = linear_fit(&xs, &ys).ok_or(Error::InvalidParameter("radius grid has repeated values"))?;
    let (r_min, r_max) = xs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l.exp()), b.max(l.exp())));
    Ok(LocalDimEstimate { point: x.to_vec(), slope: fit.slope, r_range: (r_min, r_max), enc_width_max: widest, radii_used: xs.len() })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalDimValidation {
    pub fraction: f64,
    pub lower: f64,
    pub upper: f64,
    pub stats: LocalDimStats,
}

/// Fraction of outcomes whose slope lies in `[α₁(1−band), α₂(1+band)]`.
/// Points that could not be resolved count as outside.
pub fn local_dimension_fraction(
    bounds: &DimensionReport,
    outcomes: &[Result<LocalDimEstimate>],
    band: f64,
) -> LocalDimValidation {
    let lower = bounds.alpha1 * (1.0 - band);
    let upper = bounds.alpha2 * (1.0 + band);
    let slopes: Vec<f64> = outcomes.iter().filter_map(|o| o.as_ref().ok().map(|e| e.slope)).collect();
    let inside = slopes.iter().filter(|&&s| s >= lower && s <= upper).count();
    let fraction = if outcomes.is_empty() { 0.0 } else { inside as f64 / outcomes.len() as f64 };
    LocalDimValidation { fraction, lower, upper, stats: LocalDimStats::from_slopes(&slopes, outcomes.len() - slopes.len()) }
}

/// Points of a chaos-game run used for local-dimension sampling.
pub fn sample_points(sys: &System, count: usize, seed: u64) -> Result<Vec<Point>> {
    let traj = chaos_game(sys, count + 1000, 1000, seed)?;
    Ok((0..traj.len()).map(|m| traj.point(m).to_vec()).collect())
}

/// Samples `sample_count` points from the measure and reports the fraction
/// whose local-dimension slope falls inside the widened `[α₁, α₂]`.
pub fn validate_local_dimension_bounds(
    sys: &System,
    sample_count: usize,
    seed: u64,
    band: f64,
    r_grid: &[f64],
    depth_cap: usize,
) -> Result<LocalDimValidation> {
    let pts = sample_points(sys, sample_count, seed)?;
    let outcomes: Vec<_> = pts.iter().map(|x| estimate_local_dimension(sys, x, r_grid, depth_cap)).collect();
    Ok(local_dimension_fraction(&alpha_bounds(&sys.ifs), &outcomes, band))
}

/// `α₁(1−slack) ≤ D̂ ≤ α₂(1+slack)` for the regression estimate of the curve.
pub fn validate_quantization_dimension_bounds(ifs: &RecurrentIfs, ssc: &SscReport, curve: &QuantizationCurve, slack: f64) -> Result<bool> {
    if !ssc.certified {
        return Err(Error::SscNotCertified);
    }
    let rep = alpha_bounds(ifs);
    let d = estimate_quantization_dimension(curve)?.d;
    Ok(rep.alpha1 * (1.0 - slack) <= d && d <= rep.alpha2 * (1.0 + slack))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::ContractionMap;
    use crate::markov::StochasticMatrix;
    use crate::quantizer::{Codebook, CurveEntry, ErrorEnclosure};
    use crate::testing::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn analytic_curve(ns: &[usize], shift: f64) -> QuantizationCurve {
        let entries = ns
            .iter()
            .map(|&n| {
                let e = -(2.0 * n as f64).ln() - 1.0 + shift;
                CurveEntry {
                    n,
                    e_best: e,
                    enclosure: ErrorEnclosure { lo: e, hi: e, refined_cylinders: 0 },
                    codebook: Codebook::from_scalars(&[0.0]).unwrap(),
                }
            })
            .collect();
        QuantizationCurve { entries }
    }

    #[test]
    fn cantor_bounds_collapse() {
        let ifs = cantor_ifs();
        let rep = alpha_bounds(&ifs);
        let d = 2f64.ln() / 3f64.ln();
        assert!((rep.alpha1 - d).abs() < 1e-14 && (rep.alpha2 - d).abs() < 1e-14);
        assert!(special_case_check(&ifs));
    }

    #[test]
    fn two_state_bounds() {
        // h = (2/3) log(1/2), λ = (1/3) log(1/4) + (2/3) log(1/3).
        let rep = alpha_bounds(&two_state_ifs());
        let h = (2.0 / 3.0) * 0.5f64.ln();
        let lyap = 0.25f64.ln() / 3.0 + (2.0 / 3.0) * (1.0f64 / 3.0).ln();
        assert!((rep.markov_entropy - h).abs() < 1e-14);
        assert!((rep.alpha1 - h / lyap).abs() < 1e-13);
        assert!((rep.alpha1 - 0.386_853).abs() < 1e-6);
        assert_eq!(rep.alpha1, rep.alpha2);
        assert!(!special_case_check(&two_state_ifs()));
    }

    #[test]
    fn affine_bounds_are_strict() {
        let rep = alpha_bounds(&affine_ifs());
        assert!(0.0 < rep.alpha1 && rep.alpha1 < rep.alpha2);
    }

    #[test]
    fn memoryless_chain_with_unequal_weights() {
        let p = [0.2, 0.3, 0.5];
        let ifs = line_ifs(&[(0.2, 0.0), (0.25, 0.4), (0.1, 0.9)], &[p.to_vec(), p.to_vec(), p.to_vec()]);
        assert!(special_case_check(&ifs));
        let expected = p.iter().map(|q| q * q.ln()).sum::<f64>()
            / p.iter().zip([0.2f64, 0.25, 0.1]).map(|(q, s)| q * s.ln()).sum::<f64>();
        assert!((collapsed_dimension(&ifs) - expected).abs() < 1e-13);
    }

    #[test]
    fn relabeling_states_leaves_bounds_unchanged() {
        let ifs = two_state_ifs();
        let swapped_rows = vec![vec![0.5, 0.5], vec![1.0, 0.0]];
        let m = StochasticMatrix::validate(&swapped_rows).unwrap();
        let maps: Vec<ContractionMap> = vec![ifs.map(1).clone(), ifs.map(0).clone()];
        let swapped = RecurrentIfs::new(maps, m, ifs.ambient().clone()).unwrap();
        let (a, b) = (alpha_bounds(&ifs), alpha_bounds(&swapped));
        assert!((a.alpha1 - b.alpha1).abs() < 1e-14 && (a.alpha2 - b.alpha2).abs() < 1e-14);
    }

    #[test]
    fn uniform_analytic_curve_has_slope_one() {
        let est = estimate_quantization_dimension(&analytic_curve(&[8, 16, 32, 64], 0.0)).unwrap();
        assert!((est.d - 1.0).abs() < 0.05, "{est:?}");
        assert_eq!(est.window, (16, 64));
        assert!(matches!(
            estimate_quantization_dimension(&analytic_curve(&[1, 2, 4], 0.0)),
            Err(Error::CurveTooShort(3))
        ));
    }

    #[test]
    fn increments_ignore_constant_shifts() {
        let ns = [2, 4, 8, 16, 32];
        let a = estimate_quantization_dimension(&analytic_curve(&ns, 0.0)).unwrap();
        let b = estimate_quantization_dimension(&analytic_curve(&ns, 3.7)).unwrap();
        for (x, y) in a.increments.iter().zip(&b.increments) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_local_dimension_is_one() {
        let sys = System::new(uniform_ifs(), 8).unwrap();
        let grid = log_grid(1e-4, 1e-1, 8).unwrap();
        let est = estimate_local_dimension(&sys, &[0.37], &grid, 40).unwrap();
        assert!((est.slope - 1.0).abs() < 0.05, "{est:?}");
        assert!(est.enc_width_max <= MAX_RELATIVE_WIDTH);
    }

    #[test]
    fn point_off_the_support_is_rejected() {
        let sys = System::new(cantor_ifs(), 8).unwrap();
        let grid: Vec<f64> = (3..=9).map(|k| 3f64.powi(-k)).collect();
        assert!(matches!(
            estimate_local_dimension(&sys, &[0.5], &grid, 40),
            Err(Error::InsufficientResolvedRadii(_))
        ));
    }

    #[test]
    fn cantor_local_dimensions_sit_in_the_band() {
        let sys = System::new(cantor_ifs(), 8).unwrap();
        let grid: Vec<f64> = (3..=9).map(|k| 3f64.powi(-k)).collect();
        let v = validate_local_dimension_bounds(&sys, 40, 5, 0.1, &grid, 40).unwrap();
        assert!(v.fraction >= 0.9, "{v:?}");
        let all = validate_local_dimension_bounds(&sys, 10, 5, f64::INFINITY, &grid, 40).unwrap();
        assert_eq!(all.fraction, 1.0);
    }

    #[test]
    fn quantization_bounds_need_separation() {
        let sys = System::new(overlapping_ifs(), 8).unwrap();
        let ssc = sys.ifs.check_ssc(&sys.attractor);
        assert!(!ssc.certified);
        let curve = analytic_curve(&[8, 16, 32, 64], 0.0);
        assert!(matches!(validate_quantization_dimension_bounds(&sys.ifs, &ssc, &curve, 0.1), Err(Error::SscNotCertified)));
    }

    proptest! {
        #[test]
        fn bounds_are_ordered(seed in 0u64..200, n in 2usize..6) {
            let rep = alpha_bounds(&random_ifs(seed, n));
            prop_assert!(rep.markov_entropy <= 0.0);
            prop_assert!(0.0 <= rep.alpha1 && rep.alpha1 <= rep.alpha2 * (1.0 + 1e-12));
        }
    }
}

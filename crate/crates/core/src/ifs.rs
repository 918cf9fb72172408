//! Contraction maps, recurrent systems, attractor approximation and
//! separation checks.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)] // unused when another crate in the graph links std
use num_traits::Float;

use crate::linalg::{dist, Matrix};
use crate::markov::{StationaryDistribution, StochasticMatrix};
use crate::rng::SplitRng;
use crate::symbolic::Word;
use crate::{Error, Point, Result};

/// Closure type for maps that are only known through evaluation.
pub type MapFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Relative slack used when checking declared distortion bounds and box
/// containment in floating point.
const GEOM_SLACK: f64 = 1e-12;

/// Number of random pairs used to sanity-check user-bounded maps.
pub const DISTORTION_SAMPLES: usize = 1000;

#[derive(Clone)]
pub enum MapKind {
    /// `x ↦ ratio · Q x + offset` with `Q` orthogonal.
    Similarity { ratio: f64, orthogonal: Matrix, offset: Vec<f64> },
    /// `x ↦ A x + b`.
    Affine { matrix: Matrix, offset: Vec<f64> },
    /// Arbitrary map with caller-declared distortion bounds.
    UserBounded { map: MapFn, lower: f64, upper: f64 },
}

impl fmt::Debug for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::Similarity { ratio, orthogonal, offset } => f
                .debug_struct("Similarity")
                .field("ratio", ratio)
                .field("orthogonal", orthogonal)
                .field("offset", offset)
                .finish(),
            MapKind::Affine { matrix, offset } => {
                f.debug_struct("Affine").field("matrix", matrix).field("offset", offset).finish()
            }
            MapKind::UserBounded { lower, upper, .. } => f
                .debug_struct("UserBounded")
                .field("lower", lower)
                .field("upper", upper)
                .finish_non_exhaustive(),
        }
    }
}

/// A hyperbolic map `S` with `s̲·d(x,y) ≤ d(Sx,Sy) ≤ s̄·d(x,y)`,
/// `0 < s̲ ≤ s̄ < 1`.
#[derive(Debug, Clone)]
pub struct ContractionMap {
    kind: MapKind,
    dim: usize,
    lower: f64,
    upper: f64,
}

impl ContractionMap {
    pub fn similarity(ratio: f64, orthogonal: Matrix, offset: Vec<f64>) -> Result<Self> {
        let k = offset.len();
        if orthogonal.rows() != k || orthogonal.cols() != k {
            return Err(Error::DimensionMismatch { expected: k, found: orthogonal.rows() });
        }
        let gram = orthogonal.transpose().mul(&orthogonal);
        let id = Matrix::identity(k);
        for i in 0..k {
            for j in 0..k {
                if (gram[(i, j)] - id[(i, j)]).abs() > 1e-9 {
                    return Err(Error::InvalidParameter("similarity part is not orthogonal"));
                }
            }
        }
        Self::from_kind(MapKind::Similarity { ratio, orthogonal, offset })
    }

    /// Similarity with identity orthogonal part.
    pub fn scaling(ratio: f64, offset: Vec<f64>) -> Result<Self> {
        let k = offset.len();
        Self::similarity(ratio, Matrix::identity(k), offset)
    }

    pub fn affine(matrix: Matrix, offset: Vec<f64>) -> Result<Self> {
        let k = offset.len();
        if matrix.rows() != k || matrix.cols() != k {
            return Err(Error::DimensionMismatch { expected: k, found: matrix.rows() });
        }
        Self::from_kind(MapKind::Affine { matrix, offset })
    }

    /// A map known only by evaluation. Bounds are trusted here; the
    /// recurrent system samples them on construction.
    pub fn user_bounded(dim: usize, map: MapFn, lower: f64, upper: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let mut m = Self::from_kind(MapKind::UserBounded { map, lower, upper })?;
        m.dim = dim;
        Ok(m)
    }

    fn from_kind(kind: MapKind) -> Result<Self> {
        let dim = match &kind {
            MapKind::Similarity { offset, .. } | MapKind::Affine { offset, .. } => offset.len(),
            MapKind::UserBounded { .. } => 1,
        };
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let (lower, upper) = distortion_bounds(&kind).map_err(|e| match e {
            Error::NotContractive { lower, upper, .. } => {
                Error::NotContractive { map: 0, lower, upper }
            }
            e => e,
        })?;
        Ok(Self { kind, dim, lower, upper })
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(s̲, s̄)`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Linear part, when the map is affine or a similarity.
    pub fn linear_part(&self) -> Option<Matrix> {
        match &self.kind {
            MapKind::Similarity { ratio, orthogonal, .. } => {
                let mut m = orthogonal.clone();
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        m[(i, j)] *= ratio;
                    }
                }
                Some(m)
            }
            MapKind::Affine { matrix, .. } => Some(matrix.clone()),
            MapKind::UserBounded { .. } => None,
        }
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            MapKind::Similarity { ratio, orthogonal, offset } => {
                orthogonal.mul_vec_into(x, out);
                for (o, b) in out.iter_mut().zip(offset) {
                    *o = ratio * *o + b;
                }
            }
            MapKind::Affine { matrix, offset } => {
                matrix.mul_vec_into(x, out);
                for (o, b) in out.iter_mut().zip(offset) {
                    *o += b;
                }
            }
            MapKind::UserBounded { map, .. } => map(x, out),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Point {
        let mut out = vec![0.0; self.dim];
        self.apply_into(x, &mut out);
        out
    }
}

/// Distortion bounds `(s̲, s̄)` of a map kind: extreme singular values for
/// affine maps, `(s, s)` for similarities, the declared pair otherwise.
pub fn distortion_bounds(kind: &MapKind) -> Result<(f64, f64)> {
    let (lower, upper) = match kind {
        MapKind::Similarity { ratio, .. } => (ratio.abs(), ratio.abs()),
        MapKind::Affine { matrix, .. } => matrix.singular_value_bounds(),
        MapKind::UserBounded { lower, upper, .. } => (*lower, *upper),
    };
    if !(lower > 0.0) || !(upper < 1.0) || lower > upper {
        return Err(Error::NotContractive { map: 0, lower, upper });
    }
    Ok((lower, upper))
}

/// Axis-aligned box `[lo, hi]` with nonempty interior.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidBox);
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidBox);
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Point {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn diameter(&self) -> f64 {
        dist(&self.lo, &self.hi)
    }

    /// All `2^k` corners.
    pub fn corners(&self) -> Vec<Point> {
        let k = self.dim();
        (0..1usize << k)
            .map(|mask| {
                (0..k).map(|a| if mask >> a & 1 == 1 { self.hi[a] } else { self.lo[a] }).collect()
            })
            .collect()
    }

    /// Closed-box membership with an absolute slack.
    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= a - slack && *v <= b + slack)
    }

    /// Whether the open boxes intersect.
    pub fn open_intersects(&self, other: &AxisBox) -> bool {
        (0..self.dim()).all(|a| self.lo[a] < other.hi[a] && other.lo[a] < self.hi[a])
    }

    fn scale(&self) -> f64 {
        self.lo.iter().chain(&self.hi).fold(1.0f64, |m, v| m.max(v.abs()))
    }
}

/// `{X; S_i, p_ij}`: maps, validated transition matrix with its stationary
/// vector, and the ambient box `X`.
#[derive(Debug, Clone)]
pub struct RecurrentIfs {
    maps: Vec<ContractionMap>,
    matrix: StochasticMatrix,
    stationary: StationaryDistribution,
    ambient: AxisBox,
}

impl RecurrentIfs {
    pub fn new(maps: Vec<ContractionMap>, matrix: StochasticMatrix, ambient: AxisBox) -> Result<Self> {
        let n = matrix.len();
        if maps.len() != n {
            return Err(Error::WrongCount { expected: n, found: maps.len() });
        }
        let k = ambient.dim();
        for m in &maps {
            if m.dim() != k {
                return Err(Error::DimensionMismatch { expected: k, found: m.dim() });
            }
        }
        let slack = GEOM_SLACK * ambient.scale();
        let mut probes = ambient.corners();
        probes.push(ambient.center());
        let mut rng = SplitRng::new(0x5eed);
        for (idx, m) in maps.iter().enumerate() {
            if let MapKind::UserBounded { .. } = m.kind() {
                check_user_bounds(m, &ambient, &mut rng).map_err(|_| Error::DistortionViolated(idx))?;
            }
            for p in &probes {
                if !ambient.contains(&m.apply(p), slack) {
                    return Err(Error::MapLeavesAmbient(idx));
                }
            }
        }
        let stationary = matrix.stationary(1e-12)?;
        Ok(Self { maps, matrix, stationary, ambient })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn maps(&self) -> &[ContractionMap] {
        &self.maps
    }

    pub fn map(&self, i: usize) -> &ContractionMap {
        &self.maps[i]
    }

    pub fn matrix(&self) -> &StochasticMatrix {
        &self.matrix
    }

    pub fn stationary(&self) -> &StationaryDistribution {
        &self.stationary
    }

    pub fn ambient(&self) -> &AxisBox {
        &self.ambient
    }

    pub fn lower_ratios(&self) -> Vec<f64> {
        self.maps.iter().map(ContractionMap::lower).collect()
    }

    pub fn upper_ratios(&self) -> Vec<f64> {
        self.maps.iter().map(ContractionMap::upper).collect()
    }

    pub fn max_upper(&self) -> f64 {
        self.maps.iter().map(ContractionMap::upper).fold(0.0, f64::max)
    }

    pub fn min_lower(&self) -> f64 {
        self.maps.iter().map(ContractionMap::lower).fold(1.0, f64::min)
    }

    /// Transition probability in the word convention: letter `next` may
    /// follow letter `prev` in a word iff `p_{next, prev} > 0`.
    #[inline]
    pub fn word_step(&self, prev: usize, next: usize) -> f64 {
        self.matrix.get(next, prev)
    }

    /// `(s̲_ω, s̄_ω)`: products over the first `|ω| − 1` letters, matching
    /// `S_ω = S_{ω_1} ∘ ⋯ ∘ S_{ω_{n−1}}`.
    pub fn word_contraction(&self, word: &Word) -> Result<(f64, f64)> {
        word.check_admissible(&self.matrix)?;
        let body = &word.letters()[..word.len() - 1];
        Ok(body.iter().fold((1.0, 1.0), |(lo, hi), &l| {
            let m = &self.maps[l as usize];
            (lo * m.lower(), hi * m.upper())
        }))
    }

    /// `S_ω(x)`: applies `S_{ω_{n−1}}` first and `S_{ω_1}` last.
    pub fn apply_word(&self, word: &Word, x: &[f64]) -> Point {
        let mut cur = x.to_vec();
        let mut tmp = vec![0.0; x.len()];
        for &l in word.letters()[..word.len() - 1].iter().rev() {
            self.maps[l as usize].apply_into(&cur, &mut tmp);
            core::mem::swap(&mut cur, &mut tmp);
        }
        cur
    }

    /// Iterates `Ê_i ← ⋃_{j: p_ji > 0} S_i(Ê_j)` from the ambient center.
    pub fn attractor_components(&self, depth: usize) -> Result<AttractorApprox> {
        if depth == 0 {
            return Err(Error::DepthZero);
        }
        let n = self.len();
        let k = self.dim();
        let center = self.ambient.center();
        let mut clouds: Vec<Vec<f64>> = vec![center; n];
        for _ in 0..depth {
            clouds = self.attractor_step(&clouds)?;
        }
        Ok(AttractorApprox::from_clouds(self, clouds, depth, k))
    }

    fn attractor_step(&self, clouds: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        const MAX_POINTS: usize = 4_000_000;
        let n = self.len();
        let k = self.dim();
        let total: usize = (0..n)
            .map(|i| (0..n).filter(|&j| self.matrix.get(j, i) > 0.0).map(|j| clouds[j].len() / k).sum::<usize>())
            .sum();
        if total > MAX_POINTS {
            return Err(Error::InvalidParameter("attractor depth too large for the point budget"));
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut cloud = Vec::new();
            let mut buf = vec![0.0; k];
            for j in (0..n).filter(|&j| self.matrix.get(j, i) > 0.0) {
                for x in clouds[j].chunks_exact(k) {
                    self.maps[i].apply_into(x, &mut buf);
                    cloud.extend_from_slice(&buf);
                }
            }
            out.push(cloud);
        }
        Ok(out)
    }

    /// Numerical strong-separation check on the attractor approximation.
    pub fn check_ssc(&self, attractor: &AttractorApprox) -> SscReport {
        let n = self.len();
        let k = self.dim();
        let mut images: Vec<(usize, usize, Vec<f64>)> = Vec::new();
        for i in 0..n {
            for kk in 0..n {
                if self.matrix.get(kk, i) > 0.0 {
                    let mut img = Vec::with_capacity(attractor.clouds[kk].len());
                    let mut buf = vec![0.0; k];
                    for x in attractor.clouds[kk].chunks_exact(k) {
                        self.maps[i].apply_into(x, &mut buf);
                        img.extend_from_slice(&buf);
                    }
                    images.push((kk, i, img));
                }
            }
        }
        let mut delta = f64::INFINITY;
        let mut closest = None;
        for a in 0..images.len() {
            for b in (a + 1)..images.len() {
                let (ka, ia, ref pa) = images[a];
                let (kb, ib, ref pb) = images[b];
                let d = cloud_distance(pa, pb, k);
                let slack = (self.maps[ia].upper() + self.maps[ib].upper()) * attractor.residual;
                if d - slack < delta {
                    delta = d - slack;
                    closest = Some(((ka, ia), (kb, ib)));
                }
            }
        }
        SscReport { delta_lo: delta, certified: delta > 0.0, closest_pair: closest }
    }

    /// Open set condition for user-supplied open boxes `U_i`: containment of
    /// `S_i(U_j)` in `U_i` for `p_ji > 0`, and disjointness of `S_i(U_j)` and
    /// `S_i(U_k)` for `j ≠ k` with `p_ji p_ki > 0`.
    pub fn check_osc(&self, open_sets: &[AxisBox]) -> Result<bool> {
        let n = self.len();
        if open_sets.len() != n {
            return Err(Error::WrongCount { expected: n, found: open_sets.len() });
        }
        for u in open_sets {
            if u.dim() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), found: u.dim() });
            }
        }
        for i in 0..n {
            let map = &self.maps[i];
            if matches!(map.kind(), MapKind::UserBounded { .. }) {
                // Images of boxes are not computable for opaque maps.
                return Ok(false);
            }
            let slack = GEOM_SLACK * open_sets[i].scale();
            let preds: Vec<usize> = (0..n).filter(|&j| self.matrix.get(j, i) > 0.0).collect();
            for &j in &preds {
                // Affine images of a box are parallelotopes: corners suffice.
                if !open_sets[j].corners().iter().all(|c| open_sets[i].contains(&map.apply(c), slack)) {
                    return Ok(false);
                }
            }
            // S_i is injective, so S_i(U_j) ∩ S_i(U_k) = S_i(U_j ∩ U_k).
            for (a, &j) in preds.iter().enumerate() {
                for &kk in &preds[a + 1..] {
                    if open_sets[j].open_intersects(&open_sets[kk]) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

fn check_user_bounds(map: &ContractionMap, ambient: &AxisBox, rng: &mut SplitRng) -> Result<()> {
    let k = ambient.dim();
    let (lo, hi) = map.bounds();
    let sample = |rng: &mut SplitRng| -> Point {
        (0..k).map(|a| rng.uniform_in(ambient.lo[a], ambient.hi[a])).collect()
    };
    for _ in 0..DISTORTION_SAMPLES {
        let x = sample(rng);
        let y = sample(rng);
        let d = dist(&x, &y);
        let dm = dist(&map.apply(&x), &map.apply(&y));
        let tol = 1e-9 * d.max(1e-300);
        if dm < lo * d - tol || dm > hi * d + tol {
            return Err(Error::DistortionViolated(0));
        }
    }
    Ok(())
}

/// Minimum Euclidean distance between two flat point clouds.
pub fn cloud_distance(a: &[f64], b: &[f64], k: usize) -> f64 {
    if k == 1 {
        let mut xs: Vec<f64> = a.to_vec();
        let mut ys: Vec<f64> = b.to_vec();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let (mut i, mut j, mut best) = (0, 0, f64::INFINITY);
        while i < xs.len() && j < ys.len() {
            best = best.min((xs[i] - ys[j]).abs());
            if xs[i] < ys[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        return best;
    }
    let mut best = f64::INFINITY;
    for x in a.chunks_exact(k) {
        for y in b.chunks_exact(k) {
            best = best.min(crate::linalg::dist_sq(x, y));
        }
    }
    best.sqrt()
}

/// Hausdorff distance between two flat point clouds (brute force).
pub fn hausdorff_distance(a: &[f64], b: &[f64], k: usize) -> f64 {
    let directed = |a: &[f64], b: &[f64]| {
        a.chunks_exact(k)
            .map(|x| b.chunks_exact(k).map(|y| dist(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SscReport {
    /// Lower bound on the minimum gap between distinct admissible images;
    /// positive certifies separation, nonpositive is inconclusive.
    pub delta_lo: f64,
    pub certified: bool,
    /// The pair `((k, i), (ℓ, j))` attaining the minimum.
    pub closest_pair: Option<((usize, usize), (usize, usize))>,
}

/// Point clouds `Ê_i`, each within `residual` (Hausdorff) of the true
/// component `E_i`, together with per-component anchors and radius bounds.
#[derive(Debug, Clone)]
pub struct AttractorApprox {
    clouds: Vec<Vec<f64>>,
    dim: usize,
    pub depth: usize,
    /// Hausdorff gap bound `(max s̄)^depth · diam(X)`.
    pub residual: f64,
    /// `c_j`: center of the bounding box of `Ê_j`.
    pub anchors: Vec<Point>,
    /// `R_j`: every point of `E_j` lies within `R_j` of `c_j`.
    pub radii: Vec<f64>,
}

impl AttractorApprox {
    fn from_clouds(ifs: &RecurrentIfs, clouds: Vec<Vec<f64>>, depth: usize, k: usize) -> Self {
        let residual = ifs.max_upper().powi(depth as i32) * ifs.ambient().diameter();
        let mut anchors = Vec::with_capacity(clouds.len());
        let mut radii = Vec::with_capacity(clouds.len());
        for cloud in &clouds {
            let mut lo = vec![f64::INFINITY; k];
            let mut hi = vec![f64::NEG_INFINITY; k];
            for z in cloud.chunks_exact(k) {
                for a in 0..k {
                    lo[a] = lo[a].min(z[a]);
                    hi[a] = hi[a].max(z[a]);
                }
            }
            let anchor: Point = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let spread = cloud.chunks_exact(k).map(|z| dist(&anchor, z)).fold(0.0, f64::max);
            radii.push(spread + residual);
            anchors.push(anchor);
        }
        Self { clouds, dim: k, depth, residual, anchors, radii }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.clouds.len()
    }

    /// Flat coordinates of `Ê_i`.
    pub fn cloud(&self, i: usize) -> &[f64] {
        &self.clouds[i]
    }

    pub fn points(&self, i: usize) -> impl Iterator<Item = &[f64]> {
        self.clouds[i].chunks_exact(self.dim)
    }

    /// Per-axis bounding box of `Ê_i`.
    pub fn bounding_box(&self, i: usize) -> (Point, Point) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points(i) {
            for a in 0..self.dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }

    /// Hausdorff distance between `Ê_i` and `⋃_{j: p_ji>0} S_i(Ê_j)`.
    pub fn invariance_residual(&self, ifs: &RecurrentIfs, i: usize) -> Result<f64> {
        let next = ifs.attractor_step(&self.clouds)?;
        Ok(hausdorff_distance(&self.clouds[i], &next[i], self.dim))
    }
}

/// A recurrent system bundled with its attractor approximation: everything
/// needed to place cylinders with rigorous radius bounds.
#[derive(Debug, Clone)]
pub struct System {
    pub ifs: RecurrentIfs,
    pub attractor: AttractorApprox,
}

impl System {
    pub fn new(ifs: RecurrentIfs, depth: usize) -> Result<Self> {
        let attractor = ifs.attractor_components(depth)?;
        Ok(Self { ifs, attractor })
    }

    pub fn dim(&self) -> usize {
        self.ifs.dim()
    }

    pub fn len(&self) -> usize {
        self.ifs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ifs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::*;

    #[test]
    fn distortion_bound_examples() {
        let s = ContractionMap::scaling(1.0 / 3.0, vec![0.0]).unwrap();
        assert_eq!(s.bounds(), (1.0 / 3.0, 1.0 / 3.0));
        let a = ContractionMap::affine(Matrix::diagonal(&[0.25, 1.0 / 3.0]), vec![0.0, 0.0]).unwrap();
        let (lo, hi) = a.bounds();
        assert!((lo - 0.25).abs() < 1e-15 && (hi - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            ContractionMap::affine(Matrix::diagonal(&[0.5, 1.1]), vec![0.0, 0.0]),
            Err(Error::NotContractive { .. })
        ));
        assert!(matches!(ContractionMap::scaling(0.0, vec![0.0]), Err(Error::NotContractive { .. })));
    }

    #[test]
    fn word_contraction_examples() {
        let ifs = two_state_ifs();
        let w = Word::from_one_based(&[1, 2]);
        assert_eq!(ifs.word_contraction(&w).unwrap().0, 0.25);
        // (2,1,2): product s̲_2 · s̲_1 = (1/3)(1/4).
        let w = Word::from_one_based(&[2, 1, 2]);
        let (lo, hi) = ifs.word_contraction(&w).unwrap();
        assert!((lo - 1.0 / 12.0).abs() < 1e-16 && (hi - 1.0 / 12.0).abs() < 1e-16);
        // (1,1,2) is inadmissible there (p_11 = 0); use the all-1/2 Cantor system.
        assert_eq!(ifs.word_contraction(&Word::from_one_based(&[1, 1, 2])), Err(Error::InadmissibleWord));
        let mixed = mixed_full_ifs();
        let (lo, _) = mixed.word_contraction(&Word::from_one_based(&[1, 1, 2])).unwrap();
        assert!((lo - 1.0 / 16.0).abs() < 1e-16);
    }

    #[test]
    fn cantor_attractor_endpoints() {
        let ifs = cantor_ifs();
        let att = ifs.attractor_components(8).unwrap();
        let all: Vec<f64> = (0..2).flat_map(|i| att.cloud(i).to_vec()).collect();
        let min = all.iter().copied().fold(f64::INFINITY, f64::min);
        let max = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = 3f64.powi(-8);
        assert!(min.abs() <= tol && (1.0 - max).abs() <= tol);
        assert!(all.iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert_eq!(ifs.attractor_components(0).unwrap_err(), Error::DepthZero);
    }

    #[test]
    fn attractor_boxes_nest_within_residual() {
        let ifs = cantor_ifs();
        for d in 1..8 {
            let a = ifs.attractor_components(d).unwrap();
            let b = ifs.attractor_components(d + 1).unwrap();
            for i in 0..2 {
                let (alo, ahi) = a.bounding_box(i);
                let (blo, bhi) = b.bounding_box(i);
                assert!(blo[0] >= alo[0] - a.residual && bhi[0] <= ahi[0] + a.residual);
            }
        }
    }

    #[test]
    fn invariance_residual_is_bounded() {
        for ifs in [cantor_ifs(), two_state_ifs(), affine_ifs()] {
            for depth in [2, 4, 5] {
                let att = ifs.attractor_components(depth).unwrap();
                let bound = 2.0 * ifs.max_upper().powi(depth as i32) * ifs.ambient().diameter();
                for i in 0..ifs.len() {
                    assert!(att.invariance_residual(&ifs, i).unwrap() <= bound);
                }
            }
        }
    }

    #[test]
    fn ssc_examples() {
        let ifs = cantor_ifs();
        let att = ifs.attractor_components(8).unwrap();
        let rep = ifs.check_ssc(&att);
        // Closest admissible images are S_1(E_1) ⊂ [0, 1/9] and S_1(E_2) ⊂ [2/9, 1/3].
        assert!(rep.certified);
        assert!(rep.delta_lo > 1.0 / 9.0 - 4.0 * 3f64.powi(-8) && rep.delta_lo <= 1.0 / 9.0 + 1e-12);

        let overlap = overlapping_ifs();
        let att = overlap.attractor_components(6).unwrap();
        let rep = overlap.check_ssc(&att);
        assert!(!rep.certified && rep.delta_lo <= 0.0);
    }

    #[test]
    fn ssc_skips_forbidden_pairs() {
        // In the two-state system S_1 only receives from E_2, so S_1(E_1)
        // never enters the minimum.
        let ifs = two_state_ifs();
        let att = ifs.attractor_components(10).unwrap();
        let rep = ifs.check_ssc(&att);
        assert!(rep.certified);
        let ((k, i), (l, j)) = rep.closest_pair.unwrap();
        assert!(ifs.matrix().get(k, i) > 0.0 && ifs.matrix().get(l, j) > 0.0);
    }

    #[test]
    fn osc_examples() {
        let ifs = cantor_ifs();
        let unit = AxisBox::new(vec![0.0], vec![1.0]).unwrap();
        let third = AxisBox::new(vec![0.0], vec![1.0 / 3.0]).unwrap();
        let last = AxisBox::new(vec![2.0 / 3.0], vec![1.0]).unwrap();
        assert!(ifs.check_osc(&[third.clone(), last.clone()]).unwrap());
        // S_1(U_1) = S_1(U_2) when U_1 = U_2, so the images are not disjoint.
        assert!(!ifs.check_osc(&[unit.clone(), unit.clone()]).unwrap());
        assert_eq!(ifs.check_osc(&[unit.clone()]), Err(Error::WrongCount { expected: 2, found: 1 }));
        let overlap = overlapping_ifs();
        assert!(!overlap.check_osc(&[unit.clone(), unit]).unwrap());
    }

    #[test]
    fn ssc_implies_osc_with_box_neighbourhoods() {
        for ifs in [cantor_ifs(), two_state_ifs(), affine_ifs()] {
            let att = ifs.attractor_components(6).unwrap();
            let rep = ifs.check_ssc(&att);
            assert!(rep.certified);
            let pad = rep.delta_lo / 3.0;
            let boxes: Vec<AxisBox> = (0..ifs.len())
                .map(|i| {
                    let (lo, hi) = att.bounding_box(i);
                    AxisBox::new(
                        lo.iter().map(|v| v - att.residual - pad).collect(),
                        hi.iter().map(|v| v + att.residual + pad).collect(),
                    )
                    .unwrap()
                })
                .collect();
            assert!(ifs.check_osc(&boxes).unwrap());
        }
    }

    #[test]
    fn user_bounded_maps_are_sampled() {
        let good: MapFn = Arc::new(|x: &[f64], out: &mut [f64]| out[0] = 0.3 * x[0]);
        let liar: MapFn = Arc::new(|x: &[f64], out: &mut [f64]| out[0] = 0.6 * x[0]);
        let m = crate::markov::StochasticMatrix::validate(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let ambient = AxisBox::new(vec![0.0], vec![1.0]).unwrap();
        let other = ContractionMap::scaling(0.3, vec![0.7]).unwrap();
        let ok = ContractionMap::user_bounded(1, good, 0.29, 0.31).unwrap();
        assert!(RecurrentIfs::new(vec![ok, other.clone()], m.clone(), ambient.clone()).is_ok());
        let bad = ContractionMap::user_bounded(1, liar, 0.29, 0.31).unwrap();
        assert_eq!(
            RecurrentIfs::new(vec![bad, other], m, ambient).unwrap_err(),
            Error::DistortionViolated(0)
        );
    }

    #[test]
    fn rejects_maps_leaving_the_box() {
        let m = crate::markov::StochasticMatrix::validate(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let ambient = AxisBox::new(vec![0.0], vec![1.0]).unwrap();
        let a = ContractionMap::scaling(0.5, vec![0.0]).unwrap();
        let b = ContractionMap::scaling(0.5, vec![0.9]).unwrap();
        assert_eq!(RecurrentIfs::new(vec![a, b], m, ambient).unwrap_err(), Error::MapLeavesAmbient(1));
    }
}

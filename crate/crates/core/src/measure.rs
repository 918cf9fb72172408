//! Cylinder geometry, rigorous ball-measure enclosures, discretization and
//! the Frostman-type growth bound.
//!
//! A cylinder `E_ω = S_ω(E_{ω_n})` is placed at `x_ω = S_ω(c_{ω_n})` with
//! radius `r_ω = s̄_ω R_{ω_n}`, so `E_ω ⊂ B(x_ω, r_ω)` and `μ(E_ω) = p_ω`.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
#[allow(unused_imports)] // unused when another crate in the graph links std
use num_traits::Float;

use crate::ifs::{RecurrentIfs, System};
use crate::linalg::{dist, Matrix};
use crate::stats::{linear_fit, pairwise_sum, CompensatedSum};
use crate::symbolic::{chaos_game, Word};
use crate::{Error, Point, Result};

/// Default absolute gap for ball-measure enclosures.
pub const DEFAULT_TOL_GAP: f64 = 1e-3;
/// Default maximal word length during refinement.
pub const DEFAULT_DEPTH_CAP: usize = 40;

/// Relative inflation of cylinder radii covering floating-point error in
/// the composed maps.
const RADIUS_SLACK: f64 = 1e-12;

/// Which measure is being described: `μ` itself or the normalized
/// restriction `μ̂_i = μ(· ∩ E_i)/μ(E_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Full,
    Component(usize),
}

#[derive(Debug, Clone)]
pub struct Cylinder {
    pub word: Word,
    /// `p_ω`, rescaled by `1/p_i` for a component target.
    pub weight: f64,
    pub s_lo: f64,
    pub s_hi: f64,
    pub center: Point,
    pub radius: f64,
    /// Composed linear part and offset of `S_ω` when every map is affine.
    lin: Vec<f64>,
    off: Vec<f64>,
}

/// Generates cylinders top-down, composing affine maps incrementally.
#[derive(Debug, Clone)]
pub struct CylinderTree<'a> {
    sys: &'a System,
    affine: Option<Vec<(Matrix, Vec<f64>)>>,
    slack: f64,
}

impl<'a> CylinderTree<'a> {
    pub fn new(sys: &'a System) -> Self {
        let affine = sys
            .ifs
            .maps()
            .iter()
            .map(|m| {
                let lin = m.linear_part()?;
                let off = m.apply(&vec![0.0; m.dim()]);
                Some((lin, off))
            })
            .collect();
        let scale = sys.ifs.ambient().lo.iter().chain(&sys.ifs.ambient().hi).fold(1.0f64, |a, v| a.max(v.abs()));
        Self { sys, affine, slack: 64.0 * f64::EPSILON * scale }
    }

    pub fn system(&self) -> &System {
        self.sys
    }

    fn ifs(&self) -> &RecurrentIfs {
        &self.sys.ifs
    }

    fn radius(&self, s_hi: f64, last: usize) -> f64 {
        s_hi * self.sys.attractor.radii[last] * (1.0 + RADIUS_SLACK) + self.slack
    }

    pub fn root(&self, j: usize, weight: f64) -> Cylinder {
        let k = self.sys.dim();
        let mut lin = vec![0.0; if self.affine.is_some() { k * k } else { 0 }];
        if self.affine.is_some() {
            for a in 0..k {
                lin[a * k + a] = 1.0;
            }
        }
        let off = vec![0.0; if self.affine.is_some() { k } else { 0 }];
        Cylinder {
            word: Word::letter(j),
            weight,
            s_lo: 1.0,
            s_hi: 1.0,
            center: self.sys.attractor.anchors[j].clone(),
            radius: self.radius(1.0, j),
            lin,
            off,
        }
    }

    /// Length-one cylinders of the target measure.
    pub fn roots(&self, target: Target) -> Vec<Cylinder> {
        match target {
            Target::Full => {
                (0..self.sys.len()).map(|j| self.root(j, self.ifs().stationary().p[j])).collect()
            }
            Target::Component(i) => vec![self.root(i, 1.0)],
        }
    }

    /// Admissible one-letter extensions `ωj`, in increasing `j`.
    pub fn children(&self, c: &Cylinder, out: &mut Vec<Cylinder>) {
        let ifs = self.ifs();
        let n = ifs.len();
        let k = ifs.dim();
        let last = c.word.last();
        let p = &ifs.stationary().p;
        let map = ifs.map(last);
        let s_lo = c.s_lo * map.lower();
        let s_hi = c.s_hi * map.upper();
        let (lin, off) = match &self.affine {
            Some(aff) => {
                let (a, b) = &aff[last];
                let mut lin = vec![0.0; k * k];
                let mut off = c.off.clone();
                for r in 0..k {
                    for col in 0..k {
                        lin[r * k + col] = (0..k).map(|m| c.lin[r * k + m] * a[(m, col)]).sum();
                    }
                    off[r] += (0..k).map(|m| c.lin[r * k + m] * b[m]).sum::<f64>();
                }
                (lin, off)
            }
            None => (Vec::new(), Vec::new()),
        };
        for j in 0..n {
            let step = ifs.word_step(last, j);
            if step <= 0.0 {
                continue;
            }
            let word = c.word.child(j);
            let anchor = &self.sys.attractor.anchors[j];
            let center = if self.affine.is_some() {
                (0..k).map(|r| off[r] + (0..k).map(|m| lin[r * k + m] * anchor[m]).sum::<f64>()).collect()
            } else {
                ifs.apply_word(&word, anchor)
            };
            out.push(Cylinder {
                weight: c.weight * p[j] * step / p[last],
                s_lo,
                s_hi,
                center,
                radius: self.radius(s_hi, j),
                lin: lin.clone(),
                off: off.clone(),
                word,
            });
        }
    }

    /// Cylinder of an explicit admissible word.
    pub fn cylinder(&self, word: &Word) -> Result<Cylinder> {
        word.check_admissible(self.ifs().matrix())?;
        let mut cur = self.root(word.first(), self.ifs().stationary().p[word.first()]);
        let mut buf = Vec::new();
        for &l in &word.letters()[1..] {
            buf.clear();
            self.children(&cur, &mut buf);
            cur = buf.drain(..).find(|c| c.word.last() == l as usize).ok_or(Error::InadmissibleWord)?;
        }
        Ok(cur)
    }

    /// Cells `{σ : w_{σ⁻} ≥ ε > w_σ}` of the target measure, sorted by word.
    /// A root lighter than `ε` is its own cell.
    pub fn antichain_cells(&self, target: Target, eps: f64) -> Result<Vec<Cylinder>> {
        let mut out = Vec::new();
        let mut stack: Vec<Cylinder> = self.roots(target);
        stack.reverse();
        let mut buf = Vec::new();
        while let Some(c) = stack.pop() {
            if c.weight < eps {
                out.push(c);
                continue;
            }
            if c.word.len() >= crate::symbolic::MAX_WORD_LEN {
                return Err(Error::DepthCapExceeded(crate::symbolic::MAX_WORD_LEN));
            }
            buf.clear();
            self.children(&c, &mut buf);
            stack.extend(buf.drain(..).rev());
        }
        out.sort_by(|a, b| a.word.cmp(&b.word));
        Ok(out)
    }
}

/// Weighted point mass located at a cylinder center.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub x: Point,
    pub weight: f64,
    pub radius: f64,
    pub word: Word,
}

/// Finitely supported approximation of a self-similar measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteApprox {
    pub atoms: Vec<Atom>,
    pub dim: usize,
}

impl DiscreteApprox {
    pub fn from_cells(cells: Vec<Cylinder>, dim: usize) -> Self {
        let atoms = cells
            .into_iter()
            .map(|c| Atom { x: c.center, weight: c.weight, radius: c.radius, word: c.word })
            .collect();
        Self { atoms, dim }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.atoms.iter().map(|a| a.weight).collect::<Vec<_>>())
    }
}

/// Atoms at the centers of an explicit antichain of words.
pub fn discretize(sys: &System, words: &[Word]) -> Result<DiscreteApprox> {
    let tree = CylinderTree::new(sys);
    let cells = words.iter().map(|w| tree.cylinder(w)).collect::<Result<Vec<_>>>()?;
    Ok(DiscreteApprox::from_cells(cells, sys.dim()))
}

/// Discretization of the target measure at cell weight `ε`.
pub fn discretize_at(sys: &System, target: Target, eps: f64) -> Result<DiscreteApprox> {
    let cells = CylinderTree::new(sys).antichain_cells(target, eps)?;
    Ok(DiscreteApprox::from_cells(cells, sys.dim()))
}

/// `lo ≤ μ(B(x, r)) ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMeasureEnclosure {
    pub lo: f64,
    pub hi: f64,
    pub depth_used: usize,
}

impl BallMeasureEnclosure {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

pub(crate) struct HeapItem {
    pub key: f64,
    pub seq: u64,
    pub cyl: Cylinder,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    // Largest key first; ties go to the earliest sequence number.
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Encloses `μ(B(x, r))` (closed ball) to within `tol_gap`.
pub fn ball_measure(sys: &System, x: &[f64], r: f64, tol_gap: f64, depth_cap: usize) -> Result<BallMeasureEnclosure> {
    ball_measure_until(sys, Target::Full, x, r, depth_cap, |lo, hi| hi - lo <= tol_gap)
}

/// Refines boundary cylinders heaviest-first until `stop(lo, hi)` holds.
/// Cylinders at `depth_cap` stay unresolved; if they alone prevent stopping
/// the partial enclosure is returned inside [`Error::DepthCapReached`].
pub fn ball_measure_until(
    sys: &System,
    target: Target,
    x: &[f64],
    r: f64,
    depth_cap: usize,
    stop: impl Fn(f64, f64) -> bool,
) -> Result<BallMeasureEnclosure> {
    if x.len() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: x.len() });
    }
    let tree = CylinderTree::new(sys);
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut inside = CompensatedSum::default();
    let mut pending = CompensatedSum::default();
    let mut stuck = CompensatedSum::default();
    let mut depth_used = 1;
    let mut classify = |c: Cylinder, heap: &mut BinaryHeap<HeapItem>, inside: &mut CompensatedSum, pending: &mut CompensatedSum| {
        let d = dist(x, &c.center);
        if d + c.radius <= r {
            inside.add(c.weight);
        } else if d - c.radius <= r {
            pending.add(c.weight);
            heap.push(HeapItem { key: c.weight, seq, cyl: c });
            seq += 1;
        }
    };
    for c in tree.roots(target) {
        classify(c, &mut heap, &mut inside, &mut pending);
    }
    let mut buf = Vec::new();
    loop {
        let lo = inside.value();
        if stop(lo, lo + pending.value().max(0.0) + stuck.value()) {
            break;
        }
        let Some(item) = heap.pop() else { break };
        pending.add(-item.key);
        if item.cyl.word.len() >= depth_cap {
            stuck.add(item.key);
            continue;
        }
        buf.clear();
        tree.children(&item.cyl, &mut buf);
        for c in buf.drain(..) {
            depth_used = depth_used.max(c.word.len());
            classify(c, &mut heap, &mut inside, &mut pending);
        }
    }
    let lo = inside.value();
    let open: Vec<f64> = heap.iter().map(|h| h.key).collect();
    let hi = lo + pairwise_sum(&open) + stuck.value();
    let enc = BallMeasureEnclosure { lo, hi, depth_used };
    if heap.is_empty() && stuck.value() > 0.0 && !stop(lo, hi) {
        return Err(Error::DepthCapReached(enc));
    }
    Ok(enc)
}

/// `η = log P_max / log s_min` with `P_max = max p_ij` and `s_min = min s̲_i`.
///
/// When some row is deterministic (`P_max = 1`) the per-step maximum is
/// replaced by `θ = min_k (max k-step path probability)^{1/k}` over
/// `k ≤ N`, which bounds `P_ω` for long words in the same way.
pub fn frostman_exponent(ifs: &RecurrentIfs) -> Result<f64> {
    let n = ifs.len();
    let s_min = ifs.min_lower();
    let mut best = ifs.matrix().max_entry();
    if best >= 1.0 {
        // best_path[j] = max probability of a k-step path ending at j.
        let mut paths = vec![1.0f64; n];
        for k in 1..=n {
            let next: Vec<f64> = (0..n)
                .map(|j| (0..n).map(|i| paths[i] * ifs.matrix().get(i, j)).fold(0.0, f64::max))
                .collect();
            paths = next;
            let m = paths.iter().copied().fold(0.0, f64::max);
            best = best.min(m.powf(1.0 / k as f64));
        }
    }
    if best >= 1.0 {
        return Err(Error::NoFrostmanConstant);
    }
    Ok(best.ln() / s_min.ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrostmanRow {
    pub eps: f64,
    /// Largest upper enclosure of `μ(B(x, ε))` over sample points.
    pub max_hi: f64,
    /// `max_hi / ε^η`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrostmanReport {
    pub eta: f64,
    pub rows: Vec<FrostmanRow>,
    pub max_ratio: f64,
    /// Working constant `Ĉ = 2 · max ratio`.
    pub constant: f64,
    /// Slope of `log ratio` against `log ε`; strongly negative values mean
    /// the ratio blows up as `ε → 0`.
    pub trend_slope: f64,
}

/// Estimates the constant in `μ(B(x, ε)) ≤ C ε^η` on chaos-game samples.
pub fn frostman_check(
    sys: &System,
    sample_count: usize,
    eps_grid: &[f64],
    seed: u64,
    depth_cap: usize,
) -> Result<FrostmanReport> {
    let eta = frostman_exponent(&sys.ifs)?;
    let burnin = 1000;
    let traj = chaos_game(sys, sample_count + burnin, burnin, seed)?;
    let mut rows = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let scale = eps.powf(eta);
        let mut max_hi = 0.0f64;
        for m in 0..traj.len() {
            let enc = match ball_measure(sys, traj.point(m), eps, 0.02 * scale, depth_cap) {
                Ok(e) => e,
                Err(Error::DepthCapReached(e)) => e,
                Err(e) => return Err(e),
            };
            max_hi = max_hi.max(enc.hi);
        }
        rows.push(FrostmanRow { eps, max_hi, ratio: max_hi / scale });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let xs: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
    let trend_slope = linear_fit(&xs, &ys).map_or(0.0, |f| f.slope);
    Ok(FrostmanReport { eta, rows, max_ratio, constant: 2.0 * max_ratio, trend_slope })
}

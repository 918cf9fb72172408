use alloc::vec::Vec;

use crate::ifs::System;
use crate::linalg::dist;
use crate::measure::{Cylinder, CylinderTree, Target};
use crate::symbolic::Word;
use crate::{Error, Point, Result};

/// A finite set of distinct quantization points.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Codebook {
    points: Vec<Point>,
    dim: usize,
    /// For one-dimensional codebooks: indices sorted by coordinate.
    #[cfg_attr(feature = "serde", serde(skip))]
    order: Vec<usize>,
}

impl Codebook {
    /// Drops exact duplicates, keeping first occurrences.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyCodebook)?.len();
        let mut kept: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("codebook point is not finite"));
            }
            if !kept.contains(&p) {
                kept.push(p);
            }
        }
        let mut cb = Self { points: kept, dim, order: Vec::new() };
        cb.index();
        Ok(cb)
    }

    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| alloc::vec![x]).collect())
    }

    fn index(&mut self) {
        if self.dim == 1 {
            let mut order: Vec<usize> = (0..self.points.len()).collect();
            order.sort_by(|&a, &b| self.points[a][0].total_cmp(&self.points[b][0]).then(a.cmp(&b)));
            self.order = order;
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Codebook with one more point; a duplicate leaves it unchanged.
    pub fn with_point(&self, p: Point) -> Result<Self> {
        let mut pts = self.points.clone();
        pts.push(p);
        Self::new(pts)
    }

    /// Nearest point `(index, distance)`; ties go to the lowest index.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        if self.dim == 1 {
            let v = x[0];
            let pos = self.order.partition_point(|&i| self.points[i][0] < v);
            let mut best = (usize::MAX, f64::INFINITY);
            let mut consider = |i: usize| {
                let d = (self.points[i][0] - v).abs();
                if d < best.1 || (d == best.1 && i < best.0) {
                    best = (i, d);
                }
            };
            // Equal coordinates cannot occur after deduplication, so the two
            // neighbours of the insertion point are the only candidates.
            if pos < self.order.len() {
                consider(self.order[pos]);
            }
            if pos > 0 {
                consider(self.order[pos - 1]);
            }
            return best;
        }
        let mut best = (0, f64::INFINITY);
        for (i, a) in self.points.iter().enumerate() {
            let d = dist(x, a);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Distances `d(x, a)` for all points with `d(x, a) < radius`.
    pub fn distances_within(&self, x: &[f64], radius: f64, out: &mut Vec<f64>) {
        out.clear();
        if self.dim == 1 {
            let v = x[0];
            let start = self.order.partition_point(|&i| self.points[i][0] <= v - radius);
            for &i in &self.order[start..] {
                let d = self.points[i][0] - v;
                if d >= radius {
                    break;
                }
                out.push(d.abs());
            }
            return;
        }
        out.extend(self.points.iter().map(|a| dist(x, a)).filter(|&d| d < radius));
    }
}

/// One point per cell of the finest probability antichain
/// `Γ(ε) = {σ : w_{σ⁻} ≥ ε > w_σ}` of the target measure that has at most
/// `n` cells. Antichains are produced in order of decreasing `ε` by splitting
/// every cell of maximal weight, so each step is again some `Γ(ε)`.
pub fn antichain_codebook(sys: &System, target: Target, n: usize) -> Result<(Codebook, Vec<Word>)> {
    let tree = CylinderTree::new(sys);
    let mut cells = tree.roots(target);
    if n < cells.len() {
        return Err(Error::BudgetTooSmall { budget: n, needed: cells.len() });
    }
    let mut buf = Vec::new();
    'refine: loop {
        let level = cells.iter().map(|c| c.weight).fold(0.0, f64::max);
        let mut trial: Vec<Cylinder> = Vec::with_capacity(cells.len() * 2);
        let mut stack: Vec<Cylinder> = Vec::new();
        for c in &cells {
            if c.weight >= level {
                stack.push(c.clone());
            } else {
                trial.push(c.clone());
            }
        }
        // Children can keep their parent's full weight, so splitting repeats
        // until every piece is strictly lighter than the level.
        while let Some(c) = stack.pop() {
            if c.word.len() >= crate::symbolic::MAX_WORD_LEN {
                break 'refine;
            }
            buf.clear();
            tree.children(&c, &mut buf);
            for ch in buf.drain(..) {
                if ch.weight >= level {
                    stack.push(ch);
                } else {
                    trial.push(ch);
                }
            }
            if trial.len() + stack.len() > n {
                break 'refine;
            }
        }
        cells = trial;
    }
    cells.sort_by(|a, b| a.word.cmp(&b.word));
    let words = cells.iter().map(|c| c.word.clone()).collect();
    let cb = Codebook::new(cells.into_iter().map(|c| c.center).collect())?;
    Ok((cb, words))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::*;

    #[test]
    fn duplicates_are_pruned() {
        let cb = Codebook::from_scalars(&[0.5, 0.25, 0.5]).unwrap();
        assert_eq!(cb.len(), 2);
        assert_eq!(Codebook::new(Vec::new()), Err(Error::EmptyCodebook));
    }

    #[test]
    fn nearest_prefers_lowest_index_on_ties() {
        let cb = Codebook::from_scalars(&[0.75, 0.25]).unwrap();
        assert_eq!(cb.nearest(&[0.5]), (0, 0.25));
        assert_eq!(cb.nearest(&[0.1]).0, 1);
        let cb2 = Codebook::new(alloc::vec![alloc::vec![1.0, 0.0], alloc::vec![-1.0, 0.0]]).unwrap();
        assert_eq!(cb2.nearest(&[0.0, 1.0]).0, 0);
    }

    #[test]
    fn one_dimensional_nearest_matches_scan() {
        let xs = [0.9, 0.1, 0.33, 0.5, 0.72];
        let cb = Codebook::from_scalars(&xs).unwrap();
        for k in 0..=100 {
            let v = k as f64 / 100.0;
            let scan = xs.iter().map(|a| (a - v).abs()).fold(f64::INFINITY, f64::min);
            assert_eq!(cb.nearest(&[v]).1, scan);
            let mut near = Vec::new();
            cb.distances_within(&[v], 0.2, &mut near);
            assert_eq!(near.len(), xs.iter().filter(|a| (*a - v).abs() < 0.2).count());
        }
    }

    #[test]
    fn antichain_codebook_sizes() {
        let sys = System::new(cantor_ifs(), 8).unwrap();
        let (cb, words) = antichain_codebook(&sys, Target::Full, 4).unwrap();
        assert_eq!(cb.len(), 4);
        assert!(words.iter().all(|w| w.len() == 2));
        let (cb5, _) = antichain_codebook(&sys, Target::Full, 5).unwrap();
        assert_eq!(cb5, cb);
        let (cb8, _) = antichain_codebook(&sys, Target::Full, 8).unwrap();
        assert_eq!(cb8.len(), 8);
        assert_eq!(antichain_codebook(&sys, Target::Full, 1), Err(Error::BudgetTooSmall { budget: 1, needed: 2 }));
    }

    #[test]
    fn antichain_codebook_respects_budget() {
        for ifs in [two_state_ifs(), affine_ifs()] {
            let sys = System::new(ifs, 6).unwrap();
            for n in [3, 5, 10, 17, 40] {
                let (cb, words) = antichain_codebook(&sys, Target::Full, n).unwrap();
                assert!(cb.len() <= n && words.len() <= n);
                let ac = crate::symbolic::Antichain {
                    kind: crate::symbolic::AntichainKind::Probability,
                    eps: 0.0,
                    weights: Vec::new(),
                    words,
                };
                // Words of length one count as their own cell.
                let total: f64 = ac
                    .words
                    .iter()
                    .map(|w| crate::symbolic::word_probability(&sys.ifs, w).unwrap().p_word)
                    .sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }
}

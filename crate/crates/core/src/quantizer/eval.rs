use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
#[allow(unused_imports)] // unused when another crate in the graph links std
use num_traits::Float;

use super::Codebook;
use crate::ifs::System;
use crate::measure::{Cylinder, CylinderTree, Target};
use crate::stats::{pairwise_sum, CompensatedSum};
use crate::{Error, Result};

/// `μ(B(x, ρ)) ≤ C ρ^η` for all `x` and `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailBound {
    pub constant: f64,
    pub eta: f64,
}

/// `lo ≤ ∫ log d(x, γ) dμ(x) ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorEnclosure {
    pub lo: f64,
    pub hi: f64,
    pub refined_cylinders: usize,
}

impl ErrorEnclosure {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Upper bound on `∫_E log⁺(t / d(x, a)) dμ` for a set `E` of mass `w`
/// when `μ(E ∩ B(a, ρ)) ≤ min(w, C ρ^η)`.
///
/// By the layer-cake formula the integral is `∫_0^∞ μ(E ∩ B(a, t e^{−u})) du`
/// `≤ ∫_0^∞ min(w, K e^{−ηu}) du` with `K = C t^η`, which is `K/η` when
/// `K ≤ w` and `w (u₀ + 1/η)` with `u₀ = log(K/w)/η` otherwise.
pub fn tail_integral_bound(weight: f64, t: f64, tail: TailBound) -> f64 {
    let k = tail.constant * t.powf(tail.eta);
    if k <= weight {
        k / tail.eta
    } else {
        weight * ((k / weight).ln() / tail.eta + 1.0 / tail.eta)
    }
}

struct Item {
    width: f64,
    seq: u64,
    lo: f64,
    hi: f64,
    cyl: Cylinder,
}

impl PartialEq for Item {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width.total_cmp(&other.width).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Encloses `∫ log d(x, γ) dμ̃` for the target measure `μ̃`.
///
/// Each cylinder contributes between `w log(d − r)` and `w log(d + r)` where
/// `d` is the distance from its center to `γ` and `r` its radius. Cylinders
/// with `d ≤ 2r` and the widest resolved ones are split until the total
/// width is at most `tol_gap`. A cylinder still unresolved at `depth_cap`
/// is bounded below through [`tail_integral_bound`]; without a tail bound
/// that is an error.
pub fn eval_log_error(
    sys: &System,
    codebook: &Codebook,
    target: Target,
    tol_gap: f64,
    depth_cap: usize,
    tail: Option<TailBound>,
) -> Result<ErrorEnclosure> {
    if codebook.dim() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), found: codebook.dim() });
    }
    // The restriction to E_i is normalized by 1/p_i, which scales the
    // Frostman constant the same way.
    let tail = tail.map(|t| match target {
        Target::Full => t,
        Target::Component(i) => TailBound { constant: t.constant / sys.ifs.stationary().p[i], eta: t.eta },
    });
    let tree = CylinderTree::new(sys);
    let mut heap: BinaryHeap<Item> = BinaryHeap::new();
    let mut seq = 0u64;
    let mut unresolved = 0usize;
    let mut open_width = CompensatedSum::default();
    let mut done_lo: Vec<f64> = Vec::new();
    let mut done_hi: Vec<f64> = Vec::new();
    let mut done_width = CompensatedSum::default();
    let mut near = Vec::new();
    let mut refined = 0usize;

    let mut push = |c: Cylinder, heap: &mut BinaryHeap<Item>, unresolved: &mut usize, open: &mut CompensatedSum| {
        let (_, d) = codebook.nearest(&c.center);
        let (w, r) = (c.weight, c.radius);
        let hi = w * (d + r).ln();
        let (lo, width) = if d > 2.0 * r {
            let lo = w * (d - r).ln();
            (lo, hi - lo)
        } else {
            *unresolved += 1;
            (f64::NEG_INFINITY, f64::INFINITY)
        };
        if width.is_finite() {
            open.add(width);
        }
        heap.push(Item { width, seq, lo, hi, cyl: c });
        seq += 1;
    };
    for c in tree.roots(target) {
        push(c, &mut heap, &mut unresolved, &mut open_width);
    }
    let mut buf = Vec::new();
    while unresolved > 0 || open_width.value() + done_width.value() > tol_gap {
        let Some(item) = heap.pop() else { break };
        if item.width.is_finite() {
            open_width.add(-item.width);
        } else {
            unresolved -= 1;
        }
        if item.cyl.word.len() >= depth_cap {
            let (lo, hi) = if item.width.is_finite() {
                (item.lo, item.hi)
            } else {
                let tail = tail.ok_or(Error::NoFrostmanConstant)?;
                capped_bounds(codebook, &item.cyl, tail, &mut near)
            };
            done_lo.push(lo);
            done_hi.push(hi);
            done_width.add(hi - lo);
            continue;
        }
        refined += 1;
        buf.clear();
        tree.children(&item.cyl, &mut buf);
        for c in buf.drain(..) {
            push(c, &mut heap, &mut unresolved, &mut open_width);
        }
    }
    // Sum in word order so the result does not depend on heap layout.
    let mut rest: Vec<Item> = heap.into_vec();
    rest.sort_by(|a, b| a.cyl.word.cmp(&b.cyl.word));
    done_lo.extend(rest.iter().map(|i| i.lo));
    done_hi.extend(rest.iter().map(|i| i.hi));
    Ok(ErrorEnclosure { lo: pairwise_sum(&done_lo), hi: pairwise_sum(&done_hi), refined_cylinders: refined })
}

fn capped_bounds(codebook: &Codebook, c: &Cylinder, tail: TailBound, near: &mut Vec<f64>) -> (f64, f64) {
    let (_, d) = codebook.nearest(&c.center);
    let (w, r) = (c.weight, c.radius);
    let t = d + r;
    // Points a whose ball B(a, t) can meet B(x_σ, r).
    codebook.distances_within(&c.center, t + r, near);
    let mut lo = w * t.ln() - near.len() as f64 * tail_integral_bound(w, t, tail);
    if d > r {
        lo = lo.max(w * (d - r).ln());
    }
    (lo, w * t.ln())
}

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // unused when another crate in the graph links std
use num_traits::Float;

use super::{eval_log_error, Codebook, ErrorEnclosure, QuantSettings};
use crate::ifs::System;
use crate::linalg::{dist, dist_sq};
use crate::measure::{discretize_at, DiscreteApprox, Target};
use crate::rng::SplitRng;
use crate::stats::{median, pairwise_sum};
use crate::{Error, Point, Result};

/// `Σ w log max(d(x, γ), δ)` over the atoms.
pub fn surrogate_objective(approx: &DiscreteApprox, codebook: &Codebook, delta: f64) -> f64 {
    let terms: Vec<f64> =
        approx.atoms.iter().map(|a| a.weight * codebook.nearest(&a.x).1.max(delta).ln()).collect();
    pairwise_sum(&terms)
}

/// Floor used by the optimizers for a discretization.
pub(crate) fn floor_for(approx: &DiscreteApprox, floor_factor: f64) -> f64 {
    let radii: Vec<f64> = approx.atoms.iter().map(|a| a.radius).collect();
    (floor_factor * median(&radii)).max(f64::MIN_POSITIVE)
}

/// Discretization at cell weight `1/(atoms_per_cell · n)`.
pub(crate) fn working_approx(sys: &System, target: Target, n: usize, atoms_per_cell: usize) -> Result<DiscreteApprox> {
    discretize_at(sys, target, 1.0 / (atoms_per_cell.max(1) * n) as f64)
}

fn nearest_index(points: &[Point], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, a) in points.iter().enumerate() {
        let d = dist_sq(x, a);
        if d < best.1 {
            best = (i, d);
        }
    }
    (best.0, best.1.sqrt())
}

/// Weighted `D²` seeding over the atoms.
fn seed_points(approx: &DiscreteApprox, n: usize, rng: &mut SplitRng, init: Vec<Point>) -> Vec<Point> {
    let mut pts = init;
    pts.truncate(n);
    let target = n.min(approx.len());
    while pts.len() < target {
        let weights: Vec<f64> = if pts.is_empty() {
            approx.atoms.iter().map(|a| a.weight).collect()
        } else {
            approx.atoms.iter().map(|a| a.weight * nearest_index(&pts, &a.x).1.powi(2)).collect()
        };
        if weights.iter().all(|&w| w <= 0.0) {
            break;
        }
        let pick = rng.pick_weighted(&weights);
        pts.push(approx.atoms[pick].x.clone());
    }
    pts
}

/// Alternating Voronoi assignment and per-cell fixed-point updates
/// `a ← Σ (w/d̃²) x / Σ (w/d̃²)` with `d̃ = max(d, δ)`, the majorize-minimize
/// step for `Σ w log d̃` within a cell.
#[cfg(test)]
pub(crate) fn lloyd_iterate(approx: &DiscreteApprox, pts: Vec<Point>, delta: f64, max_iters: usize) -> Vec<Point> {
    lloyd_until(approx, pts, delta, max_iters, 1e-13)
}

/// Runs the fixed-point iteration with a floor that starts near the cell
/// scale and halves down to `delta`. A small floor from the start pins
/// every point to the atom it was seeded on; the coarse levels let points
/// travel first.
pub(crate) fn lloyd_annealed(approx: &DiscreteApprox, mut pts: Vec<Point>, delta: f64, max_iters: usize) -> Vec<Point> {
    let k = approx.dim;
    let mut lo = vec![f64::INFINITY; k];
    let mut hi = vec![f64::NEG_INFINITY; k];
    for a in &approx.atoms {
        for q in 0..k {
            lo[q] = lo[q].min(a.x[q]);
            hi[q] = hi[q].max(a.x[q]);
        }
    }
    let diam = lo.iter().zip(&hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt();
    let mut level = (diam / (2.0 * (pts.len() as f64).powf(1.0 / k as f64))).max(delta);
    while level > delta {
        pts = lloyd_until(approx, pts, level, max_iters, 1e-6 * level);
        level = (0.5 * level).max(delta);
    }
    lloyd_until(approx, pts, delta, max_iters, 1e-13)
}

fn lloyd_until(approx: &DiscreteApprox, mut pts: Vec<Point>, delta: f64, max_iters: usize, tol: f64) -> Vec<Point> {
    let k = approx.dim;
    let mut assign = vec![0usize; approx.len()];
    for _ in 0..max_iters {
        for (slot, a) in assign.iter_mut().zip(&approx.atoms) {
            *slot = nearest_index(&pts, &a.x).0;
        }
        let mut num = vec![0.0; pts.len() * k];
        let mut den = vec![0.0; pts.len()];
        for (a, &c) in approx.atoms.iter().zip(&assign) {
            let d = dist(&a.x, &pts[c]).max(delta);
            let u = a.weight / (d * d);
            den[c] += u;
            for q in 0..k {
                num[c * k + q] += u * a.x[q];
            }
        }
        let mut moved = 0.0f64;
        for c in 0..pts.len() {
            let new: Point = if den[c] > 0.0 {
                (0..k).map(|q| num[c * k + q] / den[c]).collect()
            } else {
                // Empty cell: move to the heaviest atom not already a point.
                let spare = approx
                    .atoms
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| !pts.contains(&a.x))
                    .max_by(|(i, a), (j, b)| a.weight.total_cmp(&b.weight).then(j.cmp(i)));
                match spare {
                    Some((idx, a)) => {
                        log::debug!("reseeding empty cell {c} at atom {idx}");
                        a.x.clone()
                    }
                    None => pts[c].clone(),
                }
            };
            moved = moved.max(dist(&new, &pts[c]));
            pts[c] = new;
        }
        if moved <= tol {
            break;
        }
    }
    pts
}

/// Multi-start optimization of the floored surrogate on a fine
/// discretization; restarts are ranked by a loose error enclosure and the
/// winner is re-scored at `settings.tol_gap`. Restart `r` draws from
/// stream `r` of `seed`; restart 0 starts from `init` when given.
pub fn lloyd_geoquant(
    sys: &System,
    target: Target,
    n: usize,
    settings: &QuantSettings,
    seed: u64,
    init: Option<&Codebook>,
) -> Result<(Codebook, ErrorEnclosure)> {
    if n == 0 || settings.restarts == 0 {
        return Err(Error::InvalidParameter("lloyd needs n >= 1 and restarts >= 1"));
    }
    let approx = working_approx(sys, target, n, settings.atoms_per_cell)?;
    let delta = floor_for(&approx, settings.floor_factor);
    let root = SplitRng::new(seed);
    let mut best: Option<(f64, Codebook)> = None;
    for r in 0..settings.restarts {
        let mut rng = root.split(r as u64);
        let start = match (r, init) {
            (0, Some(cb)) => cb.points().to_vec(),
            _ => Vec::new(),
        };
        let pts = seed_points(&approx, n, &mut rng, start);
        let pts = lloyd_annealed(&approx, pts, delta, settings.max_iters);
        let cb = Codebook::new(pts)?;
        let score = eval_log_error(sys, &cb, target, 10.0 * settings.tol_gap, settings.depth_cap, settings.tail)?.hi;
        if best.as_ref().map_or(true, |(s, _)| score < *s) {
            best = Some((score, cb));
        }
    }
    let (_, cb) = best.expect("at least one restart");
    let enc = eval_log_error(sys, &cb, target, settings.tol_gap, settings.depth_cap, settings.tail)?;
    Ok((cb, enc))
}

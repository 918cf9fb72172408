use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // unused when another crate in the graph links std
use num_traits::Float;

use crate::measure::DiscreteApprox;
use crate::{Error, Result};

/// Optimal codebook for the floored surrogate on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct DpSolution {
    /// One point per cell, increasing.
    pub points: Vec<f64>,
    /// `Σ w log max(|x − a|, δ)` at the optimum.
    pub objective: f64,
    /// Cell boundaries as half-open index ranges into the sorted atoms.
    pub cells: Vec<(usize, usize)>,
}

/// [`dp_1d_points`] on a one-dimensional discretization.
pub fn dp_1d(approx: &DiscreteApprox, delta: f64, n: usize, max_cell_atoms: Option<usize>) -> Result<DpSolution> {
    if approx.dim != 1 {
        return Err(Error::NotOneDimensional(approx.dim));
    }
    let mut pairs: Vec<(f64, f64)> = approx.atoms.iter().map(|a| (a.x[0], a.weight)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ws: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    dp_1d_points(&xs, &ws, delta, n, max_cell_atoms)
}

/// Minimizes `Σ_m w_m log max(d(x_m, γ), δ)` over codebooks of at most `n`
/// points, for atoms sorted by position.
///
/// The floored log is nondecreasing in distance, so optimal cells are runs
/// of consecutive atoms and an interval DP over (prefix, cells) is exact.
/// Inside a cell the cost is concave between consecutive breakpoints
/// `x_m ± δ`, so its minimum over the cell hull is attained at a
/// breakpoint or a hull end; candidate sums are updated incrementally as
/// the cell grows. `max_cell_atoms` optionally limits cell length.
pub fn dp_1d_points(xs: &[f64], ws: &[f64], delta: f64, n: usize, max_cell_atoms: Option<usize>) -> Result<DpSolution> {
    let m = xs.len();
    if m == 0 || ws.len() != m {
        return Err(Error::InvalidParameter("dp needs matching nonempty atoms and weights"));
    }
    if !(delta > 0.0) || n == 0 {
        return Err(Error::InvalidParameter("dp needs delta > 0 and n >= 1"));
    }
    if xs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("dp atoms must be sorted"));
    }
    let cells = n.min(m);
    let cap = max_cell_atoms.unwrap_or(m).max(1).min(m);
    // Every feasible split needs cells·cap ≥ m.
    if cells * cap < m {
        return Err(Error::InvalidParameter("cell length cap too small for the budget"));
    }
    let term = |x: f64, a: f64, w: f64| w * (x - a).abs().max(delta).ln();

    // cost[i][len-1], arg[i][len-1] for the cell atoms i..i+len.
    let mut cost = vec![f64::INFINITY; m * cap];
    let mut arg = vec![0.0; m * cap];
    let mut cand: Vec<f64> = Vec::with_capacity(3 * cap);
    let mut sums: Vec<f64> = Vec::with_capacity(3 * cap);
    for i in 0..m {
        cand.clear();
        sums.clear();
        for len in 1..=cap.min(m - i) {
            let j = i + len - 1;
            // Existing candidates gain atom j's term.
            for (c, s) in cand.iter().zip(sums.iter_mut()) {
                *s += term(xs[j], *c, ws[j]);
            }
            for c in [xs[j] - delta, xs[j], xs[j] + delta] {
                let s: f64 = (i..=j).map(|q| term(xs[q], c, ws[q])).sum();
                cand.push(c);
                sums.push(s);
            }
            let (lo, hi) = (xs[i], xs[j]);
            let mut best = (f64::INFINITY, lo);
            for (&c, &s) in cand.iter().zip(&sums) {
                if c >= lo && c <= hi && (s < best.0 || (s == best.0 && c < best.1)) {
                    best = (s, c);
                }
            }
            // Hull ends x_i and x_j are always candidates, so best is finite.
            cost[i * cap + len - 1] = best.0;
            arg[i * cap + len - 1] = best.1;
        }
    }

    // f[c][j]: best cost of atoms 0..j split into c cells.
    let mut f = vec![f64::INFINITY; (cells + 1) * (m + 1)];
    let mut back = vec![0usize; (cells + 1) * (m + 1)];
    f[0] = 0.0;
    for c in 1..=cells {
        for j in c..=m {
            let mut best = (f64::INFINITY, 0);
            let start_min = j.saturating_sub(cap).max(c - 1);
            for i in start_min..j {
                let prev = f[(c - 1) * (m + 1) + i];
                if !prev.is_finite() {
                    continue;
                }
                let v = prev + cost[i * cap + (j - i) - 1];
                if v < best.0 {
                    best = (v, i);
                }
            }
            f[c * (m + 1) + j] = best.0;
            back[c * (m + 1) + j] = best.1;
        }
    }
    let objective = f[cells * (m + 1) + m];
    if !objective.is_finite() {
        return Err(Error::InvalidParameter("no feasible partition"));
    }
    let mut bounds = Vec::with_capacity(cells);
    let mut j = m;
    for c in (1..=cells).rev() {
        let i = back[c * (m + 1) + j];
        bounds.push((i, j));
        j = i;
    }
    bounds.reverse();
    let points = bounds.iter().map(|&(i, j)| arg[i * cap + (j - i) - 1]).collect();
    Ok(DpSolution { points, objective, cells: bounds })
}

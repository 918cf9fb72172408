use alloc::vec::Vec;
#[allow(unused_imports)] // unused when another crate in the graph links std
use num_traits::Float;

use super::lloyd::{floor_for, working_approx};
use super::{dp_1d, eval_log_error, lloyd_geoquant, Codebook, ErrorEnclosure, QuantSettings};
use crate::ifs::System;
use crate::measure::{DiscreteApprox, Target};
use crate::rng::SplitRng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveEntry {
    pub n: usize,
    /// Midpoint of the enclosure of the best codebook found.
    pub e_best: f64,
    pub enclosure: ErrorEnclosure,
    pub codebook: Codebook,
}

/// Best-found `(n, ê_n)` values, strictly decreasing in `n`.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuantizationCurve {
    pub entries: Vec<CurveEntry>,
}

impl QuantizationCurve {
    pub fn ns(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.n).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.e_best).collect()
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].e_best < w[0].e_best)
    }
}

/// Length cap for DP cells: generous next to the mean cell size `M/n`.
fn cell_cap(atoms: usize, n: usize) -> usize {
    atoms.min(8 * atoms.div_ceil(n) + 16)
}

/// Atom farthest from the codebook in the `w · d` sense, used to grow a
/// codebook by one point.
fn split_point(approx: &DiscreteApprox, cb: &Codebook) -> Option<crate::Point> {
    approx
        .atoms
        .iter()
        .map(|a| (a.weight * cb.nearest(&a.x).1, a))
        .filter(|(score, _)| *score > 0.0)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, a)| a.x.clone())
}

fn optimize(
    sys: &System,
    target: Target,
    n: usize,
    settings: &QuantSettings,
    seed: u64,
    prev: Option<&Codebook>,
) -> Result<(Codebook, ErrorEnclosure)> {
    if sys.dim() == 1 {
        let approx = working_approx(sys, target, n, settings.atoms_per_cell)?;
        let delta = floor_for(&approx, settings.floor_factor);
        let sol = dp_1d(&approx, delta, n, Some(cell_cap(approx.len(), n)))?;
        let cb = Codebook::from_scalars(&sol.points)?;
        let enc = eval_log_error(sys, &cb, target, settings.tol_gap, settings.depth_cap, settings.tail)?;
        return Ok((cb, enc));
    }
    let init = match prev {
        Some(p) => {
            let approx = working_approx(sys, target, n, settings.atoms_per_cell)?;
            let mut cb = p.clone();
            while cb.len() < n {
                match split_point(&approx, &cb) {
                    Some(x) => cb = cb.with_point(x)?,
                    None => break,
                }
            }
            Some(cb)
        }
        None => None,
    };
    lloyd_geoquant(sys, target, n, settings, seed, init.as_ref())
}

/// Runs the optimizer for each budget in `n_list` (strictly increasing) and
/// keeps the curve strictly decreasing: a budget that fails to improve on
/// its predecessor falls back to the previous codebook plus one split
/// point, then to a rerun with doubled restarts.
pub fn build_curve(
    sys: &System,
    target: Target,
    n_list: &[usize],
    settings: &QuantSettings,
    seed: u64,
) -> Result<QuantizationCurve> {
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("n list must be positive and strictly increasing"));
    }
    let root = SplitRng::new(seed);
    let mut entries: Vec<CurveEntry> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let run_seed = root.split(n as u64).next_u64();
        let prev = entries.last();
        let (mut cb, mut enc) = optimize(sys, target, n, settings, run_seed, prev.map(|e| &e.codebook))?;
        if let Some(p) = prev {
            if enc.midpoint() >= p.e_best {
                let approx = working_approx(sys, target, n, settings.atoms_per_cell)?;
                let mut candidates: Vec<Codebook> = Vec::new();
                if let Some(x) = split_point(&approx, &p.codebook) {
                    candidates.push(p.codebook.with_point(x)?);
                }
                for cand in candidates {
                    let e = eval_log_error(sys, &cand, target, settings.tol_gap, settings.depth_cap, settings.tail)?;
                    if e.midpoint() < enc.midpoint() {
                        cb = cand;
                        enc = e;
                    }
                }
            }
            if enc.midpoint() >= p.e_best && sys.dim() > 1 {
                let more = QuantSettings { restarts: 2 * settings.restarts, ..settings.clone() };
                let (c2, e2) = optimize(sys, target, n, &more, run_seed ^ 0x9e37_79b9, Some(&p.codebook))?;
                if e2.midpoint() < enc.midpoint() {
                    cb = c2;
                    enc = e2;
                }
            }
            if enc.midpoint() >= p.e_best {
                return Err(Error::MonotonicityFailure(n));
            }
        }
        entries.push(CurveEntry { n, e_best: enc.midpoint(), enclosure: enc, codebook: cb });
    }
    Ok(QuantizationCurve { entries })
}

//! Geometric-mean quantization: rigorous error enclosures, codebook
//! optimizers, `(n, ê_n)` curves and checks of the decomposition
//! inequalities between `μ` and its component measures `μ̂_i`.
//!
//! Optimizers never touch the raw objective on a discrete measure (an atom
//! in the codebook would send it to `−∞`). They minimize the floored
//! surrogate `Σ w log max(d, δ)` and every reported value comes from
//! [`eval_log_error`] on the continuous measure.

mod codebook;
mod curve;
mod dp;
mod eval;
mod inequalities;
mod lloyd;

pub use codebook::{antichain_codebook, Codebook};
pub use curve::{build_curve, CurveEntry, QuantizationCurve};
pub use dp::{dp_1d, dp_1d_points, DpSolution};
pub use eval::{eval_log_error, tail_integral_bound, ErrorEnclosure, TailBound};
pub use inequalities::{
    antichain_upper_bound, bracket_quantity, gibbs_sum, lower_recursion_checks, scaled_log_error,
    verify_decomposition_inequalities,
    AntichainBoundReport, ComponentErrors, DecompositionReport, InequalityCheck,
};
pub use lloyd::{lloyd_geoquant, surrogate_objective};

pub use crate::measure::Target;

/// Optimizer and evaluation settings shared by the quantizer entry points.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuantSettings {
    pub restarts: usize,
    pub max_iters: usize,
    /// `δ = floor_factor · median(r_σ)` for the surrogate objective.
    pub floor_factor: f64,
    /// Target total width of error enclosures.
    pub tol_gap: f64,
    pub depth_cap: usize,
    /// The optimizers work on cells of weight about `1/(atoms_per_cell·n)`.
    pub atoms_per_cell: usize,
    /// Frostman-type bound used for cylinders left at the depth cap.
    pub tail: Option<TailBound>,
}

impl Default for QuantSettings {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iters: 200,
            floor_factor: 0.5,
            tol_gap: 1e-3,
            depth_cap: crate::measure::DEFAULT_DEPTH_CAP,
            atoms_per_cell: 16,
            tail: None,
        }
    }
}

//! One experiment: a validated system plus the artifacts computed from it.
//! Expensive intermediate results are cached so `report` computes each once.

use anyhow::{Context, Result};
use fraqdim_core::dims::{
    alpha_bounds, estimate_local_dimension, estimate_quantization_dimension_window, local_dimension_fraction,
    sample_points, DimensionReport, LocalDimEstimate, LocalDimStats, LocalDimValidation,
};
use fraqdim_core::ifs::{SscReport, System};
use fraqdim_core::measure::{frostman_check, FrostmanReport, Target};
use fraqdim_core::quantizer::{build_curve, QuantizationCurve, TailBound};
use fraqdim_core::symbolic::{
    antichain_by_contraction, antichain_by_probability, chaos_game, Antichain, AntichainKind, ChaosTrajectory,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, SeedSlot};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryOutput {
    pub p: Vec<f64>,
    /// `‖pP − p‖∞`.
    pub residual: f64,
}

pub type LocalOutcome = fraqdim_core::Result<LocalDimEstimate>;

pub struct Experiment {
    pub config: ExperimentConfig,
    pub system: System,
    frostman: Option<FrostmanReport>,
    curve: Option<QuantizationCurve>,
    local: Option<Vec<LocalOutcome>>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let system = config.build_system()?;
        Ok(Self { config, system, frostman: None, curve: None, local: None })
    }

    pub fn stationary(&self) -> StationaryOutput {
        let ifs = &self.system.ifs;
        let p = ifs.stationary().p.clone();
        let n = p.len();
        let residual = (0..n)
            .map(|j| ((0..n).map(|i| p[i] * ifs.matrix().get(i, j)).sum::<f64>() - p[j]).abs())
            .fold(0.0, f64::max);
        StationaryOutput { p, residual }
    }

    pub fn ssc(&self) -> SscReport {
        self.system.ifs.check_ssc(&self.system.attractor)
    }

    pub fn samples(&self) -> Result<ChaosTrajectory> {
        let s = &self.config.sampling;
        Ok(chaos_game(&self.system, s.steps, s.burnin, self.config.seed(SeedSlot::Sampling))?)
    }

    pub fn birkhoff_trajectory(&self) -> Result<ChaosTrajectory> {
        let s = &self.config.birkhoff;
        Ok(chaos_game(&self.system, s.steps, s.burnin, self.config.seed(SeedSlot::Birkhoff))?)
    }

    pub fn antichain(&self, eps: f64, kind: AntichainKind) -> Result<Antichain> {
        let ifs = &self.system.ifs;
        let ac = match kind {
            AntichainKind::Probability => antichain_by_probability(ifs, eps),
            AntichainKind::Contraction => antichain_by_contraction(ifs, eps),
        };
        ac.with_context(|| format!("antichain at eps = {eps}"))
    }

    pub fn frostman(&mut self) -> Result<&FrostmanReport> {
        if self.frostman.is_none() {
            let f = &self.config.frostman;
            let grid = f.eps_grid.values().context("field `frostman.epsGrid`")?;
            let rep = frostman_check(&self.system, f.samples, &grid, self.config.seed(SeedSlot::Frostman), f.depth_cap)?;
            self.frostman = Some(rep);
        }
        Ok(self.frostman.as_ref().expect("just computed"))
    }

    /// Tail bound for the error enclosures, `C = 2 · max ratio`.
    pub fn tail_bound(&mut self) -> Result<TailBound> {
        let rep = self.frostman()?;
        Ok(TailBound { constant: rep.constant, eta: rep.eta })
    }

    pub fn quant_settings(&mut self) -> Result<fraqdim_core::quantizer::QuantSettings> {
        let mut s = self.config.quantization.settings();
        s.tail = Some(self.tail_bound()?);
        Ok(s)
    }

    pub fn curve(&mut self) -> Result<&QuantizationCurve> {
        if self.curve.is_none() {
            let settings = self.quant_settings()?;
            let ns = self.config.quantization.n_list.clone();
            let seed = self.config.seed(SeedSlot::Quantization);
            let curve = build_curve(&self.system, Target::Full, &ns, &settings, seed)?;
            self.curve = Some(curve);
        }
        Ok(self.curve.as_ref().expect("just computed"))
    }

    /// Per-point local-dimension estimates in sample order, computed in
    /// parallel.
    pub fn local_dims(&mut self) -> Result<&[LocalOutcome]> {
        if self.local.is_none() {
            let d = &self.config.dims;
            let grid = d.r_grid.values().context("field `dims.rGrid`")?;
            let pts = sample_points(&self.system, d.sample_count, self.config.seed(SeedSlot::LocalDims))?;
            let sys = &self.system;
            let cap = d.depth_cap;
            let out: Vec<LocalOutcome> = pts.par_iter().map(|x| estimate_local_dimension(sys, x, &grid, cap)).collect();
            self.local = Some(out);
        }
        Ok(self.local.as_deref().expect("just computed"))
    }

    pub fn local_dimension_check(&mut self) -> Result<LocalDimValidation> {
        let band = self.config.dims.bands.local_dimension;
        let bounds = alpha_bounds(&self.system.ifs);
        Ok(local_dimension_fraction(&bounds, self.local_dims()?, band))
    }

    /// Closed-form bounds plus the curve regression and local-dimension
    /// quantiles.
    pub fn dimension_report(&mut self) -> Result<DimensionReport> {
        let mut rep = alpha_bounds(&self.system.ifs);
        let window = self.config.dims.regression_window;
        rep.d_estimate = Some(estimate_quantization_dimension_window(self.curve()?, window)?);
        let outcomes = self.local_dims()?;
        let slopes: Vec<f64> = outcomes.iter().filter_map(|o| o.as_ref().ok().map(|e| e.slope)).collect();
        rep.local_dim_stats = Some(LocalDimStats::from_slopes(&slopes, outcomes.len() - slopes.len()));
        Ok(rep)
    }
}

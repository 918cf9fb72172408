//! Pass/fail table over every validator the library offers.

use std::fmt;

use anyhow::Result;
use fraqdim_core::dims::{alpha_bounds, estimate_quantization_dimension_window, special_case_check};
use fraqdim_core::quantizer::verify_decomposition_inequalities;
use fraqdim_core::symbolic::{birkhoff_check, verify_antichain, AntichainKind};
use fraqdim_core::Error;

use crate::config::SeedSlot;
use crate::pipeline::Experiment;

/// Tolerance for the stationary equation and the antichain partition.
const EXACT_TOL: f64 = 1e-12;
const BIRKHOFF_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported but never fails the run.
    Info,
    /// Preconditions not met.
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

fn row(name: impl Into<String>, pass: bool, detail: String) -> Row {
    Row { name: name.into(), status: if pass { Status::Pass } else { Status::Fail }, detail }
}

fn info(name: impl Into<String>, status: Status, detail: String) -> Row {
    Row { name: name.into(), status, detail }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyTable {
    pub rows: Vec<Row>,
}

impl VerifyTable {
    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| r.status == Status::Fail)
    }
}

impl fmt::Display for VerifyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<32} {:<6} detail", "check", "status")?;
        for r in &self.rows {
            writeln!(f, "{:<32} {:<6} {}", r.name, r.status.to_string(), r.detail)?;
        }
        let failed = self.rows.iter().filter(|r| r.status == Status::Fail).count();
        writeln!(f, "{} checks, {} failed", self.rows.len(), failed)
    }
}

pub fn run(exp: &mut Experiment) -> Result<VerifyTable> {
    let mut rows = Vec::new();
    let cfg = exp.config.clone();
    let ifs = exp.system.ifs.clone();

    let st = exp.stationary();
    let positive = st.p.iter().all(|&q| q > 0.0);
    rows.push(row("stationary", st.residual <= EXACT_TOL && positive, format!("residual={:.3e}", st.residual)));

    for &eps in &cfg.antichain.eps {
        let name = format!("antichain eps={eps}");
        match exp.antichain(eps, AntichainKind::Probability) {
            Ok(ac) => {
                let chk = verify_antichain(&ifs, &ac)?;
                let detail = format!(
                    "size={} sum-1={:+.3e} bound={:.1}",
                    ac.len(),
                    chk.total_weight - 1.0,
                    chk.cardinality_bound.unwrap_or(f64::NAN)
                );
                rows.push(row(name, chk.passes(ac.len(), EXACT_TOL), detail));
            }
            Err(e) => rows.push(info(name, Status::Skip, format!("{:#}", e))),
        }
    }

    let traj = exp.birkhoff_trajectory()?;
    let b = birkhoff_check(&ifs, &traj)?;
    rows.push(row(
        "birkhoff",
        b.max_deviation() <= BIRKHOFF_TOL,
        format!(
            "f={:.5}/{:.5} gLow={:.5}/{:.5} gHigh={:.5}/{:.5}",
            b.f_avg, b.entropy, b.g_low, b.lyap_low, b.g_high, b.lyap_high
        ),
    ));

    let fr = exp.frostman()?.clone();
    rows.push(row(
        "frostman",
        fr.trend_slope >= cfg.frostman.min_trend,
        format!("eta={:.5} C={:.4} trend={:.4}", fr.eta, fr.constant, fr.trend_slope),
    ));

    let ssc = exp.ssc();
    rows.push(info("strong separation", Status::Info, format!("certified={} gap>={:.3e}", ssc.certified, ssc.delta_lo)));
    if let Some(open) = cfg.system.open_sets()? {
        let ok = ifs.check_osc(&open)?;
        rows.push(row("open set condition", ok, format!("boxes={}", open.len())));
    }

    let bounds = alpha_bounds(&ifs);
    rows.push(info(
        "special case",
        Status::Info,
        format!("applies={} alpha1={:.5} alpha2={:.5}", special_case_check(&ifs), bounds.alpha1, bounds.alpha2),
    ));

    let curve = exp.curve()?.clone();
    rows.push(row("monotonicity", curve.is_strictly_decreasing(), format!("n={:?}", curve.ns())));

    let t1 = exp.local_dimension_check()?;
    rows.push(row(
        "local-dimension bounds",
        t1.fraction >= cfg.dims.min_fraction,
        format!(
            "fraction={:.3} band=[{:.4}, {:.4}] median={:.4} unresolved={}",
            t1.fraction, t1.lower, t1.upper, t1.stats.median, t1.stats.failed
        ),
    ));

    let slack = cfg.dims.bands.quantization_dimension;
    match estimate_quantization_dimension_window(&curve, cfg.dims.regression_window) {
        Ok(est) if ssc.certified => {
            let ok = bounds.alpha1 * (1.0 - slack) <= est.d && est.d <= bounds.alpha2 * (1.0 + slack);
            rows.push(row(
                "quantization-dimension bounds",
                ok,
                format!(
                    "D={:.4}±{:.4} band=[{:.4}, {:.4}]",
                    est.d,
                    est.stderr,
                    bounds.alpha1 * (1.0 - slack),
                    bounds.alpha2 * (1.0 + slack)
                ),
            ));
        }
        Ok(est) => rows.push(info("quantization-dimension bounds", Status::Skip, format!("separation not certified; D={:.4}", est.d))),
        Err(Error::CurveTooShort(n)) => rows.push(info("quantization-dimension bounds", Status::Skip, format!("curve has {n} entries"))),
        Err(e) => rows.push(row("quantization-dimension bounds", false, format!("{e}"))),
    }

    let settings = exp.quant_settings()?;
    let dec = verify_decomposition_inequalities(
        &exp.system,
        &cfg.decomposition.n_list,
        &settings,
        cfg.seed(SeedSlot::Quantization),
        &ssc,
    )?;
    for c in dec.all_checks() {
        let name = match c.component {
            Some(i) => format!("{} n={} i={}", c.name, c.n, i + 1),
            None => format!("{} n={}", c.name, c.n),
        };
        let detail = format!("slack={:+.4e} uncertainty={:.2e}", c.slack, c.uncertainty);
        // The mixture upper bound over-counts points and the lower
        // recursion is only asymptotic; both are reported, not enforced.
        let gated = matches!(c.name, "mixture-lower" | "component-upper");
        if gated {
            rows.push(row(name, !c.violated(), detail));
        } else {
            let status = if c.violated() { Status::Info } else { Status::Pass };
            rows.push(info(name, status, detail));
        }
    }

    Ok(VerifyTable { rows })
}

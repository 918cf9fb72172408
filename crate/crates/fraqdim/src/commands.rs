//! Subcommands: each computes its artifact and writes it under the output
//! directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fraqdim_core::ifs::RecurrentIfs;
use fraqdim_core::symbolic::{Antichain, AntichainKind};
use serde::Serialize;

use crate::output::{real, write_csv, write_json, write_text};
use crate::pipeline::Experiment;
use crate::verify::{self, VerifyTable};

/// Outcome of a subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// A validator fell outside its tolerance.
    ValidationFailed,
}

fn point_columns(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|q| format!("{prefix}{q}")).collect()
}

fn header<'a>(fixed: &[&'a str], extra: &'a [String]) -> Vec<&'a str> {
    fixed.iter().copied().chain(extra.iter().map(String::as_str)).collect()
}

pub fn out_dir(exp: &Experiment, override_dir: Option<&Path>) -> Result<PathBuf> {
    let dir = override_dir.map(Path::to_path_buf).unwrap_or_else(|| exp.config.output.clone());
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}

pub fn stationary(exp: &Experiment, dir: &Path) -> Result<Vec<f64>> {
    let st = exp.stationary();
    write_json(&dir.join("stationary.json"), &st)?;
    Ok(st.p)
}

pub fn attractor(exp: &Experiment, dir: &Path) -> Result<()> {
    let att = &exp.system.attractor;
    let cols = point_columns("x", att.dim());
    let rows = (0..exp.system.ifs.len())
        .flat_map(|i| att.points(i).map(move |p| (i, p)))
        .map(|(i, p)| std::iter::once((i + 1).to_string()).chain(p.iter().map(|&v| real(v))).collect());
    write_csv(&dir.join("attractor.csv"), &header(&["component"], &cols), rows)
}

pub fn sample(exp: &Experiment, dir: &Path) -> Result<()> {
    let traj = exp.samples()?;
    let cols = point_columns("x", traj.dim);
    let rows = (0..traj.len()).map(|m| {
        [m.to_string(), (traj.labels[m] + 1).to_string()]
            .into_iter()
            .chain(traj.point(m).iter().map(|&v| real(v)))
            .collect()
    });
    write_csv(&dir.join("samples.csv"), &header(&["step", "state"], &cols), rows)
}

fn antichain_rows(ifs: &RecurrentIfs, ac: &Antichain) -> Result<Vec<Vec<String>>> {
    ac.words
        .iter()
        .zip(&ac.weights)
        .map(|(w, &p)| {
            let (lo, hi) = ifs.word_contraction(w)?;
            Ok(vec![real(ac.eps), w.to_string(), real(p), real(lo), real(hi)])
        })
        .collect()
}

/// Antichains at each `eps`; sizes are returned in the same order.
pub fn antichain(exp: &Experiment, dir: &Path, eps: &[f64], kind: AntichainKind) -> Result<Vec<usize>> {
    let mut rows = Vec::new();
    let mut sizes = Vec::new();
    for &e in eps {
        let ac = exp.antichain(e, kind)?;
        sizes.push(ac.len());
        rows.extend(antichain_rows(&exp.system.ifs, &ac)?);
    }
    write_csv(&dir.join("antichain.csv"), &["eps", "word", "probability", "s_low", "s_high"], rows)?;
    Ok(sizes)
}

#[derive(Serialize)]
struct CodebookRecord<'a> {
    n: usize,
    points: &'a [Vec<f64>],
}

pub fn quantize(exp: &mut Experiment, dir: &Path) -> Result<Outcome> {
    let curve = exp.curve()?.clone();
    let rows = curve.entries.iter().map(|e| {
        vec![e.n.to_string(), real(e.e_best), real(e.enclosure.lo), real(e.enclosure.hi), e.codebook.len().to_string()]
    });
    write_csv(&dir.join("curve.csv"), &["n", "e_best", "enc_lo", "enc_hi", "codebook_size"], rows)?;
    let books: Vec<CodebookRecord> = curve.entries.iter().map(|e| CodebookRecord { n: e.n, points: e.codebook.points() }).collect();
    write_json(&dir.join("codebooks.json"), &books)?;
    Ok(if curve.is_strictly_decreasing() { Outcome::Ok } else { Outcome::ValidationFailed })
}

pub fn dims(exp: &mut Experiment, dir: &Path) -> Result<()> {
    let rep = exp.dimension_report()?;
    write_json(&dir.join("dims.json"), &rep)?;
    let k = exp.system.ifs.dim();
    let cols = point_columns("x", k);
    let hdr = header(&["index"], &cols)
        .into_iter()
        .chain(["slope", "r_min", "r_max", "enc_width_max", "radii_used", "status"])
        .collect::<Vec<_>>();
    let rows: Vec<Vec<String>> = exp
        .local_dims()?
        .iter()
        .enumerate()
        .map(|(m, o)| {
            let mut r = vec![m.to_string()];
            match o {
                Ok(e) => {
                    r.extend(e.point.iter().map(|&v| real(v)));
                    r.extend([
                        real(e.slope),
                        real(e.r_range.0),
                        real(e.r_range.1),
                        real(e.enc_width_max),
                        e.radii_used.to_string(),
                        "ok".to_string(),
                    ]);
                }
                Err(err) => {
                    r.extend(std::iter::repeat_n(String::new(), k + 5));
                    r.push(err.to_string());
                }
            }
            r
        })
        .collect();
    write_csv(&dir.join("localdims.csv"), &hdr, rows)
}

pub fn verify(exp: &mut Experiment, dir: &Path) -> Result<VerifyTable> {
    let table = verify::run(exp)?;
    write_text(&dir.join("verify.txt"), &table.to_string())?;
    Ok(table)
}

/// Every artifact, in a fixed order.
pub fn report(exp: &mut Experiment, dir: &Path) -> Result<VerifyTable> {
    stationary(exp, dir)?;
    attractor(exp, dir)?;
    sample(exp, dir)?;
    let eps = exp.config.antichain.eps.clone();
    let usable: Vec<f64> = eps.into_iter().filter(|&e| e <= exp.system.ifs.stationary().min()).collect();
    antichain(exp, dir, &usable, AntichainKind::Probability)?;
    quantize(exp, dir)?;
    dims(exp, dir)?;
    verify(exp, dir)
}

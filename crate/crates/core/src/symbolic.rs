//! Words over the state alphabet, cylinder weights, antichains and the
//! chaos-game sampler.
//!
//! Letters are stored zero-based; `Display` prints them one-based.
//! A word `ω = ω_1⋯ω_n` is admissible when every consecutive pair satisfies
//! `p_{ω_{i+1} ω_i} > 0`, so the word reads the Markov chain backwards:
//! `E_ω = S_{ω_1} ∘ ⋯ ∘ S_{ω_{n−1}}(E_{ω_n}) ⊂ E_{ω_1}`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)] // unused when another crate in the graph links std
use num_traits::Float;

use crate::ifs::{RecurrentIfs, System};
use crate::markov::StochasticMatrix;
use crate::rng::SplitRng;
use crate::stats::pairwise_sum;
use crate::{Error, Result};

/// Hard limit on word length during antichain searches.
pub const MAX_WORD_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Word(Vec<u16>);

impl Word {
    pub fn new(letters: Vec<u16>) -> Self {
        Self(letters)
    }

    pub fn letter(l: usize) -> Self {
        Self(vec![l as u16])
    }

    pub fn from_one_based(letters: &[usize]) -> Self {
        Self(letters.iter().map(|&l| (l - 1) as u16).collect())
    }

    pub fn letters(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> usize {
        self.0[0] as usize
    }

    pub fn last(&self) -> usize {
        self.0[self.0.len() - 1] as usize
    }

    /// `ω⁻`: the word with its last letter removed.
    pub fn parent(&self) -> Word {
        Word(self.0[..self.0.len().saturating_sub(1)].to_vec())
    }

    pub fn child(&self, l: usize) -> Word {
        let mut v = self.0.clone();
        v.push(l as u16);
        Word(v)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn check_admissible(&self, matrix: &StochasticMatrix) -> Result<()> {
        if self.is_empty() {
            return Err(Error::WordTooShort);
        }
        let n = matrix.len();
        if let Some(&l) = self.0.iter().find(|&&l| l as usize >= n) {
            return Err(Error::LetterOutOfRange { letter: l as usize + 1, states: n });
        }
        if self.0.windows(2).all(|w| matrix.get(w[1] as usize, w[0] as usize) > 0.0) {
            Ok(())
        } else {
            Err(Error::InadmissibleWord)
        }
    }

    pub fn is_admissible(&self, matrix: &StochasticMatrix) -> Result<bool> {
        match self.check_admissible(matrix) {
            Ok(()) => Ok(true),
            Err(Error::InadmissibleWord) => Ok(false),
            Err(e) => Err(e),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{}", l + 1)?;
        }
        Ok(())
    }
}

/// `p_ω` and `P_ω = p_ω / p_{ω_n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderMeasureValues {
    pub p_word: f64,
    pub p_tail: f64,
}

/// `p_ω = p_{ω_n} p_{ω_n ω_{n−1}} ⋯ p_{ω_2 ω_1}`.
pub fn word_probability(ifs: &RecurrentIfs, word: &Word) -> Result<CylinderMeasureValues> {
    word.check_admissible(ifs.matrix())?;
    let tail: f64 = word.letters().windows(2).map(|w| ifs.word_step(w[0] as usize, w[1] as usize)).product();
    let p_last = ifs.stationary().p[word.last()];
    Ok(CylinderMeasureValues { p_word: p_last * tail, p_tail: tail })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AntichainKind {
    /// `Γ(ε) = {σ : p_{σ⁻} ≥ ε > p_σ}`.
    Probability,
    /// `Γ_ε = {ω : s̲_{ω⁻} ≥ ε > s̲_ω}`.
    Contraction,
}

/// A finite maximal antichain together with each word's `p_ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct Antichain {
    pub kind: AntichainKind,
    pub eps: f64,
    pub words: Vec<Word>,
    pub weights: Vec<f64>,
}

impl Antichain {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// `p̂ = min(min_j p_j, min positive p_ij)`.
pub fn p_hat(ifs: &RecurrentIfs) -> f64 {
    ifs.stationary().min().min(ifs.matrix().min_positive())
}

/// Child weight `p_{σj} = p_σ · p_j p_{j σ_n} / p_{σ_n}`.
#[inline]
fn child_weight(ifs: &RecurrentIfs, weight: f64, last: usize, j: usize) -> f64 {
    let p = &ifs.stationary().p;
    weight * p[j] * ifs.word_step(last, j) / p[last]
}

/// `Γ(ε)` for `0 < ε ≤ min_j p_j`.
pub fn antichain_by_probability(ifs: &RecurrentIfs, eps: f64) -> Result<Antichain> {
    let upper = ifs.stationary().min();
    if !(eps > 0.0 && eps <= upper) {
        return Err(Error::EpsilonOutOfRange { eps, upper });
    }
    let p = &ifs.stationary().p;
    let n = ifs.len();
    let mut out: Vec<(Word, f64)> = Vec::new();
    let mut stack: Vec<(Word, f64)> = (0..n).rev().map(|j| (Word::letter(j), p[j])).collect();
    while let Some((w, weight)) = stack.pop() {
        let last = w.last();
        for j in (0..n).rev() {
            if ifs.word_step(last, j) <= 0.0 {
                continue;
            }
            let cw = child_weight(ifs, weight, last, j);
            let c = w.child(j);
            if cw < eps {
                out.push((c, cw));
            } else if c.len() >= MAX_WORD_LEN {
                return Err(Error::DepthCapExceeded(MAX_WORD_LEN));
            } else {
                stack.push((c, cw));
            }
        }
    }
    Ok(finish(AntichainKind::Probability, eps, out))
}

/// `Γ_ε` for `0 < ε < 1`; words have length at least two.
pub fn antichain_by_contraction(ifs: &RecurrentIfs, eps: f64) -> Result<Antichain> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsilonOutOfRange { eps, upper: 1.0 });
    }
    let p = &ifs.stationary().p;
    let n = ifs.len();
    let mut out: Vec<(Word, f64)> = Vec::new();
    // Entries carry (word, p_ω, s̲_ω).
    let mut stack: Vec<(Word, f64, f64)> = (0..n).rev().map(|j| (Word::letter(j), p[j], 1.0)).collect();
    while let Some((w, weight, s)) = stack.pop() {
        let last = w.last();
        let s_child = s * ifs.map(last).lower();
        for j in (0..n).rev() {
            if ifs.word_step(last, j) <= 0.0 {
                continue;
            }
            let cw = child_weight(ifs, weight, last, j);
            let c = w.child(j);
            if s_child < eps {
                out.push((c, cw));
            } else if c.len() >= MAX_WORD_LEN {
                return Err(Error::DepthCapExceeded(MAX_WORD_LEN));
            } else {
                stack.push((c, cw, s_child));
            }
        }
    }
    Ok(finish(AntichainKind::Contraction, eps, out))
}

fn finish(kind: AntichainKind, eps: f64, mut out: Vec<(Word, f64)>) -> Antichain {
    out.sort_by(|a, b| a.0.cmp(&b.0));
    let (words, weights) = out.into_iter().unzip();
    Antichain { kind, eps, words, weights }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntichainCheck {
    /// `Σ_{ω∈Γ} p_ω`, expected to be 1.
    pub total_weight: f64,
    pub prefix_free: bool,
    /// Every word satisfies its defining inequalities.
    pub defining_condition: bool,
    /// `1/(ε p̂²)` for probability antichains.
    pub cardinality_bound: Option<f64>,
}

impl AntichainCheck {
    pub fn passes(&self, len: usize, tol: f64) -> bool {
        (self.total_weight - 1.0).abs() <= tol
            && self.prefix_free
            && self.defining_condition
            && self.cardinality_bound.map_or(true, |b| len as f64 <= b)
    }
}

/// Recomputes every weight from scratch and checks the partition, prefix
/// and defining properties.
pub fn verify_antichain(ifs: &RecurrentIfs, ac: &Antichain) -> Result<AntichainCheck> {
    let mut weights = Vec::with_capacity(ac.len());
    let mut ok = true;
    for w in &ac.words {
        let pw = word_probability(ifs, w)?.p_word;
        weights.push(pw);
        let cond = match ac.kind {
            AntichainKind::Probability => {
                let pp = if w.len() >= 2 { word_probability(ifs, &w.parent())?.p_word } else { 1.0 };
                pp >= ac.eps * (1.0 - 1e-12) && pw < ac.eps
            }
            AntichainKind::Contraction => {
                let s = ifs.word_contraction(w)?.0;
                let sp = if w.len() >= 2 { ifs.word_contraction(&w.parent())?.0 } else { 1.0 };
                w.len() >= 2 && sp >= ac.eps && s < ac.eps
            }
        };
        ok &= cond;
    }
    let mut sorted: Vec<&Word> = ac.words.iter().collect();
    sorted.sort();
    let prefix_free = sorted.windows(2).all(|p| !p[0].is_prefix_of(p[1]));
    let cardinality_bound = match ac.kind {
        AntichainKind::Probability => {
            let ph = p_hat(ifs);
            Some(1.0 / (ac.eps * ph * ph))
        }
        AntichainKind::Contraction => None,
    };
    Ok(AntichainCheck { total_weight: pairwise_sum(&weights), prefix_free, defining_condition: ok, cardinality_bound })
}

/// Forward chain states `τ_m` and chaos-game points `x_m` after burn-in.
///
/// Reading the labels of steps `1..=m` backwards gives the admissible word
/// `τ_m τ_{m−1} ⋯ τ_1`, and `x_m` lies in the corresponding cylinder
/// `E_{τ_m ⋯ τ_1} ⊂ E_{τ_m}`.
#[derive(Debug, Clone)]
pub struct ChaosTrajectory {
    pub labels: Vec<u16>,
    pub points: Vec<f64>,
    pub dim: usize,
}

impl ChaosTrajectory {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, m: usize) -> &[f64] {
        &self.points[m * self.dim..(m + 1) * self.dim]
    }
}

/// Minimum burn-in accepted by [`chaos_game`].
pub const MIN_BURNIN: usize = 100;

/// Runs `steps` chain transitions and keeps those after `burnin`.
pub fn chaos_game(sys: &System, steps: usize, burnin: usize, seed: u64) -> Result<ChaosTrajectory> {
    if burnin < MIN_BURNIN || steps <= burnin {
        return Err(Error::InvalidParameter("chaos game needs steps > burnin >= 100"));
    }
    let ifs = &sys.ifs;
    let n = ifs.len();
    let k = ifs.dim();
    let mut rng = SplitRng::new(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|i| crate::rng::cumulative(ifs.matrix().row(i))).collect();
    let mut state = rng.pick_cumulative(&crate::rng::cumulative(&ifs.stationary().p));
    let mut x = sys.attractor.anchors[state].clone();
    let mut buf = vec![0.0; k];
    let kept = steps - burnin;
    let mut labels = Vec::with_capacity(kept);
    let mut points = Vec::with_capacity(kept * k);
    for m in 0..steps {
        if m > 0 {
            state = rng.pick_cumulative(&rows[state]);
            ifs.map(state).apply_into(&x, &mut buf);
            core::mem::swap(&mut x, &mut buf);
        }
        if m >= burnin {
            labels.push(state as u16);
            points.extend_from_slice(&x);
        }
    }
    Ok(ChaosTrajectory { labels, points, dim: k })
}

/// Minimum trajectory length for ergodic averages.
pub const MIN_BIRKHOFF_LEN: usize = 100_000;

/// Ergodic averages along a trajectory next to their exact limits.
#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffReport {
    /// Mean of `log p_{τ_m τ_{m+1}}`.
    pub f_avg: f64,
    /// Mean of `log s̲_{τ_m}`.
    pub g_low: f64,
    /// Mean of `log s̄_{τ_m}`.
    pub g_high: f64,
    /// `Σ p_i p_ij log p_ij`.
    pub entropy: f64,
    /// `Σ p_i log s̲_i`.
    pub lyap_low: f64,
    /// `Σ p_i log s̄_i`.
    pub lyap_high: f64,
}

impl BirkhoffReport {
    pub fn max_deviation(&self) -> f64 {
        (self.f_avg - self.entropy)
            .abs()
            .max((self.g_low - self.lyap_low).abs())
            .max((self.g_high - self.lyap_high).abs())
    }
}

/// `Σ_i p_i Σ_j p_ij log p_ij` with `0 log 0 = 0`.
pub fn markov_entropy(ifs: &RecurrentIfs) -> f64 {
    let p = &ifs.stationary().p;
    let terms: Vec<f64> = (0..ifs.len())
        .flat_map(|i| ifs.matrix().row(i).iter().map(move |&q| p[i] * crate::stats::xlogx(q)))
        .collect();
    pairwise_sum(&terms)
}

/// `(Σ p_i log s̲_i, Σ p_i log s̄_i)`.
pub fn lyapunov_pair(ifs: &RecurrentIfs) -> (f64, f64) {
    let p = &ifs.stationary().p;
    let lo: Vec<f64> = ifs.maps().iter().zip(p).map(|(m, pi)| pi * m.lower().ln()).collect();
    let hi: Vec<f64> = ifs.maps().iter().zip(p).map(|(m, pi)| pi * m.upper().ln()).collect();
    (pairwise_sum(&lo), pairwise_sum(&hi))
}

pub fn birkhoff_check(ifs: &RecurrentIfs, traj: &ChaosTrajectory) -> Result<BirkhoffReport> {
    let len = traj.len();
    if len < MIN_BIRKHOFF_LEN {
        return Err(Error::TrajectoryTooShort { len, min: MIN_BIRKHOFF_LEN });
    }
    let n = ifs.len();
    // Count states and transitions, then average exactly from the counts.
    let mut visits = vec![0u64; n];
    let mut moves = vec![0u64; n * n];
    for w in traj.labels.windows(2) {
        moves[w[0] as usize * n + w[1] as usize] += 1;
    }
    for &l in &traj.labels {
        visits[l as usize] += 1;
    }
    let steps = (len - 1) as f64;
    let f_terms: Vec<f64> = (0..n * n)
        .filter(|&c| moves[c] > 0)
        .map(|c| moves[c] as f64 * ifs.matrix().get(c / n, c % n).ln())
        .collect();
    let lo: Vec<f64> = (0..n).map(|i| visits[i] as f64 * ifs.map(i).lower().ln()).collect();
    let hi: Vec<f64> = (0..n).map(|i| visits[i] as f64 * ifs.map(i).upper().ln()).collect();
    let (lyap_low, lyap_high) = lyapunov_pair(ifs);
    Ok(BirkhoffReport {
        f_avg: pairwise_sum(&f_terms) / steps,
        g_low: pairwise_sum(&lo) / len as f64,
        g_high: pairwise_sum(&hi) / len as f64,
        entropy: markov_entropy(ifs),
        lyap_low,
        lyap_high,
    })
}

use alloc::vec::Vec;
#[allow(unused_imports)] // unused when another crate in the graph links std
use num_traits::Float;

use super::{build_curve, eval_log_error, ErrorEnclosure, QuantSettings, QuantizationCurve};
use crate::ifs::{SscReport, System};
use crate::measure::{CylinderTree, Target};
use crate::stats::{pairwise_sum, xlogx};
use crate::symbolic::{p_hat, Word};
use crate::{Error, Result};

/// One numerical instance of an inequality `small ≤ large`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InequalityCheck {
    pub name: &'static str,
    pub n: usize,
    pub component: Option<usize>,
    pub small: f64,
    pub large: f64,
    /// `large − small`.
    pub slack: f64,
    /// Combined half-widths of the enclosures entering both sides.
    pub uncertainty: f64,
}

impl InequalityCheck {
    fn new(name: &'static str, n: usize, component: Option<usize>, small: f64, large: f64, uncertainty: f64) -> Self {
        Self { name, n, component, small, large, slack: large - small, uncertainty }
    }

    pub fn violated(&self) -> bool {
        self.slack < -self.uncertainty
    }
}

/// Best-found errors of `μ` and of every `μ̂_i` on a common set of budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentErrors {
    pub ns: Vec<usize>,
    pub full: Vec<ErrorEnclosure>,
    /// `components[i][k]` is the enclosure for `μ̂_i` at budget `ns[k]`.
    pub components: Vec<Vec<ErrorEnclosure>>,
    pub full_curve: QuantizationCurve,
}

impl ComponentErrors {
    /// Optimizes `μ` and each `μ̂_i` over `ns`. Every `μ̂_i` candidate is also
    /// compared with `μ`'s codebook restricted to `E_i`, so the best-found
    /// component values never lose to the joint codebook.
    pub fn compute(sys: &System, ns: &[usize], settings: &QuantSettings, seed: u64) -> Result<Self> {
        let full_curve = build_curve(sys, Target::Full, ns, settings, seed)?;
        let full: Vec<ErrorEnclosure> = full_curve.entries.iter().map(|e| e.enclosure).collect();
        let mut components = Vec::with_capacity(sys.len());
        for i in 0..sys.len() {
            let target = Target::Component(i);
            let curve = build_curve(sys, target, ns, settings, seed.wrapping_add(i as u64 + 1))
                .or_else(|_| build_curve(sys, target, ns, settings, seed.wrapping_add(97 * (i as u64 + 1))));
            let mut row = Vec::with_capacity(ns.len());
            for (k, entry) in full_curve.entries.iter().enumerate() {
                let joint = eval_log_error(sys, &entry.codebook, target, settings.tol_gap, settings.depth_cap, settings.tail)?;
                let best = match &curve {
                    Ok(c) if c.entries[k].enclosure.midpoint() < joint.midpoint() => c.entries[k].enclosure,
                    _ => joint,
                };
                row.push(best);
            }
            components.push(row);
        }
        Ok(Self { ns: ns.to_vec(), full, components, full_curve })
    }

    fn index(&self, n: usize) -> Option<usize> {
        self.ns.iter().position(|&m| m == n)
    }

    pub fn full_at(&self, n: usize) -> Option<ErrorEnclosure> {
        self.index(n).map(|k| self.full[k])
    }

    pub fn component_at(&self, i: usize, n: usize) -> Option<ErrorEnclosure> {
        self.index(n).map(|k| self.components[i][k])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub checks: Vec<InequalityCheck>,
    /// Lower-recursion checks, present only when separation is certified.
    pub lower_recursion: Option<Vec<InequalityCheck>>,
    pub errors: ComponentErrors,
}

impl DecompositionReport {
    pub fn all_checks(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().chain(self.lower_recursion.iter().flatten())
    }

    pub fn any_violated(&self) -> bool {
        self.all_checks().any(InequalityCheck::violated)
    }
}

/// Equal split `n_j = max(1, ⌊n/N⌋)` used for the recursion checks.
fn split_budget(n: usize, parts: usize) -> usize {
    (n / parts).max(1)
}

/// Budgets needed for `ns` and their equal splits.
fn budgets(ns: &[usize], parts: usize) -> Vec<usize> {
    let mut all: Vec<usize> = ns.iter().flat_map(|&n| [n, split_budget(n, parts)]).collect();
    all.sort_unstable();
    all.dedup();
    all
}

/// Checks, for each `n` in `ns`:
/// * `ê_n(μ) ≥ Σ p_i ê_n(μ̂_i)`,
/// * `ê_n(μ̂_i) ≤ log s̄_i + (1/p_i) Σ_j p_j p_ji ê_{n_j}(μ̂_j)` for each `i`,
/// * `ê_n(μ) ≤ Σ p_i log s̄_i + Σ_{i,j} p_j p_ji ê_{n_i}(μ̂_j)`,
///
/// with the equal split `n_j = max(1, ⌊n/N⌋)` (the component bound is skipped
/// when the predecessors of `i` would need more than `n` points), and the lower recursion
/// `ê_n(μ̂_i) ≥ log s̲_i + (1/p_i) Σ_j p_j p_ji ê_{n_j}(μ̂_j)` when `ssc` is
/// certified.
pub fn verify_decomposition_inequalities(
    sys: &System,
    ns: &[usize],
    settings: &QuantSettings,
    seed: u64,
    ssc: &SscReport,
) -> Result<DecompositionReport> {
    let n_states = sys.len();
    let errors = ComponentErrors::compute(sys, &budgets(ns, n_states), settings, seed)?;
    let ifs = &sys.ifs;
    let p = &ifs.stationary().p;
    let half = |e: ErrorEnclosure| 0.5 * e.width();
    let mut checks = Vec::new();
    for &n in ns {
        let full = errors.full_at(n).expect("budget computed");
        let comps: Vec<ErrorEnclosure> = (0..n_states).map(|i| errors.component_at(i, n).expect("budget computed")).collect();
        let mix = pairwise_sum(&(0..n_states).map(|i| p[i] * comps[i].midpoint()).collect::<Vec<_>>());
        let unc = half(full) + (0..n_states).map(|i| p[i] * half(comps[i])).sum::<f64>();
        checks.push(InequalityCheck::new("mixture-lower", n, None, mix, full.midpoint(), unc));

        let m = split_budget(n, n_states);
        let split: Vec<ErrorEnclosure> = (0..n_states).map(|j| errors.component_at(j, m).expect("budget computed")).collect();
        for i in 0..n_states {
            // Each predecessor gets m points; skip when that overspends n.
            let preds = (0..n_states).filter(|&j| ifs.matrix().get(j, i) > 0.0).count();
            if preds * m > n {
                continue;
            }
            let (rec, rec_unc) = recursion_sum(sys, i, &split);
            let large = ifs.map(i).upper().ln() + rec;
            checks.push(InequalityCheck::new("component-upper", n, Some(i), comps[i].midpoint(), large, half(comps[i]) + rec_unc));
        }
        let joint: f64 = pairwise_sum(&(0..n_states).map(|j| p[j] * split[j].midpoint()).collect::<Vec<_>>());
        let joint_unc: f64 = (0..n_states).map(|j| p[j] * half(split[j])).sum();
        let lyap: f64 = pairwise_sum(&(0..n_states).map(|i| p[i] * ifs.map(i).upper().ln()).collect::<Vec<_>>());
        checks.push(InequalityCheck::new("mixture-upper", n, None, full.midpoint(), lyap + joint, half(full) + joint_unc));
    }
    let lower_recursion = lower_recursion_checks(sys, ssc, &errors, ns).ok();
    Ok(DecompositionReport { checks, lower_recursion, errors })
}

/// `(1/p_i) Σ_j p_j p_ji ê(μ̂_j)` and its uncertainty.
fn recursion_sum(sys: &System, i: usize, split: &[ErrorEnclosure]) -> (f64, f64) {
    let p = &sys.ifs.stationary().p;
    let m = sys.ifs.matrix();
    let terms: Vec<f64> = (0..sys.len()).map(|j| p[j] * m.get(j, i) * split[j].midpoint() / p[i]).collect();
    let unc = (0..sys.len()).map(|j| p[j] * m.get(j, i) * 0.5 * split[j].width() / p[i]).sum();
    (pairwise_sum(&terms), unc)
}

/// `ê_n(μ̂_i) ≥ log s̲_i + (1/p_i) Σ_j p_j p_ji ê_{n_j}(μ̂_j)` at the equal
/// split. The bound is asymptotic, so small `n` may legitimately fail.
pub fn lower_recursion_checks(
    sys: &System,
    ssc: &SscReport,
    errors: &ComponentErrors,
    ns: &[usize],
) -> Result<Vec<InequalityCheck>> {
    if !ssc.certified {
        return Err(Error::SscNotCertified);
    }
    let n_states = sys.len();
    let mut out = Vec::new();
    for &n in ns {
        let m = split_budget(n, n_states);
        let split: Vec<ErrorEnclosure> = (0..n_states)
            .map(|j| errors.component_at(j, m).ok_or(Error::InvalidParameter("missing split budget")))
            .collect::<Result<_>>()?;
        for i in 0..n_states {
            let lhs = errors.component_at(i, n).ok_or(Error::InvalidParameter("missing budget"))?;
            let (rec, unc) = recursion_sum(sys, i, &split);
            let small = sys.ifs.map(i).lower().ln() + rec;
            out.push(InequalityCheck::new("component-lower", n, Some(i), small, lhs.midpoint(), 0.5 * lhs.width() + unc));
        }
    }
    Ok(out)
}

/// Terms of the constructive bound
/// `ê_n(μ) ≤ (1/C) Σ_{σ∈Γ(ε_n)} p_σ log p_σ + Σ_j ê_m(μ̂_j)`, `ε_n = (m/n) p̂⁻²`,
/// and of its rearrangement `log n + C ê_n(μ) ≤ −2 log p̂ + log m + C Σ_j ê_m(μ̂_j)`
/// up to the vanishing term `Σ p_σ log p_σ − log ε_n ≤ 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AntichainBoundReport {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub eps: f64,
    pub antichain_len: usize,
    /// `Σ_{σ∈Γ(ε_n)} p_σ log p_σ`.
    pub entropy: f64,
    /// `Σ_j ê_m(μ̂_j)`.
    pub component_sum: f64,
    pub bound: f64,
    pub e_n: f64,
    /// `Σ p_σ log p_σ − log ε_n`, nonpositive by construction.
    pub vanishing_term: f64,
    /// `log n + C ê_n(μ)`.
    pub scaled_error: f64,
    /// `−2 log p̂ + log m + C Σ_j ê_m(μ̂_j)`.
    pub scaled_bound: f64,
}

/// Evaluates the antichain bound for given `n, m, C` with best-found
/// `ê_n(μ)` and `ê_m(μ̂_j)`.
pub fn antichain_upper_bound(
    sys: &System,
    n: usize,
    m: usize,
    c: f64,
    e_n: f64,
    e_m_components: &[f64],
) -> Result<AntichainBoundReport> {
    let ph = p_hat(&sys.ifs);
    let eps = m as f64 / n as f64 / (ph * ph);
    if !(eps < 1.0) {
        return Err(Error::EpsilonOutOfRange { eps, upper: 1.0 });
    }
    if e_m_components.len() != sys.len() {
        return Err(Error::WrongCount { expected: sys.len(), found: e_m_components.len() });
    }
    let cells = CylinderTree::new(sys).antichain_cells(Target::Full, eps)?;
    let entropy = pairwise_sum(&cells.iter().map(|c| xlogx(c.weight)).collect::<Vec<_>>());
    let component_sum = pairwise_sum(e_m_components);
    Ok(AntichainBoundReport {
        n,
        m,
        c,
        eps,
        antichain_len: cells.len(),
        entropy,
        component_sum,
        bound: entropy / c + component_sum,
        e_n,
        vanishing_term: entropy - eps.ln(),
        scaled_error: (n as f64).ln() + c * e_n,
        scaled_bound: -2.0 * ph.ln() + (m as f64).ln() + c * component_sum,
    })
}

/// `Σ_{σ∈Γ₂} P_σ (Σ_j p_j p_{jσ_n} log(p_j p_{jσ_n}) − C p_{σ_n} log s̄_{σ_n})`,
/// where `Γ₂` collects the parents of the longest words of the antichain.
/// The induction step bounding `ê_n(μ)` over an antichain assumes this is
/// nonnegative; the sign is reported, not decided.
pub fn bracket_quantity(sys: &System, words: &[Word], c: f64) -> Result<f64> {
    let ifs = &sys.ifs;
    let p = &ifs.stationary().p;
    let longest = words.iter().map(Word::len).max().ok_or(Error::InvalidParameter("empty antichain"))?;
    let mut parents: Vec<Word> = words.iter().filter(|w| w.len() == longest && w.len() >= 2).map(Word::parent).collect();
    parents.sort();
    parents.dedup();
    let mut terms = Vec::with_capacity(parents.len());
    for s in &parents {
        let tail = crate::symbolic::word_probability(ifs, s)?.p_tail;
        let last = s.last();
        let inner: f64 = (0..ifs.len()).map(|j| xlogx(p[j] * ifs.word_step(last, j))).sum();
        terms.push(tail * (inner - c * p[last] * ifs.map(last).upper().ln()));
    }
    Ok(pairwise_sum(&terms))
}

/// `Σ y_i log(y_i / s_i)` for positive vectors with `Σ y ≥ Σ s`; the value
/// is nonnegative and zero exactly when `y = s`.
pub fn gibbs_sum(y: &[f64], s: &[f64]) -> Result<f64> {
    if y.len() != s.len() || y.is_empty() {
        return Err(Error::WrongCount { expected: s.len(), found: y.len() });
    }
    if y.iter().chain(s).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("entries must be positive"));
    }
    if pairwise_sum(y) < pairwise_sum(s) {
        return Err(Error::InvalidParameter("requires sum(y) >= sum(s)"));
    }
    Ok(pairwise_sum(&y.iter().zip(s).map(|(a, b)| a * (a / b).ln()).collect::<Vec<_>>()))
}

/// `log n + α ê_n` along a curve; `n^{1/α} e_n = exp(value/α)`.
pub fn scaled_log_error(curve: &QuantizationCurve, alpha: f64) -> Vec<(usize, f64)> {
    curve.entries.iter().map(|e| (e.n, (e.n as f64).ln() + alpha * e.e_best)).collect()
}

//! Row-stochastic transition matrices and their stationary distributions.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{solve, Matrix};
use crate::{Error, Result};

/// Row sums must equal one to within this tolerance. Inputs outside it are
/// rejected rather than renormalized.
pub const ROW_SUM_TOL: f64 = 1e-12;

pub const MAX_POWER_ITERATIONS: usize = 1_000_000;

/// A validated, irreducible, row-stochastic `N × N` matrix (`N ≥ 2`).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StochasticMatrix {
    entries: Matrix,
}

/// Probability vector `p` with `p P = p` and every `p_i > 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StationaryDistribution {
    pub p: Vec<f64>,
}

impl StochasticMatrix {
    /// Checks shape, signs, row sums and irreducibility. Entries are kept as
    /// given.
    pub fn validate(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::TooFewStates(n));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { row: i, expected: n, found: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::NegativeEntry { row: i, col: j, value: v });
                }
            }
        }
        for (i, row) in rows.iter().enumerate() {
            let deviation = row.iter().sum::<f64>() - 1.0;
            if deviation.abs() > ROW_SUM_TOL {
                return Err(Error::RowSumNotOne { row: i, deviation });
            }
        }
        if !is_irreducible(rows) {
            return Err(Error::NotIrreducible);
        }
        let entries = Matrix::from_rows(rows).ok_or(Error::TooFewStates(0))?;
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Transition probability `p_ij` (zero-based states).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.entries.row(i)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.to_rows()
    }

    /// Smallest positive transition probability.
    pub fn min_positive(&self) -> f64 {
        (0..self.len())
            .flat_map(|i| self.row(i).iter().copied())
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        (0..self.len()).flat_map(|i| self.row(i).iter().copied()).fold(0.0, f64::max)
    }

    /// Stationary distribution from the direct linear solve, cross-checked
    /// against power iteration (they must agree within `10·tol`).
    pub fn stationary(&self, tol: f64) -> Result<StationaryDistribution> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter("stationary tolerance must be positive"));
        }
        let direct = self.stationary_linear()?;
        let iterated = self.stationary_power(tol)?;
        let diff = direct
            .p
            .iter()
            .zip(&iterated.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if diff > 10.0 * tol {
            return Err(Error::SolverDisagreement(diff));
        }
        Ok(direct)
    }

    /// Solves `(Pᵀ − I) p = 0` with the last equation replaced by `Σ p = 1`.
    pub fn stationary_linear(&self) -> Result<StationaryDistribution> {
        let n = self.len();
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(j, i)] = self.get(i, j);
            }
            a[(i, i)] -= 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut rhs = vec![0.0; n];
        rhs[n - 1] = 1.0;
        let mut p = solve(&a, &rhs).ok_or(Error::NotIrreducible)?;
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        if p.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::NotIrreducible);
        }
        Ok(StationaryDistribution { p })
    }

    /// Power iteration from the uniform vector. The lazy chain `(P + I)/2` is
    /// iterated so that periodic chains converge too; it has the same
    /// stationary vector.
    pub fn stationary_power(&self, tol: f64) -> Result<StationaryDistribution> {
        let n = self.len();
        let mut p = vec![1.0 / n as f64; n];
        let mut next = vec![0.0; n];
        for _ in 0..MAX_POWER_ITERATIONS {
            next.iter_mut().for_each(|x| *x = 0.0);
            for (i, &pi) in p.iter().enumerate() {
                for (j, x) in next.iter_mut().enumerate() {
                    *x += pi * self.get(i, j);
                }
            }
            let total: f64 = next.iter().zip(&p).map(|(a, b)| 0.5 * (a + b)).sum();
            let mut delta: f64 = 0.0;
            for (x, old) in next.iter_mut().zip(p.iter()) {
                *x = 0.5 * (*x + old) / total;
                delta = delta.max((*x - old).abs());
            }
            core::mem::swap(&mut p, &mut next);
            if delta <= 1e-3 * tol {
                return Ok(StationaryDistribution { p });
            }
        }
        Err(Error::NoConvergence(MAX_POWER_ITERATIONS))
    }
}

impl StationaryDistribution {
    /// `‖pP − p‖_∞`.
    pub fn residual(&self, matrix: &StochasticMatrix) -> f64 {
        let n = self.p.len();
        (0..n)
            .map(|j| {
                let pj: f64 = (0..n).map(|i| self.p[i] * matrix.get(i, j)).sum();
                (pj - self.p[j]).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.p.iter().copied().fold(0.0, f64::max)
    }
}

/// Strong connectivity of the support graph (`i → j` iff `p_ij > 0`): one
/// forward and one reverse breadth-first search from state 0.
pub fn is_irreducible(rows: &[Vec<f64>]) -> bool {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return false;
    }
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                let w = if forward { rows[u][v] } else { rows[v][u] };
                if w > 0.0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitRng;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn validate_examples() {
        assert!(StochasticMatrix::validate(&m(&[&[0.0, 1.0], &[0.5, 0.5]])).is_ok());
        assert_eq!(
            StochasticMatrix::validate(&m(&[&[1.0, 0.0], &[0.0, 1.0]])),
            Err(Error::NotIrreducible)
        );
        match StochasticMatrix::validate(&m(&[&[0.3, 0.6], &[0.5, 0.5]])) {
            Err(Error::RowSumNotOne { row: 0, deviation }) => {
                assert!((deviation + 0.1).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            StochasticMatrix::validate(&m(&[&[-0.1, 1.1], &[0.5, 0.5]])),
            Err(Error::NegativeEntry { row: 0, col: 0, .. })
        ));
        assert_eq!(StochasticMatrix::validate(&m(&[&[1.0]])), Err(Error::TooFewStates(1)));
    }

    #[test]
    fn irreducibility_examples() {
        assert!(is_irreducible(&m(&[&[0.0, 1.0], &[1.0, 0.0]])));
        assert!(!is_irreducible(&m(&[&[1.0, 0.0], &[0.5, 0.5]])));
        let mut r = SplitRng::new(3);
        let dense: Vec<Vec<f64>> =
            (0..10).map(|_| (0..10).map(|_| 0.01 + r.uniform()).collect()).collect();
        assert!(is_irreducible(&dense));
    }

    #[test]
    fn stationary_two_state() {
        // p1 = p2/2 and p1 + p2 = 1 solved by hand: (1/3, 2/3).
        let p = StochasticMatrix::validate(&m(&[&[0.0, 1.0], &[0.5, 0.5]]))
            .unwrap()
            .stationary(1e-13)
            .unwrap();
        assert!((p.p[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!((p.p[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn stationary_symmetric_and_doubly_stochastic() {
        let p = StochasticMatrix::validate(&m(&[&[0.5, 0.5], &[0.5, 0.5]]))
            .unwrap()
            .stationary(1e-13)
            .unwrap();
        assert!(p.p.iter().all(|&x| (x - 0.5).abs() < 1e-15));
        let ds = m(&[&[0.2, 0.3, 0.5], &[0.5, 0.2, 0.3], &[0.3, 0.5, 0.2]]);
        let p = StochasticMatrix::validate(&ds).unwrap().stationary(1e-13).unwrap();
        assert!(p.p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-14));
    }

    #[test]
    fn periodic_chain_converges() {
        let p = StochasticMatrix::validate(&m(&[&[0.0, 1.0], &[1.0, 0.0]]))
            .unwrap()
            .stationary(1e-13)
            .unwrap();
        assert!(p.p.iter().all(|&x| (x - 0.5).abs() < 1e-14));
    }

    fn random_irreducible(seed: u64, n: usize, sparsity: f64) -> Vec<Vec<f64>> {
        let mut r = SplitRng::new(seed);
        loop {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let raw: Vec<f64> = (0..n)
                        .map(|_| if r.uniform() < sparsity { 0.0 } else { r.uniform() })
                        .collect();
                    let s: f64 = raw.iter().sum();
                    if s == 0.0 {
                        return raw;
                    }
                    raw.iter().map(|x| x / s).collect()
                })
                .collect();
            if StochasticMatrix::validate(&rows).is_ok() {
                return rows;
            }
        }
    }

    proptest! {
        #[test]
        fn stationary_is_invariant_and_solvers_agree(seed in 0u64..10_000, n in 2usize..8) {
            let rows = random_irreducible(seed, n, 0.4);
            let mat = StochasticMatrix::validate(&rows).unwrap();
            let tol = 1e-12;
            let direct = mat.stationary_linear().unwrap();
            let iter = mat.stationary_power(tol).unwrap();
            prop_assert!(direct.residual(&mat) <= tol);
            prop_assert!(direct.p.iter().all(|&x| x > 0.0));
            for (a, b) in direct.p.iter().zip(&iter.p) {
                prop_assert!((a - b).abs() <= 10.0 * tol);
            }
        }

        #[test]
        fn stationary_is_permutation_equivariant(seed in 0u64..10_000) {
            let n = 5;
            let rows = random_irreducible(seed, n, 0.3);
            let mut r = SplitRng::new(seed ^ 0xabc);
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = (r.next_u64() % (i as u64 + 1)) as usize;
                perm.swap(i, j);
            }
            // Relabel: new state perm[i] is old state i.
            let mut permuted = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    permuted[perm[i]][perm[j]] = rows[i][j];
                }
            }
            let p = StochasticMatrix::validate(&rows).unwrap().stationary(1e-12).unwrap();
            let q = StochasticMatrix::validate(&permuted).unwrap().stationary(1e-12).unwrap();
            for i in 0..n {
                prop_assert!((p.p[i] - q.p[perm[i]]).abs() < 1e-12);
            }
        }
    }
}

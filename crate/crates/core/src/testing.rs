//! Small systems shared by unit tests.

use alloc::vec;
use alloc::vec::Vec;

use crate::ifs::{AxisBox, ContractionMap, RecurrentIfs};
use crate::linalg::Matrix;
use crate::markov::StochasticMatrix;
use crate::rng::SplitRng;

pub fn line_ifs(maps: &[(f64, f64)], rows: &[Vec<f64>]) -> RecurrentIfs {
    let maps = maps.iter().map(|&(s, b)| ContractionMap::scaling(s, vec![b]).unwrap()).collect();
    let m = StochasticMatrix::validate(rows).unwrap();
    RecurrentIfs::new(maps, m, AxisBox::new(vec![0.0], vec![1.0]).unwrap()).unwrap()
}

pub fn cantor_ifs() -> RecurrentIfs {
    line_ifs(&[(1.0 / 3.0, 0.0), (1.0 / 3.0, 2.0 / 3.0)], &[vec![0.5, 0.5], vec![0.5, 0.5]])
}

pub fn uniform_ifs() -> RecurrentIfs {
    line_ifs(&[(0.5, 0.0), (0.5, 0.5)], &[vec![0.5, 0.5], vec![0.5, 0.5]])
}

pub fn two_state_ifs() -> RecurrentIfs {
    line_ifs(&[(0.25, 0.0), (1.0 / 3.0, 2.0 / 3.0)], &[vec![0.0, 1.0], vec![0.5, 0.5]])
}

pub fn mixed_full_ifs() -> RecurrentIfs {
    line_ifs(&[(0.25, 0.0), (1.0 / 3.0, 2.0 / 3.0)], &[vec![0.5, 0.5], vec![0.5, 0.5]])
}

pub fn overlapping_ifs() -> RecurrentIfs {
    line_ifs(&[(0.6, 0.0), (0.6, 0.4)], &[vec![0.5, 0.5], vec![0.5, 0.5]])
}

pub fn affine_ifs() -> RecurrentIfs {
    let maps = vec![
        ContractionMap::affine(Matrix::diagonal(&[0.35, 0.25]), vec![0.0, 0.0]).unwrap(),
        ContractionMap::affine(Matrix::diagonal(&[0.25, 0.35]), vec![0.65, 0.0]).unwrap(),
        ContractionMap::affine(Matrix::diagonal(&[0.3, 0.2]), vec![0.3, 0.75]).unwrap(),
    ];
    let m = StochasticMatrix::validate(&[
        vec![0.2, 0.5, 0.3],
        vec![0.4, 0.2, 0.4],
        vec![0.3, 0.3, 0.4],
    ])
    .unwrap();
    RecurrentIfs::new(maps, m, AxisBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()).unwrap()
}

/// Random separated system on `[0, 1]` with a dense positive matrix.
pub fn random_ifs(seed: u64, n: usize) -> RecurrentIfs {
    let mut rng = SplitRng::new(seed);
    let slot = 1.0 / n as f64;
    let maps: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let s = slot * rng.uniform_in(0.3, 0.8);
            (s, i as f64 * slot + rng.uniform_in(0.0, slot - s))
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let r: Vec<f64> = (0..n).map(|_| rng.uniform_in(0.1, 1.0)).collect();
            let s: f64 = r.iter().sum();
            r.iter().map(|v| v / s).collect()
        })
        .collect();
    line_ifs(&maps, &rows)
}

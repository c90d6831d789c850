//! Brute-force reference path shared by the integration suites: explicit tensor-product
//! states, their Gram matrix, a dense PSD square root and the generic mutual information.

#![allow(dead_code)]

use qchannel::detection::ChannelMatrix;
use qchannel::ensembles::{codeword_states, Code, GramMatrix};
use qchannel::information::mutual_information;
use qchannel::linalg::{self, Matrix, SymMatrix};
use rand::Rng;

pub struct BruteForce {
    pub info: f64,
    pub error: f64,
    pub sqrt_gram: SymMatrix,
}

/// Square-root channel of `code` at equal priors, from the explicit `2ⁿ`-dim embedding.
pub fn brute_force(code: &Code, kappa: f64) -> BruteForce {
    let states = codeword_states(code, kappa).unwrap();
    let gram = GramMatrix::from_states(&states, None).unwrap();
    let root = linalg::sqrt_psd(gram.matrix(), linalg::DEFAULT_CLAMP_TOL).unwrap();
    let m = code.len();
    let channel = ChannelMatrix::new(Matrix::from_fn(m, m, |i, j| root[(j, i)].powi(2))).unwrap();
    let info = mutual_information(code.priors(), &channel)
        .unwrap()
        .mutual_information_bits;
    let success: f64 = (0..m).map(|i| root[(i, i)].powi(2)).sum::<f64>() / m as f64;
    BruteForce {
        info,
        error: 1.0 - success,
        sqrt_gram: root,
    }
}

/// Orthonormal rows from Gram–Schmidt on uniform random entries.
pub fn random_orthogonal(rng: &mut impl Rng, dim: usize) -> Matrix {
    loop {
        let raw = Matrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
        if let Some(q) = orthonormalize_rows(&raw) {
            return q;
        }
    }
}

pub fn orthonormalize_rows(raw: &Matrix) -> Option<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..raw.rows() {
        let mut v = raw.row(i).to_vec();
        for _ in 0..2 {
            for r in &rows {
                let p = linalg::dot(r, &v);
                v.iter_mut().zip(r).for_each(|(x, y)| *x -= p * y);
            }
        }
        let nrm = linalg::norm(&v);
        if nrm < 1e-6 {
            return None;
        }
        rows.push(v.into_iter().map(|x| x / nrm).collect());
    }
    Some(Matrix::from_rows(&rows).unwrap())
}

pub fn random_priors(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

//! Measurements on the span of linearly independent pure states.
//!
//! For linearly independent states a rank-one projective measurement with one vector per
//! state is enough, so a [`Measurement`] is just an orthonormal set of row vectors.
//! Everything is real: conjugations in the optimality conditions reduce to plain products.
//!
//! With `X_ij = ⟨ωᵢ|ρⱼ⟩` and priors `ξ`, a measurement minimizes the average error iff
//!
//! - `ξᵢ Xᵢᵢ Xⱼᵢ = ξⱼ Xᵢⱼ Xⱼⱼ` for all pairs, and
//! - `Υ′ = (ξᵢ Xᵢᵢ Xⱼᵢ)` is positive definite (sufficient for independent states), or the
//!   exhaustive family `T⁽ᵐ⁾ = (ξᵢ Xᵢᵢ Xⱼᵢ − ξₘ Xᵢₘ Xⱼₘ) ≥ 0`.

use crate::ensembles::{self, validate_priors, GramMatrix, StateEmbedding, MAX_EMBEDDING_DIM};
use crate::error::{Error, Result};
use crate::linalg::{self, dot, kron, Matrix, SymMatrix};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SWEEPS: usize = 500;

/// Below this eigenvalue (relative to the largest) a Gram matrix counts as singular.
const SINGULAR_TOL: f64 = 1e-12;
const ORTHONORMAL_TOL: f64 = 1e-10;
const CHANNEL_ROW_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementKind {
    SquareRoot,
    Helstrom,
    Optimized,
    Product,
    Custom,
}

/// What the measurement coordinates are relative to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    /// The `M`-dimensional frame of [`StateEmbedding::from_gram`].
    Gram,
    /// The coordinates of an explicit [`StateEmbedding`].
    Ambient,
}

/// Orthonormal measurement vectors, one per row.
#[derive(Clone, Debug)]
pub struct Measurement {
    kind: MeasurementKind,
    frame: Frame,
    vectors: Matrix,
}

impl Measurement {
    pub fn new(vectors: Matrix, kind: MeasurementKind, frame: Frame) -> Result<Self> {
        if vectors.rows() == 0 || vectors.rows() > vectors.cols() {
            return Err(Error::InvalidInput(format!(
                "{} measurement vectors cannot be orthonormal in {} dimensions",
                vectors.rows(),
                vectors.cols()
            )));
        }
        let residual = vectors.row_orthonormality_residual();
        if residual > ORTHONORMAL_TOL {
            return Err(Error::InvalidInput(format!(
                "measurement vectors are not orthonormal (residual {residual:e})"
            )));
        }
        Ok(Measurement {
            kind,
            frame,
            vectors,
        })
    }

    pub fn kind(&self) -> MeasurementKind {
        self.kind
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn num_outcomes(&self) -> usize {
        self.vectors.rows()
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    /// `X_ij = ⟨ωᵢ|ρⱼ⟩`.
    pub fn overlaps(&self, states: &StateEmbedding) -> Result<Matrix> {
        if states.dim() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "measurement lives in {} dimensions, states in {}",
                self.dim(),
                states.dim()
            )));
        }
        Ok(self.vectors.matmul_transpose(states.vectors()))
    }
}

/// Row-stochastic `P(j|i)`: row `i` is the sent state, column `j` the outcome.
#[derive(Clone, Debug)]
pub struct ChannelMatrix {
    entries: Matrix,
}

impl ChannelMatrix {
    pub fn new(entries: Matrix) -> Result<Self> {
        for i in 0..entries.rows() {
            let row = entries.row(i);
            if let Some(p) = row.iter().find(|p| !(-1e-15..=1.0 + 1e-12).contains(*p)) {
                return Err(Error::InvalidInput(format!("channel entry {p} in row {i}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > CHANNEL_ROW_TOL {
                return Err(Error::InvalidInput(format!(
                    "channel row {i} sums to {sum}"
                )));
            }
        }
        Ok(ChannelMatrix { entries })
    }

    /// `P(j|i) = |⟨ωⱼ|ρᵢ⟩|²`.
    pub fn from_measurement(meas: &Measurement, states: &StateEmbedding) -> Result<Self> {
        let x = meas.overlaps(states)?;
        ChannelMatrix::new(Matrix::from_fn(x.cols(), x.rows(), |i, j| {
            x[(j, i)] * x[(j, i)]
        }))
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn num_inputs(&self) -> usize {
        self.entries.rows()
    }

    pub fn num_outputs(&self) -> usize {
        self.entries.cols()
    }

    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.entries[(input, output)]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityReport {
    /// `max |ξᵢXᵢᵢXⱼᵢ − ξⱼXᵢⱼXⱼⱼ|`.
    pub cond_i_residual: f64,
    /// Smallest eigenvalue of the symmetrized `Υ′`.
    pub cond_ii_min_eig: f64,
    pub is_optimal: bool,
    /// `Υ′` strictly positive definite, the sufficient certificate for independent states.
    pub upsilon_positive_definite: bool,
    pub error_probability: f64,
}

fn report_from_overlaps(x: &Matrix, priors: &[f64], tol: f64) -> Result<OptimalityReport> {
    let m = x.rows();
    let mut residual: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let lhs = priors[i] * x[(i, i)] * x[(j, i)];
            let rhs = priors[j] * x[(i, j)] * x[(j, j)];
            residual = residual.max((lhs - rhs).abs());
        }
    }
    let upsilon = Matrix::from_fn(m, m, |i, j| priors[i] * x[(i, i)] * x[(j, i)]);
    let min_eig = linalg::eig_sym(&SymMatrix::symmetrize(&upsilon)?)?.min_value();
    let success: f64 = (0..m).map(|i| priors[i] * x[(i, i)] * x[(i, i)]).sum();
    Ok(OptimalityReport {
        cond_i_residual: residual,
        cond_ii_min_eig: min_eig,
        is_optimal: residual <= tol && min_eig >= -tol,
        upsilon_positive_definite: min_eig > tol,
        error_probability: 1.0 - success,
    })
}

fn check_dims(meas: &Measurement, states: &StateEmbedding, priors: &[f64]) -> Result<()> {
    if meas.num_outcomes() != states.len() {
        return Err(Error::InvalidInput(format!(
            "{} measurement vectors for {} states",
            meas.num_outcomes(),
            states.len()
        )));
    }
    if meas.dim() != states.dim() {
        return Err(Error::InvalidInput(format!(
            "measurement dimension {} differs from state dimension {}",
            meas.dim(),
            states.dim()
        )));
    }
    validate_priors(priors, states.len())
}

/// Evaluates the minimum-error conditions for `meas` on `states` with `priors`.
pub fn check_optimality(
    meas: &Measurement,
    states: &StateEmbedding,
    priors: &[f64],
    tol: f64,
) -> Result<OptimalityReport> {
    check_dims(meas, states, priors)?;
    report_from_overlaps(&meas.overlaps(states)?, priors, tol)
}

/// Same as [`check_optimality`] with the states given by their (unweighted) Gram matrix and
/// `meas` expressed in the [`Frame::Gram`] frame.
pub fn check_optimality_gram(
    meas: &Measurement,
    gram: &GramMatrix,
    priors: &[f64],
    tol: f64,
) -> Result<OptimalityReport> {
    if gram.weighted() {
        return Err(Error::InvalidInput(
            "expected an unweighted Gram matrix".into(),
        ));
    }
    check_optimality(meas, &StateEmbedding::from_gram(gram)?, priors, tol)
}

/// Smallest eigenvalue over the whole `T⁽ᵐ⁾` family (condition ii′).
pub fn check_condition_ii_exhaustive(
    meas: &Measurement,
    states: &StateEmbedding,
    priors: &[f64],
) -> Result<f64> {
    check_dims(meas, states, priors)?;
    let x = meas.overlaps(states)?;
    let m = x.rows();
    let mut worst = f64::INFINITY;
    for k in 0..m {
        let t = Matrix::from_fn(m, m, |i, j| {
            priors[i] * x[(i, i)] * x[(j, i)] - priors[k] * x[(i, k)] * x[(j, k)]
        });
        let e = linalg::eig_sym(&SymMatrix::symmetrize(&t)?)?.min_value();
        worst = worst.min(e);
    }
    Ok(worst)
}

fn require_nonsingular(eig: &linalg::EigenDecomp) -> Result<()> {
    let scale = eig.values.last().copied().unwrap_or(1.0).abs().max(1.0);
    if eig.min_value() <= SINGULAR_TOL * scale {
        return Err(Error::LinearDependence(format!(
            "Gram matrix has eigenvalue {:e}",
            eig.min_value()
        )));
    }
    Ok(())
}

/// Square-root measurement read off the Gram matrix.
///
/// In the Gram frame the measurement vectors are the standard basis and
/// `(√Γ)ᵢⱼ = ⟨μᵢ|ρⱼ⟩√Γⱼⱼ`, so `P(j|i) = (√Γ)ⱼᵢ² / Γᵢᵢ` covers both the weighted
/// (`Γᵢᵢ = ξᵢ`) and the unweighted (`Γᵢᵢ = 1`) convention.
pub fn square_root_measurement(gram: &GramMatrix) -> Result<(Measurement, ChannelMatrix)> {
    let eig = linalg::eig_sym(gram.matrix())?;
    require_nonsingular(&eig)?;
    let root = linalg::sqrt_from_eig(&eig, linalg::DEFAULT_CLAMP_TOL)?;
    let g = gram.matrix();
    let m = gram.dim();
    let channel = ChannelMatrix::new(Matrix::from_fn(m, m, |i, j| {
        root[(j, i)] * root[(j, i)] / g[(i, i)]
    }))?;
    let meas = Measurement::new(
        Matrix::identity(m),
        MeasurementKind::SquareRoot,
        Frame::Gram,
    )?;
    Ok((meas, channel))
}

/// Square-root measurement `|μᵢ⟩ = ρ̂^{-1/2}|ρ̃ᵢ⟩` in the ambient coordinates of `states`.
/// Without priors the unweighted density operator `Σ|ρᵢ⟩⟨ρᵢ|` is used.
pub fn square_root_measurement_for(
    states: &StateEmbedding,
    priors: Option<&[f64]>,
) -> Result<Measurement> {
    let gram = GramMatrix::from_states(states, priors)?;
    let inv_root = linalg::inv_sqrt_pd(gram.matrix(), SINGULAR_TOL)?;
    let m = states.len();
    let weights: Vec<f64> = match priors {
        Some(p) => p.iter().map(|x| x.sqrt()).collect(),
        None => vec![1.0; m],
    };
    // |μᵢ⟩ = Σₖ |ρ̃ₖ⟩ (Γ̃^{-1/2})ₖᵢ
    let coeffs = Matrix::from_fn(m, m, |i, k| inv_root[(k, i)] * weights[k]);
    let vectors = coeffs.matmul(states.vectors());
    Measurement::new(vectors, MeasurementKind::SquareRoot, Frame::Ambient)
}

/// `max |⟨μᵢ|μⱼ⟩ − δᵢⱼ|` for the square-root measurement of `gram`, computed in an
/// independent Cholesky frame (`ρ̃ⱼ` = column `j` of `Lᵀ`).
pub fn verify_sqm_orthonormal(gram: &GramMatrix) -> Result<f64> {
    let eig = linalg::eig_sym(gram.matrix())?;
    require_nonsingular(&eig)?;
    let l = linalg::cholesky(gram.matrix())?;
    let states = l.transpose();
    // ρ̂ = Σⱼ ρ̃ⱼρ̃ⱼᵀ = Lᵀ L
    let rho = SymMatrix::symmetrize(&states.matmul(&l))?;
    let rho_inv_root = linalg::inv_sqrt_pd(&rho, 0.0)?;
    let mu = rho_inv_root.as_matrix().matmul(&states);
    Ok(mu.orthogonality_residual())
}

/// Closed-form minimum error for two pure states with overlap `s` and priors `(ξ₁, 1 − ξ₁)`.
pub fn binary_helstrom_error(overlap: f64, xi1: f64) -> f64 {
    let xi2 = 1.0 - xi1;
    0.5 * (1.0 - (1.0 - 4.0 * xi1 * xi2 * overlap * overlap).max(0.0).sqrt())
}

/// Minimum-error measurement for the binary letters of [`ensembles::embed_binary_letters`]
/// with priors `(ξ₁, 1 − ξ₁)`: the eigenbasis of `ξ₁ρ̂₁ − ξ₂ρ̂₂`.
pub fn helstrom_binary(kappa: f64, xi1: f64) -> Result<(Measurement, f64)> {
    if !(xi1 > 0.0 && xi1 < 1.0) {
        return Err(Error::InvalidInput(format!(
            "prior ξ₁ = {xi1} outside (0, 1)"
        )));
    }
    let letters = ensembles::embed_binary_letters(kappa)?;
    let xi = [xi1, 1.0 - xi1];
    let delta = SymMatrix::from_fn(2, |i, j| {
        xi[0] * letters[0][i] * letters[0][j] - xi[1] * letters[1][i] * letters[1][j]
    })?;
    let eig = linalg::eig_sym(&delta)?;
    let mut rows = [eig.vectors.column(1), eig.vectors.column(0)];
    for (row, letter) in rows.iter_mut().zip(&letters) {
        if dot(row, letter) < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let error = 1.0
        - rows
            .iter()
            .zip(&letters)
            .zip(&xi)
            .map(|((r, s), p)| p * dot(r, s).powi(2))
            .sum::<f64>();
    let meas = Measurement::new(
        Matrix::from_rows(&rows)?,
        MeasurementKind::Helstrom,
        Frame::Ambient,
    )?;
    Ok((meas, error))
}

/// Result of [`bayes_cost_reduction`].
#[derive(Clone, Debug)]
pub struct BayesOutcome {
    pub measurement: Measurement,
    pub report: OptimalityReport,
    pub sweeps: usize,
    /// Average error before the first sweep and after every sweep.
    pub error_history: Vec<f64>,
}

/// Pairwise-rotation search for the minimum-error measurement.
///
/// Each step rotates `|ωᵢ⟩, |ωⱼ⟩` inside their plane by the angle that solves the binary
/// subproblem exactly, so the average error never increases. Pairs are visited in
/// lexicographic order; the search stops once both optimality conditions hold within `tol`.
pub fn bayes_cost_reduction(
    states: &StateEmbedding,
    priors: &[f64],
    init: &Measurement,
    tol: f64,
    max_sweeps: usize,
) -> Result<BayesOutcome> {
    check_dims(init, states, priors)?;
    let gram = states.inner_products();
    if !linalg::is_positive_definite(&gram, SINGULAR_TOL) {
        return Err(Error::LinearDependence(
            "Bayes-cost reduction needs independent states".into(),
        ));
    }

    let m = states.len();
    let mut omega = init.vectors().clone();
    let mut x = init.overlaps(states)?;
    let error_of = |x: &Matrix| 1.0 - (0..m).map(|i| priors[i] * x[(i, i)].powi(2)).sum::<f64>();

    let mut history = vec![error_of(&x)];
    let mut report = report_from_overlaps(&x, priors, tol)?;
    let mut sweeps = 0;

    while !report.is_optimal {
        if sweeps == max_sweeps {
            let measurement = Measurement::new(omega, MeasurementKind::Optimized, init.frame())?;
            return Err(Error::Unconverged {
                sweeps,
                best: Box::new(BayesOutcome {
                    measurement,
                    report,
                    sweeps,
                    error_history: history,
                }),
            });
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let (a, b) = (x[(i, i)], x[(j, i)]);
                let (c, d) = (x[(i, j)], x[(j, j)]);
                // success(φ) = const + (P cos 2φ + Q sin 2φ) / 2
                let p = priors[i] * (a * a - b * b) + priors[j] * (d * d - c * c);
                let q = 2.0 * (priors[i] * a * b - priors[j] * c * d);
                if q == 0.0 && p >= 0.0 {
                    continue;
                }
                let phi = 0.5 * q.atan2(p);
                let (s, co) = phi.sin_cos();
                rotate_rows(&mut omega, i, j, co, s);
                rotate_rows(&mut x, i, j, co, s);
            }
        }
        sweeps += 1;
        let err = error_of(&x);
        debug_assert!(err <= history[history.len() - 1] + 1e-14, "error increased");
        history.push(err);
        report = report_from_overlaps(&x, priors, tol)?;
    }

    let measurement = Measurement::new(omega, MeasurementKind::Optimized, init.frame())?;
    Ok(BayesOutcome {
        measurement,
        report,
        sweeps,
        error_history: history,
    })
}

/// `rᵢ ← c rᵢ + s rⱼ`, `rⱼ ← −s rᵢ + c rⱼ`.
fn rotate_rows(m: &mut Matrix, i: usize, j: usize, c: f64, s: f64) {
    for k in 0..m.cols() {
        let ri = m[(i, k)];
        let rj = m[(j, k)];
        m[(i, k)] = c * ri + s * rj;
        m[(j, k)] = -s * ri + c * rj;
    }
}

/// Outcome `(a, b)` of the product measurement is row `a * |b| + b`.
pub fn tensor_measurements(a: &Measurement, b: &Measurement) -> Result<Measurement> {
    let dim = a.dim() * b.dim();
    let outcomes = a.num_outcomes() * b.num_outcomes();
    if dim > MAX_EMBEDDING_DIM || outcomes > MAX_EMBEDDING_DIM {
        return Err(Error::ResourceLimit(format!(
            "product measurement of dimension {dim}"
        )));
    }
    let mut rows = Vec::with_capacity(outcomes);
    for i in 0..a.num_outcomes() {
        for j in 0..b.num_outcomes() {
            rows.push(kron(a.vectors().row(i), b.vectors().row(j)));
        }
    }
    Measurement::new(
        Matrix::from_rows(&rows)?,
        MeasurementKind::Product,
        Frame::Ambient,
    )
}

/// `n`-fold tensor power of a single-letter measurement; outcome `(i₁…iₙ)` is indexed with
/// `i₁` most significant.
pub fn product_pom(base: &Measurement, n: usize) -> Result<Measurement> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "product measurement needs n >= 1".into(),
        ));
    }
    let too_big = |x: usize| (x as f64).powi(n as i32) > MAX_EMBEDDING_DIM as f64;
    if too_big(base.dim()) || too_big(base.num_outcomes()) {
        return Err(Error::ResourceLimit(format!(
            "{}-fold product of a {}-dimensional measurement",
            n,
            base.dim()
        )));
    }
    if n == 1 {
        return Ok(base.clone());
    }
    let mut out = base.clone();
    for _ in 1..n {
        out = tensor_measurements(&out, base)?;
    }
    Ok(out)
}

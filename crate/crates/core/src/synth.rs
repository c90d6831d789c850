//! Decoder synthesis: turn a collective measurement into an adapting unitary followed by a
//! letter-by-letter measurement, then factor the unitary into plane rotations.
//!
//! Coordinates of the `2ⁿ`-dimensional space are taken in the tensor basis
//! `|A_k⟩ = |a⟩ ⊗ … ⊗ |b⟩` built from [`letter_frame`], with bit `0 ↦ |a⟩`, `1 ↦ |b⟩` and the
//! first letter most significant. The unitary `U` maps measurement vector `|ωⱼ⟩` to the
//! basis vector of its assigned label, so measuring `U|S⟩` in the `A` basis reproduces the
//! collective measurement.

use std::fmt::Write as _;

use crate::detection::{Frame, Measurement};
use crate::ensembles::{self, embed_binary_letters, Code};
use crate::error::{Error, Result};
use crate::linalg::{self, dot, kron, Matrix};

/// Largest block length handled here; `U` is a dense `2ⁿ × 2ⁿ` matrix.
pub const MAX_SYNTH_N: usize = 12;

const RESIDUAL_FLOOR: f64 = 1e-8;
const ZERO_ENTRY: f64 = 1e-15;

pub fn check_block_length(n: usize) -> Result<()> {
    if n > MAX_SYNTH_N {
        return Err(Error::ResourceLimit(format!(
            "decoder synthesis is limited to n <= {MAX_SYNTH_N}, got {n}"
        )));
    }
    Ok(())
}

/// `|a⟩ ∝ |+⟩ + |−⟩` and `|b⟩ ∝ |+⟩ − |−⟩`, in the letter coordinates of
/// [`embed_binary_letters`].
pub fn letter_frame(kappa: f64) -> Result<[[f64; 2]; 2]> {
    let [plus, minus] = embed_binary_letters(kappa)?;
    let a = [plus[0] + minus[0], plus[1] + minus[1]];
    let b = [plus[0] - minus[0], plus[1] - minus[1]];
    let (na, nb) = (linalg::norm(&a), linalg::norm(&b));
    Ok([[a[0] / na, a[1] / na], [b[0] / nb, b[1] / nb]])
}

/// Extends orthonormal rows `basis` to a full orthonormal basis by Gram–Schmidt over
/// `candidates` in order. Every candidate is expected to contribute.
pub fn schmidt_extend(basis: &Matrix, candidates: &Matrix) -> Result<Matrix> {
    let dim = basis.cols();
    if candidates.cols() != dim {
        return Err(Error::InvalidInput(
            "basis and candidates differ in dimension".into(),
        ));
    }
    if basis.rows() + candidates.rows() != dim {
        return Err(Error::InvalidInput(format!(
            "{} basis vectors and {} candidates cannot span {} dimensions",
            basis.rows(),
            candidates.rows(),
            dim
        )));
    }
    let mut rows: Vec<Vec<f64>> = (0..basis.rows()).map(|i| basis.row(i).to_vec()).collect();
    for c in 0..candidates.rows() {
        let mut v = candidates.row(c).to_vec();
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for r in &rows {
                let proj = dot(r, &v);
                v.iter_mut().zip(r).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let nrm = linalg::norm(&v);
        if nrm < RESIDUAL_FLOOR {
            return Err(Error::LinearDependence(format!(
                "candidate {c} lies in the span of the previous vectors (residual {nrm:e})"
            )));
        }
        v.iter_mut().for_each(|x| *x /= nrm);
        rows.push(v);
    }
    Matrix::from_rows(&rows)
}

#[derive(Clone, Debug)]
pub struct SynthesizedUnitary {
    n: usize,
    unitary: Matrix,
    labels: Vec<usize>,
    error_probability: f64,
    assigned_mass_residual: f64,
}

impl SynthesizedUnitary {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn unitary(&self) -> &Matrix {
        &self.unitary
    }

    /// Basis label assigned to each codeword.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// `1 − Σₘ ζₘ ⟨A_{label(m)}|U|Sₘ⟩²`.
    pub fn error_probability(&self) -> f64 {
        self.error_probability
    }

    /// `max |Σ_{assigned labels ℓ} ⟨A_ℓ|U|Sₘ⟩² − 1|` over codewords.
    pub fn assigned_mass_residual(&self) -> f64 {
        self.assigned_mass_residual
    }

    pub fn orthogonality_residual(&self) -> f64 {
        self.unitary.orthogonality_residual()
    }

    /// Row-major text: one line per row, values separated by single spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.unitary.rows() {
            let line: Vec<String> = self
                .unitary
                .row(i)
                .iter()
                .map(|x| format!("{x:.17e}"))
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Tensor-basis coordinates of every sequence: rows are sequences in index order.
fn tensor_frame(n: usize, kappa: f64) -> Result<Matrix> {
    let frame = letter_frame(kappa)?;
    let mut a_basis = vec![vec![1.0]];
    for _ in 0..n {
        a_basis = a_basis
            .iter()
            .flat_map(|v| frame.iter().map(move |f| kron(v, f)))
            .collect();
    }
    Matrix::from_rows(&a_basis)
}

/// Builds `U` for `measurement` (ambient frame, one vector per codeword) on `code` at
/// overlap `kappa`. `labels[m]` is the basis label assigned to codeword `m`; the default is
/// `m ↦ m`.
pub fn synthesize_unitary(
    code: &Code,
    kappa: f64,
    measurement: &Measurement,
    labels: Option<&[usize]>,
) -> Result<SynthesizedUnitary> {
    let n = code.n();
    check_block_length(n)?;
    let dim = 1usize << n;
    let m = code.len();
    if measurement.frame() != Frame::Ambient
        || measurement.dim() != dim
        || measurement.num_outcomes() != m
    {
        return Err(Error::InvalidInput(format!(
            "expected {m} measurement vectors in the {dim}-dimensional sequence space"
        )));
    }
    let labels: Vec<usize> = match labels {
        Some(l) => l.to_vec(),
        None => (0..m).collect(),
    };
    if labels.len() != m {
        return Err(Error::InvalidInput(format!(
            "{} labels for {m} codewords",
            labels.len()
        )));
    }
    let mut used = vec![false; dim];
    for &l in &labels {
        if l >= dim || std::mem::replace(&mut used[l], true) {
            return Err(Error::InvalidInput(format!(
                "label {l} is out of range or repeated"
            )));
        }
    }

    // Sequences: codewords in code order, then everything else in index order.
    let letters = embed_binary_letters(kappa)?;
    let is_codeword: Vec<bool> = {
        let mut v = vec![false; dim];
        code.words().iter().for_each(|&w| v[w as usize] = true);
        v
    };
    let order: Vec<u64> = code
        .words()
        .iter()
        .copied()
        .chain((0..dim as u64).filter(|&w| !is_codeword[w as usize]))
        .collect();
    let seqs: Vec<Vec<f64>> = order
        .iter()
        .map(|&w| ensembles::sequence_state(&letters, n, w))
        .collect();
    let seqs = Matrix::from_rows(&seqs)?;

    let rest = Matrix::from_fn(dim - m, dim, |i, j| seqs[(m + i, j)]);
    let omega = schmidt_extend(measurement.vectors(), &rest)?;

    // Bᵢⱼ = ⟨ωⱼ|Sᵢ⟩, C′ᵢⱼ = ⟨A_{perm j}|Sᵢ⟩
    let b = seqs.matmul_transpose(&omega);
    let a_basis = tensor_frame(n, kappa)?;
    let perm: Vec<usize> = labels
        .iter()
        .copied()
        .chain((0..dim).filter(|&l| !used[l]))
        .collect();
    let c_perm = Matrix::from_fn(dim, dim, |i, j| dot(a_basis.row(perm[j]), seqs.row(i)));
    let x = linalg::solve(&b, &c_perm)?;

    let mut unitary = Matrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            unitary[(perm[i], perm[j])] = x[(i, j)];
        }
    }

    // Codeword coordinates in the A basis, pushed through U.
    let priors = code.priors();
    let mut success = 0.0;
    let mut mass_residual: f64 = 0.0;
    for k in 0..m {
        let coords = a_basis.mat_vec(seqs.row(k));
        let out = unitary.mat_vec(&coords);
        success += priors[k] * out[labels[k]].powi(2);
        let mass: f64 = labels.iter().map(|&l| out[l] * out[l]).sum();
        mass_residual = mass_residual.max((mass - 1.0).abs());
    }

    Ok(SynthesizedUnitary {
        n,
        unitary,
        labels,
        error_probability: 1.0 - success,
        assigned_mass_residual: mass_residual,
    })
}

/// `T₍ⱼ,ᵢ₎(γ)` with `i < j` (0-based): identity except `T[i][i] = T[j][j] = cos γ`,
/// `T[i][j] = −sin γ`, `T[j][i] = sin γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GivensRotation {
    pub j: usize,
    pub i: usize,
    pub angle: f64,
}

impl GivensRotation {
    /// `M ← T M`.
    fn apply_left(&self, m: &mut Matrix) {
        let (s, c) = self.angle.sin_cos();
        for k in 0..m.cols() {
            let (ri, rj) = (m[(self.i, k)], m[(self.j, k)]);
            m[(self.i, k)] = c * ri - s * rj;
            m[(self.j, k)] = s * ri + c * rj;
        }
    }

    /// `M ← Tᵀ M`.
    fn apply_left_transpose(&self, m: &mut Matrix) {
        let (s, c) = self.angle.sin_cos();
        for k in 0..m.cols() {
            let (ri, rj) = (m[(self.i, k)], m[(self.j, k)]);
            m[(self.i, k)] = c * ri + s * rj;
            m[(self.j, k)] = -s * ri + c * rj;
        }
    }
}

/// `U = T₁ T₂ ⋯ T_k D` where `D` negates the last axis when `reflect_last` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationSchedule {
    pub dim: usize,
    pub rotations: Vec<GivensRotation>,
    pub reflect_last: bool,
}

impl RotationSchedule {
    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::identity(self.dim);
        if self.reflect_last {
            m[(self.dim - 1, self.dim - 1)] = -1.0;
        }
        for rot in self.rotations.iter().rev() {
            rot.apply_left(&mut m);
        }
        m
    }

    /// Header `j,i,gamma`, 1-based indices, one rotation per line; a final reflection is
    /// written as `N,N,pi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,i,gamma\n");
        for r in &self.rotations {
            let _ = writeln!(
                out,
                "{},{},{}",
                r.j + 1,
                r.i + 1,
                crate::cli::format_number(r.angle)
            );
        }
        if self.reflect_last {
            let _ = writeln!(out, "{0},{0},pi", self.dim);
        }
        out
    }

    pub fn from_csv(text: &str, dim: usize) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("j,i,gamma") {
            return Err(Error::Parse("missing header j,i,gamma".into()));
        }
        let mut rotations = Vec::new();
        let mut reflect_last = false;
        for line in lines {
            let fields: Vec<&str> = line.trim().split(',').collect();
            let [j, i, g] = fields[..] else {
                return Err(Error::Parse(format!("expected three fields in {line:?}")));
            };
            let parse_idx = |s: &str| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(v) if (1..=dim).contains(&v) => Ok(v - 1),
                    _ => Err(Error::Parse(format!("bad index {s:?}"))),
                }
            };
            let (j, i) = (parse_idx(j)?, parse_idx(i)?);
            if j == i && j == dim - 1 && g == "pi" {
                reflect_last = true;
                continue;
            }
            if i >= j || reflect_last {
                return Err(Error::Parse(format!("bad rotation line {line:?}")));
            }
            let angle = g
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{g:?}: {e}")))?;
            rotations.push(GivensRotation { j, i, angle });
        }
        Ok(RotationSchedule {
            dim,
            rotations,
            reflect_last,
        })
    }
}

/// Column-major triangular elimination of an orthogonal `u`.
pub fn reck_decompose(u: &Matrix) -> Result<RotationSchedule> {
    if !u.is_square() || u.rows() == 0 {
        return Err(Error::InvalidInput(
            "expected a non-empty square matrix".into(),
        ));
    }
    let residual = u.orthogonality_residual();
    if residual > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "matrix is not orthogonal (residual {residual:e})"
        )));
    }
    let dim = u.rows();
    let mut r = u.clone();
    let mut rotations = Vec::new();
    for i in 0..dim.saturating_sub(1) {
        let below_zero = (i + 1..dim).all(|j| r[(j, i)].abs() <= ZERO_ENTRY);
        if below_zero && r[(i, i)] < 0.0 {
            let rot = GivensRotation {
                j: i + 1,
                i,
                angle: std::f64::consts::PI,
            };
            rot.apply_left_transpose(&mut r);
            rotations.push(rot);
            continue;
        }
        for j in i + 1..dim {
            let y = r[(j, i)];
            if y.abs() <= ZERO_ENTRY {
                continue;
            }
            let rot = GivensRotation {
                j,
                i,
                angle: y.atan2(r[(i, i)]),
            };
            rot.apply_left_transpose(&mut r);
            rotations.push(rot);
        }
    }
    Ok(RotationSchedule {
        dim,
        rotations,
        reflect_last: r[(dim - 1, dim - 1)] < 0.0,
    })
}

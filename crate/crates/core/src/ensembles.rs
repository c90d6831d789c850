//! Letter ensembles, binary block codes, explicit codeword states and Gram matrices.
//!
//! Bit convention: `0` is the letter `|+⟩`, `1` is `|−⟩`. A codeword of length `n` is stored
//! as a `u64` whose most significant of the `n` bits is the first letter, so its integer
//! value is also its index among the `2^n` product basis sequences.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{self, kron, Matrix, SymMatrix};

/// Codeword states are only materialised up to this many dimensions.
pub const MAX_EMBEDDING_DIM: usize = 1 << 20;

const PRIOR_SUM_TOL: f64 = 1e-12;

pub(crate) fn validate_priors(priors: &[f64], expected_len: usize) -> Result<()> {
    if priors.len() != expected_len {
        return Err(Error::InvalidInput(format!(
            "expected {expected_len} priors, got {}",
            priors.len()
        )));
    }
    if let Some(p) = priors.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidInput(format!("prior {p} outside [0, 1]")));
    }
    let sum: f64 = priors.iter().sum();
    if (sum - 1.0).abs() > PRIOR_SUM_TOL {
        return Err(Error::InvalidInput(format!("priors sum to {sum}, not 1")));
    }
    Ok(())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::InvalidInput(format!(
            "overlap κ = {kappa} outside [0, 1)"
        )));
    }
    Ok(())
}

/// Pure letter states described by their overlap matrix and prior probabilities.
#[derive(Clone, Debug)]
pub struct LetterEnsemble {
    overlaps: SymMatrix,
    priors: Vec<f64>,
}

impl LetterEnsemble {
    pub fn new(overlaps: SymMatrix, priors: Vec<f64>) -> Result<Self> {
        let l = overlaps.dim();
        if (0..l).any(|i| overlaps[(i, i)] != 1.0) {
            return Err(Error::InvalidInput(
                "overlap matrix must have unit diagonal".into(),
            ));
        }
        let eig = linalg::eig_sym(&overlaps)?;
        if eig.min_value() < -linalg::DEFAULT_CLAMP_TOL {
            return Err(Error::InvalidInput(format!(
                "overlap matrix is not PSD (smallest eigenvalue {:e})",
                eig.min_value()
            )));
        }
        validate_priors(&priors, l)?;
        Ok(LetterEnsemble { overlaps, priors })
    }

    /// The binary ensemble `{|+⟩, |−⟩}` with `⟨+|−⟩ = κ` and priors `(ξ₁, 1 − ξ₁)`.
    pub fn binary(kappa: f64, xi1: f64) -> Result<Self> {
        check_kappa(kappa)?;
        let overlaps = SymMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { kappa })?;
        LetterEnsemble::new(overlaps, vec![xi1, 1.0 - xi1])
    }

    pub fn num_letters(&self) -> usize {
        self.priors.len()
    }

    pub fn overlaps(&self) -> &SymMatrix {
        &self.overlaps
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }
}

/// A binary block code: `M` distinct words of length `n` with input priors.
#[derive(Clone, Debug, PartialEq)]
pub struct Code {
    n: usize,
    words: Vec<u64>,
    priors: Vec<f64>,
}

impl Code {
    pub fn new(n: usize, words: Vec<u64>, priors: Vec<f64>) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::InvalidInput(format!(
                "block length {n} outside 1..=63"
            )));
        }
        if words.is_empty() {
            return Err(Error::InvalidInput(
                "a code needs at least one codeword".into(),
            ));
        }
        let limit = 1u64 << n;
        if let Some(w) = words.iter().find(|&&w| w >= limit) {
            return Err(Error::InvalidInput(format!(
                "codeword {w:#b} longer than {n} bits"
            )));
        }
        let mut sorted = words.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("codewords must be distinct".into()));
        }
        validate_priors(&priors, words.len())?;
        Ok(Code { n, words, priors })
    }

    pub fn with_uniform_priors(n: usize, words: Vec<u64>) -> Result<Self> {
        let m = words.len().max(1);
        Code::new(n, words, vec![1.0 / m as f64; m])
    }

    /// All `2^n` sequences in index order.
    pub fn full(n: usize) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(Error::ResourceLimit(format!(
                "full product code of length {n}"
            )));
        }
        Code::with_uniform_priors(n, (0..1u64 << n).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// Letter at position `pos` (0 = first letter) of codeword `word`.
    pub fn bit(&self, word: u64, pos: usize) -> u8 {
        ((word >> (self.n - 1 - pos)) & 1) as u8
    }

    pub fn word_string(&self, i: usize) -> String {
        (0..self.n)
            .map(|pos| {
                if self.bit(self.words[i], pos) == 0 {
                    '0'
                } else {
                    '1'
                }
            })
            .collect()
    }

    pub fn hamming(&self, i: usize, j: usize) -> u32 {
        (self.words[i] ^ self.words[j]).count_ones()
    }

    pub fn min_distance(&self) -> Option<u32> {
        let m = self.len();
        (0..m)
            .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
            .map(|(i, j)| self.hamming(i, j))
            .min()
    }

    /// Text form: `n M`, then `M` bit strings, then `M` priors, one per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.len());
        for i in 0..self.len() {
            s.push_str(&self.word_string(i));
            s.push('\n');
        }
        for p in &self.priors {
            let _ = writeln!(s, "{p}");
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| {
            tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("code file ends before {what}")))
        };
        let n: usize = next("block length")?
            .parse()
            .map_err(|e| Error::Parse(format!("block length: {e}")))?;
        let m: usize = next("codeword count")?
            .parse()
            .map_err(|e| Error::Parse(format!("codeword count: {e}")))?;
        let mut words = Vec::with_capacity(m);
        for i in 0..m {
            let s = next("codeword")?;
            if s.len() != n || !s.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::Parse(format!(
                    "codeword {i} `{s}` is not a {n}-bit string"
                )));
            }
            let w = u64::from_str_radix(s, 2).map_err(|e| Error::Parse(e.to_string()))?;
            words.push(w);
        }
        let mut priors = Vec::with_capacity(m);
        for i in 0..m {
            let s = next("prior")?;
            priors.push(
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("prior {i} `{s}`: {e}")))?,
            );
        }
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse(format!("unexpected trailing token `{extra}`")));
        }
        Code::new(n, words, priors)
    }
}

/// Explicit real coordinates for a list of unit state vectors (stored as rows).
#[derive(Clone, Debug)]
pub struct StateEmbedding {
    vectors: Matrix,
}

impl StateEmbedding {
    /// Rows of `vectors` are the states; each must have unit norm within 1e-12.
    pub fn from_vectors(vectors: Matrix) -> Result<Self> {
        if vectors.rows() == 0 || vectors.cols() == 0 {
            return Err(Error::InvalidInput("empty state set".into()));
        }
        for i in 0..vectors.rows() {
            let nrm = linalg::norm(vectors.row(i));
            if (nrm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("state {i} has norm {nrm}")));
            }
        }
        Ok(StateEmbedding { vectors })
    }

    /// States reconstructed from a Gram matrix: state `j` is column `j` of `√Γ` divided by
    /// `√Γ_jj`, so the coordinates live in an `M`-dimensional orthonormal frame.
    pub fn from_gram(gram: &GramMatrix) -> Result<Self> {
        let root = linalg::sqrt_psd(gram.matrix(), linalg::DEFAULT_CLAMP_TOL)?;
        let m = gram.dim();
        let vectors = Matrix::from_fn(m, m, |j, k| root[(k, j)] / gram.matrix()[(j, j)].sqrt());
        StateEmbedding::from_vectors(vectors)
    }

    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn state(&self, i: usize) -> &[f64] {
        self.vectors.row(i)
    }

    /// Pairwise inner products of the states.
    pub fn inner_products(&self) -> SymMatrix {
        SymMatrix::symmetrize(&self.vectors.matmul_transpose(&self.vectors))
            .expect("square by construction")
    }

    /// All products `|a_i⟩ ⊗ |b_j⟩`, `i` most significant.
    pub fn tensor(&self, other: &StateEmbedding) -> Result<StateEmbedding> {
        let dim = self.dim() * other.dim();
        if dim > MAX_EMBEDDING_DIM {
            return Err(Error::ResourceLimit(format!("tensor dimension {dim}")));
        }
        let mut rows = Vec::with_capacity(self.len() * other.len());
        for i in 0..self.len() {
            for j in 0..other.len() {
                rows.push(kron(self.state(i), other.state(j)));
            }
        }
        Ok(StateEmbedding {
            vectors: Matrix::from_rows(&rows)?,
        })
    }
}

/// `|+⟩ = (cos θ, sin θ)` and `|−⟩ = (cos θ, −sin θ)` with `cos 2θ = κ`.
pub fn embed_binary_letters(kappa: f64) -> Result<[[f64; 2]; 2]> {
    check_kappa(kappa)?;
    let theta = 0.5 * kappa.acos();
    let (s, c) = theta.sin_cos();
    Ok([[c, s], [c, -s]])
}

/// Tensor-product coordinates of a single letter sequence.
pub(crate) fn sequence_state(letters: &[[f64; 2]; 2], n: usize, word: u64) -> Vec<f64> {
    let mut v = vec![1.0];
    for pos in 0..n {
        let bit = ((word >> (n - 1 - pos)) & 1) as usize;
        v = kron(&v, &letters[bit]);
    }
    v
}

/// Explicit `2^n`-dimensional codeword states, one row per codeword.
pub fn codeword_states(code: &Code, kappa: f64) -> Result<StateEmbedding> {
    let dim = 1usize
        .checked_shl(code.n() as u32)
        .filter(|d| *d <= MAX_EMBEDDING_DIM)
        .ok_or_else(|| {
            Error::ResourceLimit(format!("embedding dimension 2^{} exceeds 2^20", code.n()))
        })?;
    let letters = embed_binary_letters(kappa)?;
    let mut data = Vec::with_capacity(code.len() * dim);
    for &w in code.words() {
        data.extend(sequence_state(&letters, code.n(), w));
    }
    Ok(StateEmbedding {
        vectors: Matrix::from_vec(code.len(), dim, data)?,
    })
}

/// Inner-product matrix of (optionally prior-weighted) states.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    weighted: bool,
    matrix: SymMatrix,
}

impl GramMatrix {
    pub fn new(matrix: SymMatrix, weighted: bool) -> Self {
        GramMatrix { weighted, matrix }
    }

    /// Gram matrix of explicit states, weighted by `√ξᵢ√ξⱼ` when priors are given.
    pub fn from_states(states: &StateEmbedding, priors: Option<&[f64]>) -> Result<Self> {
        let g = states.inner_products();
        match priors {
            None => Ok(GramMatrix {
                weighted: false,
                matrix: g,
            }),
            Some(p) => {
                validate_priors(p, states.len())?;
                let m = SymMatrix::from_fn(states.len(), |i, j| (p[i] * p[j]).sqrt() * g[(i, j)])?;
                Ok(GramMatrix {
                    weighted: true,
                    matrix: m,
                })
            }
        }
    }

    pub fn weighted(&self) -> bool {
        self.weighted
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Entry `(i, j)` is `κ^{d(cᵢ, cⱼ)}`, times `√ζᵢ√ζⱼ` when `weighted`.
pub fn gram(code: &Code, kappa: f64, weighted: bool) -> GramMatrix {
    let pr = code.priors();
    let matrix = SymMatrix::from_fn(code.len(), |i, j| {
        let base = kappa.powi(code.hamming(i, j) as i32);
        if weighted {
            base * (pr[i] * pr[j]).sqrt()
        } else {
            base
        }
    })
    .expect("codes are non-empty");
    GramMatrix { weighted, matrix }
}

/// The `[[n, n−1, 2]]` code built from the four length-3 words by
/// `γ⁽ⁿ⁾ = [0·γ⁽ⁿ⁻¹⁾; 1·λ⁽ⁿ⁻¹⁾]`, equal priors.
///
/// `λ⁽³⁾` is the row-wise complement of `γ⁽³⁾`; for longer words `λ` is `γ` with its leading
/// bit flipped, which keeps every word at even weight and gives the Gram matrix the block
/// structure `[[Γ, κ²Λ], [κ²Λ, Γ]]` with `Λ = [[Γ, Λ], [Λ, Γ]]` one level down.
pub fn build_nn12_code(n: usize) -> Result<Code> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "[[n, n-1, 2]] code needs n >= 3, got {n}"
        )));
    }
    if n > 21 {
        return Err(Error::ResourceLimit(format!(
            "[[n, n-1, 2]] code with n = {n}"
        )));
    }
    // +++, +−−, −+−, −−+
    let mut gamma: Vec<u64> = vec![0b000, 0b011, 0b101, 0b110];
    let mut lambda: Vec<u64> = gamma.iter().map(|w| w ^ 0b111).collect();
    for m in 3..n {
        let mut next = gamma.clone();
        next.extend(lambda.iter().map(|w| w | (1 << m)));
        lambda = next.iter().map(|w| w ^ (1 << m)).collect();
        gamma = next;
    }
    Code::with_uniform_priors(n, gamma)
}

/// The `[[2^r − 1, r, 2^{r−1}]]` simplex code: message `m` maps to the word whose bit at
/// column `c ∈ 1..2^r` is the parity of `m & c`. Equal priors.
pub fn build_simplex_code(r: usize) -> Result<Code> {
    if r < 2 {
        return Err(Error::InvalidInput(format!(
            "simplex code needs r >= 2, got {r}"
        )));
    }
    if r > 6 {
        return Err(Error::ResourceLimit(format!("simplex code with r = {r}")));
    }
    let n = (1usize << r) - 1;
    let words = (0..1u64 << r)
        .map(|m| (1..=n as u64).fold(0u64, |w, c| (w << 1) | u64::from((m & c).count_ones() & 1)))
        .collect();
    Code::with_uniform_priors(n, words)
}

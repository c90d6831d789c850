//! Mutual information (bits) and the capacity quantities for binary pure-state letters.

use crate::detection::{self, ChannelMatrix};
use crate::ensembles::{gram, validate_priors, Code, LetterEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct InfoResult {
    pub mutual_information_bits: f64,
    pub per_letter: f64,
    pub block_length: usize,
    pub num_inputs: usize,
    pub num_outputs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityPoint {
    pub kappa: f64,
    pub c1: f64,
    pub holevo: f64,
    pub in_per_letter: f64,
    /// `in_per_letter − c1`.
    pub gain: f64,
}

impl CapacityPoint {
    pub fn new(kappa: f64, in_per_letter: f64) -> Self {
        let c1 = c1_binary(kappa);
        CapacityPoint {
            kappa,
            c1,
            holevo: holevo_binary(kappa),
            in_per_letter,
            gain: in_per_letter - c1,
        }
    }
}

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// `I = Σᵢ ξᵢ Σⱼ P(j|i) log₂[P(j|i) / Σₖ ξₖ P(j|k)]`, for a single channel use.
pub fn mutual_information(priors: &[f64], channel: &ChannelMatrix) -> Result<InfoResult> {
    block_mutual_information(priors, channel, 1)
}

/// Mutual information of a channel whose inputs are length-`n` blocks; `per_letter` is
/// the total divided by `n`.
pub fn block_mutual_information(
    priors: &[f64],
    channel: &ChannelMatrix,
    n: usize,
) -> Result<InfoResult> {
    if n == 0 {
        return Err(Error::InvalidInput("block length must be positive".into()));
    }
    validate_priors(priors, channel.num_inputs())?;
    let outputs = channel.num_outputs();
    let p = channel.entries();
    let marginal: Vec<f64> = (0..outputs)
        .map(|j| {
            priors
                .iter()
                .enumerate()
                .map(|(k, xi)| xi * p[(k, j)])
                .sum()
        })
        .collect();
    let mut info = 0.0;
    for (i, &xi) in priors.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        for j in 0..outputs {
            let pij = p[(i, j)];
            if pij > 0.0 {
                info += xi * pij * (pij / marginal[j]).log2();
            }
        }
    }
    let info = info.max(0.0);
    Ok(InfoResult {
        mutual_information_bits: info,
        per_letter: info / n as f64,
        block_length: n,
        num_inputs: channel.num_inputs(),
        num_outputs: outputs,
    })
}

/// Minimum single-letter error `p = (1 − √(1 − κ²)) / 2` at equal priors.
pub fn letter_error(kappa: f64) -> f64 {
    detection::binary_helstrom_error(kappa, 0.5)
}

/// First-order capacity `1 + (1 − p) log₂(1 − p) + p log₂ p`, reached by the symmetric
/// channel of the equal-prior Helstrom measurement.
pub fn c1_binary(kappa: f64) -> f64 {
    1.0 - h2(letter_error(kappa))
}

/// Holevo quantity of the equal mixture of `|±⟩`: `h₂((1 + κ)/2)`.
pub fn holevo_binary(kappa: f64) -> f64 {
    h2((1.0 + kappa) / 2.0)
}

/// Von Neumann entropy of `Σ ξᵢ|ψᵢ⟩⟨ψᵢ|` at the ensemble's own priors.
pub fn holevo_general(ensemble: &LetterEnsemble) -> Result<f64> {
    let p = ensemble.priors();
    let s = ensemble.overlaps();
    let weighted = SymMatrix::from_fn(ensemble.num_letters(), |i, j| {
        (p[i] * p[j]).sqrt() * s[(i, j)]
    })?;
    let eig = linalg::eig_sym(&weighted)?;
    if eig.min_value() < -1e-10 {
        return Err(Error::InvalidInput(format!(
            "overlap matrix is not PSD (eigenvalue {:e})",
            eig.min_value()
        )));
    }
    Ok(eig.values.iter().map(|&l| -xlog2x(l.max(0.0))).sum())
}

/// `(n·C₁, 1 − (1 − p)ⁿ)`: all `2ⁿ` sequences, product priors, product Helstrom measurement.
pub fn threshold_quantities(kappa: f64, n: usize) -> (f64, f64) {
    let p = letter_error(kappa);
    (n as f64 * c1_binary(kappa), 1.0 - (1.0 - p).powi(n as i32))
}

/// Per-letter square-root-measurement information of an arbitrary code minus `C₁`,
/// evaluated through the prior-weighted Gram matrix.
pub fn superadditivity_gain(code: &Code, kappa: f64) -> Result<CapacityPoint> {
    let (_, channel) = detection::square_root_measurement(&gram(code, kappa, true))?;
    let info = block_mutual_information(code.priors(), &channel, code.n())?;
    Ok(CapacityPoint::new(kappa, info.per_letter))
}

/// How far the collective square-root channel is from a memoryless one.
///
/// Outcome `j` of the (equal-prior) square-root measurement is labelled by codeword `j`,
/// so the channel maps `n`-bit inputs to `n`-bit outputs. Each letter position gets the
/// marginal channel `Pₖ(yₖ|xₖ)` under the code priors, and the result is
/// `max |P(y|x) − Πₖ Pₖ(yₖ|xₖ)|` over codewords `x` with positive prior and all `y`.
pub fn memory_effect_residual(code: &Code, kappa: f64) -> Result<f64> {
    let (_, channel) = detection::square_root_measurement(&gram(code, kappa, false))?;
    let n = code.n();
    let words = code.words();
    let priors = code.priors();
    let bit = |w: u64, k: usize| ((w >> (n - 1 - k)) & 1) as usize;

    // marginals[k][x][y]
    let mut marginals = vec![[[0.0f64; 2]; 2]; n];
    let mut letter_mass = vec![[0.0f64; 2]; n];
    for (i, &x) in words.iter().enumerate() {
        for k in 0..n {
            letter_mass[k][bit(x, k)] += priors[i];
            for (j, &y) in words.iter().enumerate() {
                marginals[k][bit(x, k)][bit(y, k)] += priors[i] * channel.get(i, j);
            }
        }
    }
    for (channel_k, mass_k) in marginals.iter_mut().zip(&letter_mass) {
        for (row, &mass) in channel_k.iter_mut().zip(mass_k) {
            if mass > 0.0 {
                row.iter_mut().for_each(|p| *p /= mass);
            }
        }
    }

    let mut residual: f64 = 0.0;
    for (i, &x) in words.iter().enumerate() {
        if priors[i] == 0.0 {
            continue;
        }
        for y in 0..1u64 << n {
            let product: f64 = (0..n).map(|k| marginals[k][bit(x, k)][bit(y, k)]).product();
            let collective = words
                .iter()
                .position(|&w| w == y)
                .map_or(0.0, |j| channel.get(i, j));
            residual = residual.max((collective - product).abs());
        }
    }
    Ok(residual)
}

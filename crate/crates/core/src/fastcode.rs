//! Closed forms for the square-root channel of the `[[n, n−1, 2]]` and simplex codes.
//!
//! The `[[n, n−1, 2]]` Gram matrix is block-circulant over `2^{n−3}` blocks of size 4 whose
//! block index combines by XOR, so the order-`2^{n−3}` Hadamard matrix diagonalizes it. Only
//! vectors of length `2^{n−3}` are ever built here.

use crate::detection::binary_helstrom_error;
use crate::error::{Error, Result};
use crate::information::{c1_binary, h2, CapacityPoint};
use crate::linalg::walsh_hadamard_transform;

/// Largest block length accepted by the recursion (`2^23` coefficients per array).
pub const MAX_FAST_N: usize = 26;

/// Coefficient arrays of length `2^{n−3}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::InvalidInput(format!(
            "overlap κ = {kappa} outside [0, 1)"
        )));
    }
    if kappa == 1.0 {
        return Err(Error::LinearDependence(
            "κ = 1 makes all letter states equal".into(),
        ));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "[[n, n-1, 2]] needs n >= 3, got {n}"
        )));
    }
    if n > MAX_FAST_N {
        return Err(Error::ResourceLimit(format!(
            "block length {n} exceeds {MAX_FAST_N}"
        )));
    }
    Ok(())
}

/// The coefficient recursion. `n = 3` returns the one-element base table
/// `a = 1, b = 0, c = 0, d = 1`, from which a single step gives the `n = 4` values
/// `a = (1, 1), b = (κ², −κ²), c = (1, 1), d = (1, −1)`.
pub fn nn12_coefficients(n: usize, kappa: f64) -> Result<CoefficientTable> {
    check_n(n)?;
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::InvalidInput(format!(
            "overlap κ = {kappa} outside [0, 1]"
        )));
    }
    let k2 = kappa * kappa;
    let (mut a, mut b, mut c, mut d) = (vec![1.0], vec![0.0], vec![0.0], vec![1.0]);
    for _ in 4..=n {
        let half = a.len();
        let mut na = Vec::with_capacity(2 * half);
        let mut nb = Vec::with_capacity(2 * half);
        let mut nc = Vec::with_capacity(2 * half);
        let mut nd = Vec::with_capacity(2 * half);
        for sign in [1.0, -1.0] {
            for k in 0..half {
                na.push(a[k] + sign * k2 * c[k]);
                nb.push(b[k] + sign * k2 * d[k]);
                nc.push(a[k] + sign * c[k]);
                nd.push(b[k] + sign * d[k]);
            }
        }
        (a, b, c, d) = (na, nb, nc, nd);
    }
    Ok(CoefficientTable { n, a, b, c, d })
}

/// Eigenvalue profile of `Γ⁽ⁿ⁾` and the two kinds of entries of `√Γ⁽ⁿ⁾`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralProfile {
    pub n: usize,
    pub kappa: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl SpectralProfile {
    pub fn dim(&self) -> usize {
        4 * self.u.len()
    }

    /// Entry `(4p + r, 4q + s)` of `√Γ` in the order of
    /// [`build_nn12_code`](crate::ensembles::build_nn12_code): `u[p ⊕ q]` when `r = s`,
    /// `v[p ⊕ q]` otherwise.
    pub fn sqrt_gram_entry(&self, i: usize, j: usize) -> f64 {
        let k = (i / 4) ^ (j / 4);
        if i % 4 == j % 4 {
            self.u[k]
        } else {
            self.v[k]
        }
    }

    pub fn sqrt_gram_row(&self, i: usize) -> Vec<f64> {
        (0..self.dim())
            .map(|j| self.sqrt_gram_entry(i, j))
            .collect()
    }

    /// `Σₖ [u(k)² + 3v(k)²]`, which is 1 because `Γ` has a unit diagonal.
    pub fn row_norm_squared(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| u * u + 3.0 * v * v)
            .sum()
    }
}

/// Spectral profile of the `[[n, n−1, 2]]` Gram matrix.
pub fn nn12_profile(n: usize, kappa: f64) -> Result<SpectralProfile> {
    check_n(n)?;
    check_kappa(kappa)?;
    let table = nn12_coefficients(n, kappa)?;
    let k2 = kappa * kappa;
    let alpha: Vec<f64> = table
        .a
        .iter()
        .zip(&table.b)
        .map(|(a, b)| ((1.0 + 3.0 * k2) * a + (3.0 + k2) * b).max(0.0).sqrt())
        .collect();
    let beta: Vec<f64> = table
        .a
        .iter()
        .zip(&table.b)
        .map(|(a, b)| ((1.0 - k2) * (a - b)).max(0.0).sqrt())
        .collect();
    let mu: Vec<f64> = alpha
        .iter()
        .zip(&beta)
        .map(|(a, b)| (a + 3.0 * b) / 4.0)
        .collect();
    let nu: Vec<f64> = alpha
        .iter()
        .zip(&beta)
        .map(|(a, b)| (a - b) / 4.0)
        .collect();

    let scale = 1.0 / mu.len() as f64;
    let mut u = mu.clone();
    let mut v = nu.clone();
    walsh_hadamard_transform(&mut u)?;
    walsh_hadamard_transform(&mut v)?;
    u.iter_mut().chain(v.iter_mut()).for_each(|x| *x *= scale);

    Ok(SpectralProfile {
        n,
        kappa,
        alpha,
        beta,
        mu,
        nu,
        u,
        v,
    })
}

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// `Iₙ = n − 1 + Σₖ [u² log₂ u² + 3v² log₂ v²]` bits at equal priors.
pub fn nn12_mutual_information(n: usize, kappa: f64) -> Result<f64> {
    let p = nn12_profile(n, kappa)?;
    let tail: f64 =
        p.u.iter()
            .zip(&p.v)
            .map(|(u, v)| xlog2x(u * u) + 3.0 * xlog2x(v * v))
            .sum();
    Ok(n as f64 - 1.0 + tail)
}

/// `1 − u(0)²`; every diagonal entry of `√Γ` equals `u(0)`.
pub fn nn12_error_probability(n: usize, kappa: f64) -> Result<f64> {
    let p = nn12_profile(n, kappa)?;
    Ok(1.0 - p.u[0] * p.u[0])
}

/// `Iₙ/n − C₁` for the `[[n, n−1, 2]]` code.
pub fn nn12_gain(n: usize, kappa: f64) -> Result<f64> {
    Ok(nn12_mutual_information(n, kappa)? / n as f64 - c1_binary(kappa))
}

pub fn nn12_capacity_point(n: usize, kappa: f64) -> Result<CapacityPoint> {
    Ok(CapacityPoint::new(
        kappa,
        nn12_mutual_information(n, kappa)? / n as f64,
    ))
}

/// The two codewords `{00, 11}` at equal priors decoded by the Helstrom measurement on
/// overlap `κ²`: a binary symmetric channel. Returns its information per letter minus `C₁`.
pub fn repetition_pair_gain(kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let p2 = binary_helstrom_error(kappa * kappa, 0.5);
    Ok((1.0 - h2(p2)) / 2.0 - c1_binary(kappa))
}

/// Square-root channel summary for the `[[2^r − 1, r, 2^{r−1}]]` simplex code.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexProfile {
    pub r: usize,
    pub n: usize,
    pub u: f64,
    pub v: f64,
    pub mutual_information: f64,
    pub error_probability: f64,
}

impl SimplexProfile {
    pub fn per_letter(&self) -> f64 {
        self.mutual_information / self.n as f64
    }
}

pub fn simplex_profile(r: usize, kappa: f64) -> Result<SimplexProfile> {
    if r < 2 {
        return Err(Error::InvalidInput(format!(
            "simplex code needs r >= 2, got {r}"
        )));
    }
    if r > 30 {
        return Err(Error::ResourceLimit(format!("simplex code with r = {r}")));
    }
    check_kappa(kappa)?;
    let m = (1u64 << r) as f64;
    let overlap = kappa.powf(m / 2.0);
    let alpha = (1.0 + (m - 1.0) * overlap).sqrt();
    let beta = (1.0 - overlap).sqrt();
    let u = (alpha + (m - 1.0) * beta) / m;
    let v = (alpha - beta) / m;
    Ok(SimplexProfile {
        r,
        n: (1usize << r) - 1,
        u,
        v,
        mutual_information: m.log2() + xlog2x(u * u) + (m - 1.0) * xlog2x(v * v),
        error_probability: 1.0 - u * u,
    })
}

/// The default κ grid: 99 points `0.01, 0.02, …, 0.99`.
pub fn default_grid() -> Vec<f64> {
    (1..=99).map(|k| k as f64 / 100.0).collect()
}

/// First point of `grid` order where `f` goes from `≤ 0` to `> 0`, refined by bisection to
/// `tol`. Errors if `f` turns non-positive again further along the grid.
pub fn find_crossing(
    grid: &[f64],
    tol: f64,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<Option<f64>> {
    let values = grid.iter().map(|&k| f(k)).collect::<Result<Vec<_>>>()?;
    let Some(i) = values.windows(2).position(|w| w[0] <= 0.0 && w[1] > 0.0) else {
        return Ok(None);
    };
    if let Some(k) = (i + 1..grid.len()).find(|&k| values[k] <= 0.0) {
        return Err(Error::InvalidInput(format!(
            "sign changes again at κ = {} after the crossing near {}",
            grid[k], grid[i]
        )));
    }
    let (mut lo, mut hi) = (grid[i], grid[i + 1]);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// The overlap `κ⋆` above which `[[n, n−1, 2]]` beats `C₁`. For `n = 2` the repetition pair
/// is used, which never crosses.
pub fn find_kappa_star(n: usize, tol: f64) -> Result<f64> {
    let crossing = match n {
        0 | 1 => {
            return Err(Error::InvalidInput(format!(
                "block length {n} has no gain curve"
            )))
        }
        2 => find_crossing(&default_grid(), tol, repetition_pair_gain)?,
        _ => find_crossing(&default_grid(), tol, |k| nn12_gain(n, k))?,
    };
    crossing.ok_or(Error::NoRoot { n })
}

/// First κ where the simplex code of order `r` carries more information per letter than
/// `[[n, n−1, 2]]`.
pub fn simplex_overtakes_nn12(r: usize, n: usize, grid: &[f64], tol: f64) -> Result<Option<f64>> {
    find_crossing(grid, tol, |k| {
        Ok(simplex_profile(r, k)?.per_letter() - nn12_mutual_information(n, k)? / n as f64)
    })
}

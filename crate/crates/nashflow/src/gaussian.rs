//! Monte Carlo checks of the finite-dimensional Gaussian-measure identities.
//!
//! On a finite state set, measures and functions are both plain coefficient
//! vectors. Under the product standard normal on coordinate space:
//! the dual-pairing inner product of two measures is the Euclidean dot
//! product, the pushforward of the measure under a coefficient functional is
//! N(0, |c|²), and the measure→function map is the coordinate identity.
//! This module estimates each quantity from seeded samples so the identities
//! can be verified against their closed forms at quantified tolerances.
//!
//! All tolerances are stated at 4σ of the estimator: for fixed seeds the
//! checks are deterministic in practice while staying honest about the
//! sampling error.

use crate::error::{Error, Result};
use crate::rng::{fill_normal, substream};

/// Coefficients (μ(e₁), …, μ(e_m)) of a signed measure μ = Σ μ(e_j) δ_{s_j}.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureCoeffs {
    coeffs: Vec<f64>,
}

impl MeasureCoeffs {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("measure needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("measure coefficients must be finite"));
        }
        Ok(MeasureCoeffs { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// n rows of m i.i.d. standard normal draws, stored row-major.
#[derive(Debug, Clone)]
pub struct SampleTable {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl SampleTable {
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn num_rows(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.m)
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.m {
            return Err(Error::dims(format!(
                "coefficient vector has length {len}, sample table has dimension {}",
                self.m
            )));
        }
        Ok(())
    }
}

/// Draw an n×m table of standard normals. Row r is generated from the
/// substream (seed, r) via Box–Muller, so rows are reproducible
/// independently of each other and of n.
pub fn sample_gamma(m: usize, n: usize, seed: u64) -> Result<SampleTable> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("sample table needs m ≥ 1 and n ≥ 1"));
    }
    let mut data = vec![0.0; m * n];
    for (row, chunk) in data.chunks_exact_mut(m).enumerate() {
        let mut rng = substream(seed, row as u64);
        fill_normal(&mut rng, chunk);
    }
    Ok(SampleTable { m, n, data })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// The closed-form inner product (μ, ν) = Σ μ_j ν_j.
pub fn exact_inner(mu: &MeasureCoeffs, nu: &MeasureCoeffs) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::dims(format!(
            "measures have lengths {} and {}",
            mu.len(),
            nu.len()
        )));
    }
    Ok(dot(mu.coeffs(), nu.coeffs()))
}

/// Sample mean of (μᵀx)(νᵀx) over the table rows; converges to
/// [`exact_inner`] at the Monte Carlo rate.
pub fn estimate_inner(mu: &MeasureCoeffs, nu: &MeasureCoeffs, samples: &SampleTable) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::dims(format!(
            "measures have lengths {} and {}",
            mu.len(),
            nu.len()
        )));
    }
    samples.check_dim(mu.len())?;
    let total: f64 = samples
        .rows()
        .map(|x| dot(mu.coeffs(), x) * dot(nu.coeffs(), x))
        .sum();
    Ok(total / samples.num_rows() as f64)
}

/// Per-sample standard deviation of (μᵀx)(νᵀx): for jointly Gaussian pairs,
/// Var = |μ|²|ν|² + (μᵀν)², so a 4σ tolerance at n samples is
/// `4 · inner_sample_std(μ, ν) / √n`.
pub fn inner_sample_std(mu: &MeasureCoeffs, nu: &MeasureCoeffs) -> f64 {
    let mm = dot(mu.coeffs(), mu.coeffs());
    let nn = dot(nu.coeffs(), nu.coeffs());
    let mn = dot(mu.coeffs(), nu.coeffs());
    (mm * nn + mn * mn).sqrt()
}

/// Unbiased sample variance of cᵀx over the table rows; converges to |c|².
/// Errors on c = 0, where the pushforward is degenerate.
pub fn pushforward_variance(c: &[f64], samples: &SampleTable) -> Result<f64> {
    samples.check_dim(c.len())?;
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("coefficients must be finite"));
    }
    if c.iter().all(|&v| v == 0.0) {
        return Err(Error::domain(
            "pushforward by the zero functional is degenerate",
        ));
    }
    let n = samples.num_rows();
    if n < 2 {
        return Err(Error::invalid("variance needs at least two samples"));
    }
    let values: Vec<f64> = samples.rows().map(|x| dot(c, x)).collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok(ss / (n - 1) as f64)
}

/// The coordinate form of the measure→function map: the identity on
/// coefficients. The duality ⟨μ, Jν⟩ = (μ, ν) is then exact, not sampled.
pub fn jay_map(nu: &MeasureCoeffs) -> Vec<f64> {
    nu.coeffs().to_vec()
}

/// Monte Carlo estimate of the vector integral ∫ x · (νᵀx) dγ(x), which the
/// identity says equals `jay_map(ν)`; component j has per-sample variance
/// |ν|² + ν_j², so agreement within 4σ per component is expected.
pub fn estimate_jay(nu: &MeasureCoeffs, samples: &SampleTable) -> Result<Vec<f64>> {
    samples.check_dim(nu.len())?;
    let m = nu.len();
    let mut acc = vec![0.0; m];
    for x in samples.rows() {
        let v = dot(nu.coeffs(), x);
        for (a, &xj) in acc.iter_mut().zip(x) {
            *a += xj * v;
        }
    }
    let n = samples.num_rows() as f64;
    for a in &mut acc {
        *a /= n;
    }
    Ok(acc)
}

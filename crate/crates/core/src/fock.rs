//! Truncated Fock-space numerics for a single bosonic mode.
//!
//! States live on the number basis `|0⟩ … |D⟩` where `D` is the cutoff.
//! Ladder-operator matrix elements are always the exact infinite-dimensional
//! ones; a state is trusted only while its population in the top two levels
//! stays below the truncation tolerance.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Normalization tolerance for traces and vector norms.
pub const EPS_NORM: f64 = 1e-10;
/// Elementwise Hermiticity tolerance.
pub const EPS_HERM: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const EPS_PSD: f64 = 1e-9;
/// Default bound on the population of the two highest Fock levels.
pub const EPS_TRUNC: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pure state as amplitudes `c_0 … c_D` over number states.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<Complex64>,
}

impl FockVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Dimension("a Fock vector needs at least one level".into()));
        }
        Ok(Self { amplitudes })
    }

    pub fn number_state(n: usize, cutoff: usize) -> Result<Self> {
        if n > cutoff {
            return Err(Error::Dimension(format!("|{n}⟩ does not fit under cutoff {cutoff}")));
        }
        let mut amplitudes = vec![ZERO; cutoff + 1];
        amplitudes[n] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn vacuum(cutoff: usize) -> Self {
        Self::number_state(0, cutoff).expect("vacuum always fits")
    }

    pub fn cutoff(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Probability mass missing from a state that should be normalized,
    /// `1 − Σ|c_n|²`.
    pub fn tail_mass(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= EPS_NORM
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Numerical("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            amplitudes: self.amplitudes.iter().map(|c| c / norm).collect(),
        })
    }

    /// Pads with zeros or truncates to the given cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.resize(cutoff + 1, ZERO);
        Self { amplitudes }
    }

    /// `⟨self|other⟩` over the common levels.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn to_density(&self) -> DensityOperator {
        let dim = self.amplitudes.len();
        let matrix =
            DMatrix::from_fn(dim, dim, |m, n| self.amplitudes[m] * self.amplitudes[n].conj());
        DensityOperator { matrix }
    }
}

/// Mixed state as a Hermitian matrix `ρ_{mn} = ⟨m|ρ|n⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Validates squareness and Hermiticity (to [`EPS_HERM`]).
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "density matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let rho = Self { matrix };
        let dev = rho.hermiticity_deviation();
        if dev > EPS_HERM {
            return Err(Error::NotHermitian(dev));
        }
        Ok(rho)
    }

    /// Wraps a matrix produced by trusted internal code; only squareness is
    /// checked.
    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self { matrix }
    }

    pub fn from_diagonal(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Dimension("empty diagonal".into()));
        }
        let dim = weights.len();
        let mut matrix = DMatrix::from_element(dim, dim, ZERO);
        for (n, w) in weights.iter().enumerate() {
            matrix[(n, n)] = Complex64::new(*w, 0.0);
        }
        Ok(Self { matrix })
    }

    pub fn vacuum(cutoff: usize) -> Self {
        FockVector::vacuum(cutoff).to_density()
    }

    pub fn cutoff(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|n| self.matrix[(n, n)].re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.matrix[(n, n)].re).collect()
    }

    /// `Tr[ρ²]`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut dev = 0.0f64;
        for m in 0..dim {
            for n in m..dim {
                dev = dev.max((self.matrix[(m, n)] - self.matrix[(n, m)].conj()).norm());
            }
        }
        dev
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Trace near one and no eigenvalue below `-EPS_PSD`.
    pub fn is_valid_state(&self) -> bool {
        (self.trace() - 1.0).abs() <= EPS_NORM
            && self.hermiticity_deviation() <= EPS_HERM
            && self.min_eigenvalue() >= -EPS_PSD
    }

    /// Population in the two highest Fock levels.
    pub fn edge_population(&self) -> f64 {
        let d = self.cutoff();
        let top = self.matrix[(d, d)].re;
        if d == 0 {
            top
        } else {
            top + self.matrix[(d - 1, d - 1)].re
        }
    }

    pub fn check_truncation(&self, eps: f64, context: &'static str) -> Result<()> {
        let population = self.edge_population();
        if population > eps {
            return Err(Error::CutoffInsufficient {
                context,
                cutoff: self.cutoff(),
                population,
                eps,
            });
        }
        Ok(())
    }

    /// Pads with zeros or truncates to the given cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        let dim = cutoff + 1;
        let keep = dim.min(self.dim());
        let mut matrix = DMatrix::from_element(dim, dim, ZERO);
        matrix
            .view_mut((0, 0), (keep, keep))
            .copy_from(&self.matrix.view((0, 0), (keep, keep)));
        Self { matrix }
    }

    /// `⟨a†a⟩`, without any truncation check.
    pub fn mean_photon_number(&self) -> f64 {
        (0..self.dim()).map(|n| n as f64 * self.matrix[(n, n)].re).sum()
    }
}

/// `sqrt(n!/(n-k)!)` as a running product.
fn sqrt_falling(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ((n - k + 1)..=n).map(|j| (j as f64).sqrt()).product()
}

/// Truncated coherent state `c_n = e^{-|α|²/2} αⁿ/√n!`.
///
/// Amplitudes are not renormalized; [`FockVector::tail_mass`] reports the
/// probability lost above the cutoff.
pub fn coherent_state(alpha: Complex64, cutoff: usize) -> FockVector {
    let mut amplitudes = Vec::with_capacity(cutoff + 1);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amplitudes.push(c);
    for n in 1..=cutoff {
        c = c * alpha / (n as f64).sqrt();
        amplitudes.push(c);
    }
    FockVector { amplitudes }
}

/// Smallest cutoff at which `|α⟩` loses less than `eps` of its mass and has
/// less than `eps` in its top two levels.
pub fn coherent_cutoff(alpha: Complex64, eps: f64) -> usize {
    let x = alpha.norm_sqr();
    let mut p = (-x).exp();
    let mut prev = 0.0;
    let mut n = 0usize;
    loop {
        // Past n + 2 > x the Poisson tail is dominated by a geometric series,
        // which avoids the cancellation in 1 − Σp.
        let ratio = x / (n + 2) as f64;
        if n >= 2 && ratio < 1.0 {
            let tail = p * x / (n + 1) as f64 / (1.0 - ratio);
            if tail <= eps && prev + p <= eps {
                return n;
            }
        }
        n += 1;
        prev = p;
        p *= x / n as f64;
    }
}

/// `Tr[ρ a†^k a^m]`.
pub fn normal_moment(rho: &DensityOperator, k: usize, m: usize) -> Result<Complex64> {
    rho.check_truncation(EPS_TRUNC, "normal moment")?;
    Ok(normal_moment_unchecked(rho, k, m))
}

pub(crate) fn normal_moment_unchecked(rho: &DensityOperator, k: usize, m: usize) -> Complex64 {
    let d = rho.cutoff();
    let mut sum = ZERO;
    // ⟨j|a†^k a^m|n⟩ is nonzero only for j = n - m + k.
    for n in m..=d {
        let j = n - m + k;
        if j > d {
            break;
        }
        let elem = sqrt_falling(n, m) * sqrt_falling(j, k);
        sum += rho.matrix[(n, j)] * elem;
    }
    sum
}

/// `Tr[ρ a^m a†^k]`, from the exact matrix elements of the antinormally
/// ordered product.
pub fn antinormal_moment(rho: &DensityOperator, m: usize, k: usize) -> Result<Complex64> {
    rho.check_truncation(EPS_TRUNC, "antinormal moment")?;
    Ok(antinormal_moment_unchecked(rho, m, k))
}

pub(crate) fn antinormal_moment_unchecked(rho: &DensityOperator, m: usize, k: usize) -> Complex64 {
    let d = rho.cutoff();
    let mut sum = ZERO;
    // a^m a†^k |n⟩ ∝ |n + k - m⟩.
    for n in 0..=d {
        if n + k < m {
            continue;
        }
        let j = n + k - m;
        if j > d {
            break;
        }
        let elem = sqrt_falling(n + k, k) * sqrt_falling(n + k, m);
        sum += rho.matrix[(n, j)] * elem;
    }
    sum
}

/// Means and variances of the quadratures `x1 = (a + a†)/√2`,
/// `x2 = (a − a†)/(i√2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureStats {
    pub mean_x1: f64,
    pub mean_x2: f64,
    /// Symmetrically ordered variances.
    pub var_x1_sym: f64,
    pub var_x2_sym: f64,
    /// `⟨{Δx1, Δx2}⟩/2`.
    pub cov_sym: f64,
}

impl QuadratureStats {
    /// Antinormally ordered variance of `x1` (symmetric plus half a quantum).
    pub fn var_x1_antinormal(&self) -> f64 {
        self.var_x1_sym + 0.5
    }

    pub fn var_x2_antinormal(&self) -> f64 {
        self.var_x2_sym + 0.5
    }
}

pub fn quadrature_stats(rho: &DensityOperator) -> Result<QuadratureStats> {
    rho.check_truncation(EPS_TRUNC, "quadrature statistics")?;
    let a = normal_moment_unchecked(rho, 0, 1);
    let a2 = normal_moment_unchecked(rho, 0, 2);
    let n = normal_moment_unchecked(rho, 1, 1).re;
    let mean_x1 = std::f64::consts::SQRT_2 * a.re;
    let mean_x2 = std::f64::consts::SQRT_2 * a.im;
    Ok(QuadratureStats {
        mean_x1,
        mean_x2,
        var_x1_sym: a2.re + n + 0.5 - mean_x1 * mean_x1,
        var_x2_sym: -a2.re + n + 0.5 - mean_x2 * mean_x2,
        cov_sym: a2.im - mean_x1 * mean_x2,
    })
}

/// `⟨β|ρ|β⟩`.
///
/// Only the coherent amplitudes inside the cutoff enter; the truncation
/// check on `ρ` guarantees nothing is lost above it.
pub fn fidelity_coherent(rho: &DensityOperator, beta: Complex64) -> Result<f64> {
    rho.check_truncation(EPS_TRUNC, "coherent fidelity")?;
    Ok(coherent_overlap_unchecked(rho, beta))
}

pub(crate) fn coherent_overlap_unchecked(rho: &DensityOperator, beta: Complex64) -> f64 {
    let d = rho.cutoff();
    let x = beta.norm_sqr();
    // Amplitudes past the Poisson peak shrink monotonically; stop once they
    // cannot matter at double precision.
    let mut c = Vec::with_capacity(d + 1);
    let mut cn = Complex64::new((-0.5 * x).exp(), 0.0);
    c.push(cn);
    for n in 1..=d {
        cn = cn * beta / (n as f64).sqrt();
        if (n as f64) > x && cn.norm() < 1e-18 {
            break;
        }
        c.push(cn);
    }
    let len = c.len();
    let mut total = ZERO;
    for m in 0..len {
        let mut row = ZERO;
        for n in 0..len {
            row += rho.matrix[(m, n)] * c[n];
        }
        total += c[m].conj() * row;
    }
    total.re
}

/// Trace distance `½‖a − b‖₁` from the eigenvalues of the difference.
/// Matrices of different cutoff are compared after zero padding.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> f64 {
    let d = a.cutoff().max(b.cutoff());
    let diff = a.with_cutoff(d).matrix - b.with_cutoff(d).matrix;
    0.5 * diff.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>()
}

/// Upper bound on the trace distance, `½ Σ_{mn} |a_mn − b_mn|`; cheap for
/// large cutoffs where an eigendecomposition is not.
pub fn trace_distance_bound(a: &DensityOperator, b: &DensityOperator) -> f64 {
    let d = a.cutoff().max(b.cutoff());
    let (a, b) = (a.with_cutoff(d), b.with_cutoff(d));
    0.5 * a.matrix.iter().zip(b.matrix.iter()).map(|(x, y)| (x - y).norm()).sum::<f64>()
}

//! Husimi Q-functions on phase-space grids, their rescaling under a
//! quantum-limited amplifier, and signal-to-noise ratios of amplified states.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{self, DensityOperator, EPS_TRUNC};

/// Uniform rectangular grid in the complex β plane, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    n_re: usize,
    n_im: usize,
}

impl GridSpec {
    pub fn new(
        (re_min, re_max): (f64, f64),
        (im_min, im_max): (f64, f64),
        n_re: usize,
        n_im: usize,
    ) -> Result<Self> {
        let finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !finite || re_max <= re_min || im_max <= im_min {
            return Err(Error::InvalidGrid(format!(
                "ranges [{re_min}, {re_max}] x [{im_min}, {im_max}] must be finite and increasing"
            )));
        }
        if n_re < 2 || n_im < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points per axis, got {n_re} x {n_im}"
            )));
        }
        Ok(Self { re_min, re_max, im_min, im_max, n_re, n_im })
    }

    /// Square grid `[−half_width, half_width]²` with `n` points per axis.
    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new((-half_width, half_width), (-half_width, half_width), n, n)
    }

    pub fn n_re(&self) -> usize {
        self.n_re
    }

    pub fn n_im(&self) -> usize {
        self.n_im
    }

    pub fn re_range(&self) -> (f64, f64) {
        (self.re_min, self.re_max)
    }

    pub fn im_range(&self) -> (f64, f64) {
        (self.im_min, self.im_max)
    }

    pub fn d_re(&self) -> f64 {
        (self.re_max - self.re_min) / (self.n_re - 1) as f64
    }

    pub fn d_im(&self) -> f64 {
        (self.im_max - self.im_min) / (self.n_im - 1) as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.d_re() * self.d_im()
    }

    pub fn point(&self, i_re: usize, i_im: usize) -> Complex64 {
        Complex64::new(
            self.re_min + i_re as f64 * self.d_re(),
            self.im_min + i_im as f64 * self.d_im(),
        )
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::square(3.0, 201).expect("valid default grid")
    }
}

/// Anything that can be evaluated as a Q-function.
pub trait QFunction: Sync {
    fn q(&self, beta: Complex64) -> f64;
}

/// Q-function of a density operator whose truncation has been checked.
#[derive(Clone, Debug)]
pub struct StateQ<'a> {
    rho: &'a DensityOperator,
}

impl<'a> StateQ<'a> {
    pub fn new(rho: &'a DensityOperator) -> Result<Self> {
        rho.check_truncation(EPS_TRUNC, "Q-function")?;
        Ok(Self { rho })
    }
}

impl QFunction for StateQ<'_> {
    fn q(&self, beta: Complex64) -> f64 {
        fock::coherent_overlap_unchecked(self.rho, beta) / PI
    }
}

/// `Q_out(β) = Q_in(β/g)/g²`, the Q-function after a quantum-limited
/// amplifier of amplitude gain `g`.
#[derive(Clone, Debug)]
pub struct Rescaled<Q> {
    inner: Q,
    gain: f64,
}

impl<Q> Rescaled<Q> {
    pub fn gain(&self) -> f64 {
        self.gain
    }
}

impl<Q: QFunction> QFunction for Rescaled<Q> {
    fn q(&self, beta: Complex64) -> f64 {
        self.inner.q(beta / self.gain) / (self.gain * self.gain)
    }
}

pub fn q_rescale<Q: QFunction>(inner: Q, gain: f64) -> Result<Rescaled<Q>> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::InvalidSpec(format!("Q rescaling needs a gain of at least 1, got {gain}")));
    }
    Ok(Rescaled { inner, gain })
}

/// `⟨β|ρ|β⟩/π`.
pub fn q_function(rho: &DensityOperator, beta: Complex64) -> Result<f64> {
    Ok(StateQ::new(rho)?.q(beta))
}

/// Q-function sampled on a grid; `values[(i_re, i_im)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QGrid {
    pub grid: GridSpec,
    pub values: DMatrix<f64>,
}

impl QGrid {
    /// Evaluates in parallel; the result does not depend on the thread count.
    pub fn evaluate<Q: QFunction + ?Sized>(q: &Q, grid: GridSpec) -> Self {
        let (n_re, n_im) = (grid.n_re, grid.n_im);
        let flat: Vec<f64> = (0..n_re * n_im)
            .into_par_iter()
            .map(|k| q.q(grid.point(k % n_re, k / n_re)))
            .collect();
        Self {
            grid,
            values: DMatrix::from_vec(n_re, n_im, flat),
        }
    }

    /// Riemann sum `Σ Q ΔA`, accumulated in a fixed order.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// `Σ βᵐ β*ᵏ Q ΔA`, approximating the antinormal moment `⟨aᵐ a†ᵏ⟩`.
    pub fn antinormal_moment(&self, m: usize, k: usize) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for i_im in 0..self.grid.n_im {
            for i_re in 0..self.grid.n_re {
                let beta = self.grid.point(i_re, i_im);
                total += beta.powu(m as u32) * beta.conj().powu(k as u32) * self.values[(i_re, i_im)];
            }
        }
        total * self.grid.cell_area()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Phase that rotates `alpha` onto the positive real axis, with the rotated
/// amplitude.
pub fn rotate_to_real(alpha: Complex64) -> (f64, f64) {
    (alpha.norm(), -alpha.arg())
}

/// Antinormally ordered moments of a state after a phase-insensitive
/// amplifier of gain `g` with `nbar` thermal ancilla quanta.
///
/// The Q-function is rescaled, `Q(β/g)/g²`, then smeared by a circular
/// Gaussian of variance `v = n̄(g² − 1)`, so `⟨a⟩` and `⟨a²⟩` scale as `g` and
/// `g²` while `⟨aa†⟩` and `⟨a²a†²⟩` pick up `v` terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplifiedMoments {
    /// `⟨a⟩`
    pub a: Complex64,
    /// `⟨a²⟩`
    pub a2: Complex64,
    /// `⟨aa†⟩`
    pub a_ad: f64,
    /// `⟨a²a†²⟩`
    pub a2_ad2: f64,
}

pub fn amplified_moments(rho: &DensityOperator, g: f64, nbar: f64) -> Result<AmplifiedMoments> {
    rho.check_truncation(EPS_TRUNC, "amplifier input state")?;
    if !(g >= 1.0) || !g.is_finite() {
        return Err(Error::InvalidSpec(format!("gain g = {g} must be at least 1")));
    }
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidSpec(format!("n̄ = {nbar} must be non-negative")));
    }
    let g_sq = g * g;
    let v = nbar * (g_sq - 1.0);
    let a_ad = fock::antinormal_moment_unchecked(rho, 1, 1).re * g_sq;
    let a2_ad2 = fock::antinormal_moment_unchecked(rho, 2, 2).re * g_sq * g_sq;
    Ok(AmplifiedMoments {
        a: fock::antinormal_moment_unchecked(rho, 1, 0) * g,
        a2: fock::antinormal_moment_unchecked(rho, 2, 0) * g_sq,
        a_ad: a_ad + v,
        // E|β + z|⁴ = E|β|⁴ + 4v E|β|² + 2v² for circular Gaussian z.
        a2_ad2: a2_ad2 + 4.0 * v * a_ad + 2.0 * v * v,
    })
}

/// Quadrature signal-to-noise ratios of an amplified state, with antinormal
/// variances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSnr {
    /// `⟨x1⟩/√V_x1`.
    pub snr_x1: f64,
    /// `⟨x1⟩/√V_x2`.
    pub snr_x2: f64,
    pub sqrtp_snr_x1: f64,
    pub sqrtp_snr_x2: f64,
    /// Input reference `√2 α`.
    pub snr_in: f64,
}

/// SNRs of the state obtained by sending `rho_first_stage` through the
/// second-stage amplifier `(g2, nbar)`, from [`amplified_moments`].
///
/// The input amplitude `alpha` must already be rotated to the real axis and
/// `p_success` is the heralding probability that produced `rho_first_stage`.
pub fn snr_quadratures_antinormal(
    rho_first_stage: &DensityOperator,
    g2: f64,
    nbar: f64,
    alpha: f64,
    p_success: f64,
) -> Result<QuadratureSnr> {
    let m = amplified_moments(rho_first_stage, g2, nbar)?;
    // x1 = (a + a†)/√2, x2 = (a − a†)/(i√2); antinormally ordered squares.
    let mean_x1 = std::f64::consts::SQRT_2 * m.a.re;
    let mean_x2 = std::f64::consts::SQRT_2 * m.a.im;
    let var_x1 = m.a2.re + m.a_ad - mean_x1 * mean_x1;
    let var_x2 = -m.a2.re + m.a_ad - mean_x2 * mean_x2;
    let ratio = |v: f64| if mean_x1 == 0.0 { 0.0 } else { mean_x1 / v.sqrt() };
    let (snr_x1, snr_x2) = (ratio(var_x1), ratio(var_x2));
    let root_p = p_success.sqrt();
    Ok(QuadratureSnr {
        snr_x1,
        snr_x2,
        sqrtp_snr_x1: root_p * snr_x1,
        sqrtp_snr_x2: root_p * snr_x2,
        snr_in: std::f64::consts::SQRT_2 * alpha,
    })
}

/// Number-based SNR `⟨n⟩/√Var(n)` of the amplified state, and its product
/// with `√p`.
///
/// Uses `⟨n⟩ = ⟨aa†⟩ − 1` and `⟨n²⟩ = ⟨a²a†²⟩ − 3⟨n⟩ − 2`.
pub fn snr_number(
    rho_first_stage: &DensityOperator,
    g2: f64,
    nbar: f64,
    p_success: f64,
) -> Result<(f64, f64)> {
    let m = amplified_moments(rho_first_stage, g2, nbar)?;
    let n = m.a_ad - 1.0;
    let n_sq = m.a2_ad2 - 3.0 * n - 2.0;
    let var = n_sq - n * n;
    if n.abs() < 1e-300 {
        return Ok((0.0, 0.0));
    }
    if !(var > 0.0) {
        return Err(Error::Numerical(format!("number variance {var} is not positive")));
    }
    let snr = n / var.sqrt();
    Ok((snr, p_success.sqrt() * snr))
}

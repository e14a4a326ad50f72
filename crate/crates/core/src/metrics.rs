//! Closed-form figures of merit for μ²-amplifiers.
//!
//! Every formula depends on the input only through `|α|`, so the functions
//! here take `alpha_abs` and drop the phase.

use crate::error::{Error, Result};

/// Quasiprobability ordering parameter `s ∈ [−1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SOrder(f64);

impl SOrder {
    pub const NORMAL: SOrder = SOrder(1.0);
    pub const SYMMETRIC: SOrder = SOrder(0.0);
    pub const ANTINORMAL: SOrder = SOrder(-1.0);

    pub fn new(s: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&s) {
            Ok(SOrder(s))
        } else {
            Err(Error::InvalidOrdering(s))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `(1 − s)/2`, the s-ordered variance of a coherent state.
    pub fn vacuum_noise(self) -> f64 {
        (1.0 - self.0) / 2.0
    }

    fn nonsingular(self) -> Result<Self> {
        if self.0 >= 1.0 {
            Err(Error::SingularOrdering)
        } else {
            Ok(self)
        }
    }
}

/// `e_N(x) = Σ_{n=0}^{N} xⁿ/n!`.
pub fn e_trunc(x: f64, n_max: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..=n_max {
        term *= x / n as f64;
        sum += term;
    }
    sum
}

/// `ln(e^{−y} e_N(y))`, the log of the Poisson CDF at `N`. Below the mean
/// the upper tail is summed instead, so values next to one are not rounded
/// above it.
fn ln_poisson_cdf(y: f64, n_max: usize) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    if y >= (n_max + 1) as f64 {
        return -y + e_trunc(y, n_max).ln();
    }
    // e^{−y} Σ_{n>N} yⁿ/n!, led by the n = N + 1 term.
    let lead = (-y + (n_max + 1) as f64 * y.ln() - (1..=n_max + 1).map(|k| (k as f64).ln()).sum::<f64>()).exp();
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = n_max + 2;
    while term > 1e-17 * sum {
        term *= y / k as f64;
        sum += term;
        k += 1;
    }
    (-lead * sum).ln_1p()
}

/// Exact success probability of the immaculate Kraus stage on `|α⟩`.
pub fn p_success_exact(alpha_abs: f64, g1: f64, ncut: usize) -> f64 {
    let x = alpha_abs * alpha_abs;
    (-x).exp() * e_trunc(g1 * g1 * x, ncut) / g1.powi(2 * ncut as i32)
}

/// Exact fidelity of the cascade output to `|Gα⟩` with an ideal second
/// stage.
pub fn fidelity_exact(alpha_abs: f64, g1: f64, gain: f64, ncut: usize) -> Result<f64> {
    if g1 > gain {
        return Err(Error::InvalidSpec(format!("g1 = {g1} exceeds the overall gain {gain}")));
    }
    let y = g1 * g1 * alpha_abs * alpha_abs;
    Ok(g1 * g1 / (gain * gain) * ln_poisson_cdf(y, ncut).exp())
}

/// Exact probability–fidelity product `G² p F`; the overall gain cancels.
pub fn pfp_exact(alpha_abs: f64, g1: f64, ncut: usize) -> f64 {
    let x = alpha_abs * alpha_abs;
    // e^{−(g1²+1)x} e_N(g1²x)² = [e^{−y} e_N(y)]² e^{(g1²−1)x} with y = g1²x.
    let log = 2.0 * ln_poisson_cdf(g1 * g1 * x, ncut) + (g1 * g1 - 1.0) * x
        - 2.0 * (ncut as f64 - 1.0) * g1.ln();
    log.exp()
}

/// PFP achieved by skipping the immaculate stage, `g1² e^{−(g1−1)²|α|²}`;
/// an upper bound on [`pfp_exact`].
pub fn pfp_bound(alpha_abs: f64, g1: f64) -> f64 {
    let d = g1 - 1.0;
    g1 * g1 * (-d * d * alpha_abs * alpha_abs).exp()
}

/// Amplitude at which [`pfp_bound`] crosses one. `None` for `g1 ≤ 1`, where
/// the bound is identically one.
pub fn pfp_bound_crossing(g1: f64) -> Option<f64> {
    (g1 > 1.0).then(|| (2.0 * g1.ln()).sqrt() / (g1 - 1.0))
}

fn noise_gain(mu2: f64, gain: f64) -> f64 {
    mu2 * (gain * gain - 1.0) + 1.0
}

/// Success probability inside the high-fidelity operating region.
pub fn p_success_region(mu2: f64, gain: f64, ncut: usize) -> f64 {
    (noise_gain(mu2, gain) / (gain * gain)).powi(ncut as i32)
}

/// PFP inside the high-fidelity operating region, `1/g1^{2(N−1)}`.
pub fn pfp_region(mu2: f64, gain: f64, ncut: usize) -> f64 {
    (noise_gain(mu2, gain) / (gain * gain)).powi(ncut as i32 - 1)
}

/// Fidelity of a μ²-amplifier output to the target coherent state.
pub fn fidelity_mu(mu2: f64, gain: f64) -> f64 {
    1.0 / noise_gain(mu2, gain)
}

/// Uncertainty-principle bound on the success probability.
pub fn p_bound_mu(mu2: f64, gain: f64) -> f64 {
    noise_gain(mu2, gain) / (gain * gain)
}

/// s-ordered output variance for a coherent input.
pub fn sigma_out_sq(s: SOrder, mu2: f64, gain: f64) -> f64 {
    mu2 * (gain * gain - 1.0) + s.vacuum_noise()
}

/// Input-referred added noise `𝒜(s)`.
pub fn added_noise_input_referred(s: SOrder, mu2: f64, gain: f64) -> f64 {
    (1.0 - 1.0 / (gain * gain)) * (mu2 - s.vacuum_noise())
}

/// High-gain added noise `A(s) = μ² − (1 − s)/2`.
pub fn added_noise(s: SOrder, mu2: f64) -> f64 {
    mu2 - s.vacuum_noise()
}

pub fn snr_in(s: SOrder, alpha: f64) -> Result<f64> {
    let s = s.nonsingular()?;
    Ok(std::f64::consts::SQRT_2 * alpha / s.vacuum_noise().sqrt())
}

pub fn snr_out(s: SOrder, alpha: f64, mu2: f64, gain: f64) -> Result<f64> {
    let s = s.nonsingular()?;
    Ok(std::f64::consts::SQRT_2 * gain * alpha / sigma_out_sq(s, mu2, gain).sqrt())
}

/// `NF(s) = SNR_in² / (p SNR_out²)` with the operating-region success
/// probability. The signal amplitude cancels.
pub fn noise_figure(s: SOrder, mu2: f64, gain: f64, ncut: usize) -> Result<f64> {
    let s = s.nonsingular()?;
    let snr_ratio_sq = sigma_out_sq(s, mu2, gain) / (gain * gain * s.vacuum_noise());
    Ok(snr_ratio_sq / p_success_region(mu2, gain, ncut))
}

/// Location and height of the N = 1 PFP bump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpReport {
    pub alpha_bump: f64,
    pub pfp_peak: f64,
    /// Where the exact bound `PFP₀` crosses one.
    pub alpha0: f64,
    /// Operating-region radius `1/g1`.
    pub alpha_tilde: f64,
}

/// N = 1 bump analytics for an immaculate stage of gain `g1`.
pub fn bump_report(g1: f64) -> Result<BumpReport> {
    if !(g1 > 1.0) {
        return Err(Error::InvalidSpec(format!(
            "no PFP bump for g1 = {g1}; the ideal amplifier has PFP = 1 everywhere"
        )));
    }
    let g2 = g1 * g1;
    let inv = 1.0 / g2;
    Ok(BumpReport {
        alpha_bump: ((g2 - 1.0) / (g2 * (g2 + 1.0))).sqrt(),
        pfp_peak: 4.0 / std::f64::consts::E * inv.exp() / ((1.0 + inv) * (1.0 + inv)),
        alpha0: pfp_bound_crossing(g1).expect("g1 > 1"),
        alpha_tilde: 1.0 / g1,
    })
}

/// Bump of the perfect (μ² = 1/2) amplifier written in the overall gain:
/// returns `(g1²|α_bump|², peak)`.
pub fn perfect_bump(gain: f64) -> (f64, f64) {
    let gg = gain * gain;
    let scaled = (gg - 1.0) / (3.0 * gg + 1.0);
    let denom = 1.0 + 1.0 / (3.0 * gg);
    let peak = 16.0 / (9.0 * 0.5f64.exp()) * (1.0 / (2.0 * gg)).exp() / (denom * denom);
    (scaled, peak)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    ImmaculateDominant,
    IdealDominant,
    Boundary,
}

const REGIME_BAND: f64 = 1e-12;

pub fn regime_classify(mu2: f64, gain: f64) -> Regime {
    let x = mu2 * gain * gain;
    if (x - 1.0).abs() <= REGIME_BAND {
        Regime::Boundary
    } else if x < 1.0 {
        Regime::ImmaculateDominant
    } else {
        Regime::IdealDominant
    }
}

/// Operating-region quantities for one `(μ², G, N)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionSummary {
    pub g1_sq: f64,
    pub g2_sq: f64,
    pub fidelity: f64,
    pub p_success: f64,
    pub pfp: f64,
    pub nf_antinormal: f64,
    pub nf_symmetric: f64,
}

impl RegionSummary {
    pub fn evaluate(mu2: f64, gain: f64, ncut: usize) -> Self {
        let g2_sq = noise_gain(mu2, gain);
        Self {
            g1_sq: gain * gain / g2_sq,
            g2_sq,
            fidelity: fidelity_mu(mu2, gain),
            p_success: p_success_region(mu2, gain, ncut),
            pfp: pfp_region(mu2, gain, ncut),
            nf_antinormal: noise_figure(SOrder::ANTINORMAL, mu2, gain, ncut).expect("s = -1"),
            nf_symmetric: noise_figure(SOrder::SYMMETRIC, mu2, gain, ncut).expect("s = 0"),
        }
    }

    /// Leading high-gain behaviour. Undefined for μ² = 0, where every
    /// quantity keeps its full gain dependence.
    pub fn high_gain_limit(mu2: f64, gain: f64, ncut: usize) -> Option<Self> {
        if !(mu2 > 0.0) {
            return None;
        }
        let n = ncut as i32;
        let gg = gain * gain;
        Some(Self {
            g1_sq: 1.0 / mu2,
            g2_sq: mu2 * gg,
            fidelity: 1.0 / (mu2 * gg),
            p_success: mu2.powi(n),
            pfp: mu2.powi(n - 1),
            nf_antinormal: mu2.powi(1 - n),
            nf_symmetric: 2.0 * mu2.powi(1 - n),
        })
    }
}

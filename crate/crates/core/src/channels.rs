//! Amplifier stages: the immaculate Kraus stage, the phase-insensitive
//! linear-amplifier channel and their cascade.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{self, DensityOperator, FockVector, EPS_TRUNC};
use crate::metrics;

/// Below this, a gain is treated as exactly one.
const UNIT_GAIN_TOL: f64 = 1e-14;
const DESIGN_TOL: f64 = 1e-12;

/// Primary design parameters of a μ²-amplifier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplifierSpec {
    pub mu2: f64,
    pub gain: f64,
    pub ncut: usize,
    /// Thermal quanta of the second-stage ancilla.
    pub nbar: f64,
}

impl AmplifierSpec {
    /// Spec with the optimal second stage: `n̄ = 0` for `μ² ≤ 1` and
    /// `n̄ = μ² − 1` above, so that `g1 = 1` for every physical amplifier.
    pub fn new(mu2: f64, gain: f64, ncut: usize) -> Self {
        Self {
            mu2,
            gain,
            ncut,
            nbar: (mu2 - 1.0).max(0.0),
        }
    }

    pub fn with_nbar(self, nbar: f64) -> Self {
        Self { nbar, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageDesign {
    pub g1: f64,
    pub g2: f64,
    /// Operating-region radius `√N/g1`.
    pub alpha_tilde: f64,
    /// Set when `μ² < 1` is built with a noisy second stage.
    pub suboptimal: bool,
}

impl StageDesign {
    /// `g1 = 1`: the immaculate stage is skipped and the amplifier works
    /// deterministically over the whole phase plane.
    pub fn is_deterministic(&self) -> bool {
        (self.g1 - 1.0).abs() <= DESIGN_TOL
    }
}

/// Splits the overall gain between the two stages from
/// `g2² = μ²(G² − 1)/(n̄ + 1) + 1`, `g1 = G/g2`.
pub fn design_stages(spec: &AmplifierSpec) -> Result<StageDesign> {
    let AmplifierSpec { mu2, gain, ncut, nbar } = *spec;
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::InvalidSpec(format!("gain G = {gain} must be finite and at least 1")));
    }
    if !(mu2 >= 0.0) || !mu2.is_finite() {
        return Err(Error::InvalidSpec(format!("μ² = {mu2} must be finite and non-negative")));
    }
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidSpec(format!("n̄ = {nbar} must be finite and non-negative")));
    }
    if ncut < 1 {
        return Err(Error::InvalidSpec("number cutoff N must be at least 1".into()));
    }
    let g2 = (mu2 * (gain * gain - 1.0) / (nbar + 1.0) + 1.0).sqrt();
    let mut g1 = gain / g2;
    if g1 < 1.0 - DESIGN_TOL {
        return Err(Error::InvalidSpec(format!(
            "μ² = {mu2} with n̄ = {nbar} needs g1 = {g1} < 1; use n̄ ≥ μ² − 1"
        )));
    }
    if g1 < 1.0 {
        g1 = 1.0;
    }
    let suboptimal = mu2 < 1.0 && nbar > 0.0;
    if suboptimal {
        log::warn!(
            "μ² = {mu2} < 1 with n̄ = {nbar} > 0 is suboptimal: a noisy second stage forces a larger g1"
        );
    }
    Ok(StageDesign {
        g1,
        g2,
        alpha_tilde: (ncut as f64).sqrt() / g1,
        suboptimal,
    })
}

/// Applies `K = P_N g1^{a†a} / g1^N` to `|α⟩`.
///
/// Returns the normalized post-selected state on `0..=cutoff` (support only
/// on `0..=N`) and the success probability `‖K|α⟩‖²`.
pub fn immaculate_apply(
    alpha: Complex64,
    g1: f64,
    ncut: usize,
    cutoff: usize,
) -> Result<(FockVector, f64)> {
    if ncut < 1 {
        return Err(Error::InvalidSpec("number cutoff N must be at least 1".into()));
    }
    if !(g1 >= 1.0) {
        return Err(Error::InvalidSpec(format!("immaculate gain g1 = {g1} must be at least 1")));
    }
    if cutoff < ncut {
        return Err(Error::InvalidSpec(format!("state cutoff {cutoff} is below N = {ncut}")));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    // ⟨n|K|α⟩ = g1^{n-N} e^{-|α|²/2} αⁿ/√n!
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp() / g1.powi(ncut as i32), 0.0);
    amps[0] = c;
    for (n, amp) in amps.iter_mut().enumerate().take(ncut + 1).skip(1) {
        c = c * alpha * g1 / (n as f64).sqrt();
        *amp = c;
    }
    let unnormalized = FockVector::new(amps)?;
    let p = unnormalized.norm_sqr();
    if !(p > 0.0) {
        return Err(Error::Numerical(format!(
            "success probability underflowed for |α| = {}",
            alpha.norm()
        )));
    }
    Ok((unnormalized.normalized()?, p))
}

/// Loss transmissivity and quantum-limited power gain that compose to the
/// amplifier `(g, n̄)`: a phase-insensitive Gaussian channel is fixed by its
/// gain and added noise, so `amp(K) ∘ loss(η)` with `Kη = g²` and
/// `K − 1 = (n̄ + 1)(g² − 1)` is the same map.
fn decompose(g: f64, nbar: f64) -> (f64, f64) {
    let power = 1.0 + (nbar + 1.0) * (g * g - 1.0);
    (g * g / power, power)
}

/// Pure-loss channel with transmissivity `eta`.
fn apply_loss(rho: &DMatrix<Complex64>, eta: f64) -> DMatrix<Complex64> {
    let dim = rho.nrows();
    if eta >= 1.0 {
        return rho.clone();
    }
    // b[n][k] = √C(n,k) η^{(n−k)/2} (1−η)^{k/2}, the ⟨n−k|B_k|n⟩ element.
    let mut b = vec![Vec::new(); dim];
    for (n, row) in b.iter_mut().enumerate() {
        let mut v = eta.powf(n as f64 / 2.0);
        row.push(v);
        for k in 0..n {
            v *= (((n - k) as f64) / ((k + 1) as f64) * (1.0 - eta) / eta).sqrt();
            row.push(v);
        }
    }
    let mut out = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for n in 0..dim {
        for m in 0..dim {
            let r = rho[(n, m)];
            if r == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..=n.min(m) {
                out[(n - k, m - k)] += r * (b[n][k] * b[m][k]);
            }
        }
    }
    out
}

/// Kraus elements `⟨n+j|A_j|n⟩ = τ^j √C(n+j, j) / κ^{n+1}` of the
/// quantum-limited amplifier with power gain `κ² = power`, up to output
/// level `out_cutoff`.
fn amplifier_elements(power: f64, in_dim: usize, out_cutoff: usize) -> Vec<Vec<f64>> {
    let tau = (1.0 - 1.0 / power).sqrt();
    let kappa = power.sqrt();
    (0..in_dim.min(out_cutoff + 1))
        .map(|n| {
            let mut col = Vec::with_capacity(out_cutoff + 1 - n);
            let mut v = kappa.powi(-(n as i32 + 1));
            col.push(v);
            for j in 0..(out_cutoff - n) {
                v *= tau * (((n + j + 1) as f64) / ((j + 1) as f64)).sqrt();
                col.push(v);
            }
            col
        })
        .collect()
}

/// Phase-insensitive linear amplifier of amplitude gain `g` whose ancilla
/// holds `nbar` thermal quanta: `⟨a⟩ → g⟨a⟩` and
/// `⟨Δa†Δa⟩ → g²⟨Δa†Δa⟩ + (n̄ + 1)(g² − 1)`.
///
/// The output is computed on levels `0..=out_cutoff` and rejected if its top
/// two levels hold more than `EPS_TRUNC`.
pub fn linear_amp_channel(
    rho: &DensityOperator,
    g: f64,
    nbar: f64,
    out_cutoff: usize,
) -> Result<DensityOperator> {
    let out = linear_amp_channel_unchecked(rho, g, nbar, out_cutoff)?;
    out.check_truncation(EPS_TRUNC, "linear amplifier output")?;
    Ok(out)
}

pub(crate) fn linear_amp_channel_unchecked(
    rho: &DensityOperator,
    g: f64,
    nbar: f64,
    out_cutoff: usize,
) -> Result<DensityOperator> {
    if !(g >= 1.0) || !g.is_finite() {
        return Err(Error::InvalidSpec(format!("amplifier gain g = {g} must be at least 1")));
    }
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidSpec(format!("n̄ = {nbar} must be non-negative")));
    }
    if g - 1.0 < UNIT_GAIN_TOL {
        return Ok(rho.with_cutoff(out_cutoff));
    }
    let (eta, power) = decompose(g, nbar);
    let lossy = apply_loss(rho.matrix(), eta);
    let in_dim = lossy.nrows();
    let amp = amplifier_elements(power, in_dim, out_cutoff);
    let mut out = DMatrix::from_element(out_cutoff + 1, out_cutoff + 1, Complex64::new(0.0, 0.0));
    for n in 0..amp.len() {
        for m in 0..amp.len() {
            let r = lossy[(n, m)];
            if r == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (an, am) = (&amp[n], &amp[m]);
            let reach = an.len().min(am.len());
            for j in 0..reach {
                out[(n + j, m + j)] += r * (an[j] * am[j]);
            }
        }
    }
    Ok(DensityOperator::from_matrix_unchecked(out))
}

/// Output cutoff for [`linear_amp_channel`]: starts from
/// `⌈g²(D+1) + 10g√(D+1)⌉` and grows until the predicted output keeps less
/// than `eps` above the cutoff and in its top two levels.
pub fn default_output_cutoff(rho: &DensityOperator, g: f64, nbar: f64, eps: f64) -> usize {
    let d_in = rho.cutoff();
    let start = (g * g * (d_in + 1) as f64 + 10.0 * g * ((d_in + 1) as f64).sqrt()).ceil() as usize;
    if g - 1.0 < UNIT_GAIN_TOL {
        return d_in.max(2);
    }
    let (eta, power) = decompose(g, nbar);
    let lossy_diag: Vec<f64> = {
        let diag = DensityOperator::from_diagonal(&rho.diagonal()).expect("non-empty");
        let lossy = apply_loss(diag.matrix(), eta);
        (0..=d_in).map(|n| lossy[(n, n)].re).collect()
    };
    let total: f64 = lossy_diag.iter().sum();
    let tau_sq = 1.0 - 1.0 / power;
    // Running amplitude a_{m−n}(n)² for every input level n.
    let mut weight: Vec<f64> = (0..=d_in).map(|n| power.powi(-(n as i32 + 1))).collect();
    let mut cumulative = 0.0;
    let mut prev = f64::INFINITY;
    let mut m = 0usize;
    loop {
        let mut p = 0.0;
        for n in 0..=d_in.min(m) {
            let j = m - n;
            if j > 0 {
                weight[n] *= tau_sq * (m as f64) / (j as f64);
            }
            p += lossy_diag[n] * weight[n];
        }
        cumulative += p;
        // The subtraction cannot resolve tails below a few ulps of the total.
        let tail = total - cumulative;
        if m >= start && tail <= eps.max(64.0 * f64::EPSILON * total) && prev + p <= 0.5 * eps {
            return m;
        }
        prev = p;
        m += 1;
    }
}

/// Exact closed-form figures of merit of a spec at input amplitude `|α|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedForm {
    pub p_success: f64,
    /// Unavailable for a noisy second stage behind a non-trivial first stage.
    pub fidelity: Option<f64>,
    pub pfp: Option<f64>,
}

pub fn closed_form(spec: &AmplifierSpec, alpha_abs: f64) -> Result<ClosedForm> {
    let design = design_stages(spec)?;
    let gain = spec.gain;
    if design.is_deterministic() {
        // Displaced thermal output with ⟨Δa†Δa⟩ = (n̄ + 1)(G² − 1).
        let f = 1.0 / ((spec.nbar + 1.0) * (gain * gain - 1.0) + 1.0);
        return Ok(ClosedForm { p_success: 1.0, fidelity: Some(f), pfp: Some(gain * gain * f) });
    }
    let p = metrics::p_success_exact(alpha_abs, design.g1, spec.ncut);
    if spec.nbar > 0.0 {
        return Ok(ClosedForm { p_success: p, fidelity: None, pfp: None });
    }
    let f = metrics::fidelity_exact(alpha_abs, design.g1, gain, spec.ncut)?;
    Ok(ClosedForm {
        p_success: p,
        fidelity: Some(f),
        pfp: Some(metrics::pfp_exact(alpha_abs, design.g1, spec.ncut)),
    })
}

/// Cutoff settings for [`mu2_amplify`]. `None` picks an adequate value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineCutoffs {
    pub first_stage: Option<usize>,
    pub output: Option<usize>,
    pub eps_trunc: f64,
}

impl Default for PipelineCutoffs {
    fn default() -> Self {
        Self {
            first_stage: None,
            output: None,
            eps_trunc: EPS_TRUNC,
        }
    }
}

/// One amplification run of a coherent input.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub spec: AmplifierSpec,
    pub design: StageDesign,
    pub alpha_in: Complex64,
    /// Post-selected state after the immaculate stage.
    pub rho_first_stage: DensityOperator,
    pub rho_out: DensityOperator,
    /// Success probability of the immaculate stage; the second stage is
    /// deterministic.
    pub p_success: f64,
    /// `⟨Gα|ρ_out|Gα⟩`.
    pub fidelity: f64,
    /// `G² p F`.
    pub pfp: f64,
}

/// Runs the full cascade on `|α⟩`: immaculate stage of gain `g1`, then the
/// linear amplifier of gain `g2` with `n̄` ancilla quanta. When the design
/// gives `g1 = 1` the first stage is skipped and the run is deterministic.
pub fn mu2_amplify(
    alpha: Complex64,
    spec: &AmplifierSpec,
    cutoffs: &PipelineCutoffs,
) -> Result<RunRecord> {
    let design = design_stages(spec)?;
    let eps = cutoffs.eps_trunc;
    let (first, p_success) = if design.is_deterministic() {
        let d = cutoffs
            .first_stage
            .unwrap_or_else(|| fock::coherent_cutoff(alpha, 0.1 * eps));
        (fock::coherent_state(alpha, d).normalized()?, 1.0)
    } else {
        let d = cutoffs.first_stage.unwrap_or(spec.ncut + 2);
        immaculate_apply(alpha, design.g1, spec.ncut, d)?
    };
    let rho_first_stage = first.to_density();
    rho_first_stage.check_truncation(eps, "first-stage output")?;
    let out_cutoff = cutoffs
        .output
        .unwrap_or_else(|| default_output_cutoff(&rho_first_stage, design.g2, spec.nbar, eps));
    let rho_out = linear_amp_channel_unchecked(&rho_first_stage, design.g2, spec.nbar, out_cutoff)?;
    rho_out.check_truncation(eps, "amplifier output")?;
    let fidelity = fock::coherent_overlap_unchecked(&rho_out, alpha * spec.gain);
    Ok(RunRecord {
        spec: *spec,
        design,
        alpha_in: alpha,
        rho_first_stage,
        rho_out,
        p_success,
        fidelity,
        pfp: spec.gain * spec.gain * p_success * fidelity,
    })
}

//! Reference amplifier: two-mode squeezing of the signal with a thermal
//! ancilla, followed by a partial trace over the ancilla.
//!
//! The squeezing generator `r(ab − a†b†)` conserves `n_a − n_b`, so on the
//! truncated joint space it is a direct sum of real tridiagonal chains. Each
//! basis column is propagated exactly on its chain with a Chebyshev expansion
//! of the exponential; [`JointState`] keeps the literal dense construction for
//! small cutoffs, and the two are cross-checked in tests.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::channels;
use crate::error::{Error, Result};
use crate::fock::{DensityOperator, EPS_TRUNC};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const UNIT_GAIN_TOL: f64 = 1e-14;
/// Ancilla levels are dropped once the remaining thermal weight is below this.
const WEIGHT_TAIL: f64 = 1e-16;
/// Input levels with smaller population do not contribute at double precision.
const POPULATION_FLOOR: f64 = 1e-30;

/// Thermal state `(1/μ²)(1 − 1/μ²)ⁿ` with `μ² = n̄ + 1`, renormalized on
/// `0..=cutoff`. Returns the state and the weight that fell above the cutoff.
pub fn thermal_state(nbar: f64, cutoff: usize) -> Result<(DensityOperator, f64)> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidSpec(format!("thermal occupation n̄ = {nbar} must be non-negative")));
    }
    let weights = thermal_weights(nbar, cutoff);
    let tail = 1.0 - weights.iter().sum::<f64>();
    let norm = 1.0 - tail;
    let weights: Vec<f64> = weights.iter().map(|w| w / norm).collect();
    Ok((DensityOperator::from_diagonal(&weights)?, tail.max(0.0)))
}

fn thermal_weights(nbar: f64, cutoff: usize) -> Vec<f64> {
    let ratio = nbar / (nbar + 1.0);
    let mut w = 1.0 / (nbar + 1.0);
    (0..=cutoff)
        .map(|_| {
            let v = w;
            w *= ratio;
            v
        })
        .collect()
}

/// `r = arccosh g`.
pub fn squeeze_parameter(g: f64) -> f64 {
    (g + (g * g - 1.0).sqrt()).ln()
}

/// `J_0(x), J_1(x), …` by Miller's backward recurrence, truncated where the
/// terms become negligible.
fn bessel_j_sequence(x: f64) -> Vec<f64> {
    if x == 0.0 {
        return vec![1.0];
    }
    let start = (x + 20.0 * x.cbrt() + 60.0).ceil() as usize;
    let start = start + start % 2;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for m in (1..=start).rev() {
        j[m - 1] = 2.0 * m as f64 / x * j[m] - j[m + 1];
        if j[m - 1].abs() > 1e250 {
            for v in j[m - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // J_0 + 2 Σ J_{2k} = 1.
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    for v in j.iter_mut() {
        *v /= norm;
    }
    let last = j.iter().rposition(|v| v.abs() > 1e-20).unwrap_or(0);
    j.truncate(last + 1);
    j
}

/// One conserved-difference block of the generator: basis `|j + d, j⟩`
/// for `j_lo ≤ j ≤ j_hi`.
struct Chain {
    j_lo: usize,
    /// `h_k` couples chain positions `k` and `k + 1`.
    hops: Vec<f64>,
}

impl Chain {
    fn new(d: isize, r: f64, d_a: usize, d_b: usize) -> Self {
        let j_lo = if d < 0 { (-d) as usize } else { 0 };
        let j_hi = (d_b as isize).min(d_a as isize - d) as usize;
        let hops = (j_lo..j_hi)
            .map(|j| r * (((j as isize + d + 1) as f64) * ((j + 1) as f64)).sqrt())
            .collect();
        Self { j_lo, hops }
    }

    fn len(&self) -> usize {
        self.hops.len() + 1
    }

    /// `y = T x` for the symmetric tridiagonal `T` with off-diagonal `hops`.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for k in 0..n {
            let mut v = 0.0;
            if k > 0 {
                v += self.hops[k - 1] * x[k - 1];
            }
            if k + 1 < n {
                v += self.hops[k] * x[k + 1];
            }
            y[k] = v;
        }
    }

    /// Column `start` of `exp(G)` where `G` has `+h_k` above and `−h_k` below
    /// the diagonal.
    ///
    /// With `D = diag(iᵏ)`, `D⁻¹GD = iT`, so the column follows from
    /// `cos(T)e` and `sin(T)e`, both taken from one Chebyshev recurrence.
    fn propagate(&self, start: usize) -> Vec<f64> {
        let n = self.len();
        if n == 1 {
            return vec![1.0];
        }
        let lambda = (0..n)
            .map(|k| {
                let left = if k > 0 { self.hops[k - 1] } else { 0.0 };
                let right = if k + 1 < n { self.hops[k] } else { 0.0 };
                left + right
            })
            .fold(0.0, f64::max);
        let bessel = bessel_j_sequence(lambda);
        let mut cos_part = vec![0.0; n];
        let mut sin_part = vec![0.0; n];
        let mut prev = vec![0.0; n];
        prev[start] = 1.0;
        cos_part[start] = bessel[0];
        let mut cur = vec![0.0; n];
        self.apply(&prev, &mut cur);
        cur.iter_mut().for_each(|v| *v /= lambda);
        let mut next = vec![0.0; n];
        for (m, &jm) in bessel.iter().enumerate().skip(1) {
            // Coefficient of T_m in e^{iλx}: 2 i^m J_m.
            let coef = 2.0 * jm;
            match m % 4 {
                0 => axpy(coef, &cur, &mut cos_part),
                1 => axpy(coef, &cur, &mut sin_part),
                2 => axpy(-coef, &cur, &mut cos_part),
                _ => axpy(-coef, &cur, &mut sin_part),
            }
            if m + 1 < bessel.len() {
                self.apply(&cur, &mut next);
                for k in 0..n {
                    next[k] = 2.0 * next[k] / lambda - prev[k];
                }
                std::mem::swap(&mut prev, &mut cur);
                std::mem::swap(&mut cur, &mut next);
            }
        }
        (0..n)
            .map(|k| match (k + 4 - start % 4) % 4 {
                0 => cos_part[k],
                1 => -sin_part[k],
                2 => -cos_part[k],
                _ => sin_part[k],
            })
            .collect()
    }
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Joint-space truncation for the reference amplifier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleCutoffs {
    /// Largest signal level `D_A`, also the output cutoff.
    pub signal: usize,
    /// Largest ancilla level `D_B`.
    pub ancilla: usize,
    pub eps_trunc: f64,
}

impl OracleCutoffs {
    /// Starting point for a run: the signal cutoff of the linear-amplifier
    /// channel, and an ancilla cutoff of at least `max(20, ⌈10(n̄+1)g²⌉)` that
    /// also matches the signal cutoff, since both modes end up with
    /// comparable photon numbers, and holds a thermal tail of the expected
    /// output mean.
    pub fn suggested(rho: &DensityOperator, g: f64, nbar: f64) -> Self {
        let signal = channels::default_output_cutoff(rho, g, nbar, EPS_TRUNC).max(rho.cutoff());
        let mut ancilla = 20usize.max((10.0 * (nbar + 1.0) * g * g).ceil() as usize).max(signal);
        // Size for a thermal ancilla carrying the mean photon number it ends
        // up with, which covers the bare thermal input as well.
        let mean_out = (nbar + 1.0) * g * g - 1.0 + (g * g - 1.0) * rho.mean_photon_number();
        let q = mean_out / (mean_out + 1.0);
        while (1.0 - q) * (1.0 + q) * q.powi(ancilla as i32 - 1) > 0.5 * EPS_TRUNC {
            ancilla += 1;
        }
        Self { signal, ancilla, eps_trunc: EPS_TRUNC }
    }

    /// Both cutoffs enlarged by `factor`.
    pub fn grown(self, factor: f64) -> Self {
        Self {
            signal: (self.signal as f64 * factor).ceil() as usize,
            ancilla: (self.ancilla as f64 * factor).ceil() as usize,
            ..self
        }
    }
}

/// Caches the propagated columns `S(r)|n, l⟩` for fixed gain and cutoffs, so
/// several inputs can share the expensive part.
pub struct SqueezePropagator {
    gain: f64,
    r: f64,
    cutoffs: OracleCutoffs,
    columns: HashMap<(usize, usize), Vec<f64>>,
}

/// Output of the reference amplifier before any truncation check.
#[derive(Clone, Debug)]
pub struct OracleOutput {
    pub signal: DensityOperator,
    /// Populations of the ancilla after the interaction.
    pub ancilla_diagonal: Vec<f64>,
}

impl OracleOutput {
    fn edge(diag: &[f64]) -> f64 {
        diag.iter().rev().take(2).sum()
    }

    /// Fails when either mode holds more than `eps` in its top two levels.
    pub fn check(&self, eps: f64) -> Result<()> {
        self.signal.check_truncation(eps, "oracle signal mode")?;
        let population = Self::edge(&self.ancilla_diagonal);
        if population > eps {
            return Err(Error::CutoffInsufficient {
                context: "oracle ancilla mode",
                cutoff: self.ancilla_diagonal.len() - 1,
                population,
                eps,
            });
        }
        Ok(())
    }
}

impl SqueezePropagator {
    pub fn new(gain: f64, cutoffs: OracleCutoffs) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::InvalidSpec(format!("amplifier gain g = {gain} must be at least 1")));
        }
        Ok(Self {
            gain,
            r: squeeze_parameter(gain),
            cutoffs,
            columns: HashMap::new(),
        })
    }

    pub fn cutoffs(&self) -> OracleCutoffs {
        self.cutoffs
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    fn chain_start(&self, n: usize, l: usize) -> (Chain, usize) {
        let d = n as isize - l as isize;
        let chain = Chain::new(d, self.r, self.cutoffs.signal, self.cutoffs.ancilla);
        let start = l - chain.j_lo;
        (chain, start)
    }

    fn ensure_columns(&mut self, keys: &[(usize, usize)]) {
        let missing: Vec<(usize, usize)> = keys
            .iter()
            .copied()
            .filter(|k| !self.columns.contains_key(k))
            .collect();
        let computed: Vec<((usize, usize), Vec<f64>)> = missing
            .par_iter()
            .map(|&(n, l)| {
                let (chain, start) = self.chain_start(n, l);
                ((n, l), chain.propagate(start))
            })
            .collect();
        self.columns.extend(computed);
    }

    /// `Tr_B[S(r) ρ ⊗ σ_n̄ S†(r)]` without a truncation check.
    pub fn apply_unchecked(&mut self, rho: &DensityOperator, nbar: f64) -> Result<OracleOutput> {
        let OracleCutoffs { signal: d_a, ancilla: d_b, .. } = self.cutoffs;
        if rho.cutoff() > d_a {
            return Err(Error::Dimension(format!(
                "input cutoff {} exceeds the signal cutoff {d_a}",
                rho.cutoff()
            )));
        }
        let (sigma, _) = thermal_state(nbar, d_b)?;
        if self.gain - 1.0 < UNIT_GAIN_TOL {
            let signal = rho.with_cutoff(d_a);
            return Ok(OracleOutput { signal, ancilla_diagonal: sigma.diagonal() });
        }
        let weights = significant_weights(&sigma.diagonal());
        let levels: Vec<usize> = rho
            .diagonal()
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > POPULATION_FLOOR)
            .map(|(n, _)| n)
            .collect();
        let keys: Vec<(usize, usize)> = weights
            .iter()
            .enumerate()
            .flat_map(|(l, _)| levels.iter().map(move |&n| (n, l)))
            .collect();
        self.ensure_columns(&keys);

        let m = rho.matrix();
        let mut out = DMatrix::from_element(d_a + 1, d_a + 1, ZERO);
        let mut anc = vec![0.0; d_b + 1];
        for (l, &w) in weights.iter().enumerate() {
            for &n in &levels {
                let (chain_n, _) = self.chain_start(n, l);
                let un = &self.columns[&(n, l)];
                let lo_n = chain_n.j_lo;
                for (k, &u) in un.iter().enumerate() {
                    anc[lo_n + k] += w * m[(n, n)].re * u * u;
                }
                for &n2 in &levels {
                    let r = m[(n, n2)] * w;
                    if r == ZERO {
                        continue;
                    }
                    let (chain_n2, _) = self.chain_start(n2, l);
                    let un2 = &self.columns[&(n2, l)];
                    let lo_n2 = chain_n2.j_lo;
                    // Shared ancilla level j = lo + k on both chains.
                    let j_lo = lo_n.max(lo_n2);
                    let j_hi = (lo_n + un.len()).min(lo_n2 + un2.len());
                    for j in j_lo..j_hi {
                        let a = j + n - l;
                        let a2 = j + n2 - l;
                        out[(a, a2)] += r * (un[j - lo_n] * un2[j - lo_n2]);
                    }
                }
            }
        }
        Ok(OracleOutput {
            signal: DensityOperator::from_matrix_unchecked(out),
            ancilla_diagonal: anc,
        })
    }

    /// As [`SqueezePropagator::apply_unchecked`], rejecting outputs whose
    /// signal or ancilla populations reach the cutoffs.
    pub fn apply(&mut self, rho: &DensityOperator, nbar: f64) -> Result<DensityOperator> {
        let out = self.apply_unchecked(rho, nbar)?;
        out.check(self.cutoffs.eps_trunc)?;
        Ok(out.signal)
    }
}

/// Leading thermal weights whose remainder is below [`WEIGHT_TAIL`].
fn significant_weights(weights: &[f64]) -> Vec<f64> {
    let mut remaining: f64 = weights.iter().sum();
    let mut kept = Vec::new();
    for &w in weights {
        if remaining < WEIGHT_TAIL {
            break;
        }
        kept.push(w);
        remaining -= w;
    }
    kept
}

/// Reference amplifier with fixed cutoffs.
pub fn two_mode_amplify(
    rho: &DensityOperator,
    nbar: f64,
    g: f64,
    cutoffs: &OracleCutoffs,
) -> Result<DensityOperator> {
    SqueezePropagator::new(g, *cutoffs)?.apply(rho, nbar)
}

/// Reference amplifier that starts from [`OracleCutoffs::suggested`] and
/// enlarges both cutoffs by half until the truncation check passes.
pub fn two_mode_amplify_auto(
    rho: &DensityOperator,
    nbar: f64,
    g: f64,
) -> Result<(DensityOperator, OracleCutoffs)> {
    let mut cutoffs = OracleCutoffs::suggested(rho, g, nbar);
    let mut attempts = 0;
    loop {
        match two_mode_amplify(rho, nbar, g, &cutoffs) {
            Ok(out) => return Ok((out, cutoffs)),
            Err(Error::CutoffInsufficient { .. }) if attempts < 6 => {
                log::debug!("oracle cutoffs {cutoffs:?} too small, growing");
                cutoffs = cutoffs.grown(1.5);
                attempts += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Density matrix on the product space, index `n_a (D_B + 1) + n_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    matrix: DMatrix<Complex64>,
    d_a: usize,
    d_b: usize,
}

impl JointState {
    pub fn product(a: &DensityOperator, b: &DensityOperator) -> Self {
        let (d_a, d_b) = (a.cutoff(), b.cutoff());
        let nb = d_b + 1;
        let (ma, mb) = (a.matrix(), b.matrix());
        let dim = (d_a + 1) * nb;
        let matrix = DMatrix::from_fn(dim, dim, |i, k| ma[(i / nb, k / nb)] * mb[(i % nb, k % nb)]);
        Self { matrix, d_a, d_b }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Dense `r(ab − a†b†)` on the truncated product space.
    fn generator(d_a: usize, d_b: usize, r: f64) -> DMatrix<f64> {
        let nb = d_b + 1;
        let dim = (d_a + 1) * nb;
        let mut gen = DMatrix::zeros(dim, dim);
        for na in 0..d_a {
            for nbv in 0..d_b {
                // a†b† |na, nb⟩ = √((na+1)(nb+1)) |na+1, nb+1⟩
                let amp = r * (((na + 1) * (nbv + 1)) as f64).sqrt();
                let from = na * nb + nbv;
                let to = (na + 1) * nb + nbv + 1;
                gen[(to, from)] -= amp;
                gen[(from, to)] += amp;
            }
        }
        gen
    }

    /// `S(r) ρ S†(r)` with a dense matrix exponential.
    pub fn squeeze(&self, r: f64) -> Self {
        let u = Self::generator(self.d_a, self.d_b, r).exp();
        let u = u.map(|x| Complex64::new(x, 0.0));
        let matrix = &u * &self.matrix * u.transpose();
        Self { matrix, ..*self }
    }

    pub fn partial_trace_b(&self) -> DensityOperator {
        let nb = self.d_b + 1;
        let out = DMatrix::from_fn(self.d_a + 1, self.d_a + 1, |i, k| {
            (0..nb).map(|b| self.matrix[(i * nb + b, k * nb + b)]).sum()
        });
        DensityOperator::from_matrix_unchecked(out)
    }

    pub fn partial_trace_a(&self) -> DensityOperator {
        let nb = self.d_b + 1;
        let out = DMatrix::from_fn(nb, nb, |i, k| {
            (0..=self.d_a).map(|a| self.matrix[(a * nb + i, a * nb + k)]).sum()
        });
        DensityOperator::from_matrix_unchecked(out)
    }
}

/// Reference amplifier through the dense joint state; practical only for
/// joint dimensions of a few hundred.
pub fn two_mode_amplify_dense(
    rho: &DensityOperator,
    nbar: f64,
    g: f64,
    cutoffs: &OracleCutoffs,
) -> Result<OracleOutput> {
    if !(g >= 1.0) {
        return Err(Error::InvalidSpec(format!("amplifier gain g = {g} must be at least 1")));
    }
    let (sigma, _) = thermal_state(nbar, cutoffs.ancilla)?;
    let joint = JointState::product(&rho.with_cutoff(cutoffs.signal), &sigma);
    let joint = if g - 1.0 < UNIT_GAIN_TOL { joint } else { joint.squeeze(squeeze_parameter(g)) };
    Ok(OracleOutput {
        signal: joint.partial_trace_b(),
        ancilla_diagonal: joint.partial_trace_a().diagonal(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{immaculate_apply, linear_amp_channel};
    use crate::fock::{coherent_state, normal_moment, trace_distance};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn thermal_examples() {
        let (vac, tail) = thermal_state(0.0, 5).unwrap();
        assert_eq!(vac, DensityOperator::vacuum(5));
        assert_eq!(tail, 0.0);
        let (th, tail) = thermal_state(1.0, 60).unwrap();
        assert_abs_diff_eq!(th.mean_photon_number(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(tail, 0.5f64.powi(61), epsilon = 1e-16);
        let (th, _) = thermal_state(0.5, 30).unwrap();
        let d = th.diagonal();
        for n in 0..10 {
            assert_abs_diff_eq!(d[n + 1] / d[n], 1.0 - 1.0 / 1.5, epsilon = 1e-14);
        }
        assert!(thermal_state(-0.1, 5).is_err());
    }

    #[test]
    fn bessel_values() {
        // Reference values of J_n(x).
        let j = bessel_j_sequence(1.0);
        assert_abs_diff_eq!(j[0], 0.765_197_686_557_966_6, epsilon = 1e-15);
        assert_abs_diff_eq!(j[1], 0.440_050_585_744_933_5, epsilon = 1e-15);
        let j = bessel_j_sequence(10.0);
        assert_abs_diff_eq!(j[0], -0.245_935_764_451_348_3, epsilon = 1e-14);
        assert_abs_diff_eq!(j[5], -0.234_061_528_186_793_6, epsilon = 1e-14);
        let j = bessel_j_sequence(5000.0);
        let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-13);
        let sq = j[0] * j[0] + 2.0 * j.iter().skip(1).map(|v| v * v).sum::<f64>();
        assert_abs_diff_eq!(sq, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn chain_propagation_is_orthogonal() {
        let chain = Chain::new(1, 0.9, 40, 40);
        let cols: Vec<Vec<f64>> = (0..4).map(|s| chain.propagate(s)).collect();
        for a in 0..4 {
            for b in 0..4 {
                let dot: f64 = cols[a].iter().zip(&cols[b]).map(|(x, y)| x * y).sum();
                assert_abs_diff_eq!(dot, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn sector_path_matches_dense_exponential() {
        let cutoffs = OracleCutoffs { signal: 14, ancilla: 12, eps_trunc: 1.0 };
        let inputs = [
            DensityOperator::vacuum(3),
            coherent_state(c(0.3, 0.1), 6).normalized().unwrap().to_density(),
            immaculate_apply(c(0.5, 0.0), 1.4, 2, 4).unwrap().0.to_density(),
        ];
        for rho in &inputs {
            for (g, nbar) in [(1.3, 0.0), (1.6, 0.5), (2.2, 0.2)] {
                let dense = two_mode_amplify_dense(rho, nbar, g, &cutoffs).unwrap();
                let mut prop = SqueezePropagator::new(g, cutoffs).unwrap();
                let sector = prop.apply_unchecked(rho, nbar).unwrap();
                let dist = trace_distance(&dense.signal, &sector.signal);
                assert!(dist < 1e-12, "g={g} nbar={nbar}: {dist}");
                for (x, y) in dense.ancilla_diagonal.iter().zip(&sector.ancilla_diagonal) {
                    assert_abs_diff_eq!(x, y, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn vacuum_photon_number() {
        for g in [1.5, 3.0] {
            let (out, _) = two_mode_amplify_auto(&DensityOperator::vacuum(0), 0.0, g).unwrap();
            assert_abs_diff_eq!(out.mean_photon_number(), g * g - 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(out.trace(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn coherent_mean_and_identity() {
        let rho = coherent_state(c(0.3, 0.0), 14).normalized().unwrap().to_density();
        let (out, _) = two_mode_amplify_auto(&rho, 0.0, 2.0).unwrap();
        let mean = normal_moment(&out, 0, 1).unwrap();
        assert_abs_diff_eq!(mean.re, 0.6, epsilon = 1e-8);
        assert_abs_diff_eq!(mean.im, 0.0, epsilon = 1e-8);

        let cut = OracleCutoffs { signal: 14, ancilla: 20, eps_trunc: EPS_TRUNC };
        let same = two_mode_amplify(&rho, 0.0, 1.0, &cut).unwrap();
        assert_eq!(same, rho);
    }

    #[test]
    fn matches_channel() {
        let (state, _) = immaculate_apply(c(0.4, 0.0), 1.4, 2, 4).unwrap();
        let rho = state.to_density();
        for (g, nbar) in [(1.5, 0.0), (1.5, 0.5), (2.5, 0.3)] {
            let (oracle, cut) = two_mode_amplify_auto(&rho, nbar, g).unwrap();
            let chan = linear_amp_channel(&rho, g, nbar, cut.signal).unwrap();
            assert!(trace_distance(&oracle, &chan) < 1e-8);
        }
    }

    #[test]
    fn small_cutoffs_are_rejected() {
        let cut = OracleCutoffs { signal: 10, ancilla: 10, eps_trunc: EPS_TRUNC };
        let err = two_mode_amplify(&DensityOperator::vacuum(0), 0.0, 3.0, &cut).unwrap_err();
        assert!(matches!(err, Error::CutoffInsufficient { .. }));
    }
}

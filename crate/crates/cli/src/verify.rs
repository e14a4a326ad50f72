//! Self-checks behind `mu2amp verify`: the channel against the two-mode
//! reference amplifier, plus invariants of the design and metric code.

use std::time::Instant;

use mu2amp::channels::{
    default_output_cutoff, design_stages, immaculate_apply, linear_amp_channel, mu2_amplify,
    AmplifierSpec, PipelineCutoffs,
};
use mu2amp::fock::{
    antinormal_moment, coherent_cutoff, coherent_state, normal_moment, trace_distance,
    trace_distance_bound, DensityOperator, FockVector, EPS_TRUNC,
};
use mu2amp::metrics;
use mu2amp::oracle::{OracleCutoffs, SqueezePropagator};
use mu2amp::quasiprob::{q_rescale, GridSpec, QFunction, QGrid, StateQ};
use mu2amp::Complex64;
use nalgebra::DMatrix;

use crate::report::{Cell, Table};
use crate::CliError;

pub const ORACLE_TOL: f64 = 1e-8;
pub const VARIANCE_TOL: f64 = 1e-7;
/// Above this dimension the oracle comparison uses the entrywise bound
/// instead of a full eigendecomposition.
const DENSE_TRACE_DIM: usize = 400;
/// Tail left above the output cutoff in the variance check, small enough that
/// the missing `⟨n⟩` contribution stays below the tolerance.
const VARIANCE_EPS: f64 = 1e-14;

pub const QUICK_GAINS: [f64; 3] = [1.0, 1.5, 2.5];
pub const HIGH_GAIN: f64 = 6.403;
pub const NBARS: [f64; 2] = [0.0, 0.5];

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Add the high-gain oracle cases.
    pub full: bool,
    /// Weight of vacuum mixed into every channel output.
    pub fault: f64,
    /// Forced signal, ancilla and channel output cutoff.
    pub cutoff: Option<usize>,
}

/// A named test input for the amplifier.
pub struct OracleInput {
    pub name: &'static str,
    pub rho: DensityOperator,
}

/// Vacuum, `|0.3⟩` and the first-stage outputs of the perfect amplifier
/// (`μ² = ½`, `G = 9`) for `N = 1` at `|α| = 0.407` and `N = 2` at `|α| = 0.7`.
pub fn oracle_inputs() -> Result<Vec<OracleInput>, CliError> {
    let g1 = design_stages(&AmplifierSpec::new(0.5, 9.0, 1))?.g1;
    let coh = Complex64::new(0.3, 0.0);
    let k1 = immaculate_apply(Complex64::new(0.407, 0.0), g1, 1, 3)?.0;
    let k2 = immaculate_apply(Complex64::new(0.7, 0.0), g1, 2, 4)?.0;
    Ok(vec![
        OracleInput { name: "vacuum", rho: FockVector::vacuum(0).to_density() },
        OracleInput {
            name: "coherent_0.3",
            rho: coherent_state(coh, coherent_cutoff(coh, 1e-14)).normalized()?.to_density(),
        },
        OracleInput { name: "kstate_n1", rho: k1.to_density() },
        OracleInput { name: "kstate_n2", rho: k2.to_density() },
    ])
}

/// `(1 − w) ρ + w |0⟩⟨0|`.
pub fn mix_vacuum(rho: DensityOperator, w: f64) -> Result<DensityOperator, CliError> {
    if w == 0.0 {
        return Ok(rho);
    }
    let mut m: DMatrix<Complex64> = rho.into_matrix() * Complex64::new(1.0 - w, 0.0);
    m[(0, 0)] += w;
    Ok(DensityOperator::new(m)?)
}

/// One row of the oracle comparison.
pub struct OracleCase {
    pub gain: f64,
    pub nbar: f64,
    pub input: &'static str,
    pub distance: f64,
    /// Whether `distance` is the entrywise upper bound rather than the exact
    /// trace distance.
    pub bounded: bool,
}

/// Compares the channel with the reference amplifier for every input at one
/// `(g, n̄)`, sharing the propagated columns between inputs. `inspect` sees
/// each reference output.
pub fn oracle_cases(
    inputs: &[OracleInput],
    gain: f64,
    nbar: f64,
    fault: f64,
    forced_cutoff: Option<usize>,
    inspect: &mut dyn FnMut(&OracleInput, &DensityOperator),
) -> Result<Vec<OracleCase>, CliError> {
    let cutoffs = match forced_cutoff {
        Some(c) => {
            // The signal box must still hold the inputs themselves.
            let widest = inputs.iter().map(|i| i.rho.cutoff()).max().unwrap_or(0);
            OracleCutoffs { signal: c.max(widest), ancilla: c, eps_trunc: EPS_TRUNC }
        }
        None => inputs
            .iter()
            .map(|i| OracleCutoffs::suggested(&i.rho, gain, nbar))
            .reduce(|a, b| OracleCutoffs {
                signal: a.signal.max(b.signal),
                ancilla: a.ancilla.max(b.ancilla),
                eps_trunc: a.eps_trunc,
            })
            .expect("at least one input"),
    };
    let mut prop = SqueezePropagator::new(gain, cutoffs)?;
    let mut cases = Vec::with_capacity(inputs.len());
    for input in inputs {
        let reference = loop {
            match prop.apply(&input.rho, nbar) {
                Ok(out) => break out,
                // A forced cutoff is reported rather than enlarged.
                Err(mu2amp::Error::CutoffInsufficient { .. })
                    if forced_cutoff.is_none() && prop.cutoffs().ancilla < 64 * cutoffs.ancilla =>
                {
                    let wider = prop.cutoffs().grown(1.5);
                    log::debug!("oracle cutoffs too small, retrying with {wider:?}");
                    prop = SqueezePropagator::new(gain, wider)?;
                }
                Err(e) => return Err(e.into()),
            }
        };
        inspect(input, &reference);
        let channel = linear_amp_channel(&input.rho, gain, nbar, reference.cutoff())?;
        let channel = mix_vacuum(channel, fault)?;
        let bounded = reference.dim() > DENSE_TRACE_DIM;
        let distance = if bounded {
            trace_distance_bound(&reference, &channel)
        } else {
            trace_distance(&reference, &channel)
        };
        cases.push(OracleCase { gain, nbar, input: input.name, distance, bounded });
    }
    Ok(cases)
}

/// `⟨Δa†Δa⟩` of the channel output for `|0.3⟩`, to compare with
/// `(n̄ + 1)(g² − 1)`.
pub fn coherent_excess_noise(
    gain: f64,
    nbar: f64,
    fault: f64,
    forced_cutoff: Option<usize>,
) -> Result<f64, CliError> {
    let a = Complex64::new(0.3, 0.0);
    let rho = coherent_state(a, coherent_cutoff(a, 1e-16)).normalized()?.to_density();
    let d = forced_cutoff.unwrap_or_else(|| default_output_cutoff(&rho, gain, nbar, VARIANCE_EPS));
    let out = mix_vacuum(linear_amp_channel(&rho, gain, nbar, d)?, fault)?;
    let mean = normal_moment(&out, 0, 1)?;
    Ok(normal_moment(&out, 1, 1)?.re - mean.norm_sqr())
}

struct Report {
    table: Table,
    failed: bool,
}

impl Report {
    fn check(&mut self, name: String, value: f64, tolerance: f64) {
        let pass = value <= tolerance;
        self.failed |= !pass;
        log::info!("{name}: {value:e} (tolerance {tolerance:e})");
        self.table.push(vec![
            Cell::Text(name),
            value.into(),
            tolerance.into(),
            (tolerance - value).into(),
            Cell::from(if pass { "PASS" } else { "FAIL" }),
        ]);
    }
}

pub fn run(opts: &VerifyOptions, provenance: String) -> Result<(Table, bool), CliError> {
    let mut rep = Report {
        table: Table::new(provenance, &["check", "value", "tolerance", "margin", "status"]),
        failed: false,
    };
    let start = Instant::now();

    // Stage gains multiply to the overall gain.
    let mut worst: f64 = 0.0;
    for k in 0..=20 {
        let mu2 = k as f64 / 20.0;
        for gain in [1.5, 9.0, 100.0] {
            let d = design_stages(&AmplifierSpec::new(mu2, gain, 1))?;
            worst = worst.max((d.g1 * d.g2 - gain).abs() / gain);
        }
    }
    rep.check("design_gain_product".into(), worst, 1e-12);

    // Heralding probability of the explicit operator against the closed form.
    let mut worst: f64 = 0.0;
    for g1 in [1.4056, 2.0, 9.0] {
        for n in 1..=3 {
            for i in 0..=30 {
                let a = 0.1 * i as f64;
                let (_, p) = immaculate_apply(Complex64::new(a, 0.0), g1, n, n + 2)?;
                let exact = metrics::p_success_exact(a, g1, n);
                worst = worst.max((p - exact).abs() / exact.max(f64::MIN_POSITIVE));
            }
        }
    }
    rep.check("p_success_relative".into(), worst, 1e-12);

    // Exact PFP never exceeds its bound.
    let mut worst = f64::NEG_INFINITY;
    for g1 in [1.0, 1.4056, 2.0, 9.0] {
        for n in 1..=3 {
            for i in 0..400 {
                let a = 3.0 * i as f64 / 399.0;
                worst = worst.max(metrics::pfp_exact(a, g1, n) - metrics::pfp_bound(a, g1));
            }
        }
    }
    rep.check("pfp_bound_excess".into(), worst.max(0.0), 1e-12);

    let inputs = oracle_inputs()?;
    let mut gains = QUICK_GAINS.to_vec();
    if opts.full {
        gains.push(HIGH_GAIN);
    }
    for &g in &gains {
        for &nbar in &NBARS {
            for case in oracle_cases(&inputs, g, nbar, opts.fault, opts.cutoff, &mut |_, _| {})? {
                let kind = if case.bounded { "bound" } else { "trace" };
                rep.check(
                    format!("oracle_{kind} g={} nbar={} {}", case.gain, case.nbar, case.input),
                    case.distance,
                    ORACLE_TOL,
                );
            }
            let var = coherent_excess_noise(g, nbar, opts.fault, opts.cutoff)?;
            let expected = (nbar + 1.0) * (g * g - 1.0);
            rep.check(format!("variance_law g={g} nbar={nbar}"), (var - expected).abs(), VARIANCE_TOL);
        }
    }

    // Full cascade against the closed-form fidelity.
    let spec = AmplifierSpec::new(0.5, 9.0, 1);
    let mut worst: f64 = 0.0;
    for a in [0.0, 0.2, 0.407, 0.7] {
        let run = mu2_amplify(Complex64::new(a, 0.0), &spec, &PipelineCutoffs::default())?;
        let f = metrics::fidelity_exact(a, run.design.g1, spec.gain, spec.ncut)?;
        worst = worst.max((run.fidelity - f).abs());
    }
    rep.check("pipeline_fidelity".into(), worst, 1e-8);

    // Q-function of the amplified state two ways, and its moments.
    let rho = inputs[2].rho.clone();
    let g = 1.5;
    let cutoffs = OracleCutoffs::suggested(&rho, g, 0.0);
    let reference = mix_vacuum(SqueezePropagator::new(g, cutoffs)?.apply(&rho, 0.0)?, opts.fault)?;
    let grid = GridSpec::square(3.0, 41)?;
    let direct = QGrid::evaluate(&StateQ::new(&reference)?, grid);
    let rescaled = q_rescale(StateQ::new(&rho)?, g)?;
    let mut worst: f64 = 0.0;
    for i in 0..grid.n_re() {
        for j in 0..grid.n_im() {
            worst = worst.max((direct.values[(i, j)] - rescaled.q(grid.point(i, j))).abs());
        }
    }
    rep.check("q_rescaling_pointwise".into(), worst, 1e-7);

    let wide = QGrid::evaluate(&StateQ::new(&rho)?, GridSpec::square(7.0, 281)?);
    let mut worst: f64 = 0.0;
    for (m, k) in [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)] {
        worst = worst.max((wide.antinormal_moment(m, k) - antinormal_moment(&rho, m, k)?).norm());
    }
    rep.check("q_grid_moments".into(), worst, 1e-6);

    log::info!("verify finished in {:.1} s", start.elapsed().as_secs_f64());
    Ok((rep.table, rep.failed))
}

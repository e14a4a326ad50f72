//! Report builders for each subcommand.

use mu2amp::channels::{self, design_stages, immaculate_apply, AmplifierSpec, StageDesign};
use mu2amp::fock::{coherent_cutoff, coherent_state, DensityOperator};
use mu2amp::metrics::{self, Regime, RegionSummary};
use mu2amp::quasiprob::{self, q_rescale, GridSpec, QGrid, StateQ};
use mu2amp::Complex64;
use rayon::prelude::*;

use crate::args::Command;
use crate::report::{Cell, Table};
use crate::settings::Resolver;
use crate::verify::{self, VerifyOptions};
use crate::CliError;

/// Tail left outside the Fock cutoff of a coherent input.
const COHERENT_TAIL: f64 = 1e-12;

/// A fully resolved command.
pub enum Job {
    Design { spec: AmplifierSpec },
    Table1 { gain: f64, ncut: usize },
    Sweep(SweepParams),
    Contour(ContourParams),
    Qgrid(QgridParams),
    Snr(SnrParams),
    Verify(VerifyOptions),
}

impl Job {
    pub fn run(self, provenance: String) -> Result<(Table, bool), CliError> {
        let table = match self {
            Job::Design { spec } => design(&spec, provenance)?,
            Job::Table1 { gain, ncut } => table1(gain, ncut, provenance),
            Job::Sweep(p) => sweep(&p, provenance)?,
            Job::Contour(p) => contour(&p, provenance),
            Job::Qgrid(p) => qgrid(&p, provenance)?,
            Job::Snr(p) => snr(&p, provenance)?,
            Job::Verify(opts) => return verify::run(&opts, provenance),
        };
        Ok((table, false))
    }
}

pub(crate) fn resolve(cmd: &Command, r: &mut Resolver) -> Result<Job, CliError> {
    Ok(match cmd {
        Command::Design(a) => {
            let mu2 = r.required("mu2", a.mu2)?;
            let gain = r.required("gain", a.gain)?;
            let mut spec = AmplifierSpec::new(mu2, gain, 1);
            if let Some(nbar) = r.optional("nbar", a.nbar)? {
                spec = spec.with_nbar(nbar);
            }
            design_stages(&spec)?;
            Job::Design { spec }
        }
        Command::Table1(a) => {
            let gain = r.get("gain", a.gain, 9.0)?;
            let ncut = r.get("ncut", a.ncut, 2)?;
            design_stages(&AmplifierSpec::new(0.5, gain, ncut))?;
            Job::Table1 { gain, ncut }
        }
        Command::Sweep(a) => {
            let metric: String = r.required("metric", a.metric.clone())?;
            let metric = SweepMetric::parse(&metric)?;
            let spec = spec_flags(r, a.mu2, a.gain, a.ncut)?;
            let (alpha_max, steps) = alpha_axis(r, a.alpha_max, a.steps)?;
            Job::Sweep(SweepParams { metric, spec, alpha_max, steps })
        }
        Command::Contour(a) => {
            let ncut = r.get("ncut", a.ncut, 2)?;
            let mu2 = (
                r.get("mu2-min", a.mu2_min, 0.0)?,
                r.get("mu2-max", a.mu2_max, 1.0)?,
                r.get("mu2-steps", a.mu2_steps, 101)?,
            );
            let gain2 = (
                r.get("gain2-min", a.gain2_min, 1.0)?,
                r.get("gain2-max", a.gain2_max, 100.0)?,
                r.get("gain2-steps", a.gain2_steps, 100)?,
            );
            let log = r.get("log", a.log, false)?;
            let params = ContourParams { ncut, mu2, gain2, log };
            params.validate()?;
            Job::Contour(params)
        }
        Command::Qgrid(a) => {
            let spec = spec_flags(r, a.mu2, a.gain, a.ncut)?;
            let alpha = Complex64::new(r.get("alpha", a.alpha, 0.0)?, r.get("alpha-im", a.alpha_im, 0.0)?);
            let grid_text = r.get("grid", a.grid.clone(), "-3,3,-3,3,201,201".to_owned())?;
            let grid = parse_grid(&grid_text)?;
            Job::Qgrid(QgridParams { spec, alpha, grid })
        }
        Command::Snr(a) => {
            let mode: String = r.get("mode", a.mode.clone(), "quadrature".to_owned())?;
            let number = match mode.as_str() {
                "quadrature" => false,
                "number" => true,
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown --mode '{other}' (expected quadrature or number)"
                    )))
                }
            };
            let spec = spec_flags(r, a.mu2, a.gain, a.ncut)?;
            let (alpha_max, steps) = alpha_axis(r, a.alpha_max, a.steps)?;
            Job::Snr(SnrParams { number, spec, alpha_max, steps })
        }
        Command::Verify(a) => {
            let full = r.get("full", a.full, false)? && !a.quick;
            let fault = r.get("inject-fault", a.inject_fault, 0.0)?;
            if !(0.0..=1.0).contains(&fault) {
                return Err(CliError::Usage(format!("--inject-fault {fault} must be in [0, 1]")));
            }
            let cutoff = r.optional("cutoff", a.cutoff)?;
            Job::Verify(VerifyOptions { full, fault, cutoff })
        }
    })
}

fn spec_flags(
    r: &mut Resolver,
    mu2: Option<f64>,
    gain: Option<f64>,
    ncut: Option<usize>,
) -> Result<AmplifierSpec, CliError> {
    let spec = AmplifierSpec::new(r.required("mu2", mu2)?, r.required("gain", gain)?, r.get("ncut", ncut, 1)?);
    design_stages(&spec)?;
    Ok(spec)
}

fn alpha_axis(
    r: &mut Resolver,
    alpha_max: Option<f64>,
    steps: Option<usize>,
) -> Result<(f64, usize), CliError> {
    let alpha_max = r.get("alpha-max", alpha_max, 2.0)?;
    let steps = r.get("steps", steps, 201)?;
    if !(alpha_max > 0.0) || !alpha_max.is_finite() {
        return Err(CliError::Usage(format!("--alpha-max {alpha_max} must be positive")));
    }
    if steps < 2 {
        return Err(CliError::Usage("--steps must be at least 2".into()));
    }
    Ok((alpha_max, steps))
}

/// `steps` points from `lo` to `hi`, both ends exact.
fn axis(lo: f64, hi: f64, steps: usize, log: bool) -> Vec<f64> {
    (0..steps)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == steps - 1 {
                hi
            } else {
                let t = i as f64 / (steps - 1) as f64;
                if log {
                    10f64.powf(lo.log10() + t * (hi.log10() - lo.log10()))
                } else {
                    lo + t * (hi - lo)
                }
            }
        })
        .collect()
}

fn parse_grid(text: &str) -> Result<GridSpec, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || CliError::Usage(format!("--grid '{text}': expected re_min,re_max,im_min,im_max,n_re,n_im"));
    if parts.len() != 6 {
        return Err(bad());
    }
    let f = |s: &str| s.parse::<f64>().map_err(|_| bad());
    let n = |s: &str| s.parse::<usize>().map_err(|_| bad());
    Ok(GridSpec::new(
        (f(parts[0])?, f(parts[1])?),
        (f(parts[2])?, f(parts[3])?),
        n(parts[4])?,
        n(parts[5])?,
    )?)
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::ImmaculateDominant => "immaculate-dominant",
        Regime::IdealDominant => "ideal-dominant",
        Regime::Boundary => "boundary",
    }
}

/// Operating-region radius, or `-` when the amplifier is deterministic.
fn radius_cell(design: &StageDesign, ncut: usize) -> Cell {
    if design.is_deterministic() {
        Cell::from("-")
    } else {
        Cell::Num((ncut as f64).sqrt() / design.g1)
    }
}

pub fn design(spec: &AmplifierSpec, provenance: String) -> Result<Table, CliError> {
    let d = design_stages(spec)?;
    let mut t = Table::new(
        provenance,
        &["mu2", "gain", "nbar", "g1", "g2", "alpha_tilde_n1", "alpha_tilde_n2", "regime"],
    );
    t.push(vec![
        spec.mu2.into(),
        spec.gain.into(),
        spec.nbar.into(),
        d.g1.into(),
        d.g2.into(),
        radius_cell(&d, 1),
        radius_cell(&d, 2),
        regime_name(metrics::regime_classify(spec.mu2, spec.gain)).into(),
    ]);
    Ok(t)
}

pub fn table1(gain: f64, ncut: usize, provenance: String) -> Table {
    let mut t = Table::new(
        provenance,
        &["quantity", "immaculate", "perfect", "perfect_limit", "ideal", "ideal_limit"],
    );
    let cols = [
        RegionSummary::evaluate(0.0, gain, ncut),
        RegionSummary::evaluate(0.5, gain, ncut),
        RegionSummary::high_gain_limit(0.5, gain, ncut).expect("μ² > 0"),
        RegionSummary::evaluate(1.0, gain, ncut),
        RegionSummary::high_gain_limit(1.0, gain, ncut).expect("μ² > 0"),
    ];
    let rows: [(&str, fn(&RegionSummary) -> f64); 7] = [
        ("g1_sq", |s| s.g1_sq),
        ("g2_sq", |s| s.g2_sq),
        ("fidelity", |s| s.fidelity),
        ("p_success", |s| s.p_success),
        ("pfp", |s| s.pfp),
        ("nf_antinormal", |s| s.nf_antinormal),
        ("nf_symmetric", |s| s.nf_symmetric),
    ];
    for (name, get) in rows {
        let mut row = vec![Cell::from(name)];
        row.extend(cols.iter().map(|s| Cell::Num(get(s))));
        t.push(row);
    }
    t.marker("gain", gain);
    t.marker("ncut", ncut as f64);
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMetric {
    /// Region approximation, independent of α.
    Pfp,
    PfpExact,
    Fidelity,
    PSuccess,
    PfpBound,
}

impl SweepMetric {
    fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "pfp" => Self::Pfp,
            "pfp-exact" => Self::PfpExact,
            "fidelity" => Self::Fidelity,
            "psuccess" => Self::PSuccess,
            "pfp-bound" => Self::PfpBound,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown --metric '{other}' (expected pfp, pfp-exact, fidelity, psuccess or pfp-bound)"
                )))
            }
        })
    }

    fn column(self) -> &'static str {
        match self {
            Self::Pfp => "pfp",
            Self::PfpExact => "pfp_exact",
            Self::Fidelity => "fidelity",
            Self::PSuccess => "p_success",
            Self::PfpBound => "pfp_bound",
        }
    }
}

pub struct SweepParams {
    pub metric: SweepMetric,
    pub spec: AmplifierSpec,
    pub alpha_max: f64,
    pub steps: usize,
}

fn sweep_value(metric: SweepMetric, spec: &AmplifierSpec, d: &StageDesign, alpha: f64) -> Result<f64, CliError> {
    let missing = || CliError::Numerical(mu2amp::Error::Numerical("no closed form for this design".into()));
    Ok(match metric {
        SweepMetric::Pfp if !d.is_deterministic() => metrics::pfp_region(spec.mu2, spec.gain, spec.ncut),
        SweepMetric::PfpBound if d.is_deterministic() => 1.0,
        SweepMetric::PfpBound => metrics::pfp_bound(alpha, d.g1),
        SweepMetric::PSuccess => channels::closed_form(spec, alpha)?.p_success,
        SweepMetric::Fidelity => channels::closed_form(spec, alpha)?.fidelity.ok_or_else(missing)?,
        SweepMetric::Pfp | SweepMetric::PfpExact => {
            channels::closed_form(spec, alpha)?.pfp.ok_or_else(missing)?
        }
    })
}

pub fn sweep(p: &SweepParams, provenance: String) -> Result<Table, CliError> {
    let d = design_stages(&p.spec)?;
    let alphas = axis(0.0, p.alpha_max, p.steps, false);
    let values: Vec<f64> = alphas
        .par_iter()
        .map(|&a| sweep_value(p.metric, &p.spec, &d, a))
        .collect::<Result<_, _>>()?;
    let bump = if p.spec.ncut == 1 && !d.is_deterministic() {
        Cell::Num(metrics::bump_report(d.g1)?.alpha_bump)
    } else {
        Cell::from("-")
    };
    let radius = radius_cell(&d, p.spec.ncut);
    let mut t = Table::new(provenance, &["alpha", p.metric.column(), "alpha_tilde", "alpha_bump"]);
    for (a, v) in alphas.iter().zip(values) {
        t.push(vec![(*a).into(), v.into(), radius.clone(), bump.clone()]);
    }
    Ok(t)
}

pub struct ContourParams {
    pub ncut: usize,
    pub mu2: (f64, f64, usize),
    pub gain2: (f64, f64, usize),
    pub log: bool,
}

impl ContourParams {
    fn validate(&self) -> Result<(), CliError> {
        let (m_lo, m_hi, m_n) = self.mu2;
        let (g_lo, g_hi, g_n) = self.gain2;
        let fail = |msg: String| Err(CliError::Usage(msg));
        if self.ncut < 1 {
            return fail("--ncut must be at least 1".into());
        }
        if !(0.0 <= m_lo && m_lo < m_hi && m_hi <= 1.0) {
            return fail(format!("need 0 <= --mu2-min < --mu2-max <= 1, got {m_lo}, {m_hi}"));
        }
        if !(1.0 <= g_lo && g_lo < g_hi && g_hi.is_finite()) {
            return fail(format!("need 1 <= --gain2-min < --gain2-max, got {g_lo}, {g_hi}"));
        }
        if m_n < 2 || g_n < 2 {
            return fail("--mu2-steps and --gain2-steps must be at least 2".into());
        }
        if self.log && m_lo <= 0.0 {
            return fail("--log needs --mu2-min > 0".into());
        }
        Ok(())
    }
}

pub fn contour(p: &ContourParams, provenance: String) -> Table {
    let mu2s = axis(p.mu2.0, p.mu2.1, p.mu2.2, p.log);
    let gain2s = axis(p.gain2.0, p.gain2.1, p.gain2.2, p.log);
    let points: Vec<(f64, f64)> = mu2s
        .iter()
        .flat_map(|&m| gain2s.iter().map(move |&g| (m, g)))
        .collect();
    let values: Vec<f64> = points
        .par_iter()
        .map(|&(m, g2)| metrics::pfp_region(m, g2.sqrt(), p.ncut))
        .collect();
    let mut t = Table::new(provenance, &["mu2", "gain2", "pfp", "mu2_gain2", "regime"]);
    for (&(m, g2), v) in points.iter().zip(values) {
        let regime = regime_name(metrics::regime_classify(m, g2.sqrt()));
        t.push(vec![m.into(), g2.into(), v.into(), (m * g2).into(), regime.into()]);
    }
    t
}

/// First-stage output for a coherent input and its heralding probability.
pub fn first_stage(spec: &AmplifierSpec, alpha: Complex64) -> Result<(DensityOperator, f64), CliError> {
    let d = design_stages(spec)?;
    if d.is_deterministic() {
        let state = coherent_state(alpha, coherent_cutoff(alpha, COHERENT_TAIL)).normalized()?;
        Ok((state.to_density(), 1.0))
    } else {
        let (state, p) = immaculate_apply(alpha, d.g1, spec.ncut, spec.ncut + 2)?;
        Ok((state.to_density(), p))
    }
}

pub struct QgridParams {
    pub spec: AmplifierSpec,
    pub alpha: Complex64,
    pub grid: GridSpec,
}

pub fn qgrid(p: &QgridParams, provenance: String) -> Result<Table, CliError> {
    let d = design_stages(&p.spec)?;
    let (rho1, p_success) = first_stage(&p.spec, p.alpha)?;
    let qg = if p.spec.nbar == 0.0 {
        QGrid::evaluate(&q_rescale(StateQ::new(&rho1)?, d.g2)?, p.grid)
    } else {
        let run = channels::mu2_amplify(p.alpha, &p.spec, &Default::default())?;
        QGrid::evaluate(&StateQ::new(&run.rho_out)?, p.grid)
    };
    let target = p.alpha * p.spec.gain;
    let mut t = Table::new(provenance, &["re", "im", "q"]);
    t.marker("target_re", target.re);
    t.marker("target_im", target.im);
    t.marker("p_success", p_success);
    t.marker("integral", qg.integral());
    for i_re in 0..p.grid.n_re() {
        for i_im in 0..p.grid.n_im() {
            let beta = p.grid.point(i_re, i_im);
            t.push(vec![beta.re.into(), beta.im.into(), qg.values[(i_re, i_im)].into()]);
        }
    }
    Ok(t)
}

pub struct SnrParams {
    pub number: bool,
    pub spec: AmplifierSpec,
    pub alpha_max: f64,
    pub steps: usize,
}

pub fn snr(p: &SnrParams, provenance: String) -> Result<Table, CliError> {
    let d = design_stages(&p.spec)?;
    let alphas = axis(0.0, p.alpha_max, p.steps, false);
    let rows: Vec<Vec<f64>> = alphas
        .par_iter()
        .map(|&a| -> Result<Vec<f64>, CliError> {
            let (rho1, prob) = first_stage(&p.spec, Complex64::new(a, 0.0))?;
            Ok(if p.number {
                let (s, weighted) = quasiprob::snr_number(&rho1, d.g2, p.spec.nbar, prob)?;
                vec![a, s, weighted, a]
            } else {
                let s = quasiprob::snr_quadratures_antinormal(&rho1, d.g2, p.spec.nbar, a, prob)?;
                vec![a, s.snr_x1, s.snr_x2, s.sqrtp_snr_x1, s.sqrtp_snr_x2, s.snr_in]
            })
        })
        .collect::<Result<_, _>>()?;
    let columns: &[&str] = if p.number {
        &["alpha", "snr_n", "sqrtp_snr_n", "snr_in"]
    } else {
        &["alpha", "snr_x1", "snr_x2", "sqrtp_snr_x1", "sqrtp_snr_x2", "snr_in"]
    };
    let mut t = Table::new(provenance, columns);
    if p.number {
        // Input amplitudes where the weighted output SNR beats |α|.
        let above: Vec<f64> = rows.iter().filter(|r| r[2] > r[3]).map(|r| r[0]).collect();
        if let (Some(lo), Some(hi)) = (above.first(), above.last()) {
            t.marker("window_lo", *lo);
            t.marker("window_hi", *hi);
        }
    } else {
        let excess = rows.iter().map(|r| r[3] - r[5]).fold(f64::NEG_INFINITY, f64::max);
        t.marker("max_weighted_excess_x1", excess);
    }
    for r in rows {
        t.push(r.into_iter().map(Cell::Num).collect());
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_endpoints_are_exact() {
        let a = axis(1e-6, 1.0, 13, true);
        assert_eq!(a[0], 1e-6);
        assert_eq!(a[12], 1.0);
        assert!((a[6] / 1e-3 - 1.0).abs() < 1e-12);
        let b = axis(0.0, 2.0, 5, false);
        assert_eq!(b, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn grid_flag() {
        let g = parse_grid("-3, 3, -2, 2, 11, 5").unwrap();
        assert_eq!((g.n_re(), g.n_im()), (11, 5));
        assert!(matches!(parse_grid("1,2,3"), Err(CliError::Usage(_))));
        assert!(matches!(parse_grid("3,-3,-3,3,11,11"), Err(CliError::Usage(_))));
    }
}

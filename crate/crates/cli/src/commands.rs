use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use tohm_core::field_io::{load_field, write_field};
use tohm_core::rft::{density_matrix, global_pvalue, load_lkc, solve_lkc, write_lkc, DensityFamily};
use tohm_core::scalar::format_shortest;
use tohm_core::{clique_counts, Lattice};
use tohm_sim::bumphunt::{
    bump_hunt, default_kernel_length, load_events, simulate_events, BumpModel, Calibration, PipelineConfig, Region,
};
use tohm_sim::rng::sub_seed;
use tohm_sim::validation::write_validation_tsv;
use tohm_sim::{estimate_expected_ec, validation_curve, GrfSampler, SquaredExponential, Transform, ValidationConfig};

use crate::config::{AxisSpec, GridSpec, RegionSpec, RunConfig};
use crate::error::{input, CliError, CliResult, Context};
use crate::report::{ec_report, lkc_summary, pvalue_report};

/// Event-simulation stream of the master seed, apart from the calibration
/// stream used by the pipeline.
const INJECT_TAG: u64 = 2;

/// Resolved global settings: config values overridden by flags.
pub struct Run {
    pub cfg: RunConfig,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

/// Runs `body` against the output file when one is given and returns an
/// empty string; otherwise returns what `body` wrote, for stdout.
fn emit(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> CliResult<()>) -> CliResult<String> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| input(format!("cannot create {}: {e}", p.display())))?;
            let mut out = BufWriter::new(file);
            body(&mut out)?;
            out.flush().map_err(|e| CliError::Failure(format!("writing {}: {e}", p.display())))?;
            Ok(String::new())
        }
        None => {
            let mut buf = Vec::new();
            body(&mut buf)?;
            String::from_utf8(buf).map_err(|e| CliError::Failure(format!("non-UTF-8 output: {e}")))
        }
    }
}

fn put(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Failure(format!("write failed: {e}")))
}

fn require<T>(v: Option<T>, what: &str) -> CliResult<T> {
    v.ok_or_else(|| input(format!("missing {what}")))
}

fn parse_family(s: Option<&String>) -> CliResult<DensityFamily> {
    require(s, "family")?.parse().context("family")
}

fn check_thresholds(family: DensityFamily, cs: &[f64]) -> CliResult<()> {
    if cs.is_empty() {
        return Err(input("at least one calibration threshold is needed"));
    }
    if cs.len() > family.max_dim() {
        return Err(input(format!(
            "{} thresholds given but {family} EC densities stop at dimension {}",
            cs.len(),
            family.max_dim()
        )));
    }
    for (k, c) in cs.iter().enumerate() {
        if !c.is_finite() {
            return Err(input(format!("threshold {c} is not finite")));
        }
        if cs[..k].contains(c) {
            return Err(input(format!("duplicate threshold {c}")));
        }
    }
    density_matrix(family, cs).context("calibration thresholds")?;
    Ok(())
}

fn check_finite(v: f64, what: &str) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(input(format!("{what} must be finite, got {v}")))
    }
}

fn region(spec: RegionSpec) -> Region {
    match spec {
        RegionSpec::Rectangle { x0, x1, y0, y1 } => Region::Rectangle { x0, x1, y0, y1 },
        RegionSpec::Disc { cx, cy, radius } => Region::Disc { cx, cy, radius },
    }
}

fn axis(a: &AxisSpec) -> CliResult<Vec<f64>> {
    if a.n == 0 || !a.start.is_finite() || !a.stop.is_finite() || (a.n > 1 && a.start >= a.stop) {
        return Err(input(format!("bad axis {{ start = {}, stop = {}, n = {} }}", a.start, a.stop, a.n)));
    }
    Ok(Lattice::linspace(a.start, a.stop, a.n))
}

fn lattice(run: &Run) -> CliResult<Arc<Lattice>> {
    let spec = require(run.cfg.lattice.as_ref(), "[lattice] section")?;
    let lattice = match (&spec.axes, spec.region) {
        (Some(axes), None) => {
            if spec.spacing.is_some() {
                return Err(input("[lattice] spacing only applies to a region"));
            }
            Lattice::full(axes.iter().map(axis).collect::<CliResult<_>>()?).context("lattice")?
        }
        (None, Some(r)) => {
            let spacing = require(spec.spacing, "[lattice] spacing")?;
            region(r).lattice(spacing).context("lattice")?
        }
        _ => return Err(input("[lattice] needs exactly one of axes or region")),
    };
    Ok(Arc::new(lattice))
}

fn kernel(run: &Run, dims: usize) -> CliResult<SquaredExponential> {
    let spec = require(run.cfg.kernel.as_ref(), "[kernel] section")?;
    let k = match (spec.length_scale, &spec.length_scales) {
        (Some(ell), None) => SquaredExponential::isotropic(ell, dims),
        (None, Some(ls)) => SquaredExponential::new(ls.clone()),
        _ => return Err(input("[kernel] needs exactly one of length_scale or length_scales")),
    }
    .context("kernel")?;
    if k.dims() != dims {
        return Err(input(format!("kernel has {} length-scales for a {dims}-D lattice", k.dims())));
    }
    Ok(k)
}

fn transform_for(family: DensityFamily) -> CliResult<Transform> {
    match family {
        DensityFamily::Gaussian => Ok(Transform::Identity),
        DensityFamily::ChiBar01 => Ok(Transform::ChiBar),
        other => Err(input(format!("no field simulator for the {other} family; use gaussian or chibar01"))),
    }
}

fn parse_transform(s: Option<&str>) -> CliResult<Transform> {
    match s.unwrap_or("identity") {
        "identity" | "gaussian" => Ok(Transform::Identity),
        "chibar" | "chibar01" => Ok(Transform::ChiBar),
        other => Err(input(format!("unknown transform {other:?}; expected identity or chibar"))),
    }
}

pub fn ec(run: &Run, field: Option<PathBuf>, threshold: Option<f64>) -> CliResult<String> {
    let section = run.cfg.ec.as_ref();
    let path = require(field.or_else(|| section.and_then(|s| s.field.clone())), "field file")?;
    let c = check_finite(require(threshold.or(section.and_then(|s| s.threshold)), "threshold")?, "threshold")?;
    let field = load_field::<f64>(&path).context(format!("reading {}", path.display()))?;
    let counts = clique_counts(&field, c);
    emit(run.output.as_deref(), |out| put(out, &ec_report(c, &counts)))
}

pub fn calibrate(run: &Run) -> CliResult<String> {
    let section = require(run.cfg.calibrate.as_ref(), "[calibrate] section")?;
    let family = parse_family(section.family.as_ref())?;
    let transform = transform_for(family)?;
    let thresholds = require(section.thresholds.clone(), "[calibrate] thresholds")?;
    check_thresholds(family, &thresholds)?;
    let n_reps = section.n_reps.unwrap_or(100);
    if n_reps < 2 {
        return Err(input(format!("n_reps must be at least 2, got {n_reps}")));
    }
    let l0 = check_finite(section.l0.unwrap_or(1.0), "l0")?;
    let lattice = lattice(run)?;
    let kernel = kernel(run, lattice.dims())?;
    let sampler = GrfSampler::new(lattice, kernel).context("factorizing the covariance")?;

    let cal = estimate_expected_ec(&sampler, transform, &thresholds, n_reps, run.seed).context("calibration")?;
    let sol = solve_lkc(family, l0, &cal.observations()).context("solving for the LKCs")?;
    let summary = lkc_summary(&sol);
    let record = emit(run.output.as_deref(), |out| write_lkc(&sol, out).context("writing the LKC record"))?;
    if run.output.is_some() {
        Ok(summary)
    } else {
        eprint!("{summary}");
        Ok(record)
    }
}

pub fn pvalue(run: &Run, lkc: Option<PathBuf>, c: Option<f64>) -> CliResult<String> {
    let section = run.cfg.pvalue.as_ref();
    let path = require(lkc.or_else(|| section.and_then(|s| s.lkc.clone())), "LKC record")?;
    let c = check_finite(require(c.or(section.and_then(|s| s.c)), "statistic c")?, "c")?;
    let sol = load_lkc::<f64>(&path).context(format!("reading {}", path.display()))?;
    let report = global_pvalue(c, &sol).context("p-value")?;
    emit(run.output.as_deref(), |out| put(out, &pvalue_report(&report)))
}

fn grid(spec: &GridSpec) -> CliResult<Vec<f64>> {
    let g = match spec {
        GridSpec::List(v) => v.clone(),
        GridSpec::Range(a) => axis(a)?,
    };
    if g.is_empty() || g.iter().any(|c| !c.is_finite()) {
        return Err(input("validation grid must be non-empty and finite"));
    }
    Ok(g)
}

pub fn validate(run: &Run) -> CliResult<String> {
    let section = require(run.cfg.validate.as_ref(), "[validate] section")?;
    let family = parse_family(section.family.as_ref())?;
    let transform = transform_for(family)?;
    let calib_thresholds = require(section.thresholds.clone(), "[validate] thresholds")?;
    check_thresholds(family, &calib_thresholds)?;
    let grid = grid(require(section.grid.as_ref(), "[validate] grid")?)?;
    let n_calib = section.n_calib.unwrap_or(1000);
    let n_tail = section.n_tail.unwrap_or(10_000);
    if n_calib < 2 || n_tail < 100 {
        return Err(input(format!("need n_calib ≥ 2 and n_tail ≥ 100, got {n_calib} and {n_tail}")));
    }
    let l0 = check_finite(section.l0.unwrap_or(1.0), "l0")?;
    let lattice = lattice(run)?;
    let kernel = kernel(run, lattice.dims())?;
    let sampler = GrfSampler::new(lattice, kernel).context("factorizing the covariance")?;

    let cfg = ValidationConfig { grid, calib_thresholds, n_calib, n_tail, l0, family, seed: run.seed };
    let curve = validation_curve(&sampler, transform, &cfg).context("validation run")?;
    let summary = lkc_summary(&curve.lkc);
    let table = emit(run.output.as_deref(), |out| write_validation_tsv(&curve.rows, out).context("writing the validation table"))?;
    if run.output.is_some() {
        Ok(summary)
    } else {
        eprint!("{summary}");
        Ok(table)
    }
}

pub fn bumphunt(run: &Run, events: Option<PathBuf>) -> CliResult<String> {
    let section = require(run.cfg.bumphunt.as_ref(), "[bumphunt] section")?;
    let region = region(require(section.region, "[bumphunt] region")?);
    region.validate().context("region")?;
    let nu = require(section.nu, "[bumphunt] nu")?;
    if !(nu.is_finite() && nu > 0.0) {
        return Err(input(format!("nu must be positive, got {nu}")));
    }
    let calibration = match section.calibration.as_deref().unwrap_or("kernel") {
        "kernel" => {
            let ell = section.kernel_length.unwrap_or_else(|| default_kernel_length(nu));
            Calibration::Kernel(SquaredExponential::isotropic(ell, 2).context("kernel")?)
        }
        "exact" => {
            if section.kernel_length.is_some() {
                return Err(input("kernel_length has no effect with exact calibration"));
            }
            Calibration::Exact
        }
        other => return Err(input(format!("unknown calibration {other:?}; expected kernel or exact"))),
    };
    let thresholds = section.thresholds.clone().unwrap_or_else(|| vec![1.0, 8.0]);
    check_thresholds(DensityFamily::ChiBar01, &thresholds)?;
    let n_reps = section.n_reps.unwrap_or(100);
    if n_reps < 2 {
        return Err(input(format!("n_reps must be at least 2, got {n_reps}")));
    }
    let l0 = check_finite(section.l0.unwrap_or(1.0), "l0")?;
    let lattice = Arc::new(region.lattice(section.spacing.unwrap_or(1.0)).context("search grid")?);

    let events = match (events.or_else(|| section.events.clone()), &section.inject) {
        (Some(path), _) => load_events(&path).context(format!("reading {}", path.display()))?,
        (None, Some(inj)) => {
            let model = BumpModel { region, nu, eta: inj.eta, theta: inj.theta };
            simulate_events(&model, inj.n_events, sub_seed(run.seed, INJECT_TAG)).context("simulating events")?
        }
        (None, None) => return Err(input("no event file and no [bumphunt.inject] section")),
    };

    let cfg = PipelineConfig { region, nu, calibration, thresholds, n_reps, l0, seed: run.seed };
    let res = bump_hunt(&events, lattice, &cfg).context("bump hunt")?;
    let mut text = pvalue_report(&res.report);
    text.push_str(&format!(
        "events = {}\nmax W = {}\npeak = ({}, {})\neta_hat = {}\n",
        events.len(),
        format_shortest(res.max_w),
        format_shortest(res.peak[0]),
        format_shortest(res.peak[1]),
        format_shortest(res.eta_hat),
    ));
    text.push_str(&lkc_summary(&res.report.lkc));
    if let Some(path) = run.output.as_deref() {
        emit(Some(path), |out| write_field(&res.lrt.field, out).context("writing the LRT field"))?;
    }
    Ok(text)
}

pub fn simulate_field(run: &Run, replicate: Option<usize>) -> CliResult<String> {
    let section = run.cfg.simulate_field.as_ref();
    let replicate = replicate.or(section.and_then(|s| s.replicate)).unwrap_or(0);
    let transform = parse_transform(section.and_then(|s| s.transform.as_deref()))?;
    let lattice = lattice(run)?;
    let kernel = kernel(run, lattice.dims())?;
    let sampler = GrfSampler::new(lattice, kernel).context("factorizing the covariance")?;
    let field = sampler.sample(run.seed, replicate).map(|z| transform.apply(z)).context("transform")?;
    emit(run.output.as_deref(), |out| write_field(&field, out).context("writing the field"))
}

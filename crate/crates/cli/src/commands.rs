use std::f64::consts::PI;
use std::fs;
use std::io::Write;

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use vnw_core::asymptotics::default_window_start;
use vnw_core::model::{self, node_distance};
use vnw_core::ode::{default_path, verify_eigenfunction_with};
use vnw_core::{
    classify, fit_analytic_envelope, DecayClassification, EnvelopeFit, EnvelopeModel, GridSpec,
    IntegralPath, ModelParams, MomentBound, Quantity, Settings,
};

use crate::format::{self, Csv};
use crate::{Cli, Command, PathArg, PhysicsArgs};

pub const RESIDUAL_THRESHOLD: f64 = 1e-9;
pub const CLOSED_FORM_THRESHOLD: f64 = 1e-8;
pub const NUMEROV_THRESHOLD: f64 = 1e-5;
/// Allowed relative gap between fitted and predicted decay parameters.
pub const FIT_TOLERANCE: f64 = 0.05;
/// Residual and closed-form checks run on this many points.
const CHECK_POINTS: usize = 2000;

#[derive(Debug)]
pub enum Failure {
    /// Bad flags: exit status 2.
    Usage(String),
    /// Computation failed or a check did not pass: exit status 1.
    Numeric(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Numeric(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

fn params(phys: &PhysicsArgs, norm: f64) -> Outcome<ModelParams> {
    ModelParams::with_norm(phys.k, phys.a, phys.beta, norm)
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn check_range(rmax: f64, n: usize) -> Outcome<()> {
    if !(rmax > 0.0 && rmax.is_finite()) {
        return usage(format!("--rmax must be a positive number, got {rmax}"));
    }
    if n == 0 {
        return usage("--n must be at least 1");
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Outcome<()> {
    let digits = cli.output.precision;
    format::check_precision(digits).map_err(|e| Failure::Usage(e.to_string()))?;
    let (text, verdict) = match &cli.command {
        Command::Potential { physics, rmax, n } => (potential(physics, *rmax, *n, digits)?, Ok(())),
        Command::Wavefunction {
            physics,
            norm,
            rmax,
            n,
            path,
        } => (
            wavefunction(physics, *norm, *rmax, *n, *path, digits)?,
            Ok(()),
        ),
        Command::Verify { physics, rmax, h } => {
            let report = verify(physics, *rmax, *h)?;
            let verdict = if report["passed"] == Value::Bool(true) {
                Ok(())
            } else {
                Err(Failure::Numeric(anyhow!(
                    "verification thresholds exceeded"
                )))
            };
            (format::json_text(report, digits)?, verdict)
        }
        Command::Classify {
            physics,
            fit,
            rmax,
            n,
        } => (
            format::json_text(classify_report(physics, *fit, *rmax, *n)?, digits)?,
            Ok(()),
        ),
        Command::Sweep {
            k,
            a_list,
            beta_list,
            rmax,
            n,
            threads,
        } => (
            sweep(*k, a_list, beta_list, *rmax, *n, *threads, digits)?,
            Ok(()),
        ),
    };
    emit(cli, &text)?;
    verdict
}

fn emit(cli: &Cli, text: &str) -> anyhow::Result<()> {
    match &cli.output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn potential(phys: &PhysicsArgs, rmax: f64, n: usize, digits: usize) -> Outcome<String> {
    let p = params(phys, 1.0)?;
    check_range(rmax, n)?;
    let g = GridSpec::new(0.0, rmax, n + 1).map_err(|e| Failure::Usage(e.to_string()))?;
    // V is singular at the origin for beta > 1
    let first = if p.beta <= 1.0 { 0 } else { 1 };
    let mut csv = Csv::new(&["r", "V"]);
    for i in first..=n {
        let r = g.radius(i);
        let v = model::potential(&p, r).with_context(|| format!("potential at r = {r}"))?;
        csv.row([format::number(r, digits), format::number(v, digits)]);
    }
    Ok(csv.finish())
}

fn wavefunction(
    phys: &PhysicsArgs,
    norm: f64,
    rmax: f64,
    n: usize,
    path: Option<PathArg>,
    digits: usize,
) -> Outcome<String> {
    let p = params(phys, norm)?;
    check_range(rmax, n)?;
    let path = match path {
        None => default_path(&p),
        Some(PathArg::Quad) => IntegralPath::Quadrature,
        Some(PathArg::Closed) if default_path(&p) == IntegralPath::ClosedForm => {
            IntegralPath::ClosedForm
        }
        Some(PathArg::Closed) => {
            return usage(format!(
                "--path closed needs beta in [0, 1], got {}",
                p.beta
            ))
        }
    };
    let g = GridSpec::new(0.0, rmax, n + 1).map_err(|e| Failure::Usage(e.to_string()))?;
    let f = model::sample(&p, &g, Quantity::Modulation, path, &Settings::default())
        .context("modulating function")?;
    let mut csv = Csv::new(&["r", "f", "chi"]);
    for (r, f) in g.radii().zip(&f.values) {
        let chi = model::chi0(p.k, r) * f;
        csv.row([
            format::number(r, digits),
            format::number(*f, digits),
            format::number(chi, digits),
        ]);
    }
    Ok(csv.finish())
}

fn verify(phys: &PhysicsArgs, rmax: Option<f64>, h: Option<f64>) -> Outcome<Value> {
    let p = params(phys, 1.0)?;
    let rmax = rmax.unwrap_or(60.0 / p.k);
    let h = h.unwrap_or(1e-3 * 2.0 * PI / p.k);
    if !(h > 0.0 && h.is_finite()) {
        return usage(format!("--h must be a positive number, got {h}"));
    }
    check_range(rmax, 1)?;
    if rmax < 4.0 * h {
        return usage("--rmax must span at least a few steps of --h");
    }
    let settings = Settings::default();

    let g = GridSpec::from_step(rmax, h).map_err(|e| Failure::Usage(e.to_string()))?;
    let shooting = verify_eigenfunction_with(&p, &g, &settings).context("Numerov integration")?;

    let check =
        GridSpec::new(0.0, rmax, CHECK_POINTS + 1).map_err(|e| Failure::Usage(e.to_string()))?;
    let radii: Vec<f64> = check
        .radii()
        .skip(1)
        .filter(|&r| node_distance(p.k, r) >= p.node_guard())
        .collect();
    let residual_max = radii
        .iter()
        .map(|&r| model::residual(&p, r, default_path(&p), &settings))
        .try_fold(0.0_f64, |m, x| x.map(|x| m.max(x)))
        .context("residual")?;
    let closed_vs_quad = if default_path(&p) == IntegralPath::ClosedForm {
        let closed = model::modulation_integral_on(&p, &radii, IntegralPath::ClosedForm, &settings)
            .context("closed-form integral")?;
        let quad = model::modulation_integral_on(&p, &radii, IntegralPath::Quadrature, &settings)
            .context("quadrature integral")?;
        Some(
            closed
                .iter()
                .zip(&quad)
                .map(|(c, q)| (c - q).abs())
                .fold(0.0, f64::max),
        )
    } else {
        None
    };

    let passed = residual_max <= RESIDUAL_THRESHOLD
        && closed_vs_quad.is_none_or(|d| d <= CLOSED_FORM_THRESHOLD)
        && shooting.rel_l2_error <= NUMEROV_THRESHOLD;
    Ok(json!({
        "classification": classify(&p).kind.as_str(),
        "closedform_vs_quadrature_max": closed_vs_quad,
        "grid": {"h": g.spacing(), "points": g.n_points, "rmax": g.r_max},
        "numerov_rel_l2_error": shooting.rel_l2_error,
        "params": {"a": p.a, "beta": p.beta, "k": p.k},
        "passed": passed,
        "residual_max": residual_max,
        "scale_factor": shooting.scale_factor,
        "thresholds": {
            "closedform_vs_quadrature_max": CLOSED_FORM_THRESHOLD,
            "numerov_rel_l2_error": NUMEROV_THRESHOLD,
            "residual_max": RESIDUAL_THRESHOLD,
        },
    }))
}

/// Envelope fit of the analytic state and its relative gaps to the prediction.
struct Confrontation {
    fit: EnvelopeFit,
    deviations: Vec<(&'static str, f64)>,
}

impl Confrontation {
    fn max_deviation(&self) -> f64 {
        self.deviations.iter().map(|(_, d)| *d).fold(0.0, f64::max)
    }

    fn passed(&self) -> bool {
        self.max_deviation() <= FIT_TOLERANCE
    }
}

fn fit_grid(k: f64, rmax: Option<f64>, n: Option<usize>) -> Outcome<GridSpec> {
    let rmax = rmax.unwrap_or(400.0 / k);
    let n = n.unwrap_or((100.0 * k * rmax).round() as usize);
    check_range(rmax, n)?;
    if default_window_start(k) >= rmax {
        return usage(format!(
            "--rmax = {rmax} must exceed the fit window start 10π/k = {}",
            default_window_start(k)
        ));
    }
    GridSpec::new(0.0, rmax, n).map_err(|e| Failure::Usage(e.to_string()))
}

fn confront(
    p: &ModelParams,
    cls: &DecayClassification,
    grid: &GridSpec,
) -> anyhow::Result<Option<Confrontation>> {
    let Some(model) = EnvelopeModel::for_kind(cls.kind) else {
        return Ok(None);
    };
    let window = (default_window_start(p.k), grid.r_max);
    let fit = fit_analytic_envelope(p, grid, model, window, &Settings::default())
        .context("envelope fit")?;
    let rel = |got: Option<f64>, want: Option<f64>| match (got, want) {
        (Some(g), Some(w)) => Ok((g - w).abs() / w.abs()),
        _ => Err(anyhow!("fit and prediction disagree on the model")),
    };
    let deviations = match model {
        EnvelopeModel::StretchedExp => vec![
            ("c", rel(fit.fitted_c, cls.rate_c)?),
            ("p", rel(fit.fitted_p, cls.exponent_p)?),
        ],
        EnvelopeModel::Power => vec![("q", rel(fit.fitted_q, cls.power_q)?)],
    };
    Ok(Some(Confrontation { fit, deviations }))
}

fn classify_report(
    phys: &PhysicsArgs,
    fit: bool,
    rmax: Option<f64>,
    n: Option<usize>,
) -> Outcome<Value> {
    let p = params(phys, 1.0)?;
    let cls = classify(&p);
    let mut report = serde_json::to_value(&cls).map_err(anyhow::Error::from)?;
    if fit {
        let grid = fit_grid(p.k, rmax, n)?;
        let obj = report.as_object_mut().expect("classification is an object");
        match confront(&p, &cls, &grid)? {
            Some(c) => {
                let deviation: Map<String, Value> = c
                    .deviations
                    .iter()
                    .map(|(name, d)| (name.to_string(), json!(d)))
                    .collect();
                obj.insert("deviation".into(), Value::Object(deviation));
                obj.insert("max_rel_deviation".into(), json!(c.max_deviation()));
                obj.insert("fit_pass".into(), json!(c.passed()));
                obj.insert(
                    "fit".into(),
                    serde_json::to_value(&c.fit).map_err(anyhow::Error::from)?,
                );
            }
            None => {
                obj.insert("fit".into(), Value::Null);
            }
        }
    }
    Ok(report)
}

const SWEEP_HEADER: [&str; 14] = [
    "a",
    "beta",
    "kind",
    "normalizable",
    "finite_moments_up_to",
    "exponent_p",
    "rate_c",
    "power_q",
    "fitted_p",
    "fitted_c",
    "fitted_q",
    "residual_rms",
    "max_rel_deviation",
    "fit_pass",
];

fn sweep_row(p: &ModelParams, grid: &GridSpec, digits: usize) -> anyhow::Result<Vec<String>> {
    let cls = classify(p);
    let num = |x: Option<f64>| x.map(|x| format::number(x, digits)).unwrap_or_default();
    // only localized states are confronted with a fit
    let c = if cls.normalizable {
        confront(p, &cls, grid)?
    } else {
        None
    };
    let moments = match cls.finite_moments_up_to {
        MomentBound::All => "all".to_string(),
        MomentBound::UpTo(n) => n.to_string(),
        MomentBound::None => "none".to_string(),
    };
    let fit = c.as_ref().map(|c| &c.fit);
    Ok(vec![
        format::number(p.a, digits),
        format::number(p.beta, digits),
        cls.kind.as_str().to_string(),
        cls.normalizable.to_string(),
        moments,
        num(cls.exponent_p),
        num(cls.rate_c),
        num(cls.power_q),
        num(fit.and_then(|f| f.fitted_p)),
        num(fit.and_then(|f| f.fitted_c)),
        num(fit.and_then(|f| f.fitted_q)),
        num(fit.map(|f| f.residual_rms)),
        num(c.as_ref().map(Confrontation::max_deviation)),
        c.as_ref()
            .map(|c| c.passed().to_string())
            .unwrap_or_default(),
    ])
}

fn sweep(
    k: f64,
    a_list: &[f64],
    beta_list: &[f64],
    rmax: Option<f64>,
    n: Option<usize>,
    threads: usize,
    digits: usize,
) -> Outcome<String> {
    let points = a_list
        .iter()
        .flat_map(|&a| beta_list.iter().map(move |&beta| (a, beta)))
        .map(|(a, beta)| ModelParams::new(k, a, beta).map_err(|e| Failure::Usage(e.to_string())))
        .collect::<Outcome<Vec<_>>>()?;
    let grid = fit_grid(k, rmax, n)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(anyhow::Error::from)?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                sweep_row(p, &grid, digits)
                    .with_context(|| format!("sweep row a = {}, beta = {}", p.a, p.beta))
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })?;
    let mut csv = Csv::new(&SWEEP_HEADER);
    for row in rows {
        csv.row(row);
    }
    Ok(csv.finish())
}

//! Decay law of the embedded bound state: prediction, envelope fit, moments.
//!
//! | a, β           | χ at large r                          | normalizable |
//! |----------------|---------------------------------------|--------------|
//! | a<0, β=0       | `exp(-|a| r / 2)`                      | yes          |
//! | a<0, 0<β<1     | `exp(-|a| r^(1-β) / (2(1-β)))`          | yes          |
//! | a<0, β=1       | `r^(-|a|/2)`                           | iff `|a| > 1` |
//! | a<0, β>1       | bounded, non-decaying                 | no           |
//! | a=0            | `sin(kr)/k`                            | no           |
//! | a>0            | growing (bounded when β>1)            | no           |

use std::f64::consts::PI;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{self, GridSpec, IntegralPath, ModelParams, SampledFunction, Settings};
use crate::ode::default_path;
use crate::quadrature::{self, QuadResult};
use crate::specfun;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    StretchedExponential,
    PowerLaw,
    PureExponential,
    Growing,
    BoundedNondecaying,
}

impl DecayKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DecayKind::StretchedExponential => "stretched_exponential",
            DecayKind::PowerLaw => "power_law",
            DecayKind::PureExponential => "pure_exponential",
            DecayKind::Growing => "growing",
            DecayKind::BoundedNondecaying => "bounded_nondecaying",
        }
    }
}

/// Largest `n` for which `∫ χ² rⁿ dr` converges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentBound {
    All,
    UpTo(u32),
    /// Not even the norm converges.
    None,
}

impl MomentBound {
    pub fn is_finite(self, n: u32) -> bool {
        match self {
            MomentBound::All => true,
            MomentBound::UpTo(m) => n <= m,
            MomentBound::None => false,
        }
    }
}

impl Serialize for MomentBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MomentBound::All => s.serialize_str("all"),
            MomentBound::UpTo(n) => s.serialize_u32(*n),
            MomentBound::None => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayClassification {
    pub kind: DecayKind,
    /// Power of r inside the exponential.
    pub exponent_p: Option<f64>,
    /// Rate `c` of `exp(-c r^p)`.
    pub rate_c: Option<f64>,
    /// Exponent `q` of `r^(-q)`.
    pub power_q: Option<f64>,
    pub normalizable: bool,
    pub finite_moments_up_to: MomentBound,
    /// Leading large-r form of the potential.
    pub dominant_potential: String,
}

fn dominant_potential(p: &ModelParams) -> String {
    if p.a == 0.0 {
        return "V(r) = 0".to_string();
    }
    let amp = 2.0 * p.a * p.k;
    if p.beta == 0.0 {
        format!(
            "V(r) ~ {amp} sin({}r) + {}",
            2.0 * p.k,
            p.a * p.a * 3.0 / 8.0
        )
    } else {
        format!("V(r) ~ {amp} sin({}r) / r^{}", 2.0 * p.k, p.beta)
    }
}

/// Predicted decay law for the given parameters.
pub fn classify(p: &ModelParams) -> DecayClassification {
    let abs_a = p.a.abs();
    let beta = p.beta;
    let mut out = DecayClassification {
        kind: DecayKind::BoundedNondecaying,
        exponent_p: None,
        rate_c: None,
        power_q: None,
        normalizable: false,
        finite_moments_up_to: MomentBound::None,
        dominant_potential: dominant_potential(p),
    };
    if p.a > 0.0 {
        // ∫ sin² z^{-β} converges for β > 1, so f only tends to a constant
        if beta <= 1.0 {
            out.kind = DecayKind::Growing;
        }
        return out;
    }
    if p.a == 0.0 || beta > 1.0 {
        return out;
    }
    if beta < 1.0 {
        out.kind = if beta == 0.0 {
            DecayKind::PureExponential
        } else {
            DecayKind::StretchedExponential
        };
        out.exponent_p = Some(1.0 - beta);
        out.rate_c = Some(abs_a / (2.0 * (1.0 - beta)));
        out.normalizable = true;
        out.finite_moments_up_to = MomentBound::All;
    } else {
        out.kind = DecayKind::PowerLaw;
        out.power_q = Some(abs_a / 2.0);
        out.normalizable = abs_a > 1.0;
        // ∫ r^{n-|a|} dr converges iff n < |a| − 1
        out.finite_moments_up_to = if abs_a > 1.0 {
            MomentBound::UpTo(((abs_a - 1.0).ceil() - 1.0) as u32)
        } else {
            MomentBound::None
        };
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeModel {
    /// `ln env = const − c r^p`
    StretchedExp,
    /// `ln env = const − q ln r`
    Power,
}

impl EnvelopeModel {
    /// Model matching a classification, if the state decays at all.
    pub fn for_kind(kind: DecayKind) -> Option<Self> {
        match kind {
            DecayKind::StretchedExponential | DecayKind::PureExponential => {
                Some(EnvelopeModel::StretchedExp)
            }
            DecayKind::PowerLaw => Some(EnvelopeModel::Power),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeFit {
    pub model: EnvelopeModel,
    pub fitted_p: Option<f64>,
    pub fitted_c: Option<f64>,
    pub fitted_q: Option<f64>,
    /// Fitted constant term of `ln env`.
    pub log_amplitude: f64,
    pub residual_rms: f64,
    pub fit_window: [f64; 2],
    pub points: usize,
}

pub const MIN_ENVELOPE_POINTS: usize = 20;

/// Default fit window start, ten half-wavelengths out.
pub fn default_window_start(k: f64) -> f64 {
    10.0 * PI / k
}

/// Local maxima of `|χ|` inside the window as `(r, ln|χ|)` pairs, refined by
/// a parabola through the three samples around each maximum.
pub fn envelope_points(chi: &SampledFunction, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let log_abs: Vec<f64> = chi.values.iter().map(|v| v.abs().ln()).collect();
    envelope_points_from_log(&chi.grid, &log_abs, window)
}

/// As [`envelope_points`], from samples of `ln|χ|` on `grid`.
pub fn envelope_points_from_log(
    grid: &GridSpec,
    log_abs: &[f64],
    window: (f64, f64),
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    if log_abs.len() != grid.n_points {
        return Err(Error::Domain("sample count does not match grid".into()));
    }
    if !(lo < hi && lo >= grid.r_min && hi <= grid.r_max) {
        return Err(Error::Domain(format!(
            "window [{lo}, {hi}] not inside sample range [{}, {}]",
            grid.r_min, grid.r_max
        )));
    }
    let h = grid.spacing();
    let mut out = Vec::new();
    for i in 1..log_abs.len() - 1 {
        let r = grid.radius(i);
        if r < lo || r > hi {
            continue;
        }
        let (ya, yb, yc) = (log_abs[i - 1], log_abs[i], log_abs[i + 1]);
        if !(yb > ya && yb >= yc) {
            continue;
        }
        if !yb.is_finite() {
            return Err(Error::Internal(format!("non-positive envelope at r = {r}")));
        }
        let curv = ya - 2.0 * yb + yc;
        out.push(if ya.is_finite() && yc.is_finite() && curv < 0.0 {
            let delta = 0.5 * (ya - yc) / curv;
            (r + delta * h, yb - 0.25 * (ya - yc) * delta)
        } else {
            (r, yb)
        });
    }
    Ok(out)
}

/// `ln|χ|` on every grid point, without forming χ itself.
pub fn log_abs_chi_samples(
    p: &ModelParams,
    grid: &GridSpec,
    path: IntegralPath,
    settings: &Settings,
) -> Result<Vec<f64>> {
    let radii: Vec<f64> = grid.radii().collect();
    let integral = model::modulation_integral_on(p, &radii, path, settings)?;
    Ok(radii
        .iter()
        .zip(&integral)
        .map(|(&r, &int)| model::chi0(p.k, r).abs().ln() + p.norm.ln() + p.a * int)
        .collect())
}

/// Fit the envelope of the analytic χ sampled on `grid`.
pub fn fit_analytic_envelope(
    p: &ModelParams,
    grid: &GridSpec,
    model: EnvelopeModel,
    window: (f64, f64),
    settings: &Settings,
) -> Result<EnvelopeFit> {
    let log_abs = log_abs_chi_samples(p, grid, default_path(p), settings)?;
    let points = envelope_points_from_log(grid, &log_abs, window)?;
    fit_log_envelope(&points, model, window)
}

/// Ordinary least squares `y = alpha + slope x`; returns `(alpha, slope, ssr)`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let alpha = my - slope * mx;
    let ssr = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - alpha - slope * xi).powi(2))
        .sum();
    (alpha, slope, ssr)
}

fn stretched_at(points: &[(f64, f64)], p: f64) -> (f64, f64, f64) {
    let x: Vec<f64> = points.iter().map(|(r, _)| r.powf(p)).collect();
    let y: Vec<f64> = points.iter().map(|(_, l)| *l).collect();
    let (alpha, slope, ssr) = linear_fit(&x, &y);
    (alpha, -slope, ssr)
}

const P_GRID_LO: f64 = 0.02;
const P_GRID_HI: f64 = 2.0;
const P_GRID_STEP: f64 = 0.002;

/// Fit `(r, ln env)` pairs with the given model.
pub fn fit_log_envelope(
    points: &[(f64, f64)],
    model: EnvelopeModel,
    window: (f64, f64),
) -> Result<EnvelopeFit> {
    if points.len() < MIN_ENVELOPE_POINTS {
        return Err(Error::InsufficientData {
            found: points.len(),
            needed: MIN_ENVELOPE_POINTS,
        });
    }
    let n = points.len();
    let mut fit = EnvelopeFit {
        model,
        fitted_p: None,
        fitted_c: None,
        fitted_q: None,
        log_amplitude: 0.0,
        residual_rms: 0.0,
        fit_window: [window.0, window.1],
        points: n,
    };
    match model {
        EnvelopeModel::Power => {
            let x: Vec<f64> = points.iter().map(|(r, _)| r.ln()).collect();
            let y: Vec<f64> = points.iter().map(|(_, l)| *l).collect();
            let (alpha, slope, ssr) = linear_fit(&x, &y);
            fit.fitted_q = Some(-slope);
            fit.log_amplitude = alpha;
            fit.residual_rms = (ssr / n as f64).sqrt();
        }
        EnvelopeModel::StretchedExp => {
            // coarse grid over p, exact linear solve for (const, c) at each p
            let steps = ((P_GRID_HI - P_GRID_LO) / P_GRID_STEP).round() as usize;
            let mut best = (P_GRID_LO, f64::INFINITY);
            for i in 0..=steps {
                let p = P_GRID_LO + i as f64 * P_GRID_STEP;
                let ssr = stretched_at(points, p).2;
                if ssr < best.1 {
                    best = (p, ssr);
                }
            }
            // golden-section refinement around the grid minimum
            let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
            let (mut lo, mut hi) = (
                (best.0 - P_GRID_STEP).max(P_GRID_LO * 0.5),
                best.0 + P_GRID_STEP,
            );
            let mut x1 = hi - inv_phi * (hi - lo);
            let mut x2 = lo + inv_phi * (hi - lo);
            let mut f1 = stretched_at(points, x1).2;
            let mut f2 = stretched_at(points, x2).2;
            for _ in 0..80 {
                if f1 < f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - inv_phi * (hi - lo);
                    f1 = stretched_at(points, x1).2;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + inv_phi * (hi - lo);
                    f2 = stretched_at(points, x2).2;
                }
            }
            let p = 0.5 * (lo + hi);
            let (alpha, c, ssr) = stretched_at(points, p);
            fit.fitted_p = Some(p);
            fit.fitted_c = Some(c);
            fit.log_amplitude = alpha;
            fit.residual_rms = (ssr / n as f64).sqrt();
        }
    }
    Ok(fit)
}

/// Extract the envelope of sampled χ inside `window` and fit it.
pub fn fit_envelope(
    chi_samples: &SampledFunction,
    model: EnvelopeModel,
    window: (f64, f64),
) -> Result<EnvelopeFit> {
    let points = envelope_points(chi_samples, window)?;
    fit_log_envelope(&points, model, window)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MomentResult {
    Finite {
        n: u32,
        /// `∫₀^{r_cut} χ² rⁿ dr`.
        value: f64,
        quad_error: f64,
        /// Upper bound on `∫_{r_cut}^∞ χ² rⁿ dr`.
        tail_bound: f64,
    },
    Diverging {
        n: u32,
        /// Logarithmically divergent; decided from the classification alone.
        marginal: bool,
    },
}

impl MomentResult {
    pub fn n(&self) -> u32 {
        match self {
            MomentResult::Finite { n, .. } | MomentResult::Diverging { n, .. } => *n,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, MomentResult::Finite { .. })
    }
}

/// `∫₀^{r_cut} χ² rⁿ dr` by quadrature, panels split at the half periods.
pub fn partial_moment(
    p: &ModelParams,
    n: u32,
    r_cut: f64,
    settings: &Settings,
) -> Result<QuadResult> {
    p.validate()?;
    if !(r_cut > 0.0 && r_cut.is_finite()) {
        return Err(Error::Domain(format!("r_cut = {r_cut} must be > 0")));
    }
    let path = default_path(p);
    let half = PI / (2.0 * p.k);
    let mut breaks: Vec<f64> = (0..)
        .map(|i| i as f64 * half)
        .take_while(|&r| r < r_cut)
        .collect();
    breaks.push(r_cut);
    let failure = std::cell::Cell::new(None);
    let integrand = |r: f64| match model::chi(p, r, path, settings) {
        Ok(c) => c * c * r.powi(n as i32),
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let res = quadrature::integrate_with_breaks(integrand, &breaks, &settings.quad);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    res
}

fn ln_tail_bound(p: &ModelParams, n: u32, r_cut: f64, settings: &Settings) -> Result<f64> {
    let abs_a = p.a.abs();
    let (k, beta) = (p.k, p.beta);
    let integral = model::modulation_integral(p, r_cut, default_path(p), settings)?;
    // sin² ≤ 1 and |½∫cos(2kz) z^{-β}| ≤ r_c^{-β}/(2k) beyond r_cut
    let ln_prefactor =
        2.0 * p.norm.ln() + 2.0 * p.a * integral + abs_a * r_cut.powf(-beta) / k - 2.0 * k.ln();
    let m = f64::from(n);
    if beta < 1.0 {
        let eps = 1.0 - beta;
        let lambda = abs_a / eps;
        let s = (m + 1.0) / eps;
        let x = lambda * r_cut.powf(eps);
        Ok(ln_prefactor + x - eps.ln() - s * lambda.ln()
            + specfun::ln_upper_incomplete_gamma(s, x)?)
    } else {
        // ∫_{r_c}^∞ rⁿ (r/r_c)^{-|a|} dr
        Ok(ln_prefactor + (m + 1.0) * r_cut.ln() - (abs_a - m - 1.0).ln())
    }
}

/// Norm (`n = 0`) and radial moments `∫ χ² rⁿ dr` for `n = 0..=n_max`.
///
/// Convergent moments come back as a truncated quadrature value plus a
/// rigorous bound on the remainder beyond `r_cut`; divergent ones are never
/// reported as numbers.
pub fn norm_and_moments(
    p: &ModelParams,
    n_max: u32,
    r_cut: f64,
    settings: &Settings,
) -> Result<Vec<MomentResult>> {
    p.validate()?;
    if !(r_cut >= 50.0 / p.k) {
        return Err(Error::Domain(format!(
            "r_cut = {r_cut} must be at least 50/k = {}",
            50.0 / p.k
        )));
    }
    let cls = classify(p);
    (0..=n_max)
        .map(|n| {
            let marginal = cls.kind == DecayKind::PowerLaw && p.a.abs() == f64::from(n) + 1.0;
            if !cls.finite_moments_up_to.is_finite(n) {
                return Ok(MomentResult::Diverging { n, marginal });
            }
            let q = partial_moment(p, n, r_cut, settings)?;
            let tail_bound = ln_tail_bound(p, n, r_cut, settings)?.exp();
            if !tail_bound.is_finite() {
                return Ok(MomentResult::Diverging { n, marginal: false });
            }
            Ok(MomentResult::Finite {
                n,
                value: q.value,
                quad_error: q.error,
                tail_bound,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Quantity;
    use approx::assert_relative_eq;

    fn params(a: f64, beta: f64) -> ModelParams {
        ModelParams::new(1.0, a, beta).unwrap()
    }

    #[test]
    fn stretched_classification() {
        let c = classify(&params(-1.0, 0.5));
        assert_eq!(c.kind, DecayKind::StretchedExponential);
        assert_eq!(c.exponent_p, Some(0.5));
        assert_eq!(c.rate_c, Some(1.0));
        assert!(c.normalizable);
        assert_eq!(c.finite_moments_up_to, MomentBound::All);
    }

    #[test]
    fn power_law_classification() {
        let c = classify(&params(-3.0, 1.0));
        assert_eq!(c.kind, DecayKind::PowerLaw);
        assert_eq!(c.power_q, Some(1.5));
        assert!(c.normalizable);
        assert_eq!(c.finite_moments_up_to, MomentBound::UpTo(1));

        let c = classify(&params(-0.5, 1.0));
        assert_eq!(c.power_q, Some(0.25));
        assert!(!c.normalizable);
        assert_eq!(c.finite_moments_up_to, MomentBound::None);

        assert_eq!(
            classify(&params(-3.5, 1.0)).finite_moments_up_to,
            MomentBound::UpTo(2)
        );
    }

    #[test]
    fn remaining_kinds() {
        let c = classify(&params(-1.0, 1.5));
        assert_eq!(c.kind, DecayKind::BoundedNondecaying);
        assert!(!c.normalizable);

        let c = classify(&params(-1.0, 0.0));
        assert_eq!(c.kind, DecayKind::PureExponential);
        assert_eq!(c.rate_c, Some(0.5));
        assert_eq!(c.exponent_p, Some(1.0));

        assert_eq!(
            classify(&params(0.0, 0.5)).kind,
            DecayKind::BoundedNondecaying
        );
        assert_eq!(classify(&params(1.0, 0.5)).kind, DecayKind::Growing);
        assert_eq!(
            classify(&params(1.0, 2.0)).kind,
            DecayKind::BoundedNondecaying
        );
    }

    #[test]
    fn dominant_potential_text() {
        assert_eq!(
            classify(&params(-1.0, 0.5)).dominant_potential,
            "V(r) ~ -2 sin(2r) / r^0.5"
        );
    }

    #[test]
    fn moment_bound_serializes() {
        let j = |m| serde_json::to_string(&m).unwrap();
        assert_eq!(j(MomentBound::All), "\"all\"");
        assert_eq!(j(MomentBound::UpTo(3)), "3");
        assert_eq!(j(MomentBound::None), "null");
    }

    #[test]
    fn synthetic_stretched_envelope() {
        let g = GridSpec::new(0.0, 420.0, 84_001).unwrap();
        let values: Vec<f64> = g.radii().map(|r| r.sin() * (-r.sqrt()).exp()).collect();
        let s = SampledFunction::new(g, Quantity::Chi, values).unwrap();
        let fit = fit_envelope(&s, EnvelopeModel::StretchedExp, (30.0, 400.0)).unwrap();
        let (p, c) = (fit.fitted_p.unwrap(), fit.fitted_c.unwrap());
        assert!((0.475..=0.525).contains(&p), "p = {p}");
        assert!((0.95..=1.05).contains(&c), "c = {c}");
    }

    #[test]
    fn synthetic_power_envelope() {
        let g = GridSpec::new(0.0, 520.0, 52_001).unwrap();
        let values: Vec<f64> = g.radii().map(|r| r.sin() * (1.0 + r).powf(-1.5)).collect();
        let s = SampledFunction::new(g, Quantity::Chi, values).unwrap();
        let fit = fit_envelope(&s, EnvelopeModel::Power, (50.0, 500.0)).unwrap();
        assert_relative_eq!(fit.fitted_q.unwrap(), 1.5, max_relative = 0.01);
    }

    #[test]
    fn too_few_extrema() {
        let g = GridSpec::new(0.0, 40.0, 4001).unwrap();
        let values: Vec<f64> = g.radii().map(f64::sin).collect();
        let s = SampledFunction::new(g, Quantity::Chi, values).unwrap();
        assert!(matches!(
            fit_envelope(&s, EnvelopeModel::Power, (31.0, 40.0)),
            Err(Error::InsufficientData { .. })
        ));
        assert!(fit_envelope(&s, EnvelopeModel::Power, (31.0, 50.0)).is_err());
    }

    #[test]
    fn analytic_fit_survives_underflow() {
        // χ ~ e^{-800} at r = 400: below the smallest f64
        let p = params(-4.0, 0.0);
        let g = GridSpec::new(0.0, 400.0, 40_001).unwrap();
        let fit = fit_analytic_envelope(
            &p,
            &g,
            EnvelopeModel::StretchedExp,
            (default_window_start(1.0), 400.0),
            &Settings::default(),
        )
        .unwrap();
        assert_relative_eq!(fit.fitted_c.unwrap(), 2.0, max_relative = 1e-3);
        assert_relative_eq!(fit.fitted_p.unwrap(), 1.0, max_relative = 1e-3);
    }

    #[test]
    fn plane_wave_norm_diverges() {
        let m = norm_and_moments(&params(0.0, 0.5), 0, 60.0, &Settings::default()).unwrap();
        assert_eq!(
            m,
            vec![MomentResult::Diverging {
                n: 0,
                marginal: false
            }]
        );
    }

    #[test]
    fn power_law_moments_split() {
        let m = norm_and_moments(&params(-3.0, 1.0), 2, 60.0, &Settings::default()).unwrap();
        assert!(m[0].is_finite());
        assert!(m[1].is_finite());
        assert_eq!(
            m[2],
            MomentResult::Diverging {
                n: 2,
                marginal: true
            }
        );
    }

    #[test]
    fn cutoff_below_minimum_rejected() {
        assert!(norm_and_moments(&params(-1.0, 0.5), 0, 10.0, &Settings::default()).is_err());
    }

    #[test]
    fn tail_bound_dominates_true_tail() {
        let p = params(-1.0, 0.5);
        let s = Settings::default();
        let near = partial_moment(&p, 2, 60.0, &s).unwrap().value;
        let far = partial_moment(&p, 2, 150.0, &s).unwrap().value;
        let m = norm_and_moments(&p, 2, 60.0, &s).unwrap();
        let MomentResult::Finite { tail_bound, .. } = m[2] else {
            panic!("expected finite");
        };
        assert!(tail_bound >= far - near);
        assert!(tail_bound < 10.0 * (far - near));
    }
}

//! The construction pipeline: `(k, a, β)` → φ → 𝒞 → (V, f) → χ.
//!
//! The wave function is `χ = χ₀ f` with the free solution `χ₀ = sin(kr)/k`.
//! Rather than prescribing `f`, its logarithmic derivative is fixed to
//! `𝒞 = f'/f = φ(r) sin²(kr)` with `φ = a r^{-β}`. The `sin²` factor cancels
//! the `cot(kr)` poles of the potential, so
//!
//! ```text
//! V = a² sin⁴(kr)/r^{2β} − aβ sin²(kr)/r^{1+β} + 2ak sin(2kr)/r^β
//! f = A exp(a I(r)),   I(r) = ∫₀ʳ sin²(kz) z^{-β} dz
//! ```

mod grid;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use grid::{node_distance, GridSpec, Quantity, SampledFunction};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadConfig};
use crate::specfun::{self, EvalConfig};

/// Parameters of one potential / bound-state pair, in reduced units
/// (`2m/ħ² = 1`, so `E = k²` and `V = 2mU/ħ²`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Momentum of the embedded level.
    pub k: f64,
    /// Coupling; sign free. `a < 0` gives decaying states.
    pub a: f64,
    /// Decay exponent of φ = a r^{-β}.
    pub beta: f64,
    /// Normalization constant `A` of the modulating function.
    pub norm: f64,
}

impl ModelParams {
    pub fn new(k: f64, a: f64, beta: f64) -> Result<Self> {
        Self::with_norm(k, a, beta, 1.0)
    }

    pub fn with_norm(k: f64, a: f64, beta: f64, norm: f64) -> Result<Self> {
        let p = ModelParams { k, a, beta, norm };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Domain(format!("k = {} must be > 0", self.k)));
        }
        if !self.a.is_finite() {
            return Err(Error::Domain("a must be finite".into()));
        }
        if !(self.beta >= 0.0 && self.beta < 3.0) {
            return Err(Error::Domain(format!(
                "beta = {} must lie in [0, 3)",
                self.beta
            )));
        }
        if !(self.norm > 0.0 && self.norm.is_finite()) {
            return Err(Error::Domain(format!("A = {} must be > 0", self.norm)));
        }
        Ok(())
    }

    /// `E = k²` in reduced units.
    pub fn energy(&self) -> f64 {
        self.k * self.k
    }

    /// `ε = 1 − β`.
    pub fn epsilon(&self) -> f64 {
        1.0 - self.beta
    }

    /// Half-width of the window around each node where the `cot` form of the
    /// potential is refused.
    pub fn node_guard(&self) -> f64 {
        1e-6 * PI / self.k
    }
}

/// How the modulation integral `I(r)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralPath {
    Quadrature,
    ClosedForm,
}

/// Numerical settings shared by every evaluation path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub eval: EvalConfig,
    pub quad: QuadConfig,
}

/// Free S-wave solution `sin(kr)/k`.
pub fn chi0(k: f64, r: f64) -> f64 {
    (k * r).sin() / k
}

pub fn chi0_prime(k: f64, r: f64) -> f64 {
    (k * r).cos()
}

/// `φ(r) = a r^{-β}`.
pub fn phi(p: &ModelParams, r: f64) -> Result<f64> {
    if r == 0.0 && p.beta > 0.0 {
        return Err(Error::SingularPoint { r });
    }
    check_radius(r)?;
    Ok(p.a * r.powf(-p.beta))
}

/// `φ'(r) = −aβ r^{-β-1}`.
pub fn phi_prime(p: &ModelParams, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::SingularPoint { r });
    }
    check_radius(r)?;
    Ok(-p.a * p.beta * r.powf(-p.beta - 1.0))
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "radius r = {r} must be finite and >= 0"
        )))
    }
}

/// `𝒞(r) = φ(r) sin²(kr)`; the limit 0 is returned at the origin for β < 2.
pub fn log_derivative(p: &ModelParams, r: f64) -> Result<f64> {
    check_radius(r)?;
    if r == 0.0 {
        return if p.beta < 2.0 {
            Ok(0.0)
        } else {
            Err(Error::SingularPoint { r })
        };
    }
    let s = (p.k * r).sin();
    Ok(phi(p, r)? * s * s)
}

/// `𝒞'(r) = φ' sin²(kr) + kφ sin(2kr)`, for `r > 0`.
pub fn log_derivative_prime(p: &ModelParams, r: f64) -> Result<f64> {
    let s = (p.k * r).sin();
    Ok(phi_prime(p, r)? * s * s + p.k * phi(p, r)? * (2.0 * p.k * r).sin())
}

/// The constructed potential in its pole-free form.
pub fn potential(p: &ModelParams, r: f64) -> Result<f64> {
    check_radius(r)?;
    if r == 0.0 {
        return if p.beta <= 1.0 {
            Ok(0.0)
        } else {
            Err(Error::SingularPoint { r })
        };
    }
    let (a, k, beta) = (p.a, p.k, p.beta);
    let s = (k * r).sin();
    let s2 = s * s;
    let r_beta = r.powf(-beta);
    Ok(
        a * a * s2 * s2 * r_beta * r_beta - a * beta * s2 * r_beta / r
            + 2.0 * a * k * (2.0 * k * r).sin() * r_beta,
    )
}

/// `V = 𝒞² + 𝒞' + 2k cot(kr) 𝒞`, refused near the nodes of `sin(kr)`.
pub fn potential_from_logderivative(c: f64, c_prime: f64, k: f64, r: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("k = {k} must be > 0")));
    }
    check_radius(r)?;
    if node_distance(k, r) < 1e-6 * PI / k {
        return Err(Error::NodeProximity { r });
    }
    let cot = (k * r).cos() / (k * r).sin();
    Ok(c * c + c_prime + 2.0 * k * cot * c)
}

/// `I(r) = ∫₀ʳ sin²(kz) z^{-β} dz` along the requested path.
pub fn modulation_integral(
    p: &ModelParams,
    r: f64,
    path: IntegralPath,
    settings: &Settings,
) -> Result<f64> {
    p.validate()?;
    check_radius(r)?;
    match path {
        IntegralPath::Quadrature => {
            Ok(quadrature::integrate_modulation(p.k, p.beta, r, &settings.quad)?.value)
        }
        IntegralPath::ClosedForm => closed_form_integral(p, r, &settings.eval),
    }
}

fn closed_form_integral(p: &ModelParams, r: f64, cfg: &EvalConfig) -> Result<f64> {
    let (k, beta) = (p.k, p.beta);
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Unsupported(format!(
            "closed form needs beta in [0, 1], got {beta}"
        )));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    if beta == 0.0 {
        return Ok(r / 2.0 - (2.0 * k * r).sin() / (4.0 * k));
    }
    if beta == 1.0 {
        // ½(ln kr − Ci(2kr) + γ + ln 2) = ½ Cin(2kr)
        return Ok(0.5 * specfun::cin(2.0 * k * r, cfg)?);
    }
    let eps = 1.0 - beta;
    let x = Complex64::new(0.0, 2.0 * k * r);
    let g = specfun::lower_incomplete_gamma(eps, x, cfg)?;
    let scale = Complex64::new(0.0, 2.0 * k).powf(eps);
    // γ(ε,−x)/(−2ik)^ε is the conjugate of γ(ε,x)/(2ik)^ε
    let bracket = 2.0 * (g / scale).re;
    Ok(r.powf(eps) / (2.0 * eps) - 0.25 * bracket)
}

/// Largest `ln f` that still fits in an `f64`.
const LN_F64_MAX: f64 = 709.78;

/// `ln f(r) = ln A + a I(r)`; finite even where `f` itself would overflow.
pub fn log_modulating_function(
    p: &ModelParams,
    r: f64,
    path: IntegralPath,
    settings: &Settings,
) -> Result<f64> {
    Ok(p.norm.ln() + p.a * modulation_integral(p, r, path, settings)?)
}

fn exp_checked(log_f: f64, r: f64) -> Result<f64> {
    if log_f > LN_F64_MAX {
        Err(Error::Growth { r, log_f })
    } else {
        Ok(log_f.exp())
    }
}

/// `f(r) = A exp(a I(r))`.
pub fn modulating_function(
    p: &ModelParams,
    r: f64,
    path: IntegralPath,
    settings: &Settings,
) -> Result<f64> {
    if r == 0.0 {
        p.validate()?;
        return Ok(p.norm);
    }
    exp_checked(log_modulating_function(p, r, path, settings)?, r)
}

/// `χ(r) = χ₀(r) f(r)`.
pub fn chi(p: &ModelParams, r: f64, path: IntegralPath, settings: &Settings) -> Result<f64> {
    if r == 0.0 {
        p.validate()?;
        return Ok(0.0);
    }
    Ok(chi0(p.k, r) * modulating_function(p, r, path, settings)?)
}

/// `ln|χ(r)|`, for envelope work far out where χ underflows.
pub fn log_abs_chi(
    p: &ModelParams,
    r: f64,
    path: IntegralPath,
    settings: &Settings,
) -> Result<f64> {
    Ok(chi0(p.k, r).abs().ln() + log_modulating_function(p, r, path, settings)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiDerivatives {
    pub chi: f64,
    pub chi_prime: f64,
    pub chi_double_prime: f64,
}

/// Analytic `χ`, `χ'`, `χ''` at `r > 0` given `f(r)`.
fn derivatives_with_f(p: &ModelParams, r: f64, f: f64) -> Result<ChiDerivatives> {
    let k = p.k;
    let c = log_derivative(p, r)?;
    let c_prime = log_derivative_prime(p, r)?;
    let u = chi0(k, r);
    let u_prime = chi0_prime(k, r);
    Ok(ChiDerivatives {
        chi: u * f,
        chi_prime: f * (u_prime + c * u),
        chi_double_prime: f * ((c_prime + c * c) * u + 2.0 * c * u_prime - k * k * u),
    })
}

/// `χ' = f(χ₀' + 𝒞χ₀)`, `χ'' = f((𝒞' + 𝒞²)χ₀ + 2𝒞χ₀' − k²χ₀)`, for `r > 0`.
pub fn chi_derivatives(
    p: &ModelParams,
    r: f64,
    path: IntegralPath,
    settings: &Settings,
) -> Result<ChiDerivatives> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!(
            "chi_derivatives needs r > 0, got {r}"
        )));
    }
    let f = modulating_function(p, r, path, settings)?;
    derivatives_with_f(p, r, f)
}

fn normalized_residual(p: &ModelParams, r: f64, d: &ChiDerivatives) -> Result<f64> {
    let v = potential(p, r)?;
    let k2 = p.k * p.k;
    let scale = (k2 * d.chi.abs()).max(d.chi_double_prime.abs());
    let res = (d.chi_double_prime + (k2 - v) * d.chi).abs();
    Ok(if scale == 0.0 { res } else { res / scale })
}

/// Normalized Schrödinger residual `|χ'' + (k² − V)χ| / max(k²|χ|, |χ''|)`.
pub fn residual(p: &ModelParams, r: f64, path: IntegralPath, settings: &Settings) -> Result<f64> {
    if r == 0.0 {
        p.validate()?;
        return Ok(0.0);
    }
    let d = chi_derivatives(p, r, path, settings)?;
    normalized_residual(p, r, &d)
}

/// `I(r)` at every radius of an increasing sequence.
///
/// The quadrature path accumulates panel by panel, so the cost is one pass
/// over `[0, r_max]` rather than one integral per point.
pub fn modulation_integral_on(
    p: &ModelParams,
    radii: &[f64],
    path: IntegralPath,
    settings: &Settings,
) -> Result<Vec<f64>> {
    p.validate()?;
    match path {
        IntegralPath::ClosedForm => radii
            .iter()
            .enumerate()
            .map(|(i, &r)| closed_form_integral(p, r, &settings.eval).map_err(|e| e.at(i)))
            .collect(),
        IntegralPath::Quadrature => {
            let mut out = Vec::with_capacity(radii.len());
            let mut acc = 0.0;
            let mut prev = 0.0;
            for (i, &r) in radii.iter().enumerate() {
                if !(r >= prev) {
                    return Err(Error::Domain("radii must be increasing".into()).at(i));
                }
                acc +=
                    quadrature::integrate_modulation_between(p.k, p.beta, prev, r, &settings.quad)
                        .map_err(|e| e.at(i))?
                        .value;
                out.push(acc);
                prev = r;
            }
            Ok(out)
        }
    }
}

/// Evaluate one quantity on every grid point.
pub fn sample(
    p: &ModelParams,
    g: &GridSpec,
    quantity: Quantity,
    path: IntegralPath,
    settings: &Settings,
) -> Result<SampledFunction> {
    p.validate()?;
    let radii: Vec<f64> = g.radii().collect();
    let values: Vec<f64> = match quantity {
        Quantity::Potential => radii
            .iter()
            .enumerate()
            .map(|(i, &r)| potential(p, r).map_err(|e| e.at(i)))
            .collect::<Result<_>>()?,
        Quantity::LogDerivative => radii
            .iter()
            .enumerate()
            .map(|(i, &r)| log_derivative(p, r).map_err(|e| e.at(i)))
            .collect::<Result<_>>()?,
        Quantity::Modulation | Quantity::Chi | Quantity::Residual => {
            let integral = modulation_integral_on(p, &radii, path, settings)?;
            radii
                .iter()
                .zip(&integral)
                .enumerate()
                .map(|(i, (&r, &int))| {
                    let f = exp_checked(p.norm.ln() + p.a * int, r).map_err(|e| e.at(i))?;
                    match quantity {
                        Quantity::Modulation => Ok(f),
                        Quantity::Chi => Ok(chi0(p.k, r) * f),
                        _ if r == 0.0 => Ok(0.0),
                        _ => derivatives_with_f(p, r, f)
                            .and_then(|d| normalized_residual(p, r, &d))
                            .map_err(|e| e.at(i)),
                    }
                })
                .collect::<Result<_>>()?
        }
    };
    SampledFunction::new(*g, quantity, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(k: f64, a: f64, beta: f64) -> ModelParams {
        ModelParams::new(k, a, beta).unwrap()
    }

    fn s() -> Settings {
        Settings::default()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, -1.0, 0.5).is_err());
        assert!(ModelParams::new(1.0, -1.0, 3.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, -0.1).is_err());
        assert!(ModelParams::with_norm(1.0, -1.0, 0.5, 0.0).is_err());
        assert_eq!(params(2.0, -1.0, 0.5).energy(), 4.0);
    }

    #[test]
    fn free_solution_values() {
        assert_eq!(chi0(2.0, 0.0), 0.0);
        assert_abs_diff_eq!(chi0(1.0, PI / 2.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chi0(2.0, PI / 4.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(&params(1.0, 2.0, 1.0), 2.0).unwrap(), 1.0);
        assert_eq!(phi(&params(1.0, -1.0, 0.0), 17.0).unwrap(), -1.0);
        assert_eq!(phi(&params(1.0, -1.0, 0.5), 4.0).unwrap(), -0.5);
        assert!(matches!(
            phi(&params(1.0, -1.0, 0.5), 0.0),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn log_derivative_values() {
        let p = params(1.0, -1.0, 0.5);
        assert_abs_diff_eq!(log_derivative(&p, 3.0 * PI).unwrap(), 0.0, epsilon = 1e-30);
        assert_relative_eq!(
            log_derivative(&p, PI / 2.0).unwrap(),
            -(PI / 2.0).powf(-0.5),
            max_relative = 1e-14
        );
        assert_eq!(log_derivative(&p, 0.0).unwrap(), 0.0);
        assert!(log_derivative(&params(1.0, -1.0, 2.0), 0.0).is_err());
    }

    #[test]
    fn potential_values() {
        let free = params(1.0, 0.0, 0.7);
        for r in [0.1, 1.0, 13.0] {
            assert_eq!(potential(&free, r).unwrap(), 0.0);
        }
        let p = params(1.0, -1.0, 0.5);
        for n in 1..20 {
            assert!(potential(&p, n as f64 * PI).unwrap().abs() < 1e-13);
        }
        assert_abs_diff_eq!(
            potential(&params(1.0, 1.0, 1.0), PI / 2.0).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_eq!(potential(&p, 0.0).unwrap(), 0.0);
        assert!(potential(&params(1.0, -1.0, 1.5), 0.0).is_err());
    }

    #[test]
    fn cot_form_direct_substitution() {
        // a=1, β=0, k=1, r=π/4: 𝒞 = ½, 𝒞' = 1, cot = 1
        let v = potential_from_logderivative(0.5, 1.0, 1.0, PI / 4.0).unwrap();
        assert_abs_diff_eq!(v, 2.25, epsilon = 1e-14);
        assert_abs_diff_eq!(
            potential(&params(1.0, 1.0, 0.0), PI / 4.0).unwrap(),
            2.25,
            epsilon = 1e-14
        );
        assert_eq!(
            potential_from_logderivative(0.0, 0.0, 1.0, 1.0).unwrap(),
            0.0
        );
        assert!(matches!(
            potential_from_logderivative(0.0, 0.0, 1.0, PI),
            Err(Error::NodeProximity { .. })
        ));
    }

    #[test]
    fn cot_form_matches_pole_free_form() {
        let p = params(1.0, -1.0, 0.5);
        for i in 0..1000 {
            let r = 0.1 + 99.9 * ((i as f64 * 0.618_033_988_75) % 1.0);
            if node_distance(p.k, r) < p.node_guard() {
                continue;
            }
            let v = potential(&p, r).unwrap();
            let w = potential_from_logderivative(
                log_derivative(&p, r).unwrap(),
                log_derivative_prime(&p, r).unwrap(),
                p.k,
                r,
            )
            .unwrap();
            assert!((v - w).abs() <= 1e-11 * (1.0 + v.abs()), "r = {r}");
        }
    }

    #[test]
    fn elementary_closed_form() {
        let i = modulation_integral(&params(1.0, -1.0, 0.0), PI, IntegralPath::ClosedForm, &s())
            .unwrap();
        assert_abs_diff_eq!(i, PI / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn closed_form_matches_quadrature_beta_half() {
        let p = params(1.0, -1.0, 0.5);
        let a = modulation_integral(&p, 20.0, IntegralPath::ClosedForm, &s()).unwrap();
        let b = modulation_integral(&p, 20.0, IntegralPath::Quadrature, &s()).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }

    #[test]
    fn closed_form_unsupported_beyond_one() {
        assert!(matches!(
            modulation_integral(&params(1.0, -1.0, 1.5), 2.0, IntegralPath::ClosedForm, &s()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn beta_one_log_limit() {
        let p = params(1.0, -1.0, 1.0);
        let r: f64 = 5000.0;
        let i = modulation_integral(&p, r, IntegralPath::ClosedForm, &s()).unwrap();
        assert_abs_diff_eq!(
            i - 0.5 * r.ln(),
            0.5 * (specfun::EULER_GAMMA + 2f64.ln()),
            epsilon = 1e-3
        );
    }

    #[test]
    fn modulating_function_basics() {
        let p = ModelParams::with_norm(1.0, -1.0, 0.5, 2.5).unwrap();
        assert_eq!(
            modulating_function(&p, 0.0, IntegralPath::ClosedForm, &s()).unwrap(),
            2.5
        );
        let free = ModelParams::with_norm(1.0, 0.0, 0.5, 2.5).unwrap();
        assert_eq!(
            modulating_function(&free, 40.0, IntegralPath::ClosedForm, &s()).unwrap(),
            2.5
        );
        // f (kr)^{3/2} settles to a constant for a = −3, β = 1
        let p = params(1.0, -3.0, 1.0);
        let g = |r: f64| {
            modulating_function(&p, r, IntegralPath::ClosedForm, &s()).unwrap() * r.powf(1.5)
        };
        assert_relative_eq!(g(300.0), g(600.0), max_relative = 2e-2);
    }

    #[test]
    fn growth_is_reported() {
        let p = params(1.0, 5.0, 0.0);
        assert!(matches!(
            modulating_function(&p, 400.0, IntegralPath::ClosedForm, &s()),
            Err(Error::Growth { .. })
        ));
    }

    #[test]
    fn chi_basics() {
        let p = params(1.3, -1.0, 0.5);
        assert_eq!(chi(&p, 0.0, IntegralPath::ClosedForm, &s()).unwrap(), 0.0);
        let free = params(1.3, 0.0, 0.5);
        for r in [0.5, 7.0] {
            assert_eq!(
                chi(&free, r, IntegralPath::ClosedForm, &s()).unwrap(),
                chi0(1.3, r)
            );
        }
        let d = chi_derivatives(&free, 0.7, IntegralPath::ClosedForm, &s()).unwrap();
        assert_abs_diff_eq!(d.chi_prime, (1.3f64 * 0.7).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(
            d.chi_double_prime,
            -1.3 * (1.3f64 * 0.7).sin(),
            epsilon = 1e-15
        );
        assert!(chi_derivatives(&p, 0.0, IntegralPath::ClosedForm, &s()).is_err());
    }

    #[test]
    fn slope_at_origin_is_norm() {
        let p = ModelParams::with_norm(1.0, -1.0, 0.5, 3.0).unwrap();
        let d = chi_derivatives(&p, 1e-7, IntegralPath::ClosedForm, &s()).unwrap();
        assert_relative_eq!(d.chi_prime, 3.0, max_relative = 1e-9);
    }

    #[test]
    fn stretched_envelope_far_out() {
        // |χ| envelope ∝ exp(−√r) for k=1, a=−1, β=½
        let p = params(1.0, -1.0, 0.5);
        let peak = |n: f64| {
            let r = (n + 0.5) * PI;
            log_abs_chi(&p, r, IntegralPath::ClosedForm, &s()).unwrap() + r.sqrt()
        };
        assert_abs_diff_eq!(peak(100.0), peak(400.0), epsilon = 0.02);
    }

    #[test]
    fn sampled_quantities() {
        let g = GridSpec::new(0.0, 20.0, 401).unwrap();
        let v = sample(
            &params(1.0, 0.0, 0.5),
            &g,
            Quantity::Potential,
            IntegralPath::ClosedForm,
            &s(),
        )
        .unwrap();
        assert!(v.values.iter().all(|&x| x == 0.0));
        let c = sample(
            &params(1.0, -1.0, 0.5),
            &g,
            Quantity::Chi,
            IntegralPath::ClosedForm,
            &s(),
        )
        .unwrap();
        assert_eq!(c.values[0], 0.0);
        let q = sample(
            &params(1.0, -1.0, 0.5),
            &g,
            Quantity::Chi,
            IntegralPath::Quadrature,
            &s(),
        )
        .unwrap();
        for (x, y) in c.values.iter().zip(&q.values) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn sampled_residual_small() {
        let g = GridSpec::new(0.1, 60.0, 3000).unwrap();
        let res = sample(
            &params(1.0, -1.0, 0.5),
            &g,
            Quantity::Residual,
            IntegralPath::ClosedForm,
            &s(),
        )
        .unwrap();
        assert!(res.max_abs() <= 1e-9, "{}", res.max_abs());
    }

    #[test]
    fn sample_errors_carry_index() {
        let g = GridSpec::new(0.0, 1.0, 5).unwrap();
        let err = sample(
            &params(1.0, -1.0, 1.5),
            &g,
            Quantity::Potential,
            IntegralPath::Quadrature,
            &s(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::AtPoint { index: 0, .. }));
    }
}

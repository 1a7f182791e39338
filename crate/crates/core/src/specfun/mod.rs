//! Special functions for the closed-form modulation integral.
//!
//! The lower incomplete gamma function is mostly needed for `a ∈ (0, 1]` and
//! arguments on the imaginary axis (`x = ±2ikr`), and the cosine integral
//! only for positive reals. Both switch from a power series (summed in
//! double-double) to an asymptotic expansion at `|x| = switchover_modulus`.

mod dd;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use dd::{CDd, Dd};

/// Euler's constant.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

pub type ComplexValue = Complex64;

/// Controls for series truncation and the series/asymptotic switchover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub series_tol: f64,
    pub max_terms: usize,
    /// Number of terms `M` kept in the inverse-power expansion of γ(a, x).
    pub asymptotic_order: usize,
    pub switchover_modulus: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            series_tol: 1e-14,
            max_terms: 500,
            asymptotic_order: 20,
            switchover_modulus: 30.0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_tol > 0.0) {
            return Err(Error::InvalidConfig("series_tol must be > 0".into()));
        }
        if self.max_terms < 1 {
            return Err(Error::InvalidConfig("max_terms must be >= 1".into()));
        }
        if self.asymptotic_order < 1 {
            return Err(Error::InvalidConfig("asymptotic_order must be >= 1".into()));
        }
        if !(self.switchover_modulus > 0.0) {
            return Err(Error::InvalidConfig(
                "switchover_modulus must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Rising factorial `a (a+1) ... (a+n-1)`; `1` for `n = 0`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a + f64::from(i)))
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(z: f64) -> f64 {
    // z is the shifted argument, Γ(z + 1)
    LANCZOS_COEF[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS_COEF[0], |acc, (i, c)| {
            acc + c / (z + i as f64 + 1.0)
        })
}

/// Γ(x) for real `x > 0`.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let z = x - 1.0;
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
    }
}

/// ln Γ(x) for real `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI.ln() - (PI * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let z = x - 1.0;
        let t = z + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
    }
}

fn check_order(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "incomplete gamma order a = {a} must be finite and > 0"
        )))
    }
}

fn finite(z: Complex64, what: &str) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Evaluate in the closed upper half plane and reflect, so that
/// `γ(a, conj x) = conj γ(a, x)` holds bit for bit.
fn with_conjugate_symmetry(
    x: Complex64,
    eval: impl FnOnce(Complex64) -> Result<Complex64>,
) -> Result<Complex64> {
    if x.im < 0.0 {
        eval(x.conj()).map(|z| z.conj())
    } else {
        eval(x)
    }
}

/// Lower incomplete gamma function γ(a, x) for real `a > 0`, principal branch.
pub fn lower_incomplete_gamma(a: f64, x: ComplexValue, cfg: &EvalConfig) -> Result<ComplexValue> {
    cfg.validate()?;
    if x.norm() <= cfg.switchover_modulus {
        lower_incomplete_gamma_series(a, x, cfg)
    } else {
        lower_incomplete_gamma_asymptotic(a, x, cfg)
    }
}

/// Convergent series `γ(a,x) = x^a e^{-x} Σ x^n / (a)_{n+1}`, any modulus.
pub fn lower_incomplete_gamma_series(
    a: f64,
    x: ComplexValue,
    cfg: &EvalConfig,
) -> Result<ComplexValue> {
    check_order(a)?;
    if !(x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::Domain("non-finite argument".into()));
    }
    if x == Complex64::new(0.0, 0.0) {
        return Ok(x);
    }
    with_conjugate_symmetry(x, |x| {
        let modulus = x.norm();
        let mut term = CDd::real(Dd::from_f64(1.0) / Dd::from_f64(a));
        let mut sum = term;
        let mut converged = false;
        for n in 1..=cfg.max_terms {
            let denom = Dd::sum(a, n as f64);
            term = term.mul_c64(x.re, x.im).div_real(denom);
            sum = sum + term;
            let ratio = modulus / (a + n as f64 + 1.0);
            if ratio < 1.0 {
                let tail = term.norm_f64() * ratio / (1.0 - ratio);
                if tail <= cfg.series_tol * 1e-2 * sum.norm_f64() {
                    converged = true;
                    break;
                }
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                terms: cfg.max_terms,
            });
        }
        let (re, im) = sum.to_parts();
        let s = Complex64::new(re, im);
        finite(x.powf(a) * (-x).exp() * s, "incomplete gamma series")
    })
}

/// Inverse-power expansion
/// `γ(a,x) = Γ(a) - x^{a-1} e^{-x} Σ_{m<M} (1-a)_m / (-x)^m`.
pub fn lower_incomplete_gamma_asymptotic(
    a: f64,
    x: ComplexValue,
    cfg: &EvalConfig,
) -> Result<ComplexValue> {
    check_order(a)?;
    if x.norm() == 0.0 || !(x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::Domain(
            "asymptotic expansion needs finite x != 0".into(),
        ));
    }
    with_conjugate_symmetry(x, |x| {
        let minus_x = -x;
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for m in 1..cfg.asymptotic_order {
            term = term * (m as f64 - a) / minus_x;
            sum += term;
        }
        let tail = x.powf(a - 1.0) * (-x).exp() * sum;
        finite(
            Complex64::new(gamma(a), 0.0) - tail,
            "incomplete gamma asymptotic",
        )
    })
}

fn check_positive(u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "cosine integral needs finite u > 0, got {u}"
        )))
    }
}

/// `Σ_{n≥1} (-1)^n u^{2n} / (2n (2n)!)`, i.e. `Ci(u) - γ - ln u = -Cin(u)`.
fn ci_series_tail(u: f64, cfg: &EvalConfig) -> Result<f64> {
    let u2 = Dd::prod(u, u);
    let mut t = Dd::from_f64(1.0);
    let mut sum = Dd::ZERO;
    for n in 1..=cfg.max_terms {
        let two_n = 2.0 * n as f64;
        t = -(t * u2) / Dd::from_f64((two_n - 1.0) * two_n);
        let term = t / Dd::from_f64(two_n);
        sum = sum + term;
        if two_n > u && term.abs_f64() <= cfg.series_tol * 1e-2 * sum.abs_f64() {
            return Ok(sum.to_f64());
        }
    }
    Err(Error::NonConvergence {
        terms: cfg.max_terms,
    })
}

/// `Ci(u) = γ + ln u + Σ (-1)^n u^{2n} / (2n (2n)!)`.
pub fn cosine_integral_series(u: f64, cfg: &EvalConfig) -> Result<f64> {
    check_positive(u)?;
    Ok(EULER_GAMMA + u.ln() + ci_series_tail(u, cfg)?)
}

/// `Ci(u) = f(u) sin u - g(u) cos u` with the auxiliary functions summed up
/// to their smallest term.
pub fn cosine_integral_asymptotic(u: f64, cfg: &EvalConfig) -> Result<f64> {
    check_positive(u)?;
    let inv_u2 = 1.0 / (u * u);
    let mut f_term = 1.0 / u;
    let mut g_term = inv_u2;
    let mut f_sum = f_term;
    let mut g_sum = g_term;
    for n in 1..=cfg.max_terms {
        let two_n = 2.0 * n as f64;
        let next_f = -f_term * (two_n - 1.0) * two_n * inv_u2;
        let next_g = -g_term * two_n * (two_n + 1.0) * inv_u2;
        if next_f.abs() >= f_term.abs() || next_g.abs() >= g_term.abs() {
            break;
        }
        f_term = next_f;
        g_term = next_g;
        f_sum += f_term;
        g_sum += g_term;
        if f_term.abs() < 1e-18 * f_sum.abs() && g_term.abs() < 1e-18 * g_sum.abs() {
            break;
        }
    }
    Ok(f_sum * u.sin() - g_sum * u.cos())
}

/// Cosine integral Ci(u) for `u > 0`.
pub fn cosine_integral(u: f64, cfg: &EvalConfig) -> Result<f64> {
    cfg.validate()?;
    if u <= cfg.switchover_modulus {
        cosine_integral_series(u, cfg)
    } else {
        cosine_integral_asymptotic(u, cfg)
    }
}

/// Entire cosine integral `Cin(u) = ∫₀ᵘ (1 - cos t)/t dt = γ + ln u - Ci(u)`.
///
/// Summed directly below the switchover, which avoids the cancellation
/// between `ln u` and `Ci(u)` at small `u`.
pub fn cin(u: f64, cfg: &EvalConfig) -> Result<f64> {
    cfg.validate()?;
    if u == 0.0 {
        return Ok(0.0);
    }
    check_positive(u)?;
    if u <= cfg.switchover_modulus {
        Ok(-ci_series_tail(u, cfg)?)
    } else {
        Ok(EULER_GAMMA + u.ln() - cosine_integral_asymptotic(u, cfg)?)
    }
}

/// ln Γ(s, x) for real `s > 0`, `x ≥ 0`, the upper incomplete gamma function.
pub fn ln_upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) || !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!(
            "upper incomplete gamma at s = {s}, x = {x}"
        )));
    }
    if x == 0.0 {
        return Ok(ln_gamma(s));
    }
    let ln_prefactor = -x + s * x.ln();
    const MAX_ITER: usize = 10_000;
    if x < s + 1.0 {
        let mut term = 1.0 / s;
        let mut sum = term;
        let mut ap = s;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term < sum * 1e-17 {
                let ln_lower = ln_prefactor + sum.ln();
                let p = (ln_lower - ln_gamma(s)).exp();
                return Ok(ln_gamma(s) + (-p).ln_1p());
            }
        }
        Err(Error::NonConvergence { terms: MAX_ITER })
    } else {
        // modified Lentz on the Legendre continued fraction
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                return Ok(ln_prefactor + h.ln());
            }
        }
        Err(Error::NonConvergence { terms: MAX_ITER })
    }
}

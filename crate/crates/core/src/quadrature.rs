//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! This is the independent oracle for every closed form in the crate, so it
//! never calls into [`crate::specfun`]. Integrable power singularities at the
//! lower endpoint are flattened by a change of variables before adapting.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any one panel.
    pub max_depth: u32,
    /// Pre-split `[0, r]` at multiples of `π/(2k)` for the modulation integral.
    pub panel_per_halfperiod: bool,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_depth: 60,
            panel_per_halfperiod: true,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "quadrature tolerances must be > 0".into(),
            ));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidConfig("max_depth must be >= 1".into()));
        }
        Ok(())
    }
}

/// Integral estimate with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for QuadResult {
    type Output = QuadResult;
    fn add(self, o: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> QuadResult {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    QuadResult { value, error }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    est: QuadResult,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

const MAX_SEGMENTS: usize = 200_000;

/// Adapt over the panels delimited by `breaks` (sorted, at least two points).
fn adapt<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], cfg: &QuadConfig) -> Result<QuadResult> {
    cfg.validate()?;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(Segment {
                a: w[0],
                b: w[1],
                est: kronrod15(f, w[0], w[1]),
                depth: 0,
            });
        }
    }
    let total = |heap: &BinaryHeap<Segment>, frozen: &[Segment]| {
        heap.iter().chain(frozen.iter()).fold(
            QuadResult {
                value: 0.0,
                error: 0.0,
            },
            |acc, s| acc + s.est,
        )
    };
    let mut running = total(&heap, &frozen);
    let mut segments = heap.len();
    loop {
        if !running.value.is_finite() || !running.error.is_finite() {
            return Err(Error::NonFinite("quadrature integrand".into()));
        }
        if running.error <= cfg.abs_tol.max(cfg.rel_tol * running.value.abs()) {
            // resum to drop the drift of the incremental updates
            let t = total(&heap, &frozen);
            if t.error <= cfg.abs_tol.max(cfg.rel_tol * t.value.abs()) {
                return Ok(t);
            }
            running = t;
        }
        let Some(worst) = heap.pop() else {
            let t = total(&heap, &frozen);
            return Err(Error::Accuracy {
                value: t.value,
                error: t.error,
            });
        };
        if worst.depth >= cfg.max_depth || segments >= MAX_SEGMENTS {
            frozen.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        running.value -= worst.est.value;
        running.error -= worst.est.error;
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let est = kronrod15(f, a, b);
            running = running + est;
            heap.push(Segment {
                a,
                b,
                est,
                depth: worst.depth + 1,
            });
        }
        segments += 1;
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
    }
    Ok(())
}

/// Adaptive estimate of `∫_lo^hi f`. The rule never samples the endpoints.
pub fn integrate_generic<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    check_interval(lo, hi)?;
    adapt(&f, &[lo, hi], cfg)
}

/// Like [`integrate_generic`] but seeded with caller-chosen breakpoints.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Domain(
            "breakpoints must be sorted, at least two".into(),
        ));
    }
    check_interval(breaks[0], breaks[breaks.len() - 1])?;
    adapt(&f, breaks, cfg)
}

/// `∫_lo^hi f` where `f(z) ~ (z - lo)^exponent` near `lo`, `exponent > -1`.
///
/// Substitutes `z = lo + t^q`, `q = 1/(1 + exponent)`, which makes the
/// transformed integrand finite and flat at `t = 0`.
pub fn integrate_power_singular<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    exponent: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    check_interval(lo, hi)?;
    if !(exponent > -1.0) {
        return Err(Error::Divergent(format!(
            "endpoint behaviour (z - lo)^{exponent} is not integrable"
        )));
    }
    let q = 1.0 / (1.0 + exponent);
    let t_hi = (hi - lo).powf(1.0 / q);
    let g = |t: f64| {
        let s = t.powf(q);
        f(lo + s) * q * s / t
    };
    adapt(&g, &[0.0, t_hi], cfg)
}

fn modulation_integrand(k: f64, beta: f64) -> impl Fn(f64) -> f64 {
    move |z: f64| {
        let s = (k * z).sin();
        s * s * z.powf(-beta)
    }
}

fn check_modulation(k: f64, beta: f64) -> Result<()> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("wavenumber k = {k} must be > 0")));
    }
    if !(beta >= 0.0) {
        return Err(Error::Domain(format!("beta = {beta} must be >= 0")));
    }
    if beta >= 3.0 {
        return Err(Error::Divergent(format!(
            "sin²(kz) z^-{beta} is not integrable at z = 0 (needs beta < 3)"
        )));
    }
    Ok(())
}

/// `∫_{r0}^{r1} sin²(kz) z^{-β} dz` for `0 ≤ r0 ≤ r1`.
pub fn integrate_modulation_between(
    k: f64,
    beta: f64,
    r0: f64,
    r1: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    check_modulation(k, beta)?;
    if !(r0 >= 0.0 && r1 >= r0 && r1.is_finite()) {
        return Err(Error::Domain(format!("invalid radii [{r0}, {r1}]")));
    }
    if r1 == r0 {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
        });
    }
    let half_period = PI / (2.0 * k);
    let f = modulation_integrand(k, beta);
    let mut acc = QuadResult {
        value: 0.0,
        error: 0.0,
    };
    let mut start = r0;
    if r0 == 0.0 {
        // σ → 0: near the origin the integrand behaves like k² z^{2-β}
        let first = if cfg.panel_per_halfperiod {
            half_period.min(r1)
        } else {
            r1
        };
        acc = acc + integrate_power_singular(&f, 0.0, first, 2.0 - beta, cfg)?;
        start = first;
    }
    if start < r1 {
        let mut breaks = vec![start];
        if cfg.panel_per_halfperiod {
            let mut n = (start / half_period).floor() + 1.0;
            while n * half_period < r1 {
                let z = n * half_period;
                if z > start {
                    breaks.push(z);
                }
                n += 1.0;
            }
        }
        breaks.push(r1);
        acc = acc + adapt(&f, &breaks, cfg)?;
    }
    Ok(acc)
}

/// `∫₀ʳ sin²(kz) z^{-β} dz`, the exponent of the modulating function.
pub fn integrate_modulation(k: f64, beta: f64, r: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    integrate_modulation_between(k, beta, 0.0, r, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn constant_integrand() {
        let r = integrate_generic(|_| 1.0, 0.0, 1.0, &cfg()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn inverse_sqrt_with_declared_singularity() {
        let r = integrate_power_singular(|z: f64| z.powf(-0.5), 0.0, 1.0, -0.5, &cfg()).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn elementary_modulation_integral() {
        let r = integrate_modulation(1.0, 0.0, PI, &cfg()).unwrap();
        assert_abs_diff_eq!(r.value, PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn small_radius_beta_one() {
        let r = integrate_modulation(1.0, 1.0, 0.1, &cfg()).unwrap();
        // ½(kr)² - (kr)⁴/24 + ...
        assert_abs_diff_eq!(r.value, 5e-3, epsilon = 1e-5);
    }

    #[test]
    fn large_radius_leading_behaviour() {
        let r = integrate_modulation(1.0, 0.5, 100.0, &cfg()).unwrap();
        // r^ε/(2ε) = 10 up to a bounded correction
        assert!((r.value - 10.0).abs() < 1.0);
        assert!(r.error < 1e-10);
    }

    #[test]
    fn divergent_beta_rejected() {
        assert!(matches!(
            integrate_modulation(1.0, 3.0, 1.0, &cfg()),
            Err(Error::Divergent(_))
        ));
        assert!(matches!(
            integrate_modulation(1.0, -0.1, 1.0, &cfg()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn depth_cap_reports_accuracy_failure() {
        let shallow = QuadConfig {
            max_depth: 2,
            ..cfg()
        };
        // 1/sqrt without the substitution needs deep refinement at 0
        let r = integrate_generic(|z: f64| z.powf(-0.5), 0.0, 1.0, &shallow);
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }

    #[test]
    fn zero_width_modulation_is_zero() {
        let r = integrate_modulation(2.0, 0.5, 0.0, &cfg()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn without_presplit_still_converges() {
        let plain = QuadConfig {
            panel_per_halfperiod: false,
            ..cfg()
        };
        let a = integrate_modulation(1.0, 0.5, 30.0, &plain).unwrap().value;
        let b = integrate_modulation(1.0, 0.5, 30.0, &cfg()).unwrap().value;
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }
}

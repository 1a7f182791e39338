//! Numerov integration of the radial equation `χ'' = (V − k²) χ`.
//!
//! This is the independent check that the constructed χ really is the
//! regular solution at the positive energy `E = k²` of the constructed V.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    self, GridSpec, IntegralPath, ModelParams, Quantity, SampledFunction, Settings,
};

/// Running values are renormalized once they exceed this magnitude.
const RENORM_THRESHOLD: f64 = 1e150;

/// Steps per stage of the graded start.
const STARTUP_STEPS: usize = 128;
/// Step doublings between the first stage and the coarse grid.
const STARTUP_LEVELS: u32 = 30;

/// Numerov output. The true solution is `values[i] * exp(log_scale)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumerovSolution {
    pub values: Vec<f64>,
    pub log_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingResult {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// Least-squares factor `s` minimizing `Σ (s χ_num − χ_analytic)²`.
    pub scale_factor: f64,
    pub rel_l2_error: f64,
}

fn check_uniform(radii: &[f64]) -> Result<f64> {
    let h = radii[1] - radii[0];
    if !(h > 0.0)
        || radii
            .windows(2)
            .any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h + 64.0 * f64::EPSILON * w[1].abs())
    {
        return Err(Error::NonUniformGrid);
    }
    Ok(h)
}

/// Numerov recurrence from the pair `(y0, y1)` at the first two grid points,
/// in summed form on `u = w y`:
/// `u[n+1] = 2u[n] − u[n−1] + h²(V[n] − E) y[n]`, `w = 1 − h²(V − E)/12`.
/// With `y0 = 0` the weight of `potential[0]` is never formed.
fn march(potential: &[f64], h: f64, e: f64, y0: f64, y1: f64) -> Result<NumerovSolution> {
    let n = potential.len();
    if let Some(i) = potential[1..].iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!(
            "potential at grid point {}",
            i + 1
        )));
    }
    if y0 != 0.0 && !potential[0].is_finite() {
        return Err(Error::NonFinite("potential at grid point 0".into()));
    }
    let h2 = h * h;
    let w = |i: usize| 1.0 - h2 * (potential[i] - e) / 12.0;
    let mut y = vec![0.0; n];
    y[0] = y0;
    y[1] = y1;
    let mut u_prev = if y0 == 0.0 { 0.0 } else { w(0) * y0 };
    let mut u = w(1) * y1;
    let mut log_scale = 0.0;
    for i in 1..n - 1 {
        let u_next = 2.0 * u - u_prev + h2 * (potential[i] - e) * y[i];
        let next = u_next / w(i + 1);
        if !next.is_finite() {
            return Err(Error::NonFinite(format!("Numerov step {}", i + 1)));
        }
        y[i + 1] = next;
        u_prev = u;
        u = u_next;
        if next.abs() > RENORM_THRESHOLD {
            let factor = next.abs();
            for v in &mut y[..=i + 1] {
                *v /= factor;
            }
            u_prev /= factor;
            u /= factor;
            log_scale += factor.ln();
        }
    }
    Ok(NumerovSolution {
        values: y,
        log_scale,
    })
}

/// Integrate on a uniform grid starting at `r = 0` with `χ(0) = 0`,
/// `χ(h) = h`. The potential value at the origin is never used, so a
/// singular `V(0)` is harmless.
pub fn numerov_integrate_raw(radii: &[f64], potential: &[f64], k: f64) -> Result<NumerovSolution> {
    numerov_with_slope(radii, potential, k, 1.0)
}

/// As [`numerov_integrate_raw`] with `χ(h) = slope · h`.
pub fn numerov_with_slope(
    radii: &[f64],
    potential: &[f64],
    k: f64,
    slope: f64,
) -> Result<NumerovSolution> {
    let n = radii.len();
    if n < 2 || potential.len() != n {
        return Err(Error::Domain(
            "need matching radii and potential, at least 2 points".into(),
        ));
    }
    if radii[0] != 0.0 {
        return Err(Error::Domain(format!(
            "grid must start at r = 0, got {}",
            radii[0]
        )));
    }
    let h = check_uniform(radii)?;
    march(potential, h, k * k, 0.0, slope * h)
}

/// Integrate `χ'' = (V − k²)χ` against a sampled potential.
pub fn numerov_integrate(v: &SampledFunction, k: f64) -> Result<NumerovSolution> {
    if v.quantity != Quantity::Potential {
        return Err(Error::Domain(format!(
            "expected a sampled potential, got {}",
            v.quantity.label()
        )));
    }
    if !(k > 0.0) {
        return Err(Error::Domain(format!("k = {k} must be > 0")));
    }
    numerov_integrate_raw(&v.radii(), &v.values, k)
}

/// Sample V on the grid, leaving the origin at 0 when V is singular there.
pub fn sample_potential_for_numerov(p: &ModelParams, g: &GridSpec) -> Result<SampledFunction> {
    let values = g
        .radii()
        .enumerate()
        .map(|(i, r)| {
            if r == 0.0 {
                Ok(0.0)
            } else {
                model::potential(p, r).map_err(|e| e.at(i))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SampledFunction::new(*g, Quantity::Potential, values)
}

/// Numerov against a sampled V, started on a graded mesh evaluated directly
/// from the model.
///
/// The first stage takes `2K` steps of `h / 2^L` from the origin; each later
/// stage doubles the step and takes `K` more, which lands exactly on the
/// coarse point `2K h` with step `h`. Where V is singular at the origin χ is
/// not smooth there and a uniform start loses the order of the method.
pub fn numerov_refined_start(p: &ModelParams, v: &SampledFunction) -> Result<NumerovSolution> {
    let g = v.grid;
    let k_steps = STARTUP_STEPS;
    let join = 2 * k_steps;
    if g.n_points <= join + 1 || g.r_min != 0.0 {
        return numerov_integrate(v, p.k);
    }
    let h = g.spacing();
    let e = p.k * p.k;
    let unit = 1u64 << STARTUP_LEVELS;
    let h0 = h / unit as f64;

    // (tick, y, log scale) with r = tick · h0
    let mut staged: Vec<(u64, f64, f64)> = Vec::with_capacity(join * STARTUP_LEVELS as usize);
    let mut origin = 0u64;
    let mut carry = (0.0, h0);
    let mut log_scale = 0.0;
    for level in 0..=STARTUP_LEVELS {
        let stride = 1u64 << level;
        let steps = if level == 0 { join } else { k_steps };
        // the first point sits one step back when continuing a stage
        let first = if level == 0 { origin } else { origin - stride };
        let points = if level == 0 { steps + 1 } else { steps + 2 };
        let potential = (0..points)
            .map(|i| {
                let r = (first + i as u64 * stride) as f64 * h0;
                if r == 0.0 {
                    Ok(0.0)
                } else {
                    model::potential(p, r)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let stage = march(&potential, stride as f64 * h0, e, carry.0, carry.1)?;
        log_scale += stage.log_scale;
        for (i, y) in stage.values.iter().enumerate() {
            staged.push((first + i as u64 * stride, *y, log_scale));
        }
        let n = stage.values.len();
        // values two strides apart seed the doubled step; the coarse grid
        // keeps the last stride
        carry = if level == STARTUP_LEVELS {
            (stage.values[n - 2], stage.values[n - 1])
        } else {
            (stage.values[n - 3], stage.values[n - 1])
        };
        origin += steps as u64 * stride;
    }
    debug_assert_eq!(origin, join as u64 * unit);

    let tail = march(&v.values[join - 1..], h, e, carry.0, carry.1)?;
    let total = log_scale + tail.log_scale;
    let mut values = vec![0.0; join - 1];
    for &(tick, y, scale) in &staged {
        if tick % unit == 0 && ((tick / unit) as usize) < join - 1 {
            values[(tick / unit) as usize] = y * (scale - total).exp();
        }
    }
    values.extend_from_slice(&tail.values);
    Ok(NumerovSolution {
        values,
        log_scale: total,
    })
}

/// Path used for the analytic reference: the closed form where it exists.
pub fn default_path(p: &ModelParams) -> IntegralPath {
    if (0.0..=1.0).contains(&p.beta) {
        IntegralPath::ClosedForm
    } else {
        IntegralPath::Quadrature
    }
}

/// Least-squares scale and relative L2 mismatch of `numeric` against `reference`.
pub fn match_scale(numeric: &[f64], reference: &[f64]) -> Result<(f64, f64)> {
    let num_sq: f64 = numeric.iter().map(|x| x * x).sum();
    let cross: f64 = numeric.iter().zip(reference).map(|(x, y)| x * y).sum();
    let ref_sq: f64 = reference.iter().map(|y| y * y).sum();
    if !(num_sq > 0.0 && ref_sq > 0.0) {
        return Err(Error::Internal(
            "cannot match an identically zero solution".into(),
        ));
    }
    let s = cross / num_sq;
    let mismatch: f64 = numeric
        .iter()
        .zip(reference)
        .map(|(x, y)| (s * x - y).powi(2))
        .sum();
    Ok((s, (mismatch / ref_sq).sqrt()))
}

/// Integrate at `E = k²` and compare with the analytic χ after optimal scaling.
pub fn verify_eigenfunction(p: &ModelParams, g: &GridSpec) -> Result<ShootingResult> {
    verify_eigenfunction_with(p, g, &Settings::default())
}

pub fn verify_eigenfunction_with(
    p: &ModelParams,
    g: &GridSpec,
    settings: &Settings,
) -> Result<ShootingResult> {
    p.validate()?;
    if g.r_min != 0.0 {
        return Err(Error::Domain(
            "verification grid must start at r = 0".into(),
        ));
    }
    let v = sample_potential_for_numerov(p, g)?;
    let numeric = numerov_refined_start(p, &v)?;
    let analytic = model::sample(p, g, Quantity::Chi, default_path(p), settings)?;
    let (scale_factor, rel_l2_error) = match_scale(&numeric.values, &analytic.values)?;
    Ok(ShootingResult {
        grid: *g,
        values: numeric.values,
        scale_factor,
        rel_l2_error,
    })
}

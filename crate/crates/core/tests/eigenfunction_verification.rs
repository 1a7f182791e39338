use std::f64::consts::PI;

use vnw_core::model::{GridSpec, Quantity, SampledFunction};
use vnw_core::ode::{self, match_scale, numerov_integrate, sample_potential_for_numerov};
use vnw_core::{verify_eigenfunction, ModelParams};

fn free_error(h: f64) -> f64 {
    let g = GridSpec::from_step(20.0, h).unwrap();
    let v = SampledFunction::new(g, Quantity::Potential, vec![0.0; g.n_points]).unwrap();
    let sol = numerov_integrate(&v, 1.0).unwrap();
    let exact: Vec<f64> = g.radii().map(f64::sin).collect();
    match_scale(&sol.values, &exact).unwrap().1
}

#[test]
fn free_particle_is_fourth_order() {
    let hs = [0.04, 0.02, 0.01, 0.005];
    let errs: Vec<f64> = hs.iter().map(|&h| free_error(h)).collect();
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!(
        (3.5..=4.5).contains(&slope),
        "order {slope}, errors {errs:?}"
    );
}

#[test]
fn embedded_states_reproduced() {
    let g = GridSpec::from_step(60.0, 1e-3).unwrap();
    for (a, beta) in [(-1.0, 0.5), (-3.0, 1.0)] {
        let p = ModelParams::new(1.0, a, beta).unwrap();
        let res = verify_eigenfunction(&p, &g).unwrap();
        assert!(
            res.rel_l2_error <= 1e-5,
            "a={a} beta={beta}: {}",
            res.rel_l2_error
        );
        assert!(res.scale_factor != 0.0);
    }
}

#[test]
fn non_normalizable_states_still_solve_the_equation() {
    let g = GridSpec::from_step(60.0, 1e-3).unwrap();
    for (a, beta) in [(-1.0, 1.5), (-1.0, 2.5), (0.5, 0.5)] {
        let p = ModelParams::new(1.0, a, beta).unwrap();
        let res = verify_eigenfunction(&p, &g).unwrap();
        assert!(
            res.rel_l2_error <= 1e-5,
            "a={a} beta={beta}: {}",
            res.rel_l2_error
        );
    }
}

#[test]
fn numeric_nodes_sit_on_free_nodes() {
    let p = ModelParams::new(1.0, -1.0, 0.5).unwrap();
    let g = GridSpec::from_step(30.0, 1e-3).unwrap();
    let res = verify_eigenfunction(&p, &g).unwrap();
    let h = g.spacing();
    let mut found = 0;
    for i in 1..res.values.len() - 1 {
        if res.values[i].signum() != res.values[i + 1].signum() {
            let r = g.radius(i);
            let nearest = (r * p.k / PI).round() * PI / p.k;
            assert!((r - nearest).abs() <= h, "node at {r}");
            found += 1;
        }
    }
    assert_eq!(found, (30.0 / PI) as usize);
}

#[test]
fn detuned_energy_has_no_decaying_tail() {
    let p = ModelParams::new(1.0, -1.0, 0.5).unwrap();
    let g = GridSpec::from_step(60.0, 1e-3).unwrap();
    let v = sample_potential_for_numerov(&p, &g).unwrap();
    let radii = v.radii();
    let ln_tail = |k: f64| {
        let sol = ode::numerov_integrate_raw(&radii, &v.values, k).unwrap();
        let peak = radii
            .iter()
            .zip(&sol.values)
            .filter(|(r, _)| (40.0..=60.0).contains(*r))
            .map(|(_, y)| y.abs())
            .fold(0.0, f64::max);
        peak.ln() + sol.log_scale
    };
    let ratio = (ln_tail(1.1 * p.k) - ln_tail(p.k)).exp();
    assert!(ratio >= 1e3, "tail ratio {ratio}");
}

#[test]
fn doubling_initial_slope_doubles_solution() {
    let p = ModelParams::new(1.0, -1.0, 0.5).unwrap();
    let g = GridSpec::from_step(20.0, 1e-3).unwrap();
    let v = sample_potential_for_numerov(&p, &g).unwrap();
    let radii = v.radii();
    let unit = ode::numerov_with_slope(&radii, &v.values, p.k, 1.0).unwrap();
    let doubled = ode::numerov_with_slope(&radii, &v.values, p.k, 2.0).unwrap();
    for (x, y) in unit.values.iter().zip(&doubled.values) {
        assert_eq!(2.0 * x, *y);
    }
    let (s, err) = match_scale(&doubled.values, &unit.values).unwrap();
    assert_eq!(s, 0.5);
    assert_eq!(err, 0.0);
}

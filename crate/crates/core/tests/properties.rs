//! Randomized checks of the band solver, the stability bound and the
//! discretization order.

use proptest::prelude::*;
use selectrelax::analysis::fit_dx2;
use selectrelax::operator::{max_growth_factor_sq, StencilKind};
use selectrelax::oracle::{dense_penta_solve_oracle, tridiag_spectrum};
use selectrelax::{assemble, make_grid, observed_order, sample, stability_min_dt, PentaFactors, PentaSystem, Potential};

fn band(len: usize, values: &[f64]) -> Vec<f64> {
    values.iter().copied().cycle().take(len).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn band_solver_matches_dense_lu(
        n in 5usize..120,
        entries in prop::collection::vec(-1.0f64..1.0, 40),
        shift in 0.0f64..3.0,
    ) {
        let diag: Vec<f64> = band(n, &entries[0..8]).iter().map(|d| d + shift).collect();
        let sys = PentaSystem::from_bands(
            band(n - 2, &entries[8..16]),
            band(n - 1, &entries[16..24]),
            diag,
            band(n - 1, &entries[24..32]),
            band(n - 2, &entries[32..40]),
        ).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
        let (Ok(f), Ok(dense)) = (PentaFactors::factor(&sys), dense_penta_solve_oracle(&sys, &rhs)) else {
            return Ok(());
        };
        let x = f.solve(&rhs).unwrap();
        let r = sys.matvec(&x);
        let res = r.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = sys.norm_inf() * x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(res <= 1e-10 * scale.max(1.0), "residual {res:e}");
        let dense_scale = dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cond_hint = scale / rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if cond_hint < 1e6 {
            for (a, b) in x.iter().zip(&dense) {
                prop_assert!((a - b).abs() <= 1e-8 * dense_scale);
            }
        }
    }

    #[test]
    fn time_steps_above_the_bound_never_amplify(
        which in 0usize..3,
        param in 0.2f64..1.8,
        e_frac in -0.5f64..2.0,
        dx in 0.02f64..0.2,
        factor in 1.0f64..1e6,
    ) {
        let potential = match which {
            0 => Potential::morse(param),
            1 => Potential::double_well(3.0 * param),
            _ => Potential::harmonic(param),
        };
        let vmin = potential.minimum();
        let energy = vmin + e_frac * (1.0 + vmin.abs());
        let grid = make_grid(-3.0, 6.0, dx).unwrap();
        let samples = sample(&potential, &grid).unwrap();
        let bound = stability_min_dt(&samples, &grid, energy).unwrap();
        let dt = if bound > 0.0 { bound * factor } else { factor };
        let g = max_growth_factor_sq(&samples, &grid, energy, dt).unwrap();
        prop_assert!(g <= 1.0 + 1e-12, "growth {g} at dt {dt} (bound {bound})");
    }
}

#[test]
fn discretization_error_is_second_order() {
    let potential = Potential::harmonic(1.0);
    let dxs = [0.08, 0.04, 0.02, 0.01];
    let errors: Vec<f64> = dxs
        .iter()
        .map(|&dx| {
            let grid = make_grid(-9.0, 9.0, dx).unwrap();
            let s = sample(&potential, &grid).unwrap();
            (tridiag_spectrum(&s, &grid, 1).unwrap().eigenvalues[0] - 1.0).abs()
        })
        .collect();
    let order = observed_order(&dxs, &errors).unwrap();
    assert!((order - 2.0).abs() < 0.1, "order {order}");
}

#[test]
fn factored_stencil_approximates_the_squared_operator() {
    // (H - E)² g for a Gaussian, against the stencil on refined lattices
    let potential = Potential::harmonic(1.0);
    let energy = 1.5;
    let g = |x: f64| (-x * x).exp();
    // g'' = (4x² - 2)g, so (H - E)g = (2 - 3x² - E)g with V = x²
    let hg = |x: f64| (2.0 - 3.0 * x * x - energy) * g(x);
    let d2 = |f: &dyn Fn(f64) -> f64, x: f64, h: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    let exact = |x: f64| -d2(&hg, x, 1e-4) + (x * x - energy) * hg(x);
    let mut dxs = Vec::new();
    let mut errs = Vec::new();
    for dx in [0.1, 0.05, 0.025] {
        let grid = make_grid(-6.0, 6.0, dx).unwrap();
        let s = sample(&potential, &grid).unwrap();
        let coeffs = StencilKind::Factored.coefficients(&s, &grid, energy).unwrap();
        let xs = grid.interior_nodes();
        let psi: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
        let applied = coeffs.apply(&psi);
        let err = xs.iter().zip(&applied).filter(|(x, _)| x.abs() < 2.0).map(|(&x, &a)| (a - exact(x)).abs()).fold(0.0, f64::max);
        dxs.push(dx);
        errs.push(err);
    }
    let order = observed_order(&dxs, &errs).unwrap();
    assert!(order >= 1.0, "consistency order {order} from {errs:?}");
}

#[test]
fn assembled_system_solves_back() {
    let potential = Potential::double_well(4.0);
    let grid = make_grid(-3.0, 3.0, 0.01).unwrap();
    let s = sample(&potential, &grid).unwrap();
    for kind in [StencilKind::Analytic, StencilKind::Factored] {
        let coeffs = kind.coefficients(&s, &grid, -3.0).unwrap();
        let sys = assemble(&coeffs, 1e-3).unwrap();
        let f = PentaFactors::factor(&sys).unwrap();
        let x: Vec<f64> = grid.interior_nodes().iter().map(|x| (-x * x).exp()).collect();
        let back = f.solve(&sys.matvec(&x)).unwrap();
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn fit_recovers_synthetic_law() {
    let dx = [0.04, 0.02, 0.01, 0.005];
    let ys: Vec<f64> = dx.iter().map(|h| -0.81 + 3.5 * h * h).collect();
    let fit = fit_dx2(&dx, &ys).unwrap();
    assert!((fit.intercept + 0.81).abs() < 1e-13);
    assert!((fit.slope - 3.5).abs() < 1e-9);
}

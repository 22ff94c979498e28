//! Sweeps, scans and splittings end to end.

use selectrelax::oracle::{box_levels, morse_levels, tridiag_spectrum};
use selectrelax::{
    default_domain, dx_sweep, make_grid, sample, scan_spectrum, splitting, CubicSpline, Parity, Potential, RelaxConfig, SplitConfig,
    SweepJob,
};

#[test]
fn box_sweep_extrapolates_to_the_continuum_level() {
    let length = 2.0;
    let flat = CubicSpline::new(vec![0.0, 0.5, 1.0, 1.5, 2.0], vec![0.0; 5]).unwrap();
    let potential = Potential::Tabulated(flat);
    let exact = box_levels(length, 3);
    let mut config = RelaxConfig::new(exact[2] * 1.02, 0.02, (0.0, length));
    config.max_iter = 20;
    let job = SweepJob::Level { potential, config };
    let sweep = dx_sweep(&job, &[0.02, 0.01, 0.005, 0.0025]).unwrap();
    assert!(sweep.points.iter().all(|p| p.converged));
    let rel = (sweep.fit.intercept - exact[2]).abs() / exact[2];
    assert!(rel < 1e-6, "intercept {} vs {}", sweep.fit.intercept, exact[2]);
    // E_n(Δx) = (2/Δx²)(1 - cos(kΔx)) = k² - k⁴Δx²/12 + ...
    let k4 = exact[2] * exact[2];
    assert!((sweep.fit.slope + k4 / 12.0).abs() < 1e-2 * k4 / 12.0, "slope {}", sweep.fit.slope);
}

#[test]
fn harmonic_ground_state_converges_at_second_order() {
    let config = RelaxConfig::new(0.8, 0.04, (-9.0, 9.0));
    let job = SweepJob::Level { potential: Potential::harmonic(1.0), config };
    let sweep = dx_sweep(&job, &[0.04, 0.02, 0.01, 0.005]).unwrap();
    for order in sweep.orders.iter().flatten() {
        assert!((order - 2.0).abs() < 0.1, "{:?}", sweep.orders);
    }
    assert!(sweep.orders.iter().flatten().count() >= 2);
    assert!((sweep.fit.intercept - 1.0).abs() < 1e-6);
}

#[test]
fn morse_scan_finds_every_bound_level() {
    let potential = Potential::morse(0.2);
    let exact = morse_levels(0.2).unwrap();
    let domain = default_domain(&potential, *exact.last().unwrap()).unwrap();
    let mut template = RelaxConfig::new(-1.0, 2e-2, domain);
    template.max_iter = 40;
    let scan = scan_spectrum(&potential, &template, (-1.0, 0.0), 40, 1e-6).unwrap();
    let levels: Vec<f64> = scan.clusters.iter().map(|c| c.energy).filter(|&e| e < 0.0).collect();
    assert_eq!(levels.len(), 5, "{levels:?}");
    for (found, want) in levels.iter().zip(&exact) {
        assert!((found - want).abs() < 2e-3, "{found} vs {want}");
    }
    for w in scan.clusters.windows(2) {
        assert!(w[0].basin.1 <= w[1].basin.0 + 1e-12);
    }
}

#[test]
fn splitting_matches_the_oracle_doublet() {
    let lambda = 5.0;
    let dx = 5e-3;
    let result = splitting(&SplitConfig::new(lambda, dx)).unwrap();
    assert!(result.converged());
    assert_eq!(result.even.psi.grid().len(), result.odd.psi.grid().len());
    let (lo, hi) = result.domain;
    let grid = make_grid(lo, hi, dx).unwrap();
    let samples = sample(&Potential::double_well(lambda), &grid).unwrap();
    let oracle = tridiag_spectrum(&samples, &grid, 2).unwrap();
    let (e0, e1) = (oracle.eigenvalues[0], oracle.eigenvalues[1]);
    assert!((result.e0 - e0).abs() < 1e-9, "{} vs {e0}", result.e0);
    assert!((result.e1 - e1).abs() < 1e-9, "{} vs {e1}", result.e1);
    assert!(result.t_rel > 0.0);
    assert!(((result.t_rel - (e1 - e0)) / result.t_rel).abs() < 1e-5);
}

#[test]
fn odd_parity_selects_the_odd_member() {
    let mut config = RelaxConfig::new(-4.0, 5e-3, (-4.0, 4.0));
    config.parity = Parity::Odd;
    let odd = selectrelax::relax(&config, &Potential::double_well(5.0)).unwrap();
    config.parity = Parity::Even;
    let even = selectrelax::relax(&config, &Potential::double_well(5.0)).unwrap();
    assert!(odd.converged && even.converged);
    assert!(odd.energy > even.energy);
}

use std::path::Path;

use rayon::prelude::*;
use selectrelax::analysis::{fit_dx2, scan_spectrum, Cluster};
use selectrelax::oracle::morse_levels;
use selectrelax::{
    default_domain, dx_sweep, relax, splitting, EnergyGuess, LinearFit, Potential, RelaxConfig, RelaxResult, SplitConfig, SplitResult,
    SweepJob,
};

use crate::args::{Domain, ScanArgs, SolveArgs, SolverArgs, SplitArgs, SweepArgs};
use crate::error::CliError;
use crate::report::{psi_csv, Report, Table, Value};

/// A finished command: what to print, and whether every computation met its
/// convergence contract.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Domain for an automatic run that has to hold the level nearest to `e`.
///
/// The classically allowed region is taken at an energy safely above `e`;
/// for Morse wells it is capped at the highest bound level because the
/// allowed region becomes unbounded at the dissociation threshold.
pub fn auto_domain(potential: &Potential, e: f64) -> Result<(f64, f64), CliError> {
    let vmin = potential.minimum();
    let mut top = if e > vmin { vmin + 2.0 * (e - vmin) } else { vmin + (vmin - e).max(1.0) };
    if let Potential::Morse { mu } = potential {
        if let Some(&highest) = morse_levels(*mu)?.last() {
            top = top.min(highest);
        }
    }
    match (potential, default_domain(potential, top)) {
        (_, Ok(d)) => Ok(d),
        (Potential::Tabulated(s), Err(_)) => Ok((s.x_min(), s.x_max())),
        (_, Err(e)) => Err(e.into()),
    }
}

fn relax_config(energy: f64, dx: f64, domain: (f64, f64), solver: &SolverArgs) -> RelaxConfig {
    let mut cfg = RelaxConfig::new(energy, dx, domain);
    cfg.dt = solver.dt;
    cfg.max_iter = solver.max_iter;
    cfg.residual_tol = solver.tol;
    cfg.stencil = solver.stencil.into();
    cfg
}

fn resolve(domain: Domain, potential: &Potential, e: f64) -> Result<(f64, f64), CliError> {
    match domain {
        Domain::Range(lo, hi) => Ok((lo, hi)),
        Domain::Auto => auto_domain(potential, e),
    }
}

fn fit_table(fit: &LinearFit) -> Table {
    let mut t = Table::new("fit", &["intercept", "slope", "intercept_stderr", "slope_stderr", "rms_residual", "points"]);
    t.push(vec![
        fit.intercept.into(),
        fit.slope.into(),
        fit.intercept_stderr.into(),
        fit.slope_stderr.into(),
        fit.rms_residual.into(),
        fit.points.into(),
    ]);
    t
}

pub fn solve(args: &SolveArgs) -> Result<Outcome, CliError> {
    let potential = &args.potential.potential;
    let domain = resolve(args.domain, potential, args.energy)?;
    let mut cfg = relax_config(args.energy, args.dx, domain, &args.solver);
    cfg.parity = args.parity.into();
    let r = relax(&cfg, potential)?;

    let mut report = Report::new("solve");
    let mut result = Table::new(
        "result",
        &[
            "potential",
            "selecting_energy",
            "E_rel",
            "residual",
            "tolerance",
            "iterations",
            "converged",
            "dt_used",
            "stability_bound",
            "dx",
            "x_min",
            "x_max",
        ],
    );
    let grid = r.psi.grid();
    result.push(vec![
        args.potential.spec.as_str().into(),
        r.selecting_energy.into(),
        r.energy.into(),
        r.residual.into(),
        r.tolerance.into(),
        r.iterations.into(),
        r.converged.into(),
        r.dt_used.into(),
        r.stability_bound.into(),
        grid.dx().into(),
        grid.x_min().into(),
        grid.x_max().into(),
    ]);
    report.tables.push(result);
    report.tables.push(history_table(&r));

    if let Some(path) = &args.psi_out {
        let (x, psi): (Vec<f64>, Vec<f64>) = r.psi.with_boundary().into_iter().unzip();
        write_file(path, &psi_csv(&x, &psi))?;
    }
    let mut warnings = Vec::new();
    if !r.converged {
        warnings.push(format!("not converged after {} iterations (residual {:e})", r.iterations, r.residual));
    }
    Ok(Outcome { report, converged: r.converged, warnings })
}

fn history_table(r: &RelaxResult) -> Table {
    let mut t = Table::new("history", &["iteration", "E_rel", "residual", "step"]);
    for h in &r.history {
        t.push(vec![h.iteration.into(), h.energy.into(), h.residual.into(), h.step.into()]);
    }
    t
}

fn split_config(args: &SplitArgs, dx: f64) -> SplitConfig {
    let mut cfg = SplitConfig::new(args.lambda, dx);
    cfg.domain = match args.domain {
        Domain::Auto => None,
        Domain::Range(lo, hi) => Some((lo, hi)),
    };
    cfg.energy = args.energy.map_or(EnergyGuess::Auto, EnergyGuess::Value);
    cfg.dt = args.solver.dt;
    cfg.max_iter = args.solver.max_iter;
    cfg.residual_tol = args.solver.tol;
    cfg.stencil = args.solver.stencil.into();
    cfg
}

const SPLIT_COLUMNS: &[&str] = &[
    "lambda",
    "dx",
    "selecting_energy",
    "attempts",
    "E0",
    "E1",
    "T_rel",
    "residual_even",
    "residual_odd",
    "iterations_even",
    "iterations_odd",
    "converged",
    "x_min",
    "x_max",
];

fn split_row(r: &SplitResult) -> Vec<Value> {
    vec![
        r.lambda.into(),
        r.dx().into(),
        r.selecting_energy.into(),
        r.attempts.into(),
        r.e0.into(),
        r.e1.into(),
        r.t_rel.into(),
        r.even.residual.into(),
        r.odd.residual.into(),
        r.even.iterations.into(),
        r.odd.iterations.into(),
        r.converged().into(),
        r.domain.0.into(),
        r.domain.1.into(),
    ]
}

pub fn split(args: &SplitArgs) -> Result<Outcome, CliError> {
    let dxs: Vec<f64> = match (&args.dx, &args.dx_list) {
        (Some(dx), None) => vec![*dx],
        (None, Some(list)) if !list.is_empty() => list.clone(),
        _ => return Err(CliError::Usage("give either --dx or a non-empty --dx-list".into())),
    };
    if args.fit && args.dx_list.is_none() {
        return Err(CliError::Usage("--fit needs --dx-list".into()));
    }
    let mut results = dxs.par_iter().map(|&dx| splitting(&split_config(args, dx))).collect::<Result<Vec<_>, _>>()?;
    results.sort_by(|a, b| b.dx().total_cmp(&a.dx()));

    let mut report = Report::new("split");
    let mut table = Table::new("split", SPLIT_COLUMNS);
    for r in &results {
        table.push(split_row(r));
    }
    report.tables.push(table);

    let mut warnings = Vec::new();
    let mut converged = true;
    for r in results.iter().filter(|r| !r.converged()) {
        warnings.push(format!("dx = {:e}: doublet not converged (residuals {:e}, {:e})", r.dx(), r.even.residual, r.odd.residual));
        converged = false;
    }
    if args.fit {
        let good: Vec<&SplitResult> = results.iter().filter(|r| r.converged()).collect();
        if good.len() < 3 {
            warnings.push(format!("fit refused: {} converged points, at least 3 are required", good.len()));
            return Ok(Outcome { report, converged: false, warnings });
        }
        let dx: Vec<f64> = good.iter().map(|r| r.dx()).collect();
        let t: Vec<f64> = good.iter().map(|r| r.t_rel).collect();
        report.tables.push(fit_table(&fit_dx2(&dx, &t)?));
        // the fit is reported whenever it can be made
        converged = true;
    }
    Ok(Outcome { report, converged, warnings })
}

pub fn scan(args: &ScanArgs) -> Result<Outcome, CliError> {
    if args.points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    let potential = &args.potential.potential;
    let (lo, hi) = args.e_range;
    let domain = resolve(args.domain, potential, hi)?;
    let mut template = relax_config(lo, args.dx, domain, &args.solver);
    template.parity = args.parity.into();
    let scan = scan_spectrum(potential, &template, args.e_range, args.points, args.cluster_tol)?;

    let mut report = Report::new("scan");
    let mut points = Table::new("point", &["selecting_energy", "E_rel", "residual", "converged", "cluster"]);
    for p in &scan.points {
        points.push(vec![p.selecting_energy.into(), p.energy.into(), p.residual.into(), p.converged.into(), p.cluster.into()]);
    }
    let mut clusters = Table::new("cluster", &["cluster", "E_n", "basin_lo", "basin_hi", "members", "spread"]);
    for (i, c) in scan.clusters.iter().enumerate() {
        let Cluster { energy, basin, members, spread, .. } = c;
        clusters.push(vec![i.into(), (*energy).into(), basin.0.into(), basin.1.into(), (*members).into(), (*spread).into()]);
    }
    report.tables.push(points);
    report.tables.push(clusters);

    let mut warnings = Vec::new();
    let excluded = scan.excluded();
    if excluded > 0 {
        warnings.push(format!("{excluded} of {} scan points did not converge and were excluded", scan.points.len()));
    }
    Ok(Outcome { report, converged: scan.converged_fraction() >= 0.8, warnings })
}

pub fn sweep(args: &SweepArgs) -> Result<Outcome, CliError> {
    if args.dx_list.len() < 3 {
        return Err(CliError::Usage(format!("--dx-list needs at least 3 steps, got {}", args.dx_list.len())));
    }
    let potential = &args.potential.potential;
    let domain = resolve(args.domain, potential, args.energy)?;
    let mut config = relax_config(args.energy, args.dx_list[0], domain, &args.solver);
    config.parity = args.parity.into();
    let job = SweepJob::Level { potential: potential.clone(), config };
    let result = dx_sweep(&job, &args.dx_list)?;

    let mut report = Report::new("sweep");
    let mut points = Table::new("point", &["dx_requested", "dx", "E_rel", "residual", "iterations", "converged"]);
    for p in &result.points {
        points.push(vec![p.dx_requested.into(), p.dx.into(), p.value.into(), p.residual.into(), p.iterations.into(), p.converged.into()]);
    }
    report.tables.push(points);
    report.tables.push(fit_table(&result.fit));
    let mut orders = Table::new("order", &["dx", "order"]);
    for (p, order) in result.converged_points().zip(&result.orders) {
        orders.push(vec![p.dx.into(), (*order).into()]);
    }
    report.tables.push(orders);

    let warnings =
        result.points.iter().filter(|p| !p.converged).map(|p| format!("dx = {:e}: not converged, left out of the fit", p.dx)).collect();
    Ok(Outcome { report, converged: true, warnings })
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_domains_cover_the_wells() {
        let (lo, hi) = auto_domain(&Potential::harmonic(1.0), 0.5).unwrap();
        assert!(lo < -4.0 && hi > 4.0);
        let (lo, hi) = auto_domain(&Potential::morse(0.2), -0.04).unwrap();
        // E_4 = -0.01 turns around near x = 26.5
        assert!(lo < -3.0 && hi > 100.0, "{lo} {hi}");
        assert!(hi.is_finite());
        let (lo, hi) = auto_domain(&Potential::double_well(5.0), -5.0).unwrap();
        assert!(lo < -2.5 && hi > 2.5);
    }
}

//! Drivers built on [`relax`]: lattice-step sweeps with `a + b·Δx²` fits,
//! tunneling splittings of the quartic double well, Richardson
//! extrapolation, and energy scans that rebuild the spectrum.
//!
//! Sweep and scan points run in parallel on the current rayon pool and are
//! collected in input order, so results do not depend on the thread count.

use rayon::prelude::*;

use crate::grid::Wavefunction;
use crate::operator::StencilKind;
use crate::potentials::{default_domain, Potential};
use crate::relax::{relax, InitialState, Parity, RelaxConfig, RelaxResult, TimeStep, DEFAULT_MAX_ITER, DEFAULT_RESIDUAL_TOL};
use crate::{Error, Real, Result};

/// Default relative tolerance for grouping scan results into levels.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;
/// Absolute floor of the cluster tolerance, for levels near zero.
pub const CLUSTER_ABS_FLOOR: f64 = 1e-12;
/// Number of fallback selecting energies tried by [`splitting`].
pub const SPLIT_FALLBACKS: usize = 6;

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit<T> {
    pub intercept: T,
    pub slope: T,
    /// Root-mean-square of the fit residuals.
    pub rms_residual: T,
    /// Standard errors; zero when only two points were fitted.
    pub intercept_stderr: T,
    pub slope_stderr: T,
    pub points: usize,
}

/// Fits `y = a + b·x` by least squares on centered data.
pub fn fit_linear<T: Real>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { expected: xs.len(), got: ys.len() });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let nf = T::from_usize_lossy(n);
    let mx = xs.iter().copied().sum::<T>() / nf;
    let my = ys.iter().copied().sum::<T>() / nf;
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    if !(sxx > T::zero()) {
        return Err(Error::DegenerateSteps("all abscissae coincide".into()));
    }
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: T = xs.iter().zip(ys).map(|(&x, &y)| (y - intercept - slope * x).powi(2)).sum();
    let (intercept_stderr, slope_stderr) = if n > 2 {
        let s2 = ssr / T::from_usize_lossy(n - 2);
        let sx2: T = xs.iter().map(|&x| x * x).sum();
        ((s2 * sx2 / (nf * sxx)).sqrt(), (s2 / sxx).sqrt())
    } else {
        (T::zero(), T::zero())
    };
    Ok(LinearFit { intercept, slope, rms_residual: (ssr / nf).sqrt(), intercept_stderr, slope_stderr, points: n })
}

/// Fits `y = a + b·Δx²`.
pub fn fit_dx2<T: Real>(dx: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    let x2: Vec<T> = dx.iter().map(|&d| d * d).collect();
    fit_linear(&x2, ys)
}

/// Extrapolates `y(Δx)` to `Δx = 0` assuming a `Δx²` leading error.
///
/// Two points use the closed-form elimination; more points fall back to the
/// intercept of [`fit_dx2`].
pub fn richardson<T: Real>(points: &[(T, T)]) -> Result<T> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: points.len() });
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::DegenerateSteps(format!("repeated step {}", a.0)));
        }
    }
    if let [(d1, y1), (d2, y2)] = points {
        let (s1, s2) = (*d1 * *d1, *d2 * *d2);
        return Ok((*y2 * s1 - *y1 * s2) / (s1 - s2));
    }
    let (dx, ys): (Vec<T>, Vec<T>) = points.iter().copied().unzip();
    Ok(fit_dx2(&dx, &ys)?.intercept)
}

/// Slope of `log|error|` against `log Δx`.
pub fn observed_order<T: Real>(dx: &[T], errors: &[T]) -> Result<T> {
    let lx: Vec<T> = dx.iter().map(|d| d.ln()).collect();
    let ly: Vec<T> = errors.iter().map(|e| e.abs().ln()).collect();
    if ly.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("errors must be nonzero to measure an order".into()));
    }
    Ok(fit_linear(&lx, &ly)?.slope)
}

/// Order `p` of `y = a + b·Δx^p` through three consecutive points, without
/// knowing `a`. `None` when the differences change sign or no `p` in
/// `[0.1, 10]` fits.
pub fn three_point_order<T: Real>(p1: (T, T), p2: (T, T), p3: (T, T)) -> Option<T> {
    let target = (p1.1 - p2.1) / (p2.1 - p3.1);
    if !(target.is_finite() && target > T::zero()) {
        return None;
    }
    let ratio = |p: T| (p1.0.powf(p) - p2.0.powf(p)) / (p2.0.powf(p) - p3.0.powf(p)) - target;
    let (mut lo, mut hi) = (T::lit(0.1), T::lit(10.0));
    let (flo, fhi) = (ratio(lo), ratio(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if ratio(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) / T::lit(2.0))
}

/// Selecting energy for [`splitting`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum EnergyGuess<T> {
    /// Ground level of the harmonic approximation to one well,
    /// `-λ²/4 + sqrt(2λ)`.
    #[default]
    Auto,
    Value(T),
}

/// Parameters of a double-well splitting run.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitConfig<T> {
    pub lambda: T,
    pub dx: T,
    /// Symmetric domain; derived from the potential when absent.
    pub domain: Option<(T, T)>,
    pub energy: EnergyGuess<T>,
    pub dt: TimeStep<T>,
    pub max_iter: usize,
    pub residual_tol: T,
    pub stencil: StencilKind,
}

impl<T: Real> SplitConfig<T> {
    pub fn new(lambda: T, dx: T) -> Self {
        Self {
            lambda,
            dx,
            domain: None,
            energy: EnergyGuess::Auto,
            dt: TimeStep::Auto,
            max_iter: DEFAULT_MAX_ITER,
            residual_tol: T::lit(DEFAULT_RESIDUAL_TOL),
            stencil: StencilKind::default(),
        }
    }

    /// Harmonic estimate of the doublet energy.
    pub fn auto_energy(&self) -> T {
        let l = self.lambda;
        -l * l / T::lit(4.0) + (T::lit(2.0) * l).sqrt()
    }

    /// Domain used when none is given: turning points two local quanta
    /// above the harmonic estimate, padded into the forbidden region.
    pub fn auto_domain(&self) -> Result<(T, T)> {
        let e_max = self.auto_energy() + T::lit(2.0) * (T::lit(2.0) * self.lambda).sqrt();
        let (lo, hi) = default_domain(&Potential::double_well(self.lambda), e_max)?;
        let half = lo.abs().max(hi.abs());
        Ok((-half, half))
    }
}

#[derive(Clone, Debug)]
pub struct SplitResult<T> {
    pub lambda: T,
    pub selecting_energy: T,
    pub domain: (T, T),
    /// Even-parity (ground) and odd-parity relaxed energies.
    pub e0: T,
    pub e1: T,
    /// `E1 - E0`, formed from the energy offsets of both runs.
    pub t_rel: T,
    pub even: RelaxResult<T>,
    pub odd: RelaxResult<T>,
    /// Selecting energies tried before this one was accepted.
    pub attempts: usize,
}

impl<T: Real> SplitResult<T> {
    pub fn converged(&self) -> bool {
        self.even.converged && self.odd.converged
    }

    /// Lattice step actually used.
    pub fn dx(&self) -> T {
        self.even.psi.grid().dx()
    }
}

fn sign_changes<T: Real>(psi: &Wavefunction<T>) -> usize {
    // ignore the exponentially small tails where rounding flips signs
    let peak = psi.values().iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = T::lit(1e-8) * peak;
    let mut last = T::zero();
    let mut count = 0;
    for &v in psi.values() {
        if v.abs() <= floor {
            continue;
        }
        if last != T::zero() && (v > T::zero()) != (last > T::zero()) {
            count += 1;
        }
        last = v;
    }
    count
}

/// Lowest doublet of `V = -λx² + x⁴` from two parity-selected relaxations
/// at one selecting energy.
///
/// A result is accepted when both runs converge and the even (odd) state has
/// no (exactly one) node. Otherwise the selecting energy is moved toward the
/// bottom of the wells by bisection on `[min V, 0]`.
pub fn splitting<T: Real>(config: &SplitConfig<T>) -> Result<SplitResult<T>> {
    let lambda = config.lambda;
    let potential = Potential::double_well(lambda);
    potential.validate()?;
    let domain = match config.domain {
        Some(d) => d,
        None => config.auto_domain()?,
    };
    let center = (lambda / T::lit(2.0)).sqrt();
    // width of the local harmonic ground state, V'' = 4λ at the minima
    let width = (T::lit(2.0) * lambda).powf(T::lit(-0.25));
    let run = |energy: T| -> Result<SplitResult<T>> {
        let mut cfg = RelaxConfig::new(energy, config.dx, domain);
        cfg.dt = config.dt;
        cfg.max_iter = config.max_iter;
        cfg.residual_tol = config.residual_tol;
        cfg.stencil = config.stencil;
        cfg.init = InitialState::ParityGaussianPair { center, width };
        cfg.parity = Parity::Even;
        let even = relax(&cfg, &potential)?;
        cfg.parity = Parity::Odd;
        let odd = relax(&cfg, &potential)?;
        Ok(SplitResult {
            lambda,
            selecting_energy: energy,
            domain,
            e0: even.energy,
            e1: odd.energy,
            t_rel: odd.energy_offset - even.energy_offset,
            even,
            odd,
            attempts: 0,
        })
    };
    let acceptable = |r: &SplitResult<T>| r.converged() && sign_changes(&r.even.psi) == 0 && sign_changes(&r.odd.psi) == 1;

    let first_energy = match config.energy {
        EnergyGuess::Auto => config.auto_energy(),
        EnergyGuess::Value(e) => e,
    };
    let floor = potential.minimum();
    let mut first = run(first_energy)?;
    if acceptable(&first) {
        return Ok(first);
    }
    let mut hi = T::zero().min(first_energy).max(floor);
    for attempt in 1..=SPLIT_FALLBACKS {
        let energy = (floor + hi) / T::lit(2.0);
        let mut candidate = run(energy)?;
        if acceptable(&candidate) {
            candidate.attempts = attempt;
            return Ok(candidate);
        }
        hi = energy;
    }
    first.attempts = SPLIT_FALLBACKS;
    Ok(first)
}

/// What a lattice-step sweep computes at every step.
#[derive(Clone, Debug)]
pub enum SweepJob<T> {
    /// A single relaxed level; the config's `dx` is replaced per point.
    Level { potential: Potential<T>, config: RelaxConfig<T> },
    /// A double-well splitting; the config's `dx` is replaced per point.
    Splitting(SplitConfig<T>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint<T> {
    /// Requested and adjusted lattice steps.
    pub dx_requested: T,
    pub dx: T,
    /// Relaxed energy or splitting.
    pub value: T,
    pub converged: bool,
    /// Worst residual among the underlying relaxations.
    pub residual: T,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct SweepResult<T> {
    /// One entry per step, ordered by decreasing `dx`.
    pub points: Vec<SweepPoint<T>>,
    /// Fit of the converged points against `Δx²`.
    pub fit: LinearFit<T>,
    /// Three-point orders of consecutive converged points.
    pub orders: Vec<Option<T>>,
}

impl<T: Real> SweepResult<T> {
    pub fn converged_points(&self) -> impl Iterator<Item = &SweepPoint<T>> {
        self.points.iter().filter(|p| p.converged)
    }
}

fn sweep_point<T: Real>(job: &SweepJob<T>, dx: T) -> Result<SweepPoint<T>> {
    match job {
        SweepJob::Level { potential, config } => {
            let mut cfg = config.clone();
            cfg.dx = dx;
            let r = relax(&cfg, potential)?;
            Ok(SweepPoint {
                dx_requested: dx,
                dx: r.psi.grid().dx(),
                value: r.energy,
                converged: r.converged,
                residual: r.residual,
                iterations: r.iterations,
            })
        }
        SweepJob::Splitting(split) => {
            let mut cfg = split.clone();
            cfg.dx = dx;
            let r = splitting(&cfg)?;
            Ok(SweepPoint {
                dx_requested: dx,
                dx: r.dx(),
                value: r.t_rel,
                converged: r.converged(),
                residual: r.even.residual.max(r.odd.residual),
                iterations: r.even.iterations.max(r.odd.iterations),
            })
        }
    }
}

/// Runs `job` at every step in `dx_list` and fits the converged values
/// against `Δx²`. At least three converged points are required.
pub fn dx_sweep<T: Real>(job: &SweepJob<T>, dx_list: &[T]) -> Result<SweepResult<T>> {
    if dx_list.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: dx_list.len() });
    }
    let mut points = dx_list.par_iter().map(|&dx| sweep_point(job, dx)).collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| b.dx.partial_cmp(&a.dx).unwrap_or(std::cmp::Ordering::Equal));
    if points.windows(2).any(|w| w[0].dx == w[1].dx) {
        return Err(Error::DegenerateSteps("two requested steps give the same lattice".into()));
    }
    let good: Vec<&SweepPoint<T>> = points.iter().filter(|p| p.converged).collect();
    if good.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: good.len() });
    }
    let dx: Vec<T> = good.iter().map(|p| p.dx).collect();
    let ys: Vec<T> = good.iter().map(|p| p.value).collect();
    let fit = fit_dx2(&dx, &ys)?;
    let orders = good.windows(3).map(|w| three_point_order((w[0].dx, w[0].value), (w[1].dx, w[1].value), (w[2].dx, w[2].value))).collect();
    Ok(SweepResult { points, fit, orders })
}

#[derive(Clone, Debug)]
pub struct ScanPoint<T> {
    pub selecting_energy: T,
    pub energy: T,
    pub residual: T,
    pub converged: bool,
    /// Index into [`ScanResult::clusters`]; `None` for excluded points.
    pub cluster: Option<usize>,
}

/// One level recovered by a scan.
#[derive(Clone, Debug)]
pub struct Cluster<T> {
    /// Relaxed energy of the member with the smallest residual.
    pub energy: T,
    /// Smallest and largest scan energies that relaxed to this level.
    pub basin: (T, T),
    pub members: usize,
    /// Largest deviation of a member's energy from `energy`.
    pub spread: T,
    pub psi: Wavefunction<T>,
}

#[derive(Clone, Debug)]
pub struct ScanResult<T> {
    /// In order of increasing selecting energy.
    pub points: Vec<ScanPoint<T>>,
    /// Sorted by energy.
    pub clusters: Vec<Cluster<T>>,
}

impl<T: Real> ScanResult<T> {
    pub fn excluded(&self) -> usize {
        self.points.iter().filter(|p| !p.converged).count()
    }

    pub fn converged_fraction(&self) -> T {
        T::from_usize_lossy(self.points.len() - self.excluded()) / T::from_usize_lossy(self.points.len())
    }
}

/// Scan energies `lo + (hi - lo)(i + ½)/n`, `i = 0..n`.
pub fn scan_energies<T: Real>(range: (T, T), n: usize) -> Vec<T> {
    let (lo, hi) = range;
    (0..n).map(|i| lo + (hi - lo) * (T::from_usize_lossy(i) + T::lit(0.5)) / T::from_usize_lossy(n)).collect()
}

/// Relaxes at `n_points` selecting energies across `range` (using `template`
/// for everything but the energy) and groups the converged results into
/// levels whose energies agree to `cluster_tol` relative.
pub fn scan_spectrum<T: Real>(
    potential: &Potential<T>,
    template: &RelaxConfig<T>,
    range: (T, T),
    n_points: usize,
    cluster_tol: T,
) -> Result<ScanResult<T>> {
    if !(range.0 < range.1) {
        return Err(Error::InvalidConfig(format!("scan range must satisfy lo < hi, got ({}, {})", range.0, range.1)));
    }
    if n_points == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if !(cluster_tol >= T::zero()) {
        return Err(Error::InvalidConfig(format!("cluster tolerance must be non-negative, got {cluster_tol}")));
    }
    let energies = scan_energies(range, n_points);
    let runs = energies
        .par_iter()
        .map(|&e| {
            let mut cfg = template.clone();
            cfg.energy = e;
            relax(&cfg, potential)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..runs.len()).filter(|&i| runs[i].converged).collect();
    order.sort_by(|&a, &b| runs[a].energy.partial_cmp(&runs[b].energy).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let close = |a: T, b: T| (a - b).abs() <= (cluster_tol * a.abs().max(b.abs())).max(T::lit(CLUSTER_ABS_FLOOR));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match groups.last_mut() {
            Some(g) if close(runs[g[0]].energy, runs[i].energy) => g.push(i),
            _ => groups.push(vec![i]),
        }
    }

    let mut assignment = vec![None; runs.len()];
    let clusters = groups
        .iter()
        .enumerate()
        .map(|(id, members)| {
            let best = *members
                .iter()
                .min_by(|&&a, &&b| runs[a].residual.partial_cmp(&runs[b].residual).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)))
                .expect("non-empty cluster");
            let energy = runs[best].energy;
            let mut basin = (T::infinity(), T::neg_infinity());
            let mut spread = T::zero();
            for &m in members {
                assignment[m] = Some(id);
                basin = (basin.0.min(energies[m]), basin.1.max(energies[m]));
                spread = spread.max((runs[m].energy - energy).abs());
            }
            Cluster { energy, basin, members: members.len(), spread, psi: runs[best].psi.clone() }
        })
        .collect();

    let points = runs
        .iter()
        .zip(&energies)
        .zip(assignment)
        .map(|((r, &e), cluster)| ScanPoint {
            selecting_energy: e,
            energy: r.energy,
            residual: r.residual,
            converged: r.converged,
            cluster,
        })
        .collect();
    Ok(ScanResult { points, clusters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_linear_model_recovered() {
        let dx = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = dx.iter().map(|d| 2.5 - 3.0 * d * d).collect();
        let fit = fit_dx2(&dx, &ys).unwrap();
        assert_relative_eq!(fit.intercept, 2.5, epsilon = 1e-12);
        assert_relative_eq!(fit.slope, -3.0, epsilon = 1e-12);
        assert!(fit.rms_residual < 1e-12);
        assert!(fit_dx2(&[0.1], &[1.0]).is_err());
        assert!(matches!(fit_dx2(&[0.1, 0.1], &[1.0, 2.0]), Err(Error::DegenerateSteps(_))));
    }

    #[test]
    fn richardson_examples() {
        let y = |d: f64| -0.01 + 0.7 * d * d;
        assert_eq!(richardson(&[(2e-3, y(2e-3)), (1e-3, y(1e-3))]).unwrap(), -0.01);
        let three = [(0.1, y(0.1)), (0.05, y(0.05)), (0.02, y(0.02))];
        assert_relative_eq!(richardson(&three).unwrap(), -0.01, epsilon = 1e-14);
        assert!(matches!(richardson(&[(0.1, 1.0)]), Err(Error::TooFewPoints { .. })));
        assert!(matches!(richardson(&[(0.1, 1.0), (0.1, 2.0)]), Err(Error::DegenerateSteps(_))));
    }

    #[test]
    fn orders_of_power_laws() {
        let dx = [0.08, 0.04, 0.02, 0.01];
        let err: Vec<f64> = dx.iter().map(|d| 3.0 * d * d).collect();
        assert_relative_eq!(observed_order(&dx, &err).unwrap(), 2.0, epsilon = 1e-12);
        let y = |d: f64| 1.0 + 2.0 * d.powf(1.5);
        let p = three_point_order((0.4, y(0.4)), (0.2, y(0.2)), (0.1, y(0.1))).unwrap();
        assert_relative_eq!(p, 1.5, epsilon = 1e-9);
        assert!(three_point_order((0.4, 1.0), (0.2, 2.0), (0.1, 1.0)).is_none());
    }

    #[test]
    fn scan_energies_are_cell_centers() {
        assert_eq!(scan_energies((0.0, 4.0), 4), vec![0.5, 1.5, 2.5, 3.5]);
        assert_eq!(scan_energies((-1.0, 1.0), 1), vec![0.0]);
    }

    #[test]
    fn harmonic_scan_finds_odd_integers() {
        let template = RelaxConfig::<f64>::new(0.0, 0.02, (-8.0, 8.0));
        let scan = scan_spectrum(&Potential::<f64>::harmonic(1.0), &template, (0.0, 10.0), 20, 1e-6).unwrap();
        let levels: Vec<f64> = scan.clusters.iter().map(|c| c.energy).collect();
        assert_eq!(levels.len(), 5, "{levels:?}");
        for (e, want) in levels.iter().zip([1.0, 3.0, 5.0, 7.0, 9.0]) {
            assert!((e - want).abs() < 1e-2);
        }
        // points close to a basin edge relax slowly and miss the 10-step budget
        assert!(scan.excluded() < scan.points.len() / 2);
        // basins are ordered and disjoint
        assert!(scan.clusters.windows(2).all(|w| w[0].basin.1 < w[1].basin.0));
    }

    #[test]
    fn scan_below_ground_state_gives_one_level() {
        let mut template = RelaxConfig::<f64>::new(0.0, 0.02, (-8.0, 8.0));
        template.max_iter = 60;
        let scan = scan_spectrum(&Potential::<f64>::harmonic(1.0), &template, (-3.0, 1.5), 6, 1e-6).unwrap();
        assert_eq!(scan.excluded(), 0);
        assert_eq!(scan.clusters.len(), 1);
        assert_eq!(scan.clusters[0].members, 6);
    }

    #[test]
    fn splitting_small_lambda() {
        let mut cfg = SplitConfig::<f64>::new(1.0, 0.01);
        cfg.domain = Some((-6.0, 6.0));
        let r = splitting(&cfg).unwrap();
        assert!(r.converged());
        assert!((r.t_rel - 2.1769).abs() < 2e-3, "{}", r.t_rel);
        assert_relative_eq!(r.t_rel, r.e1 - r.e0, epsilon = 1e-12);
    }

    #[test]
    fn sweep_needs_three_steps() {
        let job = SweepJob::Level { potential: Potential::<f64>::harmonic(1.0), config: RelaxConfig::<f64>::new(0.9, 0.1, (-8.0, 8.0)) };
        assert!(matches!(dx_sweep(&job, &[0.1, 0.05]), Err(Error::TooFewPoints { needed: 3, got: 2 })));
    }
}

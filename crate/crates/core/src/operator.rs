//! The pentadiagonal relaxation matrix `R = I + Δt·M`, where `M` is a
//! five-point discretization of `(H - E)²` with Dirichlet boundaries, and the
//! von Neumann growth factor of the implicit step.
//!
//! Row `j` of `M` reads
//!
//! ```text
//! (Mψ)_j = γ ψ_{j+2} + β⁻_j ψ_{j+1} + α_j ψ_j + β⁺_j ψ_{j-1} + γ ψ_{j-2}
//! ```
//!
//! with ghost values `ψ_{-1} = ψ_0 = ψ_{J+1} = ψ_{J+2} = 0`.

use crate::grid::Grid;
use crate::potentials::PotentialSamples;
use crate::{Error, Real, Result};

/// Number of `kΔx` samples in `(0, π]` used by the stability diagnostic.
pub const STABILITY_K_SAMPLES: usize = 1024;

/// How the cross terms of `(H - E)²` are discretized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum StencilKind {
    /// Coefficients written directly in terms of `V_j`, `V′_j` and `V″_j`:
    ///
    /// ```text
    /// γ   = 1/Δx⁴
    /// β±_j = -4/Δx⁴ + (2/Δx²)(E - V_j) ± V′_j/Δx
    /// α_j = 6/Δx⁴ - (4/Δx²)(E - V_j) + (E - V_j)² - V″_j
    /// ```
    Analytic,
    /// The exact square of the three-point `H - E`. Its eigenvectors are
    /// those of the three-point Hamiltonian, so relaxed states can be
    /// certified by the Hamiltonian residual.
    #[default]
    Factored,
}

impl StencilKind {
    pub fn coefficients<T: Real>(self, samples: &PotentialSamples<T>, grid: &Grid<T>, energy: T) -> Result<StencilCoeffs<T>> {
        match self {
            Self::Analytic => stencil(samples, grid, energy),
            Self::Factored => factored_stencil(samples, grid, energy),
        }
    }
}

/// Five-point coefficients of `M`. `beta_minus[j]` multiplies `ψ_{j+1}` and
/// `beta_plus[j]` multiplies `ψ_{j-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StencilCoeffs<T> {
    gamma: T,
    beta_minus: Vec<T>,
    beta_plus: Vec<T>,
    alpha: Vec<T>,
    energy: T,
}

impl<T: Real> StencilCoeffs<T> {
    /// Selecting energy the coefficients were built for.
    pub fn energy(&self) -> T {
        self.energy
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn beta_minus(&self) -> &[T] {
        &self.beta_minus
    }

    pub fn beta_plus(&self) -> &[T] {
        &self.beta_plus
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `Mψ` evaluated straight from the stencil with ghost zeros.
    pub fn apply(&self, psi: &[T]) -> Vec<T> {
        let n = self.len();
        assert_eq!(psi.len(), n);
        let at = |i: isize| if i < 0 || i >= n as isize { T::zero() } else { psi[i as usize] };
        (0..n)
            .map(|j| {
                let i = j as isize;
                self.gamma * at(i + 2)
                    + self.beta_minus[j] * at(i + 1)
                    + self.alpha[j] * psi[j]
                    + self.beta_plus[j] * at(i - 1)
                    + self.gamma * at(i - 2)
            })
            .collect()
    }
}

/// Stencil coefficients from the potential and its analytic derivatives
/// ([`StencilKind::Analytic`]).
pub fn stencil<T: Real>(samples: &PotentialSamples<T>, grid: &Grid<T>, energy: T) -> Result<StencilCoeffs<T>> {
    samples.check_grid(grid)?;
    let dx = grid.dx();
    let dx2 = dx * dx;
    let gamma = (dx2 * dx2).recip();
    let (four, six, two) = (T::lit(4.0), T::lit(6.0), T::lit(2.0));
    let n = samples.len();
    let (mut beta_minus, mut beta_plus, mut alpha) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for j in 0..n {
        let w = energy - samples.values()[j];
        let slope = samples.first_derivative()[j] / dx;
        let common = -four * gamma + two * w / dx2;
        beta_minus.push(common - slope);
        beta_plus.push(common + slope);
        alpha.push(six * gamma - four * w / dx2 + w * w - samples.second_derivative()[j]);
    }
    Ok(StencilCoeffs { gamma, beta_minus, beta_plus, alpha, energy })
}

/// Stencil coefficients of `(H_d - E)²` with `H_d` the three-point
/// Hamiltonian ([`StencilKind::Factored`]).
///
/// Equivalent to the analytic stencil with `V′` replaced by one-sided
/// differences and `V″` absorbed into them; the first and last rows lose the
/// `1/Δx⁴` contribution of their missing neighbour.
pub fn factored_stencil<T: Real>(samples: &PotentialSamples<T>, grid: &Grid<T>, energy: T) -> Result<StencilCoeffs<T>> {
    samples.check_grid(grid)?;
    let dx = grid.dx();
    let inv_dx2 = (dx * dx).recip();
    let gamma = inv_dx2 * inv_dx2;
    let two = T::lit(2.0);
    let diag: Vec<T> = samples.values().iter().map(|&v| two * inv_dx2 + v - energy).collect();
    let n = diag.len();
    let beta_minus = (0..n).map(|j| -(diag[j] + diag[(j + 1).min(n - 1)]) * inv_dx2).collect();
    let beta_plus = (0..n).map(|j| -(diag[j] + diag[j.saturating_sub(1)]) * inv_dx2).collect();
    let alpha = (0..n)
        .map(|j| {
            let neighbours = if j == 0 || j == n - 1 { T::one() } else { two };
            diag[j] * diag[j] + neighbours * gamma
        })
        .collect();
    Ok(StencilCoeffs { gamma, beta_minus, beta_plus, alpha, energy })
}

/// Banded storage of `R`. Off-diagonal bands are stored by row offset:
/// `sub1[i-1] = R[i][i-1]`, `sup1[i] = R[i][i+1]`, and likewise for the
/// second bands.
#[derive(Clone, Debug, PartialEq)]
pub struct PentaSystem<T> {
    sub2: Vec<T>,
    sub1: Vec<T>,
    diag: Vec<T>,
    sup1: Vec<T>,
    sup2: Vec<T>,
    dt: Option<T>,
    energy: Option<T>,
}

/// `R_ii = 1 + Δt·α_i`, `R_{i,i±1} = Δt·β∓_i`, `R_{i,i±2} = Δt·γ`.
pub fn assemble<T: Real>(coeffs: &StencilCoeffs<T>, dt: T) -> Result<PentaSystem<T>> {
    if !(dt >= T::zero() && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("time step must be finite and non-negative, got {dt}")));
    }
    let n = coeffs.len();
    let diag = coeffs.alpha.iter().map(|&a| T::one() + dt * a).collect();
    let sup1 = coeffs.beta_minus[..n - 1].iter().map(|&b| dt * b).collect();
    let sub1 = coeffs.beta_plus[1..].iter().map(|&b| dt * b).collect();
    let band2 = vec![dt * coeffs.gamma; n - 2];
    let mut system = PentaSystem::from_bands(band2.clone(), sub1, diag, sup1, band2)?;
    system.dt = Some(dt);
    system.energy = Some(coeffs.energy);
    Ok(system)
}

impl<T: Real> PentaSystem<T> {
    /// Builds a system from explicit bands; lengths must be `n-2, n-1, n, n-1, n-2`.
    pub fn from_bands(sub2: Vec<T>, sub1: Vec<T>, diag: Vec<T>, sup1: Vec<T>, sup2: Vec<T>) -> Result<Self> {
        let n = diag.len();
        if n < 3 {
            return Err(Error::TooFewPoints { needed: 3, got: n });
        }
        for (band, want) in [(&sub2, n - 2), (&sub1, n - 1), (&sup1, n - 1), (&sup2, n - 2)] {
            if band.len() != want {
                return Err(Error::LengthMismatch { expected: want, got: band.len() });
            }
        }
        Ok(Self { sub2, sub1, diag, sup1, sup2, dt: None, energy: None })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn sub1(&self) -> &[T] {
        &self.sub1
    }

    pub fn sub2(&self) -> &[T] {
        &self.sub2
    }

    pub fn sup1(&self) -> &[T] {
        &self.sup1
    }

    pub fn sup2(&self) -> &[T] {
        &self.sup2
    }

    pub fn dt(&self) -> Option<T> {
        self.dt
    }

    pub fn energy(&self) -> Option<T> {
        self.energy
    }

    /// Entry `R[i][j]`, zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> T {
        match j as isize - i as isize {
            0 => self.diag[i],
            1 => self.sup1[i],
            2 => self.sup2[i],
            -1 => self.sub1[j],
            -2 => self.sub2[j],
            _ => T::zero(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i >= 1 {
                    acc = acc + self.sub1[i - 1] * x[i - 1];
                }
                if i >= 2 {
                    acc = acc + self.sub2[i - 2] * x[i - 2];
                }
                if i + 1 < n {
                    acc = acc + self.sup1[i] * x[i + 1];
                }
                if i + 2 < n {
                    acc = acc + self.sup2[i] * x[i + 2];
                }
                acc
            })
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.len())
            .map(|i| (i.saturating_sub(2)..(i + 3).min(self.len())).fold(T::zero(), |s, j| s + self.get(i, j).abs()))
            .fold(T::zero(), T::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }
}

/// Fourier symbol `(a, b)` of the implicit step for one lattice site, so that
/// `|ξ^{m+1}/ξ^m|² = 1/|1 + (a + ib)Δt|²`.
///
/// `w = V_j - E` and `theta = kΔx`.
pub fn von_neumann_symbol<T: Real>(w: T, dv: T, d2v: T, dx: T, theta: T) -> (T, T) {
    let s = (theta / T::lit(2.0)).sin();
    let shifted = w + T::lit(4.0) * s * s / (dx * dx);
    // (V-E)² + 8(V-E)s²/Δx² + 16s²/Δx⁴ - 4sin²θ/Δx⁴ - V″, with the quartic
    // terms combined as 16s⁴/Δx⁴ to avoid cancellation at small kΔx.
    let a = shifted * shifted - d2v;
    let b = -T::lit(2.0) / dx * dv * theta.sin();
    (a, b)
}

/// Squared growth factor of one Fourier mode.
pub fn growth_factor_sq<T: Real>(a: T, b: T, dt: T) -> T {
    let re = T::one() + a * dt;
    let im = b * dt;
    (re * re + im * im).recip()
}

fn k_samples<T: Real>() -> impl Iterator<Item = T> {
    (1..=STABILITY_K_SAMPLES).map(|i| T::PI() * T::from_usize_lossy(i) / T::from_usize_lossy(STABILITY_K_SAMPLES))
}

/// Smallest `Δt` for which no sampled Fourier mode grows:
/// the maximum over sites and `kΔx ∈ (0, π]` of `-2a/(a² + b²)`, or zero
/// when `a ≥ 0` everywhere.
pub fn stability_min_dt<T: Real>(samples: &PotentialSamples<T>, grid: &Grid<T>, energy: T) -> Result<T> {
    samples.check_grid(grid)?;
    let dx = grid.dx();
    let top = T::lit(4.0) / (dx * dx);
    let thetas: Vec<T> = k_samples().collect();
    let mut bound = T::zero();
    for j in 0..samples.len() {
        let d2v = samples.second_derivative()[j];
        if d2v <= T::zero() {
            continue;
        }
        // a < 0 needs |w + 4s²/Δx²| < sqrt(V″) for some s² in (0, 1]
        let w = samples.values()[j] - energy;
        let root = d2v.sqrt();
        if w >= root || w + top <= -root {
            continue;
        }
        let dv = samples.first_derivative()[j];
        for &theta in &thetas {
            let (a, b) = von_neumann_symbol(w, dv, d2v, dx, theta);
            if a < T::zero() {
                bound = bound.max(-T::lit(2.0) * a / (a * a + b * b));
            }
        }
    }
    Ok(bound)
}

/// Largest squared growth factor over all sites and sampled modes at `dt`.
pub fn max_growth_factor_sq<T: Real>(samples: &PotentialSamples<T>, grid: &Grid<T>, energy: T, dt: T) -> Result<T> {
    samples.check_grid(grid)?;
    let dx = grid.dx();
    let thetas: Vec<T> = k_samples().collect();
    let mut worst = T::zero();
    for j in 0..samples.len() {
        let w = samples.values()[j] - energy;
        let (dv, d2v) = (samples.first_derivative()[j], samples.second_derivative()[j]);
        for &theta in &thetas {
            let (a, b) = von_neumann_symbol(w, dv, d2v, dx, theta);
            worst = worst.max(growth_factor_sq(a, b, dt));
        }
    }
    Ok(worst)
}

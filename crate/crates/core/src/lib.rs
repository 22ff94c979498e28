//! Selective relaxation for one-dimensional Schrödinger operators.
//!
//! The eigenpair of `H = -d²/dx² + V(x)` whose energy lies closest to a chosen
//! selecting energy `E` is obtained by implicitly integrating
//! `dψ/dt = -(H - E)² ψ` on a uniform lattice. Every implicit step is a
//! pentadiagonal solve, and with a very large time step a handful of steps
//! reach the fixed point.
//!
//! ```
//! use selectrelax::{relax, Potential, RelaxConfig};
//!
//! let config = RelaxConfig::new(0.9, 1e-2, (-8.0, 8.0));
//! let result = relax(&config, &Potential::harmonic(1.0)).unwrap();
//! assert!(result.converged);
//! assert!((result.energy - 1.0).abs() < 1e-4);
//! ```
//!
//! All numerical code is generic over [`Real`]; the aliases at the crate root
//! fix the scalar to `f64`, which is what the drivers and the CLI use.

// `!(x > y)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bandsolver;
pub mod error;
pub mod grid;
pub mod operator;
pub mod oracle;
pub mod potentials;
mod real;
pub mod relax;
mod sum;

pub use error::{Error, Result};
pub use real::Real;

pub use analysis::{dx_sweep, fit_dx2, observed_order, richardson, scan_spectrum, splitting, EnergyGuess, SweepJob};
pub use grid::make_grid;
pub use operator::{assemble, stability_min_dt, stencil, StencilKind};
pub use potentials::{default_domain, sample};
pub use relax::{
    heat_relax_baseline, initial_state, rayleigh_energy, relax, relax_with_observer, residual, InitialState, Parity, TimeStep,
};

pub type Grid = grid::Grid<f64>;
pub type Wavefunction = grid::Wavefunction<f64>;
pub type Potential = potentials::Potential<f64>;
pub type PotentialSamples = potentials::PotentialSamples<f64>;
pub type CubicSpline = potentials::CubicSpline<f64>;
pub type StencilCoeffs = operator::StencilCoeffs<f64>;
pub type PentaSystem = operator::PentaSystem<f64>;
pub type PentaFactors = bandsolver::PentaFactors<f64>;
pub type RelaxConfig = relax::RelaxConfig<f64>;
pub type RelaxResult = relax::RelaxResult<f64>;
pub type OracleSpectrum = oracle::OracleSpectrum<f64>;
pub type LinearFit = analysis::LinearFit<f64>;
pub type SweepResult = analysis::SweepResult<f64>;
pub type SplitConfig = analysis::SplitConfig<f64>;
pub type SplitResult = analysis::SplitResult<f64>;
pub type ScanResult = analysis::ScanResult<f64>;

/// Single-precision aliases, mostly useful for quick exploratory runs.
pub mod f32 {
    pub type Grid = crate::grid::Grid<f32>;
    pub type Wavefunction = crate::grid::Wavefunction<f32>;
    pub type Potential = crate::potentials::Potential<f32>;
    pub type PentaSystem = crate::operator::PentaSystem<f32>;
    pub type PentaFactors = crate::bandsolver::PentaFactors<f32>;
    pub type RelaxConfig = crate::relax::RelaxConfig<f32>;
}

//! Uniform lattice and discrete inner products.
//!
//! The lattice has nodes `x_j = x_min + j·dx` for `j = 0..=J+1`; the two
//! boundary nodes carry ψ = 0 and only the `J` interior samples are stored.

use crate::sum::compensated_sum;
use crate::{Error, Real, Result};

/// Smallest number of interior points a five-point stencil can live on.
pub const MIN_INTERIOR: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    x_min: T,
    x_max: T,
    interior: usize,
    dx: T,
}

/// Builds the lattice spanning `[x_min, x_max]` with a step close to `dx`.
///
/// The span is kept and the step is adjusted so that `(J + 1)·dx` equals
/// `x_max - x_min`.
pub fn make_grid<T: Real>(x_min: T, x_max: T, dx: T) -> Result<Grid<T>> {
    if !(x_min.is_finite() && x_max.is_finite() && dx.is_finite()) {
        return Err(Error::InvalidGrid("bounds and step must be finite".into()));
    }
    if x_max <= x_min {
        return Err(Error::InvalidGrid(format!("x_max ({x_max}) must exceed x_min ({x_min})")));
    }
    if dx <= T::zero() {
        return Err(Error::InvalidGrid(format!("step must be positive, got {dx}")));
    }
    let cells = ((x_max - x_min) / dx).round();
    let cells = cells.to_i64().unwrap_or(i64::MAX);
    let interior = cells - 1;
    if interior < MIN_INTERIOR as i64 {
        return Err(Error::DomainTooSmall { interior });
    }
    let interior = interior as usize;
    Ok(Grid { x_min, x_max, interior, dx: (x_max - x_min) / T::from_usize_lossy(interior + 1) })
}

impl<T: Real> Grid<T> {
    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    /// Number of interior points `J`.
    pub fn len(&self) -> usize {
        self.interior
    }

    pub fn is_empty(&self) -> bool {
        self.interior == 0
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    /// Position of node `j` in `0..=J+1`.
    ///
    /// Nodes in the upper half are measured back from `x_max`, so a grid with
    /// `x_min = -x_max` has `node(J+1-j) == -node(j)` bit for bit.
    pub fn node(&self, j: usize) -> T {
        let last = self.interior + 1;
        assert!(j <= last, "node index {j} beyond {last}");
        if 2 * j <= last {
            self.x_min + T::from_usize_lossy(j) * self.dx
        } else {
            self.x_max - T::from_usize_lossy(last - j) * self.dx
        }
    }

    /// Positions of the interior nodes `j = 1..=J`.
    pub fn interior_nodes(&self) -> Vec<T> {
        (1..=self.interior).map(|j| self.node(j)).collect()
    }

    /// Whether the lattice is mirror symmetric about `x = 0`.
    pub fn is_symmetric(&self) -> bool {
        let scale = self.x_max.abs().max(self.x_min.abs());
        (self.x_min + self.x_max).abs() <= T::lit(1e-12) * scale
    }

    pub fn same_as(&self, other: &Grid<T>) -> bool {
        self.interior == other.interior && self.x_min == other.x_min && self.x_max == other.x_max
    }
}

/// Interior samples `ψ_1..ψ_J` of a lattice function.
#[derive(Clone, Debug, PartialEq)]
pub struct Wavefunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> Wavefunction<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite sample at interior index {j}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self { grid, values: vec![T::zero(); grid.len()] }
    }

    /// Samples `f` at the interior nodes.
    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(grid, grid.interior_nodes().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| c * v).collect() }
    }

    /// Returns a copy with unit discrete norm, or [`Error::ZeroState`].
    pub fn normalized(&self) -> Result<Self> {
        let n = norm(self);
        if n == T::zero() || !n.is_finite() {
            return Err(Error::ZeroState);
        }
        Ok(self.scaled(n.recip()))
    }

    /// `(x_j, ψ_j)` for `j = 0..=J+1`, boundary zeros included.
    pub fn with_boundary(&self) -> Vec<(T, T)> {
        let last = self.grid.len() + 1;
        (0..=last)
            .map(|j| {
                let v = if j == 0 || j == last { T::zero() } else { self.values[j - 1] };
                (self.grid.node(j), v)
            })
            .collect()
    }
}

/// Discrete L² norm `sqrt(Σ ψ_j² dx)`.
pub fn norm<T: Real>(psi: &Wavefunction<T>) -> T {
    // Rescale by the largest magnitude so tiny iterates do not underflow.
    let peak = psi.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if peak == T::zero() {
        return T::zero();
    }
    let s = compensated_sum(psi.values.iter().map(|&v| (v / peak) * (v / peak)));
    peak * (s * psi.grid.dx()).sqrt()
}

/// Discrete inner product `Σ ψ_j φ_j dx`.
pub fn inner<T: Real>(psi: &Wavefunction<T>, phi: &Wavefunction<T>) -> Result<T> {
    if !psi.grid.same_as(&phi.grid) {
        return Err(Error::GridMismatch);
    }
    let s = compensated_sum(psi.values.iter().zip(&phi.values).map(|(&a, &b)| a * b));
    Ok(s * psi.grid.dx())
}

//! Reference results that share no code with the relaxation path: the
//! spectrum of the three-point Hamiltonian by Sturm bisection, closed-form
//! levels, and a dense LU solve for checking the band solver.

use crate::grid::{Grid, Wavefunction};
use crate::operator::PentaSystem;
use crate::potentials::PotentialSamples;
use crate::{Error, Real, Result};

/// Largest system accepted by [`dense_penta_solve_oracle`].
pub const DENSE_ORACLE_MAX: usize = 2000;

/// Lowest eigenvalues in ascending order and, when requested, their
/// eigenvectors normalized to unit discrete norm.
#[derive(Clone, Debug)]
pub struct OracleSpectrum<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Option<Vec<Wavefunction<T>>>,
}

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`.
#[derive(Clone, Debug)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    /// Three-point Hamiltonian `-d²/dx² + V` with Dirichlet ends.
    pub fn hamiltonian(samples: &PotentialSamples<T>, grid: &Grid<T>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: samples.len() });
        }
        let inv = (grid.dx() * grid.dx()).recip();
        let diag = samples.values().iter().map(|&v| T::lit(2.0) * inv + v).collect();
        Ok(Self { diag, off: vec![-inv; grid.len() - 1] })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc = acc + self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc = acc + self.off[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { T::zero() } + if i + 1 < n { self.off[i].abs() } else { T::zero() };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn norm_inf(&self) -> T {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: T) -> usize {
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut q = T::one();
        for i in 0..self.len() {
            let coupling = if i > 0 { self.off[i - 1] * self.off[i - 1] / q } else { T::zero() };
            q = self.diag[i] - x - coupling;
            if q == T::zero() {
                q = -tiny;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// The `k` lowest eigenvalues by bisection.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<T> {
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs());
        let tol = T::lit(4.0) * T::epsilon() * scale;
        (0..k.min(self.len()))
            .map(|index| {
                let (mut lo, mut hi) = (glo, ghi);
                while hi - lo > tol {
                    let mid = lo + (hi - lo) / T::lit(2.0);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.count_below(mid) > index {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                lo + (hi - lo) / T::lit(2.0)
            })
            .collect()
    }

    /// Eigenvector for eigenvalue `lambda` by inverse iteration, orthogonal to
    /// `previous` (used for clustered eigenvalues). Unit Euclidean norm.
    pub fn inverse_iteration(&self, lambda: T, previous: &[Vec<T>]) -> Vec<T> {
        let n = self.len();
        let shift = lambda + T::lit(16.0) * T::epsilon() * self.norm_inf();
        let lu = TridiagLu::new(self, shift);
        let mut v: Vec<T> = (0..n).map(|i| T::one() + T::lit(0.1) * T::from_usize_lossy((i * 7919) % 13) / T::lit(13.0)).collect();
        for _ in 0..4 {
            for p in previous {
                let dot = v.iter().zip(p).fold(T::zero(), |s, (&a, &b)| s + a * b);
                for (x, &q) in v.iter_mut().zip(p) {
                    *x = *x - dot * q;
                }
            }
            lu.solve(&mut v);
            let norm = v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
            for x in v.iter_mut() {
                *x = *x / norm;
            }
        }
        // Fix the sign so the largest component is positive.
        let peak = v.iter().fold(T::zero(), |m, &x| if x.abs() > m.abs() { x } else { m });
        if peak < T::zero() {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
        v
    }
}

/// Tridiagonal LU with partial pivoting of `T - shift·I`, in the layout of
/// LAPACK's `gttrf`.
struct TridiagLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> TridiagLu<T> {
    fn new(t: &SymTridiagonal<T>, shift: T) -> Self {
        let n = t.len();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut d: Vec<T> = t.diag.iter().map(|&x| x - shift).collect();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = T::epsilon() * t.norm_inf();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == T::zero() {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] = d[i + 1] - fact * du[i];
            } else {
                swapped[i] = true;
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
            }
        }
        if d[n - 1] == T::zero() {
            d[n - 1] = tiny;
        }
        Self { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [T]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] = b[i + 1] - self.dl[i] * b[i];
            }
        }
        b[n - 1] = b[n - 1] / self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Lowest `k` eigenvalues of the three-point Hamiltonian on `grid`.
pub fn tridiag_spectrum<T: Real>(samples: &PotentialSamples<T>, grid: &Grid<T>, k: usize) -> Result<OracleSpectrum<T>> {
    check_count(grid, k)?;
    let h = SymTridiagonal::hamiltonian(samples, grid)?;
    Ok(OracleSpectrum { eigenvalues: h.lowest_eigenvalues(k), eigenvectors: None })
}

/// As [`tridiag_spectrum`], with eigenvectors of unit discrete norm whose
/// largest component is positive.
pub fn tridiag_spectrum_with_vectors<T: Real>(samples: &PotentialSamples<T>, grid: &Grid<T>, k: usize) -> Result<OracleSpectrum<T>> {
    check_count(grid, k)?;
    let h = SymTridiagonal::hamiltonian(samples, grid)?;
    let eigenvalues = h.lowest_eigenvalues(k);
    let cluster = T::lit(1e-8) * h.norm_inf();
    let mut raw: Vec<Vec<T>> = Vec::with_capacity(k);
    for (i, &lambda) in eigenvalues.iter().enumerate() {
        let near: Vec<Vec<T>> = (0..i).filter(|&p| (eigenvalues[p] - lambda).abs() < cluster).map(|p| raw[p].clone()).collect();
        raw.push(h.inverse_iteration(lambda, &near));
    }
    let scale = grid.dx().sqrt().recip();
    let vectors =
        raw.into_iter().map(|v| Wavefunction::new(*grid, v.into_iter().map(|x| x * scale).collect())).collect::<Result<Vec<_>>>()?;
    Ok(OracleSpectrum { eigenvalues, eigenvectors: Some(vectors) })
}

fn check_count<T: Real>(grid: &Grid<T>, k: usize) -> Result<()> {
    if k > grid.len() {
        return Err(Error::TooFewPoints { needed: k, got: grid.len() });
    }
    Ok(())
}

/// Bound levels of `V = e^{-2μx} - 2e^{-μx}`: `E_n = -(1 - μ(n + ½))²` for
/// every `n` with `μ(n + ½) < 1`.
pub fn morse_levels<T: Real>(mu: T) -> Result<Vec<T>> {
    if !(mu > T::zero() && mu < T::lit(2.0)) {
        return Err(Error::InvalidPotential(format!("Morse levels need 0 < mu < 2, got {mu}")));
    }
    let mut levels = Vec::new();
    let mut n = 0;
    loop {
        let q = T::one() - mu * (T::from_usize_lossy(n) + T::lit(0.5));
        if q <= T::zero() {
            return Ok(levels);
        }
        levels.push(-q * q);
        n += 1;
    }
}

/// `(2n + 1)ω` for `n = 0..count`.
pub fn harmonic_levels<T: Real>(omega: T, count: usize) -> Vec<T> {
    (0..count).map(|n| T::from_usize_lossy(2 * n + 1) * omega).collect()
}

/// Exact eigenvalues `(4/Δx²)sin²(nπΔx/2L)`, `n = 1..=count`, of the
/// three-point Laplacian on a box of length `L`.
pub fn discrete_box_levels<T: Real>(grid: &Grid<T>, count: usize) -> Vec<T> {
    let dx = grid.dx();
    let length = grid.x_max() - grid.x_min();
    (1..=count)
        .map(|n| {
            let s = (T::from_usize_lossy(n) * T::PI() * dx / (T::lit(2.0) * length)).sin();
            T::lit(4.0) / (dx * dx) * s * s
        })
        .collect()
}

/// Continuum box levels `(nπ/L)²`, `n = 1..=count`.
pub fn box_levels<T: Real>(length: T, count: usize) -> Vec<T> {
    (1..=count).map(|n| (T::from_usize_lossy(n) * T::PI() / length).powi(2)).collect()
}

/// Solves a dense system by Gaussian elimination with partial pivoting.
pub fn dense_lu_solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::LengthMismatch { expected: n, got: a.len() });
    }
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap_or(std::cmp::Ordering::Equal)).unwrap_or(k);
        if !(a[p][k].abs() >= T::pivot_floor()) {
            return Err(Error::Singular { row: k, pivot: a[p][k].to_f64_lossy() });
        }
        a.swap(k, p);
        b.swap(k, p);
        let pivot_row = a[k].clone();
        for i in k + 1..n {
            let l = a[i][k] / pivot_row[k];
            if l == T::zero() {
                continue;
            }
            for j in k + 1..n {
                a[i][j] = a[i][j] - l * pivot_row[j];
            }
            b[i] = b[i] - l * b[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s = s - a[i][j] * b[j];
        }
        b[i] = s / a[i][i];
    }
    Ok(b)
}

/// Dense reference solve of `R x = rhs`.
pub fn dense_penta_solve_oracle<T: Real>(system: &PentaSystem<T>, rhs: &[T]) -> Result<Vec<T>> {
    if system.len() > DENSE_ORACLE_MAX {
        return Err(Error::InvalidConfig(format!("dense oracle limited to {DENSE_ORACLE_MAX} unknowns, got {}", system.len())));
    }
    if rhs.len() != system.len() {
        return Err(Error::LengthMismatch { expected: system.len(), got: rhs.len() });
    }
    dense_lu_solve(system.to_dense(), rhs.to_vec())
}

//! Banded LU factorizations of the relaxation matrix.
//!
//! [`PentaFactors`] takes the assembled pentadiagonal `R` with partial
//! pivoting within the band, laid out like LAPACK's `gbtf2`: the matrix is
//! stored column by column with `2·KL + KU + 1` rows so that row swaps can
//! spill up to `KL` extra superdiagonals into `U`.
//!
//! [`SquaredFactors`] handles `R = I + Δt·A²` with tridiagonal `A` without
//! ever forming `A²`, through `I + Δt·A² = (I + i√Δt·A)(I - i√Δt·A)`.
//!
//! Factoring and solving cost `O(J)` in both cases.

use num_complex::Complex;

use crate::operator::PentaSystem;
use crate::{Error, Real, Result};

const KL: usize = 2;
const KU: usize = 2;
/// Row of the diagonal inside a stored column.
const KV: usize = KL + KU;
const LDAB: usize = 2 * KL + KU + 1;

/// `P·R = L·U` in band storage, reusable for any number of right-hand sides.
#[derive(Clone, Debug)]
pub struct PentaFactors<T> {
    n: usize,
    ab: Vec<T>,
    pivots: Vec<usize>,
}

#[inline]
fn at(i: usize, j: usize) -> usize {
    j * LDAB + KV + i - j
}

impl<T: Real> PentaFactors<T> {
    /// Factors `system`; fails with [`Error::Singular`] when a pivot falls
    /// below [`Real::pivot_floor`] in magnitude.
    pub fn factor(system: &PentaSystem<T>) -> Result<Self> {
        let n = system.len();
        let mut ab = vec![T::zero(); n * LDAB];
        for j in 0..n {
            for i in j.saturating_sub(KU)..(j + KL + 1).min(n) {
                ab[at(i, j)] = system.get(i, j);
            }
        }
        let mut pivots = vec![0; n];
        let mut ju = 0;
        for j in 0..n {
            let km = KL.min(n - 1 - j);
            let mut jp = 0;
            let mut best = ab[at(j, j)].abs();
            for p in 1..=km {
                let v = ab[at(j + p, j)].abs();
                if v > best {
                    best = v;
                    jp = p;
                }
            }
            pivots[j] = j + jp;
            let pivot = ab[at(j + jp, j)];
            if !(pivot.abs() >= T::pivot_floor()) {
                return Err(Error::Singular { row: j, pivot: pivot.to_f64_lossy() });
            }
            ju = ju.max((j + KU + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    ab.swap(at(j, c), at(j + jp, c));
                }
            }
            if km > 0 {
                let inv = pivot.recip();
                for p in 1..=km {
                    ab[at(j + p, j)] = ab[at(j + p, j)] * inv;
                }
                for c in j + 1..=ju {
                    let u = ab[at(j, c)];
                    if u != T::zero() {
                        for p in 1..=km {
                            let l = ab[at(j + p, j)];
                            ab[at(j + p, c)] = ab[at(j + p, c)] - l * u;
                        }
                    }
                }
            }
        }
        Ok(Self { n, ab, pivots })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of steps at which partial pivoting exchanged rows.
    pub fn row_swaps(&self) -> usize {
        self.pivots.iter().enumerate().filter(|(j, &p)| p != *j).count()
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    /// Overwrites `b` with `R⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [T]) -> Result<()> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: b.len() });
        }
        let ab = &self.ab;
        for j in 0..n.saturating_sub(1) {
            let l = self.pivots[j];
            if l != j {
                b.swap(l, j);
            }
            let bj = b[j];
            for p in 1..=KL.min(n - 1 - j) {
                b[j + p] = b[j + p] - ab[at(j + p, j)] * bj;
            }
        }
        for j in (0..n).rev() {
            let xj = b[j] / ab[at(j, j)];
            b[j] = xj;
            for i in j.saturating_sub(KV)..j {
                b[i] = b[i] - ab[at(i, j)] * xj;
            }
        }
        Ok(())
    }
}

/// `|re| + |im|`, the magnitude LAPACK pivots on for complex matrices.
fn cabs1<T: Real>(z: Complex<T>) -> T {
    z.re.abs() + z.im.abs()
}

/// `I + Δt·A²` for a real symmetric tridiagonal `A`, factored as
/// `B·B̄` with `B = I + i√Δt·A`.
///
/// Only `B` is factored (tridiagonal LU with partial pivoting, as in
/// LAPACK's `gttrf`); `B̄` shares the factors up to conjugation. Rounding is
/// then relative to `‖A‖` instead of `‖A²‖`, which keeps the modes with
/// `Δt·(A eigenvalue)²` far below `ε·Δt·‖A‖²` intact.
#[derive(Clone, Debug)]
pub struct SquaredFactors<T> {
    /// Multipliers of `L`.
    l: Vec<Complex<T>>,
    /// Diagonal and the two superdiagonals of `U`.
    u0: Vec<Complex<T>>,
    u1: Vec<Complex<T>>,
    u2: Vec<Complex<T>>,
    swapped: Vec<bool>,
}

impl<T: Real> SquaredFactors<T> {
    /// Factors `I + dt·A²` where `A` has diagonal `diag` and every
    /// off-diagonal entry equal to `off`.
    pub fn factor(diag: &[T], off: T, dt: T) -> Result<Self> {
        let n = diag.len();
        if !(dt > T::zero() && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("time step must be positive and finite, got {dt}")));
        }
        let s = dt.sqrt();
        let b = |a: T| Complex::new(T::zero(), s * a);
        let mut u0: Vec<Complex<T>> = diag.iter().map(|&d| Complex::new(T::one(), s * d)).collect();
        let mut l = vec![b(off); n.saturating_sub(1)];
        let mut u1 = l.clone();
        let mut u2 = vec![Complex::new(T::zero(), T::zero()); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if cabs1(u0[i]) >= cabs1(l[i]) {
                if cabs1(u0[i]) < T::pivot_floor() {
                    return Err(Error::Singular { row: i, pivot: u0[i].norm().to_f64_lossy() });
                }
                let fact = l[i] / u0[i];
                l[i] = fact;
                u0[i + 1] = u0[i + 1] - fact * u1[i];
            } else {
                let fact = u0[i] / l[i];
                u0[i] = l[i];
                l[i] = fact;
                let temp = u1[i];
                u1[i] = u0[i + 1];
                u0[i + 1] = temp - fact * u0[i + 1];
                if i + 2 < n {
                    u2[i] = u1[i + 1];
                    u1[i + 1] = -fact * u1[i + 1];
                }
                swapped[i] = true;
            }
        }
        if let Some(last) = u0.last() {
            if cabs1(*last) < T::pivot_floor() {
                return Err(Error::Singular { row: n - 1, pivot: last.norm().to_f64_lossy() });
            }
        }
        Ok(Self { l, u0, u1, u2, swapped })
    }

    pub fn len(&self) -> usize {
        self.u0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u0.is_empty()
    }

    fn solve_b(&self, x: &mut [Complex<T>]) {
        let n = x.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = temp - self.l[i] * x[i];
            } else {
                x[i + 1] = x[i + 1] - self.l[i] * x[i];
            }
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            if i + 1 < n {
                v = v - self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                v = v - self.u2[i] * x[i + 2];
            }
            x[i] = v / self.u0[i];
        }
    }

    /// Overwrites `b` with `(I + Δt·A²)⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [T]) -> Result<()> {
        if b.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: b.len() });
        }
        let mut x: Vec<Complex<T>> = b.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.solve_b(&mut x);
        // B̄⁻¹y = conj(B⁻¹ conj(y)), and only the real part survives
        x.iter_mut().for_each(|v| *v = v.conj());
        self.solve_b(&mut x);
        for (bj, xj) in b.iter_mut().zip(&x) {
            *bj = xj.re;
        }
        Ok(())
    }
}

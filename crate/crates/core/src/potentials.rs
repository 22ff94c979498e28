//! Confining potentials with their first two derivatives.
//!
//! Units are ħ = 2m = 1, so `H = -d²/dx² + V(x)`.

use std::path::Path;

use crate::grid::Grid;
use crate::{Error, Real, Result};

/// WKB e-foldings of the decaying tail kept beyond each turning point by
/// [`default_domain`]. `e^-25 ≈ 1.4e-11`.
pub const DECAY_EFOLDS: f64 = 25.0;

#[derive(Clone, Debug, PartialEq)]
pub enum Potential<T> {
    /// `e^{-2μx} - 2e^{-μx}`
    Morse {
        mu: T,
    },
    /// `-λx² + x⁴`
    DoubleWell {
        lambda: T,
    },
    /// `ω²x²`, with levels `(2n+1)ω`.
    Harmonic {
        omega: T,
    },
    Tabulated(CubicSpline<T>),
}

impl<T: Real> Potential<T> {
    pub fn morse(mu: T) -> Self {
        Self::Morse { mu }
    }

    pub fn double_well(lambda: T) -> Self {
        Self::DoubleWell { lambda }
    }

    pub fn harmonic(omega: T) -> Self {
        Self::Harmonic { omega }
    }

    pub fn validate(&self) -> Result<()> {
        let (name, p) = match self {
            Self::Morse { mu } => ("mu", *mu),
            Self::DoubleWell { lambda } => ("lambda", *lambda),
            Self::Harmonic { omega } => ("omega", *omega),
            Self::Tabulated(_) => return Ok(()),
        };
        if p > T::zero() && p.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidPotential(format!("{name} must be positive and finite, got {p}")))
        }
    }

    /// Whether `V(-x) = V(x)` holds by construction.
    pub fn is_even(&self) -> bool {
        matches!(self, Self::DoubleWell { .. } | Self::Harmonic { .. })
    }

    /// `(V, V′, V″)` at `x`.
    pub fn eval(&self, x: T) -> Result<(T, T, T)> {
        let two = T::lit(2.0);
        Ok(match self {
            Self::Morse { mu } => {
                let e = (-*mu * x).exp();
                let e2 = e * e;
                let mu2 = *mu * *mu;
                (e2 - two * e, two * *mu * (e - e2), mu2 * (T::lit(4.0) * e2 - two * e))
            }
            Self::DoubleWell { lambda } => {
                let x2 = x * x;
                (x2 * x2 - *lambda * x2, x * (T::lit(4.0) * x2 - two * *lambda), T::lit(12.0) * x2 - two * *lambda)
            }
            Self::Harmonic { omega } => {
                let w2 = *omega * *omega;
                (w2 * x * x, two * w2 * x, two * w2)
            }
            Self::Tabulated(spline) => spline.eval(x)?,
        })
    }

    /// Global minimum of the potential.
    pub fn minimum(&self) -> T {
        match self {
            Self::Morse { .. } => -T::one(),
            Self::DoubleWell { lambda } => -(*lambda * *lambda) / T::lit(4.0),
            Self::Harmonic { .. } => T::zero(),
            Self::Tabulated(spline) => spline.ys.iter().fold(T::infinity(), |m, &v| m.min(v)),
        }
    }
}

/// `V_j`, `V′_j`, `V″_j` at the interior nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSamples<T> {
    v: Vec<T>,
    dv: Vec<T>,
    d2v: Vec<T>,
}

impl<T: Real> PotentialSamples<T> {
    pub fn new(v: Vec<T>, dv: Vec<T>, d2v: Vec<T>) -> Result<Self> {
        for other in [dv.len(), d2v.len()] {
            if other != v.len() {
                return Err(Error::LengthMismatch { expected: v.len(), got: other });
            }
        }
        if v.iter().chain(&dv).chain(&d2v).any(|s| !s.is_finite()) {
            return Err(Error::InvalidPotential("non-finite potential sample".into()));
        }
        Ok(Self { v, dv, d2v })
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.v
    }

    pub fn first_derivative(&self) -> &[T] {
        &self.dv
    }

    pub fn second_derivative(&self) -> &[T] {
        &self.d2v
    }

    pub(crate) fn check_grid(&self, grid: &Grid<T>) -> Result<()> {
        if self.len() == grid.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: grid.len(), got: self.len() })
        }
    }
}

/// Evaluates the potential at every interior node.
pub fn sample<T: Real>(potential: &Potential<T>, grid: &Grid<T>) -> Result<PotentialSamples<T>> {
    potential.validate()?;
    let n = grid.len();
    let (mut v, mut dv, mut d2v) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for x in grid.interior_nodes() {
        let (a, b, c) = potential.eval(x)?;
        v.push(a);
        dv.push(b);
        d2v.push(c);
    }
    PotentialSamples::new(v, dv, d2v)
}

/// Interval `[x_min, x_max]` bracketing the classically allowed region at
/// `e_max`, padded on each side until the WKB tail has decayed by
/// [`DECAY_EFOLDS`] e-foldings.
///
/// Padding is capped at 50 times the width of the allowed region, and a
/// tabulated potential is clipped to its table.
pub fn default_domain<T: Real>(potential: &Potential<T>, e_max: T) -> Result<(T, T)> {
    potential.validate()?;
    if !(e_max > potential.minimum()) {
        return Err(Error::InvalidConfig(format!("E_max = {e_max} is not above the potential minimum {}", potential.minimum())));
    }
    let (left, right) = turning_points(potential, e_max)?;
    let width = (right - left).max(T::lit(1e-3));
    let cap = T::lit(50.0) * width.max(T::one());
    let (lo_limit, hi_limit) = match potential {
        Potential::Tabulated(s) => (s.x_min(), s.x_max()),
        _ => (T::neg_infinity(), T::infinity()),
    };
    let x_min = pad(potential, e_max, left, -T::one(), width, cap, lo_limit)?;
    let x_max = pad(potential, e_max, right, T::one(), width, cap, hi_limit)?;
    Ok((x_min, x_max))
}

fn pad<T: Real>(potential: &Potential<T>, e: T, start: T, dir: T, width: T, cap: T, limit: T) -> Result<T> {
    let target = T::lit(DECAY_EFOLDS);
    let mut x = start;
    let mut kappa = T::zero();
    let mut decay = T::zero();
    while decay < target && (x - start).abs() < cap {
        // at most a tenth of an e-folding per step
        let h = if kappa > T::zero() { (T::lit(0.1) / kappa).min(width / T::lit(20.0)) } else { width / T::lit(400.0) };
        let next = x + dir * h;
        if (dir > T::zero() && next >= limit) || (dir < T::zero() && next <= limit) {
            return Ok(limit);
        }
        let k_next = (potential.eval(next)?.0 - e).max(T::zero()).sqrt();
        decay = decay + T::lit(0.5) * (kappa + k_next) * h;
        kappa = k_next;
        x = next;
    }
    Ok(x)
}

fn turning_points<T: Real>(potential: &Potential<T>, e: T) -> Result<(T, T)> {
    let two = T::lit(2.0);
    match potential {
        Potential::Harmonic { omega } => {
            let x = e.sqrt() / *omega;
            Ok((-x, x))
        }
        Potential::DoubleWell { lambda } => {
            let x = ((*lambda + (*lambda * *lambda + T::lit(4.0) * e).sqrt()) / two).sqrt();
            Ok((-x, x))
        }
        Potential::Morse { mu } => {
            let root = (T::one() + e).sqrt();
            let left = -(T::one() + root).ln() / *mu;
            if e >= T::zero() {
                return Err(Error::NoTurningPoint { side: "right", energy: e.to_f64_lossy() });
            }
            Ok((left, -(T::one() - root).ln() / *mu))
        }
        Potential::Tabulated(spline) => spline.turning_points(e),
    }
}

/// Natural cubic spline through tabulated `(x, V)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    second: Vec<T>,
}

impl<T: Real> CubicSpline<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch { expected: xs.len(), got: ys.len() });
        }
        if xs.len() < 5 {
            return Err(Error::TooFewPoints { needed: 5, got: xs.len() });
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("non-finite table entry".into()));
        }
        if let Some(i) = xs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPotential(format!("x must be strictly increasing (row {})", i + 1)));
        }
        let second = natural_second_derivatives(&xs, &ys);
        Ok(Self { xs, ys, second })
    }

    /// Reads a two-column `x,V` CSV with an optional header row.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(v)) => {
                    xs.push(T::lit(x));
                    ys.push(T::lit(v));
                }
                _ if xs.is_empty() && lineno == 0 => continue, // header
                _ => return Err(Error::Parse(format!("line {}: not a number pair: {line}", lineno + 1))),
            }
        }
        Self::new(xs, ys)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_csv_str(&text)
    }

    pub fn x_min(&self) -> T {
        self.xs[0]
    }

    pub fn x_max(&self) -> T {
        self.xs[self.xs.len() - 1]
    }

    /// Value and first two derivatives of the interpolant.
    pub fn eval(&self, x: T) -> Result<(T, T, T)> {
        if !(x >= self.x_min() && x <= self.x_max()) {
            return Err(Error::OutOfRange { x: x.to_f64_lossy(), lo: self.x_min().to_f64_lossy(), hi: self.x_max().to_f64_lossy() });
        }
        let i = self.xs.partition_point(|&xi| xi <= x).clamp(1, self.xs.len() - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let six = T::lit(6.0);
        let three = T::lit(3.0);
        let v = a * self.ys[i] + b * self.ys[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / six;
        let dv = (self.ys[i + 1] - self.ys[i]) / h - (three * a * a - T::one()) / six * h * m0 + (three * b * b - T::one()) / six * h * m1;
        let d2v = a * m0 + b * m1;
        Ok((v, dv, d2v))
    }

    fn turning_points(&self, e: T) -> Result<(T, T)> {
        let n = self.xs.len();
        let inside: Vec<bool> = self.ys.iter().map(|&v| v < e).collect();
        let first = inside.iter().position(|&b| b);
        let last = inside.iter().rposition(|&b| b);
        let (Some(first), Some(last)) = (first, last) else {
            return Err(Error::InvalidConfig("energy below every tabulated value".into()));
        };
        if first == 0 {
            return Err(Error::NoTurningPoint { side: "left", energy: e.to_f64_lossy() });
        }
        if last == n - 1 {
            return Err(Error::NoTurningPoint { side: "right", energy: e.to_f64_lossy() });
        }
        let left = self.crossing(e, self.xs[first - 1], self.xs[first])?;
        let right = self.crossing(e, self.xs[last], self.xs[last + 1])?;
        Ok((left, right))
    }

    fn crossing(&self, e: T, mut a: T, mut b: T) -> Result<T> {
        let fa_above = self.eval(a)?.0 >= e;
        for _ in 0..80 {
            let m = T::lit(0.5) * (a + b);
            if (self.eval(m)?.0 >= e) == fa_above {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(T::lit(0.5) * (a + b))
    }
}

fn natural_second_derivatives<T: Real>(xs: &[T], ys: &[T]) -> Vec<T> {
    let n = xs.len();
    let mut m = vec![T::zero(); n];
    // Thomas algorithm on the interior rows; the system is diagonally dominant.
    let mut c_prime = vec![T::zero(); n];
    let mut d_prime = vec![T::zero(); n];
    for i in 1..n - 1 {
        let h0 = xs[i] - xs[i - 1];
        let h1 = xs[i + 1] - xs[i];
        let rhs = T::lit(6.0) * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        let diag = T::lit(2.0) * (h0 + h1) - h0 * c_prime[i - 1];
        c_prime[i] = h1 / diag;
        d_prime[i] = (rhs - h0 * d_prime[i - 1]) / diag;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use approx::assert_relative_eq;

    #[test]
    fn morse_at_origin() {
        let (v, dv, d2v) = Potential::<f64>::morse(0.2).eval(0.0).unwrap();
        assert_eq!(v, -1.0);
        assert_eq!(dv, 0.0);
        assert_relative_eq!(d2v, 0.08, max_relative = 1e-15);
    }

    #[test]
    fn double_well_values() {
        assert_eq!(Potential::<f64>::double_well(15.0).eval(0.0).unwrap(), (0.0, 0.0, -30.0));
        for lambda in [1.0f64, 5.0, 15.0] {
            let x0 = (lambda / 2.0).sqrt();
            let (v, dv, _) = Potential::<f64>::double_well(lambda).eval(x0).unwrap();
            assert_relative_eq!(v, -lambda * lambda / 4.0, max_relative = 1e-14);
            assert!(dv.abs() < 1e-12 * lambda);
        }
    }

    #[test]
    fn double_well_is_even() {
        let p = Potential::<f64>::double_well(7.3);
        for x in [0.1, 0.77, 2.3, 5.9] {
            let (a, b, c) = p.eval(x).unwrap();
            let (a2, b2, c2) = p.eval(-x).unwrap();
            assert_eq!(a, a2);
            assert_eq!(b, -b2);
            assert_eq!(c, c2);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Potential::<f64>::morse(0.0).validate().is_err());
        assert!(Potential::<f64>::double_well(-1.0).validate().is_err());
        assert!(Potential::<f64>::harmonic(f64::NAN).validate().is_err());
    }

    #[test]
    fn sample_matches_eval() {
        let g = make_grid::<f64>(-5.0, 40.0, 0.05).unwrap();
        let p = Potential::<f64>::morse(0.2);
        let s = sample(&p, &g).unwrap();
        for (j, x) in g.interior_nodes().into_iter().enumerate() {
            let (v, dv, d2v) = p.eval(x).unwrap();
            assert_eq!(s.values()[j], v);
            assert_eq!(s.first_derivative()[j], dv);
            assert_eq!(s.second_derivative()[j], d2v);
        }
        assert!(s.values().iter().all(|&v| v >= -1.0));
        let jmin = (0..s.len()).min_by(|&a, &b| s.values()[a].total_cmp(&s.values()[b])).unwrap();
        assert!(g.node(jmin + 1).abs() <= g.dx());
    }

    #[test]
    fn harmonic_samples_are_symmetric() {
        let g = make_grid::<f64>(-4.0, 4.0, 0.01).unwrap();
        let s = sample(&Potential::<f64>::harmonic(1.3), &g).unwrap();
        let v = s.values();
        let n = v.len();
        for j in 0..n {
            assert_eq!(v[j], v[n - 1 - j]);
            assert_relative_eq!(v[j], 1.69 * g.node(j + 1).powi(2), max_relative = 1e-14);
        }
    }

    #[test]
    fn tabulated_reproduces_double_well() {
        let p = Potential::<f64>::double_well(5.0);
        let h = 0.01;
        let xs: Vec<f64> = (0..=800).map(|i| -4.0 + h * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| p.eval(x).unwrap().0).collect();
        let table = Potential::Tabulated(CubicSpline::new(xs, ys).unwrap());
        let g = make_grid::<f64>(-3.0, 3.0, 0.0137).unwrap();
        let exact = sample(&p, &g).unwrap();
        let interp = sample(&table, &g).unwrap();
        for j in 0..g.len() {
            assert!((exact.values()[j] - interp.values()[j]).abs() < 1e-8);
            assert!((exact.first_derivative()[j] - interp.first_derivative()[j]).abs() < 1e-4);
            assert!((exact.second_derivative()[j] - interp.second_derivative()[j]).abs() < 1e-2);
        }
    }

    #[test]
    fn tabulated_out_of_range() {
        let spline = CubicSpline::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![4.0, 1.0, 0.0, 1.0, 4.0]).unwrap();
        assert!(matches!(spline.eval(4.5), Err(Error::OutOfRange { .. })));
        let p = Potential::Tabulated(spline);
        let g = make_grid::<f64>(-1.0, 3.0, 0.1).unwrap();
        assert!(matches!(sample(&p, &g), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn csv_parsing() {
        let with_header = "x,V\n0,4\n1,1\n2,0\n3,1\n4,4\n";
        let s = CubicSpline::<f64>::from_csv_str(with_header).unwrap();
        assert_eq!(s.eval(2.0).unwrap().0, 0.0);
        let bare = "0,4\n1,1\n2,0\n3,1\n4,4";
        assert_eq!(CubicSpline::<f64>::from_csv_str(bare).unwrap(), s);
        assert!(CubicSpline::<f64>::from_csv_str("0,1\n2,1\n1,1\n3,1\n4,1").is_err());
        assert!(CubicSpline::<f64>::from_csv_str("0,1\n1,1\n2,1").is_err());
        assert!(CubicSpline::<f64>::from_csv_str("x,V\n0,1\n1,abc\n").is_err());
    }

    #[test]
    fn default_domains_bracket_turning_points() {
        let (lo, hi) = default_domain(&Potential::<f64>::harmonic(1.0), 5.0).unwrap();
        assert!(lo < -2.24 && hi > 2.24);

        let lambda: f64 = 15.0;
        let (lo, hi) = default_domain(&Potential::<f64>::double_well(lambda), 0.0).unwrap();
        assert!(lo < -lambda.sqrt() && hi > lambda.sqrt());

        let mu = 0.2;
        let e: f64 = -0.005;
        let (lo, hi) = default_domain(&Potential::<f64>::morse(mu), e).unwrap();
        let turning = -(1.0 - (1.0 + e).sqrt()).ln() / mu;
        assert!(lo.is_finite() && hi.is_finite());
        assert!(hi > turning && lo < 0.0);
    }

    #[test]
    fn default_domain_errors() {
        assert!(matches!(default_domain(&Potential::<f64>::morse(0.2), 0.0), Err(Error::NoTurningPoint { side: "right", .. })));
        assert!(default_domain(&Potential::<f64>::harmonic(1.0), -1.0).is_err());
    }

    #[test]
    fn default_domain_tabulated() {
        let xs: Vec<f64> = (0..=200).map(|i| -5.0 + 0.05 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let p = Potential::Tabulated(CubicSpline::new(xs, ys).unwrap());
        let (lo, hi) = default_domain(&p, 4.0).unwrap();
        assert!(lo < -2.0 && hi > 2.0);
        assert!(lo >= -5.0 && hi <= 5.0);
        assert!(matches!(default_domain(&p, 30.0), Err(Error::NoTurningPoint { .. })));
    }
}

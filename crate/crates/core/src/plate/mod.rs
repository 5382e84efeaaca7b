//! Homogenized plate energy on a rectangle and its minimization.
//!
//! ```text
//! J(u, v; s) = 1/2 int z^T M z + 1/24 int Q2(D^2 v) - s int f3 v,
//! z = (sym grad u + 1/2 grad v (x) grad v, -D^2 v)
//! ```
//!
//! Free boundary, finite differences on a uniform grid including the
//! boundary, trapezoidal quadrature. A six-dimensional gauge removes the
//! invariance group of the discrete energy.

mod classical;
mod energy;
mod minimize;
mod ops;

pub use classical::{classical_fvk_energy, classical_fvk_gradient, minimize_classical_fvk};
pub use energy::{directional_check, plate_energy, plate_gradient, Gauge};
pub use minimize::{minimize_plate, MinimizeError, MinimizerParams, PlateSolution, StartSummary};

use num_traits::Float;

use crate::error::Error;
use crate::scalar::{max_abs, Scalar};

/// Rectangle `[0, lx] x [0, ly]` sampled at `m1 x m2` points including the edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateDomain<T> {
    pub lx: T,
    pub ly: T,
    pub m1: usize,
    pub m2: usize,
}

impl<T: Scalar> PlateDomain<T> {
    pub fn new(lx: T, ly: T, m1: usize, m2: usize) -> Result<Self, Error> {
        let d = Self { lx, ly, m1, m2 };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.lx > T::zero() && self.ly > T::zero() && self.lx.is_finite() && self.ly.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "plate side lengths must be positive, got {} x {}",
                self.lx, self.ly
            )));
        }
        if self.m1 < 4 || self.m2 < 4 {
            return Err(Error::InvalidParams(format!(
                "plate grid needs at least 4 points per side, got {} x {}",
                self.m1, self.m2
            )));
        }
        Ok(())
    }

    pub fn h1(&self) -> T {
        self.lx / T::from_usize_lossy(self.m1 - 1)
    }

    pub fn h2(&self) -> T {
        self.ly / T::from_usize_lossy(self.m2 - 1)
    }

    pub fn len(&self) -> usize {
        self.m1 * self.m2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of grid point `(j1, j2)`; `x1` varies fastest.
    pub fn index(&self, j1: usize, j2: usize) -> usize {
        j2 * self.m1 + j1
    }

    pub fn x1(&self, j1: usize) -> T {
        T::from_usize_lossy(j1) * self.h1()
    }

    pub fn x2(&self, j2: usize) -> T {
        T::from_usize_lossy(j2) * self.h2()
    }

    pub fn area(&self) -> T {
        self.lx * self.ly
    }

    /// Trapezoidal quadrature weights.
    pub fn weights(&self) -> Vec<T> {
        let half = T::lit(0.5);
        let w1: Vec<T> = (0..self.m1)
            .map(|j| if j == 0 || j == self.m1 - 1 { half * self.h1() } else { self.h1() })
            .collect();
        let w2: Vec<T> = (0..self.m2)
            .map(|j| if j == 0 || j == self.m2 - 1 { half * self.h2() } else { self.h2() })
            .collect();
        let mut w = Vec::with_capacity(self.len());
        for b in &w2 {
            for a in &w1 {
                w.push(*a * *b);
            }
        }
        w
    }

    /// `sum w f`.
    pub fn integrate(&self, f: &[T]) -> T {
        self.weights().iter().zip(f).map(|(w, v)| *w * *v).sum()
    }

    /// Samples `f(x1, x2)` on the grid.
    pub fn sample(&self, f: impl Fn(T, T) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for j2 in 0..self.m2 {
            for j1 in 0..self.m1 {
                out.push(f(self.x1(j1), self.x2(j2)));
            }
        }
        out
    }
}

/// In-plane displacement `u` and deflection `v` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateState<T> {
    pub u1: Vec<T>,
    pub u2: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> PlateState<T> {
    pub fn zeros(dom: &PlateDomain<T>) -> Self {
        let n = dom.len();
        Self {
            u1: vec![T::zero(); n],
            u2: vec![T::zero(); n],
            v: vec![T::zero(); n],
        }
    }

    /// Packs `(u1, u2, v)` into one vector.
    pub fn to_vector(&self) -> Vec<T> {
        let mut x = Vec::with_capacity(3 * self.v.len());
        x.extend_from_slice(&self.u1);
        x.extend_from_slice(&self.u2);
        x.extend_from_slice(&self.v);
        x
    }

    pub fn from_vector(x: &[T]) -> Self {
        let n = x.len() / 3;
        Self {
            u1: x[..n].to_vec(),
            u2: x[n..2 * n].to_vec(),
            v: x[2 * n..].to_vec(),
        }
    }

    pub fn max_abs(&self) -> T {
        Float::max(Float::max(max_abs(&self.u1), max_abs(&self.u2)), max_abs(&self.v))
    }
}

/// Closed-form transverse loads that satisfy the mean and moment conditions exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadCatalog<T> {
    /// `A sin(2 pi x1 / lx) cos(2 pi x2 / ly)`.
    Dipole { amplitude: T },
    /// `A sin(2 pi x1 / lx) sin(2 pi x2 / ly)`.
    Checker { amplitude: T },
}

impl<T: Scalar> LoadCatalog<T> {
    pub fn sample(&self, dom: &PlateDomain<T>) -> Vec<T> {
        let tp = T::two_pi();
        let (lx, ly) = (dom.lx, dom.ly);
        match *self {
            Self::Dipole { amplitude } => {
                dom.sample(|x1, x2| amplitude * Float::sin(tp * x1 / lx) * Float::cos(tp * x2 / ly))
            }
            Self::Checker { amplitude } => {
                dom.sample(|x1, x2| amplitude * Float::sin(tp * x1 / lx) * Float::sin(tp * x2 / ly))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Dipole { .. } => "dipole",
            Self::Checker { .. } => "checker",
        }
    }
}

/// Sign `s` multiplying the load potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignChoice {
    Plus,
    Minus,
    /// Minimize for both signs and keep the lower energy.
    Auto,
}

impl SignChoice {
    pub fn candidates(self) -> &'static [i8] {
        match self {
            Self::Plus => &[1],
            Self::Minus => &[-1],
            Self::Auto => &[1, -1],
        }
    }
}

/// Transverse load density on the plate grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSpec<T> {
    pub f3: Vec<T>,
    pub sign: SignChoice,
}

/// Relative tolerance of the mean and first-moment conditions on a load.
pub const LOAD_BALANCE_TOL: f64 = 1e-10;

impl<T: Scalar> LoadSpec<T> {
    /// Checks that `f3` has zero integral and zero first moments on `dom`.
    pub fn new(f3: Vec<T>, sign: SignChoice, dom: &PlateDomain<T>) -> Result<Self, Error> {
        if f3.len() != dom.len() {
            return Err(Error::InvalidLoad(format!(
                "load grid has {} values, plate grid has {}",
                f3.len(),
                dom.len()
            )));
        }
        if f3.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidLoad("load contains non-finite values".into()));
        }
        let scale = max_abs(&f3) * dom.area();
        let tol = T::lit(LOAD_BALANCE_TOL) * scale;
        let total = dom.integrate(&f3);
        if total.mag() > tol {
            return Err(Error::InvalidLoad(format!("load integral {total:e} is not zero")));
        }
        let m1: Vec<T> = dom.sample(|x1, _| x1).iter().zip(&f3).map(|(x, f)| *x * *f).collect();
        let m2: Vec<T> = dom.sample(|_, x2| x2).iter().zip(&f3).map(|(x, f)| *x * *f).collect();
        let (m1, m2) = (dom.integrate(&m1), dom.integrate(&m2));
        if m1.mag() > tol * dom.lx || m2.mag() > tol * dom.ly {
            return Err(Error::InvalidLoad(format!(
                "load first moments ({m1:e}, {m2:e}) are not zero"
            )));
        }
        Ok(Self { f3, sign })
    }

    pub fn from_catalog(c: &LoadCatalog<T>, sign: SignChoice, dom: &PlateDomain<T>) -> Result<Self, Error> {
        Self::new(c.sample(dom), sign, dom)
    }

    pub fn zero(dom: &PlateDomain<T>, sign: SignChoice) -> Self {
        Self {
            f3: vec![T::zero(); dom.len()],
            sign,
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            f3: self.f3.iter().map(|v| -*v).collect(),
            sign: self.sign,
        }
    }
}

/// Terms of the plate energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown<T> {
    /// `1/2 int z^T M z`.
    pub membrane_coupled: T,
    /// `1/24 int Q2(D^2 v)`.
    pub bending: T,
    /// `s int f3 v`.
    pub load_work: T,
    pub total: T,
}

impl<T: Scalar> EnergyBreakdown<T> {
    pub fn new(membrane_coupled: T, bending: T, load_work: T) -> Self {
        Self {
            membrane_coupled,
            bending,
            load_work,
            total: membrane_coupled + bending - load_work,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_integrate_polynomials() {
        let dom = PlateDomain::new(2.0, 3.0, 9, 7).unwrap();
        assert!((dom.integrate(&vec![1.0; dom.len()]) - 6.0).abs() < 1e-14);
        let f = dom.sample(|x, y| x * y);
        assert!((dom.integrate(&f) - 9.0).abs() < 1e-13);
    }

    #[test]
    fn catalog_loads_are_balanced() {
        let dom = PlateDomain::new(1.5, 0.8, 17, 13).unwrap();
        for c in [LoadCatalog::Dipole { amplitude: 2.0 }, LoadCatalog::Checker { amplitude: -1.0 }] {
            assert!(LoadSpec::from_catalog(&c, SignChoice::Auto, &dom).is_ok(), "{}", c.name());
        }
    }

    #[test]
    fn unbalanced_loads_rejected() {
        let dom = PlateDomain::new(1.0, 1.0, 9, 9).unwrap();
        let constant = vec![1.0; dom.len()];
        assert!(matches!(LoadSpec::new(constant, SignChoice::Plus, &dom), Err(Error::InvalidLoad(_))));
        // zero mean but nonzero first moment
        let tilt = dom.sample(|x, _| x - 0.5);
        assert!(matches!(LoadSpec::new(tilt, SignChoice::Plus, &dom), Err(Error::InvalidLoad(_))));
        assert!(LoadSpec::new(vec![0.0; 3], SignChoice::Plus, &dom).is_err());
    }

    #[test]
    fn small_domains_rejected() {
        assert!(PlateDomain::new(1.0, 1.0, 3, 8).is_err());
        assert!(PlateDomain::new(0.0, 1.0, 8, 8).is_err());
    }
}

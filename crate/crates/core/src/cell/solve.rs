use num_complex::Complex;
use num_traits::Float;

use super::operator::{CellOperator, CellVector};
use super::{CellLoad, CellParams};
use crate::elastic::PlaneForm;
use crate::error::Error;
use crate::scalar::Scalar;
use crate::shape::ShapeFunction;
use crate::spectral::{synthesize, Fft2, ModeLayout};

/// Minimizing correctors `(u1, v1)` of one cell problem.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorSolution<T> {
    /// Coefficients of `(u1_1, u1_2, v1)`.
    pub fields: CellVector<T>,
    /// Final relative residual of the linear solve.
    pub residual: T,
    pub iterations: usize,
}

impl<T: Scalar> CorrectorSolution<T> {
    pub fn zero(layout: ModeLayout) -> Self {
        Self {
            fields: CellVector::zeros(layout),
            residual: T::zero(),
            iterations: 0,
        }
    }

    pub fn band(&self) -> usize {
        self.fields.layout.band
    }

    /// `a * self + b * other`, used for corrector linearity.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        let mut fields = self.fields.clone();
        fields.scale(a);
        fields.axpy(b, &other.fields);
        Self {
            fields,
            residual: T::nan(),
            iterations: 0,
        }
    }

    fn weighted_sq(&self, field: &[Complex<T>], power: i32) -> T {
        let tp = T::two_pi();
        self.fields
            .layout
            .modes()
            .zip(field)
            .map(|((k1, k2), c)| {
                let kk = tp * tp * T::lit((k1 * k1 + k2 * k2) as f64);
                Float::powi(kk, power) * c.norm_sqr()
            })
            .sum()
    }

    /// `|grad u1|^2_{L2}`, the homogeneous H1 seminorm squared.
    pub fn u_h1_sq(&self) -> T {
        self.weighted_sq(self.fields.u1(), 1) + self.weighted_sq(self.fields.u2(), 1)
    }

    /// `|D^2 v1|^2_{L2}`, the homogeneous H2 seminorm squared.
    pub fn v_h2_sq(&self) -> T {
        self.weighted_sq(self.fields.v(), 2)
    }

    /// `(|u1|^2 + |v1|^2) / (|G|^2 + |F|^2)`, the empirical a-priori constant of this solve.
    pub fn apriori_ratio(&self, load: &CellLoad<T>) -> T {
        let denom = load.norm_sq();
        if denom == T::zero() {
            return T::zero();
        }
        (self.u_h1_sq() + self.v_h2_sq()) / denom
    }

    /// Grid samples `(u1_1, u1_2, v1)` on an `n x n` grid, `n >= 2N + 1`.
    pub fn sample(&self, n: usize) -> Result<[Vec<T>; 3], Error> {
        let layout = self.fields.layout;
        if n < layout.side() {
            return Err(Error::Aliasing {
                n,
                band: layout.band,
                required: layout.side(),
            });
        }
        let fft = Fft2::new(n);
        let real = |c: &[Complex<T>]| synthesize(layout, c, &fft).into_iter().map(|z| z.re).collect::<Vec<T>>();
        Ok([real(self.fields.u1()), real(self.fields.u2()), real(self.fields.v())])
    }
}

/// Preconditioned conjugate gradients for `B x = b` on the mean-zero subspace.
pub(crate) fn pcg<T: Scalar>(
    op: &CellOperator<T>,
    b: &CellVector<T>,
    tol: T,
    max_iter: usize,
) -> Result<CorrectorSolution<T>, Error> {
    let layout = op.layout();
    // round-off in the transforms leaves anti-Hermitian noise that B cannot see
    let mut b = b.clone();
    b.enforce_real_mean_zero();
    let bnorm = b.norm();
    if bnorm == T::zero() {
        return Ok(CorrectorSolution::zero(layout));
    }
    let mut x = CellVector::zeros(layout);
    let mut r = b;
    let mut z = op.precondition(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut rel = T::one();
    for it in 1..=max_iter {
        let mut ap = op.apply(&p);
        ap.enforce_real_mean_zero();
        let pap = p.dot(&ap);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        rel = r.norm() / bnorm;
        if rel <= tol {
            x.enforce_real_mean_zero();
            return Ok(CorrectorSolution {
                fields: x,
                residual: rel,
                iterations: it,
            });
        }
        z = op.precondition(&r);
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.scale(beta);
        p.axpy(T::one(), &z);
    }
    Err(Error::NonConvergence {
        residual: rel.to_f64_lossy(),
        iterations: max_iter,
        load: None,
    })
}

/// Solves the cell problem for `load` by preconditioned conjugate gradients.
pub fn solve_cell<T: Scalar>(
    load: &CellLoad<T>,
    s: &ShapeFunction<T>,
    pf: &PlaneForm<T>,
    params: &CellParams<T>,
) -> Result<CorrectorSolution<T>, Error> {
    let op = CellOperator::new(s, pf, params)?;
    pcg(&op, &op.rhs(load), params.cg_tol, params.max_iter)
}

/// `I(u1, v1)` for the given correctors, integrated exactly on a padded grid.
pub fn effective_value<T: Scalar>(
    load: &CellLoad<T>,
    sol: &CorrectorSolution<T>,
    s: &ShapeFunction<T>,
    pf: &PlaneForm<T>,
) -> Result<T, Error> {
    let band = sol.band();
    let grid = CellOperator::<T>::product_grid(band, s.band(), true);
    let op = CellOperator::with_grid(s, pf, band, grid)?;
    Ok(op.energy(load, &sol.fields))
}

/// Energy with vanishing correctors: `Q2(G) + Q2(F) <theta0^2>`.
pub fn zero_corrector_bound<T: Scalar>(load: &CellLoad<T>, s: &ShapeFunction<T>, pf: &PlaneForm<T>) -> T {
    let theta_sq: T = s
        .theta_zero()
        .coeffs()
        .iter()
        .map(|c| c.norm_sqr())
        .sum();
    pf.q2(&load.g) + pf.q2(&load.f) * theta_sq
}

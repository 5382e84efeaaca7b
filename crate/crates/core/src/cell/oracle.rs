//! Real-space reference for the cell energy.
//!
//! Grid values of `(u1, v1)` on an `n x n` periodic grid, centered differences
//! `D1`, `D2` with periodic wrap, second derivatives as their compositions,
//! midpoint quadrature. The discrete energy is minimized by descent; nothing
//! here touches the Fourier machinery.

use num_traits::Float;

use super::CellLoad;
use crate::descent::{minimize, DescentParams, DescentStatus, Method, Objective};
use crate::elastic::PlaneForm;
use crate::error::Error;
use crate::scalar::{sqrt2, Scalar};
use crate::shape::ShapeFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams<T> {
    /// Stop once `|grad| <= gtol * (1 + |load|)`.
    pub gtol: T,
    pub max_iter: usize,
    /// Curvature pairs kept by the quasi-Newton direction; 0 means steepest descent.
    pub memory: usize,
}

impl<T: Scalar> Default for OracleParams<T> {
    fn default() -> Self {
        Self {
            gtol: T::lit(1e-8),
            max_iter: 50_000,
            memory: 12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult<T> {
    pub energy: T,
    pub gradient_norm: T,
    pub iterations: usize,
}

struct CellGrid<T> {
    n: usize,
    h: T,
    theta: Vec<T>,
    a: [[T; 3]; 3],
    g: [T; 3],
    f: [T; 3],
}

impl<T: Scalar> CellGrid<T> {
    fn at(&self, i1: usize, i2: usize) -> usize {
        (i2 % self.n) * self.n + (i1 % self.n)
    }

    /// Centered difference along axis 0 (`y1`) or 1 (`y2`).
    fn diff(&self, x: &[T], axis: usize) -> Vec<T> {
        let n = self.n;
        let scale = T::one() / (T::lit(2.0) * self.h);
        let mut out = vec![T::zero(); n * n];
        for i2 in 0..n {
            for i1 in 0..n {
                let (p, m) = if axis == 0 {
                    (self.at(i1 + 1, i2), self.at(i1 + n - 1, i2))
                } else {
                    (self.at(i1, i2 + 1), self.at(i1, i2 + n - 1))
                };
                out[self.at(i1, i2)] = (x[p] - x[m]) * scale;
            }
        }
        out
    }

    /// Transpose of [`CellGrid::diff`]; the stencil is antisymmetric.
    fn diff_t(&self, x: &[T], axis: usize) -> Vec<T> {
        self.diff(x, axis).into_iter().map(|v| -v).collect()
    }

    fn mul_a(&self, z: [T; 3]) -> [T; 3] {
        let a = &self.a;
        let mut out = [T::zero(); 3];
        for i in 0..3 {
            out[i] = a[i][0] * z[0] + a[i][1] * z[1] + a[i][2] * z[2];
        }
        out
    }
}

impl<T: Scalar> Objective<T> for CellGrid<T> {
    fn dim(&self) -> usize {
        3 * self.n * self.n
    }

    fn eval(&self, x: &[T], grad: &mut [T]) -> T {
        let nn = self.n * self.n;
        let (u1, rest) = x.split_at(nn);
        let (u2, v) = rest.split_at(nn);
        let r2 = sqrt2::<T>();
        let d1u1 = self.diff(u1, 0);
        let d2u1 = self.diff(u1, 1);
        let d1u2 = self.diff(u2, 0);
        let d2u2 = self.diff(u2, 1);
        let d1v = self.diff(v, 0);
        let d2v = self.diff(v, 1);
        let v11 = self.diff(&d1v, 0);
        let v22 = self.diff(&d2v, 1);
        let v12 = self.diff(&d1v, 1);

        let w = T::one() / T::from_usize_lossy(nn);
        let twelfth = T::one() / T::lit(12.0);
        let mut energy = T::zero();
        let mut sigma = [vec![T::zero(); nn], vec![T::zero(); nn], vec![T::zero(); nn]];
        let mut tau = sigma.clone();
        for p in 0..nn {
            let t = self.theta[p];
            let hess = [v11[p], v22[p], r2 * v12[p]];
            let e = [
                self.g[0] + self.f[0] * t + d1u1[p] - t * hess[0],
                self.g[1] + self.f[1] * t + d2u2[p] - t * hess[1],
                self.g[2] + self.f[2] * t + (d2u1[p] + d1u2[p]) / r2 - t * hess[2],
            ];
            let ae = self.mul_a(e);
            let ah = self.mul_a(hess);
            let mut local = T::zero();
            for c in 0..3 {
                local = local + e[c] * ae[c] + twelfth * hess[c] * ah[c];
                sigma[c][p] = T::lit(2.0) * w * ae[c];
                tau[c][p] = T::lit(2.0) * w * (twelfth * ah[c] - t * ae[c]);
            }
            energy = energy + local;
        }

        let (g1, rest) = grad.split_at_mut(nn);
        let (g2, gv) = rest.split_at_mut(nn);
        let s3: Vec<T> = sigma[2].iter().map(|s| *s / r2).collect();
        let a = self.diff_t(&sigma[0], 0);
        let b = self.diff_t(&s3, 1);
        for p in 0..nn {
            g1[p] = a[p] + b[p];
        }
        let a = self.diff_t(&sigma[1], 1);
        let b = self.diff_t(&s3, 0);
        for p in 0..nn {
            g2[p] = a[p] + b[p];
        }
        // D11 = D1 D1, D22 = D2 D2, D12 = D2 D1, so the transposes chain in reverse
        let t11 = self.diff_t(&self.diff_t(&tau[0], 0), 0);
        let t22 = self.diff_t(&self.diff_t(&tau[1], 1), 1);
        let t3: Vec<T> = tau[2].iter().map(|s| *s * r2).collect();
        let t12 = self.diff_t(&self.diff_t(&t3, 1), 0);
        for p in 0..nn {
            gv[p] = t11[p] + t22[p] + t12[p];
        }
        energy * w
    }

    fn project(&self, v: &mut [T]) {
        let nn = self.n * self.n;
        for field in v.chunks_mut(nn) {
            let mean = field.iter().copied().sum::<T>() / T::from_usize_lossy(nn);
            for x in field.iter_mut() {
                *x = *x - mean;
            }
        }
    }
}

/// Minimal real-space cell energy for `load` on an `n x n` periodic grid.
pub fn cell_oracle<T: Scalar>(
    load: &CellLoad<T>,
    s: &ShapeFunction<T>,
    pf: &PlaneForm<T>,
    n: usize,
    params: &OracleParams<T>,
) -> Result<OracleResult<T>, Error> {
    let required = 2 * s.band() + 1;
    if n < required.max(3) {
        return Err(Error::Aliasing {
            n,
            band: s.band(),
            required: required.max(3),
        });
    }
    let h = T::one() / T::from_usize_lossy(n);
    let mean = s.mean();
    let mut theta = Vec::with_capacity(n * n);
    for i2 in 0..n {
        for i1 in 0..n {
            let y1 = T::from_usize_lossy(i1) * h;
            let y2 = T::from_usize_lossy(i2) * h;
            theta.push(s.eval_direct(y1, y2) - mean);
        }
    }
    let grid = CellGrid {
        n,
        h,
        theta,
        a: pf.a_matrix,
        g: load.g.scaled(),
        f: load.f.scaled(),
    };
    let method = if params.memory == 0 {
        Method::SteepestDescent
    } else {
        Method::Lbfgs { memory: params.memory }
    };
    let tol = params.gtol * (T::one() + Float::sqrt(load.norm_sq()));
    let dp = DescentParams::new(method, tol, params.max_iter);
    let report = minimize(&grid, &vec![T::zero(); grid.dim()], &dp);
    match report.status {
        DescentStatus::Converged => Ok(OracleResult {
            energy: report.value,
            gradient_norm: report.gradient_norm,
            iterations: report.iterations,
        }),
        _ => Err(Error::IterationCap {
            iterations: report.iterations,
            gradient_norm: report.gradient_norm.to_f64_lossy(),
        }),
    }
}

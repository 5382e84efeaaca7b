//! Pseudo-spectral realization of the cell bilinear form
//!
//! ```text
//! B((u, v), (phi, w)) = int_Y <A (sym grad u - D^2 v theta0), sym grad phi - D^2 w theta0>
//!                     + (1/12) int_Y <A D^2 v, D^2 w>
//! ```
//!
//! Derivatives are Fourier multipliers; products with `theta0` are formed on a
//! (padded) grid. All symmetric-matrix fields use scaled coordinates, so `<., .>`
//! is the Euclidean product of 3-vectors.

use num_complex::Complex;
use num_traits::Float;

use super::{CellLoad, CellParams};
use crate::elastic::PlaneForm;
use crate::error::Error;
use crate::scalar::{sqrt2, Scalar};
use crate::shape::{Derivative, ShapeFunction};
use crate::spectral::{analyze_real, synthesize, Fft2, ModeLayout};

/// Coefficients of `(u1, u2, v)` stored back to back in [`ModeLayout`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct CellVector<T> {
    pub layout: ModeLayout,
    pub data: Vec<Complex<T>>,
}

impl<T: Scalar> CellVector<T> {
    pub fn zeros(layout: ModeLayout) -> Self {
        Self {
            layout,
            data: vec![Complex::new(T::zero(), T::zero()); 3 * layout.len()],
        }
    }

    pub fn u1(&self) -> &[Complex<T>] {
        &self.data[..self.layout.len()]
    }

    pub fn u2(&self) -> &[Complex<T>] {
        let l = self.layout.len();
        &self.data[l..2 * l]
    }

    pub fn v(&self) -> &[Complex<T>] {
        &self.data[2 * self.layout.len()..]
    }

    pub fn field_mut(&mut self, field: usize) -> &mut [Complex<T>] {
        let l = self.layout.len();
        &mut self.data[field * l..(field + 1) * l]
    }

    /// Real inner product `Re sum conj(a) b`.
    pub fn dot(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn norm(&self) -> T {
        Float::sqrt(self.dot(self))
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: T, other: &Self) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x = *x + *y * a;
        }
    }

    pub fn scale(&mut self, a: T) {
        for x in self.data.iter_mut() {
            *x = *x * a;
        }
    }

    /// Projects onto real-valued mean-zero fields: zero mode removed and
    /// `c_{-k} = conj(c_k)` enforced.
    pub fn enforce_real_mean_zero(&mut self) {
        let layout = self.layout;
        let half = T::lit(0.5);
        for field in 0..3 {
            let f = self.field_mut(field);
            for (k1, k2) in layout.modes() {
                let i = layout.index(k1, k2);
                let j = layout.index(-k1, -k2);
                if i < j {
                    let avg = (f[i] + f[j].conj()) * half;
                    f[i] = avg;
                    f[j] = avg.conj();
                }
            }
            f[layout.index(0, 0)] = Complex::new(T::zero(), T::zero());
        }
    }

    /// Largest Hermitian-symmetry defect over all three fields.
    pub fn hermitian_defect(&self) -> T {
        let layout = self.layout;
        let l = layout.len();
        let mut worst = T::zero();
        for field in 0..3 {
            let f = &self.data[field * l..(field + 1) * l];
            for (k1, k2) in layout.modes() {
                let d = (f[layout.index(k1, k2)] - f[layout.index(-k1, -k2)].conj()).norm();
                worst = Float::max(worst, d);
            }
        }
        worst
    }
}

/// Grid fields of the scaled symmetric gradient of `u` and Hessian of `v`.
struct StrainFields<T> {
    e: [Vec<T>; 3],
    h: [Vec<T>; 3],
}

/// Discrete cell operator for one shape, plane form and resolution.
pub struct CellOperator<T: Scalar> {
    layout: ModeLayout,
    fft: Fft2<T>,
    theta0: Vec<T>,
    a: [[T; 3]; 3],
}

impl<T: Scalar> CellOperator<T> {
    /// Product grid size: exact integration of every triple product when
    /// `dealias` is set (and never below the 3/2 rule), the bare
    /// `2N + 1` collocation grid otherwise.
    pub fn product_grid(band: usize, shape_band: usize, dealias: bool) -> usize {
        if dealias {
            let exact = 2 * band + 2 * shape_band + 1;
            let three_halves = (3 * (2 * band + 1)).div_ceil(2);
            exact.max(three_halves)
        } else {
            (2 * band + 1).max(2 * shape_band + 1)
        }
    }

    pub fn new(s: &ShapeFunction<T>, pf: &PlaneForm<T>, params: &CellParams<T>) -> Result<Self, Error> {
        params.validate(s.band())?;
        let grid = Self::product_grid(params.band, s.band(), params.dealias);
        Self::with_grid(s, pf, params.band, grid)
    }

    /// Operator on an explicit product grid of size `grid >= 2 band + 1`.
    pub fn with_grid(s: &ShapeFunction<T>, pf: &PlaneForm<T>, band: usize, grid: usize) -> Result<Self, Error> {
        if grid < 2 * band + 1 {
            return Err(Error::Aliasing {
                n: grid,
                band,
                required: 2 * band + 1,
            });
        }
        let theta0 = s.theta_zero().sample(Derivative::Value, grid)?;
        Ok(Self {
            layout: ModeLayout::new(band),
            fft: Fft2::new(grid),
            theta0,
            a: pf.a_matrix,
        })
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn grid(&self) -> usize {
        self.fft.size()
    }

    pub fn theta0(&self) -> &[T] {
        &self.theta0
    }

    fn apply_a(&self, z: [T; 3]) -> [T; 3] {
        let a = &self.a;
        [
            a[0][0] * z[0] + a[0][1] * z[1] + a[0][2] * z[2],
            a[1][0] * z[0] + a[1][1] * z[1] + a[1][2] * z[2],
            a[2][0] * z[0] + a[2][1] * z[1] + a[2][2] * z[2],
        ]
    }

    fn to_grid(&self, coeffs: &[Complex<T>]) -> Vec<T> {
        synthesize(self.layout, coeffs, &self.fft)
            .into_iter()
            .map(|c| c.re)
            .collect()
    }

    fn strain_fields(&self, x: &CellVector<T>) -> StrainFields<T> {
        let tp = T::two_pi();
        let r2 = sqrt2::<T>();
        let i = Complex::new(T::zero(), T::one());
        let n = self.layout.len();
        let mut c = vec![vec![Complex::new(T::zero(), T::zero()); n]; 6];
        for (idx, (k1, k2)) in self.layout.modes().enumerate() {
            let (k1, k2) = (T::lit(k1 as f64), T::lit(k2 as f64));
            let (u1, u2, v) = (x.u1()[idx], x.u2()[idx], x.v()[idx]);
            c[0][idx] = i * u1 * (tp * k1);
            c[1][idx] = i * u2 * (tp * k2);
            c[2][idx] = i * (u1 * k2 + u2 * k1) * (tp * r2 / T::lit(2.0));
            let m = -tp * tp;
            c[3][idx] = v * (m * k1 * k1);
            c[4][idx] = v * (m * k2 * k2);
            c[5][idx] = v * (m * r2 * k1 * k2);
        }
        let mut grids = c.iter().map(|cc| self.to_grid(cc));
        let e = [grids.next().unwrap(), grids.next().unwrap(), grids.next().unwrap()];
        let h = [grids.next().unwrap(), grids.next().unwrap(), grids.next().unwrap()];
        StrainFields { e, h }
    }

    /// Riesz representer of `(phi, w) -> int <sigma, sym grad phi> + <tau, D^2 w>`.
    fn adjoint(&self, sigma: &[Vec<T>; 3], tau: &[Vec<T>; 3]) -> CellVector<T> {
        let tp = T::two_pi();
        let r2 = sqrt2::<T>();
        let i = Complex::new(T::zero(), T::one());
        let hat = |g: &Vec<T>| analyze_real(self.layout, g, &self.fft);
        let (s1, s2, s3) = (hat(&sigma[0]), hat(&sigma[1]), hat(&sigma[2]));
        let (t1, t2, t3) = (hat(&tau[0]), hat(&tau[1]), hat(&tau[2]));
        let mut y = CellVector::zeros(self.layout);
        let n = self.layout.len();
        for (idx, (k1, k2)) in self.layout.modes().enumerate() {
            if (k1, k2) == (0, 0) {
                continue;
            }
            let (k1, k2) = (T::lit(k1 as f64), T::lit(k2 as f64));
            let half = tp * r2 / T::lit(2.0);
            y.data[idx] = -(i * (s1[idx] * (tp * k1) + s3[idx] * (half * k2)));
            y.data[n + idx] = -(i * (s2[idx] * (tp * k2) + s3[idx] * (half * k1)));
            let m = -tp * tp;
            y.data[2 * n + idx] = t1[idx] * (m * k1 * k1) + t2[idx] * (m * k2 * k2) + t3[idx] * (m * r2 * k1 * k2);
        }
        y
    }

    /// `B x`, as a coefficient vector in the same layout.
    pub fn apply(&self, x: &CellVector<T>) -> CellVector<T> {
        let StrainFields { e, h } = self.strain_fields(x);
        let twelfth = T::one() / T::lit(12.0);
        let np = self.theta0.len();
        let mut sigma = [vec![T::zero(); np], vec![T::zero(); np], vec![T::zero(); np]];
        let mut tau = sigma.clone();
        for j in 0..np {
            let t = self.theta0[j];
            let hj = [h[0][j], h[1][j], h[2][j]];
            let s = self.apply_a([e[0][j] - t * hj[0], e[1][j] - t * hj[1], e[2][j] - t * hj[2]]);
            let ah = self.apply_a(hj);
            for c in 0..3 {
                sigma[c][j] = s[c];
                tau[c][j] = -t * s[c] + twelfth * ah[c];
            }
        }
        self.adjoint(&sigma, &tau)
    }

    /// Right-hand side `-(phi, w) -> int <A(G + F theta0), sym grad phi - D^2 w theta0>`.
    pub fn rhs(&self, load: &CellLoad<T>) -> CellVector<T> {
        let g = load.g.scaled();
        let f = load.f.scaled();
        let np = self.theta0.len();
        let mut sigma = [vec![T::zero(); np], vec![T::zero(); np], vec![T::zero(); np]];
        let mut tau = sigma.clone();
        for j in 0..np {
            let t = self.theta0[j];
            // the constant part A G pairs to zero with every periodic sym grad phi
            let s = self.apply_a([g[0] + f[0] * t, g[1] + f[1] * t, g[2] + f[2] * t]);
            let sf = self.apply_a([f[0] * t, f[1] * t, f[2] * t]);
            for c in 0..3 {
                sigma[c][j] = -sf[c];
                tau[c][j] = t * s[c];
            }
        }
        self.adjoint(&sigma, &tau)
    }

    /// Inverse of the decoupled (`theta0 = 0`) operator, mode by mode.
    pub fn precondition(&self, r: &CellVector<T>) -> CellVector<T> {
        let tp = T::two_pi();
        let r2 = sqrt2::<T>();
        let a = &self.a;
        let n = self.layout.len();
        let mut z = CellVector::zeros(self.layout);
        for (idx, (k1, k2)) in self.layout.modes().enumerate() {
            if (k1, k2) == (0, 0) {
                continue;
            }
            let (k1, k2) = (T::lit(k1 as f64), T::lit(k2 as f64));
            // strain of a unit u-mode: columns of R (scaled), times 2 pi i
            let rm = [[k1, T::zero()], [T::zero(), k2], [k2 / r2, k1 / r2]];
            let mut kmat = [[T::zero(); 2]; 2];
            for p in 0..2 {
                for q in 0..2 {
                    let mut s = T::zero();
                    for i in 0..3 {
                        for j in 0..3 {
                            s = s + rm[i][p] * a[i][j] * rm[j][q];
                        }
                    }
                    kmat[p][q] = s * tp * tp;
                }
            }
            let det = kmat[0][0] * kmat[1][1] - kmat[0][1] * kmat[1][0];
            let (ru1, ru2) = (r.data[idx], r.data[n + idx]);
            z.data[idx] = (ru1 * kmat[1][1] - ru2 * kmat[0][1]) / det;
            z.data[n + idx] = (ru2 * kmat[0][0] - ru1 * kmat[1][0]) / det;
            let hv = [k1 * k1, k2 * k2, r2 * k1 * k2];
            let mut q = T::zero();
            for i in 0..3 {
                for j in 0..3 {
                    q = q + hv[i] * a[i][j] * hv[j];
                }
            }
            let w = q * Float::powi(tp, 4) / T::lit(12.0);
            z.data[2 * n + idx] = r.data[2 * n + idx] / w;
        }
        z
    }

    /// Grid samples of `S = G + F theta0 + sym grad u - D^2 v theta0` and `D^2 v`.
    fn total_strain(&self, load: &CellLoad<T>, x: &CellVector<T>) -> ([Vec<T>; 3], [Vec<T>; 3]) {
        let StrainFields { mut e, h } = self.strain_fields(x);
        let g = load.g.scaled();
        let f = load.f.scaled();
        for j in 0..self.theta0.len() {
            let t = self.theta0[j];
            for c in 0..3 {
                e[c][j] = e[c][j] + g[c] + f[c] * t - t * h[c][j];
            }
        }
        (e, h)
    }

    /// Cell energy `I(u1, v1)` by grid quadrature.
    pub fn energy(&self, load: &CellLoad<T>, x: &CellVector<T>) -> T {
        self.bilinear_energy(load, x, load, x)
    }

    /// Symmetric bilinear version of [`CellOperator::energy`].
    pub fn bilinear_energy(&self, la: &CellLoad<T>, xa: &CellVector<T>, lb: &CellLoad<T>, xb: &CellVector<T>) -> T {
        let (sa, ha) = self.total_strain(la, xa);
        let (sb, hb) = if std::ptr::eq(la, lb) && std::ptr::eq(xa, xb) {
            (sa.clone(), ha.clone())
        } else {
            self.total_strain(lb, xb)
        };
        let twelfth = T::one() / T::lit(12.0);
        let np = self.theta0.len();
        let mut total = T::zero();
        for j in 0..np {
            let asb = self.apply_a([sb[0][j], sb[1][j], sb[2][j]]);
            let ahb = self.apply_a([hb[0][j], hb[1][j], hb[2][j]]);
            let mut v = T::zero();
            for c in 0..3 {
                v = v + sa[c][j] * asb[c] + twelfth * ha[c][j] * ahb[c];
            }
            total = total + v;
        }
        total / T::from_usize_lossy(np)
    }
}

/// Applies the cell operator built from `s`, `pf` and `params` to `x`.
pub fn cell_operator_apply<T: Scalar>(
    x: &CellVector<T>,
    s: &ShapeFunction<T>,
    pf: &PlaneForm<T>,
    params: &CellParams<T>,
) -> Result<CellVector<T>, Error> {
    let op = CellOperator::new(s, pf, params)?;
    if x.layout != op.layout() {
        return Err(Error::InvalidParams(format!(
            "vector band {} does not match operator band {}",
            x.layout.band, params.band
        )));
    }
    Ok(op.apply(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elastic::{plane_form, ElasticModel};
    use crate::shape::{make_shape, ShapeSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vector(layout: ModeLayout, rng: &mut ChaCha8Rng) -> CellVector<f64> {
        let mut x = CellVector::zeros(layout);
        for c in x.data.iter_mut() {
            *c = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        x.enforce_real_mean_zero();
        x
    }

    fn setup(spec: ShapeSpec<f64>, band: usize) -> (CellOperator<f64>, ShapeFunction<f64>, PlaneForm<f64>) {
        let s = make_shape(&spec).unwrap();
        let pf = plane_form(&ElasticModel::isotropic(1.0, 1.0).unwrap()).unwrap();
        let op = CellOperator::new(&s, &pf, &CellParams::new(band)).unwrap();
        (op, s, pf)
    }

    #[test]
    fn zero_maps_to_zero() {
        let (op, _, _) = setup(ShapeSpec::Eggbox { amplitude: 1.0 }, 4);
        let y = op.apply(&CellVector::zeros(op.layout()));
        assert!(y.norm() == 0.0);
    }

    #[test]
    fn operator_is_symmetric_and_nonnegative() {
        let (op, _, _) = setup(ShapeSpec::Eggbox { amplitude: 1.0 }, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let x = random_vector(op.layout(), &mut rng);
            let xp = random_vector(op.layout(), &mut rng);
            let a = op.apply(&x).dot(&xp);
            let b = x.dot(&op.apply(&xp));
            assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()), "{a} vs {b}");
            assert!(op.apply(&x).dot(&x) > 0.0);
        }
    }

    #[test]
    fn quadratic_form_matches_energy() {
        // I(x) = I(0) - 2 <b, x> + <Bx, x> with b the right-hand side
        let (op, _, _) = setup(ShapeSpec::Eggbox { amplitude: 0.7 }, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_vector(op.layout(), &mut rng);
        let load = CellLoad::from_scaled([0.3, -0.2, 0.5, 1.0, 0.4, -0.6]);
        let zero = CellVector::zeros(op.layout());
        let direct = op.energy(&load, &x);
        let expanded = op.energy(&load, &zero) - 2.0 * op.rhs(&load).dot(&x) + op.apply(&x).dot(&x);
        assert!((direct - expanded).abs() < 1e-11 * direct.abs());
    }

    #[test]
    fn flat_shape_decouples_membrane_and_bending() {
        let (op, _, _) = setup(ShapeSpec::Flat, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut x = random_vector(op.layout(), &mut rng);
        let n = op.layout().len();
        for c in x.data[2 * n..].iter_mut() {
            *c = Complex::new(0.0, 0.0);
        }
        let y = op.apply(&x);
        assert!(y.v().iter().all(|c| c.norm() < 1e-12));
        // per-mode membrane action equals the exact decoupled operator
        let z = op.precondition(&y);
        let mut diff = z.clone();
        diff.axpy(-1.0, &x);
        assert!(diff.norm() < 1e-12 * x.norm());
    }
}

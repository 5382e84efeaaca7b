//! Elastic quadratic forms: the 3D form `Q3`, its relaxation `Q2` over transverse
//! stretches, the symmetric operator realizing `Q2` and the optimal-stretch map.
//!
//! Symmetric 2x2 matrices are stored as `(a11, a22, a12)`. Whenever a Euclidean
//! product must reproduce the Frobenius product they are mapped to the scaled
//! coordinates `(a11, a22, sqrt(2) a12)`.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Float;

use crate::error::Error;
use crate::linalg::{solve3, symmetric_eigen};
use crate::scalar::{sqrt2, Scalar};

pub type Mat3<T> = [[T; 3]; 3];

/// Isotropic Lame pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicModuli<T> {
    pub mu: T,
    pub lambda: T,
}

impl<T: Scalar> IsotropicModuli<T> {
    pub fn new(mu: T, lambda: T) -> Result<Self, Error> {
        let m = Self { mu, lambda };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.mu > T::zero()) {
            return Err(Error::InvalidModel(format!("mu must be positive, got {}", self.mu)));
        }
        if !(T::lit(2.0) * self.mu + self.lambda > T::zero()) {
            return Err(Error::InvalidModel(format!(
                "2 mu + lambda must be positive, got mu={} lambda={}",
                self.mu, self.lambda
            )));
        }
        Ok(())
    }

    /// `2 mu |sym F|^2 + lambda (tr F)^2`.
    pub fn q3(&self, f: &Mat3<T>) -> T {
        let s = sym3(f);
        let tr = s[0][0] + s[1][1] + s[2][2];
        T::lit(2.0) * self.mu * frob3(&s, &s) + self.lambda * tr * tr
    }

    /// Plane-stress closed form `2 mu |sym G|^2 + 2 mu lambda / (2 mu + lambda) (tr G)^2`.
    pub fn q2_closed_form(&self, g: &SymMat2<T>) -> T {
        let two_mu = T::lit(2.0) * self.mu;
        let tr = g.trace();
        two_mu * g.norm_sq() + two_mu * self.lambda / (two_mu + self.lambda) * tr * tr
    }
}

/// General 3D elasticity tensor `C[i][j][k][l]` with minor and major symmetries.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticTensor3<T> {
    pub entries: [[[[T; 3]; 3]; 3]; 3],
}

const VOIGT: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];

fn voigt_index(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) => 3,
        (0, 2) => 4,
        _ => 5,
    }
}

impl<T: Scalar> ElasticTensor3<T> {
    pub fn from_isotropic(m: &IsotropicModuli<T>) -> Self {
        let mut entries = [[[[T::zero(); 3]; 3]; 3]; 3];
        let d = |a: usize, b: usize| if a == b { T::one() } else { T::zero() };
        for (i, ei) in entries.iter_mut().enumerate() {
            for (j, eij) in ei.iter_mut().enumerate() {
                for (k, eijk) in eij.iter_mut().enumerate() {
                    for (l, c) in eijk.iter_mut().enumerate() {
                        *c = m.lambda * d(i, j) * d(k, l) + m.mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
                    }
                }
            }
        }
        Self { entries }
    }

    /// Builds the tensor from a 6x6 Voigt stiffness matrix in the order
    /// (11, 22, 33, 23, 13, 12) acting on engineering shear strains, so that
    /// `Q3(F) = gamma^T C gamma` with `gamma = (e11, e22, e33, 2e23, 2e13, 2e12)`.
    pub fn from_voigt(c: &[[T; 6]; 6]) -> Result<Self, Error> {
        for (i, row) in c.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let tol = T::lit(1e-12) * (T::one() + v.mag());
                if (*v - c[j][i]).mag() > tol {
                    return Err(Error::InvalidModel(format!(
                        "Voigt matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let mut entries = [[[[T::zero(); 3]; 3]; 3]; 3];
        for (i, ei) in entries.iter_mut().enumerate() {
            for (j, eij) in ei.iter_mut().enumerate() {
                for (k, eijk) in eij.iter_mut().enumerate() {
                    for (l, e) in eijk.iter_mut().enumerate() {
                        *e = c[voigt_index(i, j)][voigt_index(k, l)];
                    }
                }
            }
        }
        let t = Self { entries };
        t.validate()?;
        Ok(t)
    }

    /// Builds the tensor from the 21 upper-triangular Voigt entries, row-major.
    pub fn from_voigt_upper(upper: &[T]) -> Result<Self, Error> {
        if upper.len() != 21 {
            return Err(Error::InvalidModel(format!(
                "expected 21 independent entries, got {}",
                upper.len()
            )));
        }
        let mut c = [[T::zero(); 6]; 6];
        let mut it = upper.iter();
        for i in 0..6 {
            for j in i..6 {
                let v = *it.next().unwrap();
                c[i][j] = v;
                c[j][i] = v;
            }
        }
        Self::from_voigt(&c)
    }

    /// The 21 upper-triangular Voigt entries, row-major.
    pub fn voigt_upper(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(21);
        for i in 0..6 {
            for j in i..6 {
                let (a, b) = VOIGT[i];
                let (c, d) = VOIGT[j];
                out.push(self.entries[a][b][c][d]);
            }
        }
        out
    }

    /// 6x6 matrix of the form in an orthonormal basis of symmetric 3x3 matrices.
    pub fn mandel(&self) -> Vec<Vec<T>> {
        let basis: Vec<Mat3<T>> = VOIGT
            .iter()
            .map(|&(i, j)| {
                let mut e = [[T::zero(); 3]; 3];
                if i == j {
                    e[i][i] = T::one();
                } else {
                    let s = T::one() / sqrt2::<T>();
                    e[i][j] = s;
                    e[j][i] = s;
                }
                e
            })
            .collect();
        basis
            .iter()
            .map(|a| basis.iter().map(|b| self.bilinear(a, b)).collect())
            .collect()
    }

    pub fn validate(&self) -> Result<(), Error> {
        let c = &self.entries;
        let scale = c
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(T::zero(), |m, v| Float::max(m, v.mag()));
        let tol = T::lit(1e-12) * (T::one() + scale);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let v = c[i][j][k][l];
                        if (v - c[j][i][k][l]).mag() > tol
                            || (v - c[i][j][l][k]).mag() > tol
                            || (v - c[k][l][i][j]).mag() > tol
                        {
                            return Err(Error::InvalidModel(format!(
                                "tensor symmetry violated at ({i},{j},{k},{l})"
                            )));
                        }
                    }
                }
            }
        }
        let (vals, _) = symmetric_eigen(&self.mandel());
        if !(vals[0] > T::zero()) {
            return Err(Error::InvalidModel(format!(
                "tensor is not positive definite on symmetric matrices (smallest eigenvalue {})",
                vals[0]
            )));
        }
        Ok(())
    }

    pub fn bilinear(&self, a: &Mat3<T>, b: &Mat3<T>) -> T {
        let mut s = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                if a[i][j] == T::zero() {
                    continue;
                }
                for k in 0..3 {
                    for l in 0..3 {
                        s = s + self.entries[i][j][k][l] * a[i][j] * b[k][l];
                    }
                }
            }
        }
        s
    }

    pub fn q3(&self, f: &Mat3<T>) -> T {
        self.bilinear(f, f)
    }
}

/// A 3D elastic model: isotropic or general anisotropic.
#[derive(Debug, Clone, PartialEq)]
pub enum ElasticModel<T> {
    Isotropic(IsotropicModuli<T>),
    Tensor(ElasticTensor3<T>),
}

impl<T: Scalar> ElasticModel<T> {
    pub fn isotropic(mu: T, lambda: T) -> Result<Self, Error> {
        Ok(Self::Isotropic(IsotropicModuli::new(mu, lambda)?))
    }

    pub fn validate(&self) -> Result<(), Error> {
        match self {
            Self::Isotropic(m) => m.validate(),
            Self::Tensor(t) => t.validate(),
        }
    }

    /// Tensor representation; the isotropic model is expanded to its full tensor.
    pub fn tensor(&self) -> ElasticTensor3<T> {
        match self {
            Self::Isotropic(m) => ElasticTensor3::from_isotropic(m),
            Self::Tensor(t) => t.clone(),
        }
    }
}

/// Symmetric 2x2 matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMat2<T> {
    pub a11: T,
    pub a22: T,
    pub a12: T,
}

impl<T: Scalar> SymMat2<T> {
    pub fn new(a11: T, a22: T, a12: T) -> Self {
        Self { a11, a22, a12 }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::one(), T::zero())
    }

    /// `(a11, a22, sqrt(2) a12)`.
    pub fn scaled(&self) -> [T; 3] {
        [self.a11, self.a22, sqrt2::<T>() * self.a12]
    }

    pub fn from_scaled(z: [T; 3]) -> Self {
        Self::new(z[0], z[1], z[2] / sqrt2::<T>())
    }

    /// Symmetric part of a general 2x2 matrix.
    pub fn sym_of(m: [[T; 2]; 2]) -> Self {
        Self::new(m[0][0], m[1][1], (m[0][1] + m[1][0]) / T::lit(2.0))
    }

    pub fn trace(&self) -> T {
        self.a11 + self.a22
    }

    pub fn dot(&self, other: &Self) -> T {
        self.a11 * other.a11 + self.a22 * other.a22 + T::lit(2.0) * self.a12 * other.a12
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    /// Embeds into the upper-left block of a 3x3 matrix.
    pub fn embed3(&self) -> Mat3<T> {
        let z = T::zero();
        [[self.a11, self.a12, z], [self.a12, self.a22, z], [z, z, z]]
    }
}

impl<T: Scalar> Add for SymMat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a11 + o.a11, self.a22 + o.a22, self.a12 + o.a12)
    }
}

impl<T: Scalar> Sub for SymMat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a11 - o.a11, self.a22 - o.a22, self.a12 - o.a12)
    }
}

impl<T: Scalar> Neg for SymMat2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a11, -self.a22, -self.a12)
    }
}

impl<T: Scalar> Mul<T> for SymMat2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.a11 * s, self.a22 * s, self.a12 * s)
    }
}

/// Symmetric positive-definite matrix of `Q2` in scaled coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneForm<T> {
    pub a_matrix: [[T; 3]; 3],
}

impl<T: Scalar> PlaneForm<T> {
    pub fn q2(&self, g: &SymMat2<T>) -> T {
        self.q2_scaled(&g.scaled())
    }

    pub fn q2_scaled(&self, z: &[T; 3]) -> T {
        let az = self.apply_scaled(z);
        z[0] * az[0] + z[1] * az[1] + z[2] * az[2]
    }

    /// The operator realizing `Q2`, acting on scaled coordinates.
    pub fn apply_scaled(&self, z: &[T; 3]) -> [T; 3] {
        let a = &self.a_matrix;
        [
            a[0][0] * z[0] + a[0][1] * z[1] + a[0][2] * z[2],
            a[1][0] * z[0] + a[1][1] * z[1] + a[1][2] * z[2],
            a[2][0] * z[0] + a[2][1] * z[1] + a[2][2] * z[2],
        ]
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        let m: Vec<Vec<T>> = self.a_matrix.iter().map(|r| r.to_vec()).collect();
        symmetric_eigen(&m).0
    }
}

fn sym3<T: Scalar>(f: &Mat3<T>) -> Mat3<T> {
    let mut s = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = (f[i][j] + f[j][i]) / T::lit(2.0);
        }
    }
    s
}

fn frob3<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> T {
    let mut s = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            s = s + a[i][j] * b[i][j];
        }
    }
    s
}

/// `a (x) e3 + e3 (x) a`.
fn stretch<T: Scalar>(a: &[T; 3]) -> Mat3<T> {
    let z = T::zero();
    [
        [z, z, a[0]],
        [z, z, a[1]],
        [a[0], a[1], T::lit(2.0) * a[2]],
    ]
}

fn add3<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut s = *a;
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = s[i][j] + b[i][j];
        }
    }
    s
}

/// `Q3(F)`; depends only on `sym F`.
pub fn q3_eval<T: Scalar>(model: &ElasticModel<T>, f: &Mat3<T>) -> T {
    match model {
        ElasticModel::Isotropic(m) => m.q3(f),
        ElasticModel::Tensor(t) => t.q3(f),
    }
}

/// Minimizer `a` of `Q3(G + a (x) e3 + e3 (x) a)`, from the 3x3 stationarity system.
pub fn optimal_stretch<T: Scalar>(model: &ElasticModel<T>, g: &SymMat2<T>) -> Result<[T; 3], Error> {
    let c = model.tensor();
    let gh = g.embed3();
    let unit = |p: usize| {
        let mut a = [T::zero(); 3];
        a[p] = T::one();
        stretch(&a)
    };
    let basis = [unit(0), unit(1), unit(2)];
    let mut k = [[T::zero(); 3]; 3];
    let mut r = [T::zero(); 3];
    for p in 0..3 {
        for q in 0..3 {
            k[p][q] = c.bilinear(&basis[p], &basis[q]);
        }
        r[p] = -c.bilinear(&gh, &basis[p]);
    }
    solve3(k, r)
}

/// `Q2(G) = min_a Q3(G + a (x) e3 + e3 (x) a)`.
pub fn q2_from_q3<T: Scalar>(model: &ElasticModel<T>, g: &SymMat2<T>) -> Result<T, Error> {
    let a = optimal_stretch(model, g)?;
    let f = add3(&g.embed3(), &stretch(&a));
    Ok(q3_eval(model, &f))
}

/// Assembles the scaled-coordinate matrix of `Q2` by polarization over basis matrices.
pub fn plane_form<T: Scalar>(model: &ElasticModel<T>) -> Result<PlaneForm<T>, Error> {
    model.validate()?;
    let basis: Vec<SymMat2<T>> = (0..3)
        .map(|i| {
            let mut z = [T::zero(); 3];
            z[i] = T::one();
            SymMat2::from_scaled(z)
        })
        .collect();
    let diag: Vec<T> = basis
        .iter()
        .map(|b| q2_from_q3(model, b))
        .collect::<Result<_, _>>()?;
    let mut a = [[T::zero(); 3]; 3];
    for i in 0..3 {
        a[i][i] = diag[i];
        for j in 0..i {
            let q = q2_from_q3(model, &(basis[i] + basis[j]))?;
            let v = (q - diag[i] - diag[j]) / T::lit(2.0);
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    let pf = PlaneForm { a_matrix: a };
    if !(pf.eigenvalues()[0] > T::zero()) {
        return Err(Error::InvalidModel("plane form is not positive definite".into()));
    }
    Ok(pf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn iso(mu: f64, lambda: f64) -> ElasticModel<f64> {
        ElasticModel::isotropic(mu, lambda).unwrap()
    }

    fn eye3() -> Mat3<f64> {
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    }

    #[test]
    fn q3_identity_values() {
        assert_relative_eq!(q3_eval(&iso(1.0, 0.0), &eye3()), 6.0, max_relative = 1e-15);
        let t = ElasticModel::Tensor(ElasticTensor3::from_isotropic(&IsotropicModuli::new(1.0, 1.0).unwrap()));
        assert_relative_eq!(q3_eval(&t, &eye3()), 15.0, max_relative = 1e-15);
        assert_relative_eq!(q3_eval(&iso(1.0, 1.0), &eye3()), 15.0, max_relative = 1e-15);
    }

    #[test]
    fn q3_vanishes_on_skew() {
        let w = [[0.0, 1.3, -0.2], [-1.3, 0.0, 0.7], [0.2, -0.7, 0.0]];
        assert_eq!(q3_eval(&iso(2.0, 0.5), &w), 0.0);
        let t = ElasticModel::Tensor(iso(2.0, 0.5).tensor());
        assert!(q3_eval(&t, &w).abs() < 1e-15);
    }

    #[test]
    fn q2_reference_values() {
        let id = SymMat2::identity();
        assert_relative_eq!(q2_from_q3(&iso(1.0, 1.0), &id).unwrap(), 20.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(q2_from_q3(&iso(1.0, 0.0), &id).unwrap(), 4.0, max_relative = 1e-14);
        assert_eq!(q2_from_q3(&iso(1.0, 1.0), &SymMat2::zero()).unwrap(), 0.0);
    }

    #[test]
    fn isotropic_stretch_is_transverse_only() {
        let (mu, lambda) = (1.7, 0.9);
        let g = SymMat2::new(0.3, -1.1, 0.45);
        let a = optimal_stretch(&iso(mu, lambda), &g).unwrap();
        assert!(a[0].abs() < 1e-15 && a[1].abs() < 1e-15);
        let expected = -lambda * g.trace() / (2.0 * (2.0 * mu + lambda));
        assert_relative_eq!(a[2], expected, max_relative = 1e-13);
        assert_eq!(optimal_stretch(&iso(mu, lambda), &SymMat2::zero()).unwrap(), [0.0; 3]);
    }

    #[test]
    fn plane_form_reference_matrices() {
        let pf = plane_form(&iso(1.0, 1.0)).unwrap();
        assert_relative_eq!(pf.a_matrix[0][0], 8.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(pf.a_matrix[1][1], 8.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(pf.a_matrix[2][2], 2.0, max_relative = 1e-14);
        let pf0 = plane_form(&iso(1.0, 0.0)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 2.0 } else { 0.0 };
                assert!((pf0.a_matrix[i][j] - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn invalid_moduli_rejected() {
        assert!(IsotropicModuli::new(0.0, 1.0).is_err());
        assert!(IsotropicModuli::new(1.0, -2.5).is_err());
        assert!(ElasticTensor3::from_voigt_upper(&[1.0; 20]).is_err());
    }

    #[test]
    fn voigt_round_trip_matches_isotropic() {
        let m = IsotropicModuli::new(1.3, 0.4).unwrap();
        let t = ElasticTensor3::from_isotropic(&m);
        let again = ElasticTensor3::from_voigt_upper(&t.voigt_upper()).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn indefinite_tensor_rejected() {
        let mut c = [[0.0; 6]; 6];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        c[2][2] = -0.5;
        assert!(matches!(ElasticTensor3::from_voigt(&c), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn single_precision_closed_form() {
        let m = ElasticModel::isotropic(1.0f32, 1.0f32).unwrap();
        let v = q2_from_q3(&m, &SymMat2::identity()).unwrap();
        assert!((v - 20.0 / 3.0).abs() < 1e-5);
    }
}

//! Periodic shape function of the wrinkle profile on the unit torus.
//!
//! Shapes are trigonometric polynomials, so spectral differentiation and grid
//! sampling are exact once the grid resolves the band limit.

use num_complex::Complex;
use num_traits::Float;

use crate::elastic::SymMat2;
use crate::error::Error;
use crate::linalg::symmetric_eigen;
use crate::scalar::{max_abs, sqrt2, Scalar};
use crate::spectral::{synthesize, Fft2, ModeLayout};

/// One Fourier coefficient `c_k` of a user-supplied shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawCoefficient<T> {
    pub k1: i64,
    pub k2: i64,
    pub re: T,
    pub im: T,
}

/// How to build a shape function.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeSpec<T> {
    /// `theta = 0`.
    Flat,
    /// `theta = amplitude * sin(2 pi y1)`.
    Uniwave { amplitude: T },
    /// `theta = amplitude * sin(2 pi y1) sin(2 pi y2)`.
    Eggbox { amplitude: T },
    /// Raw Hermitian coefficient list; `band` defaults to the largest supplied `|k|_inf`.
    Custom {
        coefficients: Vec<RawCoefficient<T>>,
        band: Option<usize>,
    },
}

/// Which derivative of the shape to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Value,
    D1,
    D2,
    D11,
    D22,
    D12,
}

impl Derivative {
    fn orders(self) -> (u32, u32) {
        match self {
            Self::Value => (0, 0),
            Self::D1 => (1, 0),
            Self::D2 => (0, 1),
            Self::D11 => (2, 0),
            Self::D22 => (0, 2),
            Self::D12 => (1, 1),
        }
    }
}

/// Real band-limited periodic function held by its Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeFunction<T> {
    band: usize,
    coeffs: Vec<Complex<T>>,
}

const HERMITIAN_TOL: f64 = 1e-12;

impl<T: Scalar> ShapeFunction<T> {
    pub fn flat() -> Self {
        Self {
            band: 0,
            coeffs: vec![Complex::new(T::zero(), T::zero())],
        }
    }

    /// Builds a shape from coefficients in [`ModeLayout`] order, checking Hermitian symmetry.
    pub fn from_layout_coeffs(band: usize, coeffs: Vec<Complex<T>>) -> Result<Self, Error> {
        let layout = ModeLayout::new(band);
        if coeffs.len() != layout.len() {
            return Err(Error::InvalidShape(format!(
                "expected {} coefficients for band {band}, got {}",
                layout.len(),
                coeffs.len()
            )));
        }
        let scale = coeffs.iter().fold(T::zero(), |m, c| Float::max(m, c.norm()));
        let tol = T::lit(HERMITIAN_TOL) * Float::max(scale, T::min_positive_value());
        for (k1, k2) in layout.modes() {
            let c = coeffs[layout.index(k1, k2)];
            let mirror = coeffs[layout.index(-k1, -k2)].conj();
            if (c - mirror).norm() > tol {
                return Err(Error::InvalidShape(format!(
                    "coefficients are not Hermitian at k=({k1},{k2}): theta would not be real"
                )));
            }
        }
        Ok(Self { band, coeffs })
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn layout(&self) -> ModeLayout {
        ModeLayout::new(self.band)
    }

    pub fn coeff(&self, k1: i64, k2: i64) -> Complex<T> {
        let layout = self.layout();
        if layout.contains(k1, k2) {
            self.coeffs[layout.index(k1, k2)]
        } else {
            Complex::new(T::zero(), T::zero())
        }
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Nonzero coefficients as `(k1, k2, c_k)`.
    pub fn nonzero_modes(&self) -> Vec<(i64, i64, Complex<T>)> {
        self.layout()
            .modes()
            .zip(&self.coeffs)
            .filter(|(_, c)| c.norm() > T::zero())
            .map(|((k1, k2), c)| (k1, k2, *c))
            .collect()
    }

    /// The mean `<theta>`.
    pub fn mean(&self) -> T {
        self.coeff(0, 0).re
    }

    /// `theta_0 = theta - <theta>`.
    pub fn theta_zero(&self) -> Self {
        let mut out = self.clone();
        let i = self.layout().index(0, 0);
        out.coeffs[i] = Complex::new(T::zero(), T::zero());
        out
    }

    pub fn is_flat(&self) -> bool {
        self.theta_zero().coeffs.iter().all(|c| c.norm() == T::zero())
    }

    /// Smallest grid size that samples the shape without aliasing.
    pub fn min_grid(&self) -> usize {
        2 * self.band + 1
    }

    /// Coefficients of a derivative, in [`ModeLayout`] order.
    pub fn derivative_coeffs(&self, derivative: Derivative) -> Vec<Complex<T>> {
        let (p, q) = derivative.orders();
        let two_pi = T::two_pi();
        self.layout()
            .modes()
            .zip(&self.coeffs)
            .map(|((k1, k2), c)| {
                let i1 = Complex::new(T::zero(), two_pi * T::lit(k1 as f64));
                let i2 = Complex::new(T::zero(), two_pi * T::lit(k2 as f64));
                *c * i1.powu(p) * i2.powu(q)
            })
            .collect()
    }

    /// Complex samples of a derivative on the `n x n` grid (imaginary parts are round-off).
    pub fn sample_complex(&self, derivative: Derivative, n: usize) -> Result<Vec<Complex<T>>, Error> {
        if n < self.min_grid() {
            return Err(Error::Aliasing {
                n,
                band: self.band,
                required: self.min_grid(),
            });
        }
        let fft = Fft2::new(n);
        Ok(synthesize(self.layout(), &self.derivative_coeffs(derivative), &fft))
    }

    /// Exact values of a derivative at the grid nodes `(j1 / n, j2 / n)`.
    pub fn sample(&self, derivative: Derivative, n: usize) -> Result<Vec<T>, Error> {
        Ok(self.sample_complex(derivative, n)?.into_iter().map(|c| c.re).collect())
    }

    /// Direct evaluation `sum_k c_k exp(2 pi i k.y)` at one point, without transforms.
    pub fn eval_direct(&self, y1: T, y2: T) -> T {
        let two_pi = T::two_pi();
        self.layout()
            .modes()
            .zip(&self.coeffs)
            .filter(|(_, c)| c.norm() > T::zero())
            .map(|((k1, k2), c)| {
                let phase = two_pi * (T::lit(k1 as f64) * y1 + T::lit(k2 as f64) * y2);
                c.re * phase.cos() - c.im * phase.sin()
            })
            .sum()
    }
}

/// Builds a shape from a catalog entry or a raw coefficient list.
pub fn make_shape<T: Scalar>(spec: &ShapeSpec<T>) -> Result<ShapeFunction<T>, Error> {
    let raw = |k1, k2, re: T, im: T| RawCoefficient { k1, k2, re, im };
    let (coefficients, band) = match spec {
        ShapeSpec::Flat => return Ok(ShapeFunction::flat()),
        ShapeSpec::Uniwave { amplitude } => {
            let h = *amplitude / T::lit(2.0);
            (vec![raw(1, 0, T::zero(), -h), raw(-1, 0, T::zero(), h)], None)
        }
        ShapeSpec::Eggbox { amplitude } => {
            let q = *amplitude / T::lit(4.0);
            (
                vec![
                    raw(1, 1, -q, T::zero()),
                    raw(-1, -1, -q, T::zero()),
                    raw(1, -1, q, T::zero()),
                    raw(-1, 1, q, T::zero()),
                ],
                None,
            )
        }
        ShapeSpec::Custom { coefficients, band } => (coefficients.clone(), *band),
    };
    let needed = coefficients
        .iter()
        .map(|c| c.k1.unsigned_abs().max(c.k2.unsigned_abs()) as usize)
        .max()
        .unwrap_or(0);
    let band = match band {
        Some(b) if b < needed => {
            return Err(Error::InvalidShape(format!(
                "band limit {b} is below the largest supplied |k| = {needed}"
            )))
        }
        Some(b) => b,
        None => needed,
    };
    let layout = ModeLayout::new(band);
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); layout.len()];
    let mut seen = vec![false; layout.len()];
    for c in &coefficients {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::InvalidShape(format!("non-finite coefficient at k=({},{})", c.k1, c.k2)));
        }
        let i = layout.index(c.k1, c.k2);
        if seen[i] {
            return Err(Error::InvalidShape(format!("duplicate coefficient at k=({},{})", c.k1, c.k2)));
        }
        seen[i] = true;
        coeffs[i] = Complex::new(c.re, c.im);
    }
    ShapeFunction::from_layout_coeffs(band, coeffs)
}

/// Orthonormal (Frobenius) basis of the subspace `V` of symmetric matrices `A`
/// with `a11 d22 theta + a22 d11 theta - 2 a12 d12 theta = 0` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis<T> {
    pub vectors: Vec<SymMat2<T>>,
}

impl<T: Scalar> KernelBasis<T> {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Component of `f` orthogonal to `V`.
    pub fn perp(&self, f: &SymMat2<T>) -> SymMat2<T> {
        self.vectors
            .iter()
            .fold(*f, |acc, v| acc - *v * v.dot(f))
    }
}

/// Relative coefficient threshold below which a mode does not constrain `V`.
pub const KERNEL_MODE_TOL: f64 = 1e-12;

/// Computes `V` from the active Fourier modes of the shape.
///
/// Each active `k != 0` contributes `a11 k2^2 + a22 k1^2 - 2 a12 k1 k2 = 0`;
/// a mode is active when `|c_k| > tol * max_{k != 0} |c_k|`.
pub fn compute_kernel_v<T: Scalar>(s: &ShapeFunction<T>, tol: T) -> KernelBasis<T> {
    let modes: Vec<(i64, i64, Complex<T>)> = s
        .nonzero_modes()
        .into_iter()
        .filter(|&(k1, k2, _)| (k1, k2) != (0, 0))
        .collect();
    let cmax = modes.iter().fold(T::zero(), |m, (_, _, c)| Float::max(m, c.norm()));
    let mut gram = vec![vec![T::zero(); 3]; 3];
    for (k1, k2, c) in &modes {
        if c.norm() <= tol * cmax {
            continue;
        }
        let (k1, k2) = (T::lit(*k1 as f64), T::lit(*k2 as f64));
        let kk = k1 * k1 + k2 * k2;
        // unit row in scaled coordinates (a11, a22, sqrt2 a12)
        let row = [k2 * k2 / kk, k1 * k1 / kk, -sqrt2::<T>() * k1 * k2 / kk];
        for i in 0..3 {
            for j in 0..3 {
                gram[i][j] = gram[i][j] + row[i] * row[j];
            }
        }
    }
    let (vals, vecs) = symmetric_eigen(&gram);
    let top = Float::max(vals[2], T::one());
    let mut vectors = Vec::new();
    for (j, val) in vals.iter().enumerate() {
        if *val > T::lit(1e-9) * top {
            continue;
        }
        let mut z = [vecs[0][j], vecs[1][j], vecs[2][j]];
        let lead = z.iter().copied().find(|x| x.mag() > T::lit(1e-8)).unwrap_or(T::one());
        if lead < T::zero() {
            z = [-z[0], -z[1], -z[2]];
        }
        vectors.push(SymMat2::from_scaled(z));
    }
    KernelBasis { vectors }
}

/// Maximum over an `n x n` grid of `|a11 d22 theta + a22 d11 theta - 2 a12 d12 theta|`,
/// relative to `max |D^2 theta|`.
pub fn kernel_residual<T: Scalar>(s: &ShapeFunction<T>, a: &SymMat2<T>, n: usize) -> Result<T, Error> {
    let d11 = s.sample(Derivative::D11, n)?;
    let d22 = s.sample(Derivative::D22, n)?;
    let d12 = s.sample(Derivative::D12, n)?;
    let scale = Float::max(Float::max(max_abs(&d11), max_abs(&d22)), max_abs(&d12));
    if scale == T::zero() {
        return Ok(T::zero());
    }
    let worst = d11
        .iter()
        .zip(&d22)
        .zip(&d12)
        .map(|((h11, h22), h12)| (a.a11 * *h22 + a.a22 * *h11 - T::lit(2.0) * a.a12 * *h12).mag())
        .fold(T::zero(), Float::max);
    Ok(worst / scale)
}

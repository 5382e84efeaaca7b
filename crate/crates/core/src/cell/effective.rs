use num_traits::Float;
use rayon::prelude::*;

use super::operator::CellOperator;
use super::solve::{pcg, CorrectorSolution};
use super::{CellLoad, CellParams};
use crate::elastic::PlaneForm;
use crate::error::Error;
use crate::linalg::{bilinear, orthogonal_complement, symmetric_eigen};
use crate::scalar::Scalar;
use crate::shape::{compute_kernel_v, KernelBasis, ShapeFunction, KERNEL_MODE_TOL};

/// Coordinate convention of the 6x6 effective matrix.
pub const CONVENTION: &str =
    "z = (G11, G22, sqrt(2)*G12, F11, F22, sqrt(2)*F12); Q2H(G, F) = z^T M z";

/// Eigenvalues below this fraction of `|M|` count as kernel.
pub const KERNEL_EIGEN_TOL: f64 = 1e-8;

/// Names of the six unit loads, in the order of the flat coordinates.
pub const BASIS_NAMES: [&str; 6] = ["G11", "G22", "G12", "F11", "F22", "F12"];

/// Effective quadratic form `Q2H` on pairs of symmetric matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveForm<T> {
    /// Symmetric positive-semidefinite matrix in the coordinates of [`CONVENTION`].
    pub m: [[T; 6]; 6],
    /// Subspace `V` on which `Q2H(0, F)` vanishes.
    pub kernel: KernelBasis<T>,
    /// Smallest eigenvalue of `M` on the orthogonal complement of `{0} x V`.
    pub coercivity_mu: T,
    /// Number of eigenvalues of `M` below `KERNEL_EIGEN_TOL * |M|`.
    pub numerical_kernel_dim: usize,
    /// Constant bounding `|u1|^2 + |v1|^2 <= C (|G|^2 + |F|^2)` for every load.
    pub apriori_constant: T,
    /// Largest relative difference between the bilinear and the polarized assembly.
    pub polarization_gap: T,
    /// Largest relative residual among the basis solves.
    pub max_residual: T,
    /// Correctors of the six scaled basis loads (empty when loaded from disk).
    pub correctors: Vec<CorrectorSolution<T>>,
}

impl<T: Scalar> EffectiveForm<T> {
    /// Wraps an existing matrix, recomputing the derived spectral quantities.
    pub fn from_matrix(m: [[T; 6]; 6], kernel: KernelBasis<T>) -> Self {
        let mut form = Self {
            m,
            kernel,
            coercivity_mu: T::zero(),
            numerical_kernel_dim: 0,
            apriori_constant: T::nan(),
            polarization_gap: T::zero(),
            max_residual: T::zero(),
            correctors: Vec::new(),
        };
        form.coercivity_mu = form.restricted_min_eigen();
        form.numerical_kernel_dim = form.count_kernel();
        form
    }

    /// Form of a flat plate: membrane block equal to `A`, everything else zero.
    pub fn flat(pf: &PlaneForm<T>) -> Self {
        let mut m = [[T::zero(); 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = pf.a_matrix[i][j];
            }
        }
        Self::from_matrix(m, compute_kernel_v(&ShapeFunction::flat(), T::lit(KERNEL_MODE_TOL)))
    }

    fn rows(&self) -> Vec<Vec<T>> {
        self.m.iter().map(|r| r.to_vec()).collect()
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        symmetric_eigen(&self.rows()).0
    }

    /// Spectral norm of `M`.
    pub fn norm(&self) -> T {
        self.eigenvalues().iter().fold(T::zero(), |m, v| Float::max(m, v.mag()))
    }

    /// `z^T M z`.
    pub fn q(&self, z: &[T; 6]) -> T {
        bilinear(&self.rows(), z, z)
    }

    pub fn q_load(&self, load: &CellLoad<T>) -> T {
        self.q(&load.scaled())
    }

    /// Unit vectors `(0, F)` spanning `{0} x V`.
    pub fn kernel_directions(&self) -> Vec<Vec<T>> {
        self.kernel
            .vectors
            .iter()
            .map(|v| {
                let f = v.scaled();
                vec![T::zero(), T::zero(), T::zero(), f[0], f[1], f[2]]
            })
            .collect()
    }

    fn restricted_min_eigen(&self) -> T {
        let comp = orthogonal_complement(&self.kernel_directions(), 6);
        let rows = self.rows();
        let k = comp.len();
        let mut r = vec![vec![T::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                r[i][j] = bilinear(&rows, &comp[i], &comp[j]);
            }
        }
        symmetric_eigen(&r).0.first().copied().unwrap_or(T::zero())
    }

    fn count_kernel(&self) -> usize {
        let vals = self.eigenvalues();
        let scale = vals.iter().fold(T::zero(), |m, v| Float::max(m, v.mag()));
        vals.iter().filter(|v| **v < T::lit(KERNEL_EIGEN_TOL) * scale).count()
    }

    /// Largest `z^T M z / |M|` over the kernel directions.
    pub fn kernel_leak(&self) -> T {
        let scale = self.norm();
        let rows = self.rows();
        self.kernel_directions()
            .iter()
            .map(|z| bilinear(&rows, z, z).mag() / scale)
            .fold(T::zero(), Float::max)
    }
}

fn unit_load<T: Scalar>(i: usize) -> CellLoad<T> {
    let mut z = [T::zero(); 6];
    z[i] = T::one();
    CellLoad::from_scaled(z)
}

/// Solves the six basis cell problems and assembles the effective matrix.
pub fn assemble_effective_matrix<T: Scalar>(
    s: &ShapeFunction<T>,
    pf: &PlaneForm<T>,
    params: &CellParams<T>,
) -> Result<EffectiveForm<T>, Error> {
    let op = CellOperator::new(s, pf, params)?;
    let loads: Vec<CellLoad<T>> = (0..6).map(unit_load).collect();
    let correctors: Vec<CorrectorSolution<T>> = loads
        .par_iter()
        .enumerate()
        .map(|(i, load)| {
            pcg(&op, &op.rhs(load), params.cg_tol, params.max_iter).map_err(|e| match e {
                Error::NonConvergence { residual, iterations, .. } => Error::NonConvergence {
                    residual,
                    iterations,
                    load: Some(BASIS_NAMES[i].to_string()),
                },
                other => other,
            })
        })
        .collect::<Result<_, _>>()?;

    // exact quadrature for the assembled values, whatever grid the solve used
    let eval = CellOperator::with_grid(
        s,
        pf,
        params.band,
        CellOperator::<T>::product_grid(params.band, s.band(), true),
    )?;
    let mut m = [[T::zero(); 6]; 6];
    for i in 0..6 {
        for j in 0..=i {
            let v = eval.bilinear_energy(&loads[i], &correctors[i].fields, &loads[j], &correctors[j].fields);
            m[i][j] = v;
            m[j][i] = v;
        }
    }

    // polarization of the quadratic values, using corrector linearity
    let diag: Vec<T> = (0..6).map(|i| eval.energy(&loads[i], &correctors[i].fields)).collect();
    let mut gap = T::zero();
    for i in 0..6 {
        for j in 0..6 {
            let p = if i == j {
                diag[i]
            } else {
                let load = loads[i].combine(T::one(), &loads[j], T::one());
                let sum = correctors[i].combine(T::one(), &correctors[j], T::one());
                (eval.energy(&load, &sum.fields) - diag[i] - diag[j]) / T::lit(2.0)
            };
            gap = Float::max(gap, (p - m[i][j]).mag());
        }
    }

    let kernel = compute_kernel_v(s, T::lit(KERNEL_MODE_TOL));
    let mut form = EffectiveForm::from_matrix(m, kernel);
    let scale = Float::max(form.norm(), T::min_positive_value());
    form.polarization_gap = gap / scale;
    form.max_residual = correctors.iter().fold(T::zero(), |a, c| Float::max(a, c.residual));

    let mut gram = vec![vec![T::zero(); 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            gram[i][j] = h_inner(&correctors[i], &correctors[j]);
        }
    }
    form.apriori_constant = symmetric_eigen(&gram).0[5];
    form.correctors = correctors;
    Ok(form)
}

/// `<grad a_u, grad b_u> + <D^2 a_v, D^2 b_v>`.
fn h_inner<T: Scalar>(a: &CorrectorSolution<T>, b: &CorrectorSolution<T>) -> T {
    let layout = a.fields.layout;
    let tp = T::two_pi();
    let n = layout.len();
    let mut s = T::zero();
    for (idx, (k1, k2)) in layout.modes().enumerate() {
        let kk = tp * tp * T::lit((k1 * k1 + k2 * k2) as f64);
        for f in 0..3 {
            let (x, y) = (a.fields.data[f * n + idx], b.fields.data[f * n + idx]);
            let w = if f < 2 { kk } else { kk * kk };
            s = s + w * (x.re * y.re + x.im * y.im);
        }
    }
    s
}

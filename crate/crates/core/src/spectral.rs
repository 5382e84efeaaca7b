//! Two-dimensional periodic grids and their discrete Fourier transforms.
//!
//! Grids are `n x n`, stored row-major with `y2` as the outer index and `y1` as
//! the inner one; node `(j1, j2)` sits at `(j1 / n, j2 / n)` on the unit torus.
//! Band-limited coefficient arrays cover wavevectors with `|k|_inf <= band`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Scalar;

/// Forward and inverse 2D FFT on an `n x n` grid (both unnormalized).
pub struct Fft2<T: Scalar> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> Fft2<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `X_k = sum_j x_j exp(-2 pi i k.j / n)`.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.run(&self.forward, data);
    }

    /// `x_j = sum_k X_k exp(+2 pi i k.j / n)`.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(&self.inverse, data);
    }

    fn run(&self, plan: &Arc<dyn Fft<T>>, data: &mut [Complex<T>]) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "grid size mismatch");
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        let mut column = vec![Complex::new(T::zero(), T::zero()); n];
        for j1 in 0..n {
            for (j2, c) in column.iter_mut().enumerate() {
                *c = data[j2 * n + j1];
            }
            plan.process_with_scratch(&mut column, &mut scratch);
            for (j2, c) in column.iter().enumerate() {
                data[j2 * n + j1] = *c;
            }
        }
    }
}

/// Index of wavenumber `k` on an `n`-point periodic grid.
pub fn wrap(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Dense layout of wavevectors `k` with `|k|_inf <= band`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeLayout {
    pub band: usize,
}

impl ModeLayout {
    pub fn new(band: usize) -> Self {
        Self { band }
    }

    pub fn side(&self) -> usize {
        2 * self.band + 1
    }

    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, k1: i64, k2: i64) -> usize {
        let b = self.band as i64;
        ((k2 + b) as usize) * self.side() + (k1 + b) as usize
    }

    pub fn contains(&self, k1: i64, k2: i64) -> bool {
        let b = self.band as i64;
        k1.abs() <= b && k2.abs() <= b
    }

    /// All wavevectors in storage order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64)> {
        let b = self.band as i64;
        (-b..=b).flat_map(move |k2| (-b..=b).map(move |k1| (k1, k2)))
    }
}

/// Evaluates band-limited coefficients (already multiplied by any derivative
/// symbol) on an `n x n` grid. Requires `n >= 2 band + 1`.
pub fn synthesize<T: Scalar>(layout: ModeLayout, coeffs: &[Complex<T>], fft: &Fft2<T>) -> Vec<Complex<T>> {
    let n = fft.size();
    debug_assert!(n > 2 * layout.band);
    let mut grid = vec![Complex::new(T::zero(), T::zero()); n * n];
    for ((k1, k2), c) in layout.modes().zip(coeffs) {
        grid[wrap(k2, n) * n + wrap(k1, n)] = *c;
    }
    fft.inverse(&mut grid);
    grid
}

/// Discrete Fourier coefficients of grid values, restricted to `layout`.
pub fn analyze<T: Scalar>(layout: ModeLayout, grid: &[Complex<T>], fft: &Fft2<T>) -> Vec<Complex<T>> {
    let n = fft.size();
    let mut work = grid.to_vec();
    fft.forward(&mut work);
    let scale = T::one() / T::from_usize_lossy(n * n);
    layout
        .modes()
        .map(|(k1, k2)| work[wrap(k2, n) * n + wrap(k1, n)] * scale)
        .collect()
}

/// Analysis of a real grid.
pub fn analyze_real<T: Scalar>(layout: ModeLayout, grid: &[T], fft: &Fft2<T>) -> Vec<Complex<T>> {
    let c: Vec<Complex<T>> = grid.iter().map(|&x| Complex::new(x, T::zero())).collect();
    analyze(layout, &c, fft)
}

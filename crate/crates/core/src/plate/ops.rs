//! One-dimensional difference stencils applied along a grid axis.

use super::PlateDomain;
use crate::scalar::Scalar;

/// Sparse rows of a one-dimensional difference matrix.
#[derive(Debug, Clone)]
pub(crate) struct Stencil<T> {
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> Stencil<T> {
    /// First derivative: centered inside, one-sided second order at the ends.
    pub(crate) fn first(m: usize, h: T) -> Self {
        let c = T::one() / (T::lit(2.0) * h);
        let mut rows = Vec::with_capacity(m);
        rows.push(vec![(0, T::lit(-3.0) * c), (1, T::lit(4.0) * c), (2, -c)]);
        for i in 1..m - 1 {
            rows.push(vec![(i - 1, -c), (i + 1, c)]);
        }
        rows.push(vec![(m - 3, c), (m - 2, T::lit(-4.0) * c), (m - 1, T::lit(3.0) * c)]);
        Self { rows }
    }

    /// Second derivative: compact inside, one-sided second order at the ends.
    pub(crate) fn second(m: usize, h: T) -> Self {
        let c = T::one() / (h * h);
        let two = T::lit(2.0);
        let end = |a: usize, b: usize, cc: usize, d: usize| {
            vec![(a, two * c), (b, T::lit(-5.0) * c), (cc, T::lit(4.0) * c), (d, -c)]
        };
        let mut rows = Vec::with_capacity(m);
        rows.push(end(0, 1, 2, 3));
        for i in 1..m - 1 {
            rows.push(vec![(i - 1, c), (i, -two * c), (i + 1, c)]);
        }
        rows.push(end(m - 1, m - 2, m - 3, m - 4));
        Self { rows }
    }
}

/// Axis-wise derivative operators of one plate grid.
#[derive(Debug, Clone)]
pub(crate) struct GridOps<T> {
    m1: usize,
    m2: usize,
    d1: [Stencil<T>; 2],
    d2: [Stencil<T>; 2],
}

impl<T: Scalar> GridOps<T> {
    pub(crate) fn new(dom: &PlateDomain<T>) -> Self {
        Self {
            m1: dom.m1,
            m2: dom.m2,
            d1: [Stencil::first(dom.m1, dom.h1()), Stencil::first(dom.m2, dom.h2())],
            d2: [Stencil::second(dom.m1, dom.h1()), Stencil::second(dom.m2, dom.h2())],
        }
    }

    fn apply(&self, st: &Stencil<T>, axis: usize, x: &[T], transpose: bool) -> Vec<T> {
        let (m1, m2) = (self.m1, self.m2);
        let mut out = vec![T::zero(); m1 * m2];
        let (lines, len) = if axis == 0 { (m2, m1) } else { (m1, m2) };
        let at = |line: usize, i: usize| if axis == 0 { line * m1 + i } else { i * m1 + line };
        for line in 0..lines {
            for i in 0..len {
                for &(j, c) in &st.rows[i] {
                    if transpose {
                        out[at(line, j)] = out[at(line, j)] + c * x[at(line, i)];
                    } else {
                        out[at(line, i)] = out[at(line, i)] + c * x[at(line, j)];
                    }
                }
            }
        }
        out
    }

    pub(crate) fn d(&self, axis: usize, x: &[T]) -> Vec<T> {
        self.apply(&self.d1[axis], axis, x, false)
    }

    pub(crate) fn d_t(&self, axis: usize, x: &[T]) -> Vec<T> {
        self.apply(&self.d1[axis], axis, x, true)
    }

    pub(crate) fn dd(&self, axis: usize, x: &[T]) -> Vec<T> {
        self.apply(&self.d2[axis], axis, x, false)
    }

    pub(crate) fn dd_t(&self, axis: usize, x: &[T]) -> Vec<T> {
        self.apply(&self.d2[axis], axis, x, true)
    }

    /// Mixed derivative `D_2 D_1`.
    pub(crate) fn d12(&self, x: &[T]) -> Vec<T> {
        self.d(1, &self.d(0, x))
    }

    pub(crate) fn d12_t(&self, x: &[T]) -> Vec<T> {
        self.d_t(0, &self.d_t(1, x))
    }
}

//! Classical Foppl-von Karman energy written pointwise from the plane form
//! alone. Used as a reference for the flat-shape reduction; it shares no
//! stencil or quadrature code with the homogenized path.

use super::energy::Gauge;
use super::{EnergyBreakdown, LoadSpec, PlateDomain, PlateState};
use crate::descent::{minimize, DescentParams, DescentStatus, Method, Objective};
use crate::elastic::{PlaneForm, SymMat2};
use crate::error::Error;
use crate::scalar::Scalar;

/// Nodes and coefficients of a first-derivative stencil at index `j` of `m`.
fn first_at<T: Scalar>(j: usize, m: usize, h: T) -> [(usize, T); 3] {
    let c = T::lit(0.5) / h;
    if j == 0 {
        [(0, T::lit(-3.0) * c), (1, T::lit(4.0) * c), (2, -c)]
    } else if j == m - 1 {
        [(m - 1, T::lit(3.0) * c), (m - 2, T::lit(-4.0) * c), (m - 3, c)]
    } else {
        [(j - 1, -c), (j + 1, c), (j, T::zero())]
    }
}

fn second_at<T: Scalar>(j: usize, m: usize, h: T) -> [(usize, T); 4] {
    let c = T::one() / (h * h);
    if j == 0 {
        [(0, T::lit(2.0) * c), (1, T::lit(-5.0) * c), (2, T::lit(4.0) * c), (3, -c)]
    } else if j == m - 1 {
        [(m - 1, T::lit(2.0) * c), (m - 2, T::lit(-5.0) * c), (m - 3, T::lit(4.0) * c), (m - 4, -c)]
    } else {
        [(j - 1, c), (j, T::lit(-2.0) * c), (j + 1, c), (j, T::zero())]
    }
}

/// Linear functional on a grid field: list of `(flat index, coefficient)`.
type Functional<T> = Vec<(usize, T)>;

struct Point<T> {
    weight: T,
    dx: Functional<T>,
    dy: Functional<T>,
    dxx: Functional<T>,
    dyy: Functional<T>,
    dxy: Functional<T>,
}

fn points<T: Scalar>(dom: &PlateDomain<T>) -> Vec<Point<T>> {
    let (m1, m2) = (dom.m1, dom.m2);
    let (h1, h2) = (dom.lx / T::from_usize_lossy(m1 - 1), dom.ly / T::from_usize_lossy(m2 - 1));
    let mut out = Vec::with_capacity(m1 * m2);
    for j2 in 0..m2 {
        for j1 in 0..m1 {
            let edge = |j: usize, m: usize| if j == 0 || j == m - 1 { T::lit(0.5) } else { T::one() };
            let weight = edge(j1, m1) * edge(j2, m2) * h1 * h2;
            let dx = first_at(j1, m1, h1).iter().map(|&(i, c)| (j2 * m1 + i, c)).collect();
            let dy = first_at(j2, m2, h2).iter().map(|&(i, c)| (i * m1 + j1, c)).collect();
            let dxx = second_at(j1, m1, h1).iter().map(|&(i, c)| (j2 * m1 + i, c)).collect();
            let dyy = second_at(j2, m2, h2).iter().map(|&(i, c)| (i * m1 + j1, c)).collect();
            let mut dxy = Vec::with_capacity(9);
            for (i2, cy) in first_at(j2, m2, h2) {
                for (i1, cx) in first_at(j1, m1, h1) {
                    dxy.push((i2 * m1 + i1, cx * cy));
                }
            }
            out.push(Point { weight, dx, dy, dxx, dyy, dxy });
        }
    }
    out
}

fn eval_at<T: Scalar>(f: &Functional<T>, x: &[T]) -> T {
    f.iter().map(|&(i, c)| c * x[i]).sum()
}

fn stress<T: Scalar>(pf: &PlaneForm<T>, e: &SymMat2<T>) -> SymMat2<T> {
    SymMat2::from_scaled(pf.apply_scaled(&e.scaled()))
}

struct Classical<'a, T: Scalar> {
    pts: Vec<Point<T>>,
    pf: PlaneForm<T>,
    f3: &'a [T],
    s: T,
    gauge: Gauge<T>,
}

impl<T: Scalar> Classical<'_, T> {
    fn run(&self, x: &[T], mut grad: Option<&mut [T]>) -> EnergyBreakdown<T> {
        let n = self.pts.len();
        let (u1, u2, v) = (&x[..n], &x[n..2 * n], &x[2 * n..]);
        let half = T::lit(0.5);
        let (mut mem, mut bend, mut work) = (T::zero(), T::zero(), T::zero());
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|gi| *gi = T::zero());
        }
        for (p, pt) in self.pts.iter().enumerate() {
            let (v1, v2) = (eval_at(&pt.dx, v), eval_at(&pt.dy, v));
            let strain = SymMat2::new(
                eval_at(&pt.dx, u1) + half * v1 * v1,
                eval_at(&pt.dy, u2) + half * v2 * v2,
                half * (eval_at(&pt.dy, u1) + eval_at(&pt.dx, u2)) + half * v1 * v2,
            );
            let hess = SymMat2::new(eval_at(&pt.dxx, v), eval_at(&pt.dyy, v), eval_at(&pt.dxy, v));
            mem = mem + pt.weight * self.pf.q2(&strain);
            bend = bend + pt.weight * self.pf.q2(&hess);
            work = work + pt.weight * self.s * self.f3[p] * v[p];
            if let Some(g) = grad.as_deref_mut() {
                let w = pt.weight;
                let sg = stress(&self.pf, &strain) * w;
                let bm = stress(&self.pf, &hess) * (w / T::lit(12.0));
                let mut scatter = |f: &Functional<T>, offset: usize, a: T| {
                    for &(i, c) in f {
                        g[offset + i] = g[offset + i] + a * c;
                    }
                };
                scatter(&pt.dx, 0, sg.a11);
                scatter(&pt.dy, 0, sg.a12);
                scatter(&pt.dx, n, sg.a12);
                scatter(&pt.dy, n, sg.a22);
                scatter(&pt.dx, 2 * n, sg.a11 * v1 + sg.a12 * v2);
                scatter(&pt.dy, 2 * n, sg.a22 * v2 + sg.a12 * v1);
                scatter(&pt.dxx, 2 * n, bm.a11);
                scatter(&pt.dyy, 2 * n, bm.a22);
                scatter(&pt.dxy, 2 * n, T::lit(2.0) * bm.a12);
                g[2 * n + p] = g[2 * n + p] - w * self.s * self.f3[p];
            }
        }
        EnergyBreakdown::new(half * mem, bend / T::lit(24.0), work)
    }
}

impl<T: Scalar> Objective<T> for Classical<'_, T> {
    fn dim(&self) -> usize {
        3 * self.pts.len()
    }

    fn eval(&self, x: &[T], grad: &mut [T]) -> T {
        self.run(x, Some(grad)).total
    }

    fn project(&self, v: &mut [T]) {
        self.gauge.project(v);
    }
}

fn build<'a, T: Scalar>(dom: &PlateDomain<T>, pf: &PlaneForm<T>, load: &'a LoadSpec<T>, s: T) -> Classical<'a, T> {
    Classical {
        pts: points(dom),
        pf: *pf,
        f3: &load.f3,
        s,
        gauge: Gauge::new(dom),
    }
}

/// `1/2 int Q2(sym grad u + 1/2 grad v (x) grad v) + 1/24 int Q2(D^2 v) - s int f3 v`.
pub fn classical_fvk_energy<T: Scalar>(
    state: &PlateState<T>,
    pf: &PlaneForm<T>,
    dom: &PlateDomain<T>,
    load: &LoadSpec<T>,
    s: T,
) -> EnergyBreakdown<T> {
    build(dom, pf, load, s).run(&state.to_vector(), None)
}

/// Unprojected gradient of [`classical_fvk_energy`].
pub fn classical_fvk_gradient<T: Scalar>(
    state: &PlateState<T>,
    pf: &PlaneForm<T>,
    dom: &PlateDomain<T>,
    load: &LoadSpec<T>,
    s: T,
) -> PlateState<T> {
    let c = build(dom, pf, load, s);
    let mut g = vec![T::zero(); c.dim()];
    c.run(&state.to_vector(), Some(&mut g));
    PlateState::from_vector(&g)
}

/// Gauge-fixed minimization of the classical energy from the zero state.
pub fn minimize_classical_fvk<T: Scalar>(
    dom: &PlateDomain<T>,
    pf: &PlaneForm<T>,
    load: &LoadSpec<T>,
    s: T,
    tol: T,
    max_iter: usize,
) -> Result<(PlateState<T>, EnergyBreakdown<T>), Error> {
    let c = build(dom, pf, load, s);
    let mut p = DescentParams::new(Method::Lbfgs { memory: 10 }, tol, max_iter);
    p.relative_to_value = true;
    let r = minimize(&c, &vec![T::zero(); c.dim()], &p);
    if r.status != DescentStatus::Converged {
        return Err(Error::IterationCap {
            iterations: r.iterations,
            gradient_norm: r.gradient_norm.to_f64_lossy(),
        });
    }
    let e = c.run(&r.x, None);
    Ok((PlateState::from_vector(&r.x), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::EffectiveForm;
    use crate::elastic::{plane_form, ElasticModel};
    use crate::plate::{plate_energy, SignChoice};

    #[test]
    fn agrees_with_homogenized_path_for_flat_form() {
        let pf = plane_form(&ElasticModel::isotropic(0.8, 1.3).unwrap()).unwrap();
        let dom: PlateDomain<f64> = PlateDomain::new(1.0, 0.7, 8, 6).unwrap();
        let load = LoadSpec::zero(&dom, SignChoice::Plus);
        let state = PlateState {
            u1: dom.sample(|x: f64, y| (x * 3.0).sin() * y),
            u2: dom.sample(|x, y| x * x - y),
            v: dom.sample(|x: f64, y: f64| (x * y * 4.0).cos()),
        };
        let a = classical_fvk_energy(&state, &pf, &dom, &load, 1.0);
        let b = plate_energy(&state, &EffectiveForm::flat(&pf), &pf, &dom, &load, 1.0);
        assert!((a.total - b.total).abs() <= 1e-12 * a.total.abs());
        assert!((a.bending - b.bending).abs() <= 1e-12 * a.bending);
    }
}

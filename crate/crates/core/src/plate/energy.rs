use super::ops::GridOps;
use super::{EnergyBreakdown, LoadSpec, PlateDomain, PlateState};
use crate::cell::EffectiveForm;
use crate::descent::Objective;
use crate::elastic::PlaneForm;
use crate::scalar::{dot, sqrt2, Scalar};

/// Orthonormal basis of the gauge constraints on packed `(u1, u2, v)` vectors:
/// `int u = 0`, `int (d2 u1 - d1 u2) = 0`, `int v = 0`, `int grad v = 0`.
#[derive(Debug, Clone)]
pub struct Gauge<T> {
    normals: Vec<Vec<T>>,
}

impl<T: Scalar> Gauge<T> {
    pub fn new(dom: &PlateDomain<T>) -> Self {
        let ops = GridOps::new(dom);
        Self::with_ops(dom, &ops)
    }

    pub(crate) fn with_ops(dom: &PlateDomain<T>, ops: &GridOps<T>) -> Self {
        let n = dom.len();
        let w = dom.weights();
        let zero = vec![T::zero(); n];
        let pack = |a: &[T], b: &[T], c: &[T]| [a, b, c].concat();
        let neg = |x: Vec<T>| x.into_iter().map(|v| -v).collect::<Vec<T>>();
        let raw = vec![
            pack(&w, &zero, &zero),
            pack(&zero, &w, &zero),
            pack(&ops.d_t(1, &w), &neg(ops.d_t(0, &w)), &zero),
            pack(&zero, &zero, &w),
            pack(&zero, &zero, &ops.d_t(0, &w)),
            pack(&zero, &zero, &ops.d_t(1, &w)),
        ];
        // Gram-Schmidt, applied twice for orthogonality to round-off
        let mut normals: Vec<Vec<T>> = Vec::with_capacity(6);
        for mut c in raw {
            for _ in 0..2 {
                for q in &normals {
                    let a = dot(q, &c);
                    for (ci, qi) in c.iter_mut().zip(q) {
                        *ci = *ci - a * *qi;
                    }
                }
            }
            let nrm = dot(&c, &c).sqrt();
            for ci in c.iter_mut() {
                *ci = *ci / nrm;
            }
            normals.push(c);
        }
        Self { normals }
    }

    /// Removes the components along the constraint normals.
    pub fn project(&self, x: &mut [T]) {
        for q in &self.normals {
            let a = dot(q, x);
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi = *xi - a * *qi;
            }
        }
    }

    /// Largest constraint violation `|q . x|` over the normalized constraints.
    pub fn violation(&self, x: &[T]) -> T {
        self.normals
            .iter()
            .map(|q| dot(q, x).mag())
            .fold(T::zero(), num_traits::Float::max)
    }
}

/// Discrete plate energy for a fixed effective form, load and sign.
pub(crate) struct PlateObjective<'a, T: Scalar> {
    pub(crate) dom: PlateDomain<T>,
    ops: GridOps<T>,
    weights: Vec<T>,
    m: [[T; 6]; 6],
    a: [[T; 3]; 3],
    /// `s f3`, formed once so that the sign enters only through this product.
    sf3: Vec<T>,
    pub(crate) gauge: &'a Gauge<T>,
}

struct Fields<T> {
    du: [Vec<T>; 4],
    dv: [Vec<T>; 2],
    hess: [Vec<T>; 3],
}

fn mat_vec<T: Scalar, const N: usize>(m: &[[T; N]; N], z: &[T; N]) -> [T; N] {
    let mut out = [T::zero(); N];
    for i in 0..N {
        let mut s = T::zero();
        for j in 0..N {
            s = s + m[i][j] * z[j];
        }
        out[i] = s;
    }
    out
}

impl<'a, T: Scalar> PlateObjective<'a, T> {
    pub(crate) fn new(
        dom: &PlateDomain<T>,
        eff: &EffectiveForm<T>,
        pf: &PlaneForm<T>,
        load: &LoadSpec<T>,
        s: T,
        gauge: &'a Gauge<T>,
    ) -> Self {
        Self {
            dom: *dom,
            ops: GridOps::new(dom),
            weights: dom.weights(),
            m: eff.m,
            a: pf.a_matrix,
            sf3: load.f3.iter().map(|f| s * *f).collect(),
            gauge,
        }
    }

    fn fields(&self, x: &[T]) -> Fields<T> {
        let n = self.dom.len();
        let (u1, u2, v) = (&x[..n], &x[n..2 * n], &x[2 * n..]);
        let o = &self.ops;
        Fields {
            du: [o.d(0, u1), o.d(1, u1), o.d(0, u2), o.d(1, u2)],
            dv: [o.d(0, v), o.d(1, v)],
            hess: [o.dd(0, v), o.dd(1, v), o.d12(v)],
        }
    }

    /// Per-point `(z, h)` in scaled coordinates.
    fn strains(f: &Fields<T>, p: usize) -> ([T; 6], [T; 3]) {
        let r2 = sqrt2::<T>();
        let half = T::lit(0.5);
        let (v1, v2) = (f.dv[0][p], f.dv[1][p]);
        let h = [f.hess[0][p], f.hess[1][p], r2 * f.hess[2][p]];
        let z = [
            f.du[0][p] + half * v1 * v1,
            f.du[3][p] + half * v2 * v2,
            r2 * (half * (f.du[1][p] + f.du[2][p]) + half * v1 * v2),
            -h[0],
            -h[1],
            -h[2],
        ];
        (z, h)
    }

    pub(crate) fn breakdown(&self, x: &[T]) -> EnergyBreakdown<T> {
        let f = self.fields(x);
        let v = &x[2 * self.dom.len()..];
        let half = T::lit(0.5);
        let c24 = T::one() / T::lit(24.0);
        let (mut mem, mut bend, mut work) = (T::zero(), T::zero(), T::zero());
        for p in 0..self.dom.len() {
            let (z, h) = Self::strains(&f, p);
            let w = self.weights[p];
            mem = mem + w * dot(&z, &mat_vec(&self.m, &z));
            bend = bend + w * dot(&h, &mat_vec(&self.a, &h));
            work = work + w * self.sf3[p] * v[p];
        }
        EnergyBreakdown::new(half * mem, c24 * bend, work)
    }

    /// Unprojected gradient; returns the total energy.
    pub(crate) fn raw_gradient(&self, x: &[T], grad: &mut [T]) -> T {
        let n = self.dom.len();
        let f = self.fields(x);
        let v = &x[2 * n..];
        let r2 = sqrt2::<T>();
        let half = T::lit(0.5);
        let c12 = T::one() / T::lit(12.0);
        let c24 = T::one() / T::lit(24.0);
        let mut sigma = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
        let mut kappa = sigma.clone();
        let (mut mem, mut bend, mut work) = (T::zero(), T::zero(), T::zero());
        for p in 0..n {
            let (z, h) = Self::strains(&f, p);
            let w = self.weights[p];
            let mz = mat_vec(&self.m, &z);
            let ah = mat_vec(&self.a, &h);
            mem = mem + w * dot(&z, &mz);
            bend = bend + w * dot(&h, &ah);
            work = work + w * self.sf3[p] * v[p];
            for c in 0..3 {
                sigma[c][p] = w * mz[c];
                kappa[c][p] = w * (c12 * ah[c] - mz[c + 3]);
            }
        }
        let o = &self.ops;
        let s3: Vec<T> = sigma[2].iter().map(|s| *s / r2).collect();
        let (g1, rest) = grad.split_at_mut(n);
        let (g2, gv) = rest.split_at_mut(n);
        for (g, (a, b)) in g1.iter_mut().zip(o.d_t(0, &sigma[0]).into_iter().zip(o.d_t(1, &s3))) {
            *g = a + b;
        }
        for (g, (a, b)) in g2.iter_mut().zip(o.d_t(1, &sigma[1]).into_iter().zip(o.d_t(0, &s3))) {
            *g = a + b;
        }
        let mut p1 = vec![T::zero(); n];
        let mut p2 = vec![T::zero(); n];
        for p in 0..n {
            let (v1, v2) = (f.dv[0][p], f.dv[1][p]);
            p1[p] = sigma[0][p] * v1 + s3[p] * v2;
            p2[p] = sigma[1][p] * v2 + s3[p] * v1;
        }
        let k3: Vec<T> = kappa[2].iter().map(|k| *k * r2).collect();
        let terms = [o.d_t(0, &p1), o.d_t(1, &p2), o.dd_t(0, &kappa[0]), o.dd_t(1, &kappa[1]), o.d12_t(&k3)];
        for p in 0..n {
            gv[p] = terms.iter().map(|t| t[p]).sum::<T>() - self.weights[p] * self.sf3[p];
        }
        half * mem + c24 * bend - work
    }
}

impl<T: Scalar> Objective<T> for PlateObjective<'_, T> {
    fn dim(&self) -> usize {
        3 * self.dom.len()
    }

    fn eval(&self, x: &[T], grad: &mut [T]) -> T {
        self.raw_gradient(x, grad)
    }

    fn project(&self, v: &mut [T]) {
        self.gauge.project(v);
    }
}

/// Energy terms of `state` for sign `s`.
pub fn plate_energy<T: Scalar>(
    state: &PlateState<T>,
    eff: &EffectiveForm<T>,
    pf: &PlaneForm<T>,
    dom: &PlateDomain<T>,
    load: &LoadSpec<T>,
    s: T,
) -> EnergyBreakdown<T> {
    let gauge = Gauge { normals: Vec::new() };
    PlateObjective::new(dom, eff, pf, load, s, &gauge).breakdown(&state.to_vector())
}

/// Gradient of the discrete energy with respect to every grid value,
/// projected onto the gauge-fixed subspace.
pub fn plate_gradient<T: Scalar>(
    state: &PlateState<T>,
    eff: &EffectiveForm<T>,
    pf: &PlaneForm<T>,
    dom: &PlateDomain<T>,
    load: &LoadSpec<T>,
    s: T,
) -> PlateState<T> {
    let gauge = Gauge::new(dom);
    let obj = PlateObjective::new(dom, eff, pf, load, s, &gauge);
    let mut g = vec![T::zero(); obj.dim()];
    obj.raw_gradient(&state.to_vector(), &mut g);
    gauge.project(&mut g);
    PlateState::from_vector(&g)
}

/// Directional derivative of the energy along `dir` after gauge projection,
/// analytic and by central differences with step `step`.
#[allow(clippy::too_many_arguments)]
pub fn directional_check<T: Scalar>(
    state: &PlateState<T>,
    dir: &PlateState<T>,
    eff: &EffectiveForm<T>,
    pf: &PlaneForm<T>,
    dom: &PlateDomain<T>,
    load: &LoadSpec<T>,
    s: T,
    step: T,
) -> (T, T) {
    let gauge = Gauge::new(dom);
    let mut d = dir.to_vector();
    gauge.project(&mut d);
    let x = state.to_vector();
    let g = plate_gradient(state, eff, pf, dom, load, s).to_vector();
    let analytic = g.iter().zip(&d).map(|(a, b)| *a * *b).sum();
    let shifted = |t: T| {
        let y: Vec<T> = x.iter().zip(&d).map(|(a, b)| *a + t * *b).collect();
        plate_energy(&PlateState::from_vector(&y), eff, pf, dom, load, s).total
    };
    let fd = (shifted(step) - shifted(-step)) / (T::lit(2.0) * step);
    (analytic, fd)
}

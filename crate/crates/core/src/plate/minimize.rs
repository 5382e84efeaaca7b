use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::energy::{Gauge, PlateObjective};
use super::{EnergyBreakdown, LoadSpec, PlateDomain, PlateState};
use crate::cell::EffectiveForm;
use crate::descent::{minimize, DescentParams, DescentStatus, Method};
use crate::elastic::PlaneForm;
use crate::error::Error;
use crate::scalar::{max_abs, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizerParams<T> {
    /// Stop once the projected gradient norm is at most `tol (1 + |total|)`.
    pub tol: T,
    pub max_iter: usize,
    /// Number of initial states; the first is always the zero state.
    pub n_starts: usize,
    pub seed: u64,
    /// Size of the random starts relative to the shorter plate side.
    pub perturbation: T,
    /// Curvature pairs of the quasi-Newton direction; 0 selects steepest descent.
    pub memory: usize,
}

impl<T: Scalar> Default for MinimizerParams<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iter: 100_000,
            n_starts: 3,
            seed: 0,
            perturbation: T::lit(0.05),
            memory: 10,
        }
    }
}

impl<T: Scalar> MinimizerParams<T> {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidParams("minimizer tol must be positive".into()));
        }
        if self.max_iter == 0 || self.n_starts == 0 {
            return Err(Error::InvalidParams("max_iter and n_starts must be at least 1".into()));
        }
        if !(self.perturbation >= T::zero() && self.perturbation.is_finite()) {
            return Err(Error::InvalidParams("perturbation must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Outcome of one descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct StartSummary<T> {
    pub start: usize,
    pub sign: i8,
    pub total: T,
    pub gradient_norm: T,
    pub iterations: usize,
    pub converged: bool,
    /// Largest absolute grid value of the final state.
    pub field_max: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateSolution<T> {
    pub state: PlateState<T>,
    pub energy: EnergyBreakdown<T>,
    /// Chosen sign `s` of the load potential.
    pub sign: i8,
    pub iterations: usize,
    pub gradient_norm: T,
    pub starts: Vec<StartSummary<T>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MinimizeError<T: std::fmt::Debug> {
    #[error(transparent)]
    Invalid(#[from] Error),
    /// The best run stopped before reaching the tolerance.
    #[error("descent stopped before the gradient tolerance was reached")]
    NoDecrease { best: Box<PlateSolution<T>> },
}

/// Smooth random state: low cosine modes, scaled to the plate size.
fn random_start<T: Scalar>(dom: &PlateDomain<T>, rng: &mut ChaCha8Rng, amplitude: T) -> Vec<T> {
    let pi = T::two_pi() / T::lit(2.0);
    let scale = amplitude * Float::min(dom.lx, dom.ly);
    let mut fields = Vec::with_capacity(3 * dom.len());
    for field_scale in [T::lit(0.1), T::lit(0.1), T::one()] {
        let mut coeffs = Vec::new();
        for p in 0..4usize {
            for q in 0..4usize {
                let a: f64 = rng.gen_range(-1.0..1.0);
                coeffs.push((p, q, T::lit(a) / T::from_usize_lossy(1 + p * p + q * q)));
            }
        }
        fields.extend(dom.sample(|x1, x2| {
            coeffs
                .iter()
                .map(|&(p, q, a)| {
                    a * Float::cos(T::from_usize_lossy(p) * pi * x1 / dom.lx)
                        * Float::cos(T::from_usize_lossy(q) * pi * x2 / dom.ly)
                })
                .sum::<T>()
                * scale
                * field_scale
        }));
    }
    fields
}

/// Sign preferred when both signs give the same energy: the sign of the first
/// significant load value, so that negating the load flips the choice.
fn tie_break<T: Scalar>(f3: &[T]) -> i8 {
    let big = f3.iter().fold(T::zero(), |m, v| Float::max(m, v.mag()));
    f3.iter()
        .find(|v| v.mag() > T::lit(1e-12) * big)
        .map(|v| if *v < T::zero() { -1 } else { 1 })
        .unwrap_or(1)
}

struct Run<T> {
    summary: StartSummary<T>,
    x: Vec<T>,
}

/// Minimizes the plate energy from several starts (and both signs when the
/// load asks for it) and returns the lowest result.
pub fn minimize_plate<T: Scalar>(
    dom: &PlateDomain<T>,
    eff: &EffectiveForm<T>,
    pf: &PlaneForm<T>,
    load: &LoadSpec<T>,
    params: &MinimizerParams<T>,
) -> Result<PlateSolution<T>, MinimizeError<T>> {
    dom.validate()?;
    params.validate()?;
    if load.f3.len() != dom.len() {
        return Err(Error::InvalidLoad("load grid does not match the plate grid".into()).into());
    }
    let gauge = Gauge::new(dom);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut starts = vec![vec![T::zero(); 3 * dom.len()]];
    for _ in 1..params.n_starts {
        starts.push(random_start(dom, &mut rng, params.perturbation));
    }
    let method = if params.memory == 0 {
        Method::SteepestDescent
    } else {
        Method::Lbfgs { memory: params.memory }
    };
    let mut dp = DescentParams::new(method, params.tol, params.max_iter);
    dp.relative_to_value = true;

    let jobs: Vec<(usize, i8)> = load
        .sign
        .candidates()
        .iter()
        .flat_map(|&s| (0..starts.len()).map(move |i| (i, s)))
        .collect();
    let runs: Vec<Run<T>> = jobs
        .par_iter()
        .map(|&(i, s)| {
            let obj = PlateObjective::new(dom, eff, pf, load, T::lit(s as f64), &gauge);
            let r = minimize(&obj, &starts[i], &dp);
            Run {
                summary: StartSummary {
                    start: i,
                    sign: s,
                    total: r.value,
                    gradient_norm: r.gradient_norm,
                    iterations: r.iterations,
                    converged: r.status == DescentStatus::Converged,
                    field_max: max_abs(&r.x),
                },
                x: r.x,
            }
        })
        .collect();

    // best run per sign, first start winning exact ties
    let best_for = |s: i8| {
        runs.iter()
            .filter(|r| r.summary.sign == s)
            .fold(None::<&Run<T>>, |b, r| match b {
                Some(b) if !(r.summary.total < b.summary.total) => Some(b),
                _ => Some(r),
            })
    };
    let chosen = match (best_for(1), best_for(-1)) {
        (Some(p), Some(m)) => {
            let (ep, em) = (p.summary.total, m.summary.total);
            let scale = Float::max(Float::max(ep.mag(), em.mag()), T::min_positive_value());
            if (ep - em).mag() <= T::lit(1e-10) * scale {
                if tie_break(&load.f3) == 1 {
                    p
                } else {
                    m
                }
            } else if ep < em {
                p
            } else {
                m
            }
        }
        (Some(r), None) | (None, Some(r)) => r,
        (None, None) => unreachable!("at least one sign is always run"),
    };

    let s = chosen.summary.sign;
    let obj = PlateObjective::new(dom, eff, pf, load, T::lit(s as f64), &gauge);
    let solution = PlateSolution {
        state: PlateState::from_vector(&chosen.x),
        energy: obj.breakdown(&chosen.x),
        sign: s,
        iterations: chosen.summary.iterations,
        gradient_norm: chosen.summary.gradient_norm,
        starts: runs.iter().map(|r| r.summary.clone()).collect(),
    };
    if chosen.summary.converged {
        Ok(solution)
    } else {
        Err(MinimizeError::NoDecrease { best: Box::new(solution) })
    }
}

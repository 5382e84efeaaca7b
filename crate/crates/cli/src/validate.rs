//! Oracle and invariant checks at config-selected sizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wrinkleplate::cell::{cell_oracle, solve_cell, CellLoad, EffectiveForm, OracleParams};
use wrinkleplate::elastic::{q2_from_q3, ElasticModel, SymMat2};
use wrinkleplate::plate::{directional_check, LoadSpec, PlateDomain, PlateState, SignChoice};
use wrinkleplate::shape::kernel_residual;

use crate::{Failure, Job, Outputs, EXIT_OK, EXIT_VALIDATION};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `"<="` or `">"`: how `value` must compare with `tolerance`.
    pub relation: &'static str,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            relation: "<=",
            pass: value <= tolerance,
        }
    }

    fn above(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            relation: ">",
            pass: value > tolerance,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn random_sym(rng: &mut ChaCha8Rng) -> SymMat2<f64> {
    SymMat2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_load(rng: &mut ChaCha8Rng) -> CellLoad<f64> {
    CellLoad::new(random_sym(rng), random_sym(rng))
}

/// Smooth state built from a few random cosine modes per field.
fn random_state(dom: &PlateDomain<f64>, rng: &mut ChaCha8Rng, amplitude: f64) -> PlateState<f64> {
    let pi = std::f64::consts::PI;
    let mut field = || {
        let modes: Vec<(f64, f64, f64)> = (0..6)
            .map(|_| {
                (
                    rng.gen_range(0..3) as f64,
                    rng.gen_range(0..3) as f64,
                    rng.gen_range(-amplitude..amplitude),
                )
            })
            .collect();
        dom.sample(|x1, x2| {
            modes
                .iter()
                .map(|&(p, q, a)| a * (p * pi * x1 / dom.lx + 0.3).cos() * (q * pi * x2 / dom.ly + 0.7).cos())
                .sum()
        })
    };
    PlateState { u1: field(), u2: field(), v: field() }
}

pub fn cmd_validate(job: &Job) -> Result<i32, Failure> {
    let cfg = &job.config.validate;
    let r = &job.resolved;
    let pf = &job.plane;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();

    if let ElasticModel::Isotropic(iso) = &r.model {
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let g = random_sym(&mut rng);
            let relaxed = q2_from_q3(&r.model, &g)?;
            worst = worst.max(rel(relaxed, iso.q2_closed_form(&g)));
        }
        checks.push(Check::at_most("plane_form_closed_form", worst, 1e-12));
    }
    let min_eig = pf.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
    checks.push(Check::above("plane_form_min_eigenvalue", min_eig, 0.0));

    let form = job.assemble()?;
    checks.extend(form_checks(job, &form)?);

    if cfg.oracle_loads > 0 {
        let params = OracleParams::default();
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.oracle_loads {
            let load = random_load(&mut rng);
            let oracle = cell_oracle(&load, &r.shape, pf, cfg.oracle_n, &params);
            worst = match oracle {
                Ok(o) => worst.max(rel(form.q_load(&load), o.energy)),
                Err(wrinkleplate::Error::IterationCap { .. }) => f64::INFINITY,
                Err(e) => return Err(Failure::Config(e.to_string())),
            };
        }
        checks.push(Check::at_most("oracle_agreement", worst, 1e-3));
    }

    if cfg.linearity_trials > 0 {
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.linearity_trials {
            let (l1, l2) = (random_load(&mut rng), random_load(&mut rng));
            let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let s1 = solve_cell(&l1, &r.shape, pf, &r.cell)?;
            let s2 = solve_cell(&l2, &r.shape, pf, &r.cell)?;
            let s12 = solve_cell(&l1.combine(a, &l2, b), &r.shape, pf, &r.cell)?;
            let lin = s1.combine(a, &s2, b);
            let scale = lin.fields.data.iter().fold(0.0f64, |m, c| m.max(c.norm()));
            let diff = lin
                .fields
                .data
                .iter()
                .zip(&s12.fields.data)
                .fold(0.0f64, |m, (p, q)| m.max((p - q).norm()));
            worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
        }
        checks.push(Check::at_most("corrector_linearity", worst, 10.0 * r.cell.cg_tol));
    }

    if cfg.gradient_states > 0 {
        let (dom, load) = match &r.plate {
            Some(p) => (p.domain, p.load.clone()),
            None => {
                let dom = PlateDomain::new(1.0, 1.0, 17, 17)?;
                (dom, LoadSpec::zero(&dom, SignChoice::Plus))
            }
        };
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.gradient_states {
            let state = random_state(&dom, &mut rng, 0.1);
            let dir = random_state(&dom, &mut rng, 1.0);
            let (analytic, fd) = directional_check(&state, &dir, &form, pf, &dom, &load, 1.0, 1e-5);
            worst = worst.max(rel(analytic, fd));
        }
        checks.push(Check::at_most("plate_gradient_fd", worst, 1e-5));
    }

    for c in &checks {
        eprintln!(
            "{} {}: {:.3e} {} {:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.relation,
            c.tolerance
        );
    }
    let passed = checks.iter().all(|c| c.pass);
    let mut out = Outputs::default();
    out.add_json("validate_report.json", &Report { passed, checks })?;
    out.commit(&job.out)?;
    Ok(if passed { EXIT_OK } else { EXIT_VALIDATION })
}

fn form_checks(job: &Job, form: &EffectiveForm<f64>) -> Result<Vec<Check>, Failure> {
    let r = &job.resolved;
    let mut checks = Vec::new();
    let n = (4 * r.shape.band() + 1).max(8);
    let mut worst: f64 = 0.0;
    for v in &form.kernel.vectors {
        worst = worst.max(kernel_residual(&r.shape, v, n)?);
    }
    checks.push(Check::at_most("kernel_residual", worst, 1e-10));
    checks.push(Check::at_most(
        "numerical_kernel_dim_mismatch",
        form.numerical_kernel_dim.abs_diff(form.kernel.dim()) as f64,
        0.0,
    ));
    checks.push(Check::at_most("kernel_leak", form.kernel_leak(), 1e-8));
    checks.push(Check::above("coercivity_mu", form.coercivity_mu, 0.0));
    checks.push(Check::at_most("polarization_gap", form.polarization_gap, 1e-10));
    checks.push(Check::at_most("cell_residual", form.max_residual, r.cell.cg_tol));
    if r.shape.is_flat() {
        let a = &job.plane.a_matrix;
        let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut dev: f64 = 0.0;
        for (i, row) in form.m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i < 3 && j < 3 { a[i][j] } else { 0.0 };
                dev = dev.max((v - want).abs());
            }
        }
        checks.push(Check::at_most("flat_reduction", dev / scale, 1e-12));
    }
    Ok(checks)
}

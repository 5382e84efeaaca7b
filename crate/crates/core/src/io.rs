//! JSON and CSV encodings of effective forms, correctors and plate results.
//!
//! Every float is written with 17 significant digits, so values round-trip
//! exactly through text.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::cell::{CorrectorSolution, EffectiveForm, CONVENTION};
use crate::elastic::SymMat2;
use crate::error::Error;
use crate::plate::{EnergyBreakdown, PlateDomain, PlateSolution, PlateState};
use crate::scalar::Scalar;
use crate::shape::KernelBasis;

/// `serde_json` formatter printing floats as `{:.16e}`.
#[derive(Debug, Clone, Default)]
pub struct FullPrecision {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", format_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{}", format_f64(value as f64))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// 17 significant digits in scientific notation.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON with full-precision floats and a trailing newline.
pub fn to_json_string<S: Serialize>(value: &S) -> Result<String, serde_json::Error> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// On-disk form of [`EffectiveForm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveFormFile {
    pub convention: String,
    /// Row-major 6x6 matrix.
    pub m: Vec<Vec<f64>>,
    /// Kernel basis as `[a11, a22, a12]` triples, orthonormal in the Frobenius product.
    pub kernel_basis: Vec<[f64; 3]>,
    pub kernel_dim: usize,
    pub coercivity_mu: f64,
    #[serde(default)]
    pub diagnostics: Option<FormDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormDiagnostics {
    pub numerical_kernel_dim: usize,
    pub eigenvalues: Vec<f64>,
    pub apriori_constant: Option<f64>,
    pub polarization_gap: f64,
    pub max_residual: f64,
    pub kernel_leak: f64,
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl EffectiveFormFile {
    pub fn from_form<T: Scalar>(form: &EffectiveForm<T>) -> Self {
        let f = |v: T| v.to_f64_lossy();
        Self {
            convention: CONVENTION.to_string(),
            m: form.m.iter().map(|r| r.iter().map(|v| f(*v)).collect()).collect(),
            kernel_basis: form.kernel.vectors.iter().map(|v| [f(v.a11), f(v.a22), f(v.a12)]).collect(),
            kernel_dim: form.kernel.dim(),
            coercivity_mu: f(form.coercivity_mu),
            diagnostics: Some(FormDiagnostics {
                numerical_kernel_dim: form.numerical_kernel_dim,
                eigenvalues: form.eigenvalues().into_iter().map(f).collect(),
                apriori_constant: finite_or_none(f(form.apriori_constant)),
                polarization_gap: f(form.polarization_gap),
                max_residual: f(form.max_residual),
                kernel_leak: f(form.kernel_leak()),
            }),
        }
    }

    /// Rebuilds the form; derived quantities are recomputed from `m` and the kernel.
    pub fn to_form<T: Scalar>(&self) -> Result<EffectiveForm<T>, Error> {
        let bad = |msg: String| Error::InvalidParams(format!("effective form file: {msg}"));
        if self.convention != CONVENTION {
            return Err(bad(format!("unknown convention {:?}", self.convention)));
        }
        if self.m.len() != 6 || self.m.iter().any(|r| r.len() != 6) {
            return Err(bad("matrix must be 6x6".into()));
        }
        let mut m = [[T::zero(); 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                let v = self.m[i][j];
                if !v.is_finite() {
                    return Err(bad("matrix has non-finite entries".into()));
                }
                if v != self.m[j][i] {
                    return Err(bad(format!("matrix is not symmetric at ({i}, {j})")));
                }
                m[i][j] = T::lit(v);
            }
        }
        if self.kernel_basis.len() != self.kernel_dim || self.kernel_dim > 3 {
            return Err(bad("kernel_dim does not match the kernel basis".into()));
        }
        let vectors = self
            .kernel_basis
            .iter()
            .map(|k| SymMat2::new(T::lit(k[0]), T::lit(k[1]), T::lit(k[2])))
            .collect();
        Ok(EffectiveForm::from_matrix(m, KernelBasis { vectors }))
    }
}

/// Writes `(u1_1, u1_2, v1)` of a corrector on an `n x n` grid of the unit cell.
pub fn write_corrector_csv<T: Scalar, W: Write>(w: &mut W, sol: &CorrectorSolution<T>, n: usize) -> Result<(), Error> {
    let [u1, u2, v] = sol.sample(n)?;
    let io_err = |e: io::Error| Error::InvalidParams(format!("write failed: {e}"));
    writeln!(w, "y1,y2,u1,u2,v").map_err(io_err)?;
    for j2 in 0..n {
        for j1 in 0..n {
            let p = j2 * n + j1;
            writeln!(
                w,
                "{},{},{},{},{}",
                format_f64(j1 as f64 / n as f64),
                format_f64(j2 as f64 / n as f64),
                format_f64(u1[p].to_f64_lossy()),
                format_f64(u2[p].to_f64_lossy()),
                format_f64(v[p].to_f64_lossy())
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

/// Writes the plate fields with columns `x1,x2,u1,u2,v`, `x1` varying fastest.
pub fn write_plate_csv<T: Scalar, W: Write>(w: &mut W, dom: &PlateDomain<T>, state: &PlateState<T>) -> io::Result<()> {
    writeln!(w, "x1,x2,u1,u2,v")?;
    for j2 in 0..dom.m2 {
        for j1 in 0..dom.m1 {
            let p = dom.index(j1, j2);
            writeln!(
                w,
                "{},{},{},{},{}",
                format_f64(dom.x1(j1).to_f64_lossy()),
                format_f64(dom.x2(j2).to_f64_lossy()),
                format_f64(state.u1[p].to_f64_lossy()),
                format_f64(state.u2[p].to_f64_lossy()),
                format_f64(state.v[p].to_f64_lossy())
            )?;
        }
    }
    Ok(())
}

/// Reads a file written by [`write_plate_csv`].
pub fn read_plate_csv<T: Scalar>(text: &str, dom: &PlateDomain<T>) -> Result<PlateState<T>, Error> {
    let bad = |msg: String| Error::InvalidParams(format!("plate csv: {msg}"));
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("x1,x2,u1,u2,v") {
        return Err(bad("missing header".into()));
    }
    let mut state = PlateState::zeros(dom);
    let mut count = 0;
    for (p, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        if p >= dom.len() {
            return Err(bad("too many rows".into()));
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| bad(format!("row {p}: {e}"))))
            .collect::<Result<_, _>>()?;
        if cols.len() != 5 {
            return Err(bad(format!("row {p} has {} columns", cols.len())));
        }
        state.u1[p] = T::lit(cols[2]);
        state.u2[p] = T::lit(cols[3]);
        state.v[p] = T::lit(cols[4]);
        count += 1;
    }
    if count != dom.len() {
        return Err(bad(format!("expected {} rows, found {count}", dom.len())));
    }
    Ok(state)
}

/// On-disk energy summary of a plate solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyFile {
    pub membrane_coupled: f64,
    pub bending: f64,
    pub load_work: f64,
    pub total: f64,
    pub s_chosen: i8,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    pub starts: Vec<StartRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub start: usize,
    pub sign: i8,
    pub total: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub field_max: f64,
}

impl EnergyFile {
    pub fn from_solution<T: Scalar>(sol: &PlateSolution<T>, converged: bool) -> Self {
        let EnergyBreakdown { membrane_coupled, bending, load_work, total } = sol.energy;
        Self {
            membrane_coupled: membrane_coupled.to_f64_lossy(),
            bending: bending.to_f64_lossy(),
            load_work: load_work.to_f64_lossy(),
            total: total.to_f64_lossy(),
            s_chosen: sol.sign,
            iterations: sol.iterations,
            gradient_norm: sol.gradient_norm.to_f64_lossy(),
            converged,
            starts: sol
                .starts
                .iter()
                .map(|s| StartRecord {
                    start: s.start,
                    sign: s.sign,
                    total: s.total.to_f64_lossy(),
                    gradient_norm: s.gradient_norm.to_f64_lossy(),
                    iterations: s.iterations,
                    converged: s.converged,
                    field_max: s.field_max.to_f64_lossy(),
                })
                .collect(),
        }
    }
}

//! JSON run configuration.

use std::path::PathBuf;

use serde::Deserialize;
use wrinkleplate::cell::CellParams;
use wrinkleplate::elastic::{ElasticModel, ElasticTensor3};
use wrinkleplate::plate::{LoadCatalog, LoadSpec, MinimizerParams, PlateDomain, SignChoice};
use wrinkleplate::shape::{make_shape, RawCoefficient, ShapeFunction, ShapeSpec};
use wrinkleplate::Error;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub shape: ShapeConfig,
    pub material: MaterialConfig,
    #[serde(default)]
    pub cell: CellConfig,
    #[serde(default)]
    pub plate: Option<PlateConfig>,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeConfig {
    Catalog {
        name: String,
        #[serde(default)]
        params: CatalogParams,
    },
    Custom(Vec<CoefficientRecord>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogParams {
    #[serde(default = "one")]
    pub amplitude: f64,
}

impl Default for CatalogParams {
    fn default() -> Self {
        Self { amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientRecord {
    pub k1: i64,
    pub k2: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum MaterialConfig {
    Isotropic { mu: f64, lambda: f64 },
    /// Upper triangle of the 6x6 Voigt stiffness, row-major.
    Tensor(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellConfig {
    #[serde(alias = "band")]
    pub n: usize,
    pub cg_tol: f64,
    pub max_iter: usize,
    pub dealias: bool,
}

impl Default for CellConfig {
    fn default() -> Self {
        let p = CellParams::<f64>::new(8);
        Self {
            n: p.band,
            cg_tol: p.cg_tol,
            max_iter: p.max_iter,
            dealias: p.dealias,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateConfig {
    #[serde(default = "one")]
    pub lx: f64,
    #[serde(default = "one")]
    pub ly: f64,
    #[serde(default = "default_m")]
    pub m1: usize,
    #[serde(default = "default_m")]
    pub m2: usize,
    pub load: LoadConfig,
    #[serde(default)]
    pub sign: Option<SignConfig>,
    #[serde(default)]
    pub minimizer: MinimizerConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum LoadConfig {
    Catalog {
        name: String,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Rows of `m1` values, one row per `x2` grid line.
    Grid(Vec<Vec<f64>>),
}

/// `"auto"`, `"plus"`, `"minus"`, `1` or `-1`; absent means auto.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum SignConfig {
    Name(SignName),
    Value(i8),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignName {
    Auto,
    Plus,
    Minus,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MinimizerConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub n_starts: usize,
    pub seed: u64,
    pub perturbation: f64,
    pub memory: usize,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        let p = MinimizerParams::<f64>::default();
        Self {
            tol: p.tol,
            max_iter: p.max_iter,
            n_starts: p.n_starts,
            seed: p.seed,
            perturbation: p.perturbation,
            memory: p.memory,
        }
    }
}

/// Sizes of the checks run by `validate`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateConfig {
    pub oracle_n: usize,
    pub oracle_loads: usize,
    pub linearity_trials: usize,
    pub gradient_states: usize,
    pub seed: u64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            oracle_n: 24,
            oracle_loads: 2,
            linearity_trials: 2,
            gradient_states: 3,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write `correctors_<basis>.csv` from `effective`.
    pub correctors: bool,
    /// Side of the corrector sampling grid; defaults to `max(32, 2N + 1)`.
    pub corrector_grid: Option<usize>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("wrinkleplate-out"),
            correctors: true,
            corrector_grid: None,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_m() -> usize {
    33
}

/// Everything needed to run, built from a checked config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub shape: ShapeFunction<f64>,
    pub model: ElasticModel<f64>,
    pub cell: CellParams<f64>,
    pub plate: Option<ResolvedPlate>,
}

#[derive(Debug, Clone)]
pub struct ResolvedPlate {
    pub domain: PlateDomain<f64>,
    pub load: LoadSpec<f64>,
    pub minimizer: MinimizerParams<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    pub fn override_seed(&mut self, seed: u64) {
        self.validate.seed = seed;
        if let Some(p) = self.plate.as_mut() {
            p.minimizer.seed = seed;
        }
    }

    /// Checks every component invariant and builds the numerical objects.
    pub fn resolve(&self) -> Result<Resolved, Error> {
        let spec = match &self.shape {
            ShapeConfig::Catalog { name, params } => match name.as_str() {
                "flat" => ShapeSpec::Flat,
                "uniwave" => ShapeSpec::Uniwave { amplitude: params.amplitude },
                "eggbox" => ShapeSpec::Eggbox { amplitude: params.amplitude },
                other => return Err(Error::InvalidShape(format!("unknown shape catalog name {other:?}"))),
            },
            ShapeConfig::Custom(list) => ShapeSpec::Custom {
                coefficients: list
                    .iter()
                    .map(|c| RawCoefficient { k1: c.k1, k2: c.k2, re: c.re, im: c.im })
                    .collect(),
                band: None,
            },
        };
        let shape = make_shape(&spec)?;
        let model = match &self.material {
            MaterialConfig::Isotropic { mu, lambda } => ElasticModel::isotropic(*mu, *lambda)?,
            MaterialConfig::Tensor(upper) => ElasticModel::Tensor(ElasticTensor3::from_voigt_upper(upper)?),
        };
        let cell = CellParams {
            band: self.cell.n,
            cg_tol: self.cell.cg_tol,
            max_iter: self.cell.max_iter,
            dealias: self.cell.dealias,
        };
        cell.validate(shape.band())?;
        let plate = self.plate.as_ref().map(PlateConfig::resolve).transpose()?;
        Ok(Resolved { shape, model, cell, plate })
    }
}

impl PlateConfig {
    fn resolve(&self) -> Result<ResolvedPlate, Error> {
        let domain = PlateDomain::new(self.lx, self.ly, self.m1, self.m2)?;
        let sign = match self.sign {
            None | Some(SignConfig::Name(SignName::Auto)) => SignChoice::Auto,
            Some(SignConfig::Name(SignName::Plus) | SignConfig::Value(1)) => SignChoice::Plus,
            Some(SignConfig::Name(SignName::Minus) | SignConfig::Value(-1)) => SignChoice::Minus,
            Some(SignConfig::Value(v)) => return Err(Error::InvalidLoad(format!("sign must be +1, -1 or \"auto\", got {v}"))),
        };
        let load = match &self.load {
            LoadConfig::Catalog { name, amplitude } => {
                let c = match name.as_str() {
                    "dipole" => LoadCatalog::Dipole { amplitude: *amplitude },
                    "checker" => LoadCatalog::Checker { amplitude: *amplitude },
                    other => return Err(Error::InvalidLoad(format!("unknown load catalog name {other:?}"))),
                };
                LoadSpec::from_catalog(&c, sign, &domain)?
            }
            LoadConfig::Grid(rows) => {
                if rows.len() != domain.m2 || rows.iter().any(|r| r.len() != domain.m1) {
                    return Err(Error::InvalidLoad(format!(
                        "load grid must have {} rows of {} values",
                        domain.m2, domain.m1
                    )));
                }
                LoadSpec::new(rows.concat(), sign, &domain)?
            }
        };
        let m = &self.minimizer;
        let minimizer = MinimizerParams {
            tol: m.tol,
            max_iter: m.max_iter,
            n_starts: m.n_starts,
            seed: m.seed,
            perturbation: m.perturbation,
            memory: m.memory,
        };
        minimizer.validate()?;
        Ok(ResolvedPlate { domain, load, minimizer })
    }
}

//! Batch front-end: `effective`, `solve` and `validate` verbs driven by a JSON
//! run configuration.

pub mod config;
mod validate;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use wrinkleplate::cell::{assemble_effective_matrix, EffectiveForm, BASIS_NAMES};
use wrinkleplate::elastic::{plane_form, PlaneForm};
use wrinkleplate::io::{to_json_string, write_corrector_csv, write_plate_csv, EffectiveFormFile, EnergyFile};
use wrinkleplate::plate::{minimize_plate, MinimizeError, PlateSolution};

use config::{Resolved, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_NO_DECREASE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "wrinkleplate", version, about = "Homogenized plates with periodic wrinkles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble the effective form and write it with the basis correctors.
    Effective(CommonArgs),
    /// Minimize the homogenized plate energy.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Use a previously written effective_form.json instead of assembling.
        #[arg(long, value_name = "PATH")]
        reuse_effective: Option<PathBuf>,
    },
    /// Run the oracle and invariant checks and write validate_report.json.
    Validate(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Path of the JSON run configuration.
    pub config: PathBuf,
    /// Output directory; overrides `outputs.dir`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed of every random choice; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("{0}")]
    Output(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Output(_) => EXIT_CONFIG,
            Self::NonConvergence(_) => EXIT_NONCONVERGENCE,
        }
    }
}

impl From<wrinkleplate::Error> for Failure {
    fn from(e: wrinkleplate::Error) -> Self {
        use wrinkleplate::Error as E;
        match e {
            E::NonConvergence { .. } | E::IterationCap { .. } => Self::NonConvergence(e.to_string()),
            other => Self::Config(other.to_string()),
        }
    }
}

/// Parses `args` (program name first), runs the verb and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

fn dispatch(cmd: &Command) -> Result<i32, Failure> {
    match cmd {
        Command::Effective(common) => {
            let job = Job::load(common)?;
            cmd_effective(&job)
        }
        Command::Solve { common, reuse_effective } => {
            let job = Job::load(common)?;
            cmd_solve(&job, reuse_effective.as_deref())
        }
        Command::Validate(common) => {
            let job = Job::load(common)?;
            validate::cmd_validate(&job)
        }
    }
}

/// A parsed and resolved configuration together with its output directory.
pub struct Job {
    pub config: RunConfig,
    pub resolved: Resolved,
    pub plane: PlaneForm<f64>,
    pub out: PathBuf,
}

impl Job {
    pub fn load(args: &CommonArgs) -> Result<Self, Failure> {
        let text = fs::read_to_string(&args.config)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", args.config.display())))?;
        let mut config = RunConfig::parse(&text).map_err(Failure::Config)?;
        if let Some(seed) = args.seed {
            config.override_seed(seed);
        }
        let resolved = config.resolve().map_err(|e| Failure::Config(e.to_string()))?;
        let plane = plane_form(&resolved.model).map_err(|e| Failure::Config(e.to_string()))?;
        let out = args.out.clone().unwrap_or_else(|| config.outputs.dir.clone());
        Ok(Self { config, resolved, plane, out })
    }

    fn assemble(&self) -> Result<EffectiveForm<f64>, Failure> {
        let r = &self.resolved;
        let form = assemble_effective_matrix(&r.shape, &self.plane, &r.cell)?;
        eprintln!(
            "effective form: kernel dim {}, coercivity {:.3e}, max residual {:.1e}",
            form.kernel.dim(),
            form.coercivity_mu,
            form.max_residual
        );
        Ok(form)
    }
}

/// Files of one run, committed together once everything has been computed.
#[derive(Default)]
pub(crate) struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub(crate) fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub(crate) fn add_json<S: serde::Serialize>(&mut self, name: &str, value: &S) -> Result<(), Failure> {
        let text = to_json_string(value).map_err(|e| Failure::Output(format!("{name}: {e}")))?;
        self.add(name, text.into_bytes());
        Ok(())
    }

    /// Writes every file to a temporary name first, then renames them into place.
    pub(crate) fn commit(self, dir: &Path) -> Result<(), Failure> {
        let fail = |what: &str, p: &Path, e: std::io::Error| Failure::Output(format!("{what} {}: {e}", p.display()));
        fs::create_dir_all(dir).map_err(|e| fail("cannot create", dir, e))?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let tmp = dir.join(format!(".{name}.tmp"));
            if let Err(e) = fs::write(&tmp, bytes) {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                let _ = fs::remove_file(&tmp);
                return Err(fail("cannot write", &tmp, e));
            }
            staged.push((tmp, dir.join(name)));
        }
        for (tmp, path) in &staged {
            fs::rename(tmp, path).map_err(|e| fail("cannot move into", path, e))?;
        }
        Ok(())
    }
}

pub fn cmd_effective(job: &Job) -> Result<i32, Failure> {
    let form = job.assemble()?;
    let mut out = Outputs::default();
    out.add_json("effective_form.json", &EffectiveFormFile::from_form(&form))?;
    if job.config.outputs.correctors {
        let n = job
            .config
            .outputs
            .corrector_grid
            .unwrap_or_else(|| (2 * job.resolved.cell.band + 1).max(32));
        for (name, sol) in BASIS_NAMES.iter().zip(&form.correctors) {
            let mut buf = Vec::new();
            write_corrector_csv(&mut buf, sol, n)?;
            out.add(&format!("correctors_{name}.csv"), buf);
        }
    }
    out.commit(&job.out)?;
    Ok(EXIT_OK)
}

pub fn cmd_solve(job: &Job, reuse: Option<&Path>) -> Result<i32, Failure> {
    let plate = job
        .resolved
        .plate
        .as_ref()
        .ok_or_else(|| Failure::Config("solve needs a `plate` section".into()))?;
    let form = match reuse {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            let file: EffectiveFormFile = serde_json::from_str(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            file.to_form().map_err(|e| Failure::Config(e.to_string()))?
        }
        None => job.assemble()?,
    };
    let (sol, converged) = match minimize_plate(&plate.domain, &form, &job.plane, &plate.load, &plate.minimizer) {
        Ok(sol) => (sol, true),
        Err(MinimizeError::NoDecrease { best }) => (*best, false),
        Err(MinimizeError::Invalid(e)) => return Err(Failure::Config(e.to_string())),
    };
    report_solution(&sol, converged);
    let mut out = Outputs::default();
    let mut csv = Vec::new();
    write_plate_csv(&mut csv, &plate.domain, &sol.state).map_err(|e| Failure::Output(e.to_string()))?;
    out.add("plate_solution.csv", csv);
    out.add_json("energy.json", &EnergyFile::from_solution(&sol, converged))?;
    out.commit(&job.out)?;
    if converged {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: descent stopped before the gradient tolerance; best state written");
        Ok(EXIT_NO_DECREASE)
    }
}

fn report_solution(sol: &PlateSolution<f64>, converged: bool) {
    eprintln!(
        "plate: total {:.6e}, s = {}, {} iterations, gradient {:.2e}{}",
        sol.energy.total,
        sol.sign,
        sol.iterations,
        sol.gradient_norm,
        if converged { "" } else { " (not converged)" }
    );
}

//! The `sphere-disc` command line.
//!
//! Exit status: 0 on success, 1 when a run finishes but its outcome is
//! negative (no certificate, budget exhausted), 2 on bad arguments or input.

use crate::covering::{find_uncovered_point, CoverInstance};
use crate::geometry::{
    cap_angle_from_volume, cap_volume, gaussian_density, gaussian_tail, gaussian_tail_bounds,
    gaussian_tail_inverse, Halfspace,
};
use crate::hardness::{reduce_nae_e3sat, NaeFormula};
use crate::io::{render_row, BodyTag, VectorsFile};
use crate::komlos::{spherical_komlos, KomlosError, KomlosInput};
use crate::linalg::UnitVector;
use crate::packing::generate_packing;
use crate::solver::{solve, Instance, SolverConfig};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "sphere-disc", version, about = "Spherical discrepancy by multiplicative weights")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Steps {
    /// Number of solver steps (default: large enough that the step-size term
    /// is a twentieth of the main term).
    #[arg(long = "T", visible_alias = "iterations")]
    pub iterations: Option<u64>,
}

impl Steps {
    fn config(&self, n: usize, m: usize) -> SolverConfig {
        match self.iterations {
            Some(t) => SolverConfig::with_iterations(t),
            None => SolverConfig::default_for(n, m),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find a unit vector with small max inner product against a vectors file.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        steps: Steps,
        /// Write the witness as a one-vector file.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the per-step trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Find a point outside every cap (or halfspace) of a caps file.
    Witness {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        steps: Steps,
    },
    /// Greedy packing of m points on the sphere in R^n.
    Pack {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        steps: Steps,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Unit vector with small ‖Wx‖∞ for a matrix of columns of norm ≤ 1.
    Komlos {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reduce an NAE-3-SAT formula to a vectors file.
    Reduce {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Standard Gaussian tail Φ̄(t), or its inverse at δ.
    Gauss {
        #[arg(long, allow_hyphen_values = true, conflicts_with = "delta", required_unless_present = "delta")]
        t: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Normalized cap volume at angle θ, or the angle of volume δ.
    Capvol {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "delta", required_unless_present = "delta")]
        theta: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&config.command, out) {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::Negative(msg)) => {
            let _ = writeln!(err, "sphere-disc: {msg}");
            1
        }
        Err(e) => {
            let _ = writeln!(err, "sphere-disc: {e:#}");
            2
        }
    }
}

enum Outcome {
    Success,
    Negative(String),
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: &mut dyn Write, key: &str, v: f64) -> Result<()> {
    writeln!(out, "{key} {v:.16e}")?;
    Ok(())
}

fn execute(command: &Command, out: &mut dyn Write) -> Result<Outcome> {
    match command {
        Command::Solve {
            input,
            steps,
            output,
            trace,
        } => {
            let file = VectorsFile::parse(&read(input)?).context("parsing vectors file")?;
            let instance = Instance::new(file.n, file.vectors)?;
            let config = steps.config(instance.dim(), instance.len());
            let sol = solve(&instance, &config)?;
            writeln!(out, "n {}", instance.dim())?;
            writeln!(out, "m {}", instance.len())?;
            writeln!(out, "padded_m {}", sol.padded_m)?;
            writeln!(out, "T {}", sol.iterations)?;
            emit(out, "value", sol.value)?;
            emit(out, "guarantee", sol.bound.value)?;
            emit(out, "term_main", sol.bound.term_main)?;
            emit(out, "term_stepsize", sol.bound.term_stepsize)?;
            emit(out, "term_log3", sol.bound.term_log3)?;
            writeln!(out, "x {}", render_row(sol.x.as_slice()))?;
            if let Some(p) = output {
                write_file(p, &VectorsFile::new(instance.dim(), vec![sol.x.as_slice().to_vec()]).render())?;
            }
            if let Some(p) = trace {
                write_file(p, &sol.trace.to_csv())?;
            }
            if sol.within_guarantee() {
                Ok(Outcome::Success)
            } else {
                Ok(Outcome::Negative(format!(
                    "value {:.16e} exceeds the guarantee {:.16e}",
                    sol.value, sol.bound.value
                )))
            }
        }
        Command::Witness { input, steps } => {
            let file = VectorsFile::parse(&read(input)?).context("parsing caps file")?;
            let n = file.n;
            let directions = file
                .vectors
                .iter()
                .map(|v| UnitVector::new(v.clone()))
                .collect::<Result<Vec<_>, _>>()
                .context("cap poles must be unit vectors")?;
            let cover = match file.body {
                Some(BodyTag::Theta(angle)) => CoverInstance::caps(directions, angle)?,
                Some(BodyTag::Volume(vol)) => {
                    CoverInstance::caps(directions, cap_angle_from_volume(n, vol)?)?
                }
                Some(BodyTag::Threshold(t)) => CoverInstance::from_halfspaces(
                    directions
                        .into_iter()
                        .map(|d| Halfspace::new(d, t))
                        .collect::<Result<Vec<_>, _>>()?,
                )?,
                None => bail!("caps file needs a `theta`, `volume` or `threshold` line"),
            };
            let config = steps.config(cover.dim(), cover.len());
            let report = find_uncovered_point(&cover, &config)?;
            emit(out, "max_inner", report.max_inner)?;
            emit(out, "threshold", cover.unit_threshold())?;
            emit(out, "guarantee", report.certified_bound.value)?;
            writeln!(out, "certified {}", report.certified)?;
            writeln!(out, "witness {}", render_row(report.witness.as_slice()))?;
            writeln!(out, "point {}", render_row(&report.point))?;
            if report.certified {
                Ok(Outcome::Success)
            } else {
                Ok(Outcome::Negative("witness is not outside every body".into()))
            }
        }
        Command::Pack {
            n,
            m,
            steps,
            output,
        } => {
            let config = steps.config(*n, (*m).saturating_sub(1).max(1));
            let r = generate_packing(*n, *m, &config)?;
            writeln!(out, "n {n}")?;
            writeln!(out, "m {m}")?;
            emit(out, "max_pair_inner", r.max_pair_inner)?;
            emit(out, "radius", r.radius)?;
            emit(out, "density", r.density)?;
            emit(out, "guarantee", r.certified_bound.value)?;
            let points = r.points.iter().map(|p| p.as_slice().to_vec()).collect();
            let text = VectorsFile::new(*n, points).render();
            match output {
                Some(p) => write_file(p, &text)?,
                None => out.write_all(text.as_bytes())?,
            }
            if r.within_bound() {
                Ok(Outcome::Success)
            } else {
                Ok(Outcome::Negative("packing exceeds its guarantee".into()))
            }
        }
        Command::Komlos {
            input,
            seed,
            output,
        } => {
            let file = VectorsFile::parse(&read(input)?).context("parsing matrix file")?;
            if !file.columns {
                bail!("matrix file needs a `columns` line");
            }
            let kin = KomlosInput::new(file.vectors)?;
            let outcome = match spherical_komlos(&kin, *seed) {
                Ok(o) => o,
                Err(e @ KomlosError::BudgetExhausted { .. }) => {
                    return Ok(Outcome::Negative(e.to_string()))
                }
                Err(e) => return Err(e.into()),
            };
            emit(out, "inf_norm", outcome.inf_norm)?;
            emit(out, "achieved_k", outcome.achieved_k())?;
            emit(out, "certified_k", outcome.certified_k)?;
            writeln!(out, "heavy_rows {}", outcome.heavy_rows.len())?;
            writeln!(out, "x {}", render_row(outcome.x.as_slice()))?;
            if let Some(p) = output {
                write_file(p, &VectorsFile::new(kin.dim(), vec![outcome.x.as_slice().to_vec()]).render())?;
            }
            Ok(Outcome::Success)
        }
        Command::Reduce { input, output } => {
            let formula = NaeFormula::parse(&read(input)?).context("parsing formula")?;
            let inst = reduce_nae_e3sat(&formula);
            let text = VectorsFile::new(inst.dim(), inst.vectors().to_vec()).render();
            match output {
                Some(p) => write_file(p, &text)?,
                None => out.write_all(text.as_bytes())?,
            }
            Ok(Outcome::Success)
        }
        Command::Gauss { t, delta } => {
            if let Some(t) = t {
                emit(out, "tail", gaussian_tail(*t))?;
                emit(out, "density", gaussian_density(*t))?;
                if *t > 0.0 {
                    let (lo, hi) = gaussian_tail_bounds(*t)?;
                    emit(out, "lower", lo)?;
                    emit(out, "upper", hi)?;
                }
            } else if let Some(d) = delta {
                let inv = gaussian_tail_inverse(*d)?;
                emit(out, "t", inv.numeric)?;
                emit(out, "asymptotic", inv.asymptotic)?;
            }
            Ok(Outcome::Success)
        }
        Command::Capvol { n, theta, delta } => {
            if let Some(th) = theta {
                emit(out, "volume", cap_volume(*n, *th)?)?;
            } else if let Some(d) = delta {
                emit(out, "theta", cap_angle_from_volume(*n, *d)?)?;
            }
            Ok(Outcome::Success)
        }
    }
}

/// Convenience for building caps in tests and scripts.
pub fn caps_file(poles: &[Vec<f64>], tag: BodyTag) -> String {
    let n = poles.first().map_or(0, Vec::len);
    VectorsFile {
        n,
        vectors: poles.to_vec(),
        body: Some(tag),
        columns: false,
    }
    .render()
}

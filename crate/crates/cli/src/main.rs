//! Command-line front end: state file I/O plus the simulate / invariants /
//! spectral / lemmas / theta / reduce subcommands with CSV/JSON reports.
//!
//! Exit codes: 0 success, 1 validation or precondition refusal, 2 numeric
//! non-convergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hptoda::curve::{boundary_limits, RadiusSchedule};
use hptoda::exact::{format_rat, parse_rat, rat_to_f64, Rat};
use hptoda::lattice::{evolve, TodaState};
use hptoda::reduction::{zeta_sweep, ZetaExperiment};
use hptoda::spectral::{invariant_report, spectral_data};
use hptoda::state_io::{parse_state, StateFile};
use hptoda::theta::{
    abel_images, period_dump, periods, reconstruct_and_verify, HyperellipticModel,
};
use hptoda::{CurveError, LatticeError, ReductionError, StateFileError, ThetaError};

#[derive(Parser)]
#[command(
    name = "hptoda",
    about = "Exact and numerical laboratory for the hungry periodic discrete Toda lattice",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON state file (rationals as strings "p" or "p/q").
    #[arg(long)]
    state: PathBuf,
    /// Output report path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the lattice exactly and write the trajectory as JSON.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of steps.
        #[arg(long, default_value_t = 25)]
        steps: usize,
    },
    /// Track the spectral coefficients along a trajectory (CSV + verdict).
    Invariants {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 25)]
        steps: usize,
    },
    /// Spectral polynomial, genus, marked points, and the E constant (JSON).
    Spectral {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Boundary limits of the eigenvector-ratio functions (CSV table).
    Lemmas {
        #[command(flatten)]
        common: CommonArgs,
        /// Radius schedule start:end:count, geometric.
        #[arg(long, default_value = "1e2:1e8:12")]
        radii: String,
        /// Convergence tolerance for the extrapolated limits.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// Theta-function reconstruction of the trajectory (CSV + periods JSON).
    Theta {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 8)]
        steps: usize,
    },
    /// Depth-reduction zeta sweep from a base state (CSV).
    Reduce {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated exact zeta values, e.g. "100,10000,1000000".
        #[arg(long, default_value = "100,10000,1000000")]
        zeta: String,
        /// Number of blocks measured per run.
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// Bad input, bad shape, or an unmet mathematical precondition.
    Refusal(String),
    /// A numerical routine did not converge.
    NoConvergence(String),
}

impl Failure {
    fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Refusal(_) => ExitCode::from(1),
            Failure::NoConvergence(_) => ExitCode::from(2),
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Refusal(m) | Failure::NoConvergence(m) => m,
        }
    }
}

fn refusal(e: impl std::fmt::Display) -> Failure {
    Failure::Refusal(e.to_string())
}

fn from_state_file(e: StateFileError) -> Failure {
    refusal(e)
}

fn from_lattice(e: LatticeError) -> Failure {
    match e {
        LatticeError::Invalid(_) => refusal(e),
        _ => Failure::NoConvergence(e.to_string()),
    }
}

fn from_curve(e: CurveError) -> Failure {
    match e {
        CurveError::NotCoprime { n, m } => Failure::Refusal(format!(
            "boundary limits require gcd(N, M) = 1 so that the two fibers over \
             x = infinity collapse to single points; got N = {n}, M = {m}"
        )),
        CurveError::UnsupportedPeriod(_) | CurveError::Algebra(_) | CurveError::Spectral(_) => {
            refusal(e)
        }
        _ => Failure::NoConvergence(e.to_string()),
    }
}

fn from_theta(e: ThetaError) -> Failure {
    match e {
        ThetaError::UnsupportedShape { n, m } => Failure::Refusal(format!(
            "theta reconstruction is implemented for the genus-1 case N = 2, M = 1 \
             (gcd(N, M) = 1 with a hyperelliptic quartic model); got N = {n}, M = {m}"
        )),
        ThetaError::CurveSingular(_) => refusal(e),
        ThetaError::Curve(inner) => from_curve(inner),
        ThetaError::Lattice(inner) => from_lattice(inner),
        ThetaError::Spectral(inner) => refusal(inner),
        _ => Failure::NoConvergence(e.to_string()),
    }
}

fn from_reduction(e: ReductionError) -> Failure {
    match e {
        ReductionError::ConstraintViolated(_) | ReductionError::BadExperiment(_) => refusal(e),
        ReductionError::Lattice(inner) => from_lattice(inner),
        _ => refusal(e),
    }
}

fn write_report(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::Refusal(format!("cannot write {}: {e}", path.display())))
}

fn load_state(path: &Path) -> Result<TodaState, Failure> {
    parse_state(path).map_err(from_state_file)
}

fn parse_radii(text: &str) -> Result<RadiusSchedule, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::Refusal(format!(
            "bad --radii {text:?}: expected start:end:count"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| Failure::Refusal(format!("bad radius start {:?}", parts[0])))?;
    let end: f64 = parts[1]
        .parse()
        .map_err(|_| Failure::Refusal(format!("bad radius end {:?}", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Failure::Refusal(format!("bad radius count {:?}", parts[2])))?;
    if !(start > 0.0 && end > start && count >= 5) {
        return Err(Failure::Refusal(
            "radii must satisfy 0 < start < end with at least 5 points".into(),
        ));
    }
    Ok(RadiusSchedule { start, end, count })
}

fn parse_zetas(text: &str) -> Result<Vec<Rat>, Failure> {
    text.split(',')
        .map(|s| parse_rat(s.trim()).map_err(|e| Failure::Refusal(format!("bad --zeta: {e}"))))
        .collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { common, steps } => {
            let state = load_state(&common.state)?;
            let trajectory = evolve(&state, steps).map_err(from_lattice)?;
            let files: Vec<StateFile> = trajectory.iter().map(StateFile::from_state).collect();
            let json = serde_json::json!({ "states": files });
            write_report(
                &common.out,
                &serde_json::to_string_pretty(&json).expect("serializable"),
            )?;
            println!(
                "simulated {} steps; wrote {} states to {}",
                steps,
                trajectory.len(),
                common.out.display()
            );
            Ok(())
        }
        Command::Invariants { common, steps } => {
            let state = load_state(&common.state)?;
            let trajectory = evolve(&state, steps).map_err(from_lattice)?;
            let report = invariant_report(&trajectory).map_err(refusal)?;
            write_report(&common.out, &report.to_csv())?;
            println!(
                "spectral coefficients over {} steps: {}",
                steps,
                if report.exact { "exact" } else { "inexact" }
            );
            Ok(())
        }
        Command::Spectral { common } => {
            let state = load_state(&common.state)?;
            let data = spectral_data(&state).map_err(refusal)?;
            let coeffs: Vec<serde_json::Value> = data
                .f
                .terms()
                .map(|(x, y, c)| {
                    serde_json::json!({ "x_deg": x, "y_deg": y, "coeff": format_rat(c) })
                })
                .collect();
            let json = serde_json::json!({
                "f": coeffs,
                "genus": data.genus,
                "gcd": data.gcd_m,
                "points_a_y": data.points_a.iter().map(format_rat).collect::<Vec<_>>(),
                "point_b_y": format_rat(&data.point_b),
                "e_constant": format_rat(&data.q_constant),
            });
            write_report(
                &common.out,
                &serde_json::to_string_pretty(&json).expect("serializable"),
            )?;
            println!(
                "genus {} curve with {} marked points over x = 0; E = {}",
                data.genus,
                data.points_a.len() + 1,
                format_rat(&data.q_constant)
            );
            Ok(())
        }
        Command::Lemmas { common, radii, tol } => {
            let state = load_state(&common.state)?;
            let schedule = parse_radii(&radii)?;
            let limits = boundary_limits(&state, &schedule, 0.0, tol).map_err(from_curve)?;
            write_report(&common.out, &limits.to_csv())?;
            let n = state.sites();
            let i_ratio = rat_to_f64(&(&state.front_layer()[n - 1] / &state.front_layer()[0]));
            let v_ratio = rat_to_f64(&(&state.v()[n - 2] / &state.v()[n - 1]));
            println!(
                "psi ratio {:.8} (lattice value {:.8}); phi ratio {:.8} (lattice value {:.8})",
                limits.psi_ratio().re,
                i_ratio,
                limits.phi_ratio().re,
                v_ratio
            );
            Ok(())
        }
        Command::Theta { common, steps } => {
            let state = load_state(&common.state)?;
            let report = reconstruct_and_verify(&state, steps).map_err(from_theta)?;
            write_report(&common.out, &report.to_csv())?;

            let model = HyperellipticModel::from_state(&state).map_err(from_theta)?;
            let period_data = periods(&model, 64).map_err(from_theta)?;
            let images = abel_images(&model, &period_data, &state).map_err(from_theta)?;
            let dump = period_dump(&model, &period_data, &images);
            let dump_path = common.out.with_extension("periods.json");
            write_report(
                &dump_path,
                &serde_json::to_string_pretty(&dump).expect("serializable"),
            )?;
            println!(
                "reconstructed t = 0..{} with max relative error {:.3e}; period ratio {:.12}+{:.12}i",
                steps, report.max_rel_error, images.omega.re, images.omega.im
            );
            Ok(())
        }
        Command::Reduce { common, zeta, k } => {
            let base = load_state(&common.state)?;
            let experiment = ZetaExperiment {
                base,
                zeta_values: parse_zetas(&zeta)?,
                k_range: k,
            };
            let report = zeta_sweep(&experiment).map_err(from_reduction)?;
            write_report(&common.out, &report.to_csv())?;
            let last = report.rows.last().expect("at least one zeta");
            println!(
                "residual slope {:.4}; at zeta = {} the max residuals are r1 {:.3e}, r2 {:.3e}",
                report.slope,
                format_rat(&last.zeta),
                last.max_r1,
                last.max_r2
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; anything else is a
            // usage refusal.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            failure.exit_code()
        }
    }
}

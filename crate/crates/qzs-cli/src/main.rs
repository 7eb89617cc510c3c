//! `qzs` binary: instance generation, solving, benchmarking, the SDP
//! bridge, and the runtime property suite.

use std::path::PathBuf;
use std::process::exit;

use clap::{Args, Parser, Subcommand};

use qzs_cli::checks::{run_verify, Mutation};
use qzs_cli::dto::{read_table, Algo, GenConfigDto, SdpConfigDto, SolveConfigDto};
use qzs_cli::gen::{preset_names, preset_table};
use qzs_cli::run::{
    run_bench, run_from_manifest, run_gen, run_sdp, run_solve, BenchRequest, GenRequest,
    OutPaths, SdpRequest, SolveRequest,
};
use qzs_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "qzs", version, about = "Quantum zero-sum game solver harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file and the manifest that regenerates it.
    Gen(GenArgs),
    /// Solve an instance; writes a JSONL trace, a JSON summary, and a
    /// manifest.
    Solve(SolveArgs),
    /// Run a solver grid over instances and accuracies; one CSV row per
    /// cell.
    Bench(BenchArgs),
    /// Solve a strictly positive trace-form SDP through the game
    /// reduction.
    Sdp(SdpArgs),
    /// Run the runtime property suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Rerun a recorded generation verbatim.
    #[arg(long, conflicts_with_all = ["kind", "out", "preset", "table"])]
    manifest: Option<PathBuf>,
    /// Generator family: povm or classical.
    #[arg(long)]
    kind: Option<String>,
    /// First player dimension for --kind povm; must be a power of two.
    #[arg(long, default_value_t = 2)]
    dim_a: usize,
    /// Second player dimension for --kind povm; must be a power of two.
    #[arg(long, default_value_t = 2)]
    dim_b: usize,
    /// Measurement outcome count for --kind povm.
    #[arg(long, default_value_t = 4)]
    outcomes: usize,
    /// Named utility table for --kind classical.
    #[arg(long)]
    preset: Option<String>,
    /// JSON file holding a utility table for --kind classical.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix; writes <out>.instance.json and <out>.manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Rerun a recorded solve verbatim.
    #[arg(long, conflicts_with_all = ["instance", "out"])]
    manifest: Option<PathBuf>,
    /// Instance JSON file to solve.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Solver: itersmooth or ogda.
    #[arg(long, default_value = "itersmooth")]
    algo: String,
    /// Duality gap target.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Stage shrink factor for itersmooth.
    #[arg(long)]
    gamma: Option<f64>,
    /// Step size override for ogda.
    #[arg(long)]
    eta: Option<f64>,
    /// First-order iteration cap.
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix; writes <out>.trace.jsonl, <out>.summary.json, and
    /// <out>.manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock nanoseconds in the trace.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance JSON file; repeat for more instances.
    #[arg(long = "instance", required = true)]
    instances: Vec<PathBuf>,
    /// Accuracy grid entry; repeat for more accuracies.
    #[arg(long = "eps", default_values_t = [1e-2, 1e-4, 1e-6])]
    eps_grid: Vec<f64>,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// First-order iteration cap per cell.
    #[arg(long)]
    max_iters: Option<u64>,
}

#[derive(Args)]
struct SdpArgs {
    /// Rerun a recorded SDP solve verbatim.
    #[arg(long, conflicts_with_all = ["instance", "out"])]
    manifest: Option<PathBuf>,
    /// SDP instance JSON file.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Solver on the derived game: itersmooth or ogda.
    #[arg(long, default_value = "ogda")]
    algo: String,
    /// Duality gap target on the derived game.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix; writes <out>.result.json, <out>.trace.jsonl, and
    /// <out>.manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock nanoseconds in the trace.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only checks whose name contains the substring.
    #[arg(long)]
    filter: Option<String>,
    /// Test fixture: negate the analytic gradient inside the gradient
    /// check; the suite must then fail.
    #[arg(long, hide = true)]
    inject_gradient_sign_flip: bool,
}

fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Input(format!("{flag} is required without --manifest")))
}

fn parse_algo(text: &str) -> CliResult<Algo> {
    text.parse::<Algo>().map_err(CliError::Input)
}

fn dispatch_gen(args: GenArgs) -> CliResult<i32> {
    if let Some(manifest) = args.manifest {
        return run_from_manifest(&manifest);
    }
    let out = require(args.out, "--out")?;
    let kind = require(args.kind, "--kind")?;
    let config = match kind.as_str() {
        "povm" => {
            if args.preset.is_some() || args.table.is_some() {
                return Err(CliError::Input(
                    "--preset and --table apply to --kind classical only".into(),
                ));
            }
            GenConfigDto::Povm {
                dim_a: args.dim_a,
                dim_b: args.dim_b,
                outcomes: args.outcomes,
            }
        }
        "classical" => {
            let table = match (args.preset, args.table) {
                (Some(name), None) => preset_table(&name).ok_or_else(|| {
                    CliError::Input(format!(
                        "unknown preset {name}; known presets: {}",
                        preset_names().join(", ")
                    ))
                })?,
                (None, Some(path)) => read_table(&path)?,
                (Some(_), Some(_)) => {
                    return Err(CliError::Input("give --preset or --table, not both".into()))
                }
                (None, None) => {
                    return Err(CliError::Input(
                        "--kind classical needs --preset or --table".into(),
                    ))
                }
            };
            GenConfigDto::Classical { table }
        }
        other => {
            return Err(CliError::Input(format!(
                "--kind must be povm or classical, got {other}"
            )))
        }
    };
    run_gen(&GenRequest::at_prefix(config, args.seed, &out))
}

fn dispatch_solve(args: SolveArgs) -> CliResult<i32> {
    if let Some(manifest) = args.manifest {
        return run_from_manifest(&manifest);
    }
    let instance_path = require(args.instance, "--instance")?;
    let out = require(args.out, "--out")?;
    let config = SolveConfigDto {
        algo: parse_algo(&args.algo)?,
        eps: args.eps,
        gamma: args.gamma,
        eta: args.eta,
        max_iters: args.max_iters,
        timing: args.timing,
    };
    let req = SolveRequest {
        instance_path,
        config,
        seed: args.seed,
        paths: OutPaths::for_solve(&out),
    };
    run_solve(&req)
}

fn dispatch_bench(args: BenchArgs) -> CliResult<i32> {
    run_bench(&BenchRequest {
        instances: args.instances,
        eps_grid: args.eps_grid,
        out: args.out,
        max_iters: args.max_iters,
    })
}

fn dispatch_sdp(args: SdpArgs) -> CliResult<i32> {
    if let Some(manifest) = args.manifest {
        return run_from_manifest(&manifest);
    }
    let instance_path = require(args.instance, "--instance")?;
    let out = require(args.out, "--out")?;
    let config = SdpConfigDto {
        algo: parse_algo(&args.algo)?,
        eps: args.eps,
        timing: args.timing,
    };
    let req = SdpRequest {
        instance_path,
        config,
        seed: args.seed,
        paths: OutPaths::for_sdp(&out),
    };
    run_sdp(&req)
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Gen(args) => dispatch_gen(args),
        Command::Solve(args) => dispatch_solve(args),
        Command::Bench(args) => dispatch_bench(args),
        Command::Sdp(args) => dispatch_sdp(args),
        Command::Verify(args) => {
            let mutation = args
                .inject_gradient_sign_flip
                .then_some(Mutation::GradientSignFlip);
            Ok(run_verify(args.filter.as_deref(), mutation))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    exit(code);
}

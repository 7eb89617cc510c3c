//! Command drivers behind the binary: generate, solve, benchmark, and
//! SDP runs, each leaving a manifest that reruns it bitwise-identically.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use qzs_core::game::GameInstance;
use qzs_core::sdp::{sdp_to_game, solve_sdp, SdpAlgorithm};
use qzs_core::solver::{
    fit_linear_rate, iter_smooth, ogda_solve, Clock, ConvergenceTrace, IterSmoothConfig,
    NullClock, OgdaConfig, SolveStatus,
};
use qzs_core::spectraplex::{DensityMatrix, JointState};

use crate::dto::{
    self, Algo, GenConfigDto, ManifestDto, SdpConfigDto, SdpInstanceDto, SdpResultDto,
    SolveConfigDto, SummaryDto, TraceRecordDto,
};
use crate::{CliError, CliResult};

/// Clock that reports nanoseconds since its creation.
pub struct MonotonicClock {
    origin: Instant,
}

impl MonotonicClock {
    pub fn new() -> Self {
        MonotonicClock { origin: Instant::now() }
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for MonotonicClock {
    fn now_nanos(&self) -> u64 {
        self.origin.elapsed().as_nanos().min(u64::MAX as u128) as u64
    }
}

/// Deterministic start with both players on their first basis state.
///
/// The maximally mixed pair is already optimal for several stock
/// instances; starting in a corner keeps recorded traces informative.
pub fn corner_start(g: &GameInstance) -> JointState {
    let alpha = DensityMatrix::pure_basis(g.dim_a(), 0);
    let beta = DensityMatrix::pure_basis(g.dim_b(), 0);
    JointState::new(alpha, beta)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{}{}", prefix.display(), suffix))
}

/// Output files of one run: the main report, the iterate trace, and the
/// manifest that reruns the command.
#[derive(Debug, Clone)]
pub struct OutPaths {
    pub report: PathBuf,
    pub trace: PathBuf,
    pub manifest: PathBuf,
}

impl OutPaths {
    pub fn for_solve(prefix: &Path) -> Self {
        OutPaths {
            report: with_suffix(prefix, ".summary.json"),
            trace: with_suffix(prefix, ".trace.jsonl"),
            manifest: with_suffix(prefix, ".manifest.json"),
        }
    }

    pub fn for_sdp(prefix: &Path) -> Self {
        OutPaths {
            report: with_suffix(prefix, ".result.json"),
            trace: with_suffix(prefix, ".trace.jsonl"),
            manifest: with_suffix(prefix, ".manifest.json"),
        }
    }

    fn from_list(paths: &[String]) -> CliResult<Self> {
        if paths.len() != 3 {
            return Err(CliError::Input(format!(
                "manifest output_paths must list report, trace, manifest; found {} entries",
                paths.len()
            )));
        }
        Ok(OutPaths {
            report: PathBuf::from(&paths[0]),
            trace: PathBuf::from(&paths[1]),
            manifest: PathBuf::from(&paths[2]),
        })
    }

    fn as_list(&self) -> Vec<String> {
        vec![
            self.report.display().to_string(),
            self.trace.display().to_string(),
            self.manifest.display().to_string(),
        ]
    }
}

/// One solve invocation, resolved from flags or a manifest.
#[derive(Debug, Clone)]
pub struct SolveRequest {
    pub instance_path: PathBuf,
    pub config: SolveConfigDto,
    pub seed: u64,
    pub paths: OutPaths,
}

/// Run one solver per the config snapshot; flag conflicts are rejected
/// here so manifests can never record an ambiguous configuration.
pub fn execute_solve(g: &GameInstance, cfg: &SolveConfigDto) -> CliResult<ConvergenceTrace> {
    match cfg.algo {
        Algo::IterSmooth => {
            if cfg.eta.is_some() {
                return Err(CliError::Input(
                    "--eta applies to ogda only; use --gamma with itersmooth".into(),
                ));
            }
        }
        Algo::Ogda => {
            if cfg.gamma.is_some() {
                return Err(CliError::Input(
                    "--gamma applies to itersmooth only; use --eta with ogda".into(),
                ));
            }
        }
    }
    let timed;
    let clock: &dyn Clock = if cfg.timing {
        timed = MonotonicClock::new();
        &timed
    } else {
        &NullClock
    };
    let trace = match cfg.algo {
        Algo::IterSmooth => {
            let mut solver_cfg = IterSmoothConfig::standard(g, cfg.eps);
            solver_cfg.z0 = corner_start(g);
            if let Some(gamma) = cfg.gamma {
                solver_cfg.gamma = gamma;
            }
            if let Some(cap) = cfg.max_iters {
                solver_cfg.max_inner = cap;
            }
            iter_smooth(g, &solver_cfg, clock)?
        }
        Algo::Ogda => {
            let mut solver_cfg = OgdaConfig::standard(g, cfg.eps);
            solver_cfg.z0 = corner_start(g);
            solver_cfg.eta = cfg.eta;
            if let Some(cap) = cfg.max_iters {
                solver_cfg.max_iters = cap;
            }
            ogda_solve(g, &solver_cfg, clock)?
        }
    };
    Ok(trace)
}

/// Solve an instance file; writes trace, summary, and manifest.
/// Exit code 0 when the gap target was met, 2 when an iteration cap
/// ended the run first.
pub fn run_solve(req: &SolveRequest) -> CliResult<i32> {
    let game = dto::read_game(&req.instance_path)?;
    let trace = execute_solve(&game, &req.config)?;
    let records: Vec<TraceRecordDto> =
        trace.records.iter().map(TraceRecordDto::from_record).collect();
    dto::write_jsonl(&req.paths.trace, &records)?;
    let summary = SummaryDto::from_trace(&game, &trace)?;
    dto::write_json(&req.paths.report, &summary)?;
    let manifest = ManifestDto::Solve {
        seed: req.seed,
        instance_path: req.instance_path.display().to_string(),
        config: req.config.clone(),
        output_paths: req.paths.as_list(),
    };
    dto::write_json(&req.paths.manifest, &manifest)?;
    Ok(if trace.status == SolveStatus::Converged { 0 } else { 2 })
}

/// One generation invocation.
#[derive(Debug, Clone)]
pub struct GenRequest {
    pub config: GenConfigDto,
    pub seed: u64,
    pub instance: PathBuf,
    pub manifest: PathBuf,
}

impl GenRequest {
    pub fn at_prefix(config: GenConfigDto, seed: u64, prefix: &Path) -> Self {
        GenRequest {
            config,
            seed,
            instance: with_suffix(prefix, ".instance.json"),
            manifest: with_suffix(prefix, ".manifest.json"),
        }
    }
}

/// Generate an instance file plus the manifest that regenerates it.
pub fn run_gen(req: &GenRequest) -> CliResult<i32> {
    let game = match &req.config {
        GenConfigDto::Povm { dim_a, dim_b, outcomes } => {
            crate::gen::gen_random_povm_game(req.seed, *dim_a, *dim_b, *outcomes)?
        }
        GenConfigDto::Classical { table } => crate::gen::gen_classical_embedding(table)?,
    };
    dto::write_game(&req.instance, &game)?;
    let manifest = ManifestDto::Gen {
        seed: req.seed,
        instance_path: req.instance.display().to_string(),
        config: req.config.clone(),
        output_paths: vec![
            req.instance.display().to_string(),
            req.manifest.display().to_string(),
        ],
    };
    dto::write_json(&req.manifest, &manifest)?;
    Ok(0)
}

/// One SDP invocation.
#[derive(Debug, Clone)]
pub struct SdpRequest {
    pub instance_path: PathBuf,
    pub config: SdpConfigDto,
    pub seed: u64,
    pub paths: OutPaths,
}

/// Solve a strictly positive trace-form SDP through the game reduction;
/// writes the bracketed optimum, the solver trace, and the manifest.
pub fn run_sdp(req: &SdpRequest) -> CliResult<i32> {
    let instance_dto: SdpInstanceDto = dto::read_json(&req.instance_path)?;
    let instance = instance_dto.to_instance()?;
    let normalized = instance.normalize_trace_form().map_err(CliError::Core)?;
    let game = sdp_to_game(&normalized, instance.dim_out(), instance.dim_in())
        .map_err(CliError::Core)?;
    let algorithm = match req.config.algo {
        Algo::IterSmooth => SdpAlgorithm::IterSmooth,
        Algo::Ogda => SdpAlgorithm::Ogda,
    };
    let timed;
    let clock: &dyn Clock = if req.config.timing {
        timed = MonotonicClock::new();
        &timed
    } else {
        &NullClock
    };
    let result = solve_sdp(&instance, req.config.eps, algorithm, clock)?;
    let records: Vec<TraceRecordDto> =
        result.trace.records.iter().map(TraceRecordDto::from_record).collect();
    dto::write_jsonl(&req.paths.trace, &records)?;
    let report = SdpResultDto::from_result(&game, &result)?;
    dto::write_json(&req.paths.report, &report)?;
    let manifest = ManifestDto::Sdp {
        seed: req.seed,
        instance_path: req.instance_path.display().to_string(),
        config: req.config.clone(),
        output_paths: req.paths.as_list(),
    };
    dto::write_json(&req.paths.manifest, &manifest)?;
    Ok(0)
}

/// Rerun a recorded command; outputs land on the recorded paths.
pub fn run_from_manifest(path: &Path) -> CliResult<i32> {
    let manifest: ManifestDto = dto::read_json(path)?;
    match manifest {
        ManifestDto::Gen { seed, instance_path, config, output_paths } => {
            if output_paths.len() != 2 {
                return Err(CliError::Input(format!(
                    "gen manifest output_paths must list instance, manifest; found {} entries",
                    output_paths.len()
                )));
            }
            let req = GenRequest {
                config,
                seed,
                instance: PathBuf::from(&output_paths[0]),
                manifest: PathBuf::from(&output_paths[1]),
            };
            if req.instance.display().to_string() != instance_path {
                return Err(CliError::Input(
                    "gen manifest instance_path disagrees with output_paths".into(),
                ));
            }
            run_gen(&req)
        }
        ManifestDto::Solve { seed, instance_path, config, output_paths } => {
            let req = SolveRequest {
                instance_path: PathBuf::from(instance_path),
                config,
                seed,
                paths: OutPaths::from_list(&output_paths)?,
            };
            run_solve(&req)
        }
        ManifestDto::Sdp { seed, instance_path, config, output_paths } => {
            let req = SdpRequest {
                instance_path: PathBuf::from(instance_path),
                config,
                seed,
                paths: OutPaths::from_list(&output_paths)?,
            };
            run_sdp(&req)
        }
    }
}

/// One benchmark invocation: a grid of instances, both algorithms, and
/// a decreasing accuracy ladder, one CSV row per cell.
#[derive(Debug, Clone)]
pub struct BenchRequest {
    pub instances: Vec<PathBuf>,
    pub eps_grid: Vec<f64>,
    pub out: PathBuf,
    pub max_iters: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
struct BenchRow {
    instance: String,
    algorithm: &'static str,
    epsilon: f64,
    iterations: u64,
    wall_ns: u64,
    fitted_slope: Option<f64>,
    status: String,
}

fn bench_cell(game: &GameInstance, algo: Algo, eps: f64, max_iters: Option<u64>) -> BenchRow {
    let base = BenchRow {
        instance: String::new(),
        algorithm: algo.name(),
        epsilon: eps,
        iterations: 0,
        wall_ns: 0,
        fitted_slope: None,
        status: String::new(),
    };
    let cfg = SolveConfigDto {
        algo,
        eps,
        gamma: None,
        eta: None,
        max_iters,
        timing: true,
    };
    match execute_solve(game, &cfg) {
        Ok(trace) => BenchRow {
            iterations: trace.total_first_order_iters,
            wall_ns: trace.records.last().map_or(0, |r| r.ns),
            fitted_slope: fit_linear_rate(&trace, 0.5).ok().map(|(slope, _)| slope),
            status: dto::status_name(trace.status).to_string(),
            ..base
        },
        Err(e) => BenchRow { status: format!("error: {e}"), ..base },
    }
}

/// Run the benchmark grid and write the CSV. Cells run in parallel;
/// row order is instance-major, then algorithm, then decreasing
/// epsilon, independent of scheduling.
pub fn run_bench(req: &BenchRequest) -> CliResult<i32> {
    if req.instances.is_empty() {
        return Err(CliError::Input("bench needs at least one --instance".into()));
    }
    if req.eps_grid.is_empty() {
        return Err(CliError::Input("bench needs at least one --eps".into()));
    }
    for &eps in &req.eps_grid {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(CliError::Input(format!("--eps must be positive and finite, got {eps}")));
        }
    }
    let mut grid = req.eps_grid.clone();
    grid.sort_by(|a, b| b.partial_cmp(a).expect("grid entries are finite"));
    grid.dedup();

    let games: Vec<(String, Result<GameInstance, String>)> = req
        .instances
        .iter()
        .map(|path| {
            let label = path.display().to_string();
            (label, dto::read_game(path).map_err(|e| e.to_string()))
        })
        .collect();

    let mut cells = Vec::new();
    for (idx, _) in games.iter().enumerate() {
        for algo in [Algo::IterSmooth, Algo::Ogda] {
            for &eps in &grid {
                cells.push((idx, algo, eps));
            }
        }
    }

    let rows: Vec<BenchRow> = cells
        .par_iter()
        .map(|&(idx, algo, eps)| {
            let (label, loaded) = &games[idx];
            let mut row = match loaded {
                Ok(game) => bench_cell(game, algo, eps, req.max_iters),
                Err(detail) => BenchRow {
                    instance: String::new(),
                    algorithm: algo.name(),
                    epsilon: eps,
                    iterations: 0,
                    wall_ns: 0,
                    fitted_slope: None,
                    status: format!("error: {detail}"),
                },
            };
            row.instance = label.clone();
            row
        })
        .collect();

    let mut writer = csv::Writer::from_path(&req.out)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", req.out.display())))?;
    for row in &rows {
        writer
            .serialize(row)
            .map_err(|e| CliError::Input(format!("csv row failed: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::io(&req.out, e))?;

    print_iteration_scaling(&rows);
    Ok(0)
}

/// Log how OGDA iteration counts scale across the accuracy ladder; the
/// benchmark reports this ratio, it does not assert on it.
fn print_iteration_scaling(rows: &[BenchRow]) {
    let mut instances: Vec<&str> = rows.iter().map(|r| r.instance.as_str()).collect();
    instances.dedup();
    for label in instances {
        let pick = |eps: f64| {
            rows.iter().find(|r| {
                r.instance == label
                    && r.algorithm == Algo::Ogda.name()
                    && (r.epsilon / eps - 1.0).abs() < 1e-12
                    && r.status == "converged"
                    && r.iterations > 0
            })
        };
        if let (Some(coarse), Some(fine)) = (pick(1e-4), pick(1e-6)) {
            let ratio = fine.iterations as f64 / coarse.iterations as f64;
            println!("scaling {label}: ogda iterations(1e-6) / iterations(1e-4) = {ratio:.2}");
        }
    }
}

//! Serialized forms of matrices, games, traces, summaries, and run
//! manifests, plus the file helpers that read and write them.
//!
//! Complex matrices travel as `{"dim": n, "re": [[..]], "im": [[..]]}`
//! with row-major nested arrays; every other schema builds on that one.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qzs_core::game::{GameInstance, Povm};
use qzs_core::herm::{HermitianMatrix, C64};
use qzs_core::sdp::{SdpInstance, SdpResult};
use qzs_core::solver::{ConvergenceTrace, SolveStatus, TraceRecord};
use qzs_core::spectraplex::JointState;

use crate::{CliError, CliResult};

/// Dense complex matrix as parallel real and imaginary grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixDto {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixDto {
    pub fn from_matrix(m: &HermitianMatrix) -> Self {
        let dim = m.dim();
        let mut re = Vec::with_capacity(dim);
        let mut im = Vec::with_capacity(dim);
        for i in 0..dim {
            let mut re_row = Vec::with_capacity(dim);
            let mut im_row = Vec::with_capacity(dim);
            for j in 0..dim {
                let v = m.entry(i, j);
                re_row.push(v.re);
                im_row.push(v.im);
            }
            re.push(re_row);
            im.push(im_row);
        }
        MatrixDto { dim, re, im }
    }

    /// Validate the grids and hand the entries to the Hermitian
    /// constructor, which enforces self-adjointness.
    pub fn to_matrix(&self) -> CliResult<HermitianMatrix> {
        let dim = self.dim;
        for (label, grid) in [("re", &self.re), ("im", &self.im)] {
            if grid.len() != dim {
                return Err(CliError::Input(format!(
                    "matrix \"{label}\" has {} rows, expected {dim}",
                    grid.len()
                )));
            }
            for (i, row) in grid.iter().enumerate() {
                if row.len() != dim {
                    return Err(CliError::Input(format!(
                        "matrix \"{label}\" row {i} has {} entries, expected {dim}",
                        row.len()
                    )));
                }
                if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                    return Err(CliError::Input(format!(
                        "matrix \"{label}\" row {i} holds a non-finite entry {v}"
                    )));
                }
            }
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(C64::new(self.re[i][j], self.im[i][j]));
            }
        }
        Ok(HermitianMatrix::from_entries(dim, entries)?)
    }
}

/// Strategy pair serialized as its two density matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointStateDto {
    pub alpha: MatrixDto,
    pub beta: MatrixDto,
}

impl JointStateDto {
    pub fn from_state(z: &JointState) -> Self {
        JointStateDto {
            alpha: MatrixDto::from_matrix(z.alpha().matrix()),
            beta: MatrixDto::from_matrix(z.beta().matrix()),
        }
    }
}

/// Game file: either the payoff observable with the qubit split, or a
/// measurement with per-outcome utilities. The measurement form may
/// carry the split explicitly; without it the qubits divide evenly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GameDto {
    Observable {
        qubits_a: u32,
        qubits_b: u32,
        #[serde(rename = "U")]
        u: MatrixDto,
    },
    Povm {
        povm: Vec<PovmOutcomeDto>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        qubits_a: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        qubits_b: Option<u32>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmOutcomeDto {
    pub element: MatrixDto,
    pub utility: f64,
}

impl GameDto {
    pub fn from_game(g: &GameInstance) -> Self {
        GameDto::Observable {
            qubits_a: g.qubits_a(),
            qubits_b: g.qubits_b(),
            u: MatrixDto::from_matrix(g.observable()),
        }
    }

    pub fn to_game(&self) -> CliResult<GameInstance> {
        match self {
            GameDto::Observable { qubits_a, qubits_b, u } => {
                Ok(GameInstance::from_observable(*qubits_a, *qubits_b, u.to_matrix()?)?)
            }
            GameDto::Povm { povm, qubits_a, qubits_b } => {
                if povm.is_empty() {
                    return Err(CliError::Input("empty povm list".into()));
                }
                let mut outcomes = Vec::with_capacity(povm.len());
                for entry in povm {
                    outcomes.push((entry.element.to_matrix()?, entry.utility));
                }
                let dim = outcomes[0].0.dim();
                if !dim.is_power_of_two() {
                    return Err(CliError::Input(format!(
                        "povm element dimension {dim} is not a power of two"
                    )));
                }
                let total = dim.trailing_zeros();
                let (qa, qb) = match (qubits_a, qubits_b) {
                    (Some(a), Some(b)) if a + b == total => (*a, *b),
                    (Some(a), Some(b)) => {
                        return Err(CliError::Input(format!(
                            "qubit split {a}+{b} does not match element dimension {dim}"
                        )));
                    }
                    (None, None) if total % 2 == 0 => (total / 2, total / 2),
                    (None, None) => {
                        return Err(CliError::Input(format!(
                            "povm on {total} qubits has no even split; give qubits_a and qubits_b"
                        )));
                    }
                    _ => {
                        return Err(CliError::Input(
                            "give both qubits_a and qubits_b, or neither".into(),
                        ));
                    }
                };
                let povm = Povm::new(outcomes)?;
                Ok(GameInstance::from_povm(&povm, qa, qb)?)
            }
        }
    }
}

/// One trace line. Field order is the wire order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecordDto {
    pub stage: u32,
    pub k: u64,
    pub gap: f64,
    pub psi_mu: Option<f64>,
    pub mu: f64,
    pub ns: u64,
}

impl TraceRecordDto {
    pub fn from_record(r: &TraceRecord) -> Self {
        TraceRecordDto { stage: r.stage, k: r.k, gap: r.gap, psi_mu: r.psi_mu, mu: r.mu, ns: r.ns }
    }
}

/// End-of-run digest written next to every trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryDto {
    pub terminal_gap: f64,
    pub iterations: u64,
    pub wall_ns: u64,
    pub fitted_slope: Option<f64>,
    pub fit_r2: Option<f64>,
    pub status: String,
    pub warnings: Vec<String>,
    pub terminal: JointStateDto,
}

impl SummaryDto {
    /// Digest a trace; the wall time is the last record's clock reading
    /// and the rate fit covers the trailing half when enough records
    /// exist.
    pub fn from_trace(g: &GameInstance, trace: &ConvergenceTrace) -> CliResult<Self> {
        let terminal_gap = g.duality_gap(&trace.terminal)?;
        let fit = qzs_core::solver::fit_linear_rate(trace, 0.5).ok();
        Ok(SummaryDto {
            terminal_gap,
            iterations: trace.total_first_order_iters,
            wall_ns: trace.records.last().map_or(0, |r| r.ns),
            fitted_slope: fit.map(|f| f.0),
            fit_r2: fit.map(|f| f.1),
            status: status_name(trace.status).to_string(),
            warnings: trace.warnings.clone(),
            terminal: JointStateDto::from_state(&trace.terminal),
        })
    }
}

pub fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "converged",
        SolveStatus::InnerCapExceeded => "inner_cap_exceeded",
        SolveStatus::OuterCapExceeded => "outer_cap_exceeded",
        SolveStatus::IterationCapExceeded => "iteration_cap_exceeded",
    }
}

/// SDP input file: weights and the map's Choi matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpInstanceDto {
    #[serde(rename = "A")]
    pub a: MatrixDto,
    #[serde(rename = "B")]
    pub b: MatrixDto,
    pub choi: MatrixDto,
}

impl SdpInstanceDto {
    pub fn from_instance(s: &SdpInstance) -> Self {
        SdpInstanceDto {
            a: MatrixDto::from_matrix(s.weight_a()),
            b: MatrixDto::from_matrix(s.weight_b()),
            choi: MatrixDto::from_matrix(s.choi()),
        }
    }

    pub fn to_instance(&self) -> CliResult<SdpInstance> {
        Ok(SdpInstance::new(self.a.to_matrix()?, self.b.to_matrix()?, self.choi.to_matrix()?)?)
    }
}

/// SDP output: the optimum estimate, its bracket, and the digest of the
/// underlying game solve; the full record stream goes to the trace file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpResultDto {
    pub opt_estimate: f64,
    pub interval_lo: f64,
    pub interval_hi: f64,
    pub xi: f64,
    pub game_value_estimate: f64,
    pub trace: SummaryDto,
}

impl SdpResultDto {
    pub fn from_result(g: &GameInstance, r: &SdpResult) -> CliResult<Self> {
        Ok(SdpResultDto {
            opt_estimate: r.opt_estimate,
            interval_lo: r.interval_lo,
            interval_hi: r.interval_hi,
            xi: r.xi,
            game_value_estimate: r.game_value_estimate,
            trace: SummaryDto::from_trace(g, &r.trace)?,
        })
    }
}

/// Which solver a command runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    IterSmooth,
    Ogda,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::IterSmooth => "itersmooth",
            Algo::Ogda => "ogda",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "itersmooth" => Ok(Algo::IterSmooth),
            "ogda" => Ok(Algo::Ogda),
            other => Err(format!("unknown algorithm {other:?} (itersmooth or ogda)")),
        }
    }
}

/// Everything needed to rerun a command bitwise-identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum ManifestDto {
    Gen { seed: u64, instance_path: String, config: GenConfigDto, output_paths: Vec<String> },
    Solve { seed: u64, instance_path: String, config: SolveConfigDto, output_paths: Vec<String> },
    Sdp { seed: u64, instance_path: String, config: SdpConfigDto, output_paths: Vec<String> },
}

/// Generator parameters; presets resolve to their table before the
/// manifest is written, so a rerun does not depend on preset names.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GenConfigDto {
    Povm { dim_a: usize, dim_b: usize, outcomes: usize },
    Classical { table: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfigDto {
    pub algo: Algo,
    pub eps: f64,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub max_iters: Option<u64>,
    pub timing: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpConfigDto {
    pub algo: Algo,
    pub eps: f64,
    pub timing: bool,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Json { path: path.display().to_string(), detail: e.to_string() })
}

/// Write a value as pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Json { path: path.display().to_string(), detail: e.to_string() })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Write trace records as JSONL, one compact object per line.
pub fn write_jsonl(path: &Path, records: &[TraceRecordDto]) -> CliResult<()> {
    let mut text = String::new();
    for record in records {
        let line = serde_json::to_string(record).map_err(|e| CliError::Json {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        text.push_str(&line);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_game(path: &Path) -> CliResult<GameInstance> {
    let dto: GameDto = read_json(path)?;
    dto.to_game()
}

pub fn write_game(path: &Path, g: &GameInstance) -> CliResult<()> {
    write_json(path, &GameDto::from_game(g))
}

/// Read a classical utility table: a JSON 2D array of numbers.
pub fn read_table(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    read_json(path)
}

//! Experiment reports and their CSV rendering.

use std::path::{Path, PathBuf};

use asym_core::experiments::Assertion;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ExperimentKind, RunConfig};
use crate::error::{CliError, CliResult};

pub const TOOL_NAME: &str = "asymtool";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool: String,
    pub tool_version: String,
    pub experiment: ExperimentKind,
    /// The validated config with every default filled in.
    pub config: RunConfig,
    pub generator: String,
    pub seed: u64,
    /// Flat records, one CSV row each.
    pub records: Vec<Value>,
    /// Experiment-level quantities that are not per-record.
    pub summary: Value,
    pub assertions: Vec<Assertion>,
    /// Seconds; the only field that differs between identical runs.
    pub wall_time_s: f64,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        asym_core::experiments::all_pass(&self.assertions)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> CliResult<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| CliError::Encode(e.to_string()))
    }
}

/// Fixed CSV columns of each experiment; each names a record key.
pub fn csv_header(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::NoBroadcast => &[
            "lambda",
            "marginal_disturbance",
            "output_coherence",
            "objective",
            "converged",
            "reduced_form_residual",
            "block_asymmetry",
        ],
        ExperimentKind::Tradeoff => &[
            "t",
            "ft_input",
            "ft_output",
            "irrev",
            "lhs",
            "rhs",
            "slack",
            "converged",
        ],
        ExperimentKind::Degradation => &["induced_covariant", "induced_witness", "irrev_lower_bound", "converged"],
        ExperimentKind::Nonadditivity => &[
            "construction",
            "measure",
            "f_joint",
            "f_marg_a",
            "f_marg_b_or_n_scaled",
            "n",
            "violated",
        ],
        ExperimentKind::Irrev => &["value", "fidelity", "converged", "restart_spread", "regularization"],
        ExperimentKind::Ki => &["block", "m", "k", "mean_weight"],
        ExperimentKind::Cloner => &[
            "d",
            "n",
            "trial",
            "c_n",
            "trace_error",
            "permutation_error",
            "marginal_error",
        ],
        ExperimentKind::Lemma8 => &["check", "trials", "max_violation"],
        ExperimentKind::Complementarity => &["channel", "identity_marginal", "identity_residual", "erasure_residual"],
    }
}

/// Floats in scientific notation with 17 significant digits, which
/// round-trips every `f64`; missing values are empty fields.
fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::Bool(b)) => b.to_string(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => {
            if let Some(i) = n.as_i64().filter(|_| !n.is_f64()) {
                i.to_string()
            } else if let Some(u) = n.as_u64().filter(|_| !n.is_f64()) {
                u.to_string()
            } else {
                format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN))
            }
        }
        Some(other) => other.to_string(),
    }
}

/// RFC 4180 CSV of the report's records, as a string.
pub fn render_csv(report: &ExperimentReport) -> CliResult<String> {
    let header = csv_header(report.experiment);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let enc = |e: csv::Error| CliError::Encode(e.to_string());
    w.write_record(header).map_err(enc)?;
    for r in &report.records {
        w.write_record(header.iter().map(|k| cell(r.get(*k)))).map_err(enc)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Encode(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Encode(e.to_string()))
}

pub fn emit_csv(report: &ExperimentReport, path: &Path) -> CliResult<()> {
    let text = render_csv(report)?;
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `<experiment>_report.json` and `<experiment>_records.csv` into `dir`.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> CliResult<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let name = report.experiment.name();
    let json_path = dir.join(format!("{name}_report.json"));
    let csv_path = dir.join(format!("{name}_records.csv"));
    std::fs::write(&json_path, report.to_json()?).map_err(|source| CliError::Io {
        path: json_path.clone(),
        source,
    })?;
    emit_csv(report, &csv_path)?;
    Ok((json_path, csv_path))
}

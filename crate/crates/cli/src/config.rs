//! Run configuration: strict JSON with per-experiment parameter blocks.
//!
//! ```json
//! {"schema_version": 1, "experiment": "tradeoff", "seed": 7, "params": {"t_grid": [0.5]}}
//! ```
//!
//! Relative input paths resolve against the directory of the config file.

use std::path::{Path, PathBuf};

use asym_core::experiments::{DegradationConfig, NoBroadcastConfig, NonadditivityConfig, TradeoffConfig};
use asym_core::ki::KI_TOL;
use asym_core::linalg::{hermitian_eig, Channel, ComplexMatrix, DensityMatrix, PureState, SystemSpec};
use asym_core::optimize::OptimizerConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    NoBroadcast,
    Tradeoff,
    Degradation,
    Nonadditivity,
    Irrev,
    Ki,
    Cloner,
    Lemma8,
    Complementarity,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::NoBroadcast,
        ExperimentKind::Tradeoff,
        ExperimentKind::Degradation,
        ExperimentKind::Nonadditivity,
        ExperimentKind::Irrev,
        ExperimentKind::Ki,
        ExperimentKind::Cloner,
        ExperimentKind::Lemma8,
        ExperimentKind::Complementarity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::NoBroadcast => "no_broadcast",
            ExperimentKind::Tradeoff => "tradeoff",
            ExperimentKind::Degradation => "degradation",
            ExperimentKind::Nonadditivity => "nonadditivity",
            ExperimentKind::Irrev => "irrev",
            ExperimentKind::Ki => "ki",
            ExperimentKind::Cloner => "cloner",
            ExperimentKind::Lemma8 => "lemma8",
            ExperimentKind::Complementarity => "complementarity",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoBroadcastParams {
    /// Defaults to `|+>`.
    pub state: Option<PathBuf>,
    /// Defaults to a qubit with `H = diag(0, 1)`.
    pub system_q: Option<PathBuf>,
    /// Defaults to `system_q`.
    pub system_s: Option<PathBuf>,
    pub optimizer: OptimizerConfig,
    pub coherence_tol: f64,
    pub orbit_samples: usize,
    pub ki_disturbance_tol: f64,
    pub block_symmetry_tol: f64,
    /// Levels of the clock used by the classical control.
    pub control_levels: usize,
}

impl Default for NoBroadcastParams {
    fn default() -> Self {
        let c = NoBroadcastConfig::default();
        Self {
            state: None,
            system_q: None,
            system_s: None,
            optimizer: c.optimizer,
            coherence_tol: c.coherence_tol,
            orbit_samples: c.orbit_samples,
            ki_disturbance_tol: c.ki_disturbance_tol,
            block_symmetry_tol: c.block_symmetry_tol,
            control_levels: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TradeoffParams {
    /// Defaults to `|+>`.
    pub state: Option<PathBuf>,
    /// Defaults to a qubit with `H = diag(0, 1)`.
    pub system_q: Option<PathBuf>,
    /// Defaults to `system_q`.
    pub system_s: Option<PathBuf>,
    pub optimizer: OptimizerConfig,
    pub t_grid: Vec<f64>,
    pub slack_tol: f64,
}

impl Default for TradeoffParams {
    fn default() -> Self {
        let c = TradeoffConfig::default();
        Self {
            state: None,
            system_q: None,
            system_s: None,
            optimizer: c.optimizer,
            t_grid: c.t_grid,
            slack_tol: c.slack_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegradationParams {
    pub state: Option<PathBuf>,
    /// System of both `Q` and the probe `S`.
    pub system: Option<PathBuf>,
    /// Partial-swap angle.
    pub theta: f64,
    pub degradation_tol: f64,
    pub covariance_tol: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for DegradationParams {
    fn default() -> Self {
        let c = DegradationConfig::default();
        Self {
            state: None,
            system: None,
            theta: std::f64::consts::FRAC_PI_4,
            degradation_tol: c.degradation_tol,
            covariance_tol: c.covariance_tol,
            optimizer: c.optimizer,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonadditivityParams {
    pub max_n: usize,
    pub t: f64,
}

impl Default for NonadditivityParams {
    fn default() -> Self {
        let c = NonadditivityConfig::default();
        Self { max_n: c.max_n, t: c.t }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IrrevParams {
    /// Defaults to `|+>`.
    pub state: Option<PathBuf>,
    /// Defaults to the maximally mixed state.
    pub target: Option<PathBuf>,
    pub system_from: Option<PathBuf>,
    pub system_to: Option<PathBuf>,
    pub optimizer: OptimizerConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KiParams {
    /// Explicit family; when empty the orbit of `orbit_state` is used.
    pub states: Vec<PathBuf>,
    pub labels: Vec<String>,
    pub orbit_state: Option<PathBuf>,
    pub system: Option<PathBuf>,
    pub orbit_samples: usize,
    pub tol: f64,
    pub ehrenfest_tol: f64,
}

impl Default for KiParams {
    fn default() -> Self {
        Self {
            states: Vec::new(),
            labels: Vec::new(),
            orbit_state: None,
            system: None,
            orbit_samples: 4,
            tol: KI_TOL,
            ehrenfest_tol: 1e-7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClonerParams {
    pub dims: Vec<usize>,
    pub max_n: usize,
    /// Random input states per `(d, n)`.
    pub states_per_case: usize,
    pub tol: f64,
}

impl Default for ClonerParams {
    fn default() -> Self {
        Self {
            dims: vec![2, 3],
            max_n: 4,
            states_per_case: 3,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma8Params {
    pub trials: usize,
    pub dims: Vec<usize>,
    pub monotonicity_trials: usize,
    pub monotonicity_dims: Vec<usize>,
    pub tol: f64,
}

impl Default for Lemma8Params {
    fn default() -> Self {
        Self {
            trials: 10_000,
            dims: vec![2, 3, 4],
            monotonicity_trials: 1000,
            monotonicity_dims: vec![2, 3],
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplementarityParams {
    /// Map `A -> S x A`; when absent a built-in pair of maps is checked.
    pub channel: Option<PathBuf>,
    pub tol: f64,
}

impl Default for ComplementarityParams {
    fn default() -> Self {
        Self {
            channel: None,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", content = "params", rename_all = "snake_case")]
pub enum ExperimentParams {
    NoBroadcast(NoBroadcastParams),
    Tradeoff(TradeoffParams),
    Degradation(DegradationParams),
    Nonadditivity(NonadditivityParams),
    Irrev(IrrevParams),
    Ki(KiParams),
    Cloner(ClonerParams),
    Lemma8(Lemma8Params),
    Complementarity(ComplementarityParams),
}

impl ExperimentParams {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            ExperimentParams::NoBroadcast(_) => ExperimentKind::NoBroadcast,
            ExperimentParams::Tradeoff(_) => ExperimentKind::Tradeoff,
            ExperimentParams::Degradation(_) => ExperimentKind::Degradation,
            ExperimentParams::Nonadditivity(_) => ExperimentKind::Nonadditivity,
            ExperimentParams::Irrev(_) => ExperimentKind::Irrev,
            ExperimentParams::Ki(_) => ExperimentKind::Ki,
            ExperimentParams::Cloner(_) => ExperimentKind::Cloner,
            ExperimentParams::Lemma8(_) => ExperimentKind::Lemma8,
            ExperimentParams::Complementarity(_) => ExperimentKind::Complementarity,
        }
    }

    pub fn defaults(kind: ExperimentKind) -> Self {
        match kind {
            ExperimentKind::NoBroadcast => ExperimentParams::NoBroadcast(Default::default()),
            ExperimentKind::Tradeoff => ExperimentParams::Tradeoff(Default::default()),
            ExperimentKind::Degradation => ExperimentParams::Degradation(Default::default()),
            ExperimentKind::Nonadditivity => ExperimentParams::Nonadditivity(Default::default()),
            ExperimentKind::Irrev => ExperimentParams::Irrev(Default::default()),
            ExperimentKind::Ki => ExperimentParams::Ki(Default::default()),
            ExperimentKind::Cloner => ExperimentParams::Cloner(Default::default()),
            ExperimentKind::Lemma8 => ExperimentParams::Lemma8(Default::default()),
            ExperimentKind::Complementarity => ExperimentParams::Complementarity(Default::default()),
        }
    }
}

/// Validated run configuration with every default filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u64,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    #[serde(flatten)]
    pub params: ExperimentParams,
    /// Directory that relative input paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u64,
    experiment: ExperimentKind,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    params: Option<serde_json::Value>,
}

/// Name between the first pair of backticks of a serde message.
fn quoted_field(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

fn parse_error(path: &Path, err: &serde_json::Error, prefix: Option<&str>) -> CliError {
    let message = err.to_string();
    let field = if message.contains("field `") {
        quoted_field(&message).map(|f| match prefix {
            Some(p) => format!("{p}.{f}"),
            None => f,
        })
    } else {
        prefix.map(str::to_string)
    };
    CliError::Parse {
        path: path.to_path_buf(),
        line: (err.line() > 0).then_some(err.line()),
        field,
        message: match prefix {
            Some(p) => format!("{p}: {message}"),
            None => message,
        },
    }
}

fn field_error(path: &Path, field: &str, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line: None,
        field: Some(field.to_string()),
        message: format!("{field}: {}", message.into()),
    }
}

fn typed_params<T: DeserializeOwned + Default>(path: &Path, raw: Option<serde_json::Value>) -> CliResult<T> {
    match raw {
        None => Ok(T::default()),
        Some(v) => serde_json::from_value(v).map_err(|e| parse_error(path, &e, Some("params"))),
    }
}

/// Parses, validates and fills the defaults of a config file, and checks
/// that every referenced input file exists and parses.
pub fn parse_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadInput {
        path: path.to_path_buf(),
        source,
    })?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, path, base_dir)
}

/// [`parse_config`] on in-memory text; `origin` names the source in errors.
pub fn parse_config_str(text: &str, origin: &Path, base_dir: PathBuf) -> CliResult<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| parse_error(origin, &e, None))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(CliError::SchemaVersionMismatch {
            path: origin.to_path_buf(),
            found: raw.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let p = raw.params;
    let params = match raw.experiment {
        ExperimentKind::NoBroadcast => ExperimentParams::NoBroadcast(typed_params(origin, p)?),
        ExperimentKind::Tradeoff => ExperimentParams::Tradeoff(typed_params(origin, p)?),
        ExperimentKind::Degradation => ExperimentParams::Degradation(typed_params(origin, p)?),
        ExperimentKind::Nonadditivity => ExperimentParams::Nonadditivity(typed_params(origin, p)?),
        ExperimentKind::Irrev => ExperimentParams::Irrev(typed_params(origin, p)?),
        ExperimentKind::Ki => ExperimentParams::Ki(typed_params(origin, p)?),
        ExperimentKind::Cloner => ExperimentParams::Cloner(typed_params(origin, p)?),
        ExperimentKind::Lemma8 => ExperimentParams::Lemma8(typed_params(origin, p)?),
        ExperimentKind::Complementarity => ExperimentParams::Complementarity(typed_params(origin, p)?),
    };
    let cfg = RunConfig {
        schema_version: raw.schema_version,
        seed: raw.seed,
        output_dir: raw.output_dir,
        params,
        base_dir,
    };
    validate(&cfg, origin)?;
    Ok(cfg)
}

fn positive(origin: &Path, field: &str, x: f64) -> CliResult<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(field_error(
            origin,
            field,
            format!("must be a positive finite number, got {x}"),
        ))
    }
}

fn nonzero(origin: &Path, field: &str, n: usize) -> CliResult<()> {
    if n == 0 {
        Err(field_error(origin, field, "must be at least 1"))
    } else {
        Ok(())
    }
}

fn check_optimizer(origin: &Path, opt: &OptimizerConfig) -> CliResult<()> {
    positive(origin, "params.optimizer.tol", opt.tol)?;
    nonzero(origin, "params.optimizer.max_iter", opt.max_iter)?;
    nonzero(origin, "params.optimizer.restarts", opt.restarts)?;
    if !opt.t.is_finite() {
        return Err(field_error(origin, "params.optimizer.t", "must be finite"));
    }
    if opt.lambda_schedule.is_empty() {
        return Err(field_error(
            origin,
            "params.optimizer.lambda_schedule",
            "must not be empty",
        ));
    }
    if opt.lambda_schedule.iter().any(|l| !(l.is_finite() && *l >= 0.0))
        || opt.lambda_schedule.windows(2).any(|w| w[1] < w[0])
    {
        return Err(field_error(
            origin,
            "params.optimizer.lambda_schedule",
            "must be nondecreasing, finite and nonnegative",
        ));
    }
    Ok(())
}

fn check_dims(origin: &Path, field: &str, dims: &[usize]) -> CliResult<()> {
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(field_error(origin, field, "must be a nonempty list of dimensions >= 2"));
    }
    Ok(())
}

fn validate(cfg: &RunConfig, origin: &Path) -> CliResult<()> {
    match &cfg.params {
        ExperimentParams::NoBroadcast(p) => {
            check_optimizer(origin, &p.optimizer)?;
            positive(origin, "params.coherence_tol", p.coherence_tol)?;
            positive(origin, "params.ki_disturbance_tol", p.ki_disturbance_tol)?;
            positive(origin, "params.block_symmetry_tol", p.block_symmetry_tol)?;
            if p.orbit_samples < 2 {
                return Err(field_error(origin, "params.orbit_samples", "must be at least 2"));
            }
            if p.control_levels < 2 {
                return Err(field_error(origin, "params.control_levels", "must be at least 2"));
            }
            Inputs::broadcast(cfg, &p.state, &p.system_q, &p.system_s)?;
        }
        ExperimentParams::Tradeoff(p) => {
            check_optimizer(origin, &p.optimizer)?;
            positive(origin, "params.slack_tol", p.slack_tol)?;
            if p.t_grid.is_empty() || p.t_grid.iter().any(|t| !t.is_finite()) {
                return Err(field_error(
                    origin,
                    "params.t_grid",
                    "must be a nonempty list of finite times",
                ));
            }
            let (state, _, _) = Inputs::broadcast(cfg, &p.state, &p.system_q, &p.system_s)?;
            pure_from(&state).ok_or_else(|| field_error(origin, "params.state", "must be a pure state"))?;
        }
        ExperimentParams::Degradation(p) => {
            check_optimizer(origin, &p.optimizer)?;
            positive(origin, "params.degradation_tol", p.degradation_tol)?;
            positive(origin, "params.covariance_tol", p.covariance_tol)?;
            if !p.theta.is_finite() {
                return Err(field_error(origin, "params.theta", "must be finite"));
            }
            let state = Inputs::state_or_plus(cfg, p.state.as_deref(), "params.state")?;
            let sys = Inputs::system_or_qubit(cfg, p.system.as_deref(), "params.system")?;
            Inputs::same_dim(origin, "params.state", state.dim(), sys.dim())?;
        }
        ExperimentParams::Nonadditivity(p) => {
            nonzero(origin, "params.max_n", p.max_n)?;
            if !p.t.is_finite() {
                return Err(field_error(origin, "params.t", "must be finite"));
            }
        }
        ExperimentParams::Irrev(p) => {
            check_optimizer(origin, &p.optimizer)?;
            Inputs::irrev(cfg, p)?;
        }
        ExperimentParams::Ki(p) => {
            positive(origin, "params.tol", p.tol)?;
            positive(origin, "params.ehrenfest_tol", p.ehrenfest_tol)?;
            if !p.labels.is_empty() && p.labels.len() != p.states.len() {
                return Err(field_error(
                    origin,
                    "params.labels",
                    "must match params.states in length",
                ));
            }
            if p.states.is_empty() && p.orbit_samples < 2 {
                return Err(field_error(origin, "params.orbit_samples", "must be at least 2"));
            }
            for (k, s) in p.states.iter().enumerate() {
                Inputs::state(cfg, s, &format!("params.states[{k}]"))?;
            }
            if p.states.is_empty() {
                let state = Inputs::state_or_plus(cfg, p.orbit_state.as_deref(), "params.orbit_state")?;
                let sys = Inputs::system_or_qubit(cfg, p.system.as_deref(), "params.system")?;
                Inputs::same_dim(origin, "params.orbit_state", state.dim(), sys.dim())?;
            }
        }
        ExperimentParams::Cloner(p) => {
            check_dims(origin, "params.dims", &p.dims)?;
            nonzero(origin, "params.max_n", p.max_n)?;
            nonzero(origin, "params.states_per_case", p.states_per_case)?;
            positive(origin, "params.tol", p.tol)?;
        }
        ExperimentParams::Lemma8(p) => {
            nonzero(origin, "params.trials", p.trials)?;
            nonzero(origin, "params.monotonicity_trials", p.monotonicity_trials)?;
            check_dims(origin, "params.dims", &p.dims)?;
            check_dims(origin, "params.monotonicity_dims", &p.monotonicity_dims)?;
            positive(origin, "params.tol", p.tol)?;
        }
        ExperimentParams::Complementarity(p) => {
            positive(origin, "params.tol", p.tol)?;
            if let Some(c) = &p.channel {
                Inputs::channel(cfg, c, "params.channel")?;
            }
        }
    }
    Ok(())
}

/// `|psi>` when `rho` is pure to within `1e-9`.
pub(crate) fn pure_from(rho: &DensityMatrix) -> Option<PureState> {
    if (rho.purity() - 1.0).abs() > 1e-9 {
        return None;
    }
    let eig = hermitian_eig(rho.as_matrix()).ok()?;
    PureState::normalized(eig.vectors.column(rho.dim() - 1)).ok()
}

/// Loaders for the files a config references.
pub(crate) struct Inputs;

impl Inputs {
    fn resolve(cfg: &RunConfig, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            cfg.base_dir.join(p)
        }
    }

    fn load<T: DeserializeOwned>(cfg: &RunConfig, p: &Path, field: &str) -> CliResult<T> {
        let path = Self::resolve(cfg, p);
        let text = std::fs::read_to_string(&path).map_err(|source| CliError::ReadInput {
            path: path.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| {
            let mut err = parse_error(&path, &e, None);
            if let CliError::Parse { field: f, message, .. } = &mut err {
                *f = Some(field.to_string());
                *message = format!("{field}: {message}");
            }
            err
        })
    }

    /// State file: a density matrix or a column vector.
    pub(crate) fn state(cfg: &RunConfig, p: &Path, field: &str) -> CliResult<DensityMatrix> {
        let m: ComplexMatrix = Self::load(cfg, p, field)?;
        let origin = Self::resolve(cfg, p);
        if m.cols() == 1 {
            PureState::normalized(m.column(0))
                .map(|s| s.to_density())
                .map_err(|e| field_error(&origin, field, e.to_string()))
        } else {
            DensityMatrix::new(m).map_err(|e| field_error(&origin, field, e.to_string()))
        }
    }

    pub(crate) fn state_or_plus(cfg: &RunConfig, p: Option<&Path>, field: &str) -> CliResult<DensityMatrix> {
        match p {
            Some(p) => Self::state(cfg, p, field),
            None => Ok(PureState::plus().to_density()),
        }
    }

    pub(crate) fn system_or_qubit(cfg: &RunConfig, p: Option<&Path>, field: &str) -> CliResult<SystemSpec> {
        match p {
            Some(p) => Self::load(cfg, p, field),
            None => Ok(SystemSpec::ladder(2)),
        }
    }

    pub(crate) fn channel(cfg: &RunConfig, p: &Path, field: &str) -> CliResult<Channel> {
        Self::load(cfg, p, field)
    }

    fn same_dim(origin: &Path, field: &str, state: usize, sys: usize) -> CliResult<()> {
        if state != sys {
            return Err(field_error(
                origin,
                field,
                format!("{state}-dimensional state on a {sys}-dimensional system"),
            ));
        }
        Ok(())
    }

    /// `(rho_Q, system_Q, system_S')` of a broadcast experiment.
    pub(crate) fn broadcast(
        cfg: &RunConfig,
        state: &Option<PathBuf>,
        system_q: &Option<PathBuf>,
        system_s: &Option<PathBuf>,
    ) -> CliResult<(DensityMatrix, SystemSpec, SystemSpec)> {
        let state = Self::state_or_plus(cfg, state.as_deref(), "params.state")?;
        let q = Self::system_or_qubit(cfg, system_q.as_deref(), "params.system_q")?;
        let s = match system_s {
            Some(p) => Self::load(cfg, p, "params.system_s")?,
            None => q.clone(),
        };
        Self::same_dim(&cfg.base_dir, "params.state", state.dim(), q.dim())?;
        Ok((state, q, s))
    }

    /// `(rho, sigma, from, to)` of an irreversibility run.
    pub(crate) fn irrev(
        cfg: &RunConfig,
        p: &IrrevParams,
    ) -> CliResult<(DensityMatrix, DensityMatrix, SystemSpec, SystemSpec)> {
        let rho = Self::state_or_plus(cfg, p.state.as_deref(), "params.state")?;
        let to = Self::system_or_qubit(cfg, p.system_to.as_deref(), "params.system_to")?;
        let from = match &p.system_from {
            Some(f) => Self::load(cfg, f, "params.system_from")?,
            None => to.clone(),
        };
        let sigma = match &p.target {
            Some(t) => Self::state(cfg, t, "params.target")?,
            None => DensityMatrix::maximally_mixed(from.dim()),
        };
        Self::same_dim(&cfg.base_dir, "params.state", rho.dim(), to.dim())?;
        Self::same_dim(&cfg.base_dir, "params.target", sigma.dim(), from.dim())?;
        Ok((rho, sigma, from, to))
    }
}

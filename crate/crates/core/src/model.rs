//! Scenario description: tasks, fleet and radio parameters, technology masks
//! and the per-task traffic split.
//!
//! Scenarios are loaded from a small TOML document (see [`load_scenario`]) or
//! built from one of the three named presets (`default`, `light`, `heavy`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of offloading paths tracked per task.
pub const N_TECH: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema violation at `{key}`: {msg}")]
    Schema { key: String, msg: String },
    #[error("invalid value for `{0}`")]
    InvalidValue(String),
}

/// One offloading path.
///
/// RmmW has no slot of its own: it rides in the `Cv2v` slot when the
/// scenario's `rmmw_control` flag is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TechKind {
    Dsrc = 0,
    Cv2i = 1,
    Cv2v = 2,
    Cmmw = 3,
    Local = 4,
}

impl TechKind {
    pub const ALL: [TechKind; N_TECH] = [
        TechKind::Dsrc,
        TechKind::Cv2i,
        TechKind::Cv2v,
        TechKind::Cmmw,
        TechKind::Local,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<TechKind> {
        TechKind::ALL.get(idx).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            TechKind::Dsrc => "DSRC",
            TechKind::Cv2i => "CV2I",
            TechKind::Cv2v => "CV2V",
            TechKind::Cmmw => "CMMW",
            TechKind::Local => "LOCAL",
        }
    }

    /// Paths that end on a vehicle's on-board processor.
    pub fn is_on_board(self) -> bool {
        !matches!(self, TechKind::Cv2i)
    }
}

impl fmt::Display for TechKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TechKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "").as_str() {
            "DSRC" => Ok(TechKind::Dsrc),
            "CV2I" | "V2I" => Ok(TechKind::Cv2i),
            "CV2V" => Ok(TechKind::Cv2v),
            "CMMW" | "MMW" => Ok(TechKind::Cmmw),
            "LOCAL" => Ok(TechKind::Local),
            _ => Err(ConfigError::Schema {
                key: "tech_mask".into(),
                msg: format!("unknown technology `{s}`"),
            }),
        }
    }
}

/// Set of available technologies. Always contains `Local` when built through
/// the public constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TechMask(u8);

impl TechMask {
    pub const FULL: TechMask = TechMask(0b1_1111);

    pub fn local_only() -> Self {
        TechMask(1 << TechKind::Local.index())
    }

    /// Builds a mask from the given technologies; `Local` is always added.
    pub fn from_techs(techs: &[TechKind]) -> Self {
        let mut m = Self::local_only();
        for t in techs {
            m.0 |= 1 << t.index();
        }
        m
    }

    /// Raw mask with no implicit `Local`; used to represent invalid input.
    pub fn from_bits(bits: u8) -> Self {
        TechMask(bits & 0b1_1111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn contains(self, t: TechKind) -> bool {
        self.0 & (1 << t.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Members in stable `TechKind` order.
    pub fn iter(self) -> impl Iterator<Item = TechKind> {
        TechKind::ALL.into_iter().filter(move |t| self.contains(*t))
    }

    pub fn names(self) -> Vec<String> {
        self.iter().map(|t| t.name().to_string()).collect()
    }
}

/// One task category.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub index: usize,
    /// Envelope arrival rate, Mbps.
    pub arrival_rate: f64,
    /// Burstiness, Mb.
    pub burstiness: f64,
    /// Deadline, seconds.
    pub t_max: f64,
    pub priority: f64,
    pub complexity: f64,
    /// Licensed-spectrum fee per Mb.
    pub fee_cv2x: f64,
    /// VEC-pool compute fee per Mb.
    pub fee_infra: f64,
    /// On-board compute fee per Mb.
    pub fee_veh: f64,
}

impl TaskSpec {
    pub fn new(index: usize, arrival_rate: f64, burstiness: f64, t_max: f64) -> Self {
        TaskSpec {
            index,
            arrival_rate,
            burstiness,
            t_max,
            priority: 1.0,
            complexity: 1.0,
            fee_cv2x: 1.0,
            fee_infra: 1.0,
            fee_veh: 1.0,
        }
    }

    /// Cumulative traffic volume over `horizon` seconds: `λ·horizon + o`.
    #[inline]
    pub fn volume(&self, horizon: f64) -> f64 {
        self.arrival_rate * horizon + self.burstiness
    }
}

/// 802.11p back-off parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsrcMacParams {
    pub w0: f64,
    pub backoff_threshold: u32,
    pub retry_limit: u32,
    pub collision_prob: f64,
}

impl Default for DsrcMacParams {
    fn default() -> Self {
        DsrcMacParams {
            w0: 16.0,
            backoff_threshold: 5,
            retry_limit: 7,
            collision_prob: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub tasks: Vec<TaskSpec>,
    pub n_vehicles: u32,
    /// On-board compute capacity, Mbps.
    pub theta_veh: f64,
    /// VEC-pool compute capacity, Mbps.
    pub theta_epc: f64,
    pub r_dsrc: f64,
    /// Total licensed C-V2X bandwidth, Mbps.
    pub r_cv2x: f64,
    /// RTS/CTS control-traffic burstiness for RmmW, Mb.
    pub rts_burstiness: f64,
    /// Chernoff parameter.
    pub theta: f64,
    pub mac: DsrcMacParams,
    pub tech_mask: TechMask,
    /// Cost-accounting period, seconds.
    pub horizon: f64,
    /// The `Cv2v` slot carries RmmW traffic and pays the control-channel term.
    pub rmmw_control: bool,
    /// Overrides the closed-form DSRC access overhead (Mb) when set.
    pub dsrc_access_overhead_mb: Option<f64>,
}

impl ScenarioConfig {
    #[inline]
    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    /// Copy of this scenario restricted to `mask`.
    pub fn with_mask(&self, mask: TechMask, rmmw_control: bool) -> ScenarioConfig {
        let mut s = self.clone();
        s.tech_mask = mask;
        s.rmmw_control = rmmw_control;
        s
    }
}

/// Builds one of the named presets: `default`, `light` or `heavy`.
pub fn default_scenario(name: &str) -> Result<ScenarioConfig, ConfigError> {
    let (lambda, burst, t_max): ([f64; 5], [f64; 5], [f64; 5]) = match name {
        "default" => (
            [20.0, 70.0, 30.0, 80.0, 8.0],
            [60.0, 400.0, 90.0, 380.0, 10.0],
            [2.0, 6.0, 2.5, 3.0, 1.0],
        ),
        "light" => ([5.0; 5], [2.0; 5], [1.0; 5]),
        "heavy" => ([100.0; 5], [50.0; 5], [1.0; 5]),
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    };
    let tasks = (0..5)
        .map(|i| TaskSpec::new(i, lambda[i], burst[i], t_max[i]))
        .collect();
    Ok(ScenarioConfig {
        tasks,
        n_vehicles: 5,
        theta_veh: 1e3,
        theta_epc: 1e4,
        r_dsrc: 1e3,
        r_cv2x: 1e4,
        rts_burstiness: 0.0,
        theta: 1.0,
        mac: DsrcMacParams::default(),
        tech_mask: TechMask::FULL,
        horizon: 1.0,
        rmmw_control: false,
        dsrc_access_overhead_mb: None,
    })
}

/// One invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rule)
    }
}

fn positive_finite(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn nonneg_finite(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

pub fn validate(s: &ScenarioConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |field: &str, rule: String| {
        out.push(Violation {
            field: field.to_string(),
            rule,
        })
    };

    if s.tasks.is_empty() {
        push("tasks", "tasks empty".into());
    }
    for (i, t) in s.tasks.iter().enumerate() {
        if t.index != i {
            push("task.index", format!("task {i} has index {}", t.index));
        }
        if !positive_finite(t.arrival_rate) {
            push("lambda", format!("task {i}: lambda must be > 0"));
        }
        if !nonneg_finite(t.burstiness) {
            push("burstiness", format!("task {i}: burstiness must be >= 0"));
        }
        if !positive_finite(t.t_max) {
            push("t_max", format!("task {i}: t_max must be > 0"));
        }
        if !nonneg_finite(t.priority) {
            push("priority", format!("task {i}: priority must be >= 0"));
        }
        if !positive_finite(t.complexity) {
            push("complexity", format!("task {i}: complexity must be > 0"));
        }
        for (name, fee) in [
            ("fee_cv2x", t.fee_cv2x),
            ("fee_infra", t.fee_infra),
            ("fee_veh", t.fee_veh),
        ] {
            if !nonneg_finite(fee) {
                push(name, format!("task {i}: {name} must be >= 0"));
            }
        }
    }
    if s.n_vehicles < 1 {
        push("n_vehicles", "n_vehicles must be >= 1".into());
    }
    if !positive_finite(s.theta_veh) {
        push("theta_veh", "theta_veh must be > 0".into());
    }
    if !positive_finite(s.theta_epc) {
        push("theta_epc", "theta_epc must be > 0".into());
    }
    if s.theta_epc < s.theta_veh {
        push("theta_epc", "theta_epc < theta_veh".into());
    }
    if !positive_finite(s.r_dsrc) {
        push("r_dsrc", "r_dsrc must be > 0".into());
    }
    if !positive_finite(s.r_cv2x) {
        push("r_cv2x", "r_cv2x must be > 0".into());
    }
    if !nonneg_finite(s.rts_burstiness) {
        push("rts_burstiness", "rts_burstiness must be >= 0".into());
    }
    if !positive_finite(s.theta) {
        push("theta", "theta must be > 0".into());
    }
    if !positive_finite(s.horizon) {
        push("horizon", "horizon must be > 0".into());
    }
    if !s.tech_mask.contains(TechKind::Local) {
        push("tech_mask", "tech_mask must contain LOCAL".into());
    }
    if !(s.mac.w0.is_finite() && s.mac.w0 >= 1.0) {
        push("mac.w0", "w0 must be >= 1".into());
    }
    if s.mac.backoff_threshold < 1 {
        push("mac.backoff_threshold", "backoff_threshold must be >= 1".into());
    }
    if s.mac.retry_limit < s.mac.backoff_threshold {
        push("mac.retry_limit", "retry_limit < backoff_threshold".into());
    }
    if !(0.0..=1.0).contains(&s.mac.collision_prob) {
        push("mac.collision_prob", "collision_prob must lie in [0, 1]".into());
    }
    if let Some(x) = s.dsrc_access_overhead_mb {
        if !nonneg_finite(x) {
            push("dsrc_access_overhead_mb", "dsrc_access_overhead_mb must be >= 0".into());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Scenario file format
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    n_vehicles: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_veh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_epc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_dsrc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_cv2x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rts_burstiness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tech_mask: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rmmw_control: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dsrc_access_overhead_mb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mac: Option<MacSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    task: Option<Vec<TaskSection>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MacSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    w0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    backoff_threshold: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    retry_limit: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    collision_prob: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskSection {
    lambda: f64,
    burstiness: f64,
    t_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    priority: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    complexity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fee_cv2x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fee_infra: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fee_veh: Option<f64>,
}

/// Error key from a toml deserialization error, e.g. `mac.w0` or `task`.
fn toml_error(e: toml::de::Error) -> ConfigError {
    let msg = e.message().to_string();
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        let key = rest.split('`').next().unwrap_or_default().to_string();
        return ConfigError::Schema { key, msg };
    }
    if let Some(rest) = msg.strip_prefix("missing field `") {
        let key = rest.split('`').next().unwrap_or_default().to_string();
        return ConfigError::Schema { key, msg };
    }
    ConfigError::Parse(e.to_string())
}

/// Parses and validates a scenario document. Keys missing from the
/// document keep the values of the `default` preset; a document with
/// `[[task]]` sections replaces the preset task list entirely.
pub fn load_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let s = parse_scenario_unchecked(text)?;
    if let Some(v) = validate(&s).into_iter().next() {
        return Err(ConfigError::InvalidValue(v.field));
    }
    Ok(s)
}

/// Like [`load_scenario`] but skips the invariant checks, so callers can
/// report every [`Violation`] at once.
pub fn parse_scenario_unchecked(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let file: ScenarioFile = toml::from_str(text).map_err(toml_error)?;
    let mut s = default_scenario("default")?;

    if let Some(v) = file.n_vehicles {
        s.n_vehicles = v;
    }
    macro_rules! take {
        ($($field:ident),*) => {
            $( if let Some(v) = file.$field { s.$field = v; } )*
        };
    }
    take!(theta_veh, theta_epc, r_dsrc, r_cv2x, theta, horizon, rts_burstiness, rmmw_control);
    if file.dsrc_access_overhead_mb.is_some() {
        s.dsrc_access_overhead_mb = file.dsrc_access_overhead_mb;
    }
    if let Some(names) = file.tech_mask {
        let mut bits = 0u8;
        for n in &names {
            bits |= 1 << n.parse::<TechKind>()?.index();
        }
        s.tech_mask = TechMask::from_bits(bits);
    }
    if let Some(mac) = file.mac {
        if let Some(v) = mac.w0 {
            s.mac.w0 = v;
        }
        if let Some(v) = mac.backoff_threshold {
            s.mac.backoff_threshold = v;
        }
        if let Some(v) = mac.retry_limit {
            s.mac.retry_limit = v;
        }
        if let Some(v) = mac.collision_prob {
            s.mac.collision_prob = v;
        }
    }
    if let Some(tasks) = file.task {
        s.tasks = tasks
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let mut spec = TaskSpec::new(i, t.lambda, t.burstiness, t.t_max);
                spec.priority = t.priority.unwrap_or(spec.priority);
                spec.complexity = t.complexity.unwrap_or(spec.complexity);
                spec.fee_cv2x = t.fee_cv2x.unwrap_or(spec.fee_cv2x);
                spec.fee_infra = t.fee_infra.unwrap_or(spec.fee_infra);
                spec.fee_veh = t.fee_veh.unwrap_or(spec.fee_veh);
                spec
            })
            .collect();
    }
    Ok(s)
}

/// Writes every field of `s` in the scenario file schema.
pub fn scenario_to_toml(s: &ScenarioConfig) -> String {
    let file = ScenarioFile {
        n_vehicles: Some(s.n_vehicles),
        theta_veh: Some(s.theta_veh),
        theta_epc: Some(s.theta_epc),
        r_dsrc: Some(s.r_dsrc),
        r_cv2x: Some(s.r_cv2x),
        theta: Some(s.theta),
        horizon: Some(s.horizon),
        rts_burstiness: Some(s.rts_burstiness),
        tech_mask: Some(s.tech_mask.names()),
        rmmw_control: Some(s.rmmw_control),
        dsrc_access_overhead_mb: s.dsrc_access_overhead_mb,
        mac: Some(MacSection {
            w0: Some(s.mac.w0),
            backoff_threshold: Some(s.mac.backoff_threshold),
            retry_limit: Some(s.mac.retry_limit),
            collision_prob: Some(s.mac.collision_prob),
        }),
        task: Some(
            s.tasks
                .iter()
                .map(|t| TaskSection {
                    lambda: t.arrival_rate,
                    burstiness: t.burstiness,
                    t_max: t.t_max,
                    priority: Some(t.priority),
                    complexity: Some(t.complexity),
                    fee_cv2x: Some(t.fee_cv2x),
                    fee_infra: Some(t.fee_infra),
                    fee_veh: Some(t.fee_veh),
                })
                .collect(),
        ),
    };
    toml::to_string(&file).expect("scenario serialization is infallible")
}

// ---------------------------------------------------------------------------
// Framework presets
// ---------------------------------------------------------------------------

/// Heterogeneous deployments compared in the framework experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Framework {
    Cv2xDsrcCmmw,
    DsrcCmmw,
    Cv2xRmmw,
    Cv2xDsrc,
}

impl Framework {
    pub const ALL: [Framework; 4] = [
        Framework::Cv2xDsrcCmmw,
        Framework::DsrcCmmw,
        Framework::Cv2xRmmw,
        Framework::Cv2xDsrc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Framework::Cv2xDsrcCmmw => "CV2X-DSRC-CMMW",
            Framework::DsrcCmmw => "DSRC-CMMW",
            Framework::Cv2xRmmw => "CV2X-RMMW",
            Framework::Cv2xDsrc => "CV2X-DSRC",
        }
    }

    pub fn mask(self) -> TechMask {
        use TechKind::*;
        match self {
            Framework::Cv2xDsrcCmmw => TechMask::from_techs(&[Cv2i, Cv2v, Dsrc, Cmmw]),
            Framework::DsrcCmmw => TechMask::from_techs(&[Dsrc, Cmmw]),
            Framework::Cv2xRmmw => TechMask::from_techs(&[Cv2i, Cv2v]),
            Framework::Cv2xDsrc => TechMask::from_techs(&[Cv2i, Cv2v, Dsrc]),
        }
    }

    pub fn rmmw_control(self) -> bool {
        matches!(self, Framework::Cv2xRmmw)
    }

    pub fn apply(self, s: &ScenarioConfig) -> ScenarioConfig {
        s.with_mask(self.mask(), self.rmmw_control())
    }
}

impl FromStr for Framework {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let up = s.to_ascii_uppercase();
        Framework::ALL
            .into_iter()
            .find(|f| f.name() == up)
            .ok_or_else(|| ConfigError::Schema {
                key: "mask".into(),
                msg: format!("unknown framework `{s}`"),
            })
    }
}

// ---------------------------------------------------------------------------
// Allocation
// ---------------------------------------------------------------------------

/// Per-task traffic split: row `i` holds the fraction of task `i` sent over
/// each technology, indexed by `TechKind`.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    rows: Vec<[f64; N_TECH]>,
}

impl Allocation {
    pub fn from_rows(rows: Vec<[f64; N_TECH]>) -> Self {
        Allocation { rows }
    }

    pub fn zeros(n_tasks: usize) -> Self {
        Allocation {
            rows: vec![[0.0; N_TECH]; n_tasks],
        }
    }

    /// Every task processed on board.
    pub fn all_local(n_tasks: usize) -> Self {
        Self::pure(n_tasks, TechKind::Local)
    }

    pub fn pure(n_tasks: usize, tech: TechKind) -> Self {
        let mut a = Self::zeros(n_tasks);
        for row in &mut a.rows {
            row[tech.index()] = 1.0;
        }
        a
    }

    /// Equal shares across the masked technologies.
    pub fn uniform(n_tasks: usize, mask: TechMask) -> Self {
        let share = 1.0 / mask.len() as f64;
        let mut a = Self::zeros(n_tasks);
        for row in &mut a.rows {
            for t in mask.iter() {
                row[t.index()] = share;
            }
        }
        a
    }

    /// Builds an allocation from integer percentages.
    pub fn from_percent(pct: &[[u8; N_TECH]]) -> Self {
        Allocation {
            rows: pct
                .iter()
                .map(|r| r.map(|p| f64::from(p) / 100.0))
                .collect(),
        }
    }

    #[inline]
    pub fn n_tasks(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn get(&self, task: usize, tech: TechKind) -> f64 {
        self.rows[task][tech.index()]
    }

    #[inline]
    pub fn set(&mut self, task: usize, tech: TechKind, value: f64) {
        self.rows[task][tech.index()] = value;
    }

    #[inline]
    pub fn row(&self, task: usize) -> &[f64; N_TECH] {
        &self.rows[task]
    }

    pub fn rows(&self) -> &[[f64; N_TECH]] {
        &self.rows
    }

    /// Column sum `Σ_j ρ^tech_j · weight(j)`.
    #[inline]
    pub fn weighted_sum(&self, tech: TechKind, weight: impl Fn(usize) -> f64) -> f64 {
        self.rows
            .iter()
            .enumerate()
            .map(|(j, r)| r[tech.index()] * weight(j))
            .sum()
    }

    /// Rows on the unit simplex (±1e-9), entries in [0, 1], zero outside
    /// `mask`.
    pub fn is_valid(&self, mask: TechMask) -> bool {
        self.rows.iter().all(|r| {
            let sum: f64 = r.iter().sum();
            (sum - 1.0).abs() <= 1e-9
                && TechKind::ALL.iter().all(|t| {
                    let v = r[t.index()];
                    (0.0..=1.0).contains(&v) && (mask.contains(*t) || v == 0.0)
                })
        })
    }

    /// Rounds non-local shares down to the 0.01 grid and gives the residual
    /// to `Local`.
    pub fn snap_to_grid(&self) -> Allocation {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut pct = [0u8; N_TECH];
                let mut used = 0u32;
                for t in TechKind::ALL {
                    if t == TechKind::Local {
                        continue;
                    }
                    // Small tolerance so 0.29999999 snaps to 30, not 29.
                    let p = (r[t.index()] * 100.0 + 1e-7).floor().clamp(0.0, 100.0) as u32;
                    let p = p.min(100 - used);
                    pct[t.index()] = p as u8;
                    used += p;
                }
                pct[TechKind::Local.index()] = (100 - used) as u8;
                pct
            })
            .collect::<Vec<_>>();
        Allocation::from_percent(&rows)
    }
}

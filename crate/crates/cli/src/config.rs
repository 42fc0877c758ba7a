use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Validation failure tied to a dotted config path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub initial_data: InitialData,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kernel: KernelConfig::default(),
            initial_data: InitialData::default(),
            time: TimeConfig::default(),
            experiment: ExperimentConfig::default(),
            output: default_output(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    /// `blob`, `alpha`, `exact`, or the path of a tabulated profile CSV.
    pub name: String,
    pub epsilon: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            name: "blob".into(),
            epsilon: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchLayout {
    Lattice,
    Polar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Points {
        positions: Vec<[f64; 2]>,
        circulations: Vec<f64>,
    },
    /// `x,y,gamma` CSV.
    File { path: PathBuf },
    /// Uniform-vorticity disk.
    Patch {
        center: [f64; 2],
        radius: f64,
        omega: f64,
        #[serde(default = "default_layout")]
        layout: PatchLayout,
        /// Lattice cell size.
        #[serde(default = "default_spacing")]
        spacing: f64,
        #[serde(default = "default_rings")]
        rings: usize,
        #[serde(default = "default_per_ring")]
        per_ring: usize,
    },
    /// Straight sheet from `start` to `end`; `elliptic` loads it with
    /// `strength · √(1 − s²)`, `s ∈ [−1, 1]`.
    Sheet {
        start: [f64; 2],
        end: [f64; 2],
        strength: f64,
        n: usize,
        #[serde(default)]
        elliptic: bool,
    },
}

fn default_layout() -> PatchLayout {
    PatchLayout::Lattice
}
fn default_spacing() -> f64 {
    0.1
}
fn default_rings() -> usize {
    4
}
fn default_per_ring() -> usize {
    64
}

impl Default for InitialData {
    /// Co-rotating pair, unit separation, `Γ = 2π` each.
    fn default() -> Self {
        let g = 2.0 * std::f64::consts::PI;
        InitialData::Points {
            positions: vec![[0.5, 0.0], [-0.5, 0.0]],
            circulations: vec![g, g],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            t_end: 1.0,
            dt: 1e-3,
            sample_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TracerConfig {
    pub center: [f64; 2],
    pub radius: f64,
    pub count: usize,
}

impl Default for TracerConfig {
    fn default() -> Self {
        TracerConfig {
            center: [0.0, 0.0],
            radius: 2.0,
            count: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Filled in from the subcommand.
    pub kind: Option<String>,
    pub eps_list: Vec<f64>,
    pub reference: String,
    pub check_dt: bool,
    pub tracers: TracerConfig,
    pub n_max: usize,
    pub tol: f64,
    pub pairs: usize,
    pub radial_samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: None,
            eps_list: vec![0.4, 0.2, 0.1],
            reference: "analytic_radial".into(),
            check_dt: true,
            tracers: TracerConfig::default(),
            n_max: 20,
            tol: 1e-10,
            pairs: 10_000,
            radial_samples: 4096,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(field, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn validate(&self, command: &str) -> Result<(), ConfigError> {
        if self.kernel.name.trim().is_empty() {
            return Err(bad("kernel.name", "must not be empty"));
        }
        if self.kernel.name != "exact" {
            positive("kernel.epsilon", self.kernel.epsilon)?;
        }
        positive("time.t_end", self.time.t_end)?;
        positive("time.dt", self.time.dt)?;
        if self.time.sample_every == 0 {
            return Err(bad("time.sample_every", "must be at least 1"));
        }
        self.validate_initial_data()?;

        let e = &self.experiment;
        match command {
            "converge" => {
                if e.eps_list.len() < 2 {
                    return Err(bad("experiment.eps_list", "need at least two values"));
                }
                for (i, v) in e.eps_list.iter().enumerate() {
                    positive(&format!("experiment.eps_list[{i}]"), *v)?;
                }
                if e.eps_list.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(bad("experiment.eps_list", "must be strictly decreasing"));
                }
                if self.kernel.name == "exact" {
                    return Err(bad("kernel.name", "convergence needs a regularized profile family"));
                }
                if !matches!(e.reference.as_str(), "analytic_radial" | "exact_kernel" | "smallest_epsilon") {
                    return Err(bad(
                        "experiment.reference",
                        "expected analytic_radial, exact_kernel or smallest_epsilon",
                    ));
                }
                positive("experiment.tracers.radius", e.tracers.radius)?;
                if e.tracers.count == 0 {
                    return Err(bad("experiment.tracers.count", "must be at least 1"));
                }
            }
            "picard" => {
                if e.n_max == 0 {
                    return Err(bad("experiment.n_max", "must be at least 1"));
                }
                if !(e.tol >= 0.0) || !e.tol.is_finite() {
                    return Err(bad("experiment.tol", "must be non-negative and finite"));
                }
            }
            "kernel-verify" => {
                if e.pairs < 2 {
                    return Err(bad("experiment.pairs", "must be at least 2"));
                }
                if e.radial_samples < 2 {
                    return Err(bad("experiment.radial_samples", "must be at least 2"));
                }
                if self.kernel.name == "exact" {
                    return Err(bad("kernel.name", "the exact kernel has no profile to verify"));
                }
            }
            "l1-distance" => {
                if self.kernel.name == "exact" {
                    return Err(bad("kernel.name", "the exact kernel has no profile"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn validate_initial_data(&self) -> Result<(), ConfigError> {
        match &self.initial_data {
            InitialData::Points {
                positions,
                circulations,
            } => {
                if positions.is_empty() {
                    return Err(bad("initial_data.positions", "must not be empty"));
                }
                if positions.len() != circulations.len() {
                    return Err(bad(
                        "initial_data.circulations",
                        format!("{} values for {} positions", circulations.len(), positions.len()),
                    ));
                }
            }
            InitialData::File { .. } => {}
            InitialData::Patch {
                radius,
                layout,
                spacing,
                rings,
                per_ring,
                ..
            } => {
                positive("initial_data.radius", *radius)?;
                match layout {
                    PatchLayout::Lattice => positive("initial_data.spacing", *spacing)?,
                    PatchLayout::Polar => {
                        if *rings == 0 {
                            return Err(bad("initial_data.rings", "must be at least 1"));
                        }
                        if *per_ring < 2 {
                            return Err(bad("initial_data.per_ring", "must be at least 2"));
                        }
                    }
                }
            }
            InitialData::Sheet { n, .. } => {
                if *n < 2 {
                    return Err(bad("initial_data.n", "must be at least 2"));
                }
            }
        }
        Ok(())
    }
}

/// Parse a config file. `.json` files are read as run manifests and their
/// `config` entry is used; anything else is TOML.
pub fn load_table(path: &Path) -> anyhow::Result<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let manifest: serde_json::Value = serde_json::from_str(&text)?;
        let config = manifest
            .get("config")
            .ok_or_else(|| bad("config", "manifest has no `config` entry"))?;
        let value: toml::Value = serde_json::from_value(strip_nulls(config.clone()))?;
        match value {
            toml::Value::Table(t) => Ok(t),
            _ => Err(bad("config", "must be a table").into()),
        }
    } else {
        Ok(text.parse::<toml::Table>()?)
    }
}

/// TOML has no null; unset optional fields are simply omitted.
fn strip_nulls(v: serde_json::Value) -> serde_json::Value {
    match v {
        serde_json::Value::Object(map) => serde_json::Value::Object(
            map.into_iter()
                .filter(|(_, v)| !v.is_null())
                .map(|(k, v)| (k, strip_nulls(v)))
                .collect(),
        ),
        serde_json::Value::Array(a) => serde_json::Value::Array(a.into_iter().map(strip_nulls).collect()),
        other => other,
    }
}

/// Set `path` (dot separated) to `raw`, parsed as a TOML value when possible
/// and as a bare string otherwise.
pub fn apply_override(table: &mut toml::Table, path: &str, raw: &str) -> Result<(), ConfigError> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(bad(path, "malformed override path"));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let (last, parents) = keys.split_last().expect("non-empty");
    let mut cur = table;
    for (depth, key) in parents.iter().enumerate() {
        let entry = cur
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(bad(&keys[..=depth].join("."), "is not a table")),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Deserialize a table into a config, mapping the error onto a field path
/// where the parser reports one.
pub fn from_table(table: toml::Table) -> Result<RunConfig, ConfigError> {
    let text = toml::to_string(&table).map_err(|e| bad("", e.to_string()))?;
    toml::from_str(&text).map_err(|e: toml::de::Error| {
        let message = e.message().to_string();
        let field = e
            .span()
            .and_then(|s| key_path_at(&text, s.start))
            .unwrap_or_default();
        bad(&field, message)
    })
}

/// Dotted key path of the line containing byte offset `pos` in TOML text.
fn key_path_at(text: &str, pos: usize) -> Option<String> {
    let mut section = String::new();
    let mut offset = 0;
    for line in text.lines() {
        let end = offset + line.len();
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            section = trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
        if pos <= end {
            if trimmed.starts_with('[') {
                return Some(section);
            }
            let key = trimmed.split('=').next()?.trim();
            return Some(if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            });
        }
        offset = end + 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        for cmd in ["simulate", "picard", "kernel-verify", "l1-distance"] {
            c.validate(cmd).unwrap();
        }
    }

    #[test]
    fn zero_dt_names_its_field() {
        let mut c = RunConfig::default();
        c.time.dt = 0.0;
        assert_eq!(c.validate("simulate").unwrap_err().field, "time.dt");
    }

    #[test]
    fn increasing_eps_list_is_rejected() {
        let mut c = RunConfig::default();
        c.experiment.eps_list = vec![0.1, 0.2];
        assert_eq!(c.validate("converge").unwrap_err().field, "experiment.eps_list");
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "time.dt", "0.25").unwrap();
        apply_override(&mut t, "time.t_end", "2").unwrap();
        apply_override(&mut t, "kernel.name", "alpha").unwrap();
        apply_override(&mut t, "experiment.eps_list", "[0.3, 0.1]").unwrap();
        let c = from_table(t).unwrap();
        assert_eq!(c.time.dt, 0.25);
        assert_eq!(c.time.t_end, 2.0);
        assert_eq!(c.kernel.name, "alpha");
        assert_eq!(c.experiment.eps_list, vec![0.3, 0.1]);
    }

    #[test]
    fn unknown_key_is_reported_with_path() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "time.dtt", "0.1").unwrap();
        apply_override(&mut t, "time.t_end", "1").unwrap();
        apply_override(&mut t, "time.dt", "0.1").unwrap();
        let err = from_table(t).unwrap_err();
        assert!(err.field.starts_with("time"), "{err}");
        assert!(err.message.contains("dtt"), "{err}");
    }

    #[test]
    fn patch_round_trips_through_toml() {
        let c = RunConfig {
            initial_data: InitialData::Patch {
                center: [0.0, 0.0],
                radius: 1.0,
                omega: 1.0,
                layout: PatchLayout::Polar,
                spacing: 0.1,
                rings: 3,
                per_ring: 8,
            },
            ..RunConfig::default()
        };
        let text = toml::to_string(&c).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}

//! Run configuration: a flat `key=value` map with documented defaults.
//!
//! The same keys are accepted as `--key value` flags and as lines of a
//! config file (`#` starts a comment). Precedence, lowest first: defaults,
//! config file, the `LTVE_WORKERS` environment variable, flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ltve_core::fields::{FieldSpec, RingBand};
use ltve_core::{
    BoundaryPolicy, DomainBox64, FrechetRule, IntegratorConfig, LtveConfig64, Mesh64, Metric, MetricKind,
    SchemeOrder, Storage, TimeWindow64,
};

use crate::error::{CliError, CliResult};

pub const WORKERS_ENV: &str = "LTVE_WORKERS";

/// What `run` writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Fld,
    Both,
}

impl OutputFormat {
    pub fn tag(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Fld => "fld",
            OutputFormat::Both => "both",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "fld" | "binary" => Ok(OutputFormat::Fld),
            "both" => Ok(OutputFormat::Both),
            _ => Err(CliError::usage(format!("--format: expected csv, fld or both, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub field: String,
    pub epsilon: f64,
    pub ring_radial: bool,
    pub omega: f64,
    pub kmode: u32,
    pub eps_max: f64,
    pub rate: f64,
    pub dim: usize,
    pub gridded: Option<PathBuf>,
    /// Interleaved `lo0,hi0,lo1,hi1,...`; the field's default when absent.
    pub domain: Option<Vec<f64>>,
    pub delta: f64,
    pub t0: f64,
    pub duration: f64,
    pub k: usize,
    pub metric: MetricKind,
    pub frechet_rule: FrechetRule,
    pub scheme: SchemeOrder,
    pub storage: Storage,
    pub substeps: usize,
    pub boundary: BoundaryPolicy,
    pub workers: usize,
    pub normalize_by_offset_length: bool,
    pub compare_ftle: bool,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub cache: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            field: "double-gyre".into(),
            epsilon: 0.1,
            ring_radial: false,
            omega: 8.0 * std::f64::consts::PI,
            kmode: 7,
            eps_max: 0.8,
            rate: 1.0,
            dim: 2,
            gridded: None,
            domain: None,
            delta: 0.01,
            t0: 0.0,
            duration: 1.0,
            k: 100,
            metric: MetricKind::NormalizedL2,
            frechet_rule: FrechetRule::Classic,
            scheme: SchemeOrder::First,
            storage: Storage::Full,
            substeps: 10,
            boundary: BoundaryPolicy::Stop,
            workers: 0,
            normalize_by_offset_length: false,
            compare_ftle: false,
            output: None,
            format: OutputFormat::Csv,
            cache: None,
        }
    }
}

/// Every accepted key.
pub const KEYS: &[&str] = &[
    "field",
    "epsilon",
    "ring-radial",
    "omega",
    "kmode",
    "eps-max",
    "rate",
    "dim",
    "gridded",
    "domain",
    "delta",
    "t0",
    "T",
    "k",
    "metric",
    "frechet-rule",
    "scheme",
    "storage",
    "substeps",
    "boundary",
    "workers",
    "normalize-by-offset-length",
    "compare-ftle",
    "output",
    "format",
    "cache",
];

fn num<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("--{key}: cannot parse {value:?}")))
}

fn flag(key: &str, value: &str) -> CliResult<bool> {
    match value.trim() {
        "true" | "1" | "yes" | "" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(CliError::usage(format!("--{key}: expected true or false, got {other:?}"))),
    }
}

fn core<T>(key: &str, r: ltve_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::usage(format!("--{key}: {e}")))
}

fn boundary_tag(b: BoundaryPolicy) -> &'static str {
    match b {
        BoundaryPolicy::Stop => "stop",
        BoundaryPolicy::Open => "open",
    }
}

impl RunConfig {
    /// Applies one key. Values are checked for syntax here; cross-field
    /// constraints are checked by [`RunConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let v = value.trim();
        match key {
            "field" => {
                if !FieldSpec::NAMES.contains(&v) {
                    return Err(CliError::usage(format!(
                        "--field: unknown field {v:?} (expected one of {})",
                        FieldSpec::NAMES.join(", ")
                    )));
                }
                self.field = v.to_string();
            }
            "epsilon" => self.epsilon = num(key, v)?,
            "ring-radial" => self.ring_radial = flag(key, v)?,
            "omega" => self.omega = num(key, v)?,
            "kmode" => self.kmode = num(key, v)?,
            "eps-max" => self.eps_max = num(key, v)?,
            "rate" => self.rate = num(key, v)?,
            "dim" => self.dim = num(key, v)?,
            "gridded" => self.gridded = Some(PathBuf::from(v)),
            "domain" => {
                let parts: Vec<f64> = v.split(',').map(|p| num(key, p)).collect::<CliResult<_>>()?;
                if parts.is_empty() || parts.len() % 2 != 0 {
                    return Err(CliError::usage(format!(
                        "--domain: expected lo,hi pairs per axis, got {} numbers",
                        parts.len()
                    )));
                }
                self.domain = Some(parts);
            }
            "delta" => self.delta = num(key, v)?,
            "t0" => self.t0 = num(key, v)?,
            "T" => self.duration = num(key, v)?,
            "k" => self.k = num(key, v)?,
            "metric" => self.metric = core(key, v.parse())?,
            "frechet-rule" => self.frechet_rule = core(key, v.parse())?,
            "scheme" => self.scheme = core(key, v.parse())?,
            "storage" => self.storage = core(key, v.parse())?,
            "substeps" => self.substeps = num(key, v)?,
            "boundary" => {
                self.boundary = match v {
                    "stop" => BoundaryPolicy::Stop,
                    "open" => BoundaryPolicy::Open,
                    _ => return Err(CliError::usage(format!("--boundary: expected stop or open, got {v:?}"))),
                }
            }
            "workers" => self.workers = num(key, v)?,
            "normalize-by-offset-length" => self.normalize_by_offset_length = flag(key, v)?,
            "compare-ftle" => self.compare_ftle = flag(key, v)?,
            "output" => self.output = Some(PathBuf::from(v)),
            "format" => self.format = v.parse()?,
            "cache" => self.cache = Some(PathBuf::from(v)),
            _ => return Err(CliError::usage(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn from_kv<K: AsRef<str>, V: AsRef<str>>(pairs: &[(K, V)]) -> CliResult<Self> {
        let mut cfg = Self::default();
        cfg.apply(pairs)?;
        Ok(cfg)
    }

    pub fn apply<K: AsRef<str>, V: AsRef<str>>(&mut self, pairs: &[(K, V)]) -> CliResult<()> {
        for (k, v) in pairs {
            self.set(k.as_ref(), v.as_ref())?;
        }
        Ok(())
    }

    /// Every key with its current value; optional keys are omitted when unset.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut kv: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| kv.push((k.to_string(), v));
        put("field", self.field.clone());
        put("epsilon", self.epsilon.to_string());
        put("ring-radial", self.ring_radial.to_string());
        put("omega", self.omega.to_string());
        put("kmode", self.kmode.to_string());
        put("eps-max", self.eps_max.to_string());
        put("rate", self.rate.to_string());
        put("dim", self.dim.to_string());
        if let Some(p) = &self.gridded {
            put("gridded", p.display().to_string());
        }
        if let Some(d) = &self.domain {
            put("domain", d.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
        }
        put("delta", self.delta.to_string());
        put("t0", self.t0.to_string());
        put("T", self.duration.to_string());
        put("k", self.k.to_string());
        put("metric", self.metric.tag().to_string());
        put("frechet-rule", self.frechet_rule.tag().to_string());
        put("scheme", self.scheme.tag().to_string());
        put("storage", self.storage.tag().to_string());
        put("substeps", self.substeps.to_string());
        put("boundary", boundary_tag(self.boundary).to_string());
        put("workers", self.workers.to_string());
        put("normalize-by-offset-length", self.normalize_by_offset_length.to_string());
        put("compare-ftle", self.compare_ftle.to_string());
        if let Some(p) = &self.output {
            put("output", p.display().to_string());
        }
        put("format", self.format.tag().to_string());
        if let Some(p) = &self.cache {
            put("cache", p.display().to_string());
        }
        kv
    }

    /// Parses config-file text into ordered `(key, value)` pairs.
    pub fn parse_text(text: &str) -> CliResult<Vec<(String, String)>> {
        let mut out = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value, got {raw:?}", n + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(CliError::usage(format!("config line {}: unknown key {k:?}", n + 1)));
            }
            out.push((k.to_string(), v.trim().to_string()));
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> CliResult<Self> {
        Self::from_kv(&Self::parse_text(text)?)
    }

    pub fn load_file(path: &Path) -> CliResult<Vec<(String, String)>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_text(&text)
    }

    pub fn field_spec(&self) -> CliResult<FieldSpec> {
        Ok(match self.field.as_str() {
            "circular" => FieldSpec::Circular {
                epsilon: self.epsilon,
                band: if self.ring_radial { RingBand::Radial } else { RingBand::Verbatim },
            },
            "standing-wave" => FieldSpec::StandingWave {
                omega: self.omega,
                kmode: self.kmode,
                eps_max: self.eps_max,
            },
            "double-gyre" => FieldSpec::DoubleGyre,
            "artificial-ridge" => FieldSpec::ArtificialRidge,
            "rotation" => FieldSpec::Rotation,
            "saddle" => FieldSpec::Saddle { rate: self.rate },
            "zero" => FieldSpec::Zero { dim: self.dim },
            "gridded" => FieldSpec::Gridded {
                path: self
                    .gridded
                    .clone()
                    .ok_or_else(|| CliError::usage("--gridded: a file path is required for --field gridded"))?,
            },
            other => return Err(CliError::usage(format!("--field: unknown field {other:?}"))),
        })
    }

    pub fn domain_box(&self) -> CliResult<DomainBox64> {
        let spec = self.field_spec()?;
        let bounds = match (&self.domain, spec.default_domain()) {
            (Some(d), _) => d.clone(),
            (None, Some(d)) => d.to_vec(),
            (None, None) => {
                return Err(CliError::usage(format!("--domain: field {} has no default domain", self.field)))
            }
        };
        core("domain", DomainBox64::from_interleaved(&bounds))
    }

    pub fn mesh(&self) -> CliResult<Mesh64> {
        core("delta", Mesh64::new(self.domain_box()?, self.delta))
    }

    pub fn window(&self) -> CliResult<TimeWindow64> {
        TimeWindow64::new(self.t0, self.duration, self.k).map_err(CliError::from)
    }

    pub fn integrator(&self) -> CliResult<IntegratorConfig> {
        IntegratorConfig::new(self.substeps, self.boundary).map_err(CliError::from)
    }

    pub fn ltve_config(&self) -> CliResult<LtveConfig64> {
        let mut cfg = LtveConfig64::new(self.window()?)
            .with_metric(Metric::new(self.metric, self.frechet_rule))
            .with_scheme(self.scheme)
            .with_storage(self.storage)
            .with_integrator(self.integrator()?)
            .with_workers(self.workers);
        cfg.normalize_by_offset_length = self.normalize_by_offset_length;
        Ok(cfg)
    }

    /// Checks every constraint that can be checked without touching the
    /// velocity data, so nothing is computed from an invalid configuration.
    pub fn validate(&self) -> CliResult<()> {
        let mesh = self.mesh()?;
        let cfg = self.ltve_config()?;
        cfg.validate(mesh.dimension())?;
        if self.field == "zero" && self.dim != mesh.dimension() {
            return Err(CliError::usage(format!(
                "--dim: zero field has dimension {} but the domain has {}",
                self.dim,
                mesh.dimension()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for RunConfig {
    /// Config-file form; parsing it back yields an equal config.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_kv() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gyre_example_parses() {
        let cfg = RunConfig::from_kv(&[
            ("field", "double-gyre"),
            ("domain", "0,2,0,1"),
            ("delta", "0.004016"),
            ("t0", "0"),
            ("T", "15"),
            ("k", "100"),
            ("metric", "l2"),
        ])
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.mesh().unwrap().dims(), &[499, 250]);
        assert_eq!(cfg.scheme, SchemeOrder::First);
        assert_eq!(cfg.storage, Storage::Full);
        assert_eq!(cfg.substeps, 10);
    }

    #[test]
    fn bad_values_name_their_flag() {
        let cfg = RunConfig::from_kv(&[("k", "1")]).unwrap();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("--k"), "{err}");
        let err = RunConfig::from_kv(&[("delta", "abc")]).unwrap_err().to_string();
        assert!(err.contains("--delta"));
        assert!(RunConfig::from_text("colour=blue\n").is_err());
        assert!(RunConfig::from_kv(&[("domain", "0,1,2")]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::from_kv(&[
            ("field", "circular"),
            ("ring-radial", "true"),
            ("metric", "frechet"),
            ("frechet-rule", "single-step"),
            ("domain", "-2,2,-2,2"),
            ("delta", "0.020100502512562814"),
            ("output", "out/circ.csv"),
        ])
        .unwrap();
        cfg.workers = 3;
        let text = format!("# a comment\n{cfg}");
        assert_eq!(RunConfig::from_text(&text).unwrap(), cfg);
    }
}

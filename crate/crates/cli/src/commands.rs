use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use ltve_core::ftle::{bound_report, compute_ftle};
use ltve_core::ltve::{compute_field, compute_field_from_set, trajectory_cache};
use ltve_core::{MetricKind, ScalarField64, TrajectorySet64, VelocityField};

use crate::bench::{run_benchmark, BenchmarkPlan, Sweep};
use crate::config::{OutputFormat, RunConfig, WORKERS_ENV};
use crate::error::{CliError, CliResult};
use crate::heatmap::write_heatmap;

#[derive(Debug, Parser)]
#[command(name = "ltve", version, about = "Local trajectory variation exponents and FTLE on uniform meshes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute an LTVE field.
    Run(RunArgs),
    /// Compute the FTLE field from the mesh flow map.
    Ftle(RunArgs),
    /// Check the LTVE/FTLE gap against its analytic bound.
    Bound(BoundArgs),
    /// Integrate the mesh once and store the trajectories.
    Cache(RunArgs),
    /// Render a 2D field file as a PGM image.
    Heatmap(HeatmapArgs),
    /// Measure runtime scaling on the double gyre.
    Benchmark(BenchArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat key=value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Use x^2 + y^2 for the circular band instead of (x + y)^2.
    #[arg(long)]
    pub ring_radial: bool,
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long)]
    pub kmode: Option<String>,
    #[arg(long = "eps-max")]
    pub eps_max: Option<String>,
    #[arg(long)]
    pub rate: Option<String>,
    #[arg(long)]
    pub dim: Option<String>,
    #[arg(long)]
    pub gridded: Option<String>,
    /// lo0,hi0,lo1,hi1,...
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<String>,
    /// Signed duration of the window.
    #[arg(long = "T", allow_hyphen_values = true)]
    pub duration: Option<String>,
    /// Samples per trajectory.
    #[arg(long)]
    pub k: Option<String>,
    /// l2, euclidean, frechet or hausdorff.
    #[arg(long)]
    pub metric: Option<String>,
    /// classic or single-step.
    #[arg(long = "frechet-rule")]
    pub frechet_rule: Option<String>,
    /// first, second or third.
    #[arg(long)]
    pub scheme: Option<String>,
    /// full or streaming.
    #[arg(long)]
    pub storage: Option<String>,
    #[arg(long)]
    pub substeps: Option<String>,
    /// stop or open.
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    #[arg(long)]
    pub normalize_by_offset_length: bool,
    /// Also write the FTLE field and a bound report.
    #[arg(long)]
    pub compare_ftle: bool,
    #[arg(long)]
    pub output: Option<String>,
    /// csv, fld or both.
    #[arg(long)]
    pub format: Option<String>,
    /// Trajectory dump to evaluate instead of integrating.
    #[arg(long)]
    pub cache: Option<String>,
}

impl RunArgs {
    fn pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let opts = [
            ("field", &self.field),
            ("epsilon", &self.epsilon),
            ("omega", &self.omega),
            ("kmode", &self.kmode),
            ("eps-max", &self.eps_max),
            ("rate", &self.rate),
            ("dim", &self.dim),
            ("gridded", &self.gridded),
            ("domain", &self.domain),
            ("delta", &self.delta),
            ("t0", &self.t0),
            ("T", &self.duration),
            ("k", &self.k),
            ("metric", &self.metric),
            ("frechet-rule", &self.frechet_rule),
            ("scheme", &self.scheme),
            ("storage", &self.storage),
            ("substeps", &self.substeps),
            ("boundary", &self.boundary),
            ("workers", &self.workers),
            ("output", &self.output),
            ("format", &self.format),
            ("cache", &self.cache),
        ];
        for (k, v) in opts {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        }
        for (k, on) in [
            ("ring-radial", self.ring_radial),
            ("normalize-by-offset-length", self.normalize_by_offset_length),
            ("compare-ftle", self.compare_ftle),
        ] {
            if on {
                out.push((k.to_string(), "true".to_string()));
            }
        }
        out
    }

    /// Defaults, then the config file, then the worker override from the
    /// environment, then flags; the result is fully validated.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply(&RunConfig::load_file(path)?)?;
        }
        if let Ok(w) = std::env::var(WORKERS_ENV) {
            cfg.set("workers", &w)
                .map_err(|e| CliError::usage(format!("{WORKERS_ENV}: {e}")))?;
        }
        cfg.apply(&self.pairs())?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated durations to sweep instead of --T.
    #[arg(long = "sweep-T", allow_hyphen_values = true)]
    pub sweep_t: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct HeatmapArgs {
    /// Field file (`.fld` or CSV).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// mesh or length.
    #[arg(long)]
    pub sweep: String,
    /// Comma-separated inverse spacings (mesh) or sample counts (length).
    #[arg(long)]
    pub values: Option<String>,
    /// Comma-separated metric tags.
    #[arg(long)]
    pub metrics: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "T")]
    pub duration: Option<f64>,
    #[arg(long)]
    pub substeps: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also write the table to this file.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Run(a) => cmd_run(&a.resolve()?),
        Command::Ftle(a) => cmd_ftle(&a.resolve()?),
        Command::Bound(a) => cmd_bound(a),
        Command::Cache(a) => cmd_cache(&a.resolve()?),
        Command::Heatmap(a) => cmd_heatmap(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    }
}

/// Output files for `base` under `format`; a bare base name gets the
/// format's extension.
pub fn output_paths(base: &Path, format: OutputFormat) -> Vec<PathBuf> {
    let with = |ext: &str| {
        if base.extension().is_some() && format != OutputFormat::Both {
            base.to_path_buf()
        } else {
            base.with_extension(ext)
        }
    };
    match format {
        OutputFormat::Csv => vec![with("csv")],
        OutputFormat::Fld => vec![with("fld")],
        OutputFormat::Both => vec![with("csv"), with("fld")],
    }
}

fn write_field(field: &ScalarField64, base: &Path, format: OutputFormat) -> CliResult<Vec<PathBuf>> {
    let paths = output_paths(base, format);
    for p in &paths {
        let r = if p.extension().is_some_and(|e| e == "fld") {
            field.write_fld(p)
        } else {
            field.write_csv(p)
        };
        r.map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(paths)
}

fn sibling(base: &Path, suffix: &str) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    base.with_file_name(format!("{stem}{suffix}"))
}

fn describe(field: &ScalarField64) -> String {
    let defined = field.values().len() - field.undefined_count();
    let (lo, hi) = field
        .defined()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    format!(
        "dims={:?} defined={defined} undefined={} min={lo} max={hi}",
        field.mesh().dims(),
        field.undefined_count()
    )
}

fn build_field(cfg: &RunConfig) -> CliResult<Box<dyn VelocityField<f64>>> {
    Ok(cfg.field_spec()?.build::<f64>()?)
}

pub fn cmd_run(cfg: &RunConfig) -> CliResult<()> {
    let field = build_field(cfg)?;
    let mesh = cfg.mesh()?;
    let lcfg = cfg.ltve_config()?;
    let start = Instant::now();
    let out = match &cfg.cache {
        Some(path) => {
            let desc = field.descriptor().to_string();
            let set = TrajectorySet64::load(path, &mesh, &lcfg.window, Some(&desc))?;
            compute_field_from_set(&set, &lcfg)?
        }
        None => compute_field(&*field, &mesh, &lcfg)?,
    };
    let elapsed = start.elapsed().as_secs_f64();
    let base = cfg.output.clone().unwrap_or_else(|| PathBuf::from("ltve"));
    let written = write_field(&out.field, &base, cfg.format)?;
    println!("# {}", out.field.header());
    println!("{} stopped={} seconds={elapsed:.3}", describe(&out.field), out.stopped);
    if cfg.storage == ltve_core::Storage::Streaming {
        println!(
            "peak_resident_trajectories={} layer_len={}",
            out.stats.peak_resident, out.stats.layer_len
        );
    }
    for p in &written {
        println!("wrote {}", p.display());
    }

    if cfg.compare_ftle {
        let integ = cfg.integrator()?;
        let ftle = compute_ftle(&*field, &mesh, &lcfg.window, &integ, cfg.workers)?;
        for p in write_field(&ftle, &sibling(&base, "-ftle"), cfg.format)? {
            println!("wrote {}", p.display());
        }
        let report = bound_report(&*field, &mesh, &lcfg.window, &integ, cfg.workers)?;
        let mut text = report.to_text();
        let stat = |v: Option<f64>| v.map_or("nan".to_string(), |v| v.to_string());
        text.push_str(&format!("ftle_max_abs={}\n", stat(ftle.max_abs())));
        text.push_str(&format!("ltve_p90={}\n", stat(out.field.quantile(0.9))));
        text.push_str(&format!("ltve_max={}\n", stat(out.field.defined().reduce(f64::max))));
        let path = sibling(&base, "-bound.txt");
        std::fs::write(&path, &text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        print!("{text}");
        if let Some(w) = &report.warning {
            eprintln!("warning: {w}");
        }
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn cmd_ftle(cfg: &RunConfig) -> CliResult<()> {
    let field = build_field(cfg)?;
    let mesh = cfg.mesh()?;
    let ftle = compute_ftle(&*field, &mesh, &cfg.window()?, &cfg.integrator()?, cfg.workers)?;
    let base = cfg.output.clone().unwrap_or_else(|| PathBuf::from("ftle"));
    println!("# {}", ftle.header());
    println!("{}", describe(&ftle));
    for p in write_field(&ftle, &base, cfg.format)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_bound(args: &BoundArgs) -> CliResult<()> {
    let mut cfg = args.run.resolve()?;
    let durations: Vec<f64> = match &args.sweep_t {
        Some(list) => list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::usage(format!("--sweep-T: cannot parse {v:?}")))
            })
            .collect::<CliResult<_>>()?,
        None => vec![cfg.duration],
    };
    let field = build_field(&cfg)?;
    let mesh = cfg.mesh()?;
    let mut text = String::new();
    for t in durations {
        cfg.duration = t;
        cfg.validate()?;
        let report = bound_report(&*field, &mesh, &cfg.window()?, &cfg.integrator()?, cfg.workers)?;
        if let Some(w) = &report.warning {
            eprintln!("warning: T={t}: {w}");
        }
        text.push_str(&report.to_text());
        text.push('\n');
    }
    print!("{text}");
    if let Some(path) = &cfg.output {
        std::fs::write(path, &text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_cache(cfg: &RunConfig) -> CliResult<()> {
    let field = build_field(cfg)?;
    let mesh = cfg.mesh()?;
    let path = cfg.output.clone().unwrap_or_else(|| PathBuf::from("trajectories.trj"));
    let start = Instant::now();
    let set = trajectory_cache(&*field, &mesh, &cfg.window()?, &cfg.integrator()?, cfg.workers, &path)?;
    println!(
        "seeds={} k={} stopped={} seconds={:.3}",
        set.len(),
        set.samples(),
        set.stopped_count(),
        start.elapsed().as_secs_f64()
    );
    println!("wrote {}", path.display());
    Ok(())
}

/// Reads an `FLD1` or CSV field file; the lower corner is not stored, so
/// the origin is used.
pub fn read_field(path: &Path) -> CliResult<ScalarField64> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    if bytes.starts_with(b"FLD1") {
        let n = header_dimension(bytes.get(8..).unwrap_or_default())?;
        return Ok(ScalarField64::from_fld_bytes(&bytes, &vec![0.0; n])?);
    }
    let text = String::from_utf8(bytes).map_err(|_| CliError::Io(format!("{} is neither FLD1 nor text", path.display())))?;
    let n = header_dimension(text.as_bytes())?;
    Ok(ScalarField64::from_csv(&text, &vec![0.0; n])?)
}

fn header_dimension(bytes: &[u8]) -> CliResult<usize> {
    let head = String::from_utf8_lossy(&bytes[..bytes.len().min(512)]);
    head.split_whitespace()
        .find_map(|t| t.strip_prefix("n="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| CliError::Io("field header lacks n=".into()))
}

fn cmd_heatmap(args: &HeatmapArgs) -> CliResult<()> {
    let field = read_field(&args.input)?;
    write_heatmap(&field, &args.output)?;
    println!("wrote {}", args.output.display());
    Ok(())
}

fn cmd_benchmark(args: &BenchArgs) -> CliResult<()> {
    let sweep: Sweep = args.sweep.parse()?;
    let mut plan = match sweep {
        Sweep::Mesh => BenchmarkPlan::mesh_default(),
        Sweep::Length => BenchmarkPlan::length_default(),
    };
    if let Some(v) = &args.values {
        plan.values = v
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| CliError::usage(format!("--values: cannot parse {x:?}"))))
            .collect::<CliResult<_>>()?;
    }
    if let Some(m) = &args.metrics {
        plan.metrics = m
            .split(',')
            .map(|x| x.trim().parse::<MetricKind>().map_err(CliError::from))
            .collect::<CliResult<_>>()?;
    }
    plan.reps = args.reps;
    if let Some(k) = args.k {
        plan.k = k;
    }
    if let Some(d) = args.delta {
        plan.delta = d;
    }
    if let Some(t) = args.duration {
        plan.duration = t;
    }
    if let Some(s) = args.substeps {
        plan.substeps = s;
    }
    if let Some(w) = args.workers {
        plan.workers = w;
    } else if let Ok(w) = std::env::var(WORKERS_ENV) {
        plan.workers = w
            .parse()
            .map_err(|_| CliError::usage(format!("{WORKERS_ENV}: cannot parse {w:?}")))?;
    }
    let report = run_benchmark(&plan)?;
    let table = report.to_table();
    print!("{table}");
    if let Some(path) = &args.output {
        std::fs::write(path, &table).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

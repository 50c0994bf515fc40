//! Runtime scaling harness.
//!
//! Each sweep point integrates the mesh once; every metric then evaluates
//! the field from those trajectories. Only the evaluation is timed for the
//! slope, integration is reported separately, and no file IO happens inside
//! the timed region. Each timing is the median of `reps` samples after one
//! discarded warm-up run. Fast evaluations are repeated inside a sample until
//! it spans [`MIN_SAMPLE_SECONDS`], so millisecond runs are not swamped by
//! timer and scheduler jitter.

use std::fmt::Write as _;
use std::time::Instant;

use ltve_core::fields::DoubleGyre;
use ltve_core::ltve::{compute_field_from_set, integrate_mesh};
use ltve_core::{DomainBox64, IntegratorConfig, LtveConfig64, Mesh64, MetricKind, SchemeOrder, TimeWindow64};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Vary the spacing at fixed trajectory length.
    Mesh,
    /// Vary the trajectory length at fixed spacing.
    Length,
}

impl std::str::FromStr for Sweep {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "mesh" => Ok(Sweep::Mesh),
            "length" => Ok(Sweep::Length),
            _ => Err(CliError::usage(format!("--sweep: expected mesh or length, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    pub sweep: Sweep,
    /// Inverse spacings `1/delta` for a mesh sweep, or sample counts `k`.
    pub values: Vec<f64>,
    pub metrics: Vec<MetricKind>,
    pub reps: usize,
    pub t0: f64,
    pub duration: f64,
    /// Trajectory length during a mesh sweep.
    pub k: usize,
    /// Spacing during a length sweep.
    pub delta: f64,
    pub substeps: usize,
    pub workers: usize,
}

impl BenchmarkPlan {
    pub fn mesh_default() -> Self {
        Self {
            sweep: Sweep::Mesh,
            values: vec![49.0, 99.0, 149.0, 199.0, 249.0],
            metrics: vec![MetricKind::NormalizedL2, MetricKind::DiscreteFrechet, MetricKind::Hausdorff],
            reps: 3,
            t0: 0.0,
            duration: 15.0,
            k: 100,
            delta: 1.0 / 99.0,
            substeps: 10,
            workers: 0,
        }
    }

    pub fn length_default() -> Self {
        Self {
            sweep: Sweep::Length,
            values: vec![5.0, 10.0, 20.0, 40.0, 60.0],
            ..Self::mesh_default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub metric: MetricKind,
    /// `delta` for a mesh sweep, `k` for a length sweep.
    pub swept: f64,
    /// Median evaluation wall time in seconds.
    pub wall_seconds: f64,
    pub repetitions: usize,
    /// Evaluations averaged inside each timed sample.
    pub inner_loops: usize,
    /// Trajectories resident during evaluation.
    pub peak_trajectories: usize,
    /// Integration time of the shared trajectory set.
    pub integration_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub sweep: Sweep,
    pub records: Vec<BenchmarkRecord>,
    /// Log-log slope per metric: time against `delta^-2` or against `k`.
    pub slopes: Vec<(MetricKind, f64)>,
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn gyre_mesh(delta: f64) -> CliResult<Mesh64> {
    let domain = DomainBox64::new(vec![0.0, 0.0], vec![2.0, 1.0])?;
    Ok(Mesh64::new(domain, delta)?)
}

pub const MIN_SAMPLE_SECONDS: f64 = 0.25;

/// Median per-evaluation time of one metric on a trajectory set, with the
/// inner loop count and peak residency.
fn time_metric(
    set: &ltve_core::TrajectorySet64,
    cfg: &LtveConfig64,
    reps: usize,
) -> CliResult<(f64, usize, usize)> {
    let start = Instant::now();
    let warm = compute_field_from_set(set, cfg)?;
    let first = start.elapsed().as_secs_f64();
    let peak = warm.stats.peak_resident;
    drop(warm);
    let inner = ((MIN_SAMPLE_SECONDS / first.max(1e-9)).ceil() as usize).clamp(1, 10_000);
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        for _ in 0..inner {
            let out = compute_field_from_set(set, cfg)?;
            std::hint::black_box(&out);
        }
        times.push(start.elapsed().as_secs_f64() / inner as f64);
    }
    Ok((median(&times), inner, peak))
}

pub fn run_benchmark(plan: &BenchmarkPlan) -> CliResult<BenchmarkReport> {
    if plan.reps < 3 {
        return Err(CliError::usage("--reps: at least 3 repetitions are required"));
    }
    if plan.values.len() < 2 {
        return Err(CliError::usage("benchmark needs at least two sweep values"));
    }
    if plan.values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::usage("sweep values must be strictly increasing"));
    }
    let integ = IntegratorConfig::with_substeps(plan.substeps)?;
    let mut records = Vec::new();
    for &value in &plan.values {
        let (delta, k) = match plan.sweep {
            Sweep::Mesh => (1.0 / value, plan.k),
            Sweep::Length => (plan.delta, value as usize),
        };
        let mesh = gyre_mesh(delta)?;
        let window = TimeWindow64::new(plan.t0, plan.duration, k)?;
        let start = Instant::now();
        let set = integrate_mesh(&DoubleGyre, &mesh, &window, &integ, plan.workers)?;
        let integration_seconds = start.elapsed().as_secs_f64();
        for &metric in &plan.metrics {
            let cfg = LtveConfig64::new(window)
                .with_metric(metric)
                .with_scheme(SchemeOrder::First)
                .with_workers(plan.workers);
            let (wall_seconds, inner_loops, peak_trajectories) = time_metric(&set, &cfg, plan.reps)?;
            records.push(BenchmarkRecord {
                metric,
                swept: match plan.sweep {
                    Sweep::Mesh => delta,
                    Sweep::Length => k as f64,
                },
                wall_seconds,
                repetitions: plan.reps,
                inner_loops,
                peak_trajectories,
                integration_seconds,
            });
        }
    }
    let slopes = plan
        .metrics
        .iter()
        .map(|m| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = records
                .iter()
                .filter(|r| r.metric == *m)
                .map(|r| {
                    let x = match plan.sweep {
                        Sweep::Mesh => 1.0 / (r.swept * r.swept),
                        Sweep::Length => r.swept,
                    };
                    (x, r.wall_seconds)
                })
                .unzip();
            (*m, loglog_slope(&xs, &ys))
        })
        .collect();
    Ok(BenchmarkReport {
        sweep: plan.sweep,
        records,
        slopes,
    })
}

impl BenchmarkReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let var = match self.sweep {
            Sweep::Mesh => "delta",
            Sweep::Length => "k",
        };
        let _ = writeln!(s, "metric,{var},median_s,reps,inner,peak_trajectories,integration_s");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{:.6},{},{},{},{:.6}",
                r.metric, r.swept, r.wall_seconds, r.repetitions, r.inner_loops, r.peak_trajectories, r.integration_seconds
            );
        }
        let against = match self.sweep {
            Sweep::Mesh => "delta^-2",
            Sweep::Length => "k",
        };
        for (m, slope) in &self.slopes {
            let _ = writeln!(s, "# slope {m} vs {against}: {slope:.3}");
        }
        s
    }
}

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{TimeWindow, VelocityField};
use crate::integrate::{advect_into, IntegratorConfig};
use crate::ltve::{FieldMeta, MeshSpec, NeighborhoodScheme, Quantity, ScalarField, SchemeOrder, TrajectorySet};
use crate::metrics::{kernels, FrechetRule, Metric, MetricEvaluator, MetricKind, SquaredKernel};
use crate::pool::with_workers;
use crate::scalar::Scalar;

/// How trajectories are held while the field is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Storage {
    /// Integrate every mesh point up front.
    #[default]
    Full,
    /// Keep only the layers a neighbourhood can reach.
    Streaming,
}

impl Storage {
    pub fn tag(&self) -> &'static str {
        match self {
            Storage::Full => "full",
            Storage::Streaming => "streaming",
        }
    }
}

impl fmt::Display for Storage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Storage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Storage::Full),
            "streaming" | "stream" => Ok(Storage::Streaming),
            _ => Err(Error::invalid(
                "storage",
                format!("unknown storage mode {s:?} (expected full or streaming)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtveConfig<F> {
    pub metric: Metric,
    pub scheme: SchemeOrder,
    pub window: TimeWindow<F>,
    pub integrator: IntegratorConfig,
    pub storage: Storage,
    /// Divide each neighbour's distance by `|u|` so diagonal offsets are
    /// measured against their true separation.
    pub normalize_by_offset_length: bool,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl<F: Scalar> LtveConfig<F> {
    pub fn new(window: TimeWindow<F>) -> Self {
        Self {
            metric: Metric::default(),
            scheme: SchemeOrder::default(),
            window,
            integrator: IntegratorConfig::default(),
            storage: Storage::default(),
            normalize_by_offset_length: false,
            workers: 0,
        }
    }

    pub fn with_metric(mut self, metric: impl Into<Metric>) -> Self {
        self.metric = metric.into();
        self
    }

    pub fn with_scheme(mut self, scheme: SchemeOrder) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_storage(mut self, storage: Storage) -> Self {
        self.storage = storage;
        self
    }

    pub fn with_integrator(mut self, integrator: IntegratorConfig) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// Metric tag as written to field headers.
    pub fn metric_label(&self) -> String {
        match (self.metric.kind, self.metric.frechet_rule) {
            (MetricKind::DiscreteFrechet, FrechetRule::SingleStep) => "frechet-single-step".to_string(),
            (kind, _) => kind.tag().to_string(),
        }
    }

    pub fn scheme_label(&self) -> String {
        if self.normalize_by_offset_length {
            format!("{}-normalized", self.scheme.tag())
        } else {
            self.scheme.tag().to_string()
        }
    }

    /// Checks the configuration against a mesh dimension and returns the
    /// neighbourhood it implies.
    pub fn validate(&self, dim: usize) -> Result<NeighborhoodScheme> {
        TimeWindow::new(self.window.t0, self.window.duration, self.window.samples)?;
        IntegratorConfig::new(self.integrator.substeps_per_sample, self.integrator.boundary)?;
        if self.scheme == SchemeOrder::Third && dim == 1 {
            // the only offset is +1, which leaves the last mesh point alone
            return Err(Error::invalid("scheme", "third order needs at least two dimensions"));
        }
        NeighborhoodScheme::new(self.scheme, dim)
    }

    pub(crate) fn meta(&self) -> FieldMeta {
        FieldMeta {
            quantity: Quantity::Ltve,
            t0: self.window.t0.as_f64(),
            duration: self.window.duration.as_f64(),
            metric: self.metric_label(),
            scheme: self.scheme_label(),
        }
    }
}

/// Marker in [`LtveOutput::argmax`] for points without a maximizing offset.
pub const NO_ARGMAX: u16 = u16::MAX;

/// Residency counters. In full mode every trajectory is resident at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StreamStats {
    pub layer_axis: usize,
    pub layer_len: usize,
    pub peak_resident: usize,
    pub peak_layers: usize,
}

#[derive(Debug, Clone)]
pub struct LtveOutput<F> {
    pub field: ScalarField<F>,
    /// Index into the scheme's offset list of the maximizing neighbour; ties
    /// go to the lexicographically first offset.
    pub argmax: Vec<u16>,
    /// Seeds halted by the stopping boundary.
    pub stopped: usize,
    pub stats: StreamStats,
}

/// `ln(ltv / delta) / |T|`, or NaN when `ltv` is zero.
pub fn ltve_from_ltv<F: Scalar>(ltv: F, delta: F, duration: F) -> F {
    if ltv == F::zero() {
        F::nan()
    } else {
        (ltv / delta).ln() / duration.abs()
    }
}

pub(crate) trait Store<F> {
    fn center(&self, c: usize) -> &[F];
    fn neighbor(&self, c: usize, offset: usize) -> &[F];
}

/// Per-run constants of the neighbourhood maximum.
pub(crate) struct Evaluator<F> {
    dims: Vec<usize>,
    offsets: Vec<Vec<i32>>,
    weights: Vec<F>,
    weights_sq: Vec<F>,
    weighted: bool,
    below: Vec<usize>,
    above: Vec<usize>,
    metric: Metric,
    dim: usize,
    delta: F,
    duration: F,
}

impl<F: Scalar> Evaluator<F> {
    pub(crate) fn new(mesh: &MeshSpec<F>, scheme: &NeighborhoodScheme, metric: Metric, by_length: bool, duration: F) -> Self {
        let offsets = scheme.offsets().to_vec();
        let weights = offsets
            .iter()
            .map(|u| {
                if by_length {
                    let len2: i32 = u.iter().map(|c| c * c).sum();
                    F::one() / F::of(len2 as f64).sqrt()
                } else {
                    F::one()
                }
            })
            .collect::<Vec<F>>();
        let weights_sq = weights.iter().map(|w| *w * *w).collect();
        let n = mesh.dimension();
        Self {
            dims: mesh.dims().to_vec(),
            offsets,
            weights,
            weights_sq,
            weighted: by_length,
            below: (0..n).map(|a| scheme.reach_below(a)).collect(),
            above: (0..n).map(|a| scheme.reach_above(a)).collect(),
            metric,
            dim: mesh.dimension(),
            delta: mesh.delta(),
            duration,
        }
    }

    pub(crate) fn offsets(&self) -> &[Vec<i32>] {
        &self.offsets
    }

    pub(crate) fn metric_evaluator(&self) -> MetricEvaluator<F> {
        MetricEvaluator::new(self.metric, self.dim)
    }

    #[inline]
    fn inside(&self, idx: &[usize], u: &[i32]) -> bool {
        idx.iter()
            .zip(u)
            .zip(&self.dims)
            .all(|((i, c), d)| {
                let v = *i as i64 + *c as i64;
                v >= 0 && v < *d as i64
            })
    }

    /// True when every offset of the scheme stays inside the mesh.
    #[inline]
    fn interior(&self, idx: &[usize]) -> bool {
        (0..idx.len()).all(|a| idx[a] >= self.below[a] && idx[a] + self.above[a] < self.dims[a])
    }

    /// Largest weighted distance to an in-mesh neighbour and its offset
    /// index, or `None` if no neighbour lies in the mesh.
    #[inline]
    pub(crate) fn ltv<S: Store<F>, K: SquaredKernel<F>>(
        &self,
        idx: &[usize],
        c: usize,
        store: &S,
        m: &mut K,
    ) -> Option<(F, u16)> {
        let center = store.center(c);
        let mut best = -F::one();
        let mut best_sq = F::zero();
        let mut arg = NO_ARGMAX;
        let interior = self.interior(idx);
        // squared keys order the same as distances, so one root per point
        for o in 0..self.offsets.len() {
            if !interior && !self.inside(idx, &self.offsets[o]) {
                continue;
            }
            let sq = m.distance_sq(store.neighbor(c, o), center);
            let key = sq * self.weights_sq[o];
            if key > best {
                best = key;
                best_sq = sq;
                arg = o as u16;
            }
        }
        (arg != NO_ARGMAX).then(|| (best_sq.sqrt() * self.weights[arg as usize], arg))
    }

    /// Same as [`Evaluator::ltv`] for a point whose whole neighbourhood is
    /// known to lie in the mesh.
    #[inline]
    fn ltv_interior<K: SquaredKernel<F>>(&self, c: usize, store: &FullStore<'_, F>, m: &mut K) -> (F, u16) {
        let center = store.center(c);
        let mut best = -F::one();
        let mut best_sq = F::zero();
        let mut arg = 0usize;
        for (o, (&dl, &w2)) in store.deltas.iter().zip(&self.weights_sq).enumerate() {
            let sq = m.distance_sq(store.at(c.wrapping_add_signed(dl)), center);
            let key = if self.weighted { sq * w2 } else { sq };
            if key > best {
                best = key;
                best_sq = sq;
                arg = o;
            }
        }
        (best_sq.sqrt() * self.weights[arg], arg as u16)
    }

    /// Range of last-axis indices whose neighbourhood stays in the mesh,
    /// given that the other coordinates in `idx` already do.
    fn interior_run(&self, idx: &[usize]) -> std::ops::Range<usize> {
        let n = idx.len();
        let others = (0..n - 1).all(|a| idx[a] >= self.below[a] && idx[a] + self.above[a] < self.dims[a]);
        let last = self.dims[n - 1];
        if others && self.below[n - 1] + self.above[n - 1] < last {
            self.below[n - 1]..last - self.above[n - 1]
        } else {
            0..0
        }
    }

    #[inline]
    pub(crate) fn exponent(&self, ltv: F) -> F {
        ltve_from_ltv(ltv, self.delta, self.duration)
    }
}

struct FullStore<'a, F> {
    disp: &'a [F],
    kn: usize,
    deltas: Vec<isize>,
}

impl<F> Store<F> for FullStore<'_, F> {
    #[inline]
    fn center(&self, c: usize) -> &[F] {
        &self.disp[c * self.kn..(c + 1) * self.kn]
    }
    #[inline]
    fn neighbor(&self, c: usize, offset: usize) -> &[F] {
        self.at((c as isize + self.deltas[offset]) as usize)
    }
}

impl<F> FullStore<'_, F> {
    #[inline]
    fn at(&self, j: usize) -> &[F] {
        &self.disp[j * self.kn..(j + 1) * self.kn]
    }
}

pub(crate) fn linear_deltas(offsets: &[Vec<i32>], strides: &[usize]) -> Vec<isize> {
    offsets
        .iter()
        .map(|u| u.iter().zip(strides).map(|(c, s)| *c as isize * *s as isize).sum())
        .collect()
}

/// Maximum metric distance between the displacement trajectory at `index`
/// and those of its in-mesh neighbours. `displacements` holds `k * n` values
/// per mesh point in mesh order.
pub fn ltv_at<F: Scalar>(
    mesh: &MeshSpec<F>,
    scheme: &NeighborhoodScheme,
    metric: Metric,
    index: &[usize],
    displacements: &[F],
    samples: usize,
) -> Result<F> {
    let n = mesh.dimension();
    if scheme.dim() != n || index.len() != n {
        return Err(Error::Usage("scheme, index and mesh dimensions differ".into()));
    }
    if index.iter().zip(mesh.dims()).any(|(i, d)| i >= d) {
        return Err(Error::Usage(format!("index {index:?} outside mesh {:?}", mesh.dims())));
    }
    let kn = samples * n;
    if samples < 2 || displacements.len() != mesh.len() * kn {
        return Err(Error::Usage(format!(
            "expected {} trajectory values, got {}",
            mesh.len() * kn,
            displacements.len()
        )));
    }
    let ev = Evaluator::new(mesh, scheme, metric, false, F::one());
    let store = FullStore {
        disp: displacements,
        kn,
        deltas: linear_deltas(ev.offsets(), mesh.strides()),
    };
    let mut m = ev.metric_evaluator();
    ev.ltv(index, mesh.linear(index), &store, &mut m)
        .map(|(v, _)| v)
        .ok_or_else(|| Error::Validation(format!("mesh point {index:?} has no in-mesh neighbour")))
}

/// Integrates every mesh point over the window. On failure the error of the
/// lowest-indexed failing seed is returned.
pub fn integrate_mesh<F: Scalar, V: VelocityField<F> + ?Sized>(
    field: &V,
    mesh: &MeshSpec<F>,
    window: &TimeWindow<F>,
    integrator: &IntegratorConfig,
    workers: usize,
) -> Result<TrajectorySet<F>> {
    check_dimension(field, mesh)?;
    let n = mesh.dimension();
    let kn = window.samples * n;
    let mut displacements = vec![F::zero(); mesh.len() * kn];
    let stops = with_workers(workers, || {
        displacements
            .par_chunks_mut(kn)
            .enumerate()
            .map(|(i, out)| {
                let seed = mesh.point(&mesh.multi_index(i));
                advect_into(field, &seed, window, integrator, mesh.domain(), out)
            })
            .collect::<Vec<_>>()
    })?;
    let stopped = stops.into_iter().collect::<Result<Vec<_>>>()?;
    TrajectorySet::new(
        mesh.clone(),
        *window,
        field.descriptor().to_string(),
        displacements,
        stopped,
    )
}

pub(crate) fn check_dimension<F: Scalar, V: VelocityField<F> + ?Sized>(field: &V, mesh: &MeshSpec<F>) -> Result<()> {
    if field.dimension() != mesh.dimension() {
        return Err(Error::Usage(format!(
            "field is {}-dimensional but the mesh is {}-dimensional",
            field.dimension(),
            mesh.dimension()
        )));
    }
    Ok(())
}

/// Evaluates the LTVE field from precomputed trajectories.
pub fn compute_field_from_set<F: Scalar>(set: &TrajectorySet<F>, cfg: &LtveConfig<F>) -> Result<LtveOutput<F>> {
    let mesh = set.mesh();
    let scheme = cfg.validate(mesh.dimension())?;
    let w = set.window();
    if w.samples != cfg.window.samples || w.t0 != cfg.window.t0 || w.duration != cfg.window.duration {
        return Err(Error::CacheMismatch(format!(
            "trajectories cover t0={} T={} k={}, configuration asks for t0={} T={} k={}",
            w.t0, w.duration, w.samples, cfg.window.t0, cfg.window.duration, cfg.window.samples
        )));
    }
    with_workers(cfg.workers, || evaluate_full(set, &scheme, cfg))?
}

fn evaluate_rows<F: Scalar, K: SquaredKernel<F>>(
    ev: &Evaluator<F>,
    mesh: &MeshSpec<F>,
    store: &FullStore<'_, F>,
    kernel: K,
) -> (Vec<F>, Vec<u16>) {
    let n = mesh.dimension();
    let mut values = vec![F::zero(); mesh.len()];
    let mut argmax = vec![NO_ARGMAX; mesh.len()];
    let row = mesh.dims()[n - 1];
    values
        .par_chunks_mut(row)
        .zip(argmax.par_chunks_mut(row))
        .enumerate()
        .for_each_init(
            || (kernel.clone(), vec![0usize; n]),
            |(m, idx), (r, (vs, args))| {
                let start = r * row;
                mesh.multi_index_into(start, idx);
                let run = ev.interior_run(idx);
                for (j, (v, a)) in vs.iter_mut().zip(args.iter_mut()).enumerate() {
                    let (ltv, arg) = if run.contains(&j) {
                        ev.ltv_interior(start + j, store, m)
                    } else {
                        idx[n - 1] = j;
                        ev.ltv(idx, start + j, store, m).expect("validated neighbourhood")
                    };
                    *v = ev.exponent(ltv);
                    *a = arg;
                }
            },
        );
    (values, argmax)
}

fn evaluate_full<F: Scalar>(set: &TrajectorySet<F>, scheme: &NeighborhoodScheme, cfg: &LtveConfig<F>) -> Result<LtveOutput<F>> {
    let mesh = set.mesh();
    let n = mesh.dimension();
    let kn = set.samples() * n;
    let ev = Evaluator::new(mesh, scheme, cfg.metric, cfg.normalize_by_offset_length, cfg.window.duration);
    let store = FullStore {
        disp: set.displacements(),
        kn,
        deltas: linear_deltas(ev.offsets(), mesh.strides()),
    };
    let samples = set.samples();
    let (values, argmax) = match cfg.metric.kind {
        MetricKind::NormalizedL2 => evaluate_rows(
            &ev,
            mesh,
            &store,
            kernels::NormalizedL2 {
                samples: F::of_usize(samples),
            },
        ),
        MetricKind::EuclideanL2 => evaluate_rows(&ev, mesh, &store, kernels::EuclideanL2),
        MetricKind::DiscreteFrechet => evaluate_rows(
            &ev,
            mesh,
            &store,
            kernels::Frechet {
                dim: n,
                rule: cfg.metric.frechet_rule,
                row: Vec::with_capacity(samples),
            },
        ),
        MetricKind::Hausdorff => evaluate_rows(&ev, mesh, &store, kernels::Hausdorff { dim: n }),
    };
    let field = ScalarField::new(mesh.clone(), values, cfg.meta())?;
    Ok(LtveOutput {
        field,
        argmax,
        stopped: set.stopped_count(),
        stats: StreamStats {
            layer_axis: mesh.layer_axis(),
            layer_len: mesh.layer_len(),
            peak_resident: mesh.len(),
            peak_layers: mesh.dims()[mesh.layer_axis()],
        },
    })
}

/// Integrates and evaluates the LTVE field in the configured storage mode.
pub fn compute_field<F: Scalar, V: VelocityField<F> + ?Sized>(
    field: &V,
    mesh: &MeshSpec<F>,
    cfg: &LtveConfig<F>,
) -> Result<LtveOutput<F>> {
    check_dimension(field, mesh)?;
    let scheme = cfg.validate(mesh.dimension())?;
    match cfg.storage {
        Storage::Streaming => crate::ltve::compute_field_streaming(field, mesh, cfg),
        Storage::Full => with_workers(cfg.workers, || {
            let set = integrate_mesh(field, mesh, &cfg.window, &cfg.integrator, 0)?;
            evaluate_full(&set, &scheme, cfg)
        })?,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ConstantField, DomainBox, LinearField};
    use crate::integrate::BoundaryPolicy;

    #[test]
    fn exponent_examples() {
        assert_eq!(ltve_from_ltv(0.01, 0.01, 3.0), 0.0);
        let t = 2.5f64;
        let v = ltve_from_ltv(0.01 * t.exp(), 0.01, -t);
        assert!((v - 1.0).abs() < 1e-14);
        assert!(ltve_from_ltv(0.0f64, 0.01, 1.0).is_nan());
    }

    #[test]
    fn exponential_line_three_points() {
        // v(x) = x on {-1, 0, 1}: x(t) = x0 e^t, so every neighbour's
        // displacement trajectory differs from the centre's by (0, e - 1).
        let field = LinearField::new(1, vec![1.0]).unwrap();
        let mesh = MeshSpec::new(DomainBox::new(vec![-1.0], vec![1.0]).unwrap(), 1.0).unwrap();
        let window = TimeWindow::new(0.0, 1.0, 2).unwrap();
        let integ = IntegratorConfig::new(200, BoundaryPolicy::Open).unwrap();
        let set = integrate_mesh(&field, &mesh, &window, &integ, 1).unwrap();
        let disp = set.displacements();
        let scheme = NeighborhoodScheme::new(SchemeOrder::First, 1).unwrap();
        let e1 = std::f64::consts::E - 1.0;
        let l2 = ltv_at(&mesh, &scheme, MetricKind::NormalizedL2.into(), &[1], disp, 2).unwrap();
        assert!((l2 - e1 / 2f64.sqrt()).abs() < 1e-9);
        let plain = ltv_at(&mesh, &scheme, MetricKind::EuclideanL2.into(), &[1], disp, 2).unwrap();
        assert!((plain - e1).abs() < 1e-9);
        let fr = ltv_at(&mesh, &scheme, MetricKind::DiscreteFrechet.into(), &[1], disp, 2).unwrap();
        assert!((fr - e1).abs() < 1e-9);
    }

    #[test]
    fn translation_gives_undefined_everywhere() {
        let field = ConstantField::new(vec![0.3, -0.2]);
        let mesh = MeshSpec::new(DomainBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(), 0.1).unwrap();
        let window = TimeWindow::new(0.0, 1.0, 5).unwrap();
        let cfg = LtveConfig::new(window)
            .with_integrator(IntegratorConfig::new(4, BoundaryPolicy::Open).unwrap());
        let out = compute_field(&field, &mesh, &cfg).unwrap();
        assert_eq!(out.field.undefined_count(), mesh.len());
        assert_eq!(out.stopped, 0);
    }

    #[test]
    fn third_order_rejected_in_one_dimension() {
        let window = TimeWindow::new(0.0, 1.0, 2).unwrap();
        let cfg = LtveConfig::<f64>::new(window).with_scheme(SchemeOrder::Third);
        assert!(cfg.validate(1).is_err());
        assert!(cfg.validate(2).is_ok());
    }
}

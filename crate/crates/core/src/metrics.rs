//! Trajectory metrics on k-discrete trajectories.
//!
//! Every metric reduces pointwise Euclidean gaps. Internally the squared gaps
//! are compared and a single square root is taken at the end; `sqrt` is
//! monotone, so the selected extremum is the same one the unsquared
//! definition would select.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::integrate::PointSequence;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    /// `sqrt((1/k) sum_j |a_j - b_j|^2)`.
    NormalizedL2,
    /// `sqrt(sum_j |a_j - b_j|^2)`, the plain l2 distance in R^{kn}.
    EuclideanL2,
    DiscreteFrechet,
    Hausdorff,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::NormalizedL2,
        MetricKind::EuclideanL2,
        MetricKind::DiscreteFrechet,
        MetricKind::Hausdorff,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            MetricKind::NormalizedL2 => "l2",
            MetricKind::EuclideanL2 => "euclidean",
            MetricKind::DiscreteFrechet => "frechet",
            MetricKind::Hausdorff => "hausdorff",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MetricKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" | "normalized-l2" => Ok(MetricKind::NormalizedL2),
            "euclidean" | "l2-plain" => Ok(MetricKind::EuclideanL2),
            "frechet" | "discrete-frechet" => Ok(MetricKind::DiscreteFrechet),
            "hausdorff" => Ok(MetricKind::Hausdorff),
            _ => Err(Error::invalid(
                "metric",
                format!("unknown metric {s:?} (expected l2, euclidean, frechet or hausdorff)"),
            )),
        }
    }
}

/// Step rule of the coupling walk in the discrete Fréchet distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FrechetRule {
    /// Advance one index, the other, or both at once (Eiter-Mannila).
    #[default]
    Classic,
    /// Advance exactly one of the two indices per step.
    SingleStep,
}

impl FrechetRule {
    pub fn tag(&self) -> &'static str {
        match self {
            FrechetRule::Classic => "classic",
            FrechetRule::SingleStep => "single-step",
        }
    }
}

impl FromStr for FrechetRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classic" => Ok(FrechetRule::Classic),
            "single-step" | "xor" => Ok(FrechetRule::SingleStep),
            _ => Err(Error::invalid(
                "frechet-rule",
                format!("unknown rule {s:?} (expected classic or single-step)"),
            )),
        }
    }
}

/// A metric kind together with its options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Metric {
    pub kind: MetricKind,
    pub frechet_rule: FrechetRule,
}

impl Default for MetricKind {
    fn default() -> Self {
        MetricKind::NormalizedL2
    }
}

impl From<MetricKind> for Metric {
    fn from(kind: MetricKind) -> Self {
        Metric {
            kind,
            frechet_rule: FrechetRule::default(),
        }
    }
}

impl Metric {
    pub fn new(kind: MetricKind, frechet_rule: FrechetRule) -> Self {
        Self { kind, frechet_rule }
    }

    pub fn distance<F: Scalar>(
        &self,
        a: &(impl PointSequence<F> + ?Sized),
        b: &(impl PointSequence<F> + ?Sized),
    ) -> Result<F> {
        match self.kind {
            MetricKind::NormalizedL2 => normalized_l2(a, b),
            MetricKind::EuclideanL2 => euclidean_l2(a, b),
            MetricKind::DiscreteFrechet => discrete_frechet(a, b, self.frechet_rule),
            MetricKind::Hausdorff => hausdorff(a, b),
        }
    }
}

fn check_same_shape<F>(a: &(impl PointSequence<F> + ?Sized), b: &(impl PointSequence<F> + ?Sized)) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Usage(format!("point dimensions differ ({} vs {})", a.dim(), b.dim())));
    }
    if a.len() != b.len() {
        return Err(Error::Usage(format!("sample counts differ ({} vs {})", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::Usage("empty trajectory".into()));
    }
    Ok(())
}

fn check_comparable<F>(a: &(impl PointSequence<F> + ?Sized), b: &(impl PointSequence<F> + ?Sized)) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Usage(format!("point dimensions differ ({} vs {})", a.dim(), b.dim())));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::Usage("empty trajectory".into()));
    }
    Ok(())
}

pub fn normalized_l2<F: Scalar>(a: &(impl PointSequence<F> + ?Sized), b: &(impl PointSequence<F> + ?Sized)) -> Result<F> {
    check_same_shape(a, b)?;
    Ok(raw::normalized_l2(a.flat(), b.flat(), a.dim()))
}

pub fn euclidean_l2<F: Scalar>(a: &(impl PointSequence<F> + ?Sized), b: &(impl PointSequence<F> + ?Sized)) -> Result<F> {
    check_same_shape(a, b)?;
    Ok(raw::euclidean_l2(a.flat(), b.flat()))
}

/// Discrete Fréchet distance by the `O(k_a k_b)` dynamic program.
pub fn discrete_frechet<F: Scalar>(
    a: &(impl PointSequence<F> + ?Sized),
    b: &(impl PointSequence<F> + ?Sized),
    rule: FrechetRule,
) -> Result<F> {
    check_comparable(a, b)?;
    let mut row = Vec::new();
    Ok(raw::discrete_frechet(a.flat(), b.flat(), a.dim(), rule, &mut row))
}

/// Symmetric discrete Hausdorff distance between the two point sets.
pub fn hausdorff<F: Scalar>(a: &(impl PointSequence<F> + ?Sized), b: &(impl PointSequence<F> + ?Sized)) -> Result<F> {
    check_comparable(a, b)?;
    Ok(raw::hausdorff(a.flat(), b.flat(), a.dim()))
}

/// Largest directed gap `max_i min_j |a_i - b_j|`.
pub fn directed_hausdorff<F: Scalar>(
    a: &(impl PointSequence<F> + ?Sized),
    b: &(impl PointSequence<F> + ?Sized),
) -> Result<F> {
    check_comparable(a, b)?;
    Ok(raw::directed_sq(a.flat(), b.flat(), a.dim()).sqrt())
}

/// Largest gap of the identity coupling, `max_j |a_j - b_j|`.
pub fn max_pointwise<F: Scalar>(a: &(impl PointSequence<F> + ?Sized), b: &(impl PointSequence<F> + ?Sized)) -> Result<F> {
    check_same_shape(a, b)?;
    let d = a.dim();
    Ok(a
        .flat()
        .chunks_exact(d)
        .zip(b.flat().chunks_exact(d))
        .map(|(p, q)| raw::sq_dist(p, q))
        .fold(F::zero(), F::max)
        .sqrt())
}

/// Exhaustive enumeration of couplings, the ground truth for the dynamic
/// program. Refuses inputs with more than 64 index pairs.
pub fn frechet_oracle<F: Scalar>(
    a: &(impl PointSequence<F> + ?Sized),
    b: &(impl PointSequence<F> + ?Sized),
    rule: FrechetRule,
) -> Result<F> {
    check_comparable(a, b)?;
    let (ka, kb) = (a.len(), b.len());
    if ka * kb > 64 {
        return Err(Error::Usage(format!(
            "oracle enumeration limited to k_a * k_b <= 64, got {ka} x {kb}"
        )));
    }
    let gap = |i: usize, j: usize| -> F {
        let p = a.point(i);
        let q = b.point(j);
        p.iter()
            .zip(q)
            .map(|(x, y)| (*x - *y) * (*x - *y))
            .fold(F::zero(), |s, v| s + v)
            .sqrt()
    };

    // Depth-first walk over every monotone path from (0,0) to (ka-1,kb-1),
    // tracking the running max; the answer is the smallest final max.
    fn walk<F: Scalar>(
        i: usize,
        j: usize,
        ka: usize,
        kb: usize,
        running: F,
        rule: FrechetRule,
        gap: &dyn Fn(usize, usize) -> F,
        best: &mut Option<F>,
    ) {
        let running = running.max(gap(i, j));
        if i + 1 == ka && j + 1 == kb {
            if best.map_or(true, |b| running < b) {
                *best = Some(running);
            }
            return;
        }
        if i + 1 < ka {
            walk(i + 1, j, ka, kb, running, rule, gap, best);
        }
        if j + 1 < kb {
            walk(i, j + 1, ka, kb, running, rule, gap, best);
        }
        if rule == FrechetRule::Classic && i + 1 < ka && j + 1 < kb {
            walk(i + 1, j + 1, ka, kb, running, rule, gap, best);
        }
    }

    let mut best = None;
    walk(0, 0, ka, kb, F::zero(), rule, &gap, &mut best);
    Ok(best.expect("at least one coupling exists"))
}

/// Unchecked slice kernels used on the hot path.
pub(crate) mod raw {
    use super::FrechetRule;
    use crate::scalar::Scalar;

    #[inline]
    pub fn sq_dist<F: Scalar>(p: &[F], q: &[F]) -> F {
        let mut s = F::zero();
        for (x, y) in p.iter().zip(q) {
            let d = *x - *y;
            s += d * d;
        }
        s
    }

    #[inline]
    pub fn sum_sq<F: Scalar>(a: &[F], b: &[F]) -> F {
        sq_dist(a, b)
    }

    #[inline]
    pub fn normalized_l2_sq<F: Scalar>(a: &[F], b: &[F], dim: usize) -> F {
        let k = a.len() / dim;
        sum_sq(a, b) / F::of_usize(k)
    }

    pub fn normalized_l2<F: Scalar>(a: &[F], b: &[F], dim: usize) -> F {
        normalized_l2_sq(a, b, dim).sqrt()
    }

    pub fn euclidean_l2<F: Scalar>(a: &[F], b: &[F]) -> F {
        sum_sq(a, b).sqrt()
    }

    pub fn discrete_frechet<F: Scalar>(a: &[F], b: &[F], dim: usize, rule: FrechetRule, row: &mut Vec<F>) -> F {
        discrete_frechet_sq(a, b, dim, rule, row).sqrt()
    }

    /// Rolling-row DP over squared gaps; returns the squared distance.
    pub fn discrete_frechet_sq<F: Scalar>(a: &[F], b: &[F], dim: usize, rule: FrechetRule, row: &mut Vec<F>) -> F {
        let ka = a.len() / dim;
        let kb = b.len() / dim;
        row.clear();
        row.resize(kb, F::zero());
        let pa = |i: usize| &a[i * dim..(i + 1) * dim];
        let pb = |j: usize| &b[j * dim..(j + 1) * dim];

        let p0 = pa(0);
        let mut acc = F::zero();
        for (j, cell) in row.iter_mut().enumerate() {
            acc = acc.max(sq_dist(p0, pb(j)));
            *cell = acc;
        }
        for i in 1..ka {
            let p = pa(i);
            let mut diag = row[0];
            row[0] = row[0].max(sq_dist(p, pb(0)));
            for j in 1..kb {
                let up = row[j];
                let left = row[j - 1];
                let reach = match rule {
                    FrechetRule::Classic => up.min(left).min(diag),
                    FrechetRule::SingleStep => up.min(left),
                };
                diag = up;
                row[j] = reach.max(sq_dist(p, pb(j)));
            }
        }
        row[kb - 1]
    }

    pub fn directed_sq<F: Scalar>(a: &[F], b: &[F], dim: usize) -> F {
        let mut worst = F::zero();
        for p in a.chunks_exact(dim) {
            let mut nearest = F::infinity();
            for q in b.chunks_exact(dim) {
                nearest = nearest.min(sq_dist(p, q));
            }
            worst = worst.max(nearest);
        }
        worst
    }

    pub fn hausdorff<F: Scalar>(a: &[F], b: &[F], dim: usize) -> F {
        hausdorff_sq(a, b, dim).sqrt()
    }

    pub fn hausdorff_sq<F: Scalar>(a: &[F], b: &[F], dim: usize) -> F {
        directed_sq(a, b, dim).max(directed_sq(b, a, dim))
    }
}

/// Reusable per-worker evaluator holding DP scratch space.
#[derive(Debug, Clone)]
pub struct MetricEvaluator<F> {
    metric: Metric,
    dim: usize,
    row: Vec<F>,
}

impl<F: Scalar> MetricEvaluator<F> {
    pub fn new(metric: Metric, dim: usize) -> Self {
        Self {
            metric,
            dim,
            row: Vec::new(),
        }
    }

    /// Distance between flat trajectories of equal shape; shapes are the
    /// caller's responsibility.
    #[inline]
    pub fn distance(&mut self, a: &[F], b: &[F]) -> F {
        self.distance_sq(a, b).sqrt()
    }

    /// Square of [`MetricEvaluator::distance`], which every metric here
    /// computes first; lets callers compare without a square root per pair.
    #[inline]
    pub fn distance_sq(&mut self, a: &[F], b: &[F]) -> F {
        match self.metric.kind {
            MetricKind::NormalizedL2 => raw::normalized_l2_sq(a, b, self.dim),
            MetricKind::EuclideanL2 => raw::sum_sq(a, b),
            MetricKind::DiscreteFrechet => {
                raw::discrete_frechet_sq(a, b, self.dim, self.metric.frechet_rule, &mut self.row)
            }
            MetricKind::Hausdorff => raw::hausdorff_sq(a, b, self.dim),
        }
    }
}

/// Squared trajectory distance on flat slices of equal shape.
pub trait SquaredKernel<F>: Clone + Send + Sync {
    fn distance_sq(&mut self, a: &[F], b: &[F]) -> F;
}

impl<F: Scalar> SquaredKernel<F> for MetricEvaluator<F> {
    #[inline]
    fn distance_sq(&mut self, a: &[F], b: &[F]) -> F {
        MetricEvaluator::distance_sq(self, a, b)
    }
}

/// Single-metric kernels, so hot loops dispatch once per run rather than
/// once per pair. Each returns exactly what [`MetricEvaluator`] does.
pub(crate) mod kernels {
    use super::{raw, FrechetRule, SquaredKernel};
    use crate::scalar::Scalar;

    #[derive(Clone)]
    pub struct NormalizedL2<F> {
        pub samples: F,
    }

    impl<F: Scalar> SquaredKernel<F> for NormalizedL2<F> {
        #[inline]
        fn distance_sq(&mut self, a: &[F], b: &[F]) -> F {
            raw::sum_sq(a, b) / self.samples
        }
    }

    #[derive(Clone)]
    pub struct EuclideanL2;

    impl<F: Scalar> SquaredKernel<F> for EuclideanL2 {
        #[inline]
        fn distance_sq(&mut self, a: &[F], b: &[F]) -> F {
            raw::sum_sq(a, b)
        }
    }

    #[derive(Clone)]
    pub struct Frechet<F> {
        pub dim: usize,
        pub rule: FrechetRule,
        pub row: Vec<F>,
    }

    impl<F: Scalar> SquaredKernel<F> for Frechet<F> {
        #[inline]
        fn distance_sq(&mut self, a: &[F], b: &[F]) -> F {
            raw::discrete_frechet_sq(a, b, self.dim, self.rule, &mut self.row)
        }
    }

    #[derive(Clone)]
    pub struct Hausdorff {
        pub dim: usize,
    }

    impl<F: Scalar> SquaredKernel<F> for Hausdorff {
        #[inline]
        fn distance_sq(&mut self, a: &[F], b: &[F]) -> F {
            raw::hausdorff_sq(a, b, self.dim)
        }
    }
}

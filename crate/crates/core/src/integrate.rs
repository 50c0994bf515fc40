//! Fixed-step RK4 particle advection with a stopping boundary condition.

use crate::error::{Error, Result};
use crate::fields::{DomainBox, TimeWindow, VelocityField};
use crate::scalar::Scalar;

/// What happens when a particle leaves the computational box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// Halt the particle at its projection onto the boundary.
    #[default]
    Stop,
    /// Keep integrating outside the box (analytic fields only).
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegratorConfig {
    /// RK4 steps between consecutive trajectory samples.
    pub substeps_per_sample: usize,
    pub boundary: BoundaryPolicy,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            substeps_per_sample: 10,
            boundary: BoundaryPolicy::Stop,
        }
    }
}

impl IntegratorConfig {
    pub fn new(substeps_per_sample: usize, boundary: BoundaryPolicy) -> Result<Self> {
        if substeps_per_sample == 0 {
            return Err(Error::invalid("substeps", "must be at least 1"));
        }
        Ok(Self {
            substeps_per_sample,
            boundary,
        })
    }

    pub fn with_substeps(substeps_per_sample: usize) -> Result<Self> {
        Self::new(substeps_per_sample, BoundaryPolicy::Stop)
    }
}

/// A sequence of points in R^n stored flat, `len() * dim()` values.
pub trait PointSequence<F> {
    fn dim(&self) -> usize;
    fn flat(&self) -> &[F];

    fn len(&self) -> usize {
        if self.dim() == 0 {
            0
        } else {
            self.flat().len() / self.dim()
        }
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn point(&self, j: usize) -> &[F] {
        let d = self.dim();
        &self.flat()[j * d..(j + 1) * d]
    }
}

/// Borrowed flat point sequence.
#[derive(Debug, Clone, Copy)]
pub struct Points<'a, F> {
    dim: usize,
    data: &'a [F],
}

impl<'a, F> Points<'a, F> {
    /// Panics unless `data.len()` is a multiple of `dim`.
    pub fn new(dim: usize, data: &'a [F]) -> Self {
        assert!(dim > 0 && data.len() % dim == 0, "flat data does not match dimension");
        Self { dim, data }
    }
}

impl<F> PointSequence<F> for Points<'_, F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn flat(&self) -> &[F] {
        self.data
    }
}

/// Positions at the `k` uniform sample times of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTrajectory<F> {
    dim: usize,
    samples: Vec<F>,
    stopped_at: Option<usize>,
}

impl<F: Scalar> DiscreteTrajectory<F> {
    pub fn new(dim: usize, samples: Vec<F>, stopped_at: Option<usize>) -> Result<Self> {
        if dim == 0 || samples.len() % dim != 0 || samples.len() / dim < 2 {
            return Err(Error::invalid(
                "trajectory",
                "needs at least two samples of a positive dimension",
            ));
        }
        Ok(Self {
            dim,
            samples,
            stopped_at,
        })
    }

    /// First sample index frozen on the boundary, if the particle stopped.
    pub fn stopped_at(&self) -> Option<usize> {
        self.stopped_at
    }

    pub fn into_flat(self) -> Vec<F> {
        self.samples
    }
}

impl<F> PointSequence<F> for DiscreteTrajectory<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn flat(&self) -> &[F] {
        &self.samples
    }
}

/// Trajectory relative to its release point; the first sample is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementTrajectory<F> {
    dim: usize,
    samples: Vec<F>,
}

impl<F> PointSequence<F> for DisplacementTrajectory<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn flat(&self) -> &[F] {
        &self.samples
    }
}

/// `samples[j] - samples[0]` for every sample.
pub fn to_displacement<F: Scalar>(traj: &DiscreteTrajectory<F>) -> DisplacementTrajectory<F> {
    let mut samples = traj.samples.clone();
    displace_in_place(traj.dim, &mut samples);
    DisplacementTrajectory {
        dim: traj.dim,
        samples,
    }
}

pub(crate) fn displace_in_place<F: Scalar>(dim: usize, samples: &mut [F]) {
    let origin: Vec<F> = samples[..dim].to_vec();
    for chunk in samples.chunks_exact_mut(dim) {
        for (v, s) in chunk.iter_mut().zip(&origin) {
            *v -= *s;
        }
    }
}

/// Projects an exiting position onto the box boundary by componentwise
/// clamping.
pub fn stop_at_boundary<F: Scalar>(pos_prev: &[F], pos_next: &[F], domain: &DomainBox<F>) -> Vec<F> {
    debug_assert!(domain.contains(pos_prev));
    let mut p = pos_next.to_vec();
    domain.clamp(&mut p);
    p
}

/// Advects a particle from `seed` and records it at the window's sample
/// times.
pub fn advect<F: Scalar, V: VelocityField<F> + ?Sized>(
    field: &V,
    seed: &[F],
    window: &TimeWindow<F>,
    cfg: &IntegratorConfig,
    domain: &DomainBox<F>,
) -> Result<DiscreteTrajectory<F>> {
    let n = field.dimension();
    if seed.len() != n || domain.dimension() != n {
        return Err(Error::Usage(format!(
            "seed, domain and field dimensions differ ({}, {}, {n})",
            seed.len(),
            domain.dimension()
        )));
    }
    if !domain.contains(seed) {
        return Err(Error::Usage(format!("seed {seed:?} lies outside the domain")));
    }
    let mut samples = vec![F::zero(); window.samples * n];
    let stopped_at = advect_into(field, seed, window, cfg, domain, &mut samples)?;
    for p in samples.chunks_exact_mut(n) {
        for (v, s) in p.iter_mut().zip(seed) {
            *v += *s;
        }
    }
    if let Some(j) = stopped_at {
        // seed + (c - seed) can miss the clamped point by an ulp
        for p in samples[j * n..].chunks_exact_mut(n) {
            domain.clamp(p);
        }
    }
    Ok(DiscreteTrajectory {
        dim: n,
        samples,
        stopped_at,
    })
}

/// Hot-path advection into a caller-provided `k * n` buffer. The buffer
/// receives displacements from the seed; the state is integrated in that
/// form so particles moved by the same velocities get bit-identical
/// displacements wherever they start. Returns the stop index. The seed must
/// already lie in the domain.
pub(crate) fn advect_into<F: Scalar, V: VelocityField<F> + ?Sized>(
    field: &V,
    seed: &[F],
    window: &TimeWindow<F>,
    cfg: &IntegratorConfig,
    domain: &DomainBox<F>,
    out: &mut [F],
) -> Result<Option<usize>> {
    let n = seed.len();
    let k = window.samples;
    let sub = cfg.substeps_per_sample;
    let total = (k - 1) * sub;
    let h = window.duration / F::of_usize(total);
    let half = h / F::of(2.0);
    let sixth = h / F::of(6.0);
    let two = F::of(2.0);
    let stop = cfg.boundary == BoundaryPolicy::Stop;

    let mut d = vec![F::zero(); n];
    let mut k1 = vec![F::zero(); n];
    let mut k2 = vec![F::zero(); n];
    let mut k3 = vec![F::zero(); n];
    let mut k4 = vec![F::zero(); n];
    let mut stage = vec![F::zero(); n];

    out[..n].iter_mut().for_each(|v| *v = F::zero());

    let eval = |x: &[F], t: F, out: &mut [F]| -> Result<()> {
        field.velocity_seeded(x, t, seed, out);
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Integration {
                seed: seed.iter().map(|v| v.as_f64()).collect(),
                time: t.as_f64(),
                reason: format!("non-finite velocity at {:?}", x.iter().map(|v| v.as_f64()).collect::<Vec<_>>()),
            })
        }
    };
    // stage position seed + d + c * slope, clamped under the stop policy
    let place = |stage: &mut [F], d: &[F], c: F, slope: &[F]| {
        for j in 0..n {
            stage[j] = seed[j] + (d[j] + c * slope[j]);
        }
        if stop {
            domain.clamp(stage);
        }
    };

    for step in 0..total {
        let t = window.t0 + window.duration * F::of_usize(step) / F::of_usize(total);
        let t_mid = t + half;
        let t_end = window.t0 + window.duration * F::of_usize(step + 1) / F::of_usize(total);

        for j in 0..n {
            stage[j] = seed[j] + d[j];
        }
        eval(&stage, t, &mut k1)?;
        place(&mut stage, &d, half, &k1);
        eval(&stage, t_mid, &mut k2)?;
        place(&mut stage, &d, half, &k2);
        eval(&stage, t_mid, &mut k3)?;
        place(&mut stage, &d, h, &k3);
        eval(&stage, t_end, &mut k4)?;
        for j in 0..n {
            d[j] += sixth * (k1[j] + two * k2[j] + two * k3[j] + k4[j]);
        }

        let done = step + 1;
        if stop {
            for j in 0..n {
                stage[j] = seed[j] + d[j];
            }
            if !domain.contains(&stage) {
                domain.clamp(&mut stage);
                for j in 0..n {
                    d[j] = stage[j] - seed[j];
                }
                let first = done.div_ceil(sub);
                for j in first..k {
                    out[j * n..(j + 1) * n].copy_from_slice(&d);
                }
                return Ok(Some(first));
            }
        }
        if done % sub == 0 {
            let j = done / sub;
            out[j * n..(j + 1) * n].copy_from_slice(&d);
        }
    }
    Ok(None)
}

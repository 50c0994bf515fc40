//! Velocity fields: the evaluation trait, the analytic test fields, and
//! gridded data with space-time interpolation.

mod analytic;
mod gridded;
mod registry;

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use analytic::{
    ArtificialRidge, CircularFlow, ConstantField, DoubleGyre, FnField, LinearField, RingBand,
    StandingWave,
};
pub use gridded::{load_gridded, GriddedFormat, GriddedVelocity};
pub use registry::FieldSpec;

/// Closed axis-aligned box `[lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox<F> {
    lo: Vec<F>,
    hi: Vec<F>,
}

impl<F: Scalar> DomainBox<F> {
    pub fn new(lo: Vec<F>, hi: Vec<F>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::invalid("domain", "dimension must be at least 1"));
        }
        if lo.len() != hi.len() {
            return Err(Error::invalid(
                "domain",
                format!("corner dimensions differ ({} vs {})", lo.len(), hi.len()),
            ));
        }
        for (j, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::invalid(
                    "domain",
                    format!("axis {j} needs finite lo < hi, got [{l}, {h}]"),
                ));
            }
        }
        Ok(Self { lo, hi })
    }

    /// Builds a box from interleaved bounds `lo_0, hi_0, lo_1, hi_1, ...`.
    pub fn from_interleaved(bounds: &[F]) -> Result<Self> {
        if bounds.is_empty() || bounds.len() % 2 != 0 {
            return Err(Error::invalid(
                "domain",
                "expected an even, nonzero number of bounds lo0,hi0,lo1,hi1,...",
            ));
        }
        let lo = bounds.iter().step_by(2).copied().collect();
        let hi = bounds.iter().skip(1).step_by(2).copied().collect();
        Self::new(lo, hi)
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[F] {
        &self.lo
    }

    pub fn hi(&self) -> &[F] {
        &self.hi
    }

    pub fn extent(&self, axis: usize) -> F {
        self.hi[axis] - self.lo[axis]
    }

    pub fn contains(&self, x: &[F]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    /// Componentwise clamp, which is the Euclidean projection onto the box.
    pub fn clamp(&self, x: &mut [F]) {
        for (v, (l, h)) in x.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *v = v.max(*l).min(*h);
        }
    }

    /// Axis with the longest side; ties go to the lowest axis.
    pub fn longest_axis(&self) -> usize {
        let mut best = 0;
        for j in 1..self.dimension() {
            if self.extent(j) > self.extent(best) {
                best = j;
            }
        }
        best
    }
}

/// Start time, signed duration and sample count of a k-discrete trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow<F> {
    pub t0: F,
    pub duration: F,
    pub samples: usize,
}

impl<F: Scalar> TimeWindow<F> {
    pub fn new(t0: F, duration: F, samples: usize) -> Result<Self> {
        if !t0.is_finite() {
            return Err(Error::invalid("t0", "must be finite"));
        }
        if !duration.is_finite() || duration == F::zero() {
            return Err(Error::invalid("T", "must be finite and nonzero"));
        }
        if samples < 2 {
            return Err(Error::invalid("k", format!("must be at least 2, got {samples}")));
        }
        Ok(Self {
            t0,
            duration,
            samples,
        })
    }

    /// `t0 + j T / (k - 1)`.
    pub fn sample_time(&self, j: usize) -> F {
        self.t0 + self.duration * F::of_usize(j) / F::of_usize(self.samples - 1)
    }

    pub fn end(&self) -> F {
        self.t0 + self.duration
    }
}

/// Field name plus its parameter record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDescriptor {
    pub name: String,
    pub params: Vec<(String, String)>,
}

impl FieldDescriptor {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            params: Vec::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl fmt::Display) -> Self {
        self.params.push((key.into(), value.to_string()));
        self
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.params.is_empty() {
            f.write_str("(")?;
            for (i, (k, v)) in self.params.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{k}={v}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Time-dependent vector field `v(x, t)`.
///
/// Implementations are immutable and deterministic: the same input always
/// produces bit-identical output, from any thread.
pub trait VelocityField<F: Scalar>: Send + Sync {
    fn dimension(&self) -> usize;

    fn descriptor(&self) -> FieldDescriptor;

    /// Writes `v(x, t)` into `out`.
    fn velocity(&self, x: &[F], t: F, out: &mut [F]);

    /// Velocity for a particle released at `seed`. Fields whose law depends
    /// on the release point override this; the integrator always calls it.
    fn velocity_seeded(&self, x: &[F], t: F, seed: &[F], out: &mut [F]) {
        let _ = seed;
        self.velocity(x, t, out)
    }

    fn is_seeded(&self) -> bool {
        false
    }
}

impl<F: Scalar, V: VelocityField<F> + ?Sized> VelocityField<F> for Box<V> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn descriptor(&self) -> FieldDescriptor {
        (**self).descriptor()
    }
    fn velocity(&self, x: &[F], t: F, out: &mut [F]) {
        (**self).velocity(x, t, out)
    }
    fn velocity_seeded(&self, x: &[F], t: F, seed: &[F], out: &mut [F]) {
        (**self).velocity_seeded(x, t, seed, out)
    }
    fn is_seeded(&self) -> bool {
        (**self).is_seeded()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_rejects_degenerate_axes() {
        assert!(DomainBox::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(DomainBox::<f64>::new(vec![], vec![]).is_err());
        assert!(DomainBox::new(vec![0.0], vec![1.0, 2.0]).is_err());
        let b = DomainBox::from_interleaved(&[0.0, 2.0, 0.0, 1.0]).unwrap();
        assert_eq!(b.lo(), &[0.0, 0.0]);
        assert_eq!(b.hi(), &[2.0, 1.0]);
        assert_eq!(b.longest_axis(), 0);
    }

    #[test]
    fn clamp_projects_onto_box() {
        let b = DomainBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let mut p = [1.3, -0.2];
        b.clamp(&mut p);
        assert_eq!(p, [1.0, 0.0]);
        assert!(b.contains(&p));
    }

    #[test]
    fn window_sample_times_include_both_ends() {
        let w = TimeWindow::new(1.0, 2.0, 5).unwrap();
        assert_eq!(w.sample_time(0), 1.0);
        assert_eq!(w.sample_time(2), 2.0);
        assert_eq!(w.sample_time(4), 3.0);
        assert!(TimeWindow::new(0.0, 0.0, 5).is_err());
        assert!(TimeWindow::new(0.0, 1.0, 1).is_err());
        // negative durations are allowed (backward time)
        assert!(TimeWindow::new(0.0, -1.0, 2).is_ok());
    }
}

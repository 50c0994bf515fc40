use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, VelocityField};
use crate::scalar::Scalar;

/// Which quantity the circular flow's band test is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RingBand {
    /// `(1-eps)^2 <= (x+y)^2 <= (1+eps)^2`, exactly as printed.
    #[default]
    Verbatim,
    /// `(1-eps)^2 <= x^2+y^2 <= (1+eps)^2`, a true ring.
    Radial,
}

/// Rigid rotation `(y, -x)` inside a band, at rest elsewhere.
#[derive(Debug, Clone, Copy)]
pub struct CircularFlow<F> {
    epsilon: F,
    band: RingBand,
}

impl<F: Scalar> CircularFlow<F> {
    pub fn new(epsilon: F, band: RingBand) -> Result<Self> {
        if !(epsilon > F::zero() && epsilon < F::one()) {
            return Err(Error::invalid(
                "epsilon",
                format!("must lie in (0, 1), got {epsilon}"),
            ));
        }
        Ok(Self { epsilon, band })
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }

    pub fn band(&self) -> RingBand {
        self.band
    }

    pub fn in_band(&self, x: F, y: F) -> bool {
        let q = match self.band {
            RingBand::Verbatim => (x + y) * (x + y),
            RingBand::Radial => x * x + y * y,
        };
        let inner = (F::one() - self.epsilon) * (F::one() - self.epsilon);
        let outer = (F::one() + self.epsilon) * (F::one() + self.epsilon);
        inner <= q && q <= outer
    }
}

impl<F: Scalar> VelocityField<F> for CircularFlow<F> {
    fn dimension(&self) -> usize {
        2
    }

    fn descriptor(&self) -> FieldDescriptor {
        let band = match self.band {
            RingBand::Verbatim => "verbatim",
            RingBand::Radial => "radial",
        };
        FieldDescriptor::new("circular")
            .with("epsilon", self.epsilon)
            .with("band", band)
    }

    fn velocity(&self, x: &[F], _t: F, out: &mut [F]) {
        if self.in_band(x[0], x[1]) {
            out[0] = x[1];
            out[1] = -x[0];
        } else {
            out[0] = F::zero();
            out[1] = F::zero();
        }
    }
}

/// Radially oscillating flow `dx/dt = (w e cos(wt) / (1 + e sin(wt))) x`
/// whose amplitude `e = e_max cos(m theta0)` is frozen at the release angle.
#[derive(Debug, Clone, Copy)]
pub struct StandingWave<F> {
    omega: F,
    kmode: u32,
    eps_max: F,
}

impl<F: Scalar> StandingWave<F> {
    pub fn new(omega: F, kmode: u32, eps_max: F) -> Result<Self> {
        if !omega.is_finite() || omega == F::zero() {
            return Err(Error::invalid("omega", "must be finite and nonzero"));
        }
        if kmode < 1 {
            return Err(Error::invalid("kmode", "must be at least 1"));
        }
        if !(eps_max > F::zero() && eps_max < F::one()) {
            return Err(Error::invalid(
                "eps-max",
                format!("must lie in (0, 1) so 1 + e sin(wt) stays positive, got {eps_max}"),
            ));
        }
        Ok(Self {
            omega,
            kmode,
            eps_max,
        })
    }

    pub fn omega(&self) -> F {
        self.omega
    }

    pub fn period(&self) -> F {
        F::TAU() / self.omega.abs()
    }

    /// Oscillation amplitude for a particle released at `seed`.
    pub fn amplitude(&self, seed: &[F]) -> F {
        let theta = seed[1].atan2(seed[0]);
        self.eps_max * (F::of_usize(self.kmode as usize) * theta).cos()
    }

    /// Exact trajectory `(1 + e sin(wt)) x0`.
    pub fn trajectory(&self, seed: &[F], t: F) -> [F; 2] {
        let scale = F::one() + self.amplitude(seed) * (self.omega * t).sin();
        [scale * seed[0], scale * seed[1]]
    }

    fn rate(&self, eps: F, t: F) -> F {
        let wt = self.omega * t;
        self.omega * eps * wt.cos() / (F::one() + eps * wt.sin())
    }
}

impl<F: Scalar> VelocityField<F> for StandingWave<F> {
    fn dimension(&self) -> usize {
        2
    }

    fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor::new("standing-wave")
            .with("omega", self.omega)
            .with("kmode", self.kmode)
            .with("eps_max", self.eps_max)
    }

    /// Unseeded evaluation reads the amplitude from the current polar angle,
    /// which is constant along every exact trajectory.
    fn velocity(&self, x: &[F], t: F, out: &mut [F]) {
        self.velocity_seeded(x, t, x, out)
    }

    fn velocity_seeded(&self, x: &[F], t: F, seed: &[F], out: &mut [F]) {
        let rate = self.rate(self.amplitude(seed), t);
        out[0] = rate * x[0];
        out[1] = rate * x[1];
    }

    fn is_seeded(&self) -> bool {
        true
    }
}

/// Time-periodic double gyre on `[0,2] x [0,1]` with `A = 0.1`,
/// `a = 0.1 sin(pi t / 5)` and `b = 1 - 2a`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleGyre;

impl DoubleGyre {
    pub const AMPLITUDE: f64 = 0.1;
    pub const PERTURBATION: f64 = 0.1;
    pub const FREQUENCY: f64 = std::f64::consts::PI / 5.0;
}

impl<F: Scalar> VelocityField<F> for DoubleGyre {
    fn dimension(&self) -> usize {
        2
    }

    fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor::new("double-gyre")
            .with("A", Self::AMPLITUDE)
            .with("eps", Self::PERTURBATION)
    }

    fn velocity(&self, x: &[F], t: F, out: &mut [F]) {
        let pi = F::PI();
        let amp = F::of(Self::AMPLITUDE);
        let a = F::of(Self::PERTURBATION) * (pi * t / F::of(5.0)).sin();
        let b = F::one() - (a + a);
        let phase = pi * (a * x[0] * x[0] + b * x[0]);
        let (sy, cy) = (pi * x[1]).sin_cos();
        let (sp, cp) = phase.sin_cos();
        out[0] = -pi * amp * sp * cy;
        out[1] = pi * amp * ((a + a) * x[0] + b) * cp * sy;
    }
}

/// Autonomous saddle-type field `(x - y^2, -y + x^2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ArtificialRidge;

impl<F: Scalar> VelocityField<F> for ArtificialRidge {
    fn dimension(&self) -> usize {
        2
    }

    fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor::new("artificial-ridge")
    }

    fn velocity(&self, x: &[F], _t: F, out: &mut [F]) {
        out[0] = x[0] - x[1] * x[1];
        out[1] = -x[1] + x[0] * x[0];
    }
}

/// Autonomous linear field `v = A x` with a row-major `n x n` matrix.
#[derive(Debug, Clone)]
pub struct LinearField<F> {
    dim: usize,
    matrix: Vec<F>,
}

impl<F: Scalar> LinearField<F> {
    pub fn new(dim: usize, matrix: Vec<F>) -> Result<Self> {
        if dim == 0 || matrix.len() != dim * dim {
            return Err(Error::invalid(
                "matrix",
                format!("expected {dim}x{dim} entries, got {}", matrix.len()),
            ));
        }
        Ok(Self { dim, matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: vec![F::zero(); dim * dim],
        }
    }

    /// `(y, -x)`: clockwise rotation with unit angular speed.
    pub fn rotation() -> Self {
        Self {
            dim: 2,
            matrix: vec![F::zero(), F::one(), -F::one(), F::zero()],
        }
    }

    /// `(a x, -a y)`: hyperbolic stretch along x, compression along y.
    pub fn saddle(rate: F) -> Self {
        Self {
            dim: 2,
            matrix: vec![rate, F::zero(), F::zero(), -rate],
        }
    }

    pub fn matrix(&self) -> &[F] {
        &self.matrix
    }
}

impl<F: Scalar> VelocityField<F> for LinearField<F> {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn descriptor(&self) -> FieldDescriptor {
        let entries: Vec<String> = self.matrix.iter().map(|v| v.to_string()).collect();
        FieldDescriptor::new("linear").with("matrix", entries.join(";"))
    }

    fn velocity(&self, x: &[F], _t: F, out: &mut [F]) {
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            let row = &self.matrix[i * self.dim..(i + 1) * self.dim];
            *o = row.iter().zip(x).fold(F::zero(), |acc, (a, v)| acc + *a * *v);
        }
    }
}

/// Spatially and temporally uniform velocity.
#[derive(Debug, Clone)]
pub struct ConstantField<F> {
    value: Vec<F>,
}

impl<F: Scalar> ConstantField<F> {
    pub fn new(value: Vec<F>) -> Self {
        Self { value }
    }
}

impl<F: Scalar> VelocityField<F> for ConstantField<F> {
    fn dimension(&self) -> usize {
        self.value.len()
    }

    fn descriptor(&self) -> FieldDescriptor {
        let v: Vec<String> = self.value.iter().map(|c| c.to_string()).collect();
        FieldDescriptor::new("constant").with("v", v.join(";"))
    }

    fn velocity(&self, _x: &[F], _t: F, out: &mut [F]) {
        out.copy_from_slice(&self.value);
    }
}

/// Adapts a closure `(x, t, out)` into a field.
pub struct FnField<G> {
    dim: usize,
    name: String,
    eval: G,
}

impl<G> FnField<G> {
    pub fn new(dim: usize, name: impl Into<String>, eval: G) -> Self {
        Self {
            dim,
            name: name.into(),
            eval,
        }
    }
}

impl<F, G> VelocityField<F> for FnField<G>
where
    F: Scalar,
    G: Fn(&[F], F, &mut [F]) + Send + Sync,
{
    fn dimension(&self) -> usize {
        self.dim
    }

    fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor::new(self.name.clone())
    }

    fn velocity(&self, x: &[F], t: F, out: &mut [F]) {
        (self.eval)(x, t, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn eval<V: VelocityField<f64>>(f: &V, x: [f64; 2], t: f64) -> [f64; 2] {
        let mut out = [0.0; 2];
        f.velocity(&x, t, &mut out);
        out
    }

    #[test]
    fn circular_flow_values() {
        let f = CircularFlow::new(0.1, RingBand::Verbatim).unwrap();
        assert_eq!(eval(&f, [1.0, 0.0], 3.0), [0.0, -1.0]);
        assert_eq!(eval(&f, [0.0, 0.0], 3.0), [0.0, 0.0]);
        // (0.3 + 0.3)^2 = 0.36 is outside [0.81, 1.21]
        assert_eq!(eval(&f, [0.3, 0.3], 5.0), [0.0, 0.0]);
        // on the verbatim band x + y = 1 but well off the unit circle
        assert_eq!(eval(&f, [0.5, 0.5], 0.0), [0.5, -0.5]);
        let r = CircularFlow::new(0.1, RingBand::Radial).unwrap();
        assert_eq!(eval(&r, [0.5, 0.5], 0.0), [0.0, 0.0]);
        assert_eq!(eval(&r, [0.0, 1.05], 0.0), [1.05, 0.0]);
        assert!(CircularFlow::new(0.0, RingBand::Radial).is_err());
        assert!(CircularFlow::new(1.0, RingBand::Radial).is_err());
    }

    #[test]
    fn standing_wave_exact_trajectory() {
        let w = StandingWave::new(8.0 * PI, 7, 0.8).unwrap();
        let x = w.trajectory(&[1.0, 0.0], 1.0 / 16.0);
        assert!((x[0] - 1.8).abs() < 1e-15 && x[1] == 0.0);
        // return after one full period
        let seed = [0.4, -1.3];
        let back = w.trajectory(&seed, w.period());
        assert!((back[0] - seed[0]).abs() < 1e-14 && (back[1] - seed[1]).abs() < 1e-14);
        // a ray with cos(7 theta) = 0 is stationary
        let theta = PI / 14.0;
        let s = [theta.cos(), theta.sin()];
        assert!(w.amplitude(&s).abs() < 1e-15);
        assert!(StandingWave::new(8.0 * PI, 7, 1.0).is_err());
        assert!(StandingWave::new(0.0, 7, 0.5).is_err());
        assert!(StandingWave::new(1.0, 0, 0.5).is_err());
    }

    #[test]
    fn standing_wave_velocity_matches_time_derivative() {
        let w = StandingWave::new(8.0 * PI, 7, 0.8).unwrap();
        let seed = [0.7, 0.2];
        let t = 0.13;
        let x = w.trajectory(&seed, t);
        let mut v = [0.0; 2];
        w.velocity_seeded(&x, t, &seed, &mut v);
        let h = 1e-6;
        let a = w.trajectory(&seed, t + h);
        let b = w.trajectory(&seed, t - h);
        for j in 0..2 {
            let fd = (a[j] - b[j]) / (2.0 * h);
            assert!((fd - v[j]).abs() < 1e-6, "{fd} vs {}", v[j]);
        }
    }

    #[test]
    fn double_gyre_values() {
        assert_eq!(eval(&DoubleGyre, [0.0, 0.0], 2.0), [0.0, 0.0]);
        let v = eval(&DoubleGyre, [1.0, 0.5], 0.0);
        assert!(v[0].abs() < 1e-16);
        assert!((v[1] + 0.1 * PI).abs() < 1e-15);
        for t in [0.0, 1.3, 7.7] {
            for x in [0.0, 0.4, 1.9] {
                assert_eq!(eval(&DoubleGyre, [x, 0.0], t)[1], 0.0);
            }
        }
    }

    #[test]
    fn artificial_ridge_values() {
        assert_eq!(eval(&ArtificialRidge, [0.0, 0.0], 0.0), [0.0, 0.0]);
        assert_eq!(eval(&ArtificialRidge, [1.0, 1.0], 0.0), [0.0, 0.0]);
        // 2 - 0 and -0 + 2^2
        assert_eq!(eval(&ArtificialRidge, [2.0, 0.0], 0.0), [2.0, 4.0]);
    }

    // Formula re-evaluation in refactored form, independent of the closures.
    #[test]
    fn analytic_fields_match_formulas() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let circ = CircularFlow::new(0.1, RingBand::Radial).unwrap();
        let wave = StandingWave::new(8.0 * PI, 7, 0.8).unwrap();
        for _ in 0..1000 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let t: f64 = rng.gen_range(0.0..15.0);

            let a = 0.1 * (PI * t / 5.0).sin();
            let b = 1.0 - 2.0 * a;
            let f = a * x[0] * x[0] + b * x[0];
            let expect = [
                -PI * 0.1 * (PI * f).sin() * (PI * x[1]).cos(),
                PI * 0.1 * (2.0 * a * x[0] + b) * (PI * f).cos() * (PI * x[1]).sin(),
            ];
            let got = eval(&DoubleGyre, x, t);
            for j in 0..2 {
                assert!((got[j] - expect[j]).abs() <= 1e-15 * (1.0 + expect[j].abs()));
            }

            assert_eq!(
                eval(&ArtificialRidge, x, t),
                [x[0] - x[1] * x[1], -x[1] + x[0] * x[0]]
            );

            let r2 = x[0] * x[0] + x[1] * x[1];
            let expect = if (0.81..=1.21).contains(&r2) {
                [x[1], -x[0]]
            } else {
                [0.0, 0.0]
            };
            // boundary rounding can flip within ulps of the band edges
            if (r2 - 0.81).abs() > 1e-12 && (r2 - 1.21).abs() > 1e-12 {
                assert_eq!(eval(&circ, x, t), expect);
            }

            let eps = 0.8 * (7.0 * x[1].atan2(x[0])).cos();
            let rate = 8.0 * PI * eps * (8.0 * PI * t).cos() / (1.0 + eps * (8.0 * PI * t).sin());
            let got = eval(&wave, x, t);
            for j in 0..2 {
                assert!((got[j] - rate * x[j]).abs() <= 1e-13 * (1.0 + (rate * x[j]).abs()));
            }
        }
    }

    #[test]
    fn evaluation_is_deterministic() {
        let x = [0.3, 0.77];
        assert_eq!(
            eval(&DoubleGyre, x, 4.1).map(f64::to_bits),
            eval(&DoubleGyre, x, 4.1).map(f64::to_bits)
        );
    }

    #[test]
    fn linear_fields() {
        let r = LinearField::<f64>::rotation();
        assert_eq!(eval(&r, [2.0, 3.0], 0.0), [3.0, -2.0]);
        let s = LinearField::saddle(1.5);
        assert_eq!(eval(&s, [2.0, 3.0], 0.0), [3.0, -4.5]);
        assert!(LinearField::new(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn single_precision_fields_evaluate() {
        let mut out = [0.0f32; 2];
        VelocityField::<f32>::velocity(&ArtificialRidge, &[2.0, 0.0], 0.0, &mut out);
        assert_eq!(out, [2.0, 4.0]);
        let g = DoubleGyre;
        VelocityField::<f32>::velocity(&g, &[1.0, 0.5], 0.0, &mut out);
        assert!((out[1] + 0.1 * std::f32::consts::PI).abs() < 1e-6);
    }
}

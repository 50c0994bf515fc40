//! Finite-time Lyapunov exponents from mesh flow maps, and the report that
//! compares them with LTVE.

mod bound;
mod eigen;

pub use bound::{bound_report, BoundReport, BOUND_SLACK};
pub use eigen::{jacobi_eigenvalues, lambda_max, JACOBI_TOL};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{TimeWindow, VelocityField};
use crate::integrate::{advect_into, IntegratorConfig};
use crate::ltve::{FieldMeta, MeshSpec, Quantity, ScalarField, TrajectorySet};
use crate::pool::with_workers;
use crate::scalar::Scalar;

/// Arrival positions `f(x)` at `t0 + T` of every mesh point.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMapField<F> {
    mesh: MeshSpec<F>,
    arrivals: Vec<F>,
}

impl<F: Scalar> FlowMapField<F> {
    pub fn new(mesh: MeshSpec<F>, arrivals: Vec<F>) -> Result<Self> {
        if arrivals.len() != mesh.len() * mesh.dimension() {
            return Err(Error::Validation(format!(
                "flow map has {} values, mesh needs {}",
                arrivals.len(),
                mesh.len() * mesh.dimension()
            )));
        }
        Ok(Self { mesh, arrivals })
    }

    /// Samples a known map on the mesh.
    pub fn from_fn(mesh: MeshSpec<F>, map: impl Fn(&[F], &mut [F])) -> Self {
        let n = mesh.dimension();
        let mut arrivals = vec![F::zero(); mesh.len() * n];
        for (i, out) in arrivals.chunks_exact_mut(n).enumerate() {
            map(&mesh.point(&mesh.multi_index(i)), out);
        }
        Self { mesh, arrivals }
    }

    /// Last samples of a trajectory set.
    pub fn from_set(set: &TrajectorySet<F>) -> Self {
        let arrivals = (0..set.len()).flat_map(|i| set.arrival(i)).collect();
        Self {
            mesh: set.mesh().clone(),
            arrivals,
        }
    }

    pub fn mesh(&self) -> &MeshSpec<F> {
        &self.mesh
    }

    pub fn arrivals(&self) -> &[F] {
        &self.arrivals
    }

    pub fn arrival(&self, linear: usize) -> &[F] {
        let n = self.mesh.dimension();
        &self.arrivals[linear * n..(linear + 1) * n]
    }

    /// Row-major Jacobian `J[r][c] = d f_r / d x_c` at a mesh index: central
    /// differences inside the mesh, one-sided differences on its faces.
    pub fn gradient(&self, index: &[usize]) -> Vec<F> {
        let n = self.mesh.dimension();
        let mut jac = vec![F::zero(); n * n];
        let mut lo_idx = index.to_vec();
        let mut hi_idx = index.to_vec();
        for c in 0..n {
            let i = index[c];
            lo_idx[c] = i.saturating_sub(1);
            hi_idx[c] = (i + 1).min(self.mesh.dims()[c] - 1);
            let span = self.mesh.point(&hi_idx)[c] - self.mesh.point(&lo_idx)[c];
            let fl = self.arrival(self.mesh.linear(&lo_idx));
            let fh = self.arrival(self.mesh.linear(&hi_idx));
            for r in 0..n {
                jac[r * n + c] = (fh[r] - fl[r]) / span;
            }
            lo_idx[c] = i;
            hi_idx[c] = i;
        }
        jac
    }

    pub fn deformation_tensor(&self, index: &[usize]) -> DeformationTensor<F> {
        DeformationTensor::from_gradient(self.mesh.dimension(), &self.gradient(index))
    }
}

/// Right Cauchy-Green tensor `J^T J`, symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationTensor<F> {
    n: usize,
    matrix: Vec<F>,
}

impl<F: Scalar> DeformationTensor<F> {
    pub fn from_gradient(n: usize, jac: &[F]) -> Self {
        let mut m = vec![F::zero(); n * n];
        for a in 0..n {
            for b in 0..n {
                let mut s = F::zero();
                for r in 0..n {
                    s += jac[r * n + a] * jac[r * n + b];
                }
                m[a * n + b] = s;
            }
        }
        let half = F::of(0.5);
        for a in 0..n {
            for b in a + 1..n {
                let s = half * (m[a * n + b] + m[b * n + a]);
                m[a * n + b] = s;
                m[b * n + a] = s;
            }
        }
        Self { n, matrix: m }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[F] {
        &self.matrix
    }

    pub fn get(&self, r: usize, c: usize) -> F {
        self.matrix[r * self.n + c]
    }

    pub fn lambda_max(&self) -> F {
        lambda_max(self.n, &self.matrix)
    }
}

/// `ln(sqrt(lambda_max)) / |T|`; NaN when `lambda_max` is not positive.
pub fn ftle_at<F: Scalar>(tensor: &DeformationTensor<F>, duration: F) -> F {
    let lam = tensor.lambda_max();
    if lam > F::zero() {
        lam.ln() / (F::of(2.0) * duration.abs())
    } else {
        F::nan()
    }
}

/// Integrates every mesh point and keeps only the arrival position.
pub fn flow_map<F: Scalar, V: VelocityField<F> + ?Sized>(
    field: &V,
    mesh: &MeshSpec<F>,
    window: &TimeWindow<F>,
    integrator: &IntegratorConfig,
    workers: usize,
) -> Result<FlowMapField<F>> {
    let n = mesh.dimension();
    if field.dimension() != n {
        return Err(Error::Usage(format!(
            "field is {}-dimensional but the mesh is {n}-dimensional",
            field.dimension()
        )));
    }
    let kn = window.samples * n;
    let mut arrivals = vec![F::zero(); mesh.len() * n];
    let results = with_workers(workers, || {
        arrivals
            .par_chunks_mut(n)
            .enumerate()
            .map_init(
                || vec![F::zero(); kn],
                |buf, (i, out)| {
                    let seed = mesh.point(&mesh.multi_index(i));
                    advect_into(field, &seed, window, integrator, mesh.domain(), buf)?;
                    for ((o, s), d) in out.iter_mut().zip(&seed).zip(&buf[kn - n..]) {
                        *o = *s + *d;
                    }
                    Ok(())
                },
            )
            .collect::<Vec<Result<()>>>()
    })?;
    results.into_iter().collect::<Result<()>>()?;
    FlowMapField::new(mesh.clone(), arrivals)
}

/// FTLE at every mesh point.
pub fn ftle_field<F: Scalar>(fm: &FlowMapField<F>, t0: F, duration: F, workers: usize) -> Result<ScalarField<F>> {
    let mesh = fm.mesh();
    let values = with_workers(workers, || {
        (0..mesh.len())
            .into_par_iter()
            .map(|i| ftle_at(&fm.deformation_tensor(&mesh.multi_index(i)), duration))
            .collect::<Vec<F>>()
    })?;
    let meta = FieldMeta {
        quantity: Quantity::Ftle,
        t0: t0.as_f64(),
        duration: duration.as_f64(),
        metric: "none".into(),
        scheme: "none".into(),
    };
    ScalarField::new(mesh.clone(), values, meta)
}

/// Flow map plus FTLE field in one call.
pub fn compute_ftle<F: Scalar, V: VelocityField<F> + ?Sized>(
    field: &V,
    mesh: &MeshSpec<F>,
    window: &TimeWindow<F>,
    integrator: &IntegratorConfig,
    workers: usize,
) -> Result<ScalarField<F>> {
    let fm = flow_map(field, mesh, window, integrator, workers)?;
    ftle_field(&fm, window.t0, window.duration, workers)
}

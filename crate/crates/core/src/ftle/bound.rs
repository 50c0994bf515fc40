//! Comparison of the two-sample LTVE field against FTLE.
//!
//! With `k = 2` and the plain Euclidean metric, the LTV at `x` reduces to
//! `max_u |f(x + delta u) - f(x) - delta u|`, and the gap to FTLE is bounded
//! by `max(ln(1 + 1/sqrt(eta*)), ln(1 + 1/sqrt(lambda*))) / |T|` where
//! `lambda*` and `eta*` are the smallest top eigenvalues of the deformation
//! tensors of `f` and `g(x) = f(x) - x`.

use std::fmt;

use rayon::prelude::*;

use crate::error::Result;
use crate::fields::{TimeWindow, VelocityField};
use crate::ftle::{ftle_field, DeformationTensor, FlowMapField};
use crate::integrate::IntegratorConfig;
use crate::ltve::{compute_field_from_set, integrate_mesh, LtveConfig, MeshSpec, SchemeOrder, TrajectorySet};
use crate::metrics::MetricKind;
use crate::pool::with_workers;
use crate::scalar::Scalar;

/// Absolute tolerance for floating-point roundoff when the bound is tight.
pub const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<F> {
    pub duration: F,
    pub lambda_star: F,
    pub eta_star: F,
    pub theoretical_bound: F,
    pub observed_max_diff: F,
    /// Mesh points where both exponents are defined.
    pub compared: usize,
    pub pass: bool,
    pub warning: Option<String>,
}

impl<F: Scalar> BoundReport<F> {
    /// Flat `key=value` lines.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "T={}\nlambda_star={}\neta_star={}\ntheoretical_bound={}\nobserved_max_diff={}\ncompared_points={}\npass={}\n",
            self.duration,
            self.lambda_star,
            self.eta_star,
            self.theoretical_bound,
            self.observed_max_diff,
            self.compared,
            self.pass
        );
        if let Some(w) = &self.warning {
            s.push_str(&format!("warning={w}\n"));
        }
        s
    }
}

impl<F: Scalar> fmt::Display for BoundReport<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Integrates the mesh over `window` and checks the LTVE/FTLE gap against
/// the analytic bound. Only the first and last samples enter the LTVE side.
pub fn bound_report<F: Scalar, V: VelocityField<F> + ?Sized>(
    field: &V,
    mesh: &MeshSpec<F>,
    window: &TimeWindow<F>,
    integrator: &IntegratorConfig,
    workers: usize,
) -> Result<BoundReport<F>> {
    let full = integrate_mesh(field, mesh, window, integrator, workers)?;
    let n = mesh.dimension();
    let two = TimeWindow::new(window.t0, window.duration, 2)?;
    let mut ends = Vec::with_capacity(mesh.len() * 2 * n);
    for i in 0..full.len() {
        let t = full.displacement(i);
        ends.extend_from_slice(&t[..n]);
        ends.extend_from_slice(&t[t.len() - n..]);
    }
    let stopped = (0..full.len()).map(|i| full.stopped_at(i).map(|_| 1)).collect();
    let set = TrajectorySet::new(mesh.clone(), two, full.descriptor().to_string(), ends, stopped)?;
    drop(full);

    let cfg = LtveConfig::new(two)
        .with_metric(MetricKind::EuclideanL2)
        .with_scheme(SchemeOrder::First)
        .with_workers(workers);
    let ltve = compute_field_from_set(&set, &cfg)?.field;
    let fm = FlowMapField::from_set(&set);
    let ftle = ftle_field(&fm, window.t0, window.duration, workers)?;

    let (lambda_star, eta_star) = with_workers(workers, || {
        (0..mesh.len())
            .into_par_iter()
            .map(|i| {
                let jac = fm.gradient(&mesh.multi_index(i));
                let lf = DeformationTensor::from_gradient(n, &jac).lambda_max();
                let mut g = jac;
                for d in 0..n {
                    g[d * n + d] -= F::one();
                }
                let lg = DeformationTensor::from_gradient(n, &g).lambda_max();
                (lf, lg)
            })
            .reduce(|| (F::infinity(), F::infinity()), |a, b| (a.0.min(b.0), a.1.min(b.1)))
    })?;

    let mut observed = F::zero();
    let mut compared = 0;
    for (a, b) in ltve.values().iter().zip(ftle.values()) {
        if !a.is_nan() && !b.is_nan() {
            observed = observed.max((*a - *b).abs());
            compared += 1;
        }
    }

    let inv_t = F::one() / window.duration.abs();
    let ln1p_inv_sqrt = |v: F| (F::one() + F::one() / v.sqrt()).ln();
    let degenerate = !(lambda_star > F::zero() && eta_star > F::zero());
    let (theoretical_bound, warning) = if degenerate {
        (
            F::infinity(),
            Some(format!(
                "lambda_star={lambda_star} eta_star={eta_star}: the bound is infinite and holds trivially"
            )),
        )
    } else {
        (inv_t * ln1p_inv_sqrt(eta_star).max(ln1p_inv_sqrt(lambda_star)), None)
    };
    let pass = degenerate || observed <= theoretical_bound + F::of(BOUND_SLACK);
    Ok(BoundReport {
        duration: window.duration,
        lambda_star,
        eta_star,
        theoretical_bound,
        observed_max_diff: observed,
        compared,
        pass,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{DomainBox, LinearField};
    use crate::integrate::BoundaryPolicy;

    #[test]
    fn diagonal_flow_is_tight() {
        let field = LinearField::new(2, vec![1.0, 0.0, 0.0, -1.0]).unwrap();
        let mesh = MeshSpec::new(DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(), 0.1).unwrap();
        let window = TimeWindow::new(0.0, 1.0, 2).unwrap();
        let integ = IntegratorConfig::new(400, BoundaryPolicy::Open).unwrap();
        let r = bound_report(&field, &mesh, &window, &integ, 1).unwrap();
        let e = std::f64::consts::E;
        assert!((r.lambda_star - e * e).abs() < 1e-8);
        assert!((r.eta_star - (e - 1.0) * (e - 1.0)).abs() < 1e-8);
        let exact = (e / (e - 1.0)).ln();
        assert!((r.theoretical_bound - exact).abs() < 1e-8);
        assert!((r.observed_max_diff - exact).abs() < 1e-8);
        assert!(r.pass);
        assert_eq!(r.compared, mesh.len());
        assert!(r.to_text().contains("pass=true"));
    }

    #[test]
    fn zero_field_warns() {
        let field = LinearField::<f64>::zero(2);
        let mesh = MeshSpec::new(DomainBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(), 0.25).unwrap();
        let window = TimeWindow::new(0.0, 1.0, 2).unwrap();
        let r = bound_report(&field, &mesh, &window, &IntegratorConfig::default(), 1).unwrap();
        assert_eq!(r.eta_star, 0.0);
        assert!(r.theoretical_bound.is_infinite());
        assert!(r.pass && r.warning.is_some());
        assert_eq!(r.compared, 0);
    }
}

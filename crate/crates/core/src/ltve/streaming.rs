//! Layer-by-layer evaluation with bounded trajectory residency.
//!
//! Layers are slices orthogonal to the longest axis. Evaluating layer `L`
//! needs layers `L - below ..= L + above`, where `below`/`above` are the
//! scheme's reach along that axis; anything older is dropped before the next
//! layer is integrated, so at most `below + above + 1` layers are resident.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::error::Result;
use crate::fields::VelocityField;
use crate::integrate::advect_into;
use crate::ltve::compute::{check_dimension, Evaluator, Store};
use crate::ltve::{LtveConfig, LtveOutput, MeshSpec, NeighborhoodScheme, ScalarField, StreamStats, NO_ARGMAX};
use crate::pool::with_workers;
use crate::scalar::Scalar;

struct Layering {
    axis: usize,
    layer_len: usize,
    /// Per-axis stride inside a layer; zero on the layer axis.
    strides: Vec<usize>,
    /// Mesh dims with the layer axis removed, axis-0 major.
    other: Vec<(usize, usize)>,
}

impl Layering {
    fn new<F: Scalar>(mesh: &MeshSpec<F>) -> Self {
        let axis = mesh.layer_axis();
        let dims = mesh.dims();
        let mut strides = vec![0; dims.len()];
        let mut s = 1;
        for j in (0..dims.len()).rev() {
            if j != axis {
                strides[j] = s;
                s *= dims[j];
            }
        }
        Self {
            axis,
            layer_len: s,
            strides,
            other: (0..dims.len()).filter(|j| *j != axis).map(|j| (j, dims[j])).collect(),
        }
    }

    fn index_into(&self, layer: usize, mut p: usize, out: &mut [usize]) {
        out[self.axis] = layer;
        for &(j, _) in &self.other {
            out[j] = p / self.strides[j];
            p %= self.strides[j];
        }
    }
}

struct LayerStore<'a, F> {
    layers: &'a VecDeque<Vec<F>>,
    slot: usize,
    kn: usize,
    in_layer: &'a [isize],
    across: &'a [isize],
}

impl<F> Store<F> for LayerStore<'_, F> {
    #[inline]
    fn center(&self, c: usize) -> &[F] {
        &self.layers[self.slot][c * self.kn..(c + 1) * self.kn]
    }
    #[inline]
    fn neighbor(&self, c: usize, offset: usize) -> &[F] {
        let layer = &self.layers[(self.slot as isize + self.across[offset]) as usize];
        let j = (c as isize + self.in_layer[offset]) as usize;
        &layer[j * self.kn..(j + 1) * self.kn]
    }
}

/// Same output as full storage, holding only the layers the neighbourhood
/// can reach.
pub fn compute_field_streaming<F: Scalar, V: VelocityField<F> + ?Sized>(
    field: &V,
    mesh: &MeshSpec<F>,
    cfg: &LtveConfig<F>,
) -> Result<LtveOutput<F>> {
    check_dimension(field, mesh)?;
    let scheme = cfg.validate(mesh.dimension())?;
    with_workers(cfg.workers, || stream(field, mesh, &scheme, cfg))?
}

fn stream<F: Scalar, V: VelocityField<F> + ?Sized>(
    field: &V,
    mesh: &MeshSpec<F>,
    scheme: &NeighborhoodScheme,
    cfg: &LtveConfig<F>,
) -> Result<LtveOutput<F>> {
    let n = mesh.dimension();
    let kn = cfg.window.samples * n;
    let lay = Layering::new(mesh);
    let count = mesh.dims()[lay.axis];
    let below = scheme.reach_below(lay.axis);
    let above = scheme.reach_above(lay.axis);

    let ev = Evaluator::new(mesh, scheme, cfg.metric, cfg.normalize_by_offset_length, cfg.window.duration);
    let in_layer: Vec<isize> = ev
        .offsets()
        .iter()
        .map(|u| u.iter().zip(&lay.strides).map(|(c, s)| *c as isize * *s as isize).sum())
        .collect();
    let across: Vec<isize> = ev.offsets().iter().map(|u| u[lay.axis] as isize).collect();

    let mut values = vec![F::nan(); mesh.len()];
    let mut argmax = vec![NO_ARGMAX; mesh.len()];
    let mut stopped = 0usize;
    let mut layers: VecDeque<Vec<F>> = VecDeque::new();
    let mut front = 0usize;
    let mut peak_layers = 0usize;

    for current in 0..count {
        while front + below < current {
            layers.pop_front();
            front += 1;
        }
        let last = (current + above).min(count - 1);
        while front + layers.len() <= last {
            let layer = front + layers.len();
            let mut buf = vec![F::zero(); lay.layer_len * kn];
            let stops = buf
                .par_chunks_mut(kn)
                .enumerate()
                .map_init(
                    || vec![0usize; n],
                    |idx, (p, out)| {
                        lay.index_into(layer, p, idx);
                        let seed = mesh.point(idx);
                        advect_into(field, &seed, &cfg.window, &cfg.integrator, mesh.domain(), out)
                    },
                )
                .collect::<Vec<Result<Option<usize>>>>();
            for s in stops {
                if s?.is_some() {
                    stopped += 1;
                }
            }
            layers.push_back(buf);
            peak_layers = peak_layers.max(layers.len());
        }

        let store = LayerStore {
            layers: &layers,
            slot: current - front,
            kn,
            in_layer: &in_layer,
            across: &across,
        };
        let results: Vec<(usize, F, u16)> = (0..lay.layer_len)
            .into_par_iter()
            .map_init(
                || (ev.metric_evaluator(), vec![0usize; n]),
                |(m, idx), p| {
                    lay.index_into(current, p, idx);
                    let (ltv, arg) = ev.ltv(idx, p, &store, m).expect("validated neighbourhood");
                    (mesh.linear(idx), ev.exponent(ltv), arg)
                },
            )
            .collect();
        for (lin, v, a) in results {
            values[lin] = v;
            argmax[lin] = a;
        }
    }

    let field = ScalarField::new(mesh.clone(), values, cfg.meta())?;
    Ok(LtveOutput {
        field,
        argmax,
        stopped,
        stats: StreamStats {
            layer_axis: lay.axis,
            layer_len: lay.layer_len,
            peak_resident: peak_layers * lay.layer_len,
            peak_layers,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{DomainBox, LinearField, TimeWindow};
    use crate::ltve::{compute_field, SchemeOrder, Storage};
    use crate::metrics::MetricKind;

    fn bits(f: &ScalarField<f64>) -> Vec<u64> {
        f.values().iter().map(|v| v.to_bits()).collect()
    }

    #[test]
    fn matches_full_storage_on_a_saddle() {
        let field = LinearField::saddle(0.8);
        let mesh = MeshSpec::new(DomainBox::new(vec![-1.0, -0.5], vec![1.0, 0.5]).unwrap(), 0.1).unwrap();
        let window = TimeWindow::new(0.0, 1.5, 6).unwrap();
        for scheme in [SchemeOrder::First, SchemeOrder::Second, SchemeOrder::Third] {
            for metric in [MetricKind::NormalizedL2, MetricKind::DiscreteFrechet, MetricKind::Hausdorff] {
                let cfg = LtveConfig::new(window).with_scheme(scheme).with_metric(metric);
                let full = compute_field(&field, &mesh, &cfg).unwrap();
                let streamed = compute_field(&field, &mesh, &cfg.clone().with_storage(Storage::Streaming)).unwrap();
                assert_eq!(bits(&full.field), bits(&streamed.field));
                assert_eq!(full.argmax, streamed.argmax);
                assert_eq!(full.stopped, streamed.stopped);
                let w = NeighborhoodScheme::new(scheme, 2).unwrap();
                let expect = w.reach_below(0) + w.reach_above(0) + 1;
                assert_eq!(streamed.stats.peak_layers, expect);
                assert_eq!(streamed.stats.layer_len, 11);
            }
        }
    }

    #[test]
    fn one_dimensional_layers_are_points() {
        let field = LinearField::new(1, vec![0.7]).unwrap();
        let mesh = MeshSpec::new(DomainBox::new(vec![0.0], vec![1.0]).unwrap(), 0.125).unwrap();
        let window = TimeWindow::new(0.0, 1.0, 4).unwrap();
        let cfg = LtveConfig::new(window).with_scheme(SchemeOrder::Second);
        let full = compute_field(&field, &mesh, &cfg).unwrap();
        let streamed = compute_field(&field, &mesh, &cfg.clone().with_storage(Storage::Streaming)).unwrap();
        assert_eq!(bits(&full.field), bits(&streamed.field));
        assert_eq!(streamed.stats.layer_len, 1);
        assert!(streamed.stats.peak_resident <= 3);
    }
}

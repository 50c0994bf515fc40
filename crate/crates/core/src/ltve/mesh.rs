use crate::error::{Error, Result};
use crate::fields::DomainBox;
use crate::scalar::Scalar;

/// Uniform Cartesian mesh with spacing `delta` on every axis, anchored at the
/// lower corner of the domain. Points are ordered axis-0 major.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec<F> {
    domain: DomainBox<F>,
    delta: F,
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl<F: Scalar> MeshSpec<F> {
    /// `dims[j] = floor((hi_j - lo_j) / delta) + 1`; a quotient within 1e-9 of
    /// an integer is treated as that integer so `delta = 1/249` covers a unit
    /// side with 250 points.
    pub fn new(domain: DomainBox<F>, delta: F) -> Result<Self> {
        if !(delta.is_finite() && delta > F::zero()) {
            return Err(Error::invalid("delta", format!("must be positive, got {delta}")));
        }
        let mut dims = Vec::with_capacity(domain.dimension());
        for j in 0..domain.dimension() {
            let ratio = (domain.extent(j) / delta).as_f64();
            let cells = (ratio + 1e-9).floor();
            if !cells.is_finite() || cells > 1e9 {
                return Err(Error::invalid("delta", "mesh would be too large"));
            }
            let d = cells as usize + 1;
            if d < 2 {
                return Err(Error::invalid(
                    "delta",
                    format!("axis {j} gets {d} mesh point(s); need at least 2"),
                ));
            }
            dims.push(d);
        }
        Ok(Self::from_parts(domain, delta, dims))
    }

    fn from_parts(domain: DomainBox<F>, delta: F, dims: Vec<usize>) -> Self {
        let mut strides = vec![1usize; dims.len()];
        for j in (0..dims.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * dims[j + 1];
        }
        Self {
            domain,
            delta,
            dims,
            strides,
        }
    }

    pub fn domain(&self) -> &DomainBox<F> {
        &self.domain
    }

    pub fn delta(&self) -> F {
        self.delta
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn linear(&self, index: &[usize]) -> usize {
        index.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index_into(&self, mut linear: usize, out: &mut [usize]) {
        for (o, s) in out.iter_mut().zip(&self.strides) {
            *o = linear / s;
            linear %= s;
        }
    }

    pub fn multi_index(&self, linear: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        self.multi_index_into(linear, &mut out);
        out
    }

    /// `lo + delta * index`, clamped to the domain against rounding.
    pub fn point_into(&self, index: &[usize], out: &mut [F]) {
        for (j, o) in out.iter_mut().enumerate() {
            let v = self.domain.lo()[j] + self.delta * F::of_usize(index[j]);
            *o = v.min(self.domain.hi()[j]);
        }
    }

    pub fn point(&self, index: &[usize]) -> Vec<F> {
        let mut out = vec![F::zero(); self.dims.len()];
        self.point_into(index, &mut out);
        out
    }

    /// Axis the streaming layers are stacked along (longest side).
    pub fn layer_axis(&self) -> usize {
        self.domain.longest_axis()
    }

    /// Number of mesh points in one layer orthogonal to `layer_axis`.
    pub fn layer_len(&self) -> usize {
        self.len() / self.dims[self.layer_axis()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_follow_spacing() {
        let d = DomainBox::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        let m = MeshSpec::new(d.clone(), 1.0 / 249.0).unwrap();
        assert_eq!(m.dims(), &[499, 250]);
        let m = MeshSpec::new(d.clone(), 0.004016).unwrap();
        assert_eq!(m.dims(), &[499, 250]);
        let m = MeshSpec::new(d.clone(), 1.0 / 99.0).unwrap();
        assert_eq!(m.dims(), &[199, 100]);
        assert_eq!(m.layer_axis(), 0);
        assert_eq!(m.layer_len(), 100);
        assert!(MeshSpec::new(d.clone(), 1.5).is_err());
        assert!(MeshSpec::new(d, 0.0).is_err());
    }

    #[test]
    fn index_round_trip_and_points() {
        let d = DomainBox::new(vec![-2.0, -2.0, 0.0], vec![2.0, 2.0, 1.0]).unwrap();
        let m = MeshSpec::new(d, 0.5).unwrap();
        assert_eq!(m.dims(), &[9, 9, 3]);
        for lin in [0, 1, 17, 200, m.len() - 1] {
            let idx = m.multi_index(lin);
            assert_eq!(m.linear(&idx), lin);
        }
        assert_eq!(m.point(&[8, 0, 2]), vec![2.0, -2.0, 1.0]);
        let mut p = vec![0.0; 3];
        for lin in 0..m.len() {
            m.point_into(&m.multi_index(lin), &mut p);
            assert!(m.domain().contains(&p));
        }
    }
}

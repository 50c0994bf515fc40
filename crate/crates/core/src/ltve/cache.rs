//! Trajectory sets and the `TRJ1` dump.
//!
//! Layout, all little-endian: magic `TRJ1`, `u32 n`, `u32 k`, `n x u32`
//! mesh dims, `f64` delta, t0 and T, `n x f64` lower and upper corners,
//! `u32` descriptor length and UTF-8 descriptor; then one record per seed in
//! mesh order: `u64` seed index, `u32` stop index (`u32::MAX` if the particle
//! never stopped), `k * n` `f64` samples. Samples are stored as displacements
//! from the seed, which the header's mesh determines; this keeps cached runs
//! bit-identical to direct ones.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{DomainBox, TimeWindow, VelocityField};
use crate::integrate::{DiscreteTrajectory, IntegratorConfig};
use crate::ltve::{integrate_mesh, MeshSpec};
use crate::scalar::Scalar;

const MAGIC: &[u8; 4] = b"TRJ1";
const NOT_STOPPED: u32 = u32::MAX;

/// Trajectories of every mesh point over one window, in mesh order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet<F> {
    mesh: MeshSpec<F>,
    window: TimeWindow<F>,
    descriptor: String,
    displacements: Vec<F>,
    stopped: Vec<Option<usize>>,
}

impl<F: Scalar> TrajectorySet<F> {
    pub fn new(
        mesh: MeshSpec<F>,
        window: TimeWindow<F>,
        descriptor: String,
        displacements: Vec<F>,
        stopped: Vec<Option<usize>>,
    ) -> Result<Self> {
        let expect = mesh.len() * window.samples * mesh.dimension();
        if displacements.len() != expect || stopped.len() != mesh.len() {
            return Err(Error::Validation(format!(
                "trajectory set holds {} values and {} stop flags, mesh needs {expect} and {}",
                displacements.len(),
                stopped.len(),
                mesh.len()
            )));
        }
        Ok(Self {
            mesh,
            window,
            descriptor,
            displacements,
            stopped,
        })
    }

    pub fn mesh(&self) -> &MeshSpec<F> {
        &self.mesh
    }

    pub fn window(&self) -> &TimeWindow<F> {
        &self.window
    }

    pub fn samples(&self) -> usize {
        self.window.samples
    }

    pub fn dimension(&self) -> usize {
        self.mesh.dimension()
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn len(&self) -> usize {
        self.stopped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stopped.is_empty()
    }

    pub fn displacements(&self) -> &[F] {
        &self.displacements
    }

    /// Flat `k * n` displacement samples of seed `i`.
    pub fn displacement(&self, i: usize) -> &[F] {
        let kn = self.samples() * self.dimension();
        &self.displacements[i * kn..(i + 1) * kn]
    }

    pub fn seed(&self, i: usize) -> Vec<F> {
        self.mesh.point(&self.mesh.multi_index(i))
    }

    /// Absolute positions of seed `i`.
    pub fn trajectory(&self, i: usize) -> DiscreteTrajectory<F> {
        let seed = self.seed(i);
        let mut samples = self.displacement(i).to_vec();
        for p in samples.chunks_exact_mut(seed.len()) {
            for (v, s) in p.iter_mut().zip(&seed) {
                *v += *s;
            }
        }
        DiscreteTrajectory::new(seed.len(), samples, self.stopped[i]).expect("set shape is validated")
    }

    /// Final position `f(x)` of seed `i`.
    pub fn arrival(&self, i: usize) -> Vec<F> {
        let n = self.dimension();
        let d = self.displacement(i);
        self.seed(i).iter().zip(&d[d.len() - n..]).map(|(s, v)| *s + *v).collect()
    }

    pub fn stopped_at(&self, i: usize) -> Option<usize> {
        self.stopped[i]
    }

    pub fn stopped_count(&self) -> usize {
        self.stopped.iter().filter(|s| s.is_some()).count()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.dimension();
        let kn = self.samples() * n;
        let mut b = Vec::with_capacity(64 + self.len() * (12 + 8 * kn));
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&(n as u32).to_le_bytes());
        b.extend_from_slice(&(self.samples() as u32).to_le_bytes());
        for d in self.mesh.dims() {
            b.extend_from_slice(&(*d as u32).to_le_bytes());
        }
        for v in [self.mesh.delta(), self.window.t0, self.window.duration] {
            b.extend_from_slice(&v.as_f64().to_le_bytes());
        }
        for v in self.mesh.domain().lo().iter().chain(self.mesh.domain().hi()) {
            b.extend_from_slice(&v.as_f64().to_le_bytes());
        }
        b.extend_from_slice(&(self.descriptor.len() as u32).to_le_bytes());
        b.extend_from_slice(self.descriptor.as_bytes());
        for i in 0..self.len() {
            b.extend_from_slice(&(i as u64).to_le_bytes());
            let s = self.stopped[i].map_or(NOT_STOPPED, |s| s as u32);
            b.extend_from_slice(&s.to_le_bytes());
            for v in self.displacement(i) {
                b.extend_from_slice(&v.as_f64().to_le_bytes());
            }
        }
        b
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(&self.to_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, at: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Parse("missing TRJ1 magic".into()));
        }
        let n = r.u32()? as usize;
        let k = r.u32()? as usize;
        if n == 0 || n > 12 || k < 2 {
            return Err(Error::Parse(format!("implausible TRJ1 header n={n} k={k}")));
        }
        let dims: Vec<usize> = (0..n).map(|_| r.u32().map(|d| d as usize)).collect::<Result<_>>()?;
        let delta = r.f64()?;
        let t0 = r.f64()?;
        let duration = r.f64()?;
        let lo: Vec<F> = (0..n).map(|_| r.f64().map(F::of)).collect::<Result<_>>()?;
        let hi: Vec<F> = (0..n).map(|_| r.f64().map(F::of)).collect::<Result<_>>()?;
        let dlen = r.u32()? as usize;
        let descriptor = std::str::from_utf8(r.take(dlen)?)
            .map_err(|_| Error::Parse("TRJ1 descriptor is not UTF-8".into()))?
            .to_string();
        let mesh = MeshSpec::new(DomainBox::new(lo, hi)?, F::of(delta))?;
        if mesh.dims() != dims.as_slice() {
            return Err(Error::Parse(format!(
                "TRJ1 dims {dims:?} disagree with the recorded domain and spacing ({:?})",
                mesh.dims()
            )));
        }
        let window = TimeWindow::new(F::of(t0), F::of(duration), k)?;
        let kn = k * n;
        let mut displacements = Vec::with_capacity(mesh.len() * kn);
        let mut stopped = Vec::with_capacity(mesh.len());
        for i in 0..mesh.len() {
            let seed = r.u64()?;
            if seed != i as u64 {
                return Err(Error::Parse(format!("TRJ1 record {i} carries seed index {seed}")));
            }
            let s = r.u32()?;
            stopped.push((s != NOT_STOPPED).then_some(s as usize));
            for _ in 0..kn {
                displacements.push(F::of(r.f64()?));
            }
        }
        if r.at != bytes.len() {
            return Err(Error::Parse("trailing bytes after the last TRJ1 record".into()));
        }
        Self::new(mesh, window, descriptor, displacements, stopped)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Reads a dump and refuses it unless it was produced for exactly this
    /// mesh, window and (when given) field descriptor.
    pub fn load(path: &Path, mesh: &MeshSpec<F>, window: &TimeWindow<F>, descriptor: Option<&str>) -> Result<Self> {
        let set = Self::read(path)?;
        set.check(mesh, window, descriptor)?;
        Ok(set)
    }

    pub fn check(&self, mesh: &MeshSpec<F>, window: &TimeWindow<F>, descriptor: Option<&str>) -> Result<()> {
        let mismatch = |what: &str, have: String, want: String| {
            Err(Error::CacheMismatch(format!("{what}: cache has {have}, requested {want}")))
        };
        if self.samples() != window.samples {
            return mismatch("k", self.samples().to_string(), window.samples.to_string());
        }
        if self.window.t0 != window.t0 || self.window.duration != window.duration {
            return mismatch(
                "time window",
                format!("t0={} T={}", self.window.t0, self.window.duration),
                format!("t0={} T={}", window.t0, window.duration),
            );
        }
        if self.mesh.dims() != mesh.dims() || self.mesh.delta() != mesh.delta() {
            return mismatch(
                "mesh",
                format!("dims={:?} delta={}", self.mesh.dims(), self.mesh.delta()),
                format!("dims={:?} delta={}", mesh.dims(), mesh.delta()),
            );
        }
        if self.mesh.domain() != mesh.domain() {
            return mismatch("domain", format!("{:?}", self.mesh.domain()), format!("{:?}", mesh.domain()));
        }
        if let Some(d) = descriptor {
            if d != self.descriptor {
                return mismatch("field", self.descriptor.clone(), d.to_string());
            }
        }
        Ok(())
    }
}

/// Integrates every mesh point and writes the dump to `path`.
pub fn trajectory_cache<F: Scalar, V: VelocityField<F> + ?Sized>(
    field: &V,
    mesh: &MeshSpec<F>,
    window: &TimeWindow<F>,
    integrator: &IntegratorConfig,
    workers: usize,
    path: &Path,
) -> Result<TrajectorySet<F>> {
    let set = integrate_mesh(field, mesh, window, integrator, workers)?;
    set.write(path)?;
    Ok(set)
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(len).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Parse("truncated TRJ1 data".into()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

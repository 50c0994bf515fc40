//! Scalar fields on a mesh and their CSV / `FLD1` encodings.
//!
//! CSV: one header line
//! `# <QTY> n=<n> dims=<d0,d1,...> delta=<d> t0=<t0> T=<T> metric=<tag> scheme=<order>`
//! followed by one row per grid line along the last axis, rows in axis-0
//! major order. Undefined cells are empty.
//!
//! `FLD1`: the magic bytes, a little-endian `u32` header length, the same
//! header text (without the leading `# `), then one little-endian `f64` per
//! mesh point in mesh order, NaN for undefined cells.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::DomainBox;
use crate::ltve::MeshSpec;
use crate::scalar::Scalar;

const FLD_MAGIC: &[u8; 4] = b"FLD1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Ltve,
    Ftle,
}

impl Quantity {
    pub fn tag(&self) -> &'static str {
        match self {
            Quantity::Ltve => "LTVE",
            Quantity::Ftle => "FTLE",
        }
    }
}

/// Provenance recorded in file headers.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMeta {
    pub quantity: Quantity,
    pub t0: f64,
    pub duration: f64,
    pub metric: String,
    pub scheme: String,
}

/// One value per mesh point; NaN marks an undefined value.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<F> {
    mesh: MeshSpec<F>,
    values: Vec<F>,
    meta: FieldMeta,
}

impl<F: Scalar> ScalarField<F> {
    pub fn new(mesh: MeshSpec<F>, values: Vec<F>, meta: FieldMeta) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::Validation(format!(
                "field has {} values for a mesh of {} points",
                values.len(),
                mesh.len()
            )));
        }
        Ok(Self { mesh, values, meta })
    }

    pub fn mesh(&self) -> &MeshSpec<F> {
        &self.mesh
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn meta(&self) -> &FieldMeta {
        &self.meta
    }

    pub fn get(&self, index: &[usize]) -> F {
        self.values[self.mesh.linear(index)]
    }

    pub fn is_defined(&self, linear: usize) -> bool {
        !self.values[linear].is_nan()
    }

    pub fn defined(&self) -> impl Iterator<Item = F> + '_ {
        self.values.iter().copied().filter(|v| !v.is_nan())
    }

    pub fn undefined_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_nan()).count()
    }

    /// Nearest-rank quantile of the defined values, `q` in `[0, 1]`.
    pub fn quantile(&self, q: f64) -> Option<F> {
        let mut v: Vec<F> = self.defined().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(|a, b| a.partial_cmp(b).expect("defined values are not NaN"));
        let rank = ((q.clamp(0.0, 1.0) * v.len() as f64).ceil() as usize).clamp(1, v.len());
        Some(v[rank - 1])
    }

    pub fn max_abs(&self) -> Option<F> {
        self.defined().map(F::abs).reduce(F::max)
    }

    pub fn header(&self) -> String {
        let dims: Vec<String> = self.mesh.dims().iter().map(usize::to_string).collect();
        format!(
            "{} n={} dims={} delta={} t0={} T={} metric={} scheme={}",
            self.meta.quantity.tag(),
            self.mesh.dimension(),
            dims.join(","),
            self.mesh.delta().as_f64(),
            self.meta.t0,
            self.meta.duration,
            self.meta.metric,
            self.meta.scheme
        )
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str("# ");
        s.push_str(&self.header());
        s.push('\n');
        let last = *self.mesh.dims().last().expect("mesh has an axis");
        for row in self.values.chunks(last) {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                if !v.is_nan() {
                    let _ = write!(s, "{}", v.as_f64());
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn to_fld_bytes(&self) -> Vec<u8> {
        let header = self.header();
        let mut buf = Vec::with_capacity(8 + header.len() + 8 * self.values.len());
        buf.extend_from_slice(FLD_MAGIC);
        buf.extend_from_slice(&(header.len() as u32).to_le_bytes());
        buf.extend_from_slice(header.as_bytes());
        for v in &self.values {
            let x = if v.is_nan() { f64::NAN } else { v.as_f64() };
            buf.extend_from_slice(&x.to_le_bytes());
        }
        buf
    }

    pub fn write_fld(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_fld_bytes())?;
        Ok(())
    }

    /// Decodes `FLD1` bytes. The header does not record the domain, so the
    /// caller supplies the lower corner; the upper corner is reconstructed
    /// from the spacing and point counts.
    pub fn from_fld_bytes(bytes: &[u8], lo: &[F]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..4] != FLD_MAGIC {
            return Err(Error::Parse("missing FLD1 magic".into()));
        }
        let hlen = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
        let header = bytes
            .get(8..8 + hlen)
            .and_then(|h| std::str::from_utf8(h).ok())
            .ok_or_else(|| Error::Parse("truncated FLD1 header".into()))?;
        let parsed = ParsedHeader::parse(header)?;
        let body = &bytes[8 + hlen..];
        let count: usize = parsed.dims.iter().product();
        if body.len() != 8 * count {
            return Err(Error::Parse(format!(
                "FLD1 body holds {} bytes, expected {}",
                body.len(),
                8 * count
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| F::of(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect();
        let mesh = parsed.mesh(lo)?;
        Self::new(mesh, values, parsed.meta)
    }

    pub fn read_fld(path: &Path, lo: &[F]) -> Result<Self> {
        Self::from_fld_bytes(&fs::read(path)?, lo)
    }

    pub fn from_csv(text: &str, lo: &[F]) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| Error::Parse("missing CSV header line".into()))?;
        let parsed = ParsedHeader::parse(header)?;
        let mut values = Vec::new();
        for line in lines {
            for cell in line.split(',') {
                let cell = cell.trim();
                if cell.is_empty() {
                    values.push(F::nan());
                } else {
                    let v: f64 = cell
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad CSV cell {cell:?}")))?;
                    values.push(F::of(v));
                }
            }
        }
        let mesh = parsed.mesh(lo)?;
        Self::new(mesh, values, parsed.meta)
    }
}

struct ParsedHeader {
    dims: Vec<usize>,
    delta: f64,
    meta: FieldMeta,
}

impl ParsedHeader {
    fn parse(header: &str) -> Result<Self> {
        let mut parts = header.split_whitespace();
        let quantity = match parts.next() {
            Some("LTVE") => Quantity::Ltve,
            Some("FTLE") => Quantity::Ftle,
            other => return Err(Error::Parse(format!("unknown field quantity {other:?}"))),
        };
        let mut dims = None;
        let mut delta = None;
        let mut t0 = None;
        let mut duration = None;
        let mut metric = String::new();
        let mut scheme = String::new();
        let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Parse(format!("bad header number {v:?}")));
        for kv in parts {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header entry {kv:?}")))?;
            match k {
                "n" => {}
                "dims" => {
                    dims = Some(
                        v.split(',')
                            .map(|d| d.parse::<usize>().map_err(|_| Error::Parse(format!("bad dims {v:?}"))))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "delta" => delta = Some(num(v)?),
                "t0" => t0 = Some(num(v)?),
                "T" => duration = Some(num(v)?),
                "metric" => metric = v.to_string(),
                "scheme" => scheme = v.to_string(),
                _ => return Err(Error::Parse(format!("unknown header key {k:?}"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("header lacks {k}"));
        Ok(Self {
            dims: dims.ok_or_else(|| missing("dims"))?,
            delta: delta.ok_or_else(|| missing("delta"))?,
            meta: FieldMeta {
                quantity,
                t0: t0.ok_or_else(|| missing("t0"))?,
                duration: duration.ok_or_else(|| missing("T"))?,
                metric,
                scheme,
            },
        })
    }

    fn mesh<F: Scalar>(&self, lo: &[F]) -> Result<MeshSpec<F>> {
        if lo.len() != self.dims.len() {
            return Err(Error::Usage(format!(
                "lower corner has {} coordinates, field has {} axes",
                lo.len(),
                self.dims.len()
            )));
        }
        let delta = F::of(self.delta);
        let hi: Vec<F> = lo
            .iter()
            .zip(&self.dims)
            .map(|(l, d)| *l + delta * F::of_usize(d - 1))
            .collect();
        let mesh = MeshSpec::new(DomainBox::new(lo.to_vec(), hi)?, delta)?;
        if mesh.dims() != self.dims.as_slice() {
            return Err(Error::Parse("header dims do not reproduce a uniform mesh".into()));
        }
        Ok(mesh)
    }
}

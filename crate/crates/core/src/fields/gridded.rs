//! Gridded velocity data.
//!
//! Text format `GVF1` (whitespace separated, `#` starts a comment):
//!
//! ```text
//! GVF1
//! n
//! N_0 N_1 ... N_{n-1}
//! N_t
//! <axis 0 coordinates> ... <axis n-1 coordinates>
//! <time coordinates>
//! <velocity samples: time-major, then axis 0 slowest ... axis n-1 fastest,
//!  n components per sample>
//! ```
//!
//! Binary format `GVB1` has the same logical layout: the 4 magic bytes,
//! `n` and the `n + 1` counts as little-endian `u32`, then every coordinate
//! and sample as a little-endian `f64`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, VelocityField};
use crate::scalar::Scalar;

const TEXT_MAGIC: &str = "GVF1";
const BINARY_MAGIC: &[u8; 4] = b"GVB1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GriddedFormat {
    Text,
    Binary,
    /// Decide from the leading magic bytes.
    Auto,
}

/// Velocity samples on a rectilinear space grid at a sequence of times.
///
/// Interpolation is multilinear in space and linear in time; queries outside
/// the hull are clamped onto it.
#[derive(Debug, Clone)]
pub struct GriddedVelocity<F> {
    axes: Vec<Vec<F>>,
    times: Vec<F>,
    samples: Vec<F>,
    source: String,
}

fn strictly_increasing<F: Scalar>(v: &[F]) -> bool {
    v.iter().all(|c| c.is_finite()) && v.windows(2).all(|w| w[0] < w[1])
}

impl<F: Scalar> GriddedVelocity<F> {
    pub fn new(axes: Vec<Vec<F>>, times: Vec<F>, samples: Vec<F>) -> Result<Self> {
        let n = axes.len();
        if n == 0 {
            return Err(Error::Validation("gridded field needs at least one axis".into()));
        }
        for (j, a) in axes.iter().enumerate() {
            if a.is_empty() || !strictly_increasing(a) {
                return Err(Error::Validation(format!(
                    "axis {j} coordinates must be nonempty and strictly increasing"
                )));
            }
        }
        if times.is_empty() || !strictly_increasing(&times) {
            return Err(Error::Validation(
                "time coordinates must be nonempty and strictly increasing".into(),
            ));
        }
        let points: usize = axes.iter().map(Vec::len).product();
        let expected = points * times.len() * n;
        if samples.len() != expected {
            return Err(Error::Validation(format!(
                "expected {expected} velocity values ({} times x {points} points x {n} components), got {}",
                times.len(),
                samples.len()
            )));
        }
        Ok(Self {
            axes,
            times,
            samples,
            source: "memory".into(),
        })
    }

    /// Samples `v(x, t)` at every node.
    pub fn from_fn(
        axes: Vec<Vec<F>>,
        times: Vec<F>,
        mut v: impl FnMut(&[F], F, &mut [F]),
    ) -> Result<Self> {
        let n = axes.len();
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        let points: usize = dims.iter().product();
        let mut samples = vec![F::zero(); points * times.len() * n];
        let mut x = vec![F::zero(); n];
        let mut idx = vec![0usize; n];
        for (ti, &t) in times.iter().enumerate() {
            for p in 0..points {
                let mut rem = p;
                for j in (0..n).rev() {
                    idx[j] = rem % dims[j];
                    rem /= dims[j];
                }
                for j in 0..n {
                    x[j] = axes[j][idx[j]];
                }
                let off = (ti * points + p) * n;
                v(&x, t, &mut samples[off..off + n]);
            }
        }
        Self::new(axes, times, samples)
    }

    pub fn axes(&self) -> &[Vec<F>] {
        &self.axes
    }

    pub fn times(&self) -> &[F] {
        &self.times
    }

    pub fn samples(&self) -> &[F] {
        &self.samples
    }

    fn points(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    /// Multilinear interpolation in space composed with linear interpolation
    /// in time.
    pub fn interpolate(&self, x: &[F], t: F, out: &mut [F]) {
        let n = self.axes.len();
        let points = self.points();
        let (t_lo, t_w) = locate(&self.times, t);
        let t_hi = (t_lo + 1).min(self.times.len() - 1);

        // Per-axis lower node and weight of the upper node.
        let (base, weight): (Vec<usize>, Vec<F>) =
            (0..n).map(|j| locate(&self.axes[j], x[j])).unzip();

        out.iter_mut().for_each(|o| *o = F::zero());
        for corner in 0..(1usize << n) {
            let mut w = F::one();
            let mut lin = 0usize;
            let mut skip = false;
            for j in 0..n {
                let upper = corner >> (n - 1 - j) & 1 == 1;
                let len = self.axes[j].len();
                let (i, wj) = if upper {
                    if len == 1 {
                        skip = true;
                        break;
                    }
                    (base[j] + 1, weight[j])
                } else {
                    (base[j], F::one() - weight[j])
                };
                w *= wj;
                lin = lin * len + i;
            }
            if skip || w == F::zero() {
                continue;
            }
            for (slice, ws) in [(t_lo, F::one() - t_w), (t_hi, t_w)] {
                if ws == F::zero() {
                    continue;
                }
                let off = (slice * points + lin) * n;
                let ww = w * ws;
                for (o, s) in out.iter_mut().zip(&self.samples[off..off + n]) {
                    *o += ww * *s;
                }
            }
        }
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut s = String::new();
        let n = self.axes.len();
        s.push_str(TEXT_MAGIC);
        s.push('\n');
        s.push_str(&format!("{n}\n"));
        let counts: Vec<String> = self.axes.iter().map(|a| a.len().to_string()).collect();
        s.push_str(&counts.join(" "));
        s.push('\n');
        s.push_str(&format!("{}\n", self.times.len()));
        for a in &self.axes {
            push_row(&mut s, a);
        }
        push_row(&mut s, &self.times);
        for chunk in self.samples.chunks(n) {
            push_row(&mut s, chunk);
        }
        fs::write(path, s)?;
        Ok(())
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(16 + 8 * self.samples.len());
        buf.extend_from_slice(BINARY_MAGIC);
        buf.extend_from_slice(&(self.axes.len() as u32).to_le_bytes());
        for a in &self.axes {
            buf.extend_from_slice(&(a.len() as u32).to_le_bytes());
        }
        buf.extend_from_slice(&(self.times.len() as u32).to_le_bytes());
        for v in self
            .axes
            .iter()
            .flatten()
            .chain(&self.times)
            .chain(&self.samples)
        {
            buf.extend_from_slice(&v.as_f64().to_le_bytes());
        }
        let mut f = fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }
}

fn push_row<F: Scalar>(s: &mut String, row: &[F]) {
    let parts: Vec<String> = row.iter().map(|v| v.as_f64().to_string()).collect();
    s.push_str(&parts.join(" "));
    s.push('\n');
}

/// Index of the lower node of the cell holding `x` (clamped to the hull) and
/// the interpolation weight of the upper node.
fn locate<F: Scalar>(coords: &[F], x: F) -> (usize, F) {
    let len = coords.len();
    if len == 1 {
        return (0, F::zero());
    }
    let x = x.max(coords[0]).min(coords[len - 1]);
    let upper = coords.partition_point(|c| *c <= x);
    let i = upper.saturating_sub(1).min(len - 2);
    let w = (x - coords[i]) / (coords[i + 1] - coords[i]);
    (i, w.max(F::zero()).min(F::one()))
}

impl<F: Scalar> VelocityField<F> for GriddedVelocity<F> {
    fn dimension(&self) -> usize {
        self.axes.len()
    }

    fn descriptor(&self) -> FieldDescriptor {
        let dims: Vec<String> = self.axes.iter().map(|a| a.len().to_string()).collect();
        FieldDescriptor::new("gridded")
            .with("source", &self.source)
            .with("dims", dims.join("x"))
            .with("times", self.times.len())
    }

    fn velocity(&self, x: &[F], t: F, out: &mut [F]) {
        self.interpolate(x, t, out)
    }
}

/// Reads and validates a gridded velocity file.
pub fn load_gridded<F: Scalar>(path: &Path, format: GriddedFormat) -> Result<GriddedVelocity<F>> {
    let bytes = fs::read(path)?;
    let format = match format {
        GriddedFormat::Auto if bytes.starts_with(BINARY_MAGIC) => GriddedFormat::Binary,
        GriddedFormat::Auto => GriddedFormat::Text,
        f => f,
    };
    let mut field = match format {
        GriddedFormat::Binary => parse_binary(&bytes)?,
        _ => {
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| Error::Parse("gridded text file is not UTF-8".into()))?;
            parse_text(text)?
        }
    };
    field.source = path.display().to_string();
    Ok(field)
}

fn parse_text<F: Scalar>(text: &str) -> Result<GriddedVelocity<F>> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    match tokens.next() {
        Some(TEXT_MAGIC) => {}
        other => {
            return Err(Error::Parse(format!(
                "expected magic {TEXT_MAGIC}, found {:?}",
                other.unwrap_or("<eof>")
            )))
        }
    }
    let mut next_count = |what: &str| -> Result<usize> {
        let tok = tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what}")))?;
        tok.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad {what} {tok:?}")))
    };
    let n = next_count("dimension")?;
    if n == 0 {
        return Err(Error::Parse("dimension must be positive".into()));
    }
    let counts = (0..n)
        .map(|j| next_count(&format!("axis {j} count")))
        .collect::<Result<Vec<_>>>()?;
    let nt = next_count("time count")?;
    let values = tokens
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {tok:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    split_values(n, &counts, nt, &values)
}

fn parse_binary<F: Scalar>(bytes: &[u8]) -> Result<GriddedVelocity<F>> {
    let mut pos = 4usize;
    let read_u32 = |pos: &mut usize| -> Result<usize> {
        let b = bytes
            .get(*pos..*pos + 4)
            .ok_or_else(|| Error::Parse("truncated GVB1 header".into()))?;
        *pos += 4;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    };
    let n = read_u32(&mut pos)?;
    if n == 0 {
        return Err(Error::Parse("dimension must be positive".into()));
    }
    let counts = (0..n)
        .map(|_| read_u32(&mut pos))
        .collect::<Result<Vec<_>>>()?;
    let nt = read_u32(&mut pos)?;
    let body = &bytes[pos..];
    if body.len() % 8 != 0 {
        return Err(Error::Parse("GVB1 body is not a whole number of f64 values".into()));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    split_values(n, &counts, nt, &values)
}

fn split_values<F: Scalar>(
    n: usize,
    counts: &[usize],
    nt: usize,
    values: &[f64],
) -> Result<GriddedVelocity<F>> {
    let coord_total: usize = counts.iter().sum::<usize>() + nt;
    if values.len() < coord_total {
        return Err(Error::Parse(format!(
            "expected at least {coord_total} coordinates, found {} values",
            values.len()
        )));
    }
    let mut it = values.iter().map(|v| F::of(*v));
    let axes: Vec<Vec<F>> = counts.iter().map(|&c| it.by_ref().take(c).collect()).collect();
    let times: Vec<F> = it.by_ref().take(nt).collect();
    let samples: Vec<F> = it.collect();
    let _ = n;
    GriddedVelocity::new(axes, times, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn lin(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn constant_field_round_trips_through_text() {
        let g = GriddedVelocity::from_fn(vec![vec![0.0, 1.0], vec![0.0, 1.0]], vec![0.0, 1.0], |_, _, o| {
            o[0] = 1.0;
            o[1] = 0.0;
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.gvf");
        g.write_text(&p).unwrap();
        let back: GriddedVelocity<f64> = load_gridded(&p, GriddedFormat::Auto).unwrap();
        let mut out = [0.0; 2];
        for x in [[0.0, 0.0], [0.3, 0.9], [1.0, 1.0]] {
            back.velocity(&x, 0.4, &mut out);
            assert_eq!(out, [1.0, 0.0]);
        }
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let g = GriddedVelocity::from_fn(vec![lin(0.0, 1.0, 3), lin(-1.0, 2.0, 4)], vec![0.0, 0.5, 2.0], |_, _, o| {
            o[0] = rng.gen();
            o[1] = rng.gen();
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.gvb");
        g.write_binary(&p).unwrap();
        let back: GriddedVelocity<f64> = load_gridded(&p, GriddedFormat::Auto).unwrap();
        assert_eq!(back.samples(), g.samples());
        assert_eq!(back.axes(), g.axes());
        assert_eq!(back.times(), g.times());
    }

    #[test]
    fn decreasing_time_axis_is_rejected() {
        let text = "GVF1\n1\n2\n2\n0 1\n1 0\n0 0 0 0\n";
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.gvf");
        std::fs::write(&p, text).unwrap();
        let err = load_gridded::<f64>(&p, GriddedFormat::Text).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn shape_mismatch_and_garbage_are_rejected() {
        assert!(matches!(
            GriddedVelocity::new(vec![vec![0.0, 1.0]], vec![0.0], vec![1.0]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(parse_text::<f64>("GVF2 1 2 1 0 1 0 0 0"), Err(Error::Parse(_))));
        assert!(matches!(parse_text::<f64>("GVF1 1 2 1 0 x 0 0 0"), Err(Error::Parse(_))));
    }

    #[test]
    fn multilinear_is_exact_on_linear_data() {
        let g = GriddedVelocity::from_fn(vec![lin(-1.0, 1.0, 3), lin(-1.0, 1.0, 3)], vec![0.0], |x, _, o| {
            o[0] = x[0];
            o[1] = x[1];
        })
        .unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let mut out = [0.0; 2];
        for _ in 0..200 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            g.interpolate(&x, 0.0, &mut out);
            assert!((out[0] - x[0]).abs() < 1e-12 && (out[1] - x[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn space_time_interpolation_is_exact_on_multilinear_data() {
        let g = GriddedVelocity::from_fn(vec![lin(0.0, 2.0, 5), lin(0.0, 1.0, 4)], lin(0.0, 3.0, 4), |x, t, o| {
            o[0] = t * x[0];
            o[1] = t * x[1];
        })
        .unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        let mut out = [0.0; 2];
        for _ in 0..200 {
            let x = [rng.gen_range(0.0..2.0), rng.gen_range(0.0..1.0)];
            let t = rng.gen_range(0.0..3.0);
            g.interpolate(&x, t, &mut out);
            assert!((out[0] - t * x[0]).abs() < 1e-12);
            assert!((out[1] - t * x[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn nodes_and_time_midpoints() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let g = GriddedVelocity::from_fn(vec![lin(0.0, 1.0, 3), lin(0.0, 1.0, 3)], vec![0.0, 1.0], |_, _, o| {
            o[0] = rng.gen();
            o[1] = rng.gen();
        })
        .unwrap();
        let mut out = [0.0; 2];
        let points = 9;
        for ti in 0..2 {
            for i in 0..3 {
                for j in 0..3 {
                    let x = [g.axes()[0][i], g.axes()[1][j]];
                    g.interpolate(&x, g.times()[ti], &mut out);
                    let off = (ti * points + i * 3 + j) * 2;
                    assert_eq!(out, [g.samples()[off], g.samples()[off + 1]]);
                }
            }
        }
        g.interpolate(&[0.5, 1.0], 0.5, &mut out);
        let a = (1 * 3 + 2) * 2;
        let b = (points + 1 * 3 + 2) * 2;
        assert!((out[0] - 0.5 * (g.samples()[a] + g.samples()[b])).abs() < 1e-15);
    }

    #[test]
    fn continuity_across_cell_faces_and_clamping() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        let g = GriddedVelocity::from_fn(vec![lin(0.0, 1.0, 4), lin(0.0, 1.0, 4)], vec![0.0, 1.0], |_, _, o| {
            o[0] = rng.gen();
            o[1] = rng.gen();
        })
        .unwrap();
        let face = g.axes()[0][1];
        let mut left = [0.0; 2];
        let mut right = [0.0; 2];
        for y in [0.1, 0.45, 0.8] {
            g.interpolate(&[face - 1e-13, y], 0.3, &mut left);
            g.interpolate(&[face + 1e-13, y], 0.3, &mut right);
            assert!((left[0] - right[0]).abs() < 1e-12 && (left[1] - right[1]).abs() < 1e-12);
        }
        // outside the hull the query is clamped
        g.interpolate(&[5.0, -3.0], 9.0, &mut left);
        g.interpolate(&[1.0, 0.0], 1.0, &mut right);
        assert_eq!(left, right);
    }
}

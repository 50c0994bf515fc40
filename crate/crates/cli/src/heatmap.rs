//! 8-bit grayscale PGM rendering of 2D scalar fields.
//!
//! Defined cells map affinely onto 1..=255 between the field's minimum and
//! maximum; a constant field renders as 128. Undefined cells are 0. The
//! top raster row is the largest-y grid line.

use std::path::Path;

use ltve_core::{ScalarField, Scalar};

use crate::error::{CliError, CliResult};

pub fn render_pgm<F: Scalar>(field: &ScalarField<F>) -> CliResult<Vec<u8>> {
    let dims = field.mesh().dims();
    if dims.len() != 2 {
        return Err(CliError::usage(format!(
            "heatmaps need a 2D field, this one has {} axes",
            dims.len()
        )));
    }
    let (width, height) = (dims[0], dims[1]);
    let (lo, hi) = field
        .defined()
        .fold(None, |acc: Option<(F, F)>, v| match acc {
            None => Some((v, v)),
            Some((a, b)) => Some((a.min(v), b.max(v))),
        })
        .unwrap_or((F::zero(), F::zero()));
    let span = hi - lo;

    let header = format!("P5\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(header.len() + width * height);
    out.extend_from_slice(header.as_bytes());
    for row in 0..height {
        let j = height - 1 - row;
        for i in 0..width {
            let v = field.get(&[i, j]);
            out.push(shade(v, lo, span));
        }
    }
    Ok(out)
}

fn shade<F: Scalar>(v: F, lo: F, span: F) -> u8 {
    if v.is_nan() {
        0
    } else if span <= F::zero() {
        128
    } else {
        let t = ((v - lo) / span).as_f64().clamp(0.0, 1.0);
        1 + (t * 254.0).round() as u8
    }
}

pub fn write_heatmap<F: Scalar>(field: &ScalarField<F>, path: &Path) -> CliResult<()> {
    let bytes = render_pgm(field)?;
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

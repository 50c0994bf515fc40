use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::fields::{
    load_gridded, ArtificialRidge, CircularFlow, DoubleGyre, GriddedFormat, LinearField, RingBand,
    StandingWave, VelocityField,
};
use crate::scalar::Scalar;

/// Named selection of a built-in field, or a gridded file.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Circular { epsilon: f64, band: RingBand },
    StandingWave { omega: f64, kmode: u32, eps_max: f64 },
    DoubleGyre,
    ArtificialRidge,
    Rotation,
    Saddle { rate: f64 },
    Zero { dim: usize },
    Gridded { path: PathBuf },
}

impl FieldSpec {
    pub const NAMES: &'static [&'static str] = &[
        "circular",
        "standing-wave",
        "double-gyre",
        "artificial-ridge",
        "rotation",
        "saddle",
        "zero",
        "gridded",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FieldSpec::Circular { .. } => "circular",
            FieldSpec::StandingWave { .. } => "standing-wave",
            FieldSpec::DoubleGyre => "double-gyre",
            FieldSpec::ArtificialRidge => "artificial-ridge",
            FieldSpec::Rotation => "rotation",
            FieldSpec::Saddle { .. } => "saddle",
            FieldSpec::Zero { .. } => "zero",
            FieldSpec::Gridded { .. } => "gridded",
        }
    }

    /// Default domain of the bundled experiment for this field, as
    /// interleaved `lo0, hi0, lo1, hi1` bounds.
    pub fn default_domain(&self) -> Option<[f64; 4]> {
        match self {
            FieldSpec::Circular { .. } => Some([-2.0, 2.0, -2.0, 2.0]),
            FieldSpec::StandingWave { .. } => Some([-3.0, 3.0, -3.0, 3.0]),
            FieldSpec::DoubleGyre => Some([0.0, 2.0, 0.0, 1.0]),
            FieldSpec::ArtificialRidge => Some([-6.0, 6.0, -6.0, 6.0]),
            FieldSpec::Rotation | FieldSpec::Saddle { .. } => Some([-1.0, 1.0, -1.0, 1.0]),
            FieldSpec::Zero { .. } | FieldSpec::Gridded { .. } => None,
        }
    }

    pub fn build<F: Scalar>(&self) -> Result<Box<dyn VelocityField<F>>> {
        Ok(match self {
            FieldSpec::Circular { epsilon, band } => Box::new(CircularFlow::new(F::of(*epsilon), *band)?),
            FieldSpec::StandingWave {
                omega,
                kmode,
                eps_max,
            } => Box::new(StandingWave::new(F::of(*omega), *kmode, F::of(*eps_max))?),
            FieldSpec::DoubleGyre => Box::new(DoubleGyre),
            FieldSpec::ArtificialRidge => Box::new(ArtificialRidge),
            FieldSpec::Rotation => Box::new(LinearField::<F>::rotation()),
            FieldSpec::Saddle { rate } => Box::new(LinearField::saddle(F::of(*rate))),
            FieldSpec::Zero { dim } => {
                if *dim == 0 {
                    return Err(Error::invalid("dim", "zero field needs a positive dimension"));
                }
                Box::new(LinearField::<F>::zero(*dim))
            }
            FieldSpec::Gridded { path } => Box::new(load_gridded::<F>(path, GriddedFormat::Auto)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_every_builtin() {
        let specs = [
            FieldSpec::Circular {
                epsilon: 0.1,
                band: RingBand::Radial,
            },
            FieldSpec::StandingWave {
                omega: 8.0 * std::f64::consts::PI,
                kmode: 7,
                eps_max: 0.8,
            },
            FieldSpec::DoubleGyre,
            FieldSpec::ArtificialRidge,
            FieldSpec::Rotation,
            FieldSpec::Saddle { rate: 1.0 },
            FieldSpec::Zero { dim: 3 },
        ];
        for s in specs {
            let f = s.build::<f64>().unwrap();
            assert!(f.dimension() >= 2, "{}", s.name());
            assert!(FieldSpec::NAMES.contains(&s.name()));
        }
        assert!(FieldSpec::Circular {
            epsilon: 1.5,
            band: RingBand::Verbatim
        }
        .build::<f64>()
        .is_err());
    }
}

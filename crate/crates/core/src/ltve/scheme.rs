use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SchemeOrder {
    /// `{+e_j, -e_j}`.
    #[default]
    First,
    /// Every nonzero vector with components in `{-1, 0, 1}`.
    Second,
    /// `{u + e_i : u in N}` with `N = {-1,0,1}^n`, without `2 e_i` and zero.
    Third,
}

impl SchemeOrder {
    pub fn tag(&self) -> &'static str {
        match self {
            SchemeOrder::First => "first",
            SchemeOrder::Second => "second",
            SchemeOrder::Third => "third",
        }
    }
}

impl fmt::Display for SchemeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SchemeOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" | "1" => Ok(SchemeOrder::First),
            "second" | "2" => Ok(SchemeOrder::Second),
            "third" | "3" => Ok(SchemeOrder::Third),
            _ => Err(Error::invalid(
                "scheme",
                format!("unknown order {s:?} (expected first, second or third)"),
            )),
        }
    }
}

/// Lattice offsets a mesh point is compared against, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodScheme {
    order: SchemeOrder,
    dim: usize,
    offsets: Vec<Vec<i32>>,
}

impl NeighborhoodScheme {
    pub fn new(order: SchemeOrder, dim: usize) -> Result<Self> {
        if dim == 0 || dim > 12 {
            return Err(Error::invalid("dimension", format!("unsupported dimension {dim}")));
        }
        let cube = unit_cube(dim);
        let mut offsets: Vec<Vec<i32>> = match order {
            SchemeOrder::First => (0..dim)
                .flat_map(|j| {
                    [-1, 1].into_iter().map(move |s| {
                        let mut u = vec![0; dim];
                        u[j] = s;
                        u
                    })
                })
                .collect(),
            SchemeOrder::Second => cube.into_iter().filter(|u| u.iter().any(|c| *c != 0)).collect(),
            SchemeOrder::Third => {
                let mut out = Vec::new();
                for u in &cube {
                    for i in 0..dim {
                        let mut v = u.clone();
                        v[i] += 1;
                        let is_double_axis =
                            v.iter().enumerate().all(|(j, c)| if j == i { *c == 2 } else { *c == 0 });
                        let is_zero = v.iter().all(|c| *c == 0);
                        if !is_double_axis && !is_zero {
                            out.push(v);
                        }
                    }
                }
                out
            }
        };
        offsets.sort();
        offsets.dedup();
        Ok(Self { order, dim, offsets })
    }

    pub fn order(&self) -> SchemeOrder {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offsets(&self) -> &[Vec<i32>] {
        &self.offsets
    }

    /// Largest backward reach along `axis`.
    pub fn reach_below(&self, axis: usize) -> usize {
        self.offsets.iter().map(|u| (-u[axis]).max(0) as usize).max().unwrap_or(0)
    }

    /// Largest forward reach along `axis`.
    pub fn reach_above(&self, axis: usize) -> usize {
        self.offsets.iter().map(|u| u[axis].max(0) as usize).max().unwrap_or(0)
    }

    pub fn reach(&self, axis: usize) -> usize {
        self.reach_below(axis).max(self.reach_above(axis))
    }
}

fn unit_cube(dim: usize) -> Vec<Vec<i32>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|u| {
                [-1, 0, 1].into_iter().map(move |c| {
                    let mut v = u.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

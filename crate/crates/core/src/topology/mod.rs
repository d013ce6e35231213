//! Classification of phase defects and the bookkeeping of their charges.
//!
//! Every defect carries a winding `m` of the phase and an index `n` of the
//! phase gradient: vortex `(1, 1)`, anti-vortex `(−1, 1)`, maximum and minimum
//! `(0, 1)`, saddle `(0, −1)`. Totals `w = Σm` and `χ = Σn` are conserved by any
//! continuous deformation of the field.

pub mod algebra;
mod classify;
mod contour;

pub use algebra::{
    enumerate_multiplet, format_multiset, group_reduce, inverse, parse_multiset, parse_reaction, vertex_legal,
    DefectComplex, DefectVector, Generator,
};
pub use classify::{classify, classify_jet, classify_with, contour_radius, PointKind, JACOBIAN_MIN};
pub use contour::{boundary_index, boundary_winding, index_number, winding_number, ContourParams};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Species {
    Vortex,
    AntiVortex,
    Maximum,
    Minimum,
    Saddle,
}

impl Species {
    pub const ALL: [Species; 5] = [
        Species::Vortex,
        Species::AntiVortex,
        Species::Maximum,
        Species::Minimum,
        Species::Saddle,
    ];

    /// Phase winding `m`.
    pub fn m(self) -> i64 {
        match self {
            Species::Vortex => 1,
            Species::AntiVortex => -1,
            _ => 0,
        }
    }

    /// Phase-gradient index `n`.
    pub fn n_index(self) -> i64 {
        match self {
            Species::Saddle => -1,
            _ => 1,
        }
    }

    pub fn is_nodal(self) -> bool {
        matches!(self, Species::Vortex | Species::AntiVortex)
    }

    pub fn is_extremum(self) -> bool {
        matches!(self, Species::Maximum | Species::Minimum)
    }

    /// Group generator: maxima and minima both map to `e`.
    pub fn generator(self) -> Generator {
        match self {
            Species::Vortex => Generator::V,
            Species::AntiVortex => Generator::VStar,
            Species::Maximum | Species::Minimum => Generator::E,
            Species::Saddle => Generator::S,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Species::Vortex => "vortex",
            Species::AntiVortex => "anti-vortex",
            Species::Maximum => "maximum",
            Species::Minimum => "minimum",
            Species::Saddle => "saddle",
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Species {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Species::ALL
            .into_iter()
            .find(|sp| sp.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown species '{s}'")))
    }
}

/// A classified defect at one instant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub m: i64,
    #[serde(rename = "n")]
    pub n_index: i64,
    pub species: Species,
}

impl Defect {
    pub fn new(x: f64, y: f64, t: f64, species: Species) -> Self {
        Defect {
            t,
            x,
            y,
            m: species.m(),
            n_index: species.n_index(),
            species,
        }
    }

    pub fn pos(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// `(w, χ) = (Σm, Σn)`.
pub fn totals(defects: &[Defect]) -> (i64, i64) {
    defects.iter().fold((0, 0), |(w, c), d| (w + d.m, c + d.n_index))
}

/// Totals of a species multiset.
pub fn species_totals(species: &[Species]) -> (i64, i64) {
    species.iter().fold((0, 0), |(w, c), s| (w + s.m(), c + s.n_index()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn species_charges() {
        let pairs: Vec<(i64, i64)> = Species::ALL.iter().map(|s| (s.m(), s.n_index())).collect();
        assert_eq!(pairs, vec![(1, 1), (-1, 1), (0, 1), (0, 1), (0, -1)]);
    }

    #[test]
    fn species_names_round_trip() {
        for s in Species::ALL {
            assert_eq!(s.name().parse::<Species>().unwrap(), s);
        }
        assert!("vortice".parse::<Species>().is_err());
    }

    #[test]
    fn totals_of_examples() {
        let d = |s| Defect::new(0.0, 0.0, 0.0, s);
        let four_v = vec![d(Species::Vortex); 4];
        assert_eq!(totals(&four_v), (4, 4));
        let bubble = vec![d(Species::Vortex), d(Species::AntiVortex), d(Species::Saddle), d(Species::Saddle)];
        assert_eq!(totals(&bubble), (0, 0));
        assert_eq!(
            species_totals(&[Species::Maximum, Species::Minimum]),
            species_totals(&[Species::Vortex, Species::AntiVortex])
        );
        assert_eq!(species_totals(&[Species::Maximum, Species::Minimum]), (0, 2));
    }
}

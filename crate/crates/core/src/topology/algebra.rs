//! The defect group on generators `v, v*, s, e` with `v + v* = 2e` and `e + s = 0`.
//!
//! Each generator maps to its `(m, n)` vector: `v = (1, 1)`, `v* = (−1, 1)`,
//! `e = (0, 1)`, `s = (0, −1)`. A multiset reduces to the sum of its vectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    #[serde(rename = "v")]
    V,
    #[serde(rename = "v*")]
    VStar,
    #[serde(rename = "s")]
    S,
    #[serde(rename = "e")]
    E,
}

impl Generator {
    pub const ALL: [Generator; 4] = [Generator::V, Generator::VStar, Generator::S, Generator::E];

    /// `(m, n)`.
    pub fn vector(self) -> (i64, i64) {
        match self {
            Generator::V => (1, 1),
            Generator::VStar => (-1, 1),
            Generator::S => (0, -1),
            Generator::E => (0, 1),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Generator::V => "v",
            Generator::VStar => "v*",
            Generator::S => "s",
            Generator::E => "e",
        }
    }

    fn slot(self) -> usize {
        match self {
            Generator::V => 0,
            Generator::VStar => 1,
            Generator::S => 2,
            Generator::E => 3,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "v" => Ok(Generator::V),
            "v*" => Ok(Generator::VStar),
            "s" => Ok(Generator::S),
            "e" => Ok(Generator::E),
            other => Err(Error::Parse(format!("unknown generator '{other}'"))),
        }
    }
}

/// `(m, n)` of a multiset together with its generator counts `[#v, #v*, #s, #e]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectVector {
    pub m: i64,
    #[serde(rename = "n")]
    pub n_index: i64,
    pub counts: [usize; 4],
}

impl DefectVector {
    pub fn mn(&self) -> (i64, i64) {
        (self.m, self.n_index)
    }
}

/// A multiset of generators labelled by `[w, χ, P]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectComplex {
    pub w: i64,
    pub chi: i64,
    pub p: usize,
    pub members: Vec<Generator>,
}

pub fn group_reduce(members: &[Generator]) -> DefectVector {
    let mut counts = [0usize; 4];
    let (mut m, mut n) = (0, 0);
    for g in members {
        counts[g.slot()] += 1;
        let (a, b) = g.vector();
        m += a;
        n += b;
    }
    DefectVector { m, n_index: n, counts }
}

/// Additive inverse of a generator as a multiset: `−s = e`, `−e = s`,
/// `−v = v* + 2s`, `−v* = v + 2s`.
pub fn inverse(g: Generator) -> Vec<Generator> {
    match g {
        Generator::S => vec![Generator::E],
        Generator::E => vec![Generator::S],
        Generator::V => vec![Generator::VStar, Generator::S, Generator::S],
        Generator::VStar => vec![Generator::V, Generator::S, Generator::S],
    }
}

/// All `C(p+3, 3)` multisets of size `p`, in lexicographic order over `v, v*, s, e`.
pub fn enumerate_multiplet(p: usize) -> Result<Vec<DefectComplex>> {
    if p == 0 {
        return Err(Error::InvalidArgument("multiplet size must be at least 1".into()));
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(p);
    fn rec(start: usize, left: usize, cur: &mut Vec<Generator>, out: &mut Vec<DefectComplex>) {
        if left == 0 {
            let r = group_reduce(cur);
            out.push(DefectComplex {
                w: r.m,
                chi: r.n_index,
                p: cur.len(),
                members: cur.clone(),
            });
            return;
        }
        for k in start..4 {
            cur.push(Generator::ALL[k]);
            rec(k, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(0, p, &mut cur, &mut out);
    Ok(out)
}

/// A vertex is legal when the incoming and outgoing multisets carry the same `(w, χ)`.
pub fn vertex_legal(incoming: &[Generator], outgoing: &[Generator]) -> bool {
    group_reduce(incoming).mn() == group_reduce(outgoing).mn()
}

/// Parses `"v+v*+s"`; `"0"`, `"∅"` and the empty string are the empty multiset.
pub fn parse_multiset(s: &str) -> Result<Vec<Generator>> {
    let s = s.trim();
    if s.is_empty() || s == "0" || s == "∅" {
        return Ok(Vec::new());
    }
    s.split('+').map(|tok| tok.parse()).collect()
}

/// Parses `"v+v* -> e+e"` into incoming and outgoing multisets.
pub fn parse_reaction(s: &str) -> Result<(Vec<Generator>, Vec<Generator>)> {
    let (a, b) = s
        .split_once("->")
        .or_else(|| s.split_once('→'))
        .ok_or_else(|| Error::Parse(format!("reaction '{s}' has no '->'")))?;
    Ok((parse_multiset(a)?, parse_multiset(b)?))
}

/// `v+v*+s`, or `0` for the empty multiset.
pub fn format_multiset(members: &[Generator]) -> String {
    if members.is_empty() {
        return "0".into();
    }
    members.iter().map(|g| g.symbol()).collect::<Vec<_>>().join("+")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Generator::*;

    #[test]
    fn group_relations() {
        assert_eq!(group_reduce(&[V, VStar]).mn(), group_reduce(&[E, E]).mn());
        assert_eq!(group_reduce(&[V, VStar]).mn(), (0, 2));
        assert_eq!(group_reduce(&[E, S]).mn(), (0, 0));
        let neg_vstar = group_reduce(&[VStar]);
        assert_eq!(group_reduce(&[V, S, S]).mn(), (-neg_vstar.m, -neg_vstar.n_index));
    }

    #[test]
    fn inverses_cancel() {
        for g in Generator::ALL {
            let mut all = inverse(g);
            all.push(g);
            assert_eq!(group_reduce(&all).mn(), (0, 0), "{g}");
        }
    }

    #[test]
    fn multiplet_sizes() {
        let sizes: Vec<usize> = (1..=5).map(|p| enumerate_multiplet(p).unwrap().len()).collect();
        assert_eq!(sizes, vec![4, 10, 20, 35, 56]);
        assert!(enumerate_multiplet(0).is_err());
        let quartet = enumerate_multiplet(1).unwrap();
        let labels: Vec<(i64, i64)> = quartet.iter().map(|c| (c.w, c.chi)).collect();
        assert_eq!(labels, vec![(1, 1), (-1, 1), (0, -1), (0, 1)]);
    }

    #[test]
    fn reactions() {
        let check = |s: &str| {
            let (a, b) = parse_reaction(s).unwrap();
            vertex_legal(&a, &b)
        };
        assert!(check("v -> v+v+v*+s+s"));
        assert!(check("0 -> v+v*+s+s"));
        assert!(check("v+v* -> e+e"));
        assert!(!check("v -> v*"));
        assert!(!check("v -> e"));
        assert!(parse_reaction("v v*").is_err());
        assert!(parse_reaction("v -> x").is_err());
    }

    #[test]
    fn format_round_trip() {
        let m = vec![V, VStar, S, S];
        assert_eq!(format_multiset(&m), "v+v*+s+s");
        assert_eq!(parse_multiset(&format_multiset(&m)).unwrap(), m);
        assert_eq!(format_multiset(&[]), "0");
        assert!(parse_multiset("0").unwrap().is_empty());
    }

    fn gens() -> impl Strategy<Value = Vec<Generator>> {
        prop::collection::vec(prop::sample::select(Generator::ALL.to_vec()), 0..12)
    }

    proptest! {
        #[test]
        fn reduce_is_additive(a in gens(), b in gens()) {
            let mut ab = a.clone();
            ab.extend(&b);
            let (ra, rb, rab) = (group_reduce(&a), group_reduce(&b), group_reduce(&ab));
            prop_assert_eq!(rab.mn(), (ra.m + rb.m, ra.n_index + rb.n_index));
        }

        #[test]
        fn reduce_matches_counts(a in gens()) {
            let r = group_reduce(&a);
            let [v, vs, s, e] = r.counts.map(|c| c as i64);
            prop_assert_eq!(r.m, v - vs);
            prop_assert_eq!(r.n_index, v + vs + e - s);
        }
    }
}

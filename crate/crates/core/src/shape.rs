//! Shape taxonomy by the sign sequence of the slope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::term_structure::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeTag {
    Flat,
    N,
    I,
    H,
    D,
    Hd,
    Dh,
    Hdh,
    Dhd,
}

pub const ALL_SHAPES: [ShapeTag; 9] = [
    ShapeTag::Flat,
    ShapeTag::N,
    ShapeTag::I,
    ShapeTag::H,
    ShapeTag::D,
    ShapeTag::Hd,
    ShapeTag::Dh,
    ShapeTag::Hdh,
    ShapeTag::Dhd,
];

impl ShapeTag {
    /// Tag whose slope starts with `first` and changes sign `changes` times.
    pub fn from_signs(first: Sign, changes: usize) -> Option<ShapeTag> {
        use ShapeTag::*;
        let up = first == Sign::Positive;
        Some(match (changes, up) {
            (0, true) => N,
            (0, false) => I,
            (1, true) => H,
            (1, false) => D,
            (2, true) => Hd,
            (2, false) => Dh,
            (3, true) => Hdh,
            (3, false) => Dhd,
            _ => return None,
        })
    }

    pub fn extrema_count(self) -> usize {
        use ShapeTag::*;
        match self {
            Flat | N | I => 0,
            H | D => 1,
            Hd | Dh => 2,
            Hdh | Dhd => 3,
        }
    }

    pub fn initial_sign(self) -> Option<Sign> {
        use ShapeTag::*;
        match self {
            Flat => None,
            N | H | Hd | Hdh => Some(Sign::Positive),
            I | D | Dh | Dhd => Some(Sign::Negative),
        }
    }

    /// Hump and dip exchanged.
    pub fn mirror(self) -> ShapeTag {
        use ShapeTag::*;
        match self {
            Flat => Flat,
            N => I,
            I => N,
            H => D,
            D => H,
            Hd => Dh,
            Dh => Hd,
            Hdh => Dhd,
            Dhd => Hdh,
        }
    }

    pub fn as_str(self) -> &'static str {
        use ShapeTag::*;
        match self {
            Flat => "flat",
            N => "n",
            I => "i",
            H => "h",
            D => "d",
            Hd => "hd",
            Dh => "dh",
            Hdh => "hdh",
            Dhd => "dhd",
        }
    }

    /// Slope signs, e.g. `"+-+"` for `hd`.
    pub fn sign_sequence(self) -> String {
        let Some(first) = self.initial_sign() else {
            return String::from("0");
        };
        let mut s = String::new();
        let mut cur = first;
        for _ in 0..=self.extrema_count() {
            s.push(if cur == Sign::Positive { '+' } else { '-' });
            cur = cur.flip();
        }
        s
    }
}

impl std::fmt::Display for ShapeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ShapeTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ALL_SHAPES
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown shape '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Hump,
    Dip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub x: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    #[serde(rename = "shape")]
    pub tag: ShapeTag,
    pub extrema: Vec<Extremum>,
    /// Set when a sign decision was within tolerance of zero.
    pub boundary_ambiguous: bool,
}

impl Shape {
    pub fn flat() -> Shape {
        Shape { tag: ShapeTag::Flat, extrema: Vec::new(), boundary_ambiguous: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taxonomy() {
        let expect = [
            (ShapeTag::N, "+"),
            (ShapeTag::I, "-"),
            (ShapeTag::H, "+-"),
            (ShapeTag::D, "-+"),
            (ShapeTag::Hd, "+-+"),
            (ShapeTag::Dh, "-+-"),
            (ShapeTag::Hdh, "+-+-"),
            (ShapeTag::Dhd, "-+-+"),
        ];
        for (t, s) in expect {
            assert_eq!(t.sign_sequence(), s);
            let first = t.initial_sign().unwrap();
            assert_eq!(ShapeTag::from_signs(first, s.len() - 1), Some(t));
            assert_eq!(t.mirror().mirror(), t);
            assert_eq!(t.mirror().extrema_count(), t.extrema_count());
            assert_eq!(t.as_str().parse::<ShapeTag>().unwrap(), t);
        }
        assert_eq!(ShapeTag::from_signs(Sign::Positive, 4), None);
    }

    #[test]
    fn serializes_lowercase() {
        assert_eq!(serde_json::to_string(&ShapeTag::Hdh).unwrap(), "\"hdh\"");
    }
}

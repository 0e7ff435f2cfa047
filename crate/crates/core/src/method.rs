use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_COLLOCATION_DEGREE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    L1,
    L12,
    Coll,
}

/// Time discretization: L1, L1-2 or continuous collocation of degree `m`
/// at the equidistant points `c_ℓ = ℓ/m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MethodSpec {
    kind: MethodKind,
    m: usize,
}

impl MethodSpec {
    pub fn l1() -> Self {
        Self {
            kind: MethodKind::L1,
            m: 1,
        }
    }

    pub fn l12() -> Self {
        Self {
            kind: MethodKind::L12,
            m: 2,
        }
    }

    pub fn collocation(m: usize) -> Result<Self> {
        if !(1..=MAX_COLLOCATION_DEGREE).contains(&m) {
            return Err(Error::Config(format!(
                "collocation degree must lie in 1..={MAX_COLLOCATION_DEGREE}, got {m}"
            )));
        }
        Ok(Self {
            kind: MethodKind::Coll,
            m,
        })
    }

    pub fn kind(&self) -> MethodKind {
        self.kind
    }

    /// Polynomial degree in time (L1-2 uses 2 except on the first interval).
    pub fn m(&self) -> usize {
        self.m
    }

    /// Degree of the piecewise polynomial on interval `k` (1-based).
    pub fn degree_on(&self, k: usize) -> usize {
        match self.kind {
            MethodKind::L12 if k == 1 => 1,
            _ => self.m,
        }
    }

    /// Number of unknown spatial blocks per interval.
    pub fn unknown_blocks(&self) -> usize {
        match self.kind {
            MethodKind::L1 | MethodKind::L12 => 1,
            MethodKind::Coll => self.m,
        }
    }

    /// Reference collocation points `c_0 = 0 < c_1 < … < c_m = 1`.
    pub fn collocation_points(&self) -> Vec<f64> {
        match self.kind {
            MethodKind::Coll => (0..=self.m).map(|l| l as f64 / self.m as f64).collect(),
            _ => vec![0.0, 1.0],
        }
    }

    /// Order `q` such that the expected convergence is `M^{−(q−α)}`.
    pub fn nominal_order(&self) -> usize {
        match self.kind {
            MethodKind::L1 => 2,
            MethodKind::L12 => 3,
            MethodKind::Coll => self.m + 1,
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            MethodKind::L1 => write!(f, "l1"),
            MethodKind::L12 => write!(f, "l12"),
            MethodKind::Coll => write!(f, "coll{}", self.m),
        }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase().replace(['-', '(', ')', ' ', '_'], "");
        match t.as_str() {
            "l1" => Ok(Self::l1()),
            "l12" => Ok(Self::l12()),
            _ => {
                let digits = t
                    .strip_prefix("coll")
                    .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))?;
                let m = digits
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad collocation degree in '{s}'")))?;
                Self::collocation(m)
            }
        }
    }
}

impl TryFrom<String> for MethodSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MethodSpec> for String {
    fn from(m: MethodSpec) -> Self {
        m.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        for s in ["l1", "l12", "coll1", "coll8", "coll12"] {
            assert_eq!(s.parse::<MethodSpec>().unwrap().to_string(), s);
        }
        assert_eq!("Coll(4)".parse::<MethodSpec>().unwrap(), MethodSpec::collocation(4).unwrap());
        assert_eq!("L1-2".parse::<MethodSpec>().unwrap(), MethodSpec::l12());
        assert!("coll13".parse::<MethodSpec>().is_err());
        assert!("coll0".parse::<MethodSpec>().is_err());
        assert!("bdf2".parse::<MethodSpec>().is_err());
    }

    #[test]
    fn collocation_points_are_equidistant() {
        let c = MethodSpec::collocation(4).unwrap().collocation_points();
        assert_eq!(c, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(MethodSpec::l12().degree_on(1), 1);
        assert_eq!(MethodSpec::l12().degree_on(2), 2);
    }
}

//! Temporal meshes and per-interval residual sampling grids.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing time nodes starting at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TemporalMesh {
    nodes: Vec<f64>,
}

impl TryFrom<Vec<f64>> for TemporalMesh {
    type Error = Error;
    fn try_from(nodes: Vec<f64>) -> Result<Self> {
        Self::new(nodes)
    }
}

impl From<TemporalMesh> for Vec<f64> {
    fn from(m: TemporalMesh) -> Self {
        m.nodes
    }
}

impl TemporalMesh {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Precondition("a mesh needs at least two nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::Precondition(format!("mesh must start at 0, got {}", nodes[0])));
        }
        for (k, w) in nodes.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::Precondition(format!(
                    "mesh nodes must increase strictly: t[{}]={} , t[{}]={}",
                    k,
                    w[0],
                    k + 1,
                    w[1]
                )));
            }
        }
        Ok(Self { nodes })
    }

    pub fn uniform(intervals: usize, t_end: f64) -> Result<Self> {
        graded_mesh(intervals, 1.0, t_end)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of intervals M.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().expect("non-empty")
    }

    /// Width of interval k (1-based).
    pub fn tau(&self, k: usize) -> f64 {
        self.nodes[k] - self.nodes[k - 1]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t\n");
        for t in &self.nodes {
            let _ = writeln!(s, "{}", fmt_f64(*t));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.parse::<f64>().is_err()) {
                continue;
            }
            let v = line
                .split(',')
                .next()
                .unwrap_or_default()
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("mesh CSV line {}: {e}", i + 1)))?;
            nodes.push(v);
        }
        Self::new(nodes)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Nodes T(j/M)^r, j = 0..M.
pub fn graded_mesh(intervals: usize, grading: f64, t_end: f64) -> Result<TemporalMesh> {
    if intervals == 0 {
        return Err(Error::Precondition("graded mesh needs M >= 1".into()));
    }
    if !(grading >= 1.0) || !(t_end > 0.0) {
        return Err(Error::Precondition(format!(
            "graded mesh needs r >= 1 and T > 0, got r={grading}, T={t_end}"
        )));
    }
    let m = intervals as f64;
    let mut nodes: Vec<f64> = (0..=intervals)
        .map(|j| t_end * (j as f64 / m).powf(grading))
        .collect();
    nodes[intervals] = t_end;
    TemporalMesh::new(nodes)
}

/// Graded local sampling points (i/n)^p, i = 1..n-1, with p = min(1/(1-α), 5).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub n: usize,
    pub p: f64,
    pub points: Vec<f64>,
}

pub const DEFAULT_SAMPLES: usize = 20;

impl SamplingGrid {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("sampling grid needs alpha in (0,1), got {alpha}")));
        }
        if n < 2 {
            return Err(Error::Domain(format!("sampling grid needs n >= 2, got {n}")));
        }
        let p = (1.0 / (1.0 - alpha)).min(5.0);
        let points = (1..n).map(|i| (i as f64 / n as f64).powf(p)).collect();
        Ok(Self { n, p, points })
    }
}

/// Convenience wrapper matching the grid constructor.
pub fn sampling_points(alpha: f64, n: usize) -> Result<SamplingGrid> {
    SamplingGrid::new(alpha, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_examples() {
        let u = graded_mesh(4, 1.0, 1.0).unwrap();
        assert_eq!(u.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = graded_mesh(2, 2.0, 1.0).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.25, 1.0]);
        let g = graded_mesh(8, 4.0, 1.0).unwrap();
        assert!((g.nodes()[1] - 8f64.powi(-4)).abs() < 1e-19);
        assert!(graded_mesh(0, 1.0, 1.0).is_err());
        assert!(graded_mesh(3, 0.5, 1.0).is_err());
    }

    #[test]
    fn mesh_validation() {
        assert!(TemporalMesh::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TemporalMesh::new(vec![0.1, 0.5]).is_err());
        assert!(TemporalMesh::new(vec![0.0]).is_err());
        let m = TemporalMesh::new(vec![0.0, 1e-270, 0.5, 1.0]).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.tau(1), 1e-270);
    }

    #[test]
    fn sampling_examples() {
        let g = SamplingGrid::new(0.8, 20).unwrap();
        assert!((g.p - 5.0).abs() < 1e-12);
        assert_eq!(g.points.len(), 19);
        assert!((g.points[0] - 3.125e-7).abs() < 1e-20);
        let g = SamplingGrid::new(0.5, 2).unwrap();
        assert_eq!(g.points, vec![0.25]);
        assert!(SamplingGrid::new(1.0, 20).is_err());
        assert!(SamplingGrid::new(0.5, 1).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let m = TemporalMesh::new(vec![0.0, 1.0 / 3.0, 0.7, 1.0]).unwrap();
        let back = TemporalMesh::from_csv(&m.to_csv()).unwrap();
        assert_eq!(m, back);
    }
}

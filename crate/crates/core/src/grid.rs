//! Parameter grids: the built-in `(γ, h, ω)` grid or a CSV file with header
//! `gamma,h,omega`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PhaseError, Result};

pub const DEFAULT_GAMMAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
pub const DEFAULT_FIELDS: [f64; 3] = [0.0, 0.3, 1.0];
pub const DEFAULT_OMEGAS: [f64; 3] = [0.1, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub gamma: f64,
    pub h: f64,
    pub omega: f64,
}

impl GridPoint {
    pub fn new(gamma: f64, h: f64, omega: f64) -> Self {
        Self { gamma, h, omega }
    }
}

/// Points in evaluation order: γ outermost, ω innermost.
pub fn default_grid() -> Vec<GridPoint> {
    let mut out = Vec::with_capacity(36);
    for &gamma in &DEFAULT_GAMMAS {
        for &h in &DEFAULT_FIELDS {
            for &omega in &DEFAULT_OMEGAS {
                out.push(GridPoint { gamma, h, omega });
            }
        }
    }
    out
}

/// Distinct `(γ, h)` pairs of a grid, in first-seen order.
pub fn field_pairs(points: &[GridPoint]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for p in points {
        if !out.iter().any(|&(g, h)| g == p.gamma && h == p.h) {
            out.push((p.gamma, p.h));
        }
    }
    out
}

/// Parses CSV text with a `gamma,h,omega` header. Rows keep file order.
pub fn parse_grid_csv(text: &str) -> Result<Vec<GridPoint>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| PhaseError::Grid(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["gamma", "h", "omega"] {
        return Err(PhaseError::Grid(format!(
            "expected header gamma,h,omega, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut points = Vec::new();
    for (line, row) in reader.deserialize::<GridPoint>().enumerate() {
        let p = row.map_err(|e| PhaseError::Grid(format!("row {}: {e}", line + 1)))?;
        if !(p.gamma.is_finite() && p.h.is_finite() && p.omega.is_finite() && p.omega > 0.0) {
            return Err(PhaseError::Grid(format!(
                "row {}: need finite gamma, h and omega > 0",
                line + 1
            )));
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(PhaseError::Grid("grid file has no rows".into()));
    }
    Ok(points)
}

pub fn load_grid(path: &Path) -> Result<Vec<GridPoint>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PhaseError::Grid(format!("{}: {e}", path.display())))?;
    parse_grid_csv(&text)
}

/// `default` or `file=PATH`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridSpec {
    Default,
    File(PathBuf),
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<GridPoint>> {
        match self {
            GridSpec::Default => Ok(default_grid()),
            GridSpec::File(path) => load_grid(path),
        }
    }
}

impl FromStr for GridSpec {
    type Err = PhaseError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "default" {
            return Ok(GridSpec::Default);
        }
        match s.strip_prefix("file=") {
            Some(path) if !path.is_empty() => Ok(GridSpec::File(PathBuf::from(path))),
            _ => Err(PhaseError::Grid(format!(
                "expected `default` or `file=PATH`, got `{s}`"
            ))),
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Default => f.write_str("default"),
            GridSpec::File(p) => write!(f, "file={}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 36);
        assert_eq!(g[0], GridPoint::new(0.0, 0.0, 0.1));
        assert_eq!(g[35], GridPoint::new(2.0, 1.0, 1.0));
        assert_eq!(field_pairs(&g).len(), 12);
    }

    #[test]
    fn parses_file_rows_in_order() {
        let g = parse_grid_csv("gamma,h,omega\n0.5, 0.4, 0.1\n# comment\n0.5,0.4,0.03\n").unwrap();
        assert_eq!(
            g,
            vec![
                GridPoint::new(0.5, 0.4, 0.1),
                GridPoint::new(0.5, 0.4, 0.03)
            ]
        );
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_grid_csv("g,h,w\n1,2,3\n").is_err());
        assert!(parse_grid_csv("gamma,h,omega\n1,2\n").is_err());
        assert!(parse_grid_csv("gamma,h,omega\n1,2,0\n").is_err());
        assert!(parse_grid_csv("gamma,h,omega\n").is_err());
        assert!(parse_grid_csv("gamma,h,omega\n1,x,1\n").is_err());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("default".parse::<GridSpec>().unwrap(), GridSpec::Default);
        assert_eq!(
            "file=/tmp/g.csv".parse::<GridSpec>().unwrap(),
            GridSpec::File(PathBuf::from("/tmp/g.csv"))
        );
        assert!("file=".parse::<GridSpec>().is_err());
        assert!("grid.csv".parse::<GridSpec>().is_err());
    }
}

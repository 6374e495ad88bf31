use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WormError};
use crate::expr::ScalarExpr;

/// Largest supported level; generator index sets are `u8` bitmasks.
pub const MAX_LEVEL: usize = 8;

/// Coordinates on an open subset of R^n together with the worm level k.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chart {
    pub name: String,
    coords: Vec<String>,
    level: usize,
}

impl Chart {
    pub fn new(name: &str, coords: &[&str], level: usize) -> Result<Arc<Chart>> {
        Self::from_owned(name, coords.iter().map(|c| c.to_string()).collect(), level)
    }

    pub fn from_owned(name: &str, coords: Vec<String>, level: usize) -> Result<Arc<Chart>> {
        if level > MAX_LEVEL {
            return Err(WormError::InvalidChart(format!("level {level} exceeds {MAX_LEVEL}")));
        }
        let mut seen = BTreeSet::new();
        for c in &coords {
            if !is_identifier(c) {
                return Err(WormError::InvalidChart(format!("`{c}` is not a valid coordinate name")));
            }
            if !seen.insert(c.as_str()) {
                return Err(WormError::InvalidChart(format!("duplicate coordinate `{c}`")));
            }
        }
        Ok(Arc::new(Chart {
            name: name.to_string(),
            coords,
            level,
        }))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &str {
        &self.coords[i]
    }

    pub fn coord_index(&self, name: &str) -> Result<usize> {
        self.coords
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| WormError::UnknownCoordinate(name.to_string()))
    }

    pub fn coord_expr(&self, i: usize) -> ScalarExpr {
        ScalarExpr::var(&self.coords[i])
    }

    /// Same coordinates at another level.
    pub fn with_level(&self, level: usize) -> Result<Arc<Chart>> {
        Chart::from_owned(&self.name, self.coords.clone(), level)
    }

    /// Exact partial derivative with respect to a coordinate of this chart.
    pub fn derivative(&self, e: &ScalarExpr, coord: &str) -> Result<ScalarExpr> {
        self.coord_index(coord)?;
        Ok(e.diff(coord))
    }

    pub fn check_index(&self, a: usize) -> Result<()> {
        if a == 0 || a > self.level {
            return Err(WormError::IndexOutOfRange { index: a, max: self.level });
        }
        Ok(())
    }

    pub(crate) fn ensure_same(&self, other: &Chart) -> Result<()> {
        if self.coords != other.coords || self.level != other.level {
            return Err(WormError::ChartMismatch(format!(
                "{}{:?}@{} vs {}{:?}@{}",
                self.name, self.coords, self.level, other.name, other.coords, other.level
            )));
        }
        Ok(())
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(s, "sin" | "cos" | "exp" | "log" | "sqrt" | "d")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_large_levels() {
        assert!(Chart::new("U", &["x", "x"], 1).is_err());
        assert!(Chart::new("U", &["x"], 9).is_err());
        assert!(Chart::new("U", &["sin"], 1).is_err());
        assert!(Chart::new("U", &["x", "y"], 8).is_ok());
    }

    #[test]
    fn derivative_checks_coordinate() {
        let c = Chart::new("U", &["x"], 1).unwrap();
        let e = ScalarExpr::var("x").pow(2);
        assert_eq!(c.derivative(&e, "x").unwrap(), ScalarExpr::var("x").scale(&crate::num::rat(2)));
        assert!(matches!(c.derivative(&e, "z"), Err(WormError::UnknownCoordinate(_))));
    }
}

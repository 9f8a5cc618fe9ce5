use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    #[default]
    Linear,
}

/// Evenly spaced frequencies `omega_min ..= omega_max` in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: GridScale,
}

impl FrequencyGrid {
    pub fn new(omega_min: f64, omega_max: f64, points: usize) -> Result<Self> {
        let grid = FrequencyGrid {
            omega_min,
            omega_max,
            points,
            scale: GridScale::Linear,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min.is_finite() && self.omega_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if self.omega_min < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "omega_min must be non-negative, got {}",
                self.omega_min
            )));
        }
        if self.omega_min >= self.omega_max {
            return Err(Error::InvalidGrid(format!(
                "omega_min ({}) must be below omega_max ({})",
                self.omega_min, self.omega_max
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.points - 1) as f64
    }

    pub fn omega(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.omega_max
        } else {
            self.omega_min + i as f64 * self.step()
        }
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.omega(i)).collect()
    }
}

/// Maximal runs of consecutive `true` entries, as inclusive index pairs.
pub(crate) fn runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &on) in mask.iter().enumerate() {
        match (on, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, mask.len() - 1));
    }
    out
}

/// Bisects between `outside` (predicate false) and `inside` (predicate true)
/// until the bracket is narrower than `rel_tol * |inside|`, returning the last
/// point known to satisfy the predicate.
pub(crate) fn bisect_edge(mut outside: f64, mut inside: f64, rel_tol: f64, mut pred: impl FnMut(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let width = (inside - outside).abs();
        if width <= rel_tol * inside.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (outside + inside);
        if mid == outside || mid == inside {
            break;
        }
        if pred(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::new(0.0, 1.0, 2).is_ok());
        assert!(FrequencyGrid::new(1.0, 1.0, 10).is_err());
        assert!(FrequencyGrid::new(2.0, 1.0, 10).is_err());
        assert!(FrequencyGrid::new(0.0, 1.0, 1).is_err());
        assert!(FrequencyGrid::new(-1.0, 1.0, 10).is_err());
        assert!(FrequencyGrid::new(0.0, f64::INFINITY, 10).is_err());
    }

    #[test]
    fn grid_points_hit_endpoints() {
        let g = FrequencyGrid::new(0.1, 0.7, 7).unwrap();
        let w = g.omegas();
        assert_eq!(w.len(), 7);
        assert_eq!(w[0], 0.1);
        assert_eq!(w[6], 0.7);
        assert!((g.step() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn run_extraction() {
        assert_eq!(runs(&[false, true, true, false, true]), vec![(1, 2), (4, 4)]);
        assert_eq!(runs(&[true, true]), vec![(0, 1)]);
        assert!(runs(&[false, false]).is_empty());
    }

    #[test]
    fn bisection_finds_threshold() {
        let edge = bisect_edge(0.0, 1.0, 1e-9, |x| x > 0.3);
        assert!(edge > 0.3 && edge - 0.3 < 1e-9);
        let edge = bisect_edge(1.0, 0.0, 1e-9, |x| x < 0.6);
        assert!(edge < 0.6 && 0.6 - edge < 1e-9);
    }
}

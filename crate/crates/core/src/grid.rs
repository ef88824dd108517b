//! Evaluation grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Point spacing of a [`Grid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Geometric,
}

/// `points` values from `min` to `max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    pub min: T,
    pub max: T,
    pub points: usize,
    pub spacing: Spacing,
}

impl<T: Real> Grid<T> {
    pub fn new(min: T, max: T, points: usize, spacing: Spacing) -> Result<Self> {
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidInput(format!("grid needs finite min < max, got [{min}, {max}]")));
        }
        if points < 2 {
            return Err(Error::InvalidInput(format!("grid needs at least 2 points, got {points}")));
        }
        if spacing == Spacing::Geometric && !(min > T::zero()) {
            return Err(Error::InvalidInput("geometric grid needs min > 0".into()));
        }
        Ok(Self { min, max, points, spacing })
    }

    pub fn linear(min: T, max: T, points: usize) -> Result<Self> {
        Self::new(min, max, points, Spacing::Linear)
    }

    pub fn geometric(min: T, max: T, points: usize) -> Result<Self> {
        Self::new(min, max, points, Spacing::Geometric)
    }

    /// Grid values; the endpoints are reproduced exactly.
    pub fn values(&self) -> Vec<T> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == last {
                    return self.max;
                }
                let (i, last) = (T::count(i as u64), T::count(last as u64));
                match self.spacing {
                    Spacing::Linear => self.min + (self.max - self.min) * i / last,
                    Spacing::Geometric => self.min * (self.max / self.min).powf(i / last),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_spacing() {
        let g = Grid::<f64>::linear(1.0, 10.0, 10).unwrap().values();
        assert_eq!(g, (1..=10).map(f64::from).collect::<Vec<_>>());
        let g = Grid::<f64>::geometric(1.0, 1e3, 4).unwrap().values();
        assert_eq!(g[0], 1.0);
        assert_eq!(g[3], 1e3);
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert!(Grid::linear(2.0, 1.0, 5).is_err());
        assert!(Grid::linear(0.0, 1.0, 1).is_err());
        assert!(Grid::geometric(0.0, 1.0, 3).is_err());
    }
}

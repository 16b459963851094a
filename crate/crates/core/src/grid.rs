use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest grid accepted by [`make_grid`].
pub const MIN_GRID_POINTS: usize = 16;

/// Uniform spatial grid on `[0, length]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    length: f64,
    n_points: usize,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n_points - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        // Pin the last point so it is exactly `length`.
        if j + 1 == self.n_points {
            self.length
        } else {
            j as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.point(j))
    }

    /// Grid with twice the resolution (`2n - 1` points, same endpoints).
    pub fn refined(&self) -> Grid {
        Grid {
            length: self.length,
            n_points: 2 * self.n_points - 1,
        }
    }
}

pub fn make_grid(length: f64, n_points: usize) -> Result<Grid> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::Config(format!(
            "grid length must be positive and finite, got {length}"
        )));
    }
    if n_points < MIN_GRID_POINTS {
        return Err(Error::UnderResolved {
            n_points,
            min: MIN_GRID_POINTS,
        });
    }
    Ok(Grid { length, n_points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_under_resolved() {
        assert_eq!(
            make_grid(1.0, 5),
            Err(Error::UnderResolved {
                n_points: 5,
                min: 16
            })
        );
        assert!(make_grid(0.0, 100).is_err());
        assert!(make_grid(-1.0, 100).is_err());
    }

    #[test]
    fn unit_grid() {
        let g = make_grid(1.0, 101).unwrap();
        assert!((g.spacing() - 0.01).abs() < 1e-15);
        assert_eq!(g.point(0), 0.0);
        assert_eq!(g.point(100), 1.0);
        assert_eq!(g.points().count(), 101);
    }

    #[test]
    fn double_length_grid() {
        let g = make_grid(2.0, 201).unwrap();
        assert!((g.spacing() - 0.01).abs() < 1e-15);
        assert_eq!(g.point(200), 2.0);
    }

    #[test]
    fn refinement_halves_spacing() {
        let g = make_grid(1.0, 101).unwrap().refined();
        assert_eq!(g.len(), 201);
        assert!((g.spacing() - 0.005).abs() < 1e-15);
    }
}

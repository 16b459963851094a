//! Single-excitation field state on the spatial grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::medium::MediumParams;

/// Snapshot of the probe field and atomic coherences at one instant.
///
/// The atomic amplitudes are collective: `sigma13` and `sigma12` hold
/// `sqrt(N) * sigma_13(z)` and `sqrt(N) * sigma_12(z)`, so that
/// `dz * sum |x_j|^2` is directly an excitation probability for every field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub grid: Grid,
    pub e_field: Vec<Complex64>,
    pub sigma13: Vec<Complex64>,
    pub sigma12: Vec<Complex64>,
    pub t_now: f64,
    /// Probability lost to spontaneous emission and ground-state dephasing.
    pub loss_accum: f64,
    /// Probability carried out through `z = L`.
    pub emitted_norm: f64,
    /// Probability injected so far (photon boundary input plus initial magnon).
    pub injected_norm: f64,
}

/// Where the excitation probability currently sits.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormBudget {
    pub photon: f64,
    pub excited: f64,
    pub magnon: f64,
    pub loss: f64,
    pub emitted: f64,
    pub injected: f64,
}

impl NormBudget {
    /// Everything accounted for, to be compared with `injected`.
    pub fn accounted(&self) -> f64 {
        self.photon + self.excited + self.magnon + self.loss + self.emitted
    }

    /// `|accounted - injected| / max(injected, tiny)`.
    pub fn relative_defect(&self) -> f64 {
        (self.accounted() - self.injected).abs() / self.injected.max(1e-300)
    }

    pub fn inside(&self) -> f64 {
        self.photon + self.excited + self.magnon
    }
}

pub(crate) fn grid_norm(v: &[Complex64], dz: f64) -> f64 {
    dz * v.iter().map(|x| x.norm_sqr()).sum::<f64>()
}

impl FieldState {
    pub fn vacuum(grid: Grid) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self {
            grid,
            e_field: zero.clone(),
            sigma13: zero.clone(),
            sigma12: zero,
            t_now: 0.0,
            loss_accum: 0.0,
            emitted_norm: 0.0,
            injected_norm: 0.0,
        }
    }

    pub fn photon_norm(&self) -> f64 {
        grid_norm(&self.e_field, self.grid.spacing())
    }

    pub fn excited_norm(&self) -> f64 {
        grid_norm(&self.sigma13, self.grid.spacing())
    }

    pub fn magnon_norm(&self) -> f64 {
        grid_norm(&self.sigma12, self.grid.spacing())
    }

    pub fn budget(&self) -> NormBudget {
        NormBudget {
            photon: self.photon_norm(),
            excited: self.excited_norm(),
            magnon: self.magnon_norm(),
            loss: self.loss_accum,
            emitted: self.emitted_norm,
            injected: self.injected_norm,
        }
    }
}

/// Split the excitation into photon, atomic and lost parts.
///
/// The optical-coherence part (`excited`) is reported separately; it is
/// small whenever the dynamics stays close to the dark state.
pub fn norm_decomposition(state: &FieldState, medium: &MediumParams) -> Result<NormBudget> {
    if (state.grid.length() - medium.length()).abs() > 1e-12 * medium.length() {
        return Err(Error::Config(format!(
            "state grid length {} does not match medium length {}",
            state.grid.length(),
            medium.length()
        )));
    }
    Ok(state.budget())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn vacuum_is_empty() {
        let m = MediumParams::from_od(30.0, 0.0).unwrap();
        let s = FieldState::vacuum(make_grid(1.0, 101).unwrap());
        let b = norm_decomposition(&s, &m).unwrap();
        assert_eq!((b.photon, b.magnon, b.loss), (0.0, 0.0, 0.0));
    }

    #[test]
    fn free_photon_is_all_photon() {
        let m = MediumParams::from_od(0.0, 0.0).unwrap();
        let grid = make_grid(1.0, 101).unwrap();
        let mut s = FieldState::vacuum(grid);
        let raw: Vec<f64> = grid
            .points()
            .map(|z| (-(z - 0.5f64).powi(2) / 0.01).exp())
            .collect();
        let n = grid_norm(
            &raw.iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect::<Vec<_>>(),
            grid.spacing(),
        );
        s.e_field = raw
            .iter()
            .map(|&x| Complex64::new(x / n.sqrt(), 0.0))
            .collect();
        s.injected_norm = 1.0;
        let b = norm_decomposition(&s, &m).unwrap();
        assert!((b.photon - 1.0).abs() < 1e-12);
        assert_eq!(b.magnon, 0.0);
        assert!(b.relative_defect() < 1e-12);
    }

    #[test]
    fn mismatched_medium_is_rejected() {
        let m = MediumParams::builder().od(1.0).length(2.0).build().unwrap();
        let s = FieldState::vacuum(make_grid(1.0, 101).unwrap());
        assert!(norm_decomposition(&s, &m).is_err());
    }
}

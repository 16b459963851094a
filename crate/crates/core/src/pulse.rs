use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PulseShape {
    Gaussian,
    /// Amplitude samples `(t, a)` with increasing `t`, linearly interpolated
    /// and zero outside the sampled window.
    Sampled(Vec<(f64, f64)>),
}

/// Temporal envelope of a single-photon wavepacket arriving at `z = 0`.
///
/// `fwhm` refers to the intensity profile. The envelope returned by
/// [`PulseEnvelope::amplitude`] has unit peak; the solver rescales the
/// injected samples so their total norm is `amplitude_norm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseEnvelope {
    shape: PulseShape,
    fwhm: f64,
    t_center: f64,
    amplitude_norm: f64,
}

impl PulseEnvelope {
    pub fn gaussian(fwhm: f64, t_center: f64) -> Result<Self> {
        Self::new(PulseShape::Gaussian, fwhm, t_center, 1.0)
    }

    pub fn new(shape: PulseShape, fwhm: f64, t_center: f64, amplitude_norm: f64) -> Result<Self> {
        if !(fwhm > 0.0) || !fwhm.is_finite() {
            return Err(Error::Config(format!("pulse fwhm must be > 0, got {fwhm}")));
        }
        if !(0.0..=1.0).contains(&amplitude_norm) {
            return Err(Error::Config(format!(
                "pulse norm must lie in [0, 1], got {amplitude_norm}"
            )));
        }
        if let PulseShape::Sampled(s) = &shape {
            if s.len() < 2 || s.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                return Err(Error::Config(
                    "sampled pulse needs >= 2 strictly increasing times".into(),
                ));
            }
        }
        Ok(Self {
            shape,
            fwhm,
            t_center,
            amplitude_norm,
        })
    }

    pub fn with_norm(mut self, amplitude_norm: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&amplitude_norm) {
            return Err(Error::Config(format!(
                "pulse norm must lie in [0, 1], got {amplitude_norm}"
            )));
        }
        self.amplitude_norm = amplitude_norm;
        Ok(self)
    }

    pub fn shifted(mut self, dt: f64) -> Self {
        self.t_center += dt;
        if let PulseShape::Sampled(s) = &mut self.shape {
            for p in s.iter_mut() {
                p.0 += dt;
            }
        }
        self
    }

    pub fn fwhm(&self) -> f64 {
        self.fwhm
    }

    pub fn t_center(&self) -> f64 {
        self.t_center
    }

    pub fn amplitude_norm(&self) -> f64 {
        self.amplitude_norm
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    /// Gaussian 1/e intensity half-width, `fwhm / (2 sqrt(ln 2))`.
    pub fn tau_p(&self) -> f64 {
        self.fwhm / (2.0 * std::f64::consts::LN_2.sqrt())
    }

    /// Earliest time with non-negligible amplitude (about 1e-8 of the peak
    /// intensity for the Gaussian family).
    pub fn t_first(&self) -> f64 {
        match &self.shape {
            PulseShape::Gaussian => self.t_center - 2.6 * self.fwhm,
            PulseShape::Sampled(s) => s[0].0,
        }
    }

    pub fn t_last(&self) -> f64 {
        match &self.shape {
            PulseShape::Gaussian => self.t_center + 2.6 * self.fwhm,
            PulseShape::Sampled(s) => s[s.len() - 1].0,
        }
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        match &self.shape {
            PulseShape::Gaussian => {
                let x = (t - self.t_center) / self.fwhm;
                (-2.0 * std::f64::consts::LN_2 * x * x).exp()
            }
            PulseShape::Sampled(s) => {
                if t < s[0].0 || t > s[s.len() - 1].0 {
                    return 0.0;
                }
                let k = s.partition_point(|p| p.0 <= t).clamp(1, s.len() - 1);
                let (t0, a0) = s[k - 1];
                let (t1, a1) = s[k];
                a0 + (a1 - a0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_fwhm_is_intensity_fwhm() {
        let p = PulseEnvelope::gaussian(2.0, 5.0).unwrap();
        let half = p.amplitude(6.0).powi(2);
        assert!((half - 0.5).abs() < 1e-12);
        assert_eq!(p.amplitude(5.0), 1.0);
        let e = p.amplitude(5.0 + p.tau_p()).powi(2);
        assert!((e - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn sampled_interpolates() {
        let p = PulseEnvelope::new(
            PulseShape::Sampled(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]),
            1.0,
            1.0,
            1.0,
        )
        .unwrap();
        assert!((p.amplitude(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(p.amplitude(3.0), 0.0);
        assert_eq!(p.shifted(1.0).amplitude(2.0), 1.0);
    }

    #[test]
    fn rejects_invalid() {
        assert!(PulseEnvelope::gaussian(0.0, 0.0).is_err());
        assert!(PulseEnvelope::new(PulseShape::Gaussian, 1.0, 0.0, 1.5).is_err());
        assert!(PulseEnvelope::new(PulseShape::Sampled(vec![(0.0, 1.0)]), 1.0, 0.0, 1.0).is_err());
    }
}

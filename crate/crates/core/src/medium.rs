//! Atomic-ensemble parameters.
//!
//! Everything is in normalized units: lengths in units of the medium length,
//! times in units of `1/gamma31`, rates and Rabi frequencies in units of
//! `gamma31`. The optical depth is the intensity OD, so a resonant probe with
//! the control off is transmitted as `exp(-od)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default propagation speed of the bare probe in the co-moving frame, in
/// medium lengths per `1/gamma31`. It only has to be large compared with the
/// EIT group velocity and with `length / pulse_duration`.
pub const DEFAULT_LIGHT_SPEED: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    od: f64,
    gamma31: f64,
    gamma12: f64,
    delta: f64,
    length: f64,
    coupling: f64,
    light_speed: f64,
}

impl MediumParams {
    /// Medium of unit length with `gamma31 = 1`, coupling derived from `od`.
    pub fn from_od(od: f64, delta: f64) -> Result<Self> {
        Self::builder().od(od).delta(delta).build()
    }

    pub fn builder() -> MediumBuilder {
        MediumBuilder::default()
    }

    pub fn od(&self) -> f64 {
        self.od
    }

    pub fn gamma31(&self) -> f64 {
        self.gamma31
    }

    pub fn gamma12(&self) -> f64 {
        self.gamma12
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Collective coupling `g * sqrt(N)`.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn light_speed(&self) -> f64 {
        self.light_speed
    }

    /// EIT group velocity for a constant control `|omega|`.
    pub fn group_velocity(&self, omega: f64) -> f64 {
        let half = 0.5 * omega;
        self.light_speed * half * half / (half * half + self.coupling * self.coupling)
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_gamma12(mut self, gamma12: f64) -> Result<Self> {
        if !(gamma12 >= 0.0) {
            return Err(Error::Config(format!(
                "gamma12 must be >= 0, got {gamma12}"
            )));
        }
        self.gamma12 = gamma12;
        Ok(self)
    }
}

/// Exactly one of `od` and `coupling` is given; the other is derived from
/// `od = 2 coupling^2 length / (gamma31 light_speed)`.
#[derive(Debug, Clone)]
pub struct MediumBuilder {
    od: Option<f64>,
    coupling: Option<f64>,
    gamma31: f64,
    gamma12: f64,
    delta: f64,
    length: f64,
    light_speed: f64,
}

impl Default for MediumBuilder {
    fn default() -> Self {
        Self {
            od: None,
            coupling: None,
            gamma31: 1.0,
            gamma12: 0.0,
            delta: 0.0,
            length: 1.0,
            light_speed: DEFAULT_LIGHT_SPEED,
        }
    }
}

impl MediumBuilder {
    pub fn od(mut self, od: f64) -> Self {
        self.od = Some(od);
        self
    }

    pub fn coupling(mut self, coupling: f64) -> Self {
        self.coupling = Some(coupling);
        self
    }

    pub fn gamma31(mut self, v: f64) -> Self {
        self.gamma31 = v;
        self
    }

    pub fn gamma12(mut self, v: f64) -> Self {
        self.gamma12 = v;
        self
    }

    pub fn delta(mut self, v: f64) -> Self {
        self.delta = v;
        self
    }

    pub fn length(mut self, v: f64) -> Self {
        self.length = v;
        self
    }

    pub fn light_speed(mut self, v: f64) -> Self {
        self.light_speed = v;
        self
    }

    pub fn build(self) -> Result<MediumParams> {
        let bad = |what: &str, v: f64| Err(Error::Config(format!("{what} out of range: {v}")));
        if !(self.gamma31 > 0.0) || !self.gamma31.is_finite() {
            return bad("gamma31 (must be > 0)", self.gamma31);
        }
        if !(self.gamma12 >= 0.0) || !self.gamma12.is_finite() {
            return bad("gamma12 (must be >= 0)", self.gamma12);
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return bad("length (must be > 0)", self.length);
        }
        if !(self.light_speed > 0.0) || !self.light_speed.is_finite() {
            return bad("light_speed (must be > 0)", self.light_speed);
        }
        if !self.delta.is_finite() {
            return bad("delta", self.delta);
        }
        let scale = 2.0 * self.length / (self.gamma31 * self.light_speed);
        let (od, coupling) = match (self.od, self.coupling) {
            (Some(od), None) => {
                if !(od >= 0.0) || !od.is_finite() {
                    return bad("od (must be >= 0)", od);
                }
                (od, (od / scale).sqrt())
            }
            (None, Some(g)) => {
                if !(g >= 0.0) || !g.is_finite() {
                    return bad("coupling (must be >= 0)", g);
                }
                (scale * g * g, g)
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either od or coupling, not both".into()));
            }
            (None, None) => return Err(Error::Config("one of od or coupling is required".into())),
        };
        Ok(MediumParams {
            od,
            gamma31: self.gamma31,
            gamma12: self.gamma12,
            delta: self.delta,
            length: self.length,
            coupling,
            light_speed: self.light_speed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn od_and_coupling_are_consistent() {
        let m = MediumParams::from_od(30.0, 0.0).unwrap();
        let od = 2.0 * m.coupling().powi(2) * m.length() / (m.gamma31() * m.light_speed());
        assert!((od - 30.0).abs() < 1e-12);

        let m2 = MediumParams::builder()
            .coupling(m.coupling())
            .build()
            .unwrap();
        assert!((m2.od() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_invalid() {
        assert!(MediumParams::from_od(-1.0, 0.0).is_err());
        assert!(MediumParams::builder()
            .od(1.0)
            .gamma31(0.0)
            .build()
            .is_err());
        assert!(MediumParams::builder().od(1.0).length(0.0).build().is_err());
        assert!(MediumParams::builder()
            .od(1.0)
            .coupling(1.0)
            .build()
            .is_err());
        assert!(MediumParams::builder().build().is_err());
        assert!(MediumParams::builder()
            .od(1.0)
            .gamma12(-0.1)
            .build()
            .is_err());
    }

    #[test]
    fn group_velocity_limits() {
        let m = MediumParams::from_od(30.0, 0.0).unwrap();
        assert_eq!(m.group_velocity(0.0), 0.0);
        assert!((m.group_velocity(1e6) - m.light_speed()).abs() / m.light_speed() < 1e-6);
        // Slow-light regime: v_g ~ omega^2 / (2 od) for light_speed -> infinity.
        let v = m.group_velocity(5.0);
        assert!((v - 25.0 / 60.0).abs() / v < 0.01);
    }
}

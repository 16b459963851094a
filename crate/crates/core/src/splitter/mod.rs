//! The quantum memory as a 2x2 hybrid beam splitter between a magnon port and
//! a photon port.
//!
//! Convention: the transfer matrix maps input amplitudes `(M_in, A_in)` to
//! output amplitudes `(M_out, A_out)`,
//!
//! ```text
//! | M_out |   | t1  r2 | | M_in |
//! | A_out | = | r1  t2 | | A_in |
//! ```
//!
//! so `(t1, r1)` describe a magnon input and `(t2, r2)` a photon input.

mod analytic;
mod extract;

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use analytic::{
    calibrate_control, monotone_coverage, phi_rt_analytic, CalibrationPoint, Coverage, PhiRtParams,
};
pub use extract::{
    extract_matrix, extract_with_switch_off, imbalance, project_ports, Extraction,
    InterferenceSetup, PortOutputs,
};

/// Slack allowed on passivity checks.
pub const PASSIVITY_TOL: f64 = 1e-9;

/// Map an angle to `[0, 2 pi)`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed distance between two angles, in `(-pi, pi]`.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = wrap_phase(a - b);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitterMatrix {
    pub t1: Complex64,
    pub r1: Complex64,
    pub t2: Complex64,
    pub r2: Complex64,
}

impl SplitterMatrix {
    /// Passive splitter; rejects matrices with a singular value above 1.
    pub fn new(t1: Complex64, r1: Complex64, t2: Complex64, r2: Complex64) -> Result<Self> {
        let m = Self { t1, r1, t2, r2 };
        let s = m.singular_values();
        if s[0] > 1.0 + PASSIVITY_TOL {
            return Err(Error::NonPhysicalGain(s[0]));
        }
        Ok(m)
    }

    /// Real-amplitude splitter from the four intensity ratios, with the
    /// given phase put on `r2` (so `phi_rt` equals `phase` mod 2 pi).
    pub fn from_intensities(
        t1_sq: f64,
        r1_sq: f64,
        t2_sq: f64,
        r2_sq: f64,
        phase: f64,
    ) -> Result<Self> {
        if [t1_sq, r1_sq, t2_sq, r2_sq].iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::Config(
                "splitting ratios must be non-negative".into(),
            ));
        }
        let re = |x: f64| Complex64::new(x.sqrt(), 0.0);
        Self::new(
            re(t1_sq),
            re(r1_sq),
            re(t2_sq),
            Complex64::from_polar(r2_sq.sqrt(), phase),
        )
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            t1: one,
            r1: zero,
            t2: one,
            r2: zero,
        }
    }

    pub fn as_matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(self.t1, self.r2, self.r1, self.t2)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            t1: self.t1 * s,
            r1: self.r1 * s,
            t2: self.t2 * s,
            r2: self.r2 * s,
        }
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> [f64; 2] {
        let sv = self.as_matrix().singular_values();
        let (a, b) = (sv[0], sv[1]);
        if a >= b {
            [a, b]
        } else {
            [b, a]
        }
    }

    /// `(|t1|^2 + |r1|^2, |t2|^2 + |r2|^2)`.
    pub fn port_sums(&self) -> (f64, f64) {
        (
            self.t1.norm_sqr() + self.r1.norm_sqr(),
            self.t2.norm_sqr() + self.r2.norm_sqr(),
        )
    }

    /// `|t1 t2| / |r1 r2|`; equals 1 for the symmetric splitting
    /// `|t1/r1| = |r2/t2|`.
    pub fn balance(&self) -> f64 {
        (self.t1 * self.t2).norm() / (self.r1 * self.r2).norm()
    }
}

/// `phi_rt = arg r1 - arg t2 + arg r2 - arg t1`, in `[0, 2 pi)`.
pub fn phi_rt_of_matrix(m: &SplitterMatrix) -> Result<f64> {
    for (name, v) in [("t1", m.t1), ("r1", m.r1), ("t2", m.t2), ("r2", m.r2)] {
        if v.norm() == 0.0 {
            return Err(Error::UndefinedPhase(name));
        }
    }
    // A single product keeps the result exactly invariant under port phases.
    Ok(wrap_phase((m.r1 * m.r2 * (m.t1 * m.t2).conj()).arg()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiticityReport {
    pub magnon_port_sum: f64,
    pub photon_port_sum: f64,
    pub singular_values: [f64; 2],
    pub phi_rt: Option<f64>,
    /// Frobenius distance to the nearest unitary matrix.
    pub unitarity_distance: f64,
    pub unitary: bool,
}

pub fn hermiticity_report(m: &SplitterMatrix) -> HermiticityReport {
    let (magnon_port_sum, photon_port_sum) = m.port_sums();
    let singular_values = m.singular_values();
    // Nearest unitary is the polar factor, at distance ||Sigma - 1||_F.
    let unitarity_distance = singular_values
        .iter()
        .map(|s| (s - 1.0).powi(2))
        .sum::<f64>()
        .sqrt();
    HermiticityReport {
        magnon_port_sum,
        photon_port_sum,
        singular_values,
        phi_rt: phi_rt_of_matrix(m).ok(),
        unitarity_distance,
        unitary: unitarity_distance < 1e-9,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symmetric_lossless_is_pi() {
        let th: f64 = 0.3;
        let m = SplitterMatrix::new(
            c(th.cos(), 0.0),
            c(0.0, th.sin()),
            c(th.cos(), 0.0),
            c(0.0, th.sin()),
        )
        .unwrap();
        assert!((phi_rt_of_matrix(&m).unwrap() - PI).abs() < 1e-12);
        assert!(hermiticity_report(&m).unitary);
    }

    #[test]
    fn real_positive_is_zero() {
        let m = SplitterMatrix::new(c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)).unwrap();
        assert_eq!(phi_rt_of_matrix(&m).unwrap(), 0.0);
    }

    #[test]
    fn zero_amplitude_has_no_phase() {
        assert_eq!(
            phi_rt_of_matrix(&SplitterMatrix::identity()),
            Err(Error::UndefinedPhase("r1"))
        );
    }

    #[test]
    fn gain_is_rejected() {
        assert!(matches!(
            SplitterMatrix::new(c(1.0, 0.0), c(0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            Err(Error::NonPhysicalGain(_))
        ));
    }

    #[test]
    fn identity_report() {
        let r = hermiticity_report(&SplitterMatrix::identity());
        assert_eq!((r.magnon_port_sum, r.photon_port_sum), (1.0, 1.0));
        assert!(r.unitarity_distance < 1e-15);
        assert!(r.unitary);
        assert_eq!(r.phi_rt, None);
    }

    #[test]
    fn half_identity_report() {
        let r = hermiticity_report(&SplitterMatrix::identity().scaled(0.5));
        assert!((r.magnon_port_sum - 0.25).abs() < 1e-15);
        assert!((r.photon_port_sum - 0.25).abs() < 1e-15);
        assert!((r.singular_values[0] - 0.5).abs() < 1e-12);
        assert!((r.singular_values[1] - 0.5).abs() < 1e-12);
        assert!(!r.unitary);
    }

    #[test]
    fn measured_magnitudes_are_non_unitary() {
        let m = SplitterMatrix::from_intensities(0.15, 0.20, 0.26, 0.22, 0.0).unwrap();
        let r = hermiticity_report(&m);
        assert!((r.magnon_port_sum - 0.35).abs() < 1e-12);
        assert!((r.photon_port_sum - 0.48).abs() < 1e-12);
        assert!(r.unitarity_distance > 0.1);
        assert!(!r.unitary);
        assert!(r.singular_values[0] <= 1.0);
    }

    #[test]
    fn wrap_and_distance() {
        assert_eq!(wrap_phase(-1e-300), 0.0);
        assert!((wrap_phase(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!((phase_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
    }

    fn arb_amp() -> impl Strategy<Value = Complex64> {
        (0.05f64..0.7, 0.0f64..TAU).prop_map(|(r, p)| Complex64::from_polar(r, p))
    }

    proptest! {
        #[test]
        fn phi_rt_ignores_port_phases(
            t1 in arb_amp(), r1 in arb_amp(), t2 in arb_amp(), r2 in arb_amp(),
            a in 0.0f64..TAU, b in 0.0f64..TAU, cc in 0.0f64..TAU, d in 0.0f64..TAU,
        ) {
            let m = SplitterMatrix { t1, r1, t2, r2 };
            let phi = phi_rt_of_matrix(&m).unwrap();
            // Row phases (output ports) a, b and column phases (input ports) cc, d.
            let u = |x: f64| Complex64::from_polar(1.0, x);
            let g = SplitterMatrix {
                t1: u(a) * t1 * u(cc),
                r2: u(a) * r2 * u(d),
                r1: u(b) * r1 * u(cc),
                t2: u(b) * t2 * u(d),
            };
            let phi_g = phi_rt_of_matrix(&g).unwrap();
            prop_assert!(phase_distance(phi, phi_g).abs() < 1e-12);
        }
    }
}

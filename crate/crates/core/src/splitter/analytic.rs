//! Closed-form reflection/transmission phase of the memory splitter.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{phase_distance, wrap_phase};
use crate::error::{Error, Result};

/// Inputs of the closed-form phase. Any consistent unit system works; the
/// formula only uses the dimensionless combinations
/// `|Omega|^2 tau_p / gamma31` and `delta / gamma31`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiRtParams {
    pub omega_c: f64,
    pub tau_p: f64,
    pub gamma31: f64,
    pub delta: f64,
    pub eta: f64,
}

impl PhiRtParams {
    fn validate(&self) -> Result<()> {
        if !(self.tau_p > 0.0) {
            return Err(Error::Config(format!(
                "tau_p must be > 0, got {}",
                self.tau_p
            )));
        }
        if !(self.gamma31 > 0.0) {
            return Err(Error::Config(format!(
                "gamma31 must be > 0, got {}",
                self.gamma31
            )));
        }
        if !(self.eta >= 0.0) {
            return Err(Error::Config(format!(
                "optical depth must be >= 0, got {}",
                self.eta
            )));
        }
        Ok(())
    }

    /// `xi = exp(-|Omega|^2 tau_p / (4 (gamma31 - i delta)))`.
    pub fn xi(&self) -> Complex64 {
        let w2 = self.omega_c * self.omega_c;
        (-Complex64::new(w2 * self.tau_p, 0.0) / (4.0 * Complex64::new(self.gamma31, -self.delta)))
            .exp()
    }

    /// `zeta = |Omega|^2 tau_p / (4 gamma31)`.
    pub fn zeta(&self) -> f64 {
        self.omega_c * self.omega_c * self.tau_p / (4.0 * self.gamma31)
    }
}

/// `arg[1 - 1/xi] + arg[eta (xi - 1) / (zeta - eta (1 - xi))]`, each argument
/// taken as the principal value and the sum reduced to `[0, 2 pi)`.
pub fn phi_rt_analytic(p: &PhiRtParams) -> Result<f64> {
    p.validate()?;
    if p.eta == 0.0 {
        return Err(Error::DegenerateMedium);
    }
    let xi = p.xi();
    let one = Complex64::new(1.0, 0.0);
    if (one - xi).norm() < 1e-12 {
        return Err(Error::Singular(
            "xi = 1: the control does not drive the memory".into(),
        ));
    }
    // 1 - 1/xi = -e^w (1 - xi) with xi = e^-w; this form survives xi
    // underflowing at strong control.
    let w = Complex64::new(p.omega_c * p.omega_c * p.tau_p, 0.0)
        / (4.0 * Complex64::new(p.gamma31, -p.delta));
    let first_arg = std::f64::consts::PI + w.im + (one - xi).arg();
    let numerator = p.eta * (xi - one);
    let denominator = p.zeta() - p.eta * (one - xi);
    let scale = p.zeta().abs().max((p.eta * (one - xi)).norm());
    if denominator.norm() < 1e-12 * scale {
        return Err(Error::Singular(format!(
            "pole: zeta - eta (1 - xi) = {denominator:.3e}"
        )));
    }
    Ok(wrap_phase(first_arg + (numerator / denominator).arg()))
}

/// One `(eta, delta) -> phi_rt` target used to calibrate the control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub eta: f64,
    pub delta: f64,
    pub target: f64,
}

/// Scan `|Omega|` over `[lo, hi]` for the value minimizing the worst circular
/// deviation from the targets; returns `(omega, worst_deviation)`.
pub fn calibrate_control(
    points: &[CalibrationPoint],
    tau_p: f64,
    gamma31: f64,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    if points.is_empty() || !(hi > lo) || !(lo > 0.0) {
        return Err(Error::Precondition(
            "calibration needs targets and a range 0 < lo < hi".into(),
        ));
    }
    let worst = |omega: f64| -> f64 {
        points
            .iter()
            .map(|pt| {
                let p = PhiRtParams {
                    omega_c: omega,
                    tau_p,
                    gamma31,
                    delta: pt.delta,
                    eta: pt.eta,
                };
                phi_rt_analytic(&p)
                    .map_or(f64::INFINITY, |phi| phase_distance(phi, pt.target).abs())
            })
            .fold(0.0, f64::max)
    };
    let mut best = (lo, f64::INFINITY);
    let (mut a, mut b) = (lo, hi);
    // Coarse scan, then two zooms around the best sample.
    for _ in 0..3 {
        let n = 4000;
        for k in 0..=n {
            let w = a + (b - a) * k as f64 / n as f64;
            let v = worst(w);
            if v < best.1 {
                best = (w, v);
            }
        }
        let h = 4.0 * (b - a) / n as f64;
        a = (best.0 - h).max(lo);
        b = (best.0 + h).min(hi);
    }
    Ok(best)
}

/// Monotone stretch of an unwrapped `phi_rt` curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    /// Sweep parameter values and unwrapped phases up to the covering point.
    pub parameter: Vec<f64>,
    pub phase: Vec<f64>,
    /// Largest jump between neighbouring samples.
    pub max_step: f64,
    pub monotone: bool,
    /// Parameter value where the curve has moved by `span` from its start.
    pub reached_at: Option<f64>,
}

/// Follow `phi(s)` for `s` from `s0` to `s1` in `n` steps, unwrapping, and
/// stop once the phase has moved by `span` away from its starting value.
pub fn monotone_coverage<F>(phi: F, s0: f64, s1: f64, n: usize, span: f64) -> Result<Coverage>
where
    F: Fn(f64) -> Result<f64>,
{
    if n < 2 {
        return Err(Error::Precondition(
            "coverage sweep needs at least 2 steps".into(),
        ));
    }
    let mut parameter = vec![s0];
    let mut phase = vec![phi(s0)?];
    let mut max_step: f64 = 0.0;
    let mut reached_at = None;
    for k in 1..=n {
        let s = s0 + (s1 - s0) * k as f64 / n as f64;
        let raw = phi(s)?;
        let prev = *phase.last().unwrap();
        let next = prev + phase_distance(raw, wrap_phase(prev));
        max_step = max_step.max((next - prev).abs());
        parameter.push(s);
        phase.push(next);
        if (next - phase[0]).abs() >= span {
            reached_at = Some(s);
            break;
        }
    }
    let increasing = phase.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = phase.windows(2).all(|w| w[1] <= w[0]);
    Ok(Coverage {
        parameter,
        phase,
        max_step,
        monotone: increasing || decreasing,
        reached_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Direct transcription with numpy-style principal arguments, kept
    /// separate from the implementation above.
    fn oracle(w: f64, tau: f64, g: f64, d: f64, eta: f64) -> f64 {
        let xi = (-(w * w * tau) / (4.0 * Complex64::new(g, -d))).exp();
        let zeta = w * w * tau / (4.0 * g);
        let t1 = (1.0 - 1.0 / xi).arg();
        let t2 = (eta * (xi - 1.0) / (zeta - eta * (1.0 - xi))).arg();
        (t1 + t2).rem_euclid(2.0 * PI)
    }

    fn params(w: f64, d: f64, eta: f64) -> PhiRtParams {
        PhiRtParams {
            omega_c: w,
            tau_p: 1.132,
            gamma31: 1.0,
            delta: d,
            eta,
        }
    }

    #[test]
    fn resonant_values_are_zero_or_pi() {
        // Weak control: zeta < eta (1 - xi), both arguments pi and 0.
        let phi = phi_rt_analytic(&params(5.0, 0.0, 30.0)).unwrap();
        assert!((phi - PI).abs() < 1e-12);
        // Strong control: both arguments pi.
        let phi = phi_rt_analytic(&params(20.0, 0.0, 30.0)).unwrap();
        assert!(phi.abs() < 1e-12 || (phi - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn matches_transcription() {
        for &(w, d, eta) in &[
            (5.0, 3.0, 30.0),
            (12.0, 10.0, 66.0),
            (34.0, 20.0, 100.0),
            (8.0, -2.0, 150.0),
        ] {
            let a = phi_rt_analytic(&params(w, d, eta)).unwrap();
            let b = oracle(w, 1.132, 1.0, d, eta);
            assert!(
                phase_distance(a, b).abs() < 1e-12,
                "{w} {d} {eta}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn degenerate_and_singular() {
        assert_eq!(
            phi_rt_analytic(&params(10.0, 0.0, 0.0)),
            Err(Error::DegenerateMedium)
        );
        assert!(matches!(
            phi_rt_analytic(&params(0.0, 0.0, 30.0)),
            Err(Error::Singular(_))
        ));
        assert!(phi_rt_analytic(&PhiRtParams {
            tau_p: 0.0,
            ..params(1.0, 0.0, 1.0)
        })
        .is_err());
        // On resonance the pole sits where zeta = eta (1 - exp(-zeta)).
        let mut lo: f64 = 1.0;
        let mut hi: f64 = 60.0;
        let f = |z: f64| z - 30.0 * (1.0 - (-z).exp());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let w = (4.0 * lo / 1.132).sqrt();
        assert!(matches!(
            phi_rt_analytic(&params(w, 0.0, 30.0)),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn invariant_under_unit_rescaling() {
        // SI-style inputs: gamma31 = 2 pi 3 MHz, tau_p in seconds.
        let g = 2.0 * PI * 3e6;
        let si = PhiRtParams {
            omega_c: 12.0 * g,
            tau_p: 1.132 / g,
            gamma31: g,
            delta: 10.0 * g,
            eta: 66.0,
        };
        let a = phi_rt_analytic(&si).unwrap();
        let b = phi_rt_analytic(&params(12.0, 10.0, 66.0)).unwrap();
        assert!(phase_distance(a, b).abs() < 1e-9);
    }

    #[test]
    fn coverage_of_a_linear_ramp() {
        let c = monotone_coverage(|s| Ok(wrap_phase(s)), 0.0, 10.0, 1000, PI).unwrap();
        assert!(c.monotone);
        assert!((c.reached_at.unwrap() - PI).abs() < 0.011);
        assert!(c.max_step < 0.011);
    }
}

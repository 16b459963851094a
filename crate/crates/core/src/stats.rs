//! Closed-form two- and three-photon correlations, the classical bounds they
//! are compared against, and models of the overlap ratio versus delay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mbloch::EnvelopeOverlap;
use crate::splitter::phase_distance;

/// Overlap ratio `I` as a function of the relative delay `delta_tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OverlapEnvelope {
    /// `peak * exp(-(delta_tau / width)^2)`.
    Gaussian { peak: f64, width: f64 },
    /// Linear interpolation of a sampled table, zero outside it. Samples are
    /// sorted by delay.
    FromSolver { samples: Vec<(f64, f64)> },
    /// The same overlap at every delay.
    Uniform { value: f64 },
}

impl OverlapEnvelope {
    pub fn gaussian(peak: f64, width: f64) -> Result<Self> {
        check_unit(peak, "envelope peak")?;
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::Config(format!(
                "envelope width must be positive and finite, got {width}"
            )));
        }
        Ok(Self::Gaussian { peak, width })
    }

    /// Envelope of two Gaussian pulses of intensity full width `fwhm` whose
    /// overlap at zero delay is `peak`. The squared amplitude overlap of two
    /// such pulses falls off as `exp(-2 ln 2 (delta_tau / fwhm)^2)`.
    pub fn from_pulse_fwhm(peak: f64, fwhm: f64) -> Result<Self> {
        Self::gaussian(peak, fwhm / (2.0 * std::f64::consts::LN_2).sqrt())
    }

    pub fn uniform(value: f64) -> Result<Self> {
        check_unit(value, "overlap ratio")?;
        Ok(Self::Uniform { value })
    }

    pub fn from_samples(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Precondition(
                "a sampled envelope needs at least two points".into(),
            ));
        }
        for &(t, i) in &samples {
            if !t.is_finite() {
                return Err(Error::Config("envelope delays must be finite".into()));
            }
            check_unit(i, "overlap ratio")?;
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Precondition(
                "envelope delays must be distinct".into(),
            ));
        }
        Ok(Self::FromSolver { samples })
    }

    /// Table from a solver cross-correlation, indexed by delay relative to
    /// the best alignment.
    pub fn from_solver(overlap: &EnvelopeOverlap) -> Result<Self> {
        Self::from_samples(overlap.by_delta_tau())
    }

    pub fn at(&self, delta_tau: f64) -> f64 {
        match self {
            Self::Gaussian { peak, width } => peak * (-(delta_tau / width).powi(2)).exp(),
            Self::Uniform { value } => *value,
            Self::FromSolver { samples } => {
                let k = samples.partition_point(|(t, _)| *t <= delta_tau);
                if k == samples.len() {
                    let (t, i) = samples[k - 1];
                    return if t == delta_tau { i } else { 0.0 };
                }
                if k == 0 {
                    return 0.0;
                }
                let ((t0, i0), (t1, i1)) = (samples[k - 1], samples[k]);
                let w = (delta_tau - t0) / (t1 - t0);
                i0 * (1.0 - w) + i1 * w
            }
        }
    }

    pub fn peak(&self) -> f64 {
        self.at(0.0)
    }
}

fn check_unit(x: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::ProbabilityRange {
            what: what.into(),
            value: x,
        })
    }
}

/// `g2 = 1 + I(delta_tau) cos(phi_rt)`.
pub fn g2(delta_tau: f64, phi_rt: f64, env: &OverlapEnvelope) -> f64 {
    1.0 + env.at(delta_tau) * phi_rt.cos()
}

/// Phase below which a splitter counts as in phase for the three-photon
/// product formula.
pub const IN_PHASE_TOL: f64 = 1e-9;

/// `g3 = (1 + I(delta_tau1)) (1 + I(delta_tau2))`, valid for in-phase
/// splitters only.
pub fn g3(delta_tau1: f64, delta_tau2: f64, phi_rt: f64, env: &OverlapEnvelope) -> Result<f64> {
    if phase_distance(phi_rt, 0.0) > IN_PHASE_TOL {
        return Err(Error::OutOfValidity(format!(
            "three-photon product form requires phi_rt = 0, got {phi_rt:.6}"
        )));
    }
    Ok((1.0 + env.at(delta_tau1)) * (1.0 + env.at(delta_tau2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalBounds {
    pub g2_low: f64,
    pub g2_high: f64,
    pub g3_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classicality {
    SubClassical,
    Classical,
    SuperClassical,
}

impl Classicality {
    pub fn is_quantum(self) -> bool {
        self != Self::Classical
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::SubClassical => "sub_classical",
            Self::Classical => "classical",
            Self::SuperClassical => "super_classical",
        }
    }
}

impl ClassicalBounds {
    pub fn classify_g2(&self, g2: f64) -> Classicality {
        if g2 < self.g2_low {
            Classicality::SubClassical
        } else if g2 > self.g2_high {
            Classicality::SuperClassical
        } else {
            Classicality::Classical
        }
    }

    pub fn classify_g3(&self, g3: f64) -> Classicality {
        if g3 > self.g3_high {
            Classicality::SuperClassical
        } else {
            Classicality::Classical
        }
    }
}

/// Classical limits for the two-photon (`0.5`, `1.5`) and three-photon
/// (`1.5^2`) correlations.
pub fn classical_bounds() -> ClassicalBounds {
    ClassicalBounds {
        g2_low: 0.5,
        g2_high: 1.5,
        g3_high: 1.5 * 1.5,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedEnvelope {
    pub envelope: OverlapEnvelope,
    /// Euclidean norm of the residuals in `g2`.
    pub residual: f64,
}

/// Smallest `|cos phi_rt|` for which overlaps can be read off `g2`.
pub const MIN_VISIBILITY: f64 = 0.1;

/// Least-squares fit of a centred Gaussian `I(delta_tau)` to measured
/// `(delta_tau, g2)` pairs at a fixed `phi_rt`.
///
/// For a given width the optimal peak is linear in the data; the width is
/// found by a coarse logarithmic scan refined by golden-section search.
pub fn fit_envelope(samples: &[(f64, f64)], phi_rt: f64) -> Result<FittedEnvelope> {
    if samples.len() < 3 {
        return Err(Error::Precondition(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    let c = phi_rt.cos();
    if c.abs() <= MIN_VISIBILITY {
        return Err(Error::Unobservable(c.abs()));
    }
    // Everything is done on g2 - 1 = c I(t) so the residual is in g2 units.
    let fit_peak = |w: f64| -> (f64, f64) {
        let (mut num, mut den) = (0.0, 0.0);
        for &(t, g) in samples {
            let e = c * (-(t / w).powi(2)).exp();
            num += e * (g - 1.0);
            den += e * e;
        }
        let peak = if den > 0.0 {
            (num / den).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let res: f64 = samples
            .iter()
            .map(|&(t, g)| (g - 1.0 - c * peak * (-(t / w).powi(2)).exp()).powi(2))
            .sum();
        (peak, res.sqrt())
    };

    let spread = samples
        .iter()
        .map(|s| s.0.abs())
        .fold(0.0, f64::max)
        .max(1e-12);
    let (lo, hi) = ((spread * 1e-3).ln(), (spread * 1e3).ln());
    let n = 200;
    let cost = |x: f64| fit_peak(x.exp()).1;
    let grid: Vec<f64> = (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .collect();
    let kbest = (0..=n)
        .min_by(|&a, &b| cost(grid[a]).total_cmp(&cost(grid[b])))
        .unwrap_or(0);
    let (mut a, mut b) = (grid[kbest.saturating_sub(1)], grid[(kbest + 1).min(n)]);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let x1 = b - ratio * (b - a);
        let x2 = a + ratio * (b - a);
        if cost(x1) < cost(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let width = (0.5 * (a + b)).exp();
    let (peak, residual) = fit_peak(width);
    Ok(FittedEnvelope {
        envelope: OverlapEnvelope::gaussian(peak, width)?,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{g2_from_distribution, output_distribution, splitter_network, FockInput};
    use crate::splitter::SplitterMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn formula_examples() {
        let one = OverlapEnvelope::uniform(1.0).unwrap();
        assert!(g2(0.0, PI, &one).abs() < 1e-15);
        let e = OverlapEnvelope::gaussian(0.75, 1.0).unwrap();
        assert!((g2(0.0, 0.0, &e) - 1.75).abs() < 1e-15);
        assert!((g2(50.0, 1.0, &e) - 1.0).abs() < 1e-15);
        assert!((g2(0.0, PI / 2.0, &e) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_photon_product() {
        let one = OverlapEnvelope::uniform(1.0).unwrap();
        assert_eq!(g3(0.0, 0.0, 0.0, &one), Ok(4.0));
        let e = OverlapEnvelope::gaussian(1.0, 1.0).unwrap();
        assert!((g3(1e3, 1e3, 0.0, &e).unwrap() - 1.0).abs() < 1e-15);
        assert!((g3(0.0, 1e3, 0.0, &e).unwrap() - 2.0).abs() < 1e-15);
        assert!((g3(0.0, 0.0, 2.0 * PI, &e).unwrap() - 4.0).abs() < 1e-12);
        assert!(matches!(
            g3(0.0, 0.0, 0.3, &e),
            Err(Error::OutOfValidity(_))
        ));
    }

    #[test]
    fn bounds_and_flags() {
        let b = classical_bounds();
        assert_eq!((b.g2_low, b.g2_high, b.g3_high), (0.5, 1.5, 2.25));
        assert_eq!(b.classify_g2(1.71), Classicality::SuperClassical);
        assert_eq!(b.classify_g2(0.40), Classicality::SubClassical);
        assert_eq!(b.classify_g2(1.0), Classicality::Classical);
        assert!(b.classify_g3(3.36).is_quantum());
    }

    #[test]
    fn fwhm_envelope_matches_gaussian_pulses() {
        let fwhm = 1.885;
        let env = OverlapEnvelope::from_pulse_fwhm(1.0, fwhm).unwrap();
        // Amplitudes exp(-2 ln2 t^2 / fwhm^2); overlap of two copies offset by d.
        let d = 0.7;
        let amp = |t: f64| (-2.0 * std::f64::consts::LN_2 * t * t / (fwhm * fwhm)).exp();
        let dt = 1e-3;
        let (mut cross, mut norm) = (0.0, 0.0);
        for k in -20000..20000 {
            let t = k as f64 * dt;
            cross += amp(t) * amp(t - d);
            norm += amp(t) * amp(t);
        }
        assert!((env.at(d) - (cross / norm).powi(2)).abs() < 1e-9);
    }

    #[test]
    fn sampled_envelope_interpolates() {
        let env = OverlapEnvelope::from_samples(vec![(1.0, 0.2), (-1.0, 0.2), (0.0, 0.9)]).unwrap();
        assert!((env.at(0.5) - 0.55).abs() < 1e-15);
        assert!((env.peak() - 0.9).abs() < 1e-15);
        assert_eq!(env.at(1.0), 0.2);
        assert_eq!(env.at(3.0), 0.0);
        assert!(OverlapEnvelope::from_samples(vec![(0.0, 1.2), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn fit_recovers_a_known_width() {
        let truth = OverlapEnvelope::gaussian(0.7, 1.3).unwrap();
        let samples: Vec<(f64, f64)> = (-10..=10)
            .map(|k| k as f64 * 0.3)
            .map(|t| (t, g2(t, 0.0, &truth)))
            .collect();
        let fit = fit_envelope(&samples, 0.0).unwrap();
        let OverlapEnvelope::Gaussian { peak, width } = fit.envelope else {
            panic!()
        };
        assert!((width - 1.3).abs() / 1.3 < 1e-2);
        assert!((peak - 0.7).abs() < 1e-3);
        assert!(fit.residual < 1e-6);
    }

    #[test]
    fn fit_of_flat_data_has_no_overlap() {
        let samples: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, 1.0)).collect();
        let fit = fit_envelope(&samples, 0.0).unwrap();
        assert!(fit.envelope.peak().abs() < 1e-12);
    }

    #[test]
    fn fit_guards() {
        assert!(matches!(
            fit_envelope(&[(0.0, 1.5), (1.0, 1.2)], 0.0),
            Err(Error::Precondition(_))
        ));
        let s = [(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)];
        assert!(matches!(
            fit_envelope(&s, PI / 2.0),
            Err(Error::Unobservable(_))
        ));
    }

    proptest! {
        #[test]
        fn g2_stays_within_the_overlap_band(i in 0.0..=1.0f64, w in 0.1..5.0f64, t in -5.0..5.0f64, phi in -10.0..10.0f64) {
            let env = OverlapEnvelope::gaussian(i, w).unwrap();
            let g = g2(t, phi, &env);
            prop_assert!(g >= 1.0 - i - 1e-15 && g <= 1.0 + i + 1e-15);
        }

        #[test]
        fn g3_is_symmetric(i in 0.0..=1.0f64, w in 0.1..5.0f64, a in -5.0..5.0f64, b in -5.0..5.0f64) {
            let env = OverlapEnvelope::gaussian(i, w).unwrap();
            prop_assert_eq!(g3(a, b, 0.0, &env).unwrap(), g3(b, a, 0.0, &env).unwrap());
        }

        #[test]
        fn witness_threshold_is_one_half(i in 0.0..=1.0f64) {
            let env = OverlapEnvelope::uniform(i).unwrap();
            let b = classical_bounds();
            let witnessed = (0..=720).any(|k| b.classify_g2(g2(0.0, k as f64 * PI / 360.0, &env)).is_quantum());
            prop_assert_eq!(witnessed, i > 0.5);
        }

        #[test]
        fn formula_agrees_with_the_oracle(
            a in 0.05..0.25f64, b in 0.05..0.25f64, c in 0.05..0.25f64, d in 0.05..0.25f64,
            phi in 0.0..std::f64::consts::TAU, i in 0.0..=1.0f64,
        ) {
            let m = SplitterMatrix::from_intensities(a, b, c, d, phi).unwrap();
            let net = splitter_network(&m).unwrap();
            let dist = output_distribution(&net, &FockInput::pair(i).unwrap()).unwrap();
            let oracle = g2_from_distribution(&net, &dist).unwrap();
            let env = OverlapEnvelope::uniform(i).unwrap();
            prop_assert!((oracle - g2(0.0, phi, &env)).abs() < 1e-9);
        }
    }
}

//! Temporal-envelope overlap of a retrieved magnon and a transmitted photon.
//!
//! Both inputs are sent through the medium under the same held control; the
//! field leaving at `z = L` is the exiting dark-state polariton. The overlap
//! ratio as a function of the relative delay is the normalized
//! cross-correlation of the two output envelopes. The delay that maximizes
//! it is taken as `delta_tau = 0`: at that point only the shape mismatch of
//! the two polaritons is left.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mbloch::protocol::BeamSplitProtocol;
use crate::mbloch::solver::{Discretization, SimulationConfig, Solver};
use crate::medium::MediumParams;

/// Width of the time bins the output envelopes are accumulated into before
/// correlating (in units of `1/gamma31`).
pub const ENVELOPE_BIN: f64 = 0.01;

/// Inside-medium norm below which a held run is considered emptied.
const DRAIN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeOverlap {
    /// Delay of the photon envelope relative to the magnon envelope, one
    /// entry per bin.
    pub shifts: Vec<f64>,
    pub overlaps: Vec<f64>,
    /// Shift with the largest overlap; defines `delta_tau = 0`.
    pub best_shift: f64,
    pub best: f64,
    /// Overlap at the delay the two runs actually had.
    pub natural: f64,
}

impl EnvelopeOverlap {
    /// Overlap table against `delta_tau = shift - best_shift`.
    pub fn by_delta_tau(&self) -> Vec<(f64, f64)> {
        self.shifts
            .iter()
            .zip(&self.overlaps)
            .map(|(s, i)| (s - self.best_shift, *i))
            .collect()
    }

    /// Linear interpolation of the table at `delta_tau`; zero outside it.
    pub fn at(&self, delta_tau: f64) -> f64 {
        let s = delta_tau + self.best_shift;
        let k = self.shifts.partition_point(|x| *x <= s);
        if k == 0 || k == self.shifts.len() {
            return 0.0;
        }
        let (s0, s1) = (self.shifts[k - 1], self.shifts[k]);
        let w = (s - s0) / (s1 - s0);
        self.overlaps[k - 1] * (1.0 - w) + self.overlaps[k] * w
    }
}

fn bin(samples: &[Complex64], per_bin: usize) -> Vec<Complex64> {
    samples.chunks(per_bin).map(|c| c.iter().sum()).collect()
}

/// Normalized cross-correlation `|sum a*(t) b(t + s)|^2 / (|a|^2 |b|^2)` of
/// two envelopes sampled every `dt` and starting at the same time, for
/// shifts up to `max_shift` either way. Samples are first summed into bins
/// of `per_bin` samples.
pub fn envelope_overlap(
    a: &[Complex64],
    b: &[Complex64],
    dt: f64,
    per_bin: usize,
    max_shift: f64,
) -> Result<EnvelopeOverlap> {
    if per_bin == 0 || !(dt > 0.0) {
        return Err(Error::Precondition(
            "envelope binning needs dt > 0 and a bin size".into(),
        ));
    }
    let a = bin(a, per_bin);
    let b = bin(b, per_bin);
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let bin_dt = dt * per_bin as f64;
    let kmax = (max_shift / bin_dt).round() as i64;
    let mut shifts = Vec::with_capacity(2 * kmax as usize + 1);
    let mut overlaps = Vec::with_capacity(2 * kmax as usize + 1);
    for k in -kmax..=kmax {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, x) in a.iter().enumerate() {
            let jj = j as i64 + k;
            if jj >= 0 && (jj as usize) < b.len() {
                acc += x.conj() * b[jj as usize];
            }
        }
        shifts.push(k as f64 * bin_dt);
        overlaps.push((acc.norm_sqr() / (na * nb)).min(1.0));
    }
    let (kbest, best) =
        overlaps
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (k, v)| if v > acc.1 { (k, v) } else { acc },
            );
    let natural = overlaps[kmax as usize];
    Ok(EnvelopeOverlap {
        best_shift: shifts[kbest],
        best,
        natural,
        shifts,
        overlaps,
    })
}

/// Result of sending a stored magnon and a single photon through the
/// beam-splitting control, each on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeldPassage {
    pub envelope: EnvelopeOverlap,
    /// Fraction of the magnon that leaves as light.
    pub magnon_retrieval: f64,
    /// Fraction of the photon that is transmitted.
    pub photon_transmission: f64,
    pub max_defect: f64,
}

/// Run a magnon-only and a photon-only passage under the control of
/// `protocol` held on indefinitely, until both have left the medium.
/// `magnon` must be unit-norm on the discretization's grid.
pub fn held_passage(
    medium: &MediumParams,
    magnon: &[Complex64],
    protocol: &BeamSplitProtocol,
    disc: Discretization,
) -> Result<HeldPassage> {
    let transit = medium.length() / medium.group_velocity(protocol.omega_bs);
    if !transit.is_finite() {
        return Err(Error::Config(
            "beam-splitting control must be non-zero".into(),
        ));
    }
    let pulse = protocol.pulse()?;
    // Generous cap: the photon's far tail plus several transit times.
    let t_end = pulse.t_last().max(protocol.on()) + 6.0 * transit + 4.0 * protocol.fwhm + 5.0;
    let base = SimulationConfig::new(*medium, protocol.hold_timeline(t_end)?, t_end)
        .with_discretization(disc);
    let mut a = Solver::new(&base.clone().with_magnon(magnon.to_vec()))?;
    let mut b = Solver::new(&base.with_pulse(pulse.clone()))?;

    // Stop once the pulse is in and both media have drained.
    let check_every = 1000;
    let mut steps = 0usize;
    while a.time() < t_end {
        a.step()?;
        b.step()?;
        steps += 1;
        if steps.is_multiple_of(check_every)
            && b.time() > pulse.t_last()
            && a.state().budget().inside() < DRAIN_TOL
            && b.state().budget().inside() < DRAIN_TOL
        {
            break;
        }
    }
    let dt = a.dt();
    let per_bin = ((ENVELOPE_BIN / dt).round() as usize).max(1);
    let ea = a.emitted().1;
    let eb = b.emitted().1;
    let max_shift = 0.5 * a.time();
    let envelope = envelope_overlap(ea, eb, dt, per_bin, max_shift)?;
    let ba = a.state().budget();
    let bb = b.state().budget();
    Ok(HeldPassage {
        envelope,
        magnon_retrieval: ba.emitted / ba.injected.max(f64::MIN_POSITIVE),
        photon_transmission: bb.emitted / bb.injected.max(f64::MIN_POSITIVE),
        max_defect: a.max_defect().max(b.max_defect()),
    })
}

//! Control sequences for storage, beam splitting and readout.
//!
//! Time origin: the control of every stage is on (or ramping on) from
//! `t = 0`, and a standard input photon is centered at
//! [`PULSE_LEAD`]` * fwhm` so that it starts at `t ~ 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mbloch::solver::{evolve, Discretization, SimulationConfig, Trajectory};
use crate::medium::MediumParams;
use crate::pulse::PulseEnvelope;
use crate::timeline::{ControlTimeline, Stage, DEFAULT_RAMP};

/// Pulse center in units of its FWHM, measured from `t = 0`.
pub const PULSE_LEAD: f64 = 2.6;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Gaussian single photon whose leading edge arrives at `t ~ 0`, delayed by `delay`.
pub fn standard_pulse(fwhm: f64, delay: f64) -> Result<PulseEnvelope> {
    PulseEnvelope::gaussian(fwhm, PULSE_LEAD * fwhm + delay)
}

/// Constant storage control `omega_s` switched off `hold_after_center`
/// after the pulse center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageProtocol {
    pub omega_s: f64,
    pub fwhm: f64,
    pub hold_after_center: f64,
    pub ramp: f64,
}

impl StorageProtocol {
    pub fn new(omega_s: f64, fwhm: f64) -> Self {
        Self {
            omega_s,
            fwhm,
            hold_after_center: 0.5 * fwhm,
            ramp: DEFAULT_RAMP,
        }
    }

    pub fn switch_off(&self) -> f64 {
        PULSE_LEAD * self.fwhm + self.hold_after_center
    }

    pub fn pulse(&self) -> Result<PulseEnvelope> {
        standard_pulse(self.fwhm, 0.0)
    }

    pub fn timeline(&self) -> Result<ControlTimeline> {
        ControlTimeline::builder()
            .hold(Stage::Storage, real(self.omega_s), self.switch_off())
            .ramp(Stage::Storage, real(self.omega_s), real(0.0), self.ramp)
            .build()
    }

    pub fn end(&self) -> f64 {
        self.switch_off() + self.ramp
    }

    /// Storage followed by readout with control `omega_r` after a dark `wait`.
    pub fn with_readout(&self, omega_r: f64, wait: f64, duration: f64) -> Result<ControlTimeline> {
        ControlTimeline::builder()
            .hold(Stage::Storage, real(self.omega_s), self.switch_off())
            .ramp(Stage::Storage, real(self.omega_s), real(0.0), self.ramp)
            .gap(wait)
            .ramp(Stage::Readout, real(0.0), real(omega_r), self.ramp)
            .hold(Stage::Readout, real(omega_r), duration)
            .build()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredMagnon {
    pub profile: Vec<Complex64>,
    pub efficiency: f64,
    pub trajectory: Trajectory,
}

impl StoredMagnon {
    /// Profile rescaled to unit norm (a single magnon at the magnon port).
    pub fn normalized(&self) -> Result<Vec<Complex64>> {
        let dz = self.trajectory.final_state.grid.spacing();
        let n = crate::field::grid_norm(&self.profile, dz);
        if n <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n.sqrt();
        Ok(self.profile.iter().map(|x| x * s).collect())
    }
}

/// Store a single photon as a spin wave. Efficiency is the stored magnon
/// norm per input photon.
pub fn store_magnon(
    medium: &MediumParams,
    protocol: &StorageProtocol,
    disc: Discretization,
) -> Result<StoredMagnon> {
    let config = SimulationConfig::new(*medium, protocol.timeline()?, protocol.end() + 0.02)
        .with_pulse(protocol.pulse()?)
        .with_discretization(disc);
    let trajectory = evolve(&config)?;
    Ok(StoredMagnon {
        profile: trajectory.final_state.sigma12.clone(),
        efficiency: trajectory.efficiencies.storage,
        trajectory,
    })
}

/// Beam-splitting stage: control `omega_bs` ramps on at `control_on`, the
/// photon arrives at the standard time plus `delay`, and the control is
/// ramped off at `switch_off`. Until the control comes on the stored magnon
/// is frozen and the medium is opaque to the photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitProtocol {
    pub omega_bs: f64,
    pub fwhm: f64,
    pub delay: f64,
    pub control_on: f64,
    pub switch_off: f64,
    pub ramp: f64,
    /// Dark time after the ramp for the residual probe to leave.
    pub settle: f64,
}

impl BeamSplitProtocol {
    pub fn new(omega_bs: f64, fwhm: f64, switch_off: f64) -> Self {
        Self {
            omega_bs,
            fwhm,
            delay: 0.0,
            control_on: 0.0,
            switch_off,
            ramp: DEFAULT_RAMP,
            settle: 0.5,
        }
    }

    pub fn pulse(&self) -> Result<PulseEnvelope> {
        standard_pulse(self.fwhm, self.delay)
    }

    /// Control held on indefinitely (`until`), used for checkpointed runs.
    pub fn hold_timeline(&self, until: f64) -> Result<ControlTimeline> {
        ControlTimeline::builder()
            .gap(self.control_on)
            .ramp(Stage::BeamSplit, real(0.0), real(self.omega_bs), self.ramp)
            .hold(
                Stage::BeamSplit,
                real(self.omega_bs),
                (until - self.on()).max(0.0),
            )
            .build()
    }

    pub fn timeline(&self) -> Result<ControlTimeline> {
        if self.switch_off < self.on() {
            return Err(Error::Config(
                "beam splitter switched off before it is on".into(),
            ));
        }
        ControlTimeline::builder()
            .gap(self.control_on)
            .ramp(Stage::BeamSplit, real(0.0), real(self.omega_bs), self.ramp)
            .hold(
                Stage::BeamSplit,
                real(self.omega_bs),
                self.switch_off - self.on(),
            )
            .ramp(Stage::BeamSplit, real(self.omega_bs), real(0.0), self.ramp)
            .build()
    }

    /// Time at which the control reaches `omega_bs`.
    pub fn on(&self) -> f64 {
        self.control_on + self.ramp
    }

    pub fn end(&self) -> f64 {
        self.switch_off + self.ramp + self.settle
    }
}

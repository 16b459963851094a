//! Conversion between laboratory units and the solver's normalized units,
//! and the resolved (normalized) form of a configuration.

use std::f64::consts::TAU;

use anyhow::{Context, Result};
use nhbs_core::mbloch::Discretization;
use nhbs_core::MediumParams;

use crate::config::{Config, EnvelopeConfig, EnvelopeKind, RunConfig, SweepMode, SweepParameter};

/// Frequencies are `f / 2 pi` in MHz, times are ns. The normalized rate is
/// `f / gamma31`, the normalized time `t * gamma31`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub gamma31_mhz: f64,
}

impl Units {
    pub fn rate(&self, mhz: f64) -> f64 {
        mhz / self.gamma31_mhz
    }

    pub fn time(&self, ns: f64) -> f64 {
        ns * 1e-3 * TAU * self.gamma31_mhz
    }

    pub fn mhz(&self, rate: f64) -> f64 {
        rate * self.gamma31_mhz
    }

    pub fn ns(&self, time: f64) -> f64 {
        time / (1e-3 * TAU * self.gamma31_mhz)
    }
}

/// Medium-independent physical settings, normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub units: Units,
    pub gamma12: f64,
    pub fwhm: f64,
    pub storage_hold: f64,
    pub light_speed: f64,
    pub disc: Discretization,
}

impl Physics {
    pub fn medium(&self, od: f64, delta: f64) -> nhbs_core::Result<MediumParams> {
        MediumParams::builder()
            .od(od)
            .delta(delta)
            .gamma12(self.gamma12)
            .light_speed(self.light_speed)
            .build()
    }

    pub fn with_disc(&self, disc: Discretization) -> Self {
        Self { disc, ..*self }
    }
}

/// Held-control interference operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub od: f64,
    pub delta: f64,
    pub omega_s: f64,
    pub omega_bs: f64,
}

/// Full splitter characterization point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunPoint {
    pub point: Point,
    pub lead: f64,
    pub span: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Gaussian { peak: f64 },
    Uniform { peak: f64 },
    Solver(Point),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Series {
    pub od: f64,
    pub omega_bs: f64,
    pub omega_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3 {
    pub triples: Vec<(f64, f64, f64)>,
    pub calibration: (f64, f64),
    pub envelope: Envelope,
    pub delay_max: f64,
    pub delay_steps: usize,
    pub phi_steps: usize,
    pub sweep_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig4 {
    pub envelope: Envelope,
    pub delay_max: f64,
    pub delay_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub mode: SweepMode,
    pub base: Point,
}

/// Configuration in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub physics: Physics,
    pub fig2: Vec<Fig2Series>,
    pub fig3: Fig3,
    pub fig4: Fig4,
    pub sweep: Sweep,
    pub run: RunPoint,
    pub accept_resonant: RunPoint,
    pub accept_detuned: RunPoint,
}

impl Resolved {
    pub fn units(&self) -> Units {
        self.physics.units
    }
}

impl Config {
    pub fn resolve(&self) -> Result<Resolved> {
        let u = Units {
            gamma31_mhz: self.physics.gamma31_mhz,
        };
        let physics = Physics {
            units: u,
            gamma12: u.rate(self.physics.gamma12_mhz),
            fwhm: u.time(self.physics.pulse_fwhm_ns),
            storage_hold: u.time(self.physics.storage_hold_ns),
            light_speed: self.physics.light_speed,
            disc: Discretization::new(self.grid.n_z, self.grid.shift_cells),
        };
        physics
            .medium(1.0, 0.0)
            .context("invalid physics section")?;

        let fig2 = self
            .fig2
            .ods
            .iter()
            .zip(&self.fig2.omega_bs_mhz)
            .zip(&self.fig2.omega_s_mhz)
            .map(|((&od, &bs), s)| Fig2Series {
                od,
                omega_bs: u.rate(bs),
                omega_s: s.iter().map(|&x| u.rate(x)).collect(),
            })
            .collect();

        let envelope = |e: &EnvelopeConfig| match e.kind {
            EnvelopeKind::Gaussian => Envelope::Gaussian { peak: e.peak },
            EnvelopeKind::Uniform => Envelope::Uniform { peak: e.peak },
            EnvelopeKind::Solver => Envelope::Solver(Point {
                od: e.od,
                delta: 0.0,
                omega_s: u.rate(e.omega_s_mhz),
                omega_bs: u.rate(e.omega_bs_mhz),
            }),
        };
        let f3 = &self.fig3;
        let fig3 = Fig3 {
            triples: f3
                .ods
                .iter()
                .zip(&f3.delta_mhz)
                .zip(&f3.target_phi_rt)
                .map(|((&od, &d), &target)| (od, u.rate(d), target))
                .collect(),
            calibration: (u.rate(f3.calibration_lo_mhz), u.rate(f3.calibration_hi_mhz)),
            envelope: envelope(&f3.envelope),
            delay_max: u.time(f3.delay_max_ns),
            delay_steps: f3.delay_steps,
            phi_steps: f3.phi_steps,
            sweep_steps: f3.sweep_steps,
        };
        let fig4 = Fig4 {
            envelope: envelope(&self.fig4.envelope),
            delay_max: u.time(self.fig4.delay_max_ns),
            delay_steps: self.fig4.delay_steps,
        };

        let s = &self.sweep;
        // The swept value is converted per sample, so keep the range in the
        // parameter's own normalized unit.
        let axis = |x: f64| match s.parameter {
            SweepParameter::Od => x,
            _ => u.rate(x),
        };
        let b = &s.base;
        let sweep = Sweep {
            parameter: s.parameter,
            start: axis(s.start),
            stop: axis(s.stop),
            steps: s.steps,
            mode: s.mode,
            base: Point {
                od: b.od,
                delta: u.rate(b.delta_mhz),
                omega_s: u.rate(b.omega_s_mhz),
                omega_bs: u.rate(b.omega_bs_mhz),
            },
        };

        let run = |r: &RunConfig| RunPoint {
            point: Point {
                od: r.od,
                delta: u.rate(r.delta_mhz),
                omega_s: u.rate(r.omega_s_mhz),
                omega_bs: u.rate(r.omega_bs_mhz),
            },
            lead: u.time(r.lead_ns),
            span: u.time(r.span_ns),
        };
        Ok(Resolved {
            physics,
            fig2,
            fig3,
            fig4,
            sweep,
            run: run(&self.run),
            accept_resonant: run(&self.accept.resonant),
            accept_detuned: run(&self.accept.detuned),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hundred_ns_pulse_in_normalized_time() {
        let u = Units { gamma31_mhz: 3.0 };
        assert!((u.time(100.0) - 1.884_955_592).abs() < 1e-8);
        assert!((u.ns(u.time(37.0)) - 37.0).abs() < 1e-12);
        // Detunings are entered as delta / 2 pi.
        assert!((u.rate(30.0) - 10.0).abs() < 1e-15);
        assert!((u.mhz(u.rate(60.0)) - 60.0).abs() < 1e-12);
    }

    #[test]
    fn default_configuration_resolves() {
        let r = Config::default().resolve().unwrap();
        assert_eq!(r.fig3.triples[1].1, 10.0);
        assert!((r.run.lead - 1.0).abs() < 1e-12);
        assert_eq!(r.fig2[1].omega_bs, 8.0);
    }
}

//! Solver pipelines shared by the scenarios and the acceptance suite.

use anyhow::{Context, Result};
use nhbs_core::fock::{
    g2_from_distribution, g2_product_normalized, output_distribution, splitter_network, FockInput,
};
use nhbs_core::mbloch::{
    held_passage, store_magnon, BeamSplitProtocol, HeldPassage, StorageProtocol, PULSE_LEAD,
};
use nhbs_core::splitter::{extract_matrix, phi_rt_of_matrix, Extraction, InterferenceSetup};
use nhbs_core::stats::{self, OverlapEnvelope};

use crate::units::{Envelope, Physics, Point, RunPoint};

/// Stored magnon and its held-control passage compared with a photon's.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub storage_efficiency: f64,
    /// Grid positions and normalized magnon density `|S(z)|^2`.
    pub z: Vec<f64>,
    pub density: Vec<f64>,
    /// `None` when there is no medium to store in.
    pub held: Option<HeldPassage>,
    pub max_defect: f64,
}

impl PointResult {
    /// Overlap at the best relative delay (zero without a medium).
    pub fn overlap(&self) -> f64 {
        self.held.as_ref().map_or(0.0, |h| h.envelope.best)
    }

    pub fn natural_overlap(&self) -> f64 {
        self.held.as_ref().map_or(0.0, |h| h.envelope.natural)
    }
}

fn storage(phys: &Physics, omega_s: f64) -> StorageProtocol {
    StorageProtocol {
        hold_after_center: phys.storage_hold,
        ..StorageProtocol::new(omega_s, phys.fwhm)
    }
}

/// Held beam-splitting control that is on from `t = 0`.
fn held_control(phys: &Physics, omega_bs: f64) -> BeamSplitProtocol {
    let p = BeamSplitProtocol::new(omega_bs, phys.fwhm, 0.0);
    BeamSplitProtocol {
        switch_off: p.on(),
        ..p
    }
}

/// Store a photon at `point.omega_s` (resonantly), then send the magnon and
/// a fresh photon separately through the held beam-splitting control.
pub fn evaluate_point(phys: &Physics, point: &Point) -> Result<PointResult> {
    let ctx = || {
        format!(
            "operating point od={} delta={} omega_s={} omega_bs={}",
            point.od, point.delta, point.omega_s, point.omega_bs
        )
    };
    let resonant = phys.medium(point.od, 0.0).with_context(ctx)?;
    let stored =
        store_magnon(&resonant, &storage(phys, point.omega_s), phys.disc).with_context(ctx)?;
    let grid = &stored.trajectory.final_state.grid;
    let z: Vec<f64> = grid.points().collect();
    let mut max_defect = stored.trajectory.max_defect;
    if point.od <= 0.0 {
        return Ok(PointResult {
            storage_efficiency: stored.efficiency,
            density: vec![0.0; z.len()],
            z,
            held: None,
            max_defect,
        });
    }
    let magnon = stored.normalized().with_context(ctx)?;
    let density = magnon.iter().map(|s| s.norm_sqr()).collect();
    let medium = resonant.with_delta(point.delta);
    let held = held_passage(
        &medium,
        &magnon,
        &held_control(phys, point.omega_bs),
        phys.disc,
    )
    .with_context(ctx)?;
    max_defect = max_defect.max(held.max_defect);
    Ok(PointResult {
        storage_efficiency: stored.efficiency,
        z,
        density,
        held: Some(held),
        max_defect,
    })
}

/// Everything known about one splitter configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Characterization {
    pub storage_efficiency: f64,
    pub extraction: Extraction,
    pub phi_rt: f64,
    /// Overlap of the two output envelopes at their actual relative timing.
    pub overlap: f64,
    pub g2_oracle: f64,
    pub g2_oracle_product: f64,
    pub g2_formula: f64,
    pub max_defect: f64,
}

/// Store at resonance, then measure the splitter with the beam-splitting
/// control switched on `lead` before the photon's centre and switched off
/// at the closest-to-balanced moment within `span`.
pub fn characterize(phys: &Physics, run: &RunPoint) -> Result<Characterization> {
    let p = run.point;
    let ctx = || {
        format!(
            "splitter run od={} delta={} omega_s={} omega_bs={}",
            p.od, p.delta, p.omega_s, p.omega_bs
        )
    };
    let resonant = phys.medium(p.od, 0.0).with_context(ctx)?;
    let stored = store_magnon(&resonant, &storage(phys, p.omega_s), phys.disc).with_context(ctx)?;
    let magnon = stored.normalized().with_context(ctx)?;
    let medium = resonant.with_delta(p.delta);

    let on = PULSE_LEAD * phys.fwhm - run.lead;
    let protocol = BeamSplitProtocol {
        control_on: on,
        ..BeamSplitProtocol::new(p.omega_bs, phys.fwhm, on + run.span)
    };
    let held = held_passage(&medium, &magnon, &protocol, phys.disc).with_context(ctx)?;
    let setup = InterferenceSetup {
        medium,
        magnon,
        protocol,
        discretization: phys.disc,
    };
    let extraction = extract_matrix(&setup, on + run.span).with_context(ctx)?;
    let phi_rt = phi_rt_of_matrix(&extraction.matrix).with_context(ctx)?;
    let overlap = held.envelope.natural;

    let net = splitter_network(&extraction.matrix)?;
    let dist = output_distribution(&net, &FockInput::pair(overlap)?)?;
    Ok(Characterization {
        storage_efficiency: stored.efficiency,
        phi_rt,
        overlap,
        g2_oracle: g2_from_distribution(&net, &dist)?,
        g2_oracle_product: g2_product_normalized(&net, &dist)?,
        g2_formula: stats::g2(0.0, phi_rt, &OverlapEnvelope::uniform(overlap)?),
        max_defect: stored
            .trajectory
            .max_defect
            .max(held.max_defect)
            .max(extraction.max_defect),
        extraction,
    })
}

/// Overlap envelope for the theory curves, with the solver point it came
/// from when it was computed.
pub fn build_envelope(
    phys: &Physics,
    env: &Envelope,
) -> Result<(OverlapEnvelope, Option<PointResult>)> {
    Ok(match *env {
        Envelope::Gaussian { peak } => (OverlapEnvelope::from_pulse_fwhm(peak, phys.fwhm)?, None),
        Envelope::Uniform { peak } => (OverlapEnvelope::uniform(peak)?, None),
        Envelope::Solver(point) => {
            let r = evaluate_point(phys, &point)?;
            let held = r
                .held
                .as_ref()
                .context("solver envelope needs a non-zero optical depth")?;
            (OverlapEnvelope::from_solver(&held.envelope)?, Some(r))
        }
    })
}

//! End-to-end checks across modules: store a photon, characterize the
//! resulting splitter, and feed it to the Fock oracle and the closed forms.

use approx::assert_relative_eq;
use nhbs_core::fock::{g2_from_distribution, output_distribution, splitter_network, FockInput};
use nhbs_core::mbloch::{
    store_magnon, BeamSplitProtocol, Discretization, StorageProtocol, PULSE_LEAD,
};
use nhbs_core::splitter::{
    extract_matrix, hermiticity_report, phi_rt_analytic, phi_rt_of_matrix, InterferenceSetup,
    PhiRtParams, PASSIVITY_TOL,
};
use nhbs_core::stats::{self, OverlapEnvelope};
use nhbs_core::{MediumParams, PulseEnvelope};

const FWHM: f64 = 1.885;

fn coarse() -> Discretization {
    Discretization::new(41, 1)
}

#[test]
fn stored_photon_gives_a_passive_splitter_consistent_with_the_oracle() {
    let medium = MediumParams::from_od(30.0, 0.0).unwrap();
    let storage = StorageProtocol::new(1.0, FWHM);
    let stored = store_magnon(&medium, &storage, coarse()).unwrap();
    assert!(
        stored.efficiency > 0.05 && stored.efficiency < 1.0,
        "efficiency {}",
        stored.efficiency
    );
    assert!(stored.trajectory.max_defect < 1e-4);

    let on = PULSE_LEAD * FWHM - 1.0;
    let protocol = BeamSplitProtocol {
        control_on: on,
        ..BeamSplitProtocol::new(2.0, FWHM, on + 25.0)
    };
    let setup = InterferenceSetup {
        medium,
        magnon: stored.normalized().unwrap(),
        protocol,
        discretization: coarse(),
    };
    let ex = extract_matrix(&setup, on + 25.0).unwrap();
    let m = ex.matrix;
    assert!(m.singular_values()[0] <= 1.0 + PASSIVITY_TOL);
    // Lossy, hence not unitary.
    assert!(!hermiticity_report(&m).unitary);

    // Whatever the splitter, the oracle must reproduce 1 + I cos(phi_rt).
    let phi = phi_rt_of_matrix(&m).unwrap();
    let net = splitter_network(&m).unwrap();
    assert!(net.unitarity_defect() < 1e-10);
    for i in [0.0, 0.4, 0.9] {
        let dist = output_distribution(&net, &FockInput::pair(i).unwrap()).unwrap();
        assert_relative_eq!(dist.values().sum::<f64>(), 1.0, epsilon = 1e-10);
        let g2 = g2_from_distribution(&net, &dist).unwrap();
        let formula = stats::g2(0.0, phi, &OverlapEnvelope::uniform(i).unwrap());
        assert_relative_eq!(g2, formula, epsilon = 1e-9);
    }
}

#[test]
fn resonant_closed_form_phase_is_zero_or_pi() {
    let tau_p = PulseEnvelope::gaussian(FWHM, 0.0).unwrap().tau_p();
    for omega_c in [5.0, 20.0, 34.0, 60.0] {
        for eta in [10.0, 30.0, 150.0] {
            let p = PhiRtParams {
                omega_c,
                tau_p,
                gamma31: 1.0,
                delta: 0.0,
                eta,
            };
            let Ok(phi) = phi_rt_analytic(&p) else {
                continue;
            };
            let d = phi
                .min((phi - std::f64::consts::PI).abs())
                .min((phi - std::f64::consts::TAU).abs());
            assert!(d < 1e-9, "omega_c={omega_c} eta={eta}: phi={phi}");
        }
    }
}

#[test]
fn detuning_moves_the_closed_form_phase_off_the_real_axis() {
    let tau_p = PulseEnvelope::gaussian(FWHM, 0.0).unwrap().tau_p();
    let p = PhiRtParams {
        omega_c: 34.18,
        tau_p,
        gamma31: 1.0,
        delta: 10.0,
        eta: 66.0,
    };
    let phi = phi_rt_analytic(&p).unwrap();
    assert!(phi > 0.3 && phi < std::f64::consts::PI - 0.3, "phi = {phi}");
}

//! Fixtures shared by the kernel benchmarks in `benches/`.

use nhbs_core::mbloch::{
    store_magnon, BeamSplitProtocol, Discretization, SimulationConfig, StorageProtocol,
};
use nhbs_core::splitter::SplitterMatrix;
use nhbs_core::{Complex64, MediumParams, Result};

/// 100 ns pulse at gamma31 / 2 pi = 3 MHz.
pub const FWHM: f64 = 1.885;

pub fn medium() -> MediumParams {
    MediumParams::from_od(30.0, 0.0).expect("valid medium")
}

/// Unit-norm magnon stored at OD 30 on `n_z` grid points.
pub fn stored_magnon(n_z: usize) -> Result<Vec<Complex64>> {
    let stored = store_magnon(
        &medium(),
        &StorageProtocol::new(3.0, FWHM),
        Discretization::new(n_z, 1),
    )?;
    stored.normalized()
}

/// Photon-only passage through a held beam-splitting control.
pub fn held_photon_config(n_z: usize) -> Result<SimulationConfig> {
    let p = BeamSplitProtocol::new(4.0, FWHM, 0.0);
    let p = BeamSplitProtocol {
        switch_off: p.on(),
        ..p
    };
    Ok(
        SimulationConfig::new(medium(), p.hold_timeline(12.0)?, 12.0)
            .with_pulse(p.pulse()?)
            .with_discretization(Discretization::new(n_z, 1)),
    )
}

/// A lossy, non-Hermitian splitter typical of the memory.
pub fn lossy_splitter() -> Result<SplitterMatrix> {
    SplitterMatrix::from_intensities(0.072, 0.119, 0.057, 0.089, 0.0)
}

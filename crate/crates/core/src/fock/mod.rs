//! Brute-force few-photon statistics through lossy linear networks.
//!
//! A subunitary transfer matrix over `M` signal modes is completed to a
//! unitary on `2M` modes (the extra modes collect the loss). Input particles
//! occupy distinct signal modes; their wavepackets may be partially
//! distinguishable, which is modelled by giving each particle an internal
//! state whose Gram matrix holds the pairwise amplitude overlaps.

mod distribution;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splitter::{SplitterMatrix, PASSIVITY_TOL};

pub use distribution::{
    g2_from_distribution, g2_product_normalized, g3_from_distribution, output_distribution,
    routing_probabilities, Distribution,
};

/// Largest number of signal modes a network may have.
pub const MAX_MODES: usize = 4;
/// Largest number of input particles.
pub const MAX_PARTICLES: usize = 3;
/// Accepted deviation of the dilation from unitarity.
pub const UNITARITY_TOL: f64 = 1e-10;

type CMat = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeNetwork {
    transfer: CMat,
    dilation: CMat,
    port_labels: Vec<String>,
}

impl ModeNetwork {
    pub fn transfer(&self) -> &CMat {
        &self.transfer
    }

    pub fn dilation(&self) -> &CMat {
        &self.dilation
    }

    pub fn port_labels(&self) -> &[String] {
        &self.port_labels
    }

    pub fn signal_modes(&self) -> usize {
        self.transfer.nrows()
    }

    /// Replace the signal-port labels (loss ports keep theirs).
    pub fn with_labels(mut self, labels: &[&str]) -> Result<Self> {
        let m = self.signal_modes();
        if labels.len() != m {
            return Err(Error::Precondition(format!(
                "expected {m} port labels, got {}",
                labels.len()
            )));
        }
        for (slot, l) in self.port_labels.iter_mut().zip(labels) {
            *slot = (*l).to_string();
        }
        Ok(self)
    }

    /// Frobenius norm of `W^dagger W - 1`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dilation.nrows();
        (self.dilation.adjoint() * &self.dilation - CMat::identity(n, n)).norm()
    }
}

/// `(1 - A A^dagger)^(1/2)` for a contraction `A`, from its SVD.
fn defect_operator(u: &CMat, sigma: &[f64]) -> CMat {
    let root: Vec<Complex64> = sigma
        .iter()
        .map(|s| Complex64::new((1.0 - s * s).max(0.0).sqrt(), 0.0))
        .collect();
    let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(root));
    u * d * u.adjoint()
}

/// Unitary completion
///
/// ```text
/// W = |  T                  (1 - T T^dagger)^(1/2) |
///     | -(1 - T^dagger T)^(1/2)        T^dagger     |
/// ```
///
/// which is the identity when `T` is.
pub fn dilate(transfer: &CMat) -> Result<ModeNetwork> {
    let m = transfer.nrows();
    if m == 0 || transfer.ncols() != m {
        return Err(Error::Precondition(
            "transfer matrix must be square and non-empty".into(),
        ));
    }
    if m > MAX_MODES {
        return Err(Error::UnsupportedScale(m));
    }
    let svd = transfer.clone().svd(true, true);
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let top = sigma.iter().copied().fold(0.0, f64::max);
    if top > 1.0 + PASSIVITY_TOL {
        return Err(Error::NonPhysicalGain(top));
    }
    let u = svd
        .u
        .ok_or_else(|| Error::Singular("SVD did not converge".into()))?;
    let v = svd
        .v_t
        .ok_or_else(|| Error::Singular("SVD did not converge".into()))?
        .adjoint();
    let d_star = defect_operator(&u, &sigma);
    let d = defect_operator(&v, &sigma);

    let mut w = CMat::zeros(2 * m, 2 * m);
    w.view_mut((0, 0), (m, m)).copy_from(transfer);
    w.view_mut((0, m), (m, m)).copy_from(&d_star);
    w.view_mut((m, 0), (m, m)).copy_from(&(-d));
    w.view_mut((m, m), (m, m)).copy_from(&transfer.adjoint());

    let mut port_labels: Vec<String> = (0..m).map(|k| format!("signal_{k}")).collect();
    port_labels.extend((0..m).map(|k| format!("loss_{k}")));
    let net = ModeNetwork {
        transfer: transfer.clone(),
        dilation: w,
        port_labels,
    };
    let defect = net.unitarity_defect();
    if defect > UNITARITY_TOL {
        return Err(Error::Singular(format!(
            "dilation is not unitary (defect {defect:.2e})"
        )));
    }
    Ok(net)
}

/// Two-port network of a splitter, ports `(magnon, photon)`.
pub fn splitter_network(m: &SplitterMatrix) -> Result<ModeNetwork> {
    let t = m.as_matrix();
    let transfer = CMat::from_fn(2, 2, |r, c| t[(r, c)]);
    dilate(&transfer)?.with_labels(&["magnon", "photon"])
}

/// Three-photon cascade. Photon 1 has been stored as a magnon; photon 2 meets
/// it in `first`, and photon 3 meets the surviving magnon in `second`. The
/// magnon left at the end is read out with amplitude `readout`.
///
/// Inputs are `(magnon, photon_2, photon_3)` and outputs
/// `(output_1, output_2, readout)`.
pub fn cascade_three(
    first: &SplitterMatrix,
    second: &SplitterMatrix,
    readout: f64,
) -> Result<ModeNetwork> {
    if !(0.0..=1.0).contains(&readout) {
        return Err(Error::Config(format!(
            "readout amplitude must lie in [0, 1], got {readout}"
        )));
    }
    let z = Complex64::new(0.0, 0.0);
    let (a, b) = (first, second);
    let transfer = CMat::from_row_slice(
        3,
        3,
        &[
            a.r1,
            a.t2,
            z,
            b.r1 * a.t1,
            b.r1 * a.r2,
            b.t2,
            b.t1 * a.t1 * readout,
            b.t1 * a.r2 * readout,
            b.r2 * readout,
        ],
    );
    dilate(&transfer)?.with_labels(&["output_1", "output_2", "readout"])
}

/// Input particles: one per occupied signal mode, with pairwise overlap
/// ratios `I_jk` between their wavepackets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockInput {
    occupations: Vec<u8>,
    distinguishability: Vec<Vec<f64>>,
}

impl FockInput {
    /// `overlaps` is indexed by particle, in order of the occupied modes.
    pub fn new(occupations: Vec<u8>, overlaps: Vec<Vec<f64>>) -> Result<Self> {
        if occupations.iter().any(|&n| n > 1) {
            return Err(Error::Precondition(
                "at most one particle per input mode".into(),
            ));
        }
        let n: usize = occupations.iter().map(|&k| k as usize).sum();
        if n > MAX_PARTICLES {
            return Err(Error::UnsupportedScale(n));
        }
        if overlaps.len() != n || overlaps.iter().any(|row| row.len() != n) {
            return Err(Error::Precondition(format!(
                "overlap matrix must be {n}x{n}"
            )));
        }
        for (j, row) in overlaps.iter().enumerate() {
            if (row[j] - 1.0).abs() > 1e-12 {
                return Err(Error::Precondition(
                    "overlap matrix needs a unit diagonal".into(),
                ));
            }
            for (k, &v) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::ProbabilityRange {
                        what: "overlap ratio".into(),
                        value: v,
                    });
                }
                if (v - overlaps[k][j]).abs() > 1e-12 {
                    return Err(Error::Precondition(
                        "overlap matrix must be symmetric".into(),
                    ));
                }
            }
        }
        let input = Self {
            occupations,
            distinguishability: overlaps,
        };
        let min_eig = input
            .amplitude_gram()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(Error::Precondition(format!(
                "overlaps are not realizable by wavepackets (Gram eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(input)
    }

    /// Particles in every mode, all mutually indistinguishable.
    pub fn indistinguishable(occupations: Vec<u8>) -> Result<Self> {
        let n = occupations.iter().map(|&k| k as usize).sum();
        Self::new(occupations, vec![vec![1.0; n]; n])
    }

    /// Two particles in modes 0 and 1 with overlap ratio `i`.
    pub fn pair(i: f64) -> Result<Self> {
        Self::new(vec![1, 1], vec![vec![1.0, i], vec![i, 1.0]])
    }

    /// Three particles in modes 0..3 with pairwise overlaps.
    pub fn triple(i12: f64, i23: f64, i13: f64) -> Result<Self> {
        Self::new(
            vec![1, 1, 1],
            vec![
                vec![1.0, i12, i13],
                vec![i12, 1.0, i23],
                vec![i13, i23, 1.0],
            ],
        )
    }

    pub fn occupations(&self) -> &[u8] {
        &self.occupations
    }

    pub fn distinguishability(&self) -> &[Vec<f64>] {
        &self.distinguishability
    }

    pub fn particles(&self) -> usize {
        self.occupations.iter().map(|&k| k as usize).sum()
    }

    /// Input mode of each particle.
    pub fn particle_modes(&self) -> Vec<usize> {
        self.occupations
            .iter()
            .enumerate()
            .filter(|(_, &n)| n == 1)
            .map(|(k, _)| k)
            .collect()
    }

    /// Amplitude overlaps `<phi_j|phi_k> = sqrt(I_jk)`; the overlap ratio is
    /// the squared modulus of the wavepacket inner product.
    pub fn amplitude_gram(&self) -> nalgebra::DMatrix<f64> {
        let n = self.particles();
        nalgebra::DMatrix::from_fn(n, n, |j, k| self.distinguishability[j][k].sqrt())
    }

    /// Internal states `v_j` with `<v_j|v_k>` equal to the amplitude Gram
    /// matrix, from its eigendecomposition. Rows are particles.
    pub(crate) fn internal_states(&self) -> Vec<Vec<f64>> {
        let g = self.amplitude_gram();
        let n = g.nrows();
        let eig = g.symmetric_eigen();
        let kept: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 1e-12).collect();
        (0..n)
            .map(|j| {
                kept.iter()
                    .map(|&k| eig.eigenvectors[(j, k)] * eig.eigenvalues[k].sqrt())
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn identity_dilates_to_identity() {
        let net = dilate(&CMat::identity(2, 2)).unwrap();
        assert!((net.dilation() - CMat::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn half_identity_has_completing_blocks() {
        let net = dilate(&(CMat::identity(2, 2) * c(0.5))).unwrap();
        let off = net.dilation().view((0, 2), (2, 2)).clone_owned();
        for s in off.singular_values().iter() {
            assert!((s - 0.75f64.sqrt()).abs() < 1e-12);
        }
        assert!(net.unitarity_defect() < 1e-12);
    }

    #[test]
    fn measured_magnitudes_dilate() {
        let m = SplitterMatrix::from_intensities(0.15, 0.20, 0.26, 0.22, 0.0).unwrap();
        let net = splitter_network(&m).unwrap();
        assert!(net.unitarity_defect() < UNITARITY_TOL);
        assert_eq!(
            net.port_labels()[..2],
            ["magnon".to_string(), "photon".to_string()]
        );
        assert_eq!(
            net.dilation().view((0, 0), (2, 2)).clone_owned(),
            *net.transfer()
        );
    }

    #[test]
    fn gain_is_rejected() {
        assert!(matches!(
            dilate(&(CMat::identity(2, 2) * c(1.1))),
            Err(Error::NonPhysicalGain(_))
        ));
        assert!(matches!(
            dilate(&CMat::identity(5, 5)),
            Err(Error::UnsupportedScale(5))
        ));
    }

    #[test]
    fn identity_cascade_is_a_permutation() {
        let id = SplitterMatrix::identity();
        let net = cascade_three(&id, &id, 1.0).unwrap();
        let t = net.transfer();
        // photon 2 -> output 1, photon 3 -> output 2, magnon -> readout.
        assert_eq!(t[(0, 1)], c(1.0));
        assert_eq!(t[(1, 2)], c(1.0));
        assert_eq!(t[(2, 0)], c(1.0));
        assert!((t.norm_squared() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn input_validation() {
        assert!(FockInput::pair(0.3).is_ok());
        assert!(FockInput::pair(1.2).is_err());
        assert!(FockInput::new(vec![1, 1], vec![vec![1.0, 0.2], vec![0.3, 1.0]]).is_err());
        assert!(FockInput::new(vec![2], vec![vec![1.0]]).is_err());
        assert!(matches!(
            FockInput::indistinguishable(vec![1, 1, 1, 1]),
            Err(Error::UnsupportedScale(4))
        ));
        // 1 == 2 and 2 == 3 but 1 orthogonal to 3 is impossible.
        assert!(FockInput::triple(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn internal_states_reproduce_the_gram_matrix() {
        let input = FockInput::triple(0.5, 0.3, 0.2).unwrap();
        let v = input.internal_states();
        let g = input.amplitude_gram();
        for j in 0..3 {
            for k in 0..3 {
                let dot: f64 = v[j].iter().zip(&v[k]).map(|(a, b)| a * b).sum();
                assert!((dot - g[(j, k)]).abs() < 1e-12);
            }
        }
    }
}

//! Dark-state-polariton projection and wavefunction overlap.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::medium::MediumParams;

/// Mixing coefficients `(cos theta, sin theta)` of the dark state for control
/// `omega`. The control enters the equations of motion as `Omega/2`, so the
/// dark state is `(Omega/2) E - g S` up to normalization.
pub fn mixing(omega: Complex64, medium: &MediumParams) -> (Complex64, f64) {
    let half = 0.5 * omega;
    let g = medium.coupling();
    let n = (half.norm_sqr() + g * g).sqrt();
    if n == 0.0 {
        // No atoms and no control: the photon is its own polariton.
        return (Complex64::new(1.0, 0.0), 0.0);
    }
    (half.conj() / n, g / n)
}

/// `Psi(z) = cos(theta) E(z) - sin(theta) S(z)` with `S = sqrt(N) sigma12`.
pub fn dsp_project(state: &FieldState, omega: Complex64, medium: &MediumParams) -> Vec<Complex64> {
    let (cos_t, sin_t) = mixing(omega, medium);
    state
        .e_field
        .iter()
        .zip(&state.sigma12)
        .map(|(e, s)| cos_t * e - sin_t * s)
        .collect()
}

/// Normalized overlap `|<a|b>|^2 / (<a|a> <b|b>)`.
pub fn overlap(psi_a: &[Complex64], psi_b: &[Complex64]) -> Result<f64> {
    if psi_a.len() != psi_b.len() {
        return Err(Error::GridMismatch(psi_a.len(), psi_b.len()));
    }
    let na: f64 = psi_a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = psi_b.iter().map(|x| x.norm_sqr()).sum();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let ip: Complex64 = psi_a.iter().zip(psi_b).map(|(a, b)| a.conj() * b).sum();
    // Cauchy-Schwarz can be exceeded by rounding only.
    Ok((ip.norm_sqr() / (na * nb)).min(1.0))
}

/// Inner product `<a|b>` with cell weight `w`.
pub fn inner(a: &[Complex64], b: &[Complex64], w: f64) -> Complex64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        * w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn state_with(e: Vec<Complex64>, s: Vec<Complex64>) -> FieldState {
        let mut st = FieldState::vacuum(make_grid(1.0, e.len()).unwrap());
        st.e_field = e;
        st.sigma12 = s;
        st
    }

    #[test]
    fn control_off_is_pure_magnon() {
        let m = MediumParams::from_od(30.0, 0.0).unwrap();
        let e: Vec<_> = (0..20).map(|j| c(j as f64)).collect();
        let s: Vec<_> = (0..20).map(|j| c(1.0 + j as f64 * 0.5)).collect();
        let psi = dsp_project(&state_with(e, s.clone()), c(0.0), &m);
        for (p, s) in psi.iter().zip(&s) {
            assert!((p + s).norm() < 1e-12);
        }
    }

    #[test]
    fn strong_control_is_pure_photon() {
        let m = MediumParams::from_od(30.0, 0.0).unwrap();
        let e: Vec<_> = (0..20).map(|j| c((j as f64 * 0.3).sin())).collect();
        let s = vec![c(0.3); 20];
        let psi = dsp_project(&state_with(e.clone(), s), c(1e9), &m);
        for (p, e) in psi.iter().zip(&e) {
            assert!((p - e).norm() < 1e-6);
        }
    }

    #[test]
    fn overlap_limits() {
        let a: Vec<_> = (0..32)
            .map(|j| Complex64::new((j as f64).cos(), (j as f64 * 0.2).sin()))
            .collect();
        assert!((overlap(&a, &a).unwrap() - 1.0).abs() < 1e-14);
        let scaled: Vec<_> = a.iter().map(|x| x * Complex64::new(0.0, 3.0)).collect();
        assert!((overlap(&a, &scaled).unwrap() - 1.0).abs() < 1e-14);

        let left: Vec<_> = (0..32)
            .map(|j| if j < 16 { c(1.0) } else { c(0.0) })
            .collect();
        let right: Vec<_> = (0..32)
            .map(|j| if j >= 16 { c(1.0) } else { c(0.0) })
            .collect();
        assert_eq!(overlap(&left, &right).unwrap(), 0.0);

        assert_eq!(overlap(&left, &vec![c(0.0); 32]), Err(Error::ZeroNorm));
        assert!(overlap(&left, &left[..10]).is_err());
    }
}

//! Beam-splitter characterization from pairs of single-port simulator runs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SplitterMatrix;
use crate::error::{Error, Result};
use crate::field::grid_norm;
use crate::mbloch::{
    dsp_project, inner, overlap, BeamSplitProtocol, Discretization, SimulationConfig, Solver,
};
use crate::medium::MediumParams;

/// Runs whose surviving norm falls below this are treated as total absorbers.
pub const MIN_SURVIVING_NORM: f64 = 1e-3;

/// Switch-off times where any splitting probability is below this are not
/// considered when balancing: one port is then essentially empty.
pub const MIN_SPLIT: f64 = 1e-2;

/// Output of one single-port run: the photon emitted at `z = L` (time series)
/// and the spin wave left in the medium (spatial profile). The weights turn
/// sums of squared samples into probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortOutputs {
    pub photon: Vec<Complex64>,
    pub magnon: Vec<Complex64>,
    pub photon_weight: f64,
    pub magnon_weight: f64,
}

impl PortOutputs {
    pub fn photon_norm(&self) -> f64 {
        grid_norm(&self.photon, self.photon_weight)
    }

    pub fn magnon_norm(&self) -> f64 {
        grid_norm(&self.magnon, self.magnon_weight)
    }

    pub fn surviving_norm(&self) -> f64 {
        self.photon_norm() + self.magnon_norm()
    }
}

/// Dominant normalized mode of the span of `x` and `y`, i.e. the top
/// eigenvector of their Gram matrix. `None` if both vanish.
fn principal_mode(x: &[Complex64], y: &[Complex64], w: f64) -> Option<Vec<Complex64>> {
    let g11 = inner(x, x, w).re;
    let g22 = inner(y, y, w).re;
    let g12 = inner(x, y, w);
    if g11 + g22 <= 0.0 {
        return None;
    }
    let half = 0.5 * (g11 - g22);
    let lambda = 0.5 * (g11 + g22) + (half * half + g12.norm_sqr()).sqrt();
    let (cx, cy) = if g12.norm() > 1e-14 * (g11 + g22) {
        (g12, Complex64::new(lambda - g11, 0.0))
    } else if g11 >= g22 {
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    };
    let mode: Vec<Complex64> = x.iter().zip(y).map(|(a, b)| cx * a + cy * b).collect();
    let n = grid_norm(&mode, w).sqrt();
    if n == 0.0 {
        return None;
    }
    Some(mode.into_iter().map(|v| v / n).collect())
}

/// Project the two port outputs onto their dominant mode. Returns the
/// amplitudes `(<u|x>, <u|y>)` with the mode phase chosen so the first is
/// real and non-negative (the second, if the first vanishes).
fn project_pair(x: &[Complex64], y: &[Complex64], w: f64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let Some(u) = principal_mode(x, y, w) else {
        return (zero, zero);
    };
    let a = inner(&u, x, w);
    let b = inner(&u, y, w);
    let reference = if a.norm() > 1e-12 { a } else { b };
    if reference.norm() == 0.0 {
        return (a, b);
    }
    let phase = reference.conj() / reference.norm();
    (a * phase, b * phase)
}

/// Splitter amplitudes from a magnon-input run `a` and a photon-input run
/// `b`. Each output port is reduced to its dominant mode; the magnon-port
/// mode is phased so `t1 >= 0` and the photon-port mode so `r1 >= 0`.
pub fn project_ports(a: &PortOutputs, b: &PortOutputs) -> Result<SplitterMatrix> {
    if a.magnon.len() != b.magnon.len() {
        return Err(Error::GridMismatch(a.magnon.len(), b.magnon.len()));
    }
    if a.photon.len() != b.photon.len() {
        return Err(Error::GridMismatch(a.photon.len(), b.photon.len()));
    }
    let (t1, r2) = project_pair(&a.magnon, &b.magnon, a.magnon_weight);
    let (r1, t2) = project_pair(&a.photon, &b.photon, a.photon_weight);
    SplitterMatrix::new(t1, r1, t2, r2)
}

/// A stored magnon (unit norm) meeting an incoming photon under a
/// beam-splitting control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceSetup {
    pub medium: MediumParams,
    pub magnon: Vec<Complex64>,
    pub protocol: BeamSplitProtocol,
    pub discretization: Discretization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub matrix: SplitterMatrix,
    /// Magnon-input run (`a`) and photon-input run (`b`).
    pub runs: [PortOutputs; 2],
    /// Spatial DSP overlap of the two runs at the moment the photon run has
    /// the most excitation inside the medium.
    pub overlap: f64,
    pub overlap_time: f64,
    pub switch_off: f64,
    /// `ln(|t1 t2| / |r1 r2|)` of the returned matrix; 0 when balanced.
    pub imbalance: f64,
    /// Worst bookkeeping defect over all runs involved.
    pub max_defect: f64,
}

impl InterferenceSetup {
    fn config(
        &self,
        protocol: &BeamSplitProtocol,
        magnon_input: bool,
        t_end: f64,
    ) -> Result<SimulationConfig> {
        let mut cfg = SimulationConfig::new(self.medium, protocol.hold_timeline(t_end)?, t_end)
            .with_discretization(self.discretization);
        if magnon_input {
            cfg = cfg.with_magnon(self.magnon.clone());
        } else {
            cfg = cfg.with_pulse(protocol.pulse()?);
        }
        Ok(cfg)
    }

    fn solvers(&self, t_end: f64) -> Result<(Solver, Solver)> {
        let a = Solver::new(&self.config(&self.protocol, true, t_end)?)?;
        let b = Solver::new(&self.config(&self.protocol, false, t_end)?)?;
        Ok((a, b))
    }
}

fn outputs(prefix: &[Complex64], solver: &Solver) -> PortOutputs {
    let dz = solver.grid().spacing();
    let mut photon = prefix[..solver.history_offset()].to_vec();
    photon.extend_from_slice(solver.emitted().1);
    PortOutputs {
        photon,
        magnon: solver.state().sigma12.clone(),
        photon_weight: dz,
        magnon_weight: dz,
    }
}

/// Tracks the DSP overlap at the moment the photon-input run holds the most
/// excitation inside the medium.
struct OverlapProbe {
    best_inside: f64,
    overlap: Option<f64>,
    time: f64,
}

impl OverlapProbe {
    fn new() -> Self {
        Self {
            best_inside: 0.0,
            overlap: None,
            time: 0.0,
        }
    }

    fn observe(&mut self, a: &Solver, b: &Solver) -> Result<()> {
        let inside = b.state().budget().inside();
        if inside > self.best_inside {
            self.best_inside = inside;
            let omega = a.timeline().omega(a.time());
            let psi_a = dsp_project(a.state(), omega, a.medium());
            let psi_b = dsp_project(b.state(), omega, b.medium());
            self.overlap = overlap(&psi_a, &psi_b).ok();
            self.time = a.time();
        }
        Ok(())
    }
}

fn check_survival(a: &PortOutputs, b: &PortOutputs) -> Result<()> {
    let (sa, sb) = (a.surviving_norm(), b.surviving_norm());
    if sa < MIN_SURVIVING_NORM {
        return Err(Error::TotalAbsorber(sa, "magnon input"));
    }
    if sb < MIN_SURVIVING_NORM {
        return Err(Error::TotalAbsorber(sb, "photon input"));
    }
    Ok(())
}

/// Both single-port runs with the control switched off at `switch_off`.
pub fn extract_with_switch_off(setup: &InterferenceSetup, switch_off: f64) -> Result<Extraction> {
    let protocol = BeamSplitProtocol {
        switch_off,
        ..setup.protocol
    };
    let t_end = protocol.end();
    let timeline = protocol.timeline()?;
    let (mut a, mut b) = setup.solvers(t_end)?;
    a.set_timeline(timeline.clone());
    b.set_timeline(timeline);
    let mut probe = OverlapProbe::new();
    while a.time() < switch_off {
        a.step()?;
        b.step()?;
        probe.observe(&a, &b)?;
    }
    a.run_until(t_end)?;
    b.run_until(t_end)?;
    let runs = [outputs(&[], &a), outputs(&[], &b)];
    check_survival(&runs[0], &runs[1])?;
    let matrix = project_ports(&runs[0], &runs[1])?;
    Ok(Extraction {
        imbalance: imbalance(&matrix),
        matrix,
        overlap: probe.overlap.ok_or(Error::ZeroNorm)?,
        overlap_time: probe.time,
        switch_off,
        max_defect: a.max_defect().max(b.max_defect()),
        runs,
    })
}

struct Checkpoint {
    a: Solver,
    b: Solver,
}

/// Held-control runs of both ports, checkpointed so switch-off times can be
/// tried without re-running the common prefix.
struct HeldRuns {
    checkpoints: Vec<Checkpoint>,
    prefix_a: Vec<Complex64>,
    prefix_b: Vec<Complex64>,
    probe: OverlapProbe,
    max_defect: f64,
}

impl HeldRuns {
    fn run(setup: &InterferenceSetup, t_max: f64, spacing: f64) -> Result<Self> {
        let (mut a, mut b) = setup.solvers(t_max + setup.protocol.ramp + setup.protocol.settle)?;
        let mut checkpoints = Vec::new();
        let mut probe = OverlapProbe::new();
        let mut next = setup.protocol.on();
        while a.time() < t_max {
            if a.time() >= next - 0.5 * a.dt() {
                checkpoints.push(Checkpoint {
                    a: a.fork(),
                    b: b.fork(),
                });
                next += spacing;
            }
            a.step()?;
            b.step()?;
            probe.observe(&a, &b)?;
        }
        checkpoints.push(Checkpoint {
            a: a.fork(),
            b: b.fork(),
        });
        Ok(Self {
            checkpoints,
            prefix_a: a.emitted().1.to_vec(),
            prefix_b: b.emitted().1.to_vec(),
            probe,
            max_defect: a.max_defect().max(b.max_defect()),
        })
    }

    /// Resume from the latest checkpoint at or before `switch_off`.
    fn try_switch_off(
        &self,
        setup: &InterferenceSetup,
        switch_off: f64,
    ) -> Result<([PortOutputs; 2], f64)> {
        let k = self
            .checkpoints
            .partition_point(|c| c.a.time() <= switch_off + 1e-12)
            .max(1)
            - 1;
        let ck = &self.checkpoints[k];
        let protocol = BeamSplitProtocol {
            switch_off,
            ..setup.protocol
        };
        let timeline = protocol.timeline()?;
        let (mut a, mut b) = (ck.a.fork(), ck.b.fork());
        a.set_timeline(timeline.clone());
        b.set_timeline(timeline);
        a.run_until(protocol.end())?;
        b.run_until(protocol.end())?;
        let defect = a.max_defect().max(b.max_defect());
        Ok((
            [outputs(&self.prefix_a, &a), outputs(&self.prefix_b, &b)],
            defect,
        ))
    }
}

/// `ln(|t1 t2| / |r1 r2|)`: zero at the symmetric splitting point.
pub fn imbalance(m: &SplitterMatrix) -> f64 {
    ((m.t1 * m.t2).norm().max(1e-300) / (m.r1 * m.r2).norm().max(1e-300)).ln()
}

/// Characterize the splitter, switching the control off where the
/// splitting is most symmetric, `|t1 t2| = |r1 r2|`.
///
/// The control is held on up to `t_max` and switch-off times are scanned on
/// a checkpoint grid. A sign change of `ln(|t1 t2| / |r1 r2|)` is refined by
/// bisection. Without one (the magnon polariton always leads, so the
/// magnon port empties first) the closest approach to balance is refined by
/// golden-section search; this is the moment the centre between the two
/// polaritons reaches the exit. The residual is in `Extraction::imbalance`.
pub fn extract_matrix(setup: &InterferenceSetup, t_max: f64) -> Result<Extraction> {
    let spacing = 0.1;
    let held = HeldRuns::run(setup, t_max, spacing)?;
    let mut max_defect = held.max_defect;

    let mut scan: Vec<(f64, f64)> = Vec::new();
    for ck in &held.checkpoints[1..] {
        let t = ck.a.time();
        let (runs, defect) = held.try_switch_off(setup, t)?;
        max_defect = max_defect.max(defect);
        if let Ok(m) = project_ports(&runs[0], &runs[1]) {
            let h = imbalance(&m);
            if h.is_finite()
                && [m.t1, m.r1, m.t2, m.r2]
                    .iter()
                    .all(|x| x.norm_sqr() >= MIN_SPLIT)
            {
                scan.push((t, h));
            }
        }
    }
    if scan.len() < 3 {
        return Err(Error::Singular(
            "splitter has a vanishing amplitude at every switch-off time".into(),
        ));
    }
    let mut eval = |t: f64| -> Result<f64> {
        let (runs, defect) = held.try_switch_off(setup, t)?;
        max_defect = max_defect.max(defect);
        Ok(imbalance(&project_ports(&runs[0], &runs[1])?))
    };
    let tol = 2.0 * held.checkpoints[0].a.dt();
    let crossing = scan
        .windows(2)
        .find(|w| w[0].1.signum() != w[1].1.signum())
        .map(|w| (w[0], w[1]));
    let switch_off = match crossing {
        Some(((mut lo, h_lo), (mut hi, _))) => {
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if eval(mid)?.signum() == h_lo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
        None => {
            let k = (0..scan.len())
                .max_by(|&i, &j| scan[i].1.total_cmp(&scan[j].1))
                .unwrap();
            let (mut lo, mut hi) = (
                scan[k.saturating_sub(1)].0,
                scan[(k + 1).min(scan.len() - 1)].0,
            );
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            let mut x1 = hi - phi * (hi - lo);
            let mut x2 = lo + phi * (hi - lo);
            let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
            while hi - lo > tol {
                if f1 > f2 {
                    hi = x2;
                    (x2, f2) = (x1, f1);
                    x1 = hi - phi * (hi - lo);
                    f1 = eval(x1)?;
                } else {
                    lo = x1;
                    (x1, f1) = (x2, f2);
                    x2 = lo + phi * (hi - lo);
                    f2 = eval(x2)?;
                }
            }
            0.5 * (lo + hi)
        }
    };
    let (runs, defect) = held.try_switch_off(setup, switch_off)?;
    max_defect = max_defect.max(defect);
    check_survival(&runs[0], &runs[1])?;
    let matrix = project_ports(&runs[0], &runs[1])?;
    Ok(Extraction {
        matrix,
        imbalance: imbalance(&matrix),
        overlap: held.probe.overlap.ok_or(Error::ZeroNorm)?,
        overlap_time: held.probe.time,
        switch_off,
        max_defect,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splitter::phi_rt_of_matrix;

    fn gaussian(n: usize, center: f64, width: f64) -> Vec<Complex64> {
        let raw: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((-((j as f64 - center) / width).powi(2)).exp(), 0.0))
            .collect();
        let s = grid_norm(&raw, 1.0).sqrt();
        raw.into_iter().map(|x| x / s).collect()
    }

    /// Outputs of an ideal single-mode splitter acting on fixed port modes.
    fn synthetic(m: &SplitterMatrix) -> (PortOutputs, PortOutputs) {
        let u = gaussian(64, 20.0, 6.0);
        let v = gaussian(300, 140.0, 30.0);
        let with =
            |x: Complex64, modes: &[Complex64]| modes.iter().map(|m| m * x).collect::<Vec<_>>();
        let a = PortOutputs {
            magnon: with(m.t1, &u),
            photon: with(m.r1, &v),
            photon_weight: 1.0,
            magnon_weight: 1.0,
        };
        let b = PortOutputs {
            magnon: with(m.r2, &u),
            photon: with(m.t2, &v),
            photon_weight: 1.0,
            magnon_weight: 1.0,
        };
        (a, b)
    }

    #[test]
    fn projection_round_trips_a_single_mode_splitter() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let injected = SplitterMatrix::new(
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
        )
        .unwrap();
        let (a, b) = synthetic(&injected);
        let got = project_ports(&a, &b).unwrap();
        for (x, y) in [
            (got.t1, injected.t1),
            (got.r1, injected.r1),
            (got.t2, injected.t2),
            (got.r2, injected.r2),
        ] {
            assert!((x - y).norm() < 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn projection_recovers_gauge_invariants() {
        let injected = SplitterMatrix::new(
            Complex64::from_polar(0.39, 1.1),
            Complex64::from_polar(0.45, -0.4),
            Complex64::from_polar(0.51, 2.9),
            Complex64::from_polar(0.47, 0.3),
        )
        .unwrap();
        let (a, b) = synthetic(&injected);
        let got = project_ports(&a, &b).unwrap();
        for (x, y) in [
            (got.t1, injected.t1),
            (got.r1, injected.r1),
            (got.t2, injected.t2),
            (got.r2, injected.r2),
        ] {
            assert!((x.norm() - y.norm()).abs() < 1e-6);
        }
        let d = crate::splitter::phase_distance(
            phi_rt_of_matrix(&got).unwrap(),
            phi_rt_of_matrix(&injected).unwrap(),
        );
        assert!(d.abs() < 1e-6);
    }

    #[test]
    fn projection_scales_linearly() {
        let injected = SplitterMatrix::from_intensities(0.15, 0.2, 0.26, 0.22, 0.4).unwrap();
        let (a, b) = synthetic(&injected);
        let half = |p: &PortOutputs| PortOutputs {
            photon: p.photon.iter().map(|x| x * 0.5).collect(),
            magnon: p.magnon.iter().map(|x| x * 0.5).collect(),
            ..p.clone()
        };
        let full = project_ports(&a, &b).unwrap();
        let scaled = project_ports(&half(&a), &half(&b)).unwrap();
        assert!((scaled.t1 * 2.0 - full.t1).norm() < 1e-12);
        assert!((scaled.r2 * 2.0 - full.r2).norm() < 1e-12);
    }
}

//! Figure reproductions, sweeps and single runs. Each scenario returns its
//! tables together with the numbers the acceptance suite inspects.

use std::f64::consts::{PI, TAU};

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use nhbs_core::fock::{cascade_three, g3_from_distribution, output_distribution, FockInput};
use nhbs_core::pulse::PulseEnvelope;
use nhbs_core::splitter::{
    calibrate_control, monotone_coverage, phi_rt_analytic, CalibrationPoint, Coverage, PhiRtParams,
    SplitterMatrix,
};
use nhbs_core::stats::{self, classical_bounds, OverlapEnvelope};

use crate::config::SweepMode;
use crate::config::SweepParameter;
use crate::model::{build_envelope, characterize, evaluate_point, Characterization, PointResult};
use crate::output::Table;
use crate::units::{Fig2Series, Physics, Point, Resolved};

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Indices of strict interior local maxima.
pub fn interior_maxima(v: &[f64]) -> Vec<usize> {
    (1..v.len().saturating_sub(1))
        .filter(|&i| v[i] > v[i - 1] && v[i] > v[i + 1])
        .collect()
}

/// True when the curve rises to one interior peak and never exceeds it at
/// the ends.
pub fn has_single_interior_maximum(v: &[f64]) -> bool {
    let peaks = interior_maxima(v);
    peaks.len() == 1 && v.iter().all(|x| *x <= v[peaks[0]])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Data {
    pub series: Vec<(Fig2Series, Vec<PointResult>)>,
}

impl Fig2Data {
    pub fn g2_curve(&self, k: usize) -> Vec<f64> {
        self.series[k].1.iter().map(|r| 1.0 + r.overlap()).collect()
    }

    pub fn best_efficiency(&self, k: usize) -> f64 {
        self.series[k]
            .1
            .iter()
            .map(|r| r.storage_efficiency)
            .fold(0.0, f64::max)
    }

    pub fn max_defect(&self) -> f64 {
        self.series
            .iter()
            .flat_map(|s| s.1.iter())
            .map(|r| r.max_defect)
            .fold(0.0, f64::max)
    }
}

pub fn fig2(r: &Resolved) -> Result<(Vec<Table>, Fig2Data)> {
    let phys = &r.physics;
    let u = r.units();
    let jobs: Vec<(usize, Point)> = r
        .fig2
        .iter()
        .enumerate()
        .flat_map(|(k, s)| {
            s.omega_s.iter().map(move |&w| {
                (
                    k,
                    Point {
                        od: s.od,
                        delta: 0.0,
                        omega_s: w,
                        omega_bs: s.omega_bs,
                    },
                )
            })
        })
        .collect();
    let results: Vec<PointResult> = jobs
        .par_iter()
        .map(|(_, p)| evaluate_point(phys, p))
        .collect::<Result<_>>()
        .context("fig2")?;
    let mut series: Vec<(Fig2Series, Vec<PointResult>)> =
        r.fig2.iter().map(|s| (s.clone(), Vec::new())).collect();
    for ((k, _), res) in jobs.iter().zip(results) {
        series[*k].1.push(res);
    }
    let data = Fig2Data { series };

    let mut profiles = Table::new(
        "fig2_profiles",
        "stored magnon density after storage, normalized to one magnon",
        &[
            ("od", ""),
            ("omega_s_mhz", "MHz"),
            ("z", "medium length"),
            ("density", "1/medium length"),
        ],
    );
    let bounds = classical_bounds();
    let mut overlap = Table::new(
        "fig2_overlap",
        "storage efficiency, magnon-photon envelope overlap and the resulting in-phase g2 versus storage control",
        &[
            ("od", ""),
            ("omega_bs_mhz", "MHz"),
            ("omega_s_mhz", "MHz"),
            ("storage_efficiency", ""),
            ("overlap", ""),
            ("overlap_natural", ""),
            ("best_shift_ns", "ns"),
            ("magnon_retrieval", ""),
            ("photon_transmission", ""),
            ("g2", ""),
            ("classicality", ""),
            ("max_defect", ""),
        ],
    );
    overlap.note("overlap is the output-envelope overlap at the best relative delay; g2 = 1 + overlap (phi_rt = 0)");
    let mut summary = Table::new(
        "fig2_summary",
        "per optical depth: shape of the g2 curve and the best storage efficiency",
        &[
            ("od", ""),
            ("omega_bs_mhz", "MHz"),
            ("interior_maxima", ""),
            ("single_interior_maximum", ""),
            ("g2_peak", ""),
            ("omega_s_at_g2_peak_mhz", "MHz"),
            ("best_storage_efficiency", ""),
            ("omega_s_at_best_efficiency_mhz", "MHz"),
        ],
    );
    for (k, (s, rows)) in data.series.iter().enumerate() {
        for (w, res) in s.omega_s.iter().zip(rows) {
            for (z, d) in res.z.iter().zip(&res.density) {
                profiles.push(vec![
                    s.od.into(),
                    u.mhz(*w).into(),
                    (*z).into(),
                    (*d).into(),
                ]);
            }
            let g2 = 1.0 + res.overlap();
            let (shift, retr, trans) = res.held.as_ref().map_or((0.0, 0.0, 0.0), |h| {
                (
                    u.ns(h.envelope.best_shift),
                    h.magnon_retrieval,
                    h.photon_transmission,
                )
            });
            overlap.push(vec![
                s.od.into(),
                u.mhz(s.omega_bs).into(),
                u.mhz(*w).into(),
                res.storage_efficiency.into(),
                res.overlap().into(),
                res.natural_overlap().into(),
                shift.into(),
                retr.into(),
                trans.into(),
                g2.into(),
                bounds.classify_g2(g2).label().into(),
                res.max_defect.into(),
            ]);
        }
        let g2 = data.g2_curve(k);
        let argmax = (0..g2.len())
            .max_by(|&a, &b| g2[a].total_cmp(&g2[b]))
            .unwrap_or(0);
        let effs: Vec<f64> = rows.iter().map(|r| r.storage_efficiency).collect();
        let best = (0..effs.len())
            .max_by(|&a, &b| effs[a].total_cmp(&effs[b]))
            .unwrap_or(0);
        summary.push(vec![
            s.od.into(),
            u.mhz(s.omega_bs).into(),
            interior_maxima(&g2).len().into(),
            has_single_interior_maximum(&g2).into(),
            g2[argmax].into(),
            u.mhz(s.omega_s[argmax]).into(),
            effs[best].into(),
            u.mhz(s.omega_s[best]).into(),
        ]);
    }
    Ok((vec![profiles, overlap, summary], data))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Data {
    /// Calibrated control (normalized) and worst deviation from the targets.
    pub omega_c: f64,
    pub worst_deviation: f64,
    /// `(od, delta, target, phi_rt)` per triple.
    pub phases: Vec<(f64, f64, f64, f64)>,
    pub coverage: Coverage,
    /// Largest jump of the wrapped detuning sweep between samples.
    pub sweep_max_step: f64,
    pub envelope: OverlapEnvelope,
    /// Bookkeeping defect of the solver run behind the envelope, if any.
    pub max_defect: f64,
}

/// Optical depth along the piecewise-linear path through the triples.
fn od_along_path(triples: &[(f64, f64, f64)], delta: f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = triples.iter().map(|t| (t.1, t.0)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if delta <= pts[0].0 || pts.len() == 1 {
        return pts[0].1;
    }
    for w in pts.windows(2) {
        if delta <= w[1].0 {
            let f = (delta - w[0].0) / (w[1].0 - w[0].0);
            return w[0].1 + f * (w[1].1 - w[0].1);
        }
    }
    pts[pts.len() - 1].1
}

pub fn tau_p(phys: &Physics) -> Result<f64> {
    Ok(PulseEnvelope::gaussian(phys.fwhm, 0.0)?.tau_p())
}

pub fn fig3(r: &Resolved) -> Result<(Vec<Table>, Fig3Data)> {
    let phys = &r.physics;
    let u = r.units();
    let f = &r.fig3;
    let tau = tau_p(phys)?;
    let points: Vec<CalibrationPoint> = f
        .triples
        .iter()
        .map(|&(eta, delta, target)| CalibrationPoint { eta, delta, target })
        .collect();
    let (omega_c, worst) = calibrate_control(&points, tau, 1.0, f.calibration.0, f.calibration.1)?;
    let phi_at = |eta: f64, delta: f64| {
        phi_rt_analytic(&PhiRtParams {
            omega_c,
            tau_p: tau,
            gamma31: 1.0,
            delta,
            eta,
        })
    };

    let mut calib = Table::new(
        "fig3_calibration",
        "closed-form phi_rt at the calibrated beam-splitting control",
        &[
            ("od", ""),
            ("delta_mhz", "MHz"),
            ("omega_c_mhz", "MHz"),
            ("target_phi_rt", "rad"),
            ("phi_rt", "rad"),
            ("offset", "rad"),
        ],
    );
    calib.note(format!(
        "control calibrated once against all targets; worst offset {worst:.6} rad"
    ));
    let mut phases = Vec::new();
    for &(od, delta, target) in &f.triples {
        let phi = phi_at(od, delta)?;
        let off = nhbs_core::splitter::phase_distance(phi, target);
        calib.push(vec![
            od.into(),
            u.mhz(delta).into(),
            u.mhz(omega_c).into(),
            target.into(),
            phi.into(),
            off.into(),
        ]);
        phases.push((od, delta, target, phi));
    }

    // Detuning sweep along the path through the triples.
    let delta_max = f.triples.iter().map(|t| t.1).fold(0.0, f64::max);
    let path_phi = |d: f64| phi_at(od_along_path(&f.triples, d), d);
    let mut sweep = Table::new(
        "fig3_phi_sweep",
        "closed-form phi_rt along the detuning path through the three triples",
        &[("delta_mhz", "MHz"), ("od", ""), ("phi_rt", "rad")],
    );
    let mut sweep_max_step: f64 = 0.0;
    let mut prev: Option<f64> = None;
    for d in linspace(0.0, delta_max, f.sweep_steps) {
        let phi = path_phi(d)?;
        if let Some(p) = prev {
            sweep_max_step = sweep_max_step.max(nhbs_core::splitter::phase_distance(phi, p).abs());
        }
        prev = Some(phi);
        sweep.push(vec![
            u.mhz(d).into(),
            od_along_path(&f.triples, d).into(),
            phi.into(),
        ]);
    }
    // Fine-grained monotone stretch starting at the first triple.
    let coverage = monotone_coverage(path_phi, 0.0, delta_max.max(1e-9), 400_000, PI)?;
    let mut cov = Table::new(
        "fig3_coverage",
        "unwrapped phi_rt from zero detuning until it has moved by pi",
        &[("delta_mhz", "MHz"), ("phi_rt_unwrapped", "rad")],
    );
    cov.note(format!(
        "monotone: {}; largest step {:.3e} rad; pi reached at delta = {} MHz",
        coverage.monotone,
        coverage.max_step,
        coverage
            .reached_at
            .map_or("never".to_string(), |d| format!("{:.6}", u.mhz(d)))
    ));
    for (d, p) in coverage.parameter.iter().zip(&coverage.phase) {
        cov.push(vec![u.mhz(*d).into(), (*p).into()]);
    }

    let (envelope, solver) = build_envelope(phys, &f.envelope)?;
    let bounds = classical_bounds();
    let mut by_delay = Table::new(
        "fig3_g2_vs_delay",
        "g2 = 1 + I(delta_tau) cos(phi_rt) for each triple",
        &[
            ("od", ""),
            ("delta_mhz", "MHz"),
            ("phi_rt", "rad"),
            ("delta_tau_ns", "ns"),
            ("overlap", ""),
            ("g2", ""),
            ("classical_low", ""),
            ("classical_high", ""),
            ("classicality", ""),
        ],
    );
    if let Some(s) = &solver {
        by_delay.note(format!(
            "overlap envelope from the solver, peak {:.6}",
            s.overlap()
        ));
    }
    for &(od, delta, _, phi) in &phases {
        for dt in linspace(-f.delay_max, f.delay_max, f.delay_steps) {
            let g = stats::g2(dt, phi, &envelope);
            by_delay.push(vec![
                od.into(),
                u.mhz(delta).into(),
                phi.into(),
                u.ns(dt).into(),
                envelope.at(dt).into(),
                g.into(),
                bounds.g2_low.into(),
                bounds.g2_high.into(),
                bounds.classify_g2(g).label().into(),
            ]);
        }
    }
    let mut by_phase = Table::new(
        "fig3_g2_vs_phi",
        "g2 at zero delay versus phi_rt",
        &[
            ("phi_rt", "rad"),
            ("overlap", ""),
            ("g2", ""),
            ("classical_low", ""),
            ("classical_high", ""),
            ("classicality", ""),
        ],
    );
    for phi in linspace(0.0, TAU, f.phi_steps) {
        let g = stats::g2(0.0, phi, &envelope);
        by_phase.push(vec![
            phi.into(),
            envelope.peak().into(),
            g.into(),
            bounds.g2_low.into(),
            bounds.g2_high.into(),
            bounds.classify_g2(g).label().into(),
        ]);
    }
    let max_defect = solver.as_ref().map_or(0.0, |s| s.max_defect);
    let data = Fig3Data {
        omega_c,
        worst_deviation: worst,
        phases,
        coverage,
        sweep_max_step,
        envelope,
        max_defect,
    };
    Ok((vec![calib, sweep, cov, by_delay, by_phase], data))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corner {
    pub delta_tau: (f64, f64),
    pub overlaps: (f64, f64),
    pub formula: f64,
    pub oracle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig4Data {
    pub envelope: OverlapEnvelope,
    pub corners: Vec<Corner>,
    pub threshold: f64,
}

/// In-phase balanced stage with all amplitudes 1/2.
pub fn ideal_stage() -> SplitterMatrix {
    SplitterMatrix::from_intensities(0.25, 0.25, 0.25, 0.25, 0.0).expect("ideal stage is passive")
}

/// Oracle `g3` for the ideal cascade. Photons 1 and 3 only overlap through
/// photon 2, so their overlap is taken as the product of the two others.
pub fn cascade_g3(i1: f64, i2: f64) -> Result<f64> {
    let net = cascade_three(&ideal_stage(), &ideal_stage(), 1.0)?;
    let dist = output_distribution(&net, &FockInput::triple(i1, i2, i1 * i2)?)?;
    Ok(g3_from_distribution(&net, &dist)?)
}

pub fn fig4(r: &Resolved) -> Result<(Vec<Table>, Fig4Data)> {
    let phys = &r.physics;
    let u = r.units();
    let f = &r.fig4;
    let (envelope, _) = build_envelope(phys, &f.envelope)?;
    let bounds = classical_bounds();
    let delays = linspace(0.0, f.delay_max, f.delay_steps);
    let mut surface = Table::new(
        "fig4_surface",
        "three-photon g3 = (1 + I(delta_tau1)) (1 + I(delta_tau2)) at phi_rt = 0",
        &[
            ("delta_tau1_ns", "ns"),
            ("delta_tau2_ns", "ns"),
            ("overlap1", ""),
            ("overlap2", ""),
            ("g3", ""),
            ("classical_threshold", ""),
            ("classicality", ""),
        ],
    );
    surface.note(format!("classical threshold {}", bounds.g3_high));
    for &a in &delays {
        for &b in &delays {
            let g = stats::g3(a, b, 0.0, &envelope)?;
            surface.push(vec![
                u.ns(a).into(),
                u.ns(b).into(),
                envelope.at(a).into(),
                envelope.at(b).into(),
                g.into(),
                bounds.g3_high.into(),
                bounds.classify_g3(g).label().into(),
            ]);
        }
    }
    let mut corners_t = Table::new(
        "fig4_corners",
        "grid corners: product formula against the Fock-space cascade with ideal stages",
        &[
            ("delta_tau1_ns", "ns"),
            ("delta_tau2_ns", "ns"),
            ("overlap1", ""),
            ("overlap2", ""),
            ("g3_formula", ""),
            ("g3_oracle", ""),
            ("difference", ""),
        ],
    );
    corners_t.note(
        "the product form is exact when photon 2 matches the stored photon or photon 3 matches neither; \
         with overlap1 = 0 and overlap2 = 1 photon 3 meets an even mixture of photons 1 and 2 and the cascade gives 1.5",
    );
    let ends = [0.0, f.delay_max];
    let mut corners = Vec::new();
    for &a in &ends {
        for &b in &ends {
            let (i1, i2) = (envelope.at(a), envelope.at(b));
            let formula = stats::g3(a, b, 0.0, &envelope)?;
            let oracle = cascade_g3(i1, i2)?;
            corners_t.push(vec![
                u.ns(a).into(),
                u.ns(b).into(),
                i1.into(),
                i2.into(),
                formula.into(),
                oracle.into(),
                (oracle - formula).into(),
            ]);
            corners.push(Corner {
                delta_tau: (a, b),
                overlaps: (i1, i2),
                formula,
                oracle,
            });
        }
    }
    Ok((
        vec![surface, corners_t],
        Fig4Data {
            envelope,
            corners,
            threshold: bounds.g3_high,
        },
    ))
}

pub fn sweep_values(r: &Resolved, seed: u64) -> Vec<f64> {
    let s = &r.sweep;
    match s.mode {
        SweepMode::Grid => linspace(s.start, s.stop, s.steps),
        SweepMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..s.steps)
                .map(|_| rng.random_range(s.start..s.stop))
                .collect()
        }
    }
}

pub fn sweep(r: &Resolved, seed: u64) -> Result<Vec<Table>> {
    let phys = &r.physics;
    let u = r.units();
    let s = &r.sweep;
    let values = sweep_values(r, seed);
    let points: Vec<Point> = values
        .iter()
        .map(|&v| {
            let mut p = s.base;
            match s.parameter {
                SweepParameter::Od => p.od = v,
                SweepParameter::OmegaSMhz => p.omega_s = v,
                SweepParameter::OmegaBsMhz => p.omega_bs = v,
                SweepParameter::DeltaMhz => p.delta = v,
            }
            p
        })
        .collect();
    let results: Vec<PointResult> = points
        .par_iter()
        .map(|p| evaluate_point(phys, p))
        .collect::<Result<_>>()?;
    let (name, unit) = match s.parameter {
        SweepParameter::Od => ("od", ""),
        SweepParameter::OmegaSMhz => ("omega_s_mhz", "MHz"),
        SweepParameter::OmegaBsMhz => ("omega_bs_mhz", "MHz"),
        SweepParameter::DeltaMhz => ("delta_mhz", "MHz"),
    };
    let mut t = Table::new(
        "sweep",
        "held-control interference versus one operating parameter",
        &[
            ("index", ""),
            (name, unit),
            ("storage_efficiency", ""),
            ("overlap", ""),
            ("overlap_natural", ""),
            ("magnon_retrieval", ""),
            ("photon_transmission", ""),
            ("g2_in_phase", ""),
            ("max_defect", ""),
        ],
    );
    t.note("g2_in_phase = 1 + overlap, the value for phi_rt = 0");
    for (k, (v, res)) in values.iter().zip(&results).enumerate() {
        let shown = if s.parameter == SweepParameter::Od {
            *v
        } else {
            u.mhz(*v)
        };
        let (retr, trans) = res
            .held
            .as_ref()
            .map_or((0.0, 0.0), |h| (h.magnon_retrieval, h.photon_transmission));
        t.push(vec![
            k.into(),
            shown.into(),
            res.storage_efficiency.into(),
            res.overlap().into(),
            res.natural_overlap().into(),
            retr.into(),
            trans.into(),
            (1.0 + res.overlap()).into(),
            res.max_defect.into(),
        ]);
    }
    Ok(vec![t])
}

pub fn characterization_tables(c: &Characterization, name: &str, r: &Resolved) -> Vec<Table> {
    let u = r.units();
    let m = &c.extraction.matrix;
    let mut summary = Table::new(
        name,
        "splitter extracted from the solver, fed to the Fock-space oracle and compared with the closed form",
        &[
            ("storage_efficiency", ""),
            ("switch_off_ns", "ns"),
            ("imbalance", ""),
            ("phi_rt", "rad"),
            ("overlap", ""),
            ("g2_oracle", ""),
            ("g2_formula", ""),
            ("g2_oracle_product_normalized", ""),
            ("relative_difference", ""),
            ("max_defect", ""),
        ],
    );
    summary.note("imbalance = ln(|t1 t2| / |r1 r2|); zero for a balanced splitter");
    summary.push(vec![
        c.storage_efficiency.into(),
        u.ns(c.extraction.switch_off).into(),
        c.extraction.imbalance.into(),
        c.phi_rt.into(),
        c.overlap.into(),
        c.g2_oracle.into(),
        c.g2_formula.into(),
        c.g2_oracle_product.into(),
        ((c.g2_oracle - c.g2_formula) / c.g2_formula).into(),
        c.max_defect.into(),
    ]);
    let mut matrix = Table::new(
        &format!("{name}_matrix"),
        "splitter elements; t1, r1 act on the magnon input and t2, r2 on the photon input",
        &[("element", ""), ("re", ""), ("im", ""), ("abs2", "")],
    );
    for (label, v) in [("t1", m.t1), ("r1", m.r1), ("t2", m.t2), ("r2", m.r2)] {
        matrix.push(vec![
            label.into(),
            v.re.into(),
            v.im.into(),
            v.norm_sqr().into(),
        ]);
    }
    vec![summary, matrix]
}

pub fn run(r: &Resolved) -> Result<(Vec<Table>, Characterization)> {
    let c = characterize(&r.physics, &r.run)?;
    Ok((characterization_tables(&c, "run", r), c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_maximum_detection() {
        assert!(has_single_interior_maximum(&[1.0, 2.0, 3.0, 2.5, 1.0]));
        assert!(!has_single_interior_maximum(&[1.0, 2.0, 3.0]));
        assert!(!has_single_interior_maximum(&[1.0, 3.0, 2.0, 2.5, 2.0]));
        assert!(!has_single_interior_maximum(&[4.0, 3.0, 3.5, 1.0]));
    }

    #[test]
    fn path_interpolates_between_triples() {
        let t = [(30.0, 0.0, 0.0), (66.0, 10.0, 1.0), (100.0, 20.0, 2.0)];
        assert_eq!(od_along_path(&t, 0.0), 30.0);
        assert_eq!(od_along_path(&t, 5.0), 48.0);
        assert_eq!(od_along_path(&t, 15.0), 83.0);
        assert_eq!(od_along_path(&t, 30.0), 100.0);
    }

    #[test]
    fn ideal_cascade_corners() {
        assert!((cascade_g3(1.0, 1.0).unwrap() - 4.0).abs() < 1e-9);
        assert!((cascade_g3(1.0, 0.0).unwrap() - 2.0).abs() < 1e-9);
        // Photon 3 meets a magnon that is photon 1 or photon 2 with equal weight.
        assert!((cascade_g3(0.0, 1.0).unwrap() - 1.5).abs() < 1e-9);
        assert!((cascade_g3(0.0, 0.0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_sweep_is_reproducible() {
        let mut c = crate::config::Config::default();
        c.sweep.mode = SweepMode::Random;
        let r = c.resolve().unwrap();
        assert_eq!(sweep_values(&r, 3), sweep_values(&r, 3));
        assert_ne!(sweep_values(&r, 3), sweep_values(&r, 4));
        assert!(sweep_values(&r, 3)
            .iter()
            .all(|v| (r.sweep.start..r.sweep.stop).contains(v)));
    }
}

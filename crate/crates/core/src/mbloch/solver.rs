//! Method-of-lines integrator for the weak-probe Lambda-EIT Maxwell-Bloch
//! system
//!
//! ```text
//! d/dt P = -(gamma31 - i delta) P + i g E + (i/2) Omega S
//! d/dt S = -gamma12 S + (i/2) conj(Omega) P
//! (d/dt + c d/dz) E = i g P
//! ```
//!
//! with `P = sqrt(N) sigma13`, `S = sqrt(N) sigma12` and `g` the collective
//! coupling. Each step is Strang split: half a step of the local (stiff,
//! linear) atom-field dynamics, applied with its exact 3x3 propagator, then an
//! exact shift of `E` by an integer number of cells, then the second half
//! step. The shift makes `dt = shift_cells * dz / c`.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{grid_norm, FieldState, NormBudget};
use crate::grid::{make_grid, Grid};
use crate::medium::MediumParams;
use crate::pulse::PulseEnvelope;
use crate::timeline::{ControlTimeline, Stage};

/// Relative norm growth that is treated as an integrator failure.
pub const INSTABILITY_THRESHOLD: f64 = 1e-3;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub n_z: usize,
    /// Grid cells the probe advances per time step.
    pub shift_cells: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            n_z: 101,
            shift_cells: 1,
        }
    }
}

impl Discretization {
    pub fn new(n_z: usize, shift_cells: usize) -> Self {
        Self { n_z, shift_cells }
    }

    /// Twice the spatial resolution; the time step halves with it.
    pub fn refined(&self) -> Self {
        Self {
            n_z: 2 * self.n_z - 1,
            shift_cells: self.shift_cells,
        }
    }

    pub fn dt(&self, medium: &MediumParams) -> f64 {
        let dz = medium.length() / (self.n_z - 1) as f64;
        self.shift_cells as f64 * dz / medium.light_speed()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub medium: MediumParams,
    pub timeline: ControlTimeline,
    /// Photon-port input, entering through `z = 0`.
    pub input_pulse: Option<PulseEnvelope>,
    /// Magnon-port input: initial collective spin coherence on the grid.
    pub initial_magnon: Option<Vec<Complex64>>,
    pub discretization: Discretization,
    pub t_start: f64,
    pub t_end: f64,
    /// Snapshot stride in steps; 0 keeps only the first and last state.
    pub record_every: usize,
}

impl SimulationConfig {
    pub fn new(medium: MediumParams, timeline: ControlTimeline, t_end: f64) -> Self {
        Self {
            medium,
            timeline,
            input_pulse: None,
            initial_magnon: None,
            discretization: Discretization::default(),
            t_start: 0.0,
            t_end,
            record_every: 0,
        }
    }

    pub fn with_pulse(mut self, pulse: PulseEnvelope) -> Self {
        self.input_pulse = Some(pulse);
        self
    }

    pub fn with_magnon(mut self, profile: Vec<Complex64>) -> Self {
        self.initial_magnon = Some(profile);
        self
    }

    pub fn with_discretization(mut self, d: Discretization) -> Self {
        self.discretization = d;
        self
    }

    pub fn with_record_every(mut self, stride: usize) -> Self {
        self.record_every = stride;
        self
    }

    pub fn grid(&self) -> Result<Grid> {
        make_grid(self.medium.length(), self.discretization.n_z)
    }

    pub fn dt(&self) -> f64 {
        self.discretization.dt(&self.medium)
    }

    pub fn validate(&self) -> Result<Grid> {
        let grid = self.grid()?;
        if self.discretization.shift_cells == 0 {
            return Err(Error::Config("shift_cells must be >= 1".into()));
        }
        if self.discretization.shift_cells >= grid.len() {
            return Err(Error::Config(
                "shift_cells must be smaller than the grid".into(),
            ));
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::Config(format!(
                "t_end {} must exceed t_start {}",
                self.t_end, self.t_start
            )));
        }
        if !self.timeline.segments().is_empty()
            && self.t_end < self.timeline.end() - 1e-9 * self.timeline.end().abs().max(1.0)
        {
            return Err(Error::Config(format!(
                "t_end {} ends before the control timeline ({})",
                self.t_end,
                self.timeline.end()
            )));
        }
        if let Some(m) = &self.initial_magnon {
            if m.len() != grid.len() {
                return Err(Error::GridMismatch(m.len(), grid.len()));
            }
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Efficiencies {
    pub storage: f64,
    pub retrieval: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<FieldState>,
    pub emitted_times: Vec<f64>,
    /// `E(L, t)` as it leaves the medium, one sample per exiting cell.
    pub emitted_field: Vec<Complex64>,
    pub final_state: FieldState,
    pub efficiencies: Efficiencies,
    /// Worst relative bookkeeping defect seen over the whole run.
    pub max_defect: f64,
}

impl Trajectory {
    pub fn final_magnon(&self) -> &[Complex64] {
        &self.final_state.sigma12
    }

    pub fn budget(&self) -> NormBudget {
        self.final_state.budget()
    }
}

/// Exact propagator `exp(A h)` of the local atom-field block acting on
/// `(E, P, S)`.
fn local_propagator(medium: &MediumParams, omega: Complex64, h: f64) -> [Complex64; 9] {
    let i = Complex64::i();
    let g = medium.coupling();
    let a = Matrix3::new(
        ZERO,
        i * g,
        ZERO,
        i * g,
        -Complex64::new(medium.gamma31(), -medium.delta()),
        0.5 * i * omega,
        ZERO,
        0.5 * i * omega.conj(),
        Complex64::new(-medium.gamma12(), 0.0),
    );
    let u = (a * Complex64::new(h, 0.0)).exp();
    let mut out = [ZERO; 9];
    for r in 0..3 {
        for c in 0..3 {
            out[3 * r + c] = u[(r, c)];
        }
    }
    out
}

/// Time-stepping state of one Maxwell-Bloch evolution. Cheap to clone, so a
/// run can be checkpointed and resumed with a different control timeline.
#[derive(Debug, Clone)]
pub struct Solver {
    medium: MediumParams,
    timeline: ControlTimeline,
    pulse: Option<PulseEnvelope>,
    pulse_scale: f64,
    grid: Grid,
    shift: usize,
    dt: f64,
    t0: f64,
    steps_done: u64,
    state: FieldState,
    loss_rate: f64,
    cache: Vec<(Complex64, [Complex64; 9])>,
    emitted_times: Vec<f64>,
    emitted_field: Vec<Complex64>,
    history_offset: usize,
    storage_mark: Option<(f64, f64)>,
    nominal_input: f64,
    max_defect: f64,
}

impl Solver {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        let grid = config.validate()?;
        let medium = config.medium;
        let dz = grid.spacing();
        let dt = config.dt();
        let mut state = FieldState::vacuum(grid);
        state.t_now = config.t_start;
        if let Some(m) = &config.initial_magnon {
            state.sigma12.copy_from_slice(m);
            state.injected_norm = grid_norm(m, dz);
        }

        // Normalize the injected samples on the exact injection lattice.
        let mut pulse_scale = 0.0;
        if let Some(p) = &config.input_pulse {
            let sub = dz / medium.light_speed();
            // The whole pulse is normalized even if the run stops before its tail.
            let first = (((p.t_first() - config.t_start) / sub).floor() as i64).max(0);
            let last = ((p.t_last() - config.t_start) / sub).ceil() as i64;
            let sum: f64 = (first..=last)
                .map(|m| p.amplitude(config.t_start + m as f64 * sub).powi(2))
                .sum::<f64>()
                * dz;
            if sum > 0.0 {
                pulse_scale = (p.amplitude_norm() / sum).sqrt();
            }
        }

        let nominal_input = state.injected_norm
            + config.input_pulse.as_ref().map_or(0.0, |p| {
                if pulse_scale > 0.0 {
                    p.amplitude_norm()
                } else {
                    0.0
                }
            });
        let mut solver = Self {
            medium,
            timeline: config.timeline.clone(),
            pulse: config.input_pulse.clone(),
            pulse_scale,
            grid,
            shift: config.discretization.shift_cells,
            dt,
            t0: config.t_start,
            steps_done: 0,
            state,
            loss_rate: 0.0,
            cache: Vec::with_capacity(4),
            emitted_times: Vec::new(),
            emitted_field: Vec::new(),
            history_offset: 0,
            storage_mark: None,
            nominal_input,
            max_defect: 0.0,
        };
        solver.loss_rate = solver.current_loss_rate();
        Ok(solver)
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.state.t_now
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn medium(&self) -> &MediumParams {
        &self.medium
    }

    pub fn timeline(&self) -> &ControlTimeline {
        &self.timeline
    }

    /// Output samples produced since construction (or since the fork this
    /// solver was detached from).
    pub fn emitted(&self) -> (&[f64], &[Complex64]) {
        (&self.emitted_times, &self.emitted_field)
    }

    /// Number of output samples emitted before this solver was forked.
    pub fn history_offset(&self) -> usize {
        self.history_offset
    }

    /// Clone of the current state without the emitted history, for cheap
    /// checkpoints. The history prefix stays with `self`.
    pub fn fork(&self) -> Solver {
        Solver {
            medium: self.medium,
            timeline: self.timeline.clone(),
            pulse: self.pulse.clone(),
            pulse_scale: self.pulse_scale,
            grid: self.grid,
            shift: self.shift,
            dt: self.dt,
            t0: self.t0,
            steps_done: self.steps_done,
            state: self.state.clone(),
            loss_rate: self.loss_rate,
            cache: self.cache.clone(),
            emitted_times: Vec::new(),
            emitted_field: Vec::new(),
            history_offset: self.history_offset + self.emitted_field.len(),
            storage_mark: self.storage_mark,
            nominal_input: self.nominal_input,
            max_defect: self.max_defect,
        }
    }

    /// Replace the control timeline from now on. Past steps are unaffected.
    pub fn set_timeline(&mut self, timeline: ControlTimeline) {
        self.timeline = timeline;
        self.storage_mark = None;
    }

    pub fn max_defect(&self) -> f64 {
        self.max_defect
    }

    fn current_loss_rate(&self) -> f64 {
        let dz = self.grid.spacing();
        2.0 * self.medium.gamma31() * grid_norm(&self.state.sigma13, dz)
            + 2.0 * self.medium.gamma12() * grid_norm(&self.state.sigma12, dz)
    }

    fn propagator(&mut self, omega: Complex64) -> [Complex64; 9] {
        if let Some((_, u)) = self.cache.iter().find(|(w, _)| *w == omega) {
            return *u;
        }
        let u = local_propagator(&self.medium, omega, 0.5 * self.dt);
        if self.cache.len() == 4 {
            self.cache.remove(0);
        }
        self.cache.push((omega, u));
        u
    }

    /// Apply the local propagator to every cell; returns (sum|E|^2, sum|P|^2, sum|S|^2).
    fn apply_local(&mut self, u: &[Complex64; 9]) -> (f64, f64, f64) {
        let st = &mut self.state;
        let (mut se, mut sp, mut ss) = (0.0, 0.0, 0.0);
        for ((e, p), s) in st
            .e_field
            .iter_mut()
            .zip(st.sigma13.iter_mut())
            .zip(st.sigma12.iter_mut())
        {
            let (e0, p0, s0) = (*e, *p, *s);
            *e = u[0] * e0 + u[1] * p0 + u[2] * s0;
            *p = u[3] * e0 + u[4] * p0 + u[5] * s0;
            *s = u[6] * e0 + u[7] * p0 + u[8] * s0;
            se += e.norm_sqr();
            sp += p.norm_sqr();
            ss += s.norm_sqr();
        }
        (se, sp, ss)
    }

    fn advect(&mut self, t_new: f64) {
        let k = self.shift;
        let n = self.grid.len();
        let dz = self.grid.spacing();
        let sub = dz / self.medium.light_speed();
        let e = &mut self.state.e_field;
        // Cells n-k..n leave; the outermost left first.
        for j in (n - k..n).rev() {
            let leave_t = t_new - (j + k - n) as f64 * sub;
            self.emitted_times.push(leave_t);
            self.emitted_field.push(e[j]);
            self.state.emitted_norm += dz * e[j].norm_sqr();
        }
        e.copy_within(0..n - k, k);
        for (i, cell) in e.iter_mut().take(k).enumerate() {
            *cell = match &self.pulse {
                Some(p) => {
                    let a = self.pulse_scale * p.amplitude(t_new - i as f64 * sub);
                    self.state.injected_norm += dz * a * a;
                    Complex64::new(a, 0.0)
                }
                None => ZERO,
            };
        }
    }

    /// Advance one time step.
    pub fn step(&mut self) -> Result<()> {
        let t = self.state.t_now;
        let dt = self.dt;
        let t_new = self.t0 + (self.steps_done + 1) as f64 * dt;
        let u1 = self.propagator(self.timeline.omega(t + 0.25 * dt));
        self.apply_local(&u1);
        self.advect(t_new);
        let u2 = self.propagator(self.timeline.omega(t + 0.75 * dt));
        let (se, sp, ss) = self.apply_local(&u2);
        self.steps_done += 1;
        self.state.t_now = t_new;

        let dz = self.grid.spacing();
        let rate = 2.0 * self.medium.gamma31() * sp * dz + 2.0 * self.medium.gamma12() * ss * dz;
        self.state.loss_accum += 0.5 * dt * (self.loss_rate + rate);
        self.loss_rate = rate;

        let st = &self.state;
        let accounted = dz * (se + sp + ss) + st.loss_accum + st.emitted_norm;
        let scale = st.injected_norm.max(1e-12);
        let defect = (accounted - st.injected_norm) / scale;
        if defect > INSTABILITY_THRESHOLD || !accounted.is_finite() {
            return Err(Error::Instability {
                t: t_new,
                growth: defect,
            });
        }
        self.max_defect = self.max_defect.max(defect.abs());

        if self.storage_mark.is_none() {
            if let Some(t_s) = self.timeline.stage_end(Stage::Storage) {
                if t_new >= t_s {
                    self.storage_mark = Some((dz * ss, st.emitted_norm));
                }
            }
        }
        Ok(())
    }

    /// Step until `t_now >= t` (to within a tenth of a step).
    pub fn run_until(&mut self, t: f64) -> Result<()> {
        while self.state.t_now < t - 0.1 * self.dt {
            self.step()?;
        }
        Ok(())
    }

    fn efficiencies(&self) -> Efficiencies {
        let st = &self.state;
        let input = self.nominal_input;
        if input <= 0.0 {
            return Efficiencies::default();
        }
        match self.storage_mark {
            Some((magnon, emitted_before)) => {
                let storage = magnon / input;
                let total = (st.emitted_norm - emitted_before) / input;
                let retrieval = if storage > 0.0 { total / storage } else { 0.0 };
                Efficiencies {
                    storage,
                    retrieval,
                    total,
                }
            }
            None => Efficiencies {
                storage: st.magnon_norm() / input,
                retrieval: 0.0,
                total: st.emitted_norm / input,
            },
        }
    }

    /// Run to `t_end`, recording a snapshot every `record_every` steps.
    pub fn finish(mut self, t_end: f64, record_every: usize) -> Result<Trajectory> {
        let mut snapshots = vec![self.state.clone()];
        let mut since = 0usize;
        while self.state.t_now < t_end - 0.1 * self.dt {
            self.step()?;
            since += 1;
            if record_every > 0 && since == record_every {
                snapshots.push(self.state.clone());
                since = 0;
            }
        }
        if snapshots.last().map(|s| s.t_now) != Some(self.state.t_now) {
            snapshots.push(self.state.clone());
        }
        let efficiencies = self.efficiencies();
        Ok(Trajectory {
            snapshots,
            emitted_times: self.emitted_times,
            emitted_field: self.emitted_field,
            final_state: self.state,
            efficiencies,
            max_defect: self.max_defect,
        })
    }
}

/// Integrate the Maxwell-Bloch system described by `config`.
pub fn evolve(config: &SimulationConfig) -> Result<Trajectory> {
    Solver::new(config)?.finish(config.t_end, config.record_every)
}

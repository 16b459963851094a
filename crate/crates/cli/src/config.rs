//! Scenario configuration.
//!
//! The file is TOML. Every key has a default, so an empty file (or no file)
//! is a valid configuration. Frequencies are given as `f / 2 pi` in MHz and
//! times in ns; they are converted to the solver's normalized units (rates
//! in units of `gamma31`, times in units of `1 / gamma31`) exactly once, by
//! [`Config::resolve`].

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub physics: Physics,
    pub grid: GridConfig,
    pub fig2: Fig2Config,
    pub fig3: Fig3Config,
    pub fig4: Fig4Config,
    pub sweep: SweepConfig,
    pub run: RunConfig,
    pub accept: AcceptConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    /// Excited-state dephasing `gamma31 / 2 pi`.
    pub gamma31_mhz: f64,
    /// Ground-state dephasing `gamma12 / 2 pi`.
    pub gamma12_mhz: f64,
    /// Intensity FWHM of every input photon.
    pub pulse_fwhm_ns: f64,
    /// Time the storage control stays on after the photon's centre.
    pub storage_hold_ns: f64,
    /// Bare probe speed in the co-moving frame, in medium lengths per
    /// `1 / gamma31`. Dimensionless solver parameter.
    pub light_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n_z: usize,
    pub shift_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig2Config {
    pub ods: Vec<f64>,
    /// Beam-splitting control for each optical depth.
    pub omega_bs_mhz: Vec<f64>,
    /// Storage controls scanned for each optical depth.
    pub omega_s_mhz: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKind {
    /// Gaussian in the delay, width set by the pulse FWHM.
    Gaussian,
    /// Same overlap at every delay.
    Uniform,
    /// Cross-correlation of solver output envelopes.
    Solver,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvelopeConfig {
    pub kind: EnvelopeKind,
    /// Overlap at zero delay for `gaussian` and `uniform`.
    pub peak: f64,
    /// Operating point used by `solver`.
    pub od: f64,
    pub omega_s_mhz: f64,
    pub omega_bs_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3Config {
    pub ods: Vec<f64>,
    pub delta_mhz: Vec<f64>,
    /// Phase each `(od, delta)` pair is meant to realize.
    pub target_phi_rt: Vec<f64>,
    pub calibration_lo_mhz: f64,
    pub calibration_hi_mhz: f64,
    pub envelope: EnvelopeConfig,
    pub delay_max_ns: f64,
    pub delay_steps: usize,
    pub phi_steps: usize,
    pub sweep_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig4Config {
    pub envelope: EnvelopeConfig,
    pub delay_max_ns: f64,
    pub delay_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Grid,
    /// Uniform random samples drawn from the seed.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Od,
    OmegaSMhz,
    OmegaBsMhz,
    DeltaMhz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub mode: SweepMode,
    /// Values of the parameters that are not swept.
    pub base: PointConfig,
}

/// Operating point of the held-control interference experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointConfig {
    pub od: f64,
    pub delta_mhz: f64,
    pub omega_s_mhz: f64,
    pub omega_bs_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub od: f64,
    /// Detuning during beam splitting; storage is always resonant.
    pub delta_mhz: f64,
    pub omega_s_mhz: f64,
    pub omega_bs_mhz: f64,
    /// How long before the photon's centre the beam-splitting control is
    /// already on.
    pub lead_ns: f64,
    /// Latest switch-off considered, measured from control-on.
    pub span_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcceptConfig {
    /// Resonant solver configuration for the solver/oracle/formula check.
    pub resonant: RunConfig,
    /// Far-detuned solver configuration for the same check.
    pub detuned: RunConfig,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            gamma31_mhz: 3.0,
            gamma12_mhz: 0.0,
            pulse_fwhm_ns: 100.0,
            storage_hold_ns: 50.0,
            light_speed: 100.0,
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_z: 101,
            shift_cells: 1,
        }
    }
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            ods: vec![30.0, 150.0],
            omega_bs_mhz: vec![12.0, 24.0],
            omega_s_mhz: vec![
                vec![3.0, 6.0, 9.0, 12.0, 18.0, 24.0, 30.0],
                vec![3.0, 6.0, 9.0, 12.0, 18.0, 24.0, 30.0, 36.0, 45.0],
            ],
        }
    }
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self {
            kind: EnvelopeKind::Gaussian,
            peak: 1.0,
            od: 30.0,
            omega_s_mhz: 9.0,
            omega_bs_mhz: 12.0,
        }
    }
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self {
            ods: vec![30.0, 66.0, 100.0],
            delta_mhz: vec![0.0, 30.0, 60.0],
            target_phi_rt: vec![0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI],
            calibration_lo_mhz: 3.0,
            calibration_hi_mhz: 150.0,
            envelope: EnvelopeConfig {
                kind: EnvelopeKind::Solver,
                ..EnvelopeConfig::default()
            },
            delay_max_ns: 300.0,
            delay_steps: 61,
            phi_steps: 73,
            sweep_steps: 2001,
        }
    }
}

impl Default for Fig4Config {
    fn default() -> Self {
        Self {
            envelope: EnvelopeConfig::default(),
            delay_max_ns: 300.0,
            delay_steps: 13,
        }
    }
}

impl Default for PointConfig {
    fn default() -> Self {
        Self {
            od: 30.0,
            delta_mhz: 0.0,
            omega_s_mhz: 9.0,
            omega_bs_mhz: 12.0,
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            parameter: SweepParameter::OmegaSMhz,
            start: 3.0,
            stop: 30.0,
            steps: 10,
            mode: SweepMode::Grid,
            base: PointConfig::default(),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::resonant()
    }
}

impl RunConfig {
    /// One `1 / gamma31` for the default 3 MHz dephasing, in ns.
    const UNIT_NS: f64 = 1e3 / (2.0 * std::f64::consts::PI * 3.0);

    fn resonant() -> Self {
        Self {
            od: 30.0,
            delta_mhz: 0.0,
            omega_s_mhz: 3.0,
            omega_bs_mhz: 6.0,
            lead_ns: Self::UNIT_NS,
            span_ns: 25.0 * Self::UNIT_NS,
        }
    }

    fn detuned() -> Self {
        Self {
            od: 100.0,
            delta_mhz: 60.0,
            omega_s_mhz: 3.0,
            omega_bs_mhz: 24.0,
            lead_ns: Self::UNIT_NS,
            span_ns: 12.0 * Self::UNIT_NS,
        }
    }
}

impl Default for AcceptConfig {
    fn default() -> Self {
        Self {
            resonant: RunConfig::resonant(),
            detuned: RunConfig::detuned(),
        }
    }
}

fn merge(base: &mut Table, overlay: Table, path: &str) -> Result<()> {
    for (key, value) in overlay {
        let full = if path.is_empty() {
            key.clone()
        } else {
            format!("{path}.{key}")
        };
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o, &full)?,
            (Some(slot), v) => *slot = v,
            (None, _) => bail!("unknown configuration key `{full}`"),
        }
    }
    Ok(())
}

/// Parse the right-hand side of `key=value` as a TOML value; bare words
/// that are not valid TOML are taken as strings.
fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{assignment}` is not of the form key=value"))?;
    let key = key.trim();
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| anyhow!("empty override key in `{assignment}`"))?;
    let mut node = table;
    for p in parts {
        node = match node.get_mut(p) {
            Some(Value::Table(t)) => t,
            _ => bail!("unknown configuration key `{key}`"),
        };
    }
    match node.get_mut(last) {
        Some(slot) if !slot.is_table() => *slot = parse_value(raw.trim()),
        Some(_) => bail!("`{key}` is a section, not a value"),
        None => bail!("unknown configuration key `{key}`"),
    }
    Ok(())
}

impl Config {
    /// Defaults, then the file (if any), then `key=value` overrides. Keys
    /// that do not exist are rejected.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table =
            Table::try_from(Config::default()).context("serializing default configuration")?;
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let file: Table = toml::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            merge(&mut table, file, "")?;
        }
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: Config = Value::Table(table)
            .try_into()
            .context("invalid configuration")?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    fn validate(&self) -> Result<()> {
        let p = &self.physics;
        for (name, v) in [
            ("physics.gamma31_mhz", p.gamma31_mhz),
            ("physics.pulse_fwhm_ns", p.pulse_fwhm_ns),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                bail!("{name} must be positive, got {v}");
            }
        }
        if !(p.gamma12_mhz >= 0.0) || !(p.storage_hold_ns >= 0.0) {
            bail!("physics.gamma12_mhz and physics.storage_hold_ns must be non-negative");
        }
        if self.grid.n_z < 3 || self.grid.shift_cells == 0 {
            bail!("grid needs n_z >= 3 and shift_cells >= 1");
        }
        let f2 = &self.fig2;
        if f2.ods.is_empty()
            || f2.ods.len() != f2.omega_bs_mhz.len()
            || f2.ods.len() != f2.omega_s_mhz.len()
        {
            bail!("fig2.ods, fig2.omega_bs_mhz and fig2.omega_s_mhz must be non-empty and of equal length");
        }
        if f2.omega_s_mhz.iter().any(Vec::is_empty) {
            bail!("fig2.omega_s_mhz: every optical depth needs at least one storage control");
        }
        let f3 = &self.fig3;
        if f3.ods.is_empty()
            || f3.ods.len() != f3.delta_mhz.len()
            || f3.ods.len() != f3.target_phi_rt.len()
        {
            bail!("fig3.ods, fig3.delta_mhz and fig3.target_phi_rt must be non-empty and of equal length");
        }
        if !(f3.calibration_hi_mhz > f3.calibration_lo_mhz) || !(f3.calibration_lo_mhz > 0.0) {
            bail!("fig3 calibration range must satisfy 0 < lo < hi");
        }
        if f3.delay_steps < 1 || f3.phi_steps < 2 || f3.sweep_steps < 2 || self.fig4.delay_steps < 1
        {
            bail!("step counts must be at least 1 (delays) or 2 (phase and detuning sweeps)");
        }
        for env in [&f3.envelope, &self.fig4.envelope] {
            if !(0.0..=1.0).contains(&env.peak) {
                bail!("envelope peak must lie in [0, 1], got {}", env.peak);
            }
        }
        let s = &self.sweep;
        if s.steps == 0 || !(s.start.is_finite() && s.stop.is_finite()) {
            bail!("sweep needs at least one step and a finite range");
        }
        if s.mode == SweepMode::Random && !(s.stop > s.start) {
            bail!("random sweep needs start < stop");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = Config::load(None, &[]).unwrap();
        assert_eq!(c, Config::default());
        let again: Config = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn overrides_replace_values() {
        let c = Config::load(
            None,
            &[
                "grid.n_z=201".into(),
                "fig3.envelope.kind=uniform".into(),
                "fig2.ods=[30.0]".into(),
            ],
        );
        // Lengths no longer match.
        assert!(c.is_err());
        let c = Config::load(
            None,
            &["grid.n_z=201".into(), "fig3.envelope.kind=uniform".into()],
        )
        .unwrap();
        assert_eq!(c.grid.n_z, 201);
        assert_eq!(c.fig3.envelope.kind, EnvelopeKind::Uniform);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::load(None, &["grid.nz=3".into()]).is_err());
        assert!(Config::load(None, &["grid=3".into()]).is_err());
        assert!(Config::load(None, &["no_equals".into()]).is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[physics]\ngamma31_mhz = 3.0\nbogus = 1\n").unwrap();
        assert!(Config::load(Some(&path), &[]).is_err());
        std::fs::write(&path, "[physics]\npulse_fwhm_ns = 50.0\n").unwrap();
        assert_eq!(
            Config::load(Some(&path), &[])
                .unwrap()
                .physics
                .pulse_fwhm_ns,
            50.0
        );
    }
}

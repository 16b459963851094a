//! Piecewise control Rabi frequency `Omega_c(t)`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default duration of the smooth on/off ramps, in units of `1/gamma31`.
pub const DEFAULT_RAMP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Storage,
    #[serde(rename = "beamsplit")]
    BeamSplit,
    Readout,
    Off,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Storage => "storage",
            Stage::BeamSplit => "beamsplit",
            Stage::Readout => "readout",
            Stage::Off => "off",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Hold(Complex64),
    /// Raised-cosine interpolation between the two values.
    Ramp {
        from: Complex64,
        to: Complex64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub profile: Profile,
    pub stage: Stage,
}

impl Segment {
    fn eval(&self, t: f64) -> Complex64 {
        match self.profile {
            Profile::Hold(v) => v,
            Profile::Ramp { from, to } => {
                let s = ((t - self.t_start) / (self.t_end - self.t_start)).clamp(0.0, 1.0);
                from + (to - from) * (0.5 * (1.0 - (PI * s).cos()))
            }
        }
    }
}

/// Ordered, non-overlapping control segments. Outside every segment the
/// control is off.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlTimeline {
    segments: Vec<Segment>,
}

impl ControlTimeline {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for s in &segments {
            if !(s.t_end > s.t_start) || !s.t_start.is_finite() || !s.t_end.is_finite() {
                return Err(Error::Config(format!(
                    "empty or invalid segment [{}, {})",
                    s.t_start, s.t_end
                )));
            }
        }
        for w in segments.windows(2) {
            if w[1].t_start < w[0].t_end {
                return Err(Error::Config(format!(
                    "segments overlap or are out of order: [{}, {}) then [{}, {})",
                    w[0].t_start, w[0].t_end, w[1].t_start, w[1].t_end
                )));
            }
        }
        Ok(Self { segments })
    }

    /// Control permanently off.
    pub fn off() -> Self {
        Self::default()
    }

    pub fn builder() -> TimelineBuilder {
        TimelineBuilder::default()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn segment_at(&self, t: f64) -> Option<&Segment> {
        let k = self.segments.partition_point(|s| s.t_start <= t);
        if k == 0 {
            return None;
        }
        let s = &self.segments[k - 1];
        (t < s.t_end).then_some(s)
    }

    pub fn omega(&self, t: f64) -> Complex64 {
        self.segment_at(t)
            .map_or(Complex64::new(0.0, 0.0), |s| s.eval(t))
    }

    pub fn stage(&self, t: f64) -> Stage {
        self.segment_at(t).map_or(Stage::Off, |s| s.stage)
    }

    pub fn end(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    /// End of the last segment carrying `stage`, if any.
    pub fn stage_end(&self, stage: Stage) -> Option<f64> {
        self.segments
            .iter()
            .filter(|s| s.stage == stage)
            .map(|s| s.t_end)
            .next_back()
    }

    pub fn stage_start(&self, stage: Stage) -> Option<f64> {
        self.segments
            .iter()
            .find(|s| s.stage == stage)
            .map(|s| s.t_start)
    }

    pub fn contains_stage(&self, stage: Stage) -> bool {
        self.segments.iter().any(|s| s.stage == stage)
    }

    /// Largest `|Omega|` reached anywhere on the timeline.
    pub fn max_abs(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| match s.profile {
                Profile::Hold(v) => v.norm(),
                Profile::Ramp { from, to } => from.norm().max(to.norm()),
            })
            .fold(0.0, f64::max)
    }
}

/// Appends segments back to back starting from `t = 0` (or [`TimelineBuilder::starting_at`]).
#[derive(Debug, Clone, Default)]
pub struct TimelineBuilder {
    cursor: f64,
    segments: Vec<Segment>,
}

impl TimelineBuilder {
    pub fn starting_at(mut self, t: f64) -> Self {
        self.cursor = t;
        self
    }

    pub fn hold(mut self, stage: Stage, omega: Complex64, duration: f64) -> Self {
        self.push(stage, Profile::Hold(omega), duration);
        self
    }

    pub fn ramp(mut self, stage: Stage, from: Complex64, to: Complex64, duration: f64) -> Self {
        self.push(stage, Profile::Ramp { from, to }, duration);
        self
    }

    /// Control off for `duration`.
    pub fn gap(mut self, duration: f64) -> Self {
        self.cursor += duration;
        self
    }

    pub fn cursor(&self) -> f64 {
        self.cursor
    }

    fn push(&mut self, stage: Stage, profile: Profile, duration: f64) {
        if duration > 0.0 {
            self.segments.push(Segment {
                t_start: self.cursor,
                t_end: self.cursor + duration,
                profile,
                stage,
            });
        }
        self.cursor += duration;
    }

    pub fn build(self) -> Result<ControlTimeline> {
        ControlTimeline::new(self.segments)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn gaps_are_off_and_ramps_are_continuous() {
        let tl = ControlTimeline::builder()
            .hold(Stage::Storage, c(5.0), 2.0)
            .ramp(Stage::Storage, c(5.0), c(0.0), 0.1)
            .gap(1.0)
            .ramp(Stage::Readout, c(0.0), c(3.0), 0.1)
            .hold(Stage::Readout, c(3.0), 2.0)
            .build()
            .unwrap();
        assert_eq!(tl.omega(1.0), c(5.0));
        assert!((tl.omega(2.0 + 1e-12) - c(5.0)).norm() < 1e-9);
        assert!((tl.omega(2.1 - 1e-12)).norm() < 1e-9);
        assert_eq!(tl.omega(2.5), c(0.0));
        assert_eq!(tl.stage(2.5), Stage::Off);
        assert!((tl.omega(3.15) - c(1.5)).norm() < 1e-12);
        assert_eq!(tl.stage(4.0), Stage::Readout);
        assert_eq!(tl.omega(10.0), c(0.0));
        assert_eq!(tl.stage_end(Stage::Storage), Some(2.1));
        assert_eq!(tl.max_abs(), 5.0);
    }

    #[test]
    fn rejects_overlap() {
        let s = |a: f64, b: f64| Segment {
            t_start: a,
            t_end: b,
            profile: Profile::Hold(c(1.0)),
            stage: Stage::Off,
        };
        assert!(ControlTimeline::new(vec![s(0.0, 2.0), s(1.0, 3.0)]).is_err());
        assert!(ControlTimeline::new(vec![s(2.0, 3.0), s(0.0, 1.0)]).is_err());
        assert!(ControlTimeline::new(vec![s(1.0, 1.0)]).is_err());
        assert!(ControlTimeline::new(vec![s(0.0, 1.0), s(1.0, 2.0)]).is_ok());
    }
}

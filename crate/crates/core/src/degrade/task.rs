use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqio::Dims;

use super::{BoxDownsample, Compose, Degradation, GaussianBlur, TemporalAverage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    /// 4× super-resolution.
    Sr,
    /// Gaussian deblurring.
    Deblur,
    /// Temporal averaging followed by 4× downsampling.
    SrPlus,
    /// Temporal averaging followed by Gaussian blur.
    DeblurPlus,
    /// Long temporal averaging only.
    TemporalBlur,
}

impl TaskKind {
    pub const ALL: [TaskKind; 5] = [
        TaskKind::Sr,
        TaskKind::Deblur,
        TaskKind::SrPlus,
        TaskKind::DeblurPlus,
        TaskKind::TemporalBlur,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Sr => "sr",
            TaskKind::Deblur => "deblur",
            TaskKind::SrPlus => "sr_plus",
            TaskKind::DeblurPlus => "deblur_plus",
            TaskKind::TemporalBlur => "temporal_blur",
        }
    }

    fn default_window(&self) -> usize {
        match self {
            TaskKind::TemporalBlur => 13,
            _ => 7,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown task {s:?}")))
    }
}

/// A degradation kind together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Task {
    pub kind: TaskKind,
    pub scale: usize,
    pub blur_sigma: f64,
    /// Temporal window; `None` picks 7 for the "plus" tasks and 13 for temporal blur.
    pub window: Option<usize>,
}

impl Default for Task {
    fn default() -> Self {
        Task::new(TaskKind::Sr)
    }
}

impl Task {
    pub fn new(kind: TaskKind) -> Self {
        Task {
            kind,
            scale: 4,
            blur_sigma: 3.0,
            window: None,
        }
    }

    pub fn window(&self) -> usize {
        self.window.unwrap_or_else(|| self.kind.default_window())
    }

    /// Shape of the clean signal whose measurements have shape `measured`.
    pub fn signal_dims(&self, measured: Dims) -> Dims {
        match self.kind {
            TaskKind::Sr | TaskKind::SrPlus => Dims {
                height: measured.height * self.scale,
                width: measured.width * self.scale,
                ..measured
            },
            _ => measured,
        }
    }

    /// Builds the measurement operator for `input` shaped sequences.
    pub fn build(&self, input: Dims) -> Result<Degradation> {
        let down = || -> Result<Degradation> { Ok(Arc::new(BoxDownsample::new(input, self.scale)?)) };
        let blur = || -> Result<Degradation> { Ok(Arc::new(GaussianBlur::new(input, self.blur_sigma)?)) };
        let avg = || -> Result<Degradation> { Ok(Arc::new(TemporalAverage::new(input, self.window())?)) };
        Ok(match self.kind {
            TaskKind::Sr => down()?,
            TaskKind::Deblur => blur()?,
            TaskKind::SrPlus => Arc::new(Compose::new(vec![avg()?, down()?])?),
            TaskKind::DeblurPlus => Arc::new(Compose::new(vec![avg()?, blur()?])?),
            TaskKind::TemporalBlur => avg()?,
        })
    }
}

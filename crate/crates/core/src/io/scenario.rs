//! Scenario files (TOML, schema `netcp-scenario/1`).
//!
//! ```toml
//! schema = "netcp-scenario/1"
//! horizon = 100
//! change_points = [50]
//! self_loops = true
//!
//! [[segments]]
//! kind = "sbm"
//! n = 20
//! r = 2
//! rho = 0.5
//! q = [[1.0, 0.5], [0.5, 1.0]]
//!
//! [[segments]]
//! kind = "dense"
//! theta = [[0.1, 0.2], [0.2, 0.1]]
//! ```
//!
//! Instead of `segments`, a `[hard_instance]` table with `n`, `rho`,
//! `kappa0`, `delta` and `side` describes a two-community hard instance whose
//! sign vector is drawn from the run seed.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net_model::{
    lecam_hard_instance, sbm_theta, EdgeProbabilityMatrix, PiecewiseScenario, SbmSpec, Segment,
    Side,
};

pub const SCENARIO_SCHEMA: &str = "netcp-scenario/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    pub horizon: usize,
    #[serde(default)]
    pub change_points: Vec<usize>,
    #[serde(default = "default_true")]
    pub self_loops: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<SegmentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hard_instance: Option<HardInstanceSpec>,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SegmentSpec {
    Dense {
        theta: Vec<Vec<f64>>,
    },
    Sbm {
        n: usize,
        r: usize,
        rho: f64,
        q: Vec<Vec<f64>>,
        /// 1-based community labels; balanced contiguous blocks when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<usize>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardInstanceSpec {
    pub n: usize,
    pub rho: f64,
    pub kappa0: f64,
    pub delta: usize,
    pub side: Side,
}

impl ScenarioFile {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::format(source, e.to_string()))?;
        if file.schema != SCENARIO_SCHEMA {
            return Err(Error::format(
                source,
                format!(
                    "field `schema`: expected \"{SCENARIO_SCHEMA}\", got \"{}\"",
                    file.schema
                ),
            ));
        }
        match (&file.hard_instance, file.segments.is_empty()) {
            (Some(_), false) => Err(Error::format(
                source,
                "give either `segments` or `hard_instance`, not both",
            )),
            (None, true) => Err(Error::format(
                source,
                "field `segments`: at least one segment is required",
            )),
            (Some(_), true) if !file.change_points.is_empty() => Err(Error::format(
                source,
                "field `change_points`: a hard instance places its own change point",
            )),
            _ => Ok(file),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario file serializes")
    }

    /// Builds the scenario; `rng` is used only by hard instances.
    pub fn build<R: Rng + ?Sized>(&self, source: &str, rng: &mut R) -> Result<PiecewiseScenario> {
        let at = |field: String, e: Error| Error::format(source, format!("field `{field}`: {e}"));
        if let Some(h) = &self.hard_instance {
            let sc = lecam_hard_instance(h.n, h.rho, h.kappa0, h.delta, self.horizon, h.side, rng)
                .map_err(|e| at("hard_instance".into(), e))?;
            return Ok(if self.self_loops {
                sc
            } else {
                sc.without_self_loops()
            });
        }
        let mut segments = Vec::with_capacity(self.segments.len());
        for (k, spec) in self.segments.iter().enumerate() {
            let field = format!("segments[{k}]");
            let seg = match spec {
                SegmentSpec::Dense { theta } => Segment {
                    theta: EdgeProbabilityMatrix::from_rows(theta)
                        .map_err(|e| at(format!("{field}.theta"), e))?,
                    sbm: None,
                },
                SegmentSpec::Sbm {
                    n,
                    r,
                    rho,
                    q,
                    labels,
                } => {
                    let spec = SbmSpec {
                        n: *n,
                        r: *r,
                        labels: labels
                            .clone()
                            .unwrap_or_else(|| SbmSpec::balanced_labels(*n, *r)),
                        q: q.clone(),
                        rho: *rho,
                        self_loops: self.self_loops,
                    };
                    Segment {
                        theta: sbm_theta(&spec).map_err(|e| at(field.clone(), e))?,
                        sbm: Some(spec),
                    }
                }
            };
            segments.push(seg);
        }
        PiecewiseScenario::new(
            self.horizon,
            self.change_points.clone(),
            segments,
            self.self_loops,
        )
        .map_err(|e| Error::format(source, e.to_string()))
    }
}

//! JSON file formats: mission descriptions, trajectories and synthesis
//! reports.
//!
//! A mission file looks like
//!
//! ```json
//! {
//!   "schema": 1,
//!   "name": "toy",
//!   "workspace": { "lower": [0, 0], "upper": [2, 2] },
//!   "horizon": 10,
//!   "regions": [{ "name": "R", "vertices": [[0.5, 0.5], [1.5, 0.5], [1.5, 1.5], [0.5, 1.5]] }],
//!   "formula": "F[0,10] G[0,2] R",
//!   "K": 6, "v_b": 1, "theta_star": 0.5, "lambda": 1,
//!   "epsilon": 0.1, "eps_t": 0.001,
//!   "objective": "l1_path", "side": "right"
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::encoder::{EncodingCounts, Formulation, ObjectiveKind, SynthesisMode, SynthesisProblem};
use crate::geometry::{ConvexRegion, GeometryError, PwlTrajectory, Waypoint, Workspace};
use crate::milp::DEFAULT_EPS_T;
use crate::monitor::Side;
use crate::stl::{parse_formula, Formula, ParseError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum MissionError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {found}, expected {SCHEMA_VERSION}")]
    SchemaVersion { found: u32 },
    #[error("formula: {0}")]
    Formula(#[from] ParseError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// How a region is drawn; inferred from the formula when absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionRole {
    Reach,
    Avoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub name: String,
    /// Polygon vertices in counter-clockwise or clockwise order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    /// Half-space rows `a p <= h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<RegionRole>,
}

impl RegionSpec {
    pub fn polygon(name: impl Into<String>, vertices: Vec<Vec<f64>>) -> Self {
        Self {
            name: name.into(),
            vertices: Some(vertices),
            a: None,
            h: None,
            role: None,
        }
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rect(name: impl Into<String>, x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::polygon(name, vec![vec![x0, y0], vec![x1, y0], vec![x1, y1], vec![x0, y1]])
    }

    pub fn to_region(&self) -> Result<ConvexRegion<f64>, MissionError> {
        match (&self.vertices, &self.a, &self.h) {
            (Some(v), None, None) => Ok(ConvexRegion::from_vertices(self.name.clone(), v)?),
            (None, Some(a), Some(h)) => Ok(ConvexRegion::from_halfspaces(self.name.clone(), a.clone(), h.clone())?),
            _ => Err(MissionError::Invalid(format!(
                "region {:?} needs either `vertices` or both `a` and `h`",
                self.name
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ObjectiveName {
    #[default]
    #[serde(rename = "l1_path")]
    L1Path,
    #[serde(rename = "none")]
    None,
}

/// MILP formulation used for synthesis and export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingName {
    #[default]
    OneSided,
    Exact,
}

fn default_lambda() -> f64 {
    1.0
}

fn default_epsilon() -> f64 {
    Workspace::DEFAULT_EPSILON
}

fn default_eps_t() -> f64 {
    DEFAULT_EPS_T
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionFile {
    pub schema: u32,
    pub name: String,
    pub workspace: WorkspaceBounds,
    pub horizon: f64,
    #[serde(default)]
    pub regions: Vec<RegionSpec>,
    pub formula: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub v_b: f64,
    pub theta_star: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_eps_t")]
    pub eps_t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Vec<f64>>,
    #[serde(default)]
    pub objective: ObjectiveName,
    #[serde(default)]
    pub side: Side,
    #[serde(default, skip_serializing_if = "is_default_encoding")]
    pub encoding: EncodingName,
}

fn is_default_encoding(e: &EncodingName) -> bool {
    *e == EncodingName::OneSided
}

impl MissionFile {
    pub fn from_json(text: &str) -> Result<Self, MissionError> {
        let file: MissionFile = serde_json::from_str(text)?;
        if file.schema != SCHEMA_VERSION {
            return Err(MissionError::SchemaVersion { found: file.schema });
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mission serializes")
    }

    /// Validate the file and resolve formula, regions and workspace.
    pub fn load(&self) -> Result<Mission, MissionError> {
        let invalid = |m: String| Err(MissionError::Invalid(m));
        let workspace = Workspace::new(
            self.workspace.lower.clone(),
            self.workspace.upper.clone(),
            self.horizon,
            self.epsilon,
        )?;
        let d = workspace.dim();
        let formula = parse_formula(&self.formula)?;
        let mut regions = BTreeMap::new();
        for spec in &self.regions {
            let r = spec.to_region()?;
            if r.dim() != d {
                return invalid(format!("region {:?} has dimension {}, workspace has {d}", spec.name, r.dim()));
            }
            if regions.insert(spec.name.clone(), r).is_some() {
                return invalid(format!("region {:?} is declared twice", spec.name));
            }
        }
        for name in formula.region_names() {
            if !regions.contains_key(&name) {
                return invalid(format!("atom {name:?} does not name a declared region"));
            }
        }
        if self.k < 2 {
            return invalid(format!("K must be at least 2, got {}", self.k));
        }
        if !(self.v_b > 0.0) {
            return invalid("v_b must be positive".into());
        }
        if !(self.theta_star >= 0.0) || !(self.lambda > 0.0) || !(self.eps_t >= 0.0) {
            return invalid("theta_star and eps_t must be nonnegative and lambda positive".into());
        }
        for (label, pt) in [("start", &self.start), ("goal", &self.goal)] {
            if let Some(p) = pt {
                if p.len() != d {
                    return invalid(format!("{label} has dimension {}, workspace has {d}", p.len()));
                }
            }
        }
        let roles = self
            .regions
            .iter()
            .map(|spec| {
                let role = spec.role.unwrap_or_else(|| infer_role(&formula, &spec.name));
                (spec.name.clone(), role)
            })
            .collect();
        Ok(Mission {
            file: self.clone(),
            formula,
            regions,
            roles,
            workspace,
        })
    }
}

/// A region that only ever appears negated is an obstacle.
fn infer_role(f: &Formula, name: &str) -> RegionRole {
    fn visit(f: &Formula, name: &str, pos: &mut bool, neg: &mut bool) {
        match f {
            Formula::Atom(n) if n == name => *pos = true,
            Formula::NegAtom(n) if n == name => *neg = true,
            _ => {}
        }
        for c in f.children() {
            visit(c, name, pos, neg);
        }
    }
    let (mut pos, mut neg) = (false, false);
    visit(f, name, &mut pos, &mut neg);
    if neg && !pos {
        RegionRole::Avoid
    } else {
        RegionRole::Reach
    }
}

/// A validated mission.
#[derive(Debug, Clone, PartialEq)]
pub struct Mission {
    pub file: MissionFile,
    /// Parsed formula; intervals may still be open.
    pub formula: Formula,
    pub regions: BTreeMap<String, ConvexRegion<f64>>,
    pub roles: BTreeMap<String, RegionRole>,
    pub workspace: Workspace,
}

impl Mission {
    pub fn from_json(text: &str) -> Result<Self, MissionError> {
        MissionFile::from_json(text)?.load()
    }

    /// Formula with every open interval closed at the horizon.
    pub fn resolved_formula(&self) -> Formula {
        self.formula.resolve_horizon(self.workspace.horizon)
    }

    /// Synthesis problem with the file's `K`. A `theta_star` of zero asks
    /// for plain satisfaction.
    pub fn synthesis_problem(&self) -> SynthesisProblem {
        self.synthesis_problem_with_k(self.file.k)
    }

    pub fn synthesis_problem_with_k(&self, k: usize) -> SynthesisProblem {
        let f = &self.file;
        let mut prob = SynthesisProblem::new(
            self.formula.clone(),
            self.regions.clone(),
            k,
            self.workspace.clone(),
            f.v_b,
            f.theta_star,
        );
        prob.lambda = f.lambda;
        prob.eps_t = f.eps_t;
        prob.start = f.start.clone();
        prob.goal = f.goal.clone();
        prob.side = f.side;
        if f.theta_star == 0.0 {
            prob.mode = SynthesisMode::Qualitative;
        }
        prob.formulation = match f.encoding {
            EncodingName::OneSided => Formulation::OneSided,
            EncodingName::Exact => Formulation::Exact,
        };
        prob.objective = match f.objective {
            ObjectiveName::L1Path => ObjectiveKind::PathLengthL1,
            ObjectiveName::None => ObjectiveKind::MakespanOnly,
        };
        prob
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointRecord {
    pub t: f64,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryFile {
    pub waypoints: Vec<WaypointRecord>,
}

impl TrajectoryFile {
    pub fn from_json(text: &str) -> Result<Self, MissionError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }

    pub fn to_trajectory(&self) -> Result<PwlTrajectory<f64>, MissionError> {
        let wps = self
            .waypoints
            .iter()
            .map(|w| Waypoint::new(w.t, w.p.clone()))
            .collect();
        Ok(PwlTrajectory::new(wps)?)
    }
}

impl From<&PwlTrajectory<f64>> for TrajectoryFile {
    fn from(traj: &PwlTrajectory<f64>) -> Self {
        Self {
            waypoints: traj
                .waypoints()
                .iter()
                .map(|w| WaypointRecord { t: w.t, p: w.p.clone() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountsRecord {
    pub num_binary: usize,
    pub num_continuous: usize,
    pub num_constraints: usize,
}

impl From<&EncodingCounts> for CountsRecord {
    fn from(c: &EncodingCounts) -> Self {
        Self {
            num_binary: c.num_binary,
            num_continuous: c.num_continuous,
            num_constraints: c.num_constraints,
        }
    }
}

/// Outcome of a verified synthesis run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthesisReport {
    pub mission: String,
    pub status: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub objective: f64,
    /// Root robustness according to the MILP solution.
    pub theta_milp: f64,
    /// Root robustness recomputed by the monitor on the extracted trajectory.
    pub theta_monitor: f64,
    pub satisfied: bool,
    pub path_length: f64,
    pub counts: CountsRecord,
    pub nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

//! Qualitative and time-robustness semantics of STL over PWL trajectories.
//!
//! Segment indices are 0-based throughout: segment `i` spans
//! `[t_i, t_{i+1}]` and there are `K - 1` of them.
//!
//! Atoms are labelled per segment with the conservative inside/outside
//! predicates from [`crate::geometry`]. Temporal operators quantify over the
//! segments whose closed time span touches the operator window:
//!
//! * `G[a,b]` at segment `i`: window `[t_i + a, t_{i+1} + b]`, infimum;
//! * `F[a,b]` at segment `i`: window `[t_{i+1} + a, t_i + b]`, supremum,
//!   defined only when `t_{i+1} - t_i <= b - a` (otherwise `-inf`/false);
//! * `U[a,b]`: `F`'s window for the right operand, and for each candidate
//!   `j` the left operand over segments `l <= j` touching `[t_i, t_{i+1} + b]`.
//!
//! Empty infima are `+inf`, empty suprema `-inf`.

pub mod naive;
mod soundness;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::geometry::{ConvexRegion, PwlTrajectory, SegmentLabel};
use crate::stl::{format_formula, Formula};
use crate::Scalar;

pub use soundness::{check_soundness, SoundnessReport, Witness};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MonitorError {
    #[error("atom {0:?} is not bound to a region")]
    UnboundAtom(String),
    #[error("formula has a temporal operator without an interval; resolve the horizon first")]
    UnresolvedInterval,
    #[error("region {region:?} has dimension {region_dim}, trajectory has {traj_dim}")]
    DimensionMismatch {
        region: String,
        region_dim: usize,
        traj_dim: usize,
    },
}

/// Extended-real time robustness. Variant order gives the total order
/// `NegInf < Finite(_) < PosInf`.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub enum Robustness<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Scalar> Robustness<T> {
    pub fn zero() -> Self {
        Robustness::Finite(T::zero())
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Robustness::PosInf => true,
            Robustness::NegInf => false,
            Robustness::Finite(v) => *v > T::zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Robustness::PosInf => false,
            Robustness::NegInf => true,
            Robustness::Finite(v) => *v < T::zero(),
        }
    }

    /// `⊓`
    pub fn meet(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `⊔`
    pub fn join(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Robustness::NegInf => f64::NEG_INFINITY,
            Robustness::PosInf => f64::INFINITY,
            Robustness::Finite(v) => v.to_f64_lossy(),
        }
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            Robustness::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl<T: Scalar> fmt::Display for Robustness<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Robustness::NegInf => write!(f, "-inf"),
            Robustness::PosInf => write!(f, "+inf"),
            Robustness::Finite(v) => write!(f, "{}", v.to_f64_lossy()),
        }
    }
}

impl<T: Scalar> Serialize for Robustness<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Robustness::NegInf => s.serialize_str("-inf"),
            Robustness::PosInf => s.serialize_str("+inf"),
            Robustness::Finite(v) => s.serialize_f64(v.to_f64_lossy()),
        }
    }
}

/// Right (`+`) or left (`-`) time robustness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Right,
    Left,
}

/// One node of a flattened formula. Children always precede their parent.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Atom { region: String },
    NegAtom { region: String },
    And(Vec<usize>),
    Or(Vec<usize>),
    Always { a: f64, b: f64, child: usize },
    Eventually { a: f64, b: f64, child: usize },
    Until { a: f64, b: f64, left: usize, right: usize },
}

/// Post-order listing of every subformula; the root is the last entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Subformulas {
    pub nodes: Vec<NodeKind>,
    pub texts: Vec<String>,
}

impl Subformulas {
    pub fn new(f: &Formula) -> Result<Self, MonitorError> {
        let mut out = Subformulas {
            nodes: Vec::new(),
            texts: Vec::new(),
        };
        out.push(f)?;
        Ok(out)
    }

    fn push(&mut self, f: &Formula) -> Result<usize, MonitorError> {
        let kind = match f {
            Formula::Atom(n) => NodeKind::Atom { region: n.clone() },
            Formula::NegAtom(n) => NodeKind::NegAtom { region: n.clone() },
            Formula::And(cs) => NodeKind::And(cs.iter().map(|c| self.push(c)).collect::<Result<_, _>>()?),
            Formula::Or(cs) => NodeKind::Or(cs.iter().map(|c| self.push(c)).collect::<Result<_, _>>()?),
            Formula::Always(i, c) => {
                let i = i.ok_or(MonitorError::UnresolvedInterval)?;
                NodeKind::Always {
                    a: i.a,
                    b: i.b,
                    child: self.push(c)?,
                }
            }
            Formula::Eventually(i, c) => {
                let i = i.ok_or(MonitorError::UnresolvedInterval)?;
                NodeKind::Eventually {
                    a: i.a,
                    b: i.b,
                    child: self.push(c)?,
                }
            }
            Formula::Until(i, l, r) => {
                let i = i.ok_or(MonitorError::UnresolvedInterval)?;
                let left = self.push(l)?;
                let right = self.push(r)?;
                NodeKind::Until { a: i.a, b: i.b, left, right }
            }
        };
        self.nodes.push(kind);
        self.texts.push(format_formula(f));
        Ok(self.nodes.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Qualitative value `z_i^φ` for every (subformula, segment).
#[derive(Debug, Clone, PartialEq)]
pub struct SatMatrix {
    pub values: Vec<Vec<bool>>,
}

impl SatMatrix {
    pub fn get(&self, node: usize, segment: usize) -> bool {
        self.values[node][segment]
    }

    /// Root formula at segment 0.
    pub fn satisfied(&self) -> bool {
        self.values.last().is_some_and(|row| row[0])
    }
}

/// Time robustness for every (subformula, segment) on one side.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessMatrix<T> {
    pub side: Side,
    pub values: Vec<Vec<Robustness<T>>>,
}

impl<T: Scalar> RobustnessMatrix<T> {
    pub fn get(&self, node: usize, segment: usize) -> &Robustness<T> {
        &self.values[node][segment]
    }

    /// Root formula at segment 0.
    pub fn root(&self) -> &Robustness<T> {
        &self.values[self.values.len() - 1][0]
    }
}

/// Formula, trajectory and atom labels bundled for evaluation.
pub struct Instance<'a, T> {
    pub subformulas: Subformulas,
    pub traj: &'a PwlTrajectory<T>,
    /// Per node: segment labels as booleans (atoms only).
    labels: Vec<Option<Vec<bool>>>,
    bounds: Vec<Option<(T, T)>>,
}

impl<'a, T: Scalar> Instance<'a, T> {
    pub fn new(
        f: &Formula,
        traj: &'a PwlTrajectory<T>,
        regions: &BTreeMap<String, ConvexRegion<T>>,
        eps: &T,
    ) -> Result<Self, MonitorError> {
        let subformulas = Subformulas::new(f)?;
        let d = traj.p(0).len();
        let mut cache: BTreeMap<&str, Vec<SegmentLabel>> = BTreeMap::new();
        let mut labels = Vec::with_capacity(subformulas.len());
        let mut bounds = Vec::with_capacity(subformulas.len());
        for node in &subformulas.nodes {
            let lab = match node {
                NodeKind::Atom { region } | NodeKind::NegAtom { region } => {
                    let r = regions
                        .get(region)
                        .ok_or_else(|| MonitorError::UnboundAtom(region.clone()))?;
                    if r.dim() != d {
                        return Err(MonitorError::DimensionMismatch {
                            region: region.clone(),
                            region_dim: r.dim(),
                            traj_dim: d,
                        });
                    }
                    let seg = cache
                        .entry(region.as_str())
                        .or_insert_with(|| traj.labels(r, eps));
                    let want = if matches!(node, NodeKind::Atom { .. }) {
                        SegmentLabel::Inside
                    } else {
                        SegmentLabel::Outside
                    };
                    Some(seg.iter().map(|l| *l == want).collect())
                }
                _ => None,
            };
            labels.push(lab);
            let bnd = match node {
                NodeKind::Always { a, b, .. }
                | NodeKind::Eventually { a, b, .. }
                | NodeKind::Until { a, b, .. } => Some((T::from_f64_lossy(*a), T::from_f64_lossy(*b))),
                _ => None,
            };
            bounds.push(bnd);
        }
        Ok(Self {
            subformulas,
            traj,
            labels,
            bounds,
        })
    }

    fn n(&self) -> usize {
        self.traj.num_segments()
    }

    fn t(&self, k: usize) -> &T {
        self.traj.t(k)
    }

    fn ab(&self, node: usize) -> (&T, &T) {
        let (a, b) = self.bounds[node].as_ref().expect("temporal node");
        (a, b)
    }

    /// `t_{i+1} - t_i <= b - a`, the well-formedness condition of the
    /// eventually/until window.
    pub fn window_condition(&self, node: usize, i: usize) -> bool {
        let (a, b) = self.ab(node);
        self.traj.duration(i) <= b.clone() - a.clone()
    }

    /// Contiguous range of segments `j` with `t_j <= hi` and `t_{j+1} >= lo`.
    fn touching(&self, lo: &T, hi: &T) -> Option<(usize, usize)> {
        let n = self.n();
        // first j with t_{j+1} >= lo
        let first = partition_point(n, |j| self.t(j + 1) < lo);
        // last j with t_j <= hi
        let past = partition_point(n, |j| self.t(j) <= hi);
        if first < past {
            Some((first, past - 1))
        } else {
            None
        }
    }

    fn always_window(&self, node: usize, i: usize) -> Option<(usize, usize)> {
        let (a, b) = self.ab(node);
        let lo = self.t(i).clone() + a.clone();
        let hi = self.t(i + 1).clone() + b.clone();
        self.touching(&lo, &hi)
    }

    fn eventually_window(&self, node: usize, i: usize) -> Option<(usize, usize)> {
        let (a, b) = self.ab(node);
        let lo = self.t(i + 1).clone() + a.clone();
        let hi = self.t(i).clone() + b.clone();
        self.touching(&lo, &hi)
    }

    fn until_prefix_window(&self, node: usize, i: usize) -> Option<(usize, usize)> {
        let (_, b) = self.ab(node);
        let lo = self.t(i).clone();
        let hi = self.t(i + 1).clone() + b.clone();
        self.touching(&lo, &hi)
    }

    fn atom_labels(&self, node: usize) -> &[bool] {
        self.labels[node].as_deref().expect("atom node")
    }

    /// Qualitative satisfaction of every subformula on every segment.
    pub fn qualitative(&self) -> SatMatrix {
        let n = self.n();
        let mut values: Vec<Vec<bool>> = Vec::with_capacity(self.subformulas.len());
        for (k, node) in self.subformulas.nodes.iter().enumerate() {
            let row: Vec<bool> = match node {
                NodeKind::Atom { .. } | NodeKind::NegAtom { .. } => self.atom_labels(k).to_vec(),
                NodeKind::And(cs) => (0..n).map(|i| cs.iter().all(|&c| values[c][i])).collect(),
                NodeKind::Or(cs) => (0..n).map(|i| cs.iter().any(|&c| values[c][i])).collect(),
                NodeKind::Always { child, .. } => (0..n)
                    .map(|i| match self.always_window(k, i) {
                        Some((lo, hi)) => values[*child][lo..=hi].iter().all(|&z| z),
                        None => true,
                    })
                    .collect(),
                NodeKind::Eventually { child, .. } => (0..n)
                    .map(|i| {
                        self.window_condition(k, i)
                            && match self.eventually_window(k, i) {
                                Some((lo, hi)) => values[*child][lo..=hi].iter().any(|&z| z),
                                None => false,
                            }
                    })
                    .collect(),
                NodeKind::Until { left, right, .. } => (0..n)
                    .map(|i| {
                        if !self.window_condition(k, i) {
                            return false;
                        }
                        let Some((jlo, jhi)) = self.eventually_window(k, i) else {
                            return false;
                        };
                        let prefix = self.until_prefix_window(k, i);
                        // all_left[j]: every touching l <= j satisfies the left operand
                        let mut ok_until = true;
                        let mut cursor = 0;
                        let mut found = false;
                        for j in 0..=jhi {
                            while cursor <= j {
                                if let Some((llo, lhi)) = prefix {
                                    if cursor >= llo && cursor <= lhi && !values[*left][cursor] {
                                        ok_until = false;
                                    }
                                }
                                cursor += 1;
                            }
                            if j >= jlo && values[*right][j] && ok_until {
                                found = true;
                                break;
                            }
                        }
                        found
                    })
                    .collect(),
            };
            values.push(row);
        }
        SatMatrix { values }
    }

    /// Time robustness of every subformula on every segment, memoized
    /// bottom-up with range lookups for the temporal windows.
    pub fn robustness(&self, side: Side) -> RobustnessMatrix<T> {
        let n = self.n();
        let mut values: Vec<Vec<Robustness<T>>> = Vec::with_capacity(self.subformulas.len());
        for (k, node) in self.subformulas.nodes.iter().enumerate() {
            let row: Vec<Robustness<T>> = match node {
                NodeKind::Atom { .. } | NodeKind::NegAtom { .. } => self.atom_robustness(k, side),
                NodeKind::And(cs) => (0..n)
                    .map(|i| {
                        cs.iter()
                            .map(|&c| values[c][i].clone())
                            .fold(Robustness::PosInf, Robustness::meet)
                    })
                    .collect(),
                NodeKind::Or(cs) => (0..n)
                    .map(|i| {
                        cs.iter()
                            .map(|&c| values[c][i].clone())
                            .fold(Robustness::NegInf, Robustness::join)
                    })
                    .collect(),
                NodeKind::Always { child, .. } => (0..n)
                    .map(|i| match self.always_window(k, i) {
                        Some((lo, hi)) => values[*child][lo..=hi]
                            .iter()
                            .cloned()
                            .fold(Robustness::PosInf, Robustness::meet),
                        None => Robustness::PosInf,
                    })
                    .collect(),
                NodeKind::Eventually { child, .. } => (0..n)
                    .map(|i| {
                        if !self.window_condition(k, i) {
                            return Robustness::NegInf;
                        }
                        match self.eventually_window(k, i) {
                            Some((lo, hi)) => values[*child][lo..=hi]
                                .iter()
                                .cloned()
                                .fold(Robustness::NegInf, Robustness::join),
                            None => Robustness::NegInf,
                        }
                    })
                    .collect(),
                NodeKind::Until { left, right, .. } => (0..n)
                    .map(|i| {
                        if !self.window_condition(k, i) {
                            return Robustness::NegInf;
                        }
                        let Some((jlo, jhi)) = self.eventually_window(k, i) else {
                            return Robustness::NegInf;
                        };
                        let prefix = self.until_prefix_window(k, i);
                        let mut running = Robustness::PosInf;
                        let mut best = Robustness::NegInf;
                        for j in 0..=jhi {
                            if let Some((llo, lhi)) = prefix {
                                if j >= llo && j <= lhi {
                                    running = running.meet(values[*left][j].clone());
                                }
                            }
                            if j >= jlo {
                                let cand = values[*right][j].clone().meet(running.clone());
                                best = best.join(cand);
                            }
                        }
                        best
                    })
                    .collect(),
            };
            values.push(row);
        }
        RobustnessMatrix { side, values }
    }

    /// Signed run-length aggregation over successor (right) or predecessor
    /// (left) segments with the same label.
    fn atom_robustness(&self, node: usize, side: Side) -> Vec<Robustness<T>> {
        let z = self.atom_labels(node);
        let n = z.len();
        let mut run = vec![T::zero(); n];
        match side {
            Side::Right => {
                for i in (0..n.saturating_sub(1)).rev() {
                    if z[i + 1] == z[i] {
                        run[i] = self.traj.duration(i + 1) + run[i + 1].clone();
                    }
                }
            }
            Side::Left => {
                for i in 1..n {
                    if z[i - 1] == z[i] {
                        run[i] = self.traj.duration(i - 1) + run[i - 1].clone();
                    }
                }
            }
        }
        z.iter()
            .zip(run)
            .map(|(&sat, s)| Robustness::Finite(if sat { s } else { -s }))
            .collect()
    }
}

fn partition_point(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Qualitative semantics of `f` on every segment.
pub fn eval_qualitative<T: Scalar>(
    f: &Formula,
    traj: &PwlTrajectory<T>,
    regions: &BTreeMap<String, ConvexRegion<T>>,
    eps: &T,
) -> Result<SatMatrix, MonitorError> {
    Ok(Instance::new(f, traj, regions, eps)?.qualitative())
}

/// Right or left time robustness of `f` on every segment.
pub fn eval_time_robustness<T: Scalar>(
    f: &Formula,
    traj: &PwlTrajectory<T>,
    regions: &BTreeMap<String, ConvexRegion<T>>,
    eps: &T,
    side: Side,
) -> Result<RobustnessMatrix<T>, MonitorError> {
    Ok(Instance::new(f, traj, regions, eps)?.robustness(side))
}

/// Whether `f` still holds on segment 0 when the trajectory starts `tau`
/// earlier, for each `tau` in `shifts`. Shifts that leave fewer than two
/// waypoints report `None`.
pub fn early_start_check<T: Scalar>(
    f: &Formula,
    traj: &PwlTrajectory<T>,
    regions: &BTreeMap<String, ConvexRegion<T>>,
    eps: &T,
    shifts: &[T],
) -> Result<Vec<Option<bool>>, MonitorError> {
    shifts
        .iter()
        .map(|tau| match traj.advanced(tau) {
            Some(t) => Ok(Some(eval_qualitative(f, &t, regions, eps)?.satisfied())),
            None => Ok(None),
        })
        .collect()
}

/// Per-segment entry of a monitor report.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct SegmentEntry<T: Scalar> {
    pub sat: bool,
    pub theta_right: Robustness<T>,
    pub theta_left: Robustness<T>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct SubformulaReport<T: Scalar> {
    pub formula: String,
    pub segments: Vec<SegmentEntry<T>>,
}

/// Serializable summary: root verdict plus per-subformula values on segment
/// 0 (or on every segment when `full`).
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct MonitorReport<T: Scalar> {
    pub formula: String,
    pub num_segments: usize,
    pub satisfied: bool,
    pub theta_right: Robustness<T>,
    pub theta_left: Robustness<T>,
    pub subformulas: Vec<SubformulaReport<T>>,
}

impl<T: Scalar> MonitorReport<T> {
    pub fn build(
        f: &Formula,
        traj: &PwlTrajectory<T>,
        regions: &BTreeMap<String, ConvexRegion<T>>,
        eps: &T,
        full: bool,
    ) -> Result<Self, MonitorError> {
        let inst = Instance::new(f, traj, regions, eps)?;
        let sat = inst.qualitative();
        let right = inst.robustness(Side::Right);
        let left = inst.robustness(Side::Left);
        let n = if full { traj.num_segments() } else { 1 };
        let subformulas = (0..inst.subformulas.len())
            .map(|k| SubformulaReport {
                formula: inst.subformulas.texts[k].clone(),
                segments: (0..n)
                    .map(|i| SegmentEntry {
                        sat: sat.get(k, i),
                        theta_right: right.get(k, i).clone(),
                        theta_left: left.get(k, i).clone(),
                    })
                    .collect(),
            })
            .collect();
        Ok(Self {
            formula: format_formula(f),
            num_segments: traj.num_segments(),
            satisfied: sat.satisfied(),
            theta_right: right.root().clone(),
            theta_left: left.root().clone(),
            subformulas,
        })
    }
}

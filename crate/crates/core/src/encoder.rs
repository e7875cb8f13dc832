//! Translation of a synthesis problem into a [`MilpModel`].
//!
//! Decision variables are the waypoint times `t_0..t_{K-1}` and positions
//! `p_0..p_{K-1}`. On top of them the encoder builds
//!
//! * segment labels from per-waypoint, per-edge sign indicators;
//! * atom time robustness by the counting recursion
//!   `Δt¹_i = (Δt¹_{i+1} + δt_i) z_i`, `Δt⁰_i = (Δt⁰_{i+1} - δt_i)(1 - z_i)`;
//! * temporal operators through window indicators and sup/inf selectors;
//! * dynamics, the path-length objective and `θ_0 >= θ*`.
//!
//! Infinite robustness values are represented by the sentinels `±S` with
//! `S = T + 1`, which no finite time robustness can reach. Window indicators
//! are biased by `eps_t` so that the MILP value never exceeds the monitored
//! value: supremum windows shrink and infimum windows grow.
//!
//! Subformulas are encoded on demand starting from the root at segment 0,
//! so formulas with a single temporal operator stay linear in `K`.

use std::collections::{BTreeMap, HashMap};

use crate::geometry::{ConvexRegion, PwlTrajectory, Waypoint, Workspace};
use crate::milp::{LinExpr, MilpError, MilpModel, MilpSolution, Sense, VarId};
use crate::monitor::{NodeKind, Side, Subformulas};
use crate::stl::Formula;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodeError {
    #[error("invalid synthesis problem: {0}")]
    InvalidProblem(String),
    #[error("atom {0:?} is not bound to a region")]
    UnboundAtom(String),
    #[error("goal is {distance} away from start (max-norm) but at most {reach} is reachable")]
    InfeasibleEndpoints { distance: f64, reach: f64 },
    #[error(transparent)]
    Milp(#[from] MilpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveKind {
    #[default]
    PathLengthL1,
    MakespanOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SynthesisMode {
    /// Maximize `λ θ_0 - J` subject to `θ_0 >= θ*`.
    #[default]
    Robust,
    /// Require satisfaction only and minimize `J`.
    Qualitative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncodingMode {
    /// Encode only what the root at segment 0 depends on.
    #[default]
    Reduced,
    /// Encode every subformula at every segment.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    /// Values are bounded above by the true robustness and maximized, which
    /// needs far fewer binaries.
    #[default]
    OneSided,
    /// Every value equals the true robustness for any feasible assignment.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisProblem {
    /// Formula with every interval resolved.
    pub formula: Formula,
    pub regions: BTreeMap<String, ConvexRegion<f64>>,
    /// Number of waypoints.
    pub k: usize,
    pub workspace: Workspace,
    /// Per-axis speed bound.
    pub v_b: f64,
    pub theta_star: f64,
    pub lambda: f64,
    pub objective: ObjectiveKind,
    pub start: Option<Vec<f64>>,
    pub goal: Option<Vec<f64>>,
    pub side: Side,
    pub mode: SynthesisMode,
    pub formulation: Formulation,
    pub eps_t: f64,
    pub m_eps: f64,
}

impl SynthesisProblem {
    pub fn new(
        formula: Formula,
        regions: BTreeMap<String, ConvexRegion<f64>>,
        k: usize,
        workspace: Workspace,
        v_b: f64,
        theta_star: f64,
    ) -> Self {
        let formula = formula.resolve_horizon(workspace.horizon);
        Self {
            formula,
            regions,
            k,
            workspace,
            v_b,
            theta_star,
            lambda: 1.0,
            objective: ObjectiveKind::PathLengthL1,
            start: None,
            goal: None,
            side: Side::Right,
            mode: SynthesisMode::Robust,
            formulation: Formulation::OneSided,
            eps_t: crate::milp::DEFAULT_EPS_T,
            m_eps: crate::milp::DEFAULT_M_EPS,
        }
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        let bad = |m: String| Err(EncodeError::InvalidProblem(m));
        if self.k < 2 {
            return bad(format!("need at least 2 waypoints, got {}", self.k));
        }
        if !(self.v_b > 0.0) {
            return bad("v_b must be positive".into());
        }
        if self.mode == SynthesisMode::Robust && !(self.theta_star > 0.0) {
            return bad("theta_star must be positive".into());
        }
        if self.theta_star > self.workspace.horizon {
            return bad(format!(
                "theta_star {} exceeds the horizon {}",
                self.theta_star, self.workspace.horizon
            ));
        }
        if !(self.lambda > 0.0) {
            return bad("lambda must be positive".into());
        }
        if !(self.eps_t >= 0.0) || !(self.m_eps > 0.0) {
            return bad("eps_t must be nonnegative and m_eps positive".into());
        }
        if !self.formula.is_resolved() {
            return bad("formula has unresolved intervals".into());
        }
        let d = self.workspace.dim();
        for name in self.formula.region_names() {
            let r = self
                .regions
                .get(&name)
                .ok_or_else(|| EncodeError::UnboundAtom(name.clone()))?;
            if r.dim() != d {
                return bad(format!("region {name} has dimension {}, workspace has {d}", r.dim()));
            }
        }
        for (label, pt) in [("start", &self.start), ("goal", &self.goal)] {
            if let Some(p) = pt {
                if p.len() != d {
                    return bad(format!("{label} has dimension {}, workspace has {d}", p.len()));
                }
                let inside = p
                    .iter()
                    .zip(self.workspace.lower.iter().zip(&self.workspace.upper))
                    .all(|(x, (l, u))| l <= x && x <= u);
                if !inside {
                    return bad(format!("{label} lies outside the workspace"));
                }
            }
        }
        Ok(())
    }

    /// Big-M covering every gadget operand of this problem.
    pub fn big_m(&self) -> f64 {
        let t = self.workspace.horizon;
        let mut reach = self.workspace.diagonal().max(t + 1.0);
        let mut max_b: f64 = 0.0;
        collect_interval_ends(&self.formula, &mut max_b);
        reach = reach.max(max_b);
        // Normalized edge distances over the workspace corners.
        let corners = box_corners(&self.workspace.lower, &self.workspace.upper);
        for r in self.regions.values() {
            for (row, h) in r.a.iter().zip(&r.h) {
                let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                for c in &corners {
                    let v = (h - row.iter().zip(c).map(|(a, x)| a * x).sum::<f64>()) / norm;
                    reach = reach.max(v.abs() + self.workspace.epsilon + 1.0);
                }
            }
        }
        2.0 * reach + 1.0
    }
}

fn collect_interval_ends(f: &Formula, acc: &mut f64) {
    match f {
        Formula::Always(Some(i), _) | Formula::Eventually(Some(i), _) | Formula::Until(Some(i), _, _) => {
            *acc = acc.max(i.b);
        }
        _ => {}
    }
    for c in f.children() {
        collect_interval_ends(c, acc);
    }
}

fn box_corners(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let d = lo.len();
    (0..1usize << d)
        .map(|mask| (0..d).map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] }).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingCounts {
    pub num_binary: usize,
    pub num_continuous: usize,
    pub num_constraints: usize,
}

/// Handles to the variables created by the encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingArtifacts {
    pub t: Vec<VarId>,
    pub p: Vec<Vec<VarId>>,
    /// Segment labels per (region, positive literal?).
    pub labels: BTreeMap<(String, bool), Vec<VarId>>,
    /// Counting aggregators `(Δt¹, Δt⁰)` per literal and side.
    pub aggregators: BTreeMap<(String, bool), (Vec<VarId>, Vec<VarId>)>,
    /// Robustness (or satisfaction) of each encoded (subformula, segment).
    pub theta: BTreeMap<(usize, usize), LinExpr>,
    pub intersections: Vec<VarId>,
    pub selectors: Vec<VarId>,
    pub subformulas: Subformulas,
    /// Root value at segment 0: `θ_0` in robust mode, `z_0` otherwise.
    pub root: LinExpr,
    pub counts: EncodingCounts,
}

impl EncodingArtifacts {
    /// Trajectory read back from a solution, with times made monotone.
    pub fn trajectory(&self, sol: &MilpSolution) -> PwlTrajectory<f64> {
        let mut last = f64::NEG_INFINITY;
        let wps = self
            .t
            .iter()
            .zip(&self.p)
            .map(|(t, p)| {
                let tv = sol.value(*t).max(last);
                last = tv;
                Waypoint::new(tv, p.iter().map(|v| sol.value(*v)).collect())
            })
            .collect();
        PwlTrajectory::new(wps).expect("solution times are monotone")
    }

    pub fn root_value(&self, sol: &MilpSolution) -> f64 {
        self.root.eval(&sol.values)
    }
}

/// A window indicator that is either decided structurally or a binary.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Ind {
    Const(bool),
    Var(VarId),
}

impl Ind {
    fn expr(self) -> LinExpr {
        match self {
            Ind::Const(b) => LinExpr::constant(b as u8 as f64),
            Ind::Var(v) => LinExpr::var(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalOp {
    Always,
    Eventually,
}

/// Incremental MILP builder. The public methods mirror the individual
/// encoding steps so they can be exercised in isolation.
pub struct Encoder {
    pub model: MilpModel,
    horizon: f64,
    sentinel: f64,
    t: Vec<VarId>,
    p: Vec<Vec<VarId>>,
    census: HashMap<(String, usize, usize, bool), VarId>,
    window_cache: HashMap<(u8, u64, u64, usize, usize), Ind>,
    one_sided: HashMap<(usize, usize, u64), (VarId, bool, bool)>,
    labels: BTreeMap<(String, bool), Vec<VarId>>,
    aggregators: BTreeMap<(String, bool), (Vec<VarId>, Vec<VarId>)>,
    atom_theta: BTreeMap<(String, bool), Vec<VarId>>,
    intersections: Vec<VarId>,
    selectors: Vec<VarId>,
}

impl Encoder {
    pub fn new(big_m: f64, horizon: f64) -> Self {
        Self {
            model: MilpModel::new(big_m),
            horizon,
            sentinel: horizon + 1.0,
            t: Vec::new(),
            p: Vec::new(),
            census: HashMap::new(),
            window_cache: HashMap::new(),
            one_sided: HashMap::new(),
            labels: BTreeMap::new(),
            aggregators: BTreeMap::new(),
            atom_theta: BTreeMap::new(),
            intersections: Vec::new(),
            selectors: Vec::new(),
        }
    }

    /// Value standing in for `+inf` (negate for `-inf`).
    pub fn sentinel(&self) -> f64 {
        self.sentinel
    }

    pub fn times(&self) -> &[VarId] {
        &self.t
    }

    pub fn positions(&self) -> &[Vec<VarId>] {
        &self.p
    }

    fn num_segments(&self) -> usize {
        self.t.len() - 1
    }

    /// `δt_i = t_{i+1} - t_i`.
    fn dt(&self, i: usize) -> LinExpr {
        LinExpr::var(self.t[i + 1]) - self.t[i]
    }

    /// Waypoint variables, monotone time with `t_0 = 0` and
    /// `t_{K-1} = T`, per-axis speed bound and optional endpoints.
    pub fn encode_dynamics(
        &mut self,
        k: usize,
        ws: &Workspace,
        v_b: f64,
        start: Option<&[f64]>,
        goal: Option<&[f64]>,
    ) -> Result<(), EncodeError> {
        let t_end = ws.horizon;
        if let (Some(s), Some(g)) = (start, goal) {
            let distance = s.iter().zip(g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let reach = v_b * t_end;
            if distance > reach {
                return Err(EncodeError::InfeasibleEndpoints { distance, reach });
            }
        }
        let d = ws.dim();
        self.t = (0..k)
            .map(|i| {
                let (lo, hi) = match i {
                    0 => (0.0, 0.0),
                    _ if i == k - 1 => (t_end, t_end),
                    _ => (0.0, t_end),
                };
                self.model.add_continuous(format!("t[{i}]"), lo, hi)
            })
            .collect();
        self.p = (0..k)
            .map(|i| {
                (0..d)
                    .map(|a| {
                        let (mut lo, mut hi) = (ws.lower[a], ws.upper[a]);
                        let pin = match i {
                            0 => start,
                            _ if i == k - 1 => goal,
                            _ => None,
                        };
                        if let Some(pt) = pin {
                            lo = pt[a];
                            hi = pt[a];
                        }
                        self.model.add_continuous(format!("p[{i},{a}]"), lo, hi)
                    })
                    .collect()
            })
            .collect();
        for i in 0..k - 1 {
            self.model
                .constrain(self.dt(i), Sense::Ge, 0.0, format!("dyn.mono[{i}]"));
            for a in 0..d {
                let step = LinExpr::var(self.p[i + 1][a]) - self.p[i][a];
                let reach = self.dt(i) * v_b;
                self.model
                    .constrain(step.clone(), Sense::Le, reach.clone(), format!("dyn.vel_hi[{i},{a}]"));
                self.model
                    .constrain(step, Sense::Ge, -reach, format!("dyn.vel_lo[{i},{a}]"));
            }
        }
        Ok(())
    }

    /// Per-waypoint, per-edge sign indicator with a margin of `eps` (plus
    /// `m_eps`, so that a solver tolerance cannot flip the geometric label).
    fn census_bit(&mut self, region: &ConvexRegion<f64>, w: usize, edge: usize, inside: bool, eps: f64) -> Result<VarId, EncodeError> {
        let key = (region.name.clone(), w, edge, inside);
        if let Some(&v) = self.census.get(&key) {
            return Ok(v);
        }
        let row = &region.a[edge];
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut ap = LinExpr::zero();
        for (a, &coef) in row.iter().enumerate() {
            ap.add_term(self.p[w][a], coef / norm);
        }
        let h = region.h[edge] / norm;
        let margin = eps + self.model.m_eps;
        let mu = if inside { LinExpr::constant(h) - ap - margin } else { ap - h - margin };
        let tag = format!(
            "lin_pred.{}[{},w={w},e={edge}]",
            if inside { "in" } else { "out" },
            region.name
        );
        let b = self.model.enc_linear_predicate(mu, &tag)?;
        self.census.insert(key, b);
        Ok(b)
    }

    /// Segment labels `z_i^π` (inside) or `z_i^¬π` (outside) for a region.
    pub fn encode_labels(&mut self, region: &ConvexRegion<f64>, positive: bool, eps: f64) -> Result<Vec<VarId>, EncodeError> {
        let key = (region.name.clone(), positive);
        if let Some(v) = self.labels.get(&key) {
            return Ok(v.clone());
        }
        let n = self.num_segments();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let z = if positive {
                let mut bits = Vec::new();
                for e in 0..region.num_edges() {
                    bits.push(LinExpr::var(self.census_bit(region, i, e, true, eps)?));
                    bits.push(LinExpr::var(self.census_bit(region, i + 1, e, true, eps)?));
                }
                self.model.enc_and(&bits, &format!("label.in[{},i={i}]", region.name))?
            } else {
                let mut per_edge = Vec::new();
                for e in 0..region.num_edges() {
                    let pair = [
                        LinExpr::var(self.census_bit(region, i, e, false, eps)?),
                        LinExpr::var(self.census_bit(region, i + 1, e, false, eps)?),
                    ];
                    let both = self
                        .model
                        .enc_and(&pair, &format!("label.out_edge[{},i={i},e={e}]", region.name))?;
                    per_edge.push(LinExpr::var(both));
                }
                self.model.enc_or(&per_edge, &format!("label.out[{},i={i}]", region.name))?
            };
            out.push(z);
        }
        self.labels.insert(key, out.clone());
        Ok(out)
    }

    /// Counting encoding of atom time robustness on every segment.
    pub fn encode_atom_robustness(&mut self, z: &[VarId], side: Side, tag: &str) -> Result<Vec<VarId>, EncodeError> {
        let n = z.len();
        assert_eq!(n, self.num_segments(), "one label per segment");
        let t_end = self.horizon;
        let rob_tag = match side {
            Side::Right => "right_time_rob",
            Side::Left => "left_time_rob",
        };
        let mut ones: Vec<Option<VarId>> = vec![None; n];
        let mut zeros: Vec<Option<VarId>> = vec![None; n];
        let order: Vec<usize> = match side {
            Side::Right => (0..n).rev().collect(),
            Side::Left => (0..n).collect(),
        };
        let neighbour = |i: usize| -> Option<usize> {
            match side {
                Side::Right => (i + 1 < n).then_some(i + 1),
                Side::Left => i.checked_sub(1),
            }
        };
        let mut thetas = vec![VarId(0); n];
        for &i in &order {
            let (prev1, prev0) = match neighbour(i) {
                Some(k) => (LinExpr::var(ones[k].unwrap()), LinExpr::var(zeros[k].unwrap())),
                None => (LinExpr::zero(), LinExpr::zero()),
            };
            let zi = LinExpr::var(z[i]);
            let one = self.model.enc_product(
                prev1.clone() + self.dt(i),
                zi.clone(),
                &format!("t_aggre.one[{tag},i={i}]"),
            )?;
            self.model.set_bounds(one, 0.0, t_end)?;
            let zero = self.model.enc_product(
                prev0.clone() - self.dt(i),
                LinExpr::constant(1.0) - zi.clone(),
                &format!("t_aggre.zero[{tag},i={i}]"),
            )?;
            self.model.set_bounds(zero, -t_end, 0.0)?;
            ones[i] = Some(one);
            zeros[i] = Some(zero);
            // θ_i = z_i Δt¹_next + (1 - z_i) Δt⁰_next
            let theta = self.model.add_continuous(format!("theta_atom[{tag},i={i}]"), -t_end, t_end);
            if prev1.is_constant() && prev0.is_constant() {
                self.model
                    .constrain(theta, Sense::Eq, 0.0, format!("{rob_tag}[{tag},i={i}]"));
            } else {
                let y1 = self
                    .model
                    .enc_product(prev1, zi.clone(), &format!("tr_raw.one[{tag},i={i}]"))?;
                let y0 = self
                    .model
                    .enc_product(prev0.clone(), zi, &format!("tr_raw.zero[{tag},i={i}]"))?;
                self.model.constrain(
                    theta,
                    Sense::Eq,
                    LinExpr::var(y1) + prev0 - y0,
                    format!("{rob_tag}[{tag},i={i}]"),
                );
            }
            thetas[i] = theta;
        }
        Ok(thetas)
    }

    /// `μ = t_u - t_v + c >= 0`, decided structurally where monotone time
    /// settles it and otherwise a sign indicator.
    fn time_pred(&mut self, u: usize, v: usize, c: f64, tag: &str) -> Result<Ind, EncodeError> {
        if let Some(known) = self.settled(u, v, c) {
            return Ok(Ind::Const(known));
        }
        let mu = LinExpr::var(self.t[u]) - self.t[v] + c;
        Ok(Ind::Var(self.model.enc_linear_predicate(mu, tag)?))
    }

    /// Truth of `t_u - t_v + c >= 0` when monotone time alone decides it.
    fn settled(&self, u: usize, v: usize, c: f64) -> Option<bool> {
        if u == v {
            return Some(c >= 0.0);
        }
        if (u > v && c >= 0.0) || c >= self.horizon {
            return Some(true);
        }
        if (u < v && c <= -self.model.m_eps) || c < -self.horizon {
            return Some(false);
        }
        None
    }

    fn conjunction(&mut self, parts: &[Ind], tag: &str) -> Result<Ind, EncodeError> {
        if parts.contains(&Ind::Const(false)) {
            return Ok(Ind::Const(false));
        }
        let vars: Vec<LinExpr> = parts
            .iter()
            .filter_map(|p| match p {
                Ind::Var(v) => Some(LinExpr::var(*v)),
                Ind::Const(_) => None,
            })
            .collect();
        Ok(match vars.len() {
            0 => Ind::Const(true),
            1 => Ind::Var(match parts.iter().find(|p| matches!(p, Ind::Var(_))) {
                Some(Ind::Var(v)) => *v,
                _ => unreachable!(),
            }),
            _ => Ind::Var(self.model.enc_and(&vars, tag)?),
        })
    }

    /// `t_{i+1} - t_i <= b - a` (with `eps_t` margin).
    fn side_condition(&mut self, a: f64, b: f64, i: usize) -> Result<Ind, EncodeError> {
        let key = (0u8, a.to_bits(), b.to_bits(), i, 0);
        if let Some(&ind) = self.window_cache.get(&key) {
            return Ok(ind);
        }
        let eps_t = self.model.eps_t;
        let ind = self.time_pred(i, i + 1, b - a - eps_t, &format!("intersect.side[{a},{b},i={i}]"))?;
        self.window_cache.insert(key, ind);
        Ok(ind)
    }

    /// Does segment `j` lie in the window of segment `i`?
    ///
    /// * kind 1 (supremum, shrunk): `t_j <= t_i + b - eps_t`,
    ///   `t_{j+1} >= t_{i+1} + a + eps_t` and the side condition;
    /// * kind 2 (infimum, grown): `t_j <= t_{i+1} + b + eps_t`,
    ///   `t_{j+1} >= t_i + a - eps_t`;
    /// * kind 3 (until prefix, grown): `t_j <= t_{i+1} + b + eps_t`,
    ///   `t_{j+1} >= t_i - eps_t`.
    fn window(&mut self, kind: u8, a: f64, b: f64, i: usize, j: usize) -> Result<Ind, EncodeError> {
        let key = (kind, a.to_bits(), b.to_bits(), i, j);
        if let Some(&ind) = self.window_cache.get(&key) {
            return Ok(ind);
        }
        let eps_t = self.model.eps_t;
        let tag = format!("intersect[k={kind},{a},{b},i={i},j={j}]");
        let parts = match kind {
            1 => vec![
                self.time_pred(i, j, b - eps_t, &format!("{tag}.start"))?,
                self.time_pred(j + 1, i + 1, -a - eps_t, &format!("{tag}.end"))?,
                self.side_condition(a, b, i)?,
            ],
            2 => vec![
                self.time_pred(i + 1, j, b + eps_t, &format!("{tag}.start"))?,
                self.time_pred(j + 1, i, -a + eps_t, &format!("{tag}.end"))?,
            ],
            _ => vec![
                self.time_pred(i + 1, j, b + eps_t, &format!("{tag}.start"))?,
                self.time_pred(j + 1, i, eps_t, &format!("{tag}.end"))?,
            ],
        };
        let ind = self.conjunction(&parts, &tag)?;
        if let Ind::Var(v) = ind {
            if parts.iter().filter(|p| matches!(p, Ind::Var(_))).count() > 1 {
                self.intersections.push(v);
            }
        }
        self.window_cache.insert(key, ind);
        Ok(ind)
    }

    /// Sup (`Eventually`) or inf (`Always`) of `child` over the window of
    /// segment `i`, with the empty window giving `-S` or `+S`.
    pub fn encode_temporal(
        &mut self,
        op: TemporalOp,
        a: f64,
        b: f64,
        child: &[LinExpr],
        i: usize,
        tag: &str,
    ) -> Result<LinExpr, EncodeError> {
        let kind = match op {
            TemporalOp::Eventually => 1,
            TemporalOp::Always => 2,
        };
        let mut cands = Vec::new();
        for j in 0..child.len() {
            let ind = self.window(kind, a, b, i, j)?;
            if ind != Ind::Const(false) {
                cands.push((ind, child[j].clone()));
            }
        }
        self.select(op == TemporalOp::Eventually, &cands, tag)
    }

    /// Sup or inf of the candidate values whose indicator is set.
    fn select(&mut self, is_sup: bool, cands: &[(Ind, LinExpr)], tag: &str) -> Result<LinExpr, EncodeError> {
        if is_sup {
            return self.select_sup(cands, tag);
        }
        // inf v = -sup(-v)
        let negated: Vec<(Ind, LinExpr)> = cands.iter().map(|(ind, v)| (*ind, -v.clone())).collect();
        Ok(-self.select_sup(&negated, tag)?)
    }

    fn select_sup(&mut self, cands: &[(Ind, LinExpr)], tag: &str) -> Result<LinExpr, EncodeError> {
        let s = self.sentinel;
        if cands.is_empty() {
            return Ok(LinExpr::constant(-s));
        }
        let ranges: Vec<(f64, f64)> = cands.iter().map(|(_, v)| self.model.expr_bounds(v)).collect();
        let any_certain = cands.iter().any(|(ind, _)| *ind == Ind::Const(true));
        let hi = ranges.iter().map(|r| r.1).fold(-s, f64::max);
        let lo = cands
            .iter()
            .zip(&ranges)
            .filter(|((ind, _), _)| *ind == Ind::Const(true))
            .map(|(_, r)| r.0)
            .fold(-s, f64::max);
        let theta = self.model.add_continuous(format!("theta_star[{tag}]"), lo, hi);
        let mut sel_sum = LinExpr::zero();
        for (k, ((ind, val), (vlo, vhi))) in cands.iter().zip(&ranges).enumerate() {
            // Every window member bounds θ* from below.
            let slack = (LinExpr::constant(1.0) - ind.expr()) * (vhi - lo).max(0.0);
            self.model
                .constrain(theta, Sense::Ge, val.clone() - slack, format!("temporal_lb[{tag},j={k}]"));
            // The selected member bounds θ* from above.
            let bj = self.model.add_binary(format!("sel[{tag},j={k}]"));
            self.selectors.push(bj);
            let slack = LinExpr::not(bj) * (hi - vlo).max(0.0);
            self.model
                .constrain(theta, Sense::Le, val.clone() + slack, format!("temporal_ub[{tag},j={k}]"));
            self.model
                .constrain(bj, Sense::Le, ind.expr(), format!("selector.dom[{tag},j={k}]"));
            sel_sum += &LinExpr::var(bj);
        }
        if !any_certain {
            let none = self.model.add_binary(format!("sel_none[{tag}]"));
            self.selectors.push(none);
            sel_sum += &LinExpr::var(none);
            for (k, (ind, _)) in cands.iter().enumerate() {
                self.model.constrain(
                    none,
                    Sense::Le,
                    LinExpr::constant(1.0) - ind.expr(),
                    format!("selector.none[{tag},j={k}]"),
                );
            }
            let bound = LinExpr::constant(-s) + LinExpr::not(none) * (hi + s);
            self.model
                .constrain(theta, Sense::Le, bound, format!("temporal_ub[{tag},none]"));
        }
        self.model
            .constrain(sel_sum, Sense::Eq, 1.0, format!("selector.one[{tag}]"));
        Ok(LinExpr::var(theta))
    }

    /// `U[a,b]` at segment `i`: sup over `j` of
    /// `min(right_j, inf_{l <= j in prefix window} left_l)`.
    pub fn encode_until(
        &mut self,
        a: f64,
        b: f64,
        left: &[LinExpr],
        right: &[LinExpr],
        i: usize,
        tag: &str,
    ) -> Result<LinExpr, EncodeError> {
        let s = self.sentinel;
        let mut prefix = LinExpr::constant(s);
        let mut cands = Vec::new();
        for j in 0..right.len() {
            let member = self.window(3, a, b, i, j)?;
            let masked = match member {
                Ind::Const(false) => None,
                Ind::Const(true) => Some(left[j].clone()),
                Ind::Var(c) => {
                    let y = self.model.enc_product(
                        left[j].clone() - s,
                        LinExpr::var(c),
                        &format!("until_mask[{tag},l={j}]"),
                    )?;
                    Some(LinExpr::var(y) + s)
                }
            };
            if let Some(v) = masked {
                prefix = if prefix.is_constant() && prefix.constant_part() == s {
                    v
                } else {
                    LinExpr::var(self.model.enc_min(&[prefix, v], &format!("inf_sup.until_prefix[{tag},l={j}]"))?)
                };
            }
            let ind = self.window(1, a, b, i, j)?;
            if ind == Ind::Const(false) {
                continue;
            }
            let inner = if prefix.is_constant() && prefix.constant_part() == s {
                right[j].clone()
            } else {
                LinExpr::var(self.model.enc_min(
                    &[right[j].clone(), prefix.clone()],
                    &format!("inf_sup.until_pair[{tag},j={j}]"),
                )?)
            };
            cands.push((ind, inner));
        }
        self.select(true, &cands, tag)
    }

    /// Satisfaction counterpart of [`Encoder::encode_temporal`].
    fn qualitative_temporal(&mut self, op: TemporalOp, a: f64, b: f64, child: &[LinExpr], i: usize, tag: &str) -> Result<LinExpr, EncodeError> {
        let kind = if op == TemporalOp::Eventually { 1 } else { 2 };
        let mut terms = Vec::new();
        for j in 0..child.len() {
            let ind = self.window(kind, a, b, i, j)?;
            match (op, ind) {
                (_, Ind::Const(false)) => {}
                (TemporalOp::Eventually, _) => {
                    terms.push(self.and_exprs(&[ind.expr(), child[j].clone()], &format!("{tag},j={j}"))?)
                }
                (TemporalOp::Always, _) => {
                    let not_in = LinExpr::constant(1.0) - ind.expr();
                    terms.push(self.or_exprs(&[not_in, child[j].clone()], &format!("{tag},j={j}"))?)
                }
            }
        }
        match op {
            TemporalOp::Eventually => self.or_exprs(&terms, tag),
            TemporalOp::Always => self.and_exprs(&terms, tag),
        }
    }

    fn qualitative_until(&mut self, a: f64, b: f64, left: &[LinExpr], right: &[LinExpr], i: usize, tag: &str) -> Result<LinExpr, EncodeError> {
        let mut prefix = LinExpr::constant(1.0);
        let mut terms = Vec::new();
        for j in 0..right.len() {
            let member = self.window(3, a, b, i, j)?;
            if member != Ind::Const(false) {
                let ok = self.or_exprs(
                    &[LinExpr::constant(1.0) - member.expr(), left[j].clone()],
                    &format!("{tag},l={j}"),
                )?;
                prefix = self.and_exprs(&[prefix, ok], &format!("{tag},prefix={j}"))?;
            }
            let ind = self.window(1, a, b, i, j)?;
            if ind != Ind::Const(false) {
                terms.push(self.and_exprs(&[ind.expr(), right[j].clone(), prefix.clone()], &format!("{tag},j={j}"))?);
            }
        }
        self.or_exprs(&terms, tag)
    }

    /// Conjunction of 0/1 expressions, folding constants.
    fn and_exprs(&mut self, xs: &[LinExpr], tag: &str) -> Result<LinExpr, EncodeError> {
        let mut vars = Vec::new();
        for x in xs {
            if x.is_constant() {
                if x.constant_part() < 0.5 {
                    return Ok(LinExpr::zero());
                }
            } else {
                vars.push(x.clone());
            }
        }
        Ok(match vars.len() {
            0 => LinExpr::constant(1.0),
            1 => vars.pop().unwrap(),
            _ => LinExpr::var(self.model.enc_and(&vars, &format!("and[{tag}]"))?),
        })
    }

    fn or_exprs(&mut self, xs: &[LinExpr], tag: &str) -> Result<LinExpr, EncodeError> {
        let mut vars = Vec::new();
        for x in xs {
            if x.is_constant() {
                if x.constant_part() > 0.5 {
                    return Ok(LinExpr::constant(1.0));
                }
            } else {
                vars.push(x.clone());
            }
        }
        Ok(match vars.len() {
            0 => LinExpr::zero(),
            1 => vars.pop().unwrap(),
            _ => LinExpr::var(self.model.enc_or(&vars, &format!("or[{tag}]"))?),
        })
    }

    /// `-L1 length + λ θ_0` (or just `-L1 length`) as the objective.
    pub fn encode_objective(&mut self, kind: ObjectiveKind, lambda: f64, root: Option<&LinExpr>, ws: &Workspace) {
        let mut obj = LinExpr::zero();
        if kind == ObjectiveKind::PathLengthL1 {
            for i in 0..self.num_segments() {
                for a in 0..ws.dim() {
                    let u = self
                        .model
                        .add_continuous(format!("len[{i},{a}]"), 0.0, ws.upper[a] - ws.lower[a]);
                    let step = LinExpr::var(self.p[i + 1][a]) - self.p[i][a];
                    self.model
                        .constrain(u, Sense::Ge, step.clone(), format!("objective.abs_hi[{i},{a}]"));
                    self.model
                        .constrain(u, Sense::Ge, -step, format!("objective.abs_lo[{i},{a}]"));
                    obj.add_term(u, -1.0);
                }
            }
        }
        if let Some(r) = root {
            obj += &(r.clone() * lambda);
        }
        self.model.objective = obj;
    }
}

/// Which implication a one-sided time indicator enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Direction {
    /// `p = 1 ⇒ μ >= 0`.
    Holds,
    /// `p = 0 ⇒ μ <= -m_eps`.
    Fails,
}

/// One-sided encoding: every value is bounded above by the true value and the
/// optimizer pushes it up, which is enough because every operator is
/// monotone in its operands and atom robustness is monotone in the labels.
impl Encoder {
    fn one_sided_pred(&mut self, u: usize, v: usize, c: f64, dir: Direction, tag: &str) -> Result<Ind, EncodeError> {
        if let Some(known) = self.settled(u, v, c) {
            return Ok(Ind::Const(known));
        }
        let key = (u, v, c.to_bits());
        let entry = match self.one_sided.get(&key) {
            Some(&e) => e,
            None => {
                let b = self.model.add_binary(format!("b_{tag}"));
                self.intersections.push(b);
                (b, false, false)
            }
        };
        let (b, mut holds, mut fails) = entry;
        let mu = LinExpr::var(self.t[u]) - self.t[v] + c;
        let (lo, hi) = self.model.expr_bounds(&mu);
        match dir {
            Direction::Holds if !holds => {
                self.model
                    .constrain(mu, Sense::Ge, LinExpr::not(b) * lo.min(0.0), format!("{tag}.lo"));
                holds = true;
            }
            Direction::Fails if !fails => {
                let m_eps = self.model.m_eps;
                let up = hi.max(0.0) + m_eps;
                self.model
                    .constrain(mu, Sense::Le, LinExpr::term(b, up) - m_eps, format!("{tag}.hi"));
                fails = true;
            }
            _ => {}
        }
        self.one_sided.insert(key, (b, holds, fails));
        Ok(Ind::Var(b))
    }

    /// Indicators whose conjunction places segment `j` in the window of `i`,
    /// or `None` when `j` is structurally outside. Window kinds are those of
    /// [`Encoder::window`].
    fn window_preds(&mut self, kind: u8, a: f64, b: f64, i: usize, j: usize) -> Result<Option<Vec<VarId>>, EncodeError> {
        let eps_t = self.model.eps_t;
        let tag = format!("intersect[k={kind},{a},{b},i={i},j={j}]");
        let parts = match kind {
            1 => {
                let d = Direction::Holds;
                vec![
                    self.one_sided_pred(i, j, b - eps_t, d, &format!("{tag}.start"))?,
                    self.one_sided_pred(j + 1, i + 1, -a - eps_t, d, &format!("{tag}.end"))?,
                    self.one_sided_pred(i, i + 1, b - a - eps_t, d, &format!("intersect.side[{a},{b},i={i}]"))?,
                ]
            }
            2 => {
                let d = Direction::Fails;
                vec![
                    self.one_sided_pred(i + 1, j, b + eps_t, d, &format!("{tag}.start"))?,
                    self.one_sided_pred(j + 1, i, -a + eps_t, d, &format!("{tag}.end"))?,
                ]
            }
            _ => {
                let d = Direction::Fails;
                vec![
                    self.one_sided_pred(i + 1, j, b + eps_t, d, &format!("{tag}.start"))?,
                    self.one_sided_pred(j + 1, i, eps_t, d, &format!("{tag}.end"))?,
                ]
            }
        };
        if parts.contains(&Ind::Const(false)) {
            return Ok(None);
        }
        Ok(Some(
            parts
                .into_iter()
                .filter_map(|p| match p {
                    Ind::Var(v) => Some(v),
                    Ind::Const(_) => None,
                })
                .collect(),
        ))
    }

    /// Lower bound used for values in the one-sided encoding.
    fn floor_value(&self, qualitative: bool) -> f64 {
        if qualitative {
            0.0
        } else {
            -self.sentinel
        }
    }

    fn ceiling_value(&self, qualitative: bool) -> f64 {
        if qualitative {
            1.0
        } else {
            self.sentinel
        }
    }

    /// `v <= member` for every member whose indicators are all set.
    fn bounded_inf(&mut self, members: &[(Vec<VarId>, LinExpr)], qualitative: bool, tag: &str) -> Result<LinExpr, EncodeError> {
        let top = self.ceiling_value(qualitative);
        if members.is_empty() {
            return Ok(LinExpr::constant(top));
        }
        if members.len() == 1 && members[0].0.is_empty() {
            return Ok(members[0].1.clone());
        }
        let hi = members
            .iter()
            .filter(|(preds, _)| preds.is_empty())
            .map(|(_, v)| self.model.expr_bounds(v).1)
            .fold(top, f64::min);
        let floor = self.floor_value(qualitative);
        let v = self.model.add_continuous(format!("theta_star[{tag}]"), floor, hi.max(floor));
        for (k, (preds, val)) in members.iter().enumerate() {
            let m = (hi - self.model.expr_bounds(val).0).max(0.0);
            let mut rhs = val.clone();
            for &p in preds {
                rhs += &(LinExpr::not(p) * m);
            }
            self.model
                .constrain(v, Sense::Le, rhs, format!("temporal_ub[{tag},j={k}]"));
        }
        Ok(LinExpr::var(v))
    }

    /// `v <= c_j` for one chosen candidate `j` whose indicators are set, or
    /// the floor when none is chosen. Each candidate is a list of values that
    /// the chosen one bounds together, each with extra release indicators.
    fn bounded_sup(
        &mut self,
        cands: &[(Vec<VarId>, Vec<(LinExpr, Vec<VarId>)>)],
        qualitative: bool,
        tag: &str,
    ) -> Result<LinExpr, EncodeError> {
        let floor = self.floor_value(qualitative);
        if cands.is_empty() {
            return Ok(LinExpr::constant(floor));
        }
        if let [(preds, vals)] = cands {
            if let [(val, release)] = vals.as_slice() {
                if preds.is_empty() && release.is_empty() {
                    return Ok(val.clone());
                }
            }
        }
        let top = self.ceiling_value(qualitative);
        let hi = cands
            .iter()
            .map(|(_, vals)| {
                vals.iter()
                    .map(|(v, _)| self.model.expr_bounds(v).1)
                    .fold(top, f64::min)
            })
            .fold(floor, f64::max);
        let v = self.model.add_continuous(format!("theta_star[{tag}]"), floor, hi);
        let mut sel_sum = LinExpr::zero();
        for (j, (preds, vals)) in cands.iter().enumerate() {
            let s = self.model.add_binary(format!("sel[{tag},j={j}]"));
            self.selectors.push(s);
            for &p in preds {
                self.model
                    .constrain(s, Sense::Le, p, format!("selector.dom[{tag},j={j}]"));
            }
            for (k, (val, release)) in vals.iter().enumerate() {
                let m = (hi - self.model.expr_bounds(val).0).max(0.0);
                let mut rhs = val.clone() + LinExpr::not(s) * m;
                for &q in release {
                    rhs += &(LinExpr::not(q) * m);
                }
                self.model
                    .constrain(v, Sense::Le, rhs, format!("temporal_ub[{tag},j={j},k={k}]"));
            }
            sel_sum += &LinExpr::var(s);
        }
        self.model.constrain(
            v,
            Sense::Le,
            sel_sum.clone() * (hi - floor) + floor,
            format!("temporal_ub[{tag},none]"),
        );
        self.model
            .constrain(sel_sum, Sense::Le, 1.0, format!("selector.one[{tag}]"));
        Ok(LinExpr::var(v))
    }

    fn one_sided_temporal(
        &mut self,
        op: TemporalOp,
        a: f64,
        b: f64,
        child: &[LinExpr],
        i: usize,
        qualitative: bool,
        tag: &str,
    ) -> Result<LinExpr, EncodeError> {
        match op {
            TemporalOp::Always => {
                let mut members = Vec::new();
                for (j, val) in child.iter().enumerate() {
                    if let Some(preds) = self.window_preds(2, a, b, i, j)? {
                        members.push((preds, val.clone()));
                    }
                }
                self.bounded_inf(&members, qualitative, tag)
            }
            TemporalOp::Eventually => {
                let mut cands = Vec::new();
                for (j, val) in child.iter().enumerate() {
                    if let Some(preds) = self.window_preds(1, a, b, i, j)? {
                        cands.push((preds, vec![(val.clone(), Vec::new())]));
                    }
                }
                self.bounded_sup(&cands, qualitative, tag)
            }
        }
    }

    fn one_sided_until(
        &mut self,
        a: f64,
        b: f64,
        left: &[LinExpr],
        right: &[LinExpr],
        i: usize,
        qualitative: bool,
        tag: &str,
    ) -> Result<LinExpr, EncodeError> {
        let mut prefix: Vec<(LinExpr, Vec<VarId>)> = Vec::new();
        let mut cands = Vec::new();
        for j in 0..right.len() {
            if let Some(q) = self.window_preds(3, a, b, i, j)? {
                prefix.push((left[j].clone(), q));
            }
            if let Some(preds) = self.window_preds(1, a, b, i, j)? {
                let mut vals = vec![(right[j].clone(), Vec::new())];
                vals.extend(prefix.iter().cloned());
                cands.push((preds, vals));
            }
        }
        self.bounded_sup(&cands, qualitative, tag)
    }

    /// Atom robustness bounded above by its true value. `run_in[j]` is at
    /// most the duration of the run of set labels starting at `j`, and
    /// `run_out[j]` at least the duration of the run of cleared labels.
    fn one_sided_atom_robustness(&mut self, z: &[VarId], side: Side, tag: &str) -> Result<Vec<VarId>, EncodeError> {
        let n = z.len();
        let t_end = self.horizon;
        let rob_tag = match side {
            Side::Right => "right_time_rob",
            Side::Left => "left_time_rob",
        };
        let order: Vec<usize> = match side {
            Side::Right => (0..n).rev().collect(),
            Side::Left => (0..n).collect(),
        };
        let neighbour = |i: usize| -> Option<usize> {
            match side {
                Side::Right => (i + 1 < n).then_some(i + 1),
                Side::Left => i.checked_sub(1),
            }
        };
        let mut run_in: Vec<Option<VarId>> = vec![None; n];
        let mut run_out: Vec<Option<VarId>> = vec![None; n];
        let mut thetas = vec![VarId(0); n];
        for &i in &order {
            let (next_in, next_out) = match neighbour(i) {
                Some(k) => (LinExpr::var(run_in[k].unwrap()), LinExpr::var(run_out[k].unwrap())),
                None => (LinExpr::zero(), LinExpr::zero()),
            };
            let zi = LinExpr::var(z[i]);
            let inside = self.model.add_continuous(format!("t_aggre.one[{tag},i={i}]"), 0.0, t_end);
            self.model.constrain(
                inside,
                Sense::Le,
                next_in.clone() + self.dt(i),
                format!("t_aggre.one_run[{tag},i={i}]"),
            );
            self.model
                .constrain(inside, Sense::Le, zi.clone() * t_end, format!("t_aggre.one_gate[{tag},i={i}]"));
            let outside = self.model.add_continuous(format!("t_aggre.zero[{tag},i={i}]"), 0.0, t_end);
            self.model.constrain(
                outside,
                Sense::Ge,
                next_out.clone() + self.dt(i) - zi.clone() * t_end,
                format!("t_aggre.zero_run[{tag},i={i}]"),
            );
            run_in[i] = Some(inside);
            run_out[i] = Some(outside);
            let theta = self.model.add_continuous(format!("theta_atom[{tag},i={i}]"), -t_end, t_end);
            if next_in.is_constant() && next_out.is_constant() {
                self.model
                    .constrain(theta, Sense::Le, 0.0, format!("{rob_tag}[{tag},i={i}]"));
            } else {
                self.model.constrain(
                    theta,
                    Sense::Le,
                    next_in,
                    format!("{rob_tag}.in[{tag},i={i}]"),
                );
                self.model.constrain(
                    theta,
                    Sense::Le,
                    zi * t_end - next_out,
                    format!("{rob_tag}.out[{tag},i={i}]"),
                );
            }
            thetas[i] = theta;
        }
        Ok(thetas)
    }

    /// Labels that may only be set where the geometric label holds.
    fn one_sided_labels(&mut self, region: &ConvexRegion<f64>, positive: bool, eps: f64) -> Result<Vec<VarId>, EncodeError> {
        let key = (region.name.clone(), positive);
        if let Some(v) = self.labels.get(&key) {
            return Ok(v.clone());
        }
        let margin = eps + self.model.m_eps;
        let edge_margin = |enc: &Self, w: usize, e: usize| -> LinExpr {
            let row = &region.a[e];
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut ap = LinExpr::zero();
            for (a, &coef) in row.iter().enumerate() {
                ap.add_term(enc.p[w][a], coef / norm);
            }
            let h = region.h[e] / norm;
            if positive {
                LinExpr::constant(h) - ap - margin
            } else {
                ap - h - margin
            }
        };
        let name = &region.name;
        let mut out = Vec::new();
        for i in 0..self.num_segments() {
            let z = if positive {
                let z = self.model.add_binary(format!("label.in[{name},i={i}]"));
                for e in 0..region.num_edges() {
                    for w in [i, i + 1] {
                        let mu = edge_margin(self, w, e);
                        let lo = self.model.check_big_m(&mu, &format!("lin_pred.in[{name},w={w},e={e}]"))?.0;
                        if lo < 0.0 {
                            self.model.constrain(
                                mu,
                                Sense::Ge,
                                LinExpr::not(z) * lo,
                                format!("lin_pred.in[{name},i={i},w={w},e={e}]"),
                            );
                        }
                    }
                }
                z
            } else {
                let z = self.model.add_continuous(format!("label.out[{name},i={i}]"), 0.0, 1.0);
                let mut any = LinExpr::zero();
                for e in 0..region.num_edges() {
                    let o = self.model.add_binary(format!("label.out_edge[{name},i={i},e={e}]"));
                    for w in [i, i + 1] {
                        let mu = edge_margin(self, w, e);
                        let lo = self.model.check_big_m(&mu, &format!("lin_pred.out[{name},w={w},e={e}]"))?.0;
                        if lo < 0.0 {
                            self.model.constrain(
                                mu,
                                Sense::Ge,
                                LinExpr::not(o) * lo,
                                format!("lin_pred.out[{name},i={i},w={w},e={e}]"),
                            );
                        }
                    }
                    any += &LinExpr::var(o);
                }
                self.model
                    .constrain(z, Sense::Eq, any, format!("label.out[{name},i={i}]"));
                z
            };
            out.push(z);
        }
        self.labels.insert(key, out.clone());
        Ok(out)
    }
}

struct FormulaEncoder<'a> {
    enc: Encoder,
    prob: &'a SynthesisProblem,
    subs: Subformulas,
    memo: BTreeMap<(usize, usize), LinExpr>,
    qualitative: bool,
    one_sided: bool,
}

impl FormulaEncoder<'_> {
    fn literal_labels(&mut self, region: &str, positive: bool) -> Result<Vec<VarId>, EncodeError> {
        let r = self
            .prob
            .regions
            .get(region)
            .ok_or_else(|| EncodeError::UnboundAtom(region.to_string()))?
            .clone();
        if self.one_sided {
            self.enc.one_sided_labels(&r, positive, self.prob.workspace.epsilon)
        } else {
            self.enc.encode_labels(&r, positive, self.prob.workspace.epsilon)
        }
    }

    fn literal_theta(&mut self, region: &str, positive: bool) -> Result<Vec<VarId>, EncodeError> {
        let key = (region.to_string(), positive);
        if let Some(v) = self.enc.atom_theta.get(&key) {
            return Ok(v.clone());
        }
        let z = self.literal_labels(region, positive)?;
        let tag = format!("{}{region}", if positive { "" } else { "!" });
        let before = self.enc.model.num_vars();
        let thetas = if self.one_sided {
            self.enc.one_sided_atom_robustness(&z, self.prob.side, &tag)?
        } else {
            self.enc.encode_atom_robustness(&z, self.prob.side, &tag)?
        };
        let ones: Vec<VarId> = (before..self.enc.model.num_vars())
            .map(VarId)
            .filter(|v| self.enc.model.var(*v).name.contains("t_aggre.one["))
            .collect();
        let zeros: Vec<VarId> = (before..self.enc.model.num_vars())
            .map(VarId)
            .filter(|v| self.enc.model.var(*v).name.contains("t_aggre.zero["))
            .collect();
        self.enc.aggregators.insert(key.clone(), (ones, zeros));
        self.enc.atom_theta.insert(key, thetas.clone());
        Ok(thetas)
    }

    fn all_segments(&mut self, node: usize) -> Result<Vec<LinExpr>, EncodeError> {
        (0..self.enc.num_segments()).map(|j| self.value(node, j)).collect()
    }

    fn value(&mut self, node: usize, i: usize) -> Result<LinExpr, EncodeError> {
        if let Some(v) = self.memo.get(&(node, i)) {
            return Ok(v.clone());
        }
        let tag = format!("n{node},i={i}");
        let kind = self.subs.nodes[node].clone();
        let v = match kind {
            NodeKind::Atom { ref region } | NodeKind::NegAtom { ref region } if self.qualitative => {
                let positive = matches!(self.subs.nodes[node], NodeKind::Atom { .. });
                LinExpr::var(self.literal_labels(region.as_str(), positive)?[i])
            }
            NodeKind::Atom { region } => LinExpr::var(self.literal_theta(&region, true)?[i]),
            NodeKind::NegAtom { region } => LinExpr::var(self.literal_theta(&region, false)?[i]),
            NodeKind::And(cs) | NodeKind::Or(cs) => {
                let is_and = matches!(self.subs.nodes[node], NodeKind::And(_));
                let vals: Vec<LinExpr> = cs.iter().map(|&c| self.value(c, i)).collect::<Result<_, _>>()?;
                if self.one_sided {
                    let q = self.qualitative;
                    if is_and {
                        let members: Vec<_> = vals.into_iter().map(|v| (Vec::new(), v)).collect();
                        self.enc.bounded_inf(&members, q, &format!("and[{tag}]"))?
                    } else {
                        let cands: Vec<_> = vals.into_iter().map(|v| (Vec::new(), vec![(v, Vec::new())])).collect();
                        self.enc.bounded_sup(&cands, q, &format!("or[{tag}]"))?
                    }
                } else if self.qualitative {
                    if is_and {
                        self.enc.and_exprs(&vals, &tag)?
                    } else {
                        self.enc.or_exprs(&vals, &tag)?
                    }
                } else if is_and {
                    LinExpr::var(self.enc.model.enc_min(&vals, &format!("inf_sup.and[{tag}]"))?)
                } else {
                    LinExpr::var(self.enc.model.enc_max(&vals, &format!("inf_sup.or[{tag}]"))?)
                }
            }
            NodeKind::Always { a, b, child } | NodeKind::Eventually { a, b, child } => {
                let op = if matches!(self.subs.nodes[node], NodeKind::Always { .. }) {
                    TemporalOp::Always
                } else {
                    TemporalOp::Eventually
                };
                let vals = self.all_segments(child)?;
                if self.one_sided {
                    self.enc
                        .one_sided_temporal(op, a, b, &vals, i, self.qualitative, &tag)?
                } else if self.qualitative {
                    self.enc.qualitative_temporal(op, a, b, &vals, i, &tag)?
                } else {
                    self.enc.encode_temporal(op, a, b, &vals, i, &tag)?
                }
            }
            NodeKind::Until { a, b, left, right } => {
                let l = self.all_segments(left)?;
                let r = self.all_segments(right)?;
                if self.one_sided {
                    self.enc
                        .one_sided_until(a, b, &l, &r, i, self.qualitative, &tag)?
                } else if self.qualitative {
                    self.enc.qualitative_until(a, b, &l, &r, i, &tag)?
                } else {
                    self.enc.encode_until(a, b, &l, &r, i, &tag)?
                }
            }
        };
        self.memo.insert((node, i), v.clone());
        Ok(v)
    }
}

/// Encode the whole synthesis problem with the reduced (on-demand) path.
pub fn encode_mission(prob: &SynthesisProblem) -> Result<(MilpModel, EncodingArtifacts), EncodeError> {
    encode_mission_with(prob, EncodingMode::Reduced)
}

pub fn encode_mission_with(prob: &SynthesisProblem, mode: EncodingMode) -> Result<(MilpModel, EncodingArtifacts), EncodeError> {
    prob.validate()?;
    let subs = Subformulas::new(&prob.formula).map_err(|_| EncodeError::InvalidProblem("formula has unresolved intervals".into()))?;
    let mut enc = Encoder::new(prob.big_m(), prob.workspace.horizon);
    enc.model.m_eps = prob.m_eps;
    enc.model.eps_t = prob.eps_t;
    enc.encode_dynamics(
        prob.k,
        &prob.workspace,
        prob.v_b,
        prob.start.as_deref(),
        prob.goal.as_deref(),
    )?;
    let qualitative = prob.mode == SynthesisMode::Qualitative;
    let mut fe = FormulaEncoder {
        enc,
        prob,
        subs,
        memo: BTreeMap::new(),
        qualitative,
        one_sided: prob.formulation == Formulation::OneSided,
    };
    if mode == EncodingMode::Full {
        for node in 0..fe.subs.len() {
            fe.all_segments(node)?;
        }
    }
    let root_node = fe.subs.root();
    let root = fe.value(root_node, 0)?;
    let mut enc = fe.enc;
    if qualitative {
        enc.model
            .constrain(root.clone(), Sense::Ge, 1.0, "spec.satisfied");
        enc.encode_objective(prob.objective, prob.lambda, None, &prob.workspace);
    } else {
        enc.model
            .constrain(root.clone(), Sense::Ge, prob.theta_star, "spec.theta_star");
        enc.encode_objective(prob.objective, prob.lambda, Some(&root), &prob.workspace);
    }
    let counts = EncodingCounts {
        num_binary: enc.model.num_binary(),
        num_continuous: enc.model.num_continuous(),
        num_constraints: enc.model.num_constraints(),
    };
    let artifacts = EncodingArtifacts {
        t: enc.t.clone(),
        p: enc.p.clone(),
        labels: enc.labels.clone(),
        aggregators: enc.aggregators.clone(),
        theta: fe.memo,
        intersections: enc.intersections.clone(),
        selectors: enc.selectors.clone(),
        subformulas: fe.subs,
        root,
        counts,
    };
    Ok((enc.model, artifacts))
}

/// Pin the waypoint variables of an encoded model to a trajectory.
pub fn pin_trajectory(model: &mut MilpModel, art: &EncodingArtifacts, traj: &PwlTrajectory<f64>) {
    assert_eq!(traj.len(), art.t.len(), "waypoint count mismatch");
    for (i, w) in traj.waypoints().iter().enumerate() {
        model.fix(art.t[i], w.t);
        for (a, &x) in w.p.iter().enumerate() {
            model.fix(art.p[i][a], x);
        }
    }
}

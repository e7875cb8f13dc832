//! Solver-agnostic MILP model and the big-M gadgets used by the encoder.
//!
//! The objective is always maximized. Every constraint carries a tag naming
//! the construction that emitted it, e.g. `"t_aggre[i=3]"`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MilpError {
    #[error("big-M {big_m} too small for {tag}: expression can reach {reach}")]
    BigMTooSmall { tag: String, big_m: f64, reach: f64 },
    #[error("gadget {0} needs at least one operand")]
    EmptyOperands(&'static str),
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("invalid bounds [{lo}, {hi}] for variable {name}")]
    InvalidBounds { name: String, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
}

/// Sparse affine expression `Σ c_v x_v + constant`; zero coefficients are
/// never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinExpr {
    terms: BTreeMap<VarId, f64>,
    constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, 1.0)
    }

    pub fn term(v: VarId, c: f64) -> Self {
        let mut e = Self::zero();
        e.add_term(v, c);
        e
    }

    /// `1 - v`, the complement of a binary.
    pub fn not(v: VarId) -> Self {
        Self::constant(1.0) - Self::var(v)
    }

    pub fn add_term(&mut self, v: VarId, c: f64) {
        let entry = self.terms.entry(v).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&v);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.terms.iter().map(|(v, c)| (*v, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn coefficient(&self, v: VarId) -> f64 {
        self.terms.get(&v).copied().unwrap_or(0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, (v, c)| acc + c * values[v.0])
    }

    fn is_finite(&self) -> bool {
        self.constant.is_finite() && self.terms.values().all(|c| c.is_finite())
    }
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        LinExpr::var(v)
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl AddAssign<&LinExpr> for LinExpr {
    fn add_assign(&mut self, rhs: &LinExpr) {
        for (v, c) in rhs.terms() {
            self.add_term(v, c);
        }
        self.constant += rhs.constant;
    }
}

impl<R: Into<LinExpr>> Add<R> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: R) -> LinExpr {
        self += &rhs.into();
        self
    }
}

impl<R: Into<LinExpr>> Sub<R> for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: R) -> LinExpr {
        self += &(-rhs.into());
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, k: f64) -> LinExpr {
        if k == 0.0 {
            return LinExpr::zero();
        }
        LinExpr {
            terms: self.terms.into_iter().map(|(v, c)| (v, c * k)).collect(),
            constant: self.constant * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// `expr sense rhs` with the expression's constant already folded into `rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub expr: LinExpr,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: String,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.expr.eval(values)
    }

    /// Amount by which `values` violates the constraint (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let a = self.activity(values);
        match self.sense {
            Sense::Le => (a - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - a).max(0.0),
            Sense::Eq => (a - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimedOut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: SolveStatus,
    /// Indexed by [`VarId`]; binaries are rounded to exactly 0 or 1.
    pub values: Vec<f64>,
    pub objective: f64,
}

impl MilpSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.0]
    }

    pub fn has_assignment(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Feasible) && !self.values.is_empty()
    }
}

pub const DEFAULT_M_EPS: f64 = 1e-6;
pub const DEFAULT_EPS_T: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Maximized.
    pub objective: LinExpr,
    pub big_m: f64,
    pub m_eps: f64,
    pub eps_t: f64,
}

impl MilpModel {
    pub fn new(big_m: f64) -> Self {
        assert!(big_m > 0.0 && big_m.is_finite(), "big-M must be positive");
        Self {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: LinExpr::zero(),
            big_m,
            m_eps: DEFAULT_M_EPS,
            eps_t: DEFAULT_EPS_T,
        }
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            kind: VarKind::Binary,
            lo: 0.0,
            hi: 1.0,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lo: f64, hi: f64) -> VarId {
        let name = name.into();
        assert!(lo <= hi && !lo.is_nan() && !hi.is_nan(), "bad bounds for {name}: [{lo}, {hi}]");
        self.variables.push(Variable {
            name,
            kind: VarKind::Continuous,
            lo,
            hi,
        });
        VarId(self.variables.len() - 1)
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.variables[v.0]
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_binary(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn num_continuous(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Continuous).count()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Pin a variable to a value by collapsing its bounds.
    pub fn fix(&mut self, v: VarId, value: f64) {
        let var = &mut self.variables[v.0];
        var.lo = value;
        var.hi = value;
    }

    pub fn set_bounds(&mut self, v: VarId, lo: f64, hi: f64) -> Result<(), MilpError> {
        let var = &mut self.variables[v.0];
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(MilpError::InvalidBounds {
                name: var.name.clone(),
                lo,
                hi,
            });
        }
        var.lo = lo;
        var.hi = hi;
        Ok(())
    }

    /// Add `lhs sense rhs`.
    pub fn constrain(
        &mut self,
        lhs: impl Into<LinExpr>,
        sense: Sense,
        rhs: impl Into<LinExpr>,
        tag: impl Into<String>,
    ) {
        let mut expr = lhs.into() - rhs.into();
        let rhs = -expr.constant;
        expr.constant = 0.0;
        let tag = tag.into();
        assert!(expr.is_finite() && rhs.is_finite(), "non-finite constraint {tag}");
        self.constraints.push(Constraint { expr, sense, rhs, tag });
    }

    /// Interval bounds of `e` over the variable boxes.
    pub fn expr_bounds(&self, e: &LinExpr) -> (f64, f64) {
        let mut lo = e.constant;
        let mut hi = e.constant;
        for (v, c) in e.terms() {
            let var = &self.variables[v.0];
            if c > 0.0 {
                lo += c * var.lo;
                hi += c * var.hi;
            } else {
                lo += c * var.hi;
                hi += c * var.lo;
            }
        }
        (lo, hi)
    }

    pub(crate) fn check_big_m(&self, e: &LinExpr, tag: &str) -> Result<(f64, f64), MilpError> {
        let (lo, hi) = self.expr_bounds(e);
        let reach = lo.abs().max(hi.abs());
        if !(reach <= self.big_m) {
            return Err(MilpError::BigMTooSmall {
                tag: tag.to_string(),
                big_m: self.big_m,
                reach,
            });
        }
        Ok((lo, hi))
    }

    /// Sign indicator: `b = 1 ⇒ μ >= 0` and `b = 0 ⇒ μ <= -m_eps`.
    ///
    /// The switching constants are the bounds of `μ` over the variable boxes,
    /// which never exceed `M` in magnitude.
    pub fn enc_linear_predicate(&mut self, mu: LinExpr, tag: &str) -> Result<VarId, MilpError> {
        let (lo, hi) = self.check_big_m(&mu, tag)?;
        let b = self.add_binary(format!("b_{tag}"));
        // lo (1 - b) <= μ
        self.constrain(mu.clone(), Sense::Ge, LinExpr::not(b) * lo.min(0.0), format!("{tag}.lo"));
        // μ <= (hi + m_eps) b - m_eps
        let up = hi.max(0.0) + self.m_eps;
        self.constrain(mu, Sense::Le, LinExpr::term(b, up) - self.m_eps, format!("{tag}.hi"));
        Ok(b)
    }

    /// `b = b_1 ∧ ... ∧ b_m` for 0/1-valued operands.
    pub fn enc_and(&mut self, bs: &[LinExpr], tag: &str) -> Result<VarId, MilpError> {
        if bs.is_empty() {
            return Err(MilpError::EmptyOperands("and"));
        }
        let b = self.add_binary(format!("and_{tag}"));
        let mut sum = LinExpr::zero();
        for (k, bi) in bs.iter().enumerate() {
            self.constrain(b, Sense::Le, bi.clone(), format!("{tag}.le[{k}]"));
            sum += bi;
        }
        let m = bs.len() as f64;
        self.constrain(b, Sense::Ge, sum - (m - 1.0), format!("{tag}.ge"));
        Ok(b)
    }

    /// `b = b_1 ∨ ... ∨ b_m` for 0/1-valued operands.
    pub fn enc_or(&mut self, bs: &[LinExpr], tag: &str) -> Result<VarId, MilpError> {
        if bs.is_empty() {
            return Err(MilpError::EmptyOperands("or"));
        }
        let b = self.add_binary(format!("or_{tag}"));
        let mut sum = LinExpr::zero();
        for (k, bi) in bs.iter().enumerate() {
            self.constrain(b, Sense::Ge, bi.clone(), format!("{tag}.ge[{k}]"));
            sum += bi;
        }
        self.constrain(b, Sense::Le, sum, format!("{tag}.le"));
        Ok(b)
    }

    /// `θ = min_i θ_i` with one selector binary per operand.
    pub fn enc_min(&mut self, thetas: &[LinExpr], tag: &str) -> Result<VarId, MilpError> {
        self.enc_extremum(thetas, tag, true)
    }

    /// `θ = max_i θ_i` with one selector binary per operand.
    pub fn enc_max(&mut self, thetas: &[LinExpr], tag: &str) -> Result<VarId, MilpError> {
        self.enc_extremum(thetas, tag, false)
    }

    fn enc_extremum(&mut self, thetas: &[LinExpr], tag: &str, is_min: bool) -> Result<VarId, MilpError> {
        if thetas.is_empty() {
            return Err(MilpError::EmptyOperands(if is_min { "min" } else { "max" }));
        }
        let mut ranges = Vec::with_capacity(thetas.len());
        for th in thetas {
            ranges.push(self.check_big_m(th, tag)?);
        }
        let pick = if is_min { f64::min } else { f64::max };
        let lo = ranges.iter().map(|r| r.0).reduce(pick).unwrap();
        let hi = ranges.iter().map(|r| r.1).reduce(pick).unwrap();
        let kind = if is_min { "min" } else { "max" };
        let theta = self.add_continuous(format!("{kind}_{tag}"), lo, hi);
        if thetas.len() == 1 {
            self.constrain(theta, Sense::Eq, thetas[0].clone(), format!("{tag}.eq"));
            return Ok(theta);
        }
        let mut sel_sum = LinExpr::zero();
        for (k, th) in thetas.iter().enumerate() {
            // Largest gap between θ_k and θ when θ_k is not selected.
            let m = if is_min { ranges[k].1 - lo } else { hi - ranges[k].0 }.max(0.0);
            let b = self.add_binary(format!("sel_{tag}[{k}]"));
            sel_sum += &LinExpr::var(b);
            if is_min {
                // θ_k - (1 - b) M <= θ <= θ_k
                self.constrain(theta, Sense::Le, th.clone(), format!("{tag}.bound[{k}]"));
                self.constrain(
                    theta,
                    Sense::Ge,
                    th.clone() - LinExpr::not(b) * m,
                    format!("{tag}.select[{k}]"),
                );
            } else {
                self.constrain(theta, Sense::Ge, th.clone(), format!("{tag}.bound[{k}]"));
                self.constrain(
                    theta,
                    Sense::Le,
                    th.clone() + LinExpr::not(b) * m,
                    format!("{tag}.select[{k}]"),
                );
            }
        }
        self.constrain(sel_sum, Sense::Eq, 1.0, format!("{tag}.one"));
        Ok(theta)
    }

    /// `y = x · b` for a 0/1-valued `b`, as the four McCormick inequalities
    /// over the bounds `[lo, hi]` of `x`.
    pub fn enc_product(&mut self, x: LinExpr, b: LinExpr, tag: &str) -> Result<VarId, MilpError> {
        let (lo, hi) = self.check_big_m(&x, tag)?;
        let y = self.add_continuous(format!("prod_{tag}"), lo.min(0.0), hi.max(0.0));
        let not_b = LinExpr::constant(1.0) - b.clone();
        self.constrain(y, Sense::Ge, b.clone() * lo, format!("{tag}.zero_lo"));
        self.constrain(y, Sense::Le, b * hi, format!("{tag}.zero_hi"));
        self.constrain(y, Sense::Ge, x.clone() - not_b.clone() * hi, format!("{tag}.copy_lo"));
        self.constrain(y, Sense::Le, x - not_b * lo, format!("{tag}.copy_hi"));
        Ok(y)
    }

    /// Constraints and variable bounds violated by `values` beyond `tol`.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (k, var) in self.variables.iter().enumerate() {
            let x = values[k];
            if x < var.lo - tol || x > var.hi + tol {
                out.push(format!("bound of {} ({x} not in [{}, {}])", var.name, var.lo, var.hi));
            }
            if var.kind == VarKind::Binary && (x - x.round()).abs() > tol {
                out.push(format!("integrality of {} ({x})", var.name));
            }
        }
        for c in &self.constraints {
            let v = c.violation(values);
            if v > tol {
                out.push(format!("{} violated by {v}", c.tag));
            }
        }
        out
    }

    /// Tag prefixes (text before the first `[` or `.`) with their counts.
    pub fn tag_census(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for c in &self.constraints {
            let end = c.tag.find(['[', '.']).unwrap_or(c.tag.len());
            *out.entry(c.tag[..end].to_string()).or_insert(0) += 1;
        }
        out
    }

    /// Every variable referenced by a constraint or the objective exists.
    pub fn is_well_formed(&self) -> bool {
        let n = self.variables.len();
        self.constraints
            .iter()
            .flat_map(|c| c.expr.terms())
            .chain(self.objective.terms())
            .all(|(v, _)| v.0 < n)
            && self.constraints.iter().all(|c| !c.tag.is_empty())
    }
}

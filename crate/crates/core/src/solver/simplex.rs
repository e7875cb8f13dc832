//! Dense bounded-variable dual simplex over the LP relaxation of a
//! [`MilpModel`].
//!
//! Each row `r` of the model becomes `a_r · x - s_r = 0` with a boxed slack
//! `s_r`. Every column is boxed (infinite bounds get a large artificial box),
//! so placing each nonbasic column at the bound matching the sign of its
//! reduced cost always yields a dual-feasible start. The tableau depends
//! only on the basis, never on the bounds, so one relaxation is reused for
//! every branch-and-bound node: a node just installs its bounds and resumes
//! dual simplex from the previous basis.

use crate::milp::{MilpModel, Sense};

/// Magnitude of the box given to variables with infinite bounds.
pub const ARTIFICIAL_BOUND: f64 = 1e7;
const PIVOT_TOL: f64 = 1e-7;
/// Base magnitude of the cost perturbation that breaks dual degeneracy.
const PERTURBATION: f64 = 1e-6;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const RECOMPUTE_EVERY: usize = 32;
const STALL_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    /// The objective bound dropped below the cutoff before optimality.
    Cutoff,
    /// The optimum sits on an artificial bound of an unbounded variable.
    Unbounded,
    /// Iteration limit or loss of accuracy.
    Numerical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Objective value (an upper bound when `status` is `Cutoff`).
    pub value: f64,
    /// Values of the model variables, indexed like `MilpModel::variables`.
    pub point: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pos {
    Basic,
    Lower,
    Upper,
}

#[derive(Debug, Clone)]
pub struct LpRelaxation {
    num_model_vars: usize,
    /// Column of each model variable, `None` when fixed at the root.
    col_of: Vec<Option<usize>>,
    fixed_value: Vec<f64>,
    var_of_col: Vec<usize>,
    num_struct: usize,
    num_rows: usize,
    num_cols: usize,
    /// Sparse rows over structural columns, for refactoring and residuals.
    rows: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    /// Costs the simplex currently works with (perturbed or original).
    active_cost: Vec<f64>,
    obj_const: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
    artificial_lo: Vec<bool>,
    artificial_hi: Vec<bool>,
    /// A row with no free columns that the fixed columns already violate.
    trivially_infeasible: bool,
    tab: Vec<f64>,
    basic: Vec<usize>,
    pos: Vec<Pos>,
    x: Vec<f64>,
    d: Vec<f64>,
    pub max_iterations: usize,
}

impl LpRelaxation {
    /// Build the relaxation from the model's own bounds. Variables fixed in
    /// the model and rows left empty by their removal are presolved away.
    pub fn new(model: &MilpModel) -> Self {
        let nv = model.num_vars();
        let mut col_of = vec![None; nv];
        let mut fixed_value = vec![0.0; nv];
        let mut var_of_col = Vec::new();
        for (k, v) in model.variables.iter().enumerate() {
            if v.lo == v.hi {
                fixed_value[k] = v.lo;
            } else {
                col_of[k] = Some(var_of_col.len());
                var_of_col.push(k);
            }
        }
        let ns = var_of_col.len();
        let mut rows = Vec::new();
        let mut slack_lo = Vec::new();
        let mut slack_hi = Vec::new();
        let mut trivially_infeasible = false;
        for c in &model.constraints {
            let mut row = Vec::new();
            let mut shift = 0.0;
            let (mut act_lo, mut act_hi) = (0.0, 0.0);
            for (v, a) in c.expr.terms() {
                match col_of[v.0] {
                    Some(col) => {
                        row.push((col, a));
                        let var = &model.variables[v.0];
                        let (l, h) = (
                            clamp_artificial(var.lo),
                            clamp_artificial(var.hi),
                        );
                        if a > 0.0 {
                            act_lo += a * l;
                            act_hi += a * h;
                        } else {
                            act_lo += a * h;
                            act_hi += a * l;
                        }
                    }
                    None => shift += a * fixed_value[v.0],
                }
            }
            let rhs = c.rhs - shift;
            if row.is_empty() {
                let tol = 1e-9 * (1.0 + rhs.abs());
                let ok = match c.sense {
                    Sense::Le => 0.0 <= rhs + tol,
                    Sense::Ge => 0.0 >= rhs - tol,
                    Sense::Eq => rhs.abs() <= tol,
                };
                trivially_infeasible |= !ok;
                continue;
            }
            let (l, h) = match c.sense {
                Sense::Le => (act_lo.min(rhs), rhs),
                Sense::Ge => (rhs, act_hi.max(rhs)),
                Sense::Eq => (rhs, rhs),
            };
            rows.push(row);
            slack_lo.push(l);
            slack_hi.push(h);
        }
        let m = rows.len();
        let n = ns + m;
        let mut tab = vec![0.0; m * n];
        for (r, row) in rows.iter().enumerate() {
            for &(col, a) in row {
                tab[r * n + col] = -a;
            }
            tab[r * n + ns + r] = 1.0;
        }
        let mut cost = vec![0.0; n];
        for (v, c) in model.objective.terms() {
            if let Some(col) = col_of[v.0] {
                cost[col] = c;
            }
        }
        let obj_const = model.objective.constant_part()
            + model
                .objective
                .terms()
                .filter(|(v, _)| col_of[v.0].is_none())
                .map(|(v, c)| c * fixed_value[v.0])
                .sum::<f64>();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        lo[ns..].copy_from_slice(&slack_lo);
        hi[ns..].copy_from_slice(&slack_hi);
        let mut pos = vec![Pos::Lower; n];
        let basic: Vec<usize> = (ns..n).collect();
        for &b in &basic {
            pos[b] = Pos::Basic;
        }
        let mut relax = Self {
            num_model_vars: nv,
            col_of,
            fixed_value,
            var_of_col,
            num_struct: ns,
            num_rows: m,
            num_cols: n,
            rows,
            d: cost.clone(),
            active_cost: cost.clone(),
            cost,
            obj_const,
            lo,
            hi,
            artificial_lo: vec![false; n],
            artificial_hi: vec![false; n],
            trivially_infeasible,
            tab,
            basic,
            pos,
            x: vec![0.0; n],
            max_iterations: 200_000,
        };
        let lo_m: Vec<f64> = model.variables.iter().map(|v| v.lo).collect();
        let hi_m: Vec<f64> = model.variables.iter().map(|v| v.hi).collect();
        relax.set_bounds(&lo_m, &hi_m);
        relax
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_columns(&self) -> usize {
        self.num_cols
    }

    /// Whether model variable `v` was presolved away.
    pub fn is_fixed(&self, v: usize) -> bool {
        self.col_of[v].is_none()
    }

    fn set_bounds(&mut self, lo: &[f64], hi: &[f64]) {
        for col in 0..self.num_struct {
            let v = self.var_of_col[col];
            self.artificial_lo[col] = lo[v] < -ARTIFICIAL_BOUND;
            self.artificial_hi[col] = hi[v] > ARTIFICIAL_BOUND;
            self.lo[col] = clamp_artificial(lo[v]);
            self.hi[col] = clamp_artificial(hi[v]);
        }
    }

    #[inline]
    fn row(&self, r: usize) -> &[f64] {
        &self.tab[r * self.num_cols..(r + 1) * self.num_cols]
    }

    /// Place nonbasic columns on the bound matching their reduced cost and
    /// recompute the basic values.
    fn prepare(&mut self) {
        for j in 0..self.num_cols {
            match self.pos[j] {
                Pos::Basic => continue,
                _ if self.lo[j] == self.hi[j] => self.pos[j] = Pos::Lower,
                _ if self.d[j] > DUAL_TOL => self.pos[j] = Pos::Upper,
                _ if self.d[j] < -DUAL_TOL => self.pos[j] = Pos::Lower,
                _ => {}
            }
            self.x[j] = if self.pos[j] == Pos::Upper { self.hi[j] } else { self.lo[j] };
        }
        self.recompute_basic();
    }

    fn recompute_basic(&mut self) {
        let n = self.num_cols;
        for r in 0..self.num_rows {
            let row = &self.tab[r * n..(r + 1) * n];
            let mut v = 0.0;
            for j in 0..n {
                if self.pos[j] != Pos::Basic && row[j] != 0.0 && self.x[j] != 0.0 {
                    v -= row[j] * self.x[j];
                }
            }
            let b = self.basic[r];
            self.x[b] = v;
        }
    }

    fn recompute_reduced_costs(&mut self) {
        let n = self.num_cols;
        self.d.copy_from_slice(&self.active_cost);
        for r in 0..self.num_rows {
            let cb = self.active_cost[self.basic[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.tab[r * n..(r + 1) * n];
            for j in 0..n {
                self.d[j] -= cb * row[j];
            }
        }
        for &b in &self.basic {
            self.d[b] = 0.0;
        }
    }

    fn objective(&self) -> f64 {
        self.obj_const
            + (0..self.num_cols)
                .map(|j| self.active_cost[j] * self.x[j])
                .sum::<f64>()
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.num_cols;
        let piv = self.tab[r * n + q];
        {
            let row = &mut self.tab[r * n..(r + 1) * n];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let nz: Vec<usize> = (0..n).filter(|&j| self.tab[r * n + j] != 0.0).collect();
        let prow: Vec<f64> = nz.iter().map(|&j| self.tab[r * n + j]).collect();
        for i in 0..self.num_rows {
            if i == r {
                continue;
            }
            let f = self.tab[i * n + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * n..(i + 1) * n];
            for (&j, &a) in nz.iter().zip(&prow) {
                row[j] -= f * a;
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for (&j, &a) in nz.iter().zip(&prow) {
                self.d[j] -= f * a;
            }
        }
        self.d[q] = 0.0;
        let leaving = self.basic[r];
        self.basic[r] = q;
        self.pos[q] = Pos::Basic;
        debug_assert!(self.pos[leaving] == Pos::Basic);
    }

    /// Rebuild the tableau for the current basis from the original rows.
    fn refactor(&mut self) {
        let (m, n, ns) = (self.num_rows, self.num_cols, self.num_struct);
        let wanted: Vec<usize> = self.basic.clone();
        self.tab.iter_mut().for_each(|v| *v = 0.0);
        for (r, row) in self.rows.iter().enumerate() {
            for &(col, a) in row {
                self.tab[r * n + col] = -a;
            }
            self.tab[r * n + ns + r] = 1.0;
        }
        for j in 0..n {
            if self.pos[j] == Pos::Basic {
                self.pos[j] = Pos::Lower;
            }
        }
        self.basic = (ns..n).collect();
        for &b in &self.basic {
            self.pos[b] = Pos::Basic;
        }
        let keep: Vec<bool> = {
            let mut k = vec![false; n];
            for &w in &wanted {
                k[w] = true;
            }
            k
        };
        for &q in wanted.iter().filter(|&&q| q < ns) {
            let mut best: Option<(usize, f64)> = None;
            for r in 0..m {
                let b = self.basic[r];
                if b < ns || keep[b] {
                    continue;
                }
                let a = self.tab[r * n + q].abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, ba)| a > ba) {
                    best = Some((r, a));
                }
            }
            if let Some((r, _)) = best {
                let leaving = self.basic[r];
                self.pivot(r, q);
                self.pos[leaving] = Pos::Lower;
            }
        }
        self.recompute_reduced_costs();
    }

    /// Solve with the model's own bounds.
    pub fn solve_root(&mut self, model: &MilpModel) -> LpResult {
        let lo: Vec<f64> = model.variables.iter().map(|v| v.lo).collect();
        let hi: Vec<f64> = model.variables.iter().map(|v| v.hi).collect();
        self.solve(&lo, &hi, None)
    }

    /// Solve under the given bounds (indexed by model variable), stopping
    /// early once the objective bound falls to `cutoff` or below.
    pub fn solve(&mut self, lo: &[f64], hi: &[f64], cutoff: Option<f64>) -> LpResult {
        assert_eq!(lo.len(), self.num_model_vars);
        let conflict = (0..self.num_model_vars).any(|v| {
            lo[v] > hi[v]
                || (self.col_of[v].is_none() && (self.fixed_value[v] < lo[v] || self.fixed_value[v] > hi[v]))
        });
        if self.trivially_infeasible || conflict {
            return self.result(LpStatus::Infeasible, f64::NEG_INFINITY, 0);
        }
        self.set_bounds(lo, hi);
        let mut iterations = 0;
        // Solve a perturbed problem first, then restore the true costs and
        // let the dual simplex repair the (few) bound positions that change.
        self.perturb_costs();
        self.recompute_reduced_costs();
        self.prepare();
        let first = self.dual_simplex(None, &mut iterations);
        self.active_cost.copy_from_slice(&self.cost);
        self.recompute_reduced_costs();
        if first == LpStatus::Numerical {
            self.refactor();
        }
        let mut refactors = 0;
        self.prepare();
        loop {
            let status = self.dual_simplex(cutoff, &mut iterations);
            if status == LpStatus::Optimal || status == LpStatus::Infeasible {
                let residual = self.residual();
                if residual > 1e-9 && refactors < 2 {
                    refactors += 1;
                    self.refactor();
                    self.prepare();
                    continue;
                }
            }
            let status = if status == LpStatus::Optimal && self.on_artificial_bound() {
                LpStatus::Unbounded
            } else {
                status
            };
            let value = match status {
                LpStatus::Infeasible => f64::NEG_INFINITY,
                _ => self.objective(),
            };
            return self.result(status, value, iterations);
        }
    }

    /// Shift every cost by a small deterministic amount that strengthens
    /// the current dual feasibility of its column.
    fn perturb_costs(&mut self) {
        for j in 0..self.num_cols {
            let h = (splitmix(j as u64) >> 11) as f64 / (1u64 << 53) as f64;
            let mag = PERTURBATION * (1.0 + self.cost[j].abs()) * (1.0 + h);
            let dir = match self.pos[j] {
                Pos::Lower => -1.0,
                Pos::Upper => 1.0,
                Pos::Basic => {
                    if splitmix(j as u64 ^ 0x9e37) & 1 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            self.active_cost[j] = self.cost[j] + dir * mag;
        }
    }

    fn result(&self, status: LpStatus, value: f64, iterations: usize) -> LpResult {
        let point = (0..self.num_model_vars)
            .map(|v| match self.col_of[v] {
                Some(col) => self.x[col],
                None => self.fixed_value[v],
            })
            .collect();
        LpResult {
            status,
            value,
            point,
            iterations,
        }
    }

    fn on_artificial_bound(&self) -> bool {
        (0..self.num_struct).any(|j| {
            self.pos[j] != Pos::Basic
                && self.d[j].abs() > DUAL_TOL
                && ((self.pos[j] == Pos::Lower && self.artificial_lo[j])
                    || (self.pos[j] == Pos::Upper && self.artificial_hi[j]))
        })
    }

    /// Largest `|a_r · x - s_r|` relative to the row scale.
    fn residual(&self) -> f64 {
        let ns = self.num_struct;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let mut act = 0.0;
                let mut scale = 1.0f64;
                for &(col, a) in row {
                    act += a * self.x[col];
                    scale = scale.max((a * self.x[col]).abs());
                }
                (act - self.x[ns + r]).abs() / scale
            })
            .fold(0.0, f64::max)
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        let tol = PRIMAL_TOL * (1.0 + v.abs());
        if v < self.lo[j] - tol {
            self.lo[j] - v
        } else if v > self.hi[j] + tol {
            v - self.hi[j]
        } else {
            0.0
        }
    }

    fn dual_simplex(&mut self, cutoff: Option<f64>, iterations: &mut usize) -> LpStatus {
        let n = self.num_cols;
        let mut stall = 0usize;
        let mut last_obj = f64::INFINITY;
        let mut since_recompute = 0usize;
        loop {
            // Leaving row.
            let bland = stall > STALL_LIMIT;
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.num_rows {
                let inf = self.infeasibility(self.basic[r]);
                if inf <= 0.0 {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((br, bi)) => {
                        if bland {
                            self.basic[r] < self.basic[br]
                        } else {
                            inf > bi
                        }
                    }
                };
                if better {
                    leave = Some((r, inf));
                }
            }
            let Some((r, _)) = leave else {
                if since_recompute > 0 {
                    self.recompute_basic();
                    since_recompute = 0;
                    continue;
                }
                return LpStatus::Optimal;
            };
            let obj = self.objective();
            if let Some(c) = cutoff {
                if obj <= c {
                    return LpStatus::Cutoff;
                }
            }
            if obj < last_obj - 1e-12 * (1.0 + obj.abs()) {
                stall = 0;
                last_obj = obj;
            } else {
                stall += 1;
            }
            *iterations += 1;
            if *iterations > self.max_iterations {
                return LpStatus::Numerical;
            }
            let b = self.basic[r];
            let to_lower = self.x[b] < self.lo[b];
            let target = if to_lower { self.lo[b] } else { self.hi[b] };
            // Entering column: Harris two-pass ratio test on reduced costs.
            // Reduced costs of the wrong sign (rounding noise) count as zero.
            let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
            let mut bound = f64::INFINITY;
            {
                let row = self.row(r);
                for j in 0..n {
                    let p = self.pos[j];
                    if p == Pos::Basic || self.lo[j] == self.hi[j] {
                        continue;
                    }
                    let a = row[j];
                    if a.abs() <= PIVOT_TOL {
                        continue;
                    }
                    // x_b moves by -a per unit increase of x_j.
                    let eligible = match (to_lower, p) {
                        (true, Pos::Lower) => a < 0.0,
                        (true, Pos::Upper) => a > 0.0,
                        (false, Pos::Lower) => a > 0.0,
                        (false, Pos::Upper) => a < 0.0,
                        _ => false,
                    };
                    if !eligible {
                        continue;
                    }
                    let slack = match p {
                        Pos::Lower => -self.d[j],
                        _ => self.d[j],
                    }
                    .max(0.0);
                    bound = bound.min((slack + DUAL_TOL) / a.abs());
                    candidates.push((j, slack / a.abs(), a.abs()));
                }
            }
            let max_a = candidates
                .iter()
                .filter(|c| c.1 <= bound)
                .map(|c| c.2)
                .fold(0.0, f64::max);
            let mut enter: Option<(usize, f64, f64)> = None;
            for &(j, ratio, a) in &candidates {
                if ratio > bound || (bland && a < 0.1 * max_a) {
                    continue;
                }
                let better = match enter {
                    None => true,
                    Some((_, _, ba)) => !bland && a > ba,
                };
                if better {
                    enter = Some((j, ratio, a));
                }
            }
            let Some((q, _, _)) = enter else {
                if since_recompute > 0 {
                    self.recompute_basic();
                    since_recompute = 0;
                    continue;
                }
                return LpStatus::Infeasible;
            };
            // Primal step: move x_q so that x_b lands on its bound.
            let alpha = self.tab[r * n + q];
            let step = (self.x[b] - target) / alpha;
            self.x[q] += step;
            for i in 0..self.num_rows {
                let a = self.tab[i * n + q];
                if a != 0.0 {
                    let bi = self.basic[i];
                    self.x[bi] -= a * step;
                }
            }
            self.x[b] = target;
            self.pivot(r, q);
            self.pos[b] = if to_lower { Pos::Lower } else { Pos::Upper };
            since_recompute += 1;
            if since_recompute >= RECOMPUTE_EVERY {
                self.recompute_basic();
                since_recompute = 0;
            }
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn clamp_artificial(v: f64) -> f64 {
    v.clamp(-ARTIFICIAL_BOUND, ARTIFICIAL_BOUND)
}

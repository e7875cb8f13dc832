//! Deterministic branch-and-bound over the dual-simplex relaxation, plus LP
//! file export and solution import for external solvers.
//!
//! Nodes are explored best-bound first (ties by lowest node id) and branch on
//! the most fractional binary (ties by lowest variable id). Every returned
//! assignment is re-verified against the model.

mod lp_format;
mod simplex;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::milp::{MilpModel, MilpSolution, SolveStatus, VarKind};

pub use lp_format::{export_lp, import_solution, sanitize_name, write_solution, ImportError, ImportedSolution};
pub use simplex::{LpRelaxation, LpResult, LpStatus, ARTIFICIAL_BOUND};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("LP relaxation is unbounded")]
    ModelUnbounded,
    #[error("model has {count} binaries, above the built-in solver cap of {cap}; export it with `trstl encode --out` instead")]
    TooManyBinaries { count: usize, cap: usize },
    #[error("model references unregistered variables or has untagged constraints")]
    MalformedModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub time_limit: Duration,
    pub abs_gap: f64,
    pub node_limit: usize,
    pub int_tol: f64,
    /// Tolerance of the final verification pass.
    pub feas_tol: f64,
    pub max_binaries: Option<usize>,
}

pub const DEFAULT_MAX_BINARIES: usize = 400;

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            time_limit: Duration::from_secs(600),
            abs_gap: 1e-6,
            node_limit: 1_000_000,
            int_tol: 1e-6,
            feas_tol: 1e-7,
            max_binaries: Some(DEFAULT_MAX_BINARIES),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: usize,
    pub lp_iterations: usize,
    /// Global upper bound after each processed node.
    pub bound_trace: Vec<f64>,
    pub elapsed: Duration,
}

/// Solve the LP relaxation with the model's own bounds.
pub fn lp_relax_solve(model: &MilpModel) -> LpResult {
    LpRelaxation::new(model).solve_root(model)
}

#[derive(Debug, Clone)]
struct Node {
    id: usize,
    bound: f64,
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

pub fn solve(model: &MilpModel, cfg: &SolverConfig) -> Result<MilpSolution, SolverError> {
    solve_with_stats(model, cfg).map(|(s, _)| s)
}

pub fn solve_with_stats(model: &MilpModel, cfg: &SolverConfig) -> Result<(MilpSolution, SolveStats), SolverError> {
    if !model.is_well_formed() {
        return Err(SolverError::MalformedModel);
    }
    let binaries: Vec<usize> = (0..model.num_vars())
        .filter(|&k| model.variables[k].kind == VarKind::Binary)
        .collect();
    if let Some(cap) = cfg.max_binaries {
        if binaries.len() > cap {
            return Err(SolverError::TooManyBinaries {
                count: binaries.len(),
                cap,
            });
        }
    }
    let start = Instant::now();
    let base_lo: Vec<f64> = model.variables.iter().map(|v| v.lo).collect();
    let base_hi: Vec<f64> = model.variables.iter().map(|v| v.hi).collect();
    let mut relax = LpRelaxation::new(model);
    let mut stats = SolveStats::default();
    let mut heap = BinaryHeap::new();
    let mut next_id = 0usize;
    heap.push(Node {
        id: next_id,
        bound: f64::INFINITY,
        fixings: Vec::new(),
    });
    next_id += 1;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut global_bound = f64::INFINITY;
    let mut limited = false;
    let mut lo = base_lo.clone();
    let mut hi = base_hi.clone();

    while let Some(node) = heap.pop() {
        let best = incumbent.as_ref().map(|(v, _)| *v);
        if let Some(b) = best {
            if node.bound <= b + cfg.abs_gap {
                heap.clear();
                break;
            }
        }
        if stats.nodes >= cfg.node_limit || start.elapsed() > cfg.time_limit {
            heap.push(node);
            limited = true;
            break;
        }
        stats.nodes += 1;
        lo.copy_from_slice(&base_lo);
        hi.copy_from_slice(&base_hi);
        for &(v, val) in &node.fixings {
            lo[v] = val;
            hi[v] = val;
        }
        let cutoff = best.map(|b| b + cfg.abs_gap);
        let res = relax.solve(&lo, &hi, cutoff);
        stats.lp_iterations += res.iterations;
        match res.status {
            LpStatus::Infeasible | LpStatus::Cutoff => {}
            LpStatus::Unbounded => return Err(SolverError::ModelUnbounded),
            LpStatus::Optimal | LpStatus::Numerical => {
                let numerical = res.status == LpStatus::Numerical;
                let value = if numerical { node.bound } else { res.value.min(node.bound) };
                let frac = if numerical {
                    // No trustworthy point: branch on the first free binary.
                    binaries.iter().copied().find(|&v| lo[v] != hi[v]).map(|v| (v, 0.5))
                } else {
                    most_fractional(&binaries, &res.point, cfg.int_tol)
                };
                match frac {
                    None if !numerical => {
                        if let Some((obj, point)) = polish(model, &mut relax, &res.point, &binaries, &lo, &hi, cfg) {
                            stats.lp_iterations += 0;
                            if incumbent.as_ref().is_none_or(|(b, _)| obj > *b) {
                                incumbent = Some((obj, point));
                            }
                        }
                    }
                    None => {}
                    Some((v, x)) => {
                        let first = if x >= 0.5 { 1.0 } else { 0.0 };
                        for val in [first, 1.0 - first] {
                            let mut fixings = node.fixings.clone();
                            fixings.push((v, val));
                            heap.push(Node {
                                id: next_id,
                                bound: value,
                                fixings,
                            });
                            next_id += 1;
                        }
                    }
                }
            }
        }
        let open = heap.peek().map_or(f64::NEG_INFINITY, |n| n.bound);
        let inc = incumbent.as_ref().map_or(f64::NEG_INFINITY, |(v, _)| *v);
        global_bound = global_bound.min(open.max(inc));
        stats.bound_trace.push(global_bound);
    }
    stats.elapsed = start.elapsed();
    let status = match (&incumbent, limited) {
        (Some(_), false) => SolveStatus::Optimal,
        (Some(_), true) => SolveStatus::Feasible,
        (None, false) => SolveStatus::Infeasible,
        (None, true) => SolveStatus::TimedOut,
    };
    let (objective, values) = match incumbent {
        Some((v, p)) => (v, p),
        None => (f64::NEG_INFINITY, Vec::new()),
    };
    log::debug!(
        "branch-and-bound: {} nodes, {} LP iterations, {:?}",
        stats.nodes,
        stats.lp_iterations,
        stats.elapsed
    );
    Ok((
        MilpSolution {
            status,
            values,
            objective,
        },
        stats,
    ))
}

fn most_fractional(binaries: &[usize], point: &[f64], tol: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for &v in binaries {
        let x = point[v];
        let dist = (x - x.round()).abs();
        if dist <= tol {
            continue;
        }
        if best.is_none_or(|(_, _, bd)| dist > bd) {
            best = Some((v, x, dist));
        }
    }
    best.map(|(v, x, _)| (v, x))
}

/// Round the binaries of an integral LP point, re-solve the continuous part
/// with the binaries pinned, and keep the result only if it verifies.
fn polish(
    model: &MilpModel,
    relax: &mut LpRelaxation,
    point: &[f64],
    binaries: &[usize],
    lo: &[f64],
    hi: &[f64],
    cfg: &SolverConfig,
) -> Option<(f64, Vec<f64>)> {
    let mut plo = lo.to_vec();
    let mut phi = hi.to_vec();
    for &v in binaries {
        let r = point[v].round();
        plo[v] = r;
        phi[v] = r;
    }
    let res = relax.solve(&plo, &phi, None);
    if res.status != LpStatus::Optimal {
        return None;
    }
    let mut values = res.point;
    for &v in binaries {
        values[v] = plo[v];
    }
    for (k, var) in model.variables.iter().enumerate() {
        values[k] = values[k].clamp(var.lo, var.hi);
    }
    let violations = model.violations(&values, cfg.feas_tol);
    if !violations.is_empty() {
        log::warn!("discarding integral point that fails verification: {}", violations[0]);
        return None;
    }
    Some((model.objective.eval(&values), values))
}

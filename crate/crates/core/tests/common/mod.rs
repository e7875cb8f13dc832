//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trstl_core::geometry::{ConvexRegion, PwlTrajectory, Waypoint};
use trstl_core::milp::{LinExpr, MilpModel, Sense, VarId, VarKind};
use trstl_core::solver::{lp_relax_solve, LpStatus};
use trstl_core::stl::Formula;
use trstl_core::{Rational, Scalar};

pub const REGION_NAMES: [&str; 3] = ["R1", "R2", "R3"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A multiple of 1/8 in `[lo, hi]`, exact in binary floating point.
pub fn grid(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let steps = ((hi - lo) * 8.0).round() as i64;
    lo + rng.gen_range(0..=steps) as f64 / 8.0
}

/// Axis-aligned box or a convex polygon with 3 to 6 vertices inside `[0, 10]²`.
pub fn random_region(rng: &mut ChaCha8Rng, name: &str) -> ConvexRegion<f64> {
    if rng.gen_bool(0.5) {
        let x0 = grid(rng, 0.0, 7.0);
        let y0 = grid(rng, 0.0, 7.0);
        let x1 = x0 + grid(rng, 0.5, 3.0);
        let y1 = y0 + grid(rng, 0.5, 3.0);
        return ConvexRegion::from_vertices(name, &[vec![x0, y0], vec![x1, y0], vec![x1, y1], vec![x0, y1]]).unwrap();
    }
    loop {
        let cx = grid(rng, 2.0, 8.0);
        let cy = grid(rng, 2.0, 8.0);
        let r = grid(rng, 0.75, 2.0);
        let n = rng.gen_range(3..=6);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let pts: Vec<Vec<f64>> = angles
            .iter()
            .map(|a| vec![snap(cx + r * a.cos()), snap(cy + r * a.sin())])
            .collect();
        if let Ok(region) = ConvexRegion::from_vertices(name, &pts) {
            return region;
        }
    }
}

fn snap(v: f64) -> f64 {
    (v * 64.0).round() / 64.0
}

pub fn random_regions(rng: &mut ChaCha8Rng, count: usize) -> BTreeMap<String, ConvexRegion<f64>> {
    REGION_NAMES[..count]
        .iter()
        .map(|n| (n.to_string(), random_region(rng, n)))
        .collect()
}

/// `k` waypoints in `[0, 10]²` with increasing grid timestamps starting at 0.
/// Zero-duration segments appear occasionally.
pub fn random_trajectory(rng: &mut ChaCha8Rng, k: usize) -> PwlTrajectory<f64> {
    let mut t = 0.0;
    let mut wps = Vec::with_capacity(k);
    let mut p = vec![grid(rng, 0.0, 10.0), grid(rng, 0.0, 10.0)];
    for i in 0..k {
        if i > 0 {
            t += if rng.gen_bool(0.05) { 0.0 } else { grid(rng, 0.125, 3.0) };
            if rng.gen_bool(0.7) {
                p = vec![
                    (p[0] + grid(rng, -3.0, 3.0)).clamp(0.0, 10.0),
                    (p[1] + grid(rng, -3.0, 3.0)).clamp(0.0, 10.0),
                ];
            }
        }
        wps.push(Waypoint::new(t, p.clone()));
    }
    PwlTrajectory::new(wps).unwrap()
}

fn random_interval(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a = rng.gen_range(0..=4) as f64;
    let b = a + rng.gen_range(1..=6) as f64;
    (a, b)
}

/// NNF formula of temporal/boolean depth at most `depth` over `names`.
pub fn random_formula(rng: &mut ChaCha8Rng, depth: usize, names: &[&str]) -> Formula {
    let name = names.choose(rng).unwrap().to_string();
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.6) {
            Formula::Atom(name)
        } else {
            Formula::NegAtom(name)
        };
    }
    let child = |rng: &mut ChaCha8Rng| random_formula(rng, depth - 1, names);
    match rng.gen_range(0..5) {
        0 => Formula::And(vec![child(rng), child(rng)]),
        1 => Formula::Or(vec![child(rng), child(rng)]),
        2 => {
            let (a, b) = random_interval(rng);
            Formula::always(a, b, child(rng))
        }
        3 => {
            let (a, b) = random_interval(rng);
            Formula::eventually(a, b, child(rng))
        }
        _ => {
            let (a, b) = random_interval(rng);
            let lhs = child(rng);
            Formula::until(a, b, lhs, child(rng))
        }
    }
}

/// A formula, its regions and a trajectory, all drawn from one seed.
pub struct MonitorCase {
    pub formula: Formula,
    pub regions: BTreeMap<String, ConvexRegion<f64>>,
    pub traj: PwlTrajectory<f64>,
}

impl MonitorCase {
    pub fn random(seed: u64, max_depth: usize, max_k: usize) -> Self {
        let mut rng = rng(seed);
        let count = rng.gen_range(1..=3);
        let regions = random_regions(&mut rng, count);
        let depth = rng.gen_range(0..=max_depth);
        let formula = random_formula(&mut rng, depth, &REGION_NAMES[..count]);
        let k = rng.gen_range(2..=max_k);
        let traj = random_trajectory(&mut rng, k);
        Self { formula, regions, traj }
    }

    pub fn exact_regions(&self) -> BTreeMap<String, ConvexRegion<Rational>> {
        self.regions.iter().map(|(n, r)| (n.clone(), r.convert())).collect()
    }

    pub fn exact_trajectory(&self) -> PwlTrajectory<Rational> {
        self.traj.convert()
    }
}

pub fn exact(v: f64) -> Rational {
    Rational::from_f64_lossy(v)
}

/// Random MILP with `nb` binaries, `nc` boxed continuous variables and `rows`
/// integer-coefficient rows.
pub fn random_milp(rng: &mut ChaCha8Rng, nb: usize, nc: usize, rows: usize) -> MilpModel {
    let mut m = MilpModel::new(100.0);
    let mut vars = Vec::new();
    for k in 0..nb {
        vars.push(m.add_binary(format!("b{k}")));
    }
    for k in 0..nc {
        vars.push(m.add_continuous(format!("x{k}"), -3.0, 4.0));
    }
    for r in 0..rows {
        let mut e = LinExpr::zero();
        for &v in &vars {
            if rng.gen_bool(0.6) {
                e.add_term(v, rng.gen_range(-5i32..=5) as f64);
            }
        }
        let sense = if rng.gen_bool(0.15) { Sense::Ge } else { Sense::Le };
        let rhs = rng.gen_range(-2.0..6.0);
        m.constrain(e, sense, rhs, format!("r{r}"));
    }
    let mut obj = LinExpr::zero();
    for &v in &vars {
        obj.add_term(v, rng.gen_range(-3.0..3.0));
    }
    m.objective = obj;
    m
}

/// Best objective over every binary assignment, each completed by an LP.
pub fn enumerate_optimum(model: &MilpModel) -> Option<f64> {
    let bins: Vec<usize> = (0..model.num_vars())
        .filter(|&k| model.variables[k].kind == VarKind::Binary)
        .collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let mut fixed = model.clone();
        for (i, &k) in bins.iter().enumerate() {
            fixed.fix(VarId(k), ((mask >> i) & 1) as f64);
        }
        let r = lp_relax_solve(&fixed);
        if r.status == LpStatus::Optimal {
            best = Some(best.map_or(r.value, |b: f64| b.max(r.value)));
        }
    }
    best
}

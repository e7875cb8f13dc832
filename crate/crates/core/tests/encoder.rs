use std::collections::BTreeMap;
use std::time::Instant;

use trstl_core::encoder::{
    encode_mission, encode_mission_with, pin_trajectory, Encoder, EncodeError, EncodingMode, Formulation, SynthesisMode,
    SynthesisProblem, TemporalOp,
};
use trstl_core::geometry::{ConvexRegion, PwlTrajectory, Workspace};
use trstl_core::milp::{LinExpr, MilpModel, SolveStatus, VarId};
use trstl_core::monitor::{eval_qualitative, eval_time_robustness, Side};
use trstl_core::solver::{lp_relax_solve, solve, LpStatus, SolverConfig};
use trstl_core::stl::{parse_formula, Formula};

fn unit_square(name: &str) -> ConvexRegion<f64> {
    ConvexRegion::from_vertices(
        name,
        &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
    )
    .unwrap()
}

fn workspace(horizon: f64) -> Workspace {
    Workspace::new(vec![-1.0, -1.0], vec![3.0, 3.0], horizon, 0.1).unwrap()
}

/// Encoder with waypoint times pinned and one fixed binary label per segment.
fn pinned_atom(times: &[f64], labels: &[f64], side: Side) -> (MilpModel, Vec<VarId>) {
    let t_end = *times.last().unwrap();
    let ws = workspace(t_end);
    let mut enc = Encoder::new(50.0, t_end);
    enc.encode_dynamics(times.len(), &ws, 100.0, None, None).unwrap();
    let ts = enc.times().to_vec();
    for (v, &t) in ts.iter().zip(times) {
        enc.model.fix(*v, t);
    }
    let z: Vec<VarId> = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let b = enc.model.add_binary(format!("z[{i}]"));
            enc.model.fix(b, l);
            b
        })
        .collect();
    let theta = enc.encode_atom_robustness(&z, side, "atom").unwrap();
    (enc.model, theta)
}

fn pinned_values(model: &MilpModel) -> Vec<f64> {
    let sol = solve(model, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    sol.values
}

#[test]
fn counting_encoding_matches_worked_examples() {
    let (m, th) = pinned_atom(&[0.0, 2.0, 5.0, 6.0], &[1.0, 1.0, 0.0], Side::Right);
    let v = pinned_values(&m);
    let got: Vec<f64> = th.iter().map(|x| v[x.0]).collect();
    for (g, want) in got.iter().zip([3.0, 0.0, 0.0]) {
        assert!((g - want).abs() < 1e-7, "{got:?}");
    }
    let (m, th) = pinned_atom(&[0.0, 2.0, 5.0, 6.0], &[0.0, 0.0, 0.0], Side::Right);
    let v = pinned_values(&m);
    assert!((v[th[0].0] + 4.0).abs() < 1e-7);
    for label in [0.0, 1.0] {
        let (m, th) = pinned_atom(&[0.0, 3.0], &[label], Side::Right);
        assert!(pinned_values(&m)[th[0].0].abs() < 1e-7);
    }
}

#[test]
fn left_counting_mirrors_right() {
    let (m, th) = pinned_atom(&[0.0, 2.0, 5.0, 6.0], &[0.0, 1.0, 1.0], Side::Left);
    let v = pinned_values(&m);
    let got: Vec<f64> = th.iter().map(|x| v[x.0]).collect();
    for (g, want) in got.iter().zip([0.0, 0.0, 3.0]) {
        assert!((g - want).abs() < 1e-7, "{got:?}");
    }
}

fn pinned_temporal(op: TemporalOp, a: f64, b: f64, times: &[f64], child: &[f64]) -> Option<f64> {
    let t_end = *times.last().unwrap();
    let mut enc = Encoder::new(100.0, t_end);
    enc.encode_dynamics(times.len(), &workspace(t_end), 100.0, None, None).unwrap();
    let ts = enc.times().to_vec();
    for (v, &t) in ts.iter().zip(times) {
        enc.model.fix(*v, t);
    }
    let vals: Vec<LinExpr> = child.iter().map(|&c| LinExpr::constant(c)).collect();
    let theta = enc.encode_temporal(op, a, b, &vals, 0, "op").unwrap();
    let mut model = enc.model;
    // The value is determined; probe it from both sides.
    model.objective = theta.clone();
    let hi = solve(&model, &SolverConfig::default()).unwrap();
    if hi.status == SolveStatus::Infeasible {
        return None;
    }
    model.objective = -theta.clone();
    let lo = solve(&model, &SolverConfig::default()).unwrap();
    let (x, y) = (theta.eval(&hi.values), theta.eval(&lo.values));
    assert!((x - y).abs() < 1e-7, "value not pinned: {x} vs {y}");
    Some(x)
}

#[test]
fn temporal_operators_on_pinned_times() {
    // Only segment 1 meets the window [t_1 + 2, t_0 + 10] = [3, 10].
    let v = pinned_temporal(TemporalOp::Eventually, 2.0, 10.0, &[0.0, 1.0, 20.0], &[9.0, 4.0]).unwrap();
    assert!((v - 4.0).abs() < 1e-7);
    let v = pinned_temporal(TemporalOp::Always, 0.0, 1.0, &[0.0, 1.0, 2.0, 30.0], &[3.0, 1.0, 7.0]).unwrap();
    assert!((v - 1.0).abs() < 1e-7);
    // Side condition fails: the window is empty and the value is the sentinel.
    let v = pinned_temporal(TemporalOp::Eventually, 0.0, 1.0, &[0.0, 5.0, 6.0], &[2.0, 2.0]).unwrap();
    assert!((v + 7.0).abs() < 1e-7);
}

fn toy_problem(k: usize) -> SynthesisProblem {
    let formula = parse_formula("F[0,10] G[0,2] R").unwrap();
    let regions = BTreeMap::from([("R".to_string(), unit_square("R"))]);
    let ws = Workspace::new(vec![0.0, 0.0], vec![2.0, 2.0], 10.0, 0.1).unwrap();
    SynthesisProblem::new(formula, regions, k, ws, 1.0, 0.5)
}

fn monitored(prob: &SynthesisProblem, traj: &PwlTrajectory<f64>) -> f64 {
    eval_time_robustness(&prob.formula, traj, &prob.regions, &prob.workspace.epsilon, prob.side)
        .unwrap()
        .root()
        .to_f64()
}

#[test]
fn toy_mission_end_to_end() {
    let prob = toy_problem(6);
    let (model, art) = encode_mission(&prob).unwrap();
    assert_eq!(art.counts.num_binary, model.num_binary());
    assert_eq!(art.counts.num_continuous, model.num_continuous());
    assert_eq!(art.counts.num_constraints, model.num_constraints());
    assert!(model.is_well_formed());
    let started = Instant::now();
    let sol = solve(&model, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!(started.elapsed().as_secs_f64() < 30.0);
    let traj = art.trajectory(&sol);
    let theta = monitored(&prob, &traj);
    assert!(art.root_value(&sol) >= 0.5 - 1e-6);
    assert!(theta >= art.root_value(&sol) - 1e-6, "monitor {theta}");
    let sat = eval_qualitative(&prob.formula, &traj, &prob.regions, &prob.workspace.epsilon).unwrap();
    assert!(sat.satisfied());
}

#[test]
fn two_waypoints_cannot_be_robust() {
    let mut prob = toy_problem(2);
    prob.formula = Formula::atom("R");
    let (model, _) = encode_mission(&prob).unwrap();
    assert_eq!(solve(&model, &SolverConfig::default()).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn threshold_beyond_horizon_is_rejected() {
    let mut prob = toy_problem(4);
    prob.theta_star = 10.5;
    assert!(matches!(encode_mission(&prob), Err(EncodeError::InvalidProblem(_))));
    prob.theta_star = 10.0;
    assert!(encode_mission(&prob).is_ok());
}

#[test]
fn unreachable_goal_is_rejected() {
    let mut prob = toy_problem(4);
    prob.workspace = Workspace::new(vec![0.0, 0.0], vec![12.0, 2.0], 5.0, 0.1).unwrap();
    prob.formula = prob.formula.resolve_horizon(5.0);
    prob.start = Some(vec![0.0, 0.0]);
    prob.goal = Some(vec![10.0, 0.0]);
    assert!(matches!(encode_mission(&prob), Err(EncodeError::InfeasibleEndpoints { .. })));
}

#[test]
fn stationary_trajectory_satisfies_dynamics() {
    let mut prob = toy_problem(3);
    prob.start = Some(vec![0.5, 0.5]);
    prob.goal = Some(vec![0.5, 0.5]);
    let (mut model, art) = encode_mission(&prob).unwrap();
    let traj = PwlTrajectory::from_pairs(&[
        (0.0, vec![0.5, 0.5]),
        (5.0, vec![0.5, 0.5]),
        (10.0, vec![0.5, 0.5]),
    ])
    .unwrap();
    pin_trajectory(&mut model, &art, &traj);
    let dyn_rows: Vec<_> = model.constraints.iter().filter(|c| c.tag.starts_with("dyn")).collect();
    assert!(!dyn_rows.is_empty());
    let mut values = vec![0.0; model.num_vars()];
    for (i, w) in traj.waypoints().iter().enumerate() {
        values[art.t[i].0] = w.t;
        for (a, x) in w.p.iter().enumerate() {
            values[art.p[i][a].0] = *x;
        }
    }
    assert!(dyn_rows.iter().all(|c| c.violation(&values) <= 1e-12));
}

#[test]
fn velocity_rows_accept_worked_assignment() {
    let mut enc = Encoder::new(100.0, 10.0);
    let ws = Workspace::new(vec![0.0, 0.0], vec![10.0, 10.0], 10.0, 0.1).unwrap();
    enc.encode_dynamics(3, &ws, 1.0, None, None).unwrap();
    let mut values = vec![0.0; enc.model.num_vars()];
    for (i, (t, x)) in [(0.0, 0.0), (5.0, 4.0), (10.0, 8.0)].into_iter().enumerate() {
        values[enc.times()[i].0] = t;
        values[enc.positions()[i][0].0] = x;
    }
    assert!(enc.model.violations(&values, 1e-12).is_empty());
}

#[test]
fn objective_prefers_shorter_paths_and_rewards_robustness() {
    let mut last = f64::NEG_INFINITY;
    for lambda in [0.1, 1.0, 10.0] {
        let mut prob = toy_problem(6);
        prob.lambda = lambda;
        prob.start = Some(vec![1.8, 1.8]);
        let (model, art) = encode_mission(&prob).unwrap();
        let sol = solve(&model, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let theta = art.root_value(&sol);
        assert!(theta >= last - 1e-6, "lambda {lambda}: {theta} < {last}");
        last = theta;
    }
}

#[test]
fn qualitative_mode_finds_a_satisfying_path() {
    let mut prob = toy_problem(5);
    prob.mode = SynthesisMode::Qualitative;
    prob.start = Some(vec![1.8, 1.8]);
    let (model, art) = encode_mission(&prob).unwrap();
    let sol = solve(&model, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let traj = art.trajectory(&sol);
    assert!(eval_qualitative(&prob.formula, &traj, &prob.regions, &0.1).unwrap().satisfied());
}

#[test]
fn reduced_and_full_encodings_agree() {
    for text in ["F[0,10] G[0,2] R", "G[0,6] !R", "F[2,8] R"] {
        let mut prob = toy_problem(5);
        prob.formula = parse_formula(text).unwrap().resolve_horizon(10.0);
        prob.start = Some(vec![1.5, 0.5]);
        let (rm, ra) = encode_mission_with(&prob, EncodingMode::Reduced).unwrap();
        let (fm, fa) = encode_mission_with(&prob, EncodingMode::Full).unwrap();
        assert!(fa.counts.num_binary >= ra.counts.num_binary);
        let rs = solve(&rm, &SolverConfig::default()).unwrap();
        let fs = solve(&fm, &SolverConfig::default()).unwrap();
        assert_eq!(rs.status, fs.status, "{text}");
        if rs.has_assignment() {
            assert!((rs.objective - fs.objective).abs() < 1e-6, "{text}: {} vs {}", rs.objective, fs.objective);
            assert!((ra.root_value(&rs) - fa.root_value(&fs)).abs() < 1e-6 || (rs.objective - fs.objective).abs() < 1e-6);
        }
    }
}

fn tag_census_for(formulation: Formulation) -> BTreeMap<String, usize> {
    let mut prob = toy_problem(4);
    prob.formula = parse_formula("(!R) U[0,5] (F[0,3] G[0,1] R)").unwrap().resolve_horizon(10.0);
    prob.formulation = formulation;
    let (model, _) = encode_mission(&prob).unwrap();
    assert!(model.constraints.iter().all(|c| !c.tag.is_empty()));
    model.tag_census()
}

#[test]
fn tags_cover_every_encoding_step() {
    let census = tag_census_for(Formulation::Exact);
    for tag in [
        "lin_pred",
        "label",
        "t_aggre",
        "tr_raw",
        "right_time_rob",
        "intersect",
        "temporal_lb",
        "temporal_ub",
        "selector",
        "inf_sup",
        "until_mask",
        "dyn",
        "objective",
        "spec",
    ] {
        assert!(census.contains_key(tag), "missing {tag}: {census:?}");
    }
}

#[test]
fn one_sided_tags_cover_every_encoding_step() {
    let census = tag_census_for(Formulation::OneSided);
    for tag in [
        "lin_pred",
        "label",
        "t_aggre",
        "right_time_rob",
        "intersect",
        "temporal_ub",
        "selector",
        "dyn",
        "objective",
        "spec",
    ] {
        assert!(census.contains_key(tag), "missing {tag}: {census:?}");
    }
    assert!(!census.contains_key("temporal_lb"));
}

#[test]
fn formulations_reach_the_same_optimum() {
    for text in ["F[0,10] G[0,2] R", "G[0,6] !R", "(!R) U[0,8] R", "F[2,8] R | G[0,3] !R"] {
        let mut prob = toy_problem(4);
        prob.formula = parse_formula(text).unwrap().resolve_horizon(10.0);
        prob.start = Some(vec![1.5, 0.5]);
        let mut results = Vec::new();
        for formulation in [Formulation::OneSided, Formulation::Exact] {
            prob.formulation = formulation;
            let (model, art) = encode_mission(&prob).unwrap();
            let sol = solve(&model, &SolverConfig::default()).unwrap();
            if sol.has_assignment() {
                let traj = art.trajectory(&sol);
                assert!(monitored(&prob, &traj) >= art.root_value(&sol) - 1e-6, "{text} {formulation:?}");
            }
            results.push((sol.status, sol.objective));
        }
        assert_eq!(results[0].0, results[1].0, "{text}");
        if results[0].0 == SolveStatus::Optimal {
            assert!((results[0].1 - results[1].1).abs() < 1e-6, "{text}: {results:?}");
        }
    }
}

#[test]
fn relaxation_of_toy_mission_is_bounded() {
    let (model, _) = encode_mission(&toy_problem(6)).unwrap();
    let r = lp_relax_solve(&model);
    assert_eq!(r.status, LpStatus::Optimal);
}

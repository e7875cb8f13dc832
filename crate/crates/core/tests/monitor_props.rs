mod common;

use std::collections::BTreeMap;

use common::{exact, MonitorCase};
use proptest::prelude::*;
use trstl_core::geometry::{ConvexRegion, PwlTrajectory, Waypoint};
use trstl_core::monitor::naive::{robustness_at, sat_at};
use trstl_core::monitor::{check_soundness, eval_qualitative, eval_time_robustness, Robustness, Side};
use trstl_core::stl::Formula;
use trstl_core::Rational;

const EPS: f64 = 0.1;

fn inside_box() -> BTreeMap<String, ConvexRegion<f64>> {
    let r = ConvexRegion::from_vertices("R", &[vec![0.0, 0.0], vec![10.0, 0.0], vec![10.0, 10.0], vec![0.0, 10.0]]).unwrap();
    BTreeMap::from([("R".to_string(), r)])
}

fn still_trajectory(durations: &[f64]) -> PwlTrajectory<f64> {
    let mut t = 0.0;
    let mut wps = vec![Waypoint::new(0.0, vec![5.0, 5.0])];
    for d in durations {
        t += d;
        wps.push(Waypoint::new(t, vec![5.0, 5.0]));
    }
    PwlTrajectory::new(wps).unwrap()
}

fn atom_right(traj: &PwlTrajectory<f64>) -> Vec<Robustness<f64>> {
    let rob = eval_time_robustness(&Formula::atom("R"), traj, &inside_box(), &EPS, Side::Right).unwrap();
    rob.values[0].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluator_matches_naive_oracle(seed in any::<u64>()) {
        let case = MonitorCase::random(seed, 3, 12);
        let sat = eval_qualitative(&case.formula, &case.traj, &case.regions, &EPS).unwrap();
        for side in [Side::Right, Side::Left] {
            let rob = eval_time_robustness(&case.formula, &case.traj, &case.regions, &EPS, side).unwrap();
            let root = rob.values.last().unwrap();
            for (i, theta) in root.iter().enumerate() {
                let oracle = robustness_at(&case.formula, &case.traj, &case.regions, &EPS, i, side).unwrap();
                prop_assert_eq!(theta, &oracle, "{} segment {} {:?}", case.formula, i, side);
            }
        }
        for i in 0..case.traj.num_segments() {
            let z = sat_at(&case.formula, &case.traj, &case.regions, &EPS, i).unwrap();
            prop_assert_eq!(sat.values.last().unwrap()[i], z);
        }
    }

    #[test]
    fn exact_robustness_is_sound(seed in any::<u64>()) {
        let case = MonitorCase::random(seed, 3, 10);
        let report = check_soundness(&case.formula, &case.exact_trajectory(), &case.exact_regions(), &exact(EPS)).unwrap();
        prop_assert!(report.is_sound(), "{}: {:?}", case.formula, report.first_counterexample());
    }

    #[test]
    fn conjunction_and_disjunction_are_min_and_max(seed in any::<u64>(), side_right in any::<bool>()) {
        let side = if side_right { Side::Right } else { Side::Left };
        let a = MonitorCase::random(seed, 2, 8);
        let b = MonitorCase::random(seed ^ 0x5555, 2, 8);
        let mut regions = a.regions.clone();
        let renamed = rename(&b.formula, "S");
        for (n, r) in &b.regions {
            regions.insert(format!("S{n}"), r.clone());
        }
        let eval = |f: &Formula| {
            eval_time_robustness(f, &a.traj, &regions, &EPS, side).unwrap().values.last().unwrap().clone()
        };
        let (x, y) = (eval(&a.formula), eval(&renamed));
        let both = eval(&Formula::And(vec![a.formula.clone(), renamed.clone()]));
        let either = eval(&Formula::Or(vec![a.formula.clone(), renamed.clone()]));
        for i in 0..x.len() {
            prop_assert_eq!(&both[i], &x[i].clone().meet(y[i].clone()));
            prop_assert_eq!(&either[i], &x[i].clone().join(y[i].clone()));
        }
    }

    #[test]
    fn inside_runs_aggregate_the_whole_suffix(durations in prop::collection::vec(1u32..40, 1..10)) {
        let durations: Vec<f64> = durations.iter().map(|&d| d as f64 / 8.0).collect();
        let traj = still_trajectory(&durations);
        let theta = atom_right(&traj);
        let end = *traj.end_time();
        for (i, th) in theta.iter().enumerate() {
            prop_assert_eq!(th, &Robustness::Finite(end - traj.t(i + 1)));
        }
    }

    #[test]
    fn appending_an_inside_segment_never_decreases(
        durations in prop::collection::vec(1u32..40, 1..10),
        extra in 1u32..40,
    ) {
        let durations: Vec<f64> = durations.iter().map(|&d| d as f64 / 8.0).collect();
        let before = atom_right(&still_trajectory(&durations));
        let mut longer = durations.clone();
        longer.push(extra as f64 / 8.0);
        let after = atom_right(&still_trajectory(&longer));
        for i in 0..before.len() {
            prop_assert!(after[i] >= before[i]);
        }
    }
}

fn rename(f: &Formula, prefix: &str) -> Formula {
    match f {
        Formula::Atom(n) => Formula::Atom(format!("{prefix}{n}")),
        Formula::NegAtom(n) => Formula::NegAtom(format!("{prefix}{n}")),
        Formula::And(cs) => Formula::And(cs.iter().map(|c| rename(c, prefix)).collect()),
        Formula::Or(cs) => Formula::Or(cs.iter().map(|c| rename(c, prefix)).collect()),
        Formula::Always(i, c) => Formula::Always(*i, Box::new(rename(c, prefix))),
        Formula::Eventually(i, c) => Formula::Eventually(*i, Box::new(rename(c, prefix))),
        Formula::Until(i, l, r) => Formula::Until(*i, Box::new(rename(l, prefix)), Box::new(rename(r, prefix))),
    }
}

#[test]
fn exact_and_float_monitors_agree_on_grid_instances() {
    for seed in 0..50 {
        let case = MonitorCase::random(seed, 3, 10);
        let float = eval_time_robustness(&case.formula, &case.traj, &case.regions, &EPS, Side::Right).unwrap();
        let rational =
            eval_time_robustness(&case.formula, &case.exact_trajectory(), &case.exact_regions(), &exact(EPS), Side::Right)
                .unwrap();
        let lossy: Vec<f64> = rational.values.last().unwrap().iter().map(Robustness::<Rational>::to_f64).collect();
        let direct: Vec<f64> = float.values.last().unwrap().iter().map(Robustness::<f64>::to_f64).collect();
        assert_eq!(lossy, direct, "{}", case.formula);
    }
}

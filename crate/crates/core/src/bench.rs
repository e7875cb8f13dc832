//! Benchmark missions and the encoding-size scaling harness.
//!
//! The desk cases are small analogues of four reach/avoid scenarios
//! (monitoring two regions, timed monitoring, a gate that may only be passed
//! after charging, and a key/door puzzle) that the built-in solver handles
//! in seconds. The paper-scale cases keep the full formulas and are meant for
//! LP export. All geometry is invented for this library.

use std::time::Duration;

use serde::Serialize;

use crate::mission::{CountsRecord, EncodingName, Mission, MissionFile, ObjectiveName, RegionSpec, WorkspaceBounds};
use crate::monitor::Side;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scale {
    Desk,
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expectation {
    pub feasible: bool,
    /// Minimum monitored robustness of a synthesized trajectory.
    pub theta_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCase {
    pub mission: MissionFile,
    pub expected: Expectation,
    pub scale: Scale,
}

impl BenchmarkCase {
    pub fn name(&self) -> &str {
        &self.mission.name
    }

    pub fn load(&self) -> Mission {
        self.mission.load().expect("benchmark missions are valid")
    }
}

#[allow(clippy::too_many_arguments)]
fn mission(
    name: &str,
    upper: [f64; 2],
    horizon: f64,
    regions: Vec<RegionSpec>,
    formula: &str,
    k: usize,
    theta_star: f64,
    start: Option<[f64; 2]>,
    goal: Option<[f64; 2]>,
) -> MissionFile {
    MissionFile {
        schema: crate::mission::SCHEMA_VERSION,
        name: name.into(),
        workspace: WorkspaceBounds {
            lower: vec![0.0, 0.0],
            upper: upper.to_vec(),
        },
        horizon,
        regions,
        formula: formula.into(),
        k,
        v_b: 1.0,
        theta_star,
        lambda: 1.0,
        epsilon: 0.1,
        eps_t: crate::milp::DEFAULT_EPS_T,
        start: start.map(|p| p.to_vec()),
        goal: goal.map(|p| p.to_vec()),
        objective: ObjectiveName::L1Path,
        side: Side::Right,
        encoding: EncodingName::OneSided,
    }
}

fn desk(mission: MissionFile, theta_min: f64) -> BenchmarkCase {
    BenchmarkCase {
        mission,
        expected: Expectation {
            feasible: true,
            theta_min: Some(theta_min),
        },
        scale: Scale::Desk,
    }
}

fn paper(mut mission: MissionFile) -> BenchmarkCase {
    mission.encoding = EncodingName::Exact;
    BenchmarkCase {
        mission,
        expected: Expectation {
            feasible: true,
            theta_min: None,
        },
        scale: Scale::Paper,
    }
}

fn conj(prefix: &str, n: usize, wrap: impl Fn(String) -> String) -> String {
    (1..=n).map(|i| wrap(format!("{prefix}{i}"))).collect::<Vec<_>>().join(" & ")
}

/// Desk and paper-scale cases in a fixed order.
pub fn load_benchmarks() -> Vec<BenchmarkCase> {
    let mut cases = vec![
        desk(
            mission(
                "desk-phi1",
                [10.0, 10.0],
                20.0,
                vec![
                    RegionSpec::rect("A1", 4.0, 6.0, 6.0, 8.0),
                    RegionSpec::rect("R1", 0.0, 0.0, 4.0, 4.0),
                    RegionSpec::rect("R2", 3.0, 0.0, 7.0, 4.0),
                ],
                "(!A1) & F(G[0,2] R1) & F(G[0,2] R2)",
                6,
                0.5,
                Some([2.0, 2.0]),
                None,
            ),
            0.5,
        ),
        desk(
            mission(
                "desk-phi2",
                [10.0, 10.0],
                20.0,
                vec![
                    RegionSpec::rect("A1", 4.0, 4.0, 6.0, 6.0),
                    RegionSpec::rect("R1", 0.0, 0.0, 4.0, 4.0),
                    RegionSpec::rect("R2", 3.0, 0.0, 7.0, 4.0),
                ],
                "(!A1) & F[0,8](G[0,2] R1) & F[6,16](G[0,2] R2)",
                6,
                0.5,
                Some([2.0, 2.0]),
                None,
            ),
            0.5,
        ),
        desk(
            mission(
                "desk-phi3",
                [10.0, 10.0],
                20.0,
                vec![
                    RegionSpec::rect("G1", 0.0, 6.0, 3.0, 10.0),
                    RegionSpec::rect("C1", 3.0, 3.0, 6.0, 7.0),
                    RegionSpec::rect("R1", 4.0, 2.0, 8.0, 6.0),
                ],
                "((!G1) U[0,8] C1) & F(G[0,1] R1)",
                6,
                0.5,
                Some([1.0, 5.0]),
                None,
            ),
            0.5,
        ),
        desk(
            mission(
                "desk-phi4",
                [10.0, 10.0],
                20.0,
                vec![
                    RegionSpec::rect("Goal", 7.0, 2.0, 10.0, 6.0),
                    RegionSpec::rect("D1", 3.0, 0.0, 4.0, 6.0),
                    RegionSpec::rect("Key1", 5.0, 0.0, 9.0, 4.0),
                ],
                "F Goal & ((!D1) U Key1)",
                6,
                0.5,
                Some([1.0, 1.0]),
                None,
            ),
            0.5,
        ),
    ];
    cases.extend(paper_cases());
    cases
}

fn paper_cases() -> Vec<BenchmarkCase> {
    let obstacles = |n: usize| -> Vec<RegionSpec> {
        (0..n)
            .map(|k| {
                let (col, row) = ((k % 5) as f64, (k / 5) as f64);
                RegionSpec::rect(format!("A{}", k + 1), 4.0 + 8.0 * col, 14.0 + 8.0 * row, 7.0 + 8.0 * col, 17.0 + 8.0 * row)
            })
            .collect()
    };
    let mut phi1_regions = obstacles(8);
    phi1_regions.push(RegionSpec::rect("R1", 2.0, 2.0, 8.0, 8.0));
    phi1_regions.push(RegionSpec::rect("R2", 32.0, 2.0, 38.0, 8.0));
    let mut phi2_regions = obstacles(20);
    phi2_regions.push(RegionSpec::rect("R1", 2.0, 2.0, 8.0, 8.0));
    phi2_regions.push(RegionSpec::rect("R2", 32.0, 2.0, 38.0, 8.0));
    phi2_regions.push(RegionSpec::rect("R3", 18.0, 2.0, 24.0, 8.0));
    let phi3_regions = vec![
        RegionSpec::rect("G1", 10.0, 18.0, 30.0, 20.0),
        RegionSpec::rect("C1", 34.0, 30.0, 38.0, 34.0),
        RegionSpec::rect("R1", 2.0, 2.0, 8.0, 8.0),
        RegionSpec::rect("R2", 32.0, 2.0, 38.0, 8.0),
    ];
    let mut phi4_regions = vec![RegionSpec::rect("Goal", 34.0, 34.0, 38.0, 38.0)];
    for k in 1..=5 {
        let x = 6.0 * k as f64;
        phi4_regions.push(RegionSpec::rect(format!("A{k}"), x, 10.0, x + 2.0, 14.0));
        phi4_regions.push(RegionSpec::rect(format!("D{k}"), x, 20.0, x + 2.0, 24.0));
        phi4_regions.push(RegionSpec::rect(format!("R{k}"), x, 2.0, x + 2.0, 4.0));
    }
    vec![
        paper(mission(
            "paper-phi1",
            [40.0, 40.0],
            100.0,
            phi1_regions,
            &format!("{} & F(G[0,5] R1) & F(G[0,5] R2)", conj("!A", 8, |a| a)),
            23,
            1.0,
            Some([20.0, 38.0]),
            Some([20.0, 38.0]),
        )),
        paper(mission(
            "paper-phi2",
            [40.0, 40.0],
            300.0,
            phi2_regions,
            &format!(
                "{} & F[0,150](G[0,15] R1) & F[180,260](G[0,15] R2) & F[50,80](G[0,15] R3) & G[200,220] R3",
                conj("!A", 20, |a| a)
            ),
            25,
            1.0,
            Some([20.0, 38.0]),
            None,
        )),
        paper(mission(
            "paper-phi3",
            [40.0, 40.0],
            100.0,
            phi3_regions,
            "((!G1) U[0,30] C1) & F[50,80](G[0,5] R1) & F(G[0,5] R2)",
            23,
            0.1,
            Some([20.0, 38.0]),
            None,
        )),
        paper(mission(
            "paper-phi4",
            [40.0, 40.0],
            200.0,
            phi4_regions,
            &format!(
                "F Goal & {} & {}",
                conj("A", 5, |a| format!("G !{a}")),
                (1..=5).map(|k| format!("((!D{k}) U R{k})")).collect::<Vec<_>>().join(" & ")
            ),
            35,
            1.0,
            Some([2.0, 38.0]),
            None,
        )),
    ]
}

/// Outcome of one benchmark case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub name: String,
    pub scale: Scale,
    pub status: String,
    pub counts: Option<CountsRecord>,
    pub theta: Option<f64>,
    pub path_length: Option<f64>,
    pub seconds: f64,
    pub passed: bool,
    pub message: String,
}

impl BenchResult {
    pub fn summary(&self) -> String {
        let verdict = if self.passed { "ok" } else { "FAIL" };
        let counts = self
            .counts
            .as_ref()
            .map(|c| format!("{} bin / {} cont / {} rows", c.num_binary, c.num_continuous, c.num_constraints))
            .unwrap_or_default();
        format!(
            "{verdict:4} {:12} {:9} {counts} {:.2}s {}",
            self.name, self.status, self.seconds, self.message
        )
    }
}

/// Solve desk cases with the built-in solver and encode paper cases only.
pub fn run_benchmarks(cases: &[BenchmarkCase], time_limit: Duration) -> Vec<BenchResult> {
    cases.iter().map(|c| run_case(c, time_limit)).collect()
}

pub fn run_case(case: &BenchmarkCase, time_limit: Duration) -> BenchResult {
    let started = std::time::Instant::now();
    let mission = case.load();
    let mut result = BenchResult {
        name: case.name().to_string(),
        scale: case.scale,
        status: String::new(),
        counts: None,
        theta: None,
        path_length: None,
        seconds: 0.0,
        passed: false,
        message: String::new(),
    };
    if case.scale == Scale::Paper {
        match mission.encode(mission.file.k) {
            Ok((model, art)) => {
                let lp = crate::solver::export_lp(&model);
                result.status = "Exported".into();
                result.counts = Some(CountsRecord::from(&art.counts));
                result.passed = true;
                result.message = format!("{} bytes of LP", lp.len());
            }
            Err(e) => {
                result.status = "Error".into();
                result.message = e.to_string();
            }
        }
        result.seconds = started.elapsed().as_secs_f64();
        return result;
    }
    let cfg = SolverConfig {
        time_limit,
        ..SolverConfig::default()
    };
    match mission.synthesize(mission.file.k, &cfg) {
        Ok(run) => {
            result.status = format!("{:?}", run.status);
            result.counts = Some(CountsRecord::from(&run.counts));
            result.theta = run.verification.as_ref().map(|v| v.theta);
            result.path_length = run.trajectory.as_ref().map(|t| t.path_length());
            let optimal = run.status == crate::milp::SolveStatus::Optimal;
            let theta_ok = match (case.expected.theta_min, result.theta) {
                (Some(min), Some(th)) => th >= min - crate::synthesis::VERIFY_TOL,
                (None, _) => true,
                _ => false,
            };
            result.passed = if case.expected.feasible {
                optimal && run.verified(&mission) && theta_ok
            } else {
                run.status == crate::milp::SolveStatus::Infeasible
            };
            if !result.passed {
                result.message = "expectation not met".into();
            }
        }
        Err(e) => {
            result.status = "Error".into();
            result.message = e.to_string();
        }
    }
    result.seconds = started.elapsed().as_secs_f64();
    result
}

/// Log-log least-squares growth exponents of the encoding size in `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub ks: Vec<usize>,
    pub binaries: Vec<usize>,
    pub continuous: Vec<usize>,
    pub binary_exponent: f64,
    pub continuous_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScalingError {
    #[error("need at least 3 values of K spanning a factor of 4")]
    TooFewPoints,
    #[error(transparent)]
    Encode(#[from] crate::encoder::EncodeError),
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Encode `template` for every `K` and fit the growth of the counts.
pub fn measure_scaling(template: &Mission, ks: &[usize]) -> Result<ScalingReport, ScalingError> {
    let (lo, hi) = (ks.iter().min().copied(), ks.iter().max().copied());
    match (lo, hi) {
        (Some(lo), Some(hi)) if ks.len() >= 3 && hi >= 4 * lo => {}
        _ => return Err(ScalingError::TooFewPoints),
    }
    let mut binaries = Vec::new();
    let mut continuous = Vec::new();
    for &k in ks {
        let (_, art) = template.encode(k)?;
        binaries.push(art.counts.num_binary);
        continuous.push(art.counts.num_continuous);
    }
    let x: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let fit = |v: &[usize]| log_log_slope(&x, &v.iter().map(|&c| c as f64).collect::<Vec<_>>());
    Ok(ScalingReport {
        ks: ks.to_vec(),
        binary_exponent: fit(&binaries),
        continuous_exponent: fit(&continuous),
        binaries,
        continuous,
    })
}

/// Templates for the scaling experiment: a nested `F G` formula and a single
/// bounded `F` over one region.
pub fn scaling_template(nested: bool) -> Mission {
    let formula = if nested { "F(G[0,2] R1)" } else { "F[2,8] R1" };
    mission(
        if nested { "scaling-nested" } else { "scaling-single" },
        [10.0, 10.0],
        20.0,
        vec![RegionSpec::rect("R1", 2.0, 2.0, 5.0, 5.0)],
        formula,
        8,
        0.5,
        None,
        None,
    )
    .load()
    .expect("template is valid")
}

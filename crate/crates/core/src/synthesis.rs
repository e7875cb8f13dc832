//! End-to-end synthesis: encode a mission, solve it, read the trajectory back
//! and re-check it with the exact monitor.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::encoder::{encode_mission, EncodeError, EncodingArtifacts, EncodingCounts, SynthesisMode};
use crate::geometry::{ConvexRegion, PwlTrajectory};
use crate::milp::{MilpModel, MilpSolution, SolveStatus};
use crate::mission::{CountsRecord, Mission, SynthesisReport};
use crate::monitor::{Instance, MonitorError};
use crate::solver::{solve_with_stats, SolveStats, SolverConfig, SolverError};
use crate::{Rational, Scalar};

/// Slack allowed between the monitored root robustness and `theta_star`.
pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Monitor(#[from] MonitorError),
}

/// Monitor verdict on a trajectory, computed in exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub satisfied: bool,
    /// Root time robustness on the mission's side (`±inf` as `f64` infinities).
    pub theta: f64,
}

impl Mission {
    pub fn verify(&self, traj: &PwlTrajectory<f64>) -> Result<Verification, MonitorError> {
        let f = self.resolved_formula();
        let exact: PwlTrajectory<Rational> = traj.convert();
        let regions: BTreeMap<String, ConvexRegion<Rational>> = self
            .regions
            .iter()
            .map(|(k, r)| (k.clone(), r.convert()))
            .collect();
        let eps = Rational::from_f64_lossy(self.workspace.epsilon);
        let inst = Instance::new(&f, &exact, &regions, &eps)?;
        Ok(Verification {
            satisfied: inst.qualitative().satisfied(),
            theta: inst.robustness(self.file.side).root().to_f64(),
        })
    }

    /// Whether a verdict meets the mission's requirement.
    pub fn accepts(&self, v: &Verification) -> bool {
        if self.file.theta_star == 0.0 {
            v.satisfied
        } else {
            v.satisfied && v.theta >= self.file.theta_star - VERIFY_TOL
        }
    }

    pub fn encode(&self, k: usize) -> Result<(MilpModel, EncodingArtifacts), EncodeError> {
        encode_mission(&self.synthesis_problem_with_k(k))
    }

    /// Encode with `k` waypoints and solve with the built-in solver.
    pub fn synthesize(&self, k: usize, cfg: &SolverConfig) -> Result<SynthesisRun, SynthesisError> {
        let started = Instant::now();
        let (model, art) = self.encode(k)?;
        let (solution, stats) = solve_with_stats(&model, cfg)?;
        self.finish(k, &art, solution, stats, started)
    }

    /// Build a run from an externally obtained assignment of `model`.
    pub fn adopt_solution(
        &self,
        k: usize,
        art: &EncodingArtifacts,
        solution: MilpSolution,
    ) -> Result<SynthesisRun, SynthesisError> {
        self.finish(k, art, solution, SolveStats::default(), Instant::now())
    }

    fn finish(
        &self,
        k: usize,
        art: &EncodingArtifacts,
        solution: MilpSolution,
        stats: SolveStats,
        started: Instant,
    ) -> Result<SynthesisRun, SynthesisError> {
        let mut run = SynthesisRun {
            k,
            status: solution.status,
            counts: art.counts.clone(),
            stats,
            trajectory: None,
            verification: None,
            report: None,
        };
        if !solution.has_assignment() {
            return Ok(run);
        }
        let traj = art.trajectory(&solution);
        let verdict = self.verify(&traj)?;
        let qualitative = self.synthesis_problem_with_k(k).mode == SynthesisMode::Qualitative;
        run.report = Some(SynthesisReport {
            mission: self.file.name.clone(),
            status: format!("{:?}", solution.status),
            k,
            objective: solution.objective,
            theta_milp: if qualitative { f64::NAN } else { art.root_value(&solution) },
            theta_monitor: verdict.theta,
            satisfied: verdict.satisfied,
            path_length: traj.path_length(),
            counts: CountsRecord::from(&art.counts),
            nodes: run.stats.nodes,
            seconds: Some(started.elapsed().as_secs_f64()),
        });
        run.trajectory = Some(traj);
        run.verification = Some(verdict);
        Ok(run)
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisRun {
    pub k: usize,
    pub status: SolveStatus,
    pub counts: EncodingCounts,
    pub stats: SolveStats,
    pub trajectory: Option<PwlTrajectory<f64>>,
    pub verification: Option<Verification>,
    pub report: Option<SynthesisReport>,
}

impl SynthesisRun {
    /// A trajectory was found and the monitor agrees with the requirement.
    pub fn verified(&self, mission: &Mission) -> bool {
        self.verification.as_ref().is_some_and(|v| mission.accepts(v))
    }
}

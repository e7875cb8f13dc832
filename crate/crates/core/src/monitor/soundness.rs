use std::collections::BTreeMap;

use serde::Serialize;

use super::{Instance, MonitorError, Robustness, Side};
use crate::geometry::{ConvexRegion, PwlTrajectory};
use crate::stl::Formula;
use crate::Scalar;

/// A (subformula, segment, side) whose robustness sign disagrees with the
/// qualitative verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Witness<T: Scalar> {
    pub subformula: String,
    pub segment: usize,
    pub side: Side,
    pub theta: Robustness<T>,
    pub sat: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SoundnessReport<T: Scalar> {
    pub checked: usize,
    pub witnesses: Vec<Witness<T>>,
}

impl<T: Scalar> SoundnessReport<T> {
    pub fn is_sound(&self) -> bool {
        self.witnesses.is_empty()
    }

    pub fn first_counterexample(&self) -> Option<&Witness<T>> {
        self.witnesses.first()
    }
}

/// Check that a strictly positive robustness implies satisfaction and a
/// strictly negative one implies violation, for every subformula, segment
/// and side. Zero robustness carries no sign information and is skipped.
///
/// Run this with [`crate::Rational`] to avoid floating-point sign errors.
pub fn check_soundness<T: Scalar>(
    f: &Formula,
    traj: &PwlTrajectory<T>,
    regions: &BTreeMap<String, ConvexRegion<T>>,
    eps: &T,
) -> Result<SoundnessReport<T>, MonitorError> {
    let inst = Instance::new(f, traj, regions, eps)?;
    let sat = inst.qualitative();
    let mut report = SoundnessReport {
        checked: 0,
        witnesses: Vec::new(),
    };
    for side in [Side::Right, Side::Left] {
        let rob = inst.robustness(side);
        for (k, row) in rob.values.iter().enumerate() {
            for (i, theta) in row.iter().enumerate() {
                let z = sat.get(k, i);
                let bad = (theta.is_positive() && !z) || (theta.is_negative() && z);
                if theta.is_positive() || theta.is_negative() {
                    report.checked += 1;
                }
                if bad {
                    report.witnesses.push(Witness {
                        subformula: inst.subformulas.texts[k].clone(),
                        segment: i,
                        side,
                        theta: theta.clone(),
                        sat: z,
                    });
                }
            }
        }
    }
    Ok(report)
}

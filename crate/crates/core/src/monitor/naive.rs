//! Direct recursive transcription of the semantics, with no memoization and
//! no range lookups. Used as a reference for the optimized evaluator.

use std::collections::BTreeMap;

use super::{MonitorError, Robustness, Side};
use crate::geometry::{segment_inside, segment_outside, ConvexRegion, PwlTrajectory};
use crate::stl::Formula;
use crate::Scalar;

struct Ctx<'a, T> {
    traj: &'a PwlTrajectory<T>,
    regions: &'a BTreeMap<String, ConvexRegion<T>>,
    eps: &'a T,
}

impl<T: Scalar> Ctx<'_, T> {
    fn label(&self, f: &Formula, i: usize) -> Result<bool, MonitorError> {
        let (name, positive) = match f {
            Formula::Atom(n) => (n, true),
            Formula::NegAtom(n) => (n, false),
            _ => unreachable!("label of non-atom"),
        };
        let r = self
            .regions
            .get(name)
            .ok_or_else(|| MonitorError::UnboundAtom(name.clone()))?;
        let (p0, p1) = (self.traj.p(i), self.traj.p(i + 1));
        Ok(if positive {
            segment_inside(r, p0, p1, self.eps)
        } else {
            segment_outside(r, p0, p1, self.eps)
        })
    }

    fn t(&self, k: usize) -> T {
        self.traj.t(k).clone()
    }

    fn ab(i: &Option<crate::stl::Interval>) -> Result<(T, T), MonitorError> {
        let i = i.ok_or(MonitorError::UnresolvedInterval)?;
        Ok((T::from_f64_lossy(i.a), T::from_f64_lossy(i.b)))
    }

    fn touches(&self, j: usize, lo: &T, hi: &T) -> bool {
        self.t(j) <= *hi && self.t(j + 1) >= *lo
    }

    fn sat(&self, f: &Formula, i: usize) -> Result<bool, MonitorError> {
        let n = self.traj.num_segments();
        Ok(match f {
            Formula::Atom(_) | Formula::NegAtom(_) => self.label(f, i)?,
            Formula::And(cs) => {
                let mut all = true;
                for c in cs {
                    all &= self.sat(c, i)?;
                }
                all
            }
            Formula::Or(cs) => {
                let mut any = false;
                for c in cs {
                    any |= self.sat(c, i)?;
                }
                any
            }
            Formula::Always(iv, c) => {
                let (a, b) = Self::ab(iv)?;
                let (lo, hi) = (self.t(i) + a, self.t(i + 1) + b);
                let mut all = true;
                for j in 0..n {
                    if self.touches(j, &lo, &hi) {
                        all &= self.sat(c, j)?;
                    }
                }
                all
            }
            Formula::Eventually(iv, c) => {
                let (a, b) = Self::ab(iv)?;
                if self.t(i + 1) - self.t(i) > b.clone() - a.clone() {
                    return Ok(false);
                }
                let (lo, hi) = (self.t(i + 1) + a, self.t(i) + b);
                let mut any = false;
                for j in 0..n {
                    if self.touches(j, &lo, &hi) {
                        any |= self.sat(c, j)?;
                    }
                }
                any
            }
            Formula::Until(iv, l, r) => {
                let (a, b) = Self::ab(iv)?;
                if self.t(i + 1) - self.t(i) > b.clone() - a.clone() {
                    return Ok(false);
                }
                let (lo, hi) = (self.t(i + 1) + a, self.t(i) + b.clone());
                let (plo, phi) = (self.t(i), self.t(i + 1) + b);
                let mut any = false;
                for j in 0..n {
                    if !self.touches(j, &lo, &hi) {
                        continue;
                    }
                    let mut holds = self.sat(r, j)?;
                    for k in 0..=j {
                        if self.touches(k, &plo, &phi) {
                            holds &= self.sat(l, k)?;
                        }
                    }
                    any |= holds;
                }
                any
            }
        })
    }

    fn theta(&self, f: &Formula, i: usize, side: Side) -> Result<Robustness<T>, MonitorError> {
        let n = self.traj.num_segments();
        Ok(match f {
            Formula::Atom(_) | Formula::NegAtom(_) => {
                let own = self.label(f, i)?;
                let mut acc = T::zero();
                match side {
                    Side::Right => {
                        // extent of the run of successors sharing the label
                        let mut end = i;
                        while end + 1 < n && self.label(f, end + 1)? == own {
                            end += 1;
                        }
                        for j in (i + 1..=end).rev() {
                            acc = self.traj.duration(j) + acc;
                        }
                    }
                    Side::Left => {
                        let mut start = i;
                        while start > 0 && self.label(f, start - 1)? == own {
                            start -= 1;
                        }
                        for j in start..i {
                            acc = self.traj.duration(j) + acc;
                        }
                    }
                }
                Robustness::Finite(if own { acc } else { -acc })
            }
            Formula::And(cs) => {
                let mut v = Robustness::PosInf;
                for c in cs {
                    v = v.meet(self.theta(c, i, side)?);
                }
                v
            }
            Formula::Or(cs) => {
                let mut v = Robustness::NegInf;
                for c in cs {
                    v = v.join(self.theta(c, i, side)?);
                }
                v
            }
            Formula::Always(iv, c) => {
                let (a, b) = Self::ab(iv)?;
                let (lo, hi) = (self.t(i) + a, self.t(i + 1) + b);
                let mut v = Robustness::PosInf;
                for j in 0..n {
                    if self.touches(j, &lo, &hi) {
                        v = v.meet(self.theta(c, j, side)?);
                    }
                }
                v
            }
            Formula::Eventually(iv, c) => {
                let (a, b) = Self::ab(iv)?;
                if self.t(i + 1) - self.t(i) > b.clone() - a.clone() {
                    return Ok(Robustness::NegInf);
                }
                let (lo, hi) = (self.t(i + 1) + a, self.t(i) + b);
                let mut v = Robustness::NegInf;
                for j in 0..n {
                    if self.touches(j, &lo, &hi) {
                        v = v.join(self.theta(c, j, side)?);
                    }
                }
                v
            }
            Formula::Until(iv, l, r) => {
                let (a, b) = Self::ab(iv)?;
                if self.t(i + 1) - self.t(i) > b.clone() - a.clone() {
                    return Ok(Robustness::NegInf);
                }
                let (lo, hi) = (self.t(i + 1) + a, self.t(i) + b.clone());
                let (plo, phi) = (self.t(i), self.t(i + 1) + b);
                let mut v = Robustness::NegInf;
                for j in 0..n {
                    if !self.touches(j, &lo, &hi) {
                        continue;
                    }
                    let mut prefix = Robustness::PosInf;
                    for k in 0..=j {
                        if self.touches(k, &plo, &phi) {
                            prefix = prefix.meet(self.theta(l, k, side)?);
                        }
                    }
                    v = v.join(self.theta(r, j, side)?.meet(prefix));
                }
                v
            }
        })
    }
}

/// Qualitative value of `f` on segment `i`.
pub fn sat_at<T: Scalar>(
    f: &Formula,
    traj: &PwlTrajectory<T>,
    regions: &BTreeMap<String, ConvexRegion<T>>,
    eps: &T,
    i: usize,
) -> Result<bool, MonitorError> {
    Ctx { traj, regions, eps }.sat(f, i)
}

/// Time robustness of `f` on segment `i`.
pub fn robustness_at<T: Scalar>(
    f: &Formula,
    traj: &PwlTrajectory<T>,
    regions: &BTreeMap<String, ConvexRegion<T>>,
    eps: &T,
    i: usize,
    side: Side,
) -> Result<Robustness<T>, MonitorError> {
    Ctx { traj, regions, eps }.theta(f, i, side)
}

//! STL formulas in negation normal form.
//!
//! The AST is deliberately small: atoms and negated atoms name convex
//! regions, `And`/`Or` are n-ary, and the three temporal operators carry an
//! optional interval. A missing interval stands for the whole mission horizon
//! and is filled in by [`Formula::resolve_horizon`].

mod parser;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use parser::{parse_formula, ParseError};

/// Closed time window `[a, b]` in seconds, `0 <= a <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self, IntervalError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(IntervalError::NonFinite);
        }
        if a < 0.0 || b < a {
            return Err(IntervalError::Negative { a, b });
        }
        Ok(Self { a, b })
    }

    /// Width `b - a`.
    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntervalError {
    #[error("interval bounds must be finite")]
    NonFinite,
    #[error("invalid interval [{a}, {b}]: need 0 <= a <= b")]
    Negative { a: f64, b: f64 },
}

/// STL formula in negation normal form.
///
/// Temporal operators hold `None` until the mission horizon is known.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(String),
    NegAtom(String),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Always(Option<Interval>, Box<Formula>),
    Eventually(Option<Interval>, Box<Formula>),
    Until(Option<Interval>, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn not_atom(name: impl Into<String>) -> Self {
        Formula::NegAtom(name.into())
    }

    pub fn always(a: f64, b: f64, child: Formula) -> Self {
        Formula::Always(Some(Interval { a, b }), Box::new(child))
    }

    pub fn eventually(a: f64, b: f64, child: Formula) -> Self {
        Formula::Eventually(Some(Interval { a, b }), Box::new(child))
    }

    pub fn until(a: f64, b: f64, lhs: Formula, rhs: Formula) -> Self {
        Formula::Until(Some(Interval { a, b }), Box::new(lhs), Box::new(rhs))
    }

    pub fn is_temporal(&self) -> bool {
        matches!(
            self,
            Formula::Always(..) | Formula::Eventually(..) | Formula::Until(..)
        )
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) => Vec::new(),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().collect(),
            Formula::Always(_, c) | Formula::Eventually(_, c) => vec![c.as_ref()],
            Formula::Until(_, l, r) => vec![l.as_ref(), r.as_ref()],
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .iter()
            .map(|c| c.depth())
            .max()
            .unwrap_or(0)
    }

    /// Region names referenced by atoms, sorted and deduplicated.
    pub fn region_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_regions(&mut out);
        out
    }

    fn collect_regions(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(n) | Formula::NegAtom(n) => {
                out.insert(n.clone());
            }
            _ => {
                for c in self.children() {
                    c.collect_regions(out);
                }
            }
        }
    }

    /// Replace every missing interval with `[0, horizon]`.
    pub fn resolve_horizon(&self, horizon: f64) -> Formula {
        let fill = |i: &Option<Interval>| Some(i.unwrap_or(Interval { a: 0.0, b: horizon }));
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) => self.clone(),
            Formula::And(cs) => Formula::And(cs.iter().map(|c| c.resolve_horizon(horizon)).collect()),
            Formula::Or(cs) => Formula::Or(cs.iter().map(|c| c.resolve_horizon(horizon)).collect()),
            Formula::Always(i, c) => Formula::Always(fill(i), Box::new(c.resolve_horizon(horizon))),
            Formula::Eventually(i, c) => {
                Formula::Eventually(fill(i), Box::new(c.resolve_horizon(horizon)))
            }
            Formula::Until(i, l, r) => Formula::Until(
                fill(i),
                Box::new(l.resolve_horizon(horizon)),
                Box::new(r.resolve_horizon(horizon)),
            ),
        }
    }

    /// True when every temporal operator carries an explicit interval.
    pub fn is_resolved(&self) -> bool {
        match self {
            Formula::Always(None, _) | Formula::Eventually(None, _) | Formula::Until(None, ..) => {
                false
            }
            _ => self.children().iter().all(|c| c.is_resolved()),
        }
    }

    /// Structural validity: n-ary nodes have at least two children, names
    /// are nonempty identifiers, intervals are well formed.
    pub fn validate(&self) -> Result<(), FormulaError> {
        match self {
            Formula::Atom(n) | Formula::NegAtom(n) => {
                if !is_identifier(n) {
                    return Err(FormulaError::BadName(n.clone()));
                }
            }
            Formula::And(cs) | Formula::Or(cs) => {
                if cs.len() < 2 {
                    return Err(FormulaError::Arity(cs.len()));
                }
            }
            Formula::Always(Some(i), _)
            | Formula::Eventually(Some(i), _)
            | Formula::Until(Some(i), ..) => {
                Interval::new(i.a, i.b)?;
            }
            _ => {}
        }
        self.children().iter().try_for_each(|c| c.validate())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormulaError {
    #[error("region name {0:?} is not an identifier")]
    BadName(String),
    #[error("n-ary operator with {0} children (need at least 2)")]
    Arity(usize),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !matches!(s, "G" | "F" | "U")
}

/// Render a formula in the textual DSL accepted by [`parse_formula`].
pub fn format_formula(f: &Formula) -> String {
    f.to_string()
}

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Top,
    /// Operand of `&`, `|` or `U`.
    Binary,
    /// Operand of `G`/`F`.
    Prefix,
}

fn write_interval(out: &mut fmt::Formatter<'_>, i: &Option<Interval>) -> fmt::Result {
    match i {
        Some(i) => write!(out, "[{},{}]", i.a, i.b),
        None => Ok(()),
    }
}

fn write_formula(out: &mut fmt::Formatter<'_>, f: &Formula, slot: Slot) -> fmt::Result {
    match f {
        Formula::Atom(n) => write!(out, "{n}"),
        Formula::NegAtom(n) if slot == Slot::Binary => write!(out, "(!{n})"),
        Formula::NegAtom(n) => write!(out, "!{n}"),
        Formula::And(cs) | Formula::Or(cs) => {
            let sep = if matches!(f, Formula::And(_)) { " & " } else { " | " };
            let wrap = slot != Slot::Top;
            if wrap {
                write!(out, "(")?;
            }
            for (k, c) in cs.iter().enumerate() {
                if k > 0 {
                    write!(out, "{sep}")?;
                }
                // Nested n-ary nodes and untils are grouped explicitly so the
                // parser rebuilds the same tree.
                let grouped = matches!(c, Formula::And(_) | Formula::Or(_));
                if grouped {
                    write!(out, "(")?;
                    write_formula(out, c, Slot::Top)?;
                    write!(out, ")")?;
                } else {
                    write_formula(out, c, Slot::Binary)?;
                }
            }
            if wrap {
                write!(out, ")")?;
            }
            Ok(())
        }
        Formula::Always(i, c) | Formula::Eventually(i, c) => {
            write!(out, "{}", if matches!(f, Formula::Always(..)) { "G" } else { "F" })?;
            write_interval(out, i)?;
            match c.as_ref() {
                Formula::Atom(_) | Formula::NegAtom(_) | Formula::Always(..) | Formula::Eventually(..) => {
                    write!(out, " ")?;
                    write_formula(out, c, Slot::Prefix)
                }
                _ => {
                    write!(out, "(")?;
                    write_formula(out, c, Slot::Top)?;
                    write!(out, ")")
                }
            }
        }
        Formula::Until(i, l, r) => {
            let wrap = slot != Slot::Top;
            if wrap {
                write!(out, "(")?;
            }
            write_until_operand(out, l)?;
            write!(out, " U")?;
            write_interval(out, i)?;
            write!(out, " ")?;
            write_until_operand(out, r)?;
            if wrap {
                write!(out, ")")?;
            }
            Ok(())
        }
    }
}

fn write_until_operand(out: &mut fmt::Formatter<'_>, f: &Formula) -> fmt::Result {
    match f {
        Formula::Atom(_) | Formula::NegAtom(_) => write_formula(out, f, Slot::Binary),
        _ => {
            write!(out, "(")?;
            write_formula(out, f, Slot::Top)?;
            write!(out, ")")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, Slot::Top)
    }
}

/// Structural census used for complexity accounting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormulaStats {
    /// Number of `G`/`F`/`U` nodes.
    pub num_temporal_ops: usize,
    /// Number of atom leaves (plain or negated).
    pub num_atoms: usize,
    /// Number of distinct regions referenced.
    pub num_regions: usize,
    /// Largest count of temporal operators on a root-to-leaf path.
    pub max_nesting: usize,
    /// Whether the formula qualifies for the linear-size encoding.
    pub single_temporal_op: bool,
}

pub fn analyze(f: &Formula) -> FormulaStats {
    fn temporal_count(f: &Formula) -> usize {
        usize::from(f.is_temporal()) + f.children().iter().map(|c| temporal_count(c)).sum::<usize>()
    }
    fn atom_count(f: &Formula) -> usize {
        match f {
            Formula::Atom(_) | Formula::NegAtom(_) => 1,
            _ => f.children().iter().map(|c| atom_count(c)).sum(),
        }
    }
    fn nesting(f: &Formula) -> usize {
        usize::from(f.is_temporal()) + f.children().iter().map(|c| nesting(c)).max().unwrap_or(0)
    }
    fn temporal_over_atoms(f: &Formula) -> bool {
        f.is_temporal()
            && f
                .children()
                .iter()
                .all(|c| matches!(c, Formula::Atom(_) | Formula::NegAtom(_)))
    }

    let num_temporal_ops = temporal_count(f);
    let single_temporal_op = match f {
        _ if f.is_temporal() => num_temporal_ops == 1,
        Formula::And(cs) | Formula::Or(cs) => cs.iter().all(temporal_over_atoms),
        _ => false,
    };
    FormulaStats {
        num_temporal_ops,
        num_atoms: atom_count(f),
        num_regions: f.region_names().len(),
        max_nesting: nesting(f),
        single_temporal_op,
    }
}

//! Syntax of LTL over finite traces and its boolean semantics.
//!
//! A [`Path`] is a finite sequence of states, each a fixed-width vector of
//! reals. Atomic propositions compare two entries of the current state.
//! Every constraint is false on the empty path; in particular `Next c` is
//! false at the final step of a trace, so `!(X c)` and `X !c` disagree there.

use std::fmt;

use crate::error::{Error, Operator, Result};
use crate::plan::Plan;

/// Index into a state vector. Signed so that out-of-range values can be
/// represented and rejected by [`validate`].
pub type StateIndex = i64;

/// Comparison of two entries of the current state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comp {
    Less(StateIndex, StateIndex),
    Lequal(StateIndex, StateIndex),
    Equal(StateIndex, StateIndex),
    Nequal(StateIndex, StateIndex),
}

impl Comp {
    pub fn indices(self) -> (StateIndex, StateIndex) {
        match self {
            Comp::Less(a, b) | Comp::Lequal(a, b) | Comp::Equal(a, b) | Comp::Nequal(a, b) => {
                (a, b)
            }
        }
    }

    /// Rebuilds the comparison with both indices passed through `f`.
    pub fn map_indices(self, mut f: impl FnMut(StateIndex) -> StateIndex) -> Comp {
        match self {
            Comp::Less(a, b) => Comp::Less(f(a), f(b)),
            Comp::Lequal(a, b) => Comp::Lequal(f(a), f(b)),
            Comp::Equal(a, b) => Comp::Equal(f(a), f(b)),
            Comp::Nequal(a, b) => Comp::Nequal(f(a), f(b)),
        }
    }

    /// Truth value on a single state. Indices must already be validated.
    pub(crate) fn holds(self, state: &[f64]) -> bool {
        let (a, b) = self.indices();
        let (x, y) = (state[a as usize], state[b as usize]);
        match self {
            Comp::Less(..) => x < y,
            Comp::Lequal(..) => x <= y,
            Comp::Equal(..) => x == y,
            Comp::Nequal(..) => x != y,
        }
    }

    pub fn negate(self) -> Comp {
        match self {
            Comp::Less(a, b) => Comp::Lequal(b, a),
            Comp::Lequal(a, b) => Comp::Less(b, a),
            Comp::Equal(a, b) => Comp::Nequal(a, b),
            Comp::Nequal(a, b) => Comp::Equal(a, b),
        }
    }
}

/// An LTL_f constraint. Equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constraint {
    Comp(Comp),
    And(Box<Constraint>, Box<Constraint>),
    Or(Box<Constraint>, Box<Constraint>),
    Next(Box<Constraint>),
    Always(Box<Constraint>),
    Eventually(Box<Constraint>),
    /// Weak until: holds if the left side holds to the end of the trace.
    Until(Box<Constraint>, Box<Constraint>),
    /// Strong release: the left side must eventually hold.
    Release(Box<Constraint>, Box<Constraint>),
}

impl From<Comp> for Constraint {
    fn from(c: Comp) -> Self {
        Constraint::Comp(c)
    }
}

impl Constraint {
    pub fn less(a: StateIndex, b: StateIndex) -> Self {
        Constraint::Comp(Comp::Less(a, b))
    }

    pub fn lequal(a: StateIndex, b: StateIndex) -> Self {
        Constraint::Comp(Comp::Lequal(a, b))
    }

    pub fn equal(a: StateIndex, b: StateIndex) -> Self {
        Constraint::Comp(Comp::Equal(a, b))
    }

    pub fn nequal(a: StateIndex, b: StateIndex) -> Self {
        Constraint::Comp(Comp::Nequal(a, b))
    }

    pub fn and(a: Constraint, b: Constraint) -> Self {
        Constraint::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Constraint, b: Constraint) -> Self {
        Constraint::Or(Box::new(a), Box::new(b))
    }

    pub fn next(c: Constraint) -> Self {
        Constraint::Next(Box::new(c))
    }

    pub fn always(c: Constraint) -> Self {
        Constraint::Always(Box::new(c))
    }

    pub fn eventually(c: Constraint) -> Self {
        Constraint::Eventually(Box::new(c))
    }

    pub fn until(a: Constraint, b: Constraint) -> Self {
        Constraint::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Constraint, b: Constraint) -> Self {
        Constraint::Release(Box::new(a), Box::new(b))
    }

    pub fn operator(&self) -> Operator {
        match self {
            Constraint::Comp(_) => Operator::Comp,
            Constraint::And(..) => Operator::And,
            Constraint::Or(..) => Operator::Or,
            Constraint::Next(_) => Operator::Next,
            Constraint::Always(_) => Operator::Always,
            Constraint::Eventually(_) => Operator::Eventually,
            Constraint::Until(..) => Operator::Until,
            Constraint::Release(..) => Operator::Release,
        }
    }

    /// Height of the syntax tree; a single comparison has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Constraint::Comp(_) => 1,
            Constraint::Next(c) | Constraint::Always(c) | Constraint::Eventually(c) => {
                1 + c.depth()
            }
            Constraint::And(a, b)
            | Constraint::Or(a, b)
            | Constraint::Until(a, b)
            | Constraint::Release(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Visits every comparison, left to right.
    pub fn for_each_comp(&self, f: &mut impl FnMut(Comp)) {
        match self {
            Constraint::Comp(c) => f(*c),
            Constraint::Next(c) | Constraint::Always(c) | Constraint::Eventually(c) => {
                c.for_each_comp(f)
            }
            Constraint::And(a, b)
            | Constraint::Or(a, b)
            | Constraint::Until(a, b)
            | Constraint::Release(a, b) => {
                a.for_each_comp(f);
                b.for_each_comp(f);
            }
        }
    }

    /// Sorted, deduplicated list of every index some comparison reads.
    pub fn referenced_indices(&self) -> Vec<StateIndex> {
        let mut out = Vec::new();
        self.for_each_comp(&mut |c| {
            let (a, b) = c.indices();
            out.push(a);
            out.push(b);
        });
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Rebuilds the tree with every comparison passed through `f`.
    pub fn map_comps(&self, f: &mut impl FnMut(Comp) -> Comp) -> Constraint {
        let mut go = |c: &Constraint| Box::new(c.map_comps(f));
        match self {
            Constraint::Comp(c) => Constraint::Comp(f(*c)),
            Constraint::And(a, b) => {
                let a = go(a);
                Constraint::And(a, go(b))
            }
            Constraint::Or(a, b) => {
                let a = go(a);
                Constraint::Or(a, go(b))
            }
            Constraint::Next(c) => Constraint::Next(go(c)),
            Constraint::Always(c) => Constraint::Always(go(c)),
            Constraint::Eventually(c) => Constraint::Eventually(go(c)),
            Constraint::Until(a, b) => {
                let a = go(a);
                Constraint::Until(a, go(b))
            }
            Constraint::Release(a, b) => {
                let a = go(a);
                Constraint::Release(a, go(b))
            }
        }
    }
}

/// A finite trace of fixed-width real states, stored row-major.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Path {
    width: usize,
    values: Vec<f64>,
}

impl Path {
    /// An empty path whose states, once pushed, have `width` entries.
    pub fn new(width: usize) -> Self {
        Path {
            width,
            values: Vec::new(),
        }
    }

    /// Builds a path from row-major values. `values.len()` must be a
    /// multiple of `width`.
    pub fn from_flat(width: usize, values: Vec<f64>) -> Result<Self> {
        if !values.len().is_multiple_of(width) {
            return Err(Error::InvalidArgument(format!(
                "{} values do not fill rows of width {width}",
                values.len()
            )));
        }
        Ok(Path { width, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut path = Path::new(width);
        for row in rows {
            path.push(row.as_ref())?;
        }
        Ok(path)
    }

    pub fn push(&mut self, state: &[f64]) -> Result<()> {
        if self.values.is_empty() && self.width == 0 {
            self.width = state.len();
        }
        if state.len() != self.width {
            return Err(Error::RaggedRow {
                row: self.len(),
                expected: self.width,
                found: state.len(),
            });
        }
        self.values.extend_from_slice(state);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len().checked_div(self.width).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.width + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.values[i * self.width + j] = x;
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.width.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for state in self.states() {
            let row: Vec<String> = state.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Checks that every comparison index lies in `0..width`, reporting the
/// first offending index in left-to-right order.
pub fn validate(c: &Constraint, width: usize) -> Result<()> {
    let mut bad = None;
    c.for_each_comp(&mut |comp| {
        if bad.is_some() {
            return;
        }
        let (a, b) = comp.indices();
        for v in [a, b] {
            if v < 0 || v as u64 >= width as u64 {
                bad = Some(v);
                return;
            }
        }
    });
    match bad {
        Some(index) => Err(Error::IndexOutOfRange { index, width }),
        None => Ok(()),
    }
}

/// Truth value of `c` on `p`. The empty path satisfies nothing.
pub fn eval(c: &Constraint, p: &Path) -> Result<bool> {
    if p.is_empty() {
        return Ok(false);
    }
    validate(c, p.width())?;
    Ok(Plan::compile(c).eval(p))
}

/// Returns a constraint equivalent to the negation of `c` on every nonempty
/// path.
///
/// Only the fragment built from comparisons, `And`, `Or`, `Always` and
/// `Eventually` has a dual inside this syntax. `Next` would need a weak
/// next operator, and `Until`/`Release` duals depend on it.
pub fn not_constraint(c: &Constraint) -> Result<Constraint> {
    Ok(match c {
        Constraint::Comp(comp) => Constraint::Comp(comp.negate()),
        Constraint::And(a, b) => Constraint::or(not_constraint(a)?, not_constraint(b)?),
        Constraint::Or(a, b) => Constraint::and(not_constraint(a)?, not_constraint(b)?),
        Constraint::Always(c) => Constraint::eventually(not_constraint(c)?),
        Constraint::Eventually(c) => Constraint::always(not_constraint(c)?),
        Constraint::Next(_) | Constraint::Until(..) | Constraint::Release(..) => {
            return Err(Error::UnsupportedNegation(c.operator()))
        }
    })
}

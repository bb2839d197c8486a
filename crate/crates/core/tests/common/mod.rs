#![allow(dead_code)]

//! Independent oracles and generators shared by the integration tests.
//!
//! `rec_eval`, `rec_l` and `rec_dl` follow the structural recursion on
//! `s # ss` clause by clause, recursing on path slices. `suffix_eval` states
//! each operator as a quantifier over suffix positions instead.

use ltlf_loss::soft::{self, Gamma};
use ltlf_loss::{Comp, ConstBinding, Constraint, ParsedConstraint, Path};
use rand::Rng;
use proptest::prelude::*;

pub type States = Vec<Vec<f64>>;

pub fn states(p: &Path) -> States {
    p.states().map(<[f64]>::to_vec).collect()
}

pub fn path(states: &[Vec<f64>], width: usize) -> Path {
    let mut p = Path::new(width);
    for s in states {
        p.push(s).unwrap();
    }
    p
}

fn at(s: &[f64], v: i64) -> f64 {
    s[v as usize]
}

fn comp_holds(c: Comp, s: &[f64]) -> bool {
    match c {
        Comp::Less(a, b) => at(s, a) < at(s, b),
        Comp::Lequal(a, b) => at(s, a) <= at(s, b),
        Comp::Equal(a, b) => at(s, a) == at(s, b),
        Comp::Nequal(a, b) => at(s, a) != at(s, b),
    }
}

pub fn rec_eval(c: &Constraint, ss: &[Vec<f64>]) -> bool {
    let Some((s, rest)) = ss.split_first() else {
        return false;
    };
    match c {
        Constraint::Comp(k) => comp_holds(*k, s),
        Constraint::And(a, b) => rec_eval(a, ss) && rec_eval(b, ss),
        Constraint::Or(a, b) => rec_eval(a, ss) || rec_eval(b, ss),
        Constraint::Next(a) => rec_eval(a, rest),
        Constraint::Always(a) => rec_eval(a, ss) && (rest.is_empty() || rec_eval(c, rest)),
        Constraint::Eventually(a) => rec_eval(a, ss) || rec_eval(c, rest),
        Constraint::Until(a, b) => {
            (rec_eval(a, ss) && (rest.is_empty() || rec_eval(c, rest))) || rec_eval(b, ss)
        }
        Constraint::Release(a, b) => {
            ((rec_eval(b, ss) && rec_eval(c, rest)) || (rec_eval(a, ss) && rec_eval(b, ss)))
                && rec_eval(&Constraint::Eventually(a.clone()), ss)
        }
    }
}

/// Truth of `c` at position `k` of `ss`, by quantification over positions.
pub fn suffix_holds(c: &Constraint, ss: &[Vec<f64>], k: usize) -> bool {
    let n = ss.len();
    if k >= n {
        return false;
    }
    match c {
        Constraint::Comp(x) => comp_holds(*x, &ss[k]),
        Constraint::And(a, b) => suffix_holds(a, ss, k) && suffix_holds(b, ss, k),
        Constraint::Or(a, b) => suffix_holds(a, ss, k) || suffix_holds(b, ss, k),
        Constraint::Next(a) => k + 1 < n && suffix_holds(a, ss, k + 1),
        Constraint::Always(a) => (k..n).all(|l| suffix_holds(a, ss, l)),
        Constraint::Eventually(a) => (k..n).any(|l| suffix_holds(a, ss, l)),
        Constraint::Until(a, b) => {
            (k..n).any(|m| suffix_holds(b, ss, m) && (k..m).all(|l| suffix_holds(a, ss, l)))
                || (k..n).all(|l| suffix_holds(a, ss, l))
        }
        Constraint::Release(a, b) => {
            (k..n).any(|m| suffix_holds(a, ss, m) && (k..=m).all(|l| suffix_holds(b, ss, l)))
        }
    }
}

pub fn suffix_eval(c: &Constraint, ss: &[Vec<f64>]) -> bool {
    suffix_holds(c, ss, 0)
}

pub fn rec_l(c: &Constraint, ss: &[Vec<f64>], g: Gamma) -> f64 {
    let Some((s, rest)) = ss.split_first() else {
        return 1.0;
    };
    let max = |a, b| soft::max_gamma(g, a, b);
    let min = |a, b| soft::min_gamma(g, a, b);
    match c {
        Constraint::Comp(Comp::Lequal(a, b)) => max(at(s, *a) - at(s, *b), 0.0),
        Constraint::Comp(Comp::Nequal(a, b)) => soft::nequal_gamma(g, at(s, *a), at(s, *b)),
        Constraint::Comp(Comp::Less(a, b)) => max(
            rec_l(&Constraint::lequal(*a, *b), ss, g),
            rec_l(&Constraint::nequal(*a, *b), ss, g),
        ),
        Constraint::Comp(Comp::Equal(a, b)) => max(
            rec_l(&Constraint::lequal(*a, *b), ss, g),
            rec_l(&Constraint::lequal(*b, *a), ss, g),
        ),
        Constraint::And(a, b) => max(rec_l(a, ss, g), rec_l(b, ss, g)),
        Constraint::Or(a, b) => min(rec_l(a, ss, g), rec_l(b, ss, g)),
        Constraint::Next(a) => rec_l(a, rest, g),
        Constraint::Always(a) => max(
            rec_l(a, ss, g),
            if rest.is_empty() { 0.0 } else { rec_l(c, rest, g) },
        ),
        Constraint::Eventually(a) => min(rec_l(a, ss, g), rec_l(c, rest, g)),
        Constraint::Until(a, b) => min(
            rec_l(b, ss, g),
            max(
                rec_l(a, ss, g),
                if rest.is_empty() { 0.0 } else { rec_l(c, rest, g) },
            ),
        ),
        Constraint::Release(a, b) => max(
            rec_l(&Constraint::Eventually(a.clone()), ss, g),
            min(
                max(rec_l(a, ss, g), rec_l(b, ss, g)),
                max(rec_l(b, ss, g), rec_l(c, rest, g)),
            ),
        ),
    }
}

fn kron(j: i64, v: i64) -> f64 {
    if j == v {
        1.0
    } else {
        0.0
    }
}

pub fn rec_dl(c: &Constraint, ss: &[Vec<f64>], g: Gamma, i: i64, j: i64) -> f64 {
    let Some((s, rest)) = ss.split_first() else {
        return 0.0;
    };
    let l = |x: &Constraint, p: &[Vec<f64>]| rec_l(x, p, g);
    let dl = |x: &Constraint, p: &[Vec<f64>], i: i64| rec_dl(x, p, g, i, j);
    let dmax = |a, da, b, db| soft::dmax_gamma_ds(g, a, da, b, db).unwrap();
    let dmin = |a, da, b, db| soft::dmin_gamma_ds(g, a, da, b, db).unwrap();
    match c {
        Constraint::Comp(Comp::Lequal(a, b)) => {
            if i != 0 {
                0.0
            } else {
                soft::dlequal_gamma_ds(g, at(s, *a), kron(j, *a), at(s, *b), kron(j, *b)).unwrap()
            }
        }
        Constraint::Comp(Comp::Nequal(a, b)) => {
            if i != 0 {
                0.0
            } else {
                soft::dnequal_gamma_ds(g, at(s, *a), kron(j, *a), at(s, *b), kron(j, *b)).unwrap()
            }
        }
        Constraint::Comp(Comp::Less(a, b)) => {
            let (x, y) = (Constraint::lequal(*a, *b), Constraint::nequal(*a, *b));
            dmax(l(&x, ss), dl(&x, ss, i), l(&y, ss), dl(&y, ss, i))
        }
        Constraint::Comp(Comp::Equal(a, b)) => {
            let (x, y) = (Constraint::lequal(*a, *b), Constraint::lequal(*b, *a));
            dmax(l(&x, ss), dl(&x, ss, i), l(&y, ss), dl(&y, ss, i))
        }
        Constraint::And(a, b) => dmax(l(a, ss), dl(a, ss, i), l(b, ss), dl(b, ss, i)),
        Constraint::Or(a, b) => dmin(l(a, ss), dl(a, ss, i), l(b, ss), dl(b, ss, i)),
        Constraint::Next(a) => dl(a, rest, i - 1),
        Constraint::Always(a) => dmax(
            l(a, ss),
            dl(a, ss, i),
            if rest.is_empty() { 0.0 } else { l(c, rest) },
            if rest.is_empty() { 0.0 } else { dl(c, rest, i - 1) },
        ),
        Constraint::Eventually(a) => dmin(l(a, ss), dl(a, ss, i), l(c, rest), dl(c, rest, i - 1)),
        Constraint::Until(a, b) => {
            let tail_l = if rest.is_empty() { 0.0 } else { l(c, rest) };
            let tail_dl = if rest.is_empty() { 0.0 } else { dl(c, rest, i - 1) };
            dmin(
                l(b, ss),
                dl(b, ss, i),
                soft::max_gamma(g, l(a, ss), tail_l),
                dmax(l(a, ss), dl(a, ss, i), tail_l, tail_dl),
            )
        }
        Constraint::Release(a, b) => {
            let ev = Constraint::Eventually(a.clone());
            let la = l(a, ss);
            let lb = l(b, ss);
            let lr = l(c, rest);
            let left = soft::max_gamma(g, la, lb);
            let right = soft::max_gamma(g, lb, lr);
            dmax(
                l(&ev, ss),
                dl(&ev, ss, i),
                soft::min_gamma(g, left, right),
                dmin(
                    left,
                    dmax(la, dl(a, ss, i), lb, dl(b, ss, i)),
                    right,
                    dmax(lb, dl(b, ss, i), lr, dl(c, rest, i - 1)),
                ),
            )
        }
    }
}

pub const ALL_OPERATORS: [&str; 11] = [
    "Less", "Lequal", "Equal", "Nequal", "And", "Or", "Next", "Always", "Eventually", "Until",
    "Release",
];

/// Name of every node kind occurring in `c`.
pub fn kinds(c: &Constraint, out: &mut std::collections::BTreeSet<&'static str>) {
    let name = match c {
        Constraint::Comp(Comp::Less(..)) => "Less",
        Constraint::Comp(Comp::Lequal(..)) => "Lequal",
        Constraint::Comp(Comp::Equal(..)) => "Equal",
        Constraint::Comp(Comp::Nequal(..)) => "Nequal",
        Constraint::And(..) => "And",
        Constraint::Or(..) => "Or",
        Constraint::Next(_) => "Next",
        Constraint::Always(_) => "Always",
        Constraint::Eventually(_) => "Eventually",
        Constraint::Until(..) => "Until",
        Constraint::Release(..) => "Release",
    };
    out.insert(name);
    match c {
        Constraint::Comp(_) => {}
        Constraint::Next(a) | Constraint::Always(a) | Constraint::Eventually(a) => kinds(a, out),
        Constraint::And(a, b) | Constraint::Or(a, b) | Constraint::Until(a, b) | Constraint::Release(a, b) => {
            kinds(a, out);
            kinds(b, out);
        }
    }
}

/// Every constraint of at most `depth` levels over the given leaves.
pub fn enumerate(leaves: &[Constraint], depth: usize) -> Vec<Constraint> {
    if depth <= 1 {
        return leaves.to_vec();
    }
    let sub = enumerate(leaves, depth - 1);
    let mut out = leaves.to_vec();
    for a in &sub {
        out.push(Constraint::next(a.clone()));
        out.push(Constraint::always(a.clone()));
        out.push(Constraint::eventually(a.clone()));
    }
    for a in &sub {
        for b in &sub {
            out.push(Constraint::and(a.clone(), b.clone()));
            out.push(Constraint::or(a.clone(), b.clone()));
            out.push(Constraint::until(a.clone(), b.clone()));
            out.push(Constraint::release(a.clone(), b.clone()));
        }
    }
    out
}

/// Every path of length at most `max_len` with `width` columns drawn from
/// `values`.
pub fn all_paths(values: &[f64], width: usize, max_len: usize) -> Vec<States> {
    let mut states: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..width {
        states = states
            .into_iter()
            .flat_map(|s| {
                values.iter().map(move |&v| {
                    let mut t = s.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    let mut out: Vec<States> = vec![vec![]];
    let mut frontier: Vec<States> = vec![vec![]];
    for _ in 0..max_len {
        frontier = frontier
            .iter()
            .flat_map(|p| {
                states.iter().map(move |s| {
                    let mut q = p.clone();
                    q.push(s.clone());
                    q
                })
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

pub fn comp_strategy(width: usize) -> impl Strategy<Value = Comp> {
    let w = width as i64;
    (0..4u8, 0..w, 0..w).prop_map(|(op, a, b)| match op {
        0 => Comp::Less(a, b),
        1 => Comp::Lequal(a, b),
        2 => Comp::Equal(a, b),
        _ => Comp::Nequal(a, b),
    })
}

/// Constraints of depth at most `depth` reading columns below `width`.
pub fn constraint_strategy(width: usize, depth: u32) -> impl Strategy<Value = Constraint> {
    let leaf = comp_strategy(width).prop_map(Constraint::Comp);
    leaf.prop_recursive(depth.saturating_sub(1), 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Constraint::next),
            inner.clone().prop_map(Constraint::always),
            inner.clone().prop_map(Constraint::eventually),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Constraint::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Constraint::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Constraint::until(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Constraint::release(a, b)),
        ]
    })
}

pub fn path_strategy(width: usize, max_len: usize, value: impl Strategy<Value = f64> + Clone) -> impl Strategy<Value = Path> {
    prop::collection::vec(prop::collection::vec(value, width), 0..=max_len)
        .prop_map(move |rows| path(&rows, width))
}

/// Replaces the indices marked in `literal` by constant columns, numbered
/// the way the parser numbers them: first occurrence, left to right, after
/// the state columns.
pub fn with_literals(ast: &Constraint, literals: &[Option<f64>]) -> ParsedConstraint {
    let mut n = 0;
    let mut values: Vec<f64> = Vec::new();
    let ast = ast.map_comps(&mut |c| {
        c.map_indices(|i| match literals.get(n).copied().flatten() {
            Some(v) => {
                n += 1;
                let slot = match values.iter().position(|x| x.to_bits() == v.to_bits()) {
                    Some(s) => s,
                    None => {
                        values.push(v);
                        values.len() - 1
                    }
                };
                -(slot as i64) - 1
            }
            None => {
                n += 1;
                i
            }
        })
    });
    // Indices only referenced through literals no longer count as state.
    let mut max_state = -1i64;
    ast.for_each_comp(&mut |c| {
        let (a, b) = c.indices();
        max_state = max_state.max(a).max(b);
    });
    let base = max_state + 1;
    let ast = ast.map_comps(&mut |c| c.map_indices(|i| if i < 0 { base + (-i - 1) } else { i }));
    let bindings: Vec<ConstBinding> = values
        .iter()
        .enumerate()
        .map(|(s, &value)| ConstBinding {
            index: base + s as i64,
            value,
        })
        .collect();
    ParsedConstraint {
        width: (base as usize) + bindings.len(),
        ast,
        bindings,
    }
}

/// Random constraint of depth at most `depth`; every operator is equally
/// likely at each inner node.
pub fn random_constraint(rng: &mut impl Rng, width: usize, depth: usize) -> Constraint {
    let w = width as i64;
    if depth <= 1 || rng.gen_bool(0.2) {
        let (a, b) = (rng.gen_range(0..w), rng.gen_range(0..w));
        return match rng.gen_range(0..4) {
            0 => Constraint::less(a, b),
            1 => Constraint::lequal(a, b),
            2 => Constraint::equal(a, b),
            _ => Constraint::nequal(a, b),
        };
    }
    let sub = |rng: &mut _| random_constraint(rng, width, depth - 1);
    match rng.gen_range(0..7) {
        0 => Constraint::next(sub(rng)),
        1 => Constraint::always(sub(rng)),
        2 => Constraint::eventually(sub(rng)),
        3 => Constraint::and(sub(rng), sub(rng)),
        4 => Constraint::or(sub(rng), sub(rng)),
        5 => Constraint::until(sub(rng), sub(rng)),
        _ => Constraint::release(sub(rng), sub(rng)),
    }
}

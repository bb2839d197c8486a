//! Bottom-up evaluation tables.
//!
//! A constraint is flattened into post-order nodes (children before
//! parents). Each semantic function is then tabulated per node and per
//! suffix offset `k` (the suffix `p[k..]`), filling `k` from the end of the
//! path backwards. Column `k = n` stands for the empty suffix. Every cell is
//! computed by the same expression the structural recursion would use, so
//! results are bit-identical to it, but long paths need no call stack.

use crate::logic::{Comp, Constraint, Path};
use crate::soft::{self, max_gamma, min_gamma, nequal_gamma, Gamma};

#[derive(Debug, Clone, Copy)]
enum Node {
    Comp(Comp),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Always(usize),
    Eventually(usize),
    Until(usize, usize),
    /// `eventually` is an extra `Eventually(left)` node that release reads.
    Release {
        left: usize,
        right: usize,
        eventually: usize,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Plan {
    nodes: Vec<Node>,
}

/// Loss of every node on every suffix of one path.
#[derive(Debug, Clone)]
pub(crate) struct LossTable {
    stride: usize,
    values: Vec<f64>,
}

impl LossTable {
    #[inline]
    fn at(&self, node: usize, k: usize) -> f64 {
        self.values[node * self.stride + k]
    }

    pub(crate) fn root(&self) -> f64 {
        self.values[self.values.len() - self.stride]
    }
}

fn lequal_loss(gamma: Gamma, s: &[f64], a: i64, b: i64) -> f64 {
    max_gamma(gamma, s[a as usize] - s[b as usize], 0.0)
}

fn nequal_loss(gamma: Gamma, s: &[f64], a: i64, b: i64) -> f64 {
    nequal_gamma(gamma, s[a as usize], s[b as usize])
}

fn comp_loss(gamma: Gamma, comp: Comp, s: &[f64]) -> f64 {
    match comp {
        Comp::Lequal(a, b) => lequal_loss(gamma, s, a, b),
        Comp::Nequal(a, b) => nequal_loss(gamma, s, a, b),
        Comp::Less(a, b) => max_gamma(
            gamma,
            lequal_loss(gamma, s, a, b),
            nequal_loss(gamma, s, a, b),
        ),
        Comp::Equal(a, b) => max_gamma(
            gamma,
            lequal_loss(gamma, s, a, b),
            lequal_loss(gamma, s, b, a),
        ),
    }
}

#[inline]
fn seed(j: i64, v: i64) -> f64 {
    if j == v {
        1.0
    } else {
        0.0
    }
}

fn dlequal_loss(gamma: Gamma, s: &[f64], a: i64, b: i64, j: i64) -> f64 {
    soft::dlequal(gamma, s[a as usize], seed(j, a), s[b as usize], seed(j, b))
}

fn dnequal_loss(gamma: Gamma, s: &[f64], a: i64, b: i64, j: i64) -> f64 {
    soft::dnequal(gamma, s[a as usize], seed(j, a), s[b as usize], seed(j, b))
}

/// Derivative of a comparison loss w.r.t. entry `j` of the state it reads,
/// or w.r.t. an entry of some other state when `at_head` is false.
fn comp_derivative(gamma: Gamma, comp: Comp, s: &[f64], at_head: bool, j: i64) -> f64 {
    match comp {
        Comp::Lequal(a, b) => {
            if at_head {
                dlequal_loss(gamma, s, a, b, j)
            } else {
                0.0
            }
        }
        Comp::Nequal(a, b) => {
            if at_head {
                dnequal_loss(gamma, s, a, b, j)
            } else {
                0.0
            }
        }
        Comp::Less(a, b) => {
            let (dl, dn) = if at_head {
                (dlequal_loss(gamma, s, a, b, j), dnequal_loss(gamma, s, a, b, j))
            } else {
                (0.0, 0.0)
            };
            soft::dmax(
                gamma,
                lequal_loss(gamma, s, a, b),
                dl,
                nequal_loss(gamma, s, a, b),
                dn,
            )
        }
        Comp::Equal(a, b) => {
            let (d1, d2) = if at_head {
                (dlequal_loss(gamma, s, a, b, j), dlequal_loss(gamma, s, b, a, j))
            } else {
                (0.0, 0.0)
            };
            soft::dmax(
                gamma,
                lequal_loss(gamma, s, a, b),
                d1,
                lequal_loss(gamma, s, b, a),
                d2,
            )
        }
    }
}

impl Plan {
    pub(crate) fn compile(c: &Constraint) -> Plan {
        let mut plan = Plan { nodes: Vec::new() };
        plan.push(c);
        plan
    }

    fn push(&mut self, c: &Constraint) -> usize {
        let node = match c {
            Constraint::Comp(comp) => Node::Comp(*comp),
            Constraint::And(a, b) => Node::And(self.push(a), self.push(b)),
            Constraint::Or(a, b) => Node::Or(self.push(a), self.push(b)),
            Constraint::Next(c) => Node::Next(self.push(c)),
            Constraint::Always(c) => Node::Always(self.push(c)),
            Constraint::Eventually(c) => Node::Eventually(self.push(c)),
            Constraint::Until(a, b) => Node::Until(self.push(a), self.push(b)),
            Constraint::Release(a, b) => {
                let left = self.push(a);
                let right = self.push(b);
                self.nodes.push(Node::Eventually(left));
                Node::Release {
                    left,
                    right,
                    eventually: self.nodes.len() - 1,
                }
            }
        };
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Boolean semantics on a nonempty, validated path.
    pub(crate) fn eval(&self, p: &Path) -> bool {
        let n = p.len();
        let stride = n + 1;
        let mut t = vec![false; self.nodes.len() * stride];
        for (id, node) in self.nodes.iter().enumerate() {
            let row = id * stride;
            for k in (0..n).rev() {
                let at = |x: usize, k: usize| t[x * stride + k];
                let last = k + 1 == n;
                let v = match *node {
                    Node::Comp(comp) => comp.holds(p.state(k)),
                    Node::And(a, b) => at(a, k) && at(b, k),
                    Node::Or(a, b) => at(a, k) || at(b, k),
                    Node::Next(c) => at(c, k + 1),
                    Node::Always(c) => at(c, k) && (last || at(id, k + 1)),
                    Node::Eventually(c) => at(c, k) || at(id, k + 1),
                    Node::Until(a, b) => (at(a, k) && (last || at(id, k + 1))) || at(b, k),
                    Node::Release {
                        left,
                        right,
                        eventually,
                    } => {
                        ((at(right, k) && at(id, k + 1)) || (at(left, k) && at(right, k)))
                            && at(eventually, k)
                    }
                };
                t[row + k] = v;
            }
        }
        t[t.len() - stride]
    }

    /// Soft loss of every node on every suffix. Indices must be validated
    /// when the path is nonempty.
    pub(crate) fn losses(&self, p: &Path, gamma: Gamma) -> LossTable {
        let n = p.len();
        let stride = n + 1;
        let mut l = vec![0.0; self.nodes.len() * stride];
        for (id, node) in self.nodes.iter().enumerate() {
            let row = id * stride;
            l[row + n] = 1.0;
            for k in (0..n).rev() {
                let at = |x: usize, k: usize| l[x * stride + k];
                let last = k + 1 == n;
                let v = match *node {
                    Node::Comp(comp) => comp_loss(gamma, comp, p.state(k)),
                    Node::And(a, b) => max_gamma(gamma, at(a, k), at(b, k)),
                    Node::Or(a, b) => min_gamma(gamma, at(a, k), at(b, k)),
                    Node::Next(c) => at(c, k + 1),
                    Node::Always(c) => {
                        max_gamma(gamma, at(c, k), if last { 0.0 } else { at(id, k + 1) })
                    }
                    Node::Eventually(c) => min_gamma(gamma, at(c, k), at(id, k + 1)),
                    Node::Until(a, b) => min_gamma(
                        gamma,
                        at(b, k),
                        max_gamma(gamma, at(a, k), if last { 0.0 } else { at(id, k + 1) }),
                    ),
                    Node::Release {
                        left,
                        right,
                        eventually,
                    } => max_gamma(
                        gamma,
                        at(eventually, k),
                        min_gamma(
                            gamma,
                            max_gamma(gamma, at(left, k), at(right, k)),
                            max_gamma(gamma, at(right, k), at(id, k + 1)),
                        ),
                    ),
                };
                l[row + k] = v;
            }
        }
        LossTable { stride, values: l }
    }

    /// Partial derivative of the root loss w.r.t. path entry `(i, j)`,
    /// given the loss table of the same path. `gamma` must be positive and
    /// `i` must lie in `0..n`. `scratch` is reused between calls.
    pub(crate) fn derivative(
        &self,
        losses: &LossTable,
        p: &Path,
        gamma: Gamma,
        i: usize,
        j: i64,
        scratch: &mut Vec<f64>,
    ) -> f64 {
        let n = p.len();
        let stride = n + 1;
        debug_assert_eq!(stride, losses.stride);
        // Suffixes starting after step i do not read entry (i, j).
        scratch.clear();
        scratch.resize(self.nodes.len() * stride, 0.0);
        let d = scratch;
        let lv = |x: usize, k: usize| losses.at(x, k);
        for (id, node) in self.nodes.iter().enumerate() {
            let row = id * stride;
            for k in (0..=i).rev() {
                let dv = |x: usize, k: usize| d[x * stride + k];
                let last = k + 1 == n;
                let v = match *node {
                    Node::Comp(comp) => comp_derivative(gamma, comp, p.state(k), k == i, j),
                    Node::And(a, b) => soft::dmax(gamma, lv(a, k), dv(a, k), lv(b, k), dv(b, k)),
                    Node::Or(a, b) => soft::dmin(gamma, lv(a, k), dv(a, k), lv(b, k), dv(b, k)),
                    Node::Next(c) => dv(c, k + 1),
                    Node::Always(c) => {
                        let (rest, drest) = if last {
                            (0.0, 0.0)
                        } else {
                            (lv(id, k + 1), dv(id, k + 1))
                        };
                        soft::dmax(gamma, lv(c, k), dv(c, k), rest, drest)
                    }
                    Node::Eventually(c) => {
                        soft::dmin(gamma, lv(c, k), dv(c, k), lv(id, k + 1), dv(id, k + 1))
                    }
                    Node::Until(a, b) => {
                        let (rest, drest) = if last {
                            (0.0, 0.0)
                        } else {
                            (lv(id, k + 1), dv(id, k + 1))
                        };
                        soft::dmin(
                            gamma,
                            lv(b, k),
                            dv(b, k),
                            max_gamma(gamma, lv(a, k), rest),
                            soft::dmax(gamma, lv(a, k), dv(a, k), rest, drest),
                        )
                    }
                    Node::Release {
                        left,
                        right,
                        eventually,
                    } => {
                        let both = max_gamma(gamma, lv(left, k), lv(right, k));
                        let hold = max_gamma(gamma, lv(right, k), lv(id, k + 1));
                        soft::dmax(
                            gamma,
                            lv(eventually, k),
                            dv(eventually, k),
                            min_gamma(gamma, both, hold),
                            soft::dmin(
                                gamma,
                                both,
                                soft::dmax(
                                    gamma,
                                    lv(left, k),
                                    dv(left, k),
                                    lv(right, k),
                                    dv(right, k),
                                ),
                                hold,
                                soft::dmax(
                                    gamma,
                                    lv(right, k),
                                    dv(right, k),
                                    lv(id, k + 1),
                                    dv(id, k + 1),
                                ),
                            ),
                        )
                    }
                };
                d[row + k] = v;
            }
        }
        d[d.len() - stride]
    }

    /// Nesting depth of soft operators in the evaluation of the root on a
    /// path of length `n`. Each soft max or min moves the result by at
    /// most `γ·ln 2` and every operator is 1-Lipschitz, so the relaxed
    /// loss stays within `depth·γ·ln 2` of its hard counterpart, up to
    /// the bell terms of `!=` and `<` comparisons.
    pub(crate) fn soft_depth(&self, n: usize) -> usize {
        let stride = n + 1;
        let mut t = vec![0usize; self.nodes.len() * stride];
        for (id, node) in self.nodes.iter().enumerate() {
            let row = id * stride;
            for k in (0..n).rev() {
                let at = |x: usize, k: usize| t[x * stride + k];
                let v = match *node {
                    Node::Comp(Comp::Lequal(..)) => 1,
                    Node::Comp(Comp::Nequal(..)) => 0,
                    Node::Comp(_) => 2,
                    Node::And(a, b) | Node::Or(a, b) => 1 + at(a, k).max(at(b, k)),
                    Node::Next(c) => at(c, k + 1),
                    Node::Always(c) | Node::Eventually(c) => 1 + at(c, k).max(at(id, k + 1)),
                    Node::Until(a, b) => 1 + at(b, k).max(1 + at(a, k).max(at(id, k + 1))),
                    Node::Release {
                        left,
                        right,
                        eventually,
                    } => {
                        let inner = 1 + at(left, k).max(at(right, k)).max(at(id, k + 1));
                        1 + at(eventually, k).max(1 + inner)
                    }
                };
                t[row + k] = v;
            }
        }
        t[t.len() - stride]
    }
}

//! The soft constraint loss and its exact partial derivatives.
//!
//! `loss_l` tends to zero as the relaxation factor shrinks exactly when the
//! constraint holds on the path; `loss_dl` is its derivative with respect to
//! one path entry, built from the soft-operator derivatives by the chain rule.

use std::ops::{Index, IndexMut};
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::logic::{validate, Constraint, Path};
use crate::plan::Plan;
use crate::soft::Gamma;

/// Environment variable capping the threads used by gradient assembly.
pub const GRAD_THREADS_ENV: &str = "LTLF_GRAD_THREADS";

/// Dense row-major `rows × cols` matrix of partial derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GradMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl GradMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        GradMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }
}

impl Index<(usize, usize)> for GradMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for GradMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// A constraint validated against a path width and flattened for repeated
/// evaluation on paths of that width.
#[derive(Debug, Clone)]
pub struct CompiledConstraint {
    plan: Plan,
    width: usize,
    columns: Vec<usize>,
}

impl CompiledConstraint {
    pub fn new(c: &Constraint, width: usize) -> Result<Self> {
        validate(c, width)?;
        let columns = c
            .referenced_indices()
            .into_iter()
            .map(|v| v as usize)
            .collect();
        Ok(CompiledConstraint {
            plan: Plan::compile(c),
            width,
            columns,
        })
    }

    fn check(&self, p: &Path) -> Result<()> {
        if !p.is_empty() && p.width() != self.width {
            return Err(Error::DimensionMismatch {
                expected_rows: p.len(),
                expected_cols: self.width,
                found_rows: p.len(),
                found_cols: p.width(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, p: &Path) -> Result<bool> {
        self.check(p)?;
        Ok(!p.is_empty() && self.plan.eval(p))
    }

    pub fn loss(&self, p: &Path, gamma: Gamma) -> Result<f64> {
        self.check(p)?;
        if p.is_empty() {
            return Ok(1.0);
        }
        Ok(self.plan.losses(p, gamma).root())
    }

    pub fn derivative(&self, p: &Path, gamma: Gamma, i: i64, j: i64) -> Result<f64> {
        let gamma = gamma.require_soft()?;
        self.check(p)?;
        if i < 0 || i as u64 >= p.len() as u64 {
            return Ok(0.0);
        }
        let table = self.plan.losses(p, gamma);
        Ok(self
            .plan
            .derivative(&table, p, gamma, i as usize, j, &mut Vec::new()))
    }

    /// Loss together with its full gradient, using the shared thread cap.
    pub fn loss_and_grad(&self, p: &Path, gamma: Gamma) -> Result<(f64, GradMatrix)> {
        let schedule = match grad_pool() {
            Some(pool) => Schedule::Pool(pool),
            None if std::env::var_os(GRAD_THREADS_ENV).is_some() => Schedule::Sequential,
            None => Schedule::Global,
        };
        self.loss_and_grad_with(p, gamma, schedule)
    }

    pub fn loss_and_grad_with_threads(
        &self,
        p: &Path,
        gamma: Gamma,
        threads: usize,
    ) -> Result<(f64, GradMatrix)> {
        if threads <= 1 {
            return self.loss_and_grad_with(p, gamma, Schedule::Sequential);
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        self.loss_and_grad_with(p, gamma, Schedule::Pool(&pool))
    }

    fn loss_and_grad_with(
        &self,
        p: &Path,
        gamma: Gamma,
        schedule: Schedule<'_>,
    ) -> Result<(f64, GradMatrix)> {
        let gamma = gamma.require_soft()?;
        self.check(p)?;
        let n = p.len();
        let mut grad = GradMatrix::zeros(n, p.width());
        if n == 0 {
            return Ok((1.0, grad));
        }
        let table = self.plan.losses(p, gamma);
        let row = |i: usize, out: &mut [f64]| {
            let mut scratch = Vec::new();
            for &j in &self.columns {
                out[j] = self
                    .plan
                    .derivative(&table, p, gamma, i, j as i64, &mut scratch);
            }
        };
        let cols = grad.cols;
        // Every entry is computed independently, so the schedule does not
        // affect the result.
        let parallel = n * self.columns.len() >= 64 && cols > 0;
        match schedule {
            Schedule::Pool(pool) if parallel => pool.install(|| {
                grad.data
                    .par_chunks_mut(cols)
                    .enumerate()
                    .for_each(|(i, out)| row(i, out))
            }),
            Schedule::Global if parallel => grad
                .data
                .par_chunks_mut(cols)
                .enumerate()
                .for_each(|(i, out)| row(i, out)),
            _ => {
                for (i, out) in grad.data.chunks_mut(cols.max(1)).enumerate() {
                    row(i, out);
                }
            }
        }
        Ok((table.root(), grad))
    }
}

#[derive(Clone, Copy)]
enum Schedule<'a> {
    Sequential,
    Global,
    Pool(&'a rayon::ThreadPool),
}

/// Thread pool sized by `LTLF_GRAD_THREADS`, when that variable is set to
/// a number above one. Otherwise rayon's global pool is used.
fn grad_pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads: usize = std::env::var(GRAD_THREADS_ENV).ok()?.trim().parse().ok()?;
        if threads <= 1 {
            return None;
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .ok()
    })
    .as_ref()
}

/// Soft loss of `c` on `p`. The empty path has loss 1 for every constraint.
pub fn loss_l(c: &Constraint, p: &Path, gamma: Gamma) -> Result<f64> {
    if p.is_empty() {
        return Ok(1.0);
    }
    CompiledConstraint::new(c, p.width())?.loss(p, gamma)
}

/// `∂ loss_l / ∂ p[i][j]`. Entries outside the path have derivative 0.
pub fn loss_dl(c: &Constraint, p: &Path, gamma: Gamma, i: i64, j: i64) -> Result<f64> {
    gamma.require_soft()?;
    if p.is_empty() {
        return Ok(0.0);
    }
    CompiledConstraint::new(c, p.width())?.derivative(p, gamma, i, j)
}

/// Full `N × K` gradient of `loss_l` with respect to the path.
pub fn grad_l(c: &Constraint, p: &Path, gamma: Gamma) -> Result<GradMatrix> {
    gamma.require_soft()?;
    if p.is_empty() {
        return Ok(GradMatrix::zeros(0, p.width()));
    }
    Ok(CompiledConstraint::new(c, p.width())?
        .loss_and_grad(p, gamma)?
        .1)
}

/// Copy of `p` with entry `(i, j)` replaced by `x`. Out-of-range positions
/// leave the path unchanged.
pub fn update_path(p: &Path, i: i64, j: i64, x: f64) -> Path {
    let mut out = p.clone();
    if i >= 0 && j >= 0 && (i as u64) < p.len() as u64 && (j as u64) < p.width() as u64 {
        out.set(i as usize, j as usize, x);
    }
    out
}

/// Loss of `c` on `p` at each relaxation factor of a strictly decreasing,
/// positive schedule.
pub fn soundness_probe(c: &Constraint, p: &Path, schedule: &[Gamma]) -> Result<Vec<f64>> {
    if schedule.iter().any(|g| !g.is_soft())
        || schedule.windows(2).any(|w| w[1].value() >= w[0].value())
    {
        return Err(Error::InvalidArgument(
            "schedule must be positive and strictly decreasing".into(),
        ));
    }
    if p.is_empty() {
        return Ok(vec![1.0; schedule.len()]);
    }
    let compiled = CompiledConstraint::new(c, p.width())?;
    schedule.iter().map(|&g| compiled.loss(p, g)).collect()
}

/// Nesting depth of soft max/min operators when `c` is evaluated on a path
/// of length `n`. Bounds how far the soft loss can sit from the hard one,
/// in units of `γ·ln 2`.
pub fn soft_depth(c: &Constraint, n: usize) -> usize {
    Plan::compile(c).soft_depth(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn path(rows: &[&[f64]]) -> Path {
        Path::from_rows(rows).unwrap()
    }

    #[test]
    fn empty_path_values() {
        let c = Constraint::always(Constraint::less(0, 1));
        for g in [0.0, 0.005, 1.0] {
            assert_eq!(loss_l(&c, &Path::new(2), Gamma(g)).unwrap(), 1.0);
        }
        assert_eq!(loss_dl(&c, &Path::new(2), Gamma(0.1), 0, 0).unwrap(), 0.0);
        assert_eq!(
            soundness_probe(&c, &Path::new(2), &[Gamma(0.1), Gamma(0.01)]).unwrap(),
            vec![1.0, 1.0]
        );
    }

    #[test]
    fn lequal_loss_values() {
        let c = Constraint::lequal(0, 1);
        let v = loss_l(&c, &path(&[&[0.5, 0.3]]), Gamma::HARD).unwrap();
        assert_abs_diff_eq!(v, 0.2, epsilon = 1e-15);
        let v = loss_l(&c, &path(&[&[0.3, 0.5]]), Gamma(0.005)).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn hard_and_is_idempotent() {
        let c = Constraint::eventually(Constraint::less(0, 1));
        let p = path(&[&[0.7, 0.1], &[0.4, 0.2]]);
        assert_eq!(
            loss_l(&Constraint::and(c.clone(), c.clone()), &p, Gamma::HARD).unwrap(),
            loss_l(&c, &p, Gamma::HARD).unwrap()
        );
    }

    #[test]
    fn derivative_gates_on_head_state() {
        let c = Constraint::lequal(0, 1);
        let p = path(&[&[0.5, 0.3], &[0.1, 0.9]]);
        assert_eq!(loss_dl(&c, &p, Gamma(0.1), 1, 0).unwrap(), 0.0);
        assert!(loss_dl(&c, &p, Gamma(0.1), 0, 0).unwrap() > 0.0);
        assert_eq!(loss_dl(&c, &p, Gamma(0.1), -1, 0).unwrap(), 0.0);
        assert_eq!(loss_dl(&c, &p, Gamma(0.1), 2, 0).unwrap(), 0.0);
        assert_eq!(loss_dl(&c, &p, Gamma(0.1), 0, 7).unwrap(), 0.0);
    }

    #[test]
    fn derivative_requires_soft_gamma() {
        let c = Constraint::lequal(0, 1);
        let p = path(&[&[0.5, 0.3]]);
        assert!(matches!(
            loss_dl(&c, &p, Gamma(0.0), 0, 0),
            Err(Error::NonpositiveGamma(_))
        ));
        assert!(grad_l(&c, &p, Gamma(-1.0)).is_err());
    }

    #[test]
    fn grad_sparsity() {
        let p = path(&[&[0.5, 0.3, 0.1, 0.2], &[0.1, 0.9, 0.3, 0.3], &[0.0, 0.0, 0.0, 0.0]]);
        let g = grad_l(&Constraint::lequal(0, 1), &p, Gamma(0.1)).unwrap();
        assert_eq!((g.rows(), g.cols()), (3, 4));
        assert!(g.row(1).iter().chain(g.row(2)).all(|&v| v == 0.0));
        let c = Constraint::always(Constraint::until(
            Constraint::less(0, 1),
            Constraint::equal(1, 0),
        ));
        let g = grad_l(&c, &p, Gamma(0.1)).unwrap();
        for i in 0..3 {
            assert_eq!(g[(i, 2)], 0.0);
            assert_eq!(g[(i, 3)], 0.0);
        }
    }

    #[test]
    fn grad_matches_entrywise_derivative() {
        let rows: Vec<[f64; 3]> = (0..40)
            .map(|i| {
                let t = i as f64 / 40.0;
                [t, (3.0 * t).sin(), 0.5]
            })
            .collect();
        let p = Path::from_rows(&rows).unwrap();
        let c = Constraint::release(
            Constraint::lequal(2, 1),
            Constraint::or(Constraint::less(0, 2), Constraint::next(Constraint::nequal(0, 1))),
        );
        let g = grad_l(&c, &p, Gamma(0.05)).unwrap();
        let sequential = CompiledConstraint::new(&c, 3)
            .unwrap()
            .loss_and_grad_with_threads(&p, Gamma(0.05), 1)
            .unwrap()
            .1;
        let threaded = CompiledConstraint::new(&c, 3)
            .unwrap()
            .loss_and_grad_with_threads(&p, Gamma(0.05), 4)
            .unwrap()
            .1;
        assert_eq!(g, sequential);
        assert_eq!(g, threaded);
        for (i, j) in [(0, 0), (5, 1), (39, 2), (20, 0)] {
            assert_eq!(
                g[(i, j)],
                loss_dl(&c, &p, Gamma(0.05), i as i64, j as i64).unwrap()
            );
        }
    }

    #[test]
    fn update_path_cases() {
        let p = path(&[&[0.0, 1.0], &[2.0, 3.0]]);
        assert_eq!(update_path(&p, 1, 1, 3.0), p);
        assert_eq!(update_path(&p, -1, 0, 9.0), p);
        assert_eq!(update_path(&p, 2, 0, 9.0), p);
        assert_eq!(update_path(&p, 0, 2, 9.0), p);
        assert_eq!(update_path(&p, 1, 0, 9.0), path(&[&[0.0, 1.0], &[9.0, 3.0]]));
    }

    #[test]
    fn probe_rejects_bad_schedules() {
        let c = Constraint::lequal(0, 1);
        let p = path(&[&[0.0, 1.0]]);
        assert!(soundness_probe(&c, &p, &[Gamma(0.1), Gamma(0.1)]).is_err());
        assert!(soundness_probe(&c, &p, &[Gamma(0.1), Gamma(0.0)]).is_err());
        let v = soundness_probe(&c, &p, &[Gamma(0.1), Gamma(0.01), Gamma(0.001)]).unwrap();
        assert!(v[2] < 0.01);
    }

    #[test]
    fn long_path_loss_and_gradient() {
        let rows: Vec<[f64; 2]> = (0..10_000).map(|i| [(i % 7) as f64, 3.0]).collect();
        let p = Path::from_rows(&rows).unwrap();
        let c = Constraint::until(Constraint::lequal(0, 1), Constraint::less(1, 0));
        let v = loss_l(&c, &p, Gamma(0.01)).unwrap();
        assert!(v.is_finite());
        let d = loss_dl(&c, &p, Gamma(0.01), 4, 0).unwrap();
        assert!(d.is_finite());
    }
}

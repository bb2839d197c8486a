//! Comparison of the analytic gradient with central finite differences.

use crate::error::Result;
use crate::logic::{Constraint, Path};
use crate::loss::CompiledConstraint;
use crate::soft::Gamma;

pub const DEFAULT_STEP: f64 = 1e-6;
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

/// Magnitude below which errors are measured absolutely rather than
/// relative to the derivative.
pub const RELATIVE_FLOOR: f64 = 1e-3;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckReport {
    pub max_error: f64,
    /// Entry with the largest error.
    pub worst: (usize, usize),
    pub analytic: f64,
    pub numeric: f64,
    pub entries: usize,
}

impl GradcheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_error <= tol
    }
}

/// Checks every entry of `p`. An empty path yields a report with no entries
/// and zero error.
pub fn gradcheck(c: &Constraint, p: &Path, gamma: Gamma, h: f64) -> Result<GradcheckReport> {
    let gamma = gamma.require_soft()?;
    let compiled = CompiledConstraint::new(c, p.width())?;
    let (_, grad) = compiled.loss_and_grad(p, gamma)?;
    let mut report = GradcheckReport {
        max_error: 0.0,
        worst: (0, 0),
        analytic: 0.0,
        numeric: 0.0,
        entries: 0,
    };
    let mut probe = p.clone();
    for i in 0..p.len() {
        for j in 0..p.width() {
            let x = p.get(i, j);
            probe.set(i, j, x + h);
            let up = compiled.loss(&probe, gamma)?;
            probe.set(i, j, x - h);
            let down = compiled.loss(&probe, gamma)?;
            probe.set(i, j, x);
            let numeric = (up - down) / (2.0 * h);
            let analytic = grad[(i, j)];
            let err = relative_error(analytic, numeric);
            report.entries += 1;
            if err > report.max_error || report.entries == 1 {
                report.max_error = err;
                report.worst = (i, j);
                report.analytic = analytic;
                report.numeric = numeric;
            }
        }
    }
    Ok(report)
}

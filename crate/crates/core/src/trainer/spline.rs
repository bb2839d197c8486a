/// Natural cubic spline through `(t_k, y_k)` with uniformly spaced knots on
/// `[0, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct NaturalSpline {
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
    h: f64,
}

impl NaturalSpline {
    /// Needs at least two knots.
    pub(crate) fn new(ys: &[f64]) -> Self {
        let n = ys.len();
        assert!(n >= 2, "spline needs two knots");
        let h = 1.0 / (n - 1) as f64;
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for the interior second derivatives:
            // m[k-1] + 4 m[k] + m[k+1] = 6 (y[k-1] - 2 y[k] + y[k+1]) / h².
            let inner = n - 2;
            let mut diag = vec![4.0; inner];
            let mut rhs: Vec<f64> = (1..n - 1)
                .map(|k| 6.0 * (ys[k - 1] - 2.0 * ys[k] + ys[k + 1]) / (h * h))
                .collect();
            for k in 1..inner {
                let w = 1.0 / diag[k - 1];
                diag[k] -= w;
                rhs[k] -= w * rhs[k - 1];
            }
            m[inner] = rhs[inner - 1] / diag[inner - 1];
            for k in (0..inner - 1).rev() {
                m[k + 1] = (rhs[k] - m[k + 2]) / diag[k];
            }
        }
        NaturalSpline {
            ys: ys.to_vec(),
            m,
            h,
        }
    }

    pub(crate) fn at(&self, t: f64) -> f64 {
        let last = self.ys.len() - 2;
        let k = ((t / self.h).floor().max(0.0) as usize).min(last);
        let a = (k + 1) as f64 * self.h - t;
        let b = t - k as f64 * self.h;
        let h = self.h;
        (self.m[k] * a.powi(3) + self.m[k + 1] * b.powi(3)) / (6.0 * h)
            + (self.ys[k] / h - self.m[k] * h / 6.0) * a
            + (self.ys[k + 1] / h - self.m[k + 1] * h / 6.0) * b
    }
}

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::math::{cos, PI};
use crate::{Error, Result};

/// Composite Gauss–Legendre rule: `subdivisions` equal panels with
/// `nodes_1d` nodes each.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    nodes_1d: usize,
    subdivisions: usize,
    rule: Arc<(Vec<f64>, Vec<f64>)>,
}

impl QuadratureSpec {
    pub const DEFAULT_NODES: usize = 64;
    pub const DEFAULT_SUBDIVISIONS: usize = 8;

    pub fn new(nodes_1d: usize, subdivisions: usize) -> Result<Self> {
        if nodes_1d < 8 {
            return Err(Error::domain("nodes_1d", nodes_1d as f64, "at least 8 nodes"));
        }
        Self::diagnostic(nodes_1d, subdivisions)
    }

    /// Like [`QuadratureSpec::new`] but accepts any positive node count.
    /// Intended for convergence probes that must be able to fail.
    pub fn diagnostic(nodes_1d: usize, subdivisions: usize) -> Result<Self> {
        if nodes_1d == 0 || nodes_1d > 4096 {
            return Err(Error::domain("nodes_1d", nodes_1d as f64, "1..=4096 nodes"));
        }
        if subdivisions == 0 {
            return Err(Error::domain("subdivisions", 0.0, "at least 1 panel"));
        }
        Ok(QuadratureSpec {
            nodes_1d,
            subdivisions,
            rule: Arc::new(gauss_legendre(nodes_1d)),
        })
    }

    pub fn nodes_1d(&self) -> usize {
        self.nodes_1d
    }

    pub fn subdivisions(&self) -> usize {
        self.subdivisions
    }

    /// Same node count, `factor` times as many panels.
    pub fn refined(&self, factor: usize) -> Self {
        QuadratureSpec {
            subdivisions: self.subdivisions * factor.max(1),
            ..self.clone()
        }
    }

    pub(crate) fn with_subdivisions(&self, subdivisions: usize) -> Self {
        QuadratureSpec {
            subdivisions: subdivisions.max(1),
            ..self.clone()
        }
    }

    /// Reference nodes and weights on `[-1, 1]`.
    pub fn rule(&self) -> (&[f64], &[f64]) {
        (&self.rule.0, &self.rule.1)
    }

    /// Calls `visit(x, w)` for every node of the composite rule on `[lo, hi]`.
    pub fn for_each_node(&self, lo: f64, hi: f64, mut visit: impl FnMut(f64, f64)) {
        let (xs, ws) = self.rule();
        let width = (hi - lo) / self.subdivisions as f64;
        for panel in 0..self.subdivisions {
            let a = lo + width * panel as f64;
            let half = 0.5 * width;
            let mid = a + half;
            for (x, w) in xs.iter().zip(ws) {
                visit(mid + half * x, half * w);
            }
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::new(Self::DEFAULT_NODES, Self::DEFAULT_SUBDIVISIONS)
            .expect("default quadrature spec is valid")
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = alloc::vec![0.0; n];
    let mut ws = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        // Tricomi's initial guess for the i-th largest root.
        let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = cos(theta) * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[n - 1 - i] = x;
        ws[n - 1 - i] = w;
        xs[i] = -x;
        ws[i] = w;
    }
    if n % 2 == 1 {
        xs[n / 2] = 0.0;
    }
    (xs, ws)
}

// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre estimate of `∫_lo^hi f`.
pub fn integrate_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64> {
    let [v] = integrate_vec(|x| Ok([f(x)]), lo, hi, spec)?;
    Ok(v)
}

/// Tensor-product rule over `[lo1, hi1] × [lo2, hi2]`.
pub fn integrate_2d(
    f: impl Fn(f64, f64) -> f64,
    (lo1, hi1): (f64, f64),
    (lo2, hi2): (f64, f64),
    spec: &QuadratureSpec,
) -> Result<f64> {
    let [v] = integrate_vec(
        |x| integrate_vec(|y| Ok([f(x, y)]), lo2, hi2, spec),
        lo1,
        hi1,
        spec,
    )?;
    Ok(v)
}

/// Integrates `K` functions at once; `f` may fail, and any non-finite value
/// is reported as a numerical error.
pub fn integrate_vec<const K: usize>(
    mut f: impl FnMut(f64) -> Result<[f64; K]>,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<[f64; K]> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain("integration bounds", hi - lo, "finite lo <= hi"));
    }
    let mut acc = [0.0; K];
    if lo == hi {
        return Ok(acc);
    }
    let mut failure = None;
    spec.for_each_node(lo, hi, |x, w| {
        if failure.is_some() {
            return;
        }
        match f(x) {
            Ok(vals) => {
                for (a, v) in acc.iter_mut().zip(vals) {
                    if !v.is_finite() {
                        failure = Some(Error::numerical("integrand", v));
                    }
                    *a += w * v;
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

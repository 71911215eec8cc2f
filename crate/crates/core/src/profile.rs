//! Grid functions of the similarity variable and their interpolants.

use crate::error::{Error, Result};

/// Which similarity domain a profile lives on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// `[α₀, ξ]`
    Liquid { alpha0: f64, xi: f64 },
    /// `[ξ, η_max]`, continued as a constant beyond `η_max`.
    Solid { xi: f64 },
}

impl Domain {
    pub fn xi(&self) -> f64 {
        match *self {
            Domain::Liquid { xi, .. } | Domain::Solid { xi } => xi,
        }
    }
}

/// Values of `u` on an ascending `η`-grid plus node slopes defining a
/// piecewise-cubic Hermite interpolant.
///
/// Slopes are either exact (supplied by the operator that produced the
/// values) or monotone PCHIP estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityProfile {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    exact_slopes: bool,
    domain: Domain,
}

impl SimilarityProfile {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, domain: Domain) -> Result<Self> {
        validate_grid(&nodes, &values, &domain)?;
        let slopes = pchip_slopes(&nodes, &values);
        Ok(Self {
            nodes,
            values,
            slopes,
            exact_slopes: false,
            domain,
        })
    }

    pub fn with_slopes(nodes: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>, domain: Domain) -> Result<Self> {
        validate_grid(&nodes, &values, &domain)?;
        if slopes.len() != nodes.len() || slopes.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter("slopes must be finite and match the grid".into()));
        }
        Ok(Self {
            nodes,
            values,
            slopes,
            exact_slopes: true,
            domain,
        })
    }

    /// Samples `f` on `nodes`.
    pub fn from_fn(nodes: Vec<f64>, domain: Domain, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(nodes, values, domain)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }
    pub fn has_exact_slopes(&self) -> bool {
        self.exact_slopes
    }
    pub fn domain(&self) -> Domain {
        self.domain
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }
    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index `i` of the panel `[nodes[i], nodes[i+1]]` containing `x`
    /// (clamped to the first and last panel).
    pub fn panel(&self, x: f64) -> usize {
        let n = self.nodes.len();
        self.nodes.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2)
    }

    /// Value at `x`; constant extrapolation outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.lo() {
            return self.values[0];
        }
        if x >= self.hi() {
            return self.values[self.len() - 1];
        }
        self.eval_in(self.panel(x), x)
    }

    /// Value at `x` using panel `i` without searching.
    pub fn eval_in(&self, i: usize, x: f64) -> f64 {
        hermite(
            self.nodes[i],
            self.nodes[i + 1],
            self.values[i],
            self.values[i + 1],
            self.slopes[i],
            self.slopes[i + 1],
            x,
        )
        .0
    }

    /// Derivative at `x`; zero outside the grid.
    pub fn derivative(&self, x: f64) -> f64 {
        if x < self.lo() || x > self.hi() {
            return 0.0;
        }
        let i = self.panel(x);
        hermite(
            self.nodes[i],
            self.nodes[i + 1],
            self.values[i],
            self.values[i + 1],
            self.slopes[i],
            self.slopes[i + 1],
            x,
        )
        .1
    }

    /// Sup-norm distance between node values on a shared grid.
    pub fn sup_distance(&self, other: &SimilarityProfile) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

fn validate_grid(nodes: &[f64], values: &[f64], domain: &Domain) -> Result<()> {
    if nodes.len() < 2 || nodes.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "profile needs matching nodes and values with at least two points (got {} and {})",
            nodes.len(),
            values.len()
        )));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("profile nodes must be strictly ascending".into()));
    }
    if values.iter().chain(nodes).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("profile contains non-finite entries".into()));
    }
    let tol = 1e-12 * nodes[nodes.len() - 1].abs().max(1.0);
    let ok = match *domain {
        Domain::Liquid { alpha0, xi } => {
            (nodes[0] - alpha0).abs() <= tol && (nodes[nodes.len() - 1] - xi).abs() <= tol
        }
        Domain::Solid { xi } => (nodes[0] - xi).abs() <= tol,
    };
    if !ok {
        return Err(Error::InvalidParameter(format!(
            "profile grid [{}, {}] does not match its domain {domain:?}",
            nodes[0],
            nodes[nodes.len() - 1]
        )));
    }
    Ok(())
}

/// Cubic Hermite value and derivative on `[x0, x1]`.
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, m0: f64, m1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
    let d00 = 6.0 * t2 - 6.0 * t;
    let d10 = 3.0 * t2 - 4.0 * t + 1.0;
    let d11 = 3.0 * t2 - 2.0 * t;
    let deriv = d00 * (y0 - y1) / h + d10 * m0 + d11 * m1;
    (value, deriv)
}

/// Fritsch–Carlson monotone slopes.
pub fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = pchip_end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = pchip_end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn pchip_end(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

/// Finite-difference weights for derivatives of order `0..=order` at `x0`
/// from samples at `xs` (Fornberg's recursion). Returns `w[m][j]`.
pub fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Uniform grid of `n` nodes on `[lo, hi]` with exact endpoints.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    g[n - 1] = hi;
    g
}

/// `n` nodes on `[lo, hi]` clustered quadratically towards `lo`.
pub fn graded_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            lo + (hi - lo) * s * s
        })
        .collect();
    g[n - 1] = hi;
    g
}

/// Inserts `factor − 1` equally spaced points inside every panel.
pub fn refine_grid(nodes: &[f64], factor: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((nodes.len() - 1) * factor + 1);
    for w in nodes.windows(2) {
        for j in 0..factor {
            out.push(w[0] + (w[1] - w[0]) * j as f64 / factor as f64);
        }
    }
    out.push(nodes[nodes.len() - 1]);
    out
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotone piecewise-cubic Hermite interpolant on strictly increasing nodes.
///
/// Slopes are either estimated (Fritsch–Butland harmonic mean) or supplied
/// by the caller; in both cases they are passed through the Fritsch–Carlson
/// limiter so that monotone data yields a monotone interpolant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTable {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    /// Per segment, `[y₀, m₀, c₂, c₃]` of the cubic in `u = x − nodes[i]`.
    coeffs: Vec<[f64; 4]>,
}

fn check_nodes(nodes: &[f64], values: &[f64]) -> Result<()> {
    if nodes.len() != values.len() {
        return Err(Error::invalid("values", "must have one value per node"));
    }
    if nodes.len() < 2 {
        return Err(Error::invalid("nodes", "need at least two nodes"));
    }
    if nodes.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("radial table"));
    }
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("nodes", "must be strictly increasing"));
    }
    Ok(())
}

impl RadialTable {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_nodes(&nodes, &values)?;
        let n = nodes.len();
        let secant: Vec<f64> = (0..n - 1)
            .map(|i| (values[i + 1] - values[i]) / (nodes[i + 1] - nodes[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secant[0];
        slopes[n - 1] = secant[n - 2];
        for i in 1..n - 1 {
            let (d0, d1) = (secant[i - 1], secant[i]);
            if d0 * d1 > 0.0 {
                let h0 = nodes[i] - nodes[i - 1];
                let h1 = nodes[i + 1] - nodes[i];
                let w0 = 2.0 * h1 + h0;
                let w1 = h1 + 2.0 * h0;
                slopes[i] = (w0 + w1) / (w0 / d0 + w1 / d1);
            }
        }
        Ok(Self::limited(nodes, values, slopes))
    }

    /// Build from known derivative values at the nodes.
    pub fn with_slopes(nodes: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        check_nodes(&nodes, &values)?;
        if slopes.len() != nodes.len() {
            return Err(Error::invalid("slopes", "must have one slope per node"));
        }
        if slopes.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("radial table slopes"));
        }
        Ok(Self::limited(nodes, values, slopes))
    }

    fn limited(nodes: Vec<f64>, values: Vec<f64>, mut slopes: Vec<f64>) -> Self {
        for i in 0..nodes.len() - 1 {
            let delta = (values[i + 1] - values[i]) / (nodes[i + 1] - nodes[i]);
            if delta == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let mut alpha = slopes[i] / delta;
            let mut beta = slopes[i + 1] / delta;
            if alpha < 0.0 {
                slopes[i] = 0.0;
                alpha = 0.0;
            }
            if beta < 0.0 {
                slopes[i + 1] = 0.0;
                beta = 0.0;
            }
            let norm = alpha * alpha + beta * beta;
            if norm > 9.0 {
                let tau = 3.0 / norm.sqrt();
                slopes[i] = tau * alpha * delta;
                slopes[i + 1] = tau * beta * delta;
            }
        }
        let coeffs = (0..nodes.len() - 1)
            .map(|i| {
                let h = nodes[i + 1] - nodes[i];
                let delta = (values[i + 1] - values[i]) / h;
                let (m0, m1) = (slopes[i], slopes[i + 1]);
                [values[i], m0, (3.0 * delta - 2.0 * m0 - m1) / h, (m0 + m1 - 2.0 * delta) / (h * h)]
            })
            .collect();
        RadialTable {
            nodes,
            values,
            slopes,
            coeffs,
        }
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

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index `i` of the segment `[nodes[i], nodes[i+1]]` containing `x`,
    /// clamped to the first/last segment outside the node range.
    pub fn segment_of(&self, x: f64) -> usize {
        let i = self.nodes.partition_point(|&n| n <= x);
        i.saturating_sub(1).min(self.nodes.len() - 2)
    }

    /// Evaluate the Hermite cubic of segment `i` at `x`.
    #[inline]
    pub fn eval_segment(&self, i: usize, x: f64) -> f64 {
        let u = x - self.nodes[i];
        let [c0, c1, c2, c3] = self.coeffs[i];
        c0 + u * (c1 + u * (c2 + u * c3))
    }

    /// Derivative of the segment-`i` cubic at `x`.
    pub fn deriv_segment(&self, i: usize, x: f64) -> f64 {
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.values[i] + d10 * self.slopes[i] + d01 * self.values[i + 1] + d11 * self.slopes[i + 1]
    }

    /// Interpolated value; extrapolates with the end cubics outside the nodes.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_segment(self.segment_of(x), x)
    }

    /// Exact integral of the segment-`i` cubic over its whole segment.
    pub fn segment_integral(&self, i: usize) -> f64 {
        let h = self.nodes[i + 1] - self.nodes[i];
        0.5 * h * (self.values[i] + self.values[i + 1]) + h * h * (self.slopes[i] - self.slopes[i + 1]) / 12.0
    }
}

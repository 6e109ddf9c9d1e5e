//! Scaled Gauss-Laguerre Lagrange mesh and its regularized Lagrange functions.

use crate::error::{Error, Result};
use crate::specfun::{self, MAX_MESH};

const MODULE: &str = "mesh";

/// Half-width of the window around a node where the removable singularity
/// of `f_i` is replaced by its limit.
const NODE_WINDOW: f64 = 1e-10;

/// The `N` zeros of `L_N`, the matching quadrature weights, and the scale
/// factor `h`. Nodes and weights are dimensionless; physical points are
/// `h * x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreMesh {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    h: f64,
}

impl LaguerreMesh {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        if n == 0 || n > MAX_MESH {
            return Err(Error::config(
                MODULE,
                format!("mesh size N must be in 1..={MAX_MESH}, got {n}"),
            ));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::config(
                MODULE,
                format!("scale factor h must be positive and finite, got {h}"),
            ));
        }
        let nodes = specfun::laguerre_zeros(n)?;
        let weights = specfun::laguerre_weights(&nodes)?;
        Ok(Self { nodes, weights, h })
    }

    /// Same nodes and weights, different scale.
    pub fn with_scale(&self, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::config(
                MODULE,
                format!("scale factor h must be positive and finite, got {h}"),
            ));
        }
        Ok(Self {
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
            h,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scale(&self) -> f64 {
        self.h
    }

    /// `h * x_i`.
    pub fn scaled_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(move |x| self.h * x)
    }

    /// Regularized Lagrange function
    /// `f_i(x) = (-1)^i x_i^{-1/2} x (x - x_i)^{-1} L_N(x) e^{-x/2}`.
    ///
    /// `i` is zero-based here, so the sign factor is `(-1)^{i+1}`. The
    /// product is formed in log-magnitude so large meshes and arguments do
    /// not overflow.
    pub fn lagrange_function(&self, i: usize, x: f64) -> f64 {
        let xi = self.nodes[i];
        if x <= 0.0 {
            return 0.0;
        }
        if (x - xi).abs() < NODE_WINDOW {
            return self.weights[i].sqrt().recip();
        }
        let lag = specfun::laguerre_scaled(self.len(), x);
        if lag.ln == 0.0 {
            return 0.0;
        }
        let log_mag =
            -0.5 * xi.ln() + x.ln() - (x - xi).abs().ln() + lag.ln.abs().ln() + lag.log_scale
                - 0.5 * x;
        let mut sign = if i.is_multiple_of(2) { -1.0 } else { 1.0 };
        if lag.ln < 0.0 {
            sign = -sign;
        }
        if x < xi {
            sign = -sign;
        }
        sign * log_mag.exp()
    }

    /// `lim_{x→0} f_i(x) / x = (-1)^{i+1} x_i^{-3/2}` (zero-based `i`),
    /// using `L_N(0) = 1`.
    pub(crate) fn lagrange_slope_at_origin(&self, i: usize) -> f64 {
        let xi = self.nodes[i];
        let sign = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * xi.powf(-1.5)
    }

    /// Gauss quadrature `Σ_k λ_k g(x_k)` on the dimensionless nodes.
    pub fn quadrature<F: Fn(f64) -> f64>(&self, g: F) -> Result<f64> {
        let mut sum = 0.0;
        for (k, (&x, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let v = g(x);
            if !v.is_finite() {
                return Err(Error::numerical(
                    MODULE,
                    format!("quadrature node #{} (x = {x})", k + 1),
                    format!("integrand is not finite ({v})"),
                ));
            }
            sum += w * v;
        }
        Ok(sum)
    }
}

/// Convenience constructor mirroring [`LaguerreMesh::new`].
pub fn build_mesh(n: usize, h: f64) -> Result<LaguerreMesh> {
    LaguerreMesh::new(n, h)
}

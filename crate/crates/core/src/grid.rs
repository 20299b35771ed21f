//! Tensor-product quadrature grids on (0,∞)^N and functions sampled on them.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;

/// One coordinate axis: nodes with weights that already contain x^α.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    alpha: f64,
}

impl Axis {
    /// Composite Gauss rule with `order` nodes per panel on the given
    /// breakpoints, carrying the density x^α. A first panel starting at 0 uses
    /// the Gauss–Jacobi rule for (1+s)^α so the endpoint singularity of the
    /// density is integrated exactly.
    pub fn composite(alpha: f64, breaks: &[f64], order: usize) -> Result<Self> {
        if !(alpha > -1.0) {
            return Err(Error::InvalidParameter(format!("alpha must exceed -1, got {alpha}")));
        }
        if breaks.len() < 2 || breaks[0] < 0.0 || breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "breakpoints must be nonnegative and strictly increasing".into(),
            ));
        }
        let legendre = quad::legendre(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (k, w) in breaks.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            if k == 0 && a == 0.0 && alpha != 0.0 {
                let rule = quad::jacobi(order, 0.0, alpha);
                let half = 0.5 * b;
                for (&s, &wt) in rule.nodes.iter().zip(&rule.weights) {
                    nodes.push(half * (1.0 + s));
                    weights.push(wt * half.powf(alpha + 1.0));
                }
            } else {
                for (x, wt) in legendre.mapped(a, b) {
                    nodes.push(x);
                    weights.push(wt * x.powf(alpha));
                }
            }
        }
        Ok(Self { nodes, weights, alpha })
    }

    /// Panels of equal width on [0, x_max], with `order` nodes each.
    pub fn uniform(alpha: f64, x_max: f64, panels: usize, order: usize) -> Result<Self> {
        let breaks: Vec<f64> =
            (0..=panels.max(1)).map(|k| x_max * k as f64 / panels.max(1) as f64).collect();
        Self::composite(alpha, &breaks, order)
    }

    /// The same axis with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            nodes: self.nodes.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
            alpha: self.alpha,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Larger of the two gaps next to each node.
    pub fn local_spacing(&self) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.nodes[i] - self.nodes[i - 1] } else { 0.0 };
                let right = if i + 1 < n { self.nodes[i + 1] - self.nodes[i] } else { 0.0 };
                let h = left.max(right);
                if h > 0.0 { h } else { self.nodes[i] }
            })
            .collect()
    }
}

/// Tensor product of axes. Points are enumerated in row-major order (the last
/// axis varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    axes: Vec<Axis>,
}

impl QuadGrid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|a| a.is_empty()) {
            return Err(Error::Empty("quadrature axis"));
        }
        Ok(Self { axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (j, axis) in self.axes.iter().enumerate().rev() {
            idx[j] = k % axis.len();
            k /= axis.len();
        }
        idx
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        self.multi_index(k)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.nodes[i])
            .collect()
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.multi_index(k)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.weights[i])
            .product()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.weight(k)).collect()
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .axes
            .iter()
            .map(|a| {
                format!(
                    "alpha={} n={} [{:.3e},{:.3e}]",
                    a.alpha,
                    a.len(),
                    a.nodes[0],
                    a.nodes[a.len() - 1]
                )
            })
            .collect();
        parts.join(" x ")
    }
}

/// Complex samples on a shared grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<QuadGrid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Arc<QuadGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter("grid function has a non-finite sample".into()));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(grid: Arc<QuadGrid>, f: F) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(&grid.point(k))).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn<F: Fn(&[f64]) -> f64>(grid: Arc<QuadGrid>, f: F) -> Result<Self> {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Arc<QuadGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    /// Errors unless `other` lives on the same grid.
    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch("functions live on different grids".into()))
        }
    }

    /// (Σ w_k |v_k|^p)^{1/p}.
    pub fn lp(&self, p: f64) -> f64 {
        let w = self.grid.weights();
        w.iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// L² distance to `other` (same grid).
    pub fn l2_distance(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        let w = self.grid.weights();
        Ok(w.iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| w * (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

/// Applies a dense linear map along axis `axis` of a row-major array:
/// `out[.., i, ..] = Σ_k m(i, k) · v[.., k, ..]`, where `m` is given row by row
/// (`rows[i][k]`). The output has `rows.len()` entries along that axis.
pub(crate) fn apply_along_axis(
    shape: &[usize],
    values: &[Complex64],
    axis: usize,
    rows: &[Vec<f64>],
) -> Vec<Complex64> {
    use rayon::prelude::*;
    let n_in = shape[axis];
    let n_out = rows.len();
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * n_out * inner];
    out.par_chunks_mut(n_out * inner).enumerate().for_each(|(o, block)| {
        let base = o * n_in * inner;
        for (i, row) in rows.iter().enumerate() {
            for r in 0..inner {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, m) in row.iter().enumerate() {
                    acc += values[base + k * inner + r] * *m;
                }
                block[i * inner + r] = acc;
            }
        }
    });
    out
}

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jets::CoordBox;

/// Composite tensor-product Gauss-Legendre rule: `order` nodes per panel and
/// `panels` equal panels per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    order: usize,
    panels: usize,
    /// Nodes and weights of the single-panel rule on `[-1, 1]`.
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(z) and P_n'(z) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

impl QuadratureRule {
    pub fn gauss_legendre(order: usize, panels: usize) -> Result<Self> {
        if order == 0 || panels == 0 {
            return Err(Error::EmptyQuadrature);
        }
        let (nodes, weights) = gauss_legendre(order);
        Ok(QuadratureRule {
            order,
            panels,
            nodes,
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    /// The same rule with twice as many panels.
    pub fn refined(&self) -> Self {
        QuadratureRule {
            panels: self.panels * 2,
            ..self.clone()
        }
    }

    fn axis_points(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let width = (hi - lo) / self.panels as f64;
        let mut out = Vec::with_capacity(self.panels * self.order);
        for p in 0..self.panels {
            let a = lo + p as f64 * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((a + 0.5 * width * (x + 1.0), 0.5 * width * w));
            }
        }
        out
    }

    /// Tensor-product nodes and weights on `omega`.
    pub fn points(&self, omega: &CoordBox) -> Vec<(Vec<f64>, f64)> {
        let axes: Vec<Vec<(f64, f64)>> = (0..omega.dim())
            .map(|a| self.axis_points(omega.lower()[a], omega.upper()[a]))
            .collect();
        let mut out = vec![(Vec::new(), 1.0)];
        for axis in &axes {
            out = out
                .into_iter()
                .flat_map(|(x, w)| {
                    axis.iter().map(move |&(xi, wi)| {
                        let mut y = x.clone();
                        y.push(xi);
                        (y, w * wi)
                    })
                })
                .collect();
        }
        out
    }

    /// `∫_omega f`, evaluating nodes in parallel.
    pub fn integrate<F>(&self, omega: &CoordBox, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let pts = self.points(omega);
        if pts.is_empty() {
            return Err(Error::EmptyQuadrature);
        }
        let vals = pts
            .par_iter()
            .map(|(x, w)| f(x).map(|v| v * w))
            .collect::<Result<Vec<f64>>>()?;
        Ok(vals.iter().sum())
    }
}

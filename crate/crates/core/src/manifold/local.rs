//! Geometry of a chart expanded about one point.

use nalgebra::DMatrix;

use super::tensor::{interchange, inverse, levi_civita, riemann, JetTensor};
use super::Connection;
use crate::error::{Error, Result};

/// Jets of the metric (order `order + 1`) and of the three connections
/// (order `order`) about `point`, in the chart's own variables.
#[derive(Clone, Debug)]
pub(crate) struct Local {
    pub point: Vec<f64>,
    pub g: JetTensor,
    pub ginv: JetTensor,
    pub nabla: JetTensor,
    pub conj: JetTensor,
    pub lc: JetTensor,
}

impl Local {
    pub fn assemble(point: Vec<f64>, g: JetTensor, nabla_of: impl FnOnce(&JetTensor) -> Result<JetTensor>) -> Result<Self> {
        let n = g.dim();
        let values = DMatrix::from_fn(n, n, |i, j| g.at(&[i, j]).value());
        if values.cholesky().is_none() {
            return Err(Error::SingularMetric { point });
        }
        let ginv = inverse(&g);
        let lc = levi_civita(&g, &ginv);
        let nabla = nabla_of(&lc)?;
        let conj = lc.zip(&nabla, |a, b| a.scale(2.0) - b);
        Ok(Local {
            point,
            g,
            ginv,
            nabla,
            conj,
            lc,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn conn(&self, which: Connection) -> &JetTensor {
        match which {
            Connection::Nabla => &self.nabla,
            Connection::Conjugate => &self.conj,
            Connection::LeviCivita => &self.lc,
        }
    }

    /// `K = ∇ − ∇^g`.
    pub fn difference(&self) -> JetTensor {
        self.nabla.zip(&self.lc, |a, b| a - b)
    }

    pub fn curvature(&self, which: Connection) -> JetTensor {
        riemann(self.conn(which))
    }

    /// `L` (or `L̄` when `conj`), from `R` (or `R̄`).
    pub fn interchange(&self, conj: bool) -> JetTensor {
        let which = if conj {
            Connection::Conjugate
        } else {
            Connection::Nabla
        };
        interchange(&self.curvature(which), &self.g, &self.ginv)
    }

    /// `T^k = g^{ij} K^k_ij`.
    pub fn tchebychev(&self) -> JetTensor {
        let k = self.difference();
        let n = self.dim();
        JetTensor::from_fn(n, 1, 0, |ix| {
            let mut v = k.at(&[0, 0, 0]).lift(0.0);
            for i in 0..n {
                for j in 0..n {
                    v.add_product(self.ginv.at(&[i, j]), k.at(&[ix[0], i, j]));
                }
            }
            v
        })
    }

    /// `div^g T` at the base point; needs `order >= 1`.
    pub fn tchebychev_divergence(&self) -> f64 {
        let t = self.tchebychev();
        let n = self.dim();
        let mut total = 0.0;
        for a in 0..n {
            total += t.at(&[a]).derivative(a).value();
            for b in 0..n {
                total += self.lc.at(&[a, a, b]).value() * t.at(&[b]).value();
            }
        }
        total
    }

    pub fn metric_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.g.at(&[i, j]).value())
    }

    pub fn inverse_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.ginv.at(&[i, j]).value())
    }
}

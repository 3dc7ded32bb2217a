//! Pullback-bundle calculus along a map, expanded about one source point.

use nalgebra::DMatrix;

use super::{Flavor, MapModel};
use crate::error::Result;
use crate::jets::{Jet, Substitution};
use crate::manifold::tensor::JetTensor;
use crate::manifold::{Connection, Local};

/// Jets of `u` (order `ku`) and of the source geometry about `x0`, plus the
/// target geometry about `u(x0)` (connections to order `kt`) and the
/// substitution that pulls target jets back to source variables.
pub(crate) struct Along {
    pub m: usize,
    pub n: usize,
    /// `du[p][a] = ∂_a u^p`.
    pub du: Vec<Vec<Jet>>,
    pub src: Local,
    pub tgt: Local,
    sub: Substitution,
}

impl Along {
    pub fn new(map: &MapModel, x0: &[f64], ku: usize, kt: usize) -> Result<Self> {
        let u = map
            .components
            .iter()
            .map(|f| f.taylor(x0, ku))
            .collect::<Result<Vec<_>>>()?;
        let y0: Vec<f64> = u.iter().map(Jet::value).collect();
        let src = map.source.local(x0, ku.saturating_sub(2).max(1))?;
        let tgt = map.target.local(&y0, kt)?;
        let sub = Substitution::new(&u, kt);
        let m = map.source.dim();
        let du = u
            .iter()
            .map(|up| (0..m).map(|a| up.derivative(a)).collect())
            .collect();
        Ok(Along {
            m,
            n: u.len(),
            du,
            src,
            tgt,
            sub,
        })
    }

    /// A target tensor field composed with `u`, as jets in source variables.
    pub fn pulled(&self, t: &JetTensor) -> JetTensor {
        t.substitute(&self.sub)
    }

    pub fn pulled_connection(&self, which: Connection) -> JetTensor {
        self.pulled(self.tgt.conn(which))
    }

    /// `g^{ab}` of the source, as jets.
    pub fn w(&self) -> &JetTensor {
        &self.src.ginv
    }

    pub fn w_values(&self) -> DMatrix<f64> {
        self.src.inverse_matrix()
    }

    pub fn h_values(&self) -> DMatrix<f64> {
        self.tgt.metric_matrix()
    }

    pub fn du_values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.m, |p, a| self.du[p][a].value())
    }

    pub fn sqrt_det_g(&self) -> f64 {
        self.src
            .metric_matrix()
            .cholesky()
            .map(|c| c.l().diagonal().product())
            .unwrap_or(f64::NAN)
    }

    /// `B^p_ab = ∇^u_a u_*∂_b − u_*∇^M_a ∂_b`, flat `[p][a][b]`.
    pub fn second_fundamental(&self, flavor: Flavor) -> Vec<Jet> {
        let (m, n) = (self.m, self.n);
        let gs = self.src.conn(flavor.source());
        let gt = self.pulled_connection(flavor.target());
        let mut out = Vec::with_capacity(n * m * m);
        for p in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let mut v = self.du[p][b].derivative(a);
                    for c in 0..m {
                        v -= &(gs.at(&[c, a, b]) * &self.du[p][c]);
                    }
                    for q in 0..n {
                        for r in 0..n {
                            let t = gt.at(&[p, q, r]) * &self.du[q][a];
                            v.add_product(&t, &self.du[r][b]);
                        }
                    }
                    out.push(v);
                }
            }
        }
        out
    }

    /// `τ = g^{ab} B_ab`, as jets of order `ku − 2`.
    pub fn tension(&self, flavor: Flavor) -> Vec<Jet> {
        let b = self.second_fundamental(flavor);
        let m = self.m;
        let w = self.w();
        (0..self.n)
            .map(|p| {
                let mut v = b[p * m * m].lift(0.0);
                for a in 0..m {
                    for c in 0..m {
                        v.add_product(w.at(&[a, c]), &b[(p * m + a) * m + c]);
                    }
                }
                v
            })
            .collect()
    }

    /// `(∇^u_a S)^p = ∂_a S^p + Γ(u)^p_qr ∂_a u^q S^r`, indexed `[a][p]`.
    pub fn covariant(&self, s: &[Jet], gamma_u: &JetTensor) -> Vec<Vec<Jet>> {
        (0..self.m)
            .map(|a| {
                (0..self.n)
                    .map(|p| {
                        let mut v = s[p].derivative(a);
                        for q in 0..self.n {
                            for r in 0..self.n {
                                let t = gamma_u.at(&[p, q, r]) * &self.du[q][a];
                                v.add_product(&t, &s[r]);
                            }
                        }
                        v
                    })
                    .collect()
            })
            .collect()
    }

    /// Statistical connection Laplacian `tr_g(∇_a∇_b S − ∇_{∇^M_a ∂_b} S)` for
    /// the connection pair selected by `flavor`.
    pub fn laplacian(&self, s: &[Jet], flavor: Flavor) -> Vec<Jet> {
        let gs = self.src.conn(flavor.source());
        let gt = self.pulled_connection(flavor.target());
        let d1 = self.covariant(s, &gt);
        let d2: Vec<Vec<Vec<Jet>>> = d1.iter().map(|db| self.covariant(db, &gt)).collect();
        let w = self.w();
        (0..self.n)
            .map(|p| {
                let mut out = d2[0][0][p].lift(0.0);
                for a in 0..self.m {
                    for b in 0..self.m {
                        let mut term = d2[b][a][p].clone();
                        for c in 0..self.m {
                            term -= &(gs.at(&[c, a, b]) * &d1[c][p]);
                        }
                        out.add_product(w.at(&[a, b]), &term);
                    }
                }
                out
            })
            .collect()
    }
}

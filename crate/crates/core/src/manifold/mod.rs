//! Statistical manifolds `(g, ∇)` on a single coordinate chart.
//!
//! Index conventions, fixed once for the whole crate:
//!
//! * connection coefficients `Γ[k][i][j] = Γ^k_ij`, `∇_{∂i}∂j = Γ^k_ij ∂k`;
//! * curvature `R[l][i][j][k] = (R(∂i,∂j)∂k)^l`;
//! * interchange `L[l][z][w][x] = (L(∂z,∂w)∂x)^l`, the solution of
//!   `g(L(Z,W)X, Y) = g(R(X,Y)Z, W)`;
//! * a covariant derivative appends the differentiation slot last, so the
//!   Hessian curvature is `H[l][j][k][i] = ((∇_{∂i}K)(∂j,∂k))^l`.

pub(crate) mod local;
pub(crate) mod tensor;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::{CoordBox, JetFn};
pub(crate) use local::Local;
use tensor::{for_each_index, JetTensor};

/// Which of the three connections of a statistical manifold to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connection {
    /// The statistical connection `∇`.
    Nabla,
    /// The conjugate connection `∇̄ = 2∇^g − ∇`.
    Conjugate,
    /// The Levi-Civita connection `∇^g`.
    LeviCivita,
}

/// Components of an `(r, s)` tensor at a point, laid out as described in the
/// module docs (contravariant slots first, row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct PointTensor {
    valence: (usize, usize),
    dim: usize,
    components: Vec<f64>,
    basepoint: Vec<f64>,
}

impl PointTensor {
    pub fn new(
        valence: (usize, usize),
        dim: usize,
        components: Vec<f64>,
        basepoint: Vec<f64>,
    ) -> Result<Self> {
        let expected = dim.pow((valence.0 + valence.1) as u32);
        if components.len() != expected {
            return Err(Error::InvalidModel(format!(
                "tensor of valence {valence:?} in dimension {dim} needs {expected} components, got {}",
                components.len()
            )));
        }
        Ok(PointTensor {
            valence,
            dim,
            components,
            basepoint,
        })
    }

    pub(crate) fn from_jets(t: &JetTensor, basepoint: &[f64]) -> Self {
        PointTensor {
            valence: t.valence(),
            dim: t.dim(),
            components: t.values(),
            basepoint: basepoint.to_vec(),
        }
    }

    pub fn valence(&self) -> (usize, usize) {
        self.valence
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn basepoint(&self) -> &[f64] {
        &self.basepoint
    }

    pub fn get(&self, ix: &[usize]) -> f64 {
        assert_eq!(ix.len(), self.valence.0 + self.valence.1);
        self.components[ix.iter().fold(0, |acc, &i| acc * self.dim + i)]
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &PointTensor) -> f64 {
        assert_eq!(self.components.len(), other.components.len());
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// A tensor field given by jet-evaluable components (same layout as [`PointTensor`]).
#[derive(Clone, Debug)]
pub struct TensorField {
    pub valence: (usize, usize),
    pub components: Vec<JetFn>,
}

#[derive(Clone)]
enum ConnectionSpec {
    Coefficients(Arc<Vec<JetFn>>),
    LeviCivita,
    Dual(Box<ConnectionSpec>),
}

/// A statistical manifold on one coordinate box.
#[derive(Clone)]
pub struct ChartModel {
    name: String,
    dim: usize,
    domain: CoordBox,
    metric: Arc<Vec<JetFn>>,
    connection: ConnectionSpec,
}

impl fmt::Debug for ChartModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Least-squares fit of a constant together with the largest pointwise residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit {
    pub value: f64,
    pub residual: f64,
}

/// Result of [`ChartModel::classify`].
#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    pub points: usize,
    pub tolerance: f64,
    pub codazzi_residual: f64,
    pub codazzi_ok: bool,
    /// Largest component of `R − L`.
    pub conjugate_symmetric_residual: f64,
    pub conjugate_symmetric: bool,
    /// `R = λ (g(Y,Z)X − g(X,Z)Y)`.
    pub sectional: Fit,
    pub constant_sectional: bool,
    /// Largest component of `R`.
    pub hessian_residual: f64,
    pub hessian: bool,
    /// `H(Y,Z;X) = −(c/2)(g(X,Y)Z + g(X,Z)Y)`.
    pub chc: Fit,
    pub is_chc: bool,
    /// Constant sectional curvature of the metric alone.
    pub metric_sectional: Fit,
}

/// Pointwise residuals of the structural identities of a statistical manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityResiduals {
    /// `X g(Y,Z) = g(∇_X Y, Z) + g(Y, ∇̄_X Z)`.
    pub duality: f64,
    /// Total symmetry of `g(K(X,Y),Z)`.
    pub total_symmetry: f64,
    /// `∇̄ = ∇^g − K`.
    pub conjugate_from_k: f64,
    /// `∇^g = (∇ + ∇̄)/2`.
    pub levi_civita_mean: f64,
    /// `g(R̄(X,Y)Z,W) = −g(Z,R(X,Y)W)`.
    pub curvature_duality: f64,
    /// `L(X,Y)Z = −L̄(Y,X)Z`.
    pub interchange_swap: f64,
    /// `L(X,Z)Y − L(Y,Z)X = R̄(X,Y)Z`.
    pub interchange_difference: f64,
    /// `R = R^g + (∇^g_X K)(Y,Z) − (∇^g_Y K)(X,Z) + [K_X,K_Y]Z`.
    pub assembly_levi_civita: f64,
    /// `R = R^g + (∇_X K)(Y,Z) − (∇_Y K)(X,Z) − [K_X,K_Y]Z`.
    pub assembly_nabla: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.duality,
            self.total_symmetry,
            self.conjugate_from_k,
            self.levi_civita_mean,
            self.curvature_duality,
            self.interchange_swap,
            self.interchange_difference,
            self.assembly_levi_civita,
            self.assembly_nabla,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Hessian curvature together with the flatness check it presumes.
#[derive(Clone, Debug, PartialEq)]
pub struct HessianCurvature {
    pub tensor: PointTensor,
    /// Largest component of the curvature of the connection in use.
    pub flatness_residual: f64,
    /// Set when the structure is not Hessian at this point.
    pub not_hessian: bool,
}

/// Curvature components above this count as "not flat" in [`ChartModel::hessian_curvature`].
pub const HESSIAN_TOL: f64 = 1e-7;

fn check_shape<T>(v: &[T], len: usize, what: &str) -> Result<()> {
    if v.len() != len {
        return Err(Error::InvalidModel(format!(
            "{what}: expected {len} entries, got {}",
            v.len()
        )));
    }
    Ok(())
}

impl ChartModel {
    /// Builds a chart from metric components `g[i][j]` and connection
    /// coefficients `gamma[k][i][j] = Γ^k_ij`.
    pub fn new(
        name: impl Into<String>,
        domain: CoordBox,
        metric: Vec<Vec<JetFn>>,
        gamma: Vec<Vec<Vec<JetFn>>>,
    ) -> Result<Self> {
        let m = domain.dim();
        check_shape(&gamma, m, "connection")?;
        let mut flat = Vec::with_capacity(m * m * m);
        for plane in gamma {
            check_shape(&plane, m, "connection")?;
            for row in plane {
                check_shape(&row, m, "connection")?;
                flat.extend(row);
            }
        }
        for f in &flat {
            if f.arity() != m || f.max_order() < 2 {
                return Err(Error::InvalidModel(
                    "connection coefficients need arity = dim and derivatives to order 2".into(),
                ));
            }
        }
        let chart = Self::build(
            name.into(),
            domain,
            metric,
            ConnectionSpec::Coefficients(Arc::new(flat)),
        )?;
        chart.check_torsion()?;
        Ok(chart)
    }

    /// The Riemannian statistical manifold `(g, ∇^g)`.
    pub fn riemannian(
        name: impl Into<String>,
        domain: CoordBox,
        metric: Vec<Vec<JetFn>>,
    ) -> Result<Self> {
        Self::build(name.into(), domain, metric, ConnectionSpec::LeviCivita)
    }

    fn build(
        name: String,
        domain: CoordBox,
        metric: Vec<Vec<JetFn>>,
        connection: ConnectionSpec,
    ) -> Result<Self> {
        let m = domain.dim();
        check_shape(&metric, m, "metric")?;
        let mut flat = Vec::with_capacity(m * m);
        for row in metric {
            check_shape(&row, m, "metric")?;
            flat.extend(row);
        }
        for f in &flat {
            if f.arity() != m || f.max_order() < 3 {
                return Err(Error::InvalidModel(
                    "metric components need arity = dim and derivatives to order 3".into(),
                ));
            }
        }
        let chart = ChartModel {
            name,
            dim: m,
            domain,
            metric: Arc::new(flat),
            connection,
        };
        for x in chart.domain.grid(3) {
            let g = chart.metric_at(&x)?;
            let asym = (0..m)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .fold(0.0f64, |a, (i, j)| a.max((g[(i, j)] - g[(j, i)]).abs()));
            if asym > 1e-12 * (1.0 + g.amax()) {
                return Err(Error::InvalidModel(format!("metric is not symmetric at {x:?}")));
            }
            if g.cholesky().is_none() {
                return Err(Error::SingularMetric { point: x });
            }
        }
        Ok(chart)
    }

    fn check_torsion(&self) -> Result<()> {
        for x in self.domain.grid(3) {
            let l = self.local(&x, 0)?;
            let mut worst = 0.0f64;
            let mut scale = 1.0f64;
            for_each_index(self.dim, 3, |ix| {
                let a = l.nabla.at(ix).value();
                let b = l.nabla.at(&[ix[0], ix[2], ix[1]]).value();
                worst = worst.max((a - b).abs());
                scale = scale.max(a.abs());
            });
            if worst > 1e-12 * scale {
                return Err(Error::InvalidModel(format!(
                    "connection has torsion at {x:?} (|Γ^k_ij − Γ^k_ji| = {worst:.3e})"
                )));
            }
        }
        Ok(())
    }

    /// Flat Euclidean space on `domain`.
    pub fn euclidean(name: impl Into<String>, domain: CoordBox) -> Result<Self> {
        let m = domain.dim();
        let metric = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| JetFn::constant(m, if i == j { 1.0 } else { 0.0 }))
                    .collect()
            })
            .collect();
        Self::riemannian(name, domain, metric)
    }

    /// The same metric with the conjugate connection `∇̄`.
    pub fn conjugate(&self) -> ChartModel {
        let connection = match &self.connection {
            ConnectionSpec::Dual(inner) => (**inner).clone(),
            ConnectionSpec::LeviCivita => ConnectionSpec::LeviCivita,
            other => ConnectionSpec::Dual(Box::new(other.clone())),
        };
        let name = match self.name.strip_suffix("_conj") {
            Some(base) => base.to_string(),
            None => format!("{}_conj", self.name),
        };
        ChartModel {
            name,
            connection,
            ..self.clone()
        }
    }

    /// The same metric with its Levi-Civita connection.
    pub fn riemannian_part(&self) -> ChartModel {
        ChartModel {
            name: format!("{}_lc", self.name),
            connection: ConnectionSpec::LeviCivita,
            ..self.clone()
        }
    }

    pub fn with_domain(&self, domain: CoordBox) -> Result<ChartModel> {
        if domain.dim() != self.dim {
            return Err(Error::InvalidModel("domain dimension mismatch".into()));
        }
        Ok(ChartModel {
            domain,
            ..self.clone()
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &CoordBox {
        &self.domain
    }

    pub fn is_riemannian(&self) -> bool {
        matches!(self.connection, ConnectionSpec::LeviCivita)
    }

    /// Jets of the geometry about `y`: metric to order `order + 1`,
    /// connections to order `order`.
    pub(crate) fn local(&self, y: &[f64], order: usize) -> Result<Local> {
        if !self.domain.contains(y) {
            return Err(Error::OutOfDomain { point: y.to_vec() });
        }
        let m = self.dim;
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                entries.push(if j < i {
                    None
                } else {
                    Some(self.metric[i * m + j].taylor(y, order + 1)?)
                });
            }
        }
        let g = JetTensor::from_fn(m, 0, 2, |ix| {
            let (i, j) = (ix[0].min(ix[1]), ix[0].max(ix[1]));
            entries[i * m + j].clone().expect("upper triangle")
        });
        Local::assemble(y.to_vec(), g, |lc| self.resolve(&self.connection, lc, y, order))
    }

    fn resolve(
        &self,
        spec: &ConnectionSpec,
        lc: &JetTensor,
        y: &[f64],
        order: usize,
    ) -> Result<JetTensor> {
        match spec {
            ConnectionSpec::LeviCivita => Ok(lc.clone()),
            ConnectionSpec::Coefficients(c) => {
                let jets = c
                    .iter()
                    .map(|f| f.taylor(y, order))
                    .collect::<Result<Vec<_>>>()?;
                let mut it = jets.into_iter();
                Ok(JetTensor::from_fn(self.dim, 1, 2, |_| it.next().unwrap()))
            }
            ConnectionSpec::Dual(inner) => {
                let base = self.resolve(inner, lc, y, order)?;
                Ok(lc.zip(&base, |a, b| a.scale(2.0) - b))
            }
        }
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        let m = self.dim;
        let mut g = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = self.metric[i * m + j].value(x)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// `√det g`, the density of `dμ_g` in coordinates.
    pub fn volume_density(&self, x: &[f64]) -> Result<f64> {
        let g = self.metric_at(x)?;
        let chol = g
            .cholesky()
            .ok_or_else(|| Error::SingularMetric { point: x.to_vec() })?;
        Ok(chol.l().diagonal().product())
    }

    pub fn connection(&self, x: &[f64], which: Connection) -> Result<PointTensor> {
        let l = self.local(x, 0)?;
        Ok(PointTensor::from_jets(l.conn(which), x))
    }

    pub fn levi_civita(&self, x: &[f64]) -> Result<PointTensor> {
        self.connection(x, Connection::LeviCivita)
    }

    pub fn conjugate_connection(&self, x: &[f64]) -> Result<PointTensor> {
        self.connection(x, Connection::Conjugate)
    }

    /// `K = ∇ − ∇^g` as a (1,2) tensor.
    pub fn difference_tensor(&self, x: &[f64]) -> Result<PointTensor> {
        let l = self.local(x, 0)?;
        Ok(PointTensor::from_jets(&l.difference(), x))
    }

    pub fn tchebychev(&self, x: &[f64]) -> Result<PointTensor> {
        let l = self.local(x, 0)?;
        Ok(PointTensor::from_jets(&l.tchebychev(), x))
    }

    /// `div^g T` of the Tchebychev field.
    pub fn tchebychev_divergence(&self, x: &[f64]) -> Result<f64> {
        Ok(self.local(x, 1)?.tchebychev_divergence())
    }

    /// `max |(∇_i g)_jk − (∇_j g)_ik|` over coordinate index triples.
    pub fn codazzi_residual(&self, x: &[f64]) -> Result<f64> {
        let l = self.local(x, 0)?;
        let dg = l.g.covariant(&l.nabla);
        let mut worst = 0.0f64;
        for_each_index(self.dim, 3, |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let a = dg.at(&[j, k, i]).value();
            let b = dg.at(&[i, k, j]).value();
            worst = worst.max((a - b).abs());
        });
        Ok(worst)
    }

    pub fn curvature(&self, x: &[f64], which: Connection) -> Result<PointTensor> {
        let l = self.local(x, 1)?;
        Ok(PointTensor::from_jets(&l.curvature(which), x))
    }

    /// `L` (or `L̄` when `conj`).
    pub fn curvature_interchange(&self, x: &[f64], conj: bool) -> Result<PointTensor> {
        let l = self.local(x, 1)?;
        Ok(PointTensor::from_jets(&l.interchange(conj), x))
    }

    /// `H(Y,Z;X) = (∇_X K)(Y,Z)`; with `conj`, the Hessian curvature of the
    /// conjugate structure `(g, ∇̄)`, i.e. `(∇̄_X K̄)(Y,Z)` with `K̄ = −K`.
    pub fn hessian_curvature(&self, x: &[f64], conj: bool) -> Result<HessianCurvature> {
        let l = self.local(x, 1)?;
        let which = if conj {
            Connection::Conjugate
        } else {
            Connection::Nabla
        };
        let k = l.difference();
        let h = if conj {
            k.covariant(l.conn(which)).map(|j| -j)
        } else {
            k.covariant(l.conn(which))
        };
        let flat = PointTensor::from_jets(&l.curvature(which), x).max_abs();
        Ok(HessianCurvature {
            tensor: PointTensor::from_jets(&h, x),
            flatness_residual: flat,
            not_hessian: flat > HESSIAN_TOL,
        })
    }

    /// Covariant derivative of a tensor field; the derivative slot is last.
    pub fn covariant_derivative(
        &self,
        field: &TensorField,
        which: Connection,
        x: &[f64],
    ) -> Result<PointTensor> {
        let (up, down) = field.valence;
        check_shape(&field.components, self.dim.pow((up + down) as u32), "tensor field")?;
        let l = self.local(x, 0)?;
        let jets = field
            .components
            .iter()
            .map(|f| f.taylor(x, 1))
            .collect::<Result<Vec<_>>>()?;
        let mut it = jets.into_iter();
        let t = JetTensor::from_fn(self.dim, up, down, |_| it.next().unwrap());
        Ok(PointTensor::from_jets(&t.covariant(l.conn(which)), x))
    }

    /// `div^g v = tr ∇^g v`.
    pub fn divergence(&self, v: &[JetFn], x: &[f64]) -> Result<f64> {
        check_shape(v, self.dim, "vector field")?;
        let l = self.local(x, 0)?;
        let mut total = 0.0;
        for a in 0..self.dim {
            total += v[a].eval(x, &crate::jets::MultiIndex::from_axes(self.dim, &[a]))?;
            for b in 0..self.dim {
                total += l.lc.at(&[a, a, b]).value() * v[b].value(x)?;
            }
        }
        Ok(total)
    }

    /// Columns of `L⁻ᵀ` where `g = L Lᵀ` is the Cholesky factorization.
    pub fn orthonormal_frame(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric_at(x)?;
        frame_from_metric(&g).ok_or_else(|| Error::SingularMetric { point: x.to_vec() })
    }

    /// `g(R(X,Y)Y, X) / (g(X,X)g(Y,Y) − g(X,Y)²)`.
    pub fn sectional_curvature(
        &self,
        x: &[f64],
        which: Connection,
        u: &[f64],
        v: &[f64],
    ) -> Result<f64> {
        let r = self.curvature(x, which)?;
        let g = self.metric_at(x)?;
        let m = self.dim;
        let gm = |a: &[f64], b: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..m {
                for j in 0..m {
                    s += g[(i, j)] * a[i] * b[j];
                }
            }
            s
        };
        let mut ruv = vec![0.0; m];
        for_each_index(m, 4, |ix| {
            ruv[ix[0]] += r.get(ix) * u[ix[1]] * v[ix[2]] * v[ix[3]];
        });
        let denom = gm(u, u) * gm(v, v) - gm(u, v).powi(2);
        Ok(gm(&ruv, u) / denom)
    }

    pub fn identity_residuals(&self, x: &[f64]) -> Result<IdentityResiduals> {
        let l = self.local(x, 1)?;
        let m = self.dim;
        let g = &l.g;
        let k = l.difference();
        let nabla = &l.nabla;
        let conj = &l.conj;
        let r = l.curvature(Connection::Nabla);
        let rbar = l.curvature(Connection::Conjugate);
        let rg = l.curvature(Connection::LeviCivita);
        let lt = l.interchange(false);
        let lbar = l.interchange(true);
        let dk_lc = k.covariant(&l.lc);
        let dk = k.covariant(nabla);
        let v = |t: &JetTensor, ix: &[usize]| t.at(ix).value();

        let mut res = IdentityResiduals {
            duality: 0.0,
            total_symmetry: 0.0,
            conjugate_from_k: 0.0,
            levi_civita_mean: 0.0,
            curvature_duality: 0.0,
            interchange_swap: 0.0,
            interchange_difference: 0.0,
            assembly_levi_civita: 0.0,
            assembly_nabla: 0.0,
        };
        let bump = |slot: &mut f64, val: f64| *slot = slot.max(val.abs());

        for_each_index(m, 3, |ix| {
            let (i, j, kk) = (ix[0], ix[1], ix[2]);
            let mut d = g.at(&[j, kk]).derivative(i).value();
            for q in 0..m {
                d -= v(nabla, &[q, i, j]) * v(g, &[q, kk]) + v(conj, &[q, i, kk]) * v(g, &[j, q]);
            }
            bump(&mut res.duality, d);
            bump(
                &mut res.conjugate_from_k,
                v(conj, ix) - (v(&l.lc, ix) - v(&k, ix)),
            );
            bump(
                &mut res.levi_civita_mean,
                v(&l.lc, ix) - 0.5 * (v(nabla, ix) + v(conj, ix)),
            );
            let lowered = |a: usize, b: usize, c: usize| -> f64 {
                (0..m).map(|p| v(g, &[c, p]) * v(&k, &[p, a, b])).sum()
            };
            let c0 = lowered(i, j, kk);
            for perm in [[i, kk, j], [j, i, kk], [j, kk, i], [kk, i, j], [kk, j, i]] {
                bump(&mut res.total_symmetry, c0 - lowered(perm[0], perm[1], perm[2]));
            }
        });

        for_each_index(m, 4, |ix| {
            let (p, a, b, c) = (ix[0], ix[1], ix[2], ix[3]);
            // identity (3) with X=a, Y=b, Z=c, W=p
            let mut s = 0.0;
            for q in 0..m {
                s += v(g, &[q, p]) * v(&rbar, &[q, a, b, c]) + v(g, &[c, q]) * v(&r, &[q, a, b, p]);
            }
            bump(&mut res.curvature_duality, s);
            bump(
                &mut res.interchange_swap,
                v(&lt, &[p, a, b, c]) + v(&lbar, &[p, b, a, c]),
            );
            bump(
                &mut res.interchange_difference,
                v(&lt, &[p, a, c, b]) - v(&lt, &[p, b, c, a]) - v(&rbar, &[p, a, b, c]),
            );
            // [K_a, K_b] c
            let mut comm = 0.0;
            for q in 0..m {
                comm += v(&k, &[p, a, q]) * v(&k, &[q, b, c]) - v(&k, &[p, b, q]) * v(&k, &[q, a, c]);
            }
            let base = v(&r, ix) - v(&rg, ix);
            bump(
                &mut res.assembly_levi_civita,
                base - (v(&dk_lc, &[p, b, c, a]) - v(&dk_lc, &[p, a, c, b]) + comm),
            );
            bump(
                &mut res.assembly_nabla,
                base - (v(&dk, &[p, b, c, a]) - v(&dk, &[p, a, c, b]) - comm),
            );
        });
        Ok(res)
    }

    /// Structure labels over a sample grid, with constants fitted by least squares.
    pub fn classify(&self, grid: &[Vec<f64>], tol: f64) -> Result<StructureReport> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let mut codazzi = 0.0f64;
        let mut cs = 0.0f64;
        let mut flat = 0.0f64;
        let mut samples = Vec::with_capacity(grid.len());
        let (mut sec_num, mut sec_den) = (0.0, 0.0);
        let (mut chc_num, mut chc_den) = (0.0, 0.0);
        let (mut met_num, mut met_den) = (0.0, 0.0);
        for x in grid {
            codazzi = codazzi.max(self.codazzi_residual(x)?);
            let l = self.local(x, 1)?;
            let r = PointTensor::from_jets(&l.curvature(Connection::Nabla), x);
            let rg = PointTensor::from_jets(&l.curvature(Connection::LeviCivita), x);
            let lt = PointTensor::from_jets(&l.interchange(false), x);
            let h = PointTensor::from_jets(&l.difference().covariant(&l.nabla), x);
            let g = l.metric_matrix();
            cs = cs.max(r.max_abs_diff(&lt));
            flat = flat.max(r.max_abs());
            let sec = sectional_basis(&g);
            let chc = chc_basis(&g);
            sec_num += dot(r.components(), &sec);
            sec_den += dot(&sec, &sec);
            met_num += dot(rg.components(), &sec);
            met_den += dot(&sec, &sec);
            chc_num += dot(h.components(), &chc);
            chc_den += dot(&chc, &chc);
            samples.push((r, rg, h, sec, chc));
        }
        let lambda = sec_num / sec_den;
        let lambda_g = met_num / met_den;
        let c = chc_num / chc_den;
        let (mut sec_res, mut met_res, mut chc_res) = (0.0f64, 0.0f64, 0.0f64);
        for (r, rg, h, sec, chc) in &samples {
            sec_res = sec_res.max(max_residual(r.components(), sec, lambda));
            met_res = met_res.max(max_residual(rg.components(), sec, lambda_g));
            chc_res = chc_res.max(max_residual(h.components(), chc, c));
        }
        Ok(StructureReport {
            points: grid.len(),
            tolerance: tol,
            codazzi_residual: codazzi,
            codazzi_ok: codazzi < tol,
            conjugate_symmetric_residual: cs,
            conjugate_symmetric: cs < tol,
            sectional: Fit {
                value: lambda,
                residual: sec_res,
            },
            constant_sectional: sec_res < tol,
            hessian_residual: flat,
            hessian: flat < tol,
            chc: Fit {
                value: c,
                residual: chc_res,
            },
            is_chc: flat < tol && chc_res < tol,
            metric_sectional: Fit {
                value: lambda_g,
                residual: met_res,
            },
        })
    }
}

pub(crate) fn frame_from_metric(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = g.clone().cholesky()?;
    let l = chol.l();
    let linv = l.try_inverse()?;
    Some(linv.transpose())
}

/// Components of `g(Y,Z)X − g(X,Z)Y` in the curvature layout.
pub(crate) fn sectional_basis(g: &DMatrix<f64>) -> Vec<f64> {
    let m = g.nrows();
    let mut out = Vec::with_capacity(m.pow(4));
    for_each_index(m, 4, |ix| {
        let (p, i, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        out.push(d(p, i) * g[(j, k)] - d(p, j) * g[(i, k)]);
    });
    out
}

/// Components of `−½(g(X,Y)Z + g(X,Z)Y)` in the Hessian-curvature layout, so
/// that CHC `c` reads `H = c · basis`.
pub(crate) fn chc_basis(g: &DMatrix<f64>) -> Vec<f64> {
    let m = g.nrows();
    let mut out = Vec::with_capacity(m.pow(4));
    for_each_index(m, 4, |ix| {
        let (p, j, k, i) = (ix[0], ix[1], ix[2], ix[3]);
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        out.push(-0.5 * (g[(i, j)] * d(p, k) + g[(i, k)] * d(p, j)));
    });
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_residual(values: &[f64], basis: &[f64], c: f64) -> f64 {
    let c = if c.is_finite() { c } else { 0.0 };
    values
        .iter()
        .zip(basis)
        .fold(0.0, |m, (v, b)| m.max((v - c * b).abs()))
}

//! Graph immersions `x ↦ (x, F(x))` with constant transversal field `ξ = e_{m+1}`.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::MapModel;
use crate::error::{Error, Result};
use crate::jets::{CoordBox, JetFn, MultiIndex};
use crate::manifold::ChartModel;

/// Tolerance on `|det Hess F − 1|` for the improper-affine-sphere flag.
pub const IMPROPER_TOL: f64 = 1e-8;

/// A locally strongly convex graph immersion with its induced statistical
/// structure `g = Hess F`, `∇ = ∂` (flat coordinates).
#[derive(Clone, Debug)]
pub struct GraphImmersion {
    graph: JetFn,
    map: MapModel,
    improper_affine_sphere: bool,
}

fn hessian(f: &JetFn, x: &[f64]) -> Result<DMatrix<f64>> {
    let m = x.len();
    let jet = f.taylor(x, 2)?;
    Ok(DMatrix::from_fn(m, m, |i, j| {
        jet.partial(MultiIndex::from_axes(m, &[i, j]).exponents())
    }))
}

/// Builds the induced chart and the immersion into Euclidean `(m+1)`-space.
pub fn induce_from_graph(
    name: impl Into<String>,
    f: JetFn,
    domain: CoordBox,
) -> Result<GraphImmersion> {
    let name = name.into();
    let m = domain.dim();
    if f.arity() != m {
        return Err(Error::InvalidModel("graph function arity must match the domain".into()));
    }
    let mut improper = true;
    let mut samples = domain.grid(5);
    samples.extend(corners(&domain));
    let (mut zlo, mut zhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in &samples {
        let h = hessian(&f, x)?;
        let chol = h
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotConvex { point: x.clone() })?;
        let det = chol.l().diagonal().product().powi(2);
        if (det - 1.0).abs() >= IMPROPER_TOL {
            improper = false;
        }
        let z = f.value(x)?;
        zlo = zlo.min(z);
        zhi = zhi.max(z);
    }

    let metric = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| f.partial(&MultiIndex::from_axes(m, &[i, j])))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let gamma = (0..m)
        .map(|_| {
            (0..m)
                .map(|_| (0..m).map(|_| JetFn::constant(m, 0.0)).collect())
                .collect()
        })
        .collect();
    let induced = ChartModel::new(format!("{name}_induced"), domain.clone(), metric, gamma)?;

    let mut lo: Vec<f64> = domain.lower().iter().map(|v| v - 1.0).collect();
    let mut hi: Vec<f64> = domain.upper().iter().map(|v| v + 1.0).collect();
    lo.push(zlo - 1.0);
    hi.push(zhi + 1.0);
    let target = ChartModel::euclidean(format!("euclidean{}", m + 1), CoordBox::new(lo, hi)?)?;

    let mut comps: Vec<JetFn> = (0..m).map(|i| JetFn::coordinate(m, i)).collect();
    comps.push(f.clone());
    let map = MapModel::new(name, Arc::new(induced), Arc::new(target), comps)?;
    Ok(GraphImmersion {
        graph: f,
        map,
        improper_affine_sphere: improper,
    })
}

fn corners(b: &CoordBox) -> Vec<Vec<f64>> {
    let d = b.dim();
    (0..1usize << d)
        .map(|mask| {
            (0..d)
                .map(|a| if mask >> a & 1 == 1 { b.upper()[a] } else { b.lower()[a] })
                .collect()
        })
        .collect()
}

impl GraphImmersion {
    pub fn map(&self) -> &MapModel {
        &self.map
    }

    pub fn induced(&self) -> &ChartModel {
        self.map.source()
    }

    pub fn graph(&self) -> &JetFn {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.induced().dim()
    }

    pub fn improper_affine_sphere(&self) -> bool {
        self.improper_affine_sphere
    }

    /// The transversal field `ξ = (0, …, 0, 1)`.
    pub fn xi(&self) -> Vec<f64> {
        let mut xi = vec![0.0; self.dim() + 1];
        xi[self.dim()] = 1.0;
        xi
    }

    /// `S` from `D_X ξ = −f_*(SX)`; zero because `ξ` is constant.
    pub fn shape_operator(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if !self.induced().domain().contains(x) {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        let m = self.dim();
        // D_X ξ = ∂_X ξ = 0 for a constant transversal field
        Ok(DMatrix::zeros(m, m))
    }

    /// Largest component of `D_X f_*Y − f_*∇_X Y − g(X,Y)ξ` over coordinate fields.
    pub fn gauss_residual(&self, x: &[f64]) -> Result<f64> {
        let m = self.dim();
        let jets = self
            .map
            .components()
            .iter()
            .map(|c| c.taylor(x, 2))
            .collect::<Result<Vec<_>>>()?;
        let gamma = self.induced().connection(x, crate::manifold::Connection::Nabla)?;
        let g = self.induced().metric_at(x)?;
        let xi = self.xi();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                for (p, jet) in jets.iter().enumerate() {
                    let alpha = MultiIndex::from_axes(m, &[i, j]);
                    let mut r = jet.partial(alpha.exponents()) - g[(i, j)] * xi[p];
                    for k in 0..m {
                        r -= gamma.get(&[k, i, j]) * jets[p].partial(MultiIndex::from_axes(m, &[k]).exponents());
                    }
                    worst = worst.max(r.abs());
                }
            }
        }
        Ok(worst)
    }

    /// `m (−f_*(tr_g ∇S) − tr S ξ − div^g(T^M) ξ)`, which equals `τ₂(f)` for
    /// graph immersions with `S = 0`.
    pub fn affine_bitension(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.dim();
        let s = self.shape_operator(x)?;
        let div_t = self.induced().tchebychev_divergence(x)?;
        let trace_s = s.trace();
        // S ≡ 0 so tr_g ∇S = 0
        let mut out = vec![0.0; m + 1];
        for (p, xi) in self.xi().iter().enumerate() {
            out[p] = m as f64 * (-trace_s * xi - div_t * xi);
        }
        Ok(out)
    }
}

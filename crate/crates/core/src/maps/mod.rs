//! Smooth maps between charts: tension and bi-tension fields, statistical
//! connection Laplacians along a map, and graph immersions.

pub(crate) mod along;
mod graph;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::{CoordBox, Jet, JetFn};
use crate::manifold::{frame_from_metric, ChartModel, Connection};
use crate::variation::QuadratureRule;
pub(crate) use along::Along;
pub use graph::{induce_from_graph, GraphImmersion, IMPROPER_TOL};

/// Which pair of connections `(source, target)` a tension field or Laplacian uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// `(∇^M, ∇^N)`.
    Standard,
    /// `(∇̄^M, ∇̄^N)`.
    Conjugate,
    /// `(∇^g, ∇^h)`.
    Riemannian,
}

impl Flavor {
    pub fn source(self) -> Connection {
        match self {
            Flavor::Standard => Connection::Nabla,
            Flavor::Conjugate => Connection::Conjugate,
            Flavor::Riemannian => Connection::LeviCivita,
        }
    }

    pub fn target(self) -> Connection {
        self.source()
    }
}

/// A smooth map `u: M → N` given by target-coordinate components on the source chart.
#[derive(Clone)]
pub struct MapModel {
    name: String,
    pub(crate) source: Arc<ChartModel>,
    pub(crate) target: Arc<ChartModel>,
    pub(crate) components: Arc<Vec<JetFn>>,
}

impl fmt::Debug for MapModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapModel")
            .field("name", &self.name)
            .field("source", &self.source.name())
            .field("target", &self.target.name())
            .finish()
    }
}

/// A section of the pullback bundle `u⁻¹TN`, given by target-coordinate
/// components on the source chart.
#[derive(Clone, Debug)]
pub struct Section {
    components: Arc<Vec<JetFn>>,
    support: Option<CoordBox>,
    zero: bool,
}

impl Section {
    /// A section with optional declared support. When a support box is given,
    /// the components and their first two derivatives must vanish on its faces.
    pub fn new(components: Vec<JetFn>, support: Option<CoordBox>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidModel("section needs at least one component".into()));
        }
        let m = components[0].arity();
        if components.iter().any(|f| f.arity() != m) {
            return Err(Error::InvalidModel("section components disagree on arity".into()));
        }
        if let Some(s) = &support {
            if s.dim() != m {
                return Err(Error::InvalidModel("support dimension mismatch".into()));
            }
            for x in face_samples(s, 5) {
                for f in &components {
                    let jet = f.taylor(&x, 2.min(f.max_order()))?;
                    if jet.coefficients().iter().any(|c| c.abs() > 1e-10) {
                        return Err(Error::SupportViolation);
                    }
                }
            }
        }
        Ok(Section {
            components: Arc::new(components),
            support,
            zero: false,
        })
    }

    /// The zero section of an `n`-dimensional target over an `m`-dimensional source.
    pub fn zero(m: usize, n: usize) -> Self {
        Section {
            components: Arc::new((0..n).map(|_| JetFn::constant(m, 0.0)).collect()),
            support: None,
            zero: true,
        }
    }

    pub fn components(&self) -> &[JetFn] {
        &self.components
    }

    pub fn support(&self) -> Option<&CoordBox> {
        self.support.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Compactly supported inside `omega` (the zero section always is).
    pub fn supported_in(&self, omega: &CoordBox) -> bool {
        self.zero || self.support.as_ref().is_some_and(|s| omega.contains_box(s))
    }

    pub(crate) fn jets(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.components.iter().map(|f| f.taylor(x, order)).collect()
    }

    pub fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|f| f.value(x)).collect()
    }
}

/// Points on the faces of a box (a `per_axis` grid on each face).
fn face_samples(b: &CoordBox, per_axis: usize) -> Vec<Vec<f64>> {
    let d = b.dim();
    let mut out = Vec::new();
    if d == 1 {
        return vec![vec![b.lower()[0]], vec![b.upper()[0]]];
    }
    for axis in 0..d {
        let lower: Vec<f64> = (0..d).filter(|&a| a != axis).map(|a| b.lower()[a]).collect();
        let upper: Vec<f64> = (0..d).filter(|&a| a != axis).map(|a| b.upper()[a]).collect();
        let face = CoordBox::new(lower, upper).expect("face of a valid box");
        for side in [b.lower()[axis], b.upper()[axis]] {
            for mut p in face.grid(per_axis) {
                p.insert(axis, side);
                out.push(p);
            }
        }
    }
    out
}

pub(crate) fn inner(h: &DMatrix<f64>, a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += h[(i, j)] * a[i] * b[j];
        }
    }
    s
}

pub(crate) fn values(v: &[Jet]) -> Vec<f64> {
    v.iter().map(Jet::value).collect()
}

impl MapModel {
    /// Checks arities and that `u` maps a sample grid of the source domain into
    /// the target domain.
    pub fn new(
        name: impl Into<String>,
        source: impl Into<Arc<ChartModel>>,
        target: impl Into<Arc<ChartModel>>,
        components: Vec<JetFn>,
    ) -> Result<Self> {
        let source = source.into();
        let target = target.into();
        if components.len() != target.dim() {
            return Err(Error::InvalidModel(format!(
                "map into a {}-dimensional target needs {} components, got {}",
                target.dim(),
                target.dim(),
                components.len()
            )));
        }
        if components.iter().any(|f| f.arity() != source.dim()) {
            return Err(Error::InvalidModel(
                "map components must be functions of the source coordinates".into(),
            ));
        }
        let map = MapModel {
            name: name.into(),
            source,
            target,
            components: Arc::new(components),
        };
        for x in map.source.domain().grid(5) {
            let y = map.value(&x)?;
            if !map.target.domain().contains(&y) {
                return Err(Error::OutOfDomain { point: y });
            }
        }
        Ok(map)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &ChartModel {
        &self.source
    }

    pub fn target(&self) -> &ChartModel {
        &self.target
    }

    pub fn source_arc(&self) -> Arc<ChartModel> {
        self.source.clone()
    }

    pub fn target_arc(&self) -> Arc<ChartModel> {
        self.target.clone()
    }

    pub fn components(&self) -> &[JetFn] {
        &self.components
    }

    pub fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|f| f.value(x)).collect()
    }

    /// The same map with the target connection replaced (e.g. by its conjugate).
    pub fn with_target(&self, target: impl Into<Arc<ChartModel>>) -> Result<MapModel> {
        MapModel::new(
            self.name.clone(),
            self.source.clone(),
            target,
            self.components.to_vec(),
        )
    }

    /// The same map with the source structure replaced.
    pub fn with_source(&self, source: impl Into<Arc<ChartModel>>) -> Result<MapModel> {
        MapModel::new(
            self.name.clone(),
            source,
            self.target.clone(),
            self.components.to_vec(),
        )
    }

    pub(crate) fn along(&self, x: &[f64], ku: usize, kt: usize) -> Result<Along> {
        if !self.source.domain().contains(x) {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        Along::new(self, x, ku, kt)
    }

    /// Jacobian `∂_a u^p` as an `n × m` matrix.
    pub fn pushforward(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.along(x, 1, 0)?.du_values())
    }

    pub fn tension(&self, x: &[f64], flavor: Flavor) -> Result<Vec<f64>> {
        let frame = self.source.orthonormal_frame(x)?;
        self.tension_in_frame(x, flavor, &frame)
    }

    /// `τ = Σ_i B(e_i, e_i)` for an explicit orthonormal frame (columns of `frame`).
    pub fn tension_in_frame(
        &self,
        x: &[f64],
        flavor: Flavor,
        frame: &DMatrix<f64>,
    ) -> Result<Vec<f64>> {
        let al = self.along(x, 2, 0)?;
        let b = al.second_fundamental(flavor);
        let m = al.m;
        Ok((0..al.n)
            .map(|p| {
                let mut s = 0.0;
                for i in 0..frame.ncols() {
                    for a in 0..m {
                        for c in 0..m {
                            s += frame[(a, i)] * frame[(c, i)] * b[(p * m + a) * m + c].value();
                        }
                    }
                }
                s
            })
            .collect())
    }

    /// The statistical connection Laplacian of `v` along the map.
    pub fn laplacian(&self, v: &Section, x: &[f64], flavor: Flavor) -> Result<Vec<f64>> {
        self.check_section(v)?;
        let al = self.along(x, 2, 1)?;
        let s = v.jets(x, 2)?;
        Ok(values(&al.laplacian(&s, flavor)))
    }

    /// `τ₂ = Δ̄ᵘτ + div^g(T^M)τ − Σ L^N(u_*e_i, τ)u_*e_i − K^N(τ, τ)`.
    pub fn bitension(&self, x: &[f64]) -> Result<Vec<f64>> {
        let al = self.along(x, 4, 2)?;
        Ok(bitension_from(&al))
    }

    /// `E₂ = ∫_Ω ‖τ(u)‖²_h dμ_g`.
    pub fn bienergy(&self, omega: &CoordBox, quad: &QuadratureRule) -> Result<f64> {
        self.check_omega(omega)?;
        quad.integrate(omega, |x| {
            let al = self.along(x, 2, 0)?;
            let tau = values(&al.tension(Flavor::Standard));
            Ok(inner(&al.h_values(), &tau, &tau) * al.sqrt_det_g())
        })
    }

    pub(crate) fn check_omega(&self, omega: &CoordBox) -> Result<()> {
        if !self.source.domain().contains_box(omega) {
            return Err(Error::OutOfDomain {
                point: omega.lower().to_vec(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_section(&self, v: &Section) -> Result<()> {
        if v.components().len() != self.target.dim()
            || v.components().iter().any(|f| f.arity() != self.source.dim())
        {
            return Err(Error::InvalidModel(
                "section shape does not match the map".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn bitension_from(al: &Along) -> Vec<f64> {
    let (m, n) = (al.m, al.n);
    let tau_jets = al.tension(Flavor::Standard);
    let lap = values(&al.laplacian(&tau_jets, Flavor::Conjugate));
    let tau = values(&tau_jets);
    let div_t = al.src.tchebychev_divergence();
    let l = al.tgt.interchange(false);
    let k = al.tgt.difference();
    let w = al.w_values();
    let du = al.du_values();
    (0..n)
        .map(|p| {
            let mut v = lap[p] + div_t * tau[p];
            for a in 0..m {
                for b in 0..m {
                    let mut s = 0.0;
                    for q in 0..n {
                        for r in 0..n {
                            for t in 0..n {
                                s += l.at(&[p, q, r, t]).value() * du[(q, a)] * tau[r] * du[(t, b)];
                            }
                        }
                    }
                    v -= w[(a, b)] * s;
                }
            }
            for q in 0..n {
                for r in 0..n {
                    v -= k.at(&[p, q, r]).value() * tau[q] * tau[r];
                }
            }
            v
        })
        .collect()
}

/// `|∫⟨Δξ, η⟩ − ∫⟨ξ, Δ̄η⟩ − ∫ div^g(T)⟨ξ, η⟩|` over `omega`, for vector
/// fields on `c` (sections along the identity map). One of the two must have
/// a declared support inside `omega`; the integral runs over that support.
pub fn ibp_residual(
    c: &ChartModel,
    xi: &Section,
    eta: &Section,
    omega: &CoordBox,
    quad: &QuadratureRule,
) -> Result<f64> {
    if xi.is_zero() || eta.is_zero() {
        return Ok(0.0);
    }
    let supp = [xi.support(), eta.support()]
        .into_iter()
        .flatten()
        .find(|s| omega.contains_box(s))
        .ok_or(Error::SupportViolation)?
        .clone();
    let m = c.dim();
    let id = MapModel::new(
        format!("id_{}", c.name()),
        c.clone(),
        c.clone(),
        (0..m).map(|a| JetFn::coordinate(m, a)).collect(),
    )?;
    id.check_omega(omega)?;
    let (a, b, d) = (
        quad.integrate(&supp, |x| {
            let g = c.metric_at(x)?;
            let lap = id.laplacian(xi, x, Flavor::Standard)?;
            Ok(inner(&g, &lap, &eta.value(x)?) * c.volume_density(x)?)
        })?,
        quad.integrate(&supp, |x| {
            let g = c.metric_at(x)?;
            let lap = id.laplacian(eta, x, Flavor::Conjugate)?;
            Ok(inner(&g, &xi.value(x)?, &lap) * c.volume_density(x)?)
        })?,
        quad.integrate(&supp, |x| {
            let g = c.metric_at(x)?;
            let pair = inner(&g, &xi.value(x)?, &eta.value(x)?);
            Ok(c.tchebychev_divergence(x)? * pair * c.volume_density(x)?)
        })?,
    );
    Ok((a - b - d).abs())
}

/// An orthonormal frame of `g` at `x` rotated by `angle` in the `(0, 1)` plane.
pub fn rotated_frame(chart: &ChartModel, x: &[f64], angle: f64) -> Result<DMatrix<f64>> {
    let g = chart.metric_at(x)?;
    let e = frame_from_metric(&g).ok_or_else(|| Error::SingularMetric { point: x.to_vec() })?;
    let m = g.nrows();
    let mut rot = DMatrix::identity(m, m);
    if m >= 2 {
        let (s, c) = angle.sin_cos();
        rot[(0, 0)] = c;
        rot[(0, 1)] = -s;
        rot[(1, 0)] = s;
        rot[(1, 1)] = c;
    }
    Ok(e * rot)
}

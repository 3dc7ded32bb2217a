//! Smooth one-parameter variations `F(x, t)` of a map.

use crate::error::{Error, Result};
use crate::jets::{CoordBox, JetFn, MultiIndex};
use crate::maps::{MapModel, Section};

/// Tolerance on `|F(x, 0) − u(x)|` at construction.
const BASE_TOL: f64 = 1e-12;

/// `F : Ω × (−ε, ε) → N` with `F(·, 0) = u`. Each component is a function of
/// `m + 1` variables, the last one being `t`.
#[derive(Clone, Debug)]
pub struct VariationFamily {
    base: MapModel,
    ft: Vec<JetFn>,
    epsilon: f64,
    support: Option<CoordBox>,
}

fn sample_grid(b: &CoordBox) -> Vec<Vec<f64>> {
    let per_axis = match b.dim() {
        1 => 33,
        2 => 9,
        _ => 5,
    };
    b.grid(per_axis)
}

impl VariationFamily {
    pub fn new(
        base: MapModel,
        ft: Vec<JetFn>,
        epsilon: f64,
        support: Option<CoordBox>,
    ) -> Result<Self> {
        let m = base.source().dim();
        if ft.len() != base.target().dim() || ft.iter().any(|f| f.arity() != m + 1) {
            return Err(Error::InvalidModel(
                "a variation needs one function of (x, t) per target coordinate".into(),
            ));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::BadParams(format!("epsilon must be positive, got {epsilon}")));
        }
        for x in sample_grid(base.source().domain()) {
            let u = base.value(&x)?;
            let mut y = x.clone();
            y.push(0.0);
            for (f, up) in ft.iter().zip(&u) {
                let r = (f.value(&y)? - up).abs();
                if r >= BASE_TOL * (1.0 + up.abs()) {
                    return Err(Error::InvalidModel(format!(
                        "variation does not start at the base map (residual {r:e} at {x:?})"
                    )));
                }
            }
        }
        Ok(VariationFamily {
            base,
            ft,
            epsilon,
            support,
        })
    }

    /// `F(x, t) = u(x) + t V(x)` with `ε` a tenth of the distance from the
    /// image of the support to the target boundary, divided by `max |V|`.
    pub fn additive(base: MapModel, v: &Section) -> Result<Self> {
        let m = base.source().dim();
        if v.components().len() != base.target().dim()
            || v.components().iter().any(|f| f.arity() != m)
        {
            return Err(Error::InvalidModel("section shape does not match the map".into()));
        }
        let region = v.support().unwrap_or(base.source().domain()).clone();
        let mut margin = f64::INFINITY;
        let mut vmax = 0.0f64;
        for x in sample_grid(&region) {
            let y = base.value(&x)?;
            margin = margin.min(base.target().domain().margin(&y));
            vmax = v.value(&x)?.iter().fold(vmax, |a, c| a.max(c.abs()));
        }
        let epsilon = if vmax > 0.0 { 0.1 * margin / vmax } else { 1.0 };
        let ft = base
            .components()
            .iter()
            .zip(v.components())
            .map(|(u, vp)| {
                let (u, vp) = (u.clone(), vp.clone());
                let order = u.max_order().min(vp.max_order());
                JetFn::analytic_fallible(m + 1, move |z| {
                    let x = &z[..m];
                    Ok(&u.compose(x)? + &(&z[m] * &vp.compose(x)?))
                })
                .with_max_order(order)
            })
            .collect();
        VariationFamily::new(base, ft, epsilon, v.support().cloned())
    }

    pub fn base(&self) -> &MapModel {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Box containing the support of `∂_t F(·, 0)`, if declared.
    pub fn support(&self) -> Option<&CoordBox> {
        self.support.as_ref()
    }

    pub fn components(&self) -> &[JetFn] {
        &self.ft
    }

    /// The variation field `V = ∂_t F(·, 0)`, carrying the declared support.
    pub fn variation_field(&self) -> Result<Section> {
        let m = self.base.source().dim();
        let dt = MultiIndex::from_axes(m + 1, &[m]);
        let comps = self
            .ft
            .iter()
            .map(|f| f.partial(&dt)?.restrict_last(0.0))
            .collect::<Result<Vec<_>>>()?;
        Section::new(comps, self.support.clone())
    }

    /// The map `u_t = F(·, t)`.
    pub fn at(&self, t: f64) -> Result<MapModel> {
        if t.abs() >= self.epsilon {
            return Err(Error::DomainEscape { t });
        }
        let comps = self
            .ft
            .iter()
            .map(|f| f.restrict_last(t))
            .collect::<Result<Vec<_>>>()?;
        MapModel::new(
            self.base.name().to_string(),
            self.base.source_arc(),
            self.base.target_arc(),
            comps,
        )
        .map_err(|e| match e {
            Error::OutOfDomain { .. } => Error::DomainEscape { t },
            e => e,
        })
    }
}

#[cfg(test)]
mod tests {
    use crate::catalog::{self, Params};
    use crate::jets::CoordBox;

    #[test]
    fn variation_field_recovers_the_additive_direction() {
        let fam = catalog::family("line_bump", &Params::new()).unwrap();
        let v = fam.variation_field().unwrap();
        let supp = CoordBox::new(vec![-0.6], vec![0.6]).unwrap();
        let want = catalog::bump_section(&supp, &[1.0, -0.5]).unwrap();
        assert_eq!(v.support(), Some(&supp));
        for t in [-0.5, -0.1, 0.0, 0.3, 0.59] {
            let (a, b) = (v.value(&[t]).unwrap(), want.value(&[t]).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-14, "{t}: {x} vs {y}");
            }
        }
        let j = v.components()[0].taylor(&[0.2], 2).unwrap();
        let k = want.components()[0].taylor(&[0.2], 2).unwrap();
        assert!((j.partial(&[2]) - k.partial(&[2])).abs() < 1e-10);
    }
}

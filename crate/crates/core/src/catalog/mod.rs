//! Named models: charts, curves, graph immersions and variation families,
//! all with analytic jets.
//!
//! Every entry takes a string-keyed table of real parameters. Missing keys
//! fall back to the defaults listed by [`entries`]; unrecognized keys are
//! rejected.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::jets::{CoordBox, JetFn, MAX_VARS};
use crate::manifold::ChartModel;
use crate::maps::{induce_from_graph, GraphImmersion, MapModel, Section};
use crate::variation::{bump, BumpProfile, VariationFamily};

pub type Params = BTreeMap<String, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntryKind {
    Chart,
    Map,
    Immersion,
    Family,
}

impl EntryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntryKind::Chart => "chart",
            EntryKind::Map => "map",
            EntryKind::Immersion => "immersion",
            EntryKind::Family => "family",
        }
    }
}

/// A catalog listing: name, kind, default parameters and a one-line summary.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: EntryKind,
    pub params: Vec<(String, f64)>,
    pub summary: &'static str,
}

fn entry(name: &'static str, kind: EntryKind, params: &[(&str, f64)], summary: &'static str) -> CatalogEntry {
    CatalogEntry {
        name,
        kind,
        params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        summary,
    }
}

/// All entries with their default parameters. `m`-dependent keys
/// (`lambda1..lambdam`, `c1..cn`) are listed for the default `m`.
pub fn entries() -> Vec<CatalogEntry> {
    use EntryKind::*;
    vec![
        entry("euclidean", Chart, &[("m", 2.0)], "flat (I, ∂) on [-2,2]^m"),
        entry("positive_orthant", Chart, &[("m", 2.0)], "g = I, Γ^i_ii = 1/y^i on [0.25,4]^m"),
        entry("positive_orthant_conj", Chart, &[("m", 2.0)], "g = I, Γ^i_ii = -1/y^i on [0.25,4]^m"),
        entry("normal_distributions", Chart, &[], "Fisher metric (dx²+2dy²)/y² with the mixture connection"),
        entry("normal_distributions_exp", Chart, &[], "Fisher metric with the exponential connection"),
        entry("normal_distributions_alpha", Chart, &[("alpha", 0.5)], "Fisher metric with the α-connection"),
        entry("normal_distributions_fisher", Chart, &[], "Fisher metric with its Levi-Civita connection"),
        entry(
            "parabola_curve",
            Map,
            &[("m", 2.0), ("lambda1", 1.0), ("lambda2", 1.0)],
            "t ↦ (λ_1 t², …, λ_m t²) on [0.5,2] into positive_orthant(m)",
        ),
        entry(
            "parabola_perturbed",
            Map,
            &[("m", 2.0), ("lambda1", 1.0), ("lambda2", 1.0), ("delta", 0.5)],
            "parabola_curve with δ(t-0.5)(2-t) added to the first component (not biharmonic)",
        ),
        entry("exp_curve", Map, &[("lambda", 1.0)], "t ↦ (0, e^{λt}) on [-1,1] into normal_distributions"),
        entry("exp_curve_exp", Map, &[("lambda", 1.0)], "exp_curve into normal_distributions_exp"),
        entry(
            "line",
            Map,
            &[("m", 2.0), ("a1", 0.0), ("a2", 0.0), ("b1", 1.0), ("b2", 0.5)],
            "t ↦ a + t b on [-1,1] into euclidean(m)",
        ),
        entry("paraboloid", Immersion, &[("m", 2.0)], "graph of |x|²/2 over [-1,1]^m"),
        entry(
            "line_bump",
            Family,
            &[("m", 2.0), ("lo", -0.6), ("hi", 0.6), ("c1", 1.0), ("c2", -0.5)],
            "line + t·bump·c",
        ),
        entry(
            "parabola_bump",
            Family,
            &[("m", 2.0), ("lambda1", 1.0), ("lambda2", 1.0), ("lo", 0.6), ("hi", 1.8), ("c1", 1.0), ("c2", 0.0)],
            "parabola_curve + t·bump·c",
        ),
        entry(
            "parabola_perturbed_bump",
            Family,
            &[("m", 2.0), ("lambda1", 1.0), ("lambda2", 1.0), ("delta", 0.5), ("lo", 0.6), ("hi", 1.8), ("c1", 1.0), ("c2", 0.0)],
            "parabola_perturbed + t·bump·c",
        ),
        entry(
            "exp_curve_bump",
            Family,
            &[("lambda", 1.0), ("lo", -0.8), ("hi", 0.8), ("phi", 1.0), ("psi", 1.0)],
            "exp_curve + t(φγ̇ + ψX), X = e^{λt}∂x, φ and ψ multiples of one bump",
        ),
        entry(
            "exp_curve_exp_bump",
            Family,
            &[("lambda", 1.0), ("lo", -0.8), ("hi", 0.8), ("phi", 1.0), ("psi", 1.0)],
            "exp_curve_exp + t(φγ̇ + ψX)",
        ),
        entry(
            "paraboloid_bump",
            Family,
            &[("m", 2.0), ("lo", -0.6), ("hi", 0.6), ("c1", 0.0), ("c2", 0.0), ("c3", 1.0)],
            "paraboloid + t·w·c with the polynomial window w on [lo,hi]^m",
        ),
    ]
}

/// Looks up parameters, rejecting unknown keys.
struct Reader<'a> {
    entry: &'a str,
    params: &'a Params,
    allowed: Vec<String>,
}

impl<'a> Reader<'a> {
    fn new(entry: &'a str, params: &'a Params) -> Self {
        Reader {
            entry,
            params,
            allowed: Vec::new(),
        }
    }

    fn get(&mut self, key: &str, default: f64) -> Result<f64> {
        self.allowed.push(key.to_string());
        let v = self.params.get(key).copied().unwrap_or(default);
        if !v.is_finite() {
            return Err(Error::BadParams(format!("{}: `{key}` must be finite", self.entry)));
        }
        Ok(v)
    }

    fn dim(&mut self, default: usize, max: usize) -> Result<usize> {
        let v = self.get("m", default as f64)?;
        if v.fract() != 0.0 || v < 1.0 || v > max as f64 {
            return Err(Error::BadParams(format!(
                "{}: `m` must be an integer in 1..={max}, got {v}",
                self.entry
            )));
        }
        Ok(v as usize)
    }

    fn list(&mut self, prefix: &str, n: usize, default: impl Fn(usize) -> f64) -> Result<Vec<f64>> {
        (0..n).map(|i| self.get(&format!("{prefix}{}", i + 1), default(i))).collect()
    }

    fn finish(self) -> Result<()> {
        for key in self.params.keys() {
            if !self.allowed.contains(key) {
                return Err(Error::BadParams(format!("{}: unknown parameter `{key}`", self.entry)));
            }
        }
        Ok(())
    }
}

fn interval(lo: f64, hi: f64) -> CoordBox {
    CoordBox::new(vec![lo], vec![hi]).expect("static interval")
}

fn zero(m: usize) -> JetFn {
    JetFn::constant(m, 0.0)
}

fn identity_metric(m: usize) -> Vec<Vec<JetFn>> {
    (0..m)
        .map(|i| (0..m).map(|j| JetFn::constant(m, if i == j { 1.0 } else { 0.0 })).collect())
        .collect()
}

/// Flat Euclidean `m`-space on `[−2, 2]^m`.
pub fn euclidean(m: usize) -> Result<ChartModel> {
    ChartModel::euclidean(format!("euclidean{m}"), CoordBox::cube(m, -2.0, 2.0)?)
}

/// `g = I`, `∇_{∂i}∂j = δ_ij (1/y^i) ∂i` on `[0.25, 4]^m`.
pub fn positive_orthant(m: usize) -> Result<ChartModel> {
    let gamma = (0..m)
        .map(|k| {
            (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| {
                            if i == k && j == k {
                                JetFn::analytic(m, move |y| y[k].recip())
                            } else {
                                zero(m)
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    ChartModel::new("positive_orthant", CoordBox::cube(m, 0.25, 4.0)?, identity_metric(m), gamma)
}

/// Conjugate of [`positive_orthant`]: `Γ̄^i_ii = −1/y^i`.
pub fn positive_orthant_conj(m: usize) -> Result<ChartModel> {
    Ok(positive_orthant(m)?.conjugate())
}

/// Fisher metric `(dx² + 2dy²)/y²` of the normal family `(μ, σ) = (x, y)` on
/// `[−2, 2] × [0.25, 4]`, with `∇ = ∇^g + αK` where `K` is the difference
/// tensor of the mixture connection. `α = 1` is the mixture connection and
/// `α = −1` the exponential one.
pub fn normal_distributions_alpha(name: &str, alpha: f64) -> Result<ChartModel> {
    let dom = CoordBox::new(vec![-2.0, 0.25], vec![2.0, 4.0])?;
    let y_inv = |s: f64| JetFn::analytic(2, move |x| x[1].recip().scale(s));
    let g = vec![
        vec![JetFn::analytic(2, |x| x[1].powi(-2)), zero(2)],
        vec![zero(2), JetFn::analytic(2, |x| x[1].powi(-2).scale(2.0))],
    ];
    // Γ^g: x_xy = −1/y, y_xx = 1/(2y), y_yy = −1/y; K: x_xy = 1/y, y_xx = 1/(2y), y_yy = 2/y
    let gamma = vec![
        vec![vec![zero(2), y_inv(alpha - 1.0)], vec![y_inv(alpha - 1.0), zero(2)]],
        vec![
            vec![y_inv(0.5 + 0.5 * alpha), zero(2)],
            vec![zero(2), y_inv(2.0 * alpha - 1.0)],
        ],
    ];
    ChartModel::new(name, dom, g, gamma)
}

/// Fisher metric with the mixture connection: `∇_{∂x}∂x = (1/y)∂y`,
/// `∇_{∂x}∂y = 0`, `∇_{∂y}∂y = (1/y)∂y`.
pub fn normal_distributions() -> Result<ChartModel> {
    normal_distributions_alpha("normal_distributions", 1.0)
}

/// Fisher metric with the exponential connection (the conjugate of the mixture one).
pub fn normal_distributions_exp() -> Result<ChartModel> {
    normal_distributions_alpha("normal_distributions_exp", -1.0)
}

/// Fisher metric with its Levi-Civita connection.
pub fn normal_distributions_fisher() -> Result<ChartModel> {
    normal_distributions_alpha("normal_distributions_fisher", 0.0)
}

/// `t ↦ (λ_1 t², …, λ_m t²)` on `[0.5, 2]` into [`positive_orthant`].
pub fn parabola_curve(lambda: &[f64]) -> Result<MapModel> {
    parabola_with(lambda, 0.0, "parabola_curve")
}

/// [`parabola_curve`] with `δ(t − 0.5)(2 − t)` added to the first component,
/// so the endpoints stay put.
pub fn parabola_perturbed(lambda: &[f64], delta: f64) -> Result<MapModel> {
    parabola_with(lambda, delta, "parabola_perturbed")
}

fn parabola_with(lambda: &[f64], delta: f64, name: &str) -> Result<MapModel> {
    if lambda.is_empty() || lambda.len() >= MAX_VARS {
        return Err(Error::BadParams(format!("{name}: need 1..{} coefficients", MAX_VARS - 1)));
    }
    if let Some(l) = lambda.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::BadParams(format!("{name}: λ must be positive, got {l}")));
    }
    let src = ChartModel::euclidean("euclidean1", interval(0.5, 2.0))?;
    let comps = lambda
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let d = if i == 0 { delta } else { 0.0 };
            JetFn::analytic(1, move |t| {
                let bulge = (&t[0] - 0.5) * (2.0 - &t[0]);
                (&t[0] * &t[0]).scale(l) + bulge.scale(d)
            })
        })
        .collect();
    // widen the default orthant box so the image of [0.5, 2] keeps a margin for any λ
    let lo = lambda.iter().map(|&l| (0.125 * l).min(0.25)).collect();
    let hi = lambda.iter().map(|&l| (8.0 * l).max(4.0)).collect();
    let target = positive_orthant(lambda.len())?.with_domain(CoordBox::new(lo, hi)?)?;
    MapModel::new(name, src, target, comps)
}

fn exp_components(lambda: f64) -> Vec<JetFn> {
    vec![JetFn::constant(1, 0.0), JetFn::analytic(1, move |t| t[0].scale(lambda).exp())]
}

/// `t ↦ (0, e^{λt})` on `[−1, 1]` into [`normal_distributions`].
pub fn exp_curve(lambda: f64) -> Result<MapModel> {
    let src = ChartModel::euclidean("euclidean1", interval(-1.0, 1.0))?;
    MapModel::new("exp_curve", src, normal_distributions()?, exp_components(lambda))
}

/// The same curve into [`normal_distributions_exp`].
pub fn exp_curve_exp(lambda: f64) -> Result<MapModel> {
    let src = ChartModel::euclidean("euclidean1", interval(-1.0, 1.0))?;
    MapModel::new("exp_curve_exp", src, normal_distributions_exp()?, exp_components(lambda))
}

/// `t ↦ a + t b` on `[−1, 1]` into [`euclidean`].
pub fn line(a: &[f64], b: &[f64]) -> Result<MapModel> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::BadParams("line: a and b must have the same positive length".into()));
    }
    let src = ChartModel::euclidean("euclidean1", interval(-1.0, 1.0))?;
    let comps = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| JetFn::analytic(1, move |t| t[0].scale(bi) + ai))
        .collect();
    MapModel::new("line", src, euclidean(a.len())?, comps)
}

/// Graph of `F(x) = |x|²/2` over `[−1, 1]^m`.
pub fn paraboloid(m: usize) -> Result<GraphImmersion> {
    if m == 0 || m >= MAX_VARS {
        return Err(Error::BadParams(format!("paraboloid: m must be in 1..{}", MAX_VARS - 1)));
    }
    let f = JetFn::analytic(m, move |x| {
        let mut s = x[0].lift(0.0);
        for xi in x {
            s.add_product(xi, xi);
        }
        s.scale(0.5)
    });
    induce_from_graph("paraboloid", f, CoordBox::cube(m, -1.0, 1.0)?)
}

/// `bump · c` with a mollifier bump on `support`.
pub fn bump_section(support: &CoordBox, c: &[f64]) -> Result<Section> {
    let b = bump(support, BumpProfile::Mollifier)?;
    Section::new(c.iter().map(|&ci| b.scaled(ci)).collect(), Some(support.clone()))
}

/// `V = φγ̇ + ψX` along `γ(t) = (0, e^{λt})` with `X = e^{λt}∂x`, so
/// `V = (ψ e^{λt}, λ φ e^{λt})`.
pub fn exp_curve_section(lambda: f64, phi: &JetFn, psi: &JetFn, support: &CoordBox) -> Result<Section> {
    let e = JetFn::analytic(1, move |t| t[0].scale(lambda).exp());
    Section::new(vec![psi.times(&e), phi.times(&e).scaled(lambda)], Some(support.clone()))
}

/// Builds a chart entry.
pub fn chart(name: &str, params: &Params) -> Result<ChartModel> {
    let mut r = Reader::new(name, params);
    let out = match name {
        "euclidean" => euclidean(r.dim(2, MAX_VARS)?),
        "positive_orthant" => positive_orthant(r.dim(2, MAX_VARS)?),
        "positive_orthant_conj" => positive_orthant_conj(r.dim(2, MAX_VARS)?),
        "normal_distributions" => normal_distributions(),
        "normal_distributions_exp" => normal_distributions_exp(),
        "normal_distributions_alpha" => normal_distributions_alpha(name, r.get("alpha", 0.5)?),
        "normal_distributions_fisher" => normal_distributions_fisher(),
        _ => return Err(unknown(name, EntryKind::Chart)),
    };
    r.finish()?;
    out
}

fn unknown(name: &str, kind: EntryKind) -> Error {
    let known = entries()
        .into_iter()
        .any(|e| e.name == name);
    if known {
        Error::UnknownEntry(format!("`{name}` is not a {} entry", kind.as_str()))
    } else {
        Error::UnknownEntry(name.to_string())
    }
}

fn map_with(name: &str, r: &mut Reader) -> Result<MapModel> {
    match name {
        "parabola_curve" | "parabola_perturbed" => {
            let m = r.dim(2, MAX_VARS - 1)?;
            let lambda = r.list("lambda", m, |_| 1.0)?;
            if name == "parabola_curve" {
                parabola_curve(&lambda)
            } else {
                parabola_perturbed(&lambda, r.get("delta", 0.5)?)
            }
        }
        "exp_curve" => exp_curve(r.get("lambda", 1.0)?),
        "exp_curve_exp" => exp_curve_exp(r.get("lambda", 1.0)?),
        "line" => {
            let m = r.dim(2, MAX_VARS)?;
            let a = r.list("a", m, |_| 0.0)?;
            let b = r.list("b", m, |i| if i == 0 { 1.0 } else { 0.5 })?;
            line(&a, &b)
        }
        _ => Err(unknown(name, EntryKind::Map)),
    }
}

/// Builds a map entry.
pub fn map(name: &str, params: &Params) -> Result<MapModel> {
    let mut r = Reader::new(name, params);
    let out = map_with(name, &mut r)?;
    r.finish()?;
    Ok(out)
}

/// Builds an immersion entry.
pub fn immersion(name: &str, params: &Params) -> Result<GraphImmersion> {
    let mut r = Reader::new(name, params);
    let out = match name {
        "paraboloid" => paraboloid(r.dim(2, MAX_VARS - 1)?)?,
        _ => return Err(unknown(name, EntryKind::Immersion)),
    };
    r.finish()?;
    Ok(out)
}

/// Builds an additive family `u + tV` entry.
pub fn family(name: &str, params: &Params) -> Result<VariationFamily> {
    let mut r = Reader::new(name, params);
    let support = |r: &mut Reader, m: usize, lo: f64, hi: f64| -> Result<CoordBox> {
        let (lo, hi) = (r.get("lo", lo)?, r.get("hi", hi)?);
        CoordBox::cube(m, lo, hi).map_err(|_| Error::DegenerateSupport)
    };
    let (base, v) = match name {
        "line_bump" | "parabola_bump" | "parabola_perturbed_bump" => {
            let base_name = match name {
                "parabola_bump" => "parabola_curve",
                other => other.trim_end_matches("_bump"),
            };
            let base = map_with(base_name, &mut r)?;
            let (lo, hi) = if base_name == "line" { (-0.6, 0.6) } else { (0.6, 1.8) };
            let supp = support(&mut r, 1, lo, hi)?;
            let n = base.target().dim();
            let c = r.list("c", n, |i| if i == 0 { 1.0 } else if base_name == "line" { -0.5 } else { 0.0 })?;
            (base, bump_section(&supp, &c)?)
        }
        "exp_curve_bump" | "exp_curve_exp_bump" => {
            let lambda = r.get("lambda", 1.0)?;
            let base = if name == "exp_curve_bump" { exp_curve(lambda)? } else { exp_curve_exp(lambda)? };
            let supp = support(&mut r, 1, -0.8, 0.8)?;
            let b = bump(&supp, BumpProfile::Mollifier)?;
            let (phi, psi) = (r.get("phi", 1.0)?, r.get("psi", 1.0)?);
            let v = exp_curve_section(lambda, &b.scaled(phi), &b.scaled(psi), &supp)?;
            (base, v)
        }
        "paraboloid_bump" => {
            let imm = paraboloid(r.dim(2, MAX_VARS - 1)?)?;
            let m = imm.dim();
            let supp = support(&mut r, m, -0.6, 0.6)?;
            let c = r.list("c", m + 1, |i| if i == m { 1.0 } else { 0.0 })?;
            let b = bump(&supp, BumpProfile::PolyWindow)?;
            let v = Section::new(c.iter().map(|&ci| b.scaled(ci)).collect(), Some(supp))?;
            (imm.map().clone(), v)
        }
        _ => return Err(unknown(name, EntryKind::Family)),
    };
    r.finish()?;
    if let Some(s) = v.support() {
        if !base.source().domain().contains_box(s) {
            return Err(Error::SupportViolation);
        }
    }
    VariationFamily::additive(base, &v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Connection;
    use crate::maps::Flavor;

    fn p(kv: &[(&str, f64)]) -> Params {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn every_entry_builds_with_defaults() {
        let none = Params::new();
        for e in entries() {
            let res = match e.kind {
                EntryKind::Chart => chart(e.name, &none).map(|_| ()),
                EntryKind::Map => map(e.name, &none).map(|_| ()),
                EntryKind::Immersion => immersion(e.name, &none).map(|_| ()),
                EntryKind::Family => family(e.name, &none).map(|_| ()),
            };
            assert!(res.is_ok(), "{}: {res:?}", e.name);
            let listed: Params = e.params.iter().cloned().collect();
            let res = match e.kind {
                EntryKind::Chart => chart(e.name, &listed).map(|_| ()),
                EntryKind::Map => map(e.name, &listed).map(|_| ()),
                EntryKind::Immersion => immersion(e.name, &listed).map(|_| ()),
                EntryKind::Family => family(e.name, &listed).map(|_| ()),
            };
            assert!(res.is_ok(), "{} with listed params: {res:?}", e.name);
        }
    }

    #[test]
    fn lookup_errors() {
        assert!(matches!(chart("hyperbolic", &Params::new()), Err(Error::UnknownEntry(_))));
        assert!(matches!(map("euclidean", &Params::new()), Err(Error::UnknownEntry(_))));
        assert!(matches!(
            chart("euclidean", &p(&[("dim", 2.0)])),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            map("parabola_curve", &p(&[("lambda1", -1.0)])),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(chart("euclidean", &p(&[("m", 1.5)])), Err(Error::BadParams(_))));
    }

    #[test]
    fn euclidean_is_flat() {
        let e = euclidean(3).unwrap();
        let x = [0.3, -1.0, 1.5];
        assert_eq!(e.metric_at(&x).unwrap(), nalgebra::DMatrix::identity(3, 3));
        assert_eq!(e.connection(&x, Connection::Nabla).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn mixture_coefficients() {
        let c = normal_distributions().unwrap();
        for x in c.domain().grid(3) {
            let y = x[1];
            let g = c.connection(&x, Connection::Nabla).unwrap();
            // [k][i][j], x = 0, y = 1
            assert!((g.get(&[1, 0, 0]) - 1.0 / y).abs() < 1e-14);
            assert!((g.get(&[1, 1, 1]) - 1.0 / y).abs() < 1e-14);
            for ix in [[0, 0, 0], [0, 0, 1], [0, 1, 1], [1, 0, 1]] {
                assert!(g.get(&ix).abs() < 1e-14, "{ix:?}");
            }
        }
    }

    #[test]
    fn exponential_is_conjugate_of_mixture() {
        let e = normal_distributions_exp().unwrap();
        let m = normal_distributions().unwrap();
        let x = [0.4, 1.7];
        let a = e.connection(&x, Connection::Nabla).unwrap();
        let b = m.connection(&x, Connection::Conjugate).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn orthant_conjugate_coefficients() {
        let c = positive_orthant_conj(2).unwrap();
        let x = [0.5, 2.0];
        let g = c.connection(&x, Connection::Nabla).unwrap();
        assert!((g.get(&[0, 0, 0]) + 2.0).abs() < 1e-14);
        assert!((g.get(&[1, 1, 1]) + 0.5).abs() < 1e-14);
    }

    #[test]
    fn exp_curve_norms_and_geodesic_equations() {
        let lambda = 0.8;
        let u = exp_curve(lambda).unwrap();
        let ue = exp_curve_exp(lambda).unwrap();
        for t in [-0.7, 0.0, 0.9] {
            let h = u.target().metric_at(&u.value(&[t]).unwrap()).unwrap();
            let e = (lambda * t).exp();
            let gd = [0.0, lambda * e];
            let x = [e, 0.0];
            let q = |a: &[f64; 2], b: &[f64; 2]| {
                (0..2).map(|i| (0..2).map(|j| h[(i, j)] * a[i] * b[j]).sum::<f64>()).sum::<f64>()
            };
            assert!((q(&gd, &gd) - 2.0 * lambda * lambda).abs() < 1e-12);
            assert!((q(&x, &x) - 1.0).abs() < 1e-12);
            let tm = u.tension(&[t], Flavor::Standard).unwrap();
            let te = ue.tension(&[t], Flavor::Standard).unwrap();
            assert!(tm[0].abs() < 1e-12 && (tm[1] - 2.0 * lambda * gd[1]).abs() < 1e-12);
            assert!(te[0].abs() < 1e-12 && (te[1] + 2.0 * lambda * gd[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn line_is_harmonic() {
        let u = map("line", &Params::new()).unwrap();
        let tau = u.tension(&[0.3], Flavor::Standard).unwrap();
        assert!(tau.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn paraboloid_tension() {
        for m in [2, 3] {
            let f = paraboloid(m).unwrap();
            assert!(f.improper_affine_sphere());
            let x: Vec<f64> = (0..m).map(|i| 0.1 * i as f64 - 0.2).collect();
            let tau = f.map().tension(&x, Flavor::Standard).unwrap();
            for (p, v) in tau.iter().enumerate() {
                let want = if p == m { m as f64 } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "{tau:?}");
            }
        }
    }

    #[test]
    fn family_variational_field_is_the_section() {
        let fam = family("parabola_bump", &Params::new()).unwrap();
        let supp = CoordBox::new(vec![0.6], vec![1.8]).unwrap();
        let v = bump_section(&supp, &[1.0, 0.0]).unwrap();
        for t in [0.7, 1.2] {
            let d = fam.components()[0]
                .eval(&[t, 0.0], &crate::jets::MultiIndex::from_exponents(&[0, 1]))
                .unwrap();
            assert!((d - v.value(&[t]).unwrap()[0]).abs() < 1e-14);
        }
        assert!(fam.at(2.0 * fam.epsilon()).is_err());
    }
}

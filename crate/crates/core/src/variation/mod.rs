//! Second variation of the statistical bi-energy: the Jacobi-type term, the
//! curvature operator `𝓗_u` in its general and reduced forms, quadrature
//! assembly, finite-difference oracles in the variation parameter, and
//! probe-based stability checks.
//!
//! Normalization: [`MapModel::bienergy`](crate::maps::MapModel::bienergy) is
//! `∫ ‖τ‖²`, while the first and second variational formulas (and therefore
//! [`second_variation`] and [`fd_energy_derivatives`]) are the derivatives of
//! `½ ∫ ‖τ‖²`.

mod family;
mod probes;
mod quadrature;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::{CoordBox, Jet, JetFn};
use crate::manifold::tensor::JetTensor;
use crate::manifold::{chc_basis, sectional_basis, Connection, PointTensor};
use crate::maps::{bitension_from, inner, values, Along, Flavor, MapModel, Section};
pub use family::VariationFamily;
pub use probes::{kernel_probes, random_probes, stability_verdict, Outcome, Verdict, PROBE_DEGREE};
pub use quadrature::QuadratureRule;

/// Default threshold on `max |τ₂|` for treating a map as biharmonic.
pub const BIHARMONIC_TOL: f64 = 1e-5;

/// Threshold on structural residuals when checking a mode's hypothesis.
pub const MODE_TOL: f64 = 1e-6;

/// Which form of `𝓗_u` to evaluate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HMode {
    /// All six terms, for any target.
    General,
    /// Reduced inner product for conjugate symmetric targets (`R = L`).
    ConjugateSymmetric,
    /// `𝓗_u(V) = −(∇̄_V K)(τ, τ)` for Hessian targets.
    Hessian,
    /// `⟨𝓗_u(V), V⟩ = −c h(τ, V)²` when `(h, ∇̄)` is Hessian of CHC `c`.
    ChcConjugate(f64),
    /// `⟨𝓗_u(V), V⟩ = (c/2)(‖V‖²‖τ‖² + h(V,τ)²) − 2‖K_V τ‖²` when `(h, ∇)` is Hessian of CHC `c`.
    Chc(f64),
}

impl HMode {
    pub fn label(&self) -> String {
        match self {
            HMode::General => "general".into(),
            HMode::ConjugateSymmetric => "conjugate_symmetric".into(),
            HMode::Hessian => "hessian".into(),
            HMode::ChcConjugate(c) => format!("chc_conjugate({c})"),
            HMode::Chc(c) => format!("chc({c})"),
        }
    }
}

/// Output of [`h_operator`]: a vector for the vector-valued forms, the inner
/// product `⟨𝓗_u(V), V⟩` for the scalar ones.
#[derive(Clone, Debug, PartialEq)]
pub enum HValue {
    Vector(Vec<f64>),
    Scalar(f64),
}

impl HValue {
    /// `⟨𝓗_u(V), V⟩_h`.
    pub fn paired(&self, v: &[f64], h: &DMatrix<f64>) -> f64 {
        match self {
            HValue::Vector(w) => inner(h, w, v),
            HValue::Scalar(s) => *s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Warning {
    /// `second_variation` was asked for a map whose bi-tension does not vanish on `omega`.
    BiharmonicityViolation { residual: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecondVariation {
    pub value: f64,
    /// `∫ ‖J(V)‖²_h dμ_g`.
    pub jacobi: f64,
    /// `∫ ⟨𝓗_u(V), V⟩_h dμ_g`.
    pub curvature: f64,
    pub warning: Option<Warning>,
}

/// `ΔᵘV + Σ_i R^N(V, u_*e_i)u_*e_i − 2K^N(τ(u), V)`.
pub fn jacobi_term(u: &MapModel, v: &Section, x: &[f64]) -> Result<Vec<f64>> {
    u.check_section(v)?;
    let al = u.along(x, 2, 1)?;
    Ok(jacobi_from(&al, &v.jets(x, 2)?))
}

fn jacobi_from(al: &Along, v: &[Jet]) -> Vec<f64> {
    let (m, n) = (al.m, al.n);
    let lap = values(&al.laplacian(v, Flavor::Standard));
    let tau = values(&al.tension(Flavor::Standard));
    let vv = values(v);
    let r = al.tgt.curvature(Connection::Nabla);
    let k = al.tgt.difference();
    let w = al.w_values();
    let du = al.du_values();
    (0..n)
        .map(|p| {
            let mut out = lap[p];
            for a in 0..m {
                for b in 0..m {
                    let mut s = 0.0;
                    for q in 0..n {
                        for r_ in 0..n {
                            for t in 0..n {
                                s += r.at(&[p, q, r_, t]).value() * vv[q] * du[(r_, a)] * du[(t, b)];
                            }
                        }
                    }
                    out += w[(a, b)] * s;
                }
            }
            for q in 0..n {
                for r_ in 0..n {
                    out -= 2.0 * k.at(&[p, q, r_]).value() * tau[q] * vv[r_];
                }
            }
            out
        })
        .collect()
}

/// Checks the structural hypothesis of `mode` on the target at the base point.
fn check_mode(al: &Along, mode: HMode) -> Result<()> {
    let y = al.tgt.point.clone();
    let pt = |t: &JetTensor| PointTensor::from_jets(t, &y);
    let mismatch = |residual: f64| {
        if residual > MODE_TOL {
            Err(Error::ModeMismatch {
                mode: mode.label(),
                residual,
            })
        } else {
            Ok(())
        }
    };
    match mode {
        HMode::General => Ok(()),
        HMode::ConjugateSymmetric => {
            let r = pt(&al.tgt.curvature(Connection::Nabla));
            let l = pt(&al.tgt.interchange(false));
            mismatch(r.max_abs_diff(&l) / (1.0 + r.max_abs()))
        }
        HMode::Hessian => mismatch(pt(&al.tgt.curvature(Connection::Nabla)).max_abs()),
        HMode::ChcConjugate(c) | HMode::Chc(c) => {
            let conj = matches!(mode, HMode::ChcConjugate(_));
            let which = if conj { Connection::Conjugate } else { Connection::Nabla };
            let flat = pt(&al.tgt.curvature(which)).max_abs();
            let mut h = al.tgt.difference().covariant(al.tgt.conn(which));
            if conj {
                h = h.map(|j| -j);
            }
            let basis = chc_basis(&al.tgt.metric_matrix());
            let dev = h
                .values()
                .iter()
                .zip(&basis)
                .fold(0.0f64, |m, (a, b)| m.max((a - c * b).abs()));
            mismatch(flat.max(dev))
        }
    }
}

/// `𝓗_u(V)` (vector forms) or `⟨𝓗_u(V), V⟩` (scalar forms) at `x`.
pub fn h_operator(u: &MapModel, v: &Section, x: &[f64], mode: HMode) -> Result<HValue> {
    u.check_section(v)?;
    let al = u.along(x, 3, 2)?;
    h_from(&al, &v.jets(x, 2)?, mode)
}

fn h_from(al: &Along, v: &[Jet], mode: HMode) -> Result<HValue> {
    check_mode(al, mode)?;
    let (m, n) = (al.m, al.n);
    let tau_jets = al.tension(Flavor::Standard);
    let tau = values(&tau_jets);
    let vv = values(v);
    let h = al.h_values();
    let w = al.w_values();
    let du = al.du_values();
    let tgt = &al.tgt;
    let dk = tgt.difference().covariant(&tgt.conj);
    // −(∇̄_V K)(τ, τ)
    let last: Vec<f64> = (0..n)
        .map(|p| {
            let mut s = 0.0;
            for q in 0..n {
                for r in 0..n {
                    for c in 0..n {
                        s -= dk.at(&[p, q, r, c]).value() * tau[q] * tau[r] * vv[c];
                    }
                }
            }
            s
        })
        .collect();
    let k_apply = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let k = tgt.difference();
        (0..n)
            .map(|p| {
                let mut s = 0.0;
                for q in 0..n {
                    for r in 0..n {
                        s += k.at(&[p, q, r]).value() * a[q] * b[r];
                    }
                }
                s
            })
            .collect()
    };
    match mode {
        HMode::Hessian => Ok(HValue::Vector(last)),
        HMode::ChcConjugate(c) => Ok(HValue::Scalar(-c * inner(&h, &tau, &vv).powi(2))),
        HMode::Chc(c) => {
            let kv = k_apply(&vv, &tau);
            Ok(HValue::Scalar(
                0.5 * c * (inner(&h, &vv, &vv) * inner(&h, &tau, &tau) + inner(&h, &vv, &tau).powi(2))
                    - 2.0 * inner(&h, &kv, &kv),
            ))
        }
        HMode::General => {
            let tau_bar = values(&al.tension(Flavor::Conjugate));
            let conj_u = al.pulled_connection(Connection::Conjugate);
            let d_tau: Vec<Vec<f64>> = al
                .covariant(&tau_jets, &conj_u)
                .iter()
                .map(|c| values(c))
                .collect();
            let d_v: Vec<Vec<f64>> = al.covariant(v, &conj_u).iter().map(|c| values(c)).collect();
            let rbar = tgt.curvature(Connection::Conjugate);
            let drbar = rbar.covariant(&tgt.conj);
            let lbar = tgt.interchange(true);
            let dlbar = lbar.covariant(&tgt.conj);
            let l = tgt.interchange(false);
            let out = (0..n)
                .map(|p| {
                    let mut s = last[p];
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                s += rbar.at(&[p, i, j, k]).value() * vv[i] * tau_bar[j] * tau[k];
                            }
                        }
                    }
                    for a in 0..m {
                        for b in 0..m {
                            let wab = w[(a, b)];
                            let mut t = 0.0;
                            for i in 0..n {
                                for j in 0..n {
                                    for k in 0..n {
                                        let rb = rbar.at(&[p, i, j, k]).value();
                                        let ll = l.at(&[p, i, j, k]).value();
                                        t += 2.0 * rb * vv[i] * du[(j, b)] * d_tau[a][k];
                                        t -= 2.0 * ll * du[(i, a)] * tau[j] * d_v[b][k];
                                        for c in 0..n {
                                            t += drbar.at(&[p, i, j, k, c]).value()
                                                * vv[i]
                                                * du[(j, b)]
                                                * tau[k]
                                                * du[(c, a)];
                                            t += dlbar.at(&[p, i, j, k, c]).value()
                                                * tau[i]
                                                * du[(j, a)]
                                                * du[(k, b)]
                                                * vv[c];
                                        }
                                    }
                                }
                            }
                            s += wab * t;
                        }
                    }
                    s
                })
                .collect();
            Ok(HValue::Vector(out))
        }
        HMode::ConjugateSymmetric => {
            let lc_u = al.pulled_connection(Connection::LeviCivita);
            let tau_bar = values(&al.tension(Flavor::Conjugate));
            let d_tau: Vec<Vec<f64>> = al
                .covariant(&tau_jets, &lc_u)
                .iter()
                .map(|c| values(c))
                .collect();
            let d_v: Vec<Vec<f64>> = al.covariant(v, &lc_u).iter().map(|c| values(c)).collect();
            let r = tgt.curvature(Connection::Nabla);
            let dr = r.covariant(&tgt.lc);
            let vec: Vec<f64> = (0..n)
                .map(|p| {
                    let mut s = last[p];
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                s += r.at(&[p, i, j, k]).value() * vv[i] * tau_bar[j] * tau[k];
                            }
                        }
                    }
                    for a in 0..m {
                        for b in 0..m {
                            let mut t = 0.0;
                            for i in 0..n {
                                for j in 0..n {
                                    for k in 0..n {
                                        let rr = r.at(&[p, i, j, k]).value();
                                        t += 2.0 * rr * vv[i] * du[(j, b)] * d_tau[a][k];
                                        t -= 2.0 * rr * du[(i, a)] * tau[j] * d_v[b][k];
                                        for c in 0..n {
                                            t += dr.at(&[p, i, j, k, c]).value()
                                                * vv[i]
                                                * du[(j, a)]
                                                * du[(k, b)]
                                                * tau[c];
                                        }
                                    }
                                }
                            }
                            s += w[(a, b)] * t;
                        }
                    }
                    s
                })
                .collect();
            Ok(HValue::Scalar(inner(&h, &vec, &vv)))
        }
    }
}

/// Largest `|τ₂|` (sup norm of coordinates) on a grid of `omega`.
pub fn biharmonicity_residual(u: &MapModel, omega: &CoordBox, per_axis: usize) -> Result<f64> {
    let grid = omega.grid(per_axis);
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut worst = 0.0f64;
    for x in grid {
        let t2 = u.bitension(&x)?;
        worst = t2.iter().fold(worst, |m, v| m.max(v.abs()));
    }
    Ok(worst)
}

fn check_grid(m: usize) -> usize {
    match m {
        1 => 9,
        2 => 5,
        _ => 3,
    }
}

/// `∫ ‖J(V)‖² dμ_g + ∫ ⟨𝓗_u(V), V⟩ dμ_g`.
pub fn second_variation(
    u: &MapModel,
    v: &Section,
    omega: &CoordBox,
    quad: &QuadratureRule,
    mode: HMode,
) -> Result<SecondVariation> {
    u.check_section(v)?;
    u.check_omega(omega)?;
    if !v.supported_in(omega) {
        return Err(Error::SupportViolation);
    }
    let residual = biharmonicity_residual(u, omega, check_grid(u.source().dim()))?;
    if v.is_zero() {
        return Ok(SecondVariation {
            value: 0.0,
            jacobi: 0.0,
            curvature: 0.0,
            warning: (residual > BIHARMONIC_TOL)
                .then_some(Warning::BiharmonicityViolation { residual }),
        });
    }
    // the integrand vanishes off the support of V
    let pts = quad.points(v.support().unwrap_or(omega));
    if pts.is_empty() {
        return Err(Error::EmptyQuadrature);
    }
    use rayon::prelude::*;
    let parts = pts
        .par_iter()
        .map(|(x, wt)| -> Result<(f64, f64)> {
            let al = u.along(x, 3, 2)?;
            let s = v.jets(x, 2)?;
            let j = jacobi_from(&al, &s);
            let h = al.h_values();
            let hv = h_from(&al, &s, mode)?.paired(&values(&s), &h);
            let dmu = al.sqrt_det_g() * wt;
            Ok((inner(&h, &j, &j) * dmu, hv * dmu))
        })
        .collect::<Result<Vec<_>>>()?;
    let jacobi: f64 = parts.iter().map(|p| p.0).sum();
    let curvature: f64 = parts.iter().map(|p| p.1).sum();
    Ok(SecondVariation {
        value: jacobi + curvature,
        jacobi,
        curvature,
        warning: (residual > BIHARMONIC_TOL)
            .then_some(Warning::BiharmonicityViolation { residual }),
    })
}

/// `∫ ⟨V, τ₂(u)⟩_h dμ_g`, the right-hand side of the first variational formula.
pub fn first_variation(
    u: &MapModel,
    v: &Section,
    omega: &CoordBox,
    quad: &QuadratureRule,
) -> Result<f64> {
    u.check_section(v)?;
    u.check_omega(omega)?;
    if !v.supported_in(omega) {
        return Err(Error::SupportViolation);
    }
    if v.is_zero() {
        return Ok(0.0);
    }
    quad.integrate(v.support().unwrap_or(omega), |x| {
        let al = u.along(x, 4, 2)?;
        let t2 = bitension_from(&al);
        let vv = v.value(x)?;
        Ok(inner(&al.h_values(), &vv, &t2) * al.sqrt_det_g())
    })
}

/// Derivative of `t ↦ ½ E₂(u_t)` at `t = 0` by a 5-point stencil with step
/// `ε/8` (Richardson-combined central differences). When the family declares
/// a support box the energy is integrated over that box only.
pub fn fd_energy_derivatives(
    fam: &VariationFamily,
    omega: &CoordBox,
    quad: &QuadratureRule,
    order: usize,
) -> Result<f64> {
    if !(order == 1 || order == 2) {
        return Err(Error::BadParams(format!("derivative order must be 1 or 2, got {order}")));
    }
    fam.base().check_omega(omega)?;
    // E(u_t) on omega and on the support differ by a constant in t
    let region = match fam.support() {
        Some(s) if !omega.contains_box(s) => return Err(Error::SupportViolation),
        Some(s) => s,
        None => omega,
    };
    let h = fam.epsilon() / 8.0;
    let e = |t: f64| -> Result<f64> { fam.at(t)?.bienergy(region, quad) };
    let (em2, em1, e1, e2) = (e(-2.0 * h)?, e(-h)?, e(h)?, e(2.0 * h)?);
    let d = if order == 1 {
        (em2 - 8.0 * em1 + 8.0 * e1 - e2) / (12.0 * h)
    } else {
        let e0 = e(0.0)?;
        (-em2 + 16.0 * em1 - 30.0 * e0 + 16.0 * e1 - e2) / (12.0 * h * h)
    };
    Ok(0.5 * d)
}

/// Both sides of `4λ‖τ‖²h(τ,τ̂) + h((∇̄_τ K)(τ,τ), τ) ≥ C‖τ‖⁴` at `x`.
pub fn reduction_inequality(u: &MapModel, x: &[f64], lambda: f64, c: f64) -> Result<(f64, f64)> {
    let al = u.along(x, 2, 1)?;
    let r = al.tgt.curvature(Connection::Nabla).values();
    let basis = sectional_basis(&al.tgt.metric_matrix());
    let dev = r
        .iter()
        .zip(&basis)
        .fold(0.0f64, |m, (a, b)| m.max((a - lambda * b).abs()));
    if dev > MODE_TOL {
        return Err(Error::ModeMismatch {
            mode: format!("constant_sectional({lambda})"),
            residual: dev,
        });
    }
    let n = al.n;
    let tau = values(&al.tension(Flavor::Standard));
    let tau_hat = values(&al.tension(Flavor::Riemannian));
    let h = al.h_values();
    let dk = al.tgt.difference().covariant(&al.tgt.conj);
    let mut dkt = vec![0.0; n];
    for (p, slot) in dkt.iter_mut().enumerate() {
        for q in 0..n {
            for r_ in 0..n {
                for s in 0..n {
                    *slot += dk.at(&[p, q, r_, s]).value() * tau[q] * tau[r_] * tau[s];
                }
            }
        }
    }
    let t2 = inner(&h, &tau, &tau);
    let lhs = 4.0 * lambda * t2 * inner(&h, &tau, &tau_hat) + inner(&h, &dkt, &tau);
    Ok((lhs, c * t2 * t2))
}

/// Roots of `μ(μ−1) + pμ + q = 0`, descending.
pub fn characteristic_roots(p: f64, q: f64) -> Result<(f64, f64)> {
    let b = p - 1.0;
    let disc = b * b - 4.0 * q;
    if disc < 0.0 {
        return Err(Error::ComplexRoots(disc));
    }
    let s = disc.sqrt();
    Ok(((-b + s) / 2.0, (-b - s) / 2.0))
}

/// Profile of a [`bump`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BumpProfile {
    /// `exp(−1/(1−s²))` per axis.
    Mollifier,
    /// `(1−s²)⁵` per axis (vanishes to order 4 at the edge).
    PolyWindow,
}

/// Smooth function supported in `support`: a product over axes of the
/// profile in the rescaled coordinate `s ∈ (−1, 1)`.
pub fn bump(support: &CoordBox, profile: BumpProfile) -> Result<JetFn> {
    let vol = support.volume();
    if !(vol > 0.0) || !vol.is_finite() {
        return Err(Error::DegenerateSupport);
    }
    let center = support.center();
    let half: Vec<f64> = (0..support.dim()).map(|a| 0.5 * support.width(a)).collect();
    let m = support.dim();
    Ok(JetFn::analytic(m, move |x| {
        let mut out = x[0].lift(1.0);
        for a in 0..m {
            let s = (&x[a] - center[a]) / half[a];
            let sv = s.value();
            if sv.abs() >= 1.0 {
                return x[0].lift(0.0);
            }
            let w = 1.0 - &s * &s;
            let factor = match profile {
                BumpProfile::Mollifier => {
                    if 1.0 / w.value() > 700.0 {
                        return x[0].lift(0.0);
                    }
                    (-w.recip()).exp()
                }
                BumpProfile::PolyWindow => w.powi(5),
            };
            out = &out * &factor;
        }
        out
    }))
}

//! Smooth component functions with access to their partial derivatives.
//!
//! Every coordinate expression in the toolkit (metric and connection
//! coefficients, map components, sections) is a [`JetFn`]. Derivatives come
//! from one of two routes:
//!
//! * analytic: the function is written once over [`Jet`] arithmetic and all
//!   Taylor coefficients follow exactly;
//! * finite differences: [`fd_lift`] wraps a values-only function and builds
//!   the Taylor coefficients from central stencils with one level of
//!   Richardson extrapolation.

mod taylor;

pub use taylor::{coefficient_count, Jet, Substitution, MAX_ORDER, MAX_VARS};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Closed coordinate box `[lower_i, upper_i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl CoordBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidModel(format!(
                "box bounds must be non-empty and of equal length ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidModel(format!(
                "box requires lower < upper on every axis, got {lower:?} / {upper:?}"
            )));
        }
        Ok(CoordBox { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn contains_box(&self, other: &CoordBox) -> bool {
        other.dim() == self.dim() && self.contains(&other.lower) && self.contains(&other.upper)
    }

    /// Distance from `x` to the nearest face (negative outside).
    pub fn margin(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| (v - l).min(u - v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Tensor grid of `per_axis` interior points per axis, at
    /// `lower + (i + 1) / (per_axis + 1) * width`.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = Vec::with_capacity(per_axis.pow(d as u32));
        let mut idx = vec![0usize; d];
        if per_axis == 0 {
            return out;
        }
        loop {
            out.push(
                (0..d)
                    .map(|a| {
                        self.lower[a]
                            + (idx[a] as f64 + 1.0) / (per_axis as f64 + 1.0) * self.width(a)
                    })
                    .collect(),
            );
            let mut a = 0;
            loop {
                idx[a] += 1;
                if idx[a] < per_axis {
                    break;
                }
                idx[a] = 0;
                a += 1;
                if a == d {
                    return out;
                }
            }
        }
    }

    /// Appends the interval `[lo, hi]` as a new last axis.
    pub fn extend(&self, lo: f64, hi: f64) -> Result<Self> {
        let mut l = self.lower.clone();
        let mut u = self.upper.clone();
        l.push(lo);
        u.push(hi);
        Self::new(l, u)
    }
}

/// Multi-index of a partial derivative, stored as per-axis exponents.
///
/// Any ordering of differentiation axes canonicalizes to the same exponent
/// vector, so mixed partials are symmetric by construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn from_exponents(exponents: &[usize]) -> Self {
        MultiIndex(exponents.to_vec())
    }

    /// Builds the multi-index from a list of axes, e.g. `[1, 0, 1]` is `∂_0 ∂_1²`.
    pub fn from_axes(dim: usize, axes: &[usize]) -> Self {
        let mut e = vec![0; dim];
        for &a in axes {
            e[a] += 1;
        }
        MultiIndex(e)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[usize] {
        &self.0
    }

    /// Sorted axis list, the canonical form used for dispatch.
    pub fn axes(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(a, &k)| std::iter::repeat_n(a, k))
            .collect()
    }
}

type JetClosure = dyn Fn(&[Jet]) -> Result<Jet> + Send + Sync;
type ValueClosure = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Analytic(Arc<JetClosure>),
    Lifted {
        values: Arc<ValueClosure>,
        step: Option<f64>,
    },
    Partial {
        base: Arc<JetFn>,
        alpha: Vec<usize>,
    },
    RestrictLast {
        base: Arc<JetFn>,
        value: f64,
    },
}

/// A smooth real function of `arity` coordinates with derivatives up to `max_order`.
#[derive(Clone)]
pub struct JetFn {
    arity: usize,
    max_order: usize,
    domain: Option<CoordBox>,
    kind: Kind,
}

impl fmt::Debug for JetFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            Kind::Analytic(_) => "analytic",
            Kind::Lifted { .. } => "finite-difference",
            Kind::Partial { .. } => "partial",
            Kind::RestrictLast { .. } => "restricted",
        };
        f.debug_struct("JetFn")
            .field("arity", &self.arity)
            .field("max_order", &self.max_order)
            .field("kind", &kind)
            .finish()
    }
}

/// Finite-difference stencils `(offset, weight)` for the k-th derivative with unit step.
const STENCILS: [&[(i32, f64)]; 5] = [
    &[(0, 1.0)],
    &[(-1, -0.5), (1, 0.5)],
    &[(-1, 1.0), (0, -2.0), (1, 1.0)],
    &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
    &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
];

/// Highest order available through finite differences.
pub const FD_MAX_ORDER: usize = 4;

impl JetFn {
    /// Analytic function given by an expression over jets. Derivatives of every
    /// order up to [`MAX_ORDER`] are exact.
    pub fn analytic<F>(arity: usize, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Jet + Send + Sync + 'static,
    {
        Self::analytic_fallible(arity, move |x| Ok(f(x)))
    }

    /// Like [`JetFn::analytic`], for expressions that evaluate other `JetFn`s.
    pub fn analytic_fallible<F>(arity: usize, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Result<Jet> + Send + Sync + 'static,
    {
        JetFn {
            arity,
            max_order: MAX_ORDER,
            domain: None,
            kind: Kind::Analytic(Arc::new(f)),
        }
    }

    pub fn constant(arity: usize, value: f64) -> Self {
        Self::analytic(arity, move |x| x[0].lift(value))
    }

    /// The coordinate function `x_axis`.
    pub fn coordinate(arity: usize, axis: usize) -> Self {
        Self::analytic(arity, move |x| x[axis].clone())
    }

    /// Pointwise product `self · other`.
    pub fn times(&self, other: &JetFn) -> JetFn {
        let (a, b) = (self.clone(), other.clone());
        let order = a.max_order.min(b.max_order);
        JetFn::analytic_fallible(self.arity, move |x| Ok(&a.compose(x)? * &b.compose(x)?))
            .with_max_order(order)
    }

    /// Pointwise sum `self + other`.
    pub fn plus(&self, other: &JetFn) -> JetFn {
        let (a, b) = (self.clone(), other.clone());
        let order = a.max_order.min(b.max_order);
        JetFn::analytic_fallible(self.arity, move |x| Ok(&a.compose(x)? + &b.compose(x)?))
            .with_max_order(order)
    }

    /// `c · self`.
    pub fn scaled(&self, c: f64) -> JetFn {
        let a = self.clone();
        let order = a.max_order;
        JetFn::analytic_fallible(self.arity, move |x| Ok(a.compose(x)?.scale(c))).with_max_order(order)
    }

    pub fn with_domain(mut self, domain: CoordBox) -> Self {
        assert_eq!(domain.dim(), self.arity, "domain dimension mismatch");
        self.domain = Some(domain);
        self
    }

    /// Caps the advertised derivative order.
    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order.min(self.max_order);
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn domain(&self) -> Option<&CoordBox> {
        self.domain.as_ref()
    }

    pub fn is_analytic(&self) -> bool {
        match &self.kind {
            Kind::Analytic(_) => true,
            Kind::Lifted { .. } => false,
            Kind::Partial { base, .. } | Kind::RestrictLast { base, .. } => base.is_analytic(),
        }
    }

    /// `∂^α f(x)`.
    pub fn eval(&self, x: &[f64], alpha: &MultiIndex) -> Result<f64> {
        if alpha.exponents().len() != self.arity {
            return Err(Error::InvalidModel(format!(
                "multi-index of length {} for a function of {} variables",
                alpha.exponents().len(),
                self.arity
            )));
        }
        let jet = self.taylor(x, alpha.order())?;
        Ok(jet.partial(alpha.exponents()))
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.taylor(x, 0)?.value())
    }

    /// Taylor jet of order `order` about `x`, in the function's own variables.
    pub fn taylor(&self, x: &[f64], order: usize) -> Result<Jet> {
        self.check(x, order)?;
        let jet = match &self.kind {
            Kind::Analytic(f) => f(&Jet::seeds(x, order))?,
            Kind::Lifted { values, step } => self.fd_taylor(values.as_ref(), *step, x, order)?,
            Kind::Partial { base, alpha } => {
                let k: usize = alpha.iter().sum();
                let mut j = base.taylor(x, order + k)?;
                for (axis, &e) in alpha.iter().enumerate() {
                    for _ in 0..e {
                        j = j.derivative(axis);
                    }
                }
                j
            }
            Kind::RestrictLast { base, value } => {
                let mut y = x.to_vec();
                y.push(*value);
                let full = base.taylor(&y, order)?;
                let mut seeds = Jet::seeds(x, order);
                seeds.push(Jet::constant(x.len(), order, *value));
                Substitution::new(&seeds, order).apply(&full)
            }
        };
        finite(jet, "function jet")
    }

    /// `f(args)` where each argument is a jet in some common set of variables.
    pub fn compose(&self, args: &[Jet]) -> Result<Jet> {
        if args.len() != self.arity {
            return Err(Error::InvalidModel(format!(
                "{} arguments passed to a function of {} variables",
                args.len(),
                self.arity
            )));
        }
        let order = args.iter().map(Jet::order).min().unwrap_or(0);
        let x0: Vec<f64> = args.iter().map(Jet::value).collect();
        match &self.kind {
            Kind::Analytic(f) => {
                self.check(&x0, order)?;
                finite(f(args)?, "function jet")
            }
            _ => {
                let jet = self.taylor(&x0, order)?;
                Ok(Substitution::new(args, order).apply(&jet))
            }
        }
    }

    /// The partial derivative `∂^α f` as a function in its own right.
    pub fn partial(&self, alpha: &MultiIndex) -> Result<JetFn> {
        let k = alpha.order();
        if k > self.max_order {
            return Err(Error::OrderExceeded {
                requested: k,
                available: self.max_order,
            });
        }
        Ok(JetFn {
            arity: self.arity,
            max_order: self.max_order - k,
            domain: self.domain.clone(),
            kind: Kind::Partial {
                base: Arc::new(self.clone()),
                alpha: alpha.exponents().to_vec(),
            },
        })
    }

    /// Freezes the last argument at `value`, giving a function of `arity - 1` variables.
    pub fn restrict_last(&self, value: f64) -> Result<JetFn> {
        if self.arity < 2 {
            return Err(Error::InvalidModel(
                "cannot restrict a function of fewer than two variables".into(),
            ));
        }
        let domain = match &self.domain {
            Some(d) => {
                if value < d.lower()[self.arity - 1] || value > d.upper()[self.arity - 1] {
                    return Err(Error::OutOfDomain {
                        point: vec![value],
                    });
                }
                Some(CoordBox::new(
                    d.lower()[..self.arity - 1].to_vec(),
                    d.upper()[..self.arity - 1].to_vec(),
                )?)
            }
            None => None,
        };
        Ok(JetFn {
            arity: self.arity - 1,
            max_order: self.max_order,
            domain,
            kind: Kind::RestrictLast {
                base: Arc::new(self.clone()),
                value,
            },
        })
    }

    fn check(&self, x: &[f64], order: usize) -> Result<()> {
        if x.len() != self.arity {
            return Err(Error::InvalidModel(format!(
                "point of dimension {} for a function of {} variables",
                x.len(),
                self.arity
            )));
        }
        if order > self.max_order {
            return Err(Error::OrderExceeded {
                requested: order,
                available: self.max_order,
            });
        }
        if let Some(d) = &self.domain {
            if !d.contains(x) {
                return Err(Error::OutOfDomain { point: x.to_vec() });
            }
        }
        Ok(())
    }

    fn fd_taylor(
        &self,
        f: &ValueClosure,
        step: Option<f64>,
        x: &[f64],
        order: usize,
    ) -> Result<Jet> {
        let n = self.arity;
        let h: Vec<f64> = x
            .iter()
            .map(|xi| step.unwrap_or_else(|| default_step(*xi)))
            .collect();
        let template = Jet::zero(n, order);
        let count = template.coefficients().len();
        let mut coeffs = Vec::with_capacity(count);
        for alpha in exponents_up_to(n, order) {
            let coarse = self.stencil(f, x, &h, 1.0, &alpha)?;
            let fine = self.stencil(f, x, &h, 0.5, &alpha)?;
            let d = (4.0 * fine - coarse) / 3.0;
            let fact: f64 = alpha
                .iter()
                .map(|&a| (1..=a).map(|k| k as f64).product::<f64>())
                .product();
            coeffs.push(d / fact);
        }
        debug_assert_eq!(coeffs.len(), count);
        Ok(Jet::from_coefficients(n, order, coeffs))
    }

    fn stencil(
        &self,
        f: &ValueClosure,
        x: &[f64],
        h: &[f64],
        scale: f64,
        alpha: &[usize],
    ) -> Result<f64> {
        let n = x.len();
        let axes: Vec<&[(i32, f64)]> = alpha.iter().map(|&k| STENCILS[k]).collect();
        let mut idx = vec![0usize; n];
        let mut total = 0.0;
        let mut y = vec![0.0; n];
        loop {
            let mut w = 1.0;
            for a in 0..n {
                let (off, wt) = axes[a][idx[a]];
                y[a] = x[a] + f64::from(off) * h[a] * scale;
                w *= wt;
            }
            if let Some(d) = &self.domain {
                if !d.contains(&y) {
                    return Err(Error::OutOfDomain { point: y });
                }
            }
            total += w * f(&y);
            let mut a = 0;
            loop {
                if a == n {
                    let denom: f64 = (0..n)
                        .map(|b| (h[b] * scale).powi(alpha[b] as i32))
                        .product();
                    return Ok(total / denom);
                }
                idx[a] += 1;
                if idx[a] < axes[a].len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
        }
    }
}

/// Default finite-difference step `ε^(1/6) · max(1, |x|)`.
pub fn default_step(x: f64) -> f64 {
    f64::EPSILON.powf(1.0 / 6.0) * x.abs().max(1.0)
}

/// Wraps a values-only function as a [`JetFn`] whose derivatives come from
/// central differences with one Richardson step (error `O(step⁴)` for first
/// and second derivatives). Stencil points leaving `domain` are an error.
pub fn fd_lift<F>(
    arity: usize,
    values: F,
    max_order: usize,
    step: Option<f64>,
    domain: Option<CoordBox>,
) -> Result<JetFn>
where
    F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
{
    if max_order > FD_MAX_ORDER {
        return Err(Error::OrderExceeded {
            requested: max_order,
            available: FD_MAX_ORDER,
        });
    }
    if let Some(s) = step {
        if !(s > 0.0) {
            return Err(Error::BadParams(format!("finite-difference step must be positive, got {s}")));
        }
    }
    Ok(JetFn {
        arity,
        max_order,
        domain,
        kind: Kind::Lifted {
            values: Arc::new(values),
            step,
        },
    })
}

/// Exponent vectors of total degree `<= order`, in jet coefficient order.
fn exponents_up_to(nvars: usize, order: usize) -> Vec<Vec<usize>> {
    // Recover the ordering from the jet layout via coordinate monomials.
    let seeds = Jet::seeds(&vec![0.0; nvars], order);
    let count = coefficient_count(nvars, order);
    let mut out = vec![Vec::new(); count];
    let mut filled = vec![false; count];
    fn rec(
        var: usize,
        cur: &mut Vec<usize>,
        left: usize,
        seeds: &[Jet],
        out: &mut [Vec<usize>],
        filled: &mut [bool],
    ) {
        if var == cur.len() {
            let mut m = seeds[0].lift(1.0);
            for (a, &e) in cur.iter().enumerate() {
                for _ in 0..e {
                    m = &m * &seeds[a];
                }
            }
            let idx = m
                .coefficients()
                .iter()
                .position(|&c| c == 1.0)
                .expect("monomial present");
            out[idx] = cur.clone();
            filled[idx] = true;
            return;
        }
        for e in 0..=left {
            cur[var] = e;
            rec(var + 1, cur, left - e, seeds, out, filled);
        }
        cur[var] = 0;
    }
    if nvars == 0 {
        return vec![Vec::new()];
    }
    rec(0, &mut vec![0; nvars], order, &seeds, &mut out, &mut filled);
    debug_assert!(filled.iter().all(|&f| f));
    out
}

fn finite(jet: Jet, what: &str) -> Result<Jet> {
    if jet.is_finite() {
        Ok(jet)
    } else {
        Err(Error::DomainError(what.to_string()))
    }
}

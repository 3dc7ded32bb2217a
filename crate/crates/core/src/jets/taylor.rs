//! Truncated multivariate Taylor polynomials.
//!
//! A [`Jet`] stores the Taylor coefficients of a smooth function of `nvars`
//! variables about a base point, truncated at total degree `order`. The
//! coefficient of the monomial `h^α` equals `∂^α f / α!`, so partial
//! derivatives are recovered by [`Jet::partial`].
//!
//! Monomials are enumerated by increasing total degree, so the coefficients of
//! an order-`k` jet form a prefix of those of any higher-order jet in the same
//! number of variables. Truncation is therefore a slice operation.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::LazyLock;

use smallvec::{smallvec, SmallVec};

/// Largest number of independent variables a jet may carry.
pub const MAX_VARS: usize = 5;
/// Largest truncation order supported by the jet engine.
pub const MAX_ORDER: usize = 6;

type Exponents = [u8; MAX_VARS];

/// Inline capacity covers three variables to order three and two to order four.
type Coeffs = SmallVec<[f64; 20]>;

pub(crate) struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<Exponents>,
    #[cfg_attr(not(test), allow(dead_code))]
    degree: Vec<usize>,
    /// `degree_end[d]` is the number of monomials of total degree `<= d`.
    #[cfg_attr(not(test), allow(dead_code))]
    degree_end: Vec<usize>,
    /// Products `(i, j, k)` with `m_i * m_j = m_k` and `deg m_k <= order`.
    mul: Vec<(u32, u32, u32)>,
    /// `shift[axis][b]` is the index of `m_b * h_axis`, for `deg m_b < order`.
    shift: Vec<Vec<u32>>,
    index: HashMap<Exponents, usize>,
}

fn monomials_of_degree(nvars: usize, degree: usize) -> Vec<Exponents> {
    fn rec(var: usize, nvars: usize, left: usize, cur: &mut Exponents, out: &mut Vec<Exponents>) {
        if var + 1 == nvars {
            cur[var] = left as u8;
            out.push(*cur);
            cur[var] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[var] = e as u8;
            rec(var + 1, nvars, left - e, cur, out);
        }
        cur[var] = 0;
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if degree == 0 {
            out.push([0; MAX_VARS]);
        }
        return out;
    }
    rec(0, nvars, degree, &mut [0; MAX_VARS], &mut out);
    out
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Self {
        let mut exps = Vec::new();
        let mut degree = Vec::new();
        let mut degree_end = Vec::new();
        for d in 0..=order {
            for e in monomials_of_degree(nvars, d) {
                exps.push(e);
                degree.push(d);
            }
            degree_end.push(exps.len());
        }
        let index: HashMap<Exponents, usize> =
            exps.iter().enumerate().map(|(i, e)| (*e, i)).collect();

        let mut mul = Vec::new();
        for (i, ei) in exps.iter().enumerate() {
            for (j, ej) in exps.iter().enumerate() {
                if degree[i] + degree[j] > order {
                    continue;
                }
                let mut e = [0u8; MAX_VARS];
                for v in 0..MAX_VARS {
                    e[v] = ei[v] + ej[v];
                }
                mul.push((i as u32, j as u32, index[&e] as u32));
            }
        }

        let below = if order == 0 { 0 } else { degree_end[order - 1] };
        let shift = (0..nvars)
            .map(|axis| {
                (0..below)
                    .map(|b| {
                        let mut e = exps[b];
                        e[axis] += 1;
                        index[&e] as u32
                    })
                    .collect()
            })
            .collect();

        Layout {
            nvars,
            order,
            exps,
            degree,
            degree_end,
            mul,
            shift,
            index,
        }
    }

    fn len(&self) -> usize {
        self.exps.len()
    }
}

static LAYOUTS: LazyLock<Vec<Layout>> = LazyLock::new(|| {
    let mut v = Vec::with_capacity((MAX_VARS + 1) * (MAX_ORDER + 1));
    for n in 0..=MAX_VARS {
        for k in 0..=MAX_ORDER {
            v.push(Layout::build(n, k));
        }
    }
    v
});

fn layout(nvars: usize, order: usize) -> &'static Layout {
    assert!(nvars <= MAX_VARS, "jet with {nvars} variables exceeds MAX_VARS");
    assert!(order <= MAX_ORDER, "jet of order {order} exceeds MAX_ORDER");
    &LAYOUTS[nvars * (MAX_ORDER + 1) + order]
}

/// Number of Taylor coefficients of an order-`order` jet in `nvars` variables.
pub fn coefficient_count(nvars: usize, order: usize) -> usize {
    layout(nvars, order).len()
}

/// Truncated Taylor polynomial in `nvars` variables.
#[derive(Clone)]
pub struct Jet {
    layout: &'static Layout,
    c: Coeffs,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.layout.nvars)
            .field("order", &self.layout.order)
            .field("c", &self.c)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.nvars() == other.nvars() && self.order() == other.order() && self.c == other.c
    }
}

impl Jet {
    pub fn constant(nvars: usize, order: usize, value: f64) -> Self {
        let layout = layout(nvars, order);
        let mut c = smallvec![0.0; layout.len()];
        c[0] = value;
        Jet { layout, c }
    }

    pub fn zero(nvars: usize, order: usize) -> Self {
        Self::constant(nvars, order, 0.0)
    }

    /// The coordinate function `x_axis` expanded about `value`.
    pub fn variable(nvars: usize, order: usize, axis: usize, value: f64) -> Self {
        assert!(axis < nvars);
        let mut j = Self::constant(nvars, order, value);
        if order > 0 {
            j.c[1 + axis] = 1.0;
        }
        j
    }

    /// Coordinate jets `x_i + h_i` for every axis of the base point.
    pub fn seeds(point: &[f64], order: usize) -> Vec<Jet> {
        (0..point.len())
            .map(|i| Jet::variable(point.len(), order, i, point[i]))
            .collect()
    }

    pub fn from_coefficients(nvars: usize, order: usize, c: Vec<f64>) -> Self {
        let layout = layout(nvars, order);
        assert_eq!(c.len(), layout.len(), "coefficient vector length mismatch");
        Jet { layout, c: c.into() }
    }

    /// A constant jet with the same shape as `self`.
    pub fn lift(&self, value: f64) -> Self {
        Self::constant(self.nvars(), self.order(), value)
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    /// Raw Taylor coefficient of `h^α`.
    pub fn coefficient(&self, alpha: &[usize]) -> f64 {
        let deg: usize = alpha.iter().sum();
        if deg > self.order() {
            return f64::NAN;
        }
        match self.index_of(alpha) {
            Some(i) => self.c[i],
            None => 0.0,
        }
    }

    /// Partial derivative `∂^α f` at the base point.
    pub fn partial(&self, alpha: &[usize]) -> f64 {
        let fact: f64 = alpha.iter().map(|&a| factorial(a)).product();
        self.coefficient(alpha) * fact
    }

    fn index_of(&self, alpha: &[usize]) -> Option<usize> {
        if alpha.len() != self.nvars() {
            return None;
        }
        let mut e = [0u8; MAX_VARS];
        for (slot, &a) in e.iter_mut().zip(alpha) {
            *slot = a as u8;
        }
        self.layout.index.get(&e).copied()
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        let layout = layout(self.nvars(), order);
        Jet {
            layout,
            c: SmallVec::from_slice(&self.c[..layout.len()]),
        }
    }

    /// Partial derivative along `axis`; the result has order one less.
    pub fn derivative(&self, axis: usize) -> Self {
        assert!(self.order() > 0, "cannot differentiate an order-0 jet");
        assert!(axis < self.nvars());
        let lower = layout(self.nvars(), self.order() - 1);
        let shift = &self.layout.shift[axis];
        let c = (0..lower.len())
            .map(|b| {
                let src = shift[b] as usize;
                f64::from(self.layout.exps[src][axis]) * self.c[src]
            })
            .collect();
        Jet { layout: lower, c }
    }

    fn binary_layout(&self, other: &Jet) -> &'static Layout {
        assert_eq!(
            self.nvars(),
            other.nvars(),
            "jets over different numbers of variables"
        );
        if self.order() <= other.order() {
            self.layout
        } else {
            other.layout
        }
    }

    fn mul_ref(&self, other: &Jet) -> Jet {
        let layout = self.binary_layout(other);
        let mut c = smallvec![0.0; layout.len()];
        if self.c.iter().all(|&v| v == 0.0) || other.c.iter().all(|&v| v == 0.0) {
            return Jet { layout, c };
        }
        for &(i, j, k) in &layout.mul {
            c[k as usize] += self.c[i as usize] * other.c[j as usize];
        }
        Jet { layout, c }
    }

    /// `Σ_j a_j (self - self(0))^j`, the composition of a univariate Taylor
    /// series with coefficients `a` (so `a_j = φ^(j)(x0)/j!`) about `x0 = self.value()`.
    pub fn compose_series(&self, a: &[f64]) -> Jet {
        let k = self.order();
        let mut h = self.clone();
        h.c[0] = 0.0;
        let top = k.min(a.len().saturating_sub(1));
        let mut r = self.lift(a[top]);
        for j in (0..top).rev() {
            r = r.mul_ref(&h);
            r.c[0] += a[j];
        }
        r
    }

    pub fn recip(&self) -> Jet {
        let x = self.value();
        let a: Vec<f64> = (0..=self.order())
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                s / x.powi(j as i32 + 1)
            })
            .collect();
        self.compose_series(&a)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let a: Vec<f64> = (0..=self.order()).map(|j| e / factorial(j)).collect();
        self.compose_series(&a)
    }

    pub fn ln(&self) -> Jet {
        let x = self.value();
        let a: Vec<f64> = (0..=self.order())
            .map(|j| {
                if j == 0 {
                    x.ln()
                } else {
                    let s = if j % 2 == 1 { 1.0 } else { -1.0 };
                    s / (j as f64 * x.powi(j as i32))
                }
            })
            .collect();
        self.compose_series(&a)
    }

    /// Real power `self^p`, expanded by the generalized binomial series.
    pub fn powf(&self, p: f64) -> Jet {
        let x = self.value();
        let mut a = Vec::with_capacity(self.order() + 1);
        let mut binom = 1.0;
        for j in 0..=self.order() {
            if j > 0 {
                binom *= (p - (j - 1) as f64) / j as f64;
            }
            a.push(binom * x.powf(p - j as f64));
        }
        self.compose_series(&a)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut r = self.lift(1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        r
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let a: Vec<f64> = (0..=self.order())
            .map(|j| cycle[j % 4] / factorial(j))
            .collect();
        self.compose_series(&a)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let a: Vec<f64> = (0..=self.order())
            .map(|j| cycle[j % 4] / factorial(j))
            .collect();
        self.compose_series(&a)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            layout: self.layout,
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    /// `self += a * b`, truncating to the order of `self`.
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        let layout = a.binary_layout(b);
        if layout.len() < self.c.len() {
            self.c.truncate(layout.len());
            self.layout = layout;
        }
        if a.c.iter().all(|&v| v == 0.0) || b.c.iter().all(|&v| v == 0.0) {
            return;
        }
        let n = self.c.len() as u32;
        for &(i, j, k) in &layout.mul {
            if k < n {
                self.c[k as usize] += a.c[i as usize] * b.c[j as usize];
            }
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Composition `f(y0 + δ)` of a jet `f` in `n` variables with `n` shift jets
/// `δ_i` (zero constant term) in `m` variables.
///
/// The monomials `Π δ^α` are computed once and reused for every jet passed
/// to [`Substitution::apply`].
pub struct Substitution {
    order: usize,
    nvars_in: usize,
    powers: Vec<Jet>,
}

impl Substitution {
    /// `shifts[i]` is the displacement of the i-th outer coordinate; its
    /// constant term is ignored. `order` bounds the outer jets to be applied.
    pub fn new(shifts: &[Jet], order: usize) -> Self {
        let n = shifts.len();
        assert!(n >= 1);
        let m = shifts[0].nvars();
        let inner_order = shifts.iter().map(Jet::order).min().unwrap_or(0);
        let order = order.min(inner_order);
        let outer = layout(n, order);
        let mut hs: Vec<Jet> = shifts.iter().map(|s| s.truncate(order)).collect();
        for h in &mut hs {
            h.c[0] = 0.0;
        }
        let mut powers: Vec<Jet> = Vec::with_capacity(outer.len());
        powers.push(Jet::constant(m, order, 1.0));
        for idx in 1..outer.len() {
            let e = outer.exps[idx];
            let axis = (0..n).find(|&v| e[v] > 0).unwrap();
            let mut prev = e;
            prev[axis] -= 1;
            let p = outer.index[&prev];
            let next = powers[p].mul_ref(&hs[axis]);
            powers.push(next);
        }
        Substitution {
            order,
            nvars_in: n,
            powers,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn apply(&self, f: &Jet) -> Jet {
        assert_eq!(f.nvars(), self.nvars_in, "substitution arity mismatch");
        let order = self.order.min(f.order());
        let inner_nvars = self.powers[0].nvars();
        let target = layout(inner_nvars, order);
        let outer_len = layout(self.nvars_in, order).len();
        let mut c = smallvec![0.0; target.len()];
        for (coef, p) in f.c[..outer_len].iter().zip(&self.powers) {
            if *coef == 0.0 {
                continue;
            }
            for (slot, v) in c.iter_mut().zip(&p.c) {
                *slot += coef * v;
            }
        }
        Jet { layout: target, c }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| {
    let layout = a.binary_layout(b);
    let c = (0..layout.len()).map(|i| a.c[i] + b.c[i]).collect();
    Jet { layout, c }
});
forward_binop!(Sub, sub, |a, b| {
    let layout = a.binary_layout(b);
    let c = (0..layout.len()).map(|i| a.c[i] - b.c[i]).collect();
    Jet { layout, c }
});
forward_binop!(Mul, mul, |a, b| a.mul_ref(b));
forward_binop!(Div, div, |a, b| a.mul_ref(&b.recip()));

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut r = self.clone();
        r.c[0] += rhs;
        r
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.clone() - rhs
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<&Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl Div<f64> for &Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl Div<&Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        rhs.recip().scale(self)
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip().scale(self)
    }
}

impl Add<&Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        rhs + self
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<&Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        -rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if rhs.order() < self.order() {
            *self = self.truncate(rhs.order());
        }
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self += &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if rhs.order() < self.order() {
            *self = self.truncate(rhs.order());
        }
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a -= b;
        }
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self -= &rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn monomial_counts_match_binomials() {
        assert_eq!(coefficient_count(1, 4), 5);
        assert_eq!(coefficient_count(2, 4), 15);
        assert_eq!(coefficient_count(3, 4), 35);
        assert_eq!(coefficient_count(4, 4), 70);
        assert_eq!(coefficient_count(0, 3), 1);
    }

    #[test]
    fn lower_orders_are_prefixes() {
        for n in 1..=4 {
            let hi = layout(n, 5);
            for k in 0..5 {
                let lo = layout(n, k);
                assert_eq!(&hi.exps[..lo.len()], &lo.exps[..]);
                assert_eq!(hi.degree_end[k], lo.len());
                assert!(lo.degree.iter().all(|&d| d <= k));
            }
        }
    }

    #[test]
    fn polynomial_partials() {
        // x^2 y at (2, 3)
        let s = Jet::seeds(&[2.0, 3.0], 3);
        let f = &(&s[0] * &s[0]) * &s[1];
        assert!(close(f.value(), 12.0, 1e-15));
        assert!(close(f.partial(&[1, 0]), 12.0, 1e-15));
        assert!(close(f.partial(&[1, 1]), 4.0, 1e-15));
        assert!(close(f.partial(&[2, 1]), 2.0, 1e-15));
        assert_eq!(f.partial(&[0, 2]), 0.0);
    }

    #[test]
    fn reciprocal_series() {
        let y = Jet::variable(1, 4, 0, 2.0);
        let f = y.recip();
        assert!(close(f.partial(&[1]), -0.25, 1e-15));
        assert!(close(f.partial(&[2]), 0.25, 1e-15));
        assert!(close(f.partial(&[3]), -6.0 / 16.0, 1e-15));
        assert!(close(f.partial(&[4]), 24.0 / 32.0, 1e-15));
    }

    #[test]
    fn elementary_functions_agree_with_closed_forms() {
        let x = Jet::variable(1, 4, 0, 0.7);
        let e = x.exp();
        for k in 0..=4 {
            assert!(close(e.partial(&[k]), 0.7f64.exp(), 1e-14));
        }
        let l = x.ln();
        assert!(close(l.partial(&[3]), 2.0 / 0.7f64.powi(3), 1e-13));
        let s = x.sqrt();
        assert!(close((&s * &s).partial(&[2]), 0.0, 1e-13));
        assert!(close(s.partial(&[1]), 0.5 / 0.7f64.sqrt(), 1e-14));
        let sn = x.sin();
        assert!(close(sn.partial(&[3]), -(0.7f64.cos()), 1e-14));
        let p = x.powi(-2);
        assert!(close(p.partial(&[2]), 6.0 / 0.7f64.powi(4), 1e-13));
    }

    #[test]
    fn derivative_lowers_order() {
        let s = Jet::seeds(&[1.0, 2.0], 4);
        let f = (&s[0] * &s[0] * &s[1]).exp();
        let fx = f.derivative(0);
        assert_eq!(fx.order(), 3);
        assert!(close(fx.partial(&[0, 1]), f.partial(&[1, 1]), 1e-13));
        assert!(close(fx.partial(&[2, 1]), f.partial(&[3, 1]), 1e-12));
    }

    #[test]
    fn substitution_matches_direct_composition() {
        // f(y1, y2) = y1^2 / y2 about (1, 2), pulled back along y = (x + x^2, 2 + x)
        let x = Jet::variable(1, 4, 0, 0.5);
        let y1 = &x + &(&x * &x);
        let y2 = &x + 1.5;
        let direct = &(&y1 * &y1) / &y2;
        let ys = Jet::seeds(&[y1.value(), y2.value()], 4);
        let f = &(&ys[0] * &ys[0]) / &ys[1];
        let sub = Substitution::new(&[y1.clone(), y2.clone()], 4);
        let pulled = sub.apply(&f);
        for k in 0..=4 {
            assert!(close(pulled.partial(&[k]), direct.partial(&[k]), 1e-12));
        }
    }

    #[test]
    fn mixed_order_arithmetic_truncates() {
        let a = Jet::variable(2, 4, 0, 1.0);
        let b = Jet::variable(2, 2, 1, 1.0);
        let c = &a * &b;
        assert_eq!(c.order(), 2);
        assert_eq!(c.partial(&[1, 1]), 1.0);
    }
}

use proptest::prelude::*;
use statvar_cli::parse_expr;
use statvar_core::catalog;
use statvar_core::jets::{CoordBox, JetFn, MultiIndex, MAX_ORDER};
use statvar_core::manifold::{ChartModel, Connection};

#[test]
fn inverse_square_second_derivative() {
    let f = parse_expr("1/(x2^2)", 2).unwrap();
    let d = f.eval(&[0.3, 1.0], &MultiIndex::from_exponents(&[0, 2])).unwrap();
    assert!((d - 6.0).abs() < 1e-12, "{d}");
}

#[test]
fn exp_has_unit_jets_at_zero() {
    let f = parse_expr("exp(x1)", 1).unwrap();
    for k in 0..=MAX_ORDER {
        let d = f.eval(&[0.0], &MultiIndex::from_exponents(&[k])).unwrap();
        assert!((d - 1.0).abs() < 1e-12, "order {k}: {d}");
    }
}

fn fisher_from_strings() -> ChartModel {
    let parse = |s: &str| parse_expr(s, 2).unwrap();
    let metric = vec![
        vec![parse("1/x2^2"), parse("0")],
        vec![parse("0"), parse("2/(x2^2)")],
    ];
    let reference = catalog::normal_distributions_fisher().unwrap();
    ChartModel::riemannian("parsed", reference.domain().clone(), metric).unwrap()
}

#[test]
fn parsed_fisher_metric_matches_the_catalog() {
    let reference = catalog::normal_distributions_fisher().unwrap();
    let parsed = fisher_from_strings();
    for x in reference.domain().grid(5) {
        let (a, b) = (parsed.metric_at(&x).unwrap(), reference.metric_at(&x).unwrap());
        assert!((a[(1, 1)] - b[(1, 1)]).abs() < 1e-13 * b[(1, 1)].abs());
        assert!((a - &b).abs().max() < 1e-13);
        // first and second metric derivatives enter through Γ and R
        let (ga, gb) = (parsed.levi_civita(&x).unwrap(), reference.levi_civita(&x).unwrap());
        assert!(ga.max_abs_diff(&gb) < 1e-12);
        let ra = parsed.curvature(&x, Connection::LeviCivita).unwrap();
        let rb = reference.curvature(&x, Connection::LeviCivita).unwrap();
        assert!(ra.max_abs_diff(&rb) < 1e-11);
    }
}

#[test]
fn parsed_functions_respect_a_domain() {
    let f: JetFn = parse_expr("sqrt(x1)", 1)
        .unwrap()
        .with_domain(CoordBox::new(vec![0.0], vec![4.0]).unwrap());
    assert!(f.value(&[5.0]).is_err());
    assert!((f.value(&[4.0]).unwrap() - 2.0).abs() < 1e-15);
}

/// `a x^3 + b x y + c exp(d y)` with derivatives written out by hand.
fn oracle(a: f64, b: f64, c: f64, d: f64, x: f64, y: f64) -> [f64; 5] {
    let e = (d * y).exp();
    [
        a * x.powi(3) + b * x * y + c * e,
        3.0 * a * x * x + b * y,
        b * x + c * d * e,
        6.0 * a * x,
        c * d * d * d * e,
    ]
}

proptest! {
    #[test]
    fn derivatives_match_hand_formulas(
        a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, d in -1.0..1.0f64,
        x in -1.5..1.5f64, y in -1.5..1.5f64,
    ) {
        let src = format!("{a:?}*x1^3 + {b:?}*x1*x2 + {c:?}*exp({d:?}*x2)");
        let f = parse_expr(&src, 2).unwrap();
        let want = oracle(a, b, c, d, x, y);
        let got = [
            f.value(&[x, y]).unwrap(),
            f.eval(&[x, y], &MultiIndex::from_exponents(&[1, 0])).unwrap(),
            f.eval(&[x, y], &MultiIndex::from_exponents(&[0, 1])).unwrap(),
            f.eval(&[x, y], &MultiIndex::from_exponents(&[2, 0])).unwrap(),
            f.eval(&[x, y], &MultiIndex::from_exponents(&[0, 3])).unwrap(),
        ];
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-12 * (1.0 + w.abs()), "{src}: {g} vs {w}");
        }
    }

    #[test]
    fn variable_powers_agree_with_logs(p in -3.0..3.0f64, x in 0.2..5.0f64) {
        let f = parse_expr(&format!("x1^({p:?})"), 1).unwrap();
        let g = parse_expr(&format!("exp({p:?}*log(x1))"), 1).unwrap();
        for k in 0..=4 {
            let alpha = MultiIndex::from_exponents(&[k]);
            let (u, v) = (f.eval(&[x], &alpha).unwrap(), g.eval(&[x], &alpha).unwrap());
            prop_assert!((u - v).abs() <= 1e-10 * (1.0 + v.abs()), "order {k}: {u} vs {v}");
        }
    }
}

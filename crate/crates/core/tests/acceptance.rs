//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! failure status if any criterion fails, except those listed in
//! `EXPECTED_FAIL`, which must fail (a surprise pass is also an error).

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{fisher_k, fisher_metric, mollifier, poly_window, rel, simpson};
use statvar_core::catalog;
use statvar_core::jets::{CoordBox, JetFn};
use statvar_core::manifold::{ChartModel, Connection};
use statvar_core::maps::{ibp_residual, Flavor, MapModel, Section};
use statvar_core::variation::{
    biharmonicity_residual, bump, characteristic_roots, fd_energy_derivatives, first_variation,
    h_operator, jacobi_term, kernel_probes, random_probes, second_variation, stability_verdict,
    BumpProfile, HMode, HValue, QuadratureRule, VariationFamily,
};

/// Orthant closed form with the `−12φ/t²` coefficient: the direct expansion
/// of the Jacobi term gives `−10φ/t²` (see 7a′), so this one cannot hold.
const EXPECTED_FAIL: &[&str] = &["7a"];

type Outcome = Result<(bool, String), String>;

struct Row {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

fn run(rows: &mut Vec<Row>, id: &'static str, title: &'static str, f: impl FnOnce() -> Outcome) {
    let t0 = Instant::now();
    let (pass, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    rows.push(Row {
        id,
        title,
        pass,
        detail,
        seconds: t0.elapsed().as_secs_f64(),
    });
}

fn e<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

fn interval(lo: f64, hi: f64) -> CoordBox {
    CoordBox::new(vec![lo], vec![hi]).unwrap()
}

fn quad_1d() -> QuadratureRule {
    QuadratureRule::gauss_legendre(16, 32).unwrap()
}

fn quad_2d() -> QuadratureRule {
    QuadratureRule::gauss_legendre(12, 2).unwrap()
}

fn charts() -> Vec<ChartModel> {
    vec![
        catalog::euclidean(2).unwrap(),
        catalog::euclidean(3).unwrap(),
        catalog::positive_orthant(2).unwrap(),
        catalog::positive_orthant_conj(2).unwrap(),
        catalog::normal_distributions().unwrap(),
        catalog::normal_distributions_exp().unwrap(),
        catalog::normal_distributions_fisher().unwrap(),
    ]
}

/// At least 25 grid points of the chart domain.
fn grid25(c: &ChartModel) -> Vec<Vec<f64>> {
    c.domain().grid(if c.dim() == 2 { 5 } else { 3 })
}

/// The three biharmonic scenarios with their probes and quadrature.
fn scenarios(count: usize, seed: u64) -> Result<Vec<(MapModel, Vec<Section>, QuadratureRule)>, String> {
    let par = e(catalog::parabola_curve(&[1.0, 1.0]))?;
    let exp = e(catalog::exp_curve(1.0))?;
    let bowl = e(catalog::paraboloid(2))?.map().clone();
    let mut out = Vec::new();
    for (u, profile, q) in [
        (par, BumpProfile::Mollifier, quad_1d()),
        (exp, BumpProfile::Mollifier, quad_1d()),
        (bowl, BumpProfile::PolyWindow, quad_2d()),
    ] {
        let probes = e(random_probes(&u, u.source().domain(), count, seed, profile))?;
        out.push((u, probes, q));
    }
    Ok(out)
}

fn c1() -> Outcome {
    let o = e(catalog::positive_orthant(2))?;
    let r = e(o.classify(&grid25(&o), 1e-6))?;
    let ok_o = r.hessian && r.hessian_residual < 1e-7;
    let oc = e(catalog::positive_orthant_conj(2))?;
    let rc = e(oc.classify(&grid25(&oc), 1e-6))?;
    let ok_oc = rc.hessian && rc.is_chc && rc.chc.value.abs() <= 1e-6;
    let n = e(catalog::normal_distributions())?;
    let rn = e(n.classify(&grid25(&n), 1e-6))?;
    let ok_n = rn.hessian && rn.is_chc && (rn.chc.value - 2.0).abs() <= 1e-6;
    let mut sec = 0.0f64;
    for x in grid25(&n) {
        let s = e(n.sectional_curvature(&x, Connection::LeviCivita, &[1.0, 0.0], &[0.0, 1.0]))?;
        sec = sec.max((s + 0.5).abs());
    }
    Ok((
        ok_o && ok_oc && ok_n && sec <= 1e-6,
        format!(
            "orthant R={:.1e}; orthant_conj c={:.1e}; normal c={:.9}; |K_sec+1/2|={sec:.1e}",
            r.hessian_residual, rc.chc.value, rn.chc.value
        ),
    ))
}

fn c2() -> Outcome {
    let n = e(catalog::normal_distributions())?;
    let mut kmax = 0.0f64;
    for x in grid25(&n) {
        let k = e(n.difference_tensor(&x))?;
        let want = fisher_k(x[1]);
        for p in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    kmax = kmax.max((k.get(&[p, i, j]) - want[p][i][j]).abs());
                }
            }
        }
    }
    let mut codazzi = 0.0f64;
    for c in charts() {
        for x in grid25(&c) {
            codazzi = codazzi.max(e(c.codazzi_residual(&x))?);
        }
    }
    Ok((kmax <= 1e-9 && codazzi < 1e-8, format!("K^F err={kmax:.1e}; codazzi={codazzi:.1e}")))
}

fn c3() -> Outcome {
    let mut worst = 0.0f64;
    for m in [2, 3] {
        let p = e(catalog::paraboloid(m))?;
        for x in p.induced().domain().grid(3) {
            let tau = e(p.map().tension(&x, Flavor::Standard))?;
            for (i, t) in tau.iter().enumerate() {
                let want = if i == m { m as f64 } else { 0.0 };
                worst = worst.max((t - want).abs());
            }
        }
    }
    for lambda in [[1.0, 1.0], [0.5, 2.0]] {
        let u = e(catalog::parabola_curve(&lambda))?;
        for x in u.source().domain().grid(7) {
            let tau = e(u.tension(&x, Flavor::Standard))?;
            for p in 0..2 {
                worst = worst.max((tau[p] - 6.0 * lambda[p]).abs());
            }
        }
    }
    for lambda in [0.5, 1.0] {
        for (u, sign) in [(e(catalog::exp_curve(lambda))?, 2.0), (e(catalog::exp_curve_exp(lambda))?, -2.0)] {
            for x in u.source().domain().grid(7) {
                let tau = e(u.tension(&x, Flavor::Standard))?;
                let gd = lambda * (lambda * x[0]).exp();
                worst = worst.max(tau[0].abs()).max((tau[1] - sign * lambda * gd).abs());
            }
        }
    }
    Ok((worst <= 1e-9, format!("max tension error={worst:.1e}")))
}

fn c4() -> Outcome {
    let mut worst = 0.0f64;
    let maps = [
        e(catalog::parabola_curve(&[1.0, 1.0]))?,
        e(catalog::exp_curve(1.0))?,
        e(catalog::exp_curve_exp(1.0))?,
        e(catalog::paraboloid(2))?.map().clone(),
    ];
    for u in &maps {
        worst = worst.max(e(biharmonicity_residual(u, u.source().domain(), 9))?);
    }
    let p = e(catalog::paraboloid(2))?;
    for x in p.induced().domain().grid(5) {
        let a = e(p.affine_bitension(&x))?;
        worst = a.iter().fold(worst, |m, v| m.max(v.abs()));
    }
    let bad = e(catalog::parabola_perturbed(&[1.0, 1.0], 0.5))?;
    let control = e(biharmonicity_residual(&bad, bad.source().domain(), 9))?;
    Ok((
        worst < 1e-5 && control > 1e-2,
        format!("max |τ₂|={worst:.1e}; perturbed control={control:.3}"),
    ))
}

fn c5() -> Outcome {
    let bad = e(catalog::parabola_perturbed(&[1.0, 1.0], 0.5))?;
    let omega = bad.source().domain().clone();
    let q = quad_1d();
    let mut worst_rel = 0.0f64;
    for v in e(random_probes(&bad, &omega, 5, 101, BumpProfile::Mollifier))? {
        let fam = e(VariationFamily::additive(bad.clone(), &v))?;
        let fd = e(fd_energy_derivatives(&fam, &omega, &q, 1))?;
        let fv = e(first_variation(&bad, &v, &omega, &q))?;
        worst_rel = worst_rel.max((fd - fv).abs() / fv.abs().max(1.0));
    }
    let mut worst_abs = 0.0f64;
    for (u, probes, q) in scenarios(5, 202)? {
        let omega = u.source().domain().clone();
        for v in &probes {
            let fam = e(VariationFamily::additive(u.clone(), v))?;
            worst_abs = worst_abs.max(e(fd_energy_derivatives(&fam, &omega, &q, 1))?.abs());
        }
    }
    Ok((
        worst_rel < 1e-3 && worst_abs < 1e-4,
        format!("non-biharmonic rel gap={worst_rel:.1e}; biharmonic |dE|={worst_abs:.1e}"),
    ))
}

fn c6() -> Outcome {
    let mut worst = 0.0f64;
    let mut n = 0;
    for (u, probes, q) in scenarios(5, 303)? {
        let omega = u.source().domain().clone();
        for v in &probes {
            let fam = e(VariationFamily::additive(u.clone(), v))?;
            let fd = e(fd_energy_derivatives(&fam, &omega, &q, 2))?;
            let sv = e(second_variation(&u, v, &omega, &q, HMode::General))?.value;
            worst = worst.max(rel(sv, fd));
            n += 1;
        }
    }
    Ok((worst < 1e-3, format!("{n} probes, max rel gap={worst:.1e}")))
}

fn orthant_closed_form(coef: f64) -> Outcome {
    let (lo, hi) = (0.6, 1.8);
    let u = e(catalog::parabola_curve(&[1.0, 1.0]))?;
    let v = e(catalog::bump_section(&interval(lo, hi), &[1.0, 0.0]))?;
    let sv = e(second_variation(&u, &v, u.source().domain(), &quad_1d(), HMode::General))?.value;
    let oracle = simpson(lo, hi, 20_000, |t| {
        let [f, d1, d2] = mollifier(t, lo, hi);
        (d2 + 4.0 * d1 / t - coef * f / (t * t)).powi(2)
    });
    let r = rel(sv, oracle);
    Ok((r <= 1e-6, format!("value={sv:.8} oracle={oracle:.8} rel={r:.1e}")))
}

fn exp_closed_form(exp_target: bool) -> Outcome {
    let lambda = 1.0;
    let (lo, hi) = (-0.8, 0.8);
    let (a, b) = (0.8, -1.2);
    let supp = interval(lo, hi);
    let w = e(bump(&supp, BumpProfile::Mollifier))?;
    let v = e(catalog::exp_curve_section(lambda, &w.scaled(a), &w.scaled(b), &supp))?;
    let u = if exp_target { e(catalog::exp_curve_exp(lambda))? } else { e(catalog::exp_curve(lambda))? };
    let sign = if exp_target { -1.0 } else { 1.0 };
    let sv = e(second_variation(&u, &v, u.source().domain(), &quad_1d(), HMode::General))?.value;
    let oracle = simpson(lo, hi, 20_000, |t| {
        let [f, d1, d2] = mollifier(t, lo, hi);
        let q = b * (d2 + sign * 2.0 * lambda * d1 - 3.0 * lambda * lambda * f);
        2.0 * lambda * lambda * (a * d2).powi(2) + 48.0 * lambda.powi(4) * (a * d1).powi(2) + q * q
    });
    let r = rel(sv, oracle);
    Ok((r <= 1e-5, format!("value={sv:.8} oracle={oracle:.8} rel={r:.1e}")))
}

fn c8() -> Outcome {
    let (p, m) = e(characteristic_roots(4.0, -12.0))?;
    let s = 57f64.sqrt();
    let err = (p - (-3.0 + s) / 2.0).abs().max((m - (-3.0 - s) / 2.0).abs());
    Ok((err <= 1e-12, format!("μ+={p:.15} μ-={m:.15} err={err:.1e}")))
}

/// Probes `t^μ·bump` and, for the exp curve, the exponential solutions of the
/// ψ-equation together with constant and linear φ.
fn kernel_shaped(u: &MapModel, omega: &CoordBox) -> Result<Vec<Section>, String> {
    if u.name().starts_with("parabola") {
        let (mp, mm) = e(characteristic_roots(4.0, -12.0))?;
        let (cp, cm) = e(characteristic_roots(4.0, -10.0))?;
        return e(kernel_probes(u, omega, &[mp, mm, cp, cm]));
    }
    let lambda = 1.0;
    let supp = interval(-0.9, 0.9);
    let w = e(bump(&supp, BumpProfile::Mollifier))?;
    let zero = JetFn::constant(1, 0.0);
    let shapes = [
        (w.clone(), zero.clone()),
        (w.times(&JetFn::coordinate(1, 0)), zero.clone()),
        (zero.clone(), w.times(&JetFn::analytic(1, move |t| t[0].scale(lambda).exp()))),
        (zero, w.times(&JetFn::analytic(1, move |t| t[0].scale(-3.0 * lambda).exp()))),
    ];
    shapes
        .iter()
        .map(|(phi, psi)| e(catalog::exp_curve_section(lambda, phi, psi, &supp)))
        .collect()
}

fn c9() -> Outcome {
    let mut min_all = f64::INFINITY;
    let mut negative = false;
    let mut details = Vec::new();
    for (u, mut probes, q) in scenarios(20, 909)? {
        let omega = u.source().domain().clone();
        if omega.dim() == 1 {
            probes.extend(kernel_shaped(&u, &omega)?);
        }
        let verdict = e(stability_verdict(&u, &omega, &probes, &q, HMode::General))?;
        negative |= verdict.negative_found();
        min_all = min_all.min(verdict.min_value);
        details.push(format!("{} min={:.3e} ({} probes)", u.name(), verdict.min_value, probes.len()));
    }
    // improper affine sphere: Jacobi term is Δ̂V and ⟨𝓗V,V⟩ vanishes
    let imm = e(catalog::paraboloid(2))?;
    let u = imm.map();
    let (lo, hi) = (-0.6, 0.6);
    let supp = e(CoordBox::cube(2, lo, hi))?;
    let w = e(bump(&supp, BumpProfile::PolyWindow))?;
    let c = [0.3, -0.4, 1.0];
    let v = e(Section::new(c.iter().map(|&ci| w.scaled(ci)).collect(), Some(supp.clone())))?;
    let mut term = 0.0f64;
    for x in supp.grid(5) {
        let [f0, _, f2] = poly_window(x[0], lo, hi);
        let [g0, _, g2] = poly_window(x[1], lo, hi);
        let lap = f2 * g0 + f0 * g2;
        let j = e(jacobi_term(u, &v, &x))?;
        let hat = e(u.laplacian(&v, &x, Flavor::Riemannian))?;
        for p in 0..3 {
            term = term.max((j[p] - hat[p]).abs()).max((j[p] - c[p] * lap).abs());
        }
        let vv = e(v.value(&x))?;
        let HValue::Vector(h) = e(h_operator(u, &v, &x, HMode::General))? else {
            return Err("general mode returned a scalar".into());
        };
        term = term.max(h.iter().zip(&vv).map(|(a, b)| a * b).sum::<f64>().abs());
    }
    details.push(format!("affine sphere term residual={term:.1e}"));
    Ok((!negative && min_all > 0.0 && term < 1e-7, details.join("; ")))
}

fn paired(h: &HValue, v: &[f64], g: &[f64; 2]) -> f64 {
    match h {
        HValue::Vector(w) => g[0] * w[0] * v[0] + g[1] * w[1] * v[1],
        HValue::Scalar(s) => *s,
    }
}

fn c10() -> Outcome {
    // integration by parts
    let supp = e(CoordBox::new(vec![-1.0, 1.0], vec![1.0, 2.0]))?;
    let w = e(bump(&supp, BumpProfile::PolyWindow))?;
    let xi = e(Section::new(vec![w.times(&JetFn::coordinate(2, 1)), w.scaled(0.5)], Some(supp.clone())))?;
    let eta = e(Section::new(
        vec![JetFn::analytic(2, |x| x[0].sin()), JetFn::analytic(2, |x| x[1].exp().scale(0.3))],
        None,
    ))?;
    let mut ibp = 0.0f64;
    for c in [
        e(catalog::euclidean(2))?,
        e(catalog::normal_distributions_fisher())?,
        e(catalog::normal_distributions())?,
        e(catalog::normal_distributions_exp())?,
    ] {
        ibp = ibp.max(e(ibp_residual(&c, &xi, &eta, c.domain(), &quad_2d()))?);
    }
    // identities and curvature assembly
    let (mut ident, mut assembly) = (0.0f64, 0.0f64);
    for c in charts() {
        for x in grid25(&c) {
            let r = e(c.identity_residuals(&x))?;
            ident = ident.max(r.max());
            assembly = assembly.max(r.assembly_levi_civita).max(r.assembly_nabla);
        }
    }
    // 𝓗 modes on Hessian targets
    let mut modes = 0.0f64;
    let lambda = 1.0;
    let s = interval(-0.8, 0.8);
    let w1 = e(bump(&s, BumpProfile::Mollifier))?;
    let v = e(catalog::exp_curve_section(lambda, &w1.scaled(0.6), &w1.scaled(1.4), &s))?;
    for (u, chc) in [
        (e(catalog::exp_curve(lambda))?, HMode::Chc(2.0)),
        (e(catalog::exp_curve_exp(lambda))?, HMode::ChcConjugate(2.0)),
    ] {
        for t in [-0.6, -0.2, 0.3, 0.7] {
            let y = e(u.value(&[t]))?;
            let g = fisher_metric(y[1]);
            let vv = e(v.value(&[t]))?;
            let gen = e(h_operator(&u, &v, &[t], HMode::General))?;
            let hes = e(h_operator(&u, &v, &[t], HMode::Hessian))?;
            let red = e(h_operator(&u, &v, &[t], chc))?;
            if let (HValue::Vector(a), HValue::Vector(b)) = (&gen, &hes) {
                for (p, q) in a.iter().zip(b) {
                    modes = modes.max((p - q).abs());
                }
            }
            modes = modes.max((paired(&hes, &vv, &g) - paired(&red, &vv, &g)).abs());
        }
    }
    let par = e(catalog::parabola_curve(&[1.0, 1.0]))?;
    let vp = e(catalog::bump_section(&interval(0.6, 1.8), &[1.0, -0.5]))?;
    for t in [0.7, 1.1, 1.6] {
        let vv = e(vp.value(&[t]))?;
        let one = [1.0, 1.0];
        let zero = paired(&e(h_operator(&par, &vp, &[t], HMode::ChcConjugate(0.0)))?, &vv, &one);
        let hes = paired(&e(h_operator(&par, &vp, &[t], HMode::Hessian))?, &vv, &one);
        let gen = paired(&e(h_operator(&par, &vp, &[t], HMode::General))?, &vv, &one);
        if zero != 0.0 || hes.abs() > 1e-6 || gen.abs() > 1e-6 {
            modes = modes.max(1.0);
        }
    }
    Ok((
        ibp < 1e-5 && ident < 1e-7 && modes < 1e-5 && assembly < 1e-6,
        format!("ibp={ibp:.1e}; identities={ident:.1e}; modes={modes:.1e}; assembly={assembly:.1e}"),
    ))
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut rows = Vec::new();
    run(&mut rows, "1", "structure labels", c1);
    run(&mut rows, "2", "closed-form tensors and Codazzi", c2);
    run(&mut rows, "3", "tension fields", c3);
    run(&mut rows, "4", "biharmonicity", c4);
    run(&mut rows, "5", "first variational formula", c5);
    run(&mut rows, "6", "second variational formula vs FD oracle", c6);
    run(&mut rows, "7a", "orthant curve closed form with −12φ/t²", || orthant_closed_form(12.0));
    run(&mut rows, "7a′", "orthant curve closed form with −10φ/t²", || orthant_closed_form(10.0));
    run(&mut rows, "7b", "mixture curve closed form", || exp_closed_form(false));
    run(&mut rows, "7c", "exponential curve closed form", || exp_closed_form(true));
    run(&mut rows, "8", "characteristic roots", c8);
    run(&mut rows, "9", "stability probes", c9);
    run(&mut rows, "10", "identity suite", c10);

    let mut bad = 0;
    for r in &rows {
        let expected = EXPECTED_FAIL.contains(&r.id);
        let tag = match (r.pass, expected) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (expected)",
            (true, true) => "PASS (unexpected)",
        };
        if r.pass == expected {
            bad += 1;
        }
        println!("{tag} [{}] {}: {} ({:.2}s)", r.id, r.title, r.detail, r.seconds);
    }
    if bad == 0 {
        ExitCode::SUCCESS
    } else {
        eprintln!("{bad} acceptance criteria did not meet expectations");
        ExitCode::FAILURE
    }
}

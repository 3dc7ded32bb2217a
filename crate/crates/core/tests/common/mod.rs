//! Hand-derived oracles shared by the integration tests. Nothing here calls
//! into the jet engine.
#![allow(dead_code)]

/// Mollifier `φ(t) = exp(−1/(1−s²))`, `s = (t−c)/r`, with `φ'` and `φ''`.
pub fn mollifier(t: f64, lo: f64, hi: f64) -> [f64; 3] {
    let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let s = (t - c) / r;
    if s.abs() >= 1.0 {
        return [0.0; 3];
    }
    let w = 1.0 - s * s;
    if 1.0 / w > 700.0 {
        return [0.0; 3];
    }
    let f = (-1.0 / w).exp();
    let d1 = f * (-2.0 * s / (w * w));
    let d2 = f * (4.0 * s * s / w.powi(4) - 2.0 / (w * w) - 8.0 * s * s / w.powi(3));
    [f, d1 / r, d2 / (r * r)]
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    assert!(n % 2 == 0);
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Fisher metric `(dx² + 2dy²)/y²` as a diagonal.
pub fn fisher_metric(y: f64) -> [f64; 2] {
    [1.0 / (y * y), 2.0 / (y * y)]
}

/// Difference tensor of the mixture connection, `K[k][i][j]`.
pub fn fisher_k(y: f64) -> [[[f64; 2]; 2]; 2] {
    let mut k = [[[0.0; 2]; 2]; 2];
    k[1][0][0] = 0.5 / y;
    k[0][0][1] = 1.0 / y;
    k[0][1][0] = 1.0 / y;
    k[1][1][1] = 2.0 / y;
    k
}

/// Window `w(s) = (1−s²)⁵`, `s = (t−c)/r`, with `w'` and `w''`.
pub fn poly_window(t: f64, lo: f64, hi: f64) -> [f64; 3] {
    let (c, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let s = (t - c) / r;
    if s.abs() >= 1.0 {
        return [0.0; 3];
    }
    let w = 1.0 - s * s;
    let d1 = -10.0 * s * w.powi(4);
    let d2 = -10.0 * w.powi(4) + 80.0 * s * s * w.powi(3);
    [w.powi(5), d1 / r, d2 / (r * r)]
}

/// Exponential connection of the Fisher chart, `Γ̄[k][i][j]`.
pub fn fisher_exp_gamma(y: f64) -> [[[f64; 2]; 2]; 2] {
    let mut g = [[[0.0; 2]; 2]; 2];
    g[0][0][1] = -2.0 / y;
    g[0][1][0] = -2.0 / y;
    g[1][1][1] = -3.0 / y;
    g
}

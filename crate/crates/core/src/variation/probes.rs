//! Probe sections and the falsification-only stability check.
//!
//! A probe search can exhibit a section with negative second variation, which
//! certifies instability. Finding none says nothing about stability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{bump, second_variation, BumpProfile, HMode, QuadratureRule};
use crate::error::{Error, Result};
use crate::jets::{CoordBox, JetFn};
use crate::maps::{MapModel, Section};

/// Highest polynomial degree used to shape random probes.
pub const PROBE_DEGREE: usize = 4;

#[derive(Clone, Debug)]
pub enum Outcome {
    NoNegativeProbeFound,
    NegativeProbe { probe: Section, value: f64 },
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Smallest second variation over the non-zero probes (`+∞` if there are none).
    pub min_value: f64,
    pub values: Vec<f64>,
}

impl Verdict {
    pub fn negative_found(&self) -> bool {
        matches!(self.outcome, Outcome::NegativeProbe { .. })
    }
}

/// Random sub-box of `omega` keeping a 5% inset on every side.
fn sub_box(rng: &mut ChaCha8Rng, omega: &CoordBox) -> Result<CoordBox> {
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for a in 0..omega.dim() {
        let w = omega.width(a);
        let (inner_lo, inner_hi) = (omega.lower()[a] + 0.05 * w, omega.upper()[a] - 0.05 * w);
        let len = rng.gen_range(0.35..0.9) * (inner_hi - inner_lo);
        let start = inner_lo + rng.gen_range(0.0..1.0) * (inner_hi - inner_lo - len);
        lo.push(start);
        hi.push(start + len);
    }
    CoordBox::new(lo, hi)
}

/// Random polynomial of total degree `≤ PROBE_DEGREE` in coordinates centred on `c`.
fn polynomial(rng: &mut ChaCha8Rng, c: Vec<f64>, scale: Vec<f64>) -> JetFn {
    let m = c.len();
    let mut terms: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut push = |e: Vec<usize>, rng: &mut ChaCha8Rng| {
        let coef = if e.iter().all(|&k| k == 0) { 1.0 } else { rng.gen_range(-1.0..1.0) };
        terms.push((e, coef));
    };
    let mut exps = vec![vec![]];
    for _ in 0..m {
        exps = exps
            .into_iter()
            .flat_map(|e: Vec<usize>| {
                (0..=PROBE_DEGREE).map(move |k| {
                    let mut e = e.clone();
                    e.push(k);
                    e
                })
            })
            .collect();
    }
    for e in exps.into_iter().filter(|e| e.iter().sum::<usize>() <= PROBE_DEGREE) {
        push(e, rng);
    }
    JetFn::analytic(m, move |x| {
        let s: Vec<_> = (0..m).map(|a| (&x[a] - c[a]) / scale[a]).collect();
        let mut out = x[0].lift(0.0);
        for (e, coef) in &terms {
            let mut t = x[0].lift(*coef);
            for (a, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &s[a].powi(k as i32);
                }
            }
            out = &out + &t;
        }
        out
    })
}

/// `count` random probes: a bump on a random sub-box of `omega` times a
/// random polynomial, in a random target direction. Deterministic in `seed`.
pub fn random_probes(
    u: &MapModel,
    omega: &CoordBox,
    count: usize,
    seed: u64,
    profile: BumpProfile,
) -> Result<Vec<Section>> {
    let n = u.target().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let supp = sub_box(&mut rng, omega)?;
            let b = bump(&supp, profile)?;
            let half: Vec<f64> = (0..supp.dim()).map(|a| 0.5 * supp.width(a)).collect();
            let shape = b.times(&polynomial(&mut rng, supp.center(), half));
            let comps = (0..n)
                .map(|_| shape.scaled(rng.gen_range(-1.0..1.0)))
                .collect();
            Section::new(comps, Some(supp))
        })
        .collect()
}

/// Probes `t^μ · bump` along each target axis, for a one-dimensional source.
/// The bump sits on `omega` shrunk by 5% on each side.
pub fn kernel_probes(u: &MapModel, omega: &CoordBox, exponents: &[f64]) -> Result<Vec<Section>> {
    if omega.dim() != 1 {
        return Err(Error::BadParams("kernel probes need a one-dimensional source".into()));
    }
    let w = omega.width(0);
    let supp = CoordBox::new(vec![omega.lower()[0] + 0.05 * w], vec![omega.upper()[0] - 0.05 * w])?;
    if supp.lower()[0] <= 0.0 {
        return Err(Error::BadParams("kernel probes need a positive parameter interval".into()));
    }
    let b = bump(&supp, BumpProfile::Mollifier)?;
    let n = u.target().dim();
    let mut out = Vec::new();
    for &mu in exponents {
        let power = JetFn::analytic(1, move |x| x[0].powf(mu));
        let shape = b.times(&power);
        for axis in 0..n {
            let comps = (0..n)
                .map(|p| if p == axis { shape.clone() } else { JetFn::constant(1, 0.0) })
                .collect();
            out.push(Section::new(comps, Some(supp.clone()))?);
        }
    }
    Ok(out)
}

/// Smallest second variation over `probes`. Falsification only: a negative
/// value certifies instability, while a clean scan certifies nothing.
pub fn stability_verdict(
    u: &MapModel,
    omega: &CoordBox,
    probes: &[Section],
    quad: &QuadratureRule,
    mode: HMode,
) -> Result<Verdict> {
    let values = probes
        .par_iter()
        .map(|v| second_variation(u, v, omega, quad, mode).map(|s| s.value))
        .collect::<Result<Vec<_>>>()?;
    let (mut min_value, mut worst) = (f64::INFINITY, None);
    for (i, &v) in values.iter().enumerate() {
        if !probes[i].is_zero() && v < min_value {
            min_value = v;
            worst = Some(i);
        }
    }
    let outcome = match worst {
        Some(i) if min_value < 0.0 => Outcome::NegativeProbe {
            probe: probes[i].clone(),
            value: min_value,
        },
        _ => Outcome::NoNegativeProbeFound,
    };
    Ok(Verdict {
        outcome,
        min_value,
        values,
    })
}

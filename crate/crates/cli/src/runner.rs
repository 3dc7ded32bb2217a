//! Scenario validation and check execution.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use statvar_core::catalog;
use statvar_core::jets::{CoordBox, JetFn};
use statvar_core::manifold::ChartModel;
use statvar_core::maps::{induce_from_graph, GraphImmersion, MapModel, Section};
use statvar_core::variation::{
    biharmonicity_residual, bump, fd_energy_derivatives, first_variation, kernel_probes,
    random_probes, second_variation, stability_verdict, BumpProfile, HMode, QuadratureRule,
    VariationFamily, Warning,
};

use crate::config::{
    BoxSpec, ChartSpec, CheckKind, CheckSpec, ConfigError, FamilySpec, ImmersionSpec, MapSpec,
    ModeName, Profile, Scenario, Side, Structure, Tolerances, Window,
};
use crate::expr::Expr;
use crate::report::{CheckRecord, Report};

type CResult<T> = Result<T, ConfigError>;

/// The object a scenario examines.
pub enum Subject {
    Chart(ChartModel),
    Map(MapModel),
    Immersion(GraphImmersion),
    Family(VariationFamily),
}

impl Subject {
    pub fn kind(&self) -> &'static str {
        match self {
            Subject::Chart(_) => "chart",
            Subject::Map(_) => "map",
            Subject::Immersion(_) => "immersion",
            Subject::Family(_) => "family",
        }
    }

    pub fn map(&self) -> Option<&MapModel> {
        match self {
            Subject::Chart(_) => None,
            Subject::Map(u) => Some(u),
            Subject::Immersion(i) => Some(i.map()),
            Subject::Family(f) => Some(f.base()),
        }
    }

    pub fn source(&self) -> &ChartModel {
        match (self, self.map()) {
            (Subject::Chart(c), _) => c,
            (_, Some(u)) => u.source(),
            _ => unreachable!(),
        }
    }

    fn default_side(&self) -> Side {
        match self {
            Subject::Chart(_) | Subject::Immersion(_) => Side::Source,
            Subject::Map(_) | Subject::Family(_) => Side::Target,
        }
    }

    fn chart(&self, side: Side) -> &ChartModel {
        match side {
            Side::Source => self.source(),
            Side::Target => self.map().expect("validated").target(),
        }
    }
}

/// A validated scenario, ready to run.
pub struct Prepared {
    pub subject: Subject,
    pub checks: Vec<CheckSpec>,
    pub omega: CoordBox,
    pub quad: QuadratureRule,
    pub tol: Tolerances,
    pub seed: u64,
}

fn coord_box(b: &BoxSpec, field: &str) -> CResult<CoordBox> {
    CoordBox::new(b.lower.clone(), b.upper.clone()).map_err(|e| ConfigError::model(field, e))
}

fn expr(src: &str, arity: usize, field: String) -> CResult<JetFn> {
    Expr::parse(src)
        .and_then(|e| e.to_jet_fn(arity))
        .map_err(|source| ConfigError::Expr { field, source })
}

fn exclusive(catalog: &Option<String>, inline: &[(&str, bool)], field: &str) -> CResult<()> {
    let given: Vec<&str> = inline.iter().filter(|p| p.1).map(|p| p.0).collect();
    if catalog.is_some() && !given.is_empty() {
        return Err(ConfigError::field(
            format!("{field}.{}", given[0]),
            "cannot be combined with `catalog`",
        ));
    }
    Ok(())
}

fn catalog_err(field: &str) -> impl Fn(statvar_core::Error) -> ConfigError + '_ {
    move |e| match e {
        statvar_core::Error::UnknownEntry(_) => ConfigError::model(format!("{field}.catalog"), e),
        e => ConfigError::model(format!("{field}.params"), e),
    }
}

fn required<'a, T>(v: &'a Option<T>, field: &str, what: &str) -> CResult<&'a T> {
    v.as_ref()
        .ok_or_else(|| ConfigError::field(field, format!("missing; give `catalog` or {what}")))
}

fn no_params(params: &catalog::Params, field: &str) -> CResult<()> {
    if !params.is_empty() {
        return Err(ConfigError::field(format!("{field}.params"), "only valid with `catalog`"));
    }
    Ok(())
}

pub fn build_chart(spec: &ChartSpec, field: &str) -> CResult<ChartModel> {
    exclusive(
        &spec.catalog,
        &[
            ("name", spec.name.is_some()),
            ("domain", spec.domain.is_some()),
            ("metric", spec.metric.is_some()),
            ("connection", spec.connection.is_some()),
        ],
        field,
    )?;
    if let Some(name) = &spec.catalog {
        return catalog::chart(name, &spec.params).map_err(catalog_err(field));
    }
    no_params(&spec.params, field)?;
    let domain = coord_box(
        required(&spec.domain, &format!("{field}.domain"), "an inline `domain`")?,
        &format!("{field}.domain"),
    )?;
    let m = domain.dim();
    let rows = required(&spec.metric, &format!("{field}.metric"), "an inline `metric`")?;
    let metric = square(rows, m, &format!("{field}.metric"))?;
    let name = spec.name.clone().unwrap_or_else(|| "inline_chart".into());
    let chart = match &spec.connection {
        None => ChartModel::riemannian(name, domain, metric),
        Some(planes) => {
            if planes.len() != m {
                return Err(ConfigError::field(
                    format!("{field}.connection"),
                    format!("expected {m} planes, got {}", planes.len()),
                ));
            }
            let gamma = planes
                .iter()
                .enumerate()
                .map(|(k, p)| square(p, m, &format!("{field}.connection[{k}]")))
                .collect::<CResult<Vec<_>>>()?;
            ChartModel::new(name, domain, metric, gamma)
        }
    };
    chart.map_err(|e| ConfigError::model(field, e))
}

fn square(rows: &[Vec<String>], m: usize, field: &str) -> CResult<Vec<Vec<JetFn>>> {
    if rows.len() != m {
        return Err(ConfigError::field(field, format!("expected {m} rows, got {}", rows.len())));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != m {
                return Err(ConfigError::field(
                    format!("{field}[{i}]"),
                    format!("expected {m} entries, got {}", row.len()),
                ));
            }
            row.iter()
                .enumerate()
                .map(|(j, s)| expr(s, m, format!("{field}[{i}][{j}]")))
                .collect()
        })
        .collect()
}

pub fn build_map(spec: &MapSpec, field: &str) -> CResult<MapModel> {
    exclusive(
        &spec.catalog,
        &[
            ("name", spec.name.is_some()),
            ("source", spec.source.is_some()),
            ("target", spec.target.is_some()),
            ("components", spec.components.is_some()),
        ],
        field,
    )?;
    if let Some(name) = &spec.catalog {
        return catalog::map(name, &spec.params).map_err(catalog_err(field));
    }
    no_params(&spec.params, field)?;
    let source = build_chart(
        required(&spec.source, &format!("{field}.source"), "an inline `source` chart")?,
        &format!("{field}.source"),
    )?;
    let target = build_chart(
        required(&spec.target, &format!("{field}.target"), "an inline `target` chart")?,
        &format!("{field}.target"),
    )?;
    let comps = required(&spec.components, &format!("{field}.components"), "inline `components`")?;
    if comps.len() != target.dim() {
        return Err(ConfigError::field(
            format!("{field}.components"),
            format!("expected {} components, got {}", target.dim(), comps.len()),
        ));
    }
    let m = source.dim();
    let comps = comps
        .iter()
        .enumerate()
        .map(|(i, s)| expr(s, m, format!("{field}.components[{i}]")))
        .collect::<CResult<Vec<_>>>()?;
    let name = spec.name.clone().unwrap_or_else(|| "inline_map".into());
    MapModel::new(name, Arc::new(source), Arc::new(target), comps)
        .map_err(|e| ConfigError::model(field, e))
}

pub fn build_immersion(spec: &ImmersionSpec, field: &str) -> CResult<GraphImmersion> {
    exclusive(
        &spec.catalog,
        &[
            ("name", spec.name.is_some()),
            ("graph", spec.graph.is_some()),
            ("domain", spec.domain.is_some()),
        ],
        field,
    )?;
    if let Some(name) = &spec.catalog {
        return catalog::immersion(name, &spec.params).map_err(catalog_err(field));
    }
    no_params(&spec.params, field)?;
    let domain = coord_box(
        required(&spec.domain, &format!("{field}.domain"), "an inline `domain`")?,
        &format!("{field}.domain"),
    )?;
    let graph = required(&spec.graph, &format!("{field}.graph"), "an inline `graph`")?;
    let f = expr(graph, domain.dim(), format!("{field}.graph"))?;
    let name = spec.name.clone().unwrap_or_else(|| "inline_graph".into());
    induce_from_graph(name, f, domain).map_err(|e| ConfigError::model(field, e))
}

pub fn build_family(spec: &FamilySpec, field: &str) -> CResult<VariationFamily> {
    exclusive(
        &spec.catalog,
        &[
            ("base", spec.base.is_some()),
            ("section", spec.section.is_some()),
            ("support", spec.support.is_some()),
            ("window", spec.window.is_some()),
        ],
        field,
    )?;
    if let Some(name) = &spec.catalog {
        return catalog::family(name, &spec.params).map_err(catalog_err(field));
    }
    no_params(&spec.params, field)?;
    let base = build_map(
        required(&spec.base, &format!("{field}.base"), "an inline `base` map")?,
        &format!("{field}.base"),
    )?;
    let supp_field = format!("{field}.support");
    let supp = coord_box(required(&spec.support, &supp_field, "an inline `support`")?, &supp_field)?;
    let m = base.source().dim();
    if supp.dim() != m {
        return Err(ConfigError::field(supp_field, format!("expected {m} coordinates")));
    }
    let profile = match spec.window.unwrap_or(Window::Mollifier) {
        Window::Mollifier => BumpProfile::Mollifier,
        Window::PolyWindow => BumpProfile::PolyWindow,
    };
    let b = bump(&supp, profile).map_err(|e| ConfigError::model(&supp_field, e))?;
    let section = required(&spec.section, &format!("{field}.section"), "an inline `section`")?;
    let n = base.target().dim();
    if section.len() != n {
        return Err(ConfigError::field(
            format!("{field}.section"),
            format!("expected {n} components, got {}", section.len()),
        ));
    }
    let comps = section
        .iter()
        .enumerate()
        .map(|(i, s)| Ok(b.times(&expr(s, m, format!("{field}.section[{i}]"))?)))
        .collect::<CResult<Vec<_>>>()?;
    let v = Section::new(comps, Some(supp)).map_err(|e| ConfigError::model(field, e))?;
    VariationFamily::additive(base, &v).map_err(|e| ConfigError::model(field, e))
}

fn build_subject(s: &Scenario) -> CResult<Subject> {
    let given: Vec<&str> = [
        ("chart", s.chart.is_some()),
        ("map", s.map.is_some()),
        ("immersion", s.immersion.is_some()),
        ("family", s.family.is_some()),
    ]
    .into_iter()
    .filter(|p| p.1)
    .map(|p| p.0)
    .collect();
    match given.as_slice() {
        [] => Err(ConfigError::field(
            "scenario",
            "no subject; add one of [chart], [map], [immersion], [family]",
        )),
        [_] => Ok(if let Some(c) = &s.chart {
            Subject::Chart(build_chart(c, "chart")?)
        } else if let Some(u) = &s.map {
            Subject::Map(build_map(u, "map")?)
        } else if let Some(i) = &s.immersion {
            Subject::Immersion(build_immersion(i, "immersion")?)
        } else {
            Subject::Family(build_family(s.family.as_ref().expect("one subject"), "family")?)
        }),
        many => Err(ConfigError::field(
            many[1],
            format!("only one subject allowed, `{}` is already given", many[0]),
        )),
    }
}

/// Options each check accepts, beyond `kind` and `label`.
fn allowed(kind: CheckKind) -> &'static [&'static str] {
    use CheckKind::*;
    match kind {
        Classify => &["on", "grid", "structure", "chc", "sectional", "metric_sectional"],
        Codazzi => &["on", "grid"],
        Biharmonicity => &["grid", "biharmonic"],
        FirstVariation => &[],
        SecondVariation | OracleCompare => &["mode", "c"],
        StabilityProbe => &["mode", "c", "probes", "profile", "exponents", "stable"],
    }
}

fn given_options(c: &CheckSpec) -> Vec<(&'static str, bool)> {
    let e = &c.expect;
    vec![
        ("on", c.on.is_some()),
        ("grid", c.grid.is_some()),
        ("structure", e.structure.is_some()),
        ("chc", e.chc.is_some()),
        ("sectional", e.sectional.is_some()),
        ("metric_sectional", e.metric_sectional.is_some()),
        ("biharmonic", e.biharmonic.is_some()),
        ("stable", e.stable.is_some()),
        ("mode", c.mode.is_some()),
        ("c", c.c.is_some()),
        ("probes", c.probes.is_some()),
        ("profile", c.profile.is_some()),
        ("exponents", !c.exponents.is_empty()),
    ]
}

fn is_expectation(opt: &str) -> bool {
    matches!(opt, "structure" | "chc" | "sectional" | "metric_sectional" | "biharmonic" | "stable")
}

fn validate_check(c: &CheckSpec, i: usize, subject: &Subject) -> CResult<()> {
    let field = |opt: &str| {
        let sub = if is_expectation(opt) { "expect." } else { "" };
        format!("checks[{i}].{sub}{opt}")
    };
    for (opt, set) in given_options(c) {
        if set && !allowed(c.kind).contains(&opt) {
            return Err(ConfigError::field(
                field(opt),
                format!("not an option of `{}`", c.kind.as_str()),
            ));
        }
    }
    use CheckKind::*;
    let needs = match c.kind {
        Classify | Codazzi => None,
        Biharmonicity | StabilityProbe => subject.map().is_none().then_some("a map"),
        FirstVariation | SecondVariation | OracleCompare => {
            (!matches!(subject, Subject::Family(_))).then_some("a family")
        }
    };
    if let Some(what) = needs {
        return Err(ConfigError::field(
            format!("checks[{i}]"),
            format!("`{}` needs {what}, the subject is a {}", c.kind.as_str(), subject.kind()),
        ));
    }
    if c.on == Some(Side::Target) && subject.map().is_none() {
        return Err(ConfigError::field(field("on"), "a chart has no target"));
    }
    if c.grid == Some(0) {
        return Err(ConfigError::field(field("grid"), "must be positive"));
    }
    if c.probes == Some(0) {
        return Err(ConfigError::field(field("probes"), "must be positive"));
    }
    match (c.mode, c.c) {
        (Some(ModeName::Chc | ModeName::ChcConjugate), None) => {
            return Err(ConfigError::field(field("c"), "required by the chc modes"))
        }
        (Some(ModeName::Chc | ModeName::ChcConjugate), Some(_)) => {}
        (_, Some(_)) => return Err(ConfigError::field(field("c"), "only used by the chc modes")),
        _ => {}
    }
    if !c.exponents.is_empty() && subject.source().dim() != 1 {
        return Err(ConfigError::field(field("exponents"), "kernel probes need a one-dimensional source"));
    }
    for (opt, v) in [("chc", c.expect.chc), ("sectional", c.expect.sectional), ("c", c.c)] {
        if v.is_some_and(|v| !v.is_finite()) {
            return Err(ConfigError::field(field(opt), "must be finite"));
        }
    }
    Ok(())
}

/// Builds the subject and checks every field of the scenario.
pub fn prepare(s: &Scenario) -> CResult<Prepared> {
    let tol = s.tolerances()?;
    let quad = QuadratureRule::gauss_legendre(s.quadrature.order, s.quadrature.panels)
        .map_err(|e| ConfigError::model("quadrature", e))?;
    let subject = build_subject(s)?;
    let domain = subject.source().domain().clone();
    let omega = match &s.omega {
        None => domain,
        Some(b) => {
            let omega = coord_box(b, "omega")?;
            if omega.dim() != domain.dim() {
                return Err(ConfigError::field(
                    "omega",
                    format!("expected {} coordinates, got {}", domain.dim(), omega.dim()),
                ));
            }
            if !domain.contains_box(&omega) {
                return Err(ConfigError::field("omega", "must lie inside the source domain"));
            }
            omega
        }
    };
    if let Subject::Family(f) = &subject {
        if f.support().is_some_and(|supp| !omega.contains_box(supp)) {
            return Err(ConfigError::field("omega", "must contain the support of the variation"));
        }
    }
    let checks: Vec<CheckSpec> = s.checks().cloned().collect();
    for (i, c) in checks.iter().enumerate() {
        validate_check(c, i, &subject)?;
    }
    Ok(Prepared {
        subject,
        checks,
        omega,
        quad,
        tol,
        seed: s.seed,
    })
}

fn default_grid(dim: usize) -> usize {
    match dim {
        1 => 9,
        2 => 5,
        _ => 3,
    }
}

fn mode_of(c: &CheckSpec) -> HMode {
    match c.mode.unwrap_or(ModeName::General) {
        ModeName::General => HMode::General,
        ModeName::ConjugateSymmetric => HMode::ConjugateSymmetric,
        ModeName::Hessian => HMode::Hessian,
        ModeName::Chc => HMode::Chc(c.c.expect("validated")),
        ModeName::ChcConjugate => HMode::ChcConjugate(c.c.expect("validated")),
    }
}

/// Relative gap against `max(|a|, |b|, 1)`.
pub fn gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

impl Prepared {
    /// Runs the checks in declared order.
    pub fn run(&self, config: serde_json::Value) -> Report {
        let mut report = Report::new(self.seed, config);
        for c in &self.checks {
            let mut rec = CheckRecord::new(c.name(), c.kind.as_str());
            let start = Instant::now();
            if let Err(e) = self.check(c, &mut rec) {
                rec.fail(format!("error: {e}"));
            }
            rec.seconds = start.elapsed().as_secs_f64();
            report.checks.push(rec);
        }
        report
    }

    fn sample_chart(&self, c: &CheckSpec) -> (&ChartModel, Vec<Vec<f64>>) {
        let side = c.on.unwrap_or(self.subject.default_side());
        let chart = self.subject.chart(side);
        let region = match side {
            Side::Source => &self.omega,
            Side::Target => chart.domain(),
        };
        let n = c.grid.unwrap_or(default_grid(chart.dim()));
        (chart, region.grid(n))
    }

    fn check(&self, c: &CheckSpec, rec: &mut CheckRecord) -> statvar_core::Result<()> {
        match c.kind {
            CheckKind::Classify => self.classify(c, rec),
            CheckKind::Codazzi => {
                let (chart, grid) = self.sample_chart(c);
                rec.tolerance = Some(self.tol.codazzi);
                let mut worst = 0.0f64;
                for x in &grid {
                    worst = worst.max(chart.codazzi_residual(x)?);
                }
                rec.measure("codazzi_residual", worst);
                rec.measure("points", grid.len() as f64);
                if !(worst < self.tol.codazzi) {
                    rec.fail("Codazzi equation does not hold");
                }
                Ok(())
            }
            CheckKind::Biharmonicity => {
                let u = self.subject.map().expect("validated");
                let n = c.grid.unwrap_or(default_grid(u.source().dim()));
                rec.tolerance = Some(self.tol.biharmonicity);
                let r = biharmonicity_residual(u, &self.omega, n)?;
                rec.measure("max_bitension", r);
                let is = r < self.tol.biharmonicity;
                match c.expect.biharmonic.unwrap_or(true) {
                    true if !is => rec.fail("bi-tension does not vanish"),
                    false if is => rec.fail("expected a non-biharmonic map"),
                    _ => {}
                }
                Ok(())
            }
            CheckKind::FirstVariation => {
                let fam = self.family();
                let v = fam.variation_field()?;
                let formula = first_variation(fam.base(), &v, &self.omega, &self.quad)?;
                let fd = fd_energy_derivatives(fam, &self.omega, &self.quad, 1)?;
                self.compare(rec, formula, fd);
                Ok(())
            }
            CheckKind::SecondVariation => {
                let fam = self.family();
                let v = fam.variation_field()?;
                let sv = second_variation(fam.base(), &v, &self.omega, &self.quad, mode_of(c))?;
                rec.measure("value", sv.value);
                rec.measure("jacobi", sv.jacobi);
                rec.measure("curvature", sv.curvature);
                rec.push_note(format!("mode {}", mode_of(c).label()));
                if let Some(Warning::BiharmonicityViolation { residual }) = sv.warning {
                    rec.measure("max_bitension", residual);
                    rec.warn("the base map is not biharmonic on omega");
                }
                Ok(())
            }
            CheckKind::OracleCompare => {
                let fam = self.family();
                let v = fam.variation_field()?;
                let sv = second_variation(fam.base(), &v, &self.omega, &self.quad, mode_of(c))?;
                let fd = fd_energy_derivatives(fam, &self.omega, &self.quad, 2)?;
                self.compare(rec, sv.value, fd);
                if sv.warning.is_some() {
                    rec.warn("the base map is not biharmonic on omega");
                }
                Ok(())
            }
            CheckKind::StabilityProbe => self.stability(c, rec),
        }
    }

    fn family(&self) -> &VariationFamily {
        match &self.subject {
            Subject::Family(f) => f,
            _ => unreachable!("validated"),
        }
    }

    fn compare(&self, rec: &mut CheckRecord, formula: f64, fd: f64) {
        let g = gap(formula, fd);
        rec.tolerance = Some(self.tol.oracle);
        rec.measure("formula", formula);
        rec.measure("finite_difference", fd);
        rec.measure("gap", g);
        if !(g <= self.tol.oracle) {
            rec.fail("formula and finite-difference oracle disagree");
        }
    }

    fn classify(&self, c: &CheckSpec, rec: &mut CheckRecord) -> statvar_core::Result<()> {
        let (chart, grid) = self.sample_chart(c);
        let tol = self.tol.classification;
        rec.tolerance = Some(tol);
        let r = chart.classify(&grid, tol)?;
        rec.measure("points", r.points as f64);
        rec.measure("codazzi_residual", r.codazzi_residual);
        rec.measure("conjugate_symmetric_residual", r.conjugate_symmetric_residual);
        rec.measure("hessian_residual", r.hessian_residual);
        rec.measure("sectional", r.sectional.value);
        rec.measure("sectional_residual", r.sectional.residual);
        rec.measure("chc", r.chc.value);
        rec.measure("chc_residual", r.chc.residual);
        rec.measure("metric_sectional", r.metric_sectional.value);
        rec.measure("metric_sectional_residual", r.metric_sectional.residual);

        let statistical = r.codazzi_residual < self.tol.codazzi;
        let mut labels = Vec::new();
        if statistical {
            labels.push("statistical".to_string());
        }
        if r.conjugate_symmetric {
            labels.push("conjugate_symmetric".into());
        }
        if r.constant_sectional {
            labels.push(format!("constant_sectional({:.6})", r.sectional.value));
        }
        if r.hessian {
            labels.push("hessian".into());
        }
        if r.is_chc {
            labels.push(format!("chc({:.6})", r.chc.value));
        }
        rec.push_note(format!("{}: {}", chart.name(), labels.join(", ")));
        if !statistical {
            rec.fail("Codazzi equation does not hold");
        }

        let e = &c.expect;
        for s in e.structure.iter().flatten() {
            let (ok, name) = match s {
                Structure::Statistical => (statistical, "statistical"),
                Structure::ConjugateSymmetric => (r.conjugate_symmetric, "conjugate_symmetric"),
                Structure::ConstantSectional => (r.constant_sectional, "constant_sectional"),
                Structure::Hessian => (r.hessian, "hessian"),
                Structure::Chc => (r.is_chc, "chc"),
            };
            if !ok {
                rec.fail(format!("expected `{name}`"));
            }
        }
        let fits = [
            ("chc", e.chc, r.chc, r.hessian),
            ("sectional", e.sectional, r.sectional, true),
            ("metric_sectional", e.metric_sectional, r.metric_sectional, true),
        ];
        for (name, want, fit, precondition) in fits {
            let Some(want) = want else { continue };
            rec.measure(&format!("{name}_expected"), want);
            if !precondition {
                rec.fail(format!("{name} needs a Hessian structure"));
            } else if !((fit.value - want).abs() <= tol && fit.residual < tol) {
                rec.fail(format!("{name} = {:.9} (residual {:.3e}), expected {want}", fit.value, fit.residual));
            }
        }
        Ok(())
    }

    fn stability(&self, c: &CheckSpec, rec: &mut CheckRecord) -> statvar_core::Result<()> {
        let u = self.subject.map().expect("validated");
        let profile = match c.profile {
            Some(Profile::Mollifier) => BumpProfile::Mollifier,
            Some(Profile::PolyWindow) => BumpProfile::PolyWindow,
            None if u.source().dim() == 1 => BumpProfile::Mollifier,
            None => BumpProfile::PolyWindow,
        };
        let mut probes = random_probes(u, &self.omega, c.probes.unwrap_or(20), self.seed, profile)?;
        if !c.exponents.is_empty() {
            probes.extend(kernel_probes(u, &self.omega, &c.exponents)?);
        }
        let mode = mode_of(c);
        let verdict = stability_verdict(u, &self.omega, &probes, &self.quad, mode)?;
        let negatives = verdict.values.iter().filter(|v| **v < 0.0).count();
        rec.measure("probes", probes.len() as f64);
        rec.measure("min_value", verdict.min_value);
        rec.measure("negative_probes", negatives as f64);
        rec.push_note(format!("mode {}", mode.label()));
        let found = verdict.negative_found();
        match c.expect.stable.unwrap_or(true) {
            true if found => rec.fail("a probe has negative second variation; the map is unstable"),
            false if !found => rec.fail("expected a negative probe, none found"),
            true => rec.push_note("no negative probe found; this does not prove stability"),
            false => {}
        }
        let n = default_grid(u.source().dim());
        let r = biharmonicity_residual(u, &self.omega, n)?;
        if r >= self.tol.biharmonicity {
            rec.measure("max_bitension", r);
            rec.warn("the map is not biharmonic on omega");
        }
        Ok(())
    }
}

/// Loads, validates and runs a scenario file.
pub fn run_file(path: &Path) -> Result<Report, ConfigError> {
    let (scenario, raw) = Scenario::load(path)?;
    let prepared = prepare(&scenario)?;
    let echo = serde_json::to_value(&raw).expect("TOML tables serialize");
    Ok(prepared.run(echo))
}

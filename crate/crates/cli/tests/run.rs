use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn statvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_statvar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn machine(path: &str) -> (Output, Value) {
    let out = statvar(&["run", path, "--format", "machine"]);
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (out, v)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn normal_distributions_classify_finds_chc_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "nd.toml",
        r#"
        checks = [{ kind = "classify", expect = { structure = ["hessian", "chc"], chc = 2.0 } }]
        [chart]
        catalog = "normal_distributions"
        "#,
    );
    let (out, v) = machine(&cfg);
    assert!(out.status.success());
    let c = &v["checks"][0];
    assert_eq!(c["status"], "pass");
    assert_eq!(c["tolerance"], 1e-6);
    assert!((c["measured"]["chc"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    for key in ["name", "status", "measured", "tolerance", "seconds"] {
        assert!(c.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["toolkit"], "statvar");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["chart"]["catalog"], "normal_distributions");
}

#[test]
fn wrong_expectation_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "nd.toml",
        "checks = [{ kind = \"classify\", expect = { chc = 1.0 } }]\n[chart]\ncatalog = \"normal_distributions\"\n",
    );
    let (out, v) = machine(&cfg);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(v["checks"][0]["status"], "fail");
}

#[test]
fn parabola_curve_is_biharmonic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.toml",
        "checks = [\"biharmonicity\"]\n[map]\ncatalog = \"parabola_curve\"\n",
    );
    let (out, v) = machine(&cfg);
    assert!(out.status.success());
    let c = &v["checks"][0];
    assert_eq!(c["status"], "pass");
    assert!(c["measured"]["max_bitension"].as_f64().unwrap() < 1e-5);
}

#[test]
fn non_biharmonic_control_fails_unless_expected() {
    let dir = tempfile::tempdir().unwrap();
    let body = "[map]\ncatalog = \"parabola_perturbed\"\n";
    let plain = write(dir.path(), "a.toml", &format!("checks = [\"biharmonicity\"]\n{body}"));
    let (out, v) = machine(&plain);
    assert_eq!(out.status.code(), Some(1));
    assert!(v["checks"][0]["measured"]["max_bitension"].as_f64().unwrap() > 1e-2);
    let expected = write(
        dir.path(),
        "b.toml",
        &format!("checks = [{{ kind = \"biharmonicity\", expect = {{ biharmonic = false }} }}]\n{body}"),
    );
    assert!(statvar(&["run", &expected]).status.success());
}

#[test]
fn empty_check_list_gives_an_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "e.toml", "checks = []\n[chart]\ncatalog = \"euclidean\"\n");
    let (out, v) = machine(&cfg);
    assert!(out.status.success());
    assert_eq!(v["checks"].as_array().unwrap().len(), 0);
}

const VARIATION: &str = r#"
seed = 11
checks = [
  "first_variation",
  { kind = "oracle_compare", mode = "conjugate_symmetric" },
  { kind = "stability_probe", probes = 3, exponents = [2.0] },
]
[family]
catalog = "parabola_bump"
[quadrature]
order = 16
panels = 16
"#;

#[test]
fn machine_report_is_deterministic_apart_from_runtimes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", VARIATION);
    let strip = |o: Output| -> String {
        assert!(o.status.success(), "{}", stderr(&o));
        String::from_utf8(o.stdout)
            .unwrap()
            .lines()
            .filter(|l| !l.trim_start().starts_with("\"seconds\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = strip(statvar(&["run", &cfg, "--format", "machine"]));
    let b = strip(statvar(&["run", &cfg, "--format", "machine"]));
    assert_eq!(a, b);
    assert!(a.contains("\"oracle_compare\""));
    assert!(a.contains("\"negative_probes\": 0.0"));
}

#[test]
fn variation_checks_pass_on_a_biharmonic_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", VARIATION);
    let (out, v) = machine(&cfg);
    assert!(out.status.success(), "{}", stderr(&out));
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    let oc = &checks[1];
    assert_eq!(oc["status"], "pass");
    assert!(oc["measured"]["gap"].as_f64().unwrap() < 1e-3);
    assert!(oc["measured"]["formula"].as_f64().unwrap() > 0.0);
    assert_eq!(checks[2]["measured"]["probes"], 5.0);
}

#[test]
fn out_flag_writes_human_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "checks = [\"codazzi\"]\n[chart]\ncatalog = \"positive_orthant\"\n");
    let target = dir.path().join("report.txt");
    let out = statvar(&["run", &cfg, "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.contains("[PASS] codazzi"), "{text}");
    assert!(text.contains("1 checks: 1 pass, 0 warn, 0 fail"));
}

#[test]
fn config_errors_carry_locations() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("seed = 1\nchecks = [\"codazi\"]\n[chart]\ncatalog = \"euclidean\"\n", "line 2"),
        ("[chart]\ncatalog = \"nope\"\n", "chart.catalog: unknown entry `nope`"),
        ("[chart]\ncatalog = \"euclidean\"\nparams = { q = 1.0 }\n", "chart.params"),
        ("checks = [\"first_variation\"]\n[chart]\ncatalog = \"euclidean\"\n", "checks[0]"),
        ("[chart]\ncatalog = \"euclidean\"\n[map]\ncatalog = \"line\"\n", "map: only one subject"),
        ("checks = []\n", "no subject"),
        ("[tolerances]\noracle = 0.0\n[chart]\ncatalog = \"euclidean\"\n", "tolerances.oracle"),
        (
            "[chart]\ndomain = { lower = [0.0], upper = [1.0] }\nmetric = [[\"1 + * x1\"]]\n",
            "chart.metric[0][0]: at byte 4",
        ),
        ("omega = { lower = [-3.0, 0.0], upper = [0.0, 1.0] }\n[chart]\ncatalog = \"euclidean\"\n", "omega"),
        (
            "checks = [{ kind = \"codazzi\", expect = { chc = 1.0 } }]\n[chart]\ncatalog = \"euclidean\"\n",
            "checks[0].expect.chc: not an option",
        ),
        (
            "checks = [{ kind = \"oracle_compare\", mode = \"chc\" }]\n[family]\ncatalog = \"line_bump\"\n",
            "checks[0].c",
        ),
    ];
    for (i, (text, want)) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("bad{i}.toml"), text);
        let out = statvar(&["run", &cfg]);
        assert_eq!(out.status.code(), Some(2), "case {i}");
        let err = stderr(&out);
        assert!(err.contains(want), "case {i}: {err}");
    }
    let missing = statvar(&["run", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("cannot read"));
}

#[test]
fn inline_family_matches_its_catalog_twin() {
    let dir = tempfile::tempdir().unwrap();
    let inline = write(
        dir.path(),
        "inline.toml",
        r#"
        checks = ["oracle_compare"]
        [family]
        support = { lower = [-0.6], upper = [0.6] }
        section = ["1", "-0.5"]
        [family.base]
        components = ["0 + 1*x1", "0 + 0.5*x1"]
        [family.base.source]
        domain = { lower = [-1.0], upper = [1.0] }
        metric = [["1"]]
        [family.base.target]
        domain = { lower = [-4.0, -4.0], upper = [4.0, 4.0] }
        metric = [["1", "0"], ["0", "1"]]
        "#,
    );
    let twin = write(dir.path(), "twin.toml", "checks = [\"oracle_compare\"]\n[family]\ncatalog = \"line_bump\"\n");
    let (a, va) = machine(&inline);
    let (b, vb) = machine(&twin);
    assert!(a.status.success() && b.status.success(), "{}", stderr(&a));
    let f = |v: &Value| v["checks"][0]["measured"]["formula"].as_f64().unwrap();
    assert!((f(&va) - f(&vb)).abs() < 1e-9 * f(&vb).abs(), "{} vs {}", f(&va), f(&vb));
}

#[test]
fn roots_and_list() {
    let out = statvar(&["roots", "4", "-12"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let r: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
    let s = 57f64.sqrt();
    assert!((r[0] - (-3.0 + s) / 2.0).abs() < 1e-12);
    assert!((r[1] - (-3.0 - s) / 2.0).abs() < 1e-12);
    assert_eq!(statvar(&["roots", "0", "5"]).status.code(), Some(2));

    let out = statvar(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["normal_distributions", "parabola_curve", "paraboloid", "exp_curve_bump"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn shipped_scenarios_pass() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = statvar(&["run", path.to_str().unwrap()]);
            assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stdout));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dmu_core::cli::Report;
use tempfile::TempDir;

fn dmu(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmu"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("dmu runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Fixture {
            dir: tempfile::tempdir().unwrap(),
        };
        f.write("delta1.json", r#"{"atoms":[{"angle":0,"mass":1}]}"#);
        f.write(
            "two.json",
            r#"{"atoms":[{"angle":0,"mass":1},{"angle":3.141592653589793,"mass":0.5}]}"#,
        );
        f.write("z.json", "[[0,0],[1,0]]");
        f.write("z3.json", "[[0,0],[0,0],[0,0],[1,0]]");
        f.write("ray.json", r#"{"family":"radial_power","alpha":0.5,"theta":0}"#);
        f.write("area.json", r#"{"family":"area","scale":1}"#);
        f
    }

    fn write(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        dmu(args, self.dir.path())
    }

    fn json(&self, args: &[&str]) -> (String, Report) {
        let mut a = args.to_vec();
        a.extend(["--format", "json"]);
        let o = self.run(&a);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let s = stdout(&o);
        let r: Report = serde_json::from_str(&s).expect("report re-parses");
        (s, r)
    }
}

#[test]
fn norm_of_z_at_delta_one() {
    let fx = Fixture::new();
    let o = fx.run(&["norm", "--mu", "delta1.json", "--f", "z.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "norm_sq = 2"), "{}", stdout(&o));
    match fx.json(&["norm", "--mu", "delta1.json", "--f", "z.json"]).1 {
        Report::Norm(r) => {
            assert_eq!(r.norm_sq, 2.0);
            assert_eq!(r.h2_norm_sq, 1.0);
            assert_eq!(r.dirichlet, 1.0);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn decompose_z_cubed() {
    let fx = Fixture::new();
    let o = fx.run(&["decompose", "--mu", "delta1.json", "--f", "z3.json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("p = [1]\n") && text.contains("g = [1, 1, 1]\n"), "{text}");
    match fx.json(&["decompose", "--mu", "delta1.json", "--f", "z3.json"]).1 {
        Report::Decompose(r) => {
            let re = |p: &dmu_core::Poly| p.coeffs().iter().map(|c| c.re).collect::<Vec<_>>();
            assert_eq!(re(&r.p), vec![1.0]);
            assert_eq!(re(&r.g), vec![1.0, 1.0, 1.0]);
            assert_eq!(r.reconstruction_error, 0.0);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn every_report_round_trips() {
    let fx = Fixture::new();
    let jobs: &[&[&str]] = &[
        &["norm", "--mu", "two.json", "--f", "z3.json", "--area-tol", "1e-8"],
        &["decompose", "--mu", "two.json", "--f", "z3.json"],
        &["gram", "--mu", "two.json", "--degree", "5", "--compare-direct"],
        &["kernel-eval", "--mu", "delta1.json", "--w", "0.3,-0.2", "--grid", "3"],
        &["kernel-eval", "--mu", "two.json", "--w", "0.3,-0.2", "--z", "-0.5,0.1"],
        &["kernel-eval", "--dirichlet-alpha", "0", "--w", "0.3", "--z", "0.1,0.1"],
        &["carleson", "--nu", "ray.json", "--n-directions", "16", "--k-max", "10"],
        &["carleson", "--nu", "ray.json", "--mu", "delta1.json", "--n-directions", "16"],
        &["alpha-carleson", "--nu", "area.json", "--alpha", "0.5", "--n-directions", "16"],
        &["rkt", "--nu", "ray.json", "--mu", "delta1.json", "--n-directions", "16", "--k-max", "8"],
        &["rkt", "--nu", "area.json", "--mu", "two.json", "--n-directions", "8", "--k-max", "3"],
        &["compactness", "--nu", "area.json", "--mu", "delta1.json", "--zeta", "-1.5707963", "--k-max", "6"],
        &["verify", "--only", "hardy."],
    ];
    for args in jobs {
        let (s, r) = fx.json(args);
        let again = serde_json::to_string_pretty(&r).unwrap() + "\n";
        assert_eq!(s, again, "{args:?}");
    }
}

#[test]
fn json_reports_are_deterministic() {
    let fx = Fixture::new();
    for args in [
        &["verify", "--only", "kernels.reproducing", "--seed", "7"][..],
        &["rkt", "--nu", "area.json", "--mu", "two.json", "--n-directions", "8", "--k-max", "3"],
    ] {
        let a = fx.json(args).0;
        let b = fx.json(args).0;
        assert_eq!(a, b, "{args:?}");
    }
    let a = fx.json(&["verify", "--only", "kernels.reproducing", "--seed", "7"]).0;
    let b = fx.json(&["verify", "--only", "kernels.reproducing", "--seed", "8"]).0;
    assert_ne!(a, b);
    assert!(a.contains("\"seed\": 7"));
}

#[test]
fn scans_emit_csv() {
    let fx = Fixture::new();
    let o = fx.run(&[
        "carleson", "--nu", "ray.json", "--n-directions", "16", "--k-max", "6", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("level,h,sup_ratio"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], (i + 1) as f64);
        assert_eq!(r[1], 0.5f64.powi(i as i32 + 1));
        // ν(S(1,h))/h = 2 h^{-1/2}.
        assert!((r[2] - 2.0 / r[1].sqrt()).abs() < 1e-12 * r[2]);
    }
}

#[test]
fn input_errors_exit_2() {
    let fx = Fixture::new();
    fx.write("bad.json", "{not json");
    fx.write("extra.json", r#"{"atoms":[{"angle":0,"mass":1,"colour":"red"}]}"#);
    fx.write("negative.json", r#"{"atoms":[{"angle":0,"mass":-1}]}"#);
    fx.write("job_bad.json", r#"{"command":"norm","mu":"delta1.json","f":"z.json","verbose":true}"#);
    let cases: &[&[&str]] = &[
        &["norm", "--mu", "missing.json", "--f", "z.json"],
        &["norm", "--mu", "bad.json", "--f", "z.json"],
        &["norm", "--mu", "extra.json", "--f", "z.json"],
        &["norm", "--mu", "negative.json", "--f", "z.json"],
        &["norm", "--mu", "delta1.json"],
        &["kernel-eval", "--mu", "delta1.json", "--w", "1.2,0"],
        &["kernel-eval", "--mu", "delta1.json", "--w", "zero"],
        &["carleson", "--nu", "ray.json", "--rho", "0.5"],
        &["compactness", "--nu", "area.json", "--mu", "delta1.json", "--zeta", "0"],
        &["rkt", "--nu", "area.json", "--mu", "two.json", "--degree", "100000"],
        &["run", "--job", "job_bad.json"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = fx.run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(!stderr(&o).trim().is_empty(), "{args:?}");
    }
    let o = fx.run(&["compactness", "--nu", "area.json", "--mu", "delta1.json", "--zeta", "0"]);
    assert!(stderr(&o).contains("angle 0"), "{}", stderr(&o));
}

#[test]
fn non_convergence_exits_3() {
    let fx = Fixture::new();
    fx.write("wiggle.json", "[[0.1,0],[0.3,0.2],[-0.7,0.1],[0.2,0.5],[0.9,-0.4],[0.3,0.3],[-0.2,0.8]]");
    let o = fx.run(&["norm", "--mu", "two.json", "--f", "wiggle.json", "--area-tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("did not converge"), "{}", stderr(&o));
}

#[test]
fn job_files_run_like_flags() {
    let fx = Fixture::new();
    fx.write(
        "job.json",
        r#"{"command":"gram","format":"json","mu":"two.json","params":{"degree":4}}"#,
    );
    let o = fx.run(&["run", "--job", "job.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let flags = fx.json(&["gram", "--mu", "two.json", "--degree", "4"]).0;
    assert_eq!(stdout(&o), flags);
}

#[test]
fn tightened_tolerance_fails_without_panicking() {
    let fx = Fixture::new();
    let o = fx.run(&["verify", "--only", "dirichlet.fubini", "--tolerance-scale", "1e-6"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("FAIL dirichlet.fubini"), "{text}");
    assert!(text.contains("0/1 passed"));
}

#[test]
fn full_verify_suite_passes() {
    let fx = Fixture::new();
    let o = fx.run(&["verify"]);
    let text = stdout(&o);
    print!("{text}");
    assert_eq!(o.status.code(), Some(0), "{text}");
    let n = dmu_core::verify::property_names().len();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), n);
    assert!(text.contains(&format!("{n}/{n} passed")));
}

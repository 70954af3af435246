use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Sandbox {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn probs(&self, name: &str, v: &[f64]) -> PathBuf {
        let list: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        self.file(name, &format!("{{\"probs\": [{}]}}", list.join(", ")))
    }

    fn run(&self, args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_catalysis"))
            .args(args.iter().map(|a| a.as_ref()))
            .current_dir(self.dir.path())
            .env_remove("CATALYSIS_OUT_DIR")
            .output()
            .unwrap()
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

/// Data rows of a versioned CSV, split on commas.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    (header, rows)
}

#[test]
fn rates_report_for_the_three_level_example() {
    let s = Sandbox::new();
    let p = s.probs("p.json", &[0.84, 0.10, 0.06]);
    let q = s.probs("q.json", &[0.79, 0.19, 0.02]);
    let v = json(&s.run(&[&"rates", &p, &q, &"--eps", &"0.03"]));
    assert!((num(&v["rate"]) - 1.0665).abs() < 2e-3);
    assert!((num(&v["nu"]) - 1.27855).abs() < 1e-4);
    assert_eq!(v["theory"], "athermality");
    assert_eq!(v["approximation"], "two-term");
    assert_eq!(v["display"]["unit"], "bits");
    assert!(v["n_eps"].as_u64().unwrap() >= 1);
    let suff = v["sufficiency"].as_array().unwrap();
    assert!(suff.len() >= 10);
    for row in suff {
        assert!(row["verdict"] == "sufficient" || row["verdict"] == "not_implied");
    }
    // display base changes the display block only
    let e = json(&s.run(&[&"rates", &p, &q, &"--eps", &"0.03", &"--base", &"e"]));
    assert_eq!(v["rate"], e["rate"]);
    assert_eq!(v["source_quantifier"], e["source_quantifier"]);
    assert_ne!(v["display"], e["display"]);
}

#[test]
fn rates_for_identical_states_has_a_diagnostic() {
    let s = Sandbox::new();
    let p = s.probs("p.json", &[0.84, 0.10, 0.06]);
    let v = json(&s.run(&[&"rates", &p, &p]));
    assert_eq!(num(&v["rate"]), 1.0);
    assert!(v["n_eps"].is_null());
    assert!(v["diagnostic"]
        .as_str()
        .unwrap()
        .contains("no finite copy number"));
}

#[test]
fn input_errors_exit_two_with_the_path() {
    let s = Sandbox::new();
    let q = s.probs("q.json", &[0.5, 0.5]);
    let o = s.run(&[&"rates", &"missing.json", &q]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
    let bad = s.file("bad.json", r#"{"probs": [0.7, 0.7]}"#);
    let o = s.run(&[&"rates", &bad, &q]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.json"));
    let o = s.run(&[&"rates", &q, &q, &"--theory", &"magic"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn undefined_rate_exits_three() {
    let s = Sandbox::new();
    let p = s.probs("p.json", &[0.7, 0.3]);
    let u = s.probs("u.json", &[0.5, 0.5]);
    let o = s.run(&[&"rates", &p, &u]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn error_vs_size_csv() {
    let s = Sandbox::new();
    let p = s.probs("p.json", &[0.84, 0.10, 0.06]);
    let q = s.probs("q.json", &[0.79, 0.19, 0.02]);
    let o = s.run(&[
        &"error-vs-size",
        &p,
        &q,
        &"--n-max",
        &"4",
        &"--svg",
        &"plot.svg",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("#format=error-vs-size/1\n"));
    let (header, rows) = csv_rows(&text);
    assert_eq!(
        header,
        [
            "n",
            "d_C_exact",
            "log_dC_bits",
            "chi_err",
            "system_err",
            "joint_err",
            "marginal_exactness",
            "predicted_eps",
            "status"
        ]
    );
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[2][1], "27");
    assert!((rows[0][4].parse::<f64>().unwrap() - 0.04).abs() < 1e-12);
    // 17 significant digits
    let mantissa = rows[1][4].split('e').next().unwrap().replace('.', "");
    assert_eq!(mantissa.len(), 17);
    let svg = std::fs::read_to_string(s.path().join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn error_vs_size_when_no_catalyst_is_needed() {
    let s = Sandbox::new();
    let p = s.probs("p.json", &[0.9, 0.05, 0.05]);
    let q = s.probs("q.json", &[0.5, 0.3, 0.2]);
    let (_, rows) = csv_rows(&stdout(&s.run(&[&"error-vs-size", &p, &q])));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "1");
    assert_eq!(rows[0][4].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn error_vs_size_marks_oversized_rows() {
    let s = Sandbox::new();
    // 16 levels: 4 copies fit under the size cap, 5 do not
    let mut p = vec![0.5];
    p.extend([0.5 / 15.0; 15]);
    let mut q = vec![0.55, 0.3];
    q.extend([0.15 / 14.0; 14]);
    let (p, q) = (s.probs("p.json", &p), s.probs("q.json", &q));
    let o = s.run(&[&"error-vs-size", &p, &q, &"--n-min", &"4", &"--n-max", &"5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][8], "ok");
    assert_eq!(rows[1][8], "skipped");
    assert_eq!(rows[1][4], "");
}

#[test]
fn error_vs_size_rejects_finite_temperature() {
    let s = Sandbox::new();
    let p = s.probs("p.json", &[0.84, 0.10, 0.06]);
    let q = s.probs("q.json", &[0.79, 0.19, 0.02]);
    let g = s.file("g.json", r#"{"energies": [0, 1, 2], "beta": 1}"#);
    let o = s.run(&[&"error-vs-size", &p, &q, &"--gamma", &g]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn resonance_from_config_and_out_dir() {
    let s = Sandbox::new();
    let conf = s.file(
        "sweep.conf",
        "theory = entanglement\nh_ini = 0.9\nh_fin = 0.8\nsamples = 10\nseed = 3\nn_max = 4\nout = res.csv\n",
    );
    let out_dir = s.path().join("results");
    let o = Command::new(env!("CARGO_BIN_EXE_catalysis"))
        .args(["resonance", "--config"])
        .arg(&conf)
        .env("CATALYSIS_OUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out_dir.join("res.csv")).unwrap();
    assert!(text.starts_with("#format=resonance/1\n"));
    assert!(text.contains("#seed=3\n"));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header[0], "index");
    assert_eq!(header[4], "entropy_bits");
    assert_eq!(rows.len(), 10);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], i.to_string());
        assert!((r[4].parse::<f64>().unwrap() - 0.9).abs() < 1e-9);
    }
}

#[test]
fn resonance_with_source_equal_to_target() {
    let s = Sandbox::new();
    let conf = s.file(
        "eq.conf",
        "theory = entanglement\nsource = 0.7, 0.2, 0.1\ntarget = 0.7, 0.2, 0.1\n",
    );
    let (_, rows) = csv_rows(&stdout(&s.run(&[&"resonance", &"--config", &conf])));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][7], "1");
    assert_eq!(rows[0][9], "true");
}

#[test]
fn resonance_input_problems() {
    let s = Sandbox::new();
    // entropy above ln 3 (in bits: log2 3 ≈ 1.585)
    let o = s.run(&[
        &"resonance",
        &"--h-ini",
        &"1.7",
        &"--h-fin",
        &"0.8",
        &"--seed",
        &"1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    // sampling without a seed
    let o = s.run(&[&"resonance", &"--h-ini", &"0.9", &"--h-fin", &"0.8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn seeded_resonance_is_reproducible() {
    let s = Sandbox::new();
    let args: [&dyn AsRef<std::ffi::OsStr>; 9] = [
        &"resonance",
        &"--h-ini",
        &"0.9",
        &"--h-fin",
        &"0.8",
        &"--seed",
        &"5",
        &"--samples",
        &"12",
    ];
    let a = s.run(&args);
    let b = s.run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut other = args;
    other[6] = &"6";
    assert_ne!(a.stdout, s.run(&other).stdout);
}

fn bell_json() -> &'static str {
    r#"{"dims": [2, 2], "re": [[0.5,0,0,0.5],[0,0,0,0],[0,0,0,0],[0.5,0,0,0.5]]}"#
}

#[test]
fn locc_mixed_checks() {
    let s = Sandbox::new();
    let bell = s.file("bell.json", bell_json());
    let sep = s.file(
        "sep.json",
        r#"{"dims": [2, 2], "re": [[0.5,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0.5]]}"#,
    );
    let v = json(&s.run(&[&"check", &"locc-mixed", &bell, &sep]));
    assert_eq!(v["verdict"], "sufficient");
    assert_eq!(v["check"], "locc-mixed");
    let v = json(&s.run(&[&"check", &"locc-mixed", &bell, &bell]));
    assert_eq!(v["verdict"], "boundary");
    let mixed = s.file(
        "mm.json",
        r#"{"dims": [2, 2], "re": [[0.25,0,0,0],[0,0.25,0,0],[0,0,0.25,0],[0,0,0,0.25]]}"#,
    );
    let v = json(&s.run(&[&"check", &"locc-mixed", &mixed, &bell]));
    assert_eq!(v["verdict"], "not_implied");
    // Werner state at visibility 0.9: concurrence 0.85
    let a = 0.9 / 2.0 + 0.025;
    let werner = s.file(
        "w.json",
        &format!(r#"{{"dims": [2, 2], "re": [[{a},0,0,0.45],[0,0.025,0,0],[0,0,0.025,0],[0.45,0,0,{a}]]}}"#),
    );
    let v = json(&s.run(&[&"check", &"locc-mixed", &bell, &werner, &"--base", &"e"]));
    let c: f64 = 0.85;
    let x = (1.0 + (1.0 - c * c).sqrt()) / 2.0;
    let ef = -x * x.ln() - (1.0 - x) * (1.0 - x).ln();
    assert!((num(&v["target_entanglement"]) - ef).abs() < 1e-9);
    assert_eq!(v["verdict"], "sufficient");
    let v = json(&s.run(&[&"check", &"locc-mixed", &mixed, &"--e-sigma", &"0.1"]));
    assert_eq!(v["verdict"], "not_implied");
}

#[test]
fn multicopy_checks() {
    let s = Sandbox::new();
    let p = s.probs("p.json", &[0.6, 0.25, 0.15]);
    let v = json(&s.run(&[&"check", &"multicopy", &p, &p]));
    assert_eq!(v["verdict"], "violated");
    assert_eq!(v["renyi"].as_array().unwrap().len(), 4);
    let q = s.probs("q.json", &[0.7, 0.3, 0.0]);
    let v = json(&s.run(&[&"check", &"multicopy", &p, &q]));
    assert_eq!(v["verdict"], "satisfied");
}

#[test]
fn protocol_run_and_size_cap() {
    let s = Sandbox::new();
    let p = s.probs("p.json", &[0.84, 0.10, 0.06]);
    let q = s.probs("q.json", &[0.79, 0.19, 0.02]);
    let v = json(&s.run(&[&"protocol", &"run", &p, &q, &"--n", &"3"]));
    assert_eq!(v["n"], 3);
    assert_eq!(v["d_c"], 27);
    assert_eq!(v["feasible"], true);
    assert_eq!(v["direction"], "bistochastic");
    assert!(num(&v["marginal_exactness"]) <= 1e-12);
    let v = json(&s.run(&[
        &"protocol",
        &"run",
        &p,
        &q,
        &"--n",
        &"2",
        &"--theory",
        &"entanglement",
    ]));
    assert_eq!(v["direction"], "locc");
    let big: Vec<f64> = vec![0.125; 8];
    let b = s.probs("b.json", &big);
    let o = s.run(&[&"protocol", &"run", &b, &b, &"--n", &"8"]);
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

//! Acceptance criteria A1–A8. Runs without the test harness so that the
//! PASS/FAIL lines are always printed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use catalysis::catalyst::run_protocol_directed;
use catalysis::io::to_json_string;
use catalysis::majorization::{lp_oracle_directed, optimal_chi_directed, Direction};
use catalysis::normal::{inv_normal_cdf, normal_cdf};
use catalysis::qstates::{
    corollary1_check, partial_trace, von_neumann_entropy, Corollary1Verdict, DensityMatrix,
    Subsystem, TargetEntanglement,
};
use catalysis::second_order::{
    n_epsilon, predicted_error, rates, sesqui_normal, sufficiency_check, TheoryKind,
};
use catalysis::{GibbsSpec, ProbVec};
use catalysis_cli::commands::{cmd_error_vs_size, cmd_resonance_sweep};
use catalysis_cli::config::{StateSource, SweepConfig, TheoryName};
use catalysis_cli::sampling::CONTOUR_TOLERANCE;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

type Outcome = Result<String, String>;

/// Rounding allowance on the error bounds, the same as the exactness tolerance.
const SLACK: f64 = 1e-12;

fn dirichlet(rng: &mut ChaCha8Rng, d: usize) -> ProbVec {
    let raw: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = raw.iter().sum();
    ProbVec::new(raw.iter().map(|x| x / s).collect()).unwrap()
}

fn pv(v: &[f64]) -> ProbVec {
    ProbVec::new(v.to_vec()).unwrap()
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    if elapsed <= Duration::from_secs(limit_s) {
        Ok(())
    } else {
        Err(format!(
            "runtime {:.1} s exceeds {limit_s} s",
            elapsed.as_secs_f64()
        ))
    }
}

fn a1_oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let d = 2 + i % 3;
        let (p, q) = (dirichlet(&mut rng, d), dirichlet(&mut rng, d));
        for dir in [Direction::Bistochastic, Direction::Locc] {
            let (_, err) = optimal_chi_directed(&p, &q, dir);
            let lp = lp_oracle_directed(&p, &q, dir).map_err(|e| e.to_string())?;
            worst = worst.max((err - lp).abs());
            if (err - lp).abs() > 1e-9 {
                return Err(format!("pair {i} ({dir:?}): closed form {err} vs LP {lp}"));
            }
        }
    }
    within(t.elapsed(), 30)?;
    Ok(format!(
        "500 pairs x 2 directions, max |diff| = {worst:.1e}, {:.2} s",
        t.elapsed().as_secs_f64()
    ))
}

fn a2_catalyst_exactness() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut worst_exact: f64 = 0.0;
    let mut worst_excess: f64 = 0.0;
    for i in 0..100 {
        let d = 2 + i % 2;
        let n = 1 + rng.random_range(0..5);
        let (p, q) = (dirichlet(&mut rng, d), dirichlet(&mut rng, d));
        let dir = if i % 4 == 3 {
            Direction::Locc
        } else {
            Direction::Bistochastic
        };
        let r = run_protocol_directed(&p, &q, n, dir).map_err(|e| e.to_string())?;
        worst_exact = worst_exact.max(r.marginal_exactness);
        if r.marginal_exactness > 1e-12 {
            return Err(format!(
                "run {i}: marginal exactness {:e}",
                r.marginal_exactness
            ));
        }
        worst_excess = worst_excess
            .max(r.system_err - r.chi_err)
            .max(r.joint_err - 2.0 * r.chi_err);
        if r.system_err > r.chi_err + SLACK {
            return Err(format!(
                "run {i}: system_err {} > chi_err {}",
                r.system_err, r.chi_err
            ));
        }
        if r.joint_err > 2.0 * r.chi_err + SLACK {
            return Err(format!(
                "run {i}: joint_err {} > 2 chi_err {}",
                r.joint_err, r.chi_err
            ));
        }
    }
    within(t.elapsed(), 60)?;
    Ok(format!(
        "100 runs, max marginal deviation {worst_exact:.1e}, max bound excess {worst_excess:.1e}, {:.2} s",
        t.elapsed().as_secs_f64()
    ))
}

fn error_curve_config() -> SweepConfig {
    SweepConfig {
        theory: Some(TheoryName::Athermality),
        source: Some(StateSource::Explicit {
            source: pv(&[0.84, 0.10, 0.06]),
            target: pv(&[0.79, 0.19, 0.02]),
        }),
        n_max: Some(6),
        ..SweepConfig::default()
    }
}

fn a3_error_curve() -> Outcome {
    let t = Instant::now();
    let cfg = error_curve_config();
    let Some(StateSource::Explicit {
        source: p,
        target: q,
    }) = &cfg.source
    else {
        unreachable!()
    };
    let theory = TheoryKind::Athermality(GibbsSpec::uniform(3).unwrap());
    let r = rates(&theory, p, q, 0.03).map_err(|e| e.to_string())?.rate;
    if (r - 1.0665).abs() > 2e-3 {
        return Err(format!("R = {r}"));
    }
    let sweep = cmd_error_vs_size(&cfg).map_err(|e| e.to_string())?;
    let errs: Vec<f64> = sweep
        .rows
        .iter()
        .map(|row| row.report.as_ref().unwrap().system_err)
        .collect();
    let pred: Vec<f64> = sweep
        .rows
        .iter()
        .map(|row| row.predicted_eps.unwrap())
        .collect();
    if errs.len() != 6 {
        return Err(format!("expected 6 rows, got {}", errs.len()));
    }
    if let Some(k) = (1..6).find(|&k| errs[k] > errs[k - 1] + 0.01) {
        return Err(format!(
            "system_err rises from n={} to n={}: {errs:?}",
            k,
            k + 1
        ));
    }
    let gap = |n: usize| (errs[n - 1] - pred[n - 1]).abs();
    if !(gap(6) < gap(2)) {
        return Err(format!(
            "|err - prediction| at n=6 ({}) not below n=2 ({})",
            gap(6),
            gap(2)
        ));
    }
    within(t.elapsed(), 120)?;
    let shown: Vec<String> = errs.iter().map(|e| format!("{e:.4}")).collect();
    Ok(format!(
        "R = {r:.5}, system_err = [{}], gap n=2 {:.4} -> n=6 {:.4}",
        shown.join(", "),
        gap(2),
        gap(6)
    ))
}

fn a4_sesqui_closed_form() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for eps in [0.05, 0.1, 0.3, 0.5, 0.9] {
        let f = sesqui_normal(1.0, eps).map_err(|e| e.to_string())?;
        let exact = 2.0 * inv_normal_cdf((1.0 + eps) / 2.0).map_err(|e| e.to_string())?;
        worst = worst.max((f - exact).abs());
        if (f - exact).abs() > 1e-6 {
            return Err(format!("eps {eps}: {f} vs {exact}"));
        }
    }
    let mut worst_rt: f64 = 0.0;
    for k in 1..=10_000 {
        let x = k as f64 / 10_001.0;
        let rt = (normal_cdf(inv_normal_cdf(x).unwrap()) - x).abs();
        worst_rt = worst_rt.max(rt);
        if rt > 1e-10 {
            return Err(format!("round trip at {x}: {rt:e}"));
        }
    }
    within(t.elapsed(), 5)?;
    Ok(format!(
        "max closed-form diff {worst:.1e}, max round-trip {worst_rt:.1e}"
    ))
}

fn resonance_config(seed: u64) -> SweepConfig {
    let mut cfg = SweepConfig {
        theory: Some(TheoryName::Entanglement),
        seed: Some(seed),
        n_max: Some(7),
        eps: 0.03,
        ..SweepConfig::default()
    };
    cfg.source = Some(cfg.contour(3, 0.9, 0.8, 50, None));
    cfg
}

fn a5_resonance() -> Outcome {
    let t = Instant::now();
    let res = cmd_resonance_sweep(&resonance_config(7)).map_err(|e| e.to_string())?;
    let h = 0.9 * std::f64::consts::LN_2;
    if res.rows.len() != 50
        || res
            .rows
            .iter()
            .any(|r| (r.entropy - h).abs() > CONTOUR_TOLERANCE)
    {
        return Err("sampled family is not 50 states on the contour".into());
    }
    let s = res.summary().ok_or("no finite resonance parameters")?;
    if !s.closest_attains_min {
        return Err(format!(
            "state closest to resonance (#{}) needs n = {}, family minimum is {}",
            s.closest_index, s.closest_n, s.family_min_n
        ));
    }
    if !s.quintiles_nondecreasing {
        return Err(format!(
            "quintile means not nondecreasing: {:?}",
            s.quintile_means
        ));
    }
    within(t.elapsed(), 600)?;
    Ok(format!(
        "closest #{} n = {} = family min; quintile means {:?}",
        s.closest_index, s.closest_n, s.quintile_means
    ))
}

fn random_pure(rng: &mut ChaCha8Rng, da: usize, db: usize) -> DensityMatrix {
    let psi: Vec<Complex64> = (0..da * db)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let psi: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
    DensityMatrix::pure(&psi, Some((da, db))).unwrap()
}

fn a6_corollaries() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    for i in 0..200 {
        let (da, db) = [(2, 2), (2, 3), (3, 3)][i % 3];
        let rho = random_pure(&mut rng, da, db);
        let sigma = random_pure(&mut rng, 2, 2);
        let sa = von_neumann_entropy(&partial_trace(&rho, Subsystem::A).unwrap());
        let sb = von_neumann_entropy(&partial_trace(&sigma, Subsystem::A).unwrap());
        let rep =
            corollary1_check(&rho, TargetEntanglement::State(&sigma)).map_err(|e| e.to_string())?;
        let expect = if (sa - sb).abs() <= 1e-9 {
            Corollary1Verdict::Boundary
        } else if sa > sb {
            Corollary1Verdict::Sufficient
        } else {
            Corollary1Verdict::NotImplied
        };
        if rep.verdict != expect {
            return Err(format!(
                "pure pair {i}: {:?} but S(rho_A) = {sa}, S(sigma_A) = {sb}",
                rep.verdict
            ));
        }
    }
    for i in 0..200 {
        let d = 2 + i % 4;
        let (p, q) = (dirichlet(&mut rng, d), dirichlet(&mut rng, d));
        let eps = rng.random_range(0.01..0.5);
        let noisy = TheoryKind::UnitaryNoisy(d);
        let thermal = TheoryKind::Athermality(GibbsSpec::uniform(d).unwrap());
        let a = rates(&noisy, &p, &q, eps).map_err(|e| e.to_string())?;
        let b = rates(&thermal, &p, &q, eps).map_err(|e| e.to_string())?;
        let json = |x| to_json_string(x).unwrap();
        if json(&a) != json(&b)
            || a.rate.to_bits() != b.rate.to_bits()
            || a.rate_prime.to_bits() != b.rate_prime.to_bits()
        {
            return Err(format!("pair {i}: noisy and uniform-thermal rates differ"));
        }
        let log_dc = rng.random_range(0.0..20.0);
        let sa = sufficiency_check(&noisy, &p, &q, eps, log_dc).unwrap();
        let sb = sufficiency_check(&thermal, &p, &q, eps, log_dc).unwrap();
        let pa = predicted_error(&noisy, &p, &q, log_dc)
            .ok()
            .map(f64::to_bits);
        let pb = predicted_error(&thermal, &p, &q, log_dc)
            .ok()
            .map(f64::to_bits);
        if sa.verdict != sb.verdict || sa.threshold.to_bits() != sb.threshold.to_bits() || pa != pb
        {
            return Err(format!(
                "pair {i}: noisy and uniform-thermal sufficiency differ"
            ));
        }
    }
    Ok("200 pure pairs match the Schmidt condition; 200 noisy/thermal pairs bit-identical".into())
}

fn a7_n_epsilon() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 100 {
        attempts += 1;
        if attempts > 100_000 {
            return Err("could not draw 100 pairs with R > 1".into());
        }
        let d = 2 + rng.random_range(0..4);
        let q = dirichlet(&mut rng, d);
        let sharpen = rng.random_range(1.05..3.0);
        let p = {
            let raw: Vec<f64> = q.as_slice().iter().map(|x| x.powf(sharpen)).collect();
            let s: f64 = raw.iter().sum();
            ProbVec::new(raw.iter().map(|x| x / s).collect()).unwrap()
        };
        let eps = rng.random_range(0.005..0.3);
        let theory = TheoryKind::Athermality(GibbsSpec::uniform(d).unwrap());
        let Ok(r) = rates(&theory, &p, &q, eps) else {
            continue;
        };
        if !(r.rate > 1.0) || !r.rate_prime.is_finite() {
            continue;
        }
        let n = n_epsilon(&r).map_err(|e| e.to_string())?;
        if n > 1_000_000 {
            continue;
        }
        let scan = (1u64..=2_000_000)
            .find(|&m| r.rate - r.rate_prime / (m as f64).sqrt() > 1.0)
            .ok_or("scan found no n")?;
        if scan.abs_diff(n) > 1 {
            return Err(format!(
                "R = {}, R' = {}: n_epsilon {n} vs scan {scan}",
                r.rate, r.rate_prime
            ));
        }
        checked += 1;
    }
    Ok("100 pairs with R > 1 agree with the direct scan".into())
}

fn run_bin(args: &[&str], out_dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_catalysis"))
        .args(args)
        .env("CATALYSIS_OUT_DIR", out_dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn a8_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    std::fs::write(d.join("p.json"), r#"{"probs": [0.84, 0.10, 0.06]}"#).unwrap();
    std::fs::write(d.join("q.json"), r#"{"probs": [0.79, 0.19, 0.02]}"#).unwrap();
    std::fs::write(
        d.join("resonance.conf"),
        "theory = entanglement\nh_ini = 0.9\nh_fin = 0.8\nsamples = 50\nseed = 7\neps = 0.03\nn_max = 7\n",
    )
    .unwrap();
    let (p, q, conf) = (d.join("p.json"), d.join("q.json"), d.join("resonance.conf"));
    let (p, q, conf) = (
        p.to_str().unwrap(),
        q.to_str().unwrap(),
        conf.to_str().unwrap(),
    );
    let runs: [(&str, Vec<&str>); 4] = [
        ("error-vs-size", vec!["error-vs-size", p, q, "--n-max", "6"]),
        ("resonance", vec!["resonance", "--config", conf]),
        (
            "resonance-flags",
            vec![
                "resonance",
                "--h-ini",
                "0.9",
                "--h-fin",
                "0.8",
                "--seed",
                "7",
                "--theory",
                "entanglement",
            ],
        ),
        ("rates", vec!["rates", p, q]),
    ];
    let mut total = 0;
    for (name, args) in &runs {
        let mut outputs = Vec::new();
        for workers in ["1", "1", "4"] {
            let file = format!("{name}-{}.out", outputs.len());
            let mut a = args.clone();
            if *name != "rates" {
                a.extend(["--workers", workers]);
            }
            a.extend(["--out", file.as_str()]);
            run_bin(&a, d)?;
            outputs.push(std::fs::read(d.join(&file)).map_err(|e| e.to_string())?);
        }
        if outputs.iter().any(|o| o != &outputs[0]) {
            return Err(format!("{name}: reruns differ"));
        }
        if outputs[0].is_empty() {
            return Err(format!("{name}: empty output"));
        }
        total += outputs.len();
    }
    let lib_a = cmd_resonance_sweep(&resonance_config(7))
        .map_err(|e| e.to_string())?
        .table()
        .to_csv()
        .unwrap();
    let lib_b = cmd_resonance_sweep(&resonance_config(7))
        .map_err(|e| e.to_string())?
        .table()
        .to_csv()
        .unwrap();
    if lib_a != lib_b {
        return Err("library resonance sweep differs between runs".into());
    }
    Ok(format!(
        "{total} CLI runs byte-identical across reruns and worker counts"
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("A1 oracle equivalence", a1_oracle_equivalence),
        ("A2 catalyst exactness", a2_catalyst_exactness),
        ("A3 error-vs-size reproduction", a3_error_curve),
        ("A4 sesqui-normal closed form", a4_sesqui_closed_form),
        ("A5 resonance property", a5_resonance),
        ("A6 theory reductions", a6_corollaries),
        ("A7 copy-number self-consistency", a7_n_epsilon),
        ("A8 determinism", a8_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

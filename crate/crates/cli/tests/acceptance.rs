//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; exits non-zero if any fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use qmeter::catalog::{
    identity_device, projective, random_device, random_kicks, random_post_states, tetrahedron_rank_one,
    unsharp_qubit, with_kicks,
};
use qmeter::estimator::{
    best_post_estimate, best_pre_estimate, check_bound, estimate_pair, g_post, g_pre, g_pre_of_guess,
    operation_fidelity, pure_part, verify_estimate_relations, RelationCheck,
};
use qmeter::haar::{mc_g_post, mc_g_pre, mc_operation_fidelity};
use qmeter::matkernel::inner;
use qmeter_cli::files::{from_pairs, parse_json};
use qmeter_cli::report::SimulationRecord;
use qmeter_cli::{run, Cli};
use qmeter::{CMatrix, Complex64, Measurement, QuantumState};

type Outcome = Result<String, String>;

fn corpus_device(seed: u64) -> Measurement {
    let d = 2 + (seed % 3) as usize;
    let n = 2 + (seed / 3 % 5) as usize;
    random_device(d, n, seed).unwrap()
}

fn corpus() -> Vec<Measurement> {
    (0..1000).map(corpus_device).collect()
}

fn kicked_corpus() -> Vec<Measurement> {
    (0..200)
        .map(|seed| {
            let m = corpus_device(seed);
            with_kicks(&m, &random_kicks(&m, 9000 + seed)).unwrap()
        })
        .collect()
}

fn within(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{label}: got {got}, want {want} (tol {tol:e})"))
    }
}

fn in_time(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

fn cli(args: &[&str]) -> Result<(u8, String), String> {
    let parsed = Cli::try_parse_from(std::iter::once("qmeter").chain(args.iter().copied())).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    let code = run(&parsed, &mut buf).map_err(|e| e.to_string())?;
    Ok((code, String::from_utf8(buf).map_err(|e| e.to_string())?))
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    for d in [2usize, 3, 4, 8] {
        let m = projective(d).map_err(|e| e.to_string())?;
        let two = 2.0 / (d as f64 + 1.0);
        within(&format!("d={d} G_post"), g_post(&m), 1.0, 1e-10)?;
        within(&format!("d={d} G_pre"), g_pre(&m), two, 1e-10)?;
        within(&format!("d={d} F"), operation_fidelity(&m), two, 1e-10)?;
    }
    in_time(t.elapsed(), Duration::from_secs(1))?;
    Ok(format!("projective d=2,3,4,8 in {:?}", t.elapsed()))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    for d in [2usize, 3, 4] {
        let m = identity_device(d).map_err(|e| e.to_string())?;
        let inv = 1.0 / d as f64;
        within(&format!("d={d} F"), operation_fidelity(&m), 1.0, 1e-10)?;
        within(&format!("d={d} G_post"), g_post(&m), inv, 1e-10)?;
        within(&format!("d={d} G_pre"), g_pre(&m), inv, 1e-10)?;
    }
    in_time(t.elapsed(), Duration::from_secs(1))?;
    Ok(format!("identity d=2,3,4 in {:?}", t.elapsed()))
}

/// Top eigenvector of a PSD matrix by repeated normalized squaring followed
/// by power steps; shares no code with the library eigensolver.
fn maximize_expectation(e: &CMatrix) -> Vec<Complex64> {
    let d = e.rows();
    let mut p = e.clone();
    for _ in 0..60 {
        let sq = &p * &p;
        let n = sq.frobenius_norm();
        if n == 0.0 {
            break;
        }
        p = sq.scale_real(1.0 / n);
    }
    let rayleigh = |v: &[Complex64]| inner(v, &e.mul_vec(v)).re / inner(v, v).re;
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for k in 0..=d {
        let start: Vec<Complex64> = (0..d)
            .map(|i| match k {
                k if k == d => Complex64::new(1.0, 0.1 * i as f64),
                k => Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0),
            })
            .collect();
        let mut v = p.mul_vec(&start);
        for _ in 0..50 {
            let n = inner(&v, &v).re.sqrt();
            if n < 1e-150 {
                break;
            }
            v = e.mul_vec(&v.iter().map(|z| z / n).collect::<Vec<_>>());
        }
        let n = inner(&v, &v).re.sqrt();
        if n < 1e-150 {
            continue;
        }
        let v: Vec<Complex64> = v.iter().map(|z| z / n).collect();
        let r = rayleigh(&v);
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, v));
        }
    }
    best.map(|(_, v)| v).unwrap_or_else(|| QuantumState::basis(d, 0).into_amplitudes())
}

fn criterion_3(devices: &[Measurement]) -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for (i, m) in devices.iter().enumerate() {
        let guesses: Vec<QuantumState> = m
            .effects()
            .iter()
            .map(|e| QuantumState::normalized(maximize_expectation(e.matrix())).unwrap())
            .collect();
        let direct = g_pre_of_guess(m, &guesses).map_err(|e| e.to_string())?;
        let relation = (1.0 + g_post(m)) / (m.dim() as f64 + 1.0);
        let err = (direct - relation).abs();
        worst = worst.max(err);
        within(&format!("device {i}"), direct, relation, 1e-10)?;
    }
    in_time(t.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{} devices, max |dev| = {worst:.2e}, {:?}", devices.len(), t.elapsed()))
}

fn criterion_4(devices: &[Measurement], kicked: &[Measurement]) -> Outcome {
    let t = Instant::now();
    let mut min_slack = f64::INFINITY;
    for (i, m) in devices.iter().chain(kicked).enumerate() {
        let r = check_bound(m);
        let slack = r.bound_rhs - r.bound_lhs;
        min_slack = min_slack.min(slack);
        if slack < -1e-9 {
            return Err(format!("device {i}: lhs {} > rhs {}", r.bound_lhs, r.bound_rhs));
        }
    }
    in_time(t.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "{} devices, min slack = {min_slack:.2e}, {:?}",
        devices.len() + kicked.len(),
        t.elapsed()
    ))
}

fn criterion_5() -> Outcome {
    const SAMPLES: usize = 100_000;
    let t = Instant::now();
    let mut devices = vec![
        ("projective(3)".to_string(), projective(3).unwrap()),
        ("identity(2)".to_string(), identity_device(2).unwrap()),
        ("unsharp(0.6)".to_string(), unsharp_qubit(0.6).unwrap()),
        ("tetrahedron".to_string(), tetrahedron_rank_one(None).unwrap()),
    ];
    for k in 0..10u64 {
        let d = 2 + (k % 3) as usize;
        let n = 2 + (k % 5) as usize;
        devices.push((format!("random({d},{n},{})", 300 + k), random_device(d, n, 300 + k).unwrap()));
    }
    // Largest |MC − analytic| as a fraction of the agreement window.
    let mut worst_window = 0.0f64;
    for (i, (name, m)) in devices.iter().enumerate() {
        let seed = 7000 + 10 * i as u64;
        let post: Vec<_> = (1..=m.outcomes()).map(|s| best_post_estimate(m, s).unwrap()).collect();
        let pre: Vec<_> = (1..=m.outcomes()).map(|s| best_pre_estimate(m, s).unwrap()).collect();
        let checks = [
            ("G_post", mc_g_post(m, &post, SAMPLES, seed), g_post(m)),
            ("G_pre", mc_g_pre(m, &pre, SAMPLES, seed + 1), g_pre(m)),
            ("F", mc_operation_fidelity(m, SAMPLES, seed + 2), operation_fidelity(m)),
        ];
        for (what, mc, analytic) in checks {
            let mc = mc.map_err(|e| e.to_string())?;
            if !mc.agrees_with(analytic) {
                return Err(format!(
                    "{name} {what}: MC {} ± {} vs analytic {analytic}",
                    mc.mean, mc.std_error
                ));
            }
            let window = (5.0 * mc.std_error).max(1e-3);
            worst_window = worst_window.max((mc.mean - analytic).abs() / window);
        }
    }
    in_time(t.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "{} devices x 3 integrals at 1e5 samples, worst deviation {:.0}% of window, {:?}",
        devices.len(),
        100.0 * worst_window,
        t.elapsed()
    ))
}

fn criterion_6(devices: &[Measurement], kicked: &[Measurement]) -> Outcome {
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut worst = 1.0f64;
    for (i, m) in devices.iter().chain(kicked).enumerate() {
        for s in 1..=m.outcomes() {
            match verify_estimate_relations(m, s).map_err(|e| e.to_string())? {
                RelationCheck::Checked {
                    unitary_overlap,
                    kraus_overlap,
                    ..
                } => {
                    checked += 1;
                    worst = worst.min(unitary_overlap).min(kraus_overlap);
                    if unitary_overlap < 1.0 - 1e-9 || kraus_overlap < 1.0 - 1e-9 {
                        return Err(format!(
                            "device {i} outcome {s}: overlaps {unitary_overlap}, {kraus_overlap}"
                        ));
                    }
                }
                RelationCheck::Skipped { .. } => skipped += 1,
            }
        }
    }
    let mut pure_checked = 0usize;
    for (i, m) in devices.iter().chain(kicked).enumerate() {
        let p = pure_part(m).map_err(|e| e.to_string())?;
        for s in 1..=p.outcomes() {
            let pair = estimate_pair(&p, s).map_err(|e| e.to_string())?;
            if pair.degenerate {
                continue;
            }
            pure_checked += 1;
            let f = pair.chi_pre.fidelity(&pair.chi_post);
            if f < 1.0 - 1e-9 {
                return Err(format!("pure part of device {i}, outcome {s}: |<pre|post>|^2 = {f}"));
            }
        }
    }
    Ok(format!(
        "{checked} outcomes checked ({skipped} degenerate skipped), min overlap {worst:.12}; {pure_checked} pure outcomes agree"
    ))
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..=10 {
        let lambda = k as f64 / 10.0;
        let r = check_bound(&unsharp_qubit(lambda).map_err(|e| e.to_string())?);
        let gap = (r.bound_lhs - r.bound_rhs).abs();
        worst = worst.max(gap);
        if gap > 1e-9 {
            return Err(format!("lambda {lambda}: lhs {} rhs {}", r.bound_lhs, r.bound_rhs));
        }
    }
    Ok(format!("11 sharpness values, max |lhs - rhs| = {worst:.2e}"))
}

fn criterion_8(dir: &Path) -> Outcome {
    let mut min_fid = 1.0f64;
    for post_seed in [11u64, 12, 13] {
        let declared = random_post_states(post_seed);
        let m = tetrahedron_rank_one(Some(&declared)).map_err(|e| e.to_string())?;
        within("G_post", g_post(&m), 1.0, 1e-10)?;
        within("G_pre", g_pre(&m), 2.0 / 3.0, 1e-10)?;

        let spec = dir.join(format!("tetra-{post_seed}.json"));
        let spec_str = spec.to_str().ok_or("non-UTF-8 temp path")?;
        let seed_str = post_seed.to_string();
        let (code, _) = cli(&["catalog", "tetrahedron", "--post-seed", &seed_str, "--out", spec_str])?;
        if code != 0 {
            return Err(format!("catalog exited {code}"));
        }
        let (code, text) = cli(&[
            "--json", "simulate", spec_str, "--haar", "--shots", "1000", "--seed", &seed_str,
        ])?;
        if code != 0 {
            return Err(format!("simulate exited {code}"));
        }
        let record: SimulationRecord = parse_json(&text, "simulate").map_err(|e| e.to_string())?;
        if record.shots.len() != 1000 {
            return Err(format!("{} shots logged", record.shots.len()));
        }
        for shot in &record.shots {
            let post = QuantumState::new(from_pairs(&shot.post_state)).map_err(|e| e.to_string())?;
            let f = post.fidelity(&declared[shot.outcome - 1]);
            min_fid = min_fid.min(f);
            if f < 1.0 - 1e-10 {
                return Err(format!("post-seed {post_seed} shot {}: fidelity {f}", shot.shot));
            }
        }
    }
    Ok(format!("3 post-state draws x 1000 Haar shots, min fidelity 1 - {:.2e}", 1.0 - min_fid))
}

fn criterion_9() -> Outcome {
    let (code, csv) = cli(&["domain", "--d", "2,4,8,16", "--steps", "101"])?;
    if code != 0 {
        return Err(format!("domain exited {code}"));
    }
    let mut lines = csv.split('\n');
    if lines.next() != Some("d,g_post,max_f") {
        return Err("missing CSV header".into());
    }
    let mut curves: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 3 {
            return Err(format!("bad row `{line}`"));
        }
        let d: usize = cells[0].parse().map_err(|_| format!("bad d in `{line}`"))?;
        let g: f64 = cells[1].parse().map_err(|_| format!("bad g in `{line}`"))?;
        let f: f64 = cells[2].parse().map_err(|_| format!("bad f in `{line}`"))?;
        match curves.last_mut() {
            Some((cd, pts)) if *cd == d => pts.push((g, f)),
            _ => curves.push((d, vec![(g, f)])),
        }
    }
    let dims: Vec<usize> = curves.iter().map(|(d, _)| *d).collect();
    if dims != [2, 4, 8, 16] {
        return Err(format!("curves for {dims:?}"));
    }
    for (d, pts) in &curves {
        let df = *d as f64;
        let (g0, f0) = pts[0];
        let (g1, f1) = pts[pts.len() - 1];
        within(&format!("d={d} start g"), g0, 1.0 / df, 1e-12)?;
        within(&format!("d={d} start f"), f0, 1.0, 1e-12)?;
        within(&format!("d={d} end g"), g1, 1.0, 1e-12)?;
        within(&format!("d={d} end f"), f1, 2.0 / (df + 1.0), 1e-12)?;
        for w in pts.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 > w[0].1 {
                return Err(format!("d={d}: not monotone at g={}", w[1].0));
            }
        }
    }
    Ok("d=2,4,8,16 endpoints exact, curves monotone non-increasing".into())
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let devices = corpus();
    let kicked = kicked_corpus();

    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "projective closed forms", criterion_1()),
        (2, "identity closed forms", criterion_2()),
        (3, "pre/post relation by direct maximization", criterion_3(&devices)),
        (4, "tradeoff inequality", criterion_4(&devices, &kicked)),
        (5, "Monte Carlo oracle agreement", criterion_5()),
        (6, "estimate relations and pure agreement", criterion_6(&devices, &kicked)),
        (7, "unsharp family saturates the bound", criterion_7()),
        (8, "rank-one devices reproduce post-states", criterion_8(dir.path())),
        (9, "domain curve endpoints and shape", criterion_9()),
    ];

    let mut failed = 0;
    for (n, title, outcome) in &results {
        match outcome {
            Ok(detail) => println!("[PASS] criterion {n}: {title} -- {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {n}: {title} -- {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Acceptance suite: runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use prnn::bench::{reference_puzzles, predict_last, run_trials, ClueMode, Preset, TrialConfig, TrialReport};
use prnn::learning::learn_full_transition;
use prnn::longterm::{classify_longterm, ellipse, Classification, UNIT_TOL};
use prnn::model::{nrmse, trajectory, PrnnModel, TimeSeries};
use prnn::reservoir::normalize_spectral_radius;
use prnn::spectral::{eigendecompose, jordan_block_power, real_jordan, DEFAULT_TOL};
use prnn::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn parabola_exactness() -> Outcome {
    let w = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
    let model = PrnnModel::new(w, DVector::from_vec(vec![0.0, 0.0, 1.0]), 1, 1.0).unwrap();
    let ts = trajectory(&model, 21).unwrap();
    let err = (0..21).map(|t| (ts.data()[(0, t)] - (t * t) as f64).abs()).fold(0.0, f64::max);
    outcome(err <= 1e-9, format!("max abs error {err:.1e} for t = 0..20"))
}

fn jordan_power_oracle() -> Outcome {
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 200, failure_persistence: None, ..Config::default() },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let strategy = (1usize..=4, 0.0f64..=2.0, -std::f64::consts::PI..std::f64::consts::PI, 0u32..=15);
    let worst = std::cell::Cell::new(0.0f64);
    let result = runner.run(&strategy, |(m, modulus, angle, t)| {
        let lambda = Complex64::from_polar(modulus, angle);
        let closed = jordan_block_power(lambda, m, t);
        let mut j = DMatrix::<Complex64>::zeros(m, m);
        for i in 0..m {
            j[(i, i)] = lambda;
            if i + 1 < m {
                j[(i, i + 1)] = Complex64::new(1.0, 0.0);
            }
        }
        let mut oracle = DMatrix::<Complex64>::identity(m, m);
        for _ in 0..t {
            oracle = &oracle * &j;
        }
        let scale = oracle.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let rel = (closed - &oracle).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
        worst.set(worst.get().max(rel));
        prop_assert!(rel <= 1e-10, "relative error {rel:e} for m={m}, lambda={lambda}, t={t}");
        Ok(())
    });
    match result {
        Ok(()) => outcome(true, format!("200 cases, worst relative error {:.1e}", worst.get())),
        Err(e) => outcome(false, format!("{e}")),
    }
}

fn rebase_theorem() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut errors = Vec::new();
    for case in 0..100 {
        let n = rng.gen_range(1..=20);
        let w = gaussian(&mut rng, n, n) / (n as f64).sqrt();
        let x0 = gaussian(&mut rng, n, 1).column(0).into_owned();
        let form = match real_jordan(&w, &x0, DEFAULT_TOL) {
            Ok(f) => f,
            Err(e) => {
                errors.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let j = form.jordan_matrix();
        let mut jy = form.y.clone();
        let mut s = x0.clone();
        for _ in 0..=10 {
            let rel = (&form.a * &jy - &s).norm() / s.norm().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            jy = &j * jy;
            s = &w * s;
        }
    }
    let pass = errors.is_empty() && worst <= 1e-8;
    outcome(pass, format!("100 matrices, worst relative error {worst:.1e}, {} decomposition errors {:?}", errors.len(), errors))
}

fn approximation_theorem() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut exact = 0;
    let mut worst = 0.0f64;
    for trial in 0..50u64 {
        let values: Vec<f64> = (0..10).map(|_| rng.sample(StandardNormal)).collect();
        let series = TimeSeries::scalar(&values, 1.0).unwrap();
        let err = learn_full_transition(&series, 9, trial)
            .and_then(|m| trajectory(&m, 10))
            .and_then(|r| nrmse(&series, &r))
            .unwrap_or(f64::INFINITY);
        worst = worst.max(err);
        if err <= 1e-8 {
            exact += 1;
        }
    }
    outcome(exact >= 49, format!("{exact}/50 exact replays (NRMSE <= 1e-8), worst {worst:.1e}"))
}

fn sizes_ok(report: &TrialReport) -> (bool, usize) {
    let mut checked = 0;
    let mut ok = true;
    for r in &report.records {
        if let (Some(nnz), Some(size)) = (r.jordan_nnz, r.reduced_size) {
            checked += 1;
            ok &= nnz <= 3 * size;
        }
    }
    (ok, checked)
}

fn mso_headline(report: &TrialReport) -> Outcome {
    let size = report.median_reduced_size.unwrap_or(f64::NAN);
    let err = report.median_reduced_nrmse.unwrap_or(f64::INFINITY);
    outcome(
        size == 16.0 && err <= 1e-2,
        format!(
            "median reduced size {size}, median NRMSE over 300 steps {err:.2e}, {} failed trials",
            report.failures.len()
        ),
    )
}

fn discrimination(parabola: &TrialReport, sinusoid: &TrialReport) -> Outcome {
    let tp = parabola.median_train_nrmse.unwrap_or(f64::INFINITY);
    let ts = sinusoid.median_train_nrmse.unwrap_or(f64::INFINITY);
    let pass = parabola.success_rate >= 0.45 && sinusoid.success_rate >= 0.85 && tp <= 1e-4 && ts <= 1e-4;
    outcome(
        pass,
        format!(
            "parabola size 3 in {:.0}%, sinusoid size 2 in {:.0}%, median training NRMSE {tp:.1e} / {ts:.1e}",
            100.0 * parabola.success_rate,
            100.0 * sinusoid.success_rate
        ),
    )
}

/// Real 10×10 matrix with eigenvalues `e^{±iθ}` and eight further
/// eigenvalues of modulus at most 0.9, in a random basis.
fn assigned_spectrum(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(10, 10);
    let theta = rng.gen_range(0.1..std::f64::consts::PI - 0.1);
    let cell = |d: &mut DMatrix<f64>, k: usize, r: f64, a: f64| {
        let (s, c) = a.sin_cos();
        d[(k, k)] = r * c;
        d[(k, k + 1)] = r * s;
        d[(k + 1, k)] = -r * s;
        d[(k + 1, k + 1)] = r * c;
    };
    cell(&mut d, 0, 1.0, theta);
    for k in [2, 4, 6] {
        let (r, a) = (rng.gen_range(0.0..0.9), rng.gen_range(0.1..3.0));
        cell(&mut d, k, r, a);
    }
    d[(8, 8)] = rng.gen_range(-0.9..0.9);
    d[(9, 9)] = rng.gen_range(-0.9..0.9);
    let p = gaussian(rng, 10, 10);
    let p_inv = p.clone().try_inverse().expect("random basis is invertible");
    p * d * p_inv
}

fn longterm_ellipse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut problems = Vec::new();
    for case in 0..20 {
        let w = normalize_spectral_radius(&assigned_spectrum(&mut rng)).unwrap();
        let x0 = gaussian(&mut rng, 10, 1).column(0).into_owned();
        let decomp = eigendecompose(&w, &x0).unwrap();
        if classify_longterm(&decomp, UNIT_TOL) != Classification::Ellipse {
            problems.push(format!("case {case} not classified as ellipse"));
            continue;
        }
        let an = ellipse(&decomp, 1.0).unwrap();
        let mut s = x0.clone();
        for _ in 0..300 {
            s = &w * s;
        }
        let rel = (s - an.state(300)).norm() / x0.norm();
        worst = worst.max(rel);
    }
    outcome(
        problems.is_empty() && worst <= 1e-6,
        format!("20 systems, worst relative error at t = 300: {worst:.1e} {problems:?}"),
    )
}

fn number_puzzles() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for p in reference_puzzles() {
        let clue = match p.id.as_str() {
            "S9" | "S19" => ClueMode::None,
            _ => ClueMode::PreviousValue,
        };
        let r = predict_last(&p.clone().with_clue(clue), 4, 500, 0).unwrap();
        let mut ok = r.correct();
        if p.id == "S9" {
            ok &= r.correct_rate() >= 0.9;
        }
        pass &= ok;
        lines.push(format!(
            "{}{}: plurality {:?} expected {} ({:.1}% correct){}",
            p.id,
            if clue == ClueMode::PreviousValue { "+clue" } else { "" },
            r.plurality,
            r.expected,
            100.0 * r.correct_rate(),
            if ok { "" } else { " MISS" }
        ));
    }
    outcome(pass, lines.join("; "))
}

fn trajectory_replay(report: &TrialReport) -> Outcome {
    let removal: Vec<f64> = report
        .records
        .iter()
        .filter_map(|r| r.reduced_size.map(|s| 1.0 - s as f64 / r.full_size as f64))
        .collect();
    let worst_train = report.records.iter().map(|r| r.train_nrmse).fold(0.0, f64::max);
    let worst_reduced = report.records.iter().filter_map(|r| r.reduced_nrmse).fold(0.0, f64::max);
    let min_removal = removal.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        report.failures.is_empty()
            && report.records.len() == report.trials
            && report.records.iter().all(|r| r.reduced_size.is_some())
            && worst_train < 1.0
            && min_removal >= 0.1
            && worst_reduced <= 1.0,
        format!(
            "{} trajectories, worst replay NRMSE {worst_train:.1e}, min removal {:.0}%, worst reduced NRMSE {worst_reduced:.1e}",
            report.trials,
            100.0 * min_removal
        ),
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome, Duration, Duration)> = Vec::new();
    let mut push = |id, name, (o, t): (Outcome, Duration), limit| results.push((id, name, o, t, limit));

    push(1, "parabola exactness", timed(parabola_exactness), Duration::from_secs(1));
    push(2, "Jordan power oracle", timed(jordan_power_oracle), Duration::from_secs(5));
    push(3, "rebase theorem", timed(rebase_theorem), Duration::from_secs(30));
    push(4, "approximation theorem", timed(approximation_theorem), Duration::from_secs(10));

    let (mso, t_mso) = timed(|| run_trials(&TrialConfig::preset(Preset::Mso8)).unwrap());
    push(5, "MSO-8 headline", (mso_headline(&mso), t_mso), Duration::from_secs(120));

    let ((parabola, sinusoid), t_disc) = timed(|| {
        (
            run_trials(&TrialConfig::preset(Preset::Parabola)).unwrap(),
            run_trials(&TrialConfig::preset(Preset::Sinusoid)).unwrap(),
        )
    });
    push(6, "discrimination experiment", (discrimination(&parabola, &sinusoid), t_disc), Duration::MAX);

    push(7, "long-term ellipse", timed(longterm_ellipse), Duration::from_secs(10));
    push(8, "number puzzles", timed(number_puzzles), Duration::from_secs(60));

    let (traj, t_traj) = timed(|| run_trials(&TrialConfig::preset(Preset::Trajectory)).unwrap());
    push(9, "trajectory replay", (trajectory_replay(&traj), t_traj), Duration::from_secs(120));

    let (sparse, t_sparse) = timed(|| {
        let mut all = true;
        let mut count = 0;
        for r in [&mso, &parabola, &sinusoid, &traj] {
            let (ok, n) = sizes_ok(r);
            all &= ok;
            count += n;
        }
        outcome(all && count > 0, format!("{count} reduced models checked for nnz(J') <= 3 N'"))
    });
    push(10, "reduction sparsity", (sparse, t_sparse), Duration::MAX);

    let mut failed = 0;
    for (id, name, o, elapsed, limit) in &results {
        let in_time = elapsed <= limit;
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        let limit_note = if *limit == Duration::MAX { String::new() } else { format!(" (limit {}s)", limit.as_secs()) };
        println!(
            "criterion {id:>2} {:<26} {}  [{:.2}s{limit_note}{}] {}",
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", too slow" },
            o.detail
        );
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

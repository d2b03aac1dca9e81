//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use lpm_core::embedding::{alignment_error, classical_mds, procrustes_align};
use lpm_core::estimator::{fit_restricted_mle, grid_search_oracle, FitConfig};
use lpm_core::experiments::{
    run_eigenvalue_experiment, run_learnability_experiment, run_projectivity_experiment, run_regularity_experiment,
    run_sparsity_experiment, ExperimentPlan, LearnabilityPoint,
};
use lpm_core::likelihood::{
    frobenius_sq, hellinger_sq, kl_divergence, log_likelihood, log_likelihood_gradient, squared_distances,
};
use lpm_core::model::{LinkFunction, WindowSchedule};
use lpm_core::sampler::{sample_arrivals, sample_rectangular_window, Adjacency};
use lpm_core::seed::rng_from;
use lpm_core::stats::{mean, variance};

const BIN: &str = env!("CARGO_BIN_EXE_lpm-lab");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn criterion(id: u32, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let Outcome { pass, detail } = f();
    let took = start.elapsed();
    let in_time = budget.is_none_or(|b| took <= b);
    let ok = pass && in_time;
    let limit = budget.map(|b| format!(" / budget {:.0} s", b.as_secs_f64())).unwrap_or_default();
    println!(
        "{} criterion {id:>2} {name}: {detail} [{:.1} s{limit}{}]",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        if in_time { "" } else { ", over budget" }
    );
    ok
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target
}

fn plan(json: &str) -> ExperimentPlan {
    ExperimentPlan::from_json(json).expect("acceptance plan parses")
}

fn arrival_law() -> Outcome {
    let mut rng = rng_from(101);
    let t: Vec<f64> = (0..10_000).map(|_| *sample_arrivals::<f64, _>(50, &mut rng).last().unwrap()).collect();
    let (m, v) = (mean(&t), variance(&t));
    outcome(within(m, 50.0, 0.05) && within(v, 50.0, 0.05), format!("mean {m:.3}, variance {v:.3} (target 50 ± 5%)"))
}

fn window_volume_and_counts() -> Outcome {
    let mut rng = rng_from(202);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = rng.random_range(1..=5);
        let p: f64 = rng.random_range(0.0..=1.0);
        let t = 10f64.powf(rng.random_range(-2.0..3.0));
        let vol = WindowSchedule::new(d, p).unwrap().geometry(t).unwrap().volume;
        worst = worst.max((vol - t).abs() / t);
    }
    let w = WindowSchedule::new(2, 0.5).unwrap();
    let counts: Vec<f64> =
        (0..10_000).map(|_| sample_rectangular_window(&w, 100.0, &mut rng).unwrap().len() as f64).collect();
    let (m, v) = (mean(&counts), variance(&counts));
    outcome(
        worst <= 1e-12 && within(m, 100.0, 0.05) && within(v, 100.0, 0.05),
        format!("max relative |H(t)| − t {worst:.1e}; H(100) count mean {m:.2}, variance {v:.2}"),
    )
}

fn sparsity_exponents() -> Outcome {
    let p = plan(
        r#"{"kind":"sparsity","seed":3,"replicates":200,"n_grid":[100,200,400,800,1600,3200],"models":[
            {"family":"rect","d":1,"p":1.0,"link":"poly:C=2,a=3"},
            {"family":"rect","d":2,"p":0.5,"link":"poly:C=2,a=3"},
            {"family":"gauss","d":2,"sigma2":1.0,"link":"logexp:tau=1"},
            {"family":"sgraphon","d":2,"sigma2":1.0,"link":"sgraphon:p=0.5;logexp:tau=1"}]}"#,
    );
    let tolerances = [0.15, 0.15, 0.1, 0.15];
    let out = run_sparsity_experiment(&p).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (s, tol) in out.summaries.iter().zip(tolerances) {
        let slope = s.slope.unwrap_or(f64::NAN);
        pass &= (slope - s.target).abs() <= tol;
        parts.push(format!("{} slope {slope:.3} vs {} ± {tol}", s.model, s.target));
    }
    outcome(pass, parts.join("; "))
}

fn projectivity() -> Outcome {
    let p = plan(
        r#"{"kind":"projectivity","seed":4,"replicates":100000,"n1":2,"n2":8,"permutations":999,"alpha":0.01,"models":[
            {"family":"rect","d":1,"p":0.5,"link":"poly:C=2,a=3"},
            {"family":"sgraphon","d":1,"sigma2":1.0,"link":"sgraphon:p=0.5;logexp:tau=1"}]}"#,
    );
    let out = run_projectivity_experiment(&p).unwrap();
    let (rect, sg) = (&out.summaries[0], &out.summaries[1]);
    let ratio = sg.dyad_ratio.as_ref().unwrap();
    let pass = !rect.rejected && sg.rejected && within(ratio.observed, 0.5, 0.1);
    outcome(
        pass,
        format!(
            "rect TV {:.4} p {:.3} (not rejected: {}); sgraphon TV {:.4} p {:.3} (rejected: {}), dyad ratio {:.4} vs 0.5",
            rect.tv, rect.p_value, !rect.rejected, sg.tv, sg.p_value, sg.rejected, ratio.observed
        ),
    )
}

fn random_adjacency<R: Rng>(n: usize, rng: &mut R) -> Adjacency {
    let mut a = Adjacency::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            a.set(i, j, rng.random_bool(0.5));
        }
    }
    a
}

fn gradient_correctness() -> Outcome {
    let mut rng = rng_from(505);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let d = 1 + k % 3;
        let link = if k % 2 == 0 {
            LinkFunction::polynomial(rng.random_range(1.1..3.0), rng.random_range(2.0..4.0)).unwrap()
        } else {
            LinkFunction::logistic_exp(rng.random_range(0.5..2.0)).unwrap()
        };
        let y = random_adjacency(6, &mut rng);
        let z = DMatrix::from_fn(6, d, |_, _| rng.random_range(-2.0..2.0));
        let analytic: DMatrix<f64> = log_likelihood_gradient(&z, &y, &link).unwrap().gradient;
        let h = 1e-6;
        let mut fd = DMatrix::<f64>::zeros(6, d);
        for i in 0..6 {
            for c in 0..d {
                let (mut up, mut dn) = (z.clone(), z.clone());
                up[(i, c)] += h;
                dn[(i, c)] -= h;
                let diff = log_likelihood(&up, &y, &link).unwrap().value - log_likelihood(&dn, &y, &link).unwrap().value;
                fd[(i, c)] = diff / (2.0 * h);
            }
        }
        let rel = (&analytic - &fd).amax() / analytic.amax().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    outcome(worst < 1e-5, format!("worst relative deviation {worst:.2e} over 100 instances (tolerance 1e-5)"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = rng_from(606);
    let resolution = 0.01;
    let g = 1.5;
    let mut worst = f64::INFINITY;
    for k in 0..20 {
        let n = 2 + k % 2;
        let link = if k % 4 < 2 {
            LinkFunction::polynomial(2.0, 3.0).unwrap()
        } else {
            LinkFunction::logistic_exp(1.0).unwrap()
        };
        let y = random_adjacency(n, &mut rng);
        let oracle = grid_search_oracle(&y, &link, 1, g, resolution).unwrap();
        let fit = fit_restricted_mle(&y, &link, 1, g, &FitConfig { seed: k as u64, ..FitConfig::default() }).unwrap();
        worst = worst.min(fit.loglik - oracle.loglik_star);
    }
    // No extra resolution slack: the oracle's grid optimum never exceeds the
    // continuous optimum, so the fitter must reach it up to 1e-3.
    outcome(worst >= -1e-3, format!("min(fitter − oracle) loglik {worst:.3e} over 20 instances (tolerance −1e-3)"))
}

fn gaussian_matrix<R: Rng>(n: usize, d: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, _| rng.sample(StandardNormal))
}

fn mds_procrustes() -> Outcome {
    let mut rng = rng_from(707);
    let z = gaussian_matrix(50, 3, &mut rng);
    let d = squared_distances(&z);
    let x = classical_mds(&d, 3).unwrap();
    let round_trip = (squared_distances(&x) - &d).amax();
    let mut worst = 0.0f64;
    for k in 0..50 {
        let a = gaussian_matrix(40, 3, &mut rng) * 5.0;
        let mut q = gaussian_matrix(3, 3, &mut rng).qr().q();
        if k % 2 == 1 {
            q.column_mut(0).neg_mut();
        }
        let shift = gaussian_matrix(1, 3, &mut rng);
        let mut b = &a * &q;
        for mut row in b.row_iter_mut() {
            row += &shift;
        }
        let al = procrustes_align(&a, &b).unwrap();
        let err = alignment_error(&a, &b, &al.rotation, &al.translation);
        worst = worst.max(err / b.norm_squared());
    }
    outcome(
        round_trip < 1e-8 && worst < 1e-12,
        format!("MDS round-trip max error {round_trip:.2e}; worst relative alignment error {worst:.2e} (half reflections)"),
    )
}

fn divergence_ordering() -> Outcome {
    let mut rng = rng_from(808);
    let mut violations = 0;
    for k in 0..1000 {
        let n = 2 + k % 9;
        let sym = |rng: &mut _| {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let v: f64 = Rng::random_range(rng, 1e-6..1.0 - 1e-6);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            m
        };
        let (p, q) = (sym(&mut rng), sym(&mut rng));
        let f = frobenius_sq(&p, &q).unwrap();
        let h = hellinger_sq(&p, &q).unwrap();
        let kl = kl_divergence(&p, &q).unwrap();
        if !(f <= h * (1.0 + 1e-12) && h <= kl * (1.0 + 1e-12)) {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("{violations} violations of Frobenius² ≤ Hellinger² ≤ KL in 1000 pairs"))
}

fn learnability_trend() -> Outcome {
    let p = plan(
        r#"{"kind":"learnability","seed":9,"replicates":50,"n_grid":[100,200,400,800],
            "fit":{"restarts":1,"max_iters":500,"init":"mds"},"models":[
            {"family":"rect","d":2,"p":0.05,"link":"poly:C=2,a=3"},
            {"family":"gauss","d":2,"sigma2":1.0,"link":"logexp:tau=1"}]}"#,
    );
    let out = run_learnability_experiment(&p).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in &out.summaries {
        pass &= s.pos_err_non_increasing && s.dist_err_non_increasing && s.prob_err_non_increasing && !s.flagged;
        let fmt = |f: fn(&LearnabilityPoint) -> f64| {
            s.points.iter().map(|q| format!("{:.3e}", f(q))).collect::<Vec<_>>().join(" ")
        };
        parts.push(format!(
            "{}: pos [{}] dist [{}] prob [{}]",
            s.model,
            fmt(|q| q.median_pos_err),
            fmt(|q| q.median_dist_err),
            fmt(|q| q.median_prob_err)
        ));
    }
    outcome(pass, parts.join("; "))
}

fn eigenvalue_scaling() -> Outcome {
    let gauss = plan(
        r#"{"kind":"eigenvalues","seed":10,"replicates":100,"n_grid":[1000,2000],"models":[
            {"family":"gauss","d":2,"sigma2":1.5,"link":"logexp:tau=1"}]}"#,
    );
    let rect = plan(
        r#"{"kind":"eigenvalues","seed":10,"replicates":100,"n_grid":[500,1000,2000],"models":[
            {"family":"rect","d":2,"p":0.5,"link":"poly:C=2,a=3"}]}"#,
    );
    let g = run_eigenvalue_experiment(&gauss).unwrap();
    let at_2000 = &g.summaries[0].points.last().unwrap().mean_scaled;
    let r = run_eigenvalue_experiment(&rect).unwrap();
    let cv = &r.summaries[0].cv;
    let pass = at_2000.iter().all(|v| (0.95..=1.05).contains(v)) && cv.iter().all(|c| *c < 0.1);
    outcome(
        pass,
        format!(
            "Gaussian λ/(nσ²) at n=2000 {:?}; rectangular λ/(n g(n)²) CV {:?}, constant {:?}",
            at_2000.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            cv.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            r.summaries[0].constant.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn regularity_bound() -> Outcome {
    let p = plan(
        r#"{"kind":"regularity","seed":11,"replicates":10000,"n_grid":[50,200,800],"models":[
            {"family":"rect","d":1,"p":1.0,"link":"poly:C=2,a=3"}]}"#,
    );
    let out = run_regularity_experiment(&p).unwrap();
    let s = &out.summaries[0];
    let pass = s.points.iter().all(|q| q.within_band && q.box_ok);
    let parts: Vec<String> = s
        .points
        .iter()
        .map(|q| format!("n={} freq {:.4} ≤ {:.4}+3·{:.4}", q.n, q.freq_exceed, q.reference, q.reference_sd))
        .collect();
    outcome(pass, format!("{}; coarse event non-increasing: {}", parts.join(", "), s.coarse_non_increasing))
}

fn run_cli(args: &[&str], threads: Option<&str>, dir: &Path) -> bool {
    let mut cmd = Command::new(BIN);
    cmd.args(args).current_dir(dir);
    match threads {
        Some(t) => cmd.env("LPM_LAB_THREADS", t),
        None => cmd.env_remove("LPM_LAB_THREADS"),
    };
    cmd.output().map(|o| o.status.success()).unwrap_or(false)
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let plans = [
        ("sparsity", r#"{"kind":"sparsity","seed":5,"replicates":6,"n_grid":[40,80,160],"models":[
            {"family":"rect","d":2,"p":0.5,"link":"poly:C=2,a=3"},{"family":"rcm","link":"poly:C=2,a=3"},
            {"family":"sgraphon","d":2,"sigma2":1.0,"link":"sgraphon:p=0.5;logexp:tau=1"}]}"#),
        ("projectivity", r#"{"kind":"projectivity","seed":5,"replicates":300,"n1":3,"n2":6,"permutations":99,"models":[
            {"family":"rect","d":1,"p":0.5,"link":"poly:C=2,a=3"}]}"#),
        ("learnability", r#"{"kind":"learnability","seed":5,"replicates":3,"n_grid":[20,30,40],
            "fit":{"restarts":2,"max_iters":60},"models":[{"family":"gauss","d":2,"sigma2":1.0,"link":"logexp:tau=1"}]}"#),
        ("eigenvalues", r#"{"kind":"eigenvalues","seed":5,"replicates":5,"n_grid":[50,100],"models":[
            {"family":"rect","d":2,"p":0.5,"link":"poly:C=2,a=3"}]}"#),
        ("regularity", r#"{"kind":"regularity","seed":5,"replicates":40,"n_grid":[20,40],"models":[
            {"family":"rect","d":1,"p":1.0,"link":"poly:C=2,a=3"}]}"#),
    ];
    let run_all = |threads: Option<&str>| -> Option<Vec<(String, Vec<u8>)>> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        let mut ok = run_cli(
            &["sample", "--model", "rect", "--d", "2", "--p", "0.5", "--link", "poly:C=2,a=3", "--n", "300", "--seed", "42",
              "--out", "rect.json", "--edge-list", "rect.txt"],
            threads,
            p,
        );
        ok &= run_cli(
            &["sample", "--model", "gauss", "--d", "2", "--sigma2", "1", "--link", "logexp:tau=1", "--n", "120", "--out", "gauss.json"],
            threads,
            p,
        );
        ok &= run_cli(
            &["sample", "--model", "rect", "--d", "1", "--p", "0.5", "--T", "40", "--link", "poly:C=2,a=3", "--n", "30",
              "--seed", "3", "--out", "cond.json"],
            threads,
            p,
        );
        ok &= run_cli(&["fit", "--graph", "gauss.json", "--restarts", "3", "--seed", "8", "--out", "fit.json"], threads, p);
        for (kind, text) in plans {
            let cfg = format!("{kind}.plan.json");
            std::fs::write(p.join(&cfg), text).unwrap();
            ok &= run_cli(&["exp", kind, "--config", &cfg, "--out", kind], threads, p);
        }
        ok.then(|| snapshot(p))
    };
    let runs = [run_all(Some("1")), run_all(Some("2")), run_all(Some("2")), run_all(None)];
    if runs.iter().any(Option::is_none) {
        return outcome(false, "a CLI command failed");
    }
    let runs: Vec<_> = runs.into_iter().flatten().collect();
    let files = runs[0].len();
    let identical = runs.iter().all(|r| *r == runs[0]);
    outcome(identical, format!("{files} output files byte-identical across 4 runs (threads 1, 2, 2, default): {identical}"))
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        criterion(1, "arrival law", Some(s(10)), arrival_law),
        criterion(2, "window volume and Poisson counts", Some(s(60)), window_volume_and_counts),
        criterion(5, "gradient correctness", Some(s(10)), gradient_correctness),
        criterion(6, "oracle equivalence", Some(s(300)), oracle_equivalence),
        criterion(7, "MDS/Procrustes exactness", Some(s(5)), mds_procrustes),
        criterion(8, "divergence ordering", Some(s(5)), divergence_ordering),
        criterion(10, "eigenvalue scaling", Some(s(300)), eigenvalue_scaling),
        criterion(11, "regularity bound", Some(s(120)), regularity_bound),
        criterion(12, "determinism", None, determinism),
        criterion(4, "projectivity", Some(s(600)), projectivity),
        criterion(3, "sparsity exponents", Some(s(1800)), sparsity_exponents),
        criterion(9, "learnability trend", Some(s(7200)), learnability_trend),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}

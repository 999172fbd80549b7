//! Exit criteria. Runs every check at its pinned tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use compcond::condition::{
    bruteforce_cond, cond_det, cond_inv_bound, cond_solve_bound, CondValue, Inverted, OracleTarget,
};
use compcond::experiments::{
    accuracy_experiment, csv, expected_log_experiment, kappa_experiment, slope_experiment,
    stail_experiment, tail_experiment, McConfig, SlopeTarget, Which,
};
use compcond::linalg::{det_laplace, factorize};
use compcond::rng::{sample_matrix, sample_vector, GaussianStream};
use compcond::{Matrix, Pattern, PatternKind, SeedSpec};

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn e(n: usize, k: usize) -> Vec<f64> {
    (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect()
}

/// Random mask with roughly `density` of the entries set.
fn random_pattern(stream: &mut GaussianStream, n: usize, density: f64) -> Pattern {
    let mask = (0..n * n).map(|_| stream.next_open01() < density).collect();
    Pattern::from_mask(n, mask)
}

fn oracle_equivalence() -> Outcome {
    const STEP: f64 = 1e-6;
    const TOL: f64 = 1e-3;
    let shapes = [
        (PatternKind::Dense, 2),
        (PatternKind::Dense, 3),
        (PatternKind::LowerTriangular, 2),
        (PatternKind::LowerTriangular, 3),
    ];
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    for instance in 0..200u64 {
        let (kind, n) = shapes[instance as usize % shapes.len()];
        let pattern = Arc::new(Pattern::from_kind(kind, n).unwrap());
        let a = sample_matrix(&pattern, SeedSpec::new(0xACCE, instance));
        let b = sample_vector(n, SeedSpec::new(0xACCE, instance));
        let inv = Inverted::new(&a).unwrap();
        let solve = inv.solve_condition(&b).unwrap();

        let mut compare = |closed: CondValue, target: OracleTarget, rhs: Option<&[f64]>| {
            let oracle = bruteforce_cond(target, &a, rhs, &[STEP]).unwrap().value;
            worst = worst.max(rel(closed.to_f64(), oracle));
            checks += 1;
        };
        compare(inv.cond_det(), OracleTarget::Det, None);
        for k in 0..n {
            for l in 0..n {
                compare(inv.inv_entry(k, l), OracleTarget::InvEntry { k, l }, None);
            }
            compare(solve.entries[k], OracleTarget::SolveEntry { k }, Some(&b));
        }
    }
    Outcome::new(
        worst <= TOL,
        format!("{checks} comparisons, worst relative gap {worst:.3e} (tol {TOL:e})"),
    )
}

fn hand_goldens() -> Outcome {
    const TOL: f64 = 1e-12;
    let a = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 1.0]]);
    let b = [3.0, 2.0];
    let inv = Inverted::new(&a).unwrap();
    let ic = inv.inverse_condition();
    let sc = inv.solve_condition(&b).unwrap();
    let mut worst = 0.0f64;
    let mut check = |got: f64, want: f64| worst = worst.max(rel(got, want));
    check(inv.cond_det().to_f64(), 6.0);
    for (k, l, want) in [(0, 0, 5.0), (0, 1, 7.0), (1, 0, 7.0), (1, 1, 5.0)] {
        check(ic.entry(k, l).to_f64(), want);
    }
    check(ic.cond.to_f64(), 7.0);
    check(ic.mixed.to_f64(), 5.0);
    check(sc.entries[0].to_f64(), 10.0);
    check(sc.entries[1].to_f64(), 14.0);
    check(sc.cond.to_f64(), 14.0);
    check(cond_inv_bound(&a, 0, 1).unwrap(), 7.0);
    check(cond_inv_bound(&a, 1, 0).unwrap(), 7.0);
    check(cond_solve_bound(&a, &b, 0).unwrap(), 16.0);
    check(cond_solve_bound(&a, &b, 1).unwrap(), 20.0);
    let argmax_ok = ic.argmax == (0, 1) && sc.argmax == 1;
    Outcome::new(
        worst <= TOL && argmax_ok,
        format!(
            "worst relative gap {worst:.3e}, argmax inverse {:?} solve {}",
            ic.argmax, sc.argmax
        ),
    )
}

fn bound_inequalities() -> Outcome {
    const SLACK: f64 = 1.0 + 1e-9;
    let kinds = [
        PatternKind::Dense,
        PatternKind::LowerTriangular,
        PatternKind::UpperTriangular,
        PatternKind::Tridiagonal,
    ];
    let mut stream = GaussianStream::new(SeedSpec::new(0xB0D5, 0));
    let mut violations = 0usize;
    let mut checks = 0usize;
    for instance in 0..1000u64 {
        let n = 1 + (stream.next_u64() % 8) as usize;
        let pattern = if instance % 5 == 4 {
            // random sparse shape on top of a full diagonal
            let mut mask = random_pattern(&mut stream, n, 0.4).mask().to_vec();
            (0..n).for_each(|i| mask[i * n + i] = true);
            Pattern::from_mask(n, mask)
        } else {
            Pattern::from_kind(kinds[instance as usize % 5 % 4], n).unwrap()
        };
        let pattern = Arc::new(pattern);
        let a = sample_matrix(&pattern, SeedSpec::new(0xB0D5, instance + 1));
        let b = sample_vector(n, SeedSpec::new(0xB0D5, instance + 1));
        let Ok(inv) = Inverted::new(&a) else { continue };
        let ic = inv.inverse_condition();
        let sc = inv.solve_condition(&b).unwrap();
        for k in 0..n {
            for l in 0..n {
                let bound = cond_inv_bound(&a, k, l).unwrap();
                violations += usize::from(ic.entry(k, l).to_f64() > bound * SLACK);
                checks += 1;
            }
            let bound = cond_solve_bound(&a, &b, k).unwrap();
            violations += usize::from(sc.entries[k].to_f64() > bound * SLACK);
            checks += 1;
        }
        violations += usize::from(ic.mixed.to_f64() > ic.cond.to_f64() * SLACK);
        violations += usize::from(sc.mixed.to_f64() > sc.cond.to_f64() * SLACK);
        checks += 2;
    }
    Outcome::new(
        violations == 0,
        format!("{checks} inequalities, {violations} violations"),
    )
}

fn tail_theorems() -> Outcome {
    let grid = [1e5, 1e6, 1e7];
    let runs = [
        (Which::Det, 10, 100_000u64),
        (Which::Inv, 6, 10_000),
        (Which::Solve, 8, 10_000),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (which, n, trials) in runs {
        let pattern = Arc::new(Pattern::from_kind(PatternKind::LowerTriangular, n).unwrap());
        let curve =
            tail_experiment(which, &pattern, &grid, &McConfig::new(trials, 0x7A11)).unwrap();
        pass &= curve.within_bound();
        let cells: Vec<String> = (0..grid.len())
            .map(|i| {
                format!(
                    "{}<={:.4}",
                    curve.empirical[i],
                    curve.bound[i] + curve.slack(i)
                )
            })
            .collect();
        detail.push(format!("{which} n={n}: {}", cells.join(" ")));
    }
    Outcome::new(pass, detail.join("; "))
}

fn ratio_tail() -> Outcome {
    const CAUCHY_AT_2: f64 = 0.2952;
    let grid = [2.0, 4.0, 8.0, 16.0];
    let curve =
        stail_experiment(&e(5, 1), &e(5, 0), &grid, &McConfig::new(100_000, 0x57A1)).unwrap();
    let at2 = curve.empirical[0];
    let pass = (at2 - CAUCHY_AT_2).abs() <= 0.01 && at2 <= 0.5 && curve.within_bound();
    Outcome::new(pass, format!("empirical {:?} against 1/t", curve.empirical))
}

fn expected_logs() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [10, 20, 40] {
        let pattern = Arc::new(Pattern::from_kind(PatternKind::LowerTriangular, n).unwrap());
        for which in [Which::Det, Which::Inv, Which::Solve] {
            let r = expected_log_experiment(which, &pattern, 2.0, &McConfig::new(10_000, 0xE106))
                .unwrap();
            pass &= r.mean_logplus < r.bound;
            detail.push(format!(
                "{which} n={n}: {:.3}<{:.3}",
                r.mean_logplus, r.bound
            ));
        }
    }
    Outcome::new(pass, detail.join(" "))
}

fn regression_slopes() -> Outcome {
    let sizes = [10, 20, 40, 80, 160, 320];
    let cfg = McConfig::new(200, 0x510E);
    let comp = slope_experiment(SlopeTarget::InvComp, &sizes, &cfg).unwrap();
    let mixed = slope_experiment(SlopeTarget::InvMixed, &sizes, &cfg).unwrap();
    let comp_ok = (2.5..=3.7).contains(&comp.fit.slope);
    let mixed_ok = (1.1..=2.0).contains(&mixed.fit.slope);
    Outcome::new(
        comp_ok && mixed_ok,
        format!(
            "componentwise slope {:.4} in [2.5, 3.7]: {comp_ok}; mixed slope {:.4} in [1.1, 2.0]: {mixed_ok}",
            comp.fit.slope, mixed.fit.slope
        ),
    )
}

fn normwise_gap() -> Outcome {
    let cfg = McConfig::new(50, 0x6A90);
    let big = &kappa_experiment(&[256], &cfg).unwrap()[0];
    let mid = &kappa_experiment(&[128], &cfg).unwrap()[0];
    let root_ok = (1.7..=2.3).contains(&big.mean_kappa_root);
    let gap_ok = mid.mean_log2_kappa > 10.0 * mid.mean_log2_cond_inv;
    Outcome::new(
        root_ok && gap_ok,
        format!(
            "n=256 mean kappa^(1/n) {:.4} in [1.7, 2.3]: {root_ok}; n=128 mean log2 kappa {:.3} > 10 x {:.3}: {gap_ok}",
            big.mean_kappa_root, mid.mean_log2_kappa, mid.mean_log2_cond_inv
        ),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn accuracy_audit() -> Outcome {
    let trials = accuracy_experiment(100, &McConfig::new(1000, 0xACC0)).unwrap();
    let within = trials
        .iter()
        .filter(|t| t.observed <= 50.0 * t.predictor)
        .count();
    let frac = within as f64 / trials.len() as f64;
    let med_obs = median(trials.iter().map(|t| t.observed).collect());
    let med_kappa = median(trials.iter().map(|t| t.log2_kappa).collect());
    let pass = frac >= 0.99 && med_kappa >= 30.0 && med_obs <= 1e-10;
    Outcome::new(
        pass,
        format!("{frac:.3} within 50x predictor, median error {med_obs:.3e}, median log2 kappa {med_kappa:.1}"),
    )
}

fn structural_dichotomy() -> Outcome {
    let mut stream = GaussianStream::new(SeedSpec::new(0xD1C0, 0));
    let (mut deficient, mut full) = (Vec::new(), Vec::new());
    while deficient.len() < 20 || full.len() < 20 {
        let n = 2 + (stream.next_u64() % 7) as usize;
        let density = 0.15 + 0.5 * stream.next_open01();
        let p = Arc::new(random_pattern(&mut stream, n, density));
        if p.is_empty() {
            continue;
        }
        if p.is_structurally_nonsingular() {
            if full.len() < 20 {
                full.push(p);
            }
        } else if deficient.len() < 20 {
            deficient.push(p);
        }
    }
    let mut bad = 0usize;
    for (idx, p) in deficient.iter().enumerate() {
        for trial in 0..100 {
            let a = sample_matrix(p, SeedSpec::new(0xD1C1 + idx as u64, trial));
            let exact_zero = det_laplace(&a).unwrap() == 0.0;
            bad += usize::from(!exact_zero || cond_det(&a) != CondValue::Zero);
        }
    }
    for (idx, p) in full.iter().enumerate() {
        for trial in 0..100 {
            let a = sample_matrix(p, SeedSpec::new(0xF011 + idx as u64, trial));
            let nonsingular = factorize(&a).map(|f| f.det() != 0.0).unwrap_or(false);
            bad += usize::from(!nonsingular);
        }
    }
    Outcome::new(
        bad == 0,
        format!("4000 samples over 40 patterns, {bad} mismatches"),
    )
}

fn determinism() -> Outcome {
    let lower = Arc::new(Pattern::from_kind(PatternKind::LowerTriangular, 8).unwrap());
    let render = |threads: usize| -> Vec<String> {
        let cfg = McConfig::new(3000, 0xDE7).with_threads(threads);
        let small = McConfig::new(60, 0xDE7).with_threads(threads);
        vec![
            csv::tail(&tail_experiment(Which::Solve, &lower, &[100.0, 1e3, 1e4], &cfg).unwrap()),
            csv::explog(&[expected_log_experiment(Which::Inv, &lower, 2.0, &cfg).unwrap()]),
            csv::stail(&stail_experiment(&e(3, 1), &e(3, 0), &[2.0, 4.0], &cfg).unwrap()),
            csv::slope(&slope_experiment(SlopeTarget::InvMixed, &[8, 16, 32], &small).unwrap()),
            csv::kappa(&kappa_experiment(&[16, 32], &small).unwrap()),
            csv::accuracy(&accuracy_experiment(30, &small).unwrap()),
        ]
    };
    let one = render(1);
    let eight = render(8);
    let again = render(8);
    let same = one == eight && eight == again;
    Outcome::new(
        same,
        format!("{} CSV documents compared at 1 and 8 threads", one.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (
            "closed forms match brute-force enumeration",
            oracle_equivalence,
            Duration::from_secs(60),
        ),
        (
            "hand-computed goldens",
            hand_goldens,
            Duration::from_secs(60),
        ),
        (
            "upper-bound inequalities on random instances",
            bound_inequalities,
            Duration::from_secs(120),
        ),
        (
            "tail frequencies below theorem bounds",
            tail_theorems,
            Duration::from_secs(120),
        ),
        ("Gaussian ratio tail", ratio_tail, Duration::from_secs(30)),
        (
            "expected log+ below corollary bounds",
            expected_logs,
            Duration::from_secs(300),
        ),
        (
            "log-log regression slopes",
            regression_slopes,
            Duration::from_secs(900),
        ),
        (
            "normwise against componentwise growth",
            normwise_gap,
            Duration::from_secs(120),
        ),
        (
            "substitution accuracy audit",
            accuracy_audit,
            Duration::from_secs(180),
        ),
        (
            "structural rank dichotomy",
            structural_dichotomy,
            Duration::from_secs(60),
        ),
        (
            "thread-count independent CSV",
            determinism,
            Duration::from_secs(60),
        ),
    ];
    let mut failed = 0;
    for (idx, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed < *limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} [{:.1}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            idx + 1,
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Acceptance suite. Runs every top-level criterion, prints one line per
//! criterion and exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use spinmarket::analytics::{
    aggregate_drift, aggregate_variance, log_price, risk_frontier, stationary_distribution, RegionKind, RegionSolver,
};
use spinmarket::kernel::transition_probs;
use spinmarket::sim::{lattice_one_step, Fidelity, McConfig, Trajectory};
use spinmarket::sojourn::{detect_crossings, fit_log_tail, GridSpec, TailFit};
use spinmarket::{Params, TransitionProbs};
use spinmarket_cli::commands::{frontier, invariant, regions};
use spinmarket_cli::config::RunConfig;

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// ---------------------------------------------------------------- tables

fn g_table() -> Outcome {
    let checks = regions::check_paper_table();
    let good = checks.iter().filter(|c| c.matches()).count();
    outcome(good == 14 && checks.len() == 14, format!("{good}/{} rows match", checks.len()))
}

fn merged_interval() -> Outcome {
    let p = Params::new(128, 2, 6.0, 1.0).unwrap();
    let r = RegionSolver::new(&p).unwrap().solve(1.0).unwrap();
    let pass = r.kind == RegionKind::Merged && r.intervals() == vec![(43, 85)];
    outcome(pass, format!("{} {:?}", r.kind, r.intervals()))
}

#[allow(clippy::needless_range_loop)]
fn monotonicity() -> Outcome {
    let alphas = [4.1, 5.0, 6.0];
    let lambdas = [7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0, 64.0];
    let grid: Vec<Vec<[Option<usize>; 4]>> = alphas
        .iter()
        .map(|&a| {
            let solver = RegionSolver::new(&Params::new(128, 2, a, 1.0).unwrap()).unwrap();
            lambdas.iter().map(|&l| solver.solve(l).unwrap().boundaries()).collect()
        })
        .collect();
    let kinds: Vec<Vec<RegionKind>> = alphas
        .iter()
        .map(|&a| {
            let solver = RegionSolver::new(&Params::new(128, 2, a, 1.0).unwrap()).unwrap();
            lambdas.iter().map(|&l| solver.solve(l).unwrap().kind).collect()
        })
        .collect();
    let mut failures = Vec::new();
    // pairs of present cells along one axis must be ordered
    let mut check = |name: &str, k: usize, along_alpha: bool, increasing: bool| {
        let (outer, inner) = if along_alpha { (lambdas.len(), alphas.len()) } else { (alphas.len(), lambdas.len()) };
        for o in 0..outer {
            let seq: Vec<usize> =
                (0..inner).filter_map(|x| if along_alpha { grid[x][o][k] } else { grid[o][x][k] }).collect();
            let ok = seq.windows(2).all(|w| if increasing { w[0] <= w[1] } else { w[0] >= w[1] });
            if !ok {
                failures.push(format!("{name} at slice {o}: {seq:?}"));
            }
        }
    };
    check("g1 in alpha", 0, true, true);
    check("g2 in lambda", 1, false, false);
    check("g3 in lambda", 2, false, true);
    check("g4 in lambda", 3, false, true);
    check("g4 in alpha", 3, true, false);
    // kinds run Merged, then TwoIntervals, then UpperOnly as lambda grows
    let rank = |k: RegionKind| match k {
        RegionKind::Merged => 0,
        RegionKind::TwoIntervals => 1,
        RegionKind::UpperOnly => 2,
    };
    for (a, ks) in alphas.iter().zip(&kinds) {
        if !ks.windows(2).all(|w| rank(w[0]) <= rank(w[1]))
            || ks[0] != RegionKind::Merged
            || ks[ks.len() - 1] != RegionKind::UpperOnly
        {
            failures.push(format!("kind order at alpha={a}: {ks:?}"));
        }
    }
    for row in spinmarket_cli::paper_table::ROWS.iter() {
        let (Some(ai), Some(li)) =
            (alphas.iter().position(|&a| a == row.alpha), lambdas.iter().position(|&l| l == row.lambda))
        else {
            continue;
        };
        let blanks: Vec<bool> = grid[ai][li].iter().map(Option::is_none).collect();
        if blanks != row.g.iter().map(Option::is_none).collect::<Vec<_>>() {
            failures.push(format!("blank pattern at alpha={} lambda={}", row.alpha, row.lambda));
        }
    }
    let summary: Vec<String> = alphas
        .iter()
        .zip(&kinds)
        .map(|(a, ks)| {
            let two: Vec<String> = lambdas
                .iter()
                .zip(ks)
                .filter(|(_, k)| **k == RegionKind::TwoIntervals)
                .map(|(l, _)| l.to_string())
                .collect();
            format!("alpha={a}: two intervals at lambda {{{}}}", two.join(","))
        })
        .collect();
    if failures.is_empty() {
        outcome(true, summary.join("; "))
    } else {
        outcome(false, failures.join("; "))
    }
}

fn small_lambda_equilibria() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for alpha in [4.1, 5.0, 6.0] {
        let p = Params::new(128, 2, alpha, 0.01).unwrap();
        let r = RegionSolver::new(&p).unwrap().solve(0.01).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        let ok = r.g1 == Some(pi.lower_mode()) && r.g4 == Some(pi.upper_mode());
        pass &= ok;
        parts.push(format!("alpha={alpha}: g1={:?} g4={:?} modes {} {}", r.g1, r.g4, pi.lower_mode(), pi.upper_mode()));
    }
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------- kernel

/// Up/down probabilities by direct enumeration of every site and every
/// unordered `2d`-subset of the other sites.
fn enumerate(n: usize, d: usize, alpha: f64, i: usize) -> (f64, f64) {
    let spins: Vec<f64> = (0..n).map(|k| if k < i { 1.0 } else { -1.0 }).collect();
    let magnetization = (2.0 * i as f64 - n as f64).abs() / n as f64;
    let (mut up, mut down, mut total) = (0.0, 0.0, 0.0);
    for x in 0..n {
        let others: Vec<usize> = (0..n).filter(|&y| y != x).collect();
        let mut idx: Vec<usize> = (0..2 * d).collect();
        loop {
            let s: f64 = idx.iter().map(|&k| spins[others[k]]).sum();
            let h = s - alpha * spins[x] * magnetization;
            let new = if h.abs() < 1e-9 { spins[x] } else { h.signum() };
            total += 1.0;
            if new > spins[x] {
                up += 1.0;
            } else if new < spins[x] {
                down += 1.0;
            }
            // next combination in lexicographic order
            let m = others.len();
            let Some(pos) = (0..idx.len()).rev().find(|&p| idx[p] < m - idx.len() + p) else { break };
            idx[pos] += 1;
            for q in pos + 1..idx.len() {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    (up / total, down / total)
}

fn kernel_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for alpha in [2.5, 3.0] {
        for n in 4..=12 {
            let p = Params::new(n, 1, alpha, 1.0).unwrap();
            for i in 0..=n {
                let t = transition_probs(&p, i).unwrap();
                let (up, down) = enumerate(n, 1, alpha, i);
                worst = worst.max((t.p_mp - up).abs()).max((t.p_pm - down).abs());
                cases += 1;
            }
        }
    }
    outcome(worst < 1e-10, format!("{cases} states, max abs error {worst:.2e}"))
}

fn lattice_equivalence() -> Outcome {
    let p = Params::new(128, 2, 6.0, 1.0).unwrap();
    let cfg = McConfig { trials: 1_000_000, seed: 42, ..Default::default() };
    let mut parts = Vec::new();
    let mut pass = true;
    for i in [10, 43, 64, 85, 118] {
        let s = lattice_one_step(&p, i, None, &cfg).unwrap();
        let test = s.chi_square(&transition_probs(&p, i).unwrap());
        pass &= test.p_value > 0.001;
        parts.push(format!("i={i} p={:.3}", test.p_value));
    }
    outcome(pass, parts.join(", "))
}

/// Variance with the cross term's sign reversed, reported when the closed
/// form disagrees with simulation.
fn flipped_variance(p: &Params, t: &TransitionProbs, price: f64) -> f64 {
    let n = p.n as f64;
    let m = 2.0 * t.i as f64 - n;
    let g = (2.0 * p.lambda / n).exp_m1();
    let e = (-2.0 * p.lambda / n).exp();
    let (a, b) = (t.p_mp, t.p_pm);
    price
        * price
        * g
        * g
        * ((m + 1.0).powi(2) * a * (1.0 - a) + e * e * (m - 1.0).powi(2) * b * (1.0 - b)
            - 2.0 * e * a * b * (m * m - 1.0))
}

fn drift_and_variance() -> Outcome {
    let p = Params::new(128, 2, 6.0, 1.0).unwrap();
    let states = [5, 20, 33, 43, 50, 64, 78, 85, 100, 120];
    let mut worst_mean: f64 = 0.0;
    let mut worst_var: f64 = 0.0;
    let mut worst_flip: f64 = 0.0;
    for (k, &i) in states.iter().enumerate() {
        let cfg = McConfig { trials: 1_000_000, seed: 1000 + k as u64, ..Default::default() };
        let s = lattice_one_step(&p, i, None, &cfg).unwrap();
        let price = log_price(&p, i).exp();
        let mean = aggregate_drift(&p, i, price).unwrap();
        let var = aggregate_variance(&p, i, price).unwrap();
        let flipped = flipped_variance(&p, &transition_probs(&p, i).unwrap(), price);
        let se_v = s.dw.standard_error_of_variance();
        worst_mean = worst_mean.max((mean - s.dw.mean()).abs() / s.dw.standard_error_of_mean());
        worst_var = worst_var.max((var - s.dw.variance()).abs() / se_v);
        worst_flip = worst_flip.max((flipped - s.dw.variance()).abs() / se_v);
    }
    let pass = worst_mean <= 3.0 && worst_var <= 3.0;
    let mut detail = format!("10 states, worst |z| mean {worst_mean:.2}, variance {worst_var:.2}");
    if worst_var > 3.0 {
        detail.push_str(&format!("; variance as printed disagrees, sign-flipped cross term worst |z| {worst_flip:.2}"));
    }
    outcome(pass, detail)
}

// ---------------------------------------------------------------- paths

fn ergodic_occupancy() -> Outcome {
    let cfg = RunConfig { steps: 100_000, fidelity: Fidelity::Reduced, ..RunConfig::default() };
    let res = invariant::compute(&cfg, 0.1).unwrap();
    let emp = res.empirical.unwrap();
    let occ = &emp.occupancy;
    let (lo, hi) = (invariant::argmax(occ, 0..64), invariant::argmax(occ, 65..129));
    // every local maximum of the exact law is a strict local maximum of the occupancy
    let trimodal =
        res.local_maxima.len() == 3 && res.local_maxima.iter().all(|&m| occ[m] > occ[m - 1] && occ[m] > occ[m + 1]);
    let pass = emp.tv < 0.05 && lo == 43 && hi == 85 && trimodal;
    // longer run on the same seed, for context only
    let long = RunConfig { steps: 10_000_000, ..cfg.clone() };
    let long_tv = invariant::compute(&long, 0.1).unwrap().empirical.unwrap().tv;
    outcome(
        pass,
        format!(
            "seed {}: TV {:.4} (threshold 0.05), off-centre modes {lo} / {hi}, modes of pi {:?} {} in the occupancy; TV after 1e7 steps {long_tv:.4}",
            cfg.seed,
            emp.tv,
            res.local_maxima,
            if trimodal { "all peak" } else { "do not all peak" },
        ),
    )
}

fn risk_asymmetry() -> Outcome {
    let p = Params::new(128, 2, 6.0, 1.0).unwrap();
    let states: Vec<usize> = (0..=128).collect();
    let points = risk_frontier(&p, &states).unwrap();
    let ext = frontier::branch_extremes(&points);
    let detail = ext
        .iter()
        .map(|(b, (sd, mean))| format!("{b}: max sd {sd:.4}, min mean {mean:.4}"))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(frontier::asymmetry_holds(&points), detail)
}

// ---------------------------------------------------------------- sojourn

fn brute_force(states: &[usize], r: usize) -> Vec<u64> {
    (1..states.len().saturating_sub(1))
        .filter(|&k| {
            let (a, b, c) = (states[k - 1], states[k], states[k + 1]);
            b == r && ((a < r && r < c) || (a > r && r > c))
        })
        .map(|k| k as u64)
        .collect()
}

fn curve_error(fit: &TailFit, planted: impl Fn(f64) -> f64) -> f64 {
    let worst = (0..=200)
        .map(|k| fit.t_min + (fit.t_max - fit.t_min) * k as f64 / 200.0)
        .map(|t| (fit.log_survival(t) - planted(t)).abs())
        .fold(0.0, f64::max);
    worst / planted(fit.t_max).abs()
}

fn sojourn_machinery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatched = 0;
    for _ in 0..100 {
        let mut s = vec![rng.random_range(0..=20usize)];
        for _ in 0..5000 {
            let cur = *s.last().unwrap() as i64;
            s.push((cur + rng.random_range(-1..=1i64)).clamp(0, 20) as usize);
        }
        let traj = Trajectory::from_states(&s);
        for r in 0..=20 {
            let found: Vec<u64> = detect_crossings(&traj, r).iter().map(|c| c.epoch).collect();
            mismatched += usize::from(found != brute_force(&s, r));
        }
    }
    let draw = |seed: u64, f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..100_000).map(|_| f(Exp1.sample(&mut rng))).collect()
    };
    let spec = GridSpec::default();
    let exp_fit = fit_log_tail(&draw(1, &|e| e / 0.5), &spec).unwrap();
    let cub_fit = fit_log_tail(&draw(2, &|e| (e / 0.001).cbrt()), &spec).unwrap();
    let c1_err = (exp_fit.coefficients[1] + 0.5).abs() / 0.5;
    let c3_err = (cub_fit.coefficients[3] + 0.001).abs() / 0.001;
    let exp_curve = curve_error(&exp_fit, |t| -0.5 * t);
    let cub_curve = curve_error(&cub_fit, |t| -0.001 * t.powi(3));
    let pass = mismatched == 0 && c1_err < 0.1 && c3_err < 0.1 && exp_curve < 0.1 && cub_curve < 0.1;
    outcome(
        pass,
        format!(
            "detector mismatches {mismatched}/2100; exponential C1 off {:.1}%, curve {:.1}%; cubic C3 off {:.1}%, curve {:.1}%",
            100.0 * c1_err,
            100.0 * exp_curve,
            100.0 * c3_err,
            100.0 * cub_curve
        ),
    )
}

// ---------------------------------------------------------------- determinism

fn run_cli(args: &[&str], out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_spinmarket"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
        .status
        .code()
        .unwrap_or(-1)
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 6] = [
        &["regions", "--paper-table"],
        &["invariant", "--steps", "20000", "--fidelity", "reduced"],
        &["simulate", "--steps", "5000", "--alpha", "4.1", "--watch", "3,7"],
        &["frontier", "--steps", "3000"],
        &["sojourn", "--steps", "200000", "--fidelity", "reduced"],
        &["sweep", "--alphas", "3,4.1,6", "--lambdas", "1,9", "--steps", "2000"],
    ];
    let base = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for (k, args) in runs.iter().enumerate() {
        let (a, b) = (base.path().join(format!("{k}a")), base.path().join(format!("{k}b")));
        let codes = (run_cli(args, &a), run_cli(args, &b));
        if codes != (0, 0) {
            differing.push(format!("{} exited {codes:?}", args[0]));
            continue;
        }
        let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        for name in names {
            if std::fs::read(a.join(&name)).unwrap() != std::fs::read(b.join(&name)).unwrap() {
                differing.push(format!("{} {}", args[0], name.to_string_lossy()));
            }
        }
    }
    let pass = differing.is_empty();
    outcome(pass, if pass { "6 commands, all artifacts byte-identical".to_string() } else { differing.join("; ") })
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("g-table reproduction", Duration::from_secs(1), g_table),
        ("merged interval", Duration::from_secs(1), merged_interval),
        ("boundary monotonicity", Duration::from_secs(10), monotonicity),
        ("small-lambda equilibria", Duration::from_secs(5), small_lambda_equilibria),
        ("kernel oracle", Duration::from_secs(10), kernel_oracle),
        ("lattice/reduced equivalence", Duration::from_secs(60), lattice_equivalence),
        ("drift and variance", Duration::from_secs(120), drift_and_variance),
        ("ergodic occupancy", Duration::from_secs(10), ergodic_occupancy),
        ("risk asymmetry", Duration::from_secs(1), risk_asymmetry),
        ("sojourn machinery", Duration::from_secs(60), sojourn_machinery),
        ("determinism", Duration::from_secs(120), determinism),
    ];
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let start = Instant::now();
        let o = f();
        let elapsed = start.elapsed();
        let status = if o.pass { "PASS" } else { "FAIL" };
        let timing = if elapsed > budget { " OVER BUDGET" } else { "" };
        println!("{status} {name} [{:.2}s/{}s{timing}]: {}", elapsed.as_secs_f64(), budget.as_secs(), o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

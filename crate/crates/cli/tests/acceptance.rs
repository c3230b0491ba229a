//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbfbca::objectives::{self, subspace_trap};
use rbfbca::{solve, EvaluationPoint, Phase, SolverConfig, SolverMode, Surrogate, SymmetryGroup};
use rbfbca_cli::campaign::{run_campaign, without_timing, CampaignConfig, ObjectiveSpec, StartBox};
use rbfbca_cli::placement::{corner_heuristic, placement_coverage, run_placement};
use rbfbca_cli::scenario::two_obstacles;

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn scattered(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|_| (0..n).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect()
}

fn pyramid_fit(rng: &mut ChaCha8Rng, n: usize, k: usize) -> (Surrogate, Vec<EvaluationPoint>) {
    let f = objectives::pyramid_peak(n);
    let pts: Vec<EvaluationPoint> = scattered(rng, n, k)
        .into_iter()
        .map(|p| {
            let v = f.eval_fresh(&p).unwrap();
            EvaluationPoint::new(p, v)
        })
        .collect();
    (Surrogate::fit(&pts).unwrap(), pts)
}

fn interpolation() -> Outcome {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1A7E);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = 2 + i % 4;
        let k = rng.random_range(n + 1..=200);
        let (s, pts) = pyramid_fit(&mut rng, n, k);
        for p in &pts {
            let r = (s.evaluate(&p.point).unwrap() - p.value).abs() / (1.0 + p.value.abs());
            worst = worst.max(r);
        }
    }
    let elapsed = clock.elapsed();
    outcome(
        worst <= 1e-8 && elapsed < Duration::from_secs(30),
        format!("max scaled residual {worst:.2e} (<= 1e-8), {elapsed:.2?} (< 30 s)"),
    )
}

fn affine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAFF1);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let n = 1 + i % 5;
        let slope: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let c: f64 = rng.random_range(-5.0..5.0);
        let g = |x: &[f64]| c + x.iter().zip(&slope).map(|(a, b)| a * b).sum::<f64>();
        let pts: Vec<EvaluationPoint> = scattered(&mut rng, n, n + 10)
            .into_iter()
            .map(|p| {
                let v = g(&p);
                EvaluationPoint::new(p, v)
            })
            .collect();
        let s = Surrogate::fit(&pts).unwrap();
        for x in scattered(&mut rng, n, 100) {
            worst = worst.max((s.evaluate(&x).unwrap() - g(&x)).abs());
        }
    }
    outcome(worst <= 1e-7, format!("max error {worst:.2e} (<= 1e-7)"))
}

fn gradient() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6AD);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let n = 1 + i % 5;
        let k = n + 1 + rng.random_range(0..40);
        let (s, pts) = pyramid_fit(&mut rng, n, k);
        let mut probes = 0;
        while probes < 50 {
            let x = scattered(&mut rng, n, 1).pop().unwrap();
            let near = pts.iter().any(|p| {
                p.point
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    < 1e-4
            });
            if near {
                continue;
            }
            probes += 1;
            let g = s.gradient(&x).unwrap();
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let h = 1e-5 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt());
            for j in 0..n {
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[j] += h;
                xm[j] -= h;
                let fd = (s.evaluate(&xp).unwrap() - s.evaluate(&xm).unwrap()) / (2.0 * h);
                worst = worst.max((g[j] - fd).abs() / gnorm.max(1.0));
            }
        }
    }
    outcome(
        worst <= 1e-4,
        format!("max relative error {worst:.2e} over 1000 probes (<= 1e-4)"),
    )
}

fn exclusion() -> Outcome {
    let f = objectives::quantized_bowl(3);
    let config = SolverConfig {
        max_evals: 500,
        seed: 3,
        ..SolverConfig::synthetic()
    };
    let r = solve(&f, &SymmetryGroup::identity(3), &[5.0, 6.0, 7.0], &config).unwrap();
    let tol = 1e-6 * f.domain().diameter();
    let mut checked = 0;
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for (i, h) in r.history.iter().enumerate() {
        let Some(trace) = h.search else { continue };
        checked += 1;
        let gap = r.history[..i]
            .iter()
            .map(|p| {
                p.point
                    .iter()
                    .zip(&h.point)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        let slack = gap - (trace.beta_used * trace.delta - tol);
        worst = worst.min(slack);
        if slack < 0.0 {
            violations += 1;
        }
    }
    outcome(
        violations == 0 && checked > 0,
        format!(
            "{checked} search points over {} evals, {violations} violations, min slack {worst:.3e}",
            r.evals()
        ),
    )
}

fn trap_escape() -> Outcome {
    let clock = Instant::now();
    let mut c = CampaignConfig::new(
        ObjectiveSpec::Trap { block_width: 1 },
        vec![2],
        vec![SolverMode::RbfBca, SolverMode::GreedyCoordinate],
    );
    c.start_box = Some(StartBox::PerCoordinate(vec![[0.5, 0.5], [-0.5, -0.5]]));
    c.master_seed = 2024;
    let report = run_campaign(&c).unwrap();
    let values = |mode: SolverMode| -> Vec<f64> {
        report
            .runs
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| r.outcome.as_ref().map_or(f64::NAN, |m| m.best_value))
            .collect()
    };
    let rbf = values(SolverMode::RbfBca);
    let greedy = values(SolverMode::GreedyCoordinate);
    let escaped = rbf.iter().filter(|v| **v >= 19.0).count();
    let stuck = greedy.iter().filter(|v| **v <= 1.0).count();
    let elapsed = clock.elapsed();
    outcome(
        escaped >= 18 && stuck == 20 && elapsed < Duration::from_secs(120),
        format!(
            "rbf-bca >= 19 in {escaped}/20, greedy <= 1 in {stuck}/20 (max {:.5}), {elapsed:.1?}",
            greedy.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        ),
    )
}

fn synthetic_benchmark() -> Outcome {
    let mut c = CampaignConfig::new(
        ObjectiveSpec::Pyramid,
        vec![2, 3, 4, 5],
        vec![SolverMode::RbfBca, SolverMode::GreedyCoordinate],
    );
    c.start_box = Some(StartBox::Uniform([4.0, 9.0]));
    c.master_seed = 7;
    let report = run_campaign(&c).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 2..=5 {
        let dev = |mode| {
            report
                .group(mode, n)
                .and_then(|g| g.metric("deviation"))
                .map_or(f64::NAN, |s| s.mean)
        };
        let (r, g) = (dev(SolverMode::RbfBca), dev(SolverMode::GreedyCoordinate));
        pass &= r < g;
        parts.push(format!("n={n}: {r:.4} vs {g:.4}"));
    }
    let over_budget = report
        .runs
        .iter()
        .filter(|r| r.mode == SolverMode::RbfBca)
        .filter(|r| r.outcome.as_ref().map_or(true, |m| m.evals > 2000))
        .count();
    pass &= over_budget == 0;
    outcome(
        pass,
        format!(
            "mean deviation rbf-bca vs greedy: {}; runs over budget {over_budget}",
            parts.join(", ")
        ),
    )
}

fn complexity() -> Outcome {
    let f = subspace_trap(4, 1);
    let group = SymmetryGroup::identity(4);
    let mut sweep_rounds = Vec::new();
    let mut first_ok = true;
    let mut single_ok = true;
    for parallel in [false, true] {
        let config = SolverConfig {
            max_evals: 300,
            parallel_sweep: parallel,
            threads: 4,
            seed: 1,
            ..SolverConfig::synthetic()
        };
        let r = solve(&f, &group, &[1.0, -2.0, 3.0, 4.0], &config).unwrap();
        first_ok &= r.history[0].sigma_calls == 4 && r.counters.sigma_calls.iter().all(|&c| c >= 1);
        let mut per_sweep: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for h in &r.history {
            match h.phase {
                Phase::Subspace { sweep, .. } => {
                    single_ok &= h.sigma_calls == 1;
                    per_sweep.entry(sweep).or_default().push(h.round);
                }
                Phase::Recombine { sweep } => per_sweep.entry(sweep).or_default().push(h.round),
                _ => {}
            }
        }
        let mut counts: Vec<usize> = per_sweep
            .values()
            .filter(|v| v.len() == 5)
            .map(|v| {
                let mut d = v.clone();
                d.dedup();
                d.len()
            })
            .collect();
        counts.sort_unstable();
        counts.dedup();
        sweep_rounds.push(counts);
    }
    let pass = first_ok && single_ok && sweep_rounds[0] == [5] && sweep_rounds[1] == [2];
    outcome(
        pass,
        format!(
            "first eval 4 sigma-calls: {first_ok}, subspace evals 1 sigma-call: {single_ok}, rounds per sweep serial {:?} parallel {:?}",
            sweep_rounds[0], sweep_rounds[1]
        ),
    )
}

fn symmetry_payoff() -> Outcome {
    let f = subspace_trap(3, 1);
    let target = 0.9 * f.known_max().unwrap();
    let full = f.symmetry().clone();
    let none = SymmetryGroup::identity(3);
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED ^ seed);
        let x0: Vec<f64> = (0..3).map(|_| rng.random_range(-10.0..10.0)).collect();
        let config = SolverConfig {
            max_evals: 150,
            ..SolverConfig::synthetic().with_seed(seed)
        };
        let need = |g: &SymmetryGroup| {
            solve(&f, g, &x0, &config)
                .unwrap()
                .evals_to_reach(target)
                .unwrap_or(usize::MAX)
        };
        let (with, without) = (need(&full), need(&none));
        wins += (with < without) as usize;
        let show = |e: usize| {
            if e == usize::MAX {
                "none".to_string()
            } else {
                e.to_string()
            }
        };
        pairs.push(format!("{}/{}", show(with), show(without)));
    }
    outcome(
        wins >= 15,
        format!(
            "closure faster in {wins}/20 (evals with/without: {})",
            pairs.join(" ")
        ),
    )
}

fn coverage_placement() -> Outcome {
    let scene = two_obstacles();
    let corner = corner_heuristic(&scene);
    let corner_cov = placement_coverage(&scene, &corner).unwrap();
    let mut wins = 0;
    let mut lines = Vec::new();
    for seed in 0..10u64 {
        let config = SolverConfig::realistic().with_seed(seed);
        let rbf = run_placement(&scene, &config, false, Some(&corner), None).unwrap();
        let random = run_placement(
            &scene,
            &config.clone().with_mode(SolverMode::Random),
            false,
            None,
            None,
        )
        .unwrap();
        let h = &random.result.history;
        let random_mean = h.iter().map(|e| e.value).sum::<f64>() / h.len() as f64;
        let rbf_cov = rbf.result.best_value;
        wins += (rbf_cov >= corner_cov && corner_cov >= random_mean) as usize;
        lines.push(format!(
            "{:.1}@{}/{:.1}",
            100.0 * rbf_cov,
            rbf.result.evals(),
            100.0 * random_mean
        ));
    }
    outcome(
        wins >= 8,
        format!(
            "ordering holds in {wins}/10; corner {:.1}%, rbf-bca@evals/random-mean %: {}",
            100.0 * corner_cov,
            lines.join(" ")
        ),
    )
}

fn determinism() -> Outcome {
    let mut base = CampaignConfig::new(
        ObjectiveSpec::Trap { block_width: 1 },
        vec![3],
        vec![
            SolverMode::RbfBca,
            SolverMode::GreedyCoordinate,
            SolverMode::Random,
        ],
    );
    base.runs_per_group = 4;
    base.solver.max_evals = 150;
    base.master_seed = 99;
    let csv = |c: &CampaignConfig| {
        let r = run_campaign(c).unwrap();
        (
            without_timing(&r.runs_csv().unwrap()),
            without_timing(&r.summary_csv().unwrap()),
        )
    };
    let serial = csv(&base);
    let serial_again = csv(&base);
    let mut parallel = base.clone();
    parallel.workers = 3;
    parallel.solver.parallel_sweep = true;
    parallel.solver.threads = 3;
    let par = csv(&parallel);
    let par_again = csv(&parallel);
    let mut spread = base.clone();
    spread.workers = 3;
    let scheduled = csv(&spread);
    let pass = serial == serial_again && par == par_again && scheduled == serial;
    outcome(
        pass,
        format!(
            "serial rerun identical: {}, parallel rerun identical: {}, concurrent runs match serial: {}",
            serial == serial_again,
            par == par_again,
            scheduled == serial
        ),
    )
}

fn main() {
    let criteria: [Check; 10] = [
        ("surrogate interpolation", interpolation),
        ("affine reproduction", affine),
        ("gradient check", gradient),
        ("exclusion feasibility", exclusion),
        ("subspace-trap escape", trap_escape),
        ("synthetic benchmark", synthetic_benchmark),
        ("complexity accounting", complexity),
        ("symmetry payoff", symmetry_payoff),
        ("coverage placement", coverage_placement),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let clock = Instant::now();
        let o = check();
        println!(
            "{} {name}: {} [{:.1?}]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            clock.elapsed()
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}

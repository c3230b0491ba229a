use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rbfbca::{SolverConfig, SolverMode};
use rbfbca_cli::campaign::{load_campaign, run_campaign};
use rbfbca_cli::placement::{central_start, corner_heuristic, placement_coverage, run_placement};
use rbfbca_cli::scenario::{parse_scenario, two_obstacles};

#[derive(Parser)]
#[command(
    name = "rbfbca",
    version,
    about = "Surrogate block coordinate ascent for expensive black-box objectives"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Solver mode: rbf-bca, rbf-global, greedy-coordinate or random.
    #[arg(long)]
    mode: Option<SolverMode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-evals")]
    max_evals: Option<usize>,
    /// Worker threads for parallel sweeps and concurrent campaign runs.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Start {
    /// Cameras in the corners facing the room center.
    Corner,
    /// Every camera in the room center.
    Center,
}

impl Start {
    fn point(self, scene: &rbfbca::objectives::CoverageScene) -> Vec<f64> {
        match self {
            Start::Corner => corner_heuristic(scene),
            Start::Center => central_start(scene),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded campaign described by a TOML file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Optimize the camera placement of one scenario.
    Place {
        #[arg(long)]
        scenario: PathBuf,
        /// Insert symmetric images of every evaluated placement.
        #[arg(long)]
        closure: bool,
        #[arg(long, value_enum, default_value = "corner")]
        start: Start,
        #[command(flatten)]
        common: Common,
    },
    /// Compare solver, corner heuristic and random placement on the bundled scene.
    Demo {
        #[arg(long, value_enum, default_value = "corner")]
        start: Start,
        #[command(flatten)]
        common: Common,
    },
}

fn placement_config(common: &Common, mode: SolverMode) -> SolverConfig {
    let mut c = SolverConfig::realistic().with_mode(common.mode.unwrap_or(mode));
    if let Some(s) = common.seed {
        c.seed = s;
    }
    if let Some(m) = common.max_evals {
        c.max_evals = m;
    }
    if let Some(t) = common.threads {
        c.threads = t;
        c.parallel_sweep = t > 1;
    }
    c
}

fn bench(config: &Path, common: &Common) -> anyhow::Result<()> {
    let mut c = load_campaign(config)?;
    if let Some(m) = common.mode {
        c.modes = vec![m];
    }
    if let Some(s) = common.seed {
        c.master_seed = s;
    }
    if let Some(m) = common.max_evals {
        c.solver.max_evals = m;
    }
    if let Some(t) = common.threads {
        c.workers = t;
        c.solver.threads = t;
    }
    let report = run_campaign(&c)?;
    let (runs, summary) = report.write(&common.out)?;
    for g in &report.groups {
        let best = g.metric("best_value");
        let evals = g.metric("evals");
        print!("{:<18} n={:<3}", g.mode.name(), g.n);
        if let Some(s) = best {
            print!(" best min/mean/max {:.4}/{:.4}/{:.4}", s.min, s.mean, s.max);
        }
        if let Some(s) = g.metric("deviation") {
            print!("  deviation mean {:.4}", s.mean);
        }
        if let Some(s) = evals {
            print!("  evals mean {:.1}", s.mean);
        }
        println!();
    }
    let failed = report.runs.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        println!("{failed} run(s) failed; see the termination_reason column");
    }
    println!("wrote {} and {}", runs.display(), summary.display());
    Ok(())
}

fn place(scenario: &Path, closure: bool, start: Start, common: &Common) -> anyhow::Result<()> {
    let scene = parse_scenario(scenario)?;
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    let config = placement_config(common, SolverMode::RbfBca);
    let svg = common.out.join("placement.svg");
    let x0 = start.point(&scene);
    let r = run_placement(&scene, &config, closure, Some(&x0), Some(&svg))?;
    println!(
        "{}: coverage {:.2}% after {} evaluations ({} sequential rounds, {})",
        config.mode,
        r.coverage_percent,
        r.result.evals(),
        r.result.sequential_rounds,
        r.result.termination
    );
    for (m, cam) in r.result.best_point.chunks(3).enumerate() {
        println!(
            "  camera {m}: x={:.3} y={:.3} heading={:.1} deg",
            cam[0],
            cam[1],
            cam[2].to_degrees()
        );
    }
    println!("wrote {}", svg.display());
    Ok(())
}

fn demo(start: Start, common: &Common) -> anyhow::Result<()> {
    let scene = two_obstacles();
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    let corner = corner_heuristic(&scene);
    let corner_cov = placement_coverage(&scene, &corner)?;
    let corner_svg = common.out.join("demo_corner.svg");
    std::fs::write(
        &corner_svg,
        rbfbca_cli::render_svg(&scene, &corner, corner_cov),
    )?;
    println!("corner heuristic: coverage {:.2}%", 100.0 * corner_cov);
    for mode in [SolverMode::RbfBca, SolverMode::Random] {
        let config = SolverConfig {
            mode,
            ..placement_config(common, mode)
        };
        let svg = common.out.join(format!("demo_{}.svg", mode.name()));
        let x0 = start.point(&scene);
        let r = run_placement(&scene, &config, false, Some(&x0), Some(&svg))?;
        println!(
            "{}: coverage {:.2}% after {} evaluations",
            mode,
            r.coverage_percent,
            r.result.evals()
        );
    }
    println!("wrote SVG maps to {}", common.out.display());
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Bench { config, common } => bench(&config, &common),
        Command::Place {
            scenario,
            closure,
            start,
            common,
        } => place(&scenario, closure, start, &common),
        Command::Demo { start, common } => demo(start, &common),
    }
}

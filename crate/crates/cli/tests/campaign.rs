use rbfbca::SolverMode;
use rbfbca_cli::campaign::{
    parse_campaign, run_campaign, without_timing, CampaignConfig, ObjectiveSpec, StartBox,
};
use std::path::Path;

fn trap_campaign() -> CampaignConfig {
    let mut c = CampaignConfig::new(
        ObjectiveSpec::Trap { block_width: 1 },
        vec![2, 3],
        vec![SolverMode::RbfBca, SolverMode::Random],
    );
    c.runs_per_group = 3;
    c.solver.max_evals = 60;
    c.master_seed = 11;
    c
}

#[test]
fn reruns_are_identical_modulo_timing() {
    for (workers, parallel) in [(1, false), (2, true)] {
        let mut c = trap_campaign();
        c.workers = workers;
        c.solver.parallel_sweep = parallel;
        c.solver.threads = 2;
        let a = run_campaign(&c).unwrap();
        let b = run_campaign(&c).unwrap();
        assert_eq!(
            without_timing(&a.runs_csv().unwrap()),
            without_timing(&b.runs_csv().unwrap())
        );
        assert_eq!(
            without_timing(&a.summary_csv().unwrap()),
            without_timing(&b.summary_csv().unwrap())
        );
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let serial = run_campaign(&trap_campaign()).unwrap();
    let mut c = trap_campaign();
    c.workers = 3;
    let concurrent = run_campaign(&c).unwrap();
    assert_eq!(
        without_timing(&serial.runs_csv().unwrap()),
        without_timing(&concurrent.runs_csv().unwrap())
    );
}

#[test]
fn summary_matches_the_run_rows() {
    let report = run_campaign(&trap_campaign()).unwrap();
    let runs = report.runs_csv().unwrap();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(runs.as_bytes());
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12);
    for g in &report.groups {
        let best: Vec<f64> = rows
            .iter()
            .filter(|r| r[col("mode")] == *g.mode.name() && r[col("n")] == g.n.to_string())
            .map(|r| r[col("best_value")].parse().unwrap())
            .collect();
        let s = g.metric("best_value").unwrap();
        assert_eq!(s.runs, best.len());
        let mean = best.iter().sum::<f64>() / best.len() as f64;
        assert!((s.mean - mean).abs() <= 1e-12 * (1.0 + mean.abs()));
        assert_eq!(s.min, best.iter().copied().fold(f64::INFINITY, f64::min));
        assert_eq!(
            s.max,
            best.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        );
    }
}

#[test]
fn csv_starts_with_the_version_line() {
    let report = run_campaign(&trap_campaign()).unwrap();
    for text in [report.runs_csv().unwrap(), report.summary_csv().unwrap()] {
        assert_eq!(text.lines().next(), Some("# report_version=1"));
    }
    let header = report
        .runs_csv()
        .unwrap()
        .lines()
        .nth(1)
        .unwrap()
        .to_string();
    assert_eq!(
        header,
        "run_id,mode,seed,n,best_value,deviation,evals,sequential_rounds,delta_final,wall_ms,termination_reason"
    );
}

#[test]
fn campaign_files_parse_overrides() {
    let text = r#"
objective = "pyramid"
dims = [2, 3]
modes = ["rbf-bca", "greedy-coordinate"]
runs_per_group = 5
start_box = [4.0, 9.0]
master_seed = 42

[solver]
max_evals = 300
delta0 = 2.5
"#;
    let c = parse_campaign(text, Path::new(".")).unwrap();
    assert_eq!(c.dims, vec![2, 3]);
    assert_eq!(c.runs_per_group, 5);
    assert_eq!(c.solver.max_evals, 300);
    assert_eq!(c.solver.delta0, 2.5);
    assert_eq!(c.start_box, Some(StartBox::Uniform([4.0, 9.0])));
    assert!(parse_campaign(
        "objective = \"pyramid\"\nmodes = []\ndims=[2]\n",
        Path::new(".")
    )
    .is_err());
    assert!(parse_campaign(&format!("{text}\nbogus = 1\n"), Path::new(".")).is_err());
}

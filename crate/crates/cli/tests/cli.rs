use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use swarmx_core::campaign::{self, enumerate_grid, RunRecord};
use swarmx_core::xplain::{self, AttributionRow};
use swarmx_core::Topology;

fn swarmx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swarmx"))
        .args(args)
        .env("SWARMX_WORKERS", "1")
        .output()
        .expect("spawn swarmx")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Synthetic runs covering the full grid for one function, one run per
/// configuration, AOCC a simple function of the hyperparameters.
fn synthetic_runs(path: &Path, skip: Option<usize>) {
    let records: Vec<RunRecord> = enumerate_grid()
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, g)| RunRecord {
            topology: Topology::Star,
            config_index: i,
            c1: g.c1,
            c2: g.c2,
            w: g.w,
            n: g.n,
            k: g.k,
            p: g.p,
            r: g.r,
            fid: 1,
            iid: 1,
            run: 1,
            seed: i as u64,
            aocc: 0.5 * g.c1 + 0.2 * g.w - g.n as f64 / 1000.0,
            final_best: 0.0,
        })
        .collect();
    campaign::write_runs_csv(fs::File::create(path).unwrap(), &records).unwrap();
}

#[test]
fn run_reduced_grid_writes_25_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = swarmx(&["run", "--topology", "star", "--fids", "1", "--grid", "reduced", "--out", p(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 25);
    assert!(String::from_utf8_lossy(&out.stdout).contains("25 records"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("campaign.cfg");
    fs::write(&cfg, format!("topology = mesh\nfids = 1,2\nruns = 2\ngrid = reduced\nout = {}\n", p(dir.path()))).unwrap();
    let bad = swarmx(&["run", "--config", p(&cfg)]);
    assert_eq!(code(&bad), 2);
    let ok = swarmx(&["run", "--config", p(&cfg), "--topology", "ring", "--instances", "1"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let records = campaign::read_runs_csv(fs::File::open(dir.path().join("runs.csv")).unwrap()).unwrap();
    assert_eq!(records.len(), 2 * 2);
    assert!(records.iter().all(|r| r.topology == Topology::Ring));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = p(dir.path());
    assert_eq!(code(&swarmx(&["run", "--topology", "mesh", "--out", d])), 2);
    assert_eq!(code(&swarmx(&["run", "--topology", "star", "--fids", "7", "--out", d])), 2);
    assert_eq!(code(&swarmx(&["run", "--topology", "star", "--budget", "0", "--out", d])), 2);
    assert_eq!(code(&swarmx(&["frobnicate"])), 2);
    let workers = Command::new(env!("CARGO_BIN_EXE_swarmx"))
        .args(["run", "--topology", "star", "--grid", "reduced", "--fids", "1", "--out", d])
        .env("SWARMX_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&workers), 2);
}

#[test]
fn stats_rejects_empty_and_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let header = dir.path().join("header.csv");
    fs::write(&header, format!("{}\n", campaign::RUNS_HEADER.join(","))).unwrap();
    let out = dir.path().join("agg.csv");
    assert_eq!(code(&swarmx(&["stats", "--runs", p(&empty), "--out", p(&out)])), 1);
    assert_eq!(code(&swarmx(&["stats", "--runs", p(&header), "--out", p(&out)])), 1);
    assert_eq!(code(&swarmx(&["stats", "--runs", p(&dir.path().join("missing.csv")), "--out", p(&out)])), 1);
}

#[test]
fn stats_matches_hand_computation() {
    let dir = tempfile::tempdir().unwrap();
    let run = swarmx(&["run", "--topology", "vonneumann", "--fids", "1,3", "--grid", "reduced", "--runs", "2", "--instances", "2", "--out", p(dir.path())]);
    assert_eq!(code(&run), 0);
    let runs = dir.path().join("runs.csv");
    let agg = dir.path().join("aggregate.csv");
    assert_eq!(code(&swarmx(&["stats", "--runs", p(&runs), "--out", p(&agg)])), 0);

    let header = fs::read_to_string(&agg).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, campaign::AGGREGATE_HEADER.join(","));
    let records = campaign::read_runs_csv(fs::File::open(&runs).unwrap()).unwrap();
    let rows = campaign::read_aggregate_csv(fs::File::open(&agg).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let xs: Vec<f64> = records.iter().filter(|r| r.fid == row.fid).map(|r| r.aocc).collect();
        let m = xs.iter().sum::<f64>() / 4.0;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 3.0).sqrt();
        // One configuration: all three statistics coincide.
        for (mean, std) in [(row.single_best_mean, row.single_best_std), (row.avg_best_mean, row.avg_best_std), (row.all_mean, row.all_std)] {
            assert!((mean - m).abs() < 1e-12 && (std - sd).abs() < 1e-12);
        }
    }
}

#[test]
fn explain_exact_and_both() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.csv");
    synthetic_runs(&runs, None);

    let exact_dir = dir.path().join("exact");
    let out = swarmx(&["explain", "--runs", p(&runs), "--fid", "1", "--mode", "exact", "--trees", "5", "--out", p(&exact_dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = xplain::read_attributions_csv(fs::File::open(exact_dir.join("attr_f1.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1728 * 7);
    assert!(rows.iter().all(|r| r.shap_exact.is_some() && r.shap_surrogate.is_none()));
    let report = xplain::read_surrogate_csv(fs::File::open(exact_dir.join("surrogate_f1.csv")).unwrap()).unwrap();
    assert_eq!(report.len(), 1);

    let both_dir = dir.path().join("both");
    let out = swarmx(&["explain", "--runs", p(&runs), "--fid", "1", "--mode", "both", "--trees", "5", "--permutations", "8", "--out", p(&both_dir)]);
    assert_eq!(code(&out), 0);
    let rows: Vec<AttributionRow> = xplain::read_attributions_csv(fs::File::open(both_dir.join("attr_f1.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1728 * 7);
    assert!(rows.iter().all(|r| r.shap_exact.is_some() && r.shap_surrogate.is_some()));
}

#[test]
fn explain_rejects_incomplete_slice() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.csv");
    synthetic_runs(&runs, Some(700));
    let out = swarmx(&["explain", "--runs", p(&runs), "--fid", "1", "--mode", "exact", "--out", p(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid incomplete"));
    assert_eq!(code(&swarmx(&["explain", "--runs", p(&runs), "--fid", "1", "--mode", "fast", "--out", p(dir.path())])), 2);
}

#[test]
fn plot_bands_empty_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs.csv");
    synthetic_runs(&runs, None);
    assert_eq!(code(&swarmx(&["explain", "--runs", p(&runs), "--fid", "1", "--mode", "exact", "--trees", "2", "--out", p(dir.path())])), 0);
    let attr = dir.path().join("attr_f1.csv");
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    assert_eq!(code(&swarmx(&["plot", "--attributions", p(&attr), "--out", p(&a)])), 0);
    assert_eq!(code(&swarmx(&["plot", "--attributions", p(&attr), "--out", p(&b)])), 0);
    let svg = fs::read_to_string(&a).unwrap();
    assert_eq!(svg.matches(r#"class="band""#).count(), 7);
    assert_eq!(svg.matches("<circle").count(), 1728 * 7);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    // Bands follow descending mean |phi|: c1 dominates this target.
    let first_band = svg.split(r#"class="band""#).nth(1).unwrap();
    assert!(first_band.contains(">c1</text>"));

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, format!("{}\n", xplain::ATTRIBUTION_HEADER.join(","))).unwrap();
    let e = dir.path().join("empty.svg");
    assert_eq!(code(&swarmx(&["plot", "--attributions", p(&empty), "--out", p(&e)])), 0);
    let svg = fs::read_to_string(&e).unwrap();
    assert!(svg.contains("no data") && svg.contains("<line"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "fid,topology\n1,star,extra\n").unwrap();
    assert_eq!(code(&swarmx(&["plot", "--attributions", p(&bad), "--out", p(&e)])), 1);
}

use std::fs;
use std::process::{Command, Output};

use darkstate::fockspace::StateRecord;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_darkstate"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn classify_lists_the_chains() {
    let o = run(&["classify", "--transition", "2:1"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(",Lambda,")).count(), 2);
    assert!(text.contains("sqrt(3/10)") && text.contains("0.547722557505"));

    let o = run(&["classify", "--transition", "3/2:3/2", "--format", "json"]);
    let doc = stdout_json(&o);
    assert_eq!(doc["schema_version"], 1);
    let kinds: Vec<&str> = doc["chains"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, vec!["N+", "N-"]);

    let o = run(&["classify", "--transition", "1:3"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not dipole-allowed"));
}

#[test]
fn gds_v_chain_state_has_two_components() {
    let o = run(&[
        "gds",
        "--transition",
        "1:2",
        "--chain-index",
        "0",
        "--type",
        "v",
        "--m",
        "1",
        "--mprime",
        "1",
    ]);
    assert_eq!(code(&o), 0);
    let doc = stdout_json(&o);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["darkness"]["dark"], true);
    assert!(doc["darkness"]["residual"].as_f64().unwrap() <= 1e-10);
    let record = StateRecord::from_json_str(&doc["state"].to_string()).unwrap();
    assert_eq!(record.entries.len(), 2);
    let state = record.to_state().unwrap();
    assert!((state.norm() - 1.0).abs() < 1e-14);
    assert_eq!(
        StateRecord::from_state(&state, record.metadata.clone()).entries,
        record.entries
    );
}

#[test]
fn gds_constraint_messages_and_exit_codes() {
    let o = run(&[
        "gds",
        "--transition",
        "3/2:3/2",
        "--chain-index",
        "0",
        "--type",
        "n",
        "--m",
        "2",
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("(m ≤ L)"));

    let o = run(&[
        "gds",
        "--transition",
        "1:2",
        "--chain-index",
        "0",
        "--type",
        "v",
        "--m",
        "1",
        "--mprime",
        "0",
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("(m+m′) > L"));

    let o = run(&[
        "gds",
        "--transition",
        "3/2:1/2",
        "--chain-index",
        "0",
        "--type",
        "polariton",
        "--truncation",
        "2",
    ]);
    assert_eq!(code(&o), 3);

    let o = run(&[
        "gds",
        "--transition",
        "2:1",
        "--chain-index",
        "0",
        "--type",
        "lambda",
        "--phi",
        "fock:1",
    ]);
    assert_eq!(code(&o), 4);
    let o = run(&[
        "gds",
        "--transition",
        "2:1",
        "--chain-index",
        "9",
        "--type",
        "lambda",
    ]);
    assert_eq!(code(&o), 4);
    let o = run(&["gds", "--bogus"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn gds_photon_only_state_has_zero_residual() {
    let o = run(&[
        "gds",
        "--transition",
        "2:1",
        "--chain-index",
        "1",
        "--type",
        "lambda",
        "--n",
        "0",
        "--phi",
        "fock:2,1",
    ]);
    assert_eq!(code(&o), 0);
    let doc = stdout_json(&o);
    assert_eq!(doc["darkness"]["residual"].as_f64().unwrap(), 0.0);
    assert_eq!(doc["state"]["entries"].as_array().unwrap().len(), 1);
}

#[test]
fn gds_polariton_reports_the_coupling_it_checked() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let o = run(&[
        "gds",
        "--transition",
        "3/2:1/2",
        "--chain-index",
        "0",
        "--type",
        "polariton",
        "--m",
        "1",
        "--z",
        "0.7",
        "--force-equal-g",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["darkness"]["coupling"], "equalized");
    assert!(doc["darkness"]["residual"].as_f64().unwrap() <= 1e-10);
    assert!(doc["tail_mass"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn scan_default_sweep_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let o = run(&["scan", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "transition",
            "chain",
            "sector",
            "analytical_count",
            "oracle_dimension",
            "max_residual"
        ]
    );
    let mut lambda_rows = 0;
    for row in reader.records() {
        let row = row.unwrap();
        let count: u32 = row[3].parse().unwrap();
        let dim: usize = row[4].parse().unwrap();
        let residual: f64 = row[5].parse().unwrap();
        assert!(residual <= 1e-10);
        if row[1].contains("Lambda") && count == 1 {
            assert!(dim >= 1);
            lambda_rows += 1;
        }
        if row[1].contains(" V ") {
            let links: u32 = row[1].rsplit("L=").next().unwrap().parse().unwrap();
            let (m, mp) = sector_photons(&row[2]);
            if m + mp <= links {
                assert_eq!(dim, 0, "{row:?}");
            }
        }
    }
    assert!(lambda_rows > 0);
}

fn sector_photons(label: &str) -> (u32, u32) {
    if label == "unreachable" {
        return (0, 0);
    }
    let caps = label
        .split("caps=(")
        .nth(1)
        .unwrap()
        .split(')')
        .next()
        .unwrap();
    let (a, b) = caps.split_once(',').unwrap();
    (a.parse().unwrap(), b.parse().unwrap())
}

fn small_config(dir: &std::path::Path, trajectories: u32) -> std::path::PathBuf {
    let path = dir.join("filter.conf");
    fs::write(
        &path,
        format!(
            "# short run\ntransition = 3/2:3/2\natom_mu = -3/2\nn_plus = 3\nn_minus = 5\nweak = +\n\
             t_max = 8\ntrajectories = {trajectories}\nseed = 17\n"
        ),
    )
    .unwrap();
    path
}

#[test]
fn filter_is_reproducible_and_emits_both_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 12);
    let mut summaries = Vec::new();
    for k in 0..2 {
        let series = dir.path().join(format!("series{k}.csv"));
        let o = run(&[
            "filter",
            "--config",
            cfg.to_str().unwrap(),
            "--series",
            series.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let csv_text = fs::read_to_string(&series).unwrap();
        assert!(csv_text.starts_with("trajectory,t,residual,mean_weak,mean_excited"));
        assert!(csv_text.lines().count() > 12);
        summaries.push(o.stdout);
    }
    assert_eq!(summaries[0], summaries[1]);
    let doc: Value = serde_json::from_slice(&summaries[0]).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["trajectories"], 12);
    assert_eq!(doc["converged_dark"], doc["converged"]);
    let hist = doc["weak_histogram_converged"].as_array().unwrap();
    if doc["converged"].as_u64().unwrap() > 0 {
        let beyond: f64 = hist.iter().skip(2).map(|v| v.as_f64().unwrap()).sum();
        assert!(beyond <= 1e-12);
    }
}

#[test]
fn filter_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 0);
    let series = dir.path().join("s.csv");
    let o = run(&[
        "filter",
        "--config",
        cfg.to_str().unwrap(),
        "--series",
        series.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("trajectories"));

    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "colour = blue\n").unwrap();
    let o = run(&[
        "filter",
        "--config",
        bad.to_str().unwrap(),
        "--series",
        series.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);

    let o = run(&[
        "filter",
        "--config",
        dir.path().join("missing.conf").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn sample_config_parses() {
    let text =
        fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/filter.conf")).unwrap();
    let cfg = darkstate::filtersim::FilterConfig::from_kv_str(&text).unwrap();
    assert_eq!(cfg.trajectories, 200);
    assert_eq!(cfg.n_plus, 3);
}

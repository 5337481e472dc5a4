use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn cvoa(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cvoa")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const TEN_BITS: &str = "[codec]\nkind = \"binary\"\nbits = 10\n";

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|line| line.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn run_writes_the_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.toml", TEN_BITS);
    let out = dir.path().join("out");
    let status = cvoa(&["run", "--config", &config, "--seed", "5", "--out", out.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    let csv = fs::read_to_string(out.join("run-5/iterations.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("Iteration,Deaths,Recovered,Infected,Fitness"));
    let rows = csv_rows(&out.join("run-5/iterations.csv"));
    for pair in rows.windows(2) {
        assert_eq!(pair[1][0], pair[0][0] + 1.0);
        assert!(pair[1][1] >= pair[0][1] && pair[1][2] >= pair[0][2] && pair[1][4] <= pair[0][4]);
    }

    let best = fs::read_to_string(out.join("best.txt")).unwrap();
    assert_eq!(best.trim().len(), 10);
    assert!(best.trim().chars().all(|c| c == '0' || c == '1'));

    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"][0]["seed"], 5);
    assert_eq!(summary["runs"][0]["best_genotype"], best.trim());
    let fraction = summary["runs"][0]["evaluated_fraction"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&fraction));
}

#[test]
fn same_seed_gives_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.toml", TEN_BITS);
    for out in ["a", "b"] {
        let out = dir.path().join(out);
        assert!(cvoa(&["run", "--config", &config, "--seed", "12", "--out", out.to_str().unwrap()]).status.success());
    }
    let a = fs::read(dir.path().join("a/run-12/iterations.csv")).unwrap();
    let b = fs::read(dir.path().join("b/run-12/iterations.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        fs::read(dir.path().join("a/summary.json")).unwrap(),
        fs::read(dir.path().join("b/summary.json")).unwrap()
    );
}

#[test]
fn success_rate_matches_the_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.toml", &format!("repeat = 12\n{TEN_BITS}"));
    let out = dir.path().join("out");
    assert!(cvoa(&["run", "--config", &config, "--out", out.to_str().unwrap()]).status.success());
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let runs = summary["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 12);
    let reached = runs.iter().filter(|r| !r["iterations_to_optimum"].is_null()).count();
    let rate = summary["aggregates"]["success_rate"].as_f64().unwrap();
    assert_eq!(rate, reached as f64 / 12.0);
    for seed in 0..12 {
        assert!(out.join(format!("run-{seed}/iterations.csv")).exists());
    }
}

#[test]
fn invalid_config_exits_nonzero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.toml", "[codec]\nkind = \"binary\"\nbits = 80\n[epidemic]\np_travel = -1\n");
    let output = cvoa(&["run", "--config", &config]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("p_travel") && stderr.contains("80"), "{stderr}");

    let missing = cvoa(&["run", "--config", "/nonexistent/config.toml"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn evaluator_failure_exits_nonzero_and_keeps_the_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let counter = dir.path().join("calls");
    let script = dir.path().join("eval.sh");
    // Fails on the fifth evaluation.
    fs::write(
        &script,
        format!(
            "read line\necho x >> '{c}'\nif [ $(wc -l < '{c}') -ge 5 ]; then exit 1; fi\necho '{{\"fitness\": 1.5}}'\n",
            c = counter.display()
        ),
    )
    .unwrap();
    let text = format!(
        "[codec]\nkind = \"nn\"\ncommand = [\"sh\", \"{}\"]\n[epidemic]\np_die = 0.0\np_isolation = 0.0\nordinary_spread_range = {{ low = 1, high = 2 }}\n",
        script.display()
    );
    let config = write_config(dir.path(), "c.toml", &text);
    let out = dir.path().join("out");
    let output = cvoa(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(3), "{}", String::from_utf8_lossy(&output.stderr));
    let csv = fs::read_to_string(out.join("run-0/iterations.csv")).unwrap();
    assert!(csv.starts_with("Iteration,Deaths,Recovered,Infected,Fitness"));
    assert!(csv.lines().count() >= 2, "completed iterations are kept:\n{csv}");
    assert!(!out.join("summary.json").exists());
}

#[test]
fn sweep_emits_one_row_per_length() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.toml", &format!("repeat = 3\n{TEN_BITS}"));
    let out = dir.path().join("out");
    let output = cvoa(&["sweep", "--config", &config, "--lengths", "10,20", "--out", out.to_str().unwrap()]);
    assert!(output.status.success());
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(table, String::from_utf8(output.stdout).unwrap());
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("10,3,") && lines[2].starts_with("20,3,"));
    assert!(out.join("bits-20/summary.json").exists());
}

#[test]
fn sweep_rejects_the_nn_codec() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.toml", "[codec]\nkind = \"nn\"\nsurrogate = \"random\"\n");
    assert_eq!(cvoa(&["sweep", "--config", &config, "--lengths", "10"]).status.code(), Some(2));
}

#[test]
fn multi_strain_run_writes_a_trace_per_strain() {
    let dir = tempfile::tempdir().unwrap();
    let text = "pz_strategy = \"max_hamming_spread\"\n[codec]\nkind = \"binary\"\nbits = 16\n[epidemic]\nstrains = 3\nseed = 7\n";
    let config = write_config(dir.path(), "c.toml", text);
    let out = dir.path().join("out");
    assert!(cvoa(&["run", "--config", &config, "--out", out.to_str().unwrap()]).status.success());
    let combined = csv_rows(&out.join("run-7/iterations.csv"));
    let strains: Vec<_> = (0..3).map(|i| csv_rows(&out.join(format!("run-7/strain-{i}.csv")))).collect();
    let last = combined.last().unwrap();
    let best = strains.iter().map(|s| s.last().unwrap()[4]).fold(f64::INFINITY, f64::min);
    assert_eq!(last[4], best);
    let deaths: f64 = strains.iter().map(|s| s.last().unwrap()[1]).sum();
    assert_eq!(last[1], deaths);
}

#[test]
fn nn_surrogate_run_prints_architectures() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[codec]\nkind = \"nn\"\nsurrogate = \"{4,0,8}{9,7,2,7,2,7,10,7}\"\n";
    let config = write_config(dir.path(), "c.toml", text);
    let out = dir.path().join("out");
    assert!(cvoa(&["run", "--config", &config, "--out", out.to_str().unwrap()]).status.success());
    let best = fs::read_to_string(out.join("best.txt")).unwrap();
    assert!(best.trim().parse::<cvoa::nn::NetGenotype>().is_ok(), "{best}");
}

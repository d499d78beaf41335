use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const COMMANDS: [&str; 9] = [
    "mcp-census",
    "entropy-sweep",
    "hopfield",
    "ising",
    "reduce",
    "concept-train",
    "concept-infer",
    "concept-diversity",
    "gen-dataset",
];

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn enlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        cmd,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    enlab(&args)
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn meta(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Trains a store from the sample dataset into `dir` and returns configs for
/// the store-reading commands.
fn with_store(dir: &Path) -> (PathBuf, PathBuf) {
    let o = run_in(
        "concept-train",
        &configs().join("concept-train.conf"),
        dir,
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let store = dir.join("concepts.json");
    let data = configs().join("data/strokes.jsonl");
    let infer = write_config(
        dir,
        "infer.conf",
        &format!(
            "store = {}\ndataset = {}\n",
            store.display(),
            data.display()
        ),
    );
    let div = write_config(dir, "div.conf", &format!("store = {}\n", store.display()));
    (infer, div)
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn every_command_is_byte_identical_across_runs() {
    let stores = TempDir::new().unwrap();
    let (infer, div) = with_store(stores.path());
    for format in ["csv", "json"] {
        for cmd in COMMANDS {
            let config = match cmd {
                "concept-infer" => infer.clone(),
                "concept-diversity" => div.clone(),
                _ => configs().join(format!("{cmd}.conf")),
            };
            let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
            for d in [&a, &b] {
                let o = run_in(cmd, &config, d.path(), &["--format", format]);
                assert!(
                    o.status.success(),
                    "{cmd}: {}",
                    String::from_utf8_lossy(&o.stderr)
                );
            }
            assert_eq!(
                dir_bytes(a.path()),
                dir_bytes(b.path()),
                "{cmd} --format {format}"
            );
        }
    }
}

#[test]
fn seed_flag_overrides_config_seed() {
    let cfg = configs().join("ising.conf");
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    run_in("ising", &cfg, a.path(), &["--seed", "11"]);
    run_in("ising", &cfg, b.path(), &["--seed", "12"]);
    assert_ne!(
        std::fs::read(a.path().join("ising.csv")).unwrap(),
        std::fs::read(b.path().join("ising.csv")).unwrap()
    );
    assert_eq!(meta(&a.path().join("ising.meta.json"))["seed"], 11);
}

#[test]
fn census_row_and_json_equivalence() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.conf", "weights = 1, 1\nthreshold = 0\n");
    assert!(run_in("mcp-census", &cfg, dir.path(), &[]).status.success());
    let rows = csv_rows(&dir.path().join("mcp-census.csv"));
    assert_eq!(rows.len(), 2);
    let col = |name: &str| rows[0].iter().position(|c| c == name).unwrap();
    assert_eq!(rows[1][col("p_act")], "3/4");
    assert_eq!(rows[1][col("p_act_value")], "0.75");

    assert!(
        run_in("mcp-census", &cfg, dir.path(), &["--format", "json"])
            .status
            .success()
    );
    let doc = meta(&dir.path().join("mcp-census.json"));
    let cols: Vec<&str> = doc["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    let row = &doc["rows"][0];
    assert_eq!(
        row[cols.iter().position(|&c| c == "p_act_value").unwrap()],
        0.75
    );
    assert_eq!(row[cols.iter().position(|&c| c == "omega_act").unwrap()], 3);
    assert_eq!(doc["meta"]["command"], "mcp-census");
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let code = |cmd: &str, text: &str| {
        let cfg = write_config(d, "x.conf", text);
        run_in(cmd, &cfg, d, &[]).status.code().unwrap()
    };
    assert_eq!(code("mcp-census", "weights = 1.5, 0\n"), 2);
    let wide = vec!["0.5"; 25].join(",");
    assert_eq!(code("mcp-census", &format!("weights = {wide}\n")), 3);
    assert_eq!(code("mcp-census", "weights = 1\nbogus = 1\n"), 2);
    assert_eq!(code("entropy-sweep", "grid =\n"), 2);
    assert_eq!(code("entropy-sweep", "inputs = 30\ngrid = 0, 1\n"), 3);
    assert_eq!(
        code("ising", "spins = 4\ntemperature = -1\nsweeps = 1\n"),
        2
    );
    assert_eq!(
        code("concept-infer", "store = missing.json\ndataset = x.jsonl\n"),
        1
    );
    assert_eq!(
        enlab(&["hopfield", "--config", "/nonexistent.conf"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        enlab(&["no-such-command", "--config", "x"]).status.code(),
        Some(2)
    );
}

#[test]
fn entropy_sweep_flags_half_activation_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.conf",
        "inputs = 2\ngrid = -1, 0, 1\nthreshold = 0\n",
    );
    assert!(run_in("entropy-sweep", &cfg, dir.path(), &[])
        .status
        .success());
    let rows = csv_rows(&dir.path().join("entropy-sweep.csv"));
    assert_eq!(rows.len(), 10);
    for r in &rows[1..] {
        assert_eq!(r[5] == "true", r[2] == "1/2", "{r:?}");
    }
    assert!(rows[1..].iter().any(|r| r[5] == "true"));
}

#[test]
fn hopfield_recovers_single_corrupted_bit() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "h.conf",
        "patterns = ++-+--+-+\ncorrupt_bits = 1\ntrials = 9\n",
    );
    assert!(run_in("hopfield", &cfg, dir.path(), &[]).status.success());
    let m = meta(&dir.path().join("hopfield.meta.json"));
    for t in m["summary"]["trials"].as_array().unwrap() {
        assert_eq!(t["converged"], true);
        assert_eq!(t["recalled_pattern"], 0);
        assert_eq!(t["final_state"], "++-+--+-+");
    }
    let rows = csv_rows(&dir.path().join("hopfield.csv"));
    for w in rows[1..].windows(2).filter(|w| w[0][0] == w[1][0]) {
        assert!(w[1][3].parse::<f64>().unwrap() <= w[0][3].parse::<f64>().unwrap());
    }
}

#[test]
fn hopfield_rejects_asymmetric_weight_file() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("w.txt"), "0 1\n0.5 0\n").unwrap();
    let cfg = write_config(dir.path(), "h.conf", "weights = w.txt\ninitial = +-\n");
    let o = run_in("hopfield", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(dir.path().join("w.txt"), "0 1\n1 0\n").unwrap();
    assert!(run_in("hopfield", &cfg, dir.path(), &[]).status.success());
}

#[test]
fn ising_without_sweeps_echoes_initial_state() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "i.conf",
        "spins = 5\ntemperature = 1\nsweeps = 0\ninitial = +-++-\n",
    );
    assert!(run_in("ising", &cfg, dir.path(), &[]).status.success());
    let rows = csv_rows(&dir.path().join("ising.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][3], "0.2");
    let run = &meta(&dir.path().join("ising.meta.json"))["summary"]["runs"][0];
    assert_eq!(run["final_state"], "+-++-");
    assert_eq!(run["accepted"], 0);
}

#[test]
fn reduce_reports_monotone_compression() {
    let dir = TempDir::new().unwrap();
    assert!(
        run_in("reduce", &configs().join("reduce.conf"), dir.path(), &[])
            .status
            .success()
    );
    let rows = csv_rows(&dir.path().join("reduce.csv"));
    let mono = rows.iter().find(|r| r[1] == "monotone").unwrap();
    assert_eq!(mono[4], "10");
    assert_eq!(mono[5], "2");
    for r in &rows[1..] {
        assert!(r[8].parse::<f64>().unwrap() <= r[7].parse::<f64>().unwrap());
        assert_eq!(r[9], "true");
    }
}

#[test]
fn reduce_handles_empty_and_malformed_datasets() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("empty.jsonl"), "").unwrap();
    let cfg = write_config(dir.path(), "r.conf", "dataset = empty.jsonl\n");
    assert!(run_in("reduce", &cfg, dir.path(), &[]).status.success());
    let text = std::fs::read_to_string(dir.path().join("reduce.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);

    std::fs::write(
        dir.path().join("bad.jsonl"),
        "{\"id\":\"a\",\"elements\":[{\"params\":{\"x\":1}},{\"params\":{\"x\":2}}]}\n{oops\n",
    )
    .unwrap();
    let cfg = write_config(dir.path(), "r.conf", "dataset = bad.jsonl\n");
    let o = run_in("reduce", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn concept_pipeline_recognizes_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let (infer, div) = with_store(dir.path());
    let first = TempDir::new().unwrap();
    assert!(run_in("concept-infer", &infer, first.path(), &[])
        .status
        .success());
    let rows = csv_rows(&first.path().join("concept-infer.csv"));
    for r in &rows[1..] {
        assert_eq!(r[7], r[2], "winner is the true class: {r:?}");
        if r[3] == r[2] {
            assert_eq!(r[4], "recognized");
            assert_eq!(r[5], "0");
        }
    }

    // Each run reloads the store from disk.
    let second = TempDir::new().unwrap();
    assert!(run_in("concept-infer", &infer, second.path(), &[])
        .status
        .success());
    assert_eq!(
        std::fs::read(first.path().join("concept-infer.csv")).unwrap(),
        std::fs::read(second.path().join("concept-infer.csv")).unwrap()
    );

    assert!(run_in("concept-diversity", &div, dir.path(), &[])
        .status
        .success());
    let rows = csv_rows(&dir.path().join("concept-diversity.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows[1..].iter().all(|r| r[2].parse::<usize>().unwrap() > 0));
}

#[test]
fn unknown_shape_is_unrecognized() {
    let dir = TempDir::new().unwrap();
    let (_, _) = with_store(dir.path());
    std::fs::write(
        dir.path().join("odd.jsonl"),
        "{\"id\":\"flat\",\"elements\":[{\"params\":{\"orientation\":300}},{\"params\":{\"orientation\":300}}]}\n",
    )
    .unwrap();
    let cfg = write_config(
        dir.path(),
        "i.conf",
        "store = concepts.json\ndataset = odd.jsonl\n",
    );
    assert!(run_in("concept-infer", &cfg, dir.path(), &[])
        .status
        .success());
    let rows = csv_rows(&dir.path().join("concept-infer.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows[1..]
        .iter()
        .all(|r| r[4] == "unrecognized" && r[7].is_empty()));
}

#[test]
fn dataset_generation_flags_excess_noise() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "g.conf", "noise = 0\nsamples_per_class = 2\n");
    assert!(run_in("gen-dataset", &cfg, dir.path(), &[])
        .status
        .success());
    let text = std::fs::read_to_string(dir.path().join("strokes.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 6);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["elements"][0]["params"]["orientation"], 20.0);
    assert!(meta(&dir.path().join("gen-dataset.meta.json"))["summary"]["warning"].is_null());

    let cfg = write_config(dir.path(), "g.conf", "noise = 15\nsamples_per_class = 2\n");
    assert!(run_in("gen-dataset", &cfg, dir.path(), &[])
        .status
        .success());
    let m = meta(&dir.path().join("gen-dataset.meta.json"));
    assert_eq!(m["summary"]["label_preserving"], false);
    assert!(m["summary"]["warning"].is_string());
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sigcurate"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write_jsonl(path: &Path, demos: &[(String, Vec<Vec<f64>>)]) {
    let text: String = demos
        .iter()
        .map(|(id, state)| json!({"id": id, "channels": {"state": state}}).to_string() + "\n")
        .collect();
    std::fs::write(path, text).unwrap();
}

/// Ten short 2-D demos with distinct shapes.
fn ten_demos(dir: &Path) -> PathBuf {
    let demos: Vec<_> = (0..10)
        .map(|i| {
            let a = i as f64 * 0.6;
            let pts = (0..8)
                .map(|t| {
                    let s = t as f64 / 7.0;
                    vec![
                        s * a.cos() + 0.2 * (3.0 * s * (i + 1) as f64).sin(),
                        s * a.sin(),
                    ]
                })
                .collect();
            (format!("demo{i}"), pts)
        })
        .collect();
    let path = dir.join("demos.jsonl");
    write_jsonl(&path, &demos);
    path
}

fn json_file(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn gram_writes_cache_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let data = ten_demos(dir.path());
    let out = dir.path().join("out");
    let o = run(&[
        "gram",
        "--dataset",
        data.to_str().unwrap(),
        "--level",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (g, header) = sigcurate::kernels::read_cache(&out.join("gram.bin")).unwrap();
    assert_eq!((g.n(), header.n), (10, 10));
    let summary = json_file(&out.join("gram_summary.json"));
    assert_eq!(summary["n"], 10);
    assert_eq!(summary["backend"], "truncated_dp");
    assert_eq!(summary["source"], "computed");
    assert!(summary["raw_self_kernel_min"].as_f64().unwrap() >= 1.0);
    assert!(
        json_file(&out.join("gram_timing.json"))["seconds"]
            .as_f64()
            .unwrap()
            >= 0.0
    );

    // Reuse through the cache gives the same metrics.
    let fresh = run(&[
        "entropy",
        "--dataset",
        data.to_str().unwrap(),
        "--level",
        "4",
        "--out",
        out.to_str().unwrap(),
        "--cache",
        "off",
    ]);
    let o = run(&[
        "gram",
        "--dataset",
        data.to_str().unwrap(),
        "--level",
        "4",
        "--out",
        out.to_str().unwrap(),
        "--cache",
        "read",
    ]);
    assert!(o.status.success());
    assert_eq!(json_file(&out.join("gram_summary.json"))["source"], "cache");
    let cached = run(&[
        "entropy",
        "--dataset",
        data.to_str().unwrap(),
        "--level",
        "4",
        "--out",
        out.to_str().unwrap(),
        "--cache",
        "read",
    ]);
    assert_eq!(fresh.stdout, cached.stdout);

    // A different level must not reuse the stale cache.
    let o = run(&[
        "gram",
        "--dataset",
        data.to_str().unwrap(),
        "--level",
        "3",
        "--out",
        out.to_str().unwrap(),
        "--cache",
        "read",
    ]);
    assert!(o.status.success());
    assert_eq!(
        json_file(&out.join("gram_summary.json"))["source"],
        "computed"
    );
}

#[test]
fn missing_dataset_exits_2_and_names_path() {
    let o = run(&["gram", "--dataset", "/no/such/dir/data.jsonl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/dir/data.jsonl"));
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = ten_demos(dir.path());
    let d = data.to_str().unwrap();
    for args in [
        vec!["curate", "--dataset", d, "--p", "1.5"],
        vec![
            "curate",
            "--dataset",
            d,
            "--m",
            "11",
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ],
        vec!["entropy", "--dataset", d, "--backend", "global_alignment"],
        vec![
            "curve",
            "--dataset",
            d,
            "--budgets",
            "3,2",
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ],
    ] {
        let o = run(&args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(
        &bad,
        "{\"id\": \"a\", \"channels\": {\"state\": [[0.0], [1.0]], \"action\": [[0.0]]}}\n",
    )
    .unwrap();
    let o = run(&[
        "gram",
        "--dataset",
        bad.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("inconsistent channel lengths"));
}

#[test]
fn runtime_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let demos = vec![
        ("a".to_string(), vec![vec![0.0], vec![1e200]]),
        ("b".to_string(), vec![vec![0.0], vec![-1e200]]),
    ];
    let data = dir.path().join("huge.jsonl");
    write_jsonl(&data, &demos);
    let config = dir.path().join("run.json");
    let cfg = json!({
        "dataset": {"path": data},
        "paths": {"standardize": false},
        "kernel": {"backend": "pde"},
        "out": dir.path().join("o"),
    });
    std::fs::write(&config, cfg.to_string()).unwrap();
    let o = run(&["gram", "--config", config.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn identical_demos_have_zero_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let pts = vec![vec![0.0, 0.0], vec![0.5, 0.2], vec![1.0, -0.3]];
    let demos: Vec<_> = (0..6).map(|i| (format!("d{i}"), pts.clone())).collect();
    let data = dir.path().join("same.jsonl");
    write_jsonl(&data, &demos);
    let o = run(&[
        "entropy",
        "--dataset",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["shannon_entropy"].as_f64().unwrap().abs() < 1e-8);
    assert!((report["vendi_score"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!(report.get("eigenvalues").is_none());
    assert_eq!(json_file(&dir.path().join("o/spectrum.json")), report);
}

#[test]
fn orthogonal_demos_reach_maximal_entropy() {
    // Demo i moves only along coordinate i, so increments of different demos
    // are orthogonal and only the level-0 term couples them.
    let dir = tempfile::tempdir().unwrap();
    let n = 5;
    let demos: Vec<_> = (0..n)
        .map(|i| {
            let pts = (0..6)
                .map(|t| {
                    (0..n)
                        .map(|c| if c == i { t as f64 * 0.8 } else { 0.0 })
                        .collect()
                })
                .collect();
            (format!("o{i}"), pts)
        })
        .collect();
    let data = dir.path().join("orth.jsonl");
    write_jsonl(&data, &demos);
    let out = dir.path().join("o");
    let o = run(&[
        "entropy",
        "--dataset",
        data.to_str().unwrap(),
        "--level",
        "3",
        "--verbose",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let h = report["shannon_entropy"].as_f64().unwrap();
    assert!(((n as f64).ln() - h).abs() < 0.05, "{h}");

    // Oracle: eigen-analysis of the cached Gram.
    let (g, _) = sigcurate::kernels::read_cache(&out.join("gram.bin")).unwrap();
    let eig = nalgebra::SymmetricEigen::new(g.entries() / n as f64);
    let oracle: f64 = eig
        .eigenvalues
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum();
    assert!((oracle - h).abs() < 1e-10);
    assert_eq!(report["eigenvalues"].as_array().unwrap().len(), n);
}

#[test]
fn curate_full_budget_and_ids_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = ten_demos(dir.path());
    let out = dir.path().join("o");
    let o = run(&[
        "curate",
        "--dataset",
        data.to_str().unwrap(),
        "--m",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sel = json_file(&out.join("selection.json"));
    assert_eq!(sel["objective"], "faktual");
    let mut ids: Vec<String> = std::fs::read_to_string(out.join("selected_ids.txt"))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    ids.sort();
    assert_eq!(ids, (0..10).map(|i| format!("demo{i}")).collect::<Vec<_>>());

    let o = run(&[
        "curate",
        "--dataset",
        data.to_str().unwrap(),
        "--m",
        "3",
        "--objective",
        "entropy",
        "--algorithm",
        "stochastic_greedy",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let sel: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(sel["objective"], "entropy");
    assert_eq!(sel["indices"].as_array().unwrap().len(), 3);
    assert_eq!(sel["config"]["algorithm"], "stochastic_greedy");
}

#[test]
fn curve_single_full_budget() {
    let dir = tempfile::tempdir().unwrap();
    let data = ten_demos(dir.path());
    let out = dir.path().join("o");
    let o = run(&[
        "curve",
        "--dataset",
        data.to_str().unwrap(),
        "--budgets",
        "10",
        "--random-draws",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "budget,entropy_faktual,entropy_random_mean,entropy_random_min,entropy_random_max"
    );
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(lines.next().is_none());
    assert_eq!(row[0], 10.0);
    let full = json_file(&{
        run(&[
            "entropy",
            "--dataset",
            data.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        out.join("spectrum.json")
    })["shannon_entropy"]
        .as_f64()
        .unwrap();
    for v in &row[1..] {
        assert!((v - full).abs() < 1e-9);
    }
}

#[test]
fn csv_directory_format() {
    let dir = tempfile::tempdir().unwrap();
    for (name, rows) in [
        ("a", "0,0\n1,0\n1,1\n"),
        ("b", "0,0\n0,1\n-1,1\n"),
        ("c", "0,0\n1,1\n2,0\n"),
    ] {
        let d = dir.path().join("data").join(name);
        std::fs::create_dir_all(&d).unwrap();
        std::fs::write(d.join("state.csv"), rows).unwrap();
    }
    let out = dir.path().join("o");
    let o = run(&[
        "curate",
        "--dataset",
        dir.path().join("data").to_str().unwrap(),
        "--format",
        "csv_dir",
        "--m",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sel: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(sel["ids"].as_array().unwrap().len(), 2);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let data = ten_demos(dir.path());
    let outputs = |tag: &str, threads: Option<&str>| {
        let out = dir.path().join(tag);
        for cmd in ["gram", "entropy", "curate", "curve"] {
            let mut c = bin();
            c.args([
                cmd,
                "--dataset",
                data.to_str().unwrap(),
                "--backend",
                "rfsf_trp",
                "--rff-dim",
                "32",
                "--seed",
                "5",
                "--m",
                "4",
                "--p",
                "0.5",
                "--out",
                out.to_str().unwrap(),
            ]);
            if let Some(t) = threads {
                c.env("SIGCURATE_THREADS", t);
            }
            let o = c.output().unwrap();
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        }
        [
            "gram.bin",
            "gram_summary.json",
            "spectrum.json",
            "selection.json",
            "selected_ids.txt",
            "curve.csv",
        ]
        .map(|f| std::fs::read(out.join(f)).unwrap())
    };
    let a = outputs("a", None);
    assert_eq!(a, outputs("b", None));
    assert_eq!(a, outputs("c", Some("1")));

    let mut c = bin();
    c.args(["gram", "--dataset", data.to_str().unwrap()])
        .env("SIGCURATE_THREADS", "zero");
    assert_eq!(c.output().unwrap().status.code(), Some(2));
}

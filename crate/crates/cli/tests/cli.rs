use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_guided-decode"))
        .args(args)
        .current_dir(dir)
        .env_remove("GUIDED_DECODE_BRIDGE_URL")
        .output()
        .expect("binary runs")
}

fn build_small_dataset(dir: &Path) {
    let out = bin(
        &[
            "build-dataset",
            "--kind",
            "hierarchy",
            "--train",
            "6",
            "--dev",
            "3",
            "--test",
            "12",
            "--seed",
            "4",
            "--out-dir",
            "ds",
        ],
        dir,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn help_lists_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["generate", "--help"], dir.path());
    assert!(out.status.success());
    let help = String::from_utf8(out.stdout).unwrap();
    for needle in [
        "--alpha <ALPHA>",
        "[default: 5.0]",
        "[default: 100.0]",
        "--k-topic <K_TOPIC>",
        "[default: 20]",
        "[default: 40]",
        "[default: 200]",
        "[default: 64]",
        "[default: 8]",
        "[default: textual]",
    ] {
        assert!(help.contains(needle), "missing {needle:?} in\n{help}");
    }
}

#[test]
fn generate_and_evaluate_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    build_small_dataset(d);
    for run in ["a", "b"] {
        let gen = format!("gen_{run}.jsonl");
        let out = bin(
            &[
                "generate",
                "--dataset",
                "ds/test.jsonl",
                "--strategy",
                "textual",
                "--seed",
                "7",
                "--workers",
                if run == "a" { "1" } else { "3" },
                "--out",
                &gen,
                "--cache-out",
                &format!("cache_{run}.jsonl"),
            ],
            d,
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let out = bin(
            &[
                "evaluate",
                "--dataset",
                "ds/test.jsonl",
                "--generations",
                &gen,
                "--scorer",
                "fixture",
                "--out",
                &format!("report_{run}.json"),
                "--results",
                &format!("results_{run}.jsonl"),
                "--csv",
                &format!("cat_{run}.csv"),
            ],
            d,
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for f in ["gen", "cache", "results"] {
        let a = std::fs::read(d.join(format!("{f}_a.jsonl"))).unwrap();
        let b = std::fs::read(d.join(format!("{f}_b.jsonl"))).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{f} differs");
    }
    assert_eq!(
        std::fs::read(d.join("report_a.json")).unwrap(),
        std::fs::read(d.join("report_b.json")).unwrap()
    );
}

#[test]
fn cached_examples_reproduce_generation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    build_small_dataset(d);
    let first = bin(
        &[
            "generate",
            "--dataset",
            "ds/dev.jsonl",
            "--seed",
            "1",
            "--out",
            "g1.jsonl",
            "--cache-out",
            "c.jsonl",
        ],
        d,
    );
    assert!(first.status.success());
    // A different seed would sample different examples; the cache pins them.
    let second = bin(
        &[
            "generate",
            "--dataset",
            "ds/dev.jsonl",
            "--seed",
            "99",
            "--out",
            "g2.jsonl",
            "--cache",
            "c.jsonl",
        ],
        d,
    );
    assert!(second.status.success());
    let text = |p: &str| -> Vec<String> {
        std::fs::read_to_string(d.join(p))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["text"].to_string())
            .collect()
    };
    assert_eq!(text("g1.jsonl"), text("g2.jsonl"));
}

#[test]
fn mismatched_ids_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    build_small_dataset(d);
    let out = bin(
        &[
            "generate",
            "--dataset",
            "ds/dev.jsonl",
            "--strategy",
            "none",
            "--out",
            "g.jsonl",
        ],
        d,
    );
    assert!(out.status.success());
    let out = bin(
        &[
            "evaluate",
            "--dataset",
            "ds/test.jsonl",
            "--generations",
            "g.jsonl",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
}

#[test]
fn bad_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(bin(&["generate", "--bogus"], d).status.code(), Some(2));
    assert_eq!(bin(&["frobnicate"], d).status.code(), Some(2));
    build_small_dataset(d);
    let out = bin(
        &["generate", "--dataset", "ds/dev.jsonl", "--beta", "-1"],
        d,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_3_and_bridge_failure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        bin(&["generate", "--dataset", "nope.jsonl"], d)
            .status
            .code(),
        Some(3)
    );
    build_small_dataset(d);
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    let out = bin(
        &[
            "generate",
            "--dataset",
            "ds/dev.jsonl",
            "--model",
            "bridge",
            "--bridge-url",
            &url,
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn config_file_fills_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    build_small_dataset(d);
    std::fs::write(
        d.join("run.toml"),
        "dataset = \"ds/dev.jsonl\"\nstrategy = \"oracle\"\nmax-tokens = 5\nout = \"cfg.jsonl\"\nno-trie = false\n",
    )
    .unwrap();
    let out = bin(
        &["generate", "--config", "run.toml", "--max-tokens", "3"],
        d,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let first = std::fs::read_to_string(d.join("cfg.jsonl")).unwrap();
    let rec: serde_json::Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    assert_eq!(rec["config"]["strategy"], "oracle");
    assert_eq!(rec["config"]["max_tokens"], 3);
    assert!(rec["tokens"].as_array().unwrap().len() <= 3);

    std::fs::write(d.join("bad.toml"), "not-a-flag = 1\n").unwrap();
    let out = bin(
        &[
            "generate",
            "--config",
            "bad.toml",
            "--dataset",
            "ds/dev.jsonl",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn build_kb_and_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for kind in ["hierarchy", "property"] {
        let out = bin(&["build-kb", "--kind", kind, "--out", "kb.txt"], d);
        assert!(out.status.success());
        let reread = bin(
            &[
                "build-kb", "--kind", kind, "--input", "kb.txt", "--out", "kb2.txt",
            ],
            d,
        );
        assert!(reread.status.success());
        assert_eq!(
            std::fs::read(d.join("kb.txt")).unwrap(),
            std::fs::read(d.join("kb2.txt")).unwrap()
        );
    }
    build_small_dataset(d);
    for s in ["none", "oracle"] {
        let g = format!("{s}.jsonl");
        assert!(bin(
            &[
                "generate",
                "--dataset",
                "ds/test.jsonl",
                "--strategy",
                s,
                "--out",
                &g
            ],
            d
        )
        .status
        .success());
        assert!(bin(
            &[
                "evaluate",
                "--dataset",
                "ds/test.jsonl",
                "--generations",
                &g,
                "--out",
                &format!("{s}.json")
            ],
            d
        )
        .status
        .success());
    }
    let out = bin(
        &["report", "--input", "none.json", "--input", "oracle.json"],
        d,
    );
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.lines().next().unwrap().starts_with("run"));
    assert_eq!(table.lines().count(), 3);
}

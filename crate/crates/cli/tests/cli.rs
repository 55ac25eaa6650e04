use std::path::Path;
use std::process::{Command, Output};

fn votespan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_votespan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn lines(out: &Output) -> Vec<String> {
    stdout(out).lines().map(str::to_owned).collect()
}

/// `key,value` output as a lookup.
fn value(out: &Output, key: &str) -> String {
    lines(out)
        .into_iter()
        .find_map(|l| l.strip_prefix(&format!("{key},")).map(str::to_owned))
        .unwrap_or_else(|| panic!("no {key} in {}", stdout(out)))
}

#[test]
fn pli_binary_curve() {
    let out = votespan(&["pli", "--m", "2", "--p", "0.5", "--n", "2..8"]);
    assert!(out.status.success());
    let l = lines(&out);
    assert_eq!(l[0], "n,pli");
    assert_eq!(l.len(), 8);
    assert_eq!(l[1], "2,0.5");
    let last: f64 = l[7].split(',').nth(1).unwrap().parse().unwrap();
    assert!((last - 0.9922).abs() < 1e-4);
}

#[test]
fn pli_profile_examples() {
    let out = votespan(&["pli", "--m", "3", "--p", "0,0", "--n", "3"]);
    assert_eq!(lines(&out)[1], "3,1.0");
    let out = votespan(&["pli", "--m", "3", "--p", "0.5,0.5", "--n", "4"]);
    assert_eq!(lines(&out)[1], "4,0.5");
    // a single value with m > 2 is a uniform profile
    let out = votespan(&["pli", "--m", "3", "--p", "0.5", "--n", "4"]);
    assert_eq!(lines(&out)[1], "4,0.5");
}

#[test]
fn pli_rejects_bad_profiles() {
    for args in [
        ["pli", "--m", "3", "--p", "0.5,1.5", "--n", "4"],
        ["pli", "--m", "4", "--p", "0.5,0.5", "--n", "4"],
        ["pli", "--m", "3", "--p", "0.5,x", "--n", "4"],
        ["pli", "--m", "3", "--p", "0.5,0.5", "--n", "9..4"],
    ] {
        let out = votespan(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn size_examples() {
    let out = votespan(&["size", "--m", "2", "--p", "0.5", "--t", "0.99"]);
    assert_eq!(value(&out, "INC"), "8");
    assert_eq!(value(&out, "SINC"), "8");
    let out = votespan(&["size", "--m", "7", "--p", "0,0,0,0,0,0"]);
    assert_eq!(value(&out, "INC"), "7");
    let out = votespan(&["size", "--m", "3", "--p", "0.5,0.5", "--t", "0.49"]);
    assert_eq!(value(&out, "INC"), "4");
    let out = votespan(&["size", "--m", "3", "--p", "1,0.5"]);
    assert_eq!(value(&out, "INC"), "--");
    let out = votespan(&["size", "--m", "2", "--p", "0.5", "--t", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn estimate_trivial_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let identical = write(
        dir.path(),
        "same.csv",
        "instance_id,classifier_id,score_0,score_1\n0,0,0.3,0.7\n0,1,0.3,0.7\n1,0,0.6,0.4\n1,1,0.6,0.4\n",
    );
    let out = votespan(&["estimate", "--votes", &identical]);
    assert!(out.status.success());
    assert_eq!(value(&out, "p_1"), "1.0");
    assert_eq!(value(&out, "pli_exact"), "0.0");

    let distinct = write(
        dir.path(),
        "onehot.csv",
        "instance_id,classifier_id,score_0,score_1,score_2\n0,0,1,0,0\n0,1,0,1,0\n0,2,0,0,1\n",
    );
    let out = votespan(&["estimate", "--votes", &distinct]);
    assert_eq!(value(&out, "p_1"), "0.0");
    assert_eq!(value(&out, "p_2"), "0.0");
    assert_eq!(value(&out, "empirical_pli"), "1.0");
    assert_eq!(value(&out, "pli_exact"), "1.0");
}

#[test]
fn estimate_recovers_a_synthetic_profile() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("votes.csv");
    let dump = dump.to_str().unwrap();
    let out = votespan(&[
        "synth-votes",
        "--m",
        "2",
        "--p",
        "0.5",
        "--n",
        "8",
        "--instances",
        "20000",
        "--seed",
        "3",
        "--out",
        dump,
    ]);
    assert!(out.status.success());
    let out = votespan(&["estimate", "--votes", dump]);
    let p: f64 = value(&out, "p_1").parse().unwrap();
    let pli: f64 = value(&out, "pli_exact").parse().unwrap();
    assert!((p - 0.5).abs() < 0.01, "{p}");
    assert!((pli - 0.992).abs() < 0.002, "{pli}");
    // rank does not depend on classifier order, the per-step profile does
    let shuffled = votespan(&["estimate", "--votes", dump, "--shuffle-seed", "9"]);
    assert_eq!(
        value(&shuffled, "empirical_pli"),
        value(&out, "empirical_pli")
    );
    let again = votespan(&["estimate", "--votes", dump, "--shuffle-seed", "9"]);
    assert_eq!(stdout(&shuffled), stdout(&again));
}

#[test]
fn estimate_reports_bad_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.csv",
        "instance_id,classifier_id,score_0,score_1\n0,0,0.3,0.7\n0,1,abc,0.7\n",
    );
    let out = votespan(&["estimate", "--votes", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = votespan(&["estimate", "--votes", "/definitely/not/here.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = votespan(&[
        "experiment",
        "--m",
        "4",
        "--sizes",
        "2,4,8",
        "--seeds",
        "2",
        "--instances",
        "10000",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "results_raw.csv",
        "results_summary.csv",
        "p_profiles.csv",
        "pli_curve.csv",
    ] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let summary = std::fs::read_to_string(out_dir.join("results_summary.csv")).unwrap();
    assert!(summary.starts_with("# generated by votespan"));
    let rows: Vec<&str> = summary.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        rows[0],
        "dataset,method,m,SINC,INC,n_INC,acc_pct_of_max,correlation"
    );
    assert_eq!(rows.len(), 3);
    for row in &rows[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert!(cells[3].parse::<usize>().is_ok(), "SINC in {row}");
        assert!(cells[4].parse::<usize>().is_ok(), "INC in {row}");
    }
}

#[test]
fn experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out_dir = dir.path().join(name);
        let out = votespan(&[
            "experiment",
            "--m",
            "3",
            "--sizes",
            "2,4",
            "--seeds",
            "2",
            "--instances",
            "3000",
            "--workers",
            workers,
            "--reproducible",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        out_dir
    };
    let a = run("a", "1");
    let b = run("b", "3");
    for f in [
        "results_raw.csv",
        "results_by_size.csv",
        "results_summary.csv",
        "p_profiles.csv",
        "pli_curve.csv",
    ] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
        assert!(!x.starts_with(b"#"));
    }
}

#[test]
fn experiment_config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = write(
        dir.path(),
        "run.toml",
        &format!(
            "m = 3\nsizes = [2, 4]\nseeds = 1\ninstances = 2000\nmethod = [\"goowe\"]\nreproducible = true\nout = \"{}\"\n",
            out_dir.display()
        ),
    );
    let out = votespan(&["experiment", "--config", &config, "--method", "oza"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = std::fs::read_to_string(out_dir.join("results_summary.csv")).unwrap();
    assert!(summary.contains("RBF3,OzaBagging,3,"));
    assert!(!summary.contains("GOOWE"));
}

#[test]
fn experiment_rejections() {
    let out = votespan(&[
        "experiment",
        "--dataset",
        "csv:/no/such/file.csv",
        "--sizes",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ingestion error"));
    let out = votespan(&["experiment", "--threshold", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = votespan(&["experiment", "--sizes", "4,2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = votespan(&["experiment", "--method", "adaboost"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_on_a_csv_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("x,y,class\n");
    for i in 0..600 {
        let x = (i % 17) as f64 / 17.0;
        let y = (i % 5) as f64 / 5.0;
        let class = if x > 0.5 { "hi" } else { "lo" };
        text.push_str(&format!("{x},{y},{class}\n"));
    }
    let data = write(dir.path(), "toy.csv", &text);
    let out_dir = dir.path().join("out");
    let out = votespan(&[
        "experiment",
        "--dataset",
        &format!("csv:{data}"),
        "--sizes",
        "2,4",
        "--seeds",
        "1",
        "--learner",
        "nb",
        "--reproducible",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("toy,OzaBagging,2,"));
}

#[test]
fn simulate_dump_round_trips_through_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("votes.csv");
    let dump = dump.to_str().unwrap();
    let out = votespan(&[
        "simulate",
        "--m",
        "3",
        "--n",
        "5",
        "--instances",
        "1500",
        "--method",
        "oza",
        "--vote-mode",
        "one-hot",
        "--dump-votes",
        dump,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(value(&out, "instances"), "1500");
    let est = votespan(&["estimate", "--votes", dump]);
    for key in ["p_1", "p_2", "empirical_pli", "pli_exact"] {
        assert_eq!(value(&out, key), value(&est, key), "{key}");
    }
}

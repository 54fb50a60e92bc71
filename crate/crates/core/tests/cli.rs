use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use momentopo::trial::read_trial;

fn momentopo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momentopo"))
        .args(args)
        .env_remove("MOMENTOPO_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn trial_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".trial"))
        .collect();
    names.sort();
    names
}

#[test]
fn simulate_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        ok(&momentopo(&["simulate", "--fixture", "revolute-demo", "--trials", "10", "--seed", "42", p(dir)]));
    }
    let names = trial_files(&a);
    assert_eq!(names.len(), 10);
    assert_eq!(names[0], "trial_0001.trial");
    assert_eq!(names[9], "trial_0010.trial");
    for name in names.iter().map(String::as_str).chain(["manifest.json"]) {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let rec = read_trial(&a.join("trial_0003.trial")).unwrap();
    assert_eq!(rec.samples.len(), 5000);

    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["fixture"], "revolute-demo");
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["trials"].as_array().unwrap().len(), 10);
    assert_eq!(manifest["fixture_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn estimate_and_report_a_revolute_campaign() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&momentopo(&["simulate", "--fixture", "revolute-demo", "--trials", "10", "--seed", "42", p(dir)]));
    ok(&momentopo(&["estimate", p(dir)]));
    let csv = fs::read_to_string(dir.join("errors.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# errors.csv v1"));
    assert_eq!(lines.next(), Some("trial,candidate,error,selected,inconclusive"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 20);
    let mut r_wins = 0;
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][0], pair[1][0]);
        let err = |c: &str| pair.iter().find(|r| r[1] == c).unwrap()[2].parse::<f64>().unwrap();
        r_wins += (err("R") < err("P")) as usize;
    }
    assert!(r_wins >= 9, "{r_wins}");
    let summary = ok(&momentopo(&["report", p(dir)]));
    let line = summary.lines().find(|l| l.starts_with("revolute-demo:")).unwrap();
    let correct: usize = line["revolute-demo: ".len()..].split('/').next().unwrap().parse().unwrap();
    assert!(correct >= 9, "{summary}");
    assert!(line.contains("/10 correct"));
}

#[test]
fn constrained_campaign_is_all_inconclusive() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&momentopo(&["simulate", "--fixture", "prismatic-constrained", "--trials", "3", "--duration", "1", p(dir)]));
    ok(&momentopo(&["estimate", p(dir)]));
    let summary = ok(&momentopo(&["report", p(dir)]));
    assert!(summary.contains("prismatic-constrained: 0/3 correct, 3 inconclusive, 0 wrong"), "{summary}");
}

#[test]
fn single_trial_counts_sum_to_one() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&momentopo(&["simulate", "--fixture", "prismatic-demo", "--trials", "1", "--duration", "2", p(dir)]));
    ok(&momentopo(&["estimate", p(dir)]));
    let summary = ok(&momentopo(&["report", p(dir)]));
    let line = summary.lines().next().unwrap();
    let nums: Vec<usize> = line
        .split(|c: char| !c.is_ascii_digit())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().unwrap())
        .collect();
    // correct / total, inconclusive, wrong, moving
    assert_eq!(nums[1], 1);
    assert_eq!(nums[0] + nums[2] + nums[3], 1, "{line}");
}

#[test]
fn corrupt_trials_are_skipped() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&momentopo(&["simulate", "--fixture", "prismatic-demo", "--trials", "3", "--duration", "1", p(dir)]));
    let victim = dir.join("trial_0002.trial");
    let text = fs::read_to_string(&victim).unwrap();
    fs::write(&victim, &text[..text.len() / 2]).unwrap();
    let out = momentopo(&["estimate", p(dir)]);
    let stdout = ok(&out);
    assert!(stdout.contains("estimated 2 trial(s), skipped 1"), "{stdout}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("trial_0002.trial"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["skipped"].as_array().unwrap().len(), 1);
    assert_eq!(report["trials"].as_array().unwrap().len(), 2);
    let summary = ok(&momentopo(&["report", p(dir)]));
    assert!(summary.contains("skipped 1 trial file(s)"), "{summary}");
}

#[test]
fn empty_directory_has_no_trials() {
    let tmp = tempfile::tempdir().unwrap();
    let out = momentopo(&["estimate", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no trials found"));
}

#[test]
fn report_without_estimates_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = momentopo(&["report", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_custom_fixture_stops_before_simulating() {
    let tmp = tempfile::tempdir().unwrap();
    let fixture = momentopo::fixtures::revolute_demo().to_toml_string().unwrap();
    let path = tmp.path().join("bad.toml");
    let bad = fixture.replacen("axis = [\n    0.0,\n    0.0,\n    1.0,\n]", "axis = [\n    0.0,\n    0.0,\n    1.5,\n]", 1);
    assert_ne!(bad, fixture);
    fs::write(&path, bad).unwrap();
    let out_dir = tmp.path().join("out");
    let out = momentopo(&["simulate", "--fixture", p(&path), "--trials", "2", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out_dir.exists());

    // the same file with a valid axis runs
    fs::write(&path, fixture).unwrap();
    ok(&momentopo(&["simulate", "--fixture", p(&path), "--trials", "1", "--duration", "0.5", p(&out_dir)]));
    assert_eq!(trial_files(&out_dir).len(), 1);
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [&["simulate", "--trials", "zero"][..], &["frobnicate"], &["simulate", "--trials", "0"], &["simulate", "--fixture", "nope"]] {
        let out = momentopo(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
    assert!(momentopo(&["--help"]).status.success());
}

#[test]
fn config_file_and_env_override() {
    let tmp = tempfile::tempdir().unwrap();
    let from_file = tmp.path().join("from-file");
    let from_env = tmp.path().join("from-env");
    let cfg = tmp.path().join("campaign.toml");
    fs::write(
        &cfg,
        format!(
            "fixture = \"prismatic-demo\"\ntrials = 2\nseed = 5\nduration = 0.5\noutput_dir = \"{}\"\n",
            from_file.display()
        ),
    )
    .unwrap();
    ok(&momentopo(&["simulate", "--config", p(&cfg)]));
    assert_eq!(trial_files(&from_file).len(), 2);

    let out = Command::new(env!("CARGO_BIN_EXE_momentopo"))
        .args(["simulate", "--config", p(&cfg), "--trials", "3"])
        .env("MOMENTOPO_OUTPUT_DIR", &from_env)
        .output()
        .unwrap();
    ok(&out);
    assert_eq!(trial_files(&from_env).len(), 3);
    // first two trials share seeds with the file-only run
    assert_eq!(
        fs::read(from_file.join("trial_0002.trial")).unwrap(),
        fs::read(from_env.join("trial_0002.trial")).unwrap()
    );
}

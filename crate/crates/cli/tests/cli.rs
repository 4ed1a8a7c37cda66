use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_selfpower"));
    c.env_remove("SELFPOWER_BUDGET");
    c
}

fn run(args: &[&str], out: &Path) -> std::process::Output {
    bin().args(args).arg("--output").arg(out).output().expect("spawn")
}

/// Data files of a run, excluding the manifest (it records wall time).
fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn assert_same_data(a: &Path, b: &Path) {
    let (fa, fb) = (data_files(a), data_files(b));
    assert_eq!(
        fa.iter().map(|f| &f.0).collect::<Vec<_>>(),
        fb.iter().map(|f| &f.0).collect::<Vec<_>>()
    );
    for ((name, x), (_, y)) in fa.iter().zip(&fb) {
        assert!(x == y, "{name} differs");
    }
}

const DETERMINISM_CASES: &[&[&str]] = &[
    &["census", "--n-max", "30000", "--thresholds", "10000..30000/10000", "--segment", "7000"],
    &["heuristics", "--thresholds", "5000,20000"],
    &["orbits", "--n-min", "20000", "--n-max", "40000", "--per-prime-starts", "2", "--seed", "9"],
    &["endo", "--p", "31", "--steps", "5", "--samples", "70000", "--seed", "4"],
    &["cq", "--q", "3,5,7,11,13,29", "--samples", "20000", "--seed", "5"],
    &["interp", "--n-max", "300"],
    &["tfp", "--poly", "-1,1", "--n-max", "20000"],
];

#[test]
fn every_subcommand_is_deterministic_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, case) in DETERMINISM_CASES.iter().enumerate() {
        for format in ["csv", "json"] {
            let dirs: Vec<PathBuf> = ["1", "3", "1"]
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let d = tmp.path().join(format!("{i}-{format}-{k}"));
                    let mut args = case.to_vec();
                    args.extend(["--workers", w, "--format", format]);
                    let o = run(&args, &d);
                    assert!(o.status.success(), "{case:?}: {}", String::from_utf8_lossy(&o.stderr));
                    d
                })
                .collect();
            assert_same_data(&dirs[0], &dirs[1]);
            assert_same_data(&dirs[0], &dirs[2]);
        }
    }
}

#[test]
fn census_table_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["census", "--thresholds", "1000,5000"], tmp.path());
    assert!(o.status.success());
    let table = fs::read_to_string(tmp.path().join("table_no_fixed_points.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "N,observed,predicted,relative_error");
    // 20 exceptional primes up to 1000, p = 2 included
    assert!(lines[1].starts_with("1000,20,"), "{table}");

    let census = fs::read_to_string(tmp.path().join("census.csv")).unwrap();
    assert!(census.contains("\n13,2,false,false,"));
    assert!(census.contains("\n11,1,true,true,"));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    for key in ["config", "versions", "wall_time_seconds", "input_digests", "outputs"] {
        assert!(manifest.get(key).is_some(), "manifest lacks {key}");
    }
    assert_eq!(manifest["config"]["subcommand"], "census");
    assert_eq!(manifest["summary"]["special_primes_with_nontrivial_fixed_point"], 0);
}

#[test]
fn cq_exact_example() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["cq", "--q", "5", "--method", "exact"], tmp.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(tmp.path().join("cq.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], "exact");
    assert_eq!(row[4], "0.48");
}

#[test]
fn json_mirrors_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let (c, j) = (tmp.path().join("c"), tmp.path().join("j"));
    assert!(run(&["tfp", "--poly", "0", "--n-max", "50"], &c).status.success());
    assert!(run(&["tfp", "--poly", "0", "--n-max", "50", "--format", "json"], &j).status.success());
    let csv = fs::read_to_string(c.join("tfp.csv")).unwrap();
    let jsonl = fs::read_to_string(j.join("tfp.jsonl")).unwrap();
    assert_eq!(csv.lines().count() - 1, jsonl.lines().count());
    for (row, obj) in csv.lines().skip(1).zip(jsonl.lines()) {
        let v: serde_json::Value = serde_json::from_str(obj).unwrap();
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(v["p"].to_string(), f[0]);
        assert_eq!(v["count"].to_string(), f[1]);
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| run(args, tmp.path()).status.code();
    assert_eq!(code(&["census", "--no-such-flag"]), Some(2));
    assert_eq!(code(&["census", "--thresholds", "9,5"]), Some(2));
    assert_eq!(code(&["census"]), Some(2));
    assert_eq!(code(&["cq", "--q", "9"]), Some(2));
    assert_eq!(code(&["endo", "--p", "10"]), Some(2));
    assert_eq!(code(&["interp", "--n-max", "20000"]), Some(3));

    let o = bin()
        .env("SELFPOWER_BUDGET", "100")
        .args(["cq", "--q", "7", "--method", "exact", "--output"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Monte Carlo"));

    let o = bin().env("SELFPOWER_BUDGET", "lots").args(["cq", "--q", "7", "--output"]).arg(tmp.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    // output path is a regular file
    let file = tmp.path().join("plain");
    fs::write(&file, "x").unwrap();
    assert_eq!(run(&["cq", "--q", "5"], &file).status.code(), Some(4));
}

const RESUME_CASE: &[&str] = &["census", "--n-max", "60000", "--thresholds", "20000..60000/20000", "--segment", "2000"];

#[test]
fn resume_after_torn_writes_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let full = tmp.path().join("full");
    assert!(run(RESUME_CASE, &full).status.success());
    let data = fs::read(full.join("census.csv")).unwrap();
    let journal = fs::read_to_string(full.join("census.csv.chunks")).unwrap();
    let chunks = journal.lines().count();
    assert!(chunks > 10);

    for (k, cut) in [(0usize, 0usize), (1, 3), (chunks / 2, 17), (chunks - 1, 1), (chunks, 0)] {
        let dir = tmp.path().join(format!("cut-{k}-{cut}"));
        fs::create_dir_all(&dir).unwrap();
        fs::copy(full.join("config.json"), dir.join("config.json")).unwrap();
        let kept: Vec<&str> = journal.lines().take(k).collect();
        let len: usize = kept.iter().map(|l| l.split(' ').nth(1).unwrap().parse::<usize>().unwrap()).sum();
        // k whole chunks plus `cut` stray bytes of the next
        let end = (len + cut).min(data.len());
        fs::write(dir.join("census.csv"), &data[..end]).unwrap();
        fs::write(dir.join("census.csv.chunks"), kept.iter().map(|l| format!("{l}\n")).collect::<String>()).unwrap();

        let mut args = RESUME_CASE.to_vec();
        args.push("--resume");
        let o = run(&args, &dir);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_same_data(&full, &dir);
    }
}

#[test]
fn resume_after_kill_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let full = tmp.path().join("full");
    let case = ["census", "--n-max", "400000", "--segment", "4096"];
    assert!(run(&case, &full).status.success());

    let dir = tmp.path().join("killed");
    for delay in [150u64, 400] {
        let mut child = bin()
            .args(case)
            .arg("--output")
            .arg(&dir)
            .args(if delay == 150 { vec![] } else { vec!["--resume"] })
            .stdout(Stdio::null())
            .spawn()
            .unwrap();
        std::thread::sleep(Duration::from_millis(delay));
        let _ = child.kill();
        child.wait().unwrap();
    }
    let mut args = case.to_vec();
    args.push("--resume");
    assert!(run(&args, &dir).status.success());
    assert_same_data(&full, &dir);
}

#[test]
fn resume_refuses_a_different_configuration() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run(&["tfp", "--poly", "1", "--n-max", "100"], tmp.path()).status.success());
    let o = run(&["tfp", "--poly", "2", "--n-max", "100", "--resume"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn orbit_histograms_have_sidecars() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["orbits", "--map", "quad", "--n-min", "1000", "--n-max", "3000", "--bins", "20"], tmp.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(tmp.path().join("hist_quad_plus_one_orbit_over_sqrt_p.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    let total: u64 = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("hist_quad_plus_one_orbit_over_sqrt_p.json")).unwrap())
            .unwrap();
    assert_eq!(side["sample_count"].as_u64(), Some(total));
    for key in ["statistic", "fitted_mean", "fitted_variance", "seed"] {
        assert!(side.get(key).is_some());
    }
    assert!(!tmp.path().join("orbits_self_power.csv").exists());
}

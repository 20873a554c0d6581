use std::path::Path;
use std::process::{Command, Output};

fn splasso(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splasso"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const SMALL_SWEEP: &[&str] = &[
    "sweep",
    "--p-list",
    "64,96",
    "--theta-grid",
    "0.6,1.4",
    "--trials",
    "6",
    "--base-seed",
    "7",
];

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(splasso(d, &["--help"]).status.code(), Some(0));
    assert_eq!(splasso(d, &["bogus"]).status.code(), Some(2));
    assert_eq!(splasso(d, &[]).status.code(), Some(2));
    // missing seed and out-of-domain parameters are usage errors
    let o = splasso(d, &["gen", "--n", "5", "--p", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("base_seed"));
    let o = splasso(d, &["gen", "--n", "5", "--p", "5", "--gamma", "1.5", "--base-seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    // unreadable input is a runtime error
    let o = splasso(d, &["solve", "--matrix", "absent.txt", "--y", "absent.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("absent.txt"));
    std::fs::write(d.join("junk.txt"), "not a matrix\n").unwrap();
    let o = splasso(d, &["witness", "--matrix", "junk.txt", "--k", "1", "--base-seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gen_solve_witness_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = splasso(
        d,
        &[
            "gen", "--n", "80", "--p", "16", "--gamma", "0.6", "--base-seed", "4",
            "--output", "m.txt", "--y-output", "y.txt", "--k", "2", "--sigma2", "0.01",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let header = std::fs::read_to_string(d.join("m.txt")).unwrap();
    assert!(header.starts_with("80 16 "));

    let o = splasso(d, &["solve", "--matrix", "m.txt", "--y", "y.txt", "--lambda", "0.05"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sol: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(sol["beta_hat"].as_array().unwrap().len(), 16);
    assert!(sol["kkt_residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(sol["signed_support"][0], 1);
    assert_eq!(sol["resolved_config"]["parameters"]["lambda"]["source"], "flag");

    // same seed and noise settings as `gen`, so w matches the stored y
    let o = splasso(
        d,
        &["witness", "--matrix", "m.txt", "--k", "2", "--base-seed", "4", "--sigma2", "0.01", "--lambda", "0.05"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rep: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["event_u", "event_v", "invertible", "margins", "sign_consistent", "success", "u", "va", "vb"] {
        assert!(rep.get(key).is_some(), "missing {key}");
    }
    let witness_ok = rep["success"].as_bool().unwrap();
    let lasso_signs: Vec<i64> = sol["signed_support"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_i64().unwrap())
        .collect();
    let exact = lasso_signs[..2] == [1, 1] && lasso_signs[2..].iter().all(|s| *s == 0);
    assert_eq!(witness_ok, exact);
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = SMALL_SWEEP.to_vec();
    args.push("--dry-run");
    let o = splasso(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("# base_seed = 7 (flag)"));
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 5);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut a = SMALL_SWEEP.to_vec();
    a.extend(["--output-csv", "a.csv", "--output-json", "a.json", "--threads", "4"]);
    let mut b = SMALL_SWEEP.to_vec();
    b.extend(["--output-csv", "b.csv", "--output-json", "b.json", "--threads", "1"]);
    assert!(splasso(d, &a).status.success());
    assert!(splasso(d, &b).status.success());
    let read = |f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    let (ja, jb): (serde_json::Value, serde_json::Value) = (
        serde_json::from_slice(&read("a.json")).unwrap(),
        serde_json::from_slice(&read("b.json")).unwrap(),
    );
    // only the output names and thread count differ
    assert_eq!(ja["rows"], jb["rows"]);
    assert_eq!(ja["config"], jb["config"]);
    assert_eq!(ja["config"]["base_seed"], 7);
    let first = (read("a.csv"), read("a.json"));
    assert!(splasso(d, &a).status.success());
    assert_eq!(first, (read("a.csv"), read("a.json")));
    let csv = String::from_utf8(read("a.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn config_file_layers() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    // an empty file behaves like no file, including the seed requirement
    std::fs::write(d.join("empty.toml"), "").unwrap();
    let o = splasso(d, &["--config", "empty.toml", "check-conditions"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("# eps = 0 (default)"));
    let o = splasso(d, &["bounds", "--config", "empty.toml"]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(
        d.join("c.toml"),
        "[check-conditions]\np_list = [1024]\neps = 0.5\nbeta_min = 2\n\n[sweep]\ntrials = 3\n",
    )
    .unwrap();
    let o = splasso(d, &["check-conditions", "--config", "c.toml", "--eps", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("# eps = 0 (flag)"));
    assert!(out.contains("# p_list = 1024 (file)"));
    assert!(out.contains("# beta_min = 2 (file)"));
    assert!(out.contains("# sparsity = polynomial:0.5 (default)"));
    assert!(out.contains("\n1024\t32\t442\t"));
}

#[test]
fn unknown_config_key_suggests_nearest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c.toml"), "[solve]\nlamda = 0.3\n").unwrap();
    let o = splasso(d, &["solve", "--config", "c.toml", "--matrix", "m", "--y", "y"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("unknown key `lamda`") && err.contains("did you mean `lambda`"), "{err}");
    assert!(err.contains("Usage:"));

    std::fs::write(d.join("c.toml"), "[sweep]\nthreads = 2\n[bound]\nsamples = 1\n").unwrap();
    let o = splasso(d, &["check-conditions", "--config", "c.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("[bounds]"));
}

#[test]
fn bounds_report_each_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = splasso(dir.path(), &["bounds", "--base-seed", "3", "--samples", "4000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.ends_with("\tPASS")).count(), 9);
}

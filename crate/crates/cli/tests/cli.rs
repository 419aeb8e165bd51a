use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_hapvec");

fn hapvec(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    fs::read_to_string(path).unwrap()
}

fn first_line(text: &str) -> &str {
    text.lines().next().unwrap_or("")
}

#[test]
fn headers_match_golden_files() {
    for mode in ["analytical", "simulate", "both"] {
        let out = hapvec(&["analyze", "--mode", mode, "--frames", "10000"]);
        assert!(out.status.success());
        assert_eq!(first_line(&stdout(&out)), first_line(&golden(&format!("analyze_{mode}.csv"))));

        let out = hapvec(&["sweep", "--param", "r", "--values", "5,10", "--mode", mode, "--frames", "10000"]);
        assert!(out.status.success());
        assert_eq!(first_line(&stdout(&out)), first_line(&golden(&format!("sweep_{mode}.csv"))));
    }
    let out = hapvec(&["validate", "--frames", "10000"]);
    assert!(out.status.success());
    assert_eq!(first_line(&stdout(&out)), first_line(&golden("validate.csv")));
}

#[test]
fn validate_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (path, seed) in [(&a, "11"), (&b, "11"), (&c, "12")] {
        let out = hapvec(&["validate", "--frames", "50000", "--seed", seed, "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn sweep_with_simulation_is_reproducible() {
    let args = ["sweep", "--preset", "fig2a", "--mode", "both", "--frames", "20000", "--seed", "9"];
    let first = stdout(&hapvec(&args));
    assert_eq!(first, stdout(&hapvec(&args)));
    assert_eq!(first.lines().count(), 5);
}

#[test]
fn unstable_cells_hold_no_numbers() {
    let out = hapvec(&["sweep", "--preset", "fig1b"]);
    let text = stdout(&out);
    let header: Vec<&str> = first_line(&text).split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[col("value")], "200");
    assert_eq!(row[col("local_stable")], "false");
    assert_eq!(row[col("p_rt_local")], "unstable");
    assert_eq!(row[col("latency_local")], "unstable");
}

#[test]
fn trace_lists_measured_frames() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = hapvec(&["validate", "--frames", "20000", "--trace", trace.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(&trace).unwrap();
    assert_eq!(first_line(&text), "frame_id,path,gen_time,end_time,met_deadline");
    assert!(text.lines().count() > 10_000);
    assert!(text.lines().skip(1).all(|l| l.contains(",gv,") || l.contains(",hap,")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "frame_rate = 0.0\n").unwrap();
    assert_eq!(hapvec(&["analyze", "--config", bad.to_str().unwrap()]).status.code(), Some(1));

    let infeasible = dir.path().join("inf.toml");
    fs::write(&infeasible, "[compute]\ngv_capacity = 100e9\nhap_capacity = 100e9\n").unwrap();
    let out = hapvec(&["analyze", "--config", infeasible.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("infeasible"));

    let missing = dir.path().join("missing.toml");
    assert_eq!(hapvec(&["analyze", "--config", missing.to_str().unwrap()]).status.code(), Some(3));
    let unwritable = dir.path().join("no/such/dir/out.csv");
    assert_eq!(hapvec(&["analyze", "--out", unwritable.to_str().unwrap()]).status.code(), Some(3));

    assert_eq!(hapvec(&["sweep", "--param", "n", "--values", "90,50"]).status.code(), Some(1));
    assert_eq!(hapvec(&["validate", "--eta", "1.0"]).status.code(), Some(1));
    assert_eq!(hapvec(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(hapvec(&["analyze"]).status.code(), Some(0));
}

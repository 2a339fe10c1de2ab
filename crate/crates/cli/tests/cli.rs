use std::fs;
use std::process::{Command, Output};

fn kinkline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinkline")).args(args).env_remove("KINKLINE_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn lists_nineteen_functions() {
    let o = kinkline(&["list-functions"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 19);
    assert!(out.starts_with("SU1"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = kinkline(&["bench", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn unknown_function_is_a_usage_error() {
    let o = kinkline(&["minimize", "--function", "XX9", "--algorithm", "brent"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_bracket_is_a_usage_error() {
    let o = kinkline(&["minimize", "--function", "NU1", "--algorithm", "eupm", "--bracket", "1,2,3,4,5,6,7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn minimize_converges_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let o = kinkline(&["minimize", "--function", "NU1", "--algorithm", "dupm", "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Converged"));
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), "iteration,xL1,xM,xR1,d,f(xM)");
    assert!(lines.count() > 1);
}

#[test]
fn stalled_run_exits_with_one() {
    let o = kinkline(&[
        "minimize",
        "--function",
        "NU3",
        "--algorithm",
        "supm",
        "--alpha",
        "0",
        "--bracket=-2.23927,-2.171330,-1.811263,1.820150,2.102197,2.293404,2.334091",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("BudgetExhausted"));
}

#[test]
fn bench_csv_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let run = |p: &std::path::Path, jobs: &str| {
        let o = kinkline(&[
            "bench",
            "--suite",
            "nu",
            "--trials",
            "20",
            "--seed",
            "1",
            "--jobs",
            jobs,
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(p).unwrap()
    };
    let first = run(&a, "1");
    let second = run(&b, "3");
    assert_eq!(first, second);
    let mut lines = first.lines();
    assert_eq!(lines.next().unwrap(), "# trials=20 seed=1 eps=1e-8 budget=500");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.len() == 9));
    assert_eq!(rows[0][0], "Functions");
    assert_eq!(rows[1][0], "NU1");
}

#[test]
fn skipping_mifflin_keeps_other_columns() {
    let full = stdout(&kinkline(&["bench", "--suite", "su", "--trials", "10", "--seed", "3"]));
    let skip = stdout(&kinkline(&["bench", "--suite", "su", "--trials", "10", "--seed", "3", "--skip", "mifflin"]));
    for (f, s) in full.lines().skip(1).zip(skip.lines().skip(1)) {
        let f: Vec<&str> = f.split(',').collect();
        let s: Vec<&str> = s.split(',').collect();
        assert_eq!(f.len(), s.len() + 1);
        assert_eq!(&f[..s.len()], &s[..]);
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let args = ["minimize", "--function", "SU2", "--algorithm", "golden"];
    let env = Command::new(env!("CARGO_BIN_EXE_kinkline")).args(args).env("KINKLINE_SEED", "7").output().unwrap();
    let flag = kinkline(&[&args[..], &["--seed", "7"]].concat());
    let other = kinkline(&args);
    assert_eq!(env.stdout, flag.stdout);
    assert_ne!(env.stdout, other.stdout);
}

#[test]
fn seqexp_writes_all_patterns() {
    let o = kinkline(&["seqexp", "--bits", "4", "--samples", "50", "--seed", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), "sequence,bits,eupm_rate,golden_rate");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r.ends_with(",0.618034")));
}

#[test]
fn verify_sequences_passes() {
    let o = kinkline(&["verify", "--sequences", "--samples", "500"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.ends_with(" ok")).count(), 12);
}

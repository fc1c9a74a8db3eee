use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bench")).args(args).current_dir(cwd).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_config_is_one_line_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bench(&["vmv", "--config", "nope.toml"], dir.path());
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.starts_with("E_CONFIG: "), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn unknown_key_and_bad_subcommand_fail() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "no_such_key = 3\n").unwrap();
    let o = bench(&["lpreg", "--config", "c.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("E_CONFIG: "));
    let o = bench(&["frobnicate", "--config", "c.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("E_USAGE: "));
}

#[test]
fn bad_dataset_reports_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("data.csv"), "1,2,0\n3,x,1\n").unwrap();
    std::fs::write(dir.path().join("c.toml"), "dataset = \"data.csv\"\n").unwrap();
    let o = bench(&["scores", "--config", "c.toml"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("E_PARSE: "), "{}", stderr(&o));
}

#[test]
fn writes_csv_config_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "seeds = 2\nks = [4, 8]\nout = \"res\"\n").unwrap();
    let o = bench(&["vmv", "--config", "c.toml", "--svg"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("res");
    let csv = std::fs::read_to_string(out.join("vmv.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,seed,abs_err"));
    assert_eq!(lines.count(), 4);
    assert!(!csv.contains('\r'));
    assert!(out.join("vmv.svg").exists());
    let echoed = std::fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(echoed.contains("ks = [4, 8]") || echoed.contains("ks = [\n"), "{echoed}");
}

#[test]
fn seed_flag_changes_results_and_libsvm_input_loads() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for i in 0..60 {
        let x = i as f64 / 10.0;
        text.push_str(&format!("{} 1:{x} 2:{} 3:{}\n", i % 2, (x * 1.7).sin(), 1.0 + (i % 7) as f64));
    }
    std::fs::write(dir.path().join("d.svm"), text).unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "dataset = \"d.svm\"\nformat = \"libsvm\"\nschemes = [\"Uniform\", \"LS\"]\nsample_size = 10\nmax_outer = 5\n",
    )
    .unwrap();
    let run = |seed: &str, out: &str| {
        let o = bench(&["optimize", "--config", "c.toml", "--seed", seed, "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(dir.path().join(out).join("optimize_newton_mr_Uniform_seed0.csv")).unwrap()
    };
    assert_eq!(run("1", "a"), run("1", "b"));
    assert_ne!(run("1", "a"), run("2", "c"));
}

use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use abclab::cli::{all_flags, command};

fn abclab(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abclab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("ABCLAB_OUT")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn files_under(dir: &Path) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            for f in files_under(&p) {
                out.insert(format!("{}/{f}", p.file_name().unwrap().to_string_lossy()));
            }
        } else {
            out.insert(p.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    out
}

const SAMPLE: &[&str] = &[
    "sample",
    "--model",
    "linear",
    "--sampler",
    "rejection",
    "--n",
    "100",
    "--draws",
    "1000",
    "--eps",
    "0.5",
    "--seed",
    "7",
];

#[test]
fn predict_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let o = abclab(dir.path(), &["predict", "--model", "linear", "--c", "0", "--out", "o"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("I ") && text.contains("I_inverse"), "{text}");
}

#[test]
fn unknown_flag_is_a_usage_error_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = abclab(dir.path(), &["sample", "--bogus-flag", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--bogus-flag"), "{}", stderr(&o));
}

#[test]
fn bad_value_names_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = abclab(dir.path(), &["sample", "--n", "many", "--eps", "1", "--out", "o"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--n"), "{}", stderr(&o));
    let o = abclab(dir.path(), &["sample", "--eps", "1", "--threads", "x", "--out", "o"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--threads"));
}

#[test]
fn runtime_errors_exit_one_with_the_error_name() {
    let dir = tempfile::tempdir().unwrap();
    let o = abclab(dir.path(), &["sample", "--eps", "1e-9", "--draws", "5", "--max-proposals", "2000", "--out", "o"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error[NoAcceptances]"), "{}", stderr(&o));
}

#[test]
fn experiment_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = abclab(dir.path(), &["experiment", "rate", "--out", "o"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn sample_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = SAMPLE.to_vec();
    a.extend(["--out", "a", "--threads", "1"]);
    let mut b = SAMPLE.to_vec();
    b.extend(["--out", "b", "--threads", "4"]);
    assert_eq!(abclab(dir.path(), &a).status.code(), Some(0));
    assert_eq!(abclab(dir.path(), &b).status.code(), Some(0));
    let ra = std::fs::read(dir.path().join("a/sample.csv")).unwrap();
    let rb = std::fs::read(dir.path().join("b/sample.csv")).unwrap();
    assert_eq!(ra, rb);
    let header = String::from_utf8_lossy(&ra).lines().next().unwrap().to_string();
    assert_eq!(header, "theta_1,s_1,weight,distance");
}

#[test]
fn manifest_reruns_and_flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = SAMPLE.to_vec();
    a.extend(["--out", "a"]);
    assert_eq!(abclab(dir.path(), &a).status.code(), Some(0));
    let manifest = dir.path().join("a/sample.manifest.txt");
    let text = std::fs::read_to_string(&manifest).unwrap();
    assert!(text.contains("# subcommand = sample") && text.contains("seed = 7") && text.contains("# started = "));
    let m = manifest.to_str().unwrap();
    assert_eq!(abclab(dir.path(), &["sample", "--config", m, "--out", "b"]).status.code(), Some(0));
    assert_eq!(
        std::fs::read(dir.path().join("a/sample.csv")).unwrap(),
        std::fs::read(dir.path().join("b/sample.csv")).unwrap()
    );
    assert_eq!(abclab(dir.path(), &["sample", "--config", m, "--seed", "8", "--out", "c"]).status.code(), Some(0));
    assert!(std::fs::read_to_string(dir.path().join("c/sample.manifest.txt")).unwrap().contains("seed = 8"));
    assert_ne!(
        std::fs::read(dir.path().join("a/sample.csv")).unwrap(),
        std::fs::read(dir.path().join("c/sample.csv")).unwrap()
    );
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "eps = 1\nwibble = 2\n").unwrap();
    let o = abclab(dir.path(), &["sample", "--config", "bad.txt", "--out", "o"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("wibble"));
}

#[test]
fn nothing_is_written_outside_out() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    let mut a = SAMPLE.to_vec();
    a.extend(["--out", "out/s"]);
    assert_eq!(abclab(cwd, &a).status.code(), Some(0));
    let runs: [&[&str]; 4] = [
        &["adjust", "--in", "out/s/sample.csv", "--sobs", "1", "--out", "out/a"],
        &["predict", "--model", "multi:2", "--c", "1", "--out", "out/p"],
        &["oracle", "--eps", "0.5", "--n", "100", "--out", "out/o"],
        &["experiment", "model_error", "--seed", "3", "--draws", "2000", "--rounds", "3", "--out", "out/e"],
    ];
    for args in runs {
        let o = abclab(cwd, args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(abclab(cwd, &["list-models"]).status.code(), Some(0));
    let top: Vec<String> =
        std::fs::read_dir(cwd).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert_eq!(top, vec!["out".to_string()]);
    let files = files_under(&cwd.join("out"));
    for f in [
        "s/sample.csv",
        "s/sample.manifest.txt",
        "a/adjust.csv",
        "a/adjust.manifest.txt",
        "p/predict.csv",
        "p/predict.manifest.txt",
        "o/oracle.csv",
        "o/oracle.manifest.txt",
        "e/model_error.csv",
        "e/model_error.svg",
        "e/model_error.verdicts.txt",
        "e/model_error.manifest.txt",
    ] {
        assert!(files.contains(f), "missing {f} in {files:?}");
    }
}

#[test]
fn out_env_is_the_default_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_abclab"))
        .args(["predict"])
        .current_dir(dir.path())
        .env("ABCLAB_OUT", "envout")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("envout/predict.csv").exists());
}

#[test]
fn adjust_adds_adjusted_columns() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = SAMPLE.to_vec();
    a.extend(["--out", "o"]);
    assert_eq!(abclab(dir.path(), &a).status.code(), Some(0));
    let o = abclab(dir.path(), &["adjust", "--in", "o/sample.csv", "--sobs", "1.0", "--out", "o"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("o/adjust.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "theta_1,s_1,weight,distance,theta_adj_1");
    assert_eq!(text.lines().count(), 1001);
    let o = abclab(dir.path(), &["adjust", "--in", "o/missing.csv", "--sobs", "1", "--out", "o"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error[Io]"));
}

#[test]
fn flag_registry_matches_help() {
    let root = command();
    let mut registered = BTreeSet::new();
    for a in root.get_arguments() {
        registered.extend(a.get_long().map(str::to_string));
    }
    for sub in root.get_subcommands() {
        for a in sub.get_arguments() {
            registered.extend(a.get_long().map(str::to_string));
        }
    }
    registered.remove("help");
    registered.remove("version");
    let declared: BTreeSet<String> = all_flags().into_iter().collect();
    assert_eq!(registered, declared);

    let dir = tempfile::tempdir().unwrap();
    let top = stdout(&abclab(dir.path(), &["--help"]));
    for f in &declared {
        assert!(top.contains(&format!("--{f}")), "top-level help lacks --{f}");
    }
    for sub in root.get_subcommands() {
        let help = stdout(&abclab(dir.path(), &[sub.get_name(), "--help"]));
        for a in sub.get_arguments() {
            if let Some(l) = a.get_long() {
                assert!(help.contains(&format!("--{l}")), "{} help lacks --{l}", sub.get_name());
            }
        }
    }
}

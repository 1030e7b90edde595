use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn magtube(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magtube")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const TINY: &str = r#"
name = "tiny"
seed = 3

[experiments]
run = ["threshold", "lemma"]

[experiments.threshold]
half_width = 5.0
h = 0.25

[experiments.lemma]
radii = [1.0, 1.2]
fields = [10.0, 20.0, 40.0, 80.0, 160.0]
nr = 300
"#;

fn run_dir(out: &Path) -> PathBuf {
    fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_string_lossy().starts_with("tiny-"))
        .expect("run directory")
}

fn files_with_ext(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> =
        fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|e| e == ext)).collect();
    v.sort();
    v
}

#[test]
fn unknown_keys_exit_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.toml", "colour = 1\n[grid]\nspacing = 0.1\n");
    let out = magtube(&["dry-run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("colour") && err.contains("grid.spacing"), "{err}");
}

#[test]
fn violated_tube_condition_exits_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "a1.toml", "[fields]\ns0 = 1.2\n[experiments]\nrun = [\"theorem2\"]\n");
    let out = magtube(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("B(0, s₀)"));
}

#[test]
fn numerical_failure_exits_with_code_3_and_records_it() {
    // a straight tube has no bound state to start the sweep from
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "straight.toml",
        "name = \"tiny\"\n[fields]\nb0 = [0.0, 0.0, 1.0]\ns0 = 2.5\n[grid]\nh = 0.5\nmargin = 1.0\n\
         [experiments]\nrun = [\"theorem2\"]\n[experiments.theorem2]\nb3 = [0.0, 1.0]\n\
         [experiments.lemma]\nnr = 200\n",
    );
    let out = magtube(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
    let errors = fs::read_to_string(run_dir(tmp.path()).join("errors.json")).unwrap();
    assert!(errors.contains("no initial bound state"), "{errors}");
}

#[test]
fn dry_run_dump_reparses_to_the_same_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "tiny.toml", TINY);
    let out = magtube(&["dry-run", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let hash = |t: &str| t.lines().next().unwrap().split("hash ").nth(1).unwrap().trim_end_matches(')').to_string();
    let dump: String = text.lines().skip(1).filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    assert!(text.contains("# threshold") && text.contains("# lemma"));
    let again = write(tmp.path(), "dump.toml", &dump);
    let out2 = magtube(&["dry-run", "--config", again.to_str().unwrap()]);
    assert_eq!(hash(&text), hash(&String::from_utf8(out2.stdout).unwrap()));
}

#[test]
fn cache_hit_export_and_clean() {
    let tmp = tempfile::tempdir().unwrap();
    let out_root = tmp.path().join("runs");
    let cfg = write(tmp.path(), "tiny.toml", TINY);
    let args = ["run", "--config", cfg.to_str().unwrap(), "--out", out_root.to_str().unwrap()];

    let first = magtube(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(!String::from_utf8_lossy(&first.stdout).contains("(cached)"));
    let dir = run_dir(&out_root);
    for name in ["scenario.toml", "report.md", "run.json"] {
        assert!(dir.join(name).exists(), "{name}");
    }
    assert!(!dir.join("errors.json").exists());
    let jsons = files_with_ext(&dir, "json").into_iter().filter(|p| !p.ends_with("run.json")).collect::<Vec<_>>();
    assert_eq!(jsons.len(), 2);
    let before: Vec<Vec<u8>> = jsons.iter().map(|p| fs::read(p).unwrap()).collect();

    let second = magtube(&args);
    assert!(second.status.success());
    assert_eq!(String::from_utf8_lossy(&second.stdout).matches("(cached)").count(), 2);
    let after: Vec<Vec<u8>> = jsons.iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(before, after, "cache hit must reproduce the summaries byte for byte");

    // recomputing from scratch is deterministic too
    let fresh = magtube(&[&args[..], &["--no-cache"]].concat());
    assert!(fresh.status.success());
    let recomputed: Vec<Vec<u8>> = jsons.iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(before, recomputed);

    let csvs = files_with_ext(&dir, "csv");
    let originals: Vec<Vec<u8>> = csvs.iter().map(|p| fs::read(p).unwrap()).collect();
    for p in &csvs {
        fs::remove_file(p).unwrap();
    }
    let exp = magtube(&["export", "--config", cfg.to_str().unwrap(), "--out", out_root.to_str().unwrap()]);
    assert!(exp.status.success());
    let exported: Vec<Vec<u8>> = csvs.iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(originals, exported);

    let clean = magtube(&["cache", "clean", "--out", out_root.to_str().unwrap()]);
    assert!(clean.status.success());
    assert!(String::from_utf8_lossy(&clean.stdout).starts_with("removed 2 "));
    let third = magtube(&args);
    assert!(!String::from_utf8_lossy(&third.stdout).contains("(cached)"));
}

#[test]
fn seed_override_changes_the_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "tiny.toml", TINY);
    let a = String::from_utf8(magtube(&["dry-run", "--config", cfg.to_str().unwrap()]).stdout).unwrap();
    let b = String::from_utf8(magtube(&["dry-run", "--config", cfg.to_str().unwrap(), "--seed", "11"]).stdout).unwrap();
    let line = |t: &str| t.lines().find(|l| l.starts_with("# output directory")).unwrap().to_string();
    assert_ne!(line(&a), line(&b));
}

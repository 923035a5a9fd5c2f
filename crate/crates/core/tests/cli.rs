use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_negtype"))
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn report_writes_every_file() {
    let out = tempfile::tempdir().unwrap();
    let cache = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["--config", &config("z1.toml"), "--out"])
        .arg(out.path())
        .arg("--cache")
        .arg(cache.path())
        .args(["--threads", "2", "report"])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    for f in ["balls.csv", "growth.csv", "ell.csv", "verify.json", "spectral.csv", "spectral.json", "summary.json", "meta.json"] {
        assert!(out.path().join(f).exists(), "missing {f}");
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.path().join("summary.json")).unwrap()).unwrap();
    for key in ["group", "mu", "d_hat", "params", "properness", "verdicts", "d_s_estimate"] {
        assert!(summary.get(key).is_some(), "summary lacks {key}");
    }
    assert_eq!(std::fs::read_dir(cache.path()).unwrap().count(), 1);
    let spectral = std::fs::read_to_string(out.path().join("spectral.csv")).unwrap();
    assert!(spectral.starts_with("x,count,certified\n"));
    let ell = std::fs::read_to_string(out.path().join("ell.csv")).unwrap();
    assert!(ell.starts_with("element,word_length,ell_num,ell_den,tail_bound,n_terms\n(0),0,0,1,0,"));
}

#[test]
fn seed_flag_changes_only_random_checks() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, seed) in [(&a, "1"), (&b, "2")] {
        let st = bin()
            .args(["--config", &config("z1.toml"), "--seed", seed, "--out"])
            .arg(dir.path())
            .arg("verify")
            .status()
            .unwrap();
        assert!(st.success());
    }
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    assert_eq!(read(&a, "growth.csv"), read(&b, "growth.csv"));
    assert_ne!(read(&a, "verify.json"), read(&b, "verify.json"));
}

#[test]
fn bad_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "radius = 40\nbeta = 0.5\ngamma = 1.5\n[group]\nkind = \"heisenberg3\"\n").unwrap();
    let out = bin().arg("--config").arg(&path).arg("growth").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));

    std::fs::write(&path, "radius = 40\nd_target = 1.5\nfoo = 3\n[group]\nkind = \"heisenberg3\"\n").unwrap();
    let out = bin().arg("--config").arg(&path).arg("growth").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("foo") && err.contains("line 3"), "{err}");
}

#[test]
fn small_horizon_asks_for_larger_radius() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.toml");
    std::fs::write(&path, "radius = 10\nd_target = 1.5\ndepth = 20\n[group]\nkind = \"free_abelian\"\nrank = 1\n").unwrap();
    let out = bin()
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .arg("construct")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("increase R to"));
}

#[test]
fn failing_verdict_sets_exit_status() {
    // With x levels at and above the bound nothing is certified, so the
    // sublevel and spectral fits cannot succeed.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("uncert.toml");
    std::fs::write(
        &path,
        "radius = 40\nd_target = 1.5\ndepth = 4\ncombine = 0\nx_grid = [10.0, 11.0, 12.0, 13.0]\n[group]\nkind = \"free_abelian\"\nrank = 1\n",
    )
    .unwrap();
    let out = bin()
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .arg("spectral")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("spectral_dimension   FAIL"));
}

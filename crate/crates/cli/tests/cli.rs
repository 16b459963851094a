use std::path::Path;
use std::process::{Command, Output};

fn nhbs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhbs"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn body(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn fig4_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(nhbs(a.path(), &["fig4"]).status.success());
    assert!(nhbs(b.path(), &["fig4", "--workers", "1"]).status.success());
    for name in ["fig4_surface.csv", "fig4_corners.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
    }
    let text = std::fs::read_to_string(a.path().join("fig4_corners.csv")).unwrap();
    assert!(text.starts_with("# nhbs fig4 / fig4_corners"));
    assert!(text.contains("# resolved configuration:"));
}

#[test]
fn missing_output_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = nhbs(&dir.path().join("absent"), &["fig4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
}

#[test]
fn unknown_override_key_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = nhbs(dir.path(), &["fig4", "--override", "fig4.no_such_key=3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_file_key_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[grid]\nnz = 51\n").unwrap();
    let out = nhbs(dir.path(), &["fig4", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_and_overrides_shape_fig2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(
        &cfg,
        "[grid]\nn_z = 41\n\n[fig2]\nods = [0.0]\nomega_bs_mhz = [12.0]\nomega_s_mhz = [[9.0]]\n",
    )
    .unwrap();
    let out = nhbs(
        dir.path(),
        &[
            "fig2",
            "--config",
            cfg.to_str().unwrap(),
            "--override",
            "fig2.omega_s_mhz=[[6.0]]",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = body(&dir.path().join("fig2_overlap.csv"));
    assert_eq!(rows.len(), 2);
    // No medium: nothing is stored and the pair stays classical.
    assert!(rows[1].starts_with("0,12,6,0,0,"), "{}", rows[1]);
    let header = std::fs::read_to_string(dir.path().join("fig2_overlap.csv")).unwrap();
    assert!(header.contains("#   n_z = 41"));
}

#[test]
fn random_sweep_depends_on_seed_only() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--seed",
        "11",
        "--override",
        "sweep.mode=\"random\"",
        "--override",
        "sweep.steps=2",
        "--override",
        "sweep.base.od=0.0",
    ];
    assert!(nhbs(a.path(), &args).status.success());
    assert!(nhbs(b.path(), &args).status.success());
    let name = std::fs::read_dir(a.path())
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .file_name();
    assert_eq!(
        std::fs::read(a.path().join(&name)).unwrap(),
        std::fs::read(b.path().join(&name)).unwrap()
    );
    assert!(std::fs::read_to_string(a.path().join(&name))
        .unwrap()
        .contains("# seed: 11"));
}

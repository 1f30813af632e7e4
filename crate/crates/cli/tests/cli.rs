use std::fs;
use std::process::Command;

fn scsec() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scsec"))
}

#[test]
fn small_run_writes_tables_and_figures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "n_states = 6\nk_values = [3]\n\n[budget]\npeak = 10.0\naverages = [0.5, 5.0]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = scsec()
        .args(["--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["sweep.csv", "fig2.svg", "fig3.svg", "allocations_sc_sca_0.5.csv", "allocations_sc_optimal_5_k3.csv"] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let rows = scsec_cli::read_sweep_csv(&out.join("sweep.csv")).unwrap();
    // Semantic schemes at K = 3 and 5, bit schemes at K = 5, two budgets each.
    assert_eq!(rows.len(), 6 * 2);
}

#[test]
fn invalid_config_exits_nonzero_and_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[budget]\npeak = 1.0\naverages = [0.5, 2.0]\n").unwrap();
    let out = scsec().arg("--config").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("budget.averages[1]"), "{err}");
}

#[test]
fn unknown_scheme_is_rejected() {
    let out = scsec().args(["--schemes", "sc_optimal,magic"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));
}

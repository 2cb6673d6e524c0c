use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_domino-cool"));
    c.env_remove("DOMINO_COOL_THREADS");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config_arg(name: &str) -> String {
    configs().join(name).to_str().unwrap().to_owned()
}

#[test]
fn cool_reports_all_solvers_and_differences() {
    let o = run(&["cool", "--config", &config_arg("fig3.toml")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "solver,quantity,n_f_1,n_f_2");
    assert_eq!(lines.len(), 1 + 3 + 3);
    for line in &lines[4..] {
        let worst = line
            .split(',')
            .skip(2)
            .map(|v| v.parse::<f64>().unwrap())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{line}");
    }
    // 17 significant digits
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[2].split('e').next().unwrap().len(), 18);
}

#[test]
fn unstable_config_exits_with_numerical_code_and_names_the_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("fig6_n3.toml"))
        .unwrap()
        .replace("g_cd = 0.9", "g_cd = 100.0");
    let path = dir.path().join("unstable.toml");
    fs::write(&path, text).unwrap();
    let o = run(&["cool", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("eigenvalue") && err.contains("positive real part"), "{err}");

    let o = run(&["cool", "--config", path.to_str().unwrap(), "--json-errors"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    let v: serde_json::Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(v["error"]["kind"], "stability");
}

#[test]
fn config_problems_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[dimensionless]\nN = 2\nkappa = 3.5\nwat = 1\n").unwrap();
    let o = run(&["cool", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    let missing = dir.path().join("missing.toml");
    let o = run(&["stability", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.toml"));

    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["cool"]).status.code(), Some(1));
    let o = run(&["sweep", "--config", &config_arg("fig3.toml"), "--axis", "kappa:1:1:3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fig6_with_four_resonators_has_ordered_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["figure", "fig6", "--N", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("fig6_chain_n4.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "eta_tilde,n_f_1,n_f_2,n_f_3,n_f_4,stable");
    assert_eq!(table.lines().count(), 31);
}

#[test]
fn figure_tables_replay_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for (fig, config, extra) in [
        ("fig4", "fig4.toml", vec![]),
        ("fig6", "fig6_n3.toml", vec!["--N", "3"]),
    ] {
        let mut args = vec!["figure", fig, "--out", out];
        args.extend(extra);
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        for file in stdout(&o).lines() {
            let header = fs::read_to_string(file).unwrap();
            if !header.lines().next().unwrap().contains("n_f_1") {
                continue;
            }
            let o = run(&["sweep", "--config", &config_arg(config), "--replay", file]);
            assert_eq!(o.status.code(), Some(0), "{file}: {}", stderr(&o));
            assert!(stdout(&o).contains("reproduced identically"));
        }
    }
}

#[test]
fn tampered_table_fails_replay() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = run(&[
        "sweep",
        "--config",
        &config_arg("fig3.toml"),
        "--axis",
        "g_cd:0.5:1.5:3",
        "--solver",
        "lyapunov",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let cells: Vec<String> = lines[2].split(',').map(String::from).collect();
    let bumped = cells[1].parse::<f64>().unwrap() * (1.0 + 1e-12);
    lines[2] = format!("{},{bumped:.16e},{},{}", cells[0], cells[2], cells[3]);
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let o = run(&["sweep", "--config", &config_arg("fig3.toml"), "--replay", path.to_str().unwrap(), "--solver", "lyapunov"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("1 of 3 rows differ"), "{}", stderr(&o));
}

#[test]
fn json_sweep_carries_diagnostics() {
    let o = run(&[
        "sweep",
        "--config",
        &config_arg("fig5.toml"),
        "--axis",
        "omega_2/omega_1:1:2:3",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0]["quadrature_nodes"].as_u64().unwrap() > 0);
    assert_eq!(rows[0]["stable"], true);
}

#[test]
fn switch_and_optimize_print_single_rows() {
    let o = run(&[
        "switch",
        "--config",
        &config_arg("fig5.toml"),
        "--param",
        "eta_tilde_1",
        "--lo",
        "0.02",
        "--hi",
        "0.2",
        "--solver",
        "appendix",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let row = stdout(&o).lines().nth(1).unwrap().to_owned();
    let value: f64 = row.split(',').next().unwrap().parse().unwrap();
    assert!((value - 0.06).abs() < 0.01);

    let o = run(&[
        "optimize",
        "--config",
        &config_arg("fig3.toml"),
        "--bound",
        "kappa:1:6",
        "--solver",
        "appendix",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let row = stdout(&o).lines().nth(1).unwrap().to_owned();
    let kappa: f64 = row.split(',').next().unwrap().parse().unwrap();
    assert!((2.5..3.5).contains(&kappa), "{kappa}");

    let o = run(&["switch", "--config", &config_arg("fig5.toml"), "--param", "eta_tilde_1", "--lo", "0.1", "--hi", "0.2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectra_and_response_grids() {
    let o = run(&[
        "spectra",
        "--config",
        &config_arg("fig3.toml"),
        "--omega-min",
        "-2",
        "--omega-max",
        "2",
        "--omega-points",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("omega,S_q_1,S_q_2,S_fb_1"));

    let o = run(&["response", "--config", &config_arg("fig2.toml"), "--omega-points", "11"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 12);

    let o = run(&["response", "--config", &config_arg("fig6_n3.toml")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["sweep", "--config", &config_arg("fig3.toml"), "--axis", "P_L:0.01:0.5:4:log"];
    let one = bin().args(args).env("DOMINO_COOL_THREADS", "1").output().unwrap();
    let four = bin().args(args).arg("--threads").arg("4").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn stability_lists_eigenvalues() {
    let o = run(&["stability", "--config", &config_arg("fig3.toml"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["stable"], true);
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 2 + 4 + 1);
}

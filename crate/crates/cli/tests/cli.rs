use std::process::{Command, Output};

use phaselab::report::{max_field_difference, parse_csv, parse_json, CSV_HEADER};

fn phaselab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phaselab"))
        .args(args)
        .env_remove("PHASELAB_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn grid_file(name: &str, rows: &str) -> String {
    let path = std::env::temp_dir().join(format!("phaselab-{}-{name}.csv", std::process::id()));
    std::fs::write(&path, format!("gamma,h,omega\n{rows}")).unwrap();
    format!("file={}", path.display())
}

#[test]
fn decoupled_state_has_zero_geometric_phase() {
    let o = phaselab(&[
        "aa", "--model", "z", "--gamma", "1", "--h", "0.5", "--omega", "0.3",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# model z: angles in rad, principal values in (-pi, pi]"));
    assert!(text.contains("(1+gamma)/4"));
    let row = text
        .lines()
        .find(|l| l.contains(" P+1 "))
        .expect("decoupled row");
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cols[8], "0.000000");
    assert_eq!(cols[9], "0.000000");
}

#[test]
fn x_holonomy_angle() {
    let o = phaselab(&[
        "holonomy", "--model", "x", "--gamma", "0.5", "--h", "0.5", "--omega", "0.5", "--group",
        "1",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("angle closed   -0.920151"), "{text}");
    assert!(text.contains("angle numeric  -0.920151"), "{text}");
    assert_eq!(text.lines().skip_while(|l| *l != "factor").count(), 3);

    let o = phaselab(&[
        "holonomy", "--model", "x", "--gamma", "0.5", "--h", "0.5", "--omega", "0.5", "--group",
        "1", "--format", "csv",
    ]);
    let text = stdout(&o);
    let mut lines = text.lines();
    let keys: Vec<&str> = lines.next().unwrap().split(',').collect();
    let values: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let at = |k: &str| values[keys.iter().position(|x| *x == k).unwrap()];
    let expected = std::f64::consts::PI * (0.5f64.sqrt() - 1.0);
    assert!((at("angle_numeric") - expected).abs() < 1e-9);
    assert!((at("u11_re") - expected.cos()).abs() < 1e-9);
    assert!(at("u12_re").abs() < 1e-9);
}

#[test]
fn csv_and_json_carry_the_same_rows() {
    let base = [
        "aa", "--model", "z", "--gamma", "0.5", "--h", "0.3", "--omega", "0.2",
    ];
    let csv = stdout(&phaselab(&[&base[..], &["--format", "csv"]].concat()));
    assert!(csv.starts_with(&format!("{CSV_HEADER}\n")));
    assert!(csv.ends_with('\n'));
    let json = stdout(&phaselab(&[&base[..], &["--format", "json"]].concat()));
    let a = parse_csv(&csv).unwrap();
    let b = parse_json(&json).unwrap();
    assert_eq!(a.len(), 8);
    assert!(max_field_difference(&a, &b).unwrap() < 1e-15);
    for r in &a {
        assert!(r.residual < 1e-9);
    }
}

#[test]
fn state_and_group_selection() {
    let one = stdout(&phaselab(&[
        "aa", "--gamma", "0.5", "--h", "0.3", "--omega", "0.2", "--state", "3", "--format", "csv",
    ]));
    assert_eq!(one.lines().count(), 2);
    let group = stdout(&phaselab(&[
        "aa", "--model", "x", "--gamma", "0.5", "--h", "0.3", "--omega", "0.2", "--group", "2",
        "--format", "csv",
    ]));
    let rows = parse_csv(&group).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.state.starts_with("B2.")));
    let o = phaselab(&[
        "aa", "--gamma", "0.5", "--h", "0.3", "--omega", "0.2", "--state", "9",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_rows_follow_grid_order() {
    let grid = grid_file(
        "sweep",
        "0.5,0.3,0.1\n0.5,0.3,0.2\n0.5,0.3,0.3\n0.5,0.3,0.4\n0.5,0.3,0.5\n",
    );
    let o = phaselab(&["sweep", "--grid", &grid, "--format", "csv"]);
    assert!(o.status.success());
    let rows = parse_csv(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 40);
    let omegas: Vec<f64> = rows.iter().step_by(8).map(|r| r.omega).collect();
    assert_eq!(omegas, vec![0.1, 0.2, 0.3, 0.4, 0.5]);
    let again = phaselab(&["sweep", "--grid", &grid, "--format", "csv"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn berry_and_spectrum() {
    let o = phaselab(&[
        "berry", "--gamma", "0", "--h", "0", "--omega", "1", "--format", "json",
    ]);
    assert!(o.status.success());
    let rows = parse_json(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 8);
    let l1 = rows.iter().find(|r| r.state == "L+1").unwrap();
    assert!((l1.geometric_numeric - std::f64::consts::PI).abs() < 1e-9);

    let o = phaselab(&[
        "spectrum", "--model", "z", "--gamma", "0.5", "--h", "0.3", "--omega", "0.5", "--format",
        "csv",
    ]);
    let text = stdout(&o);
    assert!(text.starts_with("operator,index,value,closed,multiplicity\n"));
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn verify_on_a_small_grid() {
    let grid = grid_file("verify", "0.5,0.3,0.5\n1,0.5,0.3\n");
    let o = phaselab(&["verify", "--grid", &grid]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().count(), 11);
    for (k, line) in text.lines().enumerate() {
        assert!(line.starts_with(&format!("PASS {:>2} ", k + 1)), "{line}");
        assert!(line.contains("residual=") && line.contains("tol="));
    }
    let json = stdout(&phaselab(&["verify", "--grid", &grid, "--format", "json"]));
    assert_eq!(json.matches("\"status\": \"PASS\"").count(), 11);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec![
            "aa", "--gamma", "1", "--h", "0.5", "--omega", "0.3", "--bogus",
        ],
        vec!["frobnicate"],
        vec!["aa", "--gamma", "1", "--h", "0.5"],
        vec![
            "aa", "--model", "y", "--gamma", "1", "--h", "0.5", "--omega", "0.3",
        ],
        vec![
            "holonomy", "--gamma", "1", "--h", "0.5", "--omega", "0.3", "--group", "3",
        ],
        vec!["aa", "--gamma", "1", "--h", "0.5", "--omega", "-0.3"],
        vec!["sweep", "--grid", "nowhere.csv"],
        vec!["sweep", "--grid", "file=/nonexistent/grid.csv"],
        vec![
            "aa", "--gamma", "1", "--h", "0.5", "--omega", "0.3", "--tol", "-1",
        ],
    ] {
        let o = phaselab(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(phaselab(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failure_exits_two() {
    let o = phaselab(&["aa", "--gamma", "1e15", "--h", "0.3", "--omega", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn tolerance_flag_beats_environment() {
    let grid = grid_file("tol", "0.5,0.3,0.5\n");
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_phaselab"));
        cmd.args(["verify", "--grid", &grid]);
        if let Some(t) = flag {
            cmd.args(["--tol", t]);
        }
        match env {
            Some(v) => cmd.env("PHASELAB_TOL", v),
            None => cmd.env_remove("PHASELAB_TOL"),
        };
        cmd.output().unwrap()
    };
    assert_eq!(run(Some("-1"), None).status.code(), Some(1));
    assert_eq!(run(Some("-1"), Some("1e-10")).status.code(), Some(0));
    assert_eq!(run(Some("abc"), None).status.code(), Some(1));
}

use std::fs;
use std::process::{Command, Output};

use pmqkd::ProtocolParams;
use pmqkd_cli::sweep::render_csv;
use pmqkd_cli::{run_sweep, Mode, SweepSpec};

fn pmqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmqkd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|c| c == name)
        .unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn analytic_sweep_rate_is_nonincreasing_and_alive_at_400() {
    let rows = run_sweep(&ProtocolParams::default(), &SweepSpec::default()).unwrap();
    assert_eq!(rows.len(), 51);
    for w in rows.windows(2) {
        assert!(w[1].report.rate_bits <= w[0].report.rate_bits);
    }
    let at_400 = rows.iter().find(|r| r.report.distance_km == 400.0).unwrap();
    assert!(at_400.report.rate_bits > 0.0);
}

#[test]
fn csv_values_round_trip_to_twelve_digits() {
    let spec = SweepSpec {
        l_end: 300.0,
        l_step: 25.0,
        ..Default::default()
    };
    let rows = run_sweep(&ProtocolParams::default(), &spec).unwrap();
    let csv = render_csv(&rows, Mode::Analytic);
    let rates = column(&csv, "rate_bits");
    for (parsed, row) in rates.iter().zip(&rows) {
        let want = row.report.rate_bits;
        assert!((parsed - want).abs() <= 1e-11 * want.abs());
    }
}

#[test]
fn sweep_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rates.csv");
    let o = pmqkd(&[
        "sweep", "--end", "100", "--step", "50", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert_eq!(column(&csv, "L_km"), vec![0.0, 50.0, 100.0]);
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rates.config.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["params"]["n"], 3);
    assert_eq!(sidecar["params"]["M"], 16);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "sweep", "--mode", "both", "--end", "100", "--step", "50", "--rounds", "20000",
        "--seed", "9",
    ];
    let a = pmqkd(&args);
    let b = pmqkd(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_config_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    fs::write(&config, "n = 3\nmu = -1\n").unwrap();
    let out = dir.path().join("out.csv");
    let o = pmqkd(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert!(!out.exists());

    fs::write(&config, "speed = 3\n").unwrap();
    let o = pmqkd(&["sweep", "--config", config.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn invalid_sweep_arguments_fail() {
    assert!(!pmqkd(&["sweep", "--start", "100", "--end", "50"]).status.success());
    assert!(!pmqkd(&["sweep", "--step", "0"]).status.success());
    assert!(!pmqkd(&["sweep", "--mode", "montecarlo", "--rounds", "0"]).status.success());
    assert!(!pmqkd(&["table", "--n", "3", "--s", "3"]).status.success());
}

#[test]
fn table_subcommand_prints_nine_rows() {
    let o = pmqkd(&["table"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().nth(1).unwrap().contains("D2"));
}

#[test]
fn config_file_changes_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("two.cfg");
    fs::write(&config, "# binary protocol\nn = 2\n").unwrap();
    let o = pmqkd(&[
        "sweep", "--config", config.to_str().unwrap(), "--end", "0", "--mu", "0.1",
    ]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    // with n = 2 both rate columns describe the same protocol
    assert_eq!(column(&csv, "rate_bits"), column(&csv, "rate_2pm_bits"));
    assert_eq!(column(&csv, "mu"), vec![0.1]);
}

#[test]
fn mc_check_subcommand_passes_at_modest_rounds() {
    let o = pmqkd(&["mc-check", "--rounds", "200000", "--mu", "0.5", "--distances", "20"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
    assert!(o.status.success());
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rbc_cli::config::Settings;
use rbc_cli::manifest::RunManifest;

fn rbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbc"))
        .args(args)
        .env_remove("RBC_CONFIG")
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("spawn rbc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Value of a `key = value` line in a report.
fn field(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key)?.trim_start().strip_prefix('=')?.trim().parse().ok())
        .unwrap_or_else(|| panic!("no '{key}' in:\n{report}"))
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

#[test]
fn fit_recovers_bundled_dataset() {
    let o = rbc(&["fit", &data("synthetic_sqrt.csv")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout(&o);
    for (k, truth) in [("a1", 3.331), ("b1", 10.2), ("c1", -11.99)] {
        let got = field(&r, k);
        assert!(((got - truth) / truth).abs() < 1e-6, "{k} = {got}");
    }
    assert!(field(&r, "mse") < 1e-10);
}

#[test]
fn fit_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.csv");
    let o = rbc(&["fit", &data("synthetic_sqrt.csv"), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("ps_W,pbt_W,fitted_W,squared_error\n"));
    assert_eq!(csv.lines().count(), 21);
    let m = RunManifest::parse(&fs::read_to_string(dir.path().join("fit.csv.manifest")).unwrap()).unwrap();
    assert_eq!(m.command, "fit");
    assert_eq!(m.timestamp, "2023-11-14T22:13:20Z");
}

#[test]
fn linear_fit_of_two_points_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("two.csv");
    fs::write(&input, "ps_W,pbt_W\n10,3\n30,9\n").unwrap();
    let o = rbc(&["fit", "--method", "linear", input.to_str().unwrap()]);
    assert!(o.status.success());
    let r = stdout(&o);
    assert!((field(&r, "slope") - 0.3).abs() < 1e-12);
    assert!(field(&r, "intercept").abs() < 1e-12);
    assert!(field(&r, "mse") < 1e-24);
}

#[test]
fn malformed_row_exits_2_citing_row() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "ps_W,pbt_W\n10,3\nabc,1.0\n").unwrap();
    let o = rbc(&["fit", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("abc,1.0"), "{err}");
}

#[test]
fn fit_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.csv");
    fs::write(&input, "ps_W,pbt_W\n10,5\n20,5\n30,5\n40,5\n").unwrap();
    let o = rbc(&["fit", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn channel_examples() {
    let r = stdout(&rbc(&["channel", "--scenario", "high", "--range", "0"]));
    assert_eq!(field(&r, "eta_bt"), 1.0);

    let r = stdout(&rbc(&["channel", "--scenario", "high", "--lambda", "1550", "--range", "5"]));
    assert!((field(&r, "eta_bt") - 0.8833).abs() < 1e-4);

    let r = stdout(&rbc(&["channel", "--scenario", "high", "--target-eta", "0.8833"]));
    assert!((field(&r, "range_km") - 5.0).abs() < 1e-2);

    assert_eq!(rbc(&["channel", "--visibility", "60", "--range", "1"]).status.code(), Some(2));
    assert_eq!(rbc(&["channel", "--scenario", "foggy"]).status.code(), Some(2));
}

#[test]
fn pv_mpp_matches_reference_point() {
    let o = rbc(&["pv", "--mpp", "25", "--temp", "25"]);
    assert!(o.status.success());
    let r = stdout(&o);
    assert!((field(&r, "power_W") - 12.19).abs() < 1e-3);
    assert!((field(&r, "voltage_V") - 40.11).abs() / 40.11 < 0.05);

    assert_eq!(rbc(&["pv", "--mpp", "0"]).status.code(), Some(2));
    assert_eq!(rbc(&["pv", "--mpp", "-1"]).status.code(), Some(2));
    // Any positive beam power still yields a positive-power region.
    assert!(rbc(&["pv", "--mpp", "0.0001", "--temp", "25"]).status.success());
}

#[test]
fn pv_curve_current_strictly_decreases() {
    let r = stdout(&rbc(&["pv", "--curve", "25", "--points", "101"]));
    let mut lines = r.lines();
    assert_eq!(lines.next(), Some("voltage_V,current_A,power_W"));
    let current: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(current.len(), 101);
    assert!(current.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(*current.last().unwrap(), 0.0);
}

#[test]
fn pv_calibrate_writes_reloadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cal.cfg");
    let o = rbc(&["pv", "--calibrate", "--ref-power", "11", "--out", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let settings = Settings::parse(&fs::read_to_string(&cfg).unwrap()).unwrap();
    assert!((settings.diode.area_factor - field(&stdout(&o), "area_factor_per_cm2")).abs() < 1e-15);

    let r = stdout(&rbc(&["--config", cfg.to_str().unwrap(), "pv", "--mpp", "25"]));
    assert!((field(&r, "power_W") - 11.0).abs() < 1e-3);

    // An unreachable reference power fails the bracket.
    assert_eq!(rbc(&["pv", "--calibrate", "--ref-power", "1e6"]).status.code(), Some(3));
}

#[test]
fn optimize_example() {
    let r = stdout(&rbc(&["optimize", "--eta-bt", "1.0", "--temp", "25"]));
    assert!((field(&r, "ps_star_W") - 23.45).abs() < 0.01);
    assert!((field(&r, "eta_opt_percent") - 12.7).abs() < 0.05);
    assert_eq!(rbc(&["optimize", "--eta-bt", "0"]).status.code(), Some(2));
    assert_eq!(rbc(&["optimize", "--eta-bt", "1", "--temp", "80"]).status.code(), Some(2));
}

#[test]
fn optimize_from_range_matches_direct() {
    let via_range = stdout(&rbc(&["optimize", "--range", "5", "--scenario", "high"]));
    let eta = field(&via_range, "eta_bt");
    let direct = stdout(&rbc(&["optimize", "--eta-bt", &eta.to_string()]));
    assert_eq!(field(&via_range, "ps_star_W"), field(&direct, "ps_star_W"));
}

#[test]
fn sweep_row_count_and_schema() {
    let o = rbc(&["sweep", "--eta-bt", "0.3:1.0:0.1", "--temp", "0,25,50", "--ps", "5:100:0.5"]);
    assert!(o.status.success());
    let r = stdout(&o);
    let mut lines = r.lines();
    assert_eq!(lines.next(), Some("ps_W,eta_bt,temp_C,pm_W,pb_W,eta_om,ps_star_W,eta_opt"));
    assert_eq!(lines.count(), 8 * 3 * 191);
}

#[test]
fn sweep_infeasible_rows_have_empty_efficiency() {
    let r = stdout(&rbc(&["sweep", "--eta-bt", "0.7", "--temp", "0", "--ps", "1,40"]));
    let rows: Vec<&str> = r.lines().skip(1).collect();
    assert_eq!(rows[0].split(',').nth(5), Some(""));
    let eta: f64 = rows[1].split(',').nth(5).unwrap().parse().unwrap();
    assert!((eta - 0.0922).abs() < 1e-3);
}

#[test]
fn sweep_over_ranges() {
    let r = stdout(&rbc(&["sweep", "--range", "0,5", "--scenario", "high", "--temp", "25", "--ps", "40"]));
    let eta: Vec<f64> = r.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(eta[0], 1.0);
    assert!((eta[1] - 0.8832149276563939).abs() < 1e-12);
}

#[test]
fn sweep_manifest_reparses_to_same_settings() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    fs::write(&cfg, "converter.eta_dc = 0.85\nchannel.visibility_km = 11\n").unwrap();
    let out = dir.path().join("s.csv");
    let o = rbc(&[
        "--config", cfg.to_str().unwrap(),
        "sweep", "--eta-bt", "0.5", "--ps", "30", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = RunManifest::parse(&fs::read_to_string(dir.path().join("s.csv.manifest")).unwrap()).unwrap();
    let direct = Settings::parse(&fs::read_to_string(&cfg).unwrap()).unwrap();
    assert_eq!(m.settings, direct);
    assert_eq!(m.settings.link.eta_dc, 0.85);
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("env.cfg");
    fs::write(&cfg, "converter.eta_dc = 0.5\n").unwrap();
    let base = stdout(&rbc(&["optimize", "--eta-bt", "1"]));
    let o = Command::new(env!("CARGO_BIN_EXE_rbc"))
        .args(["optimize", "--eta-bt", "1"])
        .env("RBC_CONFIG", &cfg)
        .output()
        .unwrap();
    let scaled = stdout(&o);
    let ratio = field(&scaled, "eta_opt") / field(&base, "eta_opt");
    assert!((ratio - 0.5 / 0.9).abs() < 1e-12);
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "converter.eta_dc = 1.5\n").unwrap();
    let o = rbc(&["--config", cfg.to_str().unwrap(), "optimize", "--eta-bt", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eta_dc"));
}

#[test]
fn manifest_reproduces_run_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    fs::write(&cfg, "battery.eta_ce = 0.8\n").unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    let args = ["sweep", "--eta-bt", "0.6,0.9", "--temp", "10", "--ps", "20:30:2.5", "--out"];

    let mut a: Vec<&str> = vec!["--config", cfg.to_str().unwrap()];
    a.extend(args);
    a.push(first.to_str().unwrap());
    assert!(rbc(&a).status.success());

    let manifest = dir.path().join("a.csv.manifest");
    let mut b: Vec<&str> = vec!["--config", manifest.to_str().unwrap()];
    b.extend(args);
    b.push(second.to_str().unwrap());
    let o = rbc(&b);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

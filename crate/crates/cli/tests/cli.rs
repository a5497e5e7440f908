use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn resilval(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resilval"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn demo(dir: &Path) {
    let o = resilval(&["demo", "demo"], dir);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn missing_weather_exits_2_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    demo(tmp.path());
    let cfg = tmp.path().join("demo/config.json");
    let text = fs::read_to_string(&cfg).unwrap().replace("weather_uri_like.csv", "gone.csv");
    fs::write(&cfg, text).unwrap();
    let o = resilval(&["run", "--config", "demo/config.json", "--trials", "5"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gone.csv"), "{}", stderr(&o));
}

#[test]
fn bad_config_field_exits_2_naming_file_and_field() {
    let tmp = tempfile::tempdir().unwrap();
    demo(tmp.path());
    let cfg = tmp.path().join("demo/config.json");
    let text = fs::read_to_string(&cfg).unwrap().replace("\"n_groups\": 3", "\"n_groups\": \"three\"");
    fs::write(&cfg, text).unwrap();
    let o = resilval(&["run", "--config", "demo/config.json"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("config.json") && err.contains("outage.n_groups"), "{err}");
}

#[test]
fn unknown_scenario_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = resilval(&["run", "--config", "x.json", "--scenario", "blackout"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runs_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    demo(tmp.path());
    for (out, threads) in [("a", "1"), ("b", "8")] {
        let o = resilval(
            &["run", "--config", "demo/config.json", "--scenario", "co", "--trials", "100", "--threads", threads, "--out", out],
            tmp.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["trials.csv", "summary.json", "histogram.csv", "exposure.csv"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
}

#[test]
fn compare_and_export() {
    let tmp = tempfile::tempdir().unwrap();
    demo(tmp.path());
    for s in ["co", "ro-hi"] {
        let o = resilval(&["run", "--config", "demo/config.json", "--scenario", s, "--trials", "50", "--out", s], tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let o = resilval(&["compare", "co", "ro-hi", "--out", "cmp.csv"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("NEI reduction RO-HI vs CO"), "{stdout}");
    let csv = fs::read_to_string(tmp.path().join("cmp.csv")).unwrap();
    assert!(csv.starts_with("metric,CO,RO-HI,pct_vs_CO_RO-HI"), "{csv}");
    assert_eq!(csv.lines().count(), 11);

    let o = resilval(&["export-exposure", "ro-hi"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("ro-hi/exposure_by_class.csv").is_file());

    let o = resilval(&["compare", "co", "missing"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing"));
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn veff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_veff"))
        .args(args)
        .output()
        .unwrap()
}

fn run(sub: &str, config: &Path, out: &Path) -> Output {
    veff(&[sub, config.to_str().unwrap(), "-o", out.to_str().unwrap()])
}

/// Copy of a scenario with some keys replaced.
fn variant(dir: &Path, name: &str, overrides: &[(&str, &str)]) -> PathBuf {
    let text = fs::read_to_string(scenario(name)).unwrap();
    let mut lines: Vec<String> = text
        .lines()
        .filter(|l| {
            !overrides
                .iter()
                .any(|(k, _)| l.split('=').next().unwrap().trim() == *k)
        })
        .map(str::to_owned)
        .collect();
    lines.extend(overrides.iter().map(|(k, v)| format!("{k} = {v}")));
    let path = dir.join(name);
    fs::write(&path, lines.join("\n")).unwrap();
    path
}

fn summary(out: &Path) -> String {
    fs::read_to_string(out.join("summary.txt")).unwrap()
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let idx = rdr
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == name)
        .unwrap();
    rdr.records().map(|r| r.unwrap()[idx].to_owned()).collect()
}

#[test]
fn constant_tube_has_no_correction() {
    let out = TempDir::new().unwrap();
    let o = run("deltav", &scenario("constant_tube.ini"), out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dv = column(&out.path().join("deltav.csv"), "dveff");
    assert_eq!(dv.len(), 1024);
    assert!(dv.iter().all(|v| v == "0.0"));
}

#[test]
fn negative_mass_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = variant(tmp.path(), "constant_tube.ini", &[("params.mass", "-1")]);
    let o = run("deltav", &cfg, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mass"));
    assert!(!tmp.path().join("deltav.csv").exists());
}

#[test]
fn unknown_key_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = variant(tmp.path(), "constant_tube.ini", &[("grid.nodes", "10")]);
    let o = run("deltav", &cfg, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.nodes"));
}

#[test]
fn compare_passes_on_the_wide_tube() {
    let out = TempDir::new().unwrap();
    let o = run("compare", &scenario("tube_circle.ini"), out.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let s = summary(out.path());
    assert!(s.lines().any(|l| l == "status=pass"), "{s}");
    for f in ["report.csv", "trajectories.csv"] {
        assert!(out.path().join(f).exists(), "{f}");
    }
}

#[test]
fn compare_reports_a_missed_tolerance() {
    let tmp = TempDir::new().unwrap();
    let cfg = variant(
        tmp.path(),
        "tube_circle.ini",
        &[
            ("compare.tolerance", "1e-12"),
            ("compare.refine", "false"),
            ("time.t_end", "0.5"),
        ],
    );
    let o = run("compare", &cfg, tmp.path());
    assert_eq!(o.status.code(), Some(4));
    let s = summary(tmp.path());
    assert!(
        s.contains("status=fail") && s.contains("oracle_tolerance"),
        "{s}"
    );
}

#[test]
fn reduce_check_recovers_cosh() {
    let out = TempDir::new().unwrap();
    let o = run("reduce-check", &scenario("product_metric.ini"), out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(summary(out.path()).contains("reducible=true"));
    let b: Vec<f64> = column(&out.path().join("reduce_x.csv"), "b")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(b.len(), 9);
    assert!(b.iter().all(|v| v.is_finite() && *v > 0.0));
}

#[test]
fn classical_full_orbit_stays_circular() {
    let out = TempDir::new().unwrap();
    let o = run("classical", &scenario("plane_orbit.ini"), out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let xs = column(&out.path().join("classical.csv"), "x");
    assert!(xs
        .iter()
        .all(|x| (x.parse::<f64>().unwrap() - 1.0).abs() < 1e-10));
}

#[test]
fn help_lists_every_scenario_key() {
    let o = veff(&["--help"]);
    let text = String::from_utf8_lossy(&o.stdout);
    for key in veff::config::KEYS.iter().map(|(k, _)| k) {
        assert!(text.contains(key), "{key} missing from --help");
    }
    for sub in [
        "deltav",
        "classical",
        "semiclassical",
        "evolve-full",
        "evolve-reduced",
        "compare",
        "reduce-check",
    ] {
        assert!(text.contains(sub), "{sub}");
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for sub in ["deltav", "evolve-full", "evolve-reduced", "semiclassical"] {
        for dir in [&a, &b] {
            let o = run(sub, &scenario("constant_tube.ini"), dir.path());
            assert!(
                o.status.success(),
                "{sub}: {}",
                String::from_utf8_lossy(&o.stderr)
            );
        }
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 4);
    for name in names {
        assert_eq!(
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gabor_stab::grid::{make_gaussian, read_grid, GridGeometry};
use gabor_stab_cli::config::ExperimentConfig;
use gabor_stab_cli::{run_config, RunContext};
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gabor-stab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn run_in(dir: &Path, config: &str) {
    let text = fs::read_to_string(configs().join(config)).unwrap();
    let cfg = ExperimentConfig::parse(&text).unwrap();
    run_config(&cfg, &RunContext { out_dir: dir.to_path_buf(), seed: None }).unwrap();
}

#[test]
fn gen_roundtrips_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), "gen_gaussian.json");
    let bytes = fs::read(dir.path().join("gaussian.ggr")).unwrap();
    assert_eq!(&bytes[..4], b"GGR1");
    let back = read_grid(dir.path().join("gaussian.ggr")).unwrap().into_complex().unwrap();
    let geom = GridGeometry::new(vec![512], vec![0.03125], vec![-8.0]).unwrap();
    let expected = make_gaussian(1, &geom).unwrap();
    assert_eq!(back.geometry(), expected.geometry());
    assert_eq!(back.values(), expected.values());
}

#[test]
fn inadmissible_stability_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("stability_inadmissible.json");
    let out = bin(&["stability", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("stability.json").exists());
}

#[test]
fn entire_gaussian_exponential_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("entire_gaussian_exp.json");
    let out = bin(&["entire", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("ballnorms.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,norm,bound,slope_so_far"));
    assert_eq!(lines.count(), 10);
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("entire.json")).unwrap()).unwrap();
    let slope = summary["fitted_slope"].as_f64().unwrap();
    assert!((slope - 3.0).abs() < 0.05, "slope {slope}");
    assert_eq!(summary["bound_exponent"].as_f64(), Some(3.0));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", "{ \"command\": \"gen\", ");
    assert_eq!(bin(&["--config", &bad]).status.code(), Some(2));

    let unknown = write_config(dir.path(), "unknown.json", r#"{ "command": "gen", "signal": { "kind": "gaussian", "dim": 1 }, "geometry": { "extents": [8], "spacing": [0.5], "origin": [0.0] }, "colour": 1 }"#);
    assert_eq!(bin(&["--config", &unknown]).status.code(), Some(2));

    assert_eq!(bin(&["gen"]).status.code(), Some(2));

    let cfg = configs().join("gen_gaussian.json");
    let out = bin(&["cheeger", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not match"));
}

#[test]
fn io_errors_exit_5() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(bin(&["--config", missing.to_str().unwrap()]).status.code(), Some(5));

    fs::write(dir.path().join("junk.ggr"), b"not a grid").unwrap();
    let cfg = write_config(
        dir.path(),
        "file.json",
        &format!(
            r#"{{ "command": "cheeger", "weight": {{ "kind": "file", "path": "{}" }} }}"#,
            dir.path().join("junk.ggr").display()
        ),
    );
    assert_eq!(bin(&["--config", &cfg, "--out", dir.path().to_str().unwrap()]).status.code(), Some(5));
}

#[test]
fn cheeger_summary_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{ "command": "cheeger", "weight": { "kind": "gaussian", "geometry": { "extents": [33, 33], "spacing": [0.25, 0.25], "origin": [-4.0, -4.0] } } }"#,
    );
    let out = bin(&["--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("cheeger.json")).unwrap()).unwrap();
    for key in ["h_upper", "fiedler_value", "cut_mass_left", "cut_mass_right", "cut_weight", "active_cells", "disconnected", "poincare_bound"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let h = v["h_upper"].as_f64().unwrap();
    assert!(h > 0.5 && h < 3.0, "h {h}");
    assert_eq!(v["poincare_bound"].as_f64().unwrap(), 8.0 / h);
}

#[test]
fn stability_pair_report_keys() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), "stability_pair.json");
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("stability.json")).unwrap()).unwrap();
    for key in [
        "p", "q", "d", "lhs", "h_upper", "h", "sobolev_term", "weighted_term", "logderiv_term", "rhs_thm23",
        "rhs_thm44_shape", "ratio", "empirical_ratio", "z0", "active_cells", "noise",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["noise"]["epsilon"].as_f64().unwrap() > 0.0);
    assert!(v["lhs"].as_f64().unwrap() > 0.0);
}

#[test]
fn sweep_writes_one_row_per_t() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), "stability_sweep.json");
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "T,h,lhs,sobolev,weighted,ratio");
    assert_eq!(lines.len(), 6);
    let rows: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);
    let ratios: Vec<f64> =
        lines[1..].iter().map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
}

#[test]
fn outputs_are_deterministic_across_threads() {
    let cfg = configs().join("cheeger_gaussian.json");
    let mut outputs = Vec::new();
    for threads in ["1", "4", "4"] {
        let dir = tempfile::tempdir().unwrap();
        let out = bin(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--threads", threads]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(fs::read(dir.path().join("cheeger.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);

    let gabor = configs().join("gabor_two_bump.json");
    let mut grids = Vec::new();
    for threads in ["1", "3"] {
        let dir = tempfile::tempdir().unwrap();
        let out = bin(&["gabor", "--config", gabor.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--threads", threads]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        grids.push((fs::read(dir.path().join("gabor.ggr")).unwrap(), fs::read(dir.path().join("spectrogram.ggr")).unwrap()));
    }
    assert_eq!(grids[0], grids[1]);
}

#[test]
fn seed_flag_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("stability_pair.json");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    fs::create_dir_all(&a).unwrap();
    fs::create_dir_all(&b).unwrap();
    assert!(bin(&["--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap(), "--seed", "1"]).status.success());
    assert!(bin(&["--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--seed", "2"]).status.success());
    let ea: Value = serde_json::from_str(&fs::read_to_string(a.join("stability.json")).unwrap()).unwrap();
    let eb: Value = serde_json::from_str(&fs::read_to_string(b.join("stability.json")).unwrap()).unwrap();
    assert_ne!(ea["noise"]["gamma_dnorm"], eb["noise"]["gamma_dnorm"]);
}

mod radii {
    use gabor_stab_cli::config::RadiiConfig;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn ranges_hit_both_ends_in_order(start in 0.1f64..5.0, span in 0.1f64..20.0, count in 2usize..40, log in any::<bool>()) {
            let stop = start + span;
            let v = RadiiConfig::Range { start, stop, count, log }.values();
            prop_assert_eq!(v.len(), count);
            prop_assert!((v[0] - start).abs() <= 1e-12 * start);
            prop_assert!((v[count - 1] - stop).abs() <= 1e-12 * stop);
            prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
        }
    }
}

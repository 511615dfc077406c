use std::path::Path;
use std::process::Command;

use photon_decay::experiment::{parse_config_str, run, ExperimentConfig, ExperimentKind, Overrides, Plan};
use photon_decay::Error;

fn config_error(text: &str) -> (String, Option<usize>, String) {
    match parse_config_str(text, &Overrides::default()) {
        Err(Error::Config { key, line, reason }) => (key, line, reason),
        other => panic!("expected a config error, got {other:?}"),
    }
}

const RATES: &str = "experiment = \"rates\"\nseed = 4\n\n[chain]\nsites = 64\n\n[solver]\ngamma_b = 0.0\n";

#[test]
fn minimal_toy_config_resolves_every_default() {
    let (cfg, _) = parse_config_str("experiment = \"toy\"\nseed = 1\n[toy]\n", &Overrides::default()).unwrap();
    let text = cfg.to_toml();
    for key in [
        "threads",
        "units",
        "out",
        "spacing",
        "eta",
        "epsilon_d",
        "delta_min",
        "ratio_min",
        "ratio_max",
        "points",
        "fit_samples",
        "survival_gamma_fgr",
        "survival_t_max",
        "survival_samples",
        "window_fraction",
        "floor",
        "fit_tol",
        "min_points",
    ] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{key} ="))), "{key} missing in\n{text}");
    }
    let (again, _) = parse_config_str(&text, &Overrides::default()).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn resolved_rates_config_round_trips() {
    let text = RATES.replace("gamma_b = 0.0", "gamma_b = 0.05");
    let (cfg, plan) = parse_config_str(&text, &Overrides::default()).unwrap();
    let (again, plan2) = parse_config_str(&cfg.to_toml(), &Overrides::default()).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(plan, plan2);
    let Plan::Rates(p) = plan else { panic!() };
    assert!((p.chain.spacing() - 1.0).abs() < 1e-12);
    assert!(p.run.d_omega() <= 0.1 * p.run.gamma_b);
}

#[test]
fn zero_broadening_is_rejected() {
    let (key, line, reason) = config_error(RATES);
    assert_eq!(key, "solver.gamma_b");
    assert_eq!(line, Some(8));
    assert!(reason.contains("finite external broadening"), "{reason}");
}

#[test]
fn coarse_grid_is_rejected() {
    let text = RATES.replace("gamma_b = 0.0", "gamma_b = 0.05\npoints = 4096");
    let (key, line, reason) = config_error(&text);
    assert_eq!((key.as_str(), line), ("solver.points", Some(9)));
    assert!(reason.contains("Γᵇ/10"), "{reason}");
}

#[test]
fn unknown_key_is_rejected_with_its_line() {
    let (key, line, reason) = config_error("experiment = \"fgr\"\nseed = 1\n[fgr]\nz = 0.5\nzz = 1\n");
    assert!(key.starts_with("fgr"), "{key}");
    assert_eq!(line, Some(5));
    assert!(reason.contains("zz"));
}

#[test]
fn missing_section_and_seed() {
    let (key, _, _) = config_error("experiment = \"toy\"\nseed = 1\n");
    assert_eq!(key, "toy");
    let (key, _, reason) = config_error("experiment = \"toy\"\n[toy]\n");
    assert_eq!(key, "seed");
    assert!(reason.contains("seed"));
    let ov = Overrides { seed: Some(9), ..Default::default() };
    let (cfg, _) = parse_config_str("experiment = \"toy\"\n[toy]\n", &ov).unwrap();
    assert_eq!(cfg.seed, Some(9));
}

#[test]
fn experiment_override_switches_sections() {
    let text = "experiment = \"toy\"\nseed = 1\n[toy]\n[fgr]\nz = 1.0\n";
    let ov = Overrides { experiment: Some(ExperimentKind::Fgr), ..Default::default() };
    let (cfg, plan) = parse_config_str(text, &ov).unwrap();
    assert!(matches!(plan, Plan::Fgr(_)));
    assert!(cfg.toy.is_none());
}

#[test]
fn ghz_units_reproduce_the_large_array_spacing() {
    let text = "experiment = \"rates\"\nseed = 1\nunits = \"ghz\"\n[chain]\nsites = 10000\nvelocity = 3330.0\n\
                plasma = 15.0\nej = 1.0\n[solver]\ngamma_b = 0.0017\n";
    let (_, plan) = parse_config_str(text, &Overrides::default()).unwrap();
    let Plan::Rates(p) = plan else { panic!() };
    let delta_ghz = p.chain.spacing() / (2.0 * std::f64::consts::PI);
    assert!((delta_ghz - 0.1665).abs() < 1e-3, "{delta_ghz}");
    let (key, _, _) = config_error(&text.replace("velocity = 3330.0\n", ""));
    assert_eq!(key, "chain.velocity");
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn toy_run_is_byte_identical_across_thread_counts() {
    let text = "experiment = \"toy\"\nseed = 2\n[toy]\npoints = 9\nsurvival_samples = 101\n";
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (dir, threads) in dirs.iter().zip([1, 3]) {
        let ov = Overrides { out: Some(dir.path().to_path_buf()), threads: Some(threads), ..Default::default() };
        let (cfg, plan) = parse_config_str(text, &ov).unwrap();
        let m = run(&cfg, &plan).unwrap();
        assert_eq!(m.outputs.len(), 2);
        assert!(dir.path().join("manifest.toml").exists());
        let resolved = std::fs::read_to_string(dir.path().join("resolved_config.toml")).unwrap();
        ExperimentConfig::from_toml(&resolved).unwrap();
    }
    let (a, b) = (csv_bytes(dirs[0].path()), csv_bytes(dirs[1].path()));
    assert_eq!(a.len(), 2);
    assert_eq!(a, b);
}

#[test]
fn fgr_run_has_bath_curves_and_reference() {
    let dir = tempfile::tempdir().unwrap();
    let text = "experiment = \"fgr\"\nseed = 1\n[fgr]\npoints = 5\nomega_max = 100.0\nclosed_form = true\n";
    let ov = Overrides { out: Some(dir.path().to_path_buf()), ..Default::default() };
    let (cfg, plan) = parse_config_str(text, &ov).unwrap();
    run(&cfg, &plan).unwrap();
    let body = std::fs::read_to_string(dir.path().join("fgr.csv")).unwrap();
    assert!(body.contains("omega_over_Delta,bath,rate_over_Delta,method,reference_over_Delta"));
    for tag in [",3,", ",9,", ",sum,", "closed_form"] {
        assert!(body.contains(tag), "{tag}");
    }
    // 4 baths + sum + 4 closed-form curves, 5 points each
    assert_eq!(body.lines().filter(|l| !l.starts_with('#')).count(), 1 + 9 * 5);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_photon-decay");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, RATES).unwrap();
    let st = Command::new(exe).arg("--config").arg(&bad).status().unwrap();
    assert_eq!(st.code(), Some(2));

    let good = dir.path().join("good.toml");
    std::fs::write(&good, "experiment = \"fgr\"\n[fgr]\npoints = 3\nomega_max = 50.0\n").unwrap();
    let out = dir.path().join("out");
    let st = Command::new(exe)
        .args(["--seed", "5", "--threads", "1", "--experiment", "fgr", "--out"])
        .arg(&out)
        .arg("--config")
        .arg(&good)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let resolved = std::fs::read_to_string(out.join("resolved_config.toml")).unwrap();
    assert!(resolved.contains("seed = 5"));
}

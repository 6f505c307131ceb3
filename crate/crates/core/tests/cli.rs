//! Command-line behaviour: exit codes, output files and reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use hybrid_sampler::cli;
use hybrid_sampler::config::load_config_file;
use hybrid_sampler::model::estimate_scattering_time;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("hybrid-sampler").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn validate_vacuum_passes() {
    let (code, out, _) = run(&["validate", "--config", path_str(&config("vacuum.json"))]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("vacuum probability = 1"), "{out}");
    assert!(out.trim_end().ends_with("RESULT: PASS"));
}

#[test]
fn prob_on_thermal_mode() {
    let (code, out, _) = run(&[
        "prob",
        "--config",
        path_str(&config("thermal1.json")),
        "--counts",
        "1",
    ]);
    assert_eq!(code, 0);
    let p: f64 = out.trim().parse().unwrap();
    assert!((p - 0.25).abs() < 1e-12, "{p}");
}

#[test]
fn haf_of_all_ones() {
    let (code, out, _) = run(&["haf", "--matrix", path_str(&config("ones4.json"))]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("3 + 0i"));
    assert!(out.contains("matching-sum: 3 + 0i"));
    assert!(out.contains("agreement:"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["frobnicate"]).0, 2);
    let (code, _, err) = run(&["build", "--config", "/nonexistent/config.json"]);
    assert_eq!(code, 2, "{err}");

    let missing = write_config(
        dir.path(),
        "missing.json",
        r#"{ "mode": "DirectBlocks", "M_ph": 0, "delta_a": 1.0,
             "direct_blocks": { "eps_a": [[1.0]] } }"#,
    );
    let (code, _, err) = run(&["build", "--config", path_str(&missing)]);
    assert_eq!(code, 2);
    assert!(err.contains("M_a"), "{err}");

    let (code, _, err) = run(&[
        "prob",
        "--config",
        path_str(&config("two_mode.json")),
        "--counts",
        "1,0,0",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("M_a + M_ph"), "{err}");
}

#[test]
fn unstable_configuration_is_a_computation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let unstable = write_config(
        dir.path(),
        "unstable.json",
        r#"{ "mode": "DirectBlocks", "M_a": 1, "M_ph": 0, "delta_a": 1.0,
             "direct_blocks": { "eps_a": [[1.0]], "chit_aa": [[1.5]] } }"#,
    );
    let (code, _, err) = run(&["decompose", "--config", path_str(&unstable)]);
    assert_eq!(code, 1, "{err}");
    let (code, out, _) = run(&["validate", "--config", path_str(&unstable)]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL stability"), "{out}");
}

#[test]
fn pdf_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("two_mode.json");
    let csv = dir.path().join("pdf.csv");
    let run_pdf = || {
        let (code, _, err) = run(&[
            "pdf",
            "--config",
            path_str(&cfg),
            "--cutoff",
            "5",
            "--out",
            path_str(&csv),
        ]);
        assert_eq!(code, 0, "{err}");
        (
            fs::read(&csv).unwrap(),
            fs::read(dir.path().join("pdf.csv.meta.json")).unwrap(),
        )
    };
    let first = run_pdf();
    let second = run_pdf();
    assert_eq!(first, second);

    let text = String::from_utf8(first.0).unwrap();
    assert_eq!(text.lines().next(), Some("N1,q1,probability"));
    assert_eq!(text.lines().count(), 1 + 36);
    let meta: Value = serde_json::from_slice(&first.1).unwrap();
    assert_eq!(meta["outcomes"], 36);
    assert!(meta["captured_mass"].as_f64().unwrap() <= 1.0 + 1e-12);

    let manifest: Value =
        serde_json::from_slice(&fs::read(dir.path().join("pdf.csv.manifest.json")).unwrap())
            .unwrap();
    let digest = hex(&Sha256::digest(fs::read(&cfg).unwrap()));
    assert_eq!(manifest["config_digest"], digest.as_str());
    assert_eq!(manifest["subcommand"], "pdf");
    assert_eq!(manifest["parameters"]["cutoff"], 5);
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn parse_csv(text: &str) -> Vec<(String, f64)> {
    text.lines()
        .skip(1)
        .map(|line| {
            let (counts, p) = line.rsplit_once(',').unwrap();
            (counts.to_string(), p.parse().unwrap())
        })
        .collect()
}

#[test]
fn photons_only_sums_out_atoms() {
    let cfg = config("two_mode.json");
    let (_, joint, _) = run(&["pdf", "--config", path_str(&cfg), "--cutoff", "6"]);
    let (code, photons, _) = run(&[
        "pdf",
        "--config",
        path_str(&cfg),
        "--cutoff",
        "6",
        "--photons-only",
    ]);
    assert_eq!(code, 0);
    assert_eq!(photons.lines().next(), Some("q1,probability"));
    let mut marginal = [0.0; 7];
    for (counts, p) in parse_csv(&joint) {
        let q: usize = counts.split(',').nth(1).unwrap().parse().unwrap();
        marginal[q] += p;
    }
    for (counts, p) in parse_csv(&photons) {
        let q: usize = counts.parse().unwrap();
        assert!((marginal[q] - p).abs() < 1e-15, "q = {q}");
    }
    // No photon modes to keep.
    let (code, _, _) = run(&[
        "pdf",
        "--config",
        path_str(&config("squeezed.json")),
        "--cutoff",
        "4",
        "--photons-only",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn samples_do_not_depend_on_thread_count() {
    let cfg = config("two_mode.json");
    let sample = |threads: &str| {
        let output = Command::new(env!("CARGO_BIN_EXE_hybrid-sampler"))
            .args([
                "sample",
                "--config",
                path_str(&cfg),
                "--cutoff",
                "8",
                "--n",
                "3000",
                "--seed",
                "42",
            ])
            .env("HYBRID_SAMPLER_THREADS", threads)
            .output()
            .unwrap();
        assert!(output.status.success());
        output.stdout
    };
    let one = sample("1");
    assert_eq!(one, sample("4"));
    assert_eq!(String::from_utf8(one).unwrap().lines().count(), 3001);

    let (code, _, _) = run(&[
        "sample",
        "--config",
        path_str(&cfg),
        "--cutoff",
        "8",
        "--n",
        "10",
    ]);
    assert_eq!(code, 2, "--seed is required");
}

#[test]
fn tolerance_overrides_reach_the_suite() {
    let cfg = config("squeezed.json");
    assert_eq!(run(&["validate", "--config", path_str(&cfg)]).0, 0);
    let (code, out, _) = run(&[
        "validate",
        "--config",
        path_str(&cfg),
        "--tol-symplectic",
        "0",
    ]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL symplectic"), "{out}");
}

#[test]
fn scatter_time_matches_library() {
    let cfg = config("geometry.json");
    let (code, out, _) = run(&["scatter-time", "--config", path_str(&cfg)]);
    assert_eq!(code, 0);
    let tau: f64 = out.trim().parse().unwrap();
    let expected = estimate_scattering_time(&load_config_file(&cfg).unwrap()).unwrap();
    assert_eq!(tau, expected);
}

#[test]
fn json_subcommands_emit_expected_keys() {
    let cfg = config("two_mode.json");
    let cases: [(&str, &[&str]); 3] = [
        ("build", &["blocks", "hamiltonian", "bdg_matrix"]),
        (
            "decompose",
            &[
                "stability",
                "energies",
                "symplectic_residual",
                "bloch_messiah",
            ],
        ),
        (
            "covariance",
            &["temperature", "mean_occupations", "log_norm", "fingerprint"],
        ),
    ];
    for (cmd, keys) in cases {
        let (code, out, err) = run(&[cmd, "--config", path_str(&cfg)]);
        assert_eq!(code, 0, "{cmd}: {err}");
        let v: Value = serde_json::from_str(&out).unwrap();
        for key in keys {
            assert!(v.get(key).is_some(), "{cmd} lacks {key}");
        }
        let manifest = serde_json::Deserializer::from_str(&err)
            .into_iter::<Value>()
            .last()
            .unwrap()
            .unwrap();
        assert_eq!(manifest["subcommand"], cmd);
    }
}

//! End-to-end checks of the command-line surface: outputs, file formats,
//! and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bellsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellsim"))
        .args(args)
        .env_remove("BELLSIM_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).expect("valid JSON on stdout")
}

fn simulate_into(dir: &Path, extra: &[&str]) {
    let dir_str = dir.to_str().unwrap();
    let mut args = vec![
        "simulate",
        "--ratio",
        "65",
        "--visibility",
        "0.83",
        "--shots",
        "2000",
        "--seed",
        "7",
        "--out",
        dir_str,
    ];
    args.extend_from_slice(extra);
    let out = bellsim(&args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn counts_files(dir: &Path) -> Vec<String> {
    ["XXX", "XYY", "YXY", "YYX", "YYY"]
        .iter()
        .map(|label| dir.join(format!("counts_{label}.json")).to_str().unwrap().to_string())
        .collect()
}

#[test]
fn ideal_xxx_puts_quarter_on_four_outcomes() {
    let out = bellsim(&["ideal", "--configs", "XXX"]);
    let tables = stdout_json(&out);
    let probs = tables[0]["probs"].as_object().unwrap();
    assert_eq!(probs.len(), 8);
    let quarters = probs.values().filter(|p| (p.as_f64().unwrap() - 0.25).abs() < 1e-9).count();
    assert_eq!(quarters, 4);
}

#[test]
fn ideal_yyy_is_uniform_at_one_eighth() {
    let out = bellsim(&["ideal", "--configs", "YYY"]);
    let tables = stdout_json(&out);
    for key in ["+++", "---"] {
        let p = tables[0]["probs"][key].as_f64().unwrap();
        assert!((p - 0.125).abs() < 1e-9, "{key} had {p}");
    }
}

#[test]
fn ideal_accepts_multiple_configs() {
    let out = bellsim(&["ideal", "--configs", "XXX,YYY,ZZZ"]);
    let tables = stdout_json(&out);
    assert_eq!(tables.as_array().unwrap().len(), 3);
    assert_eq!(tables[2]["config"], "ZZZ");
    assert!((tables[2]["probs"]["+++"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn ideal_rejects_malformed_configs_with_exit_2() {
    let out = bellsim(&["ideal", "--configs", "QQZ"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bellsim(&["ideal", "--configs", "XXXX"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_five_tables_summing_to_shots() {
    let dir = tempfile::tempdir().unwrap();
    simulate_into(dir.path(), &[]);
    for file in counts_files(dir.path()) {
        let table: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
        let total: u64 =
            table["counts"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
        assert_eq!(total, 2000, "{file}");
        assert_eq!(table["shots"].as_u64().unwrap(), 2000);
    }
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seed"].as_u64().unwrap(), 7);
    assert_eq!(manifest["files"].as_array().unwrap().len(), 5);
}

#[test]
fn simulate_rejects_zero_shots_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = bellsim(&[
        "simulate", "--ratio", "65", "--visibility", "0.83", "--shots", "0", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_rejects_infeasible_fit_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = bellsim(&[
        "simulate", "--ratio", "65", "--visibility", "1.0", "--shots", "100", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("visibility"), "stderr: {stderr}");
}

#[test]
fn simulate_accepts_explicit_weights() {
    let dir = tempfile::tempdir().unwrap();
    let out = bellsim(&[
        "simulate", "--w-plus", "0.9", "--w-minus", "0.04", "--eps", "0.01", "--shots", "500",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = bellsim(&[
        "simulate", "--ratio", "65", "--w-plus", "0.9", "--shots", "500", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_recovers_large_violation_from_simulated_counts() {
    let dir = tempfile::tempdir().unwrap();
    simulate_into(dir.path(), &[]);
    let files = counts_files(dir.path());
    let mut args = vec!["analyze"];
    args.extend(files.iter().map(|s| s.as_str()));
    let report = stdout_json(&bellsim(&args));
    let s_chsh = report["decomposition"]["s_chsh_lower"]["value"].as_f64().unwrap();
    assert!(s_chsh > 2.8, "s_chsh_lower: {s_chsh}");
    assert!(report["sigmas_vs_cirelson"].as_f64().unwrap() > 3.0);
    assert_eq!(report["metadata"]["shots"].as_u64().unwrap(), 2000);
}

#[test]
fn perfect_model_round_trip_recovers_ideal_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = bellsim(&[
        "simulate", "--w-plus", "1", "--w-minus", "0", "--eps", "0", "--shots", "100000",
        "--seed", "11", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let files = counts_files(dir.path());
    let mut args = vec!["analyze"];
    args.extend(files.iter().map(|s| s.as_str()));
    let report = stdout_json(&bellsim(&args));
    let d = &report["decomposition"];
    let s_chsh = d["s_chsh_lower"]["value"].as_f64().unwrap();
    let sigma = d["s_chsh_lower"]["sigma"].as_f64().unwrap();
    assert!((s_chsh - 4.0).abs() <= 4.0 * sigma, "s_chsh {s_chsh} not within 4x{sigma} of 4");
    let mermin = report["mermin"]["value"].as_f64().unwrap();
    let mermin_sigma = report["mermin"]["sigma"].as_f64().unwrap();
    assert!((mermin - 4.0).abs() <= 4.0 * mermin_sigma);
}

#[test]
fn analyze_mermin_only_works_without_yyy() {
    let dir = tempfile::tempdir().unwrap();
    simulate_into(dir.path(), &[]);
    let files: Vec<String> =
        counts_files(dir.path()).into_iter().filter(|f| !f.contains("YYY")).collect();
    assert_eq!(files.len(), 4);

    let mut args = vec!["analyze", "--mermin-only"];
    args.extend(files.iter().map(|s| s.as_str()));
    let report = stdout_json(&bellsim(&args));
    assert!(report["decomposition"].is_null());
    assert!(report["mermin"]["value"].as_f64().unwrap() > 3.0);

    // without the flag the missing configuration is a usage error
    let mut args = vec!["analyze"];
    args.extend(files.iter().map(|s| s.as_str()));
    let out = bellsim(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("YYY"));
}

/// Counts discretized from the published component probabilities at 1000
/// shots per configuration reproduce the published aggregates exactly.
#[test]
fn analyze_reproduces_published_aggregates_from_discretized_counts() {
    let dir = tempfile::tempdir().unwrap();
    let write = |label: &str, counts: &[(&str, u64)]| {
        let body: Vec<String> =
            counts.iter().map(|(key, n)| format!("\"{key}\":{n}")).collect();
        let json = format!(
            "{{\"config\":\"{label}\",\"shots\":1000,\"counts\":{{{}}}}}",
            body.join(",")
        );
        let path = dir.path().join(format!("counts_{label}.json"));
        std::fs::write(&path, json).unwrap();
        path.to_str().unwrap().to_string()
    };
    let files = vec![
        write(
            "XXX",
            &[
                ("+++", 262), ("++-", 0), ("+-+", 0), ("+--", 246),
                ("-++", 0), ("-+-", 246), ("--+", 246), ("---", 0),
            ],
        ),
        write(
            "XYY",
            &[
                ("+++", 0), ("++-", 326), ("+-+", 325), ("+--", 0),
                ("-++", 325), ("-+-", 12), ("--+", 12), ("---", 0),
            ],
        ),
        write(
            "YXY",
            &[
                ("+++", 0), ("++-", 326), ("+-+", 325), ("+--", 12),
                ("-++", 325), ("-+-", 0), ("--+", 12), ("---", 0),
            ],
        ),
        write(
            "YYX",
            &[
                ("+++", 0), ("++-", 326), ("+-+", 325), ("+--", 12),
                ("-++", 325), ("-+-", 12), ("--+", 0), ("---", 0),
            ],
        ),
        write(
            "YYY",
            &[
                ("+++", 127), ("++-", 125), ("+-+", 125), ("+--", 124),
                ("-++", 124), ("-+-", 124), ("--+", 124), ("---", 127),
            ],
        ),
    ];
    let mut args = vec!["analyze"];
    args.extend(files.iter().map(|s| s.as_str()));
    let report = stdout_json(&bellsim(&args));
    let d = &report["decomposition"];
    assert!((d["p_xx"]["value"].as_f64().unwrap() - 0.738).abs() < 1e-12);
    assert!((d["p_xy_upper"]["value"].as_f64().unwrap() - 0.072).abs() < 1e-12);
    assert!((d["p_yy"]["value"].as_f64().unwrap() - 0.254).abs() < 1e-12);
    assert!((d["s_prob_lower"]["value"].as_f64().unwrap() - 0.340).abs() < 1e-12);
    assert!((d["s_chsh_lower"]["value"].as_f64().unwrap() - 3.36).abs() < 1e-12);
}

#[test]
fn analyze_names_file_and_field_on_schema_violations() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("counts_XXX.json");
    std::fs::write(&bad, "{\"config\":\"XXX\",\"shots\":5,\"counts\":{\"+++\":5}}").unwrap();
    let out = bellsim(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("counts_XXX.json"), "stderr: {stderr}");
    assert!(stderr.contains("counts"), "stderr: {stderr}");
}

#[test]
fn analyze_fixture_mode_reproduces_the_published_chain() {
    let report = stdout_json(&bellsim(&["analyze", "--paper-fixtures"]));
    let d = &report["decomposition"];
    assert!((d["s_prob_lower"]["value"].as_f64().unwrap() - 0.340).abs() < 1e-12);
    assert!((d["s_chsh_lower"]["value"].as_f64().unwrap() - 3.36).abs() < 1e-12);
    let vs_cirelson = report["sigmas_vs_cirelson"].as_f64().unwrap();
    assert!((6.4..=7.0).contains(&vs_cirelson));
    let vs_mermin = report["sigmas_vs_mermin_bound"].as_f64().unwrap();
    assert!((39.0..=39.5).contains(&vs_mermin));

    let out = bellsim(&["analyze", "--paper-fixtures", "some.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_reports_all_four_bounds() {
    let report = stdout_json(&bellsim(&["bounds", "--restarts", "4"]));
    assert_eq!(report["chsh_lhv"].as_f64().unwrap(), 2.0);
    assert_eq!(report["mermin_lhv"].as_f64().unwrap(), 2.0);
    assert!(report["conditioned_max"].as_f64().unwrap() <= 0.0);
    assert!((report["cirelson"].as_f64().unwrap() - 2.8284271247461903).abs() < 1e-6);
    assert!(report["mermin_detail"]["witness"]["x"].is_array());
}

#[test]
fn tsirelson_reaches_the_quantum_maximum() {
    let report = stdout_json(&bellsim(&["tsirelson", "--tol", "1e-6", "--restarts", "6"]));
    assert!((report["max_abs"].as_f64().unwrap() - 2.8284271247461903).abs() < 1e-6);
    assert!(report["evaluations"].as_u64().unwrap() > 0);
}

#[test]
fn delay_scan_emits_symmetric_csv() {
    let out = bellsim(&[
        "delay-scan", "--from", "-100", "--to", "100", "--step", "10", "--visibility", "0.83",
        "--width", "30",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let body = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "delay,rate_hhh_prime,rate_hhv_prime");
    assert_eq!(lines.len(), 22);
    let rows: Vec<Vec<&str>> = lines[1..].iter().map(|l| l.split(',').collect()).collect();
    for (row, mirror) in rows.iter().zip(rows.iter().rev()) {
        assert_eq!(row[1], mirror[1], "rates not symmetric");
        assert_eq!(row[2], mirror[2], "rates not symmetric");
    }
    // suppressed component dips at zero delay
    let zero = rows.iter().find(|r| r[0] == "0").unwrap();
    let edge = &rows[0];
    assert!(zero[2].parse::<f64>().unwrap() < edge[2].parse::<f64>().unwrap());
}

#[test]
fn delay_scan_rejects_bad_ranges() {
    let out = bellsim(&[
        "delay-scan", "--from", "10", "--to", "-10", "--step", "10", "--visibility", "0.8",
        "--width", "30",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = bellsim(&[
        "delay-scan", "--from", "0", "--to", "10", "--step", "0", "--visibility", "0.8",
        "--width", "30",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_env_variable_sets_the_default() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let run = |dir: &Path| {
        let out = Command::new(env!("CARGO_BIN_EXE_bellsim"))
            .args([
                "simulate", "--ratio", "65", "--visibility", "0.83", "--shots", "500", "--out",
                dir.to_str().unwrap(),
            ])
            .env("BELLSIM_SEED", "31")
            .output()
            .unwrap();
        assert!(out.status.success());
    };
    run(dir_a.path());
    run(dir_b.path());
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir_a.path().join("manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seed"].as_u64().unwrap(), 31);
    for file in counts_files(dir_a.path()) {
        let name = Path::new(&file).file_name().unwrap();
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b);
    }
}

use std::path::Path;
use std::process::{Command, Output};

use krausprop::emit::{csv_string, json_string, svg_string, CSV_HEADER};
use krausprop::experiment::{ExperimentResult, SeriesLabel};
use krausprop::schema::parse_json;
use krausprop::{run_experiment, ExperimentConfig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_krausprop"));
    c.env_remove("KRAUSPROP_THREADS");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const RESET_CONFIG: &str = r#"{
  "experiment": "prob_identity",
  "n_qubits": 1,
  "depth": { "start": 100, "stop": 2000, "stride": 100 },
  "shots": 64,
  "seed": 3,
  "mode": "both",
  "noise_model": { "rules": [{ "gate": "I", "error": { "type": "probabilistic", "terms": [{ "kind": "reset1", "p": 0.005 }] } }] },
  "bound": { "samples": 1000 }
}"#;

fn reset_result() -> ExperimentResult {
    let cfg: ExperimentConfig = parse_json(RESET_CONFIG).unwrap();
    run_experiment(&cfg, Some(2)).unwrap()
}

#[test]
fn reset_exact_series_matches_closed_form() {
    let res = reset_result();
    let second = res.series(SeriesLabel::SecondMoment).unwrap();
    let averaged = res.series(SeriesLabel::Exact).unwrap();
    assert_eq!(second.points.len(), 20);
    for (s, a) in second.points.iter().zip(&averaged.points) {
        let decay = 0.995f64.powi(s.m as i32);
        assert!((s.value - 2.0 * (1.0 - decay)).abs() <= 1e-12);
        // the averaged state only sees the squared mixture weight
        assert!((a.value - 2.0 * (1.0 - decay).powi(2)).abs() <= 1e-12);
    }
    assert_eq!(res.estimate("p").unwrap().value, 0.005);
    assert_eq!(res.estimate("gamma").unwrap().value, 0.01);
}

#[test]
fn zero_probability_qft_gives_zero_error() {
    let text = r#"{
      "experiment": "qft_mixed", "n_qubits": 3,
      "depth": { "start": 10, "stop": 200, "stride": 10 },
      "mode": "both", "shots": 8,
      "noise_model": { "rules": [
        { "gate": "*", "error": { "type": "probabilistic", "terms": [{ "kind": "depolarizing", "p": 0.0 }] } },
        { "gate": "*", "error": { "type": "probabilistic", "arity": 2, "terms": [{ "kind": "depolarizing", "p": 0.0 }] } }
      ] },
      "bound": { "auto_estimate": false }
    }"#;
    let res = run_experiment(&parse_json(text).unwrap(), None).unwrap();
    assert_eq!(res.series.len(), 3);
    for s in &res.series {
        assert!(s.points.iter().all(|p| p.value.abs() < 1e-20), "{:?}", s.label);
    }
}

#[test]
fn csv_layout_and_round_trip() {
    let res = reset_result();
    let csv = csv_string(&res);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 21);
    assert!(csv.ends_with('\n'));
    let traj = res.series(SeriesLabel::Trajectories).unwrap();
    let plateau = res.curve("plateau").unwrap();
    for (line, p) in lines[1..].iter().zip(&traj.points) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0].parse::<usize>().unwrap(), p.m);
        let close = |s: &str, x: f64| (s.parse::<f64>().unwrap() - x).abs() <= 5e-12 * x.abs().max(1e-300);
        assert!(close(f[1], p.value));
        assert!(close(f[2], p.std_err.unwrap()));
        assert!(close(f[3], plateau.value_at(p.m).unwrap()));
        // 12 significant digits
        assert_eq!(f[3].split('e').next().unwrap().replace(['.', '-'], "").len(), 12);
    }
}

#[test]
fn empty_result_gives_header_only_csv() {
    let mut res = reset_result();
    res.series.clear();
    res.bounds.clear();
    assert_eq!(csv_string(&res), format!("{CSV_HEADER}\n"));
    assert!(svg_string(&res).is_err());
}

#[test]
fn json_round_trip_and_fields() {
    let res = reset_result();
    let text = json_string(&res).unwrap();
    let back: ExperimentResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back, res);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], "1");
    for e in v["estimates"].as_array().unwrap() {
        assert!(e.get("method").is_some() && e.get("seed").is_some());
    }
    // field order follows the struct declaration
    let keys: Vec<&str> = text.lines().filter(|l| l.starts_with("  \"")).map(|l| l.trim().split('"').nth(1).unwrap()).collect();
    assert_eq!(keys, ["schema_version", "generator", "config", "grid", "series", "bounds", "estimates"]);
}

fn polylines(svg: &str) -> usize {
    let doc = roxmltree::Document::parse(svg).unwrap();
    doc.descendants().filter(|n| n.has_tag_name("polyline")).count()
}

fn legend_entries(svg: &str) -> usize {
    let doc = roxmltree::Document::parse(svg).unwrap();
    let legend = doc.descendants().find(|n| n.attribute("class") == Some("legend")).unwrap();
    legend.children().filter(|n| n.has_tag_name("text")).count()
}

#[test]
fn svg_has_one_polyline_per_line() {
    let mut res = reset_result();
    res.series.retain(|s| s.label == SeriesLabel::Trajectories);
    let full = svg_string(&res).unwrap();
    assert_eq!(polylines(&full), 3);
    assert_eq!(legend_entries(&full), 3);
    assert!(full.contains("stroke-width=\"1\"/>"), "error bars");
    res.bounds.clear();
    let single = svg_string(&res).unwrap();
    assert_eq!(polylines(&single), 1);
    assert_eq!(legend_entries(&single), 1);
}

#[test]
fn validation_reports_field_paths() {
    let bad = RESET_CONFIG.replace("\"p\": 0.005", "\"p\": 1.0");
    let cfg: ExperimentConfig = parse_json(&bad).unwrap();
    let err = run_experiment(&cfg, None).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("noise_model.rules[0].error.terms[0].p"), "{err}");

    let typo = RESET_CONFIG.replace("\"shots\"", "\"shot\"");
    let err = parse_json::<ExperimentConfig>(&typo).unwrap_err();
    assert!(err.to_string().contains("shot"), "{err}");

    let neg = RESET_CONFIG.replace("\"p\": 0.005", "\"p\": -0.1");
    let err = run_experiment(&parse_json(&neg).unwrap(), None).unwrap_err();
    assert!(err.to_string().contains("[0, 1)"), "{err}");

    let stride = RESET_CONFIG.replace("\"stride\": 100", "\"stride\": 0");
    let err = run_experiment(&parse_json(&stride).unwrap(), None).unwrap_err();
    assert!(err.to_string().starts_with("depth.stride"), "{err}");
}

#[test]
fn estimate_q_of_identity_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(dir.path(), "id.json", r#"{"type": "structured_sq", "a2": 0, "a3": 0, "b2": 0, "b3": 0}"#);
    let o = bin().args(["estimate-q", "--channel"]).arg(&ch).args(["--samples", "5000"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "0");
}

#[test]
fn convert_rejects_asymmetric_paulis() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(
        dir.path(),
        "p.json",
        r#"{"type": "probabilistic", "terms": [{"kind": "x", "p": 0.1}, {"kind": "y", "p": 0.05}]}"#,
    );
    let o = bin().args(["convert", "--prob"]).arg(&ch).arg("--out").arg(dir.path().join("k.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("p_X = p_Y"), "{}", stderr(&o));
}

#[test]
fn convert_and_compose_write_loadable_channels() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(
        dir.path(),
        "p.json",
        r#"{"type": "probabilistic", "terms": [{"kind": "z", "p": 0.1}, {"kind": "reset0", "p": 0.02}]}"#,
    );
    let k = dir.path().join("k.json");
    let o = bin().args(["convert", "--prob"]).arg(&ch).arg("--out").arg(&k).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c = dir.path().join("c.json");
    let o = bin().args(["compose", "--lhs"]).arg(&k).arg("--rhs").arg(&k).arg("--out").arg(&c).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = bin().args(["estimate-delta", "--channel"]).arg(&c).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let delta: f64 = stdout(&o).trim().parse().unwrap();
    assert!((0.0..=1.0).contains(&delta));
}

#[test]
fn usage_and_environment_errors_exit_one() {
    let o = bin().arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
    let o = bin().args(["estimate-q", "--bogus"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["estimate-q", "--channel", "/nonexistent/x.json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let ch = write(dir.path(), "id.json", r#"{"type": "structured_sq", "a2": 0, "a3": 0, "b2": 0, "b3": 0}"#);
    let o = bin()
        .env("KRAUSPROP_THREADS", "zero")
        .args(["estimate-q", "--channel"])
        .arg(&ch)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("KRAUSPROP_THREADS"));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "reset.json", RESET_CONFIG);
    let blocker = write(dir.path(), "file", "");
    let o = bin()
        .args(["experiment", "prob_identity", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn experiment_name_must_match_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "reset.json", RESET_CONFIG);
    let o = bin().args(["experiment", "kraus_identity", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("experiment"));
}

#[test]
fn simulate_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "reset.json", RESET_CONFIG);
    let o = bin().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with(CSV_HEADER));
    assert_eq!(text.lines().count(), 21);
    // no bounds without estimation
    assert!(text.lines().nth(1).unwrap().ends_with(",,"));
}

#[test]
fn shipped_presets_parse_and_validate() {
    let presets = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    for name in ["fig2.json", "fig3.json", "vigo_like.json"] {
        let text = std::fs::read_to_string(presets.join(name)).unwrap();
        let cfg: ExperimentConfig = parse_json(&text).unwrap();
        cfg.validate().unwrap();
    }
}

#[test]
fn channel_specs_round_trip_through_core_types() {
    use krausprop::schema::ChannelSpec;
    let text = r#"{"type": "composed", "parts": [
        {"type": "amplitude_damping", "gamma": 0.1},
        {"type": "phase_damping", "lambda": 0.2},
        {"type": "standard", "kind": "depolarizing", "p": 0.05},
        {"type": "thermal_relaxation", "t1": 50, "t2": 40, "gate_time": 1, "p1": 0.1},
        {"type": "probabilistic", "terms": [{"kind": "custom_unitary", "gate": "H", "p": 0.1}]},
        {"type": "kraus", "matrices": [[[[0, 0], [1, 0]], [[1, 0], [0, 0]]]]}
    ]}"#;
    let spec: ChannelSpec = parse_json(text).unwrap();
    let built = spec.build("").unwrap();
    let again = ChannelSpec::from_gate_error(&built).build("").unwrap();
    assert_eq!(built, again);
    let json = serde_json::to_string(&ChannelSpec::from_gate_error(&built)).unwrap();
    let reparsed: ChannelSpec = parse_json(&json).unwrap();
    assert_eq!(reparsed.build("").unwrap(), built);
}

use std::fs;
use std::path::Path;

use cavity_lattice::cli::{main_with, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME};

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["cavity-lattice"];
    full.extend_from_slice(args);
    let code = main_with(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const SMALL: &str = r#"
[system]
g0 = 1.0
kappa = 1.6
v0 = 20.0
mode = "mathieu"
l_max = 4

[grid]
tau_max = 10.0
points = 60

[correlations]
thetas = [0.0, 0.5]

[sweep]
parameter = "sigma"
start = 0.5
stop = 1.5
steps = 2

[output]
directory = "unused"
formats = ["csv", "json", "svg"]
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn validate_reports_missing_fields() {
    let d = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["validate", &write(d.path(), "empty.toml", "")]);
    assert_eq!(code, EXIT_CONFIG);
    for f in ["system.g0", "system.kappa", "system.v0", "system.mode", "output.directory"] {
        assert!(out.contains(f), "{out}");
    }
}

#[test]
fn validate_accepts_shipped_configs() {
    for name in ["canonical.toml", "sigma_sweep.toml"] {
        let p = format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"));
        let (code, out, err) = run(&["validate", &p]);
        assert_eq!(code, EXIT_OK, "{out}{err}");
    }
}

#[test]
fn negative_kappa_is_one_line() {
    let d = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["validate", &write(d.path(), "c.toml", &SMALL.replace("kappa = 1.6", "kappa = -1.6"))]);
    assert_eq!(code, EXIT_CONFIG);
    assert_eq!(out.lines().count(), 1, "{out}");
}

#[test]
fn run_writes_every_artifact_and_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", SMALL);
    let out_dir = d.path().join("out");
    let (code, out, err) = run(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("24 traces over 2 point(s)"), "{out}");
    let summary = fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.lines().nth(1).unwrap().starts_with("00_sigma=0.5"));
    for point in ["00_sigma=0.5", "01_sigma=1.5"] {
        let dir = out_dir.join(point);
        for stem in ["g2_TT", "g2_FT", "h_TF_theta0.0000", "h_TT_theta0.5000"] {
            for ext in ["csv", "json", "svg"] {
                assert!(dir.join(format!("{stem}.{ext}")).is_file(), "{point}/{stem}.{ext}");
            }
        }
        let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
        assert_eq!(report["roundtrip_audit"], serde_json::Value::Bool(true));
        assert_eq!(report["report"]["audit_passed"], serde_json::Value::Bool(true));
        assert!(report["errors"].as_array().unwrap().is_empty());
        assert_eq!(report["system"]["l_max"], 4);
    }
    // No temporary files are left behind.
    for entry in fs::read_dir(out_dir.join("00_sigma=0.5")).unwrap() {
        assert!(!entry.unwrap().file_name().to_string_lossy().starts_with('.'));
    }
}

#[test]
fn classify_reads_sidecars() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", SMALL);
    let out_dir = d.path().join("out");
    assert_eq!(run(&["run", &cfg, "--out", out_dir.to_str().unwrap()]).0, EXIT_OK);
    let dir = out_dir.join("00_sigma=0.5");
    let tt = dir.join("g2_TT.csv");
    let ff = dir.join("g2_FF.csv");
    let tf = dir.join("g2_TF.csv");
    let (code, out, err) = run(&["classify", tt.to_str().unwrap(), ff.to_str().unwrap(), tf.to_str().unwrap(), "--json"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let r: serde_json::Value = serde_json::from_str(&out).unwrap();
    let stored: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    // FF has SUB at every parameter set and the cross pair always carries CV1.
    let kinds = |v: &serde_json::Value| v["flags"].as_array().unwrap().iter().map(|f| f["kind"].as_str().unwrap().to_string()).collect::<Vec<_>>();
    let ff_flags = kinds(&r["traces"][1]);
    assert!(ff_flags.contains(&"SUB".to_string()), "{ff_flags:?}");
    assert!(kinds(&r["cross"]).contains(&"CV1".to_string()));
    assert_eq!(r["traces"][0], stored["report"]["traces"][0]);
}

#[test]
fn classify_without_sidecar_uses_fallbacks() {
    let d = tempfile::tempdir().unwrap();
    let p = write(d.path(), "t.csv", "tau,value\n0,0\n0.05,0.2\n0.1,0.5\n");
    let (code, out, _) = run(&["classify", &p, "--kind", "htheta", "--channel", "ff"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("h_FF") && out.contains("S1"), "{out}");
    let (code, _, err) = run(&["classify", &p, "--kind", "nope"]);
    assert_eq!(code, EXIT_CONFIG, "{err}");
}

#[test]
fn error_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let (code, _, _) = run(&["run", d.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    let blocker = write(d.path(), "file", "x");
    let cfg = write(d.path(), "c.toml", SMALL);
    let (code, _, err) = run(&["run", &cfg, "--out", &format!("{blocker}/sub")]);
    assert_eq!(code, EXIT_RUNTIME, "{err}");
    assert_eq!(run(&["bogus"]).0, EXIT_CONFIG);
}

#[test]
fn degenerate_channels_are_recorded_per_row() {
    // Without coupling there is no fluorescence; the T-triggered channels still run.
    let d = tempfile::tempdir().unwrap();
    let text = SMALL.replace("g0 = 1.0", "g0 = 0.0");
    let cfg = write(d.path(), "c.toml", &text);
    let out_dir = d.path().join("out");
    let (code, _, err) = run(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(err.contains("FF"), "{err}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("00_sigma=0.5/report.json")).unwrap()).unwrap();
    assert!(!report["errors"].as_array().unwrap().is_empty());
    assert!(out_dir.join("00_sigma=0.5/g2_TT.csv").is_file());
}

#[test]
fn verify_fast_passes() {
    let (code, out, _) = run(&["verify", "--fast"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("g2_TT") && out.contains("order"));
}

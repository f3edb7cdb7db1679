use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const HBAR_C_EV_NM: f64 = 197.326_980_4;
const JOULE_PER_EV: f64 = 1.602_176_634e-19;

fn run(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("scenario.json");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_casimir")).arg("--config").arg(&path).args(extra).output().unwrap()
}

/// Header and rows of a CSV result.
fn parse(out: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    row[i].parse().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn ideal_plates_at_100_nm() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        r#"{"schema": 1, "mode": "plane-plane", "geometry": {"a_nm": 100},
            "materials": {"side1": {"kind": "ideal"}, "side2": {"kind": "ideal"}}}"#,
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = parse(&out);
    assert_eq!(header.last().unwrap(), "status");
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row.last().unwrap(), "ok");
    let e = column(&header, row, "energy_per_area_J_m2");
    assert!((e + 4.334e-7).abs() < 1e-10, "{e}");
    let hbar_c = HBAR_C_EV_NM * 1e-9 * JOULE_PER_EV;
    let a: f64 = 1e-7;
    let exact = -PI.powi(2) * hbar_c / (720.0 * a.powi(3));
    assert!(((e - exact) / exact).abs() < 1e-6);
    let p = column(&header, row, "pressure_Pa");
    let p_exact = -PI.powi(2) * hbar_c / (240.0 * a.powi(4));
    assert!(((p - p_exact) / p_exact).abs() < 1e-5, "{p} vs {p_exact}");
    assert_eq!(column(&header, row, "a_m"), 1e-7);
}

#[test]
fn nonpositive_separation_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    for a in ["0", "-5"] {
        let out = run(
            dir.path(),
            &format!(
                r#"{{"schema": 1, "mode": "plane-plane", "geometry": {{"a_nm": {a}}},
                    "materials": {{"side1": {{"kind": "ideal"}}, "side2": {{"kind": "ideal"}}}}}}"#
            ),
            &[],
        );
        assert_eq!(out.status.code(), Some(2));
        assert!(stderr(&out).contains("geometry.a_nm"), "{}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn malformed_configs_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (r#"{"schema": 2, "mode": "plane-plane"}"#, "schema"),
        (r#"{"schema": 1, "mode": "plane-plane", "geometry": {"a_nm": 10}, "materials": {"side1": {"kind": "ideal"}}}"#, "materials.side2"),
        (r#"{"schema": 1, "mode": "plane-plane", "geometry": {"a_nm": 10, "b_nm": 3}}"#, "b_nm"),
        (
            r#"{"schema": 1, "mode": "plane-plane", "geometry": {"a_nm": 10},
                "materials": {"side1": {"kind": "ideal"}, "side2": {"kind": "plasma", "omega_p_eV": -1}}}"#,
            "materials.side2.omega_p_eV",
        ),
        (
            r#"{"schema": 1, "mode": "plane-plane",
                "materials": {"side1": {"kind": "ideal"}, "side2": {"kind": "ideal"}},
                "sweep": {"variable": "a_nm", "start": 200, "stop": 100, "points": 3}}"#,
            "sweep.stop",
        ),
        (
            r#"{"schema": 1, "mode": "grating", "geometry": {"L_nm": 30, "d_nm": 100, "h_nm": 20},
                "materials": {"lower": {"kind": "pc-sinusoid"}, "upper": {"kind": "pc-sinusoid"}}}"#,
            "geometry.L_nm",
        ),
    ];
    for (config, field) in cases {
        let out = run(dir.path(), config, &[]);
        assert_eq!(out.status.code(), Some(2), "{config}");
        assert!(stderr(&out).contains(field), "expected {field} in: {}", stderr(&out));
    }
}

#[test]
fn graphene_metal_asymptotics_at_room_temperature() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        r#"{"schema": 1, "mode": "asymptotics", "geometry": {"a_nm": 100}, "temperature_K": 300,
            "materials": {"side1": {"kind": "graphene"}, "side2": {"kind": "ideal"}}}"#,
        &[],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = parse(&out);
    let row = &rows[0];
    let get = |name: &str| column(&header, row, name);
    let (te, tm) = (get("n0_te_J_m2"), get("n0_tm_J_m2"));
    let (closed_te, closed_tm) = (get("closed_te_J_m2"), get("closed_tm_J_m2"));
    assert!(te < 0.0 && tm < 0.0 && closed_te < 0.0 && closed_tm < 0.0);

    // closed forms in SI: -k_B T ζ(3)/(16π a²) and -αN v_F² ħc/(192π a³)
    let kt = 8.617_333_262e-5 * 300.0 * JOULE_PER_EV;
    let a: f64 = 1e-7;
    let zeta3 = 1.202_056_903_159_594_2;
    assert!(((closed_tm + kt * zeta3 / (16.0 * PI * a * a)) / closed_tm).abs() < 1e-12);
    let te_exact = -(4.0 / 137.036) * (1.0 / 300.0f64).powi(2) * HBAR_C_EV_NM * 1e-9 * JOULE_PER_EV / (192.0 * PI * a.powi(3));
    assert!(((closed_te - te_exact) / te_exact).abs() < 1e-12);

    // already close to the high-temperature regime at 100 nm
    assert!(((tm - closed_tm) / closed_tm).abs() < 0.05, "{tm} vs {closed_tm}");
    assert!(((te - closed_te) / closed_te).abs() < 0.05, "{te} vs {closed_te}");
    // natural columns map to SI with one factor, up to the 13 printed digits
    let factor = HBAR_C_EV_NM * JOULE_PER_EV * 1e18;
    assert!(((get("n0_tm_nat") * factor - tm) / tm).abs() < 1e-11);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"schema": 1, "mode": "plane-plane", "temperature_K": 300,
        "materials": {"side1": {"kind": "drude", "omega_p_eV": 9.0, "gamma_eV": 0.035}, "side2": {"kind": "constant", "eps": 11.7}},
        "sweep": {"variable": "a_nm", "start": 200, "stop": 800, "points": 4, "spacing": "log"},
        "numerics": {"force": false}}"#;
    let path = dir.path().join("sweep.json");
    fs::write(&path, config).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let target = dir.path().join(format!("out{threads}.csv"));
        let out = Command::new(env!("CARGO_BIN_EXE_casimir"))
            .arg("--config")
            .arg(&path)
            .args(["--threads", threads, "--output"])
            .arg(&target)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        assert_eq!(stderr(&out).lines().count(), 4);
        outputs.push(fs::read(&target).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[1].starts_with("2.000000000000e-07,"));
    assert!(rows[4].starts_with("8.000000000000e-07,"));
    // |F| decreases along the sweep
    let energies: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(energies.windows(2).all(|w| w[0] < w[1] && w[1] < 0.0), "{energies:?}");
}

#[test]
fn tabulated_permittivity_resolves_relative_to_config() {
    let dir = TempDir::new().unwrap();
    fs::create_dir(dir.path().join("data")).unwrap();
    fs::write(dir.path().join("data/flat.csv"), "omega_eV,eps_iw\n0.01,3.0\n1.0,3.0\n100.0,3.0\n").unwrap();
    let energy = |material: &str| {
        let config = format!(
            r#"{{"schema": 1, "mode": "casimir-polder", "geometry": {{"a_nm": 50}},
                "materials": {{"surface": {material}}},
                "atom": {{"alpha0_nm3": 0.03, "omega0_eV": 10.0}}, "numerics": {{"force": false}}}}"#
        );
        let out = run(dir.path(), &config, &["--format", "json"]);
        assert!(out.status.success(), "{}", stderr(&out));
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(doc["schema"], 1);
        assert_eq!(doc["rows"][0]["status"], "ok");
        assert!(doc["rows"][0]["force_N"].is_null());
        doc["rows"][0]["energy_J"].as_f64().unwrap()
    };
    let tabulated = energy(r#"{"kind": "tabulated", "file": "data/flat.csv"}"#);
    let constant = energy(r#"{"kind": "constant", "eps": 3.0}"#);
    assert!(tabulated < 0.0);
    assert!(((tabulated - constant) / constant).abs() < 1e-9, "{tabulated} vs {constant}");
}

#[test]
fn gaussian_polarizability_is_scaled_by_four_pi() {
    let dir = TempDir::new().unwrap();
    let energy = |units: &str| {
        let config = format!(
            r#"{{"schema": 1, "mode": "casimir-polder", "geometry": {{"a_nm": 10}},
                "materials": {{"surface": {{"kind": "ideal"}}}},
                "atom": {{"alpha0_nm3": 0.02, "units": "{units}"}}}}"#
        );
        let out = run(dir.path(), &config, &[]);
        assert!(out.status.success(), "{}", stderr(&out));
        let (header, rows) = parse(&out);
        (column(&header, &rows[0], "energy_nat"), column(&header, &rows[0], "force_nat"))
    };
    let (hl, hl_force) = energy("HL");
    let (gauss, _) = energy("Gaussian");
    // static atom: E = -3α/(32π²a⁴), F = -∂E/∂a = -4·3α/(32π²a⁵)
    let exact = -3.0 * 0.02 / (32.0 * PI * PI * 1e4);
    assert!(((hl - exact) / exact).abs() < 1e-9);
    assert!(((gauss / hl) - 4.0 * PI).abs() < 1e-9);
    assert!(((hl_force - 4.0 * exact / 10.0) / hl_force).abs() < 1e-6, "{hl_force}");
}

#[test]
fn numerical_failure_exits_with_code_3() {
    let dir = TempDir::new().unwrap();
    // far too deep for the Rayleigh expansion
    let out = run(
        dir.path(),
        r#"{"schema": 1, "mode": "grating", "temperature_K": 300,
            "geometry": {"L_nm": 200, "d_nm": 100, "h_nm": 60},
            "materials": {"lower": {"kind": "pc-sinusoid"}, "upper": {"kind": "ideal"}}}"#,
        &[],
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("point 1"), "{}", stderr(&out));
    let (_, rows) = parse(&out);
    assert_eq!(rows[0].last().unwrap(), "error");
}

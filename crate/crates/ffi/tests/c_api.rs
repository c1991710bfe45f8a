use std::ffi::{CStr, CString};
use std::ptr;

use revineq_ffi::*;

fn heisenberg() -> *mut RevineqGeometry {
    let mut g = ptr::null_mut();
    let group = CString::new("heisenberg").unwrap();
    let norm = CString::new("koranyi").unwrap();
    let st = unsafe { revineq_geometry_new(group.as_ptr(), 1, norm.as_ptr(), &mut g) };
    assert_eq!(st, RevineqStatus::Ok);
    assert!(!g.is_null());
    g
}

fn last_error() -> String {
    let p = revineq_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn geometry_round_trip() {
    let g = heisenberg();
    unsafe {
        assert_eq!(revineq_geometry_dim(g), 3);
        assert_eq!(revineq_geometry_homogeneous_dimension(g), 4.0);
        let x = [1.0, 0.0, 0.0];
        let mut v = 0.0;
        assert_eq!(revineq_quasi_norm(g, x.as_ptr(), 3, &mut v), RevineqStatus::Ok);
        assert!((v - 1.0).abs() < 1e-15);

        let mut d = [0.0; 3];
        let y = [1.0, 2.0, 3.0];
        assert_eq!(revineq_dilate(g, 2.0, y.as_ptr(), 3, d.as_mut_ptr()), RevineqStatus::Ok);
        assert_eq!(d, [2.0, 4.0, 12.0]);

        let a = [1.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        let mut c = [0.0; 3];
        assert_eq!(revineq_group_mul(g, a.as_ptr(), b.as_ptr(), 3, c.as_mut_ptr()), RevineqStatus::Ok);
        assert_eq!(c, [1.0, 1.0, 0.5]);
        revineq_geometry_free(g);
    }
}

#[test]
fn shape_and_null_errors_set_last_error() {
    let g = heisenberg();
    unsafe {
        let x = [1.0, 2.0];
        let mut v = 0.0;
        assert_eq!(revineq_quasi_norm(g, x.as_ptr(), 2, &mut v), RevineqStatus::InvalidInput);
        assert!(last_error().contains("expected 3"));
        assert_eq!(revineq_quasi_norm(ptr::null(), x.as_ptr(), 2, &mut v), RevineqStatus::InvalidInput);
        assert!(last_error().contains("geometry is null"));
        let ok = [0.0, 0.0, 1.0];
        assert_eq!(revineq_quasi_norm(g, ok.as_ptr(), 3, &mut v), RevineqStatus::Ok);
        assert!(revineq_last_error_message().is_null());
        revineq_geometry_free(g);
        revineq_geometry_free(ptr::null_mut());
    }
}

#[test]
fn unknown_names_are_invalid_input() {
    let mut g = ptr::null_mut();
    let group = CString::new("lie").unwrap();
    let st = unsafe { revineq_geometry_new(group.as_ptr(), 1, ptr::null(), &mut g) };
    assert_eq!(st, RevineqStatus::InvalidInput);
    assert!(g.is_null());
    assert!(last_error().contains("unknown group"));
}

#[test]
fn graded_geometry_uses_anisotropic_gauge() {
    let num = [1u64, 2];
    let den = [1u64, 1];
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(revineq_geometry_new_graded(num.as_ptr(), den.as_ptr(), 2, &mut g), RevineqStatus::Ok);
        assert_eq!(revineq_geometry_homogeneous_dimension(g), 3.0);
        revineq_geometry_free(g);
    }
}

#[test]
fn sphere_measure_of_plane_circle() {
    let mut g = ptr::null_mut();
    let group = CString::new("abelian").unwrap();
    unsafe {
        assert_eq!(revineq_geometry_new(group.as_ptr(), 2, ptr::null(), &mut g), RevineqStatus::Ok);
        let mut quad = revineq_quadrature_default();
        quad.scheme = 1;
        quad.nodes_per_axis = 8;
        let (mut v, mut se) = (0.0, 0.0);
        assert_eq!(revineq_sphere_measure(g, &quad, &mut v, &mut se), RevineqStatus::Ok);
        assert!((v - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        revineq_geometry_free(g);
    }
}

#[test]
fn reverse_hardy_report() {
    let g = heisenberg();
    let family = CString::new("exp_decay").unwrap();
    let quad = revineq_quadrature_default();
    let mut rep = RevineqReport::default();
    unsafe {
        let st = revineq_verify_reverse_hardy(g, family.as_ptr(), 1.0, 0.5, &quad, &mut rep);
        assert_eq!(st, RevineqStatus::Ok);
        assert!(rep.pass);
        assert!((rep.ratio - 0.153_398_078_788_564).abs() < 1e-9);
        assert!((rep.analytic_constant - 1.0 / 7.0).abs() < 1e-15);
        let st = revineq_verify_reverse_hardy(g, family.as_ptr(), 1.0, 1.5, &quad, &mut rep);
        assert_eq!(st, RevineqStatus::InvalidInput);
        revineq_geometry_free(g);
    }
}

const CONFIG: &str = r#"{
  "group": {"name": "heisenberg", "n": 1},
  "inequality": {"name": "reverse_sobolev", "p": 0.5},
  "trial": {"family": "exp_decay", "params": [1.0]}
}"#;

#[test]
fn run_config_json_matches_cli_codes() {
    let cfg = CString::new(CONFIG).unwrap();
    let cmd = CString::new("verify").unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        let st = revineq_run_config_json(cfg.as_ptr(), cmd.as_ptr(), 5, ptr::null(), &mut out);
        assert_eq!(st, RevineqStatus::Ok);
        let report = CStr::from_ptr(out).to_str().unwrap().to_string();
        revineq_string_free(out);
        let v: serde_json::Value = serde_json::from_str(&report).unwrap();
        assert!((v["report"]["ratio"].as_f64().unwrap() - 0.133_040_5).abs() < 1e-6);
        assert_eq!(v["config"]["quadrature"]["seed"], 5);

        let bad = CString::new(CONFIG.replace("\"p\"", "\"pp\"")).unwrap();
        let st = revineq_run_config_json(bad.as_ptr(), cmd.as_ptr(), -1, ptr::null(), &mut out);
        assert_eq!(st, RevineqStatus::InvalidInput);
        assert!(out.is_null());
        assert!(last_error().contains("inequality"));
    }
}

#[test]
fn run_config_json_writes_artifacts() {
    let dir = std::env::temp_dir().join(format!("revineq-ffi-{}", std::process::id()));
    let cfg = CString::new(CONFIG).unwrap();
    let cmd = CString::new("verify").unwrap();
    let out_dir = CString::new(dir.to_str().unwrap()).unwrap();
    unsafe {
        let st = revineq_run_config_json(cfg.as_ptr(), cmd.as_ptr(), -1, out_dir.as_ptr(), ptr::null_mut());
        assert_eq!(st, RevineqStatus::Ok);
    }
    assert!(dir.join("report.json").exists());
    assert!(dir.join("metadata.json").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/revineq.h")).unwrap();
    for name in [
        "typedef struct RevineqGeometry RevineqGeometry",
        "REVINEQ_STATUS_MARGIN_FAILED",
        "revineq_geometry_new",
        "revineq_geometry_free",
        "revineq_quasi_norm",
        "revineq_dilate",
        "revineq_group_mul",
        "revineq_sphere_measure",
        "revineq_verify_reverse_hardy",
        "revineq_run_config_json",
        "revineq_string_free",
        "revineq_last_error_message",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let src = std::env::temp_dir().join(format!("revineq-header-{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"revineq.h\"\n\
         int main(void) {\n\
           RevineqGeometry *g = 0;\n\
           RevineqQuadrature q = revineq_quadrature_default();\n\
           RevineqReport r;\n\
           RevineqStatus s = revineq_geometry_new(\"heisenberg\", 1, 0, &g);\n\
           s = revineq_verify_reverse_hardy(g, \"exp_decay\", 1.0, 0.5, &q, &r);\n\
           revineq_geometry_free(g);\n\
           return s == REVINEQ_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .status();
    std::fs::remove_file(&src).unwrap();
    match status {
        Ok(s) => assert!(s.success(), "C compiler rejected the header"),
        Err(e) => eprintln!("no C compiler available, skipping: {e}"),
    }
}

//! End-to-end tests of the binary: exit codes, file outputs, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_slab-tomo"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("slab-tomo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_value(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_accepts_the_cosine_interval_field() {
    let out = scratch("verify_cos.json");
    let output = run(&[
        "verify",
        "--field",
        fixture("interval_cos.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let report = json_value(&out);
    assert_eq!(report["in_kernel"], serde_json::Value::Bool(true));
    assert!(report["sampled_max_abs_If"].as_f64().unwrap() < 1e-10);
}

#[test]
fn forward_reproduces_the_phi_closed_form() {
    // single mode (0, 1): the k = 1 DFT coefficient of the sinogram at
    // slope b is φ(b)
    let out = scratch("forward_k1");
    let output = run(&[
        "forward",
        "--field",
        fixture("mode_k1.json").to_str().unwrap(),
        "--b",
        "0.3",
        "--a-grid",
        "16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");

    let csv = std::fs::read_to_string(scratch("forward_k1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "a_1,re,im");
    let values: Vec<(f64, f64, f64)> = lines
        .map(|l| {
            let cols: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
            (cols[0], cols[1], cols[2])
        })
        .collect();
    assert_eq!(values.len(), 16);

    let mut dft_re = 0.0;
    let mut dft_im = 0.0;
    for (a, re, im) in &values {
        let th = -std::f64::consts::TAU * a;
        let (s, c) = th.sin_cos();
        dft_re += re * c - im * s;
        dft_im += re * s + im * c;
    }
    dft_re /= 16.0;
    dft_im /= 16.0;
    let phi = slab_tomo::phi(0.3);
    assert!(
        (dft_re - phi.re).abs() < 1e-12 && (dft_im - phi.im).abs() < 1e-12,
        "({dft_re}, {dft_im}) vs {phi}"
    );

    let sidecar = json_value(&scratch("forward_k1.json"));
    assert_eq!(sidecar["a_grid_size"], serde_json::json!(16));
}

#[test]
fn forward_quadrature_route_matches_exact_route() {
    let exact = scratch("forward_exact");
    let quad = scratch("forward_quad");
    let field = fixture("mode_k1.json");
    assert!(run(&[
        "forward",
        "--field",
        field.to_str().unwrap(),
        "--b",
        "0.3",
        "--a-grid",
        "8",
        "--out",
        exact.to_str().unwrap(),
    ])
    .status
    .success());
    assert!(run(&[
        "forward",
        "--field",
        field.to_str().unwrap(),
        "--b",
        "0.3",
        "--a-grid",
        "8",
        "--quad-nodes",
        "32",
        "--out",
        quad.to_str().unwrap(),
    ])
    .status
    .success());
    let a = std::fs::read_to_string(scratch("forward_exact.csv")).unwrap();
    let b = std::fs::read_to_string(scratch("forward_quad.csv")).unwrap();
    for (la, lb) in a.lines().skip(1).zip(b.lines().skip(1)) {
        let va: Vec<f64> = la.split(',').map(|c| c.parse().unwrap()).collect();
        let vb: Vec<f64> = lb.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((va[1] - vb[1]).abs() < 1e-10 && (va[2] - vb[2]).abs() < 1e-10);
    }
}

#[test]
fn constants_tabulates_the_closed_form() {
    let output = run(&["constants", "--n", "1", "--m", "1"]);
    assert!(output.status.success());
    let table: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let entry = &table.as_array().unwrap()[0];
    let c_g = entry["C_g"].as_f64().unwrap();
    assert!((c_g - 1.0 / std::f64::consts::PI).abs() < 1e-12, "{c_g}");
    let sigma = entry["sigma_min"].as_f64().unwrap();
    assert!((sigma - 0.5f64.sqrt()).abs() < 1e-12, "{sigma}");
}

#[test]
fn decompose_output_reassembles_and_is_deterministic() {
    // build a less trivial input: a random field written by the library
    let input = scratch("random_field.json");
    let f = slab_tomo::FourierTensorField::random(1, 1, 2, 2, 99);
    slab_tomo::io::save_field(&input, &f).unwrap();

    let out1 = scratch("d1.json");
    let out2 = scratch("d2.json");
    for out in [&out1, &out2] {
        let output = run(&[
            "decompose",
            "--field",
            input.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{output:?}");
    }
    // byte-identical reruns
    assert_eq!(
        std::fs::read(&out1).unwrap(),
        std::fs::read(&out2).unwrap()
    );

    // reassembly equals the input field
    let doc: slab_tomo::io::DecompositionJson =
        serde_json::from_str(&std::fs::read_to_string(&out1).unwrap()).unwrap();
    let h = slab_tomo::io::interval_from_json(&doc.h).unwrap();
    let g = slab_tomo::io::field_from_json(&doc.g).unwrap();
    let residual = slab_tomo::io::field_from_json(&doc.residual).unwrap();
    let back = &(&h.pullback() + &g.sym_derivative()) + &residual;
    let diff = (&back - &f).l2_norm();
    assert!(diff <= 1e-12 * f.l2_norm(), "{diff}");
}

#[test]
fn verify_with_covering_rejects_non_invariant_fields() {
    let output = run(&[
        "verify",
        "--field",
        fixture("mode_k1.json").to_str().unwrap(),
        "--covering",
        fixture("mobius.json").to_str().unwrap(),
        "--out",
        scratch("verify_twisted.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    let msg = String::from_utf8_lossy(&output.stderr);
    assert!(msg.contains("not invariant"), "{msg}");
}

#[test]
fn mobius_demo_produces_a_kernel_certificate() {
    let out = scratch("mobius_cert.json");
    let output = run(&[
        "mobius-demo",
        "--m",
        "1",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let cert = json_value(&out);
    assert_eq!(cert["in_kernel"], serde_json::Value::Bool(true));
    assert_eq!(cert["invariant"], serde_json::Value::Bool(true));
    assert!(cert["h_flip_defect"].as_f64().unwrap() < 1e-10);
    assert!(cert["residual_norm"].as_f64().unwrap() < 1e-9);
}

#[test]
fn exit_codes_distinguish_parse_and_precondition_failures() {
    // missing file: parse failure, code 1
    let output = run(&[
        "verify",
        "--field",
        "/nonexistent/field.json",
        "--out",
        scratch("never.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1), "{output:?}");

    // corrupt JSON: code 1, message names the file
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let output = run(&[
        "verify",
        "--field",
        bad.to_str().unwrap(),
        "--out",
        scratch("never.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("bad.json"));

    // schema violation: code 1, message names the JSON path
    let invalid = scratch("invalid_mode.json");
    std::fs::write(
        &invalid,
        r#"{"n":1,"m":0,"modes":[{"j":0,"k":[1,2],"poly":[]}]}"#,
    )
    .unwrap();
    let output = run(&[
        "decompose",
        "--field",
        invalid.to_str().unwrap(),
        "--out",
        scratch("never.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("modes[0].k"));

    // precondition violations: code 2
    let output = run(&[
        "verify",
        "--field",
        fixture("mode_k1.json").to_str().unwrap(),
        "--tol",
        "0.0",
        "--out",
        scratch("never.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));

    let output = run(&[
        "forward",
        "--field",
        fixture("mode_k1.json").to_str().unwrap(),
        "--b",
        "0.3",
        "--a-grid",
        "2",
        "--out",
        scratch("never").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

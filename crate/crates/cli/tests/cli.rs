use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lpvlft::format::{LftFile, ModelFile};
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpvlft"))
        .args(args.iter().map(|a| a.as_ref()))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn load_lft(path: &Path) -> LftFile {
    match ModelFile::load(path).unwrap() {
        ModelFile::Lft(f) => f,
        other => panic!("expected lft, got {}", other.kind()),
    }
}

/// Runs `transform` and returns the written LFT file.
fn transform(dir: &Path, falpv: &str, psi: &str, name: &str) -> PathBuf {
    let out = dir.join(name);
    let o = run(&[&"transform", &data(falpv), &data(psi), &"--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn realize_polynomial_taylor_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("psi.json");
    let rep = dir.path().join("rep.json");
    let o = run(&[&"realize-psi", &data("example1_taylor.json"), &"--out", &out, &"--report", &rep]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&rep);
    assert_eq!(r["total_dim"], 2);
    assert_eq!(r["scale"], 1.0);
    assert!(r["series_match_error"].as_f64().unwrap() < 1e-12);
    match ModelFile::load(&out).unwrap() {
        ModelFile::PsiRealization(f) => assert_eq!(f.blocks, vec![2]),
        other => panic!("unexpected kind {}", other.kind()),
    }
}

#[test]
fn realize_geometric_series_has_dimension_one() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("rep.json");
    let o = run(&[&"realize-psi", &data("geometric_taylor.json"), &"--report", &rep]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = read_json(&rep);
    assert_eq!(r["total_dim"], 1);
    assert!((r["stability_margin"].as_f64().unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn realize_zero_series_warns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("psi.json");
    let o = run(&[&"realize-psi", &data("zero_taylor.json"), &"--out", &out]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("warning"));
    match ModelFile::load(&out).unwrap() {
        ModelFile::PsiRealization(f) => assert_eq!(f.blocks, vec![0]),
        other => panic!("unexpected kind {}", other.kind()),
    }
}

#[test]
fn realize_with_too_large_order_is_a_realization_error() {
    let o = run(&[&"realize-psi", &data("geometric_taylor.json"), &"--order", &"5"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("[realization]"), "{}", stderr(&o));
}

#[test]
fn transform_polynomial_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = transform(dir.path(), "example1_falpv.json", "example1_psi.json", "lft.json");
    let f = load_lft(&out);
    assert_eq!(f.blocks, vec![2, 4]);
    assert!(f.assembled.is_some());
}

#[test]
fn transform_rational_example_with_fast_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lft.json");
    let rep = dir.path().join("rep.json");
    let o = run(&[
        &"transform",
        &data("example2_falpv.json"),
        &data("example2_psi.json"),
        &"--fast-path",
        &"--out",
        &out,
        &"--report",
        &rep,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(load_lft(&out).blocks, vec![2, 2]);
    let r = read_json(&rep);
    assert_eq!(r["fast_path"], "applied");
    assert!(r["point_check"]["max_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn transform_of_time_invariant_model_keeps_its_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let out = transform(dir.path(), "lti_falpv.json", "example2_psi.json", "lft.json");
    let f = load_lft(&out);
    let src = match ModelFile::load(&data("lti_falpv.json")).unwrap() {
        ModelFile::Falpv(f) => f,
        _ => unreachable!(),
    };
    assert_eq!(f.blocks, vec![2, 0]);
    assert_eq!(f.a, src.a[0]);
    assert_eq!(f.b, src.b[0]);
    assert_eq!(f.c, src.c[0]);
    assert_eq!(f.d, src.d[0]);
}

#[test]
fn transform_from_taylor_data_matches_realization_source() {
    let dir = tempfile::tempdir().unwrap();
    let a = transform(dir.path(), "example1_falpv.json", "example1_psi.json", "a.json");
    let b = transform(dir.path(), "example1_falpv.json", "example1_taylor.json", "b.json");
    let o = run(&[&"compare", &a, &b]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn transform_dimension_mismatch_is_a_contract_error() {
    let o = run(&[&"transform", &data("example1_falpv.json"), &data("example2_psi.json")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("[contract]"), "{}", stderr(&o));
}

#[test]
fn verify_transform_output() {
    let dir = tempfile::tempdir().unwrap();
    let lft = transform(dir.path(), "example1_falpv.json", "example1_psi.json", "lft.json");
    let rep = dir.path().join("rep.json");
    let o = run(&[
        &"verify",
        &data("example1_falpv.json"),
        &lft,
        &data("example1_psi.json"),
        &"--report",
        &rep,
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = read_json(&rep);
    assert!(r["relative_output_error"].as_f64().unwrap() <= 1e-9);
    assert_eq!(r["verdict"], true);
}

#[test]
fn verify_detects_perturbed_entry() {
    let dir = tempfile::tempdir().unwrap();
    let lft = transform(dir.path(), "example1_falpv.json", "example1_psi.json", "lft.json");
    let mut f = load_lft(&lft);
    // Row 0, column n_x: first entry of the H_x cell.
    f.a[0][2] += 1e-3;
    let perturbed = dir.path().join("perturbed.json");
    ModelFile::Lft(f).save(&perturbed).unwrap();
    let rep = dir.path().join("rep.json");
    let o = run(&[
        &"verify",
        &data("example1_falpv.json"),
        &perturbed,
        &data("example1_psi.json"),
        &"--report",
        &rep,
    ]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    let r = read_json(&rep);
    assert!(r["max_output_error"].as_f64().unwrap() > 1e-9);
    assert!(r["formal_check"]["word"].is_string());
}

#[test]
fn verify_with_zero_horizon_warns_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let lft = transform(dir.path(), "example2_falpv.json", "example2_psi.json", "lft.json");
    let o = run(&[
        &"verify",
        &data("example2_falpv.json"),
        &lft,
        &data("example2_psi.json"),
        &"--horizon",
        &"0",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn verify_needs_assembled_lft() {
    let o = run(&[
        &"verify",
        &data("example1_falpv.json"),
        &data("gss_first.json"),
        &data("example1_psi.json"),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn compare_identical_files() {
    let o = run(&[&"compare", &data("gss_first.json"), &data("gss_first.json")]);
    assert_eq!(code(&o), 0);
}

#[test]
fn compare_hand_built_pair_reports_separating_word() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("rep.json");
    let o = run(&[&"compare", &data("gss_first.json"), &data("gss_second.json"), &"--report", &rep]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("separating_word              1.2.3.1"), "{}", stdout(&o));
    assert_eq!(read_json(&rep)["separating_word"], "1.2.3.1");
}

#[test]
fn compare_transforms_of_similar_models_prints_similarity() {
    let dir = tempfile::tempdir().unwrap();
    let a = transform(dir.path(), "example1_falpv.json", "example1_psi.json", "a.json");
    let b = transform(dir.path(), "example1_falpv_similar.json", "example1_psi.json", "b.json");
    let rep = dir.path().join("rep.json");
    let o = run(&[&"compare", &a, &b, &"--report", &rep]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("T_1"));
    let t1 = &read_json(&rep)["similarity"][0];
    let expect = [[1.0, 0.5], [-0.25, 2.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((t1[i][j].as_f64().unwrap() - expect[i][j]).abs() < 1e-8);
        }
    }
}

#[test]
fn compare_transforms_of_product_scheduled_pair() {
    let dir = tempfile::tempdir().unwrap();
    let a = transform(dir.path(), "product_falpv.json", "product_taylor.json", "a.json");
    let b = transform(dir.path(), "product_falpv_similar.json", "product_taylor.json", "b.json");
    assert_eq!(code(&run(&[&"compare", &a, &b])), 0);
}

#[test]
fn compare_signature_mismatch_is_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let a = transform(dir.path(), "example1_falpv.json", "example1_psi.json", "a.json");
    let o = run(&[&"compare", &a, &data("gss_first.json")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("[contract]"));
}

#[test]
fn reports_and_outputs_are_deterministic() {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("lft.json");
        let rep = dir.path().join("rep.json");
        let o = run(&[
            &"transform",
            &data("example1_falpv.json"),
            &data("example1_taylor.json"),
            &"--seed",
            &"7",
            &"--out",
            &out,
            &"--report",
            &rep,
        ]);
        assert_eq!(code(&o), 0);
        let v = run(&[
            &"verify",
            &data("example1_falpv.json"),
            &out,
            &data("example1_taylor.json"),
            &"--seed",
            &"7",
        ]);
        outputs.push((
            o.stdout,
            std::fs::read(&out).unwrap(),
            std::fs::read(&rep).unwrap(),
            v.stdout,
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn simulate_falpv_and_lft_agree() {
    let dir = tempfile::tempdir().unwrap();
    let lft = transform(dir.path(), "example2_falpv.json", "example2_psi.json", "lft.json");
    let t1 = dir.path().join("t1.json");
    let t2 = dir.path().join("t2.json");
    let o = run(&[
        &"simulate",
        &data("example2_falpv.json"),
        &data("signals.json"),
        &"--psi",
        &data("example2_psi.json"),
        &"--out",
        &t1,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&[&"simulate", &lft, &data("signals.json"), &"--out", &t2]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (y1, y2) = (read_json(&t1)["y"].clone(), read_json(&t2)["y"].clone());
    let (y1, y2) = (y1.as_array().unwrap(), y2.as_array().unwrap());
    assert_eq!(y1.len(), 20);
    for (a, b) in y1.iter().zip(y2) {
        assert!((a[0].as_f64().unwrap() - b[0].as_f64().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn simulate_falpv_without_psi_is_exit_two() {
    let o = run(&[&"simulate", &data("example1_falpv.json"), &data("signals.json")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn minimize_and_check_stability() {
    let dir = tempfile::tempdir().unwrap();
    let lft = transform(dir.path(), "product_falpv.json", "product_taylor.json", "lft.json");
    let out = dir.path().join("min.json");
    let rep = dir.path().join("rep.json");
    let o = run(&[&"minimize", &lft, &"--out", &out, &"--report", &rep]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read_json(&rep)["blocks_after"], serde_json::json!([1, 2, 2]));
    let o = run(&[&"compare", &lft, &out]);
    assert_eq!(code(&o), 0);

    let o = run(&[&"check-stability", &data("example1_psi.json")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("margin                       1.000e0"));
    assert_eq!(code(&run(&[&"check-stability", &data("gss_first.json")])), 1);
}

#[test]
fn malformed_and_mistyped_inputs_are_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"lft\", \"blocks\": [1]").unwrap();
    let o = run(&[&"minimize", &bad]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("[input]"));
    let o = run(&[&"realize-psi", &data("example1_falpv.json")]);
    assert_eq!(code(&o), 2);
    let o = run(&[&"minimize", &dir.path().join("missing.json")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn shipped_data_files_round_trip_exactly() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let file = ModelFile::load(&path).unwrap();
        let text = file.to_json().unwrap();
        // Shipped files are stored in the canonical layout.
        assert_eq!(std::fs::read_to_string(&path).unwrap(), text, "{}", path.display());
        let back = ModelFile::from_json(&text).unwrap();
        assert_eq!(back, file, "{}", path.display());
        assert_eq!(back.to_json().unwrap(), text);
        count += 1;
    }
    assert!(count >= 10);
}

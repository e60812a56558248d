use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linform"))
        .args(args)
        .env_remove("LINFORM_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = run(&all);
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    (out.status.code().unwrap(), v)
}

#[test]
fn image_examples() {
    let mstd = data("mstd8.txt");
    let (code, v) = json(&["image", "-f", "1,1", "-A", mstd.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["cardinality"], 26);
    let (_, v) = json(&["image", "-f", "2,1", "--inline", "0,1,2", "--print-image"]);
    assert_eq!(v["outputs"]["cardinality"], 7);
    assert_eq!(
        v["outputs"]["image"]["elements"],
        serde_json::json!([0, 1, 2, 3, 4, 5, 6])
    );
    let (_, v) = json(&["image", "-f", "1,1", "--inline", "5"]);
    assert_eq!(v["outputs"]["cardinality"], 1);
    for s in ["pairs", "merge", "bitset"] {
        let (_, v) = json(&[
            "image",
            "-f",
            "1,-1",
            "-A",
            mstd.to_str().unwrap(),
            "--strategy",
            s,
        ]);
        assert_eq!(v["outputs"]["cardinality"], 25);
    }
}

#[test]
fn text_output() {
    let out = run(&["image", "-f", "2,1", "--inline", "0,1,2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("cardinality: 7"));
    assert!(text.contains("status: success"));
}

#[test]
fn parse_errors_name_the_token() {
    let out = run(&["image", "-f", "2,q", "--inline", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("'q'"));
    let out = run(&["image", "-f", "2,1", "--inline", "0,1,zz"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("'zz'"));
    let out = run(&["image", "-f", "2,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn large_images_go_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("big.txt");
    // cubes have almost no repeated pairwise sums, so |A+A| is near 500·501/2
    let body: String = (0..500i64).map(|i| format!("{}\n", i * i * i)).collect();
    std::fs::write(&set, body).unwrap();
    let (code, v) = json(&[
        "--out-dir",
        dir.path().to_str().unwrap(),
        "image",
        "-f",
        "1,1",
        "-A",
        set.to_str().unwrap(),
        "--print-image",
    ]);
    assert_eq!(code, 0);
    let image = &v["outputs"]["image"];
    let n = image["size"].as_u64().unwrap();
    assert!(n > 100_000);
    assert!(image.get("elements").is_none());
    let written = std::fs::read_to_string(image["path"].as_str().unwrap()).unwrap();
    assert_eq!(written.lines().count() as u64, n);
}

#[test]
fn compare_and_witnesses() {
    let mstd = data("mstd8.txt");
    let (_, v) = json(&[
        "compare",
        "-f",
        "1,1",
        "-g",
        "1,-1",
        "-A",
        mstd.to_str().unwrap(),
    ]);
    assert_eq!(v["outputs"]["ordering"], "greater");
    let (code, v) = json(&["classify3", "-u", "2", "-v", "1"]);
    assert_eq!(code, 0);
    assert_eq!(
        v["outputs"]["exceptional"][0]["set"],
        serde_json::json!([0, 1, 2])
    );
    let (_, v) = json(&["witness", "three", "-f", "3,1", "-g", "3,2"]);
    assert_eq!(v["outputs"]["witness"]["a"], serde_json::json!([0, 1, 4]));
    assert_eq!(v["outputs"]["witness"]["b"], serde_json::json!([0, 2, 5]));
    let (_, v) = json(&["witness", "four", "-u", "2", "-v", "1"]);
    let w = &v["outputs"]["witness"];
    assert_eq!((w["f_a"].as_u64(), w["g_a"].as_u64()), (Some(13), Some(12)));
    let (_, v) = json(&["witness", "ap", "-u", "7", "-v", "3", "-t", "5"]);
    assert_eq!(v["outputs"]["cardinality"], 25);
    let out = run(&["witness", "five", "-u", "2", "-v", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn local_search_is_thread_independent() {
    let args = [
        "local-search",
        "-f",
        "2,1",
        "-g",
        "1,1",
        "-m",
        "16",
        "--seed",
        "3",
    ];
    let one = run(&[&["--threads", "1"][..], &args[..]].concat());
    let four = run(&[&["--threads", "4"][..], &args[..]].concat());
    assert_eq!(one.stdout, four.stdout);
    assert!(String::from_utf8_lossy(&one.stdout).contains("g_card: 16"));
}

#[test]
fn construct_from_fixture_file() {
    let locals = data("four_moduli_locals.json");
    let (code, v) = json(&[
        "construct",
        "-f",
        "2,1",
        "-g",
        "1,1",
        "--source",
        "file",
        "--locals",
        locals.to_str().unwrap(),
        "--window",
        "1",
    ]);
    assert_eq!(code, 0);
    let o = &v["outputs"];
    assert_eq!(o["set_size"], "2646");
    assert_eq!(o["f_card"], 108014);
    assert_eq!(o["g_card"], 114575);
    assert_eq!(o["report"]["report"]["outcome"], "separated");
}

#[test]
fn construct_reads_text_locals() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("locals.txt");
    std::fs::write(
        &path,
        "# R13 and R16\n13: 0,1,6,7,9,11\n16: 0,1,3,5,7,9,11,13,15\n",
    )
    .unwrap();
    let (_, v) = json(&[
        "construct",
        "-f",
        "2,1",
        "-g",
        "1,1",
        "--source",
        "file",
        "--locals",
        path.to_str().unwrap(),
        "--emit-set",
    ]);
    assert_eq!(v["outputs"]["moduli"], serde_json::json!([13, 16]));
    assert_eq!(v["outputs"]["set"]["size"], 54);
}

#[test]
fn construct_failures() {
    let locals = data("four_moduli_locals.json");
    let (code, v) = json(&[
        "construct",
        "-f",
        "1,1",
        "-g",
        "1,1",
        "--source",
        "file",
        "--locals",
        locals.to_str().unwrap(),
        "--stop",
        "threshold",
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["status"], "failure");
    assert_eq!(v["outputs"]["ratio_product"], "1");
    let out = run(&["construct", "-f", "2,1", "-g", "1,1", "--source", "file"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_subset_and_negative_control() {
    let (code, v) = json(&["verify-paper", "--only", "mstd,four-moduli,intervals"]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["passed"], 3);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(data("four_moduli_locals.json")).unwrap();
    std::fs::write(
        &bad,
        text.replace("[0, 1, 6, 7, 9, 11]", "[0, 1, 6, 7, 9, 12]"),
    )
    .unwrap();
    let out = run(&[
        "verify-paper",
        "--only",
        "four-moduli",
        "--fixture",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL [ 2] four-moduli"));

    let out = run(&["verify-paper", "--only", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_results_round_trip() {
    let (_, v) = json(&["compare", "-f", "2,1", "-g", "1,1", "--inline", "0,1,3"]);
    for key in ["command", "inputs", "outputs", "status"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let text = serde_json::to_string(&v).unwrap();
    let back: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(back, v);
}

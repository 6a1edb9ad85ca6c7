//! End-to-end runs of the stylo binary against synthetic corpora.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stylo"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawning stylo")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("stylo-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Weighted random text with single spaces. `style` skews the letter
/// distribution; `seed` drives the draws, so one style with many seeds gives
/// a family of same-author documents.
fn styled_text(style: u64, seed: u64, letters: &[char], len: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(style));
    let mut out = String::with_capacity(len);
    let mut last_space = true;
    while out.len() < len {
        if !last_space && rng.random::<f64>() < 0.15 {
            out.push(' ');
            last_space = true;
            continue;
        }
        let r = rng.random::<f64>().powf(1.5 + (style % 5) as f64 * 0.4);
        let idx = (r * letters.len() as f64) as usize;
        out.push(letters[idx.min(letters.len() - 1)]);
        last_space = false;
    }
    out.trim().to_string()
}

fn write_corpus(dir: &Path, prefix: &str, seeds: std::ops::Range<u64>, len: usize) -> Vec<String> {
    let letters = ['a', 'b', 'c', 'd', 'e', 'f'];
    let mut names = Vec::new();
    for seed in seeds {
        let name = format!("{prefix}{seed}.txt");
        fs::write(dir.join(&name), styled_text(0, seed, &letters, len)).unwrap();
        names.push(name);
    }
    names
}

fn manifest_json(names: &[String]) -> String {
    let entries: Vec<String> = names
        .iter()
        .map(|n| format!("{{\"path\": \"{n}\", \"script\": \"latin\"}}"))
        .collect();
    format!("[{}]", entries.join(", "))
}

#[test]
fn ingest_writes_archive_and_reports_missing_files() {
    let dir = workdir("ingest");
    let mut names = write_corpus(&dir, "doc", 0..3, 800);
    names.push("missing.txt".to_string());
    fs::write(dir.join("manifest.json"), manifest_json(&names)).unwrap();

    let out = run_in(&dir, &["ingest", "--manifest", "manifest.json", "--out", "corpus.json"]);
    assert_ok(&out);

    let archive: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("corpus.json")).unwrap()).unwrap();
    assert_eq!(archive["documents"].as_array().unwrap().len(), 3);
    assert_eq!(archive["errors"].as_array().unwrap().len(), 1);
    assert_eq!(archive["run"]["command"], "ingest");
    assert!(archive["run"]["inputs"].as_object().unwrap().len() >= 4);
}

#[test]
fn ingest_duplicate_ids_fail_with_input_error() {
    let dir = workdir("ingest-dup");
    write_corpus(&dir, "doc", 0..1, 400);
    let manifest = r#"[
        {"id": "same", "path": "doc0.txt", "script": "latin"},
        {"id": "same", "path": "doc0.txt", "script": "latin"}
    ]"#;
    fs::write(dir.join("manifest.json"), manifest).unwrap();
    let out = run_in(&dir, &["ingest", "--manifest", "manifest.json"]);
    assert_eq!(out.status.code(), Some(1));
}

fn ingest_and_train(dir: &Path, train_seeds: std::ops::Range<u64>) {
    // train0 is much longer than its peers: its gram statistics sit closest
    // to the style's mean, so it lands strictly inside the learned frontier
    let mut names = Vec::new();
    for seed in train_seeds {
        let len = if seed == 0 { 9000 } else { 2500 };
        let name = format!("train{seed}.txt");
        fs::write(
            dir.join(&name),
            styled_text(0, seed, &['a', 'b', 'c', 'd', 'e', 'f'], len),
        )
        .unwrap();
        names.push(name);
    }
    fs::write(dir.join("train_manifest.json"), manifest_json(&names)).unwrap();
    assert_ok(&run_in(
        dir,
        &["ingest", "--manifest", "train_manifest.json", "--out", "corpus.json"],
    ));
    assert_ok(&run_in(
        dir,
        &[
            "train",
            "--archive",
            "corpus.json",
            "--nu",
            "0.1",
            "--gamma",
            "50",
            "--out",
            "model.json",
        ],
    ));
}

#[test]
fn train_and_classify_duplicate_vs_foreign() {
    let dir = workdir("classify");
    // all training docs share seed-style (seed % 5 == 0) so the class is tight
    ingest_and_train(&dir, 0..8);

    // duplicate of a training doc, and a text over a disjoint letter set
    fs::copy(dir.join("train0.txt"), dir.join("dup.txt")).unwrap();
    let foreign: String = styled_text(3, 77, &['u', 'v', 'w', 'x', 'y', 'z'], 2000);
    fs::write(dir.join("foreign.txt"), foreign).unwrap();
    fs::write(
        dir.join("test_manifest.json"),
        manifest_json(&["dup.txt".to_string(), "foreign.txt".to_string()]),
    )
    .unwrap();

    let out = run_in(
        &dir,
        &[
            "classify",
            "--model",
            "model.json",
            "--manifest",
            "test_manifest.json",
            "--out",
            "result.json",
        ],
    );
    assert_ok(&out);

    let csv = fs::read_to_string(dir.join("result.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "id,decision_value,label");
    assert_eq!(lines.len(), 3);

    let parse = |line: &str| -> (String, f64, String) {
        let mut parts = line.split(',');
        let id = parts.next().unwrap().to_string();
        let value: f64 = parts.next().unwrap().parse().unwrap();
        let label = parts.next().unwrap().to_string();
        (id, value, label)
    };
    let (dup_id, dup_value, dup_label) = parse(lines[1]);
    let (for_id, for_value, for_label) = parse(lines[2]);
    assert_eq!(dup_id, "dup");
    assert_eq!(for_id, "foreign");
    assert_eq!(dup_label, "inlier");
    assert_eq!(for_label, "outlier");
    assert!(dup_value > for_value);
}

#[test]
fn classify_empty_manifest_writes_header_only() {
    let dir = workdir("classify-empty");
    ingest_and_train(&dir, 0..5);
    fs::write(dir.join("empty_manifest.json"), "[]").unwrap();
    assert_ok(&run_in(
        &dir,
        &[
            "classify",
            "--model",
            "model.json",
            "--manifest",
            "empty_manifest.json",
            "--out",
            "result.json",
        ],
    ));
    let csv = fs::read_to_string(dir.join("result.csv")).unwrap();
    assert_eq!(csv, "id,decision_value,label\n");
}

#[test]
fn train_exit_code_two_on_non_convergence() {
    let dir = workdir("nonconv");
    let names = write_corpus(&dir, "train", 0..4, 1500);
    fs::write(dir.join("m.json"), manifest_json(&names)).unwrap();
    assert_ok(&run_in(&dir, &["ingest", "--manifest", "m.json", "--out", "corpus.json"]));
    let out = run_in(
        &dir,
        &[
            "train",
            "--archive",
            "corpus.json",
            "--nu",
            "0.9",
            "--gamma",
            "200",
            "--max-passes",
            "0",
            "--out",
            "model.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn distance_identical_and_disjoint() {
    let dir = workdir("distance");
    fs::write(dir.join("a.txt"), "arma virumque cano").unwrap();
    fs::write(dir.join("b.txt"), "arma virumque cano").unwrap();
    fs::write(dir.join("c.txt"), "zzz xxzx zzxx").unwrap();

    let out = run_in(
        &dir,
        &["distance", "--doc-a", "a.txt", "--doc-b", "b.txt", "--out", "d1.json"],
    );
    assert_ok(&out);
    let printed = String::from_utf8_lossy(&out.stdout);
    let value: f64 = printed.trim().parse().unwrap();
    assert!(value.abs() < 1e-9);

    let out = run_in(
        &dir,
        &["distance", "--doc-a", "a.txt", "--doc-b", "c.txt", "--out", "d2.json"],
    );
    assert_ok(&out);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "inf");
    let artifact: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("d2.json")).unwrap()).unwrap();
    assert_eq!(artifact["distance"], "inf");
}

#[test]
fn distance_hand_built_bigram_documents() {
    let dir = workdir("distance-worked");
    // "aab" has bigrams {aa: 1/2, ab: 1/2}; "aabb" has {aa, ab, bb} at 1/3
    // each, so BC = 2 sqrt(1/6) and the distance is -ln of that.
    fs::write(dir.join("a.txt"), "aab").unwrap();
    fs::write(dir.join("b.txt"), "aabb").unwrap();
    let out = run_in(
        &dir,
        &["distance", "--doc-a", "a.txt", "--doc-b", "b.txt", "--out", "d.json"],
    );
    assert_ok(&out);
    let value: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    let expected = -(2.0 / 6.0f64.sqrt()).ln();
    assert!((value - expected).abs() < 1e-9, "{value} vs {expected}");
}

#[test]
fn train_grid_with_holdouts_records_best_cell() {
    let dir = workdir("train-grid");
    ingest_and_train(&dir, 0..6); // also writes corpus.json

    // holdout-in: more documents of the training style; holdout-out: foreign
    let in_names = vec!["hin0.txt".to_string(), "hin1.txt".to_string()];
    fs::write(dir.join("hin0.txt"), styled_text(0, 100, &['a', 'b', 'c', 'd', 'e', 'f'], 8000)).unwrap();
    fs::write(dir.join("hin1.txt"), styled_text(0, 101, &['a', 'b', 'c', 'd', 'e', 'f'], 8000)).unwrap();
    fs::write(dir.join("hin.json"), manifest_json(&in_names)).unwrap();
    let out_names = vec!["hout0.txt".to_string(), "hout1.txt".to_string()];
    fs::write(dir.join("hout0.txt"), styled_text(3, 102, &['u', 'v', 'w', 'x', 'y', 'z'], 8000)).unwrap();
    fs::write(dir.join("hout1.txt"), styled_text(3, 103, &['u', 'v', 'w', 'x', 'y', 'z'], 8000)).unwrap();
    fs::write(dir.join("hout.json"), manifest_json(&out_names)).unwrap();

    let out = run_in(
        &dir,
        &[
            "train",
            "--archive",
            "corpus.json",
            "--grid",
            "--holdout-in",
            "hin.json",
            "--holdout-out",
            "hout.json",
            "--nu-grid",
            "0.1,0.3",
            "--gamma-grid",
            "10,50,200",
            "--out",
            "grid_model.json",
        ],
    );
    assert_ok(&out);
    let model: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("grid_model.json")).unwrap()).unwrap();
    assert_eq!(model["grid"]["cells"].as_array().unwrap().len(), 6);
    assert_eq!(model["grid"]["weak_scoring"], false);
    let best = model["grid"]["best_score"].as_f64().unwrap();
    assert!(best >= 1.5, "separable holdouts should score high, got {best}");
    // the winning cell's parameters are what the model was trained with
    let nu = model["model"]["nu"].as_f64().unwrap();
    let gamma = model["model"]["gamma"].as_f64().unwrap();
    assert!([0.1, 0.3].contains(&nu));
    assert!([10.0, 50.0, 200.0].contains(&gamma));
    // stored multipliers satisfy the dual sum constraint
    let alpha_sum: f64 = model["model"]["alphas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a.as_f64().unwrap())
        .sum();
    assert!((alpha_sum - 1.0).abs() < 1e-6, "alpha sum {alpha_sum}");
}

#[test]
fn train_single_document_warns() {
    let dir = workdir("train-single");
    let names = write_corpus(&dir, "solo", 0..1, 2500);
    fs::write(dir.join("m.json"), manifest_json(&names)).unwrap();
    assert_ok(&run_in(&dir, &["ingest", "--manifest", "m.json", "--out", "corpus.json"]));
    let out = run_in(
        &dir,
        &[
            "train", "--archive", "corpus.json", "--nu", "0.5", "--gamma", "10",
            "--out", "model.json",
        ],
    );
    assert_ok(&out);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("single document"), "stderr: {stderr}");
    let model: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["model"]["alphas"].as_array().unwrap().len(), 1);
    assert_eq!(model["model"]["alphas"][0], 1.0);
}

#[test]
fn intertext_full_and_sampled_reports() {
    let dir = workdir("intertext");
    let query = styled_text(0, 3, &['a', 'b', 'c', 'd', 'e', 'f'], 60);
    let filler = styled_text(2, 400, &['u', 'v', 'w', 'x', 'y', 'z'], 900);
    let body = format!("{query} {filler} {query}");
    fs::write(dir.join("query.txt"), &query).unwrap();
    fs::write(dir.join("doc.txt"), &body).unwrap();

    let out = run_in(
        &dir,
        &[
            "intertext",
            "--query",
            "query.txt",
            "--doc",
            "doc.txt",
            "--full",
            "--threshold",
            "0.05",
            "--out",
            "full.json",
        ],
    );
    assert_ok(&out);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("full.json")).unwrap()).unwrap();
    let hits = report["report"]["hits"].as_array().unwrap();
    assert_eq!(hits.len(), 2, "expected the two planted sites: {hits:?}");
    assert!(report["report"]["sampled_proportion"].is_null());
    let csv = fs::read_to_string(dir.join("full.csv")).unwrap();
    assert!(csv.starts_with("offset,distance,excerpt\n"));
    assert_eq!(csv.lines().count(), 3);

    let out = run_in(
        &dir,
        &[
            "intertext",
            "--query",
            "query.txt",
            "--doc",
            "doc.txt",
            "--alpha",
            "0.05",
            "--epsilon",
            "0.1",
            "--threshold",
            "0.05",
            "--seed",
            "9",
            "--out",
            "sampled.json",
        ],
    );
    assert_ok(&out);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("sampled.json")).unwrap()).unwrap();
    assert_eq!(report["plan"]["b"], 185);
    let proportion = report["report"]["sampled_proportion"].as_f64().unwrap();
    let ci = report["report"]["confidence_interval"].as_array().unwrap();
    let lo = ci[0].as_f64().unwrap();
    let hi = ci[1].as_f64().unwrap();
    assert!((hi - lo - 0.2).abs() < 1e-12);
    assert!((proportion - (lo + hi) / 2.0).abs() < 1e-12);
}

#[test]
fn doc_compare_self_finds_matches() {
    let dir = workdir("doccmp");
    let text = styled_text(0, 5, &['a', 'b', 'c', 'd', 'e', 'f'], 3000);
    fs::write(dir.join("a.txt"), &text).unwrap();
    fs::write(dir.join("b.txt"), &text).unwrap();

    let out = run_in(
        &dir,
        &[
            "doc-compare",
            "--doc-a",
            "a.txt",
            "--doc-b",
            "b.txt",
            "--min-len",
            "60",
            "--max-len",
            "100",
            "--step",
            "40",
            "--n-per-len",
            "5",
            "--threshold",
            "0.2",
            "--seed",
            "11",
            "--out",
            "cmp.json",
        ],
    );
    assert_ok(&out);
    let artifact: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("cmp.json")).unwrap()).unwrap();
    let entries = artifact["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 10);
    // identical documents: matches exist and entries are sorted by best distance
    let firsts: Vec<f64> = entries
        .iter()
        .filter_map(|e| {
            e["report"]["hits"]
                .as_array()
                .and_then(|hits| hits.iter().map(|h| h["distance"].as_f64().unwrap()).min_by(f64::total_cmp))
        })
        .collect();
    assert!(!firsts.is_empty());
    for w in firsts.windows(2) {
        assert!(w[0] <= w[1] + 1e-12);
    }
    let csv = fs::read_to_string(dir.join("cmp.csv")).unwrap();
    assert!(csv.starts_with("query_offset,query_len,best_offset,best_distance,hits\n"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = workdir("determinism");
    let names = write_corpus(&dir, "doc", 0..4, 1200);
    fs::write(dir.join("m.json"), manifest_json(&names)).unwrap();

    for args in [
        vec!["ingest", "--manifest", "m.json", "--seed", "3"],
        vec![
            "doc-compare", "--doc-a", "doc0.txt", "--doc-b", "doc1.txt", "--min-len", "60",
            "--max-len", "60", "--step", "20", "--n-per-len", "3", "--seed", "3",
        ],
    ] {
        let mut first = args.clone();
        first.extend(["--out", "one.json"]);
        assert_ok(&run_in(&dir, &first));
        let mut second = args.clone();
        second.extend(["--out", "two.json"]);
        assert_ok(&run_in(&dir, &second));
        let one = fs::read(dir.join("one.json")).unwrap();
        let two = fs::read(dir.join("two.json")).unwrap();
        assert_eq!(one, two, "artifacts differ for {args:?}");
        if dir.join("one.csv").exists() {
            let one = fs::read(dir.join("one.csv")).unwrap();
            let two = fs::read(dir.join("two.csv")).unwrap();
            assert_eq!(one, two, "csv outputs differ for {args:?}");
        }
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = workdir("config");
    fs::write(dir.join("a.txt"), styled_text(0, 1, &['a', 'b', 'c'], 120)).unwrap();
    fs::write(dir.join("b.txt"), styled_text(0, 2, &['a', 'b', 'c'], 1500)).unwrap();
    fs::write(
        dir.join("cfg.json"),
        r#"{"seed": 42, "intertext": {"threshold": 0.31, "epsilon": 0.2}}"#,
    )
    .unwrap();

    let out = run_in(
        &dir,
        &[
            "intertext",
            "--query",
            "a.txt",
            "--doc",
            "b.txt",
            "--config",
            "cfg.json",
            "--epsilon",
            "0.15",
            "--out",
            "r.json",
        ],
    );
    assert_ok(&out);
    let artifact: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("r.json")).unwrap()).unwrap();
    // config supplied threshold and seed; the flag overrode epsilon
    assert_eq!(artifact["run"]["params"]["threshold"], 0.31);
    assert_eq!(artifact["run"]["params"]["epsilon"], 0.15);
    assert_eq!(artifact["run"]["seed"], 42);
}

#[test]
fn train_infeasible_nu_exits_two() {
    let dir = workdir("infeasible");
    let names = write_corpus(&dir, "t", 0..3, 1500);
    fs::write(dir.join("m.json"), manifest_json(&names)).unwrap();
    assert_ok(&run_in(&dir, &["ingest", "--manifest", "m.json", "--out", "corpus.json"]));
    let out = run_in(
        &dir,
        &["train", "--archive", "corpus.json", "--nu", "1.5", "--gamma", "10", "--out", "model.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

/// Transliterated Greek with diacritic markers, distinct letter skews per
/// style, run through the whole ingest -> train -> classify pipeline.
fn greek_text(style: u64, seed: u64, len: usize) -> String {
    let letters: Vec<char> = "abgdezhqiklmncoprstufxyw".chars().collect();
    let marks = [')', '(', '/', '\\', '=', '|', '+'];
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(7919).wrapping_add(style));
    let mut out = String::new();
    let mut last_space = true;
    while out.chars().filter(|c| !marks.contains(c)).count() < len {
        if !last_space && rng.random::<f64>() < 0.15 {
            out.push(' ');
            last_space = true;
            continue;
        }
        let r = rng.random::<f64>().powf(1.5 + (style % 5) as f64 * 0.5);
        let idx = (r * letters.len() as f64) as usize;
        out.push(letters[idx.min(letters.len() - 1)]);
        if rng.random::<f64>() < 0.2 {
            out.push(marks[rng.random_range(0..marks.len())]);
        }
        last_space = false;
    }
    out.trim().to_string()
}

#[test]
fn greek_attribution_end_to_end() {
    let dir = workdir("greek-e2e");
    let mut names = Vec::new();
    for seed in 0..6u64 {
        let len = if seed == 0 { 8000 } else { 2500 };
        let name = format!("gr{seed}.txt");
        fs::write(dir.join(&name), greek_text(0, seed, len)).unwrap();
        names.push(name);
    }
    let entries: Vec<String> = names
        .iter()
        .map(|n| format!("{{\"path\": \"{n}\", \"script\": \"greek\"}}"))
        .collect();
    fs::write(dir.join("m.json"), format!("[{}]", entries.join(", "))).unwrap();

    assert_ok(&run_in(&dir, &["ingest", "--manifest", "m.json", "--out", "corpus.json"]));
    assert_ok(&run_in(
        &dir,
        &["train", "--archive", "corpus.json", "--nu", "0.1", "--gamma", "50", "--out", "model.json"],
    ));

    fs::copy(dir.join("gr0.txt"), dir.join("same.txt")).unwrap();
    fs::write(dir.join("other.txt"), greek_text(2, 99, 4000)).unwrap();
    fs::write(
        dir.join("test.json"),
        r#"[{"path": "same.txt", "script": "greek"}, {"path": "other.txt", "script": "greek"}]"#,
    )
    .unwrap();
    assert_ok(&run_in(
        &dir,
        &["classify", "--model", "model.json", "--manifest", "test.json", "--out", "res.json"],
    ));
    let csv = fs::read_to_string(dir.join("res.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[1].starts_with("same,") && lines[1].ends_with(",inlier"), "{csv}");
    assert!(lines[2].starts_with("other,") && lines[2].ends_with(",outlier"), "{csv}");
}

#[test]
fn greek_manifest_normalizes_beta_code() {
    let dir = workdir("greek");
    fs::write(dir.join("g.txt"), "mh=nin a)/eide qea\\ *phlhi+a/dew").unwrap();
    fs::write(
        dir.join("m.json"),
        r#"[{"path": "g.txt", "script": "greek"}]"#,
    )
    .unwrap();
    assert_ok(&run_in(&dir, &["ingest", "--manifest", "m.json", "--out", "c.json"]));
    let archive: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("c.json")).unwrap()).unwrap();
    let normalized = archive["documents"][0]["normalized"].as_str().unwrap();
    assert_eq!(normalized, "mhnin aeide qea phlhiadew");
    assert!(normalized
        .chars()
        .all(|c| c == ' ' || "abgdezhqiklmncoprstufxyw".contains(c)));
}

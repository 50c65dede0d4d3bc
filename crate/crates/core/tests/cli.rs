mod support;

use support::cli::{fixture, run, stderr, stdout, transcript, write_corpus, yes_no_corpus};
use vqa_dialogue::pipeline::{load_transcripts, RunManifest};

fn caption(
    dir: &std::path::Path,
    config: &str,
    images: &[&str],
    extra: &[&str],
) -> (std::process::Output, std::path::PathBuf) {
    let list = dir.join("images.txt");
    std::fs::write(&list, images.join("\n") + "\n").unwrap();
    let out = dir.join("out.jsonl");
    let mut args = vec![
        "caption",
        "--config",
        config,
        "--images",
        list.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--deterministic",
    ];
    args.extend_from_slice(extra);
    (run(&args), out)
}

#[test]
fn caption_writes_transcripts_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("scripted.toml");
    let (o, out) = caption(dir.path(), config.to_str().unwrap(), &["a.jpg", "b.jpg"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let ts = load_transcripts(&out).unwrap();
    assert_eq!(ts.len(), 2);
    let t = &ts[0];
    assert_eq!(t.turns.len(), 10);
    assert_eq!(t.turns[0].question, "Describe the image in detail.");
    assert_eq!(t.turns[0].answer, "a man standing on a beach");
    assert_eq!(t.turns[1].question, "What is the man holding?");
    assert!(t.caption.as_deref().unwrap().starts_with("A man in a red shirt"));
    assert_eq!(t.created_at.timestamp(), 0);

    let manifest: RunManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.manifest.json")).unwrap()).unwrap();
    assert_eq!((manifest.images, manifest.completed), (2, 2));
    assert!(manifest.failures.is_empty());
    assert_eq!(manifest.config.digest(), t.config_digest);
}

#[test]
fn caption_is_reproducible() {
    let config = fixture("scripted.toml");
    let images: Vec<String> = (0..6).map(|i| format!("img_{i}.jpg")).collect();
    let images: Vec<&str> = images.iter().map(String::as_str).collect();
    let outputs: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .map(|p| {
            let dir = tempfile::tempdir().unwrap();
            let (o, out) = caption(dir.path(), config.to_str().unwrap(), &images, &["--parallelism", p]);
            assert_eq!(o.status.code(), Some(0));
            std::fs::read(out).unwrap()
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn caption_partial_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("one_unavailable.toml");
    let (o, out) = caption(
        dir.path(),
        config.to_str().unwrap(),
        &["img_a.jpg", "img_b.jpg", "img_c.jpg"],
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("img_b.jpg"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    let manifest: RunManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.failures.len(), 1);
    assert_eq!(manifest.failures[0].image_ref, "img_b.jpg");
}

#[test]
fn caption_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = caption(dir.path(), "/nonexistent/config.toml", &["a.jpg"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read config"));

    let o = run(&["caption", "--images", "x.txt"]);
    assert_eq!(o.status.code(), Some(2));

    let config = fixture("scripted.toml");
    let (o, _) = caption(
        dir.path(),
        config.to_str().unwrap(),
        &["a.jpg"],
        &["--questioner.temperature", "9.5"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("temperature"), "{}", stderr(&o));
}

#[test]
fn caption_overrides_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("scripted.toml");
    let (o, out) = caption(
        dir.path(),
        config.to_str().unwrap(),
        &["a.jpg"],
        &["--total-questions", "3", "--first-question=What is this?"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t = &load_transcripts(&out).unwrap()[0];
    assert_eq!(t.turns.len(), 3);
    assert_eq!(t.turns[0].question, "What is this?");
}

#[test]
fn eval_coverage_on_toy_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("toy_caption.toml");
    let (o, out) = caption(dir.path(), config.to_str().unwrap(), &["img1"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let labels = fixture("toy_labels.jsonl");
    let tsv = fixture("toy.tsv");
    let args = [
        "eval",
        out.to_str().unwrap(),
        "--metric",
        "coverage",
        "--labels",
        labels.to_str().unwrap(),
        "--taxonomy-tsv",
        tsv.to_str().unwrap(),
    ];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("1/2"), "{text}");
    assert!(text.contains("50.0%"), "{text}");

    let mut json_args = args.to_vec();
    json_args.push("--json");
    let o = run(&json_args);
    let report: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(report["objects_covered"], 1);
    assert_eq!(report["objects_total"], 2);
    assert_eq!(report["coverage_ratio"], 0.5);
}

#[test]
fn eval_coverage_with_wordnet_files() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(
        &corpus,
        &[transcript(
            "photos/img1.jpg",
            &[("Q?", "A")],
            Some("A domestic dog sleeps."),
        )],
    );
    let labels = dir.path().join("labels.jsonl");
    std::fs::write(
        &labels,
        "{\"image_id\": \"img1\", \"labels\": [\"animal\", \"dog\", \"zeppelin\"]}\n",
    )
    .unwrap();
    let wndb = fixture("wndb");
    let o = run(&[
        "eval",
        corpus.to_str().unwrap(),
        "--metric",
        "coverage",
        "--labels",
        labels.to_str().unwrap(),
        "--wordnet-dir",
        wndb.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(
        (report["objects_covered"].as_u64(), report["objects_total"].as_u64()),
        (Some(2), Some(3))
    );
}

#[test]
fn eval_unique_upper_bound() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(&corpus, &yes_no_corpus(0));
    let o = run(&["eval", corpus.to_str().unwrap(), "--metric", "unique", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(r["per_dialogue_unique_mean"], 9.0);
    assert_eq!(r["total_unique"], 1800);
    assert_eq!(r["total_questions"], 1800);
    let table = stdout(&run(&["eval", corpus.to_str().unwrap(), "--metric", "unique"]));
    assert!(table.contains("9/9") && table.contains("1800/1800"), "{table}");
}

#[test]
fn eval_yes_no_ratio_has_no_decimals() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(&corpus, &yes_no_corpus(38));
    let o = run(&["eval", corpus.to_str().unwrap(), "--metric", "yesno"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("38/1800"), "{text}");
    assert!(text.contains(" 2% "), "{text}");
}

#[test]
fn eval_all_without_labels_skips_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(&corpus, &[transcript("a", &[("Is it red?", "Not sure")], Some("cap"))]);
    let o = run(&["eval", corpus.to_str().unwrap(), "--include-first-question"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("Unique Q per Dialogue"));
    assert!(text.contains("Uncertain Answers"));
    assert!(!text.contains("Covered/All"));
    assert!(text.contains("1/1"));
}

#[test]
fn eval_unreadable_inputs_exit_two() {
    let o = run(&["eval", "/nonexistent.jsonl"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    std::fs::write(&corpus, "{not json}\n").unwrap();
    assert_eq!(run(&["eval", corpus.to_str().unwrap()]).status.code(), Some(2));

    write_corpus(&corpus, &[transcript("a", &[("Q?", "A")], Some("cap"))]);
    let o = run(&["eval", corpus.to_str().unwrap(), "--metric", "coverage"]);
    assert_eq!(o.status.code(), Some(2));

    let labels = fixture("toy_labels.jsonl");
    let bad = fixture("wndb_malformed");
    let o = run(&[
        "eval",
        corpus.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--wordnet-dir",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("data.noun:4"), "{}", stderr(&o));
}

#[test]
fn replay_prints_dialogues() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    write_corpus(
        &corpus,
        &[
            transcript(
                "imgs/x.jpg",
                &[
                    ("Describe the image in detail.", "a cat"),
                    ("What color is it?", "grey"),
                ],
                Some("A grey cat."),
            ),
            transcript("imgs/y.jpg", &[("Describe the image in detail.", "a dog")], None),
        ],
    );
    let path = corpus.to_str().unwrap();

    let o = run(&["replay", path, "--id", "x"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "image: imgs/x.jpg\nQuestion: Describe the image in detail.\nAnswer: a cat\nQuestion: What color is it?\nAnswer: grey\ncaption: A grey cat.\n"
    );

    let o = run(&["replay", path, "--id", "imgs/y.jpg"]);
    assert!(stdout(&o).ends_with("Answer: a dog\ncaption: <none>\n"));

    let o = run(&["replay", path, "--id", "x", "--json"]);
    let line = std::fs::read_to_string(&corpus)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(stdout(&o), line + "\n");

    let o = run(&["replay", path, "--id", "missing"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn overrides_on_other_subcommands_are_rejected() {
    let o = run(&["replay", "f.jsonl", "--questioner.temperature", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

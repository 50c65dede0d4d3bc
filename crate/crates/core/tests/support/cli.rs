//! Running the built binary and building transcript corpora on disk.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{DateTime, Utc};
use vqa_dialogue::dialogue::{Transcript, Turn};
use vqa_dialogue::pipeline::TranscriptWriter;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqa-dialogue"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A finished transcript with the given questions and answers.
pub fn transcript(image_ref: &str, qa: &[(&str, &str)], caption: Option<&str>) -> Transcript {
    let mut t = Transcript::new(image_ref, DateTime::<Utc>::UNIX_EPOCH);
    for (i, (q, a)) in qa.iter().enumerate() {
        t.turns.push(Turn {
            index: i + 1,
            question: q.to_string(),
            answer: a.to_string(),
            raw_question: q.to_string(),
            raw_answer: a.to_string(),
        });
    }
    t.caption = caption.map(str::to_string);
    t
}

pub fn write_corpus(path: &Path, transcripts: &[Transcript]) {
    let w = TranscriptWriter::create(path).unwrap();
    for t in transcripts {
        w.append(t).unwrap();
    }
}

/// 200 dialogues of 10 turns. Of the 1800 questioner turns, `yes_no` open
/// with an auxiliary and the rest are distinct wh-questions.
pub fn yes_no_corpus(yes_no: usize) -> Vec<Transcript> {
    let mut remaining = yes_no;
    (0..200)
        .map(|d| {
            let mut qs = vec!["Describe the image in detail.".to_string()];
            for k in 0..9 {
                if remaining > 0 {
                    remaining -= 1;
                    qs.push(format!("Is there an object number {d}-{k}?"));
                } else {
                    qs.push(format!("What is object number {d}-{k}?"));
                }
            }
            let qa: Vec<(&str, &str)> = qs.iter().map(|q| (q.as_str(), "something")).collect();
            transcript(&format!("img_{d:03}.jpg"), &qa, Some("A caption."))
        })
        .collect()
}

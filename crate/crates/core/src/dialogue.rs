//! Backend-free dialogue data model: turns, transcripts, trimming and
//! chat-log rendering.

use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Marker the questioner uses when it starts fabricating an answer.
pub const ANSWER_MARKER: &str = "Answer:";
/// Marker the answerer uses when it starts fabricating a follow-up question.
pub const QUESTION_MARKER: &str = "Question:";

/// Separator placed between rendered question/answer blocks by default.
pub const DEFAULT_BLOCK_SEPARATOR: &str = "\n";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrimError {
    #[error("question is empty after trimming")]
    EmptyQuestion,
    #[error("answer is empty after trimming")]
    EmptyAnswer,
}

fn cut_at<'a>(raw: &'a str, marker: &str) -> &'a str {
    match raw.find(marker) {
        Some(pos) => &raw[..pos],
        None => raw,
    }
}

/// Drops everything from the first `Answer:` onward and strips whitespace.
pub fn trim_question(raw: &str) -> Result<String, TrimError> {
    let q = cut_at(raw, ANSWER_MARKER).trim();
    if q.is_empty() {
        Err(TrimError::EmptyQuestion)
    } else {
        Ok(q.to_string())
    }
}

/// Drops everything from the first `Question:` onward and strips whitespace.
pub fn trim_answer(raw: &str) -> Result<String, TrimError> {
    let a = cut_at(raw, QUESTION_MARKER).trim();
    if a.is_empty() {
        Err(TrimError::EmptyAnswer)
    } else {
        Ok(a.to_string())
    }
}

/// One question/answer exchange. `raw_*` keep the untrimmed model output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub index: usize,
    pub question: String,
    pub answer: String,
    pub raw_question: String,
    pub raw_answer: String,
}

impl Turn {
    /// A turn whose question has been asked but not yet answered.
    pub fn pending(index: usize, question: String, raw_question: String) -> Self {
        Self {
            index,
            question,
            answer: String::new(),
            raw_question,
            raw_answer: String::new(),
        }
    }

    pub fn is_answered(&self) -> bool {
        !self.answer.is_empty()
    }
}

/// Full record of one captioning dialogue. Serialized as one JSONL line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub image_ref: String,
    pub turns: Vec<Turn>,
    pub caption: Option<String>,
    pub questioner_id: String,
    pub answerer_id: String,
    pub summarizer_id: String,
    pub config_digest: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranscriptViolation {
    #[error("turn at position {position} has index {index}")]
    NonContiguousIndex { position: usize, index: usize },
    #[error("turn {0} question contains the `Answer:` marker")]
    MarkerInQuestion(usize),
    #[error("turn {0} answer contains the `Question:` marker")]
    MarkerInAnswer(usize),
    #[error("turn {0} has an empty question")]
    EmptyQuestion(usize),
    #[error("turn {0} is unanswered but is not the last turn")]
    UnansweredTurn(usize),
    #[error("caption present but turn {0} is unanswered")]
    CaptionWithUnansweredTurn(usize),
    #[error("first question {found:?} differs from configured {expected:?}")]
    FirstQuestionMismatch { expected: String, found: String },
}

impl Transcript {
    pub fn new(image_ref: impl Into<String>, created_at: DateTime<Utc>) -> Self {
        Self {
            image_ref: image_ref.into(),
            turns: Vec::new(),
            caption: None,
            questioner_id: String::new(),
            answerer_id: String::new(),
            summarizer_id: String::new(),
            config_digest: String::new(),
            created_at,
        }
    }

    pub fn completed_turns(&self) -> impl Iterator<Item = &Turn> {
        self.turns.iter().filter(|t| t.is_answered())
    }

    pub fn is_complete(&self) -> bool {
        self.caption.as_deref().is_some_and(|c| !c.is_empty())
    }

    /// Checks the structural invariants. `first_question`, when given, must
    /// match turn 1 verbatim.
    pub fn validate(&self, first_question: Option<&str>) -> Result<(), TranscriptViolation> {
        let last = self.turns.len();
        for (pos, turn) in self.turns.iter().enumerate() {
            if turn.index != pos + 1 {
                return Err(TranscriptViolation::NonContiguousIndex {
                    position: pos + 1,
                    index: turn.index,
                });
            }
            if turn.question.trim().is_empty() {
                return Err(TranscriptViolation::EmptyQuestion(turn.index));
            }
            if turn.question.contains(ANSWER_MARKER) {
                return Err(TranscriptViolation::MarkerInQuestion(turn.index));
            }
            if turn.answer.contains(QUESTION_MARKER) {
                return Err(TranscriptViolation::MarkerInAnswer(turn.index));
            }
            if !turn.is_answered() {
                if self.caption.is_some() {
                    return Err(TranscriptViolation::CaptionWithUnansweredTurn(turn.index));
                }
                if turn.index != last {
                    return Err(TranscriptViolation::UnansweredTurn(turn.index));
                }
            }
        }
        if let (Some(expected), Some(first)) = (first_question, self.turns.first()) {
            if first.question != expected {
                return Err(TranscriptViolation::FirstQuestionMismatch {
                    expected: expected.to_string(),
                    found: first.question.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Renders answered turns as `Question: {q}\nAnswer: {a}` blocks joined by
/// `separator`. Unanswered turns are skipped.
pub fn render_chat_log_with(transcript: &Transcript, separator: &str) -> String {
    let mut out = String::new();
    for (i, turn) in transcript.completed_turns().enumerate() {
        if i > 0 {
            out.push_str(separator);
        }
        let _ = write!(out, "Question: {}\nAnswer: {}", turn.question, turn.answer);
    }
    out
}

pub fn render_chat_log(transcript: &Transcript) -> String {
    render_chat_log_with(transcript, DEFAULT_BLOCK_SEPARATOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn transcript(pairs: &[(&str, &str)]) -> Transcript {
        let mut t = Transcript::new("img", Utc.timestamp_opt(0, 0).unwrap());
        for (i, (q, a)) in pairs.iter().enumerate() {
            t.turns.push(Turn {
                index: i + 1,
                question: q.to_string(),
                answer: a.to_string(),
                raw_question: q.to_string(),
                raw_answer: a.to_string(),
            });
        }
        t
    }

    #[test]
    fn trim_question_examples() {
        assert_eq!(
            trim_question("What color is the car? Answer: red").unwrap(),
            "What color is the car?"
        );
        assert_eq!(
            trim_question("What is in the background?").unwrap(),
            "What is in the background?"
        );
        assert_eq!(trim_question("Answer: blue"), Err(TrimError::EmptyQuestion));
        assert_eq!(trim_question(""), Err(TrimError::EmptyQuestion));
        assert_eq!(trim_question("   \n"), Err(TrimError::EmptyQuestion));
    }

    #[test]
    fn trim_answer_examples() {
        assert_eq!(
            trim_answer("a dog on grass Question: what breed?").unwrap(),
            "a dog on grass"
        );
        assert_eq!(trim_answer("two people walking").unwrap(), "two people walking");
        assert_eq!(trim_answer("Question: anything?"), Err(TrimError::EmptyAnswer));
    }

    #[test]
    fn markers_are_case_sensitive() {
        assert_eq!(trim_question("Why? answer: no").unwrap(), "Why? answer: no");
        assert_eq!(trim_answer("red question: why").unwrap(), "red question: why");
    }

    #[test]
    fn first_marker_wins() {
        assert_eq!(trim_question("A? Answer: x Answer: y").unwrap(), "A?");
    }

    #[test]
    fn render_examples() {
        let one = transcript(&[("Describe the image in detail.", "a dog")]);
        assert_eq!(
            render_chat_log(&one),
            "Question: Describe the image in detail.\nAnswer: a dog"
        );
        assert_eq!(render_chat_log(&transcript(&[])), "");
        let two = transcript(&[("q1", "a1"), ("q2", "a2")]);
        assert_eq!(
            render_chat_log(&two),
            "Question: q1\nAnswer: a1\nQuestion: q2\nAnswer: a2"
        );
        assert_eq!(
            render_chat_log_with(&two, "\n\n"),
            "Question: q1\nAnswer: a1\n\nQuestion: q2\nAnswer: a2"
        );
    }

    #[test]
    fn render_skips_pending_turn() {
        let mut t = transcript(&[("q1", "a1")]);
        t.turns.push(Turn::pending(2, "q2".into(), "q2".into()));
        assert_eq!(render_chat_log(&t), "Question: q1\nAnswer: a1");
    }

    #[test]
    fn validate_catches_violations() {
        let mut t = transcript(&[("q1", "a1"), ("q2", "a2")]);
        assert!(t.validate(Some("q1")).is_ok());
        assert!(matches!(
            t.validate(Some("other")),
            Err(TranscriptViolation::FirstQuestionMismatch { .. })
        ));
        t.turns[1].index = 3;
        assert!(matches!(
            t.validate(None),
            Err(TranscriptViolation::NonContiguousIndex { position: 2, index: 3 })
        ));
        let mut t = transcript(&[("q1", "a1")]);
        t.turns.push(Turn::pending(2, "q2".into(), "q2".into()));
        assert!(t.validate(None).is_ok());
        t.caption = Some("c".into());
        assert_eq!(t.validate(None), Err(TranscriptViolation::CaptionWithUnansweredTurn(2)));
    }

    #[test]
    fn jsonl_round_trip() {
        let mut t = transcript(&[("q1", "a1")]);
        t.caption = Some("A dog.".into());
        t.config_digest = "abc".into();
        let line = serde_json::to_string(&t).unwrap();
        assert!(line.contains("\"created_at\":\"1970-01-01T00:00:00Z\""));
        assert!(line.contains("\"raw_question\""));
        let back: Transcript = serde_json::from_str(&line).unwrap();
        assert_eq!(back, t);
    }

    proptest! {
        #[test]
        fn trimming_is_idempotent(s in ".*", inject in proptest::bool::ANY) {
            let s = if inject { format!("{s} Answer: x Question: y") } else { s };
            if let Ok(q) = trim_question(&s) {
                prop_assert!(!q.contains(ANSWER_MARKER));
                prop_assert_eq!(trim_question(&q).unwrap(), q);
            }
            if let Ok(a) = trim_answer(&s) {
                prop_assert!(!a.contains(QUESTION_MARKER));
                prop_assert_eq!(trim_answer(&a).unwrap(), a);
            }
        }

        #[test]
        fn chat_log_counts_and_prefixes(pairs in proptest::collection::vec(("[a-z ?]{1,12}", "[a-z ]{1,12}"), 0..8)) {
            let pairs: Vec<(String, String)> = pairs
                .into_iter()
                .map(|(q, a)| (format!("q{q}"), format!("a{a}")))
                .collect();
            let refs: Vec<(&str, &str)> = pairs.iter().map(|(q, a)| (q.as_str(), a.as_str())).collect();
            let full = render_chat_log(&transcript(&refs));
            prop_assert_eq!(full.matches("Question: ").count(), refs.len());
            prop_assert_eq!(full.matches("Answer: ").count(), refs.len());
            for k in 0..refs.len() {
                let shorter = render_chat_log(&transcript(&refs[..k]));
                let longer = render_chat_log(&transcript(&refs[..=k]));
                prop_assert!(longer.starts_with(&shorter));
            }
        }
    }
}

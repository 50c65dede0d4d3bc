//! Question diversity and yes/no detection.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dialogue::Transcript;

/// Auxiliaries and modals that open a yes/no question.
pub const YES_NO_OPENERS: [&str; 20] = [
    "is", "are", "was", "were", "am", "do", "does", "did", "can", "could", "will", "would", "shall", "should", "has",
    "have", "had", "may", "might", "must",
];

/// Casefolded, whitespace-collapsed question with trailing punctuation
/// removed. Used for uniqueness and yes/no detection.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuestionKey(String);

impl QuestionKey {
    pub fn new(question: &str) -> Self {
        let collapsed = question.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ");
        Self(collapsed.trim_end_matches(|c: char| !c.is_alphanumeric()).to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub fn is_yes_no_question(question: &str) -> bool {
    let key = QuestionKey::new(question);
    key.as_str()
        .split(' ')
        .next()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()))
        .is_some_and(|w| YES_NO_OPENERS.contains(&w))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UniqueQuestionStats {
    pub dialogues: usize,
    pub per_dialogue_unique_mean: f64,
    pub total_unique: usize,
    pub total_questions: usize,
}

impl UniqueQuestionStats {
    /// Mean number of questions per dialogue.
    pub fn questions_per_dialogue(&self) -> f64 {
        if self.dialogues == 0 {
            0.0
        } else {
            self.total_questions as f64 / self.dialogues as f64
        }
    }
}

/// The questions counted for a transcript. With `questioner_turns_only`
/// the hard-coded first turn is skipped.
pub fn counted_questions(transcript: &Transcript, questioner_turns_only: bool) -> impl Iterator<Item = &str> {
    transcript
        .turns
        .iter()
        .filter(move |t| !(questioner_turns_only && t.index == 1))
        .map(|t| t.question.as_str())
}

pub fn unique_question_stats(transcripts: &[Transcript], questioner_turns_only: bool) -> UniqueQuestionStats {
    let mut corpus: HashSet<QuestionKey> = HashSet::new();
    let mut unique_sum = 0usize;
    let mut total_questions = 0usize;
    for t in transcripts {
        let mut local: HashSet<QuestionKey> = HashSet::new();
        for q in counted_questions(t, questioner_turns_only) {
            total_questions += 1;
            let key = QuestionKey::new(q);
            corpus.insert(key.clone());
            local.insert(key);
        }
        unique_sum += local.len();
    }
    UniqueQuestionStats {
        dialogues: transcripts.len(),
        per_dialogue_unique_mean: if transcripts.is_empty() {
            0.0
        } else {
            unique_sum as f64 / transcripts.len() as f64
        },
        total_unique: corpus.len(),
        total_questions,
    }
}

pub fn yes_no_count(transcripts: &[Transcript], questioner_turns_only: bool) -> usize {
    transcripts
        .iter()
        .flat_map(|t| counted_questions(t, questioner_turns_only))
        .filter(|q| is_yes_no_question(q))
        .count()
}

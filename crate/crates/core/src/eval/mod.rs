//! Automatic caption and dialogue evaluation: noun taxonomy loading,
//! Wu-Palmer matching, object coverage, question diversity, yes/no rate and
//! uncertain-answer counts.

mod answers;
mod coverage;
mod questions;
mod similarity;
mod taxonomy;
mod wndb;

pub use answers::{is_uncertain_answer, UncertaintyDetector, DEFAULT_UNCERTAINTY_PHRASES};
pub use coverage::{candidate_terms, image_coverage, object_coverage, tokenize, Coverage, CoverageError};
pub use questions::{
    counted_questions, is_yes_no_question, unique_question_stats, yes_no_count, QuestionKey, UniqueQuestionStats,
    YES_NO_OPENERS,
};
pub use similarity::{in_closure, words_match, words_match_with, wup_similarity, MatchOptions, WUP_MATCH_THRESHOLD};
pub use taxonomy::{
    normalize_lemma, parse_tsv_str, parse_tsv_taxonomy, SynsetEntry, Taxonomy, TaxonomyError, VIRTUAL_ROOT,
};
pub use wndb::parse_wordnet_nouns;

use serde::{Deserialize, Serialize};

use crate::dialogue::Transcript;

/// Aggregate statistics over one transcript corpus.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dialogues: usize,
    pub per_dialogue_unique_mean: f64,
    pub total_unique: usize,
    pub total_questions: usize,
    pub yes_no_count: usize,
    pub total_answers: usize,
    pub uncertain_answer_count: usize,
    pub objects_covered: usize,
    pub objects_total: usize,
    pub coverage_ratio: f64,
}

impl MetricsReport {
    /// Question and answer statistics. Coverage fields stay zero until
    /// [`MetricsReport::with_coverage`].
    pub fn from_transcripts(
        transcripts: &[Transcript],
        questioner_turns_only: bool,
        detector: &UncertaintyDetector,
    ) -> Self {
        let stats = unique_question_stats(transcripts, questioner_turns_only);
        let answers: Vec<&str> = transcripts
            .iter()
            .flat_map(|t| t.completed_turns())
            .map(|turn| turn.answer.as_str())
            .collect();
        Self {
            dialogues: stats.dialogues,
            per_dialogue_unique_mean: stats.per_dialogue_unique_mean,
            total_unique: stats.total_unique,
            total_questions: stats.total_questions,
            yes_no_count: yes_no_count(transcripts, questioner_turns_only),
            total_answers: answers.len(),
            uncertain_answer_count: answers.iter().filter(|a| detector.is_uncertain(a)).count(),
            ..Self::default()
        }
    }

    pub fn with_coverage(mut self, c: Coverage) -> Self {
        self.objects_covered = c.covered;
        self.objects_total = c.total;
        self.coverage_ratio = c.ratio();
        self
    }

    pub fn coverage(&self) -> Coverage {
        Coverage {
            covered: self.objects_covered,
            total: self.objects_total,
        }
    }

    pub fn yes_no_ratio(&self) -> f64 {
        ratio(self.yes_no_count, self.total_questions)
    }

    pub fn uncertain_ratio(&self) -> f64 {
        ratio(self.uncertain_answer_count, self.total_answers)
    }

    pub fn questions_per_dialogue(&self) -> f64 {
        ratio(self.total_questions, self.dialogues)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `ratio` as a percentage rounded to `decimals` places: `50.8%`, `2%`.
pub fn format_percent(ratio: f64, decimals: usize) -> String {
    format!("{:.*}%", decimals, ratio * 100.0)
}

/// `(new - base) / base`; zero when `base` is zero.
pub fn relative_improvement(base: f64, new: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        (new - base) / base
    }
}

/// A number with at most two decimals and no trailing zeros: `8.98`, `9`.
pub fn format_compact(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// `covered/total`, e.g. `586/1154`.
pub fn format_fraction(num: usize, den: usize) -> String {
    format!("{num}/{den}")
}

fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}", w = *w))
            .collect();
        format!("| {} |\n", padded.join(" | "))
    };
    let mut out = line(header.to_vec());
    out.push_str(&format!(
        "|{}|\n",
        widths.iter().map(|w| "-".repeat(w + 2)).collect::<Vec<_>>().join("|")
    ));
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

/// Coverage table: one row per caption source. Rows after the first also
/// show their improvement over the first.
pub fn render_coverage_table(rows: &[(&str, Coverage)]) -> String {
    let base = rows.first().map(|(_, c)| c.ratio());
    let body: Vec<Vec<String>> = rows
        .iter()
        .enumerate()
        .map(|(i, (name, c))| {
            let improvement = match base {
                Some(b) if i > 0 => format_percent(relative_improvement(b, c.ratio()), 1),
                _ => "-".into(),
            };
            vec![
                name.to_string(),
                format_fraction(c.covered, c.total),
                format_percent(c.ratio(), 1),
                improvement,
            ]
        })
        .collect();
    render_table(&["Methods", "Covered/All", "Ratio", "Improved"], &body)
}

/// Question diversity table: one row per questioner.
pub fn render_unique_table(rows: &[(&str, &MetricsReport)]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, r)| {
            vec![
                name.to_string(),
                format!(
                    "{}/{}",
                    format_compact(r.per_dialogue_unique_mean),
                    format_compact(r.questions_per_dialogue())
                ),
                format_fraction(r.total_unique, r.total_questions),
            ]
        })
        .collect();
    render_table(&["Questioner", "Unique Q per Dialogue", "Unique Q in Total"], &body)
}

pub fn render_yes_no_table(rows: &[(&str, &MetricsReport)]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, r)| {
            vec![
                name.to_string(),
                format_fraction(r.yes_no_count, r.total_questions),
                format_percent(r.yes_no_ratio(), 0),
            ]
        })
        .collect();
    render_table(&["Questioner", "Yes/No Questions", "Ratio"], &body)
}

pub fn render_uncertain_table(rows: &[(&str, &MetricsReport)]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, r)| {
            vec![
                name.to_string(),
                format_fraction(r.uncertain_answer_count, r.total_answers),
                format_percent(r.uncertain_ratio(), 1),
            ]
        })
        .collect();
    render_table(&["Answerer", "Uncertain Answers", "Ratio"], &body)
}

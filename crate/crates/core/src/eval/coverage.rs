//! Object coverage: how many ground-truth labels a caption mentions, under
//! the taxonomy word-matching rule.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::similarity::{profiles_match, word_profiles, MatchOptions, Profile};
use super::taxonomy::Taxonomy;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error("no caption for labeled image {0}")]
    MissingCaption(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coverage {
    pub covered: usize,
    pub total: usize,
}

impl Coverage {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.covered as f64 / self.total as f64
        }
    }
}

impl std::ops::Add for Coverage {
    type Output = Coverage;
    fn add(self, rhs: Coverage) -> Coverage {
        Coverage {
            covered: self.covered + rhs.covered,
            total: self.total + rhs.total,
        }
    }
}

/// Lowercased word tokens. Hyphens stay inside words; every other
/// non-alphanumeric character separates.
pub fn tokenize(caption: &str) -> Vec<String> {
    caption
        .split(|c: char| !(c.is_alphanumeric() || c == '-'))
        .map(|t| t.trim_matches('-'))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Unigrams and `_`-joined bigrams of the caption that are taxonomy lemmas,
/// deduplicated, in first-occurrence order.
pub fn candidate_terms(caption: &str, t: &Taxonomy) -> Vec<String> {
    let tokens = tokenize(caption);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let bigrams = tokens.windows(2).map(|w| format!("{}_{}", w[0], w[1]));
    for term in tokens.iter().cloned().chain(bigrams) {
        if t.has_lemma(&term) && seen.insert(term.clone()) {
            out.push(term);
        }
    }
    out
}

fn covers(t: &Taxonomy, caption_profiles: &[Profile], label: &[Profile]) -> bool {
    label
        .iter()
        .any(|l| caption_profiles.iter().any(|c| profiles_match(t, c, l)))
}

/// Coverage for one image.
pub fn image_coverage(caption: &str, labels: &BTreeSet<String>, t: &Taxonomy, opts: MatchOptions) -> Coverage {
    let caption_profiles: Vec<Profile> = candidate_terms(caption, t)
        .iter()
        .flat_map(|term| word_profiles(term, t, opts))
        .collect();
    let covered = labels
        .iter()
        .filter(|label| covers(t, &caption_profiles, &word_profiles(label, t, opts)))
        .count();
    Coverage {
        covered,
        total: labels.len(),
    }
}

/// Labels count once per image they appear in. Images in `captions`
/// without labels are ignored.
pub fn object_coverage(
    captions: &BTreeMap<String, String>,
    labels: &BTreeMap<String, BTreeSet<String>>,
    t: &Taxonomy,
    opts: MatchOptions,
) -> Result<Coverage, CoverageError> {
    let mut total = Coverage::default();
    for (image, image_labels) in labels {
        let caption = captions
            .get(image)
            .ok_or_else(|| CoverageError::MissingCaption(image.clone()))?;
        total = total + image_coverage(caption, image_labels, t, opts);
    }
    Ok(total)
}

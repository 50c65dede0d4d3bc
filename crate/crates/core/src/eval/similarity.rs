//! Wu-Palmer similarity, hypernym-closure membership and the word matching
//! rule built from them.
//!
//! Depth counts nodes on the longest path from the virtual root (root = 1).
//! For a common hypernym `c` of `a` and `b`:
//!
//! ```text
//! score(c) = 2·depth(c) / ((depth(c) + dist(a, c)) + (depth(c) + dist(b, c)))
//! ```
//!
//! with `dist` the minimum number of hypernym edges. The similarity is the
//! best score over all common hypernyms, so it lies in (0, 1].

use std::collections::HashMap;

use super::taxonomy::{normalize_lemma, Taxonomy, TaxonomyError};

/// Two words match above this similarity.
pub const WUP_MATCH_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchOptions {
    /// Only compare each word's first (most frequent) sense.
    pub first_sense_only: bool,
}

/// Ancestor distances of one synset, reusable across many comparisons.
pub(crate) struct Profile {
    pub(crate) idx: usize,
    pub(crate) dist: HashMap<usize, usize>,
}

impl Profile {
    pub(crate) fn new(t: &Taxonomy, idx: usize) -> Self {
        Self {
            idx,
            dist: t.ancestor_distances(idx),
        }
    }
}

pub(crate) fn wup_profiles(t: &Taxonomy, a: &Profile, b: &Profile) -> f64 {
    let (small, large) = if a.dist.len() <= b.dist.len() { (a, b) } else { (b, a) };
    let mut best = 0.0f64;
    for (&c, &da) in &small.dist {
        if let Some(&db) = large.dist.get(&c) {
            let depth = t.depth_at(c) as f64;
            let score = 2.0 * depth / ((depth + da as f64) + (depth + db as f64));
            best = best.max(score);
        }
    }
    best
}

pub(crate) fn closure_profiles(a: &Profile, b: &Profile) -> bool {
    a.dist.contains_key(&b.idx) || b.dist.contains_key(&a.idx)
}

pub(crate) fn profiles_match(t: &Taxonomy, a: &Profile, b: &Profile) -> bool {
    closure_profiles(a, b) || wup_profiles(t, a, b) > WUP_MATCH_THRESHOLD
}

pub fn wup_similarity(a: &str, b: &str, t: &Taxonomy) -> Result<f64, TaxonomyError> {
    let (a, b) = (t.index(a)?, t.index(b)?);
    Ok(wup_profiles(t, &Profile::new(t, a), &Profile::new(t, b)))
}

/// True when either synset is in the other's reflexive hypernym closure.
pub fn in_closure(a: &str, b: &str, t: &Taxonomy) -> Result<bool, TaxonomyError> {
    let (a, b) = (t.index(a)?, t.index(b)?);
    Ok(closure_profiles(&Profile::new(t, a), &Profile::new(t, b)))
}

pub(crate) fn word_profiles(word: &str, t: &Taxonomy, opts: MatchOptions) -> Vec<Profile> {
    let senses = t.synset_indices(&normalize_lemma(word));
    let senses = if opts.first_sense_only {
        &senses[..senses.len().min(1)]
    } else {
        senses
    };
    senses.iter().map(|&i| Profile::new(t, i)).collect()
}

/// Two words match when some pair of their noun synsets has Wu-Palmer
/// similarity above 0.9 or one synset lies in the other's closure. Words
/// without synsets never match.
pub fn words_match(w1: &str, w2: &str, t: &Taxonomy) -> bool {
    words_match_with(w1, w2, t, MatchOptions::default())
}

pub fn words_match_with(w1: &str, w2: &str, t: &Taxonomy, opts: MatchOptions) -> bool {
    let p1 = word_profiles(w1, t, opts);
    if p1.is_empty() {
        return false;
    }
    let p2 = word_profiles(w2, t, opts);
    p1.iter().any(|a| p2.iter().any(|b| profiles_match(t, a, b)))
}

//! Detecting answers in which the answerer admits it does not know.

pub const DEFAULT_UNCERTAINTY_PHRASES: [&str; 5] =
    ["don't know", "do not know", "not sure", "cannot tell", "can't tell"];

fn normalize(text: &str) -> String {
    text.to_lowercase()
        .replace(['\u{2018}', '\u{2019}'], "'")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncertaintyDetector {
    phrases: Vec<String>,
}

impl Default for UncertaintyDetector {
    fn default() -> Self {
        Self::new(DEFAULT_UNCERTAINTY_PHRASES)
    }
}

impl UncertaintyDetector {
    pub fn new<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            phrases: phrases
                .into_iter()
                .map(|p| normalize(p.as_ref()))
                .filter(|p| !p.is_empty())
                .collect(),
        }
    }

    pub fn is_uncertain(&self, answer: &str) -> bool {
        let a = normalize(answer);
        self.phrases.iter().any(|p| a.contains(p.as_str()))
    }
}

/// [`UncertaintyDetector::is_uncertain`] with the default phrases.
pub fn is_uncertain_answer(answer: &str) -> bool {
    UncertaintyDetector::default().is_uncertain(answer)
}

//! Instruction strings and prompt-context builders for the questioner,
//! answerer and summarizer roles.
//!
//! Every context is a plain concatenation:
//!
//! ```text
//! questioner:  task_q + sep + chat_log + sep + question_instr
//! answerer:    task_a + sep + chat_log + sep + "Question: {q} Answer:"
//! summarizer:  task_q + sep + chat_log + sep + summarize_instr
//! ```
//!
//! Builders never rewrite template or chat-log bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialogue::{render_chat_log_with, Transcript, DEFAULT_BLOCK_SEPARATOR};

pub const TASK_Q: &str = "I have an image. Ask me questions about the content of this image. \
Carefully asking me informative questions to maximize your information about this image content. \
Each time ask one question only without giving an answer. Avoid asking yes/no questions. \
I'll put my answer beginning with \"Answer:\".";

pub const QUESTION_INSTR: &str = "Next Question. Avoid asking yes/no questions. Question:";

pub const TASK_A: &str = "Answer given questions. If you are not sure about the answer, \
say you don't know honestly. Don't imagine any contents that are not in the image.";

pub const ANSWER_INSTR_PREFIX: &str = "Question: ";
pub const ANSWER_INSTR_SUFFIX: &str = " Answer:";

pub const SUMMARIZE_INSTR: &str = "Now summarize the information you get in a few sentences. \
Ignore the questions with answers no or not sure. Don't add information. \
Don't miss information. Summary:";

pub const FIRST_QUESTION: &str = "Describe the image in detail.";

pub const DEFAULT_SECTION_SEPARATOR: &str = "\n";

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("cannot read template file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid TOML templates: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid JSON templates: {0}")]
    Json(#[from] serde_json::Error),
}

/// The instruction strings used to build every prompt context. Any field
/// missing from a config file keeps its default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptTemplateSet {
    pub task_q: String,
    pub question_instr: String,
    pub task_a: String,
    pub answer_instr_prefix: String,
    pub answer_instr_suffix: String,
    pub summarize_instr: String,
    pub first_question: String,
    /// Joins task instruction, chat log and trailing instruction.
    pub section_separator: String,
    /// Joins consecutive `Question:/Answer:` blocks inside the chat log.
    pub chat_block_separator: String,
    /// Lead the summarizer context with `task_q`.
    pub include_task_q_in_summary: bool,
}

impl Default for PromptTemplateSet {
    fn default() -> Self {
        Self {
            task_q: TASK_Q.to_string(),
            question_instr: QUESTION_INSTR.to_string(),
            task_a: TASK_A.to_string(),
            answer_instr_prefix: ANSWER_INSTR_PREFIX.to_string(),
            answer_instr_suffix: ANSWER_INSTR_SUFFIX.to_string(),
            summarize_instr: SUMMARIZE_INSTR.to_string(),
            first_question: FIRST_QUESTION.to_string(),
            section_separator: DEFAULT_SECTION_SEPARATOR.to_string(),
            chat_block_separator: DEFAULT_BLOCK_SEPARATOR.to_string(),
            include_task_q_in_summary: true,
        }
    }
}

impl PromptTemplateSet {
    /// Loads overrides from a `.json` file, or TOML for any other extension.
    pub fn from_file(path: &Path) -> Result<Self, TemplateError> {
        let text = std::fs::read_to_string(path).map_err(|source| TemplateError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Ok(serde_json::from_str(&text)?)
        } else {
            Ok(toml::from_str(&text)?)
        }
    }

    pub fn chat_log(&self, transcript: &Transcript) -> String {
        render_chat_log_with(transcript, &self.chat_block_separator)
    }

    fn compose(&self, head: Option<&str>, transcript: &Transcript, tail: &str) -> String {
        let log = self.chat_log(transcript);
        let sep = &self.section_separator;
        let mut out = String::with_capacity(head.map_or(0, str::len) + log.len() + tail.len() + 2 * sep.len());
        if let Some(head) = head {
            out.push_str(head);
            out.push_str(sep);
        }
        out.push_str(&log);
        out.push_str(sep);
        out.push_str(tail);
        out
    }

    pub fn build_questioner_context(&self, transcript: &Transcript) -> String {
        self.compose(Some(&self.task_q), transcript, &self.question_instr)
    }

    pub fn answer_instruction(&self, question: &str) -> String {
        format!("{}{}{}", self.answer_instr_prefix, question, self.answer_instr_suffix)
    }

    pub fn build_answerer_context(&self, transcript: &Transcript, question: &str) -> String {
        self.compose(Some(&self.task_a), transcript, &self.answer_instruction(question))
    }

    pub fn build_summarizer_context(&self, transcript: &Transcript) -> String {
        let head = self.include_task_q_in_summary.then_some(self.task_q.as_str());
        self.compose(head, transcript, &self.summarize_instr)
    }
}

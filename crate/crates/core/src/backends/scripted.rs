//! Deterministic scripted backend for tests and offline runs.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::BackendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnExhausted {
    #[default]
    RepeatLast,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedBehavior {
    pub responses: Vec<String>,
    #[serde(default)]
    pub on_exhausted: OnExhausted,
    /// Image refs the scripted answerer reports as unloadable.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unavailable_images: Vec<String>,
}

impl ScriptedBehavior {
    pub fn repeat_last<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            responses: responses.into_iter().map(Into::into).collect(),
            on_exhausted: OnExhausted::RepeatLast,
            unavailable_images: Vec::new(),
        }
    }
}

/// Pops queued responses in order. The cursor sits behind a mutex so a
/// shared handle hands out each response exactly once.
#[derive(Debug)]
pub struct ScriptedBackend {
    behavior: ScriptedBehavior,
    cursor: Mutex<usize>,
}

impl ScriptedBackend {
    pub fn new(behavior: ScriptedBehavior) -> Result<Self, BackendError> {
        if behavior.responses.is_empty() {
            return Err(BackendError::InvalidDescriptor(
                "scripted backend needs at least one response".into(),
            ));
        }
        Ok(Self {
            behavior,
            cursor: Mutex::new(0),
        })
    }

    pub fn next_response(&self) -> Result<String, BackendError> {
        let mut cursor = self.cursor.lock().unwrap_or_else(|e| e.into_inner());
        let responses = &self.behavior.responses;
        if let Some(r) = responses.get(*cursor) {
            *cursor += 1;
            return Ok(r.clone());
        }
        match self.behavior.on_exhausted {
            OnExhausted::RepeatLast => Ok(responses.last().cloned().unwrap_or_default()),
            OnExhausted::Error => Err(BackendError::ScriptExhausted),
        }
    }

    pub fn answer_visual(&self, image_ref: &str) -> Result<String, BackendError> {
        if self.behavior.unavailable_images.iter().any(|i| i == image_ref) {
            return Err(BackendError::ImageUnavailable(image_ref.to_string()));
        }
        self.next_response()
    }

    /// Number of responses handed out so far, capped at the script length.
    pub fn consumed(&self) -> usize {
        *self.cursor.lock().unwrap_or_else(|e| e.into_inner())
    }
}

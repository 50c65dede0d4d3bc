//! Run configuration: file loading, dotted-key overrides and the stable
//! configuration digest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::{Table, Value};

use crate::backends::{BackendDescriptor, BackendError, Role};
use crate::prompts::PromptTemplateSet;

pub const DEFAULT_TOTAL_QUESTIONS: usize = 10;
pub const DEFAULT_MAX_QUESTION_RETRIES: u32 = 2;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid TOML config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid JSON config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config must be a table of settings")]
    NotATable,
    #[error("bad override {key}: {reason}")]
    Override { key: String, reason: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Everything needed to run one captioning dialogue per image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub total_questions: usize,
    pub first_question: String,
    pub questioner: BackendDescriptor,
    pub answerer: BackendDescriptor,
    pub summarizer: BackendDescriptor,
    pub templates: PromptTemplateSet,
    pub max_question_retries: u32,
    pub output_path: PathBuf,
}

/// A `key.path = value` override, applied on top of the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: Value,
}

impl Override {
    /// Parses the value as a TOML literal (`0.7`, `true`, `["a"]`), falling
    /// back to a bare string. `-` in key segments is read as `_`.
    pub fn parse(key: &str, raw: &str) -> Result<Self, ConfigError> {
        let path: Vec<String> = key.split('.').map(|seg| seg.trim().replace('-', "_")).collect();
        if path.iter().any(String::is_empty) {
            return Err(ConfigError::Override {
                key: key.to_string(),
                reason: "empty key segment".into(),
            });
        }
        let value = toml::from_str::<Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        Ok(Self { path, value })
    }

    fn apply(&self, root: &mut Table) -> Result<(), ConfigError> {
        let (last, parents) = self.path.split_last().expect("non-empty path");
        let mut table = root;
        for seg in parents {
            let entry = table.entry(seg.clone()).or_insert_with(|| Value::Table(Table::new()));
            table = entry.as_table_mut().ok_or_else(|| ConfigError::Override {
                key: self.path.join("."),
                reason: format!("`{seg}` is not a table"),
            })?;
        }
        table.insert(last.clone(), self.value.clone());
        Ok(())
    }
}

fn deep_merge(base: &mut Table, overlay: &Table) {
    for (k, v) in overlay {
        match (base.get_mut(k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => deep_merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

fn to_table<T: Serialize>(value: &T) -> Table {
    Table::try_from(value).expect("config types serialize to TOML tables")
}

fn take_table(root: &mut Table, key: &str) -> Result<Table, ConfigError> {
    match root.remove(key) {
        None => Ok(Table::new()),
        Some(Value::Table(t)) => Ok(t),
        Some(_) => Err(ConfigError::Invalid(format!("`{key}` must be a table"))),
    }
}

fn resolve_backend(role: Role, base: Table, user: &Table) -> Result<BackendDescriptor, ConfigError> {
    let mut merged = base;
    deep_merge(&mut merged, user);
    if let Some(given) = merged.get("role").and_then(Value::as_str) {
        if given != role.to_string() {
            return Err(ConfigError::Invalid(format!(
                "section [{role}] declares role {given:?}"
            )));
        }
    }
    merged.insert("role".into(), Value::String(role.to_string()));
    Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Invalid(format!("[{role}]: {}", e.message())))
}

impl RunConfig {
    /// Builds a config from an already-parsed table plus overrides.
    ///
    /// Each backend section is layered over its role defaults. Without a
    /// `[summarizer]` section the summarizer copies the questioner section,
    /// keeping the summarizer's own sampling defaults.
    pub fn from_table(mut root: Table, overrides: &[Override]) -> Result<Self, ConfigError> {
        for o in overrides {
            o.apply(&mut root)?;
        }
        let questioner_user = take_table(&mut root, "questioner")?;
        let answerer_user = take_table(&mut root, "answerer")?;
        let summarizer_user = take_table(&mut root, "summarizer")?;
        let templates_user = take_table(&mut root, "templates")?;

        let questioner = resolve_backend(
            Role::Questioner,
            to_table(&BackendDescriptor::defaults_for(Role::Questioner)),
            &questioner_user,
        )?;
        let answerer = resolve_backend(
            Role::Answerer,
            to_table(&BackendDescriptor::defaults_for(Role::Answerer)),
            &answerer_user,
        )?;
        let mut summarizer_base = to_table(&BackendDescriptor::defaults_for(Role::Summarizer));
        let kind_changes = summarizer_user
            .get("kind")
            .and_then(Value::as_str)
            .is_some_and(|k| k != questioner.kind.to_string());
        if !kind_changes {
            let mut inherited = questioner_user.clone();
            for sampling in ["temperature", "max_tokens", "role"] {
                inherited.remove(sampling);
            }
            deep_merge(&mut summarizer_base, &inherited);
        }
        let summarizer = resolve_backend(Role::Summarizer, summarizer_base, &summarizer_user)?;

        let templates: PromptTemplateSet = Value::Table(templates_user)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Invalid(format!("[templates]: {}", e.message())))?;

        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Top {
            total_questions: Option<usize>,
            first_question: Option<String>,
            max_question_retries: Option<u32>,
            output_path: Option<PathBuf>,
        }
        let top: Top = Value::Table(root)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Invalid(e.message().to_string()))?;

        let config = RunConfig {
            total_questions: top.total_questions.unwrap_or(DEFAULT_TOTAL_QUESTIONS),
            first_question: top.first_question.unwrap_or_else(|| templates.first_question.clone()),
            questioner,
            answerer,
            summarizer,
            templates,
            max_question_retries: top.max_question_retries.unwrap_or(DEFAULT_MAX_QUESTION_RETRIES),
            output_path: top.output_path.unwrap_or_else(|| PathBuf::from("transcripts.jsonl")),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_str(text: &str, overrides: &[Override]) -> Result<Self, ConfigError> {
        Self::from_table(toml::from_str(text)?, overrides)
    }

    pub fn from_json_str(text: &str, overrides: &[Override]) -> Result<Self, ConfigError> {
        let json: serde_json::Value = serde_json::from_str(text)?;
        let root = Table::try_from(json).map_err(|_| ConfigError::NotATable)?;
        Self::from_table(root, overrides)
    }

    /// Reads TOML, or JSON when the file extension is `.json`.
    pub fn load(path: &Path, overrides: &[Override]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text, overrides)
        } else {
            Self::from_toml_str(&text, overrides)
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.total_questions < 1 {
            return Err(ConfigError::Invalid("total_questions must be at least 1".into()));
        }
        if self.first_question.trim().is_empty() {
            return Err(ConfigError::Invalid("first_question must not be empty".into()));
        }
        for (role, d) in [
            (Role::Questioner, &self.questioner),
            (Role::Answerer, &self.answerer),
            (Role::Summarizer, &self.summarizer),
        ] {
            if d.role != role {
                return Err(ConfigError::Invalid(format!("{role} descriptor has role {}", d.role)));
            }
            d.validate()?;
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON of everything that affects dialogue
    /// content. `output_path` is excluded. API keys never live in the config.
    pub fn digest(&self) -> String {
        let mut value = serde_json::to_value(self).expect("RunConfig serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("output_path");
        }
        let canonical = canonical_json(&value);
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// JSON with object keys sorted at every level.
fn canonical_json(value: &serde_json::Value) -> String {
    use serde_json::Value as J;
    match value {
        J::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let inner: Vec<String> = keys
                .into_iter()
                .map(|k| format!("{}:{}", J::String(k.clone()), canonical_json(&map[k])))
                .collect();
            format!("{{{}}}", inner.join(","))
        }
        J::Array(items) => {
            let inner: Vec<String> = items.iter().map(canonical_json).collect();
            format!("[{}]", inner.join(","))
        }
        other => other.to_string(),
    }
}

//! One captioning dialogue per image: hard-coded first question, N-1
//! questioner turns, a summary, and JSONL persistence.

mod config;
mod run;
mod store;

pub use config::{ConfigError, Override, RunConfig, DEFAULT_MAX_QUESTION_RETRIES, DEFAULT_TOTAL_QUESTIONS};
pub use run::{
    run_batch, run_caption_dialogue, run_dialogue, AbortCause, BatchReport, Clock, DialogueBackends, PipelineError,
};
pub use store::{
    load_transcripts, manifest_path_for, parse_line, read_lines, BatchFailure, OrderedWriter, RunManifest, StoreError,
    TranscriptWriter,
};

//! The dialogue loop and batch execution.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use thiserror::Error;

use super::config::RunConfig;
use super::store::{BatchFailure, OrderedWriter, StoreError, TranscriptWriter};
use crate::backends::{Backend, BackendError, TextBackend, VisionBackend};
use crate::dialogue::{trim_answer, trim_question, Transcript, Turn};

/// Source of `created_at` timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    System,
    Fixed(DateTime<Utc>),
}

impl Clock {
    /// Zeroed timestamps for byte-reproducible output.
    pub fn deterministic() -> Self {
        Clock::Fixed(DateTime::<Utc>::UNIX_EPOCH)
    }

    pub fn now(&self) -> DateTime<Utc> {
        match self {
            Clock::System => Utc::now(),
            Clock::Fixed(t) => *t,
        }
    }
}

#[derive(Debug, Error)]
pub enum AbortCause {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("questioner produced no usable question in {attempts} attempts")]
    EmptyQuestion { attempts: u32 },
    #[error("answerer produced no usable answer in {attempts} attempts")]
    EmptyAnswer { attempts: u32 },
    #[error("summarizer returned an empty caption")]
    EmptyCaption,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot start dialogue: {0}")]
    Connect(#[source] BackendError),
    /// `partial` holds whatever turns were completed; its caption is `None`.
    #[error("dialogue aborted at turn {turn}: {cause}")]
    DialogueAborted {
        turn: usize,
        cause: AbortCause,
        partial: Box<Transcript>,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl PipelineError {
    pub fn turn(&self) -> Option<usize> {
        match self {
            PipelineError::DialogueAborted { turn, .. } => Some(*turn),
            _ => None,
        }
    }

    /// Partial transcript worth persisting: at least one answered turn.
    fn persistable(&self) -> Option<&Transcript> {
        match self {
            PipelineError::DialogueAborted { partial, .. } if partial.completed_turns().next().is_some() => {
                Some(partial)
            }
            _ => None,
        }
    }
}

/// Live handles for one dialogue.
pub struct DialogueBackends {
    pub questioner: Box<dyn TextBackend>,
    pub answerer: Box<dyn VisionBackend>,
    pub summarizer: Box<dyn TextBackend>,
}

impl DialogueBackends {
    /// Fresh handles from the config's descriptors. Scripted backends start
    /// at the head of their script every time.
    pub fn connect(config: &RunConfig) -> Result<Self, BackendError> {
        Ok(Self {
            questioner: Box::new(Backend::connect(&config.questioner)?),
            answerer: Box::new(Backend::connect(&config.answerer)?),
            summarizer: Box::new(Backend::connect(&config.summarizer)?),
        })
    }
}

struct Dialogue<'a> {
    config: &'a RunConfig,
    backends: &'a DialogueBackends,
    transcript: Transcript,
}

impl Dialogue<'_> {
    fn ask_question(&self) -> Result<(String, String), AbortCause> {
        let ctx = self.config.templates.build_questioner_context(&self.transcript);
        let attempts = self.config.max_question_retries + 1;
        for _ in 0..attempts {
            let raw = self.backends.questioner.complete_text(&ctx)?;
            match trim_question(&raw) {
                Ok(q) => return Ok((q, raw)),
                Err(_) => log::warn!(
                    "{}: empty question after trimming, re-asking",
                    self.transcript.image_ref
                ),
            }
        }
        Err(AbortCause::EmptyQuestion { attempts })
    }

    fn answer(&self, question: &str) -> Result<(String, String), AbortCause> {
        let ctx = self.config.templates.build_answerer_context(&self.transcript, question);
        let attempts = self.config.max_question_retries + 1;
        for _ in 0..attempts {
            let raw = self.backends.answerer.answer_visual(&self.transcript.image_ref, &ctx)?;
            match trim_answer(&raw) {
                Ok(a) => return Ok((a, raw)),
                Err(_) => log::warn!("{}: empty answer after trimming, re-asking", self.transcript.image_ref),
            }
        }
        Err(AbortCause::EmptyAnswer { attempts })
    }

    fn run_turn(&mut self, index: usize) -> Result<(), AbortCause> {
        let (question, raw_question) = if index == 1 {
            let q = self.config.first_question.clone();
            (q.clone(), q)
        } else {
            self.ask_question()?
        };
        self.transcript.turns.push(Turn::pending(index, question, raw_question));
        let question = &self.transcript.turns[index - 1].question;
        let (answer, raw_answer) = self.answer(question)?;
        let turn = &mut self.transcript.turns[index - 1];
        turn.answer = answer;
        turn.raw_answer = raw_answer;
        Ok(())
    }

    fn summarize(&self) -> Result<String, AbortCause> {
        let ctx = self.config.templates.build_summarizer_context(&self.transcript);
        let caption = self.backends.summarizer.complete_text(&ctx)?.trim().to_string();
        if caption.is_empty() {
            Err(AbortCause::EmptyCaption)
        } else {
            Ok(caption)
        }
    }

    fn run(mut self) -> Result<Transcript, PipelineError> {
        let total = self.config.total_questions;
        for index in 1..=total {
            if let Err(cause) = self.run_turn(index) {
                return Err(self.abort(index, cause));
            }
        }
        match self.summarize() {
            Ok(caption) => {
                self.transcript.caption = Some(caption);
                Ok(self.transcript)
            }
            Err(cause) => Err(self.abort(total + 1, cause)),
        }
    }

    fn abort(self, turn: usize, cause: AbortCause) -> PipelineError {
        PipelineError::DialogueAborted {
            turn,
            cause,
            partial: Box::new(self.transcript),
        }
    }
}

/// Runs one dialogue against the given handles without persisting it.
///
/// Turn 1 asks `config.first_question` verbatim; turns 2..=N ask questioner
/// output after trimming; every answer is trimmed; the summary becomes the
/// caption.
pub fn run_dialogue(
    image_ref: &str,
    config: &RunConfig,
    backends: &DialogueBackends,
    clock: Clock,
) -> Result<Transcript, PipelineError> {
    let mut transcript = Transcript::new(image_ref, clock.now());
    transcript.questioner_id = config.questioner.id();
    transcript.answerer_id = config.answerer.id();
    transcript.summarizer_id = config.summarizer.id();
    transcript.config_digest = config.digest();
    Dialogue {
        config,
        backends,
        transcript,
    }
    .run()
}

/// Runs a dialogue with freshly connected backends and appends the result
/// (or the partial transcript of an aborted run) to `config.output_path`.
pub fn run_caption_dialogue(image_ref: &str, config: &RunConfig) -> Result<Transcript, PipelineError> {
    let writer = TranscriptWriter::append_to(&config.output_path)?;
    let backends = DialogueBackends::connect(config).map_err(PipelineError::Connect)?;
    let result = run_dialogue(image_ref, config, &backends, Clock::System);
    match &result {
        Ok(t) => writer.append(t)?,
        Err(e) => {
            if let Some(partial) = e.persistable() {
                writer.append(partial)?;
            }
        }
    }
    result
}

#[derive(Debug, Default)]
pub struct BatchReport {
    /// Completed transcripts in input order.
    pub transcripts: Vec<Transcript>,
    pub failures: Vec<BatchFailure>,
}

impl BatchReport {
    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs one dialogue per image with at most `parallelism` in flight.
///
/// Results reach `writer` in input order. Per-image failures are collected
/// in the report; only storage errors abort the batch.
pub fn run_batch<F>(
    image_refs: &[String],
    config: &RunConfig,
    parallelism: usize,
    clock: Clock,
    writer: &TranscriptWriter,
    connect: F,
) -> Result<BatchReport, StoreError>
where
    F: Fn(&RunConfig) -> Result<DialogueBackends, BackendError> + Sync,
{
    let parallelism = parallelism.max(1).min(image_refs.len().max(1));
    let ordered = OrderedWriter::new(writer);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Transcript, PipelineError>>>> =
        Mutex::new((0..image_refs.len()).map(|_| None).collect());
    let store_error: Mutex<Option<StoreError>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..parallelism {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                let Some(image_ref) = image_refs.get(index) else { break };
                if store_error.lock().unwrap().is_some() {
                    break;
                }
                let result = connect(config)
                    .map_err(PipelineError::Connect)
                    .and_then(|backends| run_dialogue(image_ref, config, &backends, clock));
                let to_write = match &result {
                    Ok(t) => Some(t.clone()),
                    Err(e) => e.persistable().cloned(),
                };
                if let Err(e) = ordered.submit(index, to_write) {
                    store_error.lock().unwrap().get_or_insert(e);
                    break;
                }
                results.lock().unwrap()[index] = Some(result);
            });
        }
    });

    if let Some(e) = store_error.into_inner().unwrap() {
        return Err(e);
    }
    let mut report = BatchReport::default();
    for (index, result) in results.into_inner().unwrap().into_iter().enumerate() {
        match result.expect("every image processed") {
            Ok(t) => report.transcripts.push(t),
            Err(e) => report.failures.push(BatchFailure {
                index,
                image_ref: image_refs[index].clone(),
                turn: e.turn(),
                persisted: e.persistable().is_some(),
                error: e.to_string(),
            }),
        }
    }
    Ok(report)
}

//! Multi-turn image captioning by dialogue: a language model asks questions
//! about an image, a visual question answering model answers them, and the
//! exchange is summarized into a caption. Also ships the evaluation metrics
//! used to judge such dialogues.

pub mod backends;
pub mod dialogue;
pub mod eval;
pub mod pipeline;
pub mod prompts;

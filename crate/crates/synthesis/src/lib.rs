//! Dataset synthesis pipeline: instruction generation, corrective grounding,
//! human review, augmentation and dataset assembly.
//!
//! Every stage talks to the model through [`roboground_llm::ChatClient`], so a
//! run can go to a live endpoint, replay recorded transcripts, or use the
//! offline [`scripted::ScriptedClient`].

pub mod augment;
pub mod dataset;
pub mod grounding;
pub mod instructions;
pub mod jsonl;
pub mod manifest;
pub mod policy;
pub mod prompts;
pub mod review;
pub mod scripted;

use roboground_llm::ClientError;
use thiserror::Error;

pub use augment::{augment, AugmentConfig, AugmentationRecord, AugmentationStatus};
pub use dataset::{build_dataset, DatasetConfig, DatasetOutput, DatasetRow, SplitStrategy};
pub use grounding::{ground_all, Grounder, GroundingConfig, GroundingResult, GroundingStatus};
pub use instructions::{generate_all, generate_instructions, GenerationConfig, InstructionOutput, InstructionRecord, Rejection};
pub use manifest::RunManifest;
pub use prompts::{default_profiles, ComplexityClass, PromptProfile};
pub use review::{export_review, import_review, ReviewItem, ReviewOutcome};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("{origin}: {} malformed record(s):\n  {}", problems.len(), problems.join("\n  "))]
    Schema { origin: String, problems: Vec<String> },
    #[error("review file rejected:\n  {}", .0.join("\n  "))]
    Review(Vec<String>),
    #[error("invalid configuration: {0}")]
    Config(String),
}

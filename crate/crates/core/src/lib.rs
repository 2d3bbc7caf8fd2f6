//! Paraphrase candidate generation and selection.
//!
//! Candidates are produced by direct same-language decoding and by round-trip
//! translation through a pool of pivot languages ([`translator`]). They are then
//! passed through a four-stage cascade ([`pipeline`]): overlap removal, diversity
//! selection by word error rate, fluency selection by perplexity, and a final
//! semantic argmax by greedy token matching. [`evalkit`] scores a system's outputs
//! at corpus level and [`augment`] turns the cascade into a data augmentation tool
//! for labeled classification sets.
//!
//! Every comparison is made on lowercased, whitespace-collapsed text
//! ([`textkit::normalize`]).

pub mod augment;
pub mod constraints;
mod error;
pub mod evalkit;
pub mod metrics;
pub mod pipeline;
pub mod scorers;
pub mod textkit;
pub mod transport;
pub mod translator;

pub use error::{CallLeg, Error, ErrorPolicy, Result};

pub use augment::{AugmentConfig, AugmentedDataset, Augmenter, LabeledExample};
pub use constraints::{ConstraintConfig, ConstraintReport};
pub use evalkit::{EvalRecord, EvalReport};
pub use metrics::{BleuScore, SemanticScore, WerScore};
pub use pipeline::{ParaphraseResult, PipelineConfig, Scorers, SelectionTrace};
pub use scorers::{FluencyScore, IdfTable, NGramLanguageModel, ScorerEndpoint};
pub use textkit::{normalize, tokenize, NormalizedText, TokenSeq};
pub use translator::{Candidate, CandidateSet, GenerationConfig, Lang, Origin, Translator};

//! Generation, profiling and comparison of competency-question sets.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`corpus`]: specs, CQ sets and their line-delimited files
//! * [`genharness`] and [`llm`]: prompting providers and parsing their replies
//! * [`readability`], [`annotation`], [`complexity`], [`relevance`]: per-CQ features
//! * [`embedding`] and [`setmetrics`]: vector-space diversity and overlap
//! * [`report`]: aggregation and table rendering
//!
//! Statistical NLP (parsing, sentence encoders) is not done here. Parses
//! arrive as annotation files and vectors as vector files or over `/embed`.

pub mod annotation;
pub mod complexity;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod genharness;
pub mod judge;
pub mod llm;
pub mod readability;
pub mod relevance;
pub mod report;
pub mod setmetrics;

pub use annotation::{Annotation, Token, TreeViolation};
pub use complexity::{ComplexityProfile, Interrogative, RequirementPrimitives};
pub use corpus::{CompetencyQuestion, CqSet, DecodingParams, RequirementSpec, SpecKind};
pub use embedding::{EmbeddingProvider, EmbeddingSet};
pub use error::{Error, Result};
pub use genharness::GenerationRecord;
pub use judge::{Judge, ResponseCache};
pub use llm::{LlmClient, ProviderConfig, WireFormat};
pub use readability::{ReadabilityScores, TokenStats};
pub use relevance::RelevanceRating;
pub use report::{AggregateRow, FeatureVector, Provenance};
pub use setmetrics::{DiversityReport, MeanStd, PairwiseReport};

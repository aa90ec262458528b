//! Contention: how likely two people drawn from a population are to hold
//! conflicting stances on a topic.
//!
//! The crate covers the stance model and its exact, closed-form and sampled
//! evaluations ([`contention`]), sub-population selection ([`filter`]),
//! readers for polls, vote records and hashtag-tagged tweet streams
//! ([`ingest`]), and the derived time-series, regional and
//! contention-by-importance views ([`analytics`], [`output`]).

pub mod analytics;
pub mod contention;
pub mod error;
pub mod filter;
pub mod ingest;
pub mod model;
pub mod output;

pub use contention::{
    contention_exclusive, contention_exclusive_with, contention_general, contention_general_with,
    contention_sampled, contention_sampled_with, max_contention, normalize, ContentionResult, Method,
    Normalization,
};
pub use error::{AnalyticsError, IngestError, ModelError};
pub use filter::{Restrict, SubpopulationFilter};
pub use model::{AssignmentSet, Stance, StanceCounts, StanceSpace, NO_STANCE, NO_STANCE_ID};

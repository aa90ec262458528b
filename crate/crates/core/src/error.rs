use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("contention is undefined for an empty population")]
    EmptyPopulation,
    #[error("stance space is not mutually exclusive; use the general model")]
    NonExclusiveSpace,
    #[error("duplicate stance id {0:?}")]
    DuplicateStanceId(String),
    #[error("stance id {0:?} is reserved")]
    ReservedStanceId(String),
    #[error("conflict matrix must be {expected}x{expected}")]
    ConflictMatrixShape { expected: usize },
    #[error("conflict relation is not symmetric at ({a}, {b})")]
    AsymmetricConflicts { a: usize, b: usize },
    #[error("stance {0} cannot conflict with itself")]
    SelfConflict(usize),
    #[error("the no-stance sentinel cannot conflict with stance {0}")]
    NoStanceConflict(usize),
    #[error("stance index {index} out of range for k = {k}")]
    StanceIndexOutOfRange { index: usize, k: usize },
    #[error("expected {expected} counts, got {got}")]
    CountsLength { expected: usize, got: usize },
    #[error("no-stance cannot be held together with an explicit stance")]
    NoStanceNotAlone,
    #[error("counts belong to different stance spaces")]
    SpaceMismatch,
    #[error("sample count must be positive")]
    ZeroSamples,
    #[error("unknown filter attribute {0:?}")]
    UnknownAttribute(String),
    #[error("unknown stance {0:?} in filter")]
    UnknownStance(String),
}

impl ModelError {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelError::EmptyPopulation => "EmptyPopulation",
            ModelError::NonExclusiveSpace => "NonExclusiveSpace",
            ModelError::DuplicateStanceId(_) => "DuplicateStanceId",
            ModelError::ReservedStanceId(_) => "ReservedStanceId",
            ModelError::ConflictMatrixShape { .. } => "ConflictMatrixShape",
            ModelError::AsymmetricConflicts { .. } => "AsymmetricConflicts",
            ModelError::SelfConflict(_) => "SelfConflict",
            ModelError::NoStanceConflict(_) => "NoStanceConflict",
            ModelError::StanceIndexOutOfRange { .. } => "StanceIndexOutOfRange",
            ModelError::CountsLength { .. } => "CountsLength",
            ModelError::NoStanceNotAlone => "NoStanceNotAlone",
            ModelError::SpaceMismatch => "SpaceMismatch",
            ModelError::ZeroSamples => "ZeroSamples",
            ModelError::UnknownAttribute(_) => "UnknownAttribute",
            ModelError::UnknownStance(_) => "UnknownStance",
        }
    }
}

/// Failures while reading input files.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("input has no data rows")]
    EmptyInput,
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: negative count {value}")]
    NegativeCount { line: u64, value: String },
    #[error("line {line}: duplicate row for {key}")]
    DuplicateStanceRow { line: u64, key: String },
    #[error("percentages for topic {topic:?} need a respondent total")]
    MissingTotal { topic: String },
    #[error("missing required column {0:?}")]
    MissingColumn(String),
    #[error("region {region:?}: eligible population {eligible} is below ballots cast {cast}")]
    EligibleLessThanVotes { region: String, eligible: u64, cast: u64 },
    #[error("region {0:?} has no eligible-population row")]
    MissingEligible(String),
    #[error("region id {0:?} is reserved")]
    ReservedRegion(String),
    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),
    #[error("{date}: day total {total} is below {tagged} stance-tagged records")]
    TotalLessThanStanceCounts {
        date: chrono::NaiveDate,
        total: u64,
        tagged: u64,
    },
    #[error("unparseable timestamp {0:?}")]
    UnparseableTimestamp(String),
    #[error("tweet {id:?} matches hashtags of several stances")]
    AmbiguousTweet { id: String },
    #[error("{errors} of {lines} lines failed to parse, over the {budget} error budget (first: {first})")]
    ParseBudgetExceeded {
        errors: u64,
        lines: u64,
        budget: f64,
        first: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl IngestError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            IngestError::Io { .. } => "Io",
            IngestError::EmptyInput => "EmptyInput",
            IngestError::MalformedRow { .. } => "MalformedRow",
            IngestError::NegativeCount { .. } => "NegativeCount",
            IngestError::DuplicateStanceRow { .. } => "DuplicateStanceRow",
            IngestError::MissingTotal { .. } => "MissingTotal",
            IngestError::MissingColumn(c) if c == "importance" => "MissingImportance",
            IngestError::MissingColumn(_) => "MissingColumn",
            IngestError::EligibleLessThanVotes { .. } => "EligibleLessThanVotes",
            IngestError::MissingEligible(_) => "MissingEligible",
            IngestError::ReservedRegion(_) => "ReservedRegion",
            IngestError::InvalidLexicon(_) => "InvalidLexicon",
            IngestError::TotalLessThanStanceCounts { .. } => "TotalLessThanStanceCounts",
            IngestError::UnparseableTimestamp(_) => "UnparseableTimestamp",
            IngestError::AmbiguousTweet { .. } => "AmbiguousTweet",
            IngestError::ParseBudgetExceeded { .. } => "ParseBudgetExceeded",
            IngestError::Model(e) => e.kind(),
            IngestError::Csv(_) => "Csv",
            IngestError::Json(_) => "Json",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("eligible population {eligible} is below ballots cast {cast}")]
    EligibleLessThanVotes { eligible: u64, cast: u64 },
    #[error("topic {0:?} has no importance rating")]
    MissingImportance(String),
    #[error("topic {topic:?}: importance {value} outside declared scale [{min}, {max}]")]
    ImportanceOutOfDeclaredRange { topic: String, value: f64, min: f64, max: f64 },
    #[error("invalid importance scale [{min}, {max}]")]
    InvalidScale { min: f64, max: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl AnalyticsError {
    pub fn kind(&self) -> &'static str {
        match self {
            AnalyticsError::EligibleLessThanVotes { .. } => "EligibleLessThanVotes",
            AnalyticsError::MissingImportance(_) => "MissingImportance",
            AnalyticsError::ImportanceOutOfDeclaredRange { .. } => "ImportanceOutOfDeclaredRange",
            AnalyticsError::InvalidScale { .. } => "InvalidScale",
            AnalyticsError::Model(e) => e.kind(),
        }
    }
}

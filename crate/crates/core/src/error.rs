use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corrupt or unreadable gzip stream in {path}: {source}")]
    Gzip {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed table {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("missing fixture {what}: {path} does not exist")]
    MissingFixture { what: String, path: PathBuf },

    #[error("unknown dataset {0:?} (expected one of rs-dfo, mig-mg, aut-can)")]
    UnknownDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("gold standard {0:?} has no terms")]
    EmptyGold(String),

    #[error("term {term:?} is not a bridging candidate: absent from domain {domain}")]
    NotACandidate { term: String, domain: String },

    #[error("vocabulary does not match corpus/config: {0}")]
    VocabularyMismatch(String),

    #[error("matrix is already TF-IDF weighted")]
    AlreadyWeighted,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("data is rank deficient: {0}")]
    RankDeficient(String),

    #[error("k = {k} is invalid for {points} points")]
    InvalidK { k: usize, points: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("key {0:?} not present in ranking")]
    UnknownKey(String),

    #[error("node {0:?} not present in network")]
    UnknownNode(String),

    #[error("proximity of a node with itself is undefined ({0:?})")]
    SelfPair(String),

    #[error("need {needed} negative pairs but only {available} exist")]
    InsufficientNegatives { needed: usize, available: usize },

    #[error("ROC/AUC undefined: {0}")]
    Roc(String),

    #[error("choice {term:?} is not in the {stage} ranking{}", suggestions_suffix(.suggestions))]
    UnknownChoice {
        stage: String,
        term: String,
        suggestions: Vec<String>,
    },

    #[error("choice file {path}: {message}")]
    ChoiceFile { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn suggestions_suffix(suggestions: &[String]) -> String {
    if suggestions.is_empty() {
        String::new()
    } else {
        format!("; did you mean {}?", suggestions.join(", "))
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

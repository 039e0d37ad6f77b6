//! Versioned resource files compiled into the library.

use crate::corpus::BenchmarkDataset;

pub const STOPWORDS_EN: &str = include_str!("../resources/stopwords_en.txt");
pub const LEMMA_EXCEPTIONS: &str = include_str!("../resources/lemma_exceptions.txt");
pub const SEMANTIC_TYPES: &str = include_str!("../resources/semantic_types.psv");
pub const MIG_MG_B_CONCEPTS: &str = include_str!("../resources/replay/mig-mg.bconcepts.txt");
pub const AUT_CAN_RAJOLINK_REPLAY: &str = include_str!("../resources/replay/aut-can.rajolink.txt");

pub fn gold_terms(dataset: BenchmarkDataset) -> &'static str {
    match dataset {
        BenchmarkDataset::RsDfo => include_str!("../resources/gold/rs-dfo.gold.txt"),
        BenchmarkDataset::MigMg => include_str!("../resources/gold/mig-mg.gold.txt"),
        BenchmarkDataset::AutCan => include_str!("../resources/gold/aut-can.gold.txt"),
    }
}

/// Non-empty lines that are not `#` comments.
pub fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

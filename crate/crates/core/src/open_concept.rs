//! Concept-based open discovery over MeSH headings.
//!
//! Only the C domain is fixed. Its headings are filtered by semantic type and
//! ranked by TF-IDF (documents read as heading lists); an expert picks
//! b-concepts, each is expanded through its own literature snapshot, and the
//! a-concepts shared by every expansion are rank-aggregated.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, CorpusMeta, Document, PsvSchema};
use crate::error::{Error, Result};
use crate::evalkit::{self, AggregationMethod};
use crate::ranking::RankedList;
use crate::resources;
use crate::textprep::{Normalizer, QueryWordFilter, TermBag};
use crate::util;
use crate::vectorspace::{self, WeightedMatrix};

/// MeSH heading to semantic categories.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticTypeMap {
    pub heading_to_types: BTreeMap<String, BTreeSet<String>>,
}

impl SemanticTypeMap {
    /// Parses `heading|type;type` lines after a `heading|types` header.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = resources::content_lines(text);
        match lines.next() {
            Some(h) if h.replace(' ', "").eq_ignore_ascii_case("heading|types") => {}
            other => {
                return Err(Error::Format {
                    path: path.into(),
                    message: format!("expected header heading|types, found {other:?}"),
                })
            }
        }
        let mut map = SemanticTypeMap::default();
        for line in lines {
            let Some((heading, types)) = line.split_once('|') else {
                return Err(Error::Format {
                    path: path.into(),
                    message: format!("line without '|': {line:?}"),
                });
            };
            let entry = map.heading_to_types.entry(heading.trim().to_owned()).or_default();
            entry.extend(
                types
                    .split(';')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(str::to_owned),
            );
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        util::require_fixture(path, "semantic type table")?;
        Self::parse(&util::read_text(path)?, path)
    }

    pub fn builtin() -> Self {
        Self::parse(resources::SEMANTIC_TYPES, Path::new("<builtin semantic_types.psv>"))
            .expect("builtin semantic type table is well formed")
    }

    pub fn types_of(&self, heading: &str) -> Option<&BTreeSet<String>> {
        self.heading_to_types.get(heading)
    }

    pub fn all_types(&self) -> BTreeSet<&str> {
        self.heading_to_types
            .values()
            .flatten()
            .map(String::as_str)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticTypeFilter {
    pub allowed_types: BTreeSet<String>,
    pub heading_to_types: SemanticTypeMap,
}

impl SemanticTypeFilter {
    /// Logs a warning for every allowed type that no heading carries.
    pub fn new<S: AsRef<str>>(allowed: impl IntoIterator<Item = S>, map: SemanticTypeMap) -> Self {
        let f = SemanticTypeFilter {
            allowed_types: allowed.into_iter().map(|s| s.as_ref().to_owned()).collect(),
            heading_to_types: map,
        };
        for t in f.unknown_types() {
            log::warn!("semantic type {t:?} is not assigned to any heading in the mapping");
        }
        f
    }

    /// Allowed types that never occur in the mapping.
    pub fn unknown_types(&self) -> Vec<String> {
        let known = self.heading_to_types.all_types();
        self.allowed_types
            .iter()
            .filter(|t| !known.contains(t.as_str()))
            .cloned()
            .collect()
    }

    /// `None` when the heading is unmapped.
    pub fn allows(&self, heading: &str) -> Option<bool> {
        self.heading_to_types
            .types_of(heading)
            .map(|ts| ts.iter().any(|t| self.allowed_types.contains(t)))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredHeadings {
    pub kept: BTreeSet<String>,
    /// Headings missing from the mapping, dropped.
    pub unmapped: BTreeSet<String>,
}

/// Per-heading document frequencies.
pub fn collect_headings<'a>(
    docs: impl IntoIterator<Item = &'a Document>,
) -> Result<BTreeMap<String, u32>> {
    let mut df: BTreeMap<String, u32> = BTreeMap::new();
    for d in docs {
        let unique: BTreeSet<&str> = d.mesh_headings.iter().map(String::as_str).collect();
        for h in unique {
            *df.entry(h.to_owned()).or_default() += 1;
        }
    }
    if df.is_empty() {
        return Err(Error::Empty(
            "no document carries MeSH headings; concept-based discovery is inapplicable".into(),
        ));
    }
    Ok(df)
}

pub fn filter_semantic_types<'a>(
    headings: impl IntoIterator<Item = &'a str>,
    filter: &SemanticTypeFilter,
) -> FilteredHeadings {
    let mut out = FilteredHeadings::default();
    for h in headings {
        match filter.allows(h) {
            Some(true) => {
                out.kept.insert(h.to_owned());
            }
            Some(false) => {}
            None => {
                out.unmapped.insert(h.to_owned());
            }
        }
    }
    if !out.unmapped.is_empty() {
        log::warn!(
            "{} headings have no semantic type mapping and were dropped",
            out.unmapped.len()
        );
    }
    out
}

/// Count matrix of documents read as heading lists.
pub fn heading_matrix(docs: &[Document]) -> Result<WeightedMatrix> {
    let bags: Vec<TermBag> = docs
        .iter()
        .map(|d| d.mesh_headings.iter().map(|h| (h.clone(), 1)).collect())
        .collect();
    WeightedMatrix::from_bags(docs.iter().map(|d| d.id.clone()).collect(), &bags)
}

/// Headings scored by aggregated TF-IDF over `docs`; unseen headings score 0.
pub fn rank_b_concepts(headings: &BTreeSet<String>, docs: &[Document]) -> Result<RankedList> {
    if headings.is_empty() {
        return Ok(RankedList::empty());
    }
    let scores = vectorspace::aggregated_tfidf(&heading_matrix(docs)?)?;
    Ok(RankedList::descending(
        headings
            .iter()
            .map(|h| (h.clone(), scores.get(h).copied().unwrap_or(0.0))),
    ))
}

/// Headings that name the C domain itself, e.g. "Migraine Disorders" for the
/// query "migraine".
pub fn query_headings<'a>(
    headings: impl IntoIterator<Item = &'a str>,
    meta: &CorpusMeta,
    normalizer: &Normalizer,
) -> BTreeSet<String> {
    let q = QueryWordFilter::new(meta.query_terms_c.iter().map(String::as_str), normalizer);
    headings
        .into_iter()
        .filter(|h| q.excludes(&normalizer.normalize_phrase(h)))
        .map(str::to_owned)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BConceptExpansion {
    pub b_concept: String,
    pub documents: Vec<Document>,
    pub a_headings: BTreeSet<String>,
    /// The a-headings ranked by TF-IDF over this expansion's documents.
    pub ranking: RankedList,
}

pub fn expand_b_concept(
    b_concept: &str,
    documents: Vec<Document>,
    filter: &SemanticTypeFilter,
    excluded: &BTreeSet<String>,
) -> Result<BConceptExpansion> {
    let present: BTreeSet<&str> = documents
        .iter()
        .flat_map(|d| d.mesh_headings.iter().map(String::as_str))
        .collect();
    let mut a_headings = filter_semantic_types(present, filter).kept;
    a_headings.retain(|h| h != b_concept && !excluded.contains(h));
    let ranking = rank_b_concepts(&a_headings, &documents)?;
    Ok(BConceptExpansion {
        b_concept: b_concept.to_owned(),
        documents,
        a_headings,
        ranking,
    })
}

/// Snapshot path of a second-level literature: `<dir>/<slug>.psv.gz`.
pub fn expansion_path(dir: &Path, b_concept: &str) -> PathBuf {
    dir.join(format!("{}.psv.gz", util::slug(b_concept)))
}

/// Loads the b-concept's snapshot and expands it. Rows are read as domain-A
/// documents of `meta`.
pub fn expand_b_concept_file(
    b_concept: &str,
    dir: &Path,
    meta: &CorpusMeta,
    filter: &SemanticTypeFilter,
    excluded: &BTreeSet<String>,
) -> Result<BConceptExpansion> {
    let path = expansion_path(dir, b_concept);
    util::require_fixture(&path, &format!("second-level snapshot for {b_concept:?}"))?;
    let (c, report) = corpus::load_psv(&path, &PsvSchema::default(), meta.clone())?;
    if !report.rejections.is_empty() {
        log::warn!("{}: {} rows rejected", path.display(), report.rejections.len());
    }
    expand_b_concept(b_concept, c.documents, filter, excluded)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregation {
    pub ranked: RankedList,
    /// Set when the list is empty.
    pub note: Option<String>,
}

/// Borda aggregation of the a-concepts every expansion shares.
pub fn intersect_and_aggregate(expansions: &[BConceptExpansion]) -> Result<Aggregation> {
    if expansions.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "intersection needs at least 2 expansions, got {}",
            expansions.len()
        )));
    }
    let mut common = expansions[0].a_headings.clone();
    for e in &expansions[1..] {
        common.retain(|h| e.a_headings.contains(h));
    }
    if common.is_empty() {
        let names: Vec<&str> = expansions.iter().map(|e| e.b_concept.as_str()).collect();
        return Ok(Aggregation {
            ranked: RankedList::empty(),
            note: Some(format!("no a-concept is shared by all of {}", names.join(", "))),
        });
    }
    let lists: Vec<RankedList> = expansions
        .iter()
        .map(|e| e.ranking.retain(|k| common.contains(k)))
        .collect();
    Ok(Aggregation {
        ranked: evalkit::rank_aggregate(&lists, AggregationMethod::Borda)?,
        note: None,
    })
}

/// Number of C-domain documents indexed with heading `a`.
pub fn novelty_check<'a>(a: &str, c_docs: impl IntoIterator<Item = &'a Document>) -> usize {
    c_docs
        .into_iter()
        .filter(|d| d.mesh_headings.iter().any(|h| h == a))
        .count()
}

/// One heading per line; blank lines and `#` comments are skipped.
pub fn parse_choice_file(text: &str) -> Vec<String> {
    resources::content_lines(text).map(str::to_owned).collect()
}

pub fn read_choice_file(path: &Path) -> Result<Vec<String>> {
    util::require_fixture(path, "b-concept choice file")?;
    let choices = parse_choice_file(&util::read_text(path)?);
    if choices.is_empty() {
        return Err(Error::ChoiceFile {
            path: path.into(),
            message: "no headings listed".into(),
        });
    }
    Ok(choices)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSummary {
    pub b_concept: String,
    pub records: usize,
    pub a_headings: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub heading: String,
    pub score: f64,
    pub rank: usize,
    pub novelty: usize,
    pub novel: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenDiscoveryReport {
    pub c_headings: usize,
    pub filtered_headings: usize,
    pub unmapped_headings: usize,
    pub b_concepts: Vec<String>,
    pub b_concept_positions: BTreeMap<String, usize>,
    pub expansions: Vec<ExpansionSummary>,
    pub candidates: Vec<Candidate>,
    pub note: Option<String>,
}

pub struct OpenDiscoveryInput<'a> {
    pub c_docs: &'a [Document],
    pub meta: &'a CorpusMeta,
    pub filter: &'a SemanticTypeFilter,
    pub normalizer: &'a Normalizer,
    pub second_level_dir: &'a Path,
}

/// The ranked b-concept pool an expert chooses from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BConceptCandidates {
    pub ranked: RankedList,
    pub c_headings: usize,
    pub filtered_headings: usize,
    pub unmapped_headings: usize,
    /// Headings naming the C domain; excluded as b- and a-concepts.
    pub excluded: BTreeSet<String>,
}

pub fn candidate_b_concepts(input: &OpenDiscoveryInput) -> Result<BConceptCandidates> {
    let df = collect_headings(input.c_docs)?;
    let filtered = filter_semantic_types(df.keys().map(String::as_str), input.filter);
    let excluded = query_headings(df.keys().map(String::as_str), input.meta, input.normalizer);
    let mut pool = filtered.kept.clone();
    pool.retain(|h| !excluded.contains(h));
    Ok(BConceptCandidates {
        ranked: rank_b_concepts(&pool, input.c_docs)?,
        c_headings: df.len(),
        filtered_headings: filtered.kept.len(),
        unmapped_headings: filtered.unmapped.len(),
        excluded,
    })
}

/// Expansion, intersection, aggregation and novelty for the chosen
/// b-concepts; expansions are loaded and ranked in parallel.
pub fn run(
    input: &OpenDiscoveryInput,
    pool: &BConceptCandidates,
    choices: &[String],
) -> Result<OpenDiscoveryReport> {
    let mut chosen = Vec::new();
    for c in choices {
        let h = crate::ranking::resolve_choice("b-concept", c, &pool.ranked, input.normalizer)?;
        if !chosen.contains(&h) {
            chosen.push(h);
        }
    }
    let expansions: Vec<BConceptExpansion> = chosen
        .par_iter()
        .map(|b| {
            expand_b_concept_file(b, input.second_level_dir, input.meta, input.filter, &pool.excluded)
        })
        .collect::<Result<_>>()?;
    let agg = intersect_and_aggregate(&expansions)?;
    let candidates = agg
        .ranked
        .items()
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let novelty = novelty_check(&item.key, input.c_docs);
            Candidate {
                heading: item.key.clone(),
                score: item.score,
                rank: i + 1,
                novelty,
                novel: novelty == 0,
            }
        })
        .collect();
    Ok(OpenDiscoveryReport {
        c_headings: pool.c_headings,
        filtered_headings: pool.filtered_headings,
        unmapped_headings: pool.unmapped_headings,
        b_concept_positions: chosen
            .iter()
            .filter_map(|b| evalkit::position_of(b, &pool.ranked).ok().map(|p| (b.clone(), p)))
            .collect(),
        b_concepts: chosen,
        expansions: expansions
            .iter()
            .map(|e| ExpansionSummary {
                b_concept: e.b_concept.clone(),
                records: e.documents.len(),
                a_headings: e.a_headings.len(),
            })
            .collect(),
        candidates,
        note: agg.note,
    })
}

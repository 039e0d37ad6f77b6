//! RaJoLink: rare terms (Ra), joint terms across their literatures (Jo) and
//! closed discovery between the start domain and the joint term (Link).
//!
//! The expert choices between the steps are either replayed from a record or
//! typed at a prompt; a prompt session writes a record that replays it.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_abc::{self, CommonTermSet};
use crate::corpus::{self, CorpusMeta, Document, DomainPairCorpus, PsvSchema};
use crate::crossbee::{self, Heuristic, HeuristicSpec};
use crate::error::{Error, Result};
use crate::open_concept::{self, SemanticTypeFilter};
use crate::ranking::{resolve_choice, RankedList, SortOrder};
use crate::textprep::{build_vocabulary, Normalizer, PreprocessConfig, TermBag, TermExtractor};
use crate::util;
use crate::vectorspace::{self, WeightedMatrix};

pub const PAGE_SIZE: usize = 50;

/// Filtered start-corpus headings, lowest aggregated TF-IDF first.
pub fn ra_rank_rare(start_docs: &[Document], filter: &SemanticTypeFilter) -> Result<RankedList> {
    let df = open_concept::collect_headings(start_docs)?;
    let kept = open_concept::filter_semantic_types(df.keys().map(String::as_str), filter).kept;
    if kept.is_empty() {
        return Err(Error::Empty("no start-corpus heading passes the semantic type filter".into()));
    }
    let desc = open_concept::rank_b_concepts(&kept, start_docs)?;
    Ok(RankedList::new(
        desc.items().iter().map(|i| (i.key.clone(), i.score)),
        SortOrder::Ascending,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointCandidates {
    pub ranked: RankedList,
    /// Documents after merging the rare-term literatures (ids deduplicated).
    pub combined_documents: usize,
    pub note: Option<String>,
}

/// Terms present in every rare-term literature, by descending aggregated
/// TF-IDF over the merged documents.
pub fn jo_joint_candidates(
    rare_corpora: &[Vec<Document>],
    config: &PreprocessConfig,
) -> Result<JointCandidates> {
    if rare_corpora.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "joint terms need at least 2 rare-term literatures, got {}",
            rare_corpora.len()
        )));
    }
    let extractor = TermExtractor::new(config.clone())?;
    let mut seen = HashSet::new();
    let mut combined: Vec<&Document> = Vec::new();
    for docs in rare_corpora {
        for d in docs {
            if seen.insert(d.id.as_str()) {
                combined.push(d);
            }
        }
    }
    let bags: Vec<TermBag> = combined.par_iter().map(|d| extractor.document_terms(d)).collect();
    let per_corpus: Vec<BTreeSet<String>> = rare_corpora
        .par_iter()
        .map(|docs| docs.iter().flat_map(|d| extractor.document_terms(d).into_keys()).collect())
        .collect();
    let mut joint = per_corpus[0].clone();
    for s in &per_corpus[1..] {
        joint.retain(|t| s.contains(t));
    }
    let matrix =
        WeightedMatrix::from_bags(combined.iter().map(|d| d.id.clone()).collect(), &bags)?;
    let df = matrix.column_df();
    let scores = vectorspace::aggregated_tfidf(&matrix)?;
    let items: Vec<(String, f64)> = matrix
        .cols()
        .iter()
        .zip(df)
        .filter(|(t, n)| *n >= config.min_support && joint.contains(*t))
        .map(|(t, _)| (t.clone(), scores[t]))
        .collect();
    let note = items
        .is_empty()
        .then(|| "no term occurs in every rare-term literature".to_owned());
    Ok(JointCandidates {
        ranked: RankedList::descending(items),
        combined_documents: combined.len(),
        note,
    })
}

/// Closed discovery on the (start, joint-term) pair.
pub fn link_closed(
    pair: &DomainPairCorpus,
    config: &PreprocessConfig,
    heuristics: &[HeuristicSpec],
    weights: &[f64],
) -> Result<(CommonTermSet, RankedList)> {
    let vocab = build_vocabulary(pair, config)?;
    let common = closed_abc::common_terms(&vocab);
    let dyns: Vec<&dyn Heuristic> = heuristics.iter().map(|h| h as &dyn Heuristic).collect();
    let ranked = crossbee::ensemble_rank(&common, &vocab, &dyns, weights)?;
    Ok((common, ranked))
}

/// Snapshot of a rare term's literature: `<dir>/<slug>.psv.gz`.
pub fn rare_corpus_path(dir: &Path, term: &str) -> PathBuf {
    dir.join(format!("{}.psv.gz", util::slug(term)))
}

pub fn load_rare_corpus(dir: &Path, term: &str, meta: &CorpusMeta) -> Result<(PathBuf, Vec<Document>)> {
    let path = rare_corpus_path(dir, term);
    util::require_fixture(&path, &format!("rare-term literature for {term:?}"))?;
    let (c, _) = corpus::load_psv(&path, &PsvSchema::default(), meta.clone())?;
    Ok((path, c.documents))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChoiceSource {
    ReplayFile,
    Interactive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceRecord {
    pub ra_selected: Vec<String>,
    pub jo_selected: Option<String>,
    pub source: ChoiceSource,
}

impl ChoiceRecord {
    /// Reads `ra:` lines followed by exactly one `jo:` line.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |message: String| Error::ChoiceFile {
            path: path.into(),
            message,
        };
        let mut record = ChoiceRecord {
            ra_selected: vec![],
            jo_selected: None,
            source: ChoiceSource::ReplayFile,
        };
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((tag, value)) = line.split_once(':') else {
                return Err(bad(format!("line {}: expected `ra:` or `jo:`", i + 1)));
            };
            let value = value.trim().to_owned();
            if value.is_empty() {
                return Err(bad(format!("line {}: empty choice", i + 1)));
            }
            match tag.trim().to_ascii_lowercase().as_str() {
                "ra" if record.jo_selected.is_none() => record.ra_selected.push(value),
                "ra" => return Err(bad(format!("line {}: `ra:` after `jo:`", i + 1))),
                "jo" if record.jo_selected.is_none() => record.jo_selected = Some(value),
                "jo" => return Err(bad(format!("line {}: second `jo:` line", i + 1))),
                other => return Err(bad(format!("line {}: unknown tag {other:?}", i + 1))),
            }
        }
        if record.ra_selected.is_empty() {
            return Err(bad("no `ra:` choices".into()));
        }
        if record.jo_selected.is_none() {
            return Err(bad("missing `jo:` choice".into()));
        }
        Ok(record)
    }

    pub fn read(path: &Path) -> Result<Self> {
        util::require_fixture(path, "RaJoLink replay file")?;
        Self::parse(&util::read_text(path)?, path)
    }

    pub fn to_replay(&self) -> String {
        let mut out = String::new();
        for r in &self.ra_selected {
            let _ = writeln!(out, "ra: {r}");
        }
        if let Some(j) = &self.jo_selected {
            let _ = writeln!(out, "jo: {j}");
        }
        out
    }
}

/// Resolves every choice against `ranked`, failing on the first unknown one.
pub fn validate_choices(
    stage: &str,
    choices: &[String],
    ranked: &RankedList,
    normalizer: &Normalizer,
) -> Result<Vec<String>> {
    choices
        .iter()
        .map(|c| resolve_choice(stage, c, ranked, normalizer))
        .collect()
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<terminal>", e)
}

/// Paged terminal prompt over a ranking.
///
/// Commands: `n`/`p` page forward/back, numbers (positions) or names select,
/// an empty line or `done` finishes. With `single`, the first selection ends
/// the prompt.
pub fn prompt_choices<R: BufRead + ?Sized, W: Write + ?Sized>(
    stage: &str,
    ranked: &RankedList,
    single: bool,
    normalizer: &Normalizer,
    input: &mut R,
    output: &mut W,
) -> Result<Vec<String>> {
    if ranked.is_empty() {
        return Err(Error::Empty(format!("{stage} ranking is empty")));
    }
    let pages = ranked.len().div_ceil(PAGE_SIZE);
    let mut page = 0;
    let mut chosen: Vec<String> = Vec::new();
    loop {
        let lo = page * PAGE_SIZE;
        let hi = (lo + PAGE_SIZE).min(ranked.len());
        writeln!(output, "{stage} ranking, items {}-{} of {} (page {}/{pages})", lo + 1, hi, ranked.len(), page + 1)
            .map_err(io_err)?;
        for (i, item) in ranked.items()[lo..hi].iter().enumerate() {
            writeln!(output, "{:>5}. {} ({:.6})", lo + i + 1, item.key, item.score).map_err(io_err)?;
        }
        let what = if single { "one item" } else { "items" };
        write!(output, "select {what} by position or name; n/p to page; empty line when done> ")
            .map_err(io_err)?;
        output.flush().map_err(io_err)?;
        let mut line = String::new();
        if input.read_line(&mut line).map_err(io_err)? == 0 {
            break;
        }
        let line = line.trim();
        match line {
            "n" => page = (page + 1).min(pages - 1),
            "p" => page = page.saturating_sub(1),
            "" | "done" => {
                if !chosen.is_empty() {
                    break;
                }
            }
            _ => {
                let picks: Vec<String> = if line.split_whitespace().all(|w| w.parse::<usize>().is_ok()) {
                    line.split_whitespace()
                        .map(|w| w.parse::<usize>().unwrap())
                        .filter_map(|p| ranked.items().get(p.wrapping_sub(1)).map(|i| i.key.clone()))
                        .collect()
                } else {
                    match resolve_choice(stage, line, ranked, normalizer) {
                        Ok(k) => vec![k],
                        Err(e) => {
                            writeln!(output, "{e}").map_err(io_err)?;
                            vec![]
                        }
                    }
                };
                for k in picks {
                    if !chosen.contains(&k) {
                        writeln!(output, "selected {k}").map_err(io_err)?;
                        chosen.push(k);
                    }
                }
                if single && !chosen.is_empty() {
                    chosen.truncate(1);
                    break;
                }
            }
        }
    }
    if chosen.is_empty() {
        return Err(Error::Empty(format!("no {stage} choice made")));
    }
    Ok(chosen)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub choices: ChoiceRecord,
    pub ra_count: usize,
    pub ra_positions: BTreeMap<String, usize>,
    pub jo_count: usize,
    pub jo_combined_documents: usize,
    pub jo_position: Option<usize>,
    pub jo_note: Option<String>,
    pub link_common_terms: Option<usize>,
    /// File name to SHA-256 of every fixture read.
    pub fixture_hashes: BTreeMap<String, String>,
}

/// Everything a session needs besides the expert.
pub struct SessionInput<'a> {
    pub start_docs: &'a [Document],
    pub meta: &'a CorpusMeta,
    pub filter: &'a SemanticTypeFilter,
    pub config: &'a PreprocessConfig,
    pub rare_dir: &'a Path,
}

/// How choices are obtained between steps.
pub enum Acquire<'a> {
    Replay(ChoiceRecord),
    Interactive {
        input: &'a mut dyn BufRead,
        output: &'a mut dyn Write,
    },
}

pub struct Session {
    pub ra_ranking: RankedList,
    pub jo: JointCandidates,
    pub choices: ChoiceRecord,
    pub report: SessionReport,
}

fn position(ranked: &RankedList, key: &str) -> Option<usize> {
    ranked.keys().position(|k| k == key).map(|p| p + 1)
}

/// Runs Ra and Jo. Choices are stored as the exact ranked keys, so a session
/// replayed from its own record yields identical output.
pub fn run_session(input: &SessionInput, acquire: Acquire) -> Result<Session> {
    let normalizer = Normalizer::new(input.config);
    let ra_ranking = ra_rank_rare(input.start_docs, input.filter)?;
    let (ra_selected, mut acquire) = match acquire {
        Acquire::Replay(rec) => {
            let ra = validate_choices("ra", &rec.ra_selected, &ra_ranking, &normalizer)?;
            (ra, Acquire::Replay(rec))
        }
        Acquire::Interactive { input: i, output: o } => {
            let ra = prompt_choices("ra", &ra_ranking, false, &normalizer, &mut *i, &mut *o)?;
            (ra, Acquire::Interactive { input: i, output: o })
        }
    };

    let mut hashes = BTreeMap::new();
    let mut rare = Vec::new();
    for term in &ra_selected {
        let (path, docs) = load_rare_corpus(input.rare_dir, term, input.meta)?;
        hashes.insert(
            path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
            util::sha256_file(&path)?,
        );
        rare.push(docs);
    }
    let jo = jo_joint_candidates(&rare, input.config)?;
    let (jo_selected, source) = match &mut acquire {
        Acquire::Replay(rec) => {
            let j = rec.jo_selected.clone().ok_or_else(|| Error::ChoiceFile {
                path: "<replay>".into(),
                message: "missing `jo:` choice".into(),
            })?;
            (resolve_choice("jo", &j, &jo.ranked, &normalizer)?, ChoiceSource::ReplayFile)
        }
        Acquire::Interactive { input: i, output: o } => {
            let mut j = prompt_choices("jo", &jo.ranked, true, &normalizer, &mut **i, &mut **o)?;
            (j.remove(0), ChoiceSource::Interactive)
        }
    };
    let choices = ChoiceRecord {
        ra_selected: ra_selected.clone(),
        jo_selected: Some(jo_selected.clone()),
        source,
    };
    let report = SessionReport {
        choices: choices.clone(),
        ra_count: ra_ranking.len(),
        ra_positions: ra_selected
            .iter()
            .filter_map(|k| position(&ra_ranking, k).map(|p| (k.clone(), p)))
            .collect(),
        jo_count: jo.ranked.len(),
        jo_combined_documents: jo.combined_documents,
        jo_position: position(&jo.ranked, &jo_selected),
        jo_note: jo.note.clone(),
        link_common_terms: None,
        fixture_hashes: hashes,
    };
    Ok(Session {
        ra_ranking,
        jo,
        choices,
        report,
    })
}

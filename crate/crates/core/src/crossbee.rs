//! Bridging-term ranking with elementary heuristics and a rank ensemble.
//!
//! Every heuristic scores a common term from its per-domain statistics. The
//! ensemble turns each heuristic's scores into average ranks, normalizes them
//! to `[0, 1]` and sums them with positive weights, so only the ordering a
//! heuristic induces matters, never its scale.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_abc::CommonTermSet;
use crate::corpus::{Domain, GoldStandard};
use crate::error::{Error, Result};
use crate::evalkit::{self, RocCurve};
use crate::ranking::RankedList;
use crate::textprep::{TermStats, TermVocabulary};
use crate::vectorspace::DomainProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HeuristicKind {
    #[serde(rename = "freqTerm")]
    FreqTerm,
    #[serde(rename = "freqDoc")]
    FreqDoc,
    #[serde(rename = "freqRatio")]
    FreqRatio,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 3] = [
        HeuristicKind::FreqTerm,
        HeuristicKind::FreqDoc,
        HeuristicKind::FreqRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::FreqTerm => "freqTerm",
            HeuristicKind::FreqDoc => "freqDoc",
            HeuristicKind::FreqRatio => "freqRatio",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name.trim()))
    }
}

/// A term-scoring rule. Implement this to register additional heuristics.
pub trait Heuristic: Sync {
    fn name(&self) -> &str;

    fn score(&self, term: &str, stats: &TermStats) -> Result<f64>;

    fn higher_is_better(&self) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicSpec {
    pub kind: HeuristicKind,
    pub higher_is_better: bool,
}

impl HeuristicSpec {
    pub fn new(kind: HeuristicKind) -> Self {
        HeuristicSpec {
            kind,
            higher_is_better: true,
        }
    }

    pub fn defaults() -> Vec<HeuristicSpec> {
        HeuristicKind::ALL.into_iter().map(HeuristicSpec::new).collect()
    }
}

fn require_both(term: &str, a: u32, c: u32) -> Result<()> {
    for (n, d) in [(a, Domain::A), (c, Domain::C)] {
        if n == 0 {
            return Err(Error::NotACandidate {
                term: term.to_owned(),
                domain: d.to_string(),
            });
        }
    }
    Ok(())
}

fn freq_term(term: &str, tf_a: f64, tf_c: f64) -> Result<f64> {
    if tf_a <= 0.0 || tf_c <= 0.0 {
        let domain = if tf_a <= 0.0 { Domain::A } else { Domain::C };
        return Err(Error::NotACandidate {
            term: term.to_owned(),
            domain: domain.to_string(),
        });
    }
    Ok(tf_a.min(tf_c))
}

fn freq_doc(term: &str, s: &TermStats) -> Result<f64> {
    require_both(term, s.df_a, s.df_c)?;
    Ok(s.df_a.min(s.df_c) as f64)
}

fn freq_ratio(term: &str, s: &TermStats) -> Result<f64> {
    require_both(term, s.df_a, s.df_c)?;
    Ok(s.df_a.min(s.df_c) as f64 / s.df_a.max(s.df_c) as f64)
}

impl Heuristic for HeuristicSpec {
    fn name(&self) -> &str {
        self.kind.name()
    }

    fn score(&self, term: &str, s: &TermStats) -> Result<f64> {
        match self.kind {
            HeuristicKind::FreqTerm => freq_term(term, s.tf_a as f64, s.tf_c as f64),
            HeuristicKind::FreqDoc => freq_doc(term, s),
            HeuristicKind::FreqRatio => freq_ratio(term, s),
        }
    }

    fn higher_is_better(&self) -> bool {
        self.higher_is_better
    }
}

/// `min(tf_a, tf_c)` read from a count-matrix domain profile.
pub fn score_freq_term(term: &str, profile: &DomainProfile) -> Result<f64> {
    let (a, c) = profile.weights(term).unwrap_or((0.0, 0.0));
    freq_term(term, a, c)
}

fn stats<'a>(term: &str, vocab: &'a TermVocabulary) -> Result<&'a TermStats> {
    vocab.get(term).ok_or_else(|| Error::NotACandidate {
        term: term.to_owned(),
        domain: "A and C".into(),
    })
}

/// `min(df_a, df_c)`.
pub fn score_freq_doc(term: &str, vocab: &TermVocabulary) -> Result<f64> {
    freq_doc(term, stats(term, vocab)?)
}

/// `min(df_a, df_c) / max(df_a, df_c)`, in `(0, 1]`.
pub fn score_freq_ratio(term: &str, vocab: &TermVocabulary) -> Result<f64> {
    freq_ratio(term, stats(term, vocab)?)
}

/// Weighted normalized-rank vote over precomputed score columns.
///
/// `columns[h][i]` is heuristic `h`'s score for `keys[i]` (higher is better).
/// Candidate `i` receives `sum_h w_h * (1 - (rank_h(i) - 1) / (n - 1))` with
/// average ranks on ties; a single candidate receives `sum_h w_h`.
pub fn ensemble_from_scores(
    keys: &[String],
    columns: &[Vec<f64>],
    weights: &[f64],
) -> Result<RankedList> {
    if columns.is_empty() {
        return Err(Error::InvalidConfig("ensemble needs at least one heuristic".into()));
    }
    if weights.len() != columns.len() {
        return Err(Error::InvalidConfig(format!(
            "{} weights for {} heuristics",
            weights.len(),
            columns.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidConfig(format!("weight {w} is not positive")));
    }
    if let Some(col) = columns.iter().find(|c| c.len() != keys.len()) {
        return Err(Error::Dimension(format!(
            "{} scores for {} candidates",
            col.len(),
            keys.len()
        )));
    }
    let n = keys.len();
    if n == 0 {
        return Ok(RankedList::empty());
    }
    let mut total = vec![0.0; n];
    for (col, &w) in columns.iter().zip(weights) {
        if n == 1 {
            total[0] += w;
            continue;
        }
        let ranks = evalkit::average_ranks(col);
        for (t, r) in total.iter_mut().zip(ranks) {
            *t += w * (1.0 - (r - 1.0) / (n - 1) as f64);
        }
    }
    Ok(RankedList::descending(keys.iter().cloned().zip(total)))
}

fn score_columns(
    candidates: &CommonTermSet,
    vocab: &TermVocabulary,
    heuristics: &[&dyn Heuristic],
) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = candidates
        .terms
        .par_iter()
        .map(|c| {
            let s = stats(&c.term, vocab)?;
            heuristics
                .iter()
                .map(|h| {
                    let v = h.score(&c.term, s)?;
                    Ok(if h.higher_is_better() { v } else { -v })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..heuristics.len())
        .map(|h| rows.iter().map(|r| r[h]).collect())
        .collect())
}

/// Ensemble ranking of the common terms.
pub fn ensemble_rank(
    candidates: &CommonTermSet,
    vocab: &TermVocabulary,
    heuristics: &[&dyn Heuristic],
    weights: &[f64],
) -> Result<RankedList> {
    if heuristics.is_empty() {
        return Err(Error::InvalidConfig("ensemble needs at least one heuristic".into()));
    }
    let columns = score_columns(candidates, vocab, heuristics)?;
    let keys: Vec<String> = candidates.terms.iter().map(|c| c.term.clone()).collect();
    ensemble_from_scores(&keys, &columns, weights)
}

/// Ranking of the common terms by one heuristic's raw score.
pub fn heuristic_rank(
    candidates: &CommonTermSet,
    vocab: &TermVocabulary,
    heuristic: &dyn Heuristic,
) -> Result<RankedList> {
    let columns = score_columns(candidates, vocab, &[heuristic])?;
    let keys = candidates.terms.iter().map(|c| c.term.clone());
    Ok(RankedList::descending(keys.zip(columns[0].iter().copied())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossbeeReport {
    pub candidates: usize,
    pub gold_in_candidates: usize,
    pub ensemble_auc: f64,
    pub heuristic_auc: BTreeMap<String, f64>,
    pub roc: RocCurve,
    pub gold_positions: BTreeMap<String, usize>,
}

/// Ensemble ranking plus its evaluation against the gold b-terms.
pub fn rank_and_evaluate(
    candidates: &CommonTermSet,
    vocab: &TermVocabulary,
    heuristics: &[HeuristicSpec],
    weights: &[f64],
    gold: &GoldStandard,
) -> Result<(RankedList, CrossbeeReport)> {
    let dyns: Vec<&dyn Heuristic> = heuristics.iter().map(|h| h as &dyn Heuristic).collect();
    let ranked = ensemble_rank(candidates, vocab, &dyns, weights)?;
    let positives = gold.normalized_set();
    let roc = evalkit::roc_curve(&ranked, &positives)?;
    let ensemble_auc = evalkit::auc(&ranked, &positives)?;
    let mut heuristic_auc = BTreeMap::new();
    for h in heuristics {
        let single = heuristic_rank(candidates, vocab, h)?;
        heuristic_auc.insert(h.name().to_owned(), evalkit::auc(&single, &positives)?);
    }
    let gold_positions = positives
        .iter()
        .filter_map(|g| evalkit::position_of(g, &ranked).ok().map(|p| (g.clone(), p)))
        .collect::<BTreeMap<_, _>>();
    let report = CrossbeeReport {
        candidates: ranked.len(),
        gold_in_candidates: gold_positions.len(),
        ensemble_auc,
        heuristic_auc,
        roc,
        gold_positions,
    };
    Ok((ranked, report))
}

/// PSV with header `term|score|rank|is_gold`.
pub fn ranked_psv(ranked: &RankedList, gold: Option<&GoldStandard>) -> String {
    let mut out = String::from("term|score|rank|is_gold\n");
    for (i, item) in ranked.items().iter().enumerate() {
        let is_gold = gold.is_some_and(|g| g.contains(&item.key));
        let _ = writeln!(out, "{}|{}|{}|{}", item.key, item.score, i + 1, is_gold);
    }
    out
}

//! ABC closed discovery: terms shared by both domain literatures.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::GoldStandard;
use crate::error::{Error, Result};
use crate::textprep::TermVocabulary;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonTerm {
    pub term: String,
    pub df_a: u32,
    pub df_c: u32,
}

/// Candidate b-terms, ordered by descending `min(df_a, df_c)` then term.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonTermSet {
    pub terms: Vec<CommonTerm>,
}

impl CommonTermSet {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.iter().any(|t| t.term == term)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CommonTerm> {
        self.terms.iter()
    }

    /// PSV with header `term|df_a|df_c|is_gold`.
    pub fn to_psv(&self, gold: Option<&GoldStandard>) -> String {
        let mut out = String::from("term|df_a|df_c|is_gold\n");
        for t in &self.terms {
            let is_gold = gold.is_some_and(|g| g.contains(&t.term));
            let _ = writeln!(out, "{}|{}|{}|{}", t.term, t.df_a, t.df_c, is_gold);
        }
        out
    }
}

pub fn common_terms(vocab: &TermVocabulary) -> CommonTermSet {
    let mut terms: Vec<CommonTerm> = vocab
        .iter()
        .filter(|(_, s)| s.df_a > 0 && s.df_c > 0)
        .map(|(t, s)| CommonTerm {
            term: t.to_owned(),
            df_a: s.df_a,
            df_c: s.df_c,
        })
        .collect();
    terms.sort_by(|x, y| {
        y.df_a
            .min(y.df_c)
            .cmp(&x.df_a.min(x.df_c))
            .then_with(|| x.term.cmp(&y.term))
    });
    CommonTermSet { terms }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldRecovery {
    pub hits: Vec<String>,
    pub misses: Vec<String>,
    pub recall: f64,
}

/// Share of gold b-terms (counted per listed entry) found among the candidates.
pub fn check_gold_recovery(common: &CommonTermSet, gold: &GoldStandard) -> Result<GoldRecovery> {
    if gold.is_empty() {
        return Err(Error::EmptyGold(gold.dataset_name.clone()));
    }
    let present: std::collections::HashSet<&str> =
        common.terms.iter().map(|t| t.term.as_str()).collect();
    let (mut hits, mut misses) = (Vec::new(), Vec::new());
    for t in &gold.b_terms {
        if present.contains(t.normalized.as_str()) {
            hits.push(t.surface.clone());
        } else {
            misses.push(t.surface.clone());
        }
    }
    let recall = hits.len() as f64 / gold.len() as f64;
    Ok(GoldRecovery {
        hits,
        misses,
        recall,
    })
}

//! Sparse bag-of-words and TF-IDF matrices.
//!
//! TF is the raw count and IDF is `ln(N / df)` without smoothing, so a term
//! present in every row gets weight zero and is not stored.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Domain, DomainPairCorpus};
use crate::error::{Error, Result};
use crate::textprep::{PreprocessConfig, TermBag, TermExtractor, TermVocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Counts,
    TfIdf,
}

/// Row-major sparse matrix (CSR). Stored cells are never zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedMatrix {
    row_ids: Vec<String>,
    cols: Vec<String>,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
    kind: MatrixKind,
}

impl WeightedMatrix {
    /// Builds a matrix from per-row `(column, value)` cells. Zero cells are
    /// dropped and each row is sorted by column.
    pub fn from_rows(
        row_ids: Vec<String>,
        cols: Vec<String>,
        rows: Vec<Vec<(u32, f64)>>,
        kind: MatrixKind,
    ) -> Result<Self> {
        if row_ids.len() != rows.len() {
            return Err(Error::Dimension(format!(
                "{} row ids for {} rows",
                row_ids.len(),
                rows.len()
            )));
        }
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for mut row in rows {
            row.sort_by_key(|c| c.0);
            for (c, v) in row {
                if c as usize >= cols.len() {
                    return Err(Error::Dimension(format!(
                        "column {c} out of range for {} columns",
                        cols.len()
                    )));
                }
                if v < 0.0 || !v.is_finite() {
                    return Err(Error::Dimension(format!("invalid weight {v}")));
                }
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Ok(WeightedMatrix {
            row_ids,
            cols,
            indptr,
            indices,
            values,
            kind,
        })
    }

    /// Count matrix over arbitrary bags; columns are the sorted union of keys.
    pub fn from_bags(row_ids: Vec<String>, bags: &[TermBag]) -> Result<Self> {
        let cols: Vec<String> = bags
            .iter()
            .flat_map(|b| b.keys().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<&str, u32> = cols
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i as u32))
            .collect();
        let rows = bags
            .iter()
            .map(|b| b.iter().map(|(k, &n)| (index[k.as_str()], n as f64)).collect())
            .collect();
        Self::from_rows(row_ids, cols, rows, MatrixKind::Counts)
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    /// Stored cells of row `r` as `(column, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .map(|&c| c as usize)
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    /// Number of rows with a stored cell in each column.
    pub fn column_df(&self) -> Vec<u32> {
        let mut df = vec![0u32; self.cols.len()];
        for &c in &self.indices {
            df[c as usize] += 1;
        }
        df
    }

    /// Column sums, accumulated row by row.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols.len()];
        for r in 0..self.n_rows() {
            for (c, v) in self.row(r) {
                sums[c] += v;
            }
        }
        sums
    }

    pub fn total(&self) -> f64 {
        self.column_sums().iter().sum()
    }

    /// Dense copy, for small matrices and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows())
            .map(|r| {
                let mut dense = vec![0.0; self.n_cols()];
                for (c, v) in self.row(r) {
                    dense[c] = v;
                }
                dense
            })
            .collect()
    }

    /// Keeps the columns for which `keep(column index)` holds, renumbering them.
    pub fn select_columns(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut remap = vec![u32::MAX; self.cols.len()];
        let mut cols = Vec::new();
        for (i, name) in self.cols.iter().enumerate() {
            if keep(i) {
                remap[i] = cols.len() as u32;
                cols.push(name.clone());
            }
        }
        let rows = (0..self.n_rows())
            .map(|r| {
                self.row(r)
                    .filter(|&(c, _)| remap[c] != u32::MAX)
                    .map(|(c, v)| (remap[c], v))
                    .collect()
            })
            .collect();
        Self::from_rows(self.row_ids.clone(), cols, rows, self.kind).expect("subset of valid matrix")
    }

    /// Keeps the rows for which `keep(row index)` holds.
    pub fn select_rows(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for r in 0..self.n_rows() {
            if keep(r) {
                ids.push(self.row_ids[r].clone());
                rows.push(self.row(r).map(|(c, v)| (c as u32, v)).collect());
            }
        }
        Self::from_rows(ids, self.cols.clone(), rows, self.kind).expect("subset of valid matrix")
    }

    /// Sparse triplets `doc_id<TAB>term<TAB>weight`, one stored cell per line.
    pub fn to_triplets(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n_rows() {
            for (c, v) in self.row(r) {
                let _ = writeln!(out, "{}\t{}\t{}", self.row_ids[r], self.cols[c], v);
            }
        }
        out
    }
}

/// Count matrix of `corpus` over the vocabulary's terms.
pub fn bow(
    corpus: &DomainPairCorpus,
    vocab: &TermVocabulary,
    config: &PreprocessConfig,
) -> Result<WeightedMatrix> {
    if vocab.config_fingerprint != config.fingerprint() {
        return Err(Error::VocabularyMismatch(
            "vocabulary was built with a different preprocessing config".into(),
        ));
    }
    if vocab.docs_a != corpus.count(Domain::A) || vocab.docs_c != corpus.count(Domain::C) {
        return Err(Error::VocabularyMismatch(format!(
            "vocabulary counts {}/{} documents, corpus has {}/{}",
            vocab.docs_c,
            vocab.docs_a,
            corpus.count(Domain::C),
            corpus.count(Domain::A)
        )));
    }
    let extractor = TermExtractor::new(config.clone())?;
    let rows: Vec<Vec<(u32, f64)>> = corpus
        .documents
        .par_iter()
        .map(|doc| {
            extractor
                .document_terms(doc)
                .into_iter()
                .filter_map(|(t, n)| vocab.index_of(&t).map(|i| (i as u32, n as f64)))
                .collect()
        })
        .collect();
    let ids = corpus.documents.iter().map(|d| d.id.clone()).collect();
    let matrix = WeightedMatrix::from_rows(ids, vocab.terms().to_vec(), rows, MatrixKind::Counts)?;

    let df = matrix.column_df();
    if let Some((i, _)) = vocab
        .iter()
        .enumerate()
        .find(|(i, (_, s))| s.df_total() != df[*i])
    {
        return Err(Error::VocabularyMismatch(format!(
            "term {:?} has df {} in the corpus but {} in the vocabulary",
            vocab.terms()[i],
            df[i],
            vocab.stats_at(i).df_total()
        )));
    }
    Ok(matrix)
}

/// Reweights a count matrix with `tf * ln(N / df)`.
pub fn tfidf(matrix: &WeightedMatrix) -> Result<WeightedMatrix> {
    if matrix.kind == MatrixKind::TfIdf {
        return Err(Error::AlreadyWeighted);
    }
    let n = matrix.n_rows() as f64;
    let idf: Vec<f64> = matrix
        .column_df()
        .into_iter()
        .map(|df| if df == 0 { 0.0 } else { (n / df as f64).ln() })
        .collect();
    let rows = (0..matrix.n_rows())
        .map(|r| matrix.row(r).map(|(c, tf)| (c as u32, tf * idf[c])).collect())
        .collect();
    WeightedMatrix::from_rows(
        matrix.row_ids.clone(),
        matrix.cols.clone(),
        rows,
        MatrixKind::TfIdf,
    )
}

/// Per-term weight totals of each domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainProfile {
    pub terms: Vec<String>,
    pub weight_a: Vec<f64>,
    pub weight_c: Vec<f64>,
    pub kind: MatrixKind,
}

impl DomainProfile {
    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    pub fn weights(&self, term: &str) -> Option<(f64, f64)> {
        self.index_of(term).map(|i| (self.weight_a[i], self.weight_c[i]))
    }

    pub fn weight(&self, term: &str, domain: Domain) -> Option<f64> {
        self.weights(term).map(|(a, c)| match domain {
            Domain::A => a,
            Domain::C => c,
        })
    }

    pub fn total(&self) -> f64 {
        self.weight_a.iter().sum::<f64>() + self.weight_c.iter().sum::<f64>()
    }
}

/// Sums matrix columns separately over domain-A and domain-C rows.
pub fn aggregate_by_domain(
    matrix: &WeightedMatrix,
    corpus: &DomainPairCorpus,
) -> Result<DomainProfile> {
    let domains: HashMap<&str, Domain> = corpus
        .documents
        .iter()
        .map(|d| (d.id.as_str(), d.domain))
        .collect();
    let mut weight_a = vec![0.0; matrix.n_cols()];
    let mut weight_c = vec![0.0; matrix.n_cols()];
    for r in 0..matrix.n_rows() {
        let id = matrix.row_ids[r].as_str();
        let target = match domains.get(id) {
            Some(Domain::A) => &mut weight_a,
            Some(Domain::C) => &mut weight_c,
            None => {
                return Err(Error::Dimension(format!(
                    "matrix row {id:?} is not a corpus document"
                )))
            }
        };
        for (c, v) in matrix.row(r) {
            target[c] += v;
        }
    }
    let mut terms = matrix.cols.clone();
    let sorted = terms.windows(2).all(|w| w[0] < w[1]);
    if !sorted {
        // keep the binary-search lookup valid
        let mut order: Vec<usize> = (0..terms.len()).collect();
        order.sort_by(|&a, &b| terms[a].cmp(&terms[b]));
        terms = order.iter().map(|&i| matrix.cols[i].clone()).collect();
        weight_a = order.iter().map(|&i| weight_a[i]).collect();
        weight_c = order.iter().map(|&i| weight_c[i]).collect();
    }
    Ok(DomainProfile {
        terms,
        weight_a,
        weight_c,
        kind: matrix.kind,
    })
}

/// Aggregated TF-IDF per column over all rows of a count matrix.
pub fn aggregated_tfidf(counts: &WeightedMatrix) -> Result<BTreeMap<String, f64>> {
    let w = tfidf(counts)?;
    Ok(w.cols.iter().cloned().zip(w.column_sums()).collect())
}

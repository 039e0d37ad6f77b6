//! Text normalization and n-gram term extraction.
//!
//! Documents are tokenized, stripped of stopwords, optionally stemmed, and
//! turned into contiguous n-grams. Title and abstract are separate segments so
//! that no n-gram crosses the boundary between them.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use crate::corpus::{BenchmarkDataset, Document, Domain, DomainPairCorpus};
use crate::error::{Error, Result};
use crate::resources;
use crate::util;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSelection {
    TitleOnly,
    TitleAndAbstract,
}

impl FieldSelection {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "title_only" | "title" => Some(FieldSelection::TitleOnly),
            "title_and_abstract" | "title+abstract" => Some(FieldSelection::TitleAndAbstract),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FieldSelection::TitleOnly => "title_only",
            FieldSelection::TitleAndAbstract => "title_and_abstract",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub fields: FieldSelection,
    pub ngram_max: usize,
    /// Minimum corpus-wide document frequency of a kept term.
    pub min_support: u32,
    pub stopwords: BTreeSet<String>,
    pub stemming: bool,
}

pub fn builtin_stopwords() -> BTreeSet<String> {
    resources::content_lines(resources::STOPWORDS_EN)
        .map(str::to_owned)
        .collect()
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            fields: FieldSelection::TitleAndAbstract,
            ngram_max: 2,
            min_support: 2,
            stopwords: builtin_stopwords(),
            stemming: true,
        }
    }
}

impl PreprocessConfig {
    pub fn for_dataset(dataset: BenchmarkDataset) -> Self {
        let fields = match dataset {
            BenchmarkDataset::RsDfo | BenchmarkDataset::MigMg => FieldSelection::TitleOnly,
            BenchmarkDataset::AutCan => FieldSelection::TitleAndAbstract,
        };
        PreprocessConfig {
            fields,
            ..PreprocessConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ngram_max == 0 {
            return Err(Error::InvalidConfig("ngram_max must be >= 1".into()));
        }
        if self.min_support == 0 {
            return Err(Error::InvalidConfig("min_support must be >= 1".into()));
        }
        Ok(())
    }

    /// Stable hash of every setting that influences extracted terms.
    pub fn fingerprint(&self) -> String {
        let mut canon = format!(
            "fields={};ngram_max={};min_support={};stemming={};stopwords=",
            self.fields.as_str(),
            self.ngram_max,
            self.min_support,
            self.stemming
        );
        for w in &self.stopwords {
            canon.push_str(w);
            canon.push(',');
        }
        util::sha256_bytes(canon.as_bytes())
    }
}

/// Splits text into lowercase alphanumeric tokens.
///
/// A hyphen between two alphanumeric characters stays inside the token; every
/// other non-alphanumeric character separates tokens. Tokens without any
/// letter (standalone numbers) are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        if current.chars().any(char::is_alphabetic) {
            tokens.push(std::mem::take(current));
        } else {
            current.clear();
        }
    };
    for (i, &ch) in chars.iter().enumerate() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if ch == '-'
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|c| c.is_alphanumeric())
        {
            current.push('-');
        } else {
            flush(&mut current, &mut tokens);
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

/// Stopword removal plus stemming, shared by documents, gold terms and queries.
pub struct Normalizer {
    stopwords: HashSet<String>,
    stemmer: Option<Stemmer>,
    exceptions: HashMap<String, String>,
}

fn builtin_exceptions() -> HashMap<String, String> {
    resources::content_lines(resources::LEMMA_EXCEPTIONS)
        .filter_map(|l| l.split_once('\t'))
        .map(|(a, b)| (a.trim().to_owned(), b.trim().to_owned()))
        .collect()
}

impl Normalizer {
    pub fn new(config: &PreprocessConfig) -> Self {
        Normalizer {
            stopwords: config.stopwords.iter().cloned().collect(),
            stemmer: config.stemming.then(|| Stemmer::create(Algorithm::English)),
            exceptions: builtin_exceptions(),
        }
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    fn stem_part(&self, part: &str) -> String {
        let Some(stemmer) = &self.stemmer else {
            return part.to_owned();
        };
        let base = self.exceptions.get(part).map(String::as_str).unwrap_or(part);
        stemmer.stem(base).into_owned()
    }

    /// Stems one token; hyphenated tokens are stemmed part by part.
    pub fn stem(&self, token: &str) -> String {
        if self.stemmer.is_none() {
            return token.to_owned();
        }
        if token.contains('-') {
            token
                .split('-')
                .map(|p| self.stem_part(p))
                .collect::<Vec<_>>()
                .join("-")
        } else {
            self.stem_part(token)
        }
    }

    pub fn normalize(&self, tokens: &[String]) -> Vec<String> {
        tokens
            .iter()
            .filter(|t| !self.is_stopword(t))
            .map(|t| self.stem(t))
            .collect()
    }

    /// Normalized form of a free-text phrase, words joined by a single space.
    pub fn normalize_phrase(&self, phrase: &str) -> String {
        self.normalize(&tokenize(phrase)).join(" ")
    }
}

/// Query words used to build a corpus; terms containing them are removed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryWordFilter {
    exact: BTreeSet<String>,
    prefixes: BTreeSet<String>,
}

impl QueryWordFilter {
    /// Builds the filter from query strings such as `"fish oil"` or
    /// `"raynaud*"`. A trailing `*` turns the last word into a prefix match on
    /// unstemmed text.
    pub fn new<'a>(queries: impl IntoIterator<Item = &'a str>, normalizer: &Normalizer) -> Self {
        let mut filter = QueryWordFilter::default();
        for q in queries {
            let q = q.trim();
            let (body, wildcard) = match q.strip_suffix('*') {
                Some(body) => (body, true),
                None => (q, false),
            };
            let tokens = tokenize(body);
            for (i, tok) in tokens.iter().enumerate() {
                if wildcard && i + 1 == tokens.len() {
                    filter.prefixes.insert(tok.clone());
                } else if !normalizer.is_stopword(tok) {
                    filter.exact.insert(normalizer.stem(tok));
                }
            }
        }
        filter
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty() && self.prefixes.is_empty()
    }

    fn word_matches(&self, word: &str) -> bool {
        let hit = |w: &str| {
            self.exact.contains(w) || self.prefixes.iter().any(|p| w.starts_with(p.as_str()))
        };
        hit(word) || (word.contains('-') && word.split('-').any(hit))
    }

    /// True when any whitespace-delimited word of `term` is a query word.
    pub fn excludes(&self, term: &str) -> bool {
        term.split(' ').any(|w| self.word_matches(w))
    }
}

/// Multiset of terms, ordered for reproducible iteration.
pub type TermBag = BTreeMap<String, u32>;

/// Turns documents into n-gram term bags under one configuration.
pub struct TermExtractor {
    config: PreprocessConfig,
    normalizer: Normalizer,
}

impl TermExtractor {
    pub fn new(config: PreprocessConfig) -> Result<Self> {
        config.validate()?;
        let normalizer = Normalizer::new(&config);
        Ok(TermExtractor { config, normalizer })
    }

    pub fn config(&self) -> &PreprocessConfig {
        &self.config
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    /// Normalized token sequences of the configured fields, one per field.
    pub fn segments(&self, doc: &Document) -> Vec<Vec<String>> {
        let mut out = vec![self.normalizer.normalize(&tokenize(&doc.title))];
        if self.config.fields == FieldSelection::TitleAndAbstract {
            out.push(self.normalizer.normalize(&tokenize(&doc.abstract_text)));
        }
        out
    }

    pub fn document_terms(&self, doc: &Document) -> TermBag {
        let mut bag = TermBag::new();
        for seg in self.segments(doc) {
            add_ngrams(&seg, self.config.ngram_max, &mut bag);
        }
        bag
    }
}

/// Adds every contiguous 1..=n-gram of `tokens` to `bag`.
pub fn add_ngrams(tokens: &[String], n: usize, bag: &mut TermBag) {
    for start in 0..tokens.len() {
        for len in 1..=n.min(tokens.len() - start) {
            let gram = tokens[start..start + len].join(" ");
            *bag.entry(gram).or_insert(0) += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermStats {
    pub tf_a: u32,
    pub tf_c: u32,
    pub df_a: u32,
    pub df_c: u32,
}

impl TermStats {
    pub fn tf(&self, domain: Domain) -> u32 {
        match domain {
            Domain::A => self.tf_a,
            Domain::C => self.tf_c,
        }
    }

    pub fn df(&self, domain: Domain) -> u32 {
        match domain {
            Domain::A => self.df_a,
            Domain::C => self.df_c,
        }
    }

    pub fn df_total(&self) -> u32 {
        self.df_a + self.df_c
    }

    fn add(&mut self, other: &TermStats) {
        self.tf_a += other.tf_a;
        self.tf_c += other.tf_c;
        self.df_a += other.df_a;
        self.df_c += other.df_c;
    }

    fn record(&mut self, domain: Domain, count: u32) {
        match domain {
            Domain::A => {
                self.tf_a += count;
                self.df_a += 1;
            }
            Domain::C => {
                self.tf_c += count;
                self.df_c += 1;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermVocabulary {
    terms: Vec<String>,
    stats: Vec<TermStats>,
    pub docs_a: usize,
    pub docs_c: usize,
    pub min_support: u32,
    /// Fingerprint of the [`PreprocessConfig`] the vocabulary was built with.
    pub config_fingerprint: String,
}

impl TermVocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic order.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    pub fn get(&self, term: &str) -> Option<&TermStats> {
        self.index_of(term).map(|i| &self.stats[i])
    }

    pub fn stats_at(&self, index: usize) -> &TermStats {
        &self.stats[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &TermStats)> {
        self.terms.iter().map(String::as_str).zip(self.stats.iter())
    }

    pub fn docs_in(&self, domain: Domain) -> usize {
        match domain {
            Domain::A => self.docs_a,
            Domain::C => self.docs_c,
        }
    }

    /// Number of distinct terms with positive document frequency in `domain`.
    pub fn unique_in(&self, domain: Domain) -> usize {
        self.stats.iter().filter(|s| s.df(domain) > 0).count()
    }

    /// PSV export with header `term|tf_a|tf_c|df_a|df_c`.
    pub fn to_psv(&self) -> String {
        let mut out = String::from("term|tf_a|tf_c|df_a|df_c\n");
        for (t, s) in self.iter() {
            out.push_str(&format!(
                "{t}|{}|{}|{}|{}\n",
                s.tf_a, s.tf_c, s.df_a, s.df_c
            ));
        }
        out
    }
}

fn merge_stats(
    mut big: BTreeMap<String, TermStats>,
    mut small: BTreeMap<String, TermStats>,
) -> BTreeMap<String, TermStats> {
    if big.len() < small.len() {
        std::mem::swap(&mut big, &mut small);
    }
    for (term, s) in small {
        big.entry(term).or_default().add(&s);
    }
    big
}

const CHUNK: usize = 256;

/// Counts per-domain tf/df of every extracted term. Chunks are reduced with
/// integer addition, so the result does not depend on scheduling.
pub fn count_terms(docs: &[Document], extractor: &TermExtractor) -> BTreeMap<String, TermStats> {
    docs.par_chunks(CHUNK)
        .map(|chunk| {
            let mut local: BTreeMap<String, TermStats> = BTreeMap::new();
            for doc in chunk {
                for (term, n) in extractor.document_terms(doc) {
                    local.entry(term).or_default().record(doc.domain, n);
                }
            }
            local
        })
        .reduce(BTreeMap::new, merge_stats)
}

/// Builds the filtered term vocabulary of a domain-pair corpus.
pub fn build_vocabulary(
    corpus: &DomainPairCorpus,
    config: &PreprocessConfig,
) -> Result<TermVocabulary> {
    let extractor = TermExtractor::new(config.clone())?;
    let query = QueryWordFilter::new(
        corpus
            .query_terms_a
            .iter()
            .chain(&corpus.query_terms_c)
            .map(String::as_str),
        extractor.normalizer(),
    );
    let counts = count_terms(&corpus.documents, &extractor);
    let (terms, stats) = counts
        .into_iter()
        .filter(|(t, s)| s.df_total() >= config.min_support && !query.excludes(t))
        .unzip();
    Ok(TermVocabulary {
        terms,
        stats,
        docs_a: corpus.count(Domain::A),
        docs_c: corpus.count(Domain::C),
        min_support: config.min_support,
        config_fingerprint: config.fingerprint(),
    })
}

/// Mean number of raw tokens per document of `domain` in the configured fields.
pub fn mean_words_per_doc(corpus: &DomainPairCorpus, fields: FieldSelection, domain: Domain) -> f64 {
    let (n, words) = corpus.docs_in(domain).fold((0usize, 0usize), |(n, w), d| {
        let mut count = tokenize(&d.title).len();
        if fields == FieldSelection::TitleAndAbstract {
            count += tokenize(&d.abstract_text).len();
        }
        (n + 1, w + count)
    });
    if n == 0 {
        0.0
    } else {
        words as f64 / n as f64
    }
}

//! Network-based closed discovery: unsupervised link prediction on a
//! time-sliced citation network.
//!
//! Documents and the references they cite are nodes; a citation is an
//! undirected edge. Citations of references published up to the cutoff form
//! the training graph, later ones are the edges to predict.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{parse_date, Document, RowRejection};
use crate::error::{Error, Result};
use crate::evalkit;
use crate::ranking::RankedList;
use crate::util;

pub const DEFAULT_TEST_SIZE: usize = 1000;
pub const DEFAULT_SEED: u64 = 42;
pub const PRECISION_KS: [usize; 3] = [10, 50, 100];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reference {
    pub citing: String,
    pub cited: String,
    pub cited_date: NaiveDate,
}

/// Reads `citing_id|cited_id|cited_pub_date` rows after a header.
pub fn parse_references(path: &Path, text: &str) -> Result<(Vec<Reference>, Vec<RowRejection>)> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, h)| h.trim().to_ascii_lowercase());
    let expected = "citing_id|cited_id|cited_pub_date";
    if header.as_deref().map(|h| h.replace(' ', "")) != Some(expected.to_owned()) {
        return Err(Error::Format {
            path: path.into(),
            message: format!("expected header {expected}"),
        });
    }
    let mut refs = Vec::new();
    let mut rejected = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let reject = |reason: &str| RowRejection {
            line: i + 1,
            reason: reason.to_owned(),
        };
        let f: Vec<&str> = line.split('|').map(str::trim).collect();
        if f.len() != 3 {
            rejected.push(reject("expected 3 fields"));
            continue;
        }
        if f[0].is_empty() || f[1].is_empty() {
            rejected.push(reject("missing id"));
            continue;
        }
        let Some(date) = parse_date(f[2]) else {
            rejected.push(reject("unparsable date"));
            continue;
        };
        refs.push(Reference {
            citing: f[0].to_owned(),
            cited: f[1].to_owned(),
            cited_date: date,
        });
    }
    Ok((refs, rejected))
}

pub fn load_references(path: &Path) -> Result<(Vec<Reference>, Vec<RowRejection>)> {
    util::require_fixture(path, "reference snapshot")?;
    parse_references(path, &util::read_text(path)?)
}

/// Undirected simple graph over string node ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationNetwork {
    nodes: Vec<String>,
    adjacency: Vec<Vec<usize>>,
    pub cutoff: Option<NaiveDate>,
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl CitationNetwork {
    /// Self-loops and duplicates are ignored; edge endpoints become nodes.
    pub fn new<'a>(
        nodes: impl IntoIterator<Item = &'a str>,
        edges: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Self {
        let edges: Vec<(&str, &str)> = edges.into_iter().collect();
        let names: BTreeSet<&str> = nodes
            .into_iter()
            .chain(edges.iter().flat_map(|&(a, b)| [a, b]))
            .collect();
        let nodes: Vec<String> = names.into_iter().map(str::to_owned).collect();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nodes.len()];
        let idx = |s: &str| nodes.binary_search_by(|n| n.as_str().cmp(s)).unwrap();
        for (a, b) in edges {
            let (u, v) = (idx(a), idx(b));
            if u != v {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
        CitationNetwork {
            adjacency: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
            nodes,
            cutoff: None,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }

    fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownNode(id.to_owned()))
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as ordered index pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Reference-reference graph linking references cited by a common
    /// document; weights count the shared citers.
    pub fn cocitation(&self, citing: &BTreeSet<String>) -> CoCitation {
        let mut weights: BTreeMap<(String, String), u32> = BTreeMap::new();
        for (d, ns) in self.adjacency.iter().enumerate() {
            if !citing.contains(&self.nodes[d]) {
                continue;
            }
            let refs: Vec<usize> = ns.iter().copied().filter(|&r| !citing.contains(&self.nodes[r])).collect();
            for (i, &a) in refs.iter().enumerate() {
                for &b in &refs[i + 1..] {
                    *weights
                        .entry((self.nodes[a].clone(), self.nodes[b].clone()))
                        .or_default() += 1;
                }
            }
        }
        let reference_nodes: Vec<&str> = self
            .nodes
            .iter()
            .filter(|n| !citing.contains(*n))
            .map(String::as_str)
            .collect();
        let mut network = CitationNetwork::new(
            reference_nodes,
            weights.keys().map(|(a, b)| (a.as_str(), b.as_str())),
        );
        network.cutoff = self.cutoff;
        CoCitation { network, weights }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoCitation {
    pub network: CitationNetwork,
    pub weights: BTreeMap<(String, String), u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSlicedSplit {
    pub train: CitationNetwork,
    /// Node index pairs into `train`, `u < v`.
    pub test_edges: Vec<(usize, usize)>,
    pub rejected: Vec<RowRejection>,
    /// Post-cutoff pairs skipped because an endpoint is not a training node.
    pub unevaluable: usize,
}

impl TimeSlicedSplit {
    /// Checks disjointness and endpoint membership.
    pub fn new(train: CitationNetwork, test: &[(&str, &str)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut test_edges = Vec::new();
        for &(a, b) in test {
            if a == b {
                return Err(Error::SelfPair(a.to_owned()));
            }
            let e = ordered(train.require(a)?, train.require(b)?);
            if train.has_edge(e.0, e.1) {
                return Err(Error::InvalidConfig(format!("test edge {a}-{b} is a training edge")));
            }
            if seen.insert(e) {
                test_edges.push(e);
            }
        }
        Ok(TimeSlicedSplit {
            train,
            test_edges,
            rejected: vec![],
            unevaluable: 0,
        })
    }
}

/// Training graph from citations up to `cutoff`; the test set is the first
/// `n_test` later citing-cited pairs (by date, then citing id, then cited id)
/// whose endpoints are training nodes and that are not training edges.
pub fn build_network(
    docs: &[Document],
    references: &[Reference],
    cutoff: NaiveDate,
    n_test: usize,
) -> TimeSlicedSplit {
    let known: HashSet<&str> = docs.iter().map(|d| d.id.as_str()).collect();
    let mut rejected = Vec::new();
    let mut valid: Vec<(usize, &Reference)> = Vec::new();
    for (i, r) in references.iter().enumerate() {
        let reject = |reason: &str| RowRejection {
            line: i + 2,
            reason: reason.to_owned(),
        };
        if !known.contains(r.citing.as_str()) {
            rejected.push(reject("citing id is not a corpus document"));
        } else if r.citing == r.cited {
            rejected.push(reject("self-citation"));
        } else {
            valid.push((i, r));
        }
    }
    let train_pairs: Vec<(&str, &str)> = valid
        .iter()
        .filter(|(_, r)| r.cited_date <= cutoff)
        .map(|(_, r)| (r.citing.as_str(), r.cited.as_str()))
        .collect();
    let mut train = CitationNetwork::new(known.iter().copied(), train_pairs);
    train.cutoff = Some(cutoff);

    let mut later: Vec<&Reference> = valid
        .iter()
        .map(|(_, r)| *r)
        .filter(|r| r.cited_date > cutoff)
        .collect();
    later.sort_by(|a, b| {
        (a.cited_date, &a.citing, &a.cited).cmp(&(b.cited_date, &b.citing, &b.cited))
    });
    let mut seen = HashSet::new();
    let mut test_edges = Vec::new();
    let mut unevaluable = 0;
    for r in later {
        if test_edges.len() == n_test {
            break;
        }
        let (Some(u), Some(v)) = (train.index_of(&r.citing), train.index_of(&r.cited)) else {
            unevaluable += 1;
            continue;
        };
        let e = ordered(u, v);
        if !train.has_edge(u, v) && seen.insert(e) {
            test_edges.push(e);
        }
    }
    TimeSlicedSplit {
        train,
        test_edges,
        rejected,
        unevaluable,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    CommonNeighbors,
    Jaccard,
    AdamicAdar,
    /// Seeded pseudo-random score per pair; a baseline.
    Random(u64),
}

impl Measure {
    pub const PROXIMITY: [Measure; 3] = [Measure::CommonNeighbors, Measure::Jaccard, Measure::AdamicAdar];

    pub fn name(self) -> &'static str {
        match self {
            Measure::CommonNeighbors => "common_neighbors",
            Measure::Jaccard => "jaccard",
            Measure::AdamicAdar => "adamic_adar",
            Measure::Random(_) => "random",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::PROXIMITY.into_iter().find(|m| m.name() == name)
    }

    /// Score of an index pair; `u != v` is the caller's responsibility.
    pub fn score_indices(self, net: &CitationNetwork, u: usize, v: usize) -> f64 {
        let common = || {
            let (a, b) = (net.neighbors(u), net.neighbors(v));
            let (mut i, mut j) = (0, 0);
            let mut out = Vec::new();
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        out.push(a[i]);
                        i += 1;
                        j += 1;
                    }
                }
            }
            out
        };
        match self {
            Measure::CommonNeighbors => common().len() as f64,
            Measure::Jaccard => {
                let c = common().len();
                let union = net.degree(u) + net.degree(v) - c;
                if union == 0 {
                    0.0
                } else {
                    c as f64 / union as f64
                }
            }
            Measure::AdamicAdar => common()
                .into_iter()
                .map(|z| net.degree(z))
                .filter(|&d| d >= 2)
                .map(|d| 1.0 / (d as f64).ln())
                .sum(),
            Measure::Random(seed) => {
                let (a, b) = ordered(u, v);
                let mut x = seed ^ (a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (b as u64).rotate_left(32);
                // splitmix64 finalizer
                x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
                x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
                x ^= x >> 31;
                (x >> 11) as f64 / (1u64 << 53) as f64
            }
        }
    }

    pub fn score(self, net: &CitationNetwork, u: &str, v: &str) -> Result<f64> {
        if u == v {
            return Err(Error::SelfPair(u.to_owned()));
        }
        Ok(self.score_indices(net, net.require(u)?, net.require(v)?))
    }
}

pub fn common_neighbors(net: &CitationNetwork, u: &str, v: &str) -> Result<f64> {
    Measure::CommonNeighbors.score(net, u, v)
}

pub fn jaccard(net: &CitationNetwork, u: &str, v: &str) -> Result<f64> {
    Measure::Jaccard.score(net, u, v)
}

pub fn adamic_adar(net: &CitationNetwork, u: &str, v: &str) -> Result<f64> {
    Measure::AdamicAdar.score(net, u, v)
}

/// `count` distinct node pairs that are neither training nor test edges.
pub fn sample_negatives(split: &TimeSlicedSplit, count: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let n = split.train.n_nodes();
    let total = n * n.saturating_sub(1) / 2;
    let test: HashSet<(usize, usize)> = split.test_edges.iter().copied().collect();
    let available = total - split.train.n_edges() - test.len();
    if available < count {
        return Err(Error::InsufficientNegatives {
            needed: count,
            available,
        });
    }
    let usable = |u: usize, v: usize| !split.train.has_edge(u, v) && !test.contains(&(u, v));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if available <= 4 * count || total <= 200_000 {
        let mut all: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| usable(u, v))
            .collect();
        all.shuffle(&mut rng);
        all.truncate(count);
        return Ok(all);
    }
    let mut picked = Vec::with_capacity(count);
    let mut seen = HashSet::new();
    while picked.len() < count {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let e = ordered(u, v);
        if usable(e.0, e.1) && seen.insert(e) {
            picked.push(e);
        }
    }
    Ok(picked)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkEvaluation {
    pub measure: String,
    pub auc: f64,
    pub precision_at_k: BTreeMap<usize, f64>,
    pub seed: u64,
    pub positives: usize,
    pub negatives: usize,
    pub train_nodes: usize,
    pub train_edges: usize,
}

/// Scores test edges against an equal number of seeded negative pairs.
pub fn evaluate_time_sliced(split: &TimeSlicedSplit, measure: Measure, seed: u64) -> Result<LinkEvaluation> {
    if split.test_edges.is_empty() {
        return Err(Error::Empty("time-sliced split has no test edges".into()));
    }
    let negatives = sample_negatives(split, split.test_edges.len(), seed)?;
    let net = &split.train;
    let score = |pairs: &[(usize, usize)]| -> Vec<f64> {
        pairs.par_iter().map(|&(u, v)| measure.score_indices(net, u, v)).collect()
    };
    let pos = score(&split.test_edges);
    let neg = score(&negatives);
    let auc = evalkit::auc_from_scores(&pos, &neg)?;

    let key = |&(u, v): &(usize, usize)| format!("{}\t{}", net.name(u), net.name(v));
    let positive_keys: HashSet<String> = split.test_edges.iter().map(key).collect();
    let pool = RankedList::descending(
        split
            .test_edges
            .iter()
            .zip(&pos)
            .chain(negatives.iter().zip(&neg))
            .map(|(p, &s)| (key(p), s)),
    );
    let precision_at_k = PRECISION_KS
        .iter()
        .map(|&k| {
            let top = pool.top(k);
            let hits = top.iter().filter(|i| positive_keys.contains(&i.key)).count();
            (k, if top.is_empty() { 0.0 } else { hits as f64 / top.len() as f64 })
        })
        .collect();
    Ok(LinkEvaluation {
        measure: measure.name().to_owned(),
        auc,
        precision_at_k,
        seed,
        positives: pos.len(),
        negatives: neg.len(),
        train_nodes: net.n_nodes(),
        train_edges: net.n_edges(),
    })
}

/// Degree histogram, handy for reports.
pub fn degree_counts(net: &CitationNetwork) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for i in 0..net.n_nodes() {
        *out.entry(net.degree(i)).or_default() += 1;
    }
    out
}

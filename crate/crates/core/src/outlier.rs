//! Outlier-based closed discovery.
//!
//! Documents of both domains are projected to two principal components and
//! clustered. A document whose domain differs from its cluster's majority is
//! an outlier; outliers are where bridging terms are looked for first.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, Document, Domain, DomainPairCorpus, PsvSchema};
use crate::error::{Error, Result};
use crate::textprep::{self, PreprocessConfig};
use crate::vectorspace::{self, WeightedMatrix};

pub const DEFAULT_SEED: u64 = 42;
pub const MAX_ITERATIONS: usize = 300;

/// Keeps the columns whose document frequency is at least `min_df`.
pub fn filter_min_df(matrix: &WeightedMatrix, min_df: u32) -> WeightedMatrix {
    let df = matrix.column_df();
    matrix.select_columns(|c| df[c] >= min_df)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pca2 {
    /// Projected `(pc1, pc2)` per row.
    pub coords: Vec<[f64; 2]>,
    pub components: [Vec<f64>; 2],
    pub eigenvalues: [f64; 2],
    pub mean: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

struct Covariance<'a> {
    x: &'a WeightedMatrix,
    mean: Vec<f64>,
}

impl Covariance<'_> {
    /// `C v = X_c^T X_c v / (n - 1)` without forming the centered matrix.
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let shift = dot(&self.mean, v);
        let xv: Vec<f64> = (0..self.x.n_rows())
            .into_par_iter()
            .map(|r| self.x.row(r).map(|(c, w)| w * v[c]).sum::<f64>() - shift)
            .collect();
        let mut out = vec![0.0; v.len()];
        for (r, s) in xv.iter().enumerate() {
            for (c, w) in self.x.row(r) {
                out[c] += w * s;
            }
        }
        let u_sum: f64 = xv.iter().sum();
        let denom = (self.x.n_rows() - 1) as f64;
        out.iter_mut()
            .zip(&self.mean)
            .for_each(|(o, m)| *o = (*o - m * u_sum) / denom);
        out
    }
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn power_iteration(apply: impl Fn(&[f64]) -> Vec<f64>, start: Vec<f64>) -> (Vec<f64>, f64) {
    let mut v = start;
    normalize(&mut v);
    let mut lambda = 0.0;
    for _ in 0..20_000 {
        let mut w = apply(&v);
        lambda = normalize(&mut w);
        if lambda == 0.0 {
            return (v, 0.0);
        }
        let delta: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if delta < 1e-13 {
            break;
        }
    }
    (v, lambda)
}

/// Any unit vector orthogonal to `u`, picked deterministically.
fn orthogonal_to(u: &[f64]) -> Vec<f64> {
    let j = (0..u.len())
        .min_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()))
        .unwrap_or(0);
    let mut e = vec![0.0; u.len()];
    e[j] = 1.0;
    let p = u[j];
    e.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
    normalize(&mut e);
    e
}

/// Top-two principal components by power iteration with deflation.
pub fn reduce_pca2(matrix: &WeightedMatrix) -> Result<Pca2> {
    let (n, d) = (matrix.n_rows(), matrix.n_cols());
    if n < 2 || d < 2 {
        return Err(Error::Dimension(format!(
            "PCA needs at least 2 rows and 2 columns, got {n}x{d}"
        )));
    }
    let mean: Vec<f64> = matrix.column_sums().into_iter().map(|s| s / n as f64).collect();
    let cov = Covariance { x: matrix, mean };
    // Column variances as a start vector: never orthogonal to a dominant
    // direction carried by high-variance columns.
    let mut sq = vec![0.0; d];
    for r in 0..n {
        for (c, w) in matrix.row(r) {
            sq[c] += w * w;
        }
    }
    let e: Vec<f64> = sq
        .iter()
        .zip(&cov.mean)
        .map(|(s, m)| ((s - n as f64 * m * m) / (n - 1) as f64).max(0.0))
        .collect();
    let start: Vec<f64> = e
        .iter()
        .enumerate()
        .map(|(i, v)| v + 1e-3 * (1.0 + i as f64 / d as f64))
        .collect();
    let scale = e.iter().copied().fold(0.0, f64::max);
    let (mut v1, l1) = power_iteration(|v| cov.apply(v), start.clone());
    if l1 <= 1e-12 * scale.max(1.0) || l1 <= 1e-300 {
        return Err(Error::RankDeficient("all rows are identical".into()));
    }
    fix_sign(&mut v1);
    let deflated = |v: &[f64]| {
        let mut w = cov.apply(v);
        let p = dot(&v1, v);
        w.iter_mut().zip(&v1).for_each(|(x, y)| *x -= l1 * p * y);
        // keep the iterate out of the first component's span
        let q = dot(&v1, &w);
        w.iter_mut().zip(&v1).for_each(|(x, y)| *x -= q * y);
        w
    };
    let mut s2 = start;
    let p = dot(&v1, &s2);
    s2.iter_mut().zip(&v1).for_each(|(x, y)| *x -= p * y);
    if normalize(&mut s2) == 0.0 {
        s2 = orthogonal_to(&v1);
    }
    let (mut v2, mut l2) = power_iteration(deflated, s2);
    if l2 <= 1e-12 * l1 {
        v2 = orthogonal_to(&v1);
        l2 = 0.0;
    }
    fix_sign(&mut v2);

    let s1 = dot(&cov.mean, &v1);
    let s2 = dot(&cov.mean, &v2);
    let coords = (0..n)
        .into_par_iter()
        .map(|r| {
            let (mut a, mut b) = (0.0, 0.0);
            for (c, w) in matrix.row(r) {
                a += w * v1[c];
                b += w * v2[c];
            }
            [a - s1, b - s2]
        })
        .collect();
    Ok(Pca2 {
        coords,
        components: [v1, v2],
        eigenvalues: [l1, l2],
        mean: cov.mean,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub seed: u64,
    pub iterations: usize,
    /// Within-cluster sum of squares after each assignment step.
    pub objective_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.random_range(0..points.len())].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut idx = points.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                if r < *w {
                    idx = i;
                    break;
                }
                r -= w;
            }
            idx
        } else {
            rng.random_range(0..points.len())
        };
        centroids.push(points[pick].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

/// Lloyd's algorithm with k-means++ seeding. An empty cluster keeps its
/// previous centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<Clustering> {
    if k == 0 || k > points.len() {
        return Err(Error::InvalidK { k, points: points.len() });
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Dimension("points differ in dimension".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(points, k, &mut rng);
    let mut labels: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let assigned: Vec<(usize, f64)> = points.par_iter().map(|p| nearest(p, &centroids)).collect();
        history.push(assigned.iter().map(|a| a.1).sum());
        let next: Vec<usize> = assigned.into_iter().map(|a| a.0).collect();
        if next == labels {
            break;
        }
        labels = next;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            sums[l].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        for ((c, s), n) in centroids.iter_mut().zip(sums).zip(counts) {
            if n > 0 {
                *c = s.into_iter().map(|x| x / n as f64).collect();
            }
        }
    }
    Ok(Clustering {
        labels,
        centroids,
        seed,
        iterations,
        objective_history: history,
    })
}

pub fn wcss(points: &[Vec<f64>], c: &Clustering) -> f64 {
    points
        .iter()
        .zip(&c.labels)
        .map(|(p, &l)| sq_dist(p, &c.centroids[l]))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub doc_ids: Vec<String>,
    pub clustering: Clustering,
}

impl ClusterAssignment {
    pub fn k(&self) -> usize {
        self.clustering.centroids.len()
    }

    pub fn cluster_of(&self, row: usize) -> usize {
        self.clustering.labels[row]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub size: usize,
    pub count_a: usize,
    pub count_c: usize,
    pub majority: Domain,
    /// Equal counts; the majority then defaults to domain A.
    pub majority_tie: bool,
    /// Row indices of the minority-domain documents.
    pub outlier_rows: Vec<usize>,
    pub outlier_ids: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub k: usize,
    pub seed: u64,
    pub clusters: Vec<ClusterSummary>,
}

impl OutlierReport {
    pub fn outlier_count(&self) -> usize {
        self.clusters.iter().map(|c| c.outlier_rows.len()).sum()
    }

    /// Outlier rows grouped by the outliers' own domain.
    pub fn rows_by_domain(&self, corpus: &DomainPairCorpus) -> BTreeMap<Domain, Vec<usize>> {
        let mut out: BTreeMap<Domain, Vec<usize>> = BTreeMap::new();
        for c in &self.clusters {
            for &r in &c.outlier_rows {
                out.entry(corpus.documents[r].domain).or_default().push(r);
            }
        }
        out.values_mut().for_each(|v| v.sort_unstable());
        out
    }
}

/// Rows of `assignment` are the documents of `corpus`, in order.
pub fn detect_outliers(
    assignment: &ClusterAssignment,
    corpus: &DomainPairCorpus,
) -> Result<OutlierReport> {
    let docs = &corpus.documents;
    if assignment.doc_ids.len() != docs.len()
        || assignment.doc_ids.iter().zip(docs).any(|(id, d)| *id != d.id)
    {
        return Err(Error::Dimension(
            "cluster assignment rows do not match the corpus documents".into(),
        ));
    }
    let k = assignment.k();
    let mut clusters: Vec<ClusterSummary> = (0..k)
        .map(|cluster| ClusterSummary {
            cluster,
            size: 0,
            count_a: 0,
            count_c: 0,
            majority: Domain::A,
            majority_tie: false,
            outlier_rows: vec![],
            outlier_ids: vec![],
        })
        .collect();
    for (r, d) in docs.iter().enumerate() {
        let c = &mut clusters[assignment.cluster_of(r)];
        c.size += 1;
        match d.domain {
            Domain::A => c.count_a += 1,
            Domain::C => c.count_c += 1,
        }
    }
    for c in &mut clusters {
        c.majority = if c.count_c > c.count_a { Domain::C } else { Domain::A };
        c.majority_tie = c.size > 0 && c.count_a == c.count_c;
    }
    for (r, d) in docs.iter().enumerate() {
        let c = &mut clusters[assignment.cluster_of(r)];
        if d.domain != c.majority {
            c.outlier_rows.push(r);
            c.outlier_ids.push(d.id.clone());
        }
    }
    Ok(OutlierReport {
        k,
        seed: assignment.clustering.seed,
        clusters,
    })
}

/// Writes the outlier documents in the corpus PSV schema.
pub fn export_outliers(report: &OutlierReport, corpus: &DomainPairCorpus, path: &Path) -> Result<()> {
    let mut rows: Vec<usize> = report
        .clusters
        .iter()
        .flat_map(|c| c.outlier_rows.iter().copied())
        .collect();
    rows.sort_unstable();
    let docs: Vec<&Document> = rows.iter().map(|&r| &corpus.documents[r]).collect();
    corpus::write_psv(path, docs, &PsvSchema::default())
}

/// `x,y,cluster,domain` per document.
pub fn scatter_csv(pca: &Pca2, assignment: &ClusterAssignment, corpus: &DomainPairCorpus) -> String {
    let mut out = String::from("x,y,cluster,domain\n");
    for (r, p) in pca.coords.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p[0],
            p[1],
            assignment.cluster_of(r),
            corpus.documents[r].domain
        );
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSpace {
    Pca2,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierConfig {
    pub k: usize,
    pub seed: u64,
    pub min_df: u32,
    pub space: ClusterSpace,
}

impl Default for OutlierConfig {
    fn default() -> Self {
        OutlierConfig {
            k: 2,
            seed: DEFAULT_SEED,
            min_df: 5,
            space: ClusterSpace::Pca2,
        }
    }
}

pub struct OutlierRun {
    pub pca: Pca2,
    pub assignment: ClusterAssignment,
    pub report: OutlierReport,
    pub terms_kept: usize,
}

/// Vocabulary, TF-IDF, df filter, PCA, k-means and outlier detection.
pub fn run(corpus: &DomainPairCorpus, prep: &PreprocessConfig, cfg: &OutlierConfig) -> Result<OutlierRun> {
    let vocab = textprep::build_vocabulary(corpus, prep)?;
    let counts = vectorspace::bow(corpus, &vocab, prep)?;
    let counts = filter_min_df(&counts, cfg.min_df);
    let weighted = vectorspace::tfidf(&counts)?;
    let pca = reduce_pca2(&weighted)?;
    let points: Vec<Vec<f64>> = match cfg.space {
        ClusterSpace::Pca2 => pca.coords.iter().map(|p| p.to_vec()).collect(),
        ClusterSpace::Full => weighted.to_dense(),
    };
    let clustering = kmeans(&points, cfg.k, cfg.seed)?;
    let assignment = ClusterAssignment {
        doc_ids: weighted.row_ids().to_vec(),
        clustering,
    };
    let report = detect_outliers(&assignment, corpus)?;
    Ok(OutlierRun {
        pca,
        assignment,
        report,
        terms_kept: weighted.n_cols(),
    })
}

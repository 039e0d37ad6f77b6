//! Domain-pair bibliographic corpora and their gold-standard bridging terms.
//!
//! Corpora are stored as pipe-separated text (optionally gzip-compressed) with
//! the header `pmid|domain|pub_date|title|abstract|mesh`. MeSH headings are
//! `;`-separated inside their field and dates are ISO-8601.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resources;
use crate::textprep::Normalizer;
use crate::util;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Domain {
    A,
    C,
}

impl Domain {
    pub const BOTH: [Domain; 2] = [Domain::A, Domain::C];

    pub fn other(self) -> Domain {
        match self {
            Domain::A => Domain::C,
            Domain::C => Domain::A,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::A => "A",
            Domain::C => "C",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub abstract_text: String,
    pub mesh_headings: Vec<String>,
    pub pub_date: NaiveDate,
    pub domain: Domain,
}

/// Descriptive metadata for a domain pair, everything except the documents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub label_a: String,
    pub label_c: String,
    pub query_terms_a: Vec<String>,
    pub query_terms_c: Vec<String>,
    pub cutoff_date: NaiveDate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainPairCorpus {
    pub label_a: String,
    pub label_c: String,
    pub documents: Vec<Document>,
    pub query_terms_a: Vec<String>,
    pub query_terms_c: Vec<String>,
    pub cutoff_date: NaiveDate,
}

impl DomainPairCorpus {
    pub fn new(meta: CorpusMeta, documents: Vec<Document>) -> Result<Self> {
        if meta.query_terms_a.is_empty() || meta.query_terms_c.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "domain pair {}/{} needs query terms for both domains",
                meta.label_c, meta.label_a
            )));
        }
        Ok(DomainPairCorpus {
            label_a: meta.label_a,
            label_c: meta.label_c,
            documents,
            query_terms_a: meta.query_terms_a,
            query_terms_c: meta.query_terms_c,
            cutoff_date: meta.cutoff_date,
        })
    }

    pub fn meta(&self) -> CorpusMeta {
        CorpusMeta {
            label_a: self.label_a.clone(),
            label_c: self.label_c.clone(),
            query_terms_a: self.query_terms_a.clone(),
            query_terms_c: self.query_terms_c.clone(),
            cutoff_date: self.cutoff_date,
        }
    }

    pub fn label(&self, domain: Domain) -> &str {
        match domain {
            Domain::A => &self.label_a,
            Domain::C => &self.label_c,
        }
    }

    pub fn docs_in(&self, domain: Domain) -> impl Iterator<Item = &Document> {
        self.documents.iter().filter(move |d| d.domain == domain)
    }

    pub fn count(&self, domain: Domain) -> usize {
        self.docs_in(domain).count()
    }

    /// Copy of this corpus restricted to the given documents.
    pub fn with_documents(&self, documents: Vec<Document>) -> Self {
        DomainPairCorpus {
            documents,
            ..self.clone_meta_only()
        }
    }

    fn clone_meta_only(&self) -> Self {
        DomainPairCorpus {
            label_a: self.label_a.clone(),
            label_c: self.label_c.clone(),
            documents: Vec::new(),
            query_terms_a: self.query_terms_a.clone(),
            query_terms_c: self.query_terms_c.clone(),
            cutoff_date: self.cutoff_date,
        }
    }
}

/// Column names of the PSV layout. The default matches the shipped snapshots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsvSchema {
    pub id: String,
    pub domain: String,
    pub pub_date: String,
    pub title: String,
    pub abstract_text: String,
    pub mesh: String,
}

impl Default for PsvSchema {
    fn default() -> Self {
        PsvSchema {
            id: "pmid".into(),
            domain: "domain".into(),
            pub_date: "pub_date".into(),
            title: "title".into(),
            abstract_text: "abstract".into(),
            mesh: "mesh".into(),
        }
    }
}

impl PsvSchema {
    fn header(&self) -> String {
        [
            &self.id,
            &self.domain,
            &self.pub_date,
            &self.title,
            &self.abstract_text,
            &self.mesh,
        ]
        .map(String::as_str)
        .join("|")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowRejection {
    /// 1-based line number in the decompressed file (the header is line 1).
    pub line: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows_read: usize,
    pub accepted: usize,
    pub rejections: Vec<RowRejection>,
}

struct ColumnIndex {
    id: usize,
    domain: usize,
    pub_date: usize,
    title: usize,
    abstract_text: usize,
    mesh: usize,
    width: usize,
}

impl ColumnIndex {
    fn resolve(path: &Path, header: &str, schema: &PsvSchema) -> Result<Self> {
        let cols: Vec<&str> = header.split('|').map(str::trim).collect();
        let find = |name: &str| {
            cols.iter()
                .position(|c| c.eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::Format {
                    path: path.to_path_buf(),
                    message: format!("header lacks column {name:?} (found {header:?})"),
                })
        };
        Ok(ColumnIndex {
            id: find(&schema.id)?,
            domain: find(&schema.domain)?,
            pub_date: find(&schema.pub_date)?,
            title: find(&schema.title)?,
            abstract_text: find(&schema.abstract_text)?,
            mesh: find(&schema.mesh)?,
            width: cols.len(),
        })
    }
}

fn parse_domain(raw: &str, label_a: &str, label_c: &str) -> Option<Domain> {
    let raw = raw.trim();
    if raw.eq_ignore_ascii_case("a") || raw.eq_ignore_ascii_case(label_a) {
        Some(Domain::A)
    } else if raw.eq_ignore_ascii_case("c") || raw.eq_ignore_ascii_case(label_c) {
        Some(Domain::C)
    } else {
        None
    }
}

pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    NaiveDate::from_str(raw.trim()).ok()
}

fn split_mesh(field: &str) -> Vec<String> {
    field
        .split(';')
        .map(str::trim)
        .filter(|h| !h.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Parses PSV text into documents. Rows that cannot be used are collected in
/// the report instead of aborting the load.
pub fn parse_psv(
    path: &Path,
    text: &str,
    schema: &PsvSchema,
    meta: &CorpusMeta,
) -> Result<(Vec<Document>, LoadReport)> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.by_ref().find(|(_, l)| !l.trim().is_empty()) else {
        return Ok((Vec::new(), LoadReport::default()));
    };
    let cols = ColumnIndex::resolve(path, header.trim_end_matches('\r'), schema)?;

    let mut report = LoadReport::default();
    let mut documents = Vec::new();
    let mut seen: HashSet<(String, Domain)> = HashSet::new();

    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        report.rows_read += 1;
        let mut reject = |reason: String| {
            report.rejections.push(RowRejection {
                line: idx + 1,
                reason,
            })
        };
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != cols.width {
            reject(format!(
                "expected {} fields, found {}",
                cols.width,
                fields.len()
            ));
            continue;
        }
        let id = fields[cols.id].trim();
        if id.is_empty() {
            reject("missing id".into());
            continue;
        }
        let Some(domain) = parse_domain(fields[cols.domain], &meta.label_a, &meta.label_c) else {
            reject(format!("unknown domain label {:?}", fields[cols.domain]));
            continue;
        };
        let Some(pub_date) = parse_date(fields[cols.pub_date]) else {
            reject(format!("unparsable date {:?}", fields[cols.pub_date]));
            continue;
        };
        if pub_date > meta.cutoff_date {
            reject(format!(
                "published {pub_date} after cutoff {}",
                meta.cutoff_date
            ));
            continue;
        }
        if !seen.insert((id.to_owned(), domain)) {
            reject(format!("duplicate id {id} in domain {domain}"));
            continue;
        }
        documents.push(Document {
            id: id.to_owned(),
            title: fields[cols.title].to_owned(),
            abstract_text: fields[cols.abstract_text].to_owned(),
            mesh_headings: split_mesh(fields[cols.mesh]),
            pub_date,
            domain,
        });
    }
    report.accepted = documents.len();
    Ok((documents, report))
}

/// Loads a domain-pair corpus from a (gzip) PSV snapshot.
pub fn load_psv(
    path: &Path,
    schema: &PsvSchema,
    meta: CorpusMeta,
) -> Result<(DomainPairCorpus, LoadReport)> {
    util::require_fixture(path, "corpus snapshot")?;
    let text = util::read_text(path)?;
    let (documents, report) = parse_psv(path, &text, schema, &meta)?;
    if !report.rejections.is_empty() {
        log::warn!(
            "{}: rejected {} of {} rows",
            path.display(),
            report.rejections.len(),
            report.rows_read
        );
    }
    Ok((DomainPairCorpus::new(meta, documents)?, report))
}

fn clean_field(s: &str) -> String {
    s.chars()
        .map(|c| if matches!(c, '|' | '\n' | '\r') { ' ' } else { c })
        .collect()
}

pub fn to_psv<'a>(docs: impl IntoIterator<Item = &'a Document>, schema: &PsvSchema) -> String {
    let mut out = schema.header();
    out.push('\n');
    for d in docs {
        let mesh: Vec<String> = d
            .mesh_headings
            .iter()
            .map(|h| clean_field(h).replace(';', ","))
            .collect();
        out.push_str(&format!(
            "{}|{}|{}|{}|{}|{}\n",
            clean_field(&d.id),
            d.domain,
            d.pub_date.format("%Y-%m-%d"),
            clean_field(&d.title),
            clean_field(&d.abstract_text),
            mesh.join(";")
        ));
    }
    out
}

/// Writes documents in the corpus PSV schema (gzip when `path` ends in `.gz`).
pub fn write_psv<'a>(
    path: &Path,
    docs: impl IntoIterator<Item = &'a Document>,
    schema: &PsvSchema,
) -> Result<()> {
    util::write_text(path, &to_psv(docs, schema))
}

/// Removes every document whose id occurs under both domain labels.
pub fn exclude_shared_records(corpus: &DomainPairCorpus) -> DomainPairCorpus {
    let mut labels: HashMap<&str, [bool; 2]> = HashMap::new();
    for d in &corpus.documents {
        let slot = labels.entry(d.id.as_str()).or_default();
        slot[d.domain as usize] = true;
    }
    let kept = corpus
        .documents
        .iter()
        .filter(|d| labels[d.id.as_str()] != [true, true])
        .cloned()
        .collect();
    corpus.with_documents(kept)
}

/// Ids present with both domain labels.
pub fn shared_ids(corpus: &DomainPairCorpus) -> Vec<String> {
    let a: HashSet<&str> = corpus.docs_in(Domain::A).map(|d| d.id.as_str()).collect();
    let mut shared: Vec<String> = corpus
        .docs_in(Domain::C)
        .map(|d| d.id.as_str())
        .filter(|id| a.contains(id))
        .map(str::to_owned)
        .collect();
    shared.sort();
    shared.dedup();
    shared
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldTerm {
    /// The term as listed in the resource file.
    pub surface: String,
    /// The same term after textprep normalization.
    pub normalized: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldStandard {
    pub dataset_name: String,
    pub b_terms: Vec<GoldTerm>,
}

impl GoldStandard {
    pub fn from_lines<'a>(
        dataset_name: &str,
        lines: impl IntoIterator<Item = &'a str>,
        normalizer: &Normalizer,
    ) -> Result<Self> {
        let b_terms: Vec<GoldTerm> = lines
            .into_iter()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|surface| GoldTerm {
                surface: surface.to_owned(),
                normalized: normalizer.normalize_phrase(surface),
            })
            .collect();
        if b_terms.is_empty() {
            return Err(Error::EmptyGold(dataset_name.to_owned()));
        }
        Ok(GoldStandard {
            dataset_name: dataset_name.to_owned(),
            b_terms,
        })
    }

    /// Reads a `<dataset>.gold.txt` file: one term per line, `#` comments.
    pub fn from_file(path: &Path, normalizer: &Normalizer) -> Result<Self> {
        util::require_fixture(path, "gold standard")?;
        let text = util::read_text(path)?;
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_suffix(".gold.txt"))
            .unwrap_or("custom");
        Self::from_lines(name, text.lines(), normalizer)
    }

    pub fn len(&self) -> usize {
        self.b_terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_terms.is_empty()
    }

    pub fn normalized_set(&self) -> std::collections::BTreeSet<String> {
        self.b_terms.iter().map(|t| t.normalized.clone()).collect()
    }

    pub fn contains(&self, normalized: &str) -> bool {
        self.b_terms.iter().any(|t| t.normalized == normalized)
    }
}

/// Built-in gold b-terms for the three benchmark domain pairs.
pub fn load_gold(dataset_name: &str, normalizer: &Normalizer) -> Result<GoldStandard> {
    let dataset = BenchmarkDataset::from_name(dataset_name)?;
    GoldStandard::from_lines(
        dataset.name(),
        resources::gold_terms(dataset).lines(),
        normalizer,
    )
}

/// The three benchmark domain pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BenchmarkDataset {
    RsDfo,
    MigMg,
    AutCan,
}

impl BenchmarkDataset {
    pub const ALL: [BenchmarkDataset; 3] = [
        BenchmarkDataset::RsDfo,
        BenchmarkDataset::MigMg,
        BenchmarkDataset::AutCan,
    ];

    pub fn from_name(name: &str) -> Result<Self> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .flat_map(|c| c.to_lowercase())
            .collect();
        match key.as_str() {
            "rsdfo" | "swanson1986" => Ok(BenchmarkDataset::RsDfo),
            "migmg" | "swanson1988" => Ok(BenchmarkDataset::MigMg),
            "autcan" | "petric2009" => Ok(BenchmarkDataset::AutCan),
            _ => Err(Error::UnknownDataset(name.to_owned())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkDataset::RsDfo => "RS-DFO",
            BenchmarkDataset::MigMg => "Mig-Mg",
            BenchmarkDataset::AutCan => "Aut-CaN",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            BenchmarkDataset::RsDfo => "rs-dfo",
            BenchmarkDataset::MigMg => "mig-mg",
            BenchmarkDataset::AutCan => "aut-can",
        }
    }

    pub fn snapshot_file(self) -> &'static str {
        match self {
            BenchmarkDataset::RsDfo => "swanson_1986.psv.gz",
            BenchmarkDataset::MigMg => "swanson_1988.psv.gz",
            BenchmarkDataset::AutCan => "petric_2009.psv.gz",
        }
    }

    pub fn meta(self) -> CorpusMeta {
        let (c, a, qc, qa, cutoff) = match self {
            BenchmarkDataset::RsDfo => ("Raynaud", "Fish oil", "raynaud*", "fish oil", (1985, 11, 30)),
            BenchmarkDataset::MigMg => ("Migraine", "Magnesium", "migraine", "magnesium", (1987, 12, 31)),
            BenchmarkDataset::AutCan => ("Autism", "Calcineurin", "autis*", "calcineurin", (2007, 12, 31)),
        };
        CorpusMeta {
            label_a: a.into(),
            label_c: c.into(),
            query_terms_a: vec![qa.into()],
            query_terms_c: vec![qc.into()],
            cutoff_date: NaiveDate::from_ymd_opt(cutoff.0, cutoff.1, cutoff.2)
                .expect("valid cutoff"),
        }
    }

    /// Number of listed bridging terms per dataset.
    pub fn gold_size(self) -> usize {
        match self {
            BenchmarkDataset::RsDfo => 3,
            BenchmarkDataset::MigMg => 43,
            BenchmarkDataset::AutCan => 13,
        }
    }
}

impl fmt::Display for BenchmarkDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-domain document counts, the first row of a dataset summary.
pub fn document_counts(corpus: &DomainPairCorpus) -> BTreeMap<Domain, usize> {
    Domain::BOTH.iter().map(|&d| (d, corpus.count(d))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::PreprocessConfig;
    use proptest::prelude::*;

    fn meta() -> CorpusMeta {
        BenchmarkDataset::RsDfo.meta()
    }

    fn doc(id: &str, domain: Domain) -> Document {
        Document {
            id: id.into(),
            title: format!("title {id}"),
            abstract_text: String::new(),
            mesh_headings: vec![],
            pub_date: NaiveDate::from_ymd_opt(1980, 1, 1).unwrap(),
            domain,
        }
    }

    fn parse(text: &str) -> (Vec<Document>, LoadReport) {
        parse_psv(Path::new("mem.psv"), text, &PsvSchema::default(), &meta()).unwrap()
    }

    #[test]
    fn header_only_yields_empty_corpus() {
        let (docs, report) = parse("pmid|domain|pub_date|title|abstract|mesh\n");
        assert!(docs.is_empty());
        assert!(report.rejections.is_empty());
    }

    #[test]
    fn empty_abstract_is_accepted() {
        let (docs, report) =
            parse("pmid|domain|pub_date|title|abstract|mesh\n1|C|1980-02-03|Raynaud phenomenon||\n");
        assert_eq!(report.accepted, 1);
        assert_eq!(docs[0].abstract_text, "");
        assert!(docs[0].mesh_headings.is_empty());
    }

    #[test]
    fn bad_rows_are_reported_not_fatal() {
        let text = "pmid|domain|pub_date|title|abstract|mesh\n\
                    |C|1980-01-01|no id||\n\
                    2|C|01/02/1980|bad date||\n\
                    3|B|1980-01-01|bad domain||\n\
                    4|A|1990-01-01|after cutoff||\n\
                    5|A|1980-01-01|ok|abs|Blood Viscosity; Humans\n\
                    5|A|1980-01-01|dup||\n\
                    6|Fish oil|1980-01-01|label domain||\n\
                    7|C|1980-01-01|too|few\n";
        let (docs, report) = parse(text);
        assert_eq!(report.rows_read, 8);
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].mesh_headings, vec!["Blood Viscosity", "Humans"]);
        assert_eq!(docs[1].domain, Domain::A);
        let lines: Vec<usize> = report.rejections.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![2, 3, 4, 5, 7, 9]);
    }

    #[test]
    fn header_columns_may_be_reordered() {
        let text = "title|pmid|mesh|abstract|pub_date|domain\nT|9||A|1980-01-01|C\n";
        let (docs, _) = parse(text);
        assert_eq!(docs[0].id, "9");
        assert_eq!(docs[0].title, "T");
    }

    #[test]
    fn missing_column_is_a_format_error() {
        let res = parse_psv(
            Path::new("x"),
            "pmid|domain|title\n",
            &PsvSchema::default(),
            &meta(),
        );
        assert!(matches!(res, Err(Error::Format { .. })));
    }

    #[test]
    fn missing_file_names_the_fixture() {
        let res = load_psv(Path::new("/nonexistent/x.psv.gz"), &PsvSchema::default(), meta());
        assert!(matches!(res, Err(Error::MissingFixture { .. })));
    }

    #[test]
    fn shared_records_removed_from_both_sides() {
        let docs = vec![
            doc("1", Domain::A),
            doc("2", Domain::A),
            doc("1", Domain::C),
            doc("3", Domain::C),
            doc("2", Domain::C),
        ];
        let corpus = DomainPairCorpus::new(meta(), docs).unwrap();
        let out = exclude_shared_records(&corpus);
        let ids: Vec<&str> = out.documents.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, vec!["3"]);
        assert!(shared_ids(&out).is_empty());
        assert_eq!(exclude_shared_records(&out), out);
    }

    #[test]
    fn disjoint_corpus_unchanged() {
        let corpus =
            DomainPairCorpus::new(meta(), vec![doc("1", Domain::A), doc("2", Domain::C)]).unwrap();
        assert_eq!(exclude_shared_records(&corpus), corpus);
    }

    #[test]
    fn gold_lists_have_published_sizes() {
        let norm = Normalizer::new(&PreprocessConfig::default());
        for ds in BenchmarkDataset::ALL {
            let gold = load_gold(ds.slug(), &norm).unwrap();
            assert_eq!(gold.len(), ds.gold_size(), "{ds}");
        }
    }

    #[test]
    fn rs_dfo_gold_terms() {
        let norm = Normalizer::new(&PreprocessConfig {
            stemming: false,
            ..PreprocessConfig::default()
        });
        let gold = load_gold("RS-DFO", &norm).unwrap();
        let terms: Vec<&str> = gold.b_terms.iter().map(|t| t.normalized.as_str()).collect();
        assert_eq!(
            terms,
            vec!["blood viscosity", "platelet aggregation", "vascular reactivity"]
        );
        let aut = load_gold("aut-can", &norm).unwrap();
        assert!(aut.contains("synaptic plasticity"));
        assert!(aut.contains("calmodulin"));
        let mig = load_gold("mig-mg", &norm).unwrap();
        assert!(mig.contains("serotonin"));
        assert!(mig.b_terms.iter().any(|t| t.surface.starts_with("spread")));
    }

    #[test]
    fn unknown_gold_dataset() {
        let norm = Normalizer::new(&PreprocessConfig::default());
        assert!(matches!(load_gold("nope", &norm), Err(Error::UnknownDataset(_))));
    }

    fn arb_doc() -> impl Strategy<Value = Document> {
        (
            "[0-9]{1,6}",
            prop::bool::ANY,
            "[A-Za-z ,.'-]{0,40}",
            "[A-Za-z ,.'-]{0,80}",
            prop::collection::vec("[A-Z][a-z]{1,8}( [A-Z][a-z]{1,8})?", 0..4),
            0u32..3000,
        )
            .prop_map(|(id, is_a, title, abs, mesh, day)| Document {
                id,
                title,
                abstract_text: abs,
                mesh_headings: mesh,
                pub_date: NaiveDate::from_ymd_opt(1970, 1, 1).unwrap()
                    + chrono::Duration::days(day as i64),
                domain: if is_a { Domain::A } else { Domain::C },
            })
    }

    proptest! {
        #[test]
        fn psv_round_trip(docs in prop::collection::vec(arb_doc(), 0..20)) {
            let mut seen = HashSet::new();
            let docs: Vec<Document> = docs
                .into_iter()
                .filter(|d| seen.insert((d.id.clone(), d.domain)))
                .collect();
            let text = to_psv(&docs, &PsvSchema::default());
            let (back, report) = parse(&text);
            prop_assert!(report.rejections.is_empty());
            let mut a = docs.clone();
            let mut b = back;
            a.sort_by(|x, y| (&x.id, x.domain).cmp(&(&y.id, y.domain)));
            b.sort_by(|x, y| (&x.id, x.domain).cmp(&(&y.id, y.domain)));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn exclusion_leaves_no_shared_ids(ids in prop::collection::vec((0u8..12, prop::bool::ANY), 0..30)) {
            let mut seen = HashSet::new();
            let docs: Vec<Document> = ids
                .into_iter()
                .filter(|p| seen.insert(*p))
                .map(|(id, a)| doc(&id.to_string(), if a { Domain::A } else { Domain::C }))
                .collect();
            let corpus = DomainPairCorpus::new(meta(), docs.clone()).unwrap();
            let out = exclude_shared_records(&corpus);
            // brute force over the id multiset
            for d in &docs {
                let both = docs.iter().any(|o| o.id == d.id && o.domain != d.domain);
                prop_assert_eq!(out.documents.contains(d), !both);
            }
        }
    }
}

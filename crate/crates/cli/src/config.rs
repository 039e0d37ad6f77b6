//! Run configuration: a TOML file of flat keys grouped in sections, then
//! `LBD_<SECTION>_<KEY>` environment overrides, then command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use lbd_core::corpus::BenchmarkDataset;
use lbd_core::crossbee::{HeuristicKind, HeuristicSpec};
use lbd_core::linkpred::{self, Measure};
use lbd_core::outlier::{ClusterSpace, OutlierConfig};
use lbd_core::textprep::{builtin_stopwords, FieldSelection, PreprocessConfig};
use serde::Serialize;

pub const ENV_PREFIX: &str = "LBD_";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Ingest,
    Closed,
    Open,
    Crossbee,
    Outlier,
    Rajolink,
    Linkpred,
}

impl Pipeline {
    pub const ALL: [Pipeline; 7] = [
        Pipeline::Ingest,
        Pipeline::Closed,
        Pipeline::Open,
        Pipeline::Crossbee,
        Pipeline::Outlier,
        Pipeline::Rajolink,
        Pipeline::Linkpred,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Ingest => "ingest",
            Pipeline::Closed => "closed",
            Pipeline::Open => "open",
            Pipeline::Crossbee => "crossbee",
            Pipeline::Outlier => "outlier",
            Pipeline::Rajolink => "rajolink",
            Pipeline::Linkpred => "linkpred",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    UnknownKey,
    BadValue,
    MissingFile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub field: String,
    pub kind: FindingKind,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Configuration rejected by validation.
#[derive(Debug)]
pub struct ConfigError {
    pub findings: Vec<Finding>,
}

impl ConfigError {
    /// True when every finding is a missing file.
    pub fn only_missing_files(&self) -> bool {
        self.findings.iter().all(|f| f.kind == FindingKind::MissingFile)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "configuration is invalid:")?;
        for x in &self.findings {
            writeln!(f, "  {x}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

const KNOWN: &[(&str, &[&str])] = &[
    ("run", &["pipeline", "dataset", "seed", "out", "threads"]),
    (
        "data",
        &[
            "dir",
            "corpus",
            "gold",
            "semantic_types",
            "second_level_dir",
            "rare_dir",
            "pair_corpus",
            "references",
            "choices",
        ],
    ),
    (
        "preprocess",
        &["fields", "ngram_max", "min_support", "stemming", "stopwords", "exclude_shared"],
    ),
    ("crossbee", &["heuristics", "weights"]),
    ("open", &["semantic_types"]),
    ("outlier", &["k", "min_df", "space"]),
    ("rajolink", &["semantic_types"]),
    ("linkpred", &["test_size", "measures", "projection"]),
];

pub const OPEN_DEFAULT_TYPES: [&str; 3] = [
    "Amino Acid, Peptide, or Protein",
    "Pathologic Function",
    "Phenomenon or Process",
];

pub const RAJOLINK_DEFAULT_TYPES: [&str; 2] =
    ["Enzymes and Coenzymes", "Amino Acids, Peptides, and Proteins"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataPaths {
    pub dir: PathBuf,
    pub corpus: PathBuf,
    pub gold: Option<PathBuf>,
    pub semantic_types: Option<PathBuf>,
    pub second_level_dir: PathBuf,
    pub rare_dir: PathBuf,
    pub pair_corpus: PathBuf,
    pub references: PathBuf,
    pub choices: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Citation,
    Cocitation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkpredConfig {
    pub test_size: usize,
    pub measures: Vec<Measure>,
    pub projection: Projection,
}

/// Fully resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    pub pipeline: Option<Pipeline>,
    pub dataset: BenchmarkDataset,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: usize,
    #[serde(skip)]
    pub interactive: bool,
    pub data: DataPaths,
    #[serde(serialize_with = "ser_preprocess")]
    pub preprocess: PreprocessConfig,
    pub stopwords_file: Option<PathBuf>,
    pub exclude_shared: bool,
    pub heuristics: Vec<HeuristicSpec>,
    pub weights: Vec<f64>,
    pub open_types: Vec<String>,
    pub outlier: OutlierConfig,
    pub rajolink_types: Vec<String>,
    pub linkpred: LinkpredConfig,
}

fn ser_preprocess<S: serde::Serializer>(p: &PreprocessConfig, s: S) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct View<'a> {
        fields: &'a str,
        ngram_max: usize,
        min_support: u32,
        stemming: bool,
        fingerprint: String,
    }
    View {
        fields: p.fields.as_str(),
        ngram_max: p.ngram_max,
        min_support: p.min_support,
        stemming: p.stemming,
        fingerprint: p.fingerprint(),
    }
    .serialize(s)
}

/// Command-line values that win over file and environment.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub pipeline: Option<Pipeline>,
    pub dataset: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub choices: Option<PathBuf>,
    pub interactive: bool,
}

fn parse_env_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}

/// Reads the file (if any) and merges the environment into it.
pub fn load_table(
    path: Option<&Path>,
    env: impl IntoIterator<Item = (String, String)>,
    findings: &mut Vec<Finding>,
) -> toml::Table {
    let mut table = toml::Table::new();
    if let Some(p) = path {
        match std::fs::read_to_string(p) {
            Ok(text) => match text.parse::<toml::Table>() {
                Ok(t) => table = t,
                Err(e) => findings.push(Finding {
                    field: p.display().to_string(),
                    kind: FindingKind::BadValue,
                    message: format!("not valid TOML: {}", e.message()),
                }),
            },
            Err(_) => findings.push(Finding {
                field: "--config".into(),
                kind: FindingKind::MissingFile,
                message: format!("{} cannot be read", p.display()),
            }),
        }
    }
    let mut env: Vec<(String, String)> = env
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    env.sort();
    for (k, v) in env {
        let rest = k[ENV_PREFIX.len()..].to_ascii_lowercase();
        let Some((section, key)) = rest.split_once('_') else {
            findings.push(Finding {
                field: k.clone(),
                kind: FindingKind::UnknownKey,
                message: "expected LBD_<SECTION>_<KEY>".into(),
            });
            continue;
        };
        let entry = table
            .entry(section.to_owned())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        if let Some(t) = entry.as_table_mut() {
            t.insert(key.to_owned(), parse_env_value(&v));
        }
    }
    table
}

struct Reader<'a> {
    table: &'a toml::Table,
    findings: &'a mut Vec<Finding>,
}

impl Reader<'_> {
    fn get(&self, section: &str, key: &str) -> Option<&toml::Value> {
        self.table.get(section)?.as_table()?.get(key)
    }

    fn bad(&mut self, section: &str, key: &str, message: String) {
        self.findings.push(Finding {
            field: format!("{section}.{key}"),
            kind: FindingKind::BadValue,
            message,
        });
    }

    fn str(&mut self, section: &str, key: &str) -> Option<String> {
        match self.get(section, key)? {
            toml::Value::String(s) => Some(s.clone()),
            other => {
                let t = other.type_str();
                self.bad(section, key, format!("expected a string, found {t}"));
                None
            }
        }
    }

    fn int(&mut self, section: &str, key: &str) -> Option<i64> {
        match self.get(section, key)? {
            toml::Value::Integer(i) => Some(*i),
            other => {
                let t = other.type_str();
                self.bad(section, key, format!("expected an integer, found {t}"));
                None
            }
        }
    }

    fn uint(&mut self, section: &str, key: &str, min: i64) -> Option<u64> {
        let v = self.int(section, key)?;
        if v < min {
            self.bad(section, key, format!("must be at least {min}, got {v}"));
            return None;
        }
        Some(v as u64)
    }

    fn bool(&mut self, section: &str, key: &str) -> Option<bool> {
        match self.get(section, key)? {
            toml::Value::Boolean(b) => Some(*b),
            other => {
                let t = other.type_str();
                self.bad(section, key, format!("expected a boolean, found {t}"));
                None
            }
        }
    }

    fn strings(&mut self, section: &str, key: &str) -> Option<Vec<String>> {
        let v = self.get(section, key)?.clone();
        let arr = match v {
            toml::Value::Array(a) => a,
            toml::Value::String(s) => s.split(',').map(|x| toml::Value::String(x.trim().into())).collect(),
            other => {
                self.bad(section, key, format!("expected a list of strings, found {}", other.type_str()));
                return None;
            }
        };
        let mut out = Vec::new();
        for x in arr {
            match x {
                toml::Value::String(s) => out.push(s),
                other => {
                    self.bad(section, key, format!("list item {other} is not a string"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn floats(&mut self, section: &str, key: &str) -> Option<Vec<f64>> {
        let toml::Value::Array(arr) = self.get(section, key)?.clone() else {
            self.bad(section, key, "expected a list of numbers".into());
            return None;
        };
        let mut out = Vec::new();
        for x in arr {
            match x {
                toml::Value::Float(f) => out.push(f),
                toml::Value::Integer(i) => out.push(i as f64),
                other => {
                    self.bad(section, key, format!("list item {other} is not a number"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn path(&mut self, section: &str, key: &str) -> Option<PathBuf> {
        self.str(section, key).map(PathBuf::from)
    }
}

fn unknown_keys(table: &toml::Table, findings: &mut Vec<Finding>) {
    for (section, value) in table {
        let Some((_, keys)) = KNOWN.iter().find(|(s, _)| s == section) else {
            let names: Vec<&str> = KNOWN.iter().map(|(s, _)| *s).collect();
            findings.push(Finding {
                field: section.clone(),
                kind: FindingKind::UnknownKey,
                message: format!("unknown section; valid sections: {}", names.join(", ")),
            });
            continue;
        };
        let Some(t) = value.as_table() else {
            findings.push(Finding {
                field: section.clone(),
                kind: FindingKind::BadValue,
                message: "expected a section".into(),
            });
            continue;
        };
        for key in t.keys() {
            if !keys.contains(&key.as_str()) {
                findings.push(Finding {
                    field: format!("{section}.{key}"),
                    kind: FindingKind::UnknownKey,
                    message: format!("unknown key; valid keys: {}", keys.join(", ")),
                });
            }
        }
    }
}

fn pipeline_names() -> String {
    Pipeline::ALL.map(Pipeline::name).join(", ")
}

/// Resolves a merged table plus overrides. Never touches the disk.
pub fn resolve(table: &toml::Table, ov: &Overrides, findings: &mut Vec<Finding>) -> Option<Config> {
    unknown_keys(table, findings);
    let mut r = Reader { table, findings };

    let mut pipeline = ov.pipeline;
    if pipeline.is_none() {
        if let Some(p) = r.str("run", "pipeline") {
            pipeline = Pipeline::parse(&p);
            if pipeline.is_none() {
                r.bad("run", "pipeline", format!("unknown pipeline {p:?}; valid names: {}", pipeline_names()));
            }
        }
    }
    let dataset_name = ov.dataset.clone().or_else(|| r.str("run", "dataset"));
    let dataset = match dataset_name {
        Some(n) => match BenchmarkDataset::from_name(&n) {
            Ok(d) => Some(d),
            Err(e) => {
                r.bad("run", "dataset", e.to_string());
                None
            }
        },
        None => {
            r.bad("run", "dataset", "no dataset given (use --dataset or run.dataset)".into());
            None
        }
    };
    let seed = ov.seed.or_else(|| r.uint("run", "seed", 0)).unwrap_or(42);
    let threads = ov
        .threads
        .or_else(|| r.uint("run", "threads", 0).map(|t| t as usize))
        .unwrap_or(0);
    let out_cfg = r.path("run", "out");

    let dir = r.path("data", "dir").unwrap_or_else(|| PathBuf::from("data"));

    let mut prep = dataset.map(PreprocessConfig::for_dataset).unwrap_or_default();
    if let Some(f) = r.str("preprocess", "fields") {
        match FieldSelection::parse(&f) {
            Some(x) => prep.fields = x,
            None => r.bad("preprocess", "fields", format!("unknown field selection {f:?}; use title or title+abstract")),
        }
    }
    if let Some(n) = r.uint("preprocess", "ngram_max", 1) {
        prep.ngram_max = n as usize;
    }
    if let Some(n) = r.uint("preprocess", "min_support", 1) {
        prep.min_support = n as u32;
    }
    if let Some(b) = r.bool("preprocess", "stemming") {
        prep.stemming = b;
    }
    let stopwords_file = r.path("preprocess", "stopwords");
    let exclude_shared = r.bool("preprocess", "exclude_shared").unwrap_or(true);

    let mut heuristics = HeuristicSpec::defaults();
    if let Some(names) = r.strings("crossbee", "heuristics") {
        let mut hs = Vec::new();
        for n in &names {
            match HeuristicKind::parse(n) {
                Some(k) => hs.push(HeuristicSpec::new(k)),
                None => {
                    let valid = HeuristicKind::ALL.map(HeuristicKind::name).join(", ");
                    r.bad("crossbee", "heuristics", format!("unknown heuristic {n:?}; valid names: {valid}"));
                }
            }
        }
        if hs.is_empty() && !names.is_empty() {
            hs = heuristics.clone();
        }
        if names.is_empty() {
            r.bad("crossbee", "heuristics", "at least one heuristic is required".into());
        }
        heuristics = hs;
    }
    let weights = r.floats("crossbee", "weights").unwrap_or_else(|| vec![1.0; heuristics.len()]);
    if weights.len() != heuristics.len() {
        r.bad(
            "crossbee",
            "weights",
            format!("{} weights for {} heuristics", weights.len(), heuristics.len()),
        );
    } else if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        r.bad("crossbee", "weights", "weights must be positive".into());
    }

    let open_types = r
        .strings("open", "semantic_types")
        .unwrap_or_else(|| OPEN_DEFAULT_TYPES.map(String::from).to_vec());
    let rajolink_types = r
        .strings("rajolink", "semantic_types")
        .unwrap_or_else(|| RAJOLINK_DEFAULT_TYPES.map(String::from).to_vec());

    let mut outlier = OutlierConfig {
        seed,
        ..OutlierConfig::default()
    };
    if let Some(k) = r.uint("outlier", "k", 1) {
        outlier.k = k as usize;
    }
    if let Some(m) = r.uint("outlier", "min_df", 1) {
        outlier.min_df = m as u32;
    }
    if let Some(s) = r.str("outlier", "space") {
        match s.as_str() {
            "pca2" => outlier.space = ClusterSpace::Pca2,
            "full" => outlier.space = ClusterSpace::Full,
            _ => r.bad("outlier", "space", format!("unknown space {s:?}; use pca2 or full")),
        }
    }

    let mut linkpred = LinkpredConfig {
        test_size: linkpred::DEFAULT_TEST_SIZE,
        measures: Measure::PROXIMITY.to_vec(),
        projection: Projection::Citation,
    };
    if let Some(n) = r.uint("linkpred", "test_size", 1) {
        linkpred.test_size = n as usize;
    }
    if let Some(ms) = r.strings("linkpred", "measures") {
        let mut out = Vec::new();
        for m in &ms {
            match Measure::parse(m) {
                Some(x) => out.push(x),
                None => {
                    let valid = Measure::PROXIMITY.map(Measure::name).join(", ");
                    r.bad("linkpred", "measures", format!("unknown measure {m:?}; valid names: {valid}"));
                }
            }
        }
        if !out.is_empty() {
            linkpred.measures = out;
        }
    }
    if let Some(p) = r.str("linkpred", "projection") {
        match p.as_str() {
            "citation" => linkpred.projection = Projection::Citation,
            "cocitation" => linkpred.projection = Projection::Cocitation,
            _ => r.bad("linkpred", "projection", format!("unknown projection {p:?}; use citation or cocitation")),
        }
    }

    let dataset = dataset?;
    let slug = dataset.slug();
    let corpus = r.path("data", "corpus").unwrap_or_else(|| dir.join(dataset.snapshot_file()));
    let data = DataPaths {
        gold: r.path("data", "gold"),
        semantic_types: r.path("data", "semantic_types"),
        second_level_dir: r
            .path("data", "second_level_dir")
            .unwrap_or_else(|| dir.join(slug).join("second-level")),
        rare_dir: r.path("data", "rare_dir").unwrap_or_else(|| dir.join(slug).join("rare")),
        pair_corpus: r.path("data", "pair_corpus").unwrap_or_else(|| corpus.clone()),
        references: r
            .path("data", "references")
            .unwrap_or_else(|| dir.join(format!("{slug}.references.psv.gz"))),
        choices: ov.choices.clone().or_else(|| r.path("data", "choices")),
        corpus,
        dir,
    };
    if let Err(e) = prep.validate() {
        r.bad("preprocess", "*", e.to_string());
    }
    let out = ov
        .out
        .clone()
        .or(out_cfg)
        .unwrap_or_else(|| PathBuf::from("out").join(slug));
    Some(Config {
        pipeline,
        dataset,
        seed,
        out,
        threads,
        interactive: ov.interactive,
        data,
        preprocess: prep,
        stopwords_file,
        exclude_shared,
        heuristics,
        weights,
        open_types,
        outlier,
        rajolink_types,
        linkpred,
    })
}

impl Config {
    /// Files the pipeline reads, labelled by config field.
    pub fn required_files(&self, pipeline: Option<Pipeline>) -> BTreeMap<&'static str, PathBuf> {
        let d = &self.data;
        let mut files = BTreeMap::new();
        files.insert("data.corpus", d.corpus.clone());
        if let Some(g) = &d.gold {
            files.insert("data.gold", g.clone());
        }
        if let Some(s) = &d.semantic_types {
            files.insert("data.semantic_types", s.clone());
        }
        if let Some(s) = &self.stopwords_file {
            files.insert("preprocess.stopwords", s.clone());
        }
        if let Some(c) = &d.choices {
            files.insert("data.choices", c.clone());
        }
        match pipeline {
            Some(Pipeline::Open) => {
                files.insert("data.second_level_dir", d.second_level_dir.clone());
            }
            Some(Pipeline::Rajolink) => {
                files.insert("data.rare_dir", d.rare_dir.clone());
                files.insert("data.pair_corpus", d.pair_corpus.clone());
            }
            Some(Pipeline::Linkpred) => {
                files.insert("data.references", d.references.clone());
            }
            _ => {}
        }
        files
    }

    pub fn check_files(&self, findings: &mut Vec<Finding>) {
        for (field, path) in self.required_files(self.pipeline) {
            if !path.exists() {
                findings.push(Finding {
                    field: field.to_owned(),
                    kind: FindingKind::MissingFile,
                    message: format!("{} does not exist", path.display()),
                });
            }
        }
        let needs_choices = matches!(self.pipeline, Some(Pipeline::Open | Pipeline::Rajolink))
            && !self.interactive
            && self.data.choices.is_none()
            && builtin_choices(self.pipeline, self.dataset).is_none();
        if needs_choices {
            findings.push(Finding {
                field: "data.choices".into(),
                kind: FindingKind::BadValue,
                message: format!(
                    "{} on {} needs a choice file (--choices) or --interactive",
                    self.pipeline.map(Pipeline::name).unwrap_or_default(),
                    self.dataset.slug()
                ),
            });
        }
    }

    pub fn stopwords(&self) -> anyhow::Result<std::collections::BTreeSet<String>> {
        match &self.stopwords_file {
            None => Ok(builtin_stopwords()),
            Some(p) => {
                let text = lbd_core::util::read_text(p)?;
                Ok(lbd_core::resources::content_lines(&text).map(str::to_lowercase).collect())
            }
        }
    }
}

/// Recorded expert choices shipped for the benchmark replays.
pub fn builtin_choices(pipeline: Option<Pipeline>, dataset: BenchmarkDataset) -> Option<&'static str> {
    match (pipeline?, dataset) {
        (Pipeline::Open, BenchmarkDataset::MigMg) => Some(lbd_core::resources::MIG_MG_B_CONCEPTS),
        (Pipeline::Rajolink, BenchmarkDataset::AutCan) => Some(lbd_core::resources::AUT_CAN_RAJOLINK_REPLAY),
        _ => None,
    }
}

/// Loads, merges and validates; file checks included.
pub fn load(path: Option<&Path>, ov: &Overrides) -> Result<Config, ConfigError> {
    let mut findings = Vec::new();
    let table = load_table(path, std::env::vars(), &mut findings);
    let cfg = resolve(&table, ov, &mut findings);
    if let Some(c) = &cfg {
        c.check_files(&mut findings);
    }
    match cfg {
        Some(c) if findings.is_empty() => Ok(c),
        _ => Err(ConfigError { findings }),
    }
}

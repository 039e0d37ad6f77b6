//! Small synthetic Aut-CaN-shaped fixture set in the on-disk layout the CLI
//! expects, plus helpers for running the binary.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flate2::write::GzEncoder;
use flate2::Compression;

pub const BIN: &str = env!("CARGO_BIN_EXE_lbd");

const C_WORDS: [&str; 12] = [
    "autism", "cortex", "neuron", "behaviour", "synapse", "language", "child", "cerebellum",
    "serotonin", "social", "cognition", "purkinje",
];
const A_WORDS: [&str; 12] = [
    "calcineurin", "phosphatase", "kinase", "tcell", "immune", "cyclosporin", "nfat", "lymphocyte",
    "transcription", "kidney", "cardiac", "hypertrophy",
];
const GENERIC: [&str; 4] = ["study", "patient", "protein", "model"];
const BRIDGE: [&str; 6] = ["calcium", "channel", "signalling", "membrane", "glutamate", "plasticity"];

const C_HEADINGS: [&str; 6] = [
    "Alpha Protein",
    "Beta Process",
    "Gamma Enzyme",
    "Delta Peptide",
    "Epsilon Function",
    "Autistic Disorder",
];
const A_HEADINGS: [&str; 4] = ["Zeta Protein", "Eta Process", "Theta Enzyme", "Iota Peptide"];

pub const OPEN_CHOICES: &str = "Alpha Protein\nBeta Process\n";
pub const RAJOLINK_CHOICES: &str = "ra: Gamma Enzyme\nra: Delta Peptide\njo: signalling\n";

const SEMANTIC_TYPES: &str = "heading|types
Alpha Protein|Amino Acid, Peptide, or Protein;Amino Acids, Peptides, and Proteins
Beta Process|Phenomenon or Process
Gamma Enzyme|Enzymes and Coenzymes
Delta Peptide|Amino Acids, Peptides, and Proteins
Epsilon Function|Pathologic Function
Autistic Disorder|Mental or Behavioral Dysfunction
Zeta Protein|Amino Acid, Peptide, or Protein
Eta Process|Phenomenon or Process
Theta Enzyme|Enzymes and Coenzymes
Iota Peptide|Amino Acids, Peptides, and Proteins
Kappa Function|Pathologic Function
Lambda Process|Phenomenon or Process
Mu Protein|Amino Acid, Peptide, or Protein
";

pub struct Fixture {
    pub root: PathBuf,
    pub data: PathBuf,
    pub config: PathBuf,
    pub open_choices: PathBuf,
    pub rajolink_choices: PathBuf,
}

fn gz(path: &Path, text: &str) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    let f = std::fs::File::create(path).unwrap();
    let mut enc = GzEncoder::new(f, Compression::default());
    enc.write_all(text.as_bytes()).unwrap();
    enc.finish().unwrap();
}

fn pick<'a>(pool: &[&'a str], i: usize, n: usize, stride: usize) -> Vec<&'a str> {
    (0..n).map(|j| pool[(i * stride + j * 5 + i / 3) % pool.len()]).collect()
}

fn row(id: &str, domain: &str, date: &str, title: &str, abs: &str, mesh: &[&str]) -> String {
    format!("{id}|{domain}|{date}|{title}|{abs}|{}\n", mesh.join(";"))
}

const HEADER: &str = "pmid|domain|pub_date|title|abstract|mesh\n";

fn corpus_text() -> String {
    let mut s = String::from(HEADER);
    for i in 0..40 {
        let mut words = pick(&C_WORDS, i, 4, 7);
        if i % 3 == 0 {
            words.push(BRIDGE[i % BRIDGE.len()]);
        }
        let abs = format!("{} {}", pick(&C_WORDS, i + 11, 6, 5).join(" "), GENERIC[i % 4]);
        let mut mesh = vec![C_HEADINGS[i % 5], "Autistic Disorder"];
        if i % 4 == 0 {
            mesh.push(C_HEADINGS[(i / 4) % 5]);
        }
        let date = format!("{}-0{}-1{}", 2000 + i % 7, 1 + i % 9, i % 10);
        s += &row(&format!("c{i:03}"), "Autism", &date, &words.join(" "), &abs, &mesh);
    }
    for i in 0..30 {
        let mut words = pick(&A_WORDS, i, 4, 7);
        if i % 2 == 0 {
            words.push(BRIDGE[(i / 2) % BRIDGE.len()]);
        }
        let abs = format!("{} {}", pick(&A_WORDS, i + 5, 6, 5).join(" "), GENERIC[(i + 1) % 4]);
        let mesh = [A_HEADINGS[i % 4], "Calcineurin"];
        let date = format!("{}-0{}-2{}", 1999 + i % 8, 1 + i % 9, i % 9);
        s += &row(&format!("a{i:03}"), "Calcineurin", &date, &words.join(" "), &abs, &mesh);
    }
    s
}

/// Second-level literature: every expansion shares Zeta/Eta/Kappa, with
/// frequencies that differ per b-concept.
fn second_level_text(b: usize) -> String {
    let mut s = String::from(HEADER);
    let own = ["Lambda Process", "Mu Protein"][b];
    for i in 0..12 {
        let mut mesh = vec!["Zeta Protein"];
        if i % (2 + b) == 0 {
            mesh.push("Eta Process");
        }
        if i % 3 == b {
            mesh.push("Kappa Function");
        }
        if i % 2 == 0 {
            mesh.push(own);
        }
        mesh.push(C_HEADINGS[b]);
        s += &row(&format!("s{b}{i:02}"), "A", "2005-05-05", "second level", "", &mesh);
    }
    s
}

fn rare_text(r: usize) -> String {
    let mut s = String::from(HEADER);
    for i in 0..10 {
        let mut words = vec!["signalling", "kinase"];
        words.extend(pick(&A_WORDS, i + r * 3, 2, 3));
        if i % 2 == r {
            words.push("plasticity");
        }
        s += &row(&format!("r{r}{i:02}"), "C", "2006-06-06", &words.join(" "), "", &["Gamma Enzyme"]);
    }
    // One record shared by both literatures.
    s += &row("shared1", "C", "2006-06-06", "signalling kinase membrane", "", &[]);
    s
}

/// Citations: three pre-cutoff references per document plus one later
/// citation for each of the first 30 documents.
fn references_text() -> String {
    let mut s = String::from("citing_id|cited_id|cited_pub_date\n");
    let docs: Vec<String> = (0..40).map(|i| format!("c{i:03}")).chain((0..30).map(|i| format!("a{i:03}"))).collect();
    for (d, id) in docs.iter().enumerate() {
        for k in 0..3 {
            let r = (d * 3 + k * 7) % 25;
            let _ = writeln!(s, "{id}|ref{r:02}|2005-01-01");
        }
    }
    for (d, id) in docs.iter().enumerate().take(30) {
        let r = (d * 3 + 1) % 25;
        let _ = writeln!(s, "{id}|ref{r:02}|2009-0{}-01", 1 + d % 9);
    }
    s
}

pub fn build(root: &Path) -> Fixture {
    let data = root.join("data");
    gz(&data.join("petric_2009.psv.gz"), &corpus_text());
    gz(&data.join("aut-can.references.psv.gz"), &references_text());
    for (b, name) in ["alpha-protein", "beta-process"].iter().enumerate() {
        gz(&data.join(format!("aut-can/second-level/{name}.psv.gz")), &second_level_text(b));
    }
    for (r, name) in ["gamma-enzyme", "delta-peptide"].iter().enumerate() {
        gz(&data.join(format!("aut-can/rare/{name}.psv.gz")), &rare_text(r));
    }
    std::fs::write(data.join("semantic_types.psv"), SEMANTIC_TYPES).unwrap();
    std::fs::write(data.join("synthetic.gold.txt"), "calcium\nglutamate\nmembrane\n").unwrap();
    let open_choices = root.join("open.choices.txt");
    std::fs::write(&open_choices, OPEN_CHOICES).unwrap();
    let rajolink_choices = root.join("rajolink.choices.txt");
    std::fs::write(&rajolink_choices, RAJOLINK_CHOICES).unwrap();
    let config = root.join("lbd.toml");
    let d = data.display();
    std::fs::write(
        &config,
        format!(
            "[run]\ndataset = \"aut-can\"\n\n[data]\ndir = \"{d}\"\ngold = \"{d}/synthetic.gold.txt\"\nsemantic_types = \"{d}/semantic_types.psv\"\n\n[preprocess]\nmin_support = 2\n\n[outlier]\nmin_df = 2\n\n[linkpred]\ntest_size = 20\n"
        ),
    )
    .unwrap();
    Fixture {
        root: root.to_path_buf(),
        data,
        config,
        open_choices,
        rajolink_choices,
    }
}

/// Runs the binary with a clean `LBD_*` environment.
pub fn lbd(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    for (k, _) in std::env::vars() {
        if k.starts_with("LBD_") {
            cmd.env_remove(k);
        }
    }
    cmd.env("RUST_LOG", "warn");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.args(args).output().expect("binary runs")
}

impl Fixture {
    /// Arguments for one pipeline into `out`.
    pub fn args(&self, pipeline: &str, out: &Path) -> Vec<String> {
        let mut a = vec![
            pipeline.to_owned(),
            "--config".into(),
            self.config.display().to_string(),
            "--out".into(),
            out.display().to_string(),
        ];
        match pipeline {
            "open" => a.extend(["--choices".into(), self.open_choices.display().to_string()]),
            "rajolink" => a.extend(["--choices".into(), self.rajolink_choices.display().to_string()]),
            _ => {}
        }
        a
    }

    pub fn run(&self, pipeline: &str, out: &Path, extra: &[&str]) -> Output {
        let mut a = self.args(pipeline, out);
        a.extend(extra.iter().map(|s| s.to_string()));
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        lbd(&refs, &[])
    }
}

pub const PIPELINES: [&str; 7] = ["ingest", "closed", "open", "crossbee", "outlier", "rajolink", "linkpred"];

/// Every file except the manifest, with its bytes.
pub fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.json")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    v.sort();
    v
}

pub fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

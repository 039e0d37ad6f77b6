//! The seven workflows. Each reads its inputs, writes artifacts through the
//! staging area and returns the summary that goes into the manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::path::Path;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use lbd_core::closed_abc::{check_gold_recovery, common_terms};
use lbd_core::corpus::{self, Domain, DomainPairCorpus, GoldStandard, LoadReport, PsvSchema};
use lbd_core::linkpred::{self, CitationNetwork, Measure, TimeSlicedSplit};
use lbd_core::open_concept::{self, OpenDiscoveryInput, SemanticTypeFilter, SemanticTypeMap};
use lbd_core::rajolink::{self, Acquire, ChoiceRecord, SessionInput};
use lbd_core::textprep::{build_vocabulary, mean_words_per_doc, Normalizer, PreprocessConfig};
use lbd_core::{crossbee, outlier, util};
use serde_json::{json, Value};

use crate::config::{builtin_choices, Config, Pipeline, Projection};
use crate::manifest::Staging;

pub struct Ctx<'a> {
    pub cfg: &'a Config,
    pub staging: &'a mut Staging,
    /// Input path to sha256.
    pub inputs: BTreeMap<String, String>,
}

impl Ctx<'_> {
    fn input(&mut self, path: &Path) -> Result<()> {
        let hash = util::sha256_file(path)?;
        self.inputs.insert(path.display().to_string(), hash);
        Ok(())
    }

    fn prep(&self) -> Result<PreprocessConfig> {
        let mut p = self.cfg.preprocess.clone();
        p.stopwords = self.cfg.stopwords()?;
        if let Some(s) = &self.cfg.stopwords_file {
            log::info!("stopwords from {}: {} words", s.display(), p.stopwords.len());
        }
        Ok(p)
    }

    fn load_raw(&mut self, path: &Path) -> Result<(DomainPairCorpus, LoadReport)> {
        let (c, report) = corpus::load_psv(path, &PsvSchema::default(), self.cfg.dataset.meta())?;
        self.input(path)?;
        log::info!(
            "{}: {} {} / {} {} documents",
            path.display(),
            c.count(Domain::A),
            c.label_a,
            c.count(Domain::C),
            c.label_c
        );
        Ok((c, report))
    }

    /// The corpus as the discovery pipelines see it.
    fn load(&mut self, path: &Path) -> Result<DomainPairCorpus> {
        let (c, _) = self.load_raw(path)?;
        Ok(if self.cfg.exclude_shared {
            corpus::exclude_shared_records(&c)
        } else {
            c
        })
    }

    fn gold(&mut self, normalizer: &Normalizer) -> Result<GoldStandard> {
        match self.cfg.data.gold.clone() {
            Some(p) => {
                let g = GoldStandard::from_file(&p, normalizer)?;
                self.input(&p)?;
                Ok(g)
            }
            None => Ok(corpus::load_gold(self.cfg.dataset.slug(), normalizer)?),
        }
    }

    fn semantic_map(&mut self) -> Result<SemanticTypeMap> {
        match self.cfg.data.semantic_types.clone() {
            Some(p) => {
                let m = SemanticTypeMap::load(&p)?;
                self.input(&p)?;
                Ok(m)
            }
            None => Ok(SemanticTypeMap::builtin()),
        }
    }

    fn filter(&mut self, types: &[String]) -> Result<SemanticTypeFilter> {
        let f = SemanticTypeFilter::new(types, self.semantic_map()?);
        let unknown = f.unknown_types();
        if !unknown.is_empty() {
            log::warn!("semantic types not in the table: {}", unknown.join(", "));
        }
        Ok(f)
    }
}

pub fn run(pipeline: Pipeline, ctx: &mut Ctx) -> Result<Value> {
    match pipeline {
        Pipeline::Ingest => ingest(ctx),
        Pipeline::Closed => closed(ctx),
        Pipeline::Crossbee => crossbee_run(ctx),
        Pipeline::Open => open(ctx),
        Pipeline::Outlier => outlier_run(ctx),
        Pipeline::Rajolink => rajolink_run(ctx),
        Pipeline::Linkpred => linkpred_run(ctx),
    }
}

fn per_domain<T>(f: impl Fn(Domain) -> T) -> BTreeMap<Domain, T> {
    Domain::BOTH.into_iter().map(|d| (d, f(d))).collect()
}

fn ingest(ctx: &mut Ctx) -> Result<Value> {
    let prep = ctx.prep()?;
    let path = ctx.cfg.data.corpus.clone();
    let (raw, report) = ctx.load_raw(&path)?;
    let shared = corpus::shared_ids(&raw);
    let used = if ctx.cfg.exclude_shared {
        corpus::exclude_shared_records(&raw)
    } else {
        raw.clone()
    };
    let vocab = build_vocabulary(&used, &prep)?;
    let common = common_terms(&vocab);
    let stats = json!({
        "dataset": ctx.cfg.dataset.name(),
        "labels": per_domain(|d| raw.label(d).to_owned()),
        "documents": corpus::document_counts(&raw),
        "shared_ids": shared.len(),
        "documents_used": corpus::document_counts(&used),
        "mean_words_per_doc": per_domain(|d| mean_words_per_doc(&used, prep.fields, d)),
        "unique_terms": per_domain(|d| vocab.unique_in(d)),
        "vocabulary": vocab.len(),
        "common_terms": common.len(),
        "config_fingerprint": prep.fingerprint(),
    });
    ctx.staging.text("corpus.psv.gz", &corpus::to_psv(&raw.documents, &PsvSchema::default()))?;
    ctx.staging.json("load_report.json", &report)?;
    ctx.staging.text("vocabulary.psv.gz", &vocab.to_psv())?;
    ctx.staging.json("stats.json", &stats)?;
    Ok(stats)
}

fn closed(ctx: &mut Ctx) -> Result<Value> {
    let prep = ctx.prep()?;
    let normalizer = Normalizer::new(&prep);
    let path = ctx.cfg.data.corpus.clone();
    let corpus = ctx.load(&path)?;
    let gold = ctx.gold(&normalizer)?;
    let vocab = build_vocabulary(&corpus, &prep)?;
    let common = common_terms(&vocab);
    let recovery = check_gold_recovery(&common, &gold)?;
    log::info!("{} common terms, gold recall {:.3}", common.len(), recovery.recall);
    let summary = json!({
        "dataset": ctx.cfg.dataset.name(),
        "vocabulary": vocab.len(),
        "common_terms": common.len(),
        "gold_terms": gold.len(),
        "recovery": recovery,
    });
    ctx.staging.text("common_terms.psv", &common.to_psv(Some(&gold)))?;
    ctx.staging.json("gold_recovery.json", &summary)?;
    Ok(summary)
}

fn crossbee_run(ctx: &mut Ctx) -> Result<Value> {
    let prep = ctx.prep()?;
    let normalizer = Normalizer::new(&prep);
    let path = ctx.cfg.data.corpus.clone();
    let corpus = ctx.load(&path)?;
    let gold = ctx.gold(&normalizer)?;
    let vocab = build_vocabulary(&corpus, &prep)?;
    let common = common_terms(&vocab);
    let (ranked, report) =
        crossbee::rank_and_evaluate(&common, &vocab, &ctx.cfg.heuristics, &ctx.cfg.weights, &gold)?;
    log::info!("ensemble AUC {:.4} over {} candidates", report.ensemble_auc, report.candidates);
    ctx.staging.text("ranked.psv", &crossbee::ranked_psv(&ranked, Some(&gold)))?;
    ctx.staging.text("roc.csv", &report.roc.to_csv())?;
    ctx.staging.text("roc.svg", &report.roc.to_svg(480))?;
    ctx.staging.json("crossbee.json", &report)?;
    Ok(json!({
        "dataset": ctx.cfg.dataset.name(),
        "candidates": report.candidates,
        "gold_in_candidates": report.gold_in_candidates,
        "ensemble_auc": report.ensemble_auc,
        "heuristic_auc": report.heuristic_auc,
        "gold_positions": report.gold_positions,
    }))
}

/// Prompts on stdin/stdout when `--interactive` is set.
fn with_terminal<T>(f: impl FnOnce(&mut dyn BufRead, &mut dyn Write) -> T) -> T {
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let stdout = io::stdout();
    let mut output = stdout.lock();
    f(&mut input, &mut output)
}

fn open(ctx: &mut Ctx) -> Result<Value> {
    let prep = ctx.prep()?;
    let normalizer = Normalizer::new(&prep);
    let path = ctx.cfg.data.corpus.clone();
    let corpus = ctx.load(&path)?;
    let meta = corpus.meta();
    let c_docs: Vec<_> = corpus.docs_in(Domain::C).cloned().collect();
    let filter = ctx.filter(&ctx.cfg.open_types.clone())?;
    let second = ctx.cfg.data.second_level_dir.clone();
    let input = OpenDiscoveryInput {
        c_docs: &c_docs,
        meta: &meta,
        filter: &filter,
        normalizer: &normalizer,
        second_level_dir: &second,
    };
    let pool = open_concept::candidate_b_concepts(&input)?;
    let choices = if ctx.cfg.interactive {
        with_terminal(|i, o| rajolink::prompt_choices("b-concept", &pool.ranked, false, &normalizer, i, o))?
    } else if let Some(p) = ctx.cfg.data.choices.clone() {
        let c = open_concept::read_choice_file(&p)?;
        ctx.input(&p)?;
        c
    } else {
        let text = builtin_choices(Some(Pipeline::Open), ctx.cfg.dataset).context("no b-concept choices")?;
        open_concept::parse_choice_file(text)
    };
    let report = open_concept::run(&input, &pool, &choices)?;
    for b in &report.b_concepts {
        ctx.input(&open_concept::expansion_path(&second, b))?;
    }

    let chosen: BTreeSet<&str> = report.b_concepts.iter().map(String::as_str).collect();
    let mut b_psv = String::from("heading|score|rank|chosen\n");
    for (i, item) in pool.ranked.items().iter().enumerate() {
        let _ = writeln!(b_psv, "{}|{}|{}|{}", item.key, item.score, i + 1, chosen.contains(item.key.as_str()));
    }
    let mut cand_psv = String::from("heading|score|rank|novelty|novel\n");
    for c in &report.candidates {
        let _ = writeln!(cand_psv, "{}|{}|{}|{}|{}", c.heading, c.score, c.rank, c.novelty, c.novel);
    }
    let mut choice_txt = String::new();
    for b in &report.b_concepts {
        choice_txt.push_str(b);
        choice_txt.push('\n');
    }
    ctx.staging.text("b_concepts.psv", &b_psv)?;
    ctx.staging.text("candidates.psv", &cand_psv)?;
    ctx.staging.json("open_report.json", &report)?;
    ctx.staging.text("choices.txt", &choice_txt)?;
    Ok(json!({
        "dataset": ctx.cfg.dataset.name(),
        "b_concept_pool": pool.ranked.len(),
        "b_concepts": report.b_concepts,
        "candidates": report.candidates.len(),
        "top": report.candidates.iter().take(10).map(|c| &c.heading).collect::<Vec<_>>(),
        "novelty": report.candidates.iter().map(|c| (c.heading.clone(), c.novelty)).collect::<BTreeMap<_, _>>(),
        "note": report.note,
    }))
}

fn outlier_run(ctx: &mut Ctx) -> Result<Value> {
    let prep = ctx.prep()?;
    let path = ctx.cfg.data.corpus.clone();
    let corpus = ctx.load(&path)?;
    let run = outlier::run(&corpus, &prep, &ctx.cfg.outlier)?;
    let by_domain = run.report.rows_by_domain(&corpus);
    let counts: BTreeMap<Domain, usize> = Domain::BOTH
        .into_iter()
        .map(|d| (d, by_domain.get(&d).map_or(0, Vec::len)))
        .collect();
    log::info!("{} outliers in {} clusters", run.report.outlier_count(), run.report.k);
    outlier::export_outliers(&run.report, &corpus, &ctx.staging.path("outliers.psv.gz"))?;
    ctx.staging.record("outliers.psv.gz")?;
    ctx.staging.text("scatter.csv", &outlier::scatter_csv(&run.pca, &run.assignment, &corpus))?;
    let summary = json!({
        "dataset": ctx.cfg.dataset.name(),
        "config": ctx.cfg.outlier,
        "terms_kept": run.terms_kept,
        "eigenvalues": run.pca.eigenvalues,
        "iterations": run.assignment.clustering.iterations,
        "objective_history": run.assignment.clustering.objective_history,
        "outliers_by_domain": counts,
    });
    ctx.staging.json(
        "outlier_report.json",
        &json!({ "summary": summary, "report": run.report }),
    )?;
    Ok(summary)
}

fn rajolink_run(ctx: &mut Ctx) -> Result<Value> {
    let prep = ctx.prep()?;
    let normalizer = Normalizer::new(&prep);
    let path = ctx.cfg.data.corpus.clone();
    let corpus = ctx.load(&path)?;
    let meta = corpus.meta();
    let start: Vec<_> = corpus.docs_in(Domain::C).cloned().collect();
    let filter = ctx.filter(&ctx.cfg.rajolink_types.clone())?;
    let rare_dir = ctx.cfg.data.rare_dir.clone();
    let input = SessionInput {
        start_docs: &start,
        meta: &meta,
        filter: &filter,
        config: &prep,
        rare_dir: &rare_dir,
    };
    let mut session = if ctx.cfg.interactive {
        with_terminal(|i, o| rajolink::run_session(&input, Acquire::Interactive { input: i, output: o }))?
    } else {
        let record = match ctx.cfg.data.choices.clone() {
            Some(p) => {
                let r = ChoiceRecord::read(&p)?;
                ctx.input(&p)?;
                r
            }
            None => {
                let text = builtin_choices(Some(Pipeline::Rajolink), ctx.cfg.dataset).context("no RaJoLink choices")?;
                ChoiceRecord::parse(text, Path::new("<builtin replay>"))?
            }
        };
        rajolink::run_session(&input, Acquire::Replay(record))?
    };
    for (name, hash) in &session.report.fixture_hashes {
        ctx.inputs.insert(rare_dir.join(name).display().to_string(), hash.clone());
    }

    let pair_path = ctx.cfg.data.pair_corpus.clone();
    let pair = if pair_path == path { corpus.clone() } else { ctx.load(&pair_path)? };
    let gold = ctx.gold(&normalizer)?;
    let (common, link) = rajolink::link_closed(&pair, &prep, &ctx.cfg.heuristics, &ctx.cfg.weights)?;
    session.report.link_common_terms = Some(common.len());
    let link_gold_positions: BTreeMap<String, usize> = gold
        .normalized_set()
        .into_iter()
        .filter_map(|g| link.keys().position(|k| k == g).map(|p| (g, p + 1)))
        .collect();

    ctx.staging.text("ra_ranking.psv", &crossbee::ranked_psv(&session.ra_ranking, None))?;
    ctx.staging.text("jo_ranking.psv", &crossbee::ranked_psv(&session.jo.ranked, None))?;
    ctx.staging.json("session.json", &session.report)?;
    ctx.staging.text("choices.replay.txt", &session.choices.to_replay())?;
    ctx.staging.text("link_common_terms.psv", &common.to_psv(Some(&gold)))?;
    ctx.staging.text("link_ranked.psv", &crossbee::ranked_psv(&link, Some(&gold)))?;
    let r = &session.report;
    Ok(json!({
        "dataset": ctx.cfg.dataset.name(),
        "ra_count": r.ra_count,
        "ra_positions": r.ra_positions,
        "jo_count": r.jo_count,
        "jo_selected": r.choices.jo_selected,
        "jo_position": r.jo_position,
        "link_common_terms": r.link_common_terms,
        "link_gold_positions": link_gold_positions,
    }))
}

/// Co-citation projection: references linked when one document cites both.
/// Test pairs are first co-cited by a later citation.
fn cocitation_split(
    docs: &[corpus::Document],
    refs: &[linkpred::Reference],
    cutoff: NaiveDate,
    n_test: usize,
) -> Result<TimeSlicedSplit> {
    let citing: BTreeSet<String> = docs.iter().map(|d| d.id.clone()).collect();
    let train = linkpred::build_network(docs, refs, cutoff, 0);
    let full = linkpred::build_network(docs, refs, NaiveDate::MAX, 0);
    let before = train.train.cocitation(&citing);
    let after = full.train.cocitation(&citing);
    let net: CitationNetwork = before.network;
    let pairs: Vec<(&str, &str)> = after
        .weights
        .keys()
        .filter(|k| !before.weights.contains_key(*k))
        .filter(|(a, b)| net.index_of(a).is_some() && net.index_of(b).is_some())
        .take(n_test)
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let mut split = TimeSlicedSplit::new(net, &pairs)?;
    split.rejected = train.rejected;
    Ok(split)
}

fn linkpred_run(ctx: &mut Ctx) -> Result<Value> {
    let path = ctx.cfg.data.corpus.clone();
    let (corpus, _) = ctx.load_raw(&path)?;
    let refs_path = ctx.cfg.data.references.clone();
    util::require_fixture(&refs_path, "reference table")?;
    let (refs, ref_rejections) = linkpred::load_references(&refs_path)?;
    ctx.input(&refs_path)?;
    let lp = &ctx.cfg.linkpred;
    let cutoff = corpus.cutoff_date;
    let split = match lp.projection {
        Projection::Citation => linkpred::build_network(&corpus.documents, &refs, cutoff, lp.test_size),
        Projection::Cocitation => cocitation_split(&corpus.documents, &refs, cutoff, lp.test_size)?,
    };
    log::info!(
        "train graph: {} nodes, {} edges; {} test edges",
        split.train.n_nodes(),
        split.train.n_edges(),
        split.test_edges.len()
    );
    let mut measures = lp.measures.clone();
    measures.push(Measure::Random(ctx.cfg.seed));
    let evaluations = measures
        .iter()
        .map(|&m| linkpred::evaluate_time_sliced(&split, m, ctx.cfg.seed))
        .collect::<lbd_core::Result<Vec<_>>>()?;
    let summary = json!({
        "dataset": ctx.cfg.dataset.name(),
        "projection": lp.projection,
        "cutoff": cutoff,
        "train_nodes": split.train.n_nodes(),
        "train_edges": split.train.n_edges(),
        "test_edges": split.test_edges.len(),
        "unevaluable": split.unevaluable,
        "rejected_references": ref_rejections.len() + split.rejected.len(),
        "auc": evaluations.iter().map(|e| (e.measure.clone(), e.auc)).collect::<BTreeMap<_, _>>(),
    });
    ctx.staging.json(
        "linkpred.json",
        &json!({
            "summary": summary,
            "evaluations": evaluations,
            "degree_counts": linkpred::degree_counts(&split.train),
        }),
    )?;
    Ok(summary)
}

//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Criteria that need the published benchmark snapshots
//! read them from `LBD_DATA_DIR` (default `<workspace>/data`).

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use lbd_core::corpus::{self, BenchmarkDataset, Domain, PsvSchema};
use lbd_core::evalkit::{self, AggregationMethod};
use lbd_core::linkpred::{self, CitationNetwork, Measure, TimeSlicedSplit};
use lbd_core::outlier;
use lbd_core::textprep::TermBag;
use lbd_core::vectorspace::{self, WeightedMatrix};
use lbd_core::RankedList;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

struct Line {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
}

type Check = Result<String, String>;

fn line(id: &'static str, name: &'static str, check: Check) -> Line {
    let (pass, detail) = match check {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Line { id, name, pass, detail }
}

fn expect(cond: bool, detail: String) -> Check {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn data_dir() -> PathBuf {
    std::env::var_os("LBD_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("artifact exists")).expect("valid json")
}

struct DataRun {
    out: PathBuf,
    elapsed: Duration,
}

/// Runs one pipeline on a real snapshot; `Err` explains why it could not.
fn run_on_snapshot(tmp: &Path, pipeline: &str, dataset: BenchmarkDataset, extra: &[&str]) -> Result<DataRun, String> {
    let dir = data_dir();
    let snapshot = dir.join(dataset.snapshot_file());
    if !snapshot.exists() {
        return Err(format!("snapshot missing: {}", snapshot.display()));
    }
    let out = tmp.join(format!("{pipeline}-{}-{}", dataset.slug(), extra.join("")));
    let mut args = vec![pipeline, "--dataset", dataset.slug()];
    let out_s = out.display().to_string();
    args.extend(["--out", &out_s]);
    args.extend(extra);
    let dir_s = dir.display().to_string();
    let start = Instant::now();
    let o = common::lbd(&args, &[("LBD_DATA_DIR", &dir_s)]);
    let elapsed = start.elapsed();
    if !o.status.success() {
        let err = String::from_utf8_lossy(&o.stderr);
        let last = err.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("").to_owned();
        return Err(format!("{pipeline} exited {:?}: {last}", o.status.code()));
    }
    Ok(DataRun { out, elapsed })
}

fn summary(run: &DataRun) -> Value {
    common::manifest(&run.out)["summary"].clone()
}

fn c1_gold_recovery(tmp: &Path) -> Check {
    let run = run_on_snapshot(tmp, "closed", BenchmarkDataset::RsDfo, &[])?;
    let s = summary(&run);
    let recall = s["recovery"]["recall"].as_f64().unwrap_or(0.0);
    let common = s["common_terms"].as_u64().unwrap_or(0);
    let secs = run.elapsed.as_secs_f64();
    expect(
        recall == 1.0 && (22..=33).contains(&common) && secs < 10.0,
        format!("recall={recall:.3} (=1) common={common} (22..=33) runtime={secs:.2}s (<10)"),
    )
}

fn c2_table_stats(tmp: &Path, dataset: BenchmarkDataset) -> Check {
    // (C docs, A docs, C unique, A unique, common)
    let (dc, da, uc, ua, common) = match dataset {
        BenchmarkDataset::RsDfo => (1273, 153, 4554.0, 1059.0, 27.0),
        BenchmarkDataset::MigMg => (1156, 7320, 1812.0, 6217.0, 228.0),
        BenchmarkDataset::AutCan => (10819, 5320, 423153.0, 316702.0, 46473.0),
    };
    let run = run_on_snapshot(tmp, "ingest", dataset, &[])?;
    let s = summary(&run);
    let g = |k: &str, d: &str| s[k][d].as_u64().unwrap_or(0);
    let (gc, ga) = (g("documents", "C"), g("documents", "A"));
    let (guc, gua) = (g("unique_terms", "C") as f64, g("unique_terms", "A") as f64);
    let gcommon = s["common_terms"].as_u64().unwrap_or(0) as f64;
    expect(
        gc == dc
            && ga == da
            && within(guc, uc, 0.15)
            && within(gua, ua, 0.15)
            && within(gcommon, common, 0.15),
        format!(
            "docs {gc}/{ga} (={dc}/{da}) unique {guc}/{gua} (±15% of {uc}/{ua}) common {gcommon} (±15% of {common})"
        ),
    )
}

fn brute_auc(order: &[String], pos: &BTreeSet<String>, scores: &BTreeMap<String, f64>) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for p in order.iter().filter(|k| pos.contains(*k)) {
        for n in order.iter().filter(|k| !pos.contains(*k)) {
            pairs += 1.0;
            let (sp, sn) = (scores[p], scores[n]);
            wins += if sp > sn {
                1.0
            } else if sp == sn {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / pairs
}

fn c3a_auc_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let n = rng.random_range(2..40);
        let levels = rng.random_range(1..8);
        let scores: BTreeMap<String, f64> =
            (0..n).map(|i| (format!("k{i:02}"), rng.random_range(0..levels) as f64)).collect();
        let keys: Vec<String> = scores.keys().cloned().collect();
        let mut pos: BTreeSet<String> = keys.iter().filter(|_| rng.random::<f64>() < 0.3).cloned().collect();
        if pos.is_empty() {
            pos.insert(keys[0].clone());
        }
        if pos.len() == keys.len() {
            pos.remove(&keys[n - 1]);
        }
        let ranked = RankedList::descending(scores.clone());
        let got = evalkit::auc(&ranked, &pos).map_err(|e| format!("trial {trial}: {e}"))?;
        let want = brute_auc(&keys, &pos, &scores);
        worst = worst.max((got - want).abs());
        if got != want {
            return Err(format!("trial {trial}: auc {got} vs brute force {want}"));
        }
    }
    Ok(format!("200 random rankings, max |diff| = {worst}"))
}

fn c3b_crossbee(tmp: &Path) -> Check {
    let run = run_on_snapshot(tmp, "crossbee", BenchmarkDataset::AutCan, &[])?;
    let s = summary(&run);
    let auc = s["ensemble_auc"].as_f64().unwrap_or(0.0);
    let best = s["heuristic_auc"]
        .as_object()
        .map(|m| m.values().filter_map(Value::as_f64).fold(f64::MIN, f64::max))
        .unwrap_or(f64::MAX);
    let cands = s["candidates"].as_u64().unwrap_or(0);
    expect(
        auc > 0.6 && auc >= best - 0.02,
        format!("ensemble AUC {auc:.4} (>0.6, >= best single {best:.4} - 0.02) over {cands} candidates"),
    )
}

fn c4_open(tmp: &Path) -> Check {
    let run = run_on_snapshot(tmp, "open", BenchmarkDataset::MigMg, &[])?;
    let report = read_json(&run.out.join("open_report.json"));
    let cands = report["candidates"].as_array().cloned().unwrap_or_default();
    let heading = |c: &Value| c["heading"].as_str().unwrap_or("").to_owned();
    let top2: BTreeSet<String> = cands.iter().take(2).map(heading).collect();
    let novelty = |h: &str| cands.iter().find(|c| heading(c) == h).and_then(|c| c["novelty"].as_u64());
    let want: BTreeSet<String> = ["Calcium", "Magnesium"].map(String::from).into();
    let (nc, nm) = (novelty("Calcium"), novelty("Magnesium"));
    expect(
        cands.len() == 10 && top2 == want && nc == Some(4) && nm == Some(0),
        format!("candidates={} (=10) top2={top2:?} novelty Calcium={nc:?} (=4) Magnesium={nm:?} (=0)", cands.len()),
    )
}

fn c5_outlier(tmp: &Path) -> Check {
    let run = run_on_snapshot(tmp, "outlier", BenchmarkDataset::AutCan, &["--seed", "42"])?;
    let report = read_json(&run.out.join("outlier_report.json"));
    let clusters = report["report"]["clusters"].as_array().cloned().unwrap_or_default();
    let mut predicate = true;
    for c in &clusters {
        let (a, cc) = (c["count_a"].as_u64().unwrap_or(0), c["count_c"].as_u64().unwrap_or(0));
        let minority = a.min(cc);
        let tie = c["majority_tie"].as_bool().unwrap_or(false);
        let n = c["outlier_ids"].as_array().map_or(0, Vec::len) as u64;
        predicate &= n == minority || tie;
    }
    let exported = lbd_core::util::read_text(&run.out.join("outliers.psv.gz")).map_err(|e| e.to_string())?;
    let (docs, _) = corpus::parse_psv(
        Path::new("outliers.psv.gz"),
        &exported,
        &PsvSchema::default(),
        &BenchmarkDataset::AutCan.meta(),
    )
    .map_err(|e| e.to_string())?;
    let mut by_domain: BTreeMap<Domain, usize> = BTreeMap::new();
    for d in &docs {
        *by_domain.entry(d.domain).or_default() += 1;
    }
    // Every exported row must sit in a cluster whose majority is the other domain.
    let mut membership: BTreeSet<(String, String)> = BTreeSet::new();
    for c in &clusters {
        let maj = c["majority"].as_str().unwrap_or("");
        for id in c["outlier_ids"].as_array().into_iter().flatten() {
            membership.insert((id.as_str().unwrap_or("").to_owned(), maj.to_owned()));
        }
    }
    for d in &docs {
        let other = if d.domain == Domain::A { "C" } else { "A" };
        predicate &= membership.contains(&(d.id.clone(), other.to_owned()));
    }
    let autism = by_domain.get(&Domain::C).copied().unwrap_or(0);
    let can = by_domain.get(&Domain::A).copied().unwrap_or(0);
    expect(
        predicate && autism > 0 && can > 0 && (100..=800).contains(&autism) && (10..=150).contains(&can),
        format!("Autism outliers {autism} (100..=800), Calcineurin outliers {can} (10..=150), predicate holds: {predicate}"),
    )
}

fn c6_rajolink(tmp: &Path) -> Check {
    let run = run_on_snapshot(tmp, "rajolink", BenchmarkDataset::AutCan, &[])?;
    let s = summary(&run);
    let ra = s["ra_count"].as_u64().unwrap_or(0) as i64;
    let pos = s["ra_positions"].as_object().cloned().unwrap_or_default();
    let session = read_json(&run.out.join("session.json"));
    let order: Vec<String> = session["choices"]["ra_selected"]
        .as_array()
        .into_iter()
        .flatten()
        .filter_map(|v| v.as_str().map(String::from))
        .collect();
    let targets = [38i64, 37, 377];
    let got: Vec<i64> = order.iter().map(|k| pos.get(k).and_then(Value::as_i64).unwrap_or(-1000)).collect();
    let positions_ok = got.len() == 3 && got.iter().zip(targets).all(|(g, t)| (g - t).abs() <= 15);
    let jo = s["jo_count"].as_i64().unwrap_or(0);
    let jo_pos = s["jo_position"].as_i64();
    let jo_term = s["jo_selected"].as_str().unwrap_or("");
    expect(
        (ra - 495).abs() <= 25 && positions_ok && (jo - 428).abs() <= 40 && jo_pos.is_some_and(|p| p <= 30),
        format!(
            "Ra {ra} (495±25), positions {order:?} = {got:?} (±15 of {targets:?}), Jo {jo} (428±40), {jo_term:?} at {jo_pos:?} (<=30)"
        ),
    )
}

fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> (Vec<String>, Vec<(String, String)>) {
    let n = rng.random_range(2..=max_nodes);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    let p = rng.random::<f64>();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    (names, edges)
}

fn c7a_proximity_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut compared = 0;
    for g in 0..500 {
        let (names, edges) = random_graph(&mut rng, 8);
        let net = CitationNetwork::new(names.iter().map(String::as_str), edges.iter().map(|(a, b)| (a.as_str(), b.as_str())));
        let nb = |x: &str| -> BTreeSet<&str> {
            edges
                .iter()
                .filter_map(|(a, b)| {
                    if a == x {
                        Some(b.as_str())
                    } else if b == x {
                        Some(a.as_str())
                    } else {
                        None
                    }
                })
                .collect()
        };
        for (i, u) in names.iter().enumerate() {
            for v in &names[i + 1..] {
                let (nu, nv) = (nb(u), nb(v));
                let inter: Vec<&str> = nu.intersection(&nv).copied().collect();
                let union = nu.union(&nv).count();
                let cn = inter.len() as f64;
                let jac = if union == 0 { 0.0 } else { cn / union as f64 };
                let aa: f64 = inter
                    .iter()
                    .map(|z| {
                        let d = nb(z).len();
                        if d > 1 {
                            1.0 / (d as f64).ln()
                        } else {
                            0.0
                        }
                    })
                    .sum();
                let got = [
                    linkpred::common_neighbors(&net, u, v),
                    linkpred::jaccard(&net, u, v),
                    linkpred::adamic_adar(&net, u, v),
                ];
                for (m, (g_, w)) in ["cn", "jaccard", "aa"].iter().zip(got.into_iter().zip([cn, jac, aa])) {
                    let g_ = g_.map_err(|e| e.to_string())?;
                    if g_ != w {
                        return Err(format!("graph {g}: {m}({u},{v}) = {g_}, brute force {w}"));
                    }
                }
                compared += 1;
            }
        }
    }
    Ok(format!("500 graphs, {compared} pairs, all three measures exact"))
}

/// Sparse random graph whose held-out pairs each close an open triangle.
fn triangle_split(seed: u64) -> TimeSlicedSplit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 300;
    let names: Vec<String> = (0..n).map(|i| format!("n{i:03}")).collect();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    while edges.len() < 600 {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let net = CitationNetwork::new(
        names.iter().map(String::as_str),
        edges.iter().map(|&(a, b)| (names[a].as_str(), names[b].as_str())),
    );
    let mut open: Vec<(usize, usize)> = Vec::new();
    for z in 0..n {
        let nb = net.neighbors(z);
        for (i, &u) in nb.iter().enumerate() {
            for &v in &nb[i + 1..] {
                if !net.has_edge(u, v) {
                    open.push((u.min(v), u.max(v)));
                }
            }
        }
    }
    open.sort_unstable();
    open.dedup();
    open.shuffle(&mut rng);
    let test: Vec<(&str, &str)> = open.iter().take(150).map(|&(u, v)| (net.name(u), net.name(v))).collect();
    TimeSlicedSplit::new(net.clone(), &test).expect("valid split")
}

fn c7b_triangle_auc() -> Check {
    let split = triangle_split(11);
    let mut parts = Vec::new();
    let mut ok = true;
    for m in Measure::PROXIMITY {
        let e = linkpred::evaluate_time_sliced(&split, m, 42).map_err(|e| e.to_string())?;
        ok &= e.auc > 0.7;
        parts.push(format!("{}={:.3}", m.name(), e.auc));
    }
    expect(ok, format!("{} test edges; AUC {} (each >0.7)", split.test_edges.len(), parts.join(" ")))
}

fn c7c_random_baseline() -> Check {
    let split = triangle_split(13);
    let mut sum = 0.0;
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    for t in 0..1000u64 {
        let e = linkpred::evaluate_time_sliced(&split, Measure::Random(t), t).map_err(|e| e.to_string())?;
        sum += e.auc;
        lo = lo.min(e.auc);
        hi = hi.max(e.auc);
    }
    let mean = sum / 1000.0;
    expect(
        (0.45..=0.55).contains(&mean),
        format!("mean AUC over 1000 seeded trials {mean:.4} (in [0.45, 0.55]); per-trial range [{lo:.3}, {hi:.3}]"),
    )
}

fn c8a_determinism(tmp: &Path) -> Check {
    let fx = common::build(&tmp.join("fixture"));
    let mut checked = Vec::new();
    for p in common::PIPELINES {
        let (a, b) = (tmp.join(format!("det-{p}-1")), tmp.join(format!("det-{p}-2")));
        for out in [&a, &b] {
            let o = fx.run(p, out, &[]);
            if !o.status.success() {
                return Err(format!("{p} failed: {}", String::from_utf8_lossy(&o.stderr)));
            }
        }
        let (x, y) = (common::artifacts(&a), common::artifacts(&b));
        if x != y || x.is_empty() {
            return Err(format!("{p}: artifacts differ between runs"));
        }
        let strip = |d: &Path| {
            let mut m = common::manifest(d);
            m.as_object_mut().unwrap().remove("timestamps");
            m
        };
        if strip(&a) != strip(&b) {
            return Err(format!("{p}: manifests differ outside timestamps"));
        }
        checked.push(format!("{p}:{}", x.len()));
    }
    Ok(format!("synthetic fixture, artifacts per pipeline {}", checked.join(" ")))
}

fn c8b_threads(tmp: &Path) -> Check {
    let one = run_on_snapshot(tmp, "crossbee", BenchmarkDataset::AutCan, &["--threads", "1"])?;
    let eight = run_on_snapshot(tmp, "crossbee", BenchmarkDataset::AutCan, &["--threads", "8"])?;
    let (a, b) = (common::artifacts(&one.out), common::artifacts(&eight.out));
    expect(a == b, format!("{} artifacts compared, identical: {}", a.len(), a == b))
}

fn random_bags(rng: &mut ChaCha8Rng) -> (Vec<String>, Vec<TermBag>) {
    let rows = rng.random_range(2..12);
    let vocab = rng.random_range(2..10);
    let ids: Vec<String> = (0..rows).map(|i| format!("d{i}")).collect();
    let bags = (0..rows)
        .map(|_| {
            (0..vocab)
                .filter_map(|t| {
                    let c = rng.random_range(0..4u32);
                    (c > 0 && rng.random::<f64>() < 0.6).then(|| (format!("t{t}"), c))
                })
                .collect()
        })
        .collect();
    (ids, bags)
}

fn oracle_tfidf() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    for trial in 0..200 {
        let (ids, bags) = random_bags(&mut rng);
        let counts = WeightedMatrix::from_bags(ids.clone(), &bags).map_err(|e| e.to_string())?;
        let w = vectorspace::tfidf(&counts).map_err(|e| e.to_string())?;
        let n = bags.len() as f64;
        for (c, term) in counts.cols().iter().enumerate() {
            let df = bags.iter().filter(|b| b.contains_key(term)).count() as f64;
            for (r, bag) in bags.iter().enumerate() {
                let tf = bag.get(term).copied().unwrap_or(0) as f64;
                let want = tf * (n / df).ln();
                if (w.get(r, c) - want).abs() > 1e-12 {
                    return Err(format!("trial {trial}: ({r},{term}) {} vs {want}", w.get(r, c)));
                }
            }
        }
    }
    Ok("200 random count matrices vs tf*ln(N/df)".into())
}

fn oracle_roc() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(92);
    for trial in 0..200 {
        let n = rng.random_range(2..30);
        let scores: BTreeMap<String, f64> = (0..n).map(|i| (format!("k{i:02}"), rng.random_range(0..5) as f64)).collect();
        let keys: Vec<String> = scores.keys().cloned().collect();
        let mut pos: BTreeSet<String> = keys.iter().step_by(3).cloned().collect();
        if pos.len() == keys.len() {
            pos.remove(&keys[n - 1]);
        }
        let ranked = RankedList::descending(scores.clone());
        let roc = evalkit::roc_curve(&ranked, &pos).map_err(|e| e.to_string())?;
        let want = brute_auc(&keys, &pos, &scores);
        if (roc.area() - want).abs() > 1e-12 {
            return Err(format!("trial {trial}: trapezoid area {} vs {want}", roc.area()));
        }
        let positive: Vec<f64> = pos.iter().map(|k| scores[k]).collect();
        let negative: Vec<f64> = keys.iter().filter(|k| !pos.contains(*k)).map(|k| scores[k]).collect();
        let from_scores = evalkit::auc_from_scores(&positive, &negative).map_err(|e| e.to_string())?;
        if (from_scores - want).abs() > 1e-12 {
            return Err(format!("trial {trial}: score AUC {from_scores} vs {want}"));
        }
    }
    Ok("200 random rankings: ROC area and score AUC equal pairwise counts".into())
}

fn oracle_borda() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(93);
    for trial in 0..200 {
        let k = rng.random_range(1..10);
        let keys: Vec<String> = (0..k).map(|i| format!("h{i}")).collect();
        let m = rng.random_range(1..5);
        let mut lists = Vec::new();
        let mut want: BTreeMap<String, f64> = keys.iter().map(|k| (k.clone(), 0.0)).collect();
        for _ in 0..m {
            let mut order = keys.clone();
            order.shuffle(&mut rng);
            for (r, key) in order.iter().enumerate() {
                *want.get_mut(key).unwrap() += (k - (r + 1)) as f64;
            }
            let n = order.len();
            lists.push(RankedList::descending(order.into_iter().enumerate().map(|(r, key)| (key, (n - r) as f64))));
        }
        let got = evalkit::rank_aggregate(&lists, AggregationMethod::Borda).map_err(|e| e.to_string())?;
        let expected = RankedList::descending(want);
        if got != expected {
            return Err(format!("trial {trial}: Borda aggregate differs from direct count"));
        }
    }
    Ok("200 random list sets vs direct sum of (K - rank)".into())
}

fn dense_pca(x: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (n, d) = (x.len(), x[0].len());
    let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let centred = nalgebra::DMatrix::from_fn(n, d, |i, j| x[i][j] - mean[j]);
    let cov = centred.transpose() * &centred / (n as f64 - 1.0);
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = order
        .iter()
        .map(|&i| {
            let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            v.iter().map(|x| x * big.signum()).collect()
        })
        .collect();
    (vals, vecs)
}

fn oracle_pca() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(94);
    let mut compared = 0;
    let mut attempts = 0;
    while compared < 100 && attempts < 1000 {
        attempts += 1;
        let n = rng.random_range(4..15);
        let d = rng.random_range(3..7);
        let rows: Vec<Vec<(u32, f64)>> = (0..n)
            .map(|_| (0..d as u32).map(|c| (c, rng.random_range(0.0..4.0))).collect())
            .collect();
        let m = WeightedMatrix::from_rows(
            (0..n).map(|i| format!("r{i}")).collect(),
            (0..d).map(|j| format!("c{j}")).collect(),
            rows,
            vectorspace::MatrixKind::TfIdf,
        )
        .map_err(|e| e.to_string())?;
        let dense = m.to_dense();
        let (vals, vecs) = dense_pca(&dense);
        if vals[0] - vals[1] < 1e-2 || vals[1] - vals[2] < 1e-2 {
            continue;
        }
        let pca = outlier::reduce_pca2(&m).map_err(|e| e.to_string())?;
        for k in 0..2 {
            if (pca.eigenvalues[k] - vals[k]).abs() > 1e-6 {
                return Err(format!("eigenvalue {k}: {} vs {}", pca.eigenvalues[k], vals[k]));
            }
            for (j, (got, want)) in pca.components[k].iter().zip(&vecs[k]).enumerate() {
                if (got - want).abs() > 1e-6 {
                    return Err(format!("component {k}[{j}]: {got} vs {want}"));
                }
            }
        }
        compared += 1;
    }
    expect(compared == 100, format!("{compared} random matrices vs dense eigendecomposition (1e-6)"))
}

fn oracle_kmeans() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(95);
    for trial in 0..200 {
        let n = rng.random_range(2..40);
        let dim = rng.random_range(1..4);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
        let k = rng.random_range(1..=n.min(5));
        let c = outlier::kmeans(&pts, k, trial).map_err(|e| e.to_string())?;
        let h = &c.objective_history;
        if h.windows(2).any(|w| w[1] > w[0] + 1e-9) {
            return Err(format!("trial {trial}: objective rose: {h:?}"));
        }
        if (outlier::wcss(&pts, &c) - h.last().copied().unwrap_or(f64::NAN)).abs() > 1e-9 {
            return Err(format!("trial {trial}: final objective differs from WCSS"));
        }
    }
    Ok("200 random point sets: WCSS never increases".into())
}

fn main() {
    let started = Instant::now();
    let tmp = tempfile::tempdir().expect("temp dir");
    let t = tmp.path();
    let mut lines = vec![
        line("1", "RS-DFO gold-term recovery", c1_gold_recovery(t)),
        line("2a", "Corpus statistics, RS-DFO", c2_table_stats(t, BenchmarkDataset::RsDfo)),
        line("2b", "Corpus statistics, Mig-Mg", c2_table_stats(t, BenchmarkDataset::MigMg)),
        line("2c", "Corpus statistics, Aut-CaN", c2_table_stats(t, BenchmarkDataset::AutCan)),
        line("3a", "AUC vs brute-force pairwise oracle", c3a_auc_oracle()),
        line("3b", "CrossBee ensemble on Aut-CaN", c3b_crossbee(t)),
        line("4", "Open discovery replay, Mig-Mg", c4_open(t)),
        line("5", "Outlier groups, Aut-CaN", c5_outlier(t)),
        line("6", "RaJoLink replay, Aut-CaN", c6_rajolink(t)),
        line("7a", "Proximity measures vs brute force", c7a_proximity_oracle()),
        line("7b", "Triangle-closing test edges", c7b_triangle_auc()),
        line("7c", "Random baseline AUC", c7c_random_baseline()),
        line("8a", "Byte-identical reruns, every pipeline", c8a_determinism(t)),
        line("8b", "CrossBee Aut-CaN, 1 vs 8 threads", c8b_threads(t)),
        line("9a", "TF-IDF oracle", oracle_tfidf()),
        line("9b", "ROC/AUC oracle", oracle_roc()),
        line("9c", "Borda aggregation oracle", oracle_borda()),
        line("9d", "PCA vs dense eigendecomposition", oracle_pca()),
        line("9e", "k-means objective monotonicity", oracle_kmeans()),
    ];
    let secs = started.elapsed().as_secs_f64();
    lines.push(line(
        "9f",
        "Acceptance suite runtime",
        expect(secs < 300.0, format!("{secs:.1}s (<300s)")),
    ));
    println!("data directory: {}", data_dir().display());
    for l in &lines {
        println!(
            "{} [{}] {}: {}",
            if l.pass { "PASS" } else { "FAIL" },
            l.id,
            l.name,
            l.detail
        );
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!("{} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

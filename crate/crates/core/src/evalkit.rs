//! ROC curves, AUC, rank positions and rank aggregation.
//!
//! All functions read a [`RankedList`] in list order: earlier items are the
//! ones predicted first, and consecutive items with equal scores form one tie
//! group.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::RankedList;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)` from `(0,0)` to `(1,1)`.
    pub points: Vec<(f64, f64)>,
    pub positives: usize,
    pub negatives: usize,
}

/// Tie groups of the list as `(positives, negatives)` counts, in list order.
fn tie_groups(ranked: &RankedList, positives: &BTreeSet<String>) -> Result<Vec<(usize, usize)>> {
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut last: Option<f64> = None;
    for item in ranked.items() {
        let is_pos = positives.contains(&item.key);
        if last.is_none_or(|s| s.total_cmp(&item.score).is_ne()) {
            groups.push((0, 0));
            last = Some(item.score);
        }
        let g = groups.last_mut().expect("group pushed");
        if is_pos {
            g.0 += 1;
        } else {
            g.1 += 1;
        }
    }
    let p: usize = groups.iter().map(|g| g.0).sum();
    let n: usize = groups.iter().map(|g| g.1).sum();
    if p == 0 {
        return Err(Error::Roc("no positive items in ranking".into()));
    }
    if n == 0 {
        return Err(Error::Roc("no negative items in ranking".into()));
    }
    Ok(groups)
}

/// Drops points that lie on the straight segment between their neighbours.
/// Works on integer counts, so the test is exact.
fn compress(points: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(points.len());
    for p in points {
        if out.last() == Some(&p) {
            continue;
        }
        if out.len() >= 2 {
            let a = out[out.len() - 2];
            let b = out[out.len() - 1];
            let cross = (b.0 as i128 - a.0 as i128) * (p.1 as i128 - a.1 as i128)
                - (b.1 as i128 - a.1 as i128) * (p.0 as i128 - a.0 as i128);
            if cross == 0 {
                out.pop();
            }
        }
        out.push(p);
    }
    out
}

/// ROC curve from a threshold sweep over the ranking. Items in `positives`
/// that are not ranked are ignored.
pub fn roc_curve(ranked: &RankedList, positives: &BTreeSet<String>) -> Result<RocCurve> {
    let groups = tie_groups(ranked, positives)?;
    let p: usize = groups.iter().map(|g| g.0).sum();
    let n: usize = groups.iter().map(|g| g.1).sum();
    let mut counts = vec![(0usize, 0usize)];
    let (mut fp, mut tp) = (0, 0);
    for (gp, gn) in groups {
        fp += gn;
        tp += gp;
        counts.push((fp, tp));
    }
    let points = compress(counts)
        .into_iter()
        .map(|(f, t)| (f as f64 / n as f64, t as f64 / p as f64))
        .collect();
    Ok(RocCurve {
        points,
        positives: p,
        negatives: n,
    })
}

impl RocCurve {
    /// Trapezoidal area under the curve.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (x, y) in &self.points {
            let _ = writeln!(out, "{x},{y}");
        }
        out
    }

    /// Self-contained SVG rendering of the curve with the chance diagonal.
    pub fn to_svg(&self, size: u32) -> String {
        let s = size as f64;
        let pts: Vec<String> = self
            .points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", x * s, s - y * s))
            .collect();
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n\
             <rect width=\"{size}\" height=\"{size}\" fill=\"white\" stroke=\"black\"/>\n\
             <line x1=\"0\" y1=\"{size}\" x2=\"{size}\" y2=\"0\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n\
             <polyline fill=\"none\" stroke=\"blue\" stroke-width=\"2\" points=\"{}\"/>\n\
             </svg>\n",
            pts.join(" ")
        )
    }
}

/// Mann-Whitney AUC: probability that a positive outranks a negative, ties
/// counted as one half.
pub fn auc(ranked: &RankedList, positives: &BTreeSet<String>) -> Result<f64> {
    let groups = tie_groups(ranked, positives)?;
    let p: usize = groups.iter().map(|g| g.0).sum();
    let n: usize = groups.iter().map(|g| g.1).sum();
    let mut neg_below = n as f64;
    let mut wins = 0.0;
    for (gp, gn) in groups {
        neg_below -= gn as f64;
        wins += gp as f64 * neg_below + 0.5 * gp as f64 * gn as f64;
    }
    Ok(wins / (p as f64 * n as f64))
}

/// Mann-Whitney AUC from raw positive and negative scores (higher is better).
pub fn auc_from_scores(positive: &[f64], negative: &[f64]) -> Result<f64> {
    if positive.is_empty() || negative.is_empty() {
        return Err(Error::Roc("need at least one positive and one negative".into()));
    }
    let mut neg = negative.to_vec();
    neg.sort_by(f64::total_cmp);
    let mut wins = 0.0;
    for &s in positive {
        let below = neg.partition_point(|&x| x < s);
        let not_above = neg.partition_point(|&x| x <= s);
        wins += below as f64 + 0.5 * (not_above - below) as f64;
    }
    Ok(wins / (positive.len() as f64 * negative.len() as f64))
}

/// 1-based position of `key` in list order.
pub fn position_of(key: &str, ranked: &RankedList) -> Result<usize> {
    ranked
        .keys()
        .position(|k| k == key)
        .map(|i| i + 1)
        .ok_or_else(|| Error::UnknownKey(key.to_owned()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMethod {
    #[default]
    Borda,
}

/// Combines several rankings over their common keys.
///
/// Borda: a key at 1-based position `r` of a list restricted to the `K`
/// common keys earns `K - r` points; points are summed over lists.
pub fn rank_aggregate(lists: &[RankedList], method: AggregationMethod) -> Result<RankedList> {
    let Some(first) = lists.first() else {
        return Err(Error::Empty("no rankings to aggregate".into()));
    };
    let mut common: BTreeSet<&str> = first.keys().collect();
    for l in &lists[1..] {
        let keys: BTreeSet<&str> = l.keys().collect();
        common.retain(|k| keys.contains(k));
    }
    if common.is_empty() {
        return Err(Error::Empty("rankings share no keys".into()));
    }
    let k = common.len() as u64;
    let mut points: BTreeMap<&str, u64> = common.iter().map(|&c| (c, 0)).collect();
    match method {
        AggregationMethod::Borda => {
            for l in lists {
                let mut rank = 0u64;
                let mut seen: HashSet<&str> = HashSet::new();
                for key in l.keys() {
                    if common.contains(key) && seen.insert(key) {
                        rank += 1;
                        *points.get_mut(key).expect("common key") += k - rank;
                    }
                }
            }
        }
    }
    Ok(RankedList::descending(
        points.into_iter().map(|(key, p)| (key.to_owned(), p as f64)),
    ))
}

/// Average 1-based ranks of `scores` sorted descending; tied scores share
/// the mean of the positions they occupy.
pub fn average_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]].total_cmp(&scores[order[i]]).is_eq() {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

//! Ordered candidate lists with a fixed tie rule.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::Normalizer;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    /// Highest score first; equal scores ordered by ascending key.
    Descending,
    /// Exact reverse of [`SortOrder::Descending`].
    Ascending,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedItem {
    pub key: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    items: Vec<RankedItem>,
    order: SortOrder,
}

fn descending(a: &RankedItem, b: &RankedItem) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.key.cmp(&b.key))
}

impl RankedList {
    pub fn new(items: impl IntoIterator<Item = (String, f64)>, order: SortOrder) -> Self {
        let mut items: Vec<RankedItem> = items
            .into_iter()
            .map(|(key, score)| RankedItem { key, score })
            .collect();
        items.sort_by(descending);
        if order == SortOrder::Ascending {
            items.reverse();
        }
        RankedList { items, order }
    }

    pub fn descending(items: impl IntoIterator<Item = (String, f64)>) -> Self {
        Self::new(items, SortOrder::Descending)
    }

    pub fn empty() -> Self {
        RankedList {
            items: Vec::new(),
            order: SortOrder::Descending,
        }
    }

    pub fn items(&self) -> &[RankedItem] {
        &self.items
    }

    pub fn order(&self) -> SortOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|i| i.key.as_str())
    }

    pub fn score_of(&self, key: &str) -> Option<f64> {
        self.items.iter().find(|i| i.key == key).map(|i| i.score)
    }

    /// The same items in the opposite order.
    pub fn reversed(&self) -> Self {
        let mut items = self.items.clone();
        items.reverse();
        RankedList {
            items,
            order: match self.order {
                SortOrder::Descending => SortOrder::Ascending,
                SortOrder::Ascending => SortOrder::Descending,
            },
        }
    }

    /// Keeps only items whose key satisfies `keep`, preserving order.
    pub fn retain(&self, mut keep: impl FnMut(&str) -> bool) -> Self {
        RankedList {
            items: self.items.iter().filter(|i| keep(&i.key)).cloned().collect(),
            order: self.order,
        }
    }

    pub fn top(&self, n: usize) -> &[RankedItem] {
        &self.items[..n.min(self.items.len())]
    }
}

fn loose(normalizer: &Normalizer, s: &str) -> String {
    normalizer.normalize_phrase(&s.replace('-', " "))
}

/// Maps an expert's free-text choice onto a key of `ranked`.
///
/// Tries exact, case-insensitive and normalized-phrase equality in turn, then
/// the same comparison with hyphens read as spaces, so `"lactoylglutathione"`
/// resolves to `"S-Lactoylglutathione"`. The first ranked match wins.
pub fn resolve_choice(
    stage: &str,
    choice: &str,
    ranked: &RankedList,
    normalizer: &Normalizer,
) -> Result<String> {
    let choice = choice.trim();
    let keys: Vec<&str> = ranked.keys().collect();
    let by = |f: &dyn Fn(&str) -> bool| keys.iter().find(|k| f(k)).map(|k| k.to_string());
    let strict = normalizer.normalize_phrase(choice);
    let relaxed = loose(normalizer, choice);
    let found = by(&|k| k == choice)
        .or_else(|| by(&|k| k.eq_ignore_ascii_case(choice)))
        .or_else(|| by(&|k| !strict.is_empty() && normalizer.normalize_phrase(k) == strict))
        .or_else(|| by(&|k| !relaxed.is_empty() && loose(normalizer, k) == relaxed));
    found.ok_or_else(|| {
        let lower = choice.to_lowercase();
        let mut near: Vec<(f64, &str)> = keys
            .iter()
            .map(|k| (strsim::jaro_winkler(&lower, &k.to_lowercase()), *k))
            .filter(|(s, _)| *s >= 0.75)
            .collect();
        near.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        Error::UnknownChoice {
            stage: stage.to_owned(),
            term: choice.to_owned(),
            suggestions: near.into_iter().take(3).map(|(_, k)| k.to_owned()).collect(),
        }
    })
}

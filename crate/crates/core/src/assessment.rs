//! Assessment sets: the `(X', Y')` intervention/outcome pairs an abstraction
//! is judged on.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dag;

/// Default ceiling on the size of a complete assessment set.
pub const DEFAULT_MAX_PAIRS: u128 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssessmentKind {
    Complete,
    Causal,
    Parental,
    Custom,
}

impl FromStr for AssessmentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "complete" => Ok(AssessmentKind::Complete),
            "causal" => Ok(AssessmentKind::Causal),
            "parental" => Ok(AssessmentKind::Parental),
            "custom" => Ok(AssessmentKind::Custom),
            other => Err(format!("unknown assessment kind {other:?}")),
        }
    }
}

impl fmt::Display for AssessmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssessmentKind::Complete => "complete",
            AssessmentKind::Causal => "causal",
            AssessmentKind::Parental => "parental",
            AssessmentKind::Custom => "custom",
        })
    }
}

/// Intervened set `x` and observed set `y`, each sorted by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub x: Vec<String>,
    pub y: Vec<String>,
}

impl Pair {
    pub fn new<S: AsRef<str>>(x: &[S], y: &[S]) -> Self {
        let sorted = |v: &[S]| {
            let mut out: Vec<String> = v.iter().map(|s| s.as_ref().to_string()).collect();
            out.sort();
            out
        };
        Pair {
            x: sorted(x),
            y: sorted(y),
        }
    }

    fn check(&self, dag: &Dag) -> Result<()> {
        if self.x.is_empty() {
            return Err(Error::EmptySet("intervened"));
        }
        if self.y.is_empty() {
            return Err(Error::EmptySet("outcome"));
        }
        let mut seen = BTreeSet::new();
        for v in self.x.iter().chain(&self.y) {
            if dag.index_of(v).is_none() {
                return Err(Error::UnknownVariable(v.clone()));
            }
            if !seen.insert(v) {
                return Err(if self.x.contains(v) && self.y.contains(v) {
                    Error::Overlap(v.clone())
                } else {
                    Error::DuplicateVariable(v.clone())
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({{{}}}, {{{}}})", self.x.join(","), self.y.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssessmentSet {
    pub kind: AssessmentKind,
    pub pairs: Vec<Pair>,
}

impl AssessmentSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Number of disjoint pairs of non-empty subsets of an `n`-element set.
pub fn complete_pair_count(n: u32) -> u128 {
    3u128.pow(n) + 1 - 2 * 2u128.pow(n)
}

/// Builds an assessment set over the high-level graph. `max_pairs` caps the
/// enumeration behind complete and causal sets.
pub fn build_assessment_set(
    kind: AssessmentKind,
    high: &Dag,
    custom: Option<&[Pair]>,
    max_pairs: u128,
) -> Result<AssessmentSet> {
    let mut pairs = match kind {
        AssessmentKind::Complete => complete_pairs(high, max_pairs)?,
        AssessmentKind::Causal => complete_pairs(high, max_pairs)?
            .into_iter()
            .filter(|p| is_causal(high, p))
            .collect(),
        AssessmentKind::Parental => (0..high.len())
            .filter(|&y| !high.parents(y).is_empty())
            .map(|y| {
                let x: Vec<&str> = high
                    .parents(y)
                    .iter()
                    .map(|&p| high.names()[p].as_str())
                    .collect();
                Pair::new(&x, &[high.names()[y].as_str()])
            })
            .collect(),
        AssessmentKind::Custom => {
            let list = custom.ok_or(Error::EmptySet("custom pair"))?;
            let mut out = Vec::with_capacity(list.len());
            for p in list {
                let p = Pair::new(&p.x, &p.y);
                p.check(high)?;
                out.push(p);
            }
            out
        }
    };
    pairs.sort();
    pairs.dedup();
    Ok(AssessmentSet { kind, pairs })
}

fn complete_pairs(high: &Dag, max_pairs: u128) -> Result<Vec<Pair>> {
    let n = high.len();
    let count = complete_pair_count(n as u32);
    if count > max_pairs {
        return Err(Error::TooManyPairs {
            count,
            limit: max_pairs,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    // each variable is in X (1), Y (2) or neither (0)
    let mut roles = vec![0u8; n];
    loop {
        let pick = |r: u8| -> Vec<&str> {
            (0..n)
                .filter(|&i| roles[i] == r)
                .map(|i| high.names()[i].as_str())
                .collect()
        };
        let (x, y) = (pick(1), pick(2));
        if !x.is_empty() && !y.is_empty() {
            out.push(Pair::new(&x, &y));
        }
        let Some(i) = (0..n).rev().find(|&i| roles[i] < 2) else {
            break;
        };
        roles[i] += 1;
        roles[i + 1..].iter_mut().for_each(|r| *r = 0);
    }
    Ok(out)
}

/// Every node of `y` is reachable from `x` once edges into `x` are removed.
pub fn is_causal(high: &Dag, pair: &Pair) -> bool {
    let x: Vec<usize> = pair.x.iter().filter_map(|v| high.index_of(v)).collect();
    let mut cut = vec![false; high.len()];
    for &i in &x {
        cut[i] = true;
    }
    let reach = high.reachable_from(&x, &cut);
    pair.y
        .iter()
        .all(|v| high.index_of(v).is_some_and(|i| reach[i]))
}

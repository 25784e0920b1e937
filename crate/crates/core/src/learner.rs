//! Exhaustive search for the abstraction (and optionally high-level
//! mechanisms) minimizing an overall interventional error.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::abstraction::{alpha_defects, Abstraction};
use crate::assessment::AssessmentSet;
use crate::error::{Error, Result, Violations};
use crate::matrix::{array_from_rows, kron_all};
use crate::measures::{base_matrix, high_matrix, Aggregator, MeasureKind, Square};
use crate::scm::{MechanismSpec, Scm, ScmSpec};

pub const DEFAULT_MAX_CANDIDATES: u128 = 1_000_000;

/// Number of surjections from an `m`-set onto an `n`-set.
pub fn surjection_count(m: usize, n: usize) -> u128 {
    let mut binom = 1i128;
    let mut total = 0i128;
    for k in 0..=n {
        let term = binom * ((n - k) as i128).pow(m as u32);
        total += if k % 2 == 0 { term } else { -term };
        binom = binom * (n - k) as i128 / (k + 1) as i128;
    }
    total as u128
}

/// All `n × m` binary surjection matrices, ordered lexicographically by the
/// word `(row of column 0, row of column 1, …)`.
pub fn enumerate_surjections(m: usize, n: usize) -> Result<Vec<Array2<f64>>> {
    if n == 0 || m < n {
        return Err(Error::NoSurjection {
            domain: m,
            codomain: n,
        });
    }
    let mut out = Vec::with_capacity(surjection_count(m, n) as usize);
    let mut word = vec![0usize; m];
    loop {
        let mut hit = vec![false; n];
        word.iter().for_each(|&r| hit[r] = true);
        if hit.iter().all(|&h| h) {
            let mut a = Array2::zeros((n, m));
            for (c, &r) in word.iter().enumerate() {
                a[[r, c]] = 1.0;
            }
            out.push(a);
        }
        if !crate::index::advance(&mut word, &vec![n; m]) {
            break;
        }
    }
    Ok(out)
}

/// Admissible mechanisms for one high-level variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismSlot {
    pub variable: String,
    pub parents: Vec<String>,
    pub candidates: Vec<Vec<Vec<f64>>>,
}

/// What to enumerate. Groups without an entry in `alphas` use the partial
/// abstraction's alpha if it has one, and every surjection otherwise.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CandidateSpace {
    #[serde(default)]
    pub mechanisms: Vec<MechanismSlot>,
    /// Alpha candidates per high-level variable, columns in canonical order
    /// of the preimage.
    #[serde(default)]
    pub alphas: BTreeMap<String, Vec<Vec<Vec<f64>>>>,
}

impl CandidateSpace {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnConfig {
    pub kind: MeasureKind,
    pub aggregator: Aggregator,
    pub max_candidates: u128,
}

impl LearnConfig {
    pub fn new(kind: MeasureKind) -> Self {
        LearnConfig {
            kind,
            aggregator: Aggregator::Sup,
            max_candidates: DEFAULT_MAX_CANDIDATES,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    /// Position in enumeration order.
    pub index: usize,
    /// Chosen candidate per mechanism slot.
    pub mechanisms: Vec<usize>,
    /// Chosen candidate per high-level variable, in canonical order.
    pub alphas: Vec<usize>,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnResult {
    pub abstraction: Abstraction,
    pub high: Scm,
    pub best: RankedCandidate,
    /// Every candidate, sorted by `(error, index)`.
    pub ranking: Vec<RankedCandidate>,
    /// Alpha candidates per high-level variable, indexed by `RankedCandidate::alphas`.
    pub alpha_candidates: Vec<Vec<Array2<f64>>>,
    /// Number of per-pair error evaluations performed.
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LearnOutcome {
    Learned(Box<LearnResult>),
    /// The variable map reverses some causal order; every candidate has
    /// infinite error.
    NotOrderPreserving,
}

impl LearnOutcome {
    pub fn learned(self) -> Option<LearnResult> {
        match self {
            LearnOutcome::Learned(r) => Some(*r),
            LearnOutcome::NotOrderPreserving => None,
        }
    }
}

fn alpha_lists(partial: &Abstraction, space: &CandidateSpace) -> Result<Vec<Vec<Array2<f64>>>> {
    for name in space.alphas.keys() {
        partial.group(name)?;
    }
    partial
        .groups()
        .iter()
        .map(|g| match (space.alphas.get(&g.high), &g.alpha) {
            (Some(list), _) => list
                .iter()
                .map(|rows| {
                    let a = array_from_rows(rows)?;
                    if a.dim() != (g.high_size, g.low_size()) {
                        return Err(Error::InvalidCandidate(format!(
                            "alpha for {} has shape {:?}",
                            g.high,
                            a.dim()
                        )));
                    }
                    let defects = alpha_defects(&g.high, &a);
                    if !defects.is_empty() {
                        return Err(Error::InvalidCandidate(Violations(defects).to_string()));
                    }
                    Ok(a)
                })
                .collect(),
            (None, Some(a)) => Ok(vec![a.clone()]),
            (None, None) => enumerate_surjections(g.low_size(), g.high_size),
        })
        .collect()
}

fn fill_template(template: &ScmSpec, slots: &[MechanismSlot], choice: &[usize]) -> Result<Scm> {
    let mut spec = template.clone();
    for (slot, &c) in slots.iter().zip(choice) {
        spec.mechanisms.insert(
            slot.variable.clone(),
            MechanismSpec {
                parents: slot.parents.clone(),
                matrix: slot.candidates[c].clone(),
            },
        );
    }
    Scm::from_spec(spec).map_err(|e| Error::InvalidCandidate(e.to_string()))
}

fn decode(mut flat: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (o, &r) in out.iter_mut().zip(radices).rev() {
        *o = flat % r;
        flat /= r;
    }
    out
}

/// Evaluates every candidate completion and returns the minimizer; ties go to
/// the earliest candidate in enumeration order (mechanism slots vary slowest,
/// then alphas in canonical high-level order).
pub fn learn(
    base: &Scm,
    template: &ScmSpec,
    partial: &Abstraction,
    set: &AssessmentSet,
    space: &CandidateSpace,
    config: &LearnConfig,
) -> Result<LearnOutcome> {
    if set.is_empty() {
        return Err(Error::EmptyAssessmentSet);
    }
    let alphas = alpha_lists(partial, space)?;
    let mech_radices: Vec<usize> = space
        .mechanisms
        .iter()
        .map(|s| s.candidates.len())
        .collect();
    let alpha_radices: Vec<usize> = alphas.iter().map(Vec::len).collect();
    let count = mech_radices
        .iter()
        .chain(&alpha_radices)
        .fold(1u128, |acc, &r| acc.saturating_mul(r as u128));
    if count == 0 {
        return Err(Error::EmptyCandidateSpace);
    }
    if count > config.max_candidates {
        return Err(Error::TooManyCandidates {
            count,
            limit: config.max_candidates,
        });
    }
    if !partial.is_order_preserving(base.dag(), &template.dag()) {
        return Ok(LearnOutcome::NotOrderPreserving);
    }

    let mus: Vec<Array2<f64>> = set
        .pairs
        .iter()
        .map(|p| base_matrix(base, partial, p))
        .collect::<Result<_>>()?;
    let group_sets: Vec<(Vec<usize>, Vec<usize>)> = set
        .pairs
        .iter()
        .map(|p| Ok((partial.canonical_high(&p.x)?, partial.canonical_high(&p.y)?)))
        .collect::<Result<_>>()?;
    let mech_count: usize = mech_radices.iter().product();
    let alpha_count: usize = alpha_radices.iter().product();

    let mut ranking = Vec::with_capacity(count as usize);
    let mut evaluations = 0u64;
    let mut errors = vec![0.0; set.len()];
    for m in 0..mech_count {
        let mech_choice = decode(m, &mech_radices);
        let high = fill_template(template, &space.mechanisms, &mech_choice)?;
        let nus: Vec<Array2<f64>> = set
            .pairs
            .iter()
            .map(|p| high_matrix(&high, partial, p))
            .collect::<Result<_>>()?;
        for a in 0..alpha_count {
            let alpha_choice = decode(a, &alpha_radices);
            let lift =
                |groups: &[usize]| kron_all(groups.iter().map(|&g| &alphas[g][alpha_choice[g]]));
            for (k, (gx, gy)) in group_sets.iter().enumerate() {
                let (ax, ay) = (lift(gx), lift(gy));
                errors[k] = Square {
                    mu: &mus[k],
                    nu: &nus[k],
                    alpha_x: &ax,
                    alpha_y: &ay,
                }
                .error(config.kind)?;
                evaluations += 1;
            }
            ranking.push(RankedCandidate {
                index: m * alpha_count + a,
                mechanisms: mech_choice.clone(),
                alphas: alpha_choice,
                error: config.aggregator.apply(&errors)?,
            });
        }
    }

    let mut best = 0;
    for (i, c) in ranking.iter().enumerate() {
        if c.error < ranking[best].error {
            best = i;
        }
    }
    let best = ranking[best].clone();
    ranking.sort_by(|a, b| a.error.total_cmp(&b.error).then(a.index.cmp(&b.index)));

    let chosen: Vec<Array2<f64>> = best
        .alphas
        .iter()
        .enumerate()
        .map(|(g, &i)| alphas[g][i].clone())
        .collect();
    Ok(LearnOutcome::Learned(Box::new(LearnResult {
        abstraction: partial.with_alphas(chosen)?,
        high: fill_template(template, &space.mechanisms, &best.mechanisms)?,
        best,
        ranking,
        alpha_candidates: alphas,
        evaluations,
    })))
}

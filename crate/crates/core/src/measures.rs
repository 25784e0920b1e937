//! Jensen-Shannon distance, its lift to stochastic matrices, and the four
//! interventional error measures.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::abstraction::{pseudo_inverse, Abstraction};
use crate::assessment::{AssessmentSet, Pair};
use crate::error::{Error, Result};
use crate::intervention::interventional_matrix;
use crate::scm::Scm;

/// Jensen-Shannon distance with natural logarithms.
pub fn jsd(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Shape(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(jsd_view(ArrayView1::from(p), ArrayView1::from(q)))
}

fn jsd_view(p: ArrayView1<f64>, q: ArrayView1<f64>) -> f64 {
    // ln1p form keeps nearly equal columns from leaving rounding residue
    let mut div = 0.0;
    for (&a, &b) in p.iter().zip(q.iter()) {
        let m = 0.5 * (a + b);
        if m == 0.0 {
            continue;
        }
        let half_gap = 0.5 * (a - b) / m;
        if a > 0.0 {
            div += 0.5 * a * half_gap.ln_1p();
        }
        if b > 0.0 {
            div += 0.5 * b * (-half_gap).ln_1p();
        }
    }
    // rounding can leave a tiny negative residue
    div.max(0.0).sqrt()
}

/// Largest column-wise Jensen-Shannon distance.
pub fn matrix_distance(a: &Array2<f64>, b: &Array2<f64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.dim(), b.dim())));
    }
    Ok(a.columns()
        .into_iter()
        .zip(b.columns())
        .map(|(x, y)| jsd_view(x, y))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Ic,
    Iil,
    Isil,
    Isc,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 4] = [
        MeasureKind::Ic,
        MeasureKind::Iil,
        MeasureKind::Isil,
        MeasureKind::Isc,
    ];
}

impl FromStr for MeasureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ic" => Ok(MeasureKind::Ic),
            "iil" => Ok(MeasureKind::Iil),
            "isil" => Ok(MeasureKind::Isil),
            "isc" => Ok(MeasureKind::Isc),
            other => Err(format!("unknown measure {other:?}")),
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureKind::Ic => "ic",
            MeasureKind::Iil => "iil",
            MeasureKind::Isil => "isil",
            MeasureKind::Isc => "isc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    Sup,
    Mean,
}

impl Aggregator {
    pub fn apply(self, values: &[f64]) -> Result<f64> {
        if values.is_empty() {
            return Err(Error::EmptyAssessmentSet);
        }
        Ok(match self {
            Aggregator::Sup => values.iter().copied().fold(0.0, f64::max),
            Aggregator::Mean => values.iter().sum::<f64>() / values.len() as f64,
        })
    }
}

impl FromStr for Aggregator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sup" | "max" => Ok(Aggregator::Sup),
            "mean" => Ok(Aggregator::Mean),
            other => Err(format!("unknown aggregator {other:?}")),
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregator::Sup => "sup",
            Aggregator::Mean => "mean",
        })
    }
}

/// A finite non-negative error or the infinite sentinel reported for
/// abstractions that reverse the causal order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaybeInfiniteError {
    Finite(f64),
    Infinite,
}

impl MaybeInfiniteError {
    pub fn value(self) -> f64 {
        match self {
            MaybeInfiniteError::Finite(v) => v,
            MaybeInfiniteError::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, MaybeInfiniteError::Infinite)
    }
}

impl fmt::Display for MaybeInfiniteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaybeInfiniteError::Finite(v) => write!(f, "{v:.6}"),
            MaybeInfiniteError::Infinite => f.write_str("inf"),
        }
    }
}

/// The four matrices of one commuting square: `mu` (base), `nu` (high) and the
/// lifted alphas on the intervened and observed sides.
#[derive(Debug, Clone, Copy)]
pub struct Square<'a> {
    pub mu: &'a Array2<f64>,
    pub nu: &'a Array2<f64>,
    pub alpha_x: &'a Array2<f64>,
    pub alpha_y: &'a Array2<f64>,
}

impl Square<'_> {
    pub fn error(&self, kind: MeasureKind) -> Result<f64> {
        let Square {
            mu,
            nu,
            alpha_x,
            alpha_y,
        } = *self;
        check_square(self)?;
        match kind {
            MeasureKind::Ic => matrix_distance(&alpha_y.dot(mu), &nu.dot(alpha_x)),
            MeasureKind::Iil => matrix_distance(mu, &pseudo_inverse(alpha_y)?.dot(nu).dot(alpha_x)),
            MeasureKind::Isil => {
                matrix_distance(nu, &alpha_y.dot(mu).dot(&pseudo_inverse(alpha_x)?))
            }
            MeasureKind::Isc => matrix_distance(
                &pseudo_inverse(alpha_y)?.dot(nu),
                &mu.dot(&pseudo_inverse(alpha_x)?),
            ),
        }
    }
}

fn check_square(s: &Square) -> Result<()> {
    let ok = s.alpha_y.ncols() == s.mu.nrows()
        && s.alpha_x.ncols() == s.mu.ncols()
        && s.alpha_y.nrows() == s.nu.nrows()
        && s.alpha_x.nrows() == s.nu.ncols();
    if ok {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "mu {:?}, nu {:?}, alpha_x {:?}, alpha_y {:?} do not form a square",
            s.mu.dim(),
            s.nu.dim(),
            s.alpha_x.dim(),
            s.alpha_y.dim()
        )))
    }
}

/// Base-side interventional matrix for a high-level pair, laid out to match
/// the lifted alphas.
pub fn base_matrix(base: &Scm, abs: &Abstraction, pair: &Pair) -> Result<Array2<f64>> {
    let lx = abs.low_order(&pair.x)?;
    let ly = abs.low_order(&pair.y)?;
    Ok(interventional_matrix(base, &lx, &ly)?.matrix.into_array())
}

/// High-side interventional matrix for a pair, in canonical high order.
pub fn high_matrix(high: &Scm, abs: &Abstraction, pair: &Pair) -> Result<Array2<f64>> {
    let names = |set: &[String]| -> Result<Vec<String>> {
        Ok(abs
            .canonical_high(set)?
            .into_iter()
            .map(|i| abs.groups()[i].high.clone())
            .collect())
    };
    Ok(
        interventional_matrix(high, &names(&pair.x)?, &names(&pair.y)?)?
            .matrix
            .into_array(),
    )
}

pub fn error_wrt_intervention<S: AsRef<str>>(
    kind: MeasureKind,
    base: &Scm,
    high: &Scm,
    abs: &Abstraction,
    x: &[S],
    y: &[S],
) -> Result<f64> {
    let pair = Pair::new(x, y);
    if let Some(v) = pair.x.iter().find(|v| pair.y.contains(v)) {
        return Err(Error::Overlap(v.clone()));
    }
    let mu = base_matrix(base, abs, &pair)?;
    let nu = high_matrix(high, abs, &pair)?;
    let ax = abs.alpha_for_set(&pair.x)?.matrix;
    let ay = abs.alpha_for_set(&pair.y)?.matrix;
    Square {
        mu: &mu,
        nu: &nu,
        alpha_x: &ax,
        alpha_y: &ay,
    }
    .error(kind)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub kind: MeasureKind,
    pub aggregator: Aggregator,
    /// Empty when the abstraction is not order-preserving.
    pub pairs: Vec<(Pair, f64)>,
    pub overall: MaybeInfiniteError,
}

pub fn overall_error(
    kind: MeasureKind,
    base: &Scm,
    high: &Scm,
    abs: &Abstraction,
    set: &AssessmentSet,
    agg: Aggregator,
) -> Result<ErrorReport> {
    if set.is_empty() {
        return Err(Error::EmptyAssessmentSet);
    }
    if !abs.is_order_preserving(base.dag(), high.dag()) {
        return Ok(ErrorReport {
            kind,
            aggregator: agg,
            pairs: Vec::new(),
            overall: MaybeInfiniteError::Infinite,
        });
    }
    let mut pairs = Vec::with_capacity(set.len());
    for p in &set.pairs {
        pairs.push((
            p.clone(),
            error_wrt_intervention(kind, base, high, abs, &p.x, &p.y)?,
        ));
    }
    let values: Vec<f64> = pairs.iter().map(|(_, e)| *e).collect();
    let overall = MaybeInfiniteError::Finite(agg.apply(&values)?);
    Ok(ErrorReport {
        kind,
        aggregator: agg,
        pairs,
        overall,
    })
}

//! Abstractions `(R, a, α)` between two models and their matrix algebra.
//!
//! Each high-level variable owns a group: its preimage under `a`, listed in
//! base canonical order, and a binary surjection matrix `α` from the joint
//! outcomes of that group onto its own outcomes. Groups are kept in high-level
//! canonical order, which fixes the column layout of every lifted matrix.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation, Violations};
use crate::graph::Dag;
use crate::index::axis_permutation;
use crate::matrix::{identity, kron_all};
use crate::scm::{Scm, Variable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSpec {
    pub low_order: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

/// Serialized abstraction; `alphas` may omit variables still to be learned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractionSpec {
    pub relevant: Vec<String>,
    pub map: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub alphas: BTreeMap<String, AlphaSpec>,
}

impl AbstractionSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("abstraction serializes")
    }
}

/// Defects of a candidate alpha matrix as a binary surjection.
pub fn alpha_defects(variable: &str, m: &Array2<f64>) -> Vec<Violation> {
    let mut out = Vec::new();
    for ((r, c), &x) in m.indexed_iter() {
        if x != 0.0 && x != 1.0 {
            out.push(Violation::NotBinary {
                variable: variable.to_string(),
                row: r,
                column: c,
            });
        }
    }
    for (c, col) in m.columns().into_iter().enumerate() {
        if col.iter().filter(|&&x| x == 1.0).count() != 1 {
            out.push(Violation::ColumnNotFunctional {
                variable: variable.to_string(),
                column: c,
            });
        }
    }
    for (r, row) in m.rows().into_iter().enumerate() {
        if !row.iter().any(|&x| x == 1.0) {
            out.push(Violation::RowNotSurjective {
                variable: variable.to_string(),
                row: r,
            });
        }
    }
    out
}

/// Every invariant breach of `spec` relative to the two models' variables.
pub fn validate_abstraction(
    spec: &AbstractionSpec,
    base: &[Variable],
    high: &[Variable],
) -> Vec<Violation> {
    let mut out = Vec::new();
    let base_size: BTreeMap<&str, usize> =
        base.iter().map(|v| (v.name.as_str(), v.size())).collect();
    let high_size: BTreeMap<&str, usize> =
        high.iter().map(|v| (v.name.as_str(), v.size())).collect();

    let mut relevant = BTreeSet::new();
    for r in &spec.relevant {
        if !base_size.contains_key(r.as_str()) {
            out.push(Violation::UnknownVariable {
                context: "relevant set".into(),
                variable: r.clone(),
            });
        }
        if !relevant.insert(r.as_str()) {
            out.push(Violation::DuplicateRelevant {
                variable: r.clone(),
            });
        }
    }
    for r in &spec.relevant {
        if !spec.map.contains_key(r) && base_size.contains_key(r.as_str()) {
            out.push(Violation::UnmappedRelevant {
                variable: r.clone(),
            });
        }
    }
    for (from, to) in &spec.map {
        if !relevant.contains(from.as_str()) {
            out.push(Violation::UnknownVariable {
                context: "variable map".into(),
                variable: from.clone(),
            });
        }
        if !high_size.contains_key(to.as_str()) {
            out.push(Violation::UnknownVariable {
                context: "variable map image".into(),
                variable: to.clone(),
            });
        }
    }
    for h in high {
        if !spec.map.values().any(|t| t == &h.name) {
            out.push(Violation::MapNotSurjective {
                variable: h.name.clone(),
            });
        }
    }

    for (name, alpha) in &spec.alphas {
        let Some(&rows) = high_size.get(name.as_str()) else {
            out.push(Violation::UnknownVariable {
                context: "alphas".into(),
                variable: name.clone(),
            });
            continue;
        };
        let preimage: BTreeSet<&str> = spec
            .map
            .iter()
            .filter(|(_, t)| *t == name)
            .map(|(f, _)| f.as_str())
            .collect();
        let listed: BTreeSet<&str> = alpha.low_order.iter().map(String::as_str).collect();
        if listed != preimage || listed.len() != alpha.low_order.len() {
            out.push(Violation::LowOrderMismatch {
                variable: name.clone(),
            });
            continue;
        }
        let cols: usize = alpha
            .low_order
            .iter()
            .map(|v| base_size.get(v.as_str()).copied().unwrap_or(0))
            .product();
        let ncols = alpha.matrix.first().map_or(0, Vec::len);
        if alpha.matrix.iter().any(|r| r.len() != ncols) {
            out.push(Violation::RaggedMatrix {
                variable: name.clone(),
            });
            continue;
        }
        if (alpha.matrix.len(), ncols) != (rows, cols) {
            out.push(Violation::ShapeMismatch {
                variable: name.clone(),
                expected: (rows, cols),
                found: (alpha.matrix.len(), ncols),
            });
            continue;
        }
        let m = Array2::from_shape_fn((rows, cols), |(r, c)| alpha.matrix[r][c]);
        out.extend(alpha_defects(name, &m));
    }
    out
}

/// The preimage of one high-level variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub high: String,
    pub high_size: usize,
    /// Preimage in base canonical order.
    pub low: Vec<String>,
    pub low_dims: Vec<usize>,
    /// `high_size × ∏ low_dims`, columns in canonical order of `low`.
    pub alpha: Option<Array2<f64>>,
}

impl Group {
    pub fn low_size(&self) -> usize {
        self.low_dims.iter().product()
    }

    /// High outcome assigned to each low column.
    pub fn images(&self) -> Result<Vec<usize>> {
        let alpha = self
            .alpha
            .as_ref()
            .ok_or_else(|| Error::MissingAlpha(self.high.clone()))?;
        Ok(alpha
            .columns()
            .into_iter()
            .map(|c| c.iter().position(|&x| x == 1.0).expect("functional column"))
            .collect())
    }

    /// Low columns mapped onto each high outcome.
    pub fn preimages(&self) -> Result<Vec<Vec<usize>>> {
        let mut out = vec![Vec::new(); self.high_size];
        for (c, h) in self.images()?.into_iter().enumerate() {
            out[h].push(c);
        }
        Ok(out)
    }
}

/// A `α`-matrix lifted to a set of high-level variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedAlpha {
    /// High-level variables in canonical order (the row layout).
    pub high: Vec<String>,
    /// Low-level variables, group by group (the column layout).
    pub low: Vec<String>,
    pub matrix: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Abstraction {
    base_vars: Vec<Variable>,
    high_vars: Vec<Variable>,
    relevant: Vec<String>,
    map: BTreeMap<String, String>,
    groups: Vec<Group>,
}

impl Abstraction {
    /// Builds a possibly partial abstraction (alphas may be missing).
    pub fn new(spec: &AbstractionSpec, base: &[Variable], high: &[Variable]) -> Result<Self> {
        let violations = validate_abstraction(spec, base, high);
        if !violations.is_empty() {
            return Err(Error::InvalidAbstraction(Violations(violations)));
        }
        let relevant: Vec<String> = base
            .iter()
            .filter(|v| spec.map.contains_key(&v.name))
            .map(|v| v.name.clone())
            .collect();
        let groups = high
            .iter()
            .map(|h| {
                let members: Vec<&Variable> = base
                    .iter()
                    .filter(|v| spec.map.get(&v.name) == Some(&h.name))
                    .collect();
                let low: Vec<String> = members.iter().map(|v| v.name.clone()).collect();
                let low_dims: Vec<usize> = members.iter().map(|v| v.size()).collect();
                let alpha = spec.alphas.get(&h.name).map(|a| {
                    // reorder columns from the listed low order to canonical order
                    let listed_dims: Vec<usize> = a
                        .low_order
                        .iter()
                        .map(|n| low_dims[low.iter().position(|l| l == n).unwrap()])
                        .collect();
                    let perm: Vec<usize> = low
                        .iter()
                        .map(|n| a.low_order.iter().position(|l| l == n).unwrap())
                        .collect();
                    let map = axis_permutation(&listed_dims, &perm);
                    Array2::from_shape_fn((h.size(), map.len()), |(r, c)| a.matrix[r][map[c]])
                });
                Group {
                    high: h.name.clone(),
                    high_size: h.size(),
                    low,
                    low_dims,
                    alpha,
                }
            })
            .collect();
        Ok(Abstraction {
            base_vars: base.to_vec(),
            high_vars: high.to_vec(),
            relevant,
            map: spec.map.clone(),
            groups,
        })
    }

    pub fn between(spec: &AbstractionSpec, base: &Scm, high: &Scm) -> Result<Self> {
        Self::new(spec, base.variables(), high.variables())
    }

    /// Identity abstraction of a model onto itself.
    pub fn identity(scm: &Scm) -> Self {
        let vars = scm.variables();
        let spec = AbstractionSpec {
            relevant: vars.iter().map(|v| v.name.clone()).collect(),
            map: vars
                .iter()
                .map(|v| (v.name.clone(), v.name.clone()))
                .collect(),
            alphas: vars
                .iter()
                .map(|v| {
                    let rows = identity(v.size())
                        .rows()
                        .into_iter()
                        .map(|r| r.to_vec())
                        .collect();
                    (
                        v.name.clone(),
                        AlphaSpec {
                            low_order: vec![v.name.clone()],
                            matrix: rows,
                        },
                    )
                })
                .collect(),
        };
        Self::new(&spec, vars, vars).expect("identity abstraction is valid")
    }

    pub fn to_spec(&self) -> AbstractionSpec {
        let alphas = self
            .groups
            .iter()
            .filter_map(|g| {
                g.alpha.as_ref().map(|a| {
                    let rows = a.rows().into_iter().map(|r| r.to_vec()).collect();
                    (
                        g.high.clone(),
                        AlphaSpec {
                            low_order: g.low.clone(),
                            matrix: rows,
                        },
                    )
                })
            })
            .collect();
        AbstractionSpec {
            relevant: self.relevant.clone(),
            map: self.map.clone(),
            alphas,
        }
    }

    pub fn base_variables(&self) -> &[Variable] {
        &self.base_vars
    }

    pub fn high_variables(&self) -> &[Variable] {
        &self.high_vars
    }

    /// Relevant set in base canonical order.
    pub fn relevant(&self) -> &[String] {
        &self.relevant
    }

    pub fn var_map(&self) -> &BTreeMap<String, String> {
        &self.map
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group(&self, high: &str) -> Result<&Group> {
        self.groups
            .iter()
            .find(|g| g.high == high)
            .ok_or_else(|| Error::UnknownVariable(high.to_string()))
    }

    pub fn is_complete(&self) -> bool {
        self.groups.iter().all(|g| g.alpha.is_some())
    }

    /// Replaces every alpha, given in group order. Each must be a binary
    /// surjection of the right shape.
    pub fn with_alphas(&self, alphas: Vec<Array2<f64>>) -> Result<Self> {
        if alphas.len() != self.groups.len() {
            return Err(Error::Shape(format!(
                "{} alphas for {} groups",
                alphas.len(),
                self.groups.len()
            )));
        }
        let mut out = self.clone();
        for (g, a) in out.groups.iter_mut().zip(alphas) {
            check_alpha(g, &a)?;
            g.alpha = Some(a);
        }
        Ok(out)
    }

    /// Sorts high-level names into canonical order, rejecting unknown or
    /// repeated names.
    pub fn canonical_high<S: AsRef<str>>(&self, set: &[S]) -> Result<Vec<usize>> {
        let mut idx = Vec::with_capacity(set.len());
        for s in set {
            let s = s.as_ref();
            let i = self
                .groups
                .iter()
                .position(|g| g.high == s)
                .ok_or_else(|| Error::UnknownVariable(s.to_string()))?;
            if idx.contains(&i) {
                return Err(Error::DuplicateVariable(s.to_string()));
            }
            idx.push(i);
        }
        idx.sort_unstable();
        Ok(idx)
    }

    /// Low-level variables of a high-level set, group by group.
    pub fn low_order<S: AsRef<str>>(&self, set: &[S]) -> Result<Vec<String>> {
        let idx = self.canonical_high(set)?;
        let mut low = Vec::new();
        for i in idx {
            let g = &self.groups[i];
            if g.low.is_empty() {
                return Err(Error::Unabstracted(g.high.clone()));
            }
            low.extend(g.low.iter().cloned());
        }
        Ok(low)
    }

    /// Kronecker product of the alphas of `set`, taken in canonical order.
    pub fn alpha_for_set<S: AsRef<str>>(&self, set: &[S]) -> Result<LiftedAlpha> {
        if set.is_empty() {
            return Err(Error::EmptySet("high-level"));
        }
        let idx = self.canonical_high(set)?;
        let mut factors = Vec::with_capacity(idx.len());
        for &i in &idx {
            let g = &self.groups[i];
            factors.push(
                g.alpha
                    .as_ref()
                    .ok_or_else(|| Error::MissingAlpha(g.high.clone()))?,
            );
        }
        Ok(LiftedAlpha {
            high: idx.iter().map(|&i| self.groups[i].high.clone()).collect(),
            low: self.low_order(set)?,
            matrix: kron_all(factors),
        })
    }

    /// True iff no relevant pair `X ≺ Y` in the base graph is mapped to
    /// `a(Y) ≺ a(X)` in the high graph. Cost is one graph search per node.
    pub fn is_order_preserving(&self, base: &Dag, high: &Dag) -> bool {
        let base_closure = base.transitive_closure();
        let high_closure = high.transitive_closure();
        let mapped: Vec<(usize, usize)> = self
            .relevant
            .iter()
            .filter_map(|r| Some((base.index_of(r)?, high.index_of(&self.map[r])?)))
            .collect();
        for &(x, ax) in &mapped {
            for &(y, ay) in &mapped {
                if base_closure[x][y] && high_closure[ay][ax] {
                    return false;
                }
            }
        }
        true
    }
}

fn check_alpha(g: &Group, a: &Array2<f64>) -> Result<()> {
    if a.dim() != (g.high_size, g.low_size()) {
        return Err(Error::Shape(format!(
            "alpha for {} is {}x{}, expected {}x{}",
            g.high,
            a.nrows(),
            a.ncols(),
            g.high_size,
            g.low_size()
        )));
    }
    let defects = alpha_defects(&g.high, a);
    if !defects.is_empty() {
        return Err(Error::InvalidAbstraction(Violations(defects)));
    }
    Ok(())
}

/// Closed-form pseudo-inverse of a binary surjection: the transpose with each
/// column divided by the matching row sum.
pub fn pseudo_inverse(alpha: &Array2<f64>) -> Result<Array2<f64>> {
    let sums = alpha.sum_axis(ndarray::Axis(1));
    if let Some(r) = sums.iter().position(|&s| s == 0.0) {
        return Err(Error::NotSurjective(r));
    }
    let mut out = alpha.t().to_owned();
    for (mut col, s) in out.columns_mut().into_iter().zip(sums.iter()) {
        col /= *s;
    }
    Ok(out)
}

/// `beta ∘ alpha`: from alpha's base to beta's high-level model.
pub fn compose_abstractions(beta: &Abstraction, alpha: &Abstraction) -> Result<Abstraction> {
    if beta.base_vars != alpha.high_vars {
        return Err(Error::ModelMismatch(
            "the outer abstraction's base is not the inner abstraction's target".into(),
        ));
    }
    let mut map = BTreeMap::new();
    for (low, mid) in &alpha.map {
        if let Some(top) = beta.map.get(mid) {
            map.insert(low.clone(), top.clone());
        }
    }
    let relevant: Vec<String> = alpha
        .base_vars
        .iter()
        .filter(|v| map.contains_key(&v.name))
        .map(|v| v.name.clone())
        .collect();
    let dims: BTreeMap<&str, usize> = alpha
        .base_vars
        .iter()
        .map(|v| (v.name.as_str(), v.size()))
        .collect();

    let mut alphas = BTreeMap::new();
    for g in &beta.groups {
        let b = g
            .alpha
            .as_ref()
            .ok_or_else(|| Error::MissingAlpha(g.high.clone()))?;
        let inner = alpha.alpha_for_set(&g.low)?;
        let product = b.dot(&inner.matrix);
        alphas.insert(
            g.high.clone(),
            AlphaSpec {
                low_order: inner.low.clone(),
                matrix: product.rows().into_iter().map(|r| r.to_vec()).collect(),
            },
        );
        debug_assert_eq!(
            inner
                .low
                .iter()
                .map(|n| dims[n.as_str()])
                .product::<usize>(),
            product.ncols()
        );
    }
    let spec = AbstractionSpec {
        relevant,
        map,
        alphas,
    };
    Abstraction::new(&spec, &alpha.base_vars, &beta.high_vars)
}

//! Finite discrete structural causal models.
//!
//! Each variable carries a conditional stochastic matrix whose rows are its own
//! outcomes and whose columns are the joint outcomes of its parents, flattened
//! in the order given by the mechanism's `parents` list.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation, Violations};
use crate::graph::Dag;
use crate::index::{advance, axis_permutation, OutcomeIndex};
use crate::matrix::{array_from_rows, StochasticMatrix, STOCHASTIC_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub outcomes: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, outcomes: &[&str]) -> Self {
        Variable {
            name: name.into(),
            outcomes: outcomes.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Variable with outcomes labelled `"0"`, `"1"`, ….
    pub fn numbered(name: impl Into<String>, size: usize) -> Self {
        Variable {
            name: name.into(),
            outcomes: (0..size).map(|i| i.to_string()).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.outcomes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismSpec {
    pub parents: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

/// Serialized form of a model, possibly invalid. This is the JSON file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmSpec {
    pub variables: Vec<Variable>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub mechanisms: BTreeMap<String, MechanismSpec>,
}

impl ScmSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    /// Graph over the declared variables, ignoring edges to unknown names.
    pub fn dag(&self) -> Dag {
        let names: Vec<String> = self.variables.iter().map(|v| v.name.clone()).collect();
        let known: BTreeSet<&str> = names.iter().map(String::as_str).collect();
        let edges: Vec<(String, String)> = self
            .edges
            .iter()
            .filter(|(a, b)| known.contains(a.as_str()) && known.contains(b.as_str()))
            .cloned()
            .collect();
        Dag::new(names, &edges).expect("edges filtered to known names")
    }

    pub fn build(self) -> Result<Scm> {
        Scm::from_spec(self)
    }
}

/// Every invariant breach in `spec`; empty when the model is valid.
pub fn validate_scm(spec: &ScmSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut sizes: HashMap<&str, usize> = HashMap::new();
    for v in &spec.variables {
        if sizes.insert(v.name.as_str(), v.size()).is_some() {
            out.push(Violation::DuplicateVariable {
                variable: v.name.clone(),
            });
        }
        if v.outcomes.is_empty() {
            out.push(Violation::EmptyDomain {
                variable: v.name.clone(),
            });
        }
        let mut seen = BTreeSet::new();
        for o in &v.outcomes {
            if !seen.insert(o) {
                out.push(Violation::DuplicateOutcome {
                    variable: v.name.clone(),
                    outcome: o.clone(),
                });
            }
        }
    }
    for (a, b) in &spec.edges {
        for end in [a, b] {
            if !sizes.contains_key(end.as_str()) {
                out.push(Violation::UnknownVariable {
                    context: "edge".into(),
                    variable: end.clone(),
                });
            }
        }
    }

    let dag = spec.dag();
    let mut on_cycle: Vec<usize> = (0..dag.len()).filter(|&v| dag.descendants(v)[v]).collect();
    // one violation per strongly connected group, named by its first member
    while let Some(&first) = on_cycle.first() {
        let reach = dag.descendants(first);
        on_cycle.retain(|&v| v != first && !(reach[v] && dag.descendants(v)[first]));
        out.push(Violation::CycleDetected {
            variable: dag.names()[first].clone(),
        });
    }

    for name in spec.mechanisms.keys() {
        if !sizes.contains_key(name.as_str()) {
            out.push(Violation::UnknownVariable {
                context: "mechanisms".into(),
                variable: name.clone(),
            });
        }
    }
    for (i, v) in spec.variables.iter().enumerate() {
        let Some(mech) = spec.mechanisms.get(&v.name) else {
            out.push(Violation::MissingMechanism {
                variable: v.name.clone(),
            });
            continue;
        };
        let mut cols = 1usize;
        let mut parents_known = true;
        for p in &mech.parents {
            match sizes.get(p.as_str()) {
                Some(&d) => cols *= d,
                None => {
                    parents_known = false;
                    out.push(Violation::UnknownVariable {
                        context: format!("mechanism of {}", v.name),
                        variable: p.clone(),
                    });
                }
            }
        }
        let declared: BTreeSet<&str> = dag
            .parents(i)
            .iter()
            .map(|&p| dag.names()[p].as_str())
            .collect();
        let listed: BTreeSet<&str> = mech.parents.iter().map(String::as_str).collect();
        if listed.len() != mech.parents.len() || declared != listed {
            out.push(Violation::ParentMismatch {
                variable: v.name.clone(),
            });
        }
        let ncols = mech.matrix.first().map_or(0, Vec::len);
        if mech.matrix.iter().any(|r| r.len() != ncols) {
            out.push(Violation::RaggedMatrix {
                variable: v.name.clone(),
            });
            continue;
        }
        let found = (mech.matrix.len(), ncols);
        if parents_known && found != (v.size(), cols) {
            out.push(Violation::ShapeMismatch {
                variable: v.name.clone(),
                expected: (v.size(), cols),
                found,
            });
        }
        for (r, row) in mech.matrix.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&x) {
                    out.push(Violation::EntryOutOfRange {
                        variable: v.name.clone(),
                        row: r,
                        column: c,
                        value: x,
                    });
                }
            }
        }
        for c in 0..ncols {
            let sum: f64 = mech.matrix.iter().map(|row| row[c]).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                out.push(Violation::ColumnNotStochastic {
                    variable: v.name.clone(),
                    column: c,
                    sum,
                });
            }
        }
    }
    out
}

/// A validated model. Immutable; declaration order is the canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Scm {
    variables: Vec<Variable>,
    edges: Vec<(String, String)>,
    /// Parent indices in the column order of each mechanism.
    parents: Vec<Vec<usize>>,
    mechanisms: Vec<StochasticMatrix>,
    dag: Dag,
    topo: Vec<usize>,
}

impl Scm {
    pub fn from_spec(spec: ScmSpec) -> Result<Self> {
        let violations = validate_scm(&spec);
        if !violations.is_empty() {
            return Err(Error::InvalidModel(Violations(violations)));
        }
        let dag = spec.dag();
        let topo = dag.topological_order()?;
        let mut parents = Vec::with_capacity(spec.variables.len());
        let mut mechanisms = Vec::with_capacity(spec.variables.len());
        for v in &spec.variables {
            let mech = &spec.mechanisms[&v.name];
            parents.push(
                mech.parents
                    .iter()
                    .map(|p| dag.index_of(p).expect("validated parent"))
                    .collect(),
            );
            mechanisms.push(StochasticMatrix::new(array_from_rows(&mech.matrix)?)?);
        }
        Ok(Scm {
            variables: spec.variables,
            edges: spec.edges,
            parents,
            mechanisms,
            dag,
            topo,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Scm::from_spec(ScmSpec::from_json(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Scm::from_spec(ScmSpec::from_path(path)?)
    }

    pub fn to_spec(&self) -> ScmSpec {
        let mechanisms = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let parents = self.parents[i]
                    .iter()
                    .map(|&p| self.variables[p].name.clone())
                    .collect();
                (
                    v.name.clone(),
                    MechanismSpec {
                        parents,
                        matrix: self.mechanisms[i].to_rows(),
                    },
                )
            })
            .collect();
        ScmSpec {
            variables: self.variables.clone(),
            edges: self.edges.clone(),
            mechanisms,
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.dag
            .index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn name(&self, index: usize) -> &str {
        &self.variables[index].name
    }

    pub fn dims(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::size).collect()
    }

    /// Parents of `index` in the column order of its mechanism.
    pub fn mechanism_parents(&self, index: usize) -> &[usize] {
        &self.parents[index]
    }

    pub fn mechanism(&self, index: usize) -> &StochasticMatrix {
        &self.mechanisms[index]
    }

    /// Outcome position of `label` within variable `index`.
    pub fn outcome_index(&self, index: usize, label: &str) -> Result<usize> {
        let v = &self.variables[index];
        v.outcomes
            .iter()
            .position(|o| o == label)
            .ok_or_else(|| Error::UnknownOutcome {
                variable: v.name.clone(),
                outcome: label.to_string(),
            })
    }

    /// Variable indices in topological order, ties broken by declaration.
    pub fn topo_indices(&self) -> &[usize] {
        &self.topo
    }

    pub fn topological_order(&self) -> Vec<String> {
        self.topo
            .iter()
            .map(|&i| self.variables[i].name.clone())
            .collect()
    }

    /// Resolves names to indices, rejecting unknown and repeated names.
    pub fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let i = self.index_of(n.as_ref())?;
            if out.contains(&i) {
                return Err(Error::DuplicateVariable(n.as_ref().to_string()));
            }
            out.push(i);
        }
        Ok(out)
    }

    /// Column of the mechanism of `index` selected by the full outcome `state`.
    pub(crate) fn parent_column(&self, index: usize, state: &[usize]) -> usize {
        self.parents[index]
            .iter()
            .fold(0, |acc, &p| acc * self.variables[p].size() + state[p])
    }

    /// Copy of the model where `index` is a root with a point-mass mechanism.
    pub(crate) fn with_point_mass(&self, index: usize, value: usize) -> Scm {
        let name = &self.variables[index].name;
        let edges: Vec<(String, String)> = self
            .edges
            .iter()
            .filter(|(_, to)| to != name)
            .cloned()
            .collect();
        let mut parents = self.parents.clone();
        parents[index].clear();
        let mut mechanisms = self.mechanisms.clone();
        mechanisms[index] = StochasticMatrix::point_mass(self.variables[index].size(), value);
        let names = self.variables.iter().map(|v| v.name.clone()).collect();
        let dag = Dag::new(names, &edges).expect("subgraph of a valid graph");
        let topo = dag
            .topological_order()
            .expect("subgraph of a DAG is acyclic");
        Scm {
            variables: self.variables.clone(),
            edges,
            parents,
            mechanisms,
            dag,
            topo,
        }
    }

    /// Exact joint distribution over all variables in canonical order, by full
    /// enumeration of the outcome space.
    pub fn joint_distribution(&self) -> Vec<f64> {
        let dims = self.dims();
        let size: usize = dims.iter().product();
        let mut joint = Vec::with_capacity(size);
        let mut state = vec![0usize; dims.len()];
        for _ in 0..size {
            let mut p = 1.0;
            for v in 0..dims.len() {
                let col = self.parent_column(v, &state);
                p *= self.mechanisms[v].as_array()[[state[v], col]];
                if p == 0.0 {
                    break;
                }
            }
            joint.push(p);
            advance(&mut state, &dims);
        }
        joint
    }

    /// Marginal of a full joint (as returned by [`Scm::joint_distribution`])
    /// onto `to_vars`, in the given order.
    pub fn marginalize<S: AsRef<str>>(&self, joint: &[f64], to_vars: &[S]) -> Result<Vec<f64>> {
        let names: Vec<String> = self.variables.iter().map(|v| v.name.clone()).collect();
        marginal(joint, &names, &self.dims(), to_vars)
    }
}

/// Topological order of a validated model as variable names.
pub fn topological_order(scm: &Scm) -> Vec<String> {
    scm.topological_order()
}

/// Marginalizes a distribution over `from_vars` (dims `from_dims`) onto the
/// sub-tuple `to_vars`, which may list its variables in any order.
pub fn marginal<S: AsRef<str>>(
    joint: &[f64],
    from_vars: &[String],
    from_dims: &[usize],
    to_vars: &[S],
) -> Result<Vec<f64>> {
    let from = OutcomeIndex::new(from_dims.to_vec());
    if joint.len() != from.size() {
        return Err(Error::Shape(format!(
            "distribution has {} entries, outcome space has {}",
            joint.len(),
            from.size()
        )));
    }
    let mut positions = Vec::with_capacity(to_vars.len());
    for name in to_vars {
        let name = name.as_ref();
        let pos = from_vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        if positions.contains(&pos) {
            return Err(Error::DuplicateVariable(name.to_string()));
        }
        positions.push(pos);
    }
    // marginalize in source order, then permute to the requested order
    let mut sorted = positions.clone();
    sorted.sort_unstable();
    let kept_dims: Vec<usize> = sorted.iter().map(|&p| from_dims[p]).collect();
    let kept = OutcomeIndex::new(kept_dims.clone());
    let mut summed = vec![0.0; kept.size()];
    let mut state = vec![0usize; from_dims.len()];
    for &p in joint {
        let idx = sorted
            .iter()
            .zip(kept.strides())
            .map(|(&pos, s)| state[pos] * s)
            .sum::<usize>();
        summed[idx] += p;
        advance(&mut state, from_dims);
    }
    let perm: Vec<usize> = positions
        .iter()
        .map(|p| sorted.iter().position(|s| s == p).unwrap())
        .collect();
    let map = axis_permutation(&kept_dims, &perm);
    Ok(map.into_iter().map(|src| summed[src]).collect())
}

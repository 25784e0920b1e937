//! Hard interventions and exact interventional matrices.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::index::OutcomeIndex;
use crate::matrix::StochasticMatrix;
use crate::scm::Scm;

/// `do(targets = values)`, values given as outcome indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Intervention {
    pub targets: Vec<String>,
    pub values: Vec<usize>,
}

impl Intervention {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new<S: Into<String>>(pairs: impl IntoIterator<Item = (S, usize)>) -> Self {
        let (targets, values) = pairs.into_iter().map(|(t, v)| (t.into(), v)).unzip();
        Intervention { targets, values }
    }

    /// Builds an intervention from outcome labels, e.g. `{"Sm": "1"}`.
    pub fn from_labels(scm: &Scm, labels: &BTreeMap<String, String>) -> Result<Self> {
        let mut iv = Intervention::none();
        for (name, label) in labels {
            let i = scm.index_of(name)?;
            iv.targets.push(name.clone());
            iv.values.push(scm.outcome_index(i, label)?);
        }
        Ok(iv)
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Checks the intervention against `scm` and returns `(index, value)` pairs.
    pub fn resolve(&self, scm: &Scm) -> Result<Vec<(usize, usize)>> {
        if self.targets.len() != self.values.len() {
            return Err(Error::Shape(format!(
                "{} targets but {} values",
                self.targets.len(),
                self.values.len()
            )));
        }
        let indices = scm.resolve(&self.targets)?;
        indices
            .into_iter()
            .zip(&self.values)
            .map(|(i, &v)| {
                if v >= scm.variables()[i].size() {
                    Err(Error::OutcomeOutOfRange {
                        variable: scm.name(i).to_string(),
                        index: v,
                    })
                } else {
                    Ok((i, v))
                }
            })
            .collect()
    }

    /// Per-variable fixed values, `None` where the mechanism runs freely.
    pub(crate) fn fixed_values(&self, scm: &Scm) -> Result<Vec<Option<usize>>> {
        let mut fixed = vec![None; scm.len()];
        for (i, v) in self.resolve(scm)? {
            fixed[i] = Some(v);
        }
        Ok(fixed)
    }
}

/// The intervened model: each target becomes a root with a point-mass
/// mechanism on its value.
pub fn intervene(scm: &Scm, iv: &Intervention) -> Result<Scm> {
    let mut out = scm.clone();
    for (i, v) in iv.resolve(scm)? {
        out = out.with_point_mass(i, v);
    }
    Ok(out)
}

/// Column `j` is `P(outputs | do(inputs = decode(j)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterventionalMatrix {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub matrix: StochasticMatrix,
}

/// Exact interventional matrix by intervening once per input assignment and
/// enumerating the joint.
pub fn interventional_matrix<S: AsRef<str>>(
    scm: &Scm,
    x_vars: &[S],
    y_vars: &[S],
) -> Result<InterventionalMatrix> {
    if x_vars.is_empty() {
        return Err(Error::EmptySet("intervened"));
    }
    if y_vars.is_empty() {
        return Err(Error::EmptySet("outcome"));
    }
    let xi = scm.resolve(x_vars)?;
    let yi = scm.resolve(y_vars)?;
    if let Some(&both) = xi.iter().find(|i| yi.contains(i)) {
        return Err(Error::Overlap(scm.name(both).to_string()));
    }
    let x_index = OutcomeIndex::new(xi.iter().map(|&i| scm.variables()[i].size()).collect());
    let y_size: usize = yi.iter().map(|&i| scm.variables()[i].size()).product();
    let inputs: Vec<String> = x_vars.iter().map(|s| s.as_ref().to_string()).collect();
    let outputs: Vec<String> = y_vars.iter().map(|s| s.as_ref().to_string()).collect();

    let mut m = Array2::zeros((y_size, x_index.size()));
    let mut assignment = vec![0usize; xi.len()];
    for j in 0..x_index.size() {
        x_index.decode_into(j, &mut assignment);
        let iv = Intervention {
            targets: inputs.clone(),
            values: assignment.clone(),
        };
        let model = intervene(scm, &iv)?;
        let column = model.marginalize(&model.joint_distribution(), &outputs)?;
        for (r, p) in column.into_iter().enumerate() {
            m[[r, j]] = p;
        }
    }
    Ok(InterventionalMatrix {
        inputs,
        outputs,
        matrix: StochasticMatrix::new(m)?,
    })
}

//! Seeded ancestral sampling: plain, through a pulled-back high-level
//! intervention, and hybrid (a base model with part of it replaced by the
//! high-level model).

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abstraction::Abstraction;
use crate::error::{Error, Result};
use crate::index::OutcomeIndex;
use crate::intervention::{interventional_matrix, Intervention};
use crate::scm::Scm;

/// Identifier of the generator behind every `seed` argument.
pub const RNG_ALGORITHM: &str = "chacha8";

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Empirical counts over the full outcome space of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    variables: Vec<String>,
    index: OutcomeIndex,
    counts: Vec<u64>,
    total: u64,
}

impl Counts {
    fn new(scm: &Scm) -> Self {
        let index = OutcomeIndex::new(scm.dims());
        Counts {
            variables: scm.variables().iter().map(|v| v.name.clone()).collect(),
            counts: vec![0; index.size()],
            index,
            total: 0,
        }
    }

    fn record(&mut self, state: &[usize]) {
        self.counts[self.index.encode(state)] += 1;
        self.total += 1;
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }

    /// Fraction of samples whose state satisfies `event`.
    pub fn probability(&self, event: impl Fn(&[usize]) -> bool) -> f64 {
        let mut state = vec![0; self.variables.len()];
        let mut hits = 0u64;
        for (flat, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                self.index.decode_into(flat, &mut state);
                if event(&state) {
                    hits += c;
                }
            }
        }
        hits as f64 / self.total as f64
    }

    fn position(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Empirical marginal of one variable.
    pub fn distribution(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.position(name)?;
        let mut out = vec![0.0; self.index.dims()[i]];
        for (o, p) in out.iter_mut().enumerate() {
            *p = self.probability(|s| s[i] == o);
        }
        Ok(out)
    }

    /// Empirical distribution of `alpha(preimage)` for one high-level variable.
    pub fn abstracted_distribution(&self, abs: &Abstraction, high: &str) -> Result<Vec<f64>> {
        let g = abs.group(high)?;
        let images = g.images()?;
        let low: Vec<usize> = g
            .low
            .iter()
            .map(|n| self.position(n))
            .collect::<Result<_>>()?;
        let local = OutcomeIndex::new(g.low_dims.clone());
        let mut out = vec![0.0; g.high_size];
        let mut state = vec![0; self.variables.len()];
        let mut tuple = vec![0; low.len()];
        for (flat, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                self.index.decode_into(flat, &mut state);
                for (t, &i) in tuple.iter_mut().zip(&low) {
                    *t = state[i];
                }
                out[images[local.encode(&tuple)]] += c as f64;
            }
        }
        out.iter_mut().for_each(|p| *p /= self.total as f64);
        Ok(out)
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn draw(column: ArrayView1<f64>, rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in column.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

fn sample_node(scm: &Scm, v: usize, state: &[usize], rng: &mut impl Rng) -> usize {
    let col = scm.parent_column(v, state);
    draw(scm.mechanism(v).as_array().column(col), rng)
}

fn sample_nodes(
    scm: &Scm,
    order: &[usize],
    fixed: &[Option<usize>],
    state: &mut [usize],
    rng: &mut impl Rng,
) {
    for &v in order {
        state[v] = match fixed[v] {
            Some(x) => x,
            None => sample_node(scm, v, state, rng),
        };
    }
}

/// Ancestral sampling of `n` draws under `iv`.
pub fn forward_sample(scm: &Scm, iv: &Intervention, n: usize, seed: u64) -> Result<Counts> {
    let fixed = iv.fixed_values(scm)?;
    let mut rng = rng_from_seed(seed);
    let mut counts = Counts::new(scm);
    let mut state = vec![0; scm.len()];
    for _ in 0..n {
        sample_nodes(scm, scm.topo_indices(), &fixed, &mut state, &mut rng);
        counts.record(&state);
    }
    Ok(counts)
}

/// Resolves a high-level intervention to `(group, preimage list)` pairs.
fn high_targets(abs: &Abstraction, high_iv: &Intervention) -> Result<Vec<(usize, Vec<usize>)>> {
    if high_iv.targets.len() != high_iv.values.len() {
        return Err(Error::Shape(
            "intervention targets and values differ in length".into(),
        ));
    }
    let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
    for (name, &value) in high_iv.targets.iter().zip(&high_iv.values) {
        let gi = abs
            .groups()
            .iter()
            .position(|g| &g.high == name)
            .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
        if out.iter().any(|(g, _)| *g == gi) {
            return Err(Error::DuplicateVariable(name.clone()));
        }
        let g = &abs.groups()[gi];
        if value >= g.high_size {
            return Err(Error::OutcomeOutOfRange {
                variable: name.clone(),
                index: value,
            });
        }
        out.push((gi, g.preimages()?.swap_remove(value)));
    }
    Ok(out)
}

/// Samples the base model under low-level interventions drawn uniformly from
/// the alpha-preimage of `high_iv`, one fresh draw per sample.
pub fn pullback_intervention_sample(
    base: &Scm,
    abs: &Abstraction,
    high_iv: &Intervention,
    n: usize,
    seed: u64,
) -> Result<Counts> {
    let targets = high_targets(abs, high_iv)?;
    let resolved: Vec<(Vec<usize>, OutcomeIndex, &[usize])> = targets
        .iter()
        .map(|(gi, pre)| {
            let g = &abs.groups()[*gi];
            Ok((
                base.resolve(&g.low)?,
                OutcomeIndex::new(g.low_dims.clone()),
                pre.as_slice(),
            ))
        })
        .collect::<Result<_>>()?;
    let mut rng = rng_from_seed(seed);
    let mut counts = Counts::new(base);
    let mut state = vec![0; base.len()];
    let mut fixed = vec![None; base.len()];
    for _ in 0..n {
        for (low, index, pre) in &resolved {
            let pick = pre[rng.gen_range(0..pre.len())];
            for (k, &v) in low.iter().zip(index.decode(pick).iter()) {
                fixed[*k] = Some(v);
            }
        }
        sample_nodes(base, base.topo_indices(), &fixed, &mut state, &mut rng);
        counts.record(&state);
    }
    Ok(counts)
}

/// Structural check that the replaced block can be sampled in one step:
/// upstream part, then the block, then its downstream part.
fn severed_order(
    base: &Scm,
    replaced: &[usize],
    drivers: &[usize],
    fixed: &[Option<usize>],
) -> Result<(Vec<usize>, Vec<usize>)> {
    let dag = base.dag();
    let n = base.len();
    let mut in_block = vec![false; n];
    for &r in replaced {
        in_block[r] = true;
    }
    let below = dag.reachable_from(replaced, &[]);
    for &d in drivers {
        if below[d] {
            return Err(Error::NotSeverable(format!(
                "driver {} is downstream of the replaced variables",
                base.name(d)
            )));
        }
    }
    for v in 0..n {
        if below[v] && !in_block[v] && replaced.iter().any(|&r| dag.descendants(v)[r]) {
            return Err(Error::NotSeverable(format!(
                "{} lies between replaced variables and would be consumed out of order",
                base.name(v)
            )));
        }
        if in_block[v] && fixed[v].is_some() {
            return Err(Error::NotSeverable(format!(
                "{} is both intervened on and replaced",
                base.name(v)
            )));
        }
    }
    let topo = base.topo_indices();
    let upstream = topo
        .iter()
        .copied()
        .filter(|&v| !below[v] && !in_block[v])
        .collect();
    let downstream = topo
        .iter()
        .copied()
        .filter(|&v| below[v] && !in_block[v])
        .collect();
    Ok((upstream, downstream))
}

/// Samples the base model under `base_iv`, except that the preimage of
/// `replaced_y` is produced by the high-level model: the preimage of
/// `driver_x` is read off, mapped through its alpha, pushed through the
/// high-level interventional matrix, and pulled back uniformly.
#[allow(clippy::too_many_arguments)]
pub fn hybrid_sample<S: AsRef<str>>(
    base: &Scm,
    high: &Scm,
    abs: &Abstraction,
    replaced_y: &[S],
    driver_x: &[S],
    base_iv: &Intervention,
    n: usize,
    seed: u64,
) -> Result<Counts> {
    let ay = abs.alpha_for_set(replaced_y)?;
    let ax = abs.alpha_for_set(driver_x)?;
    if let Some(v) = ax.high.iter().find(|v| ay.high.contains(v)) {
        return Err(Error::Overlap(v.clone()));
    }
    let nu: Array2<f64> = interventional_matrix(high, &ax.high, &ay.high)?
        .matrix
        .into_array();
    let fixed = base_iv.fixed_values(base)?;
    let low_y = base.resolve(&ay.low)?;
    let low_x = base.resolve(&ax.low)?;
    let (upstream, downstream) = severed_order(base, &low_y, &low_x, &fixed)?;

    let x_index = OutcomeIndex::new(low_x.iter().map(|&i| base.variables()[i].size()).collect());
    let y_index = OutcomeIndex::new(low_y.iter().map(|&i| base.variables()[i].size()).collect());
    let x_image: Vec<usize> = ax
        .matrix
        .columns()
        .into_iter()
        .map(|c| c.iter().position(|&v| v == 1.0).expect("functional column"))
        .collect();
    let y_preimage: Vec<Vec<usize>> = ay
        .matrix
        .rows()
        .into_iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(_, &v)| v == 1.0)
                .map(|(c, _)| c)
                .collect()
        })
        .collect();

    let mut rng = rng_from_seed(seed);
    let mut counts = Counts::new(base);
    let mut state = vec![0; base.len()];
    let mut tuple_x = vec![0; low_x.len()];
    let mut tuple_y = vec![0; low_y.len()];
    for _ in 0..n {
        sample_nodes(base, &upstream, &fixed, &mut state, &mut rng);
        for (t, &i) in tuple_x.iter_mut().zip(&low_x) {
            *t = state[i];
        }
        let hx = x_image[x_index.encode(&tuple_x)];
        let hy = draw(nu.column(hx), &mut rng);
        let pre = &y_preimage[hy];
        y_index.decode_into(pre[rng.gen_range(0..pre.len())], &mut tuple_y);
        for (&i, &v) in low_y.iter().zip(&tuple_y) {
            state[i] = v;
        }
        sample_nodes(base, &downstream, &fixed, &mut state, &mut rng);
        counts.record(&state);
    }
    Ok(counts)
}

#![allow(dead_code)]

pub mod checks;

use std::collections::BTreeMap;

use causal_abstraction::abstraction::AlphaSpec;
use causal_abstraction::sampling::rng_from_seed;
use causal_abstraction::scm::MechanismSpec;
use causal_abstraction::{Abstraction, AbstractionSpec, Scm, ScmSpec, Variable};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    rng_from_seed(seed)
}

/// Random probability vector; some entries may be exactly zero.
pub fn random_distribution(rng: &mut TestRng, len: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| {
            if rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen::<f64>()
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[rng.gen_range(0..len)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Column-stochastic matrix as rows.
pub fn random_cpt(rng: &mut TestRng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    let columns: Vec<Vec<f64>> = (0..cols).map(|_| random_distribution(rng, rows)).collect();
    (0..rows)
        .map(|r| columns.iter().map(|c| c[r]).collect())
        .collect()
}

/// Random binary surjection with `n` rows and `m >= n` columns, as rows.
pub fn random_surjection(rng: &mut TestRng, n: usize, m: usize) -> Vec<Vec<f64>> {
    let mut image: Vec<usize> = (0..n).chain((n..m).map(|_| rng.gen_range(0..n))).collect();
    image.shuffle(rng);
    (0..n)
        .map(|r| {
            image
                .iter()
                .map(|&h| if h == r { 1.0 } else { 0.0 })
                .collect()
        })
        .collect()
}

pub fn identity_rows(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Model over `vars` with each edge `i -> j` present with probability
/// `edge_p`; `forward` chooses the direction (`i < j` or `i > j`). Edges in
/// `forced` are always present.
pub fn random_scm(
    rng: &mut TestRng,
    vars: &[Variable],
    edge_p: f64,
    forward: bool,
    forced: &[(usize, usize)],
) -> Scm {
    let n = vars.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let ordered = if forward { i < j } else { i > j };
            if ordered && (forced.contains(&(i, j)) || rng.gen_bool(edge_p)) {
                edges.push((vars[i].name.clone(), vars[j].name.clone()));
            }
        }
    }
    let mut mechanisms = BTreeMap::new();
    for v in vars {
        let mut parents: Vec<&Variable> = edges
            .iter()
            .filter(|(_, c)| *c == v.name)
            .map(|(p, _)| vars.iter().find(|x| &x.name == p).unwrap())
            .collect();
        parents.shuffle(rng);
        let cols: usize = parents.iter().map(|p| p.size()).product();
        mechanisms.insert(
            v.name.clone(),
            MechanismSpec {
                parents: parents.iter().map(|p| p.name.clone()).collect(),
                matrix: random_cpt(rng, v.size(), cols),
            },
        );
    }
    Scm::from_spec(ScmSpec {
        variables: vars.to_vec(),
        edges,
        mechanisms,
    })
    .expect("generated model is valid")
}

pub fn random_variables(
    rng: &mut TestRng,
    prefix: &str,
    n: usize,
    max_dim: usize,
) -> Vec<Variable> {
    (0..n)
        .map(|i| Variable::numbered(format!("{prefix}{i}"), rng.gen_range(2..=max_dim)))
        .collect()
}

/// Splits `items` into `parts` contiguous non-empty blocks.
pub fn random_blocks<T: Clone>(rng: &mut TestRng, items: &[T], parts: usize) -> Vec<Vec<T>> {
    let mut cuts: Vec<usize> = (1..items.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for c in cuts.into_iter().chain(std::iter::once(items.len())) {
        out.push(items[start..c].to_vec());
        start = c;
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct AbstractionShape {
    /// Number of high-level variables.
    pub high: usize,
    /// Largest high-level domain.
    pub max_dim: usize,
    /// Chance that a single-variable group keeps its domain with an identity alpha.
    pub identity_p: f64,
    /// Map every base variable.
    pub all_relevant: bool,
    /// Leave alphas unspecified.
    pub partial: bool,
}

/// Abstraction from `base` onto fresh high-level variables named
/// `{prefix}0..`. Relevant variables are split into contiguous blocks in
/// declaration order, so `a` is monotone.
pub fn random_abstraction(
    rng: &mut TestRng,
    base: &[Variable],
    prefix: &str,
    shape: AbstractionShape,
) -> (Vec<Variable>, AbstractionSpec) {
    let relevant: Vec<usize> = if shape.all_relevant {
        (0..base.len()).collect()
    } else {
        let r = rng.gen_range(shape.high..=base.len());
        let mut idx: Vec<usize> = (0..base.len()).collect();
        idx.shuffle(rng);
        let mut idx: Vec<usize> = idx.into_iter().take(r).collect();
        idx.sort_unstable();
        idx
    };
    let blocks = random_blocks(rng, &relevant, shape.high);
    let mut high = Vec::new();
    let mut map = BTreeMap::new();
    let mut alphas = BTreeMap::new();
    for (k, block) in blocks.iter().enumerate() {
        let name = format!("{prefix}{k}");
        let low_size: usize = block.iter().map(|&i| base[i].size()).product();
        let identity =
            block.len() == 1 && low_size <= shape.max_dim.max(1) && rng.gen_bool(shape.identity_p);
        let size = if identity {
            low_size
        } else {
            rng.gen_range(1..=shape.max_dim.min(low_size))
        };
        let mut low_order: Vec<String> = block.iter().map(|&i| base[i].name.clone()).collect();
        low_order.shuffle(rng);
        for l in &low_order {
            map.insert(l.clone(), name.clone());
        }
        let matrix = if identity {
            identity_rows(size)
        } else {
            random_surjection(rng, size, low_size)
        };
        if !shape.partial {
            alphas.insert(name.clone(), AlphaSpec { low_order, matrix });
        }
        high.push(Variable::numbered(name, size));
    }
    let spec = AbstractionSpec {
        relevant: relevant.iter().map(|&i| base[i].name.clone()).collect(),
        map,
        alphas,
    };
    (high, spec)
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub base: Scm,
    pub high: Scm,
    pub abs: Abstraction,
}

/// Base with 2..=4 variables of domain 2..=3 and an order-preserving
/// abstraction onto 2..=|base| variables of domain <= 3.
pub fn random_instance(seed: u64) -> Instance {
    instance_with(seed, 0.3, false)
}

/// Like [`random_instance`] but with identity alphas wherever possible.
pub fn identity_heavy_instance(seed: u64) -> Instance {
    instance_with(seed, 0.7, false)
}

/// Instance whose high-level graph reverses the base edge `V0 -> V1`.
pub fn reversed_instance(seed: u64) -> Instance {
    instance_with(seed, 0.3, true)
}

fn instance_with(seed: u64, identity_p: f64, reversed: bool) -> Instance {
    let mut rng = rng(seed);
    let n = rng.gen_range(2..=4);
    let vars = random_variables(&mut rng, "V", n, 3);
    let base = random_scm(
        &mut rng,
        &vars,
        0.5,
        true,
        if reversed { &[(0, 1)] } else { &[] },
    );
    let m = rng.gen_range(2..=n);
    let shape = AbstractionShape {
        high: m,
        max_dim: 3,
        identity_p,
        all_relevant: reversed,
        partial: false,
    };
    let (spec, high) = if reversed {
        // V0 and V1 must land in different groups
        let (high_vars, spec) = loop {
            let (hv, sp) = random_abstraction(&mut rng, &vars, "H", shape);
            if sp.map["V0"] != sp.map["V1"] {
                break (hv, sp);
            }
        };
        let at = |v: &str| {
            high_vars
                .iter()
                .position(|h| h.name == spec.map[v])
                .unwrap()
        };
        let high = random_scm(&mut rng, &high_vars, 0.5, false, &[(at("V1"), at("V0"))]);
        (spec, high)
    } else {
        let (high_vars, spec) = random_abstraction(&mut rng, &vars, "H", shape);
        let high = random_scm(&mut rng, &high_vars, 0.5, true, &[]);
        (spec, high)
    };
    let abs = Abstraction::between(&spec, &base, &high).expect("generated abstraction is valid");
    Instance { base, high, abs }
}

/// Models `M0 -> M1 -> ... ` with an abstraction between consecutive levels.
#[derive(Debug, Clone)]
pub struct Chain {
    pub models: Vec<Scm>,
    pub abstractions: Vec<Abstraction>,
}

pub fn random_chain(seed: u64, levels: usize) -> Chain {
    let mut rng = rng(seed);
    let n = rng.gen_range(2..=4);
    let mut vars = random_variables(&mut rng, "L0_", n, 3);
    let mut models = vec![random_scm(&mut rng, &vars, 0.5, true, &[])];
    let mut abstractions = Vec::new();
    for level in 1..levels {
        let m = rng.gen_range(2..=vars.len());
        let shape = AbstractionShape {
            high: m,
            max_dim: 3,
            identity_p: 0.2,
            all_relevant: rng.gen_bool(0.5),
            partial: false,
        };
        let (high_vars, spec) = random_abstraction(&mut rng, &vars, &format!("L{level}_"), shape);
        let high = random_scm(&mut rng, &high_vars, 0.5, true, &[]);
        abstractions.push(Abstraction::between(&spec, models.last().unwrap(), &high).unwrap());
        models.push(high);
        vars = high_vars;
    }
    Chain {
        models,
        abstractions,
    }
}

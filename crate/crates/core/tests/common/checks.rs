//! Property checks shared by the proptest suites and the acceptance runner.
//! Each takes a seed, builds its own random instance and reports the first
//! breach.

use causal_abstraction::assessment::DEFAULT_MAX_PAIRS;
use causal_abstraction::scm::MechanismSpec;
use causal_abstraction::*;
use ndarray::Array2;
use rand::Rng;

use super::*;

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn s<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn complete_set(scm: &Scm) -> AssessmentSet {
    build_assessment_set(AssessmentKind::Complete, scm.dag(), None, DEFAULT_MAX_PAIRS).unwrap()
}

/// All four measures on one pair.
pub fn measures(inst: &Instance, pair: &Pair) -> Result<[f64; 4], String> {
    let mut out = [0.0; 4];
    for (o, k) in out.iter_mut().zip(MeasureKind::ALL) {
        *o = s(error_wrt_intervention(
            k, &inst.base, &inst.high, &inst.abs, &pair.x, &pair.y,
        ))?;
    }
    Ok(out)
}

pub fn jsd_axioms(seed: u64) -> Check {
    let mut rng = rng(seed);
    let len = rng.gen_range(1..=6);
    let p = random_distribution(&mut rng, len);
    let q = random_distribution(&mut rng, len);
    let r = random_distribution(&mut rng, len);
    let d = |a: &[f64], b: &[f64]| jsd(a, b).unwrap();
    ensure!(
        d(&p, &q) >= 0.0 && d(&p, &q) <= 2f64.ln().sqrt() + 1e-12,
        "J1: jsd out of range"
    );
    ensure!(d(&p, &p) == 0.0, "J2: jsd(p, p) = {}", d(&p, &p));
    if p.iter().zip(&q).any(|(a, b)| (a - b).abs() > 1e-6) {
        ensure!(d(&p, &q) > 0.0, "J2: distinct distributions at distance 0");
    }
    ensure!((d(&p, &q) - d(&q, &p)).abs() <= 1e-9, "J3: asymmetric");
    ensure!(
        d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-9,
        "J4: triangle violated for {p:?} {q:?} {r:?}"
    );
    Ok(())
}

fn random_functional(rng: &mut TestRng, rows: usize, cols: usize) -> Array2<f64> {
    let mut f = Array2::zeros((rows, cols));
    for c in 0..cols {
        f[[rng.gen_range(0..rows), c]] = 1.0;
    }
    f
}

fn random_stochastic(rng: &mut TestRng, rows: usize, cols: usize) -> Array2<f64> {
    let rows_vec = random_cpt(rng, rows, cols);
    Array2::from_shape_fn((rows, cols), |(r, c)| rows_vec[r][c])
}

/// Shortness: composing both sides with the same deterministic map never
/// increases the distance.
pub fn shortness(seed: u64) -> Check {
    let mut rng = rng(seed);
    let (k, c) = (rng.gen_range(1..=5), rng.gen_range(1..=4));
    let p = random_stochastic(&mut rng, k, c);
    let q = random_stochastic(&mut rng, k, c);
    let base = matrix_distance(&p, &q).unwrap();
    let rows = rng.gen_range(1..=5);
    let left = random_functional(&mut rng, rows, k);
    let after = matrix_distance(&left.dot(&p), &left.dot(&q)).unwrap();
    ensure!(
        after <= base + 1e-12,
        "left composition grew the distance: {after} > {base}"
    );
    let cols = rng.gen_range(1..=4);
    let right = random_functional(&mut rng, c, cols);
    let after = matrix_distance(&p.dot(&right), &q.dot(&right)).unwrap();
    ensure!(
        after <= base + 1e-12,
        "right composition grew the distance: {after} > {base}"
    );
    let pv: Vec<f64> = p.column(0).to_vec();
    let qv: Vec<f64> = q.column(0).to_vec();
    let single = jsd(
        &left.dot(&p.column(0)).to_vec(),
        &left.dot(&q.column(0)).to_vec(),
    )
    .unwrap();
    ensure!(
        single <= jsd(&pv, &qv).unwrap() + 1e-12,
        "shortness fails on plain distributions"
    );
    Ok(())
}

/// IIL ≥ IC, IIL ≥ ISC, IC ≥ ISIL, ISC ≥ ISIL on every pair.
pub fn measure_ordering(seed: u64) -> Check {
    let inst = random_instance(seed);
    for pair in &complete_set(&inst.high).pairs {
        let [ic, iil, isil, isc] = measures(&inst, pair)?;
        let slack = 1e-12;
        ensure!(iil + slack >= ic, "{pair}: IIL {iil} < IC {ic}");
        ensure!(iil + slack >= isc, "{pair}: IIL {iil} < ISC {isc}");
        ensure!(ic + slack >= isil, "{pair}: IC {ic} < ISIL {isil}");
        ensure!(isc + slack >= isil, "{pair}: ISC {isc} < ISIL {isil}");
    }
    Ok(())
}

fn is_identity(m: &Array2<f64>) -> bool {
    m.is_square()
        && m.indexed_iter()
            .all(|((r, c), &x)| x == if r == c { 1.0 } else { 0.0 })
}

/// Returns how many pairs had an identity side, so callers can check that
/// the property was exercised at all.
pub fn identity_equalities(seed: u64) -> Result<usize, String> {
    let inst = identity_heavy_instance(seed);
    let mut exercised = 0;
    for pair in &complete_set(&inst.high).pairs {
        let ax = s(inst.abs.alpha_for_set(&pair.x))?.matrix;
        let ay = s(inst.abs.alpha_for_set(&pair.y))?.matrix;
        let [ic, iil, isil, isc] = measures(&inst, pair)?;
        if is_identity(&ax) {
            exercised += 1;
            ensure!(
                (ic - isil).abs() <= 1e-12,
                "{pair}: identity A_X but IC {ic} != ISIL {isil}"
            );
            ensure!(
                (iil - isc).abs() <= 1e-12,
                "{pair}: identity A_X but IIL {iil} != ISC {isc}"
            );
        }
        if is_identity(&ay) {
            exercised += 1;
            ensure!(
                (ic - iil).abs() <= 1e-12,
                "{pair}: identity A_Y but IC {ic} != IIL {iil}"
            );
            ensure!(
                (isil - isc).abs() <= 1e-12,
                "{pair}: identity A_Y but ISIL {isil} != ISC {isc}"
            );
        }
    }
    Ok(exercised)
}

pub fn zero_at_identity(seed: u64) -> Check {
    let inst = random_instance(seed);
    let abs = Abstraction::identity(&inst.base);
    let set = complete_set(&inst.base);
    for kind in MeasureKind::ALL {
        let report = s(overall_error(
            kind,
            &inst.base,
            &inst.base,
            &abs,
            &set,
            Aggregator::Sup,
        ))?;
        ensure!(
            report.overall.value().abs() <= 1e-12,
            "{kind} at identity is {}",
            report.overall
        );
    }
    Ok(())
}

/// Abstraction of a random base onto single-outcome variables.
pub fn singleton_instance(seed: u64) -> Instance {
    let mut rng = rng(seed);
    let n = rng.gen_range(2..=4);
    let vars = random_variables(&mut rng, "V", n, 3);
    let base = random_scm(&mut rng, &vars, 0.5, true, &[]);
    let shape = AbstractionShape {
        high: rng.gen_range(2..=n),
        max_dim: 1,
        identity_p: 0.0,
        all_relevant: false,
        partial: false,
    };
    let (high_vars, spec) = random_abstraction(&mut rng, &vars, "S", shape);
    let high = random_scm(&mut rng, &high_vars, 0.5, true, &[]);
    let abs = Abstraction::between(&spec, &base, &high).unwrap();
    Instance { base, high, abs }
}

pub fn zero_at_singleton(seed: u64) -> Check {
    let inst = singleton_instance(seed);
    let set = complete_set(&inst.high);
    let report = s(overall_error(
        MeasureKind::Ic,
        &inst.base,
        &inst.high,
        &inst.abs,
        &set,
        Aggregator::Sup,
    ))?;
    ensure!(
        report.overall.value().abs() <= 1e-12,
        "IC onto a singleton model is {}",
        report.overall
    );
    Ok(())
}

pub fn moore_penrose(seed: u64) -> Check {
    let mut rng = rng(seed);
    let m = rng.gen_range(1..=9);
    let n = rng.gen_range(1..=m.min(4));
    let rows = random_surjection(&mut rng, n, m);
    let alpha = Array2::from_shape_fn((n, m), |(r, c)| rows[r][c]);
    let pinv = s(pseudo_inverse(&alpha))?;
    let product = alpha.dot(&pinv);
    for ((r, c), &x) in product.indexed_iter() {
        let want = if r == c { 1.0 } else { 0.0 };
        ensure!((x - want).abs() <= 1e-12, "alpha·alpha+ [{r},{c}] = {x}");
    }
    for (c, col) in pinv.columns().into_iter().enumerate() {
        let support: Vec<f64> = col.iter().copied().filter(|&x| x != 0.0).collect();
        ensure!(
            support.windows(2).all(|w| w[0] == w[1]),
            "column {c} of alpha+ is not uniform"
        );
        let expected: Vec<usize> = (0..m).filter(|&k| alpha[[c, k]] == 1.0).collect();
        let actual: Vec<usize> = (0..m).filter(|&k| col[k] != 0.0).collect();
        ensure!(
            expected == actual,
            "column {c} of alpha+ has the wrong support"
        );
    }
    Ok(())
}

pub fn order_preservation(seed: u64) -> Check {
    let good = random_instance(seed);
    ensure!(
        good.abs
            .is_order_preserving(good.base.dag(), good.high.dag()),
        "monotone instance flagged"
    );
    let bad = reversed_instance(seed);
    ensure!(
        !bad.abs.is_order_preserving(bad.base.dag(), bad.high.dag()),
        "reversed instance not flagged"
    );
    for kind in MeasureKind::ALL {
        let r = s(overall_error(
            kind,
            &good.base,
            &good.high,
            &good.abs,
            &complete_set(&good.high),
            Aggregator::Sup,
        ))?;
        ensure!(
            r.overall.value().is_finite(),
            "{kind}: preserving abstraction gave {}",
            r.overall
        );
        let r = s(overall_error(
            kind,
            &bad.base,
            &bad.high,
            &bad.abs,
            &complete_set(&bad.high),
            Aggregator::Sup,
        ))?;
        ensure!(
            r.overall.is_infinite() && r.pairs.is_empty(),
            "{kind}: reversed abstraction gave {}",
            r.overall
        );
    }
    Ok(())
}

/// Per measure kind, the composed abstraction's overall error is at most the
/// sum of the parts, with the inner assessment set taken as preimages of the
/// outer one.
pub fn triangle(seed: u64, kind: MeasureKind) -> Check {
    let chain = random_chain(seed, 3);
    let (m0, m1, m2) = (&chain.models[0], &chain.models[1], &chain.models[2]);
    let (alpha, beta) = (&chain.abstractions[0], &chain.abstractions[1]);
    let composed = s(compose_abstractions(beta, alpha))?;
    let outer = complete_set(m2);
    let inner = AssessmentSet {
        kind: AssessmentKind::Custom,
        pairs: outer
            .pairs
            .iter()
            .map(|p| {
                Ok(Pair::new(
                    &s(beta.low_order(&p.x))?,
                    &s(beta.low_order(&p.y))?,
                ))
            })
            .collect::<Result<_, String>>()?,
    };
    let whole = s(overall_error(
        kind,
        m0,
        m2,
        &composed,
        &outer,
        Aggregator::Sup,
    ))?
    .overall
    .value();
    let first = s(overall_error(kind, m0, m1, alpha, &inner, Aggregator::Sup))?
        .overall
        .value();
    let second = s(overall_error(kind, m1, m2, beta, &outer, Aggregator::Sup))?
        .overall
        .value();
    ensure!(
        whole <= first + second + 1e-9,
        "{kind}: {whole} > {first} + {second}"
    );
    Ok(())
}

pub fn interventional_oracle(scm: &Scm) -> Check {
    let names: Vec<String> = scm.variables().iter().map(|v| v.name.clone()).collect();
    for pair in &complete_set(scm).pairs {
        // non-canonical orders too
        let x: Vec<String> = pair.x.iter().rev().cloned().collect();
        for (xs, ys) in [(&pair.x, &pair.y), (&x, &pair.y)] {
            let lib = s(interventional_matrix(scm, xs, ys))?.matrix.into_array();
            let want = oracle::interventional(scm, xs, ys);
            for ((r, c), &v) in lib.indexed_iter() {
                ensure!(
                    (v - want[r][c]).abs() <= 1e-12,
                    "{names:?} {xs:?}->{ys:?} [{r},{c}]: {v} vs {}",
                    want[r][c]
                );
            }
        }
    }
    Ok(())
}

/// Base instance with binary variables and a learning problem over 2..=3
/// binary high-level variables, one of whose mechanisms is open.
pub fn learning_problem(seed: u64) -> (Scm, ScmSpec, Abstraction, CandidateSpace) {
    let mut rng = rng(seed);
    let n = rng.gen_range(2..=4);
    let vars = random_variables(&mut rng, "V", n, 2);
    let base = random_scm(&mut rng, &vars, 0.5, true, &[]);
    let shape = AbstractionShape {
        high: rng.gen_range(2..=n.min(3)),
        max_dim: 2,
        identity_p: 0.0,
        all_relevant: rng.gen_bool(0.5),
        partial: true,
    };
    let (mut high_vars, spec) = random_abstraction(&mut rng, &vars, "H", shape);
    for v in &mut high_vars {
        *v = Variable::numbered(v.name.clone(), 2);
    }
    let high = random_scm(&mut rng, &high_vars, 0.6, true, &[]);
    let abs = Abstraction::between(&spec, &base, &high).unwrap();
    let mut template = high.to_spec();
    let open = high_vars.last().unwrap().name.clone();
    let MechanismSpec { parents, matrix } = template.mechanisms.remove(&open).unwrap();
    let cols = matrix[0].len();
    let mut candidates = vec![matrix];
    candidates.push(random_cpt(&mut rng, 2, cols));
    let space = CandidateSpace {
        mechanisms: vec![learner::MechanismSlot {
            variable: open,
            parents,
            candidates,
        }],
        alphas: Default::default(),
    };
    (base, template, abs, space)
}

pub fn learner_oracle(seed: u64, kind: MeasureKind) -> Check {
    let (base, template, partial, space) = learning_problem(seed);
    let dag = template.dag();
    let set =
        build_assessment_set(AssessmentKind::Complete, &dag, None, DEFAULT_MAX_PAIRS).unwrap();
    let result = s(learn(
        &base,
        &template,
        &partial,
        &set,
        &space,
        &LearnConfig::new(kind),
    ))?
    .learned()
    .ok_or("monotone instance reported as not order-preserving")?;
    let want = oracle::brute_force_minimum(
        &base,
        &template,
        &partial,
        &set.pairs,
        &space.mechanisms,
        kind,
    );
    ensure!(
        (result.best.error - want).abs() <= 1e-9,
        "{kind}: learner {} vs oracle {want}",
        result.best.error
    );
    // the reported best must reproduce its own error
    let report = s(overall_error(
        kind,
        &base,
        &result.high,
        &result.abstraction,
        &set,
        Aggregator::Sup,
    ))?;
    ensure!(
        report.overall.value() == result.best.error,
        "best candidate does not reproduce its error"
    );
    Ok(())
}

/// Learner picks the identity with zero error when base and high coincide.
pub fn learner_finds_identity(seed: u64) -> Check {
    let inst = random_instance(seed);
    let base = &inst.base;
    let identity = Abstraction::identity(base);
    let spec = identity.to_spec();
    let partial = Abstraction::new(
        &AbstractionSpec {
            alphas: Default::default(),
            ..spec.clone()
        },
        base.variables(),
        base.variables(),
    )
    .unwrap();
    let mut rng = rng(seed ^ 0x5eed);
    let mut alphas = std::collections::BTreeMap::new();
    for v in base.variables() {
        let mut list = vec![spec.alphas[&v.name].matrix.clone()];
        for _ in 0..2 {
            list.push(random_surjection(&mut rng, v.size(), v.size()));
        }
        if rng.gen_bool(0.5) {
            list.reverse();
        }
        alphas.insert(v.name.clone(), list);
    }
    let space = CandidateSpace {
        mechanisms: vec![],
        alphas,
    };
    let set = complete_set(base);
    for kind in MeasureKind::ALL {
        let r = s(learn(
            base,
            &base.to_spec(),
            &partial,
            &set,
            &space,
            &LearnConfig::new(kind),
        ))?
        .learned()
        .ok_or("identity reported as not order-preserving")?;
        ensure!(
            r.best.error.abs() <= 1e-12,
            "{kind}: best error {}",
            r.best.error
        );
        let report = s(overall_error(
            kind,
            base,
            base,
            &r.abstraction,
            &set,
            Aggregator::Sup,
        ))?;
        ensure!(
            report.overall.value() <= 1e-12,
            "{kind}: chosen abstraction has error {}",
            report.overall
        );
    }
    Ok(())
}

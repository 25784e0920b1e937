//! Ready-made models, abstractions and experiment setups.
//!
//! The small example models are built in code. The LUCAS lung-cancer network
//! ships as `data/lucas.json`; set `ABSTRACTION_DATA_DIR` to read the data
//! files from elsewhere.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::abstraction::{Abstraction, AbstractionSpec, AlphaSpec};
use crate::assessment::{
    build_assessment_set, AssessmentKind, AssessmentSet, Pair, DEFAULT_MAX_PAIRS,
};
use crate::error::{Error, Result};
use crate::learner::{CandidateSpace, MechanismSlot};
use crate::scm::{validate_scm, MechanismSpec, Scm, ScmSpec, Variable};

/// SHA-256 of the bundled `lucas.json`.
pub const LUCAS_SHA256: &str = "66133a81327cdc802782b022dac802e82354a5642092b807a4b387a302f6c428";

pub const DATA_DIR_ENV: &str = "ABSTRACTION_DATA_DIR";

pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data")))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn spec(
    variables: Vec<Variable>,
    edges: &[(&str, &str)],
    mechanisms: Vec<(&str, &[&str], Vec<Vec<f64>>)>,
) -> ScmSpec {
    ScmSpec {
        variables,
        edges: edges
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
        mechanisms: mechanisms
            .into_iter()
            .map(|(v, parents, matrix)| {
                (
                    v.to_string(),
                    MechanismSpec {
                        parents: parents.iter().map(|p| p.to_string()).collect(),
                        matrix,
                    },
                )
            })
            .collect(),
    }
}

/// Smoking → tar deposits → lung cancer.
pub fn fig1a() -> Scm {
    spec(
        vec![
            Variable::numbered("Sm", 2),
            Variable::numbered("Tar", 2),
            Variable::numbered("LC", 2),
        ],
        &[("Sm", "Tar"), ("Tar", "LC")],
        vec![
            ("Sm", &[], vec![vec![0.8], vec![0.2]]),
            ("Tar", &["Sm"], vec![vec![1.0, 0.2], vec![0.0, 0.8]]),
            ("LC", &["Tar"], vec![vec![0.9, 0.6], vec![0.1, 0.4]]),
        ],
    )
    .build()
    .expect("valid model")
}

/// Smoking → health index.
pub fn fig1b() -> Scm {
    spec(
        vec![Variable::numbered("Sm'", 2), Variable::numbered("Hea'", 2)],
        &[("Sm'", "Hea'")],
        vec![
            ("Sm'", &[], vec![vec![0.5], vec![0.5]]),
            ("Hea'", &["Sm'"], vec![vec![0.4, 0.2], vec![0.6, 0.8]]),
        ],
    )
    .build()
    .expect("valid model")
}

/// Environment and genetics → lung cancer.
pub fn fig1c() -> Scm {
    spec(
        vec![
            Variable::numbered("Env''", 3),
            Variable::numbered("Gen''", 2),
            Variable::numbered("LC''", 2),
        ],
        &[("Env''", "LC''"), ("Gen''", "LC''")],
        vec![
            ("Env''", &[], vec![vec![0.7], vec![0.1], vec![0.2]]),
            ("Gen''", &[], vec![vec![0.3], vec![0.7]]),
            (
                "LC''",
                &["Env''", "Gen''"],
                vec![
                    vec![0.7, 0.6, 0.5, 0.4, 0.4, 0.3],
                    vec![0.3, 0.4, 0.5, 0.6, 0.6, 0.7],
                ],
            ),
        ],
    )
    .build()
    .expect("valid model")
}

/// A single variable with a single outcome.
pub fn fig1d() -> Scm {
    spec(
        vec![Variable::new("*", &["0"])],
        &[],
        vec![("*", &[], vec![vec![1.0]])],
    )
    .build()
    .expect("valid model")
}

pub fn build_fig1_models() -> [Scm; 4] {
    [fig1a(), fig1b(), fig1c(), fig1d()]
}

/// `Sm ↦ Sm'`, `LC ↦ Hea'` with identity alphas.
pub fn fig1_abstraction() -> Abstraction {
    let identity = || vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let spec = AbstractionSpec {
        relevant: vec!["Sm".into(), "LC".into()],
        map: [("Sm".into(), "Sm'".into()), ("LC".into(), "Hea'".into())].into(),
        alphas: [
            (
                "Sm'".into(),
                AlphaSpec {
                    low_order: vec!["Sm".into()],
                    matrix: identity(),
                },
            ),
            (
                "Hea'".into(),
                AlphaSpec {
                    low_order: vec!["LC".into()],
                    matrix: identity(),
                },
            ),
        ]
        .into(),
    };
    Abstraction::between(&spec, &fig1a(), &fig1b()).expect("valid abstraction")
}

fn ingest_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Ingest {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Loads the LUCAS network, checking the file is a valid model with twelve
/// binary variables and twelve edges.
pub fn ingest_lucas(path: impl AsRef<Path>) -> Result<Scm> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ingest_error(path, e.to_string()))?;
    let spec = ScmSpec::from_json(&text).map_err(|e| ingest_error(path, e.to_string()))?;
    let violations = validate_scm(&spec);
    if !violations.is_empty() {
        let listing: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(ingest_error(path, listing.join("; ")));
    }
    if spec.variables.len() != 12 || spec.variables.iter().any(|v| v.size() != 2) {
        return Err(ingest_error(path, "expected 12 binary variables"));
    }
    if spec.edges.len() != 12 {
        return Err(ingest_error(
            path,
            format!("expected 12 edges, found {}", spec.edges.len()),
        ));
    }
    spec.build()
}

pub fn lucas() -> Result<Scm> {
    ingest_lucas(data_dir().join("lucas.json"))
}

/// A target value for some reproduced quantity, keyed by what it measures.
#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub key: &'static str,
    pub value: f64,
}

/// Everything needed to run one learning experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioBundle {
    pub base: Scm,
    /// High-level model; mechanisms listed in `space.mechanisms` may be absent.
    pub high: ScmSpec,
    /// Variable map without alphas.
    pub abstraction: Abstraction,
    pub space: CandidateSpace,
    pub assessments: Vec<AssessmentSet>,
    pub expected: Vec<Expectation>,
}

impl ScenarioBundle {
    pub fn assessment(&self, kind: AssessmentKind) -> &AssessmentSet {
        self.assessments
            .iter()
            .find(|a| a.kind == kind)
            .expect("scenario defines this assessment set")
    }

    pub fn expected(&self, key: &str) -> f64 {
        self.expected
            .iter()
            .find(|e| e.key == key)
            .map(|e| e.value)
            .expect("known expectation key")
    }
}

fn partial_abstraction(base: &Scm, high: &ScmSpec, pairs: &[(&str, &str)]) -> Result<Abstraction> {
    let spec = AbstractionSpec {
        relevant: pairs.iter().map(|(l, _)| l.to_string()).collect(),
        map: pairs
            .iter()
            .map(|(l, h)| (l.to_string(), h.to_string()))
            .collect(),
        alphas: Default::default(),
    };
    Abstraction::new(&spec, base.variables(), &high.variables)
}

/// Three candidate health-index mechanisms `P(Hea' | Sm')`.
pub fn health_mechanisms() -> Vec<Vec<Vec<f64>>> {
    vec![
        vec![vec![0.3, 0.2], vec![0.7, 0.8]],
        vec![vec![0.4, 0.2], vec![0.6, 0.8]],
        vec![vec![0.5, 0.2], vec![0.5, 0.8]],
    ]
}

/// LUCAS abstracted onto smoking and a health index built from coughing and
/// fatigue; the health-index mechanism is chosen among three candidates.
pub fn build_health_scenario() -> Result<ScenarioBundle> {
    let base = lucas()?;
    let high = spec(
        vec![Variable::numbered("Sm'", 2), Variable::numbered("Hea'", 2)],
        &[("Sm'", "Hea'")],
        vec![("Sm'", &[], vec![vec![0.5], vec![0.5]])],
    );
    let abstraction = partial_abstraction(
        &base,
        &high,
        &[("Sm", "Sm'"), ("Cou", "Hea'"), ("Fat", "Hea'")],
    )?;
    let space = CandidateSpace {
        mechanisms: vec![MechanismSlot {
            variable: "Hea'".into(),
            parents: vec!["Sm'".into()],
            candidates: health_mechanisms(),
        }],
        alphas: Default::default(),
    };
    let causal =
        build_assessment_set(AssessmentKind::Causal, &high.dag(), None, DEFAULT_MAX_PAIRS)?;
    let expected = vec![
        Expectation {
            key: "ic.optimum",
            value: 0.029,
        },
        Expectation {
            key: "iil.optimum",
            value: 0.160,
        },
        Expectation {
            key: "ic.low.do0",
            value: 0.607,
        },
        Expectation {
            key: "ic.high.do0",
            value: 0.600,
        },
        Expectation {
            key: "ic.low.do1",
            value: 0.797,
        },
        Expectation {
            key: "ic.high.do1",
            value: 0.797,
        },
        Expectation {
            key: "iil.low.do0",
            value: 0.413,
        },
        Expectation {
            key: "iil.high.do0",
            value: 0.498,
        },
        Expectation {
            key: "iil.low.do1",
            value: 0.681,
        },
        Expectation {
            key: "iil.high.do1",
            value: 0.799,
        },
        Expectation {
            key: "accident.base.do0",
            value: 0.679,
        },
        Expectation {
            key: "accident.base.do1",
            value: 0.766,
        },
        Expectation {
            key: "accident.ic.do0",
            value: 0.256,
        },
        Expectation {
            key: "accident.ic.do1",
            value: 0.341,
        },
        Expectation {
            key: "accident.iil.do0",
            value: 0.427,
        },
        Expectation {
            key: "accident.iil.do1",
            value: 0.680,
        },
    ];
    Ok(ScenarioBundle {
        base,
        high,
        abstraction,
        space,
        assessments: vec![causal],
        expected,
    })
}

/// LUCAS abstracted onto environment, genetics and lung cancer; all alphas
/// are learned.
pub fn build_lungcancer_scenario() -> Result<ScenarioBundle> {
    let base = lucas()?;
    let high = fig1c().to_spec();
    let abstraction = partial_abstraction(
        &base,
        &high,
        &[
            ("Anx", "Env''"),
            ("PP", "Env''"),
            ("Gen", "Gen''"),
            ("All", "Gen''"),
            ("LC", "LC''"),
        ],
    )?;
    let dag = high.dag();
    let custom = [Pair::new(&["Env''"], &["LC''"])];
    let assessments = vec![
        build_assessment_set(AssessmentKind::Causal, &dag, None, DEFAULT_MAX_PAIRS)?,
        build_assessment_set(AssessmentKind::Parental, &dag, None, DEFAULT_MAX_PAIRS)?,
        build_assessment_set(
            AssessmentKind::Custom,
            &dag,
            Some(&custom),
            DEFAULT_MAX_PAIRS,
        )?,
    ];
    let expected = vec![
        Expectation {
            key: "isil.causal",
            value: 0.254,
        },
        Expectation {
            key: "isil.parental",
            value: 0.221,
        },
        Expectation {
            key: "isil.custom",
            value: 0.129,
        },
        Expectation {
            key: "high.env0",
            value: 0.445,
        },
        Expectation {
            key: "high.env1",
            value: 0.555,
        },
        Expectation {
            key: "high.env2",
            value: 0.655,
        },
        Expectation {
            key: "causal.env0",
            value: 0.194,
        },
        Expectation {
            key: "causal.env1",
            value: 0.271,
        },
        Expectation {
            key: "causal.env2",
            value: 0.438,
        },
        Expectation {
            key: "parental.env0",
            value: 0.563,
        },
        Expectation {
            key: "parental.env1",
            value: 0.730,
        },
        Expectation {
            key: "parental.env2",
            value: 0.807,
        },
        Expectation {
            key: "custom.env0",
            value: 0.557,
        },
        Expectation {
            key: "custom.env1",
            value: 0.730,
        },
        Expectation {
            key: "custom.env2",
            value: 0.806,
        },
    ];
    Ok(ScenarioBundle {
        base,
        high,
        abstraction,
        space: CandidateSpace::default(),
        assessments,
        expected,
    })
}

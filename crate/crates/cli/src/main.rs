use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causal_abstraction::assessment::DEFAULT_MAX_PAIRS;
use causal_abstraction::learner::DEFAULT_MAX_CANDIDATES;
use causal_abstraction::sampling::mean_std;
use causal_abstraction::{
    build_assessment_set, forward_sample, hybrid_sample, learn, overall_error,
    pullback_intervention_sample, validate_abstraction, validate_scm, Abstraction, AbstractionSpec,
    Aggregator, AssessmentKind, AssessmentSet, CandidateSpace, Counts, Error, Intervention,
    LearnConfig, LearnOutcome, MeasureKind, Pair, Scm, ScmSpec, Variable,
};
use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use serde::Deserialize;

#[derive(Parser)]
#[command(
    name = "abstraction",
    version,
    about = "Evaluate, learn and sample causal abstractions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check model and abstraction files; exit 1 if any is invalid.
    Validate(RunConfig),
    /// Per-pair and overall error of a fully specified abstraction.
    Evaluate(RunConfig),
    /// Search the candidate space for the error-minimizing abstraction.
    Learn(RunConfig),
    /// Empirical probabilities for a list of sampling queries.
    Sample(RunConfig),
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Base (low-level) model file.
    #[arg(long)]
    base: Option<PathBuf>,
    /// High-level model file (for `learn`, mechanisms in slots may be missing).
    #[arg(long)]
    high: Option<PathBuf>,
    /// Abstraction file.
    #[arg(long = "abs")]
    abstraction: Option<PathBuf>,
    #[arg(long, default_value = "ic")]
    measure: MeasureKind,
    #[arg(long, default_value = "causal")]
    assessment: AssessmentKind,
    /// Pairs file for `--assessment custom`: `[{"x": [...], "y": [...]}, ...]`.
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long, default_value = "sup")]
    agg: Aggregator,
    /// Samples per repetition.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_PAIRS)]
    max_pairs: u128,
    #[arg(long, default_value_t = DEFAULT_MAX_CANDIDATES)]
    max_candidates: u128,
    /// Candidate space file for `learn`.
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Where `learn` writes the best abstraction.
    #[arg(long)]
    best_out: Option<PathBuf>,
    /// Where `learn` writes the high-level model with the chosen mechanisms.
    #[arg(long)]
    best_high_out: Option<PathBuf>,
    /// Query file for `sample`.
    #[arg(long)]
    queries: Option<PathBuf>,
}

enum Failure {
    /// Inputs are readable but semantically wrong.
    Domain(String),
    /// Unreadable or unparsable input, or unwritable output.
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Json(_) | Error::Ingest { .. } => Failure::Io(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Outcome<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Failure::Domain(format!("--{flag} is required")))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Outcome<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_scm(path: &Path) -> Outcome<Scm> {
    Scm::from_spec(read_json(path)?)
        .map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Outcome<()> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn assessment_set(cfg: &RunConfig, high: &ScmSpec) -> Outcome<AssessmentSet> {
    let custom: Option<Vec<Pair>> = match (&cfg.pairs, cfg.assessment) {
        (Some(p), _) => Some(read_json(p)?),
        (None, AssessmentKind::Custom) => {
            return Err(Failure::Domain("--assessment custom needs --pairs".into()))
        }
        (None, _) => None,
    };
    Ok(build_assessment_set(
        cfg.assessment,
        &high.dag(),
        custom.as_deref(),
        cfg.max_pairs,
    )?)
}

fn validate(cfg: &RunConfig) -> Outcome<bool> {
    let mut report = String::new();
    let mut specs: BTreeMap<&str, ScmSpec> = BTreeMap::new();
    for (label, path) in [("base", &cfg.base), ("high", &cfg.high)] {
        let Some(path) = path else { continue };
        let spec: ScmSpec = read_json(path)?;
        for v in validate_scm(&spec) {
            writeln!(report, "{label}: {v}").unwrap();
        }
        specs.insert(label, spec);
    }
    if let Some(path) = &cfg.abstraction {
        let spec: AbstractionSpec = read_json(path)?;
        let (Some(base), Some(high)) = (specs.get("base"), specs.get("high")) else {
            return Err(Failure::Domain(
                "validating an abstraction needs --base and --high".into(),
            ));
        };
        for v in validate_abstraction(&spec, &base.variables, &high.variables) {
            writeln!(report, "abstraction: {v}").unwrap();
        }
    }
    if specs.is_empty() && cfg.abstraction.is_none() {
        return Err(Failure::Domain(
            "nothing to validate: pass --base, --high and/or --abs".into(),
        ));
    }
    emit(&cfg.out, &report)?;
    Ok(report.is_empty())
}

fn join(set: &[String]) -> String {
    set.join(";")
}

fn evaluate(cfg: &RunConfig) -> Outcome<()> {
    let base = load_scm(required(&cfg.base, "base")?)?;
    let high = load_scm(required(&cfg.high, "high")?)?;
    let spec: AbstractionSpec = read_json(required(&cfg.abstraction, "abs")?)?;
    let abs = Abstraction::between(&spec, &base, &high)?;
    if let Some(g) = abs.groups().iter().find(|g| g.alpha.is_none()) {
        return Err(Error::MissingAlpha(g.high.clone()).into());
    }
    let set = assessment_set(cfg, &high.to_spec())?;
    let report = overall_error(cfg.measure, &base, &high, &abs, &set, cfg.agg)?;
    let mut csv = String::from("measure,x_set,y_set,error,overall\n");
    for (pair, err) in &report.pairs {
        writeln!(
            csv,
            "{},{},{},{err:.6},",
            cfg.measure,
            join(&pair.x),
            join(&pair.y)
        )
        .unwrap();
    }
    writeln!(csv, "overall,,,,{}", report.overall).unwrap();
    emit(&cfg.out, &csv)
}

/// Row holding the 1 of each column, e.g. `1001`.
fn assignment_word(alpha: &Array2<f64>) -> String {
    alpha
        .columns()
        .into_iter()
        .map(|c| {
            c.iter()
                .position(|&x| x == 1.0)
                .map_or('?', |r| char::from_digit(r as u32, 36).unwrap_or('?'))
        })
        .collect()
}

fn learn_cmd(cfg: &RunConfig) -> Outcome<()> {
    let base = load_scm(required(&cfg.base, "base")?)?;
    let template: ScmSpec = read_json(required(&cfg.high, "high")?)?;
    let spec: AbstractionSpec = read_json(required(&cfg.abstraction, "abs")?)?;
    let partial = Abstraction::new(&spec, base.variables(), &template.variables)?;
    let space = match &cfg.candidates {
        Some(p) => read_json::<CandidateSpace>(p)?,
        None => CandidateSpace::default(),
    };
    let set = assessment_set(cfg, &template)?;
    let config = LearnConfig {
        kind: cfg.measure,
        aggregator: cfg.agg,
        max_candidates: cfg.max_candidates,
    };
    let mut csv = String::from("rank,index,error,mechanisms,alphas\n");
    let result = match learn(&base, &template, &partial, &set, &space, &config)? {
        LearnOutcome::NotOrderPreserving => {
            csv.push_str("1,,inf,,\n");
            return emit(&cfg.out, &csv);
        }
        LearnOutcome::Learned(r) => r,
    };
    for (rank, c) in result.ranking.iter().enumerate() {
        let mechs: Vec<String> = space
            .mechanisms
            .iter()
            .zip(&c.mechanisms)
            .map(|(s, i)| format!("{}={i}", s.variable))
            .collect();
        let alphas: Vec<String> = partial
            .groups()
            .iter()
            .zip(&c.alphas)
            .enumerate()
            .map(|(g, (group, &i))| {
                format!(
                    "{}={}",
                    group.high,
                    assignment_word(&result.alpha_candidates[g][i])
                )
            })
            .collect();
        writeln!(
            csv,
            "{},{},{:.6},{},{}",
            rank + 1,
            c.index,
            c.error,
            mechs.join(";"),
            alphas.join(";")
        )
        .unwrap();
    }
    if let Some(p) = &cfg.best_out {
        write_file(p, &(result.abstraction.to_spec().to_json() + "\n"))?;
    }
    if let Some(p) = &cfg.best_high_out {
        write_file(p, &(result.high.to_spec().to_json() + "\n"))?;
    }
    emit(&cfg.out, &csv)
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum QueryKind {
    /// Base model under a base intervention.
    Base,
    /// High-level model under a high-level intervention.
    High,
    /// Base model under a high-level intervention pulled back uniformly.
    Pullback,
    /// Base model with the preimage of `replaced` produced by the high-level model.
    Hybrid,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Event {
    Variable { variable: String, value: String },
    Abstracted { abstracted: String, value: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Query {
    name: String,
    kind: QueryKind,
    #[serde(default)]
    intervention: BTreeMap<String, String>,
    event: Event,
    #[serde(default)]
    replaced: Vec<String>,
    #[serde(default)]
    drivers: Vec<String>,
}

fn outcome_position(
    vars: &[Variable],
    name: &str,
    label: &str,
) -> causal_abstraction::Result<usize> {
    let v = vars
        .iter()
        .find(|v| v.name == name)
        .ok_or_else(|| Error::UnknownVariable(name.into()))?;
    v.outcomes
        .iter()
        .position(|o| o == label)
        .ok_or_else(|| Error::UnknownOutcome {
            variable: name.into(),
            outcome: label.into(),
        })
}

fn event_probability(
    counts: &Counts,
    model: &Scm,
    abs: &Abstraction,
    event: &Event,
) -> causal_abstraction::Result<f64> {
    match event {
        Event::Variable { variable, value } => {
            let i = outcome_position(model.variables(), variable, value)?;
            Ok(counts.distribution(variable)?[i])
        }
        Event::Abstracted { abstracted, value } => {
            let i = outcome_position(abs.high_variables(), abstracted, value)?;
            Ok(counts.abstracted_distribution(abs, abstracted)?[i])
        }
    }
}

fn run_query(
    q: &Query,
    base: &Scm,
    high: &Scm,
    abs: &Abstraction,
    n: usize,
    seed: u64,
) -> causal_abstraction::Result<f64> {
    let (counts, model) = match q.kind {
        QueryKind::Base => (
            forward_sample(
                base,
                &Intervention::from_labels(base, &q.intervention)?,
                n,
                seed,
            )?,
            base,
        ),
        QueryKind::High => (
            forward_sample(
                high,
                &Intervention::from_labels(high, &q.intervention)?,
                n,
                seed,
            )?,
            high,
        ),
        QueryKind::Pullback => {
            let iv = Intervention::from_labels(high, &q.intervention)?;
            (pullback_intervention_sample(base, abs, &iv, n, seed)?, base)
        }
        QueryKind::Hybrid => {
            let iv = Intervention::from_labels(base, &q.intervention)?;
            (
                hybrid_sample(base, high, abs, &q.replaced, &q.drivers, &iv, n, seed)?,
                base,
            )
        }
    };
    event_probability(&counts, model, abs, &q.event)
}

fn sample(cfg: &RunConfig) -> Outcome<()> {
    let base = load_scm(required(&cfg.base, "base")?)?;
    let high = load_scm(required(&cfg.high, "high")?)?;
    let spec: AbstractionSpec = read_json(required(&cfg.abstraction, "abs")?)?;
    let abs = Abstraction::between(&spec, &base, &high)?;
    let queries: Vec<Query> = read_json(required(&cfg.queries, "queries")?)?;
    if cfg.n == 0 || cfg.reps == 0 {
        return Err(Failure::Domain("--n and --reps must be positive".into()));
    }
    let mut csv = String::from("query,mean,std,error\n");
    for q in &queries {
        let values: causal_abstraction::Result<Vec<f64>> = (0..cfg.reps as u64)
            .map(|r| run_query(q, &base, &high, &abs, cfg.n, cfg.seed.wrapping_add(r)))
            .collect();
        match values {
            Ok(v) => {
                let (mean, std) = mean_std(&v);
                writeln!(csv, "{},{mean:.6},{std:.6},", q.name).unwrap();
            }
            Err(e) => {
                writeln!(csv, "{},,,\"{}\"", q.name, e.to_string().replace('"', "'")).unwrap()
            }
        }
    }
    emit(&cfg.out, &csv)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(cfg) => validate(cfg).map(|ok| if ok { 0 } else { 1 }),
        Command::Evaluate(cfg) => evaluate(cfg).map(|_| 0),
        Command::Learn(cfg) => learn_cmd(cfg).map(|_| 0),
        Command::Sample(cfg) => sample(cfg).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

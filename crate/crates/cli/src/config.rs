//! Resolves command-line arguments into a serializable run configuration.

use std::path::PathBuf;

use qentropy::entropies::EXAMPLE_PHI;
use qentropy::tolerances::Q_GRID;
use qentropy::{
    EntropyFunctional, Form, FunctionalKind, FunctionalSpec, PhiSpec, ProbVec, ProductSystem,
    Refinement, Thresholds,
};
use serde::{Deserialize, Serialize};

use crate::args::{Command, Expect, IdentityArg, OutFormat};

/// Failure modes mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<qentropy::Error> for CliError {
    fn from(e: qentropy::Error) -> Self {
        match e {
            qentropy::Error::LimitConditionFailed { .. } | qentropy::Error::NonFiniteValue(_) => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Everything a run depends on, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub kinds: Vec<FunctionalKind>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub q: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub phi: PhiSpec,
    pub form: Option<Form>,
    pub identity: IdentityArg,
    pub samples: usize,
    pub seed: u64,
    pub budget: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expect>,
    pub out: OutFormat,
    pub thresholds: Thresholds,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub p: Vec<ProbVec>,
    pub strict: bool,
}

impl RunConfig {
    pub fn from_command(cmd: &Command) -> CliResult<Self> {
        let a = cmd.args();
        let kinds = a
            .kind
            .iter()
            .map(|k| k.trim().parse::<FunctionalKind>())
            .collect::<Result<Vec<_>, _>>()?;
        if kinds.is_empty() {
            return Err(CliError::Usage("no --kind given".into()));
        }
        let default_samples = match cmd {
            Command::Classify(_) => 1000,
            _ => 100,
        };
        let default_out = match cmd {
            Command::Eval(_) => OutFormat::Table,
            _ => OutFormat::Json,
        };
        let mut thresholds = Thresholds::default();
        if let Some(t) = a.pass_tol {
            thresholds.pass = t;
        }
        if let Some(t) = a.fail_tol {
            thresholds.fail = t;
        }
        if !(thresholds.pass >= 0.0 && thresholds.pass <= thresholds.fail) {
            return Err(CliError::Usage("need 0 <= --pass-tol <= --fail-tol".into()));
        }
        let p = a.p.iter().map(|s| parse_probvec(s)).collect::<CliResult<Vec<_>>>()?;
        let samples = a.samples.unwrap_or(default_samples);
        if samples == 0 || a.budget == 0 {
            return Err(CliError::Usage("--samples and --budget must be positive".into()));
        }
        Ok(RunConfig {
            subcommand: cmd.name().into(),
            kinds,
            q: a.q.clone(),
            q_grid: if a.q_grid.is_empty() { Q_GRID.to_vec() } else { a.q_grid.clone() },
            phi: parse_phi(&a.phi)?,
            form: a.form.map(|f| match f {
                crate::args::FormArg::Original => Form::Original,
                crate::args::FormArg::Normalized => Form::Normalized,
            }),
            identity: a.identity,
            samples,
            seed: a.seed,
            budget: a.budget,
            expect: a.expect,
            out: a.out.unwrap_or(default_out),
            thresholds,
            input: a.input.clone(),
            p,
            strict: a.strict,
        })
    }

    /// Explicit `--q` values, else the grid.
    pub fn q_values(&self) -> &[f64] {
        if self.q.is_empty() {
            &self.q_grid
        } else {
            &self.q
        }
    }

    pub fn form_for(&self, kind: FunctionalKind) -> Form {
        self.form.unwrap_or(match kind {
            FunctionalKind::NormalizedTsallis | FunctionalKind::NClass2 | FunctionalKind::NClass3 => {
                Form::Normalized
            }
            _ => Form::Original,
        })
    }

    pub fn functional(&self, kind: FunctionalKind, q: f64) -> CliResult<EntropyFunctional> {
        let spec = FunctionalSpec {
            kind,
            q: (kind != FunctionalKind::Shannon).then_some(q),
            phi: kind.needs_phi().then(|| self.phi.clone()),
            name: None,
        };
        Ok(spec.build()?)
    }

    pub fn inputs(&self) -> CliResult<Vec<InputRecord>> {
        let mut out: Vec<InputRecord> = self.p.iter().cloned().map(InputRecord::Dist).collect();
        if let Some(path) = &self.input {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let parsed: InputFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            match parsed {
                InputFile::One(r) => out.push(r),
                InputFile::Many(rs) => out.extend(rs),
            }
        }
        Ok(out)
    }
}

/// One record of an input file; the variant is recognized by its keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputRecord {
    Refinement(Refinement),
    Product(ProductSystem),
    Dist(ProbVec),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InputFile {
    One(InputRecord),
    Many(Vec<InputRecord>),
}

fn parse_floats(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("not a number: `{x}`")))
        })
        .collect()
}

pub fn parse_probvec(s: &str) -> CliResult<ProbVec> {
    Ok(ProbVec::new(parse_floats(s)?)?)
}

pub fn parse_phi(s: &str) -> CliResult<PhiSpec> {
    let spec = if s == EXAMPLE_PHI {
        PhiSpec::Named(s.into())
    } else {
        PhiSpec::Poly(parse_floats(s)?)
    };
    qentropy::PhiFunction::from_spec(&spec)?;
    Ok(spec)
}

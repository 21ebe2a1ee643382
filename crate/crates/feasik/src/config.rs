//! The JSON problem/run document: a serde mirror of the core types, with
//! field-path diagnostics on both parse and validation errors.

use std::path::Path;

use feasik_core::controls::RepetitiveRule;
use feasik_core::{
    Body, Constraint, ControlSpec, ConvexFunction, CounterMode, CutterKind, OuterSet,
    OverrelaxationSchedule, PhiFunctional, Problem, RelaxationSchedule, RunConfig, UpdateForm,
    Vector, WeightRule,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {field}: {message}")]
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {error}")]
    Invalid {
        field: String,
        error: feasik_core::Error,
    },
    #[error("config has no `run` section")]
    MissingRun,
}

fn invalid(field: impl Into<String>) -> impl FnOnce(feasik_core::Error) -> ConfigError {
    let field = field.into();
    move |error| ConfigError::Invalid { field, error }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub dim: usize,
    #[serde(default)]
    pub outer: OuterDoc,
    pub constraints: Vec<ConstraintDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior: Option<InteriorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunDoc>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OuterDoc {
    #[default]
    WholeSpace,
    Halfspace { a: Vec<f64>, b: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    #[serde(flatten)]
    pub body: BodyDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutter: Option<CutterDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodyDoc {
    Halfspace { a: Vec<f64>, b: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Sublevel { function: FunctionDoc },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutterDoc {
    Metric,
    Subgradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionDoc {
    Affine { a: Vec<f64>, b: f64 },
    AbsCoordMinusC { axis: usize, c: f64 },
    QuadCoordMinusC { axis: usize, c: f64 },
    MaxAffine { pieces: Vec<PieceDoc> },
    SquaredDistToBall { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDoc {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteriorDoc {
    pub z: Vec<f64>,
    #[serde(rename = "R")]
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDoc {
    pub x0: Vec<f64>,
    pub control: ControlDoc,
    #[serde(default)]
    pub relaxation: RelaxationDoc,
    #[serde(default)]
    pub overrelaxation: OverrelaxationDoc,
    #[serde(default)]
    pub phi: PhiDoc,
    #[serde(default)]
    pub weights: WeightsDoc,
    #[serde(default)]
    pub counter_mode: CounterModeDoc,
    #[serde(default = "default_max_iter")]
    pub max_iter: u64,
    #[serde(default)]
    pub feas_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feas_window: Option<Vec<usize>>,
    #[serde(default)]
    pub update: UpdateDoc,
    /// Seed of the random and shuffled controls.
    #[serde(default)]
    pub seed: u64,
}

fn default_max_iter() -> u64 {
    feasik_core::engine::DEFAULT_MAX_ITER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlDoc {
    /// `order` defaults to `0, 1, …, m−1`.
    Cyclic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<Vec<usize>>,
    },
    Intermittent { blocks: Vec<Vec<usize>>, span: usize },
    Repetitive { rule: RepetitiveDoc },
    RemotestSet,
    MaxDisplacement,
    MaxViolation,
    RandomSets { atoms: Vec<AtomDoc> },
    /// Singletons `{0}, …, {m−1}` with probability `1/m` each.
    RandomUniform,
    Explicit { sets: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepetitiveDoc {
    Expanding,
    ShuffledSweeps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub set: Vec<usize>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RelaxationDoc {
    Constant { value: f64 },
    List { values: Vec<f64> },
}

impl Default for RelaxationDoc {
    fn default() -> Self {
        Self::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OverrelaxationDoc {
    Constant { value: f64 },
    #[default]
    Harmonic,
    Geometric { ratio: f64 },
    ExplicitList { values: Vec<f64> },
    MergedDecreasing { a: Box<OverrelaxationDoc>, b: Box<OverrelaxationDoc> },
    Interleaved { even: Box<OverrelaxationDoc>, odd: Box<OverrelaxationDoc> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiDoc {
    #[default]
    One,
    SubgradNorm,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightsDoc {
    #[default]
    UniformOverActive,
    UniformOverViolated,
    ExplicitTable { weights: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterModeDoc {
    #[default]
    Bracketed,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateDoc {
    #[default]
    Cutter,
    SubgradientClosedForm,
}

fn vector(coords: &[f64], field: &str) -> Result<Vector, ConfigError> {
    Vector::from_slice(coords).map_err(invalid(field))
}

impl FunctionDoc {
    fn build(&self, field: &str) -> Result<ConvexFunction, ConfigError> {
        Ok(match self {
            Self::Affine { a, b } => ConvexFunction::Affine { a: vector(a, field)?, b: *b },
            Self::AbsCoordMinusC { axis, c } => ConvexFunction::AbsCoordMinusC { axis: *axis, c: *c },
            Self::QuadCoordMinusC { axis, c } => ConvexFunction::QuadCoordMinusC { axis: *axis, c: *c },
            Self::MaxAffine { pieces } => ConvexFunction::MaxAffine {
                pieces: pieces
                    .iter()
                    .map(|p| Ok((vector(&p.a, field)?, p.b)))
                    .collect::<Result<_, ConfigError>>()?,
            },
            Self::SquaredDistToBall { center, radius } => ConvexFunction::SquaredDistToBall {
                center: vector(center, field)?,
                radius: *radius,
            },
        })
    }
}

impl BodyDoc {
    fn build(&self, field: &str) -> Result<Body, ConfigError> {
        Ok(match self {
            Self::Halfspace { a, b } => Body::Halfspace { a: vector(a, field)?, b: *b },
            Self::Ball { center, radius } => Body::Ball { center: vector(center, field)?, radius: *radius },
            Self::Box { lo, hi } => Body::Box { lo: vector(lo, field)?, hi: vector(hi, field)? },
            Self::Sublevel { function } => Body::Sublevel(function.build(field)?),
        })
    }
}

impl OuterDoc {
    fn build(&self) -> Result<OuterSet, ConfigError> {
        let f = "outer";
        Ok(match self {
            Self::WholeSpace => OuterSet::WholeSpace,
            Self::Halfspace { a, b } => OuterSet::Halfspace { a: vector(a, f)?, b: *b },
            Self::Box { lo, hi } => OuterSet::Box { lo: vector(lo, f)?, hi: vector(hi, f)? },
            Self::Ball { center, radius } => OuterSet::Ball { center: vector(center, f)?, radius: *radius },
        })
    }
}

impl ControlDoc {
    pub fn build(&self, cardinality: Option<usize>, seed: u64) -> Result<ControlSpec, ConfigError> {
        Ok(match self {
            Self::Cyclic { order: Some(order) } => ControlSpec::Cyclic(order.clone()),
            Self::Cyclic { order: None } => {
                let m = cardinality.ok_or(ConfigError::Invalid {
                    field: "run.control.order".into(),
                    error: feasik_core::Error::WindowRequired,
                })?;
                ControlSpec::Cyclic((0..m).collect())
            }
            Self::Intermittent { blocks, span } => ControlSpec::Intermittent { blocks: blocks.clone(), span: *span },
            Self::Repetitive { rule: RepetitiveDoc::Expanding } => ControlSpec::Repetitive(RepetitiveRule::Expanding),
            Self::Repetitive { rule: RepetitiveDoc::ShuffledSweeps } => {
                ControlSpec::Repetitive(RepetitiveRule::ShuffledSweeps { seed })
            }
            Self::RemotestSet => ControlSpec::RemotestSet,
            Self::MaxDisplacement => ControlSpec::MaxDisplacement,
            Self::MaxViolation => ControlSpec::MaxViolation,
            Self::RandomSets { atoms } => ControlSpec::RandomSets {
                atoms: atoms.iter().map(|a| (a.set.clone(), a.p)).collect(),
                seed,
            },
            Self::RandomUniform => {
                let m = cardinality.ok_or(ConfigError::Invalid {
                    field: "run.control".into(),
                    error: feasik_core::Error::MaximalControlInfinitePool,
                })?;
                ControlSpec::RandomSets {
                    atoms: (0..m).map(|i| (vec![i], 1.0 / m as f64)).collect(),
                    seed,
                }
            }
            Self::Explicit { sets } => ControlSpec::Explicit(sets.clone()),
        })
    }

    /// Short name used in sweep tables.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Cyclic { .. } => "cyclic",
            Self::Intermittent { .. } => "intermittent",
            Self::Repetitive { .. } => "repetitive",
            Self::RemotestSet => "remotest",
            Self::MaxDisplacement => "max_displacement",
            Self::MaxViolation => "max_violation",
            Self::RandomSets { .. } => "random_sets",
            Self::RandomUniform => "random_uniform",
            Self::Explicit { .. } => "explicit",
        }
    }
}

impl RelaxationDoc {
    pub fn build(&self) -> RelaxationSchedule {
        match self {
            Self::Constant { value } => RelaxationSchedule::Constant(*value),
            Self::List { values } => RelaxationSchedule::List(values.clone()),
        }
    }
}

impl OverrelaxationDoc {
    pub fn build(&self) -> OverrelaxationSchedule {
        match self {
            Self::Constant { value } => OverrelaxationSchedule::Constant(*value),
            Self::Harmonic => OverrelaxationSchedule::Harmonic,
            Self::Geometric { ratio } => OverrelaxationSchedule::Geometric { ratio: *ratio },
            Self::ExplicitList { values } => OverrelaxationSchedule::ExplicitList(values.clone()),
            Self::MergedDecreasing { a, b } => OverrelaxationSchedule::MergedDecreasing {
                a: Box::new(a.build()),
                b: Box::new(b.build()),
            },
            Self::Interleaved { even, odd } => OverrelaxationSchedule::Interleaved {
                even: Box::new(even.build()),
                odd: Box::new(odd.build()),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Constant { value } => format!("constant({value:?})"),
            Self::Harmonic => "harmonic".into(),
            Self::Geometric { ratio } => format!("geometric({ratio:?})"),
            Self::ExplicitList { values } => format!("list({})", values.len()),
            Self::MergedDecreasing { a, b } => format!("merged({},{})", a.label(), b.label()),
            Self::Interleaved { even, odd } => format!("interleaved({},{})", even.label(), odd.label()),
        }
    }
}

impl PhiDoc {
    pub fn build(self) -> PhiFunctional {
        match self {
            Self::One => PhiFunctional::One,
            Self::SubgradNorm => PhiFunctional::SubgradNorm,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::One => "one",
            Self::SubgradNorm => "subgrad_norm",
        }
    }
}

impl WeightsDoc {
    pub fn build(&self) -> WeightRule {
        match self {
            Self::UniformOverActive => WeightRule::UniformOverActive,
            Self::UniformOverViolated => WeightRule::UniformOverViolated,
            Self::ExplicitTable { weights } => WeightRule::ExplicitTable(weights.clone()),
        }
    }
}

impl Document {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ConfigError::Parse {
                field,
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn problem(&self) -> Result<Problem, ConfigError> {
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for (i, c) in self.constraints.iter().enumerate() {
            let field = format!("constraints[{i}]");
            let body = c.body.build(&field)?;
            body.validate(self.dim).map_err(invalid(field.clone()))?;
            let mut constraint = Constraint::new(body);
            if let Some(cutter) = c.cutter {
                let kind = match cutter {
                    CutterDoc::Metric => CutterKind::Metric,
                    CutterDoc::Subgradient => CutterKind::Subgradient,
                };
                constraint = constraint.with_cutter(kind).map_err(invalid(format!("{field}.cutter")))?;
            }
            constraints.push(constraint);
        }
        let outer = self.outer.build()?;
        outer.validate(self.dim).map_err(invalid("outer"))?;
        let mut problem = Problem::new(self.dim, constraints, outer).map_err(invalid("constraints"))?;
        if let Some(int) = &self.interior {
            problem = problem
                .with_interior(vector(&int.z, "interior.z")?, int.radius)
                .map_err(invalid("interior"))?;
        }
        Ok(problem)
    }

    /// The run described by the document; `seed` replaces `run.seed`.
    pub fn run_config(&self, seed: Option<u64>) -> Result<RunConfig, ConfigError> {
        let run = self.run.as_ref().ok_or(ConfigError::MissingRun)?;
        let problem = self.problem()?;
        let seed = seed.unwrap_or(run.seed);
        let control = run.control.build(problem.cardinality(), seed)?;
        control
            .validate(problem.cardinality())
            .map_err(invalid("run.control"))?;
        let x0 = vector(&run.x0, "run.x0")?;
        let mut cfg = RunConfig::new(problem, control, x0).map_err(invalid("run.x0"))?;
        cfg.relaxation = run.relaxation.build();
        cfg.relaxation.validate().map_err(invalid("run.relaxation"))?;
        cfg.overrelaxation = run.overrelaxation.build();
        cfg.overrelaxation.validate().map_err(invalid("run.overrelaxation"))?;
        cfg.phi = run.phi.build();
        cfg.weights = run.weights.build();
        cfg.weights.validate().map_err(invalid("run.weights"))?;
        cfg.counter_mode = match run.counter_mode {
            CounterModeDoc::Bracketed => CounterMode::Bracketed,
            CounterModeDoc::Raw => CounterMode::Raw,
        };
        cfg.max_iter = run.max_iter;
        cfg.feas_tol = run.feas_tol;
        if let Some(w) = &run.feas_window {
            cfg.feas_window = w.clone();
        }
        cfg.update = match run.update {
            UpdateDoc::Cutter => UpdateForm::Cutter,
            UpdateDoc::SubgradientClosedForm => UpdateForm::SubgradientClosedForm,
        };
        cfg.validate().map_err(invalid("run"))?;
        Ok(cfg)
    }
}

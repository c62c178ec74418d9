//! Input documents for the batch commands.

use serde::Deserialize;

use crate::algebra::WeightSequence;
use crate::error::{Error, Result};
use crate::expr::VectorField;
use crate::geometry::CompactBox;
use crate::timevarying::{StepField, TimeInterval};

/// Either a list of components (one field on the whole interval) or a full
/// step field.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Components(Vec<String>),
    Step(StepField),
}

impl FieldSpec {
    pub fn vector_field(&self) -> Result<VectorField> {
        match self {
            FieldSpec::Components(c) => {
                let texts: Vec<&str> = c.iter().map(String::as_str).collect();
                VectorField::parse(&texts)
            }
            FieldSpec::Step(s) if s.pieces().len() == 1 => Ok(s.pieces()[0].clone()),
            FieldSpec::Step(_) => Err(Error::invalid("expected a single field, got a step field")),
        }
    }

    pub fn step_field(&self, t: TimeInterval) -> Result<StepField> {
        match self {
            FieldSpec::Components(_) => StepField::constant(self.vector_field()?, t),
            FieldSpec::Step(s) => Ok(s.clone()),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Geometric { d: f64, ratio: f64 },
    Harmonic { d: f64 },
    Explicit { values: Vec<f64> },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Geometric { d: 1.0, ratio: 0.5 }
    }
}

impl WeightSpec {
    pub fn build(&self, max_order: usize) -> Result<WeightSequence> {
        match self {
            WeightSpec::Geometric { d, ratio } => WeightSequence::geometric(*d, *ratio, max_order),
            WeightSpec::Harmonic { d } => WeightSequence::harmonic(*d, max_order),
            WeightSpec::Explicit { values } => WeightSequence::explicit(values.clone(), max_order),
        }
    }
}

fn check_schema(schema: Option<u32>) -> Result<()> {
    match schema {
        None | Some(1) => Ok(()),
        Some(v) => Err(Error::invalid(format!("unsupported schema version {v}"))),
    }
}

pub fn interval(t: [f64; 2]) -> Result<TimeInterval> {
    TimeInterval::new(t[0], t[1])
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowRequest {
    pub schema: Option<u32>,
    pub field: FieldSpec,
    pub interval: [f64; 2],
    #[serde(rename = "box")]
    pub domain: CompactBox,
    pub polydisc_radius: Option<f64>,
    pub observable: Option<String>,
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub target_tail: Option<f64>,
    pub safety: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeminormRequest {
    pub schema: Option<u32>,
    /// A scalar function; exactly one of `function` and `field`.
    pub function: Option<String>,
    pub field: Option<Vec<String>>,
    /// When present with `function`, the seminorm of `X̂f` is computed.
    pub apply_field: Option<Vec<String>>,
    #[serde(rename = "box")]
    pub domain: CompactBox,
    #[serde(default)]
    pub weights: WeightSpec,
    #[serde(default)]
    pub t: f64,
    pub polydisc_radius: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendRequest {
    pub schema: Option<u32>,
    pub field: Vec<String>,
    #[serde(rename = "box")]
    pub domain: CompactBox,
    pub times: Option<Vec<f64>>,
    pub radius_order: Option<usize>,
    /// Time interval for the integrability report.
    pub interval: Option<[f64; 2]>,
    pub polydisc_radius: Option<f64>,
    #[serde(default)]
    pub weights: WeightSpec,
    pub time_points: Option<usize>,
    /// Fields (each a component list) sharing `interval` for the common
    /// majorant search.
    pub family: Option<Vec<Vec<String>>>,
    pub d_grid: Option<Vec<f64>>,
    pub safety: Option<f64>,
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let v: T = serde_json::from_str(text).map_err(|e| Error::invalid(format!("request does not match schema: {e}")))?;
    Ok(v)
}

pub trait Versioned {
    fn schema(&self) -> Option<u32>;
    fn validate(&self) -> Result<()> {
        check_schema(self.schema())
    }
}

impl Versioned for FlowRequest {
    fn schema(&self) -> Option<u32> {
        self.schema
    }
}

impl Versioned for SeminormRequest {
    fn schema(&self) -> Option<u32> {
        self.schema
    }
}

impl Versioned for ExtendRequest {
    fn schema(&self) -> Option<u32> {
        self.schema
    }
}

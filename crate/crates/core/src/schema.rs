//! JSON file formats: the versioned arrangement file and the metadata
//! header carried by every report.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::connectivity::{Arrangement, EngineConfig};
use crate::error::{Error, Result};
use crate::geometry::ProjectiveLine;
use crate::monodromy::WeightedBranchDivisor;
use crate::polynomials::TrivariateForm;

pub const SCHEMA_VERSION: u32 = 1;

/// `[[a, b, c], re, im]` for the monomial `x^a y^b z^c`.
pub type Term = ([u32; 3], f64, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartSpec {
    pub degree: u32,
    pub coefficients: Vec<Term>,
    pub weight: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverSpec {
    pub m: u32,
    pub parts: Vec<PartSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    /// Line coefficients as `[re, im]` pairs.
    pub coeffs: [Complex64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrangementFile {
    pub schema: u32,
    pub cover: CoverSpec,
    pub components: Vec<ComponentSpec>,
    #[serde(default)]
    pub metadata: serde_json::Value,
}

impl ArrangementFile {
    pub fn from_arrangement(arr: &Arrangement, metadata: serde_json::Value) -> Self {
        let parts = arr
            .cover
            .parts()
            .iter()
            .map(|(form, weight)| PartSpec {
                degree: form.degree(),
                coefficients: form
                    .terms()
                    .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
                    .map(|(e, c)| (e, c.re, c.im))
                    .collect(),
                weight: *weight,
            })
            .collect();
        let components = arr
            .components
            .iter()
            .zip(&arr.labels)
            .map(|(line, label)| ComponentSpec {
                coeffs: *line.coeffs(),
                label: label.clone(),
            })
            .collect();
        Self {
            schema: SCHEMA_VERSION,
            cover: CoverSpec { m: arr.m(), parts },
            components,
            metadata,
        }
    }

    pub fn to_arrangement(&self) -> Result<Arrangement> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        let parts = self
            .cover
            .parts
            .iter()
            .map(|p| {
                let terms: Vec<([u32; 3], Complex64)> = p
                    .coefficients
                    .iter()
                    .map(|&(e, re, im)| (e, Complex64::new(re, im)))
                    .collect();
                Ok((TrivariateForm::from_terms(p.degree, &terms)?, p.weight))
            })
            .collect::<Result<Vec<_>>>()?;
        let cover = WeightedBranchDivisor::new(self.cover.m, parts)?;
        let components = self
            .components
            .iter()
            .map(|c| ProjectiveLine::new(c.coeffs))
            .collect::<Result<Vec<_>>>()?;
        let labels = self.components.iter().map(|c| c.label.clone()).collect();
        Arrangement::with_labels(cover, components, labels)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("arrangement files always serialize")
    }
}

/// Reproducibility header of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<EngineConfig>,
    #[serde(default)]
    pub inputs: serde_json::Value,
}

impl Metadata {
    pub fn new(command: &str, inputs: serde_json::Value) -> Self {
        Self {
            version: crate::VERSION.to_string(),
            command: command.to_string(),
            seed: None,
            engine: None,
            inputs,
        }
    }

    pub fn with_engine(mut self, cfg: &EngineConfig) -> Self {
        self.seed = Some(cfg.seed);
        self.engine = Some(*cfg);
        self
    }
}

/// A result with its metadata; the result's fields sit at the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    #[serde(flatten)]
    pub result: T,
    pub metadata: Metadata,
}

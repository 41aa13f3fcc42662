// SPDX-License-Identifier: Apache-2.0

//! JSON instance and result files.
//!
//! Parse failures carry the JSON path of the offending field plus its line
//! and column, e.g. `relaxable[2].discomfort (line 14, column 25)`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::guarantee::GuaranteeReport;
use crate::model::{Aggregation, Bound, EdgeLabel, Guarantee, Instance, RawInstance, ValidationError};
use crate::oracle::OracleVerdict;
use crate::rational::{self, Rational};
use crate::solver::{SearchMode, SolveResult, SolverConfig};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path} (line {line}, column {column}): {message}")]
pub struct ParseError {
    /// Dotted JSON path of the failing field, `.` for the document root.
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("invalid instance: {0}")]
    Validation(#[from] ValidationError),
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Deserializes `text`, reporting the path of the first failing field.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, ParseError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ParseError {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| ParseError {
        path: ".".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(value)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("file types serialize infallibly");
    text.push('\n');
    text
}

pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let raw: RawInstance = parse_json(text)?;
    Ok(Instance::validate(raw)?)
}

pub fn instance_to_json(inst: &Instance) -> String {
    to_json(&inst.to_raw())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, IoError> {
    parse_instance(&read(path.as_ref())?)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), IoError> {
    write(path.as_ref(), &instance_to_json(inst))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxedPair {
    pub agent: String,
    pub resource: String,
    #[serde(with = "rational::text")]
    pub discomfort: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    pub best_mu: usize,
    #[serde(with = "rational::text")]
    pub best_cost: Rational,
    pub best_relaxations: Vec<Vec<EdgeLabel>>,
    pub checked_count: usize,
}

impl OracleBlock {
    pub fn from_verdict(inst: &Instance, v: &OracleVerdict) -> Self {
        OracleBlock {
            best_mu: v.best_mu,
            best_cost: v.best_cost.clone(),
            best_relaxations: v.best_relaxations.iter().map(|r| r.labels(inst)).collect(),
            checked_count: v.checked_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub relaxation: Vec<RelaxedPair>,
    pub allocation_size: usize,
    #[serde(with = "rational::text")]
    pub aggregate_cost: Rational,
    pub k_min: usize,
    pub guarantee: Guarantee,
    pub aggregation: Aggregation,
    pub bound: Bound,
    #[serde(default)]
    pub search: SearchMode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guarantee_report: Option<GuaranteeReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleBlock>,
}

impl ResultFile {
    pub fn from_solve(inst: &Instance, cfg: &SolverConfig, res: &SolveResult) -> Self {
        ResultFile {
            relaxation: res
                .relaxation
                .edges(inst)
                .map(|r| RelaxedPair {
                    agent: inst.agent_id(r.edge.agent).0.clone(),
                    resource: inst.resource_id(r.edge.resource).0.clone(),
                    discomfort: r.discomfort.value().clone(),
                })
                .collect(),
            allocation_size: res.allocation_size,
            aggregate_cost: res.aggregate_cost.clone(),
            k_min: res.k_min,
            guarantee: cfg.guarantee,
            aggregation: cfg.aggregation,
            bound: cfg.bound.clone(),
            search: cfg.search,
            warnings: res.warnings.iter().map(ToString::to_string).collect(),
            guarantee_report: res.guarantee_report.clone(),
            oracle: None,
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

pub fn parse_result(text: &str) -> Result<ResultFile, ParseError> {
    parse_json(text)
}

pub fn load_result(path: impl AsRef<Path>) -> Result<ResultFile, IoError> {
    Ok(parse_result(&read(path.as_ref())?)?)
}

pub fn save_result(result: &ResultFile, path: impl AsRef<Path>) -> Result<(), IoError> {
    write(path.as_ref(), &result.to_json())
}

//! TOML job files. A job is translated into the equivalent command line and
//! parsed by the same argument parser, so flags and jobs share one set of
//! validation rules.
//!
//! ```toml
//! command = "split"
//! lambda = 15.0
//! dx_list = [5e-4, 1e-3, 2e-3, 4e-3]
//! fit = true
//! format = "json"
//! out = "lambda15.json"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum RangeSpec {
    Keyword(String),
    Range([f64; 2]),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum StepSpec {
    Keyword(String),
    Value(f64),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobFile {
    pub command: String,
    pub potential: Option<String>,
    pub lambda: Option<f64>,
    #[serde(rename = "E")]
    pub energy: Option<f64>,
    #[serde(rename = "E_range")]
    pub e_range: Option<[f64; 2]>,
    pub points: Option<usize>,
    pub dx: Option<f64>,
    pub dx_list: Option<Vec<f64>>,
    pub domain: Option<RangeSpec>,
    pub parity: Option<String>,
    pub dt: Option<StepSpec>,
    pub max_iter: Option<usize>,
    pub residual_tol: Option<f64>,
    pub stencil: Option<String>,
    pub fit: Option<bool>,
    pub cluster_tol: Option<f64>,
    pub jobs: Option<usize>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub psi_out: Option<PathBuf>,
}

impl JobFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text).map_err(|message| CliError::Job { path: path.to_path_buf(), message })
    }

    /// Equivalent argument vector, program name included.
    pub fn to_args(&self) -> Result<Vec<String>, String> {
        if !matches!(self.command.as_str(), "solve" | "split" | "scan" | "sweep") {
            return Err(format!("unknown command `{}` (solve, split, scan, sweep)", self.command));
        }
        let mut args = vec!["selectrelax".to_string(), self.command.clone()];
        let mut flag = |name: &str, value: String| {
            args.push(format!("--{name}"));
            args.push(value);
        };
        let list = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        if let Some(p) = &self.potential {
            flag("potential", p.clone());
        }
        if let Some(v) = self.lambda {
            flag("lambda", v.to_string());
        }
        if let Some(v) = self.energy {
            flag("E", v.to_string());
        }
        if let Some(r) = self.e_range {
            flag("E-range", list(&r));
        }
        if let Some(v) = self.points {
            flag("points", v.to_string());
        }
        if let Some(v) = self.dx {
            flag("dx", v.to_string());
        }
        if let Some(v) = &self.dx_list {
            flag("dx-list", list(v));
        }
        match &self.domain {
            Some(RangeSpec::Keyword(k)) => flag("domain", k.clone()),
            Some(RangeSpec::Range(r)) => flag("domain", list(r)),
            None => {}
        }
        if let Some(v) = &self.parity {
            flag("parity", v.clone());
        }
        match &self.dt {
            Some(StepSpec::Keyword(k)) => flag("dt", k.clone()),
            Some(StepSpec::Value(v)) => flag("dt", v.to_string()),
            None => {}
        }
        if let Some(v) = self.max_iter {
            flag("max-iter", v.to_string());
        }
        if let Some(v) = self.residual_tol {
            flag("tol", v.to_string());
        }
        if let Some(v) = &self.stencil {
            flag("stencil", v.clone());
        }
        if let Some(v) = self.cluster_tol {
            flag("cluster-tol", v.to_string());
        }
        if let Some(v) = self.jobs {
            flag("jobs", v.to_string());
        }
        if let Some(v) = &self.format {
            flag("format", v.clone());
        }
        if let Some(v) = &self.out {
            flag("out", v.display().to_string());
        }
        if let Some(v) = &self.psi_out {
            flag("psi-out", v.display().to_string());
        }
        if self.fit == Some(true) {
            args.push("--fit".into());
        }
        Ok(args)
    }
}

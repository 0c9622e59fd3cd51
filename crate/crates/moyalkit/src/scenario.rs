//! Scenario configuration: a TOML file naming the context, the grid, the
//! input fields (builtin generators or MKF1 files), and the per-command
//! parameters.
//!
//! ```toml
//! [context]
//! hbar = 1.0
//! n = 1
//!
//! [grid]
//! points = 64
//! extent = 16.0          # or: extents = [16.0, 16.0]
//! # weyl_exact = true    # overrides extent with L = sqrt(2 pi hbar N)
//!
//! [inputs.psi]
//! kind = "gaussian"      # builtin name
//! x0 = 0.5
//! p0 = -0.3
//!
//! [inputs.A]
//! kind = "file"
//! path = "symbol.mkf"
//!
//! [params]
//! t = 0.785
//! dt = 8.0e-4
//! q = "2"                # or "inf"
//! s = 0.0
//! tau = 0.5
//! k = 20
//! ```

use crate::builtin;
use crate::error::{MoyalError, Result};
use crate::fieldio;
use crate::grid::{GridSpec, SampledField};
use crate::modnorm::Exponent;
use crate::symplectic::HbarContext;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
pub struct ScenarioFile {
    pub context: ContextSection,
    pub grid: GridSection,
    #[serde(default)]
    pub inputs: BTreeMap<String, InputSpec>,
    #[serde(default)]
    pub params: ParamSection,
}

#[derive(Debug, Deserialize)]
pub struct ContextSection {
    pub hbar: f64,
    pub n: usize,
}

#[derive(Debug, Deserialize)]
pub struct GridSection {
    pub points: usize,
    #[serde(default)]
    pub extent: Option<f64>,
    #[serde(default)]
    pub extents: Option<Vec<f64>>,
    #[serde(default)]
    pub weyl_exact: bool,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Num(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
pub struct ParamSection {
    #[serde(flatten)]
    pub values: BTreeMap<String, ParamValue>,
}

#[derive(Debug, Deserialize)]
pub struct InputSpec {
    pub kind: String,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(flatten)]
    pub params: BTreeMap<String, toml::Value>,
}

/// A parsed, validated scenario ready to execute.
pub struct Scenario {
    pub ctx: HbarContext,
    pub grid: GridSpec,
    pub inputs: BTreeMap<String, InputSpec>,
    pub params: BTreeMap<String, ParamValue>,
    base_dir: PathBuf,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MoyalError::Scenario(format!("cannot read {}: {e}", path.display())))?;
        let file: ScenarioFile = toml::from_str(&text)
            .map_err(|e| MoyalError::Scenario(format!("parse error: {e}")))?;
        let ctx = HbarContext::new(file.context.hbar, file.context.n)?;
        let grid = if file.grid.weyl_exact {
            GridSpec::weyl_exact(1, file.grid.points, ctx.hbar)?
        } else if let Some(exts) = file.grid.extents.clone() {
            GridSpec::new(exts.len(), file.grid.points, exts)?
        } else if let Some(l) = file.grid.extent {
            GridSpec::uniform(1, file.grid.points, l)?
        } else {
            return Err(MoyalError::Scenario("grid needs extent or extents".into()));
        };
        Ok(Scenario {
            ctx,
            grid,
            inputs: file.inputs,
            params: file.params.values,
            base_dir: path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        })
    }

    /// Grid for a field of the given dimensionality, sharing N and axis-0
    /// extent with the configured grid.
    pub fn grid_for(&self, dims: usize) -> Result<GridSpec> {
        if self.grid.dims() == dims {
            return Ok(self.grid.clone());
        }
        GridSpec::uniform(dims, self.grid.points(), self.grid.extent(0))
    }

    /// Resolves a named input: builtin generator or MKF1 file. File inputs
    /// must carry the scenario hbar exactly; no silent rescaling.
    pub fn resolve(&self, name: &str, dims: usize) -> Result<SampledField> {
        let spec = self.inputs.get(name).ok_or_else(|| {
            MoyalError::Scenario(format!("scenario has no input named '{name}'"))
        })?;
        if spec.kind == "file" {
            let rel = spec.path.as_ref().ok_or_else(|| {
                MoyalError::Scenario(format!("input '{name}' is a file but has no path"))
            })?;
            let full = if rel.is_absolute() { rel.clone() } else { self.base_dir.join(rel) };
            let (field, fctx) = fieldio::read_field(&full)?;
            if fctx.hbar.to_bits() != self.ctx.hbar.to_bits() {
                return Err(MoyalError::HbarMismatch {
                    file: fctx.hbar,
                    scenario: self.ctx.hbar,
                });
            }
            if field.grid().dims() != dims {
                return Err(MoyalError::Scenario(format!(
                    "input '{name}' has d = {}, command expects d = {dims}",
                    field.grid().dims()
                )));
            }
            return Ok(field);
        }
        let grid = self.grid_for(dims)?;
        let mut numeric = BTreeMap::new();
        for (k, v) in &spec.params {
            if let Some(x) = v.as_float() {
                numeric.insert(k.clone(), x);
            } else if let Some(x) = v.as_integer() {
                numeric.insert(k.clone(), x as f64);
            }
        }
        builtin::generate(&spec.kind, &grid, &self.ctx, &numeric)
    }

    pub fn param_f64(&self, key: &str) -> Option<f64> {
        match self.params.get(key) {
            Some(ParamValue::Num(x)) => Some(*x),
            Some(ParamValue::Text(s)) => s.parse().ok(),
            None => None,
        }
    }

    pub fn param_exponent(&self, key: &str) -> Result<Exponent> {
        match self.params.get(key) {
            Some(ParamValue::Text(s)) if s == "inf" => Ok(Exponent::Infinity),
            Some(ParamValue::Text(s)) => s
                .parse::<f64>()
                .map(Exponent::Finite)
                .map_err(|_| MoyalError::Scenario(format!("bad exponent '{s}'"))),
            Some(ParamValue::Num(x)) => Ok(Exponent::Finite(*x)),
            None => Ok(Exponent::Finite(2.0)),
        }
    }
}

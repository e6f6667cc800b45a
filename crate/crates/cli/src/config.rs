//! Flat key-value run configuration, read from TOML or JSON.

use std::path::Path;

use anyhow::{bail, Context};
use nonlocal_core::integrators::{Scale, SolverConfig};
use nonlocal_core::{Profile, QuadratureSpec, SphereQuadSpec, Vector};
use serde::{Deserialize, Serialize};

/// `h` as a positive number or the word `"limit"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HValue {
    Value(f64),
    Word(LimitWord),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitWord {
    Limit,
}

impl HValue {
    pub fn scale(self) -> Scale {
        match self {
            HValue::Value(h) => Scale::Memory(h),
            HValue::Word(LimitWord::Limit) => Scale::Limit,
        }
    }
}

fn default_delta() -> f64 {
    0.05
}

fn default_fp_max_iter() -> usize {
    50
}

fn default_h() -> HValue {
    HValue::Word(LimitWord::Limit)
}

/// Every key of a run. Defaults are filled in on load, so the serialized
/// form is a complete echo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub dimension: usize,
    pub amplitude: f64,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    pub width: f64,
    #[serde(default = "default_h")]
    pub h: HValue,
    pub horizon: f64,
    pub dt: f64,
    pub xi0: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub h_list: Option<Vec<f64>>,
    #[serde(default)]
    pub eta_radius: Option<f64>,
    #[serde(default)]
    pub eta_nodes_per_axis: Option<usize>,
    #[serde(default)]
    pub r_substeps_per_history_step: Option<usize>,
    #[serde(default)]
    pub tail_tolerance: Option<f64>,
    #[serde(default)]
    pub rho_nodes: Option<usize>,
    #[serde(default)]
    pub circle_nodes: Option<usize>,
    #[serde(default)]
    pub fp_tol: Option<f64>,
    #[serde(default = "default_fp_max_iter")]
    pub fp_max_iter: usize,
}

/// The `h` values of a study when neither the file nor `--h-list` gives any.
pub const DEFAULT_H_LIST: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

impl Config {
    /// Reads `.json` files as JSON and everything else as TOML.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config: Config = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        } else {
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        };
        config.fill_defaults();
        config.solver_config()?;
        Ok(config)
    }

    fn fill_defaults(&mut self) {
        let quad = QuadratureSpec::default();
        let squad = SphereQuadSpec::default();
        self.center.get_or_insert_with(|| vec![0.0; self.dimension]);
        self.eta_nodes_per_axis.get_or_insert(quad.eta_nodes_per_axis);
        self.r_substeps_per_history_step.get_or_insert(quad.r_substeps_per_history_step);
        self.tail_tolerance.get_or_insert(quad.tail_tolerance);
        self.rho_nodes.get_or_insert(squad.rho_nodes);
        self.circle_nodes.get_or_insert(squad.circle_nodes);
        self.h_list.get_or_insert_with(|| DEFAULT_H_LIST.to_vec());
    }

    pub fn profile(&self) -> anyhow::Result<Profile> {
        let center = match &self.center {
            Some(c) => c.clone(),
            None => vec![0.0; self.dimension],
        };
        if center.len() != self.dimension {
            bail!("center has {} entries but dimension is {}", center.len(), self.dimension);
        }
        Ok(Profile::new(self.amplitude, &center, self.width)?)
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        let d = QuadratureSpec::default();
        QuadratureSpec {
            eta_radius: self.eta_radius,
            eta_nodes_per_axis: self.eta_nodes_per_axis.unwrap_or(d.eta_nodes_per_axis),
            r_substeps_per_history_step: self.r_substeps_per_history_step.unwrap_or(d.r_substeps_per_history_step),
            tail_tolerance: self.tail_tolerance.unwrap_or(d.tail_tolerance),
        }
    }

    pub fn sphere_quadrature(&self) -> SphereQuadSpec {
        let d = SphereQuadSpec::default();
        SphereQuadSpec {
            rho_nodes: self.rho_nodes.unwrap_or(d.rho_nodes),
            circle_nodes: self.circle_nodes.unwrap_or(d.circle_nodes),
        }
    }

    /// Solver settings; validated, except for the dimension restriction of
    /// the fields, which the commands report themselves.
    pub fn solver_config(&self) -> anyhow::Result<SolverConfig> {
        if self.xi0.len() != self.dimension {
            bail!("xi0 has {} entries but dimension is {}", self.xi0.len(), self.dimension);
        }
        let xi0 = Vector::from_slice(&self.xi0)?;
        let config = SolverConfig {
            profile: self.profile()?,
            scale: self.h.scale(),
            horizon: self.horizon,
            dt: self.dt,
            xi0,
            quad: self.quadrature(),
            squad: self.sphere_quadrature(),
            fp_tol: self.fp_tol,
            fp_max_iter: self.fp_max_iter,
        };
        config.validate()?;
        Ok(config)
    }

    /// `--h-list` wins over the file, which wins over [`DEFAULT_H_LIST`].
    pub fn resolve_h_list(&self, cli: Option<&[f64]>) -> Vec<f64> {
        cli.map(<[f64]>::to_vec)
            .or_else(|| self.h_list.clone())
            .unwrap_or_else(|| DEFAULT_H_LIST.to_vec())
    }
}

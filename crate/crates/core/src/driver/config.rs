use std::path::{Path, PathBuf};

use crate::descent::DescentOptions;
use crate::error::{Error, Result};
use crate::mesh::{Marker, MarkerMap};
use crate::saddle::InnerMode;

/// Inner solver used for the `A` solves of the descent saddle-point system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerSolverKind {
    Direct,
    /// Conjugate gradients to the given relative tolerance.
    Iterative(f64),
}

/// Parameters of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimConfig {
    pub length: f64,
    pub height: f64,
    pub obstacle_edge: f64,
    /// Segments per obstacle side of the generated base mesh.
    pub base_resolution: usize,
    /// Gmsh file used instead of the generated benchmark mesh.
    pub mesh_file: Option<PathBuf>,
    pub markers: MarkerMap,
    pub nu: f64,
    /// Height of the inflow profile.
    pub inflow_height: f64,
    /// Uniform refinements of the base mesh.
    pub levels: usize,
    pub p_init: f64,
    pub p_inc: f64,
    pub p_max: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub epsilon: f64,
    pub sigma_min: f64,
    pub max_steps: usize,
    pub max_newton: usize,
    pub flow_tol: f64,
    pub flow_max_newton: usize,
    pub output_dir: PathBuf,
    pub inner_solver: InnerSolverKind,
    /// Write `step_<k>.vtk` for every accepted step.
    pub write_vtk: bool,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            length: 20.0,
            height: 6.0,
            obstacle_edge: 0.4,
            base_resolution: 8,
            mesh_file: None,
            markers: MarkerMap::default(),
            nu: 0.02,
            inflow_height: 6.0,
            levels: 1,
            p_init: 2.0,
            p_inc: 0.19,
            p_max: 4.8,
            eps1: 1e-5,
            eps2: 1e-8,
            epsilon: 1e-8,
            sigma_min: 2f64.powi(-20),
            max_steps: 100,
            max_newton: 50,
            flow_tol: 1e-10,
            flow_max_newton: 25,
            output_dir: PathBuf::from("out"),
            inner_solver: InnerSolverKind::Direct,
            write_vtk: true,
        }
    }
}

impl OptimConfig {
    pub fn descent_options(&self) -> DescentOptions {
        DescentOptions {
            p_init: self.p_init,
            p_inc: self.p_inc,
            p_max: self.p_max,
            epsilon: self.epsilon,
            eps2: self.eps2,
            max_newton: self.max_newton,
            inner: match self.inner_solver {
                InnerSolverKind::Direct => InnerMode::Direct,
                InnerSolverKind::Iterative(tol) => InnerMode::Iterative { tol },
            },
            ..DescentOptions::default()
        }
    }

    /// Checks the invariants; `line` and `key` locate the offending entry.
    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(key, message)| Error::Config { line: 0, key: key.into(), message })
    }

    fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        let positive: [(&str, f64); 11] = [
            ("length", self.length),
            ("height", self.height),
            ("obstacle_edge", self.obstacle_edge),
            ("nu", self.nu),
            ("inflow_height", self.inflow_height),
            ("p_inc", self.p_inc),
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("epsilon", self.epsilon),
            ("flow_tol", self.flow_tol),
            ("sigma_min", self.sigma_min),
        ];
        for (key, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err((key, format!("must be positive and finite, got {v}")));
            }
        }
        if self.sigma_min > 1.0 {
            return Err(("sigma_min", format!("must lie in (0, 1], got {}", self.sigma_min)));
        }
        if !(self.p_init >= 2.0) || !self.p_init.is_finite() {
            return Err(("p_init", format!("must be at least 2, got {}", self.p_init)));
        }
        if !(self.p_max >= self.p_init) || !self.p_max.is_finite() {
            return Err(("p_max", format!("must be at least p_init = {}, got {}", self.p_init, self.p_max)));
        }
        if self.mesh_file.is_none() && self.base_resolution < 4 {
            return Err(("base_resolution", format!("must be at least 4, got {}", self.base_resolution)));
        }
        if self.levels > 6 {
            return Err(("levels", format!("at most 6 refinements are supported, got {}", self.levels)));
        }
        if self.max_newton == 0 {
            return Err(("max_newton", "must be positive".into()));
        }
        if self.flow_max_newton == 0 {
            return Err(("flow_max_newton", "must be positive".into()));
        }
        if let InnerSolverKind::Iterative(t) = self.inner_solver {
            if !(t > 0.0 && t < 1.0) {
                return Err(("inner_tol", format!("must lie in (0, 1), got {t}")));
            }
        }
        Ok(())
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<OptimConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config = parse_config_str(&text)?;
    // Relative mesh paths are taken relative to the config file.
    if let (Some(mesh), Some(dir)) = (&config.mesh_file, path.parent()) {
        if mesh.is_relative() {
            config.mesh_file = Some(dir.join(mesh));
        }
    }
    Ok(config)
}

/// Parses `key = value` lines. `#` starts a comment; unknown or repeated
/// keys are errors; missing keys keep their defaults.
pub fn parse_config_str(text: &str) -> Result<OptimConfig> {
    let mut c = OptimConfig::default();
    let mut seen: Vec<String> = Vec::new();
    let mut key_lines: Vec<(&'static str, usize)> = Vec::new();
    let mut inner_kind: Option<(String, usize)> = None;
    let mut inner_tol = 1e-10;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            key: content.to_string(),
            message: "expected `key = value`".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let err = |message: String| Error::Config { line, key: key.to_string(), message };
        if seen.iter().any(|k| k == key) {
            return Err(err("key given more than once".into()));
        }
        seen.push(key.to_string());
        let float = || -> Result<f64> {
            value.parse::<f64>().map_err(|_| err(format!("`{value}` is not a number")))
        };
        let int = || -> Result<usize> {
            value.parse::<usize>().map_err(|_| err(format!("`{value}` is not a non-negative integer")))
        };
        let tag = || -> Result<i64> { value.parse::<i64>().map_err(|_| err(format!("`{value}` is not an integer tag"))) };
        let known: &'static str = match key {
            "length" => { c.length = float()?; "length" }
            "height" => { c.height = float()?; "height" }
            "obstacle_edge" => { c.obstacle_edge = float()?; "obstacle_edge" }
            "base_resolution" => { c.base_resolution = int()?; "base_resolution" }
            "mesh_file" => { c.mesh_file = Some(PathBuf::from(value)); "mesh_file" }
            "tag_inflow" => { c.markers.insert(tag()?, Marker::Inflow); "tag_inflow" }
            "tag_outflow" => { c.markers.insert(tag()?, Marker::Outflow); "tag_outflow" }
            "tag_wall" => { c.markers.insert(tag()?, Marker::Wall); "tag_wall" }
            "tag_obstacle" => { c.markers.insert(tag()?, Marker::Obstacle); "tag_obstacle" }
            "nu" => { c.nu = float()?; "nu" }
            "inflow_height" => { c.inflow_height = float()?; "inflow_height" }
            "levels" => { c.levels = int()?; "levels" }
            "p_init" => { c.p_init = float()?; "p_init" }
            "p_inc" => { c.p_inc = float()?; "p_inc" }
            "p_max" => { c.p_max = float()?; "p_max" }
            "eps1" => { c.eps1 = float()?; "eps1" }
            "eps2" => { c.eps2 = float()?; "eps2" }
            "epsilon" => { c.epsilon = float()?; "epsilon" }
            "sigma_min" => { c.sigma_min = float()?; "sigma_min" }
            "max_steps" => { c.max_steps = int()?; "max_steps" }
            "max_newton" => { c.max_newton = int()?; "max_newton" }
            "flow_tol" => { c.flow_tol = float()?; "flow_tol" }
            "flow_max_newton" => { c.flow_max_newton = int()?; "flow_max_newton" }
            "output_dir" => { c.output_dir = PathBuf::from(value); "output_dir" }
            "write_vtk" => {
                c.write_vtk = value.parse().map_err(|_| err(format!("`{value}` is not true or false")))?;
                "write_vtk"
            }
            "inner_solver" => { inner_kind = Some((value.to_string(), line)); "inner_solver" }
            "inner_tol" => { inner_tol = float()?; "inner_tol" }
            _ => return Err(err("unknown key".into())),
        };
        key_lines.push((known, line));
    }
    if let Some((kind, line)) = inner_kind {
        c.inner_solver = match kind.as_str() {
            "direct" => InnerSolverKind::Direct,
            "cg" | "iterative" => InnerSolverKind::Iterative(inner_tol),
            other => {
                return Err(Error::Config {
                    line,
                    key: "inner_solver".into(),
                    message: format!("expected `direct` or `cg`, got `{other}`"),
                })
            }
        };
    }
    c.check().map_err(|(key, message)| Error::Config {
        line: key_lines.iter().find(|(k, _)| *k == key).map_or(0, |(_, l)| *l),
        key: key.into(),
        message,
    })?;
    Ok(c)
}

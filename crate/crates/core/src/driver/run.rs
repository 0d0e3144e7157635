use std::time::Instant;

use super::config::OptimConfig;
use super::output::{write_outputs, write_step_vtk};
use crate::descent::{constraint_values, p_continuation, w1p_norm};
use crate::error::{Error, Result};
use crate::flow::{
    energy_dissipation, shape_gradient, solve_adjoint, solve_flow, FlowOptions, FlowProblem, FlowState,
};
use crate::mesh::{
    generate_benchmark_mesh, obstacle_polygon, quality_report, read_msh, symmetric_difference_area,
    GridHierarchy, Mesh, Point, Polygon, QualityReport,
};

/// Why the optimization loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    /// `|u_{p_max}|_{W1p} < eps1`.
    Converged,
    /// The step size fell below `sigma_min`.
    Stalled,
    MaxSteps,
}

impl ExitStatus {
    pub fn name(self) -> &'static str {
        match self {
            ExitStatus::Converged => "converged",
            ExitStatus::Stalled => "stalled",
            ExitStatus::MaxSteps => "max_steps",
        }
    }
}

/// One accepted optimization step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub sigma: f64,
    pub j: f64,
    /// Constraint drift re-evaluated on the updated mesh against the initial
    /// domain: first moments and area.
    pub g_inf: f64,
    pub quality: QualityReport,
    pub w1p: f64,
    pub level_mismatch: f64,
    pub flow_iterations: usize,
    pub newton_per_stage: Vec<usize>,
    pub inner_solves_per_stage: Vec<usize>,
    pub polygon: Polygon,
    /// Symmetric-difference distance to the final obstacle, filled at exit.
    pub distance_to_final: Option<f64>,
}

/// A trial step that was not accepted; the geometry was restored.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectedTrial {
    pub step: usize,
    pub trial: usize,
    pub sigma: f64,
    /// Objective on the trial geometry if the flow could be solved.
    pub j: Option<f64>,
    pub reason: String,
    /// Every level's coordinates equal the pre-trial snapshot bitwise.
    pub restored: bool,
}

/// Wall-clock seconds per accepted step. Kept apart from the log proper so
/// that logs of identical runs compare equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepTiming {
    pub step: usize,
    pub adjoint: f64,
    pub descent: f64,
    pub flow: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    pub j0: Option<f64>,
    pub initial_polygon: Option<Polygon>,
    pub steps: Vec<StepRecord>,
    pub rejected: Vec<RejectedTrial>,
    pub exit: Option<ExitStatus>,
    pub timings: Vec<StepTiming>,
}

impl RunLog {
    pub fn final_j(&self) -> Option<f64> {
        self.steps.last().map(|s| s.j).or(self.j0)
    }
}

/// A run aborted by an error, with everything logged up to that point.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub log: RunLog,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} accepted steps)", self.error, self.log.steps.len())
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Test hook applied to a copy of the shape gradient before each trial,
/// called with the step and trial index.
pub type GradientHook<'a> = &'a mut dyn FnMut(usize, usize, &mut [f64]);

/// Builds the mesh hierarchy described by the configuration.
pub fn build_hierarchy(config: &OptimConfig) -> Result<GridHierarchy> {
    let mut h = match &config.mesh_file {
        Some(path) => GridHierarchy::new(read_msh(path, &config.markers)?),
        None => generate_benchmark_mesh(config.length, config.height, config.obstacle_edge, config.base_resolution)?,
    };
    for _ in 0..config.levels {
        h.refine_uniform()?;
    }
    Ok(h)
}

fn moments(mesh: &Mesh) -> Result<[f64; 3]> {
    let g = constraint_values(mesh, &vec![0.0; 2 * mesh.n_nodes()])?;
    Ok([g[0], g[1], mesh.area()])
}

fn bitwise_equal(a: &[Vec<Point>], b: &[Vec<Point>]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.len() == y.len()
                && x.iter().zip(y).all(|(p, q)| p[0].to_bits() == q[0].to_bits() && p[1].to_bits() == q[1].to_bits())
        })
}

/// Runs the steepest-descent loop and writes the outputs to
/// `config.output_dir`.
pub fn run_optimize(config: &OptimConfig) -> std::result::Result<RunLog, Box<RunFailure>> {
    run_optimize_with(config, None)
}

pub fn run_optimize_with(
    config: &OptimConfig,
    hook: Option<GradientHook<'_>>,
) -> std::result::Result<RunLog, Box<RunFailure>> {
    let mut log = RunLog::default();
    let result = optimize(config, hook, &mut log);
    if let Some(reference) = log.steps.last().map(|s| s.polygon.clone()) {
        if let Err(e) = fill_distances(&mut log, &reference) {
            log::warn!("shape distance report failed: {e}");
        }
    }
    let written = write_outputs(config, &log);
    match (result, written) {
        (Ok(()), Ok(())) => Ok(log),
        (Err(error), _) | (Ok(()), Err(error)) => Err(Box::new(RunFailure { error, log })),
    }
}

fn fill_distances(log: &mut RunLog, reference: &Polygon) -> Result<()> {
    let d = shape_convergence_report(log, reference)?;
    for (s, d) in log.steps.iter_mut().zip(d.into_iter().skip(1)) {
        s.distance_to_final = Some(d);
    }
    Ok(())
}

/// `d(Omega^k, reference)` for the initial obstacle and every accepted step.
pub fn shape_convergence_report(log: &RunLog, reference: &Polygon) -> Result<Vec<f64>> {
    log.initial_polygon
        .iter()
        .chain(log.steps.iter().map(|s| &s.polygon))
        .map(|p| symmetric_difference_area(p, reference, 1000))
        .collect()
}

fn optimize(config: &OptimConfig, mut hook: Option<GradientHook<'_>>, log: &mut RunLog) -> Result<()> {
    config.validate()?;
    faer::set_global_parallelism(faer::Par::Seq);
    std::fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    let mut hierarchy = build_hierarchy(config)?;
    let problem = FlowProblem::channel(config.nu, config.inflow_height);
    let flow_opts = FlowOptions { tol: config.flow_tol, max_newton: config.flow_max_newton };
    let descent_opts = config.descent_options();

    let mut state: FlowState = solve_flow(hierarchy.finest(), &problem, &flow_opts, None)?;
    let mut j_current = energy_dissipation(hierarchy.finest(), &state)?;
    let reference_moments = moments(hierarchy.finest())?;
    log.j0 = Some(j_current);
    log.initial_polygon = obstacle_polygon(hierarchy.finest()).ok();
    log::info!(
        "initial J = {j_current:.10e} on {} triangles ({} levels)",
        hierarchy.finest().n_triangles(),
        hierarchy.n_levels()
    );
    if config.write_vtk {
        write_step_vtk(config, 0, hierarchy.finest(), &state, None, None)?;
    }

    for step in 1..=config.max_steps {
        let t_step = Instant::now();
        let mesh = hierarchy.finest();
        let adjoint = solve_adjoint(mesh, &problem, &state)?;
        let gradient = shape_gradient(mesh, &problem, &state, &adjoint)?;
        let t_adjoint = t_step.elapsed().as_secs_f64();
        let mut sigma = 1.0;
        let mut trial = 0;
        let (mut t_descent, mut t_flow) = (0.0, 0.0);
        loop {
            let snapshot = hierarchy.coordinates();
            let mut g = gradient.clone();
            if let Some(h) = hook.as_deref_mut() {
                h(step, trial, &mut g);
            }
            let t0 = Instant::now();
            let descent = p_continuation(hierarchy.finest(), sigma, &g, &descent_opts);
            t_descent += t0.elapsed().as_secs_f64();
            let outcome = descent.and_then(|cont| {
                let w1p = w1p_norm(hierarchy.finest(), &cont.u, config.p_max)?;
                hierarchy.apply_deformation(&cont.u)?;
                let t1 = Instant::now();
                let solved = solve_flow(hierarchy.finest(), &problem, &flow_opts, Some(&state));
                t_flow += t1.elapsed().as_secs_f64();
                let new_state = solved?;
                let j = energy_dissipation(hierarchy.finest(), &new_state)?;
                Ok((cont, w1p, new_state, j))
            });
            let reason = match outcome {
                Ok((cont, w1p, new_state, j)) if j < j_current => {
                    let mesh = hierarchy.finest();
                    let m = moments(mesh)?;
                    let g_inf = (0..3).map(|i| (m[i] - reference_moments[i]).abs()).fold(0.0, f64::max);
                    let record = StepRecord {
                        step,
                        sigma,
                        j,
                        g_inf,
                        quality: quality_report(mesh),
                        w1p,
                        level_mismatch: hierarchy.max_level_mismatch(),
                        flow_iterations: new_state.iterations,
                        newton_per_stage: cont.stages.iter().map(|s| s.iterations).collect(),
                        inner_solves_per_stage: cont.stages.iter().map(|s| s.inner_solves).collect(),
                        polygon: obstacle_polygon(mesh)?,
                        distance_to_final: None,
                    };
                    log::info!(
                        "step {step}: J = {j:.10e} sigma = {sigma:e} |u|_W1p = {w1p:.3e} |g| = {g_inf:.1e} min angle = {:.2}",
                        record.quality.min_angle
                    );
                    if config.write_vtk {
                        write_step_vtk(config, step, mesh, &new_state, Some(&cont.u), Some(&gradient))?;
                    }
                    log.steps.push(record);
                    log.timings.push(StepTiming {
                        step,
                        adjoint: t_adjoint,
                        descent: t_descent,
                        flow: t_flow,
                        total: t_step.elapsed().as_secs_f64(),
                    });
                    state = new_state;
                    j_current = j;
                    if w1p < config.eps1 {
                        log.exit = Some(ExitStatus::Converged);
                        return Ok(());
                    }
                    None
                }
                Ok((_, _, _, j)) => Some((Some(j), format!("objective did not decrease ({j:.10e} >= {j_current:.10e})"))),
                Err(e @ (Error::NonConvergence { .. }
                | Error::SingularConfiguration { .. }
                | Error::Tangling { .. }
                | Error::RankDeficient { .. }
                | Error::Solver(_))) => Some((None, e.to_string())),
                Err(e) => return Err(e),
            };
            let Some((j, reason)) = reason else { break };
            hierarchy.restore_coordinates(snapshot.clone())?;
            let restored = bitwise_equal(&hierarchy.coordinates(), &snapshot);
            log::info!("step {step} trial {trial} rejected at sigma = {sigma:e}: {reason}");
            log.rejected.push(RejectedTrial { step, trial, sigma, j, reason, restored });
            sigma *= 0.5;
            trial += 1;
            if sigma < config.sigma_min {
                log.exit = Some(ExitStatus::Stalled);
                return Ok(());
            }
        }
    }
    log.exit = Some(ExitStatus::MaxSteps);
    Ok(())
}

use super::kinematics::{check_len, w1p_norm, Kinematics};
use super::lagrangian::{
    assemble_constraint_jacobian, assemble_defect, assemble_hessian_into, Multipliers,
};
use crate::error::{Error, Result};
use crate::fem::{sparsity_pattern, FunctionSpace, SpaceKind};
use crate::mesh::Mesh;
use crate::saddle::{build_inner_solver, solve_saddle_direct, InnerMode, SaddlePointSystem};

/// Parameters of the descent subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentOptions {
    pub p_init: f64,
    pub p_inc: f64,
    pub p_max: f64,
    /// Hessian regularization.
    pub epsilon: f64,
    /// Newton stopping threshold on `|du|_{W1p} + |dl|_2`.
    pub eps2: f64,
    pub max_newton: usize,
    /// Step halvings allowed when a Newton step inverts an element.
    pub max_halvings: usize,
    pub inner: InnerMode,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            p_init: 2.0,
            p_inc: 0.19,
            p_max: 4.8,
            epsilon: 1e-8,
            eps2: 1e-8,
            max_newton: 50,
            max_halvings: 10,
            inner: InnerMode::Direct,
        }
    }
}

/// Result of one Newton solve at fixed `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult {
    pub u: Vec<f64>,
    pub lambda: Multipliers,
    pub p: f64,
    pub iterations: usize,
    pub inner_solves: usize,
    /// Step halvings applied over all iterations.
    pub halvings: usize,
    /// Last `|du|_{W1p} + |dl|_2`.
    pub last_step: f64,
}

fn admissible(mesh: &Mesh, u: &[f64]) -> bool {
    (0..mesh.n_triangles()).all(|e| Kinematics::new(mesh, u, e).is_ok())
}

/// Newton's method for the optimality system of the Lagrangian at fixed `p`,
/// starting from `u0` and zero multipliers.
pub fn newton_descent(
    mesh: &Mesh,
    u0: &[f64],
    sigma: f64,
    gradient: &[f64],
    p: f64,
    options: &DescentOptions,
) -> Result<NewtonResult> {
    check_len(mesh, u0)?;
    if !admissible(mesh, u0) {
        return Err(Error::Contract("initial displacement inverts an element".into()));
    }
    let space = FunctionSpace::new(SpaceKind::P1Vector, mesh);
    let mut a = sparsity_pattern(mesh, &space, &space)?;
    let mut u = u0.to_vec();
    let mut lambda: Multipliers = [0.0; 3];
    let mut out = NewtonResult {
        u: Vec::new(),
        lambda,
        p,
        iterations: 0,
        inner_solves: 0,
        halvings: 0,
        last_step: f64::INFINITY,
    };
    while out.iterations < options.max_newton {
        let (r_u, r_l) = assemble_defect(mesh, &u, &lambda, sigma, gradient, p)?;
        assemble_hessian_into(&mut a, mesh, &u, &lambda, p, options.epsilon)?;
        let b = assemble_constraint_jacobian(mesh, &u)?;
        let inner = build_inner_solver(&a, options.inner)?;
        let system = SaddlePointSystem::new(b, r_u, r_l.to_vec())?;
        let step = solve_saddle_direct(&system, &inner)?;
        out.inner_solves += inner.solve_count();
        out.iterations += 1;

        let mut t = 1.0;
        let mut trial: Vec<f64> = u.iter().zip(&step.du).map(|(a, b)| a + b).collect();
        let mut halvings = 0;
        while !admissible(mesh, &trial) {
            if halvings == options.max_halvings {
                return Err(Error::NonConvergence {
                    what: format!("descent Newton step at p = {p} (element inversion after {halvings} halvings)"),
                    iterations: out.iterations,
                    residual: out.last_step,
                });
            }
            halvings += 1;
            t *= 0.5;
            trial = u.iter().zip(&step.du).map(|(a, b)| a + t * b).collect();
        }
        out.halvings += halvings;
        let du: Vec<f64> = step.du.iter().map(|v| t * v).collect();
        u = trial;
        for i in 0..3 {
            lambda[i] += t * step.dlambda[i];
        }
        let dl = step.dlambda.iter().map(|v| (t * v).powi(2)).sum::<f64>().sqrt();
        out.last_step = w1p_norm(mesh, &du, p)? + dl;
        log::trace!("descent Newton p={p:.3} it={} step={:.3e}", out.iterations, out.last_step);
        if out.last_step < options.eps2 {
            out.u = u;
            out.lambda = lambda;
            return Ok(out);
        }
    }
    Err(Error::NonConvergence {
        what: format!("descent Newton at p = {p}"),
        iterations: out.iterations,
        residual: out.last_step,
    })
}

/// Exponents `p_init + k p_inc` below `p_max`, then `p_max` itself.
pub fn p_sequence(p_init: f64, p_inc: f64, p_max: f64) -> Result<Vec<f64>> {
    if !(p_init >= 2.0) || !(p_inc > 0.0) || !(p_max >= p_init) || !p_max.is_finite() {
        return Err(Error::Parameter(format!(
            "invalid p sequence: p_init = {p_init}, p_inc = {p_inc}, p_max = {p_max}"
        )));
    }
    let mut seq = Vec::new();
    let mut k = 0usize;
    loop {
        let p = p_init + k as f64 * p_inc;
        if p >= p_max - 1e-12 {
            break;
        }
        seq.push(p);
        k += 1;
    }
    seq.push(p_max);
    Ok(seq)
}

/// Outcome of a p-continuation.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub u: Vec<f64>,
    pub lambda: Multipliers,
    pub stages: Vec<NewtonResult>,
}

impl ContinuationResult {
    pub fn newton_iterations(&self) -> usize {
        self.stages.iter().map(|s| s.iterations).sum()
    }

    pub fn inner_solves(&self) -> usize {
        self.stages.iter().map(|s| s.inner_solves).sum()
    }
}

/// Solves the descent subproblem for each exponent of [`p_sequence`],
/// warm-starting every stage with the previous solution (zero at first).
pub fn p_continuation(
    mesh: &Mesh,
    sigma: f64,
    gradient: &[f64],
    options: &DescentOptions,
) -> Result<ContinuationResult> {
    let seq = p_sequence(options.p_init, options.p_inc, options.p_max)?;
    let mut u = vec![0.0; 2 * mesh.n_nodes()];
    let mut stages: Vec<NewtonResult> = Vec::with_capacity(seq.len());
    for p in seq {
        let mut stage = newton_descent(mesh, &u, sigma, gradient, p, options).map_err(|e| match e {
            Error::NonConvergence { what, iterations, residual } => Error::NonConvergence {
                what: format!("{what} (p-continuation)"),
                iterations,
                residual,
            },
            other => other,
        })?;
        u = std::mem::take(&mut stage.u);
        stages.push(stage);
    }
    let lambda = stages.last().map(|s| s.lambda).unwrap_or_default();
    if let Some(last) = stages.last_mut() {
        last.u = u.clone();
    }
    Ok(ContinuationResult { u, lambda, stages })
}

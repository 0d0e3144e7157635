use std::fmt::Write as _;
use std::path::Path;

use super::config::OptimConfig;
use super::run::RunLog;
use crate::error::{Error, Result};
use crate::flow::FlowState;
use crate::mesh::{write_vtk, Mesh, NodalField};

pub const RUNLOG_HEADER: &str = "kind,step,trial,sigma,j,j0,g_inf,min_angle,max_angle,max_radius_ratio,w1p,\
level_mismatch,flow_iterations,newton_per_stage,inner_solves_per_stage,distance_to_final,restored,reason";

/// 17 significant digits, enough to round-trip every `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn list(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Header plus one row per rejected trial and per accepted step, in the
/// order they happened.
pub fn write_runlog_csv(log: &RunLog, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &runlog_csv(log))
}

pub fn runlog_csv(log: &RunLog) -> String {
    let mut out = String::from(RUNLOG_HEADER);
    out.push('\n');
    let j0 = opt(log.j0);
    let mut rejected = log.rejected.iter().peekable();
    let mut emit_rejected = |out: &mut String, upto: usize| {
        while let Some(r) = rejected.next_if(|r| r.step <= upto) {
            let _ = writeln!(
                out,
                "rejected,{},{},{},{},{j0},,,,,,,,,,,{},{}",
                r.step,
                r.trial,
                num(r.sigma),
                opt(r.j),
                r.restored,
                r.reason.replace([',', '"', '\n'], ";")
            );
        }
    };
    for s in &log.steps {
        emit_rejected(&mut out, s.step);
        let q = &s.quality;
        let _ = writeln!(
            out,
            "accepted,{},,{},{},{j0},{},{},{},{},{},{},{},{},{},{},,",
            s.step,
            num(s.sigma),
            num(s.j),
            num(s.g_inf),
            num(q.min_angle),
            num(q.max_angle),
            num(q.max_radius_ratio),
            num(s.w1p),
            num(s.level_mismatch),
            s.flow_iterations,
            list(&s.newton_per_stage),
            list(&s.inner_solves_per_stage),
            opt(s.distance_to_final),
        );
    }
    emit_rejected(&mut out, usize::MAX);
    out
}

/// Writes `run.csv`, `timings.csv` and, when an obstacle was traced,
/// `final_polygon.csv` into the output directory.
pub fn write_outputs(config: &OptimConfig, log: &RunLog) -> Result<()> {
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_runlog_csv(log, dir.join("run.csv"))?;
    let mut t = String::from("step,adjoint_s,descent_s,flow_s,total_s\n");
    for s in &log.timings {
        let _ = writeln!(t, "{},{:.6},{:.6},{:.6},{:.6}", s.step, s.adjoint, s.descent, s.flow, s.total);
    }
    write_atomic(&dir.join("timings.csv"), &t)?;
    let polygon = log.steps.last().map(|s| &s.polygon).or(log.initial_polygon.as_ref());
    if let Some(p) = polygon {
        let mut text = String::from("x,y\n");
        for v in p.points() {
            let _ = writeln!(text, "{},{}", num(v[0]), num(v[1]));
        }
        write_atomic(&dir.join("final_polygon.csv"), &text)?;
    }
    Ok(())
}

/// `step_<k>.vtk` with velocity and pressure at the vertices, and the
/// displacement and shape gradient when given.
pub fn write_step_vtk(
    config: &OptimConfig,
    step: usize,
    mesh: &Mesh,
    state: &FlowState,
    displacement: Option<&[f64]>,
    gradient: Option<&[f64]>,
) -> Result<()> {
    let n = mesh.n_nodes();
    let mut fields = vec![
        NodalField::Vector("velocity", &state.v[..2 * n]),
        NodalField::Scalar("pressure", &state.q),
    ];
    if let Some(u) = displacement {
        fields.push(NodalField::Vector("displacement", u));
    }
    if let Some(g) = gradient {
        fields.push(NodalField::Vector("shape_gradient", g));
    }
    write_vtk(mesh, &fields, config.output_dir.join(format!("step_{step}.vtk")))
}

//! Legacy ASCII VTK (`UNSTRUCTURED_GRID`) output with nodal data.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use super::Mesh;
use crate::error::{Error, Result};

/// A named field with one value (scalar) or one 2-vector per node.
#[derive(Debug, Clone, Copy)]
pub enum NodalField<'a> {
    Scalar(&'a str, &'a [f64]),
    /// Interleaved components, `values[2 i + c]`.
    Vector(&'a str, &'a [f64]),
}

impl NodalField<'_> {
    fn name(&self) -> &str {
        match self {
            NodalField::Scalar(n, _) | NodalField::Vector(n, _) => n,
        }
    }

    fn expected_len(&self, n_nodes: usize) -> usize {
        match self {
            NodalField::Scalar(..) => n_nodes,
            NodalField::Vector(..) => 2 * n_nodes,
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            NodalField::Scalar(_, v) | NodalField::Vector(_, v) => v,
        }
    }
}

/// Writes the mesh and its nodal fields. The file is written to a temporary
/// sibling and renamed into place, so a failed call leaves no partial file.
pub fn write_vtk(mesh: &Mesh, fields: &[NodalField<'_>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = mesh.n_nodes();
    for f in fields {
        if f.values().len() != f.expected_len(n) {
            return Err(Error::Contract(format!(
                "field `{}` has {} values, expected {}",
                f.name(),
                f.values().len(),
                f.expected_len(n)
            )));
        }
        if f.name().is_empty() || f.name().contains(char::is_whitespace) {
            return Err(Error::Contract(format!("invalid field name `{}`", f.name())));
        }
    }

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\npshape mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {n} double");
    for p in mesh.nodes() {
        let _ = writeln!(out, "{:.16e} {:.16e} 0", p[0], p[1]);
    }
    let m = mesh.n_triangles();
    let _ = writeln!(out, "CELLS {m} {}", 4 * m);
    for t in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {m}");
    for _ in 0..m {
        out.push_str("5\n");
    }
    if !fields.is_empty() {
        let _ = writeln!(out, "POINT_DATA {n}");
    }
    for f in fields {
        match f {
            NodalField::Scalar(name, v) => {
                let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for x in v.iter() {
                    let _ = writeln!(out, "{x:.16e}");
                }
            }
            NodalField::Vector(name, v) => {
                let _ = writeln!(out, "VECTORS {name} double");
                for c in v.chunks_exact(2) {
                    let _ = writeln!(out, "{:.16e} {:.16e} 0", c[0], c[1]);
                }
            }
        }
    }

    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Contract(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(out.as_bytes()).and_then(|_| f.sync_all()))
        .and_then(|_| std::fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Symmetric elimination of `x[dofs[k]] = values[k]`.
///
/// Constrained rows and columns are zeroed with a unit diagonal; the known
/// column contributions are moved to `rhs`, whose constrained entries are
/// set to the prescribed values.
pub fn apply_dirichlet(
    matrix: &mut SparseMatrix,
    mut rhs: Option<&mut [f64]>,
    dofs: &[usize],
    values: &[f64],
) -> Result<()> {
    let n = matrix.n_rows();
    if matrix.n_cols() != n {
        return Err(Error::Contract("Dirichlet elimination needs a square matrix".into()));
    }
    if dofs.len() != values.len() {
        return Err(Error::Contract("Dirichlet dofs and values differ in length".into()));
    }
    if rhs.as_ref().is_some_and(|r| r.len() != n) {
        return Err(Error::Contract("right-hand side length does not match matrix".into()));
    }
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for (&d, &v) in dofs.iter().zip(values) {
        if d >= n {
            return Err(Error::Contract(format!("Dirichlet dof {d} out of range")));
        }
        match fixed[d] {
            Some(old) if old != v => {
                return Err(Error::Contract(format!(
                    "dof {d} constrained to both {old} and {v}"
                )))
            }
            _ => fixed[d] = Some(v),
        }
    }
    for &d in dofs {
        if matrix.row(d).all(|(j, _)| j != d) {
            return Err(Error::Contract(format!("dof {d} has no diagonal entry in the pattern")));
        }
    }

    let symmetric = matrix.is_symmetric();
    let row_ptr = matrix.row_ptr().to_vec();
    let col_idx = matrix.col_idx().to_vec();
    let vals = matrix.values_mut();
    for i in 0..n {
        let range = row_ptr[i]..row_ptr[i + 1];
        if let Some(v) = fixed[i] {
            for k in range {
                vals[k] = if col_idx[k] == i { 1.0 } else { 0.0 };
            }
            if let Some(r) = rhs.as_deref_mut() {
                r[i] = v;
            }
        } else {
            for k in range {
                if let Some(v) = fixed[col_idx[k]] {
                    if let Some(r) = rhs.as_deref_mut() {
                        r[i] -= vals[k] * v;
                    }
                    vals[k] = 0.0;
                }
            }
        }
    }
    if symmetric {
        matrix.mark_symmetric()?;
    }
    Ok(())
}

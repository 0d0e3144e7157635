use crate::error::{Error, Result};

/// Plane rotation with `c a + s b = r` and `-s a + c b = 0`, `r >= 0`.
/// `hypot` keeps the evaluation free of overflow and underflow.
pub fn givens(a: f64, b: f64) -> Result<(f64, f64, f64)> {
    if a == 0.0 && b == 0.0 {
        return Err(Error::Contract("givens rotation of the zero vector".into()));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Contract("givens rotation of a non-finite vector".into()));
    }
    let r = a.hypot(b);
    Ok((a / r, b / r, r))
}

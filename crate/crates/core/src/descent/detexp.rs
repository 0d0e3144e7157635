use crate::error::{Error, Result};

/// Coefficients `f_k` of `det(I + t Dv) = sum_k t^k f_k` for a row-major
/// `d x d` matrix `dv`, `d` in {2, 3}.
pub fn det_expansion_coeffs(dv: &[f64], d: usize) -> Result<Vec<f64>> {
    if dv.len() != d * d {
        return Err(Error::Contract(format!("expected {} entries for d = {d}, got {}", d * d, dv.len())));
    }
    let v = |i: usize, j: usize| dv[d * (i - 1) + (j - 1)];
    match d {
        2 => Ok(vec![1.0, v(1, 1) + v(2, 2), v(1, 1) * v(2, 2) - v(1, 2) * v(2, 1)]),
        3 => {
            let f1 = v(1, 1) + v(2, 2) + v(3, 3);
            let f2 = v(1, 1) * v(2, 2) + v(1, 1) * v(3, 3) + v(2, 2) * v(3, 3)
                - v(1, 2) * v(2, 1)
                - v(1, 3) * v(3, 1)
                - v(2, 3) * v(3, 2);
            let f3 = v(1, 1) * v(2, 2) * v(3, 3)
                + v(1, 2) * v(2, 3) * v(3, 1)
                + v(1, 3) * v(2, 1) * v(3, 2)
                - v(1, 3) * v(2, 2) * v(3, 1)
                - v(1, 2) * v(2, 1) * v(3, 3)
                - v(1, 1) * v(2, 3) * v(3, 2);
            Ok(vec![1.0, f1, f2, f3])
        }
        _ => Err(Error::Parameter(format!("determinant expansion supports d = 2 or 3, got {d}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    #[test]
    fn zero_gradient() {
        assert_eq!(det_expansion_coeffs(&[0.0; 4], 2).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(det_expansion_coeffs(&[0.0; 9], 3).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_by_two() {
        let (a, b, c, e) = (0.3, -1.2, 0.7, 2.0);
        assert_eq!(det_expansion_coeffs(&[a, b, c, e], 2).unwrap(), vec![1.0, a + e, a * e - b * c]);
    }

    #[test]
    fn random_three_by_three_matches_lu_determinant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let dv: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
            let t: f64 = rng.random_range(-1.0..1.0);
            let f = det_expansion_coeffs(&dv, 3).unwrap();
            let poly: f64 = f.iter().enumerate().map(|(k, fk)| fk * t.powi(k as i32)).sum();
            let m = DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.0 } + t * dv[3 * i + j]);
            assert!((poly - m.determinant()).abs() < 1e-12);
        }
    }

    #[test]
    fn unsupported_dimension() {
        assert!(det_expansion_coeffs(&[0.0], 1).is_err());
        assert!(det_expansion_coeffs(&[0.0; 3], 2).is_err());
    }
}

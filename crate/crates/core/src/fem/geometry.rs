use crate::error::{Error, Result};
use crate::mesh::Point;

/// Affine map `x = p0 + J xi` from the reference triangle
/// (0,0), (1,0), (0,1) onto a physical triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    /// `jacobian[r][c] = d x_r / d xi_c`.
    pub jacobian: [[f64; 2]; 2],
    /// `det J = 2 |K|`.
    pub det: f64,
    /// `J^{-T}`; maps reference gradients to physical ones.
    pub inv_t: [[f64; 2]; 2],
}

impl ElementGeometry {
    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    /// Physical gradients of the barycentric coordinates.
    pub fn barycentric_gradients(&self) -> [[f64; 2]; 3] {
        let g1 = [self.inv_t[0][0], self.inv_t[1][0]];
        let g2 = [self.inv_t[0][1], self.inv_t[1][1]];
        [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2]
    }
}

pub fn element_geometry(p: [Point; 3]) -> Result<ElementGeometry> {
    let jacobian = [
        [p[1][0] - p[0][0], p[2][0] - p[0][0]],
        [p[1][1] - p[0][1], p[2][1] - p[0][1]],
    ];
    let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::DegenerateElement { det });
    }
    // inverse = adj / det; inv_t is its transpose.
    let inv_t = [
        [jacobian[1][1] / det, -jacobian[1][0] / det],
        [-jacobian[0][1] / det, jacobian[0][0] / det],
    ];
    Ok(ElementGeometry { jacobian, det, inv_t })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_triangle_is_identity() {
        let g = element_geometry([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(g.jacobian, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(g.det, 1.0);
        assert_eq!(g.inv_t, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn scaled_by_two() {
        let g = element_geometry([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]).unwrap();
        assert_eq!(g.det, 4.0);
    }

    #[test]
    fn inverse_and_gradients() {
        let g = element_geometry([[0.3, -0.2], [1.7, 0.4], [0.1, 1.3]]).unwrap();
        // J * J^{-1} = I, with J^{-1} = inv_t^T.
        for r in 0..2 {
            for c in 0..2 {
                let v: f64 = (0..2).map(|k| g.jacobian[r][k] * g.inv_t[c][k]).sum();
                assert!((v - if r == c { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let grads = g.barycentric_gradients();
        for c in 0..2 {
            assert!((grads[0][c] + grads[1][c] + grads[2][c]).abs() < 1e-14);
        }
    }

    #[test]
    fn collinear_is_degenerate() {
        let r = element_geometry([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]);
        assert!(matches!(r, Err(Error::DegenerateElement { .. })));
        let r = element_geometry([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]);
        assert!(matches!(r, Err(Error::DegenerateElement { .. })));
    }
}

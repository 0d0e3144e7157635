//! Lagrange shape functions on one triangle in barycentric form.
//!
//! Local P2 ordering: vertices 0..3, then edges 3..6 where local edge `k`
//! joins vertices `k+1` and `k+2` (mod 3), i.e. is opposite vertex `k`.

/// P1 values at barycentric point `l`.
pub fn p1_values(l: [f64; 3]) -> [f64; 3] {
    l
}

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
        4.0 * l[0] * l[1],
    ]
}

/// Physical P2 gradients given the barycentric gradients `g` of the element.
pub fn p2_gradients(l: [f64; 3], g: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut out = [[0.0; 2]; 6];
    for i in 0..3 {
        let f = 4.0 * l[i] - 1.0;
        out[i] = [f * g[i][0], f * g[i][1]];
    }
    for k in 0..3 {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        out[3 + k] = [
            4.0 * (l[a] * g[b][0] + l[b] * g[a][0]),
            4.0 * (l[a] * g[b][1] + l[b] * g[a][1]),
        ];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const PTS: [[f64; 3]; 4] = [
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [0.2, 0.5, 0.3],
        [0.7, 0.1, 0.2],
        [0.05, 0.05, 0.9],
    ];

    #[test]
    fn partition_of_unity() {
        for l in PTS {
            assert!((p1_values(l).iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert!((p2_values(l).iter().sum::<f64>() - 1.0).abs() < 1e-15);
            let g = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
            let grads = p2_gradients(l, &g);
            for c in 0..2 {
                assert!(grads.iter().map(|d| d[c]).sum::<f64>().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn nodal_interpolation_property() {
        let nodes = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
            [0.5, 0.5, 0.0],
        ];
        for (j, l) in nodes.iter().enumerate() {
            let v = p2_values(*l);
            for (i, vi) in v.iter().enumerate() {
                assert_eq!(*vi, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        // Reference element: x = l1, y = l2.
        let g = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        let (x, y, h) = (0.23, 0.41, 1e-6);
        let at = |x: f64, y: f64| p2_values([1.0 - x - y, x, y]);
        let grads = p2_gradients([1.0 - x - y, x, y], &g);
        for i in 0..6 {
            let dx = (at(x + h, y)[i] - at(x - h, y)[i]) / (2.0 * h);
            let dy = (at(x, y + h)[i] - at(x, y - h)[i]) / (2.0 * h);
            assert!((dx - grads[i][0]).abs() < 1e-9 && (dy - grads[i][1]).abs() < 1e-9);
        }
    }
}

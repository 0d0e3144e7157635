use crate::error::{Error, Result};

/// Quadrature on the reference triangle. Points are barycentric; weights sum
/// to 1, so `sum_q w_q f(x_q) * |K|` approximates `int_K f`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Mean of `x^a y^b` over the reference triangle computed by this rule.
    fn monomial_mean(&self, a: i32, b: i32) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * p[1].powi(a) * p[2].powi(b))
            .sum()
    }
}

/// Exact mean of `x^a y^b` over the reference triangle: `2 a! b! / (a+b+2)!`.
pub(crate) fn monomial_mean_exact(a: u32, b: u32) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    2.0 * fact(a) * fact(b) / fact(a + b + 2)
}

/// Returns a rule exact for polynomials of total degree `degree` (1..=10).
/// Exactness is checked against the analytic monomial means before return.
pub fn quadrature_rule(degree: usize) -> Result<QuadratureRule> {
    let rule = match degree {
        1 => QuadratureRule { points: vec![[1.0 / 3.0; 3]], weights: vec![1.0], degree },
        2 => {
            let (a, b) = (1.0 / 6.0, 2.0 / 3.0);
            QuadratureRule {
                points: vec![[b, a, a], [a, b, a], [a, a, b]],
                weights: vec![1.0 / 3.0; 3],
                degree,
            }
        }
        3..=5 => radon7(degree),
        6..=10 => collapsed_gauss(degree),
        _ => {
            return Err(Error::Parameter(format!(
                "quadrature degree must be in 1..=10, got {degree}"
            )))
        }
    };
    for a in 0..=degree as u32 {
        for b in 0..=(degree as u32 - a) {
            let exact = monomial_mean_exact(a, b);
            let got = rule.monomial_mean(a as i32, b as i32);
            if (got - exact).abs() > 1e-14 * exact.max(1.0) * 10.0 {
                return Err(Error::Contract(format!(
                    "quadrature rule of degree {degree} fails on x^{a} y^{b}: {got} vs {exact}"
                )));
            }
        }
    }
    Ok(rule)
}

fn radon7(degree: usize) -> QuadratureRule {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let a2 = (6.0 + s15) / 21.0;
    let w1 = (155.0 - s15) / 1200.0;
    let w2 = (155.0 + s15) / 1200.0;
    let orbit = |a: f64| {
        let b = 1.0 - 2.0 * a;
        [[b, a, a], [a, b, a], [a, a, b]]
    };
    let mut points = vec![[1.0 / 3.0; 3]];
    points.extend(orbit(a1));
    points.extend(orbit(a2));
    QuadratureRule {
        points,
        weights: vec![9.0 / 40.0, w1, w1, w1, w2, w2, w2],
        degree,
    }
}

/// Tensor Gauss-Legendre rule on the square mapped by `x = s`, `y = t(1-s)`.
fn collapsed_gauss(degree: usize) -> QuadratureRule {
    // The Jacobian (1-s) raises the degree in s by one.
    let n = (degree + 3) / 2;
    let (nodes, weights) = gauss_legendre_unit(n);
    let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new(), degree };
    for (s, ws) in nodes.iter().zip(&weights) {
        for (t, wt) in nodes.iter().zip(&weights) {
            let x = *s;
            let y = t * (1.0 - s);
            rule.points.push([1.0 - x - y, x, y]);
            // Reference area 1/2 is divided out.
            rule.weights.push(2.0 * ws * wt * (1.0 - s));
        }
    }
    rule
}

/// Gauss-Legendre nodes and weights on [0, 1].
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_and_positive() {
        for d in 1..=10 {
            let r = quadrature_rule(d).unwrap();
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14, "degree {d}");
            assert!(r.weights.iter().all(|w| *w > 0.0));
            assert!(r.points.iter().all(|p| p.iter().all(|c| (0.0..=1.0).contains(c))));
        }
    }

    #[test]
    fn centroid_rule() {
        let r = quadrature_rule(1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.weights, vec![1.0]);
    }

    #[test]
    fn degree_two_quadratics() {
        let r = quadrature_rule(2).unwrap();
        // int x^2 = int y^2 = 1/12, int xy = 1/24 over the reference triangle.
        let area = 0.5;
        assert!((r.monomial_mean(2, 0) * area - 1.0 / 12.0).abs() < 1e-15);
        assert!((r.monomial_mean(1, 1) * area - 1.0 / 24.0).abs() < 1e-15);
        assert!((r.monomial_mean(0, 2) * area - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn degree_five_is_sharp() {
        let r = quadrature_rule(5).unwrap();
        // Independent oracle: int_0^1 int_0^{1-x} x^k dy dx = 1/((k+1)(k+2)).
        let exact = |k: f64| 1.0 / ((k + 1.0) * (k + 2.0));
        assert!((0.5 * r.monomial_mean(5, 0) - exact(5.0)).abs() < 1e-15);
        assert!((0.5 * r.monomial_mean(6, 0) - exact(6.0)).abs() > 1e-6);
    }

    #[test]
    fn high_degrees_exact_on_mixed_monomials() {
        let r = quadrature_rule(10).unwrap();
        // int x^4 y^6 = 4! 6! / 12!
        let exact = 24.0 * 720.0 / 479_001_600.0;
        assert!((0.5 * r.monomial_mean(4, 6) - exact).abs() < 1e-17);
    }

    #[test]
    fn unsupported_degree() {
        assert!(matches!(quadrature_rule(0), Err(Error::Parameter(_))));
        assert!(matches!(quadrature_rule(11), Err(Error::Parameter(_))));
    }
}

use super::{signed_area, Mesh, Point};

/// Angle and radius-ratio extremes over a triangulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    /// Smallest interior angle, degrees.
    pub min_angle: f64,
    /// Largest interior angle, degrees.
    pub max_angle: f64,
    /// Largest circumradius / inradius ratio (2 for equilateral triangles).
    pub max_radius_ratio: f64,
    pub elements: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleQuality {
    pub angles: [f64; 3],
    pub radius_ratio: f64,
}

/// Interior angles (law of cosines) and radius ratio `R / r` of one triangle.
pub fn triangle_quality(p: [Point; 3]) -> TriangleQuality {
    let len = |a: Point, b: Point| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    // Side k is opposite vertex k.
    let s = [len(p[1], p[2]), len(p[2], p[0]), len(p[0], p[1])];
    let mut angles = [0.0; 3];
    for k in 0..3 {
        let (a, b, c) = (s[k], s[(k + 1) % 3], s[(k + 2) % 3]);
        let cos = ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0);
        angles[k] = cos.acos().to_degrees();
    }
    let area = signed_area(p[0], p[1], p[2]).abs();
    let semi = 0.5 * (s[0] + s[1] + s[2]);
    // R = abc / (4 A), r = A / s.
    let radius_ratio = s[0] * s[1] * s[2] * semi / (4.0 * area * area);
    TriangleQuality { angles, radius_ratio }
}

pub fn quality_report(mesh: &Mesh) -> QualityReport {
    let mut report = QualityReport {
        min_angle: f64::INFINITY,
        max_angle: f64::NEG_INFINITY,
        max_radius_ratio: f64::NEG_INFINITY,
        elements: mesh.n_triangles(),
    };
    for t in 0..mesh.n_triangles() {
        let q = triangle_quality(mesh.triangle_points(t));
        for a in q.angles {
            report.min_angle = report.min_angle.min(a);
            report.max_angle = report.max_angle.max(a);
        }
        report.max_radius_ratio = report.max_radius_ratio.max(q.radius_ratio);
    }
    report
}

//! Triangle quadrature and exact disk-triangle overlap.

use super::mesh::Point;

/// Radon's 7-point rule, exact for polynomials of degree 5: barycentric
/// points and weights summing to 1.
pub fn radon7() -> [([f64; 3], f64); 7] {
    let s = 15f64.sqrt();
    let a1 = (6.0 - s) / 21.0;
    let b1 = 1.0 - 2.0 * a1;
    let a2 = (6.0 + s) / 21.0;
    let b2 = 1.0 - 2.0 * a2;
    let w1 = (155.0 - s) / 1200.0;
    let w2 = (155.0 + s) / 1200.0;
    [
        ([1.0 / 3.0; 3], 9.0 / 40.0),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
}

pub fn at(tri: &[Point; 3], l: &[f64; 3]) -> Point {
    [l[0] * tri[0][0] + l[1] * tri[1][0] + l[2] * tri[2][0], l[0] * tri[0][1] + l[1] * tri[1][1] + l[2] * tri[2][1]]
}

/// `∫_T f` by the degree-5 rule.
pub fn integrate_triangle(tri: &[Point; 3], area: f64, f: impl Fn(Point, &[f64; 3]) -> f64) -> f64 {
    area * radon7().iter().map(|(l, w)| w * f(at(tri, l), l)).sum::<f64>()
}

/// `∫_T f` with the degree-5 rule on a uniform split into `4^depth` pieces.
pub fn integrate_refined(tri: &[Point; 3], area: f64, depth: u32, f: &impl Fn(Point) -> f64) -> f64 {
    if depth == 0 {
        return integrate_triangle(tri, area, |p, _| f(p));
    }
    let mid = |a: Point, b: Point| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let [a, b, c] = *tri;
    let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]].iter().map(|t| integrate_refined(t, area / 4.0, depth - 1, f)).sum()
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Signed area of `B(0,r) ∩ triangle(0, a, b)`.
fn wedge(a: Point, b: Point, r: f64) -> f64 {
    let sector = |u: Point, v: Point| 0.5 * r * r * cross(u, v).atan2(dot(u, v));
    let d = [b[0] - a[0], b[1] - a[1]];
    let qa = dot(d, d);
    if qa == 0.0 {
        return 0.0;
    }
    let qb = 2.0 * dot(a, d);
    let qc = dot(a, a) - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return sector(a, b);
    }
    let sq = disc.sqrt();
    let (t1, t2) = ((-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa));
    if t2 <= 0.0 || t1 >= 1.0 {
        return sector(a, b);
    }
    let (s, e) = (t1.max(0.0), t2.min(1.0));
    let p = [a[0] + s * d[0], a[1] + s * d[1]];
    let q = [a[0] + e * d[0], a[1] + e * d[1]];
    sector(a, p) + 0.5 * cross(p, q) + sector(q, b)
}

/// Exact area of `B(c,r) ∩ T`.
pub fn disk_triangle_overlap(c: Point, r: f64, tri: &[Point; 3]) -> f64 {
    let rel = tri.map(|p| [p[0] - c[0], p[1] - c[1]]);
    (0..3).map(|i| wedge(rel[i], rel[(i + 1) % 3], r)).sum::<f64>().abs()
}

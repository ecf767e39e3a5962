//! Planar convex hulls (Andrew's monotone chain) and point-to-hull distance.

pub type Point = [f64; 2];

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Hull vertices in counter-clockwise order, collinear points dropped.
/// Degenerate inputs give one or two vertices.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn segment_distance(q: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((q[0] - a[0]) * d[0] + (q[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    let c = [a[0] + t * d[0], a[1] + t * d[1]];
    ((q[0] - c[0]).powi(2) + (q[1] - c[1]).powi(2)).sqrt()
}

/// Euclidean distance from `q` to the hull (zero inside).
pub fn distance_to_hull(hull: &[Point], q: Point) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => segment_distance(q, hull[0], hull[0]),
        2 => segment_distance(q, hull[0], hull[1]),
        n => {
            let inside = (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], q) >= 0.0);
            if inside {
                0.0
            } else {
                (0..n)
                    .map(|i| segment_distance(q, hull[i], hull[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

pub fn hull_contains(points: &[Point], q: Point, tolerance: f64) -> bool {
    distance_to_hull(&convex_hull(points), q) <= tolerance
}

//! Exact planar polygon routines.

pub type Pt = [f64; 2];

fn cross(a: Pt, b: Pt) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Signed shoelace area.
pub fn polygon_area(poly: &[Pt]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    (0..n).map(|i| cross(poly[i], poly[(i + 1) % n])).sum::<f64>() / 2.0
}

/// Clip a convex polygon by the halfplane `<a, x> <= b`.
pub fn clip(poly: &[Pt], a: Pt, b: f64) -> Vec<Pt> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    let val = |p: Pt| a[0] * p[0] + a[1] * p[1] - b;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let (vp, vq) = (val(p), val(q));
        if vp <= 0.0 {
            out.push(p);
        }
        if (vp < 0.0 && vq > 0.0) || (vp > 0.0 && vq < 0.0) {
            let t = vp / (vp - vq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Intersection of the square `[-half, half]^2` with symmetric slabs
/// `|<a_i, x>| <= 1`, counterclockwise.
pub fn slab_polygon(normals: &[Pt], half: f64) -> Vec<Pt> {
    let mut poly = vec![[-half, -half], [half, -half], [half, half], [-half, half]];
    for &a in normals {
        poly = clip(&poly, a, 1.0);
        poly = clip(&poly, [-a[0], -a[1]], 1.0);
        if poly.is_empty() {
            break;
        }
    }
    poly
}

/// Convex hull (Andrew's monotone chain), counterclockwise, without
/// collinear points.
pub fn convex_hull(points: &[Pt]) -> Vec<Pt> {
    let mut pts: Vec<Pt> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Pt, a: Pt, b: Pt| cross([a[0] - o[0], a[1] - o[1]], [b[0] - o[0], b[1] - o[1]]);
    let mut hull: Vec<Pt> = Vec::with_capacity(2 * pts.len());
    for &p in pts.iter() {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Signed area of the triangle `(0, a, b)` intersected with the disk of
/// radius `r` about the origin.
fn triangle_disk(a: Pt, b: Pt, r: f64) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let qa = d[0] * d[0] + d[1] * d[1];
    let mut ts = vec![0.0];
    if qa > 0.0 {
        let qb = 2.0 * (a[0] * d[0] + a[1] * d[1]);
        let qc = a[0] * a[0] + a[1] * a[1] - r * r;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc > 0.0 {
            let s = disc.sqrt();
            for t in [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)] {
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        }
    }
    ts.push(1.0);
    let at = |t: f64| [a[0] + t * d[0], a[1] + t * d[1]];
    let mut s = 0.0;
    for w in ts.windows(2) {
        let (p, q) = (at(w[0]), at(w[1]));
        let m = at(0.5 * (w[0] + w[1]));
        if m[0] * m[0] + m[1] * m[1] < r * r * (1.0 - 1e-12) {
            s += cross(p, q) / 2.0;
        } else {
            let ang = cross(p, q).atan2(p[0] * q[0] + p[1] * q[1]);
            s += r * r * ang / 2.0;
        }
    }
    s
}

/// Area of a polygon intersected with the disk of radius `r` about the
/// origin.
pub fn polygon_disk_area(poly: &[Pt], r: f64) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    (0..n)
        .map(|i| triangle_disk(poly[i], poly[(i + 1) % n], r))
        .sum::<f64>()
        .abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn areas() {
        let sq = slab_polygon(&[[1.0, 0.0], [0.0, 1.0]], 10.0);
        assert!((polygon_area(&sq) - 4.0).abs() < 1e-14);
        let diamond = slab_polygon(&[[1.0, 1.0], [1.0, -1.0]], 10.0);
        assert!((polygon_area(&diamond) - 2.0).abs() < 1e-14);
        assert!((polygon_disk_area(&diamond, 1.0) - 2.0).abs() < 1e-14);
        // Big square fully covers the disk.
        assert!((polygon_disk_area(&sq, 1.0) - PI).abs() < 1e-12);
        // Strip |x| <= 1/2 inside the unit disk.
        let strip = slab_polygon(&[[2.0, 0.0]], 2.0);
        let exact = 2.0 * (0.5 * (0.75f64).sqrt() + (0.5f64).asin());
        assert!((polygon_disk_area(&strip, 1.0) - exact).abs() < 1e-12);
    }

    #[test]
    fn hull_drops_interior() {
        let h = convex_hull(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.5, 0.0]]);
        assert_eq!(h.len(), 4);
        assert!((polygon_area(&h) - 1.0).abs() < 1e-15);
    }
}

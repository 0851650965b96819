//! Real roots of univariate polynomials on an interval, and of `p` along a
//! line. Isolation recurses on the derivative, so the interval splits into
//! monotone pieces and each piece holds at most one root. The number of
//! roots reported for a factor therefore never exceeds its degree.

use super::PolyNVars;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LineRoots {
    /// Distinct roots in increasing order.
    pub roots: Vec<f64>,
    /// A factor vanished identically on the line or touched zero without
    /// crossing; the count is not generic.
    pub degenerate: bool,
}

impl LineRoots {
    pub fn count(&self) -> usize {
        self.roots.len()
    }
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

fn magnitude(c: &[f64], t: f64) -> f64 {
    let s = t.abs().max(1.0);
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a.abs())
}

fn trim(c: &[f64]) -> &[f64] {
    let big = c.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let mut end = c.len();
    while end > 0 && c[end - 1].abs() <= 1e-14 * big {
        end -= 1;
    }
    &c[..end]
}

fn bisect(c: &[f64], mut a: f64, mut b: f64, fa: f64) -> f64 {
    let neg = fa < 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = horner(c, m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == neg {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn roots_rec(c: &[f64], lo: f64, hi: f64, out: &mut LineRoots) {
    let c = trim(c);
    match c.len() {
        0 => {
            out.degenerate = true;
            return;
        }
        1 => return,
        2 => {
            let t = -c[0] / c[1];
            if t >= lo && t <= hi {
                out.roots.push(t);
            }
            return;
        }
        _ => {}
    }
    let deriv: Vec<f64> = c.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect();
    let mut crit = LineRoots::default();
    roots_rec(&deriv, lo, hi, &mut crit);
    let mut knots = vec![lo];
    knots.extend(crit.roots.iter().copied().filter(|&t| t > lo && t < hi));
    knots.push(hi);
    let tol = 1e-12;
    let mut found: Vec<f64> = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (horner(c, a), horner(c, b));
        let za = fa.abs() <= tol * magnitude(c, a);
        let zb = fb.abs() <= tol * magnitude(c, b);
        if za {
            found.push(a);
        }
        if zb {
            found.push(b);
        }
        if !za && !zb && (fa < 0.0) != (fb < 0.0) {
            found.push(bisect(c, a, b, fa));
        }
    }
    found.sort_by(|a, b| a.total_cmp(b));
    let span = (hi - lo).abs().max(1e-300);
    found.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * span);
    if found.len() > c.len() - 1 {
        out.degenerate = true;
        found.truncate(c.len() - 1);
    }
    // An interior critical point that is also a root is a touching root.
    for &t in &found {
        if crit.roots.iter().any(|&s| (s - t).abs() <= 1e-9 * span) && t > lo && t < hi {
            out.degenerate = true;
        }
    }
    out.roots.extend(found);
}

/// Distinct real roots of `Σ c_i t^i` in `[lo, hi]`.
pub fn real_roots_in(coeffs: &[f64], lo: f64, hi: f64) -> LineRoots {
    let mut out = LineRoots::default();
    if lo > hi {
        return out;
    }
    roots_rec(coeffs, lo, hi, &mut out);
    out.roots.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Roots of `t ↦ p(a + t d)` for `t ∈ [lo, hi]`, merged over factors.
pub fn line_roots(p: &PolyNVars, a: &[f64], d: &[f64], lo: f64, hi: f64) -> LineRoots {
    let mut out = LineRoots::default();
    for c in p.restrict_to_line(a, d) {
        let r = real_roots_in(&c, lo, hi);
        out.degenerate |= r.degenerate;
        out.roots.extend(r.roots);
    }
    out.roots.sort_by(|a, b| a.total_cmp(b));
    let span = (hi - lo).abs().max(1e-300);
    out.roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * span);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_roots() {
        // (t - 0.2)(t - 0.5)(t + 0.7)
        let c = [0.07, -0.39, -0.0, 1.0];
        let r = real_roots_in(&c, -1.0, 1.0);
        assert_eq!(r.count(), 3);
        for (x, y) in r.roots.iter().zip([-0.7, 0.2, 0.5]) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        assert!(!r.degenerate);
        assert_eq!(real_roots_in(&c, 0.0, 0.3).count(), 1);
    }

    #[test]
    fn touching_root_is_flagged() {
        // (t - 0.3)^2
        let r = real_roots_in(&[0.09, -0.6, 1.0], -1.0, 1.0);
        assert!(r.degenerate);
        assert!(r.count() <= 2);
        assert!(real_roots_in(&[1.0, 0.0, 1.0], -5.0, 5.0).roots.is_empty());
        assert!(real_roots_in(&[0.0, 0.0], 0.0, 1.0).degenerate);
    }

    #[test]
    fn chebyshev_many_roots() {
        // T_6(t) = 32t^6 - 48t^4 + 18t^2 - 1
        let r = real_roots_in(&[-1.0, 0.0, 18.0, 0.0, -48.0, 0.0, 32.0], -1.0, 1.0);
        assert_eq!(r.count(), 6);
        for (k, x) in r.roots.iter().rev().enumerate() {
            let want = ((2 * k + 1) as f64 * std::f64::consts::PI / 12.0).cos();
            assert!((x - want).abs() < 1e-10);
        }
    }

    #[test]
    fn line_through_circle() {
        let p = PolyNVars::new(2, vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0), (vec![0, 0], -0.25)]).unwrap();
        let r = line_roots(&p, &[0.0, 0.3], &[1.0, 0.0], -1.0, 1.0);
        assert_eq!(r.count(), 2);
        assert!((r.roots[1] - 0.4).abs() < 1e-12);
        let vertical = PolyNVars::affine(&[1.0, 0.0], 0.0).unwrap();
        assert!(line_roots(&vertical, &[0.0, 0.0], &[0.0, 1.0], -1.0, 1.0).degenerate);
    }
}

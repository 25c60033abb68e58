//! Scalar root bracketing used across the crate.

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Returns the root to within `xtol` (absolute) or the first exact zero hit.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::RootNotBracketed(format!(
            "f({a}) = {fa}, f({b}) = {fb}"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Ok(b)
}

/// Plain bisection for a nondecreasing `f`: smallest `x` in `[lo, hi]` with `f(x) >= target`,
/// resolved until the bracket stops shrinking in floating point.
pub fn bisect_increasing<F>(mut f: F, mut lo: f64, mut hi: f64, target: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Inverse of a nondecreasing `f` on `[lo, hi]` by Newton steps safeguarded with bisection.
///
/// `f` returns the value and derivative. Assumes `f(lo) <= target <= f(hi)`.
pub fn invert_increasing<F>(mut f: F, mut lo: f64, mut hi: f64, target: f64) -> f64
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, d) = f(x);
        if v == target {
            return x;
        }
        if v < target {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - (v - target) / d;
        let step_ok = d > 0.0 && newton > lo && newton < hi;
        let next = if step_ok { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
            || hi - lo <= 2.0 * f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE)
        {
            return next.clamp(lo, hi);
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn brent_rejects_unbracketed() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::RootNotBracketed(_))
        ));
    }

    #[test]
    fn newton_inversion() {
        let x = invert_increasing(|x| (x * x * x, 3.0 * x * x), 0.0, 3.0, 5.0);
        assert!((x - 5f64.cbrt()).abs() < 1e-15);
        // flat derivative falls back to bisection
        let x = invert_increasing(|x| (x, 0.0), 0.0, 1.0, 0.25);
        assert!((x - 0.25).abs() < 1e-15);
    }

    #[test]
    fn bisection_hits_threshold() {
        let x = bisect_increasing(|x| x * x, 0.0, 4.0, 2.0);
        assert!((x - 2f64.sqrt()).abs() < 1e-15);
    }
}

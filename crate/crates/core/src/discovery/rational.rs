//! Best rational approximation with a bounded denominator.

use crate::Coefficient;

/// Closest fraction to `x` with denominator at most `max_den`, from the
/// continued fraction convergents of `x` and the last admissible
/// semiconvergent.
pub fn best_rational(x: f64, max_den: i64) -> Option<Coefficient> {
    if !x.is_finite() || max_den < 1 {
        return None;
    }
    let sign = if x < 0.0 { -1 } else { 1 };
    let y = x.abs();
    if y > (i64::MAX / 2) as f64 {
        return None;
    }
    // h/k convergents
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = y;
    loop {
        let a = r.floor();
        if a > (i64::MAX / 4) as f64 {
            break;
        }
        let a = a as i64;
        let k2 = a.checked_mul(k1).and_then(|v| v.checked_add(k0));
        let h2 = a.checked_mul(h1).and_then(|v| v.checked_add(h0));
        match (h2, k2) {
            (Some(h2), Some(k2)) if k2 <= max_den => {
                (h0, h1, k0, k1) = (h1, h2, k1, k2);
            }
            _ => {
                // largest semiconvergent still inside the bound
                if k1 > 0 {
                    let t = (max_den - k0) / k1;
                    if t > 0 {
                        let (hs, ks) = (t * h1 + h0, t * k1 + k0);
                        let err = |h: i64, k: i64| (y - h as f64 / k as f64).abs();
                        if err(hs, ks) < err(h1, k1) {
                            return Some(Coefficient::new(sign * hs, ks));
                        }
                    }
                }
                break;
            }
        }
        let frac = r - a as f64;
        if frac < 1e-15 * r.max(1.0) {
            break;
        }
        r = 1.0 / frac;
    }
    (k1 > 0).then(|| Coefficient::new(sign * h1, k1))
}

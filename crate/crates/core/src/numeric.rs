//! Scalar root finding and one-dimensional maximization.

use num_traits::Float;

/// Boundary of a monotone predicate on `[lo, hi]`: `pred(lo)` false and
/// `pred(hi)` true. Returns the smallest point found with `pred` true.
pub fn bisect_predicate<T: Float>(mut lo: T, mut hi: T, rel_tol: T, mut pred: impl FnMut(T) -> bool) -> T {
    let two = T::one() + T::one();
    for _ in 0..400 {
        if hi - lo <= rel_tol * hi.abs().max(T::min_positive_value()) {
            break;
        }
        let mid = (lo + hi) / two;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Root of `f` on `[lo, hi]` given a sign change.
pub fn bisect_root<T: Float>(mut lo: T, mut hi: T, abs_tol: T, mut f: impl FnMut(T) -> T) -> Option<T> {
    let two = T::one() + T::one();
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Some(lo);
    }
    if fhi == T::zero() {
        return Some(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return None;
    }
    for _ in 0..400 {
        if hi - lo <= abs_tol {
            break;
        }
        let mid = (lo + hi) / two;
        let fm = f(mid);
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) / two)
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max<T: Float>(mut a: T, mut b: T, abs_tol: T, mut f: impl FnMut(T) -> T) -> (T, T) {
    let inv_phi = (T::from(5.0).unwrap().sqrt() - T::one()) / (T::one() + T::one());
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..400 {
        if (b - a).abs() <= abs_tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

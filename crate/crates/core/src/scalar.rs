//! One-dimensional search helpers used by the solvers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search, stopping
/// once the bracket is narrower than `tol`. Returns the best point seen,
/// including both endpoints.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut best = (lo, f(lo));
    let f_hi = f(hi);
    if f_hi > best.1 {
        best = (hi, f_hi);
    }
    if hi - lo <= tol {
        return best;
    }
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    for (x, fx) in [(x1, f1), (x2, f2)] {
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Largest `x` in `[lo, hi]` with `keep(x)` true, for a predicate that is true
/// on a prefix of the interval. Assumes `keep(lo)`; returns `hi` when it holds
/// everywhere.
pub(crate) fn last_true<P: FnMut(f64) -> bool>(mut keep: P, lo: f64, hi: f64, rel_tol: f64) -> f64 {
    if keep(hi) {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    let tol = rel_tol * (hi - lo).abs().max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if keep(m) {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_interior_and_boundary_maxima() {
        let (x, fx) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8 && fx <= 0.0);
        let (x, _) = golden_max(|x| x, 0.0, 2.0, 1e-10);
        assert_eq!(x, 2.0);
        let (x, _) = golden_max(|x| -x, 0.0, 2.0, 1e-10);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn last_true_locates_threshold() {
        let x = last_true(|x| x * x <= 2.0, 0.0, 4.0, 1e-14);
        assert!((x - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(last_true(|_| true, 0.0, 4.0, 1e-14), 4.0);
    }
}

//! One-dimensional search routines shared by the norm and conjugate code.

/// `(3 - √5) / 2`, the golden-section interior fraction.
const GOLDEN_FRACTION: f64 = 0.381_966_011_250_105_1;

/// Minimizes a unimodal `f` on `[a, b]` by golden-section search.
///
/// Returns the best `(x, f(x))` seen, including both endpoints, so a minimum
/// sitting on the boundary of the bracket is still reported exactly.
pub fn golden_section_min(f: impl Fn(f64) -> f64, a: f64, b: f64, max_iter: usize, x_tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut best = (lo, f(lo));
    let f_hi = f(hi);
    if f_hi < best.1 {
        best = (hi, f_hi);
    }
    let mut x1 = lo + GOLDEN_FRACTION * (hi - lo);
    let mut x2 = hi - GOLDEN_FRACTION * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if hi - lo <= x_tol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + GOLDEN_FRACTION * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = hi - GOLDEN_FRACTION * (hi - lo);
            f2 = f(x2);
        }
    }
    for (x, fx) in [(x1, f1), (x2, f2)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Maximizes a unimodal `f` on `[a, b]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, a: f64, b: f64, max_iter: usize, x_tol: f64) -> (f64, f64) {
    let (x, neg) = golden_section_min(|x| -f(x), a, b, max_iter, x_tol);
    (x, -neg)
}

/// Shrinks `[lo, hi]` around the switch point of a monotone predicate with
/// `pred(lo) == false` and `pred(hi) == true`; returns the final `(lo, hi)`.
pub fn bisect_predicate(
    pred: impl Fn(f64) -> bool,
    mut lo: f64,
    mut hi: f64,
    max_iter: usize,
    rel_tol: f64,
) -> (f64, f64) {
    for _ in 0..max_iter {
        if hi - lo <= rel_tol * hi.abs().max(lo.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

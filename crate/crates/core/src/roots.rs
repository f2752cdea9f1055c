//! Bracketed scalar root finding.

/// Safeguarded Newton iteration for a nondecreasing function on a bracket.
///
/// `f` returns `(value, derivative)`. Requires `f(lo) <= 0 <= f(hi)`. Newton
/// steps that leave the current bracket, or that come from a non-positive
/// derivative, are replaced by bisection. Returns the last bracket on failure.
pub(crate) fn newton_bracketed<F>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    max_iter: usize,
) -> Result<f64, (f64, f64)>
where
    F: Fn(f64) -> (f64, f64),
{
    let rel_tol = 4.0 * f64::EPSILON;
    let mut x = start.clamp(lo, hi);
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        if hi - lo <= rel_tol * scale {
            return Ok(0.5 * (lo + hi));
        }
        let newton = x - fx / dfx;
        let next = if dfx > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= rel_tol * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        x = next;
    }
    Err((lo, hi))
}

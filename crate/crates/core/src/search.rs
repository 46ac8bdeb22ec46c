//! Derivative-free 1-D search on a bracketing interval.

/// Outcome of a golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8; // (sqrt(5) - 1) / 2

/// Minimises a unimodal `f` on `[lo, hi]` by golden-section search.
///
/// Stops once the bracket is narrower than `tol` or after `max_iter`
/// iterations; `converged` tells which. The returned point is the best
/// evaluated one, so the endpoints are included as candidates.
pub fn golden_section_min<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> SearchResult
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let fa = f(a);
    let fb = f(b);
    let mut best = if fa <= fb { (a, fa) } else { (b, fb) };

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);

    let mut iterations = 0;
    while b - a > tol && iterations < max_iter {
        iterations += 1;
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }

    for (x, v) in [(c, fc), (d, fd)] {
        if v < best.1 {
            best = (x, v);
        }
    }
    SearchResult {
        x: best.0,
        value: best.1,
        iterations,
        converged: b - a <= tol,
    }
}

/// Maximises a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> SearchResult
where
    F: FnMut(f64) -> f64,
{
    let r = golden_section_min(|x| -f(x), lo, hi, tol, max_iter);
    SearchResult {
        value: -r.value,
        ..r
    }
}

//! Small scalar helpers shared by the closed-form modules.

/// `1 - exp(-z)` without cancellation for small `z`.
#[inline]
pub fn one_minus_exp_neg(z: f64) -> f64 {
    -(-z).exp_m1()
}

/// Shannon entropy in bits of a discrete distribution; zero weights contribute nothing.
pub fn entropy_bits<I: IntoIterator<Item = f64>>(probabilities: I) -> f64 {
    probabilities.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// Outcome of a golden-section maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenMax {
    pub x: f64,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol`. Returns the best point seen,
/// which is never worse than either interior probe.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> GoldenMax
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while (b - a) > tol && iterations < max_iter {
        iterations += 1;
        // `>=` keeps the left bracket on ties, biasing toward smaller x.
        if fc >= fd {
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
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    GoldenMax { x, value, converged: (b - a) <= tol, iterations }
}

/// Bisection for a root of `f` on a bracket with a sign change.
///
/// Returns `None` when `f(lo)` and `f(hi)` have the same strict sign.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tol * mid.abs().max(1.0) {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}

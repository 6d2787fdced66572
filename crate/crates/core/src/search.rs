//! Scalar root bracketing and low-dimensional optimisation helpers.

/// Inverse golden ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Bisection on a predicate that holds at `lo` and fails at `hi`.
///
/// Returns `(last_true, first_false)` with `first_false - last_true <= tol`.
pub fn bisect_predicate<P: FnMut(f64) -> bool>(mut lo: f64, mut hi: f64, tol: f64, mut holds: P) -> (f64, f64) {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Golden-section minimisation of a unimodal `f` on `[a, b]`.
///
/// Returns `(argmin, min)`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut a: f64, mut b: f64, tol: f64, mut f: F) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
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
    let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    let fa = f(a);
    let fb = f(b);
    [(x, fx), (a, fa), (b, fb)].into_iter().fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Axis-aligned box in two variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Box2 {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

/// Grid maximisation of `f` over a box followed by repeated zooming around
/// the incumbent. The zoom window never leaves the original box.
///
/// Returns `(x, y, max)`; points where `f` is NaN are ignored.
pub fn zoom_maximize<F: FnMut(f64, f64) -> f64>(bx: Box2, n: usize, levels: usize, mut f: F) -> (f64, f64, f64) {
    let mut best = (bx.x.0, bx.y.0, f64::NEG_INFINITY);
    let mut window = bx;
    for _ in 0..=levels {
        let dx = (window.x.1 - window.x.0) / n as f64;
        let dy = (window.y.1 - window.y.0) / n as f64;
        for i in 0..=n {
            let x = window.x.0 + dx * i as f64;
            for j in 0..=n {
                let y = window.y.0 + dy * j as f64;
                let v = f(x, y);
                if v > best.2 {
                    best = (x, y, v);
                }
            }
        }
        window = Box2 {
            x: ((best.0 - 2.0 * dx).max(bx.x.0), (best.0 + 2.0 * dx).min(bx.x.1)),
            y: ((best.1 - 2.0 * dy).max(bx.y.0), (best.1 + 2.0 * dy).min(bx.y.1)),
        };
    }
    best
}

/// One-dimensional counterpart of [`zoom_maximize`].
pub fn zoom_maximize_1d<F: FnMut(f64) -> f64>(range: (f64, f64), n: usize, levels: usize, mut f: F) -> (f64, f64) {
    let (x, _, v) = zoom_maximize(Box2 { x: range, y: (0.0, 0.0) }, n, levels, |x, _| f(x));
    (x, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt2() {
        let (lo, hi) = bisect_predicate(0.0, 2.0, 1e-12, |x| x * x <= 2.0);
        assert!(hi - lo <= 1e-12);
        assert!((lo - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn golden_quadratic() {
        let (x, v) = golden_min(-3.0, 5.0, 1e-10, |x| (x - 1.25).powi(2) + 0.5);
        assert!((x - 1.25).abs() < 1e-8);
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zoom_finds_interior_and_boundary_max() {
        let (x, y, v) =
            zoom_maximize(Box2 { x: (0.0, 1.0), y: (0.0, 1.0) }, 40, 12, |x, y| -(x - 0.3).powi(2) - (y - 0.77).powi(2));
        assert!((x - 0.3).abs() < 1e-9 && (y - 0.77).abs() < 1e-9 && v.abs() < 1e-15);
        let (x, v) = zoom_maximize_1d((0.0, 1.0), 50, 10, |x| x);
        assert_eq!(x, 1.0);
        assert_eq!(v, 1.0);
    }
}

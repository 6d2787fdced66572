//! One-dimensional quadrature rules and composite tensor grids.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on `[0, 1]` with `cells` equal cells.
pub fn composite_unit(cells: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let h = 1.0 / cells as f64;
    let mut xs = Vec::with_capacity(cells * order);
    let mut ws = Vec::with_capacity(cells * order);
    for c in 0..cells {
        let a = c as f64 * h;
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(a + 0.5 * h * (x + 1.0));
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_on(a: f64, b: f64, order: usize) -> impl Iterator<Item = (f64, f64)> {
    let (gx, gw) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gx.into_iter().zip(gw).map(move |(x, w)| (mid + half * x, half * w))
}

// Kronrod 15-point extension of the 7-point Gauss rule.
const GK_XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const GK_WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * GK_WK[7];
    let mut gauss = fc * GK_WG[3];
    for j in 0..7 {
        let dx = h * GK_XK[j];
        let s = f(c - dx) + f(c + dx);
        kron += GK_WK[j] * s;
        if j % 2 == 1 {
            gauss += GK_WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration on `[a, b]` to absolute tolerance `tol`.
///
/// Returns the estimate and the accumulated error estimate.
pub fn adaptive_gk<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const MAX_DEPTH: u32 = 40;
    fn rec<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, whole: (f64, f64), depth: u32) -> (f64, f64) {
        if whole.1 <= tol || depth >= MAX_DEPTH {
            return whole;
        }
        let m = 0.5 * (a + b);
        let left = gk15(f, a, m);
        let right = gk15(f, m, b);
        let l = rec(f, a, m, 0.5 * tol, left, depth + 1);
        let r = rec(f, m, b, 0.5 * tol, right, depth + 1);
        (l.0 + r.0, l.1 + r.1)
    }
    let whole = gk15(&mut f, a, b);
    rec(&mut f, a, b, tol, whole, 0)
}

/// Tanh–sinh (double exponential) quadrature on `[0, 1]`.
///
/// Robust to integrable algebraic endpoint singularities; nodes that round
/// onto an endpoint are skipped. Levels halve the step until successive
/// estimates agree to `tol` (relative).
pub fn tanh_sinh_unit<F: FnMut(f64) -> f64>(mut f: F, tol: f64) -> f64 {
    const MAX_LEVEL: u32 = 12;
    const T_MAX: f64 = 4.0;
    let node = |t: f64| -> (f64, f64) {
        // x = 1 / (1 + exp(-π sinh t)); w = dx/dt
        let u = PI * t.sinh();
        let e = (-u.abs()).exp();
        let small = e / (1.0 + e);
        let x = if u >= 0.0 { 1.0 - small } else { small };
        let w = PI * t.cosh() * e / ((1.0 + e) * (1.0 + e));
        (x, w)
    };
    let mut h = 0.5;
    let mut sum = {
        let mut s = 0.0;
        let mut k = -((T_MAX / h) as i64);
        while (k as f64) * h <= T_MAX {
            let (x, w) = node(k as f64 * h);
            if x > 0.0 && x < 1.0 && w > 0.0 {
                s += w * f(x);
            }
            k += 1;
        }
        s
    };
    let mut estimate = sum * h;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        let mut s = 0.0;
        let mut k = -((T_MAX / h) as i64);
        if k % 2 == 0 {
            k += 1;
        }
        while (k as f64) * h <= T_MAX {
            let (x, w) = node(k as f64 * h);
            if x > 0.0 && x < 1.0 && w > 0.0 {
                s += w * f(x);
            }
            k += 2;
        }
        sum += s;
        let next = sum * h;
        let done = (next - estimate).abs() <= tol * next.abs().max(1e-300);
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

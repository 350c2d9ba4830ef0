use serde::{Deserialize, Serialize};

const GOLDEN: f64 = 1.618_033_988_749_895;
const CGOLD: f64 = 0.381_966_011_250_105_1;
const MAX_EXPANSIONS: usize = 60;
const MAX_BRENT: usize = 200;

/// Result of a one-dimensional maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearch1d {
    pub argmax: f64,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Maximizes `f` on `[lo, hi]` starting from `start`.
///
/// Walks uphill from `start` with geometrically growing steps until the
/// objective drops or a bound is hit, then runs Brent's parabolic/golden
/// search inside the bracket. Only a local maximum is guaranteed; callers
/// wanting more use several starts. Non-finite values count as `−∞`.
pub fn bracket_and_maximize<F: FnMut(f64) -> f64>(
    mut f: F,
    start: f64,
    lo: f64,
    hi: f64,
    step: f64,
    tol: f64,
) -> LineSearch1d {
    let evals = std::cell::Cell::new(0usize);
    let mut eval = |x: f64| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let x0 = start.clamp(lo, hi);
    let f0 = eval(x0);

    // choose the uphill direction
    let right = (x0 + step).min(hi);
    let left = (x0 - step).max(lo);
    let fr = if right > x0 { eval(right) } else { f64::NEG_INFINITY };
    let (mut a, mut b, mut fb, dir) = if fr > f0 {
        (x0, right, fr, 1.0)
    } else {
        let fl = if left < x0 { eval(left) } else { f64::NEG_INFINITY };
        if fl > f0 {
            (x0, left, fl, -1.0)
        } else {
            // x0 already beats both neighbours
            let (a, b) = (left, right);
            let res = brent(&mut eval, a, b, x0, f0, tol);
            return res.with_evals(evals.get());
        }
    };
    let mut c;
    let mut width = (b - a).abs();
    let mut expansions = 0;
    loop {
        width *= GOLDEN;
        c = (b + dir * width).clamp(lo, hi);
        if c == b {
            // bound reached while still climbing
            let (l, h) = if dir > 0.0 { (a, b) } else { (b, a) };
            let res = brent(&mut eval, l.min(h), l.max(h), b, fb, tol);
            return res.with_evals(evals.get());
        }
        let fc = eval(c);
        if fc <= fb {
            break;
        }
        a = b;
        b = c;
        fb = fc;
        expansions += 1;
        if expansions >= MAX_EXPANSIONS {
            return LineSearch1d { argmax: b, value: fb, evaluations: evals.get(), converged: false };
        }
    }
    let (l, h) = if a < c { (a, c) } else { (c, a) };
    let res = brent(&mut eval, l, h, b, fb, tol);
    res.with_evals(evals.get())
}

impl LineSearch1d {
    fn with_evals(mut self, evals: usize) -> Self {
        self.evaluations = evals;
        self
    }
}

/// Brent's method for the maximum of `f` on `[a, b]` from an interior point
/// `x` with known value `fx`.
fn brent<F: FnMut(f64) -> f64>(f: &mut F, mut a: f64, mut b: f64, x0: f64, fx0: f64, tol: f64) -> LineSearch1d {
    // minimize g = −f
    let (mut x, mut w, mut v) = (x0, x0, x0);
    let (mut gx, mut gw, mut gv) = (-fx0, -fx0, -fx0);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..MAX_BRENT {
        let m = 0.5 * (a + b);
        let tol1 = 1e-8 * x.abs() + tol;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return LineSearch1d { argmax: x, value: -gx, evaluations: 0, converged: true };
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (gx - gv);
            let mut q = (x - v) * (gx - gw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if m >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= m { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let gu = -f(u);
        if gu <= gx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, gv) = (w, gw);
            (w, gw) = (x, gx);
            (x, gx) = (u, gu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if gu <= gw || w == x {
                (v, gv) = (w, gw);
                (w, gw) = (u, gu);
            } else if gu <= gv || v == x || v == w {
                (v, gv) = (u, gu);
            }
        }
    }
    LineSearch1d { argmax: x, value: -gx, evaluations: 0, converged: false }
}

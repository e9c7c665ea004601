//! Float fallbacks for the few quantities without closed forms.

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `∫_a^b f` for `0 < a < b ≤ ∞` via the substitution `s = e^y`.
///
/// For `b = ∞` the caller supplies the decay exponent `q > 0` with
/// `f(s) ≈ K·s^{-1-q}`, used to cut the range and add the remainder.
pub fn integrate_log(f: &dyn Fn(f64) -> f64, a: f64, b: f64, decay: Option<f64>) -> f64 {
    let g = |y: f64| {
        let s = y.exp();
        f(s) * s
    };
    let ya = a.ln();
    match (b.is_finite(), decay) {
        (true, _) => integrate(&g, ya, b.ln(), 1e-13 * (1.0 + f(a).abs() * a)),
        (false, Some(q)) => {
            let yb = ya + (40.0 / q).max(10.0);
            let body = integrate(&g, ya, yb, 1e-13);
            let sb = yb.exp();
            body + f(sb) * sb / q
        }
        (false, None) => f64::INFINITY,
    }
}

/// Approximate supremum of a continuous `f` on `[lo, hi]` (log-spaced samples
/// when `lo > 0`, then golden-section refinement around the best sample).
pub fn sup_sampled(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, samples: usize) -> f64 {
    let samples = samples.max(3);
    let log = lo > 0.0 && hi / lo > 100.0;
    let point = |k: usize| {
        let x = k as f64 / (samples - 1) as f64;
        if log {
            (lo.ln() + x * (hi.ln() - lo.ln())).exp()
        } else {
            lo + x * (hi - lo)
        }
    };
    let mut best_k = 0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..samples {
        let v = f(point(k));
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let a = point(best_k.saturating_sub(1));
    let b = point((best_k + 1).min(samples - 1));
    best.max(golden_max(f, a, b, 80))
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// Sign changes of `f` on `(lo, hi)`, each located by bisection.
pub fn roots(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let log = lo > 0.0 && hi / lo > 100.0;
    let point = |k: usize| {
        let x = k as f64 / samples as f64;
        if log {
            (lo.ln() + x * (hi.ln() - lo.ln())).exp()
        } else {
            lo + x * (hi - lo)
        }
    };
    let mut out = Vec::new();
    let mut prev_x = point(0);
    let mut prev = f(prev_x);
    for k in 1..=samples {
        let x = point(k);
        let v = f(x);
        if prev == 0.0 && k > 1 {
            out.push(prev_x);
        } else if prev * v < 0.0 {
            let (mut a, mut b, mut fa) = (prev_x, x, prev);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 || (b - a) <= f64::EPSILON * m.abs() {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev_x = x;
        prev = v;
    }
    out
}

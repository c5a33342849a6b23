//! Golden-section minimization of noise budgets over `ln nbar`.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt 5 - 1)/2

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`,
/// stopping once the bracket is narrower than `xtol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> Minimum {
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    while (b - a) > xtol {
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
        evaluations += 1;
    }
    let (x, fx) = if fc < fd { (c, fc) } else { (d, fd) };
    Minimum { x, fx, evaluations }
}

/// Number of log-spaced samples used to bracket the minimum.
pub const SCAN_POINTS: usize = 129;

/// Minimizes `f(nbar)` over `[lo, hi]` (both > 0) in the variable `ln nbar`.
///
/// A coarse scan first checks that the sampled values fall and then rise
/// (non-finite values count as `+inf`); a second local minimum or a minimum on
/// a bound is reported as [`Error::BracketFailure`]. Golden-section search then
/// refines inside the two neighbouring scan cells to `ln_tol` in `ln nbar`.
pub fn minimize_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, ln_tol: f64) -> Result<Minimum> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "optimization bounds must satisfy 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    let g = |u: f64| {
        let v = f(u.exp());
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let (ulo, uhi) = (lo.ln(), hi.ln());
    let step = (uhi - ulo) / (SCAN_POINTS - 1) as f64;
    let samples: Vec<f64> = (0..SCAN_POINTS).map(|k| g(ulo + k as f64 * step)).collect();
    let k_min = samples
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(k, _)| k)
        .expect("non-empty scan");
    if !samples[k_min].is_finite() {
        return Err(Error::BracketFailure("objective is not finite anywhere in bounds".into()));
    }
    if k_min == 0 || k_min == SCAN_POINTS - 1 {
        return Err(Error::BracketFailure(format!(
            "minimum lies on the bound nbar = {:e}",
            (ulo + k_min as f64 * step).exp()
        )));
    }
    let slack = |v: f64| 1e-12 * v.abs();
    for k in 1..=k_min {
        if samples[k] > samples[k - 1] + slack(samples[k - 1]) {
            return Err(Error::BracketFailure(format!(
                "objective rises before the minimum near nbar = {:e}; not unimodal",
                (ulo + k as f64 * step).exp()
            )));
        }
    }
    for k in k_min + 1..SCAN_POINTS {
        if samples[k] + slack(samples[k]) < samples[k - 1] {
            return Err(Error::BracketFailure(format!(
                "objective falls after the minimum near nbar = {:e}; not unimodal",
                (ulo + k as f64 * step).exp()
            )));
        }
    }
    let a = ulo + (k_min - 1) as f64 * step;
    let b = ulo + (k_min + 1) as f64 * step;
    let m = golden_section(g, a, b, ln_tol);
    Ok(Minimum {
        x: m.x.exp(),
        fx: m.fx,
        evaluations: m.evaluations + SCAN_POINTS,
    })
}

//! Bracketed scalar root finding and unimodal maximization.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_ROOT_ITERATIONS: usize = 200;
pub const MAX_GOLDEN_ITERATIONS: usize = 200;

/// Finds a zero of `func` in `[lo, hi]`, where `func(lo)` and `func(hi)`
/// have opposite signs.
///
/// Illinois-style false position steps alternate with bisection whenever
/// a secant step fails to halve the bracket, so the width shrinks at least
/// geometrically. Returns the bracket endpoint with the smaller `|func|`
/// once the bracket is narrower than `tol` (or cannot be split further).
pub fn find_root_bracketed<T, F>(mut func: F, lo: T, hi: T, tol: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if !(tol > T::zero()) {
        return Err(Error::InvalidTolerance(tol.as_f64()));
    }
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = eval(&mut func, lo)?;
    let mut f_hi = eval(&mut func, hi)?;
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: f_lo.as_f64(),
            f_hi: f_hi.as_f64(),
        });
    }

    let half = T::lit(0.5);
    let mut use_secant = true;
    // secant weights: function values, halved when one endpoint goes stale
    let (mut w_lo, mut w_hi) = (f_lo, f_hi);
    // endpoint moved on the previous step: 1 = lo, -1 = hi
    let mut last_moved = 0i8;
    for _ in 0..MAX_ROOT_ITERATIONS {
        let width = hi - lo;
        let mid = lo + half * width;
        if width <= tol || mid <= lo || mid >= hi {
            return Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi });
        }
        let mut x = mid;
        if use_secant {
            let s = lo - w_lo * width / (w_hi - w_lo);
            if s > lo && s < hi {
                x = s;
            }
        }
        let fx = eval(&mut func, x)?;
        if fx == T::zero() {
            return Ok(x);
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
            w_lo = fx;
            if last_moved == 1 {
                w_hi = w_hi * half;
            }
            last_moved = 1;
        } else {
            hi = x;
            f_hi = fx;
            w_hi = fx;
            if last_moved == -1 {
                w_lo = w_lo * half;
            }
            last_moved = -1;
        }
        use_secant = hi - lo <= half * width;
    }
    Err(Error::MaxIterations(MAX_ROOT_ITERATIONS))
}

fn eval<T: Scalar, F: FnMut(T) -> Result<T>>(func: &mut F, x: T) -> Result<T> {
    let v = func(x)?;
    if v.is_nan() {
        Err(Error::NonFinite(x.as_f64()))
    } else {
        Ok(v)
    }
}

/// Golden-section search for the maximizer of a unimodal objective on `[a, b]`.
///
/// The objective is supplied through its increment: `delta(x0, x1)` returns
/// `F(x1) - F(x0)`. This lets callers compute differences more accurately
/// than subtracting two rounded values; [`golden_section_max`] wraps a plain
/// objective. Stops when the bracket is narrower than `rel_tol * (b - a)`
/// or the two interior points are no longer distinct in `T`.
pub fn golden_section_max_by<T, D>(mut delta: D, a: T, b: T, rel_tol: T) -> Result<T>
where
    T: Scalar,
    D: FnMut(T, T) -> Result<T>,
{
    if !(rel_tol > T::zero()) {
        return Err(Error::InvalidTolerance(rel_tol.as_f64()));
    }
    if !(a < b) {
        return Err(Error::InvalidRange(format!(
            "golden section needs a < b, got [{a}, {b}]"
        )));
    }
    // 1/phi and 1 - 1/phi
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let inv_phi2 = T::one() - inv_phi;
    let target = rel_tol * (b - a);

    let (mut lo, mut hi) = (a, b);
    let mut c = lo + inv_phi2 * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    for _ in 0..MAX_GOLDEN_ITERATIONS {
        if hi - lo <= target || !(c < d) {
            return Ok(lo + (hi - lo) * T::lit(0.5));
        }
        let step = delta(c, d)?;
        if step.is_nan() {
            return Err(Error::NonFinite(c.as_f64()));
        }
        if step > T::zero() {
            // F(d) > F(c): maximizer lies in [c, hi]
            lo = c;
            c = d;
            d = lo + inv_phi * (hi - lo);
        } else {
            hi = d;
            d = c;
            c = lo + inv_phi2 * (hi - lo);
        }
    }
    if hi - lo <= target || !(c < d) {
        Ok(lo + (hi - lo) * T::lit(0.5))
    } else {
        Err(Error::MaxIterations(MAX_GOLDEN_ITERATIONS))
    }
}

/// Golden-section maximization of a plain objective.
pub fn golden_section_max<T, F>(mut objective: F, a: T, b: T, rel_tol: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    golden_section_max_by(|x0, x1| Ok(objective(x1)? - objective(x0)?), a, b, rel_tol)
}

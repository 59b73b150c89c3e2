//! Objective, bracket function, fixed-point series and stationarity function.
//!
//! With `y = phi(x) = 1/f(x)`:
//!
//! * `h(x) = f(x) - x f'(x)`
//! * `S(y) = sum_{n>=0} y^n / ((n+1)(n+2)) = ((1-y) ln(1-y) + y) / y^2`
//! * `U(x) = x ln(1 - phi(x))`, so `exp(U)` is the group no-default probability
//! * `g(x) = (1 - phi) ln(1 - phi) - x phi'(x)`, with `sign(g) = sign(U')`
//!
//! These satisfy `g = phi^2 (S - h)`, so the maximizer is the fixed point
//! `h(x*) = S(x*)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::FamilySpec;
use crate::scalar::Scalar;

pub const DEFAULT_SERIES_TOL: f64 = 1e-13;
pub const SERIES_TERM_CAP: usize = 1_000_000;
/// Arguments above `1 - NEAR_UNITY` are outside certified territory.
pub const NEAR_UNITY: f64 = 1e-12;

/// Truncated evaluation of `S(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesResult<T> {
    pub value: T,
    pub terms_used: usize,
    /// Upper bound on the discarded tail.
    pub truncation_bound: T,
}

/// Per-member default probability `1/f(x)`.
pub fn phi<T: Scalar>(fam: &FamilySpec<T>, x: T) -> Result<T> {
    let f = fam.eval_f(x)?;
    admissible(x, f)?;
    Ok(f.recip())
}

fn admissible<T: Scalar>(x: T, f: T) -> Result<()> {
    if f > T::one() {
        Ok(())
    } else {
        Err(Error::Inadmissible {
            x: x.as_f64(),
            f: f.as_f64(),
        })
    }
}

/// `phi'(x) = -f'/f^2`.
pub fn phi_prime<T: Scalar>(fam: &FamilySpec<T>, x: T) -> Result<T> {
    let (f, f1, _) = fam.eval_all(x)?;
    admissible(x, f)?;
    Ok(-f1 / (f * f))
}

pub fn h<T: Scalar>(fam: &FamilySpec<T>, x: T) -> Result<T> {
    let (f, f1, _) = fam.eval_all(x)?;
    Ok(f - x * f1)
}

fn check_series_arg<T: Scalar>(y: T) -> Result<()> {
    if !(y >= T::zero() && y < T::one()) {
        return Err(Error::SeriesArgument(y.as_f64()));
    }
    if y > T::one() - T::lit(NEAR_UNITY) {
        return Err(Error::SeriesNearUnity(y.as_f64()));
    }
    Ok(())
}

/// Sums `y^n / ((n+1)(n+2))` until the geometric tail bound
/// `y^(N+1) / ((N+2)(N+3)(1-y))` drops to `tol`.
pub fn series_s<T: Scalar>(y: T, tol: T) -> Result<SeriesResult<T>> {
    check_series_arg(y)?;
    if !(tol > T::zero()) {
        return Err(Error::InvalidTolerance(tol.as_f64()));
    }
    let one = T::one();
    let one_minus_y = one - y;
    let mut sum = T::zero();
    let mut pow = one; // y^n
    for n in 0..SERIES_TERM_CAP {
        let n1 = T::lit((n + 1) as f64);
        let n2 = T::lit((n + 2) as f64);
        sum = sum + pow / (n1 * n2);
        pow = pow * y;
        let n3 = T::lit((n + 3) as f64);
        let bound = pow / (n2 * n3 * one_minus_y);
        if bound <= tol {
            return Ok(SeriesResult {
                value: sum,
                terms_used: n + 1,
                truncation_bound: bound,
            });
        }
    }
    Err(Error::SeriesTermCap {
        terms: SERIES_TERM_CAP,
    })
}

/// Closed form of `S(y)`; a short Taylor polynomial near 0 avoids the
/// cancellation in `(1-y) ln(1-y) + y`.
pub fn s_closed_form<T: Scalar>(y: T) -> Result<T> {
    check_series_arg(y)?;
    if y < T::lit(1e-4) {
        let c = [0.5, 1.0 / 6.0, 1.0 / 12.0, 1.0 / 20.0, 1.0 / 30.0];
        return Ok(c
            .iter()
            .rev()
            .fold(T::zero(), |acc, &ci| acc * y + T::lit(ci)));
    }
    let one = T::one();
    Ok(((one - y) * (-y).ln_1p() + y) / (y * y))
}

/// `S(x) = S(phi(x))`: the series, or the closed form once the series would
/// exceed the term cap. `tol` is floored at machine epsilon.
pub fn s_of_x<T: Scalar>(fam: &FamilySpec<T>, x: T, tol: T) -> Result<T> {
    let y = phi(fam, x)?;
    match series_s(y, tol.max(T::epsilon())) {
        Ok(r) => Ok(r.value),
        Err(Error::SeriesTermCap { .. }) => s_closed_form(y),
        Err(e) => Err(e),
    }
}

/// `U(x) = x ln(1 - phi(x))`.
pub fn objective_u<T: Scalar>(fam: &FamilySpec<T>, x: T) -> Result<T> {
    let y = phi(fam, x)?;
    Ok(x * (-y).ln_1p())
}

/// `U(x1) - U(x0)` without differencing two rounded objective values:
///
/// `U(x1) - U(x0) = (x1 - x0) ln(1 - phi1) + x0 ln1p((phi0 - phi1) / (1 - phi0))`
/// with `phi0 - phi1 = (f1 - f0) / (f0 f1)` from the family's accurate increment.
pub fn objective_u_increment<T: Scalar>(fam: &FamilySpec<T>, x0: T, x1: T) -> Result<T> {
    let f0 = fam.eval_f(x0)?;
    let f1 = fam.eval_f(x1)?;
    admissible(x0, f0)?;
    admissible(x1, f1)?;
    let df = fam.eval_f_increment(x0, x1)?;
    let phi0 = f0.recip();
    let phi1 = f1.recip();
    let dphi = df / (f0 * f1);
    let log_ratio = (dphi / (T::one() - phi0)).ln_1p();
    Ok((x1 - x0) * (-phi1).ln_1p() + x0 * log_ratio)
}

/// Stationarity function; its root inside a certified bracket is the maximizer.
pub fn g<T: Scalar>(fam: &FamilySpec<T>, x: T) -> Result<T> {
    let (f, f1, _) = fam.eval_all(x)?;
    admissible(x, f)?;
    let y = f.recip();
    let dphi = -f1 / (f * f);
    Ok((T::one() - y) * (-y).ln_1p() - x * dphi)
}

/// Principal branch of the Lambert W function for `z >= 0`.
pub fn lambert_w<T: Scalar>(z: T) -> Result<T> {
    if !(z >= T::zero()) || z.is_infinite() {
        return Err(Error::LambertDomain(z.as_f64()));
    }
    if z == T::zero() {
        return Ok(T::zero());
    }
    let one = T::one();
    let resid = |w: T| w * w.exp() - z;
    let mut w = z.ln_1p();
    let mut r = resid(w);
    for _ in 0..100 {
        let step = r / (w.exp() * (w + one));
        // damping: halve until the residual stops growing
        let mut lambda = one;
        let mut next = w - step;
        let mut r_next = resid(next);
        while r_next.abs() > r.abs() && lambda > T::lit(1e-4) {
            lambda = lambda * T::lit(0.5);
            next = w - lambda * step;
            r_next = resid(next);
        }
        let converged = (next - w).abs() <= T::epsilon() * T::lit(4.0) * next.abs().max(one);
        w = next;
        r = r_next;
        if converged || r == T::zero() {
            break;
        }
    }
    Ok(w)
}

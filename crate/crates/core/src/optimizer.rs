//! Maximizer location inside a certified bracket, parameter sweeps and
//! interval narrowing over a parameter grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, DEFAULT_SERIES_TOL};
use crate::error::{Error, Result};
use crate::families::{family_info, make_family, FamilySpec};
use crate::roots::{find_root_bracketed, golden_section_max_by};
use crate::scalar::Scalar;
use crate::verifier::{verify_conditions, ScanConfig, TheoremCertificate};

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
/// Golden-section stopping width relative to the bracket.
pub const GOLDEN_REL_TOL: f64 = 1e-10;
/// Spread between the three maximizer estimates treated as a defect.
pub const MAX_METHOD_SPREAD: f64 = 1e-4;
pub const MIN_GROUP: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Optimum<T> {
    /// Root of the stationarity function `g`.
    pub x_star: T,
    /// Better integer neighbour of `x_star` under the no-default probability.
    pub k_star: u64,
    /// `x_star` rounded half away from zero.
    pub k_star_rounded: u64,
    pub p_no_default: T,
    /// Largest pairwise gap between the three estimates.
    pub method_agreement: T,
    /// Root of `h - S`.
    pub x_star_fixed_point: T,
    /// Golden-section maximizer of `U`.
    pub x_star_golden: T,
    pub a: T,
    pub b: T,
    /// `x_star` is below the smallest group size, so `k_star` was floored at 2.
    pub boundary: bool,
    /// `k_star != k_star_rounded`.
    pub rounding_differs: bool,
}

/// Locates the maximizer of `(1 - phi(x))^x` in the certified bracket by
/// three independent routes and reconciles them.
pub fn maximize<T: Scalar>(
    fam: &FamilySpec<T>,
    cert: &TheoremCertificate<T>,
    tol: T,
) -> Result<Optimum<T>> {
    let (a, b) = cert.bracket().ok_or(Error::NotCertified)?;
    let g_a = analysis::g(fam, a)?;
    let g_b = analysis::g(fam, b)?;
    if !(g_a > T::zero() && g_b < T::zero()) {
        return Err(Error::NotAMaximum {
            a: a.as_f64(),
            b: b.as_f64(),
            g_a: g_a.as_f64(),
            g_b: g_b.as_f64(),
        });
    }

    let by_g = find_root_bracketed(|x| analysis::g(fam, x), a, b, tol)?;

    let series_tol = T::lit(DEFAULT_SERIES_TOL);
    let fixed_point =
        |x: T| -> Result<T> { Ok(analysis::h(fam, x)? - analysis::s_of_x(fam, x, series_tol)?) };
    // S is undefined where phi rounds to within 1e-12 of 1 (bracket starting at a domain floor)
    let mut lo = a;
    for nudge in [1e-12, 1e-9, 1e-6] {
        if fixed_point(lo).is_ok() {
            break;
        }
        lo = a + (b - a) * T::lit(nudge);
    }
    let by_fixed_point = find_root_bracketed(fixed_point, lo, b, tol)?;

    let by_golden = golden_section_max_by(
        |x0, x1| analysis::objective_u_increment(fam, x0, x1),
        a,
        b,
        T::lit(GOLDEN_REL_TOL),
    )?;

    let spread = (by_g - by_fixed_point)
        .abs()
        .max((by_g - by_golden).abs())
        .max((by_fixed_point - by_golden).abs());
    if spread > T::lit(MAX_METHOD_SPREAD) {
        return Err(Error::MethodsDisagree {
            spread: spread.as_f64(),
            by_g: by_g.as_f64(),
            by_fixed_point: by_fixed_point.as_f64(),
            by_golden: by_golden.as_f64(),
        });
    }

    let (k_star, p_no_default, boundary) = integer_choice(fam, by_g)?;
    let k_star_rounded = by_g.round().to_u64().unwrap_or(0);
    Ok(Optimum {
        x_star: by_g,
        k_star,
        k_star_rounded,
        p_no_default,
        method_agreement: spread,
        x_star_fixed_point: by_fixed_point,
        x_star_golden: by_golden,
        a,
        b,
        boundary,
        rounding_differs: k_star != k_star_rounded,
    })
}

/// Certifies with the default scan, then maximizes.
pub fn optimize_family<T: Scalar>(
    fam: &FamilySpec<T>,
) -> Result<(TheoremCertificate<T>, Optimum<T>)> {
    let cert = verify_conditions(fam, &ScanConfig::for_family(fam))?;
    let opt = maximize(fam, &cert, T::lit(DEFAULT_ROOT_TOL))?;
    Ok((cert, opt))
}

/// `(1 - phi(k))^k` for an integer group size.
pub(crate) fn group_probability<T: Scalar>(fam: &FamilySpec<T>, k: u64) -> Result<T> {
    let kx = T::lit(k as f64);
    Ok(analysis::objective_u(fam, kx)?.exp())
}

fn integer_choice<T: Scalar>(fam: &FamilySpec<T>, x_star: T) -> Result<(u64, T, bool)> {
    let smallest = (fam.x_min().ceil().to_u64().unwrap_or(MIN_GROUP)).max(MIN_GROUP);
    let lo = x_star.floor().to_u64().unwrap_or(0);
    let candidates: Vec<u64> = [lo, lo + 1]
        .into_iter()
        .filter(|&k| k >= smallest)
        .collect();
    if candidates.is_empty() || x_star < T::lit(MIN_GROUP as f64) {
        return Ok((smallest, group_probability(fam, smallest)?, true));
    }
    let mut best = (candidates[0], group_probability(fam, candidates[0])?);
    for &k in &candidates[1..] {
        let p = group_probability(fam, k)?;
        if p > best.1 {
            best = (k, p);
        }
    }
    Ok((best.0, best.1, false))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SweepRecord<T> {
    pub param_value: T,
    pub x_star: Option<T>,
    pub k_star: Option<u64>,
    pub k_star_rounded: Option<u64>,
    pub p_no_default: Option<T>,
    pub certified: bool,
    pub a: Option<T>,
    pub b: Option<T>,
    pub method_agreement: Option<T>,
}

/// Grid `lo, lo + step, ..., <= hi`. When `step` is a decimal fraction
/// (`1/step` integral) values are formed as `n / (1/step)` so that
/// e.g. 0.539 is the nearest double to 0.539 rather than an accumulated sum.
pub fn parameter_grid<T: Scalar>(lo: T, hi: T, step: T) -> Result<Vec<T>> {
    if !(step > T::zero()) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidRange(format!(
            "grid needs finite bounds and step > 0, got [{lo}, {hi}] step {step}"
        )));
    }
    if lo > hi {
        return Err(Error::InvalidRange(format!("lo = {lo} exceeds hi = {hi}")));
    }
    let slack = T::lit(1e-9);
    let count = ((hi - lo) / step + slack).floor().to_usize().unwrap_or(0) + 1;
    Ok(match decimal_scale(step) {
        Some(n) if ((lo * n) - (lo * n).round()).abs() < slack => {
            let start = (lo * n).round();
            (0..count).map(|i| (start + T::lit(i as f64)) / n).collect()
        }
        _ => (0..count).map(|i| lo + step * T::lit(i as f64)).collect(),
    })
}

fn decimal_scale<T: Scalar>(step: T) -> Option<T> {
    let n = step.recip();
    ((n - n.round()).abs() < T::lit(1e-9) * n.max(T::one())).then(|| n.round())
}

/// Multiples of `step` lying in `[lo, hi]`.
fn multiples_in<T: Scalar>(lo: T, hi: T, step: T) -> Result<Vec<T>> {
    if !(step > T::zero()) || !(lo < hi) {
        return Err(Error::InvalidRange(format!(
            "need lo < hi and step > 0, got [{lo}, {hi}] step {step}"
        )));
    }
    let (n, use_div) = match decimal_scale(step) {
        Some(n) => (n, true),
        None => (step.recip(), false),
    };
    let first = (lo * n).ceil().to_i64().unwrap_or(0);
    let last = (hi * n).floor().to_i64().unwrap_or(-1);
    Ok((first..=last)
        .map(|i| {
            let i = T::lit(i as f64);
            if use_div {
                i / n
            } else {
                i * step
            }
        })
        .filter(|x| *x >= lo && *x <= hi)
        .collect())
}

fn family_for<T: Scalar>(family_name: &str, param_name: &str, value: T) -> Result<FamilySpec<T>> {
    make_family(family_name, [(param_name, value)])
}

fn check_param_name(family_name: &str, param_name: &str) -> Result<()> {
    let info =
        family_info(family_name).ok_or_else(|| Error::UnknownFamily(family_name.to_string()))?;
    if info.param != param_name {
        return Err(Error::UnexpectedParameter {
            family: family_name.to_string(),
            param: param_name.to_string(),
        });
    }
    Ok(())
}

/// Certifies and maximizes at each parameter value on `[lo, hi]`.
pub fn sweep<T: Scalar>(
    family_name: &str,
    param_name: &str,
    lo: T,
    hi: T,
    step: T,
) -> Result<Vec<SweepRecord<T>>> {
    check_param_name(family_name, param_name)?;
    if !(lo < hi) {
        return Err(Error::InvalidRange(format!(
            "sweep needs lo < hi, got [{lo}, {hi}]"
        )));
    }
    family_for(family_name, param_name, lo)?;
    family_for(family_name, param_name, hi)?;
    let grid = parameter_grid(lo, hi, step)?;

    grid.into_par_iter()
        .map(|v| {
            let fam = family_for(family_name, param_name, v)?;
            let cert = verify_conditions(&fam, &ScanConfig::for_family(&fam))?;
            let (a, b) = match cert.bracket() {
                Some((a, b)) => (Some(a), Some(b)),
                None => (None, None),
            };
            let opt = cert
                .is_certified()
                .then(|| maximize(&fam, &cert, T::lit(DEFAULT_ROOT_TOL)).ok())
                .flatten();
            Ok(match opt {
                Some(o) => SweepRecord {
                    param_value: v,
                    x_star: Some(o.x_star),
                    k_star: Some(o.k_star),
                    k_star_rounded: Some(o.k_star_rounded),
                    p_no_default: Some(o.p_no_default),
                    certified: true,
                    a,
                    b,
                    method_agreement: Some(o.method_agreement),
                },
                None => SweepRecord {
                    param_value: v,
                    x_star: None,
                    k_star: None,
                    k_star_rounded: None,
                    p_no_default: None,
                    certified: false,
                    a,
                    b,
                    method_agreement: None,
                },
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NarrowedInterval<T> {
    pub x_lo: T,
    pub x_hi: T,
    /// Some grid x had `g > 0` for every p.
    pub lower_found: bool,
    /// Some grid x had `g < 0` for every p.
    pub upper_found: bool,
    pub x_step: T,
    pub p_points: usize,
}

/// Shrinks an interval known to contain the maximizer for every parameter
/// on the p-grid, using the sign of `g(x, p)` on an x-grid of multiples of
/// `x_step`.
///
/// `x_lo` is the last point of the leading run where `min_p g(x, p) > 0`;
/// `x_hi` is the first later point where `max_p g(x, p) < 0`. Endpoints
/// fall back to the initial interval (with the matching flag cleared) when
/// no grid point qualifies.
pub fn narrow_interval<T: Scalar>(
    family_name: &str,
    p_lo: T,
    p_hi: T,
    p_step: T,
    x_lo_init: T,
    x_hi_init: T,
    x_step: T,
) -> Result<NarrowedInterval<T>> {
    let info =
        family_info(family_name).ok_or_else(|| Error::UnknownFamily(family_name.to_string()))?;
    let p_grid = parameter_grid(p_lo, p_hi, p_step)?;
    let fams = p_grid
        .iter()
        .map(|&p| family_for(family_name, info.param, p))
        .collect::<Result<Vec<_>>>()?;
    let xs = multiples_in(x_lo_init, x_hi_init, x_step)?;

    let extremes = xs
        .par_iter()
        .map(|&x| {
            let mut lo = T::infinity();
            let mut hi = T::neg_infinity();
            for fam in &fams {
                let v = analysis::g(fam, x)?;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Ok((lo, hi))
        })
        .collect::<Result<Vec<(T, T)>>>()?;

    let positive_run = extremes
        .iter()
        .take_while(|(lo, _)| *lo > T::zero())
        .count();
    let (x_lo, lower_found) = match positive_run {
        0 => (x_lo_init, false),
        n => (xs[n - 1], true),
    };
    let (x_hi, upper_found) = match (positive_run..xs.len()).find(|&i| extremes[i].1 < T::zero()) {
        Some(i) => (xs[i], true),
        None => (x_hi_init, false),
    };
    Ok(NarrowedInterval {
        x_lo,
        x_hi,
        lower_found,
        upper_found,
        x_step,
        p_points: p_grid.len(),
    })
}

//! Numerical certification of the bracketing conditions for a family.
//!
//! A family qualifies when `f > 1`, `f` is twice differentiable, `f' > 0`,
//! and there is a bracket `(a, b)` on which `h = f - x f'` runs between
//! 1/2 and 1 while `f''` keeps a fixed sign:
//!
//! * concave: `h(a) = 1/2`, `h(b) = 1`, `f'' < 0` on `(a, b)`
//! * convex:  `h(a) = 1`, `h(b) = 1/2`, `f'' > 0` on `(a, b)`
//!
//! Everything is checked on a finite grid; a certificate is a statement
//! about the scanned range only.

use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};
use crate::families::{make_family, FamilySpec};
use crate::roots::find_root_bracketed;
use crate::scalar::Scalar;

pub const DEFAULT_X_HI: f64 = 1e4;
pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_LINEAR_LIMIT: f64 = 50.0;
pub const DEFAULT_GEOMETRIC_POINTS: usize = 5000;
/// Allowed `|h(a) - target|` after refinement.
pub const ENDPOINT_TOL: f64 = 1e-8;
const FD_POINTS: usize = 100;
const CURVATURE_POINTS: usize = 1000;

/// Scan grid: uniform `step` from `x_lo` up to `linear_limit`, then
/// `geometric_points` log-spaced points out to `x_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScanConfig<T> {
    pub x_lo: T,
    pub x_hi: T,
    pub step: T,
    pub tol: T,
    pub linear_limit: T,
    pub geometric_points: usize,
}

impl<T: Scalar> ScanConfig<T> {
    pub fn for_family(fam: &FamilySpec<T>) -> Self {
        Self {
            x_lo: fam.x_min(),
            x_hi: T::lit(DEFAULT_X_HI),
            step: T::lit(DEFAULT_STEP),
            tol: T::lit(DEFAULT_TOL).max(T::lit(16.0) * T::epsilon()),
            linear_limit: T::lit(DEFAULT_LINEAR_LIMIT),
            geometric_points: DEFAULT_GEOMETRIC_POINTS,
        }
    }

    pub fn validate(&self, fam: &FamilySpec<T>) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScan(m));
        if !(self.x_lo < self.x_hi) {
            return bad(format!(
                "x_lo = {} must be below x_hi = {}",
                self.x_lo, self.x_hi
            ));
        }
        if !(self.step > T::zero()) {
            return bad(format!("step must be positive, got {}", self.step));
        }
        if !(self.tol > T::zero()) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.x_lo < fam.x_min() {
            return bad(format!(
                "x_lo = {} is below the family x_min = {}",
                self.x_lo,
                fam.x_min()
            ));
        }
        if !self.x_hi.is_finite() {
            return bad("x_hi must be finite".into());
        }
        Ok(())
    }

    /// Grid points in increasing order, both ends included.
    pub fn grid(&self) -> Vec<T> {
        let mut xs = Vec::new();
        let linear_end = self.x_hi.min(self.linear_limit);
        if self.x_lo < linear_end {
            let n = ((linear_end - self.x_lo) / self.step)
                .floor()
                .to_usize()
                .unwrap_or(0);
            xs.extend((0..=n).map(|i| self.x_lo + self.step * T::lit(i as f64)));
        } else {
            xs.push(self.x_lo);
        }
        let last = *xs.last().unwrap();
        if self.x_hi > last {
            let start = last.max(self.linear_limit);
            if start > last {
                xs.push(start);
            }
            let m = self.geometric_points.max(1);
            let ratio = (self.x_hi / start).ln() / T::lit(m as f64);
            xs.extend((1..=m).map(|i| start * (ratio * T::lit(i as f64)).exp()));
            *xs.last_mut().unwrap() = self.x_hi;
        }
        xs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `h` rises from 1/2 to 1 with `f'' < 0`.
    Concave,
    /// `h` falls from 1 to 1/2 with `f'' > 0`.
    Convex,
    None,
}

/// How the lower bracket end was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerEnd {
    /// `a` solves `h(a) = 1/2` (or 1 on the convex branch).
    Root,
    /// `a` is the start of the scan: `h(x_lo)` already lies in (1/2, 1)
    /// and `g(x_lo) > 0`, so `h - S` still changes sign on `(a, b)`.
    DomainFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Failure<T> {
    /// "1".."4" for theorem conditions, "scan" for grid problems.
    pub condition: String,
    pub witness_x: T,
    pub witness_value: T,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conditions {
    pub condition1_ok: bool,
    pub condition2_ok: bool,
    pub condition3_ok: bool,
    pub condition4_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TheoremCertificate<T> {
    pub family: String,
    pub conditions: Conditions,
    pub branch: Branch,
    pub a: Option<T>,
    pub b: Option<T>,
    pub lower_end: Option<LowerEnd>,
    pub a_at_least_two: Option<bool>,
    /// Largest grid point evaluated; below `scan.x_hi` if evaluation overflowed.
    pub scanned_hi: T,
    pub scan: ScanConfig<T>,
    pub failures: Vec<Failure<T>>,
}

impl<T: Scalar> TheoremCertificate<T> {
    pub fn is_certified(&self) -> bool {
        self.branch != Branch::None
    }

    pub fn bracket(&self) -> Option<(T, T)> {
        match (self.branch, self.a, self.b) {
            (Branch::None, ..) => None,
            (_, Some(a), Some(b)) => Some((a, b)),
            _ => None,
        }
    }
}

struct Sample<T> {
    x: T,
    f: T,
    f1: T,
    f2: T,
    h: T,
}

fn failure<T: Scalar>(condition: &str, x: T, v: T, message: impl Into<String>) -> Failure<T> {
    Failure {
        condition: condition.to_string(),
        witness_x: x,
        witness_value: v,
        message: message.into(),
    }
}

/// Certifies the bracketing conditions for `fam` on the grid of `scan`.
///
/// Failures are reported inside the certificate; only an invalid scan
/// configuration is an error.
pub fn verify_conditions<T: Scalar>(
    fam: &FamilySpec<T>,
    scan: &ScanConfig<T>,
) -> Result<TheoremCertificate<T>> {
    scan.validate(fam)?;
    let one = T::one();
    let mut failures = Vec::new();

    let mut samples: Vec<Sample<T>> = Vec::new();
    for x in scan.grid() {
        let (f, f1, f2) = fam.eval_all(x)?;
        let h = f - x * f1;
        if !(f.is_finite() && f1.is_finite() && f2.is_finite() && h.is_finite()) {
            failures.push(failure(
                "scan",
                x,
                T::zero(),
                "non-finite evaluation of f, f' or f''; scan truncated here",
            ));
            break;
        }
        samples.push(Sample { x, f, f1, f2, h });
    }
    if samples.len() < 2 {
        failures.push(failure(
            "scan",
            scan.x_lo,
            T::zero(),
            "fewer than two finite grid points",
        ));
        return Ok(TheoremCertificate {
            family: fam.name().to_string(),
            conditions: Conditions {
                condition1_ok: false,
                condition2_ok: false,
                condition3_ok: false,
                condition4_ok: false,
            },
            branch: Branch::None,
            a: None,
            b: None,
            lower_end: None,
            a_at_least_two: None,
            scanned_hi: scan.x_lo,
            scan: *scan,
            failures,
        });
    }
    let scanned_hi = samples.last().unwrap().x;

    let condition1_ok = match samples.iter().find(|s| !(s.f > one)) {
        Some(s) => {
            failures.push(failure("1", s.x, s.f, "f(x) <= 1"));
            false
        }
        None => true,
    };
    let condition2_ok = match derivative_consistency(fam, scan.x_lo, scanned_hi) {
        Some(f) => {
            failures.push(f);
            false
        }
        None => true,
    };
    let condition3_ok = match samples.iter().find(|s| !(s.f1 > T::zero())) {
        Some(s) => {
            failures.push(failure("3", s.x, s.f1, "f'(x) <= 0"));
            false
        }
        None => true,
    };

    let bracket = locate_bracket(fam, &samples, scan.tol, &mut failures);
    let condition4_ok = bracket.is_some();
    let (branch, a, b, lower_end) = match bracket {
        Some((br, a, b, le)) if condition1_ok && condition2_ok && condition3_ok => {
            (br, Some(a), Some(b), Some(le))
        }
        Some((_, a, b, le)) => (Branch::None, Some(a), Some(b), Some(le)),
        None => (Branch::None, None, None, None),
    };
    failures.sort_by(|l, r| {
        l.witness_x
            .partial_cmp(&r.witness_x)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(TheoremCertificate {
        family: fam.name().to_string(),
        conditions: Conditions {
            condition1_ok,
            condition2_ok,
            condition3_ok,
            condition4_ok,
        },
        branch,
        a,
        b,
        lower_end,
        a_at_least_two: a.map(|a| a >= T::lit(2.0)),
        scanned_hi,
        scan: *scan,
        failures,
    })
}

/// Sign changes of `h - level` between consecutive samples (index of the right point).
fn crossings<T: Scalar>(samples: &[Sample<T>], level: T) -> Vec<usize> {
    (1..samples.len())
        .filter(|&i| (samples[i - 1].h < level) != (samples[i].h < level))
        .collect()
}

fn refine<T: Scalar>(
    fam: &FamilySpec<T>,
    samples: &[Sample<T>],
    i: usize,
    level: T,
    tol: T,
) -> Result<T> {
    find_root_bracketed(
        |x| Ok(analysis::h(fam, x)? - level),
        samples[i - 1].x,
        samples[i].x,
        tol,
    )
}

fn locate_bracket<T: Scalar>(
    fam: &FamilySpec<T>,
    samples: &[Sample<T>],
    tol: T,
    failures: &mut Vec<Failure<T>>,
) -> Option<(Branch, T, T, LowerEnd)> {
    let half = T::lit(0.5);
    let one = T::one();
    let halves = crossings(samples, half);
    let ones = crossings(samples, one);
    let first = &samples[0];

    for (level, hits) in [(half, &halves), (one, &ones)] {
        if hits.len() > 1 {
            let s = &samples[hits[1]];
            failures.push(failure(
                "4",
                s.x,
                s.h,
                format!(
                    "non-unique bracket: h - {level} changes sign {} times",
                    hits.len()
                ),
            ));
        }
    }
    if halves.len() > 1 || ones.len() > 1 {
        return None;
    }

    let refined = |i: usize, level: T, failures: &mut Vec<Failure<T>>| -> Option<T> {
        match refine(fam, samples, i, level, tol) {
            Ok(x) => {
                let hx = analysis::h(fam, x).ok()?;
                if (hx - level).abs() > endpoint_tol::<T>() {
                    failures.push(failure(
                        "4",
                        x,
                        hx,
                        format!("refined root misses h = {level}"),
                    ));
                    return None;
                }
                Some(x)
            }
            Err(e) => {
                failures.push(failure(
                    "4",
                    samples[i].x,
                    samples[i].h,
                    format!("root refinement failed: {e}"),
                ));
                None
            }
        }
    };

    let (branch, a, b, lower_end) = match (halves.first(), ones.first()) {
        (Some(&ih), Some(&io)) => {
            let xh = refined(ih, half, failures)?;
            let xo = refined(io, one, failures)?;
            if xh < xo {
                (Branch::Concave, xh, xo, LowerEnd::Root)
            } else if xo < xh {
                (Branch::Convex, xo, xh, LowerEnd::Root)
            } else {
                failures.push(failure(
                    "4",
                    xh,
                    half,
                    "h = 1/2 and h = 1 at the same point",
                ));
                return None;
            }
        }
        (None, Some(&io))
            if first.h > half && first.h < one && samples[io].h > samples[io - 1].h =>
        {
            let xo = refined(io, one, failures)?;
            match analysis::g(fam, first.x) {
                Ok(g0) if g0 > T::zero() => (Branch::Concave, first.x, xo, LowerEnd::DomainFloor),
                Ok(g0) => {
                    failures.push(failure(
                        "4",
                        first.x,
                        g0,
                        "h(x_lo) in (1/2, 1) but g(x_lo) <= 0",
                    ));
                    return None;
                }
                Err(e) => {
                    failures.push(failure(
                        "4",
                        first.x,
                        first.h,
                        format!("g undefined at x_lo: {e}"),
                    ));
                    return None;
                }
            }
        }
        (None, None) => {
            failures.push(failure(
                "4",
                first.x,
                first.h,
                "h never equals 1/2 or 1 on the scanned range",
            ));
            return None;
        }
        (Some(&i), None) => {
            failures.push(failure(
                "4",
                samples[i].x,
                samples[i].h,
                "h never equals 1 on the scanned range",
            ));
            return None;
        }
        (None, Some(&i)) => {
            failures.push(failure(
                "4",
                samples[i].x,
                samples[i].h,
                "h never equals 1/2 on the scanned range",
            ));
            return None;
        }
    };

    let want_negative = branch == Branch::Concave;
    let interior = samples
        .iter()
        .filter(|s| s.x > a && s.x < b)
        .map(|s| (s.x, s.f2))
        .chain((1..=CURVATURE_POINTS).filter_map(|j| {
            let x = a + (b - a) * T::lit(j as f64 / (CURVATURE_POINTS + 1) as f64);
            fam.eval_f2(x).ok().map(|v| (x, v))
        }));
    for (x, f2) in interior {
        let ok = if want_negative {
            f2 < T::zero()
        } else {
            f2 > T::zero()
        };
        if !ok {
            let sign = if want_negative {
                "f'' >= 0 inside a concave bracket"
            } else {
                "f'' <= 0 inside a convex bracket"
            };
            failures.push(failure("4", x, f2, sign));
            return None;
        }
    }
    Some((branch, a, b, lower_end))
}

/// Condition 2 proxy: analytic `f'` and `f''` agree with central
/// differences at `FD_POINTS` quasi-random points of the scanned range.
/// Residual allowed in `h(a) = 1/2`, `h(b) = 1`; widened for single precision.
pub fn endpoint_tol<T: Scalar>() -> T {
    T::lit(ENDPOINT_TOL).max(T::lit(64.0) * T::epsilon())
}

fn derivative_consistency<T: Scalar>(fam: &FamilySpec<T>, lo: T, hi: T) -> Option<Failure<T>> {
    // central differences are accurate to about eps^(2/3) at a step of eps^(1/3)
    let eps23 = T::epsilon().powf(T::lit(2.0 / 3.0));
    let rtol1 = T::lit(1e-6).max(T::lit(100.0) * eps23);
    let rtol2 = T::lit(1e-5).max(T::lit(1000.0) * eps23);
    let rel_step = T::lit(1e-5).max(T::epsilon().cbrt());
    let two = T::lit(2.0);
    let span = (hi / lo).ln();
    // additive golden-ratio sequence in log space
    let alpha = 0.618_033_988_749_895;
    for i in 0..FD_POINTS {
        let u = T::lit((0.5 + alpha * i as f64).fract());
        let x = lo * (span * (T::lit(0.02) + T::lit(0.96) * u)).exp();
        let s = rel_step * x.min(x - lo);
        if !(s > T::zero()) {
            continue;
        }
        let (Ok((f, f1, f2)), Ok(fp), Ok(fm), Ok(f1p), Ok(f1m)) = (
            fam.eval_all(x),
            fam.eval_f(x + s),
            fam.eval_f(x - s),
            fam.eval_f1(x + s),
            fam.eval_f1(x - s),
        ) else {
            continue;
        };
        if ![f, f1, f2, fp, fm, f1p, f1m].iter().all(|v| v.is_finite()) {
            continue;
        }
        let fd1 = (fp - fm) / (two * s);
        let fd2 = (f1p - f1m) / (two * s);
        if (f1 - fd1).abs() > rtol1 * (f1.abs() + f.abs() / x) {
            return Some(failure(
                "2",
                x,
                f1 - fd1,
                "f' disagrees with central differences of f",
            ));
        }
        if (f2 - fd2).abs() > rtol2 * (f2.abs() + f1.abs() / x) {
            return Some(failure(
                "2",
                x,
                f2 - fd2,
                "f'' disagrees with central differences of f'",
            ));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixCheck {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub witness_p: Option<f64>,
    pub witness_x: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub grid_points: usize,
    pub checks: Vec<AppendixCheck>,
    pub all_passed: bool,
}

const APPENDIX_SAMPLES: usize = 200;

/// Default p-grid for the analytic yunus checks: 501 points on [1/2, 1].
pub fn default_p_grid<T: Scalar>(points: usize) -> Vec<T> {
    let n = points.max(2) - 1;
    (0..=n)
        .map(|i| T::lit(0.5 + 0.5 * i as f64 / n as f64))
        .collect()
}

/// Reproduces the analytic claims about the yunus family
/// `f = x^p + (ln x)^(1/p)` on a p-grid within [1/2, 1].
pub fn appendix_b_checks<T: Scalar>(p_grid: &[T]) -> Result<AppendixReport> {
    if p_grid.is_empty() {
        return Err(Error::InvalidRange("empty p-grid".into()));
    }
    let fams = p_grid
        .iter()
        .map(|&p| make_family("yunus", [("p", p)]))
        .collect::<Result<Vec<_>>>()?;
    let e = T::E();
    let e2 = e * e;
    let half = T::lit(0.5);
    let one = T::one();
    let mut checks = Vec::new();
    let mut push = |name: &str,
                    passed: bool,
                    value: T,
                    witness_p: Option<T>,
                    witness_x: Option<T>,
                    detail: String| {
        checks.push(AppendixCheck {
            name: name.to_string(),
            passed,
            value: value.as_f64(),
            witness_p: witness_p.map(Scalar::as_f64),
            witness_x: witness_x.map(Scalar::as_f64),
            detail,
        });
    };

    // h_p(e) < 1/2, with its maximum over the grid
    let at_e = fams
        .iter()
        .map(|f| analysis::h(f, e))
        .collect::<Result<Vec<_>>>()?;
    let (imax, hmax) = argmax(&at_e);
    push(
        "h_p(e) < 1/2",
        hmax < half,
        hmax,
        Some(p_grid[imax]),
        Some(e),
        format!("max over grid {hmax} at p = {}", p_grid[imax]),
    );

    // maximizer in p is 3 W(1/3), where d/dp h_p(e) = -p e^p + 1/p^2 vanishes
    let p_star = T::lit(3.0) * analysis::lambert_w(T::lit(1.0 / 3.0))?;
    let slope = -p_star * p_star.exp() + (p_star * p_star).recip();
    let h_star = (one - p_star) * p_star.exp() + one - p_star.recip();
    let spacing = p_grid
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(T::lit(1e-3), |m, d| m.max(d));
    push(
        "argmax_p h_p(e) = 3 W(1/3)",
        (p_grid[imax] - p_star).abs() <= spacing && slope.abs() < T::lit(1e-12),
        p_star,
        Some(p_grid[imax]),
        Some(e),
        format!(
            "p* = {p_star}, d/dp h_p(e) at p* = {slope}, grid argmax {}",
            p_grid[imax]
        ),
    );
    push(
        "h_p*(e) = 0.1981",
        (h_star - T::lit(0.1981)).abs() <= T::lit(1e-3),
        h_star,
        Some(p_star),
        Some(e),
        format!("h at p* = {h_star}"),
    );

    // h_p(e^2) >= 1
    let at_e2 = fams
        .iter()
        .map(|f| analysis::h(f, e2))
        .collect::<Result<Vec<_>>>()?;
    let (imin, hmin) = argmin(&at_e2);
    push(
        "h_p(e^2) >= 1",
        hmin >= one - T::lit(1e-12),
        hmin,
        Some(p_grid[imin]),
        Some(e2),
        format!("min over grid {hmin} at p = {}", p_grid[imin]),
    );

    // closed-form endpoint values
    let y_half = make_family("yunus", [("p", half)])?;
    let y_one = make_family("yunus", [("p", one)])?;
    let endpoint = [
        (
            "h_1/2(e^2) = e/2",
            analysis::h(&y_half, e2)?,
            e * half,
            T::lit(1e-12),
            half,
            e2,
        ),
        (
            "h_1(e^2) = 1",
            analysis::h(&y_one, e2)?,
            one,
            T::lit(1e-12),
            one,
            e2,
        ),
        (
            "h_1/2(e) = -0.1756",
            analysis::h(&y_half, e)?,
            T::lit(-0.1756),
            T::lit(1e-4),
            half,
            e,
        ),
        (
            "h_1(e) = 0",
            analysis::h(&y_one, e)?,
            T::zero(),
            T::lit(1e-12),
            one,
            e,
        ),
    ];
    for (name, got, want, tol, p, x) in endpoint {
        push(
            name,
            (got - want).abs() <= tol,
            got,
            Some(p),
            Some(x),
            format!("expected {want} +- {tol}"),
        );
    }

    // monotone h and concave f on [e, e^2]
    let xs: Vec<T> = (0..=APPENDIX_SAMPLES)
        .map(|j| e + (e2 - e) * T::lit(j as f64 / APPENDIX_SAMPLES as f64))
        .collect();
    let mut increasing = None;
    let mut concave = None;
    for (fam, &p) in fams.iter().zip(p_grid) {
        let hs = xs
            .iter()
            .map(|&x| analysis::h(fam, x))
            .collect::<Result<Vec<_>>>()?;
        if increasing.is_none() {
            if let Some(j) = (1..hs.len()).find(|&j| !(hs[j] > hs[j - 1])) {
                increasing = Some((p, xs[j], hs[j] - hs[j - 1]));
            }
        }
        if concave.is_none() {
            for &x in &xs {
                let f2 = fam.eval_f2(x)?;
                if !(f2 < T::zero()) {
                    concave = Some((p, x, f2));
                    break;
                }
            }
        }
    }
    match increasing {
        None => push(
            "h_p increasing on [e, e^2]",
            true,
            T::zero(),
            None,
            None,
            "all sampled differences positive".into(),
        ),
        Some((p, x, d)) => push(
            "h_p increasing on [e, e^2]",
            false,
            d,
            Some(p),
            Some(x),
            "non-increasing step".into(),
        ),
    }
    match concave {
        None => push(
            "f'' < 0 on [e, e^2]",
            true,
            T::zero(),
            None,
            None,
            "all sampled f'' negative".into(),
        ),
        Some((p, x, v)) => push(
            "f'' < 0 on [e, e^2]",
            false,
            v,
            Some(p),
            Some(x),
            "f'' >= 0".into(),
        ),
    }

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(AppendixReport {
        grid_points: p_grid.len(),
        checks,
        all_passed,
    })
}

fn argmax<T: Scalar>(v: &[T]) -> (usize, T) {
    v.iter().copied().enumerate().fold(
        (0, T::neg_infinity()),
        |acc, (i, x)| if x > acc.1 { (i, x) } else { acc },
    )
}

fn argmin<T: Scalar>(v: &[T]) -> (usize, T) {
    v.iter().copied().enumerate().fold(
        (0, T::infinity()),
        |acc, (i, x)| if x < acc.1 { (i, x) } else { acc },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;
    use std::f64::consts::E;

    fn certify(name: &str, v: f64) -> TheoremCertificate<f64> {
        let info = crate::families::family_info(name).unwrap();
        let fam = make_family(name, [(info.param, v)]).unwrap();
        verify_conditions(&fam, &ScanConfig::for_family(&fam)).unwrap()
    }

    #[test]
    fn grid_shape() {
        let fam = make_family::<f64, _, _>("yunus", [("p", 0.5)]).unwrap();
        let g = ScanConfig::for_family(&fam).grid();
        assert_eq!(g[0], 2.0);
        assert_eq!(*g.last().unwrap(), 1e4);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(g.len() > 48_000 && g.len() < 48_000 + 5_003);
    }

    #[test]
    fn yunus_half_is_concave() {
        let c = certify("yunus", 0.5);
        assert_eq!(c.branch, Branch::Concave);
        let (a, b) = c.bracket().unwrap();
        assert!((E..=5.5).contains(&a), "a = {a}");
        assert!(a >= 3.0);
        assert!(b <= 7.0);
        assert_eq!(c.lower_end, Some(LowerEnd::Root));
        assert_eq!(c.a_at_least_two, Some(true));
        assert!(c.failures.is_empty(), "{:?}", c.failures);
    }

    #[test]
    fn identity_power_fails_condition_four() {
        let c = certify("power", 1.0);
        assert_eq!(c.branch, Branch::None);
        assert!(!c.conditions.condition4_ok);
        assert!(c.failures.iter().any(|f| f.condition == "4"));
    }

    #[test]
    fn exp_fails() {
        let c = certify("exp", 1.0);
        assert_eq!(c.branch, Branch::None);
        // e^x overflows well before 1e4
        assert!(c.scanned_hi < 1e3);
        assert!(c.failures.iter().any(|f| f.condition == "scan"));
    }

    #[test]
    fn near_identity_power_matches_analytic_b() {
        let r: f64 = 0.999;
        let c = certify("power", r);
        assert_eq!(c.branch, Branch::Concave);
        let b_oracle = (1.0 / (1.0 - r)).powf(1.0 / r);
        let a_oracle = (0.5 / (1.0 - r)).powf(1.0 / r);
        assert!((c.b.unwrap() - b_oracle).abs() < 1e-6);
        assert!((c.a.unwrap() - a_oracle).abs() < 1e-6);
    }

    #[test]
    fn lnln_uses_domain_floor() {
        let c = certify("lnln", 1.0);
        assert_eq!(c.branch, Branch::Concave);
        assert_eq!(c.lower_end, Some(LowerEnd::DomainFloor));
        let c = certify("lnln", 10.0);
        assert_eq!(c.lower_end, Some(LowerEnd::Root));
    }

    #[test]
    fn convex_branch_is_reported() {
        // h = 9 - x^2 falls through 1 at sqrt 8 and 1/2 at sqrt 8.5
        let fam = FamilySpec::<f64>::custom(
            "quad",
            BTreeMap::new(),
            2.0,
            |x| 9.0 + x * x,
            |x| 2.0 * x,
            |_| 2.0,
        )
        .unwrap();
        let c = verify_conditions(&fam, &ScanConfig::for_family(&fam)).unwrap();
        assert_eq!(c.branch, Branch::Convex);
        assert!((c.a.unwrap() - 8f64.sqrt()).abs() < 1e-8);
        assert!((c.b.unwrap() - 8.5f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn wrong_derivative_fails_condition_two() {
        let fam = FamilySpec::<f64>::custom(
            "bad",
            BTreeMap::new(),
            2.0,
            |x: f64| x.powf(0.7),
            |x: f64| 0.7 * x.powf(-0.3),
            |x: f64| 0.21 * x.powf(-1.3), // sign error
        )
        .unwrap();
        let c = verify_conditions(&fam, &ScanConfig::for_family(&fam)).unwrap();
        assert!(!c.conditions.condition2_ok);
        assert_eq!(c.branch, Branch::None);
    }

    #[test]
    fn multiple_crossings_are_not_unique() {
        // h = 50 - x^2 cos x oscillates through 1/2 and 1
        let wiggle = FamilySpec::<f64>::custom(
            "wiggle2",
            BTreeMap::new(),
            2.0,
            |x: f64| 50.0 + x * x.sin(),
            |x: f64| x.sin() + x * x.cos(),
            |x: f64| 2.0 * x.cos() - x * x.sin(),
        )
        .unwrap();
        let c = verify_conditions(
            &wiggle,
            &ScanConfig {
                x_hi: 40.0,
                ..ScanConfig::for_family(&wiggle)
            },
        )
        .unwrap();
        assert_eq!(c.branch, Branch::None);
        assert!(c.failures.iter().any(|f| f.message.contains("non-unique")));
    }

    #[test]
    fn invalid_scan_is_an_error() {
        let fam = make_family::<f64, _, _>("yunus", [("p", 0.5)]).unwrap();
        let base = ScanConfig::for_family(&fam);
        assert!(verify_conditions(&fam, &ScanConfig { x_hi: 1.0, ..base }).is_err());
        assert!(verify_conditions(&fam, &ScanConfig { step: 0.0, ..base }).is_err());
        assert!(verify_conditions(&fam, &ScanConfig { tol: -1.0, ..base }).is_err());
        assert!(verify_conditions(&fam, &ScanConfig { x_lo: 1.5, ..base }).is_err());
    }

    #[test]
    fn appendix_single_points() {
        let r = appendix_b_checks(&[1.0]).unwrap();
        let c = r.checks.iter().find(|c| c.name == "h_p(e) < 1/2").unwrap();
        assert!(c.passed && c.value.abs() < 1e-15);
        let r = appendix_b_checks(&[0.772883]).unwrap();
        let c = r.checks.iter().find(|c| c.name == "h_p(e) < 1/2").unwrap();
        assert!((c.value - 0.1981).abs() < 1e-4);
        let r = appendix_b_checks(&[0.5]).unwrap();
        let c = r.checks.iter().find(|c| c.name == "h_p(e^2) >= 1").unwrap();
        assert!(c.passed && (c.value - E / 2.0).abs() < 1e-12);
    }

    #[test]
    fn appendix_rejects_out_of_range_p() {
        assert!(appendix_b_checks(&[0.4]).is_err());
        assert!(appendix_b_checks::<f64>(&[]).is_err());
    }
}

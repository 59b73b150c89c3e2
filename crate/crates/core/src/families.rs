//! Function families `f(x; params)` with hand-coded first and second
//! derivatives. The per-member default probability is `phi = 1 / f`.

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Offset keeping `x_min` strictly inside an open domain boundary.
const DOMAIN_EPS: f64 = 1e-9;

/// Admissible interval for a family parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRange {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: f64,
    pub hi_closed: bool,
}

impl ParamRange {
    const fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            lo_closed: true,
            hi,
            hi_closed: true,
        }
    }

    const fn above(lo: f64, lo_closed: bool) -> Self {
        Self {
            lo,
            lo_closed,
            hi: f64::INFINITY,
            hi_closed: false,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        let lo_ok = if self.lo_closed {
            v >= self.lo
        } else {
            v > self.lo
        };
        let hi_ok = if self.hi_closed {
            v <= self.hi
        } else {
            v < self.hi
        };
        v.is_finite() && lo_ok && hi_ok
    }
}

impl fmt::Display for ParamRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        if self.hi.is_infinite() {
            write!(f, "{open}{}, inf{close}", self.lo)
        } else {
            write!(f, "{open}{}, {}{close}", self.lo, self.hi)
        }
    }
}

/// Registry entry describing a built-in family.
#[derive(Debug, Clone, Copy)]
pub struct FamilyInfo {
    pub name: &'static str,
    pub formula: &'static str,
    pub param: &'static str,
    pub range: ParamRange,
    pub x_min: f64,
    /// Whether the family is expected to satisfy the bracketing conditions.
    pub counterexample: bool,
}

const BUILTINS: [FamilyInfo; 7] = [
    FamilyInfo {
        name: "yunus",
        formula: "x^p + (ln x)^(1/p)",
        param: "p",
        range: ParamRange::closed(0.5, 1.0),
        x_min: 2.0,
        counterexample: false,
    },
    FamilyInfo {
        name: "power",
        formula: "x^r",
        param: "r",
        range: ParamRange::above(0.0, false),
        x_min: 1.0 + DOMAIN_EPS,
        counterexample: false,
    },
    FamilyInfo {
        name: "logpow",
        formula: "(ln x)^(1/p)",
        param: "p",
        range: ParamRange::closed(0.5, 1.0),
        x_min: E + DOMAIN_EPS,
        counterexample: false,
    },
    FamilyInfo {
        name: "xlnx",
        formula: "(x ln x)^p",
        param: "p",
        range: ParamRange::closed(0.5, 0.75),
        x_min: 2.0,
        counterexample: false,
    },
    FamilyInfo {
        name: "lnln",
        formula: "(ln ln x)^p",
        param: "p",
        range: ParamRange::above(0.0, false),
        // e^e
        x_min: 15.154_262_241_479_262 + DOMAIN_EPS,
        counterexample: false,
    },
    FamilyInfo {
        name: "combo",
        formula: "(x ln x)^p + (ln ln x)^(1/p)",
        param: "p",
        range: ParamRange::closed(0.5, 0.75),
        x_min: E + DOMAIN_EPS,
        counterexample: false,
    },
    FamilyInfo {
        name: "exp",
        formula: "e^(r x)",
        param: "r",
        range: ParamRange::above(1.0, true),
        x_min: 2.0,
        counterexample: true,
    },
];

/// All built-in families in registry order.
pub fn builtin_families() -> &'static [FamilyInfo] {
    &BUILTINS
}

pub fn family_info(name: &str) -> Option<&'static FamilyInfo> {
    BUILTINS.iter().find(|i| i.name == name)
}

pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// User-supplied family: `f`, `f'`, `f''` as callables.
#[derive(Clone)]
pub struct CustomFamily<T> {
    f: ScalarFn<T>,
    f1: ScalarFn<T>,
    f2: ScalarFn<T>,
}

#[derive(Clone)]
enum Kind<T> {
    Yunus { p: T },
    Power { r: T },
    LogPow { p: T },
    XLnX { p: T },
    LnLn { p: T },
    Combo { p: T },
    Exp { r: T },
    Custom(CustomFamily<T>),
}

/// A validated family instance. Immutable once built.
#[derive(Clone)]
pub struct FamilySpec<T: Scalar> {
    name: String,
    params: BTreeMap<String, T>,
    x_min: T,
    kind: Kind<T>,
}

impl<T: Scalar> fmt::Debug for FamilySpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FamilySpec")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("x_min", &self.x_min)
            .finish()
    }
}

/// Builds a built-in family after validating its parameters.
///
/// ```
/// let fam = groupsize::make_family::<f64, _, _>("yunus", [("p", 0.5)]).unwrap();
/// assert_eq!(fam.x_min(), 2.0);
/// ```
pub fn make_family<T, P, S>(name: &str, params: P) -> Result<FamilySpec<T>>
where
    T: Scalar,
    P: IntoIterator<Item = (S, T)>,
    S: Into<String>,
{
    let info = family_info(name).ok_or_else(|| Error::UnknownFamily(name.to_string()))?;
    let params: BTreeMap<String, T> = params.into_iter().map(|(k, v)| (k.into(), v)).collect();

    if let Some(extra) = params.keys().find(|k| k.as_str() != info.param) {
        return Err(Error::UnexpectedParameter {
            family: name.to_string(),
            param: extra.clone(),
        });
    }
    let value = *params
        .get(info.param)
        .ok_or_else(|| Error::MissingParameter {
            family: name.to_string(),
            param: info.param.to_string(),
        })?;
    if !info.range.contains(value.as_f64()) {
        return Err(Error::ParameterOutOfRange {
            family: name.to_string(),
            param: info.param.to_string(),
            value: value.as_f64(),
            range: info.range.to_string(),
        });
    }

    let kind = match info.name {
        "yunus" => Kind::Yunus { p: value },
        "power" => Kind::Power { r: value },
        "logpow" => Kind::LogPow { p: value },
        "xlnx" => Kind::XLnX { p: value },
        "lnln" => Kind::LnLn { p: value },
        "combo" => Kind::Combo { p: value },
        "exp" => Kind::Exp { r: value },
        _ => unreachable!("registry and constructor out of sync"),
    };
    Ok(FamilySpec {
        name: info.name.to_string(),
        params,
        x_min: T::lit(info.x_min),
        kind,
    })
}

impl<T: Scalar> FamilySpec<T> {
    /// Registers a custom family from analytic callables. The verifier and
    /// optimizer treat it exactly like a built-in.
    pub fn custom<F, F1, F2>(
        name: impl Into<String>,
        params: BTreeMap<String, T>,
        x_min: T,
        f: F,
        f1: F1,
        f2: F2,
    ) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
        F1: Fn(T) -> T + Send + Sync + 'static,
        F2: Fn(T) -> T + Send + Sync + 'static,
    {
        if !(x_min.is_finite() && x_min > T::zero()) {
            return Err(Error::InvalidRange(format!(
                "custom family x_min must be positive, got {x_min}"
            )));
        }
        Ok(Self {
            name: name.into(),
            params,
            x_min,
            kind: Kind::Custom(CustomFamily {
                f: Arc::new(f),
                f1: Arc::new(f1),
                f2: Arc::new(f2),
            }),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, T> {
        &self.params
    }

    pub fn param(&self, key: &str) -> Option<T> {
        self.params.get(key).copied()
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.kind, Kind::Custom(_))
    }

    fn check_domain(&self, x: T) -> Result<()> {
        if x >= self.x_min {
            Ok(())
        } else {
            Err(Error::BelowDomain {
                x: x.as_f64(),
                x_min: self.x_min.as_f64(),
            })
        }
    }

    pub fn eval_f(&self, x: T) -> Result<T> {
        self.check_domain(x)?;
        Ok(self.derivs(x).0)
    }

    pub fn eval_f1(&self, x: T) -> Result<T> {
        self.check_domain(x)?;
        Ok(self.derivs(x).1)
    }

    pub fn eval_f2(&self, x: T) -> Result<T> {
        self.check_domain(x)?;
        Ok(self.derivs(x).2)
    }

    /// `(f, f', f'')` at `x`, domain-checked.
    pub fn eval_all(&self, x: T) -> Result<(T, T, T)> {
        self.check_domain(x)?;
        Ok(self.derivs(x))
    }

    /// `f(x1) - f(x0)` evaluated without differencing two rounded values
    /// (exact for custom families only up to the subtraction).
    pub fn eval_f_increment(&self, x0: T, x1: T) -> Result<T> {
        self.check_domain(x0)?;
        self.check_domain(x1)?;
        Ok(self.increment(x0, x1))
    }

    fn derivs(&self, x: T) -> (T, T, T) {
        match &self.kind {
            Kind::Yunus { p } => {
                let (a, a1, a2) = x_pow(x, *p);
                let (b, b1, b2) = log_pow(x, p.recip());
                (a + b, a1 + b1, a2 + b2)
            }
            Kind::Power { r } => x_pow(x, *r),
            Kind::LogPow { p } => log_pow(x, p.recip()),
            Kind::XLnX { p } => xlnx_pow(x, *p),
            Kind::LnLn { p } => lnln_pow(x, *p),
            Kind::Combo { p } => {
                let (a, a1, a2) = xlnx_pow(x, *p);
                let (b, b1, b2) = lnln_pow(x, p.recip());
                (a + b, a1 + b1, a2 + b2)
            }
            Kind::Exp { r } => {
                let f = (*r * x).exp();
                (f, *r * f, *r * *r * f)
            }
            Kind::Custom(c) => ((c.f)(x), (c.f1)(x), (c.f2)(x)),
        }
    }

    fn increment(&self, x0: T, x1: T) -> T {
        let dx = x1 - x0;
        let ln0 = x0.ln();
        let dln = (dx / x0).ln_1p();
        match &self.kind {
            Kind::Yunus { p } => pow_increment(x0, dx, *p) + pow_increment(ln0, dln, p.recip()),
            Kind::Power { r } => pow_increment(x0, dx, *r),
            Kind::LogPow { p } => pow_increment(ln0, dln, p.recip()),
            Kind::XLnX { p } => {
                let (u0, du) = xlnx_increment(x0, x1, dx, ln0, dln);
                pow_increment(u0, du, *p)
            }
            Kind::LnLn { p } => {
                let (v0, dv) = lnln_increment(ln0, dln);
                pow_increment(v0, dv, *p)
            }
            Kind::Combo { p } => {
                let (u0, du) = xlnx_increment(x0, x1, dx, ln0, dln);
                let (v0, dv) = lnln_increment(ln0, dln);
                pow_increment(u0, du, *p) + pow_increment(v0, dv, p.recip())
            }
            Kind::Exp { r } => (*r * x0).exp() * (*r * dx).exp_m1(),
            Kind::Custom(c) => (c.f)(x1) - (c.f)(x0),
        }
    }
}

/// `x^p` and its derivatives.
fn x_pow<T: Scalar>(x: T, p: T) -> (T, T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    (
        x.powf(p),
        p * x.powf(p - one),
        p * (p - one) * x.powf(p - two),
    )
}

/// `(ln x)^q`: f' = q L^(q-1) / x, f'' = q L^(q-2) (q - 1 - L) / x^2.
fn log_pow<T: Scalar>(x: T, q: T) -> (T, T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let l = x.ln();
    (
        l.powf(q),
        q * l.powf(q - one) / x,
        q * l.powf(q - two) * (q - one - l) / (x * x),
    )
}

/// `(x ln x)^p`: with u = x ln x, u' = ln x + 1, u'' = 1/x,
/// f'' = p u^(p-2) [(p - 1)(ln x + 1)^2 + ln x].
fn xlnx_pow<T: Scalar>(x: T, p: T) -> (T, T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let l = x.ln();
    let u = x * l;
    let du = l + one;
    (
        u.powf(p),
        p * u.powf(p - one) * du,
        p * u.powf(p - two) * ((p - one) * du * du + l),
    )
}

/// `(ln ln x)^p`: with v = ln ln x, v' = 1/(x ln x),
/// f'' = p v^(p-2) [(p - 1) - v (ln x + 1)] / (x ln x)^2.
fn lnln_pow<T: Scalar>(x: T, p: T) -> (T, T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let l = x.ln();
    let v = l.ln();
    let w = x * l;
    (
        v.powf(p),
        p * v.powf(p - one) / w,
        p * v.powf(p - two) * ((p - one) - v * (l + one)) / (w * w),
    )
}

/// `(b0 + db)^e - b0^e` as `b0^e * expm1(e * ln1p(db / b0))`.
fn pow_increment<T: Scalar>(b0: T, db: T, e: T) -> T {
    if b0 == T::zero() {
        return db.powf(e);
    }
    b0.powf(e) * (e * (db / b0).ln_1p()).exp_m1()
}

fn xlnx_increment<T: Scalar>(x0: T, x1: T, dx: T, ln0: T, dln: T) -> (T, T) {
    let u0 = x0 * ln0;
    (u0, dx * x1.ln() + x0 * dln)
}

fn lnln_increment<T: Scalar>(ln0: T, dln: T) -> (T, T) {
    (ln0.ln(), (dln / ln0).ln_1p())
}

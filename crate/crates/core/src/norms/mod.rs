//! Norms on finitely supported vectors: `l_p`, `c_0`, Tsirelson spaces and
//! their convexifications and duals, the `H_xi` construction, and
//! domination constants of finite vector sequences.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ordinal::Ordinal;
use crate::vector::{fmt_rational, parse_rational, to_f64, Vector};

pub mod domination;
pub mod dual;
pub mod hxi;
pub mod simplex;
pub mod stability;
pub mod tsirelson;

pub use domination::{domination_constant, Domination, SeqNormSpec, Target};
pub use dual::{dual_norm, DualNorm};
pub use tsirelson::Tsirelson;

/// Relative tolerance for float paths.
pub const FLOAT_TOL: f64 = 1e-9;

/// A norm value: an exact rational, an exact `q`-th root of a rational, or
/// a float.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    /// `radicand^(1/degree)` with `radicand >= 0`.
    Root(BigRational, u32),
    Approx(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    /// `r^(1/q)`, simplified to `Exact` when `r` is a perfect `q`-th power.
    pub fn root(r: BigRational, q: u32) -> Self {
        if q == 1 || r.is_zero() || r.is_one() {
            return Scalar::Exact(r);
        }
        let (n, d) = (r.numer().nth_root(q), r.denom().nth_root(q));
        if num_traits::pow(n.clone(), q as usize) == *r.numer() && num_traits::pow(d.clone(), q as usize) == *r.denom() {
            Scalar::Exact(BigRational::new(n, d))
        } else {
            Scalar::Root(r, q)
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => to_f64(r),
            Scalar::Root(r, q) => to_f64(r).powf(1.0 / *q as f64),
            Scalar::Approx(v) => *v,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Scalar::Approx(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            _ => None,
        }
    }

    /// `(radicand, degree)` for exact values.
    fn exact_parts(&self) -> Option<(BigRational, u32)> {
        match self {
            Scalar::Exact(r) => Some((r.clone(), 1)),
            Scalar::Root(r, q) => Some((r.clone(), *q)),
            Scalar::Approx(_) => None,
        }
    }

    /// Total order, exact whenever both sides are exact. Values are
    /// nonnegative except for `Exact` inputs, which compare as rationals.
    pub fn compare(&self, other: &Scalar) -> Ordering {
        match (self.exact_parts(), other.exact_parts()) {
            (Some((a, p)), Some((b, q))) => {
                if p == 1 && q == 1 {
                    return a.cmp(&b);
                }
                // Both nonnegative when a root is involved.
                num_traits::pow(a, q as usize).cmp(&num_traits::pow(b, p as usize))
            }
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other.compare(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    /// Multiplication by a nonnegative rational.
    pub fn scale(&self, c: &BigRational) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r * c),
            Scalar::Root(r, q) => Scalar::root(r * num_traits::pow(c.clone(), *q as usize), *q),
            Scalar::Approx(v) => Scalar::Approx(v * to_f64(c)),
        }
    }

    /// `self^q` exactly when possible.
    pub fn pow(&self, q: u32) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(num_traits::pow(r.clone(), q as usize)),
            Scalar::Root(r, d) if d % q == 0 => Scalar::root(r.clone(), d / q),
            Scalar::Root(r, d) if q.is_multiple_of(*d) => Scalar::Exact(num_traits::pow(r.clone(), (q / d) as usize)),
            _ => Scalar::Approx(self.to_f64().powi(q as i32)),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{}", fmt_rational(r)),
            Scalar::Root(r, 2) => write!(f, "sqrt({})", fmt_rational(r)),
            Scalar::Root(r, q) => write!(f, "({})^(1/{q})", fmt_rational(r)),
            Scalar::Approx(v) => write!(f, "{v}"),
        }
    }
}

/// A space with a computable norm on `c_00`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// `l_p` for rational `p >= 1`.
    Lp(BigRational),
    Linf,
    C0,
    Tsirelson(Tsirelson),
    /// The `q`-convexification of a Tsirelson space.
    Convexify(Tsirelson, BigRational),
    /// The dual of a Tsirelson space or of its convexification, restricted
    /// to vectors supported in `{1..n}`.
    Dual(Box<Space>, u64),
    /// `H_xi` over a space `H` with a 1-unconditional basis.
    HXi(Box<Space>, Ordinal),
}

/// Integer value of a rational, if it is a positive integer that fits `u32`.
pub(crate) fn small_int(r: &BigRational) -> Option<u32> {
    if r.is_integer() && r.is_positive() {
        r.to_integer().to_u32()
    } else {
        None
    }
}

impl Space {
    pub fn l(p: i64) -> Space {
        Space::Lp(BigRational::from_integer(BigInt::from(p)))
    }

    pub fn tsirelson(mu: u64, theta: BigRational) -> Result<Space> {
        Ok(Space::Tsirelson(Tsirelson::new(Ordinal::finite(mu), theta)?))
    }

    /// The Tsirelson space and convexification exponent of a dual, if any.
    pub fn tsirelson_base(&self) -> Option<(&Tsirelson, BigRational)> {
        match self {
            Space::Tsirelson(t) => Some((t, BigRational::one())),
            Space::Convexify(t, q) => Some((t, q.clone())),
            _ => None,
        }
    }

    /// Whether norms in this space are computed exactly.
    pub fn is_exact(&self) -> bool {
        match self {
            Space::Lp(p) => small_int(p).is_some(),
            Space::Linf | Space::C0 | Space::Tsirelson(_) => true,
            Space::Convexify(_, q) => small_int(q).is_some(),
            Space::Dual(b, _) => matches!(b.tsirelson_base(), Some((_, q)) if q.is_one()),
            Space::HXi(h, _) => h.is_exact(),
        }
    }

    pub fn norm(&self, x: &Vector) -> Result<Scalar> {
        match self {
            Space::Lp(p) => Ok(lp_norm(x, p)),
            Space::Linf | Space::C0 => Ok(Scalar::Exact(x.linf())),
            Space::Tsirelson(t) => Ok(Scalar::Exact(t.norm(x)?)),
            Space::Convexify(t, q) => convexified_norm(t, q, x),
            Space::Dual(..) => Ok(dual_norm(self, x)?.value()),
            Space::HXi(h, xi) => hxi::norm(h, xi, x, crate::families::DEFAULT_BUDGET),
        }
    }

    pub fn parse(text: &str) -> Result<Space> {
        parse_space(text.trim())
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Lp(p) if p.is_one() => write!(f, "l1"),
            Space::Lp(p) if *p == BigRational::from_integer(BigInt::from(2)) => write!(f, "l2"),
            Space::Lp(p) => write!(f, "lp({})", fmt_rational(p)),
            Space::Linf => write!(f, "linf"),
            Space::C0 => write!(f, "c0"),
            Space::Tsirelson(t) => write!(f, "{t}"),
            Space::Convexify(t, q) => write!(f, "conv({t},q={})", fmt_rational(q)),
            Space::Dual(b, n) => write!(f, "dual({b},N={n})"),
            Space::HXi(h, xi) => write!(f, "hxi({h},xi={xi})"),
        }
    }
}

fn lp_norm(x: &Vector, p: &BigRational) -> Scalar {
    match small_int(p) {
        Some(q) => {
            let s: BigRational = x.iter().map(|(_, a)| num_traits::pow(a.abs(), q as usize)).sum();
            Scalar::root(s, q)
        }
        None => {
            let pf = to_f64(p);
            let s: f64 = x.iter().map(|(_, a)| to_f64(&a.abs()).powf(pf)).sum();
            Scalar::Approx(s.powf(1.0 / pf))
        }
    }
}

/// `||(|x_i|^q)||_T^(1/q)`.
fn convexified_norm(t: &Tsirelson, q: &BigRational, x: &Vector) -> Result<Scalar> {
    match small_int(q) {
        Some(k) => {
            let u = Vector::from_pairs(x.iter().map(|(i, a)| (i, num_traits::pow(a.abs(), k as usize))));
            Ok(Scalar::root(t.norm(&u)?, k))
        }
        None => {
            let qf = to_f64(q);
            let u = Vector::from_pairs(x.iter().map(|(i, a)| {
                let v = to_f64(&a.abs()).powf(qf);
                (i, BigRational::from_float(v).unwrap_or_else(BigRational::zero))
            }));
            Ok(Scalar::Approx(to_f64(&t.norm(&u)?).powf(1.0 / qf)))
        }
    }
}

/// Splits `name(args)` and returns the argument text.
fn call<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    text.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')
}

/// Top-level comma split that respects parentheses.
fn split_args(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn keyed<'a>(arg: &'a str, key: &str) -> Result<&'a str> {
    arg.strip_prefix(key)
        .and_then(|r| r.trim_start().strip_prefix('='))
        .map(str::trim)
        .ok_or_else(|| Error::Parse(format!("expected {key}=..., got {arg:?}")))
}

fn parse_tsirelson(text: &str) -> Result<Tsirelson> {
    let args = call(text, "T").ok_or_else(|| Error::Parse(format!("expected T(mu=..,theta=..), got {text:?}")))?;
    let parts = split_args(args);
    let [mu, theta] = parts[..] else {
        return Err(Error::Parse(format!("expected T(mu=..,theta=..), got {text:?}")));
    };
    Tsirelson::new(Ordinal::parse(keyed(mu, "mu")?)?, parse_rational(keyed(theta, "theta")?)?)
}

fn parse_space(t: &str) -> Result<Space> {
    match t {
        "l1" => return Ok(Space::l(1)),
        "l2" => return Ok(Space::l(2)),
        "linf" => return Ok(Space::Linf),
        "c0" => return Ok(Space::C0),
        _ => {}
    }
    if let Some(a) = call(t, "lp") {
        let p = parse_rational(a)?;
        if p < BigRational::one() {
            return Err(Error::Domain("l_p needs p >= 1".into()));
        }
        return Ok(Space::Lp(p));
    }
    if t.starts_with("T(") {
        return Ok(Space::Tsirelson(parse_tsirelson(t)?));
    }
    if let Some(a) = call(t, "conv") {
        let parts = split_args(a);
        let [base, q] = parts[..] else { return Err(Error::Parse(format!("bad convexification {t:?}"))) };
        let q = parse_rational(keyed(q, "q")?)?;
        if q < BigRational::one() {
            return Err(Error::Domain("convexification needs q >= 1".into()));
        }
        return Ok(Space::Convexify(parse_tsirelson(base)?, q));
    }
    if let Some(a) = call(t, "dual") {
        let parts = split_args(a);
        let [base, n] = parts[..] else { return Err(Error::Parse(format!("bad dual {t:?}"))) };
        let base = parse_space(base)?;
        if base.tsirelson_base().is_none() {
            return Err(Error::Domain("dual() wraps T(...) or conv(T(...),q=..)".into()));
        }
        let n: u64 = keyed(n, "N")?.parse().map_err(|_| Error::Parse(format!("bad N in {t:?}")))?;
        return Ok(Space::Dual(Box::new(base), n));
    }
    if let Some(a) = call(t, "hxi") {
        let parts = split_args(a);
        let [h, xi] = parts[..] else { return Err(Error::Parse(format!("bad hxi {t:?}"))) };
        return Ok(Space::HXi(Box::new(parse_space(h)?), Ordinal::parse(keyed(xi, "xi")?)?));
    }
    Err(Error::Parse(format!("unknown space {t:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::{int, rat};

    #[test]
    fn scalar_comparisons_are_exact() {
        let s2 = Scalar::root(int(2), 2);
        assert_eq!(s2.compare(&Scalar::Exact(rat(141, 100))), Ordering::Greater);
        assert_eq!(s2.compare(&Scalar::Exact(rat(142, 100))), Ordering::Less);
        assert_eq!(Scalar::root(int(4), 2).compare(&Scalar::Exact(int(2))), Ordering::Equal);
        assert_eq!(Scalar::root(int(8), 3).compare(&Scalar::root(int(4), 2)), Ordering::Equal);
        assert_eq!(s2.pow(2), Scalar::Exact(int(2)));
        assert_eq!(s2.scale(&int(3)), Scalar::Root(int(18), 2));
    }

    #[test]
    fn lp_norms() {
        let x = Vector::from_ints(&[(1, 3), (2, -4)]);
        assert_eq!(Space::l(1).norm(&x).unwrap(), Scalar::Exact(int(7)));
        assert_eq!(Space::l(2).norm(&x).unwrap().compare(&Scalar::Exact(int(5))), Ordering::Equal);
        assert_eq!(Space::C0.norm(&x).unwrap(), Scalar::Exact(int(4)));
        let p = Space::Lp(rat(3, 2)).norm(&x).unwrap();
        assert!((p.to_f64() - (27f64.sqrt() + 8.0).powf(2.0 / 3.0)).abs() < 1e-12);
        assert!(!p.is_exact());
    }

    #[test]
    fn space_notation_round_trips() {
        for t in [
            "l1",
            "l2",
            "lp(3/2)",
            "linf",
            "c0",
            "T(mu=1,theta=1/2)",
            "conv(T(mu=w,theta=1/3),q=2)",
            "dual(T(mu=1,theta=1/2),N=10)",
            "dual(conv(T(mu=1,theta=1/2),q=2),N=6)",
            "hxi(l2,xi=1)",
            "hxi(T(mu=1,theta=1/2),xi=w)",
        ] {
            let s = Space::parse(t).unwrap();
            assert_eq!(s.to_string(), t);
        }
        assert!(Space::parse("T(mu=1,theta=2)").is_err());
        assert!(Space::parse("dual(l2,N=3)").is_err());
        assert!(Space::parse("lp(1/2)").is_err());
        assert!(Space::parse("banana").is_err());
    }

    #[test]
    fn convexification_norms() {
        let t = Tsirelson::new(Ordinal::finite(1), rat(1, 2)).unwrap();
        let x = Vector::from_ints(&[(4, 1), (5, 1), (6, 1), (7, 1)]);
        // ||(1,1,1,1)||_T = 2 on (4..7), so the 2-convexification gives sqrt(2).
        let n = Space::Convexify(t.clone(), int(2)).norm(&x).unwrap();
        assert_eq!(n, Scalar::Root(int(2), 2));
        assert_eq!(Space::Convexify(t, int(1)).norm(&x).unwrap(), Scalar::Exact(int(2)));
    }
}

//! Finitely supported vectors with exact rational coordinates.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::sets::FiniteSet;

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(p))
}

/// Parses `"3"`, `"-1/2"` or a finite decimal such as `"0.25"`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("bad rational {t:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches('-'), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    t.parse::<BigInt>().map(BigRational::from_integer).map_err(|_| bad())
}

pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// A vector `sum a_i e_i` with finitely many nonzero rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Vector {
    coords: BTreeMap<u64, BigRational>,
}

impl Vector {
    pub fn zero() -> Self {
        Vector::default()
    }

    pub fn unit(i: u64) -> Self {
        Vector::from_pairs([(i, BigRational::one())])
    }

    /// Sum of unit vectors over `f`.
    pub fn indicator(f: &FiniteSet) -> Self {
        Vector::from_pairs(f.as_slice().iter().map(|&i| (i, BigRational::one())))
    }

    /// Indices must be at least 1; zero entries are dropped and repeated
    /// indices are summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, BigRational)>) -> Self {
        let mut v = Vector::zero();
        for (i, a) in pairs {
            assert!(i >= 1, "vector indices start at 1");
            v.add_at(i, &a);
        }
        v
    }

    pub fn from_ints(pairs: &[(u64, i64)]) -> Self {
        Vector::from_pairs(pairs.iter().map(|&(i, a)| (i, int(a))))
    }

    pub fn get(&self, i: u64) -> BigRational {
        self.coords.get(&i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_at(&mut self, i: u64, a: &BigRational) {
        let e = self.coords.entry(i).or_insert_with(BigRational::zero);
        *e += a;
        if e.is_zero() {
            self.coords.remove(&i);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.coords.iter().map(|(&i, a)| (i, a))
    }

    pub fn support(&self) -> FiniteSet {
        FiniteSet::new(self.coords.keys().copied().collect()).unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    /// The smallest integer interval containing the support.
    pub fn range(&self) -> Option<(u64, u64)> {
        Some((*self.coords.keys().next()?, *self.coords.keys().next_back()?))
    }

    pub fn add(&self, other: &Vector) -> Vector {
        let mut v = self.clone();
        for (i, a) in other.iter() {
            v.add_at(i, a);
        }
        v
    }

    pub fn scale(&self, c: &BigRational) -> Vector {
        if c.is_zero() {
            return Vector::zero();
        }
        Vector { coords: self.coords.iter().map(|(&i, a)| (i, a * c)).collect() }
    }

    pub fn abs(&self) -> Vector {
        Vector { coords: self.coords.iter().map(|(&i, a)| (i, a.abs())).collect() }
    }

    pub fn dot(&self, other: &Vector) -> BigRational {
        let mut s = BigRational::zero();
        for (i, a) in self.iter() {
            if let Some(b) = other.coords.get(&i) {
                s += a * b;
            }
        }
        s
    }

    /// Restriction to indices in `lo..=hi`.
    pub fn restrict(&self, lo: u64, hi: u64) -> Vector {
        Vector { coords: self.coords.range(lo..=hi).map(|(&i, a)| (i, a.clone())).collect() }
    }

    pub fn restrict_to(&self, f: &FiniteSet) -> Vector {
        Vector { coords: self.coords.iter().filter(|(i, _)| f.contains(**i)).map(|(&i, a)| (i, a.clone())).collect() }
    }

    /// Coordinates moved from `i` to `i + k`.
    pub fn shift(&self, k: u64) -> Vector {
        Vector { coords: self.coords.iter().map(|(&i, a)| (i + k, a.clone())).collect() }
    }

    pub fn l1(&self) -> BigRational {
        self.coords.values().map(|a| a.abs()).sum()
    }

    pub fn linf(&self) -> BigRational {
        self.coords.values().map(|a| a.abs()).max().unwrap_or_else(BigRational::zero)
    }

    /// Parses `"1:1/2,3:-2"`. The empty string is the zero vector.
    pub fn parse(text: &str) -> Result<Vector> {
        let mut v = Vector::zero();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (i, a) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected index:value, got {part:?}")))?;
            let i: u64 = i.trim().parse().map_err(|_| Error::Parse(format!("bad index {i:?}")))?;
            if i == 0 {
                return Err(Error::Parse("vector indices start at 1".into()));
            }
            v.add_at(i, &parse_rational(a)?);
        }
        Ok(v)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(i, a)| format!("{i}:{}", fmt_rational(a))).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

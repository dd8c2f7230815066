//! Ordinals below epsilon-zero in Cantor normal form.
//!
//! An ordinal is stored as a list of `(exponent, coefficient)` pairs with
//! strictly decreasing exponents, so `w^2*3+w+1` is `[(2,3),(1,1),(0,1)]`.
//! Text notation uses `w` for omega; exponents that are not a plain natural
//! number or `w` are parenthesised, e.g. `w^(w+1)*2`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<(Ordinal, u64)>,
}

/// Zero / successor / limit trichotomy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Zero,
    Successor(Ordinal),
    Limit,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn finite(n: u64) -> Self {
        if n == 0 {
            Self::zero()
        } else {
            Ordinal { terms: vec![(Self::zero(), n)] }
        }
    }

    pub fn omega() -> Self {
        Self::omega_pow(Self::finite(1))
    }

    /// `w^e`.
    pub fn omega_pow(e: Ordinal) -> Self {
        Ordinal { terms: vec![(e, 1)] }
    }

    /// Builds an ordinal from CNF terms, checking the ordering invariant.
    pub fn from_terms(terms: Vec<(Ordinal, u64)>) -> Result<Self> {
        for w in terms.windows(2) {
            if w[0].0 <= w[1].0 {
                return Err(Error::Parse("exponents must strictly decrease".into()));
            }
        }
        if terms.iter().any(|t| t.1 == 0) {
            return Err(Error::Parse("coefficients must be positive".into()));
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[(Ordinal, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a natural number, if finite.
    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [(e, c)] if e.is_zero() => Some(*c),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_finite().is_some()
    }

    pub fn kind(&self) -> Kind {
        match self.terms.last() {
            None => Kind::Zero,
            Some((e, c)) if e.is_zero() => {
                let mut terms = self.terms.clone();
                if *c == 1 {
                    terms.pop();
                } else {
                    terms.last_mut().unwrap().1 = c - 1;
                }
                Kind::Successor(Ordinal { terms })
            }
            Some(_) => Kind::Limit,
        }
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::finite(1))
    }

    pub fn add(&self, b: &Ordinal) -> Ordinal {
        let Some((lead, lead_c)) = b.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<(Ordinal, u64)> = Vec::new();
        let mut carry = 0;
        for (e, c) in &self.terms {
            match e.cmp(lead) {
                Ordering::Greater => terms.push((e.clone(), *c)),
                Ordering::Equal => carry = *c,
                Ordering::Less => break,
            }
        }
        terms.push((lead.clone(), lead_c + carry));
        terms.extend(b.terms[1..].iter().cloned());
        Ordinal { terms }
    }

    pub fn mul(&self, b: &Ordinal) -> Ordinal {
        if self.is_zero() || b.is_zero() {
            return Ordinal::zero();
        }
        let (a_lead, a_c) = &self.terms[0];
        let mut out = Ordinal::zero();
        for (e, c) in &b.terms {
            let piece = if e.is_zero() {
                let mut terms = self.terms.clone();
                terms[0].1 = a_c * c;
                Ordinal { terms }
            } else {
                Ordinal { terms: vec![(a_lead.add(e), *c)] }
            };
            out = out.add(&piece);
        }
        out
    }

    /// The `n`-th term of the canonical fundamental sequence of a limit ordinal.
    pub fn fundamental(&self, n: u64) -> Result<Ordinal> {
        if self.kind() != Kind::Limit {
            return Err(Error::Domain(format!("{self} is not a limit ordinal")));
        }
        let mut terms = self.terms.clone();
        let (gamma, c) = terms.pop().unwrap();
        if c > 1 {
            terms.push((gamma.clone(), c - 1));
        }
        let tail = match gamma.kind() {
            Kind::Successor(delta) => Ordinal::omega_pow(delta).mul(&Ordinal::finite(n)),
            Kind::Limit => Ordinal::omega_pow(gamma.fundamental(n)?),
            Kind::Zero => unreachable!(),
        };
        Ok(Ordinal { terms }.add(&tail))
    }

    pub fn parse(text: &str) -> Result<Ordinal> {
        let mut p = Parser { s: text.as_bytes(), i: 0 };
        let o = p.expr()?;
        p.skip_ws();
        if p.i != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(o)
    }

    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let simple = self.is_finite() || *self == Ordinal::omega();
        if simple {
            write!(f, "{self}")
        } else {
            write!(f, "({self})")
        }
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(other.terms.iter()) {
            let o = a.0.cmp(&b.0).then(a.1.cmp(&b.1));
            if o != Ordering::Equal {
                return o;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if e.is_zero() {
                write!(f, "{c}")?;
                continue;
            }
            write!(f, "w")?;
            if *e != Ordinal::finite(1) {
                write!(f, "^")?;
                e.fmt_atom(f)?;
            }
            if *c > 1 {
                write!(f, "*{c}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ordinal({self})")
    }
}

impl std::str::FromStr for Ordinal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ordinal::parse(s)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("ordinal: {msg} at offset {}", self.i))
    }

    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn nat(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if start == self.i {
            return Err(self.err("expected a natural number"));
        }
        std::str::from_utf8(&self.s[start..self.i])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number too large"))
    }

    fn expr(&mut self) -> Result<Ordinal> {
        let mut terms: Vec<(Ordinal, u64)> = Vec::new();
        loop {
            if let Some((e, c)) = self.term()? {
                if let Some(last) = terms.last() {
                    if last.0 <= e {
                        return Err(self.err("exponents must strictly decrease"));
                    }
                }
                terms.push((e, c));
            } else if !terms.is_empty() {
                return Err(self.err("0 may only appear alone"));
            }
            if !self.eat(b'+') {
                break;
            }
        }
        Ok(Ordinal { terms })
    }

    /// Returns `None` for the literal `0`.
    fn term(&mut self) -> Result<Option<(Ordinal, u64)>> {
        match self.peek() {
            Some(b'w') => {
                self.i += 1;
                let e = if self.eat(b'^') { self.atom()? } else { Ordinal::finite(1) };
                let c = if self.eat(b'*') { self.nat()? } else { 1 };
                if c == 0 {
                    return Err(self.err("coefficient must be positive"));
                }
                if e.is_zero() {
                    return Ok(Some((Ordinal::zero(), c)));
                }
                Ok(Some((e, c)))
            }
            Some(b'0'..=b'9') => {
                let n = self.nat()?;
                Ok(if n == 0 { None } else { Some((Ordinal::zero(), n)) })
            }
            _ => Err(self.err("expected a term")),
        }
    }

    fn atom(&mut self) -> Result<Ordinal> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let o = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(o)
            }
            Some(b'w') => {
                self.i += 1;
                if self.eat(b'^') {
                    Ok(Ordinal::omega_pow(self.atom()?))
                } else {
                    Ok(Ordinal::omega())
                }
            }
            _ => Ok(Ordinal::finite(self.nat()?)),
        }
    }
}

/// All ordinals below `w^3` with coefficients at most `max_c` and at most
/// `max_terms` terms. Used for exhaustive law checks.
pub fn enumerate_below_w3(max_c: u64, max_terms: usize) -> Vec<Ordinal> {
    let exps = [Ordinal::finite(2), Ordinal::finite(1), Ordinal::zero()];
    let mut out = vec![Ordinal::zero()];
    fn rec(
        exps: &[Ordinal],
        max_c: u64,
        left: usize,
        cur: &mut Vec<(Ordinal, u64)>,
        out: &mut Vec<Ordinal>,
    ) {
        if left == 0 {
            return;
        }
        for (i, e) in exps.iter().enumerate() {
            for c in 1..=max_c {
                cur.push((e.clone(), c));
                out.push(Ordinal { terms: cur.clone() });
                rec(&exps[i + 1..], max_c, left - 1, cur, out);
                cur.pop();
            }
        }
    }
    rec(&exps, max_c, max_terms, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert!(o("0").is_zero());
        let a = o("w^2*3+w+1");
        assert_eq!(a.terms().len(), 3);
        assert_eq!(a.to_string(), "w^2*3+w+1");
        assert!(Ordinal::parse("w+w^2").is_err());
        assert!(Ordinal::parse("w+w").is_err());
        assert!(Ordinal::parse("1+").is_err());
        assert_eq!(o("w^(w+1)*2").to_string(), "w^(w+1)*2");
        assert_eq!(o("w^w^2"), Ordinal::omega_pow(Ordinal::omega_pow(Ordinal::finite(2))));
    }

    #[test]
    fn addition_examples() {
        let w = Ordinal::omega();
        assert_eq!(Ordinal::zero().add(&w), w);
        assert_eq!(Ordinal::finite(1).add(&w), w);
        assert_eq!(o("w*2+3").add(&w), o("w*3"));
        assert_eq!(w.add(&Ordinal::finite(1)), o("w+1"));
    }

    #[test]
    fn multiplication_examples() {
        let w = Ordinal::omega();
        assert_eq!(w.mul(&w), o("w^2"));
        assert_eq!(o("w+1").mul(&Ordinal::finite(2)), o("w*2+1"));
        assert_eq!(Ordinal::finite(2).mul(&w), w);
        assert_eq!(o("w^2+w").mul(&o("w+3")), o("w^3+w^2*3+w"));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(Ordinal::zero().kind(), Kind::Zero);
        assert_eq!(o("w+3").kind(), Kind::Successor(o("w+2")));
        assert_eq!(o("w^2").kind(), Kind::Limit);
    }

    #[test]
    fn fundamental_examples() {
        assert_eq!(o("w").fundamental(5).unwrap(), o("5"));
        assert_eq!(o("w^2").fundamental(3).unwrap(), o("w*3"));
        assert_eq!(o("w^w").fundamental(2).unwrap(), o("w^2"));
        assert_eq!(o("w*3").fundamental(2).unwrap(), o("w*2+2"));
        assert!(o("w+1").fundamental(1).is_err());
        assert!(Ordinal::zero().fundamental(1).is_err());
    }

    #[test]
    fn add_is_associative_with_identity() {
        let all = enumerate_below_w3(2, 2);
        for a in &all {
            assert_eq!(a.add(&Ordinal::zero()), *a);
            assert_eq!(Ordinal::zero().add(a), *a);
            for b in &all {
                for c in all.iter().step_by(3) {
                    assert_eq!(a.add(b).add(c), a.add(&b.add(c)));
                }
            }
        }
    }

    #[test]
    fn mul_left_distributes() {
        let all = enumerate_below_w3(2, 2);
        for a in all.iter().step_by(2) {
            for b in &all {
                for c in all.iter().step_by(3) {
                    assert_eq!(a.mul(&b.add(c)), a.mul(b).add(&a.mul(c)), "{a} {b} {c}");
                }
            }
        }
    }

    #[test]
    fn operations_monotone_in_right_argument() {
        let mut all = enumerate_below_w3(2, 2);
        all.sort();
        for a in all.iter().step_by(2) {
            for w in all.windows(2) {
                assert!(a.add(&w[0]) <= a.add(&w[1]));
                assert!(a.mul(&w[0]) <= a.mul(&w[1]));
            }
        }
    }

    #[test]
    fn fundamental_sequences_increase_to_limit() {
        let limits: Vec<Ordinal> = enumerate_below_w3(3, 3)
            .into_iter()
            .chain(["w^w", "w^w*2+w^3", "w^w*4+w", "w^(w+1)"].iter().map(|s| o(s)))
            .filter(|a| a.kind() == Kind::Limit)
            .collect();
        for lam in &limits {
            for n in 1..=20 {
                let a = lam.fundamental(n).unwrap();
                let b = lam.fundamental(n + 1).unwrap();
                assert!(a < b && b < *lam, "{lam} at {n}");
            }
        }
    }

    #[test]
    fn format_parse_round_trip_exhaustive() {
        let all = enumerate_below_w3(10, 3);
        assert!(all.len() >= 1000);
        for a in all.iter().take(1000) {
            assert_eq!(Ordinal::parse(&a.to_string()).unwrap(), *a);
        }
    }

    fn arb_ordinal() -> impl Strategy<Value = Ordinal> {
        let leaf = (0u64..4).prop_map(Ordinal::finite);
        leaf.prop_recursive(3, 16, 3, |inner| {
            prop::collection::vec((inner, 1u64..4), 1..4).prop_map(|mut ts| {
                ts.sort_by(|a, b| b.0.cmp(&a.0));
                ts.dedup_by(|a, b| a.0 == b.0);
                Ordinal { terms: ts.into_iter().collect() }
                    .normalized()
            })
        })
    }

    impl Ordinal {
        fn normalized(self) -> Ordinal {
            self.terms
                .into_iter()
                .fold(Ordinal::zero(), |acc, (e, c)| {
                    acc.add(&Ordinal::omega_pow(e).mul(&Ordinal::finite(c)))
                })
        }
    }

    proptest! {
        #[test]
        fn round_trip(a in arb_ordinal()) {
            prop_assert_eq!(Ordinal::parse(&a.to_string()).unwrap(), a);
        }

        #[test]
        fn add_monotone(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
            let (lo, hi) = if b <= c { (b, c) } else { (c, b) };
            prop_assert!(a.add(&lo) <= a.add(&hi));
            prop_assert!(a <= a.add(&lo));
        }

        #[test]
        fn classify_consistent(a in arb_ordinal()) {
            match a.kind() {
                Kind::Zero => prop_assert!(a.is_zero()),
                Kind::Successor(p) => prop_assert_eq!(p.succ(), a),
                Kind::Limit => {
                    let x = a.fundamental(1).unwrap();
                    prop_assert!(x < a);
                    prop_assert!(x.succ() < a);
                }
            }
        }
    }
}

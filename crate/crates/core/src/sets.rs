//! Finite sets of positive integers and infinite sets given by a prefix.

use std::fmt;

use crate::error::{Error, Result};

/// A strictly increasing finite sequence of positive integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FiniteSet(Vec<u64>);

impl FiniteSet {
    pub fn empty() -> Self {
        FiniteSet(Vec::new())
    }

    pub fn new(elements: Vec<u64>) -> Result<Self> {
        if elements.first() == Some(&0) {
            return Err(Error::Domain("set elements must be positive".into()));
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("set elements must strictly increase".into()));
        }
        Ok(FiniteSet(elements))
    }

    /// Sorts and deduplicates; panics on zero.
    pub fn from_unsorted(mut elements: Vec<u64>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        assert!(elements.first() != Some(&0), "set elements must be positive");
        FiniteSet(elements)
    }

    pub fn range(lo: u64, hi: u64) -> Self {
        FiniteSet((lo.max(1)..=hi).collect())
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> Option<u64> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn is_subset(&self, other: &FiniteSet) -> bool {
        self.0.iter().all(|&x| other.contains(x))
    }

    /// `self < other`: every element of self is below every element of other.
    pub fn precedes(&self, other: &FiniteSet) -> bool {
        match (self.max(), other.min()) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        }
    }

    /// Appends `x`, which must exceed the current maximum.
    pub fn push(&self, x: u64) -> FiniteSet {
        debug_assert!(self.max().is_none_or(|m| m < x));
        let mut v = self.0.clone();
        v.push(x);
        FiniteSet(v)
    }

    pub fn union(&self, other: &FiniteSet) -> FiniteSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        FiniteSet::from_unsorted(v)
    }

    pub fn minus(&self, other: &FiniteSet) -> FiniteSet {
        FiniteSet(self.0.iter().copied().filter(|&x| !other.contains(x)).collect())
    }

    pub fn is_initial_segment_of(&self, other: &FiniteSet) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Parses `"3,5,9"`; the empty string is the empty set.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim().trim_start_matches('(').trim_end_matches(')');
        let t = t.trim_start_matches('{').trim_end_matches('}').trim();
        if t.is_empty() {
            return Ok(FiniteSet::empty());
        }
        let v = t
            .split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad set element {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        FiniteSet::new(v)
    }
}

impl fmt::Display for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Whether `f` is a spread of `g`: equal length and `f(n) >= g(n)` pointwise.
pub fn is_spread(f: &FiniteSet, g: &FiniteSet) -> Result<bool> {
    if f.len() != g.len() {
        return Err(Error::Domain("spread comparison needs equal lengths".into()));
    }
    Ok(f.0.iter().zip(g.0.iter()).all(|(a, b)| a >= b))
}

/// How an infinite set continues past its explicit elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    /// `start, start+step, start+2*step, ...`
    Arithmetic { start: u64, step: u64 },
    /// `start, start*factor, start*factor^2, ...`
    Geometric { start: u64, factor: u64 },
}

impl Tail {
    fn nth(&self, j: u64) -> Option<u64> {
        match *self {
            Tail::Arithmetic { start, step } => step.checked_mul(j)?.checked_add(start),
            Tail::Geometric { start, factor } => {
                let p = u32::try_from(j).ok().and_then(|j| factor.checked_pow(j))?;
                start.checked_mul(p)
            }
        }
    }

    /// Position of `x` in the tail, if it occurs.
    fn position(&self, x: u64) -> Option<u64> {
        match *self {
            Tail::Arithmetic { start, step } => {
                (x >= start && (x - start).is_multiple_of(step)).then(|| (x - start) / step)
            }
            Tail::Geometric { start, factor } => {
                let (mut v, mut j) = (start, 0);
                while v < x {
                    v = v.checked_mul(factor)?;
                    j += 1;
                }
                (v == x).then_some(j)
            }
        }
    }
}

/// An infinite subset of the positive integers, known through an explicit
/// prefix and an optional generating tail. Without a tail the set is only
/// partially known and asking for missing elements is an error.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Prefix {
    explicit: Vec<u64>,
    tail: Option<Tail>,
    /// Number of tail elements skipped.
    skip: u64,
}

impl Prefix {
    pub fn new(explicit: Vec<u64>, tail: Option<Tail>) -> Result<Self> {
        FiniteSet::new(explicit.clone())?;
        if let Some(t) = &tail {
            match *t {
                Tail::Arithmetic { start, step } if start == 0 || step == 0 => {
                    return Err(Error::Domain("arithmetic tail needs positive start and step".into()))
                }
                Tail::Geometric { start, factor } if start == 0 || factor < 2 => {
                    return Err(Error::Domain("geometric tail needs start >= 1, factor >= 2".into()))
                }
                _ => {}
            }
            let first = t.nth(0).unwrap();
            if explicit.last().is_some_and(|&l| first <= l) {
                return Err(Error::Domain("tail must start above the explicit elements".into()));
            }
        }
        let mut p = Prefix { explicit, tail, skip: 0 };
        p.normalize();
        Ok(p)
    }

    /// `head` followed by this set. `head` must lie below every element.
    pub fn prepend(&self, head: &[u64]) -> Result<Prefix> {
        let mut explicit = head.to_vec();
        explicit.extend_from_slice(&self.explicit[..]);
        FiniteSet::new(explicit.clone())?;
        if let (Some(&last), Ok(first)) = (head.last(), self.at(0)) {
            if first <= last {
                return Err(Error::Domain("prepended elements must precede the set".into()));
            }
        }
        Ok(Prefix { explicit, tail: self.tail.clone(), skip: self.skip })
    }

    /// Moves explicit elements that the tail would generate into the tail,
    /// so equal sets built through different notations compare equal.
    fn normalize(&mut self) {
        let Some(t) = self.tail.as_mut() else { return };
        while let Some(&last) = self.explicit.last() {
            let prev = match *t {
                Tail::Arithmetic { start, step } => start.checked_sub(step).filter(|&v| v > 0),
                Tail::Geometric { start, factor } => (start % factor == 0).then(|| start / factor),
            };
            if prev != Some(last) {
                break;
            }
            match t {
                Tail::Arithmetic { start, .. } | Tail::Geometric { start, .. } => *start = last,
            }
            self.explicit.pop();
        }
    }

    pub fn finite(set: &FiniteSet) -> Self {
        Prefix { explicit: set.as_slice().to_vec(), tail: None, skip: 0 }
    }

    /// `start, start+step, ...` with no explicit part.
    pub fn arithmetic(start: u64, step: u64) -> Self {
        Prefix::new(Vec::new(), Some(Tail::Arithmetic { start, step })).expect("valid tail")
    }

    /// All positive integers.
    pub fn naturals() -> Self {
        Prefix::arithmetic(1, 1)
    }

    pub fn explicit(&self) -> &[u64] {
        &self.explicit
    }

    pub fn tail(&self) -> Option<&Tail> {
        self.tail.as_ref()
    }

    pub fn is_infinite(&self) -> bool {
        self.tail.is_some()
    }

    /// Number of known elements, if finite.
    pub fn known_len(&self) -> Option<u64> {
        if self.tail.is_some() {
            None
        } else {
            Some(self.explicit.len() as u64)
        }
    }

    /// The element at 0-based position `i`.
    pub fn at(&self, i: u64) -> Result<u64> {
        let n = self.explicit.len() as u64;
        if i < n {
            return Ok(self.explicit[i as usize]);
        }
        match &self.tail {
            Some(t) => t
                .nth(self.skip + (i - n))
                .ok_or_else(|| Error::InsufficientPrefix(format!("element {} overflows", i + 1))),
            None => Err(Error::InsufficientPrefix(format!(
                "element {} requested but only {} known",
                i + 1,
                n
            ))),
        }
    }

    /// `M(n)` with 1-based `n`.
    pub fn get(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::Domain("positions are 1-based".into()));
        }
        self.at(n - 1)
    }

    /// The first `k` elements.
    pub fn take(&self, k: u64) -> Result<Vec<u64>> {
        (0..k).map(|i| self.at(i)).collect()
    }

    /// Elements at positions `from..to` (0-based, half open).
    pub fn slice(&self, from: u64, to: u64) -> Result<Vec<u64>> {
        (from..to).map(|i| self.at(i)).collect()
    }

    /// Position (0-based) of `x`, or `None` if `x` is not an element.
    /// Errors when membership cannot be decided from the known prefix.
    pub fn position(&self, x: u64) -> Result<Option<u64>> {
        if let Ok(i) = self.explicit.binary_search(&x) {
            return Ok(Some(i as u64));
        }
        let n = self.explicit.len() as u64;
        match &self.tail {
            None => {
                if self.explicit.last().is_some_and(|&l| l >= x) {
                    Ok(None)
                } else {
                    Err(Error::InsufficientPrefix(format!("membership of {x} is unknown")))
                }
            }
            Some(t) => {
                if self.explicit.last().is_some_and(|&l| l >= x) {
                    return Ok(None);
                }
                Ok(t.position(x).and_then(|j| j.checked_sub(self.skip)).map(|j| n + j))
            }
        }
    }

    pub fn contains(&self, x: u64) -> Result<bool> {
        Ok(self.position(x)?.is_some())
    }

    /// The set with its first `k` elements removed.
    pub fn drop_first(&self, k: u64) -> Prefix {
        let n = self.explicit.len() as u64;
        if k <= n {
            Prefix { explicit: self.explicit[k as usize..].to_vec(), tail: self.tail.clone(), skip: self.skip }
        } else {
            let skip = if self.tail.is_some() { self.skip + (k - n) } else { 0 };
            Prefix { explicit: Vec::new(), tail: self.tail.clone(), skip }
        }
    }

    /// The set with the finite set `e` removed.
    pub fn minus(&self, e: &FiniteSet) -> Result<Prefix> {
        let Some(top) = e.max() else { return Ok(self.clone()) };
        let mut explicit = Vec::new();
        let mut i = 0;
        loop {
            let x = match self.at(i) {
                Ok(x) => x,
                Err(_) if self.tail.is_none() => break,
                Err(err) => return Err(err),
            };
            if !e.contains(x) {
                explicit.push(x);
            }
            i += 1;
            if x >= top {
                break;
            }
        }
        let rest = self.drop_first(i);
        explicit.extend_from_slice(&rest.explicit);
        Ok(Prefix { explicit, tail: rest.tail, skip: rest.skip })
    }

    /// `M(F) = (M(n))_{n in F}`.
    pub fn image(&self, f: &FiniteSet) -> Result<FiniteSet> {
        let v = f.as_slice().iter().map(|&n| self.get(n)).collect::<Result<Vec<_>>>()?;
        Ok(FiniteSet(v))
    }

    /// The positions (1-based) of the elements of `g`, which must lie in `M`.
    /// Returns `None` if some element is not in `M`.
    pub fn preimage(&self, g: &FiniteSet) -> Result<Option<FiniteSet>> {
        let mut v = Vec::with_capacity(g.len());
        for &x in g.as_slice() {
            match self.position(x)? {
                Some(i) => v.push(i + 1),
                None => return Ok(None),
            }
        }
        Ok(Some(FiniteSet(v)))
    }

    /// Longest initial segment of `s` contained in this set.
    pub fn contained_prefix_len(&self, s: &[u64]) -> Result<usize> {
        for (i, &x) in s.iter().enumerate() {
            if !self.contains(x)? {
                return Ok(i);
            }
        }
        Ok(s.len())
    }

    /// Parses `"2,4,6"`, `"2-9"` ranges and an optional trailing `...`
    /// (arithmetic continuation with the last step) or `...x3` (geometric
    /// continuation with factor 3).
    pub fn parse(text: &str) -> Result<Prefix> {
        let mut explicit = Vec::new();
        let mut tail_spec: Option<&str> = None;
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if tail_spec.is_some() {
                return Err(Error::Parse("'...' must come last".into()));
            }
            if let Some(rest) = part.strip_prefix("...") {
                tail_spec = Some(rest);
                continue;
            }
            if let Some((a, b)) = part.split_once('-') {
                let a: u64 = a.trim().parse().map_err(|_| Error::Parse(format!("bad range {part:?}")))?;
                let b: u64 = b.trim().parse().map_err(|_| Error::Parse(format!("bad range {part:?}")))?;
                explicit.extend(a..=b);
            } else {
                explicit.push(part.parse().map_err(|_| Error::Parse(format!("bad element {part:?}")))?);
            }
        }
        let tail = match tail_spec {
            None => None,
            Some(rest) => {
                let last = *explicit.last().ok_or_else(|| Error::Parse("'...' needs elements".into()))?;
                if rest.is_empty() {
                    let step = if explicit.len() >= 2 { last - explicit[explicit.len() - 2] } else { 1 };
                    Some(Tail::Arithmetic { start: last + step, step })
                } else {
                    let factor: u64 = rest
                        .trim_start_matches('x')
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad geometric tail {rest:?}")))?;
                    Some(Tail::Geometric { start: last * factor, factor })
                }
            }
        };
        Prefix::new(explicit, tail)
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let extra = match self.tail {
            None => 0,
            Some(Tail::Arithmetic { .. }) => 2,
            Some(Tail::Geometric { .. }) => 1,
        };
        let known = self.explicit.len() as u64;
        let v = self.take(known + extra).unwrap_or_else(|_| self.explicit.clone());
        let parts: Vec<String> = v.iter().map(u64::to_string).collect();
        write!(f, "{}", parts.join(","))?;
        match self.tail {
            Some(Tail::Arithmetic { .. }) => write!(f, ",..."),
            Some(Tail::Geometric { factor, .. }) => write!(f, ",...x{factor}"),
            None => Ok(()),
        }
    }
}

//! Membership, maximality, decomposition and rank oracles for hereditary,
//! spreading families of finite subsets of the positive integers.
//!
//! Every built-in family is hereditary, so membership of the initial segments
//! of a sequence is monotone. The engine therefore computes, for a sequence
//! `s`, the length of the longest initial segment of `s` in the family; plain
//! membership is the special case where that length is `s.len()`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::num::NonZeroUsize;
use std::sync::{Arc, OnceLock};

use lru::LruCache;
use parking_lot::Mutex;

use crate::error::{Error, Result};
use crate::ordinal::{Kind, Ordinal};
use crate::sets::{FiniteSet, Prefix};

/// Default bound on recursive subproblems per oracle call.
pub const DEFAULT_BUDGET: u64 = 10_000_000;
const DEFAULT_CACHE: usize = 1 << 16;
const MAX_CACHED_LEN: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Family {
    /// Fine Schreier family `F_xi`.
    Fine(Ordinal),
    /// All finite sets (the fine family indexed by the first uncountable ordinal).
    AllFinite,
    /// Schreier family `S_xi`.
    Schreier(Ordinal),
    /// The empty set and singletons.
    Singletons,
    /// `F[P]`.
    Compose(Box<Family>, Box<Family>),
    /// `F^M[P]`.
    ComposeRel(Box<Family>, Box<Family>, Prefix),
    /// `F(M) = {M(F) : F in F}`.
    Image(Box<Family>, Prefix),
    /// Members of `F` contained in `M`.
    Restrict(Box<Family>, Prefix),
    /// `{F u G : F < G, F in f, G in g}`.
    Pair(Box<Family>, Box<Family>),
    /// `F^{(x)m}` with `F^{(x)1} = F`, `F^{(x)m+1} = F[F^{(x)m}]`.
    TensorPow(Box<Family>, u32),
    Explicit(Arc<ExplicitFamily>),
}

impl Family {
    pub fn fine(n: u64) -> Family {
        Family::Fine(Ordinal::finite(n))
    }

    pub fn schreier(n: u64) -> Family {
        Family::Schreier(Ordinal::finite(n))
    }

    pub fn compose(outer: Family, inner: Family) -> Family {
        Family::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn compose_rel(outer: Family, inner: Family, m: Prefix) -> Family {
        Family::ComposeRel(Box::new(outer), Box::new(inner), m)
    }

    pub fn image(f: Family, m: Prefix) -> Family {
        Family::Image(Box::new(f), m)
    }

    pub fn restrict(f: Family, m: Prefix) -> Family {
        Family::Restrict(Box::new(f), m)
    }

    pub fn pair(f: Family, g: Family) -> Family {
        Family::Pair(Box::new(f), Box::new(g))
    }

    pub fn tensor_pow(f: Family, m: u32) -> Family {
        Family::TensorPow(Box::new(f), m.max(1))
    }

    /// The set every member must be contained in, for relative families.
    pub fn ground(&self) -> Option<&Prefix> {
        match self {
            Family::ComposeRel(_, _, m) | Family::Image(_, m) | Family::Restrict(_, m) => Some(m),
            Family::Compose(_, p) => p.ground(),
            Family::Pair(f, g) => g.ground().or_else(|| f.ground()),
            Family::TensorPow(f, _) => f.ground(),
            _ => None,
        }
    }

    pub fn parse(text: &str) -> Result<Family> {
        parse_family(text.trim())
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Fine(o) => write!(f, "F({o})"),
            Family::AllFinite => write!(f, "F(w1)"),
            Family::Schreier(o) => write!(f, "S({o})"),
            Family::Singletons => write!(f, "SING"),
            Family::Compose(a, b) => write!(f, "C({a},{b})"),
            Family::ComposeRel(a, b, m) => write!(f, "CM({a},{b};{m})"),
            Family::Image(a, m) => write!(f, "IMG({a};{m})"),
            Family::Restrict(a, m) => write!(f, "RES({a};{m})"),
            Family::Pair(a, b) => write!(f, "PAIR({a},{b})"),
            Family::TensorPow(a, m) => write!(f, "POW({a},{m})"),
            Family::Explicit(e) => {
                write!(f, "X(")?;
                for (i, s) in e.sets.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    let parts: Vec<String> = s.as_slice().iter().map(u64::to_string).collect();
                    write!(f, "{}", parts.join(","))?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A finite hereditary family given by its members.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExplicitFamily {
    sets: BTreeSet<FiniteSet>,
    ground: u64,
    spreading: bool,
}

impl ExplicitFamily {
    /// Checks heredity. `ground` bounds the extension search used for
    /// maximality when the family is not declared spreading.
    pub fn new(sets: impl IntoIterator<Item = FiniteSet>, ground: u64, spreading: bool) -> Result<Self> {
        let sets: BTreeSet<FiniteSet> = sets.into_iter().collect();
        for s in &sets {
            for skip in 0..s.len() {
                let mut v = s.as_slice().to_vec();
                v.remove(skip);
                if !sets.contains(&FiniteSet::new(v).unwrap()) {
                    return Err(Error::Domain(format!("explicit family is not hereditary at {s}")));
                }
            }
        }
        if !sets.is_empty() && !sets.contains(&FiniteSet::empty()) {
            return Err(Error::Domain("explicit family is not hereditary at the empty set".into()));
        }
        let top = sets.iter().filter_map(FiniteSet::max).max().unwrap_or(0);
        Ok(ExplicitFamily { sets, ground: ground.max(top), spreading })
    }

    pub fn sets(&self) -> &BTreeSet<FiniteSet> {
        &self.sets
    }

    pub fn ground(&self) -> u64 {
        self.ground
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn contains(&self, f: &FiniteSet) -> bool {
        self.sets.contains(f)
    }

    pub fn into_family(self) -> Family {
        Family::Explicit(Arc::new(self))
    }
}

/// Membership oracle with a bounded memo table and a per-call budget.
pub struct Oracle {
    cache: Mutex<LruCache<(Family, Vec<u64>), usize>>,
    budget: u64,
}

struct Ctx<'a> {
    oracle: &'a Oracle,
    steps: u64,
}

impl Ctx<'_> {
    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.oracle.budget {
            return Err(Error::BudgetExceeded(format!(
                "family oracle exceeded {} subproblems",
                self.oracle.budget
            )));
        }
        Ok(())
    }
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle::new(DEFAULT_CACHE, DEFAULT_BUDGET)
    }
}

impl Oracle {
    pub fn new(cache_capacity: usize, budget: u64) -> Self {
        let cap = NonZeroUsize::new(cache_capacity.max(1)).unwrap();
        Oracle { cache: Mutex::new(LruCache::new(cap)), budget }
    }

    /// Shared oracle with default settings. The budget can be set through
    /// the `SCHREIER_BUDGET` environment variable.
    pub fn global() -> &'static Oracle {
        static GLOBAL: OnceLock<Oracle> = OnceLock::new();
        GLOBAL.get_or_init(|| {
            let budget = std::env::var("SCHREIER_BUDGET")
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(DEFAULT_BUDGET);
            Oracle::new(DEFAULT_CACHE, budget)
        })
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    fn ctx(&self) -> Ctx<'_> {
        Ctx { oracle: self, steps: 0 }
    }

    /// Length of the longest initial segment of `s` belonging to `fam`.
    pub fn longest(&self, fam: &Family, s: &[u64]) -> Result<usize> {
        longest(&mut self.ctx(), fam, s)
    }

    pub fn contains(&self, fam: &Family, f: &FiniteSet) -> Result<bool> {
        Ok(self.longest(fam, f.as_slice())? == f.len())
    }

    /// Whether `f` is a maximal member. Errors if `f` is not a member.
    pub fn is_maximal(&self, fam: &Family, f: &FiniteSet) -> Result<bool> {
        if !self.contains(fam, f)? {
            return Err(Error::Domain(format!("{f} is not a member of {fam}")));
        }
        if let Family::Explicit(e) = fam {
            if !e.spreading {
                for n in 1..=e.ground {
                    if !f.contains(n) && e.contains(&f.union(&FiniteSet::new(vec![n]).unwrap())) {
                        return Ok(false);
                    }
                }
                return Ok(true);
            }
        }
        let next = match fam.ground() {
            Some(m) => match f.max() {
                None => m.get(1)?,
                Some(top) => next_element_after(m, top)?,
            },
            None => f.max().map_or(1, |x| x + 1),
        };
        Ok(!self.contains(fam, &f.push(next))?)
    }

    /// `M|F`: the longest initial segment of `M` in the family.
    pub fn initial_segment(&self, fam: &Family, m: &Prefix) -> Result<FiniteSet> {
        let mut len: u64 = 16;
        loop {
            let (avail, exhausted) = match m.known_len() {
                Some(k) if k <= len => (k, true),
                _ => (len, false),
            };
            let elems = m.take(avail)?;
            let k = self.longest(fam, &elems)?;
            if k < elems.len() {
                return Ok(FiniteSet::new(elems[..k].to_vec()).unwrap());
            }
            if exhausted {
                return Err(Error::InsufficientPrefix(format!(
                    "every known initial segment of the prefix lies in {fam}"
                )));
            }
            if len > (1 << 24) {
                return Err(Error::BudgetExceeded("initial segment longer than 2^24".into()));
            }
            len *= 2;
        }
    }

    /// The unique partition of `f` into successive maximal members.
    pub fn decompose(&self, p: &Family, f: &FiniteSet) -> Result<Vec<FiniteSet>> {
        let s = f.as_slice();
        let mut blocks = Vec::new();
        let mut pos = 0;
        while pos < s.len() {
            let k = self.longest(p, &s[pos..])?;
            if k == 0 {
                return Err(Error::NotDecomposable);
            }
            let block = FiniteSet::new(s[pos..pos + k].to_vec()).unwrap();
            if !self.is_maximal(p, &block)? {
                return Err(Error::NotDecomposable);
            }
            blocks.push(block);
            pos += k;
        }
        Ok(blocks)
    }

    /// All members contained in `{1..n}`.
    pub fn materialize(&self, fam: &Family, n: u64, budget: usize) -> Result<ExplicitFamily> {
        let mut out = Vec::new();
        let mut stack = vec![FiniteSet::empty()];
        if !self.contains(fam, &FiniteSet::empty())? {
            return ExplicitFamily::new(Vec::new(), n, true);
        }
        while let Some(f) = stack.pop() {
            if out.len() >= budget {
                return Err(Error::BudgetExceeded(format!("materialization exceeds {budget} sets")));
            }
            let start = FiniteSet::max(&f).map_or(1, |x| x + 1);
            for x in start..=n {
                let g = f.push(x);
                if self.contains(fam, &g)? {
                    stack.push(g);
                }
            }
            out.push(f);
        }
        ExplicitFamily::new(out, n, true)
    }

    /// Smallest `l` such that every member of `F_zeta` above `l` within
    /// `{1..n}` lies in `F_xi`. `None` if only the vacuous `l = n` works.
    pub fn almost_monotone_threshold(&self, zeta: &Ordinal, xi: &Ordinal, n: u64) -> Result<Option<u64>> {
        let lower = self.materialize(&Family::Fine(zeta.clone()), n, 1 << 22)?;
        let upper = Family::Fine(xi.clone());
        let mut l = 0;
        for f in lower.sets() {
            if !self.contains(&upper, f)? {
                l = l.max(f.min().unwrap());
            }
        }
        Ok((l < n).then_some(l))
    }
}

fn next_element_after(m: &Prefix, top: u64) -> Result<u64> {
    match m.position(top)? {
        Some(i) => m.at(i + 1),
        None => {
            let mut i = 0;
            loop {
                let x = m.at(i)?;
                if x > top {
                    return Ok(x);
                }
                i += 1;
            }
        }
    }
}

fn cached(ctx: &mut Ctx<'_>, fam: &Family, s: &[u64]) -> Option<usize> {
    if s.len() > MAX_CACHED_LEN {
        return None;
    }
    ctx.oracle.cache.lock().get(&(fam.clone(), s.to_vec())).copied()
}

fn store(ctx: &mut Ctx<'_>, fam: &Family, s: &[u64], v: usize) {
    if s.len() <= MAX_CACHED_LEN {
        ctx.oracle.cache.lock().put((fam.clone(), s.to_vec()), v);
    }
}

fn longest(ctx: &mut Ctx<'_>, fam: &Family, s: &[u64]) -> Result<usize> {
    ctx.tick()?;
    if s.is_empty() {
        return Ok(0);
    }
    match fam {
        Family::AllFinite => Ok(s.len()),
        Family::Singletons => Ok(1),
        Family::Fine(xi) => {
            if let Some(n) = xi.as_finite() {
                return Ok(s.len().min(n as usize));
            }
            if let Some(v) = cached(ctx, fam, s) {
                return Ok(v);
            }
            let v = match xi.kind() {
                Kind::Successor(d) => 1 + longest(ctx, &Family::Fine(d), &s[1..])?,
                Kind::Limit => limit_longest(ctx, xi, s, Family::Fine)?,
                Kind::Zero => unreachable!(),
            };
            store(ctx, fam, s, v);
            Ok(v)
        }
        Family::Schreier(xi) => {
            if xi.is_zero() {
                return Ok(1);
            }
            if s.len() as u64 <= s[0] {
                return Ok(s.len());
            }
            if let Some(v) = cached(ctx, fam, s) {
                return Ok(v);
            }
            let v = match xi.kind() {
                Kind::Successor(d) => {
                    let inner = Family::Schreier(d);
                    let mut pos = 0;
                    let mut count = 0;
                    while pos < s.len() && count < s[0] {
                        pos += longest(ctx, &inner, &s[pos..])?;
                        count += 1;
                    }
                    pos
                }
                Kind::Limit => limit_longest(ctx, xi, s, Family::Schreier)?,
                Kind::Zero => unreachable!(),
            };
            store(ctx, fam, s, v);
            Ok(v)
        }
        Family::Compose(outer, inner) => compose_longest(ctx, outer, inner, s, None),
        Family::ComposeRel(outer, inner, m) => {
            let k = m.contained_prefix_len(s)?;
            compose_longest(ctx, outer, inner, &s[..k], Some(m))
        }
        Family::Image(f, m) => {
            let k = m.contained_prefix_len(s)?;
            let pos: Vec<u64> = s[..k].iter().map(|&x| m.position(x).map(|p| p.unwrap() + 1)).collect::<Result<_>>()?;
            longest(ctx, f, &pos)
        }
        Family::Restrict(f, m) => {
            let k = m.contained_prefix_len(s)?;
            longest(ctx, f, &s[..k])
        }
        Family::Pair(f, g) => {
            let lf = longest(ctx, f, s)?;
            let mut best = 0;
            for j in 0..=lf {
                best = best.max(j + longest(ctx, g, &s[j..])?);
                if best == s.len() {
                    break;
                }
            }
            Ok(best)
        }
        Family::TensorPow(f, m) => {
            if *m <= 1 {
                longest(ctx, f, s)
            } else {
                let inner = Family::TensorPow(f.clone(), m - 1);
                compose_longest(ctx, f, &inner, s, None)
            }
        }
        Family::Explicit(e) => {
            let mut k = 0;
            while k < s.len() && e.sets.contains(&FiniteSet::new(s[..=k].to_vec()).unwrap()) {
                k += 1;
            }
            Ok(k)
        }
    }
}

/// Limit stage: the longest segment in some `fam(lambda[n])` with `n <= min`.
fn limit_longest(ctx: &mut Ctx<'_>, lambda: &Ordinal, s: &[u64], make: fn(Ordinal) -> Family) -> Result<usize> {
    let mut best = 0;
    let mut n = s[0];
    while n >= 1 {
        ctx.tick()?;
        let fam = make(lambda.fundamental(n)?);
        best = best.max(longest(ctx, &fam, s)?);
        if best == s.len() {
            break;
        }
        n -= 1;
    }
    Ok(best)
}

fn compose_longest(
    ctx: &mut Ctx<'_>,
    outer: &Family,
    inner: &Family,
    s: &[u64],
    m: Option<&Prefix>,
) -> Result<usize> {
    let mut mins = Vec::new();
    let mut ends = Vec::new();
    let mut pos = 0;
    while pos < s.len() {
        let k = longest(ctx, inner, &s[pos..])?;
        if k == 0 {
            break;
        }
        let head = match m {
            Some(m) => m.position(s[pos])?.unwrap() + 1,
            None => s[pos],
        };
        mins.push(head);
        pos += k;
        ends.push(pos);
    }
    let r = longest(ctx, outer, &mins)?;
    Ok(if r == 0 { 0 } else { ends[r - 1] })
}

/// Shortcuts through the shared oracle.
pub fn contains(fam: &Family, f: &FiniteSet) -> Result<bool> {
    Oracle::global().contains(fam, f)
}

pub fn is_maximal(fam: &Family, f: &FiniteSet) -> Result<bool> {
    Oracle::global().is_maximal(fam, f)
}

pub fn initial_segment(fam: &Family, m: &Prefix) -> Result<FiniteSet> {
    Oracle::global().initial_segment(fam, m)
}

pub fn decompose(p: &Family, f: &FiniteSet) -> Result<Vec<FiniteSet>> {
    Oracle::global().decompose(p, f)
}

pub fn materialize(fam: &Family, n: u64, budget: usize) -> Result<ExplicitFamily> {
    Oracle::global().materialize(fam, n, budget)
}

pub fn almost_monotone_threshold(zeta: &Ordinal, xi: &Ordinal, n: u64) -> Result<Option<u64>> {
    Oracle::global().almost_monotone_threshold(zeta, xi, n)
}

/// Rank of a finite hereditary family as a tree under initial segments:
/// the least `r` such that `r` rounds of removing maximal nodes empty it.
pub fn tree_rank(e: &ExplicitFamily) -> u64 {
    // Height of each node, processed from longest sets down.
    let mut height: BTreeMap<&FiniteSet, u64> = BTreeMap::new();
    let mut by_len: Vec<&FiniteSet> = e.sets.iter().collect();
    by_len.sort_by_key(|s| std::cmp::Reverse(s.len()));
    for s in by_len {
        let h = *height.entry(s).or_insert(1);
        if !s.is_empty() {
            let parent = FiniteSet::new(s.as_slice()[..s.len() - 1].to_vec()).unwrap();
            if let Some(p) = e.sets.get(&parent) {
                let ph = height.entry(p).or_insert(1);
                *ph = (*ph).max(h + 1);
            }
        }
    }
    height.values().copied().max().unwrap_or(0)
}

/// Rank of a family that must be well founded; errors on `F(w1)`.
pub fn truncated_rank(fam: &Family, n: u64, budget: usize) -> Result<u64> {
    if matches!(fam, Family::AllFinite) {
        return Err(Error::Domain("the family of all finite sets is ill-founded".into()));
    }
    Ok(tree_rank(&materialize(fam, n, budget)?))
}

/// Checks `S_{lambda[n]}` restricted to sets with minimum at least `n` is
/// contained in `S_lambda` on `{1..ground}`. Returns a counterexample if any.
pub fn schreier_limit_inclusion(lambda: &Ordinal, n: u64, ground: u64) -> Result<Option<FiniteSet>> {
    let o = Oracle::global();
    let lower = o.materialize(&Family::Schreier(lambda.fundamental(n)?), ground, 1 << 22)?;
    let upper = Family::Schreier(lambda.clone());
    for f in lower.sets() {
        if f.min().is_none_or(|m| m >= n) && !o.contains(&upper, f)? {
            return Ok(Some(f.clone()));
        }
    }
    Ok(None)
}

/// Checks `S_{lambda[n]+1}` is contained in `S_{lambda[n+1]}` on `{1..ground}`.
/// Returns a counterexample if any.
pub fn schreier_side_condition(lambda: &Ordinal, n: u64, ground: u64) -> Result<Option<FiniteSet>> {
    let o = Oracle::global();
    let lower = o.materialize(&Family::Schreier(lambda.fundamental(n)?.succ()), ground, 1 << 22)?;
    let upper = Family::Schreier(lambda.fundamental(n + 1)?);
    for f in lower.sets() {
        if !o.contains(&upper, f)? {
            return Ok(Some(f.clone()));
        }
    }
    Ok(None)
}

fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn call<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    let rest = text.strip_prefix(name)?.trim_start();
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner)
}

fn parse_family(t: &str) -> Result<Family> {
    let bad = || Error::Parse(format!("bad family expression {t:?}"));
    match t {
        "SING" => return Ok(Family::Singletons),
        "ALL" => return Ok(Family::AllFinite),
        _ => {}
    }
    if let Some(a) = call(t, "F") {
        if a.trim() == "w1" {
            return Ok(Family::AllFinite);
        }
        return Ok(Family::Fine(Ordinal::parse(a)?));
    }
    if let Some(a) = call(t, "S") {
        return Ok(Family::Schreier(Ordinal::parse(a)?));
    }
    if let Some(a) = call(t, "CM") {
        let [fams, m] = split_top(a, ';')[..] else { return Err(bad()) };
        let [f, p] = split_top(fams, ',')[..] else { return Err(bad()) };
        return Ok(Family::compose_rel(parse_family(f)?, parse_family(p)?, Prefix::parse(m)?));
    }
    if let Some(a) = call(t, "C") {
        let [f, p] = split_top(a, ',')[..] else { return Err(bad()) };
        return Ok(Family::compose(parse_family(f)?, parse_family(p)?));
    }
    if let Some(a) = call(t, "IMG") {
        let [f, m] = split_top(a, ';')[..] else { return Err(bad()) };
        return Ok(Family::image(parse_family(f)?, Prefix::parse(m)?));
    }
    if let Some(a) = call(t, "RES") {
        let [f, m] = split_top(a, ';')[..] else { return Err(bad()) };
        return Ok(Family::restrict(parse_family(f)?, Prefix::parse(m)?));
    }
    if let Some(a) = call(t, "PAIR") {
        let [f, g] = split_top(a, ',')[..] else { return Err(bad()) };
        return Ok(Family::pair(parse_family(f)?, parse_family(g)?));
    }
    if let Some(a) = call(t, "POW") {
        let [f, m] = split_top(a, ',')[..] else { return Err(bad()) };
        let m: u32 = m.parse().map_err(|_| bad())?;
        return Ok(Family::tensor_pow(parse_family(f)?, m));
    }
    if let Some(a) = call(t, "X") {
        let mut sets = vec![FiniteSet::empty()];
        for part in split_top(a, ';') {
            sets.push(FiniteSet::parse(part)?);
        }
        return Ok(ExplicitFamily::new(sets, 0, false)?.into_family());
    }
    Err(bad())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[u64]) -> FiniteSet {
        FiniteSet::new(v.to_vec()).unwrap()
    }

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).unwrap()
    }

    /// Independent oracle for fine Schreier families: the recursive
    /// definition applied literally, exploring every admissible index.
    fn fine_brute(xi: &Ordinal, f: &[u64]) -> bool {
        if f.is_empty() {
            return true;
        }
        match xi.kind() {
            Kind::Zero => false,
            Kind::Successor(d) => fine_brute(&d, &f[1..]),
            Kind::Limit => (1..=f[0]).any(|n| fine_brute(&xi.fundamental(n).unwrap(), f)),
        }
    }

    /// Independent oracle for Schreier families: tries every split of `f`
    /// into successive pieces.
    fn schreier_brute(xi: &Ordinal, f: &[u64]) -> bool {
        if f.is_empty() {
            return true;
        }
        match xi.kind() {
            Kind::Zero => f.len() <= 1,
            Kind::Successor(d) => splits_into(&d, f, f[0]),
            Kind::Limit => (1..=f[0]).any(|n| schreier_brute(&xi.fundamental(n).unwrap(), f)),
        }
    }

    fn splits_into(d: &Ordinal, f: &[u64], pieces_left: u64) -> bool {
        if f.is_empty() {
            return true;
        }
        if pieces_left == 0 {
            return false;
        }
        (1..=f.len()).any(|k| schreier_brute(d, &f[..k]) && splits_into(d, &f[k..], pieces_left - 1))
    }

    /// Independent oracle for `F[P]`: every partition into successive pieces.
    fn compose_brute(outer: &dyn Fn(&[u64]) -> bool, inner: &dyn Fn(&[u64]) -> bool, f: &[u64]) -> bool {
        fn rec(outer: &dyn Fn(&[u64]) -> bool, inner: &dyn Fn(&[u64]) -> bool, f: &[u64], mins: &mut Vec<u64>) -> bool {
            if f.is_empty() {
                return outer(mins);
            }
            for k in 1..=f.len() {
                if inner(&f[..k]) {
                    mins.push(f[0]);
                    let ok = rec(outer, inner, &f[k..], mins);
                    mins.pop();
                    if ok {
                        return true;
                    }
                }
            }
            false
        }
        f.is_empty() || rec(outer, inner, f, &mut Vec::new())
    }

    fn all_subsets(n: u64) -> Vec<FiniteSet> {
        (0u32..1 << n)
            .map(|mask| FiniteSet::new((1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect()).unwrap())
            .collect()
    }

    #[test]
    fn membership_examples() {
        assert!(contains(&Family::fine(2), &set(&[4, 10])).unwrap());
        assert!(!contains(&Family::fine(2), &set(&[1, 2, 3])).unwrap());
        assert!(contains(&Family::schreier(1), &set(&[3, 5, 9])).unwrap());
        let c = Family::compose(Family::schreier(1), Family::schreier(1));
        assert!(contains(&c, &set(&[2, 3, 4, 5, 6])).unwrap());
        for fam in [Family::fine(0), Family::schreier(3), c, Family::AllFinite] {
            assert!(contains(&fam, &FiniteSet::empty()).unwrap());
        }
    }

    #[test]
    fn maximality_examples() {
        assert!(is_maximal(&Family::schreier(1), &set(&[3, 5, 9])).unwrap());
        // |(2,7)| = min, so no extension stays in S_1.
        assert!(is_maximal(&Family::schreier(1), &set(&[2, 7])).unwrap());
        assert!(!is_maximal(&Family::schreier(1), &set(&[3, 7])).unwrap());
        assert!(!is_maximal(&Family::fine(3), &set(&[1, 4])).unwrap());
        assert!(is_maximal(&Family::fine(3), &set(&[2, 5, 9])).unwrap());
        assert!(!is_maximal(&Family::AllFinite, &set(&[2, 5, 9])).unwrap());
        assert!(is_maximal(&Family::schreier(1), &set(&[2, 3, 4])).is_err());
    }

    #[test]
    fn initial_segment_examples() {
        let m = Prefix::arithmetic(2, 2);
        assert_eq!(initial_segment(&Family::schreier(1), &m).unwrap(), set(&[2, 4]));
        assert_eq!(initial_segment(&Family::fine(0), &m).unwrap(), FiniteSet::empty());
        let m = Prefix::arithmetic(2, 1);
        assert_eq!(initial_segment(&Family::schreier(2), &m).unwrap(), set(&[2, 3, 4, 5, 6, 7]));
        let short = Prefix::finite(&set(&[5, 6]));
        assert!(matches!(
            initial_segment(&Family::schreier(1), &short),
            Err(Error::InsufficientPrefix(_))
        ));
    }

    #[test]
    fn decompose_examples() {
        let s1 = Family::schreier(1);
        assert_eq!(decompose(&s1, &set(&[2, 3, 4, 5, 6, 7])).unwrap(), vec![set(&[2, 3]), set(&[4, 5, 6, 7])]);
        // (4,5,6) is not maximal in S_1, so this set has no such decomposition.
        assert_eq!(decompose(&s1, &set(&[2, 3, 4, 5, 6])), Err(Error::NotDecomposable));
        assert_eq!(decompose(&s1, &set(&[3, 4])), Err(Error::NotDecomposable));
        assert!(decompose(&s1, &FiniteSet::empty()).unwrap().is_empty());
    }

    #[test]
    fn materialize_examples() {
        let f1 = materialize(&Family::fine(1), 3, 1000).unwrap();
        let want: BTreeSet<FiniteSet> = [vec![], vec![1], vec![2], vec![3]].into_iter().map(|v| set(&v)).collect();
        assert_eq!(f1.sets(), &want);
        assert_eq!(materialize(&Family::fine(0), 10, 1000).unwrap().len(), 1);
        let s1 = materialize(&Family::schreier(1), 4, 1000).unwrap();
        let want: BTreeSet<FiniteSet> = all_subsets(4)
            .into_iter()
            .filter(|f| f.min().is_none_or(|m| f.len() as u64 <= m))
            .collect();
        assert_eq!(s1.sets(), &want);
        assert!(matches!(materialize(&Family::AllFinite, 10, 100), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn rank_examples() {
        let single = ExplicitFamily::new([FiniteSet::empty()], 1, true).unwrap();
        assert_eq!(tree_rank(&single), 1);
        for n in 0..=5 {
            assert_eq!(truncated_rank(&Family::fine(n), n + 1, 1 << 20).unwrap(), n + 1);
        }
        let pair = Family::pair(Family::fine(1), Family::fine(2));
        assert_eq!(truncated_rank(&pair, 6, 1 << 20).unwrap(), 4);
        assert!(truncated_rank(&Family::AllFinite, 3, 100).is_err());
    }

    #[test]
    fn almost_monotone_examples() {
        let t = |a: &str, b: &str, n| almost_monotone_threshold(&o(a), &o(b), n).unwrap();
        assert_eq!(t("2", "3", 10), Some(0));
        assert_eq!(t("1", "2", 10), Some(0));
        // Brute force: the largest minimum of a set of size <= 3 outside F_w.
        let bad_max_min = all_subsets(8)
            .into_iter()
            .filter(|f| f.len() <= 3 && !fine_brute(&o("w"), f.as_slice()))
            .filter_map(|f| FiniteSet::min(&f))
            .max()
            .unwrap();
        assert_eq!(t("3", "w", 8), Some(bad_max_min));
        assert_eq!(bad_max_min, 2);
    }

    #[test]
    fn fine_families_match_brute_force() {
        for xi in ["0", "1", "3", "w", "w+2", "w*2", "w^2", "w^w"] {
            let xi = o(xi);
            for f in all_subsets(9) {
                assert_eq!(contains(&Family::Fine(xi.clone()), &f).unwrap(), fine_brute(&xi, f.as_slice()), "{xi} {f}");
            }
        }
    }

    #[test]
    fn schreier_families_match_brute_force() {
        for xi in ["0", "1", "2", "3", "w", "w+1"] {
            let xi = o(xi);
            for f in all_subsets(10) {
                assert_eq!(
                    contains(&Family::Schreier(xi.clone()), &f).unwrap(),
                    schreier_brute(&xi, f.as_slice()),
                    "{xi} {f}"
                );
            }
        }
    }

    #[test]
    fn compositions_match_brute_force() {
        let s1 = |f: &[u64]| f.is_empty() || f.len() as u64 <= f[0];
        let f2 = |f: &[u64]| f.len() <= 2;
        let c = Family::compose(Family::schreier(1), Family::schreier(1));
        let c2 = Family::compose(Family::fine(2), Family::schreier(1));
        let pow = Family::tensor_pow(Family::schreier(1), 2);
        for f in all_subsets(10) {
            let want = compose_brute(&s1, &s1, f.as_slice());
            assert_eq!(contains(&c, &f).unwrap(), want, "{f}");
            assert_eq!(contains(&pow, &f).unwrap(), want, "{f}");
            assert_eq!(contains(&c2, &f).unwrap(), compose_brute(&f2, &s1, f.as_slice()), "{f}");
        }
    }

    #[test]
    fn relative_families() {
        let m = Prefix::arithmetic(2, 2);
        let img = Family::image(Family::fine(2), m.clone());
        assert!(contains(&img, &set(&[4, 8])).unwrap());
        assert!(!contains(&img, &set(&[4, 7])).unwrap());
        assert!(is_maximal(&img, &set(&[4, 8])).unwrap());
        assert!(!is_maximal(&img, &set(&[4])).unwrap());
        let res = Family::restrict(Family::schreier(1), m.clone());
        assert!(contains(&res, &set(&[2])).unwrap());
        assert!(!contains(&res, &set(&[3])).unwrap());
        assert!(is_maximal(&res, &set(&[4, 6, 8, 10])).unwrap());
        assert!(!is_maximal(&res, &set(&[4, 6, 8])).unwrap());
        // F_2^M[S_1] with M = (2,4,6,...): two S_1 blocks whose minima are M(i), M(j).
        let rel = Family::compose_rel(Family::fine(2), Family::schreier(1), m);
        assert!(contains(&rel, &set(&[2, 4, 6, 8, 10, 12, 14, 16])).unwrap());
        assert!(!contains(&rel, &set(&[2, 4, 6, 8, 10, 12, 14, 16, 18])).unwrap());
        let finite = Family::image(Family::fine(1), Prefix::finite(&set(&[2, 4])));
        assert!(matches!(contains(&finite, &set(&[9])), Err(Error::InsufficientPrefix(_))));
    }

    #[test]
    fn composed_relative_families_on_truncations() {
        let p = Family::schreier(1);
        let m = Prefix::naturals();
        for outer in [Family::fine(2), Family::schreier(1), Family::fine(3)] {
            let rel = Family::compose_rel(outer.clone(), p.clone(), m.clone());
            for g in all_subsets(11) {
                if let Ok(blocks) = decompose(&p, &g) {
                    let mins = FiniteSet::new(blocks.iter().map(|b| b.min().unwrap()).collect()).unwrap();
                    assert_eq!(contains(&rel, &g).unwrap(), contains(&outer, &mins).unwrap(), "{g}");
                }
            }
        }
    }

    #[test]
    fn explicit_family_checks() {
        assert!(ExplicitFamily::new([set(&[1, 2])], 3, false).is_err());
        let e = ExplicitFamily::new([FiniteSet::empty(), set(&[1]), set(&[2]), set(&[1, 2])], 2, false).unwrap();
        let fam = e.into_family();
        assert!(is_maximal(&fam, &set(&[1, 2])).unwrap());
        assert!(!is_maximal(&fam, &set(&[2])).unwrap());
        let parsed = Family::parse("X(1;2;1,2)").unwrap();
        assert_eq!(parsed, fam);
    }

    #[test]
    fn parse_display_round_trip() {
        for t in [
            "F(3)",
            "F(w1)",
            "S(w*2+1)",
            "SING",
            "C(S(1),S(1))",
            "CM(F(2),S(1);2,4,6,...)",
            "IMG(F(w);1,3,...)",
            "RES(S(2);2-9)",
            "PAIR(F(1),F(2))",
            "POW(S(1),3)",
        ] {
            let f = Family::parse(t).unwrap();
            let again = Family::parse(&f.to_string()).unwrap();
            assert_eq!(again.to_string(), f.to_string(), "{t}");
        }
        assert!(Family::parse("Q(1)").is_err());
    }

    #[test]
    fn schreier_limit_validation() {
        for lam in ["w", "w*2"] {
            for n in 1..=4 {
                assert_eq!(schreier_limit_inclusion(&o(lam), n, 12).unwrap(), None);
            }
        }
        for n in 1..=3 {
            assert_eq!(schreier_side_condition(&o("w"), n, 10).unwrap(), None);
        }
    }

    fn builtins() -> Vec<Family> {
        vec![
            Family::fine(2),
            Family::Fine(o("w")),
            Family::Fine(o("w+1")),
            Family::schreier(1),
            Family::schreier(2),
            Family::Schreier(o("w")),
            Family::compose(Family::fine(2), Family::schreier(1)),
            Family::pair(Family::fine(1), Family::schreier(1)),
            Family::tensor_pow(Family::schreier(1), 2),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn hereditary_and_spreading(
            idx in 0usize..9,
            raw in prop::collection::btree_set(1u64..16, 0..7),
            drop in any::<u64>(),
            bumps in prop::collection::vec(0u64..4, 7),
        ) {
            let fam = &builtins()[idx];
            let f = FiniteSet::new(raw.into_iter().collect()).unwrap();
            if contains(fam, &f).unwrap() {
                if !f.is_empty() {
                    let mut v = f.as_slice().to_vec();
                    v.remove((drop % f.len() as u64) as usize);
                    prop_assert!(contains(fam, &FiniteSet::new(v).unwrap()).unwrap());
                }
                // A spread: raise elements, keeping them increasing.
                let mut acc = 0;
                let mut g = Vec::new();
                for (i, &x) in f.as_slice().iter().enumerate() {
                    acc += bumps[i];
                    let y = (x + acc).max(g.last().map_or(0, |l: &u64| l + 1));
                    g.push(y);
                }
                let g = FiniteSet::new(g).unwrap();
                prop_assert!(crate::sets::is_spread(&g, &f).unwrap());
                prop_assert!(contains(fam, &g).unwrap());
            }
        }

        #[test]
        fn nice_families_extend_or_are_maximal(
            idx in 0usize..9,
            raw in prop::collection::btree_set(1u64..14, 0..6),
            n_off in 1u64..6,
        ) {
            let fam = &builtins()[idx];
            let f = FiniteSet::new(raw.into_iter().collect()).unwrap();
            prop_assert!(contains(fam, &FiniteSet::new(vec![n_off + 3]).unwrap()).unwrap());
            if contains(fam, &f).unwrap() && !is_maximal(fam, &f).unwrap() {
                let n = FiniteSet::max(&f).unwrap_or(0) + n_off;
                prop_assert!(contains(fam, &f.push(n)).unwrap());
            }
        }

        #[test]
        fn decompose_concatenates_to_input(raw in prop::collection::btree_set(1u64..30, 0..12), xi in 0u64..3) {
            let p = Family::schreier(xi);
            let f = FiniteSet::new(raw.into_iter().collect()).unwrap();
            if let Ok(blocks) = decompose(&p, &f) {
                let joined: Vec<u64> = blocks.iter().flat_map(|b| b.as_slice().to_vec()).collect();
                prop_assert_eq!(joined, f.as_slice().to_vec());
                for b in &blocks {
                    prop_assert!(is_maximal(&p, b).unwrap());
                }
            }
        }
    }

    #[test]
    fn truncations_are_downward_closed() {
        for fam in builtins() {
            for n in [6u64, 10, 14] {
                let e = materialize(&fam, n, 1 << 16).unwrap();
                assert!(ExplicitFamily::new(e.sets().iter().cloned(), n, true).is_ok());
            }
        }
    }
}

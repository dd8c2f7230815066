//! Probability blocks: the Dirac block and the repeated averages hierarchy,
//! with exact rational measures.
//!
//! Supports are handled as position ranges inside a prefix, so their sizes
//! and locations can be computed without materializing the measures.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::families::{self, Family, DEFAULT_BUDGET};
use crate::ordinal::{Kind, Ordinal};
use crate::sets::{FiniteSet, Prefix};
use crate::vector::{fmt_rational, Vector};

/// Largest support materialized as an explicit measure.
pub const MAX_ATOMS: u64 = 1 << 22;

/// A finitely supported probability measure on the positive integers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProbMeasure {
    weights: BTreeMap<u64, BigRational>,
}

impl ProbMeasure {
    /// Checks positivity and that the weights sum to exactly 1.
    pub fn new(weights: BTreeMap<u64, BigRational>) -> Result<Self> {
        if weights.is_empty() || weights.values().any(|w| *w <= BigRational::zero()) || weights.contains_key(&0) {
            return Err(Error::Domain("measure needs positive weights on positive integers".into()));
        }
        let total: BigRational = weights.values().sum();
        if !total.is_one() {
            return Err(Error::Domain(format!("weights sum to {total}, not 1")));
        }
        Ok(ProbMeasure { weights })
    }

    pub fn dirac(i: u64) -> Self {
        ProbMeasure { weights: BTreeMap::from([(i, BigRational::one())]) }
    }

    /// Builds a measure without validation.
    pub fn from_weights_unchecked(weights: BTreeMap<u64, BigRational>) -> Self {
        ProbMeasure { weights }
    }

    pub fn weights(&self) -> &BTreeMap<u64, BigRational> {
        &self.weights
    }

    pub fn get(&self, i: u64) -> BigRational {
        self.weights.get(&i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn support(&self) -> FiniteSet {
        FiniteSet::new(self.weights.keys().copied().collect()).unwrap()
    }

    pub fn total(&self) -> BigRational {
        self.weights.values().sum()
    }

    pub fn max_atom(&self) -> BigRational {
        self.weights.values().max().cloned().unwrap_or_else(BigRational::zero)
    }

    /// `P(E)`.
    pub fn mass(&self, e: &FiniteSet) -> BigRational {
        e.as_slice().iter().filter_map(|i| self.weights.get(i)).sum()
    }

    /// `sum_i P(i) f(i)`. Errors if `f` is missing a support point.
    pub fn expect(&self, f: &BTreeMap<u64, BigRational>) -> Result<BigRational> {
        let mut s = BigRational::zero();
        for (i, w) in &self.weights {
            let v = f.get(i).ok_or_else(|| Error::Domain(format!("function undefined at {i}")))?;
            s += w * v;
        }
        Ok(s)
    }

    /// `sum_i P(i) x_i` with `x_i = seq[i - 1]`.
    pub fn average(&self, seq: &[Vector]) -> Result<Vector> {
        let mut out = Vector::zero();
        for (&i, w) in &self.weights {
            let x = seq
                .get(i as usize - 1)
                .ok_or_else(|| Error::InsufficientPrefix(format!("no vector x_{i}")))?;
            out = out.add(&x.scale(w));
        }
        Ok(out)
    }
}

impl fmt::Display for ProbMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(|(i, w)| format!("{i}:{}", fmt_rational(w))).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Block {
    /// `P_{M,n} = delta_{M(n)}`.
    Dirac,
    /// The repeated averages hierarchy `S^xi`.
    RepeatedAverages(Ordinal),
}

/// Anything that assigns measures `P_{M,n}` with a companion family.
pub trait BlockSystem {
    fn companion(&self) -> Family;
    fn measure(&self, m: &Prefix, n: u64) -> Result<ProbMeasure>;
}

impl BlockSystem for Block {
    fn companion(&self) -> Family {
        Block::companion(self)
    }

    fn measure(&self, m: &Prefix, n: u64) -> Result<ProbMeasure> {
        Block::measure(self, m, n)
    }
}

struct Steps(u64);

impl Steps {
    fn tick(&mut self) -> Result<()> {
        self.0 += 1;
        if self.0 > DEFAULT_BUDGET {
            return Err(Error::BudgetExceeded(format!("block recursion exceeded {DEFAULT_BUDGET} steps")));
        }
        Ok(())
    }
}

fn too_long() -> Error {
    Error::BudgetExceeded("support length overflows 64 bits".into())
}

/// Length of the support of the first measure of `S^xi` on `m` from position `start`.
fn ra_len(xi: &Ordinal, m: &Prefix, start: u64, steps: &mut Steps) -> Result<u64> {
    steps.tick()?;
    match xi.kind() {
        Kind::Zero => Ok(1),
        Kind::Successor(d) => {
            let k = m.at(start)?;
            if d.is_zero() {
                return Ok(k);
            }
            let mut pos = start;
            for _ in 0..k {
                pos = pos.checked_add(ra_len(&d, m, pos, steps)?).ok_or_else(too_long)?;
            }
            Ok(pos - start)
        }
        Kind::Limit => ra_len(&xi.fundamental(m.at(start)?)?, m, start, steps),
    }
}

/// Visits `(position, denominator)` for every atom of the first measure of
/// `S^xi` from `start`; each atom has weight `1 / denominator`.
fn ra_walk(
    xi: &Ordinal,
    m: &Prefix,
    start: u64,
    denom: &BigInt,
    visit: &mut dyn FnMut(u64, &BigInt) -> Result<()>,
    steps: &mut Steps,
) -> Result<u64> {
    steps.tick()?;
    match xi.kind() {
        Kind::Zero => {
            visit(start, denom)?;
            Ok(1)
        }
        Kind::Successor(d) => {
            let k = m.at(start)?;
            let nd = denom * BigInt::from(k);
            let mut pos = start;
            for _ in 0..k {
                pos += ra_walk(&d, m, pos, &nd, visit, steps)?;
            }
            Ok(pos - start)
        }
        Kind::Limit => ra_walk(&xi.fundamental(m.at(start)?)?, m, start, denom, visit, steps),
    }
}

impl Block {
    pub fn companion(&self) -> Family {
        match self {
            Block::Dirac => Family::fine(1),
            Block::RepeatedAverages(xi) => Family::Schreier(xi.clone()),
        }
    }

    pub fn parse(text: &str) -> Result<Block> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("DIRAC") {
            return Ok(Block::Dirac);
        }
        let inner = t
            .strip_prefix("RA(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("bad block {t:?}; expected DIRAC or RA(ordinal)")))?;
        Ok(Block::RepeatedAverages(Ordinal::parse(inner)?))
    }

    fn level(&self) -> Ordinal {
        match self {
            Block::Dirac => Ordinal::zero(),
            Block::RepeatedAverages(xi) => xi.clone(),
        }
    }

    /// `(start, len)` of the support of `P_{M,n}` as 0-based positions in `m`.
    pub fn support_range(&self, m: &Prefix, n: u64) -> Result<(u64, u64)> {
        if n == 0 {
            return Err(Error::Domain("measures are indexed from 1".into()));
        }
        let xi = self.level();
        let mut steps = Steps(0);
        let mut start: u64 = 0;
        for _ in 1..n {
            start = start.checked_add(ra_len(&xi, m, start, &mut steps)?).ok_or_else(too_long)?;
        }
        Ok((start, ra_len(&xi, m, start, &mut steps)?))
    }

    pub fn support(&self, m: &Prefix, n: u64) -> Result<FiniteSet> {
        let (start, len) = self.support_range(m, n)?;
        if len > MAX_ATOMS {
            return Err(Error::BudgetExceeded(format!("support of {len} atoms")));
        }
        Ok(FiniteSet::new(m.slice(start, start + len)?).unwrap())
    }

    /// `P_{M,n}` as an exact measure.
    pub fn measure(&self, m: &Prefix, n: u64) -> Result<ProbMeasure> {
        let (start, len) = self.support_range(m, n)?;
        if len > MAX_ATOMS {
            return Err(Error::BudgetExceeded(format!("measure with {len} atoms")));
        }
        let xi = self.level();
        let mut weights = BTreeMap::new();
        let mut visit = |pos: u64, d: &BigInt| -> Result<()> {
            weights.insert(m.at(pos)?, BigRational::new(BigInt::one(), d.clone()));
            Ok(())
        };
        ra_walk(&xi, m, start, &BigInt::one(), &mut visit, &mut Steps(0))?;
        Ok(ProbMeasure { weights })
    }

    /// The measures `P_{F,1}, ..., P_{F,t}` of the decomposition of `f` into
    /// successive maximal members of the companion family.
    pub fn measures_for(&self, f: &FiniteSet) -> Result<Vec<ProbMeasure>> {
        let t = families::decompose(&self.companion(), f)?.len() as u64;
        let m = Prefix::finite(f);
        (1..=t).map(|n| self.measure(&m, n)).collect()
    }

    /// `E_F f = sum_n sum_{i in F_n} f(i) P_{F,n}(i)`.
    pub fn expect(&self, f: &FiniteSet, values: &BTreeMap<u64, BigRational>) -> Result<BigRational> {
        let mut s = BigRational::zero();
        for p in self.measures_for(f)? {
            s += p.expect(values)?;
        }
        Ok(s)
    }

    /// The first `count` vectors of `E_M(seq)`, with `x_i = seq[i - 1]`.
    pub fn convex_block(&self, m: &Prefix, count: u64, seq: &[Vector]) -> Result<Vec<Vector>> {
        (1..=count).map(|n| self.measure(m, n)?.average(seq)).collect()
    }

    /// `E_F(seq)` for a decomposable `f`, padded with zeros to `pad_to` entries.
    pub fn convex_block_finite(&self, f: &FiniteSet, seq: &[Vector], pad_to: usize) -> Result<Vec<Vector>> {
        let mut out: Vec<Vector> = self.measures_for(f)?.iter().map(|p| p.average(seq)).collect::<Result<_>>()?;
        while out.len() < pad_to {
            out.push(Vector::zero());
        }
        Ok(out)
    }

    /// `P_{M,1}(E)`.
    pub fn set_mass(&self, m: &Prefix, e: &FiniteSet) -> Result<BigRational> {
        Ok(self.measure(m, 1)?.mass(e))
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::Dirac => write!(f, "DIRAC"),
            Block::RepeatedAverages(xi) => write!(f, "RA({xi})"),
        }
    }
}

/// Outcome of [`thin_for_small_coefficients`].
#[derive(Clone, Debug)]
pub struct ThinResult {
    pub prefix: Prefix,
    /// Sampled subsets checked against the bounds.
    pub samples: usize,
    /// Largest observed `P_{N,n}(i) / delta_n`.
    pub worst_ratio: BigRational,
}

/// Passes to a subset `M` of `L` with `P_{N,n}(i) <= delta_n` for every `N`
/// contained in `M`, every `n <= deltas.len()` and every `i`.
///
/// The `n`-th measure of `N` has minimum support at least `M(n)`, and atoms
/// of `S^xi` (`xi >= 1`) never exceed one over the minimum of their support,
/// so choosing `M(n) >= 1/delta_n` suffices. The bound is then spot checked
/// on `samples` random subsets.
pub fn thin_for_small_coefficients(
    block: &Block,
    l: &Prefix,
    deltas: &[BigRational],
    samples: usize,
    rng: &mut impl Rng,
) -> Result<ThinResult> {
    if block.level().is_zero() {
        return Err(Error::Domain("thinning needs repeated averages of positive level".into()));
    }
    let mut chosen = Vec::new();
    let mut pos = 0;
    for d in deltas {
        if *d <= BigRational::zero() {
            return Err(Error::Domain("deltas must be positive".into()));
        }
        let need = (BigRational::one() / d).ceil().to_integer();
        loop {
            let x = l.at(pos)?;
            pos += 1;
            if BigInt::from(x) >= need {
                chosen.push(x);
                break;
            }
        }
    }
    let prefix = l.drop_first(pos).prepend(&chosen)?;
    let window = chosen.len() as u64 + 4;
    let mut worst = BigRational::zero();
    for _ in 0..samples {
        let head: Vec<u64> = prefix.take(window)?.into_iter().filter(|_| rng.gen_bool(0.7)).collect();
        let n_set = prefix.drop_first(window).prepend(&head)?;
        for (i, d) in deltas.iter().enumerate() {
            let p = block.measure(&n_set, i as u64 + 1)?;
            let r = p.max_atom() / d;
            if r > worst {
                worst = r;
            }
        }
    }
    Ok(ThinResult { prefix, samples, worst_ratio: worst })
}

/// Outcome of [`verify_axioms`].
#[derive(Clone, Debug, Default)]
pub struct AxiomReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

/// Checks the support axiom, exact normalization, the tiling of `M` by
/// successive maximal supports and the permanence axiom `P_{N,1} = P_{M,r}`
/// whenever `supp(P_{M,r})` is an initial segment of `N`.
///
/// For each sample `(M, r)`, `N` is built twice: with the rest of `M` and
/// with a sparser tail.
pub fn verify_axioms(sys: &dyn BlockSystem, samples: &[(Prefix, u64)]) -> AxiomReport {
    let mut rep = AxiomReport::default();
    let fam = sys.companion();
    for (m, r) in samples {
        if let Err(e) = verify_one(sys, &fam, m, *r, &mut rep) {
            rep.failures.push(format!("M={m}, r={r}: {e}"));
        }
    }
    rep
}

fn verify_one(sys: &dyn BlockSystem, fam: &Family, m: &Prefix, r: u64, rep: &mut AxiomReport) -> Result<()> {
    let first = sys.measure(m, 1)?;
    let seg = families::initial_segment(fam, m)?;
    rep.check(first.support() == seg, || format!("M={m}: supp(P_M,1)={} but M|P={seg}", first.support()));
    rep.check(families::is_maximal(fam, &seg)?, || format!("M={m}: M|P={seg} is not maximal"));
    let mut covered = 0u64;
    for j in 1..=r.max(1) {
        let p = sys.measure(m, j)?;
        let supp = p.support();
        rep.check(p.total().is_one(), || format!("M={m}: P_M,{j} has mass {}", p.total()));
        let expect = FiniteSet::new(m.slice(covered, covered + supp.len() as u64)?).unwrap();
        rep.check(supp == expect, || format!("M={m}: supp(P_M,{j})={supp} does not continue the tiling"));
        rep.check(families::is_maximal(fam, &supp).unwrap_or(false), || format!("M={m}: supp(P_M,{j})={supp} not maximal"));
        covered += supp.len() as u64;
        let top = FiniteSet::max(&supp).unwrap();
        let rest = m.drop_first(covered);
        let sparse = Prefix::arithmetic(top + 1 + j, 3);
        for n in [rest.prepend(supp.as_slice())?, sparse.prepend(supp.as_slice())?] {
            let q = sys.measure(&n, 1)?;
            rep.check(q == p, || format!("M={m}, r={j}, N={n}: P_N,1={q} differs from P_M,r={p}"));
        }
    }
    Ok(())
}

/// Random prefixes small enough that the first `r` measures of the given
/// block stay desk sized: a short random head over a step-one tail.
pub fn random_sample_prefix(block: &Block, rng: &mut impl Rng) -> (Prefix, u64) {
    let (first_max, r) = match block {
        Block::Dirac => (12, 4),
        Block::RepeatedAverages(xi) => match xi.as_finite() {
            Some(0) => (12, 4),
            Some(1) => (6, 3),
            Some(2) => (2, 2),
            _ => (2, 1),
        },
    };
    let mut head = vec![rng.gen_range(1..=first_max)];
    for _ in 0..rng.gen_range(0..4) {
        let last = *head.last().unwrap();
        head.push(last + rng.gen_range(1..=2));
    }
    let last = *head.last().unwrap();
    let m = Prefix::arithmetic(last + 1, 1).prepend(&head).unwrap();
    (m, rng.gen_range(1..=r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use crate::vector::{int, rat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(v: &[u64]) -> FiniteSet {
        FiniteSet::new(v.to_vec()).unwrap()
    }

    fn ra(s: &str) -> Block {
        Block::RepeatedAverages(Ordinal::parse(s).unwrap())
    }

    fn weights(pairs: &[(u64, i64, i64)]) -> BTreeMap<u64, BigRational> {
        pairs.iter().map(|&(i, p, q)| (i, rat(p, q))).collect()
    }

    /// Independent repeated averages on the set `m`, applying the
    /// definition literally: `M_{i+1}` is `M_i` minus the support just used.
    /// The atoms used are removed from `m`.
    fn ra_brute(xi: &Ordinal, m: &mut BTreeSet<u64>) -> BTreeMap<u64, BigRational> {
        let first = *m.first().unwrap();
        match xi.kind() {
            Kind::Zero => {
                m.remove(&first);
                BTreeMap::from([(first, int(1))])
            }
            Kind::Successor(d) => {
                let mut out = BTreeMap::new();
                for _ in 0..first {
                    for (i, w) in ra_brute(&d, m) {
                        out.insert(i, w / int(first as i64));
                    }
                }
                out
            }
            Kind::Limit => ra_brute(&xi.fundamental(first).unwrap(), m),
        }
    }

    #[test]
    fn measure_examples() {
        let m = Prefix::parse("2,5,9,...").unwrap();
        assert_eq!(Block::Dirac.measure(&m, 2).unwrap(), ProbMeasure::dirac(5));
        let m = Prefix::parse("3,7,8,11,...").unwrap();
        let p = ra("1").measure(&m, 1).unwrap();
        assert_eq!(p.weights(), &weights(&[(3, 1, 3), (7, 1, 3), (8, 1, 3)]));
        let m = Prefix::parse("2,3,4,5,6,7,...").unwrap();
        let p = ra("2").measure(&m, 1).unwrap();
        let want = weights(&[(2, 1, 4), (3, 1, 4), (4, 1, 8), (5, 1, 8), (6, 1, 8), (7, 1, 8)]);
        assert_eq!(p.weights(), &want);
        assert_eq!(ra("2").set_mass(&m, &set(&[2, 4])).unwrap(), rat(3, 8));
        assert_eq!(ra("2").set_mass(&m, &set(&[1, 100])).unwrap(), int(0));
        assert_eq!(ra("2").set_mass(&m, &set(&[2, 3, 4, 5, 6, 7])).unwrap(), int(1));
    }

    #[test]
    fn measures_for_examples() {
        let ms = ra("1").measures_for(&set(&[2, 3, 4, 5, 6, 7])).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0].weights(), &weights(&[(2, 1, 2), (3, 1, 2)]));
        assert_eq!(ms[1].weights(), &weights(&[(4, 1, 4), (5, 1, 4), (6, 1, 4), (7, 1, 4)]));
        assert_eq!(Block::Dirac.measures_for(&set(&[5])).unwrap(), vec![ProbMeasure::dirac(5)]);
        assert_eq!(ra("1").measures_for(&set(&[3, 4])), Err(Error::NotDecomposable));
        // (4,5,6) is not maximal in S_1.
        assert_eq!(ra("1").measures_for(&set(&[2, 3, 4, 5, 6])), Err(Error::NotDecomposable));
    }

    #[test]
    fn expect_examples() {
        let f = set(&[2, 3, 4, 5, 6, 7]);
        let ones: BTreeMap<u64, BigRational> = f.as_slice().iter().map(|&i| (i, int(1))).collect();
        assert_eq!(ra("1").expect(&f, &ones).unwrap(), int(2));
        let g = set(&[2, 5]);
        let vals = BTreeMap::from([(2, int(3)), (5, int(7))]);
        assert_eq!(Block::Dirac.expect(&g, &vals).unwrap(), int(10));
        let vals = weights(&[(2, 1, 1), (3, 0, 1), (4, 8, 1), (5, 0, 1), (6, 0, 1), (7, 0, 1)]);
        assert_eq!(ra("1").expect(&f, &vals).unwrap(), rat(5, 2));
        assert!(ra("1").expect(&f, &BTreeMap::new()).is_err());
    }

    #[test]
    fn convex_block_examples() {
        let seq: Vec<Vector> = (1..=12).map(Vector::unit).collect();
        let f = set(&[2, 3, 4, 5, 6, 7]);
        let out = ra("1").convex_block_finite(&f, &seq, 3).unwrap();
        let half = rat(1, 2);
        let quarter = rat(1, 4);
        assert_eq!(out[0], Vector::from_pairs([(2, half.clone()), (3, half)]));
        assert_eq!(out[1], Vector::from_pairs((4..=7).map(|i| (i, quarter.clone()))));
        assert!(out[2].is_zero());
        let m = Prefix::parse("2,5,9,...").unwrap();
        let sub = Block::Dirac.convex_block(&m, 3, &seq).unwrap();
        assert_eq!(sub, vec![Vector::unit(2), Vector::unit(5), Vector::unit(9)]);
        let zeros = vec![Vector::zero(); 12];
        assert!(ra("1").convex_block_finite(&f, &zeros, 0).unwrap().iter().all(Vector::is_zero));
    }

    #[test]
    fn matches_brute_force_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for xi in ["0", "1", "2", "3", "w"] {
            let xi_o = Ordinal::parse(xi).unwrap();
            let block = Block::RepeatedAverages(xi_o.clone());
            for _ in 0..20 {
                let (m, r) = random_sample_prefix(&block, &mut rng);
                let (s, l) = block.support_range(&m, r).unwrap();
                let elems = m.take(s + l).unwrap();
                let mut rest: BTreeSet<u64> = elems.into_iter().collect();
                for n in 1..=r {
                    let want = ra_brute(&xi_o, &mut rest);
                    assert_eq!(block.measure(&m, n).unwrap().weights(), &want, "{xi} {m} {n}");
                }
            }
        }
    }

    #[test]
    fn axioms_hold_for_builtin_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for block in [Block::Dirac, ra("1"), ra("2"), ra("3"), ra("w")] {
            let samples: Vec<_> = (0..25).map(|_| random_sample_prefix(&block, &mut rng)).collect();
            let rep = verify_axioms(&block, &samples);
            assert!(rep.passed(), "{block}: {:?}", rep.failures);
            assert!(rep.checks > 0);
        }
    }

    struct Corrupted(Block);

    impl BlockSystem for Corrupted {
        fn companion(&self) -> Family {
            self.0.companion()
        }

        fn measure(&self, m: &Prefix, n: u64) -> Result<ProbMeasure> {
            let p = self.0.measure(m, n)?;
            if n < 2 || p.weights().len() < 2 {
                return Ok(p);
            }
            let mut w = p.weights().clone();
            let (&a, _) = w.iter().next().unwrap();
            let (&b, _) = w.iter().next_back().unwrap();
            let moved = w[&a].clone() / int(2);
            *w.get_mut(&a).unwrap() -= &moved;
            *w.get_mut(&b).unwrap() += moved;
            Ok(ProbMeasure::from_weights_unchecked(w))
        }
    }

    #[test]
    fn corrupted_measures_are_caught() {
        let m = Prefix::parse("2,3,...").unwrap();
        let rep = verify_axioms(&Corrupted(ra("1")), &[(m, 2)]);
        assert!(!rep.passed());
        assert!(rep.failures[0].contains("differs"));
    }

    #[test]
    fn max_atom_bounded_by_inverse_minimum() {
        for xi in 1..=3u64 {
            let block = Block::RepeatedAverages(Ordinal::finite(xi));
            // Beyond these starts the supports are astronomically long.
            let last = [30, 12, 2][xi as usize - 1];
            for start in 1..=last {
                let m = Prefix::arithmetic(start, 1);
                let p = block.measure(&m, 1).unwrap();
                assert!(p.max_atom() <= rat(1, start as i64), "xi={xi} start={start}");
            }
        }
    }

    #[test]
    fn thinning_meets_small_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = Prefix::naturals();
        let deltas = vec![rat(1, 10); 3];
        let out = thin_for_small_coefficients(&ra("1"), &l, &deltas, 20, &mut rng).unwrap();
        assert!(out.prefix.get(1).unwrap() >= 10);
        assert!(out.worst_ratio <= int(1));
        let ones = vec![int(1); 3];
        let out = thin_for_small_coefficients(&ra("1"), &l, &ones, 5, &mut rng).unwrap();
        assert_eq!(out.prefix.take(5).unwrap(), l.take(5).unwrap());
        // A second S^2 measure on a dense set already has about 2^64 atoms.
        let deltas = vec![rat(1, 4)];
        let out = thin_for_small_coefficients(&ra("2"), &l, &deltas, 3, &mut rng).unwrap();
        assert!(out.worst_ratio <= int(1));
        assert!(thin_for_small_coefficients(&Block::Dirac, &l, &deltas, 1, &mut rng).is_err());
    }

    #[test]
    fn measures_are_exact_probabilities() {
        let m = Prefix::parse("2,3,...").unwrap();
        for block in [ra("1"), ra("2"), ra("3")] {
            let p = block.measure(&m, 1).unwrap();
            assert!(p.total().is_one());
            assert!(ProbMeasure::new(p.weights().clone()).is_ok());
        }
        assert!(ProbMeasure::new(weights(&[(1, 1, 2)])).is_err());
        assert_eq!(Block::parse("RA(w+1)").unwrap().to_string(), "RA(w+1)");
        assert_eq!(Block::parse("dirac").unwrap(), Block::Dirac);
    }
}

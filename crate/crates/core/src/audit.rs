//! Truncation-level goodness, stability and profile computations.
//!
//! For a probability block with companion family `P`, a chain is a union
//! `F = F_1 u ... u F_t` of successive maximal members of `P`, and its value
//! is `s_k(E_F x)`: the domination constant, shifted by `k`, of the averages
//! `sum_{i in F_n} P_{F,n}(i) x_i`. All quantities here are computed over a
//! finite ground set and are truncation constants, not the infinitary
//! infima they approximate.

use std::collections::HashMap;

use crate::blocks::Block;
use crate::error::{Error, Result};
use crate::families::{Family, Oracle};
use crate::norms::{domination_constant, Scalar, SeqNormSpec, Space};
use crate::ordinal::Ordinal;
use crate::sets::{FiniteSet, Prefix};
use crate::vector::Vector;

/// Largest ground set for goodness enumeration.
pub const MAX_GOOD_SET: usize = 14;
/// Largest prefix truncation for stability enumeration.
pub const MAX_PREFIX: usize = 40;

/// A finite sequence `x_1, x_2, ...` with `x_i = vectors[i - 1]`.
#[derive(Clone, Debug)]
pub struct SeqSample {
    vectors: Vec<Vector>,
    pub label: String,
}

impl SeqSample {
    /// Rejects vectors of ground norm above 1.
    pub fn new(vectors: Vec<Vector>, label: impl Into<String>, ground: &Space) -> Result<Self> {
        for (n, v) in vectors.iter().enumerate() {
            let norm = ground.norm(v)?;
            let over = match &norm {
                Scalar::Approx(f) => *f > 1.0 + crate::norms::FLOAT_TOL,
                exact => exact.compare(&Scalar::Exact(num_traits::One::one())).is_gt(),
            };
            if over {
                return Err(Error::Domain(format!("sample vector {} has norm {norm} > 1", n + 1)));
            }
        }
        Ok(SeqSample { vectors, label: label.into() })
    }

    /// The first `n` unit vectors.
    pub fn canonical(n: u64) -> Self {
        SeqSample { vectors: (1..=n).map(Vector::unit).collect(), label: format!("e_1..e_{n}") }
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct AuditConfig {
    pub block: Block,
    pub zeta: Ordinal,
    pub k: u64,
    /// Ground space and target; its shift is replaced by `k`.
    pub spec: SeqNormSpec,
    pub prefix: Prefix,
    /// Number of prefix elements used as the ground set.
    pub truncation: usize,
    /// Cap on enumerated chains.
    pub budget: u64,
}

impl AuditConfig {
    pub fn new(block: Block, zeta: Ordinal, k: u64, spec: SeqNormSpec, prefix: Prefix, truncation: usize) -> Self {
        AuditConfig { block, zeta, k, spec, prefix, truncation, budget: 1_000_000 }
    }

    fn ground(&self) -> Result<Vec<u64>> {
        if self.truncation > MAX_PREFIX {
            return Err(Error::BudgetExceeded(format!("prefix truncation limited to {MAX_PREFIX}")));
        }
        let n = match self.prefix.known_len() {
            Some(len) => (len as usize).min(self.truncation),
            None => self.truncation,
        };
        self.prefix.take(n as u64)
    }

    fn shifted_spec(&self) -> SeqNormSpec {
        SeqNormSpec { shift: self.k, ..self.spec.clone() }
    }

    fn with(&self, zeta: Ordinal, k: u64, prefix: Prefix) -> AuditConfig {
        AuditConfig { zeta, k, prefix, ..self.clone() }
    }
}

/// A chain value with the chain attaining it.
#[derive(Clone, Debug)]
pub struct ChainMax {
    pub value: Scalar,
    pub witness: Vec<FiniteSet>,
    pub chains: u64,
    pub exact: bool,
}

/// Outcome of [`gamma_lower_search`].
#[derive(Clone, Debug)]
pub enum Search {
    Found { blocks: Vec<FiniteSet>, value: Scalar },
    Exhausted { max: Scalar },
}

struct Walker<'a> {
    block: &'a Block,
    spec: SeqNormSpec,
    sample: &'a SeqSample,
    /// Maximal companion sets inside the ground, sorted by minimum.
    maximal: Vec<FiniteSet>,
    /// Position (1-based) of each ground element in the prefix.
    position: HashMap<u64, u64>,
    outer: Option<Family>,
    averages: HashMap<FiniteSet, Vector>,
    evaluated: HashMap<Vec<FiniteSet>, (Scalar, bool)>,
    chains: u64,
    budget: u64,
}

/// Every subset of `ground` that is maximal in `p`.
fn maximal_sets(p: &Family, ground: &[u64], budget: u64) -> Result<Vec<FiniteSet>> {
    let oracle = Oracle::global();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut steps = 0u64;
    #[allow(clippy::too_many_arguments)]
    fn grow(
        p: &Family,
        oracle: &Oracle,
        ground: &[u64],
        from: usize,
        cur: &mut Vec<u64>,
        out: &mut Vec<FiniteSet>,
        steps: &mut u64,
        budget: u64,
    ) -> Result<()> {
        *steps += 1;
        if *steps > budget {
            return Err(Error::BudgetExceeded("too many companion sets in the ground".into()));
        }
        if !cur.is_empty() {
            let f = FiniteSet::new(cur.clone()).unwrap();
            if oracle.is_maximal(p, &f)? {
                out.push(f);
                // Maximal sets have no proper extensions in the family.
                return Ok(());
            }
        }
        for i in from..ground.len() {
            cur.push(ground[i]);
            if oracle.longest(p, cur)? == cur.len() {
                grow(p, oracle, ground, i + 1, cur, out, steps, budget)?;
            }
            cur.pop();
        }
        Ok(())
    }
    for i in 0..ground.len() {
        cur.push(ground[i]);
        if oracle.longest(p, &cur)? == 1 {
            grow(p, oracle, ground, i + 1, &mut cur, &mut out, &mut steps, budget)?;
        }
        cur.pop();
    }
    out.sort_by_key(|f| (FiniteSet::min(f), f.clone()));
    Ok(out)
}

impl<'a> Walker<'a> {
    fn new(cfg: &AuditConfig, sample: &'a SeqSample, block: &'a Block, ground: &[u64], outer: Option<Family>) -> Result<Self> {
        let maximal = maximal_sets(&block.companion(), ground, cfg.budget)?;
        let position = ground.iter().enumerate().map(|(i, &x)| (x, i as u64 + 1)).collect();
        Ok(Walker {
            block,
            spec: cfg.shifted_spec(),
            sample,
            maximal,
            position,
            outer,
            averages: HashMap::new(),
            evaluated: HashMap::new(),
            chains: 0,
            budget: cfg.budget,
        })
    }

    fn average(&mut self, f: &FiniteSet) -> Result<Vector> {
        if let Some(v) = self.averages.get(f) {
            return Ok(v.clone());
        }
        let top = FiniteSet::max(f).unwrap();
        if top as usize > self.sample.len() {
            return Err(Error::InsufficientPrefix(format!("sample has {} vectors, index {top} needed", self.sample.len())));
        }
        let v = self.block.measure(&Prefix::finite(f), 1)?.average(self.sample.vectors())?;
        self.averages.insert(f.clone(), v.clone());
        Ok(v)
    }

    fn value(&mut self, chain: &[FiniteSet]) -> Result<(Scalar, bool)> {
        if let Some(v) = self.evaluated.get(chain) {
            return Ok(v.clone());
        }
        let seq: Vec<Vector> = chain.iter().map(|f| self.average(f)).collect::<Result<_>>()?;
        let d = domination_constant(&seq, &self.spec)?;
        let out = (d.value(), d.exact);
        self.evaluated.insert(chain.to_vec(), out.clone());
        Ok(out)
    }

    /// Whether the chain's minima, as prefix positions, form a member of
    /// the outer family.
    fn admissible(&self, chain: &[FiniteSet]) -> Result<bool> {
        let Some(outer) = &self.outer else { return Ok(true) };
        let pos: Vec<u64> = chain.iter().map(|f| self.position[&FiniteSet::min(f).unwrap()]).collect();
        Ok(Oracle::global().longest(outer, &pos)? == pos.len())
    }

    fn outer_maximal(&self, chain: &[FiniteSet]) -> Result<bool> {
        let Some(outer) = &self.outer else { return Ok(false) };
        let pos: Vec<u64> = chain.iter().map(|f| self.position[&FiniteSet::min(f).unwrap()]).collect();
        Oracle::global().is_maximal(outer, &FiniteSet::new(pos).unwrap())
    }

    /// Visits every right-maximal admissible chain, calling `leaf`; stops
    /// when `leaf` returns `true`.
    fn walk(&mut self, chain: &mut Vec<FiniteSet>, leaf: &mut dyn FnMut(&mut Self, &[FiniteSet]) -> Result<bool>) -> Result<bool> {
        self.chains += 1;
        if self.chains > self.budget {
            return Err(Error::BudgetExceeded(format!("more than {} chains", self.budget)));
        }
        let after = chain.last().map_or(0, |f| FiniteSet::max(f).unwrap());
        let mut extended = false;
        for idx in 0..self.maximal.len() {
            if FiniteSet::min(&self.maximal[idx]).unwrap() <= after {
                continue;
            }
            chain.push(self.maximal[idx].clone());
            if self.admissible(chain)? {
                extended = true;
                if self.walk(chain, leaf)? {
                    chain.pop();
                    return Ok(true);
                }
            }
            chain.pop();
        }
        if !extended {
            return leaf(self, chain);
        }
        Ok(false)
    }

    fn max_over_chains(&mut self) -> Result<ChainMax> {
        let mut best = (Scalar::zero(), Vec::new());
        let mut exact = true;
        let mut leaf = |w: &mut Self, chain: &[FiniteSet]| -> Result<bool> {
            if chain.is_empty() {
                return Ok(false);
            }
            let (v, e) = w.value(chain)?;
            exact &= e;
            if v.compare(&best.0).is_gt() {
                best = (v, chain.to_vec());
            }
            Ok(false)
        };
        self.walk(&mut Vec::new(), &mut leaf)?;
        Ok(ChainMax { value: best.0, witness: best.1, chains: self.chains, exact })
    }
}

/// `max s_k(E_F x)` over chains `F` inside `g`. By bimonotonicity only
/// chains that cannot be extended on the right need evaluating.
pub fn goodness_constant(g: &FiniteSet, cfg: &AuditConfig, sample: &SeqSample) -> Result<ChainMax> {
    if g.len() > MAX_GOOD_SET {
        return Err(Error::BudgetExceeded(format!("goodness enumeration limited to |G| <= {MAX_GOOD_SET}")));
    }
    let mut w = Walker::new(cfg, sample, &cfg.block, g.as_slice(), None)?;
    w.max_over_chains()
}

/// The least `C` such that every member of `F_zeta^M[P]` inside the
/// truncated prefix is `(k, C)`-good. Since goodness is hereditary this is
/// the maximum over admissible chains.
pub fn stability_constant(cfg: &AuditConfig, sample: &SeqSample) -> Result<ChainMax> {
    let ground = cfg.ground()?;
    let outer = Family::Fine(cfg.zeta.clone());
    let mut w = Walker::new(cfg, sample, &cfg.block, &ground, Some(outer))?;
    w.max_over_chains()
}

/// A maximal member of `F_zeta[P]` inside the truncated prefix with
/// `s_k(E_F x) >= d`, or the largest value seen.
pub fn gamma_lower_search(cfg: &AuditConfig, sample: &SeqSample, d: &Scalar) -> Result<Search> {
    let ground = cfg.ground()?;
    let outer = Family::Fine(cfg.zeta.clone());
    let mut w = Walker::new(cfg, sample, &cfg.block, &ground, Some(outer))?;
    let mut max = Scalar::zero();
    let mut found = None;
    let mut leaf = |w: &mut Walker, chain: &[FiniteSet]| -> Result<bool> {
        if chain.is_empty() || !w.outer_maximal(chain)? {
            return Ok(false);
        }
        let (v, _) = w.value(chain)?;
        if v.compare(&max).is_gt() {
            max = v.clone();
        }
        if v.compare(d).is_ge() {
            found = Some((chain.to_vec(), v));
            return Ok(true);
        }
        Ok(false)
    };
    w.walk(&mut Vec::new(), &mut leaf)?;
    Ok(match found {
        Some((blocks, value)) => Search::Found { blocks, value },
        None => Search::Exhausted { max },
    })
}

/// Recomputes `s_k(E_F x)` for a witness chain from scratch.
pub fn replay(blocks: &[FiniteSet], cfg: &AuditConfig, sample: &SeqSample) -> Result<Scalar> {
    let p = cfg.block.companion();
    let mut seq = Vec::new();
    for (n, f) in blocks.iter().enumerate() {
        if !Oracle::global().is_maximal(&p, f)? || (n > 0 && !blocks[n - 1].precedes(f)) {
            return Err(Error::NotDecomposable);
        }
        seq.push(cfg.block.measure(&Prefix::finite(f), 1)?.average(sample.vectors())?);
    }
    Ok(domination_constant(&seq, &cfg.shifted_spec())?.value())
}

#[derive(Clone, Debug)]
pub struct ProfileEntry {
    pub zeta: Ordinal,
    pub k: u64,
    pub value: Scalar,
    pub exact: bool,
}

/// Truncation stability constants over a grid of `(zeta, k)`.
pub fn gamma_profile(cfg: &AuditConfig, zetas: &[Ordinal], ks: &[u64], sample: &SeqSample) -> Result<Vec<ProfileEntry>> {
    let mut out = Vec::new();
    for z in zetas {
        for &k in ks {
            let c = stability_constant(&cfg.with(z.clone(), k, cfg.prefix.clone()), sample)?;
            out.push(ProfileEntry { zeta: z.clone(), k, value: c.value, exact: c.exact });
        }
    }
    Ok(out)
}

/// Checks of the profile laws at truncation.
#[derive(Clone, Debug, Default)]
pub struct LawReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl LawReport {
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

fn le_with_slack(a: &Scalar, b: &Scalar, slack: f64) -> bool {
    if slack == 0.0 {
        return a.compare(b).is_le();
    }
    a.to_f64() <= b.to_f64() + slack + 1e-12 * (1.0 + b.to_f64().abs())
}

/// Checks, on the given grid:
/// - the value at `zeta = 0` is 0;
/// - monotonicity in `zeta`: for `zeta < zeta'` in the grid, the value for
///   `zeta` on `M` minus its first `l` elements is at most the value for
///   `zeta'` on `M`, where `l` is the almost-monotone threshold (members of
///   `F_zeta` above `l` lie in `F_zeta'`);
/// - `value(zeta + p, k) <= p + value(zeta, k + p)` for each `p`.
pub fn check_profile_laws(cfg: &AuditConfig, zetas: &[Ordinal], ks: &[u64], ps: &[u64], sample: &SeqSample) -> Result<LawReport> {
    let mut rep = LawReport::default();
    let at = |z: &Ordinal, k: u64, m: &Prefix| -> Result<Scalar> { Ok(stability_constant(&cfg.with(z.clone(), k, m.clone()), sample)?.value) };
    let n = cfg.truncation as u64;
    for &k in ks {
        let v0 = at(&Ordinal::zero(), k, &cfg.prefix)?;
        rep.check(v0.compare(&Scalar::zero()).is_eq(), || format!("profile(0, {k}) = {v0}"));
        for (i, z) in zetas.iter().enumerate() {
            for z2 in &zetas[i + 1..] {
                if z >= z2 {
                    continue;
                }
                let Some(l) = crate::families::almost_monotone_threshold(z, z2, n)? else { continue };
                let lower = at(z, k, &cfg.prefix.drop_first(l))?;
                let upper = at(z2, k, &cfg.prefix)?;
                rep.check(lower.compare(&upper).is_le(), || format!("zeta={z} (tail {l}) gives {lower} > zeta'={z2} gives {upper}, k={k}"));
            }
        }
        for z in zetas {
            for &p in ps {
                let big = at(&z.add(&Ordinal::finite(p)), k, &cfg.prefix)?;
                let small = at(z, k + p, &cfg.prefix)?;
                rep.check(le_with_slack(&big, &small, p as f64), || format!("profile({z}+{p}, {k}) = {big} > {p} + profile({z}, {}) = {small}", k + p));
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::Target;
    use crate::vector::{int, rat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn l2_cfg(block: Block, zeta: u64, prefix: &str, truncation: usize) -> AuditConfig {
        AuditConfig::new(
            block,
            Ordinal::finite(zeta),
            0,
            SeqNormSpec::new(Space::l(2), Target::c0(), 0),
            Prefix::parse(prefix).unwrap(),
            truncation,
        )
    }

    fn set(v: &[u64]) -> FiniteSet {
        FiniteSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn goodness_examples() {
        let sample = SeqSample::canonical(20);
        let cfg = l2_cfg(Block::Dirac, 1, "1,2,...", 10);
        assert_eq!(goodness_constant(&FiniteSet::empty(), &cfg, &sample).unwrap().value, Scalar::zero());
        let g = goodness_constant(&set(&[3, 5, 8, 9]), &cfg, &sample).unwrap();
        assert_eq!(g.value, Scalar::Exact(int(2)));
        assert!(g.exact);
        // With repeated averages of level 1 on (2,...,7) the chain is
        // (2,3) < (4,5,6,7) with averages of norms 1/sqrt(2) and 1/2.
        let cfg = l2_cfg(Block::RepeatedAverages(Ordinal::finite(1)), 1, "1,2,...", 10);
        let g = goodness_constant(&set(&[2, 3, 4, 5, 6, 7]), &cfg, &sample).unwrap();
        assert_eq!(g.value, Scalar::root(rat(3, 4), 2));
        assert_eq!(g.witness, vec![set(&[2, 3]), set(&[4, 5, 6, 7])]);
        // On (2,...,6) no two maximal sets fit, so single pairs win.
        let g = goodness_constant(&set(&[2, 3, 4, 5, 6]), &cfg, &sample).unwrap();
        assert_eq!(g.value, Scalar::root(rat(1, 2), 2));
    }

    #[test]
    fn dirac_goodness_is_subsequence_domination() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let t = Space::tsirelson(1, rat(1, 2)).unwrap();
        let vectors: Vec<Vector> = (1..=10u64).map(|i| Vector::from_pairs([(i + 2, int(1)), (i + 3, rat(-1, 2))])).collect();
        let vectors: Vec<Vector> =
            vectors.into_iter().map(|v| { let n = t.norm(&v).unwrap().as_exact().unwrap().clone(); v.scale(&(int(1) / n)) }).collect();
        let sample = SeqSample::new(vectors, "pairs", &t).unwrap();
        let mut cfg = l2_cfg(Block::Dirac, 1, "1,2,...", 10);
        cfg.spec = SeqNormSpec::new(t.clone(), Target::c0(), 0);
        for _ in 0..10 {
            let g: Vec<u64> = (1..=10).filter(|_| rng.gen_bool(0.5)).collect();
            let g = FiniteSet::new(g).unwrap();
            let got = goodness_constant(&g, &cfg, &sample).unwrap().value;
            let mut want = Scalar::zero();
            for mask in 1u32..(1 << g.len()) {
                let seq: Vec<Vector> = g.as_slice().iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| sample.vectors()[i as usize - 1].clone()).collect();
                want = want.max(domination_constant(&seq, &cfg.spec).unwrap().value());
            }
            assert_eq!(got, want, "{g}");
        }
    }

    #[test]
    fn goodness_is_hereditary() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let sample = SeqSample::canonical(14);
        for block in [Block::Dirac, Block::RepeatedAverages(Ordinal::finite(1))] {
            let cfg = l2_cfg(block, 1, "1,2,...", 10);
            for _ in 0..10 {
                let g: Vec<u64> = (1..=12).filter(|_| rng.gen_bool(0.6)).collect();
                let sub: Vec<u64> = g.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
                let a = goodness_constant(&FiniteSet::new(sub).unwrap(), &cfg, &sample).unwrap().value;
                let b = goodness_constant(&FiniteSet::new(g).unwrap(), &cfg, &sample).unwrap().value;
                assert!(a.compare(&b).is_le());
            }
        }
    }

    #[test]
    fn stability_examples() {
        let sample = SeqSample::canonical(20);
        let cfg = l2_cfg(Block::Dirac, 0, "1,2,...", 10);
        assert_eq!(stability_constant(&cfg, &sample).unwrap().value, Scalar::zero());
        for m in 1..=4 {
            let cfg = l2_cfg(Block::Dirac, m, "1,2,...", 8);
            assert_eq!(stability_constant(&cfg, &sample).unwrap().value, Scalar::root(int(m as i64), 2));
        }
        let t = Space::tsirelson(1, rat(1, 2)).unwrap();
        let mut cfg = l2_cfg(Block::Dirac, 2, "4-11", 8);
        cfg.spec = SeqNormSpec::new(t.clone(), Target::c0(), 0);
        let sample = SeqSample::new((1..=11).map(Vector::unit).collect(), "basis", &t).unwrap();
        assert_eq!(stability_constant(&cfg, &sample).unwrap().value, Scalar::Exact(int(1)));
        match gamma_lower_search(&cfg, &sample, &Scalar::Approx(1.5)).unwrap() {
            Search::Exhausted { max } => assert_eq!(max, Scalar::Exact(int(1))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lower_search_finds_replayable_witnesses() {
        let sample = SeqSample::canonical(20);
        let cfg = l2_cfg(Block::Dirac, 4, "1,2,...", 8);
        match gamma_lower_search(&cfg, &sample, &Scalar::Approx(1.9)).unwrap() {
            Search::Found { blocks, value } => {
                assert_eq!(blocks.len(), 4);
                assert_eq!(value, Scalar::Exact(int(2)));
                assert_eq!(replay(&blocks, &cfg, &sample).unwrap(), value);
            }
            other => panic!("{other:?}"),
        }
        let cfg = l2_cfg(Block::RepeatedAverages(Ordinal::finite(1)), 2, "2,3,...", 12);
        match gamma_lower_search(&cfg, &sample, &Scalar::zero()).unwrap() {
            Search::Found { blocks, value } => assert_eq!(replay(&blocks, &cfg, &sample).unwrap(), value),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn profile_laws_hold_at_truncation() {
        let t = Space::tsirelson(1, rat(1, 2)).unwrap();
        let zetas = [Ordinal::zero(), Ordinal::finite(1), Ordinal::finite(2), Ordinal::finite(3), Ordinal::omega()];
        for (ground, block) in [(Space::l(2), Block::Dirac), (t.clone(), Block::Dirac), (Space::l(2), Block::RepeatedAverages(Ordinal::finite(1)))] {
            let sample = SeqSample::new((1..=16).map(Vector::unit).collect(), "basis", &ground).unwrap();
            let mut cfg = l2_cfg(block, 0, "2,3,...", 8);
            cfg.spec = SeqNormSpec::new(ground, Target::c0(), 0);
            let rep = check_profile_laws(&cfg, &zetas, &[0, 1], &[1, 2], &sample).unwrap();
            assert!(rep.passed(), "{:?}", rep.failures);
            let prof = gamma_profile(&cfg, &zetas[..4], &[0], &sample).unwrap();
            for w in prof.windows(2) {
                assert!(w[0].value.compare(&w[1].value).is_le());
            }
        }
    }

    #[test]
    fn rejects_large_samples() {
        assert!(SeqSample::new(vec![Vector::from_ints(&[(1, 2)])], "big", &Space::l(2)).is_err());
    }
}

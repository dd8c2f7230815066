//! Constructive combinatorial procedures: diagonalization of nested
//! chains, the `(F, E)` witness for pairs of nice families, and covers of
//! composed families by repeated-averages supports. Every output is
//! re-validated by the family and block oracles.

use crate::blocks::Block;
use crate::error::{Error, Result};
use crate::families::{self, Family, Oracle};
use crate::ordinal::{Kind, Ordinal};
use crate::sets::{FiniteSet, Prefix, Tail};

/// Elements compared when checking that infinite prefixes are nested.
const NEST_WINDOW: u64 = 64;

/// `M_1 ⊇ M_2 ⊇ ...`, checked on explicit parts (and a window of the tails).
#[derive(Clone, Debug)]
pub struct NestedChain {
    prefixes: Vec<Prefix>,
}

impl NestedChain {
    pub fn new(prefixes: Vec<Prefix>) -> Result<Self> {
        for (n, w) in prefixes.windows(2).enumerate() {
            let len = w[1].known_len().unwrap_or(NEST_WINDOW.max(w[1].explicit().len() as u64));
            for x in w[1].take(len)? {
                if !w[0].contains(x)? {
                    return Err(Error::Domain(format!("M_{} contains {x}, which is not in M_{}", n + 2, n + 1)));
                }
            }
        }
        Ok(NestedChain { prefixes })
    }

    pub fn prefixes(&self) -> &[Prefix] {
        &self.prefixes
    }
}

/// `M(n) = M_n(n)`.
pub fn diagonalize(chain: &NestedChain) -> Result<Prefix> {
    let mut out = Vec::new();
    for (n, m) in chain.prefixes.iter().enumerate() {
        let x = m.get(n as u64 + 1)?;
        if out.last().is_some_and(|&l| x <= l) {
            return Err(Error::Domain(format!("diagonal is not increasing at position {}", n + 1)));
        }
        out.push(x);
    }
    Prefix::new(out, None)
}

#[derive(Clone, Debug)]
pub struct InclusionReport {
    pub members: usize,
    /// Each member with the least `k` such that it lies in `F_{zeta_k}^{M_k}[P]`.
    pub covered: Vec<(FiniteSet, u64)>,
    pub uncovered: Vec<FiniteSet>,
}

/// Checks `F_zeta^M[P] ⊆ U_k F_{zeta_k}^{M_k}[P]` for every member inside
/// `{1..ground}`, where `M` is the diagonal and `zeta_k = zeta[k]`.
pub fn diagonal_inclusion_check(chain: &NestedChain, zeta: &Ordinal, p: &Family, ground: u64) -> Result<InclusionReport> {
    if zeta.kind() != Kind::Limit {
        return Err(Error::Domain(format!("{zeta} is not a limit ordinal")));
    }
    let m = diagonalize(chain)?;
    let elems: Vec<u64> = m.explicit().iter().copied().filter(|&x| x <= ground).collect();
    let big = Family::compose_rel(Family::Fine(zeta.clone()), p.clone(), m.clone());
    let smalls: Vec<Family> = chain
        .prefixes
        .iter()
        .enumerate()
        .map(|(k, mk)| Ok(Family::compose_rel(Family::Fine(zeta.fundamental(k as u64 + 1)?), p.clone(), mk.clone())))
        .collect::<Result<_>>()?;
    let oracle = Oracle::global();
    let mut members = Vec::new();
    let mut cur = Vec::new();
    collect_members(oracle, &big, &elems, 0, &mut cur, &mut members)?;
    let mut covered = Vec::new();
    let mut uncovered = Vec::new();
    for f in &members {
        let mut hit = None;
        for (k, fam) in smalls.iter().enumerate() {
            if oracle.longest(fam, f.as_slice())? == f.len() {
                hit = Some(k as u64 + 1);
                break;
            }
        }
        match hit {
            Some(k) => covered.push((f.clone(), k)),
            None => uncovered.push(f.clone()),
        }
    }
    Ok(InclusionReport { members: members.len(), covered, uncovered })
}

fn collect_members(oracle: &Oracle, fam: &Family, elems: &[u64], from: usize, cur: &mut Vec<u64>, out: &mut Vec<FiniteSet>) -> Result<()> {
    out.push(FiniteSet::new(cur.clone()).unwrap());
    for i in from..elems.len() {
        cur.push(elems[i]);
        if oracle.longest(fam, cur)? == cur.len() {
            collect_members(oracle, fam, elems, i + 1, cur, out)?;
        }
        cur.pop();
    }
    Ok(())
}

/// The `(F, E)` pair with `m < F ∈ MAX(Q)` inside `M`, `L(F \ min F) = K(E)`
/// and `E ∈ P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairWitness {
    pub f: FiniteSet,
    pub e: FiniteSet,
    /// The auxiliary set with `N(G) ∈ P` for every `G ∈ Q`.
    pub auxiliary: Prefix,
}

/// Ground used to validate auxiliary candidates.
const AUX_GROUND: u64 = 12;

/// Searches identity, shifts, doublings and powers of two for `N` with
/// `N(Q) ⊆ P`, validated on members of `Q` inside `{1..12}`.
pub fn find_auxiliary(p: &Family, q: &Family) -> Result<Prefix> {
    let mut candidates = vec![Prefix::naturals()];
    candidates.extend((2..=8).map(|s| Prefix::arithmetic(s, 1)));
    candidates.extend((2..=4).map(|c| Prefix::arithmetic(c, c)));
    candidates.push(Prefix::new(Vec::new(), Some(Tail::Geometric { start: 2, factor: 2 }))?);
    let members = families::materialize(q, AUX_GROUND, 1 << 20)?;
    let oracle = Oracle::global();
    'next: for n in candidates {
        for g in members.sets() {
            let img = n.image(g)?;
            if !oracle.contains(p, &img)? {
                continue 'next;
            }
        }
        return Ok(n);
    }
    Err(Error::AuxiliaryNotFound)
}

/// The `n` with `L(M(n)) = target`.
fn locate(m: &Prefix, l: &Prefix, target: u64) -> Result<u64> {
    let missing = || Error::Domain(format!("{target} is not in L(M)"));
    let j = l.position(target)?.ok_or_else(missing)? + 1;
    Ok(m.position(j)?.ok_or_else(missing)? + 1)
}

pub fn pair_witness(p: &Family, q: &Family, m: &Prefix, l: &Prefix, k: &Prefix, min_gap: u64) -> Result<PairWitness> {
    let aux = find_auxiliary(p, q)?;
    let oracle = Oracle::global();
    let mut ks = vec![min_gap + 1];
    let mut ns = vec![locate(m, l, k.get(ks[0])?)?];
    loop {
        let f = FiniteSet::new(ns.iter().map(|&n| m.get(n)).collect::<Result<_>>()?).unwrap();
        if !oracle.contains(q, &f)? {
            return Err(Error::Domain(format!("{f} left the family before becoming maximal")));
        }
        if oracle.is_maximal(q, &f)? {
            let e = FiniteSet::new(ks[1..].to_vec()).unwrap();
            let w = PairWitness { f, e, auxiliary: aux };
            validate_pair(p, q, m, l, k, min_gap, &w)?;
            return Ok(w);
        }
        let last = *ns.last().unwrap();
        let next_k = aux.get(m.get(last)?)? + 1;
        let next_n = locate(m, l, k.get(next_k)?)?;
        ks.push(next_k);
        ns.push(next_n);
    }
}

/// Independent check of the three properties.
pub fn validate_pair(p: &Family, q: &Family, m: &Prefix, l: &Prefix, k: &Prefix, min_gap: u64, w: &PairWitness) -> Result<()> {
    let oracle = Oracle::global();
    let fail = |what: &str| Err(Error::Domain(format!("witness fails {what}")));
    let Some(lo) = FiniteSet::min(&w.f) else { return fail("(i): F is empty") };
    if lo <= min_gap || !oracle.is_maximal(q, &w.f)? {
        return fail("(i)");
    }
    for &x in w.f.as_slice() {
        if !m.contains(x)? {
            return fail("(i): F is not inside M");
        }
    }
    let rest: Vec<u64> = w.f.as_slice()[1..].iter().map(|&x| l.get(x)).collect::<Result<_>>()?;
    let ke: Vec<u64> = w.e.as_slice().iter().map(|&x| k.get(x)).collect::<Result<_>>()?;
    if rest != ke {
        return fail("(ii)");
    }
    if !oracle.contains(p, &w.e)? {
        return fail("(iii)");
    }
    Ok(())
}

/// `K(1) = 1`, `K(p + 1) = K(p) + p + 1`.
pub fn k_sequence(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut v = 1;
    for p in 1..=n {
        out.push(v);
        v += p + 1;
    }
    out
}

/// `T(n) = min E_{K(n)}` for the successive maximal `S_xi` sets `E_i` of `M`.
#[derive(Clone, Debug)]
pub struct Thinned {
    pub t: Prefix,
}

pub fn thin_for_cover(xi: &Ordinal, m: &Prefix, count: u64) -> Result<Thinned> {
    let block = Block::RepeatedAverages(xi.clone());
    let mut t = Vec::new();
    for kn in k_sequence(count) {
        let (start, _) = block.support_range(m, kn)?;
        t.push(m.at(start)?);
    }
    Ok(Thinned { t: Prefix::new(t, None)? })
}

#[derive(Clone, Debug)]
pub struct Cover {
    pub n: Prefix,
    pub h: FiniteSet,
    /// `F_1, ..., F_t`.
    pub blocks: Vec<FiniteSet>,
}

/// Given `F ∈ F_{w^mu}^T[S_xi]` with `T` from [`thin_for_cover`], builds
/// `N ⊆ M` and `H ∈ F_{w^mu}` with `F = U_{n in H} supp(S^xi_{N,n})`.
pub fn block_cover(xi: &Ordinal, mu: &Ordinal, m: &Prefix, thin: &Thinned, f: &FiniteSet) -> Result<Cover> {
    let block = Block::RepeatedAverages(xi.clone());
    let outer = Family::Fine(Ordinal::omega_pow(mu.clone()));
    if f.is_empty() {
        return Ok(Cover { n: m.clone(), h: FiniteSet::empty(), blocks: Vec::new() });
    }
    let blocks = families::decompose(&block.companion(), f)?;
    let t = &thin.t;
    let pos = |x: u64| -> Result<u64> {
        t.position(x)?.map(|i| i + 1).ok_or_else(|| Error::Domain(format!("{x} is not in T")))
    };
    let is: Vec<u64> = blocks.iter().map(|b| pos(FiniteSet::min(b).unwrap())).collect::<Result<_>>()?;
    let js: Vec<u64> = blocks.iter().map(|b| pos(FiniteSet::max(b).unwrap())).collect::<Result<_>>()?;
    let h = FiniteSet::new(is.clone()).unwrap();
    if !families::contains(&outer, &h)? {
        return Err(Error::Domain(format!("F is not in F_(w^{mu})^T[S_{xi}]")));
    }
    let kseq = k_sequence(*js.iter().chain(&is).max().unwrap() + 1);
    let kk = |n: u64| kseq[n as usize - 1];
    let e = |i: u64| block.support(m, i);
    let mut explicit: Vec<u64> = Vec::new();
    for (n, b) in blocks.iter().enumerate() {
        // Indices J strictly between K(j_{n-1}) (or 1) and K(i_n).
        let (lo, need) = if n == 0 { (1, is[0] - 1) } else { (kk(js[n - 1]), is[n] - is[n - 1] - 1) };
        if need > 0 && lo + need >= kk(is[n]) {
            return Err(Error::InsufficientPrefix("no room for the filler blocks".into()));
        }
        for i in lo + 1..=lo + need {
            explicit.extend_from_slice(e(i)?.as_slice());
        }
        explicit.extend_from_slice(b.as_slice());
    }
    let top = *explicit.last().unwrap();
    let after = m.position(top)?.ok_or_else(|| Error::Domain("F is not inside M".into()))?;
    let n = m.drop_first(after + 1).prepend(&explicit)?;
    let cover = Cover { n, h, blocks };
    validate_cover(xi, mu, f, &cover)?;
    Ok(cover)
}

/// Checks `H ∈ F_{w^mu}` and that the supports indexed by `H` tile `F`.
pub fn validate_cover(xi: &Ordinal, mu: &Ordinal, f: &FiniteSet, c: &Cover) -> Result<()> {
    let block = Block::RepeatedAverages(xi.clone());
    if !families::contains(&Family::Fine(Ordinal::omega_pow(mu.clone())), &c.h)? {
        return Err(Error::Domain(format!("H = {} is not in F_(w^{mu})", c.h)));
    }
    let mut union = FiniteSet::empty();
    for &n in c.h.as_slice() {
        union = union.union(&block.support(&c.n, n)?);
    }
    if union != *f {
        return Err(Error::Domain(format!("supports over H give {union}, not {f}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::is_spread;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(v: &[u64]) -> FiniteSet {
        FiniteSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn diagonal_examples() {
        let m = Prefix::parse("2,5,9,...").unwrap();
        let chain = NestedChain::new(vec![m.clone(); 6]).unwrap();
        assert_eq!(diagonalize(&chain).unwrap().take(6).unwrap(), m.take(6).unwrap());
        let chain = NestedChain::new((1..=6).map(|n| Prefix::arithmetic(n, 1)).collect()).unwrap();
        assert_eq!(diagonalize(&chain).unwrap().explicit(), &[1, 3, 5, 7, 9, 11]);
        let bad = vec![Prefix::arithmetic(1, 2), Prefix::arithmetic(2, 2)];
        assert!(NestedChain::new(bad).is_err());
    }

    #[test]
    fn diagonal_inclusion() {
        let chain = NestedChain::new((1..=8).map(|n| Prefix::arithmetic(n, 1)).collect()).unwrap();
        let rep = diagonal_inclusion_check(&chain, &Ordinal::omega(), &Family::schreier(1), 12).unwrap();
        assert!(rep.uncovered.is_empty(), "{:?}", rep.uncovered);
        assert!(rep.members > 1);
        assert!(rep.covered.iter().any(|(f, k)| f.is_empty() && *k == 1));
        assert!(diagonal_inclusion_check(&chain, &Ordinal::finite(3), &Family::schreier(1), 12).is_err());
    }

    #[test]
    fn pair_examples() {
        let s1 = Family::schreier(1);
        let m = Prefix::parse("2,4,...").unwrap();
        let l = Prefix::parse("1,3,...").unwrap();
        let k = Prefix::parse("3,7,...").unwrap();
        for gap in 0..5 {
            let w = pair_witness(&s1, &s1, &m, &l, &k, gap).unwrap();
            assert_eq!(w.auxiliary, Prefix::naturals());
            validate_pair(&s1, &s1, &m, &l, &k, gap, &w).unwrap();
        }
        let w = pair_witness(&s1, &Family::schreier(0), &m, &l, &k, 3).unwrap();
        assert_eq!(w.f.len(), 1);
        assert!(w.e.is_empty());
        let short = Prefix::parse("3,7,11").unwrap();
        assert!(matches!(pair_witness(&s1, &s1, &m, &l, &short, 10), Err(Error::InsufficientPrefix(_))));
        // No increasing map sends two-point sets of S_1 into S_0.
        assert!(matches!(pair_witness(&Family::schreier(0), &s1, &m, &l, &k, 1), Err(Error::AuxiliaryNotFound)));
    }

    #[test]
    fn cover_examples() {
        assert_eq!(k_sequence(5), vec![1, 3, 6, 10, 15]);
        let xi = Ordinal::finite(1);
        let mu = Ordinal::finite(1);
        let m = Prefix::parse("2,3,...").unwrap();
        let thin = thin_for_cover(&xi, &m, 10).unwrap();
        assert_eq!(thin.t.take(3).unwrap(), vec![2, 8, 64]);
        // One maximal S_1 block starting at T(2) = 8.
        let f = FiniteSet::new(thin.t.slice(1, 9).unwrap()).unwrap();
        let c = block_cover(&xi, &mu, &m, &thin, &f).unwrap();
        assert_eq!(c.h, set(&[2]));
        assert_eq!(c.n.take(4).unwrap(), vec![4, 5, 6, 7]);
        let c = block_cover(&xi, &mu, &m, &thin, &FiniteSet::empty()).unwrap();
        assert!(c.h.is_empty());
        // Not a member of F^T[S_1]: elements outside T.
        assert!(block_cover(&xi, &mu, &m, &thin, &set(&[2, 3])).is_err());
    }

    #[test]
    fn random_covers_replay() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let xi = Ordinal::finite(1);
        for _ in 0..20 {
            let a = rng.gen_range(2..=3u64);
            let m = Prefix::arithmetic(a, 1);
            let thin = thin_for_cover(&xi, &m, 10).unwrap();
            let start = if a == 2 { rng.gen_range(1..=2u64) } else { 1 };
            let lo = thin.t.get(start).unwrap();
            let mut rest: Vec<u64> = thin.t.slice(start, 10).unwrap();
            while rest.len() as u64 > lo - 1 {
                rest.remove(rng.gen_range(0..rest.len()));
            }
            let mut f = vec![lo];
            f.extend(rest);
            let f = FiniteSet::new(f).unwrap();
            let c = block_cover(&xi, &Ordinal::finite(1), &m, &thin, &f).unwrap();
            validate_cover(&xi, &Ordinal::finite(1), &f, &c).unwrap();
        }
    }

    #[test]
    fn image_preimages_are_spreads() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        for _ in 0..100 {
            let m: Vec<u64> = (1..=40).filter(|_| rng.gen_bool(0.6)).collect();
            let n: Vec<u64> = m.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
            if n.len() < 4 {
                continue;
            }
            let (mp, np) = (Prefix::new(m, None).unwrap(), Prefix::new(n.clone(), None).unwrap());
            let f: Vec<u64> = (1..=n.len() as u64).filter(|_| rng.gen_bool(0.5)).collect();
            let f = FiniteSet::new(f).unwrap();
            let g = mp.preimage(&np.image(&f).unwrap()).unwrap().unwrap();
            assert!(is_spread(&g, &f).unwrap());
        }
    }
}

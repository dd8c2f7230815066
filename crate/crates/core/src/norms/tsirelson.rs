//! The Figiel–Johnson Tsirelson norm `T_{mu,theta}` and its norming set.
//!
//! Only the support of a vector matters, so the recursion runs over runs of
//! consecutive support points. An admissible family of intervals can always
//! be shrunk so that each interval starts at a support point (starting later
//! only spreads the minima) and extended rightwards to the next interval, so
//! it suffices to partition a run `[p..j]` of support positions into groups
//! whose first support indices form a member of `S_mu`.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::families::{Family, Oracle, DEFAULT_BUDGET};
use crate::ordinal::Ordinal;
use crate::vector::{fmt_rational, Vector};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tsirelson {
    mu: Ordinal,
    theta: BigRational,
}

impl fmt::Display for Tsirelson {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T(mu={},theta={})", self.mu, fmt_rational(&self.theta))
    }
}

/// How the norm of a run was attained.
#[derive(Clone, Debug)]
enum Choice {
    /// A single coordinate, by support position.
    Coord(usize),
    /// `theta` times the sum over groups starting at these positions and
    /// ending at the run's end.
    Groups(Vec<usize>),
}

struct Table {
    /// `val[p][j]` for `p <= j`: norm of the restriction to support positions `p..=j`.
    val: Vec<Vec<BigRational>>,
    choice: Vec<Vec<Choice>>,
}

impl Tsirelson {
    pub fn new(mu: Ordinal, theta: BigRational) -> Result<Self> {
        if theta <= BigRational::zero() || theta >= BigRational::one() {
            return Err(Error::Domain("theta must lie in (0,1)".into()));
        }
        Ok(Tsirelson { mu, theta })
    }

    pub fn mu(&self) -> &Ordinal {
        &self.mu
    }

    pub fn theta(&self) -> &BigRational {
        &self.theta
    }

    pub fn norm(&self, x: &Vector) -> Result<BigRational> {
        Ok(self.norm_with_functional(x)?.0)
    }

    /// The norm together with a norming functional `f` in the norming set
    /// with `<f, x> = ||x||`.
    pub fn norm_with_functional(&self, x: &Vector) -> Result<(BigRational, Vector)> {
        let pts: Vec<(u64, BigRational)> = x.iter().map(|(i, a)| (i, a.clone())).collect();
        if pts.is_empty() {
            return Ok((BigRational::zero(), Vector::zero()));
        }
        let idx: Vec<u64> = pts.iter().map(|p| p.0).collect();
        let abs: Vec<BigRational> = pts.iter().map(|p| p.1.abs()).collect();
        let table = if self.mu == Ordinal::finite(1) { self.table_s1(&idx, &abs) } else { self.table_general(&idx, &abs)? };
        let k = idx.len();
        let value = table.val[0][k - 1].clone();
        let mut f = Vector::zero();
        self.functional(&table, &pts, 0, k - 1, &BigRational::one(), &mut f);
        Ok((value, f))
    }

    fn functional(&self, t: &Table, pts: &[(u64, BigRational)], p: usize, j: usize, w: &BigRational, out: &mut Vector) {
        match &t.choice[p][j] {
            Choice::Coord(c) => {
                let sign = if pts[*c].1.is_negative() { -BigRational::one() } else { BigRational::one() };
                out.add_at(pts[*c].0, &(w * sign));
            }
            Choice::Groups(starts) => {
                let w = w * &self.theta;
                for (n, &g) in starts.iter().enumerate() {
                    let end = starts.get(n + 1).map_or(j, |&next| next - 1);
                    self.functional(t, pts, g, end, &w, out);
                }
            }
        }
    }

    fn coord_best(abs: &[BigRational], p: usize, j: usize) -> (BigRational, usize) {
        let mut best = p;
        for c in p..=j {
            if abs[c] > abs[best] {
                best = c;
            }
        }
        (abs[best].clone(), best)
    }

    /// `S_1` admissibility is a count bound, so a table of best sums by
    /// number of groups suffices.
    fn table_s1(&self, idx: &[u64], abs: &[BigRational]) -> Table {
        let k = idx.len();
        let mut val = vec![vec![BigRational::zero(); k]; k];
        let mut choice = vec![vec![Choice::Coord(0); k]; k];
        // g[p][t]: best sum covering p..=j with exactly t groups, and the
        // end of the first group, for the current j.
        for j in 0..k {
            let mut g: Vec<Vec<Option<(BigRational, usize)>>> = vec![vec![None; k + 2]; k + 1];
            let mut best_sum: Option<(BigRational, usize, usize)> = None;
            for p in (0..=j).rev() {
                let len = j - p + 1;
                for t in 2..=len {
                    let mut cell: Option<(BigRational, usize)> = None;
                    for e in p..j {
                        if let Some((rest, _)) = &g[e + 1][t - 1] {
                            let v = &val[p][e] + rest;
                            if cell.as_ref().is_none_or(|(c, _)| v > *c) {
                                cell = Some((v, e));
                            }
                        }
                    }
                    g[p][t] = cell;
                }
                let cap = (idx[p].min(len as u64)) as usize;
                for t in 2..=cap {
                    if let Some((v, _)) = &g[p][t] {
                        if best_sum.as_ref().is_none_or(|(b, _, _)| v > b) {
                            best_sum = Some((v.clone(), p, t));
                        }
                    }
                }
                let (c0, at) = Self::coord_best(abs, p, j);
                let grouped = best_sum.as_ref().map(|(v, _, _)| v * &self.theta);
                match (grouped, &best_sum) {
                    (Some(gv), Some((_, bp, bt))) if gv > c0 => {
                        let mut starts = vec![*bp];
                        let (mut q, mut t) = (*bp, *bt);
                        while t > 1 {
                            let e = g[q][t].as_ref().unwrap().1;
                            q = e + 1;
                            t -= 1;
                            starts.push(q);
                        }
                        val[p][j] = gv;
                        choice[p][j] = Choice::Groups(starts);
                    }
                    _ => {
                        val[p][j] = c0;
                        choice[p][j] = Choice::Coord(at);
                    }
                }
                g[p][1] = Some((val[p][j].clone(), j));
            }
        }
        Table { val, choice }
    }

    /// General `mu`: depth-first search over group starts, pruning with
    /// heredity of `S_mu`.
    fn table_general(&self, idx: &[u64], abs: &[BigRational]) -> Result<Table> {
        let k = idx.len();
        let fam = Family::Schreier(self.mu.clone());
        let oracle = Oracle::global();
        let mut val = vec![vec![BigRational::zero(); k]; k];
        let mut choice = vec![vec![Choice::Coord(0); k]; k];
        let mut steps = 0u64;
        for len in 1..=k {
            for p in 0..=k - len {
                let j = p + len - 1;
                let (c0, at) = Self::coord_best(abs, p, j);
                let mut best: Option<(BigRational, Vec<usize>)> = None;
                for first in p..j {
                    let mut starts = vec![first];
                    let mut mins = vec![idx[first]];
                    self.search(&val, idx, oracle, &fam, j, BigRational::zero(), &mut starts, &mut mins, &mut best, &mut steps)?;
                }
                match best {
                    Some((s, starts)) if &s * &self.theta > c0 => {
                        val[p][j] = s * &self.theta;
                        choice[p][j] = Choice::Groups(starts);
                    }
                    _ => {
                        val[p][j] = c0;
                        choice[p][j] = Choice::Coord(at);
                    }
                }
            }
        }
        Ok(Table { val, choice })
    }

    /// Extends the open group that starts at `starts.last()`.
    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        val: &[Vec<BigRational>],
        idx: &[u64],
        oracle: &Oracle,
        fam: &Family,
        j: usize,
        acc: BigRational,
        starts: &mut Vec<usize>,
        mins: &mut Vec<u64>,
        best: &mut Option<(BigRational, Vec<usize>)>,
        steps: &mut u64,
    ) -> Result<()> {
        *steps += 1;
        if *steps > DEFAULT_BUDGET {
            return Err(Error::BudgetExceeded("Tsirelson search exceeded its budget".into()));
        }
        let open = *starts.last().unwrap();
        if starts.len() >= 2 {
            let total = &acc + &val[open][j];
            if best.as_ref().is_none_or(|(b, _)| total > *b) {
                *best = Some((total, starts.clone()));
            }
        }
        for end in open..j {
            let next = end + 1;
            mins.push(idx[next]);
            if oracle.longest(fam, mins)? == mins.len() {
                starts.push(next);
                self.search(val, idx, oracle, fam, j, &acc + &val[open][end], starts, mins, best, steps)?;
                starts.pop();
            }
            mins.pop();
        }
        Ok(())
    }

    /// The nonnegative part `K_N^+` of the norming set on `{1..n}`: the unit
    /// functionals closed under `f -> theta (f_1 + ... + f_t)` for `t >= 2`
    /// successive members with minima in `S_mu`. Norms of vectors supported
    /// in `{1..n}` are `max <f, |x|>` over this set.
    pub fn norming_set_positive(&self, n: u64, budget: usize) -> Result<Vec<Vector>> {
        let fam = Family::Schreier(self.mu.clone());
        let oracle = Oracle::global();
        let mut set: BTreeSet<Key> = (1..=n).map(|i| Key(Vector::unit(i))).collect();
        loop {
            let members: Vec<Vector> = set.iter().map(|k| k.0.clone()).collect();
            let mut fresh = Vec::new();
            let mut chain = Vec::new();
            let mut mins = Vec::new();
            for start in 0..members.len() {
                chain.push(start);
                mins.push(members[start].range().unwrap().0);
                self.extend(&members, &fam, oracle, &mut chain, &mut mins, &set, &mut fresh, budget)?;
                chain.pop();
                mins.pop();
            }
            if fresh.is_empty() {
                return Ok(set.into_iter().map(|k| k.0).collect());
            }
            for f in fresh {
                set.insert(Key(f));
            }
            if set.len() > budget {
                return Err(Error::BudgetExceeded(format!("norming set exceeds {budget} functionals")));
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        members: &[Vector],
        fam: &Family,
        oracle: &Oracle,
        chain: &mut Vec<usize>,
        mins: &mut Vec<u64>,
        set: &BTreeSet<Key>,
        fresh: &mut Vec<Vector>,
        budget: usize,
    ) -> Result<()> {
        if chain.len() >= 2 {
            let mut sum = Vector::zero();
            for &c in chain.iter() {
                sum = sum.add(&members[c]);
            }
            let f = sum.scale(&self.theta);
            let key = Key(f);
            if !set.contains(&key) && !fresh.contains(&key.0) {
                fresh.push(key.0);
                if fresh.len() + set.len() > budget {
                    return Err(Error::BudgetExceeded(format!("norming set exceeds {budget} functionals")));
                }
            }
        }
        let top = members[*chain.last().unwrap()].range().unwrap().1;
        for (c, g) in members.iter().enumerate() {
            let (lo, _) = g.range().unwrap();
            if lo <= top {
                continue;
            }
            mins.push(lo);
            if oracle.longest(fam, mins)? == mins.len() {
                chain.push(c);
                self.extend(members, fam, oracle, chain, mins, set, fresh, budget)?;
                chain.pop();
            }
            mins.pop();
        }
        Ok(())
    }

    /// The full norming set `K_N`: every sign pattern of `K_N^+`.
    pub fn norming_set(&self, n: u64, budget: usize) -> Result<Vec<Vector>> {
        let mut out = BTreeSet::new();
        for f in self.norming_set_positive(n, budget)? {
            let supp: Vec<u64> = f.support().into_vec();
            for mask in 0u64..(1 << supp.len()) {
                let g = Vector::from_pairs(supp.iter().enumerate().map(|(b, &i)| {
                    let a = f.get(i);
                    (i, if mask >> b & 1 == 1 { -a } else { a })
                }));
                out.insert(Key(g));
                if out.len() > budget {
                    return Err(Error::BudgetExceeded(format!("norming set exceeds {budget} functionals")));
                }
            }
        }
        Ok(out.into_iter().map(|k| k.0).collect())
    }
}

/// Orders vectors by their coordinates so they can live in a set.
#[derive(Clone, PartialEq, Eq)]
struct Key(Vector);

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.iter().cmp(other.0.iter())
    }
}

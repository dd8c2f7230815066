//! The `H_xi` norm: `sup || sum_n ||E_n x||_1 e_{max E_n} ||_H` over
//! successive `E_1 < E_2 < ...` in `S_xi`.
//!
//! Since `H` is 1-unconditional the sets can be taken inside `supp(x)`, and
//! the search walks the support left to right, deciding for each point
//! whether to skip it, add it to the open set, or close the open set and
//! start a new one.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{Scalar, Space};
use crate::error::{Error, Result};
use crate::families::{Family, Oracle};
use crate::ordinal::Ordinal;
use crate::vector::Vector;

struct Search<'a> {
    h: &'a Space,
    fam: Family,
    oracle: &'a Oracle,
    pts: Vec<(u64, BigRational)>,
    /// `tail[i]`: sum of `|x|` over points `i..`.
    tail: Vec<BigRational>,
    best: Scalar,
    witness: Vec<Vec<u64>>,
    steps: u64,
    budget: u64,
}

/// The `H_xi` norm with a maximizing choice of sets.
pub fn norm_with_sets(h: &Space, xi: &Ordinal, x: &Vector, budget: u64) -> Result<(Scalar, Vec<Vec<u64>>)> {
    let fam = Family::Schreier(xi.clone());
    let oracle = Oracle::global();
    let pts: Vec<(u64, BigRational)> = x.iter().map(|(i, a)| (i, a.abs())).collect();
    if pts.is_empty() {
        return Ok((Scalar::zero(), Vec::new()));
    }
    let supp: Vec<u64> = pts.iter().map(|p| p.0).collect();
    // One set carrying all the mass is optimal when it is allowed.
    if oracle.longest(&fam, &supp)? == supp.len() {
        return Ok((Scalar::Exact(x.l1()), vec![supp]));
    }
    let mut tail = vec![BigRational::zero(); pts.len() + 1];
    for i in (0..pts.len()).rev() {
        tail[i] = &tail[i + 1] + &pts[i].1;
    }
    let mut s = Search { h, fam, oracle, pts, tail, best: Scalar::zero(), witness: Vec::new(), steps: 0, budget };
    // Incumbent: the largest single coordinate.
    let (at, top) = s.pts.iter().max_by(|a, b| a.1.cmp(&b.1)).map(|(i, a)| (*i, a.clone())).unwrap();
    s.best = Scalar::Exact(top);
    s.witness = vec![vec![at]];
    let mut closed = Vec::new();
    let mut open = Vec::new();
    s.dfs(0, &mut closed, &mut open, BigRational::zero())?;
    Ok((s.best, s.witness))
}

pub fn norm(h: &Space, xi: &Ordinal, x: &Vector, budget: u64) -> Result<Scalar> {
    Ok(norm_with_sets(h, xi, x, budget)?.0)
}

impl Search<'_> {
    fn value(&self, closed: &[Vec<u64>]) -> Result<Scalar> {
        let z = Vector::from_pairs(closed.iter().map(|e| {
            let mass: BigRational = e.iter().map(|i| self.mass(*i)).sum();
            (*e.last().unwrap(), mass)
        }));
        self.h.norm(&z)
    }

    fn mass(&self, i: u64) -> BigRational {
        self.pts.iter().find(|p| p.0 == i).map(|p| p.1.clone()).unwrap_or_else(BigRational::zero)
    }

    /// An upper bound for every completion: the remaining mass `rest` can at
    /// best be merged into the open set.
    fn bound(&self, closed: &[Vec<u64>], open_mass: &BigRational, rest: &BigRational) -> Result<Scalar> {
        let mut z = Vector::from_pairs(closed.iter().map(|e| {
            let mass: BigRational = e.iter().map(|i| self.mass(*i)).sum();
            (*e.last().unwrap(), mass)
        }));
        let extra = open_mass + rest;
        if extra.is_zero() {
            return self.h.norm(&z);
        }
        match self.h {
            // Superadditivity of t^p: one merged coordinate dominates.
            Space::Lp(_) | Space::Linf | Space::C0 => {
                let slot = z.range().map_or(1, |(_, hi)| hi + 1);
                z.add_at(slot, &extra);
                self.h.norm(&z)
            }
            _ => {
                let base = self.h.norm(&z)?;
                Ok(match base {
                    Scalar::Exact(r) => Scalar::Exact(r + extra),
                    other => Scalar::Approx(other.to_f64() + crate::vector::to_f64(&extra)),
                })
            }
        }
    }

    fn dfs(&mut self, i: usize, closed: &mut Vec<Vec<u64>>, open: &mut Vec<u64>, open_mass: BigRational) -> Result<()> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(Error::BudgetExceeded(format!("H_xi search exceeded {} steps", self.budget)));
        }
        if i == self.pts.len() {
            let mut all = closed.clone();
            if !open.is_empty() {
                all.push(open.clone());
            }
            let v = self.value(&all)?;
            if v.compare(&self.best).is_gt() {
                self.best = v;
                self.witness = all;
            }
            return Ok(());
        }
        let ub = self.bound(closed, &open_mass, &self.tail[i])?;
        if ub.compare(&self.best).is_le() {
            return Ok(());
        }
        let (p, a) = self.pts[i].clone();
        // Extend the open set (or start the first one).
        open.push(p);
        if self.oracle.longest(&self.fam, open)? == open.len() {
            self.dfs(i + 1, closed, open, &open_mass + &a)?;
        }
        open.pop();
        // Close the open set and start a new one at p.
        if !open.is_empty() {
            let prev = std::mem::replace(open, vec![p]);
            closed.push(prev);
            self.dfs(i + 1, closed, open, a.clone())?;
            let prev = closed.pop().unwrap();
            *open = prev;
        }
        // Skip p.
        self.dfs(i + 1, closed, open, open_mass)
    }
}

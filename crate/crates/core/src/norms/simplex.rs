//! Exact rational simplex for `max c.x` subject to `A x <= b`, `x >= 0`
//! with `b >= 0`, so the origin is a feasible starting vertex.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub value: BigRational,
    pub x: Vec<BigRational>,
}

/// Bland's rule, so the method terminates without cycling.
pub fn maximize(c: &[BigRational], a: &[Vec<BigRational>], b: &[BigRational], max_pivots: u64) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.iter().any(|v| v.is_negative()) {
        return Err(Error::Domain("simplex needs b >= 0".into()));
    }
    // Tableau rows: [A | I | b]; basis starts at the slacks.
    let width = n + m + 1;
    let mut t: Vec<Vec<BigRational>> = (0..m)
        .map(|r| {
            let mut row = vec![BigRational::zero(); width];
            for (j, v) in a[r].iter().enumerate() {
                row[j] = v.clone();
            }
            row[n + r] = BigRational::from_integer(1.into());
            row[width - 1] = b[r].clone();
            row
        })
        .collect();
    // Reduced costs: z_j - c_j, stored negated so "positive means improving".
    let mut obj: Vec<BigRational> = (0..width).map(|j| if j < n { c[j].clone() } else { BigRational::zero() }).collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0u64;
    while let Some(enter) = (0..n + m).find(|&j| obj[j].is_positive()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for r in 0..m {
            if t[r][enter].is_positive() {
                let ratio = &t[r][width - 1] / &t[r][enter];
                let better = match &leave {
                    None => true,
                    Some((lr, lv)) => ratio < *lv || (ratio == *lv && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Err(Error::Domain("linear program is unbounded".into()));
        };
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::BudgetExceeded(format!("simplex exceeded {max_pivots} pivots")));
        }
        let p = t[r][enter].clone();
        for v in t[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = t[r].clone();
        for (q, row) in t.iter_mut().enumerate() {
            if q != r && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for (v, pv) in obj.iter_mut().zip(&pivot_row) {
                *v -= &f * pv;
            }
        }
        basis[r] = enter;
    }
    let mut x = vec![BigRational::zero(); n];
    for (r, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[r][width - 1].clone();
        }
    }
    let value = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok(LpSolution { value, x })
}

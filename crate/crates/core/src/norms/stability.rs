//! Randomized checks of block stability and left dominance.

use num_rational::BigRational;
use rand::Rng;

use super::{Scalar, Space};
use crate::error::Result;
use crate::vector::{rat, Vector};

#[derive(Clone, Debug)]
pub struct StabilityReport {
    /// Largest observed `max(a/b, b/a)` (block stability) or `a/b` (left
    /// dominance) over the sampled coefficients.
    pub worst_ratio: f64,
    pub samples: usize,
    pub passed: bool,
}

fn random_coeffs(rng: &mut impl Rng, t: usize) -> Vec<BigRational> {
    (0..t).map(|_| rat(rng.gen_range(-20..=20), rng.gen_range(1..=5))).collect()
}

fn combine(seq: &[Vector], a: &[BigRational]) -> Vector {
    seq.iter().zip(a).fold(Vector::zero(), |acc, (x, c)| acc.add(&x.scale(c)))
}

fn ratio(num: &Scalar, den: &Scalar) -> f64 {
    let d = den.to_f64();
    if d == 0.0 {
        if num.to_f64() == 0.0 { 1.0 } else { f64::INFINITY }
    } else {
        num.to_f64() / d
    }
}

/// Tests `||sum a_n x_n|| / B <= ||sum a_n y_n|| <= B ||sum a_n x_n||` on
/// random coefficients.
pub fn check_block_stability(
    space: &Space,
    xs: &[Vector],
    ys: &[Vector],
    b: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<StabilityReport> {
    let t = xs.len().min(ys.len());
    let mut worst = 1.0f64;
    for _ in 0..samples {
        let a = random_coeffs(rng, t);
        let nx = space.norm(&combine(&xs[..t], &a))?;
        let ny = space.norm(&combine(&ys[..t], &a))?;
        if nx.compare(&ny).is_eq() {
            continue;
        }
        worst = worst.max(ratio(&nx, &ny)).max(ratio(&ny, &nx));
    }
    Ok(StabilityReport { worst_ratio: worst, samples, passed: worst <= b * (1.0 + super::FLOAT_TOL) })
}

/// Tests `||sum a_n e_{l_n}|| <= ||sum a_n e_{m_n}||` for `l_n <= m_n`.
pub fn check_left_dominance(space: &Space, l: &[u64], m: &[u64], samples: usize, rng: &mut impl Rng) -> Result<StabilityReport> {
    let t = l.len().min(m.len());
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let a = random_coeffs(rng, t);
        let left = Vector::from_pairs(l[..t].iter().copied().zip(a.iter().cloned()));
        let right = Vector::from_pairs(m[..t].iter().copied().zip(a.iter().cloned()));
        let nl = space.norm(&left)?;
        let nr = space.norm(&right)?;
        worst = worst.max(ratio(&nl, &nr));
    }
    Ok(StabilityReport { worst_ratio: worst, samples, passed: worst <= 1.0 + super::FLOAT_TOL })
}

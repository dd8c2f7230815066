//! Domination constants of finite sequences: the least `C` with
//! `||sum a_n x_n||_X <= C ||sum a_n g_{n+k}||_G` for all scalars `a`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Scalar, Space};
use crate::error::{Error, Result};
use crate::vector::{to_f64, Vector};

/// Longest sequence handled by sign enumeration.
pub const MAX_SIGN_TERMS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    /// The unit vector basis of `l_p` (`c_0` for `p = infinity`).
    Lp(Option<BigRational>),
    /// The basis of a space with a 1-unconditional normalized basis.
    Basis(Space),
}

impl Target {
    pub fn c0() -> Self {
        Target::Lp(None)
    }

    pub fn lp(p: i64) -> Self {
        Target::Lp(Some(BigRational::from_integer(BigInt::from(p))))
    }

    fn space(&self) -> Space {
        match self {
            Target::Lp(None) => Space::C0,
            Target::Lp(Some(p)) => Space::Lp(p.clone()),
            Target::Basis(s) => s.clone(),
        }
    }

    fn is_sup(&self) -> bool {
        matches!(self.space(), Space::C0 | Space::Linf)
    }

    fn lp_exponent(&self) -> Option<BigRational> {
        match self.space() {
            Space::Lp(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeqNormSpec {
    pub ground: Space,
    pub target: Target,
    /// Targets are re-indexed `n -> n + shift`.
    pub shift: u64,
}

impl SeqNormSpec {
    pub fn new(ground: Space, target: Target, shift: u64) -> Self {
        SeqNormSpec { ground, target, shift }
    }
}

#[derive(Clone, Debug)]
pub struct Domination {
    /// Attained at `coefficients`.
    pub lower: Scalar,
    pub upper: Scalar,
    /// Whether `lower = upper` is the exact constant.
    pub exact: bool,
    pub coefficients: Vec<BigRational>,
}

impl Domination {
    pub fn value(&self) -> Scalar {
        self.lower.clone()
    }
}

fn combine(seq: &[Vector], a: &[BigRational]) -> Vector {
    seq.iter().zip(a).fold(Vector::zero(), |acc, (x, c)| acc.add(&x.scale(c)))
}

/// `||sum a_n x_n||_X / ||sum a_n g_{n+k}||_G` for nonzero `a`.
pub fn ratio(seq: &[Vector], spec: &SeqNormSpec, a: &[BigRational]) -> Result<Scalar> {
    let num = spec.ground.norm(&combine(seq, a))?;
    let g = Vector::from_pairs(a.iter().enumerate().map(|(n, c)| (n as u64 + 1 + spec.shift, c.clone())));
    let den = spec.target.space().norm(&g)?;
    if den.to_f64() == 0.0 {
        return Ok(Scalar::zero());
    }
    Ok(match (&num, &den) {
        (_, Scalar::Exact(d)) if d.is_one() => num,
        (Scalar::Exact(n), Scalar::Exact(d)) => Scalar::Exact(n / d),
        (Scalar::Root(n, q), Scalar::Exact(d)) => Scalar::root(n / num_traits::pow(d.clone(), *q as usize), *q),
        _ => Scalar::Approx(num.to_f64() / den.to_f64()),
    })
}

pub fn domination_constant(seq: &[Vector], spec: &SeqNormSpec) -> Result<Domination> {
    domination_with_seed(seq, spec, 0)
}

pub fn domination_with_seed(seq: &[Vector], spec: &SeqNormSpec, seed: u64) -> Result<Domination> {
    let t = seq.len();
    if t == 0 {
        return Ok(Domination { lower: Scalar::zero(), upper: Scalar::zero(), exact: true, coefficients: Vec::new() });
    }
    if spec.target.is_sup() {
        return signs(seq, spec);
    }
    let exact_ground = spec.ground.is_exact();
    if spec.target.lp_exponent().is_some_and(|p| p.is_one()) {
        // Extreme points of the l_1 ball are the signed units.
        let mut best = (Scalar::zero(), 0);
        for (n, x) in seq.iter().enumerate() {
            let v = spec.ground.norm(x)?;
            if v.compare(&best.0).is_gt() {
                best = (v, n);
            }
        }
        let mut a = vec![BigRational::zero(); t];
        a[best.1] = BigRational::one();
        return Ok(Domination { lower: best.0.clone(), upper: best.0, exact: exact_ground, coefficients: a });
    }
    let two = BigRational::from_integer(BigInt::from(2));
    if spec.ground == Space::Lp(two.clone()) && spec.target.lp_exponent() == Some(two) {
        return gram(seq);
    }
    ascent(seq, spec, seed)
}

fn signs(seq: &[Vector], spec: &SeqNormSpec) -> Result<Domination> {
    let t = seq.len();
    if t > MAX_SIGN_TERMS {
        return Err(Error::BudgetExceeded(format!("sign enumeration limited to {MAX_SIGN_TERMS} vectors")));
    }
    let mut best: Option<(Scalar, u64)> = None;
    // The first sign can be fixed by symmetry.
    for mask in 0u64..(1 << (t - 1)) {
        let mut sum = seq[0].clone();
        for (n, x) in seq.iter().enumerate().skip(1) {
            sum = if mask >> (n - 1) & 1 == 1 { sum.add(&x.scale(&-BigRational::one())) } else { sum.add(x) };
        }
        let v = spec.ground.norm(&sum)?;
        if best.as_ref().is_none_or(|(b, _)| v.compare(b).is_gt()) {
            best = Some((v, mask));
        }
    }
    let (v, mask) = best.unwrap();
    let coefficients = (0..t)
        .map(|n| if n > 0 && mask >> (n - 1) & 1 == 1 { -BigRational::one() } else { BigRational::one() })
        .collect();
    Ok(Domination { lower: v.clone(), upper: v, exact: spec.ground.is_exact(), coefficients })
}

/// Operator norm `l_2 -> l_2` of the synthesis map: square root of the
/// largest Gram eigenvalue.
fn gram(seq: &[Vector]) -> Result<Domination> {
    let t = seq.len();
    let g = DMatrix::from_fn(t, t, |i, j| to_f64(&seq[i].dot(&seq[j])));
    let eig = g.symmetric_eigen();
    let (k, lambda) = eig.eigenvalues.iter().enumerate().fold((0, f64::MIN), |b, (k, &v)| if v > b.1 { (k, v) } else { b });
    let v = lambda.max(0.0).sqrt();
    let coefficients = eig.eigenvectors.column(k).iter().map(|c| BigRational::from_float(*c).unwrap_or_else(BigRational::zero)).collect();
    Ok(Domination { lower: Scalar::Approx(v), upper: Scalar::Approx(v), exact: false, coefficients })
}

fn round(v: f64) -> BigRational {
    BigRational::new(BigInt::from((v * 65536.0).round() as i64), BigInt::from(65536))
}

/// Random-restart hill climbing for the lower bound; the triangle and
/// Hölder inequalities for the upper bound.
fn ascent(seq: &[Vector], spec: &SeqNormSpec, seed: u64) -> Result<Domination> {
    let t = seq.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eval = |a: &[f64]| -> Result<(Scalar, Vec<BigRational>)> {
        let r: Vec<BigRational> = a.iter().map(|v| round(*v)).collect();
        if r.iter().all(|c| c.is_zero()) {
            return Ok((Scalar::zero(), r));
        }
        Ok((ratio(seq, spec, &r)?, r))
    };
    let mut starts: Vec<Vec<f64>> = (0..t).map(|n| (0..t).map(|m| if m == n { 1.0 } else { 0.0 }).collect()).collect();
    starts.push(vec![1.0; t]);
    for _ in 0..6 {
        starts.push((0..t).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    let mut best = (Scalar::zero(), vec![BigRational::zero(); t]);
    for mut a in starts {
        let (mut cur, mut coeffs) = eval(&a)?;
        let mut step = 0.5;
        for _ in 0..40 {
            let mut improved = false;
            for n in 0..t {
                for dir in [step, -step] {
                    let mut b = a.clone();
                    b[n] += dir;
                    let (v, c) = eval(&b)?;
                    if v.compare(&cur).is_gt() {
                        cur = v;
                        coeffs = c;
                        a = b;
                        improved = true;
                    }
                }
            }
            if !improved {
                step /= 2.0;
                if step < 1e-3 {
                    break;
                }
            }
        }
        if cur.compare(&best.0).is_gt() {
            best = (cur, coeffs);
        }
    }
    let norms: Vec<f64> = seq.iter().map(|x| spec.ground.norm(x).map(|v| v.to_f64())).collect::<Result<_>>()?;
    let mut upper: f64 = norms.iter().sum();
    if let Some(p) = spec.target.lp_exponent() {
        let p = to_f64(&p);
        if p > 1.0 {
            let q = p / (p - 1.0);
            upper = upper.min(norms.iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q));
        }
    }
    let upper = upper.max(best.0.to_f64());
    Ok(Domination { lower: best.0, upper: Scalar::Approx(upper), exact: false, coefficients: best.1 })
}

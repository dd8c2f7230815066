//! Dual norms of Tsirelson spaces and their convexifications on `{1..N}`.
//!
//! By 1-unconditionality `||y||_* = max { sum |y_i| x_i : x >= 0, ||x|| <= 1 }`
//! with `x` supported on `supp(y)`. For `q = 1` the ball is the polytope cut
//! out by the nonnegative norming functionals, generated lazily: solve the LP
//! over the cuts found so far, and if the optimum has norm above 1 add the
//! functional that norms it. For `q > 1` the substitution `u = x^q` turns the
//! problem into maximizing a concave function over that same polytope, which
//! is done by Frank–Wolfe with the `q = 1` LP as the linear oracle.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::simplex::maximize;
use super::{small_int, Scalar, Space, Tsirelson};
use crate::error::{Error, Result};
use crate::vector::{to_f64, Vector};

const MAX_CUTS: usize = 5000;
const FW_ITERATIONS: usize = 400;
const FW_GAP: f64 = 1e-9;
/// Relative gap above which a float result is flagged.
pub const GAP_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct DualNorm {
    pub lower: Scalar,
    pub upper: Scalar,
    pub exact: bool,
    /// A primal vector `x` in the unit ball with `<x, y>` equal to `lower`.
    pub certificate: Vector,
    /// Number of norming functionals used as LP rows.
    pub cuts: usize,
}

impl DualNorm {
    pub fn value(&self) -> Scalar {
        self.lower.clone()
    }

    /// Relative gap between the bounds is at most the given tolerance.
    pub fn within(&self, tol: f64) -> bool {
        let (l, u) = (self.lower.to_f64(), self.upper.to_f64());
        u - l <= tol * l.abs().max(f64::MIN_POSITIVE)
    }

    /// Checks that the certificate lies in the primal unit ball and
    /// reproduces the lower bound against `y`.
    pub fn replay(&self, base: &Space, y: &Vector, tol: f64) -> Result<bool> {
        let pairing = to_f64(&self.certificate.dot(y));
        let norm = base.norm(&self.certificate)?;
        let inside = norm.compare(&Scalar::Exact(BigRational::one())).is_le() || norm.to_f64() <= 1.0 + tol;
        if self.exact {
            let exact_pair = Scalar::Exact(self.certificate.dot(y));
            Ok(inside && exact_pair.compare(&self.lower).is_eq())
        } else {
            Ok(inside && (pairing - self.lower.to_f64()).abs() <= tol * self.lower.to_f64().max(1.0))
        }
    }
}

/// The dual norm of `y` in `dual(base, N=n)`.
pub fn dual_norm(space: &Space, y: &Vector) -> Result<DualNorm> {
    let Space::Dual(base, n) = space else {
        return Err(Error::Domain(format!("{space} is not a dual space")));
    };
    let (t, q) = base.tsirelson_base().ok_or_else(|| Error::Domain("dual() wraps T(...) or conv(T(...),q=..)".into()))?;
    if let Some((_, hi)) = y.range() {
        if hi > *n {
            return Err(Error::Domain(format!("support of y exceeds N={n}")));
        }
    }
    if y.is_zero() {
        return Ok(DualNorm { lower: Scalar::zero(), upper: Scalar::zero(), exact: true, certificate: Vector::zero(), cuts: 0 });
    }
    let mut cuts = Cuts::new(y);
    if q.is_one() {
        let w = y.abs();
        let (value, x) = cuts.solve(t, &w)?;
        let certificate = with_signs(&x, y);
        let v = Scalar::Exact(value);
        return Ok(DualNorm { lower: v.clone(), upper: v, exact: true, certificate, cuts: cuts.rows.len() });
    }
    frank_wolfe(t, &q, y, &mut cuts)
}

fn with_signs(x: &Vector, y: &Vector) -> Vector {
    Vector::from_pairs(x.iter().map(|(i, a)| (i, if y.get(i).is_negative() { -a.clone() } else { a.clone() })))
}

/// Norming functionals restricted to the support of `y`, reused across LPs.
struct Cuts {
    idx: Vec<u64>,
    rows: Vec<Vector>,
}

impl Cuts {
    fn new(y: &Vector) -> Self {
        let idx: Vec<u64> = y.iter().map(|(i, _)| i).collect();
        let rows = idx.iter().map(|&i| Vector::unit(i)).collect();
        Cuts { idx, rows }
    }

    /// `max <w, x>` over `x >= 0` in the unit ball of `t`, for `w >= 0`.
    fn solve(&mut self, t: &Tsirelson, w: &Vector) -> Result<(BigRational, Vector)> {
        let c: Vec<BigRational> = self.idx.iter().map(|&i| w.get(i)).collect();
        loop {
            let a: Vec<Vec<BigRational>> = self.rows.iter().map(|f| self.idx.iter().map(|&i| f.get(i)).collect()).collect();
            let b = vec![BigRational::one(); a.len()];
            let sol = maximize(&c, &a, &b, 100_000)?;
            let x = Vector::from_pairs(self.idx.iter().copied().zip(sol.x));
            let (norm, f) = t.norm_with_functional(&x)?;
            if norm <= BigRational::one() {
                return Ok((sol.value, x));
            }
            let f = f.abs();
            if self.rows.contains(&f) || self.rows.len() >= MAX_CUTS {
                return Err(Error::BudgetExceeded("dual LP stopped generating new cuts".into()));
            }
            self.rows.push(f);
        }
    }
}

fn to_rational(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(BigRational::zero)
}

fn frank_wolfe(t: &Tsirelson, q: &BigRational, y: &Vector, cuts: &mut Cuts) -> Result<DualNorm> {
    let qf = to_f64(q);
    let idx = cuts.idx.clone();
    let w: Vec<f64> = idx.iter().map(|&i| to_f64(&y.get(i).abs())).collect();
    let phi = |u: &[f64]| -> f64 { u.iter().zip(&w).map(|(ui, wi)| wi * ui.max(0.0).powf(1.0 / qf)).sum() };
    let k = idx.len() as f64;
    let mut u: Vec<f64> = vec![1.0 / k; idx.len()];
    let mut upper = f64::INFINITY;
    for _ in 0..FW_ITERATIONS {
        let g: Vec<f64> = u.iter().zip(&w).map(|(ui, wi)| wi / qf * ui.powf(1.0 / qf - 1.0)).collect();
        let gv = Vector::from_pairs(idx.iter().zip(&g).map(|(&i, gi)| (i, to_rational(*gi))));
        let (best, vert) = cuts.solve(t, &gv)?;
        let v: Vec<f64> = idx.iter().map(|&i| to_f64(&vert.get(i))).collect();
        let gu: f64 = g.iter().zip(&u).map(|(a, b)| a * b).sum();
        let current = phi(&u);
        upper = upper.min(current + to_f64(&best) - gu);
        if upper - current <= FW_GAP * current {
            break;
        }
        let at = |gamma: f64| -> Vec<f64> { u.iter().zip(&v).map(|(a, b)| a + gamma * (b - a)).collect() };
        let (mut lo, mut hi) = (0.0f64, 0.999f64);
        for _ in 0..80 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if phi(&at(m1)) < phi(&at(m2)) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        u = at((lo + hi) / 2.0);
    }
    // Round to rationals and rescale so the point is certainly feasible.
    let ur = Vector::from_pairs(idx.iter().zip(&u).map(|(&i, ui)| (i, to_rational(*ui))));
    let nu = t.norm(&ur)?;
    let scale = if nu > BigRational::one() { BigRational::one() / nu } else { BigRational::one() };
    let ur = ur.scale(&scale);
    // x_i = u_i^(1/q), rounded down to keep it inside the ball.
    let x = Vector::from_pairs(ur.iter().map(|(i, ui)| {
        let xi = round_down(to_f64(ui).powf(1.0 / qf));
        (i, xi)
    }));
    let x = shrink_into_ball(t, q, x)?;
    let certificate = with_signs(&x, y);
    let lower = to_f64(&certificate.dot(y));
    let upper = upper.max(lower);
    Ok(DualNorm {
        lower: Scalar::Approx(lower),
        upper: Scalar::Approx(upper),
        exact: false,
        certificate,
        cuts: cuts.rows.len(),
    })
}

fn round_down(v: f64) -> BigRational {
    let d = BigInt::from(1u64 << 50);
    let n = BigInt::from((v * (1u64 << 50) as f64).floor() as i128);
    BigRational::new(n, d)
}

/// Scales `x` by `1 - 2^-40` until its convexified norm is at most 1, using
/// the exact path for integer `q`.
fn shrink_into_ball(t: &Tsirelson, q: &BigRational, mut x: Vector) -> Result<Vector> {
    let factor = BigRational::one() - BigRational::new(BigInt::one(), BigInt::from(1u64 << 40));
    for _ in 0..64 {
        let inside = match small_int(q) {
            Some(k) => {
                let u = Vector::from_pairs(x.iter().map(|(i, a)| (i, num_traits::pow(a.abs(), k as usize))));
                t.norm(&u)? <= BigRational::one()
            }
            None => Space::Convexify(t.clone(), q.clone()).norm(&x)?.to_f64() <= 1.0,
        };
        if inside {
            return Ok(x);
        }
        x = x.scale(&factor);
    }
    Err(Error::NumericTolerance("could not place the certificate inside the unit ball".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordinal::Ordinal;
    use crate::sets::FiniteSet;
    use crate::vector::{int, rat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn t1() -> Tsirelson {
        Tsirelson::new(Ordinal::finite(1), rat(1, 2)).unwrap()
    }

    fn dual(q: i64, n: u64) -> Space {
        let base = if q == 1 { Space::Tsirelson(t1()) } else { Space::Convexify(t1(), int(q)) };
        Space::Dual(Box::new(base), n)
    }

    /// Independent oracle: one LP over the full nonnegative norming set.
    fn full_polytope(n: u64, y: &Vector) -> BigRational {
        let k = t1().norming_set_positive(n, 1_000_000).unwrap();
        let idx: Vec<u64> = (1..=n).collect();
        let a: Vec<Vec<BigRational>> = k.iter().map(|f| idx.iter().map(|&i| f.get(i)).collect()).collect();
        let b = vec![BigRational::one(); a.len()];
        let c: Vec<BigRational> = idx.iter().map(|&i| y.get(i).abs()).collect();
        maximize(&c, &a, &b, 100_000).unwrap().value
    }

    #[test]
    fn coordinate_functionals_have_norm_one() {
        for n in 1..=8 {
            let d = dual_norm(&dual(1, 8), &Vector::unit(n)).unwrap();
            assert_eq!(d.value(), Scalar::Exact(int(1)));
            let d = dual_norm(&dual(2, 8), &Vector::unit(n)).unwrap();
            assert!((d.value().to_f64() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn admissible_sums_are_at_most_two() {
        for g in [vec![4, 5, 6, 7], vec![2, 5], vec![3, 4, 8], vec![1], vec![5, 6, 7, 8]] {
            let g = FiniteSet::new(g).unwrap();
            let y = Vector::indicator(&g);
            let d = dual_norm(&dual(1, 8), &y).unwrap();
            let v = d.value().as_exact().unwrap().clone();
            assert!(v >= int(1) && v <= int(2), "{g:?}: {v}");
            assert!(d.replay(&Space::Tsirelson(t1()), &y, 1e-9).unwrap());
        }
        // Four admissible singletons give the full factor 1/theta.
        let y = Vector::indicator(&FiniteSet::new(vec![4, 5, 6, 7]).unwrap());
        assert_eq!(dual_norm(&dual(1, 8), &y).unwrap().value(), Scalar::Exact(int(2)));
    }

    #[test]
    fn lazy_cuts_match_full_polytope() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..30 {
            let y = Vector::from_pairs((0..4).map(|_| (rng.gen_range(1..=6u64), rat(rng.gen_range(-5..=5), rng.gen_range(1..=3)))));
            let d = dual_norm(&dual(1, 6), &y).unwrap();
            assert_eq!(d.value(), Scalar::Exact(full_polytope(6, &y)), "{y}");
        }
    }

    #[test]
    fn weak_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let t = t1();
        for _ in 0..30 {
            let y = Vector::from_pairs((0..5).map(|_| (rng.gen_range(1..=8u64), int(rng.gen_range(-4..=4)))));
            let v = dual_norm(&dual(1, 8), &y).unwrap().value().as_exact().unwrap().clone();
            for _ in 0..20 {
                let x = Vector::from_pairs((0..5).map(|_| (rng.gen_range(1..=8u64), int(rng.gen_range(-4..=4)))));
                if x.is_zero() {
                    continue;
                }
                assert!(x.dot(&y) <= &v * t.norm(&x).unwrap());
            }
        }
    }

    #[test]
    fn convexified_dual() {
        // On {4,5} the 2-convexified unit ball is the square, so the dual
        // norm of e4* + e5* is 2.
        let y = Vector::from_ints(&[(4, 1), (5, -1)]);
        let d = dual_norm(&dual(2, 8), &y).unwrap();
        assert!((d.value().to_f64() - 2.0).abs() < 1e-6, "{:?}", d);
        assert!(d.within(GAP_TOLERANCE));
        assert!(d.replay(&Space::Convexify(t1(), int(2)), &y, 1e-9).unwrap());
        // Lower bound never exceeds the q = 1 value times the l_1 to l_2 loss.
        let y = Vector::from_ints(&[(1, 1), (2, 1), (3, 1)]);
        let d = dual_norm(&dual(2, 8), &y).unwrap();
        assert!(d.lower.to_f64() <= d.upper.to_f64() + 1e-12);
        assert!(d.lower.to_f64() >= 3f64.sqrt() - 1e-6);
    }

    #[test]
    fn dual_sandwich_for_admissible_blocks() {
        // q = 1, m = 1: max ||x_n||_* <= ||sum x_n||_* <= 2 max ||x_n||_*.
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let space = dual(1, 10);
        for _ in 0..15 {
            let start = rng.gen_range(2..=4u64);
            let count = rng.gen_range(2..=start.min(3));
            let mut blocks = Vec::new();
            let mut lo = start;
            for _ in 0..count {
                let len = rng.gen_range(1..=2u64);
                if lo + len - 1 > 10 {
                    break;
                }
                blocks.push(Vector::from_pairs((lo..lo + len).map(|i| (i, int(rng.gen_range(1..=3))))));
                lo += len;
            }
            let norms: Vec<BigRational> =
                blocks.iter().map(|b| dual_norm(&space, b).unwrap().value().as_exact().unwrap().clone()).collect();
            let total = blocks.iter().fold(Vector::zero(), |a, b| a.add(b));
            let v = dual_norm(&space, &total).unwrap().value().as_exact().unwrap().clone();
            let m = norms.iter().max().unwrap().clone();
            assert!(m <= v && v <= int(2) * m);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(dual_norm(&dual(1, 3), &Vector::unit(4)).is_err());
        assert!(dual_norm(&Space::l(2), &Vector::unit(1)).is_err());
    }
}

//! The acceptance suite: twelve criteria, each producing one report entry.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audit::{self, AuditConfig, SeqSample};
use crate::blocks::{self, Block};
use crate::error::{Error, Result};
use crate::families::{self, Family};
use crate::norms::{self, hxi, Domination, SeqNormSpec, Space, Target, Tsirelson};
use crate::ordinal::Ordinal;
use crate::sets::{FiniteSet, Prefix};
use crate::vector::{int, rat, to_f64, Vector};
use crate::witnesses;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub id: u32,
    pub description: &'static str,
    pub status: Status,
    pub value: String,
    pub expected: String,
    pub tolerance: String,
    pub runtime_ms: u128,
    /// A failing non-blocking entry does not fail the suite.
    pub blocking: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub entries: Vec<Entry>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail || !e.blocking)
    }
}

/// Outcome of a single check before timing is attached.
struct Outcome {
    ok: bool,
    value: String,
    detail: String,
}

impl Outcome {
    fn new(ok: bool, value: impl Into<String>, detail: impl Into<String>) -> Self {
        Outcome { ok, value: value.into(), detail: detail.into() }
    }
}

struct Criterion {
    id: u32,
    description: &'static str,
    expected: &'static str,
    tolerance: &'static str,
    /// Wall-clock limit in milliseconds, if any.
    limit_ms: Option<u128>,
    blocking: bool,
    run: fn(&mut ChaCha8Rng) -> Result<Outcome>,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        description: "fine Schreier truncations F_n on {1..10} are the sets of size <= n (n <= 5)",
        expected: "exact set equality",
        tolerance: "0",
        limit_ms: Some(1_000),
        blocking: true,
        run: c1_fine_truncations,
    },
    Criterion {
        id: 2,
        description: "S_1 membership equals |F| <= min F on all subsets of {1..12}",
        expected: "4096/4096 agree",
        tolerance: "0",
        limit_ms: Some(1_000),
        blocking: true,
        run: c2_schreier_one,
    },
    Criterion {
        id: 3,
        description: "tree ranks: F_n truncated at n+2 has rank n+1, and F_1 (+) F_2 has rank 4",
        expected: "ranks 1..6 and 4",
        tolerance: "0",
        limit_ms: None,
        blocking: true,
        run: c3_tree_ranks,
    },
    Criterion {
        id: 4,
        description: "repeated averages (xi in 1,2,3,w): maximal initial supports, unit mass, permanence",
        expected: "no axiom failures on 400 prefixes",
        tolerance: "0",
        limit_ms: None,
        blocking: true,
        run: c4_repeated_averages,
    },
    Criterion {
        id: 5,
        description: "k orthonormal l2 vectors are sqrt(k)-dominated by the c0 basis, k <= 8",
        expected: "sqrt(k)",
        tolerance: "1e-12",
        limit_ms: Some(5_000),
        blocking: true,
        run: c5_hilbert,
    },
    Criterion {
        id: 6,
        description: "Tsirelson dynamic program equals the partition oracle; ||e_k + .. + e_(2k-1)|| = k/2",
        expected: "200/200 exact matches, k/2 for 2 <= k <= 6",
        tolerance: "0",
        limit_ms: Some(60_000),
        blocking: true,
        run: c6_tsirelson,
    },
    Criterion {
        id: 7,
        description: "convexified Tsirelson sandwich on S_1^(x)m-admissible block families",
        expected: "theta^(m/q) l_q sum <= norm <= l_q sum",
        tolerance: "1e-9 relative",
        limit_ms: Some(60_000),
        blocking: true,
        run: c7_convexification,
    },
    Criterion {
        id: 8,
        description: "dual Tsirelson norms of admissible indicator sums lie in [1, 2]; certificates replay",
        expected: "[1, 2]",
        tolerance: "1e-6",
        limit_ms: Some(120_000),
        blocking: true,
        run: c8_dual_bounds,
    },
    Criterion {
        id: 9,
        description: "H_xi over l2: l1 lower estimate on S_xi supports and the block-maxima lower bound",
        expected: ">= sum |a_n| and >= ||sum |a_n| e_max||_2",
        tolerance: "1e-9",
        limit_ms: None,
        blocking: true,
        run: c9_hxi,
    },
    Criterion {
        id: 10,
        description: "witness replay: block cover tilings and (F, E) witnesses validate independently",
        expected: "50 + 50 validated",
        tolerance: "0",
        limit_ms: None,
        blocking: true,
        run: c10_witnesses,
    },
    Criterion {
        id: 11,
        description: "audit laws: hereditary goodness, monotone profile, v(0) = 0, v(z+p, k) <= p + v(z, k+p)",
        expected: "no violations",
        tolerance: "0 (exact paths)",
        limit_ms: None,
        blocking: true,
        run: c11_audit_laws,
    },
    Criterion {
        id: 12,
        description: "higher order Baernstein sanity: RA(1) stability constants over H_1(l2) vs l2 stay near 1",
        expected: "<= 1.1",
        tolerance: "0.1",
        limit_ms: None,
        blocking: false,
        run: c12_baernstein,
    },
];

pub fn ids() -> impl Iterator<Item = u32> {
    CRITERIA.iter().map(|c| c.id)
}

/// Runs one criterion; the random stream depends only on `seed` and `id`.
pub fn run_one(id: u32, seed: u64) -> Result<Entry> {
    let c = CRITERIA
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::Domain(format!("no acceptance criterion {id}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ u64::from(id).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let start = Instant::now();
    let outcome = (c.run)(&mut rng);
    let runtime_ms = start.elapsed().as_millis();
    let (status, value, mut detail) = match outcome {
        Ok(o) => (if o.ok { Status::Pass } else { Status::Fail }, o.value, o.detail),
        Err(Error::BudgetExceeded(msg)) if !c.blocking => (Status::Skipped, "-".into(), format!("budget: {msg}")),
        Err(e) => (Status::Fail, "-".into(), e.to_string()),
    };
    let status = match c.limit_ms {
        Some(limit) if status == Status::Pass && runtime_ms > limit => {
            detail = format!("{detail}; runtime {runtime_ms} ms over the {limit} ms limit");
            Status::Fail
        }
        _ => status,
    };
    Ok(Entry {
        id: c.id,
        description: c.description,
        status,
        value,
        expected: c.expected.into(),
        tolerance: c.tolerance.into(),
        runtime_ms,
        blocking: c.blocking,
        detail,
    })
}

pub fn run_all(seed: u64) -> Report {
    Report { entries: ids().map(|id| run_one(id, seed).expect("known id")).collect() }
}

fn subsets(n: u64) -> impl Iterator<Item = FiniteSet> {
    (0u64..1 << n).map(move |mask| FiniteSet::new((1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect()).unwrap())
}

fn c1_fine_truncations(_: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut bad = Vec::new();
    for n in 0..=5u64 {
        let got: BTreeSet<FiniteSet> = families::materialize(&Family::fine(n), 10, 1 << 20)?.sets().clone();
        let want: BTreeSet<FiniteSet> = subsets(10).filter(|f| f.len() as u64 <= n).collect();
        if got != want {
            bad.push(format!("n={n}: {} sets vs {}", got.len(), want.len()));
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{}/6 equal", 6 - bad.len()), bad.join("; ")))
}

fn c2_schreier_one(_: &mut ChaCha8Rng) -> Result<Outcome> {
    let s1 = Family::schreier(1);
    let mut agree = 0;
    let mut bad = Vec::new();
    for f in subsets(12) {
        let want = FiniteSet::min(&f).is_none_or(|m| f.len() as u64 <= m);
        if families::contains(&s1, &f)? == want {
            agree += 1;
        } else if bad.len() < 5 {
            bad.push(f.to_string());
        }
    }
    Ok(Outcome::new(agree == 4096, format!("{agree}/4096"), bad.join(" ")))
}

fn c3_tree_ranks(_: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut ranks = Vec::new();
    let mut ok = true;
    for n in 0..=5u64 {
        let r = families::tree_rank(&families::materialize(&Family::fine(n), n + 2, 1 << 20)?);
        ok &= r == n + 1;
        ranks.push(r);
    }
    let pair = Family::pair(Family::fine(1), Family::fine(2));
    let r = families::truncated_rank(&pair, 6, 1 << 20)?;
    ok &= r == 4;
    Ok(Outcome::new(ok, format!("{ranks:?}, pair {r}"), ""))
}

fn c4_repeated_averages(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut checks = 0;
    let mut failures = Vec::new();
    for xi in [Ordinal::finite(1), Ordinal::finite(2), Ordinal::finite(3), Ordinal::omega()] {
        let block = Block::RepeatedAverages(xi);
        let samples: Vec<(Prefix, u64)> = (0..100).map(|_| blocks::random_sample_prefix(&block, rng)).collect();
        let rep = blocks::verify_axioms(&block, &samples);
        checks += rep.checks;
        failures.extend(rep.failures.into_iter().map(|f| format!("{block}: {f}")));
    }
    Ok(Outcome::new(failures.is_empty(), format!("{checks} checks, {} failures", failures.len()), failures.join("; ")))
}

fn c5_hilbert(_: &mut ChaCha8Rng) -> Result<Outcome> {
    let spec = SeqNormSpec::new(Space::l(2), Target::c0(), 0);
    let mut worst = 0.0f64;
    let mut exact = true;
    for k in 1..=8u64 {
        let seq: Vec<Vector> = (1..=k).map(Vector::unit).collect();
        let d: Domination = norms::domination_constant(&seq, &spec)?;
        exact &= d.exact;
        worst = worst.max((d.value().to_f64() - (k as f64).sqrt()).abs());
    }
    Ok(Outcome::new(exact && worst <= 1e-12, format!("max error {worst:.1e}"), if exact { "" } else { "inexact path used" }))
}

/// Tsirelson norm by enumerating admissible interval partitions of the
/// support. Interval minima may be moved right onto support points without
/// breaking admissibility, and gaps after the first interval may be merged
/// into the interval before them, so cuts only occur at support points.
struct PartitionOracle<'a> {
    pts: Vec<(u64, BigRational)>,
    theta: &'a BigRational,
    memo: HashMap<(usize, usize), BigRational>,
}

impl PartitionOracle<'_> {
    fn norm(&mut self, i: usize, j: usize) -> BigRational {
        if let Some(v) = self.memo.get(&(i, j)) {
            return v.clone();
        }
        let mut best = self.pts[i..j].iter().map(|(_, a)| a.abs()).max().unwrap_or_else(BigRational::zero);
        // Points before the first interval are dropped.
        for s in i..j.saturating_sub(1) {
            let mut cuts = vec![s];
            best = best.max(self.partitions(j, &mut cuts));
        }
        self.memo.insert((i, j), best.clone());
        best
    }

    /// Best `theta * sum` over ways to finish the partition whose interval
    /// starts are `cuts`, with at most `pts[cuts[0]]` intervals.
    fn partitions(&mut self, j: usize, cuts: &mut Vec<usize>) -> BigRational {
        let mut best = BigRational::zero();
        if cuts.len() >= 2 {
            let mut sum = BigRational::zero();
            for (n, &c) in cuts.iter().enumerate() {
                let end = cuts.get(n + 1).copied().unwrap_or(j);
                sum += self.norm(c, end);
            }
            best = self.theta * sum;
        }
        let cap = self.pts[cuts[0]].0 as usize;
        if cuts.len() < cap {
            for c in cuts.last().unwrap() + 1..j {
                cuts.push(c);
                best = best.max(self.partitions(j, cuts));
                cuts.pop();
            }
        }
        best
    }
}

fn partition_oracle(x: &Vector, theta: &BigRational) -> BigRational {
    let pts: Vec<(u64, BigRational)> = x.iter().map(|(i, a)| (i, a.clone())).collect();
    let n = pts.len();
    let mut o = PartitionOracle { pts, theta, memo: HashMap::new() };
    if n == 0 { BigRational::zero() } else { o.norm(0, n) }
}

fn random_vector(rng: &mut impl Rng, max_support: usize, ground: u64) -> Vector {
    let size = rng.gen_range(1..=max_support);
    let mut idx: BTreeSet<u64> = BTreeSet::new();
    while idx.len() < size {
        idx.insert(rng.gen_range(1..=ground));
    }
    Vector::from_pairs(idx.into_iter().map(|i| {
        let mut a = 0;
        while a == 0 {
            a = rng.gen_range(-6..=6);
        }
        (i, rat(a, rng.gen_range(1..=4)))
    }))
}

fn c6_tsirelson(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let theta = rat(1, 2);
    let t = Tsirelson::new(Ordinal::finite(1), theta.clone())?;
    let mut agree = 0;
    let mut bad = Vec::new();
    for _ in 0..200 {
        let x = random_vector(rng, 9, 14);
        let dp = t.norm(&x)?;
        if dp == partition_oracle(&x, &theta) {
            agree += 1;
        } else if bad.len() < 3 {
            bad.push(x.to_string());
        }
    }
    let mut flat = true;
    for k in 2..=6u64 {
        let x = Vector::indicator(&FiniteSet::range(k, 2 * k - 1));
        flat &= t.norm(&x)? == rat(k as i64, 2);
    }
    Ok(Outcome::new(agree == 200 && flat, format!("{agree}/200, k/2 {}", if flat { "ok" } else { "wrong" }), bad.join(" ")))
}

/// Successive blocks whose minima form a member of `fam`.
fn random_admissible_blocks(rng: &mut impl Rng, fam: &Family) -> Result<Vec<Vector>> {
    loop {
        let t = rng.gen_range(1..=4);
        let mut pos = rng.gen_range(1..=5u64);
        let mut blocks = Vec::new();
        for _ in 0..t {
            let len = rng.gen_range(1..=3u64);
            let mut pairs = Vec::new();
            for i in pos..pos + len {
                if rng.gen_bool(0.8) {
                    pairs.push((i, rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))));
                }
            }
            let x = Vector::from_pairs(pairs);
            pos += len + rng.gen_range(0..=1);
            if !x.is_zero() {
                blocks.push(x);
            }
        }
        if blocks.is_empty() {
            continue;
        }
        let mins = FiniteSet::new(blocks.iter().map(|b| b.range().unwrap().0).collect()).unwrap();
        if families::contains(fam, &mins)? {
            return Ok(blocks);
        }
    }
}

fn c7_convexification(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let theta = rat(1, 2);
    let t = Tsirelson::new(Ordinal::finite(1), theta.clone())?;
    let mut checks = 0;
    let mut bad = Vec::new();
    for q in [1u32, 2] {
        let space = Space::Convexify(t.clone(), int(q as i64));
        for m in [1u32, 2] {
            let fam = Family::tensor_pow(Family::schreier(1), m);
            for _ in 0..100 {
                let blocks = random_admissible_blocks(rng, &fam)?;
                let sum = blocks.iter().fold(Vector::zero(), |acc, b| acc.add(b));
                let total = space.norm(&sum)?.to_f64();
                let lq: f64 = blocks.iter().map(|b| space.norm(b).map(|s| s.to_f64().powi(q as i32))).sum::<Result<f64>>()?.powf(1.0 / q as f64);
                let lower = to_f64(&theta).powf(m as f64 / q as f64) * lq;
                let slack = 1e-9 * lq.max(1.0);
                checks += 1;
                if total < lower - slack || total > lq + slack {
                    bad.push(format!("q={q} m={m}: {lower} <= {total} <= {lq} fails"));
                }
            }
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{}/{checks} hold", checks - bad.len()), bad.join("; ")))
}

fn c8_dual_bounds(_: &mut ChaCha8Rng) -> Result<Outcome> {
    let base = Space::tsirelson(1, rat(1, 2))?;
    let dual = Space::Dual(Box::new(base.clone()), 8);
    let s1 = Family::schreier(1);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut bad = Vec::new();
    let mut count = 0;
    for g in families::materialize(&s1, 8, 1 << 20)?.sets() {
        if g.is_empty() {
            continue;
        }
        let y = Vector::indicator(g);
        let d = norms::dual_norm(&dual, &y)?;
        let v = d.value().to_f64();
        lo = lo.min(v);
        hi = hi.max(v);
        count += 1;
        if !(1.0 - 1e-6..=2.0 + 1e-6).contains(&v) || !d.replay(&base, &y, 1e-9)? {
            bad.push(format!("{g}: {v}"));
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{count} sets, values in [{lo}, {hi}]"), bad.join("; ")))
}

fn c9_hxi(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let h = Space::l(2);
    let budget = families::DEFAULT_BUDGET;
    let mut bad = Vec::new();
    let mut checks = 0;
    for xi in [Ordinal::finite(1), Ordinal::finite(2)] {
        let fam = Family::Schreier(xi.clone());
        let mut done = 0;
        while done < 100 {
            let x = random_vector(rng, 8, 12);
            if !families::contains(&fam, &x.support())? {
                continue;
            }
            done += 1;
            checks += 1;
            let v = hxi::norm(&h, &xi, &x, budget)?.to_f64();
            if v < to_f64(&x.l1()) - 1e-9 {
                bad.push(format!("xi={xi} {x}: {v}"));
            }
        }
    }
    // sum a_n E_M e(n) against the l2 norm of the masses placed at block maxima.
    let mut s = 0;
    while s < 50 {
        let xi = Ordinal::finite(1 + s % 2);
        let block = Block::RepeatedAverages(xi.clone());
        let (m, r) = blocks::random_sample_prefix(&block, rng);
        let (start, len) = block.support_range(&m, r)?;
        if start + len > 16 {
            continue;
        }
        s += 1;
        let mut x = Vector::zero();
        let mut y = Vector::zero();
        for n in 1..=r {
            let a = rat(rng.gen_range(-5..=5), rng.gen_range(1..=3));
            for (i, w) in block.measure(&m, n)?.weights() {
                x.add_at(*i, &(w * &a));
            }
            let top = FiniteSet::max(&block.support(&m, n)?).unwrap();
            y.add_at(top, &a.abs());
        }
        checks += 1;
        let lhs = hxi::norm(&h, &xi, &x, budget)?.to_f64();
        let rhs = h.norm(&y)?.to_f64();
        if lhs < rhs - 1e-9 {
            bad.push(format!("M={m} r={r}: {lhs} < {rhs}"));
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{}/{checks} hold", checks - bad.len()), bad.join("; ")))
}

fn c10_witnesses(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let xi = Ordinal::finite(1);
    let mu = Ordinal::finite(1);
    let mut covers = 0;
    let mut bad = Vec::new();
    while covers < 50 {
        let a = rng.gen_range(2..=3u64);
        let m = Prefix::arithmetic(a, 1);
        let thin = witnesses::thin_for_cover(&xi, &m, 10)?;
        // A single maximal S_1 block inside T starting at T(1) or, for a = 2, T(2).
        let start = if a == 2 { rng.gen_range(0..=1u64) } else { 0 };
        let lo = thin.t.at(start)?;
        let mut rest = thin.t.slice(start + 1, 10)?;
        while rest.len() as u64 > lo - 1 {
            rest.remove(rng.gen_range(0..rest.len()));
        }
        let mut f = vec![lo];
        f.extend(rest);
        let f = FiniteSet::new(f).unwrap();
        covers += 1;
        let ok = witnesses::block_cover(&xi, &mu, &m, &thin, &f)
            .and_then(|c| witnesses::validate_cover(&xi, &mu, &f, &c).map(|_| c))
            .map(|c| {
                let tiles: Vec<FiniteSet> = c.h.as_slice().iter().map(|&n| Block::RepeatedAverages(xi.clone()).support(&c.n, n)).collect::<Result<_>>()?;
                Ok::<bool, Error>(tiles.iter().fold(FiniteSet::empty(), |u, t| u.union(t)) == c.blocks.iter().fold(FiniteSet::empty(), |u, b| u.union(b)))
            });
        if !matches!(ok, Ok(Ok(true))) {
            bad.push(format!("cover of {f}"));
        }
    }
    let families_q = [Family::schreier(1), Family::schreier(0), Family::fine(2), Family::fine(1)];
    let p = Family::schreier(1);
    let mut pairs = 0;
    while pairs < 50 {
        let q = &families_q[rng.gen_range(0..families_q.len())];
        let (m0, md) = (rng.gen_range(1..=4u64), rng.gen_range(1..=3u64));
        let (l0, ld) = (rng.gen_range(1..=4u64), rng.gen_range(1..=3u64));
        let shift = rng.gen_range(0..=3u64);
        let m = Prefix::arithmetic(m0, md);
        let l = Prefix::arithmetic(l0, ld);
        let lm0 = l0 + ld * (m0 - 1);
        let k = Prefix::arithmetic(lm0 + shift * ld * md, ld * md);
        let gap = rng.gen_range(0..=6u64);
        pairs += 1;
        match witnesses::pair_witness(&p, q, &m, &l, &k, gap) {
            Ok(w) if witnesses::validate_pair(&p, q, &m, &l, &k, gap, &w).is_ok() => {}
            Ok(w) => bad.push(format!("pair {:?} {:?} fails validation", w.f, w.e)),
            Err(e) => bad.push(format!("pair Q={q:?} M={m} L={l} K={k} m={gap}: {e}")),
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{}/100 validated", 100 - bad.len()), bad.join("; ")))
}

fn c11_audit_laws(_: &mut ChaCha8Rng) -> Result<Outcome> {
    let t = Space::tsirelson(1, rat(1, 2))?;
    let zetas = [Ordinal::zero(), Ordinal::finite(1), Ordinal::finite(2), Ordinal::finite(3), Ordinal::omega()];
    let mut checks = 0;
    let mut bad = Vec::new();
    for (ground, block) in [
        (Space::l(2), Block::Dirac),
        (t.clone(), Block::Dirac),
        (Space::l(2), Block::RepeatedAverages(Ordinal::finite(1))),
        (t, Block::RepeatedAverages(Ordinal::finite(1))),
    ] {
        let sample = SeqSample::new((1..=16).map(Vector::unit).collect(), "basis", &ground)?;
        let spec = SeqNormSpec::new(ground.clone(), Target::c0(), 0);
        let cfg = AuditConfig::new(block.clone(), Ordinal::zero(), 0, spec, Prefix::arithmetic(2, 1), 8);
        let rep = audit::check_profile_laws(&cfg, &zetas, &[0, 1], &[1, 2], &sample)?;
        checks += rep.checks;
        bad.extend(rep.failures.into_iter().map(|f| format!("{ground}/{block}: {f}")));
        // Goodness can only drop on subsets.
        let g = FiniteSet::range(2, 9);
        let top = audit::goodness_constant(&g, &cfg, &sample)?.value;
        for mask in 0u32..1 << g.len() {
            let sub = FiniteSet::new(g.as_slice().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect()).unwrap();
            let v = audit::goodness_constant(&sub, &cfg, &sample)?.value;
            checks += 1;
            if v.compare(&top).is_gt() {
                bad.push(format!("{ground}/{block}: goodness({sub}) = {v} > {top}"));
            }
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{checks} checks, {} violations", bad.len()), bad.join("; ")))
}

fn c12_baernstein(rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let xi = Ordinal::finite(1);
    let ground = Space::HXi(Box::new(Space::l(2)), xi.clone());
    let block = Block::RepeatedAverages(xi);
    let spec = SeqNormSpec::new(ground.clone(), Target::lp(2), 0);
    let mut worst = 0.0f64;
    for s in 0..20 {
        // Successive blocks scaled into the unit ball (the H_1 norm never exceeds l1).
        let mut vectors = Vec::new();
        let mut pos = 1;
        for _ in 0..12 {
            let len = rng.gen_range(1..=2u64);
            let v = Vector::from_pairs((pos..pos + len).map(|i| (i, rat(rng.gen_range(1..=4), 1))));
            pos += len;
            let l1 = v.l1();
            vectors.push(v.scale(&(BigRational::one() / l1)));
        }
        let sample = SeqSample::new(vectors, format!("blocks-{s}"), &ground)?;
        let deltas = [rat(1, 2), rat(1, 4)];
        let thin = blocks::thin_for_small_coefficients(&block, &Prefix::arithmetic(1, 1), &deltas, 4, rng)?;
        let cfg = AuditConfig::new(block.clone(), Ordinal::omega(), 0, spec.clone(), thin.prefix, 6);
        let c = audit::stability_constant(&cfg, &sample)?;
        worst = worst.max(c.value.to_f64());
    }
    Ok(Outcome::new(worst <= 1.1, format!("max {worst:.6}"), ""))
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] criterion {:>2}: {} | value {} | expected {} | {} ms", self.status, self.id, self.description, self.value, self.expected, self.runtime_ms)?;
        if !self.detail.is_empty() {
            write!(f, " | {}", self.detail)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_oracle_examples() {
        let half = rat(1, 2);
        let x = Vector::indicator(&FiniteSet::range(4, 7));
        assert_eq!(partition_oracle(&x, &half), int(2));
        assert_eq!(partition_oracle(&Vector::from_ints(&[(1, 3), (2, 1)]), &half), int(3));
        assert_eq!(partition_oracle(&Vector::zero(), &half), BigRational::zero());
    }

    #[test]
    fn cheap_criteria_pass() {
        for id in [1, 2, 3, 5] {
            let e = run_one(id, 7).unwrap();
            assert_eq!(e.status, Status::Pass, "{e}");
        }
        assert!(run_one(99, 7).is_err());
    }

    #[test]
    fn entries_are_deterministic() {
        let a = run_one(4, 11).unwrap();
        let b = run_one(4, 11).unwrap();
        assert_eq!((a.status, a.value), (b.status, b.value));
    }
}

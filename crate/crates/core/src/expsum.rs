//! Evaluation of the incomplete sums S_{g,p}(λ,N) = Σ_{n=1}^{N} e_p(λg^n),
//! hybrid sums σ(a,c) with mixed moduli, exact fourth moments via quadruple
//! counting, and maxima over λ.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modmath::{mulmod, SubgroupCtx};

/// Exhaustive λ scans are refused above this modulus.
pub const EXHAUSTIVE_LAMBDA_LIMIT: u64 = 1_000_000;
/// The naive quadruple count is refused above this N.
pub const NAIVE_J_LIMIT: u64 = 300;
/// Memory guard on the N² pair multiset built by the hashed J backend.
pub const J_PAIR_LIMIT: u128 = 1 << 26;
/// Largest p for which `fourth_moment` also sums |S|⁴ over F_p* directly.
pub const DIRECT_MOMENT_LIMIT: u64 = 10_000;

/// Dense count tables are used below this modulus, hash maps above.
const DENSE_COUNT_LIMIT: u64 = 1 << 24;

/// A complex value accumulated with Kahan-Babuška (Neumaier) compensation
/// on both components.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexAcc {
    re: f64,
    im: f64,
    re_comp: f64,
    im_comp: f64,
}

#[inline]
fn comp_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl ComplexAcc {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, re: f64, im: f64) {
        comp_add(&mut self.re, &mut self.re_comp, re);
        comp_add(&mut self.im, &mut self.im_comp, im);
    }

    pub fn re(&self) -> f64 {
        self.re + self.re_comp
    }

    pub fn im(&self) -> f64 {
        self.im + self.im_comp
    }

    pub fn value(&self) -> (f64, f64) {
        (self.re(), self.im())
    }

    pub fn magnitude(&self) -> f64 {
        self.re().hypot(self.im())
    }
}

/// S_{g,p}(λ,N) = Σ_{n=1}^{N} e_p(λg^n), one modular multiply per term.
///
/// Accepts any λ ∈ F_p; λ = 0 yields the value N, which the moment
/// identities rely on. Rejects N > t.
pub fn eval_sum(ctx: &SubgroupCtx, lambda: u64, n_terms: u64) -> Result<ComplexAcc> {
    let p = ctx.p();
    if lambda >= p {
        return Err(Error::LambdaOutOfRange { lambda, p });
    }
    if n_terms > ctx.order() {
        return Err(Error::NExceedsOrder {
            n: n_terms,
            t: ctx.order(),
        });
    }
    let field = ctx.field();
    let g = ctx.g();
    let mut acc = ComplexAcc::new();
    let mut y = g;
    for _ in 0..n_terms {
        let (re, im) = field.root(mulmod(lambda, y, p));
        acc.add(re, im);
        y = mulmod(y, g, p);
    }
    Ok(acc)
}

/// σ(a,c) = Σ_{n=1}^{t} e_t(an) e_p(cg^n), mixing characters of moduli t
/// and p.
pub fn sigma_hybrid(ctx: &SubgroupCtx, a: u64, c: u64) -> Result<ComplexAcc> {
    let p = ctx.p();
    let t = ctx.order();
    if a >= t {
        return Err(Error::HybridIndexOutOfRange { a, t });
    }
    if c >= p {
        return Err(Error::LambdaOutOfRange { lambda: c, p });
    }
    let field = ctx.field();
    let g = ctx.g();
    let t_f = t as f64;
    let mut acc = ComplexAcc::new();
    let mut y = g;
    for n in 1..=t {
        let theta = TAU * (mulmod(a, n % t, t) as f64) / t_f;
        let (tre, tim) = (theta.cos(), theta.sin());
        let (pre, pim) = field.root(mulmod(c, y, p));
        acc.add(tre * pre - tim * pim, tre * pim + tim * pre);
        y = mulmod(y, g, p);
    }
    Ok(acc)
}

/// How λ is scanned by `max_over_lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaMode {
    /// Every λ ∈ {1, …, p−1}; guarded to p ≤ 10⁶.
    Exhaustive,
    /// `count` distinct λ drawn from a seeded generator.
    Sampled { count: u64, seed: u64 },
}

/// Result of a λ scan. `lower_bound_only` marks sampled scans, whose
/// maximum only bounds the true one from below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxScan {
    pub lambda: u64,
    pub magnitude: f64,
    pub lower_bound_only: bool,
}

fn scan_max(
    ctx: &SubgroupCtx,
    n_terms: u64,
    lambdas: impl IndexedParallelIterator<Item = u64>,
) -> MaxScan {
    let best = lambdas
        .with_min_len(64)
        .map(|lambda| {
            let mag = eval_sum(ctx, lambda, n_terms)
                .expect("validated by caller")
                .magnitude();
            (mag, lambda)
        })
        // Deterministic regardless of worker count: larger magnitude wins,
        // ties broken by the smaller λ.
        .reduce_with(|a, b| {
            if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                a
            } else {
                b
            }
        })
        .expect("λ range is nonempty");
    MaxScan {
        lambda: best.1,
        magnitude: best.0,
        lower_bound_only: false,
    }
}

/// max_{λ} |S_{g,p}(λ,N)| over λ ∈ {1,…,p−1}, exhaustively or over a
/// seeded sample.
pub fn max_over_lambda(ctx: &SubgroupCtx, n_terms: u64, mode: LambdaMode) -> Result<MaxScan> {
    let p = ctx.p();
    if n_terms == 0 || n_terms > ctx.order() {
        return Err(Error::NExceedsOrder {
            n: n_terms,
            t: ctx.order(),
        });
    }
    match mode {
        LambdaMode::Exhaustive => {
            if p > EXHAUSTIVE_LAMBDA_LIMIT {
                return Err(Error::ExhaustiveGuard {
                    p,
                    limit: EXHAUSTIVE_LAMBDA_LIMIT,
                });
            }
            // p ≤ 10⁶ here, so the usize cast is lossless.
            Ok(scan_max(
                ctx,
                n_terms,
                (1..p as usize).into_par_iter().map(|l| l as u64),
            ))
        }
        LambdaMode::Sampled { count, seed } => {
            if count == 0 {
                return Err(Error::EmptySample);
            }
            let amount = count.min(p - 1) as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let picks: Vec<u64> = rand::seq::index::sample(&mut rng, (p - 1) as usize, amount)
                .into_iter()
                .map(|i| i as u64 + 1)
                .collect();
            let mut scan = scan_max(ctx, n_terms, picks.into_par_iter());
            scan.lower_bound_only = true;
            Ok(scan)
        }
    }
}

/// Backend for the quadruple count J(g,N).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JBackend {
    /// Brute force over all N⁴ quadruples; guarded to N ≤ 300.
    Naive,
    /// Multiset of the N² pairwise sums, summing squared multiplicities.
    Hashed,
}

/// J(g,N): the number of solutions to g^{x₁}+g^{x₂} ≡ g^{x₃}+g^{x₄} (mod p)
/// with 1 ≤ xᵢ ≤ N.
pub fn count_j(ctx: &SubgroupCtx, n_terms: u64, backend: JBackend) -> Result<u64> {
    let p = ctx.p();
    if n_terms == 0 || n_terms > ctx.order() {
        return Err(Error::NExceedsOrder {
            n: n_terms,
            t: ctx.order(),
        });
    }
    let powers: Vec<u64> = ctx.powers().take(n_terms as usize).collect();
    match backend {
        JBackend::Naive => {
            if n_terms > NAIVE_J_LIMIT {
                return Err(Error::NaiveGuard {
                    n: n_terms,
                    limit: NAIVE_J_LIMIT,
                });
            }
            let mut count = 0u64;
            for &a in &powers {
                for &b in &powers {
                    let s12 = (a + b) % p;
                    for &c in &powers {
                        for &d in &powers {
                            if (c + d) % p == s12 {
                                count += 1;
                            }
                        }
                    }
                }
            }
            Ok(count)
        }
        JBackend::Hashed => {
            let pairs = (n_terms as u128) * (n_terms as u128);
            if pairs > J_PAIR_LIMIT {
                return Err(Error::PairGuard {
                    pairs,
                    limit: J_PAIR_LIMIT,
                });
            }
            if p <= DENSE_COUNT_LIMIT {
                let mut counts = vec![0u32; p as usize];
                for &a in &powers {
                    for &b in &powers {
                        counts[((a + b) % p) as usize] += 1;
                    }
                }
                Ok(counts.iter().map(|&c| (c as u64) * (c as u64)).sum())
            } else {
                let mut counts: HashMap<u64, u64> = HashMap::with_capacity(powers.len() * 2);
                for &a in &powers {
                    for &b in &powers {
                        *counts.entry((a + b) % p).or_insert(0) += 1;
                    }
                }
                Ok(counts.values().map(|&c| c * c).sum())
            }
        }
    }
}

/// Exact fourth moment of S over F_p, together with the λ ≠ 0 part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResult {
    /// J(g,N), exact.
    pub j_count: u64,
    /// Σ_{λ∈F_p} |S(λ,N)|⁴ = p·J(g,N), exact.
    pub fourth_moment_all: u128,
    /// Σ_{λ∈F_p*} |S(λ,N)|⁴: summed directly when p ≤ 10⁴, otherwise
    /// p·J − N⁴.
    pub fourth_moment_nonzero: f64,
    /// Whether `fourth_moment_nonzero` came from direct summation.
    pub nonzero_is_direct: bool,
}

impl MomentResult {
    /// The λ ≠ 0 part via the identity path: p·J − N⁴, exact.
    pub fn fourth_moment_nonzero_exact(&self, n_terms: u64) -> u128 {
        self.fourth_moment_all - (n_terms as u128).pow(4)
    }
}

/// Splits `1..p` into fixed blocks and sums f(λ) with a compensated,
/// order-independent reduction (block sums are combined in block order).
fn sum_over_nonzero_lambda(p: u64, f: impl Fn(u64) -> f64 + Sync) -> f64 {
    const BLOCK: u64 = 1024;
    let blocks = (p - 1).div_ceil(BLOCK);
    let partials: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = 1 + b * BLOCK;
            let hi = (lo + BLOCK).min(p);
            let (mut s, mut c) = (0.0, 0.0);
            for lambda in lo..hi {
                comp_add(&mut s, &mut c, f(lambda));
            }
            s + c
        })
        .collect();
    let (mut s, mut c) = (0.0, 0.0);
    for x in partials {
        comp_add(&mut s, &mut c, x);
    }
    s + c
}

/// Fourth moment via the hashed J backend. When p ≤ 10⁴ the λ ≠ 0 sum is
/// also evaluated directly, so both routes are recorded.
pub fn fourth_moment(ctx: &SubgroupCtx, n_terms: u64) -> Result<MomentResult> {
    let p = ctx.p();
    let j_count = count_j(ctx, n_terms, JBackend::Hashed)?;
    let fourth_moment_all = p as u128 * j_count as u128;
    let identity_nonzero = (fourth_moment_all - (n_terms as u128).pow(4)) as f64;
    let (fourth_moment_nonzero, nonzero_is_direct) = if p <= DIRECT_MOMENT_LIMIT {
        let direct = sum_over_nonzero_lambda(p, |lambda| {
            let (re, im) = eval_sum(ctx, lambda, n_terms)
                .expect("validated above")
                .value();
            let sq = re * re + im * im;
            sq * sq
        });
        (direct, true)
    } else {
        (identity_nonzero, false)
    };
    Ok(MomentResult {
        j_count,
        fourth_moment_all,
        fourth_moment_nonzero,
        nonzero_is_direct,
    })
}

/// Σ_{λ∈F_p} |S(λ,N)|² summed directly; Parseval says this equals p·N.
pub fn second_moment_direct(ctx: &SubgroupCtx, n_terms: u64) -> Result<f64> {
    let zero = eval_sum(ctx, 0, n_terms)?; // validates N; contributes N²
    let (re0, im0) = zero.value();
    let nonzero = sum_over_nonzero_lambda(ctx.p(), |lambda| {
        let (re, im) = eval_sum(ctx, lambda, n_terms)
            .expect("validated above")
            .value();
        re * re + im * im
    });
    Ok(nonzero + (re0 * re0 + im0 * im0))
}

/// Σ_{λ∈F_p} |S(λ,N)|⁴ summed directly (the slow route the identity test
/// compares against p·J).
pub fn fourth_moment_direct_all(ctx: &SubgroupCtx, n_terms: u64) -> Result<f64> {
    let zero = eval_sum(ctx, 0, n_terms)?;
    let (re0, im0) = zero.value();
    let z2 = re0 * re0 + im0 * im0;
    let nonzero = sum_over_nonzero_lambda(ctx.p(), |lambda| {
        let (re, im) = eval_sum(ctx, lambda, n_terms)
            .expect("validated above")
            .value();
        let sq = re * re + im * im;
        sq * sq
    });
    Ok(nonzero + z2 * z2)
}

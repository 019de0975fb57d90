//! Verification suites behind `expsum verify`: the moment identities over
//! full prime grids, energy backend agreement, and the exact bilinear
//! inequality, each reporting check counts and counterexamples.

use expsum_core::addcomb::{rep_counts, EnergyBackend, ResidueSet};
use expsum_core::bounds::lemma2_check;
use expsum_core::expsum::{count_j, eval_sum, JBackend};
use expsum_core::modmath::{element_of_order, factorize, is_prime, FieldCtx, SubgroupCtx};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Default pair counts for the randomized suites.
pub const BACKEND_SUITE_PAIRS: u64 = 200;
pub const LEMMA2_SUITE_PAIRS: u64 = 500;

/// N runs over 1..=min(t, MOMENT_N_CAP) in the identity suites.
pub const MOMENT_N_CAP: u64 = 40;

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub checks: u64,
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.passed() {
            format!("{}: {} checks passed", self.name, self.checks)
        } else {
            format!(
                "{}: {} of {} checks FAILED; first: {}",
                self.name,
                self.failures.len(),
                self.checks,
                self.failures[0]
            )
        }
    }
}

pub fn primes_up_to(cap: u64) -> Vec<u64> {
    (2..=cap).filter(|&n| is_prime(n)).collect()
}

/// Σ|S|² and Σ|S|⁴ over all λ ∈ F_p in a single compensated pass.
fn both_moments(ctx: &SubgroupCtx, n: u64) -> (f64, f64) {
    let p = ctx.p();
    let (mut m2, mut c2) = (0.0f64, 0.0f64);
    let (mut m4, mut c4) = (0.0f64, 0.0f64);
    let add = |sum: &mut f64, comp: &mut f64, x: f64| {
        let t = *sum + x;
        if sum.abs() >= x.abs() {
            *comp += (*sum - t) + x;
        } else {
            *comp += (x - t) + *sum;
        }
        *sum = t;
    };
    for lambda in 0..p {
        let (re, im) = eval_sum(ctx, lambda, n).expect("grid respects N ≤ t").value();
        let sq = re * re + im * im;
        add(&mut m2, &mut c2, sq);
        add(&mut m4, &mut c4, sq * sq);
    }
    (m2 + c2, m4 + c4)
}

/// Runs Parseval (relative 1e-9) and the fourth-moment identity against
/// p·J (relative 1e-6) over every prime p ≤ cap, every t | p−1, every
/// N ≤ min(t, 40). One λ pass feeds both suites.
pub fn identity_suites(cap: u64) -> (SuiteOutcome, SuiteOutcome) {
    let primes = primes_up_to(cap);
    let per_prime: Vec<(u64, Vec<String>, Vec<String>)> = primes
        .par_iter()
        .map(|&p| {
            let field = FieldCtx::new(p).unwrap().with_root_table();
            let mut checks = 0u64;
            let mut parseval_failures = Vec::new();
            let mut moment_failures = Vec::new();
            for t in factorize(p - 1).divisors() {
                let ctx = element_of_order(&field, t).unwrap();
                for n in 1..=t.min(MOMENT_N_CAP) {
                    let (m2, m4) = both_moments(&ctx, n);
                    checks += 1;
                    let expected2 = (p * n) as f64;
                    if (m2 - expected2).abs() > 1e-9 * expected2 {
                        parseval_failures
                            .push(format!("p={p} t={t} N={n}: Σ|S|²={m2} vs pN={expected2}"));
                    }
                    let j = count_j(&ctx, n, JBackend::Hashed).unwrap();
                    let expected4 = (p as u128 * j as u128) as f64;
                    if (m4 - expected4).abs() > 1e-6 * expected4 {
                        moment_failures
                            .push(format!("p={p} t={t} N={n}: Σ|S|⁴={m4} vs pJ={expected4}"));
                    }
                }
            }
            (checks, parseval_failures, moment_failures)
        })
        .collect();

    let mut checks = 0;
    let mut parseval_failures = Vec::new();
    let mut moment_failures = Vec::new();
    for (c, pf, mf) in per_prime {
        checks += c;
        parseval_failures.extend(pf);
        moment_failures.extend(mf);
    }
    (
        SuiteOutcome {
            name: "parseval",
            checks,
            failures: parseval_failures,
        },
        SuiteOutcome {
            name: "fourth-moment",
            checks,
            failures: moment_failures,
        },
    )
}

fn random_prime_from(rng: &mut impl Rng, primes: &[u64]) -> u64 {
    primes[rng.gen_range(0..primes.len())]
}

fn random_set(rng: &mut impl Rng, p: u64, max_len: usize) -> ResidueSet {
    let len = rng.gen_range(1..=max_len.min(p as usize));
    ResidueSet::new(p, (0..len).map(|_| rng.gen_range(0..p)))
}

/// Naive, hashed and transform rep counts must return identical integers
/// on seeded random set pairs.
pub fn backend_suite(cap: u64, pairs: u64, seed: u64) -> SuiteOutcome {
    let primes = primes_up_to(cap);
    let failures: Vec<String> = (0..pairs)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0xBAC0 + i));
            let p = random_prime_from(&mut rng, &primes);
            let a = random_set(&mut rng, p, 150);
            let b = random_set(&mut rng, p, 150);
            let naive = rep_counts(&a, &b, EnergyBackend::Naive).unwrap();
            let hashed = rep_counts(&a, &b, EnergyBackend::Hashed).unwrap();
            let transform = rep_counts(&a, &b, EnergyBackend::Transform).unwrap();
            if naive != hashed || naive != transform || naive.energy() != transform.energy() {
                Some(format!(
                    "pair {i}: p={p} |A|={} |B|={}: backends disagree",
                    a.len(),
                    b.len()
                ))
            } else {
                None
            }
        })
        .collect();
    let mut failures = failures;
    failures.sort();
    SuiteOutcome {
        name: "backend",
        checks: pairs,
        failures,
    }
}

/// The exact inequality |ΣΣe_p(ab)|⁸ ≤ p(#A)⁴(#B)⁴E₊(A,A)E₊(B,B) on
/// seeded random pairs; it must hold with constant 1.
pub fn lemma2_suite(cap: u64, pairs: u64, seed: u64) -> SuiteOutcome {
    let primes: Vec<u64> = primes_up_to(cap).into_iter().filter(|&p| p >= 3).collect();
    let failures: Vec<String> = (0..pairs)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x13B7_0000 + i));
            let p = random_prime_from(&mut rng, &primes);
            let a = random_set(&mut rng, p, 100);
            let b = random_set(&mut rng, p, 100);
            let check = lemma2_check(&a, &b).unwrap();
            if check.holds {
                None
            } else {
                Some(format!(
                    "pair {i}: p={p} |A|={} |B|={} lhs={} rhs={}",
                    a.len(),
                    b.len(),
                    check.lhs,
                    check.rhs
                ))
            }
        })
        .collect();
    let mut failures = failures;
    failures.sort();
    SuiteOutcome {
        name: "lemma2",
        checks: pairs,
        failures,
    }
}

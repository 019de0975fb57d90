//! Exact arithmetic over Z and Z_p: primality, factorization, multiplicative
//! order, divisor counting, and construction of elements of prescribed order.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest prime for which the table of p-th roots of unity is materialized.
/// Above this, `e_p(k)` is evaluated on demand from the angle `2πk/p`.
pub const ROOT_TABLE_LIMIT: u64 = 1 << 22;

/// Deterministic Miller-Rabin witnesses covering the full 64-bit range.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// `a * b mod m` through a 128-bit intermediate, correct for any `m < 2^64`.
#[inline]
pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

/// `base^exp mod m` by binary exponentiation.
pub fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

/// Deterministic primality test for the full 64-bit range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Complete prime factorization with primes in strictly increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pairs: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.pairs
    }

    /// Reconstructs the factored integer.
    pub fn value(&self) -> u64 {
        self.pairs
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * p.pow(e))
    }

    /// τ(n), the number of divisors.
    pub fn divisor_count(&self) -> u64 {
        self.pairs.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    /// All divisors, sorted ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.pairs {
            let prev = out.len();
            let mut pe = 1u64;
            for _ in 0..e {
                pe *= p;
                for i in 0..prev {
                    out.push(out[i] * pe);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The distinct prime factors.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.pairs.iter().map(|&(p, _)| p)
    }
}

/// Brent's cycle-finding variant of Pollard rho. `n` must be odd, composite
/// and have no factor below the trial-division cutoff.
fn brent_rho(n: u64, c: u64) -> u64 {
    let f = |x: u64| (mulmod(x, x, n) + c) % n;
    let mut y = 2u64;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut g = 1u64;
    let mut x = 0u64;
    let mut ys = 0u64;
    const BATCH: u64 = 128;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..BATCH.min(r - k) {
                y = f(y);
                q = mulmod(q, x.abs_diff(y), n);
            }
            g = gcd(q, n);
            k += BATCH;
        }
        r *= 2;
    }
    if g == n {
        // Batched gcd overshot; replay one step at a time.
        loop {
            ys = f(ys);
            g = gcd(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    g
}

fn factor_into(n: u64, acc: &mut BTreeMap<u64, u32>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        *acc.entry(n).or_insert(0) += 1;
        return;
    }
    let mut c = 1;
    let d = loop {
        let d = brent_rho(n, c);
        if d != n {
            break d;
        }
        c += 1;
    };
    factor_into(d, acc);
    factor_into(n / d, acc);
}

/// Complete prime factorization of `n ≥ 1`; `n = 1` yields the empty product.
/// Small factors are stripped by trial division, the remainder is split by
/// Brent-rho with deterministic primality checks.
pub fn factorize(mut n: u64) -> Factorization {
    let mut acc = BTreeMap::new();
    if n >= 2 {
        while n.is_multiple_of(2) {
            *acc.entry(2).or_insert(0) += 1;
            n /= 2;
        }
        let mut d = 3u64;
        while d < 1024 && d * d <= n {
            while n.is_multiple_of(d) {
                *acc.entry(d).or_insert(0) += 1;
                n /= d;
            }
            d += 2;
        }
        if n > 1 {
            if d * d > n {
                *acc.entry(n).or_insert(0) += 1;
            } else {
                factor_into(n, &mut acc);
            }
        }
    }
    Factorization {
        pairs: acc.into_iter().collect(),
    }
}

/// τ(n) for `n ≥ 1`.
pub fn divisor_count(n: u64) -> u64 {
    factorize(n).divisor_count()
}

/// A prime modulus together with an optional table of the p-th roots of
/// unity `e_p(k) = e^{2πik/p}`. Cheap to clone; the table is shared.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    p: u64,
    root_table: Option<Arc<Vec<(f64, f64)>>>,
}

impl FieldCtx {
    /// Builds a field context, rejecting non-prime moduli.
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldCtx {
            p,
            root_table: None,
        })
    }

    /// Materializes the root table when `p ≤ 2^22`; above the guard the
    /// context is returned unchanged and roots are computed on demand.
    pub fn with_root_table(mut self) -> Self {
        if self.p <= ROOT_TABLE_LIMIT && self.root_table.is_none() {
            let p = self.p as f64;
            let mut table = Vec::with_capacity(self.p as usize);
            table.push((1.0, 0.0));
            for k in 1..self.p {
                let theta = TAU * (k as f64) / p;
                table.push((theta.cos(), theta.sin()));
            }
            self.root_table = Some(Arc::new(table));
        }
        self
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn has_root_table(&self) -> bool {
        self.root_table.is_some()
    }

    /// `e_p(k)` as `(re, im)` for `k ∈ [0, p)`.
    #[inline]
    pub fn root(&self, k: u64) -> (f64, f64) {
        debug_assert!(k < self.p);
        match &self.root_table {
            Some(t) => t[k as usize],
            None => {
                let theta = TAU * (k as f64) / (self.p as f64);
                (theta.cos(), theta.sin())
            }
        }
    }

    /// Multiplicative inverse of `a ≠ 0 mod p`.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(!a.is_multiple_of(self.p));
        powmod(a, self.p - 2, self.p)
    }
}

/// An element `g` of F_p* of verified multiplicative order `t`.
#[derive(Debug, Clone)]
pub struct SubgroupCtx {
    field: FieldCtx,
    g: u64,
    t: u64,
}

impl SubgroupCtx {
    /// Wraps `g` with its computed order.
    pub fn new(field: FieldCtx, g: u64) -> Result<Self> {
        let t = multiplicative_order(&field, g)?;
        Ok(SubgroupCtx { field, g, t })
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn p(&self) -> u64 {
        self.field.p
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    /// The multiplicative order of `g`.
    pub fn order(&self) -> u64 {
        self.t
    }

    /// `g^1, g^2, …` as an endless iterator of residues.
    pub fn powers(&self) -> impl Iterator<Item = u64> + '_ {
        let p = self.field.p;
        let g = self.g;
        std::iter::successors(Some(g), move |&y| Some(mulmod(y, g, p)))
    }
}

/// Least `t ≥ 1` with `g^t ≡ 1 (mod p)`, computed by factoring `p−1` and
/// stripping prime factors.
pub fn multiplicative_order(field: &FieldCtx, g: u64) -> Result<u64> {
    let p = field.p;
    if g == 0 || g >= p {
        return Err(Error::InvalidElement { g, p });
    }
    let mut t = p - 1;
    for q in factorize(p - 1).primes() {
        while t.is_multiple_of(q) && powmod(g, t / q, p) == 1 {
            t /= q;
        }
    }
    debug_assert_eq!(powmod(g, t, p), 1);
    Ok(t)
}

/// An element of order exactly `t`, obtained as `r^{(p−1)/t}` for the least
/// primitive root `r`. Rejects `t ∤ p−1`.
pub fn element_of_order(field: &FieldCtx, t: u64) -> Result<SubgroupCtx> {
    let p = field.p;
    if t == 0 || !(p - 1).is_multiple_of(t) {
        return Err(Error::OrderNotDividing { t, p });
    }
    let factors: Vec<u64> = factorize(p - 1).primes().collect();
    let r = (1..p)
        .find(|&r| factors.iter().all(|&q| powmod(r, (p - 1) / q, p) != 1))
        .expect("F_p* is cyclic, a primitive root exists");
    let g = powmod(r, (p - 1) / t, p);
    debug_assert_eq!(multiplicative_order(field, g)?, t);
    Ok(SubgroupCtx {
        field: field.clone(),
        g,
        t,
    })
}

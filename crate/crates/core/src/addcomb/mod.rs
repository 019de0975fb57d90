//! Set algebra in F_p (sumset, difference, product, ratio sets),
//! representation-function counting, and additive energy E₊ with three
//! interchangeable backends.

mod ntt;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::modmath::{is_prime, mulmod, powmod, SubgroupCtx};

/// Transform backend guard on the set modulus.
pub const TRANSFORM_MODULUS_LIMIT: u64 = 1 << 22;
/// Dense count tables (naive backend, small-p fast paths) stop here.
pub const DENSE_MODULUS_LIMIT: u64 = 1 << 24;
/// `difference_quotient_set` is refused above this cardinality.
pub const QUOTIENT_SET_LIMIT: usize = 500;

/// Sets switch from a sorted array to a bitmap above this density.
const BITMAP_DENSITY: u64 = 64;

#[derive(Debug, Clone)]
enum Repr {
    Sorted(Vec<u64>),
    Bitmap { words: Vec<u64>, len: usize },
}

/// A set of residues in [0, p), stored sorted when sparse and as a bitmap
/// when dense.
#[derive(Debug, Clone)]
pub struct ResidueSet {
    modulus: u64,
    repr: Repr,
}

impl ResidueSet {
    /// Builds a set from arbitrary values, reduced mod `modulus`.
    pub fn new(modulus: u64, values: impl IntoIterator<Item = u64>) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        let mut elems: Vec<u64> = values.into_iter().map(|v| v % modulus).collect();
        elems.sort_unstable();
        elems.dedup();
        Self::from_sorted(modulus, elems)
    }

    fn from_sorted(modulus: u64, elems: Vec<u64>) -> Self {
        let repr = if modulus <= DENSE_MODULUS_LIMIT
            && (elems.len() as u64).saturating_mul(BITMAP_DENSITY) >= modulus
        {
            let mut words = vec![0u64; (modulus as usize).div_ceil(64)];
            for &e in &elems {
                words[(e / 64) as usize] |= 1 << (e % 64);
            }
            Repr::Bitmap {
                words,
                len: elems.len(),
            }
        } else {
            Repr::Sorted(elems)
        };
        ResidueSet { modulus, repr }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Sorted(v) => v.len(),
            Repr::Bitmap { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, x: u64) -> bool {
        match &self.repr {
            Repr::Sorted(v) => v.binary_search(&x).is_ok(),
            Repr::Bitmap { words, .. } => {
                x < self.modulus && words[(x / 64) as usize] >> (x % 64) & 1 == 1
            }
        }
    }

    /// Elements in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let (sorted, bitmap) = match &self.repr {
            Repr::Sorted(v) => (Some(v.iter().copied()), None),
            Repr::Bitmap { words, .. } => {
                let it = words.iter().enumerate().flat_map(|(w, &bits)| {
                    (0..64)
                        .filter(move |b| bits >> b & 1 == 1)
                        .map(move |b| w as u64 * 64 + b)
                });
                (None, Some(it))
            }
        };
        sorted
            .into_iter()
            .flatten()
            .chain(bitmap.into_iter().flatten())
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }
}

impl PartialEq for ResidueSet {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
            && self.len() == other.len()
            && self.iter().eq(other.iter())
    }
}

impl Eq for ResidueSet {}

fn check_moduli(a: &ResidueSet, b: &ResidueSet) -> Result<u64> {
    if a.modulus != b.modulus {
        return Err(Error::ModulusMismatch {
            a: a.modulus,
            b: b.modulus,
        });
    }
    Ok(a.modulus)
}

/// Accumulates distinct residues; bitmap below the dense limit, tree set
/// above.
enum SetBuilder {
    Bits { words: Vec<u64>, count: u64 },
    Tree(BTreeSet<u64>),
}

impl SetBuilder {
    fn new(modulus: u64) -> Self {
        if modulus <= DENSE_MODULUS_LIMIT {
            SetBuilder::Bits {
                words: vec![0u64; (modulus as usize).div_ceil(64)],
                count: 0,
            }
        } else {
            SetBuilder::Tree(BTreeSet::new())
        }
    }

    #[inline]
    fn insert(&mut self, x: u64) {
        match self {
            SetBuilder::Bits { words, count } => {
                let w = &mut words[(x / 64) as usize];
                let bit = 1u64 << (x % 64);
                if *w & bit == 0 {
                    *w |= bit;
                    *count += 1;
                }
            }
            SetBuilder::Tree(t) => {
                t.insert(x);
            }
        }
    }

    fn count(&self) -> u64 {
        match self {
            SetBuilder::Bits { count, .. } => *count,
            SetBuilder::Tree(t) => t.len() as u64,
        }
    }

    fn finish(self, modulus: u64) -> ResidueSet {
        let elems: Vec<u64> = match self {
            SetBuilder::Bits { words, .. } => words
                .iter()
                .enumerate()
                .flat_map(|(w, &bits)| {
                    (0..64)
                        .filter(move |b| bits >> b & 1 == 1)
                        .map(move |b| w as u64 * 64 + b)
                })
                .collect(),
            SetBuilder::Tree(t) => t.into_iter().collect(),
        };
        ResidueSet::from_sorted(modulus, elems)
    }
}

/// A+B = {a+b : a ∈ A, b ∈ B} in Z_p.
pub fn sumset(a: &ResidueSet, b: &ResidueSet) -> Result<ResidueSet> {
    let p = check_moduli(a, b)?;
    let mut out = SetBuilder::new(p);
    for x in a.iter() {
        for y in b.iter() {
            let s = x + y;
            out.insert(if s >= p { s - p } else { s });
        }
    }
    Ok(out.finish(p))
}

/// A−B = {a−b : a ∈ A, b ∈ B} in Z_p.
pub fn difference_set(a: &ResidueSet, b: &ResidueSet) -> Result<ResidueSet> {
    let p = check_moduli(a, b)?;
    let mut out = SetBuilder::new(p);
    for x in a.iter() {
        for y in b.iter() {
            out.insert(if x >= y { x - y } else { x + p - y });
        }
    }
    Ok(out.finish(p))
}

/// A·B = {ab : a ∈ A, b ∈ B} in Z_p.
pub fn product_set(a: &ResidueSet, b: &ResidueSet) -> Result<ResidueSet> {
    let p = check_moduli(a, b)?;
    let mut out = SetBuilder::new(p);
    for x in a.iter() {
        for y in b.iter() {
            out.insert(mulmod(x, y, p));
        }
    }
    Ok(out.finish(p))
}

/// A/B = {ab⁻¹ : a ∈ A, b ∈ B, b ≠ 0} in F_p. A denominator set with no
/// nonzero element yields the empty set.
pub fn ratio_set(a: &ResidueSet, b: &ResidueSet) -> Result<ResidueSet> {
    let p = check_moduli(a, b)?;
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let inverses: Vec<u64> = b
        .iter()
        .filter(|&y| y != 0)
        .map(|y| powmod(y, p - 2, p))
        .collect();
    let mut out = SetBuilder::new(p);
    for x in a.iter() {
        for &inv in &inverses {
            out.insert(mulmod(x, inv, p));
        }
        if out.count() == p {
            break; // already all of F_p
        }
    }
    Ok(out.finish(p))
}

/// (A−A)/(A−A), guarded to |A| ≤ 500.
pub fn difference_quotient_set(a: &ResidueSet) -> Result<ResidueSet> {
    if a.len() < 2 {
        return Err(Error::SetTooSmall {
            len: a.len(),
            min: 2,
        });
    }
    if a.len() > QUOTIENT_SET_LIMIT {
        return Err(Error::SetTooLarge {
            len: a.len(),
            limit: QUOTIENT_SET_LIMIT,
        });
    }
    let diffs = difference_set(a, a)?;
    ratio_set(&diffs, &diffs)
}

/// Backend for representation-function counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyBackend {
    /// Double loop into a dense table indexed by residue.
    Naive,
    /// Double loop into a hash table.
    Hashed,
    /// Exact cyclic convolution of indicator vectors over an auxiliary
    /// modulus exceeding p².
    Transform,
}

#[derive(Debug, Clone)]
enum CountRepr {
    Dense(Vec<u64>),
    Sparse(BTreeMap<u64, u64>),
}

/// r_{A+B}(s) = #{(a,b) ∈ A×B : a+b ≡ s (mod p)} for every s.
#[derive(Debug, Clone)]
pub struct RepCounts {
    modulus: u64,
    counts: CountRepr,
}

impl RepCounts {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn count(&self, s: u64) -> u64 {
        match &self.counts {
            CountRepr::Dense(v) => v.get(s as usize).copied().unwrap_or(0),
            CountRepr::Sparse(m) => m.get(&s).copied().unwrap_or(0),
        }
    }

    /// (s, r(s)) over the support, ascending in s.
    pub fn nonzero(&self) -> Vec<(u64, u64)> {
        match &self.counts {
            CountRepr::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c > 0)
                .map(|(s, &c)| (s as u64, c))
                .collect(),
            CountRepr::Sparse(m) => m.iter().map(|(&s, &c)| (s, c)).collect(),
        }
    }

    /// Σ_s r(s), which must equal |A|·|B|.
    pub fn total(&self) -> u128 {
        match &self.counts {
            CountRepr::Dense(v) => v.iter().map(|&c| c as u128).sum(),
            CountRepr::Sparse(m) => m.values().map(|&c| c as u128).sum(),
        }
    }

    /// Σ_s r(s)² = E₊(A,B).
    pub fn energy(&self) -> u128 {
        match &self.counts {
            CountRepr::Dense(v) => v.iter().map(|&c| c as u128 * c as u128).sum(),
            CountRepr::Sparse(m) => m.values().map(|&c| c as u128 * c as u128).sum(),
        }
    }
}

impl PartialEq for RepCounts {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus && self.nonzero() == other.nonzero()
    }
}

impl Eq for RepCounts {}

/// Exact representation counts of A+B with the chosen backend.
pub fn rep_counts(a: &ResidueSet, b: &ResidueSet, backend: EnergyBackend) -> Result<RepCounts> {
    let p = check_moduli(a, b)?;
    match backend {
        EnergyBackend::Naive => {
            if p > DENSE_MODULUS_LIMIT {
                return Err(Error::DenseGuard {
                    p,
                    limit: DENSE_MODULUS_LIMIT,
                });
            }
            let mut counts = vec![0u64; p as usize];
            for x in a.iter() {
                for y in b.iter() {
                    let s = x + y;
                    counts[(if s >= p { s - p } else { s }) as usize] += 1;
                }
            }
            Ok(RepCounts {
                modulus: p,
                counts: CountRepr::Dense(counts),
            })
        }
        EnergyBackend::Hashed => {
            let mut counts: HashMap<u64, u64> = HashMap::with_capacity(a.len().min(1 << 20));
            for x in a.iter() {
                for y in b.iter() {
                    let s = x + y;
                    *counts.entry(if s >= p { s - p } else { s }).or_insert(0) += 1;
                }
            }
            Ok(RepCounts {
                modulus: p,
                counts: CountRepr::Sparse(counts.into_iter().collect()),
            })
        }
        EnergyBackend::Transform => {
            if p > TRANSFORM_MODULUS_LIMIT {
                return Err(Error::TransformGuard {
                    p,
                    limit: TRANSFORM_MODULUS_LIMIT,
                });
            }
            let mut ind_a = vec![0u64; p as usize];
            for x in a.iter() {
                ind_a[x as usize] = 1;
            }
            let mut ind_b = vec![0u64; p as usize];
            for y in b.iter() {
                ind_b[y as usize] = 1;
            }
            let conv = ntt::convolve(&ind_a, &ind_b);
            // Index sums reach 2p−2; fold the wraparound back into [0, p).
            let mut counts = vec![0u64; p as usize];
            for (s, &c) in conv.iter().enumerate() {
                let idx = if s >= p as usize { s - p as usize } else { s };
                counts[idx] += c;
            }
            Ok(RepCounts {
                modulus: p,
                counts: CountRepr::Dense(counts),
            })
        }
    }
}

/// E₊(A,B) = #{(a₁,a₂,b₁,b₂) ∈ A²×B² : a₁+b₁ = a₂+b₂} = Σ_s r(s)².
pub fn additive_energy(a: &ResidueSet, b: &ResidueSet, backend: EnergyBackend) -> Result<u128> {
    Ok(rep_counts(a, b, backend)?.energy())
}

/// {g^x : x ∈ X} for X inside the index interval [L+1, L+M], either the
/// full interval or a seeded random subset of prescribed density.
#[derive(Debug, Clone)]
pub struct PowerSet {
    ctx: SubgroupCtx,
    offset: u64,
    interval_len: u64,
    elements: ResidueSet,
}

impl PowerSet {
    /// The full interval X = [L+1, L+M]; requires 1 ≤ M ≤ t, which forces
    /// the M elements to be distinct.
    pub fn interval(ctx: &SubgroupCtx, offset: u64, interval_len: u64) -> Result<Self> {
        if interval_len == 0 || interval_len > ctx.order() {
            return Err(Error::NExceedsOrder {
                n: interval_len,
                t: ctx.order(),
            });
        }
        let p = ctx.p();
        let g = ctx.g();
        let mut elems = Vec::with_capacity(interval_len as usize);
        let mut y = powmod(g, offset % ctx.order() + 1, p);
        for _ in 0..interval_len {
            elems.push(y);
            y = mulmod(y, g, p);
        }
        let elements = ResidueSet::new(p, elems);
        assert_eq!(elements.len() as u64, interval_len, "powers must be distinct");
        Ok(PowerSet {
            ctx: ctx.clone(),
            offset,
            interval_len,
            elements,
        })
    }

    /// Keeps a seeded random subset of the index interval of size ⌈ΔM⌉,
    /// realizing the density parameters Δ of sub-sampled power sets.
    pub fn subsampled(
        ctx: &SubgroupCtx,
        offset: u64,
        interval_len: u64,
        delta: f64,
        seed: u64,
    ) -> Result<Self> {
        if interval_len == 0 || interval_len > ctx.order() {
            return Err(Error::NExceedsOrder {
                n: interval_len,
                t: ctx.order(),
            });
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::BoundDomain {
                what: "density Δ in (0, 1]",
            });
        }
        // ⌈ΔM⌉, robust to Δ = k/M picking up a half-ulp in the product.
        let target = delta * interval_len as f64;
        let keep = if (target - target.round()).abs() < 1e-9 * target.max(1.0) {
            target.round() as u64
        } else {
            target.ceil() as u64
        }
        .clamp(1, interval_len);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = ctx.p();
        let g = ctx.g();
        let base = offset % ctx.order();
        let elems: Vec<u64> =
            rand::seq::index::sample(&mut rng, interval_len as usize, keep as usize)
                .into_iter()
                .map(|i| powmod(g, base + 1 + i as u64, p))
                .collect();
        let elements = ResidueSet::new(p, elems);
        assert_eq!(elements.len() as u64, keep, "powers must be distinct");
        Ok(PowerSet {
            ctx: ctx.clone(),
            offset,
            interval_len,
            elements,
        })
    }

    pub fn ctx(&self) -> &SubgroupCtx {
        &self.ctx
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// M, the length of the ambient index interval.
    pub fn interval_len(&self) -> u64 {
        self.interval_len
    }

    pub fn elements(&self) -> &ResidueSet {
        &self.elements
    }

    /// |X| / M.
    pub fn density(&self) -> f64 {
        self.elements.len() as f64 / self.interval_len as f64
    }
}

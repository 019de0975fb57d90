//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("element {g} is outside F_{p}* (expected 1 ≤ g ≤ {p}−1)")]
    InvalidElement { g: u64, p: u64 },
    #[error("order {t} does not divide p−1 = {p}−1")]
    OrderNotDividing { t: u64, p: u64 },
    #[error("N = {n} exceeds order t = {t}")]
    NExceedsOrder { n: u64, t: u64 },
    #[error("λ = {lambda} is outside F_{p}")]
    LambdaOutOfRange { lambda: u64, p: u64 },
    #[error("a = {a} is outside Z_{t}")]
    HybridIndexOutOfRange { a: u64, t: u64 },
    #[error("exhaustive λ scan requires p ≤ {limit}, got p = {p}")]
    ExhaustiveGuard { p: u64, limit: u64 },
    #[error("sampled λ scan requires at least one sample")]
    EmptySample,
    #[error("naive quadruple count requires N ≤ {limit}, got N = {n}")]
    NaiveGuard { n: u64, limit: u64 },
    #[error("pair multiset of size N² = {pairs} exceeds the memory guard {limit}")]
    PairGuard { pairs: u128, limit: u128 },
    #[error("residue sets have different moduli ({a} vs {b})")]
    ModulusMismatch { a: u64, b: u64 },
    #[error("set of size {len} exceeds the guard {limit} for this operation")]
    SetTooLarge { len: usize, limit: usize },
    #[error("operation requires a set of at least {min} elements, got {len}")]
    SetTooSmall { len: usize, min: usize },
    #[error("transform backend requires modulus ≤ {limit}, got p = {p}")]
    TransformGuard { p: u64, limit: u64 },
    #[error("dense counting requires modulus ≤ {limit}, got p = {p}")]
    DenseGuard { p: u64, limit: u64 },
    #[error("bound formula requires {what}")]
    BoundDomain { what: &'static str },
    #[error("Δ·M = {product} is not integral (Δ = {delta}, M = {m})")]
    NonIntegralDensity { delta: f64, m: u64, product: f64 },
}

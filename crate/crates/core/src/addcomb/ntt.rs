//! Exact integer convolution through a number-theoretic transform.
//!
//! The working modulus q = 2^64 − 2^32 + 1 satisfies 2^32 | q−1, so any
//! transform length 2^k ≤ 2^32 is available, and q far exceeds the square
//! of every admissible set modulus, making the recovered counts exact.

use std::sync::OnceLock;

use crate::modmath::{factorize, mulmod, powmod};

pub const NTT_MODULUS: u64 = 0xFFFF_FFFF_0000_0001;

/// Least primitive root of the NTT modulus, found once by testing
/// candidates against the prime factors of q−1.
fn primitive_root() -> u64 {
    static ROOT: OnceLock<u64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        let q = NTT_MODULUS;
        let factors: Vec<u64> = factorize(q - 1).primes().collect();
        (2..q)
            .find(|&r| factors.iter().all(|&f| powmod(r, (q - 1) / f, q) != 1))
            .expect("multiplicative group of a prime field is cyclic")
    })
}

/// In-place iterative radix-2 transform; `invert` applies the inverse
/// including the 1/len factor. `values.len()` must be a power of two
/// dividing 2^32.
fn transform(values: &mut [u64], invert: bool) {
    let n = values.len();
    debug_assert!(n.is_power_of_two() && (n as u64) <= 1 << 32);
    let q = NTT_MODULUS;

    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            values.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let mut w_len = powmod(primitive_root(), (q - 1) / len as u64, q);
        if invert {
            w_len = powmod(w_len, q - 2, q);
        }
        for start in (0..n).step_by(len) {
            let mut w = 1u64;
            for i in start..start + len / 2 {
                let u = values[i];
                let v = mulmod(values[i + len / 2], w, q);
                // q is close to 2^64; sums must not touch u64.
                let s = u as u128 + v as u128;
                values[i] = if s >= q as u128 { (s - q as u128) as u64 } else { s as u64 };
                values[i + len / 2] = if u >= v { u - v } else { (q - v) + u };
                w = mulmod(w, w_len, q);
            }
        }
        len <<= 1;
    }

    if invert {
        let n_inv = powmod(n as u64, q - 2, q);
        for v in values.iter_mut() {
            *v = mulmod(*v, n_inv, q);
        }
    }
}

/// Linear convolution of two nonnegative integer sequences, exact as long
/// as every output coefficient is below the NTT modulus.
pub fn convolve(a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let mut fa = vec![0u64; size];
    let mut fb = vec![0u64; size];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    transform(&mut fa, false);
    transform(&mut fb, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = mulmod(*x, *y, NTT_MODULUS);
    }
    transform(&mut fa, true);
    fa.truncate(out_len);
    fa
}

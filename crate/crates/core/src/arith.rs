//! Small integer arithmetic used throughout: factorization, divisors,
//! primality, perfect-power roots and the exact `tanh` of a log-multiple.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};

/// Prime factorization by trial division, as `(prime, exponent)` pairs in
/// ascending order. `factorize(1)` is empty.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n > 0, "factorize(0) is undefined");
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factorize(n) {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let f = factorize(n);
    f.len() == 1 && f[0].1 == 1
}

/// Möbius function: `(-1)^k` for a product of `k` distinct primes, else 0.
pub fn mobius(n: u64) -> i8 {
    assert!(n >= 1, "mobius is defined for n >= 1");
    let mut sign = 1i8;
    for (_, e) in factorize(n) {
        if e > 1 {
            return 0;
        }
        sign = -sign;
    }
    sign
}

fn integer_root(n: u64, k: u32) -> Option<u64> {
    let guess = (n as f64).powf(1.0 / k as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|&r| r >= 2 && r.checked_pow(k) == Some(n))
}

/// Smallest `root` with `root^exponent == q`. Two integers that are not
/// perfect powers have rationally independent logarithms, so reducing every
/// base to its root decides commensurability of `r·log q` lengths exactly.
pub fn perfect_power_root(q: u64) -> (u64, u32) {
    assert!(q >= 2, "base must be at least 2");
    let max_k = 64 - q.leading_zeros();
    for k in (2..=max_k).rev() {
        if let Some(r) = integer_root(q, k) {
            let (root, e) = perfect_power_root(r);
            return (root, e * k);
        }
    }
    (q, 1)
}

/// `tanh(n·log(q)/2) = (qⁿ − 1)/(qⁿ + 1)` as an exact rational.
pub fn tanh_half_log_multiple(q: u64, n: u64) -> BigRational {
    let qn: BigInt = Pow::pow(BigInt::from(q), n);
    BigRational::new(&qn - BigInt::one(), &qn + BigInt::one())
}

//! Small modular-arithmetic helpers for word-sized moduli.

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic trial division; inputs here are desk-scale primes.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// `p^m` when it fits in a `u64`.
pub fn checked_prime_power(p: u64, m: u32) -> Option<u64> {
    p.checked_pow(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(10007));
        assert!(!is_prime(10007 * 3));
    }

    #[test]
    fn pow_mod_matches_naive() {
        for m in [2u64, 9, 25, 1 << 20] {
            for b in 0..20u64 {
                let mut naive = 1 % m;
                for e in 0..12u64 {
                    assert_eq!(pow_mod(b, e, m), naive);
                    naive = naive * (b % m) % m;
                }
            }
        }
    }
}

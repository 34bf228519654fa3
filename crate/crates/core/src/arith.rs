//! Integer primitives: quadratic symbols, 2-adic valuation and trial-division
//! factorization.
//!
//! All curve parameters handled by this crate are small (desk scale), so the
//! symbols work on `i64` inputs. Callers that build larger products should use
//! [`checked_product`] so that an overflow surfaces as an error.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("jacobi symbol needs an odd positive modulus, got {0}")]
    BadModulus(u64),
    #[error("valuation of zero is undefined")]
    Zero,
    #[error("{value} is not square-free ({prime}^2 divides it)")]
    NotSquareFree { value: u64, prime: u64 },
    #[error("integer overflow")]
    Overflow,
}

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut f = 3u64;
    while f.saturating_mul(f) <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

/// Representative of `a` modulo `n` in `[0, n)`.
#[inline]
pub fn modp(a: i64, n: u64) -> u64 {
    (a as i128).rem_euclid(n as i128) as u64
}

/// Jacobi symbol `(a/n)` for odd `n >= 1`.
pub fn jacobi(a: i64, n: u64) -> Result<i8, ArithError> {
    if n == 0 || n.is_multiple_of(2) {
        return Err(ArithError::BadModulus(n));
    }
    let mut a = modp(a, n);
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    Ok(if n == 1 { t } else { 0 })
}

/// Legendre symbol `(a/l)`; zero exactly when `l | a`.
pub fn legendre(a: i64, l: u64) -> Result<i8, ArithError> {
    if l.is_multiple_of(2) || !is_prime(l) {
        return Err(ArithError::NotOddPrime(l));
    }
    jacobi(a, l)
}

/// Largest `k` with `2^k | a`.
pub fn v2(a: i64) -> Result<u32, ArithError> {
    if a == 0 {
        return Err(ArithError::Zero);
    }
    Ok(a.trailing_zeros())
}

/// `l`-adic valuation of a nonzero integer.
pub fn val(a: i64, l: u64) -> Result<u32, ArithError> {
    if a == 0 {
        return Err(ArithError::Zero);
    }
    let l = l as i64;
    let (mut a, mut k) = (a, 0);
    while a % l == 0 {
        a /= l;
        k += 1;
    }
    Ok(k)
}

/// Prime factors of a square-free `a >= 1` in increasing order.
pub fn factor_squarefree(a: u64) -> Result<Vec<u64>, ArithError> {
    if a == 0 {
        return Err(ArithError::Zero);
    }
    let mut out = Vec::new();
    let mut rest = a;
    let mut f = 2u64;
    while f.saturating_mul(f) <= rest {
        if rest.is_multiple_of(f) {
            rest /= f;
            if rest.is_multiple_of(f) {
                return Err(ArithError::NotSquareFree { value: a, prime: f });
            }
            out.push(f);
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        out.push(rest);
    }
    Ok(out)
}

/// Product of signed factors, erroring instead of wrapping.
pub fn checked_product<I: IntoIterator<Item = i64>>(items: I) -> Result<i64, ArithError> {
    items
        .into_iter()
        .try_fold(1i64, |acc, x| acc.checked_mul(x).ok_or(ArithError::Overflow))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn euler(a: i64, l: u64) -> i8 {
        let a = modp(a, l);
        if a == 0 {
            return 0;
        }
        let mut acc = 1u64;
        let mut base = a;
        let mut e = (l - 1) / 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % l;
            }
            base = base * base % l;
            e >>= 1;
        }
        if acc == 1 {
            1
        } else {
            -1
        }
    }

    fn odd_primes_below(n: u64) -> Vec<u64> {
        (3..n).filter(|&x| is_prime(x)).collect()
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre(1, 3), Ok(1));
        assert_eq!(legendre(2, 7), Ok(1));
        assert_eq!(legendre(-1, 5), Ok(1));
        assert_eq!(legendre(5, 5), Ok(0));
        assert_eq!(legendre(3, 9), Err(ArithError::NotOddPrime(9)));
        assert_eq!(legendre(3, 2), Err(ArithError::NotOddPrime(2)));
    }

    #[test]
    fn jacobi_examples() {
        assert_eq!(
            jacobi(7, 15).unwrap(),
            jacobi(7, 3).unwrap() * jacobi(7, 5).unwrap()
        );
        assert_eq!(jacobi(2, 15), Ok(1));
        for a in -20..20 {
            assert_eq!(jacobi(a, 1), Ok(1));
        }
        assert_eq!(jacobi(3, 8), Err(ArithError::BadModulus(8)));
        assert_eq!(jacobi(3, 0), Err(ArithError::BadModulus(0)));
    }

    #[test]
    fn v2_examples() {
        assert_eq!(v2(12), Ok(2));
        assert_eq!(v2(-8), Ok(3));
        assert_eq!(v2(7), Ok(0));
        assert_eq!(v2(0), Err(ArithError::Zero));
    }

    #[test]
    fn factor_examples() {
        assert_eq!(factor_squarefree(1), Ok(vec![]));
        assert_eq!(factor_squarefree(105), Ok(vec![3, 5, 7]));
        assert_eq!(
            factor_squarefree(45),
            Err(ArithError::NotSquareFree { value: 45, prime: 3 })
        );
        assert_eq!(factor_squarefree(2 * 1009), Ok(vec![2, 1009]));
    }

    #[test]
    fn euler_criterion_agreement() {
        for l in odd_primes_below(98) {
            for a in 1..l as i64 {
                assert_eq!(legendre(a, l).unwrap(), euler(a, l), "a={a} l={l}");
            }
        }
    }

    #[test]
    fn reduction_invariance() {
        for l in odd_primes_below(200) {
            for a in -300i64..300 {
                assert_eq!(legendre(a, l), legendre(modp(a, l) as i64, l));
            }
        }
    }

    #[test]
    fn checked_product_overflow() {
        assert_eq!(checked_product([3, -5, 7]), Ok(-105));
        assert_eq!(checked_product([i64::MAX, 2]), Err(ArithError::Overflow));
    }

    proptest! {
        #[test]
        fn legendre_multiplicative(a in -10_000i64..10_000, b in -10_000i64..10_000, idx in 0usize..40) {
            let primes = odd_primes_below(200);
            let l = primes[idx % primes.len()];
            prop_assume!(modp(a * b, l) != 0);
            prop_assert_eq!(
                legendre(a * b, l).unwrap(),
                legendre(a, l).unwrap() * legendre(b, l).unwrap()
            );
        }

        #[test]
        fn jacobi_is_product_of_legendre(a in -5_000i64..5_000, n in 1u64..20_000) {
            let n = n | 1;
            prop_assume!(factor_squarefree(n).is_ok());
            let expected: i8 = factor_squarefree(n)
                .unwrap()
                .into_iter()
                .map(|l| legendre(a, l).unwrap())
                .product();
            prop_assert_eq!(jacobi(a, n).unwrap(), expected);
        }
    }
}

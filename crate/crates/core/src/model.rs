//! Curve-family parameters, the square-class group `Q(S,2)`, places of `S`
//! and the quartic torsors attached to each class.
//!
//! The two families are
//!
//! ```text
//! E  : y^2 = x (x + e p D) (x + e q D)
//! E' : y^2 = x^3 - 2 e (p + q) D x^2 + 4^m D^2 x
//! ```
//!
//! with `e = +-1`, odd primes `p < q`, `q - p = 2^m`, and `D = D_1 ... D_n`
//! odd, square-free and prime to `pq`. The isogeny `E -> E'` is
//! `(x, y) -> (y^2/x^2, y (pqD^2 - x^2)/x^2)`, its dual is
//! `(x, y) -> (y^2/4x^2, y (4^m D^2 - x^2)/8x^2)`; both have kernel `{O, (0,0)}`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, ArithError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("q - p = {0} is not a positive power of two")]
    InvalidGap(i64),
    #[error("invalid D = {d}: {reason}")]
    InvalidD { d: i64, reason: String },
    #[error("{0} is not an odd prime")]
    NotPrime(i64),
    #[error("square-class basis mismatch ({0} vs {1} generators)")]
    BasisMismatch(usize, usize),
    #[error("{0} is not a square-free integer supported on the basis")]
    NotInGroup(i64),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Sign `e` in front of `pD` and `qD`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Which curve of the isogenous pair a torsor (or Selmer group) belongs to.
///
/// `E` classes live on the torsors `C_d` and make up `S^(phi)(E/Q)`;
/// `EPrime` classes live on `C'_d` and make up `S^(phi-hat)(E'/Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    E,
    EPrime,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::E => "E",
            Family::EPrime => "E'",
        })
    }
}

/// Validated parameters of one curve instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CurveParams {
    pub eps: Sign,
    pub p: i64,
    pub q: i64,
    pub m: u32,
    pub d: i64,
    /// Prime factors of `D`: first the `s` primes with `(pq/D_i) = 1`, then the
    /// rest, each block ascending.
    pub factors: Vec<i64>,
    pub s: usize,
}

impl CurveParams {
    /// Checks the family constraints and orders the factors of `D`.
    pub fn new(eps: Sign, p: i64, q: i64, d: i64) -> Result<CurveParams, ModelError> {
        for x in [p, q] {
            if x < 3 || !arith::is_prime(x as u64) {
                return Err(ModelError::NotPrime(x));
            }
        }
        let gap = q - p;
        if gap <= 0 || (gap as u64).count_ones() != 1 || gap == 1 {
            return Err(ModelError::InvalidGap(gap));
        }
        let m = arith::v2(gap)?;
        if d < 1 {
            return Err(ModelError::InvalidD {
                d,
                reason: "D must be positive".into(),
            });
        }
        let primes = arith::factor_squarefree(d as u64).map_err(|e| ModelError::InvalidD {
            d,
            reason: e.to_string(),
        })?;
        if let Some(&bad) = primes
            .iter()
            .find(|&&l| l == 2 || l as i64 == p || l as i64 == q)
        {
            return Err(ModelError::InvalidD {
                d,
                reason: format!("shares the factor {bad} with 2pq"),
            });
        }
        let pq = p * q;
        let (mut split, mut inert): (Vec<i64>, Vec<i64>) = (Vec::new(), Vec::new());
        for l in primes {
            if arith::legendre(pq, l)? == 1 {
                split.push(l as i64);
            } else {
                inert.push(l as i64);
            }
        }
        let s = split.len();
        split.extend(inert);
        Ok(CurveParams {
            eps,
            p,
            q,
            m,
            d,
            factors: split,
            s,
        })
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    /// `D / D_i`.
    pub fn cofactor(&self, i: usize) -> i64 {
        self.d / self.factors[i]
    }

    /// Number of basis generators, `n + 4`.
    pub fn rank(&self) -> usize {
        self.n() + 4
    }

    /// Signed value of the `k`-th basis generator `(-1, 2, p, q, D_1, ..., D_n)`.
    pub fn generator(&self, k: usize) -> i64 {
        match k {
            0 => -1,
            1 => 2,
            2 => self.p,
            3 => self.q,
            _ => self.factors[k - 4],
        }
    }

    /// The places of `S = {inf, 2, p, q, D_1, ..., D_n}`.
    pub fn places(&self) -> Vec<Place> {
        let mut v = vec![Place::Infinity, Place::Two, Place::AtP, Place::AtQ];
        v.extend((0..self.n()).map(Place::AtD));
        v
    }

    /// Underlying prime of a finite place.
    pub fn prime_of(&self, place: Place) -> Option<i64> {
        match place {
            Place::Infinity => None,
            Place::Two => Some(2),
            Place::AtP => Some(self.p),
            Place::AtQ => Some(self.q),
            Place::AtD(i) => Some(self.factors[i]),
        }
    }

    /// All `2^(n+4)` classes, in increasing order of their bit pattern.
    pub fn enumerate_classes(&self) -> Vec<SquareClass> {
        let len = self.rank();
        (0..1u64 << len)
            .map(|bits| SquareClass { bits, len: len as u8 })
            .collect()
    }

    pub fn identity(&self) -> SquareClass {
        SquareClass::identity(self.rank())
    }

    /// Square-free signed representative of a class.
    pub fn value(&self, c: &SquareClass) -> i64 {
        debug_assert_eq!(c.len(), self.rank());
        (0..self.rank())
            .filter(|&k| c.has(k))
            .map(|k| self.generator(k))
            .product()
    }

    /// Class of a square-free integer supported on `{-1, 2, p, q, D_i}`.
    pub fn class_of(&self, value: i64) -> Result<SquareClass, ModelError> {
        if value == 0 {
            return Err(ModelError::NotInGroup(value));
        }
        let mut c = self.identity();
        let mut rest = value;
        if rest < 0 {
            c.set(0);
            rest = -rest;
        }
        for k in 1..self.rank() {
            let g = self.generator(k);
            if rest % g == 0 {
                rest /= g;
                c.set(k);
                if rest % g == 0 {
                    return Err(ModelError::NotInGroup(value));
                }
            }
        }
        if rest != 1 {
            return Err(ModelError::NotInGroup(value));
        }
        Ok(c)
    }

    /// Canonical text of a class: its signed square-free representative.
    pub fn class_text(&self, c: &SquareClass) -> String {
        self.value(c).to_string()
    }

    /// Coefficients of the torsor `d w^2 = a + b z^2 + c z^4` for the class `d`.
    pub fn torsor(&self, family: Family, d: &SquareClass) -> TorsorCoeffs {
        let dv = self.value(d) as i128;
        let (e, p, q, big_d) = (
            self.eps.value() as i128,
            self.p as i128,
            self.q as i128,
            self.d as i128,
        );
        let (b, c) = match family {
            Family::E => (-2 * e * (p + q) * big_d * dv, (1i128 << (2 * self.m)) * big_d * big_d),
            Family::EPrime => (e * (p + q) * big_d * dv, p * q * big_d * big_d),
        };
        TorsorCoeffs {
            family,
            d: *d,
            d_value: dv,
            a: dv * dv,
            b,
            c,
        }
    }

    /// Short key identifying an instance, used for ordering and dedup.
    pub fn key(&self) -> InstanceKey {
        InstanceKey {
            eps: self.eps.value(),
            p: self.p,
            q: self.q,
            d: self.d,
        }
    }
}

impl fmt::Display for CurveParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "eps={} p={} q={} m={} D={}",
            self.eps, self.p, self.q, self.m, self.d
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InstanceKey {
    pub eps: i64,
    pub p: i64,
    pub q: i64,
    pub d: i64,
}

impl fmt::Display for InstanceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}/{}/{}/{}", self.eps, self.p, self.q, self.d)
    }
}

/// Element of `Q(S,2)` as a bit vector over `(-1, 2, p, q, D_1, ..., D_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass {
    bits: u64,
    len: u8,
}

impl SquareClass {
    pub const MINUS_ONE: usize = 0;
    pub const TWO: usize = 1;
    pub const P: usize = 2;
    pub const Q: usize = 3;

    pub fn identity(len: usize) -> SquareClass {
        assert!(len <= 64);
        SquareClass { bits: 0, len: len as u8 }
    }

    pub fn from_bits(bits: u64, len: usize) -> SquareClass {
        assert!(len <= 64 && (len == 64 || bits >> len == 0));
        SquareClass { bits, len: len as u8 }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_identity(&self) -> bool {
        self.bits == 0
    }

    pub fn has(&self, k: usize) -> bool {
        self.bits >> k & 1 == 1
    }

    pub fn set(&mut self, k: usize) {
        assert!(k < self.len());
        self.bits |= 1 << k;
    }

    /// Index of the basis slot holding `D_i`.
    pub fn d_slot(i: usize) -> usize {
        4 + i
    }

    /// Group law (bitwise xor).
    pub fn mul(&self, other: &SquareClass) -> Result<SquareClass, ModelError> {
        if self.len != other.len {
            return Err(ModelError::BasisMismatch(self.len(), other.len()));
        }
        Ok(SquareClass {
            bits: self.bits ^ other.bits,
            len: self.len,
        })
    }
}

/// A place of `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Place {
    Infinity,
    Two,
    AtP,
    AtQ,
    AtD(usize),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => f.write_str("inf"),
            Place::Two => f.write_str("2"),
            Place::AtP => f.write_str("p"),
            Place::AtQ => f.write_str("q"),
            Place::AtD(i) => write!(f, "D{}", i + 1),
        }
    }
}

/// `d w^2 = a + b z^2 + c z^4` with the class representative substituted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorsorCoeffs {
    pub family: Family,
    pub d: SquareClass,
    pub d_value: i128,
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validate_examples() {
        let c = CurveParams::new(Sign::Plus, 3, 5, 7).unwrap();
        assert_eq!((c.m, c.n(), c.s), (1, 1, 1));
        let c = CurveParams::new(Sign::Plus, 3, 7, 1).unwrap();
        assert_eq!((c.m, c.n(), c.s), (2, 0, 0));
        assert!(matches!(
            CurveParams::new(Sign::Plus, 3, 5, 9),
            Err(ModelError::InvalidD { .. })
        ));
    }

    #[test]
    fn validate_errors() {
        assert_eq!(
            CurveParams::new(Sign::Plus, 3, 4, 7),
            Err(ModelError::NotPrime(4))
        );
        assert_eq!(
            CurveParams::new(Sign::Plus, 5, 3, 7),
            Err(ModelError::InvalidGap(-2))
        );
        assert_eq!(
            CurveParams::new(Sign::Plus, 5, 11, 7),
            Err(ModelError::InvalidGap(6))
        );
        for bad_d in [0, -7, 6, 15, 21, 49] {
            assert!(
                matches!(
                    CurveParams::new(Sign::Minus, 3, 7, bad_d),
                    Err(ModelError::InvalidD { .. })
                ),
                "D={bad_d}"
            );
        }
    }

    #[test]
    fn factor_order_by_split() {
        // pq = 15: (15/7) = 1, (15/11) = 1, (15/13) = -1, (15/17) = 1, (15/19) = -1
        let c = CurveParams::new(Sign::Plus, 3, 5, 19 * 13 * 11).unwrap();
        assert_eq!(c.factors, vec![11, 13, 19]);
        assert_eq!(c.s, 1);
        for (i, &f) in c.factors.iter().enumerate() {
            let sym = arith::jacobi(15, f as u64).unwrap();
            assert_eq!(sym == 1, i < c.s);
        }
    }

    #[test]
    fn enumerate_sizes() {
        let c = CurveParams::new(Sign::Plus, 3, 7, 1).unwrap();
        let all = c.enumerate_classes();
        assert_eq!(all.len(), 16);
        assert_eq!(all.iter().filter(|x| x.is_identity()).count(), 1);
        let c = CurveParams::new(Sign::Plus, 3, 5, 7 * 11).unwrap();
        assert_eq!(c.enumerate_classes().len(), 64);
    }

    #[test]
    fn class_mul_examples() {
        let c = CurveParams::new(Sign::Plus, 3, 5, 7).unwrap();
        let x = c.class_of(2 * 3).unwrap();
        let y = c.class_of(3 * 7).unwrap();
        assert_eq!(c.value(&x.mul(&y).unwrap()), 14);
        assert!(x.mul(&x).unwrap().is_identity());
        assert_eq!(c.identity().mul(&y).unwrap(), y);
        let other = SquareClass::identity(6);
        assert_eq!(x.mul(&other), Err(ModelError::BasisMismatch(5, 6)));
    }

    #[test]
    fn class_text_roundtrip() {
        let c = CurveParams::new(Sign::Minus, 3, 5, 7 * 11).unwrap();
        for x in c.enumerate_classes() {
            let v = c.value(&x);
            assert_eq!(c.class_of(v).unwrap(), x);
            assert_eq!(c.class_text(&x), v.to_string());
        }
        assert!(c.class_of(9).is_err());
        assert!(c.class_of(13).is_err());
    }

    #[test]
    fn group_closure_small() {
        for d in [1, 7, 7 * 11, 7 * 11 * 13] {
            let c = CurveParams::new(Sign::Plus, 3, 5, d).unwrap();
            let all = c.enumerate_classes();
            let set: std::collections::HashSet<_> = all.iter().copied().collect();
            for x in &all {
                assert!(x.mul(x).unwrap().is_identity());
                for y in &all {
                    let z = x.mul(y).unwrap();
                    assert!(set.contains(&z));
                    // product of representatives equals representative of product up to squares
                    let lhs = c.value(x) as i128 * c.value(y) as i128;
                    let rhs = c.value(&z) as i128;
                    assert_eq!(lhs % rhs, 0);
                    let sq = lhs / rhs;
                    assert!(sq > 0);
                    let r = (sq as f64).sqrt().round() as i128;
                    assert_eq!(r * r, sq);
                }
            }
        }
    }

    #[test]
    fn representatives_are_squarefree() {
        let c = CurveParams::new(Sign::Plus, 5, 7, 3 * 11).unwrap();
        for x in c.enumerate_classes() {
            let v = c.value(&x).unsigned_abs();
            assert!(arith::factor_squarefree(v).is_ok());
            for l in arith::factor_squarefree(v).unwrap() {
                assert!([2u64, 5, 7, 3, 11].contains(&l));
            }
        }
    }

    // independent re-derivation of the torsor coefficients from the displayed formulas
    fn reference_coeffs(eps: i64, p: i64, q: i64, m: u32, dd: i64, d: i64, fam: Family) -> (i128, i128, i128) {
        let (e, p, q, dd, d) = (eps as i128, p as i128, q as i128, dd as i128, d as i128);
        let four_m = 4i128.pow(m);
        match fam {
            Family::E => (d * d, -2 * e * (p + q) * dd * d, four_m * dd * dd),
            Family::EPrime => (d * d, e * (p + q) * dd * d, p * q * dd * dd),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn torsor_coefficients_match_formulas(
            pi in 0usize..6, di in 0usize..5, eps in prop::bool::ANY, bits in 0u64..256, fam in prop::bool::ANY
        ) {
            let pairs = [(3, 5), (3, 7), (5, 7), (3, 11), (5, 13), (7, 23)];
            let ds = [1, 19, 19 * 29, 31, 17 * 37];
            let (p, q) = pairs[pi];
            let eps = if eps { Sign::Plus } else { Sign::Minus };
            let c = CurveParams::new(eps, p, q, ds[di]).unwrap();
            let x = SquareClass::from_bits(bits % (1 << c.rank()), c.rank());
            let fam = if fam { Family::E } else { Family::EPrime };
            let t = c.torsor(fam, &x);
            let (a, b, cc) = reference_coeffs(eps.value(), p, q, c.m, c.d, c.value(&x), fam);
            prop_assert_eq!((t.a, t.b, t.c), (a, b, cc));
        }
    }
}

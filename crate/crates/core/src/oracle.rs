//! Table-free local solvability of `d w^2 = a + b z^2 + c z^4`.
//!
//! Multiplying through by `d` turns the torsor into `y^2 = g(z)` with
//! `g = d a + d b z^2 + d c z^4` and `y = d w`. A `Q_l`-point exists iff some
//! `z` in `P^1(Q_l)` makes `g(z)` a square (zero included). The projective line
//! is covered by the disc `z in Z_l` and the disc `u in l Z_l` of the chart at
//! infinity, where `z = 1/u` and `g` is replaced by its reversal
//! `d c + d b u^2 + d a u^4`.
//!
//! Each disc `x0 + l^n Z_l` is refined one residue at a time. A residue either
//! settles the question (a unit square, or a value whose valuation is odd or
//! whose unit part is a non-residue everywhere on it), or is split further. A
//! residue where `v(g(x)) > 2 v(g'(x))` carries an exact root of `g` by
//! Hensel's lemma, hence the point `y = 0`. The refinement depth is capped;
//! reaching the cap is reported as [`OracleError::DepthExceeded`], never as a
//! verdict.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{CurveParams, Family, Place, SquareClass, TorsorCoeffs};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("refinement depth {depth} insufficient at l = {prime}")]
    DepthExceeded { prime: u64, depth: u32 },
    #[error("degenerate model: {0}")]
    Degenerate(&'static str),
}

/// How deep the disc refinement may go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Depth {
    /// `v_l(16 c (b^2 - 4ac) a) + 6`.
    #[default]
    Auto,
    Fixed(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuarticModel {
    pub d: BigInt,
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl QuarticModel {
    pub fn new(d: i128, a: i128, b: i128, c: i128) -> Result<QuarticModel, OracleError> {
        if d == 0 {
            return Err(OracleError::Degenerate("d = 0"));
        }
        if c == 0 {
            return Err(OracleError::Degenerate("c = 0"));
        }
        Ok(QuarticModel {
            d: d.into(),
            a: a.into(),
            b: b.into(),
            c: c.into(),
        })
    }

    pub fn from_torsor(t: &TorsorCoeffs) -> QuarticModel {
        QuarticModel::new(t.d_value, t.a, t.b, t.c).expect("torsor coefficients are nonzero")
    }

    /// `b^2 - 4ac`.
    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - BigInt::from(4) * &self.a * &self.c
    }

    pub fn auto_depth(&self, l: u64) -> u32 {
        let mut x = BigInt::from(16) * &self.c * self.discriminant() * &self.a;
        if x.is_zero() {
            x = BigInt::from(16) * &self.c * &self.d;
        }
        valuation(&x, l) + 6
    }

    fn depth(&self, l: u64, depth: Depth) -> u32 {
        match depth {
            Depth::Auto => self.auto_depth(l),
            Depth::Fixed(k) => k,
        }
    }
}

/// Real points: some `t = z^2 >= 0` with `d (a + b t + c t^2) >= 0`, or the
/// points at infinity when `d c > 0`.
pub fn real_solvable(model: &QuarticModel) -> bool {
    let sd = model.d.signum();
    if (&sd * model.c.signum()).is_positive() {
        return true;
    }
    // flip so that the question is whether a + b t + c t^2 reaches >= 0 on t >= 0
    let (a, b, c) = (&sd * &model.a, &sd * &model.b, &sd * &model.c);
    // here c < 0: the quadratic opens downward, maximum on t >= 0 is at the vertex or t = 0
    if !a.is_negative() {
        return true;
    }
    if !b.is_positive() {
        return false;
    }
    // vertex t* = -b / 2c > 0, value a - b^2/4c >= 0  <=>  4ac - b^2 <= 0 (c < 0)
    BigInt::from(4) * &a * &c - &b * &b <= BigInt::zero()
}

/// `Q_l`-points of the model.
pub fn padic_solvable(model: &QuarticModel, l: u64, depth: Depth) -> Result<bool, OracleError> {
    let max = model.depth(l, depth);
    let g = [
        &model.d * &model.a,
        BigInt::zero(),
        &model.d * &model.b,
        BigInt::zero(),
        &model.d * &model.c,
    ];
    let mut reversed = g.clone();
    reversed.reverse();
    let search = Search { l, max };
    let mut exceeded = false;
    for (poly, n) in [(&g, 0u32), (&reversed, 1u32)] {
        match search.disc(poly, &BigInt::zero(), n) {
            Ok(true) => return Ok(true),
            Ok(false) => {}
            Err(OracleError::DepthExceeded { .. }) => exceeded = true,
            Err(e) => return Err(e),
        }
    }
    if exceeded {
        Err(OracleError::DepthExceeded { prime: l, depth: max })
    } else {
        Ok(false)
    }
}

/// Oracle verdict for the torsor of `d` at one place of `S`.
pub fn solvable_at(
    params: &CurveParams,
    family: Family,
    d: &SquareClass,
    place: Place,
    depth: Depth,
) -> Result<bool, OracleError> {
    let model = QuarticModel::from_torsor(&params.torsor(family, d));
    match params.prime_of(place) {
        None => Ok(real_solvable(&model)),
        Some(l) => padic_solvable(&model, l as u64, depth),
    }
}

struct Search {
    l: u64,
    max: u32,
}

impl Search {
    /// Is `g(x)` a square for some `x` in `x0 + l^n Z_l`?
    fn disc(&self, g: &[BigInt; 5], x0: &BigInt, n: u32) -> Result<bool, OracleError> {
        if n > self.max {
            return Err(OracleError::DepthExceeded {
                prime: self.l,
                depth: self.max,
            });
        }
        let l = self.l;
        let lb = BigInt::from(l);
        let scale = lb.pow(n);
        // h(t) = g(x0 + l^n t)
        let mut h = taylor_shift(g, x0);
        let mut s = BigInt::one();
        for coeff in h.iter_mut() {
            *coeff *= &s;
            s *= &scale;
        }
        let k = h
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| valuation(c, l))
            .min()
            .ok_or(OracleError::Degenerate("zero polynomial"))?;
        let strip = lb.pow(2 * (k / 2));
        for coeff in h.iter_mut() {
            *coeff /= &strip;
        }

        let mut roots = Vec::new();
        if k % 2 == 1 {
            let h1: Vec<BigInt> = h.iter().map(|c| c / &lb).collect();
            let red = reduce(&h1, l);
            roots.extend((0..l).filter(|&t| eval_mod(&red, t, l) == 0));
        } else if l == 2 {
            let red = reduce(&h, 8);
            if (0..8).any(|t| eval_mod(&red, t, 8) == 1) {
                return Ok(true);
            }
            roots.extend((0..2).filter(|&t| eval_mod(&red, t, 8).is_multiple_of(2)));
        } else {
            let red = reduce(&h, l);
            for t in 0..l {
                let r = eval_mod(&red, t, l);
                if r == 0 {
                    roots.push(t);
                } else if is_residue(r, l) {
                    return Ok(true);
                }
            }
        }

        let mut exceeded = false;
        for t in roots {
            let x = x0 + &scale * BigInt::from(t);
            if has_root_near(g, &x, l) {
                return Ok(true);
            }
            match self.disc(g, &x, n + 1) {
                Ok(true) => return Ok(true),
                Ok(false) => {}
                Err(OracleError::DepthExceeded { .. }) => exceeded = true,
                Err(e) => return Err(e),
            }
        }
        if exceeded {
            Err(OracleError::DepthExceeded {
                prime: l,
                depth: self.max,
            })
        } else {
            Ok(false)
        }
    }
}

/// `v(g(x)) > 2 v(g'(x))`, or `g(x) = 0`.
fn has_root_near(g: &[BigInt; 5], x: &BigInt, l: u64) -> bool {
    let gx = eval(g, x);
    if gx.is_zero() {
        return true;
    }
    let dg: Vec<BigInt> = (1..5).map(|i| &g[i] * BigInt::from(i)).collect();
    let dgx = eval(&dg, x);
    !dgx.is_zero() && valuation(&gx, l) > 2 * valuation(&dgx, l)
}

fn eval(poly: &[BigInt], x: &BigInt) -> BigInt {
    poly.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// Coefficients of `g(x0 + y)` in `y`.
fn taylor_shift(g: &[BigInt; 5], x0: &BigInt) -> [BigInt; 5] {
    let mut c = g.clone();
    if x0.is_zero() {
        return c;
    }
    for i in 0..5 {
        for j in (i..4).rev() {
            let t = &c[j + 1] * x0;
            c[j] += t;
        }
    }
    c
}

fn reduce(poly: &[BigInt], modulus: u64) -> Vec<u64> {
    let m = BigInt::from(modulus);
    poly.iter()
        .map(|c| c.mod_floor(&m).to_u64().expect("reduced below modulus"))
        .collect()
}

fn eval_mod(red: &[u64], t: u64, modulus: u64) -> u64 {
    red.iter()
        .rev()
        .fold(0u64, |acc, &c| (acc * t + c) % modulus)
}

fn is_residue(r: u64, l: u64) -> bool {
    crate::arith::jacobi(r as i64, l).map(|s| s == 1).unwrap_or(false)
}

/// `l`-adic valuation of a nonzero integer.
pub fn valuation(x: &BigInt, l: u64) -> u32 {
    assert!(!x.is_zero(), "valuation of zero");
    let lb = BigInt::from(l);
    let mut x = x.clone();
    let mut k = 0;
    loop {
        let (q, r) = x.div_rem(&lb);
        if !r.is_zero() {
            return k;
        }
        x = q;
        k += 1;
    }
}

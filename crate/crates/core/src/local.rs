//! Closed-form local solvability tables for the torsors `C_d` and `C'_d`.
//!
//! Each verdict carries the identifier of the clause that produced it. Clause
//! identifiers have the shape `<family><sign>.<clause>`, e.g. `E+.B1.m3` for
//! the 2-adic rule of `C_d` (e = +1, even `d`, `m = 3`) or `E'-.B4` for the rule
//! of `C'_d` (e = -1) at primes dividing both `D` and `d`.
//!
//! Classes that a global rule removes from the Selmer group get a `false`
//! verdict at the place where the rule bites and [`LocalError::Excluded`]
//! elsewhere. Classes outside every clause hypothesis raise
//! [`LocalError::UnsupportedClass`].

use std::fmt;

use thiserror::Error;

use crate::arith;
use crate::model::{CurveParams, Family, Place, Sign, SquareClass};

pub type Rule = &'static str;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalError {
    #[error("class {d} is excluded by {rule}; no local claim at {place}")]
    Excluded { d: i64, place: Place, rule: Rule },
    #[error("class {d} is not covered by any clause at {place}")]
    UnsupportedClass { d: i64, place: Place },
    #[error("{rule}: {num}/{den} is not an integer")]
    Inexact { rule: Rule, num: i64, den: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalVerdict {
    pub place: Place,
    pub solvable: bool,
    pub rule: Rule,
}

impl fmt::Display for LocalVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {} by {}", self.solvable, self.place, self.rule)
    }
}

/// Every clause identifier the tables can emit.
pub const CLAUSES: &[Rule] = &[
    "E+.A1", "E+.A2", "E+.A3", "E+.A.real",
    "E+.B1.m1", "E+.B1.m2", "E+.B1.m3", "E+.B1.m4", "E+.B1.m5", "E+.B2", "E+.B3",
    "E+.C1.m1", "E+.C1.m2", "E+.C1.m3", "E+.C2", "E+.C3",
    "E'+.A1.real", "E'+.A1.even",
    "E'+.B1.m1", "E'+.B1.m2", "E'+.B1.m3", "E'+.B1.m4", "E'+.B1.m5", "E'+.B2", "E'+.B3", "E'+.B4",
    "E-.A1", "E-.A2", "E-.A.real",
    "E-.B1.m1", "E-.B1.m2", "E-.B1.m3", "E-.B1.m4", "E-.B1.m5", "E-.B2", "E-.B3",
    "E-.C1.m1", "E-.C1.m2", "E-.C1.m3", "E-.C2", "E-.C3",
    "E'-.A1.neg", "E'-.A1.real", "E'-.A1.even",
    "E'-.B1.m1", "E'-.B1.m2", "E'-.B1.m3", "E'-.B1.m4", "E'-.B1.m5", "E'-.B2", "E'-.B3", "E'-.B4",
];

/// A deliberate corruption of one congruence: the `index`-th congruence
/// evaluated under `clause` has its target residue moved by half the modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mutation {
    pub clause: Rule,
    pub index: usize,
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.clause, self.index)
    }
}

impl Mutation {
    /// Parses `CLAUSE#INDEX` (index defaults to 0).
    pub fn parse(s: &str) -> Option<Mutation> {
        let (name, index) = match s.split_once('#') {
            Some((n, i)) => (n, i.parse().ok()?),
            None => (s, 0),
        };
        let clause = CLAUSES.iter().copied().find(|c| *c == name)?;
        Some(Mutation { clause, index })
    }
}

/// The congruence tables, optionally with one mutated congruence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tables {
    pub mutation: Option<Mutation>,
}

/// Facts about a class used by every table.
struct ClassView {
    d: i64,
    abs: i64,
    even: bool,
    p_div: bool,
    q_div: bool,
}

impl ClassView {
    fn new(params: &CurveParams, c: &SquareClass) -> ClassView {
        let d = params.value(c);
        ClassView {
            d,
            abs: d.abs(),
            even: c.has(SquareClass::TWO),
            p_div: c.has(SquareClass::P),
            q_div: c.has(SquareClass::Q),
        }
    }
}

fn leg(a: i128, l: i64) -> i8 {
    let r = a.rem_euclid(l as i128) as i64;
    arith::legendre(r, l as u64).expect("places of S are odd primes")
}

fn exact(rule: Rule, num: i128, den: i64) -> Result<i128, LocalError> {
    if num % den as i128 != 0 {
        return Err(LocalError::Inexact {
            rule,
            num: num as i64,
            den,
        });
    }
    Ok(num / den as i128)
}

fn ok(place: Place, solvable: bool, rule: Rule) -> Result<LocalVerdict, LocalError> {
    Ok(LocalVerdict {
        place,
        solvable,
        rule,
    })
}

fn m_case(m: u32, cap: u32) -> usize {
    m.min(cap) as usize
}

impl Tables {
    pub fn mutated(m: Mutation) -> Tables {
        Tables { mutation: Some(m) }
    }

    /// `x = r (mod modulus)`, honouring the mutation.
    fn cong(&self, clause: Rule, index: usize, x: i128, r: i128, modulus: i128) -> bool {
        let target = match self.mutation {
            Some(mu) if mu.clause == clause && mu.index == index => (r + modulus / 2) % modulus,
            _ => r,
        };
        x.rem_euclid(modulus) == target.rem_euclid(modulus)
    }

    /// Dispatches to the table for the instance's sign and the requested family.
    pub fn verdict(
        &self,
        params: &CurveParams,
        family: Family,
        d: &SquareClass,
        place: Place,
    ) -> Result<LocalVerdict, LocalError> {
        match (family, params.eps) {
            (Family::E, Sign::Plus) => self.cd_plus(params, d, place),
            (Family::EPrime, Sign::Plus) => self.cdprime_plus(params, d, place),
            (Family::E, Sign::Minus) => self.cd_minus(params, d, place),
            (Family::EPrime, Sign::Minus) => self.cdprime_minus(params, d, place),
        }
    }

    /// `C_d` with e = +1.
    pub fn cd_plus(
        &self,
        params: &CurveParams,
        c: &SquareClass,
        place: Place,
    ) -> Result<LocalVerdict, LocalError> {
        let v = ClassView::new(params, c);
        let kills = [
            (v.d < 0, Place::Infinity, "E+.A1"),
            (v.p_div, Place::AtP, "E+.A2"),
            (v.q_div, Place::AtQ, "E+.A3"),
        ];
        if let Some(r) = kill_verdict(&v, place, &kills) {
            return r;
        }
        if place == Place::Infinity {
            return ok(place, true, "E+.A.real");
        }
        let (p, q, big_d) = (params.p as i128, params.q as i128, params.d as i128);
        let d = v.d as i128;
        if v.even {
            match place {
                Place::Two => {
                    let (rule, sol) = match m_case(params.m, 5) {
                        1 => {
                            let rule = "E+.B1.m1";
                            let x = d / 2 - 2 * big_d * (p + 1) + exact(rule, 2 * big_d * big_d, v.d)?;
                            (rule, self.cong(rule, 0, x, 2, 16))
                        }
                        2 => ("E+.B1.m2", false),
                        3 => {
                            let rule = "E+.B1.m3";
                            let x = d - big_d * (p + 4) + exact(rule, 4 * big_d * big_d, v.d)?;
                            (rule, self.cong(rule, 0, x, 1, 8))
                        }
                        4 => {
                            let rule = "E+.B1.m4";
                            (rule, self.cong(rule, 0, d - big_d * p, 1, 8))
                        }
                        _ => {
                            let rule = "E+.B1.m5";
                            let sol = self.cong(rule, 0, big_d * p, 7, 8)
                                || self.cong(rule, 1, d - big_d * p, 1, 8);
                            (rule, sol)
                        }
                    };
                    ok(place, sol, rule)
                }
                _ => {
                    let l = params.prime_of(place).unwrap();
                    if v.abs % l != 0 {
                        ok(place, leg(d, l) == 1, "E+.B2")
                    } else {
                        let t = exact("E+.B3", big_d * d, l * l)?;
                        ok(place, leg(p * t, l) == 1 && leg(q * t, l) == 1, "E+.B3")
                    }
                }
            }
        } else {
            match place {
                Place::Two => {
                    let (rule, sol) = match m_case(params.m, 3) {
                        1 => ("E+.C1.m1", self.cong("E+.C1.m1", 0, d, 1, 4)),
                        2 => {
                            let rule = "E+.C1.m2";
                            let sol = self.cong(rule, 0, d, 1, 4)
                                || self.cong(rule, 1, 2 * d - big_d * (p + 2), 1, 8);
                            (rule, sol)
                        }
                        _ => {
                            let rule = "E+.C1.m3";
                            let sol =
                                self.cong(rule, 0, d, 1, 4) || self.cong(rule, 1, d - big_d * p, 0, 4);
                            (rule, sol)
                        }
                    };
                    ok(place, sol, rule)
                }
                _ => {
                    let l = params.prime_of(place).unwrap();
                    if v.abs % l != 0 {
                        ok(place, leg(d, l) == 1, "E+.C2")
                    } else {
                        let t = exact("E+.C3", big_d * d, l * l)?;
                        ok(place, leg(p * t, l) == 1 && leg(q * t, l) == 1, "E+.C3")
                    }
                }
            }
        }
    }

    /// `C'_d` with e = +1.
    pub fn cdprime_plus(
        &self,
        params: &CurveParams,
        c: &SquareClass,
        place: Place,
    ) -> Result<LocalVerdict, LocalError> {
        let v = ClassView::new(params, c);
        if place == Place::Infinity {
            return ok(place, true, "E'+.A1.real");
        }
        if let Some(r) = kill_verdict(&v, place, &[(v.even, Place::Two, "E'+.A1.even")]) {
            return r;
        }
        if v.q_div {
            return Err(LocalError::UnsupportedClass { d: v.d, place });
        }
        self.cdprime_b(params, &v, place, 1)
    }

    /// `C_d` with e = -1.
    pub fn cd_minus(
        &self,
        params: &CurveParams,
        c: &SquareClass,
        place: Place,
    ) -> Result<LocalVerdict, LocalError> {
        let v = ClassView::new(params, c);
        if place == Place::Infinity {
            return ok(place, true, "E-.A.real");
        }
        let kills = [
            (v.p_div, Place::AtP, "E-.A1"),
            (v.q_div, Place::AtQ, "E-.A2"),
        ];
        if let Some(r) = kill_verdict(&v, place, &kills) {
            return r;
        }
        let (p, q, big_d) = (params.p as i128, params.q as i128, params.d as i128);
        let d = v.d as i128;
        let twisted = |l: i64, rule: Rule| -> Result<bool, LocalError> {
            let t = exact(rule, big_d * d, l * l)?;
            Ok(leg(-p * t, l) == 1 && leg(-q * t, l) == 1)
        };
        if v.even {
            match place {
                Place::Two => {
                    let (rule, sol) = match m_case(params.m, 5) {
                        1 => {
                            let rule = "E-.B1.m1";
                            let x = d / 2 + 2 * big_d * (p + 1) + exact(rule, 2 * big_d * big_d, v.d)?;
                            (rule, self.cong(rule, 0, x, 2, 16))
                        }
                        2 => ("E-.B1.m2", false),
                        3 => {
                            let rule = "E-.B1.m3";
                            let x = d + big_d * (p + 4) + exact(rule, 4 * big_d * big_d, v.d)?;
                            (rule, self.cong(rule, 0, x, 1, 8))
                        }
                        4 => {
                            let rule = "E-.B1.m4";
                            (rule, self.cong(rule, 0, d + big_d * p, 1, 8))
                        }
                        _ => {
                            let rule = "E-.B1.m5";
                            let sol = self.cong(rule, 0, big_d * p, 1, 8)
                                || self.cong(rule, 1, d + big_d * p, 1, 8);
                            (rule, sol)
                        }
                    };
                    ok(place, sol, rule)
                }
                _ => {
                    let l = params.prime_of(place).unwrap();
                    if v.abs % l != 0 {
                        ok(place, leg(d, l) == 1, "E-.B2")
                    } else {
                        ok(place, twisted(l, "E-.B3")?, "E-.B3")
                    }
                }
            }
        } else {
            match place {
                Place::Two => {
                    let (rule, sol) = match m_case(params.m, 3) {
                        1 => ("E-.C1.m1", self.cong("E-.C1.m1", 0, d, 1, 4)),
                        2 => {
                            let rule = "E-.C1.m2";
                            let sol = self.cong(rule, 0, d, 1, 4)
                                || self.cong(rule, 1, 2 * d + big_d * (p + 2), 1, 8);
                            (rule, sol)
                        }
                        _ => {
                            let rule = "E-.C1.m3";
                            let sol =
                                self.cong(rule, 0, d, 1, 4) || self.cong(rule, 1, d + big_d * p, 0, 4);
                            (rule, sol)
                        }
                    };
                    ok(place, sol, rule)
                }
                _ => {
                    let l = params.prime_of(place).unwrap();
                    if v.abs % l != 0 {
                        ok(place, leg(d, l) == 1, "E-.C2")
                    } else {
                        ok(place, twisted(l, "E-.C3")?, "E-.C3")
                    }
                }
            }
        }
    }

    /// `C'_d` with e = -1.
    pub fn cdprime_minus(
        &self,
        params: &CurveParams,
        c: &SquareClass,
        place: Place,
    ) -> Result<LocalVerdict, LocalError> {
        let v = ClassView::new(params, c);
        if place == Place::Infinity {
            return if v.d > 0 {
                ok(place, true, "E'-.A1.real")
            } else {
                ok(place, false, "E'-.A1.neg")
            };
        }
        let kills = [
            (v.d < 0, Place::Infinity, "E'-.A1.neg"),
            (v.even, Place::Two, "E'-.A1.even"),
        ];
        if let Some(r) = kill_verdict(&v, place, &kills) {
            return r;
        }
        if v.q_div {
            return Err(LocalError::UnsupportedClass { d: v.d, place });
        }
        self.cdprime_b(params, &v, place, -1)
    }

    /// Shared body of the `C'_d` tables for odd `d | pD`; `e` is the sign.
    fn cdprime_b(
        &self,
        params: &CurveParams,
        v: &ClassView,
        place: Place,
        e: i128,
    ) -> Result<LocalVerdict, LocalError> {
        let plus = e == 1;
        let (p, q, big_d) = (params.p as i128, params.q as i128, params.d as i128);
        let d = v.d as i128;
        match place {
            Place::Infinity => unreachable!("handled by the caller"),
            Place::AtP | Place::AtQ => ok(place, true, if plus { "E'+.B2" } else { "E'-.B2" }),
            Place::Two => {
                // d + e pD, the quantity every 2-adic rule is phrased in
                let shifted = d + e * p * big_d;
                let m = m_case(params.m, 5);
                let rule: Rule = match (plus, m) {
                    (true, 1) => "E'+.B1.m1",
                    (true, 2) => "E'+.B1.m2",
                    (true, 3) => "E'+.B1.m3",
                    (true, 4) => "E'+.B1.m4",
                    (true, _) => "E'+.B1.m5",
                    (false, 1) => "E'-.B1.m1",
                    (false, 2) => "E'-.B1.m2",
                    (false, 3) => "E'-.B1.m3",
                    (false, 4) => "E'-.B1.m4",
                    (false, _) => "E'-.B1.m5",
                };
                let co = exact(rule, p * q * big_d * big_d, v.d)?;
                let a = self.cong(rule, 0, d, 1, 8);
                let sol = match m {
                    1 => {
                        a || self.cong(rule, 1, shifted * (d + e * q * big_d), 0, 16)
                            || self.cong(rule, 2, co, 1, 8)
                    }
                    2 => {
                        let target = if plus { 1 } else { 7 };
                        a || self.cong(rule, 1, co, 1, 8)
                            || self.cong(rule, 2, shifted, 0, 4)
                            || (self.cong(rule, 3, d, 3, 4)
                                && self.cong(rule, 4, (p + 2) * big_d, target, 8))
                    }
                    3 => {
                        a || self.cong(rule, 1, co, 1, 8)
                            || self.cong(rule, 2, shifted, 0, 8)
                            || (self.cong(rule, 3, d, 3, 4) && self.cong(rule, 4, shifted, 4, 8))
                            || (self.cong(rule, 5, d, 5, 8) && self.cong(rule, 6, shifted, 2, 4))
                    }
                    4 => {
                        a || self.cong(rule, 1, co, 1, 8)
                            || self.cong(rule, 2, shifted, 0, 8)
                            || (self.cong(rule, 3, d, 1, 8) && self.cong(rule, 4, shifted, 2, 4))
                            || (self.cong(rule, 5, d, 5, 8) && self.cong(rule, 6, shifted, 4, 8))
                    }
                    _ => a || self.cong(rule, 1, co, 1, 8) || self.cong(rule, 2, shifted, 0, 8),
                };
                ok(place, sol, rule)
            }
            Place::AtD(_) => {
                let l = params.prime_of(place).unwrap();
                if v.abs % l != 0 {
                    let rule = if plus { "E'+.B3" } else { "E'-.B3" };
                    ok(place, leg(d, l) == 1 || leg(p * q * d, l) == 1, rule)
                } else {
                    let rule = if plus { "E'+.B4" } else { "E'-.B4" };
                    let t = exact(rule, big_d * d, l * l)?;
                    // e = +1 twists by -1, e = -1 does not
                    let sol = leg(-e * p * t, l) == 1 || leg(-e * q * t, l) == 1;
                    ok(place, sol, rule)
                }
            }
        }
    }
}

/// Verdict for a globally excluded class, if any kill rule applies.
fn kill_verdict(
    v: &ClassView,
    place: Place,
    kills: &[(bool, Place, Rule)],
) -> Option<Result<LocalVerdict, LocalError>> {
    let mut first = None;
    for &(applies, at, rule) in kills {
        if !applies {
            continue;
        }
        if at == place {
            return Some(ok(place, false, rule));
        }
        first.get_or_insert(rule);
    }
    first.map(|rule| {
        Err(LocalError::Excluded {
            d: v.d,
            place,
            rule,
        })
    })
}

/// Table verdict for `C_d`, e = +1.
pub fn cd_solvable_plus(params: &CurveParams, d: &SquareClass, place: Place) -> Result<LocalVerdict, LocalError> {
    Tables::default().cd_plus(params, d, place)
}

/// Table verdict for `C'_d`, e = +1.
pub fn cdprime_solvable_plus(params: &CurveParams, d: &SquareClass, place: Place) -> Result<LocalVerdict, LocalError> {
    Tables::default().cdprime_plus(params, d, place)
}

/// Table verdict for `C_d`, e = -1.
pub fn cd_solvable_minus(params: &CurveParams, d: &SquareClass, place: Place) -> Result<LocalVerdict, LocalError> {
    Tables::default().cd_minus(params, d, place)
}

/// Table verdict for `C'_d`, e = -1.
pub fn cdprime_solvable_minus(params: &CurveParams, d: &SquareClass, place: Place) -> Result<LocalVerdict, LocalError> {
    Tables::default().cdprime_minus(params, d, place)
}

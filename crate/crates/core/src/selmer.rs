//! Selmer sets by descent and by partition graphs, the closed-form counts and
//! the lower bounds.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::arith;
use crate::graphs::{GraphError, PartitionGraph, Vertex};
use crate::local::{LocalError, Tables};
use crate::model::{CurveParams, Family, Place, Sign, SquareClass};
use crate::oracle::{self, Depth, OracleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelmerError {
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("class set of size {0} is not a subgroup")]
    NotSubgroup(usize),
    #[error("bound {0} needs m >= 2")]
    OutOfScope(BoundKind),
    #[error("bound {0} needs the other sign")]
    WrongSign(BoundKind),
}

/// A subgroup of `Q(S,2)` with its classes in increasing bit order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelmerSet {
    pub family: Family,
    pub eps: Sign,
    pub classes: Vec<SquareClass>,
    pub dim2: u32,
}

impl SelmerSet {
    /// Checks the subgroup property; the input may be unordered.
    pub fn new(
        family: Family,
        eps: Sign,
        classes: impl IntoIterator<Item = SquareClass>,
    ) -> Result<SelmerSet, SelmerError> {
        let set: BTreeSet<SquareClass> = classes.into_iter().collect();
        let size = set.len();
        let closed = size.is_power_of_two()
            && set.iter().any(|c| c.is_identity())
            && set
                .iter()
                .all(|x| set.iter().all(|y| set.contains(&x.mul(y).expect("same basis"))));
        if !closed {
            return Err(SelmerError::NotSubgroup(size));
        }
        Ok(SelmerSet {
            family,
            eps,
            classes: set.into_iter().collect(),
            dim2: size.trailing_zeros(),
        })
    }

    pub fn contains(&self, c: &SquareClass) -> bool {
        self.classes.binary_search(c).is_ok()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn texts(&self, params: &CurveParams) -> Vec<String> {
        self.classes.iter().map(|c| params.class_text(c)).collect()
    }
}

/// Oracle verdicts for every family, class and place of one instance.
#[derive(Debug, Clone)]
pub struct OracleTable {
    classes: usize,
    places: usize,
    verdicts: Vec<Result<bool, OracleError>>,
}

const FAMILIES: [Family; 2] = [Family::E, Family::EPrime];

impl OracleTable {
    pub fn compute(params: &CurveParams, depth: Depth) -> OracleTable {
        let classes = params.enumerate_classes();
        let places = params.places();
        let mut verdicts = Vec::with_capacity(2 * classes.len() * places.len());
        for family in FAMILIES {
            for c in &classes {
                for &pl in &places {
                    verdicts.push(oracle::solvable_at(params, family, c, pl, depth));
                }
            }
        }
        OracleTable {
            classes: classes.len(),
            places: places.len(),
            verdicts,
        }
    }

    fn slot(&self, family: Family, c: &SquareClass, place: Place) -> usize {
        let f = match family {
            Family::E => 0,
            Family::EPrime => 1,
        };
        let pl = match place {
            Place::Infinity => 0,
            Place::Two => 1,
            Place::AtP => 2,
            Place::AtQ => 3,
            Place::AtD(i) => 4 + i,
        };
        (f * self.classes + c.bits() as usize) * self.places + pl
    }

    pub fn get(&self, family: Family, c: &SquareClass, place: Place) -> Result<bool, OracleError> {
        self.verdicts[self.slot(family, c, place)].clone()
    }

    pub fn depth_errors(&self) -> impl Iterator<Item = &OracleError> {
        self.verdicts.iter().filter_map(|v| v.as_ref().err())
    }
}

/// Where descent takes verdicts the tables do not cover.
#[derive(Debug, Clone, Copy)]
pub enum Fallback<'a> {
    Disabled,
    Oracle(Depth),
    Cached(&'a OracleTable),
}

impl Fallback<'_> {
    fn verdict(
        &self,
        params: &CurveParams,
        family: Family,
        c: &SquareClass,
        place: Place,
        err: LocalError,
    ) -> Result<bool, SelmerError> {
        match self {
            Fallback::Disabled => Err(err.into()),
            Fallback::Oracle(depth) => Ok(oracle::solvable_at(params, family, c, place, *depth)?),
            Fallback::Cached(t) => Ok(t.get(family, c, place)?),
        }
    }
}

/// Is `c` in the Selmer set according to the tables?
pub fn in_selmer_by_tables(
    params: &CurveParams,
    family: Family,
    c: &SquareClass,
    tables: &Tables,
    fallback: Fallback<'_>,
) -> Result<bool, SelmerError> {
    for place in params.places() {
        let ok = match tables.verdict(params, family, c, place) {
            Ok(v) => v.solvable,
            Err(LocalError::Excluded { .. }) => false,
            Err(e @ LocalError::UnsupportedClass { .. }) => {
                fallback.verdict(params, family, c, place, e)?
            }
            Err(e) => return Err(e.into()),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The classes whose torsor is solvable at every place of `S`.
pub fn selmer_by_descent(
    params: &CurveParams,
    family: Family,
    tables: &Tables,
    fallback: Fallback<'_>,
) -> Result<SelmerSet, SelmerError> {
    let mut out = Vec::new();
    for c in params.enumerate_classes() {
        if in_selmer_by_tables(params, family, &c, tables, fallback)? {
            out.push(c);
        }
    }
    SelmerSet::new(family, params.eps, out)
}

/// Descent with the oracle deciding every place.
pub fn selmer_by_oracle(params: &CurveParams, family: Family, depth: Depth) -> Result<SelmerSet, SelmerError> {
    let mut out = Vec::new();
    'classes: for c in params.enumerate_classes() {
        for place in params.places() {
            if !oracle::solvable_at(params, family, &c, place, depth)? {
                continue 'classes;
            }
        }
        out.push(c);
    }
    SelmerSet::new(family, params.eps, out)
}

/// Vertices pinned to `V2` for the counted partitions.
fn pinned(params: &CurveParams, graph: &PartitionGraph, family: Family) -> Vec<Vertex> {
    let mut out = Vec::new();
    let mut add = |v: Vertex| {
        if graph.index_of(v).is_some() {
            out.push(v);
        }
    };
    match family {
        Family::E => {
            if params.eps == Sign::Plus {
                add(Vertex::MinusOne);
            }
            add(Vertex::P);
            add(Vertex::Q);
            for k in params.s..params.n() {
                add(Vertex::D(k));
            }
        }
        Family::EPrime => {
            if params.eps == Sign::Minus {
                add(Vertex::MinusOne);
            }
            add(Vertex::Two);
            add(Vertex::MinusTwo);
        }
    }
    out
}

/// Partition counts under the counted constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PartitionCounts {
    pub even: u64,
    /// `None` for the `E'` graphs, which only use even partitions.
    pub quasi_even: Option<u64>,
}

/// The graph pipeline: classes obtained from the counted partitions.
#[derive(Debug, Clone)]
pub struct GraphResult {
    pub graph: PartitionGraph,
    pub set: SelmerSet,
    pub counts: PartitionCounts,
}

pub fn selmer_by_graph(params: &CurveParams, family: Family) -> Result<GraphResult, SelmerError> {
    let graph = PartitionGraph::for_family(params, family)?;
    let parts = graph.enumerate_partitions(&pinned(params, &graph, family), &[])?;
    let mut two = params.identity();
    two.set(SquareClass::TWO);
    let mut pq = params.identity();
    pq.set(SquareClass::P);
    pq.set(SquareClass::Q);
    let with_quasi = family == Family::E && !even_only_case(params);
    let mut classes = Vec::new();
    let mut even = 0u64;
    let mut quasi = 0u64;
    for &v1 in &parts {
        let d = graph.product(params, v1);
        if graph.is_even(v1) {
            even += 1;
            classes.push(d);
            if family == Family::EPrime {
                classes.push(d.mul(&pq).expect("same basis"));
            }
        }
        if with_quasi && graph.is_quasi_even(v1)? {
            quasi += 1;
            classes.push(d.mul(&two).expect("same basis"));
        }
    }
    let set = SelmerSet::new(family, params.eps, classes)?;
    let counts = PartitionCounts {
        even,
        quasi_even: with_quasi.then_some(quasi),
    };
    Ok(GraphResult { graph, set, counts })
}

/// Whether the instance is in the listed cases of the `E` count, where the
/// quasi-even partitions are not added.
pub fn even_only_case(params: &CurveParams) -> bool {
    let m = params.m;
    let pd = (params.p * params.d).rem_euclid(8);
    let d4 = params.d.rem_euclid(4);
    match params.eps {
        Sign::Plus => {
            (m == 1 && pd == 5 && d4 == 3)
                || (m == 1 && pd == 1 && d4 == 1)
                || m == 2
                || pd == 3
                || (m == 3 && pd % 4 == 1)
                || (m == 4 && pd == 7)
        }
        Sign::Minus => {
            (m == 1 && (pd == 5 || pd == 7) && d4 == 3)
                || (m == 1 && (pd == 3 || pd == 5) && d4 == 1)
                || m == 2
                || (m == 3 && pd != 1)
                || (m == 4 && pd % 4 == 1)
                || (m >= 5 && pd == 5)
        }
    }
}

/// The closed-form cardinality of the Selmer group.
pub fn theorem_count(params: &CurveParams, family: Family) -> Result<u64, SelmerError> {
    let graph = PartitionGraph::for_family(params, family)?;
    let parts = graph.enumerate_partitions(&pinned(params, &graph, family), &[])?;
    let even = parts.iter().filter(|&&v| graph.is_even(v)).count() as u64;
    Ok(match family {
        Family::EPrime => 2 * even,
        Family::E if even_only_case(params) => even,
        Family::E => {
            let mut quasi = 0;
            for &v in &parts {
                if graph.is_quasi_even(v)? {
                    quasi += 1;
                }
            }
            even + quasi
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BoundKind {
    EPlus,
    EPrimePlus,
    EMinus,
    EPrimeMinus,
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundKind::EPlus => "E+",
            BoundKind::EPrimePlus => "E'+",
            BoundKind::EMinus => "E-",
            BoundKind::EPrimeMinus => "E'-",
        })
    }
}

/// Lower bound: the `Pi` values, `delta` flags, index set and witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    /// `(index, Pi)`, indices from 1.
    pub pi_values: Vec<(usize, u32)>,
    pub delta_flags: Vec<(usize, u8)>,
    /// The index set `I` for the `E'` bounds.
    pub index_set: Option<Vec<usize>>,
    pub rho: u32,
    #[serde(skip)]
    pub witness: Vec<SquareClass>,
}

fn one_minus(a: i64, l: i64) -> u32 {
    (1 - arith::legendre(a, l as u64).expect("odd prime")) as u32
}

/// Odd primes dividing `p q D / D_i` (or `p q D` when `skip` is `None`).
fn primes_pq_cofactor(params: &CurveParams, skip: Option<usize>) -> Vec<i64> {
    let mut out = vec![params.p, params.q];
    out.extend(
        params
            .factors
            .iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != skip)
            .map(|(_, &f)| f),
    );
    out
}

struct BoundBuilder<'a> {
    params: &'a CurveParams,
    kind: BoundKind,
    pi: Vec<(usize, u32)>,
    delta: Vec<(usize, u8)>,
    witness: Vec<SquareClass>,
}

impl<'a> BoundBuilder<'a> {
    fn new(params: &'a CurveParams, kind: BoundKind) -> Self {
        BoundBuilder {
            params,
            kind,
            pi: Vec::new(),
            delta: Vec::new(),
            witness: Vec::new(),
        }
    }

    fn class_of(&self, v: i64) -> SquareClass {
        self.params.class_of(v).expect("generator of Q(S,2)")
    }

    /// Records `Pi_index`; counted towards `rho` when `counted`.
    fn entry(&mut self, index: usize, delta: Option<u8>, rest: u32, generator: i64, counted: bool) {
        if let Some(d) = delta {
            self.delta.push((index, d));
        }
        let pi = delta.unwrap_or(0) as u32 + rest;
        self.pi.push((index, pi));
        if counted && pi == 0 {
            let c = self.class_of(generator);
            self.witness.push(c);
        }
    }

    fn finish(self, index_set: Option<Vec<usize>>) -> BoundReport {
        BoundReport {
            kind: self.kind,
            rho: self.witness.len() as u32,
            pi_values: self.pi,
            delta_flags: self.delta,
            index_set,
            witness: self.witness,
        }
    }
}

fn flag(zero: bool) -> u8 {
    if zero {
        0
    } else {
        1
    }
}

/// Shared body of the `E` bounds; `e` is the sign.
fn bound_e(params: &CurveParams, kind: BoundKind, e: i64) -> BoundReport {
    let (m, p, q, big_d) = (params.m, params.p, params.q, params.d);
    let n = params.n();
    let mut b = BoundBuilder::new(params, kind);
    for i in 0..n {
        let di = params.factors[i];
        let hat = params.cofactor(i);
        let zero = di.rem_euclid(4) == 1
            || (m == 2 && (p - e * big_d).rem_euclid(8) == 2)
            || (m >= 3 && (p + e * big_d).rem_euclid(4) == 0);
        let mut rest = one_minus(e * q * hat, di) * one_minus(e * p * hat, di);
        rest += primes_pq_cofactor(params, Some(i))
            .into_iter()
            .map(|l| one_minus(di, l))
            .sum::<u32>();
        b.entry(i + 1, Some(flag(zero)), rest, di, true);
    }
    let pd = (p * big_d).rem_euclid(8);
    let zero = if e == 1 {
        (m == 3 && pd == 7) || (m == 4 && pd == 1) || m >= 5
    } else {
        (m == 3 && pd == 1) || (m == 4 && pd == 7) || m >= 5
    };
    let rest = primes_pq_cofactor(params, None)
        .into_iter()
        .map(|l| one_minus(2, l))
        .sum();
    b.entry(n + 1, Some(flag(zero)), rest, 2, true);
    if e == -1 {
        let zero = pd == 1 || (m >= 3 && pd == 5);
        let rest = primes_pq_cofactor(params, None)
            .into_iter()
            .map(|l| one_minus(-1, l))
            .sum();
        b.entry(n + 2, Some(flag(zero)), rest, -1, true);
    }
    b.finish(None)
}

/// Shared body of the `E'` bounds; `e` is the sign.
fn bound_eprime(params: &CurveParams, kind: BoundKind, e: i64) -> BoundReport {
    let (m, p, q, big_d) = (params.m, params.p, params.q, params.d);
    let n = params.n();
    let pd = p * big_d;
    let in_i = |di: i64| -> bool {
        let r8 = |x: i64| x.rem_euclid(8);
        let r4 = |x: i64| x.rem_euclid(4);
        let shifted = di + e * pd;
        match m {
            2 => r4(di) == 1 || r4(shifted) == 0 || (r4(di) == 3 && r8(p - e * big_d) == 6),
            3 => {
                r8(di) == 1
                    || r8(shifted) == 0
                    || (r4(di) == 3 && r8(pd + e * di) == 4)
                    || (r8(di) == 5 && r4(pd - e * di) == 0)
            }
            4 => r8(di) == 1 || r8(shifted) == 0 || (r8(di) == 5 && r8(pd + e * di) == 4),
            _ => r8(di) == 1 || r8(shifted) == 0,
        }
    };
    let mut b = BoundBuilder::new(params, kind);
    let mut index_set = Vec::new();
    for i in 0..n {
        let di = params.factors[i];
        let hat = params.cofactor(i);
        let mut rest = one_minus(-e * q * hat, di) * one_minus(-e * p * hat, di);
        for (j, &dj) in params.factors.iter().enumerate() {
            if j != i {
                rest += one_minus(di, dj) * one_minus(p * q * di, dj);
            }
        }
        let counted = in_i(di);
        if counted {
            index_set.push(i + 1);
        }
        b.entry(i + 1, None, rest, di, counted);
    }
    if e == 1 {
        let pmd = (p - big_d).rem_euclid(8);
        let zero = (m == 2 && pmd != 2) || (m == 3 && pmd % 4 == 0) || (m >= 4 && pmd == 0);
        let rest = params
            .factors
            .iter()
            .map(|&di| one_minus(-1, di) * one_minus(-p * q, di))
            .sum();
        b.entry(n + 1, Some(flag(zero)), rest, -1, true);
    }
    b.finish(Some(index_set))
}

pub fn bound_e_plus(params: &CurveParams) -> Result<BoundReport, SelmerError> {
    if params.eps != Sign::Plus {
        return Err(SelmerError::WrongSign(BoundKind::EPlus));
    }
    Ok(bound_e(params, BoundKind::EPlus, 1))
}

pub fn bound_eprime_plus(params: &CurveParams) -> Result<BoundReport, SelmerError> {
    if params.eps != Sign::Plus {
        return Err(SelmerError::WrongSign(BoundKind::EPrimePlus));
    }
    if params.m < 2 {
        return Err(SelmerError::OutOfScope(BoundKind::EPrimePlus));
    }
    Ok(bound_eprime(params, BoundKind::EPrimePlus, 1))
}

pub fn bound_e_minus(params: &CurveParams) -> Result<BoundReport, SelmerError> {
    if params.eps != Sign::Minus {
        return Err(SelmerError::WrongSign(BoundKind::EMinus));
    }
    Ok(bound_e(params, BoundKind::EMinus, -1))
}

pub fn bound_eprime_minus(params: &CurveParams) -> Result<BoundReport, SelmerError> {
    if params.eps != Sign::Minus {
        return Err(SelmerError::WrongSign(BoundKind::EPrimeMinus));
    }
    if params.m < 2 {
        return Err(SelmerError::OutOfScope(BoundKind::EPrimeMinus));
    }
    Ok(bound_eprime(params, BoundKind::EPrimeMinus, -1))
}

/// The `E` and `E'` bounds for the instance's sign; the `E'` one is `None` when `m = 1`.
pub fn bounds(params: &CurveParams) -> (BoundReport, Option<BoundReport>) {
    match params.eps {
        Sign::Plus => (bound_e(params, BoundKind::EPlus, 1), bound_eprime_plus(params).ok()),
        Sign::Minus => (bound_e(params, BoundKind::EMinus, -1), bound_eprime_minus(params).ok()),
    }
}

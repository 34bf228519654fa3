//! The four partition graphs `G(+D)`, `g(+D)`, `G(-D)`, `g(-D)` and the
//! even / quasi-even partition tests.
//!
//! Partitions are bitmasks over the graph's vertex list: bit `k` set means
//! vertex `k` lies in `V1`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::arith;
use crate::model::{CurveParams, Sign, SquareClass};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("{graph}: no case covers m = {m}, pD = {pd} (mod 8), D = {d} (mod 8)")]
    CaseGap {
        graph: GraphKind,
        m: u32,
        pd: i64,
        d: i64,
    },
    #[error("{graph}: (2/-1) is undefined here but -1 has crossing edges")]
    ConventionUndefined { graph: GraphKind },
    #[error("vertex {0} is not in the graph")]
    MissingVertex(Vertex),
    #[error("{0} graphs need the other sign")]
    WrongSign(GraphKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Vertex {
    MinusOne,
    Two,
    MinusTwo,
    P,
    Q,
    D(usize),
}

impl Vertex {
    pub fn value(self, params: &CurveParams) -> i64 {
        match self {
            Vertex::MinusOne => -1,
            Vertex::Two => 2,
            Vertex::MinusTwo => -2,
            Vertex::P => params.p,
            Vertex::Q => params.q,
            Vertex::D(i) => params.factors[i],
        }
    }

    /// The class of the vertex label in `Q(S,2)`.
    pub fn class(self, params: &CurveParams) -> SquareClass {
        let mut c = params.identity();
        match self {
            Vertex::MinusOne => c.set(SquareClass::MINUS_ONE),
            Vertex::Two => c.set(SquareClass::TWO),
            Vertex::MinusTwo => {
                c.set(SquareClass::MINUS_ONE);
                c.set(SquareClass::TWO);
            }
            Vertex::P => c.set(SquareClass::P),
            Vertex::Q => c.set(SquareClass::Q),
            Vertex::D(i) => c.set(SquareClass::d_slot(i)),
        }
        c
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::MinusOne => write!(f, "-1"),
            Vertex::Two => write!(f, "2"),
            Vertex::MinusTwo => write!(f, "-2"),
            Vertex::P => write!(f, "p"),
            Vertex::Q => write!(f, "q"),
            Vertex::D(i) => write!(f, "D{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeKind {
    Directed,
    Undirected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Edge {
    pub from: Vertex,
    pub to: Vertex,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GraphKind {
    GPlus,
    SmallGPlus,
    GMinus,
    SmallGMinus,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::GPlus => "G(+D)",
            GraphKind::SmallGPlus => "g(+D)",
            GraphKind::GMinus => "G(-D)",
            GraphKind::SmallGMinus => "g(-D)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionGraph {
    pub kind: GraphKind,
    /// Number of the definition case that fired, from 1.
    pub case: u8,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    /// The defined value of `(2/-1)`, if any.
    pub conv_2_over_minus1: Option<i8>,
    /// `(2/P)` for each vertex, `None` only for an undefined `(2/-1)`.
    symbols: Vec<Option<i8>>,
}

fn leg(a: i64, l: i64) -> i8 {
    arith::legendre(a, l as u64).expect("graph vertices are odd primes")
}

struct Builder<'a> {
    params: &'a CurveParams,
    edges: Vec<Edge>,
}

impl<'a> Builder<'a> {
    fn new(params: &'a CurveParams) -> Self {
        Builder {
            params,
            edges: Vec::new(),
        }
    }

    fn push(&mut self, from: Vertex, to: Vertex, kind: EdgeKind) {
        assert_ne!(from, to, "self-loop {from}");
        let e = Edge { from, to, kind };
        if !self.edges.contains(&e) {
            self.edges.push(e);
        }
    }

    fn arc(&mut self, from: Vertex, to: Vertex) {
        self.push(from, to, EdgeKind::Directed);
    }

    fn split(&self) -> (usize, usize) {
        (self.params.s, self.params.n())
    }

    fn d(&self, i: usize) -> i64 {
        self.params.factors[i]
    }

    /// `D_i -> D_j` when `(D_j/D_i) = -1`, `i <= s`.
    fn dd_split(&mut self) {
        let (s, n) = self.split();
        for i in 0..s {
            for j in 0..n {
                if i != j && leg(self.d(j), self.d(i)) == -1 {
                    self.arc(Vertex::D(i), Vertex::D(j));
                }
            }
        }
    }

    /// `D_j -> D_i` when `(D_i/D_j) = -1`, `i <= s < j`.
    fn dd_nonsplit(&mut self) {
        let (s, n) = self.split();
        for i in 0..s {
            for j in s..n {
                if leg(self.d(i), self.d(j)) == -1 {
                    self.arc(Vertex::D(j), Vertex::D(i));
                }
            }
        }
    }

    /// `l -> D_i` when `(D_i/l) = -1`, `i <= s`, `l = p, q`.
    fn pq_to_d(&mut self) {
        let (s, _) = self.split();
        for (v, l) in [(Vertex::P, self.params.p), (Vertex::Q, self.params.q)] {
            for i in 0..s {
                if leg(self.d(i), l) == -1 {
                    self.arc(v, Vertex::D(i));
                }
            }
        }
    }

    /// `D_i -> p` when `(p/D_i) = -1`, `i <= s`.
    fn d_to_p(&mut self) {
        let (s, _) = self.split();
        for i in 0..s {
            if leg(self.params.p, self.d(i)) == -1 {
                self.arc(Vertex::D(i), Vertex::P);
            }
        }
    }

    /// `v -> D_k` (or `v -- D_k`) when `(a/D_k) = -1`, over `k < upto`.
    fn label_d(&mut self, v: Vertex, a: i64, upto: usize, kind: EdgeKind, outward: bool) {
        for k in 0..upto {
            if leg(a, self.d(k)) == -1 {
                if outward {
                    self.push(v, Vertex::D(k), kind);
                } else {
                    self.push(Vertex::D(k), v, kind);
                }
            }
        }
    }

    /// `v -> p` when `(a/p) = -1`.
    fn label_p(&mut self, v: Vertex, a: i64) {
        if leg(a, self.params.p) == -1 {
            self.arc(v, Vertex::P);
        }
    }
}

fn d_vertices(params: &CurveParams) -> impl Iterator<Item = Vertex> {
    (0..params.n()).map(Vertex::D)
}

impl PartitionGraph {
    fn assemble(
        params: &CurveParams,
        kind: GraphKind,
        case: u8,
        head: &[Vertex],
        edges: Vec<Edge>,
        conv: Option<i8>,
    ) -> PartitionGraph {
        let vertices: Vec<Vertex> = head.iter().copied().chain(d_vertices(params)).collect();
        for e in &edges {
            assert!(vertices.contains(&e.from) && vertices.contains(&e.to));
        }
        let symbols = vertices
            .iter()
            .map(|v| match v {
                Vertex::MinusOne => conv,
                Vertex::Two | Vertex::MinusTwo => Some(1),
                other => Some(leg(2, other.value(params))),
            })
            .collect();
        PartitionGraph {
            kind,
            case,
            vertices,
            edges,
            conv_2_over_minus1: conv,
            symbols,
        }
    }

    /// The graph that governs `family` for the instance's sign.
    pub fn for_family(params: &CurveParams, family: crate::model::Family) -> Result<PartitionGraph, GraphError> {
        use crate::model::Family;
        match (family, params.eps) {
            (Family::E, Sign::Plus) => build_g_plus_big(params),
            (Family::EPrime, Sign::Plus) => build_g_plus_small(params),
            (Family::E, Sign::Minus) => build_g_minus_big(params),
            (Family::EPrime, Sign::Minus) => build_g_minus_small(params),
        }
    }

    pub fn case_id(&self) -> String {
        format!("{}.case{}", self.kind, self.case)
    }

    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }

    /// Number of edges leaving each vertex towards the other side.
    fn crossing(&self, v1: u64) -> Vec<u32> {
        let side = |v: Vertex| {
            let k = self.index_of(v).expect("edge endpoints are vertices");
            v1 >> k & 1
        };
        let mut out = vec![0u32; self.vertices.len()];
        for e in &self.edges {
            if side(e.from) != side(e.to) {
                out[self.index_of(e.from).unwrap()] += 1;
                if e.kind == EdgeKind::Undirected {
                    out[self.index_of(e.to).unwrap()] += 1;
                }
            }
        }
        out
    }

    pub fn is_even(&self, v1: u64) -> bool {
        self.crossing(v1).iter().all(|c| c % 2 == 0)
    }

    pub fn is_quasi_even(&self, v1: u64) -> Result<bool, GraphError> {
        let counts = self.crossing(v1);
        let mut ok = true;
        for (k, &c) in counts.iter().enumerate() {
            let sym = match self.symbols[k] {
                Some(s) => s,
                None if c == 0 => 1,
                None => return Err(GraphError::ConventionUndefined { graph: self.kind }),
            };
            let want = if sym == 1 { 0 } else { 1 };
            ok &= c % 2 == want;
        }
        Ok(ok)
    }

    /// All `V1` masks with the `out` vertices pinned to `V2` and `in_` to `V1`.
    pub fn enumerate_partitions(&self, out: &[Vertex], in_: &[Vertex]) -> Result<Vec<u64>, GraphError> {
        let mut pinned = 0u64;
        let mut forced = 0u64;
        for &v in out.iter().chain(in_) {
            let k = self.index_of(v).ok_or(GraphError::MissingVertex(v))?;
            pinned |= 1 << k;
        }
        for &v in in_ {
            forced |= 1 << self.index_of(v).unwrap();
        }
        let free: Vec<usize> = (0..self.vertices.len()).filter(|k| pinned >> k & 1 == 0).collect();
        Ok((0..1u64 << free.len())
            .map(|bits| {
                free.iter()
                    .enumerate()
                    .filter(|(j, _)| bits >> j & 1 == 1)
                    .fold(forced, |acc, (_, &k)| acc | 1 << k)
            })
            .collect())
    }

    /// Product of the `V1` labels as a square class.
    pub fn product(&self, params: &CurveParams, v1: u64) -> SquareClass {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(k, _)| v1 >> k & 1 == 1)
            .fold(params.identity(), |acc, (_, v)| {
                acc.mul(&v.class(params)).expect("same basis")
            })
    }

    /// Text dump: a header, then one edge per line.
    pub fn dump(&self) -> String {
        let conv = match self.conv_2_over_minus1 {
            Some(c) => c.to_string(),
            None => "undefined".into(),
        };
        let verts: Vec<String> = self.vertices.iter().map(|v| v.to_string()).collect();
        let mut s = format!(
            "# graph {} case_id {} conv_2_over_minus1 {}\n# vertices {}\n",
            self.kind,
            self.case_id(),
            conv,
            verts.join(" ")
        );
        for e in &self.edges {
            let arrow = match e.kind {
                EdgeKind::Directed => "->",
                EdgeKind::Undirected => "--",
            };
            s.push_str(&format!("{} {} {}\n", e.from, arrow, e.to));
        }
        s
    }
}

fn residues(params: &CurveParams) -> (u32, i64, i64, i64) {
    let m = params.m;
    let pd = (params.p * params.d).rem_euclid(8);
    let d = params.d.rem_euclid(8);
    let p = params.p.rem_euclid(8);
    (m, p, d, pd)
}

fn gap(kind: GraphKind, params: &CurveParams) -> GraphError {
    let (m, _, d, pd) = residues(params);
    GraphError::CaseGap { graph: kind, m, pd, d }
}

fn require(params: &CurveParams, sign: Sign, kind: GraphKind) -> Result<(), GraphError> {
    if params.eps != sign {
        return Err(GraphError::WrongSign(kind));
    }
    Ok(())
}

/// `G(+D)`.
pub fn build_g_plus_big(params: &CurveParams) -> Result<PartitionGraph, GraphError> {
    let kind = GraphKind::GPlus;
    require(params, Sign::Plus, kind)?;
    let (m, p, d, pd) = residues(params);
    let case1 = m == 1
        || (m == 2 && ((p + 2) * d).rem_euclid(8) != 5)
        || (m >= 3 && pd % 4 == 1);
    let conv = if (m == 1 && pd == 7 && d % 4 == 1)
        || (m == 1 && pd == 1 && d % 4 == 3)
        || (m >= 4 && pd == 1)
    {
        Some(1)
    } else if (m == 1 && pd == 5 && d % 4 == 1)
        || (m == 1 && pd == 7 && d % 4 == 3)
        || (m >= 4 && pd == 5)
    {
        Some(-1)
    } else {
        None
    };
    let mut b = Builder::new(params);
    b.dd_split();
    b.dd_nonsplit();
    b.pq_to_d();
    if case1 {
        b.label_d(Vertex::MinusOne, -1, params.s, EdgeKind::Directed, true);
    }
    b.d_to_p();
    let edges = b.edges;
    Ok(if case1 {
        PartitionGraph::assemble(params, kind, 1, &[Vertex::MinusOne, Vertex::P, Vertex::Q], edges, conv)
    } else {
        PartitionGraph::assemble(params, kind, 2, &[Vertex::P, Vertex::Q], edges, conv)
    })
}

/// `g(+D)`.
pub fn build_g_plus_small(params: &CurveParams) -> Result<PartitionGraph, GraphError> {
    let kind = GraphKind::SmallGPlus;
    require(params, Sign::Plus, kind)?;
    let (m, p, d, pd) = residues(params);
    let pmd = (params.p - params.d).rem_euclid(8);
    let case = if (m == 1 && p % 4 == 1 && (pmd == 0 || pmd == 6))
        || (m == 1 && p % 4 == 3 && (pmd == 2 || pmd == 4))
        || (m == 2 && pd % 4 == 1)
        || (m == 2 && d % 4 == 3 && pd == 3)
        || (m == 2 && d % 4 == 1 && pd == 7)
        || (m == 3 && pd % 4 == 1)
    {
        1
    } else if (m == 1 && p % 4 == 1 && (pmd == 2 || pmd == 4)) || (m >= 4 && pd == 5) {
        2
    } else if (m == 1 && p % 4 == 3 && (pmd == 0 || pmd == 6)) || (m >= 4 && pd == 1) {
        3
    } else if (m == 2 && d % 4 == 1 && pd == 3)
        || (m == 2 && d % 4 == 3 && pd == 7)
        || (m == 3 && pd == 3)
        || (m == 4 && pd % 4 == 3)
        || (m >= 5 && pd == 3)
    {
        4
    } else if (m == 3 || m >= 5) && pd == 7 {
        5
    } else {
        return Err(gap(kind, params));
    };
    let (s, n) = (params.s, params.n());
    let mut b = Builder::new(params);
    b.dd_split();
    b.label_d(Vertex::MinusOne, -1, s, EdgeKind::Directed, false);
    b.d_to_p();
    let minus_two = |b: &mut Builder| {
        b.label_d(Vertex::MinusTwo, -2, n, EdgeKind::Directed, true);
        b.label_p(Vertex::MinusTwo, -2);
        b.arc(Vertex::MinusTwo, Vertex::MinusOne);
    };
    let two = |b: &mut Builder| {
        b.label_d(Vertex::Two, 2, n, EdgeKind::Directed, true);
        b.label_p(Vertex::Two, 2);
    };
    let head: &[Vertex] = match case {
        1 => &[Vertex::MinusOne, Vertex::P],
        2 => {
            minus_two(&mut b);
            &[Vertex::MinusOne, Vertex::MinusTwo, Vertex::P]
        }
        3 => {
            two(&mut b);
            &[Vertex::MinusOne, Vertex::P, Vertex::Two]
        }
        4 => {
            b.label_d(Vertex::MinusOne, -1, n, EdgeKind::Directed, true);
            b.label_p(Vertex::MinusOne, -1);
            &[Vertex::MinusOne, Vertex::P]
        }
        _ => {
            minus_two(&mut b);
            two(&mut b);
            &[Vertex::MinusOne, Vertex::P, Vertex::MinusTwo, Vertex::Two]
        }
    };
    Ok(PartitionGraph::assemble(params, kind, case, head, b.edges, None))
}

/// `G(-D)`.
pub fn build_g_minus_big(params: &CurveParams) -> Result<PartitionGraph, GraphError> {
    let kind = GraphKind::GMinus;
    require(params, Sign::Minus, kind)?;
    let (m, p, d, pd) = residues(params);
    let p2d = ((p + 2) * d).rem_euclid(8);
    let case = if m == 1 && d % 4 == 1 {
        1
    } else if (m == 1 && d % 4 == 3) || (m == 2 && d % 4 == 3 && p2d != 3) {
        2
    } else if (m == 2 && p2d == 3) || (m >= 3 && pd % 4 == 1) {
        3
    } else if m == 2 && p2d != 3 && d % 4 == 1 {
        4
    } else if m >= 3 && pd % 4 == 3 {
        5
    } else {
        return Err(gap(kind, params));
    };
    let conv = if (m == 1 && pd == 7 && d % 4 == 1)
        || (m == 1 && pd == 1 && d % 4 == 3)
        || (m == 3 && pd == 1)
        || (m >= 4 && pd == 7)
        || (m >= 5 && pd == 1)
    {
        Some(1)
    } else if (m == 1 && pd == 1 && d % 4 == 1)
        || (m == 1 && pd == 3 && d % 4 == 3)
        || (m >= 4 && pd == 3)
    {
        Some(-1)
    } else {
        None
    };
    let n = params.n();
    let mut b = Builder::new(params);
    b.dd_split();
    b.dd_nonsplit();
    b.pq_to_d();
    let undirected_d = |b: &mut Builder| b.label_d(Vertex::MinusOne, -1, n, EdgeKind::Undirected, false);
    let pq_to_minus_one = |b: &mut Builder| {
        for (v, l) in [(Vertex::P, b.params.p), (Vertex::Q, b.params.q)] {
            if leg(-1, l) == -1 {
                b.arc(v, Vertex::MinusOne);
            }
        }
    };
    match case {
        1 => {
            undirected_d(&mut b);
            b.d_to_p();
            for (v, l) in [(Vertex::P, params.p), (Vertex::Q, params.q)] {
                if leg(-1, l) == -1 {
                    b.push(Vertex::MinusOne, v, EdgeKind::Undirected);
                }
            }
        }
        2 => {
            undirected_d(&mut b);
            b.d_to_p();
            pq_to_minus_one(&mut b);
        }
        3 => {
            b.d_to_p();
            b.label_d(Vertex::MinusOne, -1, n, EdgeKind::Directed, false);
            pq_to_minus_one(&mut b);
        }
        4 => {
            b.d_to_p();
            undirected_d(&mut b);
            pq_to_minus_one(&mut b);
            b.arc(Vertex::MinusOne, Vertex::P);
        }
        _ => {
            b.d_to_p();
            undirected_d(&mut b);
            pq_to_minus_one(&mut b);
            b.label_p(Vertex::MinusOne, -1);
        }
    }
    Ok(PartitionGraph::assemble(
        params,
        kind,
        case,
        &[Vertex::MinusOne, Vertex::P, Vertex::Q],
        b.edges,
        conv,
    ))
}

/// `g(-D)`.
pub fn build_g_minus_small(params: &CurveParams) -> Result<PartitionGraph, GraphError> {
    let kind = GraphKind::SmallGMinus;
    require(params, Sign::Minus, kind)?;
    let (m, p, d, pd) = residues(params);
    let pmd = (params.p - params.d).rem_euclid(8);
    let case = if (m == 1 && (pmd == 2 || pmd == 4))
        || (m == 2 && pd % 4 == 3)
        || (m == 2 && d % 4 == 1 && pd == 5)
        || (m == 2 && d % 4 == 3 && pd == 1)
        || (m == 3 && pd % 4 == 3)
    {
        1
    } else if (m == 1 && p % 4 == 1 && (pmd == 0 || pmd == 6)) || (m >= 4 && pd == 3) {
        2
    } else if (m == 1 && p % 4 == 3 && (pmd == 0 || pmd == 6)) || (m >= 5 && pd == 7) {
        3
    } else if (m == 2 && d % 4 == 1 && pd == 1)
        || (m == 2 && d % 4 == 3 && pd == 5)
        || (m >= 3 && pd == 5)
        || (m == 4 && pd == 1)
    {
        4
    } else if (m == 3 || m >= 5) && pd == 1 {
        5
    } else {
        return Err(gap(kind, params));
    };
    let n = params.n();
    let mut b = Builder::new(params);
    b.dd_split();
    b.d_to_p();
    let head: &[Vertex] = match case {
        1 => &[Vertex::P],
        2 => {
            b.label_p(Vertex::MinusTwo, -2);
            b.label_d(Vertex::MinusTwo, -2, n, EdgeKind::Directed, true);
            &[Vertex::P, Vertex::MinusTwo]
        }
        3 => {
            b.label_p(Vertex::Two, 2);
            b.label_d(Vertex::Two, 2, n, EdgeKind::Directed, true);
            &[Vertex::P, Vertex::Two]
        }
        4 => {
            b.label_p(Vertex::MinusOne, -1);
            b.label_d(Vertex::MinusOne, -1, n, EdgeKind::Directed, true);
            &[Vertex::P, Vertex::MinusOne]
        }
        _ => {
            b.label_p(Vertex::MinusOne, -1);
            b.label_d(Vertex::MinusOne, -1, n, EdgeKind::Directed, true);
            b.label_d(Vertex::Two, 2, n, EdgeKind::Directed, true);
            b.label_p(Vertex::Two, 2);
            &[Vertex::P, Vertex::MinusOne, Vertex::Two]
        }
    };
    Ok(PartitionGraph::assemble(params, kind, case, head, b.edges, None))
}

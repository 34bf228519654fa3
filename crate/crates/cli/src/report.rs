//! Per-instance records: the JSON shape printed by `compute` and the CSV row
//! shared by `compute --format csv` and `survey`.

use std::io::Write;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use selmer_core::compare::{BoundCheck, ComparisonReport, FamilyReport};
use selmer_core::model::CurveParams;

pub const CSV_VERSION: &str = "# selmer-survey v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Descent,
    Graph,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub params: ParamsRecord,
    pub method: Method,
    #[serde(rename = "selmer_E")]
    pub selmer_e: SetRecord,
    #[serde(rename = "selmer_Eprime")]
    pub selmer_eprime: SetRecord,
    pub counts: PerFamily<Counts>,
    pub bounds: PerFamily<Option<Bound>>,
    pub mismatches: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub eps: i64,
    pub p: i64,
    pub q: i64,
    pub m: u32,
    #[serde(rename = "D")]
    pub d: i64,
    pub factors: Vec<i64>,
    pub s: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetRecord {
    pub classes: Vec<i64>,
    pub dim: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerFamily<T> {
    #[serde(rename = "E")]
    pub e: T,
    #[serde(rename = "Eprime")]
    pub eprime: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub descent: Option<u64>,
    pub graph: Option<u64>,
    pub theorem: Option<u64>,
    pub even_partitions: Option<u64>,
    pub quasi_even_partitions: Option<u64>,
    pub case_id: Option<String>,
    pub graph_unavailable: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub kind: String,
    pub rho: u32,
    pub pi: Vec<Indexed>,
    pub delta: Vec<Indexed>,
    pub index_set: Option<Vec<usize>>,
    pub witness: Vec<i64>,
    #[serde(rename = "holds_for_E")]
    pub holds_for_e: bool,
    #[serde(rename = "holds_for_Eprime")]
    pub holds_for_eprime: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Indexed {
    pub index: usize,
    pub value: u32,
}

fn counts(f: &FamilyReport, method: Method) -> Counts {
    let graph_side = method != Method::Descent;
    Counts {
        descent: (method != Method::Graph).then_some(f.descent.len() as u64),
        graph: f.graph.as_ref().filter(|_| graph_side).map(|g| g.set.len() as u64),
        theorem: f.theorem.filter(|_| graph_side),
        even_partitions: f.graph.as_ref().filter(|_| graph_side).map(|g| g.counts.even),
        quasi_even_partitions: f.graph.as_ref().filter(|_| graph_side).and_then(|g| g.counts.quasi_even),
        case_id: f.graph.as_ref().map(|g| g.graph.case_id()),
        graph_unavailable: f.graph_unavailable.as_ref().map(|e| e.to_string()),
    }
}

fn bound(params: &CurveParams, b: &BoundCheck) -> Bound {
    let r = &b.report;
    Bound {
        kind: r.kind.to_string(),
        rho: r.rho,
        pi: r.pi_values.iter().map(|&(index, value)| Indexed { index, value }).collect(),
        delta: r
            .delta_flags
            .iter()
            .map(|&(index, v)| Indexed { index, value: v as u32 })
            .collect(),
        index_set: r.index_set.clone(),
        witness: r.witness.iter().map(|w| params.value(w)).collect(),
        holds_for_e: b.holds_for_e,
        holds_for_eprime: b.holds_for_eprime,
    }
}

fn set(params: &CurveParams, f: &FamilyReport, method: Method) -> SetRecord {
    // the graph set when asked for and available, else the descent set
    let s = match (&f.graph, method) {
        (Some(g), Method::Graph) => &g.set,
        _ => &f.descent,
    };
    let mut classes: Vec<i64> = s.classes.iter().map(|c| params.value(c)).collect();
    classes.sort_unstable();
    SetRecord { classes, dim: s.dim2 }
}

impl Record {
    pub fn new(r: &ComparisonReport, method: Method) -> Record {
        let p = &r.params;
        Record {
            params: ParamsRecord {
                eps: p.eps.value(),
                p: p.p,
                q: p.q,
                m: p.m,
                d: p.d,
                factors: p.factors.clone(),
                s: p.s,
            },
            method,
            selmer_e: set(p, &r.e, method),
            selmer_eprime: set(p, &r.eprime, method),
            counts: PerFamily {
                e: counts(&r.e, method),
                eprime: counts(&r.eprime, method),
            },
            bounds: PerFamily {
                e: Some(bound(p, &r.bound_e)),
                eprime: r.bound_eprime.as_ref().map(|b| bound(p, b)),
            },
            mismatches: r
                .mismatches
                .iter()
                .map(|m| serde_json::to_value(m).expect("plain data"))
                .collect(),
        }
    }

    pub fn text(&self) -> String {
        let p = &self.params;
        let mut s = format!(
            "eps={:+} p={} q={} m={} D={} factors={:?} s={}\n",
            p.eps, p.p, p.q, p.m, p.d, p.factors, p.s
        );
        for (name, set, c, b) in [
            ("S(E)", &self.selmer_e, &self.counts.e, &self.bounds.e),
            ("S(E')", &self.selmer_eprime, &self.counts.eprime, &self.bounds.eprime),
        ] {
            s.push_str(&format!("{name}: dim {} classes {:?}\n", set.dim, set.classes));
            let show = |v: Option<u64>| v.map_or("-".to_string(), |x| x.to_string());
            s.push_str(&format!(
                "  counts: descent {} graph {} theorem {}",
                show(c.descent),
                show(c.graph),
                show(c.theorem)
            ));
            if let Some(id) = &c.case_id {
                s.push_str(&format!(" ({id})"));
            }
            if let Some(why) = &c.graph_unavailable {
                s.push_str(&format!(" (graph unavailable: {why})"));
            }
            s.push('\n');
            if let Some(b) = b {
                s.push_str(&format!(
                    "  bound {}: rho {} holds for E {} for E' {}\n",
                    b.kind, b.rho, b.holds_for_e, b.holds_for_eprime
                ));
            }
        }
        s.push_str(&format!("mismatches: {}\n", self.mismatches.len()));
        for m in &self.mismatches {
            s.push_str(&format!("  {m}\n"));
        }
        s
    }
}

/// One survey row; column order is part of the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub eps: i64,
    pub p: i64,
    pub q: i64,
    pub m: u32,
    #[serde(rename = "D")]
    pub d: i64,
    pub n: usize,
    pub s: usize,
    #[serde(rename = "dim_E")]
    pub dim_e: u32,
    #[serde(rename = "dim_Eprime")]
    pub dim_eprime: u32,
    #[serde(rename = "classes_E")]
    pub classes_e: String,
    #[serde(rename = "classes_Eprime")]
    pub classes_eprime: String,
    #[serde(rename = "theorem_E")]
    pub theorem_e: Option<u64>,
    #[serde(rename = "theorem_Eprime")]
    pub theorem_eprime: Option<u64>,
    #[serde(rename = "case_E")]
    pub case_e: String,
    #[serde(rename = "case_Eprime")]
    pub case_eprime: String,
    #[serde(rename = "bound_E")]
    pub bound_e: String,
    #[serde(rename = "rho_E")]
    pub rho_e: u32,
    #[serde(rename = "bound_Eprime")]
    pub bound_eprime: String,
    #[serde(rename = "rho_Eprime")]
    pub rho_eprime: Option<u32>,
    /// Which groups the `E'` bound holds against: `E`, `Eprime`, both or none.
    #[serde(rename = "rho_Eprime_holds_for")]
    pub rho_eprime_holds_for: String,
    pub mismatches: usize,
}

pub const COLUMNS: [&str; 21] = [
    "eps",
    "p",
    "q",
    "m",
    "D",
    "n",
    "s",
    "dim_E",
    "dim_Eprime",
    "classes_E",
    "classes_Eprime",
    "theorem_E",
    "theorem_Eprime",
    "case_E",
    "case_Eprime",
    "bound_E",
    "rho_E",
    "bound_Eprime",
    "rho_Eprime",
    "rho_Eprime_holds_for",
    "mismatches",
];

fn joined(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn case(c: &Counts) -> String {
    match (&c.case_id, &c.graph_unavailable) {
        (Some(id), _) => id.clone(),
        (None, Some(_)) => "gap".into(),
        (None, None) => String::new(),
    }
}

impl Row {
    pub fn new(r: &Record) -> Row {
        let p = &r.params;
        let eprime = r.bounds.eprime.as_ref();
        Row {
            eps: p.eps,
            p: p.p,
            q: p.q,
            m: p.m,
            d: p.d,
            n: p.factors.len(),
            s: p.s,
            dim_e: r.selmer_e.dim,
            dim_eprime: r.selmer_eprime.dim,
            classes_e: joined(&r.selmer_e.classes),
            classes_eprime: joined(&r.selmer_eprime.classes),
            theorem_e: r.counts.e.theorem,
            theorem_eprime: r.counts.eprime.theorem,
            case_e: case(&r.counts.e),
            case_eprime: case(&r.counts.eprime),
            bound_e: r.bounds.e.as_ref().map_or(String::new(), |b| b.kind.clone()),
            rho_e: r.bounds.e.as_ref().map_or(0, |b| b.rho),
            bound_eprime: eprime.map_or(String::new(), |b| b.kind.clone()),
            rho_eprime: eprime.map(|b| b.rho),
            rho_eprime_holds_for: eprime.map_or(String::new(), |b| {
                match (b.holds_for_e, b.holds_for_eprime) {
                    (true, true) => "both",
                    (true, false) => "E",
                    (false, true) => "Eprime",
                    (false, false) => "none",
                }
                .into()
            }),
            mismatches: r.mismatches.len(),
        }
    }
}

/// Writes the version line and the column header.
pub fn write_csv_header<W: Write>(mut w: W) -> Result<()> {
    writeln!(w, "{CSV_VERSION}")?;
    writeln!(w, "{}", COLUMNS.join(","))?;
    Ok(())
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

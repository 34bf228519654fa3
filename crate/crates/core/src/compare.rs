//! Cross-method comparison for one instance.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::graphs::GraphError;
use crate::local::{LocalError, Rule, Tables};
use crate::model::{CurveParams, Family, Sign, SquareClass};
use crate::oracle::{Depth, OracleError};
use crate::selmer::{
    self, BoundKind, BoundReport, Fallback, GraphResult, OracleTable, SelmerError, SelmerSet,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Mismatch {
    TableOracle {
        family: Family,
        class: String,
        place: String,
        rule: Rule,
        table: bool,
        oracle: bool,
    },
    NotSubgroup {
        family: Family,
        method: &'static str,
    },
    SetDifference {
        family: Family,
        method: &'static str,
        only_descent: Vec<String>,
        only_other: Vec<String>,
    },
    Count {
        family: Family,
        method: &'static str,
        descent: u64,
        other: u64,
    },
    Containment {
        family: Family,
        class: String,
    },
    KillRule {
        family: Family,
        class: String,
    },
    Bound {
        kind: BoundKind,
        rho: u32,
        dim_e: u32,
        dim_eprime: u32,
    },
    Witness {
        kind: BoundKind,
        class: String,
    },
}

/// Result of the three methods for one family.
#[derive(Debug, Clone)]
pub struct FamilyReport {
    pub family: Family,
    pub descent: SelmerSet,
    /// Descent with every place decided by the oracle.
    pub oracle: Option<SelmerSet>,
    pub graph: Option<GraphResult>,
    pub theorem: Option<u64>,
    /// Why the graph route did not run, e.g. a case gap.
    pub graph_unavailable: Option<GraphError>,
}

/// A bound together with the groups it holds against.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub report: BoundReport,
    pub holds_for_e: bool,
    pub holds_for_eprime: bool,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub params: CurveParams,
    pub e: FamilyReport,
    pub eprime: FamilyReport,
    pub bound_e: BoundCheck,
    pub bound_eprime: Option<BoundCheck>,
    pub mismatches: Vec<Mismatch>,
    /// Table verdicts compared against the oracle.
    pub table_checks: usize,
    pub clauses_fired: BTreeSet<Rule>,
    /// Table verdicts at `2` for even `d | 2D` with `m = 2`, all confirmed.
    pub m2_rule_checks: usize,
}

impl ComparisonReport {
    pub fn family(&self, family: Family) -> &FamilyReport {
        match family {
            Family::E => &self.e,
            Family::EPrime => &self.eprime,
        }
    }

    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CompareOptions<'a> {
    pub tables: Tables,
    /// Precomputed oracle verdicts; without them no oracle comparison is made.
    pub oracle: Option<&'a OracleTable>,
    /// Oracle depth used for classes the tables do not cover.
    pub depth: Depth,
}

impl Default for CompareOptions<'_> {
    fn default() -> Self {
        CompareOptions {
            tables: Tables::default(),
            oracle: None,
            depth: Depth::Auto,
        }
    }
}

fn set_or_flag(
    family: Family,
    eps: Sign,
    classes: Vec<SquareClass>,
    method: &'static str,
    out: &mut Vec<Mismatch>,
) -> SelmerSet {
    match SelmerSet::new(family, eps, classes.iter().copied()) {
        Ok(s) => s,
        Err(_) => {
            out.push(Mismatch::NotSubgroup { family, method });
            let mut classes = classes;
            classes.sort();
            classes.dedup();
            SelmerSet {
                family,
                eps,
                dim2: classes.len().max(1).ilog2(),
                classes,
            }
        }
    }
}

fn diff(params: &CurveParams, a: &SelmerSet, b: &SelmerSet) -> (Vec<String>, Vec<String>) {
    let only = |x: &SelmerSet, y: &SelmerSet| -> Vec<String> {
        x.classes
            .iter()
            .filter(|c| !y.contains(c))
            .map(|c| params.class_text(c))
            .collect()
    };
    (only(a, b), only(b, a))
}

fn check_family(
    params: &CurveParams,
    family: Family,
    opts: &CompareOptions<'_>,
    report: &mut Partial,
) -> Result<FamilyReport, SelmerError> {
    let fallback = match opts.oracle {
        Some(t) => Fallback::Cached(t),
        None => Fallback::Oracle(opts.depth),
    };
    let classes = params.enumerate_classes();
    let places = params.places();
    let mut in_descent = Vec::new();
    let mut in_oracle = Vec::new();
    for c in &classes {
        if selmer::in_selmer_by_tables(params, family, c, &opts.tables, fallback)? {
            in_descent.push(*c);
        }
        let Some(oracle) = opts.oracle else { continue };
        let mut everywhere = true;
        for &place in &places {
            let o = oracle.get(family, c, place)?;
            everywhere &= o;
            match opts.tables.verdict(params, family, c, place) {
                Ok(v) => {
                    report.table_checks += 1;
                    report.clauses_fired.insert(v.rule);
                    if v.rule.ends_with(".B1.m2") && family == Family::E {
                        report.m2_rule_checks += 1;
                    }
                    if v.solvable != o {
                        report.mismatches.push(Mismatch::TableOracle {
                            family,
                            class: params.class_text(c),
                            place: place.to_string(),
                            rule: v.rule,
                            table: v.solvable,
                            oracle: o,
                        });
                    }
                }
                Err(LocalError::Excluded { .. } | LocalError::UnsupportedClass { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
        if everywhere {
            in_oracle.push(*c);
        }
    }
    let eps = params.eps;
    let descent = set_or_flag(family, eps, in_descent, "descent", &mut report.mismatches);
    let oracle = opts.oracle.map(|_| set_or_flag(family, eps, in_oracle, "oracle", &mut report.mismatches));
    if let Some(o) = &oracle {
        if *o != descent {
            let (only_descent, only_other) = diff(params, &descent, o);
            report.mismatches.push(Mismatch::SetDifference {
                family,
                method: "oracle",
                only_descent,
                only_other,
            });
        }
    }

    let (graph, theorem, graph_unavailable) = match selmer::selmer_by_graph(params, family) {
        Ok(g) => {
            let t = selmer::theorem_count(params, family)?;
            (Some(g), Some(t), None)
        }
        Err(SelmerError::Graph(e)) => (None, None, Some(e)),
        Err(e) => return Err(e),
    };
    if let Some(g) = &graph {
        if g.set != descent {
            let (only_descent, only_other) = diff(params, &descent, &g.set);
            report.mismatches.push(Mismatch::SetDifference {
                family,
                method: "graph",
                only_descent,
                only_other,
            });
        }
    }
    if let Some(t) = theorem {
        if t != descent.len() as u64 {
            report.mismatches.push(Mismatch::Count {
                family,
                method: "theorem",
                descent: descent.len() as u64,
                other: t,
            });
        }
    }

    // containment and kill rules
    let value = |c: &SquareClass| params.value(c);
    match family {
        Family::E => {
            for c in &descent.classes {
                if c.has(SquareClass::P) || c.has(SquareClass::Q) {
                    report.mismatches.push(Mismatch::KillRule {
                        family,
                        class: params.class_text(c),
                    });
                }
            }
        }
        Family::EPrime => {
            let (p, q, d) = (params.p, params.q, params.d);
            let required = match eps {
                Sign::Plus => [1, p * q, -p * d, -q * d],
                Sign::Minus => [1, p * q, p * d, q * d],
            };
            for v in required {
                let c = params.class_of(v).expect("generators of Q(S,2)");
                if !descent.contains(&c) {
                    report.mismatches.push(Mismatch::Containment {
                        family,
                        class: params.class_text(&c),
                    });
                }
            }
            for c in &descent.classes {
                let bad = c.has(SquareClass::TWO) || (eps == Sign::Minus && value(c) < 0);
                if bad {
                    report.mismatches.push(Mismatch::KillRule {
                        family,
                        class: params.class_text(c),
                    });
                }
            }
        }
    }

    Ok(FamilyReport {
        family,
        descent,
        oracle,
        graph,
        theorem,
        graph_unavailable,
    })
}

#[derive(Default)]
struct Partial {
    mismatches: Vec<Mismatch>,
    table_checks: usize,
    clauses_fired: BTreeSet<Rule>,
    m2_rule_checks: usize,
}

fn holds(b: &BoundReport, s: &SelmerSet) -> bool {
    b.rho <= s.dim2 && b.witness.iter().all(|w| s.contains(w))
}

/// Runs descent, graph, theorem count and, given oracle verdicts, the
/// table-oracle comparison for both families.
pub fn compare_methods(params: &CurveParams, opts: &CompareOptions<'_>) -> Result<ComparisonReport, SelmerError> {
    if let Some(t) = opts.oracle {
        if let Some(e) = t.depth_errors().next() {
            return Err(SelmerError::Oracle(e.clone()));
        }
    }
    let mut partial = Partial::default();
    let e = check_family(params, Family::E, opts, &mut partial)?;
    let eprime = check_family(params, Family::EPrime, opts, &mut partial)?;

    let (be, bp) = selmer::bounds(params);
    let bound_e = BoundCheck {
        holds_for_e: holds(&be, &e.descent),
        holds_for_eprime: holds(&be, &eprime.descent),
        report: be,
    };
    if bound_e.report.rho > e.descent.dim2 {
        partial.mismatches.push(Mismatch::Bound {
            kind: bound_e.report.kind,
            rho: bound_e.report.rho,
            dim_e: e.descent.dim2,
            dim_eprime: eprime.descent.dim2,
        });
    }
    for w in &bound_e.report.witness {
        if !e.descent.contains(w) {
            partial.mismatches.push(Mismatch::Witness {
                kind: bound_e.report.kind,
                class: params.class_text(w),
            });
        }
    }
    let bound_eprime = bp.map(|b| BoundCheck {
        holds_for_e: holds(&b, &e.descent),
        holds_for_eprime: holds(&b, &eprime.descent),
        report: b,
    });
    if let Some(b) = &bound_eprime {
        if !b.holds_for_e && !b.holds_for_eprime {
            partial.mismatches.push(Mismatch::Bound {
                kind: b.report.kind,
                rho: b.report.rho,
                dim_e: e.descent.dim2,
                dim_eprime: eprime.descent.dim2,
            });
        }
    }

    Ok(ComparisonReport {
        params: params.clone(),
        e,
        eprime,
        bound_e,
        bound_eprime,
        mismatches: partial.mismatches,
        table_checks: partial.table_checks,
        clauses_fired: partial.clauses_fired,
        m2_rule_checks: partial.m2_rule_checks,
    })
}

/// Oracle errors reached while comparing, if any.
pub fn depth_error(err: &SelmerError) -> Option<&OracleError> {
    match err {
        SelmerError::Oracle(e) => Some(e),
        _ => None,
    }
}

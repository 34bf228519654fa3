//! Sweep-level verification: oracle caches, per-instance comparison and the
//! aggregate summary.

use std::collections::BTreeSet;

use crate::compare::{self, CompareOptions, ComparisonReport, Mismatch};
use crate::local::{Rule, Tables, CLAUSES};
use crate::model::{CurveParams, InstanceKey};
use crate::oracle::{Depth, OracleError};
use crate::selmer::{OracleTable, SelmerError};
use crate::sweep;

/// Oracle verdicts for every instance, keyed like the instances.
pub struct OracleCache {
    entries: Vec<(InstanceKey, OracleTable)>,
}

impl OracleCache {
    pub fn compute(instances: &[CurveParams], depth: Depth, jobs: Option<usize>) -> OracleCache {
        OracleCache {
            entries: sweep::run(instances, jobs, |p| OracleTable::compute(p, depth)),
        }
    }

    pub fn get(&self, key: &InstanceKey) -> Option<&OracleTable> {
        self.entries
            .binary_search_by_key(key, |(k, _)| *k)
            .ok()
            .map(|i| &self.entries[i].1)
    }
}

pub type Outcome = Result<ComparisonReport, SelmerError>;

/// Compares every instance, against the cached oracle when one is given.
pub fn verify(
    instances: &[CurveParams],
    tables: Tables,
    oracle: Option<&OracleCache>,
    depth: Depth,
    jobs: Option<usize>,
) -> Vec<(InstanceKey, Outcome)> {
    sweep::run(instances, jobs, |p| {
        let opts = CompareOptions {
            tables,
            oracle: oracle.and_then(|c| c.get(&p.key())),
            depth,
        };
        compare::compare_methods(p, &opts)
    })
}

/// Counts over a verified sweep.
#[derive(Debug, Default, Clone)]
pub struct Summary {
    pub instances: usize,
    pub agreeing: usize,
    pub table_checks: usize,
    pub mismatches: Vec<(InstanceKey, Mismatch)>,
    pub depth_errors: Vec<(InstanceKey, OracleError)>,
    pub other_errors: Vec<(InstanceKey, String)>,
    /// Instances whose graph route is unavailable, with the reason.
    pub graph_unavailable: Vec<(InstanceKey, String)>,
    pub clauses_fired: BTreeSet<Rule>,
    /// Instances where the `m = 2` even-class rule was checked.
    pub m2_rule_instances: usize,
    /// For the `E'` bounds: how many instances hold against `E`, against `E'`.
    pub eprime_bound_vs_e: usize,
    pub eprime_bound_vs_eprime: usize,
    pub eprime_bound_total: usize,
}

impl Summary {
    pub fn of(outcomes: &[(InstanceKey, Outcome)]) -> Summary {
        let mut s = Summary::default();
        for (key, outcome) in outcomes {
            s.instances += 1;
            let r = match outcome {
                Ok(r) => r,
                Err(e) => {
                    match compare::depth_error(e) {
                        Some(d) => s.depth_errors.push((*key, d.clone())),
                        None => s.other_errors.push((*key, e.to_string())),
                    }
                    continue;
                }
            };
            if r.agrees() {
                s.agreeing += 1;
            }
            s.table_checks += r.table_checks;
            s.clauses_fired.extend(r.clauses_fired.iter().copied());
            if r.m2_rule_checks > 0 {
                s.m2_rule_instances += 1;
            }
            for m in &r.mismatches {
                s.mismatches.push((*key, m.clone()));
            }
            for f in [&r.e, &r.eprime] {
                if let Some(e) = &f.graph_unavailable {
                    s.graph_unavailable.push((*key, format!("{}: {e}", f.family)));
                }
            }
            if let Some(b) = &r.bound_eprime {
                s.eprime_bound_total += 1;
                s.eprime_bound_vs_e += b.holds_for_e as usize;
                s.eprime_bound_vs_eprime += b.holds_for_eprime as usize;
            }
        }
        s
    }

    pub fn unfired_clauses(&self) -> Vec<Rule> {
        CLAUSES
            .iter()
            .copied()
            .filter(|c| !self.clauses_fired.contains(c))
            .collect()
    }

    pub fn clean(&self) -> bool {
        self.mismatches.is_empty() && self.depth_errors.is_empty() && self.other_errors.is_empty()
    }
}

//! Parameter sweeps and the instance-level work driver.
//!
//! With the `parallel` feature the driver fans instances out over a rayon
//! pool; without it, or with one job, it runs them in order. Results always
//! come back sorted by instance key.

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::model::{CurveParams, InstanceKey, Sign};

/// A rectangular family of instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// Largest `p`, inclusive.
    pub p_max: i64,
    pub m_set: Vec<u32>,
    /// Largest prime allowed in `D`, inclusive.
    pub d_prime_max: i64,
    /// Largest number of prime factors of `D`.
    pub n_max: usize,
    pub eps_set: Vec<i64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            p_max: 49,
            m_set: (1..=6).collect(),
            d_prime_max: 37,
            n_max: 2,
            eps_set: vec![1, -1],
        }
    }
}

/// A combination the generator rejected, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub eps: i64,
    pub p: i64,
    pub q: i64,
    pub d: i64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Generated {
    pub instances: Vec<CurveParams>,
    pub skipped: Vec<Skipped>,
}

impl SweepSpec {
    /// Square-free odd `D` built from at most `n_max` primes up to `d_prime_max`.
    pub fn d_values(&self) -> Vec<i64> {
        let primes: Vec<i64> = (3..=self.d_prime_max)
            .filter(|&x| arith::is_prime(x as u64))
            .collect();
        let mut out = vec![1i64];
        let mut frontier = vec![(1i64, 0usize)];
        for _ in 0..self.n_max {
            let mut next = Vec::new();
            for &(d, start) in &frontier {
                for (k, &l) in primes.iter().enumerate().skip(start) {
                    next.push((d * l, k + 1));
                    out.push(d * l);
                }
            }
            frontier = next;
        }
        out.sort_unstable();
        out
    }

    pub fn generate(&self) -> Generated {
        let mut g = Generated::default();
        let ds = self.d_values();
        for p in (3..=self.p_max).filter(|&x| arith::is_prime(x as u64)) {
            for &m in &self.m_set {
                let q = p + (1i64 << m);
                for &eps in &self.eps_set {
                    let Some(sign) = Sign::from_value(eps) else {
                        g.skipped.push(Skipped { eps, p, q, d: 0, reason: "eps must be +1 or -1".into() });
                        continue;
                    };
                    for &d in &ds {
                        match CurveParams::new(sign, p, q, d) {
                            Ok(params) => g.instances.push(params),
                            Err(e) => g.skipped.push(Skipped { eps, p, q, d, reason: e.to_string() }),
                        }
                    }
                }
            }
        }
        g.instances.sort_by_key(|x| x.key());
        g
    }
}

/// Applies `f` to every instance, returning `(key, result)` sorted by key.
///
/// `jobs = Some(1)` forces the sequential path; `None` uses every core.
pub fn run<T, F>(instances: &[CurveParams], jobs: Option<usize>, f: F) -> Vec<(InstanceKey, T)>
where
    T: Send,
    F: Fn(&CurveParams) -> T + Sync + Send,
{
    let mut out = if jobs == Some(1) {
        run_sequential(instances, &f)
    } else {
        run_parallel(instances, jobs, &f)
    };
    out.sort_by_key(|(k, _)| *k);
    out
}

pub fn run_sequential<T, F>(instances: &[CurveParams], f: &F) -> Vec<(InstanceKey, T)>
where
    F: Fn(&CurveParams) -> T,
{
    instances.iter().map(|p| (p.key(), f(p))).collect()
}

#[cfg(feature = "parallel")]
pub fn run_parallel<T, F>(instances: &[CurveParams], jobs: Option<usize>, f: &F) -> Vec<(InstanceKey, T)>
where
    T: Send,
    F: Fn(&CurveParams) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let work = || instances.par_iter().map(|p| (p.key(), f(p))).collect();
    match jobs {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(work),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn run_parallel<T, F>(instances: &[CurveParams], _jobs: Option<usize>, f: &F) -> Vec<(InstanceKey, T)>
where
    F: Fn(&CurveParams) -> T,
{
    run_sequential(instances, f)
}

use selmer_core::arith::is_prime;
use selmer_core::local::Tables;
use selmer_core::oracle::Depth;
use selmer_core::sweep::{self, SweepSpec};
use selmer_core::verify::{self, Summary};

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn default_d_values() {
    let ds = SweepSpec::default().d_values();
    // 1, 11 primes, 55 pairs
    assert_eq!(ds.len(), 67);
    assert_eq!(ds[0], 1);
    assert!(ds.contains(&(31 * 37)));
}

#[test]
fn instance_count_matches_independent_count() {
    let spec = SweepSpec { p_max: 13, m_set: vec![1, 2, 3, 4], d_prime_max: 13, n_max: 2, eps_set: vec![1, -1] };
    let primes: Vec<i64> = (3u64..=13).filter(|&x| is_prime(x)).map(|x| x as i64).collect();
    let mut ds = vec![1i64];
    for (i, &a) in primes.iter().enumerate() {
        ds.push(a);
        for &b in &primes[i + 1..] {
            ds.push(a * b);
        }
    }
    let mut expected = 0;
    for &p in &primes {
        for m in 1..=4 {
            let q = p + (1 << m);
            if !is_prime(q as u64) {
                continue;
            }
            expected += 2 * ds.iter().filter(|&&d| gcd(d, p * q) == 1).count();
        }
    }
    let g = spec.generate();
    assert_eq!(g.instances.len(), expected);
    assert!(!g.skipped.is_empty());
    let keys: Vec<_> = g.instances.iter().map(|p| p.key()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(keys, sorted);
}

#[test]
fn bad_eps_is_skipped() {
    let spec = SweepSpec { p_max: 5, m_set: vec![1], d_prime_max: 3, n_max: 0, eps_set: vec![2] };
    let g = spec.generate();
    assert!(g.instances.is_empty());
    assert!(!g.skipped.is_empty());
}

#[test]
fn sequential_and_parallel_agree() {
    let spec = SweepSpec { p_max: 7, m_set: vec![1, 2], d_prime_max: 11, n_max: 1, eps_set: vec![1, -1] };
    let inst = spec.generate().instances;
    let f = |p: &selmer_core::model::CurveParams| p.enumerate_classes().len() * p.p as usize;
    let a = sweep::run(&inst, Some(1), f);
    let b = sweep::run(&inst, None, f);
    let c = sweep::run(&inst, Some(3), f);
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn small_sweep_verifies_cleanly() {
    let spec = SweepSpec { p_max: 13, m_set: vec![1, 2, 3, 4], d_prime_max: 13, n_max: 1, eps_set: vec![1, -1] };
    let inst = spec.generate().instances;
    let cache = verify::OracleCache::compute(&inst, Depth::Auto, None);
    let out = verify::verify(&inst, Tables::default(), Some(&cache), Depth::Auto, None);
    let s = Summary::of(&out);
    assert_eq!(s.instances, inst.len());
    assert!(s.clean(), "{:?}", s.mismatches.first());
    assert!(s.table_checks > 0);
}

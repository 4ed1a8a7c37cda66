use std::collections::HashMap;

use selfpower::arith::{factorize, gcd, multiplicative_order, sieve_primes};
use selfpower::dynamics::{ks_distance_exponential, orbit_stats, sample_orbits, simulate_endo, MapId, OrbitStatistic};

fn enumerate(map: MapId, p: u64, x0: u64) -> (u64, u64) {
    let mut seen = HashMap::new();
    let (mut x, mut n) = (x0, 0u64);
    while !seen.contains_key(&x) {
        seen.insert(x, n);
        x = map.step(x, p);
        n += 1;
    }
    (seen[&x], n - seen[&x])
}

#[test]
fn brent_matches_enumeration() {
    for p in sieve_primes(2000).unwrap() {
        for map in [MapId::SelfPower, MapId::QuadPlusOne] {
            let lo = if map == MapId::SelfPower { 1 } else { 0 };
            for x0 in lo..p {
                let r = orbit_stats(map, p, x0).unwrap();
                let (tail, cycle) = enumerate(map, p, x0);
                assert_eq!((r.tail, r.cycle, r.orbit_size), (tail, cycle, tail + cycle), "{map} p={p} x0={x0}");
            }
        }
    }
}

#[test]
fn self_power_stays_in_generated_subgroup() {
    for p in sieve_primes(2000).unwrap().into_iter().filter(|&p| p > 2) {
        let pm1 = factorize(p - 1);
        for x in 1..p {
            let y = MapId::SelfPower.step(x, p);
            let (ox, oy) = (multiplicative_order(x, p, &pm1).unwrap(), multiplicative_order(y, p, &pm1).unwrap());
            assert_eq!(ox % oy, 0);
            assert_eq!(oy, ox / gcd(ox, x));
        }
    }
}

#[test]
fn quad_baseline_is_exponential() {
    let recs = sample_orbits(MapId::QuadPlusOne, 850_000, 1_000_000, 1, 0).unwrap();
    assert!(recs.len() >= 10_000);
    let v: Vec<f64> = recs.iter().map(|r| OrbitStatistic::BirthdayScaled.apply(r)).collect();
    let ks = ks_distance_exponential(&v);
    println!("KS distance to Exp(1): {ks:.4} over {} primes", v.len());
    assert!(ks < 0.15);
}

#[test]
fn endo_orders_only_shrink() {
    let (summary, runs) = simulate_endo(1009, 8, 2000, None, 1).unwrap();
    assert_eq!(summary.trials, 2000);
    for r in &runs {
        assert_eq!(r.initial_order % r.final_order, 0);
        let pm1 = factorize(1008);
        assert_eq!(multiplicative_order(r.final_element, 1009, &pm1).unwrap(), r.final_order);
    }
    assert!(summary.mean_final_order <= summary.mean_initial_order);
}

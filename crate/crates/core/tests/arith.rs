use proptest::prelude::*;

use selfpower::arith::{
    factorize, gcd, is_prime, is_qth_power_residue, legendre_symbol, mod_pow, mul_mod, multiplicative_order,
    sieve_primes, Factorizer, FactoredInteger, PrimeSegments,
};

#[test]
fn fermat_up_to_ten_thousand() {
    for p in sieve_primes(10_000).unwrap() {
        for a in 1..p {
            assert_eq!(mod_pow(a, p - 1, p), 1, "a = {a}, p = {p}");
        }
    }
}

#[test]
fn phi_and_divisors_match_enumeration() {
    for n in 1..=10_000u64 {
        let f = factorize(n);
        let phi = (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64;
        assert_eq!(f.euler_phi(), phi, "phi({n})");
        let divs: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
        assert_eq!(f.divisors().unwrap(), divs, "divisors({n})");
        assert_eq!(f.tau(), divs.len() as u64);
    }
}

#[test]
fn legendre_balance() {
    for p in sieve_primes(1000).unwrap().into_iter().filter(|&p| p > 2) {
        let plus = (1..p).filter(|&a| legendre_symbol(a, p) == 1).count() as u64;
        let minus = (1..p).filter(|&a| legendre_symbol(a, p) == -1).count() as u64;
        assert_eq!((plus, minus), ((p - 1) / 2, (p - 1) / 2), "p = {p}");
    }
}

#[test]
fn qth_residues_match_image_of_power_map() {
    for p in sieve_primes(500).unwrap().into_iter().filter(|&p| p > 2) {
        for &(q, _) in factorize(p - 1).factors() {
            let mut image = vec![false; p as usize];
            for x in 1..p {
                image[mod_pow(x, q, p) as usize] = true;
            }
            for a in 1..p {
                assert_eq!(is_qth_power_residue(a, p, q).unwrap(), image[a as usize], "a={a} p={p} q={q}");
            }
        }
    }
}

#[test]
fn orders_are_exact() {
    for p in sieve_primes(2000).unwrap() {
        let pm1 = factorize(p - 1);
        for a in 1..p {
            let o = multiplicative_order(a, p, &pm1).unwrap();
            assert_eq!((p - 1) % o, 0);
            assert_eq!(mod_pow(a, o, p), 1);
            for &(l, _) in factorize(o).factors() {
                assert_ne!(mod_pow(a, o / l, p), 1, "a={a} p={p}");
            }
        }
    }
}

#[test]
fn segmented_sieve_matches_primality_test() {
    let primes: Vec<u64> = PrimeSegments::new(2, 200_000, 4099).flatten_primes().collect();
    let direct: Vec<u64> = (2..=200_000).filter(|&n| is_prime(n)).collect();
    assert_eq!(primes, direct);
    assert_eq!(sieve_primes(1_000_000).unwrap().len(), 78_498);
}

proptest! {
    #[test]
    fn factorization_round_trips(n in 1u64..=u32::MAX as u64) {
        let f = factorize(n);
        let product: u64 = f.factors().iter().map(|&(p, e)| p.pow(e)).product();
        prop_assert_eq!(product, n);
        prop_assert!(f.factors().iter().all(|&(p, _)| is_prime(p)));
        prop_assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert!(FactoredInteger::from_factors(n, f.factors().to_vec()).is_ok());
    }

    #[test]
    fn table_factorizer_agrees(n in 1u64..5_000_000) {
        let fac = Factorizer::new(5_000_000);
        prop_assert_eq!(fac.factorize(n), factorize(n));
    }

    #[test]
    fn wide_mul_mod_is_exact(a: u64, b: u64, m in 1u64..) {
        prop_assert_eq!(mul_mod(a % m, b % m, m) as u128, (a % m) as u128 * (b % m) as u128 % m as u128);
    }
}

//! One runner per subcommand.

use anyhow::Result;
use rayon::prelude::*;
use serde_json::{json, Value};

use selfpower::arith::{factorize, is_prime, DEFAULT_SIEVE_BUDGET};
use selfpower::dynamics::{endo_trial, ks_distance_exponential, orbits_for_prime, Histogram, MapId, OrbitStatistic};
use selfpower::fixedpoints::{census_record, count_fixed_points, count_power_congruence};
use selfpower::heuristics::{an_lower_bound, prime_heuristics, PredictionRow, TableAccumulator};
use selfpower::interp::{interpolate, qnr_census, Convention, DEFAULT_INTERP_BUDGET};
use selfpower::linforms::{
    cq_exact_with, cq_monte_carlo, cq_upper_bound_estimate, CqEstimate, LinearFormSystem, DEFAULT_EXACT_BUDGET,
};
use selfpower::Error;

use crate::args::{CensusArgs, CqArgs, CqMethodChoice, EndoArgs, HeuristicsArgs, InterpArgs, MapChoice, OrbitsArgs, TfpArgs};
use crate::output::Cell;
use crate::run::{factorizer, field, prime_chunks, usage, Run, PRIMES_PER_CHUNK};

fn scan_limit(run: &Run, n_max: u64) -> Result<()> {
    let budget = run.budget.unwrap_or(DEFAULT_SIEVE_BUDGET);
    if n_max > budget {
        return Err(Error::Resource {
            what: "prime scan",
            requested: n_max as u128,
            budget: budget as u128,
            hint: "; raise SELFPOWER_BUDGET to scan further",
        }
        .into());
    }
    Ok(())
}

/// `n_max` and thresholds, each defaulting to the other.
fn range_and_thresholds(n_max: Option<u64>, thresholds: Option<&[u64]>) -> Result<(u64, Vec<u64>)> {
    match (n_max, thresholds) {
        (Some(n), Some(t)) => Ok((n.max(*t.last().unwrap()), t.to_vec())),
        (Some(n), None) => Ok((n, vec![n])),
        (None, Some(t)) => Ok((*t.last().unwrap(), t.to_vec())),
        (None, None) => Err(usage("give --n-max or --thresholds")),
    }
}

fn table_rows(rows: &[PredictionRow]) -> Vec<Vec<Cell>> {
    rows.iter()
        .map(|r| {
            vec![
                Cell::Int(r.n),
                Cell::Int(r.observed),
                Cell::Fixed(r.predicted, 1),
                Cell::Fixed(r.relative_error, 4),
            ]
        })
        .collect()
}

const TABLE_COLUMNS: [&str; 4] = ["N", "observed", "predicted", "relative_error"];

pub fn census(args: &CensusArgs, run: &mut Run) -> Result<Value> {
    let (n_max, thresholds) = range_and_thresholds(args.n_max, args.thresholds.as_ref().map(|t| &t.0[..]))?;
    scan_limit(run, n_max)?;
    let fac = factorizer(n_max);
    let units = prime_chunks(2, n_max, run.segment, PRIMES_PER_CHUNK);
    let image_limit = args.image_limit;

    let mut acc = TableAccumulator::new(thresholds);
    let (mut primes, mut in_a, mut special, mut special_violations) = (0u64, 0u64, 0u64, 0u64);
    run.stream(
        "census",
        &["p", "F", "in_A", "special", "image_size", "collision_count"],
        units,
        |&p| {
            let rec = census_record(p, &fac.factorize(p - 1), image_limit);
            let (size, coll) = match rec.image {
                Some(im) => (Cell::Int(im.image_size), Cell::Int(im.collision_count)),
                None => (Cell::Empty, Cell::Empty),
            };
            Ok(vec![vec![
                Cell::Int(p),
                Cell::Int(rec.fixed_point_count),
                Cell::Bool(rec.in_a),
                Cell::Bool(rec.special),
                size,
                coll,
            ]])
        },
        |f| {
            let p: u64 = field(f, 0, "p")?;
            let count: u64 = field(f, 1, "F")?;
            let is_special: bool = field(f, 3, "special")?;
            primes += 1;
            in_a += (count == 1) as u64;
            special += is_special as u64;
            special_violations += (is_special && count != 1) as u64;
            acc.push(p, count, &prime_heuristics(p, &fac.factorize(p - 1)));
            Ok(())
        },
    )?;

    let tables = acc.finish();
    run.write_table("table_no_fixed_points", &TABLE_COLUMNS, &table_rows(&tables.no_fixed_points))?;
    run.write_table("table_total_fixed_points", &TABLE_COLUMNS, &table_rows(&tables.total_fixed_points))?;
    for r in &tables.no_fixed_points {
        println!("no_fixed_points,{}", r.csv_line());
    }
    for r in &tables.total_fixed_points {
        println!("total_fixed_points,{}", r.csv_line());
    }
    Ok(json!({
        "primes": primes,
        "in_a": in_a,
        "special_primes": special,
        "special_primes_with_nontrivial_fixed_point": special_violations,
    }))
}

pub fn heuristics(args: &HeuristicsArgs, run: &mut Run) -> Result<Value> {
    let (n_max, thresholds) = range_and_thresholds(args.n_max, args.thresholds.as_ref().map(|t| &t.0[..]))?;
    scan_limit(run, n_max)?;
    let fac = factorizer(n_max);
    let units = prime_chunks(2, n_max, run.segment, PRIMES_PER_CHUNK);

    let mut sums = (0.0f64, 0.0f64, 0.0f64);
    let mut next = 0;
    let mut rows = Vec::new();
    let close = |upto: u64, next: &mut usize, sums: (f64, f64, f64), rows: &mut Vec<Vec<Cell>>| {
        while *next < thresholds.len() && thresholds[*next] < upto {
            let n = thresholds[*next];
            rows.push(vec![
                Cell::Int(n),
                Cell::Float(sums.0),
                Cell::Float(sums.1),
                Cell::Float(sums.2),
                Cell::Float(an_lower_bound(n as f64)),
            ]);
            *next += 1;
        }
    };
    run.stream(
        "delta",
        &["p", "tau", "delta", "no_fixed_point_probability", "expected_nontrivial", "divisor_density"],
        units,
        |&p| {
            let pm1 = fac.factorize(p - 1);
            let h = prime_heuristics(p, &pm1);
            Ok(vec![vec![
                Cell::Int(p),
                Cell::Int(pm1.tau()),
                Cell::Float(h.delta),
                Cell::Float(h.no_fixed_point_probability),
                Cell::Float(h.expected_nontrivial),
                Cell::Float(h.divisor_density),
            ]])
        },
        |f| {
            let p: u64 = field(f, 0, "p")?;
            close(p, &mut next, sums, &mut rows);
            sums.0 += field::<f64>(f, 3, "no_fixed_point_probability")?;
            sums.1 += field::<f64>(f, 5, "divisor_density")?;
            sums.2 += field::<f64>(f, 4, "expected_nontrivial")?;
            Ok(())
        },
    )?;
    close(u64::MAX, &mut next, sums, &mut rows);
    run.write_table("heuristics", &["N", "H", "K", "K_expected", "an_lower_bound"], &rows)?;
    Ok(json!({ "thresholds": thresholds.len() }))
}

const ORBIT_STATISTICS: [OrbitStatistic; 3] = [
    OrbitStatistic::LogRatio,
    OrbitStatistic::SqrtNormalized,
    OrbitStatistic::BirthdayScaled,
];

pub fn orbits(args: &OrbitsArgs, run: &mut Run) -> Result<Value> {
    if args.per_prime_starts == 0 {
        return Err(usage("--per-prime-starts must be at least 1"));
    }
    if args.bins == 0 {
        return Err(usage("--bins must be at least 1"));
    }
    scan_limit(run, args.n_max)?;
    let maps = match args.map {
        MapChoice::SelfPower => vec![MapId::SelfPower],
        MapChoice::Quad => vec![MapId::QuadPlusOne],
        MapChoice::Both => vec![MapId::SelfPower, MapId::QuadPlusOne],
    };
    let mut summary = serde_json::Map::new();
    for map in maps {
        let units = prime_chunks(args.n_min.max(3), args.n_max, run.segment, PRIMES_PER_CHUNK);
        let (starts, seed) = (args.per_prime_starts, run.seed);
        let mut values: Vec<Vec<f64>> = vec![Vec::new(); ORBIT_STATISTICS.len()];
        run.stream(
            &format!("orbits_{}", map.name()),
            &["map", "p", "x0", "tail", "cycle", "orbit_size"],
            units,
            |&p| {
                Ok(orbits_for_prime(map, p, starts, seed)
                    .into_iter()
                    .map(|r| {
                        vec![
                            Cell::Str(map.name().to_string()),
                            Cell::Int(r.p),
                            Cell::Int(r.x0),
                            Cell::Int(r.tail),
                            Cell::Int(r.cycle),
                            Cell::Int(r.orbit_size),
                        ]
                    })
                    .collect())
            },
            |f| {
                let rec = selfpower::dynamics::OrbitRecord {
                    map,
                    p: field(f, 1, "p")?,
                    x0: field(f, 2, "x0")?,
                    tail: field(f, 3, "tail")?,
                    cycle: field(f, 4, "cycle")?,
                    orbit_size: field(f, 5, "orbit_size")?,
                };
                for (stat, v) in ORBIT_STATISTICS.iter().zip(values.iter_mut()) {
                    v.push(stat.apply(&rec));
                }
                Ok(())
            },
        )?;
        if values[0].is_empty() {
            return Err(usage(format!("no primes in [{}, {}]", args.n_min, args.n_max)));
        }

        let mut map_summary = serde_json::Map::new();
        for (stat, v) in ORBIT_STATISTICS.iter().zip(&values) {
            let (lo, hi) = stat.default_range();
            let h = Histogram::from_values(stat.name(), v, args.bins, lo, hi)?;
            let stem = format!("hist_{}_{}", map.name(), stat.name());
            let rows: Vec<Vec<Cell>> = h
                .counts
                .iter()
                .enumerate()
                .map(|(i, &c)| vec![Cell::Float(h.bin_edges[i]), Cell::Float(h.bin_edges[i + 1]), Cell::Int(c)])
                .collect();
            run.write_table(&stem, &["bin_lo", "bin_hi", "count"], &rows)?;
            let mut sidecar = json!({
                "statistic": stat.name(),
                "map": map.name(),
                "sample_count": h.sample_count,
                "fitted_mean": h.fitted_mean,
                "fitted_variance": h.fitted_variance,
                "seed": run.seed,
                "bins": args.bins,
                "range": [lo, hi],
            });
            if *stat == OrbitStatistic::BirthdayScaled {
                sidecar["ks_distance_exp1"] = json!(ks_distance_exponential(v));
            }
            run.write_json(&format!("{stem}.json"), &sidecar)?;
            map_summary.insert(stat.name().to_string(), json!(h.fitted_mean));
        }
        summary.insert(map.name().to_string(), Value::Object(map_summary));
    }
    Ok(Value::Object(summary))
}

const ENDO_CHUNK: u64 = 1 << 16;

pub fn endo(args: &EndoArgs, run: &mut Run) -> Result<Value> {
    let p = args.p;
    if p < 3 || !is_prime(p) {
        return Err(usage(format!("--p {p} is not an odd prime")));
    }
    if let Some(x0) = args.x0 {
        if x0 == 0 || x0 >= p {
            return Err(usage(format!("--x0 must lie in [1, {}]", p - 1)));
        }
    }
    let pm1 = factorize(p - 1);
    let qs: Vec<u64> = pm1.factors().iter().map(|&(q, _)| q).collect();
    let units: Vec<Vec<u64>> = (0..args.samples.div_ceil(ENDO_CHUNK))
        .map(|c| (c * ENDO_CHUNK..((c + 1) * ENDO_CHUNK).min(args.samples)).collect())
        .collect();

    let (mut eligible, mut survived) = (vec![0u64; qs.len()], vec![0u64; qs.len()]);
    let (mut sum_initial, mut sum_final, mut trials) = (0.0f64, 0.0f64, 0u64);
    let (steps, x0, seed) = (args.steps, args.x0, run.seed);
    run.stream(
        "endo",
        &["trial", "x0", "initial_order", "final_order", "final_element"],
        units,
        |&t| {
            let r = endo_trial(p, &pm1, steps, x0, seed, t)?;
            Ok(vec![vec![
                Cell::Int(t),
                Cell::Int(r.x0),
                Cell::Int(r.initial_order),
                Cell::Int(r.final_order),
                Cell::Int(r.final_element),
            ]])
        },
        |f| {
            let initial: u64 = field(f, 2, "initial_order")?;
            let fin: u64 = field(f, 3, "final_order")?;
            trials += 1;
            sum_initial += initial as f64;
            sum_final += fin as f64;
            for (i, &q) in qs.iter().enumerate() {
                if initial % q == 0 {
                    eligible[i] += 1;
                    survived[i] += (fin % q == 0) as u64;
                }
            }
            Ok(())
        },
    )?;

    let mut rows = Vec::new();
    let mut survival = Vec::new();
    for (i, &q) in qs.iter().enumerate() {
        let n = eligible[i].max(1) as f64;
        let freq = survived[i] as f64 / n;
        let stderr = (freq * (1.0 - freq) / n).sqrt();
        let predicted = (1.0 - 1.0 / q as f64).powi(args.steps as i32);
        rows.push(vec![
            Cell::Int(q),
            Cell::Int(eligible[i]),
            Cell::Int(survived[i]),
            Cell::Float(freq),
            Cell::Float(stderr),
            Cell::Float(predicted),
        ]);
        survival.push(json!({ "q": q, "eligible": eligible[i], "survived": survived[i],
            "frequency": freq, "stderr": stderr, "predicted": predicted }));
    }
    run.write_table("endo_survival", &["q", "eligible", "survived", "frequency", "stderr", "predicted"], &rows)?;
    let n = trials.max(1) as f64;
    let summary = json!({
        "p": p,
        "steps": args.steps,
        "trials": trials,
        "seed": run.seed,
        "x0": args.x0,
        "mean_initial_order": sum_initial / n,
        "mean_final_order": sum_final / n,
        "survival": survival,
    });
    run.write_json("endo_summary.json", &summary)?;
    Ok(summary)
}

pub fn cq(args: &CqArgs, run: &mut Run) -> Result<Value> {
    let budget = run.budget.unwrap_or(DEFAULT_EXACT_BUDGET);
    let mut estimates: Vec<CqEstimate> = Vec::new();
    for &q in &args.q.0 {
        let sys = LinearFormSystem::new(q).map_err(|e| usage(format!("--q: {e}")))?;
        let (seed, x0, samples) = (run.seed, args.x0, args.samples);
        let feasible = (q as u128).checked_pow(sys.dimension() as u32).is_some_and(|t| t <= budget as u128);
        match args.method {
            CqMethodChoice::Exact => estimates.push(cq_exact_with(q, x0, budget)?),
            CqMethodChoice::MonteCarlo => estimates.push(cq_monte_carlo(q, x0, samples, seed)?),
            CqMethodChoice::UpperBound => estimates.push(cq_upper_bound_estimate(q, x0)?),
            CqMethodChoice::Auto => {
                estimates.push(if feasible {
                    cq_exact_with(q, x0, budget)?
                } else {
                    cq_monte_carlo(q, x0, samples, seed)?
                });
                estimates.push(cq_upper_bound_estimate(q, x0)?);
            }
        }
    }
    let rows: Vec<Vec<Cell>> = estimates
        .iter()
        .map(|e| {
            vec![
                Cell::Int(e.q),
                Cell::Int(e.d as u64),
                Cell::Int(e.x0),
                Cell::Str(e.method.to_string()),
                Cell::Float(e.value),
                Cell::Int(e.hits),
                Cell::Int(e.trials),
                Cell::Float(e.stderr),
            ]
        })
        .collect();
    run.write_table("cq", &["q", "d", "x0", "method", "value", "hits", "trials", "stderr"], &rows)?;
    for e in &estimates {
        println!("{}", e.csv_line());
    }
    Ok(json!({ "rows": estimates.len(), "theta": selfpower::linforms::theta_constant() }))
}

pub fn interp(args: &InterpArgs, run: &mut Run) -> Result<Value> {
    let budget = run.budget.unwrap_or(DEFAULT_INTERP_BUDGET);
    if args.n_max > budget {
        return Err(Error::Resource {
            what: "interpolation range",
            requested: args.n_max as u128,
            budget: budget as u128,
            hint: "; raise SELFPOWER_BUDGET to interpolate larger primes",
        }
        .into());
    }
    // the Newton table is quadratic in p, so chunks stay small
    let units = prime_chunks(args.n_min.max(2), args.n_max, run.segment, 16);
    let (mut rows, mut rule_failures) = (0u64, 0u64);
    run.stream(
        "interp",
        &["p", "convention", "degree", "degree_over_sqrt_p", "qnr_count", "qnr_deviation", "qnr_rule_holds"],
        units,
        |&p| {
            let (count, holds) = if p > 2 { qnr_census(p) } else { (0, true) };
            [Convention::Domain1ToPm1, Convention::DomainFullWithZero]
                .par_iter()
                .map(|&conv| {
                    let degree = interpolate(p, conv, budget)?.degree() as u64;
                    Ok(vec![
                        Cell::Int(p),
                        Cell::Str(conv.name().to_string()),
                        Cell::Int(degree),
                        Cell::Float(degree as f64 / (p as f64).sqrt()),
                        Cell::Int(count),
                        Cell::Float(count as f64 - p as f64 / 4.0),
                        Cell::Bool(holds),
                    ])
                })
                .collect()
        },
        |f| {
            rows += 1;
            rule_failures += (!field::<bool>(f, 6, "qnr_rule_holds")?) as u64;
            Ok(())
        },
    )?;
    Ok(json!({ "rows": rows, "qnr_rule_failures": rule_failures / 2 }))
}

pub fn tfp(args: &TfpArgs, run: &mut Run) -> Result<Value> {
    scan_limit(run, args.n_max)?;
    let units = prime_chunks(args.n_min.max(2), args.n_max, run.segment, PRIMES_PER_CHUNK);
    let poly = args.poly.clone();
    let mut primes = 0u64;
    run.stream(
        "tfp",
        &["p", "count", "fixed_points"],
        units,
        |&p| {
            Ok(vec![vec![
                Cell::Int(p),
                Cell::Int(count_power_congruence(p, &poly)),
                Cell::Int(count_fixed_points(p)),
            ]])
        },
        |_| {
            primes += 1;
            Ok(())
        },
    )?;
    Ok(json!({ "primes": primes, "poly": args.poly }))
}

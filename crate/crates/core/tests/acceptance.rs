//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use isodag_core::classify::{expected_tree_dag_count, ClassifyMode, ClassifyOptions};
use isodag_core::dag::all_dags;
use isodag_core::field::is_prime;
use isodag_core::isodag::{choose_params_for, DEFAULT_SEED};
use isodag_core::*;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

type Check = std::result::Result<String, String>;

fn run(id: u32, title: &str, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = f();
    let secs = start.elapsed().as_secs_f64();
    match &outcome {
        Ok(detail) => println!("PASS [{id}] {title}: {detail} ({secs:.2}s)"),
        Err(detail) => println!("FAIL [{id}] {title}: {detail} ({secs:.2}s)"),
    }
    outcome.is_ok()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn three_node_classes() -> Check {
    let chain = Dag::new(3, [(0, 1), (1, 2)]).unwrap();
    let fork = Dag::new(3, [(0, 1), (0, 2)]).unwrap();
    let collider = Dag::new(3, [(0, 2), (1, 2)]).unwrap();
    let start = Instant::now();
    let ask = |a: &Dag, b: &Dag| {
        let p = IsoParams::for_pair(a, b, PrimeField::default(), 5, DEFAULT_SEED).map_err(err)?;
        isodag_test(a, b, &p).map_err(err)
    };
    let cf = ask(&chain, &fork)?;
    let cc = ask(&chain, &collider)?;
    let fc = ask(&fork, &collider)?;
    let elapsed = start.elapsed();
    ensure(cf.is_yes(), || "chain/fork answered no".into())?;
    ensure(!cc.is_yes(), || "chain/collider answered yes".into())?;
    ensure(!fc.is_yes(), || "fork/collider answered yes".into())?;
    let again = ask(&chain, &fork)?;
    ensure(again == cf, || "repeat run with the same seed differs".into())?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "chain~fork yes (bound {:.3e}), chain/collider no, fork/collider no",
        cf.failure_bound.approx()
    ))
}

fn tree_classification() -> Check {
    let start = Instant::now();
    let mut counts = Vec::new();
    for n in 1..=6 {
        let r = classify_trees(n, &ClassifyOptions::new(ClassifyMode::CrossCheck)).map_err(err)?;
        ensure(r.total_dags == expected_tree_dag_count(n), || {
            format!("n={n}: {} DAGs", r.total_dags)
        })?;
        counts.push(r.class_count);
    }
    let cross = start.elapsed();
    ensure(counts == [1, 1, 2, 5, 14, 42], || format!("counts {counts:?}"))?;
    ensure(cross < Duration::from_secs(300), || {
        format!("cross-check took {cross:?}")
    })?;
    let seven = classify_trees(7, &ClassifyOptions::new(ClassifyMode::Oracle)).map_err(err)?;
    ensure(seven.class_count == 142, || format!("n=7 gave {}", seven.class_count))?;
    Ok(format!(
        "cross-check {counts:?} in {:.1}s; n=7 oracle gives 142",
        cross.as_secs_f64()
    ))
}

struct PairStats {
    pairs: usize,
    iso_yes: usize,
    equiv_yes: usize,
    worst_bound: f64,
}

fn compare_pair(
    g: &Dag,
    h: &Dag,
    eps: &BigRational,
    seed: u64,
    stats: &mut PairStats,
) -> std::result::Result<(), String> {
    let edges = g.edge_count().max(h.edge_count());
    let iso_params = choose_params_for(g.n(), edges, eps, true).map_err(err)?.with_seed(seed);
    let eq_params = choose_params_for(g.n(), edges, eps, false)
        .map_err(err)?
        .with_seed(seed);
    let (pg, ph) = (pattern(g), pattern(h));
    let iso = isodag_test(g, h, &iso_params).map_err(err)?;
    ensure(iso.is_yes() == pattern_isomorphic(&pg, &ph).is_some(), || {
        format!("isodag disagrees on {g:?} / {h:?}")
    })?;
    let eq = equiv_randomized(g, h, &eq_params).map_err(err)?;
    ensure(eq.is_yes() == (pg == ph), || {
        format!("equiv disagrees on {g:?} / {h:?}")
    })?;
    for v in [&iso, &eq] {
        if v.is_yes() {
            ensure(&v.failure_bound.value < eps, || {
                format!("bound {} on {g:?} / {h:?}", v.failure_bound.approx())
            })?;
            stats.worst_bound = stats.worst_bound.max(v.failure_bound.approx());
        }
    }
    stats.pairs += 1;
    stats.iso_yes += usize::from(iso.is_yes());
    stats.equiv_yes += usize::from(eq.is_yes());
    Ok(())
}

fn oracle_agreement() -> Check {
    let eps = BigRational::new(1.into(), 1_000_000_000.into());
    let mut stats = PairStats {
        pairs: 0,
        iso_yes: 0,
        equiv_yes: 0,
        worst_bound: 0.0,
    };
    let three = all_dags(3).map_err(err)?;
    for (a, g) in three.iter().enumerate() {
        for (b, h) in three.iter().enumerate() {
            compare_pair(g, h, &eps, (a * 25 + b) as u64, &mut stats)?;
        }
    }
    // Random pairs: a third independent, a third relabeled members of the
    // same equivalence class, a third members of the same class.
    let mut classes: HashMap<usize, Vec<Vec<Dag>>> = HashMap::new();
    for n in [4, 5] {
        let mut by_pattern: HashMap<Pattern, Vec<Dag>> = HashMap::new();
        for g in all_dags(n).map_err(err)? {
            by_pattern.entry(pattern(&g)).or_default().push(g);
        }
        classes.insert(n, by_pattern.into_values().collect());
    }
    let mut r = common::rng(2024);
    for k in 0..10_000u64 {
        let n = if k % 2 == 0 { 4 } else { 5 };
        let g = common::random_dag(n, r.gen());
        let h = match k % 3 {
            0 => common::random_dag(n, r.gen()),
            kind => {
                let class = classes[&n]
                    .iter()
                    .find(|c| c.contains(&g))
                    .expect("every DAG has a class");
                let member = class.choose(&mut r).unwrap().clone();
                if kind == 1 {
                    member
                        .apply_permutation(&common::random_permutation(n, &mut r))
                        .unwrap()
                } else {
                    member
                }
            }
        };
        compare_pair(&g, &h, &eps, 1_000 + k, &mut stats)?;
    }
    Ok(format!(
        "{} pairs, 0 disagreements ({} isomorphic, {} equivalent), worst yes-bound {:.2e}",
        stats.pairs, stats.iso_yes, stats.equiv_yes, stats.worst_bound
    ))
}

fn sampler_invariants() -> Check {
    let f = PrimeField::default();
    let mut points = 0;
    let mut sems = 0;
    for k in 0..100u64 {
        let n = 1 + (k as usize % 8);
        let g = common::random_dag(n, 77 + k);
        for seed in 0..100u64 {
            let z = sample_point(&g, &f, &mut common::rng(seed)).map_err(err)?;
            ensure(on_variety(&z, &g).map_err(err)?, || {
                format!("sample off the variety for {g:?}, seed {seed}")
            })?;
            ensure(z.all_principal_minors_nonzero().map_err(err)?, || {
                format!("vanishing principal minor for {g:?}, seed {seed}")
            })?;
            points += 1;
        }
        for seed in 0..5u64 {
            let sigma = sem_covariance(&SemParams::random(g.clone(), 10, &mut common::rng(seed)));
            ensure(on_variety(&sigma, &g).map_err(err)?, || {
                format!("SEM covariance off the variety for {g:?}")
            })?;
            sems += 1;
        }
    }
    Ok(format!("{points} sampled points, {sems} exact SEM covariances"))
}

fn example_five() -> Check {
    let g = Dag::new(4, [(0, 1), (1, 2), (1, 3), (2, 3)]).unwrap();
    let minors = imposed_minors(&g);
    let rendered: Vec<String> = minors.iter().map(MinorSpec::render_one_based).collect();
    ensure(rendered == ["|σ_{32,12}|", "|σ_{423,123}|"], || {
        format!("got {rendered:?}")
    })?;
    // The same determinants written with rows and columns exchanged and
    // the conditioning set moved.
    let reference = [
        MinorSpec {
            rows: vec![0, 1],
            cols: vec![1, 2],
        },
        MinorSpec {
            rows: vec![0, 1, 2],
            cols: vec![3, 1, 2],
        },
    ];
    let ours: Vec<_> = minors.iter().map(MinorSpec::unordered_key).collect();
    let theirs: Vec<_> = reference.iter().map(MinorSpec::unordered_key).collect();
    ensure(ours == theirs, || format!("{ours:?} vs {theirs:?}"))?;
    let reference_text: Vec<String> = reference.iter().map(MinorSpec::render_one_based).collect();
    Ok(format!(
        "{} = {} up to transpose",
        rendered.join(", "),
        reference_text.join(", ")
    ))
}

fn singular_ci() -> Check {
    let rows = vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1], vec![1, 0, 1, 0], vec![0, 1, 0, 1]];
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(|x| Rationals.of_i64(x)).collect())
        .collect();
    let sigma = SymMatrix::from_rows(Rationals, rows).map_err(err)?;
    let a = gaussian_ci(&sigma, &[0], &[2], &[1, 3]).map_err(err)?;
    let b = gaussian_ci(&sigma, &[0], &[1], &[]).map_err(err)?;
    ensure(!a, || "0 ⊥⊥ 2 | {1,3} reported as holding".into())?;
    ensure(b, || "0 ⊥⊥ 1 reported as failing".into())?;
    Ok("0 ⊥⊥ 2 | {1,3} false, 0 ⊥⊥ 1 true".into())
}

fn next_prime(mut q: u64) -> u64 {
    q += 1;
    while !is_prime(q) {
        q += 1;
    }
    q
}

fn bound_formula() -> Check {
    let b = failure_bound(3, 2, 101, 1, true).map_err(err)?;
    ensure(b.value == BigRational::new(4.into(), 11.into()), || {
        format!("got {}", b.value)
    })?;
    let mut r = common::rng(5);
    let mut tuples = 0;
    while tuples < 100 {
        let n = r.gen_range(1..=7usize);
        let d = r.gen_range(1..=100u64);
        let q = next_prime(r.gen_range(1_000..2_000_000_000u64));
        let m = r.gen_range(1..=6u32);
        let base = failure_bound(n, d, q, m, true).map_err(err)?;
        if base.is_vacuous() {
            continue;
        }
        let more_rounds = failure_bound(n, d, q, m + 1, true).map_err(err)?;
        let bigger_q = failure_bound(n, d, next_prime(q), m, true).map_err(err)?;
        ensure(more_rounds.value < base.value, || {
            format!("not decreasing in m at {n},{d},{q},{m}")
        })?;
        ensure(bigger_q.value < base.value, || {
            format!("not decreasing in q at {n},{d},{q},{m}")
        })?;
        tuples += 1;
    }
    Ok(format!(
        "4/11 exact; strictly decreasing in q and m over {tuples} tuples"
    ))
}

/// Reverse one covered edge (`pa(v) = pa(u) ∪ {u}`) to get a distinct
/// Markov-equivalent graph.
fn covered_reversal(g: &Dag) -> Dag {
    for &(u, v) in g.edges() {
        let mut expect: Vec<usize> = g.parents(u).to_vec();
        expect.push(u);
        expect.sort_unstable();
        if g.parents(v) == expect.as_slice() {
            let edges = g.edges().iter().map(|&e| if e == (u, v) { (v, u) } else { e });
            return Dag::new(g.n(), edges).expect("reversing a covered edge keeps the graph acyclic");
        }
    }
    g.clone()
}

fn scaling() -> Check {
    let eps = BigRational::new(1.into(), 1_000_000_000.into());
    let mut samples = Vec::new();
    let mut r = common::rng(8);
    for n in [50usize, 100, 200] {
        let g = Dag::random_with_edges(n, 2 * n, &mut r).map_err(err)?;
        let h = covered_reversal(&g);
        let params = choose_params_for(n, 2 * n, &eps, false).map_err(err)?;
        let mut best = f64::INFINITY;
        for _ in 0..3 {
            let start = Instant::now();
            let v = equiv_randomized(&g, &h, &params).map_err(err)?;
            let t = start.elapsed();
            ensure(v.is_yes(), || format!("n={n}: Markov-equivalent pair rejected"))?;
            ensure(t < Duration::from_secs(5), || format!("n={n} took {t:?}"))?;
            best = best.min(t.as_secs_f64());
        }
        samples.push((n as f64, best));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.max(1e-6).ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    ensure(slope <= 4.5, || format!("log-log slope {slope:.2}"))?;
    let times: Vec<String> = samples.iter().map(|(n, t)| format!("n={n}: {:.3}s", t)).collect();
    Ok(format!("{}; slope {slope:.2}", times.join(", ")))
}

fn main() {
    let results = [
        run(1, "three-node classes", three_node_classes),
        run(2, "tree classification", tree_classification),
        run(3, "agreement with the pattern oracle", oracle_agreement),
        run(4, "sampler and variety invariants", sampler_invariants),
        run(5, "four-node imposed minors", example_five),
        run(6, "singular conditional independence", singular_ci),
        run(7, "failure bound formula", bound_formula),
        run(8, "equivalence test scaling", scaling),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

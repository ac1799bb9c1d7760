//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p scdkit-cli --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use scdkit::bounds::{
    lemma3_bounds, lemma8_lower, ln_biguint, theorem1_bounds, theorem1_headline_gap,
};
use scdkit::counting::{count_threelevel_direct, for_each_threelevel_scd_direct, sample_many};
use scdkit::gadget::gadget_support;
use scdkit::permanent::{
    bregman_upper, count_perfect_matchings, for_each_perfect_matching, permanent_dp,
    permanent_naive, permanent_rational, Bigraph, SquareMatrix,
};
use scdkit::scd::Chain;
use scdkit::snmf::{central_pairs, to_f64};
use scdkit::{
    build_gadget_regular, build_gadget_snmf, build_poset, compute_snmf, count_scd_layered,
    count_scd_oracle, matching_to_scd, minimize_max_weight, scd_to_matching, validate_scd,
    CountOptions, GradedPoset, LayeredCounter, Limits, PosetKind, Scd, SumCheck, ThreeLevelPoset,
    TlElem, WeightedBigraph,
};

type Check = Result<String, String>;

fn limits() -> Limits {
    Limits::default()
}

fn poset(t: u32, n: u32) -> GradedPoset {
    let kind = if t == 2 {
        PosetKind::Boolean
    } else {
        PosetKind::Hypergrid
    };
    build_poset(kind, t, n, &limits()).expect("poset builds")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// A three-level poset taken from a host poset, with the host kept for
/// flow weights.
struct Instance {
    label: String,
    host: GradedPoset,
    p3: ThreeLevelPoset,
}

impl Instance {
    fn ab(&self) -> (usize, usize) {
        (self.p3.a(), self.p3.b())
    }

    fn is_boolean(&self) -> bool {
        self.host.kind() == PosetKind::Boolean
    }

    /// Regular gadget on Boolean hosts, flow-weighted gadget elsewhere.
    fn gadget(&self) -> Result<WeightedBigraph, String> {
        if self.is_boolean() {
            build_gadget_regular(&self.p3).map_err(|e| format!("{}: {e}", self.label))
        } else {
            let flow = compute_snmf(&self.host, &limits())
                .and_then(|f| f.slice_flow(&self.host, &self.p3))
                .map_err(|e| format!("{}: {e}", self.label))?;
            build_gadget_snmf(&self.p3, &flow, SumCheck::Exact)
                .map_err(|e| format!("{}: {e}", self.label))
        }
    }

    fn slice_max_weight(&self) -> Result<f64, String> {
        let flow = compute_snmf(&self.host, &limits())
            .and_then(|f| f.slice_flow(&self.host, &self.p3))
            .map_err(|e| format!("{}: {e}", self.label))?;
        Ok(to_f64(&flow.max_weight()))
    }
}

/// Every glued poset met while counting `host` (stage states in order).
fn glued_instances(t: u32, n: u32) -> Vec<Instance> {
    let host = poset(t, n);
    let counter =
        LayeredCounter::build(&host, &limits(), &CountOptions::default()).expect("counter builds");
    let mut out = Vec::new();
    for k in 0..counter.num_steps() {
        for (j, sigma) in counter.stages()[k].states.iter().enumerate() {
            let p3 = counter.glued_poset(k, sigma).expect("glued poset");
            out.push(Instance {
                label: format!("[{t}]^{n} stage {k} state {j}"),
                host: host.clone(),
                p3,
            });
        }
    }
    out
}

fn central_instance(t: u32, n: u32) -> Instance {
    let host = poset(t, n);
    let p3 = ThreeLevelPoset::central_slice(&host).expect("central slice");
    Instance {
        label: format!("[{t}]^{n} central slice"),
        host,
        p3,
    }
}

/// Criterion 2 instances: the Boolean n = 4 central slice, hypergrid central
/// slices and glued posets with `a + b <= 12`.
fn bijection_instances() -> Vec<Instance> {
    let mut v = vec![central_instance(2, 4)];
    for t in 3..=6 {
        v.push(central_instance(t, 2));
    }
    for (t, n) in [(3, 2), (4, 2), (3, 3)] {
        v.extend(glued_instances(t, n));
    }
    v.retain(|i| {
        let (a, b) = i.ab();
        i.is_boolean() || a + b <= 12
    });
    v
}

/// Criteria 3 and 4 instances: everything from criterion 2 plus every glued
/// poset met while counting the criterion 1 posets.
fn certificate_instances() -> Vec<Instance> {
    let mut v = bijection_instances();
    for (t, n) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (4, 2)] {
        v.extend(glued_instances(t, n));
    }
    v.retain(|i| i.p3.a() < i.p3.b());
    v
}

fn direct_scd(p3: &ThreeLevelPoset, triples: &[(u32, u32, u32)]) -> Scd<TlElem> {
    let used: BTreeSet<u32> = triples.iter().map(|t| t.1).collect();
    let mut chains: Vec<Chain<TlElem>> = (0..p3.b() as u32)
        .filter(|y| !used.contains(y))
        .map(|y| Chain(vec![TlElem::Y(y)]))
        .collect();
    chains.extend(
        triples
            .iter()
            .map(|&(x, y, z)| Chain(vec![TlElem::X(x), TlElem::Y(y), TlElem::Z(z)])),
    );
    Scd::new(chains)
}

fn criterion1() -> Check {
    let mut done = Vec::new();
    let expected: BTreeMap<u32, u32> = [(1, 1), (2, 2), (3, 6), (4, 240)].into();
    for (t, n) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (4, 2)] {
        let p = poset(t, n);
        let oracle = count_scd_oracle(&p, &limits()).map_err(|e| e.to_string())?;
        let layered = count_scd_layered(&p, &limits()).map_err(|e| e.to_string())?;
        ensure(oracle == layered, || {
            format!("[{t}]^{n}: oracle {oracle} != layered {layered}")
        })?;
        if t == 2 {
            ensure(layered == BigUint::from(expected[&n]), || {
                format!("2^[{n}]: {layered} != golden {}", expected[&n])
            })?;
        }
        done.push(format!("[{t}]^{n}={layered}"));
    }
    Ok(done.join(" "))
}

fn criterion2() -> Check {
    let instances = bijection_instances();
    let mut matchings_total = 0u64;
    for inst in &instances {
        let support = gadget_support(&inst.p3);
        let via_gadget = count_perfect_matchings(&support, &limits()).map_err(|e| e.to_string())?;
        let direct = count_threelevel_direct(&inst.p3);
        ensure(via_gadget == BigUint::from(direct), || {
            format!("{}: gadget {via_gadget} != direct {direct}", inst.label)
        })?;
        let g = inst.gadget()?;
        let mut from_matchings = BTreeSet::new();
        let mut failure = None;
        let _ = for_each_perfect_matching(&support, |m| {
            let ok = matching_to_scd(&g, m).and_then(|scd| {
                let back = scd_to_matching(&g, &scd)?;
                let valid = validate_scd(&inst.p3, scd.chains())?.ok;
                Ok((back == m && valid).then_some(scd))
            });
            match ok {
                Ok(Some(scd)) => {
                    from_matchings.insert(scd);
                    ControlFlow::Continue(())
                }
                Ok(None) => {
                    failure = Some(format!("{}: matching round trip differs", inst.label));
                    ControlFlow::Break(())
                }
                Err(e) => {
                    failure = Some(format!("{}: {e}", inst.label));
                    ControlFlow::Break(())
                }
            }
        });
        if let Some(f) = failure {
            return Err(f);
        }
        let mut from_direct = BTreeSet::new();
        let _ = for_each_threelevel_scd_direct(&inst.p3, |triples| {
            let scd = direct_scd(&inst.p3, triples);
            match scd_to_matching(&g, &scd).and_then(|m| matching_to_scd(&g, &m)) {
                Ok(back) if back == scd => {
                    from_direct.insert(scd);
                    ControlFlow::Continue(())
                }
                Ok(_) => {
                    failure = Some(format!("{}: decomposition round trip differs", inst.label));
                    ControlFlow::Break(())
                }
                Err(e) => {
                    failure = Some(format!("{}: {e}", inst.label));
                    ControlFlow::Break(())
                }
            }
        });
        if let Some(f) = failure {
            return Err(f);
        }
        ensure(from_matchings == from_direct, || {
            format!("{}: the two enumerations differ", inst.label)
        })?;
        matchings_total += direct;
    }
    Ok(format!(
        "{} instances, {matchings_total} matchings round-tripped",
        instances.len()
    ))
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn criterion3() -> Check {
    let instances = certificate_instances();
    let mut min_ratio = f64::INFINITY;
    for inst in &instances {
        let g = inst.gadget()?;
        let a = g.to_matrix();
        ensure(a.is_doubly_stochastic(), || {
            format!("{}: not doubly stochastic", inst.label)
        })?;
        let k = a.size();
        let perm = permanent_rational(&a, &limits()).map_err(|e| e.to_string())?;
        let floor = BigRational::new(factorial(k), num_traits::pow(BigInt::from(k), k));
        ensure(perm >= floor, || {
            format!("{}: perm {perm} < {k}!/{k}^{k}", inst.label)
        })?;
        min_ratio = min_ratio.min(to_f64(&(perm / floor)));
    }
    Ok(format!(
        "{} gadget matrices, min perm/(k!/k^k) = {min_ratio:.4}",
        instances.len()
    ))
}

fn criterion4() -> Check {
    let instances = certificate_instances();
    let mut tightest = f64::INFINITY;
    for inst in &instances {
        let support = gadget_support(&inst.p3);
        let count = count_perfect_matchings(&support, &limits()).map_err(|e| e.to_string())?;
        let upper = bregman_upper(&support.left_degrees()).map_err(|e| e.to_string())?;
        let ln = ln_biguint(&count);
        ensure(ln <= upper + 1e-9 * upper.abs().max(1.0), || {
            format!("{}: ln count {ln} > Brégman {upper}", inst.label)
        })?;
        tightest = tightest.min(upper - ln);
    }
    Ok(format!(
        "{} instances, smallest slack {tightest:.4}",
        instances.len()
    ))
}

fn criterion5() -> Check {
    let rel = 1e-9;
    for n in [2, 4] {
        let count = count_scd_layered(&poset(2, n), &limits()).map_err(|e| e.to_string())?;
        let ln = ln_biguint(&count);
        let b = theorem1_bounds(n).map_err(|e| e.to_string())?;
        ensure(b.contains(ln, rel), || {
            format!("n = {n}: ln count {ln} outside {b:?}")
        })?;
    }
    let mut layer_checks = 0;
    for n in 1..=4 {
        for inst in glued_instances(2, n) {
            let (a, b) = inst.ab();
            if a >= b {
                continue;
            }
            let r = inst
                .p3
                .regular_degree()
                .map_err(|e| format!("{}: {e}", inst.label))?;
            let count =
                scdkit::count_scd_threelevel(&inst.p3, &limits()).map_err(|e| e.to_string())?;
            let ln = ln_biguint(&count);
            let bound = lemma3_bounds(a as u64, b as u64, r as u64).map_err(|e| e.to_string())?;
            ensure(bound.contains(ln, rel), || {
                format!(
                    "{}: ln count {ln} outside three-level bounds {bound:?}",
                    inst.label
                )
            })?;
            layer_checks += 1;
        }
    }
    let mut weighted_checks = 0;
    for inst in certificate_instances().iter().filter(|i| !i.is_boolean()) {
        let (a, b) = inst.ab();
        let w = inst.slice_max_weight()?;
        let count = scdkit::count_scd_threelevel(&inst.p3, &limits()).map_err(|e| e.to_string())?;
        let ln = ln_biguint(&count);
        let lower = lemma8_lower(a as u64, b as u64, w).map_err(|e| e.to_string())?;
        ensure(lower.contains(ln, rel), || {
            format!(
                "{}: ln count {ln} below weighted lower bound {lower:?}",
                inst.label
            )
        })?;
        weighted_checks += 1;
    }
    Ok(format!(
        "theorem1 n=2,4; {layer_checks} layer states; {weighted_checks} flow-weighted slices"
    ))
}

fn criterion6() -> Check {
    let gap100 = theorem1_headline_gap(100).map_err(|e| e.to_string())?;
    let gaps: Vec<f64> = (20..=400)
        .step_by(20)
        .map(|n| theorem1_headline_gap(n).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let trending = gaps.windows(2).all(|w| w[1] > w[0]);
    ensure(trending, || format!("gap not increasing: {gaps:?}"))?;
    ensure(gap100.abs() <= 0.2, || {
        format!("gap at n=100 is {gap100:.5}, outside ±0.2 (increasing trend holds)")
    })?;
    Ok(format!("gap at n=100 = {gap100:.5}"))
}

fn criterion7() -> Check {
    let mut instances = 0;
    for t in 2..=4u32 {
        let mut n = 1;
        while (t as u64).pow(n) <= 100_000 {
            let p = poset(t, n);
            let f = compute_snmf(&p, &limits()).map_err(|e| e.to_string())?;
            for c in f.check() {
                ensure(c.within(1e-9), || {
                    format!("[{t}]^{n} pair {}: {c:?}", c.lower)
                })?;
            }
            if t == 2 && n >= 2 {
                let range = central_pairs(&p);
                let mm = minimize_max_weight(&p, Some(range.clone()), &limits())
                    .map_err(|e| e.to_string())?;
                for c in mm.snmf.check() {
                    ensure(c.within(1e-9), || {
                        format!("2^[{n}] minimized pair {}: {c:?}", c.lower)
                    })?;
                }
                for i in range {
                    let w = mm
                        .pair_weight(i)
                        .map(to_f64)
                        .ok_or_else(|| format!("2^[{n}]: pair {i} missing"))?;
                    let want = 1.0 / (n as f64 - i as f64);
                    ensure((w - want).abs() <= 1e-9, || {
                        format!("2^[{n}] pair {i}: W = {w}, want {want}")
                    })?;
                }
            }
            instances += 1;
            n += 1;
        }
    }
    Ok(format!("{instances} posets"))
}

fn random_matrix(rng: &mut ChaCha8Rng, k: usize, rational: bool) -> SquareMatrix<BigRational> {
    let rows = (0..k)
        .map(|_| {
            (0..k)
                .map(|_| {
                    if rng.gen_bool(0.35) {
                        BigRational::zero()
                    } else if rational {
                        BigRational::new(
                            BigInt::from(rng.gen_range(1..10)),
                            BigInt::from(rng.gen_range(1..10)),
                        )
                    } else {
                        BigRational::one()
                    }
                })
                .collect()
        })
        .collect();
    SquareMatrix::from_rows(rows).expect("square")
}

fn criterion8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let l = limits();
    for idx in 0..200 {
        let rational = idx % 2 == 1;
        let k = rng.gen_range(1..=9);
        let m = random_matrix(&mut rng, k, rational);
        let ryser = permanent_rational(&m, &l).map_err(|e| e.to_string())?;
        let dp = permanent_dp(&m, &l).map_err(|e| e.to_string())?;
        let naive = permanent_naive(&m);
        ensure(ryser == dp && dp == naive, || {
            format!("matrix {idx} (k={k}): ryser {ryser}, dp {dp}, naive {naive}")
        })?;
        if !rational {
            let count = count_perfect_matchings(&m.support(), &l).map_err(|e| e.to_string())?;
            ensure(
                BigRational::from_integer(BigInt::from(count.clone())) == ryser,
                || format!("matrix {idx}: matching count {count} != ryser {ryser}"),
            )?;
        }
    }
    let mut large = 0;
    for k in 10..=20 {
        let m = random_matrix(&mut rng, k, false);
        let g: Bigraph = m.support();
        let ryser = permanent_rational(&m, &l).map_err(|e| e.to_string())?;
        let dp = count_perfect_matchings(&g, &l).map_err(|e| e.to_string())?;
        ensure(
            ryser == BigRational::from_integer(BigInt::from(dp.clone())),
            || format!("0/1 size {k}: ryser {ryser} != dp {dp}"),
        )?;
        large += 1;
        if k <= 14 {
            let m = random_matrix(&mut rng, k, true);
            let ryser = permanent_rational(&m, &l).map_err(|e| e.to_string())?;
            let dp = permanent_dp(&m, &l).map_err(|e| e.to_string())?;
            ensure(ryser == dp, || {
                format!("rational size {k}: ryser {ryser} != dp {dp}")
            })?;
            large += 1;
        }
    }
    Ok(format!(
        "200 random matrices k<=9 (three routes), {large} matrices 10<=k<=20"
    ))
}

fn criterion9() -> Check {
    let p = poset(2, 3);
    let counter = LayeredCounter::build(&p, &limits(), &CountOptions::default())
        .map_err(|e| e.to_string())?;
    let samples = sample_many(&counter, 9, 6000).map_err(|e| e.to_string())?;
    let mut freq: BTreeMap<Scd, usize> = BTreeMap::new();
    for s in samples {
        *freq.entry(s).or_default() += 1;
    }
    ensure(freq.len() == 6, || {
        format!("{} distinct decompositions sampled", freq.len())
    })?;
    let counts: Vec<usize> = freq.values().copied().collect();
    ensure(counts.iter().all(|&c| (850..=1150).contains(&c)), || {
        format!("counts {counts:?}")
    })?;
    let stat: f64 = counts
        .iter()
        .map(|&o| (o as f64 - 1000.0).powi(2) / 1000.0)
        .sum();
    let p_value = 1.0 - ChiSquared::new(5.0).expect("dof").cdf(stat);
    ensure(p_value >= 0.01, || {
        format!("chi-square {stat:.3}, p = {p_value:.4}")
    })?;
    Ok(format!(
        "counts {counts:?}, chi-square {stat:.3}, p = {p_value:.3}"
    ))
}

fn run_bin(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_scdkit"))
        .args(args)
        .env_remove("SCDKIT_CACHE")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "{args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    Ok(out.stdout)
}

fn criterion10() -> Check {
    let cache = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cache_dir = cache.path().to_str().ok_or("cache path")?.to_string();
    let cmds: Vec<Vec<&str>> = vec![
        vec!["construct", "--method", "gk", "--n", "6"],
        vec!["construct", "--method", "btk", "--t", "3", "--n", "3"],
        vec!["construct", "--method", "btk", "--t", "4", "--n", "3"],
        vec!["count", "--n", "5", "--no-cache"],
        vec![
            "count",
            "--t",
            "3",
            "--n",
            "3",
            "--method",
            "both",
            "--no-cache",
        ],
        vec!["count", "--t", "4", "--n", "3", "--cache-dir", &cache_dir],
        vec![
            "sample",
            "--n",
            "4",
            "--seed",
            "3",
            "--count",
            "4",
            "--no-cache",
        ],
        vec!["snmf", "--t", "3", "--n", "3", "--minimize-max"],
    ];
    for cmd in &cmds {
        let mut outputs = Vec::new();
        for threads in ["1", "8", "1", "8"] {
            let mut args = vec!["--quiet", "--threads", threads];
            args.extend_from_slice(cmd);
            outputs.push(run_bin(&args)?);
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || {
            format!("{cmd:?}: outputs differ")
        })?;
    }
    Ok(format!(
        "{} commands byte-identical over 4 runs (threads 1/8)",
        cmds.len()
    ))
}

fn main() {
    type Criterion = (u32, &'static str, Option<Duration>, fn() -> Check);
    let criteria: [Criterion; 10] = [
        (
            1,
            "exact-count oracle agreement",
            Some(Duration::from_secs(60)),
            criterion1,
        ),
        (
            2,
            "bijection certification",
            Some(Duration::from_secs(30)),
            criterion2,
        ),
        (3, "Falikman certificate", None, criterion3),
        (4, "Brégman certificate", None, criterion4),
        (5, "bound sandwich", None, criterion5),
        (
            6,
            "normalized trend",
            Some(Duration::from_secs(1)),
            criterion6,
        ),
        (
            7,
            "SNMF validity",
            Some(Duration::from_secs(120)),
            criterion7,
        ),
        (
            8,
            "permanent cross-validation",
            Some(Duration::from_secs(60)),
            criterion8,
        ),
        (9, "sampling uniformity", None, criterion9),
        (10, "determinism", None, criterion10),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let result = match (result, budget) {
            (Ok(_), Some(b)) if start.elapsed() > b => {
                Err(format!("took {secs:.2} s, budget {} s", b.as_secs()))
            }
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS {name}: {detail} ({secs:.2} s)"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL {name}: {detail} ({secs:.2} s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

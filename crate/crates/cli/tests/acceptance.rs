//! Acceptance gate: one PASS/FAIL line per criterion, written straight to
//! stdout so it shows up without `--nocapture`.

use std::io::Write;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use dapt_core::approx::{
    approx_arrangement, approx_arrangement_traced, closed_form_coefficients, closed_form_objective, pair_exchange_delta,
};
use dapt_core::bounds::{approximation_ratio, dapt_lower_bound, lower_bound_table, ratio_certificate};
use dapt_core::gadgets::{build_reduction, star_optimum, three_star_arrangement, three_star_optimum, witness_arrangement, NmtsInstance};
use dapt_core::oracle::{exact_dapt, for_each_balanced_partition, OracleConfig};
use dapt_core::partition::{construct_optimal, lower_bound_cases, BoundRegime};
use dapt_core::GuestGraph;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn dapt(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dapt"))
        .args(args)
        .env_remove("DAPT_BUDGET")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn golden_objectives() -> Check {
    let mut seen = Vec::new();
    for (h, want) in [(0, 0u64), (1, 6), (2, 22), (3, 56), (6, 586)] {
        let start = Instant::now();
        let out = dapt(&["arrange", "--height", &h.to_string()]);
        let took = start.elapsed();
        ensure!(out.status.success(), "arrange --height {h} exited with {}", out.status);
        let text = String::from_utf8_lossy(&out.stdout);
        let ov: u64 = text
            .lines()
            .find_map(|l| l.strip_prefix("OV: "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| format!("no OV line for h_G = {h}"))?;
        ensure!(ov == want, "h_G = {h}: OV {ov}, expected {want}");
        ensure!(took < Duration::from_secs(1), "h_G = {h} took {took:?}");
        seen.push(ov);
    }
    Ok(format!("OV = {seen:?}"))
}

fn closed_forms() -> Check {
    for h in 0..=14 {
        let sim = approx_arrangement(h).map_err(|e| e.to_string())?.objective_value();
        let closed = closed_form_objective(h).map_err(|e| e.to_string())?;
        ensure!(sim == closed, "h_G = {h}: simulated {sim}, closed form {closed}");
    }
    for h in 1..=10 {
        let sim = approx_arrangement(h).map_err(|e| e.to_string())?.distance_profile();
        let closed = closed_form_coefficients(h).map_err(|e| e.to_string())?;
        ensure!(sim == closed, "h_G = {h}: profile {:?} vs {:?}", sim.counts(), closed.counts());
    }
    Ok("OV for h_G <= 14, profile for h_G <= 10".into())
}

fn pair_exchanges() -> Check {
    let mut total = 0;
    for h in [3, 5, 7] {
        let (_, trace) = approx_arrangement_traced(h).map_err(|e| e.to_string())?;
        ensure!(trace.occupied_middles == 0, "h_G = {h}: root met an occupied middle leaf");
        for ex in &trace.exchanges {
            let gain = pair_exchange_delta(&ex.before, &ex.after).map_err(|e| e.to_string())?;
            ensure!(gain == 2, "h_G = {h}: swap changed OV by {}", -gain);
            let (b, a) = (ex.before.distance_profile(), ex.after.distance_profile());
            ensure!(a.a(1) == b.a(1) + 1 && a.a(2) + 1 == b.a(2), "h_G = {h}: a_1/a_2 moved wrongly");
            for i in 3..=b.height() {
                ensure!(a.a(i) == b.a(i), "h_G = {h}: a_{i} changed");
            }
        }
        total += trace.exchanges.len();
    }
    ensure!(total > 0, "no exchanges recorded");
    Ok(format!("{total} swaps, each -2"))
}

/// Optimal cut from the closed form `2k - n_1 - 1`, with `n_1` summed directly.
fn cut_formula(h: u32, kp: u32) -> u64 {
    let t = h - kp + 2;
    let e = (h + 1) / t - 1;
    let n1: u64 = 1 + (1..=e + 1).map(|i| 1u64 << (h + 1 - i * t)).sum::<u64>();
    (2u64 << kp) - n1 - 1
}

fn kbpp_construction() -> Check {
    let built = construct_optimal(5, 4).map_err(|e| e.to_string())?;
    let mut sizes = built.partition.block_sizes();
    sizes.sort_unstable();
    ensure!(built.partition.cut_count() == 21, "(5,4) cut {}", built.partition.cut_count());
    ensure!(sizes[0] == 3 && sizes[1..] == [4; 15], "(5,4) sizes {sizes:?}");
    let mut checked = 0;
    for h in 1..=8u32 {
        for kp in 1..=h {
            let part = construct_optimal(h, kp).map_err(|e| e.to_string())?.partition;
            let cut = part.cut_count() as u64;
            ensure!(cut == cut_formula(h, kp), "(h={h}, k'={kp}): cut {cut} vs {}", cut_formula(h, kp));
            let k = 1i64 << kp;
            for case in lower_bound_cases(h, kp).map_err(|e| e.to_string())? {
                let c = Ratio::from_integer(cut as i64);
                match case.regime {
                    BoundRegime::BelowHeight => ensure!(c >= Ratio::new(10 * k, 7) - 2, "(h={h}, k'={kp}) below 10k/7 - 2"),
                    BoundRegime::FullHeight => {
                        let sign = if kp % 2 == 0 { 1 } else { -1 };
                        let exact = Ratio::new(4 * k, 3) - Ratio::new(3, 2) + Ratio::new(sign, 6);
                        ensure!(c == exact, "(h={h}, k'={kp}) full-height case {exact} vs {cut}");
                    }
                    BoundRegime::Shallow => {
                        ensure!(c == Ratio::new(3 * k, 2) - 2, "(h={h}, k'={kp}) shallow case vs {cut}")
                    }
                }
                ensure!(case.holds(cut), "(h={h}, k'={kp}) {case:?}");
                checked += 1;
            }
        }
    }
    Ok(format!("(5,4) cut 21 sizes {{3, 4x15}}; 36 closed forms; {checked} bound cases"))
}

fn oracle_optimality() -> Check {
    let mut partitions = 0;
    for h in 1..=3u32 {
        let guest = GuestGraph::complete_binary(h).map_err(|e| e.to_string())?;
        for kp in 1..=h {
            let built = construct_optimal(h, kp).map_err(|e| e.to_string())?.partition.cut_count();
            let mut best = usize::MAX;
            partitions += for_each_balanced_partition(&guest, 1 << kp, u64::MAX, |block_of| {
                let cut = guest.edges().iter().filter(|&&(u, v)| block_of[u - 1] != block_of[v - 1]).count();
                best = best.min(cut);
            })
            .map_err(|e| e.to_string())?;
            ensure!(best >= built, "(h={h}, k'={kp}): enumeration found {best} < {built}");
        }
    }
    let mut values = Vec::new();
    for h in 0..=2 {
        let guest = Arc::new(GuestGraph::complete_binary(h).map_err(|e| e.to_string())?);
        let res = exact_dapt(guest, 2, &OracleConfig::default()).map_err(|e| e.to_string())?;
        let phi = approx_arrangement(h).map_err(|e| e.to_string())?.objective_value();
        ensure!(res.value == phi, "h_G = {h}: exact {} vs approx {phi}", res.value);
        values.push(res.value);
    }
    ensure!(values == [0, 6, 22], "exact DAPT values {values:?}");
    Ok(format!("{partitions} partitions enumerated; DAPT optima {values:?}"))
}

fn lower_bound_tables() -> Check {
    let expected: [&[u64]; 5] = [&[2, 1], &[6, 4, 1], &[14, 9, 4, 1], &[30, 20, 10, 4, 1], &[62, 41, 21, 10, 4, 1]];
    for (h, row) in (1..).zip(expected) {
        let got = lower_bound_table(h).map_err(|e| e.to_string())?.s_lower;
        ensure!(got == row, "h_G = {h}: {got:?}");
    }
    for h in 1..=4 {
        let (lb, ov) = (dapt_lower_bound(h).map_err(|e| e.to_string())?, closed_form_objective(h).map_err(|e| e.to_string())?);
        ensure!(lb == ov, "h_G = {h}: bound {lb} vs OV {ov}");
    }
    let (lb, ov) = (dapt_lower_bound(5).map_err(|e| e.to_string())?, closed_form_objective(5).map_err(|e| e.to_string())?);
    ensure!((lb, ov) == (278, 280), "h_G = 5: bound {lb}, OV {ov}");
    Ok("tables for h_G <= 5; tight to h_G = 4; 278 vs 280".into())
}

fn ratio_properties() -> Check {
    let limit = 203.0 / 200.0;
    for h in 4..40 {
        ensure!(approximation_ratio(h) < approximation_ratio(h + 1), "not increasing at {h}");
    }
    for h in 4..=40 {
        ensure!(approximation_ratio(h) < limit, "rho({h}) = {} >= 203/200", approximation_ratio(h));
    }
    let r60 = approximation_ratio(60);
    ensure!((r60 - 1.015).abs() < 1e-6, "rho(60) = {r60}");
    for h in 1..=20 {
        let cert = ratio_certificate(h).map_err(|e| e.to_string())?;
        ensure!(cert.within_guarantee(), "h_G = {h}: empirical ratio {}", cert.empirical_ratio());
    }
    Ok(format!("rho(60) = {r60:.9}"))
}

fn stars() -> Check {
    let config = OracleConfig { threads: 4, ..OracleConfig::default() };
    for d in [2u64, 3] {
        for n in 1..=8usize {
            let exact = exact_dapt(Arc::new(GuestGraph::star(n).unwrap()), d, &config).map_err(|e| e.to_string())?;
            let formula = star_optimum(n as u64, d).map_err(|e| e.to_string())?;
            ensure!(exact.value == formula, "star n={n} d={d}: search {} vs formula {formula}", exact.value);
        }
    }
    let mut triples = 0;
    for (sizes, d) in [([5u64, 2, 1], 2u64), ([9, 5, 2], 2), ([20, 5, 2], 3)] {
        let opt = three_star_optimum(sizes[0], sizes[1], sizes[2], d).map_err(|e| e.to_string())?;
        for (term, &n) in opt.terms.iter().zip(&sizes) {
            ensure!(*term == star_optimum(n, d).unwrap(), "{sizes:?}: term {term} for size {n}");
        }
        let arr = three_star_arrangement(sizes[0], sizes[1], sizes[2], d).map_err(|e| e.to_string())?;
        ensure!(arr.objective_value() == opt.total, "{sizes:?}: arrangement {} vs {}", arr.objective_value(), opt.total);
        triples += 1;
    }
    Ok(format!("16 stars; {triples} three-star forests"))
}

fn reduction() -> Check {
    let inst = NmtsInstance::new(vec![1, 1], vec![1, 1], vec![2, 2]).map_err(|e| e.to_string())?;
    let red = build_reduction(&inst, 2).map_err(|e| e.to_string())?;
    let witness = witness_arrangement(&red, &[1, 2], &[1, 2]).map_err(|e| e.to_string())?.objective_value();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut matched = 0;
    for round in 0..50 {
        let n = rng.gen_range(1..=3);
        let x: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
        let y: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
        let mut pj: Vec<usize> = (1..=n).collect();
        let mut pk: Vec<usize> = (1..=n).collect();
        pj.shuffle(&mut rng);
        pk.shuffle(&mut rng);
        let z = (0..n).map(|i| x[pj[i] - 1] + y[pk[i] - 1]).collect();
        let inst = NmtsInstance::new(x, y, z).map_err(|e| e.to_string())?;
        let d = if round % 2 == 0 { 2 } else { 3 };
        let r = build_reduction(&inst, d).map_err(|e| e.to_string())?;
        let w = witness_arrangement(&r, &pj, &pk).map_err(|e| e.to_string())?.objective_value();
        if w == r.target {
            matched += 1;
        }
    }
    let summary = format!(
        "vertices {}, target {}, witness {witness}; random YES-instances matching {matched}/50",
        red.guest.vertex_count(),
        red.target
    );
    ensure!(red.guest.vertex_count() == 64, "{summary}");
    ensure!(red.target == 750, "expected target 750: {summary}");
    ensure!(witness == red.target, "{summary}");
    ensure!(matched == 50, "{summary}");
    Ok(summary)
}

fn determinism() -> Check {
    let arrangement = fixture("phi_h6.json");
    let nmts = fixture("nmts_pair.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["arrange", "--height", "5"],
        vec!["arrange", "--height", "4", "--format", "json"],
        vec!["evaluate", "--arrangement", &arrangement],
        vec!["kbpp", "--height", "5", "--kprime", "4", "--format", "csv"],
        vec!["bound", "--height", "5"],
        vec!["ratio", "--height", "60"],
        vec!["tables", "--max-height", "5"],
        vec!["exact", "--mode", "dapt", "--height", "2", "--threads", "4"],
        vec!["exact", "--mode", "kbpp", "--height", "3", "--kprime", "2", "--threads", "4"],
        vec!["reduce-nmts", "--input", &nmts, "--degree", "2", "--perm-j", "1,2", "--perm-k", "2,1"],
    ];
    for args in &runs {
        let (a, b) = (dapt(args), dapt(args));
        ensure!(a.status.success(), "{args:?} exited with {}", a.status);
        ensure!(a.stdout == b.stdout && a.status == b.status, "{args:?} differs between runs");
    }
    for mode in [["dapt", "--height", "2", ""], ["kbpp", "--height", "3", "--kprime"]] {
        let mut base = vec!["exact", "--mode", mode[0], mode[1], mode[2]];
        if !mode[3].is_empty() {
            base.extend([mode[3], "2"]);
        }
        let single = dapt(&[base.as_slice(), &["--threads", "1"]].concat());
        let multi = dapt(&[base.as_slice(), &["--threads", "4"]].concat());
        ensure!(single.stdout == multi.stdout, "{} output depends on thread count", mode[0]);
    }
    Ok(format!("{} commands run twice; thread counts agree", runs.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check, Option<u64>); 10] = [
        ("golden objective values", golden_objectives, None),
        ("closed-form agreement", closed_forms, Some(10)),
        ("pair-exchange gain", pair_exchanges, None),
        ("k-BPP construction", kbpp_construction, None),
        ("oracle optimality", oracle_optimality, Some(60)),
        ("lower-bound tables", lower_bound_tables, None),
        ("ratio", ratio_properties, None),
        ("stars", stars, None),
        ("reduction", reduction, Some(30)),
        ("determinism", determinism, None),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut result = check();
        let took = start.elapsed();
        if let (Ok(detail), Some(secs)) = (&result, limit) {
            if took > Duration::from_secs(secs) {
                result = Err(format!("{detail}; took {took:.2?}, limit {secs} s"));
            }
        }
        let line = match &result {
            Ok(detail) => format!("criterion {:>2} PASS  {name}: {detail} [{took:.2?}]", i + 1),
            Err(why) => format!("criterion {:>2} FAIL  {name}: {why} [{took:.2?}]", i + 1),
        };
        writeln!(out, "{line}").unwrap();
        if result.is_err() {
            failed.push(i + 1);
        }
    }
    out.flush().unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

//! One test per acceptance criterion. Each writes a single PASS/FAIL line to
//! stderr (visible without `--nocapture`) and then asserts.

use planedom::constructions::{build_family, Construction};
use planedom::gf::FieldSpec;
use planedom::plane::{build_pg2q, LineId, Plane, PointId};
use planedom::sets::{
    analyze, blocked_line_count, is_blocking, is_covering, is_dominating, line_weights,
    secant_spectrum, weight, weight_lower_bound, Candidate, PointSet,
};
use planedom::solver::{min_dominating_with, SearchOptions, SolverError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

fn pg(q: u64) -> Plane {
    build_pg2q(&FieldSpec::of_order(q).unwrap()).unwrap()
}

fn cli(args: &[&str]) -> (Option<i32>, Value, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_planedom"))
        .args(args)
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8(o.stdout).unwrap();
    let v = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (o.status.code(), v, stdout)
}

/// Prints the criterion line and fails the test on any problem.
fn verdict(n: u32, title: &str, started: Instant, problems: Vec<String>) {
    let status = if problems.is_empty() { "PASS" } else { "FAIL" };
    let line = format!(
        "acceptance {n} [{status}] {title} ({:.2?}){}",
        started.elapsed(),
        if problems.is_empty() {
            String::new()
        } else {
            format!(": {}", problems.join("; "))
        }
    );
    let _ = writeln!(std::io::stderr(), "{line}");
    assert!(problems.is_empty(), "{line}");
}

fn within(started: Instant, limit: Duration, problems: &mut Vec<String>) {
    if started.elapsed() > limit {
        problems.push(format!("took {:.2?}, limit {limit:?}", started.elapsed()));
    }
}

#[test]
fn criterion_1_domination_number() {
    let t = Instant::now();
    let mut problems = vec![];
    for q in [2u64, 3, 4] {
        let (code, r, _) = cli(&["gamma", "--q", &q.to_string()]);
        if code != Some(0) || r["optimum"] != 2 * q || r["proof"] != "exhausted" {
            problems.push(format!("q={q}: exit {code:?}, {r}"));
        }
    }
    within(t, Duration::from_secs(60), &mut problems);
    let opts = SearchOptions {
        budget: Some(Duration::from_secs(600)),
        ..Default::default()
    };
    match min_dominating_with(&pg(5), &opts) {
        Ok(r) if r.optimum == 10 && is_dominating(&pg(5), &r.witness) => {}
        Err(SolverError::BudgetExhausted(p)) if p.bound_met() && p.upper == 10 => {}
        other => problems.push(format!("q=5: {other:?}")),
    }
    verdict(1, "domination number is 2q for q in {2,3,4,5}", t, problems);
}

#[test]
fn criterion_2_classification_at_equality() {
    let t = Instant::now();
    let mut problems = vec![];
    let (code, r, _) = cli(&["enumerate-minimal", "--q", "3", "--max-size", "6"]);
    if code != Some(0) {
        problems.push(format!("exit {code:?}"));
    }
    let sets = r["sets"].as_array().cloned().unwrap_or_default();
    if sets.is_empty() {
        problems.push("no minimal dominating sets of size <= 6".into());
    }
    let p = pg(3);
    for s in &sets {
        if s["classification"] != "case_i" {
            problems.push(format!("{s}"));
        }
        // pattern check independent of the classifier
        let c: Candidate = serde_json::from_value(s["set"].clone()).unwrap();
        if !is_flag_pattern(&p, &c) {
            problems.push(format!("not q collinear points plus q concurrent lines: {s}"));
        }
    }
    within(t, Duration::from_secs(120), &mut problems);
    verdict(
        2,
        &format!("all {} minimal dominating sets of PG(2,3) with <= 6 vertices are flag sets", sets.len()),
        t,
        problems,
    );
}

/// `[ℓ] ∖ {P}` with `[P] ∖ {ℓ}` for some incident pair.
fn is_flag_pattern(p: &Plane, c: &Candidate) -> bool {
    let q = p.order() as usize;
    if c.points.len() != q || c.lines.len() != q {
        return false;
    }
    p.lines().any(|l| {
        p.points_on(l).any(|x| {
            let pts: PointSet = p.points_on(l).filter(|&y| y != x).collect();
            let lns: std::collections::BTreeSet<LineId> =
                p.pencil(x).into_iter().filter(|&m| m != l).collect();
            pts == c.points && lns == c.lines
        })
    })
}

#[test]
fn criterion_3_smallest_nontrivial_blocking_set() {
    let t = Instant::now();
    let mut problems = vec![];
    let (code, r, _) = cli(&["min-blocking", "--q", "4", "--nontrivial"]);
    if code != Some(0) || r["optimum"] != 7 {
        problems.push(format!("exit {code:?}, optimum {}", r["optimum"]));
    }
    let hist = &r["spectrum"]["histogram"];
    let want = serde_json::json!({"1": 14, "3": 7});
    if hist != &want {
        problems.push(format!("spectrum {hist}"));
    }
    within(t, Duration::from_secs(60), &mut problems);
    verdict(3, "nontrivial blocking sets of PG(2,4) have >= 7 points, a Baer subplane attains it", t, problems);
}

fn isqrt(q: usize) -> usize {
    (1..=q).take_while(|r| r * r <= q).last().unwrap_or(0)
}

#[test]
fn criterion_4_construction_sizes_and_flags() {
    let t = Instant::now();
    let mut problems = vec![];
    let mut checked = 0;
    let mut check = |p: &Plane, c: &Construction, size: usize, problems: &mut Vec<String>| {
        checked += 1;
        let q = p.order();
        if c.candidate.size() != size {
            problems.push(format!("{} q={q}: size {} != {size}", c.name, c.candidate.size()));
        }
        let r = analyze(p, &c.candidate);
        for (flag, want, got) in c.expected.mismatches(&r.flags) {
            problems.push(format!("{} q={q}: {flag} expected {want} got {got}", c.name));
        }
    };
    for q in [2usize, 3, 4, 5, 7, 8, 9] {
        let p = pg(q as u64);
        let r = isqrt(q);
        let square = r * r == q;
        let arc = if q % 2 == 0 { q + 2 } else { q + 1 };
        let mut fams: Vec<(&str, usize)> = vec![
            ("i", 2 * q),
            ("ii", 2 * q + 2),
            ("oval-skew", arc + q * (q - 1) / 2),
            ("nonstable", 3 * q - 1),
        ];
        if square {
            fams.extend([
                ("iii", 2 * q + r + 1),
                ("blocking-pencil", 2 * q + r + 2),
                ("baer-union", 2 * q + 2 * r + 2),
            ]);
        }
        for (name, size) in fams {
            match build_family(&p, name, None) {
                Ok(c) => check(&p, &c, size, &mut problems),
                Err(e) => problems.push(format!("{name} q={q}: {e}")),
            }
        }
        for tt in 1..q as u32 {
            match build_family(&p, "pg3qm2", Some(tt)) {
                Ok(c) => check(&p, &c, 3 * q - 2, &mut problems),
                Err(e) => problems.push(format!("pg3qm2 q={q} t={tt}: {e}")),
            }
        }
    }
    within(t, Duration::from_secs(30), &mut problems);
    verdict(4, &format!("{checked} family instances have the stated sizes and flags"), t, problems);
}

/// Intersection sizes straight from the incidence relation.
fn raw_secants(p: &Plane, s: &PointSet) -> Vec<usize> {
    p.lines()
        .map(|l| s.iter().filter(|&&x| p.incident(x, l)).count())
        .collect()
}

fn collinear(p: &Plane, s: &PointSet) -> bool {
    p.lines().any(|l| s.iter().all(|&x| p.incident(x, l)))
}

#[test]
fn criterion_5_standard_equations() {
    let t = Instant::now();
    let mut problems = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(20240501);
    let planes: Vec<Plane> = [3, 4, 5].into_iter().map(pg).collect();
    let mut equalities = 0;
    for trial in 0..10_000 {
        let p = &planes[trial % 3];
        let q = p.order() as usize;
        let n = p.size();
        let s: PointSet = if trial % 4 == 0 {
            // subsets of a line exercise the equality case
            let l = LineId(rng.gen_range(0..n as u32));
            let mut on: Vec<PointId> = p.points_on(l).collect();
            on.shuffle(&mut rng);
            let k = rng.gen_range(1..=on.len());
            on.into_iter().take(k).collect()
        } else {
            let k = rng.gen_range(1..=n);
            let mut all: Vec<PointId> = p.points().collect();
            all.shuffle(&mut rng);
            all.into_iter().take(k).collect()
        };
        let m = raw_secants(p, &s);
        let size = s.len();
        let first: usize = m.iter().sum();
        let second: usize = m.iter().map(|&x| x * x.saturating_sub(1)).sum();
        if first != size * (q + 1) || second != size * (size - 1) {
            problems.push(format!("standard equations fail for {s:?}"));
        }
        if !secant_spectrum(p, &s).standard_equations_hold(size, q as u32) {
            problems.push(format!("spectrum disagrees for {s:?}"));
        }
        let blocked = blocked_line_count(p, &s);
        let bound = size * q + 1;
        let raw_blocked = m.iter().filter(|&&x| x > 0).count();
        if blocked != raw_blocked || blocked > bound || (blocked == bound) != collinear(p, &s) {
            problems.push(format!("blocked-line bound fails for {s:?}"));
        }
        equalities += usize::from(blocked == bound);
        if problems.len() > 5 {
            break;
        }
    }
    if equalities == 0 {
        problems.push("equality case never exercised".into());
    }
    verdict(
        5,
        &format!("10000 random point sets satisfy both standard equations and the kq+1 bound ({equalities} collinear)"),
        t,
        problems,
    );
}

#[test]
fn criterion_6_weight_machinery() {
    let t = Instant::now();
    let mut problems = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let planes: Vec<Plane> = [3, 4, 5, 7].into_iter().map(pg).collect();
    for trial in 0..1000 {
        let p = &planes[trial % planes.len()];
        let density = rng.gen_range(0.05..0.6);
        let s: PointSet = p.points().filter(|_| rng.gen_bool(density)).collect();
        let k = secant_spectrum(p, &s).k_max.max(1);
        let lw = line_weights(p, &s, k);
        // independent evaluation of the total from raw secants
        let raw: i64 = raw_secants(p, &s)
            .into_iter()
            .filter(|&m| m > 0)
            .map(|m| (m as i64 - 1) * (m as i64 - k as i64))
            .sum();
        if raw != lw.total || raw > 0 {
            problems.push(format!("weight {raw} / {} for {s:?}", lw.total));
        }
        for l in p.lines() {
            let along: i64 = p
                .points_on(l)
                .map(|x| {
                    p.pencil(x)
                        .into_iter()
                        .filter(|&m| m != l)
                        .map(|m| lw.of(m))
                        .sum::<i64>()
                })
                .sum();
            if lw.total != lw.of(l) + along {
                problems.push(format!("decomposition fails on line {l}"));
            }
        }
    }
    let mut families = 0;
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let p = pg(q);
        for name in planedom::constructions::FAMILIES {
            let ts: Vec<Option<u32>> = if name == "pg3qm2" {
                (1..q as u32).map(Some).collect()
            } else {
                vec![None]
            };
            for tt in ts {
                let Ok(c) = build_family(&p, name, tt) else { continue };
                if !is_dominating(&p, &c.candidate) {
                    continue;
                }
                families += 1;
                let d = &c.candidate;
                let k = secant_spectrum(&p, &d.points).k_max.max(1);
                let w = weight(&p, &d.points, k);
                let lb = weight_lower_bound(d.points.len() as u64, k as u64, d.size() as u64, q);
                if w < lb {
                    problems.push(format!("{name} q={q}: weight {w} < {lb}"));
                }
            }
        }
    }
    verdict(
        6,
        &format!("weight identity on 1000 random sets, w <= 0, lower bound on {families} family sets"),
        t,
        problems,
    );
}

#[test]
fn criterion_7_feasibility_scan() {
    let t = Instant::now();
    let mut problems = vec![];
    let o = Command::new(env!("CARGO_BIN_EXE_planedom"))
        .args(["scan", "--qmin", "21", "--qmax", "130"])
        .output()
        .unwrap();
    if !o.status.success() {
        problems.push(format!("exit {:?}", o.status.code()));
    }
    let text = String::from_utf8(o.stdout).unwrap();
    let mut labelled = 0;
    for line in text.lines() {
        let r: Value = serde_json::from_str(line).unwrap();
        let (q, k, b, beta0) = (
            r["q"].as_u64().unwrap(),
            r["k"].as_u64().unwrap(),
            r["b"].as_u64().unwrap(),
            r["beta0"].as_u64().unwrap(),
        );
        if q >= 30 && beta0 >= 2 {
            problems.push(format!("(a) beta0 = {beta0} at q = {q}"));
        }
        match r["case_label"].as_str() {
            Some("I.a") if 2 * b == k => {}
            Some("II.a") if b == k => {}
            Some(other) => problems.push(format!("(b) {other} with b={b}, k={k} at q={q}")),
            None => continue,
        }
        labelled += 1;
        let rec = planedom::feasibility::record(q, k, beta0, b).unwrap();
        if b >= 2 {
            match planedom::feasibility::combinatorial_exclusion(&rec) {
                Ok(e) if e.excluded => {}
                other => problems.push(format!("(c) q={q} b={b}: {other:?}")),
            }
        }
    }
    if labelled == 0 {
        problems.push("no labelled records".into());
    }
    within(t, Duration::from_secs(120), &mut problems);
    verdict(
        7,
        &format!("scan 21..130: beta0 <= 1 from q = 30, {labelled} labelled records all I.a/II.a and excluded"),
        t,
        problems,
    );
}

#[test]
fn criterion_8_duality() {
    let t = Instant::now();
    let mut problems = vec![];
    let opts = SearchOptions {
        threads: 1,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut compared = 0;
    for q in [2u64, 3, 4] {
        let p = pg(q);
        let d = p.dual();
        let a = min_dominating_with(&p, &opts).map(|r| r.optimum);
        let b = min_dominating_with(&d, &opts).map(|r| r.optimum);
        if a != b || a != Ok(2 * q as usize) {
            problems.push(format!("q={q}: {a:?} vs dual {b:?}"));
        }
        let mut cands: Vec<Candidate> = planedom::constructions::FAMILIES
            .iter()
            .filter_map(|f| build_family(&p, f, Some(1)).ok())
            .map(|c| c.candidate)
            .collect();
        for _ in 0..200 {
            let density = rng.gen_range(0.05..0.5);
            let pts: Vec<PointId> = p.points().filter(|_| rng.gen_bool(density)).collect();
            let lns: Vec<LineId> = p.lines().filter(|_| rng.gen_bool(density)).collect();
            cands.push(Candidate::new(pts, lns));
        }
        for c in cands {
            compared += 1;
            let x = analyze(&p, &c).flags;
            let y = analyze(&d, &c.swapped()).flags;
            let same = x.dominating == y.dominating
                && x.minimal == y.minimal
                && x.stable == y.stable
                && x.primal == y.primal
                && x.blocking == y.covering
                && x.covering == y.blocking;
            if !same {
                problems.push(format!("q={q}: {x:?} vs {y:?}"));
            }
        }
    }
    verdict(
        8,
        &format!("gamma and {compared} analyses agree on the dual plane"),
        t,
        problems,
    );
}

#[test]
fn criterion_9_three_q_minus_two() {
    let t = Instant::now();
    let mut problems = vec![];
    for q in [5u64, 7] {
        let p = pg(q);
        for tt in 1..q as u32 {
            let c = build_family(&p, "pg3qm2", Some(tt)).unwrap().candidate;
            let ok = c.size() == 3 * q as usize - 2
                && is_dominating(&p, &c)
                && !is_blocking(&p, &c.points)
                && !is_covering(&p, &c.lines);
            if !ok {
                problems.push(format!("q={q} t={tt}"));
            }
        }
    }
    within(t, Duration::from_secs(5), &mut problems);
    verdict(9, "3q-2 dominating sets at q in {5,7} with non-blocking points and non-covering lines", t, problems);
}

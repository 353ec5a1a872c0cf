//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use gft_core::audit::{audit_all, DEFAULT_TOL_BB, DEFAULT_TOL_IC};
use gft_core::bilateral::{bom_trades, gft_bom, gft_som, som_trades};
use gft_core::cli::{gen_instance, FamilyKind};
use gft_core::lp::{solve_lp, LpProblem, LpStatus, Sense, VarBound};
use gft_core::market::{Agent, DiscreteDistribution, Instance, TypeProfile};
use gft_core::matching::Matching;
use gft_core::mechanism::{build_mechanism, gft_exact, virtual_gft, MechanismKind, MechanismTable};
use gft_core::second_best::{
    check_sbb_implementable, duality_benchmark, first_best, opt_lp, sbb_payments_exist,
};
use gft_core::transforms::{exante_wbb_to_exante_sbb, wbb_to_sbb_pipeline};
use gft_core::virtuals::{buyer_virtual_values, seller_virtual_values};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Everything the suite-level criteria need about one generated instance.
struct SuiteCase {
    label: String,
    instance: Instance,
    first_best: f64,
    opt: f64,
    benchmarks: [f64; 3],
    gsom: MechanismTable,
    gbom: MechanismTable,
}

const ALPHAS: [f64; 3] = [0.5, 1.0, 2.0];

/// Fixed suite: for each family, seeds 1..=40 with shapes cycling through
/// 2x2, 1x2, 2x1, 2x2; supports of size at most three.
fn suite() -> Vec<SuiteCase> {
    let shapes = [(2, 2), (1, 2), (2, 1), (2, 2)];
    let families = [FamilyKind::AllMatchings, FamilyKind::Cap(1), FamilyKind::RandomExplicit];
    let specs: Vec<(u64, usize, usize, FamilyKind)> = families
        .iter()
        .flat_map(|&f| {
            (1..=40u64).map(move |seed| {
                let (n, m) = shapes[seed as usize % shapes.len()];
                (seed, n, m, f)
            })
        })
        .collect();
    specs
        .par_iter()
        .map(|&(seed, n, m, family)| {
            let instance = gen_instance(seed, n, m, 3, family).unwrap();
            SuiteCase {
                label: format!("seed {seed} {n}x{m} {family}"),
                first_best: first_best(&instance).unwrap(),
                opt: opt_lp(&instance).unwrap(),
                benchmarks: ALPHAS.map(|a| duality_benchmark(&instance, a).unwrap()),
                gsom: build_mechanism(&instance, MechanismKind::Gsom).unwrap(),
                gbom: build_mechanism(&instance, MechanismKind::Gbom).unwrap(),
                instance,
            }
        })
        .collect()
}

fn failures<T>(items: impl Iterator<Item = Option<T>>) -> Vec<T> {
    items.flatten().collect()
}

fn summarize(total: usize, failed: &[String]) -> String {
    match failed.first() {
        None => format!("{total} instances"),
        Some(first) => format!("{} of {total} failing; first: {first}", failed.len()),
    }
}

fn sandwich(cases: &[SuiteCase]) -> Outcome {
    let mut worst_ratio = f64::INFINITY;
    let failed = failures(cases.iter().map(|c| {
        let (a, b) = (gft_exact(&c.gsom), gft_exact(&c.gbom));
        if c.opt > 1e-12 {
            worst_ratio = worst_ratio.min(a.max(b) / c.opt);
        }
        (a + b < c.opt - 1e-6).then(|| format!("{}: {a} + {b} < {}", c.label, c.opt))
    }));
    let pass = failed.is_empty() && cases.len() >= 100 && worst_ratio >= 0.5 - 1e-6;
    Outcome::new(
        pass,
        format!("{}; worst max-ratio {worst_ratio:.4}", summarize(cases.len(), &failed)),
    )
}

fn bilateral_sandwich() -> Outcome {
    let results: Vec<Option<String>> = (1..=200u64)
        .into_par_iter()
        .map(|seed| {
            let inst = gen_instance(10_000 + seed, 1, 1, 4, FamilyKind::AllMatchings).unwrap();
            let (som, bom) = (gft_som(&inst).unwrap(), gft_bom(&inst).unwrap());
            let opt = opt_lp(&inst).unwrap();
            if som + bom < opt - 1e-6 {
                return Some(format!("seed {seed}: {som} + {bom} < {opt}"));
            }
            for (kind, trades) in [
                (MechanismKind::Gsom, som_trades(&inst).unwrap()),
                (MechanismKind::Gbom, bom_trades(&inst).unwrap()),
            ] {
                let table = build_mechanism(&inst, kind).unwrap();
                let space = inst.profile_space().unwrap();
                for (idx, row) in table.profiles.iter().enumerate() {
                    let d = space.digits(idx);
                    if trades[d[0]][d[1]] != !row.matching.is_empty() {
                        return Some(format!("seed {seed}: {kind} trade set differs at row {idx}"));
                    }
                }
            }
            None
        })
        .collect();
    let failed = failures(results.into_iter());
    Outcome::new(failed.is_empty(), summarize(200, &failed))
}

fn ordering(cases: &[SuiteCase]) -> Outcome {
    let failed = failures(cases.iter().map(|c| {
        let gfts = [gft_exact(&c.gsom), gft_exact(&c.gbom)];
        let ok = gfts.iter().all(|&g| g >= 0.0 && g <= c.opt + 1e-6)
            && c.opt <= c.first_best + 1e-6
            && c.benchmarks.iter().all(|&b| c.opt <= b + 1e-6);
        (!ok).then(|| {
            format!(
                "{}: gft {gfts:?}, opt {}, first-best {}, benchmarks {:?}",
                c.label, c.opt, c.first_best, c.benchmarks
            )
        })
    }));
    Outcome::new(failed.is_empty(), summarize(cases.len(), &failed))
}

fn proof_chain(cases: &[SuiteCase]) -> Outcome {
    let failed = failures(cases.iter().map(|c| {
        let vs = virtual_gft(&c.gsom, MechanismKind::Gsom).unwrap();
        let vb = virtual_gft(&c.gbom, MechanismKind::Gbom).unwrap();
        let ok = c.benchmarks[1] <= vs + vb + 1e-9
            && vs <= gft_exact(&c.gsom) + 1e-9
            && vb <= gft_exact(&c.gbom) + 1e-9;
        (!ok).then(|| format!("{}: benchmark {}, virtual {vs} + {vb}", c.label, c.benchmarks[1]))
    }));
    Outcome::new(failed.is_empty(), summarize(cases.len(), &failed))
}

/// Distribution with a random support of size 1..=6 and weights skewed to
/// produce irregular cases.
fn random_distribution(rng: &mut ChaCha8Rng) -> DiscreteDistribution {
    let k = rng.gen_range(1..=6);
    let mut support: Vec<f64> = Vec::with_capacity(k);
    let mut v = 0.0;
    for _ in 0..k {
        v += rng.gen_range(1..=12) as f64 / 4.0;
        support.push(v);
    }
    let raw: Vec<f64> = (0..k)
        .map(|_| {
            if rng.gen_bool(0.3) {
                rng.gen_range(20..=60) as f64
            } else {
                rng.gen_range(1..=10) as f64
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    DiscreteDistribution::new(support, raw.iter().map(|w| w / total).collect()).unwrap()
}

/// Independent ironing oracle: hull slopes by brute force over chords.
/// For the buyer, the upper concave hull of the revenue curve through the
/// points `(q_k, p_k q_k)` with `q_k = Pr[b >= b_k]`, read from the top type down.
fn buyer_hull_slopes(d: &DiscreteDistribution) -> Vec<f64> {
    let k = d.len();
    // points indexed by t = 0..=k, t = number of top types included
    let mut pts = vec![(0.0, 0.0)];
    for t in 1..=k {
        let idx = k - t;
        let q = d.tail(idx);
        pts.push((q, d.value(idx) * q));
    }
    let hull = concave_hull_values(&pts);
    // slope of segment t-1 -> t belongs to type k - t
    let mut out = vec![0.0; k];
    for t in 1..=k {
        out[k - t] = (hull[t] - hull[t - 1]) / (pts[t].0 - pts[t - 1].0);
    }
    out
}

/// For the seller, the lower convex hull of the cost curve `(F(s_k), s_k F(s_k))`.
fn seller_hull_slopes(d: &DiscreteDistribution) -> Vec<f64> {
    let k = d.len();
    let mut pts = vec![(0.0, 0.0)];
    for idx in 0..k {
        let q = d.cdf(idx);
        pts.push((q, -d.value(idx) * q));
    }
    let hull = concave_hull_values(&pts);
    (0..k)
        .map(|idx| -(hull[idx + 1] - hull[idx]) / (pts[idx + 1].0 - pts[idx].0))
        .collect()
}

/// Value of the upper concave envelope at each of the (x-sorted) points:
/// the maximum over chords between any two points spanning it.
fn concave_hull_values(pts: &[(f64, f64)]) -> Vec<f64> {
    (0..pts.len())
        .map(|t| {
            let mut best = pts[t].1;
            for a in 0..=t {
                for b in t..pts.len() {
                    if a == b {
                        continue;
                    }
                    let (xa, ya) = pts[a];
                    let (xb, yb) = pts[b];
                    let y = ya + (yb - ya) * (pts[t].0 - xa) / (xb - xa);
                    best = best.max(y);
                }
            }
            best
        })
        .collect()
}

fn prefix_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut irregular = 0;
    let mut failed = Vec::new();
    let count = 600;
    for case in 0..count {
        let d = random_distribution(&mut rng);
        let (b, s) = (buyer_virtual_values(&d), seller_virtual_values(&d));
        if !b.is_regular() || !s.is_regular() {
            irregular += 1;
        }
        for (k, (&x, &y)) in b.ironed.iter().zip(&buyer_hull_slopes(&d)).enumerate() {
            if (x - y).abs() > 1e-9 {
                failed.push(format!("case {case}: buyer ironed[{k}] {x} vs hull {y}"));
            }
        }
        for (k, (&x, &y)) in s.ironed.iter().zip(&seller_hull_slopes(&d)).enumerate() {
            if (x - y).abs() > 1e-9 {
                failed.push(format!("case {case}: seller ironed[{k}] {x} vs hull {y}"));
            }
        }
        for k in 0..d.len() {
            let lhs: f64 = (k..d.len()).map(|r| b.ironed[r] * d.prob(r)).sum();
            let rhs = d.value(k) * (k..d.len()).map(|r| d.prob(r)).sum::<f64>();
            if lhs < rhs - 1e-9 || (!b.is_interior(k) && (lhs - rhs).abs() > 1e-9) {
                failed.push(format!("case {case}: buyer prefix at {k}: {lhs} vs {rhs}"));
            }
            let lhs: f64 = (0..=k).map(|r| s.ironed[r] * d.prob(r)).sum();
            let rhs = d.value(k) * (0..=k).map(|r| d.prob(r)).sum::<f64>();
            if lhs > rhs + 1e-9 || (!s.is_interior(k) && (lhs - rhs).abs() > 1e-9) {
                failed.push(format!("case {case}: seller prefix at {k}: {lhs} vs {rhs}"));
            }
        }
    }
    Outcome::new(
        failed.is_empty() && irregular > 0,
        format!(
            "{count} distributions ({irregular} irregular); {}",
            failed.first().map_or("all identities hold".to_string(), |f| format!(
                "{} failures, first: {f}",
                failed.len()
            ))
        ),
    )
}

/// Smallest per-pair slack over every slice; computed directly from the table.
fn worst_pair_slack(table: &MechanismTable, kind: MechanismKind) -> f64 {
    let inst = &table.instance;
    let space = inst.profile_space().unwrap();
    let mut worst = f64::INFINITY;
    for i in 0..inst.n() {
        for j in 0..inst.m() {
            let varied = match kind {
                MechanismKind::Gsom => Agent::Buyer(i),
                MechanismKind::Gbom => Agent::Seller(j),
            };
            let dist = inst.distribution(varied);
            for base in (0..space.len()).filter(|&x| space.digit(x, varied) == 0) {
                let slack: f64 = (0..dist.len())
                    .map(|k| {
                        let row = &table.profiles[space.with_digit(base, varied, k)];
                        let traded = row.matching.contains(&(i, j));
                        if traded {
                            dist.prob(k) * (row.p_b[i] - row.p_s[j])
                        } else {
                            0.0
                        }
                    })
                    .sum();
                worst = worst.min(slack);
            }
        }
    }
    worst
}

fn mechanism_audit(cases: &[SuiteCase]) -> Outcome {
    let mut audit_failures = Vec::new();
    let mut pair_failures = Vec::new();
    for c in cases {
        for (kind, table) in [(MechanismKind::Gsom, &c.gsom), (MechanismKind::Gbom, &c.gbom)] {
            let report = audit_all(table, DEFAULT_TOL_IC, DEFAULT_TOL_BB);
            if !report.mechanism_ok() {
                audit_failures.push(format!("{} {kind}", c.label));
            }
            let slack = worst_pair_slack(table, kind);
            if slack < -1e-9 {
                pair_failures.push(format!("{} {kind}: pair slack {slack}", c.label));
            }
        }
    }
    let pass = audit_failures.is_empty() && pair_failures.is_empty();
    Outcome::new(
        pass,
        format!(
            "IR/DSIC/ex-ante WBB: {}; per-pair surplus: {}",
            summarize(2 * cases.len(), &audit_failures),
            summarize(2 * cases.len(), &pair_failures)
        ),
    )
}

fn interim(table: &MechanismTable, agent: Agent) -> Vec<f64> {
    let inst = &table.instance;
    let space = inst.profile_space().unwrap();
    let dist = inst.distribution(agent);
    let mut out = vec![0.0; dist.len()];
    for (idx, row) in table.profiles.iter().enumerate() {
        let p = match agent {
            Agent::Buyer(i) => row.p_b[i],
            Agent::Seller(j) => row.p_s[j],
        };
        out[space.digit(idx, agent)] += row.prob * p / dist.prob(space.digit(idx, agent));
    }
    out
}

fn pipeline(cases: &[SuiteCase]) -> Outcome {
    let mut failed = Vec::new();
    for c in cases {
        for (kind, table) in [(MechanismKind::Gsom, &c.gsom), (MechanismKind::Gbom, &c.gbom)] {
            let rebated = exante_wbb_to_exante_sbb(table).unwrap();
            let out = wbb_to_sbb_pipeline(table).unwrap();
            if !audit_all(&out, DEFAULT_TOL_IC, DEFAULT_TOL_BB).pipeline_ok() {
                failed.push(format!("{} {kind}: audit", c.label));
            }
            if gft_exact(&out) != gft_exact(table) {
                failed.push(format!("{} {kind}: GFT changed", c.label));
            }
            for agent in c.instance.agents() {
                let (before, after) = (interim(&rebated, agent), interim(&out, agent));
                if before.iter().zip(&after).any(|(x, y)| (x - y).abs() > 1e-9) {
                    failed.push(format!("{} {kind}: interim payments of {agent} moved", c.label));
                }
            }
        }
    }
    let inst_a = Instance::bilateral(
        DiscreteDistribution::uniform(vec![1.0, 2.0]).unwrap(),
        DiscreteDistribution::point_mass(0.0).unwrap(),
    );
    let out = wbb_to_sbb_pipeline(&build_mechanism(&inst_a, MechanismKind::Gsom).unwrap()).unwrap();
    let expected = [(0.0, 0.0), (2.0, 2.0)];
    for (row, (pb, ps)) in out.profiles.iter().zip(expected) {
        if (row.p_b[0] - pb).abs() > 1e-12 || (row.p_s[0] - ps).abs() > 1e-12 {
            failed.push(format!("worked instance: row {:?} pays {:?}/{:?}", row.b, row.p_b, row.p_s));
        }
    }
    Outcome::new(failed.is_empty(), summarize(2 * cases.len() + 1, &failed))
}

fn regression() -> Outcome {
    let inst = Instance::bilateral(
        DiscreteDistribution::uniform(vec![0.0, 1.0]).unwrap(),
        DiscreteDistribution::uniform(vec![0.0, 1.0]).unwrap(),
    );
    let phi = buyer_virtual_values(inst.buyer(0)).ironed;
    let tau = seller_virtual_values(inst.seller(0)).ironed;
    let fb = first_best(&inst).unwrap();
    let bench = duality_benchmark(&inst, 1.0).unwrap();
    let opt = opt_lp(&inst).unwrap();
    let gsom = gft_exact(&build_mechanism(&inst, MechanismKind::Gsom).unwrap());
    let gbom = gft_exact(&build_mechanism(&inst, MechanismKind::Gbom).unwrap());
    let ironed = buyer_virtual_values(&DiscreteDistribution::uniform(vec![1.0, 2.0, 10.0]).unwrap()).ironed;
    let ironing_ok = ironed
        .iter()
        .zip([-3.5, -3.5, 10.0])
        .all(|(x, y)| (x - y).abs() <= 1e-12);
    let pass = phi == [-1.0, 1.0]
        && tau == [0.0, 2.0]
        && fb == 0.25
        && bench == 0.5
        && (opt - 0.25).abs() <= 1e-7
        && gsom == 0.25
        && gbom == 0.25
        && ironing_ok;
    Outcome::new(
        pass,
        format!(
            "phi {phi:?}, tau {tau:?}, first-best {fb}, benchmark {bench}, OPT {opt:.9}, GSOM {gsom}, GBOM {gbom}, ironed {{1,2,10}} {ironed:?}"
        ),
    )
}

/// A bounded random LP over at most six variables and its constraint list as
/// `(coefficients, sense, rhs)`, bounds included.
fn random_lp(rng: &mut ChaCha8Rng) -> (LpProblem, Vec<(Vec<f64>, Sense, f64)>) {
    let nv = rng.gen_range(1..=6);
    let mut lp = LpProblem::new();
    let mut cons = Vec::new();
    for v in 0..nv {
        let free = rng.gen_bool(0.4);
        lp.add_var(
            if free { VarBound::Free } else { VarBound::NonNegative },
            rng.gen_range(-5..=5) as f64,
        );
        let mut unit = vec![0.0; nv];
        unit[v] = 1.0;
        if !free {
            cons.push((unit.clone(), Sense::Ge, 0.0));
        }
        // box keeps the feasible region bounded
        for (sense, rhs) in [(Sense::Le, 10.0), (Sense::Ge, -10.0)] {
            if free || sense == Sense::Le {
                lp.add_row(vec![(v, 1.0)], sense, rhs);
                cons.push((unit.clone(), sense, rhs));
            }
        }
    }
    for _ in 0..rng.gen_range(1..=4) {
        let coeffs: Vec<f64> = (0..nv).map(|_| rng.gen_range(-3..=3) as f64).collect();
        let sense = match rng.gen_range(0..5) {
            0 => Sense::Eq,
            1 | 2 => Sense::Ge,
            _ => Sense::Le,
        };
        let rhs = rng.gen_range(-6..=8) as f64;
        lp.add_row(
            coeffs.iter().enumerate().filter(|(_, &a)| a != 0.0).map(|(j, &a)| (j, a)).collect(),
            sense,
            rhs,
        );
        cons.push((coeffs, sense, rhs));
    }
    (lp, cons)
}

/// Best objective over all basic feasible solutions, or `None` if infeasible.
fn vertex_enumeration(objective: &[f64], cons: &[(Vec<f64>, Sense, f64)]) -> Option<f64> {
    let nv = objective.len();
    let (eqs, ineqs): (Vec<_>, Vec<_>) = cons.iter().partition(|c| c.1 == Sense::Eq);
    let feasible = |x: &DVector<f64>| {
        cons.iter().all(|(a, sense, rhs)| {
            let lhs: f64 = a.iter().zip(x.iter()).map(|(a, x)| a * x).sum();
            match sense {
                Sense::Le => lhs <= rhs + 1e-9,
                Sense::Ge => lhs >= rhs - 1e-9,
                Sense::Eq => (lhs - rhs).abs() <= 1e-9,
            }
        })
    };
    let all: Vec<&(Vec<f64>, Sense, f64)> = eqs.iter().chain(ineqs.iter()).copied().collect();
    let mut best: Option<f64> = None;
    // choose nv linearly independent active constraints
    let mut chosen = Vec::with_capacity(nv);
    fn recurse(
        start: usize,
        all: &[&(Vec<f64>, Sense, f64)],
        nv: usize,
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if chosen.len() == nv {
            visit(chosen);
            return;
        }
        for k in start..all.len() {
            chosen.push(k);
            recurse(k + 1, all, nv, chosen, visit);
            chosen.pop();
        }
    }
    let mut visit = |set: &[usize]| {
        let a = DMatrix::from_fn(nv, nv, |r, c| all[set[r]].0[c]);
        let b = DVector::from_fn(nv, |r, _| all[set[r]].2);
        if a.determinant().abs() < 1e-9 {
            return;
        }
        if let Some(x) = a.lu().solve(&b) {
            if feasible(&x) {
                let value: f64 = objective.iter().zip(x.iter()).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(value, |b: f64| b.max(value)));
            }
        }
    };
    recurse(0, &all, nv, &mut chosen, &mut visit);
    best
}

fn lp_gate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let count = 80;
    let mut infeasible = 0;
    let mut failed = Vec::new();
    for case in 0..count {
        let (lp, cons) = random_lp(&mut rng);
        let oracle = vertex_enumeration(&lp.objective, &cons);
        let sol = solve_lp(&lp).unwrap();
        match (sol.status, oracle) {
            (LpStatus::Optimal, Some(v)) if (sol.objective - v).abs() <= 1e-7 => {}
            (LpStatus::Infeasible, None) => infeasible += 1,
            (status, oracle) => failed.push(format!(
                "case {case}: simplex {} {} vs vertices {oracle:?}",
                status.as_str(),
                sol.objective
            )),
        }
    }
    Outcome::new(
        failed.is_empty(),
        format!("{count} LPs ({infeasible} infeasible); {}", summarize(count, &failed)),
    )
}

fn sbb_characterization() -> Outcome {
    let mut agree_yes = 0;
    let mut agree_no = 0;
    let mut disagreements = Vec::new();
    let count = 160u64;
    for seed in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(7_000 + seed);
        let inst = gen_instance(20_000 + seed, 1, 1, 3, FamilyKind::AllMatchings).unwrap();
        let (kb, ks) = (inst.buyer(0).len(), inst.seller(0).len());
        // half arbitrary allocations, half monotone threshold allocations
        let trades: Vec<Vec<bool>> = if seed % 2 == 0 {
            let p = rng.gen_range(0.1..0.9);
            (0..kb).map(|_| (0..ks).map(|_| rng.gen_bool(p)).collect()).collect()
        } else {
            let mut cut = rng.gen_range(0..=kb);
            let cuts: Vec<usize> = (0..ks)
                .map(|_| {
                    cut = rng.gen_range(cut..=kb);
                    cut
                })
                .collect();
            (0..kb).map(|b| (0..ks).map(|s| b >= cuts[s]).collect()).collect()
        };
        let allocate = |t: &TypeProfile| {
            let d = inst.indices_of(t)?;
            Ok(if trades[d[0]][d[1]] {
                Matching {
                    pairs: vec![(0, 0)],
                    weight: 0.0,
                }
            } else {
                Matching::empty()
            })
        };
        let check = check_sbb_implementable(&inst, allocate).unwrap();
        let lp = sbb_payments_exist(&inst, allocate).unwrap();
        match (check.implementable, lp) {
            (true, true) => agree_yes += 1,
            (false, false) => agree_no += 1,
            _ => disagreements.push(format!(
                "seed {seed}: check {} (monotone {}, surplus {:.3e}) vs LP {lp}",
                check.implementable, check.monotone, check.virtual_surplus
            )),
        }
    }
    Outcome::new(
        disagreements.is_empty(),
        format!(
            "{count} allocations: {agree_yes} implementable, {agree_no} not, {} disagreements{}",
            disagreements.len(),
            disagreements.first().map_or(String::new(), |d| format!("; first: {d}"))
        ),
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let start = Instant::now();
    let cases = suite();
    let criteria: Vec<Criterion> = vec![
        ("1 sandwich (GSOM + GBOM >= OPT)", Box::new(|| sandwich(&cases))),
        ("2 bilateral sandwich and trade sets", Box::new(bilateral_sandwich)),
        ("3 ordering chain", Box::new(|| ordering(&cases))),
        ("4 proof-chain inequalities", Box::new(|| proof_chain(&cases))),
        ("5 prefix identities", Box::new(prefix_identities)),
        ("6 mechanism audit and per-pair surplus", Box::new(|| mechanism_audit(&cases))),
        ("7 budget-balancing pipeline", Box::new(|| pipeline(&cases))),
        ("8 worked-instance regression", Box::new(regression)),
        ("9 simplex vs vertex enumeration", Box::new(lp_gate)),
        ("10 SBB characterization vs LP", Box::new(sbb_characterization)),
    ];
    let mut all = true;
    for (name, run) in criteria {
        let t = Instant::now();
        let outcome = run();
        all &= outcome.pass;
        println!(
            "[{}] criterion {name}: {} ({:.2}s)",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance finished in {:.2}s", start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

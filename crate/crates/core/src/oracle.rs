//! Brute-force cross-checks.
//!
//! Every oracle here recomputes a quantity by a route that does not share
//! code with the implementation it checks: paths are enumerated one by one
//! instead of counted by dynamic programming, multiplicities and
//! discrepancies are obtained by simulating pullbacks blow-up by blow-up,
//! and the lower bounds are tested against exhaustive enumerations of small
//! systems. Sweeps run on the current rayon pool and merge results in input
//! order, so their reports do not depend on the number of threads.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bound::{self, MaximalityBound, MultiplicitySystem};
use crate::cremona::{self, Center, HomaloidalType};
use crate::picard::{self, LatticeInvolution, MobileClass, PicardClass};
use crate::surface::{self, ConicBundleDatum, ExceptionalComponent, Feasibility};
use crate::valuation::{GradedSystemData, GraphSpec, ResolutionGraph};
use crate::verdict::Verdict;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub cases: u64,
    pub counterexample: Option<Value>,
}

impl OracleOutcome {
    fn from_tally(name: &'static str, tally: Tally) -> Self {
        OracleOutcome {
            name,
            passed: tally.failure.is_none(),
            cases: tally.cases,
            counterexample: tally.failure.map(|(_, v)| v),
        }
    }
}

/// Case count plus the failure with the smallest index, if any.
#[derive(Debug, Default)]
struct Tally {
    cases: u64,
    failure: Option<(u64, Value)>,
}

impl Tally {
    fn ok(cases: u64) -> Self {
        Tally { cases, failure: None }
    }

    fn fail(index: u64, cases: u64, v: Value) -> Self {
        Tally { cases, failure: Some((index, v)) }
    }

    fn merge(self, other: Tally) -> Tally {
        let failure = match (self.failure, other.failure) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        Tally { cases: self.cases + other.cases, failure }
    }
}

fn sweep<I, F>(items: Vec<I>, check: F) -> Tally
where
    I: Send + Sync,
    F: Fn(u64, &I) -> Tally + Send + Sync,
{
    items
        .par_iter()
        .enumerate()
        .map(|(k, item)| check(k as u64, item))
        .reduce(Tally::default, Tally::merge)
}

// ---------------------------------------------------------------------------
// graphs

/// Arrows `i → j` with `i − j ≥ 2` on `k` vertices, in a fixed order.
pub fn optional_arrows(k: usize) -> Vec<(usize, usize)> {
    (3..=k).flat_map(|i| (1..i - 1).map(move |j| (i, j))).collect()
}

/// The graph on `k` vertices with the mandatory chain plus the optional
/// arrows selected by `mask`. Lower centers get codimensions cycling through
/// 3, 4, 5; the last `k − lower` centers have codimension 2.
pub fn graph_from_mask(k: usize, mask: u64, lower: usize) -> GraphSpec {
    let codims = (1..=k).map(|i| if i <= lower { 3 + ((i as u32 - 1) % 3) } else { 2 }).collect();
    let extra = optional_arrows(k)
        .into_iter()
        .enumerate()
        .filter(|(b, _)| mask >> b & 1 == 1)
        .map(|(_, a)| a);
    GraphSpec::chain(codims).with_arrows(extra)
}

/// Every `(k, mask)` with `1 ≤ k ≤ max_k`.
pub fn all_graph_masks(max_k: usize) -> Vec<(usize, u64)> {
    (1..=max_k)
        .flat_map(|k| (0..1u64 << optional_arrows(k).len()).map(move |m| (k, m)))
        .collect()
}

/// Number of directed paths from `from` to `to`, found by explicit
/// depth-first enumeration of every path.
pub fn dfs_path_count(arrows: &BTreeSet<(usize, usize)>, from: usize, to: usize) -> u64 {
    fn walk(arrows: &BTreeSet<(usize, usize)>, at: usize, to: usize, path: &mut Vec<usize>, found: &mut u64) {
        if at == to {
            *found += 1;
            return;
        }
        for &(_, next) in arrows.range((at, 0)..(at + 1, 0)) {
            path.push(next);
            walk(arrows, next, to, path, found);
            path.pop();
        }
    }
    let mut found = 0;
    walk(arrows, from, to, &mut vec![from], &mut found);
    found
}

/// Orders of vanishing along `E_1..E_K` of the total pullback of a divisor
/// whose proper transforms have multiplicities `nus` at the centers, and the
/// discrepancies `a(E_1)..a(E_K)`, obtained by simulating the blow-ups.
///
/// Blowing up `B_{j−1}` adds `mult_{B_{j−1}}` of the current pullback, which
/// is the proper transform's multiplicity plus the coefficients of every
/// exceptional divisor through `B_{j−1}` (those `E_i` with `j → i`).
/// Likewise `K_{X_j} = φ*K_{X_{j−1}} + (codim B_{j−1} − 1)E_j`.
pub fn simulate_pullback(
    codims: &[u32],
    arrows: &BTreeSet<(usize, usize)>,
    nus: &[BigInt],
) -> (Vec<BigInt>, Vec<BigInt>) {
    let mut orders: Vec<BigInt> = Vec::with_capacity(nus.len());
    let mut canon: Vec<BigInt> = Vec::with_capacity(nus.len());
    for j in 1..=nus.len() {
        let mut order = nus[j - 1].clone();
        let mut disc = BigInt::from(codims[j - 1] - 1);
        for &(_, i) in arrows.range((j, 0)..(j + 1, 0)) {
            order += &orders[i - 1];
            disc += &canon[i - 1];
        }
        orders.push(order);
        canon.push(disc);
    }
    (orders, canon)
}

/// Path-count oracle: `p(i, j)` against DFS enumeration on every graph with
/// at most `max_k` vertices.
pub fn paths_oracle(max_k: usize) -> OracleOutcome {
    let tally = sweep(all_graph_masks(max_k), |idx, &(k, mask)| {
        let graph = match ResolutionGraph::new(graph_from_mask(k, mask, k)) {
            Ok(g) => g,
            Err(e) => return Tally::fail(idx, 1, json!({"k": k, "mask": mask, "error": e.to_string()})),
        };
        let arrows: BTreeSet<_> = graph.arrows().collect();
        for i in 1..=k {
            for j in 1..=k {
                let fast = graph.path_count(i, j).expect("valid indices");
                let slow = dfs_path_count(&arrows, i, j);
                if fast != BigInt::from(slow) {
                    return Tally::fail(
                        idx,
                        1,
                        json!({"k": k, "mask": mask, "from": i, "to": j, "path_count": fast.to_string(), "dfs": slow}),
                    );
                }
            }
        }
        Tally::ok(1)
    });
    OracleOutcome::from_tally("paths", tally)
}

/// Multiplicity/discrepancy oracle on every graph with at most `max_k`
/// vertices, every lower/upper split, and every `νᵢ ≤ max_nu`.
pub fn multiplicity_oracle(max_k: usize, max_nu: u32) -> OracleOutcome {
    let tally = sweep(all_graph_masks(max_k), |idx, &(k, mask)| {
        let mut cases = 0u64;
        for lower in 0..=k {
            let graph = Arc::new(ResolutionGraph::new(graph_from_mask(k, mask, lower)).expect("enumerated graphs are valid"));
            let arrows: BTreeSet<_> = graph.arrows().collect();
            let zeros = vec![BigInt::zero(); k];
            let (_, canon) = simulate_pullback(graph.codims(), &arrows, &zeros);
            for j in 1..=k {
                if graph.discrepancy(j).expect("valid") != canon[j - 1] {
                    return Tally::fail(idx, cases, json!({"k": k, "mask": mask, "lower": lower, "vertex": j, "quantity": "discrepancy"}));
                }
            }
            // multiplicities do not depend on the codimensions
            if lower != k {
                continue;
            }
            let total = (max_nu as u64 + 1).pow(k as u32);
            for code in 0..total {
                let mut c = code;
                let nus: Vec<BigInt> = (0..k)
                    .map(|_| {
                        let v = c % (max_nu as u64 + 1);
                        c /= max_nu as u64 + 1;
                        BigInt::from(v)
                    })
                    .collect();
                let (orders, _) = simulate_pullback(graph.codims(), &arrows, &nus);
                let data = GradedSystemData::new(Arc::clone(&graph), nus.clone(), BigInt::one()).expect("valid data");
                for j in 1..=k {
                    if data.system_multiplicity(j).expect("valid") != orders[j - 1] {
                        let nus: Vec<String> = nus.iter().map(|v| v.to_string()).collect();
                        return Tally::fail(idx, cases, json!({"k": k, "mask": mask, "nus": nus, "vertex": j, "quantity": "multiplicity"}));
                    }
                }
                cases += 1;
            }
        }
        Tally::ok(cases)
    });
    OracleOutcome::from_tally("multiplicities", tally)
}

// ---------------------------------------------------------------------------
// the counting-multiplicities theorem

/// Lower part of a candidate system: `ν₁..ν_L`, `d₁..d_L` and the rows of
/// `m_{i,j}`.
#[derive(Debug, Clone)]
struct LowerSystem {
    nus: Vec<i64>,
    d: Vec<i64>,
    m: Vec<Vec<i64>>,
}

/// All lower systems on the arrows of `graph` with every entry in
/// `0..=max`, generated row by row: `νⱼ`, `dⱼ` and `m_{i,j}` (`i ≥ 1`) are
/// free, `m_{0,j}` is solved from the equality. `m_{i,j}` is only allowed to
/// be positive along an arrow and never exceeds `dᵢ`.
fn lower_systems(graph: &ResolutionGraph, max: i64) -> Vec<LowerSystem> {
    fn extend(graph: &ResolutionGraph, l: usize, max: i64, cur: &mut LowerSystem, out: &mut Vec<LowerSystem>) {
        let j = cur.nus.len() + 1;
        if j > l {
            out.push(cur.clone());
            return;
        }
        let free: Vec<usize> = (1..j).collect();
        for nu in 0..=max {
            for d in 0..=max {
                let mut pick = vec![0i64; free.len()];
                loop {
                    let shared: i64 = pick.iter().sum();
                    let m0 = nu * nu + d - shared;
                    if (0..=max).contains(&m0) {
                        let mut row = vec![m0];
                        row.extend(&pick);
                        cur.nus.push(nu);
                        cur.d.push(d);
                        cur.m.push(row);
                        extend(graph, l, max, cur, out);
                        cur.nus.pop();
                        cur.d.pop();
                        cur.m.pop();
                    }
                    // odometer over m_{i,j}, i = 1..j−1
                    let mut pos = 0;
                    loop {
                        if pos == free.len() {
                            break;
                        }
                        let i = free[pos];
                        let cap = if graph.has_arrow(j, i) { cur.d[i - 1].min(max) } else { 0 };
                        if pick[pos] < cap {
                            pick[pos] += 1;
                            break;
                        }
                        pick[pos] = 0;
                        pos += 1;
                    }
                    if pos == free.len() {
                        break;
                    }
                }
            }
        }
    }
    let l = graph.lower_len();
    let mut out = Vec::new();
    let mut cur = LowerSystem { nus: Vec::new(), d: Vec::new(), m: Vec::new() };
    extend(graph, l, max, &mut cur, &mut out);
    out
}

/// Graphs for the theorem sweep: lower part of size `1..=max_lower` with any
/// optional arrows, followed by at most one codimension-2 vertex with any
/// arrows into the lower part and upper degree in `upper_degrees`.
pub fn theorem_graphs(max_lower: usize, upper_degrees: &[i64]) -> Vec<GraphSpec> {
    let mut out = Vec::new();
    for l in 1..=max_lower {
        for lower_mask in 0..1u64 << optional_arrows(l).len() {
            let base = graph_from_mask(l, lower_mask, l);
            let base = GraphSpec { codims: vec![3; l], ..base };
            out.push(base.clone());
            for up_mask in 0..1u64 << (l - 1) {
                for &deg in upper_degrees {
                    let mut spec = base.clone();
                    spec.codims.push(2);
                    spec.arrows.push([l + 1, l]);
                    spec.arrows.extend((1..l).filter(|j| up_mask >> (j - 1) & 1 == 1).map(|j| [l + 1, j]));
                    spec.upper_degrees.insert(l + 1, deg.into());
                    out.push(spec);
                }
            }
        }
    }
    out
}

/// For every multiplicity system on [`theorem_graphs`] with entries in
/// `0..=max_entry` that passes `check_system`, and for both canonical
/// compatible functions, `Σ a(i)·m_{0,i} ≥ theorem_lower_bound`.
pub fn theorem_oracle(max_lower: usize, max_entry: i64, upper_degrees: &[i64]) -> OracleOutcome {
    let graphs = theorem_graphs(max_lower, upper_degrees);
    let tally = sweep(graphs, |idx, spec| {
        let graph = Arc::new(ResolutionGraph::new(spec.clone()).expect("enumerated graphs are valid"));
        let k = graph.num_vertices();
        let l = graph.lower_len();
        let functions = [
            graph.canonical_function(l).expect("valid"),
            graph.canonical_function(k).expect("valid"),
        ];
        let mut cases = 0;
        // the bound depends on ν only, and many systems share their ν
        let mut rhs_cache: BTreeMap<Vec<BigInt>, Vec<BigRational>> = BTreeMap::new();
        for lower in lower_systems(&graph, max_entry) {
            let tails: Vec<Option<i64>> = if k > l { (0..=max_entry).map(Some).collect() } else { vec![None] };
            for tail in tails {
                let mut nus: Vec<BigInt> = lower.nus.iter().map(|&v| v.into()).collect();
                nus.extend(tail.map(BigInt::from));
                let data = GradedSystemData::new(Arc::clone(&graph), nus.clone(), BigInt::one()).expect("valid data");
                let m = lower.m.iter().map(|row| row.iter().map(|&v| v.into()).collect()).collect();
                let d = lower.d.iter().map(|&v| v.into()).collect();
                let sys = MultiplicitySystem::new(data, m, d).expect("well-shaped system");
                if !sys.check_system().holds {
                    continue;
                }
                let rhs = rhs_cache.entry(nus).or_insert_with(|| {
                    functions
                        .iter()
                        .map(|a| bound::theorem_lower_bound(sys.data(), a).expect("canonical functions are compatible"))
                        .collect()
                });
                for (a, rhs) in functions.iter().zip(rhs.iter()) {
                    let lhs = sys.weighted_m0(a).expect("lengths match");
                    if &lhs < rhs {
                        return Tally::fail(
                            idx,
                            cases,
                            json!({"graph": spec, "nus": lower.nus, "tail": tail, "d": lower.d, "m": lower.m}),
                        );
                    }
                }
                cases += 1;
            }
        }
        Tally::ok(cases)
    });
    OracleOutcome::from_tally("theorem", tally)
}

/// `Σ₀`/`Σ₁` pairs realized by graphs with at most `max_k` vertices, over
/// every split into lower and upper part with nonempty lower part.
pub fn sigma_pairs(max_k: usize) -> BTreeSet<(u64, u64)> {
    all_graph_masks(max_k)
        .par_iter()
        .map(|&(k, mask)| {
            let graph = ResolutionGraph::new(graph_from_mask(k, mask, k)).expect("valid");
            let w: Vec<u64> = graph
                .path_weights(k)
                .expect("valid")
                .iter()
                .map(|p| u64::try_from(p).expect("small graphs have small path counts"))
                .collect();
            (1..=k)
                .map(|l| (w[..l].iter().sum(), w[l..].iter().sum()))
                .collect::<BTreeSet<(u64, u64)>>()
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        })
}

/// The bound on `m` is at least `4n²`, strictly above it exactly when the
/// upper part carries weight, for every graph with at most `max_k` vertices
/// and every `n ≤ max_n`. Graphs with at most `full_api_k` vertices also go
/// through [`bound::required_m_lower_bound`] end to end.
pub fn maximality_bound_oracle(max_k: usize, max_n: i64, full_api_k: usize) -> OracleOutcome {
    let pairs: Vec<(u64, u64)> = sigma_pairs(max_k).into_iter().collect();
    let mut tally = sweep(pairs, |idx, &(s0, s1)| {
        for n in 1..=max_n {
            let b = match MaximalityBound::from_sums(s0.into(), s1.into(), n.into()) {
                Ok(b) => b,
                Err(e) => return Tally::fail(idx, 0, json!({"sigma0": s0, "sigma1": s1, "n": n, "error": e.to_string()})),
            };
            let four = BigRational::from_integer(BigInt::from(4 * n * n));
            // independent evaluation of the closed form
            let direct = BigRational::new(
                BigInt::from(n * n) * BigInt::from(2 * s0 + s1).pow(2),
                BigInt::from(s0) * BigInt::from(s0 + s1),
            );
            let strict_ok = if s1 > 0 { b.bound > four } else { b.bound == four };
            if b.bound != direct || !strict_ok || !b.implies_m_above_four_n_squared() {
                return Tally::fail(idx, 0, json!({"sigma0": s0, "sigma1": s1, "n": n}));
            }
        }
        Tally::ok(max_n as u64)
    });
    let full = sweep(all_graph_masks(full_api_k), |idx, &(k, mask)| {
        let mut cases = 0;
        for lower in 1..=k {
            let spec = graph_from_mask(k, mask, lower);
            let arrows: BTreeSet<(usize, usize)> = spec.arrows.iter().map(|&[i, j]| (i, j)).collect();
            let w: Vec<u64> = (1..=k).map(|i| dfs_path_count(&arrows, k, i)).collect();
            let (s0, s1): (u64, u64) = (w[..lower].iter().sum(), w[lower..].iter().sum());
            let graph = Arc::new(ResolutionGraph::new(spec).expect("valid"));
            for n in [1i64, 7, max_n] {
                let data = GradedSystemData::new(Arc::clone(&graph), vec![BigInt::zero(); k], n.into()).expect("valid");
                let b = bound::required_m_lower_bound(&data).expect("lower part nonempty");
                if b.sigma0 != BigInt::from(s0) || b.sigma1 != BigInt::from(s1) || !b.implies_m_above_four_n_squared() {
                    return Tally::fail(idx, cases, json!({"k": k, "mask": mask, "lower": lower, "n": n}));
                }
                cases += 1;
            }
        }
        Tally::ok(cases)
    });
    tally = tally.merge(Tally { cases: full.cases, failure: full.failure.map(|(i, v)| (i + u64::MAX / 2, v)) });
    OracleOutcome::from_tally("maximality_bound", tally)
}

// ---------------------------------------------------------------------------
// plane Cremona maps

/// Seed and length for the `index`-th generated homaloidal type.
pub fn corpus_entry(base_seed: u64, index: u64) -> (u64, usize) {
    (base_seed.wrapping_add(index), (index % 11) as usize)
}

/// Noether equations, inequality, factorization and the involution
/// round-trip on `count` generated types.
pub fn cremona_oracle(count: u64, base_seed: u64) -> OracleOutcome {
    let items: Vec<u64> = (0..count).collect();
    let tally = sweep(items, |idx, &i| {
        let (seed, steps) = corpus_entry(base_seed, i);
        let t = cremona::random_homaloidal(seed, steps);
        match check_cremona_type(&t) {
            Ok(()) => Tally::ok(1),
            Err(reason) => Tally::fail(idx, 1, json!({"seed": seed, "steps": steps, "type": t, "reason": reason})),
        }
    });
    OracleOutcome::from_tally("cremona", tally)
}

/// Returns a description of the first failed property.
pub fn check_cremona_type(t: &HomaloidalType) -> Result<(), String> {
    if !t.verify_noether_equations().holds {
        return Err("Noether equations".into());
    }
    let degree = t.degree().clone();
    if degree >= BigInt::from(2) {
        let mut sorted: Vec<&BigInt> = t.mults().iter().collect();
        sorted.sort_by(|a, b| b.cmp(a));
        if sorted.len() < 3 || sorted[0] + sorted[1] + sorted[2] <= degree {
            return Err("Noether inequality".into());
        }
    }
    let steps = t.factorize().map_err(|e| format!("factorize: {e}"))?;
    if BigInt::from(steps.len()) > &degree - 1 {
        return Err("more than n - 1 steps".into());
    }
    let mut expect = t.clone();
    for s in &steps {
        if s.before != expect || s.after.degree() >= s.before.degree() {
            return Err("steps do not chain with decreasing degree".into());
        }
        expect = s.after.clone();
    }
    if !expect.is_identity() {
        return Err("factorization does not end at (1; )".into());
    }
    // rebuild the input from (1; ) by undoing the steps in reverse
    let mut cur = HomaloidalType::identity();
    for s in steps.iter().rev() {
        let fwd = s
            .before
            .apply_quadratic_at(s.triple.map(Center::BasePoint))
            .map_err(|e| format!("replay: {e}"))?;
        if !fwd.result.same_numerical_type(&cur) {
            return Err("replayed step does not match".into());
        }
        let centers = fwd.images.map(|img| img.map_or(Center::General, Center::BasePoint));
        cur = cur.apply_quadratic_at(centers).map_err(|e| format!("inverse: {e}"))?.result;
        if !cur.same_numerical_type(&s.before) {
            return Err("inverse step does not restore the previous type".into());
        }
    }
    if !cur.same_numerical_type(t) {
        return Err("round trip does not reproduce the input".into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// untwisting

/// `(τ*)² = id`, the projection relations, and the untwisting inequalities
/// for every `(n, ν)` with `1 ≤ n ≤ max_n`, `ν > n`, `3n − 2ν ≥ 1`.
pub fn untwist_oracle(max_n: i64) -> OracleOutcome {
    let tau = LatticeInvolution::quartic();
    if !tau.is_involution() || !tau.verify_projection_relations() || tau.determinant() != BigInt::from(-1) {
        return OracleOutcome::from_tally("untwist", Tally::fail(0, 0, json!({"reason": "lattice involution"})));
    }
    let items: Vec<i64> = (1..=max_n).collect();
    let tally = sweep(items, |idx, &n| {
        let mut cases = 0;
        let mut nu = n + 1;
        while 3 * n - 2 * nu >= 1 {
            let m = MobileClass::new(n, nu).expect("n >= 1");
            let ok = match picard::untwist_step(&m) {
                Ok(next) => {
                    let back = picard::untwist_step(&next);
                    next.n < m.n && next.nu < next.n && back.map(|b| b == m).unwrap_or(false)
                }
                Err(_) => false,
            };
            if !ok {
                return Tally::fail(idx, cases, json!({"n": n, "nu": nu}));
            }
            let c = PicardClass::new(n, nu - 2 * n);
            if picard::tau_action(&picard::tau_action(&c)) != c {
                return Tally::fail(idx, cases, json!({"class": c.to_string()}));
            }
            cases += 1;
            nu += 1;
        }
        Tally::ok(cases)
    });
    OracleOutcome::from_tally("untwist", tally)
}

// ---------------------------------------------------------------------------
// double spaces

/// Degree left over on a curve carrying a series of degree `degree` after
/// imposing `points` base points of multiplicity `mult`, one point at a time.
pub fn residual_degree(degree: &BigInt, points: u64, mult: &BigInt) -> BigInt {
    let mut left = degree.clone();
    for _ in 0..points {
        left -= mult;
    }
    left
}

/// Third curve case: no feasible `(ν, ν*)` with `max(ν, ν*) > n` for
/// `3 ≤ m ≤ max_m`, `1 ≤ n ≤ max_n`, `0 ≤ ν, ν* ≤ 4n`.
pub fn case3_oracle(max_m: i64, max_n: i64) -> OracleOutcome {
    let items: Vec<(i64, i64)> = (3..=max_m).flat_map(|m| (1..=max_n).map(move |n| (m, n))).collect();
    let tally = sweep(items, |idx, &(m, n)| {
        let mut cases = 0;
        for nu in 0..=4 * n {
            for nu_star in 0..=4 * n {
                let feasible = surface::case3_feasible(&n, &m, &nu, &nu_star);
                if feasible && nu.max(nu_star) > n {
                    return Tally::fail(idx, cases, json!({"n": n, "m": m, "nu": nu, "nu_star": nu_star}));
                }
                cases += 1;
            }
        }
        // exact-rational entry point on the diagonal and just off it
        for (nu, nu_star) in [(n, n), (n + 1, n), (n, n + 1)] {
            let q = |v: i64| BigRational::from_integer(v.into());
            let rec = surface::exclude_curve_case3(&q(n), m as u32, &q(nu), &q(nu_star)).expect("m >= 3");
            let expected = if nu == n && nu_star == n { Feasibility::Feasible } else { Feasibility::Infeasible };
            if rec.feasibility != expected {
                return Tally::fail(idx, cases, json!({"n": n, "m": m, "nu": nu, "nu_star": nu_star, "route": "rational"}));
            }
        }
        Tally::ok(cases)
    });
    OracleOutcome::from_tally("case3", tally)
}

/// Point case rejects exactly `ν > 2n`; curve cases 1–2 reject exactly
/// `ν > n` and agree with the residual-degree principle.
pub fn double_space_oracle(max_n: i64, max_deg_r: i64) -> OracleOutcome {
    let items: Vec<i64> = (1..=max_n).collect();
    let tally = sweep(items, |idx, &n| {
        let nb = BigInt::from(n);
        let mut cases = 0;
        for nu in 0..=4 * n {
            let vb = BigInt::from(nu);
            let point = surface::exclude_point_double_space(&nb, &vb).expect("valid");
            if point.verdict.is_contradiction() != (nu > 2 * n) {
                return Tally::fail(idx, cases, json!({"case": "point", "n": n, "nu": nu}));
            }
            let c1 = surface::exclude_curve_case1(&nb, &vb).expect("valid");
            let principle = residual_degree(&(BigInt::from(2) * &nb), 2, &vb).is_negative();
            if c1.verdict.is_contradiction() != (nu > n) || c1.verdict.is_contradiction() != principle {
                return Tally::fail(idx, cases, json!({"case": "curve1", "n": n, "nu": nu}));
            }
            let mut verdicts = BTreeSet::new();
            for deg_r in 1..=max_deg_r {
                let rb = BigInt::from(deg_r);
                let c2 = surface::exclude_curve_case2(&nb, &vb, &rb).expect("valid");
                let principle = residual_degree(&(&nb * &rb), deg_r as u64, &vb).is_negative();
                if c2.verdict.is_contradiction() != (nu > n) || c2.verdict.is_contradiction() != principle {
                    return Tally::fail(idx, cases, json!({"case": "curve2", "n": n, "nu": nu, "deg_r": deg_r}));
                }
                verdicts.insert(c2.verdict.is_contradiction());
            }
            if verdicts.len() != 1 {
                return Tally::fail(idx, cases, json!({"case": "curve2-independence", "n": n, "nu": nu}));
            }
            cases += 1;
        }
        Tally::ok(cases)
    });
    OracleOutcome::from_tally("double_space", tally)
}

// ---------------------------------------------------------------------------
// conic bundles

/// A random datum meeting every precondition, with entries drawn from
/// `1..=100` (`0..=100` for the discriminant pairing).
pub fn random_conic_bundle(rng: &mut ChaCha8Rng) -> ConicBundleDatum {
    let mu: i64 = rng.gen_range(1..=100);
    let count = rng.gen_range(1..=6);
    let exceptional: Vec<ExceptionalComponent> = (0..count)
        .map(|_| ExceptionalComponent {
            nu: rng.gen_range(1..=100i64).into(),
            e_dot_l: rng.gen_range(1..=100i64).into(),
        })
        .collect();
    let excess: BigInt = exceptional.iter().map(|c| (&c.nu - mu) * &c.e_dot_l).sum();
    let a_dot_l = excess - rng.gen_range(1..=100i64);
    let disc = rng.gen_range(0..=100i64);
    ConicBundleDatum::new(mu.into(), a_dot_l, disc.into(), exceptional).expect("generated datum is valid")
}

pub fn conic_bundle_oracle(count: u64, seed: u64) -> OracleOutcome {
    let items: Vec<u64> = (0..count).collect();
    let tally = sweep(items, |idx, &i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
        let datum = random_conic_bundle(&mut rng);
        match surface::conic_bundle_check(&datum) {
            Ok(rec) if rec.verdict == Verdict::Contradiction && rec.test_surface_pairing.is_negative() => Tally::ok(1),
            other => Tally::fail(idx, 1, json!({"datum": datum, "result": format!("{other:?}")})),
        }
    });
    let symbolic = Tally {
        cases: 2,
        failure: (!four_mu_identity_holds() || !sigma_identity_holds())
            .then(|| (u64::MAX, json!({"reason": "symbolic identity"}))),
    };
    OracleOutcome::from_tally("conic_bundle", tally.merge(symbolic))
}

// ---------------------------------------------------------------------------
// symbolic identities

/// Polynomial in two variables with exact integer coefficients, keyed by
/// exponent pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly2(BTreeMap<(u32, u32), BigInt>);

impl Poly2 {
    pub fn var(which: usize) -> Self {
        let key = if which == 0 { (1, 0) } else { (0, 1) };
        Poly2(BTreeMap::from([(key, BigInt::one())]))
    }

    pub fn constant(c: i64) -> Self {
        Poly2(BTreeMap::from([((0, 0), BigInt::from(c))])).normalized()
    }

    fn normalized(mut self) -> Self {
        self.0.retain(|_, c| !c.is_zero());
        self
    }

    pub fn add(&self, o: &Poly2) -> Poly2 {
        let mut out = self.0.clone();
        for (k, c) in &o.0 {
            *out.entry(*k).or_default() += c;
        }
        Poly2(out).normalized()
    }

    pub fn neg(&self) -> Poly2 {
        Poly2(self.0.iter().map(|(k, c)| (*k, -c)).collect())
    }

    pub fn sub(&self, o: &Poly2) -> Poly2 {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly2) -> Poly2 {
        let mut out: BTreeMap<(u32, u32), BigInt> = BTreeMap::new();
        for ((a, b), c) in &self.0 {
            for ((x, y), d) in &o.0 {
                *out.entry((a + x, b + y)).or_default() += c * d;
            }
        }
        Poly2(out).normalized()
    }

    pub fn scale(&self, k: i64) -> Poly2 {
        self.mul(&Poly2::constant(k))
    }
}

/// `ν² − 4μ(ν − μ) = (ν − 2μ)²` as polynomials in `(μ, ν)`.
pub fn four_mu_identity_holds() -> bool {
    let (mu, nu) = (Poly2::var(0), Poly2::var(1));
    let lhs = nu.mul(&nu).sub(&mu.scale(4).mul(&nu.sub(&mu)));
    let root = nu.sub(&mu.scale(2));
    lhs == root.mul(&root)
}

/// `(2Σ₀ + Σ₁)² − 4Σ₀(Σ₀ + Σ₁) = Σ₁²` as polynomials in `(Σ₀, Σ₁)`.
pub fn sigma_identity_holds() -> bool {
    let (s0, s1) = (Poly2::var(0), Poly2::var(1));
    let sum = s0.scale(2).add(&s1);
    let lhs = sum.mul(&sum).sub(&s0.scale(4).mul(&s0.add(&s1)));
    lhs == s1.mul(&s1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dfs_counts_small_graphs() {
        let arrows: BTreeSet<_> = [(2, 1), (3, 2), (3, 1)].into();
        assert_eq!(dfs_path_count(&arrows, 3, 1), 2);
        assert_eq!(dfs_path_count(&arrows, 2, 2), 1);
        assert_eq!(dfs_path_count(&arrows, 1, 3), 0);
    }

    #[test]
    fn simulation_matches_hand_computation() {
        let arrows: BTreeSet<_> = [(2, 1), (3, 2), (3, 1)].into();
        let nus = [1, 1, 1].map(BigInt::from);
        let (orders, canon) = simulate_pullback(&[3, 3, 3], &arrows, &nus);
        assert_eq!(orders, [1, 2, 4].map(BigInt::from));
        assert_eq!(canon, [2, 4, 8].map(BigInt::from));
    }

    #[test]
    fn graph_enumeration_counts() {
        assert_eq!(optional_arrows(6).len(), 10);
        let masks = all_graph_masks(6);
        assert_eq!(masks.len(), 1 + 1 + 2 + 8 + 64 + 1024);
        for &(k, mask) in masks.iter().step_by(97) {
            assert!(graph_from_mask(k, mask, k / 2).validate().valid);
        }
    }

    #[test]
    fn lower_systems_respect_support_and_bound() {
        let g = ResolutionGraph::new(GraphSpec::chain(vec![3, 3, 3])).unwrap();
        let systems = lower_systems(&g, 3);
        assert!(!systems.is_empty());
        for s in &systems {
            assert_eq!(s.m[2][1], 0, "no arrow 3->1");
            assert!(s.m[1][1] <= s.d[0]);
            for j in 0..3 {
                assert_eq!(s.nus[j] * s.nus[j] + s.d[j], s.m[j].iter().sum::<i64>());
            }
        }
    }

    #[test]
    fn theorem_bound_is_attained() {
        // equality means an off-by-one in either side would show up in the sweep
        let spec = GraphSpec::chain(vec![3, 3, 2]).with_arrows([(3, 1)]);
        let data = GradedSystemData::from_parts(spec, &[4, 2, 1], 1).unwrap();
        let m = vec![vec![16.into()], vec![5.into(), 0.into()]];
        let sys = MultiplicitySystem::new(data, m, vec![0.into(), 1.into()]).unwrap();
        assert!(sys.check_system().holds);
        for source in [2, 3] {
            let a = sys.data().graph().canonical_function(source).unwrap();
            let rhs = bound::theorem_lower_bound(sys.data(), &a).unwrap();
            assert_eq!(sys.weighted_m0(&a).unwrap(), rhs);
        }
    }

    #[test]
    fn symbolic_identities() {
        assert!(four_mu_identity_holds());
        assert!(sigma_identity_holds());
        let x = Poly2::var(0);
        assert_ne!(x.mul(&x), x.scale(2));
    }

    #[test]
    fn small_sweeps_pass() {
        assert!(paths_oracle(4).passed);
        assert!(multiplicity_oracle(3, 2).passed);
        assert!(theorem_oracle(2, 3, &[1]).passed);
        assert!(maximality_bound_oracle(4, 3, 3).passed);
        assert!(cremona_oracle(50, 9).passed);
        assert!(untwist_oracle(20).passed);
        assert!(case3_oracle(5, 5).passed);
        assert!(double_space_oracle(5, 3).passed);
        assert!(conic_bundle_oracle(100, 3).passed);
    }

    #[test]
    fn tally_keeps_the_earliest_failure() {
        let a = Tally::fail(5, 1, json!("late"));
        let b = Tally::fail(2, 1, json!("early"));
        let merged = a.merge(b).merge(Tally::ok(3));
        assert_eq!(merged.cases, 5);
        assert_eq!(merged.failure.unwrap().1, json!("early"));
    }
}

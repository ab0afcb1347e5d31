//! GCD graphs on small integer sets: construction, the brute-force model
//! problem, the primorial counterexample, the Green–Walker ratio and the
//! compression-measure bookkeeping.

use crate::arith::{factorize, gcd, small_primes};
use crate::error::{Error, Result};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, HashMap};

pub const GRAPH_CAP: usize = 10_000;
pub const MODEL_CAP: usize = 2000;
pub const PAIR_CAP: u64 = 10_000_000;
/// Growth exponent slack in the Green–Walker ratio.
pub const GREEN_WALKER_EPS: f64 = 0.1;

fn as_string<S: Serializer, T: ToString>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn as_strings<S: Serializer, T: ToString>(v: &[T], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GcdInstance {
    #[serde(rename = "S")]
    pub s: Vec<u64>,
    #[serde(rename = "B")]
    pub b: u64,
    pub eta: f64,
}

impl GcdInstance {
    pub fn new(mut s: Vec<u64>, b: u64, eta: f64) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidInput("the set must be nonempty".into()));
        }
        if s.contains(&0) {
            return Err(Error::InvalidInput("elements must be positive".into()));
        }
        if b == 0 {
            return Err(Error::InvalidInput("B must be at least 1".into()));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "eta must lie in (0, 1], got {eta}"
            )));
        }
        let n = s.len();
        s.sort_unstable();
        s.dedup();
        if s.len() != n {
            return Err(Error::InvalidInput("elements must be distinct".into()));
        }
        Ok(GcdInstance { s, b, eta })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GcdGraph {
    pub vertices: Vec<u64>,
    #[serde(rename = "B")]
    pub b: u64,
    /// Unordered pairs `(u, v)` with `u` before `v` in `vertices`.
    pub edges: Vec<(u64, u64)>,
    pub density: f64,
}

impl GcdGraph {
    pub fn has_edge(&self, u: u64, v: u64) -> bool {
        self.vertices.contains(&u) && self.vertices.contains(&v) && u != v && gcd(u, v) >= self.b
    }
}

pub fn build_gcd_graph(s: &[u64], b: u64) -> Result<GcdGraph> {
    if s.len() > GRAPH_CAP {
        return Err(Error::cap("graph size", s.len() as u64, GRAPH_CAP as u64));
    }
    let edges: Vec<(u64, u64)> = (0..s.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let u = s[i];
            s[i + 1..]
                .iter()
                .filter(move |&&v| gcd(u, v) >= b)
                .map(move |&v| (u, v))
        })
        .collect();
    let n = s.len() as f64;
    let pairs = n * (n - 1.0) / 2.0;
    let density = if pairs > 0.0 {
        edges.len() as f64 / pairs
    } else {
        0.0
    };
    Ok(GcdGraph {
        vertices: s.to_vec(),
        b,
        edges,
        density,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelSolution {
    pub g: u64,
    pub multiplicity: usize,
}

fn divisors(f: &[(u64, u32)]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in f {
        let len = out.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out
}

/// The divisor `g ≥ B` of some element dividing the most elements; ties go to
/// the smallest `g`. `None` when no element has a divisor `≥ B`.
pub fn model_problem_search(inst: &GcdInstance) -> Result<Option<ModelSolution>> {
    if inst.s.len() > MODEL_CAP {
        return Err(Error::cap(
            "model problem size",
            inst.s.len() as u64,
            MODEL_CAP as u64,
        ));
    }
    if let Some(&big) = inst.s.iter().find(|&&s| s > 1u64 << 63) {
        return Err(Error::InvalidInput(format!("{big} exceeds 2^63")));
    }
    let factored: Vec<Vec<(u64, u32)>> = inst
        .s
        .par_iter()
        .map(|&s| factorize(s).ok_or(Error::FactorizationTooHard(s)))
        .collect::<Result<_>>()?;
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for f in &factored {
        for d in divisors(f) {
            if d >= inst.b {
                *counts.entry(d).or_default() += 1;
            }
        }
    }
    let best = counts
        .into_iter()
        .max_by(|x, y| x.1.cmp(&y.1).then(y.0.cmp(&x.0)))
        .map(|(g, _)| g);
    Ok(best.map(|g| {
        let multiplicity = inst.s.iter().filter(|&&s| s % g == 0).count();
        ModelSolution { g, multiplicity }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChowInstance {
    pub y: u64,
    /// Primes in `(y, 2y]`.
    pub primes: Vec<u64>,
    #[serde(rename = "Q", serialize_with = "as_string")]
    pub q: u128,
    #[serde(rename = "S", serialize_with = "as_strings")]
    pub s: Vec<u128>,
    /// `B = Q/(4y²)` as a float; the comparisons use `g·4y² ≥ Q` exactly.
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(serialize_with = "as_string")]
    pub b_denominator: u128,
    #[serde(serialize_with = "as_string")]
    pub min_pair_gcd: u128,
    #[serde(serialize_with = "as_string")]
    pub max_triple_gcd: u128,
    pub pairs_above_b: bool,
    pub triples_below_b: bool,
    pub max_multiplicity: usize,
}

impl ChowInstance {
    /// `⌈B⌉`, the integer threshold with the same edge set.
    pub fn integer_threshold(&self) -> u128 {
        self.q.div_ceil(self.b_denominator)
    }
}

fn gcd128(a: u128, b: u128) -> u128 {
    num_integer::gcd(a, b)
}

/// `Q = Π_{p≤2y} p`, `S = {Q/p : y < p ≤ 2y}`, `B = Q/4y²`: every pair of
/// elements shares a divisor `≥ B` but no divisor `≥ B` divides three.
pub fn chow_counterexample(y: u64) -> Result<ChowInstance> {
    if y == 0 {
        return Err(Error::InvalidInput("y must be at least 1".into()));
    }
    if 2 * y > 97 {
        return Err(Error::cap("2y for a 128-bit primorial", 2 * y, 97u64));
    }
    let all = small_primes(2 * y as usize);
    let q: u128 = all.iter().map(|&p| p as u128).product();
    let primes: Vec<u64> = all.into_iter().filter(|&p| p > y).collect();
    let s: Vec<u128> = primes.iter().map(|&p| q / p as u128).collect();
    let den = 4 * (y as u128) * (y as u128);
    let at_least_b = |g: u128| g * den >= q;
    let n = s.len();
    let mut min_pair = u128::MAX;
    let mut max_triple = 0u128;
    for i in 0..n {
        for j in i + 1..n {
            let g = gcd128(s[i], s[j]);
            min_pair = min_pair.min(g);
            for &t in &s[j + 1..] {
                max_triple = max_triple.max(gcd128(g, t));
            }
        }
    }
    let pairs_above_b = n < 2 || at_least_b(min_pair);
    let triples_below_b = n < 3 || !at_least_b(max_triple);
    // a divisor of k elements divides their gcd, so the triple bound caps
    // every larger subset as well
    let max_multiplicity = if n == 0 {
        0
    } else if n >= 3 && !triples_below_b {
        (3..=n)
            .take_while(|&k| subsets_reach(&s, k, &at_least_b))
            .last()
            .unwrap_or(2)
    } else if subsets_reach(&s, 2, &at_least_b) {
        2
    } else {
        1
    };
    Ok(ChowInstance {
        y,
        primes,
        q,
        s,
        b: q as f64 / den as f64,
        b_denominator: den,
        min_pair_gcd: if n >= 2 { min_pair } else { 0 },
        max_triple_gcd: max_triple,
        pairs_above_b,
        triples_below_b,
        max_multiplicity,
    })
}

fn subsets_reach(s: &[u128], k: usize, ok: &impl Fn(u128) -> bool) -> bool {
    fn rec(s: &[u128], start: usize, left: usize, g: u128, ok: &impl Fn(u128) -> bool) -> bool {
        if left == 0 {
            return ok(g);
        }
        // g = 0 stands for the empty gcd
        if g != 0 && !ok(g) {
            return false;
        }
        (start..s.len()).any(|i| rec(s, i + 1, left - 1, gcd128(g, s[i]), ok))
    }
    rec(s, 0, k, 0, ok)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenWalker {
    pub delta: f64,
    pub ratio: f64,
    #[serde(rename = "X")]
    pub x: u64,
    #[serde(rename = "Y")]
    pub y: u64,
    pub edges: u64,
}

fn dyadic_floor(set: &[u64], name: &str) -> Result<u64> {
    let lo = *set
        .iter()
        .min()
        .ok_or_else(|| Error::InvalidInput(format!("{name} is empty")))?;
    let hi = *set.iter().max().expect("nonempty");
    if lo == 0 || hi > 2 * lo {
        return Err(Error::InvalidInput(format!(
            "{name} does not fit in a dyadic range [X, 2X]"
        )));
    }
    Ok(lo)
}

/// `δ` = fraction of pairs in `R × S` with gcd `≥ B`, and the ratio
/// `|R||S| B² δ^{2+ε} / (XY)` with `X = min R`, `Y = min S`.
pub fn green_walker_ratio(r: &[u64], s: &[u64], b: u64) -> Result<GreenWalker> {
    let pairs = r.len() as u64 * s.len() as u64;
    if pairs > PAIR_CAP {
        return Err(Error::cap("pair gcd count", pairs, PAIR_CAP));
    }
    let x = dyadic_floor(r, "R")?;
    let y = dyadic_floor(s, "S")?;
    let edges: u64 = r
        .par_iter()
        .map(|&u| s.iter().filter(|&&v| gcd(u, v) >= b).count() as u64)
        .sum();
    let delta = edges as f64 / pairs as f64;
    let ratio = if edges == 0 {
        0.0
    } else {
        pairs as f64 * (b as f64).powi(2) * delta.powf(2.0 + GREEN_WALKER_EPS)
            / (x as f64 * y as f64)
    };
    Ok(GreenWalker {
        delta,
        ratio,
        x,
        y,
        edges,
    })
}

/// Exponent vector of a divisor.
pub type Exponents = BTreeMap<u64, u32>;

fn value_of(e: &Exponents) -> BigUint {
    e.iter().fold(BigUint::from(1u32), |acc, (&p, &k)| {
        acc * BigUint::from(p).pow(k)
    })
}

fn divides(e: &Exponents, v: u64) -> bool {
    e.iter().all(|(&p, &k)| {
        let mut m = v;
        (0..k).all(|_| {
            let ok = m.is_multiple_of(p);
            m /= p;
            ok
        })
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGcdGraph {
    pub v: Vec<u64>,
    pub w: Vec<u64>,
    pub threshold: u64,
    pub a: Exponents,
    pub b: Exponents,
    /// Index pairs into `v` and `w`.
    pub edges: Vec<(usize, usize)>,
}

impl BipartiteGcdGraph {
    pub fn new(v: Vec<u64>, w: Vec<u64>, threshold: u64) -> Result<Self> {
        Self::with_divisors(v, w, threshold, Exponents::new(), Exponents::new())
    }

    /// Fails unless `a` divides every element of `V` and `b` every element of `W`.
    pub fn with_divisors(
        v: Vec<u64>,
        w: Vec<u64>,
        threshold: u64,
        a: Exponents,
        b: Exponents,
    ) -> Result<Self> {
        let pairs = v.len() as u64 * w.len() as u64;
        if pairs > PAIR_CAP {
            return Err(Error::cap("pair gcd count", pairs, PAIR_CAP));
        }
        if let Some(x) = v.iter().find(|&&x| !divides(&a, x)) {
            return Err(Error::InvalidInput(format!(
                "a = {} does not divide {x}",
                value_of(&a)
            )));
        }
        if let Some(x) = w.iter().find(|&&x| !divides(&b, x)) {
            return Err(Error::InvalidInput(format!(
                "b = {} does not divide {x}",
                value_of(&b)
            )));
        }
        let edges = (0..v.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let vi = v[i];
                w.iter()
                    .enumerate()
                    .filter(move |&(_, &wj)| gcd(vi, wj) >= threshold)
                    .map(move |(j, _)| (i, j))
            })
            .collect();
        Ok(BipartiteGcdGraph {
            v,
            w,
            threshold,
            a,
            b,
            edges,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty() || self.w.is_empty()
    }

    pub fn delta(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.edges.len() as f64 / (self.v.len() as f64 * self.w.len() as f64)
        }
    }

    pub fn a_value(&self) -> BigUint {
        value_of(&self.a)
    }

    pub fn b_value(&self) -> BigUint {
        value_of(&self.b)
    }

    fn primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self.a.keys().chain(self.b.keys()).copied().collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }

    fn gap(&self, p: u64) -> u32 {
        let x = self.a.get(&p).copied().unwrap_or(0);
        x.abs_diff(self.b.get(&p).copied().unwrap_or(0))
    }

    /// `ab/(a,b)² = Π p^{|α_p − β_p|}`.
    pub fn divisor_factor(&self) -> BigUint {
        self.primes()
            .into_iter()
            .fold(BigUint::from(1u32), |acc, p| {
                acc * BigUint::from(p).pow(self.gap(p))
            })
    }

    /// `δ^10 |V| |W| ab/(a,b)²`; zero for an empty graph.
    pub fn measure(&self) -> f64 {
        if self.is_empty() || self.edges.is_empty() {
            return 0.0;
        }
        let log = 10.0 * self.delta().ln()
            + (self.v.len() as f64).ln()
            + (self.w.len() as f64).ln()
            + self
                .primes()
                .into_iter()
                .map(|p| self.gap(p) as f64 * (p as f64).ln())
                .sum::<f64>();
        log.exp()
    }

    /// Edges as value pairs.
    pub fn edge_values(&self) -> Vec<(u64, u64)> {
        self.edges
            .iter()
            .map(|&(i, j)| (self.v[i], self.w[j]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Whether the restriction imposes `p | v` (else `p ∤ v`).
    pub v_divisible: bool,
    pub w_divisible: bool,
    pub graph: BipartiteGcdGraph,
    pub measure: f64,
    pub empty: bool,
}

fn restrict(xs: &[u64], p: u64, divisible: bool) -> Vec<u64> {
    xs.iter()
        .copied()
        .filter(|&x| (x % p == 0) == divisible)
        .collect()
}

fn impose(e: &Exponents, p: u64, divisible: bool) -> Exponents {
    let mut out = e.clone();
    if divisible {
        out.entry(p).or_insert(1);
    }
    out
}

/// The four restrictions `(p | v or p ∤ v) × (p | w or p ∤ w)`.
pub fn compression_step(g: &BipartiteGcdGraph, p: u64) -> Result<[Candidate; 4]> {
    if !crate::arith::is_prime_u64(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    if g.is_empty() {
        return Err(Error::InvalidInput("the graph has no vertices".into()));
    }
    let make = |vd: bool, wd: bool| -> Result<Candidate> {
        let graph = BipartiteGcdGraph::with_divisors(
            restrict(&g.v, p, vd),
            restrict(&g.w, p, wd),
            g.threshold,
            impose(&g.a, p, vd),
            impose(&g.b, p, wd),
        )?;
        let empty = graph.is_empty();
        let measure = graph.measure();
        Ok(Candidate {
            v_divisible: vd,
            w_divisible: wd,
            graph,
            measure,
            empty,
        })
    };
    Ok([
        make(true, true)?,
        make(true, false)?,
        make(false, true)?,
        make(false, false)?,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GreedyStep {
    pub prime: u64,
    pub v_divisible: bool,
    pub w_divisible: bool,
    pub measure: f64,
    pub improved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    pub initial_measure: f64,
    pub final_graph: BipartiteGcdGraph,
}

/// Heuristic demonstration: visit the primes dividing some vertex in
/// increasing order, keep the candidate of largest measure at each, and stop
/// after `⌈10 log |V ∪ W|⌉` steps without improvement.
pub fn greedy_compress(g: &BipartiteGcdGraph) -> Result<GreedyTrace> {
    let mut primes: Vec<u64> = Vec::new();
    for &x in g.v.iter().chain(&g.w) {
        let f = factorize(x).ok_or(Error::FactorizationTooHard(x))?;
        primes.extend(f.into_iter().map(|(p, _)| p));
    }
    primes.sort_unstable();
    primes.dedup();
    let budget = (10.0 * ((g.v.len() + g.w.len()).max(2) as f64).ln()).ceil() as usize;
    let initial_measure = g.measure();
    let mut current = g.clone();
    let mut best = initial_measure;
    let mut misses = 0;
    let mut steps = Vec::new();
    for p in primes {
        if misses >= budget || current.is_empty() {
            break;
        }
        let cands = compression_step(&current, p)?;
        let pick = cands
            .into_iter()
            .reduce(|x, y| if y.measure > x.measure { y } else { x })
            .expect("four candidates");
        let improved = pick.measure > best;
        if improved {
            best = pick.measure;
        } else {
            misses += 1;
        }
        steps.push(GreedyStep {
            prime: p,
            v_divisible: pick.v_divisible,
            w_divisible: pick.w_divisible,
            measure: pick.measure,
            improved,
        });
        current = pick.graph;
    }
    Ok(GreedyTrace {
        steps,
        initial_measure,
        final_graph: current,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_edges() {
        let s = [11, 12, 20, 55, 10, 25, 35, 7];
        let g = build_gcd_graph(&s, 5).unwrap();
        for (u, v) in [
            (20, 55),
            (55, 25),
            (25, 35),
            (10, 35),
            (20, 10),
            (55, 10),
            (10, 25),
            (20, 35),
            (20, 25),
            (55, 35),
        ] {
            assert!(g.has_edge(u, v) && g.has_edge(v, u));
            assert!(
                g.edges.contains(&(u, v)) || g.edges.contains(&(v, u)),
                "({u},{v})"
            );
        }
        assert!(!g.has_edge(11, 12));
        assert_eq!(build_gcd_graph(&s, 1).unwrap().edges.len(), 28);
        assert!(build_gcd_graph(&s, 56).unwrap().edges.is_empty());
    }

    #[test]
    fn model_examples() {
        let inst = GcdInstance::new(vec![6, 12, 18, 24], 6, 1.0).unwrap();
        assert_eq!(
            model_problem_search(&inst).unwrap(),
            Some(ModelSolution {
                g: 6,
                multiplicity: 4
            })
        );
        let inst = GcdInstance::new(vec![101, 103], 2, 1.0).unwrap();
        let sol = model_problem_search(&inst).unwrap().unwrap();
        assert!([101, 103].contains(&sol.g) && sol.multiplicity == 1);
        let inst = GcdInstance::new(vec![2, 3], 10, 1.0).unwrap();
        assert_eq!(model_problem_search(&inst).unwrap(), None);
        let inst = GcdInstance::new(vec![1_000_003 * 1_000_033], 2, 1.0).unwrap();
        assert!(matches!(
            model_problem_search(&inst),
            Err(Error::FactorizationTooHard(_))
        ));
    }

    #[test]
    fn chow_y10() {
        let c = chow_counterexample(10).unwrap();
        assert_eq!(c.q, 9_699_690);
        assert_eq!(c.s, vec![881_790, 746_130, 570_570, 510_510]);
        assert!((c.b - 24_249.225).abs() < 1e-9);
        assert_eq!(c.min_pair_gcd, 30_030);
        assert_eq!(c.max_triple_gcd, 3990);
        assert!(c.pairs_above_b && c.triples_below_b);
        assert_eq!(c.max_multiplicity, 2);
        let inst = GcdInstance::new(
            c.s.iter().map(|&x| x as u64).collect(),
            c.integer_threshold() as u64,
            1.0,
        )
        .unwrap();
        assert_eq!(
            model_problem_search(&inst).unwrap().unwrap().multiplicity,
            2
        );
        let c = chow_counterexample(6).unwrap();
        assert_eq!(c.primes, vec![7, 11]);
        assert_eq!(c.max_multiplicity, 2);
        assert!(chow_counterexample(49).is_err());
    }

    #[test]
    fn green_walker_examples() {
        let b = 1000u64;
        let xs: Vec<u64> = (100..200).map(|k| k * b).collect();
        let gw = green_walker_ratio(&xs, &xs, b).unwrap();
        assert_eq!(gw.delta, 1.0);
        assert!(gw.ratio <= 1.0 + 1e-12);
        let gw = green_walker_ratio(&[11, 13], &[17, 19], 2).unwrap();
        assert_eq!((gw.delta, gw.ratio), (0.0, 0.0));
    }

    #[test]
    fn compression_examples() {
        let g = BipartiteGcdGraph::new(vec![6, 12, 18], vec![6, 30], 2).unwrap();
        let c = compression_step(&g, 3).unwrap();
        assert_eq!(c[0].graph.edges.len(), g.edges.len());
        assert_eq!(c[0].graph.a_value(), BigUint::from(3u32));
        assert!((c[0].measure - g.measure()).abs() < 1e-12 * g.measure());
        assert!(c[3].empty && c[3].measure == 0.0);
        let c = compression_step(&g, 7).unwrap();
        assert_eq!(c[3].graph.edges, g.edges);
        assert_eq!(c[3].measure, g.measure());
        assert!(c[0].empty);

        let chow = chow_counterexample(10).unwrap();
        let s: Vec<u64> = chow.s.iter().map(|&x| x as u64).collect();
        let g = BipartiteGcdGraph::new(s.clone(), s, chow.integer_threshold() as u64).unwrap();
        let c = compression_step(&g, 11).unwrap();
        assert_eq!(c[3].graph.v, vec![881_790]);
        assert_eq!(c[0].graph.v, vec![746_130, 570_570, 510_510]);
        let mut union: Vec<(u64, u64)> = c.iter().flat_map(|x| x.graph.edge_values()).collect();
        let mut orig = g.edge_values();
        union.sort_unstable();
        orig.sort_unstable();
        assert_eq!(union, orig);
        // (11∤v, 11|w): one vertex against three, all pairs joined, b = 11
        assert_eq!(c[2].graph.edges.len(), 3);
        assert!((c[2].measure - 33.0).abs() < 1e-9);
    }

    #[test]
    fn greedy_runs() {
        let s: Vec<u64> = (2..60).collect();
        let g = BipartiteGcdGraph::new(s.clone(), s, 3).unwrap();
        let t = greedy_compress(&g).unwrap();
        assert!(!t.steps.is_empty());
        assert!(t.final_graph.measure() >= 0.0);
    }
}

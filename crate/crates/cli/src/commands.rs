use crate::output::{cell, Format, Sink, Table};
use crate::{
    ArcsArgs, CensusArgs, CertifyArgs, Check, Command, DiophArgs, DiophCmd, Failure, FourierArgs,
    GcdArgs, GcdCmd, PrimesArgs,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use restricta::arcs::{self, Classifier};
use restricta::digits::census;
use restricta::fourier::{self, BoundKind, BoundReport, FourierProfile, MaxSettings};
use restricta::gcd_graph::{self, BipartiteGcdGraph, GcdInstance};
use restricta::markov;
use restricta::metric::{self, events, Alpha, ExactRational, PsiFunction};
use restricta::primes::{count_primes_ap, prime_exp_sum};
use restricta::{sieve_primes, DigitSystem};
use serde_json::{json, Value};
use std::io::Write;

type Out<'a, W> = &'a mut Sink<W>;

pub fn run<W: Write>(cmd: &Command, sink: Out<W>) -> Result<(), Failure> {
    match cmd {
        Command::Primes(a) => primes(a, sink),
        Command::Census(a) => census_cmd(a, sink),
        Command::Fourier(a) => fourier_cmd(a, sink),
        Command::Certify(a) => certify(a, sink),
        Command::Arcs(a) => arcs_cmd(a, sink),
        Command::Dioph(a) => dioph(a, sink),
        Command::Gcdgraph(a) => gcdgraph(a, sink),
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| usage(format!("{flag} is required here")))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn primes<W: Write>(a: &PrimesArgs, sink: Out<W>) -> Result<(), Failure> {
    let table = sieve_primes(a.limit)?;
    let mut out = json!({"N": a.limit, "pi": table.pi(a.limit)?});
    if let Some(spec) = &a.ap {
        let (q, r) = spec
            .split_once(',')
            .and_then(|(q, r)| Some((q.trim().parse::<u64>().ok()?, r.trim().parse::<u64>().ok()?)))
            .ok_or_else(|| usage(format!("--ap expects q,a, got {spec}")))?;
        out["ap"] = json!({"q": q, "a": r, "count": count_primes_ap(&table, a.limit, q, r)?});
    }
    if let Some(theta) = a.exp_sum {
        let z = prime_exp_sum(&table, a.limit, theta)?;
        out["theta"] = json!(theta);
        out["value"] = json!({"re": z.re, "im": z.im});
    }
    sink.emit(&out, None)?;
    Ok(())
}

fn census_cmd<W: Write>(a: &CensusArgs, sink: Out<W>) -> Result<(), Failure> {
    let report = census(&a.sys, a.x)?;
    let mut out = to_value(&report);
    out["sys"] = to_value(&a.sys);
    sink.emit(&out, None)?;
    Ok(())
}

fn parse_range(s: &str) -> Result<(u32, u32), Failure> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| usage(format!("--scan expects qmin..qmax, got {s}")))?;
    let lo: u32 = lo
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad range start {lo}")))?;
    let hi: u32 = hi
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad range end {hi}")))?;
    if lo < 2 || hi < lo {
        return Err(usage(format!("need 2 <= qmin <= qmax, got {s}")));
    }
    Ok((lo, hi))
}

fn bound_for(
    check: Check,
    q: u32,
    sys: Option<&DigitSystem>,
    settings: MaxSettings,
) -> Result<BoundReport, Failure> {
    if q < 2 {
        return Err(usage("q must be at least 2"));
    }
    Ok(match check {
        Check::SinSum => fourier::sin_bound_sum(q),
        Check::Refined => fourier::refined_digit_sum_with(q, settings),
        Check::Pairwise => fourier::pairwise_bound_sum(q),
        Check::Margin => match sys {
            Some(s) if s.q() == q => fourier::generalized_margin_with(s, settings),
            Some(_) => return Err(usage("--sys and --q disagree on the base")),
            None => fourier::generalized_margin_with(&DigitSystem::excluding(q, &[0])?, settings),
        },
        Check::Constant | Check::MeanL1 => unreachable!("not a bound sum"),
    })
}

fn bound_kind(c: Check) -> BoundKind {
    match c {
        Check::SinSum => BoundKind::SinBoundSum,
        Check::Refined => BoundKind::RefinedSum,
        Check::Pairwise => BoundKind::PairwiseSum,
        Check::Margin => BoundKind::Margin,
        Check::Constant | Check::MeanL1 => unreachable!("not a bound sum"),
    }
}

fn fourier_cmd<W: Write>(a: &FourierArgs, sink: Out<W>) -> Result<(), Failure> {
    let settings = a.grid.map(MaxSettings::with_grid).unwrap_or_default();
    match a.check {
        Check::Constant => {
            let g = fourier::catalan();
            let c = fourier::growth_constant();
            let out = json!({
                "catalan": g,
                "growthConstant": c,
                "reference": fourier::C_REFERENCE,
                "difference": (c - fourier::C_REFERENCE).abs(),
            });
            sink.emit(&out, None)?;
            return Ok(());
        }
        Check::MeanL1 => {
            let sys = a
                .sys
                .clone()
                .ok_or_else(|| usage("--sys is required for mean-l1"))?;
            let k = need(a.k, "-k")?;
            let profile = FourierProfile::new(sys.clone(), k)?;
            let out = json!({
                "sys": to_value(&sys),
                "k": k,
                "meanL1": fourier::mean_l1(&profile)?,
                "l1Reference": profile.l1_reference(),
                "meanL1Derivative": fourier::mean_l1_derivative(&profile)?,
                "derivativeReference": fourier::derivative_reference(&profile),
            });
            sink.emit(&out, None)?;
            return Ok(());
        }
        _ => {}
    }
    let Some(range) = &a.scan else {
        let q = match (a.q, &a.sys) {
            (Some(q), _) => q,
            (None, Some(s)) => s.q(),
            (None, None) => return Err(usage("--q or --scan is required")),
        };
        let report = bound_for(a.check, q, a.sys.as_ref(), settings)?;
        sink.emit(&to_value(&report), None)?;
        return Ok(());
    };
    if a.check == Check::Margin && a.sys.is_some() {
        return Err(usage("margin scans use D = {1,…,q−1}; drop --sys"));
    }
    if a.stride == 0 {
        return Err(usage("--stride must be positive"));
    }
    let (lo, hi) = parse_range(range)?;
    let qs = (lo..=hi).step_by(a.stride as usize);
    match sink.format {
        Format::Csv => {
            // rows are written as they are produced
            let mut w = sink.csv();
            w.row(&["q", "value", "threshold", "passes"])?;
            for q in qs {
                let r = bound_for(a.check, q, None, settings)?;
                w.row(&[
                    r.q.to_string(),
                    cell(&json!(r.value)),
                    cell(&json!(r.threshold)),
                    r.passes.to_string(),
                ])?;
            }
        }
        Format::Json => {
            let mut rows = Vec::new();
            let mut first = None;
            for q in qs {
                let r = bound_for(a.check, q, None, settings)?;
                if r.passes && first.is_none() {
                    first = Some(q);
                }
                rows.push(json!({"q": r.q, "value": r.value, "threshold": r.threshold, "passes": r.passes}));
            }
            let out = json!({"check": to_value(&bound_kind(a.check)), "stride": a.stride, "rows": rows, "firstPassing": first});
            sink.json(&out)?;
        }
    }
    Ok(())
}

fn certify<W: Write>(a: &CertifyArgs, sink: Out<W>) -> Result<(), Failure> {
    let threshold = a
        .threshold
        .unwrap_or_else(|| markov::default_threshold(a.sys.q()));
    let cert = markov::certify_base_with(&a.sys, a.ell_max, a.sigma, threshold)?;
    sink.emit(&to_value(&cert), None)?;
    Ok(())
}

fn arcs_cmd<W: Write>(a: &ArcsArgs, sink: Out<W>) -> Result<(), Failure> {
    if let Some(j) = a.point {
        let c = Classifier::new(a.sys.q(), a.k, a.a)?;
        if j >= c.modulus() {
            return Err(usage(format!("--point must be below N = {}", c.modulus())));
        }
        let class = c.classify(j);
        let out = json!({"j": j.to_string(), "N": c.modulus().to_string(), "A": a.a, "arc": to_value(&class)});
        sink.emit(&out, None)?;
        return Ok(());
    }
    let n = (a.sys.q() as u64)
        .checked_pow(a.k)
        .filter(|&n| n as u128 <= arcs::SCAN_CAP)
        .ok_or(restricta::Error::CapExceeded {
            what: "arc scan length q^k",
            requested: (a.sys.q() as u128).saturating_pow(a.k),
            cap: arcs::SCAN_CAP,
        })?;
    let table = sieve_primes(n)?;
    let mass = arcs::minor_arc_mass(&a.sys, a.k, &table, a.a)?;
    let mut out =
        json!({"sys": to_value(&a.sys), "k": a.k, "A": a.a, "N": n, "minorArcs": to_value(&mass)});
    if a.full_scan {
        out["mainTerm"] = to_value(&arcs::main_term_assembly(&a.sys, a.k, &table)?);
    }
    let mut t = Table::new(&["class", "count", "mass"]);
    for c in &mass.classes {
        t.push(vec![
            c.class.name().to_string(),
            c.count.to_string(),
            cell(&json!(c.mass)),
        ]);
    }
    sink.emit(&out, Some(t))?;
    Ok(())
}

fn load_psi(a: &DiophArgs) -> Result<PsiFunction, Failure> {
    let spec = a
        .psi
        .as_deref()
        .ok_or_else(|| usage("--psi is required here"))?;
    if spec.ends_with(".csv") || std::path::Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)?;
        return Ok(PsiFunction::from_csv(&text)?);
    }
    spec.parse()
        .map_err(|e: restricta::Error| usage(e.to_string()))
}

fn exact(r: BigRational) -> Value {
    to_value(&ExactRational(r))
}

fn dioph<W: Write>(a: &DiophArgs, sink: Out<W>) -> Result<(), Failure> {
    let out = match a.cmd {
        DiophCmd::Series => {
            let psi = load_psi(a)?;
            let q = need(a.q_lo.or(a.q), "--Q")?;
            json!({"psi": psi.to_string(), "Q": q, "series": to_value(&metric::series_partial(&psi, q)?)})
        }
        DiophCmd::Measure => {
            let psi = load_psi(a)?;
            match (a.q, a.q_lo, a.r_hi) {
                (Some(q), _, _) => {
                    let u = events::event_union(q, &psi, a.reduced)?;
                    let m = u.measure();
                    json!({
                        "psi": psi.to_string(),
                        "q": q,
                        "reduced": a.reduced,
                        "intervals": u.len(),
                        "measureF64": metric::intervals::to_f64(&m),
                        "measure": exact(m),
                        "heuristic": exact(events::heuristic_measure(q, &psi)),
                    })
                }
                (None, Some(lo), Some(hi)) => {
                    let m = events::truncated_limsup_measure(&psi, lo, hi, a.reduced)?;
                    json!({
                        "psi": psi.to_string(),
                        "Q": lo,
                        "R": hi,
                        "reduced": a.reduced,
                        "measureF64": metric::intervals::to_f64(&m),
                        "measure": exact(m),
                    })
                }
                _ => return Err(usage("measure needs --q, or --Q and --R")),
            }
        }
        DiophCmd::Pairs => {
            let psi = load_psi(a)?;
            match (a.q, a.r, a.q_lo, a.r_hi) {
                (Some(q), Some(r), _, _) => {
                    json!({"psi": psi.to_string(), "q": q, "r": r, "overlap": to_value(&events::pair_overlap(q, r, &psi)?)})
                }
                (_, _, Some(lo), Some(hi)) => json!({
                    "psi": psi.to_string(),
                    "Q": lo,
                    "R": hi,
                    "quasiIndependenceRatio": events::quasi_independence_ratio(&psi, lo, hi)?,
                }),
                _ => return Err(usage("pairs needs --q and --r, or --Q and --R")),
            }
        }
        DiophCmd::SelectR => {
            let psi = load_psi(a)?;
            let lo = need(a.q_lo, "--Q")?;
            json!({"psi": psi.to_string(), "Q": lo, "R": events::select_r(&psi, lo, a.cap)?})
        }
        DiophCmd::Counterexample => {
            let ell = need(a.ell_max, "--ell-max")?;
            let (psi0, psi, report) = metric::ds_counterexample(ell)?;
            json!({"psi0": psi0.to_string(), "psi": psi.to_string(), "report": to_value(&report)})
        }
        DiophCmd::Hausdorff => {
            let psi = load_psi(a)?;
            json!({"psi": psi.to_string(), "hausdorff": to_value(&metric::hausdorff_exponent(&psi)?)})
        }
        DiophCmd::Dirichlet => {
            let spec = a
                .alpha
                .as_deref()
                .ok_or_else(|| usage("--alpha is required here"))?;
            let alpha = parse_alpha(spec).ok_or_else(|| usage(format!("bad --alpha {spec}")))?;
            let n = need(a.n_max, "--N")?;
            let p = metric::dirichlet_approx(&alpha, n)?;
            json!({"alpha": spec, "N": n, "m": p.r, "n": p.s, "bound": p.width})
        }
        DiophCmd::Golden => {
            let n = need(a.n, "--n")?;
            json!({"n": n, "gap": metric::golden_gap(n)?})
        }
        DiophCmd::Anatomy => {
            let x = need(a.x, "--x")?;
            let y = need(a.y, "--y")?;
            to_value(&metric::anatomy_tail(x, y)?)
        }
    };
    sink.emit(&out, None)?;
    Ok(())
}

fn read_set(path: &std::path::Path) -> Result<Vec<u64>, Failure> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<u64>()
                .map_err(|_| usage(format!("{}: bad integer {l}", path.display())))
        })
        .collect()
}

fn bipartite_summary(g: &BipartiteGcdGraph) -> Value {
    json!({
        "V": g.v.len(),
        "W": g.w.len(),
        "edges": g.edges.len(),
        "delta": g.delta(),
        "a": g.a_value().to_string(),
        "b": g.b_value().to_string(),
        "measure": g.measure(),
    })
}

fn gcdgraph<W: Write>(a: &GcdArgs, sink: Out<W>) -> Result<(), Failure> {
    let set = || -> Result<Vec<u64>, Failure> {
        read_set(
            a.set
                .as_deref()
                .ok_or_else(|| usage("--set is required here"))?,
        )
    };
    let second = || -> Result<Vec<u64>, Failure> {
        match &a.set2 {
            Some(p) => read_set(p),
            None => set(),
        }
    };
    let mut table = None;
    let out = match a.cmd {
        GcdCmd::Build => {
            let g = gcd_graph::build_gcd_graph(&set()?, need(a.b, "--B")?)?;
            let mut t = Table::new(&["u", "v"]);
            for (u, v) in &g.edges {
                t.push(vec![u.to_string(), v.to_string()]);
            }
            table = Some(t);
            to_value(&g)
        }
        GcdCmd::Model => {
            let inst = GcdInstance::new(set()?, need(a.b, "--B")?, a.eta)?;
            let sol = gcd_graph::model_problem_search(&inst)?;
            json!({"instance": to_value(&inst), "solution": to_value(&sol)})
        }
        GcdCmd::Chow => to_value(&gcd_graph::chow_counterexample(need(a.y, "--y")?)?),
        GcdCmd::GreenWalker => to_value(&gcd_graph::green_walker_ratio(
            &set()?,
            &second()?,
            need(a.b, "--B")?,
        )?),
        GcdCmd::Compress => {
            let g = BipartiteGcdGraph::new(set()?, second()?, need(a.b, "--B")?)?;
            match a.prime {
                Some(p) => {
                    let cands = gcd_graph::compression_step(&g, p)?;
                    let list: Vec<Value> = cands
                        .iter()
                        .map(|c| {
                            let mut v = bipartite_summary(&c.graph);
                            v["vDivisible"] = json!(c.v_divisible);
                            v["wDivisible"] = json!(c.w_divisible);
                            v["empty"] = json!(c.empty);
                            v
                        })
                        .collect();
                    json!({"prime": p, "graph": bipartite_summary(&g), "candidates": list})
                }
                None => {
                    let trace = gcd_graph::greedy_compress(&g)?;
                    json!({
                        "heuristic": true,
                        "initialMeasure": trace.initial_measure,
                        "steps": to_value(&trace.steps),
                        "final": bipartite_summary(&trace.final_graph),
                    })
                }
            }
        }
    };
    sink.emit(&out, table)?;
    Ok(())
}

fn parse_alpha(s: &str) -> Option<Alpha> {
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q == BigInt::from(0) {
            return None;
        }
        return Some(Alpha::Rational(BigRational::new(p, q)));
    }
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .map(Alpha::Real)
}

use std::collections::BTreeMap;
use std::sync::Arc;

use maxsing_core::bound::{self, MultiplicitySystem};
use maxsing_core::cremona::{self, HomaloidalType};
use maxsing_core::exact;
use maxsing_core::picard::{self, LatticeInvolution, MobileClass};
use maxsing_core::surface::{self, ConicBundleDatum, CoverClass, DoubleCoverTable};
use maxsing_core::valuation::{GradedSystemData, GraphSpec, ResolutionGraph};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::{parse_payload, Failure, EXIT_OK};

type Outcome = Result<(Value, i32), Failure>;

#[derive(Deserialize)]
struct Int(#[serde(with = "exact::int")] BigInt);

#[derive(Deserialize)]
struct Rat(#[serde(with = "exact::rational")] BigRational);

fn ints(v: Vec<Int>) -> Vec<BigInt> {
    v.into_iter().map(|Int(x)| x).collect()
}

fn rats(v: Vec<Rat>) -> Vec<BigRational> {
    v.into_iter().map(|Rat(x)| x).collect()
}

fn rat_strings(v: &[BigRational]) -> Vec<String> {
    v.iter().map(exact::format_rational).collect()
}

fn int_values(v: &[BigInt]) -> Value {
    serde_json::to_value(IntsOut(v)).expect("integers serialize")
}

struct IntsOut<'a>(&'a [BigInt]);

impl serde::Serialize for IntsOut<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        exact::int_vec::serialize(self.0, s)
    }
}

fn int_value(v: &BigInt) -> Value {
    int_values(std::slice::from_ref(v))[0].clone()
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("core records serialize")
}

// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Generate {
    random_steps: usize,
}

pub(crate) fn factor(payload: &Value, seed: Option<u64>) -> Outcome {
    let (input, source) = if payload.get("random_steps").is_some() {
        let g: Generate = parse_payload(payload)?;
        let seed = seed.unwrap_or(0);
        (cremona::random_homaloidal(seed, g.random_steps), json!({"seed": seed, "random_steps": g.random_steps}))
    } else {
        (parse_payload::<HomaloidalType>(payload)?, Value::Null)
    };
    let noether = input.verify_noether_equations();
    if !noether.holds {
        return Err(Failure::from(maxsing_core::Error::PreconditionFailed(format!(
            "{input} is not homaloidal: the Noether equations fail"
        )))
        .with_details(json!({ "noether": noether })));
    }
    let steps = input.factorize()?;
    let round_trip = steps.iter().map(|s| s.round_trip()).collect::<Result<Vec<_>, _>>()?;
    let degrees: Vec<BigInt> = std::iter::once(input.degree().clone())
        .chain(steps.iter().map(|s| s.after.degree().clone()))
        .collect();
    Ok((
        json!({
            "input": input,
            "generated_from": source,
            "noether": noether,
            "steps": steps,
            "length": steps.len(),
            "degrees": int_values(&degrees),
            "round_trip": round_trip.iter().all(|&b| b),
        }),
        EXIT_OK,
    ))
}

// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemPayload {
    m: Vec<Vec<Int>>,
    d: Vec<Int>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphPayload {
    codims: Vec<u32>,
    #[serde(default)]
    arrows: Vec<[usize; 2]>,
    #[serde(default, with = "exact::int_map")]
    upper_degrees: BTreeMap<usize, BigInt>,
    nus: Option<Vec<Int>>,
    threshold: Option<Int>,
    compatible: Option<Vec<Rat>>,
    system: Option<SystemPayload>,
    quartic: Option<bool>,
}

impl GraphPayload {
    fn graph(&self) -> Result<Arc<ResolutionGraph>, Failure> {
        let spec = GraphSpec {
            codims: self.codims.clone(),
            arrows: self.arrows.clone(),
            upper_degrees: self.upper_degrees.clone(),
        };
        let validation = spec.validate();
        ResolutionGraph::new(spec)
            .map(Arc::new)
            .map_err(|e| Failure::from(e).with_details(to_json(&validation)))
    }

    fn data(&mut self, graph: &Arc<ResolutionGraph>) -> Result<Option<GradedSystemData>, Failure> {
        match (self.nus.take(), self.threshold.take()) {
            (None, None) => Ok(None),
            (Some(nus), Some(Int(n))) => Ok(Some(GradedSystemData::new(Arc::clone(graph), ints(nus), n)?)),
            _ => Err(Failure::malformed("nus and threshold must be given together")),
        }
    }
}

fn function_report(graph: &ResolutionGraph, a: &[BigRational]) -> Result<Value, Failure> {
    let first = graph.first_incompatible(a)?;
    Ok(json!({
        "function": rat_strings(a),
        "compatible": first.is_none(),
        "first_violation": first,
    }))
}

pub(crate) fn valgraph(payload: &Value) -> Outcome {
    let mut p: GraphPayload = parse_payload(payload)?;
    if p.system.is_some() || p.quartic.is_some() {
        return Err(Failure::malformed("system and quartic belong to the bound command"));
    }
    let graph = p.graph()?;
    let k = graph.num_vertices();
    let l = graph.lower_len();
    let rows: Vec<Value> = (1..=k).map(|i| int_values(graph.path_counts().row(i))).collect();
    let discrepancies: Vec<BigInt> = (1..=k).map(|j| graph.discrepancy(j)).collect::<Result<_, _>>()?;
    let canonical = if l == 0 {
        Value::Null
    } else {
        json!({
            "lower": rat_strings(&graph.canonical_function(l)?),
            "full": rat_strings(&graph.canonical_function(k)?),
        })
    };
    let compatible = match p.compatible.take() {
        Some(a) => function_report(&graph, &rats(a))?,
        None => Value::Null,
    };
    let system = match p.data(&graph)? {
        Some(data) => {
            let mults: Vec<BigInt> = (1..=k).map(|j| data.system_multiplicity(j)).collect::<Result<_, _>>()?;
            json!({
                "nus": int_values(data.nus()),
                "threshold": int_value(data.threshold()),
                "multiplicities": int_values(&mults),
                "maximal_singularity": data.is_maximal_singularity(),
            })
        }
        None => Value::Null,
    };
    Ok((
        json!({
            "graph": graph.spec(),
            "num_vertices": k,
            "lower_len": l,
            "path_counts": rows,
            "discrepancies": int_values(&discrepancies),
            "canonical_functions": canonical,
            "compatible": compatible,
            "system": system,
        }),
        EXIT_OK,
    ))
}

pub(crate) fn bound(payload: &Value) -> Outcome {
    let mut p: GraphPayload = parse_payload(payload)?;
    let graph = p.graph()?;
    let data = p.data(&graph)?.ok_or_else(|| Failure::malformed("bound needs nus and threshold"))?;
    let l = graph.lower_len();
    let k = graph.num_vertices();
    let maximality = bound::required_m_lower_bound(&data)?;
    let functions: Vec<(&str, Vec<BigRational>)> = match p.compatible.take() {
        Some(a) => vec![("given", rats(a))],
        None => vec![("p_L", graph.canonical_function(l)?), ("p_K", graph.canonical_function(k)?)],
    };
    let system = match p.system.take() {
        Some(s) => Some(MultiplicitySystem::new(
            data.clone(),
            s.m.into_iter().map(ints).collect(),
            ints(s.d),
        )?),
        None => None,
    };
    let mut theorem = Vec::new();
    for (label, a) in &functions {
        let lower = bound::theorem_lower_bound(&data, a)?;
        let mut entry = json!({
            "label": label,
            "function": rat_strings(a),
            "lower_bound": exact::format_rational(&lower),
            "m_bound": exact::format_rational(&bound::weighted_m_bound(&data, a)?),
        });
        if let Some(sys) = &system {
            let weighted = sys.weighted_m0(a)?;
            entry["weighted_m0"] = json!(exact::format_rational(&weighted));
            entry["weighted_m0_meets_bound"] = json!(weighted >= lower);
        }
        theorem.push(entry);
    }
    let quartic = if p.quartic.unwrap_or(true) {
        to_json(&bound::quartic_exclusion_verdict(&data)?)
    } else {
        Value::Null
    };
    Ok((
        json!({
            "graph": graph.spec(),
            "nus": int_values(data.nus()),
            "threshold": int_value(data.threshold()),
            "maximal_singularity": data.is_maximal_singularity(),
            "maximality_bound": maximality,
            "four_n_squared": exact::format_rational(&maximality.four_n_squared()),
            "bound_exceeds_four_n_squared": maximality.exceeds_four_n_squared(),
            "theorem": theorem,
            "system_check": system.as_ref().map(|s| s.check_system()),
            "quartic": quartic,
        }),
        EXIT_OK,
    ))
}

// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UntwistPayload {
    #[serde(with = "exact::int")]
    n: BigInt,
    #[serde(with = "exact::int")]
    nu: BigInt,
}

pub(crate) fn untwist(payload: &Value) -> Outcome {
    let p: UntwistPayload = parse_payload(payload)?;
    let start = MobileClass::new(p.n, p.nu)?;
    let trajectory = picard::untwist_loop(&start)?;
    let tau = LatticeInvolution::quartic();
    let last = trajectory.last().expect("trajectory is nonempty");
    Ok((
        json!({
            "input": start,
            "trajectory": trajectory,
            "steps": trajectory.len() - 1,
            "final_maximal": last.is_maximal(),
            "involution": {
                "tau_h": picard::tau_action(&picard::PicardClass::hyperplane()),
                "tau_e": picard::tau_action(&picard::PicardClass::exceptional()),
                "determinant": int_value(&tau.determinant()),
                "is_involution": tau.is_involution(),
                "projection_relations": tau.verify_projection_relations(),
                "undefined_on_lines": picard::LINES_THROUGH_DOUBLE_POINT,
            },
        }),
        EXIT_OK,
    ))
}

// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(tag = "case", rename_all = "snake_case", deny_unknown_fields)]
enum ExcludePayload {
    Point {
        #[serde(with = "exact::int")]
        n: BigInt,
        #[serde(with = "exact::int")]
        nu: BigInt,
    },
    Curve1 {
        #[serde(with = "exact::int")]
        n: BigInt,
        #[serde(with = "exact::int")]
        nu: BigInt,
    },
    Curve2 {
        #[serde(with = "exact::int")]
        n: BigInt,
        #[serde(with = "exact::int")]
        nu: BigInt,
        #[serde(with = "exact::int")]
        deg_r: BigInt,
    },
    Curve3 {
        #[serde(with = "exact::rational")]
        n: BigRational,
        m: u32,
        #[serde(with = "exact::rational")]
        nu: BigRational,
        #[serde(with = "exact::rational")]
        nu_star: BigRational,
    },
    Table {
        #[serde(with = "exact::int")]
        d: BigInt,
        m: u32,
    },
    ConicBundle {
        datum: ConicBundleDatum,
    },
}

fn table_value(t: &DoubleCoverTable) -> Value {
    let name = |c: CoverClass| match c {
        CoverClass::H => "h",
        CoverClass::C => "c",
        CoverClass::CStar => "c*",
    };
    let mut rows = serde_json::Map::new();
    for x in CoverClass::ALL {
        let row: serde_json::Map<String, Value> =
            CoverClass::ALL.iter().map(|&y| (name(y).to_string(), int_value(t.get(x, y)))).collect();
        rows.insert(name(x).to_string(), Value::Object(row));
    }
    json!({
        "d": int_value(&t.d),
        "m": t.m,
        "pairing": rows,
        "row_sum_consistent": t.row_sum_consistent(),
    })
}

pub(crate) fn exclude(payload: &Value) -> Outcome {
    let p: ExcludePayload = parse_payload(payload)?;
    let result = match p {
        ExcludePayload::Point { n, nu } => to_json(&surface::exclude_point_double_space(&n, &nu)?),
        ExcludePayload::Curve1 { n, nu } => to_json(&surface::exclude_curve_case1(&n, &nu)?),
        ExcludePayload::Curve2 { n, nu, deg_r } => to_json(&surface::exclude_curve_case2(&n, &nu, &deg_r)?),
        ExcludePayload::Curve3 { n, m, nu, nu_star } => {
            let mut rec = to_json(&surface::exclude_curve_case3(&n, m, &nu, &nu_star)?);
            rec["nu_star_interval"] = match surface::case3_nu_star_interval(&n, m, &nu) {
                Some((lo, hi)) => json!([exact::format_rational(&lo), exact::format_rational(&hi)]),
                None => Value::Null,
            };
            rec
        }
        ExcludePayload::Table { d, m } => table_value(&surface::build_double_cover_table(d, m)?),
        ExcludePayload::ConicBundle { datum } => {
            let mut rec = to_json(&surface::conic_bundle_check(&datum)?);
            rec["datum"] = to_json(&datum);
            rec
        }
    };
    Ok((result, EXIT_OK))
}

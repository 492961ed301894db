use maxsing_core::oracle::{self, OracleOutcome};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::{parse_payload, Failure, EXIT_OK, EXIT_PRECONDITION};

/// Default seed of the generated corpora (Cremona types, conic bundles).
pub const DEFAULT_SEED: u64 = 1;

pub const ORACLE_NAMES: [&str; 9] = [
    "paths",
    "multiplicities",
    "theorem",
    "maximality_bound",
    "cremona",
    "untwist",
    "case3",
    "double_space",
    "conic_bundle",
];

/// How far each sweep goes. `Full` uses the sizes of the acceptance suite;
/// `Quick` shrinks every sweep to run in well under a second.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleScope {
    #[default]
    Quick,
    Full,
}

fn run_one(name: &str, scope: OracleScope, seed: u64) -> OracleOutcome {
    let full = scope == OracleScope::Full;
    match name {
        "paths" => oracle::paths_oracle(if full { 6 } else { 4 }),
        "multiplicities" => oracle::multiplicity_oracle(if full { 6 } else { 4 }, if full { 3 } else { 2 }),
        "theorem" if full => oracle::theorem_oracle(3, 6, &[1, 2, 3, 4, 5, 6]),
        "theorem" => oracle::theorem_oracle(2, 3, &[1, 2]),
        "maximality_bound" if full => oracle::maximality_bound_oracle(8, 20, 6),
        "maximality_bound" => oracle::maximality_bound_oracle(5, 5, 4),
        "cremona" => oracle::cremona_oracle(if full { 1000 } else { 100 }, seed),
        "untwist" => oracle::untwist_oracle(if full { 200 } else { 50 }),
        "case3" if full => oracle::case3_oracle(50, 50),
        "case3" => oracle::case3_oracle(10, 10),
        "double_space" if full => oracle::double_space_oracle(100, 20),
        "double_space" => oracle::double_space_oracle(20, 5),
        "conic_bundle" => oracle::conic_bundle_oracle(if full { 10_000 } else { 500 }, seed),
        _ => unreachable!("names are checked before dispatch"),
    }
}

/// Runs the selected oracles in a fixed order. Every entry reports pass or
/// fail, its case count and the first counterexample found.
pub fn run_oracles(scope: OracleScope, only: Option<&[String]>, seed: u64) -> Vec<OracleOutcome> {
    ORACLE_NAMES
        .iter()
        .filter(|n| only.is_none_or(|o| o.iter().any(|x| x == *n)))
        .map(|n| run_one(n, scope, seed))
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OraclePayload {
    #[serde(default)]
    scope: OracleScope,
    only: Option<Vec<String>>,
}

pub(crate) fn oracle_command(payload: &Value, seed: Option<u64>) -> Result<(Value, i32), Failure> {
    let p: OraclePayload = if payload.is_null() { OraclePayload { scope: OracleScope::Quick, only: None } } else { parse_payload(payload)? };
    if let Some(bad) = p.only.iter().flatten().find(|n| !ORACLE_NAMES.contains(&n.as_str())) {
        return Err(Failure::malformed(format!("unknown oracle {bad:?}; known: {}", ORACLE_NAMES.join(", "))));
    }
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let outcomes = run_oracles(p.scope, p.only.as_deref(), seed);
    let passed = outcomes.iter().all(|o| o.passed);
    Ok((
        json!({
            "scope": p.scope_name(),
            "seed": seed,
            "passed": passed,
            "oracles": outcomes,
        }),
        if passed { EXIT_OK } else { EXIT_PRECONDITION },
    ))
}

impl OraclePayload {
    fn scope_name(&self) -> &'static str {
        match self.scope {
            OracleScope::Quick => "quick",
            OracleScope::Full => "full",
        }
    }
}

//! Resolution graphs of discrete valuations.
//!
//! A valuation centered on a variety `X` is realized by a finite sequence of
//! blow-ups `X_i → X_{i−1}` of centers `B_{i−1}`, `i = 1..K`, with exceptional
//! divisors `E_i`. Vertex `i` of the graph stands for `E_i`; an arrow
//! `i → j` (`i > j`) records `B_{i−1} ⊂ E_j^{i−1}`. The lower part
//! `1..=L` consists of centers of codimension at least 3, the upper part
//! `L+1..=K` of centers of codimension 2.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;

/// Raw, unchecked description of a resolution graph as it appears in JSON.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GraphSpec {
    pub codims: Vec<u32>,
    #[serde(default)]
    pub arrows: Vec<[usize; 2]>,
    #[serde(default, with = "exact::int_map")]
    pub upper_degrees: BTreeMap<usize, BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphValidation {
    pub valid: bool,
    /// First violated invariant, if any.
    pub diagnostic: Option<String>,
}

impl GraphSpec {
    /// Chain `K → K−1 → … → 1` with the given codimensions.
    pub fn chain(codims: Vec<u32>) -> Self {
        let arrows = (2..=codims.len()).map(|i| [i, i - 1]).collect();
        GraphSpec { codims, arrows, upper_degrees: BTreeMap::new() }
    }

    pub fn with_arrows(mut self, extra: impl IntoIterator<Item = (usize, usize)>) -> Self {
        self.arrows.extend(extra.into_iter().map(|(i, j)| [i, j]));
        self
    }

    pub fn validate(&self) -> GraphValidation {
        match self.first_violation() {
            None => GraphValidation { valid: true, diagnostic: None },
            Some(d) => GraphValidation { valid: false, diagnostic: Some(d) },
        }
    }

    fn first_violation(&self) -> Option<String> {
        let k = self.codims.len();
        if k == 0 {
            return Some("resolution must have at least one blow-up".into());
        }
        if let Some(i) = self.codims.iter().position(|&c| c < 2) {
            return Some(format!("codim of B_{i} is {}, must be >= 2", self.codims[i]));
        }
        let mut seen = BTreeSet::new();
        for &[i, j] in &self.arrows {
            if i > k || j == 0 || i <= j {
                return Some(format!("arrow {i}->{j} must satisfy {k} >= i > j >= 1"));
            }
            if !seen.insert((i, j)) {
                return Some(format!("arrow {i}->{j} listed twice"));
            }
        }
        if let Some(i) = (2..=k).find(|&i| !seen.contains(&(i, i - 1))) {
            return Some(format!("mandatory arrow {i}->{} is missing", i - 1));
        }
        let lower = self.codims.iter().take_while(|&&c| c >= 3).count();
        if let Some(off) = self.codims[lower..].iter().position(|&c| c != 2) {
            let i = lower + off;
            return Some(format!(
                "codim of B_{i} is {} after a codim-2 center; codimensions must be >= 3 then = 2",
                self.codims[i]
            ));
        }
        for (&i, deg) in &self.upper_degrees {
            if i <= lower || i > k {
                return Some(format!("upper degree given for vertex {i}, not in upper part {}..={k}", lower + 1));
            }
            if deg < &BigInt::one() {
                return Some(format!("upper degree of vertex {i} is {deg}, must be >= 1"));
            }
        }
        None
    }
}

/// Number of directed paths `p(i, j)` between any two vertices, with
/// `p(i, i) = 1`. Stored as a lower-triangular table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCounts {
    rows: Vec<Vec<BigInt>>,
}

impl PathCounts {
    fn compute(k: usize, out: &[Vec<usize>]) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(k);
        for i in 1..=k {
            let mut row = vec![BigInt::zero(); i];
            row[i - 1] = BigInt::one();
            for &t in &out[i] {
                for (j, p) in rows[t - 1].iter().enumerate() {
                    row[j] += p;
                }
            }
            rows.push(row);
        }
        PathCounts { rows }
    }

    /// `p(i, j)` for valid 1-based indices; zero when `j > i`.
    pub fn get(&self, i: usize, j: usize) -> BigInt {
        if j > i {
            BigInt::zero()
        } else {
            self.rows[i - 1][j - 1].clone()
        }
    }

    /// `p(i, 1), …, p(i, i)`.
    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.rows[i - 1]
    }
}

/// A validated resolution graph. Path counts are computed once at
/// construction; the value is immutable afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionGraph {
    codims: Vec<u32>,
    arrows: BTreeSet<(usize, usize)>,
    /// targets of arrows leaving each vertex; index 0 unused
    out: Vec<Vec<usize>>,
    /// sources of arrows entering each vertex; index 0 unused
    into: Vec<Vec<usize>>,
    upper_degrees: BTreeMap<usize, BigInt>,
    lower_len: usize,
    paths: PathCounts,
}

impl ResolutionGraph {
    pub fn new(spec: GraphSpec) -> Result<Self> {
        if let Some(d) = spec.first_violation() {
            return Err(Error::InvalidGraph(d));
        }
        let k = spec.codims.len();
        let arrows: BTreeSet<(usize, usize)> = spec.arrows.iter().map(|&[i, j]| (i, j)).collect();
        let mut out = vec![Vec::new(); k + 1];
        let mut into = vec![Vec::new(); k + 1];
        for &(i, j) in &arrows {
            out[i].push(j);
            into[j].push(i);
        }
        let lower_len = spec.codims.iter().take_while(|&&c| c >= 3).count();
        let paths = PathCounts::compute(k, &out);
        Ok(ResolutionGraph {
            codims: spec.codims,
            arrows,
            out,
            into,
            upper_degrees: spec.upper_degrees,
            lower_len,
            paths,
        })
    }

    pub fn spec(&self) -> GraphSpec {
        GraphSpec {
            codims: self.codims.clone(),
            arrows: self.arrows.iter().map(|&(i, j)| [i, j]).collect(),
            upper_degrees: self.upper_degrees.clone(),
        }
    }

    /// `K`
    pub fn num_vertices(&self) -> usize {
        self.codims.len()
    }

    /// `L`, the number of centers of codimension `>= 3`.
    pub fn lower_len(&self) -> usize {
        self.lower_len
    }

    pub fn codims(&self) -> &[u32] {
        &self.codims
    }

    /// Codimension of `B_{i−1}`, the center blown up to create vertex `i`.
    pub fn codim(&self, i: usize) -> Result<u32> {
        self.check_index(i)?;
        Ok(self.codims[i - 1])
    }

    pub fn arrows(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arrows.iter().copied()
    }

    pub fn has_arrow(&self, i: usize, j: usize) -> bool {
        self.arrows.contains(&(i, j))
    }

    /// Vertices `j` with an arrow `j → i`.
    pub fn incoming(&self, i: usize) -> &[usize] {
        &self.into[i]
    }

    /// Vertices `j` with an arrow `i → j`.
    pub fn outgoing(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    /// `deg (φ_{i−1,L})_* B_{i−1}` for an upper vertex; defaults to 1.
    pub fn upper_degree(&self, i: usize) -> BigInt {
        self.upper_degrees.get(&i).cloned().unwrap_or_else(BigInt::one)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        let len = self.num_vertices();
        if i == 0 || i > len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
        Ok(())
    }

    pub fn path_counts(&self) -> &PathCounts {
        &self.paths
    }

    pub fn path_count(&self, from: usize, to: usize) -> Result<BigInt> {
        self.check_index(from)?;
        self.check_index(to)?;
        Ok(self.paths.get(from, to))
    }

    /// `p(source, i)` for `i = 1..=K` (zero above `source`).
    pub fn path_weights(&self, source: usize) -> Result<Vec<BigInt>> {
        self.check_index(source)?;
        let mut w = self.paths.row(source).to_vec();
        w.resize(self.num_vertices(), BigInt::zero());
        Ok(w)
    }

    /// `K(X, ν_{E_j}) = Σ_{i≤j} p(j, i)·(codim B_{i−1} − 1)`.
    pub fn discrepancy(&self, j: usize) -> Result<BigInt> {
        self.check_index(j)?;
        Ok(self
            .paths
            .row(j)
            .iter()
            .zip(&self.codims)
            .map(|(p, &c)| p * BigInt::from(c - 1))
            .sum())
    }

    /// The function `a(i) = p(source, i)` on the lower part `1..=L`.
    /// Compatible for `source ∈ {L, K}`.
    pub fn canonical_function(&self, source: usize) -> Result<Vec<BigRational>> {
        Ok(self
            .path_weights(source)?
            .into_iter()
            .take(self.lower_len)
            .map(BigRational::from_integer)
            .collect())
    }

    /// First lower vertex `i` where `a(i) < Σ_{j→i, j≤L} a(j)`.
    pub fn first_incompatible(&self, a: &[BigRational]) -> Result<Option<usize>> {
        if a.len() != self.lower_len {
            return Err(Error::LengthMismatch { expected: self.lower_len, found: a.len() });
        }
        if let Some(i) = a.iter().position(|x| x.is_negative()) {
            return Err(Error::MalformedInput(format!("compatible function is negative at {}", i + 1)));
        }
        for i in 1..=self.lower_len {
            let inflow: BigRational = self.into[i]
                .iter()
                .filter(|&&j| j <= self.lower_len)
                .map(|&j| &a[j - 1])
                .sum();
            if a[i - 1] < inflow {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// `a(i) ≥ Σ_{j→i} a(j)` for every lower vertex `i`.
    pub fn compatible_check(&self, a: &[BigRational]) -> Result<bool> {
        Ok(self.first_incompatible(a)?.is_none())
    }
}

/// A resolution graph together with the multiplicities `νⱼ` of a mobile
/// linear system at the successive centers and the threshold `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedSystemData {
    graph: Arc<ResolutionGraph>,
    nus: Vec<BigInt>,
    threshold: BigInt,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    codims: Vec<u32>,
    #[serde(default)]
    arrows: Vec<[usize; 2]>,
    #[serde(default, with = "exact::int_map")]
    upper_degrees: BTreeMap<usize, BigInt>,
    #[serde(with = "exact::int_vec")]
    nus: Vec<BigInt>,
    #[serde(with = "exact::int")]
    threshold: BigInt,
}

impl GradedSystemData {
    pub fn new(graph: Arc<ResolutionGraph>, nus: Vec<BigInt>, threshold: BigInt) -> Result<Self> {
        if nus.len() != graph.num_vertices() {
            return Err(Error::LengthMismatch { expected: graph.num_vertices(), found: nus.len() });
        }
        if let Some(i) = nus.iter().position(|v| v.is_negative()) {
            return Err(Error::MalformedInput(format!("nu_{} = {} is negative", i + 1, nus[i])));
        }
        if threshold < BigInt::one() {
            return Err(Error::MalformedInput(format!("threshold must be >= 1, got {threshold}")));
        }
        Ok(GradedSystemData { graph, nus, threshold })
    }

    pub fn from_parts(spec: GraphSpec, nus: &[i64], threshold: i64) -> Result<Self> {
        let graph = Arc::new(ResolutionGraph::new(spec)?);
        GradedSystemData::new(graph, nus.iter().map(|&v| v.into()).collect(), threshold.into())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawData =
            serde_json::from_str(s).map_err(|e| Error::MalformedInput(e.to_string()))?;
        Self::try_from(raw)
    }

    pub fn graph(&self) -> &ResolutionGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> Arc<ResolutionGraph> {
        Arc::clone(&self.graph)
    }

    pub fn nus(&self) -> &[BigInt] {
        &self.nus
    }

    pub fn threshold(&self) -> &BigInt {
        &self.threshold
    }

    /// `ν_{E_j}(|λ|) = Σ_{i≤j} p(j, i)·νᵢ`.
    pub fn system_multiplicity(&self, j: usize) -> Result<BigInt> {
        self.graph.check_index(j)?;
        Ok(self.graph.paths.row(j).iter().zip(&self.nus).map(|(p, v)| p * v).sum())
    }

    pub fn discrepancy(&self, j: usize) -> Result<BigInt> {
        self.graph.discrepancy(j)
    }

    /// `ν_{E_K}(|χ|) > n·K(X, ν_{E_K})`.
    pub fn is_maximal_singularity(&self) -> bool {
        let k = self.graph.num_vertices();
        let mult = self.system_multiplicity(k).expect("K is a valid vertex");
        let disc = self.graph.discrepancy(k).expect("K is a valid vertex");
        mult > &self.threshold * disc
    }
}

impl TryFrom<RawData> for GradedSystemData {
    type Error = Error;

    fn try_from(raw: RawData) -> Result<Self> {
        let spec = GraphSpec { codims: raw.codims, arrows: raw.arrows, upper_degrees: raw.upper_degrees };
        let graph = Arc::new(ResolutionGraph::new(spec)?);
        GradedSystemData::new(graph, raw.nus, raw.threshold)
    }
}

impl Serialize for GradedSystemData {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let spec = self.graph.spec();
        RawData {
            codims: spec.codims,
            arrows: spec.arrows,
            upper_degrees: spec.upper_degrees,
            nus: self.nus.clone(),
            threshold: self.threshold.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GradedSystemData {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawData::deserialize(d)?;
        GradedSystemData::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// `mult_B |χ| > n·(codim B − 1)`.
pub fn is_maximal_cycle(codim: u32, mult: &BigInt, n: &BigInt) -> bool {
    *mult > n * BigInt::from(codim.saturating_sub(1))
}

//! Counting multiplicities along a resolution.
//!
//! For two generic members `D₁, D₂` of a mobile system the self-intersection
//! cycle `D₁•D₂` is followed through the lower part of a resolution. Writing
//! `m_{i,j}` for the multiplicity along `B_{j−1}` of the piece born on `E_i`
//! and `dᵢ` for the degree of that piece, one gets the equalities
//!
//! ```text
//! νⱼ² + dⱼ = m_{0,j} + m_{1,j} + … + m_{j−1,j}      (j = 1..L)
//! ```
//!
//! together with `m_{i,j} > 0 ⇒ j → i`, `m_{i,j} ≤ dᵢ`, and
//! `d_L ≥ Σ_{i>L} νᵢ²·deg`. Weighting the equalities by a compatible function
//! bounds `Σ a(i)·m_{0,i}` from below; with `a(i) = p(K, i)` and the
//! maximality inequality this forces `m > 4n²` at a smooth point of a 3-fold.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact;
use crate::valuation::GradedSystemData;
use crate::verdict::Verdict;

/// Assumption used to turn `Σ a(i)·m_{0,i}` into `m·Σ a(i)`.
pub const ASSUMPTION_M0_NONINCREASING: &str =
    "m_{0,i} <= m_{0,1} for i = 1..L (multiplicity of the proper transforms of D1.D2 does not increase along the resolution)";

/// Assumption behind the cap `m <= 4n^2`.
pub const ASSUMPTION_QUARTIC_CAP: &str =
    "center is a smooth point x of a smooth quartic 3-fold and m = mult_x(D1.D2) <= deg(D1.D2) = 4n^2";

/// Values `m_{i,j}` and `dᵢ` attached to the lower part of a resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicitySystem {
    data: GradedSystemData,
    /// `m[j−1][i] = m_{i,j}` for `0 ≤ i < j`
    m: Vec<Vec<BigInt>>,
    /// `d[i−1] = dᵢ`
    d: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum SystemViolation {
    Equality {
        j: usize,
        #[serde(with = "exact::int")]
        lhs: BigInt,
        #[serde(with = "exact::int")]
        rhs: BigInt,
    },
    Support { i: usize, j: usize },
    Bound { i: usize, j: usize },
    Tail {
        #[serde(with = "exact::int")]
        d_last: BigInt,
        #[serde(with = "exact::int")]
        required: BigInt,
    },
}

impl fmt::Display for SystemViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemViolation::Equality { j, lhs, rhs } => {
                write!(f, "nu_{j}^2 + d_{j} = {lhs} but sum of m_(i,{j}) = {rhs}")
            }
            SystemViolation::Support { i, j } => write!(f, "m_({i},{j}) > 0 without arrow {j}->{i}"),
            SystemViolation::Bound { i, j } => write!(f, "m_({i},{j}) exceeds d_{i}"),
            SystemViolation::Tail { d_last, required } => {
                write!(f, "d_L = {d_last} is below the upper-part requirement {required}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SystemCheck {
    pub holds: bool,
    pub violation: Option<SystemViolation>,
}

impl MultiplicitySystem {
    /// `m` holds one row per lower vertex `j`, listing `m_{0,j}, …, m_{j−1,j}`.
    pub fn new(data: GradedSystemData, m: Vec<Vec<BigInt>>, d: Vec<BigInt>) -> Result<Self> {
        let l = data.graph().lower_len();
        if m.len() != l {
            return Err(Error::LengthMismatch { expected: l, found: m.len() });
        }
        if d.len() != l {
            return Err(Error::LengthMismatch { expected: l, found: d.len() });
        }
        for (row, j) in m.iter().zip(1..) {
            if row.len() != j {
                return Err(Error::LengthMismatch { expected: j, found: row.len() });
            }
        }
        if m.iter().flatten().chain(&d).any(|v| v.is_negative()) {
            return Err(Error::MalformedInput("multiplicities and degrees must be nonnegative".into()));
        }
        Ok(MultiplicitySystem { data, m, d })
    }

    pub fn data(&self) -> &GradedSystemData {
        &self.data
    }

    /// `m_{i,j}` for `0 ≤ i < j ≤ L`.
    pub fn m(&self, i: usize, j: usize) -> &BigInt {
        &self.m[j - 1][i]
    }

    /// `dᵢ` for `1 ≤ i ≤ L`.
    pub fn d(&self, i: usize) -> &BigInt {
        &self.d[i - 1]
    }

    /// `m = m_{0,1}`.
    pub fn m01(&self) -> &BigInt {
        self.m(0, 1)
    }

    pub fn check_system(&self) -> SystemCheck {
        let violation = self.first_violation();
        SystemCheck { holds: violation.is_none(), violation }
    }

    fn first_violation(&self) -> Option<SystemViolation> {
        let graph = self.data.graph();
        let nus = self.data.nus();
        let l = graph.lower_len();
        for j in 1..=l {
            let lhs = &nus[j - 1] * &nus[j - 1] + &self.d[j - 1];
            let rhs: BigInt = self.m[j - 1].iter().sum();
            if lhs != rhs {
                return Some(SystemViolation::Equality { j, lhs, rhs });
            }
        }
        for j in 1..=l {
            for i in 1..j {
                if self.m(i, j).is_positive() && !graph.has_arrow(j, i) {
                    return Some(SystemViolation::Support { i, j });
                }
            }
        }
        for j in 1..=l {
            for i in 1..j {
                if self.m(i, j) > self.d(i) {
                    return Some(SystemViolation::Bound { i, j });
                }
            }
        }
        if l > 0 {
            let required: BigInt = (l + 1..=graph.num_vertices())
                .map(|i| &nus[i - 1] * &nus[i - 1] * graph.upper_degree(i))
                .sum();
            if self.d(l) < &required {
                return Some(SystemViolation::Tail { d_last: self.d(l).clone(), required });
            }
        }
        None
    }

    /// `Σ_{i≤L} a(i)·m_{0,i}`, the side bounded below by the theorem.
    pub fn weighted_m0(&self, a: &[BigRational]) -> Result<BigRational> {
        let l = self.data.graph().lower_len();
        if a.len() != l {
            return Err(Error::LengthMismatch { expected: l, found: a.len() });
        }
        Ok(a.iter()
            .zip(1..)
            .map(|(w, i)| w * exact::rational_from_int(self.m(0, i)))
            .sum())
    }
}

/// `Σ_{i≤L} a(i)·νᵢ² + a(L)·Σ_{i>L} νᵢ²` for a compatible function `a`.
pub fn theorem_lower_bound(data: &GradedSystemData, a: &[BigRational]) -> Result<BigRational> {
    let graph = data.graph();
    let l = graph.lower_len();
    if l == 0 {
        return Err(Error::DegenerateGraph("lower part is empty".into()));
    }
    if let Some(vertex) = graph.first_incompatible(a)? {
        return Err(Error::NotCompatible { vertex });
    }
    let sq = |v: &BigInt| BigRational::from_integer(v * v);
    let nus = data.nus();
    let lower: BigRational = a.iter().zip(nus).map(|(w, v)| w * sq(v)).sum();
    let tail: BigRational = nus[l..].iter().map(sq).sum();
    Ok(lower + &a[l - 1] * tail)
}

/// Lower bound for `m` obtained by dividing the theorem by `Σ a(i)`. Relies on
/// [`ASSUMPTION_M0_NONINCREASING`]; the inequality is not strict.
pub fn weighted_m_bound(data: &GradedSystemData, a: &[BigRational]) -> Result<BigRational> {
    let total: BigRational = a.iter().sum();
    if total.is_zero() {
        return Err(Error::DegenerateGraph("compatible function sums to zero".into()));
    }
    Ok(theorem_lower_bound(data, a)? / total)
}

/// Strict lower bound on `m = m_{0,1}` for a maximal singularity, from the
/// weights `rᵢ = p(K, i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaximalityBound {
    #[serde(with = "exact::int")]
    pub sigma0: BigInt,
    #[serde(with = "exact::int")]
    pub sigma1: BigInt,
    #[serde(with = "exact::int")]
    pub threshold: BigInt,
    /// `n²(2Σ₀+Σ₁)² / (Σ₀(Σ₀+Σ₁))`; maximality forces `m` strictly above it.
    #[serde(with = "exact::rational")]
    pub bound: BigRational,
}

impl MaximalityBound {
    pub fn from_sums(sigma0: BigInt, sigma1: BigInt, threshold: BigInt) -> Result<Self> {
        if !sigma0.is_positive() {
            return Err(Error::DegenerateGraph(format!("sigma0 = {sigma0}, need a nonempty lower part")));
        }
        if sigma1.is_negative() {
            return Err(Error::MalformedInput(format!("sigma1 = {sigma1} is negative")));
        }
        let two = BigInt::from(2);
        let numer = &threshold * &threshold * (&two * &sigma0 + &sigma1).pow(2);
        let denom = &sigma0 * (&sigma0 + &sigma1);
        let bound = BigRational::new(numer, denom);
        let out = MaximalityBound { sigma0, sigma1, threshold, bound };
        // (2Σ₀+Σ₁)² − 4Σ₀(Σ₀+Σ₁) = Σ₁² ≥ 0
        if out.bound < out.four_n_squared() {
            return Err(Error::InvariantViolation(format!(
                "bound {} fell below 4n^2",
                exact::format_rational(&out.bound)
            )));
        }
        Ok(out)
    }

    pub fn four_n_squared(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(4) * &self.threshold * &self.threshold)
    }

    /// The bound itself exceeds `4n²`, which happens exactly when `Σ₁ > 0`.
    /// When `Σ₁ = 0` the bound equals `4n²` and the strict maximality
    /// inequality still yields `m > 4n²`.
    pub fn exceeds_four_n_squared(&self) -> bool {
        self.bound > self.four_n_squared()
    }

    /// `m > bound ≥ 4n²` always holds for a maximal singularity.
    pub fn implies_m_above_four_n_squared(&self) -> bool {
        self.bound >= self.four_n_squared()
    }
}

pub fn required_m_lower_bound(data: &GradedSystemData) -> Result<MaximalityBound> {
    let graph = data.graph();
    let l = graph.lower_len();
    if l == 0 {
        return Err(Error::DegenerateGraph("lower part is empty, sigma0 = 0".into()));
    }
    let weights = graph.path_weights(graph.num_vertices())?;
    let sigma0: BigInt = weights[..l].iter().sum();
    let sigma1: BigInt = weights[l..].iter().sum();
    MaximalityBound::from_sums(sigma0, sigma1, data.threshold().clone())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuarticVerdict {
    pub verdict: Verdict,
    pub maximal: bool,
    #[serde(with = "exact::rational")]
    pub bound: BigRational,
    #[serde(with = "exact::rational")]
    pub cap: BigRational,
    #[serde(with = "exact::int")]
    pub sigma0: BigInt,
    #[serde(with = "exact::int")]
    pub sigma1: BigInt,
    pub assumptions: Vec<&'static str>,
}

/// Tests a candidate infinitely near maximal singularity over a smooth point
/// of a quartic 3-fold against the cap `m ≤ 4n²`.
pub fn quartic_exclusion_verdict(data: &GradedSystemData) -> Result<QuarticVerdict> {
    if let Some(c) = data.graph().codims().iter().find(|&&c| c != 2 && c != 3) {
        return Err(Error::PreconditionFailed(format!(
            "codimension {c} does not occur on a 3-fold; expected codims in {{2, 3}}"
        )));
    }
    let b = required_m_lower_bound(data)?;
    let maximal = data.is_maximal_singularity();
    let cap = b.four_n_squared();
    let verdict = if !maximal {
        Verdict::NoVerdict
    } else if b.bound >= cap {
        // m > bound ≥ cap ≥ m
        Verdict::Contradiction
    } else {
        Verdict::Consistent
    };
    Ok(QuarticVerdict {
        verdict,
        maximal,
        bound: b.bound,
        cap,
        sigma0: b.sigma0,
        sigma1: b.sigma1,
        assumptions: vec![ASSUMPTION_M0_NONINCREASING, ASSUMPTION_QUARTIC_CAP],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::GraphSpec;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| x.into()).collect()
    }

    fn rats(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| BigRational::from_integer(x.into())).collect()
    }

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    fn single(nu: i64, n: i64) -> GradedSystemData {
        GradedSystemData::from_parts(GraphSpec::chain(vec![3]), &[nu], n).unwrap()
    }

    #[test]
    fn check_system_examples() {
        let sys = MultiplicitySystem::new(single(2, 1), vec![ints(&[4])], ints(&[0])).unwrap();
        assert!(sys.check_system().holds);

        let sys = MultiplicitySystem::new(single(2, 1), vec![ints(&[3])], ints(&[0])).unwrap();
        let c = sys.check_system();
        assert!(!c.holds);
        assert!(matches!(c.violation, Some(SystemViolation::Equality { j: 1, .. })));

        let data = GradedSystemData::from_parts(GraphSpec::chain(vec![3, 2]), &[2, 1], 1).unwrap();
        let sys = MultiplicitySystem::new(data, vec![ints(&[4])], ints(&[0])).unwrap();
        assert_eq!(
            sys.check_system().violation,
            Some(SystemViolation::Tail { d_last: 0.into(), required: 1.into() })
        );
    }

    #[test]
    fn check_system_support_and_bound() {
        let data = GradedSystemData::from_parts(GraphSpec::chain(vec![3, 3, 3]), &[1, 1, 1], 1).unwrap();
        // m_{1,3} > 0 without arrow 3->1
        let sys = MultiplicitySystem::new(
            data.clone(),
            vec![ints(&[2]), ints(&[1, 1]), ints(&[0, 1, 1])],
            ints(&[1, 1, 1]),
        )
        .unwrap();
        assert_eq!(sys.check_system().violation, Some(SystemViolation::Support { i: 1, j: 3 }));

        // m_{1,2} = 2 > d_1 = 1
        let sys = MultiplicitySystem::new(
            data,
            vec![ints(&[2]), ints(&[0, 2]), ints(&[1, 0, 1])],
            ints(&[1, 1, 1]),
        )
        .unwrap();
        assert_eq!(sys.check_system().violation, Some(SystemViolation::Bound { i: 1, j: 2 }));
    }

    #[test]
    fn system_shape_errors() {
        assert!(matches!(
            MultiplicitySystem::new(single(2, 1), vec![], ints(&[0])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            MultiplicitySystem::new(single(2, 1), vec![ints(&[4, 0])], ints(&[0])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            MultiplicitySystem::new(single(2, 1), vec![ints(&[4])], ints(&[-1])),
            Err(Error::MalformedInput(_))
        ));
    }

    #[test]
    fn theorem_lower_bound_examples() {
        assert_eq!(theorem_lower_bound(&single(3, 1), &rats(&[1])).unwrap(), rat(9, 1));
        assert_eq!(theorem_lower_bound(&single(0, 1), &rats(&[1])).unwrap(), rat(0, 1));
        let data = GradedSystemData::from_parts(GraphSpec::chain(vec![3, 2]), &[2, 1], 1).unwrap();
        assert_eq!(theorem_lower_bound(&data, &rats(&[1])).unwrap(), rat(5, 1));
    }

    #[test]
    fn theorem_lower_bound_errors() {
        let spec = GraphSpec::chain(vec![3, 3, 3]).with_arrows([(3, 1)]);
        let data = GradedSystemData::from_parts(spec, &[1, 1, 1], 1).unwrap();
        assert!(matches!(
            theorem_lower_bound(&data, &rats(&[1, 1, 1])),
            Err(Error::NotCompatible { vertex: 1 })
        ));
        let curve = GradedSystemData::from_parts(GraphSpec::chain(vec![2]), &[1], 1).unwrap();
        assert!(matches!(theorem_lower_bound(&curve, &[]), Err(Error::DegenerateGraph(_))));
    }

    #[test]
    fn maximality_bound_examples() {
        for n in 1..=5 {
            let b = required_m_lower_bound(&single(0, n)).unwrap();
            assert_eq!(b.bound, rat(4 * n * n, 1));
            assert!(!b.exceeds_four_n_squared());
            assert!(b.implies_m_above_four_n_squared());
        }
        let data = GradedSystemData::from_parts(GraphSpec::chain(vec![3, 2]), &[0, 0], 3).unwrap();
        let b = required_m_lower_bound(&data).unwrap();
        assert_eq!((b.sigma0.clone(), b.sigma1.clone()), (1.into(), 1.into()));
        assert_eq!(b.bound, rat(81, 2));
        assert!(b.exceeds_four_n_squared());

        let curve = GradedSystemData::from_parts(GraphSpec::chain(vec![2]), &[1], 1).unwrap();
        assert!(matches!(required_m_lower_bound(&curve), Err(Error::DegenerateGraph(_))));
    }

    #[test]
    fn quartic_verdict_examples() {
        for n in 1..=10 {
            let v = quartic_exclusion_verdict(&single(2 * n + 1, n)).unwrap();
            assert_eq!(v.verdict, Verdict::Contradiction);
            assert_eq!(v.cap, rat(4 * n * n, 1));
        }
        // K = 8 chain of points, n = 5: discrepancy 16, multiplicity Σν = 88 > 80
        let data = GradedSystemData::from_parts(GraphSpec::chain(vec![3; 8]), &[11; 8], 5).unwrap();
        let v = quartic_exclusion_verdict(&data).unwrap();
        assert!(v.maximal);
        assert_eq!(v.verdict, Verdict::Contradiction);

        let v = quartic_exclusion_verdict(&single(2, 1)).unwrap();
        assert_eq!(v.verdict, Verdict::NoVerdict);

        let fourfold = GradedSystemData::from_parts(GraphSpec::chain(vec![4]), &[9], 1).unwrap();
        assert!(matches!(quartic_exclusion_verdict(&fourfold), Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn quadratic_mean_step_is_tight_for_uniform_nu() {
        // On a single point the chain gives m ≥ ν² and maximality ν > 2n; at
        // ν = 2n the two meet exactly at 4n².
        for n in 1..=10 {
            let data = single(2 * n, n);
            let lb = weighted_m_bound(&data, &rats(&[1])).unwrap();
            assert_eq!(lb, required_m_lower_bound(&data).unwrap().bound);
        }
    }

    #[test]
    fn violation_json_is_tagged() {
        let v = SystemViolation::Bound { i: 1, j: 2 };
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"constraint":"bound","i":1,"j":2}"#);
    }
}

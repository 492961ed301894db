//! Intersection arithmetic that excludes maximal cycles.
//!
//! Covers a smooth double space `σ: V → Pᵐ` of index 1 (`m ≥ 3`) branched in
//! a hypersurface of degree `2m`, with a mobile system `|χ| ⊂ |−nK_V|`:
//! points and the three kinds of curves are excluded by restricting the
//! system to suitable test curves and surfaces. The last part handles the
//! test-surface computation for conic bundles.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{FromPrimitive, One, Signed, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact;
use crate::verdict::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionCase {
    Point,
    CurveCase1,
    CurveCase2,
    CurveCase3,
    ConicBundle,
}

fn serialize_quantities<S: Serializer>(
    q: &BTreeMap<&'static str, BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(q.iter().map(|(k, v)| (*k, exact::format_rational(v))))
}

/// Verdict of one exclusion argument with the exact numbers it used and the
/// geometric preconditions it took for granted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExclusionRecord {
    pub case: ExclusionCase,
    pub verdict: Verdict,
    #[serde(serialize_with = "serialize_quantities")]
    pub quantities: BTreeMap<&'static str, BigRational>,
    pub assumptions: Vec<&'static str>,
}

fn q(v: &BigInt) -> BigRational {
    BigRational::from_integer(v.clone())
}

fn check_degree(n: &BigInt) -> Result<()> {
    if n < &BigInt::one() {
        return Err(Error::MalformedInput(format!("degree n must be >= 1, got {n}")));
    }
    Ok(())
}

fn check_mult(nu: &BigInt) -> Result<()> {
    if nu.is_negative() {
        return Err(Error::MalformedInput(format!("multiplicity must be >= 0, got {nu}")));
    }
    Ok(())
}

/// A point `x` with `mult_x |χ| = ν`. The preimage of a general plane
/// through `σ(x)` is a smooth surface on which two members meet in `2n²`
/// points, so `ν² ≤ 2n²`; a maximal point needs `ν > 2n`.
pub fn exclude_point_double_space(n: &BigInt, nu: &BigInt) -> Result<ExclusionRecord> {
    check_degree(n)?;
    check_mult(nu)?;
    let two = BigInt::from(2);
    let maximal = nu > &(&two * n);
    Ok(ExclusionRecord {
        case: ExclusionCase::Point,
        verdict: if maximal { Verdict::Contradiction } else { Verdict::Consistent },
        quantities: BTreeMap::from([
            ("surface_pairing", q(&(&two * n * n))),
            ("mult_squared", q(&(nu * nu))),
            ("maximality_threshold", q(&(&two * n))),
        ]),
        assumptions: vec!["preimage of a general plane through sigma(x) is a smooth surface with no fixed curves of |chi|"],
    })
}

/// Curve `C = σ⁻¹(C̄)` with `C̄` not in the branch locus. The preimage of a
/// general line meeting `C̄` carries a series of degree `2n` with at least two
/// points of multiplicity `ν`.
pub fn exclude_curve_case1(n: &BigInt, nu: &BigInt) -> Result<ExclusionRecord> {
    check_degree(n)?;
    check_mult(nu)?;
    let series = BigInt::from(2) * n;
    let forced = BigInt::from(2) * nu;
    Ok(ExclusionRecord {
        case: ExclusionCase::CurveCase1,
        verdict: if forced > series { Verdict::Contradiction } else { Verdict::Consistent },
        quantities: BTreeMap::from([("series_degree", q(&series)), ("forced_degree", q(&forced))]),
        assumptions: vec!["preimage of a general line meeting the image curve is smooth and meets C in >= 2 points"],
    })
}

/// Curve whose image lies in the branch locus. A residual curve `R` of the
/// cone over `C̄` carries a series of degree `n·deg R` with `deg R` base points
/// of multiplicity `ν`.
pub fn exclude_curve_case2(n: &BigInt, nu: &BigInt, deg_r: &BigInt) -> Result<ExclusionRecord> {
    check_degree(n)?;
    check_mult(nu)?;
    if deg_r < &BigInt::one() {
        return Err(Error::MalformedInput(format!("deg R must be >= 1, got {deg_r}")));
    }
    let series = n * deg_r;
    let forced = nu * deg_r;
    Ok(ExclusionRecord {
        case: ExclusionCase::CurveCase2,
        verdict: if forced > series { Verdict::Contradiction } else { Verdict::Consistent },
        quantities: BTreeMap::from([
            ("series_degree", q(&series)),
            ("forced_degree", q(&forced)),
            ("residual_degree", q(deg_r)),
        ]),
        assumptions: vec!["residual curve R(x) of the cone over the image curve meets it in deg R distinct points"],
    })
}

/// The two slacks `(n − ν*) + (m−1)(ν − ν*)` and `(n − ν) + (m−1)(ν* − ν)`,
/// i.e. `(nh − νc − ν*c*)·c / d` and `(nh − νc − ν*c*)·c* / d`.
pub fn case3_slacks<T>(n: &T, m: &T, nu: &T, nu_star: &T) -> [T; 2]
where
    T: Clone + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    let m1 = m.clone() - T::one();
    let first = (n.clone() - nu_star.clone()) + m1.clone() * (nu.clone() - nu_star.clone());
    let second = (n.clone() - nu.clone()) + m1 * (nu_star.clone() - nu.clone());
    [first, second]
}

/// Both slacks nonnegative.
pub fn case3_feasible<T>(n: &T, m: &T, nu: &T, nu_star: &T) -> bool
where
    T: Clone + Zero + One + PartialOrd + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    case3_slacks(n, m, nu, nu_star).iter().all(|s| *s >= T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Case3Record {
    pub case: ExclusionCase,
    pub feasibility: Feasibility,
    #[serde(with = "exact::rational")]
    pub slack_c: BigRational,
    #[serde(with = "exact::rational")]
    pub slack_c_star: BigRational,
    /// `max(ν, ν*) ≤ n`, which feasibility always implies.
    pub within_degree: bool,
    pub assumptions: Vec<&'static str>,
}

/// Curve mapped birationally onto a curve `C̄` outside the branch locus.
/// On the double cover `S` of the ruled surface over `C̄`, the system
/// `|nh − νc − ν*c*|` has no fixed components, so it meets `c` and `c*`
/// nonnegatively. Decided over the rationals.
pub fn exclude_curve_case3(
    n: &BigRational,
    m: u32,
    nu: &BigRational,
    nu_star: &BigRational,
) -> Result<Case3Record> {
    if m < 3 {
        return Err(Error::MalformedInput(format!("ambient dimension m must be >= 3, got {m}")));
    }
    let mq = BigRational::from_u32(m).expect("u32 fits");
    let [slack_c, slack_c_star] = case3_slacks(n, &mq, nu, nu_star);
    let feasible = !slack_c.is_negative() && !slack_c_star.is_negative();
    Ok(Case3Record {
        case: ExclusionCase::CurveCase3,
        feasibility: if feasible { Feasibility::Feasible } else { Feasibility::Infeasible },
        within_degree: nu.max(nu_star) <= n,
        slack_c,
        slack_c_star,
        assumptions: vec![
            "for general x the base locus over the cone Z(x) consists of at most the two curves C and C*",
            "the branch curve on the ruled surface is nonsingular",
        ],
    })
}

/// Values of `ν*` making the third case feasible for fixed `(n, m, ν)`:
/// the closed interval `[(mν − n)/(m − 1), (n + (m − 1)ν)/m]`, or `None` when
/// it is empty.
pub fn case3_nu_star_interval(n: &BigRational, m: u32, nu: &BigRational) -> Option<(BigRational, BigRational)> {
    let mq = BigRational::from_u32(m)?;
    let m1 = &mq - BigRational::one();
    let lo = (&mq * nu - n) / &m1;
    let hi = (n + &m1 * nu) / &mq;
    (lo <= hi).then_some((lo, hi))
}

/// Numerical classes on the ruled surface over a plane curve of degree `d`
/// obtained from the cone with vertex at a general point: fiber `f` and the
/// exceptional section `e`, with `f² = 0`, `f·e = 1`, `e² = −d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuledSurfaceClasses {
    d: BigInt,
}

/// `f·[f] + e·[e]` on the ruled surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuledClass {
    pub f: BigInt,
    pub e: BigInt,
}

impl RuledSurfaceClasses {
    pub fn new(d: BigInt) -> Result<Self> {
        if d < BigInt::one() {
            return Err(Error::MalformedInput(format!("curve degree d must be >= 1, got {d}")));
        }
        Ok(RuledSurfaceClasses { d })
    }

    pub fn fiber(&self) -> RuledClass {
        RuledClass { f: BigInt::one(), e: BigInt::zero() }
    }

    pub fn section(&self) -> RuledClass {
        RuledClass { f: BigInt::zero(), e: BigInt::one() }
    }

    /// Hyperplane class `h = e + d·f`.
    pub fn hyperplane(&self) -> RuledClass {
        RuledClass { f: self.d.clone(), e: BigInt::one() }
    }

    pub fn pair(&self, x: &RuledClass, y: &RuledClass) -> BigInt {
        // f² = 0, f·e = 1, e² = −d
        &x.f * &y.e + &x.e * &y.f - &x.e * &y.e * &self.d
    }
}

/// Basis classes on the double cover `S` of the ruled surface: the pullback
/// `h` of the hyperplane class, the curve `c` and its conjugate `c*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CoverClass {
    H,
    C,
    CStar,
}

impl CoverClass {
    pub const ALL: [CoverClass; 3] = [CoverClass::H, CoverClass::C, CoverClass::CStar];

    fn idx(self) -> usize {
        self as usize
    }
}

/// Symmetric intersection pairing on `{h, c, c*}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleCoverTable {
    pub d: BigInt,
    pub m: u32,
    table: [[BigInt; 3]; 3],
}

impl DoubleCoverTable {
    /// Builds the table from the ruled surface:
    ///
    /// - `(c·c*) = ½(c̃·w̄) = md`, where `c̃ = h̄` is the class of the curve and
    ///   `w̄ = 2m·h̄` the branch curve;
    /// - `h² = 2h̄² = 2d` since `S → S̄` has degree 2;
    /// - `(h·c) = (h̄·σ_*c) = h̄·c̃ = d` by the projection formula, and the same
    ///   for `c*`;
    /// - `c + c* = σ*c̃ = h`, so `c² = (c·h) − (c·c*) = d(1 − m)`.
    pub fn build(d: BigInt, m: u32) -> Result<Self> {
        if m < 3 {
            return Err(Error::MalformedInput(format!("ambient dimension m must be >= 3, got {m}")));
        }
        let ruled = RuledSurfaceClasses::new(d.clone())?;
        let base_h = ruled.hyperplane();
        let h_sq = ruled.pair(&base_h, &base_h);
        debug_assert_eq!(h_sq, d);
        let curve = base_h.clone();
        let branch = RuledClass { f: &base_h.f * (2 * m), e: &base_h.e * (2 * m) };
        let (c_cstar, rem) = ruled.pair(&curve, &branch).div_rem(&BigInt::from(2));
        if !rem.is_zero() {
            return Err(Error::InvariantViolation("branch pairing is odd".into()));
        }
        let h_h = BigInt::from(2) * &h_sq;
        let h_c = ruled.pair(&base_h, &curve);
        let c_c = &h_c - &c_cstar;
        let table = [
            [h_h, h_c.clone(), h_c.clone()],
            [h_c.clone(), c_c.clone(), c_cstar.clone()],
            [h_c, c_cstar, c_c],
        ];
        let out = DoubleCoverTable { d, m, table };
        if !out.row_sum_consistent() {
            return Err(Error::InvariantViolation("c + c* does not pair like h".into()));
        }
        Ok(out)
    }

    pub fn get(&self, x: CoverClass, y: CoverClass) -> &BigInt {
        &self.table[x.idx()][y.idx()]
    }

    /// Pairing of `Σ xᵢ·basisᵢ` with `Σ yᵢ·basisᵢ` in the order `(h, c, c*)`.
    pub fn pair(&self, x: &[BigRational; 3], y: &[BigRational; 3]) -> BigRational {
        let mut total = BigRational::zero();
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                total += xi * yj * BigRational::from_integer(self.table[i][j].clone());
            }
        }
        total
    }

    /// `(c + c*)·x = h·x` for every basis class `x`.
    pub fn row_sum_consistent(&self) -> bool {
        CoverClass::ALL.iter().all(|&x| {
            self.get(CoverClass::C, x) + self.get(CoverClass::CStar, x) == *self.get(CoverClass::H, x)
        }) && (0..3).all(|i| (0..3).all(|j| self.table[i][j] == self.table[j][i]))
    }
}

pub fn build_double_cover_table(d: BigInt, m: u32) -> Result<DoubleCoverTable> {
    DoubleCoverTable::build(d, m)
}

/// One exceptional component over the conic-bundle base: multiplicity
/// `ν_{i,j}` of the system along it and `(E·L)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionalComponent {
    #[serde(with = "exact::int")]
    pub nu: BigInt,
    #[serde(with = "exact::int")]
    pub e_dot_l: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDatum", into = "RawDatum")]
pub struct ConicBundleDatum {
    mu: BigInt,
    a_dot_l: BigInt,
    disc_pairing: BigInt,
    exceptional: Vec<ExceptionalComponent>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDatum {
    #[serde(with = "exact::int")]
    mu: BigInt,
    #[serde(with = "exact::int")]
    a_dot_l: BigInt,
    #[serde(with = "exact::int")]
    disc_pairing: BigInt,
    exceptional: Vec<ExceptionalComponent>,
}

impl TryFrom<RawDatum> for ConicBundleDatum {
    type Error = Error;

    fn try_from(r: RawDatum) -> Result<Self> {
        ConicBundleDatum::new(r.mu, r.a_dot_l, r.disc_pairing, r.exceptional)
    }
}

impl From<ConicBundleDatum> for RawDatum {
    fn from(d: ConicBundleDatum) -> Self {
        RawDatum { mu: d.mu, a_dot_l: d.a_dot_l, disc_pairing: d.disc_pairing, exceptional: d.exceptional }
    }
}

impl ConicBundleDatum {
    pub fn new(
        mu: BigInt,
        a_dot_l: BigInt,
        disc_pairing: BigInt,
        exceptional: Vec<ExceptionalComponent>,
    ) -> Result<Self> {
        if mu.is_negative() {
            return Err(Error::MalformedInput(format!("mu must be >= 0, got {mu}")));
        }
        if disc_pairing.is_negative() {
            return Err(Error::MalformedInput(format!(
                "(4K + C).L must be >= 0 since |4K + C| is nonempty, got {disc_pairing}"
            )));
        }
        for (k, c) in exceptional.iter().enumerate() {
            if c.nu < BigInt::one() || c.e_dot_l < BigInt::one() {
                return Err(Error::MalformedInput(format!(
                    "exceptional component {} needs nu >= 1 and E.L >= 1",
                    k + 1
                )));
            }
        }
        Ok(ConicBundleDatum { mu, a_dot_l, disc_pairing, exceptional })
    }

    pub fn mu(&self) -> &BigInt {
        &self.mu
    }

    pub fn exceptional(&self) -> &[ExceptionalComponent] {
        &self.exceptional
    }

    /// `(D²·Λ*) = 4μ(A·L̄) − μ²((4K+C*)·L̄) − Σ ν²_{i,j}(E·L)`.
    pub fn test_surface_pairing(&self) -> BigInt {
        let four = BigInt::from(4);
        let exc: BigInt = self.exceptional.iter().map(|c| &c.nu * &c.nu * &c.e_dot_l).sum();
        &four * &self.mu * &self.a_dot_l - &self.mu * &self.mu * &self.disc_pairing - exc
    }

    /// `Σ (ν_{i,j} − μ)(E·L)`, which `A·L̄` must stay below.
    pub fn excess(&self) -> BigInt {
        self.exceptional.iter().map(|c| (&c.nu - &self.mu) * &c.e_dot_l).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConicBundleRecord {
    pub case: ExclusionCase,
    pub verdict: Verdict,
    #[serde(with = "exact::int")]
    pub test_surface_pairing: BigInt,
    #[serde(with = "exact::int")]
    pub excess: BigInt,
    pub assumptions: Vec<&'static str>,
}

/// Evaluates the test-surface pairing. Freeness of the family forces it to
/// be nonnegative; with `μ ≥ 1` and `A·L̄ < Σ(ν−μ)(E·L)` it is negative,
/// since `4μ(ν−μ) ≤ ν²`.
pub fn conic_bundle_check(datum: &ConicBundleDatum) -> Result<ConicBundleRecord> {
    let value = datum.test_surface_pairing();
    let excess = datum.excess();
    let assumptions = vec![
        "the family of test surfaces is free, so (D^2.Lambda*) >= 0",
        "a general curve psi^{-1}(R_u) meets every exceptional divisor transversally",
    ];
    if datum.mu.is_zero() {
        return Ok(ConicBundleRecord {
            case: ExclusionCase::ConicBundle,
            verdict: Verdict::NoVerdict,
            test_surface_pairing: value,
            excess,
            assumptions,
        });
    }
    if datum.a_dot_l >= excess {
        return Err(Error::PreconditionFailed(format!(
            "A.L = {} is not below sum (nu - mu)(E.L) = {excess}",
            datum.a_dot_l
        )));
    }
    Ok(ConicBundleRecord {
        case: ExclusionCase::ConicBundle,
        verdict: if value.is_negative() { Verdict::Contradiction } else { Verdict::Consistent },
        test_surface_pairing: value,
        excess,
        assumptions,
    })
}

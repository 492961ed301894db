//! Numerical data of plane Cremona transformations and Noether's
//! factorization into quadratic transformations.
//!
//! A Cremona map of the plane is recorded by its homaloidal type
//! `(n; ν₁, …, ν_N)`: the degree of the proper preimage of the net of lines
//! and the multiplicities at its base points. Infinitely near base points are
//! tracked only through a proximity forest; no positions are stored.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;

/// `(n; ν₁ ≥ … ≥ ν_N)` together with a proximity forest on the base points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawType", into = "RawType")]
pub struct HomaloidalType {
    degree: BigInt,
    mults: Vec<BigInt>,
    /// `(child, parent)`, 1-based, sorted by child.
    proximity: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawType {
    #[serde(with = "exact::int")]
    degree: BigInt,
    #[serde(with = "exact::int_vec")]
    mults: Vec<BigInt>,
    #[serde(default)]
    proximity: Vec<[usize; 2]>,
}

impl TryFrom<RawType> for HomaloidalType {
    type Error = Error;

    fn try_from(raw: RawType) -> Result<Self> {
        let proximity = raw.proximity.into_iter().map(|[c, p]| (c, p)).collect();
        HomaloidalType::new(raw.degree, raw.mults, proximity)
    }
}

impl From<HomaloidalType> for RawType {
    fn from(t: HomaloidalType) -> Self {
        RawType {
            degree: t.degree,
            mults: t.mults,
            proximity: t.proximity.into_iter().map(|(c, p)| [c, p]).collect(),
        }
    }
}

/// Residuals of the two Noether equations, each `LHS − RHS`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NoetherReport {
    pub holds: bool,
    /// `n² − (Σ νᵢ² + 1)`
    #[serde(with = "exact::int")]
    pub intersection_residual: BigInt,
    /// `(n−1)(n−2) − Σ νᵢ(νᵢ−1)`
    #[serde(with = "exact::int")]
    pub genus_residual: BigInt,
}

/// One of the three centers of a quadratic transformation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Center {
    /// An existing (proper) base point, 1-based.
    BasePoint(usize),
    /// A general point of the plane, not a base point (multiplicity 0).
    General,
}

/// Result of a quadratic transformation together with where its three
/// centers ended up in the re-sorted base-point list (`None` when the new
/// multiplicity is zero and the point was dropped).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticImage {
    pub result: HomaloidalType,
    pub images: [Option<usize>; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticStep {
    pub triple: [usize; 3],
    pub before: HomaloidalType,
    pub after: HomaloidalType,
}

impl HomaloidalType {
    /// Builds a type, checking its shape: `n ≥ 1`, multiplicities positive
    /// and non-increasing, proximity a forest on valid indices.
    ///
    /// The Noether equations are not enforced here; see
    /// [`HomaloidalType::verify_noether_equations`].
    pub fn new(degree: BigInt, mults: Vec<BigInt>, proximity: Vec<(usize, usize)>) -> Result<Self> {
        if degree < BigInt::one() {
            return Err(Error::MalformedInput(format!("degree must be >= 1, got {degree}")));
        }
        if let Some(i) = mults.iter().position(|v| !v.is_positive()) {
            return Err(Error::MalformedInput(format!(
                "multiplicity {} at base point {} is not positive",
                mults[i],
                i + 1
            )));
        }
        if let Some(i) = mults.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::MalformedInput(format!(
                "multiplicities not sorted descending at base point {}",
                i + 2
            )));
        }
        let proximity = check_forest(mults.len(), proximity)?;
        Ok(HomaloidalType { degree, mults, proximity })
    }

    /// All base points proper.
    pub fn from_parts(degree: impl Into<BigInt>, mults: impl IntoIterator<Item = i64>) -> Result<Self> {
        HomaloidalType::new(degree.into(), mults.into_iter().map(BigInt::from).collect(), Vec::new())
    }

    /// `(1; )`, the type of a projective transformation.
    pub fn identity() -> Self {
        HomaloidalType { degree: BigInt::one(), mults: Vec::new(), proximity: Vec::new() }
    }

    pub fn degree(&self) -> &BigInt {
        &self.degree
    }

    pub fn mults(&self) -> &[BigInt] {
        &self.mults
    }

    pub fn num_base_points(&self) -> usize {
        self.mults.len()
    }

    pub fn proximity(&self) -> &[(usize, usize)] {
        &self.proximity
    }

    pub fn is_identity(&self) -> bool {
        self.degree.is_one() && self.mults.is_empty()
    }

    /// Parent of base point `i` in the proximity forest.
    pub fn parent(&self, i: usize) -> Option<usize> {
        self.proximity
            .binary_search_by_key(&i, |&(c, _)| c)
            .ok()
            .map(|k| self.proximity[k].1)
    }

    /// A point lying directly on the plane, i.e. a root of the forest.
    pub fn is_proper(&self, i: usize) -> bool {
        self.parent(i).is_none()
    }

    /// Same degree and multiplicities, ignoring the proximity forest.
    pub fn same_numerical_type(&self, other: &HomaloidalType) -> bool {
        self.degree == other.degree && self.mults == other.mults
    }

    pub fn verify_noether_equations(&self) -> NoetherReport {
        let n = &self.degree;
        let one = BigInt::one();
        let sum_sq: BigInt = self.mults.iter().map(|v| v * v).sum();
        let sum_genus: BigInt = self.mults.iter().map(|v| v * (v - &one)).sum();
        let intersection_residual = n * n - (sum_sq + &one);
        let genus_residual = (n - &one) * (n - BigInt::from(2)) - sum_genus;
        NoetherReport {
            holds: intersection_residual.is_zero() && genus_residual.is_zero(),
            intersection_residual,
            genus_residual,
        }
    }

    /// Indices of the three greatest multiplicities (lowest indices on ties),
    /// or `None` for `n = 1`. Fails if the Noether inequality
    /// `ν₁ + ν₂ + ν₃ > n` does not hold, which can only happen for data that
    /// violates the Noether equations.
    pub fn noether_triple(&self) -> Result<Option<[usize; 3]>> {
        let report = self.verify_noether_equations();
        if !report.holds {
            return Err(Error::InvariantViolation(format!(
                "{self} violates the Noether equations (residuals {}, {})",
                report.intersection_residual, report.genus_residual
            )));
        }
        if self.degree.is_one() {
            return Ok(None);
        }
        if self.mults.len() < 3 {
            return Err(Error::InvariantViolation(format!(
                "{self} has degree >= 2 but fewer than three base points"
            )));
        }
        // sorted descending with a stable order, so ties already favor low indices
        let sum = &self.mults[0] + &self.mults[1] + &self.mults[2];
        if sum <= self.degree {
            return Err(Error::InvariantViolation(format!(
                "Noether inequality fails for {self}: {sum} <= {}",
                self.degree
            )));
        }
        Ok(Some([1, 2, 3]))
    }

    /// Quadratic transformation centered at three proper base points.
    ///
    /// `n' = 2n − νᵢ − νⱼ − ν_k`, `ν'ᵢ = n − νⱼ − ν_k` (cyclically), other
    /// multiplicities unchanged; zeros are dropped and the list re-sorted.
    pub fn apply_quadratic(&self, triple: [usize; 3]) -> Result<HomaloidalType> {
        self.apply_quadratic_at(triple.map(Center::BasePoint)).map(|img| img.result)
    }

    /// Quadratic transformation whose centers may include general points of
    /// the plane that are not base points.
    pub fn apply_quadratic_at(&self, centers: [Center; 3]) -> Result<QuadraticImage> {
        let count = self.mults.len();
        let mut center_mults = Vec::with_capacity(3);
        for (k, c) in centers.iter().enumerate() {
            match *c {
                Center::BasePoint(i) => {
                    if i == 0 || i > count {
                        return Err(Error::IndexOutOfRange { index: i, len: count });
                    }
                    if centers[..k].contains(c) {
                        return Err(Error::MalformedInput(format!(
                            "quadratic centers must be distinct, {i} repeated"
                        )));
                    }
                    if !self.is_proper(i) {
                        return Err(Error::InfinitelyNearObstruction {
                            point: i,
                            steps: Vec::new(),
                            obstruction: Box::new(self.clone()),
                        });
                    }
                    center_mults.push(self.mults[i - 1].clone());
                }
                Center::General => center_mults.push(BigInt::zero()),
            }
        }

        let total: BigInt = center_mults.iter().sum();
        let new_degree = BigInt::from(2) * &self.degree - &total;
        if new_degree < BigInt::one() {
            return Err(Error::DegenerateResult(format!(
                "quadratic step on {self} gives degree {new_degree}"
            )));
        }
        // ν'_a = n − ν_b − ν_c = n − (total − ν_a)
        let new_center_mults: Vec<BigInt> =
            center_mults.iter().map(|v| &self.degree - (&total - v)).collect();
        if let Some(v) = new_center_mults.iter().find(|v| v.is_negative()) {
            return Err(Error::DegenerateResult(format!(
                "quadratic step on {self} gives negative multiplicity {v}"
            )));
        }

        // (multiplicity, origin) where origin < count is an old base point and
        // count + k is the k-th center
        let mut entries: Vec<(BigInt, usize)> = Vec::with_capacity(count + 3);
        for (i, v) in self.mults.iter().enumerate() {
            entries.push((v.clone(), i));
        }
        for (k, c) in centers.iter().enumerate() {
            match *c {
                Center::BasePoint(i) => entries[i - 1].0 = new_center_mults[k].clone(),
                Center::General => entries.push((new_center_mults[k].clone(), count + k)),
            }
        }
        entries.retain(|(v, _)| !v.is_zero());
        entries.sort_by(|a, b| b.0.cmp(&a.0));

        let mut relabel = vec![None; count + 3];
        for (new, (_, origin)) in entries.iter().enumerate() {
            relabel[*origin] = Some(new + 1);
        }
        let is_center = |i: usize| centers.contains(&Center::BasePoint(i));
        // points infinitely near a center become proper after the step
        let proximity = self
            .proximity
            .iter()
            .filter(|&&(_, parent)| !is_center(parent))
            .filter_map(|&(child, parent)| Some((relabel[child - 1]?, relabel[parent - 1]?)))
            .collect();

        let images = std::array::from_fn(|k| match centers[k] {
            Center::BasePoint(i) => relabel[i - 1],
            Center::General => relabel[count + k],
        });
        let result = HomaloidalType::new(
            new_degree,
            entries.into_iter().map(|(v, _)| v).collect(),
            proximity,
        )?;
        Ok(QuadraticImage { result, images })
    }

    /// Noether's loop: repeatedly untwist the maximal triple until the degree
    /// reaches 1. Every intermediate type is re-verified.
    pub fn factorize(&self) -> Result<Vec<QuadraticStep>> {
        let report = self.verify_noether_equations();
        if !report.holds {
            return Err(Error::InvariantViolation(format!(
                "{self} violates the Noether equations (residuals {}, {})",
                report.intersection_residual, report.genus_residual
            )));
        }
        let mut steps = Vec::new();
        let mut current = self.clone();
        while !current.degree.is_one() {
            let triple = current
                .noether_triple()?
                .expect("degree >= 2 always yields a triple");
            if let Some(&point) = triple.iter().find(|&&i| !current.is_proper(i)) {
                return Err(Error::InfinitelyNearObstruction {
                    point,
                    steps,
                    obstruction: Box::new(current),
                });
            }
            let next = current.apply_quadratic(triple)?;
            if next.degree >= current.degree || !next.verify_noether_equations().holds {
                return Err(Error::InvariantViolation(format!(
                    "quadratic step {current} -> {next} did not reduce a valid type"
                )));
            }
            steps.push(QuadraticStep { triple, before: current, after: next.clone() });
            current = next;
        }
        if !current.is_identity() {
            return Err(Error::InvariantViolation(format!(
                "factorization ended at {current}, not (1; )"
            )));
        }
        Ok(steps)
    }
}

impl QuadraticStep {
    /// Recomputes the step forward, then applies the quadratic transformation
    /// at the images of the triple and checks that it restores `before`
    /// numerically. Centers whose multiplicity dropped to zero are re-entered
    /// as general points.
    pub fn round_trip(&self) -> Result<bool> {
        let forward = self.before.apply_quadratic_at(self.triple.map(Center::BasePoint))?;
        if forward.result != self.after {
            return Ok(false);
        }
        let centers = forward.images.map(|img| img.map_or(Center::General, Center::BasePoint));
        let back = self.after.apply_quadratic_at(centers)?;
        Ok(back.result.same_numerical_type(&self.before))
    }
}

impl fmt::Display for HomaloidalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", self.degree)?;
        for (i, v) in self.mults.iter().enumerate() {
            write!(f, "{}{v}", if i == 0 { " " } else { "," })?;
        }
        f.write_str(")")
    }
}

fn check_forest(count: usize, mut edges: Vec<(usize, usize)>) -> Result<Vec<(usize, usize)>> {
    let mut parent = vec![None; count + 1];
    for &(child, par) in &edges {
        for i in [child, par] {
            if i == 0 || i > count {
                return Err(Error::MalformedInput(format!(
                    "proximity edge ({child},{par}) names base point {i}, expected 1..={count}"
                )));
            }
        }
        if child == par {
            return Err(Error::MalformedInput(format!("proximity self-loop at {child}")));
        }
        if parent[child].replace(par).is_some() {
            return Err(Error::MalformedInput(format!(
                "base point {child} has more than one proximity parent"
            )));
        }
    }
    for start in 1..=count {
        let mut cur = start;
        let mut hops = 0;
        while let Some(p) = parent[cur] {
            cur = p;
            hops += 1;
            if hops > count {
                return Err(Error::MalformedInput(format!(
                    "proximity forest has a cycle through base point {start}"
                )));
            }
        }
    }
    edges.sort_unstable();
    Ok(edges)
}

/// Composes `steps` random quadratic transformations starting from `(1; )`.
///
/// Each step is centered at a random mix of existing base points and general
/// points; choices that would produce a negative multiplicity are redrawn.
/// Every generated point is proper.
pub fn random_homaloidal(seed: u64, steps: usize) -> HomaloidalType {
    const ATTEMPTS: usize = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = HomaloidalType::identity();
    for _ in 0..steps {
        let count = current.num_base_points();
        let mut next = None;
        for _ in 0..ATTEMPTS {
            let min_general = 3usize.saturating_sub(count);
            let general = rng.gen_range(min_general..=3);
            let mut centers = [Center::General; 3];
            for (slot, i) in index::sample(&mut rng, count, 3 - general).into_iter().enumerate() {
                centers[slot] = Center::BasePoint(i + 1);
            }
            if let Ok(img) = current.apply_quadratic_at(centers) {
                next = Some(img.result);
                break;
            }
        }
        current = match next {
            Some(t) => t,
            None => {
                current
                    .apply_quadratic_at([Center::General; 3])
                    .expect("three general centers always succeed")
                    .result
            }
        };
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: i64, mults: &[i64]) -> HomaloidalType {
        HomaloidalType::from_parts(n, mults.iter().copied()).unwrap()
    }

    #[test]
    fn noether_equations_on_known_types() {
        let q = t(2, &[1, 1, 1]).verify_noether_equations();
        assert!(q.holds);
        assert_eq!(q.intersection_residual, BigInt::zero());
        assert_eq!(q.genus_residual, BigInt::zero());

        assert!(HomaloidalType::identity().verify_noether_equations().holds);

        let r = t(5, &[2, 2, 2, 2, 2, 2]).verify_noether_equations();
        assert!(r.holds);

        let bad = t(3, &[2, 1, 1]).verify_noether_equations();
        assert!(!bad.holds);
        // 9 − (4+1+1+1) = 2, 2 − 2 = 0
        assert_eq!(bad.intersection_residual, BigInt::from(2));
        assert_eq!(bad.genus_residual, BigInt::zero());
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert!(matches!(
            HomaloidalType::from_parts(2, [1, 2, 1]),
            Err(Error::MalformedInput(_))
        ));
        assert!(matches!(
            HomaloidalType::from_parts(2, [1, 1, 0]),
            Err(Error::MalformedInput(_))
        ));
        assert!(matches!(
            HomaloidalType::from_parts(0, []),
            Err(Error::MalformedInput(_))
        ));
        let ones = vec![BigInt::one(); 3];
        let cyclic = HomaloidalType::new(2.into(), ones.clone(), vec![(1, 2), (2, 1)]);
        assert!(matches!(cyclic, Err(Error::MalformedInput(_))));
        let two_parents = HomaloidalType::new(2.into(), ones.clone(), vec![(3, 1), (3, 2)]);
        assert!(matches!(two_parents, Err(Error::MalformedInput(_))));
        let out_of_range = HomaloidalType::new(2.into(), ones, vec![(4, 1)]);
        assert!(matches!(out_of_range, Err(Error::MalformedInput(_))));
    }

    #[test]
    fn noether_triple_examples() {
        assert_eq!(t(2, &[1, 1, 1]).noether_triple().unwrap(), Some([1, 2, 3]));
        assert_eq!(HomaloidalType::identity().noether_triple().unwrap(), None);
        let sextic = t(5, &[2, 2, 2, 2, 2, 2]);
        let triple = sextic.noether_triple().unwrap().unwrap();
        assert_eq!(triple, [1, 2, 3]);
        let sum: BigInt = triple.iter().map(|&i| &sextic.mults()[i - 1]).sum();
        assert!(sum > *sextic.degree());
    }

    #[test]
    fn noether_triple_rejects_invalid_data() {
        assert!(matches!(
            t(3, &[1, 1, 1]).noether_triple(),
            Err(Error::InvariantViolation(_))
        ));
    }

    #[test]
    fn quadratic_step_examples() {
        let id = t(2, &[1, 1, 1]).apply_quadratic([1, 2, 3]).unwrap();
        assert_eq!(id, HomaloidalType::identity());

        let sextic = t(5, &[2, 2, 2, 2, 2, 2]);
        let quartic = sextic.apply_quadratic([1, 2, 3]).unwrap();
        assert_eq!(quartic, t(4, &[2, 2, 2, 1, 1, 1]));
        assert!(quartic.verify_noether_equations().holds);

        let img = sextic.apply_quadratic_at([1, 2, 3].map(Center::BasePoint)).unwrap();
        assert_eq!(img.images, [Some(4), Some(5), Some(6)]);
        let back = quartic.apply_quadratic([4, 5, 6]).unwrap();
        assert_eq!(back, sextic);
    }

    #[test]
    fn quadratic_step_errors() {
        let sextic = t(5, &[2, 2, 2, 2, 2, 2]);
        assert!(matches!(sextic.apply_quadratic([1, 1, 2]), Err(Error::MalformedInput(_))));
        assert!(matches!(
            sextic.apply_quadratic([1, 2, 7]),
            Err(Error::IndexOutOfRange { index: 7, len: 6 })
        ));
        // 2·2 − 3·2 = −2
        let steep = t(2, &[2, 2, 2]);
        assert!(matches!(steep.apply_quadratic([1, 2, 3]), Err(Error::DegenerateResult(_))));

        let near = HomaloidalType::new(2.into(), vec![BigInt::one(); 3], vec![(3, 1)]).unwrap();
        match near.apply_quadratic([1, 2, 3]) {
            Err(Error::InfinitelyNearObstruction { point, .. }) => assert_eq!(point, 3),
            other => panic!("expected obstruction, got {other:?}"),
        }
    }

    #[test]
    fn children_of_centers_become_proper() {
        // (4; 2,2,2,1,1,1) with point 4 infinitely near point 1
        let q = HomaloidalType::new(
            4.into(),
            [2, 2, 2, 1, 1, 1].map(BigInt::from).to_vec(),
            vec![(4, 1), (6, 5)],
        )
        .unwrap();
        let after = q.apply_quadratic([1, 2, 3]).unwrap();
        assert_eq!(after.degree(), &BigInt::from(2));
        // centers drop to 0; old points 4,5,6 become 1,2,3 with 6 still near 5
        assert_eq!(after.mults(), &[BigInt::one(), BigInt::one(), BigInt::one()]);
        assert_eq!(after.proximity(), &[(3, 2)]);
    }

    #[test]
    fn factorize_examples() {
        assert!(HomaloidalType::identity().factorize().unwrap().is_empty());

        let steps = t(2, &[1, 1, 1]).factorize().unwrap();
        assert_eq!(steps.len(), 1);
        assert!(steps[0].after.is_identity());

        let steps = t(5, &[2, 2, 2, 2, 2, 2]).factorize().unwrap();
        assert_eq!(steps[0].after, t(4, &[2, 2, 2, 1, 1, 1]));
        assert!(steps.last().unwrap().after.is_identity());
        for w in steps.windows(2) {
            assert_eq!(w[0].after, w[1].before);
            assert!(w[1].before.degree() < w[0].before.degree());
        }
        assert!(steps.len() <= 4);
        for s in &steps {
            assert!(s.round_trip().unwrap());
        }
    }

    #[test]
    fn factorize_reports_obstruction_with_partial_steps() {
        // (5; 2⁶) with point 5 near point 4: first step fine, the second hits it
        let t = HomaloidalType::new(
            5.into(),
            vec![BigInt::from(2); 6],
            vec![(5, 4)],
        )
        .unwrap();
        match t.factorize() {
            Err(Error::InfinitelyNearObstruction { steps, obstruction, .. }) => {
                assert_eq!(steps.len(), 1);
                assert_eq!(obstruction.degree(), &BigInt::from(4));
            }
            other => panic!("expected obstruction, got {other:?}"),
        }
    }

    #[test]
    fn factorize_rejects_invalid_types() {
        assert!(matches!(t(3, &[2, 1, 1]).factorize(), Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn generator_examples() {
        assert_eq!(random_homaloidal(7, 0), HomaloidalType::identity());
        assert_eq!(random_homaloidal(7, 1), t(2, &[1, 1, 1]));
        let g = random_homaloidal(42, 3);
        assert!(g.verify_noether_equations().holds);
        assert_eq!(random_homaloidal(42, 3), g);
    }

    #[test]
    fn json_shape() {
        let t: HomaloidalType =
            serde_json::from_str(r#"{"degree": 2, "mults": [1,1,1], "proximity": [[3,1]]}"#).unwrap();
        assert_eq!(t.parent(3), Some(1));
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"degree":2,"mults":[1,1,1],"proximity":[[3,1]]}"#
        );
        let err = serde_json::from_str::<HomaloidalType>(r#"{"degree": 2, "mults": [1,2,1]}"#);
        assert!(err.is_err());
    }
}

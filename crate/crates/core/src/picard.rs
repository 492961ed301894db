//! Untwisting a maximal double point of a quartic 3-fold.
//!
//! Let `x` be a double point of a quartic `V ⊂ P⁴` and `V₀ → V` its blow-up,
//! with `Pic V₀ = Zh ⊕ Ze`. Projection from `x` is a double cover of `P³`;
//! swapping the sheets gives an involution `τ` that is an automorphism away
//! from the 24 lines through `x`. Its action on the lattice is
//!
//! ```text
//! τ*h = 3h − 4e,    τ*e = 2h − 3e.
//! ```
//!
//! A mobile system of class `nh − νe` with `ν > n` is untwisted by `τ`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;

/// Lines on the quartic through the double point; `τ` is undefined on them.
pub const LINES_THROUGH_DOUBLE_POINT: usize = 24;

/// The class `a·h + b·e`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PicardClass {
    #[serde(with = "exact::int")]
    pub h: BigInt,
    #[serde(with = "exact::int")]
    pub e: BigInt,
}

impl PicardClass {
    pub fn new(h: impl Into<BigInt>, e: impl Into<BigInt>) -> Self {
        PicardClass { h: h.into(), e: e.into() }
    }

    pub fn hyperplane() -> Self {
        PicardClass::new(1, 0)
    }

    pub fn exceptional() -> Self {
        PicardClass::new(0, 1)
    }

    pub fn add(&self, other: &PicardClass) -> PicardClass {
        PicardClass { h: &self.h + &other.h, e: &self.e + &other.e }
    }

    pub fn scale(&self, k: &BigInt) -> PicardClass {
        PicardClass { h: &self.h * k, e: &self.e * k }
    }
}

impl fmt::Display for PicardClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}h{:+}e", self.h, self.e)
    }
}

/// An integer 2×2 matrix acting on `(a, b)` coordinates; the columns are the
/// images of `h` and `e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeInvolution {
    image_h: PicardClass,
    image_e: PicardClass,
}

impl LatticeInvolution {
    pub fn from_images(image_h: PicardClass, image_e: PicardClass) -> Self {
        LatticeInvolution { image_h, image_e }
    }

    /// `τ*` for the double point of a quartic.
    pub fn quartic() -> Self {
        LatticeInvolution::from_images(PicardClass::new(3, -4), PicardClass::new(2, -3))
    }

    pub fn apply(&self, c: &PicardClass) -> PicardClass {
        self.image_h.scale(&c.h).add(&self.image_e.scale(&c.e))
    }

    pub fn compose(&self, other: &LatticeInvolution) -> LatticeInvolution {
        LatticeInvolution {
            image_h: self.apply(&other.image_h),
            image_e: self.apply(&other.image_e),
        }
    }

    pub fn determinant(&self) -> BigInt {
        &self.image_h.h * &self.image_e.e - &self.image_e.h * &self.image_h.e
    }

    pub fn is_identity(&self) -> bool {
        self.image_h == PicardClass::hyperplane() && self.image_e == PicardClass::exceptional()
    }

    pub fn is_involution(&self) -> bool {
        self.compose(self).is_identity()
    }

    /// `e + τ*e = 2(h − e)` (the exceptional divisor maps to a quadric) and
    /// `h + τ*h = 4(h − e)` (a hyperplane section maps to a quartic surface).
    pub fn verify_projection_relations(&self) -> bool {
        let h = PicardClass::hyperplane();
        let e = PicardClass::exceptional();
        let plane = PicardClass::new(1, -1);
        e.add(&self.apply(&e)) == plane.scale(&BigInt::from(2))
            && h.add(&self.apply(&h)) == plane.scale(&BigInt::from(4))
    }
}

/// `τ*` of the quartic double point.
pub fn tau_action(c: &PicardClass) -> PicardClass {
    LatticeInvolution::quartic().apply(c)
}

pub fn verify_projection_relations() -> bool {
    LatticeInvolution::quartic().verify_projection_relations()
}

/// The class `n·h − ν·e` of the proper transform of a mobile system.
///
/// `ν` is not restricted in sign: the image of a realizable class can have
/// `ν < 0`, which flags that the input was not geometrically realizable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MobileClass {
    #[serde(with = "exact::int")]
    pub n: BigInt,
    #[serde(with = "exact::int")]
    pub nu: BigInt,
}

impl MobileClass {
    pub fn new(n: impl Into<BigInt>, nu: impl Into<BigInt>) -> Result<Self> {
        let (n, nu) = (n.into(), nu.into());
        if n < BigInt::one() {
            return Err(Error::MalformedInput(format!("degree n must be >= 1, got {n}")));
        }
        Ok(MobileClass { n, nu })
    }

    pub fn class(&self) -> PicardClass {
        PicardClass { h: self.n.clone(), e: -&self.nu }
    }

    /// The double point is a maximal cycle: `ν > n`.
    pub fn is_maximal(&self) -> bool {
        self.nu > self.n
    }
}

impl fmt::Display for MobileClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, nu={})", self.n, self.nu)
    }
}

/// `(n, ν) ↦ (3n − 2ν, 4n − 3ν)`.
pub fn untwist_step(m: &MobileClass) -> Result<MobileClass> {
    let image = tau_action(&m.class());
    if image.h < BigInt::one() {
        return Err(Error::DegenerateResult(format!(
            "untwisting {m} gives degree {}; not a mobile system",
            image.h
        )));
    }
    Ok(MobileClass { n: image.h, nu: -image.e })
}

/// Applies [`untwist_step`] while the double point stays maximal. Returns the
/// whole trajectory, starting with `m`.
pub fn untwist_loop(m: &MobileClass) -> Result<Vec<MobileClass>> {
    let mut out = vec![m.clone()];
    loop {
        let cur = out.last().expect("trajectory is nonempty");
        if !cur.is_maximal() {
            return Ok(out);
        }
        let next = untwist_step(cur)?;
        if next.n >= cur.n {
            return Err(Error::InvariantViolation(format!("untwisting {cur} did not lower the degree")));
        }
        out.push(next);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mc(n: i64, nu: i64) -> MobileClass {
        MobileClass::new(n, nu).unwrap()
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau_action(&PicardClass::hyperplane()), PicardClass::new(3, -4));
        assert_eq!(tau_action(&PicardClass::exceptional()), PicardClass::new(2, -3));
        assert_eq!(tau_action(&PicardClass::new(1, -1)), PicardClass::new(1, -1));
        let c = PicardClass::new(17, -5);
        assert_eq!(tau_action(&tau_action(&c)), c);
    }

    #[test]
    fn matrix_invariants() {
        let tau = LatticeInvolution::quartic();
        assert!(tau.is_involution());
        assert_eq!(tau.determinant(), BigInt::from(-1));
        assert!(verify_projection_relations());
        let perturbed = LatticeInvolution::from_images(PicardClass::new(3, -4), PicardClass::new(2, -2));
        assert!(!perturbed.verify_projection_relations());
        assert!(!perturbed.is_involution());
    }

    #[test]
    fn untwist_step_examples() {
        assert_eq!(untwist_step(&mc(3, 4)).unwrap(), mc(1, 0));
        assert_eq!(untwist_step(&mc(6, 6)).unwrap(), mc(6, 6));
        let m = mc(7, 9);
        assert_eq!(untwist_step(&untwist_step(&m).unwrap()).unwrap(), m);
        assert!(matches!(untwist_step(&mc(1, 2)), Err(Error::DegenerateResult(_))));
        assert!(matches!(MobileClass::new(0, 0), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn untwist_loop_examples() {
        assert_eq!(untwist_loop(&mc(3, 4)).unwrap(), vec![mc(3, 4), mc(1, 0)]);
        assert_eq!(untwist_loop(&mc(5, 2)).unwrap(), vec![mc(5, 2)]);
        assert_eq!(untwist_loop(&mc(7, 9)).unwrap(), vec![mc(7, 9), mc(3, 1)]);
        assert!(matches!(untwist_loop(&mc(2, 4)), Err(Error::DegenerateResult(_))));
    }
}

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use crate::Rat;

/// A rational number extended with an infinitesimal part: `r + d·δ` where
/// δ is positive and smaller than any positive rational that matters for
/// the constraint system at hand. Strict bounds `x < c` become non-strict
/// bounds `x <= c - δ`, which keeps the simplex pivoting rules unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DRat {
    pub r: Rat,
    pub d: Rat,
}

impl DRat {
    pub fn from_rat(r: Rat) -> Self {
        DRat { r, d: Rat::zero() }
    }

    /// `c - δ`, the largest value strictly below `c`.
    pub fn strictly_below(c: Rat) -> Self {
        DRat { r: c, d: -Rat::one() }
    }

    /// `c + δ`, the smallest value strictly above `c`.
    pub fn strictly_above(c: Rat) -> Self {
        DRat { r: c, d: Rat::one() }
    }

    pub fn zero() -> Self {
        DRat { r: Rat::zero(), d: Rat::zero() }
    }

    pub fn is_rational(&self) -> bool {
        self.d.is_zero()
    }

    pub fn scaled(&self, k: &Rat) -> Self {
        DRat { r: &self.r * k, d: &self.d * k }
    }

    /// Concrete value once a positive rational has been chosen for δ.
    pub fn at_delta(&self, delta: &Rat) -> Rat {
        &self.r + &self.d * delta
    }
}

impl PartialOrd for DRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DRat {
    fn cmp(&self, other: &Self) -> Ordering {
        self.r.cmp(&other.r).then_with(|| self.d.cmp(&other.d))
    }
}

impl Add for DRat {
    type Output = DRat;
    fn add(self, rhs: DRat) -> DRat {
        DRat { r: self.r + rhs.r, d: self.d + rhs.d }
    }
}

impl<'a> Add<&'a DRat> for DRat {
    type Output = DRat;
    fn add(self, rhs: &DRat) -> DRat {
        DRat { r: self.r + &rhs.r, d: self.d + &rhs.d }
    }
}

impl AddAssign<&DRat> for DRat {
    fn add_assign(&mut self, rhs: &DRat) {
        self.r += &rhs.r;
        self.d += &rhs.d;
    }
}

impl Sub for DRat {
    type Output = DRat;
    fn sub(self, rhs: DRat) -> DRat {
        DRat { r: self.r - rhs.r, d: self.d - rhs.d }
    }
}

impl<'a> Sub<&'a DRat> for DRat {
    type Output = DRat;
    fn sub(self, rhs: &DRat) -> DRat {
        DRat { r: self.r - &rhs.r, d: self.d - &rhs.d }
    }
}

impl SubAssign<&DRat> for DRat {
    fn sub_assign(&mut self, rhs: &DRat) {
        self.r -= &rhs.r;
        self.d -= &rhs.d;
    }
}

impl Mul<&Rat> for &DRat {
    type Output = DRat;
    fn mul(self, k: &Rat) -> DRat {
        self.scaled(k)
    }
}

impl Neg for DRat {
    type Output = DRat;
    fn neg(self) -> DRat {
        DRat { r: -self.r, d: -self.d }
    }
}

impl fmt::Display for DRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d.is_zero() {
            write!(f, "{}", self.r)
        } else {
            write!(f, "{}{}{}δ", self.r, if self.d.is_negative_sign() { "" } else { "+" }, self.d)
        }
    }
}

trait SignExt {
    fn is_negative_sign(&self) -> bool;
}

impl SignExt for Rat {
    fn is_negative_sign(&self) -> bool {
        self < &Rat::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    #[test]
    fn ordering_is_lexicographic() {
        let below = DRat::strictly_below(r(1));
        let exact = DRat::from_rat(r(1));
        let above = DRat::strictly_above(r(1));
        assert!(below < exact);
        assert!(exact < above);
        assert!(DRat::from_rat(r(0)) < below);
    }

    #[test]
    fn concretization_respects_strictness() {
        let below = DRat::strictly_below(r(1));
        let delta = Rat::new(1.into(), 8.into());
        assert_eq!(below.at_delta(&delta), Rat::new(7.into(), 8.into()));
    }
}

//! Half-integer arithmetic for angular momentum quantum numbers.
//!
//! Values are stored as twice their physical value so that e.g. `m = 3/2`
//! is exact and comparisons/arithmetic stay in integers.

use std::fmt;
use std::ops::{Add, Neg, Sub};

/// A half-integer (`j`, `m`, ...) stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Half(i32);

impl Half {
    /// Construct from twice the value: `Half::halves(3)` is `3/2`.
    pub const fn halves(twice: i32) -> Self {
        Half(twice)
    }

    /// Construct from an integer value.
    pub const fn int(n: i32) -> Self {
        Half(2 * n)
    }

    /// Twice the value, always an integer.
    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub const fn abs(self) -> Self {
        Half(self.0.abs())
    }

    /// Iterate `-j, -j+1, ..., +j` for `j = self`.
    pub fn projections(self) -> impl Iterator<Item = Half> {
        let j = self.0;
        (0..)
            .map(move |k| Half(-j + 2 * k))
            .take_while(move |m| m.0 <= j)
    }
}

impl Add for Half {
    type Output = Half;
    fn add(self, rhs: Half) -> Half {
        Half(self.0 + rhs.0)
    }
}

impl Sub for Half {
    type Output = Half;
    fn sub(self, rhs: Half) -> Half {
        Half(self.0 - rhs.0)
    }
}

impl Neg for Half {
    type Output = Half;
    fn neg(self) -> Half {
        Half(-self.0)
    }
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_value() {
        assert_eq!(Half::halves(5).to_string(), "5/2");
        assert_eq!(Half::halves(-3).to_string(), "-3/2");
        assert_eq!(Half::int(2).to_string(), "2");
        assert_eq!(Half::halves(5).value(), 2.5);
    }

    #[test]
    fn projections_cover_multiplet() {
        let ms: Vec<i32> = Half::halves(3).projections().map(Half::twice).collect();
        assert_eq!(ms, vec![-3, -1, 1, 3]);
        assert_eq!(Half::int(0).projections().count(), 1);
    }
}

//! Exact move costs.
//!
//! Costs are kept as reduced rationals so that sums taken in different orders
//! by different aligners compare equal bit for bit. The standard cost table
//! only needs multiples of 1/10000, but heuristic values coming out of the
//! marking-equation LP can have arbitrary denominators.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};

/// Number of cost units in one full deviation. Silent model moves cost one unit.
pub const COST_SCALE: i128 = 10_000;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cost(Ratio<i128>);

impl Cost {
    pub const ZERO: Cost = Cost(Ratio::new_raw(0, 1));
    pub const ONE: Cost = Cost(Ratio::new_raw(1, 1));

    pub fn new(numer: i128, denom: i128) -> Cost {
        assert!(denom != 0, "zero denominator");
        Cost(Ratio::new(numer, denom))
    }

    pub fn integer(value: i128) -> Cost {
        Cost(Ratio::from_integer(value))
    }

    /// `units / 10000`.
    pub fn units(units: i128) -> Cost {
        Cost::new(units, COST_SCALE)
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        *self.0.numer() < 0
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn as_ratio(&self) -> Ratio<i128> {
        self.0
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numer()), BigInt::from(self.denom()))
    }

    /// Converts an arbitrary-precision value. Values whose reduced form does
    /// not fit are floored onto the 1/10000 grid, which keeps lower bounds
    /// valid (and consistent, since every move cost sits on that grid).
    pub fn from_big_floor(value: &BigRational) -> Cost {
        match (value.numer().to_i128(), value.denom().to_i128()) {
            (Some(n), Some(d)) => Cost::new(n, d),
            _ => {
                let scaled = value * BigRational::from_integer(BigInt::from(COST_SCALE));
                let units = scaled.floor().to_integer();
                Cost::units(units.to_i128().expect("cost out of range"))
            }
        }
    }

    /// Least common multiple of the denominators, used to scale a cost vector
    /// to integers.
    pub fn common_denominator<'a>(costs: impl IntoIterator<Item = &'a Cost>) -> i128 {
        costs.into_iter().fold(1i128, |acc, c| acc.lcm(&c.denom()))
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl AddAssign for Cost {
    fn add_assign(&mut self, rhs: Cost) {
        self.0 += rhs.0;
    }
}

impl Sub for Cost {
    type Output = Cost;
    fn sub(self, rhs: Cost) -> Cost {
        Cost(self.0 - rhs.0)
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Cost> for Cost {
    fn sum<I: Iterator<Item = &'a Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, |a, b| a + *b)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cost({self})")
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid cost literal `{0}`")]
pub struct ParseCostError(String);

impl FromStr for Cost {
    type Err = ParseCostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseCostError(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i128 = n.trim().parse().map_err(|_| err())?;
                let d: i128 = d.trim().parse().map_err(|_| err())?;
                if d == 0 {
                    return Err(err());
                }
                Ok(Cost::new(n, d))
            }
            None => Ok(Cost::integer(s.trim().parse().map_err(|_| err())?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silent_units_accumulate_exactly() {
        let total: Cost = (0..3).map(|_| Cost::units(1)).sum::<Cost>() + Cost::ONE;
        assert_eq!(total, Cost::new(10003, 10000));
        assert_eq!(total.to_string(), "10003/10000");
    }

    #[test]
    fn reduced_form_is_canonical() {
        assert_eq!(Cost::units(5000), Cost::new(1, 2));
        assert_eq!(Cost::units(20000).to_string(), "2");
    }

    #[test]
    fn parse_round_trip() {
        for c in [Cost::ZERO, Cost::units(3), Cost::new(7, 3)] {
            assert_eq!(c.to_string().parse::<Cost>().unwrap(), c);
        }
        assert!("1/0".parse::<Cost>().is_err());
    }

    #[test]
    fn huge_values_floor_to_grid() {
        let big = BigRational::new(BigInt::from(1) << 200, (BigInt::from(1) << 199) + 1);
        let c = Cost::from_big_floor(&big);
        assert!(c.to_big() <= big);
        assert_eq!(c, Cost::units(19999));
    }
}

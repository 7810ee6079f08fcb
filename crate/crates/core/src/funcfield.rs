//! The rational function field K = GF(2)(t): reduced fractions, places,
//! valuations, naive heights, and exhaustive enumeration by height.
//!
//! A place is a monic irreducible of GF(2)[t] or the place at infinity
//! (the degree-1 place `1/t`). The height of a reduced `y = num/den` is
//! `2^max(deg num, deg den)`, which agrees with the adelic product
//! `prod_w max(1, |y|_w)` because `num` and `den` share no factor.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::gf2poly::{self, BinaryPoly, ParsePolyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuncFieldError {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("{0} is not irreducible, so it is not a finite place")]
    NotIrreducible(BinaryPoly),
    #[error("{0}")]
    Parse(#[from] ParsePolyError),
}

/// A place of K: a monic irreducible of GF(2)[t], or the place at infinity.
///
/// The `Finite` payload must be irreducible of degree >= 1; go through
/// [`Place::finite`] unless the polynomial comes straight out of
/// [`gf2poly::factor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Finite(BinaryPoly),
    Infinity,
}

impl Place {
    pub const INFINITY: Place = Place::Infinity;

    /// The finite place at `omega`, validated irreducible.
    pub fn finite(omega: BinaryPoly) -> Result<Place, FuncFieldError> {
        if gf2poly::is_irreducible(omega) {
            Ok(Place::Finite(omega))
        } else {
            Err(FuncFieldError::NotIrreducible(omega))
        }
    }

    /// Residue field degree; the infinite place has degree 1 by convention.
    pub fn degree(&self) -> u32 {
        match self {
            Place::Finite(w) => w.degree().expect("finite place is nonconstant"),
            Place::Infinity => 1,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Place::Infinity)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(w) => write!(f, "{w}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Place {
    type Err = FuncFieldError;

    fn from_str(s: &str) -> Result<Place, FuncFieldError> {
        if s.trim().eq_ignore_ascii_case("inf") {
            return Ok(Place::Infinity);
        }
        Place::finite(s.parse::<BinaryPoly>()?)
    }
}

/// A reduced rational function over GF(2)(t). Invariants: `den != 0`,
/// `gcd(num, den) = 1`, and zero is stored as `0/1`. Over GF(2) the unit
/// group is trivial, so this representative is unique.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: BinaryPoly,
    den: BinaryPoly,
}

impl RatFunc {
    pub const ZERO: RatFunc = RatFunc {
        num: BinaryPoly::ZERO,
        den: BinaryPoly::ONE,
    };
    pub const ONE: RatFunc = RatFunc {
        num: BinaryPoly::ONE,
        den: BinaryPoly::ONE,
    };

    /// Reduce `num/den` to lowest terms.
    pub fn new(num: BinaryPoly, den: BinaryPoly) -> Result<RatFunc, FuncFieldError> {
        if den.is_zero() {
            return Err(FuncFieldError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(RatFunc::ZERO);
        }
        let g = num.gcd(den).expect("den nonzero");
        let num = num.divmod(g).expect("gcd nonzero").0;
        let den = den.divmod(g).expect("gcd nonzero").0;
        Ok(RatFunc { num, den })
    }

    /// Constructor for parts already known coprime (the enumerator's case).
    pub(crate) fn from_coprime(num: BinaryPoly, den: BinaryPoly) -> RatFunc {
        debug_assert!(!den.is_zero());
        debug_assert!(num.is_zero() && den.is_one() || num.gcd(den).unwrap().is_one());
        RatFunc { num, den }
    }

    pub fn num(&self) -> BinaryPoly {
        self.num
    }

    pub fn den(&self) -> BinaryPoly {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn recip(&self) -> Result<RatFunc, FuncFieldError> {
        if self.is_zero() {
            return Err(FuncFieldError::DivisionByZero);
        }
        Ok(RatFunc {
            num: self.den,
            den: self.num,
        })
    }

    pub fn div(&self, rhs: &RatFunc) -> Result<RatFunc, FuncFieldError> {
        Ok(*self * rhs.recip()?)
    }

    /// The valuation `v_w(y)`, or `None` (read: plus infinity) for y = 0.
    ///
    /// At a finite place this is the multiplicity of `w` in `num` minus its
    /// multiplicity in `den`; at infinity it is `deg den - deg num`.
    pub fn valuation(&self, place: &Place) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let v = match place {
            Place::Infinity => {
                i64::from(self.den.degree().expect("nonzero"))
                    - i64::from(self.num.degree().expect("nonzero"))
            }
            Place::Finite(w) => {
                if *w == BinaryPoly::T {
                    // trailing-zero fast path for the most common place
                    i64::from(self.num.t_valuation().expect("nonzero"))
                        - i64::from(self.den.t_valuation().expect("nonzero"))
                } else {
                    i64::from(multiplicity(self.num, *w)) - i64::from(multiplicity(self.den, *w))
                }
            }
        };
        Some(v)
    }

    /// log2 of the naive height: `max(deg num, deg den)` for reduced y.
    pub fn height_exponent(&self) -> u32 {
        let dn = self.num.degree().unwrap_or(0);
        let dd = self.den.degree().expect("den nonzero");
        dn.max(dd)
    }

    /// The naive height `H(y) = prod_w max(1, |y|_w)`, always a power of 2.
    pub fn height(&self) -> u128 {
        1u128 << self.height_exponent()
    }

    /// Places where y has a pole, with orders: the factors of `den`, plus
    /// infinity when `deg num > deg den`. Finite places come first in
    /// ascending order, then infinity.
    pub fn poles(&self) -> Vec<(Place, u32)> {
        let mut out = Vec::new();
        if self.is_zero() {
            return out;
        }
        if !self.den.is_one() {
            for (w, mult) in gf2poly::factor(self.den).expect("den nonzero") {
                out.push((Place::Finite(w), mult));
            }
        }
        let dn = self.num.degree().expect("nonzero");
        let dd = self.den.degree().expect("nonzero");
        if dn > dd {
            out.push((Place::Infinity, dn - dd));
        }
        out
    }
}

fn multiplicity(p: BinaryPoly, w: BinaryPoly) -> u32 {
    let mut mult = 0;
    let mut rem = p;
    loop {
        let (q, r) = rem.divmod(w).expect("place polynomial nonzero");
        if !r.is_zero() {
            return mult;
        }
        rem = q;
        mult += 1;
    }
}

impl std::ops::Add for RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: RatFunc) -> RatFunc {
        RatFunc::new(self.num * rhs.den + rhs.num * self.den, self.den * rhs.den)
            .expect("denominators nonzero")
    }
}

impl std::ops::Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::ZERO;
        }
        // Cross-reduce before multiplying to keep degrees down.
        let g1 = self.num.gcd(rhs.den).expect("nonzero");
        let g2 = rhs.num.gcd(self.den).expect("nonzero");
        let n1 = self.num.divmod(g1).expect("nonzero").0;
        let d2 = rhs.den.divmod(g1).expect("nonzero").0;
        let n2 = rhs.num.divmod(g2).expect("nonzero").0;
        let d1 = self.den.divmod(g2).expect("nonzero").0;
        RatFunc {
            num: n1 * n2,
            den: d1 * d2,
        }
    }
}

impl From<BinaryPoly> for RatFunc {
    fn from(p: BinaryPoly) -> RatFunc {
        RatFunc {
            num: p,
            den: BinaryPoly::ONE,
        }
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for RatFunc {
    type Err = FuncFieldError;

    fn from_str(s: &str) -> Result<RatFunc, FuncFieldError> {
        match s.find('/') {
            None => Ok(RatFunc::from(s.parse::<BinaryPoly>()?)),
            Some(pos) => {
                if s[pos + 1..].contains('/') {
                    return Err(FuncFieldError::Parse(ParsePolyError {
                        pos: pos + 1 + s[pos + 1..].find('/').unwrap(),
                        msg: "more than one '/'",
                    }));
                }
                let num: BinaryPoly = s[..pos].parse()?;
                let den: BinaryPoly =
                    s[pos + 1..]
                        .parse()
                        .map_err(|e: ParsePolyError| ParsePolyError {
                            pos: e.pos + pos + 1,
                            msg: e.msg,
                        })?;
                RatFunc::new(num, den)
            }
        }
    }
}

/// One enumeration slice: a fixed denominator and the numerator bit range
/// that pairs with it at height `2^m`. Slices partition the height-`2^m`
/// candidates, so they can be handed to parallel workers independently;
/// only the coprime pairs in the range are actual field elements.
#[derive(Debug, Clone)]
pub struct HeightSlice {
    pub m: u32,
    pub den: BinaryPoly,
    pub num_bits: std::ops::Range<u128>,
}

impl HeightSlice {
    /// The reduced rational functions in this slice, in numerator order.
    pub fn iter(&self) -> impl Iterator<Item = RatFunc> + '_ {
        let den = self.den;
        self.num_bits.clone().filter_map(move |bits| {
            let num = BinaryPoly::from_bits(bits);
            if num.is_zero() {
                if den.is_one() {
                    Some(RatFunc::ZERO)
                } else {
                    None
                }
            } else if num.gcd(den).expect("den nonzero").is_one() {
                Some(RatFunc::from_coprime(num, den))
            } else {
                None
            }
        })
    }
}

/// Slices covering every y with `H(y) = 2^m` exactly once, denominators
/// ascending by (degree, bit pattern).
pub fn height_slices(m: u32) -> Vec<HeightSlice> {
    assert!(m < 60, "height exponent out of desk range");
    let mut slices = Vec::new();
    if m == 0 {
        slices.push(HeightSlice {
            m,
            den: BinaryPoly::ONE,
            num_bits: 0..2,
        });
        return slices;
    }
    // deg den < m: numerator must have degree exactly m.
    for den_bits in 1..(1u128 << m) {
        slices.push(HeightSlice {
            m,
            den: BinaryPoly::from_bits(den_bits),
            num_bits: (1u128 << m)..(1u128 << (m + 1)),
        });
    }
    // deg den = m: any numerator of degree <= m (zero included; the
    // coprimality filter removes it whenever den != 1).
    for den_bits in (1u128 << m)..(1u128 << (m + 1)) {
        slices.push(HeightSlice {
            m,
            den: BinaryPoly::from_bits(den_bits),
            num_bits: 0..(1u128 << (m + 1)),
        });
    }
    slices
}

/// Every y in K with `H(y) = 2^m`, exactly once, in deterministic order.
pub fn enumerate_by_height(m: u32) -> impl Iterator<Item = RatFunc> {
    height_slices(m).into_iter().flat_map(|slice| {
        let items: Vec<RatFunc> = slice.iter().collect();
        items.into_iter()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(s: &str) -> RatFunc {
        s.parse().unwrap()
    }

    fn place(s: &str) -> Place {
        s.parse().unwrap()
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(y("t").valuation(&place("t")), Some(1));
        assert_eq!(y("t").valuation(&Place::Infinity), Some(-1));
        assert_eq!(y("1/t^2+1").valuation(&place("t+1")), Some(-2));
        assert_eq!(RatFunc::ZERO.valuation(&place("t")), None);
    }

    #[test]
    fn reduction_to_lowest_terms() {
        // t^3+t = t(t+1)^2 and t^2+t = t(t+1) share the factor t(t+1).
        let raw = RatFunc::new("t^3+t".parse().unwrap(), "t^2+t".parse().unwrap()).unwrap();
        assert_eq!(raw, y("t+1"));
        assert!(RatFunc::new(BinaryPoly::ZERO, BinaryPoly::ZERO).is_err());
        assert_eq!(
            RatFunc::new(BinaryPoly::ZERO, BinaryPoly::T).unwrap(),
            RatFunc::ZERO
        );
    }

    /// Height recomputed the adelic way: the product of max(1, |y|_w) over
    /// the poles (all other places contribute 1).
    fn adelic_height(v: &RatFunc) -> u128 {
        let mut exp: i64 = 0;
        for (place, _) in v.poles() {
            let val = v.valuation(&place).unwrap();
            assert!(val < 0);
            exp += i64::from(place.degree()) * (-val);
        }
        1u128 << exp
    }

    #[test]
    fn height_examples() {
        assert_eq!(RatFunc::ZERO.height(), 1);
        assert_eq!(y("t/t+1").height(), 2);
        assert_eq!(y("t^2+1").height(), 4);
        for s in ["t/t+1", "t^2+1", "t^3+t+1/t^5+t^2", "1/t^4"] {
            let v = y(s);
            assert_eq!(v.height(), adelic_height(&v), "adelic mismatch for {v}");
        }
    }

    #[test]
    fn poles_examples() {
        assert_eq!(y("t").poles(), vec![(Place::Infinity, 1)]);
        assert_eq!(y("1/t^2+1").poles(), vec![(place("t+1"), 2)]);
        assert!(RatFunc::ONE.poles().is_empty());
    }

    #[test]
    fn enumeration_smallest_heights() {
        let m0: Vec<RatFunc> = enumerate_by_height(0).collect();
        assert_eq!(m0, vec![RatFunc::ZERO, RatFunc::ONE]);

        let m1: Vec<RatFunc> = enumerate_by_height(1).collect();
        assert_eq!(m1.len(), 6);
        for expect in ["t", "t+1", "1/t", "1/t+1", "t/t+1", "t+1/t"] {
            assert!(m1.contains(&y(expect)), "missing {expect}");
        }
    }

    #[test]
    fn enumeration_matches_brute_force_pair_scan() {
        for m in 0..=10u32 {
            let listed: Vec<RatFunc> = enumerate_by_height(m).collect();
            // no duplicates
            let mut dedup = listed.clone();
            dedup.sort_by_key(|v| (v.den().bits(), v.num().bits()));
            dedup.dedup();
            assert_eq!(dedup.len(), listed.len());
            // independent double loop over all pairs
            let mut count = 0u64;
            for den in 1..(1u128 << (m + 1)) {
                for num in 0..(1u128 << (m + 1)) {
                    let (num, den) = (BinaryPoly::from_bits(num), BinaryPoly::from_bits(den));
                    let max_deg = num.degree().unwrap_or(0).max(den.degree().unwrap());
                    if max_deg != m {
                        continue;
                    }
                    let coprime = if num.is_zero() {
                        den.is_one()
                    } else {
                        num.gcd(den).unwrap().is_one()
                    };
                    if coprime {
                        count += 1;
                    }
                }
            }
            assert_eq!(
                listed.len() as u64,
                count,
                "cardinality mismatch at m = {m}"
            );
            for v in &listed {
                assert_eq!(v.height_exponent(), m);
            }
        }
    }

    #[test]
    fn product_formula() {
        // sum over all places of deg(w) * v_w(y) vanishes for y != 0.
        for s in [
            "t",
            "t^3+t+1/t^2+t",
            "t+1/t^6+t^4+1",
            "t^2+t+1",
            "1/t^5+t^3",
        ] {
            let v = y(s);
            let mut total: i64 = 0;
            let mut seen = std::collections::BTreeSet::new();
            for p in [v.num(), v.den()] {
                for (w, _) in gf2poly::factor(p).unwrap() {
                    seen.insert(w);
                }
            }
            for w in seen {
                let place = Place::Finite(w);
                total += i64::from(place.degree()) * v.valuation(&place).unwrap();
            }
            total += v.valuation(&Place::Infinity).unwrap();
            assert_eq!(total, 0, "product formula fails for {v}");
        }
    }

    #[test]
    fn place_parsing() {
        assert_eq!(place("inf"), Place::Infinity);
        assert_eq!(place("t^2+t+1"), Place::Finite("t^2+t+1".parse().unwrap()));
        assert!("t^2+1".parse::<Place>().is_err());
        assert_eq!(place("t^2+t+1").degree(), 2);
        assert_eq!(Place::Infinity.degree(), 1);
    }

    #[test]
    fn ratfunc_parse_display_roundtrip() {
        for s in ["0", "1", "t", "t/t+1", "1/t^2+t+1", "t^5+t^2/t^3+t"] {
            let v = y(s);
            assert_eq!(y(&v.to_string()), v);
        }
        assert!("t/0".parse::<RatFunc>().is_err());
        assert!("t/t/t".parse::<RatFunc>().is_err());
    }
}

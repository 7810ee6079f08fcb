//! The height zeta function `Z(s)` as an exact power series in `u = 2^(-s)`.
//!
//! `Z(s) = sum_M N(2^M) u^M` factors as `4 * F_t * F_inf * prod_w F_w` over
//! the finite places `w != t`. The factor at t and at infinity is
//! `(1/2)(1-u)/(1-2u)`; at a finite place of degree d it is a rational
//! function in `u^d` with `F_w = 1 + O(u^d)`, so only degrees below the
//! truncation order ever matter, and places of equal degree share a factor,
//! which gets raised to the number of irreducibles of that degree.
//!
//! All arithmetic is exact: the point of this module is to produce the very
//! integers the census must reproduce. Two printed forms of the local
//! factor circulate; both are constructed and checked equal, not trusted.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::funcfield::Place;
use crate::gf2poly::{self, BinaryPoly};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `2^-d` as an exact rational.
fn two_pow_neg(d: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2u8).pow(d))
}

/// A power series truncated mod `u^order`, with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSeries {
    coeffs: Vec<BigRational>,
}

impl IntSeries {
    pub fn zero(order: usize) -> IntSeries {
        IntSeries {
            coeffs: vec![BigRational::zero(); order],
        }
    }

    pub fn one(order: usize) -> IntSeries {
        let mut s = IntSeries::zero(order);
        s.coeffs[0] = BigRational::one();
        s
    }

    /// Series from low-order coefficients, truncated or zero-padded to `order`.
    pub fn from_coeffs(mut coeffs: Vec<BigRational>, order: usize) -> IntSeries {
        coeffs.resize(order, BigRational::zero());
        IntSeries { coeffs }
    }

    /// Truncation order (exclusive exponent bound).
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Truncate to a lower order.
    pub fn truncated(&self, order: usize) -> IntSeries {
        assert!(order <= self.order());
        IntSeries {
            coeffs: self.coeffs[..order].to_vec(),
        }
    }

    pub fn add(&self, rhs: &IntSeries) -> IntSeries {
        let order = self.order().min(rhs.order());
        let coeffs = (0..order)
            .map(|i| &self.coeffs[i] + &rhs.coeffs[i])
            .collect();
        IntSeries { coeffs }
    }

    pub fn mul(&self, rhs: &IntSeries) -> IntSeries {
        let order = self.order().min(rhs.order());
        let mut coeffs = vec![BigRational::zero(); order];
        for (i, a) in self.coeffs.iter().take(order).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(order - i).enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        IntSeries { coeffs }
    }

    pub fn pow(&self, mut exp: u64) -> IntSeries {
        let mut base = self.clone();
        let mut acc = IntSeries::one(self.order());
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Inverse series by Newton iteration `b <- b(2 - ab)`, doubling the
    /// correct order each round. Needs a unit constant term.
    pub fn inverse(&self) -> IntSeries {
        let order = self.order();
        assert!(
            order >= 1 && !self.coeffs[0].is_zero(),
            "series inverse needs a unit"
        );
        let mut b = IntSeries::from_coeffs(vec![self.coeffs[0].recip()], 1);
        let mut k = 1usize;
        while k < order {
            k = (2 * k).min(order);
            let a = self.truncated(k);
            let bk = IntSeries::from_coeffs(b.coeffs, k);
            let ab = a.mul(&bk);
            let mut two_minus_ab = IntSeries::zero(k);
            two_minus_ab.coeffs[0] = rat(2, 1) - &ab.coeffs[0];
            for i in 1..k {
                two_minus_ab.coeffs[i] = -&ab.coeffs[i];
            }
            b = bk.mul(&two_minus_ab);
        }
        b
    }

    pub fn scaled(&self, factor: &BigRational) -> IntSeries {
        IntSeries {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }
}

/// A rational function in `u` with exact coefficients: `num / den` as
/// coefficient lists, constant term of `den` nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFn {
    pub num: Vec<BigRational>,
    pub den: Vec<BigRational>,
}

impl RationalFn {
    pub fn to_series(&self, order: usize) -> IntSeries {
        let num = IntSeries::from_coeffs(self.num.clone(), order);
        let den = IntSeries::from_coeffs(self.den.clone(), order);
        num.mul(&den.inverse())
    }

    /// Exact evaluation at a point where the denominator does not vanish.
    pub fn eval(&self, u: &BigRational) -> BigRational {
        let horner = |p: &[BigRational]| {
            p.iter()
                .rev()
                .fold(BigRational::zero(), |acc, c| acc * u + c)
        };
        let den = horner(&self.den);
        assert!(!den.is_zero(), "rational function evaluated at a pole");
        horner(&self.num) / den
    }

    /// Equality as rational functions (cross-multiplication).
    pub fn equivalent(&self, rhs: &RationalFn) -> bool {
        poly_mul(&self.num, &rhs.den) == poly_mul(&rhs.num, &self.den)
    }
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    while out.len() > 1 && out.last().map_or(false, |c| c.is_zero()) {
        out.pop();
    }
    out
}

fn poly_add(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

fn poly_scale(a: &[BigRational], s: &BigRational) -> Vec<BigRational> {
    a.iter().map(|c| c * s).collect()
}

/// `(2u)^d` as a coefficient list.
fn two_u_pow(d: u32) -> Vec<BigRational> {
    let mut v = vec![BigRational::zero(); d as usize + 1];
    v[d as usize] = BigRational::from_integer(BigInt::from(2u8).pow(d));
    v
}

/// The local Euler factor of `Z` at one place.
#[derive(Debug, Clone)]
pub struct LocalFactor {
    pub place_degree: u32,
    pub func: RationalFn,
}

/// The two displayed forms of the transform at a finite place `w != t`,
/// both over the common denominator `1 - (2u)^d`. They are asserted equal
/// whenever a factor is built; `local_factor_forms` exposes them so tests
/// can state that equality explicitly.
pub fn local_factor_forms(d: u32) -> (RationalFn, RationalFn) {
    let one = vec![BigRational::one()];
    let half = rat(1, 2);
    let a = two_u_pow(d); // (2u)^d
    let a2 = poly_mul(&a, &a); // (2u)^(2d)
    let mut den = vec![BigRational::zero(); d as usize + 1];
    den[0] = BigRational::one();
    den[d as usize] = rat(-1, 1) * a[d as usize].clone();
    // u^d = 2^-d (2u)^d
    let u_pow_d = poly_scale(&a, &two_pow_neg(d));

    // Form 1: 1 + (1/2) [ (2u)^d (1 + (1-2^-d)(2u)^d/(1-(2u)^d)) - 2 u^d ]
    let inner = poly_add(
        &poly_mul(&a, &den),
        &poly_scale(&a2, &(BigRational::one() - two_pow_neg(d))),
    );
    let bracket = poly_add(&inner, &poly_scale(&poly_mul(&u_pow_d, &den), &rat(-2, 1)));
    let num1 = poly_add(&den, &poly_scale(&bracket, &half));

    // Form 2: 1 + (1/2)(2u)^d (1 - 2^(1-d) + (1-2^-d)(2u)^d/(1-(2u)^d))
    let lead = BigRational::one() - two_pow_neg(d) * rat(2, 1);
    let inner = poly_add(
        &poly_scale(&poly_mul(&a, &den), &lead),
        &poly_scale(&a2, &(BigRational::one() - two_pow_neg(d))),
    );
    let num2 = poly_add(&poly_mul(&one, &den), &poly_scale(&inner, &half));

    (
        RationalFn {
            num: num1,
            den: den.clone(),
        },
        RationalFn { num: num2, den },
    )
}

/// The Euler factor at a place: `(1/2)(1-u)/(1-2u)` at t and at infinity,
/// and the degree-d transform everywhere else.
pub fn local_factor(place: &Place) -> LocalFactor {
    match place {
        Place::Infinity => LocalFactor {
            place_degree: 1,
            func: RationalFn {
                num: vec![rat(1, 2), rat(-1, 2)],
                den: vec![rat(1, 1), rat(-2, 1)],
            },
        },
        Place::Finite(w) if *w == BinaryPoly::T => LocalFactor {
            place_degree: 1,
            func: RationalFn {
                num: vec![rat(1, 2), rat(-1, 2)],
                den: vec![rat(1, 1), rat(-2, 1)],
            },
        },
        Place::Finite(w) => {
            let d = w.degree().expect("finite place is nonconstant");
            LocalFactor {
                place_degree: d,
                func: checked_degree_factor(d),
            }
        }
    }
}

/// Build the degree-d factor from both printed forms and insist they agree.
fn checked_degree_factor(d: u32) -> RationalFn {
    let (form1, form2) = local_factor_forms(d);
    assert!(
        form1.equivalent(&form2),
        "the two displayed local-factor forms disagree at degree {d}"
    );
    form2
}

/// `Z(s)` as a series in `u` mod `u^order`:
/// `4 * F_t * F_inf * prod_{finite w != t} F_w`, grouping places by degree.
pub fn z_series(order: usize) -> IntSeries {
    assert!(order >= 1);
    let degree_one = local_factor(&Place::Infinity).func.to_series(order);
    let mut z = degree_one.mul(&degree_one).scaled(&rat(4, 1));
    for d in 1..order as u32 {
        // the place t is one of the two degree-1 irreducibles and has its
        // own factor already
        let count = gf2poly::irreducible_count(d) - u64::from(d == 1);
        if count == 0 {
            continue;
        }
        let factor = checked_degree_factor(d).to_series(order);
        z = z.mul(&factor.pow(count));
    }
    z
}

/// The `Z` coefficients as the counts they are: nonnegative integers.
pub fn z_counts(order: usize) -> Vec<BigUint> {
    z_series(order)
        .coeffs()
        .iter()
        .map(|c| {
            assert!(c.is_integer(), "Z coefficient is not an integer: {c}");
            assert!(!c.is_negative(), "Z coefficient is negative: {c}");
            c.to_integer().to_biguint().expect("nonnegative")
        })
        .collect()
}

/// Zeta of the function field as a series in u: `1/((1-u)(1-2u))`.
pub fn zeta_series(order: usize) -> IntSeries {
    RationalFn {
        num: vec![BigRational::one()],
        den: vec![rat(1, 1), rat(-3, 1), rat(2, 1)],
    }
    .to_series(order)
}

/// The same zeta, assembled the defining way: the product over all places
/// of degree < order of `1/(1 - u^deg)`, the infinite place included among
/// the degree-1 ones. Cross-check for [`zeta_series`].
pub fn zeta_series_from_places(order: usize) -> IntSeries {
    let mut acc = IntSeries::one(order);
    for d in 1..order as u32 {
        let mut den = vec![BigRational::zero(); d as usize + 1];
        den[0] = BigRational::one();
        den[d as usize] = rat(-1, 1);
        let factor = IntSeries::from_coeffs(den, order).inverse();
        let places = gf2poly::irreducible_count(d) + u64::from(d == 1);
        acc = acc.mul(&factor.pow(places));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcfield::Place;

    fn place(s: &str) -> Place {
        s.parse().unwrap()
    }

    #[test]
    fn factor_at_t_is_half_zeta_ratio() {
        let f = local_factor(&place("t"));
        // (1/2)(1-u)/(1-2u) = 1/2 + u/2 + u^2 + 2u^3 + ...
        let s = f.func.to_series(5);
        assert_eq!(*s.coeff(0), rat(1, 2));
        assert_eq!(*s.coeff(1), rat(1, 2));
        assert_eq!(*s.coeff(2), rat(1, 1));
        assert_eq!(*s.coeff(3), rat(2, 1));
        // value at u = 1/4, i.e. s = 2: the local constant 3/4
        assert_eq!(f.func.eval(&rat(1, 4)), rat(3, 4));
    }

    #[test]
    fn degree_one_factor_series() {
        // F at t+1: 1 + u^2/(1-2u) = 1 + u^2 + 2u^3 + 4u^4 + ...
        let f = local_factor(&place("t+1"));
        let s = f.func.to_series(6);
        let expect = [
            rat(1, 1),
            rat(0, 1),
            rat(1, 1),
            rat(2, 1),
            rat(4, 1),
            rat(8, 1),
        ];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(s.coeff(i), e, "coefficient {i}");
        }
    }

    #[test]
    fn displayed_forms_agree_up_to_degree_eight() {
        for d in 1..=8 {
            let (f1, f2) = local_factor_forms(d);
            assert!(f1.equivalent(&f2), "forms differ at degree {d}");
        }
    }

    #[test]
    fn z_series_anchors() {
        let z = z_counts(6);
        assert_eq!(z[0], 1u32.into());
        assert_eq!(z[1], 2u32.into());
    }

    #[test]
    fn z_coefficients_are_nonnegative_integers() {
        // z_counts itself asserts integrality and nonnegativity
        let z = z_counts(17);
        assert_eq!(z.len(), 17);
    }

    #[test]
    fn truncation_ignores_high_degree_places() {
        // dropping every factor of degree >= d0 changes nothing below u^d0
        let full = z_series(9);
        let d0 = 4usize;
        let degree_one = local_factor(&Place::Infinity).func.to_series(9);
        let mut partial = degree_one.mul(&degree_one).scaled(&rat(4, 1));
        for d in 1..d0 as u32 {
            let count = gf2poly::irreducible_count(d) - u64::from(d == 1);
            let factor = checked_degree_factor(d).to_series(9);
            partial = partial.mul(&factor.pow(count));
        }
        for i in 0..d0 {
            assert_eq!(full.coeff(i), partial.coeff(i), "coefficient {i}");
        }
    }

    #[test]
    fn grouping_by_degree_matches_place_by_place() {
        let order = 7;
        let degree_one = local_factor(&Place::Infinity).func.to_series(order);
        let mut by_place = degree_one.mul(&degree_one).scaled(&rat(4, 1));
        for d in 1..order as u32 {
            for w in gf2poly::irreducibles(d).iter() {
                if *w == crate::gf2poly::BinaryPoly::T {
                    continue;
                }
                let f = local_factor(&Place::Finite(*w)).func.to_series(order);
                by_place = by_place.mul(&f);
            }
        }
        assert_eq!(by_place, z_series(order));
    }

    #[test]
    fn zeta_coefficients_closed_form() {
        let z = zeta_series(12);
        for n in 0..12u32 {
            let expect = BigRational::from_integer(BigInt::from((1u64 << (n + 1)) - 1));
            assert_eq!(*z.coeff(n as usize), expect, "coefficient {n}");
        }
        assert_eq!(*zeta_series(1).coeff(0), BigRational::one());
    }

    #[test]
    fn zeta_place_product_matches_closed_form() {
        for order in [5usize, 10, 13] {
            assert_eq!(zeta_series_from_places(order), zeta_series(order));
        }
    }

    #[test]
    fn series_inverse_roundtrip() {
        let s = RationalFn {
            num: vec![rat(3, 1), rat(1, 2)],
            den: vec![rat(1, 1), rat(-1, 1), rat(5, 1)],
        }
        .to_series(10);
        let prod = s.mul(&s.inverse());
        assert_eq!(prod, IntSeries::one(10));
    }
}

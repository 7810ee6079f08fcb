//! Serre's characteristic-2 local symbol `[y, t)_w` and the solubility
//! predicates for the conic `x0^2 + x0*x1 + y*x1^2 = t*x2^2`.
//!
//! One uniform algorithm at every place: the symbol is the GF(2)-trace of
//! the residue of the differential `y dt/t` at (one geometric point above)
//! the place. Concretely, at a finite place with chosen root `a`, this is
//! `Tr(c_-1)` for the Laurent coefficient `c_-1` of `y(t)/t` at `t = a`;
//! at infinity, with `s = 1/t`, `dt/t = ds/s`, so the residue is the
//! coefficient of `s^0` in the expansion of `y`. The conic has a point over
//! the completion exactly when the symbol vanishes.
//!
//! The per-place case criteria (constant coefficient at the two degree-1
//! places, automatic solubility at places of good reduction, insolubility
//! of `w^-n` at `w`) are exercised as test vectors rather than coded as
//! branches; only cheap fast paths short-circuit the full residue.

use std::fmt;

use thiserror::Error;

use crate::extfield::{self, ExtElem, LaurentSeries};
use crate::funcfield::{Place, RatFunc};
use crate::gf2poly::{self, BinaryPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolError {
    #[error("principal-part measures are not defined at the place t")]
    PlaceT,
    #[error("principal-part measures need a finite place")]
    InfinitePlace,
    #[error("principal-part order k must be at least 1")]
    OrderZero,
}

/// An element of Z/2Z: the value of the local symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymbolValue(pub bool);

impl SymbolValue {
    pub const ZERO: SymbolValue = SymbolValue(false);
    pub const ONE: SymbolValue = SymbolValue(true);

    pub fn bit(self) -> u8 {
        u8::from(self.0)
    }

    pub fn is_zero(self) -> bool {
        !self.0
    }
}

impl std::ops::Add for SymbolValue {
    type Output = SymbolValue;
    fn add(self, rhs: SymbolValue) -> SymbolValue {
        SymbolValue(self.0 ^ rhs.0)
    }
}

impl fmt::Display for SymbolValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// Precomputed residue machinery for a fixed denominator at a fixed finite
/// place: everything about `num/den` except the numerator.
///
/// Writing `q = t * den` and expanding at the root `a`, `q = e^m * (unit)`;
/// the kernel stores the first `m` coefficients of `1/unit`. The residue of
/// `num/q` is then the coefficient of `e^(m-1)` in (expansion of `num`) *
/// (kernel), a short convolution of Hasse-derivative evaluations. Reusing
/// the kernel across numerators is what makes the exhaustive census cheap.
pub struct ResidueKernel {
    alpha: ExtElem,
    order: usize,
    kernel: Vec<BinaryPoly>,
}

impl ResidueKernel {
    /// Kernel for the canonical root of `omega` (the class of x).
    pub fn new(den: BinaryPoly, omega: BinaryPoly) -> ResidueKernel {
        ResidueKernel::with_root(den, ExtElem::new(omega, BinaryPoly::T))
    }

    /// Kernel at an explicit root (any Frobenius conjugate of the canonical
    /// one; the traced symbol is the same for each, which tests verify).
    pub fn with_root(den: BinaryPoly, alpha: ExtElem) -> ResidueKernel {
        assert!(!den.is_zero());
        let q = BinaryPoly::T * den;
        let expansion = extfield::poly_expansion(q, alpha);
        let order = expansion
            .iter()
            .position(|c| !c.is_zero())
            .expect("t * den is a nonzero polynomial");
        let kernel = if order == 0 {
            Vec::new()
        } else {
            let modulus = alpha.modulus();
            let mut unit: Vec<BinaryPoly> =
                expansion[order..].iter().copied().take(order).collect();
            unit.resize(order, BinaryPoly::ZERO);
            let series = LaurentSeries::from_coeffs(modulus, 0, unit, order as i64);
            let inv = series.inverse().expect("unit series");
            (0..order as i64)
                .map(|e| inv.coeff(e).expect("within precision").rep())
                .collect()
        };
        ResidueKernel {
            alpha,
            order,
            kernel,
        }
    }

    /// Pole order of `1/(t * den)` at the root.
    pub fn order(&self) -> usize {
        self.order
    }

    /// The Laurent coefficient `c_-1` of `num / (t * den)` at the root.
    pub fn residue_of_numerator(&self, num: BinaryPoly) -> ExtElem {
        let modulus = self.alpha.modulus();
        let mut acc = ExtElem::zero(modulus);
        for j in 0..self.order {
            let kern = self.kernel[self.order - 1 - j];
            if kern.is_zero() {
                continue;
            }
            let h = num.hasse_derivative(j as u32);
            if h.is_zero() {
                continue;
            }
            let val = extfield::eval_poly(h, self.alpha);
            acc = acc + val * ExtElem::new(modulus, kern);
        }
        acc
    }

    pub fn symbol_of_numerator(&self, num: BinaryPoly) -> SymbolValue {
        SymbolValue(self.residue_of_numerator(num).trace())
    }
}

/// The residue whose trace is the local symbol: `c_-1` of `y dt/t` in the
/// local parameter. At infinity this is the coefficient `a_0`, packaged as
/// an element of GF(2).
pub fn local_residue(y: &RatFunc, place: &Place) -> ExtElem {
    match place {
        Place::Finite(w) => {
            if y.is_zero() {
                return ExtElem::zero(*w);
            }
            ResidueKernel::new(y.den(), *w).residue_of_numerator(y.num())
        }
        Place::Infinity => {
            let bit = constant_coefficient_at_infinity(y);
            ExtElem::new(
                extfield::GF2_MODULUS,
                if bit {
                    BinaryPoly::ONE
                } else {
                    BinaryPoly::ZERO
                },
            )
        }
    }
}

/// The local symbol `[y, t)_w` as an element of Z/2Z.
pub fn local_symbol(y: &RatFunc, place: &Place) -> SymbolValue {
    SymbolValue(local_residue(y, place).trace())
}

/// Coefficient `a_0` of the expansion of `y` at the place t, over GF(2).
/// Word-level fast path equivalent to the finite-place residue at t.
fn constant_coefficient_at_t(y: &RatFunc) -> bool {
    if y.is_zero() {
        return false;
    }
    let a = y.num().t_valuation().expect("nonzero");
    let b = y.den().t_valuation().expect("den nonzero");
    if a > b {
        return false;
    }
    let k = b - a;
    let num_unit = BinaryPoly::from_bits(y.num().bits() >> a);
    let den_unit = BinaryPoly::from_bits(y.den().bits() >> b);
    num_unit.series_quot_coeff(den_unit, k)
}

/// Coefficient `a_0` of the expansion of `y` at infinity, over GF(2).
fn constant_coefficient_at_infinity(y: &RatFunc) -> bool {
    if y.is_zero() {
        return false;
    }
    let dn = y.num().degree().expect("nonzero");
    let dd = y.den().degree().expect("den nonzero");
    if dn < dd {
        return false;
    }
    let k = dn - dd;
    // p(1/s) * s^deg p reverses the coefficients; both reversals have unit
    // constant term, so this is an ordinary power series quotient in s.
    y.num()
        .reversed(dn)
        .series_quot_coeff(y.den().reversed(dd), k)
}

/// Whether the conic `C_y` has a point over the completion at `place`.
///
/// Fast paths: at the two degree-1 places t and infinity the criterion is
/// the constant expansion coefficient; elsewhere good reduction (no pole)
/// is automatically soluble and only poles fall through to the residue.
pub fn locally_soluble(y: &RatFunc, place: &Place) -> bool {
    match place {
        Place::Finite(w) if *w == BinaryPoly::T => !constant_coefficient_at_t(y),
        Place::Infinity => !constant_coefficient_at_infinity(y),
        Place::Finite(w) => {
            if y.is_zero() || !y.den().rem(*w).is_zero() {
                // v_w(y) >= 0: good reduction
                true
            } else {
                local_symbol(y, place).is_zero()
            }
        }
    }
}

/// Whether the conic `C_y` has a K-rational point (Hasse principle over the
/// finitely many places that can obstruct: t, infinity, and the poles).
pub fn globally_soluble(y: &RatFunc) -> bool {
    if constant_coefficient_at_t(y) || constant_coefficient_at_infinity(y) {
        return false;
    }
    if y.is_zero() || y.den().is_one() {
        return true;
    }
    // Finite poles in ascending (degree, pattern) order: the cheap residue
    // fields are consulted first.
    for (w, _) in gf2poly::factor(y.den()).expect("den nonzero") {
        if w == BinaryPoly::T {
            continue;
        }
        if !ResidueKernel::new(y.den(), w)
            .symbol_of_numerator(y.num())
            .is_zero()
        {
            return false;
        }
    }
    true
}

/// The places at which solubility of `C_y` is not automatic: t, infinity,
/// and the poles of y. The symbol vanishes everywhere else.
pub fn relevant_places(y: &RatFunc) -> Vec<Place> {
    let mut places = vec![Place::Finite(BinaryPoly::T), Place::Infinity];
    for (place, _) in y.poles() {
        if !places.contains(&place) {
            places.push(place);
        }
    }
    places
}

/// Sum of the local symbols over the relevant places; zero for every global
/// y by reciprocity.
pub fn reciprocity_sum(y: &RatFunc) -> SymbolValue {
    relevant_places(y)
        .iter()
        .fold(SymbolValue::ZERO, |acc, place| acc + local_symbol(y, place))
}

/// Count the soluble principal parts of valuation exactly -k at a finite
/// place other than t.
///
/// Principal parts are `p = sum_{j=1..k} c_j(t) w^-j` with polynomial digits
/// `deg c_j < deg w` and `c_k != 0`. Each coset `p + O_w` has Haar measure 1
/// and solubility is constant on it, so the returned `(soluble, total)` are
/// exactly the measures of the soluble and full fibres `v_w = -k`.
pub fn soluble_principal_parts(place: &Place, k: u32) -> Result<(u64, u64), SymbolError> {
    let Place::Finite(w) = place else {
        return Err(SymbolError::InfinitePlace);
    };
    if *w == BinaryPoly::T {
        return Err(SymbolError::PlaceT);
    }
    if k == 0 {
        return Err(SymbolError::OrderZero);
    }
    let d = w.degree().expect("finite place is nonconstant");
    assert!(
        u64::from(k) * u64::from(d) <= 24,
        "principal-part enumeration is exponential in k * deg w"
    );
    let den = w.pow(k);
    let kernel = ResidueKernel::new(den, *w);
    let digits = 1u64 << d;
    let mut soluble = 0u64;
    let mut total = 0u64;
    // Numerator of p over w^k: digits c_1..c_k with c_k a unit digit; the
    // numerator is automatically coprime to w.
    let mut stack = vec![BinaryPoly::ZERO];
    for _ in 1..k {
        let mut next = Vec::with_capacity(stack.len() * digits as usize);
        for prefix in stack {
            for c in 0..digits {
                next.push(prefix * *w + BinaryPoly::from_bits(u128::from(c)));
            }
        }
        stack = next;
    }
    for prefix in stack {
        for c in 1..digits {
            let num = prefix * *w + BinaryPoly::from_bits(u128::from(c));
            total += 1;
            if kernel.symbol_of_numerator(num).is_zero() {
                soluble += 1;
            }
        }
    }
    debug_assert_eq!(total, (1u64 << (d * k)) - (1u64 << (d * (k - 1))));
    Ok((soluble, total))
}

/// The measures predicted for the fibre `v_w = -k`: `(2^(d-1) - 1, 2^d - 1)`
/// at k = 1 and exactly half the fibre for k >= 2.
pub fn principal_part_prediction(d: u32, k: u32) -> (u64, u64) {
    let total = (1u64 << (d * k)) - (1u64 << (d * (k - 1)));
    if k == 1 {
        ((1u64 << (d - 1)) - 1, total)
    } else {
        (total / 2, total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn y(s: &str) -> RatFunc {
        s.parse().unwrap()
    }

    fn place(s: &str) -> Place {
        s.parse().unwrap()
    }

    #[test]
    fn symbol_examples() {
        assert_eq!(local_symbol(&y("1/t+1"), &place("t+1")), SymbolValue::ONE);
        assert_eq!(local_symbol(&y("t+1"), &place("t")), SymbolValue::ONE);
        for pl in [place("t"), place("t+1"), place("t^2+t+1"), Place::Infinity] {
            assert_eq!(local_symbol(&RatFunc::ZERO, &pl), SymbolValue::ZERO);
        }
        assert_eq!(
            local_symbol(&y("1/t^2+t+1"), &place("t^2+t+1")),
            SymbolValue::ONE
        );
    }

    #[test]
    fn residue_of_inverse_place_is_inverse_root() {
        // c_-1 of (1/w)/t at the root a is 1/(a * w'(a)); for w = t^2+t+1
        // the derivative is 1 and 1/a = a^2.
        let w: BinaryPoly = "t^2+t+1".parse().unwrap();
        let res = local_residue(&y("1/t^2+t+1"), &place("t^2+t+1"));
        let alpha = extfield::root_of_place(&place("t^2+t+1")).unwrap();
        assert_eq!(res, alpha.square());
        assert_eq!(res, ExtElem::new(w, BinaryPoly::T).inverse().unwrap());
    }

    #[test]
    fn insoluble_inverse_powers_table() {
        // [w^-n, t)_w = 1 for every finite place w != t.
        for d in 1..=4u32 {
            for w in gf2poly::irreducibles(d).iter() {
                if *w == BinaryPoly::T {
                    continue;
                }
                let pl = Place::Finite(*w);
                for n in 1..=3u32 {
                    let val = RatFunc::new(BinaryPoly::ONE, w.pow(n)).unwrap();
                    assert_eq!(
                        local_symbol(&val, &pl),
                        SymbolValue::ONE,
                        "failed at w = {w}, n = {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn locally_soluble_examples() {
        assert!(locally_soluble(&y("t"), &place("t")));
        assert!(!locally_soluble(&RatFunc::ONE, &Place::Infinity));
        // nonnegative valuation at a place of good reduction
        for s in ["t", "t+1", "t^2+t", "1/t", "t/t+1"] {
            assert!(locally_soluble(&y(s), &place("t^2+t+1")), "{s}");
        }
    }

    #[test]
    fn globally_soluble_examples() {
        assert!(globally_soluble(&RatFunc::ZERO));
        assert!(!globally_soluble(&RatFunc::ONE));
        assert!(!globally_soluble(&y("1/t+1")));
        // the two soluble members of height 2
        assert!(globally_soluble(&y("t")));
        assert!(globally_soluble(&y("1/t")));
        assert!(!globally_soluble(&y("t+1")));
        assert!(!globally_soluble(&y("t/t+1")));
        assert!(!globally_soluble(&y("t+1/t")));
    }

    #[test]
    fn fast_paths_agree_with_residue_formula() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let place_t = place("t");
        for _ in 0..1000 {
            let num = BinaryPoly::from_bits(rng.gen::<u64>() as u128 & 0x3f);
            let den = BinaryPoly::from_bits(rng.gen::<u64>() as u128 & 0x3f);
            if den.is_zero() {
                continue;
            }
            let v = RatFunc::new(num, den).unwrap();
            assert_eq!(
                SymbolValue(constant_coefficient_at_t(&v)),
                local_symbol(&v, &place_t),
                "fast path diverges at t for {v}"
            );
        }
    }

    #[test]
    fn bilinearity_in_the_first_argument() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let places = [
            place("t"),
            place("t+1"),
            place("t^2+t+1"),
            place("t^3+t+1"),
            Place::Infinity,
        ];
        for _ in 0..300 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| loop {
                let num = BinaryPoly::from_bits(rng.gen::<u64>() as u128 & 0x1f);
                let den = BinaryPoly::from_bits(rng.gen::<u64>() as u128 & 0x1f);
                if !den.is_zero() {
                    return RatFunc::new(num, den).unwrap();
                }
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let sum = a + b;
            for pl in &places {
                assert_eq!(
                    local_symbol(&sum, pl),
                    local_symbol(&a, pl) + local_symbol(&b, pl),
                    "bilinearity fails at {pl} for {a}, {b}"
                );
            }
        }
    }

    #[test]
    fn translation_invariance_away_from_t_and_infinity() {
        // adding anything regular at w does not move the symbol
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for wstr in ["t+1", "t^2+t+1", "t^3+t+1"] {
            let pl = place(wstr);
            let w: BinaryPoly = wstr.parse().unwrap();
            for _ in 0..200 {
                let num = BinaryPoly::from_bits(rng.gen::<u64>() as u128 & 0x3f);
                let base = RatFunc::new(num, w * w).unwrap();
                let zden = loop {
                    let d = BinaryPoly::from_bits(rng.gen::<u64>() as u128 & 0xf);
                    if !d.is_zero() && !d.rem(w).is_zero() {
                        break d;
                    }
                };
                let znum = BinaryPoly::from_bits(rng.gen::<u64>() as u128 & 0xf);
                let z = RatFunc::new(znum, zden).unwrap();
                assert_eq!(
                    local_symbol(&(base + z), &pl),
                    local_symbol(&base, &pl),
                    "translation by {z} moved the symbol at {wstr}"
                );
            }
        }
    }

    #[test]
    fn symbol_independent_of_root_choice() {
        // all Frobenius conjugates of the root produce the same symbol
        for d in 2..=4u32 {
            for w in gf2poly::irreducibles(d).iter() {
                let den = *w * *w;
                for num_bits in 1..(1u128 << (d + 1)) {
                    let num = BinaryPoly::from_bits(num_bits);
                    if num.rem(*w).is_zero() {
                        continue;
                    }
                    let mut alpha = ExtElem::new(*w, BinaryPoly::T);
                    let reference = ResidueKernel::with_root(den, alpha).symbol_of_numerator(num);
                    for _ in 1..d {
                        alpha = alpha.frobenius();
                        let conj = ResidueKernel::with_root(den, alpha).symbol_of_numerator(num);
                        assert_eq!(conj, reference, "conjugate root disagrees for {num}/{w}^2");
                    }
                }
            }
        }
    }

    #[test]
    fn reciprocity_on_seeded_random_sample() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xC0FFEE);
        let mut checked = 0;
        while checked < 1000 {
            let num = BinaryPoly::from_bits(rng.gen::<u64>() as u128 & 0x1ff);
            let den = BinaryPoly::from_bits(rng.gen::<u64>() as u128 & 0x1ff);
            if den.is_zero() {
                continue;
            }
            let v = RatFunc::new(num, den).unwrap();
            assert_eq!(
                reciprocity_sum(&v),
                SymbolValue::ZERO,
                "reciprocity fails for {v}"
            );
            checked += 1;
        }
    }

    #[test]
    fn principal_part_measures() {
        assert_eq!(soluble_principal_parts(&place("t+1"), 1).unwrap(), (0, 1));
        assert_eq!(
            soluble_principal_parts(&place("t^2+t+1"), 1).unwrap(),
            (1, 3)
        );
        assert_eq!(soluble_principal_parts(&place("t+1"), 2).unwrap(), (1, 2));
        assert_eq!(
            soluble_principal_parts(&place("t"), 1),
            Err(SymbolError::PlaceT)
        );
        assert_eq!(
            soluble_principal_parts(&Place::Infinity, 1),
            Err(SymbolError::InfinitePlace)
        );
        assert_eq!(
            soluble_principal_parts(&place("t+1"), 0),
            Err(SymbolError::OrderZero)
        );
    }
}

//! Residue fields GF(2^d) = GF(2)[x]/(w) and Laurent expansions of rational
//! functions at a place.
//!
//! Expansions at a finite place are geometric: we expand at the point t = a
//! for one fixed root a of w, with coefficients in GF(2^d). Residues of
//! differentials are then ordinary Laurent coefficients, and the Galois
//! trace brings them back down to GF(2). Which of the d conjugate roots is
//! chosen does not matter after tracing; the symbol tests check that
//! explicitly. At the infinite place the local parameter is s = 1/t and the
//! coefficients are plain GF(2) bits.
//!
//! Polynomials expand exactly (Hasse derivatives evaluated at the root), so
//! the only truncation happens in series division, where the requested
//! window decides how many terms are produced.

use std::fmt;

use thiserror::Error;

use crate::funcfield::{Place, RatFunc};
use crate::gf2poly::BinaryPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtFieldError {
    #[error("empty expansion window [{lo}, {hi})")]
    EmptyWindow { lo: i64, hi: i64 },
    #[error("inverse of zero in GF(2^d)")]
    ZeroInverse,
    #[error("inverse of a series that vanishes to its working precision")]
    ZeroSeriesInverse,
}

/// An element of GF(2^d) presented as GF(2)[x]/(modulus); `rep` has degree
/// strictly below `deg modulus`.
///
/// Elements carry their modulus, and arithmetic across different moduli is
/// rejected (a panic, not a wrong answer).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExtElem {
    modulus: BinaryPoly,
    rep: BinaryPoly,
}

impl ExtElem {
    pub fn new(modulus: BinaryPoly, rep: BinaryPoly) -> ExtElem {
        debug_assert!(modulus.degree().map_or(false, |d| d >= 1));
        ExtElem {
            modulus,
            rep: rep.rem(modulus),
        }
    }

    pub fn zero(modulus: BinaryPoly) -> ExtElem {
        ExtElem {
            modulus,
            rep: BinaryPoly::ZERO,
        }
    }

    pub fn one(modulus: BinaryPoly) -> ExtElem {
        ExtElem::new(modulus, BinaryPoly::ONE)
    }

    pub fn modulus(&self) -> BinaryPoly {
        self.modulus
    }

    pub fn rep(&self) -> BinaryPoly {
        self.rep
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    /// Extension degree d of the field this element lives in.
    pub fn field_degree(&self) -> u32 {
        self.modulus.degree().expect("modulus nonconstant")
    }

    fn check_same_field(&self, rhs: &ExtElem) {
        assert_eq!(
            self.modulus, rhs.modulus,
            "mixed-modulus ExtElem arithmetic rejected"
        );
    }

    pub fn square(&self) -> ExtElem {
        *self * *self
    }

    /// The Frobenius automorphism x -> x^2.
    pub fn frobenius(&self) -> ExtElem {
        self.square()
    }

    pub fn pow(&self, mut exp: u64) -> ExtElem {
        let mut base = *self;
        let mut acc = ExtElem::one(self.modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Inverse by the extended Euclidean algorithm in GF(2)[x].
    pub fn inverse(&self) -> Result<ExtElem, ExtFieldError> {
        if self.is_zero() {
            return Err(ExtFieldError::ZeroInverse);
        }
        // Invariants: r0 = s0 * rep (mod modulus), r1 = s1 * rep (mod modulus).
        let (mut r0, mut r1) = (self.rep, self.modulus);
        let (mut s0, mut s1) = (BinaryPoly::ONE, BinaryPoly::ZERO);
        while !r1.is_zero() {
            let (q, r) = r0.divmod(r1).expect("loop guard keeps r1 nonzero");
            (r0, r1) = (r1, r);
            (s0, s1) = (s1, s0 + q * s1);
        }
        debug_assert!(r0.is_one(), "modulus must be irreducible");
        Ok(ExtElem::new(self.modulus, s0))
    }

    /// Field trace down to GF(2): `sum_{i<d} x^(2^i)`, returned as a bit.
    pub fn trace(&self) -> bool {
        let d = self.field_degree();
        let mut power = *self;
        let mut total = *self;
        for _ in 1..d {
            power = power.square();
            total = total + power;
        }
        debug_assert!(total.rep.is_zero() || total.rep.is_one());
        total.rep.is_one()
    }
}

impl std::ops::Add for ExtElem {
    type Output = ExtElem;
    fn add(self, rhs: ExtElem) -> ExtElem {
        self.check_same_field(&rhs);
        ExtElem {
            modulus: self.modulus,
            rep: self.rep + rhs.rep,
        }
    }
}

impl std::ops::Mul for ExtElem {
    type Output = ExtElem;
    fn mul(self, rhs: ExtElem) -> ExtElem {
        self.check_same_field(&rhs);
        ExtElem {
            modulus: self.modulus,
            rep: (self.rep * rhs.rep).rem(self.modulus),
        }
    }
}

impl fmt::Display for ExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.rep, self.modulus)
    }
}

impl fmt::Debug for ExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The canonical geometric point above a finite place: the class of x in
/// GF(2)[x]/(w). `None` at infinity, whose residue field is plain GF(2).
pub fn root_of_place(place: &Place) -> Option<ExtElem> {
    match place {
        Place::Finite(w) => Some(ExtElem::new(*w, BinaryPoly::T)),
        Place::Infinity => None,
    }
}

/// Evaluate a GF(2)[t] polynomial at an extension field element (Horner).
pub fn eval_poly(p: BinaryPoly, x: ExtElem) -> ExtElem {
    let mut acc = ExtElem::zero(x.modulus());
    let Some(deg) = p.degree() else { return acc };
    for i in (0..=deg).rev() {
        acc = acc * x;
        if p.coeff(i) {
            acc = acc + ExtElem::one(x.modulus());
        }
    }
    acc
}

/// Marker modulus for GF(2)-coefficient series (expansions at infinity):
/// GF(2)[x]/(x) is GF(2) itself.
pub const GF2_MODULUS: BinaryPoly = BinaryPoly::T;

/// A truncated Laurent series in the local parameter of a place. Coefficient
/// `coeffs[i]` (a representative mod `modulus`) sits at exponent `start + i`;
/// exponents below `start` are genuine zeros, exponents at or above `prec`
/// are unknown.
///
/// Normal form: the leading stored coefficient is nonzero, or the series is
/// identically zero to its precision (`coeffs` empty).
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentSeries {
    modulus: BinaryPoly,
    start: i64,
    coeffs: Vec<BinaryPoly>,
    prec: i64,
}

impl LaurentSeries {
    pub fn zero(modulus: BinaryPoly, prec: i64) -> LaurentSeries {
        LaurentSeries {
            modulus,
            start: prec,
            coeffs: Vec::new(),
            prec,
        }
    }

    pub fn from_coeffs(
        modulus: BinaryPoly,
        start: i64,
        coeffs: Vec<BinaryPoly>,
        prec: i64,
    ) -> LaurentSeries {
        let mut s = LaurentSeries {
            modulus,
            start,
            coeffs,
            prec,
        };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        // drop terms at or beyond the precision horizon
        let keep = (self.prec - self.start).clamp(0, self.coeffs.len() as i64) as usize;
        self.coeffs.truncate(keep);
        for c in &mut self.coeffs {
            *c = c.rem(self.modulus);
        }
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(0) => {}
            Some(k) => {
                self.coeffs.drain(..k);
                self.start += k as i64;
            }
            None => {
                self.coeffs.clear();
                self.start = self.prec;
            }
        }
    }

    pub fn modulus(&self) -> BinaryPoly {
        self.modulus
    }

    /// Exponent bound: coefficients are known strictly below this.
    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Leading exponent and coefficient, unless zero to precision.
    pub fn leading(&self) -> Option<(i64, ExtElem)> {
        self.coeffs
            .first()
            .map(|c| (self.start, ExtElem::new(self.modulus, *c)))
    }

    /// Coefficient at exponent `e`; `None` when `e` is beyond the precision.
    pub fn coeff(&self, e: i64) -> Option<ExtElem> {
        if e >= self.prec {
            return None;
        }
        let rep = if e < self.start {
            BinaryPoly::ZERO
        } else {
            self.coeffs
                .get((e - self.start) as usize)
                .copied()
                .unwrap_or(BinaryPoly::ZERO)
        };
        Some(ExtElem::new(self.modulus, rep))
    }

    /// Restrict to the window `[lo, hi)`; coefficients outside are dropped
    /// and the precision becomes `min(prec, hi)`.
    pub fn window(&self, lo: i64, hi: i64) -> LaurentSeries {
        let prec = self.prec.min(hi);
        let mut coeffs = Vec::new();
        let from = self.start.max(lo);
        let mut e = from;
        while e < prec {
            coeffs.push(
                self.coeffs
                    .get((e - self.start) as usize)
                    .copied()
                    .unwrap_or(BinaryPoly::ZERO),
            );
            e += 1;
        }
        LaurentSeries::from_coeffs(self.modulus, from, coeffs, prec)
    }

    /// Multiply by the local parameter to the `k`-th power.
    pub fn shifted(&self, k: i64) -> LaurentSeries {
        if self.is_zero() {
            return LaurentSeries::zero(self.modulus, self.prec + k);
        }
        LaurentSeries {
            modulus: self.modulus,
            start: self.start + k,
            coeffs: self.coeffs.clone(),
            prec: self.prec + k,
        }
    }

    pub fn add(&self, rhs: &LaurentSeries) -> LaurentSeries {
        assert_eq!(
            self.modulus, rhs.modulus,
            "mixed-modulus series arithmetic rejected"
        );
        let prec = self.prec.min(rhs.prec);
        if self.is_zero() && rhs.is_zero() {
            return LaurentSeries::zero(self.modulus, prec);
        }
        let start = self.start.min(rhs.start).min(prec);
        let len = (prec - start).max(0) as usize;
        let mut coeffs = vec![BinaryPoly::ZERO; len];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let e = start + i as i64;
            let a = self.coeff(e).map(|x| x.rep()).unwrap_or(BinaryPoly::ZERO);
            let b = rhs.coeff(e).map(|x| x.rep()).unwrap_or(BinaryPoly::ZERO);
            *c = a + b;
        }
        LaurentSeries::from_coeffs(self.modulus, start, coeffs, prec)
    }

    /// Product, with the pessimistic precision `min(prec_a + ord_b, prec_b +
    /// ord_a)`: each factor's unknown tail gets multiplied by the other's
    /// leading term.
    pub fn mul(&self, rhs: &LaurentSeries) -> LaurentSeries {
        assert_eq!(
            self.modulus, rhs.modulus,
            "mixed-modulus series arithmetic rejected"
        );
        if self.is_zero() || rhs.is_zero() {
            // ord of a zero series is its precision horizon
            let prec = (self.prec + rhs.start).min(rhs.prec + self.start);
            return LaurentSeries::zero(self.modulus, prec);
        }
        let start = self.start + rhs.start;
        let prec = (self.prec + rhs.start).min(rhs.prec + self.start);
        let len = (prec - start).max(0) as usize;
        let mut coeffs = vec![BinaryPoly::ZERO; len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] += (*a * *b).rem(self.modulus);
            }
        }
        LaurentSeries::from_coeffs(self.modulus, start, coeffs, prec)
    }

    /// Multiplicative inverse. The relative precision (number of known
    /// terms past the leading one) is preserved.
    ///
    /// Newton iteration; in characteristic 2 the update is `b <- u * b^2`,
    /// which doubles the number of correct terms per round.
    pub fn inverse(&self) -> Result<LaurentSeries, ExtFieldError> {
        if self.is_zero() {
            return Err(ExtFieldError::ZeroSeriesInverse);
        }
        let n = (self.prec - self.start) as usize; // relative terms known
        let unit = &self.coeffs;
        let lead_inv = ExtElem::new(self.modulus, unit[0]).inverse()?.rep();
        let mut b = vec![lead_inv];
        let mut k = 1usize;
        while k < n {
            k = (2 * k).min(n);
            // b <- unit * b^2, truncated to k terms
            let mut b2 = vec![BinaryPoly::ZERO; k];
            for i in 0..b.len() {
                if b[i].is_zero() {
                    continue;
                }
                for j in 0..b.len() {
                    if i + j < k {
                        b2[i + j] += (b[i] * b[j]).rem(self.modulus);
                    }
                }
            }
            let mut next = vec![BinaryPoly::ZERO; k];
            for (i, u) in unit.iter().take(k).enumerate() {
                if u.is_zero() {
                    continue;
                }
                for j in 0..k - i {
                    if !b2[j].is_zero() {
                        next[i + j] += (*u * b2[j]).rem(self.modulus);
                    }
                }
            }
            b = next;
        }
        Ok(LaurentSeries::from_coeffs(
            self.modulus,
            -self.start,
            b,
            self.prec - 2 * self.start,
        ))
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "O(u^{})", self.prec);
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                write!(f, "({})u^{} + ", c, self.start + i as i64)?;
            }
        }
        write!(f, "O(u^{})", self.prec)
    }
}

/// Exact expansion of a polynomial at the point a: Taylor coefficients via
/// Hasse derivatives, `p(a + e) = sum_j (H_j p)(a) e^j`.
pub fn poly_expansion(p: BinaryPoly, alpha: ExtElem) -> Vec<BinaryPoly> {
    let Some(deg) = p.degree() else {
        return Vec::new();
    };
    (0..=deg)
        .map(|j| eval_poly(p.hasse_derivative(j), alpha).rep())
        .collect()
}

/// Laurent expansion of `y` at a place, covering exponents `[lo, hi)`.
///
/// At a finite place of degree d the parameter is t - a and the coefficients
/// live in GF(2^d); at infinity the parameter is s = 1/t with GF(2)
/// coefficients. The leading exponent equals the valuation `v_w(y)` whenever
/// the window reaches down that far.
pub fn expand_at(
    y: &RatFunc,
    place: &Place,
    lo: i64,
    hi: i64,
) -> Result<LaurentSeries, ExtFieldError> {
    if hi <= lo {
        return Err(ExtFieldError::EmptyWindow { lo, hi });
    }
    let modulus = match place {
        Place::Finite(w) => *w,
        Place::Infinity => GF2_MODULUS,
    };
    if y.is_zero() {
        return Ok(LaurentSeries::zero(modulus, hi));
    }
    let (num_start, num_coeffs, den_start, den_coeffs) = match place {
        Place::Finite(w) => {
            let alpha = root_of_place(place).expect("finite place");
            debug_assert_eq!(alpha.modulus(), *w);
            (
                0i64,
                poly_expansion(y.num(), alpha),
                0i64,
                poly_expansion(y.den(), alpha),
            )
        }
        Place::Infinity => {
            // p(t) = s^(-deg p) * (reversed p)(s) with s = 1/t
            let dn = y.num().degree().expect("nonzero");
            let dd = y.den().degree().expect("nonzero");
            let rn = y.num().reversed(dn);
            let rd = y.den().reversed(dd);
            let to_bits = |p: BinaryPoly, len: u32| -> Vec<BinaryPoly> {
                (0..=len)
                    .map(|i| {
                        if p.coeff(i) {
                            BinaryPoly::ONE
                        } else {
                            BinaryPoly::ZERO
                        }
                    })
                    .collect()
            };
            (
                -i64::from(dn),
                to_bits(rn, dn),
                -i64::from(dd),
                to_bits(rd, dd),
            )
        }
    };
    Ok(divide_expansions(
        modulus,
        num_start,
        &num_coeffs,
        den_start,
        &den_coeffs,
        lo,
        hi,
    ))
}

/// Quotient of two exact expansions, truncated to the window `[lo, hi)`.
fn divide_expansions(
    modulus: BinaryPoly,
    num_start: i64,
    num_coeffs: &[BinaryPoly],
    den_start: i64,
    den_coeffs: &[BinaryPoly],
    lo: i64,
    hi: i64,
) -> LaurentSeries {
    let nv = num_coeffs.iter().position(|c| !c.is_zero());
    let dv = den_coeffs
        .iter()
        .position(|c| !c.is_zero())
        .expect("denominator expansion cannot vanish identically");
    let Some(nv) = nv else {
        return LaurentSeries::zero(modulus, hi);
    };
    // Leading exponent of the quotient.
    let v = (num_start + nv as i64) - (den_start + dv as i64);
    let n_rel = hi - v;
    if n_rel <= 0 {
        return LaurentSeries::zero(modulus, hi);
    }
    let n_rel = n_rel as usize;
    let num_unit: Vec<BinaryPoly> = pad(&num_coeffs[nv..], n_rel);
    let den_unit =
        LaurentSeries::from_coeffs(modulus, 0, pad(&den_coeffs[dv..], n_rel), n_rel as i64);
    let inv = den_unit.inverse().expect("unit series");
    let num_series = LaurentSeries::from_coeffs(modulus, 0, num_unit, n_rel as i64);
    let quot = num_series.mul(&inv);
    quot.shifted(v).window(lo, hi)
}

fn pad(src: &[BinaryPoly], len: usize) -> Vec<BinaryPoly> {
    let mut v: Vec<BinaryPoly> = src.iter().copied().take(len).collect();
    v.resize(len, BinaryPoly::ZERO);
    v
}

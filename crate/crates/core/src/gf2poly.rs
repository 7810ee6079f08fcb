//! Polynomials over GF(2), packed into a `u128`.
//!
//! Bit `i` is the coefficient of `t^i`, so `0b1011 = t^3 + t + 1`. Addition
//! is XOR and multiplication is carry-less shift-and-XOR; everything stays at
//! word level because the degrees in this project top out far below 128.
//!
//! Text forms accepted everywhere a polynomial is an input: caret syntax
//! (`"t^3+t+1"`, `"t"`, `"1"`, `"0"`, spaces allowed around `+`) and hex
//! bit-mask syntax (`"0xB"`).

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Errors from polynomial arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("gcd(0, 0) is undefined")]
    GcdOfZeros,
    #[error("cannot factor the zero polynomial")]
    FactorOfZero,
}

/// Parse failure, with the byte offset of the offending input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{msg} at byte {pos}")]
pub struct ParsePolyError {
    pub pos: usize,
    pub msg: &'static str,
}

/// A polynomial over GF(2); bit `i` holds the coefficient of `t^i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryPoly(u128);

/// Mask of the even bit positions, used by the formal derivative.
const EVEN_BITS: u128 = 0x5555_5555_5555_5555_5555_5555_5555_5555;

impl BinaryPoly {
    pub const ZERO: BinaryPoly = BinaryPoly(0);
    pub const ONE: BinaryPoly = BinaryPoly(1);
    /// The polynomial `t`.
    pub const T: BinaryPoly = BinaryPoly(2);

    pub fn from_bits(bits: u128) -> BinaryPoly {
        BinaryPoly(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    /// Degree, or `None` for the zero polynomial. The sentinel never enters
    /// degree arithmetic: callers must unwrap deliberately.
    pub fn degree(self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            Some(127 - self.0.leading_zeros())
        }
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn is_one(self) -> bool {
        self.0 == 1
    }

    /// Coefficient of `t^i`.
    pub fn coeff(self, i: u32) -> bool {
        i < 128 && (self.0 >> i) & 1 == 1
    }

    /// Multiplicity of the factor `t`, i.e. the valuation at the place `t`.
    /// Returns `None` for the zero polynomial.
    pub fn t_valuation(self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros())
        }
    }

    /// `p(0)`, the constant term.
    pub fn constant_term(self) -> bool {
        self.0 & 1 == 1
    }

    /// Quotient and remainder; the remainder is zero or has degree < deg(q).
    pub fn divmod(self, rhs: BinaryPoly) -> Result<(BinaryPoly, BinaryPoly), Gf2Error> {
        if rhs.is_zero() {
            return Err(Gf2Error::DivisionByZero);
        }
        let width = 128 - rhs.0.leading_zeros();
        let mut quot = 0u128;
        let mut rem = self.0;
        loop {
            let rem_width = 128 - rem.leading_zeros();
            if rem_width < width {
                return Ok((BinaryPoly(quot), BinaryPoly(rem)));
            }
            let shift = rem_width - width;
            quot |= 1 << shift;
            rem ^= rhs.0 << shift;
        }
    }

    /// Remainder only. Panics on a zero divisor (internal use is always
    /// against known-nonzero moduli).
    pub fn rem(self, rhs: BinaryPoly) -> BinaryPoly {
        self.divmod(rhs).expect("rem by zero polynomial").1
    }

    /// Monic gcd. Over GF(2) every nonzero polynomial is monic, so no
    /// normalisation step is needed.
    pub fn gcd(self, rhs: BinaryPoly) -> Result<BinaryPoly, Gf2Error> {
        if self.is_zero() && rhs.is_zero() {
            return Err(Gf2Error::GcdOfZeros);
        }
        Ok(BinaryPoly(gcd_raw(self.0, rhs.0)))
    }

    /// Formal derivative; in characteristic 2 the even-power terms vanish.
    pub fn derivative(self) -> BinaryPoly {
        BinaryPoly((self.0 >> 1) & EVEN_BITS)
    }

    /// `self^exp` by repeated squaring.
    pub fn pow(self, exp: u32) -> BinaryPoly {
        let mut base = self;
        let mut acc = BinaryPoly::ONE;
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }

    /// `j`-th Hasse derivative: sum of `binom(i, j) p_i t^(i-j)`. Over GF(2)
    /// the binomial is odd exactly when the bits of `j` are a subset of the
    /// bits of `i` (Lucas), so this is pure bit fiddling. These are the
    /// Taylor coefficients that classical derivatives lose in charactestic 2:
    /// `p(a + e) = sum_j (H_j p)(a) e^j` exactly.
    pub fn hasse_derivative(self, j: u32) -> BinaryPoly {
        let mut out = 0u128;
        let mut bits = self.0;
        while bits != 0 {
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            if i & j == j {
                out |= 1u128 << (i - j);
            }
        }
        BinaryPoly(out)
    }

    /// Reverse the coefficients within the window `[0, window_deg]`, i.e.
    /// `t^window_deg * p(1/t)`. Used for expansions at the infinite place.
    pub fn reversed(self, window_deg: u32) -> BinaryPoly {
        debug_assert!(window_deg < 128);
        debug_assert!(self.degree().map_or(true, |d| d <= window_deg));
        BinaryPoly(self.0.reverse_bits() >> (127 - window_deg))
    }

    /// Inverse power series of `self` mod `t^n`, as a bit-packed polynomial
    /// of degree < n. Requires constant term 1 and `n <= 64`.
    ///
    /// Newton iteration specialises nicely in characteristic 2: with
    /// `b` correct mod `t^k`, `a*b = 1 + e` and `a*(a*b^2) = (1+e)^2 = 1 + e^2`,
    /// so `b <- a*b^2` doubles the precision per step.
    pub fn inv_mod_tpow(self, n: u32) -> BinaryPoly {
        assert!(
            self.constant_term(),
            "series inverse needs a unit constant term"
        );
        assert!((1..=64).contains(&n), "inv_mod_tpow supports 1..=64 terms");
        let mut b = 1u128;
        let mut k = 1u32;
        while k < n {
            k = (2 * k).min(n);
            let mask = mask_bits(k);
            let b2 = BinaryPoly(b) * BinaryPoly(b);
            let ab2 = BinaryPoly(b2.0 & mask) * BinaryPoly(self.0 & mask);
            b = ab2.0 & mask;
        }
        BinaryPoly(b)
    }

    /// Coefficient of `t^k` in the power series `self / den`, where `den`
    /// has constant term 1. Requires `k <= 63`.
    pub fn series_quot_coeff(self, den: BinaryPoly, k: u32) -> bool {
        let inv = den.inv_mod_tpow(k + 1);
        let prod = BinaryPoly(self.0 & mask_bits(k + 1)) * inv;
        prod.coeff(k)
    }
}

fn mask_bits(n: u32) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

fn gcd_raw(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let width = 128 - b.leading_zeros();
        loop {
            let a_width = 128 - a.leading_zeros();
            if a_width < width {
                break;
            }
            a ^= b << (a_width - width);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

impl std::ops::Add for BinaryPoly {
    type Output = BinaryPoly;
    fn add(self, rhs: BinaryPoly) -> BinaryPoly {
        BinaryPoly(self.0 ^ rhs.0)
    }
}

impl std::ops::AddAssign for BinaryPoly {
    fn add_assign(&mut self, rhs: BinaryPoly) {
        self.0 ^= rhs.0;
    }
}

impl std::ops::Mul for BinaryPoly {
    type Output = BinaryPoly;
    fn mul(self, rhs: BinaryPoly) -> BinaryPoly {
        if let (Some(da), Some(db)) = (self.degree(), rhs.degree()) {
            assert!(
                da + db < 128,
                "GF(2)[t] product overflows 128 coefficient bits"
            );
        }
        let mut acc = 0u128;
        let mut a = self.0;
        let mut b = rhs.0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            a <<= 1;
            b >>= 1;
        }
        BinaryPoly(acc)
    }
}

impl fmt::Display for BinaryPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in (0..128).rev() {
            if !self.coeff(i) {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match i {
                0 => write!(f, "1")?,
                1 => write!(f, "t")?,
                _ => write!(f, "t^{i}")?,
            }
        }
        Ok(())
    }
}

// Debug via Display: polynomials read better as `t^3+t+1` than as a tuple
// struct around a big integer.
impl fmt::Debug for BinaryPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for BinaryPoly {
    type Err = ParsePolyError;

    fn from_str(s: &str) -> Result<BinaryPoly, ParsePolyError> {
        let trimmed_start = s.len() - s.trim_start().len();
        let body = s.trim();
        if body.is_empty() {
            return Err(ParsePolyError {
                pos: 0,
                msg: "empty polynomial",
            });
        }
        if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
            if hex.is_empty() {
                return Err(ParsePolyError {
                    pos: trimmed_start + 2,
                    msg: "empty hex literal",
                });
            }
            if hex.len() > 32 {
                return Err(ParsePolyError {
                    pos: trimmed_start + 2,
                    msg: "hex literal too long",
                });
            }
            return match u128::from_str_radix(hex, 16) {
                Ok(bits) => Ok(BinaryPoly(bits)),
                Err(_) => Err(ParsePolyError {
                    pos: trimmed_start + 2,
                    msg: "invalid hex digit",
                }),
            };
        }
        let mut bits = 0u128;
        // Terms separated by '+'; spaces are allowed around each term.
        let mut term_start = trimmed_start;
        for piece in body.split('+') {
            let inner_off = piece.len() - piece.trim_start().len();
            let term = piece.trim();
            let pos = term_start + inner_off;
            bits ^= parse_term(term, pos)?;
            term_start += piece.len() + 1;
        }
        Ok(BinaryPoly(bits))
    }
}

fn parse_term(term: &str, pos: usize) -> Result<u128, ParsePolyError> {
    match term {
        "" => Err(ParsePolyError {
            pos,
            msg: "empty term",
        }),
        "0" => Ok(0),
        "1" => Ok(1),
        "t" => Ok(2),
        _ => {
            let exp_str = term.strip_prefix("t^").ok_or(ParsePolyError {
                pos,
                msg: "expected 0, 1, t, or t^<exponent>",
            })?;
            let exp: u32 = exp_str.parse().map_err(|_| ParsePolyError {
                pos: pos + 2,
                msg: "invalid exponent",
            })?;
            if exp > 127 {
                return Err(ParsePolyError {
                    pos: pos + 2,
                    msg: "exponent exceeds 127",
                });
            }
            Ok(1u128 << exp)
        }
    }
}

/// All monic irreducibles of degree exactly `d`, ascending by bit pattern.
///
/// Built by trial division against the lower-degree tables and memoised
/// process-wide; after construction the slices are immutable and shared.
pub fn irreducibles(d: u32) -> Arc<[BinaryPoly]> {
    assert!(
        (1..=24).contains(&d),
        "irreducible enumeration capped at degree 24"
    );
    static CACHE: OnceLock<Mutex<Vec<Arc<[BinaryPoly]>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut tables = cache.lock().expect("irreducibles cache poisoned");
    while (tables.len() as u32) < d {
        let k = tables.len() as u32 + 1;
        let mut level = Vec::new();
        // Candidates: leading bit k set and, except for t itself, constant
        // term 1 (otherwise t divides).
        let lo = 1u128 << k;
        let hi = 1u128 << (k + 1);
        if k == 1 {
            level.push(BinaryPoly::T);
        }
        let mut candidate = lo | 1;
        while candidate < hi {
            let p = BinaryPoly(candidate);
            let divisible =
                (1..=k / 2).any(|e| tables[e as usize - 1].iter().any(|w| p.rem(*w).is_zero()));
            if !divisible {
                level.push(p);
            }
            candidate += 2;
        }
        level.sort();
        tables.push(level.into());
    }
    tables[d as usize - 1].clone()
}

/// Number of monic irreducibles of degree `d`, by the Mobius necklace
/// formula `(1/d) sum_{e|d} mu(e) 2^(d/e)`. Independent of [`irreducibles`],
/// which enumerates; the two are cross-checked in tests.
pub fn irreducible_count(d: u32) -> u64 {
    assert!(
        (1..=64).contains(&d),
        "necklace count supported for degrees 1..=64"
    );
    let mut total: i128 = 0;
    for e in 1..=d {
        if d % e == 0 {
            total += i128::from(mobius(e)) * (1i128 << (d / e));
        }
    }
    debug_assert!(total > 0 && total % i128::from(d) == 0);
    (total / i128::from(d)) as u64
}

fn mobius(n: u32) -> i32 {
    let mut n = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Trial-division irreducibility test against the cached tables.
pub fn is_irreducible(p: BinaryPoly) -> bool {
    let Some(d) = p.degree() else { return false };
    if d == 0 {
        return false;
    }
    !(1..=d / 2).any(|e| irreducibles(e).iter().any(|w| p.rem(*w).is_zero()))
}

/// Complete factorisation into irreducibles with multiplicities, ascending
/// by factor. Inputs here have degree at most a few dozen, so trial division
/// against the cached tables is the whole story.
pub fn factor(p: BinaryPoly) -> Result<Vec<(BinaryPoly, u32)>, Gf2Error> {
    if p.is_zero() {
        return Err(Gf2Error::FactorOfZero);
    }
    let mut out = Vec::new();
    let tz = p.t_valuation().expect("nonzero");
    if tz > 0 {
        out.push((BinaryPoly::T, tz));
    }
    let mut rem = BinaryPoly(p.0 >> tz);
    let mut d = 1;
    while let Some(deg) = rem.degree() {
        if deg == 0 {
            break;
        }
        if 2 * d > deg {
            out.push((rem, 1));
            break;
        }
        for &w in irreducibles(d).iter() {
            if w == BinaryPoly::T {
                continue;
            }
            let mut mult = 0;
            loop {
                let (q, r) = rem.divmod(w).expect("irreducible is nonzero");
                if !r.is_zero() {
                    break;
                }
                rem = q;
                mult += 1;
            }
            if mult > 0 {
                out.push((w, mult));
            }
        }
        d += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn p(s: &str) -> BinaryPoly {
        s.parse().unwrap()
    }

    #[test]
    fn add_cancels_in_char_two() {
        assert_eq!(p("t+1") + p("t"), p("1"));
        assert_eq!(p("t^2+t+1") + BinaryPoly::ZERO, p("t^2+t+1"));
        assert_eq!(p("t^2+t+1") + p("t^2+1"), p("t"));
        let q = p("t^5+t^3");
        assert_eq!(q + q, BinaryPoly::ZERO);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(p("t+1") * p("t+1"), p("t^2+1"));
        assert_eq!(p("t") * p("t^2+t+1"), p("t^3+t^2+t"));
        assert_eq!(BinaryPoly::ZERO * p("t^4+t"), BinaryPoly::ZERO);
    }

    #[test]
    fn divmod_examples() {
        assert_eq!(
            p("t^3+1").divmod(p("t+1")).unwrap(),
            (p("t^2+t+1"), BinaryPoly::ZERO)
        );
        assert_eq!(
            p("t").divmod(p("t^2+t+1")).unwrap(),
            (BinaryPoly::ZERO, p("t"))
        );
        assert_eq!(p("t^2").divmod(p("t")).unwrap(), (p("t"), BinaryPoly::ZERO));
        assert_eq!(
            p("t^2").divmod(BinaryPoly::ZERO),
            Err(Gf2Error::DivisionByZero)
        );
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(p("t^2+1").gcd(p("t+1")).unwrap(), p("t+1"));
        assert_eq!(p("t").gcd(p("t+1")).unwrap(), BinaryPoly::ONE);
        assert_eq!(p("t^3+t").gcd(BinaryPoly::ZERO).unwrap(), p("t^3+t"));
        assert_eq!(
            BinaryPoly::ZERO.gcd(BinaryPoly::ZERO),
            Err(Gf2Error::GcdOfZeros)
        );
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(p("t^2+t+1").derivative(), BinaryPoly::ONE);
        assert_eq!(p("t^2").derivative(), BinaryPoly::ZERO);
        assert_eq!(p("t^3+t").derivative(), p("t^2+1"));
    }

    #[test]
    fn irreducibles_small_degrees() {
        assert_eq!(irreducibles(1).as_ref(), &[p("t"), p("t+1")][..]);
        assert_eq!(irreducibles(2).as_ref(), &[p("t^2+t+1")][..]);
        let counts: Vec<usize> = (1..=8).map(|d| irreducibles(d).len()).collect();
        assert_eq!(counts, vec![2, 1, 2, 3, 6, 9, 18, 30]);
        for d in 1..=8 {
            assert_eq!(irreducibles(d).len() as u64, irreducible_count(d));
        }
    }

    /// Independent irreducibility oracle: p of degree d >= 2 has an
    /// irreducible factor of degree <= d/2 iff it has a root in some
    /// GF(2^e) with e <= d/2, i.e. iff gcd(t^(2^e) - t mod p, p) != 1.
    fn has_small_degree_factor(poly: BinaryPoly) -> bool {
        let d = poly.degree().unwrap();
        let mut frob = BinaryPoly::T.rem(poly);
        for _ in 1..=d / 2 {
            frob = (frob * frob).rem(poly);
            // frob = t^(2^e) mod p; subtracting t is adding it over GF(2).
            let diff = frob + BinaryPoly::T;
            let g = if diff.is_zero() {
                poly
            } else {
                poly.gcd(diff).unwrap()
            };
            if !g.is_one() {
                return true;
            }
        }
        false
    }

    #[test]
    fn irreducibles_pass_independent_oracle() {
        for d in 2..=10 {
            for &w in irreducibles(d).iter() {
                assert!(!has_small_degree_factor(w), "{w} flagged by gcd oracle");
            }
        }
    }

    #[test]
    fn degree_weighted_counts_sum_to_two_pow_d() {
        // Every monic polynomial of degree d factors uniquely, which makes
        // sum_{e|d} e * N_e = 2^d.
        for d in 1..=12u32 {
            let total: u64 = (1..=d)
                .filter(|e| d % e == 0)
                .map(|e| u64::from(e) * irreducibles(e).len() as u64)
                .sum();
            assert_eq!(total, 1u64 << d);
        }
    }

    #[test]
    fn factor_examples() {
        assert_eq!(factor(p("t^2+1")).unwrap(), vec![(p("t+1"), 2)]);
        assert_eq!(
            factor(p("t^3+t")).unwrap(),
            vec![(p("t"), 1), (p("t+1"), 2)]
        );
        assert_eq!(factor(p("t^6+t+1")).unwrap(), vec![(p("t^6+t+1"), 1)]);
        assert!(factor(BinaryPoly::ZERO).is_err());
    }

    #[test]
    fn factor_recombines_on_random_inputs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e3779b9);
        for _ in 0..10_000 {
            let bits = rng.gen::<u32>() as u128 & ((1 << 25) - 1);
            if bits == 0 {
                continue;
            }
            let q = BinaryPoly(bits);
            let product = factor(q)
                .unwrap()
                .into_iter()
                .fold(BinaryPoly::ONE, |acc, (w, m)| acc * w.pow(m));
            assert_eq!(product, q);
        }
    }

    #[test]
    fn hasse_derivatives_give_taylor_shift() {
        // p(t + 1) recomputed from Hasse coefficients at 1.
        let q = p("t^5+t^3+t^2+1");
        let mut shifted = BinaryPoly::ZERO;
        for j in 0..=5 {
            let h = q.hasse_derivative(j);
            // evaluate h at 1: parity of coefficients
            if h.bits().count_ones() & 1 == 1 {
                shifted += BinaryPoly(1u128 << j);
            }
        }
        // direct substitution t -> t + 1
        let mut direct = BinaryPoly::ZERO;
        for i in 0..=5 {
            if q.coeff(i) {
                direct += p("t+1").pow(i);
            }
        }
        assert_eq!(shifted, direct);
        assert_eq!(q.hasse_derivative(1), q.derivative());
    }

    #[test]
    fn inverse_series_examples() {
        // 1/(1+t) = 1 + t + t^2 + ... mod t^8
        assert_eq!(p("t+1").inv_mod_tpow(8), BinaryPoly(0xff));
        let den = p("t^3+t+1");
        let inv = den.inv_mod_tpow(20);
        let prod = den * inv;
        assert_eq!(prod.bits() & ((1 << 20) - 1), 1);
        assert!(p("t^2+t+1").series_quot_coeff(p("t+1"), 2));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(p("0xB"), p("t^3+t+1"));
        assert_eq!(p(" t^2 + t + 1 "), p("t^2+t+1"));
        assert_eq!(p("t^3+t+1").to_string(), "t^3+t+1");
        assert_eq!(BinaryPoly::ZERO.to_string(), "0");
        assert_eq!(p("t").to_string(), "t");
        let err = "t^2+q".parse::<BinaryPoly>().unwrap_err();
        assert_eq!(err.pos, 4);
        let err = "t^".parse::<BinaryPoly>().unwrap_err();
        assert_eq!(err.pos, 2);
    }

    proptest! {
        #[test]
        fn divmod_roundtrip(a in any::<u64>(), b in 1u64..) {
            let a = BinaryPoly(a as u128);
            let b = BinaryPoly(b as u128);
            let (q, r) = a.divmod(b).unwrap();
            prop_assert_eq!(q * b + r, a);
            if !r.is_zero() {
                prop_assert!(r.degree().unwrap() < b.degree().unwrap());
            }
        }

        #[test]
        fn product_degrees_add(a in 1u64.., b in 1u64..) {
            let a = BinaryPoly(a as u128);
            let b = BinaryPoly(b as u128);
            let prod = a * b;
            prop_assert_eq!(
                prod.degree().unwrap(),
                a.degree().unwrap() + b.degree().unwrap()
            );
        }

        #[test]
        fn display_parse_roundtrip(bits in any::<u64>()) {
            let q = BinaryPoly(bits as u128);
            let reparsed: BinaryPoly = q.to_string().parse().unwrap();
            prop_assert_eq!(reparsed, q);
        }
    }
}

//! Exhaustive census of `N(B) = #{y : H(y) = B, C_y(K) != empty}` — the
//! ground truth the analytic routes are measured against.
//!
//! The enumeration is partitioned by denominator. For each denominator the
//! factorisation, the series inverses at t and infinity, and the residue
//! kernels at the other poles are computed once; each candidate numerator
//! then costs a gcd plus a handful of word operations and, only when the
//! denominator has poles away from t, short extension-field convolutions.
//! Workers own disjoint denominator slices and the reduction is integer
//! addition, so the counts are identical no matter how many threads run.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::funcfield::{self, HeightSlice};
use crate::gf2poly::{self, BinaryPoly};
use crate::symbol::ResidueKernel;

/// Census caps default to this; the CLI refuses larger runs without an
/// explicit override (the pair count grows like `3 * 4^M`).
pub const DEFAULT_MAX_LOG_HEIGHT: u32 = 14;

/// One census line: all y of height `2^m`, and how many give a conic with a
/// rational point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub m: u32,
    pub total: u64,
    pub soluble: u64,
    pub elapsed: Duration,
}

/// Everything about solubility of `num/den` that does not depend on `num`.
struct DenominatorChecks {
    den_deg: u32,
    /// v_t(den) and the inverse of the t-unit part mod t^(v+1).
    t_val: u32,
    inv_t_unit: BinaryPoly,
    /// Inverse of the reversed denominator mod s^(m - deg den + 1).
    inv_rev_den: BinaryPoly,
    /// Residue kernels at the poles away from t.
    kernels: Vec<ResidueKernel>,
}

impl DenominatorChecks {
    fn new(m: u32, den: BinaryPoly) -> DenominatorChecks {
        let den_deg = den.degree().expect("den nonzero");
        let t_val = den.t_valuation().expect("den nonzero");
        let t_unit = BinaryPoly::from_bits(den.bits() >> t_val);
        let inv_t_unit = t_unit.inv_mod_tpow(t_val + 1);
        let inv_rev_den = den.reversed(den_deg).inv_mod_tpow(m - den_deg + 1);
        let kernels = if den.is_one() {
            Vec::new()
        } else {
            gf2poly::factor(den)
                .expect("den nonzero")
                .into_iter()
                .filter(|(w, _)| *w != BinaryPoly::T)
                .map(|(w, _)| ResidueKernel::new(den, w))
                .collect()
        };
        DenominatorChecks {
            den_deg,
            t_val,
            inv_t_unit,
            inv_rev_den,
            kernels,
        }
    }

    /// `globally_soluble(num/den)` for a numerator coprime to `den`.
    fn soluble(&self, num: BinaryPoly) -> bool {
        if num.is_zero() {
            // y = 0 (only reachable with den = 1): expansions vanish everywhere
            return true;
        }
        // place t: reject when the constant expansion coefficient is 1
        let a = num.t_valuation().expect("nonzero");
        if a <= self.t_val {
            let k = self.t_val - a;
            let mask = (1u128 << (k + 1)) - 1;
            let prod = BinaryPoly::from_bits((num.bits() >> a) & mask)
                * BinaryPoly::from_bits(self.inv_t_unit.bits() & mask);
            if prod.coeff(k) {
                return false;
            }
        }
        // place at infinity: same criterion in s = 1/t
        let num_deg = num.degree().expect("nonzero");
        if num_deg >= self.den_deg {
            let k = num_deg - self.den_deg;
            let mask = (1u128 << (k + 1)) - 1;
            let prod = BinaryPoly::from_bits(num.reversed(num_deg).bits() & mask)
                * BinaryPoly::from_bits(self.inv_rev_den.bits() & mask);
            if prod.coeff(k) {
                return false;
            }
        }
        // remaining poles: traced residues must all vanish
        self.kernels
            .iter()
            .all(|kern| kern.symbol_of_numerator(num).is_zero())
    }
}

/// (candidates touched, soluble) for one denominator slice.
fn count_slice(slice: &HeightSlice) -> (u64, u64) {
    let checks = DenominatorChecks::new(slice.m, slice.den);
    let den = slice.den;
    let mut total = 0u64;
    let mut soluble = 0u64;
    for bits in slice.num_bits.clone() {
        let num = BinaryPoly::from_bits(bits);
        let coprime = if num.is_zero() {
            den.is_one()
        } else {
            num.gcd(den).expect("den nonzero").is_one()
        };
        if !coprime {
            continue;
        }
        total += 1;
        if checks.soluble(num) {
            soluble += 1;
        }
    }
    (total, soluble)
}

/// Count the soluble fibres at height `2^m`, in parallel over denominator
/// slices on the ambient rayon pool. The result is independent of the
/// worker count.
pub fn census(m: u32) -> CensusRow {
    let start = Instant::now();
    let (total, soluble) = funcfield::height_slices(m)
        .par_iter()
        .map(count_slice)
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    CensusRow {
        m,
        total,
        soluble,
        elapsed: start.elapsed(),
    }
}

/// Single-threaded census, bit-for-bit comparable with [`census`].
pub fn census_serial(m: u32) -> CensusRow {
    let start = Instant::now();
    let (total, soluble) = funcfield::height_slices(m)
        .iter()
        .map(count_slice)
        .fold((0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    CensusRow {
        m,
        total,
        soluble,
        elapsed: start.elapsed(),
    }
}

/// Censuses for m = 0..=m_max, handing each row to `sink` as it completes.
pub fn census_range_with(m_max: u32, mut sink: impl FnMut(&CensusRow)) -> Vec<CensusRow> {
    let mut rows = Vec::with_capacity(m_max as usize + 1);
    for m in 0..=m_max {
        let row = census(m);
        sink(&row);
        rows.push(row);
    }
    rows
}

pub fn census_range(m_max: u32) -> Vec<CensusRow> {
    census_range_with(m_max, |_| {})
}

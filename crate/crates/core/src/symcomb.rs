//! Exact combinatorics over Hamming-weight classes.
//!
//! Bit strings of length `m` are stored in a `u64` with qubit `0` in the most
//! significant of the `m` bits, so the lexicographic order of strings is the
//! numeric order of their integer codes. Every operator builder in the crate
//! uses this convention.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use std::sync::{Mutex, OnceLock};

use crate::error::{invalid, Error, Result};
use crate::sparse::CsrMatrix;

/// Largest string length handled by [`WeightBasis`].
pub const MAX_BITS: usize = 63;

/// Exact binomial coefficient. `k > m` gives zero.
pub fn binom(m: u64, k: u64) -> BigUint {
    if k > m {
        return BigUint::ZERO;
    }
    let k = k.min(m - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= m - i;
        acc /= i + 1;
    }
    acc
}

/// Exact binomial coefficient when it fits in a `u64` (always for `m <= 64`).
pub fn binom_u64(m: u64, k: u64) -> Option<u64> {
    if k > m {
        return Some(0);
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc.checked_mul(m as u128 - i)? / (i + 1);
    }
    u64::try_from(acc).ok()
}

/// Binomial coefficient rounded once to the nearest `f64`.
pub fn binom_f64(m: u64, k: u64) -> f64 {
    match binom_u64(m, k) {
        Some(v) => v as f64,
        None => binom(m, k).to_f64().unwrap_or(f64::INFINITY),
    }
}

/// Central binomial `C(2n, n)` as a float. Values past the `u64` range are
/// computed exactly once and cached, since sweeps over `n` ask for them in
/// every objective evaluation.
pub fn central_binom(n: usize) -> f64 {
    static CACHE: OnceLock<Mutex<Vec<f64>>> = OnceLock::new();
    if let Some(v) = binom_u64(2 * n as u64, n as u64) {
        return v as f64;
    }
    let mut cache = CACHE.get_or_init(|| Mutex::new(Vec::new())).lock().unwrap_or_else(|e| e.into_inner());
    if cache.len() <= n {
        cache.resize(n + 1, f64::NAN);
    }
    if cache[n].is_nan() {
        cache[n] = binom(2 * n as u64, n as u64).to_f64().unwrap_or(f64::INFINITY);
    }
    cache[n]
}

/// Value of qubit `q` in the `m`-bit string `x`.
#[inline]
pub fn bit(x: u64, q: usize, m: usize) -> u64 {
    (x >> (m - 1 - q)) & 1
}

/// Mask with only qubit `q` of an `m`-bit string set.
#[inline]
pub fn qubit_mask(q: usize, m: usize) -> u64 {
    1u64 << (m - 1 - q)
}

#[inline]
pub fn weight(x: u64) -> u32 {
    x.count_ones()
}

/// The set `B_{m,k}` of `m`-bit strings of Hamming weight `k`, ranked
/// lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightBasis {
    m: usize,
    k: usize,
    size: u64,
}

impl WeightBasis {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if m == 0 || m > MAX_BITS {
            return Err(invalid("m", format!("{m} not in 1..={MAX_BITS}")));
        }
        if k > m {
            return Err(invalid("k", format!("{k} exceeds m = {m}")));
        }
        let size = binom_u64(m as u64, k as u64).expect("C(m,k) fits for m <= 63");
        Ok(Self { m, k, size })
    }

    pub fn bits(&self) -> usize {
        self.m
    }

    pub fn weight(&self) -> usize {
        self.k
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    /// Position of `x` in the lexicographic enumeration of `B_{m,k}`.
    pub fn rank(&self, x: u64) -> Result<u64> {
        let w = weight(x);
        if w as usize != self.k || (self.m < 64 && x >> self.m != 0) {
            return Err(Error::WrongWeight {
                string: x,
                found: w,
                expected: self.k as u32,
            });
        }
        Ok(self.rank_unchecked(x))
    }

    pub(crate) fn rank_unchecked(&self, x: u64) -> u64 {
        let mut rank = 0u64;
        let mut ones_left = self.k as u64;
        for q in 0..self.m {
            if ones_left == 0 {
                break;
            }
            if bit(x, q, self.m) == 1 {
                let rest = (self.m - q - 1) as u64;
                // strings with a 0 here and all remaining ones further right
                rank += binom_u64(rest, ones_left).unwrap_or(0);
                ones_left -= 1;
            }
        }
        rank
    }

    /// Inverse of [`rank`](Self::rank).
    pub fn unrank(&self, index: u64) -> Result<u64> {
        if index >= self.size {
            return Err(invalid(
                "index",
                format!("{index} outside 0..{}", self.size),
            ));
        }
        let mut idx = index;
        let mut ones_left = self.k as u64;
        let mut x = 0u64;
        for q in 0..self.m {
            if ones_left == 0 {
                break;
            }
            let rest = (self.m - q - 1) as u64;
            let with_zero = binom_u64(rest, ones_left).unwrap_or(0);
            if idx >= with_zero {
                x |= qubit_mask(q, self.m);
                idx -= with_zero;
                ones_left -= 1;
            }
        }
        Ok(x)
    }

    /// All strings of the basis in increasing order.
    pub fn iter(&self) -> WeightIter {
        WeightIter::new(self.m, self.k)
    }

    pub fn states(&self) -> Vec<u64> {
        self.iter().collect()
    }
}

/// Increasing enumeration of fixed-weight strings (Gosper's hack).
#[derive(Debug, Clone)]
pub struct WeightIter {
    next: Option<u64>,
    limit: u64,
}

impl WeightIter {
    fn new(m: usize, k: usize) -> Self {
        let first = if k == 0 { 0 } else { (1u64 << k) - 1 };
        Self {
            next: Some(first),
            limit: 1u64 << m,
        }
    }
}

impl Iterator for WeightIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let x = self.next?;
        self.next = if x == 0 {
            None
        } else {
            let c = x & x.wrapping_neg();
            let r = x + c;
            let y = (((r ^ x) >> 2) / c) | r;
            (y < self.limit).then_some(y)
        };
        Some(x)
    }
}

/// All subsets of a fixed size drawn from `{0, .., universe-1}`.
#[derive(Debug, Clone, Copy)]
pub struct SubsetFamily {
    universe: usize,
    size: usize,
}

impl SubsetFamily {
    pub fn new(universe: usize, size: usize) -> Result<Self> {
        WeightBasis::new(universe, size)?;
        Ok(Self { universe, size })
    }

    pub fn count(&self) -> u64 {
        binom_u64(self.universe as u64, self.size as u64).unwrap_or(u64::MAX)
    }

    /// Subsets as sorted index lists, in lexicographic order of their
    /// indicator strings.
    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        WeightIter::new(self.universe, self.size).map(move |mask| mask_to_indices(mask, self.universe))
    }
}

/// Sorted qubit indices set in `mask`.
pub fn mask_to_indices(mask: u64, m: usize) -> Vec<usize> {
    (0..m).filter(|&q| bit(mask, q, m) == 1).collect()
}

/// Adjacency matrix of the Johnson graph `J(m,k)` on `B_{m,k}`: two strings
/// are adjacent when they differ in exactly two positions.
pub fn johnson_adjacency(m: usize, k: usize) -> Result<CsrMatrix> {
    if k == 0 || k >= m {
        return Err(invalid("k", format!("{k} not in 1..={}", m.saturating_sub(1))));
    }
    let basis = WeightBasis::new(m, k)?;
    let size = basis.size() as usize;
    let mut triplets = Vec::with_capacity(size * k * (m - k));
    for (row, u) in basis.iter().enumerate() {
        for i in (0..m).filter(|&q| bit(u, q, m) == 1) {
            for j in (0..m).filter(|&q| bit(u, q, m) == 0) {
                let v = u ^ qubit_mask(i, m) ^ qubit_mask(j, m);
                triplets.push((row, basis.rank_unchecked(v) as usize, 1.0));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(size, size, triplets))
}

/// `l`-th eigenvalue `k(m-k) - l(m+1-l)` of `J(m,k)`.
pub fn johnson_eigenvalue(m: usize, k: usize, l: usize) -> Result<i64> {
    if k > m {
        return Err(invalid("k", format!("{k} exceeds m = {m}")));
    }
    let lmax = k.min(m - k);
    if l > lmax {
        return Err(invalid("l", format!("{l} not in 0..={lmax}")));
    }
    let (m, k, l) = (m as i64, k as i64, l as i64);
    Ok(k * (m - k) - l * (m + 1 - l))
}

/// Multiplicity `C(m,l) - C(m,l-1)` of [`johnson_eigenvalue`], saturating at
/// `u64::MAX` (reached for `m` above about 66).
pub fn johnson_multiplicity(m: usize, l: usize) -> u64 {
    let upper = binom(m as u64, l as u64);
    let lower = if l == 0 { BigUint::ZERO } else { binom(m as u64, l as u64 - 1) };
    if lower >= upper {
        return 0;
    }
    (upper - lower).to_u64().unwrap_or(u64::MAX)
}

/// Diagonal 0/1 operator over the computational basis of `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalProjector {
    qubits: usize,
    mask: Vec<bool>,
}

impl DiagonalProjector {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn contains(&self, index: u64) -> bool {
        self.mask[index as usize]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_zero(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// Product of two commuting diagonal projectors.
    pub fn and(&self, other: &Self) -> Self {
        Self {
            qubits: self.qubits,
            mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect(),
        }
    }
}

/// Projector onto the strings whose restriction to `subset` has Hamming
/// weight `weight`. A negative weight gives the zero operator.
pub fn sector_projector(num_qubits: usize, subset: &[usize], weight: i64) -> DiagonalProjector {
    assert!(num_qubits <= 24, "dense diagonal limited to 24 qubits");
    let dim = 1usize << num_qubits;
    let sub_mask: u64 = subset.iter().map(|&q| qubit_mask(q, num_qubits)).fold(0, |a, b| a | b);
    let mask = (0..dim as u64)
        .map(|x| weight >= 0 && (x & sub_mask).count_ones() as i64 == weight)
        .collect();
    DiagonalProjector {
        qubits: num_qubits,
        mask,
    }
}

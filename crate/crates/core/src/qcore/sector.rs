//! Operators stored as blocks between Hamming-weight sectors.
//!
//! Block `(w1, w2)` maps sector `w2` into sector `w1`; within a sector the
//! basis is the lexicographic order of [`WeightBasis`].

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use super::eigen::{eig_top2_with, symmetric_eigenvalues_desc, EigOptions, HermitianOperator};
use super::state::PureState;
use super::C64;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::symcomb::WeightBasis;

#[derive(Debug, Clone)]
pub struct SectorOperator {
    qubits: usize,
    bases: Vec<WeightBasis>,
    blocks: BTreeMap<(usize, usize), CsrMatrix>,
    index: OnceLock<Vec<(u32, u32)>>,
}

impl PartialEq for SectorOperator {
    fn eq(&self, other: &Self) -> bool {
        self.qubits == other.qubits && self.blocks == other.blocks
    }
}

impl SectorOperator {
    pub fn zero(qubits: usize) -> Result<Self> {
        let bases = (0..=qubits)
            .map(|w| WeightBasis::new(qubits, w))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            qubits,
            bases,
            blocks: BTreeMap::new(),
            index: OnceLock::new(),
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn basis(&self, w: usize) -> &WeightBasis {
        &self.bases[w]
    }

    pub fn sector_dim(&self, w: usize) -> usize {
        self.bases[w].size() as usize
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &CsrMatrix)> {
        self.blocks.iter()
    }

    pub fn block(&self, row_w: usize, col_w: usize) -> Option<&CsrMatrix> {
        self.blocks.get(&(row_w, col_w))
    }

    /// Adds `coeff * block` to block `(row_w, col_w)`.
    pub fn add_block(&mut self, row_w: usize, col_w: usize, block: &CsrMatrix, coeff: f64) {
        assert_eq!(block.rows(), self.sector_dim(row_w));
        assert_eq!(block.cols(), self.sector_dim(col_w));
        let scaled = block.scaled(coeff);
        let entry = self.blocks.entry((row_w, col_w));
        match entry {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&scaled);
                e.insert(sum);
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(scaled);
            }
        }
    }

    /// Adds `coeff * Z^w`. Weights outside `0..=qubits` are ignored.
    pub fn add_projector(&mut self, w: i64, coeff: f64) {
        if w < 0 || w as usize > self.qubits || coeff == 0.0 {
            return;
        }
        let w = w as usize;
        let id = CsrMatrix::identity(self.sector_dim(w));
        self.add_block(w, w, &id, coeff);
    }

    /// Adds entries given as `(row rank, col rank, value)` to block `(row_w, col_w)`.
    pub fn add_triplets<I>(&mut self, row_w: usize, col_w: usize, triplets: I)
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let b = CsrMatrix::from_triplets(self.sector_dim(row_w), self.sector_dim(col_w), triplets);
        self.add_block(row_w, col_w, &b, 1.0);
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.qubits, other.qubits);
        let mut out = self.clone();
        out.index = OnceLock::new();
        for (&(r, c), b) in &other.blocks {
            out.add_block(r, c, b, 1.0);
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for b in out.blocks.values_mut() {
            *b = b.scaled(s);
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.qubits).expect("same size");
        for (&(r, c), b) in &self.blocks {
            out.blocks.insert((c, r), b.transpose());
        }
        out
    }

    /// `X^{(x)m} A X^{(x)m}`: sector `w` is mapped to sector `m - w`.
    pub fn conjugate_x(&self) -> Self {
        let m = self.qubits;
        let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
        let perm: Vec<Vec<usize>> = (0..=m)
            .map(|w| {
                let target = &self.bases[m - w];
                self.bases[w]
                    .iter()
                    .map(|x| target.rank_unchecked(x ^ full) as usize)
                    .collect()
            })
            .collect();
        let mut out = Self::zero(m).expect("same size");
        for (&(r, c), b) in &self.blocks {
            let t = b.triplets().map(|(i, j, v)| (perm[r][i], perm[c][j], v));
            out.add_triplets(m - r, m - c, t);
        }
        out
    }

    /// Entry `<x|A|y>` for computational basis strings.
    pub fn entry(&self, x: u64, y: u64) -> f64 {
        let (wx, wy) = (x.count_ones() as usize, y.count_ones() as usize);
        match self.blocks.get(&(wx, wy)) {
            Some(b) => b.get(
                self.bases[wx].rank_unchecked(x) as usize,
                self.bases[wy].rank_unchecked(y) as usize,
            ),
            None => 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(CsrMatrix::max_abs).fold(0.0, f64::max)
    }

    /// Entrywise sup-norm distance.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.plus(&other.scaled(-1.0)).max_abs()
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.max_abs_diff(&self.transpose())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.qubits, other.qubits);
        let mut out = Self::zero(self.qubits).expect("same size");
        for (&(r, k), a) in &self.blocks {
            for (&(k2, c), b) in other.blocks.range((k, 0)..=(k, self.qubits)) {
                debug_assert_eq!(k, k2);
                out.add_block(r, c, &a.matmul(b), 1.0);
            }
        }
        out
    }

    fn index(&self) -> &[(u32, u32)] {
        self.index.get_or_init(|| {
            assert!(self.qubits <= super::MAX_DENSE_QUBITS);
            (0..1u64 << self.qubits)
                .map(|x| {
                    let w = x.count_ones() as usize;
                    (w as u32, self.bases[w].rank_unchecked(x) as u32)
                })
                .collect()
        })
    }

    /// Matrix-vector product in the computational basis.
    pub fn apply_computational(&self, x: &[C64]) -> Vec<C64> {
        let index = self.index();
        let m = self.qubits;
        // gather per sector
        let mut sectors: Vec<Vec<C64>> = (0..=m).map(|w| vec![C64::new(0.0, 0.0); self.sector_dim(w)]).collect();
        for (i, &(w, r)) in index.iter().enumerate() {
            sectors[w as usize][r as usize] = x[i];
        }
        let mut out_sectors: Vec<Vec<C64>> =
            (0..=m).map(|w| vec![C64::new(0.0, 0.0); self.sector_dim(w)]).collect();
        for (&(r, c), b) in &self.blocks {
            for (o, v) in out_sectors[r].iter_mut().zip(b.matvec_complex(&sectors[c])) {
                *o += v;
            }
        }
        index
            .iter()
            .map(|&(w, r)| out_sectors[w as usize][r as usize])
            .collect()
    }

    /// `<psi|A|psi>` (real part; the operators here are symmetric).
    pub fn expectation(&self, psi: &PureState) -> f64 {
        let a = self.apply_computational(psi.amplitudes());
        psi.amplitudes().iter().zip(&a).map(|(x, y)| (x.conj() * y).re).sum()
    }

    /// Dense matrix in the computational basis.
    pub fn to_dense(&self) -> DMatrix<f64> {
        assert!(self.qubits <= 12, "dense conversion limited to 12 qubits");
        let d = 1usize << self.qubits;
        let mut m = DMatrix::zeros(d, d);
        for (&(r, c), b) in &self.blocks {
            let rs = self.bases[r].states();
            let cs = self.bases[c].states();
            for (i, j, v) in b.triplets() {
                m[(rs[i] as usize, cs[j] as usize)] += v;
            }
        }
        m
    }

    /// Builds from a dense computational-basis matrix, keeping nonzero entries.
    pub fn from_dense(qubits: usize, m: &DMatrix<f64>) -> Result<Self> {
        let d = 1usize << qubits;
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.nrows(),
            });
        }
        let mut out = Self::zero(qubits)?;
        let mut groups: BTreeMap<(usize, usize), Vec<(usize, usize, f64)>> = BTreeMap::new();
        for x in 0..d as u64 {
            for y in 0..d as u64 {
                let v = m[(x as usize, y as usize)];
                if v != 0.0 {
                    let (wx, wy) = (x.count_ones() as usize, y.count_ones() as usize);
                    groups.entry((wx, wy)).or_default().push((
                        out.bases[wx].rank_unchecked(x) as usize,
                        out.bases[wy].rank_unchecked(y) as usize,
                        v,
                    ));
                }
            }
        }
        for ((r, c), t) in groups {
            out.add_triplets(r, c, t);
        }
        Ok(out)
    }

    /// Sets of sectors coupled by off-diagonal blocks, each sorted. Sectors
    /// with no block at all are omitted.
    pub fn coupled_groups(&self) -> Vec<Vec<usize>> {
        let m = self.qubits;
        let mut parent: Vec<usize> = (0..=m).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut present = vec![false; m + 1];
        for (&(r, c), b) in &self.blocks {
            if b.nnz() == 0 {
                continue;
            }
            present[r] = true;
            present[c] = true;
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            parent[a] = b;
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for w in (0..=m).filter(|&w| present[w]) {
            let root = find(&mut parent, w);
            groups.entry(root).or_default().push(w);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }

    /// Restriction to the direct sum of `sectors` (in the given order).
    pub fn restrict(&self, sectors: &[usize]) -> CsrMatrix {
        let mut offsets = Vec::with_capacity(sectors.len());
        let mut total = 0;
        for &w in sectors {
            offsets.push(total);
            total += self.sector_dim(w);
        }
        let mut triplets = Vec::new();
        for (a, &r) in sectors.iter().enumerate() {
            for (b, &c) in sectors.iter().enumerate() {
                if let Some(block) = self.blocks.get(&(r, c)) {
                    triplets.extend(block.triplets().map(|(i, j, v)| (offsets[a] + i, offsets[b] + j, v)));
                }
            }
        }
        CsrMatrix::from_triplets(total, total, triplets)
    }

    fn uncovered_dim(&self) -> usize {
        let covered: usize = self
            .coupled_groups()
            .iter()
            .flatten()
            .map(|&w| self.sector_dim(w))
            .sum();
        (1usize << self.qubits.min(63)) - covered
    }

    /// Whole spectrum, largest first, by dense diagonalization of every
    /// coupled group.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let mut vals = Vec::new();
        for g in self.coupled_groups() {
            let block = self.restrict(&g);
            if block.rows() > 4096 {
                return Err(Error::TooLarge {
                    size: block.rows(),
                    limit: 4096,
                });
            }
            vals.extend(symmetric_eigenvalues_desc(&block.to_dense()));
        }
        vals.extend(std::iter::repeat_n(0.0, self.uncovered_dim()));
        vals.sort_by(|a, b| b.total_cmp(a));
        Ok(vals)
    }

    /// Two largest eigenvalues, combining per-group results.
    pub fn top2(&self, opts: &EigOptions) -> Result<(f64, f64)> {
        let mut cands = Vec::new();
        for g in self.coupled_groups() {
            let block = self.restrict(&g);
            if block.rows() == 1 {
                cands.push(block.get(0, 0));
            } else {
                let (a, b) = eig_top2_with(&block, opts)?;
                cands.push(a);
                cands.push(b);
            }
        }
        let zeros = self.uncovered_dim().min(2);
        cands.extend(std::iter::repeat_n(0.0, zeros));
        cands.sort_by(|a, b| b.total_cmp(a));
        Ok((cands[0], cands[1]))
    }
}

impl HermitianOperator for SectorOperator {
    fn dim(&self) -> usize {
        1 << self.qubits
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.apply_computational(x)
    }

    fn norm_bound(&self) -> f64 {
        (0..=self.qubits)
            .map(|w| {
                let mut sums = vec![0.0; self.sector_dim(w)];
                for (&(_, _), b) in self.blocks.range((w, 0)..=(w, self.qubits)) {
                    for (i, s) in sums.iter_mut().enumerate() {
                        *s += b.row(i).map(|(_, v)| v.abs()).sum::<f64>();
                    }
                }
                sums.into_iter().fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    fn hermiticity_defect(&self) -> f64 {
        self.symmetry_defect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcomb::johnson_adjacency;

    #[test]
    fn dense_round_trip_and_conjugation() {
        let mut op = SectorOperator::zero(4).unwrap();
        op.add_projector(0, 0.25);
        op.add_block(2, 2, &johnson_adjacency(4, 2).unwrap(), 0.5);
        op.add_triplets(1, 3, vec![(0, 1, 0.3), (2, 3, -0.7)]);
        let dense = op.to_dense();
        let back = SectorOperator::from_dense(4, &dense).unwrap();
        assert!(op.max_abs_diff(&back) == 0.0);

        let x = DMatrix::from_fn(16, 16, |i, j| if i == 15 - j { 1.0 } else { 0.0 });
        let want = &x * &dense * &x;
        assert_eq!(op.conjugate_x().to_dense(), want);
        assert_eq!(op.transpose().to_dense(), dense.transpose());
        assert_eq!(op.matmul(&op).to_dense(), &dense * &dense);
    }

    #[test]
    fn apply_matches_dense() {
        let mut op = SectorOperator::zero(3).unwrap();
        op.add_projector(1, 2.0);
        op.add_triplets(0, 3, vec![(0, 0, 1.5)]);
        op.add_triplets(3, 0, vec![(0, 0, 1.5)]);
        let x: Vec<C64> = (0..8).map(|i| C64::new(i as f64, 1.0 - i as f64)).collect();
        let y = op.apply_computational(&x);
        let d = op.to_dense();
        for i in 0..8 {
            let want: C64 = (0..8).map(|j| x[j] * d[(i, j)]).sum();
            assert!((want - y[i]).norm() < 1e-14);
        }
        assert_eq!(op.coupled_groups(), vec![vec![0, 3], vec![1]]);
        let spec = op.spectrum().unwrap();
        assert_eq!(spec.len(), 8);
        assert!((spec[0] - 2.0).abs() < 1e-12);
    }
}

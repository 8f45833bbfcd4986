//! Spectrum permutations `π_{Σ,q}(i) = Σ(i − q)` and hashings built on them.

use alloc::sync::Arc;
use alloc::vec::Vec;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::filters::BucketFilter;
use crate::grid::{DenseSignal, Domain, Grid, GridIndex, MAX_DIM};
use crate::math::RootTable;

type Matrix = [[usize; MAX_DIM]; MAX_DIM];

/// Determinant parity of the top-left `d×d` block, by elimination over GF(2).
fn det_is_odd(m: &Matrix, d: usize) -> bool {
    let mut rows: [u8; MAX_DIM] = [0; MAX_DIM];
    for (r, row) in rows.iter_mut().enumerate().take(d) {
        for c in 0..d {
            *row |= ((m[r][c] & 1) as u8) << c;
        }
    }
    for col in 0..d {
        let Some(p) = (col..d).find(|&r| rows[r] >> col & 1 == 1) else {
            return false;
        };
        rows.swap(col, p);
        for r in 0..d {
            if r != col && rows[r] >> col & 1 == 1 {
                rows[r] ^= rows[col];
            }
        }
    }
    true
}

/// Inverse of an odd number modulo `2^64` (hence modulo any power of two).
fn odd_inverse(a: usize) -> usize {
    debug_assert!(a & 1 == 1);
    let mut x = a; // correct to 3 bits
    for _ in 0..6 {
        x = x.wrapping_mul(2usize.wrapping_sub(a.wrapping_mul(x)));
    }
    x
}

/// Inverse mod `n` (a power of two) of a matrix with odd determinant.
fn invert(m: &Matrix, d: usize, n: usize) -> Matrix {
    let mask = n - 1;
    let mut a = *m;
    let mut inv = [[0usize; MAX_DIM]; MAX_DIM];
    for (s, row) in inv.iter_mut().enumerate().take(d) {
        row[s] = 1;
    }
    for col in 0..d {
        // an odd pivot exists in every column of the reduced matrix
        let p = (col..d)
            .find(|&r| a[r][col] & 1 == 1)
            .expect("odd determinant");
        a.swap(col, p);
        inv.swap(col, p);
        let scale = odd_inverse(a[col][col]) & mask;
        for c in 0..d {
            a[col][c] = a[col][c].wrapping_mul(scale) & mask;
            inv[col][c] = inv[col][c].wrapping_mul(scale) & mask;
        }
        for r in 0..d {
            if r == col || a[r][col] == 0 {
                continue;
            }
            let f = a[r][col];
            for c in 0..d {
                a[r][c] = a[r][c].wrapping_sub(f.wrapping_mul(a[col][c])) & mask;
                inv[r][c] = inv[r][c].wrapping_sub(f.wrapping_mul(inv[col][c])) & mask;
            }
        }
    }
    inv
}

fn mat_vec(m: &Matrix, v: &GridIndex, n: usize, transpose: bool) -> GridIndex {
    let d = v.dim();
    let mut out = GridIndex::zero(d);
    for r in 0..d {
        let mut acc = 0usize;
        for c in 0..d {
            let e = if transpose { m[c][r] } else { m[r][c] };
            acc = acc.wrapping_add(e.wrapping_mul(v.get(c)));
        }
        out.coords_mut()[r] = acc & (n - 1);
    }
    out
}

/// `π_{Σ,q}` with `Σ` invertible mod `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumPermutation {
    grid: Grid,
    sigma: Matrix,
    sigma_inv: Matrix,
    q: GridIndex,
}

impl SpectrumPermutation {
    /// `Σ` uniform among odd-determinant matrices mod `n`, `q` uniform.
    pub fn sample<R: RngCore + ?Sized>(grid: Grid, rng: &mut R) -> Self {
        let (n, d) = (grid.n(), grid.d());
        let mut sigma = [[0usize; MAX_DIM]; MAX_DIM];
        loop {
            for row in sigma.iter_mut().take(d) {
                for e in row.iter_mut().take(d) {
                    *e = rng.gen_range(0..n);
                }
            }
            if det_is_odd(&sigma, d) {
                break;
            }
        }
        let mut q = GridIndex::zero(d);
        for c in q.coords_mut() {
            *c = rng.gen_range(0..n);
        }
        let sigma_inv = invert(&sigma, d, n);
        SpectrumPermutation {
            grid,
            sigma,
            sigma_inv,
            q,
        }
    }

    pub fn identity(grid: Grid) -> Self {
        let d = grid.d();
        let mut sigma = [[0usize; MAX_DIM]; MAX_DIM];
        for (s, row) in sigma.iter_mut().enumerate().take(d) {
            row[s] = 1;
        }
        SpectrumPermutation {
            grid,
            sigma,
            sigma_inv: sigma,
            q: GridIndex::zero(d),
        }
    }

    /// Builds `π` from explicit rows of `Σ` and shift `q`.
    pub fn from_parts(grid: Grid, rows: &[Vec<usize>], q: GridIndex) -> Result<Self> {
        let (n, d) = (grid.n(), grid.d());
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::param(alloc::format!("Σ must be {d}x{d}")));
        }
        grid.check(&q)?;
        let mut sigma = [[0usize; MAX_DIM]; MAX_DIM];
        for (r, row) in rows.iter().enumerate() {
            for (c, &e) in row.iter().enumerate() {
                sigma[r][c] = e % n;
            }
        }
        if !det_is_odd(&sigma, d) {
            return Err(Error::param("Σ has even determinant"));
        }
        let sigma_inv = invert(&sigma, d, n);
        Ok(SpectrumPermutation {
            grid,
            sigma,
            sigma_inv,
            q,
        })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn q(&self) -> &GridIndex {
        &self.q
    }

    /// Entry `Σ[r][c]`.
    #[inline]
    pub fn sigma(&self, r: usize, c: usize) -> usize {
        self.sigma[r][c]
    }

    /// Entry `Σ^{-1}[r][c]`.
    #[inline]
    pub fn sigma_inv(&self, r: usize, c: usize) -> usize {
        self.sigma_inv[r][c]
    }

    /// `Σv`.
    pub fn apply_sigma(&self, v: &GridIndex) -> GridIndex {
        mat_vec(&self.sigma, v, self.grid.n(), false)
    }

    /// `Σᵀv`.
    pub fn apply_sigma_t(&self, v: &GridIndex) -> GridIndex {
        mat_vec(&self.sigma, v, self.grid.n(), true)
    }

    /// `Σ^{-1}v`.
    pub fn apply_sigma_inv(&self, v: &GridIndex) -> GridIndex {
        mat_vec(&self.sigma_inv, v, self.grid.n(), false)
    }

    /// `Σ^{-T}v`.
    pub fn apply_sigma_inv_t(&self, v: &GridIndex) -> GridIndex {
        mat_vec(&self.sigma_inv, v, self.grid.n(), true)
    }

    /// `π(i) = Σ(i − q)`.
    pub fn permute(&self, i: &GridIndex) -> GridIndex {
        self.apply_sigma(&i.sub(&self.q, self.grid.n()))
    }

    /// `π^{-1}(p) = Σ^{-1}p + q`.
    pub fn unpermute(&self, p: &GridIndex) -> GridIndex {
        self.apply_sigma_inv(p).add(&self.q, self.grid.n())
    }
}

/// See [`SpectrumPermutation::sample`].
pub fn sample_permutation<R: RngCore + ?Sized>(grid: Grid, rng: &mut R) -> SpectrumPermutation {
    SpectrumPermutation::sample(grid, rng)
}

/// `π_{Σ,q}(i)`.
pub fn permute_index(perm: &SpectrumPermutation, i: &GridIndex) -> GridIndex {
    perm.permute(i)
}

/// `(P_{Σ,a,q} x̂)_i = x̂_{Σᵀ(i−a)} ω^{iᵀΣq}`.
pub fn apply_p(
    perm: &SpectrumPermutation,
    a: &GridIndex,
    xhat: &DenseSignal,
) -> Result<DenseSignal> {
    let grid = *xhat.grid();
    grid.same(perm.grid())?;
    grid.check(a)?;
    let n = grid.n();
    let roots = RootTable::new(n);
    let sq = perm.apply_sigma(perm.q());
    let values = grid
        .indices()
        .map(|i| {
            let src = perm.apply_sigma_t(&i.sub(a, n));
            xhat.get(&src) * roots.pow(grid.dot(&i, &sq) as u64)
        })
        .collect();
    DenseSignal::from_values(grid, values, Domain::Frequency)
}

/// `H = (π, B, F)`: a permutation together with the bucketing filter.
#[derive(Debug, Clone)]
pub struct Hashing {
    perm: SpectrumPermutation,
    filter: Arc<BucketFilter>,
}

impl Hashing {
    pub fn new(perm: SpectrumPermutation, filter: Arc<BucketFilter>) -> Result<Self> {
        perm.grid().same(filter.grid())?;
        Ok(Hashing { perm, filter })
    }

    /// Random hashing sharing `filter`.
    pub fn sample<R: RngCore + ?Sized>(filter: Arc<BucketFilter>, rng: &mut R) -> Self {
        let perm = SpectrumPermutation::sample(*filter.grid(), rng);
        Hashing { perm, filter }
    }

    #[inline]
    pub fn perm(&self) -> &SpectrumPermutation {
        &self.perm
    }

    #[inline]
    pub fn filter(&self) -> &BucketFilter {
        &self.filter
    }

    pub fn filter_arc(&self) -> &Arc<BucketFilter> {
        &self.filter
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        self.perm.grid()
    }

    /// Buckets per axis.
    #[inline]
    pub fn b(&self) -> usize {
        self.filter.b()
    }

    #[inline]
    pub fn buckets(&self) -> usize {
        self.filter.buckets()
    }

    /// Bucket of a permuted location: `round(p·b/n) mod b` per coordinate.
    pub fn bucket_of_permuted(&self, p: &GridIndex) -> GridIndex {
        let (n, b) = (self.grid().n(), self.b());
        let mut h = *p;
        for c in h.coords_mut() {
            *c = ((*c * b + n / 2) / n) % b;
        }
        h
    }

    /// `h(i)`.
    pub fn bucket_of(&self, i: &GridIndex) -> GridIndex {
        self.bucket_of_permuted(&self.perm.permute(i))
    }

    /// Row-major flat index of a bucket in `[b]^d`.
    pub fn bucket_flat(&self, h: &GridIndex) -> usize {
        let b = self.b();
        h.coords().iter().fold(0, |acc, &c| acc * b + c)
    }

    /// Bucket from its flat index.
    pub fn bucket_index(&self, mut flat: usize) -> GridIndex {
        let (b, d) = (self.b(), self.grid().d());
        let mut h = GridIndex::zero(d);
        for s in (0..d).rev() {
            h.coords_mut()[s] = flat % b;
            flat /= b;
        }
        h
    }

    /// Bucket center `(n/b)·h` in `[n]^d`.
    pub fn bucket_center(&self, h: &GridIndex) -> GridIndex {
        h.scale(self.grid().n() / self.b(), self.grid().n())
    }

    /// `o_i(j) = π(j) − (n/b)h(i)`.
    pub fn offset(&self, i: &GridIndex, j: &GridIndex) -> GridIndex {
        let n = self.grid().n();
        self.perm
            .permute(j)
            .sub(&self.bucket_center(&self.bucket_of(i)), n)
    }

    /// `G_{o_i(i)}`, the filter gain of `i` in its own bucket.
    pub fn self_gain(&self, i: &GridIndex) -> f64 {
        self.filter.time_value(&self.offset(i, i))
    }
}

/// `h(i)` under `hashing`.
pub fn bucket_of(hashing: &Hashing, i: &GridIndex) -> GridIndex {
    hashing.bucket_of(i)
}

/// `o_i(j)` under `hashing`.
pub fn offset(hashing: &Hashing, i: &GridIndex, j: &GridIndex) -> GridIndex {
    hashing.offset(i, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::{forward_dft, inverse_dft};
    use crate::math::root;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn det2(p: &SpectrumPermutation) -> i64 {
        let e = |r, c| p.sigma(r, c) as i64;
        e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0)
    }

    #[test]
    fn odd_inverse_is_inverse() {
        for a in (1..1000usize).step_by(2) {
            assert_eq!(a.wrapping_mul(odd_inverse(a)), 1);
        }
    }

    #[test]
    fn scalar_sigma_is_odd() {
        let g = Grid::new(64, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = BTreeSet::new();
        for _ in 0..2000 {
            let p = sample_permutation(g, &mut rng);
            assert_eq!(p.sigma(0, 0) % 2, 1);
            seen.insert(p.sigma(0, 0));
        }
        assert_eq!(seen.len(), 32);
    }

    #[test]
    fn determinant_odd_and_inverse_correct_2d() {
        let g = Grid::new(16, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let p = sample_permutation(g, &mut rng);
            assert_eq!(det2(&p).rem_euclid(2), 1);
            for s in 0..2 {
                let e = GridIndex::unit(2, s);
                assert_eq!(p.apply_sigma(&p.apply_sigma_inv(&e)), e);
                assert_eq!(p.apply_sigma_inv_t(&p.apply_sigma_t(&e)), e);
            }
        }
    }

    #[test]
    fn inverse_correct_4d() {
        let g = Grid::new(8, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = sample_permutation(g, &mut rng);
            for i in g.indices().step_by(37) {
                assert_eq!(p.unpermute(&p.permute(&i)), i);
            }
        }
    }

    #[test]
    fn limited_independence_2d() {
        // Σv is uniform over the 192 vectors of [16]² with an odd coordinate when v has one
        let g = Grid::new(16, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let diff = GridIndex::new(&[3, 6]);
        let trials = 100_000;
        let radii = [1usize, 2, 4];
        let mut hits = [0usize; 3];
        for _ in 0..trials {
            let p = sample_permutation(g, &mut rng);
            let r = g.linf(&p.apply_sigma(&diff));
            for (h, &t) in hits.iter_mut().zip(&radii) {
                if r <= t {
                    *h += 1;
                }
            }
        }
        for (h, &t) in hits.iter().zip(&radii) {
            let ball: Vec<GridIndex> = g.indices().filter(|v| g.linf(v) <= t).collect();
            let odd = ball
                .iter()
                .filter(|v| v.coords().iter().any(|c| c % 2 == 1))
                .count();
            let exact = odd as f64 / 192.0;
            let p = *h as f64 / trials as f64;
            assert!(
                (p - exact).abs() < 4.0 * (exact / trials as f64).sqrt(),
                "t={t} p={p} exact={exact}"
            );
            let bound = 2.0 * (2.0 * t as f64 / 16.0).powi(2);
            if t >= 2 {
                assert!(exact <= bound, "t={t}");
            } else {
                // the ball of radius 1 is too coarse for the stated constant
                assert!(exact > bound);
            }
        }
    }

    #[test]
    fn permute_basics_and_bijection() {
        let g = Grid::new(8, 2).unwrap();
        let id = SpectrumPermutation::identity(g);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = sample_permutation(g, &mut rng);
        assert!(p.permute(p.q()).is_zero());
        let mut image = BTreeSet::new();
        for i in g.indices() {
            assert_eq!(id.permute(&i), i);
            image.insert(p.permute(&i));
        }
        assert_eq!(image.len(), 64);
    }

    #[test]
    fn from_parts_rejects_even_determinant() {
        let g = Grid::new(8, 2).unwrap();
        let rows = [alloc::vec![2, 4], alloc::vec![1, 3]];
        assert!(SpectrumPermutation::from_parts(g, &rows, GridIndex::zero(2)).is_err());
        let rows = [alloc::vec![1, 4], alloc::vec![2, 3]];
        assert!(SpectrumPermutation::from_parts(g, &rows, GridIndex::zero(2)).is_ok());
    }

    fn random_signal(g: Grid, rng: &mut ChaCha8Rng) -> DenseSignal {
        let v = (0..g.size())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        DenseSignal::from_values(g, v, Domain::Time).unwrap()
    }

    #[test]
    fn apply_p_identity_and_isometry() {
        let g = Grid::new(8, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let xh = forward_dft(&random_signal(g, &mut rng)).unwrap();
        let same = apply_p(&SpectrumPermutation::identity(g), &GridIndex::zero(1), &xh).unwrap();
        assert_eq!(same.values(), xh.values());
        let p = sample_permutation(g, &mut rng);
        let moved = apply_p(&p, &GridIndex::new(&[3]), &xh).unwrap();
        assert!((moved.norm_l2() - xh.norm_l2()).abs() < 1e-10);
    }

    #[test]
    fn permutation_identity_pointwise() {
        // F^{-1}(P x̂)_{π(i)} = x_i ω^{aᵀΣi}
        for (n, d) in [(8, 1), (32, 1), (8, 2)] {
            let g = Grid::new(n, d).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7 + n as u64);
            for _ in 0..5 {
                let x = random_signal(g, &mut rng);
                let p = sample_permutation(g, &mut rng);
                let mut a = GridIndex::zero(d);
                a.coords_mut()
                    .iter_mut()
                    .for_each(|c| *c = rng.gen_range(0..n));
                let y = inverse_dft(&apply_p(&p, &a, &forward_dft(&x).unwrap()).unwrap()).unwrap();
                for i in g.indices() {
                    let phase = root(g.dot(&a, &p.apply_sigma(&i)) as u64, n as u64);
                    let diff = y.get(&p.permute(&i)) - x.get(&i) * phase;
                    assert!(diff.norm() < 1e-9);
                }
            }
        }
    }

    fn hashing(n: usize, d: usize, b: usize, seed: u64) -> Hashing {
        let g = Grid::new(n, d).unwrap();
        let f = Arc::new(BucketFilter::new(g, b.pow(d as u32), 2 * d.max(2)).unwrap());
        Hashing::sample(f, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn bucket_rounding() {
        let h = hashing(64, 1, 8, 8);
        assert!(h.bucket_of_permuted(&GridIndex::zero(1)).is_zero());
        assert_eq!(h.bucket_of_permuted(&GridIndex::new(&[36])).get(0), 5);
        assert_eq!(h.bucket_of_permuted(&GridIndex::new(&[63])).get(0), 0);
        for i in h.grid().indices() {
            let c = h.bucket_center(&h.bucket_of(&i));
            let o = h.perm().permute(&i).sub(&c, 64);
            assert!(h.grid().linf(&o) <= 8);
            assert!(h.grid().linf(&o) <= 4, "rounding is to nearest");
        }
    }

    #[test]
    fn bucket_flat_roundtrip() {
        let h = hashing(32, 2, 8, 9);
        for f in 0..64 {
            assert_eq!(h.bucket_flat(&h.bucket_index(f)), f);
        }
    }

    #[test]
    fn offsets() {
        let h = hashing(64, 2, 8, 10);
        let floor = h.filter().main_lobe_floor();
        for i in h.grid().indices() {
            assert!(h.self_gain(&i) >= floor);
            let j = GridIndex::new(&[5, 40]);
            let expect = h
                .perm()
                .permute(&j)
                .sub(&h.bucket_center(&h.bucket_of(&i)), 64);
            assert_eq!(offset(&h, &i, &j), expect);
        }
        let g = Grid::new(16, 1).unwrap();
        let f = Arc::new(BucketFilter::new(g, 16, 2).unwrap());
        let h = Hashing::new(SpectrumPermutation::identity(g), f).unwrap();
        for i in g.indices() {
            for j in g.indices() {
                assert_eq!(h.offset(&i, &j), j.sub(&i, 16));
            }
        }
    }
}

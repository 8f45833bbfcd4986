//! Index arithmetic over `Z_n^d` and the containers every other module shares.
//!
//! Signed indices in `[-n/2, n/2)` are always stored as residues in `[0, n)`.
//! Flat indices are row-major with the last coordinate varying fastest.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

/// Largest supported dimension.
pub const MAX_DIM: usize = 4;

/// Shape of the torus `[n]^d`. `n` is a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
    d: usize,
}

impl Grid {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::param(alloc::format!(
                "n={n} must be a power of two >= 2"
            )));
        }
        if d == 0 || d > MAX_DIM {
            return Err(Error::param(alloc::format!(
                "d={d} must be in 1..={MAX_DIM}"
            )));
        }
        if (n as u128).pow(d as u32) > (1u128 << 40) {
            return Err(Error::param("n^d exceeds 2^40"));
        }
        Ok(Grid { n, d })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// `N = n^d`.
    #[inline]
    pub fn size(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    #[inline]
    pub fn log2_n(&self) -> u32 {
        math::log2_exact(self.n)
    }

    /// `log2 N`.
    pub fn log2_size(&self) -> f64 {
        (self.log2_n() as f64) * self.d as f64
    }

    #[inline]
    pub fn mask(&self) -> usize {
        self.n - 1
    }

    pub fn flat(&self, i: &GridIndex) -> usize {
        debug_assert_eq!(i.dim(), self.d);
        i.coords()
            .iter()
            .fold(0, |acc, &c| acc * self.n + (c & self.mask()))
    }

    pub fn index(&self, mut flat: usize) -> GridIndex {
        let mut c = [0usize; MAX_DIM];
        for s in (0..self.d).rev() {
            c[s] = flat & self.mask();
            flat >>= self.log2_n();
        }
        GridIndex { c, d: self.d as u8 }
    }

    pub fn contains(&self, i: &GridIndex) -> bool {
        i.dim() == self.d && i.coords().iter().all(|&c| c < self.n)
    }

    pub fn check(&self, i: &GridIndex) -> Result<()> {
        if self.contains(i) {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: (self.n, self.d),
                found: (i.coords().iter().max().map_or(0, |m| m + 1), i.dim()),
            })
        }
    }

    pub(crate) fn same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: (self.n, self.d),
                found: (other.n, other.d),
            })
        }
    }

    /// Iterates all `N` indices in flat order.
    pub fn indices(&self) -> impl Iterator<Item = GridIndex> + '_ {
        (0..self.size()).map(move |f| self.index(f))
    }

    /// Circular distance of a residue to zero, `min(r, n - r)`.
    #[inline]
    pub fn circ(&self, r: usize) -> usize {
        let r = r & self.mask();
        r.min(self.n - r)
    }

    /// `‖i‖_∞` under circular distance.
    pub fn linf(&self, i: &GridIndex) -> usize {
        i.coords().iter().map(|&c| self.circ(c)).max().unwrap_or(0)
    }

    /// Signed representative in `[-n/2, n/2)`.
    #[inline]
    pub fn signed(&self, r: usize) -> i64 {
        let r = (r & self.mask()) as i64;
        if r >= (self.n / 2) as i64 {
            r - self.n as i64
        } else {
            r
        }
    }

    #[inline]
    pub fn wrap(&self, v: i64) -> usize {
        (v.rem_euclid(self.n as i64)) as usize
    }

    /// Integer dot product `iᵀj mod n`.
    pub fn dot(&self, i: &GridIndex, j: &GridIndex) -> usize {
        i.coords()
            .iter()
            .zip(j.coords())
            .fold(0usize, |acc, (&a, &b)| acc.wrapping_add(a.wrapping_mul(b)))
            & self.mask()
    }
}

/// An element of `[n]^d`, stored as residues. Copyable, at most [`MAX_DIM`] coordinates.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridIndex {
    c: [usize; MAX_DIM],
    d: u8,
}

impl GridIndex {
    /// Builds an index from raw coordinates; they are not reduced.
    pub fn new(coords: &[usize]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "dimension out of range"
        );
        let mut c = [0usize; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        GridIndex {
            c,
            d: coords.len() as u8,
        }
    }

    /// Builds an index from signed coordinates reduced mod `n`.
    pub fn from_signed(coords: &[i64], n: usize) -> Self {
        let mut c = [0usize; MAX_DIM];
        for (dst, &v) in c.iter_mut().zip(coords) {
            *dst = v.rem_euclid(n as i64) as usize;
        }
        GridIndex {
            c,
            d: coords.len() as u8,
        }
    }

    pub fn zero(d: usize) -> Self {
        GridIndex {
            c: [0; MAX_DIM],
            d: d as u8,
        }
    }

    pub fn ones(d: usize) -> Self {
        let mut c = [0; MAX_DIM];
        c[..d].iter_mut().for_each(|v| *v = 1);
        GridIndex { c, d: d as u8 }
    }

    /// Unit vector `e_s` (0-based `s`).
    pub fn unit(d: usize, s: usize) -> Self {
        let mut c = [0; MAX_DIM];
        c[s] = 1;
        GridIndex { c, d: d as u8 }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d as usize
    }

    #[inline]
    pub fn coords(&self) -> &[usize] {
        &self.c[..self.d as usize]
    }

    #[inline]
    pub fn coords_mut(&mut self) -> &mut [usize] {
        &mut self.c[..self.d as usize]
    }

    #[inline]
    pub fn get(&self, s: usize) -> usize {
        self.c[s]
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|&c| c == 0)
    }

    fn zip(&self, other: &GridIndex, n: usize, f: impl Fn(usize, usize) -> usize) -> GridIndex {
        debug_assert_eq!(self.d, other.d);
        let mut out = *self;
        for s in 0..self.dim() {
            out.c[s] = f(self.c[s], other.c[s]) & (n - 1);
        }
        out
    }

    pub fn add(&self, other: &GridIndex, n: usize) -> GridIndex {
        self.zip(other, n, |a, b| a.wrapping_add(b))
    }

    pub fn sub(&self, other: &GridIndex, n: usize) -> GridIndex {
        self.zip(other, n, |a, b| a.wrapping_sub(b))
    }

    /// Componentwise product.
    pub fn hadamard(&self, other: &GridIndex, n: usize) -> GridIndex {
        self.zip(other, n, |a, b| a.wrapping_mul(b))
    }

    pub fn scale(&self, k: usize, n: usize) -> GridIndex {
        self.zip(self, n, |a, _| a.wrapping_mul(k))
    }

    pub fn neg(&self, n: usize) -> GridIndex {
        self.zip(self, n, |a, _| a.wrapping_neg())
    }
}

impl fmt::Debug for GridIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords()).finish()
    }
}

/// A pair `(α, β) ∈ [n]^d × [n]^d`; probes used for location are drawn as pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbePair {
    pub alpha: GridIndex,
    pub beta: GridIndex,
}

impl ProbePair {
    pub fn new(alpha: GridIndex, beta: GridIndex) -> Self {
        ProbePair { alpha, beta }
    }
}

/// The pairing `(α₁, β₁) ⋆ (α₂, β₂) = α₁∘α₂ + β₁∘β₂ mod n`, componentwise.
pub fn star(grid: &Grid, a: &ProbePair, b: &ProbePair) -> Result<GridIndex> {
    for v in [&a.alpha, &a.beta, &b.alpha, &b.beta] {
        grid.check(v)?;
    }
    let n = grid.n();
    Ok(a.alpha
        .hadamard(&b.alpha, n)
        .add(&a.beta.hadamard(&b.beta, n), n))
}

/// `|v|_+`.
#[inline]
pub fn positive_part(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Time,
    Frequency,
}

/// A dense complex vector over `[n]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSignal {
    grid: Grid,
    values: Vec<Complex64>,
    domain: Domain,
}

impl DenseSignal {
    pub fn zeros(grid: Grid, domain: Domain) -> Self {
        DenseSignal {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.size()],
            domain,
        }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::param(alloc::format!(
                "expected {} values, got {}",
                grid.size(),
                values.len()
            )));
        }
        Ok(DenseSignal {
            grid,
            values,
            domain,
        })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn domain(&self) -> Domain {
        self.domain
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: &GridIndex) -> Complex64 {
        self.values[self.grid.flat(i)]
    }

    #[inline]
    pub fn at(&self, flat: usize) -> Complex64 {
        self.values[flat]
    }

    pub fn set(&mut self, i: &GridIndex, v: Complex64) {
        let f = self.grid.flat(i);
        self.values[f] = v;
    }

    pub fn norm_l2(&self) -> f64 {
        math::sqrt(self.values.iter().map(|v| v.norm_sqr()).sum())
    }

    pub(crate) fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }
}

/// Sparse map from grid indices to values; zero entries are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseApprox {
    grid: Grid,
    entries: BTreeMap<usize, Complex64>,
}

impl SparseApprox {
    pub fn new(grid: Grid) -> Self {
        SparseApprox {
            grid,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries(
        grid: Grid,
        entries: impl IntoIterator<Item = (GridIndex, Complex64)>,
    ) -> Self {
        let mut s = SparseApprox::new(grid);
        for (i, v) in entries {
            s.add(&i, v);
        }
        s
    }

    /// Keeps every nonzero entry of a dense vector.
    pub fn from_dense(signal: &DenseSignal) -> Self {
        let mut s = SparseApprox::new(*signal.grid());
        for (f, &v) in signal.values().iter().enumerate() {
            if v != Complex64::new(0.0, 0.0) {
                s.entries.insert(f, v);
            }
        }
        s
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `‖χ‖₀`.
    #[inline]
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: &GridIndex) -> Complex64 {
        self.entries
            .get(&self.grid.flat(i))
            .copied()
            .unwrap_or_default()
    }

    pub fn contains(&self, i: &GridIndex) -> bool {
        self.entries.contains_key(&self.grid.flat(i))
    }

    /// Overwrites the entry at `i`; a zero value removes it.
    pub fn insert(&mut self, i: &GridIndex, v: Complex64) {
        let f = self.grid.flat(i);
        if v == Complex64::new(0.0, 0.0) {
            self.entries.remove(&f);
        } else {
            self.entries.insert(f, v);
        }
    }

    /// Adds `v` to the entry at `i`, dropping it if the sum is exactly zero.
    pub fn add(&mut self, i: &GridIndex, v: Complex64) {
        self.add_flat(self.grid.flat(i), v);
    }

    pub(crate) fn add_flat(&mut self, f: usize, v: Complex64) {
        let e = self.entries.entry(f).or_default();
        *e += v;
        if *e == Complex64::new(0.0, 0.0) {
            self.entries.remove(&f);
        }
    }

    pub fn add_assign(&mut self, other: &SparseApprox) {
        for (&f, &v) in &other.entries {
            self.add_flat(f, v);
        }
    }

    pub fn plus(&self, other: &SparseApprox) -> SparseApprox {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn negated(&self) -> SparseApprox {
        SparseApprox {
            grid: self.grid,
            entries: self.entries.iter().map(|(&f, &v)| (f, -v)).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (GridIndex, Complex64)> + '_ {
        self.entries
            .iter()
            .map(move |(&f, &v)| (self.grid.index(f), v))
    }

    pub fn iter_flat(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.entries.iter().map(|(&f, &v)| (f, v))
    }

    pub fn support(&self) -> Vec<GridIndex> {
        self.entries.keys().map(|&f| self.grid.index(f)).collect()
    }

    pub fn norm_l1(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        math::sqrt(self.entries.values().map(|v| v.norm_sqr()).sum())
    }

    pub fn norm_linf(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Removes entries with `|v| <= threshold`.
    pub fn prune(&mut self, threshold: f64) {
        self.entries.retain(|_, v| v.norm() > threshold);
    }

    /// Keeps only the `m` largest entries in magnitude (ties broken by index).
    pub fn keep_top(&mut self, m: usize) {
        if self.entries.len() <= m {
            return;
        }
        let mut all: Vec<(usize, f64)> = self.entries.iter().map(|(&f, v)| (f, v.norm())).collect();
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let keep: BTreeMap<usize, Complex64> = all[..m]
            .iter()
            .map(|&(f, _)| (f, self.entries[&f]))
            .collect();
        self.entries = keep;
    }

    pub fn to_dense(&self, domain: Domain) -> DenseSignal {
        let mut out = DenseSignal::zeros(self.grid, domain);
        for (&f, &v) in &self.entries {
            out.values_mut()[f] = v;
        }
        out
    }
}

/// Every tunable the recovery theorems quantify over.
///
/// `buckets`, `r_max`, `c_max` and `iterations` are optional overrides; when `None`
/// they are derived from `k`, `alpha`, `n`, `d` and the [`Constants`](crate::Constants).
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryParams {
    pub k: usize,
    /// Isolation parameter in `(0, 1)`.
    pub alpha: f64,
    /// `ℓ2/ℓ2` slack.
    pub epsilon: f64,
    /// Upper bound on `‖x_tail‖₂ / √k`. Zero means "exactly sparse".
    pub mu: f64,
    /// Upper bound on `‖x‖_∞ / μ`.
    pub r_star: f64,
    /// Filter sharpness `F`, even and `>= 2d`. `None` picks `2d`.
    pub sharpness: Option<usize>,
    pub buckets: Option<usize>,
    pub r_max: Option<usize>,
    pub c_max: Option<usize>,
    pub iterations: Option<usize>,
    pub seed: u64,
    pub constants: crate::Constants,
}

impl RecoveryParams {
    pub fn new(k: usize, epsilon: f64, r_star: f64, mu: f64, seed: u64) -> Self {
        RecoveryParams {
            k,
            alpha: 0.5,
            epsilon,
            mu,
            r_star,
            sharpness: None,
            buckets: None,
            r_max: None,
            c_max: None,
            iterations: None,
            seed,
            constants: crate::Constants::default(),
        }
    }
}

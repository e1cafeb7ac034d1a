//! Uniform-grid boundary functions on the unit circle.
//!
//! A [`BoundarySample`] holds the values of a function at the `n` points
//! `ζ_j = e^{2πij/n}`. Haar measure is the uniform counting measure on the
//! grid, so every integral `∫ h dm` is the grid mean. Fourier coefficients use
//! the convention `ĥ(k) = ∫ ζ̄^k h(ζ) dm(ζ)`, frequencies live in
//! `[-n/2, n/2)`.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Default oversampling factor used for sup-norm evaluation.
pub const DEFAULT_OVERSAMPLE: usize = 4;
/// Smallest admissible grid.
pub const MIN_GRID: usize = 64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Fourier coefficients in FFT order (index `i` holds frequency `i` or `i - n`).
pub(crate) fn forward(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    plan(n, false).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Synthesis `Σ_k c_k ζ^k` from FFT-ordered coefficients.
pub(crate) fn inverse(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut buf = coeffs.to_vec();
    plan(buf.len(), true).process(&mut buf);
    buf
}

/// FFT slot of frequency `k` on a grid of `n` points (cyclic).
pub(crate) fn slot(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Frequency stored in FFT slot `i`, in `[-n/2, n/2)`.
pub(crate) fn freq_of_slot(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Trigonometric interpolation of FFT-ordered coefficients onto `factor·n`
/// points. The Nyquist term is split evenly between `±n/2` so real data stays
/// real; the original samples are reproduced at every `factor`-th point.
pub(crate) fn interpolate(coeffs: &[Complex64], factor: usize) -> Vec<Complex64> {
    let n = coeffs.len();
    if factor <= 1 {
        return inverse(coeffs);
    }
    let m = n * factor;
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    let half = (n / 2) as i64;
    for (i, &c) in coeffs.iter().enumerate() {
        let k = freq_of_slot(i, n);
        if k == -half {
            padded[slot(-half, m)] += c * 0.5;
            padded[slot(half, m)] += c * 0.5;
        } else {
            padded[slot(k, m)] += c;
        }
    }
    inverse(&padded)
}

/// Uniform discretization of the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BoundaryGrid {
    n_grid: usize,
    oversample: usize,
}

impl BoundaryGrid {
    pub fn new(n_grid: usize, oversample: usize) -> Result<Self> {
        if n_grid < MIN_GRID || !n_grid.is_power_of_two() {
            return Err(Error::Contract(format!(
                "n_grid must be a power of two >= {MIN_GRID}, got {n_grid}"
            )));
        }
        if oversample == 0 {
            return Err(Error::Contract("oversample must be >= 1".into()));
        }
        Ok(Self { n_grid, oversample })
    }

    /// Grid with the default oversampling factor.
    pub fn with_points(n_grid: usize) -> Result<Self> {
        Self::new(n_grid, DEFAULT_OVERSAMPLE)
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    /// Number of points used for sup-norm evaluation.
    pub fn fine_len(&self) -> usize {
        self.n_grid * self.oversample
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_grid as f64
    }

    pub fn point(&self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.angle(j))
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.n_grid).map(|j| self.point(j))
    }

    /// Frequencies representable on this grid: `[-n/2, n/2)`.
    pub fn freq_range(&self) -> (i64, i64) {
        let h = (self.n_grid / 2) as i64;
        (-h, h)
    }

    pub(crate) fn check_freq(&self, k: i64) -> Result<()> {
        let (lo, hi) = self.freq_range();
        if k < lo || k >= hi {
            return Err(Error::FrequencyRange { freq: k, lo, hi });
        }
        Ok(())
    }

    pub(crate) fn ensure_same(&self, other: &BoundaryGrid) -> Result<()> {
        if self.n_grid != other.n_grid {
            return Err(Error::Contract(format!(
                "grid mismatch: {} vs {} points",
                self.n_grid, other.n_grid
            )));
        }
        Ok(())
    }
}

/// Values of a boundary function at the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    grid: BoundaryGrid,
    values: Vec<Complex64>,
}

impl BoundarySample {
    pub fn new(grid: BoundaryGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_grid() {
            return Err(Error::Contract(format!(
                "expected {} values, got {}",
                grid.n_grid(),
                values.len()
            )));
        }
        if let Some(j) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::Contract(format!("non-finite value at index {j}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: BoundaryGrid, values: &[f64]) -> Result<Self> {
        Self::new(
            grid,
            values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Samples `func` at every grid point.
    pub fn from_fn(grid: BoundaryGrid, func: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.points().map(func).collect())
    }

    pub fn constant(grid: BoundaryGrid, c: Complex64) -> Self {
        Self {
            grid,
            values: vec![c; grid.n_grid()],
        }
    }

    /// `ζ^k` sampled on the grid.
    pub fn monomial(grid: BoundaryGrid, k: i64) -> Self {
        let n = grid.n_grid();
        let values = (0..n)
            .map(|j| grid.point((k * j as i64).rem_euclid(n as i64) as usize))
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> BoundaryGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Largest modulus over the grid points only (no refinement).
    pub fn grid_max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn map(&self, func: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| func(v)).collect())
    }

    fn zip_with(
        &self,
        other: &Self,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Self::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    /// Largest imaginary part in absolute value.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    pub(crate) fn require_real(&self, what: &str) -> Result<()> {
        let scale = self.grid_max().max(1.0);
        if self.max_imag() > 1e-12 * scale {
            return Err(Error::Contract(format!("{what} must be real-valued")));
        }
        Ok(())
    }

    /// FFT-ordered coefficients.
    pub(crate) fn coefficients(&self) -> Vec<Complex64> {
        forward(&self.values)
    }

    /// Values on the refined grid of `oversample·n` points.
    pub fn fine_values(&self) -> Vec<Complex64> {
        interpolate(&self.coefficients(), self.grid.oversample())
    }
}

/// Fourier coefficients indexed by frequency. Absent frequencies are zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Spectrum {
    coeffs: BTreeMap<i64, Complex64>,
}

impl Spectrum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut s = Self::new();
        for (k, c) in pairs {
            s.add(k, c);
        }
        s
    }

    /// Single term `c·ζ^k`.
    pub fn monomial(k: i64, c: Complex64) -> Self {
        Self::from_pairs([(k, c)])
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn set(&mut self, k: i64, c: Complex64) {
        self.coeffs.insert(k, c);
    }

    pub fn add(&mut self, k: i64, c: Complex64) {
        *self.coeffs.entry(k).or_default() += c;
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    /// Frequencies carrying a nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.coeffs
            .iter()
            .filter(|(_, c)| **c != Complex64::default())
            .map(|(&k, _)| k)
    }

    pub fn nonzero_terms(&self) -> usize {
        self.support().count()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    /// Dense FFT-ordered layout on `grid`.
    pub(crate) fn to_slots(&self, grid: &BoundaryGrid) -> Result<Vec<Complex64>> {
        let n = grid.n_grid();
        let mut out = vec![Complex64::default(); n];
        for (k, c) in self.iter() {
            grid.check_freq(k)?;
            out[slot(k, n)] += c;
        }
        Ok(out)
    }
}

/// Discrete quadrature of `ĉ(k) = ∫ ζ̄^k s(ζ) dm` for every grid frequency.
pub fn to_spectrum(s: &BoundarySample) -> Spectrum {
    let n = s.len();
    Spectrum {
        coeffs: s
            .coefficients()
            .into_iter()
            .enumerate()
            .map(|(i, c)| (freq_of_slot(i, n), c))
            .collect(),
    }
}

/// Synthesizes `Σ ĉ(k) ζ^k` on `grid`.
pub fn from_spectrum(sp: &Spectrum, grid: BoundaryGrid) -> Result<BoundarySample> {
    BoundarySample::new(grid, inverse(&sp.to_slots(&grid)?))
}

/// Essential-sup surrogate: max modulus of the trigonometric interpolant on
/// the `oversample`-refined grid.
pub fn sup_norm(s: &BoundarySample) -> f64 {
    s.fine_values()
        .iter()
        .fold(s.grid_max(), |m, v| m.max(v.norm()))
}

/// Conjugate function `ũ` of a real sample: `ũ̂(k) = -i·sgn(k)·û(k)`.
///
/// The Nyquist coefficient is dropped (its sign is ambiguous), so `u + iũ`
/// has no negative frequency other than a real-data remainder at `-n/2`.
pub fn conjugate_function(u: &BoundarySample) -> Result<BoundarySample> {
    u.require_real("conjugate_function input")?;
    let n = u.len();
    let real: Vec<Complex64> = u
        .values()
        .iter()
        .map(|v| Complex64::new(v.re, 0.0))
        .collect();
    let mut coeffs = forward(&real);
    for (i, c) in coeffs.iter_mut().enumerate() {
        let k = freq_of_slot(i, n);
        *c = if k > 0 && (k as usize) < n / 2 {
            *c * Complex64::new(0.0, -1.0)
        } else if k < 0 && k != -((n / 2) as i64) {
            *c * Complex64::new(0.0, 1.0)
        } else {
            Complex64::default()
        };
    }
    let values = inverse(&coeffs)
        .into_iter()
        .map(|v| Complex64::new(v.re, 0.0))
        .collect();
    BoundarySample::new(u.grid(), values)
}

/// `max_{k<0} |ĉ(k)|`: zero iff the sample is in `H∞` at grid resolution.
pub fn analyticity_defect(s: &BoundarySample) -> f64 {
    let n = s.len();
    s.coefficients()[n / 2..]
        .iter()
        .fold(0.0, |m, c| m.max(c.norm()))
}

/// A set `E ⊂ 𝕋` given as a union of grid cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMask {
    grid: BoundaryGrid,
    member: Vec<bool>,
}

impl GridMask {
    pub fn new(grid: BoundaryGrid, member: Vec<bool>) -> Result<Self> {
        if member.len() != grid.n_grid() {
            return Err(Error::Contract(format!(
                "mask has {} entries, grid has {}",
                member.len(),
                grid.n_grid()
            )));
        }
        Ok(Self { grid, member })
    }

    pub fn empty(grid: BoundaryGrid) -> Self {
        Self {
            grid,
            member: vec![false; grid.n_grid()],
        }
    }

    pub fn full(grid: BoundaryGrid) -> Self {
        Self {
            grid,
            member: vec![true; grid.n_grid()],
        }
    }

    /// Arc of `cells` consecutive cells starting at cell `start` (cyclic).
    pub fn arc(grid: BoundaryGrid, start: usize, cells: usize) -> Self {
        let n = grid.n_grid();
        let mut member = vec![false; n];
        for j in 0..cells.min(n) {
            member[(start + j) % n] = true;
        }
        Self { grid, member }
    }

    /// Smallest arc starting at angle 0 whose measure is at least `measure`.
    pub fn arc_with_measure(grid: BoundaryGrid, measure: f64) -> Self {
        let cells = (measure * grid.n_grid() as f64 - 1e-9).ceil().max(0.0) as usize;
        Self::arc(grid, 0, cells)
    }

    pub fn grid(&self) -> BoundaryGrid {
        self.grid
    }

    pub fn member(&self) -> &[bool] {
        &self.member
    }

    pub fn contains(&self, j: usize) -> bool {
        self.member[j]
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    /// Normalized Haar measure: fraction of member cells.
    pub fn measure(&self) -> f64 {
        self.count() as f64 / self.member.len() as f64
    }

    pub fn is_empty(&self) -> bool {
        !self.member.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self {
            grid: self.grid,
            member: self.member.iter().map(|b| !b).collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            member: self
                .member
                .iter()
                .zip(&other.member)
                .map(|(a, b)| *a || *b)
                .collect(),
        })
    }

    /// Cyclic distance, in cells, from each member cell to the nearest
    /// non-member cell (1 for cells on the boundary of the set, 0 outside).
    /// When the mask is full every entry is `usize::MAX`.
    pub fn depth(&self) -> Vec<usize> {
        let n = self.member.len();
        if self.member.iter().all(|&b| b) {
            return vec![usize::MAX; n];
        }
        let mut depth = vec![usize::MAX; n];
        let anchor = self.member.iter().position(|&b| !b).unwrap_or(0);
        let mut run = 0usize;
        for step in 0..n {
            let j = (anchor + step) % n;
            run = if self.member[j] { run + 1 } else { 0 };
            depth[j] = run;
        }
        run = 0;
        for step in 0..n {
            let j = (anchor + n - step) % n;
            run = if self.member[j] { run + 1 } else { 0 };
            depth[j] = depth[j].min(run);
        }
        depth
    }

    /// Cells at depth greater than `cells`.
    pub fn erode(&self, cells: usize) -> Self {
        let member = self.depth().into_iter().map(|d| d > cells).collect();
        Self {
            grid: self.grid,
            member,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> BoundaryGrid {
        BoundaryGrid::with_points(n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_validation() {
        assert!(BoundaryGrid::new(32, 4).is_err());
        assert!(BoundaryGrid::new(96, 4).is_err());
        assert!(BoundaryGrid::new(64, 0).is_err());
        assert!(BoundaryGrid::new(64, 1).is_ok());
    }

    #[test]
    fn sample_rejects_bad_values() {
        let g = grid(64);
        assert!(BoundarySample::new(g, vec![c(0.0, 0.0); 63]).is_err());
        let mut v = vec![c(0.0, 0.0); 64];
        v[3] = c(f64::NAN, 0.0);
        assert!(BoundarySample::new(g, v).is_err());
    }

    #[test]
    fn spectrum_of_simple_functions() {
        let g = grid(128);
        let one = BoundarySample::constant(g, c(1.0, 0.0));
        let sp = to_spectrum(&one);
        assert!((sp.get(0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!(sp
            .iter()
            .filter(|(k, _)| *k != 0)
            .all(|(_, v)| v.norm() < 1e-15));

        let z = BoundarySample::from_fn(g, |z| z).unwrap();
        let sp = to_spectrum(&z);
        assert!((sp.get(1) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(sp
            .iter()
            .filter(|(k, _)| *k != 1)
            .all(|(_, v)| v.norm() < 1e-14));

        let zbar = BoundarySample::from_fn(g, |z| z.conj()).unwrap();
        assert!((to_spectrum(&zbar).get(-1) - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn from_spectrum_examples() {
        let g = grid(64);
        let s = from_spectrum(&Spectrum::monomial(0, c(1.0, 0.0)), g).unwrap();
        assert!(s.values().iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-15));
        let s = from_spectrum(&Spectrum::monomial(1, c(1.0, 0.0)), g).unwrap();
        for (j, v) in s.values().iter().enumerate() {
            assert!((v - g.point(j)).norm() < 1e-14);
        }
        assert!(matches!(
            from_spectrum(&Spectrum::monomial(32, c(1.0, 0.0)), g),
            Err(Error::FrequencyRange { freq: 32, .. })
        ));
        assert!(from_spectrum(&Spectrum::monomial(-32, c(1.0, 0.0)), g).is_ok());
    }

    #[test]
    fn sup_norm_examples() {
        let g = grid(256);
        assert!((sup_norm(&BoundarySample::constant(g, c(1.0, 0.0))) - 1.0).abs() < 1e-15);
        assert!((sup_norm(&BoundarySample::monomial(g, 5)) - 1.0).abs() < 1e-13);
        let half = BoundarySample::from_fn(g, |z| (z + 1.0) * 0.5).unwrap();
        assert!((sup_norm(&half) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sup_norm_finds_peak_between_grid_points() {
        // |1 + ζ^k e^{-iπ/n}|/2 peaks halfway between two grid points.
        let g = BoundaryGrid::new(64, 8).unwrap();
        let phase = Complex64::from_polar(1.0, -PI / 64.0);
        let s = BoundarySample::from_fn(g, |z| (z * phase + 1.0) * 0.5).unwrap();
        assert!(s.grid_max() < 1.0 - 1e-4);
        assert!((sup_norm(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conjugate_examples() {
        let g = grid(128);
        let u = BoundarySample::constant(g, c(2.5, 0.0));
        assert!(conjugate_function(&u).unwrap().grid_max() < 1e-14);

        let cos = BoundarySample::from_fn(g, |z| c(z.re, 0.0)).unwrap();
        let sin = conjugate_function(&cos).unwrap();
        for (j, v) in sin.values().iter().enumerate() {
            assert!((v.re - g.angle(j).sin()).abs() < 1e-14);
        }
        let not_real = BoundarySample::monomial(g, 1);
        assert!(matches!(
            conjugate_function(&not_real),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn analyticity_examples() {
        let g = grid(64);
        assert!(analyticity_defect(&BoundarySample::monomial(g, 2)) < 1e-15);
        assert!((analyticity_defect(&BoundarySample::monomial(g, -1)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn measure_examples() {
        let g = grid(64);
        assert_eq!(GridMask::full(g).measure(), 1.0);
        assert_eq!(GridMask::empty(g).measure(), 0.0);
        let alt = GridMask::new(g, (0..64).map(|j| j % 2 == 0).collect()).unwrap();
        assert_eq!(alt.measure(), 0.5);
    }

    #[test]
    fn depth_and_erosion_are_cyclic() {
        let g = grid(64);
        // Arc wrapping around index 0: cells 60..63 and 0..5.
        let arc = GridMask::arc(g, 60, 10);
        let d = arc.depth();
        assert_eq!(d[60], 1);
        assert_eq!(d[5], 1);
        assert_eq!(d[0], 5);
        assert_eq!(d[1], 5);
        assert_eq!(d[10], 0);
        let core = arc.erode(3);
        assert_eq!(core.count(), 4);
        assert!(core.contains(63) && core.contains(2));
        assert!(GridMask::full(g).depth().iter().all(|&d| d == usize::MAX));
    }

    #[test]
    fn arc_with_measure_rounds_up() {
        let g = grid(1024);
        let arc = GridMask::arc_with_measure(g, 0.3);
        assert!(arc.measure() >= 0.3);
        assert!(arc.measure() - 0.3 < 1.0 / 1024.0);
        assert_eq!(GridMask::arc_with_measure(g, 0.25).count(), 256);
    }
}

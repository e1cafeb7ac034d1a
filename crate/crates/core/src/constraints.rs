//! Finite constraint sets `Φ ⊂ (H∞)*` and the kernel-polynomial solver.
//!
//! A functional is represented by a trigonometric-polynomial density `ψ`
//! under the pairing `φ(h) = ∫ h ψ dm`. With `ψ = Σ d_m ζ^m` this is
//! `φ(h) = Σ d_m ĥ(−m)`, which the grid quadrature reproduces exactly.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circle::{slot, BoundaryGrid, BoundarySample, Spectrum};
use crate::{Error, Result};

/// Default kernel residual tolerance (relative to `‖G‖∞`).
pub const DEFAULT_TOL_KERNEL: f64 = 1e-9;

/// `h ↦ ∫ h ψ dm` for a trigonometric polynomial `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    density: Spectrum,
}

impl Functional {
    pub fn new(density: Spectrum) -> Result<Self> {
        if density.nonzero_terms() == 0 {
            return Err(Error::Contract("functional density must be nonzero".into()));
        }
        Ok(Self { density })
    }

    /// `h ↦ ĥ(k)`, i.e. density `ζ̄^k`.
    pub fn fourier(k: i64) -> Self {
        Self {
            density: Spectrum::monomial(-k, Complex64::new(1.0, 0.0)),
        }
    }

    pub fn density(&self) -> &Spectrum {
        &self.density
    }

    pub(crate) fn check_grid(&self, grid: &BoundaryGrid) -> Result<()> {
        self.density.support().try_for_each(|k| grid.check_freq(k))
    }

    /// Pairing against FFT-ordered coefficients of a sample.
    pub(crate) fn apply_coefficients(&self, coeffs: &[Complex64]) -> Complex64 {
        let n = coeffs.len();
        self.density
            .iter()
            .map(|(m, d)| d * coeffs[slot(-m, n)])
            .sum()
    }

    /// `φ(h) = Σ_m d_m ĥ(−m)`, exact grid quadrature of `∫ h ψ dm`.
    pub fn apply(&self, h: &BoundarySample) -> Result<Complex64> {
        self.check_grid(&h.grid())?;
        Ok(self.apply_coefficients(&h.coefficients()))
    }

    /// `φ(ζ^k)`.
    pub(crate) fn on_monomial(&self, k: i64, n: usize) -> Complex64 {
        self.density
            .iter()
            .filter(|(m, _)| slot(-m, n) == slot(k, n))
            .map(|(_, d)| d)
            .sum()
    }
}

/// `apply` as a free function.
pub fn apply(phi: &Functional, h: &BoundarySample) -> Result<Complex64> {
    phi.apply(h)
}

/// A finite list of pairwise distinct functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    functionals: Vec<Functional>,
}

impl ConstraintSet {
    pub fn new(functionals: Vec<Functional>) -> Result<Self> {
        if functionals.is_empty() {
            return Err(Error::Contract("constraint set must be nonempty".into()));
        }
        for (i, a) in functionals.iter().enumerate() {
            if functionals[..i].iter().any(|b| b == a) {
                return Err(Error::Contract(format!(
                    "functional {i} duplicates an earlier one"
                )));
            }
        }
        Ok(Self { functionals })
    }

    pub fn functionals(&self) -> &[Functional] {
        &self.functionals
    }

    /// Cardinality `N`.
    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }

    pub fn to_records(&self) -> Vec<FunctionalRecord> {
        self.functionals
            .iter()
            .map(|f| FunctionalRecord {
                density: f
                    .density
                    .iter()
                    .map(|(k, c)| DensityTerm {
                        frequency: k,
                        re: c.re,
                        im: c.im,
                    })
                    .collect(),
            })
            .collect()
    }

    pub fn from_records(records: &[FunctionalRecord]) -> Result<Self> {
        let functionals = records
            .iter()
            .map(|r| {
                Functional::new(Spectrum::from_pairs(
                    r.density
                        .iter()
                        .map(|t| (t.frequency, Complex64::new(t.re, t.im))),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(functionals)
    }
}

/// Serialized density term `(frequency, re, im)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTerm {
    pub frequency: i64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalRecord {
    pub density: Vec<DensityTerm>,
}

/// `φ_k(h) = ĥ(k − 1)` for `k = 1..N`; the kernel is `{ĥ(0) = … = ĥ(N−1) = 0}`.
pub fn fourier_constraints(n: usize) -> Result<ConstraintSet> {
    if n == 0 {
        return Err(Error::Contract("N must be >= 1".into()));
    }
    ConstraintSet::new((0..n as i64).map(Functional::fourier).collect())
}

/// `N` functionals with densities on `[−degree, degree]`, coefficients
/// uniform in the unit square, drawn from `seed`.
pub fn random_constraints(n: usize, degree: usize, seed: u64) -> Result<ConstraintSet> {
    if n == 0 {
        return Err(Error::Contract("N must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = degree as i64;
    let mut functionals: Vec<Functional> = Vec::with_capacity(n);
    while functionals.len() < n {
        let density = Spectrum::from_pairs((-d..=d).map(|k| {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            (k, Complex64::new(re, im))
        }));
        let phi = Functional::new(density)?;
        if !functionals.contains(&phi) {
            functionals.push(phi);
        }
    }
    ConstraintSet::new(functionals)
}

/// `max_j |φ_j(h)|`.
pub fn membership_defect(h: &BoundarySample, phi_set: &ConstraintSet) -> Result<f64> {
    for phi in phi_set.functionals() {
        phi.check_grid(&h.grid())?;
    }
    let coeffs = h.coefficients();
    Ok(phi_set
        .functionals()
        .iter()
        .fold(0.0, |m, phi| m.max(phi.apply_coefficients(&coeffs).norm())))
}

/// A polynomial `p(z) = Σ α_i z^i` with `‖p‖∞ = 1` and `G·p ∈ H∞_Φ`.
#[derive(Debug, Clone, Serialize)]
pub struct KernelPolynomial {
    pub coeffs: Vec<Complex64>,
    pub sup_norm: f64,
    /// `max_j |φ_j(G·p)|`.
    pub residual: f64,
}

impl KernelPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.coeffs, z)
    }

    pub fn sample(&self, grid: BoundaryGrid) -> BoundarySample {
        let values = grid.points().map(|z| self.eval(z)).collect();
        BoundarySample::new(grid, values).expect("polynomial values are finite")
    }
}

pub(crate) fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::default(), |acc, &c| acc * z + c)
}

const GOLDEN_ITERS: usize = 80;

/// `max_θ |p(e^{iθ})|` by dense evaluation at `64·(deg+1)` points followed by
/// golden-section refinement around every sampled local maximum.
pub fn polynomial_sup(coeffs: &[Complex64]) -> (f64, f64) {
    let samples = 64 * coeffs.len().max(1);
    let h = 2.0 * PI / samples as f64;
    let modulus = |t: f64| horner(coeffs, Complex64::from_polar(1.0, t)).norm();
    let vals: Vec<f64> = (0..samples).map(|i| modulus(i as f64 * h)).collect();
    let mut best = (0.0, 0.0);
    for i in 0..samples {
        let prev = vals[(i + samples - 1) % samples];
        let next = vals[(i + 1) % samples];
        if vals[i] > best.0 {
            best = (vals[i], i as f64 * h);
        }
        if vals[i] < prev || vals[i] < next {
            continue;
        }
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = ((i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (modulus(c), modulus(d));
        for _ in 0..GOLDEN_ITERS {
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = modulus(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = modulus(d);
            }
        }
        for (v, t) in [(fc, c), (fd, d)] {
            if v > best.0 {
                best = (v, t.rem_euclid(2.0 * PI));
            }
        }
    }
    best
}

/// Orthonormal basis (columns) of the numerical null space of `a`, via the
/// SVD of `a` padded with zero rows to a square matrix.
pub(crate) fn null_basis(a: &DMatrix<Complex64>, rel_tol: f64) -> Vec<Vec<Complex64>> {
    let cols = a.ncols();
    let mut square = DMatrix::<Complex64>::zeros(cols.max(a.nrows()), cols);
    square.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let cutoff = smin + rel_tol * smax;
    let mut basis = Vec::new();
    for (i, &s) in sv.iter().enumerate() {
        if s <= cutoff {
            basis.push(v_t.row(i).iter().map(|c| c.conj()).collect());
        }
    }
    basis
}

/// Finds `p ∈ P_N` with `‖p‖∞ = 1` and `φ_j(G·p) = 0` for every `φ_j ∈ Φ`.
///
/// The matrix `T_{j,i} = φ_j(G·z^i)` is `N × (N+1)`, so its kernel is
/// nontrivial. Among near-null right singular vectors the canonical
/// choice is the projection of the lowest-index basis vector `e_i` with a
/// nonvanishing projection, which also fixes the phase (`α_i > 0`).
pub fn kernel_polynomial(
    g: &BoundarySample,
    phi_set: &ConstraintSet,
    tol_kernel: f64,
) -> Result<KernelPolynomial> {
    let grid = g.grid();
    let n = grid.n_grid();
    let big_n = phi_set.len();
    if big_n + 1 > n / 2 {
        return Err(Error::Contract(format!(
            "N = {big_n} too large for a grid of {n} points"
        )));
    }
    for phi in phi_set.functionals() {
        phi.check_grid(&grid)?;
    }
    let cg = g.coefficients();
    let t = DMatrix::<Complex64>::from_fn(big_n, big_n + 1, |j, i| {
        let phi = &phi_set.functionals()[j];
        phi.density()
            .iter()
            .map(|(m, d)| d * cg[slot(-m - i as i64, n)])
            .sum()
    });
    let basis = null_basis(&t, 1e-10);
    let projection = |idx: usize| -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); big_n + 1];
        for v in &basis {
            let w = v[idx].conj();
            for (o, x) in out.iter_mut().zip(v) {
                *o += x * w;
            }
        }
        out
    };
    let norms: Vec<f64> = (0..=big_n)
        .map(|i| {
            projection(i)
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let top = norms.iter().cloned().fold(0.0, f64::max);
    let idx = norms
        .iter()
        .position(|&v| v > 1e-6 * top)
        .ok_or_else(|| Error::Conditioning("empty null space".into()))?;
    let mut alpha = projection(idx);
    let (sup, _) = polynomial_sup(&alpha);
    if sup.is_nan() || sup <= 0.0 {
        return Err(Error::Conditioning("kernel polynomial vanished".into()));
    }
    alpha.iter_mut().for_each(|a| *a /= sup);
    let (sup_norm, _) = polynomial_sup(&alpha);

    let p = BoundarySample::new(grid, grid.points().map(|z| horner(&alpha, z)).collect())?;
    let residual = membership_defect(&g.mul(&p)?, phi_set)?;
    let allowed = tol_kernel * g.grid_max().max(f64::MIN_POSITIVE);
    if residual > allowed {
        return Err(Error::Conditioning(format!(
            "kernel residual {residual:.3e} exceeds {allowed:.3e}"
        )));
    }
    Ok(KernelPolynomial {
        coeffs: alpha,
        sup_norm,
        residual,
    })
}

//! Explicit perturbations certifying that a point is not (strongly) extreme,
//! and the Turán–Nazarov inequality checker.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{
    analyticity_defect, from_spectrum, sup_norm, BoundaryGrid, BoundarySample, GridMask, Spectrum,
};
use crate::constraints::{kernel_polynomial, membership_defect, ConstraintSet, KernelPolynomial};
use crate::outer::{
    default_ladder, extremality_test, inner_defect, make_outer, sublevel_set, two_level_modulus,
    ExtremalityVerdict, DEFAULT_MARGIN,
};
use crate::{Degeneracy, Error, Result, Tolerances};

/// Nazarov's eligible constant `c = π/(16e)`.
pub const NAZAROV_C: f64 = PI / (16.0 * E);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WitnessKind {
    ExtremeViolation,
    StrongViolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConstantMethod {
    #[default]
    Nazarov,
    Empirical,
}

/// A perturbation `g ∈ H∞_Φ` with its measured norms.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    #[serde(skip)]
    pub g: BoundarySample,
    pub norm_g: f64,
    pub norm_plus: f64,
    pub norm_minus: f64,
    /// Largest value `max(norm_plus, norm_minus)` may take.
    pub bound_pm: f64,
    pub membership: f64,
    pub analyticity: f64,
    /// Value `norm_g` is compared against (`ε₀` for strong witnesses, 0 otherwise).
    pub target_bound: f64,
    pub target_met: bool,
    pub kernel: KernelPolynomial,
    #[serde(flatten)]
    pub strong: Option<StrongDetails>,
}

/// Extra data recorded by [`strong_violation_witness`].
#[derive(Debug, Clone, Serialize)]
pub struct StrongDetails {
    pub eta: f64,
    pub delta: f64,
    pub sublevel_measure: f64,
    /// Measure of the eroded set where `|𝓖| = 1 − η` exactly.
    pub core_measure: f64,
    pub margin: usize,
    pub constant_method: ConstantMethod,
    pub constant: f64,
    /// `(1 − η)·max_{core}|p|`, a lower bound for `norm_g` that holds by construction.
    pub core_guarantee: f64,
}

impl Witness {
    /// Invariants that fail, as human-readable messages. Empty means valid.
    pub fn violations(&self, tol: &Tolerances) -> Vec<String> {
        let mut out = Vec::new();
        if self.norm_g.is_nan() || self.norm_g <= 0.0 {
            out.push("perturbation is null".to_string());
        }
        let pm = self.norm_plus.max(self.norm_minus);
        if pm > self.bound_pm {
            out.push(format!("max ‖f±g‖∞ = {pm} exceeds {}", self.bound_pm));
        }
        let kernel_tol = tol.tol_kernel * self.g.grid_max().max(1.0);
        if self.membership > kernel_tol {
            out.push(format!(
                "membership defect {:.3e} exceeds {kernel_tol:.3e}",
                self.membership
            ));
        }
        if self.analyticity > tol.tol_analytic {
            out.push(format!(
                "analyticity defect {:.3e} exceeds {:.3e}",
                self.analyticity, tol.tol_analytic
            ));
        }
        if let Some(s) = &self.strong {
            if self.norm_g < s.core_guarantee * (1.0 - 1e-12) - tol.tol_sup {
                out.push(format!(
                    "‖g‖∞ = {} below core guarantee {}",
                    self.norm_g, s.core_guarantee
                ));
            }
        }
        out
    }
}

fn require_unit_norm(f: &BoundarySample, tol_sup: f64) -> Result<f64> {
    let norm = sup_norm(f);
    if (norm - 1.0).abs() > tol_sup {
        return Err(Error::Contract(format!(
            "f must have unit sup norm, got {norm}"
        )));
    }
    Ok(norm)
}

fn measure_witness(
    f: &BoundarySample,
    g: BoundarySample,
    phi_set: &ConstraintSet,
    kernel: KernelPolynomial,
) -> Result<(Witness, f64)> {
    let norm_g = sup_norm(&g);
    let norm_plus = sup_norm(&f.add(&g)?);
    let norm_minus = sup_norm(&f.sub(&g)?);
    let membership = membership_defect(&g, phi_set)?;
    let analyticity = analyticity_defect(&g);
    Ok((
        Witness {
            kind: WitnessKind::ExtremeViolation,
            g,
            norm_g,
            norm_plus,
            norm_minus,
            bound_pm: f64::INFINITY,
            membership,
            analyticity,
            target_bound: 0.0,
            target_met: false,
            kernel,
            strong: None,
        },
        norm_g,
    ))
}

/// `g = G·p` with `|G| = 1 − |f|`: then `|f ± g| ≤ |f| + |G| = 1`, so `f` is
/// the midpoint of `f ± g` and not an extreme point.
///
/// Requires a unit-norm `f` whose floor ladder shows `∫ log(1 − |f|) dm`
/// converging.
pub fn extreme_violation_witness(
    f: &BoundarySample,
    phi_set: &ConstraintSet,
    tol: &Tolerances,
) -> Result<Witness> {
    tol.validate()?;
    require_unit_norm(f, tol.tol_sup)?;
    let gap: Vec<f64> = f
        .values()
        .iter()
        .map(|v| (1.0 - v.norm()).max(0.0))
        .collect();
    if gap.iter().all(|&w| w <= tol.floor) {
        return Err(Error::Degenerate(Degeneracy::Inner));
    }
    let report = extremality_test(f, &default_ladder(), tol.tol_sup)?;
    if report.verdict != ExtremalityVerdict::NotExtreme {
        return Err(Error::Degenerate(Degeneracy::DivergentLogIntegral));
    }
    let outer = make_outer(&BoundarySample::from_real(f.grid(), &gap)?, tol.floor)?;
    let kernel = kernel_polynomial(&outer.boundary, phi_set, tol.tol_kernel)?;
    let g = outer.boundary.mul(&kernel.sample(f.grid()))?;
    let (mut w, _) = measure_witness(f, g, phi_set, kernel)?;
    // |f ± Gp| ≤ |f| + max(1 − |f|, floor)·|p| on the grid.
    w.bound_pm = 1.0 + tol.tol_sup + tol.floor * (1.0 + w.kernel.sup_norm);
    w.target_met = w.norm_g > 0.0;
    Ok(w)
}

/// Options for [`strong_violation_witness`].
#[derive(Debug, Clone, Copy)]
pub struct StrongOptions {
    /// Ramp width (cells) used to mollify the two-level modulus.
    pub margin: usize,
    pub constant: ConstantMethod,
    /// Seed of the empirical constant search.
    pub seed: u64,
}

impl Default for StrongOptions {
    fn default() -> Self {
        Self {
            margin: DEFAULT_MARGIN,
            constant: ConstantMethod::Nazarov,
            seed: 0,
        }
    }
}

/// `g = 𝓖·p` with `|𝓖| = (1 − η)` on `E = E_η(f)` and `δ/2` off `E`, so that
/// `‖f ± g‖∞ ≤ 1 + δ/2` while `‖g‖∞ ≥ (1 − η)·max_E|p|`.
///
/// `E` is eroded by the mollification margin; the target `ε₀ = (1 − η)/C`
/// uses the constant of the eroded core.
pub fn strong_violation_witness(
    f: &BoundarySample,
    phi_set: &ConstraintSet,
    eta: f64,
    delta: f64,
    tol: &Tolerances,
    opts: &StrongOptions,
) -> Result<Witness> {
    tol.validate()?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Contract(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if tol.tol_sup > delta / 4.0 {
        return Err(Error::Contract(format!(
            "tol_sup = {} must not exceed delta/4 = {}",
            tol.tol_sup,
            delta / 4.0
        )));
    }
    if inner_defect(f) <= tol.tol_sup {
        return Err(Error::Degenerate(Degeneracy::Inner));
    }
    let level = sublevel_set(f, eta)?;
    if level.mask.is_empty() {
        return Err(Error::Degenerate(Degeneracy::EmptySublevel));
    }
    require_unit_norm(f, tol.tol_sup)?;
    let f_membership = membership_defect(f, phi_set)?;
    if f_membership > tol.tol_sup {
        return Err(Error::Contract(format!(
            "f is not in H∞_Φ (membership defect {f_membership:.3e})"
        )));
    }

    let modulus = two_level_modulus(&level.mask, 1.0 - eta, delta / 2.0, opts.margin)?;
    let core = modulus.core_in.clone();
    let outer = make_outer(&modulus.modulus, tol.floor)?;
    let kernel = kernel_polynomial(&outer.boundary, phi_set, tol.tol_kernel)?;
    let p = kernel.sample(f.grid());
    let g = outer.boundary.mul(&p)?;
    let (mut w, norm_g) = measure_witness(f, g, phi_set, kernel)?;

    let core_guarantee = (1.0 - eta)
        * p.values()
            .iter()
            .zip(core.member())
            .filter(|(_, &m)| m)
            .fold(0.0f64, |m, (v, _)| m.max(v.norm()));
    let constant = restricted_sup_constant(&core, phi_set.len(), opts.constant, opts.seed)?;
    let target = (1.0 - eta) / constant;

    w.kind = WitnessKind::StrongViolation;
    w.bound_pm = 1.0 + delta;
    w.target_bound = target;
    w.target_met = norm_g >= target;
    w.strong = Some(StrongDetails {
        eta,
        delta,
        sublevel_measure: level.measure,
        core_measure: core.measure(),
        margin: modulus.margin,
        constant_method: opts.constant,
        constant,
        core_guarantee,
    });
    Ok(w)
}

const EMPIRICAL_STARTS: usize = 32;
const EMPIRICAL_SWEEPS: usize = 200;

/// A constant `C` with `‖q‖∞ ≤ C·sup_E|q|` for polynomials of degree `≤ N`.
///
/// `Nazarov` returns `(1/(c·m(E)))^N` with `c = π/(16e)`. `Empirical` returns
/// the largest ratio `‖q‖∞ / sup_E|q|` found by a seeded multi-start
/// coordinate ascent, evaluated on the oversampled grid; it is a lower
/// estimate of the best constant, never the constant itself.
pub fn restricted_sup_constant(
    set: &GridMask,
    degree: usize,
    method: ConstantMethod,
    seed: u64,
) -> Result<f64> {
    let m = set.measure();
    if m <= 0.0 {
        return Err(Error::Contract(
            "restricted sup constant needs m(E) > 0".into(),
        ));
    }
    if degree == 0 {
        return Ok(1.0);
    }
    match method {
        ConstantMethod::Nazarov => Ok((1.0 / (NAZAROV_C * m)).powi(degree as i32)),
        ConstantMethod::Empirical => Ok(empirical_constant(set, degree, seed)),
    }
}

struct RatioProblem {
    /// `ζ^i` at every fine point, row-major by point.
    powers: Vec<Complex64>,
    in_set: Vec<bool>,
    terms: usize,
}

impl RatioProblem {
    fn new(set: &GridMask, degree: usize) -> Self {
        let grid = set.grid();
        let os = grid.oversample();
        let fine = grid.fine_len();
        let terms = degree + 1;
        let mut powers = Vec::with_capacity(fine * terms);
        for i in 0..fine {
            let z = Complex64::from_polar(1.0, 2.0 * PI * i as f64 / fine as f64);
            let mut acc = Complex64::new(1.0, 0.0);
            for _ in 0..terms {
                powers.push(acc);
                acc *= z;
            }
        }
        let in_set = (0..fine).map(|i| set.contains(i / os)).collect();
        Self {
            powers,
            in_set,
            terms,
        }
    }

    fn values(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        self.powers
            .chunks_exact(self.terms)
            .map(|row| row.iter().zip(coeffs).map(|(z, a)| z * a).sum())
            .collect()
    }

    fn ratio(&self, values: &[Complex64]) -> f64 {
        let (mut all, mut on_set) = (0.0f64, 0.0f64);
        for (v, &m) in values.iter().zip(&self.in_set) {
            let a = v.norm();
            all = all.max(a);
            if m {
                on_set = on_set.max(a);
            }
        }
        if on_set > 0.0 {
            all / on_set
        } else {
            0.0
        }
    }

    fn ascend(&self, mut coeffs: Vec<Complex64>) -> f64 {
        let dirs = [
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ];
        let mut values = self.values(&coeffs);
        let mut best = self.ratio(&values);
        let mut step = 0.5;
        let mut trial = values.clone();
        for _ in 0..EMPIRICAL_SWEEPS {
            let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
            let mut improved = false;
            for i in 0..self.terms {
                for d in dirs {
                    let delta = d * (step * scale);
                    for (t, (v, row)) in trial
                        .iter_mut()
                        .zip(values.iter().zip(self.powers.chunks_exact(self.terms)))
                    {
                        *t = v + delta * row[i];
                    }
                    let r = self.ratio(&trial);
                    if r > best {
                        best = r;
                        coeffs[i] += delta;
                        std::mem::swap(&mut values, &mut trial);
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < 1e-10 {
                    break;
                }
            }
        }
        best
    }
}

fn empirical_constant(set: &GridMask, degree: usize, seed: u64) -> f64 {
    let problem = RatioProblem::new(set, degree);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<Complex64>> = (0..EMPIRICAL_STARTS)
        .map(|_| {
            (0..=degree)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    starts
        .into_par_iter()
        .map(|c| problem.ascend(c))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(1.0, f64::max)
}

/// Both sides of `‖q‖∞ ≤ (1/(c·m(E)))^{n−1}·sup_E|q|` for an `n`-term `q`.
#[derive(Debug, Clone, Serialize)]
pub struct TnReport {
    pub n_terms: usize,
    pub set_measure: f64,
    pub lhs: f64,
    pub restricted_sup: f64,
    pub bound: f64,
    pub c_used: f64,
    /// `lhs / bound`.
    pub ratio: f64,
    pub holds: bool,
}

/// Evaluates both sides on the oversampled grid; `sup_E` runs over the fine
/// points lying in member cells. The inequality is accepted when
/// `lhs ≤ bound·(1 + tol)`.
pub fn turan_nazarov_check(q: &Spectrum, set: &GridMask, c: f64, tol: f64) -> Result<TnReport> {
    let m = set.measure();
    if m <= 0.0 {
        return Err(Error::Contract("Turán–Nazarov check needs m(E) > 0".into()));
    }
    let grid = set.grid();
    let sample = from_spectrum(q, grid)?;
    let fine = sample.fine_values();
    let os = grid.oversample();
    let (mut lhs, mut restricted_sup) = (0.0f64, 0.0f64);
    for (i, v) in fine.iter().enumerate() {
        let a = v.norm();
        lhs = lhs.max(a);
        if set.contains(i / os) {
            restricted_sup = restricted_sup.max(a);
        }
    }
    let n_terms = q.nonzero_terms();
    let bound = (1.0 / (c * m)).powi(n_terms.saturating_sub(1) as i32) * restricted_sup;
    let ratio = if bound > 0.0 {
        lhs / bound
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(TnReport {
        n_terms,
        set_measure: m,
        lhs,
        restricted_sup,
        bound,
        c_used: c,
        ratio,
        holds: lhs <= bound * (1.0 + tol),
    })
}

/// Parameters of a random Turán–Nazarov corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TnCorpusConfig {
    pub count: usize,
    /// Each polynomial has between 1 and `max_terms` nonzero terms.
    pub max_terms: usize,
    /// Frequencies are drawn from `[−max_freq, max_freq]`.
    pub max_freq: i64,
    /// Lower bound on `m(E)`.
    pub min_measure: f64,
    pub c: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for TnCorpusConfig {
    fn default() -> Self {
        Self {
            count: 1000,
            max_terms: 5,
            max_freq: 32,
            min_measure: 0.05,
            c: NAZAROV_C,
            tol: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TnCorpusSummary {
    pub count: usize,
    pub violations: usize,
    pub max_ratio: f64,
    /// Largest ratio among single-term polynomials (`None` if there were none).
    pub max_ratio_single_term: Option<f64>,
    pub min_single_term_ratio: Option<f64>,
    pub min_measure_seen: f64,
}

/// An arc, or a union of two arcs, of measure at least `min_measure`.
fn random_set(grid: BoundaryGrid, min_measure: f64, rng: &mut ChaCha8Rng) -> GridMask {
    let n = grid.n_grid();
    let min_cells = ((min_measure * n as f64).ceil() as usize).clamp(1, n);
    let first = GridMask::arc(
        grid,
        rng.random_range(0..n),
        rng.random_range(min_cells..=n),
    );
    if rng.random_range(0..2) == 0 {
        return first;
    }
    let second = GridMask::arc(grid, rng.random_range(0..n), rng.random_range(1..=n));
    first.union(&second).expect("same grid")
}

/// Runs [`turan_nazarov_check`] on `count` random polynomials and sets.
pub fn tn_corpus(grid: BoundaryGrid, cfg: &TnCorpusConfig) -> Result<TnCorpusSummary> {
    if cfg.max_terms == 0 || cfg.max_freq < 0 {
        return Err(Error::Contract(
            "max_terms must be >= 1 and max_freq >= 0".into(),
        ));
    }
    if !(cfg.min_measure > 0.0 && cfg.min_measure <= 1.0) {
        return Err(Error::Contract(format!(
            "min_measure must lie in (0,1], got {}",
            cfg.min_measure
        )));
    }
    grid.check_freq(cfg.max_freq)?;
    grid.check_freq(-cfg.max_freq)?;
    if cfg.max_terms as i64 > 2 * cfg.max_freq + 1 {
        return Err(Error::Contract(
            "max_terms exceeds the number of available frequencies".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cases: Vec<(Spectrum, GridMask)> = (0..cfg.count)
        .map(|_| {
            let terms = rng.random_range(1..=cfg.max_terms);
            let mut q = Spectrum::new();
            while q.nonzero_terms() < terms {
                let k = rng.random_range(-cfg.max_freq..=cfg.max_freq);
                if q.get(k).norm() == 0.0 {
                    let c = Complex64::from_polar(
                        rng.random_range(0.1..1.0),
                        rng.random_range(0.0..2.0 * PI),
                    );
                    q.set(k, c);
                }
            }
            (q, random_set(grid, cfg.min_measure, &mut rng))
        })
        .collect();
    let reports: Vec<TnReport> = cases
        .par_iter()
        .map(|(q, e)| turan_nazarov_check(q, e, cfg.c, cfg.tol))
        .collect::<Result<_>>()?;
    let single: Vec<f64> = reports
        .iter()
        .filter(|r| r.n_terms == 1)
        .map(|r| r.ratio)
        .collect();
    Ok(TnCorpusSummary {
        count: reports.len(),
        violations: reports.iter().filter(|r| !r.holds).count(),
        max_ratio: reports.iter().map(|r| r.ratio).fold(0.0, f64::max),
        max_ratio_single_term: single.iter().cloned().reduce(f64::max),
        min_single_term_ratio: single.iter().cloned().reduce(f64::min),
        min_measure_seen: reports.iter().map(|r| r.set_measure).fold(1.0, f64::min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::BoundaryGrid;
    use crate::constraints::fourier_constraints;

    fn grid(n: usize) -> BoundaryGrid {
        BoundaryGrid::with_points(n).unwrap()
    }

    #[test]
    fn nazarov_constant_value() {
        assert!((NAZAROV_C - 0.072_232_96).abs() < 1e-9);
        let g = grid(1024);
        let half = GridMask::arc_with_measure(g, 0.5);
        let c1 = restricted_sup_constant(&half, 1, ConstantMethod::Nazarov, 0).unwrap();
        assert!((c1 - 27.688_19).abs() < 1e-4, "{c1}");
        assert_eq!(
            restricted_sup_constant(&half, 0, ConstantMethod::Nazarov, 0).unwrap(),
            1.0
        );
        assert_eq!(
            restricted_sup_constant(&half, 0, ConstantMethod::Empirical, 0).unwrap(),
            1.0
        );
        assert!(
            restricted_sup_constant(&GridMask::empty(g), 1, ConstantMethod::Nazarov, 0).is_err()
        );
    }

    /// Brute force over `q = 1 + r·e^{iφ}·z` (every degree-1 polynomial up to
    /// scaling, plus `q = z` with ratio 1), evaluated in closed form: a coarse
    /// parameter grid followed by a dense grid around the best cell.
    fn brute_force_degree_one(set: &GridMask) -> f64 {
        let grid = set.grid();
        let fine = grid.fine_len();
        let os = grid.oversample();
        let angles: Vec<f64> = (0..fine)
            .filter(|i| set.contains(i / os))
            .map(|i| 2.0 * PI * i as f64 / fine as f64)
            .collect();
        let ratio = |r: f64, phi: f64| {
            let on_set = angles
                .iter()
                .map(|t| (1.0 + r * r + 2.0 * r * (t + phi).cos()).sqrt())
                .fold(0.0, f64::max);
            (1.0 + r) / on_set
        };
        let mut best = (1.0f64, 0.0, 0.0);
        for ir in 1..=300 {
            for ip in 0..360 {
                let (r, phi) = (ir as f64 / 100.0, 2.0 * PI * ip as f64 / 360.0);
                let v = ratio(r, phi);
                if v > best.0 {
                    best = (v, r, phi);
                }
            }
        }
        let (_, r0, p0) = best;
        for ir in -100..=100 {
            for ip in -100..=100 {
                let r = r0 + 0.02 * ir as f64 / 100.0;
                let phi = p0 + (2.0 * PI / 360.0) * ip as f64 / 100.0;
                if r > 0.0 {
                    best.0 = best.0.max(ratio(r, phi));
                }
            }
        }
        best.0
    }

    #[test]
    fn empirical_constant_upper_half_circle() {
        let g = BoundaryGrid::new(256, 4).unwrap();
        let upper = GridMask::arc(g, 0, 128);
        let oracle = brute_force_degree_one(&upper);
        // Closed form for the closed half circle: (1+r)/sqrt(1+r²), maximal at r = 1.
        // The sampled set stops one fine step short of angle π.
        assert!((oracle - 2f64.sqrt()).abs() < 5e-3, "{oracle}");
        let emp = restricted_sup_constant(&upper, 1, ConstantMethod::Empirical, 5).unwrap();
        assert!((emp - oracle).abs() < 1e-4, "emp {emp} vs oracle {oracle}");
        let naz = restricted_sup_constant(&upper, 1, ConstantMethod::Nazarov, 0).unwrap();
        assert!(emp < naz);
    }

    #[test]
    fn tn_single_term_is_equality() {
        let g = grid(512);
        let q = Spectrum::monomial(0, Complex64::new(5.0, 0.0));
        let arc = GridMask::arc(g, 40, 100);
        let r = turan_nazarov_check(&q, &arc, NAZAROV_C, 1e-6).unwrap();
        assert!((r.lhs - 5.0).abs() < 1e-13 && (r.restricted_sup - 5.0).abs() < 1e-13);
        assert!((r.bound - 5.0).abs() < 1e-13 && r.holds);

        let q = Spectrum::monomial(7, Complex64::new(1.0, 0.0));
        let r = turan_nazarov_check(&q, &arc, NAZAROV_C, 1e-6).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tn_rejects_null_sets() {
        let g = grid(64);
        let q = Spectrum::monomial(0, Complex64::new(1.0, 0.0));
        assert!(turan_nazarov_check(&q, &GridMask::empty(g), NAZAROV_C, 1e-6).is_err());
    }

    #[test]
    fn strong_witness_rejects_inner_input() {
        let g = grid(1024);
        let f = BoundarySample::monomial(g, 1);
        let err = strong_violation_witness(
            &f,
            &fourier_constraints(1).unwrap(),
            0.5,
            0.01,
            &Tolerances::default(),
            &StrongOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Degenerate(Degeneracy::Inner)));

        // |0.8 + 0.2z| >= 0.6, so E_0.5 is empty.
        let f = BoundarySample::from_fn(g, |z| z * 0.2 + 0.8).unwrap();
        let err = strong_violation_witness(
            &f,
            &fourier_constraints(1).unwrap(),
            0.5,
            0.01,
            &Tolerances::default(),
            &StrongOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Degenerate(Degeneracy::EmptySublevel)));
    }

    #[test]
    fn strong_witness_requires_small_slack() {
        let g = grid(1024);
        let f = BoundarySample::from_fn(g, |z| z * (z + 1.0) * 0.5).unwrap();
        let tol = Tolerances {
            tol_sup: 0.01,
            ..Tolerances::default()
        };
        assert!(strong_violation_witness(
            &f,
            &fourier_constraints(1).unwrap(),
            0.5,
            0.01,
            &tol,
            &StrongOptions::default()
        )
        .is_err());
    }

    #[test]
    fn extreme_witness_rejects_zero_and_inner() {
        let g = grid(1024);
        let set = fourier_constraints(1).unwrap();
        let tol = Tolerances::default();
        let zero = BoundarySample::constant(g, Complex64::new(0.0, 0.0));
        assert!(matches!(
            extreme_violation_witness(&zero, &set, &tol),
            Err(Error::Contract(_))
        ));
        let inner = BoundarySample::monomial(g, 2);
        assert!(matches!(
            extreme_violation_witness(&inner, &set, &tol),
            Err(Error::Degenerate(Degeneracy::Inner))
        ));
    }

    #[test]
    fn extreme_witness_for_half_plus_half_z() {
        // The clipped zero of 1 − |f| at ζ = 1 leaves a Nyquist remainder that
        // decays like n⁻²; this resolution brings it below 1e-6.
        let g = grid(131_072);
        let f = BoundarySample::from_fn(g, |z| (z + 1.0) * 0.5).unwrap();
        let tol = Tolerances::default();
        let w = extreme_violation_witness(&f, &fourier_constraints(1).unwrap(), &tol).unwrap();
        // Φ = {ĥ(0)} and G(0) > 0 force p = λz, so |g| = |G| = 1 − |f| pointwise.
        assert!(
            w.kernel.coeffs[0].norm() < 1e-6,
            "{:?} {}",
            w.kernel.coeffs,
            w.analyticity
        );
        let direct = w.g.values().iter().fold(0.0f64, |m, v| m.max(v.norm()));
        assert!((direct - 1.0).abs() < 1e-9);
        assert!(w.norm_g >= 0.1);
        assert!(
            w.norm_plus <= 1.0 + 1e-6 && w.norm_minus <= 1.0 + 1e-6,
            "{} {} {} {}",
            w.norm_plus,
            w.norm_minus,
            w.analyticity,
            w.norm_g
        );
        assert!(w.violations(&tol).is_empty(), "{:?}", w.violations(&tol));
    }

    #[test]
    fn small_corpus_has_no_violations() {
        let cfg = TnCorpusConfig {
            count: 60,
            ..TnCorpusConfig::default()
        };
        let summary = tn_corpus(grid(512), &cfg).unwrap();
        assert_eq!(summary.count, 60);
        assert_eq!(summary.violations, 0);
        assert!(summary.min_measure_seen >= 0.05);
        let single = TnCorpusConfig {
            count: 20,
            max_terms: 1,
            ..cfg
        };
        let s = tn_corpus(grid(512), &single).unwrap();
        assert!((s.max_ratio_single_term.unwrap() - 1.0).abs() < 1e-9);
        assert!((s.min_single_term_ratio.unwrap() - 1.0).abs() < 1e-9);
        assert!(tn_corpus(grid(64), &TnCorpusConfig::default()).is_err());
    }
}

//! Brackets for the admissibility threshold `ε_Φ(f)`, the two-level extremal
//! construction, random probing and the parameter sweep.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{sup_norm, BoundaryGrid, BoundarySample, GridMask, DEFAULT_OVERSAMPLE};
use crate::constraints::{
    fourier_constraints, horner, membership_defect, null_basis, ConstraintSet,
};
use crate::outer::{make_outer, sublevel_set, two_level_modulus, OuterResult, DEFAULT_MARGIN};
use crate::report::Envelope;
use crate::witness::{strong_violation_witness, StrongOptions, NAZAROV_C};
use crate::{Degeneracy, Error, Result, Tolerances};

/// Extra degree given to probe polynomials beyond the number of constraints.
pub const PROBE_EXTRA_DEGREE: usize = 16;
pub const PROBE_BISECTIONS: usize = 40;
/// Slack of the sandwich comparison in [`run_sweep`].
pub const SANDWICH_TOL: f64 = 1e-9;
/// Slack allowed when comparing probe results against the pointwise bound.
pub const PROBE_TOL: f64 = 1e-9;
const NULL_RTOL: f64 = 1e-10;
/// A minimum modulus this close to 1 is rounding noise and counts as 1.
pub const UNIT_SNAP: f64 = 1e-13;

/// `f = ζ^N·𝓕` with `|𝓕| = η` on `E` and `1` off `E`, and `Φ = {ĥ(0), …, ĥ(N−1)}`.
#[derive(Debug, Clone)]
pub struct TwoLevelConstruction {
    pub constraints: ConstraintSet,
    pub f: BoundarySample,
    pub outer: OuterResult,
    pub set: GridMask,
    /// Ramp width used on the `|𝓕| = 1` side.
    pub margin: usize,
}

/// Builds the extremal two-level function for `(N, η, γ)`.
///
/// `E` defaults to the arc of measure `γ` starting at angle 0. The modulus
/// is mollified from below on the `|𝓕| = 1` side, so `η ≤ |f| ≤ 1` and
/// `E_η(f)` contains `E`.
pub fn two_level_construction(
    grid: BoundaryGrid,
    n: usize,
    eta: f64,
    gamma: f64,
    set: Option<&GridMask>,
    margin: usize,
    floor: f64,
) -> Result<TwoLevelConstruction> {
    if n == 0 {
        return Err(Error::Contract("N must be >= 1".into()));
    }
    for (name, v) in [("eta", eta), ("gamma", gamma)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Contract(format!(
                "{name} must lie in (0,1), got {v}"
            )));
        }
    }
    if n as i64 > grid.freq_range().1 {
        return Err(Error::Contract(format!(
            "N = {n} exceeds the grid band limit"
        )));
    }
    let set = match set {
        Some(e) => {
            grid.ensure_same(&e.grid())?;
            if (e.measure() - gamma).abs() > 1.0 / grid.n_grid() as f64 + 1e-15 {
                return Err(Error::Contract(format!(
                    "m(E) = {} differs from gamma = {gamma} by more than one cell",
                    e.measure()
                )));
            }
            e.clone()
        }
        None => GridMask::arc_with_measure(grid, gamma),
    };
    let modulus = two_level_modulus(&set, eta, 1.0, margin)?;
    let outer = make_outer(&modulus.modulus, floor)?;
    let f = BoundarySample::monomial(grid, n as i64).mul(&outer.boundary)?;
    Ok(TwoLevelConstruction {
        constraints: fourier_constraints(n)?,
        f,
        outer,
        set,
        margin: modulus.margin,
    })
}

/// `ρ = min |f|` over the oversampled grid.
pub fn min_modulus(f: &BoundarySample) -> f64 {
    f.fine_values()
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(v.norm()))
}

/// `sqrt(max(0, 1 − ρ²))`: every larger `ε` is admissible for every `Φ`.
///
/// `ρ ≥ 1 − UNIT_SNAP` is treated as `ρ = 1`; otherwise rounding in `|f|`
/// would be amplified by the square root.
pub fn eps_upper(f: &BoundarySample) -> f64 {
    let rho = min_modulus(f);
    if rho >= 1.0 - UNIT_SNAP {
        return 0.0;
    }
    (1.0 - rho * rho).max(0.0).sqrt()
}

/// Best Nazarov lower bound over a ladder of levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: f64,
    /// Level attaining `value`; `None` when every sublevel set is empty.
    pub eta: Option<f64>,
    pub measure: f64,
}

/// 33 equispaced levels from 0.02 to 0.98.
pub fn default_eta_grid() -> Vec<f64> {
    (0..33).map(|i| 0.02 + 0.96 * i as f64 / 32.0).collect()
}

/// `max_η (c·m(E_η(f)))^N·(1 − η)` over `eta_grid`.
pub fn eps_lower(f: &BoundarySample, n: usize, eta_grid: &[f64]) -> Result<LowerBound> {
    if n == 0 {
        return Err(Error::Contract("N must be >= 1".into()));
    }
    let mut best = LowerBound {
        value: 0.0,
        eta: None,
        measure: 0.0,
    };
    for &eta in eta_grid {
        let m = sublevel_set(f, eta)?.measure;
        let value = (NAZAROV_C * m).powi(n as i32) * (1.0 - eta);
        if value > best.value {
            best = LowerBound {
                value,
                eta: Some(eta),
                measure: m,
            };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LowerProvenance {
    NazarovSweep,
    WitnessEmpirical,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UpperProvenance {
    Parallelogram,
    #[serde(rename = "TRIVIAL_2")]
    Trivial2,
}

/// An interval `[lower, upper]` enclosing `ε_Φ(f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityBracket {
    pub lower: f64,
    pub upper: f64,
    pub lower_provenance: LowerProvenance,
    pub upper_provenance: UpperProvenance,
}

impl AdmissibilityBracket {
    /// Nazarov lower bound and parallelogram upper bound. When `‖f‖∞`
    /// exceeds `1 + tol_sup` the parallelogram step does not apply and the
    /// upper end falls back to 2.
    pub fn compute(
        f: &BoundarySample,
        n: usize,
        eta_grid: &[f64],
        tol: &Tolerances,
    ) -> Result<Self> {
        let lower = eps_lower(f, n, eta_grid)?;
        let (upper, upper_provenance) = if sup_norm(f) <= 1.0 + tol.tol_sup {
            (eps_upper(f), UpperProvenance::Parallelogram)
        } else {
            (2.0, UpperProvenance::Trivial2)
        };
        Ok(Self {
            lower: lower.value,
            upper,
            lower_provenance: if lower.value > 0.0 {
                LowerProvenance::NazarovSweep
            } else {
                LowerProvenance::None
            },
            upper_provenance,
        })
    }

    /// Raises the lower end to the smallest witness norm over a δ-ladder,
    /// if that is larger. This is an empirical bound: it only covers the
    /// δ values actually tried.
    pub fn with_witness_norms(mut self, norms: &[f64]) -> Self {
        let m = norms.iter().cloned().fold(f64::INFINITY, f64::min);
        if norms.is_empty() || !m.is_finite() || m <= self.lower {
            return self;
        }
        self.lower = m.min(self.upper);
        self.lower_provenance = LowerProvenance::WitnessEmpirical;
        self
    }

    pub fn is_ordered(&self) -> bool {
        0.0 <= self.lower && self.lower <= self.upper && self.upper <= 2.0
    }
}

/// Result of [`probe_admissibility`].
#[derive(Debug, Clone, Serialize)]
pub struct ProbeOutcome {
    /// Largest `‖t·y‖∞` found.
    pub best: f64,
    /// `‖t·y‖∞` for every trial, in draw order.
    pub values: Vec<f64>,
    pub degree: usize,
    pub kernel_dim: usize,
    /// `best ≥ eps`: `eps` is not admissible at this `δ`.
    pub certified: bool,
}

/// Random search for `y ∈ H∞_Φ` with `‖f ± t·y‖∞ ≤ 1 + δ` and large `‖t·y‖∞`.
///
/// Candidates are polynomials of degree `N + 16` whose random coefficient
/// vectors are projected onto the null space of `A_{j,k} = φ_j(z^k)`. For
/// each the largest admissible `t` is found by bisection on the
/// oversampled grid.
pub fn probe_admissibility(
    f: &BoundarySample,
    phi_set: &ConstraintSet,
    eps: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<ProbeOutcome> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Contract(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if !eps.is_finite() {
        return Err(Error::Contract(format!("eps must be finite, got {eps}")));
    }
    let grid = f.grid();
    let n = grid.n_grid();
    let degree = phi_set.len() + PROBE_EXTRA_DEGREE;
    if degree as i64 > grid.freq_range().1 - 1 {
        return Err(Error::Contract(format!(
            "probe degree {degree} too large for n_grid = {n}"
        )));
    }
    for phi in phi_set.functionals() {
        phi.check_grid(&grid)?;
    }
    let a = DMatrix::from_fn(phi_set.len(), degree + 1, |j, k| {
        phi_set.functionals()[j].on_monomial(k as i64, n)
    });
    let basis = null_basis(&a, NULL_RTOL);
    if basis.is_empty() {
        return Err(Error::Degenerate(Degeneracy::EmptyKernel));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<Vec<Complex64>> = (0..trials)
        .map(|_| {
            let raw: Vec<Complex64> = (0..=degree)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let mut proj = vec![Complex64::new(0.0, 0.0); degree + 1];
            for b in &basis {
                let c: Complex64 = b.iter().zip(&raw).map(|(bi, ri)| bi.conj() * ri).sum();
                for (p, bi) in proj.iter_mut().zip(b) {
                    *p += c * bi;
                }
            }
            proj
        })
        .collect();

    let f_fine = f.fine_values();
    let limit = 1.0 + delta;
    let values: Vec<f64> = candidates
        .par_iter()
        .map(|coeffs| {
            let y = BoundarySample::from_fn(grid, |z| horner(coeffs, z))
                .expect("grid-sized sample")
                .fine_values();
            largest_step(&f_fine, &y, limit)
        })
        .collect();
    let best = values.iter().cloned().fold(0.0, f64::max);
    Ok(ProbeOutcome {
        best,
        values,
        degree,
        kernel_dim: basis.len(),
        certified: best >= eps,
    })
}

/// `‖t·y‖∞` for the largest `t` (to bisection accuracy) with
/// `max|f ± t·y| ≤ limit` at every point.
fn largest_step(f: &[Complex64], y: &[Complex64], limit: f64) -> f64 {
    let y_max = y.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let fits = |t: f64| {
        f.iter()
            .zip(y)
            .all(|(a, b)| (a + b * t).norm() <= limit && (a - b * t).norm() <= limit)
    };
    if y_max == 0.0 || !fits(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, (2.0 + limit) / y_max);
    for _ in 0..PROBE_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo * y_max
}

fn default_oversample() -> usize {
    DEFAULT_OVERSAMPLE
}

fn default_margin() -> usize {
    DEFAULT_MARGIN
}

/// Grid of `(N, η, γ)` cells and the per-cell settings of [`run_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(rename = "N_values")]
    pub n_values: Vec<usize>,
    pub eta_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub delta_ladder: Vec<f64>,
    pub n_grid: usize,
    pub seed: u64,
    pub trials_per_cell: usize,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_margin")]
    pub margin: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_values: vec![1, 2, 3],
            eta_values: vec![0.3, 0.5, 0.8],
            gamma_values: vec![0.25, 0.5, 0.75],
            delta_ladder: vec![0.1, 0.03, 0.01, 0.003, 0.001],
            n_grid: 4096,
            seed: 0,
            trials_per_cell: 8,
            oversample: DEFAULT_OVERSAMPLE,
            margin: DEFAULT_MARGIN,
            tolerances: Tolerances::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<BoundaryGrid> {
        let grid = BoundaryGrid::new(self.n_grid, self.oversample)?;
        self.tolerances.validate()?;
        if self.n_values.contains(&0) {
            return Err(Error::Contract("N_values must be positive".into()));
        }
        for (name, values) in [
            ("eta_values", &self.eta_values),
            ("gamma_values", &self.gamma_values),
        ] {
            if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
                return Err(Error::Contract(format!(
                    "{name} must lie in (0,1), got {v}"
                )));
            }
        }
        if self
            .delta_ladder
            .iter()
            .any(|d| !(*d > 0.0 && d.is_finite()))
        {
            return Err(Error::Contract("delta_ladder must be positive".into()));
        }
        if self.delta_ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Contract(
                "delta_ladder must be strictly descending".into(),
            ));
        }
        Ok(grid)
    }

    fn cells(&self) -> Vec<(usize, f64, f64)> {
        let mut cells = Vec::new();
        for &n in &self.n_values {
            for &eta in &self.eta_values {
                for &gamma in &self.gamma_values {
                    cells.push((n, eta, gamma));
                }
            }
        }
        cells
    }
}

/// Strong witness outcome at one `δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessStat {
    pub delta: f64,
    pub norm_g: Option<f64>,
    pub target: Option<f64>,
    pub core_guarantee: Option<f64>,
    pub norm_pm: Option<f64>,
    pub bound_pm: f64,
    pub target_met: bool,
    pub error: Option<String>,
}

/// Probe outcome at one `δ`, against `sqrt((1 + δ)² − ρ²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeStat {
    pub delta: f64,
    pub best: f64,
    pub pointwise_bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub eta: f64,
    pub gamma: f64,
    /// `(c·γ)^N·(1 − η)`.
    pub lower_paper: f64,
    /// `sqrt(1 − η²)`.
    pub upper_paper: f64,
    pub bracket: Option<AdmissibilityBracket>,
    pub eps_lower_eta: Option<f64>,
    pub sublevel_measure: Option<f64>,
    pub sandwich_ok: bool,
    pub witnesses: Vec<WitnessStat>,
    pub probes: Vec<ProbeStat>,
    pub violations: Vec<String>,
    pub violation_count: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub total_violations: usize,
    pub all_sandwich_ok: bool,
}

#[derive(Serialize)]
struct CsvRow {
    #[serde(rename = "N")]
    n: usize,
    eta: f64,
    gamma: f64,
    lower_paper: f64,
    eps_lower: Option<f64>,
    eps_upper: Option<f64>,
    upper_paper: f64,
    sandwich_ok: bool,
    witness_norm_g: Option<f64>,
    witness_target: Option<f64>,
    delta: Option<f64>,
}

impl SweepReport {
    /// JSON envelope echoing `config`.
    pub fn to_json(&self, config: &SweepConfig) -> Result<String> {
        Envelope::new(config, self).to_json()
    }

    /// One line per cell; the witness columns refer to the smallest `δ`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            let last = row.witnesses.last();
            w.serialize(CsvRow {
                n: row.n,
                eta: row.eta,
                gamma: row.gamma,
                lower_paper: row.lower_paper,
                eps_lower: row.bracket.map(|b| b.lower),
                eps_upper: row.bracket.map(|b| b.upper),
                upper_paper: row.upper_paper,
                sandwich_ok: row.sandwich_ok,
                witness_norm_g: last.and_then(|s| s.norm_g),
                witness_target: last.and_then(|s| s.target),
                delta: last.map(|s| s.delta),
            })?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Serialization(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
    }
}

fn mix_seed(seed: u64, index: u64) -> u64 {
    seed ^ (index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs every `(N, η, γ)` cell of `config`. Cells run in parallel; rows keep
/// the `N`-major order of the config and depend only on the config.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    let grid = config.validate()?;
    let rows: Vec<SweepRow> = config
        .cells()
        .into_par_iter()
        .enumerate()
        .map(|(i, (n, eta, gamma))| {
            run_cell(config, grid, n, eta, gamma, mix_seed(config.seed, i as u64))
        })
        .collect();
    Ok(SweepReport {
        total_violations: rows.iter().map(|r| r.violation_count).sum(),
        all_sandwich_ok: rows.iter().all(|r| r.sandwich_ok),
        rows,
    })
}

fn run_cell(
    config: &SweepConfig,
    grid: BoundaryGrid,
    n: usize,
    eta: f64,
    gamma: f64,
    seed: u64,
) -> SweepRow {
    let mut row = SweepRow {
        n,
        eta,
        gamma,
        lower_paper: (NAZAROV_C * gamma).powi(n as i32) * (1.0 - eta),
        upper_paper: (1.0 - eta * eta).sqrt(),
        bracket: None,
        eps_lower_eta: None,
        sublevel_measure: None,
        sandwich_ok: false,
        witnesses: Vec::new(),
        probes: Vec::new(),
        violations: Vec::new(),
        violation_count: 0,
        error: None,
    };
    if let Err(e) = fill_cell(config, grid, seed, &mut row) {
        row.error = Some(e.to_string());
        row.violations.push(format!("cell failed: {e}"));
    }
    row.violation_count = row.violations.len();
    row
}

fn fill_cell(
    config: &SweepConfig,
    grid: BoundaryGrid,
    seed: u64,
    row: &mut SweepRow,
) -> Result<()> {
    let tol = &config.tolerances;
    let (n, eta) = (row.n, row.eta);
    let c = two_level_construction(grid, n, eta, row.gamma, None, config.margin, tol.floor)?;

    let membership = membership_defect(&c.f, &c.constraints)?;
    if membership > tol.tol_kernel {
        row.violations
            .push(format!("construction membership defect {membership:.3e}"));
    }

    let mut etas = default_eta_grid();
    etas.push(eta);
    let lower = eps_lower(&c.f, n, &etas)?;
    let bracket = AdmissibilityBracket::compute(&c.f, n, &etas, tol)?;
    row.eps_lower_eta = lower.eta;
    row.sublevel_measure = Some(sublevel_set(&c.f, eta)?.measure);
    row.bracket = Some(bracket);
    row.sandwich_ok = row.lower_paper <= bracket.lower + SANDWICH_TOL
        && bracket.lower <= bracket.upper + SANDWICH_TOL
        && bracket.upper <= row.upper_paper + SANDWICH_TOL;
    if !row.sandwich_ok {
        row.violations.push(format!(
            "sandwich fails: {} <= {} <= {} <= {}",
            row.lower_paper, bracket.lower, bracket.upper, row.upper_paper
        ));
    }

    let rho = min_modulus(&c.f);
    let opts = StrongOptions {
        margin: config.margin,
        ..StrongOptions::default()
    };
    for (k, &delta) in config.delta_ladder.iter().enumerate() {
        let mut stat = WitnessStat {
            delta,
            norm_g: None,
            target: None,
            core_guarantee: None,
            norm_pm: None,
            bound_pm: 1.0 + delta,
            target_met: false,
            error: None,
        };
        match strong_violation_witness(&c.f, &c.constraints, eta, delta, tol, &opts) {
            Ok(w) => {
                stat.norm_g = Some(w.norm_g);
                stat.target = Some(w.target_bound);
                stat.core_guarantee = w.strong.as_ref().map(|s| s.core_guarantee);
                stat.norm_pm = Some(w.norm_plus.max(w.norm_minus));
                stat.target_met = w.target_met;
                for v in w.violations(tol) {
                    row.violations
                        .push(format!("witness at delta {delta}: {v}"));
                }
                if !w.target_met {
                    row.violations.push(format!(
                        "witness at delta {delta}: norm {} below target {}",
                        w.norm_g, w.target_bound
                    ));
                }
            }
            Err(e) => {
                stat.error = Some(e.to_string());
                row.violations
                    .push(format!("witness at delta {delta} failed: {e}"));
            }
        }
        row.witnesses.push(stat);

        if config.trials_per_cell > 0 {
            let probe = probe_admissibility(
                &c.f,
                &c.constraints,
                bracket.upper,
                delta,
                config.trials_per_cell,
                mix_seed(seed, k as u64),
            )?;
            let bound = ((1.0 + delta).powi(2) - rho * rho).max(0.0).sqrt();
            let within_bound = probe.best <= bound + PROBE_TOL;
            if !within_bound {
                row.violations.push(format!(
                    "probe at delta {delta}: {} exceeds pointwise bound {bound}",
                    probe.best
                ));
            }
            row.probes.push(ProbeStat {
                delta,
                best: probe.best,
                pointwise_bound: bound,
                within_bound,
            });
        }
    }
    Ok(())
}

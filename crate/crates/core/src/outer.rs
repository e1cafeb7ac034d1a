//! Outer functions with prescribed boundary modulus, and boundary classifiers.

use num_complex::Complex64;
use serde::Serialize;

use crate::circle::{conjugate_function, sup_norm, BoundarySample, GridMask};
use crate::{Error, Result};

/// Default lower clip for moduli before taking logs.
pub const DEFAULT_FLOOR: f64 = 1e-9;
/// Stabilization tolerance of the floor ladder.
pub const TOL_STAB: f64 = 1e-3;
/// Relative slack in `|f| ≤ η`; values equal to `η` up to rounding count as members.
pub const LEVEL_RTOL: f64 = 1e-12;
/// Default width, in grid cells, of the smooth ramp used to mollify two-level moduli.
pub const DEFAULT_MARGIN: usize = 96;

/// Boundary trace of an outer function together with its quality measures.
#[derive(Debug, Clone)]
pub struct OuterResult {
    pub boundary: BoundarySample,
    /// `max_j ||G(ζ_j)| − max(w_j, floor)|`.
    pub modulus_error: f64,
    /// Negative-frequency mass of `boundary`.
    pub analyticity: f64,
}

/// Builds `G = exp(L + iL̃)` with `L = log max(w, floor)`.
///
/// The conjugate `L̃` has zero mean, so the analytic extension satisfies
/// `G(0) = exp(∫L dm) > 0`.
pub fn make_outer(w: &BoundarySample, floor: f64) -> Result<OuterResult> {
    if !(floor.is_finite() && floor > 0.0) {
        return Err(Error::Contract(format!(
            "floor must be positive, got {floor}"
        )));
    }
    w.require_real("modulus")?;
    if let Some(j) = w.values().iter().position(|v| v.re < 0.0) {
        return Err(Error::Contract(format!(
            "modulus must be nonnegative (index {j} is {})",
            w.values()[j].re
        )));
    }
    let clipped: Vec<f64> = w.values().iter().map(|v| v.re.max(floor)).collect();
    let log = BoundarySample::from_real(
        w.grid(),
        &clipped.iter().map(|x| x.ln()).collect::<Vec<_>>(),
    )?;
    let conj = conjugate_function(&log)?;
    let boundary = BoundarySample::new(
        w.grid(),
        log.values()
            .iter()
            .zip(conj.values())
            .map(|(l, t)| Complex64::new(l.re, t.re).exp())
            .collect(),
    )?;
    let modulus_error = boundary
        .values()
        .iter()
        .zip(&clipped)
        .fold(0.0f64, |m, (g, w)| m.max((g.norm() - w).abs()));
    let analyticity = crate::circle::analyticity_defect(&boundary);
    Ok(OuterResult {
        boundary,
        modulus_error,
        analyticity,
    })
}

/// C∞ transition from 0 (at `t ≤ 0`) to 1 (at `t ≥ 1`).
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// A two-level modulus mollified from below.
#[derive(Debug, Clone)]
pub struct TwoLevelModulus {
    /// Real, nonnegative sample with `modulus ≤ level_in·χ_E + level_out·χ_{𝕋∖E}`.
    pub modulus: BoundarySample,
    /// Cells where the modulus equals `level_in` exactly.
    pub core_in: GridMask,
    /// Cells where the modulus equals `level_out` exactly.
    pub core_out: GridMask,
    /// Ramp width actually used (may be smaller than requested on thin sets).
    pub margin: usize,
}

/// Mollifies `level_in·χ_E + level_out·χ_{𝕋∖E}` from below.
///
/// The region carrying the larger level is eroded: within `margin` cells of
/// its boundary the value ramps smoothly down to the smaller level. The
/// result never exceeds the step function. If the high region has no cell
/// deeper than `margin`, the margin is halved until it does (down to 0).
pub fn two_level_modulus(
    set: &GridMask,
    level_in: f64,
    level_out: f64,
    margin: usize,
) -> Result<TwoLevelModulus> {
    if !(level_in >= 0.0 && level_out >= 0.0 && level_in.is_finite() && level_out.is_finite()) {
        return Err(Error::Contract(
            "levels must be finite and nonnegative".into(),
        ));
    }
    let grid = set.grid();
    let (high_region, high, low) = if level_in >= level_out {
        (set.clone(), level_in, level_out)
    } else {
        (set.complement(), level_out, level_in)
    };
    let depth = high_region.depth();
    let deepest = depth
        .iter()
        .zip(high_region.member())
        .filter(|(_, &m)| m)
        .map(|(&d, _)| d)
        .max()
        .unwrap_or(0);
    let mut margin = margin;
    while margin > 0 && deepest <= margin {
        margin /= 2;
    }
    let values: Vec<f64> = depth
        .iter()
        .map(|&d| {
            if d == 0 {
                low
            } else if d > margin {
                high
            } else {
                low + (high - low) * smoothstep(d as f64 / (margin + 1) as f64)
            }
        })
        .collect();
    let exact_high = GridMask::new(grid, depth.iter().map(|&d| d > margin).collect())?;
    let exact_low = high_region.complement();
    let (core_in, core_out) = if level_in >= level_out {
        (exact_high, exact_low)
    } else {
        (exact_low, exact_high)
    };
    Ok(TwoLevelModulus {
        modulus: BoundarySample::from_real(grid, &values)?,
        core_in,
        core_out,
        margin,
    })
}

/// `max_j ||f(ζ_j)| − 1|`.
pub fn inner_defect(f: &BoundarySample) -> f64 {
    f.values()
        .iter()
        .fold(0.0, |m, v| m.max((v.norm() - 1.0).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExtremalityVerdict {
    ExtremeLikely,
    NotExtreme,
    Inconclusive,
}

/// Floor-ladder diagnostic for the divergence of `∫ log(1 − |f|) dm`.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremalityReport {
    pub floor_ladder: Vec<f64>,
    /// `I(τ) = ∫ log max(1 − |f|, τ) dm` for each rung.
    pub integrals: Vec<f64>,
    /// Least-squares slope of `I` against `log τ` over the last rungs.
    pub slope: f64,
    pub verdict: ExtremalityVerdict,
}

/// `τ = 2^-4, 2^-8, …, 2^-40`.
pub fn default_ladder() -> Vec<f64> {
    (1..=10).map(|i| 2f64.powi(-4 * i)).collect()
}

const SLOPE_RUNGS: usize = 4;

pub fn extremality_test(
    f: &BoundarySample,
    ladder: &[f64],
    tol_sup: f64,
) -> Result<ExtremalityReport> {
    if ladder.len() < 2 {
        return Err(Error::Contract("ladder needs at least two rungs".into()));
    }
    if ladder.iter().any(|&t| !(t > 0.0 && t.is_finite()))
        || ladder.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::Contract(
            "ladder must be positive and strictly decreasing".into(),
        ));
    }
    let norm = sup_norm(f);
    if norm > 1.0 + tol_sup {
        return Err(Error::Contract(format!(
            "‖f‖∞ = {norm} exceeds 1 + tol_sup"
        )));
    }
    let gap: Vec<f64> = f
        .values()
        .iter()
        .map(|v| (1.0 - v.norm()).max(0.0))
        .collect();
    let n = gap.len() as f64;
    let integrals: Vec<f64> = ladder
        .iter()
        .map(|&tau| gap.iter().map(|&g| g.max(tau).ln()).sum::<f64>() / n)
        .collect();

    let tail = SLOPE_RUNGS.min(ladder.len());
    let xs: Vec<f64> = ladder[ladder.len() - tail..]
        .iter()
        .map(|t| t.ln())
        .collect();
    let ys = &integrals[integrals.len() - tail..];
    let mx = xs.iter().sum::<f64>() / tail as f64;
    let my = ys.iter().sum::<f64>() / tail as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };

    let k = integrals.len();
    let last_drop = integrals[k - 2] - integrals[k - 1];
    let verdict = if last_drop.abs() < TOL_STAB {
        ExtremalityVerdict::NotExtreme
    } else if k >= 3 && last_drop >= 0.5 * (integrals[k - 3] - integrals[k - 2]) {
        // Drops are not shrinking: a set of positive measure keeps feeding log τ.
        ExtremalityVerdict::ExtremeLikely
    } else {
        ExtremalityVerdict::Inconclusive
    };
    Ok(ExtremalityReport {
        floor_ladder: ladder.to_vec(),
        integrals,
        slope,
        verdict,
    })
}

/// `E_η(f) = {ζ : |f(ζ)| ≤ η}` at grid resolution.
#[derive(Debug, Clone)]
pub struct SublevelSet {
    pub eta: f64,
    pub mask: GridMask,
    pub measure: f64,
}

pub fn sublevel_set(f: &BoundarySample, eta: f64) -> Result<SublevelSet> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Contract(format!("eta must lie in (0,1), got {eta}")));
    }
    let level = eta * (1.0 + LEVEL_RTOL);
    let mask = GridMask::new(
        f.grid(),
        f.values().iter().map(|v| v.norm() <= level).collect(),
    )?;
    let measure = mask.measure();
    Ok(SublevelSet { eta, mask, measure })
}

/// Measure of `{ζ : ||f(ζ)| − 1| ≤ tol}`; a grid surrogate for the
/// exposed-point condition `m{|f| = 1} > 0`.
pub fn exposed_mass(f: &BoundarySample, tol: f64) -> f64 {
    let hits = f
        .values()
        .iter()
        .filter(|v| (v.norm() - 1.0).abs() <= tol)
        .count();
    hits as f64 / f.len() as f64
}

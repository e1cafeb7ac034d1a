//! Boundary functions described on the command line.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use hball_core::admissibility::two_level_construction;
use hball_core::circle::{
    analyticity_defect, from_spectrum, BoundaryGrid, BoundarySample, Spectrum,
};
use hball_core::constraints::ConstraintSet;
use hball_core::outer::{make_outer, DEFAULT_MARGIN};
use hball_core::{Error, Result, Tolerances};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest negative-frequency mass accepted for a rational function.
const RATIONAL_ANALYTIC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionSpec {
    /// z^N·F with |F| = eta on an arc of measure gamma and 1 elsewhere
    TwoLevel(TwoLevelArgs),
    /// Finite Blaschke product with the given zeros
    Blaschke(BlaschkeArgs),
    /// p(z)/q(z) from coefficient lists (constant term first)
    PolyFraction(PolyFractionArgs),
    /// Outer function with the modulus read from a JSON array
    OuterFromModulus(FileArgs),
    /// Spectrum read from a JSON list of {k, re, im}
    SpectrumLiteral(FileArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TwoLevelArgs {
    /// Number of vanishing Fourier coefficients
    #[arg(long = "n")]
    pub n: usize,
    #[arg(long)]
    pub eta: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Ramp width (grid cells) of the mollified modulus
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BlaschkeArgs {
    /// Zeros inside the unit disk, e.g. `0.5,-0.2+0.3i`
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub zeros: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PolyFractionArgs {
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub num: Vec<String>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "1"
    )]
    pub den: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FileArgs {
    #[arg(long)]
    pub file: PathBuf,
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct SpectrumEntry {
    k: i64,
    re: f64,
    im: f64,
}

/// A constructed boundary function, with the constraint set it was built for (if any).
pub struct Built {
    pub f: BoundarySample,
    pub constraints: Option<ConstraintSet>,
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also `j` for the imaginary unit).
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Contract(format!("cannot parse complex number {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, imag(&body[i..])?))
        }
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

fn parse_list(items: &[String]) -> Result<Vec<Complex64>> {
    items.iter().map(|s| parse_complex(s)).collect()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Contract(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Contract(format!("{}: {e}", path.display())))
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

impl FunctionSpec {
    pub fn build(&self, grid: BoundaryGrid, tol: &Tolerances) -> Result<Built> {
        match self {
            FunctionSpec::TwoLevel(a) => {
                let c =
                    two_level_construction(grid, a.n, a.eta, a.gamma, None, a.margin, tol.floor)?;
                Ok(Built {
                    f: c.f,
                    constraints: Some(c.constraints),
                })
            }
            FunctionSpec::Blaschke(a) => {
                let zeros = parse_list(&a.zeros)?;
                if let Some(z) = zeros.iter().find(|z| z.norm().is_nan() || z.norm() >= 1.0) {
                    return Err(Error::Contract(format!(
                        "Blaschke zero {z} is not inside the unit disk"
                    )));
                }
                let f = BoundarySample::from_fn(grid, |z| {
                    zeros
                        .iter()
                        .map(|a| (z - a) / (1.0 - a.conj() * z))
                        .product()
                })?;
                Ok(Built {
                    f,
                    constraints: None,
                })
            }
            FunctionSpec::PolyFraction(a) => {
                let num = parse_list(&a.num)?;
                let den = parse_list(&a.den)?;
                if den.iter().all(|c| c.norm() == 0.0) {
                    return Err(Error::Contract("denominator is identically zero".into()));
                }
                let mut values = Vec::with_capacity(grid.n_grid());
                for z in grid.points() {
                    let q = horner(&den, z);
                    if q.norm() < tol.floor {
                        return Err(Error::Contract(format!("denominator vanishes near {z}")));
                    }
                    values.push(horner(&num, z) / q);
                }
                let f = BoundarySample::new(grid, values)?;
                let defect = analyticity_defect(&f);
                if defect > RATIONAL_ANALYTIC_TOL {
                    return Err(Error::Contract(format!(
                        "p/q is not analytic in the disk (negative-frequency mass {defect:.3e})"
                    )));
                }
                Ok(Built {
                    f,
                    constraints: None,
                })
            }
            FunctionSpec::OuterFromModulus(a) => {
                let modulus: Vec<f64> = read_json(&a.file)?;
                if modulus.len() != grid.n_grid() {
                    return Err(Error::Contract(format!(
                        "modulus has {} samples but n_grid is {}",
                        modulus.len(),
                        grid.n_grid()
                    )));
                }
                let w = BoundarySample::from_real(grid, &modulus)?;
                Ok(Built {
                    f: make_outer(&w, tol.floor)?.boundary,
                    constraints: None,
                })
            }
            FunctionSpec::SpectrumLiteral(a) => {
                let entries: Vec<SpectrumEntry> = read_json(&a.file)?;
                let sp =
                    Spectrum::from_pairs(entries.iter().map(|e| (e.k, Complex64::new(e.re, e.im))));
                Ok(Built {
                    f: from_spectrum(&sp, grid)?,
                    constraints: None,
                })
            }
        }
    }
}

//! Relativistic funnel (Cornell) problem with `ħ = c = 1`:
//!
//! `p²(r) = E²/4 − (m − α̃/r + κr)² − (l+½)²/r²`.
//!
//! Multiplying by `r²` gives a quartic with `r²p²(0) < 0` and a negative
//! leading coefficient, so it has up to two real cuts: one at `r > 0` and
//! one at `r < 0`. The real-cut sum over both equals `π(E²/8κ + α̃ − Λ)`
//! whenever all four roots are real, and the quantization condition
//! `sum = 2π(n_r + ½)` then gives `E² = 8κ(2(n_r+½) + Λ − α̃)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::action::{find_cuts, PhaseIntegral};
use crate::error::{Error, Result};
use crate::numerics::{geomspace, integrate_sqrt_cut};
use crate::quantizer::{solve_phase_condition, SearchSpec};

const CUT_SCAN: usize = 4096;
const ROOT_TOL: f64 = 1e-14;
const QUAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornellParams {
    pub m: f64,
    pub alpha_tilde: f64,
    pub kappa: f64,
    pub l: u32,
}

impl CornellParams {
    pub fn new(m: f64, alpha_tilde: f64, kappa: f64, l: u32) -> Result<Self> {
        let p = CornellParams {
            m,
            alpha_tilde,
            kappa,
            l,
        };
        p.validate()?;
        Ok(p)
    }

    /// `α̃ = 4α_s/3`.
    pub fn from_alpha_s(m: f64, alpha_s: f64, kappa: f64, l: u32) -> Result<Self> {
        Self::new(m, 4.0 * alpha_s / 3.0, kappa, l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m >= 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be non-negative, got {}", self.m)));
        }
        if !(self.alpha_tilde.is_finite() && self.alpha_tilde >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha_tilde must be non-negative, got {}",
                self.alpha_tilde
            )));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {}", self.kappa)));
        }
        Ok(())
    }

    pub fn with_l(self, l: u32) -> Self {
        CornellParams { l, ..self }
    }

    fn l_half(&self) -> f64 {
        self.l as f64 + 0.5
    }

    /// `Λ = √((l+½)² + α̃²)`.
    pub fn lambda(&self) -> f64 {
        self.l_half().hypot(self.alpha_tilde)
    }

    /// Coefficients `[a₀, a₁, a₂, a₃, a₄]` of `r²p²(r)`.
    pub fn quartic_coefficients(&self, energy: f64) -> [f64; 5] {
        let (m, a, k) = (self.m, self.alpha_tilde, self.kappa);
        [
            -(a * a + self.l_half().powi(2)),
            2.0 * m * a,
            energy * energy / 4.0 - m * m + 2.0 * a * k,
            -2.0 * m * k,
            -k * k,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornellLevel {
    pub n_r: u32,
    pub l: u32,
    pub e_squared: f64,
    pub e: f64,
}

impl CornellLevel {
    fn from_e_squared(n_r: u32, l: u32, e_squared: f64) -> Result<Self> {
        if !(e_squared > 0.0) || !e_squared.is_finite() {
            return Err(Error::Unphysical(format!("E² = {e_squared} for n_r = {n_r}, l = {l}")));
        }
        Ok(CornellLevel {
            n_r,
            l,
            e_squared,
            e: e_squared.sqrt(),
        })
    }
}

fn continued_p_squared(params: &CornellParams, energy: f64, r: f64) -> f64 {
    let h = params.m - params.alpha_tilde / r + params.kappa * r;
    energy * energy / 4.0 - h * h - params.l_half().powi(2) / (r * r)
}

pub fn cornell_p_squared(params: &CornellParams, energy: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::DomainViolation {
            at: r,
            reason: "radial momentum requires r > 0".into(),
        });
    }
    Ok(continued_p_squared(params, energy, r))
}

/// `r²p²(r)` evaluated from its expanded coefficients; valid for any real `r`.
pub fn cornell_quartic(params: &CornellParams, energy: f64, r: f64) -> f64 {
    let c = params.quartic_coefficients(energy);
    (((c[4] * r + c[3]) * r + c[2]) * r + c[1]) * r + c[0]
}

pub fn cornell_spectrum_closed_form(params: &CornellParams, n_r: u32) -> Result<CornellLevel> {
    params.validate()?;
    let e2 = 8.0 * params.kappa * (2.0 * (n_r as f64 + 0.5) + params.lambda() - params.alpha_tilde);
    CornellLevel::from_e_squared(n_r, params.l, e2)
}

/// Real cuts of `p²` on both sides of the origin, each as `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CornellCuts {
    pub positive: Option<(f64, f64)>,
    pub negative: Option<(f64, f64)>,
}

impl CornellCuts {
    pub fn count(&self) -> usize {
        self.positive.is_some() as usize + self.negative.is_some() as usize
    }
}

// Scans |r| between reciprocal and ordinary Cauchy root bounds.
fn half_line_cut(params: &CornellParams, energy: f64, sign: f64) -> Result<Option<(f64, f64)>> {
    let c = params.quartic_coefficients(energy);
    let upper = 1.0 + c[..4].iter().map(|a| (a / c[4]).abs()).fold(0.0, f64::max);
    let lower = c[0].abs() / (c[0].abs() + c[1..].iter().map(|a| a.abs()).fold(0.0, f64::max));
    let ts = geomspace(0.5 * lower, 2.0 * upper, CUT_SCAN);
    match find_cuts(|t| cornell_quartic(params, energy, sign * t), &ts, ROOT_TOL, energy) {
        Ok((_, cuts)) if cuts.len() == 1 => {
            let (a, b) = cuts[0];
            Ok(Some(if sign > 0.0 { (a, b) } else { (-b, -a) }))
        }
        Ok((_, cuts)) => Err(Error::CutCountMismatch {
            expected: 1,
            found: cuts.len(),
            energy,
        }),
        Err(Error::NoCuts { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn cornell_cuts(params: &CornellParams, energy: f64) -> Result<CornellCuts> {
    params.validate()?;
    Ok(CornellCuts {
        positive: half_line_cut(params, energy, 1.0)?,
        negative: half_line_cut(params, energy, -1.0)?,
    })
}

/// `∫√p² dr` over every real cut; errors with `NoCuts` if there are none.
pub fn cornell_cut_sum(params: &CornellParams, energy: f64) -> Result<PhaseIntegral> {
    let cuts = cornell_cuts(params, energy)?;
    if cuts.count() == 0 {
        return Err(Error::NoCuts { energy });
    }
    let per_cut = [cuts.negative, cuts.positive]
        .into_iter()
        .flatten()
        .map(|(a, b)| integrate_sqrt_cut(|r| continued_p_squared(params, energy, r), a, b, QUAD_TOL))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseIntegral {
        value: per_cut.iter().sum(),
        per_cut,
    })
}

// min over r > 0 of (m + s(−α̃/r + κr))² + L²/r², with s = ±1 for the two sides.
fn side_threshold(params: &CornellParams, sign: f64) -> f64 {
    let g = |t: f64| {
        let h = params.m + sign * (-params.alpha_tilde / t + params.kappa * t);
        h * h + params.l_half().powi(2) / (t * t)
    };
    let scale = (params.lambda() / params.kappa).sqrt();
    let ts = geomspace(1e-4 * scale, 1e4 * scale, 2001);
    let i = (0..ts.len())
        .min_by(|&i, &j| g(ts[i]).total_cmp(&g(ts[j])))
        .unwrap_or(0);
    let (mut a, mut b) = (ts[i.saturating_sub(1)], ts[(i + 1).min(ts.len() - 1)]);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if g(c) < g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    2.0 * g(0.5 * (a + b)).sqrt()
}

/// Energies above which the positive and the negative cut exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutThresholds {
    pub positive: f64,
    pub negative: f64,
}

impl CutThresholds {
    /// Energy above which all four roots are real.
    pub fn both(&self) -> f64 {
        self.positive.max(self.negative)
    }
}

pub fn cut_thresholds(params: &CornellParams) -> CutThresholds {
    CutThresholds {
        positive: side_threshold(params, 1.0),
        negative: side_threshold(params, -1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub energy: f64,
    pub cut_sum: f64,
    /// `π(E²/8κ + α̃ − Λ)`.
    pub analytic: f64,
    pub residual: f64,
}

pub fn contour_identity(params: &CornellParams, energy: f64) -> Result<IdentityCheck> {
    let sum = cornell_cut_sum(params, energy)?;
    if sum.cut_count() != 2 {
        return Err(Error::CutCountMismatch {
            expected: 2,
            found: sum.cut_count(),
            energy,
        });
    }
    let analytic = PI * (energy * energy / (8.0 * params.kappa) + params.alpha_tilde - params.lambda());
    Ok(IdentityCheck {
        energy,
        cut_sum: sum.value,
        analytic,
        residual: (sum.value - analytic).abs(),
    })
}

pub fn contour_identity_residual(params: &CornellParams, energy: f64) -> Result<f64> {
    contour_identity(params, energy).map(|c| c.residual)
}

/// Solves `cut sum = 2π(n_r + ½)` for `E`.
///
/// Below the energy where both cuts are real the sum is a different
/// function; a level that would fall there is a cut-count anomaly.
pub fn cornell_quantize_numeric(params: &CornellParams, n_r: u32) -> Result<CornellLevel> {
    params.validate()?;
    let target = 2.0 * PI * (n_r as f64 + 0.5);
    let floor = cut_thresholds(params).both();
    let e_lo = floor * (1.0 + 1e-9);
    // Right at the threshold the new cut is too narrow for the scan.
    let at_floor = match cornell_cut_sum(params, e_lo) {
        Err(Error::NoCuts { .. }) => 0.0,
        other => other?.value,
    };
    if at_floor >= target {
        return Err(Error::CutCountMismatch {
            expected: 2,
            found: cornell_cuts(params, floor * (1.0 - 1e-9))?.count(),
            energy: e_lo,
        });
    }
    let spec = SearchSpec {
        floor,
        scale: floor.max(1e-3),
        energy_tol: 1e-13,
        residual_tol: 1e-12 * target,
        prescan_cuts: None,
    };
    let sol = solve_phase_condition(|e| cornell_cut_sum(params, e), target, &spec, 2)?;
    CornellLevel::from_e_squared(n_r, params.l, sol.energy * sol.energy)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReggeRow {
    pub n_r: u32,
    pub l: u32,
    pub e_squared: f64,
    /// `E² − C²` when a shift `C` is supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shifted: Option<f64>,
    /// `8κ(2n_r + l + 3/2)`.
    pub linear: f64,
}

/// Closed-form levels on the `(n_r, l)` grid; `params.l` is ignored.
pub fn regge_table(params: &CornellParams, n_r_max: u32, l_max: u32, shift: Option<f64>) -> Result<Vec<ReggeRow>> {
    let mut rows = Vec::with_capacity(((n_r_max + 1) * (l_max + 1)) as usize);
    for n_r in 0..=n_r_max {
        for l in 0..=l_max {
            let level = cornell_spectrum_closed_form(&params.with_l(l), n_r)?;
            rows.push(ReggeRow {
                n_r,
                l,
                e_squared: level.e_squared,
                shifted: shift.map(|c| level.e_squared - c * c),
                linear: 8.0 * params.kappa * (2.0 * n_r as f64 + l as f64 + 1.5),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCase {
    pub params: CornellParams,
    pub energy: f64,
    pub cut_sum: f64,
    pub analytic: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitySweep {
    pub seed: u64,
    pub cases: Vec<IdentityCase>,
    pub max_residual: f64,
    pub all_pass: bool,
}

/// Random sweep with `κ ∈ [0.1, 0.5]`, `α̃ ∈ [0, 1]`, `m ∈ [0, 1]`,
/// `l ∈ {0..3}` and `E` 20% above the energy where both cuts exist.
pub fn identity_sweep(sweeps: usize, seed: u64) -> Result<IdentitySweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<CornellParams> = (0..sweeps)
        .map(|_| {
            let kappa = rng.gen_range(0.1..=0.5);
            let alpha_tilde = rng.gen_range(0.0..=1.0);
            let m = rng.gen_range(0.0..=1.0);
            let l = rng.gen_range(0..=3);
            CornellParams::new(m, alpha_tilde, kappa, l)
        })
        .collect::<Result<_>>()?;
    let cases = params
        .par_iter()
        .map(|p| {
            let energy = 1.2 * cut_thresholds(p).both();
            let c = contour_identity(p, energy)?;
            let tolerance = 1e-6 * c.analytic.abs().max(1.0);
            Ok(IdentityCase {
                params: *p,
                energy,
                cut_sum: c.cut_sum,
                analytic: c.analytic,
                residual: c.residual,
                tolerance,
                pass: c.residual <= tolerance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IdentitySweep {
        seed,
        max_residual: cases.iter().map(|c| c.residual).fold(0.0, f64::max),
        all_pass: cases.iter().all(|c| c.pass),
        cases,
    })
}

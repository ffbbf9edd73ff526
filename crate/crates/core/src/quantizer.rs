//! Energy search for the phase-integral quantization conditions.
//!
//! Two turning points: `∫√(P²−U) dx = πħ(n+½)`.
//! Several cuts with Maslov index `μ = 2ν`: the real-cut sum equals
//! `πħ(N + μ/4)`, half of the contour value `2πħ(N + μ/4)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::action::{action, scan_points, PhaseIntegral, SCAN_SAMPLES};
use crate::error::{Error, Result};
use crate::model::{QuantProblem, SpectrumEntry};
use crate::numerics::{brent, Bracket};

pub const PRESCAN_ENERGIES: usize = 64;
const MAX_EXPANSIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum QuantizationTarget {
    TwoTp { n: u32 },
    MultiTp { total_zeros: u32, maslov: u32 },
}

impl QuantizationTarget {
    pub fn multi(total_zeros: u32, maslov: u32) -> Result<Self> {
        if maslov < 2 || !maslov.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "Maslov index must be even and at least 2, got {maslov}"
            )));
        }
        Ok(QuantizationTarget::MultiTp { total_zeros, maslov })
    }

    /// Required value of the real-cut phase sum, in units of action.
    pub fn phase_target(&self, hbar: f64) -> f64 {
        match *self {
            QuantizationTarget::TwoTp { n } => PI * hbar * (n as f64 + 0.5),
            QuantizationTarget::MultiTp { total_zeros, maslov } => {
                PI * hbar * (total_zeros as f64 + maslov as f64 / 4.0)
            }
        }
    }

    /// Contour form `2πħ(N + μ/4)`.
    pub fn contour_target(&self, hbar: f64) -> f64 {
        2.0 * self.phase_target(hbar)
    }

    pub fn cut_count(&self) -> usize {
        match *self {
            QuantizationTarget::TwoTp { .. } => 1,
            QuantizationTarget::MultiTp { maslov, .. } => maslov as usize / 2,
        }
    }

    fn index(&self) -> u32 {
        match *self {
            QuantizationTarget::TwoTp { n } => n,
            QuantizationTarget::MultiTp { total_zeros, .. } => total_zeros,
        }
    }
}

/// Energy-search settings shared by every phase condition.
#[derive(Debug, Clone, Copy)]
pub struct SearchSpec {
    /// Lowest energy at which motion is possible.
    pub floor: f64,
    /// Typical energy magnitude, used for absolute tolerances and steps.
    pub scale: f64,
    pub energy_tol: f64,
    /// Absolute tolerance on `phase − target`.
    pub residual_tol: f64,
    /// Restrict the search to energies with exactly this many cuts.
    pub prescan_cuts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub energy: f64,
    pub phase: PhaseIntegral,
    pub residual: f64,
}

fn phase_or_empty<P>(phase: &P, e: f64) -> Result<PhaseIntegral>
where
    P: Fn(f64) -> Result<PhaseIntegral>,
{
    match phase(e) {
        Err(Error::NoCuts { .. }) => Ok(PhaseIntegral::empty()),
        other => other,
    }
}

/// Finds `E` with `phase(E) = target`, assuming the phase grows with `E`.
///
/// The upper bracket grows geometrically from the floor; an energy at which
/// the motion becomes unbounded is approached by halving instead.
pub fn solve_phase_condition<P>(phase: P, target: f64, spec: &SearchSpec, required_cuts: usize) -> Result<Solution>
where
    P: Fn(f64) -> Result<PhaseIntegral>,
{
    let scale = spec.scale.abs().max(f64::MIN_POSITIVE);
    let e_lo = spec.floor + 1e-9 * scale;
    let p_lo = match phase_or_empty(&phase, e_lo) {
        Err(Error::Unbounded { .. }) => {
            return Err(Error::NoBoundStates(format!(
                "motion is unbounded already at the potential minimum (E = {e_lo})"
            )))
        }
        other => other?,
    };
    if p_lo.value >= target {
        return Err(Error::NoBoundStates(format!(
            "phase at the potential minimum already exceeds the target {target}"
        )));
    }
    let mut good = (e_lo, p_lo.value);
    let mut bad: Option<f64> = None;
    let mut step = scale;
    let mut upper = None;
    for _ in 0..MAX_EXPANSIONS {
        let cand = match bad {
            Some(b) => {
                if b - good.0 <= 1e-14 * scale.max(b.abs()) {
                    break;
                }
                0.5 * (good.0 + b)
            }
            None => good.0 + step,
        };
        match phase_or_empty(&phase, cand) {
            Ok(p) if p.value >= target => {
                upper = Some((cand, p.value));
                break;
            }
            Ok(p) => {
                good = (cand, p.value);
                step *= 2.0;
            }
            Err(Error::Unbounded { .. }) => bad = Some(cand),
            Err(e) => return Err(e),
        }
    }
    let Some(mut upper) = upper else {
        return Err(Error::NoBoundStates(format!(
            "phase stays below {target} for all bound energies up to {}",
            good.0
        )));
    };
    let mut lower = good;

    if let Some(nu) = spec.prescan_cuts {
        (lower, upper) = restrict_to_cut_count(&phase, target, lower, upper, nu)?;
    }

    let bracket = Bracket::new(lower.0, upper.0, lower.1 - target, upper.1 - target)?;
    let root = brent(
        |e| Ok(phase_or_empty(&phase, e)?.value - target),
        &bracket,
        |e| spec.energy_tol * e.abs() + 1e-15 * scale,
        spec.residual_tol,
    )?;
    let result = phase_or_empty(&phase, root.x)?;
    if result.cut_count() != required_cuts {
        return Err(Error::CutCountMismatch {
            expected: required_cuts,
            found: result.cut_count(),
            energy: root.x,
        });
    }
    Ok(Solution {
        energy: root.x,
        residual: (result.value - target).abs(),
        phase: result,
    })
}

// Pre-scan at evenly spaced energies and keep the widest run with exactly
// `nu` cuts that still straddles the target.
fn restrict_to_cut_count<P>(
    phase: &P,
    target: f64,
    lower: (f64, f64),
    upper: (f64, f64),
    nu: usize,
) -> Result<((f64, f64), (f64, f64))>
where
    P: Fn(f64) -> Result<PhaseIntegral>,
{
    let samples: Vec<(f64, PhaseIntegral)> = (0..PRESCAN_ENERGIES)
        .map(|i| {
            let e = lower.0 + (upper.0 - lower.0) * i as f64 / (PRESCAN_ENERGIES - 1) as f64;
            let e = if i + 1 == PRESCAN_ENERGIES { upper.0 } else { e };
            phase_or_empty(phase, e).map(|p| (e, p))
        })
        .collect::<Result<_>>()?;
    if samples.iter().all(|(_, p)| p.cut_count() == nu) {
        return Ok((lower, upper));
    }
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < samples.len() {
        if samples[i].1.cut_count() != nu {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < samples.len() && samples[i + 1].1.cut_count() == nu {
            i += 1;
        }
        let end = i;
        let straddles = samples[start].1.value < target && samples[end].1.value >= target;
        if straddles && best.is_none_or(|(s, e)| end - start > e - s) {
            best = Some((start, end));
        }
        i += 1;
    }
    match best {
        Some((s, e)) => Ok((
            (samples[s].0, samples[s].1.value),
            (samples[e].0, samples[e].1.value),
        )),
        None => {
            let found = samples
                .iter()
                .find(|(_, p)| p.value >= target)
                .map_or(0, |(_, p)| p.cut_count());
            Err(Error::CutCountMismatch {
                expected: nu,
                found,
                energy: upper.0,
            })
        }
    }
}

/// Minimum of `U/(2m)` over the scan window, refined by golden section.
pub fn energy_floor(problem: &QuantProblem) -> Result<f64> {
    let v = |x: f64| {
        problem
            .effective_u(x)
            .map(|u| u / (2.0 * problem.mass))
            .unwrap_or(f64::INFINITY)
    };
    let xs = scan_points(problem, SCAN_SAMPLES);
    let (imin, vmin) = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (i, v(x)))
        .fold((0, f64::INFINITY), |acc, (i, val)| if val < acc.1 { (i, val) } else { acc });
    if !vmin.is_finite() {
        return Err(Error::DomainViolation {
            at: xs[0],
            reason: "potential is not finite anywhere in the window".into(),
        });
    }
    let (mut a, mut b) = (xs[imin.saturating_sub(1)], xs[(imin + 1).min(xs.len() - 1)]);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..120 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if v(c) < v(d) {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(vmin.min(v(0.5 * (a + b))))
}

fn search_spec(problem: &QuantProblem, prescan_cuts: Option<usize>) -> Result<SearchSpec> {
    let floor = energy_floor(problem)?;
    Ok(SearchSpec {
        floor,
        scale: floor.abs().max(1.0),
        energy_tol: problem.tolerances.energy,
        residual_tol: problem.tolerances.energy * PI * problem.hbar,
        prescan_cuts,
    })
}

pub fn quantize(problem: &QuantProblem, target: QuantizationTarget) -> Result<SpectrumEntry> {
    let prescan = match target {
        QuantizationTarget::TwoTp { .. } => None,
        QuantizationTarget::MultiTp { .. } => Some(target.cut_count()),
    };
    let spec = search_spec(problem, prescan)?;
    let goal = target.phase_target(problem.hbar);
    let sol = solve_phase_condition(|e| action(problem, e), goal, &spec, target.cut_count())?;
    Ok(SpectrumEntry {
        n: target.index(),
        energy: sol.energy,
        phase_residual: sol.residual / problem.hbar,
    })
}

pub fn quantize_2tp(problem: &QuantProblem, n: u32) -> Result<SpectrumEntry> {
    quantize(problem, QuantizationTarget::TwoTp { n })
}

pub fn quantize_mtp(problem: &QuantProblem, total_zeros: u32, maslov: u32) -> Result<SpectrumEntry> {
    quantize(problem, QuantizationTarget::multi(total_zeros, maslov)?)
}

#[derive(Debug, Error)]
#[error("level {level} failed: {source}")]
pub struct SpectrumError {
    pub level: u32,
    /// Levels below the failing one.
    pub partial: Vec<SpectrumEntry>,
    #[source]
    pub source: Error,
}

/// Levels `0..=n_max`, computed in parallel and merged in order.
pub fn spectrum(problem: &QuantProblem, n_max: u32) -> Result<Vec<SpectrumEntry>, SpectrumError> {
    let results: Vec<Result<SpectrumEntry>> = (0..=n_max)
        .into_par_iter()
        .map(|n| quantize_2tp(problem, n))
        .collect();
    let mut levels = Vec::with_capacity(results.len());
    for (n, r) in results.into_iter().enumerate() {
        match r {
            Ok(entry) => {
                if let Some(prev) = levels.last().map(|p: &SpectrumEntry| p.energy) {
                    if !(entry.energy > prev) {
                        return Err(SpectrumError {
                            level: n as u32,
                            partial: levels,
                            source: Error::NoConvergence {
                                iterations: 0,
                                estimate: entry.energy,
                            },
                        });
                    }
                }
                levels.push(entry);
            }
            Err(source) => {
                return Err(SpectrumError {
                    level: n as u32,
                    partial: levels,
                    source,
                })
            }
        }
    }
    Ok(levels)
}

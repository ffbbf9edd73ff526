//! Turning points and reduced-action integrals `W = ∫√(P² − U) dx`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Domain, QuantProblem};
use crate::numerics::{bracket_roots_at, geomspace, integrate_sqrt_cut, linspace, refine_root};

pub const SCAN_SAMPLES: usize = 2048;
pub const CUT_PROBES: usize = 33;

/// Classical turning points at one energy, grouped into allowed intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurningPointSet {
    pub energy: f64,
    pub points: Vec<f64>,
    pub cuts: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseIntegral {
    /// Sum over all cuts, in units of action.
    pub value: f64,
    pub per_cut: Vec<f64>,
}

impl PhaseIntegral {
    pub fn empty() -> Self {
        PhaseIntegral {
            value: 0.0,
            per_cut: Vec::new(),
        }
    }

    pub fn cut_count(&self) -> usize {
        self.per_cut.len()
    }
}

pub(crate) fn scan_points(problem: &QuantProblem, samples: usize) -> Vec<f64> {
    let (lo, hi) = problem.window;
    match problem.potential.domain() {
        Domain::HalfLine => geomspace(lo, hi, samples),
        Domain::FullLine => linspace(lo, hi, samples),
    }
}

/// Chebyshev-spaced interior probes of `[a, b]`.
pub(crate) fn chebyshev_probes(a: f64, b: f64, count: usize) -> impl Iterator<Item = f64> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (0..count).map(move |j| {
        c + h * (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * count) as f64).cos()
    })
}

/// Locates the zeros of `f` on the sample grid `xs` and pairs them into
/// intervals where `f > 0`. Positivity at either end of the grid means the
/// allowed region is not closed, reported as [`Error::Unbounded`].
pub(crate) fn find_cuts<F: Fn(f64) -> f64>(
    f: F,
    xs: &[f64],
    rel_tol: f64,
    energy: f64,
) -> Result<(Vec<f64>, Vec<(f64, f64)>)> {
    let first = xs.iter().copied().find(|&x| f(x).is_finite());
    let last = xs.iter().rev().copied().find(|&x| f(x).is_finite());
    for edge in [first, last].into_iter().flatten() {
        if f(edge) > 0.0 {
            return Err(Error::Unbounded { energy, edge });
        }
    }
    let scan = bracket_roots_at(&f, xs);
    let mut points = Vec::with_capacity(scan.brackets.len());
    let mut cuts = Vec::new();
    let mut open: Option<f64> = None;
    for bracket in &scan.brackets {
        let x = refine_root(&f, bracket, rel_tol)?;
        points.push(x);
        if bracket.f_lo < 0.0 {
            open = Some(x);
        } else if let Some(left) = open.take() {
            cuts.push((left, x));
        }
    }
    for &(a, b) in &cuts {
        if let Some(x) = chebyshev_probes(a, b, CUT_PROBES).find(|&x| !(f(x) > 0.0)) {
            return Err(Error::InvalidCut { at: x, value: f(x) });
        }
    }
    if cuts.is_empty() {
        return Err(Error::NoCuts { energy });
    }
    Ok((points, cuts))
}

pub fn turning_points(problem: &QuantProblem, energy: f64) -> Result<TurningPointSet> {
    let f = |x| problem.momentum_squared_or_nan(energy, x);
    let rel_tol = problem.tolerances.root;
    let (mut points, mut cuts) = find_cuts(f, &scan_points(problem, SCAN_SAMPLES), rel_tol, energy)?;
    let width = problem.window.1 - problem.window.0;
    let crowded = cuts.windows(2).any(|w| w[1].0 - w[0].1 < 1e-3 * width);
    if crowded {
        (points, cuts) = find_cuts(f, &scan_points(problem, 4 * SCAN_SAMPLES), rel_tol, energy)?;
    }
    Ok(TurningPointSet {
        energy,
        points,
        cuts,
    })
}

pub fn phase_integral(problem: &QuantProblem, energy: f64, tps: &TurningPointSet) -> Result<PhaseIntegral> {
    let rel_tol = problem.tolerances.quadrature;
    let per_cut = tps
        .cuts
        .iter()
        .map(|&(a, b)| integrate_sqrt_cut(|x| problem.momentum_squared_or_nan(energy, x), a, b, rel_tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseIntegral {
        value: per_cut.iter().sum(),
        per_cut,
    })
}

/// Turning points and phase integral in one step.
pub fn action(problem: &QuantProblem, energy: f64) -> Result<PhaseIntegral> {
    let tps = turning_points(problem, energy)?;
    phase_integral(problem, energy, &tps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::model::Potential;
    use std::f64::consts::PI;

    fn harmonic() -> QuantProblem {
        QuantProblem::new(Potential::harmonic(1.0, 1.0).unwrap(), 1.0, 1.0).unwrap()
    }

    fn coulomb() -> QuantProblem {
        QuantProblem::new(Potential::coulomb(1.0).unwrap(), 1.0, 1.0)
            .unwrap()
            .with_angular(0)
    }

    #[test]
    fn harmonic_turning_points() {
        let tps = turning_points(&harmonic(), 0.5).unwrap();
        assert_eq!(tps.points.len(), 2);
        assert!((tps.points[0] + 1.0).abs() < 1e-12);
        assert!((tps.points[1] - 1.0).abs() < 1e-12);
        assert_eq!(tps.cuts.len(), 1);
    }

    #[test]
    fn below_minimum_has_no_cuts() {
        assert!(matches!(
            turning_points(&harmonic(), -0.1),
            Err(Error::NoCuts { .. })
        ));
    }

    #[test]
    fn open_motion_is_unbounded() {
        let p = QuantProblem::new(Potential::custom(parse("-x^2").unwrap()), 1.0, 1.0).unwrap();
        assert!(matches!(turning_points(&p, 0.0), Err(Error::Unbounded { .. })));
        // Coulomb above threshold escapes through the outer edge.
        assert!(matches!(turning_points(&coulomb(), 0.1), Err(Error::Unbounded { .. })));
    }

    #[test]
    fn nonrelativistic_funnel_turning_points() {
        // U = 2(−0.5/r + 0.2 r) + ¼/r²; r²(P² − U) = −0.4r³ + 2E r² + r − ¼.
        let p = QuantProblem::new(Potential::cornell(0.5, 0.2).unwrap(), 1.0, 1.0)
            .unwrap()
            .with_angular(0);
        let tps = turning_points(&p, 2.0).unwrap();
        assert_eq!(tps.cuts.len(), 1);
        for &r in &tps.points {
            let cubic = -0.4 * r.powi(3) + 4.0 * r * r + r - 0.25;
            assert!(cubic.abs() < 1e-9, "{r} {cubic}");
        }
    }

    #[test]
    fn harmonic_phase_integrals() {
        let p = harmonic();
        assert!((action(&p, 0.5).unwrap().value - PI / 2.0).abs() < 1e-10);
        assert!((action(&p, 1.5).unwrap().value - 1.5 * PI).abs() < 1e-10);
    }

    #[test]
    fn harmonic_scale_law() {
        // ∫√(2mE − m²ω²x²) dx = πE/ω.
        let p = QuantProblem::new(Potential::harmonic(1.0, 2.5).unwrap(), 1.0, 1.0).unwrap();
        for e in [0.3, 1.0, 4.2, 17.0, 60.0] {
            let w = action(&p, e).unwrap().value;
            assert!((w - PI * e / 2.5).abs() < 1e-9 * w, "E={e}: {w}");
        }
    }

    #[test]
    fn coulomb_phase_integral() {
        let w = action(&coulomb(), -0.5).unwrap();
        assert!((w.value - PI / 2.0).abs() < 1e-10);
        let tps = turning_points(&coulomb(), -0.5).unwrap();
        assert!((tps.points[1] - (1.0 + 0.75f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn double_well_has_two_cuts() {
        let p = QuantProblem::new(Potential::custom(parse("(x^2 - 4)^2").unwrap()), 0.5, 1.0)
            .unwrap()
            .with_window(-5.0, 5.0)
            .unwrap();
        let w = action(&p, 3.0).unwrap();
        assert_eq!(w.cut_count(), 2);
        assert!((w.per_cut[0] - w.per_cut[1]).abs() < 1e-9);
        assert_eq!(w.value, w.per_cut.iter().sum::<f64>());
        assert_eq!(action(&p, 20.0).unwrap().cut_count(), 1);
    }

    #[test]
    fn phase_is_monotone_in_energy() {
        for p in [
            harmonic(),
            coulomb(),
            QuantProblem::new(Potential::linear(1.0).unwrap(), 1.0, 1.0).unwrap(),
        ] {
            let (e0, e1) = match p.potential.domain() {
                Domain::FullLine => (0.05, 20.0),
                Domain::HalfLine => (-1.9, -0.01),
            };
            let mut prev = 0.0;
            for i in 0..50 {
                let e = e0 + (e1 - e0) * i as f64 / 49.0;
                let w = action(&p, e).unwrap().value;
                assert!(w > prev, "{e}: {w} <= {prev}");
                prev = w;
            }
        }
    }
}

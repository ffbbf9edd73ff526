//! The piecewise "classical" wavefunction built from turning-point connection
//! formulas, its standing-wave form, and the adiabatic-momentum diagnostic.
//!
//! Between the turning points `x₁ < x₂` the solution is `cos(φ − φ₁ − π/4)`,
//! left of `x₁` it is `e^{φ−φ₁}/√2`, and right of `x₂` it is
//! `(−1)ⁿ e^{−φ+φ₂}/√2`. In the forbidden regions `φ` is measured with the
//! real exponent `∫√(U − P²) dx / ħ` from the adjacent turning point.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use crate::action::turning_points;
use crate::error::{Error, Result};
use crate::model::{Domain, QuantProblem, SpectrumEntry};
use crate::numerics::{bracket_roots_at, linspace, refine_root, GaussLegendre};

pub const PHASE_TOLERANCE: f64 = 1e-8;
pub const NODE_GRID: usize = 10_000;
const PANELS: usize = 128;
const PANEL_RULE: usize = 4; // 2^4 = 16 nodes

/// Coefficients on both sides of one turning point.
///
/// Oscillatory side `A e^{i(φ−φₖ)} + B e^{−i(φ−φₖ)}`, exponential side
/// `C e^{−φ+φₖ} + D e^{φ−φₖ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConnectionCoefficients {
    #[serde(serialize_with = "ser_complex")]
    pub a: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub b: Complex64,
    pub c: f64,
    pub d: f64,
    /// Turning point these coefficients belong to (1 = left, 2 = right).
    pub k: usize,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

impl ConnectionCoefficients {
    /// Residuals of `A + B = C + D` and `i(A − B) = −C + D`.
    pub fn matching_residuals(&self) -> (f64, f64) {
        let value = self.a + self.b - Complex64::from(self.c + self.d);
        let slope = Complex64::i() * (self.a - self.b) - Complex64::from(self.d - self.c);
        (value.norm(), slope.norm())
    }

    /// Oscillatory side at phase offset `delta = φ − φₖ`.
    pub fn oscillatory(&self, delta: f64) -> Complex64 {
        self.a * Complex64::cis(delta) + self.b * Complex64::cis(-delta)
    }
}

/// Matches the exponential coefficients `(C, D)` to the oscillatory side.
pub fn connect(c: f64, d: f64) -> ConnectionCoefficients {
    connect_at(0, c, d)
}

pub fn connect_at(k: usize, c: f64, d: f64) -> ConnectionCoefficients {
    let up = Complex64::cis(FRAC_PI_4);
    let down = Complex64::cis(-FRAC_PI_4);
    ConnectionCoefficients {
        a: (up * c + down * d) / SQRT_2,
        b: (down * c + up * d) / SQRT_2,
        c,
        d,
        k,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// Left forbidden region.
    I,
    /// Classically allowed.
    II,
    /// Right forbidden region.
    III,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mapping {
    /// `x = c + h sin θ`, θ ∈ [−π/2, π/2].
    Arcsine { c: f64, h: f64 },
    /// `x = tp + (far − tp) s²`, s ∈ [0, 1].
    Quadratic { tp: f64, far: f64 },
    /// `x = tp (far/tp)^{s²}`: square-root start at the turning point and a
    /// `1/r` singular edge at `far → 0` both become smooth.
    LogQuadratic { tp: f64, far: f64 },
}

impl Mapping {
    fn range(self) -> (f64, f64) {
        match self {
            Mapping::Arcsine { .. } => (-FRAC_PI_2, FRAC_PI_2),
            _ => (0.0, 1.0),
        }
    }

    fn x_and_jacobian(self, t: f64) -> (f64, f64) {
        match self {
            Mapping::Arcsine { c, h } => (c + h * t.sin(), h * t.cos()),
            Mapping::Quadratic { tp, far } => (tp + (far - tp) * t * t, 2.0 * (far - tp) * t),
            Mapping::LogQuadratic { tp, far } => {
                let ln = (far / tp).ln();
                let x = tp * (ln * t * t).exp();
                (x, x * ln * 2.0 * t)
            }
        }
    }

    fn t_of(self, x: f64) -> f64 {
        match self {
            Mapping::Arcsine { c, h } => ((x - c) / h).clamp(-1.0, 1.0).asin(),
            Mapping::Quadratic { tp, far } => ((x - tp) / (far - tp)).clamp(0.0, 1.0).sqrt(),
            Mapping::LogQuadratic { tp, far } => ((x / tp).ln() / (far / tp).ln()).clamp(0.0, 1.0).sqrt(),
        }
    }
}

/// Running phase over one region, tabulated at panel boundaries.
#[derive(Debug, Clone)]
struct PhaseTable {
    map: Mapping,
    /// +1 integrates √(P²−U), −1 integrates √(U−P²).
    allowed: bool,
    cumulative: Vec<f64>,
}

impl PhaseTable {
    fn build(problem: &QuantProblem, energy: f64, map: Mapping, allowed: bool) -> Self {
        let mut table = PhaseTable {
            map,
            allowed,
            cumulative: vec![0.0; PANELS + 1],
        };
        let (t0, t1) = map.range();
        let dt = (t1 - t0) / PANELS as f64;
        let rule = GaussLegendre::cached(PANEL_RULE);
        for k in 0..PANELS {
            let a = t0 + dt * k as f64;
            let piece = rule.integrate(a, a + dt, |t| table.rate(problem, energy, t));
            table.cumulative[k + 1] = table.cumulative[k] + piece;
        }
        table
    }

    // dφ/dt in the mapped variable, already divided by ħ.
    fn rate(&self, problem: &QuantProblem, energy: f64, t: f64) -> f64 {
        let (x, jac) = self.map.x_and_jacobian(t);
        let p2 = problem.momentum_squared_or_nan(energy, x);
        let g = if self.allowed { p2 } else { -p2 };
        if g > 0.0 {
            g.sqrt() * jac.abs() / problem.hbar
        } else {
            0.0
        }
    }

    fn total(&self) -> f64 {
        self.cumulative[PANELS]
    }

    fn phase_at_t(&self, problem: &QuantProblem, energy: f64, t: f64) -> f64 {
        let (t0, t1) = self.map.range();
        let dt = (t1 - t0) / PANELS as f64;
        let k = (((t - t0) / dt).floor() as usize).min(PANELS - 1);
        let start = t0 + dt * k as f64;
        if t <= start {
            return self.cumulative[k];
        }
        self.cumulative[k]
            + GaussLegendre::cached(PANEL_RULE).integrate(start, t, |s| self.rate(problem, energy, s))
    }

    fn phase_at(&self, problem: &QuantProblem, energy: f64, x: f64) -> f64 {
        self.phase_at_t(problem, energy, self.map.t_of(x))
    }

    /// `∫ weight(φ(x)) dx` over the region, panel by panel.
    fn integrate_over<W: Fn(f64) -> f64>(&self, problem: &QuantProblem, energy: f64, weight: W) -> f64 {
        let (t0, t1) = self.map.range();
        let dt = (t1 - t0) / PANELS as f64;
        let rule = GaussLegendre::cached(PANEL_RULE + 1);
        (0..PANELS)
            .map(|k| {
                let a = t0 + dt * k as f64;
                rule.integrate(a, a + dt, |t| {
                    let (_, jac) = self.map.x_and_jacobian(t);
                    weight(self.phase_at_t(problem, energy, t)) * jac.abs()
                })
            })
            .sum()
    }
}

/// The continuous piecewise solution for one quantized level.
#[derive(Debug, Clone)]
pub struct PiecewiseWavefunction {
    pub n: u32,
    pub energy: f64,
    pub x1: f64,
    pub x2: f64,
    /// Phase at the turning points, centred so that `φ₁ = −φ₂`.
    pub phi1: f64,
    pub phi2: f64,
    /// Overall constant from numerical normalization.
    pub norm: f64,
    /// Coefficients at `x₁` (decaying to the left, `C₁ = 0`).
    pub left: ConnectionCoefficients,
    /// Coefficients at `x₂` (decaying to the right, `D₂ = 0`).
    pub right: ConnectionCoefficients,
    problem: QuantProblem,
    inner: PhaseTable,
    left_tail: PhaseTable,
    right_tail: PhaseTable,
}

/// Exponential-side amplitude `1/√2`, written as `cos(−π/4)` so region I and
/// region II agree bit for bit at `x₁`.
fn edge_amplitude() -> f64 {
    (-FRAC_PI_4).cos()
}

pub fn build_classical_wf(problem: &QuantProblem, entry: &SpectrumEntry) -> Result<PiecewiseWavefunction> {
    let energy = entry.energy;
    let tps = turning_points(problem, energy)?;
    if tps.cuts.len() != 1 {
        return Err(Error::CutCountMismatch {
            expected: 1,
            found: tps.cuts.len(),
            energy,
        });
    }
    let (x1, x2) = tps.cuts[0];
    let (lo, hi) = problem.window;
    let inner = PhaseTable::build(
        problem,
        energy,
        Mapping::Arcsine {
            c: 0.5 * (x1 + x2),
            h: 0.5 * (x2 - x1),
        },
        true,
    );
    let left_map = match problem.potential.domain() {
        Domain::HalfLine => Mapping::LogQuadratic { tp: x1, far: lo },
        Domain::FullLine => Mapping::Quadratic { tp: x1, far: lo },
    };
    let left_tail = PhaseTable::build(problem, energy, left_map, false);
    let right_tail = PhaseTable::build(problem, energy, Mapping::Quadratic { tp: x2, far: hi }, false);

    let total = inner.total();
    let expected = PI * (entry.n as f64 + 0.5);
    if (total - expected).abs() > PHASE_TOLERANCE {
        return Err(Error::PhaseInconsistent {
            actual: total,
            expected,
        });
    }

    let d1 = edge_amplitude();
    let sign = if entry.n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut wf = PiecewiseWavefunction {
        n: entry.n,
        energy,
        x1,
        x2,
        phi1: -0.5 * total,
        phi2: 0.5 * total,
        norm: 1.0,
        left: connect_at(1, 0.0, d1),
        right: connect_at(2, sign * d1, 0.0),
        problem: problem.clone(),
        inner,
        left_tail,
        right_tail,
    };
    let mass = wf.left_tail.integrate_over(problem, energy, |phi| d1 * d1 * (-2.0 * phi).exp())
        + wf.inner.integrate_over(problem, energy, |phi| (phi - FRAC_PI_4).cos().powi(2))
        + wf.right_tail.integrate_over(problem, energy, |phi| d1 * d1 * (-2.0 * phi).exp());
    wf.norm = 1.0 / mass.sqrt();
    Ok(wf)
}

impl PiecewiseWavefunction {
    pub fn problem(&self) -> &QuantProblem {
        &self.problem
    }

    pub fn region(&self, x: f64) -> Region {
        if x < self.x1 {
            Region::I
        } else if x <= self.x2 {
            Region::II
        } else {
            Region::III
        }
    }

    /// Phase measured from the nearest turning point: `φ − φ₁` inside the
    /// cut, the (positive) decay exponent outside.
    pub fn phase_offset(&self, x: f64) -> f64 {
        let (p, e) = (&self.problem, self.energy);
        match self.region(x) {
            Region::I => self.left_tail.phase_at(p, e, x),
            Region::II => self.inner.phase_at(p, e, x),
            Region::III => self.right_tail.phase_at(p, e, x),
        }
    }

    /// Unnormalized value.
    pub fn shape(&self, x: f64) -> f64 {
        let (lo, hi) = self.problem.window;
        if x < lo || x > hi {
            return 0.0;
        }
        let phase = self.phase_offset(x);
        match self.region(x) {
            Region::I => self.left.d * (-phase).exp(),
            Region::II => (phase - FRAC_PI_4).cos(),
            Region::III => self.right.c * (-phase).exp(),
        }
    }

    /// Normalized value; zero outside the window.
    pub fn eval(&self, x: f64) -> f64 {
        self.norm * self.shape(x)
    }

    /// Sign changes strictly inside `(x₁, x₂)`, refined by bisection.
    pub fn nodes(&self) -> Vec<f64> {
        let grid = linspace(self.x1, self.x2, NODE_GRID + 1);
        let interior = &grid[1..NODE_GRID];
        let f = |x: f64| (self.inner.phase_at(&self.problem, self.energy, x) - FRAC_PI_4).cos();
        bracket_roots_at(f, interior)
            .brackets
            .iter()
            .map(|b| refine_root(f, b, 1e-12).unwrap_or(0.5 * (b.lo + b.hi)))
            .collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes().len()
    }

    /// `(x, ψ, region)` on `samples` uniform points. The range covers the
    /// cut plus one cut-width on either side, clipped to the window.
    pub fn samples(&self, samples: usize) -> Vec<(f64, f64, Region)> {
        let w = self.x2 - self.x1;
        let lo = (self.x1 - w).max(self.problem.window.0);
        let hi = (self.x2 + w).min(self.problem.window.1);
        linspace(lo, hi, samples.max(2))
            .into_iter()
            .map(|x| (x, self.eval(x), self.region(x)))
            .collect()
    }
}

pub fn eval_wf(wf: &PiecewiseWavefunction, x: f64) -> f64 {
    wf.eval(x)
}

pub fn node_count(wf: &PiecewiseWavefunction) -> usize {
    wf.node_count()
}

/// `C_n cos(k_n x + πn/2)` with the closed-form `C_n = √(2k_n / (π(n+½) + 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandingWave {
    pub n: u32,
    pub k: f64,
    pub c_n: f64,
}

pub fn standing_wave(n: u32, k: f64) -> Result<StandingWave> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("wave number must be positive, got {k}")));
    }
    Ok(StandingWave {
        n,
        k,
        c_n: (2.0 * k / (PI * (n as f64 + 0.5) + 1.0)).sqrt(),
    })
}

impl StandingWave {
    /// Uses `k_n = P_n/ħ = √(2mE_n)/ħ`.
    pub fn for_level(problem: &QuantProblem, entry: &SpectrumEntry) -> Result<Self> {
        if !(entry.energy > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "standing wave needs a positive energy, got {}",
                entry.energy
            )));
        }
        standing_wave(entry.n, (2.0 * problem.mass * entry.energy).sqrt() / problem.hbar)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c_n * (self.k * x + FRAC_PI_2 * self.n as f64).cos()
    }
}

/// Closed-form `C_n` against the numerically normalized amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationComparison {
    pub closed_form: f64,
    pub numeric: f64,
    pub relative_gap: f64,
}

pub fn compare_normalization(wf: &PiecewiseWavefunction) -> Result<NormalizationComparison> {
    let entry = SpectrumEntry {
        n: wf.n,
        energy: wf.energy,
        phase_residual: 0.0,
    };
    let sw = StandingWave::for_level(&wf.problem, &entry)?;
    Ok(NormalizationComparison {
        closed_form: sw.c_n,
        numeric: wf.norm,
        relative_gap: (sw.c_n - wf.norm).abs() / wf.norm,
    })
}

/// `ħ|W″|/W′²` on `points` uniform samples of the central 90% of the cut.
pub fn constraint_profile(problem: &QuantProblem, energy: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    let tps = turning_points(problem, energy)?;
    if tps.cuts.len() != 1 {
        return Err(Error::CutCountMismatch {
            expected: 1,
            found: tps.cuts.len(),
            energy,
        });
    }
    let (x1, x2) = tps.cuts[0];
    let w = x2 - x1;
    let step = 1e-5 * w;
    let momentum = |x: f64| problem.momentum_squared_or_nan(energy, x).max(0.0).sqrt();
    Ok(linspace(x1 + 0.05 * w, x2 - 0.05 * w, points.max(2))
        .into_iter()
        .map(|x| {
            let p = momentum(x);
            let dp = (momentum(x + step) - momentum(x - step)) / (2.0 * step);
            (x, problem.hbar * dp.abs() / (p * p))
        })
        .collect())
}

/// Largest value of [`constraint_profile`]; small when `dW/dx` is nearly
/// constant over the cut.
pub fn constraint_diagnostic(problem: &QuantProblem, energy: f64) -> Result<f64> {
    Ok(constraint_profile(problem, energy, 201)?
        .into_iter()
        .map(|(_, v)| v)
        .fold(0.0, f64::max))
}

//! Reference eigenvalues for `ψ″ = −Q(λ, x) ψ` with Dirichlet ends, from the
//! Numerov recurrence and shooting.
//!
//! `Q` must increase with the eigenparameter `λ`. Schrödinger problems use
//! `λ = E`; the relativistic funnel equation uses `λ = E²` so that `Q` stays
//! monotone.

use rayon::prelude::*;
use serde::Serialize;

use crate::cornell::{CornellLevel, CornellParams};
use crate::error::{Error, Result};
use crate::model::{Domain, QuantProblem, SpectrumEntry};
use crate::numerics::{brent, geomspace, linspace, Bracket};

pub const DEFAULT_STEP: f64 = 1e-3;
/// Radial grids carry the Dirichlet condition at the origin itself; this is
/// only where the scan for allowed motion starts.
pub const RADIAL_SCAN_START: f64 = 1e-6;
pub const MIN_INTERVALS: usize = 100;
/// Required `∫√(−Q) dx` beyond the outermost turning points.
pub const TAIL_DECAY: f64 = 15.0;
const RESCALE: f64 = 1e100;
const SCAN_POINTS: usize = 4001;
const MARCH_CAP: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
    intervals: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Grid(format!("bad grid [{x_min}, {x_max}] with step {h}")));
        }
        let ratio = (x_max - x_min) / h;
        let intervals = ratio.round();
        if (ratio - intervals).abs() > 1e-6 {
            return Err(Error::Grid(format!(
                "span {} is not a whole number of steps {h}",
                x_max - x_min
            )));
        }
        if intervals < MIN_INTERVALS as f64 {
            return Err(Error::Grid(format!("{intervals} intervals, need at least {MIN_INTERVALS}")));
        }
        Ok(GridSpec {
            x_min,
            x_max,
            h,
            intervals: intervals as usize,
        })
    }

    /// Smallest grid starting at `x_min` with step `h` that reaches `x_max`.
    pub fn covering(x_min: f64, x_max: f64, h: f64) -> Result<Self> {
        let n = (((x_max - x_min) / h).ceil() as usize).max(MIN_INTERVALS);
        Self::new(x_min, x_min + n as f64 * h, h)
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + self.h * i as f64
    }

    pub fn halved(&self) -> Self {
        GridSpec {
            h: 0.5 * self.h,
            intervals: 2 * self.intervals,
            ..*self
        }
    }
}

/// Result of one shot at a trial eigenparameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Shot {
    /// Nodes of the left solution up to the matching point plus nodes of
    /// the right solution beyond it.
    pub node_count: usize,
    /// Discrete Wronskian of the left and right solutions over `h` and their
    /// norms: a log-derivative mismatch without poles. Zero at an eigenvalue.
    pub mismatch: f64,
    /// Sign changes of the left solution over the whole grid, which equals
    /// the number of discrete eigenvalues below `λ`.
    pub eigenvalues_below: usize,
    pub matching_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleLevel {
    pub index: u32,
    pub energy: f64,
    /// `|E(h) − E(h/2)|`.
    pub grid_residual: f64,
}

struct Sweep {
    /// Numerov weights `1 + h²Q/12`.
    weight: Vec<f64>,
    /// First index carrying the left Dirichlet condition.
    start: usize,
}

impl Sweep {
    fn new<Q: Fn(f64, f64) -> f64>(q: &Q, grid: &GridSpec, lambda: f64) -> Result<Self> {
        let n = grid.intervals;
        let c = grid.h * grid.h / 12.0;
        let weight: Vec<f64> = (0..=n).map(|i| 1.0 + c * q(lambda, grid.x(i))).collect();
        // Near a strongly repulsive origin the first few weights can be
        // non-positive; the Dirichlet point moves past them.
        let start = weight[1..n / 2]
            .iter()
            .rposition(|w| !(*w > 0.0))
            .map_or(0, |i| i + 1);
        if let Some(i) = weight[start + 1..n].iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            let at = grid.x(start + 1 + i);
            return Err(Error::Grid(format!(
                "step {} too coarse for Q = {} at x = {at}",
                grid.h,
                q(lambda, at)
            )));
        }
        Ok(Sweep { weight, start })
    }

    // u-form of the recurrence: u_{i+1} + u_{i−1} = (12/w_i − 10) u_i.
    fn coefficient(&self, i: usize) -> f64 {
        12.0 / self.weight[i] - 10.0
    }

    /// Left solution `u` from `start` to `stop` inclusive, with its node count.
    fn left(&self, stop: usize) -> (f64, f64, usize, usize) {
        let (mut prev, mut cur) = (0.0, 1e-30);
        let mut nodes = 0;
        let mut i = self.start + 1;
        let mut at_stop = (0.0, 0.0, 0);
        while i < self.weight.len() - 1 {
            if i == stop {
                at_stop = (prev, cur, nodes);
            }
            let next = self.coefficient(i) * cur - prev;
            if next * cur < 0.0 || (next == 0.0 && cur != 0.0) {
                nodes += 1;
            }
            (prev, cur) = (cur, next);
            if cur.abs() > RESCALE {
                prev /= RESCALE;
                cur /= RESCALE;
            }
            i += 1;
        }
        if stop >= self.weight.len() - 1 {
            at_stop = (prev, cur, nodes);
        }
        // (u_{stop−1}, u_stop, nodes up to stop, nodes over the full grid)
        (at_stop.0, at_stop.1, at_stop.2, nodes)
    }

    /// Right solution from the last point down to `stop`, returning
    /// `(u_stop, u_{stop+1}, nodes)`.
    fn right(&self, stop: usize) -> (f64, f64, usize) {
        let n = self.weight.len() - 1;
        let (mut next, mut cur) = (0.0, 1e-30);
        let mut nodes = 0;
        let mut i = n - 1;
        while i > stop {
            let prev = self.coefficient(i) * cur - next;
            if prev * cur < 0.0 || (prev == 0.0 && cur != 0.0) {
                nodes += 1;
            }
            (next, cur) = (cur, prev);
            if cur.abs() > RESCALE {
                next /= RESCALE;
                cur /= RESCALE;
            }
            i -= 1;
        }
        (cur, next, nodes)
    }
}

fn matching_index<Q: Fn(f64, f64) -> f64>(q: &Q, grid: &GridSpec, lambda: f64) -> usize {
    let n = grid.intervals;
    let m = (1..n).rev().find(|&i| q(lambda, grid.x(i)) > 0.0).unwrap_or(n / 2);
    m.clamp(2, n - 2)
}

pub fn numerov_solve<Q: Fn(f64, f64) -> f64>(q: &Q, grid: &GridSpec, lambda: f64) -> Result<Shot> {
    let sweep = Sweep::new(q, grid, lambda)?;
    let m = matching_index(q, grid, lambda).max(sweep.start + 2);
    let (l_prev, l_m, left_nodes, total) = sweep.left(m);
    // Left vector (u_{m−1}, u_m); advance one step so both sides meet at (m, m+1).
    let l_next = sweep.coefficient(m) * l_m - l_prev;
    let (r_m, r_next, right_nodes) = sweep.right(m);
    let wronskian = l_m * r_next - l_next * r_m;
    let norm = grid.h * l_m.hypot(l_next) * r_m.hypot(r_next);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::NonFinite { at: grid.x(m) });
    }
    Ok(Shot {
        node_count: left_nodes + right_nodes,
        mismatch: wronskian / norm,
        eigenvalues_below: total,
        matching_index: m,
    })
}

fn count<Q: Fn(f64, f64) -> f64>(q: &Q, grid: &GridSpec, lambda: f64) -> Result<usize> {
    Ok(numerov_solve(q, grid, lambda)?.eigenvalues_below)
}

/// Brackets `[lo, hi]` with fewer than `below` eigenvalues at `lo` and at
/// least `below` at `hi`, expanding from `floor`.
fn expand<Q: Fn(f64, f64) -> f64>(q: &Q, grid: &GridSpec, floor: f64, below: usize) -> Result<(f64, f64)> {
    let mut lo = floor;
    let mut step = floor.abs().max(1.0);
    for _ in 0..200 {
        if count(q, grid, lo)? < below {
            break;
        }
        lo -= step;
        step *= 2.0;
    }
    let mut hi = lo;
    let mut step = lo.abs().max(1.0) * 0.25;
    for _ in 0..200 {
        if count(q, grid, hi)? >= below {
            return Ok((lo, hi));
        }
        lo = hi;
        hi += step;
        step *= 2.0;
    }
    Err(Error::Grid(format!("fewer than {below} levels found on this grid")))
}

/// The `index`-th discrete eigenvalue on `grid`.
pub fn oracle_eigenvalue<Q: Fn(f64, f64) -> f64>(q: &Q, grid: &GridSpec, floor: f64, index: u32) -> Result<f64> {
    let k = index as usize;
    let (mut lo, mut hi) = expand(q, grid, floor, k + 1)?;
    // Bisect on the count until exactly one eigenvalue is enclosed and the
    // Wronskian changes sign across the bracket.
    for _ in 0..200 {
        let lo_shot = numerov_solve(q, grid, lo)?;
        let hi_shot = numerov_solve(q, grid, hi)?;
        if lo_shot.eigenvalues_below == k
            && hi_shot.eigenvalues_below == k + 1
            && lo_shot.mismatch * hi_shot.mismatch < 0.0
        {
            let bracket = Bracket::new(lo, hi, lo_shot.mismatch, hi_shot.mismatch)?;
            let scale = lo.abs().max(hi.abs()).max(1e-300);
            let root = brent(
                |l| numerov_solve(q, grid, l).map(|s| s.mismatch),
                &bracket,
                |_| 4.0 * f64::EPSILON * scale,
                0.0,
            )?;
            return Ok(root.x);
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if count(q, grid, mid)? > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Eigenparameters `0..=index_max` on `grid` and on the halved grid,
/// combined by one Richardson step.
pub fn oracle_spectrum<Q>(q: &Q, grid: &GridSpec, floor: f64, index_max: u32) -> Result<Vec<OracleLevel>>
where
    Q: Fn(f64, f64) -> f64 + Sync,
{
    let fine = grid.halved();
    (0..=index_max)
        .into_par_iter()
        .map(|k| {
            let coarse = oracle_eigenvalue(q, grid, floor, k)?;
            let half = oracle_eigenvalue(q, &fine, floor, k)?;
            Ok(OracleLevel {
                index: k,
                energy: half + (half - coarse) / 15.0,
                grid_residual: (half - coarse).abs(),
            })
        })
        .collect()
}

// Walk outward from `from` until the forbidden tail carries TAIL_DECAY.
fn march<Q: Fn(f64, f64) -> f64>(q: &Q, lambda: f64, from: f64, dir: f64) -> Result<f64> {
    let mut x = from;
    let mut step = 1e-3 * from.abs().max(1.0);
    let mut decay = 0.0;
    while (x - from).abs() < MARCH_CAP {
        let mid = x + 0.5 * dir * step;
        let v = q(lambda, mid);
        if v > 0.0 {
            decay = 0.0;
        } else {
            decay += (-v).sqrt() * step;
        }
        x += dir * step;
        if decay >= TAIL_DECAY {
            return Ok(x);
        }
        step = (step * 1.01).min(1e-2 * (1.0 + x.abs()));
    }
    Err(Error::Unbounded { energy: lambda, edge: x })
}

/// Grid whose forbidden tails carry at least [`TAIL_DECAY`] decay lengths at
/// `lambda`; allowed motion is located by scanning `window`.
pub fn auto_grid<Q: Fn(f64, f64) -> f64>(q: &Q, lambda: f64, window: (f64, f64), domain: Domain, h: f64) -> Result<GridSpec> {
    let xs = match domain {
        Domain::HalfLine => geomspace(window.0.max(RADIAL_SCAN_START), window.1, SCAN_POINTS),
        Domain::FullLine => linspace(window.0, window.1, SCAN_POINTS),
    };
    let first = xs.iter().copied().find(|&x| q(lambda, x) > 0.0);
    let last = xs.iter().rev().copied().find(|&x| q(lambda, x) > 0.0);
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::NoCuts { energy: lambda });
    };
    let right = march(q, lambda, last, 1.0)?;
    let left = match domain {
        Domain::HalfLine => 0.0,
        Domain::FullLine => march(q, lambda, first, -1.0)?,
    };
    GridSpec::covering(left, right, h)
}

/// Grows a trial eigenparameter from `floor` until the auto-sized grid holds
/// more than `index_max` levels, and returns that grid.
fn sized_grid<Q>(q: &Q, floor: f64, window: (f64, f64), domain: Domain, h: f64, index_max: u32) -> Result<GridSpec>
where
    Q: Fn(f64, f64) -> f64,
{
    let scale = floor.abs().max(1.0);
    let mut good = floor;
    let mut bad: Option<f64> = None;
    let mut step = 0.25 * scale;
    for _ in 0..300 {
        let trial = match bad {
            Some(b) => 0.5 * (good + b),
            None => good + step,
        };
        match auto_grid(q, trial, window, domain, h) {
            Ok(grid) => {
                if count(q, &grid, trial)? > index_max as usize {
                    return Ok(grid);
                }
                good = trial;
                step *= 2.0;
            }
            Err(Error::NoCuts { .. }) => {
                good = trial;
                step *= 2.0;
            }
            Err(Error::Unbounded { .. }) => bad = Some(trial),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Grid(format!("could not fit {} bound levels", index_max + 1)))
}

/// `Q = (2m(E − V) − l(l+1)ħ²/r²)/ħ²`: the true centrifugal term, not the
/// `(l+½)²` form used by the phase integral.
pub fn schrodinger_q(problem: &QuantProblem) -> impl Fn(f64, f64) -> f64 + Sync + '_ {
    let l = problem.angular.unwrap_or(0) as f64;
    let radial = problem.potential.domain() == Domain::HalfLine;
    move |e, x| {
        let v = problem.potential.value(x).unwrap_or(f64::INFINITY);
        let mut q = 2.0 * problem.mass * (e - v) / (problem.hbar * problem.hbar);
        if radial {
            q -= l * (l + 1.0) / (x * x);
        }
        if q.is_finite() {
            q
        } else {
            -1e300
        }
    }
}

/// Oracle levels `0..=index_max` of a Schrödinger problem.
pub fn schrodinger_levels(problem: &QuantProblem, index_max: u32, h: f64) -> Result<Vec<OracleLevel>> {
    let q = schrodinger_q(problem);
    let domain = problem.potential.domain();
    let xs = match domain {
        Domain::HalfLine => geomspace(problem.window.0.max(RADIAL_SCAN_START), problem.window.1, SCAN_POINTS),
        Domain::FullLine => linspace(problem.window.0, problem.window.1, SCAN_POINTS),
    };
    let floor = xs
        .iter()
        .map(|&x| -q(0.0, x) * problem.hbar * problem.hbar / (2.0 * problem.mass))
        .fold(f64::INFINITY, f64::min);
    let grid = sized_grid(&q, floor, problem.window, domain, h, index_max)?;
    oracle_spectrum(&q, &grid, floor, index_max)
}

/// The funnel equation itself, `−ψ″ = p²(r)ψ`, with `λ = E²`.
pub fn cornell_q(params: &CornellParams) -> impl Fn(f64, f64) -> f64 + Sync + '_ {
    let l2 = (params.l as f64 + 0.5).powi(2);
    move |e2, r| {
        let h = params.m - params.alpha_tilde / r + params.kappa * r;
        e2 / 4.0 - h * h - l2 / (r * r)
    }
}

/// Oracle levels `n_r = 0..=n_r_max` of the funnel equation, as energies.
pub fn cornell_levels(params: &CornellParams, n_r_max: u32, h: f64) -> Result<Vec<OracleLevel>> {
    params.validate()?;
    let q = cornell_q(params);
    let window = (RADIAL_SCAN_START, 200.0);
    let grid = sized_grid(&q, 0.0, window, Domain::HalfLine, h, n_r_max)?;
    oracle_spectrum(&q, &grid, 0.0, n_r_max)?
        .into_iter()
        .map(|lvl| {
            if !(lvl.energy > 0.0) {
                return Err(Error::Unphysical(format!("E² = {} for n_r = {}", lvl.energy, lvl.index)));
            }
            let e = lvl.energy.sqrt();
            Ok(OracleLevel {
                index: lvl.index,
                energy: e,
                // δE ≈ δ(E²)/2E
                grid_residual: lvl.grid_residual / (2.0 * e),
            })
        })
        .collect()
}

/// Anything with a level index and an energy.
pub trait Level {
    fn index(&self) -> u32;
    fn energy(&self) -> f64;
}

impl Level for SpectrumEntry {
    fn index(&self) -> u32 {
        self.n
    }
    fn energy(&self) -> f64 {
        self.energy
    }
}

impl Level for CornellLevel {
    fn index(&self) -> u32 {
        self.n_r
    }
    fn energy(&self) -> f64 {
        self.e
    }
}

impl Level for OracleLevel {
    fn index(&self) -> u32 {
        self.index
    }
    fn energy(&self) -> f64 {
        self.energy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub index: u32,
    pub semiclassical: f64,
    pub oracle: f64,
    pub absolute: f64,
    pub relative: f64,
    pub grid_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub rows: Vec<Deviation>,
    pub max_absolute: f64,
    pub max_relative: f64,
    pub mean_relative: f64,
}

pub fn compare_report<S: Level>(semiclassical: &[S], oracle: &[OracleLevel]) -> Result<CompareReport> {
    let a: Vec<u32> = semiclassical.iter().map(Level::index).collect();
    let b: Vec<u32> = oracle.iter().map(Level::index).collect();
    if a != b {
        return Err(Error::IndexMismatch(format!("semiclassical {a:?} vs oracle {b:?}")));
    }
    let rows: Vec<Deviation> = semiclassical
        .iter()
        .zip(oracle)
        .map(|(s, o)| {
            let absolute = (s.energy() - o.energy).abs();
            Deviation {
                index: o.index,
                semiclassical: s.energy(),
                oracle: o.energy,
                absolute,
                relative: absolute / o.energy.abs().max(f64::MIN_POSITIVE),
                grid_residual: o.grid_residual,
            }
        })
        .collect();
    let n = rows.len().max(1) as f64;
    Ok(CompareReport {
        max_absolute: rows.iter().map(|r| r.absolute).fold(0.0, f64::max),
        max_relative: rows.iter().map(|r| r.relative).fold(0.0, f64::max),
        mean_relative: rows.iter().map(|r| r.relative).sum::<f64>() / n,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cornell::cornell_spectrum_closed_form;
    use crate::model::Potential;
    use crate::quantizer::spectrum;

    fn harmonic_q(e: f64, x: f64) -> f64 {
        2.0 * e - x * x
    }

    fn harmonic() -> QuantProblem {
        QuantProblem::new(Potential::harmonic(1.0, 1.0).unwrap(), 1.0, 1.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(-10.0, 10.0, 1e-3).is_ok());
        assert!(GridSpec::new(0.0, 1.0, 0.3).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.02).is_err());
        assert!(GridSpec::new(1.0, 0.0, 0.001).is_err());
        let g = GridSpec::covering(0.0, 1.234, 0.01).unwrap();
        assert_eq!(g.intervals(), 124);
        assert_eq!(g.halved().intervals(), 248);
    }

    #[test]
    fn shots() {
        let g = GridSpec::new(-10.0, 10.0, 1e-3).unwrap();
        let ground = numerov_solve(&harmonic_q, &g, 0.5).unwrap();
        assert_eq!(ground.node_count, 0);
        assert!(ground.mismatch.abs() < 1e-9, "{}", ground.mismatch);
        let off = numerov_solve(&harmonic_q, &g, 0.4).unwrap();
        assert!(off.mismatch.abs() > 1e-3);
        assert_eq!(off.eigenvalues_below, 0);
        let between = numerov_solve(&harmonic_q, &g, 1.6).unwrap();
        assert_eq!(between.node_count, 1);
        assert_eq!(between.eigenvalues_below, 2);
    }

    #[test]
    fn harmonic_spectrum_on_fixed_grid() {
        let g = GridSpec::new(-10.0, 10.0, 1e-2).unwrap();
        let levels = oracle_spectrum(&harmonic_q, &g, 0.0, 3).unwrap();
        for lvl in &levels {
            assert!((lvl.energy - (lvl.index as f64 + 0.5)).abs() < 1e-8, "{lvl:?}");
        }
        for k in 0..4 {
            let e = oracle_eigenvalue(&harmonic_q, &g, 0.0, k).unwrap();
            assert_eq!(numerov_solve(&harmonic_q, &g, e).unwrap().node_count, k as usize);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let e = |h: f64| oracle_eigenvalue(&harmonic_q, &GridSpec::new(-8.0, 8.0, h).unwrap(), 0.0, 3).unwrap();
        let (a, b, c) = (e(0.1), e(0.05), e(0.025));
        let ratio = (a - b) / (b - c);
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn auto_grid_tails() {
        let g = auto_grid(&harmonic_q, 3.5, (-50.0, 50.0), Domain::FullLine, 1e-3).unwrap();
        // ∫_{√7}^{X} √(x² − 7) dx = 15 at X ≈ 6.6.
        assert!(g.x_max > 6.0 && g.x_max < 7.5, "{g:?}");
        assert!(g.x_min < -6.0 && g.x_min > -7.5);
    }

    #[test]
    fn schrodinger_wrappers() {
        let h = schrodinger_levels(&harmonic(), 3, DEFAULT_STEP).unwrap();
        for lvl in &h {
            assert!((lvl.energy - (lvl.index as f64 + 0.5)).abs() < 1e-8);
        }
        let c = QuantProblem::new(Potential::coulomb(1.0).unwrap(), 1.0, 1.0)
            .unwrap()
            .with_angular(0);
        let g = schrodinger_levels(&c, 0, DEFAULT_STEP).unwrap();
        assert!((g[0].energy + 0.5).abs() < 1e-6, "{g:?}");
    }

    #[test]
    fn reports() {
        let p = harmonic();
        let semi = spectrum(&p, 2).unwrap();
        let oracle = schrodinger_levels(&p, 2, DEFAULT_STEP).unwrap();
        let r = compare_report(&semi, &oracle).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.max_relative <= 1e-7);
        assert!(matches!(
            compare_report(&semi[..2], &oracle),
            Err(Error::IndexMismatch(_))
        ));
    }

    #[test]
    fn cornell_experiment_runs() {
        let p = CornellParams::new(0.0, 0.5, 0.2, 0).unwrap();
        let oracle = cornell_levels(&p, 0, DEFAULT_STEP).unwrap();
        let closed = [cornell_spectrum_closed_form(&p, 0).unwrap()];
        let r = compare_report(&closed, &oracle).unwrap();
        assert!(r.rows[0].relative.is_finite());
        assert!(oracle[0].grid_residual < 1e-5 * oracle[0].energy);
    }
}

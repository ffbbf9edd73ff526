//! Root bracketing, Brent refinement and Gauss–Legendre quadrature.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Hard cap on refinement iterations.
pub const MAX_ROOT_ITERATIONS: usize = 200;
pub const MIN_QUAD_ORDER: usize = 16;
pub const MAX_QUAD_ORDER: usize = 4096;

/// An interval known to contain a sign change of some function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) || f_lo * f_hi > 0.0 || f_lo.is_nan() || f_hi.is_nan() {
            return Err(Error::InvalidBracket { lo, hi, f_lo, f_hi });
        }
        Ok(Bracket { lo, hi, f_lo, f_hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BracketScan {
    pub brackets: Vec<Bracket>,
    /// Sample points where `f` was not finite.
    pub skipped: usize,
}

/// Uniformly spaced points `lo..=hi`, endpoints included.
pub fn linspace(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    assert!(samples >= 2, "need at least two samples");
    let step = (hi - lo) / (samples - 1) as f64;
    (0..samples)
        .map(|i| if i + 1 == samples { hi } else { lo + step * i as f64 })
        .collect()
}

/// Geometrically spaced points `lo..=hi`; requires `0 < lo < hi`.
pub fn geomspace(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    assert!(samples >= 2 && lo > 0.0 && hi > lo);
    let ratio = (hi / lo).ln() / (samples - 1) as f64;
    (0..samples)
        .map(|i| {
            if i + 1 == samples {
                hi
            } else {
                lo * (ratio * i as f64).exp()
            }
        })
        .collect()
}

pub fn bracket_roots<F: FnMut(f64) -> f64>(f: F, window: (f64, f64), samples: usize) -> BracketScan {
    bracket_roots_at(f, &linspace(window.0, window.1, samples))
}

/// Brackets every sign change of `f` between consecutive nonzero finite
/// samples of `xs` (which must be increasing). Samples where `f` is exactly
/// zero are absorbed into the surrounding bracket.
pub fn bracket_roots_at<F: FnMut(f64) -> f64>(mut f: F, xs: &[f64]) -> BracketScan {
    let mut scan = BracketScan::default();
    let mut last: Option<(f64, f64)> = None;
    for &x in xs {
        let fx = f(x);
        if !fx.is_finite() {
            scan.skipped += 1;
            continue;
        }
        if fx == 0.0 {
            continue;
        }
        if let Some((xl, fl)) = last {
            if fl.signum() != fx.signum() {
                scan.brackets.push(Bracket {
                    lo: xl,
                    hi: x,
                    f_lo: fl,
                    f_hi: fx,
                });
            }
        }
        last = Some((x, fx));
    }
    if scan.skipped > 0 {
        log::warn!("bracket scan skipped {} non-finite samples", scan.skipped);
    }
    scan
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    /// Width of the final enclosing interval.
    pub width: f64,
    pub iterations: usize,
}

/// Brent's method: bisection with inverse-quadratic and secant steps.
///
/// Stops when the enclosing interval is narrower than `xtol(x)` or when
/// `|f| <= ftol`.
pub fn brent<F, T>(mut f: F, bracket: &Bracket, xtol: T, ftol: f64) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
    T: Fn(f64) -> f64,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (bracket.f_lo, bracket.f_hi);
    if fa == 0.0 {
        return Ok(Root { x: a, fx: 0.0, width: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: 0.0, width: 0.0, iterations: 0 });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=MAX_ROOT_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol(b);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 || fb.abs() <= ftol {
            return Ok(Root {
                x: b,
                fx: fb,
                width: (c - b).abs(),
                iterations: iter,
            });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
        if !fb.is_finite() {
            return Err(Error::NonFinite { at: b });
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ROOT_ITERATIONS,
        estimate: b,
    })
}

/// Refines a bracketed root until the interval is narrower than
/// `rel_tol * max(1, |x|)`.
///
/// A sign change that never approaches zero (a pole or a touching double
/// root split by rounding) is reported as [`Error::DegenerateRoot`].
pub fn refine_root<F: FnMut(f64) -> f64>(mut f: F, bracket: &Bracket, rel_tol: f64) -> Result<f64> {
    let fscale = bracket.f_lo.abs().max(bracket.f_hi.abs());
    let root = brent(|x| Ok(f(x)), bracket, |x| rel_tol * x.abs().max(1.0), 0.0).map_err(|e| match e {
        Error::NonFinite { at } => Error::DegenerateRoot { at },
        other => other,
    })?;
    let scale = root.x.abs().max(1.0);
    if root.width < 1e-13 * scale && root.fx.abs() > 1e-10 * fscale {
        return Err(Error::DegenerateRoot { at: root.x });
    }
    Ok(root.x)
}

/// A Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p1, mut p2) = (1.0, 0.0);
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
                }
                dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / dp;
                if (z - z1).abs() <= 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared rule of order `2^k` (`k <= 12`).
    pub fn cached(k: usize) -> &'static GaussLegendre {
        static RULES: [OnceLock<GaussLegendre>; 13] = [const { OnceLock::new() }; 13];
        RULES[k].get_or_init(|| GaussLegendre::new(1 << k))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }

    pub fn try_integrate<F: FnMut(f64) -> Result<f64>>(&self, a: f64, b: f64, mut f: F) -> Result<f64> {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(c + h * x)?;
        }
        Ok(sum * h)
    }
}

/// Integrates a smooth `f` on `[a, b]`, doubling the Gauss–Legendre order
/// from 16 until two successive orders agree to `rel_tol`.
pub fn integrate_smooth<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let first = MIN_QUAD_ORDER.trailing_zeros() as usize;
    let last = MAX_QUAD_ORDER.trailing_zeros() as usize;
    let mut prev = GaussLegendre::cached(first).try_integrate(a, b, &mut f)?;
    for k in first + 1..=last {
        let cur = GaussLegendre::cached(k).try_integrate(a, b, &mut f)?;
        let diff = (cur - prev).abs();
        if diff <= rel_tol * cur.abs() || diff == 0.0 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NoConvergence {
        iterations: MAX_QUAD_ORDER,
        estimate: prev,
    })
}

const ADAPTIVE_MAX_DEPTH: usize = 48;

/// Recursive bisection with 16/32-point Gauss–Legendre pairs. Handles
/// integrands with isolated kinks where global order doubling stalls.
pub fn integrate_adaptive<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    fn recurse<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64, tol: f64, depth: usize) -> Result<f64> {
        let lo = GaussLegendre::cached(4).try_integrate(a, b, &mut *f)?;
        let hi = GaussLegendre::cached(5).try_integrate(a, b, &mut *f)?;
        if (hi - lo).abs() <= tol || (hi - lo).abs() <= 4.0 * f64::EPSILON * hi.abs() {
            return Ok(hi);
        }
        if depth >= ADAPTIVE_MAX_DEPTH {
            return Err(Error::NoConvergence {
                iterations: depth,
                estimate: hi,
            });
        }
        let m = 0.5 * (a + b);
        Ok(recurse(f, a, m, 0.5 * tol, depth + 1)? + recurse(f, m, b, 0.5 * tol, depth + 1)?)
    }
    recurse(&mut f, a, b, abs_tol, 0)
}

/// `∫ₐᵇ √g(x) dx` for `g` with simple zeros at both ends.
///
/// The substitution `x = (a+b)/2 + (b−a)/2 · sin θ` removes the square-root
/// endpoint behaviour, leaving a smooth integrand on `[−π/2, π/2]`. Small
/// negative values of `g` from imprecise endpoints are clipped; anything below
/// `−1e−8·max|g|` is an invalid cut. Integrands that are not smooth inside
/// the cut (kinks from `|x|`) fall back to adaptive subdivision.
pub fn integrate_sqrt_cut<G: FnMut(f64) -> f64>(mut g: G, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a < b) {
        return Err(Error::InvalidParameter(format!("cut [{a}, {b}] is reversed")));
    }
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut gmax = 0.0f64;
    let mut worst: Option<(f64, f64)> = None;
    let mut integrand = |theta: f64| {
        let x = c + h * theta.sin();
        let gx = g(x);
        if !gx.is_finite() {
            return Err(Error::NonFinite { at: x });
        }
        gmax = gmax.max(gx);
        if gx < 0.0 {
            if worst.is_none_or(|(_, v)| gx < v) {
                worst = Some((x, gx));
            }
            return Ok(0.0);
        }
        Ok(gx.sqrt() * h * theta.cos())
    };
    let value = match integrate_smooth(&mut integrand, -FRAC_PI_2, FRAC_PI_2, rel_tol) {
        Err(Error::NoConvergence { estimate, .. }) => {
            let tol = rel_tol * estimate.abs().max(f64::MIN_POSITIVE);
            integrate_adaptive(&mut integrand, -FRAC_PI_2, FRAC_PI_2, tol)
        }
        other => other,
    };
    if let Some((x, v)) = worst {
        if -v > 1e-8 * gmax {
            return Err(Error::InvalidCut { at: x, value: v });
        }
    }
    value
}

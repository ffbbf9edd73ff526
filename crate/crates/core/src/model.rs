//! Quantization problems in the form `p̂² ψ = (P² − U(x)) ψ` with
//! `P² = 2mE` and `U = 2mV`, optionally carrying the `(l+½)²ħ²/r²` radial term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::ExprAst;

pub const FULL_LINE_WINDOW: (f64, f64) = (-50.0, 50.0);
pub const HALF_LINE_WINDOW: (f64, f64) = (1e-8, 200.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    FullLine,
    HalfLine,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    /// `½ m ω² x²`
    Harmonic { mass: f64, omega: f64 },
    /// `−e²/r`
    Coulomb { e2: f64 },
    /// `κ|x|`
    Linear { kappa: f64 },
    /// `−α̃/r + κr`
    Cornell { alpha_tilde: f64, kappa: f64 },
    Custom(ExprAst),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    kind: PotentialKind,
    domain: Domain,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl Potential {
    pub fn harmonic(mass: f64, omega: f64) -> Result<Self> {
        positive("mass", mass)?;
        positive("omega", omega)?;
        Ok(Potential {
            kind: PotentialKind::Harmonic { mass, omega },
            domain: Domain::FullLine,
        })
    }

    pub fn coulomb(e2: f64) -> Result<Self> {
        positive("e2", e2)?;
        Ok(Potential {
            kind: PotentialKind::Coulomb { e2 },
            domain: Domain::HalfLine,
        })
    }

    pub fn linear(kappa: f64) -> Result<Self> {
        positive("kappa", kappa)?;
        Ok(Potential {
            kind: PotentialKind::Linear { kappa },
            domain: Domain::FullLine,
        })
    }

    pub fn cornell(alpha_tilde: f64, kappa: f64) -> Result<Self> {
        positive("kappa", kappa)?;
        if !(alpha_tilde.is_finite() && alpha_tilde >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha_tilde must be non-negative, got {alpha_tilde}"
            )));
        }
        Ok(Potential {
            kind: PotentialKind::Cornell { alpha_tilde, kappa },
            domain: Domain::HalfLine,
        })
    }

    /// A user expression; the variable `r` selects the half line.
    pub fn custom(expr: ExprAst) -> Self {
        let domain = if expr.variable() == Some('r') {
            Domain::HalfLine
        } else {
            Domain::FullLine
        };
        Potential {
            kind: PotentialKind::Custom(expr),
            domain,
        }
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(
            self.kind,
            PotentialKind::Harmonic { .. } | PotentialKind::Linear { .. }
        )
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        if self.domain == Domain::HalfLine && !(x > 0.0) {
            return Err(Error::DomainViolation {
                at: x,
                reason: "half-line potential requires r > 0".into(),
            });
        }
        let v = match &self.kind {
            PotentialKind::Harmonic { mass, omega } => 0.5 * mass * omega * omega * x * x,
            PotentialKind::Coulomb { e2 } => -e2 / x,
            PotentialKind::Linear { kappa } => kappa * x.abs(),
            PotentialKind::Cornell { alpha_tilde, kappa } => -alpha_tilde / x + kappa * x,
            PotentialKind::Custom(expr) => expr.eval(x)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::DomainViolation {
                at: x,
                reason: "potential is not finite".into(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative width at which root refinement stops.
    pub root: f64,
    /// Agreement required between successive quadrature orders.
    pub quadrature: f64,
    /// Relative energy tolerance of the quantizer.
    pub energy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root: 1e-12,
            quadrature: 1e-10,
            energy: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantProblem {
    pub potential: Potential,
    pub mass: f64,
    pub hbar: f64,
    /// Angular momentum; when set, `(l+½)²ħ²/r²` is added to `U`.
    pub angular: Option<u32>,
    pub window: (f64, f64),
    pub tolerances: Tolerances,
}

impl QuantProblem {
    pub fn new(potential: Potential, mass: f64, hbar: f64) -> Result<Self> {
        positive("mass", mass)?;
        positive("hbar", hbar)?;
        let window = match potential.domain() {
            Domain::FullLine => FULL_LINE_WINDOW,
            Domain::HalfLine => HALF_LINE_WINDOW,
        };
        Ok(QuantProblem {
            potential,
            mass,
            hbar,
            angular: None,
            window,
            tolerances: Tolerances::default(),
        })
    }

    pub fn with_angular(mut self, l: u32) -> Self {
        self.angular = Some(l);
        self
    }

    pub fn with_window(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!("window [{lo}, {hi}] is empty")));
        }
        if self.potential.domain() == Domain::HalfLine && lo <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "half-line window must start above 0, got {lo}"
            )));
        }
        self.window = (lo, hi);
        Ok(self)
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    /// `2mV(x)` plus the Langer term when an angular momentum is set.
    pub fn effective_u(&self, x: f64) -> Result<f64> {
        let mut u = 2.0 * self.mass * self.potential.value(x)?;
        if let Some(l) = self.angular {
            if x == 0.0 {
                return Err(Error::DomainViolation {
                    at: x,
                    reason: "centrifugal term is singular at 0".into(),
                });
            }
            let lh = (l as f64 + 0.5) * self.hbar;
            u += lh * lh / (x * x);
        }
        Ok(u)
    }

    /// `P² − U(x)` with `P² = 2mE`; negative where the motion is forbidden.
    pub fn momentum_squared(&self, energy: f64, x: f64) -> Result<f64> {
        Ok(2.0 * self.mass * energy - self.effective_u(x)?)
    }

    /// Infallible form for the numerics layer: domain errors become NaN.
    pub(crate) fn momentum_squared_or_nan(&self, energy: f64, x: f64) -> f64 {
        self.momentum_squared(energy, x).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub n: u32,
    pub energy: f64,
    /// `|W/ħ − π(n+½)|` at the returned energy.
    pub phase_residual: f64,
}

//! Run configuration: the JSON schema accepted by `--config`, the same fields
//! as the command-line flags, and default resolution.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use phasequant_core::{CornellParams, Error, Potential, QuantProblem, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Wavefunction,
    Cornell,
    CornellVerifyIdentity,
    Verify,
    IdentityCheck,
}

impl Command {
    fn is_relativistic(self) -> bool {
        matches!(
            self,
            Command::Cornell | Command::CornellVerifyIdentity | Command::IdentityCheck
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// Built-in potentials. `cornell` is the relativistic funnel equation;
/// `funnel` is the same potential in the Schrödinger problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    Harmonic,
    Coulomb,
    Linear,
    Funnel,
    Cornell,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub potential: Option<Builtin>,
    pub potential_expr: Option<String>,
    pub mass: Option<f64>,
    pub hbar: Option<f64>,
    pub l: Option<u32>,
    pub window: Option<[f64; 2]>,
    pub omega: Option<f64>,
    pub e2: Option<f64>,
    pub kappa: Option<f64>,
    pub alpha_tilde: Option<f64>,
    pub alpha_s: Option<f64>,
    pub n_max: Option<u32>,
    pub maslov: Option<u32>,
    pub n: Option<u32>,
    pub samples: Option<usize>,
    pub n_r_max: Option<u32>,
    pub l_max: Option<u32>,
    pub shift: Option<f64>,
    pub numeric: Option<bool>,
    pub sweeps: Option<usize>,
    pub energy: Option<f64>,
    pub grid_h: Option<f64>,
    pub rel_tol: Option<f64>,
    pub tolerances: Option<Tolerances>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    /// Fields set in `top` win.
    pub fn merge(mut self, top: &RunConfig) -> Self {
        overlay!(self, top; command, potential, potential_expr, mass, hbar, l, window, omega, e2,
            kappa, alpha_tilde, alpha_s, n_max, maslov, n, samples, n_r_max, l_max, shift, numeric,
            sweeps, energy, grid_h, rel_tol, tolerances, format, out, seed);
        self
    }

    pub fn command(&self) -> Result<Command, Error> {
        self.command
            .ok_or_else(|| Error::InvalidParameter("no command given".into()))
    }

    fn is_cornell(&self) -> Result<bool, Error> {
        Ok(self.command()?.is_relativistic() || self.potential == Some(Builtin::Cornell))
    }

    /// Fills every default the chosen command reads, so the echoed config
    /// describes the run completely.
    pub fn resolve(mut self) -> Result<Self, Error> {
        let command = self.command()?;
        if self.potential.is_some() && self.potential_expr.is_some() {
            return Err(Error::InvalidParameter(
                "give either --potential or --potential-expr, not both".into(),
            ));
        }
        if self.alpha_tilde.is_some() && self.alpha_s.is_some() {
            return Err(Error::InvalidParameter("give either --alpha-tilde or --alpha-s".into()));
        }
        self.format.get_or_insert(match command {
            Command::Wavefunction => Format::Csv,
            _ => Format::Json,
        });
        self.seed.get_or_insert(0);
        if self.is_cornell()? {
            if command.is_relativistic() {
                self.potential.get_or_insert(Builtin::Cornell);
            }
            let supported = command.is_relativistic() || command == Command::Verify;
            if !supported || self.potential != Some(Builtin::Cornell) || self.potential_expr.is_some() {
                return Err(Error::InvalidParameter(format!(
                    "command {command:?} works on the relativistic cornell problem only"
                )));
            }
            self.mass.get_or_insert(0.0);
            self.kappa.get_or_insert(0.2);
            if self.alpha_s.is_none() {
                self.alpha_tilde.get_or_insert(0.5);
            }
            self.l.get_or_insert(0);
            match command {
                Command::Cornell => {
                    self.n_r_max.get_or_insert(3);
                    self.numeric.get_or_insert(false);
                }
                Command::CornellVerifyIdentity => {
                    self.sweeps.get_or_insert(20);
                }
                Command::Verify => {
                    self.n_max.get_or_insert(3);
                    self.grid_h.get_or_insert(phasequant_core::oracle::DEFAULT_STEP);
                }
                _ => {}
            }
            return Ok(self);
        }
        if self.potential.is_none() && self.potential_expr.is_none() {
            return Err(Error::InvalidParameter("no potential given".into()));
        }
        self.mass.get_or_insert(1.0);
        self.hbar.get_or_insert(1.0);
        match self.potential {
            Some(Builtin::Harmonic) => {
                self.omega.get_or_insert(1.0);
            }
            Some(Builtin::Coulomb) => {
                self.e2.get_or_insert(1.0);
            }
            Some(Builtin::Linear) => {
                self.kappa.get_or_insert(1.0);
            }
            Some(Builtin::Funnel) => {
                self.kappa.get_or_insert(0.2);
                if self.alpha_s.is_none() {
                    self.alpha_tilde.get_or_insert(0.5);
                }
            }
            _ => {}
        }
        let mut tol = self.tolerances.unwrap_or_default();
        if let Some(r) = self.rel_tol {
            tol.energy = r;
        }
        self.tolerances = Some(tol);
        match command {
            Command::Spectrum => {
                self.n_max.get_or_insert(5);
            }
            Command::Wavefunction => {
                self.n.get_or_insert(0);
                self.samples.get_or_insert(201);
            }
            Command::Verify => {
                self.n_max.get_or_insert(3);
                self.grid_h.get_or_insert(phasequant_core::oracle::DEFAULT_STEP);
            }
            _ => {}
        }
        // Radial problems get l = 0 unless told otherwise.
        let problem = self.problem()?;
        if problem.potential.domain() == phasequant_core::Domain::HalfLine {
            self.l.get_or_insert(0);
        } else if self.l.is_some() {
            return Err(Error::InvalidParameter("--l applies to radial (half-line) problems only".into()));
        }
        Ok(self)
    }

    fn alpha_tilde_value(&self) -> f64 {
        match self.alpha_s {
            Some(a) => 4.0 * a / 3.0,
            None => self.alpha_tilde.unwrap_or(0.5),
        }
    }

    pub fn problem(&self) -> Result<QuantProblem, Error> {
        let potential = match (self.potential, &self.potential_expr) {
            (_, Some(text)) => Potential::custom(phasequant_core::parse(text)?),
            (Some(Builtin::Harmonic), None) => Potential::harmonic(self.mass.unwrap_or(1.0), self.omega.unwrap_or(1.0))?,
            (Some(Builtin::Coulomb), None) => Potential::coulomb(self.e2.unwrap_or(1.0))?,
            (Some(Builtin::Linear), None) => Potential::linear(self.kappa.unwrap_or(1.0))?,
            (Some(Builtin::Funnel), None) => Potential::cornell(self.alpha_tilde_value(), self.kappa.unwrap_or(0.2))?,
            (Some(Builtin::Cornell), None) => {
                return Err(Error::InvalidParameter(
                    "the relativistic cornell problem is handled by the cornell commands; \
                     use `funnel` for the Schrödinger potential"
                        .into(),
                ))
            }
            (None, None) => return Err(Error::InvalidParameter("no potential given".into())),
        };
        let radial = potential.domain() == phasequant_core::Domain::HalfLine;
        let mut problem = QuantProblem::new(potential, self.mass.unwrap_or(1.0), self.hbar.unwrap_or(1.0))?
            .with_tolerances(self.tolerances.unwrap_or_default());
        if radial {
            problem = problem.with_angular(self.l.unwrap_or(0));
        }
        if let Some([a, b]) = self.window {
            problem = problem.with_window(a, b)?;
        }
        Ok(problem)
    }

    pub fn cornell_params(&self) -> Result<CornellParams, Error> {
        CornellParams::new(
            self.mass.unwrap_or(0.0),
            self.alpha_tilde_value(),
            self.kappa.unwrap_or(0.2),
            self.l.unwrap_or(0),
        )
    }
}

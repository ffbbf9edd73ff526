//! Acceptance checks, one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use phasequant_core::cornell::{
    cornell_quantize_numeric, cornell_spectrum_closed_form, identity_sweep, CornellParams,
};
use phasequant_core::oracle::{schrodinger_levels, DEFAULT_STEP};
use phasequant_core::wavefunction::{build_classical_wf, connect, PiecewiseWavefunction};
use phasequant_core::{quantize_2tp, quantize_mtp, spectrum, Error, Potential, QuantProblem};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn harmonic() -> QuantProblem {
    QuantProblem::new(Potential::harmonic(1.0, 1.0).unwrap(), 1.0, 1.0).unwrap()
}

fn coulomb(l: u32) -> QuantProblem {
    QuantProblem::new(Potential::coulomb(1.0).unwrap(), 1.0, 1.0)
        .unwrap()
        .with_angular(l)
}

fn bohr(n_r: u32, l: u32) -> f64 {
    -0.5 / ((n_r + l + 1) as f64).powi(2)
}

fn harmonic_exactness() -> Verdict {
    let p = harmonic();
    let start = Instant::now();
    let levels = match spectrum(&p, 20) {
        Ok(l) => l,
        Err(e) => return verdict(false, format!("level {} failed: {}", e.level, e.source)),
    };
    let secs = start.elapsed().as_secs_f64();
    let worst = levels
        .iter()
        .map(|l| rel(l.energy, l.n as f64 + 0.5))
        .fold(0.0, f64::max);
    verdict(
        worst <= 1e-8 && secs < 2.0,
        format!("n=0..20 max rel err {worst:.2e} (tol 1e-8), {secs:.3} s (limit 2 s)"),
    )
}

fn coulomb_exactness() -> Verdict {
    let mut worst: f64 = 0.0;
    for l in 0..=3 {
        let p = coulomb(l);
        match spectrum(&p, 5) {
            Ok(levels) => {
                for lvl in levels {
                    worst = worst.max(rel(lvl.energy, bohr(lvl.n, l)));
                }
            }
            Err(e) => return verdict(false, format!("l={l} n_r={} failed: {}", e.level, e.source)),
        }
    }
    verdict(worst <= 1e-8, format!("n_r=0..5, l=0..3 max rel err {worst:.2e} (tol 1e-8)"))
}

fn mtp_reduction() -> Verdict {
    let mut worst: f64 = 0.0;
    for p in [harmonic(), coulomb(0)] {
        for n in 0..=5 {
            let (a, b) = match (quantize_mtp(&p, n, 2), quantize_2tp(&p, n)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return verdict(false, format!("N={n}: {e}")),
            };
            worst = worst.max(rel(a.energy, b.energy));
        }
    }
    verdict(worst <= 1e-10, format!("harmonic and Coulomb N=0..5 max rel diff {worst:.2e} (tol 1e-10)"))
}

fn cornell_identity() -> Verdict {
    let start = Instant::now();
    let sweep = match identity_sweep(20, 2024) {
        Ok(s) => s,
        Err(e) => return verdict(false, e.to_string()),
    };
    let secs = start.elapsed().as_secs_f64();
    let worst = sweep
        .cases
        .iter()
        .map(|c| c.residual / c.tolerance)
        .fold(0.0, f64::max);
    verdict(
        sweep.all_pass && secs < 5.0,
        format!(
            "20 seeded sets, max residual {:.2e}, worst residual/tolerance {worst:.2e}, {secs:.3} s (limit 5 s)",
            sweep.max_residual
        ),
    )
}

fn cornell_grid(params: CornellParams) -> Result<f64, (u32, u32, Error)> {
    let mut worst: f64 = 0.0;
    for l in 0..=4 {
        for n_r in 0..=5 {
            let p = params.with_l(l);
            let num = cornell_quantize_numeric(&p, n_r).map_err(|e| (n_r, l, e))?;
            let exact = cornell_spectrum_closed_form(&p, n_r).map_err(|e| (n_r, l, e))?;
            worst = worst.max(rel(num.e_squared, exact.e_squared));
        }
    }
    Ok(worst)
}

fn cornell_consistency() -> Verdict {
    let massless = CornellParams::new(0.0, 0.5, 0.2, 0).unwrap();
    let massive = CornellParams::new(0.5, 0.5, 2.0, 0).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, p) in [("m=0 kappa=0.2", massless), ("m=0.5 kappa=2.0", massive)] {
        match cornell_grid(p) {
            Ok(w) => {
                pass &= w <= 1e-6;
                parts.push(format!("{name} alpha~=0.5: max rel err {w:.2e}"));
            }
            Err((n, l, e)) => {
                pass = false;
                parts.push(format!("{name}: n_r={n} l={l} failed: {e}"));
            }
        }
    }
    // Informational: at kappa = 0.2 the massive n_r = 0, l >= 1 levels sit
    // below the energy where the r < 0 cut opens.
    let probe = CornellParams::new(0.5, 0.5, 0.2, 0).unwrap();
    let anomalies = (0..=4)
        .flat_map(|l| (0..=5).map(move |n| (l, n)))
        .filter(|&(l, n)| matches!(cornell_quantize_numeric(&probe.with_l(l), n), Err(Error::CutCountMismatch { .. })))
        .count();
    parts.push(format!("(m=0.5 kappa=0.2: {anomalies}/30 levels below the two-cut threshold)"));
    verdict(pass, parts.join("; "))
}

fn oracle_validation() -> Verdict {
    let h = match schrodinger_levels(&harmonic(), 3, DEFAULT_STEP) {
        Ok(l) => l,
        Err(e) => return verdict(false, format!("harmonic: {e}")),
    };
    let c = match schrodinger_levels(&coulomb(0), 0, DEFAULT_STEP) {
        Ok(l) => l,
        Err(e) => return verdict(false, format!("coulomb: {e}")),
    };
    let hw = h
        .iter()
        .map(|l| (l.energy - (l.index as f64 + 0.5)).abs())
        .fold(0.0, f64::max);
    let cw = (c[0].energy + 0.5).abs();
    verdict(
        hw <= 1e-6 && cw <= 1e-6,
        format!("harmonic n=0..3 max abs err {hw:.2e}, Coulomb ground abs err {cw:.2e} (tol 1e-6)"),
    )
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_phasequant"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).expect("utf-8 output"),
    )
}

fn exactness_experiment() -> Verdict {
    let mut pass = true;
    let mut lines = Vec::new();
    for l in 0..=2 {
        let (code, text) = cli(&["verify", "--problem", "cornell", "--n-max", "3", "--l", &l.to_string()]);
        let v: Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => return verdict(false, format!("l={l}: unparsable report ({e})")),
        };
        if code != 0 {
            return verdict(false, format!("l={l}: exit {code}: {}", v["error"]));
        }
        let rows = v["result"]["deviations"]["rows"].as_array().cloned().unwrap_or_default();
        pass &= rows.len() == 4;
        for r in rows {
            let e = r["oracle"].as_f64().unwrap_or(f64::NAN);
            let g = r["grid_residual"].as_f64().unwrap_or(f64::NAN);
            let d = r["relative"].as_f64().unwrap_or(f64::NAN);
            pass &= g < 1e-5 * e && d.is_finite();
            lines.push(format!("(n_r={},l={l}) rel dev {d:.3e}", r["index"]));
        }
    }
    verdict(
        pass,
        format!("report generated and grid-converged; closed form vs oracle: {}", lines.join(", ")),
    )
}

fn simpson(wf: &PiecewiseWavefunction, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let s: f64 = (0..=m)
        .map(|i| {
            let c = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * wf.eval(a + h * i as f64).powi(2)
        })
        .sum();
    s * h / 3.0
}

fn wavefunction_properties() -> Verdict {
    let mut cases: Vec<(QuantProblem, u32, bool)> = (0..=20).map(|n| (harmonic(), n, true)).collect();
    for l in 0..=3 {
        cases.extend((0..=5).map(|n| (coulomb(l), n, false)));
    }
    let (mut node_bad, mut parity, mut phase, mut norm) = (0, 0.0f64, 0.0f64, 0.0f64);
    for (p, n, symmetric) in &cases {
        let entry = match quantize_2tp(p, *n) {
            Ok(e) => e,
            Err(e) => return verdict(false, format!("n={n}: {e}")),
        };
        let wf = match build_classical_wf(p, &entry) {
            Ok(w) => w,
            Err(e) => return verdict(false, format!("n={n}: {e}")),
        };
        if wf.node_count() != *n as usize {
            node_bad += 1;
        }
        phase = phase.max((wf.phi2 - wf.phi1 - PI * (*n as f64 + 0.5)).abs());
        // Plain Simpson over the whole window, split at the turning points.
        let (lo, hi) = p.window;
        let total = simpson(&wf, lo, wf.x1, 100_000)
            + simpson(&wf, wf.x1, wf.x2, 20_000)
            + simpson(&wf, wf.x2, hi, 100_000);
        norm = norm.max((total - 1.0).abs());
        if *symmetric {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..=400 {
                let x = 2.0 * wf.x2 * i as f64 / 400.0;
                parity = parity.max((wf.eval(-x) - sign * wf.eval(x)).abs());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut matching: f64 = 0.0;
    for _ in 0..1000 {
        let k = connect(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let (a, b) = k.matching_residuals();
        matching = matching.max(a).max(b);
    }
    verdict(
        node_bad == 0 && parity <= 1e-8 && phase <= 1e-8 && norm <= 1e-6 && matching <= 1e-14,
        format!(
            "{} levels: node mismatches {node_bad}, parity err {parity:.1e}, phase err {phase:.1e}, \
             norm err {norm:.1e}; connection residual {matching:.1e} over 1000 random (C, D)",
            cases.len()
        ),
    )
}

fn determinism() -> Verdict {
    let commands: [&[&str]; 6] = [
        &["spectrum", "--potential", "harmonic", "--mass", "1", "--omega", "1", "--n-max", "2"],
        &["wavefunction", "--potential", "harmonic", "--n", "2", "--samples", "50"],
        &["cornell", "--kappa", "0.2", "--alpha-s", "0.375", "--n-r-max", "3", "--numeric"],
        &["cornell", "verify-identity", "--sweeps", "5", "--seed", "42"],
        &["identity-check", "--kappa", "0.3", "--mass", "0.4", "--l", "1"],
        &["verify", "--potential", "harmonic", "--n-max", "1"],
    ];
    let mut bad = Vec::new();
    for args in commands {
        let (c1, a) = cli(args);
        let (c2, b) = cli(args);
        if c1 != 0 || c2 != 0 || a != b || a.is_empty() {
            bad.push(args.join(" "));
        }
    }
    verdict(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} commands run twice, byte-identical output", commands.len())
        } else {
            format!("differs or fails: {}", bad.join(" | "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("harmonic oscillator exactness", harmonic_exactness),
        ("Coulomb exactness with Langer term", coulomb_exactness),
        ("multi-turning-point reduction", mtp_reduction),
        ("funnel cut-sum identity", cornell_identity),
        ("funnel spectrum consistency", cornell_consistency),
        ("oracle validation", oracle_validation),
        ("funnel exactness experiment", exactness_experiment),
        ("wavefunction properties", wavefunction_properties),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {} [{}] {name}: {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

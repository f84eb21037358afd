use std::fmt;

use rayon::prelude::*;
use serde_json::{json, Value};

use ness_core::lax::{theta_twist, LaxOp, Model};
use ness_core::liouvillian::{fixed_point, lindblad_apply, DrivingSpec};
use ness_core::mpo::{steady_state, MpoFactor};
use ness_core::observables::{current_at_bond, current_from_ratio, density_profile, log_partition_fn};
use ness_core::sparse::dense_max_abs;
use ness_core::verify::{run_suite, sun_solution, xxz_solution, Suite};
use ness_core::C64;

use crate::args::{Format, ModelKind, ObservablesArgs, RunArgs, SteadyStateArgs, SuiteArg, SweepArgs, SweepOver, VerifyArgs};
use crate::output::{emit, to_json, Cell, Csv};

pub const STATE_TOL: f64 = 1e-8;
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(ness_core::Error),
    Check(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_capacity() => 3,
            CliError::Core(ness_core::Error::InvalidParam(_) | ness_core::Error::Precondition(_)) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
            CliError::Check(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ness_core::Error> for CliError {
    fn from(e: ness_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

/// Model, Lax operator (already twisted where relevant) and driving for one
/// parameter point.
struct Setup {
    model: Model,
    lax: LaxOp,
    driving: DrivingSpec,
}

impl RunArgs {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return usage("--n must be at least 1");
        }
        if !(self.coupling > 0.0) || !self.coupling.is_finite() {
            return usage("--coupling must be a positive real");
        }
        if self.theta.is_some() && self.model != ModelKind::ThetaXxz {
            return usage("--theta is only valid with --model theta-xxz");
        }
        if self.model == ModelKind::ThetaXxz && self.theta.is_none() {
            return usage("--model theta-xxz needs --theta");
        }
        if self.species.is_some() && self.model != ModelKind::Sun {
            return usage("--N is only valid with --model sun");
        }
        if self.gamma.is_some() && matches!(self.model, ModelKind::Xxx | ModelKind::Sun) {
            return usage("--gamma is only valid with --model xxz or theta-xxz");
        }
        if let Some(g) = self.gamma {
            if !g.is_finite() {
                return usage("--gamma must be finite");
            }
        }
        if self.model == ModelKind::Sun && self.species.unwrap_or(3) < 2 {
            return usage("--N must be at least 2");
        }
        Ok(())
    }

    fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(0.0)
    }

    fn species(&self) -> usize {
        match self.model {
            ModelKind::Sun => self.species.unwrap_or(3),
            _ => 2,
        }
    }

    fn params_json(&self) -> Value {
        let model = match self.model {
            ModelKind::Xxz => "xxz",
            ModelKind::Xxx => "xxx",
            ModelKind::Sun => "sun",
            ModelKind::ThetaXxz => "theta-xxz",
        };
        json!({
            "model": model,
            "n": self.n,
            "gamma": self.gamma(),
            "theta": self.theta,
            "coupling": self.coupling,
            "N": self.species(),
            "seed": self.seed,
        })
    }

    fn setup(&self) -> Result<Setup> {
        let n = self.n;
        let g = self.gamma();
        Ok(match self.model {
            ModelKind::Xxz | ModelKind::Xxx => {
                let (lax, _, driving) = xxz_solution(g, self.coupling, n + 2)?;
                Setup {
                    model: Model::Xxz { gamma: g },
                    lax,
                    driving,
                }
            }
            ModelKind::ThetaXxz => {
                let theta = self.theta.unwrap_or(0.0);
                let (lax, _, driving) = xxz_solution(g, self.coupling, n + 2)?;
                Setup {
                    model: Model::ThetaXxz { gamma: g, theta, zz_scale: 1.0 },
                    lax: theta_twist(&lax, theta)?,
                    driving,
                }
            }
            ModelKind::Sun => {
                let k = self.species();
                let (lax, _, driving) = sun_solution(k, self.coupling, n + 1)?;
                Setup {
                    model: Model::Sun { n: k },
                    lax,
                    driving,
                }
            }
        })
    }
}

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn cmd_steady_state(a: &SteadyStateArgs) -> Result<()> {
    let run = &a.run;
    run.validate()?;
    if run.format == Format::Bin && run.output.is_none() {
        return usage("--format bin needs --output");
    }
    let s = run.setup()?;
    let rho = steady_state(&MpoFactor::new(s.lax, run.n)?)?;
    let residual = dense_max_abs(&lindblad_apply(&rho, s.model, &s.driving)?.matrix);
    eprintln!("lindblad residual of MPO state: {residual:.3e}");
    let mut oracle = Value::Null;
    let mut failure = None;
    if residual > RESIDUAL_TOL {
        failure = Some(format!("lindblad residual {residual:e} exceeds {RESIDUAL_TOL:e}"));
    }
    if a.oracle {
        let fp = fixed_point(s.model, run.n, &s.driving)?;
        let diff = rho.max_abs_diff(&fp.rho);
        eprintln!("max |rho_mpo - rho_oracle| = {diff:.3e} (null_dim {})", fp.null_dim);
        oracle = json!({ "diff": diff, "null_dim": fp.null_dim, "residual": fp.residual });
        if diff > STATE_TOL || fp.null_dim != 1 {
            failure = Some(format!("oracle difference {diff:e}, null_dim {}", fp.null_dim));
        }
    }
    let bytes = match run.format {
        Format::Json => to_json(&json!({
            "schema": 1,
            "command": "steady-state",
            "params": run.params_json(),
            "state": rho.to_json(),
            "lindblad_residual": residual,
            "oracle": oracle,
        }))?,
        Format::Csv => {
            let mut csv = Csv::default().header(&["row", "col", "re", "im"]);
            for i in 0..rho.dim() {
                for j in 0..rho.dim() {
                    let z = rho.matrix[(i, j)];
                    csv.row(&[Cell::Int(i as i64), Cell::Int(j as i64), Cell::Float(z.re), Cell::Float(z.im)]);
                }
            }
            csv.into_bytes()
        }
        Format::Bin => rho.to_bin(),
    };
    emit(run.output.as_deref(), &bytes)?;
    match failure {
        Some(m) => Err(CliError::Check(m)),
        None => Ok(()),
    }
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<()> {
    let suite = match a.suite {
        SuiteArg::Algebra => Suite::Algebra,
        SuiteArg::GeneralR => Suite::GeneralR,
        SuiteArg::All => Suite::All,
    };
    let reports = run_suite(suite, a.seed, a.perturb_spin)?;
    for r in &reports {
        eprintln!(
            "{} {:<22} residual {:.3e} tol {:.0e}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.residual,
            r.tolerance
        );
    }
    let bytes = to_json(&json!({ "schema": 1, "command": "verify", "seed": a.seed, "checks": reports }))?;
    emit(a.output.as_deref(), &bytes)?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}

/// Species pair `(k, l)` of the reported current: spin up to down for
/// spin 1/2, the last species to the first for SU(N).
fn current_species(run: &RunArgs) -> (usize, usize) {
    match run.model {
        ModelKind::Sun => (run.species() - 1, 0),
        _ => (0, 1),
    }
}

pub fn cmd_observables(a: &ObservablesArgs) -> Result<()> {
    let run = &a.run;
    run.validate()?;
    if run.format == Format::Bin {
        return usage("observables support json and csv output");
    }
    let (want_profile, want_current) = if a.profile || a.current { (a.profile, a.current) } else { (true, true) };
    if want_current && run.n < 2 {
        return usage("a current needs --n >= 2");
    }
    if a.check_ratio && !matches!(run.model, ModelKind::Xxz | ModelKind::Xxx) {
        return usage("--check-ratio applies to the untwisted spin-1/2 chain");
    }
    let s = run.setup()?;
    let n = run.n;
    let np = s.lax.n_phys;

    let mut current = Value::Null;
    let mut failure = None;
    if want_current {
        let (k, l) = current_species(run);
        let bond = (n - 2) / 2;
        let j = current_at_bond(&s.lax, n, bond, k, l)?;
        eprintln!("current j^({k},{l}) on bond {bond}: {:.16e} {:+.16e}i", j.re, j.im);
        let mut ratio = Value::Null;
        if a.check_ratio {
            let r = current_from_ratio(&s.lax, n)?;
            let diff = (r - j).norm();
            eprintln!("partition-ratio path:        {:.16e} {:+.16e}i", r.re, r.im);
            eprintln!("difference: {diff:.3e}");
            ratio = json!({ "value": cjson(r), "diff": diff });
            if diff > RESIDUAL_TOL {
                failure = Some(format!("current paths differ by {diff:e}"));
            }
        }
        current = json!({ "species": [k, l], "bond": bond, "value": cjson(j), "ratio": ratio });
    }

    let profile = if want_profile { Some(density_profile(&s.lax, n)?) } else { None };

    let bytes = match run.format {
        Format::Json => to_json(&json!({
            "schema": 1,
            "command": "observables",
            "params": run.params_json(),
            "current": current,
            "profile": profile.as_ref().map(|p| {
                p.iter().map(|site| site.iter().map(|z| z.re).collect::<Vec<_>>()).collect::<Vec<_>>()
            }),
        }))?,
        Format::Csv => match &profile {
            Some(p) => {
                let mut cols: Vec<String> = vec!["site".into()];
                cols.extend((0..np).map(|k| format!("n{k}")));
                if np == 2 {
                    cols.push("sz".into());
                }
                let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
                let mut csv = Csv::default().header(&refs);
                for (j, site) in p.iter().enumerate() {
                    let mut cells = vec![Cell::Int(j as i64 + 1)];
                    cells.extend(site.iter().map(|z| Cell::Float(z.re)));
                    if np == 2 {
                        cells.push(Cell::Float((site[0] - site[1]).re));
                    }
                    csv.row(&cells);
                }
                csv.into_bytes()
            }
            None => {
                let mut csv = Csv::default().header(&["bond", "re", "im"]);
                let v = &current["value"];
                csv.row(&[
                    Cell::Int(current["bond"].as_i64().unwrap_or(0)),
                    Cell::Float(v[0].as_f64().unwrap_or(f64::NAN)),
                    Cell::Float(v[1].as_f64().unwrap_or(f64::NAN)),
                ]);
                csv.into_bytes()
            }
        },
        Format::Bin => unreachable!("rejected above"),
    };
    emit(run.output.as_deref(), &bytes)?;
    match failure {
        Some(m) => Err(CliError::Check(m)),
        None => Ok(()),
    }
}

struct SweepRow {
    x: f64,
    current: C64,
    log_z: C64,
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let run = &a.run;
    run.validate()?;
    if run.n < 2 {
        return usage("a sweep needs --n >= 2");
    }
    if a.steps == 0 {
        return usage("--steps must be positive");
    }
    if a.over == SweepOver::Gamma && !matches!(run.model, ModelKind::Xxz | ModelKind::ThetaXxz) {
        return usage("a γ sweep needs --model xxz or theta-xxz");
    }
    if run.format == Format::Bin {
        return usage("sweeps support json and csv output");
    }
    let grid: Vec<f64> = (0..a.steps)
        .map(|i| if a.steps == 1 { a.from } else { a.from + (a.to - a.from) * i as f64 / (a.steps - 1) as f64 })
        .collect();
    let (k, l) = current_species(run);
    let bond = (run.n - 2) / 2;
    // rows are collected in grid order whatever the scheduling
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&x| {
            let mut point = run.clone();
            match a.over {
                SweepOver::Coupling => point.coupling = x,
                SweepOver::Gamma => point.gamma = Some(x),
            }
            point.validate()?;
            let s = point.setup()?;
            Ok(SweepRow {
                x,
                current: current_at_bond(&s.lax, run.n, bond, k, l)?,
                log_z: log_partition_fn(&s.lax, run.n)?,
            })
        })
        .collect::<Result<_>>()?;
    let over = match a.over {
        SweepOver::Coupling => "coupling",
        SweepOver::Gamma => "gamma",
    };
    let bytes = match run.format {
        Format::Csv => {
            let mut csv = Csv::default().header(&[over, "current_re", "current_im", "log_z_re", "log_z_im"]);
            for r in &rows {
                csv.row(&[
                    Cell::Float(r.x),
                    Cell::Float(r.current.re),
                    Cell::Float(r.current.im),
                    Cell::Float(r.log_z.re),
                    Cell::Float(r.log_z.im),
                ]);
            }
            csv.into_bytes()
        }
        _ => to_json(&json!({
            "schema": 1,
            "command": "sweep",
            "params": run.params_json(),
            "over": over,
            "bond": bond,
            "species": [k, l],
            "rows": rows.iter().map(|r| json!({
                over: r.x,
                "current": cjson(r.current),
                "log_z": cjson(r.log_z),
            })).collect::<Vec<_>>(),
        }))?,
    };
    emit(run.output.as_deref(), &bytes)?;
    Ok(())
}

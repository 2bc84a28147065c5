use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use fullerene_stm::physics::{linearization_factors, spin_current, sweep_delta_vs_d1, CurrentResult, Spin};
use fullerene_stm::readout::{distinguishability_sweep, fidelity_curve};
use fullerene_stm::stochastic::{
    dispersion_monte_carlo, mixed_spin_dispersion, simulate_trace, spin_decay_time, MixedSpinState, SpinLifetime,
};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::output::{fmt_g6, provenance, write_atomic};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration {0}")]
    Config(#[from] ConfigError),
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Model(fullerene_stm::Error),
}

impl CliError {
    pub const CONFIG_EXIT: u8 = 2;
    pub const RUNTIME_EXIT: u8 = 3;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::ReadConfig { .. } => Self::CONFIG_EXIT,
            CliError::Write { .. } | CliError::Model(_) => Self::RUNTIME_EXIT,
        }
    }
}

/// Library errors caused by the inputs become config errors on `field`.
fn model_error(err: fullerene_stm::Error, field: &str) -> CliError {
    use fullerene_stm::Error as E;
    match err {
        E::InvalidParameter { .. }
        | E::NonPerturbative { .. }
        | E::GapClosed { .. }
        | E::AttemptRateExceeded { .. }
        | E::EmptyTrace { .. }
        | E::TransmissionUnderflow(_) => CliError::Config(ConfigError::new(field, err.to_string())),
        E::QuadratureNotConverged { .. } | E::RouteMismatch { .. } => CliError::Model(err),
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Paper,
    Exact,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpinArg {
    Up,
    Down,
}

#[derive(Debug, Parser)]
#[command(name = "fullerene-stm", version, about = "Spin-dependent STM readout of an endohedral fullerene qubit")]
pub struct Cli {
    /// Config file of dotted `section.key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Output file (written atomically); stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Override any config key, e.g. `--set vibration.delta_pm=0`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Exchange strength, meV.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub j_mev: Option<f64>,
    /// Tip–cage gap, nm.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub d1_nm: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spin-resolved currents at one geometry.
    Current,
    /// Currents against tip height as CSV.
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        from_nm: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to_nm: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// One simulated current record.
    Trace {
        #[arg(long, allow_hyphen_values = true)]
        duration_ns: Option<f64>,
        #[arg(long, value_enum)]
        caged: Option<SpinArg>,
    },
    /// Readout fidelity against integration time as CSV.
    Fidelity {
        /// Comma-separated integration times.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        times_ns: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Spin lifetime under tunneling back-action.
    Decay {
        #[arg(long, allow_hyphen_values = true)]
        tau_e_ps: Option<f64>,
    },
    /// Current dispersion of an imperfectly polarized caged spin.
    Dispersion {
        #[arg(long, allow_hyphen_values = true)]
        g: Option<f64>,
        #[arg(long)]
        n_events: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Spin contrast against counting noise over the sweep range as CSV.
    Distinguish,
    /// Print the effective configuration.
    Config,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Current => "current",
            Command::Sweep { .. } => "sweep",
            Command::Trace { .. } => "trace",
            Command::Fidelity { .. } => "fidelity",
            Command::Decay { .. } => "decay",
            Command::Dispersion { .. } => "dispersion",
            Command::Distinguish => "distinguish",
            Command::Config => "config",
        }
    }

    fn overrides(&self) -> Vec<String> {
        let mut o = Vec::new();
        let mut push = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push(format!("{key}={v}"));
            }
        };
        let f = |v: &Option<f64>| v.map(|x| format!("{x:?}"));
        match self {
            Command::Sweep { from_nm, to_nm, steps } => {
                push("sweep.d1_min_nm", f(from_nm));
                push("sweep.d1_max_nm", f(to_nm));
                push("sweep.steps", steps.map(|s| s.to_string()));
            }
            Command::Trace { duration_ns, caged } => {
                push("trace.duration_ns", f(duration_ns));
                push("spin.caged", caged.map(|c| spin_name(&c).to_string()));
            }
            Command::Fidelity { times_ns, trials } => {
                let list = times_ns.as_ref().map(|t| {
                    let items: Vec<String> = t.iter().map(|x| format!("{x:?}")).collect();
                    format!("[{}]", items.join(", "))
                });
                push("readout.integration_ns", list);
                push("readout.trials", trials.map(|t| t.to_string()));
            }
            Command::Decay { tau_e_ps } => push("decay.tau_e_ps", f(tau_e_ps)),
            Command::Dispersion { g, n_events, trials } => {
                push("dispersion.g", f(g));
                push("dispersion.n_events", n_events.map(|n| n.to_string()));
                push("dispersion.trials", trials.map(|t| t.to_string()));
            }
            Command::Current | Command::Distinguish | Command::Config => {}
        }
        o
    }
}

fn spin_name(s: &SpinArg) -> &'static str {
    match s {
        SpinArg::Up => "up",
        SpinArg::Down => "down",
    }
}

impl Cli {
    /// Effective configuration: file, then `--set` overrides, then flags.
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
                path: path.clone(),
                source,
            })?,
            None => String::new(),
        };
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed=\"{seed}\""));
        }
        if let Some(mode) = self.mode {
            let m = match mode {
                ModeArg::Paper => "paper",
                ModeArg::Exact => "exact",
                ModeArg::Both => "both",
            };
            overrides.push(format!("mode=\"{m}\""));
        }
        if let Some(j) = self.j_mev {
            overrides.push(format!("barrier.j_mev={j:?}"));
        }
        if let Some(d1) = self.d1_nm {
            overrides.push(format!("geometry.d1_nm={d1:?}"));
        }
        if let Some(out) = &self.out {
            overrides.push(format!("output.path={:?}", out.display().to_string()));
        }
        overrides.extend(self.command.overrides());
        Ok(RunConfig::parse_with_overrides(&text, &overrides)?)
    }
}

/// Text for stdout and, optionally, a file body.
struct Report {
    stdout: String,
    file: Option<String>,
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = cli.resolve_config()?;
    log::debug!("effective config:\n{}", config.to_dotted());
    let name = cli.command.name();
    let report = match &cli.command {
        Command::Current => cmd_current(&config)?,
        Command::Sweep { .. } => cmd_sweep(&config)?,
        Command::Trace { .. } => cmd_trace(&config)?,
        Command::Fidelity { .. } => cmd_fidelity(&config)?,
        Command::Decay { .. } => cmd_decay(&config)?,
        Command::Dispersion { .. } => cmd_dispersion(&config)?,
        Command::Distinguish => cmd_distinguish(&config)?,
        Command::Config => Report {
            stdout: String::new(),
            file: Some(config.to_dotted()),
        },
    };
    let stdout_err = |source| CliError::Write {
        path: PathBuf::from("<stdout>"),
        source,
    };
    stdout.write_all(report.stdout.as_bytes()).map_err(stdout_err)?;
    if let Some(body) = report.file {
        let body = if matches!(cli.command, Command::Config) {
            body
        } else {
            format!("{}{body}", provenance(name, &config))
        };
        match config.output.path.as_deref() {
            Some(path) => {
                let path = PathBuf::from(path);
                write_atomic(&path, &body).map_err(|source| CliError::Write { path, source })?;
            }
            None => stdout.write_all(body.as_bytes()).map_err(stdout_err)?,
        }
    }
    Ok(())
}

const CURRENT_HEADER: &str = "d1_nm,I0_pA,I_up_pA,I_down_pA,dIplus_pA,dIminus_pA,dI_pA";

fn current_row(d1_nm: f64, r: &CurrentResult) -> String {
    [d1_nm, r.i0_pa, r.i_up_pa, r.i_down_pa, r.delta_plus(), r.delta_minus(), r.delta()]
        .iter()
        .map(|&v| fmt_g6(v))
        .collect::<Vec<_>>()
        .join(",")
}

fn cmd_current(config: &RunConfig) -> Result<Report, CliError> {
    let g = config.geometry()?;
    let b = config.barriers()?;
    let c = config.calibration()?;
    let mut text = String::new();
    let mut csv = format!("mode,{CURRENT_HEADER}\n");
    for (i, mode) in config.mode.modes().into_iter().enumerate() {
        let r = spin_current(&g, &b, &c, mode).map_err(|e| model_error(e, "geometry"))?;
        if i > 0 {
            text.push('\n');
        }
        let _ = writeln!(text, "mode      {}", mode.label());
        let _ = writeln!(text, "I0        {} pA", fmt_g6(r.i0_pa));
        let _ = writeln!(text, "I_up      {} pA", fmt_g6(r.i_up_pa));
        let _ = writeln!(text, "I_down    {} pA", fmt_g6(r.i_down_pa));
        let _ = writeln!(text, "dI_plus   {} pA", fmt_g6(r.delta_plus()));
        let _ = writeln!(text, "dI_minus  {} pA", fmt_g6(r.delta_minus()));
        let _ = writeln!(text, "dI        {} pA", fmt_g6(r.delta()));
        let _ = writeln!(csv, "{},{}", mode.label(), current_row(g.d1(), &r));
    }
    Ok(Report {
        stdout: text,
        file: config.output.path.as_ref().map(|_| csv),
    })
}

fn cmd_sweep(config: &RunConfig) -> Result<Report, CliError> {
    let mode = config.mode.single("sweep")?;
    let (range, steps) = config.sweep_range()?;
    let rows = sweep_delta_vs_d1(range, steps, &config.geometry()?, &config.barriers()?, &config.calibration()?, mode)
        .map_err(|e| model_error(e, "sweep"))?;
    let mut csv = format!("{CURRENT_HEADER}\n");
    for row in &rows {
        csv.push_str(&current_row(row.d1_nm, &row.result));
        csv.push('\n');
    }
    Ok(Report {
        stdout: String::new(),
        file: Some(csv),
    })
}

fn cmd_trace(config: &RunConfig) -> Result<Report, CliError> {
    let mode = config.mode.single("trace")?;
    let scenario = config.scenario(mode)?;
    let source = config.spin_source()?;
    crate::config::positive("trace.duration_ns", config.trace.duration_ns)?;
    let trace = simulate_trace(&scenario, &source, config.trace.duration_ns * 1e-9, config.seed)
        .map_err(|e| model_error(e, "trace.duration_ns"))?;
    let mut out = format!(
        "# window_length_s = {}\n# windows = {}\n# attempts = {}\n# accepted = {}\nwindow,start_s,events,current_pA\n",
        fmt_g6(trace.window_length_s),
        trace.windows(),
        trace.event_times.len(),
        trace.accepted_events()
    );
    for (i, (&count, &current)) in trace.window_counts.iter().zip(&trace.window_currents_pa).enumerate() {
        let _ = writeln!(out, "{i},{},{count},{}", fmt_g6(trace.window_start_s(i)), fmt_g6(current));
    }
    Ok(Report {
        stdout: String::new(),
        file: Some(out),
    })
}

fn cmd_fidelity(config: &RunConfig) -> Result<Report, CliError> {
    let mode = config.mode.single("fidelity")?;
    let scenario = config.scenario(mode)?;
    let settings = config.readout_settings()?;
    let times = config.integration_times()?;
    if config.readout.trials < 1 {
        return Err(ConfigError::new("readout.trials", "need at least one trial").into());
    }
    let reports = fidelity_curve(&scenario, &settings, &times, config.readout.trials, config.seed)
        .map_err(|e| model_error(e, "readout.integration_ns"))?;
    let mut csv = String::from("T_s,trials,fidelity,lo,hi,indeterminate\n");
    for r in &reports {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_g6(r.integration_time_s),
            r.trials,
            fmt_g6(r.fidelity),
            fmt_g6(r.wilson_interval.0),
            fmt_g6(r.wilson_interval.1),
            fmt_g6(r.indeterminate_rate)
        );
    }
    Ok(Report {
        stdout: String::new(),
        file: Some(csv),
    })
}

fn cmd_decay(config: &RunConfig) -> Result<Report, CliError> {
    crate::config::positive("decay.tau_e_ps", config.decay.tau_e_ps)?;
    let d = linearization_factors(&config.geometry()?, &config.barriers()?);
    let lifetime = spin_decay_time(&d, config.decay.tau_e_ps * 1e-12).map_err(|e| model_error(e, "decay.tau_e_ps"))?;
    let mut text = format!("sum_D     {}\ntau_e     {} s\n", fmt_g6(d.sum()), fmt_g6(config.decay.tau_e_ps * 1e-12));
    match lifetime {
        SpinLifetime::Finite(t) => {
            let _ = writeln!(text, "tau_s     {} s", fmt_g6(t));
        }
        SpinLifetime::NoBackAction => text.push_str("tau_s     no back-action (sum_D = 0)\n"),
    }
    Ok(Report {
        stdout: text,
        file: None,
    })
}

fn cmd_dispersion(config: &RunConfig) -> Result<Report, CliError> {
    let mode = config.mode.single("dispersion")?;
    let scenario = config.scenario(mode)?;
    let dc = &config.dispersion;
    let state = MixedSpinState::from_down_amplitude(dc.g).map_err(|e| model_error(e, "dispersion.g"))?;
    let d = linearization_factors(&scenario.geometry, &scenario.barriers);
    let analytic = mixed_spin_dispersion(state.f(), state.g(), dc.n_events, &d).map_err(|e| model_error(e, "dispersion.n_events"))?;
    let tip: Spin = config.spin.tip.into();
    let mc = dispersion_monte_carlo(&scenario, tip, state, dc.n_events, dc.trials, config.seed)
        .map_err(|e| model_error(e, "dispersion"))?;
    let text = format!(
        "N           {}\ntrials      {}\nanalytic    {}\nmonte_carlo {}\nratio       {}\n",
        dc.n_events,
        dc.trials,
        fmt_g6(analytic),
        fmt_g6(mc.relative()),
        fmt_g6(mc.relative() / analytic)
    );
    Ok(Report {
        stdout: text,
        file: None,
    })
}

fn cmd_distinguish(config: &RunConfig) -> Result<Report, CliError> {
    let mode = config.mode.single("distinguish")?;
    let scenario = config.scenario(mode)?;
    let criterion = config.detectability()?;
    let (range, steps) = config.sweep_range()?;
    let mut csv = String::from("T_s,d1_nm,dI_pA,noise_std_pA,snr,detectable\n");
    for t in config.integration_times()? {
        let rows = distinguishability_sweep(range, steps, &scenario, &criterion, t)
            .map_err(|e| model_error(e, "readout.integration_ns"))?;
        for r in rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                fmt_g6(t),
                fmt_g6(r.d1_nm),
                fmt_g6(r.delta_pa),
                fmt_g6(r.noise_std_pa),
                fmt_g6(r.snr),
                r.detectable
            );
        }
    }
    Ok(Report {
        stdout: String::new(),
        file: Some(csv),
    })
}

//! `whittaker`: evaluate class-one Whittaker functions on SO(2n+1, ℝ) by any
//! route, dump coefficient tables, and run the cross-validation suite.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure.

mod job;
mod parse;
mod run;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use whittaker_core::Cx;

use job::{check_key, CommandKind, Format, JobSpec};

#[derive(Parser, Debug)]
#[command(name = "whittaker", version, about = "Class-one Whittaker functions on SO(2n+1,R)")]
struct Cli {
    /// key = value file presetting numerical settings; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format (default: json; text for verify)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Worker threads (overrides WHITTAKER_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Rank; checked against the length of --nu when given
    #[arg(long)]
    n: Option<usize>,
    /// Spectral parameter, comma separated, entries like 0.3+0.2i
    #[arg(long, allow_hyphen_values = true)]
    nu: String,
    /// Numerical setting override, repeatable (see README for keys)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Coefficient table c_m(ν) over the box 0 <= m_i <= B
    Coeffs {
        #[command(flatten)]
        common: Common,
        #[arg(long = "box", default_value_t = 6)]
        box_size: usize,
        #[arg(long, default_value = "recurrence", value_parser = ["recurrence", "closed-form"])]
        route: String,
    },
    /// W̃_ν(y) at points or on a grid
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "series", value_parser = ["series", "bessel", "exp", "bessel-base"])]
        route: String,
        /// One point, comma separated; repeatable
        #[arg(long, allow_hyphen_values = true)]
        y: Vec<String>,
        /// One start:stop:count axis per coordinate; repeat once per axis
        #[arg(long, allow_hyphen_values = true)]
        grid: Vec<String>,
        /// Series tolerance (setting series_tol)
        #[arg(long)]
        tol: Option<String>,
        /// Quadrature relative tolerance (setting rel_tol)
        #[arg(long)]
        rel_tol: Option<String>,
    },
    /// Mellin transform T_ν(s)
    Mellin {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "recursive", value_parser = ["recursive", "direct", "base"])]
        route: String,
        /// One point, comma separated complex entries; repeatable
        #[arg(long, allow_hyphen_values = true)]
        s: Vec<String>,
        /// Contour abscissas τ_1..τ_{n−1} (setting tau)
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<String>,
    },
    /// Run acceptance checks and print a pass/fail matrix
    Verify {
        /// all, coefficients, n2-cross, mellin, symmetry, identities, fast
        #[arg(long, conflicts_with = "check")]
        suite: Option<String>,
        /// Individual check ids, comma separated
        #[arg(long, value_delimiter = ',')]
        check: Vec<u8>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Regularity scan of ν on a box
    Regularity {
        #[command(flatten)]
        common: Common,
        #[arg(long = "box", default_value_t = 8)]
        box_size: usize,
    },
    /// Re-run the job echoed in a JSON result document
    Replay { file: PathBuf },
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn cx(v: Vec<Complex64>) -> Vec<Cx> {
    v.into_iter().map(Cx::from).collect()
}

fn settings(cli_config: Option<&PathBuf>, set: &[String], extra: &[(&str, Option<&String>)]) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    if let Some(path) = cli_config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
        for (k, v) in parse::config_file(&text)? {
            check_key(&k)?;
            out.insert(k, v);
        }
    }
    for kv in set {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got '{kv}'"))?;
        check_key(k.trim())?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    for (k, v) in extra {
        if let Some(v) = v {
            out.insert(k.to_string(), v.to_string());
        }
    }
    Ok(out)
}

fn nu_of(common: &Common) -> Result<Vec<Cx>, String> {
    let nu = parse::complex_list(&common.nu)?;
    if let Some(n) = common.n {
        if n != nu.len() {
            return Err(format!("--n {n} but --nu has {} entries", nu.len()));
        }
    }
    Ok(cx(nu))
}

fn build(cli: &Cli) -> Result<Option<JobSpec>, String> {
    let cfg = cli.config.as_ref();
    let blank = |command, format| JobSpec {
        command,
        n: None,
        nu: None,
        route: None,
        box_size: None,
        y: None,
        s: None,
        suite: None,
        checks: None,
        seed: None,
        settings: BTreeMap::new(),
        format,
    };
    let fmt = cli.format.unwrap_or(Format::Json);
    let job = match &cli.command {
        Cmd::Replay { .. } => return Ok(None),
        Cmd::Coeffs { common, box_size, route } => {
            let nu = nu_of(common)?;
            JobSpec {
                n: Some(nu.len()),
                nu: Some(nu),
                route: Some(route.clone()),
                box_size: Some(*box_size),
                settings: settings(cfg, &common.set, &[])?,
                ..blank(CommandKind::Coeffs, fmt)
            }
        }
        Cmd::Eval { common, route, y, grid, tol, rel_tol } => {
            let nu = nu_of(common)?;
            let n = nu.len();
            let mut points: Vec<Vec<f64>> = y.iter().map(|p| parse::real_list(p)).collect::<Result<_, _>>()?;
            if !grid.is_empty() {
                if grid.len() != n {
                    return Err(format!("--grid needs one axis per coordinate ({n}), got {}", grid.len()));
                }
                let axes: Vec<Vec<f64>> = grid.iter().map(|g| parse::axis(g)).collect::<Result<_, _>>()?;
                points.extend(parse::grid(&axes));
            }
            if points.is_empty() {
                return Err("eval needs --y or --grid".into());
            }
            if let Some(p) = points.iter().find(|p| p.len() != n) {
                return Err(format!("point {p:?} has {} coordinates, expected {n}", p.len()));
            }
            JobSpec {
                n: Some(n),
                nu: Some(nu),
                route: Some(route.clone()),
                y: Some(points),
                settings: settings(cfg, &common.set, &[("series_tol", tol.as_ref()), ("rel_tol", rel_tol.as_ref())])?,
                ..blank(CommandKind::Eval, fmt)
            }
        }
        Cmd::Mellin { common, route, s, tau } => {
            let nu = nu_of(common)?;
            let n = nu.len();
            let points: Vec<Vec<Cx>> = s.iter().map(|p| parse::complex_list(p).map(cx)).collect::<Result<_, _>>()?;
            if points.is_empty() {
                return Err("mellin needs at least one --s".into());
            }
            if let Some(p) = points.iter().find(|p| p.len() != n) {
                return Err(format!("Mellin point with {} entries, expected {n}", p.len()));
            }
            JobSpec {
                n: Some(n),
                nu: Some(nu),
                route: Some(route.clone()),
                s: Some(points),
                settings: settings(cfg, &common.set, &[("tau", tau.as_ref())])?,
                ..blank(CommandKind::Mellin, fmt)
            }
        }
        Cmd::Verify { suite, check, seed } => {
            let (suite, checks) = if check.is_empty() {
                (Some(suite.clone().unwrap_or_else(|| "all".into())), None)
            } else {
                (None, Some(check.clone()))
            };
            JobSpec {
                suite,
                checks,
                seed: Some(seed.unwrap_or(whittaker_core::verify::DEFAULT_SEED)),
                ..blank(CommandKind::Verify, cli.format.unwrap_or(Format::Text))
            }
        }
        Cmd::Regularity { common, box_size } => {
            let nu = nu_of(common)?;
            JobSpec {
                n: Some(nu.len()),
                nu: Some(nu),
                box_size: Some(*box_size),
                settings: settings(cfg, &common.set, &[])?,
                ..blank(CommandKind::Regularity, fmt)
            }
        }
    };
    if job.format == Format::Text && job.command != CommandKind::Verify {
        return Err("--format text is only available for verify".into());
    }
    Ok(Some(job))
}

fn threads(cli: &Cli) -> Result<(), String> {
    let n = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var("WHITTAKER_THREADS") {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| format!("WHITTAKER_THREADS = '{v}' is not a count"))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err("thread count must be >= 1".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = threads(&cli) {
        return usage(e);
    }
    let job = match build(&cli) {
        Ok(Some(job)) => job,
        Ok(None) => {
            let Cmd::Replay { file } = &cli.command else { unreachable!() };
            match run::load_job(file) {
                Ok(job) => job,
                Err(e) => return usage(e),
            }
        }
        Err(e) => return usage(e),
    };
    let outcome = run::execute(&job);
    let text = match run::render(&job, &outcome) {
        Ok(t) => t,
        Err(e) => return usage(e),
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("writing {}: {e}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        return usage(e);
    }
    ExitCode::from(run::exit_code(&outcome))
}

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use whittaker_core::coefficients::{closed_form_table, coeffs_recurrence, TableJson};
use whittaker_core::mellin::{mellin_direct_many, t_base, t_recursive, MellinPoint};
use whittaker_core::quadrature::{w_tilde_integral_bessel, w_tilde_integral_exp};
use whittaker_core::rootdata::{is_regular, RegularityReport};
use whittaker_core::series::SeriesEngine;
use whittaker_core::specfun::bessel_k;
use whittaker_core::verify::{run_suite, suite_ids, CheckOutcome};
use whittaker_core::{Error, EvalReport, RadialPoint, SpectralParameter};

use crate::job::{CommandKind, Format, JobSpec};

pub enum Payload {
    Table(TableJson),
    Reports(Vec<EvalReport>),
    Checks(Vec<CheckOutcome>),
    Regularity(RegularityReport),
}

pub enum Outcome {
    Done(Payload),
    Usage(String),
    Numerical { name: &'static str, message: String },
}

impl From<Error> for Outcome {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            Outcome::Usage(e.to_string())
        } else {
            Outcome::Numerical { name: e.name(), message: e.to_string() }
        }
    }
}

pub fn exit_code(o: &Outcome) -> u8 {
    match o {
        Outcome::Done(Payload::Checks(c)) if c.iter().any(|c| !c.passed) => 2,
        Outcome::Done(_) => 0,
        Outcome::Usage(_) => 1,
        Outcome::Numerical { .. } => 2,
    }
}

pub fn load_job(path: &Path) -> Result<JobSpec, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let job = v.get_mut("job").map(Value::take).unwrap_or(v);
    serde_json::from_value(job).map_err(|e| format!("{}: not a job echo: {e}", path.display()))
}

fn need<'a, T>(v: &'a Option<T>, what: &str) -> Result<&'a T, Outcome> {
    v.as_ref().ok_or_else(|| Outcome::Usage(format!("job is missing '{what}'")))
}

fn spectral(job: &JobSpec) -> Result<SpectralParameter, Outcome> {
    let nu = need(&job.nu, "nu")?.iter().map(|&z| z.into()).collect();
    Ok(SpectralParameter::new(nu)?)
}

/// In-order collection; the first failing point decides the outcome.
fn first_error<T>(v: Vec<Result<T, Error>>) -> Result<Vec<T>, Outcome> {
    v.into_iter().map(|r| r.map_err(Outcome::from)).collect()
}

pub fn execute(job: &JobSpec) -> Outcome {
    match try_execute(job) {
        Ok(p) => Outcome::Done(p),
        Err(o) => o,
    }
}

fn try_execute(job: &JobSpec) -> Result<Payload, Outcome> {
    match job.command {
        CommandKind::Coeffs => {
            let nu = spectral(job)?;
            let b = *need(&job.box_size, "box")?;
            let t = match job.route.as_deref() {
                Some("recurrence") | None => coeffs_recurrence(&nu, b)?,
                Some("closed-form") => closed_form_table(&nu, b)?,
                Some(r) => return Err(Outcome::Usage(format!("unknown coefficient route '{r}'"))),
            };
            Ok(Payload::Table(t.to_json()))
        }
        CommandKind::Eval => eval(job),
        CommandKind::Mellin => mellin(job),
        CommandKind::Verify => {
            let ids = match (&job.suite, &job.checks) {
                (_, Some(ids)) => ids.clone(),
                (Some(s), None) => suite_ids(s)?,
                (None, None) => suite_ids("all")?,
            };
            Ok(Payload::Checks(run_suite(&ids, job.seed.unwrap_or(whittaker_core::verify::DEFAULT_SEED))?))
        }
        CommandKind::Regularity => {
            let nu = spectral(job)?;
            let tol = job.regularity_tol().map_err(Outcome::Usage)?;
            Ok(Payload::Regularity(is_regular(&nu, *need(&job.box_size, "box")?, tol)?))
        }
    }
}

fn eval(job: &JobSpec) -> Result<Payload, Outcome> {
    let nu = spectral(job)?;
    let points = need(&job.y, "y")?;
    let route = job.route.as_deref().unwrap_or("series");
    let reports = match route {
        "series" => {
            let engine = SeriesEngine::new(job.series_config().map_err(Outcome::Usage)?);
            first_error(points.par_iter().map(|y| engine.w_tilde(&nu.nu, y).map(|v| v.to_report(&nu.nu, y))).collect())?
        }
        "bessel" | "exp" => {
            let cfg = job.quadrature_config().map_err(Outcome::Usage)?;
            first_error(
                points
                    .par_iter()
                    .map(|y| {
                        let y = RadialPoint::new(y.clone())?;
                        if route == "bessel" {
                            w_tilde_integral_bessel(&nu, &y, &cfg)
                        } else {
                            w_tilde_integral_exp(&nu, &y, &cfg)
                        }
                    })
                    .collect(),
            )?
        }
        "bessel-base" => {
            if nu.n() != 1 {
                return Err(Outcome::Usage("route bessel-base is the rank-1 closed form; needs n = 1".into()));
            }
            first_error(
                points
                    .par_iter()
                    .map(|y| {
                        RadialPoint::new(y.clone())?;
                        let v = 2.0 * bessel_k(2.0 * nu.nu[0], Complex64::new(2.0 * PI * y[0], 0.0))?;
                        Ok(EvalReport {
                            route: "bessel-base".into(),
                            n: 1,
                            nu: vec![nu.nu[0].into()],
                            y: Some(y.clone()),
                            value: v.into(),
                            ..EvalReport::default()
                        })
                    })
                    .collect(),
            )?
        }
        r => return Err(Outcome::Usage(format!("unknown eval route '{r}'"))),
    };
    Ok(Payload::Reports(reports))
}

fn mellin(job: &JobSpec) -> Result<Payload, Outcome> {
    let nu = spectral(job)?;
    let points: Vec<MellinPoint> = need(&job.s, "s")?
        .iter()
        .map(|p| MellinPoint::new(p.iter().map(|&z| z.into()).collect()))
        .collect::<Result<_, _>>()?;
    let reports = match job.route.as_deref().unwrap_or("recursive") {
        "recursive" => {
            let cfg = job.contour_config().map_err(Outcome::Usage)?;
            first_error(points.par_iter().map(|p| t_recursive(&nu, p, &cfg)).collect())?
        }
        "direct" => mellin_direct_many(&nu, &points, &job.quadrature_config().map_err(Outcome::Usage)?)?,
        "base" => {
            if nu.n() != 1 {
                return Err(Outcome::Usage("route base is the rank-1 closed form; needs n = 1".into()));
            }
            first_error(
                points
                    .iter()
                    .map(|p| {
                        Ok(EvalReport {
                            route: "mellin-base".into(),
                            n: 1,
                            nu: vec![nu.nu[0].into()],
                            s: Some(vec![p.s[0].into()]),
                            value: t_base(p.s[0], nu.nu[0])?.into(),
                            ..EvalReport::default()
                        })
                    })
                    .collect(),
            )?
        }
        r => return Err(Outcome::Usage(format!("unknown Mellin route '{r}'"))),
    };
    Ok(Payload::Reports(reports))
}

#[derive(Serialize)]
struct ErrorBlock<'a> {
    name: &'a str,
    message: &'a str,
}

#[derive(Serialize)]
struct Document<'a> {
    job: &'a JobSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    all_passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    results: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorBlock<'a>>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

/// Text written to stdout or the output file. Usage failures produce no
/// document; they are returned as `Err` and reported on stderr.
pub fn render(job: &JobSpec, outcome: &Outcome) -> Result<String, String> {
    let payload = match outcome {
        Outcome::Usage(m) => return Err(m.clone()),
        Outcome::Numerical { name, message } => {
            if job.format == Format::Json {
                let doc = Document { job, all_passed: None, results: None, error: Some(ErrorBlock { name, message }) };
                return Ok(serde_json::to_string_pretty(&doc).unwrap() + "\n");
            }
            eprintln!("{message}");
            return Ok(String::new());
        }
        Outcome::Done(p) => p,
    };
    match job.format {
        Format::Json => {
            let (results, all_passed) = match payload {
                Payload::Table(t) => (to_value(t), None),
                Payload::Reports(r) => (to_value(r), None),
                Payload::Checks(c) => (to_value(c), Some(c.iter().all(|c| c.passed))),
                Payload::Regularity(r) => (to_value(r), None),
            };
            let doc = Document { job, all_passed, results: Some(results), error: None };
            Ok(serde_json::to_string_pretty(&doc).unwrap() + "\n")
        }
        Format::Csv => csv(job, payload),
        Format::Text => match payload {
            Payload::Checks(c) => {
                let mut s: String = c.iter().map(|c| c.line() + "\n").collect();
                let passed = c.iter().filter(|c| c.passed).count();
                s += &format!("{passed}/{} checks passed\n", c.len());
                Ok(s)
            }
            _ => Err("--format text is only available for verify".into()),
        },
    }
}

/// Shortest round-trip form; switches to exponent notation for tiny values.
fn f(x: f64) -> String {
    format!("{x:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(f).unwrap_or_default()
}

fn csv(job: &JobSpec, payload: &Payload) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let n = job.n.unwrap_or(0);
    let err = |e: csv::Error| e.to_string();
    match payload {
        Payload::Table(t) => {
            let mut head: Vec<String> = (1..=t.n).map(|i| format!("m_{i}")).collect();
            head.extend(["re".into(), "im".into()]);
            w.write_record(&head).map_err(err)?;
            for e in &t.entries {
                let mut row: Vec<String> = e.m.iter().map(|v| v.to_string()).collect();
                row.extend([f(e.re), f(e.im)]);
                w.write_record(&row).map_err(err)?;
            }
        }
        Payload::Reports(reports) => {
            let mellin = job.command == CommandKind::Mellin;
            let mut head: Vec<String> = if mellin {
                (1..=n).flat_map(|i| [format!("s_{i}_re"), format!("s_{i}_im")]).collect()
            } else {
                (1..=n).map(|i| format!("y_{i}")).collect()
            };
            head.extend(["re".into(), "im".into(), "error_estimate".into()]);
            w.write_record(&head).map_err(err)?;
            for r in reports {
                let mut row: Vec<String> = if mellin {
                    r.s.iter().flatten().flat_map(|z| [f(z.re), f(z.im)]).collect()
                } else {
                    r.y.iter().flatten().map(|&v| f(v)).collect()
                };
                row.extend([f(r.value.re), f(r.value.im), opt(r.error_estimate)]);
                w.write_record(&row).map_err(err)?;
            }
        }
        Payload::Checks(c) => {
            w.write_record(["id", "name", "passed", "residual", "tolerance", "elapsed_s", "time_limit_s", "detail"])
                .map_err(err)?;
            for c in c {
                w.write_record([
                    c.id.to_string(),
                    c.name.clone(),
                    c.passed.to_string(),
                    f(c.residual),
                    f(c.tolerance),
                    f(c.elapsed_s),
                    f(c.time_limit_s),
                    c.detail.clone(),
                ])
                .map_err(err)?;
            }
        }
        Payload::Regularity(r) => {
            w.write_record(["n", "box", "tol", "min_q", "min_lattice_distance", "regular"]).map_err(err)?;
            w.write_record([
                r.n.to_string(),
                r.box_size.to_string(),
                f(r.tol),
                f(r.min_q),
                f(r.min_lattice_distance),
                r.regular.to_string(),
            ])
            .map_err(err)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

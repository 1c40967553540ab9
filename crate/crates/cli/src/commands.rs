use crate::args::{CommandKind, Format};
use crate::config::CommandConfig;
use crate::report::{csv, Output, Report};
use crate::CliError;
use serde::Serialize;
use serde_json::{json, Value};
use wchernoff::affinity::{cauchy_bhattacharyya_half, cauchy_kl};
use wchernoff::expfam::{verify_identities, weighted_kl, IdentityStatus};
use wchernoff::testing::{
    convergence_table, likelihood_stats, mary_exponent, mary_optimal_loss, simulate, tail_bound, tail_frequency_mc,
    BinaryTestProblem, LossMethod, MAryProblem,
};
use wchernoff::{chernoff, AffinityCurve, Error, Model};

type Outcome = Result<(Value, Vec<String>), Error>;

pub(crate) fn dispatch(c: &CommandConfig) -> Result<Output, CliError> {
    if c.format == Format::Csv {
        let body = match c.command {
            CommandKind::Curve => curve_csv(c)?,
            CommandKind::Simulate => convergence_csv(c)?,
            _ => unreachable!("rejected by validate"),
        };
        return Ok(Output::Csv(body));
    }
    let (results, diagnostics) = match c.command {
        CommandKind::Chernoff => run_chernoff(c),
        CommandKind::Curve => run_curve(c),
        CommandKind::Divergence => run_divergence(c),
        CommandKind::Simulate => run_simulate(c),
        CommandKind::Mary => run_mary(c),
        CommandKind::Tailbound => run_tailbound(c),
        CommandKind::Identities => run_identities(c),
    }?;
    Ok(Output::Json(Box::new(Report::new(c, results, diagnostics))))
}

fn pair(c: &CommandConfig) -> (&Model, &Model) {
    (
        c.model_p.as_ref().expect("validated"),
        c.model_q.as_ref().expect("validated"),
    )
}

fn problem(c: &CommandConfig) -> Result<BinaryTestProblem, Error> {
    let (p, q) = pair(c);
    BinaryTestProblem::new(p.clone(), q.clone(), c.weight.clone(), c.n.unwrap_or(1))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialise")
}

fn run_chernoff(c: &CommandConfig) -> Outcome {
    let (p, q) = pair(c);
    Ok((to_value(&chernoff(p, q, &c.weight)?), vec![]))
}

#[derive(Serialize)]
struct CurveRow {
    alpha: f64,
    rho_w: f64,
    d_b_alpha: f64,
}

fn curve_rows(c: &CommandConfig) -> Result<Vec<CurveRow>, Error> {
    let (p, q) = pair(c);
    let curve = AffinityCurve::new(p, q, &c.weight)?;
    let last = (c.grid - 1) as f64;
    (0..c.grid)
        .map(|k| {
            let alpha = k as f64 / last;
            let f = curve.log_rho(alpha)?;
            Ok(CurveRow {
                alpha,
                rho_w: f.exp(),
                d_b_alpha: 0.0 - f,
            })
        })
        .collect()
}

fn run_curve(c: &CommandConfig) -> Outcome {
    let rows = curve_rows(c)?;
    let mut diagnostics = Vec::new();
    if rows.iter().any(|r| !r.rho_w.is_finite()) {
        diagnostics.push("rho_w is infinite at some grid points; reported as null".into());
    }
    Ok((json!({ "rows": rows }), diagnostics))
}

fn curve_csv(c: &CommandConfig) -> Result<String, Error> {
    let rows = curve_rows(c)?;
    Ok(csv(
        &["alpha", "rho_w", "d_b_alpha"],
        rows.iter().map(|r| vec![r.alpha, r.rho_w, r.d_b_alpha]),
    ))
}

/// A divergence that may legitimately be infinite.
fn optional(label: &str, r: Result<f64, Error>, diagnostics: &mut Vec<String>) -> Result<Option<f64>, Error> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Divergent(msg)) => {
            diagnostics.push(format!("{label} diverges: {msg}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn run_divergence(c: &CommandConfig) -> Outcome {
    let (p, q) = pair(c);
    let w = &c.weight;
    let alpha = c.alpha.unwrap_or(0.5);
    let mut diagnostics = Vec::new();
    let log_rho = AffinityCurve::new(p, q, w)?.log_rho(alpha)?;
    let kl_pq = optional("weighted KL(p || q)", weighted_kl(p, q, w), &mut diagnostics)?;
    let kl_qp = optional("weighted KL(q || p)", weighted_kl(q, p, w), &mut diagnostics)?;
    let mut results = json!({
        "alpha": alpha,
        "rho_w": log_rho.exp(),
        "d_b_alpha": -log_rho,
        "weighted_kl_pq": kl_pq,
        "weighted_kl_qp": kl_qp,
    });
    if let (Model::Cauchy { .. }, Model::Cauchy { .. }) = (p, q) {
        let rho = cauchy_bhattacharyya_half(p, q, w)?;
        results["cauchy"] = json!({
            "kl": cauchy_kl(p, q)?,
            "rho_half": rho,
            "d_b_half": -rho.ln(),
        });
    }
    Ok((results, diagnostics))
}

fn run_simulate(c: &CommandConfig) -> Outcome {
    Ok((to_value(&simulate(&problem(c)?, c.replicates, c.seed)?), vec![]))
}

/// Sample sizes `⌈N k / m⌉` for `k = 1..m`, `m = min(N, 10)`.
fn sizes(n: usize) -> Vec<usize> {
    let m = n.min(10);
    let mut out: Vec<usize> = (1..=m).map(|k| (n * k).div_ceil(m)).collect();
    out.dedup();
    out
}

fn convergence_csv(c: &CommandConfig) -> Result<String, Error> {
    let rows = convergence_table(&problem(c)?, &sizes(c.n.expect("validated")), c.replicates, c.seed)?;
    Ok(csv(
        &["n", "exponent_estimate", "d_c_w"],
        rows.iter().map(|r| vec![r.n as f64, r.exponent_estimate, r.d_c_w]),
    ))
}

fn run_mary(c: &CommandConfig) -> Outcome {
    let models = c.models.clone().expect("validated");
    let problem = MAryProblem::new(models, c.weight.clone(), c.priors.clone())?;
    let exponent = mary_exponent(&problem)?;
    let mut diagnostics = Vec::new();
    if exponent.degenerate {
        diagnostics.push("the closest pair is indistinguishable; C_M^w is not an error exponent".into());
    }
    let mut results = to_value(&exponent);
    if let Some(n) = c.n {
        let loss = match mary_optimal_loss(&problem, n, LossMethod::ExactEnumeration, 0, c.seed) {
            Err(Error::StateSpace { .. } | Error::Unsupported(_)) => {
                mary_optimal_loss(&problem, n, LossMethod::MonteCarlo, c.replicates, c.seed)?
            }
            other => other?,
        };
        results["loss"] = to_value(&loss);
    }
    Ok((results, diagnostics))
}

fn run_tailbound(c: &CommandConfig) -> Outcome {
    let pb = problem(c)?;
    let beta = c.beta.expect("validated");
    let stats = likelihood_stats(&pb)?;
    let bound = tail_bound(&pb, beta)?;
    let freq = tail_frequency_mc(&pb, beta, c.replicates, c.seed)?;
    let mut diagnostics = Vec::new();
    if bound < freq.frequency {
        diagnostics.push(format!(
            "bound {bound} is below the empirical frequency {}",
            freq.frequency
        ));
    }
    Ok((
        json!({
            "beta": beta,
            "beta_star": beta - stats.shift,
            "n": pb.n,
            "bound": bound,
            "empirical": freq,
            "stats": stats,
        }),
        diagnostics,
    ))
}

fn run_identities(c: &CommandConfig) -> Outcome {
    let (p, q) = pair(c);
    let report = verify_identities(p, q, &c.weight)?;
    let diagnostics = report
        .rows
        .iter()
        .filter(|r| r.status == IdentityStatus::Failed)
        .map(|r| format!("identity {} ({}) residual {:e}", r.id, r.name, r.residual))
        .collect();
    Ok((to_value(&report), diagnostics))
}

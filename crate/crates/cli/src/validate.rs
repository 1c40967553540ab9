use crate::args::{CommandKind, Format};
use crate::config::CommandConfig;
use wchernoff::expfam::ExpFamily1D;
use wchernoff::testing::{MAryProblem, MIN_REPLICATES};
use wchernoff::Model;

/// Problems that would stop `config` from running, in a stable order.
///
/// Weight admissibility is decided here, before any integral is attempted.
pub fn validate(config: &CommandConfig) -> Vec<String> {
    let mut out = Vec::new();
    let kind = config.command;
    if config.grid < 3 {
        out.push(format!("--grid must be at least 3, got {}", config.grid));
    }
    if config.format == Format::Csv && !matches!(kind, CommandKind::Curve | CommandKind::Simulate) {
        out.push(format!(
            "csv output is available for curve and simulate, not {}",
            kind.name()
        ));
    }
    if let Some(a) = config.alpha {
        if !(0.0..=1.0).contains(&a) {
            out.push(format!("--alpha must lie in [0, 1], got {a}"));
        }
    }
    if kind.is_pairwise() {
        match (&config.model_p, &config.model_q) {
            (Some(p), Some(q)) => pair_checks(config, p, q, &mut out),
            (p, q) => {
                if p.is_none() {
                    out.push("missing --model-p".into());
                }
                if q.is_none() {
                    out.push("missing --model-q".into());
                }
            }
        }
    } else {
        match &config.models {
            None => out.push("missing --models".into()),
            Some(models) => {
                for (i, m) in models.iter().enumerate() {
                    for (j, other) in models.iter().enumerate().skip(i + 1) {
                        if let Err(e) = config.weight.check_pair(m, other) {
                            out.push(format!("hypotheses {i} and {j}: {e}"));
                        }
                    }
                    if let Err(e) = config.weight.check_model(m) {
                        out.push(format!("hypothesis {i}: {e}"));
                    }
                }
                if let Err(e) = MAryProblem::new(models.clone(), config.weight.clone(), config.priors.clone()) {
                    out.push(e.to_string());
                }
            }
        }
    }
    if config.priors.is_some() && kind != CommandKind::Mary {
        out.push("--priors applies to mary only".into());
    }
    let needs_n = matches!(kind, CommandKind::Simulate | CommandKind::Tailbound);
    match config.n {
        Some(0) => out.push("--n must be at least 1".into()),
        None if needs_n => out.push(format!("{} needs --n", kind.name())),
        _ => {}
    }
    if (needs_n || kind == CommandKind::Mary) && config.replicates < MIN_REPLICATES {
        out.push(format!(
            "--replicates must be at least {MIN_REPLICATES}, got {}",
            config.replicates
        ));
    }
    if kind == CommandKind::Tailbound {
        match config.beta {
            None => out.push("tailbound needs --beta".into()),
            Some(b) if !b.is_finite() => out.push(format!("--beta must be finite, got {b}")),
            _ => {}
        }
    }
    out
}

fn pair_checks(config: &CommandConfig, p: &Model, q: &Model, out: &mut Vec<String>) {
    let w = &config.weight;
    if let Err(e) = w.check_pair(p, q) {
        out.push(e.to_string());
        return;
    }
    for (name, m) in [("--model-p", p), ("--model-q", q)] {
        if let Err(e) = w.check_model(m) {
            out.push(format!("{name}: {e}"));
        }
    }
    if config.command == CommandKind::Identities {
        if let Err(e) = ExpFamily1D::embed(p, q, w) {
            out.push(e.to_string());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wchernoff::Weight;

    fn pair(kind: CommandKind, p: Model, q: Model, w: Weight) -> CommandConfig {
        CommandConfig {
            model_p: Some(p),
            model_q: Some(q),
            weight: w,
            ..CommandConfig::new(kind)
        }
    }

    #[test]
    fn exponential_tilt_beyond_rates() {
        let c = pair(
            CommandKind::Chernoff,
            Model::exponential(2.0).unwrap(),
            Model::exponential(1.0).unwrap(),
            Weight::tilt(1.5).unwrap(),
        );
        let d = validate(&c);
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("weight not integrable under both hypotheses"), "{d:?}");
    }

    #[test]
    fn cauchy_tilt() {
        let c = pair(
            CommandKind::Divergence,
            Model::cauchy(0.0, 1.0).unwrap(),
            Model::cauchy(2.0, 1.0).unwrap(),
            Weight::tilt(0.1).unwrap(),
        );
        let d = validate(&c);
        assert!(d.iter().any(|s| s.contains("not integrable")), "{d:?}");
    }

    #[test]
    fn well_formed_is_clean() {
        let c = pair(
            CommandKind::Chernoff,
            Model::poisson(2.0).unwrap(),
            Model::poisson(1.0).unwrap(),
            Weight::Const,
        );
        assert!(validate(&c).is_empty());
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn grid_and_required_options() {
        let mut c = pair(
            CommandKind::Simulate,
            Model::poisson(2.0).unwrap(),
            Model::poisson(1.0).unwrap(),
            Weight::Const,
        );
        c.grid = 2;
        let d = validate(&c);
        assert!(d.iter().any(|s| s.contains("--grid")));
        assert!(d.iter().any(|s| s.contains("needs --n")));
        let d = validate(&CommandConfig::new(CommandKind::Mary));
        assert_eq!(d, vec!["missing --models".to_string()]);
    }

    #[test]
    fn identities_need_a_shared_family() {
        let c = pair(
            CommandKind::Identities,
            Model::poisson(2.0).unwrap(),
            Model::poisson(1.0).unwrap(),
            Weight::Const,
        );
        assert!(validate(&c).is_empty());
        let c = pair(
            CommandKind::Identities,
            Model::categorical(vec![0.5, 0.5]).unwrap(),
            Model::categorical(vec![0.2, 0.8]).unwrap(),
            Weight::Const,
        );
        assert_eq!(validate(&c).len(), 1);
    }
}

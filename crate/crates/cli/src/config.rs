use crate::args::{CommandKind, Format, Options};
use crate::CliError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use wchernoff::{Model, Weight};

/// A fully parsed command: every JSON input has been read and decoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandConfig {
    pub command: CommandKind,
    pub model_p: Option<Model>,
    pub model_q: Option<Model>,
    pub models: Option<Vec<Model>>,
    pub weight: Weight,
    pub alpha: Option<f64>,
    pub grid: usize,
    pub n: Option<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub beta: Option<f64>,
    pub priors: Option<Vec<f64>>,
    pub format: Format,
}

impl CommandConfig {
    pub fn new(command: CommandKind) -> Self {
        CommandConfig {
            command,
            model_p: None,
            model_q: None,
            models: None,
            weight: Weight::Const,
            alpha: None,
            grid: 101,
            n: None,
            replicates: 10_000,
            seed: 0,
            beta: None,
            priors: None,
            format: Format::Json,
        }
    }

    pub fn from_options(command: CommandKind, o: &Options) -> Result<Self, CliError> {
        Ok(CommandConfig {
            command,
            model_p: o.model_p.as_deref().map(|s| decode("--model-p", s)).transpose()?,
            model_q: o.model_q.as_deref().map(|s| decode("--model-q", s)).transpose()?,
            models: o.models.as_deref().map(|s| decode("--models", s)).transpose()?,
            weight: o
                .weight
                .as_deref()
                .map(|s| decode("--weight", s))
                .transpose()?
                .unwrap_or(Weight::Const),
            alpha: o.alpha,
            grid: o.grid,
            n: o.n,
            replicates: o.replicates,
            seed: o.seed,
            beta: o.beta,
            priors: o.priors.as_deref().map(parse_priors).transpose()?,
            format: o.format,
        })
    }
}

/// Inline JSON when the argument starts with `{` or `[`, a file path otherwise.
fn decode<T: DeserializeOwned>(flag: &str, raw: &str) -> Result<T, CliError> {
    let trimmed = raw.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        raw.to_owned()
    } else {
        fs::read_to_string(raw).map_err(|e| CliError::Io(format!("{flag}: cannot read {raw}: {e}")))?
    };
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Json {
        flag: flag.to_owned(),
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn parse_priors(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .enumerate()
        .map(|(i, s)| {
            s.trim().parse::<f64>().map_err(|e| CliError::Json {
                flag: "--priors".into(),
                path: format!("[{i}]"),
                message: format!("{s:?}: {e}"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_and_pointer() {
        let m: Model = decode("--model-p", r#"{"family":"poisson","lambda":2}"#).unwrap();
        assert_eq!(m, Model::poisson(2.0).unwrap());
        let err = decode::<Vec<Model>>(
            "--models",
            r#"[{"family":"poisson","lambda":1},{"family":"poisson","lambda":"x"}]"#,
        )
        .unwrap_err();
        match err {
            CliError::Json { path, .. } => assert!(path.starts_with("[1]"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn priors_list() {
        assert_eq!(parse_priors("0.25, 0.75").unwrap(), vec![0.25, 0.75]);
        assert!(matches!(parse_priors("0.5,x"), Err(CliError::Json { path, .. }) if path == "[1]"));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            decode::<Model>("--model-q", "/nonexistent/p.json"),
            Err(CliError::Io(_))
        ));
    }
}

use std::path::Path;

use sccp_core::dsl::{parse_bytes, Diagnostic, ParseOutcome};
use sccp_core::ir::Program;
use sccp_core::prostate::{prostate_source, Policy, ProstateParams, Variant};
use sha2::{Digest, Sha256};

use crate::cli::{Builtin, ModelArgs};
use crate::error::CliError;

/// Model text with its provenance, ready to parse.
pub struct ModelSource {
    /// File path or `builtin:prostate:<policy>:<variant>`.
    pub name: String,
    pub bytes: Vec<u8>,
    pub overrides: Vec<(String, f64)>,
}

impl ModelSource {
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }

    pub fn parse(&self) -> ParseOutcome {
        parse_bytes(&self.bytes, &self.overrides)
    }

    /// Parses, printing every diagnostic to standard error; errors make the
    /// model unusable.
    pub fn program(&self) -> Result<Program, CliError> {
        let outcome = self.parse();
        self.report(&outcome.diagnostics);
        let n = outcome.errors().count();
        outcome
            .program
            .ok_or_else(|| CliError::Model(format!("{}: {n} error(s)", self.name)))
    }

    pub fn report(&self, diags: &[Diagnostic]) {
        for d in diags {
            eprintln!("{}", d.render(&self.name));
        }
    }
}

pub fn parse_override(s: &str) -> Result<(String, f64), CliError> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--param expects NAME=VALUE, got `{s}`")))?;
    let name = name.trim();
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("--param {name}: `{value}` is not a number")))?;
    if name.is_empty() {
        return Err(CliError::Usage(format!(
            "--param expects NAME=VALUE, got `{s}`"
        )));
    }
    Ok((name.to_string(), value))
}

pub fn load(m: &ModelArgs) -> Result<ModelSource, CliError> {
    let overrides = m
        .params
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<_>, _>>()?;
    match (&m.file, m.builtin) {
        (Some(path), None) => Ok(ModelSource {
            name: path.display().to_string(),
            bytes: read(path)?,
            overrides,
        }),
        (None, Some(Builtin::Prostate)) => {
            let policy: Policy = m
                .policy
                .parse()
                .map_err(|e| CliError::Usage(format!("--policy: {e}")))?;
            let variant: Variant = m
                .variant
                .parse()
                .map_err(|e| CliError::Usage(format!("--variant: {e}")))?;
            let text = prostate_source(&ProstateParams::default(), policy, variant);
            Ok(ModelSource {
                name: format!("builtin:prostate:{}:{}", policy.name(), variant.name()),
                bytes: text.into_bytes(),
                overrides,
            })
        }
        _ => Err(CliError::Usage(
            "give either a model file or --builtin".to_string(),
        )),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

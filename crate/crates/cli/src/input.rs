//! Spec sources: `--p/--vectors` on the command line or a TOML spec file.

use std::path::Path;

use mggs::GgsSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Current spec-file format version.
pub const SPEC_FORMAT: u32 = 1;

/// On-disk spec:
///
/// ```toml
/// format = 1
/// label = "Gupta-Sidki"
/// p = 3
/// vectors = [[1, 2]]
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub format: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub p: u32,
    pub vectors: Vec<Vec<i64>>,
}

/// A validated spec plus any warnings raised while reading it.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub spec: GgsSpec,
    pub label: Option<String>,
    pub warnings: Vec<String>,
}

/// Reduces entries into `0..p`, warning about each one that changed.
fn reduce(p: u32, rows: Vec<Vec<i64>>, warnings: &mut Vec<String>) -> Result<Vec<Vec<u32>>, CliError> {
    if p == 0 {
        return Err(CliError::Usage("p must be positive".into()));
    }
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, x)| {
                    let r = x.rem_euclid(p as i64) as u32;
                    if r as i64 != x {
                        warnings.push(format!(
                            "vector {} entry {}: {x} reduced to {r} modulo {p}",
                            i + 1,
                            j + 1
                        ));
                    }
                    r
                })
                .collect()
        })
        .collect())
}

/// Parses `"1,2;0,1"`: rows separated by `;`, entries by `,`.
pub fn parse_vectors(text: &str) -> Result<Vec<Vec<i64>>, CliError> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<i64>()
                        .map_err(|_| CliError::Usage(format!("--vectors: `{}` is not an integer", x.trim())))
                })
                .collect()
        })
        .collect()
}

pub fn from_flags(p: u32, vectors: &str) -> Result<LoadedSpec, CliError> {
    let mut warnings = Vec::new();
    let rows = reduce(p, parse_vectors(vectors)?, &mut warnings)?;
    Ok(LoadedSpec {
        spec: GgsSpec::validate(p, rows)?,
        label: None,
        warnings,
    })
}

pub fn parse_spec_file(text: &str) -> Result<LoadedSpec, CliError> {
    let file: SpecFile = toml::from_str(text).map_err(|e| CliError::Usage(format!("spec file: {}", e.message())))?;
    if file.format != SPEC_FORMAT {
        return Err(CliError::Usage(format!(
            "spec file: field `format` is {}, only {SPEC_FORMAT} is supported",
            file.format
        )));
    }
    let mut warnings = Vec::new();
    let rows = reduce(file.p, file.vectors, &mut warnings)?;
    Ok(LoadedSpec {
        spec: GgsSpec::validate(file.p, rows)?,
        label: file.label,
        warnings,
    })
}

pub fn from_file(path: &Path) -> Result<LoadedSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_spec_file(&text)
}

/// Renders a spec as a spec file.
pub fn to_spec_file(spec: &GgsSpec, label: Option<String>) -> String {
    let file = SpecFile {
        format: SPEC_FORMAT,
        label,
        p: spec.p(),
        vectors: spec
            .vectors()
            .iter()
            .map(|v| v.iter().map(|&x| x as i64).collect())
            .collect(),
    };
    toml::to_string(&file).expect("spec files always serialize")
}

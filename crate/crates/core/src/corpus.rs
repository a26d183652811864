//! Corpus runner: loads a manifest of proof files grouped into tiers,
//! checks each file against an accumulating environment, and compares the
//! outcome with the file's expectation (must check, or must be rejected
//! with an exact diagnostic code).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::kernel::{Diagnostic, DiagnosticCode, Environment};
use crate::parser::{parse_module, resolve, ResolveErrorKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    MustCheck,
    MustFailWith(DiagnosticCode),
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::MustCheck => write!(f, "check"),
            Expectation::MustFailWith(code) => write!(f, "fail:{}", code),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ManifestEntry {
    pub tier: String,
    pub path: String,
    pub expectation: Expectation,
    pub label: Option<String>,
}

/// The parsed manifest: ordered file list with expectations, plus the
/// directory all file paths are relative to.
#[derive(Clone, Debug)]
pub struct CorpusManifest {
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug)]
pub enum CorpusError {
    Io { path: PathBuf, message: String },
    Manifest { line: usize, message: String },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::Io { path, message } => {
                write!(f, "{}: {}", path.display(), message)
            }
            CorpusError::Manifest { line, message } => {
                write!(f, "manifest line {}: {}", line, message)
            }
        }
    }
}

impl std::error::Error for CorpusError {}

impl CorpusManifest {
    /// Parses a manifest file. Each non-comment line reads
    /// `tier file expectation [label ...]` where the expectation is
    /// `check` or `fail:Code`.
    pub fn load(path: &Path) -> Result<CorpusManifest, CorpusError> {
        let text = fs::read_to_string(path).map_err(|e| CorpusError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let root = path
            .parent()
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| PathBuf::from("."));
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let tier = parts.next().unwrap().to_string();
            let file = parts.next().ok_or(CorpusError::Manifest {
                line: lineno + 1,
                message: "missing file column".into(),
            })?;
            let expectation_text = parts.next().ok_or(CorpusError::Manifest {
                line: lineno + 1,
                message: "missing expectation column".into(),
            })?;
            let expectation = if expectation_text == "check" {
                Expectation::MustCheck
            } else if let Some(code) = expectation_text.strip_prefix("fail:") {
                match DiagnosticCode::parse(code) {
                    Some(code) => Expectation::MustFailWith(code),
                    None => {
                        return Err(CorpusError::Manifest {
                            line: lineno + 1,
                            message: format!("unknown diagnostic code '{}'", code),
                        })
                    }
                }
            } else {
                return Err(CorpusError::Manifest {
                    line: lineno + 1,
                    message: format!(
                        "bad expectation '{}' (want 'check' or 'fail:Code')",
                        expectation_text
                    ),
                });
            };
            let rest: Vec<&str> = parts.collect();
            let label = if rest.is_empty() {
                None
            } else {
                Some(rest.join(" "))
            };
            entries.push(ManifestEntry {
                tier,
                path: file.to_string(),
                expectation,
                label,
            });
        }
        Ok(CorpusManifest { root, entries })
    }

    pub fn tiers(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.tier) {
                out.push(e.tier.clone());
            }
        }
        out
    }
}

/// How a corpus file actually behaved.
#[derive(Clone, Debug)]
pub enum Outcome {
    Checked,
    Rejected { code: DiagnosticCode, message: String },
    ParseFailed { message: String },
}

impl Outcome {
    pub fn meets(&self, expectation: Expectation) -> bool {
        match (self, expectation) {
            (Outcome::Checked, Expectation::MustCheck) => true,
            (Outcome::Rejected { code, .. }, Expectation::MustFailWith(expected)) => {
                *code == expected
            }
            _ => false,
        }
    }

    pub fn short(&self) -> String {
        match self {
            Outcome::Checked => "checked".into(),
            Outcome::Rejected { code, .. } => format!("rejected:{}", code),
            Outcome::ParseFailed { .. } => "parse-error".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FileReport {
    pub tier: String,
    pub path: String,
    pub expectation: Expectation,
    pub outcome: Outcome,
    pub passed: bool,
    pub millis: u128,
}

#[derive(Clone, Debug, Default)]
pub struct CorpusReport {
    pub files: Vec<FileReport>,
}

impl CorpusReport {
    pub fn all_passed(&self) -> bool {
        self.files.iter().all(|f| f.passed)
    }

    /// Deterministic JSON rendering: one array, fixed field order, no
    /// timing data.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[");
        for (i, file) in self.files.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("{\"tier\":");
            push_json_string(&mut out, &file.tier);
            out.push_str(",\"file\":");
            push_json_string(&mut out, &file.path);
            out.push_str(",\"expectation\":");
            push_json_string(&mut out, &file.expectation.to_string());
            out.push_str(",\"outcome\":");
            push_json_string(&mut out, &file.outcome.short());
            out.push_str(",\"passed\":");
            out.push_str(if file.passed { "true" } else { "false" });
            out.push('}');
        }
        out.push(']');
        out
    }
}

pub fn push_json_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                out.push_str(&format!("\\u{:04x}", c as u32));
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Checks one `.coh` file against `env`. On success the returned
/// environment contains the file's declarations; a rejected file leaves
/// the environment untouched.
pub fn check_file(env: &Environment, path: &Path, fuel: u64) -> (Outcome, Option<Environment>) {
    let source = match fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            return (
                Outcome::ParseFailed {
                    message: format!("cannot read {}: {}", path.display(), e),
                },
                None,
            )
        }
    };
    let file_name = path.to_string_lossy().to_string();
    let decls = match parse_module(&source, &file_name) {
        Ok(d) => d,
        Err(e) => {
            return (
                Outcome::ParseFailed {
                    message: e.to_string(),
                },
                None,
            )
        }
    };
    let located = match resolve(&decls, &|name| env.contains(name)) {
        Ok(l) => l,
        Err(e) => {
            let code = match e.kind {
                ResolveErrorKind::Scope { .. } => DiagnosticCode::ScopeError,
                ResolveErrorKind::Duplicate { .. } => DiagnosticCode::DuplicateName,
            };
            return (
                Outcome::Rejected {
                    code,
                    message: e.to_string(),
                },
                None,
            );
        }
    };
    let mut extended = env.clone();
    for located_decl in &located {
        if let Err(diag) = extended.declare(&located_decl.decl, fuel) {
            let diag: Diagnostic = diag.with_span(located_decl.span.clone());
            return (
                Outcome::Rejected {
                    code: diag.code,
                    message: diag.to_string(),
                },
                None,
            );
        }
    }
    (Outcome::Checked, Some(extended))
}

/// Runs the corpus in manifest order. With a tier filter, files outside
/// the tier still build the environment (they are dependencies of later
/// files) but only failing prerequisites are reported.
pub fn run_corpus(
    manifest: &CorpusManifest,
    fuel: u64,
    tier_filter: Option<&str>,
) -> CorpusReport {
    let mut env = Environment::new();
    let mut report = CorpusReport::default();

    for entry in &manifest.entries {
        let selected = tier_filter.map(|t| t == entry.tier).unwrap_or(true);
        if !selected && entry.expectation != Expectation::MustCheck {
            // Expected failures never extend the environment, so they can
            // be skipped entirely outside the selected tier.
            continue;
        }
        let path = manifest.root.join(&entry.path);
        let start = Instant::now();
        let (outcome, extended) = check_file(&env, &path, fuel);
        let millis = start.elapsed().as_millis();
        if let Some(new_env) = extended {
            env = new_env;
        }
        let passed = outcome.meets(entry.expectation);
        if selected || !passed {
            report.files.push(FileReport {
                tier: entry.tier.clone(),
                path: entry.path.clone(),
                expectation: entry.expectation,
                outcome,
                passed,
                millis,
            });
        }
    }
    report
}

/// Builds the environment from every must-check file of the listed tiers
/// in manifest order, failing fast. Used by embedding tests that need a
/// loaded prelude.
pub fn build_environment(
    manifest: &CorpusManifest,
    fuel: u64,
    tiers: &[&str],
) -> Result<Environment, String> {
    let mut env = Environment::new();
    for entry in &manifest.entries {
        if !tiers.iter().any(|t| *t == entry.tier) {
            continue;
        }
        if entry.expectation != Expectation::MustCheck {
            continue;
        }
        let path = manifest.root.join(&entry.path);
        let (outcome, extended) = check_file(&env, &path, fuel);
        match extended {
            Some(new_env) => env = new_env,
            None => {
                return Err(format!(
                    "{}: expected to check, got {}: {}",
                    entry.path,
                    outcome.short(),
                    match outcome {
                        Outcome::Rejected { message, .. } => message,
                        Outcome::ParseFailed { message } => message,
                        Outcome::Checked => String::new(),
                    }
                ))
            }
        }
    }
    Ok(env)
}

/// A corpus target: file, human label, and its expectation.
#[derive(Clone, Debug)]
pub struct TargetRecord {
    pub tier: String,
    pub file: String,
    pub label: String,
    pub expectation: Expectation,
}

/// Pure projection of the manifest into target records.
pub fn list_targets(manifest: &CorpusManifest) -> Vec<TargetRecord> {
    manifest
        .entries
        .iter()
        .map(|e| TargetRecord {
            tier: e.tier.clone(),
            file: e.path.clone(),
            label: e.label.clone().unwrap_or_default(),
            expectation: e.expectation,
        })
        .collect()
}

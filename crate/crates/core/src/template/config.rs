use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use thiserror::Error;

use super::{Attribute, Subject, Template};

pub const TEMPLATES_FILE: &str = "templates.json";
pub const SUBJECTS_FILE: &str = "subjects.json";
pub const ATTRIBUTES_FILE: &str = "attributes.json";

/// Names of the configurations shipped with the crate.
pub const BUNDLED_CONFIGS: &[&str] = &["gender-occupation", "nationality", "ethnicity", "religion"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("no {0}")]
    Empty(&'static str),
    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("invalid {kind} id {id:?}: ids must be non-empty and contain no '|' or whitespace")]
    InvalidId { kind: &'static str, id: String },
    #[error("template {template:?}: {reason}")]
    InvalidTemplate { template: String, reason: String },
    #[error("subject {subject:?} has no {form} form required by template {template:?}")]
    MissingForm {
        subject: String,
        template: String,
        form: super::SlotForm,
    },
    #[error("subject {0:?} has an empty class label")]
    EmptyClassLabel(String),
    #[error("attribute {id:?}: {reason}")]
    InvalidAttribute { id: String, reason: &'static str },
    #[error("unknown bundled config {0:?}")]
    UnknownBundled(String),
}

/// A validated, immutable probe configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub name: String,
    pub templates: Vec<Template>,
    pub subjects: Vec<Subject>,
    pub attributes: Vec<Attribute>,
}

impl ProbeConfig {
    /// Validates the lists and sorts each by id.
    pub fn new(
        name: impl Into<String>,
        mut templates: Vec<Template>,
        mut subjects: Vec<Subject>,
        mut attributes: Vec<Attribute>,
    ) -> Result<Self, ConfigError> {
        if templates.is_empty() {
            return Err(ConfigError::Empty("templates"));
        }
        if subjects.is_empty() {
            return Err(ConfigError::Empty("subjects"));
        }
        if attributes.is_empty() {
            return Err(ConfigError::Empty("attributes"));
        }
        check_ids("template", templates.iter().map(|t| t.id.as_str()))?;
        check_ids("subject", subjects.iter().map(|s| s.id.as_str()))?;
        check_ids("attribute", attributes.iter().map(|a| a.id.as_str()))?;

        for t in &templates {
            validate_template(t)?;
        }
        for s in &subjects {
            if s.class_label.trim().is_empty() {
                return Err(ConfigError::EmptyClassLabel(s.id.clone()));
            }
        }
        for a in &attributes {
            if a.positive_form.trim().is_empty() || a.negated_form.trim().is_empty() {
                return Err(ConfigError::InvalidAttribute {
                    id: a.id.clone(),
                    reason: "surface forms must be non-empty",
                });
            }
            if a.positive_form == a.negated_form {
                return Err(ConfigError::InvalidAttribute {
                    id: a.id.clone(),
                    reason: "positive and negated forms must differ",
                });
            }
        }
        for t in templates.iter().filter(|t| !t.skip_missing_forms) {
            if let Some(s) = subjects.iter().find(|s| s.form(t.subject_form).is_none()) {
                return Err(ConfigError::MissingForm {
                    subject: s.id.clone(),
                    template: t.id.clone(),
                    form: t.subject_form,
                });
            }
        }

        templates.sort_by(|a, b| a.id.cmp(&b.id));
        subjects.sort_by(|a, b| a.id.cmp(&b.id));
        attributes.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(ProbeConfig {
            name: name.into(),
            templates,
            subjects,
            attributes,
        })
    }

    pub fn subject(&self, id: &str) -> Option<&Subject> {
        self.subjects
            .binary_search_by(|s| s.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.subjects[i])
    }

    pub fn attribute(&self, id: &str) -> Option<&Attribute> {
        self.attributes
            .binary_search_by(|a| a.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.attributes[i])
    }
}

fn check_ids<'a>(
    kind: &'static str,
    ids: impl Iterator<Item = &'a str>,
) -> Result<(), ConfigError> {
    let mut seen = HashSet::new();
    for id in ids {
        if id.is_empty() || id.contains('|') || id.chars().any(char::is_whitespace) {
            return Err(ConfigError::InvalidId {
                kind,
                id: id.to_string(),
            });
        }
        if !seen.insert(id) {
            return Err(ConfigError::DuplicateId {
                kind,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}

fn validate_template(t: &Template) -> Result<(), ConfigError> {
    let bad = |reason: String| ConfigError::InvalidTemplate {
        template: t.id.clone(),
        reason,
    };
    for slot in ["[x1]", "[x2]"] {
        let n = t.context_pattern.matches(slot).count();
        if n != 1 {
            return Err(bad(format!(
                "context must contain {slot} exactly once, found {n}"
            )));
        }
    }
    if t.mode.supports(super::Mode::Qa) {
        let q = t
            .question_pattern
            .as_deref()
            .ok_or_else(|| bad("qa templates need a question pattern".into()))?;
        let n = q.matches("[a]").count();
        if n != 1 {
            return Err(bad(format!(
                "question must contain [a] exactly once, found {n}"
            )));
        }
    }
    Ok(())
}

fn read_list<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_list(path, &text)
}

fn parse_list<T: DeserializeOwned>(path: &Path, text: &str) -> Result<Vec<T>, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Loads `templates.json`, `subjects.json` and `attributes.json` from `dir`.
pub fn load_probe_config(dir: impl AsRef<Path>) -> Result<ProbeConfig, ConfigError> {
    let dir = dir.as_ref();
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    ProbeConfig::new(
        name,
        read_list(&dir.join(TEMPLATES_FILE))?,
        read_list(&dir.join(SUBJECTS_FILE))?,
        read_list(&dir.join(ATTRIBUTES_FILE))?,
    )
}

macro_rules! bundled_files {
    ($name:literal) => {
        (
            include_str!(concat!("../../data/", $name, "/templates.json")),
            include_str!(concat!("../../data/", $name, "/subjects.json")),
            include_str!(concat!("../../data/", $name, "/attributes.json")),
        )
    };
}

/// Loads one of the [`BUNDLED_CONFIGS`] compiled into the crate.
pub fn bundled(name: &str) -> Result<ProbeConfig, ConfigError> {
    let (templates, subjects, attributes) = match name {
        "gender-occupation" => bundled_files!("gender-occupation"),
        "nationality" => bundled_files!("nationality"),
        "ethnicity" => bundled_files!("ethnicity"),
        "religion" => bundled_files!("religion"),
        _ => return Err(ConfigError::UnknownBundled(name.to_string())),
    };
    let base = Path::new("bundled").join(name);
    ProbeConfig::new(
        name,
        parse_list(&base.join(TEMPLATES_FILE), templates)?,
        parse_list(&base.join(SUBJECTS_FILE), subjects)?,
        parse_list(&base.join(ATTRIBUTES_FILE), attributes)?,
    )
}

//! Probe templates and the generator that renders them.

mod config;
mod generate;
mod grammar;
mod id;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use config::{bundled, load_probe_config, ConfigError, ProbeConfig, BUNDLED_CONFIGS};
pub use generate::{
    generate, plan, write_dataset, write_dataset_parallel, GenerationStats, Generator,
};
pub use grammar::grammar_fix;
pub use id::{ExampleId, ExampleIdError};

/// Rendering target: extractive QA (paragraph + question) or masked LM
/// (paragraph + `[MASK] <attribute>.` cloze suffix).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Qa,
    MaskedLm,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Qa => "qa",
            Mode::MaskedLm => "masked-lm",
        })
    }
}

/// Which modes a template can be rendered in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemplateMode {
    Qa,
    MaskedLm,
    #[default]
    Both,
}

impl TemplateMode {
    pub fn supports(self, mode: Mode) -> bool {
        matches!(
            (self, mode),
            (TemplateMode::Both, _)
                | (TemplateMode::Qa, Mode::Qa)
                | (TemplateMode::MaskedLm, Mode::MaskedLm)
        )
    }
}

/// Surface form a template slot accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotForm {
    PersonalName,
    CountryName,
    Demonym,
    GroupAdjective,
}

impl fmt::Display for SlotForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlotForm::PersonalName => "personal-name",
            SlotForm::CountryName => "country-name",
            SlotForm::Demonym => "demonym",
            SlotForm::GroupAdjective => "group-adjective",
        })
    }
}

/// Which subject pairs a template admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassPairing {
    /// The two subjects must carry different class labels.
    CrossClassOnly,
    /// Any two distinct subjects.
    AnyDistinct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub id: String,
    /// Context with `[x1]` and `[x2]`, each exactly once.
    pub context_pattern: String,
    /// Question with `[a]` exactly once; required unless the template is
    /// masked-LM only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_pattern: Option<String>,
    #[serde(default)]
    pub mode: TemplateMode,
    pub subject_form: SlotForm,
    pub class_pairing: ClassPairing,
    /// Skip subjects lacking `subject_form` instead of rejecting the config.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub skip_missing_forms: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subject {
    pub id: String,
    pub surface_forms: BTreeMap<SlotForm, String>,
    pub class_label: String,
    /// Subject set (X1 / X2) the subject belongs to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_count_hint: Option<u32>,
}

impl Subject {
    pub fn form(&self, form: SlotForm) -> Option<&str> {
        self.surface_forms.get(&form).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub id: String,
    /// The attribute `a`, e.g. "was a hunter".
    pub positive_form: String,
    /// Its negation `a-bar`, e.g. "can never be a hunter".
    pub negated_form: String,
    pub category: String,
}

impl Attribute {
    pub fn form(&self, polarity: Polarity) -> &str {
        match polarity {
            Polarity::Positive => &self.positive_form,
            Polarity::Negated => &self.negated_form,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    Positive,
    Negated,
}

impl Polarity {
    pub const ALL: [Polarity; 2] = [Polarity::Positive, Polarity::Negated];

    /// Tag used in the canonical example id.
    pub fn tag(self) -> &'static str {
        match self {
            Polarity::Positive => "pos",
            Polarity::Negated => "neg",
        }
    }

    pub fn flipped(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negated,
            Polarity::Negated => Polarity::Positive,
        }
    }
}

/// One rendered (paragraph, question) instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeExample {
    pub example_id: String,
    pub template_id: String,
    /// Subject mentioned first in the paragraph.
    pub subject1_id: String,
    pub subject2_id: String,
    pub attribute_id: String,
    pub polarity: Polarity,
    pub paragraph: String,
    pub question: String,
}

impl ProbeExample {
    pub fn id(&self) -> ExampleId {
        ExampleId {
            template_id: self.template_id.clone(),
            subject1_id: self.subject1_id.clone(),
            subject2_id: self.subject2_id.clone(),
            attribute_id: self.attribute_id.clone(),
            polarity: self.polarity,
        }
    }
}

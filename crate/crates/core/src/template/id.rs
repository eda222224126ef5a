use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::Polarity;

/// Parsed form of the canonical example id
/// `t:{template}|s1:{subject1}|s2:{subject2}|a:{attribute}|{pos|neg}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExampleId {
    pub template_id: String,
    pub subject1_id: String,
    pub subject2_id: String,
    pub attribute_id: String,
    pub polarity: Polarity,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed example id {id:?}: {reason}")]
pub struct ExampleIdError {
    pub id: String,
    pub reason: &'static str,
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t:{}|s1:{}|s2:{}|a:{}|{}",
            self.template_id,
            self.subject1_id,
            self.subject2_id,
            self.attribute_id,
            self.polarity.tag()
        )
    }
}

impl FromStr for ExampleId {
    type Err = ExampleIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| ExampleIdError {
            id: s.to_string(),
            reason,
        };
        let parts: Vec<&str> = s.split('|').collect();
        if parts.len() != 5 {
            return Err(err("expected 5 '|'-separated fields"));
        }
        let take = |raw: &str, prefix: &str, reason: &'static str| {
            raw.strip_prefix(prefix)
                .filter(|v| !v.is_empty())
                .map(str::to_string)
                .ok_or_else(|| err(reason))
        };
        let template_id = take(parts[0], "t:", "missing t: field")?;
        let subject1_id = take(parts[1], "s1:", "missing s1: field")?;
        let subject2_id = take(parts[2], "s2:", "missing s2: field")?;
        let attribute_id = take(parts[3], "a:", "missing a: field")?;
        let polarity = match parts[4] {
            "pos" => Polarity::Positive,
            "neg" => Polarity::Negated,
            _ => return Err(err("polarity must be pos or neg")),
        };
        if subject1_id == subject2_id {
            return Err(err("subjects must differ"));
        }
        Ok(ExampleId {
            template_id,
            subject1_id,
            subject2_id,
            attribute_id,
            polarity,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_bit_exact() {
        let id = ExampleId {
            template_id: "same-city".into(),
            subject1_id: "gerald".into(),
            subject2_id: "jennifer".into(),
            attribute_id: "hunter".into(),
            polarity: Polarity::Negated,
        };
        assert_eq!(
            id.to_string(),
            "t:same-city|s1:gerald|s2:jennifer|a:hunter|neg"
        );
        assert_eq!(id.to_string().parse::<ExampleId>().unwrap(), id);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "t:x|s1:a|s2:b|a:c",
            "t:x|s1:a|s2:b|a:c|maybe",
            "x|s1:a|s2:b|a:c|pos",
            "t:x|s1:a|s2:a|a:c|pos",
            "t:|s1:a|s2:b|a:c|pos",
        ] {
            assert!(bad.parse::<ExampleId>().is_err(), "{bad}");
        }
    }
}

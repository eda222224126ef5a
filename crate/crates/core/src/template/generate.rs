use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    grammar_fix, Attribute, ClassPairing, ExampleId, Mode, Polarity, ProbeConfig, ProbeExample,
    Subject, Template,
};

/// Mention order / polarity variants of one (template, pair, attribute), in
/// emission order: order `12` before `21`, then `neg` before `pos`.
const VARIANTS: [(bool, Polarity); 4] = [
    (false, Polarity::Negated),
    (false, Polarity::Positive),
    (true, Polarity::Negated),
    (true, Polarity::Positive),
];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub templates: usize,
    /// Admissible unordered subject pairs summed over templates.
    pub unordered_pairs: u64,
    /// One per (template, unordered pair, attribute); order and polarity
    /// variants are not counted separately.
    pub base_count: u64,
    /// Examples actually emitted (four per `base_count` unit).
    pub emitted: u64,
    /// (template, subject) combinations dropped for lacking a surface form.
    pub skipped_subjects: u64,
}

struct TemplatePlan<'c> {
    template: &'c Template,
    pairs: Vec<(&'c Subject, &'c Subject)>,
}

fn template_plans(config: &ProbeConfig, mode: Mode) -> (Vec<TemplatePlan<'_>>, u64) {
    let mut skipped = 0u64;
    let plans = config
        .templates
        .iter()
        .filter(|t| t.mode.supports(mode))
        .map(|template| {
            let eligible: Vec<&Subject> = config
                .subjects
                .iter()
                .filter(|s| s.form(template.subject_form).is_some())
                .collect();
            skipped += (config.subjects.len() - eligible.len()) as u64;
            let mut pairs = Vec::new();
            for (i, a) in eligible.iter().enumerate() {
                for b in &eligible[i + 1..] {
                    let admissible = match template.class_pairing {
                        ClassPairing::AnyDistinct => true,
                        ClassPairing::CrossClassOnly => a.class_label != b.class_label,
                    };
                    if admissible {
                        pairs.push((*a, *b));
                    }
                }
            }
            TemplatePlan { template, pairs }
        })
        .collect();
    if skipped > 0 {
        log::info!("skipped {skipped} (template, subject) combinations lacking a surface form");
    }
    (plans, skipped)
}

fn stats_for(config: &ProbeConfig, plans: &[TemplatePlan<'_>], skipped: u64) -> GenerationStats {
    let unordered_pairs: u64 = plans.iter().map(|p| p.pairs.len() as u64).sum();
    let base_count = unordered_pairs * config.attributes.len() as u64;
    GenerationStats {
        templates: plans.len(),
        unordered_pairs,
        base_count,
        emitted: base_count * 4,
        skipped_subjects: skipped,
    }
}

/// Counts what [`generate`] would emit without rendering anything.
pub fn plan(config: &ProbeConfig, mode: Mode) -> GenerationStats {
    let (plans, skipped) = template_plans(config, mode);
    stats_for(config, &plans, skipped)
}

fn render(
    template: &Template,
    first: &Subject,
    second: &Subject,
    attribute: &Attribute,
    polarity: Polarity,
    mode: Mode,
) -> ProbeExample {
    // Forms were checked when the plan was built.
    let form = template.subject_form;
    let paragraph = grammar_fix(
        &template
            .context_pattern
            .replace("[x1]", first.form(form).unwrap())
            .replace("[x2]", second.form(form).unwrap()),
    );
    let attr = attribute.form(polarity);
    let question = match mode {
        Mode::Qa => template
            .question_pattern
            .as_deref()
            .expect("qa templates carry a question")
            .replace("[a]", attr),
        Mode::MaskedLm => format!("[MASK] {attr}."),
    };
    let id = ExampleId {
        template_id: template.id.clone(),
        subject1_id: first.id.clone(),
        subject2_id: second.id.clone(),
        attribute_id: attribute.id.clone(),
        polarity,
    };
    ProbeExample {
        example_id: id.to_string(),
        template_id: id.template_id,
        subject1_id: id.subject1_id,
        subject2_id: id.subject2_id,
        attribute_id: id.attribute_id,
        polarity,
        paragraph,
        question: grammar_fix(&question),
    }
}

fn render_partition<'c>(
    config: &'c ProbeConfig,
    template: &'c Template,
    pair: (&'c Subject, &'c Subject),
    mode: Mode,
) -> impl Iterator<Item = ProbeExample> + 'c {
    config.attributes.iter().flat_map(move |attribute| {
        VARIANTS.iter().map(move |&(reversed, polarity)| {
            let (first, second) = if reversed { (pair.1, pair.0) } else { pair };
            render(template, first, second, attribute, polarity, mode)
        })
    })
}

/// Lazily renders every probe example of `config` in canonical order:
/// template, pair, attribute, mention order, polarity.
pub struct Generator<'c> {
    inner: Box<dyn Iterator<Item = ProbeExample> + 'c>,
    stats: GenerationStats,
}

impl<'c> Generator<'c> {
    pub fn stats(&self) -> &GenerationStats {
        &self.stats
    }
}

impl Iterator for Generator<'_> {
    type Item = ProbeExample;

    fn next(&mut self) -> Option<ProbeExample> {
        self.inner.next()
    }
}

pub fn generate(config: &ProbeConfig, mode: Mode) -> Generator<'_> {
    let (plans, skipped) = template_plans(config, mode);
    let stats = stats_for(config, &plans, skipped);
    let inner = plans.into_iter().flat_map(move |plan| {
        let template = plan.template;
        plan.pairs
            .into_iter()
            .flat_map(move |pair| render_partition(config, template, pair, mode))
    });
    Generator {
        inner: Box::new(inner),
        stats,
    }
}

fn write_line<W: Write>(out: &mut W, example: &ProbeExample) -> io::Result<()> {
    serde_json::to_writer(&mut *out, example)?;
    out.write_all(b"\n")
}

/// Writes the dataset as JSON lines, stopping after `limit` examples.
pub fn write_dataset<W: Write>(
    config: &ProbeConfig,
    mode: Mode,
    limit: Option<u64>,
    mut out: W,
) -> io::Result<GenerationStats> {
    let generator = generate(config, mode);
    let stats = generator.stats().clone();
    let limit = limit.unwrap_or(u64::MAX);
    for example in generator.take(limit.min(usize::MAX as u64) as usize) {
        write_line(&mut out, &example)?;
    }
    out.flush()?;
    Ok(stats)
}

/// Same output as [`write_dataset`] without a limit, with (template, pair)
/// partitions rendered on the rayon pool and written back in order.
pub fn write_dataset_parallel<W: Write>(
    config: &ProbeConfig,
    mode: Mode,
    mut out: W,
) -> io::Result<GenerationStats> {
    const BATCH: usize = 512;
    let (plans, skipped) = template_plans(config, mode);
    let stats = stats_for(config, &plans, skipped);
    let partitions: Vec<(&Template, (&Subject, &Subject))> = plans
        .iter()
        .flat_map(|p| p.pairs.iter().map(move |pair| (p.template, *pair)))
        .collect();
    for batch in partitions.chunks(BATCH) {
        let rendered: Vec<io::Result<Vec<u8>>> = batch
            .par_iter()
            .map(|(template, pair)| {
                let mut buf = Vec::with_capacity(256 * 4 * config.attributes.len());
                for example in render_partition(config, template, *pair, mode) {
                    write_line(&mut buf, &example)?;
                }
                Ok(buf)
            })
            .collect();
        for chunk in rendered {
            out.write_all(&chunk?)?;
        }
    }
    out.flush()?;
    Ok(stats)
}

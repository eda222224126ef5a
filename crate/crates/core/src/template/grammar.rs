//! Post-instantiation grammar correction.

/// Words whose spelling starts with a vowel but whose sound does not.
const A_PREFIXES: &[&str] = &[
    "europ", "univers", "unique", "unit", "usual", "useful", "user",
];
const A_WORDS: &[&str] = &["one", "once", "us", "usa", "uk"];
/// Words whose spelling starts with a consonant but whose sound does not.
const AN_PREFIXES: &[&str] = &["honest", "honor", "honour", "hour", "heir", "uzbek"];

/// Fixes a rendered sentence: picks `a`/`an` for the following word,
/// uppercases the first letter of every sentence and collapses runs of
/// whitespace. Idempotent.
pub fn grammar_fix(sentence: &str) -> String {
    let words: Vec<&str> = sentence.split_whitespace().collect();
    let mut out: Vec<String> = Vec::with_capacity(words.len());
    for (i, word) in words.iter().enumerate() {
        let fixed = match words.get(i + 1) {
            Some(next) if is_article(word) => match article_for(next) {
                Some(article) => match_case(article, word),
                None => word.to_string(),
            },
            _ => word.to_string(),
        };
        out.push(fixed);
    }
    capitalize_sentences(&out.join(" "))
}

fn is_article(word: &str) -> bool {
    word.eq_ignore_ascii_case("a") || word.eq_ignore_ascii_case("an")
}

fn article_for(next: &str) -> Option<&'static str> {
    let lead: String = next
        .chars()
        .skip_while(|c| matches!(c, '"' | '\'' | '(' | '\u{201c}'))
        .take_while(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect();
    let first = lead.chars().next()?;
    if !first.is_alphabetic() {
        return None;
    }
    if A_WORDS.contains(&lead.as_str()) || A_PREFIXES.iter().any(|p| lead.starts_with(p)) {
        return Some("a");
    }
    if AN_PREFIXES.iter().any(|p| lead.starts_with(p)) {
        return Some("an");
    }
    Some(if "aeiou".contains(first) { "an" } else { "a" })
}

fn match_case(article: &str, original: &str) -> String {
    if original.starts_with(|c: char| c.is_uppercase()) {
        let mut chars = article.chars();
        let head = chars.next().unwrap().to_uppercase();
        head.chain(chars).collect()
    } else {
        article.to_string()
    }
}

fn capitalize_sentences(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut at_start = true;
    let mut prev: Option<char> = None;
    for c in text.chars() {
        if at_start && c.is_alphabetic() {
            out.extend(c.to_uppercase());
            at_start = false;
        } else {
            if c.is_alphanumeric() || c == '[' {
                at_start = false;
            }
            out.push(c);
        }
        if c == ' ' && matches!(prev, Some('.' | '?' | '!')) {
            at_start = true;
        }
        prev = Some(c);
    }
    out
}

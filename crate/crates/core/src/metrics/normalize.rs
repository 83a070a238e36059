//! Text preparation shared by WER and ROUGE-L.

use crate::task::Lang;

fn is_arabic_diacritic(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{0652}' | '\u{0670}')
}

/// Unifies hamza-carrying Alef forms to bare Alef, drops tashkeel and the
/// superscript Alef, collapses whitespace runs and trims. Every other
/// character, including Alef maqsura and teh marbuta, is left alone.
pub fn normalize_arabic(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\u{0622}' | '\u{0623}' | '\u{0625}' => out.push('\u{0627}'),
            c if is_arabic_diacritic(c) => {}
            c => out.push(c),
        }
    }
    collapse_whitespace(&out)
}

pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Optional normalization steps applied before tokenizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextOptions {
    pub lowercase: bool,
    pub strip_punctuation: bool,
}

impl Default for TextOptions {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: false,
        }
    }
}

/// Applies Arabic normalization (for `Lang::Ar`) and the optional steps.
pub fn prepare(text: &str, lang: Lang, opts: TextOptions) -> String {
    let mut s = match lang {
        Lang::Ar => normalize_arabic(text),
        Lang::En => text.to_string(),
    };
    if opts.lowercase {
        s = s.to_lowercase();
    }
    if opts.strip_punctuation {
        s = s
            .chars()
            .map(|c| if c.is_alphanumeric() || c.is_whitespace() || is_arabic_diacritic(c) { c } else { ' ' })
            .collect();
    }
    collapse_whitespace(&s)
}

pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

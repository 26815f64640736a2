//! Per-word normalization applied before subword matching: the same steps a
//! BERT basic tokenizer runs, restricted to a single pre-tokenized word.

use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use super::TokenizerConfig;

pub(crate) fn is_whitespace(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r')
        || get_general_category(c) == GeneralCategory::SpaceSeparator
}

pub(crate) fn is_control(c: char) -> bool {
    if matches!(c, '\t' | '\n' | '\r') {
        return false;
    }
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        Control | Format | PrivateUse | Surrogate | Unassigned
    )
}

/// ASCII symbol ranges count as punctuation even where Unicode classifies
/// them as symbols (`$`, `+`, `^`, `` ` ``).
pub(crate) fn is_punctuation(c: char) -> bool {
    let cp = c as u32;
    if (33..=47).contains(&cp)
        || (58..=64).contains(&cp)
        || (91..=96).contains(&cp)
        || (123..=126).contains(&cp)
    {
        return true;
    }
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
    )
}

/// CJK Unified Ideographs blocks plus extensions and compatibility ideographs.
/// Hiragana, katakana and hangul are not included.
pub(crate) fn is_cjk(c: char) -> bool {
    let cp = c as u32;
    (0x4E00..=0x9FFF).contains(&cp)
        || (0x3400..=0x4DBF).contains(&cp)
        || (0x20000..=0x2A6DF).contains(&cp)
        || (0x2A700..=0x2B73F).contains(&cp)
        || (0x2B740..=0x2B81F).contains(&cp)
        || (0x2B820..=0x2CEAF).contains(&cp)
        || (0xF900..=0xFAFF).contains(&cp)
        || (0x2F800..=0x2FA1F).contains(&cp)
}

fn strip_accents(text: &str) -> String {
    text.nfd()
        .filter(|&c| get_general_category(c) != GeneralCategory::NonspacingMark)
        .collect()
}

/// Splits `word` into the fragments WordPiece sees.
///
/// Control characters (and NUL / U+FFFD) are dropped, whitespace separates
/// fragments, and punctuation or CJK ideographs become singleton fragments
/// when the config asks for it. If nothing survives, the untouched word is
/// returned as a single fragment.
pub fn normalize_word(word: &str, config: &TokenizerConfig) -> Vec<String> {
    let mut cleaned = String::with_capacity(word.len());
    for c in word.chars() {
        if c == '\0' || c == '\u{FFFD}' || is_control(c) {
            continue;
        }
        cleaned.push(c);
    }
    let cleaned = if config.lowercase {
        cleaned.to_lowercase()
    } else {
        cleaned
    };
    let cleaned = if config.strip_accents {
        strip_accents(&cleaned)
    } else {
        cleaned
    };

    let mut fragments = Vec::new();
    let mut current = String::new();
    for c in cleaned.chars() {
        if is_whitespace(c) {
            if !current.is_empty() {
                fragments.push(std::mem::take(&mut current));
            }
        } else if (config.isolate_punctuation && is_punctuation(c))
            || (config.isolate_cjk && is_cjk(c))
        {
            if !current.is_empty() {
                fragments.push(std::mem::take(&mut current));
            }
            fragments.push(c.to_string());
        } else {
            current.push(c);
        }
    }
    if !current.is_empty() {
        fragments.push(current);
    }
    if fragments.is_empty() {
        fragments.push(word.to_owned());
    }
    fragments
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> TokenizerConfig {
        TokenizerConfig::default()
    }

    #[test]
    fn lowercase() {
        let c = TokenizerConfig {
            lowercase: true,
            ..cfg()
        };
        assert_eq!(normalize_word("Hello", &c), ["hello"]);
        assert_eq!(normalize_word("Hello", &cfg()), ["Hello"]);
    }

    #[test]
    fn punctuation_split() {
        assert_eq!(normalize_word("don't", &cfg()), ["don", "'", "t"]);
        assert_eq!(normalize_word("«a»", &cfg()), ["«", "a", "»"]);
        assert_eq!(normalize_word("$5", &cfg()), ["$", "5"]);
        let off = TokenizerConfig {
            isolate_punctuation: false,
            ..cfg()
        };
        assert_eq!(normalize_word("don't", &off), ["don't"]);
    }

    #[test]
    fn accents() {
        let c = TokenizerConfig {
            strip_accents: true,
            ..cfg()
        };
        // precomposed and decomposed input agree
        assert_eq!(normalize_word("h\u{e9}llo", &c), ["hello"]);
        assert_eq!(normalize_word("he\u{301}llo", &c), ["hello"]);
        assert_eq!(normalize_word("h\u{e9}llo", &cfg()), ["h\u{e9}llo"]);
    }

    #[test]
    fn cjk_isolation() {
        assert_eq!(normalize_word("中文ok", &cfg()), ["中", "文", "ok"]);
        // kana are not ideographs
        assert_eq!(normalize_word("ひらがな", &cfg()), ["ひらがな"]);
    }

    #[test]
    fn controls_and_whitespace() {
        assert_eq!(normalize_word("a\u{200B}b", &cfg()), ["ab"]);
        assert_eq!(normalize_word("1 000", &cfg()), ["1", "000"]);
        assert_eq!(normalize_word("\u{200B}", &cfg()), ["\u{200B}"]);
    }
}

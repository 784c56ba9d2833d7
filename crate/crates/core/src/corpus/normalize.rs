//! Reference/hypothesis text normalization.
//!
//! Fixed rule so every downstream number is reproducible: Unicode NFC,
//! lowercase, strip punctuation except intra-word apostrophes, then split
//! on whitespace. Right single quotes (U+2019) are folded to ASCII
//! apostrophes before stripping.

use unicode_normalization::UnicodeNormalization;

/// Normalize raw text into scoring tokens.
///
/// Empty input yields an empty list. The function is idempotent over
/// re-joined output: `normalize(join(normalize(x))) == normalize(x)`.
pub fn normalize_text(raw: &str) -> Vec<String> {
    let composed: String = raw.nfc().collect();
    let lowered = composed.to_lowercase();
    let mut cleaned = String::with_capacity(lowered.len());
    for ch in lowered.chars() {
        let ch = if ch == '\u{2019}' { '\'' } else { ch };
        if ch.is_alphanumeric() || ch == '\'' {
            cleaned.push(ch);
        } else {
            cleaned.push(' ');
        }
    }
    cleaned
        .split_whitespace()
        .map(|tok| tok.trim_matches('\''))
        .filter(|tok| !tok.is_empty())
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strips_punctuation_and_lowercases() {
        assert_eq!(normalize_text("Hello, world!"), vec!["hello", "world"]);
    }

    #[test]
    fn empty_input_is_empty() {
        assert!(normalize_text("").is_empty());
        assert!(normalize_text("  \t\n").is_empty());
        assert!(normalize_text("...!?").is_empty());
    }

    #[test]
    fn keeps_intra_word_apostrophes() {
        assert_eq!(normalize_text("It's  OK."), vec!["it's", "ok"]);
        assert_eq!(normalize_text("'quoted'"), vec!["quoted"]);
        assert_eq!(normalize_text("it\u{2019}s"), vec!["it's"]);
    }

    #[test]
    fn hyphens_split_words() {
        assert_eq!(normalize_text("well-known"), vec!["well", "known"]);
    }

    proptest! {
        #[test]
        fn idempotent_over_rejoin(raw in ".{0,64}") {
            let once = normalize_text(&raw);
            let twice = normalize_text(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tokens_never_contain_whitespace_or_uppercase(raw in ".{0,64}") {
            for tok in normalize_text(&raw) {
                prop_assert!(!tok.is_empty());
                prop_assert!(!tok.chars().any(char::is_whitespace));
                prop_assert_eq!(tok.to_lowercase(), tok.clone());
            }
        }
    }
}

//! Case folding and tokenization shared by the offline backend and the
//! similarity measure.

use std::collections::BTreeMap;

/// Lowercases and collapses every whitespace run to a single space.
pub fn fold(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, word) in text.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Case-folded whitespace tokens.
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().map(|w| w.to_lowercase())
}

/// Raw term-frequency vector over case-folded whitespace tokens.
pub fn term_frequencies(text: &str) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    for token in tokens(text) {
        *tf.entry(token).or_insert(0.0) += 1.0;
    }
    tf
}

/// Number of non-overlapping occurrences of `needle` in `haystack`.
pub(crate) fn occurrences(haystack: &str, needle: &str) -> usize {
    if needle.is_empty() {
        return 0;
    }
    haystack.matches(needle).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_collapses_whitespace() {
        assert_eq!(fold("  Product\tQUALITY \n control "), "product quality control");
        assert_eq!(fold(""), "");
    }

    #[test]
    fn tf_counts_tokens() {
        let tf = term_frequencies("a B a");
        assert_eq!(tf["a"], 2.0);
        assert_eq!(tf["b"], 1.0);
    }
}

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Splits after every `.`, `!` or `?` that is followed by whitespace or the end
/// of the text. Terminators stay with their sentence. No abbreviation
/// handling: "Mr. Smith" becomes two sentences.
pub fn split_sentences(text: &str) -> Result<Vec<String>> {
    if text.trim().is_empty() {
        return Err(Error::Data("cannot split empty text into sentences".into()));
    }
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if !is_terminator(c) {
            continue;
        }
        let boundary = match iter.peek() {
            None => true,
            Some((_, next)) => next.is_whitespace(),
        };
        if boundary {
            let end = i + c.len_utf8();
            push_trimmed(&mut out, &text[start..end]);
            start = end;
        }
    }
    push_trimmed(&mut out, &text[start..]);
    Ok(out)
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

/// Lowercased runs of alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn splitter_examples() {
        assert_eq!(
            split_sentences("Good movie. Bad ending.").unwrap(),
            vec!["Good movie.", "Bad ending."]
        );
        assert_eq!(split_sentences("Why? Because!").unwrap(), vec!["Why?", "Because!"]);
        assert_eq!(
            split_sentences("One sentence without terminator").unwrap(),
            vec!["One sentence without terminator"]
        );
        assert!(matches!(split_sentences("  \n\t"), Err(Error::Data(_))));
    }

    #[test]
    fn splitter_edge_cases() {
        // decimal points and runs of terminators
        assert_eq!(
            split_sentences("Rated 3.5 stars!!! Great.").unwrap(),
            vec!["Rated 3.5 stars!!!", "Great."]
        );
        // documented failure mode
        assert_eq!(split_sentences("Mr. Smith left.").unwrap(), vec!["Mr.", "Smith left."]);
        assert_eq!(split_sentences("a.\n\nb").unwrap(), vec!["a.", "b"]);
    }

    #[test]
    fn tokenizer_lowercases_alphanumeric_runs() {
        assert_eq!(tokenize("Don't STOP--now 42x!"), vec!["don", "t", "stop", "now", "42x"]);
        assert!(tokenize("...").is_empty());
    }
}

/// Characters split off the edges of whitespace-separated words.
pub const PUNCTUATION: &[char] = &['.', ',', '!', '?', ';', ':', '"', '(', ')'];

/// Lowercases, splits on whitespace, and detaches leading and trailing
/// punctuation, one token per character. Inner punctuation (`don't`,
/// `3.5`) stays attached.
pub fn normalize_output(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    for word in lower.split_whitespace() {
        let core_start = word
            .char_indices()
            .find(|(_, c)| !PUNCTUATION.contains(c))
            .map(|(i, _)| i);
        let Some(start) = core_start else {
            out.extend(word.chars().map(String::from));
            continue;
        };
        let end = word
            .char_indices()
            .rev()
            .find(|(_, c)| !PUNCTUATION.contains(c))
            .map(|(i, c)| i + c.len_utf8())
            .unwrap_or(word.len());
        out.extend(word[..start].chars().map(String::from));
        out.push(word[start..end].to_string());
        out.extend(word[end..].chars().map(String::from));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn sentence_with_final_period() {
        assert_eq!(
            normalize_output("The doctor gave her the medication."),
            toks("the doctor gave her the medication .")
        );
    }

    #[test]
    fn empty_and_plain() {
        assert!(normalize_output("").is_empty());
        assert!(normalize_output("   ").is_empty());
        assert_eq!(normalize_output("a plain line"), toks("a plain line"));
    }

    #[test]
    fn punctuation_edges() {
        assert_eq!(normalize_output("(Hello,\" she said!)"), toks("( hello , \" she said ! )"));
        assert_eq!(normalize_output("don't stop 3.5"), toks("don't stop 3.5"));
        assert_eq!(normalize_output("?!"), toks("? !"));
    }

    #[test]
    fn idempotent_on_own_output() {
        let once = normalize_output("Wait... (really?) Yes: \"no\".");
        assert_eq!(normalize_output(&once.join(" ")), once);
    }
}

/// Longest repeated block considered by [`strip_trailing_repetition`].
pub const MAX_BLOCK: usize = 8;

/// Collapses repeated blocks at the end of a sequence.
///
/// While the sequence ends in two or more consecutive copies of the same
/// block of 1 to 8 tokens (longest block checked first), all trailing copies
/// but one are dropped. The result is a fixed point of the rule.
pub fn strip_trailing_repetition<T: PartialEq + Clone>(tokens: &[T]) -> Vec<T> {
    let mut out = tokens.to_vec();
    'outer: loop {
        for n in (1..=MAX_BLOCK).rev() {
            let len = out.len();
            if len < 2 * n || out[len - n..] != out[len - 2 * n..len - n] {
                continue;
            }
            let block = out[len - n..].to_vec();
            let mut copies = 2;
            while len >= (copies + 1) * n && out[len - (copies + 1) * n..len - copies * n] == block[..] {
                copies += 1;
            }
            out.truncate(len - (copies - 1) * n);
            continue 'outer;
        }
        return out;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(text: &str) -> Vec<&str> {
        text.split_whitespace().collect()
    }

    #[test]
    fn no_repetition() {
        assert_eq!(strip_trailing_repetition(&s("a b c")), s("a b c"));
        assert!(strip_trailing_repetition::<u32>(&[]).is_empty());
    }

    #[test]
    fn repeated_bigram() {
        assert_eq!(strip_trailing_repetition(&s("a b x y x y x y")), s("a b x y"));
    }

    #[test]
    fn repeated_word_and_nested() {
        assert_eq!(strip_trailing_repetition(&s("go . . . .")), s("go ."));
        assert_eq!(strip_trailing_repetition(&s("a a")), s("a"));
        // `b c c b c c` -> `b c c` -> `b c`
        assert_eq!(strip_trailing_repetition(&s("b c c b c c")), s("b c"));
    }

    #[test]
    fn blocks_longer_than_eight_are_kept() {
        let block: Vec<u32> = (0..9).collect();
        let twice: Vec<u32> = block.iter().chain(&block).copied().collect();
        assert_eq!(strip_trailing_repetition(&twice), twice);
    }

    #[test]
    fn internal_repetition_is_kept() {
        assert_eq!(strip_trailing_repetition(&s("very very good")), s("very very good"));
    }

    proptest! {
        #[test]
        fn idempotent_and_never_longer(xs in proptest::collection::vec(0u8..3, 0..40)) {
            let once = strip_trailing_repetition(&xs);
            prop_assert!(once.len() <= xs.len());
            prop_assert!(xs.starts_with(&once));
            prop_assert_eq!(strip_trailing_repetition(&once), once);
        }
    }
}

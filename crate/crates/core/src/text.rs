//! Word-level text splitting shared by the mock tokenizers, the metrics and
//! the knowledge-base vocabulary builder.

/// Characters split off the ends of whitespace-delimited words.
const EDGE_PUNCT: &[char] = &[
    '.', ',', ';', ':', '!', '?', '"', '(', ')', '[', ']', '{', '}',
];

/// Punctuation that attaches to the previous word on detokenization.
const CLOSING_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?', ')', ']', '}'];

/// Split on whitespace, then peel leading and trailing punctuation off each
/// word as separate one-character pieces. Inner punctuation (`go-kart`,
/// `don't`) stays inside the word.
pub fn split_words(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut start = 0;
        let mut end = word.len();
        let mut tail = Vec::new();
        while let Some(c) = word[start..end].chars().next() {
            if EDGE_PUNCT.contains(&c) && end - start > 0 {
                out.push(&word[start..start + c.len_utf8()]);
                start += c.len_utf8();
            } else {
                break;
            }
        }
        while let Some(c) = word[start..end].chars().next_back() {
            if EDGE_PUNCT.contains(&c) {
                tail.push(&word[end - c.len_utf8()..end]);
                end -= c.len_utf8();
            } else {
                break;
            }
        }
        if start < end {
            out.push(&word[start..end]);
        }
        out.extend(tail.into_iter().rev());
    }
    out
}

/// Inverse of [`split_words`] up to whitespace normalization: pieces are
/// joined by single spaces, except that closing punctuation attaches to the
/// preceding piece.
pub fn join_words<S: AsRef<str>>(pieces: &[S]) -> String {
    let mut out = String::new();
    for piece in pieces {
        let piece = piece.as_ref();
        let attach =
            piece.chars().count() == 1 && piece.chars().all(|c| CLOSING_PUNCT.contains(&c));
        if !out.is_empty() && !attach && !out.ends_with('\n') {
            out.push(' ');
        }
        out.push_str(piece);
    }
    out
}

/// Lowercase and collapse every whitespace run to a single space.
pub fn normalize(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

use crate::text::normalize;

/// Text prepared once for repeated mention queries.
#[derive(Debug, Clone)]
pub struct NormalizedText(String);

impl NormalizedText {
    pub fn new(text: &str) -> Self {
        Self(normalize(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Whether the already-normalized surface form occurs at word boundaries.
    pub fn contains_normalized(&self, surface: &str) -> bool {
        self.find_normalized(surface).is_some()
    }

    /// Byte offset of the first word-boundary occurrence of `surface`.
    pub fn find_mention(&self, surface: &str) -> Option<usize> {
        self.find_normalized(&normalize(surface))
    }

    fn find_normalized(&self, surface: &str) -> Option<usize> {
        if surface.is_empty() {
            return None;
        }
        let hay = self.0.as_str();
        let mut from = 0;
        while let Some(off) = hay[from..].find(surface) {
            let start = from + off;
            let end = start + surface.len();
            let before_ok = hay[..start]
                .chars()
                .next_back()
                .is_none_or(|c| !c.is_alphanumeric());
            let after_ok = hay[end..]
                .chars()
                .next()
                .is_none_or(|c| !c.is_alphanumeric());
            if before_ok && after_ok {
                return Some(start);
            }
            from = start + hay[start..].chars().next().map_or(1, char::len_utf8);
        }
        None
    }

    pub fn mentions(&self, surface: &str) -> bool {
        self.contains_normalized(&normalize(surface))
    }
}

/// True iff `surface` occurs in `text` after lowercasing and whitespace
/// collapsing on both sides, with no alphanumeric character directly before
/// or after the match.
pub fn mention_match(surface: &str, text: &str) -> bool {
    NormalizedText::new(text).mentions(surface)
}

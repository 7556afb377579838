use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOPIC_SLOT: &str = "[topic]";
pub const CONSTRAINT_SLOT: &str = "[constraint]";
pub const DEMONSTRATIONS_MARKER: &str = "[demonstrations]";

/// Where the topic and constraint sentences sit relative to the
/// demonstrations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Position {
    /// Topic sentence first, demonstrations, constraint sentence last.
    #[serde(rename = "begin+end")]
    BeginEnd,
    /// Both sentences first, demonstrations last.
    #[serde(rename = "begin")]
    Begin,
    /// Demonstrations first, both sentences last.
    #[serde(rename = "end")]
    End,
}

impl Position {
    pub fn as_str(self) -> &'static str {
        match self {
            Position::BeginEnd => "begin+end",
            Position::Begin => "begin",
            Position::End => "end",
        }
    }

    /// Line indices of (topic sentence, constraint sentence, first
    /// demonstration) for a rendering with `demos` demonstration lines.
    fn layout(self, demos: usize) -> (usize, usize, usize) {
        match self {
            Position::BeginEnd => (0, demos + 1, 1),
            Position::Begin => (0, 1, 2),
            Position::End => (demos, demos + 1, 0),
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "begin+end" => Ok(Position::BeginEnd),
            "begin" => Ok(Position::Begin),
            "end" => Ok(Position::End),
            other => Err(Error::InvalidArgument(format!(
                "unknown position class {other:?}"
            ))),
        }
    }
}

/// Natural-language instruction template with one topic and one constraint
/// sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: u32,
    pub position: Position,
    pub topic_pattern: String,
    pub constraint_pattern: String,
}

fn split_slot<'a>(pattern: &'a str, slot: &str) -> (&'a str, &'a str) {
    pattern.split_once(slot).expect("validated slot")
}

fn strip_slot<'a>(line: &'a str, pattern: &str, slot: &str) -> Option<&'a str> {
    let (prefix, suffix) = split_slot(pattern, slot);
    if line.len() <= prefix.len() + suffix.len() {
        return None;
    }
    line.strip_prefix(prefix)?.strip_suffix(suffix)
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl Template {
    pub fn new(
        id: u32,
        position: Position,
        topic_pattern: impl Into<String>,
        constraint_pattern: impl Into<String>,
    ) -> Result<Self> {
        let t = Self {
            id,
            position,
            topic_pattern: topic_pattern.into(),
            constraint_pattern: constraint_pattern.into(),
        };
        let count = |s: &str, slot: &str| s.matches(slot).count();
        if count(&t.topic_pattern, TOPIC_SLOT) != 1
            || count(&t.topic_pattern, CONSTRAINT_SLOT) != 0
            || count(&t.constraint_pattern, CONSTRAINT_SLOT) != 1
            || count(&t.constraint_pattern, TOPIC_SLOT) != 0
        {
            return Err(Error::InvalidArgument(format!(
                "template {id}: [topic] and [constraint] must each appear exactly once, in their own sentence"
            )));
        }
        if t.topic_pattern.contains('\n') || t.constraint_pattern.contains('\n') {
            return Err(Error::InvalidArgument(format!(
                "template {id}: patterns are single lines"
            )));
        }
        Ok(t)
    }

    /// Renders the full instruction. Demonstrations go one per line, each
    /// prefixed with `- `; whitespace inside names and demonstrations is
    /// collapsed so the line structure is unambiguous.
    pub fn render<S: AsRef<str>>(&self, topic: &str, constraint: &str, demos: &[S]) -> String {
        let topic_line = self.topic_pattern.replacen(TOPIC_SLOT, &one_line(topic), 1);
        let constraint_line =
            self.constraint_pattern
                .replacen(CONSTRAINT_SLOT, &one_line(constraint), 1);
        let demo_lines: Vec<String> = demos
            .iter()
            .map(|d| format!("- {}", one_line(d.as_ref())))
            .collect();
        let mut lines: Vec<String> = Vec::with_capacity(demos.len() + 2);
        match self.position {
            Position::BeginEnd => {
                lines.push(topic_line);
                lines.extend(demo_lines);
                lines.push(constraint_line);
            }
            Position::Begin => {
                lines.push(topic_line);
                lines.push(constraint_line);
                lines.extend(demo_lines);
            }
            Position::End => {
                lines.extend(demo_lines);
                lines.push(topic_line);
                lines.push(constraint_line);
            }
        }
        lines.join("\n")
    }

    /// Inverse of [`Template::render`] for a rendering with `demos`
    /// demonstration lines: the (topic, constraint) fillers, or `None` when
    /// the text does not follow this template.
    pub fn extract(&self, text: &str, demos: usize) -> Option<(String, String)> {
        let lines: Vec<&str> = text.split('\n').collect();
        if lines.len() != demos + 2 {
            return None;
        }
        let (ti, ci, di) = self.position.layout(demos);
        if !lines[di..di + demos].iter().all(|l| l.starts_with("- ")) {
            return None;
        }
        let topic = strip_slot(lines[ti], &self.topic_pattern, TOPIC_SLOT)?;
        let constraint = strip_slot(lines[ci], &self.constraint_pattern, CONSTRAINT_SLOT)?;
        Some((topic.to_string(), constraint.to_string()))
    }
}

/// Parses the template file: a `TEMPLATE <id> <position-class>` header
/// followed by three lines in rendering order, one of which is the
/// `[demonstrations]` marker.
pub fn parse_templates(src: &str, origin: &str) -> Result<Vec<Template>> {
    let mut out: Vec<Template> = Vec::new();
    let mut header: Option<(u32, Position, usize)> = None;
    let mut body: Vec<&str> = Vec::new();

    let mut finish = |header: Option<(u32, Position, usize)>, body: &mut Vec<&str>| -> Result<()> {
        let Some((id, position, lineno)) = header else {
            return Ok(());
        };
        let err = |msg: String| Error::parse(origin, lineno, msg);
        if body.len() != 3 {
            return Err(err(format!(
                "template {id} needs 3 lines, found {}",
                body.len()
            )));
        }
        let marker = body
            .iter()
            .position(|l| l.trim() == DEMONSTRATIONS_MARKER)
            .ok_or_else(|| err(format!("template {id} lacks {DEMONSTRATIONS_MARKER}")))?;
        let expected = match position {
            Position::BeginEnd => 1,
            Position::Begin => 2,
            Position::End => 0,
        };
        if marker != expected {
            return Err(err(format!(
                "template {id}: {DEMONSTRATIONS_MARKER} placement contradicts position {position}"
            )));
        }
        let sentences: Vec<&str> = body
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != marker)
            .map(|(_, l)| *l)
            .collect();
        let t = Template::new(id, position, sentences[0], sentences[1])
            .map_err(|e| err(e.to_string()))?;
        if out.iter().any(|o| o.id == id) {
            return Err(err(format!("duplicate template id {id}")));
        }
        out.push(t);
        body.clear();
        Ok(())
    };

    for (i, line) in src.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("TEMPLATE ") {
            finish(header.take(), &mut body)?;
            let mut f = rest.split_whitespace();
            let id = f
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(origin, lineno, "bad template id"))?;
            let position: Position = f
                .next()
                .ok_or_else(|| Error::parse(origin, lineno, "missing position class"))?
                .parse()
                .map_err(|e: Error| Error::parse(origin, lineno, e.to_string()))?;
            header = Some((id, position, lineno));
        } else if header.is_some() {
            body.push(line.trim_end());
        } else {
            return Err(Error::parse(
                origin,
                lineno,
                "pattern line before TEMPLATE header",
            ));
        }
    }
    finish(header.take(), &mut body)?;
    Ok(out)
}

pub fn load_templates(path: impl AsRef<Path>) -> Result<Vec<Template>> {
    let path = path.as_ref();
    parse_templates(&std::fs::read_to_string(path)?, &path.display().to_string())
}

/// Recovers (topic, constraint) names from a rendered instruction by trying
/// each template in order.
pub fn extract_entities(
    text: &str,
    templates: &[Template],
    demos: usize,
) -> Option<(String, String)> {
    templates.iter().find_map(|t| t.extract(text, demos))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t0() -> Template {
        Template::new(
            0,
            Position::BeginEnd,
            "Write down examples of [topic].",
            "Continue listing them but do not include examples of [constraint].",
        )
        .unwrap()
    }

    #[test]
    fn template_zero_wording() {
        let r = t0().render(
            "wine",
            "pinot",
            &[
                "Merlot is a grape.",
                "Cabernet is a grape.",
                "Riesling is a grape.",
            ],
        );
        assert_eq!(
            r,
            "Write down examples of wine.\n- Merlot is a grape.\n- Cabernet is a grape.\n- Riesling is a grape.\nContinue listing them but do not include examples of pinot."
        );
        assert_eq!(t0().extract(&r, 3), Some(("wine".into(), "pinot".into())));
    }

    #[test]
    fn end_position_puts_sentences_last() {
        let t = Template::new(
            2,
            Position::End,
            "Below we show examples of [topic].",
            "Following these examples, keep listing but don't mention [constraint].",
        )
        .unwrap();
        let r = t.render("wine", "merlot", &["a", "b", "c"]);
        let lines: Vec<&str> = r.lines().collect();
        assert_eq!(lines[0], "- a");
        assert_eq!(lines[3], "Below we show examples of wine.");
        assert!(lines[4].ends_with("mention merlot."));
    }

    #[test]
    fn slot_validation() {
        assert!(Template::new(1, Position::Begin, "no slot", "[constraint]").is_err());
        assert!(Template::new(1, Position::Begin, "[topic] [topic]", "[constraint]").is_err());
        assert!(Template::new(1, Position::Begin, "[topic] [constraint]", "[constraint]").is_err());
    }

    #[test]
    fn parse_rejects_misplaced_marker() {
        let src = "TEMPLATE 0 begin\n[demonstrations]\nA [topic].\nB [constraint].\n";
        assert!(parse_templates(src, "t").is_err());
        let ok = "TEMPLATE 0 end\n[demonstrations]\nA [topic].\nB [constraint].\n";
        assert_eq!(parse_templates(ok, "t").unwrap()[0].position, Position::End);
    }

    #[test]
    fn render_is_deterministic() {
        let a = t0().render("x", "y", &["1", "2", "3"]);
        let b = t0().render("x", "y", &["1", "2", "3"]);
        assert_eq!(a.as_bytes(), b.as_bytes());
    }
}

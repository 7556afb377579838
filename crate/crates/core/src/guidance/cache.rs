use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generated example strings for one instance, stored so decoding can be
/// rerun without querying the guidance model again.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CachedExamples {
    pub id: String,
    pub topic: Vec<String>,
    pub constraint: Vec<String>,
}

pub fn write_cache(path: impl AsRef<Path>, entries: &[CachedExamples]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for e in entries {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cache(path: impl AsRef<Path>) -> Result<Vec<CachedExamples>> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(&line)
            .map_err(|err| Error::parse(&path.display().to_string(), i + 1, err.to_string()))?;
        out.push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cache.jsonl");
        let e = vec![CachedExamples {
            id: "hier-00001".into(),
            topic: vec!["merlot".into(), "pinot noir".into()],
            constraint: vec![],
        }];
        write_cache(&p, &e).unwrap();
        assert_eq!(read_cache(&p).unwrap(), e);
    }
}

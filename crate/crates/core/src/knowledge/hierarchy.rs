use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Node {
    pub id: String,
    pub name: String,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Hypernym forest: child → parent links with a description for every leaf.
#[derive(Debug, Clone)]
pub struct HierarchyKb {
    nodes: Vec<Node>,
    by_id: HashMap<String, usize>,
    roots: Vec<usize>,
    leaf_text: HashMap<usize, String>,
}

impl HierarchyKb {
    /// Parses `NODE <id> <parent-id|ROOT> <name>` and `TEXT <leaf-id> <text>`
    /// records. Parents may be declared after their children.
    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let mut raw: Vec<(String, String, String, usize)> = Vec::new();
        let mut texts: Vec<(String, String, usize)> = Vec::new();
        for (i, line) in src.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(2, ' ');
            let kind = parts.next().unwrap_or_default();
            let rest = parts.next().unwrap_or_default();
            match kind {
                "NODE" => {
                    let mut f = rest.splitn(3, ' ');
                    let (Some(id), Some(parent), Some(name)) = (f.next(), f.next(), f.next())
                    else {
                        return Err(Error::parse(
                            origin,
                            lineno,
                            "NODE needs <id> <parent> <name>",
                        ));
                    };
                    let name = name.trim();
                    if name.is_empty() {
                        return Err(Error::parse(origin, lineno, "empty node name"));
                    }
                    raw.push((id.into(), parent.into(), name.into(), lineno));
                }
                "TEXT" => {
                    let (id, text) = rest.split_once(' ').ok_or_else(|| {
                        Error::parse(origin, lineno, "TEXT needs <leaf-id> <text>")
                    })?;
                    texts.push((id.into(), text.trim().into(), lineno));
                }
                other => {
                    return Err(Error::parse(
                        origin,
                        lineno,
                        format!("unknown record {other:?}"),
                    ))
                }
            }
        }

        let mut by_id = HashMap::new();
        let mut nodes = Vec::with_capacity(raw.len());
        for (id, _, name, lineno) in &raw {
            if by_id.insert(id.clone(), nodes.len()).is_some() {
                return Err(Error::parse(
                    origin,
                    *lineno,
                    format!("duplicate node id {id:?}"),
                ));
            }
            nodes.push(Node {
                id: id.clone(),
                name: name.clone(),
                parent: None,
                children: Vec::new(),
            });
        }
        let mut roots = Vec::new();
        for (idx, (_, parent, _, lineno)) in raw.iter().enumerate() {
            if parent == "ROOT" {
                roots.push(idx);
                continue;
            }
            let p = *by_id.get(parent).ok_or_else(|| {
                Error::parse(origin, *lineno, format!("unknown parent {parent:?}"))
            })?;
            nodes[idx].parent = Some(p);
            nodes[p].children.push(idx);
        }
        // Every node must reach a root within |nodes| hops.
        for (idx, node) in nodes.iter().enumerate() {
            let mut cur = node.parent;
            let mut hops = 0;
            while let Some(p) = cur {
                hops += 1;
                if hops > nodes.len() || p == idx {
                    return Err(Error::parse(
                        origin,
                        raw[idx].3,
                        format!("cycle through node {:?}", node.id),
                    ));
                }
                cur = nodes[p].parent;
            }
        }

        let mut leaf_text = HashMap::new();
        for (id, text, lineno) in texts {
            let idx = *by_id.get(&id).ok_or_else(|| {
                Error::parse(origin, lineno, format!("TEXT for unknown node {id:?}"))
            })?;
            if !nodes[idx].is_leaf() {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("TEXT for internal node {id:?}"),
                ));
            }
            if text.is_empty() {
                return Err(Error::parse(origin, lineno, "empty TEXT"));
            }
            leaf_text.insert(idx, text);
        }
        if let Some(n) = nodes
            .iter()
            .enumerate()
            .find(|(i, n)| n.is_leaf() && !leaf_text.contains_key(i))
        {
            return Err(Error::parse(
                origin,
                0,
                format!("leaf {:?} has no TEXT", n.1.id),
            ));
        }
        if roots.is_empty() && !nodes.is_empty() {
            return Err(Error::parse(origin, 0, "no ROOT nodes"));
        }
        Ok(Self {
            nodes,
            by_id,
            roots,
            leaf_text,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&std::fs::read_to_string(path)?, &path.display().to_string())
    }

    /// Serializes back to the record format, parents before children.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let mut stack: Vec<usize> = self.roots.iter().rev().copied().collect();
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            let parent = n.parent.map_or("ROOT", |p| self.nodes[p].id.as_str());
            out.push_str(&format!("NODE {} {} {}\n", n.id, parent, n.name));
            stack.extend(n.children.iter().rev());
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(t) = self.leaf_text.get(&i) {
                out.push_str(&format!("TEXT {} {}\n", n.id, t));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn index(&self, id: &str) -> Result<usize> {
        self.by_id
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn leaf_text(&self, idx: usize) -> Option<&str> {
        self.leaf_text.get(&idx).map(String::as_str)
    }

    /// Leaf indices under `idx` in depth-first order; a leaf yields itself.
    pub fn leaf_indices(&self, idx: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![idx];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            if n.is_leaf() {
                out.push(i);
            } else {
                stack.extend(n.children.iter().rev());
            }
        }
        out
    }

    /// Names of every leaf in the subtree rooted at `id`.
    pub fn leafs(&self, id: &str) -> Result<BTreeSet<String>> {
        let idx = self.index(id)?;
        Ok(self
            .leaf_indices(idx)
            .into_iter()
            .map(|i| self.nodes[i].name.clone())
            .collect())
    }

    /// All strict descendants of `idx`.
    pub fn descendants(&self, idx: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.nodes[idx].children.iter().rev().copied().collect();
        while let Some(i) = stack.pop() {
            out.push(i);
            stack.extend(self.nodes[i].children.iter().rev());
        }
        out
    }

    /// Whether `ancestor` lies strictly above `idx`.
    pub fn is_strict_ancestor(&self, ancestor: usize, idx: usize) -> bool {
        let mut cur = self.nodes[idx].parent;
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.nodes[p].parent;
        }
        false
    }

    pub fn root_of(&self, idx: usize) -> usize {
        let mut cur = idx;
        while let Some(p) = self.nodes[cur].parent {
            cur = p;
        }
        cur
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WINE: &str = "\
NODE food ROOT food
NODE wine food wine
NODE merlot wine merlot
NODE cabernet wine cabernet
NODE pinot_noir wine pinot noir
NODE pinot_gris wine pinot gris
TEXT merlot Merlot is a red wine grape.
TEXT cabernet Cabernet is a red wine grape.
TEXT pinot_noir Pinot noir is a red wine grape.
TEXT pinot_gris Pinot gris is a white wine grape.
";

    #[test]
    fn leafs_of_wine() {
        let kb = HierarchyKb::parse(WINE, "t").unwrap();
        let got = kb.leafs("wine").unwrap();
        let want: BTreeSet<String> = ["merlot", "cabernet", "pinot noir", "pinot gris"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn leaf_is_its_own_leaf_set() {
        let kb = HierarchyKb::parse(WINE, "t").unwrap();
        assert_eq!(
            kb.leafs("merlot").unwrap().into_iter().collect::<Vec<_>>(),
            vec!["merlot"]
        );
    }

    #[test]
    fn unknown_node() {
        let kb = HierarchyKb::parse(WINE, "t").unwrap();
        assert!(matches!(kb.leafs("beer"), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn forward_parent_reference() {
        let src = "NODE b a b\nNODE a ROOT a\nTEXT b leaf.\n";
        let kb = HierarchyKb::parse(src, "t").unwrap();
        assert_eq!(kb.roots().len(), 1);
    }

    #[test]
    fn rejects_cycles_and_missing_text() {
        assert!(HierarchyKb::parse("NODE a b a\nNODE b a b\n", "t").is_err());
        assert!(HierarchyKb::parse("NODE a ROOT a\n", "t").is_err());
        assert!(HierarchyKb::parse("NODE a ROOT a\nNODE a ROOT a\nTEXT a x\n", "t").is_err());
    }

    #[test]
    fn file_roundtrip() {
        let kb = HierarchyKb::parse(WINE, "t").unwrap();
        let again = HierarchyKb::parse(&kb.to_file_string(), "rt").unwrap();
        assert_eq!(again.len(), kb.len());
        assert_eq!(again.leafs("wine").unwrap(), kb.leafs("wine").unwrap());
    }
}

//! Hierarchical POS tagsets.
//!
//! A tagset is a tree of at most three levels. Every node carries a short
//! uppercase label, and the *convention* string of a node is the `__`-join of
//! the labels on its root-to-node path (`V__VM__VF`). Annotators choose the
//! lowest applicable label; the upper levels are derived by walking to the
//! root, which is deterministic because labels are unique across the tree.
//!
//! Tagsets are loaded from a line-oriented definition:
//!
//! ```text
//! depth<TAB>label<TAB>name<TAB>comma-separated-examples
//! ```
//!
//! Children follow their parent immediately. Lines starting with `#` are
//! comments, except `#version<TAB>id`, which names the tagset version.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Separator between labels in a convention string.
pub const SEPARATOR: &str = "__";

/// Deepest level a tagset may have.
pub const MAX_DEPTH: u8 = 3;

const MAGAHI_DEFINITION: &str = include_str!("../data/magahi.tagset");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TagsetError {
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("line {line}: depth {depth} exceeds the maximum of {MAX_DEPTH}")]
    DepthExceeded { line: usize, depth: usize },
    #[error("tagset definition contains no categories")]
    EmptyTagset,
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TagError {
    #[error("unknown tag {0:?}")]
    UnknownTag(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
}

/// Index of a node inside its [`Tagset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagNode {
    id: NodeId,
    label: String,
    name: String,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    depth: u8,
    convention: String,
    examples: Vec<String>,
}

impl TagNode {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Human-readable category name, e.g. "Classifier".
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    /// 1 for top-level categories.
    pub fn depth(&self) -> u8 {
        self.depth
    }

    /// Full `__`-joined path from the top-level category down to this node.
    pub fn convention(&self) -> &str {
        &self.convention
    }

    /// Example words as printed in the definition. Informational only.
    pub fn examples(&self) -> &[String] {
        &self.examples
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn child_ids(&self) -> &[NodeId] {
        &self.children
    }
}

/// Where a tag came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Chosen or confirmed by a human annotator.
    Manual,
    /// Pre-filled by the lexicon autotagger.
    Auto,
    /// Proposed by an external source, pending review.
    Suggested,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Manual => "manual",
            Provenance::Auto => "auto",
            Provenance::Suggested => "suggested",
        }
    }

    /// True for tags a human still has to review.
    pub fn is_pending(self) -> bool {
        !matches!(self, Provenance::Manual)
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "manual" => Ok(Provenance::Manual),
            "auto" => Ok(Provenance::Auto),
            "suggested" => Ok(Provenance::Suggested),
            other => Err(format!("unknown provenance {other:?}")),
        }
    }
}

/// A tag attached to a token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TagAssignment {
    pub convention: String,
    pub leaf_label: String,
    pub provenance: Provenance,
    /// Whether the chosen node is a leaf of the tagset.
    pub is_leaf: bool,
}

impl TagAssignment {
    /// An assignment that has not been checked against any tagset. The leaf
    /// label is taken from the last convention segment.
    pub fn unchecked(convention: impl Into<String>, provenance: Provenance) -> Self {
        let convention = convention.into();
        let leaf_label = convention
            .rsplit(SEPARATOR)
            .next()
            .unwrap_or_default()
            .to_string();
        TagAssignment {
            convention,
            leaf_label,
            provenance,
            is_leaf: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code")]
pub enum TagFinding {
    UnknownTag { convention: String },
    NonLeafTag { convention: String },
    /// The stored leaf label disagrees with the convention's last segment.
    LeafMismatch { convention: String, leaf_label: String },
}

impl TagFinding {
    pub fn severity(&self) -> Severity {
        match self {
            TagFinding::NonLeafTag { .. } => Severity::Warning,
            TagFinding::UnknownTag { .. } | TagFinding::LeafMismatch { .. } => Severity::Error,
        }
    }
}

impl fmt::Display for TagFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagFinding::UnknownTag { convention } => write!(f, "unknown tag {convention:?}"),
            TagFinding::NonLeafTag { convention } => {
                write!(f, "{convention:?} is not a leaf category")
            }
            TagFinding::LeafMismatch {
                convention,
                leaf_label,
            } => write!(f, "leaf label {leaf_label:?} does not end {convention:?}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagReport {
    pub findings: Vec<TagFinding>,
}

impl TagReport {
    pub fn is_valid(&self) -> bool {
        !self.has_errors()
    }

    pub fn has_errors(&self) -> bool {
        self.findings
            .iter()
            .any(|f| f.severity() == Severity::Error)
    }
}

#[derive(Debug, Clone)]
pub struct Tagset {
    version: String,
    nodes: Vec<TagNode>,
    top_level: Vec<NodeId>,
    by_label: HashMap<String, NodeId>,
    by_convention: HashMap<String, NodeId>,
}

impl Tagset {
    /// The bundled Magahi tagset.
    pub fn magahi() -> Tagset {
        Tagset::from_definition(MAGAHI_DEFINITION).expect("bundled tagset definition is valid")
    }

    /// Raw text of the bundled Magahi definition.
    pub fn magahi_definition() -> &'static str {
        MAGAHI_DEFINITION
    }

    pub fn from_definition(definition: &str) -> Result<Tagset, TagsetError> {
        let mut tagset = Tagset {
            version: "unversioned".to_string(),
            nodes: Vec::new(),
            top_level: Vec::new(),
            by_label: HashMap::new(),
            by_convention: HashMap::new(),
        };
        // Most recent node seen at each depth; the parent of a depth-d node is
        // the open node at depth d-1.
        let mut open: Vec<NodeId> = Vec::new();

        for (idx, raw) in definition.lines().enumerate() {
            let line = idx + 1;
            if let Some(rest) = raw.strip_prefix('#') {
                if let Some(version) = rest.strip_prefix("version\t") {
                    tagset.version = version.trim().to_string();
                }
                continue;
            }
            if raw.trim().is_empty() {
                continue;
            }

            let fields: Vec<&str> = raw.split('\t').collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(TagsetError::Malformed {
                    line,
                    reason: format!("expected 3 or 4 tab-separated fields, found {}", fields.len()),
                });
            }
            let depth: usize = fields[0].trim().parse().map_err(|_| TagsetError::Malformed {
                line,
                reason: format!("depth {:?} is not a number", fields[0]),
            })?;
            if depth == 0 {
                return Err(TagsetError::Malformed {
                    line,
                    reason: "depth must be at least 1".into(),
                });
            }
            if depth > MAX_DEPTH as usize {
                return Err(TagsetError::DepthExceeded { line, depth });
            }
            if depth > open.len() + 1 {
                return Err(TagsetError::Malformed {
                    line,
                    reason: format!("depth {depth} node has no parent at depth {}", depth - 1),
                });
            }

            let label = fields[1].trim();
            if label.is_empty() || !label.bytes().all(|b| b.is_ascii_uppercase()) {
                return Err(TagsetError::Malformed {
                    line,
                    reason: format!("label {label:?} must be non-empty uppercase ASCII letters"),
                });
            }
            if tagset.by_label.contains_key(label) {
                return Err(TagsetError::DuplicateLabel(label.to_string()));
            }

            open.truncate(depth - 1);
            let parent = open.last().copied();
            let convention = match parent {
                Some(p) => format!("{}{SEPARATOR}{label}", tagset.nodes[p.0].convention),
                None => label.to_string(),
            };
            let examples = fields
                .get(3)
                .map(|e| {
                    e.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect()
                })
                .unwrap_or_default();

            let id = NodeId(tagset.nodes.len());
            tagset.nodes.push(TagNode {
                id,
                label: label.to_string(),
                name: fields[2].trim().to_string(),
                parent,
                children: Vec::new(),
                depth: depth as u8,
                convention: convention.clone(),
                examples,
            });
            match parent {
                Some(p) => tagset.nodes[p.0].children.push(id),
                None => tagset.top_level.push(id),
            }
            tagset.by_label.insert(label.to_string(), id);
            tagset.by_convention.insert(convention, id);
            open.push(id);
        }

        if tagset.nodes.is_empty() {
            return Err(TagsetError::EmptyTagset);
        }
        Ok(tagset)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn node(&self, id: NodeId) -> &TagNode {
        &self.nodes[id.0]
    }

    /// All nodes in definition order.
    pub fn nodes(&self) -> impl Iterator<Item = &TagNode> {
        self.nodes.iter()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TagNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn top_level(&self) -> impl Iterator<Item = &TagNode> {
        self.top_level.iter().map(|id| self.node(*id))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn by_label(&self, label: &str) -> Option<&TagNode> {
        self.by_label.get(label).map(|id| self.node(*id))
    }

    /// Resolves a full convention string such as `V__VM__VF`.
    pub fn parse_tag(&self, convention: &str) -> Result<&TagNode, TagError> {
        self.by_convention
            .get(convention)
            .map(|id| self.node(*id))
            .ok_or_else(|| TagError::UnknownTag(convention.to_string()))
    }

    /// Expands a label at any depth to its full convention string.
    pub fn derive_full_tag(&self, label: &str) -> Result<&str, TagError> {
        self.by_label(label)
            .map(TagNode::convention)
            .ok_or_else(|| TagError::UnknownLabel(label.to_string()))
    }

    pub fn is_leaf(&self, node: &TagNode) -> bool {
        node.is_leaf()
    }

    /// Children of `node` in definition order.
    pub fn children<'a>(&'a self, node: &'a TagNode) -> impl Iterator<Item = &'a TagNode> + 'a {
        node.children.iter().map(|id| self.node(*id))
    }

    /// The top-level category a node belongs to.
    pub fn top_ancestor<'a>(&'a self, node: &'a TagNode) -> &'a TagNode {
        let mut current = node;
        while let Some(p) = current.parent {
            current = self.node(p);
        }
        current
    }

    /// Builds an assignment from a label at any depth.
    pub fn assign_label(
        &self,
        label: &str,
        provenance: Provenance,
    ) -> Result<TagAssignment, TagError> {
        let node = self
            .by_label(label)
            .ok_or_else(|| TagError::UnknownLabel(label.to_string()))?;
        Ok(self.assignment_for(node, provenance))
    }

    /// Builds an assignment from a full convention string.
    pub fn assign_convention(
        &self,
        convention: &str,
        provenance: Provenance,
    ) -> Result<TagAssignment, TagError> {
        let node = self.parse_tag(convention)?;
        Ok(self.assignment_for(node, provenance))
    }

    fn assignment_for(&self, node: &TagNode, provenance: Provenance) -> TagAssignment {
        TagAssignment {
            convention: node.convention.clone(),
            leaf_label: node.label.clone(),
            provenance,
            is_leaf: node.is_leaf(),
        }
    }

    /// Checks an assignment. Unknown conventions are errors; in strict mode a
    /// non-leaf node used as a final tag is a warning.
    pub fn validate_assignment(&self, assignment: &TagAssignment, strict: bool) -> TagReport {
        let mut report = TagReport::default();
        match self.parse_tag(&assignment.convention) {
            Err(_) => report.findings.push(TagFinding::UnknownTag {
                convention: assignment.convention.clone(),
            }),
            Ok(node) => {
                if node.label != assignment.leaf_label {
                    report.findings.push(TagFinding::LeafMismatch {
                        convention: assignment.convention.clone(),
                        leaf_label: assignment.leaf_label.clone(),
                    });
                }
                if strict && !node.is_leaf() {
                    report.findings.push(TagFinding::NonLeafTag {
                        convention: assignment.convention.clone(),
                    });
                }
            }
        }
        report
    }

    /// Serializable view of the tree, in definition order.
    pub fn tree(&self) -> TagsetTree {
        TagsetTree {
            version: self.version.clone(),
            categories: self.top_level().map(|n| self.subtree(n)).collect(),
        }
    }

    fn subtree(&self, node: &TagNode) -> TagTreeNode {
        TagTreeNode {
            label: node.label.clone(),
            name: node.name.clone(),
            convention: node.convention.clone(),
            examples: node.examples.clone(),
            children: self.children(node).map(|c| self.subtree(c)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagsetTree {
    pub version: String,
    pub categories: Vec<TagTreeNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagTreeNode {
    pub label: String,
    pub name: String,
    pub convention: String,
    pub examples: Vec<String>,
    pub children: Vec<TagTreeNode>,
}

//! The hierarchical system: a tree of modules with components at the
//! leaves, plus the schedules that assign each component a cycle time.
//!
//! An [`Instance`] is plain data. Nothing stops you from building a
//! malformed one; [`validate`] lists everything wrong with it, and the
//! evaluation and solving entry points refuse instances that do not
//! validate.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::numtheory::PosInt;
use crate::rational::ExactRational;

/// Label of a node in the hierarchy. Ordering is plain string ordering.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(value: &str) -> Self {
        NodeId(value.to_string())
    }
}

impl From<String> for NodeId {
    fn from(value: String) -> Self {
        NodeId(value)
    }
}

/// Which components force a module to be maintained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriggerMode {
    /// Every component in the module's subtree.
    #[default]
    Descendants,
    /// Only components that are direct children of the module.
    DirectChildren,
}

impl fmt::Display for TriggerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TriggerMode::Descendants => "descendants",
            TriggerMode::DirectChildren => "direct-children",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Module,
    Component { cycle_limit: PosInt },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NodeRecord", into = "NodeRecord")]
pub struct Node {
    pub id: NodeId,
    pub setup_cost: ExactRational,
    pub kind: NodeKind,
}

impl Node {
    pub fn is_module(&self) -> bool {
        matches!(self.kind, NodeKind::Module)
    }

    pub fn is_component(&self) -> bool {
        !self.is_module()
    }

    pub fn cycle_limit(&self) -> Option<&PosInt> {
        match &self.kind {
            NodeKind::Component { cycle_limit } => Some(cycle_limit),
            NodeKind::Module => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindTag {
    Module,
    Component,
}

// On-disk shape of a node.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: NodeId,
    kind: KindTag,
    setup_cost: ExactRational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cycle_limit: Option<PosInt>,
}

impl TryFrom<NodeRecord> for Node {
    type Error = String;

    fn try_from(rec: NodeRecord) -> Result<Self, Self::Error> {
        let kind = match (rec.kind, rec.cycle_limit) {
            (KindTag::Module, None) => NodeKind::Module,
            (KindTag::Module, Some(_)) => {
                return Err(format!("module {} must not carry a cycle_limit", rec.id))
            }
            (KindTag::Component, Some(cycle_limit)) => NodeKind::Component { cycle_limit },
            (KindTag::Component, None) => {
                return Err(format!("component {} needs a cycle_limit", rec.id))
            }
        };
        Ok(Node {
            id: rec.id,
            setup_cost: rec.setup_cost,
            kind,
        })
    }
}

impl From<Node> for NodeRecord {
    fn from(node: Node) -> Self {
        let (kind, cycle_limit) = match node.kind {
            NodeKind::Module => (KindTag::Module, None),
            NodeKind::Component { cycle_limit } => (KindTag::Component, Some(cycle_limit)),
        };
        NodeRecord {
            id: node.id,
            kind,
            setup_cost: node.setup_cost,
            cycle_limit,
        }
    }
}

/// A hierarchical system.
///
/// The JSON form is
/// `{"root":"0","trigger_mode":"descendants","nodes":[...],"edges":[["0","1"],...]}`
/// with setup costs written as `"p"` or `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub root: NodeId,
    #[serde(default)]
    pub trigger_mode: TriggerMode,
    pub nodes: Vec<Node>,
    /// Parent to child.
    pub edges: Vec<(NodeId, NodeId)>,
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Canonical compact JSON. Dumping a parsed dump reproduces it byte for byte.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization cannot fail")
    }

    pub fn with_trigger_mode(mut self, mode: TriggerMode) -> Self {
        self.trigger_mode = mode;
        self
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| &n.id == id)
    }

    pub fn components(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_component())
    }

    pub fn modules(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_module())
    }

    /// Component ids in sorted order.
    pub fn component_ids(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self.components().map(|n| n.id.clone()).collect();
        ids.sort();
        ids
    }

    pub(crate) fn children(&self) -> BTreeMap<&NodeId, Vec<&NodeId>> {
        let mut map: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
        for (parent, child) in &self.edges {
            map.entry(parent).or_default().push(child);
        }
        map
    }

    /// Fails with [`Error::InvalidInstance`] unless [`validate`] is clean.
    pub fn ensure_valid(&self) -> Result<(), Error> {
        let violations = validate(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInstance(violations))
        }
    }
}

/// Fluent construction for hand-written instances.
///
/// ```
/// use fcmj::model::InstanceBuilder;
///
/// let instance = InstanceBuilder::new("0")
///     .module("0", 3)
///     .component("1", 2, 5)
///     .component("2", 1, 6)
///     .edge("0", "1")
///     .edge("0", "2")
///     .build();
/// assert!(fcmj::model::validate(&instance).is_empty());
/// ```
#[derive(Clone, Debug)]
pub struct InstanceBuilder {
    instance: Instance,
}

impl InstanceBuilder {
    pub fn new(root: impl Into<NodeId>) -> Self {
        InstanceBuilder {
            instance: Instance {
                root: root.into(),
                trigger_mode: TriggerMode::default(),
                nodes: Vec::new(),
                edges: Vec::new(),
            },
        }
    }

    pub fn module(mut self, id: impl Into<NodeId>, setup_cost: impl Into<ExactRational>) -> Self {
        self.instance.nodes.push(Node {
            id: id.into(),
            setup_cost: setup_cost.into(),
            kind: NodeKind::Module,
        });
        self
    }

    /// # Panics
    ///
    /// Panics if `cycle_limit` is zero.
    pub fn component(
        mut self,
        id: impl Into<NodeId>,
        setup_cost: impl Into<ExactRational>,
        cycle_limit: u64,
    ) -> Self {
        self.instance.nodes.push(Node {
            id: id.into(),
            setup_cost: setup_cost.into(),
            kind: NodeKind::Component {
                cycle_limit: PosInt::from(cycle_limit),
            },
        });
        self
    }

    pub fn component_with_limit(
        mut self,
        id: impl Into<NodeId>,
        setup_cost: impl Into<ExactRational>,
        cycle_limit: PosInt,
    ) -> Self {
        self.instance.nodes.push(Node {
            id: id.into(),
            setup_cost: setup_cost.into(),
            kind: NodeKind::Component { cycle_limit },
        });
        self
    }

    pub fn edge(mut self, parent: impl Into<NodeId>, child: impl Into<NodeId>) -> Self {
        self.instance.edges.push((parent.into(), child.into()));
        self
    }

    pub fn trigger_mode(mut self, mode: TriggerMode) -> Self {
        self.instance.trigger_mode = mode;
        self
    }

    pub fn build(self) -> Instance {
        self.instance
    }
}

/// Why the edge set fails to be an arborescence at `node`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeDefect {
    MultipleParents,
    RootHasParent,
    Cycle,
    Unreachable,
}

/// A broken structural invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum Violation {
    EmptyId,
    DuplicateId { node: NodeId },
    UnknownRoot { node: NodeId },
    RootNotModule { node: NodeId },
    UnknownEdgeEndpoint { parent: NodeId, child: NodeId },
    NotATree { node: NodeId, defect: TreeDefect },
    ComponentHasChildren { node: NodeId },
    LeafModule { node: NodeId },
    NegativeSetupCost { node: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId => write!(f, "a node has an empty id"),
            Violation::DuplicateId { node } => write!(f, "duplicate node id {node}"),
            Violation::UnknownRoot { node } => write!(f, "root {node} is not a node"),
            Violation::RootNotModule { node } => write!(f, "root {node} must be a module"),
            Violation::UnknownEdgeEndpoint { parent, child } => {
                write!(f, "edge {parent} -> {child} names an unknown node")
            }
            Violation::NotATree { node, defect } => {
                let why = match defect {
                    TreeDefect::MultipleParents => "has more than one parent",
                    TreeDefect::RootHasParent => "is the root but has a parent",
                    TreeDefect::Cycle => "lies on a cycle",
                    TreeDefect::Unreachable => "is not reachable from the root",
                };
                write!(f, "not a tree: node {node} {why}")
            }
            Violation::ComponentHasChildren { node } => {
                write!(f, "component {node} has children; components must be leaves")
            }
            Violation::LeafModule { node } => {
                write!(f, "module {node} is a leaf; every leaf must be a component")
            }
            Violation::NegativeSetupCost { node } => {
                write!(f, "node {node} has a negative setup cost")
            }
        }
    }
}

/// Non-fatal findings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "warning", rename_all = "kebab-case")]
pub enum Warning {
    /// The module has no triggering components and never costs anything.
    EmptyTriggerSet { node: NodeId },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::EmptyTriggerSet { node } => {
                write!(f, "module {node} has an empty trigger set and contributes nothing")
            }
        }
    }
}

/// Every violated structural invariant. Empty means valid.
pub fn validate(instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut by_id: BTreeMap<&NodeId, &Node> = BTreeMap::new();
    for node in &instance.nodes {
        if node.id.as_str().is_empty() {
            out.push(Violation::EmptyId);
        }
        if by_id.insert(&node.id, node).is_some() {
            out.push(Violation::DuplicateId {
                node: node.id.clone(),
            });
        }
        if node.setup_cost.is_negative() {
            out.push(Violation::NegativeSetupCost {
                node: node.id.clone(),
            });
        }
    }

    match by_id.get(&instance.root) {
        None => out.push(Violation::UnknownRoot {
            node: instance.root.clone(),
        }),
        Some(root) if !root.is_module() => out.push(Violation::RootNotModule {
            node: instance.root.clone(),
        }),
        Some(_) => {}
    }

    let mut parents: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    for (parent, child) in &instance.edges {
        if !by_id.contains_key(parent) || !by_id.contains_key(child) {
            out.push(Violation::UnknownEdgeEndpoint {
                parent: parent.clone(),
                child: child.clone(),
            });
            continue;
        }
        parents.entry(child).or_default().push(parent);
    }
    for (child, ps) in &parents {
        if **child == instance.root {
            out.push(Violation::NotATree {
                node: (*child).clone(),
                defect: TreeDefect::RootHasParent,
            });
        } else if ps.len() > 1 {
            out.push(Violation::NotATree {
                node: (*child).clone(),
                defect: TreeDefect::MultipleParents,
            });
        }
    }

    let children = instance.children();
    let mut reached: BTreeSet<&NodeId> = BTreeSet::new();
    if by_id.contains_key(&instance.root) {
        let mut queue = VecDeque::from([&instance.root]);
        reached.insert(&instance.root);
        while let Some(v) = queue.pop_front() {
            for c in children.get(v).into_iter().flatten() {
                if by_id.contains_key(*c) && reached.insert(c) {
                    queue.push_back(c);
                }
            }
        }
    }
    for node in by_id.keys() {
        if reached.contains(node) {
            continue;
        }
        // Follow parent links; coming back to a visited node means a cycle.
        let mut seen = BTreeSet::new();
        let mut cur = *node;
        let mut defect = TreeDefect::Unreachable;
        while let Some(p) = parents.get(cur).and_then(|ps| ps.first()) {
            if !seen.insert(cur) {
                defect = TreeDefect::Cycle;
                break;
            }
            cur = p;
        }
        out.push(Violation::NotATree {
            node: (*node).clone(),
            defect,
        });
    }

    for node in by_id.values() {
        let has_children = children
            .get(&node.id)
            .is_some_and(|cs| cs.iter().any(|c| by_id.contains_key(*c)));
        match (node.is_component(), has_children) {
            (true, true) => out.push(Violation::ComponentHasChildren {
                node: node.id.clone(),
            }),
            (false, false) => out.push(Violation::LeafModule {
                node: node.id.clone(),
            }),
            _ => {}
        }
    }

    out
}

/// Modules with empty trigger sets under the instance's trigger mode.
pub fn warnings(instance: &Instance) -> Vec<Warning> {
    instance
        .modules()
        .filter(|m| {
            trigger_set(instance, &m.id)
                .map(|s| s.is_empty())
                .unwrap_or(false)
        })
        .map(|m| Warning::EmptyTriggerSet { node: m.id.clone() })
        .collect()
}

/// Components whose maintenance forces `module` to be maintained, under the
/// instance's own trigger mode.
pub fn trigger_set(instance: &Instance, module: &NodeId) -> Result<BTreeSet<NodeId>, Error> {
    trigger_set_with(instance, module, instance.trigger_mode)
}

pub fn trigger_set_with(
    instance: &Instance,
    module: &NodeId,
    mode: TriggerMode,
) -> Result<BTreeSet<NodeId>, Error> {
    let node = instance
        .node(module)
        .ok_or_else(|| Error::UnknownNode(module.clone()))?;
    if !node.is_module() {
        return Err(Error::NotAModule(module.clone()));
    }
    let children = instance.children();
    let is_component = |id: &NodeId| instance.node(id).is_some_and(Node::is_component);

    let mut out = BTreeSet::new();
    match mode {
        TriggerMode::DirectChildren => {
            for c in children.get(module).into_iter().flatten() {
                if is_component(c) {
                    out.insert((*c).clone());
                }
            }
        }
        TriggerMode::Descendants => {
            let mut visited = BTreeSet::from([module]);
            let mut stack = vec![module];
            while let Some(v) = stack.pop() {
                for c in children.get(v).into_iter().flatten() {
                    if !visited.insert(c) {
                        continue;
                    }
                    if is_component(c) {
                        out.insert((*c).clone());
                    }
                    stack.push(c);
                }
            }
        }
    }
    Ok(out)
}

/// Cycle time per component. JSON form: `{"1":4,"2":6}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule(BTreeMap<NodeId, PosInt>);

impl Schedule {
    pub fn new() -> Self {
        Schedule(BTreeMap::new())
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schedule serialization cannot fail")
    }

    pub fn insert(&mut self, component: impl Into<NodeId>, cycle_time: PosInt) -> Option<PosInt> {
        self.0.insert(component.into(), cycle_time)
    }

    pub fn get(&self, component: &NodeId) -> Option<&PosInt> {
        self.0.get(component)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &PosInt)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks the domain is exactly the instance's components and every
    /// cycle time respects its limit.
    pub fn check_against(&self, instance: &Instance) -> Result<(), Error> {
        for node in instance.components() {
            let q = self
                .get(&node.id)
                .ok_or_else(|| Error::MissingCycleTime(node.id.clone()))?;
            let limit = node.cycle_limit().expect("component");
            if q > limit {
                return Err(Error::Infeasible {
                    component: node.id.clone(),
                    cycle_time: q.clone(),
                    cycle_limit: limit.clone(),
                });
            }
        }
        for id in self.0.keys() {
            if !instance.node(id).is_some_and(Node::is_component) {
                return Err(Error::UnexpectedScheduleEntry(id.clone()));
            }
        }
        Ok(())
    }
}

impl<K: Into<NodeId>> FromIterator<(K, u64)> for Schedule {
    /// # Panics
    ///
    /// Panics on a zero cycle time.
    fn from_iter<I: IntoIterator<Item = (K, u64)>>(iter: I) -> Self {
        Schedule(
            iter.into_iter()
                .map(|(k, q)| (k.into(), PosInt::from(q)))
                .collect(),
        )
    }
}

impl FromIterator<(NodeId, PosInt)> for Schedule {
    fn from_iter<I: IntoIterator<Item = (NodeId, PosInt)>>(iter: I) -> Self {
        Schedule(iter.into_iter().collect())
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

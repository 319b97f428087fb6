//! Arena-backed search tree over histories.
//!
//! History nodes alternate with action nodes: a history node owns one action
//! node per legal action, and each action node branches on the observation
//! that followed it. Node 0 is always the root.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionNode<A, O> {
    pub action: A,
    pub visits: u32,
    /// Mean discounted return of simulations that took this action.
    pub value: f64,
    pub children: Vec<(O, NodeId)>,
}

impl<A, O: PartialEq> ActionNode<A, O> {
    pub fn child(&self, observation: &O) -> Option<NodeId> {
        self.children.iter().find(|(o, _)| o == observation).map(|&(_, id)| id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryNode<A, O> {
    pub visits: u32,
    /// Mean discounted return of every simulation that passed through.
    pub value: f64,
    pub actions: Vec<ActionNode<A, O>>,
    pub(crate) expanded: bool,
}

impl<A, O> Default for HistoryNode<A, O> {
    fn default() -> Self {
        Self { visits: 0, value: 0.0, actions: Vec::new(), expanded: false }
    }
}

impl<A, O> HistoryNode<A, O> {
    pub fn is_expanded(&self) -> bool {
        self.expanded
    }

    pub(crate) fn record(&mut self, ret: f64) {
        self.visits += 1;
        self.value += (ret - self.value) / f64::from(self.visits);
    }
}

/// UCB1 over the action children of `node`.
///
/// Unvisited actions come first, lowest index first. Otherwise the argmax of
/// `Q(a) + c * sqrt(ln N / N(a))`, ties to the lowest index.
pub fn ucb1_select<A, O>(node: &HistoryNode<A, O>, ucb_c: f64) -> usize {
    debug_assert!(!node.actions.is_empty(), "ucb1_select on a node without actions");
    if let Some(i) = node.actions.iter().position(|a| a.visits == 0) {
        return i;
    }
    let log_n = f64::from(node.visits.max(1)).ln();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, a) in node.actions.iter().enumerate() {
        let score = a.value + ucb_c * (log_n / f64::from(a.visits)).sqrt();
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchTree<A, O> {
    nodes: Vec<HistoryNode<A, O>>,
}

impl<A, O> Default for SearchTree<A, O> {
    fn default() -> Self {
        Self::new()
    }
}

impl<A, O> SearchTree<A, O> {
    pub fn new() -> Self {
        Self { nodes: vec![HistoryNode::default()] }
    }

    pub fn root(&self) -> &HistoryNode<A, O> {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &HistoryNode<A, O> {
        &self.nodes[id.index()]
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut HistoryNode<A, O> {
        &mut self.nodes[id.index()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub(crate) fn push(&mut self) -> NodeId {
        let id = NodeId(u32::try_from(self.nodes.len()).expect("search tree exceeds u32 nodes"));
        self.nodes.push(HistoryNode::default());
        id
    }
}

impl<A: Clone + PartialEq, O: Clone + PartialEq> SearchTree<A, O> {
    /// Grandchild of `from` reached by `action` then `observation`.
    pub fn find(&self, from: NodeId, action: &A, observation: &O) -> Option<NodeId> {
        self.node(from).actions.iter().find(|a| &a.action == action).and_then(|a| a.child(observation))
    }

    /// Copy of the subtree rooted at `id`, renumbered in depth-first order.
    /// Two trees built this way from structurally identical subtrees compare
    /// equal.
    pub fn subtree(&self, id: NodeId) -> SearchTree<A, O> {
        let mut out = SearchTree { nodes: Vec::new() };
        self.copy_into(id, &mut out);
        out
    }

    fn copy_into(&self, id: NodeId, out: &mut SearchTree<A, O>) -> NodeId {
        let new_id = NodeId(out.nodes.len() as u32);
        let src = self.node(id);
        out.nodes.push(HistoryNode {
            visits: src.visits,
            value: src.value,
            actions: Vec::with_capacity(src.actions.len()),
            expanded: src.expanded,
        });
        for (ai, a) in src.actions.iter().enumerate() {
            out.nodes[new_id.index()].actions.push(ActionNode {
                action: a.action.clone(),
                visits: a.visits,
                value: a.value,
                children: Vec::with_capacity(a.children.len()),
            });
            for (o, child) in &a.children {
                let c = self.copy_into(*child, out);
                out.nodes[new_id.index()].actions[ai].children.push((o.clone(), c));
            }
        }
        new_id
    }

    /// Re-roots the tree at the history extended by `(action, observation)`,
    /// keeping every statistic of the retained subtree. A branch that was
    /// never simulated yields a fresh empty tree.
    pub fn prune(&self, action: &A, observation: &O) -> SearchTree<A, O> {
        match self.find(NodeId::ROOT, action, observation) {
            Some(id) => self.subtree(id),
            None => SearchTree::new(),
        }
    }
}

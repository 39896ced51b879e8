//! Dependency trees over vocabulary ids.

use std::fmt::Write as _;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    /// Vocabulary id, or `None` for a pad node (serialized as `-1`).
    pub token: Option<usize>,
    pub pos: String,
    pub children: Vec<usize>,
}

impl TreeNode {
    pub fn word(token: usize, pos: impl Into<String>) -> Self {
        TreeNode { token: Some(token), pos: pos.into(), children: Vec::new() }
    }

    pub fn pad() -> Self {
        TreeNode { token: None, pos: "_".into(), children: Vec::new() }
    }

    pub fn is_pad(&self) -> bool {
        self.token.is_none()
    }
}

/// A rooted tree. Construction checks that every node is reachable from the
/// root exactly once and that pad nodes have no real children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseTree {
    nodes: Vec<TreeNode>,
    root: usize,
}

impl ParseTree {
    pub fn new(nodes: Vec<TreeNode>, root: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Structure("empty tree".into()));
        }
        if root >= nodes.len() {
            return Err(Error::Structure(format!("root {root} out of range for {} nodes", nodes.len())));
        }
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            if seen[i] {
                return Err(Error::Structure(format!("node {i} reached twice (cycle or shared child)")));
            }
            seen[i] = true;
            for &c in &nodes[i].children {
                if c >= nodes.len() {
                    return Err(Error::Structure(format!("child {c} out of range")));
                }
                if nodes[i].is_pad() && !nodes[c].is_pad() {
                    return Err(Error::Structure(format!("pad node {i} has real child {c}")));
                }
                stack.push(c);
            }
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return Err(Error::Structure(format!("node {orphan} is not reachable from the root")));
        }
        Ok(ParseTree { nodes, root })
    }

    /// Builds a tree from CoNLL-style heads: `heads[i]` is the 1-based head
    /// of token `i`, 0 for the root.
    pub fn from_heads(tokens: &[usize], pos: &[String], heads: &[usize]) -> Result<Self> {
        let n = tokens.len();
        if n == 0 || pos.len() != n || heads.len() != n {
            return Err(Error::Structure("token, POS and head columns must be non-empty and equal length".into()));
        }
        let mut nodes: Vec<TreeNode> = tokens.iter().zip(pos).map(|(&t, p)| TreeNode::word(t, p.clone())).collect();
        let mut root = None;
        for (i, &h) in heads.iter().enumerate() {
            match h {
                0 if root.is_some() => {
                    return Err(Error::Structure(format!(
                        "multiple roots (tokens {} and {})",
                        root.unwrap() + 1,
                        i + 1
                    )))
                }
                0 => root = Some(i),
                h if h > n => {
                    return Err(Error::Structure(format!("token {} has head {h} out of range 0..={n}", i + 1)))
                }
                h => nodes[h - 1].children.push(i),
            }
        }
        let root = root.ok_or_else(|| Error::Structure("no root (HEAD 0) in sentence".into()))?;
        ParseTree::new(nodes, root).map_err(|e| match e {
            Error::Structure(m) => Error::Structure(format!("head cycle: {m}")),
            other => other,
        })
    }

    /// A tree whose root is `tokens[root]` and every other token is its child.
    pub fn flat(tokens: &[usize], root: usize) -> Result<Self> {
        let nodes = tokens
            .iter()
            .enumerate()
            .map(|(i, &t)| TreeNode {
                token: Some(t),
                pos: "X".into(),
                children: if i == root { (0..tokens.len()).filter(|&j| j != root).collect() } else { vec![] },
            })
            .collect();
        ParseTree::new(nodes, root)
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn real_len(&self) -> usize {
        self.nodes.iter().filter(|n| !n.is_pad()).count()
    }

    /// Children first, root last.
    pub fn post_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((i, expanded)) = stack.pop() {
            if expanded {
                out.push(i);
            } else {
                stack.push((i, true));
                for &c in self.nodes[i].children.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Number of real-node levels, root counted as depth 1.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut best = 0;
        let mut stack = vec![(self.root, 1usize)];
        while let Some((i, d)) = stack.pop() {
            if self.nodes[i].is_pad() {
                continue;
            }
            depth[i] = d;
            best = best.max(d);
            for &c in &self.nodes[i].children {
                stack.push((c, d + 1));
            }
        }
        best
    }

    /// Largest real-child count of any node.
    pub fn max_branching(&self) -> usize {
        self.nodes.iter().map(|n| n.children.iter().filter(|&&c| !self.nodes[c].is_pad()).count()).max().unwrap_or(0)
    }

    /// Token ids in node order, pads skipped.
    pub fn tokens(&self) -> Vec<usize> {
        self.nodes.iter().filter_map(|n| n.token).collect()
    }

    /// Drops pad nodes, keeping real nodes in pre-order.
    pub fn unpad(&self) -> Result<ParseTree> {
        if self.nodes[self.root].is_pad() {
            return Err(Error::Structure("tree consists only of padding".into()));
        }
        let mut nodes = Vec::new();
        self.copy_real(self.root, &mut nodes);
        ParseTree::new(nodes, 0)
    }

    fn copy_real(&self, i: usize, out: &mut Vec<TreeNode>) -> usize {
        let me = out.len();
        let src = &self.nodes[i];
        out.push(TreeNode { token: src.token, pos: src.pos.clone(), children: Vec::new() });
        for &c in &src.children {
            if !self.nodes[c].is_pad() {
                let ci = self.copy_real(c, out);
                out[me].children.push(ci);
            }
        }
        me
    }

    /// Rewrites every real token id through `f`.
    pub fn map_tokens(&self, mut f: impl FnMut(usize) -> usize) -> ParseTree {
        let nodes = self
            .nodes
            .iter()
            .map(|n| TreeNode { token: n.token.map(&mut f), pos: n.pos.clone(), children: n.children.clone() })
            .collect();
        ParseTree { nodes, root: self.root }
    }

    /// Nested-parenthesis form, e.g. `(5:VERB (3:PRON) (-1:_))`.
    pub fn to_sexpr(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(self.root, &mut s);
        s
    }

    fn write_sexpr(&self, i: usize, out: &mut String) {
        let n = &self.nodes[i];
        let tok = n.token.map(|t| t as i64).unwrap_or(-1);
        let _ = write!(out, "({tok}:{}", n.pos);
        for &c in &n.children {
            out.push(' ');
            self.write_sexpr(c, out);
        }
        out.push(')');
    }

    pub fn from_sexpr(text: &str) -> Result<ParseTree> {
        let mut p = SexprParser { s: text.as_bytes(), at: 0, nodes: Vec::new() };
        p.skip_ws();
        let root = p.node()?;
        p.skip_ws();
        if p.at != p.s.len() {
            return Err(Error::Format(format!("trailing input in tree at byte {}", p.at)));
        }
        ParseTree::new(p.nodes, root)
    }
}

struct SexprParser<'a> {
    s: &'a [u8],
    at: usize,
    nodes: Vec<TreeNode>,
}

impl SexprParser<'_> {
    fn skip_ws(&mut self) {
        while self.at < self.s.len() && self.s[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn err(&self, what: &str) -> Error {
        Error::Format(format!("tree syntax: {what} at byte {}", self.at))
    }

    fn node(&mut self) -> Result<usize> {
        if self.s.get(self.at) != Some(&b'(') {
            return Err(self.err("expected '('"));
        }
        self.at += 1;
        let start = self.at;
        while self.at < self.s.len() && !matches!(self.s[self.at], b' ' | b'(' | b')') {
            self.at += 1;
        }
        let label = std::str::from_utf8(&self.s[start..self.at]).map_err(|_| self.err("bad utf-8"))?;
        let (tok, pos) = label.split_once(':').ok_or_else(|| self.err("expected id:POS"))?;
        let tok: i64 = tok.parse().map_err(|_| self.err("bad token id"))?;
        let token = match tok {
            -1 => None,
            t if t >= 0 => Some(t as usize),
            _ => return Err(self.err("negative token id")),
        };
        let me = self.nodes.len();
        self.nodes.push(TreeNode { token, pos: pos.to_string(), children: Vec::new() });
        loop {
            self.skip_ws();
            match self.s.get(self.at) {
                Some(b')') => {
                    self.at += 1;
                    return Ok(me);
                }
                Some(b'(') => {
                    let c = self.node()?;
                    self.nodes[me].children.push(c);
                }
                _ => return Err(self.err("expected '(' or ')'")),
            }
        }
    }
}

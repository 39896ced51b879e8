//! Depth buckets and full-tree padding.

use crate::tree::{ParseTree, TreeNode};
use crate::{Error, Result};

pub const BUCKET_DEPTHS: [usize; 7] = [2, 4, 6, 8, 10, 12, 14];

/// Smallest bucket depth that holds a tree of `depth`, if any.
pub fn bucket_for_depth(depth: usize) -> Option<usize> {
    BUCKET_DEPTHS.iter().copied().find(|&d| d >= depth)
}

/// Node count of a full tree with `depth` levels and `branching` children
/// per internal node.
pub fn full_tree_size(depth: usize, branching: usize) -> usize {
    (0..depth).map(|level| branching.pow(level as u32)).sum()
}

#[derive(Clone, Debug)]
pub struct Bucket {
    pub max_depth: usize,
    /// Largest real-child count among members.
    pub branching: usize,
    /// Indices into the input slice, in input order.
    pub members: Vec<usize>,
    /// Padded members, parallel to `members`. Empty for plans made by
    /// [`plan_buckets`].
    pub trees: Vec<ParseTree>,
}

#[derive(Clone, Debug, Default)]
pub struct BucketPlan {
    pub buckets: Vec<Bucket>,
    /// Inputs deeper than the largest bucket.
    pub dropped: Vec<usize>,
}

/// Assigns each tree to its bucket without materializing padding.
pub fn plan_buckets(trees: &[ParseTree]) -> BucketPlan {
    let mut buckets: Vec<Bucket> = BUCKET_DEPTHS
        .iter()
        .map(|&d| Bucket { max_depth: d, branching: 1, members: Vec::new(), trees: Vec::new() })
        .collect();
    let mut dropped = Vec::new();
    for (i, t) in trees.iter().enumerate() {
        match bucket_for_depth(t.depth()) {
            Some(d) => {
                let b = buckets.iter_mut().find(|b| b.max_depth == d).expect("bucket exists");
                b.members.push(i);
                b.branching = b.branching.max(t.max_branching());
            }
            None => dropped.push(i),
        }
    }
    buckets.retain(|b| !b.members.is_empty());
    BucketPlan { buckets, dropped }
}

/// Buckets trees by depth and pads every member to the bucket's full shape.
pub fn bucketize_and_pad(trees: &[ParseTree]) -> Result<BucketPlan> {
    let mut plan = plan_buckets(trees);
    for b in &mut plan.buckets {
        b.trees = b.members.iter().map(|&i| pad_tree(&trees[i], b.max_depth, b.branching)).collect::<Result<_>>()?;
    }
    Ok(plan)
}

/// Embeds `tree` in a full `depth`-level tree with `branching` children per
/// internal node, laid out in heap order (children of slot `s` are
/// `s·b + 1 ..= s·b + b`). Real children keep their order and come first;
/// every other slot is a pad node.
pub fn pad_tree(tree: &ParseTree, depth: usize, branching: usize) -> Result<ParseTree> {
    if tree.depth() > depth || tree.max_branching() > branching || branching == 0 {
        return Err(Error::Contract(format!(
            "tree of depth {} and branching {} does not fit {depth}×{branching}",
            tree.depth(),
            tree.max_branching()
        )));
    }
    let size = full_tree_size(depth, branching);
    let internal = full_tree_size(depth - 1, branching);
    let mut nodes: Vec<TreeNode> = (0..size)
        .map(|s| TreeNode {
            token: None,
            pos: "_".into(),
            children: if s < internal { (s * branching + 1..=s * branching + branching).collect() } else { vec![] },
        })
        .collect();
    let mut stack = vec![(tree.root(), 0usize)];
    while let Some((src, slot)) = stack.pop() {
        let n = tree.node(src);
        nodes[slot].token = n.token;
        nodes[slot].pos = n.pos.clone();
        let real: Vec<usize> = n.children.iter().copied().filter(|&c| !tree.node(c).is_pad()).collect();
        for (k, c) in real.into_iter().enumerate() {
            stack.push((c, slot * branching + 1 + k));
        }
    }
    ParseTree::new(nodes, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(depth: usize) -> ParseTree {
        let heads: Vec<usize> = (0..depth).collect(); // token k's head is k (1-based k-1)
        ParseTree::from_heads(&vec![2; depth], &vec!["X".into(); depth], &heads).unwrap()
    }

    #[test]
    fn bucket_ladder() {
        assert_eq!(bucket_for_depth(1), Some(2));
        assert_eq!(bucket_for_depth(3), Some(4));
        assert_eq!(bucket_for_depth(14), Some(14));
        assert_eq!(bucket_for_depth(15), None);
    }

    #[test]
    fn deep_trees_are_dropped() {
        let plan = plan_buckets(&[chain(15), chain(3)]);
        assert_eq!(plan.dropped, vec![0]);
        assert_eq!(plan.buckets.len(), 1);
        assert_eq!(plan.buckets[0].max_depth, 4);
    }

    #[test]
    fn padded_chain_size_matches_count() {
        let t = chain(2);
        let padded = pad_tree(&t, 2, 2).unwrap();
        // brute-force count of a full binary tree with two levels: 1 + 2
        assert_eq!(padded.len(), 3);
        assert_eq!(padded.real_len(), 2);
        let padded = pad_tree(&t, 4, 3).unwrap();
        assert_eq!(padded.len(), 1 + 3 + 9 + 27);
        assert_eq!(padded.unpad().unwrap(), t);
    }

    #[test]
    fn bucket_members_share_shape() {
        let a = chain(3);
        let b = ParseTree::from_heads(&[2, 3, 4, 5], &vec!["X".into(); 4], &[0, 1, 1, 2]).unwrap();
        let plan = bucketize_and_pad(&[a.clone(), b.clone()]).unwrap();
        let bucket = &plan.buckets[0];
        assert_eq!(bucket.branching, 2);
        assert_eq!(bucket.trees[0].len(), bucket.trees[1].len());
        assert_eq!(bucket.trees[0].unpad().unwrap().to_sexpr(), a.to_sexpr());
        assert_eq!(bucket.trees[1].unpad().unwrap().to_sexpr(), b.to_sexpr());
    }

    #[test]
    fn too_big_for_shape_is_rejected() {
        assert!(pad_tree(&chain(3), 2, 2).is_err());
    }
}

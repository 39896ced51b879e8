//! Shared builders for the integration tests.
#![allow(dead_code)]

pub mod fixtures;
pub mod oracles;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use revdict::autodiff::{ParamStore, Tensor};
use revdict::data::{Dataset, Example};
use revdict::{ParseTree, TreeNode, Vocab};

/// `n` headwords `w0..`, each defined by a distinct 3-word gloss drawn from a
/// shared pool. Every gloss parses as `det adj noun` headed by the noun.
pub fn synthetic_dictionary(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<String> = (0..(n + 10)).map(|i| format!("g{i}")).collect();
    let mut vocab = Vocab::new();
    for i in 0..n {
        vocab.add(&format!("w{i}"));
    }
    for g in &pool {
        vocab.add(g);
    }
    let mut seen = std::collections::HashSet::new();
    let mut examples = Vec::new();
    for i in 0..n {
        let gloss: Vec<String> = loop {
            let g: Vec<String> = pool.choose_multiple(&mut rng, 3).cloned().collect();
            if seen.insert(g.clone()) {
                break g;
            }
        };
        let ids = vocab.ids_of(&gloss);
        let pos: Vec<String> = ["DET", "ADJ", "NOUN"].iter().map(|s| s.to_string()).collect();
        let tree = ParseTree::from_heads(&ids, &pos, &[3, 3, 0]).unwrap();
        examples.push(Example { headword: vocab.id(&format!("w{i}")), gloss: ids, tree: Some(tree) });
    }
    Dataset { vocab, examples }
}

/// Random tree with `n` real nodes over ids in `2..vocab`, tags from `tags`.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize, vocab: usize, tags: &[&str]) -> ParseTree {
    let mut nodes: Vec<TreeNode> =
        (0..n).map(|_| TreeNode::word(rng.gen_range(2..vocab), *tags.choose(rng).unwrap())).collect();
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        nodes[parent].children.push(i);
    }
    ParseTree::new(nodes, 0).unwrap()
}

pub fn uniform_tensor<R: Rng>(rng: &mut R, shape: &[usize], scale: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(-scale..scale)).collect()).unwrap()
}

pub fn assert_stores_bitwise_eq(a: &ParamStore, b: &ParamStore) {
    assert_eq!(a.len(), b.len());
    for ((_, na, ta), (_, nb, tb)) in a.iter().zip(b.iter()) {
        assert_eq!(na, nb);
        assert_eq!(ta.shape(), tb.shape(), "{na}");
        for (x, y) in ta.data().iter().zip(tb.data()) {
            assert_eq!(x.to_bits(), y.to_bits(), "{na}");
        }
    }
}

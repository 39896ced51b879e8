mod common;

use common::synthetic_dictionary;
use revdict::autodiff::{OptimizerKind, Tensor};
use revdict::data::{ConlluSentence, Dataset, Example, Polarity, PolarityExample};
use revdict::harness::{
    evaluate_topk, query, train_classifier, train_reverse_dict, Checkpoint, ClassifyMode, TrainConfig, TreeFallback,
};
use revdict::{Model, ModelConfig, ModelKind, ParseTree, Vocab};

fn quick(kind: ModelKind, epochs: usize) -> TrainConfig {
    let mut cfg = TrainConfig::new(kind);
    cfg.model.embed_dim = 8;
    cfg.model.hidden_dim = 16;
    cfg.model.gate_hidden = 4;
    cfg.epochs = epochs;
    cfg
}

fn bitwise(t: &Tensor) -> Vec<u64> {
    t.data().iter().map(|x| x.to_bits()).collect()
}

#[test]
fn zero_learning_rate_keeps_initial_parameters() {
    let data = synthetic_dictionary(8, 2);
    for kind in ModelKind::ALL {
        let mut cfg = quick(kind, 2);
        cfg.set_lr(0.0);
        let (ck, _) = train_reverse_dict(&data, &cfg).unwrap();
        let fresh = Model::new(cfg.model.clone(), data.vocab.clone(), cfg.seed).unwrap();
        for (id, name, t) in fresh.params.iter() {
            assert_eq!(bitwise(t), bitwise(ck.model.params.get(id)), "{kind} {name}");
        }
    }
}

#[test]
fn same_seed_same_metrics() {
    let data = synthetic_dictionary(8, 2);
    for kind in ModelKind::ALL {
        let cfg = quick(kind, 3);
        let (a, ma) = train_reverse_dict(&data, &cfg).unwrap();
        let (b, mb) = train_reverse_dict(&data, &cfg).unwrap();
        assert_eq!(ma.to_jsonl(), mb.to_jsonl(), "{kind}");
        assert_eq!(a.to_bytes(), b.to_bytes(), "{kind}");
    }
}

#[test]
fn separate_output_table_trains_independently() {
    let data = synthetic_dictionary(8, 2);
    let mut cfg = quick(ModelKind::TreeShared, 1);
    let (tied, _) = train_reverse_dict(&data, &cfg).unwrap();
    assert!(!tied.model.params.contains("out_embed"));

    cfg.model.separate_output = true;
    cfg.max_steps = Some(1);
    let (sep, _) = train_reverse_dict(&data, &cfg).unwrap();
    let fresh = Model::new(cfg.model.clone(), data.vocab.clone(), cfg.seed).unwrap();
    let moved = |name: &str| {
        let id = fresh.params.id(name).unwrap();
        bitwise(fresh.params.get(id)) != bitwise(sep.model.params.get(id))
    };
    assert!(moved("out_embed"));
    let (e, o) = (sep.model.params.id("embed").unwrap(), sep.model.params.id("out_embed").unwrap());
    assert_ne!(bitwise(sep.model.params.get(e)), bitwise(sep.model.params.get(o)));
}

#[test]
fn sliding_median_loss_does_not_increase_early_on() {
    let data = synthetic_dictionary(20, 1);
    let (_, m) =
        train_reverse_dict(&data, &TrainConfig { epochs: 20, ..TrainConfig::new(ModelKind::TreeShared) }).unwrap();
    let losses: Vec<f64> = m.epochs.iter().map(|e| e.loss).collect();
    assert_eq!(losses.len(), 20);
    let medians: Vec<f64> = losses
        .windows(5)
        .map(|w| {
            let mut w = w.to_vec();
            w.sort_by(f64::total_cmp);
            w[2]
        })
        .collect();
    for pair in medians.windows(2) {
        assert!(pair[1] <= pair[0], "{medians:?}");
    }
}

#[test]
fn overfit_model_scores_full_marks_and_k_equal_vocab_always_hits() {
    let data = synthetic_dictionary(20, 1);
    let (ck, _) =
        train_reverse_dict(&data, &TrainConfig { epochs: 300, ..TrainConfig::new(ModelKind::TreeShared) }).unwrap();
    let r = evaluate_topk(&ck.model, &data, 1).unwrap();
    assert_eq!(r.top1, 1.0);
    assert_eq!(r.examples, 20);
    let words = data.vocab.len() - 2;
    assert_eq!(evaluate_topk(&ck.model, &data, words).unwrap().topk, 1.0);
    assert!(evaluate_topk(&ck.model, &data, words + 1).is_err());
    assert!(evaluate_topk(&ck.model, &Dataset { vocab: data.vocab.clone(), examples: vec![] }, 1).is_err());

    // query with the first training gloss and its parse
    let ex = &data.examples[0];
    let forms: Vec<String> = ex.gloss.iter().map(|&i| data.vocab.word(i).unwrap().to_string()).collect();
    let parse = ConlluSentence {
        index: 0,
        line: 1,
        forms: forms.clone(),
        upos: vec!["DET".into(), "ADJ".into(), "NOUN".into()],
        heads: vec![3, 3, 0],
    };
    let res = query(&ck.model, &forms.join(" "), 3, Some(&parse), TreeFallback::Error).unwrap();
    assert_eq!(res.ranked[0].0, data.vocab.word(ex.headword).unwrap());
    assert!(res.tokens.iter().all(|t| !t.oov));

    assert!(query(&ck.model, "", 3, None, TreeFallback::Flat).is_err());
    assert!(query(&ck.model, "g1 g2", 3, None, TreeFallback::Error).is_err());
    let oov = query(&ck.model, "zzz qqq", 3, None, TreeFallback::Flat).unwrap();
    assert!(oov.tokens.iter().all(|t| t.oov));
    assert_eq!(oov.ranked.len(), 3);
    assert!(oov.ranked.iter().all(|(w, s)| w.starts_with('w') || w.starts_with('g') && s.is_finite()));
}

/// Tree model with identity composition and zero bias, so a one-word
/// sentence encodes to the word's own (non-negative) embedding row.
fn hand_built(vocab: &Vocab, rows: &[[f64; 2]]) -> Model {
    let mut cfg = ModelConfig::new(ModelKind::TreeShared);
    cfg.embed_dim = 2;
    let mut model = Model::new(cfg, vocab.clone(), 0).unwrap();
    let set = |m: &mut Model, name: &str, t: Tensor| {
        let id = m.params.id(name).unwrap();
        *m.params.get_mut(id) = t;
    };
    set(&mut model, "embed", Tensor::new(vec![rows.len(), 2], rows.concat()).unwrap());
    set(&mut model, "tree.w", Tensor::identity(2));
    set(&mut model, "tree.b", Tensor::zeros(vec![1, 2]));
    model
}

fn one_word(vocab: &Vocab, gloss: &str, head: &str) -> Example {
    let id = vocab.id(gloss);
    Example {
        headword: vocab.id(head),
        gloss: vec![id],
        tree: Some(ParseTree::from_heads(&[id], &["NOUN".to_string()], &[0]).unwrap()),
    }
}

#[test]
fn five_hand_ranked_examples() {
    let mut vocab = Vocab::new();
    for w in ["a", "b", "c", "d", "e"] {
        vocab.add(w);
    }
    // PAD, UNK (large, must never be ranked), a, b, c, d, e
    let rows = [[0.0, 0.0], [5.0, 5.0], [1.0, 0.0], [0.0, 1.0], [0.9, 0.5], [0.2, 0.1], [0.5, 0.5]];
    let model = hand_built(&vocab, &rows);
    // gloss → true word, and the rank of the true word worked out by hand:
    //   a → a: a 1.00 first                                 rank 1
    //   b → c: b 1.00, c 0.50 = e 0.50, lower id first      rank 2
    //   d → e: c 0.23, a 0.20, e 0.15                       rank 3
    //   e → d: c 0.70, a = b = e 0.50, d 0.15               rank 5
    //   c → c: c 1.06 first                                 rank 1
    let examples = vec![
        one_word(&vocab, "a", "a"),
        one_word(&vocab, "b", "c"),
        one_word(&vocab, "d", "e"),
        one_word(&vocab, "e", "d"),
        one_word(&vocab, "c", "c"),
    ];
    let test = Dataset { vocab: vocab.clone(), examples };
    let r = evaluate_topk(&model, &test, 2).unwrap();
    assert_eq!((r.top1, r.topk, r.top3), (0.4, 0.6, 0.8));
    assert_eq!(evaluate_topk(&model, &test, 4).unwrap().topk, 0.8);
    assert_eq!(evaluate_topk(&model, &test, 5).unwrap().topk, 1.0);
}

fn sentence(word: &str, label: Polarity) -> PolarityExample {
    PolarityExample {
        tokens: vec![word.to_string()],
        label,
        parse: Some(ConlluSentence {
            index: 0,
            line: 1,
            forms: vec![word.to_string()],
            upos: vec!["ADJ".into()],
            heads: vec![0],
        }),
    }
}

/// Positive words live on the first axis and negative words on the second.
fn separable_base() -> (Checkpoint, Vec<PolarityExample>) {
    let pos = ["good", "kind", "warm", "bright"];
    let neg = ["bad", "cruel", "cold", "dull", "sad"];
    let mut vocab = Vocab::new();
    let mut rows = vec![[0.0, 0.0], [0.0, 0.0]];
    for (i, w) in pos.iter().enumerate() {
        vocab.add(w);
        rows.push([1.0 + 0.1 * i as f64, 0.2]);
    }
    for (i, w) in neg.iter().enumerate() {
        vocab.add(w);
        rows.push([0.2, 1.0 + 0.1 * i as f64]);
    }
    let model = hand_built(&vocab, &rows);
    let mut cfg = TrainConfig::new(ModelKind::TreeShared);
    cfg.model = model.config.clone();
    let data = pos
        .iter()
        .map(|w| sentence(w, Polarity::Positive))
        .chain(neg.iter().map(|w| sentence(w, Polarity::Negative)))
        .collect();
    (Checkpoint { config: cfg, model, step: 0 }, data)
}

#[test]
fn frozen_head_with_zero_lr_predicts_the_majority_class() {
    let (base, data) = separable_base();
    let mut cfg = base.config.clone();
    cfg.set_lr(0.0);
    cfg.epochs = 3;
    let (_, m) = train_classifier(&data, &data, ClassifyMode::Frozen, Some(&base), &cfg).unwrap();
    for e in &m.epochs {
        assert_eq!(e.train_acc, Some(5.0 / 9.0));
    }
}

#[test]
fn frozen_head_separates_separable_embeddings() {
    let (base, data) = separable_base();
    let mut cfg = base.config.clone();
    cfg.optimizer = OptimizerKind::Sgd { lr: 2.0 };
    cfg.epochs = 200;
    let (ck, m) = train_classifier(&data, &[], ClassifyMode::Frozen, Some(&base), &cfg).unwrap();
    assert_eq!(m.last().unwrap().train_acc, Some(1.0));
    for (id, name, t) in base.model.params.iter() {
        assert_eq!(bitwise(t), bitwise(ck.model.params.get(id)), "{name}");
    }
}

#[test]
fn transfer_modes_need_a_base() {
    let (_, data) = separable_base();
    let cfg = quick(ModelKind::TreeShared, 1);
    for mode in [ClassifyMode::Frozen, ClassifyMode::FineTune] {
        let err = train_classifier(&data, &[], mode, None, &cfg).unwrap_err();
        assert!(err.to_string().contains("base checkpoint"), "{err}");
    }
    assert!(train_classifier(&data, &[], ClassifyMode::EndToEnd, None, &cfg).is_ok());
}

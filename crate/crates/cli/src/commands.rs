use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use revdict::autodiff::{AdamConfig, OptimizerKind};
use revdict::data::dataset::DATASET_HEADER;
use revdict::data::polarity::attach_parses;
use revdict::data::{
    build_dataset, load_polarity, parse_webster, read_conllu_sentences, split_train_test, ConlluDoc, Dataset, Polarity,
    PrepareOptions,
};
use revdict::harness::{
    evaluate_topk, load_checkpoint, save_checkpoint, train_classifier, train_reverse_dict, ClassifyMode, Counters,
    Metrics, TrainConfig, TreeFallback, CHECKPOINT_VERSION,
};
use revdict::ModelKind;

use crate::args::{ClassifyArgs, EvalArgs, InspectArgs, PrepareArgs, QueryArgs, TrainArgs};

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn read_parses(path: &Path) -> Result<ConlluDoc> {
    let doc = read_conllu_sentences(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    for e in &doc.errors {
        eprintln!("warning: {}: {e}", path.display());
    }
    Ok(doc)
}

/// A dataset written by `prepare`, or Webster-format text with optional parses.
fn load_dataset(path: &Path, conllu: Option<&Path>) -> Result<Dataset> {
    let mut first = String::new();
    open(path)?.read_line(&mut first).with_context(|| format!("reading {}", path.display()))?;
    if first.trim() == DATASET_HEADER {
        if conllu.is_some() {
            bail!("--conllu applies to Webster-format text, but {} is a prepared dataset", path.display());
        }
        return Dataset::load(path).with_context(|| format!("loading {}", path.display()));
    }
    let defs = parse_webster(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    let doc = conllu.map(read_parses).transpose()?;
    let (data, _) = build_dataset(&defs, PrepareOptions { parses: doc.as_ref(), ..Default::default() })
        .with_context(|| format!("building examples from {}", path.display()))?;
    Ok(data)
}

fn print_counters(c: &Counters) {
    if *c != Counters::default() {
        println!("dropped {}, truncated {}, unseen POS {}", c.drops, c.truncations, c.unseen_pos);
    }
}

fn write_metrics(metrics: &Metrics, path: &Path) -> Result<()> {
    metrics.write_jsonl(path).with_context(|| format!("writing metrics to {}", path.display()))
}

pub fn prepare(a: PrepareArgs) -> Result<()> {
    let defs = parse_webster(open(&a.dict)?).with_context(|| format!("reading {}", a.dict.display()))?;
    let doc = a.conllu.as_deref().map(read_parses).transpose()?;
    let opts = PrepareOptions { parses: doc.as_ref(), vocab: None, augment: a.augment, seed: a.seed };
    let (data, stats) = build_dataset(&defs, opts)?;
    data.save(&a.out)?;
    println!(
        "definitions {}, records {}, vocabulary {}, with parse {}",
        stats.definitions,
        stats.records,
        data.vocab.len(),
        data.examples.iter().filter(|e| e.tree.is_some()).count()
    );
    if stats.missing_trees > 0 {
        println!("skipped malformed parses {}", stats.missing_trees);
    }
    println!("wrote {}", a.out.display());
    Ok(())
}

fn optimizer(name: &str, lr: f64) -> Result<OptimizerKind> {
    Ok(match name {
        "adam" => OptimizerKind::Adam(AdamConfig { lr, ..AdamConfig::default() }),
        "sgd" => OptimizerKind::Sgd { lr },
        other => bail!("unknown optimizer {other:?}"),
    })
}

fn default_metrics_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".metrics.jsonl");
    PathBuf::from(p)
}

pub fn train(a: TrainArgs) -> Result<()> {
    let kind: ModelKind = a.model.parse()?;
    let mut cfg = TrainConfig::new(kind);
    cfg.model.embed_dim = a.embed_dim;
    cfg.model.hidden_dim = a.hidden_dim;
    cfg.model.gate_hidden = a.gate_hidden;
    cfg.model.separate_output = a.wout_separate;
    cfg.optimizer = optimizer(&a.optimizer, a.lr)?;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.max_steps = a.max_steps;
    cfg.seed = a.seed;

    let data = load_dataset(&a.data, a.conllu.as_deref())?;
    let (ck, metrics) = train_reverse_dict(&data, &cfg)?;
    print!("{}", metrics.table());
    print_counters(&metrics.counters);
    save_checkpoint(&ck, &a.out)?;
    let mpath = a.metrics.unwrap_or_else(|| default_metrics_path(&a.out));
    write_metrics(&metrics, &mpath)?;
    println!("wrote {} after {} steps", a.out.display(), ck.step);
    Ok(())
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let ck = load_checkpoint(&a.checkpoint)?;
    let test = load_dataset(&a.test, a.conllu.as_deref())?;
    let r = evaluate_topk(&ck.model, &test, a.k)?;
    println!("examples {}", r.examples);
    println!("top-1 {:.3}", r.top1);
    println!("top-3 {:.3}", r.top3);
    if a.k != 1 && a.k != 3 {
        println!("top-{} {:.3}", a.k, r.topk);
    }
    print_counters(&r.counters);
    Ok(())
}

fn answer(out: &mut impl Write, model: &revdict::Model, text: &str, k: usize, doc: Option<&ConlluDoc>) -> Result<()> {
    let parse = doc.and_then(|d| d.sentences.first());
    let res = revdict::harness::query(model, text, k, parse, TreeFallback::Flat)?;
    let shown: Vec<String> =
        res.tokens.iter().map(|t| if t.oov { format!("{}[oov]", t.word) } else { t.word.clone() }).collect();
    writeln!(out, "query: {}", shown.join(" "))?;
    for (i, (word, score)) in res.ranked.iter().enumerate() {
        writeln!(out, "{:>3}  {word}  {score:.4}", i + 1)?;
    }
    Ok(())
}

pub fn query(a: QueryArgs) -> Result<()> {
    let ck = load_checkpoint(&a.checkpoint)?;
    let doc = a.conllu.as_deref().map(read_parses).transpose()?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Some(text) = &a.definition {
        return answer(&mut out, &ck.model, text, a.k, doc.as_ref());
    }
    if doc.is_some() {
        bail!("--conllu needs a definition argument");
    }
    for line in std::io::stdin().lock().lines() {
        let line = line.context("reading stdin")?;
        if line.trim().is_empty() {
            continue;
        }
        if let Err(e) = answer(&mut out, &ck.model, &line, a.k, None) {
            eprintln!("error: {}", crate::one_line(&e));
        }
        out.flush()?;
    }
    Ok(())
}

pub fn classify(a: ClassifyArgs) -> Result<()> {
    let mode: ClassifyMode = a.mode.parse()?;
    let mut examples = load_polarity(open(&a.pos)?, open(&a.neg)?)?;
    for (label, path) in [(Polarity::Positive, &a.pos_conllu), (Polarity::Negative, &a.neg_conllu)] {
        if let Some(p) = path {
            attach_parses(&mut examples, label, &read_parses(p)?).with_context(|| format!("{}", p.display()))?;
        }
    }
    let base = a.base.as_deref().map(load_checkpoint).transpose()?;
    if !(0.0..1.0).contains(&a.test_fraction) {
        bail!("test fraction must lie in [0, 1), got {}", a.test_fraction);
    }
    let (train, test) = split_train_test(&examples, a.test_fraction, a.seed);

    let mut cfg = TrainConfig::new(a.model.parse()?);
    cfg.model.embed_dim = a.embed_dim;
    cfg.model.hidden_dim = a.hidden_dim;
    cfg.epochs = a.epochs;
    cfg.set_lr(a.lr);
    cfg.batch_size = a.batch_size;
    cfg.seed = a.seed;
    let (ck, metrics) = train_classifier(&train, &test, mode, base.as_ref(), &cfg)?;
    print!("{}", metrics.table());
    print_counters(&metrics.counters);
    if let Some(last) = metrics.last() {
        let acc = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!("{mode}: train accuracy {} test accuracy {}", acc(last.train_acc), acc(last.test_acc));
    }
    if let Some(out) = &a.out {
        save_checkpoint(&ck, out)?;
        println!("wrote {}", out.display());
    }
    if let Some(p) = &a.metrics {
        write_metrics(&metrics, p)?;
    }
    Ok(())
}

pub fn inspect(a: InspectArgs) -> Result<()> {
    let ck = load_checkpoint(&a.checkpoint)?;
    let digest: String = ck.config_digest().iter().map(|b| format!("{b:02x}")).collect();
    println!("format version {CHECKPOINT_VERSION}");
    println!("config digest {digest}");
    println!("steps {}", ck.step);
    println!("vocabulary {} (including PAD and UNK)", ck.model.vocab.len());
    println!("classifier head {}", if ck.model.classifier.is_some() { "yes" } else { "no" });
    println!("[config]");
    for (k, v) in ck.config.to_kv() {
        println!("{k}={v}");
    }
    println!("[parameters]");
    let mut total = 0;
    for (_, name, t) in ck.model.params.iter() {
        total += t.numel();
        println!("{name} {:?}", t.shape());
    }
    println!("total {total}");
    Ok(())
}

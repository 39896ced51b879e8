use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const DICT: &str = "\
CAT
Cat, n.

Defn: a small furry pet

DOG
Dog, n.

Defn: a loyal barking pet

OWL
Owl, n.

Defn: a wise night bird

CROW
Crow, n.

Defn: a black noisy bird

ROSE
Rose, n.

Defn: a red garden flower
";

fn conllu_for(dict: &str) -> String {
    let mut out = String::new();
    for line in dict.lines().filter_map(|l| l.strip_prefix("Defn: ")) {
        let words: Vec<&str> = line.split_whitespace().collect();
        let last = words.len();
        for (i, w) in words.iter().enumerate() {
            let (pos, head) = if i + 1 == last {
                ("NOUN", 0)
            } else if i == 0 {
                ("DET", last)
            } else {
                ("ADJ", last)
            };
            out.push_str(&format!("{}\t{w}\t_\t{pos}\t_\t_\t{head}\tdep\t_\t_\n", i + 1));
        }
        out.push('\n');
    }
    out
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_revdict"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        fs::write(root.join("dict.txt"), DICT).unwrap();
        fs::write(root.join("dict.conllu"), conllu_for(DICT)).unwrap();
        Fixture { _dir: dir, root }
    }

    fn p(&self, name: &str) -> String {
        self.root.join(name).display().to_string()
    }

    fn prepare(&self, out: &str, augment: &str, seed: &str) -> Output {
        run(&[
            "prepare",
            "--dict",
            &self.p("dict.txt"),
            "--conllu",
            &self.p("dict.conllu"),
            "--out",
            &self.p(out),
            "--augment",
            augment,
            "--seed",
            seed,
        ])
    }

    /// Overfits a tree model on the five definitions.
    fn trained(&self) -> String {
        assert!(self.prepare("data.tsv", "1", "0").status.success());
        let o = run(&[
            "train",
            "--model",
            "tree_shared",
            "--data",
            &self.p("data.tsv"),
            "--epochs",
            "300",
            "--lr",
            "0.01",
            "--embed-dim",
            "8",
            "--out",
            &self.p("ck.bin"),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        self.p("ck.bin")
    }
}

fn read(path: &str) -> Vec<u8> {
    fs::read(Path::new(path)).unwrap()
}

#[test]
fn eval_on_the_overfit_dictionary_prints_full_marks() {
    let f = Fixture::new();
    let ck = f.trained();
    let o = run(&["eval", "--checkpoint", &ck, "--test", &f.p("data.tsv"), "--k", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("top-1 1.000"), "{}", stdout(&o));

    // raw Webster text plus parses works as a test set too
    let o = run(&["eval", "--checkpoint", &ck, "--test", &f.p("dict.txt"), "--conllu", &f.p("dict.conllu")]);
    assert!(stdout(&o).contains("top-1 1.000"), "{}", stdout(&o));

    let o = run(&["inspect", "--checkpoint", &ck]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("model=tree_shared") && text.contains("tree.w [8, 8]"), "{text}");
}

#[test]
fn query_repl_ranks_and_flags_unknown_words() {
    let f = Fixture::new();
    let ck = f.trained();
    let mut child = bin()
        .args(["query", "--checkpoint", &ck, "--k", "2"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"a wise night bird\n\n...\na zzz pet\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "query: a wise night bird");
    let first: Vec<&str> = lines[1].split_whitespace().collect();
    assert_eq!(first[..2], ["1", "owl"]);
    assert_eq!(first[2].split('.').nth(1).unwrap().len(), 4, "{}", lines[1]);
    assert_eq!(lines[3], "query: a zzz[oov] pet");
    assert_eq!(lines.len(), 6);
    // the punctuation-only line is reported and skipped
    assert_eq!(stderr(&o).lines().count(), 1);
    assert!(stderr(&o).starts_with("error: "));
}

#[test]
fn identical_invocations_write_identical_files() {
    let f = Fixture::new();
    assert!(f.prepare("a.tsv", "10", "3").status.success());
    assert!(f.prepare("b.tsv", "10", "3").status.success());
    assert_eq!(read(&f.p("a.tsv")), read(&f.p("b.tsv")));
    assert!(f.prepare("c.tsv", "10", "4").status.success());
    assert_ne!(read(&f.p("a.tsv")), read(&f.p("c.tsv")));

    for out in ["x.bin", "y.bin"] {
        let o = run(&[
            "train",
            "--model",
            "lstm",
            "--data",
            &f.p("a.tsv"),
            "--epochs",
            "2",
            "--hidden-dim",
            "8",
            "--embed-dim",
            "4",
            "--seed",
            "9",
            "--out",
            &f.p(out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(read(&f.p("x.bin")), read(&f.p("y.bin")));
    assert_eq!(read(&f.p("x.bin.metrics.jsonl")), read(&f.p("y.bin.metrics.jsonl")));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let f = Fixture::new();
    assert!(f.prepare("data.tsv", "1", "0").status.success());
    fs::write(
        f.root.join("run.cfg"),
        format!(
            "# training run\nmodel = tree_gated\ndata = {}\nepochs = 3\nembed_dim = 4\nwout_separate = true\n",
            f.p("data.tsv")
        ),
    )
    .unwrap();
    let o = run(&["train", "--config", &f.p("run.cfg"), "--epochs", "1", "--out", &f.p("ck.bin")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let info = stdout(&run(&["inspect", "--checkpoint", &f.p("ck.bin")]));
    assert!(info.contains("model=tree_gated"), "{info}");
    assert!(info.contains("epochs=1"), "{info}");
    assert!(info.contains("embed_dim=4"), "{info}");
    assert!(info.contains("separate_output=true"), "{info}");

    fs::write(f.root.join("bad.cfg"), "colour = blue\n").unwrap();
    let o = run(&["train", "--config", &f.p("bad.cfg"), "--out", &f.p("z.bin")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn exit_codes_and_single_line_errors() {
    let o = run(&["train", "--model", "tree_shared", "--data", "missing.txt", "--out", "never.bin"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).lines().count(), 1, "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error: ") && stderr(&o).contains("missing.txt"));

    let o = run(&["train", "--bogus-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: "));
    assert!(stderr(&o).contains("Usage:"));

    let o = run(&["prepare", "--dict", "d", "--out", "o", "--augment", "7"]);
    assert_eq!(o.status.code(), Some(2));

    let f = Fixture::new();
    let o = run(&["classify", "--mode", "frozen", "--pos", &f.p("dict.txt"), "--neg", &f.p("dict.txt")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("base checkpoint"), "{}", stderr(&o));
}

#[test]
fn help_lists_every_flag_with_defaults() {
    for (sub, flags) in [
        ("prepare", &["--dict", "--conllu", "--out", "--augment", "--seed"][..]),
        ("train", &["--model", "--data", "--epochs", "--lr", "--wout-separate", "--seed", "--out"][..]),
        ("eval", &["--checkpoint", "--test", "--k", "--seed"][..]),
        ("query", &["--checkpoint", "--k", "--seed", "[DEFINITION]"][..]),
        ("classify", &["--mode", "--base", "--pos", "--neg", "--seed"][..]),
        ("inspect", &["--checkpoint", "--seed"][..]),
    ] {
        let o = run(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for flag in flags {
            assert!(text.contains(flag), "{sub} --help lacks {flag}:\n{text}");
        }
        assert!(text.contains("[default: 0]"), "{sub}: seed default missing");
    }
    let train = stdout(&run(&["train", "--help"]));
    for d in ["[default: tree_shared]", "[default: 10]", "[default: 0.001]", "[default: 32]", "[default: 256]"] {
        assert!(train.contains(d), "{d}");
    }
}

#[test]
fn classify_end_to_end_reports_accuracies() {
    let dir = tempfile::tempdir().unwrap();
    let pos = dir.path().join("pos.txt");
    let neg = dir.path().join("neg.txt");
    fs::write(&pos, "good fine film\nwarm kind story\ngood story\nkind film\nfine warm tale\n").unwrap();
    fs::write(&neg, "bad dull film\ncold cruel story\nbad story\ndull film\ncruel cold tale\n").unwrap();
    let o = run(&[
        "classify",
        "--pos",
        pos.to_str().unwrap(),
        "--neg",
        neg.to_str().unwrap(),
        "--epochs",
        "3",
        "--hidden-dim",
        "8",
        "--embed-dim",
        "4",
        "--test-fraction",
        "0.2",
        "--seed",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("end_to_end: train accuracy"), "{}", stdout(&o));
}

//! Definition extraction from the Gutenberg plain-text Webster's dictionary.
//!
//! Heuristic:
//! * a headword line consists only of uppercase letters, apostrophes,
//!   hyphens and spaces, with `;` separating variant spellings;
//! * the text is split into blank-line separated paragraphs;
//! * under the current headword, every paragraph starting with `Defn:` or a
//!   sense number (`1.`, `2.`, ...) yields one definition, made of the first
//!   sentence of the paragraph with leading `(Domain.)` labels removed;
//! * a numbered paragraph with no text of its own (`1. (Zoöl.)`) hands its
//!   sense to the `Defn:` paragraph that follows;
//! * every variant of a multi-variant headword gets its own copy.

use std::io::BufRead;

use super::tokenize::tokenize;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub headword: String,
    pub gloss: Vec<String>,
    /// 1-based line where the definition paragraph starts.
    pub line: usize,
}

pub fn is_headword_line(line: &str) -> bool {
    let t = line.trim();
    !t.is_empty()
        && t.chars().any(|c| c.is_alphabetic())
        && t.chars().all(|c| (c.is_alphabetic() && c.is_uppercase()) || matches!(c, '\'' | '-' | ' ' | ';'))
}

fn headword_variants(line: &str) -> Vec<String> {
    line.split(';').map(|v| v.trim().to_lowercase()).filter(|v| !v.is_empty()).collect()
}

/// `"12. rest"` → `Some("rest")`
fn strip_sense_number(p: &str) -> Option<&str> {
    let digits = p.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    p[digits..].strip_prefix('.').map(str::trim_start)
}

fn strip_labels(mut s: &str) -> &str {
    loop {
        s = s.trim_start();
        if s.starts_with('(') {
            if let Some(end) = s.find(')') {
                s = &s[end + 1..];
                continue;
            }
        }
        return s;
    }
}

fn first_sentence(s: &str) -> &str {
    let b = s.as_bytes();
    for i in 0..b.len() {
        if b[i] == b'.' && (i + 1 == b.len() || b[i + 1].is_ascii_whitespace()) {
            return &s[..i];
        }
    }
    s
}

fn definition_text(paragraph: &str) -> Option<&str> {
    let body = if let Some(rest) = paragraph.strip_prefix("Defn:") {
        rest
    } else {
        // "2. (Zoöl.) Defn: ..." carries its labels before the marker
        let rest = strip_labels(strip_sense_number(paragraph)?);
        rest.strip_prefix("Defn:").unwrap_or(rest)
    };
    Some(first_sentence(strip_labels(body)).trim())
}

pub fn parse_webster<R: BufRead>(reader: R) -> Result<Vec<Definition>> {
    let mut out = Vec::new();
    let mut headwords: Vec<String> = Vec::new();
    let mut para = String::new();
    let mut para_line = 0;

    let flush = |para: &mut String, line: usize, heads: &[String], out: &mut Vec<Definition>| {
        if para.is_empty() {
            return;
        }
        if let Some(text) = definition_text(para.trim()) {
            let gloss = tokenize(text);
            if !gloss.is_empty() {
                for h in heads {
                    out.push(Definition { headword: h.clone(), gloss: gloss.clone(), line });
                }
            }
        }
        para.clear();
    };

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            flush(&mut para, para_line, &headwords, &mut out);
            continue;
        }
        if para.is_empty() && is_headword_line(&line) {
            headwords = headword_variants(&line);
            continue;
        }
        if headwords.is_empty() {
            continue;
        }
        if para.is_empty() {
            para_line = lineno;
        } else {
            para.push(' ');
        }
        para.push_str(line.trim());
    }
    flush(&mut para, para_line, &headwords, &mut out);

    if out.is_empty() {
        return Err(Error::Format("no definitions found in dictionary text".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Vec<Definition>> {
        parse_webster(s.as_bytes())
    }

    #[test]
    fn single_defn() {
        let d = parse("CAT\nCat, n. Etym: [AS. cat.]\n\nDefn: A small animal.\n").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].headword, "cat");
        assert_eq!(d[0].gloss, ["a", "small", "animal"]);
        assert_eq!(d[0].line, 4);
    }

    #[test]
    fn numbered_senses() {
        let text = "BARK\nBark, v. i.\n\n1. To make the short loud cry of a dog.\n\n\
                    2. (Fig.) To speak in a sharp\nangry voice; as, to bark orders.\n";
        let d = parse(text).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|x| x.headword == "bark"));
        assert_eq!(d[1].gloss, ["to", "speak", "in", "a", "sharp", "angry", "voice", "as", "to", "bark", "orders"]);
    }

    #[test]
    fn labels_before_defn_marker() {
        let d = parse("CAT\nCat, n.\n\n1. (Zoöl.) Defn: A small animal.\n").unwrap();
        assert_eq!(d[0].gloss, ["a", "small", "animal"]);
    }

    #[test]
    fn label_only_number_defers_to_defn() {
        let text = "CAT\nCat, n.\n\n1. (Zoöl.)\n\nDefn: Any animal of the family Felidae. The domestic cat.\n";
        let d = parse(text).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].gloss, ["any", "animal", "of", "the", "family", "felidae"]);
    }

    #[test]
    fn variants_share_definitions() {
        let d = parse("GREY; GRAY\nGray, a.\n\nDefn: Of the colour of ashes.\n").unwrap();
        let heads: Vec<_> = d.iter().map(|x| x.headword.as_str()).collect();
        assert_eq!(heads, ["grey", "gray"]);
    }

    #[test]
    fn empty_stream_is_a_format_error() {
        assert!(matches!(parse(""), Err(Error::Format(_))));
        assert!(matches!(parse("Some preface text.\n"), Err(Error::Format(_))));
    }

    #[test]
    fn headword_detection() {
        assert!(is_headword_line("O'CLOCK"));
        assert!(is_headword_line("ICE-CREAM; ICE CREAM"));
        assert!(!is_headword_line("1."));
        assert!(!is_headword_line("Defn: X"));
    }
}

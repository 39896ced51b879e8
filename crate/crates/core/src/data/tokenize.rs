/// Lowercases and splits on anything that is not part of a word.
///
/// Letters and digits are kept; apostrophes and hyphens survive only between
/// two word characters (`don't`, `well-known`).
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().map(|c| if c == '\u{2019}' { '\'' } else { c }).collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let joiner = c == '\'' || c == '-';
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if joiner && !cur.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric()) {
            cur.push(c);
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::{CorpusError, Poem};
use crate::classify::{classify_poem, extract_qafiyah, ClassifyError};
use crate::meterdb::{PatternDb, METER_COUNT};
use crate::scansion::ScanOptions;

pub const SPECIAL_TOKEN_COUNT: usize = 51;
pub const THEME_TOKENS: usize = 18;
pub const RESERVED_TOKENS: usize = 10;
/// Theme id used when a poem carries none.
pub const UNKNOWN_THEME: usize = THEME_TOKENS - 1;
pub const ENDOFTEXT: &str = "<|endoftext|>";

const PSEP: &str = "<|psep|>";
const PSEP_END: &str = "</|psep|>";
const BSEP: &str = "<|bsep|>";
const BSEP_END: &str = "</|bsep|>";
const VSEP: &str = "<|vsep|>";

fn meter_token(m: usize) -> String {
    format!("<|meter_{m}|>")
}

fn theme_token(k: usize) -> String {
    format!("<|theme_{k}|>")
}

/// Reserved tokens followed by the corpus characters in codepoint order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialTokenVocab {
    specials: Vec<String>,
    chars: Vec<char>,
}

impl SpecialTokenVocab {
    pub fn special_tokens() -> Vec<String> {
        let mut t: Vec<String> = [PSEP, PSEP_END, BSEP, BSEP_END, VSEP].map(String::from).to_vec();
        t.extend((0..THEME_TOKENS).map(theme_token));
        t.extend((0..METER_COUNT).map(meter_token));
        t.extend((0..RESERVED_TOKENS).map(|i| format!("<|res_{i}|>")));
        t.push("<|pad|>".into());
        t.push(ENDOFTEXT.into());
        t
    }

    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let chars: BTreeSet<char> = chars.into_iter().collect();
        SpecialTokenVocab { specials: Self::special_tokens(), chars: chars.into_iter().collect() }
    }

    pub fn specials(&self) -> &[String] {
        &self.specials
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn len(&self) -> usize {
        self.specials.len() + self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains_char(&self, c: char) -> bool {
        self.chars.binary_search(&c).is_ok()
    }

    pub fn tokens(&self) -> impl Iterator<Item = String> + '_ {
        self.specials.iter().cloned().chain(self.chars.iter().map(|c| c.to_string()))
    }

    pub fn token_id(&self, token: &str) -> Option<usize> {
        if let Some(i) = self.specials.iter().position(|s| s == token) {
            return Some(i);
        }
        let mut it = token.chars();
        let (Some(c), None) = (it.next(), it.next()) else { return None };
        self.chars.binary_search(&c).ok().map(|i| self.specials.len() + i)
    }

    /// One token per line, specials first.
    pub fn to_file_string(&self) -> Result<String, CorpusError> {
        if let Some(&c) = self.chars.iter().find(|c| **c == '\n' || **c == '\r') {
            return Err(CorpusError::MalformedVocab(format!(
                "character U+{:04X} cannot be stored one per line",
                c as u32
            )));
        }
        Ok(self.tokens().map(|t| t + "\n").collect())
    }

    pub fn from_file_string(text: &str) -> Result<Self, CorpusError> {
        let mut lines: Vec<&str> = text.split('\n').collect();
        if lines.last() == Some(&"") {
            lines.pop();
        }
        let specials = Self::special_tokens();
        if lines.len() < specials.len() || lines[..specials.len()] != specials[..] {
            return Err(CorpusError::MalformedVocab("the first 51 lines must be the reserved tokens in order".into()));
        }
        let mut chars = Vec::with_capacity(lines.len() - specials.len());
        for (i, line) in lines[specials.len()..].iter().enumerate() {
            let mut it = line.chars();
            match (it.next(), it.next()) {
                (Some(c), None) if chars.last().is_none_or(|&p| p < c) => chars.push(c),
                _ => {
                    return Err(CorpusError::MalformedVocab(format!(
                        "line {}: expected one character, in codepoint order",
                        specials.len() + i + 1
                    )))
                }
            }
        }
        Ok(SpecialTokenVocab { specials, chars })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), CorpusError> {
        Ok(fs::write(path, self.to_file_string()?)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        Self::from_file_string(&fs::read_to_string(path)?)
    }
}

/// Distinct characters (letters, marks, spaces) of all verses.
pub fn build_vocab(poems: &[Poem]) -> SpecialTokenVocab {
    SpecialTokenVocab::from_chars(poems.iter().flat_map(|p| p.verses.iter()).flat_map(|v| v.chars()))
}

/// Decoded prompt content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptFields {
    pub meter: usize,
    pub qafiyah: String,
    pub theme: usize,
    pub baits: Vec<(String, String)>,
}

fn check_text(text: &str, vocab: &SpecialTokenVocab) -> Result<(), CorpusError> {
    if text.contains("<|") || text.contains("</|") {
        return Err(CorpusError::ReservedSequence);
    }
    match text.chars().find(|&c| !vocab.contains_char(c)) {
        Some(ch) => Err(CorpusError::UnencodableCharacter { ch }),
        None => Ok(()),
    }
}

/// Token sequence of the prompt template.
pub fn encode_tokens(fields: &PromptFields, vocab: &SpecialTokenVocab) -> Result<Vec<String>, CorpusError> {
    if fields.meter >= METER_COUNT {
        return Err(CorpusError::UnknownMeter(fields.meter as i64));
    }
    if fields.theme >= THEME_TOKENS {
        return Err(CorpusError::InvalidTheme(fields.theme as i64));
    }
    if fields.qafiyah.is_empty() || fields.qafiyah.chars().any(char::is_whitespace) {
        return Err(CorpusError::MalformedTemplate("qafiyah must be non-empty and contain no whitespace".into()));
    }
    check_text(&fields.qafiyah, vocab)?;
    let mut t = vec![meter_token(fields.meter), " ".into()];
    t.extend(fields.qafiyah.chars().map(String::from));
    t.extend([" ".into(), theme_token(fields.theme), "\n".into(), PSEP.into()]);
    for (a, b) in &fields.baits {
        check_text(a, vocab)?;
        check_text(b, vocab)?;
        t.push(BSEP.into());
        t.extend(a.chars().map(String::from));
        t.push(VSEP.into());
        t.extend(b.chars().map(String::from));
        t.push(BSEP_END.into());
    }
    t.push(PSEP_END.into());
    Ok(t)
}

pub fn encode_fields(fields: &PromptFields, vocab: &SpecialTokenVocab) -> Result<String, CorpusError> {
    Ok(encode_tokens(fields, vocab)?.concat())
}

/// The poem's meter for encoding. With a database the label is checked
/// against the poem-level vote, and a missing label is filled from it; a
/// poem with no scannable hemistich keeps its label.
pub fn resolve_meter(poem: &Poem, db: Option<&PatternDb>) -> Result<usize, CorpusError> {
    let label = match poem.meter {
        Some(m) if (0..METER_COUNT as i64).contains(&m) => Some(m as usize),
        Some(m) => return Err(CorpusError::UnknownMeter(m)),
        None => None,
    };
    let Some(db) = db else { return label.ok_or(CorpusError::MissingMeter) };
    match (classify_poem(poem, db, &ScanOptions::default()), label) {
        (Ok(c), Some(l)) if c.meter != l => Err(CorpusError::MeterDisagreement { label: l, predicted: c.meter }),
        (Ok(c), _) => Ok(c.meter),
        (Err(ClassifyError::NoScannableVerse), Some(l)) => Ok(l),
        (Err(_), _) => Err(CorpusError::MissingMeter),
    }
}

pub fn poem_fields(poem: &Poem, db: Option<&PatternDb>) -> Result<PromptFields, CorpusError> {
    if poem.verses.is_empty() {
        return Err(CorpusError::EmptyPoem);
    }
    if !poem.verses.len().is_multiple_of(2) {
        return Err(CorpusError::MalformedTemplate("poem has an unpaired hemistich".into()));
    }
    let meter = resolve_meter(poem, db)?;
    let theme = match poem.theme {
        None => UNKNOWN_THEME,
        Some(k) if (0..THEME_TOKENS as i64).contains(&k) => k as usize,
        Some(k) => return Err(CorpusError::InvalidTheme(k)),
    };
    let qafiyah = extract_qafiyah(poem).map_err(|_| CorpusError::EmptyPoem)?.rawiy.to_string();
    let baits = poem.baits().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    Ok(PromptFields { meter, qafiyah, theme, baits })
}

pub fn encode(poem: &Poem, vocab: &SpecialTokenVocab, db: Option<&PatternDb>) -> Result<String, CorpusError> {
    encode_fields(&poem_fields(poem, db)?, vocab)
}

struct Cursor<'a> {
    rest: &'a str,
    consumed: usize,
}

impl<'a> Cursor<'a> {
    fn expect(&mut self, tok: &str) -> Result<(), CorpusError> {
        match self.rest.strip_prefix(tok) {
            Some(r) => {
                self.advance(r);
                Ok(())
            }
            None => Err(CorpusError::MalformedTemplate(format!("expected {tok:?} at byte {}", self.consumed))),
        }
    }

    fn advance(&mut self, r: &'a str) {
        self.consumed += self.rest.len() - r.len();
        self.rest = r;
    }

    fn until(&mut self, tok: &str) -> Result<&'a str, CorpusError> {
        let Some(i) = self.rest.find(tok) else {
            return Err(CorpusError::MalformedTemplate(format!("missing {tok:?} after byte {}", self.consumed)));
        };
        let s = &self.rest[..i];
        self.advance(&self.rest[i + tok.len()..]);
        Ok(s)
    }

    fn number(&mut self, close: &str, limit: usize, what: &str) -> Result<usize, CorpusError> {
        let at = self.consumed;
        let digits = self.until(close)?;
        digits
            .parse::<usize>()
            .ok()
            .filter(|n| *n < limit && digits.bytes().all(|b| b.is_ascii_digit()))
            .ok_or_else(|| CorpusError::MalformedTemplate(format!("bad {what} id {digits:?} at byte {at}")))
    }
}

/// Inverse of [`encode`].
pub fn decode(text: &str, vocab: &SpecialTokenVocab) -> Result<PromptFields, CorpusError> {
    let mut c = Cursor { rest: text, consumed: 0 };
    c.expect("<|meter_")?;
    let meter = c.number("|>", METER_COUNT, "meter")?;
    c.expect(" ")?;
    let qafiyah = c.until(" <|theme_")?.to_string();
    let theme = c.number("|>", THEME_TOKENS, "theme")?;
    c.expect("\n")?;
    c.expect(PSEP)?;
    let mut baits = Vec::new();
    while !c.rest.starts_with(PSEP_END) {
        if c.rest.is_empty() {
            return Err(CorpusError::MalformedTemplate(format!("missing {PSEP_END:?}")));
        }
        c.expect(BSEP)?;
        let a = c.until(VSEP)?;
        let b = c.until(BSEP_END)?;
        for part in [a, b] {
            check_text(part, vocab)?;
        }
        baits.push((a.to_string(), b.to_string()));
    }
    c.expect(PSEP_END)?;
    if !c.rest.is_empty() {
        return Err(CorpusError::MalformedTemplate(format!("trailing text after {PSEP_END:?}")));
    }
    check_text(&qafiyah, vocab)?;
    Ok(PromptFields { meter, qafiyah, theme, baits })
}

/// Greedy split: the longest special token at each position, else one
/// character.
pub fn tokenize<'a>(text: &'a str, vocab: &SpecialTokenVocab) -> Vec<&'a str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        let n = vocab
            .specials()
            .iter()
            .filter(|s| rest.starts_with(s.as_str()))
            .map(|s| s.len())
            .max()
            .unwrap_or(c.len_utf8());
        out.push(&rest[..n]);
        rest = &rest[n..];
    }
    out
}

pub fn write_encoded_corpus(path: impl AsRef<Path>, records: &[String]) -> Result<(), CorpusError> {
    let text: String = records.iter().map(|r| format!("{r}{ENDOFTEXT}\n")).collect();
    Ok(fs::write(path, text)?)
}

pub fn read_encoded_corpus(path: impl AsRef<Path>) -> Result<Vec<String>, CorpusError> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .split(ENDOFTEXT)
        .map(|r| r.strip_prefix('\n').unwrap_or(r))
        .filter(|r| !r.is_empty())
        .map(String::from)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab_for(texts: &[&str]) -> SpecialTokenVocab {
        SpecialTokenVocab::from_chars(texts.iter().flat_map(|t| t.chars()))
    }

    #[test]
    fn special_token_table() {
        let s = SpecialTokenVocab::special_tokens();
        assert_eq!(s.len(), SPECIAL_TOKEN_COUNT);
        assert_eq!(&s[..5], ["<|psep|>", "</|psep|>", "<|bsep|>", "</|bsep|>", "<|vsep|>"]);
        assert_eq!(s[5], "<|theme_0|>");
        assert_eq!(s[22], "<|theme_17|>");
        assert_eq!(s[23], "<|meter_0|>");
        assert_eq!(s[38], "<|meter_15|>");
        assert_eq!(s[39], "<|res_0|>");
        assert_eq!(&s[49..], ["<|pad|>", "<|endoftext|>"]);
        for (i, a) in s.iter().enumerate() {
            for (j, b) in s.iter().enumerate() {
                assert!(i == j || !b.contains(a.as_str()), "{a} inside {b}");
            }
        }
    }

    #[test]
    fn empty_corpus_has_only_specials() {
        let v = build_vocab(&[]);
        assert_eq!(v.len(), 51);
        assert_eq!(v.token_id("<|endoftext|>"), Some(50));
        assert_eq!(v.token_id("x"), None);
    }

    #[test]
    fn template_layout_is_exact() {
        let v = vocab_for(&["V1V2ك"]);
        let fields = PromptFields { meter: 0, qafiyah: "ك".into(), theme: 3, baits: vec![("V1".into(), "V2".into())] };
        let s = encode_fields(&fields, &v).unwrap();
        assert_eq!(s, "<|meter_0|> ك <|theme_3|>\n<|psep|><|bsep|>V1<|vsep|>V2</|bsep|></|psep|>");
        assert_eq!(decode(&s, &v).unwrap(), fields);
        assert_eq!(tokenize(&s, &v), encode_tokens(&fields, &v).unwrap());
    }

    #[test]
    fn unknown_theme_and_backfilled_meter() {
        let db = PatternDb::seed();
        let sadr = "قِفَا نَبْكِ مِنْ ذِكْرَى حَبِيبٍ وَمَنْزِلِ";
        let ajuz = "بِسِقْطِ اللِّوَى بَيْنَ الدَّخُولِ فَحَوْمَلِ";
        let poem = Poem::from_baits([(sadr, ajuz)]);
        let v = build_vocab(std::slice::from_ref(&poem));
        assert!(matches!(encode(&poem, &v, None), Err(CorpusError::MissingMeter)));
        let s = encode(&poem, &v, Some(&db)).unwrap();
        assert!(s.starts_with("<|meter_0|> ل <|theme_17|>\n"), "{s}");

        let mislabeled = Poem { meter: Some(4), ..poem.clone() };
        assert!(matches!(
            encode(&mislabeled, &v, Some(&db)),
            Err(CorpusError::MeterDisagreement { label: 4, predicted: 0 })
        ));
        assert!(encode(&mislabeled, &v, None).unwrap().starts_with("<|meter_4|>"));
        let bad_theme = Poem { meter: Some(0), theme: Some(18), ..poem };
        assert!(matches!(encode(&bad_theme, &v, None), Err(CorpusError::InvalidTheme(18))));
    }

    #[test]
    fn encode_rejects_unknown_characters_and_reserved_text() {
        let v = vocab_for(&["اب"]);
        let mut f =
            PromptFields { meter: 1, qafiyah: "ب".into(), theme: 0, baits: vec![("اب".into(), "اج".into())] };
        assert!(matches!(encode_fields(&f, &v), Err(CorpusError::UnencodableCharacter { ch: 'ج' })));
        f.baits[0].1 = "ا<|vsep|>ب".into();
        assert!(matches!(encode_fields(&f, &v), Err(CorpusError::ReservedSequence)));
    }

    #[test]
    fn decode_names_the_missing_separator() {
        let v = vocab_for(&["ابك"]);
        let good = "<|meter_2|> ك <|theme_1|>\n<|psep|><|bsep|>ا<|vsep|>ب</|bsep|></|psep|>";
        assert!(decode(good, &v).is_ok());
        let cases = [
            (good.replace("<|vsep|>", ""), "<|vsep|>"),
            (good.replace("</|psep|>", ""), "</|psep|>"),
            (good.replace("</|bsep|>", ""), "</|bsep|>"),
            (good.replace("\n", ""), "\\n"),
            (good.replace("meter_2", "meter_16"), "meter"),
            (good.replace("theme_1", "theme_x"), "theme"),
            (format!("{good}x"), "trailing"),
        ];
        for (text, needle) in cases {
            match decode(&text, &v) {
                Err(CorpusError::MalformedTemplate(m)) => assert!(m.contains(needle), "{m} / {needle}"),
                other => panic!("{text:?} -> {other:?}"),
            }
        }
    }

    #[test]
    fn vocab_file_round_trip() {
        let v = vocab_for(&["كَتَبَ بِهِ"]);
        let text = v.to_file_string().unwrap();
        assert_eq!(text.lines().next(), Some("<|psep|>"));
        assert_eq!(SpecialTokenVocab::from_file_string(&text).unwrap(), v);
        assert!(SpecialTokenVocab::from_file_string("<|psep|>\n").is_err());
    }

    #[test]
    fn encoded_corpus_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        let records = vec!["<|meter_0|> ك <|theme_3|>\n<|psep|></|psep|>".to_string(); 3];
        write_encoded_corpus(&path, &records).unwrap();
        assert_eq!(read_encoded_corpus(&path).unwrap(), records);
    }
}

//! ISO 10303-21 clear-text encoding: tokenizer, parser and writer.
//!
//! The parser is total: any byte sequence yields either a file or
//! `MalformedPart21` with the offending line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::Precision;

/// Nesting deeper than this is rejected rather than recursed into.
const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Integer(i64),
    Real(f64),
    String(String),
    Enum(String),
    Binary(String),
    Ref(u64),
    List(Vec<Param>),
    /// A typed value such as `LENGTH_MEASURE(1.)`.
    Typed(String, Vec<Param>),
    Unset,
    Derived,
}

impl Param {
    pub fn as_ref_id(&self) -> Option<u64> {
        match self {
            Param::Ref(id) => Some(*id),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Param]> {
        match self {
            Param::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Param::Integer(v) => Some(*v),
            _ => None,
        }
    }

    /// Integers are accepted where reals are expected, as most exporters
    /// write them that way.
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Param::Real(v) => Some(*v),
            Param::Integer(v) => Some(*v as f64),
            Param::Typed(_, inner) if inner.len() == 1 => inner[0].as_real(),
            _ => None,
        }
    }

    pub fn as_enum(&self) -> Option<&str> {
        match self {
            Param::Enum(e) => Some(e),
            _ => None,
        }
    }

    fn visit_refs(&self, f: &mut impl FnMut(u64)) {
        match self {
            Param::Ref(id) => f(*id),
            Param::List(items) | Param::Typed(_, items) => items.iter().for_each(|p| p.visit_refs(f)),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub keyword: String,
    pub params: Vec<Param>,
}

/// One `#id = ...;` instance. Simple instances hold a single record; complex
/// ones, written `#id = (A(..) B(..));`, hold several.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub records: Vec<Record>,
    pub line: usize,
}

impl Instance {
    pub fn is_complex(&self) -> bool {
        self.records.len() > 1
    }

    pub fn keyword(&self) -> &str {
        &self.records[0].keyword
    }

    pub fn params(&self) -> &[Param] {
        &self.records[0].params
    }

    pub fn record(&self, keyword: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.keyword == keyword)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Part21File {
    pub header: Vec<Record>,
    pub entities: BTreeMap<u64, Instance>,
}

impl Part21File {
    pub fn header_record(&self, keyword: &str) -> Option<&Record> {
        self.header.iter().find(|r| r.keyword == keyword)
    }

    /// Serializes the file; reals use `precision`.
    pub fn to_text(&self, precision: Precision) -> String {
        let mut out = String::from("ISO-10303-21;\nHEADER;\n");
        for r in &self.header {
            write_record(&mut out, r, precision);
            out.push_str(";\n");
        }
        out.push_str("ENDSEC;\nDATA;\n");
        for (id, inst) in &self.entities {
            let _ = write!(out, "#{id}=");
            if inst.is_complex() {
                out.push('(');
                for (i, r) in inst.records.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    write_record(&mut out, r, precision);
                }
                out.push(')');
            } else {
                write_record(&mut out, &inst.records[0], precision);
            }
            out.push_str(";\n");
        }
        out.push_str("ENDSEC;\nEND-ISO-10303-21;\n");
        out
    }
}

fn write_record(out: &mut String, r: &Record, precision: Precision) {
    out.push_str(&r.keyword);
    write_params(out, &r.params, precision);
}

fn write_params(out: &mut String, params: &[Param], precision: Precision) {
    out.push('(');
    for (i, p) in params.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_param(out, p, precision);
    }
    out.push(')');
}

fn write_param(out: &mut String, p: &Param, precision: Precision) {
    match p {
        Param::Integer(v) => {
            let _ = write!(out, "{v}");
        }
        Param::Real(v) => out.push_str(&step_real(*v, precision)),
        Param::String(s) => {
            out.push('\'');
            out.push_str(&s.replace('\'', "''"));
            out.push('\'');
        }
        Param::Enum(e) => {
            let _ = write!(out, ".{e}.");
        }
        Param::Binary(b) => {
            let _ = write!(out, "\"{b}\"");
        }
        Param::Ref(id) => {
            let _ = write!(out, "#{id}");
        }
        Param::List(items) => write_params(out, items, precision),
        Param::Typed(k, items) => {
            out.push_str(k);
            write_params(out, items, precision);
        }
        Param::Unset => out.push('$'),
        Param::Derived => out.push('*'),
    }
}

/// Part 21 reals need a decimal point in the mantissa: `1.`, `1.5E-07`.
pub(crate) fn step_real(v: f64, precision: Precision) -> String {
    let s = precision.format(v);
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s.as_str(), None),
    };
    let mut out = mantissa.to_string();
    if !out.contains('.') {
        out.push('.');
    }
    if let Some(e) = exponent {
        out.push('E');
        out.push_str(e);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Keyword(String),
    Hash(u64),
    Str(String),
    Enum(String),
    Binary(String),
    Int(i64),
    Real(f64),
    Dollar,
    Star,
    Open,
    Close,
    Comma,
    Equals,
    Semi,
}

fn malformed(line: usize, message: impl Into<String>) -> Error {
    Error::MalformedPart21 { line, message: message.into() }
}

fn tokenize(bytes: &[u8]) -> Result<Vec<(Tok, usize)>> {
    let mut toks = Vec::new();
    let mut line = 1;
    let mut i = 0;
    let n = bytes.len();
    while i < n {
        let c = bytes[i];
        let start_line = line;
        match c {
            b'\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                i += 2;
                loop {
                    if i + 1 >= n {
                        return Err(malformed(start_line, "unterminated comment"));
                    }
                    if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                        i += 2;
                        break;
                    }
                    if bytes[i] == b'\n' {
                        line += 1;
                    }
                    i += 1;
                }
            }
            b'\'' => {
                let mut s = Vec::new();
                i += 1;
                loop {
                    match bytes.get(i) {
                        None => return Err(malformed(start_line, "unterminated string")),
                        Some(b'\'') if bytes.get(i + 1) == Some(&b'\'') => {
                            s.push(b'\'');
                            i += 2;
                        }
                        Some(b'\'') => {
                            i += 1;
                            break;
                        }
                        Some(&b) => {
                            if b == b'\n' {
                                line += 1;
                            }
                            s.push(b);
                            i += 1;
                        }
                    }
                }
                toks.push((Tok::Str(String::from_utf8_lossy(&s).into_owned()), start_line));
            }
            b'"' => {
                let end = bytes[i + 1..]
                    .iter()
                    .position(|&b| b == b'"')
                    .ok_or_else(|| malformed(line, "unterminated binary"))?;
                let body = &bytes[i + 1..i + 1 + end];
                if !body.iter().all(u8::is_ascii_hexdigit) {
                    return Err(malformed(line, "binary literal must be hexadecimal"));
                }
                toks.push((Tok::Binary(String::from_utf8_lossy(body).into_owned()), line));
                i += end + 2;
            }
            b'.' => {
                let end = bytes[i + 1..]
                    .iter()
                    .position(|&b| b == b'.')
                    .ok_or_else(|| malformed(line, "unterminated enumeration"))?;
                let body = &bytes[i + 1..i + 1 + end];
                if body.is_empty() || !body.iter().all(|&b| b.is_ascii_alphanumeric() || b == b'_') {
                    return Err(malformed(line, "bad enumeration"));
                }
                toks.push((Tok::Enum(String::from_utf8_lossy(body).to_ascii_uppercase()), line));
                i += end + 2;
            }
            b'#' => {
                let digits = bytes[i + 1..].iter().take_while(|b| b.is_ascii_digit()).count();
                if digits == 0 {
                    return Err(malformed(line, "`#` must be followed by an instance number"));
                }
                let text = std::str::from_utf8(&bytes[i + 1..i + 1 + digits]).unwrap_or("");
                let id = text.parse::<u64>().map_err(|_| malformed(line, "instance number out of range"))?;
                toks.push((Tok::Hash(id), line));
                i += 1 + digits;
            }
            b'0'..=b'9' | b'+' | b'-' => {
                let (tok, len) = number(&bytes[i..]).ok_or_else(|| malformed(line, "bad number"))?;
                toks.push((tok, line));
                i += len;
            }
            c if c.is_ascii_alphabetic() || c == b'!' => {
                let len = 1 + bytes[i + 1..]
                    .iter()
                    .take_while(|&&b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
                    .count();
                let word = String::from_utf8_lossy(&bytes[i..i + len]).to_ascii_uppercase();
                toks.push((Tok::Keyword(word), line));
                i += len;
            }
            b'$' => {
                toks.push((Tok::Dollar, line));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, line));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::Open, line));
                i += 1;
            }
            b')' => {
                toks.push((Tok::Close, line));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, line));
                i += 1;
            }
            b'=' => {
                toks.push((Tok::Equals, line));
                i += 1;
            }
            b';' => {
                toks.push((Tok::Semi, line));
                i += 1;
            }
            other => return Err(malformed(line, format!("unexpected byte 0x{other:02x}"))),
        }
    }
    Ok(toks)
}

/// `[sign] digits [. digits] [E [sign] digits]`; returns the token and its
/// length in bytes.
fn number(b: &[u8]) -> Option<(Tok, usize)> {
    let mut i = 0;
    if matches!(b.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let int_start = i;
    while b.get(i).is_some_and(u8::is_ascii_digit) {
        i += 1;
    }
    if i == int_start {
        return None;
    }
    let mut text = String::from_utf8_lossy(&b[..i]).into_owned();
    let mut real = false;
    if b.get(i) == Some(&b'.') {
        real = true;
        i += 1;
        text.push('.');
        let frac = i;
        while b.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
        if i == frac {
            text.push('0');
        } else {
            text.push_str(std::str::from_utf8(&b[frac..i]).ok()?);
        }
    }
    if matches!(b.get(i), Some(b'e' | b'E')) {
        if !real {
            return None;
        }
        let mut j = i + 1;
        if matches!(b.get(j), Some(b'+' | b'-')) {
            j += 1;
        }
        let exp_digits = j;
        while b.get(j).is_some_and(u8::is_ascii_digit) {
            j += 1;
        }
        if j == exp_digits {
            return None;
        }
        text.push('e');
        text.push_str(std::str::from_utf8(&b[i + 1..j]).ok()?);
        i = j;
    }
    let tok = if real {
        let v: f64 = text.parse().ok()?;
        if !v.is_finite() {
            return None;
        }
        Tok::Real(v)
    } else {
        Tok::Int(text.parse().ok()?)
    };
    Some((tok, i))
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    last_line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).map_or(self.last_line, |(_, l)| *l)
    }

    fn next(&mut self) -> Result<Tok> {
        let line = self.line();
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t.ok_or_else(|| malformed(line, "unexpected end of file"))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let line = self.line();
        let got = self.next()?;
        if got == want {
            Ok(())
        } else {
            Err(malformed(line, format!("expected {what}, found {got:?}")))
        }
    }

    fn expect_keyword(&mut self, word: &str) -> Result<()> {
        self.expect(Tok::Keyword(word.to_string()), &format!("`{word}`"))
    }

    fn keyword(&mut self) -> Result<String> {
        let line = self.line();
        match self.next()? {
            Tok::Keyword(k) => Ok(k),
            other => Err(malformed(line, format!("expected a keyword, found {other:?}"))),
        }
    }

    fn record(&mut self) -> Result<Record> {
        let keyword = self.keyword()?;
        let params = self.param_list(0)?;
        Ok(Record { keyword, params })
    }

    /// `( p, p, ... )` including the parentheses.
    fn param_list(&mut self, depth: usize) -> Result<Vec<Param>> {
        if depth > MAX_DEPTH {
            return Err(malformed(self.line(), "nesting too deep"));
        }
        self.expect(Tok::Open, "`(`")?;
        let mut items = Vec::new();
        if self.peek() == Some(&Tok::Close) {
            self.pos += 1;
            return Ok(items);
        }
        loop {
            items.push(self.param(depth)?);
            let line = self.line();
            match self.next()? {
                Tok::Comma => {}
                Tok::Close => return Ok(items),
                other => return Err(malformed(line, format!("expected `,` or `)`, found {other:?}"))),
            }
        }
    }

    fn param(&mut self, depth: usize) -> Result<Param> {
        let line = self.line();
        Ok(match self.peek() {
            Some(Tok::Open) => Param::List(self.param_list(depth + 1)?),
            Some(Tok::Keyword(_)) => {
                let k = self.keyword()?;
                Param::Typed(k, self.param_list(depth + 1)?)
            }
            _ => match self.next()? {
                Tok::Int(v) => Param::Integer(v),
                Tok::Real(v) => Param::Real(v),
                Tok::Str(s) => Param::String(s),
                Tok::Enum(e) => Param::Enum(e),
                Tok::Binary(b) => Param::Binary(b),
                Tok::Hash(id) => Param::Ref(id),
                Tok::Dollar => Param::Unset,
                Tok::Star => Param::Derived,
                other => return Err(malformed(line, format!("unexpected {other:?} in parameter list"))),
            },
        })
    }
}

pub fn parse_part21(bytes: &[u8]) -> Result<Part21File> {
    let toks = tokenize(bytes)?;
    let last_line = toks.last().map_or(1, |(_, l)| *l);
    let mut p = Parser { toks, pos: 0, last_line };

    p.expect_keyword("ISO-10303-21")?;
    p.expect(Tok::Semi, "`;`")?;
    p.expect_keyword("HEADER")?;
    p.expect(Tok::Semi, "`;`")?;
    let mut file = Part21File::default();
    while p.peek() != Some(&Tok::Keyword("ENDSEC".into())) {
        file.header.push(p.record()?);
        p.expect(Tok::Semi, "`;`")?;
    }
    p.expect_keyword("ENDSEC")?;
    p.expect(Tok::Semi, "`;`")?;

    let mut saw_data = false;
    loop {
        let line = p.line();
        match p.keyword()?.as_str() {
            "DATA" => {
                saw_data = true;
                if p.peek() == Some(&Tok::Open) {
                    p.param_list(0)?;
                }
                p.expect(Tok::Semi, "`;`")?;
                data_section(&mut p, &mut file)?;
            }
            "END-ISO-10303-21" => {
                p.expect(Tok::Semi, "`;`")?;
                break;
            }
            other => return Err(malformed(line, format!("unexpected section `{other}`"))),
        }
    }
    if !saw_data {
        return Err(malformed(p.line(), "no DATA section"));
    }

    for (id, inst) in &file.entities {
        let mut dangling = None;
        for r in &inst.records {
            for param in &r.params {
                param.visit_refs(&mut |target| {
                    if dangling.is_none() && !file.entities.contains_key(&target) {
                        dangling = Some(target);
                    }
                });
            }
        }
        if let Some(target) = dangling {
            return Err(malformed(inst.line, format!("#{id} references undefined instance #{target}")));
        }
    }
    Ok(file)
}

fn data_section(p: &mut Parser, file: &mut Part21File) -> Result<()> {
    loop {
        let line = p.line();
        match p.next()? {
            Tok::Keyword(k) if k == "ENDSEC" => {
                p.expect(Tok::Semi, "`;`")?;
                return Ok(());
            }
            Tok::Hash(id) => {
                p.expect(Tok::Equals, "`=`")?;
                let records = if p.peek() == Some(&Tok::Open) {
                    p.pos += 1;
                    let mut records = Vec::new();
                    while p.peek() != Some(&Tok::Close) {
                        records.push(p.record()?);
                    }
                    p.pos += 1;
                    if records.is_empty() {
                        return Err(malformed(line, "empty complex instance"));
                    }
                    records
                } else {
                    vec![p.record()?]
                };
                p.expect(Tok::Semi, "`;`")?;
                if file.entities.insert(id, Instance { records, line }).is_some() {
                    return Err(malformed(line, format!("instance #{id} defined twice")));
                }
            }
            other => return Err(malformed(line, format!("expected an instance, found {other:?}"))),
        }
    }
}

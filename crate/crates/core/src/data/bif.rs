//! Reader and writer for the common subset of the BIF network format.
//!
//! Supported: `network` blocks (contents ignored), `variable` blocks with a
//! `type discrete [k] { ... }` declaration, and `probability` blocks holding
//! either a `table` or one `(config) values;` line per parent configuration.
//! `property` lines and `//` or `/* */` comments are skipped anywhere.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{BayesNet, Variable, ROW_SUM_TOLERANCE};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: &str = "{}()[],;|";

fn bif_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Bif { line, column, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = vec![];
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize| {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col);
            advance(&mut i, &mut line, &mut col);
            loop {
                if i + 1 >= chars.len() {
                    return Err(bif_error(tl, tc, "unterminated comment"));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance(&mut i, &mut line, &mut col);
                    advance(&mut i, &mut line, &mut col);
                    break;
                }
                advance(&mut i, &mut line, &mut col);
            }
        } else if c == '"' {
            advance(&mut i, &mut line, &mut col);
            let mut word = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(bif_error(tl, tc, "unterminated string")),
                    Some('"') => break,
                    Some(&ch) => {
                        word.push(ch);
                        advance(&mut i, &mut line, &mut col);
                    }
                }
            }
            advance(&mut i, &mut line, &mut col);
            out.push(Token { tok: Tok::Word(word), line: tl, column: tc });
        } else if SYMBOLS.contains(c) {
            advance(&mut i, &mut line, &mut col);
            out.push(Token { tok: Tok::Sym(c), line: tl, column: tc });
        } else {
            let mut word = String::new();
            while i < chars.len() && !chars[i].is_whitespace() && !SYMBOLS.contains(chars[i]) && chars[i] != '"' {
                word.push(chars[i]);
                advance(&mut i, &mut line, &mut col);
            }
            out.push(Token { tok: Tok::Word(word), line: tl, column: tc });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |t| (t.line, t.column))
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self.here();
        Err(bif_error(line, column, message))
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Sym(c)) => format!("`{c}`"),
            Some(Tok::Word(w)) => format!("`{w}`"),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected `{c}`, found {}", self.describe()))
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        let hit = self.peek() == Some(&Tok::Sym(c));
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn word(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.fail(format!("expected a name, found {}", self.describe())),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Word(w)) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `{kw}`, found {}", self.describe())),
        }
    }

    fn at_word(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w == kw)
    }

    fn number(&mut self) -> Result<f64> {
        let at = self.here();
        let w = self.word()?;
        w.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bif_error(at.0, at.1, format!("expected a probability, found `{w}`")))
    }

    /// Skips `property ... ;`.
    fn skip_properties(&mut self) -> Result<()> {
        while self.at_word("property") {
            while !self.eat_sym(';') {
                if self.peek().is_none() {
                    return self.fail("unterminated property");
                }
                self.pos += 1;
            }
        }
        Ok(())
    }

    /// Comma- or space-separated numbers up to `;`.
    fn numbers(&mut self) -> Result<Vec<f64>> {
        let mut out = vec![];
        loop {
            if self.eat_sym(';') {
                return Ok(out);
            }
            if !out.is_empty() {
                self.eat_sym(',');
            }
            out.push(self.number()?);
        }
    }

    /// Comma-separated names up to `close`.
    fn names(&mut self, close: char) -> Result<Vec<String>> {
        let mut out = vec![self.word()?];
        while !self.eat_sym(close) {
            self.expect_sym(',')?;
            out.push(self.word()?);
        }
        Ok(out)
    }
}

struct Block {
    at: (usize, usize),
    parents: Vec<usize>,
    cpt: Vec<f64>,
}

/// Parses BIF text into a validated network.
///
/// Errors carry the line and column of the offending token.
pub fn parse_bif(text: &str) -> Result<BayesNet> {
    let toks = tokenize(text)?;
    let end = toks.last().map_or((1, 1), |t| (t.line, t.column + 1));
    let mut p = Parser { toks, pos: 0, end };
    let mut vars: Vec<Variable> = vec![];
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut blocks: HashMap<usize, Block> = HashMap::new();

    while p.peek().is_some() {
        let at = p.here();
        let kw = p.word()?;
        match kw.as_str() {
            "network" => {
                if !matches!(p.peek(), Some(Tok::Sym('{'))) {
                    p.word()?;
                }
                p.expect_sym('{')?;
                let mut depth = 1;
                while depth > 0 {
                    match p.peek() {
                        None => return p.fail("expected `}`, found end of input"),
                        Some(Tok::Sym('{')) => depth += 1,
                        Some(Tok::Sym('}')) => depth -= 1,
                        _ => {}
                    }
                    p.pos += 1;
                }
            }
            "variable" => {
                let name = p.word()?;
                if index.contains_key(&name) {
                    return Err(bif_error(at.0, at.1, format!("variable `{name}` declared twice")));
                }
                p.expect_sym('{')?;
                p.skip_properties()?;
                p.keyword("type")?;
                p.keyword("discrete")?;
                p.expect_sym('[')?;
                let k_at = p.here();
                let k: usize = p.word()?.parse().map_err(|_| bif_error(k_at.0, k_at.1, "expected a state count"))?;
                p.expect_sym(']')?;
                p.expect_sym('{')?;
                let states_at = p.here();
                let states = p.names('}')?;
                if states.len() != k {
                    return Err(bif_error(
                        states_at.0,
                        states_at.1,
                        format!("`{name}` declares {k} states but lists {}", states.len()),
                    ));
                }
                if states.iter().enumerate().any(|(i, s)| states[..i].contains(s)) {
                    return Err(bif_error(states_at.0, states_at.1, format!("`{name}` repeats a state")));
                }
                p.expect_sym(';')?;
                p.skip_properties()?;
                p.expect_sym('}')?;
                index.insert(name.clone(), vars.len());
                vars.push(Variable { name, states });
            }
            "probability" => {
                let (child, block) = parse_probability(&mut p, &vars, &index, at)?;
                if blocks.insert(child, block).is_some() {
                    return Err(bif_error(at.0, at.1, format!("second table for `{}`", vars[child].name)));
                }
            }
            other => return Err(bif_error(at.0, at.1, format!("unexpected `{other}`"))),
        }
    }

    let mut parents = vec![];
    let mut cpts = vec![];
    let mut block_at = vec![];
    for (v, var) in vars.iter().enumerate() {
        let Some(block) = blocks.remove(&v) else {
            return Err(bif_error(end.0, end.1, format!("no probability block for `{}`", var.name)));
        };
        parents.push(block.parents);
        cpts.push(block.cpt);
        block_at.push(block.at);
    }
    if let Err(on_cycle) = super::topological_order(&parents) {
        let first = on_cycle[0];
        let at = block_at[first];
        return Err(bif_error(at.0, at.1, format!("cycle through `{}`", vars[first].name)));
    }
    BayesNet::new(vars, parents, cpts)
}

fn parse_probability(
    p: &mut Parser,
    vars: &[Variable],
    index: &HashMap<String, usize>,
    at: (usize, usize),
) -> Result<(usize, Block)> {
    let lookup = |name: &str, where_: (usize, usize)| {
        index.get(name).copied().ok_or_else(|| bif_error(where_.0, where_.1, format!("unknown variable `{name}`")))
    };
    p.expect_sym('(')?;
    let child_at = p.here();
    let child = lookup(&p.word()?, child_at)?;
    let mut parents = vec![];
    if p.eat_sym('|') {
        loop {
            let pa = p.here();
            let name = p.word()?;
            parents.push(lookup(&name, pa)?);
            if p.eat_sym(')') {
                break;
            }
            p.expect_sym(',')?;
        }
    } else {
        p.expect_sym(')')?;
    }
    let k = vars[child].states.len();
    let cards: Vec<usize> = parents.iter().map(|&q| vars[q].states.len()).collect();
    let configs: usize = cards.iter().product();
    let mut cpt: Vec<Option<f64>> = vec![None; configs * k];
    let mut rows_seen = 0usize;
    let check_row = |row: &[f64], where_: (usize, usize)| -> Result<()> {
        if row.len() != k {
            return Err(bif_error(where_.0, where_.1, format!("expected {k} probabilities, found {}", row.len())));
        }
        if row.iter().any(|&v| v < 0.0) {
            return Err(bif_error(where_.0, where_.1, "negative probability"));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(bif_error(where_.0, where_.1, format!("probabilities sum to {sum}")));
        }
        Ok(())
    };

    p.expect_sym('{')?;
    loop {
        p.skip_properties()?;
        if p.eat_sym('}') {
            break;
        }
        let row_at = p.here();
        if p.at_word("table") {
            p.pos += 1;
            let values = p.numbers()?;
            if values.len() != configs * k {
                return Err(bif_error(
                    row_at.0,
                    row_at.1,
                    format!("table needs {} probabilities, found {}", configs * k, values.len()),
                ));
            }
            // The child state varies slowest in a table.
            for c in 0..configs {
                let row: Vec<f64> = (0..k).map(|s| values[s * configs + c]).collect();
                check_row(&row, row_at)?;
                for (s, v) in row.into_iter().enumerate() {
                    cpt[c * k + s] = Some(v);
                }
            }
            rows_seen += configs;
        } else if p.eat_sym('(') {
            let labels_at = p.here();
            let labels = p.names(')')?;
            if labels.len() != parents.len() {
                return Err(bif_error(
                    labels_at.0,
                    labels_at.1,
                    format!("expected {} parent states, found {}", parents.len(), labels.len()),
                ));
            }
            let mut config = 0;
            for (&q, label) in parents.iter().zip(&labels) {
                let s = vars[q].states.iter().position(|x| x == label).ok_or_else(|| {
                    bif_error(labels_at.0, labels_at.1, format!("`{label}` is not a state of `{}`", vars[q].name))
                })?;
                config = config * vars[q].states.len() + s;
            }
            let row = p.numbers()?;
            check_row(&row, row_at)?;
            if cpt[config * k].is_some() {
                return Err(bif_error(row_at.0, row_at.1, "parent configuration given twice"));
            }
            for (s, v) in row.into_iter().enumerate() {
                cpt[config * k + s] = Some(v);
            }
            rows_seen += 1;
        } else if p.peek().is_none() {
            return p.fail("expected `}`, found end of input");
        } else {
            return p.fail(format!("expected `table` or a parent configuration, found {}", p.describe()));
        }
    }
    if rows_seen != configs || cpt.iter().any(Option::is_none) {
        return Err(bif_error(
            at.0,
            at.1,
            format!("`{}` needs {configs} rows, found {rows_seen}", vars[child].name),
        ));
    }
    let cpt = cpt.into_iter().map(|v| v.expect("checked above")).collect();
    Ok((child, Block { at, parents, cpt }))
}

fn quoted(s: &str) -> String {
    let plain = !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || SYMBOLS.contains(c) || c == '"' || c == '/');
    if plain {
        s.to_string()
    } else {
        format!("\"{s}\"")
    }
}

fn join(values: impl Iterator<Item = String>) -> String {
    values.collect::<Vec<_>>().join(", ")
}

/// Writes a network in the subset [`parse_bif`] reads back unchanged.
pub fn serialize_bif(net: &BayesNet) -> String {
    let mut out = String::from("network unknown {\n}\n");
    for var in net.variables() {
        let _ = writeln!(out, "variable {} {{", quoted(&var.name));
        let _ = writeln!(
            out,
            "  type discrete [ {} ] {{ {} }};",
            var.states.len(),
            join(var.states.iter().map(|s| quoted(s)))
        );
        out.push_str("}\n");
    }
    for v in 0..net.n_vars() {
        let ps = net.parents(v);
        if ps.is_empty() {
            let _ = writeln!(out, "probability ( {} ) {{", quoted(net.name(v)));
            let _ = writeln!(out, "  table {};", join(net.row(v, 0).iter().map(|x| x.to_string())));
        } else {
            let _ = writeln!(
                out,
                "probability ( {} | {} ) {{",
                quoted(net.name(v)),
                join(ps.iter().map(|&q| quoted(net.name(q))))
            );
            let cards: Vec<usize> = ps.iter().map(|&q| net.card(q)).collect();
            for c in 0..net.n_configs(v) {
                let mut rest = c;
                let mut labels = vec![String::new(); ps.len()];
                for i in (0..ps.len()).rev() {
                    labels[i] = quoted(&net.states(ps[i])[rest % cards[i]]);
                    rest /= cards[i];
                }
                let _ = writeln!(
                    out,
                    "  ({}) {};",
                    labels.join(", "),
                    join(net.row(v, c).iter().map(|x| x.to_string()))
                );
            }
        }
        out.push_str("}\n");
    }
    out
}

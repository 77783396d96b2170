//! Textual model format.
//!
//! ```text
//! # comment
//! var x in {0, 1, 2};
//! constraint x < y;
//! constraint x = y + 3;
//! constraint x = y ++ z;          # x = y + z
//! constraint table(x, y) { (0, 0), (0, 1) };
//! ```
//!
//! Variables must be declared before use. Values must fit in 32 bits.

use std::fmt;

use crate::model::{CspModel, Domain, Relation, Value, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
        };
        write!(f, "{}:{}: {}: {}", self.line, self.column, sev, self.message)
    }
}

/// Where a model text came from, for diagnostics.
#[derive(Debug, Clone)]
pub struct ModelSource {
    pub text: String,
    pub provenance: String,
}

impl ModelSource {
    pub fn inline(text: impl Into<String>) -> Self {
        ModelSource { text: text.into(), provenance: "<inline>".into() }
    }

    pub fn from_file(path: &std::path::Path) -> std::io::Result<Self> {
        Ok(ModelSource { text: std::fs::read_to_string(path)?, provenance: path.display().to_string() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(Value),
    Punct(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const PUNCT: [&str; 10] = ["++", "+", "{", "}", "(", ")", ",", ";", "<", "="];
const VALUE_RANGE: std::ops::RangeInclusive<i64> = (i32::MIN as i64)..=(i32::MAX as i64);

fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    for (ln, text) in src.lines().enumerate() {
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let at = |tok| Token { tok, line: ln + 1, column: col };
            if c == '#' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push(at(Tok::Ident(chars[start..i].iter().collect())));
            } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                match lit.parse::<i64>() {
                    Ok(v) if VALUE_RANGE.contains(&v) => toks.push(at(Tok::Int(v))),
                    _ => {
                        diags.push(error(ln + 1, col, format!("integer `{lit}` does not fit in 32 bits")));
                        // placeholder keeps the parser from cascading
                        toks.push(at(Tok::Int(0)));
                    }
                }
            } else if let Some(p) = PUNCT.iter().find(|p| text[byte_offset(&chars, i)..].starts_with(**p)) {
                toks.push(at(Tok::Punct(p)));
                i += p.len();
            } else {
                diags.push(error(ln + 1, col, format!("unexpected character `{c}`")));
                i += 1;
            }
        }
    }
    (toks, diags)
}

fn byte_offset(chars: &[char], i: usize) -> usize {
    chars[..i].iter().map(|c| c.len_utf8()).sum()
}

fn error(line: usize, column: usize, message: String) -> Diagnostic {
    Diagnostic { severity: Severity::Error, line, column, message }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
    model: CspModel,
    diags: Vec<Diagnostic>,
}

type Step<T> = std::result::Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.column)).unwrap_or(self.end)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Step<T> {
        let (l, c) = self.here();
        Err(error(l, c, msg.into()))
    }

    fn describe(&self) -> String {
        match self.peek().map(|t| &t.tok) {
            None => "end of input".into(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Int(v)) => format!("`{v}`"),
            Some(Tok::Punct(p)) => format!("`{p}`"),
        }
    }

    fn punct(&mut self, p: &str) -> Step<()> {
        match self.peek() {
            Some(Token { tok: Tok::Punct(q), .. }) if *q == p => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `{p}`, found {}", self.describe())),
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        self.punct(p).is_ok()
    }

    fn ident(&mut self) -> Step<(String, usize, usize)> {
        match self.peek().cloned() {
            Some(Token { tok: Tok::Ident(s), line, column }) => {
                self.pos += 1;
                Ok((s, line, column))
            }
            _ => self.fail(format!("expected a name, found {}", self.describe())),
        }
    }

    fn keyword(&mut self, kw: &str) -> Step<()> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), .. }) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `{kw}`, found {}", self.describe())),
        }
    }

    fn int(&mut self) -> Step<(Value, usize, usize)> {
        match self.peek().cloned() {
            Some(Token { tok: Tok::Int(v), line, column }) => {
                self.pos += 1;
                Ok((v, line, column))
            }
            _ => self.fail(format!("expected an integer, found {}", self.describe())),
        }
    }

    fn variable(&mut self) -> Step<VarId> {
        let (name, line, col) = self.ident()?;
        self.model
            .var_by_name(&name)
            .ok_or_else(|| error(line, col, format!("unknown variable `{name}`")))
    }

    /// Skips past the next `;` after an error.
    fn recover(&mut self) {
        while let Some(t) = self.peek() {
            let semi = t.tok == Tok::Punct(";");
            self.pos += 1;
            if semi {
                break;
            }
        }
    }

    fn statement(&mut self) -> Step<()> {
        let (line, col) = self.here();
        let (kw, _, _) = self.ident()?;
        match kw.as_str() {
            "var" => self.var_decl(),
            "constraint" => self.constraint(line, col),
            other => Err(error(line, col, format!("expected `var` or `constraint`, found `{other}`"))),
        }
    }

    fn var_decl(&mut self) -> Step<()> {
        let (name, line, col) = self.ident()?;
        self.keyword("in")?;
        self.punct("{")?;
        let mut dom = Domain::new();
        if !self.eat_punct("}") {
            loop {
                dom.insert(self.int()?.0);
                if self.eat_punct("}") {
                    break;
                }
                self.punct(",")?;
            }
        }
        self.punct(";")?;
        if dom.is_empty() {
            return Err(error(line, col, format!("variable `{name}` has an empty domain")));
        }
        if self.model.var_by_name(&name).is_some() {
            return Err(error(line, col, format!("variable `{name}` declared twice")));
        }
        self.model.add_variable(name, dom).map(|_| ()).map_err(|e| error(line, col, e.to_string()))
    }

    fn constraint(&mut self, line: usize, col: usize) -> Step<()> {
        let is_table = matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == "table")
            && matches!(self.toks.get(self.pos + 1), Some(Token { tok: Tok::Punct("("), .. }));
        let (scope, relation) = if is_table {
            self.table()?
        } else {
            let x = self.variable()?;
            if self.eat_punct("<") {
                let y = self.variable()?;
                (vec![x, y], Relation::LessThan)
            } else {
                self.punct("=")?;
                let y = self.variable()?;
                if self.eat_punct("++") {
                    let z = self.variable()?;
                    (vec![x, y, z], Relation::Sum3)
                } else {
                    self.plus()?;
                    let (c, _, _) = self.int()?;
                    (vec![x, y], Relation::OffsetEq(c))
                }
            }
        };
        self.punct(";")?;
        self.model
            .add_constraint(scope, relation)
            .map(|_| ())
            .map_err(|e| error(line, col, e.to_string()))
    }

    fn plus(&mut self) -> Step<()> {
        match self.peek() {
            Some(Token { tok: Tok::Punct("+"), .. }) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `+`, `++` or `;`, found {}", self.describe())),
        }
    }

    fn table(&mut self) -> Step<(Vec<VarId>, Relation)> {
        self.keyword("table")?;
        self.punct("(")?;
        let mut scope = vec![self.variable()?];
        while self.eat_punct(",") {
            scope.push(self.variable()?);
        }
        self.punct(")")?;
        self.punct("{")?;
        let mut rows = Vec::new();
        if !self.eat_punct("}") {
            loop {
                let (line, col) = self.here();
                self.punct("(")?;
                let mut row = Vec::new();
                loop {
                    let (v, vl, vc) = self.int()?;
                    if let Some(x) = scope.get(row.len()) {
                        if !self.model.domain(*x).contains(v) {
                            return Err(error(
                                vl,
                                vc,
                                format!("value {v} is outside the domain of `{}`", self.model.name(*x)),
                            ));
                        }
                    }
                    row.push(v);
                    if self.eat_punct(")") {
                        break;
                    }
                    self.punct(",")?;
                }
                if row.len() != scope.len() {
                    return Err(error(
                        line,
                        col,
                        format!("tuple has {} values, table has {} variables", row.len(), scope.len()),
                    ));
                }
                rows.push(row);
                if self.eat_punct("}") {
                    break;
                }
                self.punct(",")?;
            }
        }
        Ok((scope, Relation::table(rows)))
    }
}

/// Parses a whole model. Any diagnostic means no model.
pub fn parse_model(src: &ModelSource) -> Result<CspModel, Vec<Diagnostic>> {
    let (toks, mut diags) = lex(&src.text);
    let last_line = src.text.lines().count().max(1);
    let last_col = src.text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
    let mut p = Parser { toks, pos: 0, end: (last_line, last_col), model: CspModel::new(), diags: Vec::new() };
    while p.peek().is_some() {
        let start = p.pos;
        if let Err(d) = p.statement() {
            p.diags.push(d);
            // semantic errors are raised after the `;` was consumed
            let finished = p.pos > start && p.toks[p.pos - 1].tok == Tok::Punct(";");
            if !finished {
                p.recover();
            }
        }
    }
    diags.append(&mut p.diags);
    if diags.is_empty() {
        Ok(p.model)
    } else {
        diags.sort_by_key(|d| (d.line, d.column));
        Err(diags)
    }
}

/// Canonical text; parsing it gives back an identical model.
pub fn print_model(model: &CspModel) -> String {
    let mut out = String::new();
    for x in model.var_ids() {
        let vals: Vec<String> = model.domain(x).iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("var {} in {{{}}};\n", model.name(x), vals.join(", ")));
    }
    for c in model.constraints() {
        let n = |k: usize| model.name(c.scope[k]);
        let line = match &c.relation {
            Relation::LessThan => format!("{} < {}", n(0), n(1)),
            Relation::OffsetEq(k) => format!("{} = {} + {}", n(0), n(1), k),
            Relation::Sum3 => format!("{} = {} ++ {}", n(0), n(1), n(2)),
            Relation::Table(rows) => {
                let names: Vec<&str> = (0..c.scope.len()).map(n).collect();
                let rows: Vec<String> = rows
                    .iter()
                    .map(|r| format!("({})", r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")))
                    .collect();
                format!("table({}) {{ {} }}", names.join(", "), rows.join(", "))
            }
        };
        out.push_str(&format!("constraint {line};\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<CspModel, Vec<Diagnostic>> {
        parse_model(&ModelSource::inline(text))
    }

    const TRIANGLE: &str = "var x in {0,1,2};\nvar y in {0,1,2};\nvar z in {0,1,2};\n\
        constraint x < y;\nconstraint y < z;\nconstraint z < x;\n";

    #[test]
    fn triangle_source() {
        let m = parse(TRIANGLE).unwrap();
        assert_eq!(m.num_vars(), 3);
        assert_eq!(m.constraints().len(), 3);
        assert_eq!(m.constraints()[2].scope, vec![VarId(2), VarId(0)]);
    }

    #[test]
    fn all_forms_and_comments() {
        let m = parse(
            "# header\nvar x in {1, 2, 3}; # trailing\nvar y in {1,2,3};\nvar z in {-1, 1};\n\
             constraint x = y ++ z;\nconstraint x = y + -2;\nconstraint table(x, z) { (1, -1), (3, 1) };\n",
        )
        .unwrap();
        assert_eq!(m.constraints()[0].relation, Relation::Sum3);
        assert_eq!(m.constraints()[1].relation, Relation::OffsetEq(-2));
        assert_eq!(m.constraints()[2].relation, Relation::Table(vec![vec![1, -1], vec![3, 1]]));
    }

    #[test]
    fn empty_domain_is_diagnosed() {
        let d = parse("var x in {};").unwrap_err();
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].line, d[0].column), (1, 5));
        assert!(d[0].message.contains("empty domain"));
    }

    #[test]
    fn semantic_diagnostics() {
        let d = parse("var x in {0};\nvar x in {1};\nconstraint x < w;\n").unwrap_err();
        assert_eq!(d.len(), 2);
        assert!(d[0].message.contains("declared twice"));
        assert_eq!(d[1].line, 3);
        assert!(d[1].message.contains("unknown variable `w`"));

        let d = parse("var x in {0,1};\nvar y in {0,1};\nconstraint table(x,y) { (0, 2) };").unwrap_err();
        assert!(d[0].message.contains("outside the domain of `y`"));
        assert_eq!((d[0].line, d[0].column), (3, 29));

        let d = parse("var x in {0,1};\nconstraint x < x;").unwrap_err();
        assert!(d[0].message.contains("repeat"));
    }

    #[test]
    fn syntax_diagnostics_recover() {
        let d = parse("var x in {0 1};\nvar y in {0};\nconstraint y < ;\nvar z in {99999999999};").unwrap_err();
        let lines: Vec<usize> = d.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![1, 3, 4]);
        let d = parse("var x in {0};\nvar y in {0};\nconstraint x = y").unwrap_err();
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("end of input"));
    }

    #[test]
    fn non_leq_table_is_accepted() {
        let m = parse("var x in {0,1};\nvar y in {0,1};\nconstraint table(x, y) { (1, 0) };").unwrap();
        assert_eq!(m.constraints()[0].relation, Relation::Table(vec![vec![1, 0]]));
    }

    #[test]
    fn printer_round_trip() {
        let m = parse(TRIANGLE).unwrap();
        let text = print_model(&m);
        assert_eq!(parse(&text).unwrap(), m);
        assert!(text.contains("constraint z < x;"));
    }
}

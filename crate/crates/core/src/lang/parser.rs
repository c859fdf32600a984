//! Line-oriented parser for `.cp` counter programs.
//!
//! ```text
//! counters x y
//! const A = [5, 18]
//! init
//! lbl: x -= 1  y += 1
//! loop ... endloop
//! for i := 1 downto 0 ... endfor
//! if bit(A[0], i) = 1 then ... endif
//! goto lbl or zx{i}
//! halt y
//! ```

use std::collections::BTreeSet;

use num_bigint::BigInt;
use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: undeclared counter {name:?}")]
    UndeclaredCounter { pos: Pos, name: String },
    #[error("{pos}: counter {name:?} declared twice")]
    DuplicateCounter { pos: Pos, name: String },
    #[error("{pos}: unresolved label {label:?}")]
    UnresolvedLabel { pos: Pos, label: String },
    #[error("{pos}: label {label:?} defined twice")]
    DuplicateLabel { pos: Pos, label: String },
    #[error("{pos}: halt must be the last command")]
    HaltNotLast { pos: Pos },
    #[error("{pos}: init must be the first command")]
    InitNotFirst { pos: Pos },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(BigInt),
    PlusEq,
    MinusEq,
    Assign,
    Colon,
    Comma,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Newline,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "{s:?}"),
            Tok::Num(n) => return write!(f, "{n}"),
            Tok::PlusEq => "+=",
            Tok::MinusEq => "-=",
            Tok::Assign => ":=",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Caret => "^",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Newline => "end of line",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

const KEYWORDS: &[&str] = &[
    "counters", "const", "init", "halt", "goto", "or", "and", "not", "loop", "endloop", "for",
    "to", "downto", "endfor", "if", "then", "endif", "true", "false", "bit",
];

const BLOCK_ENDS: &[&str] = &["endloop", "endfor", "endif"];

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = Pos {
                line: li + 1,
                col: i + 1,
            };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((Tok::Num(s.parse().expect("digits")), pos));
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
                continue;
            }
            let next = chars.get(i + 1).copied();
            let (tok, width) = match (c, next) {
                ('+', Some('=')) => (Tok::PlusEq, 2),
                ('-', Some('=')) => (Tok::MinusEq, 2),
                (':', Some('=')) => (Tok::Assign, 2),
                ('!', Some('=')) => (Tok::Ne, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                (':', _) => (Tok::Colon, 1),
                (',', _) => (Tok::Comma, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('^', _) => (Tok::Caret, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('[', _) => (Tok::LBrack, 1),
                (']', _) => (Tok::RBrack, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('=', _) => (Tok::Eq, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                _ => {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: format!("unexpected character {c:?}"),
                    })
                }
            };
            out.push((tok, pos));
            i += width;
        }
        out.push((
            Tok::Newline,
            Pos {
                line: li + 1,
                col: chars.len() + 1,
            },
        ));
    }
    let end = out.last().map(|(_, p)| *p).unwrap_or(Pos { line: 1, col: 1 });
    out.push((Tok::Eof, end));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(format!("expected {kw:?}, found {}", self.peek()))
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {t}, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            t => self.error(format!("expected identifier, found {t}")),
        }
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    /// A statement ends at a newline, or just before a block terminator so
    /// that one-line forms like `loop x -= 1 endloop` work.
    fn end_stmt(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            Tok::Ident(s) if BLOCK_ENDS.contains(&s.as_str()) => Ok(()),
            t => self.error(format!("expected end of line, found {t}")),
        }
    }

    fn program(&mut self) -> PResult<CounterProgram> {
        self.skip_newlines();
        self.expect_kw("counters")?;
        let mut counters: Vec<String> = Vec::new();
        while !matches!(self.peek(), Tok::Newline | Tok::Eof) {
            let pos = self.pos();
            let name = self.ident()?;
            if counters.contains(&name) {
                return Err(ParseError::DuplicateCounter { pos, name });
            }
            counters.push(name);
            if *self.peek() == Tok::Comma {
                self.bump();
            }
        }
        if counters.is_empty() {
            return self.error("expected at least one counter");
        }
        self.skip_newlines();
        let mut consts = Vec::new();
        while self.eat_kw("const") {
            let name = self.ident()?;
            self.expect(Tok::Eq)?;
            let value = if *self.peek() == Tok::LBrack {
                self.bump();
                let mut items = Vec::new();
                while *self.peek() != Tok::RBrack {
                    items.push(self.expr()?);
                    if *self.peek() != Tok::Comma {
                        break;
                    }
                    self.bump();
                }
                self.expect(Tok::RBrack)?;
                ConstValue::Array(items)
            } else {
                ConstValue::Scalar(self.expr()?)
            };
            consts.push(ConstDecl { name, value });
            self.end_stmt()?;
            self.skip_newlines();
        }
        let body = self.block()?;
        if *self.peek() != Tok::Eof {
            return self.error(format!("unexpected {}", self.peek()));
        }
        Ok(CounterProgram {
            counters,
            consts,
            body,
        })
    }

    fn block(&mut self) -> PResult<Vec<Node>> {
        let mut nodes = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek() {
                Tok::Eof => return Ok(nodes),
                Tok::Ident(s) if BLOCK_ENDS.contains(&s.as_str()) => return Ok(nodes),
                _ => nodes.push(self.node()?),
            }
        }
    }

    fn starts_label(&self) -> bool {
        let mut k = 0;
        match self.peek_at(0) {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {}
            Tok::Num(_) | Tok::LBrace => {}
            _ => return false,
        }
        loop {
            match self.peek_at(k) {
                Tok::Ident(_) | Tok::Num(_) => k += 1,
                Tok::LBrace => {
                    while !matches!(self.peek_at(k), Tok::RBrace | Tok::Newline | Tok::Eof) {
                        k += 1;
                    }
                    if *self.peek_at(k) != Tok::RBrace {
                        return false;
                    }
                    k += 1;
                }
                Tok::Colon => return true,
                _ => return false,
            }
        }
    }

    /// Label text: words, numbers and `{expr}` parts written without spaces.
    fn label(&mut self) -> PResult<Label> {
        let mut parts: Vec<LabelPart> = Vec::new();
        let mut last_end: Option<Pos> = None;
        loop {
            let pos = self.pos();
            if let Some(end) = last_end {
                if pos != end {
                    break;
                }
            }
            let text = match self.peek().clone() {
                Tok::Ident(s) if last_end.is_some() || !KEYWORDS.contains(&s.as_str()) => s,
                Tok::Num(n) => n.to_string(),
                Tok::LBrace => {
                    self.bump();
                    let e = self.expr()?;
                    let close = self.pos();
                    self.expect(Tok::RBrace)?;
                    parts.push(LabelPart::Expr(e));
                    last_end = Some(Pos {
                        line: close.line,
                        col: close.col + 1,
                    });
                    continue;
                }
                _ => break,
            };
            self.bump();
            last_end = Some(Pos {
                line: pos.line,
                col: pos.col + text.chars().count(),
            });
            match parts.last_mut() {
                Some(LabelPart::Text(t)) => t.push_str(&text),
                _ => parts.push(LabelPart::Text(text)),
            }
        }
        if parts.is_empty() {
            return self.error(format!("expected label, found {}", self.peek()));
        }
        Ok(Label { parts })
    }

    fn node(&mut self) -> PResult<Node> {
        let pos = self.pos();
        let label = if self.starts_label() {
            let l = self.label()?;
            self.expect(Tok::Colon)?;
            Some(l)
        } else {
            None
        };
        let stmt = self.stmt()?;
        Ok(Node { label, stmt, pos })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            t => return self.error(format!("expected a command, found {t}")),
        };
        let stmt = match kw.as_str() {
            "init" => {
                self.bump();
                Stmt::Init
            }
            "halt" => {
                self.bump();
                let mut tested = Vec::new();
                while matches!(self.peek(), Tok::Ident(_)) {
                    tested.push(self.ident()?);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    }
                }
                Stmt::Halt(tested)
            }
            "goto" => {
                self.bump();
                let a = self.label()?;
                let b = if self.eat_kw("or") {
                    self.label()?
                } else {
                    a.clone()
                };
                Stmt::Goto(a, b)
            }
            "loop" => {
                self.bump();
                let body = self.block()?;
                self.expect_kw("endloop")?;
                Stmt::Loop(body)
            }
            "for" => {
                self.bump();
                let var = self.ident()?;
                self.expect(Tok::Assign)?;
                let from = self.expr()?;
                let dir = if self.eat_kw("to") {
                    Direction::Up
                } else if self.eat_kw("downto") {
                    Direction::Down
                } else {
                    return self.error("expected \"to\" or \"downto\"");
                };
                let to = self.expr()?;
                let body = self.block()?;
                self.expect_kw("endfor")?;
                Stmt::For {
                    var,
                    from,
                    dir,
                    to,
                    body,
                }
            }
            "if" => {
                self.bump();
                let cond = self.cond()?;
                self.expect_kw("then")?;
                let body = self.block()?;
                self.expect_kw("endif")?;
                Stmt::If { cond, body }
            }
            _ if KEYWORDS.contains(&kw.as_str()) => {
                return self.error(format!("unexpected keyword {kw:?}"))
            }
            _ => {
                let mut ops = Vec::new();
                while matches!(self.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str())) {
                    let counter = self.ident()?;
                    let kind = match self.bump() {
                        Tok::PlusEq => OpKind::Add,
                        Tok::MinusEq => OpKind::Sub,
                        t => return self.error(format!("expected += or -=, found {t}")),
                    };
                    let amount = self.expr()?;
                    ops.push(CounterOp {
                        counter,
                        kind,
                        amount,
                    });
                }
                Stmt::Update(ops)
            }
        };
        self.end_stmt()?;
        Ok(stmt)
    }

    fn expr(&mut self) -> PResult<MetaExpr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = MetaExpr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> PResult<MetaExpr> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.unary()?;
            lhs = MetaExpr::bin(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<MetaExpr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(MetaExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<MetaExpr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(MetaExpr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<MetaExpr> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(MetaExpr::Num(n))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "bit" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let v = self.expr()?;
                self.expect(Tok::Comma)?;
                let i = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(MetaExpr::Bit(Box::new(v), Box::new(i)))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if *self.peek() == Tok::LBrack {
                    self.bump();
                    let i = self.expr()?;
                    self.expect(Tok::RBrack)?;
                    return Ok(MetaExpr::Index(name, Box::new(i)));
                }
                Ok(MetaExpr::Var(name))
            }
            t => self.error(format!("expected expression, found {t}")),
        }
    }

    fn cond(&mut self) -> PResult<MetaCond> {
        let mut lhs = self.conj()?;
        while self.eat_kw("or") {
            let rhs = self.conj()?;
            lhs = MetaCond::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<MetaCond> {
        let mut lhs = self.neg()?;
        while self.eat_kw("and") {
            let rhs = self.neg()?;
            lhs = MetaCond::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn neg(&mut self) -> PResult<MetaCond> {
        if self.eat_kw("not") {
            return Ok(MetaCond::Not(Box::new(self.neg()?)));
        }
        if self.eat_kw("true") {
            return Ok(MetaCond::Bool(true));
        }
        if self.eat_kw("false") {
            return Ok(MetaCond::Bool(false));
        }
        if *self.peek() == Tok::LParen {
            // Either a parenthesized condition or a comparison whose left
            // side starts with a parenthesized expression.
            let save = self.at;
            self.bump();
            if let Ok(c) = self.cond() {
                if *self.peek() == Tok::RParen {
                    self.bump();
                    if cmp_op(self.peek()).is_none() && !is_arith(self.peek()) {
                        return Ok(c);
                    }
                }
            }
            self.at = save;
        }
        let a = self.expr()?;
        let op = match cmp_op(self.peek()) {
            Some(op) => op,
            None => return self.error(format!("expected comparison, found {}", self.peek())),
        };
        self.bump();
        let b = self.expr()?;
        Ok(MetaCond::Cmp(op, a, b))
    }
}

fn cmp_op(t: &Tok) -> Option<CmpOp> {
    Some(match t {
        Tok::Eq => CmpOp::Eq,
        Tok::Ne => CmpOp::Ne,
        Tok::Lt => CmpOp::Lt,
        Tok::Le => CmpOp::Le,
        Tok::Gt => CmpOp::Gt,
        Tok::Ge => CmpOp::Ge,
        _ => return None,
    })
}

fn is_arith(t: &Tok) -> bool {
    matches!(t, Tok::Plus | Tok::Minus | Tok::Star | Tok::Caret)
}

/// Parse a program or fragment. `init` and `halt` are optional, but when
/// present `init` must come first and `halt` last.
pub fn parse(text: &str) -> Result<CounterProgram, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let prog = p.program()?;
    check(&prog)?;
    Ok(prog)
}

fn check(prog: &CounterProgram) -> Result<(), ParseError> {
    let mut defined = BTreeSet::new();
    let templated = collect_labels(&prog.body, &mut defined)?;
    // A templated definition may expand to any name, so static references
    // are then left to expansion.
    let labels = (!templated).then_some(&defined);
    walk(prog, &prog.body, true, labels)
}

/// Collect static label names; returns whether any label is templated.
fn collect_labels(nodes: &[Node], out: &mut BTreeSet<String>) -> Result<bool, ParseError> {
    let mut templated = false;
    for n in nodes {
        match n.label.as_ref().map(|l| l.as_static()) {
            Some(Some(name)) => {
                if !out.insert(name.clone()) {
                    return Err(ParseError::DuplicateLabel {
                        pos: n.pos,
                        label: name,
                    });
                }
            }
            Some(None) => templated = true,
            None => {}
        }
        if let Some(body) = n.stmt.children() {
            templated |= collect_labels(body, out)?;
        }
    }
    Ok(templated)
}

fn walk(
    prog: &CounterProgram,
    nodes: &[Node],
    top: bool,
    labels: Option<&BTreeSet<String>>,
) -> Result<(), ParseError> {
    let declared = |name: &str, pos: Pos| {
        if prog.counters.iter().any(|c| c == name) {
            Ok(())
        } else {
            Err(ParseError::UndeclaredCounter {
                pos,
                name: name.to_string(),
            })
        }
    };
    for (i, n) in nodes.iter().enumerate() {
        match &n.stmt {
            Stmt::Init if !(top && i == 0) => return Err(ParseError::InitNotFirst { pos: n.pos }),
            Stmt::Halt(_) if !(top && i + 1 == nodes.len()) => {
                return Err(ParseError::HaltNotLast { pos: n.pos })
            }
            Stmt::Halt(cs) => {
                for c in cs {
                    declared(c, n.pos)?;
                }
            }
            Stmt::Update(ops) => {
                for op in ops {
                    declared(&op.counter, n.pos)?;
                }
            }
            Stmt::Goto(a, b) => {
                for l in [a, b] {
                    if let (Some(name), Some(labels)) = (l.as_static(), labels) {
                        if !labels.contains(&name) {
                            return Err(ParseError::UnresolvedLabel {
                                pos: n.pos,
                                label: name,
                            });
                        }
                    }
                }
            }
            _ => {}
        }
        if let Some(body) = n.stmt.children() {
            walk(prog, body, false, labels)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops(node: &Node) -> &[CounterOp] {
        match &node.stmt {
            Stmt::Update(ops) => ops,
            s => panic!("not an update: {s:?}"),
        }
    }

    #[test]
    fn three_commands() {
        let p = parse("counters x\ninit\nx += 1\nhalt x").unwrap();
        assert_eq!(p.body.len(), 3);
        assert!(p.is_complete());
        assert_eq!(ops(&p.body[1])[0].kind, OpKind::Add);
    }

    #[test]
    fn weak_multiplication_text() {
        let src = "counters x y\nloop\n  x -= 1  y += 1\nendloop\nloop\n  x += 3  y -= 2\nendloop\n";
        let p = parse(src).unwrap();
        assert_eq!(p.body.len(), 2);
        for n in &p.body {
            match &n.stmt {
                Stmt::Loop(b) => assert_eq!(ops(&b[0]).len(), 2),
                s => panic!("{s:?}"),
            }
        }
    }

    #[test]
    fn unresolved_numeric_label() {
        let src = "counters x\ninit\n1: x += 1\ngoto 99 or 100\nhalt";
        match parse(src) {
            Err(ParseError::UnresolvedLabel { label, pos }) => {
                assert_eq!(label, "99");
                assert_eq!(pos.line, 4);
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            parse("counters x\ninit\nhalt\nx += 1"),
            Err(ParseError::HaltNotLast { .. })
        ));
        assert!(matches!(
            parse("counters x\nx += 1\ninit\nhalt"),
            Err(ParseError::InitNotFirst { .. })
        ));
        assert!(matches!(
            parse("counters x\ninit\ny += 1\nhalt"),
            Err(ParseError::UndeclaredCounter { .. })
        ));
        assert!(matches!(
            parse("counters x\ninit\nloop\nhalt\nendloop"),
            Err(ParseError::HaltNotLast { .. })
        ));
        assert!(matches!(
            parse("counters x\na: x += 1\na: x += 1"),
            Err(ParseError::DuplicateLabel { .. })
        ));
        match parse("counters x\ninit\nx += $") {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!((pos.line, pos.col), (3, 6)),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn meta_macros_and_templates() {
        let src = "counters x z\nconst A = [5, 18]\nfor i := 2 downto 1\n  zx{i}: z += 2 ^ i\n  if bit(A[i - 1], 0) = 1 and not (i = 2) then\n    x -= A[i - 1]\n  endif\n  goto zx{i} or zx{i}\nendfor\n";
        let p = parse(src).unwrap();
        assert_eq!(p.consts.len(), 1);
        let Stmt::For { dir, body, .. } = &p.body[0].stmt else {
            panic!()
        };
        assert_eq!(*dir, Direction::Down);
        assert_eq!(body.len(), 3);
        let label = body[0].label.as_ref().unwrap();
        assert_eq!(label.parts.len(), 2);
        assert!(label.as_static().is_none());
    }

    #[test]
    fn one_line_blocks_and_primes() {
        let p = parse("counters x x'\nloop x -= 1 x' += 1 endloop").unwrap();
        let Stmt::Loop(b) = &p.body[0].stmt else {
            panic!()
        };
        assert_eq!(ops(&b[0])[1].counter, "x'");
    }

    #[test]
    fn precedence() {
        let p = parse("counters x\nx += 2 * 3 ^ 2 - -1 + 4").unwrap();
        let e = &ops(&p.body[0])[0].amount;
        let env = crate::lang::meta::Env::default();
        assert_eq!(env.eval(e).unwrap(), BigInt::from(23));
    }
}

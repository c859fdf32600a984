//! Pretty printing. Output re-parses to a structurally identical AST.

use std::fmt::Write;

use super::ast::*;
use super::expand::{FlatCommand, FlatProgram};

const INDENT: &str = "  ";

fn expr_prec(e: &MetaExpr) -> u8 {
    match e {
        MetaExpr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        MetaExpr::Bin(BinOp::Mul, ..) => 2,
        MetaExpr::Neg(_) => 3,
        MetaExpr::Bin(BinOp::Pow, ..) => 4,
        MetaExpr::Num(n) if n.sign() == num_bigint::Sign::Minus => 3,
        _ => 5,
    }
}

fn expr_at(e: &MetaExpr, min: u8, out: &mut String) {
    if expr_prec(e) < min {
        out.push('(');
        expr_into(e, out);
        out.push(')');
    } else {
        expr_into(e, out);
    }
}

fn expr_into(e: &MetaExpr, out: &mut String) {
    match e {
        MetaExpr::Num(n) => {
            let _ = write!(out, "{n}");
        }
        MetaExpr::Var(v) => out.push_str(v),
        MetaExpr::Index(name, i) => {
            out.push_str(name);
            out.push('[');
            expr_into(i, out);
            out.push(']');
        }
        MetaExpr::Neg(a) => {
            out.push('-');
            expr_at(a, 3, out);
        }
        MetaExpr::Bin(op, a, b) => {
            let (sym, lmin, rmin) = match op {
                BinOp::Add => (" + ", 1, 2),
                BinOp::Sub => (" - ", 1, 2),
                BinOp::Mul => (" * ", 2, 3),
                BinOp::Pow => (" ^ ", 5, 3),
            };
            expr_at(a, lmin, out);
            out.push_str(sym);
            expr_at(b, rmin, out);
        }
        MetaExpr::Bit(v, i) => {
            out.push_str("bit(");
            expr_into(v, out);
            out.push_str(", ");
            expr_into(i, out);
            out.push(')');
        }
    }
}

pub fn expr_to_string(e: &MetaExpr) -> String {
    let mut s = String::new();
    expr_into(e, &mut s);
    s
}

fn cond_prec(c: &MetaCond) -> u8 {
    match c {
        MetaCond::Or(..) => 1,
        MetaCond::And(..) => 2,
        MetaCond::Not(_) => 3,
        _ => 4,
    }
}

fn cond_at(c: &MetaCond, min: u8, out: &mut String) {
    if cond_prec(c) < min {
        out.push('(');
        cond_into(c, out);
        out.push(')');
    } else {
        cond_into(c, out);
    }
}

fn cond_into(c: &MetaCond, out: &mut String) {
    match c {
        MetaCond::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        MetaCond::Cmp(op, a, b) => {
            expr_into(a, out);
            out.push_str(match op {
                CmpOp::Eq => " = ",
                CmpOp::Ne => " != ",
                CmpOp::Lt => " < ",
                CmpOp::Le => " <= ",
                CmpOp::Gt => " > ",
                CmpOp::Ge => " >= ",
            });
            expr_into(b, out);
        }
        MetaCond::And(a, b) => {
            cond_at(a, 2, out);
            out.push_str(" and ");
            cond_at(b, 3, out);
        }
        MetaCond::Or(a, b) => {
            cond_at(a, 1, out);
            out.push_str(" or ");
            cond_at(b, 2, out);
        }
        MetaCond::Not(a) => {
            out.push_str("not ");
            cond_at(a, 3, out);
        }
    }
}

pub fn label_to_string(l: &Label) -> String {
    let mut s = String::new();
    for p in &l.parts {
        match p {
            LabelPart::Text(t) => s.push_str(t),
            LabelPart::Expr(e) => {
                s.push('{');
                expr_into(e, &mut s);
                s.push('}');
            }
        }
    }
    s
}

fn goto_text(a: &str, b: &str) -> String {
    if a == b {
        format!("goto {a}")
    } else {
        format!("goto {a} or {b}")
    }
}

fn ops_text(ops: &[CounterOp]) -> String {
    ops.iter()
        .map(|op| {
            let sym = match op.kind {
                OpKind::Add => "+=",
                OpKind::Sub => "-=",
            };
            format!("{} {sym} {}", op.counter, expr_to_string(&op.amount))
        })
        .collect::<Vec<_>>()
        .join("  ")
}

fn halt_text(cs: &[String]) -> String {
    if cs.is_empty() {
        "halt".to_string()
    } else {
        format!("halt {}", cs.join(" "))
    }
}

fn nodes(body: &[Node], depth: usize, out: &mut String) {
    for n in body {
        let pad = INDENT.repeat(depth);
        out.push_str(&pad);
        if let Some(l) = &n.label {
            let _ = write!(out, "{}: ", label_to_string(l));
        }
        match &n.stmt {
            Stmt::Init => out.push_str("init\n"),
            Stmt::Halt(cs) => {
                out.push_str(&halt_text(cs));
                out.push('\n');
            }
            Stmt::Update(ops) => {
                out.push_str(&ops_text(ops));
                out.push('\n');
            }
            Stmt::Goto(a, b) => {
                out.push_str(&goto_text(&label_to_string(a), &label_to_string(b)));
                out.push('\n');
            }
            Stmt::Loop(b) => {
                out.push_str("loop\n");
                nodes(b, depth + 1, out);
                let _ = writeln!(out, "{pad}endloop");
            }
            Stmt::For {
                var,
                from,
                dir,
                to,
                body,
            } => {
                let d = match dir {
                    Direction::Up => "to",
                    Direction::Down => "downto",
                };
                let _ = writeln!(
                    out,
                    "for {var} := {} {d} {}",
                    expr_to_string(from),
                    expr_to_string(to)
                );
                nodes(body, depth + 1, out);
                let _ = writeln!(out, "{pad}endfor");
            }
            Stmt::If { cond, body } => {
                out.push_str("if ");
                cond_into(cond, out);
                out.push_str(" then\n");
                nodes(body, depth + 1, out);
                let _ = writeln!(out, "{pad}endif");
            }
        }
    }
}

pub fn print_program(p: &CounterProgram) -> String {
    let mut out = format!("counters {}\n", p.counters.join(" "));
    for c in &p.consts {
        let v = match &c.value {
            ConstValue::Scalar(e) => expr_to_string(e),
            ConstValue::Array(es) => format!(
                "[{}]",
                es.iter().map(expr_to_string).collect::<Vec<_>>().join(", ")
            ),
        };
        let _ = writeln!(out, "const {} = {v}", c.name);
    }
    nodes(&p.body, 0, &mut out);
    out
}

/// Numbered lines; gotos refer to line numbers.
pub fn print_flat(p: &FlatProgram) -> String {
    let mut out = format!("counters {}\n", p.counters.join(" "));
    let width = p.commands.len().to_string().len();
    for (i, c) in p.commands.iter().enumerate() {
        let text = match c {
            FlatCommand::Init => "init".to_string(),
            FlatCommand::Halt(cs) => {
                let names: Vec<String> = cs.iter().map(|&c| p.counters[c].clone()).collect();
                halt_text(&names)
            }
            FlatCommand::Update(ops) => ops
                .iter()
                .map(|op| {
                    let sym = match op.kind {
                        OpKind::Add => "+=",
                        OpKind::Sub => "-=",
                    };
                    format!("{} {sym} {}", p.counters[op.counter], op.amount)
                })
                .collect::<Vec<_>>()
                .join("  "),
            FlatCommand::Goto(a, b) => goto_text(&(a + 1).to_string(), &(b + 1).to_string()),
        };
        let _ = writeln!(out, "{:>width$}: {text}", i + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;
    use proptest::prelude::*;

    fn arb_expr() -> impl Strategy<Value = MetaExpr> {
        let leaf = prop_oneof![
            (0u32..50).prop_map(MetaExpr::num),
            "[a-c]".prop_map(|s| MetaExpr::var(&s)),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), 0..4usize).prop_map(|(a, b, k)| {
                    let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Pow][k];
                    MetaExpr::bin(op, a, b)
                }),
                inner.clone().prop_map(|a| MetaExpr::Neg(Box::new(a))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| MetaExpr::Bit(Box::new(a), Box::new(b))),
                inner.prop_map(|a| MetaExpr::Index("A".into(), Box::new(a))),
            ]
        })
    }

    fn arb_cond() -> impl Strategy<Value = MetaCond> {
        let leaf = prop_oneof![
            any::<bool>().prop_map(MetaCond::Bool),
            (arb_expr(), arb_expr()).prop_map(|(a, b)| MetaCond::Cmp(CmpOp::Le, a, b)),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| MetaCond::And(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| MetaCond::Or(Box::new(a), Box::new(b))),
                inner.prop_map(|a| MetaCond::Not(Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn expressions_round_trip(e in arb_expr(), c in arb_cond()) {
            let prog = CounterProgram {
                counters: vec!["x".into()],
                consts: vec![],
                body: vec![
                    Node::new(Stmt::Update(vec![CounterOp {
                        counter: "x".into(),
                        kind: OpKind::Add,
                        amount: e,
                    }])),
                    Node::new(Stmt::If { cond: c, body: vec![] }),
                ],
            };
            let text = print_program(&prog);
            prop_assert_eq!(parse(&text).unwrap(), prog, "{}", text);
        }
    }

    #[test]
    fn flat_lines_are_numbered() {
        let src = "counters x\ninit\nloop\nx += 1\nendloop\nhalt x\n";
        let e = super::super::expand::expand(&parse(src).unwrap()).unwrap();
        let text = print_flat(&e.program);
        assert_eq!(
            text,
            "counters x\n1: init\n2: goto 5 or 3\n3: x += 1\n4: goto 2\n5: halt x\n"
        );
    }
}

use num_bigint::BigInt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Pow,
}

/// Compile-time integer expression over meta-variables and constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetaExpr {
    Num(BigInt),
    Var(String),
    /// `name[index]` into a constant array.
    Index(String, Box<MetaExpr>),
    Neg(Box<MetaExpr>),
    Bin(BinOp, Box<MetaExpr>, Box<MetaExpr>),
    /// `bit(value, i)`: bit `i` of `value`, as 0 or 1.
    Bit(Box<MetaExpr>, Box<MetaExpr>),
}

impl MetaExpr {
    pub fn num(n: impl Into<BigInt>) -> Self {
        MetaExpr::Num(n.into())
    }

    pub fn var(name: &str) -> Self {
        MetaExpr::Var(name.to_string())
    }

    pub fn bin(op: BinOp, a: MetaExpr, b: MetaExpr) -> Self {
        MetaExpr::Bin(op, Box::new(a), Box::new(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetaCond {
    Bool(bool),
    Cmp(CmpOp, MetaExpr, MetaExpr),
    And(Box<MetaCond>, Box<MetaCond>),
    Or(Box<MetaCond>, Box<MetaCond>),
    Not(Box<MetaCond>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelPart {
    Text(String),
    /// `{expr}`, replaced by the decimal value of `expr`.
    Expr(MetaExpr),
}

/// A label, possibly interpolating meta-expressions (`zx{i}`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Label {
    pub parts: Vec<LabelPart>,
}

impl Label {
    pub fn plain(name: &str) -> Self {
        Label {
            parts: vec![LabelPart::Text(name.to_string())],
        }
    }

    /// The label text when it has no interpolations.
    pub fn as_static(&self) -> Option<String> {
        let mut s = String::new();
        for p in &self.parts {
            match p {
                LabelPart::Text(t) => s.push_str(t),
                LabelPart::Expr(_) => return None,
            }
        }
        Some(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstValue {
    Scalar(MetaExpr),
    Array(Vec<MetaExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstDecl {
    pub name: String,
    pub value: ConstValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Add,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterOp {
    pub counter: String,
    pub kind: OpKind,
    pub amount: MetaExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Init,
    /// Halt, zero-testing the listed counters.
    Halt(Vec<String>),
    /// One line of simultaneous increments and decrements.
    Update(Vec<CounterOp>),
    Goto(Label, Label),
    Loop(Vec<Node>),
    For {
        var: String,
        from: MetaExpr,
        dir: Direction,
        to: MetaExpr,
        body: Vec<Node>,
    },
    If {
        cond: MetaCond,
        body: Vec<Node>,
    },
}

impl Stmt {
    pub fn children(&self) -> Option<&[Node]> {
        match self {
            Stmt::Loop(b) | Stmt::For { body: b, .. } | Stmt::If { body: b, .. } => Some(b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub label: Option<Label>,
    pub stmt: Stmt,
    pub pos: Pos,
}

/// Source positions are diagnostics only and do not take part in equality.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.stmt == other.stmt
    }
}

impl Eq for Node {}

impl Node {
    pub fn new(stmt: Stmt) -> Self {
        Node {
            label: None,
            stmt,
            pos: Pos::default(),
        }
    }

    pub fn labeled(label: &str, stmt: Stmt) -> Self {
        Node {
            label: Some(Label::plain(label)),
            stmt,
            pos: Pos::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterProgram {
    pub counters: Vec<String>,
    pub consts: Vec<ConstDecl>,
    pub body: Vec<Node>,
}

impl CounterProgram {
    /// Starts with `init` and ends with `halt`.
    pub fn is_complete(&self) -> bool {
        matches!(self.body.first().map(|n| &n.stmt), Some(Stmt::Init))
            && matches!(self.body.last().map(|n| &n.stmt), Some(Stmt::Halt(_)))
    }

    pub fn counter_index(&self, name: &str) -> Option<usize> {
        self.counters.iter().position(|c| c == name)
    }
}

/// One step of a path from the program root to a node. `iteration` holds the
/// meta-variable value when the step goes through a `for`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathStep {
    pub index: usize,
    pub iteration: Option<BigInt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Command,
    LoopEntry,
    LoopBack,
}

/// A control point of the structured program: the node reached by `path`,
/// with a role distinguishing the two synthetic lines of a `loop`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProgramPoint {
    pub path: Vec<PathStep>,
    pub role: Role,
}

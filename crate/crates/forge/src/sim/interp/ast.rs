//! Parse-level syntax tree, before elaboration.

use super::eval::{BinOp, Edge, UnaryOp, Val};

#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub modules: Vec<Module>,
}

#[derive(Debug, Clone)]
pub struct Module {
    pub name: String,
    pub ports: Vec<PortDecl>,
    pub items: Vec<Item>,
    pub line: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Input,
    Output,
}

#[derive(Debug, Clone)]
pub struct PortDecl {
    pub name: String,
    /// None for non-ANSI port lists; the direction then comes from a
    /// matching `input`/`output` item inside the body.
    pub dir: Option<Dir>,
    pub is_reg: bool,
    pub range: Option<(Expr, Expr)>,
    pub line: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Wire,
    Reg,
    Integer,
}

#[derive(Debug, Clone)]
pub enum Item {
    Decl {
        kind: DeclKind,
        range: Option<(Expr, Expr)>,
        names: Vec<(String, Option<Expr>)>,
        line: u32,
    },
    /// `input`/`output` declaration in the body (non-ANSI style).
    PortDir {
        dir: Dir,
        is_reg: bool,
        range: Option<(Expr, Expr)>,
        names: Vec<String>,
        line: u32,
    },
    Param {
        name: String,
        value: Expr,
        line: u32,
    },
    ContAssign {
        lhs: LValue,
        rhs: Expr,
        line: u32,
    },
    Always {
        body: Stmt,
        line: u32,
    },
    Initial {
        body: Stmt,
        line: u32,
    },
    Instance {
        module: String,
        name: String,
        param_overrides: Vec<(Option<String>, Expr)>,
        conns: Vec<(Option<String>, Option<Expr>)>,
        line: u32,
    },
}

#[derive(Debug, Clone)]
pub enum Stmt {
    Block(Vec<Stmt>),
    Assign {
        lhs: LValue,
        rhs: Expr,
        nonblocking: bool,
        line: u32,
    },
    If {
        cond: Expr,
        then: Box<Stmt>,
        alt: Option<Box<Stmt>>,
    },
    Case {
        subject: Expr,
        arms: Vec<(Vec<Expr>, Stmt)>,
        default: Option<Box<Stmt>>,
        wildcard: bool,
        line: u32,
    },
    For {
        init: Box<Stmt>,
        cond: Expr,
        step: Box<Stmt>,
        body: Box<Stmt>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    Repeat {
        count: Expr,
        body: Box<Stmt>,
    },
    Forever {
        body: Box<Stmt>,
    },
    Delay {
        amount: Expr,
        then: Option<Box<Stmt>>,
    },
    EventWait {
        events: Vec<(Edge, String)>,
        /// true for `@(*)` / `@*`: sensitivity inferred from the body.
        star: bool,
        then: Option<Box<Stmt>>,
        line: u32,
    },
    SysCall {
        name: String,
        args: Vec<SysArg>,
        line: u32,
    },
    Null,
}

#[derive(Debug, Clone)]
pub enum SysArg {
    Str(String),
    Expr(Expr),
}

#[derive(Debug, Clone)]
pub enum LValue {
    Ident(String, u32),
    Index(String, Expr, u32),
    Slice(String, Expr, Expr, u32),
    Concat(Vec<LValue>),
}

#[derive(Debug, Clone)]
pub enum Expr {
    Const(Val),
    Ident(String, u32),
    Index(Box<Expr>, Box<Expr>),
    Slice(Box<Expr>, Box<Expr>, Box<Expr>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Concat(Vec<Expr>),
    Repl(Box<Expr>, Box<Expr>),
    Time,
}

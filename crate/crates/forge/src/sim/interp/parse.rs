//! Recursive-descent parser for the supported Verilog subset.

use super::ast::*;
use super::eval::{BinOp, Edge, UnaryOp};
use super::lex::{lex, SpannedTok, Tok};
use super::CompileError;

pub fn parse(src: &str) -> Result<SourceUnit, CompileError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut modules = Vec::new();
    while !p.at_eof() {
        if p.eat_ident("module") {
            modules.push(p.module()?);
        } else {
            return Err(p.err("expected 'module'"));
        }
    }
    Ok(SourceUnit { modules })
}

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
}

const KEYWORDS: &[&str] = &[
    "module", "endmodule", "input", "output", "inout", "wire", "reg", "integer", "parameter",
    "localparam", "assign", "always", "initial", "begin", "end", "if", "else", "case", "casez",
    "casex", "endcase", "default", "for", "while", "repeat", "forever", "posedge", "negedge",
    "or", "signed", "task", "endtask", "function", "endfunction", "generate", "endgenerate",
    "genvar", "real", "time", "event", "deassign", "force", "release", "wait", "fork", "join",
];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn line(&self) -> u32 {
        self.toks[self.pos].line
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: &str) -> CompileError {
        CompileError::at(self.line(), &format!("{msg}, found {}", describe(self.peek())))
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), CompileError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{p}'")))
        }
    }

    fn peek_ident(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_ident(&mut self, kw: &str) -> bool {
        if self.peek_ident(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self, kw: &str) -> Result<(), CompileError> {
        if self.eat_ident(kw) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{kw}'")))
        }
    }

    fn name(&mut self) -> Result<String, CompileError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    // ---- module structure ----

    fn module(&mut self) -> Result<Module, CompileError> {
        let line = self.line();
        let name = self.name()?;
        let mut items = Vec::new();
        if self.eat_punct("#") {
            self.expect_punct("(")?;
            self.header_params(&mut items)?;
            self.expect_punct(")")?;
        }
        let mut ports = Vec::new();
        if self.eat_punct("(") {
            if !self.eat_punct(")") {
                self.port_list(&mut ports)?;
                self.expect_punct(")")?;
            }
        }
        self.expect_punct(";")?;
        while !self.eat_ident("endmodule") {
            if self.at_eof() {
                return Err(self.err("expected 'endmodule'"));
            }
            items.push(self.item()?);
        }
        Ok(Module {
            name,
            ports,
            items,
            line,
        })
    }

    fn header_params(&mut self, items: &mut Vec<Item>) -> Result<(), CompileError> {
        loop {
            let line = self.line();
            self.eat_ident("parameter");
            if self.eat_punct("[") {
                // parameter range is irrelevant for constant folding
                self.expr()?;
                self.expect_punct(":")?;
                self.expr()?;
                self.expect_punct("]")?;
            }
            let name = self.name()?;
            self.expect_punct("=")?;
            let value = self.expr()?;
            items.push(Item::Param { name, value, line });
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(())
    }

    fn range(&mut self) -> Result<Option<(Expr, Expr)>, CompileError> {
        if self.eat_punct("[") {
            let msb = self.expr()?;
            self.expect_punct(":")?;
            let lsb = self.expr()?;
            self.expect_punct("]")?;
            Ok(Some((msb, lsb)))
        } else {
            Ok(None)
        }
    }

    fn port_list(&mut self, ports: &mut Vec<PortDecl>) -> Result<(), CompileError> {
        let mut cur: Option<(Dir, bool, Option<(Expr, Expr)>)> = None;
        loop {
            let line = self.line();
            if self.peek_ident("inout") {
                return Err(self.err("unsupported: inout ports"));
            }
            let dir = if self.eat_ident("input") {
                Some(Dir::Input)
            } else if self.eat_ident("output") {
                Some(Dir::Output)
            } else {
                None
            };
            if let Some(d) = dir {
                let is_reg = if self.eat_ident("reg") {
                    true
                } else {
                    self.eat_ident("wire");
                    false
                };
                self.eat_ident("signed");
                let range = self.range()?;
                cur = Some((d, is_reg, range));
                let name = self.name()?;
                let (d, r, rng) = cur.clone().map(|(a, b, c)| (a, b, c)).unwrap();
                ports.push(PortDecl {
                    name,
                    dir: Some(d),
                    is_reg: r,
                    range: rng,
                    line,
                });
            } else {
                let name = self.name()?;
                match &cur {
                    Some((d, r, rng)) => ports.push(PortDecl {
                        name,
                        dir: Some(*d),
                        is_reg: *r,
                        range: rng.clone(),
                        line,
                    }),
                    None => ports.push(PortDecl {
                        name,
                        dir: None,
                        is_reg: false,
                        range: None,
                        line,
                    }),
                }
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(())
    }

    fn item(&mut self) -> Result<Item, CompileError> {
        let line = self.line();
        if self.peek_ident("task") || self.peek_ident("function") {
            return Err(self.err("unsupported: tasks and functions"));
        }
        if self.peek_ident("generate") || self.peek_ident("genvar") {
            return Err(self.err("unsupported: generate blocks"));
        }
        if self.eat_ident("input") {
            return self.port_dir_item(Dir::Input, line);
        }
        if self.eat_ident("output") {
            return self.port_dir_item(Dir::Output, line);
        }
        if self.peek_ident("inout") {
            return Err(self.err("unsupported: inout ports"));
        }
        for (kw, kind) in [
            ("wire", DeclKind::Wire),
            ("reg", DeclKind::Reg),
            ("integer", DeclKind::Integer),
        ] {
            if self.eat_ident(kw) {
                self.eat_ident("signed");
                let range = self.range()?;
                let mut names = Vec::new();
                loop {
                    let name = self.name()?;
                    if matches!(self.peek(), Tok::Punct("[")) {
                        return Err(self.err("unsupported: memory arrays"));
                    }
                    let init = if self.eat_punct("=") {
                        Some(self.expr()?)
                    } else {
                        None
                    };
                    names.push((name, init));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")?;
                return Ok(Item::Decl {
                    kind,
                    range,
                    names,
                    line,
                });
            }
        }
        if self.eat_ident("parameter") || self.eat_ident("localparam") {
            if self.eat_punct("[") {
                self.expr()?;
                self.expect_punct(":")?;
                self.expr()?;
                self.expect_punct("]")?;
            }
            let mut first = None;
            loop {
                let name = self.name()?;
                self.expect_punct("=")?;
                let value = self.expr()?;
                match first {
                    None => first = Some(Item::Param { name, value, line }),
                    Some(_) => {
                        return Err(self.err("unsupported: multiple parameters per statement"))
                    }
                }
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(";")?;
            return Ok(first.unwrap());
        }
        if self.eat_ident("assign") {
            let lhs = self.lvalue()?;
            self.expect_punct("=")?;
            let rhs = self.expr()?;
            self.expect_punct(";")?;
            return Ok(Item::ContAssign { lhs, rhs, line });
        }
        if self.eat_ident("always") {
            let body = self.stmt()?;
            return Ok(Item::Always { body, line });
        }
        if self.eat_ident("initial") {
            let body = self.stmt()?;
            return Ok(Item::Initial { body, line });
        }
        // otherwise: a module instantiation
        let module = self.name()?;
        let mut param_overrides = Vec::new();
        if self.eat_punct("#") {
            self.expect_punct("(")?;
            param_overrides = self.conn_list()?
                .into_iter()
                .map(|(n, e)| match e {
                    Some(e) => Ok((n, e)),
                    None => Err(CompileError::at(line, "empty parameter override")),
                })
                .collect::<Result<_, _>>()?;
            self.expect_punct(")")?;
        }
        let name = self.name()?;
        self.expect_punct("(")?;
        let conns = if self.eat_punct(")") {
            Vec::new()
        } else {
            let c = self.conn_list()?;
            self.expect_punct(")")?;
            c
        };
        self.expect_punct(";")?;
        Ok(Item::Instance {
            module,
            name,
            param_overrides,
            conns,
            line,
        })
    }

    fn port_dir_item(&mut self, dir: Dir, line: u32) -> Result<Item, CompileError> {
        let is_reg = self.eat_ident("reg");
        self.eat_ident("signed");
        let range = self.range()?;
        let mut names = Vec::new();
        loop {
            names.push(self.name()?);
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")?;
        Ok(Item::PortDir {
            dir,
            is_reg,
            range,
            names,
            line,
        })
    }

    fn conn_list(&mut self) -> Result<Vec<(Option<String>, Option<Expr>)>, CompileError> {
        let mut conns = Vec::new();
        loop {
            if self.eat_punct(".") {
                let name = self.name()?;
                self.expect_punct("(")?;
                let expr = if matches!(self.peek(), Tok::Punct(")")) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect_punct(")")?;
                conns.push((Some(name), expr));
            } else {
                conns.push((None, Some(self.expr()?)));
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(conns)
    }

    // ---- statements ----

    fn stmt(&mut self) -> Result<Stmt, CompileError> {
        let line = self.line();
        if self.eat_ident("begin") {
            if self.eat_punct(":") {
                self.name()?; // block label, ignored
            }
            let mut stmts = Vec::new();
            while !self.eat_ident("end") {
                if self.at_eof() {
                    return Err(CompileError::at(line, "unbalanced begin: missing 'end'"));
                }
                stmts.push(self.stmt()?);
            }
            return Ok(Stmt::Block(stmts));
        }
        if self.peek_ident("end") || self.peek_ident("endcase") {
            return Err(self.err("unbalanced 'end'"));
        }
        if self.peek_ident("fork") {
            return Err(self.err("unsupported: fork/join"));
        }
        if self.peek_ident("wait") {
            return Err(self.err("unsupported: wait statements"));
        }
        if self.eat_ident("if") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let then = Box::new(self.stmt()?);
            let alt = if self.eat_ident("else") {
                Some(Box::new(self.stmt()?))
            } else {
                None
            };
            return Ok(Stmt::If { cond, then, alt });
        }
        for (kw, wildcard) in [("case", false), ("casez", true), ("casex", true)] {
            if self.eat_ident(kw) {
                self.expect_punct("(")?;
                let subject = self.expr()?;
                self.expect_punct(")")?;
                let mut arms = Vec::new();
                let mut default = None;
                while !self.eat_ident("endcase") {
                    if self.at_eof() {
                        return Err(CompileError::at(line, "missing 'endcase'"));
                    }
                    if self.eat_ident("default") {
                        self.eat_punct(":");
                        default = Some(Box::new(self.stmt()?));
                    } else {
                        let mut labels = vec![self.expr()?];
                        while self.eat_punct(",") {
                            labels.push(self.expr()?);
                        }
                        self.expect_punct(":")?;
                        arms.push((labels, self.stmt()?));
                    }
                }
                return Ok(Stmt::Case {
                    subject,
                    arms,
                    default,
                    wildcard,
                    line,
                });
            }
        }
        if self.eat_ident("for") {
            self.expect_punct("(")?;
            let init = Box::new(self.plain_assign()?);
            self.expect_punct(";")?;
            let cond = self.expr()?;
            self.expect_punct(";")?;
            let step = Box::new(self.plain_assign()?);
            self.expect_punct(")")?;
            let body = Box::new(self.stmt()?);
            return Ok(Stmt::For {
                init,
                cond,
                step,
                body,
            });
        }
        if self.eat_ident("while") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = Box::new(self.stmt()?);
            return Ok(Stmt::While { cond, body });
        }
        if self.eat_ident("repeat") {
            self.expect_punct("(")?;
            let count = self.expr()?;
            self.expect_punct(")")?;
            let body = Box::new(self.stmt()?);
            return Ok(Stmt::Repeat { count, body });
        }
        if self.eat_ident("forever") {
            let body = Box::new(self.stmt()?);
            return Ok(Stmt::Forever { body });
        }
        if self.eat_punct("#") {
            let amount = self.delay_value()?;
            let then = self.opt_sub_stmt()?;
            return Ok(Stmt::Delay { amount, then });
        }
        if self.eat_punct("@") {
            let (events, star) = self.event_control()?;
            let then = self.opt_sub_stmt()?;
            return Ok(Stmt::EventWait {
                events,
                star,
                then,
                line,
            });
        }
        if let Tok::Sys(name) = self.peek() {
            let name = name.clone();
            self.bump();
            let mut args = Vec::new();
            if self.eat_punct("(") {
                if !self.eat_punct(")") {
                    loop {
                        match self.peek() {
                            Tok::Str(s) => {
                                args.push(SysArg::Str(s.clone()));
                                self.bump();
                            }
                            _ => args.push(SysArg::Expr(self.expr()?)),
                        }
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                    self.expect_punct(")")?;
                }
            }
            self.expect_punct(";")?;
            return Ok(Stmt::SysCall { name, args, line });
        }
        if self.eat_punct(";") {
            return Ok(Stmt::Null);
        }
        // assignment
        let lhs = self.lvalue()?;
        let nonblocking = if self.eat_punct("<=") {
            true
        } else if self.eat_punct("=") {
            false
        } else {
            return Err(self.err("expected '=' or '<='"));
        };
        if matches!(self.peek(), Tok::Punct("#")) {
            return Err(self.err("unsupported: intra-assignment delay"));
        }
        let rhs = self.expr()?;
        self.expect_punct(";")?;
        Ok(Stmt::Assign {
            lhs,
            rhs,
            nonblocking,
            line,
        })
    }

    /// `i = 0` style assignment without the trailing semicolon (for-loop slots).
    fn plain_assign(&mut self) -> Result<Stmt, CompileError> {
        let line = self.line();
        let lhs = self.lvalue()?;
        self.expect_punct("=")?;
        let rhs = self.expr()?;
        Ok(Stmt::Assign {
            lhs,
            rhs,
            nonblocking: false,
            line,
        })
    }

    fn opt_sub_stmt(&mut self) -> Result<Option<Box<Stmt>>, CompileError> {
        if self.eat_punct(";") {
            Ok(None)
        } else {
            Ok(Some(Box::new(self.stmt()?)))
        }
    }

    fn delay_value(&mut self) -> Result<Expr, CompileError> {
        match self.peek().clone() {
            Tok::Number(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(_) => {
                let line = self.line();
                Ok(Expr::Ident(self.name()?, line))
            }
            _ => Err(self.err("expected delay value")),
        }
    }

    fn event_control(&mut self) -> Result<(Vec<(Edge, String)>, bool), CompileError> {
        if self.eat_punct("*") {
            return Ok((Vec::new(), true));
        }
        self.expect_punct("(")?;
        if self.eat_punct("*") {
            self.expect_punct(")")?;
            return Ok((Vec::new(), true));
        }
        let mut events = Vec::new();
        loop {
            let edge = if self.eat_ident("posedge") {
                Edge::Pos
            } else if self.eat_ident("negedge") {
                Edge::Neg
            } else {
                Edge::Any
            };
            events.push((edge, self.name()?));
            if !(self.eat_ident("or") || self.eat_punct(",")) {
                break;
            }
        }
        self.expect_punct(")")?;
        Ok((events, false))
    }

    fn lvalue(&mut self) -> Result<LValue, CompileError> {
        let line = self.line();
        if self.eat_punct("{") {
            let mut parts = vec![self.lvalue()?];
            while self.eat_punct(",") {
                parts.push(self.lvalue()?);
            }
            self.expect_punct("}")?;
            return Ok(LValue::Concat(parts));
        }
        let name = self.name()?;
        if self.eat_punct("[") {
            let first = self.expr()?;
            if self.eat_punct(":") {
                let lsb = self.expr()?;
                self.expect_punct("]")?;
                Ok(LValue::Slice(name, first, lsb, line))
            } else {
                self.expect_punct("]")?;
                Ok(LValue::Index(name, first, line))
            }
        } else {
            Ok(LValue::Ident(name, line))
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr, CompileError> {
        self.ternary()
    }

    fn ternary(&mut self) -> Result<Expr, CompileError> {
        let cond = self.binary_level(0)?;
        if self.eat_punct("?") {
            let t = self.ternary()?;
            self.expect_punct(":")?;
            let f = self.ternary()?;
            Ok(Expr::Ternary(Box::new(cond), Box::new(t), Box::new(f)))
        } else {
            Ok(cond)
        }
    }

    fn binary_level(&mut self, level: usize) -> Result<Expr, CompileError> {
        const LEVELS: &[&[(&str, BinOp)]] = &[
            &[("||", BinOp::LogicalOr)],
            &[("&&", BinOp::LogicalAnd)],
            &[("|", BinOp::Or)],
            &[("^", BinOp::Xor), ("~^", BinOp::Xnor), ("^~", BinOp::Xnor)],
            &[("&", BinOp::And)],
            &[
                ("===", BinOp::CaseEq),
                ("!==", BinOp::CaseNe),
                ("==", BinOp::Eq),
                ("!=", BinOp::Ne),
            ],
            &[
                ("<=", BinOp::Le),
                (">=", BinOp::Ge),
                ("<", BinOp::Lt),
                (">", BinOp::Gt),
            ],
            &[
                ("<<<", BinOp::Shl),
                (">>>", BinOp::Shr),
                ("<<", BinOp::Shl),
                (">>", BinOp::Shr),
            ],
            &[("+", BinOp::Add), ("-", BinOp::Sub)],
            &[("*", BinOp::Mul), ("/", BinOp::Div), ("%", BinOp::Mod)],
        ];
        if level >= LEVELS.len() {
            return self.unary_expr();
        }
        let mut lhs = self.binary_level(level + 1)?;
        'outer: loop {
            for (p, op) in LEVELS[level] {
                if matches!(self.peek(), Tok::Punct(q) if q == p) {
                    self.bump();
                    let rhs = self.binary_level(level + 1)?;
                    lhs = Expr::Binary(*op, Box::new(lhs), Box::new(rhs));
                    continue 'outer;
                }
            }
            break;
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, CompileError> {
        for (p, op) in [
            ("~&", UnaryOp::RedNand),
            ("~|", UnaryOp::RedNor),
            ("~^", UnaryOp::RedXnor),
            ("^~", UnaryOp::RedXnor),
            ("~", UnaryOp::Not),
            ("!", UnaryOp::LogicalNot),
            ("-", UnaryOp::Neg),
            ("+", UnaryOp::Plus),
            ("&", UnaryOp::RedAnd),
            ("|", UnaryOp::RedOr),
            ("^", UnaryOp::RedXor),
        ] {
            if matches!(self.peek(), Tok::Punct(q) if *q == p) {
                self.bump();
                let e = self.unary_expr()?;
                return Ok(Expr::Unary(op, Box::new(e)));
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, CompileError> {
        let mut e = self.primary()?;
        while self.eat_punct("[") {
            let first = self.expr()?;
            if self.eat_punct(":") {
                let lsb = self.expr()?;
                self.expect_punct("]")?;
                e = Expr::Slice(Box::new(e), Box::new(first), Box::new(lsb));
            } else if matches!(self.peek(), Tok::Punct("+:") | Tok::Punct("-:")) {
                return Err(self.err("unsupported: indexed part-select"));
            } else {
                self.expect_punct("]")?;
                e = Expr::Index(Box::new(e), Box::new(first));
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, CompileError> {
        let line = self.line();
        match self.peek().clone() {
            Tok::Number(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Ident(_) => Ok(Expr::Ident(self.name()?, line)),
            Tok::Sys(s) if s == "time" => {
                self.bump();
                Ok(Expr::Time)
            }
            Tok::Sys(s) => Err(CompileError::at(
                line,
                &format!("unsupported system function '${s}' in expression"),
            )),
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Punct("{") => {
                self.bump();
                let first = self.expr()?;
                if self.eat_punct("{") {
                    // replication {N{a, b}}
                    let mut inner = vec![self.expr()?];
                    while self.eat_punct(",") {
                        inner.push(self.expr()?);
                    }
                    self.expect_punct("}")?;
                    self.expect_punct("}")?;
                    let body = if inner.len() == 1 {
                        inner.pop().unwrap()
                    } else {
                        Expr::Concat(inner)
                    };
                    Ok(Expr::Repl(Box::new(first), Box::new(body)))
                } else {
                    let mut parts = vec![first];
                    while self.eat_punct(",") {
                        parts.push(self.expr()?);
                    }
                    self.expect_punct("}")?;
                    Ok(Expr::Concat(parts))
                }
            }
            _ => Err(self.err("expected expression")),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Sys(s) => format!("'${s}'"),
        Tok::Number(_) => "number".to_string(),
        Tok::Str(_) => "string".to_string(),
        Tok::Punct(p) => format!("'{p}'"),
        Tok::Eof => "end of input".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_counter_module() {
        let src = r#"
module counter (
    input clk,
    input rst,
    input en,
    output reg [3:0] count
);
    always @(posedge clk) begin
        if (rst)
            count <= 4'b0000;
        else if (en)
            count <= count + 1;
    end
endmodule
"#;
        let unit = parse(src).unwrap();
        assert_eq!(unit.modules.len(), 1);
        let m = &unit.modules[0];
        assert_eq!(m.name, "counter");
        assert_eq!(m.ports.len(), 4);
        assert!(m.ports[3].is_reg);
    }

    #[test]
    fn parses_non_ansi_ports() {
        let src = r#"
module m(a, y);
  input a;
  output y;
  assign y = ~a;
endmodule
"#;
        let unit = parse(src).unwrap();
        assert_eq!(unit.modules[0].ports.len(), 2);
        assert!(unit.modules[0].ports[0].dir.is_none());
    }

    #[test]
    fn unbalanced_begin_is_error() {
        let src = "module m; initial begin x = 1; endmodule";
        let err = parse(src).unwrap_err();
        assert!(err.message.contains("unbalanced begin") || err.message.contains("identifier"),
            "{}", err.message);
    }

    #[test]
    fn nonblocking_vs_comparison() {
        let src = r#"
module m(input a, output reg y);
  always @(a) begin
    if (a <= 1) y <= 0;
  end
endmodule
"#;
        parse(src).unwrap();
    }

    #[test]
    fn parses_instance_and_concat() {
        let src = r#"
module top;
  wire [7:0] s;
  wire co;
  adder #(.W(8)) u0 (.a(8'd1), .b(8'd2), .sum({co, s[6:0]}));
endmodule
"#;
        let unit = parse(src).unwrap();
        match &unit.modules[0].items[2] {
            Item::Instance { module, name, param_overrides, conns, .. } => {
                assert_eq!(module, "adder");
                assert_eq!(name, "u0");
                assert_eq!(param_overrides.len(), 1);
                assert_eq!(conns.len(), 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_display_and_finish() {
        let src = r#"
module tb;
  reg clk = 0;
  initial begin
    #5;
    $display("Test Case %d Passed: V = %b", 1, clk);
    $finish;
  end
endmodule
"#;
        parse(src).unwrap();
    }
}

//! Elaboration: flatten the instance hierarchy into a signal table,
//! continuous assignments, and processes, resolving names to signal ids and
//! folding parameters to constants.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use super::ast::{self, Dir, Expr, Item, LValue, Module, SourceUnit, Stmt, SysArg};
use super::eval::{binary, unary, BinOp, Edge, UnaryOp, Val};
use super::CompileError;

pub type SigId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigKind {
    Net,
    Var,
}

#[derive(Debug, Clone)]
pub struct Signal {
    pub name: String,
    pub width: u32,
    pub lsb: u32,
    pub kind: SigKind,
    pub init: Val,
}

#[derive(Debug, Clone)]
pub enum RExpr {
    Const(Val),
    Sig(SigId),
    Index(SigId, Box<RExpr>),
    Slice(SigId, u32, u32), // lo, width (already offset-adjusted)
    Unary(UnaryOp, Box<RExpr>),
    Binary(BinOp, Box<RExpr>, Box<RExpr>),
    Ternary(Box<RExpr>, Box<RExpr>, Box<RExpr>),
    Concat(Vec<RExpr>),
    Repl(u32, Box<RExpr>),
    Time,
}

#[derive(Debug, Clone)]
pub enum RLval {
    Sig(SigId),
    Index(SigId, RExpr),
    Slice(SigId, u32, u32),
    Concat(Vec<RLval>),
}

#[derive(Debug, Clone)]
pub enum DispArg {
    Str(String),
    Expr(RExpr),
}

#[derive(Debug, Clone)]
pub enum RStmt {
    Block(Vec<Rc<RStmt>>),
    Assign {
        lhs: RLval,
        rhs: RExpr,
        nonblocking: bool,
    },
    If {
        cond: RExpr,
        then: Rc<RStmt>,
        alt: Option<Rc<RStmt>>,
    },
    Case {
        subject: RExpr,
        arms: Vec<(Vec<RExpr>, Rc<RStmt>)>,
        default: Option<Rc<RStmt>>,
        wildcard: bool,
    },
    While {
        cond: RExpr,
        body: Rc<RStmt>,
    },
    Repeat {
        count: RExpr,
        body: Rc<RStmt>,
    },
    Forever {
        body: Rc<RStmt>,
    },
    Delay {
        amount: RExpr,
        then: Option<Rc<RStmt>>,
    },
    EventWait {
        events: Rc<Vec<(Edge, SigId)>>,
        then: Option<Rc<RStmt>>,
    },
    Display {
        format: Option<String>,
        args: Vec<DispArg>,
        newline: bool,
    },
    Finish,
    Null,
}

#[derive(Debug, Clone)]
pub struct Cont {
    pub lhs: RLval,
    pub rhs: RExpr,
}

#[derive(Debug, Clone)]
pub struct RProc {
    pub body: Rc<RStmt>,
    pub path: String,
}

/// A fully elaborated design, ready to simulate.
#[derive(Debug, Clone)]
pub struct Elab {
    pub signals: Vec<Signal>,
    pub conts: Vec<Cont>,
    pub procs: Vec<RProc>,
    /// signal -> continuous assignments to re-evaluate when it changes
    pub cont_index: Vec<Vec<u32>>,
    pub tops: Vec<String>,
}

pub fn elaborate(unit: &SourceUnit) -> Result<Elab, CompileError> {
    let mut by_name: BTreeMap<&str, &Module> = BTreeMap::new();
    for m in &unit.modules {
        if by_name.insert(m.name.as_str(), m).is_some() {
            return Err(CompileError::at(
                m.line,
                &format!("duplicate module '{}'", m.name),
            ));
        }
    }
    if by_name.is_empty() {
        return Err(CompileError::new("no modules in source"));
    }
    let mut instantiated: BTreeSet<&str> = BTreeSet::new();
    for m in &unit.modules {
        for item in &m.items {
            if let Item::Instance { module, .. } = item {
                instantiated.insert(module.as_str());
            }
        }
    }
    let tops: Vec<&Module> = unit
        .modules
        .iter()
        .filter(|m| !instantiated.contains(m.name.as_str()))
        .collect();
    if tops.is_empty() {
        return Err(CompileError::new(
            "no top-level module (instantiation cycle)",
        ));
    }

    let mut e = Elaborator {
        by_name,
        signals: Vec::new(),
        conts: Vec::new(),
        procs: Vec::new(),
        stack: Vec::new(),
    };
    let mut top_names = Vec::new();
    for m in &tops {
        top_names.push(m.name.clone());
        e.instantiate(m, m.name.clone(), &BTreeMap::new())?;
    }

    // build cont sensitivity index
    let mut cont_index = vec![Vec::new(); e.signals.len()];
    for (ci, cont) in e.conts.iter().enumerate() {
        let mut reads = BTreeSet::new();
        expr_reads(&cont.rhs, &mut reads);
        lval_index_reads(&cont.lhs, &mut reads);
        for s in reads {
            cont_index[s].push(ci as u32);
        }
    }
    Ok(Elab {
        signals: e.signals,
        conts: e.conts,
        procs: e.procs,
        cont_index,
        tops: top_names,
    })
}

struct Elaborator<'a> {
    by_name: BTreeMap<&'a str, &'a Module>,
    signals: Vec<Signal>,
    conts: Vec<Cont>,
    procs: Vec<RProc>,
    stack: Vec<String>,
}

/// Per-instance name resolution scope.
struct Scope {
    path: String,
    params: BTreeMap<String, Val>,
    sigs: BTreeMap<String, SigId>,
}

struct PortInfo {
    name: String,
    dir: Dir,
    sig: SigId,
}

impl<'a> Elaborator<'a> {
    fn instantiate(
        &mut self,
        module: &Module,
        path: String,
        overrides: &BTreeMap<String, Val>,
    ) -> Result<Vec<PortInfo>, CompileError> {
        if self.stack.iter().any(|m| *m == module.name) {
            return Err(CompileError::at(
                module.line,
                &format!("recursive instantiation of '{}'", module.name),
            ));
        }
        if self.stack.len() > 24 {
            return Err(CompileError::new("instance hierarchy too deep"));
        }
        self.stack.push(module.name.clone());
        let r = self.instantiate_inner(module, path, overrides);
        self.stack.pop();
        r
    }

    fn instantiate_inner(
        &mut self,
        module: &Module,
        path: String,
        overrides: &BTreeMap<String, Val>,
    ) -> Result<Vec<PortInfo>, CompileError> {
        let mut scope = Scope {
            path: path.clone(),
            params: BTreeMap::new(),
            sigs: BTreeMap::new(),
        };

        // Parameters fold in item order; overrides replace declared values.
        for item in &module.items {
            if let Item::Param { name, value, line } = item {
                let v = match overrides.get(name) {
                    Some(v) => *v,
                    None => const_eval(value, &scope, *line)?,
                };
                scope.params.insert(name.clone(), v);
            }
        }
        for name in overrides.keys() {
            if !scope.params.contains_key(name) {
                return Err(CompileError::at(
                    module.line,
                    &format!("override of unknown parameter '{name}' in '{}'", module.name),
                ));
            }
        }

        // Gather port direction / shape info from the header and body.
        struct DeclInfo {
            dir: Option<Dir>,
            is_reg: bool,
            range: Option<(u32, u32)>, // width, lsb
            init: Option<Val>,
            line: u32,
        }
        let mut decls: BTreeMap<String, DeclInfo> = BTreeMap::new();
        let mut order: Vec<String> = Vec::new();

        let mut note = |name: &str,
                        dir: Option<Dir>,
                        is_reg: bool,
                        range: Option<(u32, u32)>,
                        init: Option<Val>,
                        line: u32|
         -> Result<(), CompileError> {
            let entry = decls.entry(name.to_string()).or_insert_with(|| {
                order.push(name.to_string());
                DeclInfo {
                    dir: None,
                    is_reg: false,
                    range: None,
                    init: None,
                    line,
                }
            });
            if let Some(d) = dir {
                if entry.dir.is_some() && entry.dir != Some(d) {
                    return Err(CompileError::at(line, &format!("conflicting direction for '{name}'")));
                }
                entry.dir = Some(d);
            }
            entry.is_reg |= is_reg;
            if let Some(r) = range {
                if let Some(prev) = entry.range {
                    if prev != r {
                        return Err(CompileError::at(line, &format!("conflicting range for '{name}'")));
                    }
                }
                entry.range = Some(r);
            }
            if init.is_some() {
                entry.init = init;
            }
            Ok(())
        };

        for p in &module.ports {
            let range = match &p.range {
                Some((msb, lsb)) => Some(eval_range(msb, lsb, &scope, p.line)?),
                None => None,
            };
            note(&p.name, p.dir, p.is_reg, range, None, p.line)?;
        }
        for item in &module.items {
            match item {
                Item::PortDir {
                    dir,
                    is_reg,
                    range,
                    names,
                    line,
                } => {
                    let range = match range {
                        Some((msb, lsb)) => Some(eval_range(msb, lsb, &scope, *line)?),
                        None => None,
                    };
                    for n in names {
                        if !module.ports.iter().any(|p| p.name == *n) {
                            return Err(CompileError::at(
                                *line,
                                &format!("'{n}' declared {dir:?} but not in the port list"),
                            ));
                        }
                        note(n, Some(*dir), *is_reg, range, None, *line)?;
                    }
                }
                Item::Decl {
                    kind,
                    range,
                    names,
                    line,
                } => {
                    let range = match range {
                        Some((msb, lsb)) => Some(eval_range(msb, lsb, &scope, *line)?),
                        None => match kind {
                            ast::DeclKind::Integer => Some((32, 0)),
                            _ => None,
                        },
                    };
                    let is_reg = matches!(kind, ast::DeclKind::Reg | ast::DeclKind::Integer);
                    for (n, init) in names {
                        let iv = match init {
                            Some(e) if is_reg => Some(const_eval(e, &scope, *line)?),
                            _ => None,
                        };
                        note(n, None, is_reg, range, iv, *line)?;
                    }
                }
                _ => {}
            }
        }

        // Allocate signals.
        for name in &order {
            let info = &decls[name];
            if scope.params.contains_key(name) {
                return Err(CompileError::at(
                    info.line,
                    &format!("'{name}' declared as both parameter and signal"),
                ));
            }
            let (width, lsb) = info.range.unwrap_or((1, 0));
            let is_port = module.ports.iter().any(|p| p.name == *name);
            if is_port && info.dir.is_none() {
                return Err(CompileError::at(
                    info.line,
                    &format!("port '{name}' has no direction"),
                ));
            }
            if info.dir == Some(Dir::Input) && info.is_reg {
                return Err(CompileError::at(
                    info.line,
                    &format!("input port '{name}' cannot be a reg"),
                ));
            }
            let kind = if info.is_reg { SigKind::Var } else { SigKind::Net };
            let init = info.init.map(|v| v.resize(width)).unwrap_or(Val::all_x(width));
            let id = self.signals.len();
            self.signals.push(Signal {
                name: format!("{path}.{name}"),
                width,
                lsb,
                kind,
                init,
            });
            scope.sigs.insert(name.clone(), id);
        }

        // Wire initializers become continuous assignments.
        for item in &module.items {
            if let Item::Decl {
                kind: ast::DeclKind::Wire,
                names,
                line,
                ..
            } = item
            {
                for (n, init) in names {
                    if let Some(e) = init {
                        let rhs = self.resolve_expr(e, &scope, *line)?;
                        let sig = scope.sigs[n];
                        self.conts.push(Cont {
                            lhs: RLval::Sig(sig),
                            rhs,
                        });
                    }
                }
            }
        }

        // Remaining items.
        for item in &module.items {
            match item {
                Item::Param { .. } | Item::PortDir { .. } | Item::Decl { .. } => {}
                Item::ContAssign { lhs, rhs, line } => {
                    let lhs = self.resolve_lval(lhs, &scope, *line, true)?;
                    let rhs = self.resolve_expr(rhs, &scope, *line)?;
                    self.conts.push(Cont { lhs, rhs });
                }
                Item::Always { body, line } => {
                    let body = self.resolve_stmt(body, &scope, *line)?;
                    self.procs.push(RProc {
                        body: Rc::new(RStmt::Forever { body: Rc::new(body) }),
                        path: path.clone(),
                    });
                }
                Item::Initial { body, line } => {
                    let body = self.resolve_stmt(body, &scope, *line)?;
                    self.procs.push(RProc {
                        body: Rc::new(body),
                        path: path.clone(),
                    });
                }
                Item::Instance {
                    module: child_name,
                    name: inst_name,
                    param_overrides,
                    conns,
                    line,
                } => {
                    let child = match self.by_name.get(child_name.as_str()) {
                        Some(c) => *c,
                        None => {
                            return Err(CompileError::at(
                                *line,
                                &format!("unknown module '{child_name}' instantiated as '{inst_name}'"),
                            ))
                        }
                    };
                    // Parameter overrides evaluate in the parent scope.
                    let mut child_overrides = BTreeMap::new();
                    let child_param_names: Vec<&String> = child
                        .items
                        .iter()
                        .filter_map(|i| match i {
                            Item::Param { name, .. } => Some(name),
                            _ => None,
                        })
                        .collect();
                    for (pi, (pname, pexpr)) in param_overrides.iter().enumerate() {
                        let v = const_eval(pexpr, &scope, *line)?;
                        let key = match pname {
                            Some(n) => n.clone(),
                            None => match child_param_names.get(pi) {
                                Some(n) => (*n).clone(),
                                None => {
                                    return Err(CompileError::at(
                                        *line,
                                        &format!("too many parameter overrides for '{child_name}'"),
                                    ))
                                }
                            },
                        };
                        child_overrides.insert(key, v);
                    }
                    let child_path = format!("{path}.{inst_name}");
                    let ports = self.instantiate(child, child_path, &child_overrides)?;

                    // Pair up connections with ports.
                    let named = conns.iter().any(|(n, _)| n.is_some());
                    if named && conns.iter().any(|(n, _)| n.is_none()) {
                        return Err(CompileError::at(
                            *line,
                            "cannot mix named and positional connections",
                        ));
                    }
                    let mut pairs: Vec<(&PortInfo, &Expr)> = Vec::new();
                    if named {
                        for (cname, cexpr) in conns {
                            let cname = cname.as_ref().unwrap();
                            let port = match ports.iter().find(|p| p.name == *cname) {
                                Some(p) => p,
                                None => {
                                    return Err(CompileError::at(
                                        *line,
                                        &format!("no port '{cname}' on module '{child_name}'"),
                                    ))
                                }
                            };
                            if let Some(e) = cexpr {
                                pairs.push((port, e));
                            }
                        }
                    } else {
                        if conns.len() > ports.len() {
                            return Err(CompileError::at(
                                *line,
                                &format!("too many connections for '{child_name}'"),
                            ));
                        }
                        for ((_, cexpr), port) in conns.iter().zip(ports.iter()) {
                            if let Some(e) = cexpr {
                                pairs.push((port, e));
                            }
                        }
                    }
                    for (port, pexpr) in pairs {
                        match port.dir {
                            Dir::Input => {
                                let rhs = self.resolve_expr(pexpr, &scope, *line)?;
                                self.conts.push(Cont {
                                    lhs: RLval::Sig(port.sig),
                                    rhs,
                                });
                            }
                            Dir::Output => {
                                let lhs = self.expr_as_lval(pexpr, &scope, *line)?;
                                self.conts.push(Cont {
                                    lhs,
                                    rhs: RExpr::Sig(port.sig),
                                });
                            }
                        }
                    }
                }
            }
        }

        let ports = module
            .ports
            .iter()
            .map(|p| PortInfo {
                name: p.name.clone(),
                dir: decls[&p.name].dir.unwrap(),
                sig: scope.sigs[&p.name],
            })
            .collect();
        Ok(ports)
    }

    // ---- name resolution ----

    fn lookup(&self, scope: &Scope, name: &str, line: u32) -> Result<SigId, CompileError> {
        scope.sigs.get(name).copied().ok_or_else(|| {
            CompileError::at(
                line,
                &format!("undeclared identifier '{name}' in {}", scope.path),
            )
        })
    }

    fn resolve_expr(&self, e: &Expr, scope: &Scope, line: u32) -> Result<RExpr, CompileError> {
        Ok(match e {
            Expr::Const(v) => RExpr::Const(*v),
            Expr::Time => RExpr::Time,
            Expr::Ident(name, line) => {
                if let Some(v) = scope.params.get(name) {
                    RExpr::Const(*v)
                } else {
                    RExpr::Sig(self.lookup(scope, name, *line)?)
                }
            }
            Expr::Index(base, idx) => {
                let (sig, s) = self.base_signal(base, scope, line)?;
                let idx = self.resolve_expr(idx, scope, line)?;
                let idx = offset_index(idx, s);
                RExpr::Index(sig, Box::new(idx))
            }
            Expr::Slice(base, msb, lsb) => {
                let (sig, soff) = self.base_signal(base, scope, line)?;
                let m = const_eval_resolved(&self.resolve_expr(msb, scope, line)?, line)?;
                let l = const_eval_resolved(&self.resolve_expr(lsb, scope, line)?, line)?;
                let (m, l) = (m.bits as u32, l.bits as u32);
                if m < l {
                    return Err(CompileError::at(line, "part-select with msb < lsb"));
                }
                if l < soff {
                    return Err(CompileError::at(line, "part-select below declared range"));
                }
                RExpr::Slice(sig, l - soff, m - l + 1)
            }
            Expr::Unary(op, a) => RExpr::Unary(*op, Box::new(self.resolve_expr(a, scope, line)?)),
            Expr::Binary(op, a, b) => RExpr::Binary(
                *op,
                Box::new(self.resolve_expr(a, scope, line)?),
                Box::new(self.resolve_expr(b, scope, line)?),
            ),
            Expr::Ternary(c, t, f) => RExpr::Ternary(
                Box::new(self.resolve_expr(c, scope, line)?),
                Box::new(self.resolve_expr(t, scope, line)?),
                Box::new(self.resolve_expr(f, scope, line)?),
            ),
            Expr::Concat(parts) => {
                let parts: Vec<RExpr> = parts
                    .iter()
                    .map(|p| self.resolve_expr(p, scope, line))
                    .collect::<Result<_, _>>()?;
                let total: u32 = parts.iter().map(|p| self_width(p, &self.signals)).sum();
                if total > 64 {
                    return Err(CompileError::at(line, "concatenation wider than 64 bits"));
                }
                RExpr::Concat(parts)
            }
            Expr::Repl(count, body) => {
                let n = const_eval(count, scope, line)?;
                if n.xz != 0 || n.bits > 64 {
                    return Err(CompileError::at(line, "bad replication count"));
                }
                RExpr::Repl(n.bits as u32, Box::new(self.resolve_expr(body, scope, line)?))
            }
        })
    }

    fn base_signal(
        &self,
        base: &Expr,
        scope: &Scope,
        line: u32,
    ) -> Result<(SigId, u32), CompileError> {
        match base {
            Expr::Ident(name, l) => {
                if scope.params.contains_key(name) {
                    return Err(CompileError::at(*l, "cannot select bits of a parameter"));
                }
                let sig = self.lookup(scope, name, *l)?;
                Ok((sig, self.signals[sig].lsb))
            }
            _ => Err(CompileError::at(
                line,
                "bit/part select only allowed on identifiers",
            )),
        }
    }

    fn resolve_lval(
        &self,
        lv: &LValue,
        scope: &Scope,
        line: u32,
        cont_ctx: bool,
    ) -> Result<RLval, CompileError> {
        let check_kind = |sig: SigId, l: u32| -> Result<(), CompileError> {
            let k = self.signals[sig].kind;
            if cont_ctx && k != SigKind::Net {
                Err(CompileError::at(
                    l,
                    &format!("continuous assignment to reg '{}'", self.signals[sig].name),
                ))
            } else if !cont_ctx && k != SigKind::Var {
                Err(CompileError::at(
                    l,
                    &format!("procedural assignment to wire '{}'", self.signals[sig].name),
                ))
            } else {
                Ok(())
            }
        };
        Ok(match lv {
            LValue::Ident(name, l) => {
                let sig = self.lookup(scope, name, *l)?;
                check_kind(sig, *l)?;
                RLval::Sig(sig)
            }
            LValue::Index(name, idx, l) => {
                let sig = self.lookup(scope, name, *l)?;
                check_kind(sig, *l)?;
                let idx = self.resolve_expr(idx, scope, *l)?;
                RLval::Index(sig, offset_index(idx, self.signals[sig].lsb))
            }
            LValue::Slice(name, msb, lsb, l) => {
                let sig = self.lookup(scope, name, *l)?;
                check_kind(sig, *l)?;
                let m = const_eval(msb, scope, *l)?.bits as u32;
                let lo = const_eval(lsb, scope, *l)?.bits as u32;
                if m < lo {
                    return Err(CompileError::at(*l, "part-select with msb < lsb"));
                }
                let off = self.signals[sig].lsb;
                if lo < off {
                    return Err(CompileError::at(*l, "part-select below declared range"));
                }
                RLval::Slice(sig, lo - off, m - lo + 1)
            }
            LValue::Concat(parts) => {
                let parts: Vec<RLval> = parts
                    .iter()
                    .map(|p| self.resolve_lval(p, scope, line, cont_ctx))
                    .collect::<Result<_, _>>()?;
                let total: u32 = parts.iter().map(|p| self.rlval_width(p)).sum();
                if total > 64 {
                    return Err(CompileError::at(line, "concatenation wider than 64 bits"));
                }
                RLval::Concat(parts)
            }
        })
    }

    fn rlval_width(&self, lv: &RLval) -> u32 {
        match lv {
            RLval::Sig(s) => self.signals[*s].width,
            RLval::Index(_, _) => 1,
            RLval::Slice(_, _, w) => *w,
            RLval::Concat(parts) => parts.iter().map(|p| self.rlval_width(p)).sum(),
        }
    }

    fn expr_as_lval(&self, e: &Expr, scope: &Scope, line: u32) -> Result<RLval, CompileError> {
        let lv = match e {
            Expr::Ident(n, l) => LValue::Ident(n.clone(), *l),
            Expr::Index(base, idx) => match base.as_ref() {
                Expr::Ident(n, l) => LValue::Index(n.clone(), (**idx).clone(), *l),
                _ => return Err(CompileError::at(line, "output port needs a net target")),
            },
            Expr::Slice(base, msb, lsb) => match base.as_ref() {
                Expr::Ident(n, l) => LValue::Slice(n.clone(), (**msb).clone(), (**lsb).clone(), *l),
                _ => return Err(CompileError::at(line, "output port needs a net target")),
            },
            Expr::Concat(parts) => {
                let mut lvs = Vec::new();
                for p in parts {
                    match self.expr_as_lval(p, scope, line)? {
                        RLval::Concat(_) => {
                            return Err(CompileError::at(line, "nested concat in port target"))
                        }
                        lv => lvs.push(lv),
                    }
                }
                return Ok(RLval::Concat(lvs));
            }
            _ => {
                return Err(CompileError::at(
                    line,
                    "output port connection must be a net, bit-select, part-select, or concat",
                ))
            }
        };
        self.resolve_lval(&lv, scope, line, true)
    }

    fn resolve_stmt(&self, s: &Stmt, scope: &Scope, line: u32) -> Result<RStmt, CompileError> {
        Ok(match s {
            Stmt::Null => RStmt::Null,
            Stmt::Block(stmts) => RStmt::Block(
                stmts
                    .iter()
                    .map(|st| self.resolve_stmt(st, scope, line).map(Rc::new))
                    .collect::<Result<_, _>>()?,
            ),
            Stmt::Assign {
                lhs,
                rhs,
                nonblocking,
                line,
            } => RStmt::Assign {
                lhs: self.resolve_lval(lhs, scope, *line, false)?,
                rhs: self.resolve_expr(rhs, scope, *line)?,
                nonblocking: *nonblocking,
            },
            Stmt::If { cond, then, alt } => RStmt::If {
                cond: self.resolve_expr(cond, scope, line)?,
                then: Rc::new(self.resolve_stmt(then, scope, line)?),
                alt: match alt {
                    Some(a) => Some(Rc::new(self.resolve_stmt(a, scope, line)?)),
                    None => None,
                },
            },
            Stmt::Case {
                subject,
                arms,
                default,
                wildcard,
                line,
            } => RStmt::Case {
                subject: self.resolve_expr(subject, scope, *line)?,
                arms: arms
                    .iter()
                    .map(|(labels, st)| {
                        let labels = labels
                            .iter()
                            .map(|l| self.resolve_expr(l, scope, *line))
                            .collect::<Result<_, _>>()?;
                        Ok((labels, Rc::new(self.resolve_stmt(st, scope, *line)?)))
                    })
                    .collect::<Result<Vec<_>, CompileError>>()?,
                default: match default {
                    Some(d) => Some(Rc::new(self.resolve_stmt(d, scope, *line)?)),
                    None => None,
                },
                wildcard: *wildcard,
            },
            Stmt::For {
                init,
                cond,
                step,
                body,
            } => {
                // for (init; cond; step) body  ==  init; while (cond) { body; step; }
                let init = Rc::new(self.resolve_stmt(init, scope, line)?);
                let cond = self.resolve_expr(cond, scope, line)?;
                let step = Rc::new(self.resolve_stmt(step, scope, line)?);
                let body = Rc::new(self.resolve_stmt(body, scope, line)?);
                let inner = Rc::new(RStmt::Block(vec![body, step]));
                RStmt::Block(vec![init, Rc::new(RStmt::While { cond, body: inner })])
            }
            Stmt::While { cond, body } => RStmt::While {
                cond: self.resolve_expr(cond, scope, line)?,
                body: Rc::new(self.resolve_stmt(body, scope, line)?),
            },
            Stmt::Repeat { count, body } => RStmt::Repeat {
                count: self.resolve_expr(count, scope, line)?,
                body: Rc::new(self.resolve_stmt(body, scope, line)?),
            },
            Stmt::Forever { body } => RStmt::Forever {
                body: Rc::new(self.resolve_stmt(body, scope, line)?),
            },
            Stmt::Delay { amount, then } => RStmt::Delay {
                amount: self.resolve_expr(amount, scope, line)?,
                then: match then {
                    Some(t) => Some(Rc::new(self.resolve_stmt(t, scope, line)?)),
                    None => None,
                },
            },
            Stmt::EventWait {
                events,
                star,
                then,
                line,
            } => {
                let then_r = match then {
                    Some(t) => Some(Rc::new(self.resolve_stmt(t, scope, *line)?)),
                    None => None,
                };
                let evs: Vec<(Edge, SigId)> = if *star {
                    let mut reads = BTreeSet::new();
                    if let Some(t) = &then_r {
                        stmt_reads(t, &mut reads);
                    }
                    reads.into_iter().map(|s| (Edge::Any, s)).collect()
                } else {
                    events
                        .iter()
                        .map(|(edge, name)| Ok((*edge, self.lookup(scope, name, *line)?)))
                        .collect::<Result<_, CompileError>>()?
                };
                RStmt::EventWait {
                    events: Rc::new(evs),
                    then: then_r,
                }
            }
            Stmt::SysCall { name, args, line } => self.resolve_syscall(name, args, scope, *line)?,
        })
    }

    fn resolve_syscall(
        &self,
        name: &str,
        args: &[SysArg],
        scope: &Scope,
        line: u32,
    ) -> Result<RStmt, CompileError> {
        match name {
            "display" | "write" | "strobe" | "monitor" => {
                let mut format = None;
                let mut rargs = Vec::new();
                for (i, a) in args.iter().enumerate() {
                    match a {
                        SysArg::Str(s) if i == 0 => format = Some(s.clone()),
                        SysArg::Str(s) => rargs.push(DispArg::Str(s.clone())),
                        SysArg::Expr(e) => {
                            rargs.push(DispArg::Expr(self.resolve_expr(e, scope, line)?))
                        }
                    }
                }
                Ok(RStmt::Display {
                    format,
                    args: rargs,
                    newline: name != "write",
                })
            }
            "finish" | "stop" => Ok(RStmt::Finish),
            // waveform/format directives have no observable effect here
            "dumpfile" | "dumpvars" | "dumpon" | "dumpoff" | "dumpall" | "timeformat" => {
                Ok(RStmt::Null)
            }
            other => Err(CompileError::at(
                line,
                &format!("unsupported system task '${other}'"),
            )),
        }
    }
}

fn offset_index(idx: RExpr, lsb: u32) -> RExpr {
    if lsb == 0 {
        idx
    } else {
        RExpr::Binary(
            BinOp::Sub,
            Box::new(idx),
            Box::new(RExpr::Const(Val::new(32, u64::from(lsb)))),
        )
    }
}

fn eval_range(msb: &Expr, lsb: &Expr, scope: &Scope, line: u32) -> Result<(u32, u32), CompileError> {
    let m = const_eval(msb, scope, line)?;
    let l = const_eval(lsb, scope, line)?;
    if m.xz != 0 || l.xz != 0 {
        return Err(CompileError::at(line, "range bounds must be fully known"));
    }
    if m.bits < l.bits {
        return Err(CompileError::at(line, "descending ranges require msb >= lsb"));
    }
    let width = m.bits - l.bits + 1;
    if width > 64 {
        return Err(CompileError::at(line, "vectors wider than 64 bits are unsupported"));
    }
    Ok((width as u32, l.bits as u32))
}

/// Constant-fold a parse-level expression against the parameter environment.
fn const_eval(e: &Expr, scope: &Scope, line: u32) -> Result<Val, CompileError> {
    Ok(match e {
        Expr::Const(v) => *v,
        Expr::Ident(name, l) => match scope.params.get(name) {
            Some(v) => *v,
            None => {
                return Err(CompileError::at(
                    *l,
                    &format!("'{name}' is not a constant"),
                ))
            }
        },
        Expr::Unary(op, a) => unary(*op, &const_eval(a, scope, line)?),
        Expr::Binary(op, a, b) => binary(
            *op,
            &const_eval(a, scope, line)?,
            &const_eval(b, scope, line)?,
        ),
        Expr::Ternary(c, t, f) => {
            let c = const_eval(c, scope, line)?;
            match c.truthy() {
                Some(true) => const_eval(t, scope, line)?,
                Some(false) => const_eval(f, scope, line)?,
                None => return Err(CompileError::at(line, "unknown value in constant expression")),
            }
        }
        _ => return Err(CompileError::at(line, "expression is not a constant")),
    })
}

fn const_eval_resolved(e: &RExpr, line: u32) -> Result<Val, CompileError> {
    match e {
        RExpr::Const(v) => Ok(*v),
        _ => Err(CompileError::at(line, "expected a constant expression")),
    }
}

// ---- read sets ----

pub fn expr_reads(e: &RExpr, out: &mut BTreeSet<SigId>) {
    match e {
        RExpr::Const(_) | RExpr::Time => {}
        RExpr::Sig(s) => {
            out.insert(*s);
        }
        RExpr::Index(s, idx) => {
            out.insert(*s);
            expr_reads(idx, out);
        }
        RExpr::Slice(s, _, _) => {
            out.insert(*s);
        }
        RExpr::Unary(_, a) => expr_reads(a, out),
        RExpr::Binary(_, a, b) => {
            expr_reads(a, out);
            expr_reads(b, out);
        }
        RExpr::Ternary(c, t, f) => {
            expr_reads(c, out);
            expr_reads(t, out);
            expr_reads(f, out);
        }
        RExpr::Concat(parts) => parts.iter().for_each(|p| expr_reads(p, out)),
        RExpr::Repl(_, b) => expr_reads(b, out),
    }
}

pub fn lval_index_reads(lv: &RLval, out: &mut BTreeSet<SigId>) {
    match lv {
        RLval::Sig(_) | RLval::Slice(_, _, _) => {}
        RLval::Index(_, idx) => expr_reads(idx, out),
        RLval::Concat(parts) => parts.iter().for_each(|p| lval_index_reads(p, out)),
    }
}

fn stmt_reads(s: &RStmt, out: &mut BTreeSet<SigId>) {
    match s {
        RStmt::Null | RStmt::Finish => {}
        RStmt::Block(stmts) => stmts.iter().for_each(|st| stmt_reads(st, out)),
        RStmt::Assign { lhs, rhs, .. } => {
            expr_reads(rhs, out);
            lval_index_reads(lhs, out);
        }
        RStmt::If { cond, then, alt } => {
            expr_reads(cond, out);
            stmt_reads(then, out);
            if let Some(a) = alt {
                stmt_reads(a, out);
            }
        }
        RStmt::Case {
            subject,
            arms,
            default,
            ..
        } => {
            expr_reads(subject, out);
            for (labels, st) in arms {
                labels.iter().for_each(|l| expr_reads(l, out));
                stmt_reads(st, out);
            }
            if let Some(d) = default {
                stmt_reads(d, out);
            }
        }
        RStmt::While { cond, body } => {
            expr_reads(cond, out);
            stmt_reads(body, out);
        }
        RStmt::Repeat { count, body } => {
            expr_reads(count, out);
            stmt_reads(body, out);
        }
        RStmt::Forever { body } => stmt_reads(body, out),
        RStmt::Delay { amount, then } => {
            expr_reads(amount, out);
            if let Some(t) = then {
                stmt_reads(t, out);
            }
        }
        RStmt::EventWait { then, .. } => {
            if let Some(t) = then {
                stmt_reads(t, out);
            }
        }
        RStmt::Display { args, .. } => {
            for a in args {
                if let DispArg::Expr(e) = a {
                    expr_reads(e, out);
                }
            }
        }
    }
}

/// Structural ("self-determined") width of an expression.
pub fn self_width(e: &RExpr, signals: &[Signal]) -> u32 {
    match e {
        RExpr::Const(v) => v.width,
        RExpr::Sig(s) => signals[*s].width,
        RExpr::Index(_, _) => 1,
        RExpr::Slice(_, _, w) => *w,
        RExpr::Unary(op, a) => match op {
            UnaryOp::Not | UnaryOp::Neg | UnaryOp::Plus => self_width(a, signals),
            _ => 1,
        },
        RExpr::Binary(op, a, b) => match op {
            BinOp::Add
            | BinOp::Sub
            | BinOp::Mul
            | BinOp::Div
            | BinOp::Mod
            | BinOp::And
            | BinOp::Or
            | BinOp::Xor
            | BinOp::Xnor => self_width(a, signals).max(self_width(b, signals)),
            BinOp::Shl | BinOp::Shr => self_width(a, signals),
            _ => 1,
        },
        RExpr::Ternary(_, t, f) => self_width(t, signals).max(self_width(f, signals)),
        RExpr::Concat(parts) => parts.iter().map(|p| self_width(p, signals)).sum::<u32>().min(64),
        RExpr::Repl(n, b) => (n * self_width(b, signals)).min(64),
        RExpr::Time => 64,
    }
}

//! Event-driven simulation over an elaborated design.
//!
//! Region ordering per time step: continuous assignments settle, ready
//! processes run (each until it blocks), then queued nonblocking updates
//! apply and the cycle repeats until the step is quiescent. Only then does
//! time advance to the next scheduled wakeup.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::rc::Rc;
use std::time::{Duration, Instant};

use super::elab::{self, DispArg, Elab, RExpr, RLval, RStmt, SigId};
use super::eval::{binary, edge_matches, merge, unary, wildcard_match, BinOp, Edge, UnaryOp, Val};

#[derive(Debug, Clone)]
pub struct RunLimits {
    /// Statement budget; runaway zero-delay loops hit this.
    pub max_steps: u64,
    /// Wall-clock budget, checked periodically.
    pub wall: Option<Duration>,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            max_steps: 4_000_000,
            wall: Some(Duration::from_secs(10)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub stdout: String,
    /// Reached `$finish`/`$stop`.
    pub finished: bool,
    /// Hit a step, wall-clock, or settle budget before finishing.
    pub timed_out: bool,
    pub end_time: u64,
}

const STDOUT_CAP: usize = 1 << 20;
const SETTLE_BUDGET: u64 = 200_000;

enum Frame {
    Exec(Rc<RStmt>),
    Seq { block: Rc<RStmt>, pc: usize },
    Loop { stmt: Rc<RStmt>, left: u64 },
}

struct ProcState {
    frames: Vec<Frame>,
    waiting: Option<Rc<Vec<(Edge, SigId)>>>,
    done: bool,
}

enum Flow {
    Continue,
    Blocked,
    Halt,
}

pub struct Runtime<'a> {
    elab: &'a Elab,
    sigs: Vec<Val>,
    procs: Vec<ProcState>,
    ready: VecDeque<usize>,
    pending_conts: VecDeque<u32>,
    cont_queued: Vec<bool>,
    nba: Vec<(Vec<(SigId, u32, u32)>, Val)>,
    heap: BinaryHeap<Reverse<(u64, u64, usize)>>,
    seq: u64,
    now: u64,
    out: String,
    finished: bool,
    timed_out: bool,
    steps: u64,
    limits: RunLimits,
    started: Instant,
}

pub fn simulate(elab: &Elab, limits: &RunLimits) -> RunResult {
    let sigs = elab.signals.iter().map(|s| s.init).collect();
    let procs = elab
        .procs
        .iter()
        .map(|p| ProcState {
            frames: vec![Frame::Exec(p.body.clone())],
            waiting: None,
            done: false,
        })
        .collect();
    let mut rt = Runtime {
        elab,
        sigs,
        procs,
        ready: (0..elab.procs.len()).collect(),
        pending_conts: (0..elab.conts.len() as u32).collect(),
        cont_queued: vec![true; elab.conts.len()],
        nba: Vec::new(),
        heap: BinaryHeap::new(),
        seq: 0,
        now: 0,
        out: String::new(),
        finished: false,
        timed_out: false,
        steps: 0,
        limits: limits.clone(),
        started: Instant::now(),
    };
    rt.run();
    RunResult {
        stdout: rt.out,
        finished: rt.finished,
        timed_out: rt.timed_out,
        end_time: rt.now,
    }
}

impl<'a> Runtime<'a> {
    fn run(&mut self) {
        loop {
            self.delta();
            if self.finished || self.timed_out {
                return;
            }
            // advance to the earliest scheduled wakeup
            let Some(&Reverse((t, _, _))) = self.heap.peek() else {
                return; // event starvation: nothing left to do
            };
            self.now = t;
            while let Some(&Reverse((ht, _, pid))) = self.heap.peek() {
                if ht != t {
                    break;
                }
                self.heap.pop();
                if !self.procs[pid].done {
                    self.ready.push_back(pid);
                }
            }
        }
    }

    fn delta(&mut self) {
        loop {
            self.settle();
            if self.finished || self.timed_out {
                return;
            }
            if let Some(pid) = self.ready.pop_front() {
                self.run_proc(pid);
                continue;
            }
            if !self.nba.is_empty() {
                let updates = std::mem::take(&mut self.nba);
                for (parts, val) in updates {
                    self.assign_parts(&parts, val);
                }
                continue;
            }
            return;
        }
    }

    fn settle(&mut self) {
        let mut budget = SETTLE_BUDGET;
        while let Some(ci) = self.pending_conts.pop_front() {
            self.cont_queued[ci as usize] = false;
            let cont = &self.elab.conts[ci as usize];
            let lhs = cont.lhs.clone();
            let rhs = cont.rhs.clone();
            let w = self.lval_width(&lhs);
            let v = self.eval(&rhs, w);
            let parts = self.flatten_lval(&lhs);
            self.assign_parts(&parts, v);
            budget -= 1;
            if budget == 0 {
                // combinational oscillation; give up on this run
                self.note("SIMULATION ERROR: combinational loop did not settle");
                self.timed_out = true;
                return;
            }
        }
    }

    fn check_limits(&mut self) -> bool {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            self.note("SIMULATION ERROR: statement budget exhausted");
            self.timed_out = true;
            return true;
        }
        if self.steps % 8192 == 0 {
            if let Some(wall) = self.limits.wall {
                if self.started.elapsed() > wall {
                    self.note("SIMULATION ERROR: wall-clock timeout");
                    self.timed_out = true;
                    return true;
                }
            }
        }
        false
    }

    fn note(&mut self, msg: &str) {
        if self.out.len() < STDOUT_CAP {
            self.out.push_str(msg);
            self.out.push('\n');
        }
    }

    fn run_proc(&mut self, pid: usize) {
        loop {
            if self.check_limits() {
                return;
            }
            let Some(top) = self.procs[pid].frames.last() else {
                self.procs[pid].done = true;
                return;
            };
            let flow = match top {
                Frame::Exec(stmt) => {
                    let stmt = stmt.clone();
                    self.procs[pid].frames.pop();
                    self.begin(pid, stmt)
                }
                Frame::Seq { block, pc } => {
                    let block = block.clone();
                    let pc = *pc;
                    let RStmt::Block(children) = &*block else {
                        unreachable!("Seq frame over non-block");
                    };
                    if pc < children.len() {
                        if let Some(Frame::Seq { pc, .. }) = self.procs[pid].frames.last_mut() {
                            *pc += 1;
                        }
                        self.begin(pid, children[pc].clone())
                    } else {
                        self.procs[pid].frames.pop();
                        Flow::Continue
                    }
                }
                Frame::Loop { stmt, left } => {
                    let stmt = stmt.clone();
                    let left = *left;
                    match &*stmt {
                        RStmt::While { cond, body } => {
                            if self.eval_truthy(cond) {
                                self.procs[pid].frames.push(Frame::Exec(body.clone()));
                                Flow::Continue
                            } else {
                                self.procs[pid].frames.pop();
                                Flow::Continue
                            }
                        }
                        RStmt::Repeat { body, .. } => {
                            if left > 0 {
                                if let Some(Frame::Loop { left, .. }) =
                                    self.procs[pid].frames.last_mut()
                                {
                                    *left -= 1;
                                }
                                self.procs[pid].frames.push(Frame::Exec(body.clone()));
                                Flow::Continue
                            } else {
                                self.procs[pid].frames.pop();
                                Flow::Continue
                            }
                        }
                        RStmt::Forever { body } => {
                            self.procs[pid].frames.push(Frame::Exec(body.clone()));
                            Flow::Continue
                        }
                        _ => unreachable!("Loop frame over non-loop"),
                    }
                }
            };
            match flow {
                Flow::Continue => continue,
                Flow::Blocked => return,
                Flow::Halt => {
                    self.procs[pid].done = true;
                    return;
                }
            }
        }
    }

    fn begin(&mut self, pid: usize, stmt: Rc<RStmt>) -> Flow {
        match &*stmt {
            RStmt::Null => Flow::Continue,
            RStmt::Block(_) => {
                self.procs[pid].frames.push(Frame::Seq {
                    block: stmt.clone(),
                    pc: 0,
                });
                Flow::Continue
            }
            RStmt::Assign {
                lhs,
                rhs,
                nonblocking,
            } => {
                let w = self.lval_width(lhs);
                let v = self.eval(rhs, w);
                let parts = self.flatten_lval(lhs);
                if *nonblocking {
                    self.nba.push((parts, v));
                } else {
                    self.assign_parts(&parts, v);
                }
                Flow::Continue
            }
            RStmt::If { cond, then, alt } => {
                if self.eval_truthy(cond) {
                    self.procs[pid].frames.push(Frame::Exec(then.clone()));
                } else if let Some(a) = alt {
                    self.procs[pid].frames.push(Frame::Exec(a.clone()));
                }
                Flow::Continue
            }
            RStmt::Case {
                subject,
                arms,
                default,
                wildcard,
            } => {
                let mut w = self_w(subject, self.elab);
                for (labels, _) in arms {
                    for l in labels {
                        w = w.max(self_w(l, self.elab));
                    }
                }
                let subj = self.eval(subject, w);
                let mut chosen = None;
                'arms: for (labels, st) in arms {
                    for l in labels {
                        let lv = self.eval(l, w);
                        let hit = if *wildcard {
                            wildcard_match(&subj, &lv)
                        } else {
                            subj.bits == lv.bits && subj.xz == lv.xz
                        };
                        if hit {
                            chosen = Some(st.clone());
                            break 'arms;
                        }
                    }
                }
                if chosen.is_none() {
                    chosen = default.clone();
                }
                if let Some(st) = chosen {
                    self.procs[pid].frames.push(Frame::Exec(st));
                }
                Flow::Continue
            }
            RStmt::While { .. } | RStmt::Forever { .. } => {
                self.procs[pid].frames.push(Frame::Loop {
                    stmt: stmt.clone(),
                    left: 0,
                });
                Flow::Continue
            }
            RStmt::Repeat { count, .. } => {
                let c = self.eval(count, 64);
                let left = if c.xz != 0 { 0 } else { c.bits };
                self.procs[pid].frames.push(Frame::Loop {
                    stmt: stmt.clone(),
                    left,
                });
                Flow::Continue
            }
            RStmt::Delay { amount, then } => {
                let amt = self.eval(amount, 64);
                let amt = if amt.xz != 0 { 0 } else { amt.bits };
                if let Some(t) = then {
                    self.procs[pid].frames.push(Frame::Exec(t.clone()));
                }
                self.seq += 1;
                self.heap
                    .push(Reverse((self.now.saturating_add(amt), self.seq, pid)));
                Flow::Blocked
            }
            RStmt::EventWait { events, then } => {
                if let Some(t) = then {
                    self.procs[pid].frames.push(Frame::Exec(t.clone()));
                }
                self.procs[pid].waiting = Some(events.clone());
                Flow::Blocked
            }
            RStmt::Display {
                format,
                args,
                newline,
            } => {
                let line = self.format_display(format.as_deref(), args);
                if self.out.len() < STDOUT_CAP {
                    self.out.push_str(&line);
                    if *newline {
                        self.out.push('\n');
                    }
                }
                Flow::Continue
            }
            RStmt::Finish => {
                self.finished = true;
                Flow::Halt
            }
        }
    }

    // ---- assignment machinery ----

    fn lval_width(&self, lv: &RLval) -> u32 {
        match lv {
            RLval::Sig(s) => self.elab.signals[*s].width,
            RLval::Index(_, _) => 1,
            RLval::Slice(_, _, w) => *w,
            RLval::Concat(parts) => parts.iter().map(|p| self.lval_width(p)).sum(),
        }
    }

    /// Resolve an lvalue into concrete (signal, lo, width) parts, MSB-first.
    /// Unknown dynamic indices resolve to zero-width parts (write dropped).
    fn flatten_lval(&mut self, lv: &RLval) -> Vec<(SigId, u32, u32)> {
        let mut parts = Vec::new();
        self.flatten_into(lv, &mut parts);
        parts
    }

    fn flatten_into(&mut self, lv: &RLval, out: &mut Vec<(SigId, u32, u32)>) {
        match lv {
            RLval::Sig(s) => out.push((*s, 0, self.elab.signals[*s].width)),
            RLval::Slice(s, lo, w) => out.push((*s, *lo, *w)),
            RLval::Index(s, idx) => {
                let i = self.eval(idx, 32);
                if i.xz == 0 && i.bits < u64::from(self.elab.signals[*s].width) {
                    out.push((*s, i.bits as u32, 1));
                } else {
                    out.push((*s, 0, 0));
                }
            }
            RLval::Concat(parts) => {
                for p in parts {
                    self.flatten_into(p, out);
                }
            }
        }
    }

    fn assign_parts(&mut self, parts: &[(SigId, u32, u32)], val: Val) {
        let total: u32 = parts.iter().map(|(_, _, w)| *w).sum();
        let v = val.resize(total.max(1));
        let mut consumed = 0;
        for &(sig, lo, w) in parts {
            if w == 0 {
                continue;
            }
            let chunk = v.slice(total - consumed - w, w);
            let cur = self.sigs[sig];
            self.set_sig(sig, cur.splice(lo, &chunk));
            consumed += w;
        }
    }

    fn set_sig(&mut self, sig: SigId, new: Val) {
        let old = self.sigs[sig];
        if old == new {
            return;
        }
        self.sigs[sig] = new;
        for &ci in &self.elab.cont_index[sig] {
            if !self.cont_queued[ci as usize] {
                self.cont_queued[ci as usize] = true;
                self.pending_conts.push_back(ci);
            }
        }
        for pid in 0..self.procs.len() {
            let wake = match &self.procs[pid].waiting {
                Some(events) => events
                    .iter()
                    .any(|(edge, s)| *s == sig && edge_matches(*edge, &old, &new)),
                None => false,
            };
            if wake {
                self.procs[pid].waiting = None;
                self.ready.push_back(pid);
            }
        }
    }

    // ---- expression evaluation ----

    fn eval_truthy(&self, e: &RExpr) -> bool {
        self.eval(e, 1).truthy() == Some(true)
    }

    /// Evaluate with a context width: arithmetic and bitwise operands widen
    /// to `max(operand widths, context)` before the operation, the way
    /// assignment and comparison contexts size their operands.
    fn eval(&self, e: &RExpr, ctx: u32) -> Val {
        let v = match e {
            RExpr::Const(v) => *v,
            RExpr::Sig(s) => self.sigs[*s],
            RExpr::Index(s, idx) => {
                let i = self.eval(idx, 32);
                if i.xz != 0 {
                    Val::bit_x()
                } else {
                    self.sigs[*s].slice(i.bits.min(u64::from(u32::MAX)) as u32, 1)
                }
            }
            RExpr::Slice(s, lo, w) => self.sigs[*s].slice(*lo, *w),
            RExpr::Unary(op, a) => match op {
                UnaryOp::Not | UnaryOp::Neg | UnaryOp::Plus => {
                    let w = self_w(a, self.elab).max(ctx);
                    unary(*op, &self.eval(a, w))
                }
                _ => unary(*op, &self.eval(a, self_w(a, self.elab))),
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
                | BinOp::Xnor => {
                    let w = self_w(a, self.elab).max(self_w(b, self.elab)).max(ctx);
                    binary(*op, &self.eval(a, w), &self.eval(b, w))
                }
                BinOp::Shl | BinOp::Shr => {
                    let w = self_w(a, self.elab).max(ctx);
                    binary(*op, &self.eval(a, w), &self.eval(b, self_w(b, self.elab)))
                }
                BinOp::Lt
                | BinOp::Le
                | BinOp::Gt
                | BinOp::Ge
                | BinOp::Eq
                | BinOp::Ne
                | BinOp::CaseEq
                | BinOp::CaseNe => {
                    let w = self_w(a, self.elab).max(self_w(b, self.elab));
                    binary(*op, &self.eval(a, w), &self.eval(b, w))
                }
                BinOp::LogicalAnd | BinOp::LogicalOr => binary(
                    *op,
                    &self.eval(a, self_w(a, self.elab)),
                    &self.eval(b, self_w(b, self.elab)),
                ),
            },
            RExpr::Ternary(c, t, f) => {
                let w = self_w(t, self.elab).max(self_w(f, self.elab)).max(ctx);
                match self.eval(c, self_w(c, self.elab)).truthy() {
                    Some(true) => self.eval(t, w),
                    Some(false) => self.eval(f, w),
                    None => merge(&self.eval(t, w), &self.eval(f, w)),
                }
            }
            RExpr::Concat(parts) => {
                let mut bits = 0u64;
                let mut xz = 0u64;
                let mut total = 0u32;
                for p in parts {
                    let w = self_w(p, self.elab);
                    let v = self.eval(p, w);
                    total = (total + w).min(64);
                    bits = (bits << w) | v.bits;
                    xz = (xz << w) | v.xz;
                }
                Val::with_xz(total.max(1), bits, xz)
            }
            RExpr::Repl(n, b) => {
                let w = self_w(b, self.elab);
                let v = self.eval(b, w);
                let mut bits = 0u64;
                let mut xz = 0u64;
                for _ in 0..*n {
                    bits = (bits << w) | v.bits;
                    xz = (xz << w) | v.xz;
                }
                Val::with_xz((n * w).clamp(1, 64), bits, xz)
            }
            RExpr::Time => Val::new(64, self.now),
        };
        if ctx > v.width {
            v.resize(ctx)
        } else {
            v
        }
    }

    // ---- $display ----

    fn format_display(&self, format: Option<&str>, args: &[DispArg]) -> String {
        match format {
            None => args
                .iter()
                .map(|a| match a {
                    DispArg::Str(s) => s.clone(),
                    DispArg::Expr(e) => fmt_dec(&self.eval(e, self_w(e, self.elab))),
                })
                .collect::<Vec<_>>()
                .join(" "),
            Some(fmt) => {
                let mut out = String::new();
                let mut args = args.iter();
                let mut chars = fmt.chars().peekable();
                while let Some(c) = chars.next() {
                    if c != '%' {
                        out.push(c);
                        continue;
                    }
                    // skip field width digits and '0'/'-' flags
                    while matches!(chars.peek(), Some(d) if d.is_ascii_digit() || *d == '-') {
                        chars.next();
                    }
                    let Some(code) = chars.next() else { break };
                    if code == '%' {
                        out.push('%');
                        continue;
                    }
                    if code == 'm' {
                        continue; // hierarchical name: omitted
                    }
                    let arg = args.next();
                    let rendered = match (code.to_ascii_lowercase(), arg) {
                        (_, None) => String::new(),
                        ('s', Some(DispArg::Str(s))) => s.clone(),
                        (_, Some(DispArg::Str(s))) => s.clone(),
                        (code, Some(DispArg::Expr(e))) => {
                            let v = self.eval(e, self_w(e, self.elab));
                            match code {
                                'b' => fmt_bin(&v),
                                'h' | 'x' => fmt_hex(&v),
                                'o' => fmt_oct(&v),
                                'c' => {
                                    if v.xz == 0 {
                                        char::from_u32((v.bits & 0x7f) as u32)
                                            .unwrap_or('?')
                                            .to_string()
                                    } else {
                                        "x".to_string()
                                    }
                                }
                                _ => fmt_dec(&v),
                            }
                        }
                    };
                    out.push_str(&rendered);
                }
                out
            }
        }
    }
}

fn self_w(e: &RExpr, elab: &Elab) -> u32 {
    elab::self_width(e, &elab.signals)
}

fn fmt_bin(v: &Val) -> String {
    (0..v.width)
        .rev()
        .map(|i| {
            if v.xz >> i & 1 == 1 {
                'x'
            } else if v.bits >> i & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

fn fmt_dec(v: &Val) -> String {
    if v.xz != 0 {
        "x".to_string()
    } else {
        v.bits.to_string()
    }
}

fn fmt_hex(v: &Val) -> String {
    let nibbles = v.width.div_ceil(4);
    (0..nibbles)
        .rev()
        .map(|n| {
            let shift = n * 4;
            if v.xz >> shift & 0xf != 0 {
                'x'
            } else {
                char::from_digit((v.bits >> shift & 0xf) as u32, 16).unwrap()
            }
        })
        .collect()
}

fn fmt_oct(v: &Val) -> String {
    let groups = v.width.div_ceil(3);
    (0..groups)
        .rev()
        .map(|n| {
            let shift = n * 3;
            if v.xz >> shift & 0x7 != 0 {
                'x'
            } else {
                char::from_digit((v.bits >> shift & 0x7) as u32, 8).unwrap()
            }
        })
        .collect()
}

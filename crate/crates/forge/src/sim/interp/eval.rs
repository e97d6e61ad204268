//! Four-state-lite value model and operator semantics.
//!
//! A value is at most 64 bits wide: `bits` holds known bit values and `xz`
//! marks unknown positions (x and z are folded together). Arithmetic,
//! comparison, shift, and logical operators go fully unknown if any operand
//! bit is unknown; bitwise operators propagate unknowns per bit the way a
//! gate would (0 wins for AND, 1 wins for OR).

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Val {
    pub width: u32,
    pub bits: u64,
    pub xz: u64,
}

pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl Val {
    pub fn new(width: u32, bits: u64) -> Self {
        let m = mask(width);
        Val {
            width,
            bits: bits & m,
            xz: 0,
        }
    }

    pub fn with_xz(width: u32, bits: u64, xz: u64) -> Self {
        let m = mask(width);
        Val {
            width,
            bits: bits & m & !(xz & m),
            xz: xz & m,
        }
    }

    pub fn all_x(width: u32) -> Self {
        Val {
            width,
            bits: 0,
            xz: mask(width),
        }
    }

    pub fn bit_x() -> Self {
        Val::all_x(1)
    }

    pub fn bit(b: bool) -> Self {
        Val::new(1, u64::from(b))
    }

    pub fn is_fully_known(&self) -> bool {
        self.xz == 0
    }

    /// Resize, zero-extending known bits (unknowns stay unknown).
    pub fn resize(&self, width: u32) -> Val {
        Val::with_xz(width, self.bits, self.xz)
    }

    /// Three-valued truthiness: Some(true) if any bit is known 1,
    /// Some(false) if every bit is known 0, None otherwise.
    pub fn truthy(&self) -> Option<bool> {
        if self.bits != 0 {
            Some(true)
        } else if self.xz == 0 {
            Some(false)
        } else {
            None
        }
    }

    fn lsb(&self) -> Option<bool> {
        if self.xz & 1 != 0 {
            None
        } else {
            Some(self.bits & 1 != 0)
        }
    }

    /// Extract bits [lo, lo+width). Out-of-range positions read as x.
    pub fn slice(&self, lo: u32, width: u32) -> Val {
        if lo >= 64 {
            return Val::all_x(width);
        }
        let avail = self.width.saturating_sub(lo);
        let bits = self.bits >> lo;
        let xz = self.xz >> lo;
        let oob = if avail >= width {
            0
        } else {
            mask(width) & !mask(avail)
        };
        Val::with_xz(width, bits, xz | oob)
    }

    /// Replace bits [lo, lo+v.width) with `v`, leaving the rest untouched.
    pub fn splice(&self, lo: u32, v: &Val) -> Val {
        if lo >= self.width {
            return *self;
        }
        let w = v.width.min(self.width - lo);
        let m = mask(w) << lo;
        Val {
            width: self.width,
            bits: (self.bits & !m) | ((v.bits << lo) & m),
            xz: (self.xz & !m) | ((v.xz << lo) & m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Pos,
    Neg,
    Any,
}

/// Does an `old -> new` transition match the edge kind? Vector signals edge
/// on their least significant bit; any-change compares the whole value.
pub fn edge_matches(edge: Edge, old: &Val, new: &Val) -> bool {
    match edge {
        Edge::Any => old.bits != new.bits || old.xz != new.xz,
        Edge::Pos => old.lsb() != Some(true) && new.lsb() == Some(true),
        Edge::Neg => old.lsb() != Some(false) && new.lsb() == Some(false),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,        // ~
    Neg,        // -
    Plus,       // +
    LogicalNot, // !
    RedAnd,
    RedOr,
    RedXor,
    RedNand,
    RedNor,
    RedXnor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    CaseEq,
    CaseNe,
    And,
    Or,
    Xor,
    Xnor,
    LogicalAnd,
    LogicalOr,
}

fn known_ones(v: &Val) -> u64 {
    v.bits & !v.xz
}

fn known_zeros(v: &Val) -> u64 {
    !v.bits & !v.xz & mask(v.width)
}

pub fn unary(op: UnaryOp, a: &Val) -> Val {
    match op {
        UnaryOp::Plus => *a,
        UnaryOp::Not => Val::with_xz(a.width, !a.bits, a.xz),
        UnaryOp::Neg => {
            if a.xz != 0 {
                Val::all_x(a.width)
            } else {
                Val::new(a.width, a.bits.wrapping_neg())
            }
        }
        UnaryOp::LogicalNot => match a.truthy() {
            Some(b) => Val::bit(!b),
            None => Val::bit_x(),
        },
        UnaryOp::RedAnd | UnaryOp::RedNand => {
            let r = if known_zeros(a) != 0 {
                Val::bit(false)
            } else if a.xz != 0 {
                Val::bit_x()
            } else {
                Val::bit(true)
            };
            if op == UnaryOp::RedNand {
                unary(UnaryOp::LogicalNot, &r)
            } else {
                r
            }
        }
        UnaryOp::RedOr | UnaryOp::RedNor => {
            let r = if known_ones(a) != 0 {
                Val::bit(true)
            } else if a.xz != 0 {
                Val::bit_x()
            } else {
                Val::bit(false)
            };
            if op == UnaryOp::RedNor {
                unary(UnaryOp::LogicalNot, &r)
            } else {
                r
            }
        }
        UnaryOp::RedXor | UnaryOp::RedXnor => {
            let r = if a.xz != 0 {
                Val::bit_x()
            } else {
                Val::bit(a.bits.count_ones() % 2 == 1)
            };
            if op == UnaryOp::RedXnor {
                unary(UnaryOp::LogicalNot, &r)
            } else {
                r
            }
        }
    }
}

pub fn binary(op: BinOp, a: &Val, b: &Val) -> Val {
    let w = a.width.max(b.width);
    let (a, b) = (a.resize(w), b.resize(w));
    let unknown = a.xz != 0 || b.xz != 0;
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => {
            if unknown || (matches!(op, BinOp::Div | BinOp::Mod) && b.bits == 0) {
                return Val::all_x(w);
            }
            let v = match op {
                BinOp::Add => a.bits.wrapping_add(b.bits),
                BinOp::Sub => a.bits.wrapping_sub(b.bits),
                BinOp::Mul => a.bits.wrapping_mul(b.bits),
                BinOp::Div => a.bits / b.bits,
                BinOp::Mod => a.bits % b.bits,
                _ => unreachable!(),
            };
            Val::new(w, v)
        }
        BinOp::Shl | BinOp::Shr => {
            if unknown {
                return Val::all_x(a.width);
            }
            let amt = b.bits;
            let v = if amt >= 64 {
                0
            } else if op == BinOp::Shl {
                a.bits << amt
            } else {
                a.bits >> amt
            };
            Val::new(a.width, v)
        }
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => {
            if unknown {
                return Val::bit_x();
            }
            let r = match op {
                BinOp::Lt => a.bits < b.bits,
                BinOp::Le => a.bits <= b.bits,
                BinOp::Gt => a.bits > b.bits,
                BinOp::Ge => a.bits >= b.bits,
                BinOp::Eq => a.bits == b.bits,
                BinOp::Ne => a.bits != b.bits,
                _ => unreachable!(),
            };
            Val::bit(r)
        }
        BinOp::CaseEq => Val::bit(a.bits == b.bits && a.xz == b.xz),
        BinOp::CaseNe => Val::bit(a.bits != b.bits || a.xz != b.xz),
        BinOp::And => {
            let ones = known_ones(&a) & known_ones(&b);
            let zeros = known_zeros(&a) | known_zeros(&b);
            let x = mask(w) & !ones & !zeros;
            Val::with_xz(w, ones, x)
        }
        BinOp::Or => {
            let ones = known_ones(&a) | known_ones(&b);
            let zeros = known_zeros(&a) & known_zeros(&b);
            let x = mask(w) & !ones & !zeros;
            Val::with_xz(w, ones, x)
        }
        BinOp::Xor => Val::with_xz(w, a.bits ^ b.bits, a.xz | b.xz),
        BinOp::Xnor => Val::with_xz(w, !(a.bits ^ b.bits), a.xz | b.xz),
        BinOp::LogicalAnd => match (a.truthy(), b.truthy()) {
            (Some(false), _) | (_, Some(false)) => Val::bit(false),
            (Some(true), Some(true)) => Val::bit(true),
            _ => Val::bit_x(),
        },
        BinOp::LogicalOr => match (a.truthy(), b.truthy()) {
            (Some(true), _) | (_, Some(true)) => Val::bit(true),
            (Some(false), Some(false)) => Val::bit(false),
            _ => Val::bit_x(),
        },
    }
}

/// Bitwise merge for a ternary with an unknown condition: positions where
/// both branches agree keep their value, everything else goes unknown.
pub fn merge(a: &Val, b: &Val) -> Val {
    let w = a.width.max(b.width);
    let (a, b) = (a.resize(w), b.resize(w));
    let agree = !(a.bits ^ b.bits) & !a.xz & !b.xz;
    Val::with_xz(w, a.bits & agree, mask(w) & !agree)
}

/// casez-style match: unknown positions in the arm value are wildcards.
pub fn wildcard_match(subject: &Val, arm: &Val) -> bool {
    let w = subject.width.max(arm.width);
    let (s, a) = (subject.resize(w), arm.resize(w));
    let care = !a.xz & mask(w);
    (s.bits & care) == (a.bits & care) && (s.xz & care) == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_wraps_at_width() {
        let a = Val::new(4, 0b1111);
        let one = Val::new(4, 1);
        assert_eq!(binary(BinOp::Add, &a, &one), Val::new(4, 0));
        assert_eq!(binary(BinOp::Sub, &Val::new(4, 0), &one), Val::new(4, 0b1111));
    }

    #[test]
    fn unknown_poisons_arithmetic() {
        let x = Val::all_x(4);
        let v = Val::new(4, 3);
        assert_eq!(binary(BinOp::Add, &x, &v), Val::all_x(4));
        assert_eq!(binary(BinOp::Eq, &x, &v), Val::bit_x());
    }

    #[test]
    fn bitwise_and_dominates_zero() {
        // 0 & x == 0, 1 & x == x
        let a = Val::with_xz(2, 0, 0b10); // bit1 = x, bit0 = 0
        let b = Val::new(2, 0b11);
        let r = binary(BinOp::And, &a, &b);
        assert_eq!(r.xz, 0b10);
        assert_eq!(r.bits, 0b00);
        let z = Val::new(2, 0b00);
        assert_eq!(binary(BinOp::And, &a, &z), Val::new(2, 0));
    }

    #[test]
    fn case_equality_sees_x() {
        let x = Val::all_x(1);
        assert_eq!(binary(BinOp::CaseEq, &x, &x), Val::bit(true));
        assert_eq!(binary(BinOp::CaseEq, &x, &Val::bit(true)), Val::bit(false));
        assert_eq!(binary(BinOp::Eq, &x, &x), Val::bit_x());
    }

    #[test]
    fn edges_on_lsb() {
        let zero = Val::new(1, 0);
        let one = Val::new(1, 1);
        let x = Val::all_x(1);
        assert!(edge_matches(Edge::Pos, &zero, &one));
        assert!(edge_matches(Edge::Pos, &x, &one));
        assert!(!edge_matches(Edge::Pos, &one, &one));
        assert!(!edge_matches(Edge::Pos, &one, &zero));
        assert!(edge_matches(Edge::Neg, &one, &zero));
        assert!(edge_matches(Edge::Any, &zero, &x));
    }

    #[test]
    fn slice_and_splice_roundtrip() {
        let v = Val::new(8, 0b1011_0110);
        assert_eq!(v.slice(4, 4), Val::new(4, 0b1011));
        let w = v.splice(4, &Val::new(4, 0b0001));
        assert_eq!(w, Val::new(8, 0b0001_0110));
        // out-of-range read is x
        assert_eq!(v.slice(7, 2).xz, 0b10);
    }

    #[test]
    fn reduction_ops() {
        let v = Val::new(4, 0b1111);
        assert_eq!(unary(UnaryOp::RedAnd, &v), Val::bit(true));
        assert_eq!(unary(UnaryOp::RedXor, &v), Val::bit(false));
        let withx = Val::with_xz(4, 0b0111, 0b1000);
        assert_eq!(unary(UnaryOp::RedAnd, &withx), Val::bit_x());
        let zero_somewhere = Val::with_xz(4, 0b0011, 0b1000);
        assert_eq!(unary(UnaryOp::RedAnd, &zero_somewhere), Val::bit(false));
    }
}

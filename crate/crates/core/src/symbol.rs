//! Symbol table: the fixed set of built-in heads, their attributes, and the
//! global total order used everywhere a term order is needed.
//!
//! Built-ins are ordered by their registration order below; user identifiers
//! come after every built-in and compare lexicographically among themselves.

use alloc::string::String;
use alloc::sync::Arc;
use core::cmp::Ordering;
use core::fmt;

/// A complex integer scalar literal `re + im*i`.
///
/// The term grammar only ever introduces `0` and `1`; other values arise from
/// folding sums and products of literals (and from the `CPX`/`1i` spellings
/// the parser accepts for library definitions such as rotation gates).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CNum {
    pub re: i64,
    pub im: i64,
}

impl CNum {
    pub const ZERO: CNum = CNum { re: 0, im: 0 };
    pub const ONE: CNum = CNum { re: 1, im: 0 };

    pub fn new(re: i64, im: i64) -> Self {
        CNum { re, im }
    }

    pub fn real(re: i64) -> Self {
        CNum { re, im: 0 }
    }

    pub fn add(self, other: CNum) -> CNum {
        CNum::new(self.re + other.re, self.im + other.im)
    }

    pub fn mul(self, other: CNum) -> CNum {
        CNum::new(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )
    }

    pub fn conj(self) -> CNum {
        CNum::new(self.re, -self.im)
    }

    pub fn is_zero(self) -> bool {
        self == CNum::ZERO
    }

    pub fn is_one(self) -> bool {
        self == CNum::ONE
    }
}

impl fmt::Display for CNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0 {
            write!(f, "{}", self.re)
        } else if self.re == 0 {
            write!(f, "{}i", self.im)
        } else {
            write!(f, "CPX[{}, {}]", self.re, self.im)
        }
    }
}

macro_rules! builtins {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Built-in function heads, in registration order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[allow(clippy::upper_case_acronyms)]
        pub enum Builtin {
            $($variant),*
        }

        impl Builtin {
            pub fn name(self) -> &'static str {
                match self {
                    $(Builtin::$variant => $name),*
                }
            }

            pub fn from_name(s: &str) -> Option<Builtin> {
                match s {
                    $($name => Some(Builtin::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

builtins! {
    // index and type layer
    Index => "INDEX",
    Bit => "BIT",
    Prod => "PROD",
    Basis => "BASIS",
    SType => "STYPE",
    KType => "KTYPE",
    BType => "BTYPE",
    OType => "OTYPE",
    SetT => "SET",
    Arrow => "ARROW",
    Forall => "FORALL",
    Reg => "REG",
    DType => "DTYPE",
    RSet => "RSET",
    // sets
    USet => "USET",
    Star => "STAR",
    // basis pairs (also register pairs)
    Pair => "PAIR",
    // scalars
    Adds => "ADDS",
    Muls => "MULS",
    Conj => "CONJ",
    Delta => "DELTA",
    Dot => "DOT",
    // Dirac constants and functions
    ZeroK => "ZEROK",
    ZeroB => "ZEROB",
    ZeroO => "ZEROO",
    OneO => "ONEO",
    Ket => "KET",
    Bra => "BRA",
    Adj => "ADJ",
    Scr => "SCR",
    Add => "ADD",
    MulK => "MULK",
    MulB => "MULB",
    MulO => "MULO",
    Outer => "OUTER",
    Tsr => "TSR",
    Sum => "SUM",
    Fun => "FUN",
    Idx => "IDX",
    Apply => "APPLY",
    Compo => "COMPO",
    // labelled Dirac notation
    LKet => "LKET",
    LBra => "LBRA",
    LTsr => "LTSR",
    LDot => "LDOT",
    LiftK => "LIFTK",
    LiftB => "LIFTB",
    LiftO => "LIFTO",
    Label => "LABEL",
    ZeroD => "ZEROD",
    // parser artifact: unresolved binder annotation of a `Sum x in s, e`
    Hole => "HOLE",
}

impl Builtin {
    /// Associative-commutative heads carry indefinite arity and keep their
    /// arguments flat. `DELTA` is commutative with fixed arity 2; it shares
    /// the AC matching and sorting machinery.
    pub fn is_ac(self) -> bool {
        matches!(
            self,
            Builtin::Adds | Builtin::Muls | Builtin::Add | Builtin::LTsr | Builtin::Delta
        )
    }

    /// AC heads that may actually be flattened/varied in arity.
    pub fn is_flattenable(self) -> bool {
        matches!(
            self,
            Builtin::Adds | Builtin::Muls | Builtin::Add | Builtin::LTsr
        )
    }

    /// Heads that bind a variable in named form.
    pub fn is_binder(self) -> bool {
        matches!(self, Builtin::Fun | Builtin::Idx)
    }
}

/// The head of a term node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Head {
    /// Complex integer literal.
    Num(CNum),
    /// de Bruijn index `$k`.
    DbIdx(u32),
    /// Built-in symbol.
    B(Builtin),
    /// User identifier: free variable, defined name, register, or a named
    /// bound variable.
    User(Arc<str>),
    /// Pattern variable (rewrite rule left-hand sides only).
    PVar(&'static str),
    /// Sequence variable matching a sub-multiset of an AC argument list
    /// (rewrite rule left-hand sides only).
    PSeq(&'static str),
}

impl Head {
    fn rank(&self) -> u8 {
        match self {
            Head::Num(_) => 0,
            Head::DbIdx(_) => 1,
            Head::B(_) => 2,
            Head::User(_) => 3,
            Head::PVar(_) => 4,
            Head::PSeq(_) => 5,
        }
    }

    /// The global total order over all symbols.
    pub fn order(&self, other: &Head) -> Ordering {
        match (self, other) {
            (Head::Num(a), Head::Num(b)) => a.cmp(b),
            (Head::DbIdx(a), Head::DbIdx(b)) => a.cmp(b),
            (Head::B(a), Head::B(b)) => a.cmp(b),
            (Head::User(a), Head::User(b)) => a.as_ref().cmp(b.as_ref()),
            (Head::PVar(a), Head::PVar(b)) => a.cmp(b),
            (Head::PSeq(a), Head::PSeq(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }

    pub fn is_ac(&self) -> bool {
        matches!(self, Head::B(b) if b.is_ac())
    }

    pub fn is_flattenable(&self) -> bool {
        matches!(self, Head::B(b) if b.is_flattenable())
    }

    pub fn display_name(&self) -> String {
        use alloc::format;
        match self {
            Head::Num(n) => format!("{n}"),
            Head::DbIdx(k) => format!("${k}"),
            Head::B(b) => String::from(b.name()),
            Head::User(s) => String::from(s.as_ref()),
            Head::PVar(s) => format!("?{s}"),
            Head::PSeq(s) => format!("??{s}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_roundtrip_names() {
        for b in [Builtin::Adds, Builtin::LKet, Builtin::ZeroD, Builtin::Sum] {
            assert_eq!(Builtin::from_name(b.name()), Some(b));
        }
        assert_eq!(Builtin::from_name("NOPE"), None);
    }

    #[test]
    fn lket_sorts_before_lbra() {
        // the generic AC sort relies on this to put kets before bras
        assert!(Builtin::LKet < Builtin::LBra);
    }

    #[test]
    fn cnum_arith() {
        let i = CNum::new(0, 1);
        assert_eq!(i.mul(i), CNum::real(-1));
        assert_eq!(CNum::real(2).add(CNum::new(1, 3)), CNum::new(3, 3));
        assert_eq!(CNum::new(1, -2).conj(), CNum::new(1, 2));
    }
}

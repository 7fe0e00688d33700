//! Three-valued truth with Kleene connectives.
//!
//! `Unknown` tracks questions that bottom out in the undecided tail of the
//! Busy Beaver function; it must propagate through whole-table runs instead
//! of aborting them.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum ThreeVal {
    True,
    False,
    Unknown,
}

impl ThreeVal {
    pub fn from_bool(b: bool) -> Self {
        if b {
            ThreeVal::True
        } else {
            ThreeVal::False
        }
    }

    pub fn is_true(self) -> bool {
        self == ThreeVal::True
    }

    pub fn is_false(self) -> bool {
        self == ThreeVal::False
    }

    pub fn is_unknown(self) -> bool {
        self == ThreeVal::Unknown
    }

    pub fn and(self, other: ThreeVal) -> ThreeVal {
        match (self, other) {
            (ThreeVal::False, _) | (_, ThreeVal::False) => ThreeVal::False,
            (ThreeVal::True, ThreeVal::True) => ThreeVal::True,
            _ => ThreeVal::Unknown,
        }
    }

    pub fn or(self, other: ThreeVal) -> ThreeVal {
        match (self, other) {
            (ThreeVal::True, _) | (_, ThreeVal::True) => ThreeVal::True,
            (ThreeVal::False, ThreeVal::False) => ThreeVal::False,
            _ => ThreeVal::Unknown,
        }
    }

    pub fn not(self) -> ThreeVal {
        match self {
            ThreeVal::True => ThreeVal::False,
            ThreeVal::False => ThreeVal::True,
            ThreeVal::Unknown => ThreeVal::Unknown,
        }
    }

    /// Kleene disjunction over an iterator, short-circuiting on `True`.
    pub fn any<I: IntoIterator<Item = ThreeVal>>(iter: I) -> ThreeVal {
        let mut acc = ThreeVal::False;
        for v in iter {
            acc = acc.or(v);
            if acc.is_true() {
                return acc;
            }
        }
        acc
    }

    /// Kleene conjunction over an iterator, short-circuiting on `False`.
    pub fn all<I: IntoIterator<Item = ThreeVal>>(iter: I) -> ThreeVal {
        let mut acc = ThreeVal::True;
        for v in iter {
            acc = acc.and(v);
            if acc.is_false() {
                return acc;
            }
        }
        acc
    }
}

impl From<bool> for ThreeVal {
    fn from(b: bool) -> Self {
        ThreeVal::from_bool(b)
    }
}

impl fmt::Display for ThreeVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThreeVal::True => write!(f, "T"),
            ThreeVal::False => write!(f, "F"),
            ThreeVal::Unknown => write!(f, "?"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kleene_tables() {
        use ThreeVal::*;
        assert_eq!(True.and(Unknown), Unknown);
        assert_eq!(False.and(Unknown), False);
        assert_eq!(True.or(Unknown), True);
        assert_eq!(False.or(Unknown), Unknown);
        assert_eq!(Unknown.not(), Unknown);
        assert_eq!(ThreeVal::any([False, Unknown, True]), True);
        assert_eq!(ThreeVal::all([True, Unknown]), Unknown);
    }
}

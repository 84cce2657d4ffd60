//! Interned variable names.
//!
//! Every scalar, segment and temporary variable is represented by a [`Var`],
//! a small copyable handle into a process-wide name table. The table only
//! grows; two handles are equal iff their names are equal.

use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

#[derive(Default)]
struct Interner {
    names: Vec<&'static str>,
    ids: HashMap<&'static str, u32>,
}

fn interner() -> &'static RwLock<Interner> {
    static TABLE: OnceLock<RwLock<Interner>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Interner::default();
        // id 0 is the zero node of difference-bound matrices
        t.names.push("0");
        t.ids.insert("0", 0);
        RwLock::new(t)
    })
}

/// Name of the distinguished index pseudo-variable.
pub const IDX: &str = "idx";

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// The constant-zero node used to encode unary bounds as differences.
    pub const ZERO: Var = Var(0);

    pub fn new(name: &str) -> Var {
        if let Some(&id) = interner().read().expect("interner poisoned").ids.get(name) {
            return Var(id);
        }
        let mut t = interner().write().expect("interner poisoned");
        if let Some(&id) = t.ids.get(name) {
            return Var(id);
        }
        let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let id = t.names.len() as u32;
        t.names.push(leaked);
        t.ids.insert(leaked, id);
        Var(id)
    }

    pub fn name(self) -> &'static str {
        interner().read().expect("interner poisoned").names[self.0 as usize]
    }

    pub fn is_zero(self) -> bool {
        self == Var::ZERO
    }

    pub fn idx() -> Var {
        Var::new(IDX)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Segment variable for an array: the lowercased array name.
pub fn segment_var(array: &str) -> Var {
    Var::new(&array.to_lowercase())
}

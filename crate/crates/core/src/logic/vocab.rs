use super::Sort;
use std::collections::{BTreeMap, BTreeSet};

/// Signature of a declared qualifier or data constructor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualSig {
    pub args: Vec<Sort>,
    pub result: Sort,
    pub interpreted: bool,
}

/// Symbols a proposition may mention: qualifiers, constructors, user sorts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    pub quals: BTreeMap<String, QualSig>,
    pub ctors: BTreeMap<String, QualSig>,
    pub sorts: BTreeSet<String>,
}

impl Vocab {
    pub fn func(&self, name: &str) -> Option<&QualSig> {
        self.quals.get(name).or_else(|| self.ctors.get(name))
    }

    /// Value sort of a select-shaped interpreted qualifier (`heap * ref -> t`).
    pub fn select_sort(&self, name: &str) -> Option<&Sort> {
        let q = self.quals.get(name)?;
        if q.interpreted && q.args.len() == 2 && q.args[0] == Sort::Heap {
            Some(&q.result)
        } else {
            None
        }
    }
}

/// Naming convention for interpreted heap operators: `sel`, `update` and
/// their prefixed variants (`qsel`, `ilssel`, ...).
pub fn is_interpreted_name(name: &str) -> bool {
    name.ends_with("sel") || name.ends_with("update")
}

use super::Sort;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

/// Source of fresh ghost indices, shared by every state of one engine run.
#[derive(Debug, Clone, Default)]
pub struct GhostGen(Arc<AtomicUsize>);

impl GhostGen {
    pub fn new() -> Self {
        GhostGen(Arc::new(AtomicUsize::new(1)))
    }

    pub fn next(&self) -> usize {
        self.0.fetch_add(1, Ordering::Relaxed)
    }

    pub fn fresh(&self, stem: &str) -> String {
        let n = self.next();
        if stem.ends_with(|c: char| c.is_ascii_digit()) {
            format!("{}_{}", stem, n)
        } else {
            format!("{}{}", stem, n)
        }
    }
}

fn ghost_stem(loc: &str) -> String {
    let mut cs = loc.chars();
    match cs.next() {
        Some(c) => c.to_uppercase().chain(cs).filter(|c| c.is_alphanumeric() || *c == '_').collect(),
        None => "G".to_string(),
    }
}

/// Ghost timeline per location under the no-aliasing heap model.
#[derive(Debug, Clone)]
pub struct HeapState {
    pub initial: BTreeMap<String, String>,
    pub current: BTreeMap<String, String>,
    pub history: BTreeMap<String, Vec<String>>,
    pub ghost_sorts: BTreeMap<String, Sort>,
    pub heap_initial: String,
    pub heap_current: String,
    pub heaps: Vec<String>,
    gen: GhostGen,
}

impl HeapState {
    pub fn new(gen: GhostGen) -> Self {
        let h0 = "H0".to_string();
        let mut ghost_sorts = BTreeMap::new();
        ghost_sorts.insert(h0.clone(), Sort::Heap);
        HeapState {
            initial: BTreeMap::new(),
            current: BTreeMap::new(),
            history: BTreeMap::new(),
            ghost_sorts,
            heap_initial: h0.clone(),
            heap_current: h0.clone(),
            heaps: vec![h0],
            gen,
        }
    }

    pub fn gen(&self) -> &GhostGen {
        &self.gen
    }

    /// Track `loc` from the initial heap if it is not tracked yet.
    pub fn ensure(&mut self, loc: &str, sort: &Sort) {
        if !self.current.contains_key(loc) {
            let g = self.initial_ghost(loc, sort);
            self.current.insert(loc.to_string(), g.clone());
            self.history.insert(loc.to_string(), vec![g]);
        }
    }

    /// Ghost naming `loc` in the initial heap, allocated on first use.
    pub fn initial_ghost(&mut self, loc: &str, sort: &Sort) -> String {
        if let Some(g) = self.initial.get(loc) {
            return g.clone();
        }
        let stem = ghost_stem(loc);
        let g = if stem.ends_with(|c: char| c.is_ascii_digit()) {
            format!("{}_0", stem)
        } else {
            format!("{}0", stem)
        };
        self.initial.insert(loc.to_string(), g.clone());
        self.ghost_sorts.insert(g.clone(), sort.clone());
        g
    }

    /// Allocate a fresh ghost for `loc` and make it current.
    pub fn advance(&mut self, loc: &str, sort: &Sort) -> String {
        let g = self.gen.fresh(&ghost_stem(loc));
        self.current.insert(loc.to_string(), g.clone());
        self.history.entry(loc.to_string()).or_default().push(g.clone());
        self.ghost_sorts.insert(g.clone(), sort.clone());
        g
    }

    pub fn advance_heap(&mut self) -> String {
        let h = self.gen.fresh("H");
        self.heap_current = h.clone();
        self.heaps.push(h.clone());
        self.ghost_sorts.insert(h.clone(), Sort::Heap);
        h
    }

    pub fn record_sort(&mut self, sym: &str, sort: &Sort) {
        self.ghost_sorts.insert(sym.to_string(), sort.clone());
    }

    /// Ghosts allocated after the initial heap.
    pub fn evars(&self) -> BTreeSet<String> {
        let init: BTreeSet<&String> = self.initial.values().collect();
        let mut out: BTreeSet<String> = self
            .history
            .values()
            .flatten()
            .filter(|g| !init.contains(g))
            .cloned()
            .collect();
        out.extend(self.heaps.iter().filter(|h| **h != self.heap_initial).cloned());
        out
    }

    /// Every ghost or heap symbol this state knows about.
    pub fn symbols(&self) -> &BTreeMap<String, Sort> {
        &self.ghost_sorts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_state_has_no_evars() {
        let hs = HeapState::new(GhostGen::new());
        assert!(hs.evars().is_empty());
    }

    #[test]
    fn advancing_grows_history_with_fresh_names() {
        let mut hs = HeapState::new(GhostGen::new());
        let t = Sort::Named("table".into());
        hs.ensure("tbl", &t);
        let a = hs.advance("tbl", &t);
        let b = hs.advance("tbl", &t);
        assert_ne!(a, b);
        assert_eq!(hs.history["tbl"], vec!["Tbl0".to_string(), a.clone(), b.clone()]);
        assert_eq!(hs.current["tbl"], b);
        assert_eq!(hs.evars().len(), 2);
    }

    #[test]
    fn stems_with_trailing_digits_stay_distinct() {
        let gen = GhostGen::new();
        let mut hs = HeapState::new(gen);
        let s = Sort::Int;
        hs.ensure("q1", &s);
        let g = hs.advance("q1", &s);
        assert!(g.starts_with("Q1_"));
    }
}

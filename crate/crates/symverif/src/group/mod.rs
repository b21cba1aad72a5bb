//! Finitely presented groups, their actions on program states, and
//! homomorphisms between them.

mod action;
mod enumerate;
mod hom;
mod word;

pub use action::{check_action, direct_product, entails, free_product, lift, GroupAction, SymMap};
pub use enumerate::{enumerate, FiniteGroupTable};
pub use hom::{
    builtin_hom, hom_check, hom_compose, hom_free_product, hom_power, hom_product, word_is_identity, HomKind,
    Homomorphism,
};
pub use word::{parse_word, Word};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// Default bound on enumerated group sizes.
pub const DEFAULT_MAX_ELEMS: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("group `{group}` has more than {bound} elements (or is infinite)")]
    BoundExceeded { group: String, bound: usize },
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("invalid action `{action}`: {msg}")]
    InvalidAction { action: String, msg: String },
    #[error("`{action}` is not a group action: relation {relation} fails on `{variable}` ({lhs} vs {rhs}){}", cex_suffix(.counterexample))]
    NotAnAction {
        action: String,
        relation: String,
        variable: String,
        lhs: String,
        rhs: String,
        counterexample: Option<String>,
    },
    #[error("could not decide {what}: {reason}")]
    Undecided { what: String, reason: String },
    #[error("no inverse for generator `{generator}` of `{action}`: its map is not affine and its order is unknown")]
    NoInverse { action: String, generator: String },
    #[error("actions do not commute: `{g}` and `{h}` disagree on `{variable}`")]
    NonCommutingActions { g: String, h: String, variable: String },
    #[error("`{hom}` is not a homomorphism: relation {relation} maps to {image} ≠ e")]
    NotAHomomorphism { hom: String, relation: String, image: String },
    #[error("cannot verify `{hom}`: relation {relation} maps to {image}, undecided in an infinite target")]
    Unverifiable { hom: String, relation: String, image: String },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("variables {missing:?} of the target action are not acted on by the source action")]
    VarsNotSubset { missing: Vec<String> },
    #[error("entailment fails at generator `{generator}` on `{variable}`{}", cex_suffix(.counterexample))]
    NotEntailed { generator: String, variable: String, counterexample: Option<String> },
}

fn cex_suffix(c: &Option<String>) -> String {
    c.as_ref().map(|c| format!("; counterexample {}", c)).unwrap_or_default()
}

/// A record of the checks discharged for a claim.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Certificate {
    pub subject: String,
    pub entries: Vec<String>,
}

impl Certificate {
    pub fn new(subject: impl Into<String>) -> Self {
        Certificate { subject: subject.into(), entries: Vec::new() }
    }

    pub fn push(&mut self, s: impl Into<String>) {
        self.entries.push(s.into());
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductKind {
    Direct,
    Free,
}

/// Factors of a product presentation, with the generator renaming applied
/// to each factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Components {
    pub kind: ProductKind,
    pub left: GroupPresentation,
    pub right: GroupPresentation,
    /// factor generator -> product generator
    pub left_names: BTreeMap<String, String>,
    pub right_names: BTreeMap<String, String>,
}

/// Subgroup declared by generator words in a parent group.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub parent: String,
    pub images: BTreeMap<String, Word>,
}

/// ⟨S | R⟩. Relations keep their source form; [`GroupPresentation::relators`]
/// gives the normalized `w = e` form.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPresentation {
    pub name: String,
    pub generators: Vec<String>,
    pub relations: Vec<(Word, Word)>,
    pub embedding: Option<Embedding>,
    pub components: Option<Box<Components>>,
}

impl GroupPresentation {
    pub fn new(name: &str, generators: Vec<String>, relations: Vec<(Word, Word)>) -> Result<Self, GroupError> {
        let mut seen = BTreeSet::new();
        for g in &generators {
            if g == "e" {
                return Err(GroupError::InvalidPresentation("`e` is reserved for the identity".into()));
            }
            if !seen.insert(g.clone()) {
                return Err(GroupError::InvalidPresentation(format!("duplicate generator `{}`", g)));
            }
        }
        for (l, r) in &relations {
            for w in [l, r] {
                if let Some(g) = w.generators().into_iter().find(|g| !seen.contains(g)) {
                    return Err(GroupError::InvalidPresentation(format!(
                        "relation {} = {} uses undeclared generator `{}`",
                        l, r, g
                    )));
                }
            }
        }
        Ok(GroupPresentation { name: name.to_string(), generators, relations, embedding: None, components: None })
    }

    /// The trivial group E.
    pub fn trivial() -> Self {
        GroupPresentation::new("E", vec![], vec![]).unwrap()
    }

    pub fn free(name: &str, gens: &[&str]) -> Self {
        GroupPresentation::new(name, gens.iter().map(|s| s.to_string()).collect(), vec![]).unwrap()
    }

    /// ⟨g | g^n = e⟩
    pub fn cyclic(name: &str, gen: &str, n: i64) -> Self {
        GroupPresentation::new(name, vec![gen.into()], vec![(Word::power(gen, n), Word::identity())]).unwrap()
    }

    /// ⟨r, s | r^n = e, s^2 = e, r s = s r^-1⟩, of order 2n.
    pub fn dihedral(name: &str, n: i64) -> Self {
        let r = Word::gen("r");
        let s = Word::gen("s");
        GroupPresentation::new(
            name,
            vec!["r".into(), "s".into()],
            vec![
                (Word::power("r", n), Word::identity()),
                (Word::power("s", 2), Word::identity()),
                (r.mul(&s), s.mul(&r.inverse())),
            ],
        )
        .unwrap()
    }

    /// S_n by adjacent transpositions `s1 .. s{n-1}` with the Coxeter
    /// relations.
    pub fn symmetric(name: &str, n: usize) -> Self {
        let gens: Vec<String> = (1..n).map(|i| format!("s{}", i)).collect();
        let mut rels = Vec::new();
        for i in 0..gens.len() {
            rels.push((Word::power(&gens[i], 2), Word::identity()));
            for j in i + 1..gens.len() {
                let si = Word::gen(&gens[i]);
                let sj = Word::gen(&gens[j]);
                if j == i + 1 {
                    rels.push((si.mul(&sj).pow(3), Word::identity()));
                } else {
                    rels.push((si.mul(&sj), sj.mul(&si)));
                }
            }
        }
        GroupPresentation::new(name, gens, rels).unwrap()
    }

    pub fn has_generator(&self, g: &str) -> bool {
        self.generators.iter().any(|x| x == g)
    }

    /// Relations as relators `l r^-1`, freely reduced.
    pub fn relators(&self) -> Vec<Word> {
        self.relations.iter().map(|(l, r)| l.mul(&r.inverse())).filter(|w| !w.is_identity()).collect()
    }

    /// Same generators and relators (names are ignored).
    pub fn same_group(&self, o: &GroupPresentation) -> bool {
        self.generators == o.generators && self.relators() == o.relators()
    }

    /// Key identifying the presentation for caching.
    pub fn signature(&self) -> String {
        let rels: Vec<String> = self.relators().iter().map(|w| w.to_string()).collect();
        format!("<{} | {}>", self.generators.join(","), rels.join(","))
    }

    /// Product presentation with collision renaming (`_1`/`_2`).
    pub fn product(kind: ProductKind, a: &GroupPresentation, b: &GroupPresentation) -> GroupPresentation {
        let clash: BTreeSet<&String> = a.generators.iter().filter(|g| b.has_generator(g)).collect();
        let rename = |g: &String, suffix: &str| {
            if clash.contains(g) {
                format!("{}_{}", g, suffix)
            } else {
                g.clone()
            }
        };
        let left_names: BTreeMap<String, String> = a.generators.iter().map(|g| (g.clone(), rename(g, "1"))).collect();
        let right_names: BTreeMap<String, String> = b.generators.iter().map(|g| (g.clone(), rename(g, "2"))).collect();
        let mut gens: Vec<String> = a.generators.iter().map(|g| left_names[g].clone()).collect();
        gens.extend(b.generators.iter().map(|g| right_names[g].clone()));
        let mut rels: Vec<(Word, Word)> =
            a.relations.iter().map(|(l, r)| (l.rename(&left_names), r.rename(&left_names))).collect();
        rels.extend(b.relations.iter().map(|(l, r)| (l.rename(&right_names), r.rename(&right_names))));
        if kind == ProductKind::Direct {
            for g in &a.generators {
                for h in &b.generators {
                    let g = Word::gen(&left_names[g]);
                    let h = Word::gen(&right_names[h]);
                    rels.push((g.mul(&h), h.mul(&g)));
                }
            }
        }
        let op = if kind == ProductKind::Direct { "×" } else { "*" };
        let mut p = GroupPresentation::new(&format!("{}{}{}", a.name, op, b.name), gens, rels)
            .expect("renamed product generators are distinct");
        p.components = Some(Box::new(Components {
            kind,
            left: a.clone(),
            right: b.clone(),
            left_names,
            right_names,
        }));
        p
    }
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rels: Vec<String> = self.relations.iter().map(|(l, r)| format!("{} = {}", l, r)).collect();
        write!(f, "{} = <{} | {}>", self.name, self.generators.join(", "), rels.join(", "))
    }
}

/// Shared enumeration cache for one run. Every request is logged so callers
/// can assert that a group was never enumerated.
pub struct GroupContext {
    pub max_elems: usize,
    tables: Mutex<HashMap<String, Option<Arc<FiniteGroupTable>>>>,
    requests: Mutex<Vec<String>>,
}

impl GroupContext {
    pub fn new(max_elems: usize) -> Self {
        GroupContext { max_elems, tables: Mutex::new(HashMap::new()), requests: Mutex::new(Vec::new()) }
    }

    /// The multiplication table, or `None` when the group exceeds the bound.
    pub fn table(&self, g: &GroupPresentation) -> Option<Arc<FiniteGroupTable>> {
        self.requests.lock().unwrap().push(g.name.clone());
        let key = g.signature();
        if let Some(t) = self.tables.lock().unwrap().get(&key) {
            return t.clone();
        }
        let t = enumerate(g, self.max_elems).ok().map(Arc::new);
        self.tables.lock().unwrap().insert(key, t.clone());
        t
    }

    /// Names of the groups whose enumeration was requested, in order.
    pub fn enumeration_requests(&self) -> Vec<String> {
        self.requests.lock().unwrap().clone()
    }
}

impl Default for GroupContext {
    fn default() -> Self {
        GroupContext::new(DEFAULT_MAX_ELEMS)
    }
}

#[cfg(test)]
mod tests;

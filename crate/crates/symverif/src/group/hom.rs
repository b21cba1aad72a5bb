//! Homomorphisms given by generator images, and their verification.

use super::{Certificate, GroupContext, GroupError, GroupPresentation, ProductKind, Word};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomKind {
    /// `eq`: identity on a group.
    Eq,
    /// `e*`: everything to the identity.
    EStar,
    Proj1,
    Proj2,
    /// `e⁻`: from the trivial group.
    EMinus,
    Inclusion,
    Declared,
    Derived,
}

impl HomKind {
    pub fn from_name(s: &str) -> Option<HomKind> {
        Some(match s {
            "eq" | "id" => HomKind::Eq,
            "e*" | "e_star" | "estar" => HomKind::EStar,
            "proj1" | "π1" => HomKind::Proj1,
            "proj2" | "π2" => HomKind::Proj2,
            "e-" | "e⁻" | "e_minus" | "eminus" => HomKind::EMinus,
            "inclusion" | "incl" => HomKind::Inclusion,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Homomorphism {
    pub name: String,
    pub kind: HomKind,
    pub source: GroupPresentation,
    pub target: GroupPresentation,
    pub images: BTreeMap<String, Word>,
}

impl fmt::Display for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let imgs: Vec<String> = self.images.iter().map(|(g, w)| format!("{} ↦ {}", g, w)).collect();
        write!(f, "{}: {} → {} [{}]", self.name, self.source.name, self.target.name, imgs.join(", "))
    }
}

impl Homomorphism {
    /// A map given by generator images. Missing images default to `e`.
    pub fn new(
        name: &str,
        source: GroupPresentation,
        target: GroupPresentation,
        images: BTreeMap<String, Word>,
    ) -> Result<Self, GroupError> {
        if let Some(g) = images.keys().find(|g| !source.has_generator(g)) {
            return Err(GroupError::ShapeMismatch(format!("`{}` is not a generator of {}", g, source.name)));
        }
        for (g, w) in &images {
            if let Some(x) = w.generators().into_iter().find(|x| !target.has_generator(x)) {
                return Err(GroupError::ShapeMismatch(format!(
                    "image of `{}` uses `{}`, which is not a generator of {}",
                    g, x, target.name
                )));
            }
        }
        let images =
            source.generators.iter().map(|g| (g.clone(), images.get(g).cloned().unwrap_or_default())).collect();
        Ok(Homomorphism { name: name.to_string(), kind: HomKind::Declared, source, target, images })
    }

    pub fn image(&self, w: &Word) -> Word {
        w.substitute(&|g| self.images.get(g).cloned().unwrap_or_default())
    }

    /// Identity map on one group.
    pub fn is_identity_map(&self) -> bool {
        self.source.same_group(&self.target) && self.images.iter().all(|(g, w)| *w == Word::gen(g))
    }

    pub fn is_trivial(&self) -> bool {
        self.images.values().all(Word::is_identity)
    }
}

/// A built-in homomorphism between the given groups, checked.
pub fn builtin_hom(
    kind: HomKind,
    source: &GroupPresentation,
    target: &GroupPresentation,
    ctx: &GroupContext,
) -> Result<Homomorphism, GroupError> {
    let name = match kind {
        HomKind::Eq => "eq",
        HomKind::EStar => "e*",
        HomKind::Proj1 => "proj1",
        HomKind::Proj2 => "proj2",
        HomKind::EMinus => "e⁻",
        HomKind::Inclusion => "inclusion",
        HomKind::Declared | HomKind::Derived => {
            return Err(GroupError::ShapeMismatch("not a built-in homomorphism".into()))
        }
    };
    let shape = |msg: String| GroupError::ShapeMismatch(format!("{}: {}", name, msg));
    let images: BTreeMap<String, Word> = match kind {
        HomKind::Eq => {
            if !source.same_group(target) {
                return Err(shape(format!("{} and {} are different presentations", source.name, target.name)));
            }
            source.generators.iter().map(|g| (g.clone(), Word::gen(g))).collect()
        }
        HomKind::EStar => source.generators.iter().map(|g| (g.clone(), Word::identity())).collect(),
        HomKind::EMinus => {
            let trivial =
                source.generators.is_empty() || ctx.table(source).is_some_and(|t| t.size() == 1);
            if !trivial {
                return Err(shape(format!("{} is not the trivial group", source.name)));
            }
            source.generators.iter().map(|g| (g.clone(), Word::identity())).collect()
        }
        HomKind::Proj1 | HomKind::Proj2 => {
            let c = source
                .components
                .as_ref()
                .ok_or_else(|| shape(format!("{} is not a product", source.name)))?;
            let (factor, keep, drop) = if kind == HomKind::Proj1 {
                (&c.left, &c.left_names, &c.right_names)
            } else {
                (&c.right, &c.right_names, &c.left_names)
            };
            if !factor.same_group(target) {
                return Err(shape(format!("{} is not a factor of {}", target.name, source.name)));
            }
            let mut m: BTreeMap<String, Word> = keep.iter().map(|(orig, new)| (new.clone(), Word::gen(orig))).collect();
            m.extend(drop.values().map(|new| (new.clone(), Word::identity())));
            m
        }
        HomKind::Inclusion => match &source.embedding {
            Some(e) if e.parent == target.name => e.images.clone(),
            _ if source.generators.iter().all(|g| target.has_generator(g)) => {
                source.generators.iter().map(|g| (g.clone(), Word::gen(g))).collect()
            }
            _ => return Err(shape(format!("{} is not declared as a subgroup of {}", source.name, target.name))),
        },
        HomKind::Declared | HomKind::Derived => unreachable!(),
    };
    let mut h = Homomorphism::new(name, source.clone(), target.clone(), images)?;
    h.kind = kind;
    hom_check(&h, ctx)?;
    Ok(h)
}

/// Verifies that every relation of the source maps to a relation of the
/// target. Checks free reduction and Dehn rewriting first, then free and
/// free-abelian targets, then a finite enumeration of the target.
pub fn hom_check(h: &Homomorphism, ctx: &GroupContext) -> Result<Certificate, GroupError> {
    let mut cert = Certificate::new(format!("{} is a homomorphism", h.name));
    if h.is_identity_map() {
        cert.push("identity on a single presentation");
        return Ok(cert);
    }
    if h.is_trivial() {
        cert.push("all generators map to e");
        return Ok(cert);
    }
    for (l, r) in &h.source.relations {
        let img = h.image(&l.mul(&r.inverse()));
        let relation = format!("{} = {}", l, r);
        match word_is_identity(&h.target, &img, ctx) {
            Some(true) => cert.push(format!("{} ↦ e", relation)),
            Some(false) => {
                return Err(GroupError::NotAHomomorphism { hom: h.name.clone(), relation, image: img.to_string() })
            }
            None => return Err(GroupError::Unverifiable { hom: h.name.clone(), relation, image: img.to_string() }),
        }
    }
    Ok(cert)
}

type Letter = (usize, i64);

fn to_letters(g: &GroupPresentation, w: &Word) -> Option<Vec<Letter>> {
    w.letters().into_iter().map(|(x, e)| g.generators.iter().position(|y| y == x).map(|i| (i, e))).collect()
}

fn free_reduce(w: &mut Vec<Letter>) {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in w.iter() {
        if out.last().is_some_and(|&(i, e)| i == l.0 && e == -l.1) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    *w = out;
}

fn invert(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|&(i, e)| (i, -e)).collect()
}

/// Relators longer than this are left to enumeration.
const DEHN_MAX_RELATOR: usize = 64;

/// Repeatedly replaces a subword that is more than half of a cyclic
/// relator by the inverse of the remainder. Sound always; complete for
/// Dehn presentations.
fn dehn_reduce(g: &GroupPresentation, w: &[Letter]) -> Vec<Letter> {
    let mut pieces: Vec<Vec<Letter>> = Vec::new();
    for r in g.relators() {
        let Some(r) = to_letters(g, &r) else { continue };
        if r.len() > DEHN_MAX_RELATOR {
            continue;
        }
        for base in [r.clone(), invert(&r)] {
            for k in 0..base.len() {
                let mut rot = base[k..].to_vec();
                rot.extend_from_slice(&base[..k]);
                pieces.push(rot);
            }
        }
    }
    let mut w = w.to_vec();
    free_reduce(&mut w);
    'outer: loop {
        for rel in &pieces {
            let len = rel.len();
            for k in (len / 2 + 1..=len).rev() {
                let piece = &rel[..k];
                if let Some(pos) = w.windows(k).position(|x| x == piece) {
                    let mut nw = w[..pos].to_vec();
                    nw.extend(invert(&rel[k..]));
                    nw.extend_from_slice(&w[pos + k..]);
                    free_reduce(&mut nw);
                    w = nw;
                    continue 'outer;
                }
            }
        }
        return w;
    }
}

/// Every relator is a commutator of two generators and every pair
/// commutes: the group is free abelian.
fn is_free_abelian(g: &GroupPresentation) -> bool {
    let n = g.generators.len();
    let mut pairs = std::collections::BTreeSet::new();
    for r in g.relators() {
        let Some(l) = to_letters(g, &r) else { return false };
        if l.len() != 4 {
            return false;
        }
        let (a, b) = (l[0], l[1]);
        let comm = a.0 != b.0 && l[2] == (a.0, -a.1) && l[3] == (b.0, -b.1);
        if !comm {
            return false;
        }
        pairs.insert((a.0.min(b.0), a.0.max(b.0)));
    }
    pairs.len() == n * n.saturating_sub(1) / 2
}

/// Decides `w = e` in `g` when possible.
pub fn word_is_identity(g: &GroupPresentation, w: &Word, ctx: &GroupContext) -> Option<bool> {
    if w.is_identity() {
        return Some(true);
    }
    let letters = to_letters(g, w)?;
    if dehn_reduce(g, &letters).is_empty() {
        return Some(true);
    }
    if g.relators().is_empty() {
        return Some(false);
    }
    if is_free_abelian(g) {
        return Some(g.generators.iter().all(|x| w.exponent_sum(x) == 0));
    }
    let t = ctx.table(g)?;
    t.index_of(w).map(|i| i == t.identity())
}

/// `outer ∘ inner`.
pub fn hom_compose(outer: &Homomorphism, inner: &Homomorphism) -> Result<Homomorphism, GroupError> {
    if !inner.target.same_group(&outer.source) {
        return Err(GroupError::DomainMismatch(format!(
            "cannot compose {} after {}: {} is not {}",
            outer.name, inner.name, outer.source.name, inner.target.name
        )));
    }
    let images = inner.images.iter().map(|(g, w)| (g.clone(), outer.image(w))).collect();
    let mut h = Homomorphism::new(
        &format!("{}∘{}", outer.name, inner.name),
        inner.source.clone(),
        outer.target.clone(),
        images,
    )?;
    h.kind = match (outer.kind, inner.kind) {
        (HomKind::Eq, k) | (k, HomKind::Eq) => k,
        (HomKind::EStar, _) => HomKind::EStar,
        _ => HomKind::Derived,
    };
    Ok(h)
}

fn pair(kind: ProductKind, f: &Homomorphism, g: &Homomorphism) -> Result<Homomorphism, GroupError> {
    let target = GroupPresentation::product(kind, &f.target, &g.target);
    let tc = target.components.clone().expect("components");
    let op = if kind == ProductKind::Direct { "×" } else { "*" };
    let name = format!("{}{}{}", f.name, op, g.name);
    if kind == ProductKind::Direct && f.source.same_group(&g.source) {
        // pairing x ↦ (f x, g x)
        let images = f
            .source
            .generators
            .iter()
            .map(|x| (x.clone(), f.images[x].rename(&tc.left_names).mul(&g.images[x].rename(&tc.right_names))))
            .collect();
        let mut h = Homomorphism::new(&name, f.source.clone(), target, images)?;
        h.kind = HomKind::Derived;
        return Ok(h);
    }
    let source = GroupPresentation::product(kind, &f.source, &g.source);
    let sc = source.components.clone().expect("components");
    let mut images = BTreeMap::new();
    for (x, w) in &f.images {
        images.insert(sc.left_names[x].clone(), w.rename(&tc.left_names));
    }
    for (x, w) in &g.images {
        images.insert(sc.right_names[x].clone(), w.rename(&tc.right_names));
    }
    let mut h = Homomorphism::new(&name, source, target, images)?;
    h.kind = if f.kind == HomKind::Eq && g.kind == HomKind::Eq { HomKind::Eq } else { HomKind::Derived };
    Ok(h)
}

/// `f × g`: the pairing when both share a source, else the product map
/// `G1×G2 → H1×H2`.
pub fn hom_product(f: &Homomorphism, g: &Homomorphism) -> Result<Homomorphism, GroupError> {
    pair(ProductKind::Direct, f, g)
}

/// `f * g : G1*G2 → H1*H2`.
pub fn hom_free_product(f: &Homomorphism, g: &Homomorphism) -> Result<Homomorphism, GroupError> {
    pair(ProductKind::Free, f, g)
}

/// `f^n` for an endomorphism.
pub fn hom_power(f: &Homomorphism, n: u64) -> Result<Homomorphism, GroupError> {
    if !f.source.same_group(&f.target) {
        return Err(GroupError::DomainMismatch(format!("{} is not an endomorphism", f.name)));
    }
    if n == 1 || f.is_identity_map() {
        return Ok(f.clone());
    }
    let mut result = Homomorphism::new(
        "eq",
        f.source.clone(),
        f.source.clone(),
        f.source.generators.iter().map(|g| (g.clone(), Word::gen(g))).collect(),
    )?;
    result.kind = HomKind::Eq;
    let mut base = f.clone();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = hom_compose(&result, &base)?;
        }
        k >>= 1;
        if k > 0 {
            let sq = hom_compose(&base, &base)?;
            if sq.images == base.images {
                // idempotent from here on
                if result.images != base.images {
                    result = hom_compose(&result, &base)?;
                }
                break;
            }
            base = sq;
        }
    }
    result.name = format!("{}^{}", f.name, n);
    Ok(result)
}

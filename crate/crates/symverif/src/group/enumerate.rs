//! Coset enumeration over the trivial subgroup (HLT strategy with
//! coincidence processing), compacted into a multiplication table whose
//! elements carry shortlex-minimal words.

use super::{GroupError, GroupPresentation, Word};
use rand::{Rng, SeedableRng};

const NONE: u32 = u32::MAX;

/// Coset budget per allowed element; HLT may define many redundant cosets
/// before coincidences collapse them.
const COSET_FACTOR: usize = 16;
const MIN_COSETS: usize = 1 << 12;

struct CosetTable {
    cols: usize,
    rows: Vec<Vec<u32>>,
    parent: Vec<u32>,
    limit: usize,
}

struct Overflow;

impl CosetTable {
    fn new(cols: usize, limit: usize) -> Self {
        CosetTable { cols, rows: vec![vec![NONE; cols]], parent: vec![0], limit }
    }

    fn live(&self, c: usize) -> bool {
        self.parent[c] as usize == c
    }

    fn define(&mut self, c: usize, x: usize) -> Result<(), Overflow> {
        if self.rows.len() >= self.limit {
            return Err(Overflow);
        }
        let n = self.rows.len();
        self.rows.push(vec![NONE; self.cols]);
        self.parent.push(n as u32);
        self.rows[c][x] = n as u32;
        self.rows[n][x ^ 1] = c as u32;
        Ok(())
    }

    fn rep(&mut self, c: usize) -> usize {
        let mut r = c;
        while self.parent[r] as usize != r {
            r = self.parent[r] as usize;
        }
        let mut c = c;
        while self.parent[c] as usize != r {
            let next = self.parent[c] as usize;
            self.parent[c] = r as u32;
            c = next;
        }
        r
    }

    fn merge(&mut self, k: usize, l: usize, queue: &mut Vec<usize>) {
        let (k, l) = (self.rep(k), self.rep(l));
        if k == l {
            return;
        }
        let (k, l) = (k.min(l), k.max(l));
        self.parent[l] = k as u32;
        queue.push(l);
    }

    fn coincidence(&mut self, a: usize, b: usize) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut i = 0;
        while i < queue.len() {
            let e = queue[i];
            i += 1;
            for x in 0..self.cols {
                let f = self.rows[e][x];
                if f == NONE {
                    continue;
                }
                let f = f as usize;
                self.rows[f][x ^ 1] = NONE;
                let e1 = self.rep(e);
                let f1 = self.rep(f);
                if self.rows[e1][x] != NONE {
                    let t = self.rows[e1][x] as usize;
                    self.merge(f1, t, &mut queue);
                } else if self.rows[f1][x ^ 1] != NONE {
                    let t = self.rows[f1][x ^ 1] as usize;
                    self.merge(e1, t, &mut queue);
                } else {
                    self.rows[e1][x] = f1 as u32;
                    self.rows[f1][x ^ 1] = e1 as u32;
                }
            }
        }
    }

    fn scan_and_fill(&mut self, c: usize, w: &[usize]) -> Result<(), Overflow> {
        let (mut f, mut b) = (c, c);
        let (mut i, mut j) = (0usize, w.len());
        loop {
            while i < j && self.rows[f][w[i]] != NONE {
                f = self.rows[f][w[i]] as usize;
                i += 1;
            }
            if i == j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j > i && self.rows[b][w[j - 1] ^ 1] != NONE {
                b = self.rows[b][w[j - 1] ^ 1] as usize;
                j -= 1;
            }
            if i == j {
                self.coincidence(f, b);
                return Ok(());
            }
            if i + 1 == j {
                // deduction
                self.rows[f][w[i]] = b as u32;
                self.rows[b][w[i] ^ 1] = f as u32;
                return Ok(());
            }
            self.define(f, w[i])?;
        }
    }
}

/// Multiplication table of a finite group. Element 0 is the identity and
/// elements are listed in shortlex order of their words.
#[derive(Clone, Debug)]
pub struct FiniteGroupTable {
    pub generators: Vec<String>,
    elements: Vec<Word>,
    /// right action of letters: column `2i` is generator `i`, `2i+1` its inverse
    letters: Vec<Vec<u32>>,
    mult: Vec<u32>,
    inv: Vec<u32>,
}

fn letter_columns(g: &GroupPresentation, w: &Word) -> Vec<usize> {
    w.letters()
        .into_iter()
        .map(|(x, e)| {
            let i = g.generators.iter().position(|y| y == x).expect("declared generator");
            2 * i + usize::from(e < 0)
        })
        .collect()
}

/// Enumerates the elements of `g`, failing when it has more than
/// `max_elems` elements or the coset budget runs out.
pub fn enumerate(g: &GroupPresentation, max_elems: usize) -> Result<FiniteGroupTable, GroupError> {
    let exceeded = || GroupError::BoundExceeded { group: g.name.clone(), bound: max_elems };
    if max_elems == 0 {
        return Err(exceeded());
    }
    let cols = 2 * g.generators.len();
    let relators: Vec<Vec<usize>> = g.relators().iter().map(|r| letter_columns(g, r)).collect();
    let limit = (max_elems * COSET_FACTOR).max(MIN_COSETS);
    let mut t = CosetTable::new(cols, limit);
    let mut c = 0;
    while c < t.rows.len() {
        for r in &relators {
            if !t.live(c) {
                break;
            }
            t.scan_and_fill(c, r).map_err(|_| exceeded())?;
        }
        if t.live(c) {
            for x in 0..cols {
                if t.rows[c][x] == NONE {
                    t.define(c, x).map_err(|_| exceeded())?;
                }
            }
        }
        c += 1;
    }
    // breadth-first renumbering from the identity coset gives shortlex words
    let start = t.rep(0);
    let mut index = vec![NONE; t.rows.len()];
    let mut order = vec![start];
    let mut parent: Vec<(u32, usize)> = vec![(NONE, 0)];
    index[start] = 0;
    let mut k = 0;
    while k < order.len() {
        let cur = order[k];
        for x in 0..cols {
            let n = t.rows[cur][x] as usize;
            let n = t.rep(n);
            if index[n] == NONE {
                index[n] = order.len() as u32;
                order.push(n);
                parent.push((k as u32, x));
                if order.len() > max_elems {
                    return Err(exceeded());
                }
            }
        }
        k += 1;
    }
    let n = order.len();
    let mut letters = vec![vec![0u32; cols]; n];
    for (i, &c) in order.iter().enumerate() {
        for x in 0..cols {
            let d = t.rows[c][x] as usize;
            letters[i][x] = index[t.rep(d)];
        }
    }
    let mut elements = vec![Word::identity(); n];
    for i in 1..n {
        let (p, x) = parent[i];
        let gname = &g.generators[x / 2];
        elements[i] = elements[p as usize].mul(&Word::power(gname, if x % 2 == 0 { 1 } else { -1 }));
    }
    // i * w_j = walk w_j from i, built along the spanning tree
    let mut mult = vec![0u32; n * n];
    for i in 0..n {
        mult[i * n] = i as u32;
        for j in 1..n {
            let (p, x) = parent[j];
            let prev = mult[i * n + p as usize] as usize;
            mult[i * n + j] = letters[prev][x];
        }
    }
    let inv = (0..n)
        .map(|i| (0..n).find(|&j| mult[i * n + j] == 0).expect("group elements are invertible") as u32)
        .collect();
    Ok(FiniteGroupTable { generators: g.generators.clone(), elements, letters, mult, inv })
}

impl FiniteGroupTable {
    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a * self.size() + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn word(&self, a: usize) -> &Word {
        &self.elements[a]
    }

    pub fn elements(&self) -> &[Word] {
        &self.elements
    }

    /// Index of the element denoted by a word over the table's generators.
    pub fn index_of(&self, w: &Word) -> Option<usize> {
        let mut cur = 0usize;
        for (g, e) in w.letters() {
            let i = self.generators.iter().position(|x| x == g)?;
            cur = self.letters[cur][2 * i + usize::from(e < 0)] as usize;
        }
        Some(cur)
    }

    /// Index of a generator (or its inverse when `sign < 0`).
    pub fn generator(&self, i: usize, sign: i64) -> usize {
        self.letters[0][2 * i + usize::from(sign < 0)] as usize
    }

    pub fn order(&self, a: usize) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Associativity on all triples when the group has at most
    /// `exhaustive_up_to` elements, otherwise on `samples` random triples.
    pub fn check_associativity(&self, exhaustive_up_to: usize, samples: usize, seed: u64) -> bool {
        let n = self.size();
        let assoc = |a: usize, b: usize, c: usize| self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c));
        if n <= exhaustive_up_to {
            (0..n).all(|a| (0..n).all(|b| (0..n).all(|c| assoc(a, b, c))))
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..samples).all(|_| assoc(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)))
        }
    }

    /// Unit and inverse laws on every element.
    pub fn check_unit_and_inverse(&self) -> bool {
        (0..self.size()).all(|a| {
            self.mul(0, a) == a && self.mul(a, 0) == a && self.mul(a, self.inv(a)) == 0 && self.mul(self.inv(a), a) == 0
        })
    }
}

//! SMARTS subset: atom primitives, logical operators, and bond queries.
//! Recursive SMARTS, component grouping and disconnected patterns are
//! rejected with [`SmartsError::Unsupported`].

use thiserror::Error;

use super::element::Element;
use super::molecule::{BondOrder, Molecule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmartsError {
    #[error("SMARTS syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unsupported SMARTS feature at offset {pos}: {feature}")]
    Unsupported { pos: usize, feature: String },
}

fn syntax(pos: usize, msg: impl Into<String>) -> SmartsError {
    SmartsError::Syntax { pos, msg: msg.into() }
}

fn unsupported(pos: usize, feature: impl Into<String>) -> SmartsError {
    SmartsError::Unsupported { pos, feature: feature.into() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomPrimitive {
    /// Element with required aromaticity (`C`, `c`); `None` accepts either (`#6`).
    Element(Element, Option<bool>),
    Aromatic,
    Aliphatic,
    Any,
    /// Total hydrogen count (`H<n>`).
    HCount(u8),
    /// Explicit connections (`D<n>`).
    Degree(u8),
    /// Total connections including hydrogens (`X<n>`).
    Connectivity(u8),
    /// Total bond-order valence including hydrogens (`v<n>`).
    Valence(u8),
    Charge(i8),
    /// `R` alone: in any ring. `R<n>`: member of exactly n SSSR rings.
    InRing,
    RingCount(u8),
    /// `r<n>`: smallest ring size.
    RingSize(u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomExpr {
    Prim(AtomPrimitive),
    Not(Box<AtomExpr>),
    And(Vec<AtomExpr>),
    Or(Vec<AtomExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondPrimitive {
    Single,
    Double,
    Triple,
    Aromatic,
    Any,
    Ring,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BondExpr {
    /// No bond symbol: single or aromatic.
    Implicit,
    Prim(BondPrimitive),
    Not(Box<BondExpr>),
    And(Vec<BondExpr>),
    Or(Vec<BondExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryBond {
    pub a: usize,
    pub b: usize,
    pub expr: BondExpr,
}

/// A connected substructure query parsed from SMARTS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryPattern {
    pub atoms: Vec<AtomExpr>,
    pub bonds: Vec<QueryBond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    source: String,
}

impl QueryPattern {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Cheap prefilter: `counts[z]` holds how many atoms of atomic number
    /// `z` (mod 128) a molecule has; false means no match is possible.
    pub fn required_elements_present(&self, counts: &[u16; 128]) -> bool {
        let mut need = [0u16; 128];
        for e in self.atoms.iter().filter_map(pinned_element) {
            let z = e.atomic_number() as usize & 127;
            need[z] += 1;
            if need[z] > counts[z] {
                return false;
            }
        }
        true
    }
}

fn pinned_element(expr: &AtomExpr) -> Option<Element> {
    match expr {
        AtomExpr::Prim(AtomPrimitive::Element(e, _)) => Some(*e),
        AtomExpr::And(items) => items.iter().find_map(pinned_element),
        AtomExpr::Or(items) => {
            let first = pinned_element(items.first()?)?;
            items.iter().all(|i| pinned_element(i) == Some(first)).then_some(first)
        }
        _ => None,
    }
}

impl AtomPrimitive {
    fn matches(&self, mol: &Molecule, i: usize) -> bool {
        let atom = mol.atom(i);
        match *self {
            AtomPrimitive::Element(e, aro) => {
                atom.element == e && aro.is_none_or(|a| a == atom.aromatic)
            }
            AtomPrimitive::Aromatic => atom.aromatic,
            AtomPrimitive::Aliphatic => !atom.aromatic,
            AtomPrimitive::Any => true,
            AtomPrimitive::HCount(n) => mol.total_h(i) == n,
            AtomPrimitive::Degree(n) => mol.degree(i) == n as usize,
            AtomPrimitive::Connectivity(n) => {
                mol.degree(i) + atom.explicit_h as usize == n as usize
            }
            AtomPrimitive::Valence(n) => mol.total_valence(i) + aromatic_extra(mol, i) == n as u32,
            AtomPrimitive::Charge(c) => atom.formal_charge == c,
            AtomPrimitive::InRing => atom.in_ring,
            AtomPrimitive::RingCount(n) => mol.ring_count_of(i) == n as usize,
            AtomPrimitive::RingSize(n) => mol.smallest_ring_size_of(i) == Some(n as usize),
        }
    }
}

// `total_valence` counts aromatic bonds as 1; add the pi contribution back
// for atoms that can take it (pyridine n: 3, pyrrole [nH]: 3, benzene c: 4).
fn aromatic_extra(mol: &Molecule, i: usize) -> u32 {
    let atom = mol.atom(i);
    if !atom.aromatic || ![Element::B, Element::C, Element::N, Element::P].contains(&atom.element) {
        return 0;
    }
    let max = atom.element.default_valences().and_then(|v| v.last().copied()).unwrap_or(0) as u32;
    u32::from(mol.total_valence(i) < max)
}

impl AtomExpr {
    pub fn matches(&self, mol: &Molecule, i: usize) -> bool {
        match self {
            AtomExpr::Prim(p) => p.matches(mol, i),
            AtomExpr::Not(e) => !e.matches(mol, i),
            AtomExpr::And(items) => items.iter().all(|e| e.matches(mol, i)),
            AtomExpr::Or(items) => items.iter().any(|e| e.matches(mol, i)),
        }
    }
}

impl BondExpr {
    pub fn matches(&self, mol: &Molecule, bond: usize) -> bool {
        let b = mol.bond(bond);
        match self {
            BondExpr::Implicit => matches!(b.order, BondOrder::Single | BondOrder::Aromatic),
            BondExpr::Prim(p) => match p {
                BondPrimitive::Single => b.order == BondOrder::Single,
                BondPrimitive::Double => b.order == BondOrder::Double,
                BondPrimitive::Triple => b.order == BondOrder::Triple,
                BondPrimitive::Aromatic => b.order == BondOrder::Aromatic,
                BondPrimitive::Any => true,
                BondPrimitive::Ring => b.in_ring,
            },
            BondExpr::Not(e) => !e.matches(mol, bond),
            BondExpr::And(items) => items.iter().all(|e| e.matches(mol, bond)),
            BondExpr::Or(items) => items.iter().any(|e| e.matches(mol, bond)),
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

/// Parses a SMARTS pattern within the supported subset.
pub fn parse_smarts(text: &str) -> Result<QueryPattern, SmartsError> {
    let mut p = Parser { text, bytes: text.as_bytes(), pos: 0 };
    let mut atoms: Vec<AtomExpr> = Vec::new();
    let mut bonds: Vec<QueryBond> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut branches: Vec<usize> = Vec::new();
    let mut pending: Option<BondExpr> = None;
    let mut rings: std::collections::HashMap<u32, (usize, Option<BondExpr>, usize)> =
        std::collections::HashMap::new();

    if text.is_empty() {
        return Err(syntax(0, "empty SMARTS"));
    }
    while let Some(c) = p.peek() {
        match c {
            b'(' => {
                let Some(atom) = prev else {
                    return Err(unsupported(p.pos, "component-level grouping"));
                };
                if pending.is_some() {
                    return Err(syntax(p.pos, "bond symbol before branch"));
                }
                branches.push(atom);
                p.pos += 1;
            }
            b')' => {
                prev = Some(branches.pop().ok_or_else(|| syntax(p.pos, "unbalanced ')'"))?);
                if pending.is_some() {
                    return Err(syntax(p.pos, "dangling bond symbol"));
                }
                p.pos += 1;
            }
            b'.' => return Err(unsupported(p.pos, "disconnected pattern '.'")),
            b'>' => return Err(unsupported(p.pos, "reaction SMARTS")),
            b'0'..=b'9' | b'%' => {
                let start = p.pos;
                let current = prev.ok_or_else(|| syntax(start, "ring bond without atom"))?;
                let digit = if c == b'%' {
                    p.pos += 1;
                    let d = p
                        .text
                        .get(p.pos..p.pos + 2)
                        .and_then(|s| s.parse::<u32>().ok())
                        .ok_or_else(|| syntax(start, "'%' needs two digits"))?;
                    p.pos += 2;
                    d
                } else {
                    p.pos += 1;
                    (c - b'0') as u32
                };
                let sym = pending.take();
                match rings.remove(&digit) {
                    Some((open, osym, _)) => {
                        if open == current {
                            return Err(syntax(start, "ring bond to itself"));
                        }
                        let expr = osym.or(sym).unwrap_or(BondExpr::Implicit);
                        bonds.push(QueryBond { a: open, b: current, expr });
                    }
                    None => {
                        rings.insert(digit, (current, sym, start));
                    }
                }
            }
            b'[' => {
                let atom = p.bracket_atom()?;
                attach(&mut atoms, &mut bonds, &mut prev, &mut pending, atom);
            }
            _ => {
                if let Some(expr) = p.try_bond_expr()? {
                    if prev.is_none() {
                        return Err(syntax(p.pos, "bond without preceding atom"));
                    }
                    if pending.is_some() {
                        return Err(syntax(p.pos, "consecutive bond expressions"));
                    }
                    pending = Some(expr);
                    continue;
                }
                let atom = p.bare_atom()?;
                attach(&mut atoms, &mut bonds, &mut prev, &mut pending, atom);
            }
        }
    }
    if !branches.is_empty() {
        return Err(syntax(p.pos, "unclosed branch"));
    }
    if let Some((_, _, pos)) = rings.values().min_by_key(|r| r.2) {
        return Err(syntax(*pos, "unclosed ring bond"));
    }
    if pending.is_some() {
        return Err(syntax(p.pos, "dangling bond symbol"));
    }
    let mut adjacency = vec![Vec::new(); atoms.len()];
    for (i, b) in bonds.iter().enumerate() {
        if adjacency[b.a].iter().any(|&(j, _)| j == b.b) {
            return Err(syntax(0, "parallel bonds in pattern"));
        }
        adjacency[b.a].push((b.b, i));
        adjacency[b.b].push((b.a, i));
    }
    Ok(QueryPattern { atoms, bonds, adjacency, source: text.to_string() })
}

fn attach(
    atoms: &mut Vec<AtomExpr>,
    bonds: &mut Vec<QueryBond>,
    prev: &mut Option<usize>,
    pending: &mut Option<BondExpr>,
    atom: AtomExpr,
) {
    let idx = atoms.len();
    atoms.push(atom);
    if let Some(p) = *prev {
        bonds.push(QueryBond { a: p, b: idx, expr: pending.take().unwrap_or(BondExpr::Implicit) });
    }
    *prev = Some(idx);
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.text[start..self.pos].parse().ok()).flatten()
    }

    fn bare_atom(&mut self) -> Result<AtomExpr, SmartsError> {
        let start = self.pos;
        let rest = &self.text[self.pos..];
        let (prim, len) = if rest.starts_with("Cl") {
            (AtomPrimitive::Element(Element::CL, Some(false)), 2)
        } else if rest.starts_with("Br") {
            (AtomPrimitive::Element(Element::BR, Some(false)), 2)
        } else {
            let c = rest.chars().next().unwrap_or(' ');
            let prim = match c {
                '*' => AtomPrimitive::Any,
                'a' => AtomPrimitive::Aromatic,
                'A' => AtomPrimitive::Aliphatic,
                'B' | 'C' | 'N' | 'O' | 'P' | 'S' | 'F' | 'I' => AtomPrimitive::Element(
                    Element::from_symbol(&c.to_string()).expect("organic symbol"),
                    Some(false),
                ),
                'b' | 'c' | 'n' | 'o' | 'p' | 's' => AtomPrimitive::Element(
                    Element::from_symbol(&c.to_ascii_uppercase().to_string()).expect("organic"),
                    Some(true),
                ),
                _ => return Err(syntax(start, format!("unexpected character '{c}'"))),
            };
            (prim, 1)
        };
        self.pos += len;
        Ok(AtomExpr::Prim(prim))
    }

    fn bracket_atom(&mut self) -> Result<AtomExpr, SmartsError> {
        let open = self.pos;
        self.pos += 1;
        let close = self.text[self.pos..]
            .find(']')
            .map(|i| self.pos + i)
            .ok_or_else(|| syntax(open, "unclosed bracket"))?;
        let inner = &self.text[self.pos..close];
        if inner.contains("$(") {
            return Err(unsupported(self.pos, "recursive SMARTS"));
        }
        if inner.contains('[') {
            return Err(syntax(open, "nested '['"));
        }
        let end = close;
        let expr = self.low_and(end)?;
        if self.pos != end {
            return Err(syntax(self.pos, "unexpected content in bracket atom"));
        }
        self.pos = end + 1;
        Ok(expr)
    }

    // precedence (lowest first): ';'  ','  '&'/implicit  '!'
    fn low_and(&mut self, end: usize) -> Result<AtomExpr, SmartsError> {
        let mut items = vec![self.or(end)?];
        while self.pos < end && self.peek() == Some(b';') {
            self.pos += 1;
            items.push(self.or(end)?);
        }
        Ok(collapse(items, AtomExpr::And))
    }

    fn or(&mut self, end: usize) -> Result<AtomExpr, SmartsError> {
        let mut items = vec![self.high_and(end)?];
        while self.pos < end && self.peek() == Some(b',') {
            self.pos += 1;
            items.push(self.high_and(end)?);
        }
        Ok(collapse(items, AtomExpr::Or))
    }

    fn high_and(&mut self, end: usize) -> Result<AtomExpr, SmartsError> {
        let mut items = vec![self.unary(end)?];
        loop {
            if self.pos >= end {
                break;
            }
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                    items.push(self.unary(end)?);
                }
                Some(b';') | Some(b',') => break,
                Some(b':') => {
                    // atom-map class: accepted and ignored
                    self.pos += 1;
                    self.number().ok_or_else(|| syntax(self.pos, "missing map number"))?;
                }
                Some(_) => items.push(self.unary(end)?),
                None => break,
            }
        }
        Ok(collapse(items, AtomExpr::And))
    }

    fn unary(&mut self, end: usize) -> Result<AtomExpr, SmartsError> {
        if self.pos >= end {
            return Err(syntax(self.pos, "expected atom primitive"));
        }
        if self.peek() == Some(b'!') {
            self.pos += 1;
            return Ok(AtomExpr::Not(Box::new(self.unary(end)?)));
        }
        self.primitive(end)
    }

    fn primitive(&mut self, end: usize) -> Result<AtomExpr, SmartsError> {
        let start = self.pos;
        let c = self.peek().ok_or_else(|| syntax(start, "expected primitive"))?;
        let prim = match c {
            b'*' => {
                self.pos += 1;
                AtomPrimitive::Any
            }
            b'#' => {
                self.pos += 1;
                let z = self.number().ok_or_else(|| syntax(start, "expected atomic number"))?;
                let e = u8::try_from(z)
                    .ok()
                    .and_then(Element::from_atomic_number)
                    .ok_or_else(|| syntax(start, "bad atomic number"))?;
                AtomPrimitive::Element(e, None)
            }
            b'@' => {
                // stereo is parsed but never constrains a match
                self.pos += 1;
                if self.peek() == Some(b'@') {
                    self.pos += 1;
                }
                if self.peek() == Some(b'?') {
                    self.pos += 1;
                }
                return Ok(AtomExpr::Prim(AtomPrimitive::Any));
            }
            b'+' | b'-' => {
                self.pos += 1;
                let unit: i32 = if c == b'+' { 1 } else { -1 };
                let charge = if let Some(n) = self.number() {
                    unit * n as i32
                } else {
                    let mut ch = unit;
                    while self.peek() == Some(c) {
                        self.pos += 1;
                        ch += unit;
                    }
                    ch
                };
                AtomPrimitive::Charge(charge as i8)
            }
            b'H' => {
                self.pos += 1;
                // `[H]`, `[H+]`: the hydrogen element when H leads the atom
                let leads = self.bytes.get(start.wrapping_sub(1)) == Some(&b'[');
                let n = self.number();
                if leads && n.is_none() && matches!(self.peek(), Some(b']' | b'+' | b'-')) {
                    AtomPrimitive::Element(Element::H, None)
                } else {
                    AtomPrimitive::HCount(n.unwrap_or(1) as u8)
                }
            }
            b'D' | b'X' | b'v' | b'r' | b'R' | b'h' | b'x' => {
                self.pos += 1;
                let n = self.number();
                match c {
                    b'D' => AtomPrimitive::Degree(n.unwrap_or(1) as u8),
                    b'X' => AtomPrimitive::Connectivity(n.unwrap_or(1) as u8),
                    b'v' => AtomPrimitive::Valence(n.unwrap_or(1) as u8),
                    b'R' => match n {
                        None => AtomPrimitive::InRing,
                        Some(0) => return Ok(AtomExpr::Not(Box::new(AtomExpr::Prim(AtomPrimitive::InRing)))),
                        Some(k) => AtomPrimitive::RingCount(k as u8),
                    },
                    b'r' => match n {
                        None => AtomPrimitive::InRing,
                        Some(0) => return Ok(AtomExpr::Not(Box::new(AtomExpr::Prim(AtomPrimitive::InRing)))),
                        Some(k) => AtomPrimitive::RingSize(k as u8),
                    },
                    b'h' => return Err(unsupported(start, "implicit hydrogen count 'h'")),
                    _ => return Err(unsupported(start, "ring connectivity 'x'")),
                }
            }
            b'a' if !self.text[self.pos..end].starts_with("as") => {
                self.pos += 1;
                AtomPrimitive::Aromatic
            }
            b'A' if !self.text[self.pos..end]
                .get(..2)
                .is_some_and(|s| Element::from_symbol(s).is_some()) =>
            {
                self.pos += 1;
                AtomPrimitive::Aliphatic
            }
            b'$' => return Err(unsupported(start, "recursive SMARTS")),
            _ if c.is_ascii_lowercase() => {
                let rest = &self.text[self.pos..end];
                let (sym, len) = ["se", "as", "te"]
                    .iter()
                    .find(|t| rest.starts_with(**t))
                    .map(|t| (t.to_string(), 2))
                    .unwrap_or_else(|| ((c as char).to_string(), 1));
                let mut upper = sym[..1].to_uppercase();
                upper.push_str(&sym[1..]);
                let e = Element::from_symbol(&upper)
                    .filter(|e| e.can_be_aromatic())
                    .ok_or_else(|| syntax(start, format!("unknown aromatic symbol '{sym}'")))?;
                self.pos += len;
                AtomPrimitive::Element(e, Some(true))
            }
            _ if c.is_ascii_uppercase() => {
                let rest = &self.text[self.pos..end];
                let two = rest.get(..2).filter(|s| s.as_bytes()[1].is_ascii_lowercase());
                let (e, len) = match two.and_then(Element::from_symbol) {
                    Some(e) => (e, 2),
                    None => (
                        Element::from_symbol(&rest[..1])
                            .ok_or_else(|| syntax(start, "unknown element"))?,
                        1,
                    ),
                };
                self.pos += len;
                AtomPrimitive::Element(e, Some(false))
            }
            _ if c.is_ascii_digit() => {
                // isotope: accepted and ignored
                self.number();
                return Ok(AtomExpr::Prim(AtomPrimitive::Any));
            }
            _ => return Err(syntax(start, format!("unexpected '{}'", c as char))),
        };
        Ok(AtomExpr::Prim(prim))
    }

    /// Parses a bond expression if one starts here.
    fn try_bond_expr(&mut self) -> Result<Option<BondExpr>, SmartsError> {
        let start = self.pos;
        let is_bond_char = |c: u8| matches!(c, b'-' | b'=' | b'#' | b':' | b'~' | b'@' | b'!' | b'/' | b'\\');
        if !self.peek().is_some_and(is_bond_char) {
            return Ok(None);
        }
        let mut end = self.pos;
        while self.bytes.get(end).is_some_and(|&c| is_bond_char(c) || matches!(c, b'&' | b',' | b';')) {
            end += 1;
        }
        let expr = self.bond_low(end)?;
        if self.pos != end {
            return Err(syntax(start, "malformed bond expression"));
        }
        Ok(Some(expr))
    }

    fn bond_low(&mut self, end: usize) -> Result<BondExpr, SmartsError> {
        let mut items = vec![self.bond_or(end)?];
        while self.pos < end && self.peek() == Some(b';') {
            self.pos += 1;
            items.push(self.bond_or(end)?);
        }
        Ok(collapse(items, BondExpr::And))
    }

    fn bond_or(&mut self, end: usize) -> Result<BondExpr, SmartsError> {
        let mut items = vec![self.bond_and(end)?];
        while self.pos < end && self.peek() == Some(b',') {
            self.pos += 1;
            items.push(self.bond_and(end)?);
        }
        Ok(collapse(items, BondExpr::Or))
    }

    fn bond_and(&mut self, end: usize) -> Result<BondExpr, SmartsError> {
        let mut items = vec![self.bond_unary(end)?];
        while self.pos < end && !matches!(self.peek(), Some(b';' | b',')) {
            if self.peek() == Some(b'&') {
                self.pos += 1;
            }
            items.push(self.bond_unary(end)?);
        }
        Ok(collapse(items, BondExpr::And))
    }

    fn bond_unary(&mut self, end: usize) -> Result<BondExpr, SmartsError> {
        let start = self.pos;
        if self.pos >= end {
            return Err(syntax(start, "expected bond primitive"));
        }
        let c = self.bytes[self.pos];
        self.pos += 1;
        Ok(match c {
            b'!' => BondExpr::Not(Box::new(self.bond_unary(end)?)),
            b'-' | b'/' | b'\\' => BondExpr::Prim(BondPrimitive::Single),
            b'=' => BondExpr::Prim(BondPrimitive::Double),
            b'#' => BondExpr::Prim(BondPrimitive::Triple),
            b':' => BondExpr::Prim(BondPrimitive::Aromatic),
            b'~' => BondExpr::Prim(BondPrimitive::Any),
            b'@' => BondExpr::Prim(BondPrimitive::Ring),
            _ => return Err(syntax(start, "expected bond primitive")),
        })
    }
}

fn collapse<T>(mut items: Vec<T>, wrap: impl FnOnce(Vec<T>) -> T) -> T {
    if items.len() == 1 {
        items.pop().expect("one item")
    } else {
        wrap(items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hydroxyl() {
        let q = parse_smarts("[OH]").unwrap();
        assert_eq!(q.atom_count(), 1);
        assert_eq!(
            q.atoms[0],
            AtomExpr::And(vec![
                AtomExpr::Prim(AtomPrimitive::Element(Element::O, Some(false))),
                AtomExpr::Prim(AtomPrimitive::HCount(1)),
            ])
        );
    }

    #[test]
    fn carboxylic_acid() {
        let q = parse_smarts("C(=O)[OH]").unwrap();
        assert_eq!(q.atom_count(), 3);
        assert_eq!(q.bonds.len(), 2);
        assert_eq!(q.bonds[0].expr, BondExpr::Prim(BondPrimitive::Double));
        assert_eq!(q.bonds[1].expr, BondExpr::Implicit);
    }

    #[test]
    fn recursive_is_rejected() {
        assert!(matches!(parse_smarts("[$(CC)]"), Err(SmartsError::Unsupported { .. })));
        assert!(matches!(parse_smarts("C.C"), Err(SmartsError::Unsupported { .. })));
        assert!(matches!(parse_smarts("(C).(C)"), Err(SmartsError::Unsupported { .. })));
    }

    #[test]
    fn logical_operators() {
        let q = parse_smarts("[C,N;!R;+0]").unwrap();
        match &q.atoms[0] {
            AtomExpr::And(items) => {
                assert_eq!(items.len(), 3);
                assert!(matches!(items[0], AtomExpr::Or(_)));
                assert!(matches!(items[1], AtomExpr::Not(_)));
            }
            other => panic!("{other:?}"),
        }
        let q = parse_smarts("[#6X4]~[!#1]").unwrap();
        assert_eq!(q.bonds[0].expr, BondExpr::Prim(BondPrimitive::Any));
        let q = parse_smarts("C-,=C").unwrap();
        assert!(matches!(q.bonds[0].expr, BondExpr::Or(_)));
        let q = parse_smarts("[c;r6]!@[N;D2]").unwrap();
        assert!(matches!(q.bonds[0].expr, BondExpr::Not(_)));
    }

    #[test]
    fn element_symbols_in_brackets() {
        let q = parse_smarts("[Cl,Br,I]").unwrap();
        assert!(matches!(&q.atoms[0], AtomExpr::Or(v) if v.len() == 3));
        let q = parse_smarts("[Si]").unwrap();
        assert_eq!(q.atoms[0], AtomExpr::Prim(AtomPrimitive::Element(Element::from_symbol("Si").unwrap(), Some(false))));
        let q = parse_smarts("[H]").unwrap();
        assert_eq!(q.atoms[0], AtomExpr::Prim(AtomPrimitive::Element(Element::H, None)));
        assert!(parse_smarts("[N+](=O)[O-]").is_ok());
        assert!(parse_smarts("[Xq]").is_err());
        assert!(parse_smarts("C(").is_err());
    }

    #[test]
    fn ring_closures() {
        let q = parse_smarts("c1ccccc1").unwrap();
        assert_eq!(q.bonds.len(), 6);
        let q = parse_smarts("C1OC1").unwrap();
        assert_eq!(q.bonds.len(), 3);
    }
}

//! SMILES reader.

use std::collections::HashMap;

use thiserror::Error;

use super::element::Element;
use super::molecule::{
    implicit_hydrogens, permutation_is_odd, Atom, Bond, BondOrder, BondStereo, Chirality,
    GraphError, Molecule,
};
use super::rings;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("valence error: atom {atom} ({element}) has bond order sum {valence}")]
    Valence { atom: usize, element: String, valence: u32 },
    #[error("invalid graph: {0}")]
    Graph(#[from] GraphError),
}

fn syntax(pos: usize, msg: impl Into<String>) -> SmilesError {
    SmilesError::Syntax { pos, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BondSym {
    Single,
    Double,
    Triple,
    Aromatic,
    Up,
    Down,
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Atom(usize),
    Hydrogen,
    Pending,
}

struct RawBond {
    a: usize,
    b: usize,
    sym: Option<BondSym>,
    /// Atom written before the bond symbol (for `/` and `\`).
    written_from: usize,
}

struct OpenRing {
    atom: usize,
    sym: Option<BondSym>,
    slot: usize,
    pos: usize,
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    bracket: Vec<bool>,
    slots: Vec<Vec<Slot>>,
    bonds: Vec<RawBond>,
    rings: HashMap<u32, OpenRing>,
    branches: Vec<(usize, usize)>,
    prev: Option<usize>,
    pending: Option<(BondSym, usize)>,
}

/// Parses a SMILES string into a [`Molecule`]. Atoms keep their input
/// order; implicit hydrogens are resolved to `explicit_h` counts.
pub fn parse_smiles(text: &str) -> Result<Molecule, SmilesError> {
    if text.is_empty() {
        return Err(syntax(0, "empty SMILES"));
    }
    let mut parser = Parser {
        text,
        bytes: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bracket: Vec::new(),
        slots: Vec::new(),
        bonds: Vec::new(),
        rings: HashMap::new(),
        branches: Vec::new(),
        prev: None,
        pending: None,
    };
    parser.run()?;
    parser.finish()
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    let prev = self.prev.ok_or_else(|| syntax(self.pos, "branch without atom"))?;
                    if self.pending.is_some() {
                        return Err(syntax(self.pos, "bond symbol before branch"));
                    }
                    self.branches.push((prev, self.pos));
                    self.pos += 1;
                }
                b')' => {
                    let (atom, _) =
                        self.branches.pop().ok_or_else(|| syntax(self.pos, "unbalanced ')'"))?;
                    if self.pending.is_some() {
                        return Err(syntax(self.pos, "dangling bond symbol"));
                    }
                    if self.bytes.get(self.pos.wrapping_sub(1)) == Some(&b'(') {
                        return Err(syntax(self.pos, "empty branch"));
                    }
                    self.prev = Some(atom);
                    self.pos += 1;
                }
                b'.' => {
                    if self.pending.is_some() {
                        return Err(syntax(self.pos, "bond symbol before '.'"));
                    }
                    if !self.branches.is_empty() {
                        return Err(syntax(self.pos, "'.' inside branch"));
                    }
                    if self.prev.is_none() || self.pos + 1 == self.bytes.len() {
                        return Err(syntax(self.pos, "empty component"));
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.pending.is_some() {
                        return Err(syntax(self.pos, "consecutive bond symbols"));
                    }
                    if self.prev.is_none() {
                        return Err(syntax(self.pos, "bond symbol without preceding atom"));
                    }
                    let sym = match c {
                        b'-' => BondSym::Single,
                        b'=' => BondSym::Double,
                        b'#' => BondSym::Triple,
                        b':' => BondSym::Aromatic,
                        b'/' => BondSym::Up,
                        _ => BondSym::Down,
                    };
                    self.pending = Some((sym, self.pos));
                    self.pos += 1;
                }
                b'$' => return Err(syntax(self.pos, "quadruple bonds are not supported")),
                b'0'..=b'9' | b'%' => self.ring_bond()?,
                b'[' => self.bracket_atom()?,
                _ => self.organic_atom()?,
            }
        }
        Ok(())
    }

    fn add_atom(&mut self, atom: Atom, bracket: bool, h_slot: bool) {
        let idx = self.atoms.len();
        self.atoms.push(atom);
        self.bracket.push(bracket);
        let mut slots = Vec::new();
        if let Some(prev) = self.prev {
            let sym = self.pending.take().map(|(s, _)| s);
            self.bonds.push(RawBond { a: prev, b: idx, sym, written_from: prev });
            self.slots[prev].push(Slot::Atom(idx));
            slots.push(Slot::Atom(prev));
        }
        if h_slot {
            slots.push(Slot::Hydrogen);
        }
        self.slots.push(slots);
        self.prev = Some(idx);
    }

    fn organic_atom(&mut self) -> Result<(), SmilesError> {
        let start = self.pos;
        let rest = &self.text[self.pos..];
        let (element, aromatic, len) = if rest.starts_with("Cl") {
            (Element::CL, false, 2)
        } else if rest.starts_with("Br") {
            (Element::BR, false, 2)
        } else {
            let c = rest.chars().next().unwrap_or(' ');
            let (e, aro) = match c {
                'B' => (Element::B, false),
                'C' => (Element::C, false),
                'N' => (Element::N, false),
                'O' => (Element::O, false),
                'P' => (Element::P, false),
                'S' => (Element::S, false),
                'F' => (Element::F, false),
                'I' => (Element::I, false),
                'b' => (Element::B, true),
                'c' => (Element::C, true),
                'n' => (Element::N, true),
                'o' => (Element::O, true),
                'p' => (Element::P, true),
                's' => (Element::S, true),
                '*' => (Element::WILDCARD, false),
                _ => return Err(syntax(start, format!("unexpected character '{c}'"))),
            };
            (e, aro, c.len_utf8())
        };
        self.pos += len;
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        self.add_atom(atom, false, false);
        Ok(())
    }

    fn read_number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.text[start..self.pos].parse().ok()).flatten()
    }

    fn bracket_atom(&mut self) -> Result<(), SmilesError> {
        let open = self.pos;
        self.pos += 1;
        let close = self.text[self.pos..]
            .find(']')
            .map(|i| self.pos + i)
            .ok_or_else(|| syntax(open, "unclosed bracket atom"))?;
        if self.text[self.pos..close].contains('[') {
            return Err(syntax(open, "nested '[' in bracket atom"));
        }
        let isotope = self.read_number().unwrap_or(0);
        if isotope > u16::MAX as u32 {
            return Err(syntax(open, "isotope out of range"));
        }
        let sym_start = self.pos;
        let rest = &self.text[self.pos..close];
        let (element, aromatic, len) = bracket_symbol(rest)
            .ok_or_else(|| syntax(sym_start, format!("unknown element in '[{rest}]'")))?;
        self.pos += len;

        let mut chirality = Chirality::None;
        if self.peek() == Some(b'@') {
            self.pos += 1;
            chirality = Chirality::Ccw;
            if self.peek() == Some(b'@') {
                self.pos += 1;
                chirality = Chirality::Cw;
            } else if self.text[self.pos..close].starts_with("TH1") {
                self.pos += 3;
            } else if self.text[self.pos..close].starts_with("TH2") {
                self.pos += 3;
                chirality = Chirality::Cw;
            } else if ["TH", "AL", "SP", "TB", "OH"]
                .iter()
                .any(|c| self.text[self.pos..close].starts_with(c))
            {
                return Err(syntax(self.pos, "unsupported chirality class"));
            }
        }
        let mut hcount = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hcount = match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    self.pos += 1;
                    c - b'0'
                }
                _ => 1,
            };
        }
        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.read_number() {
                charge = unit * n as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += unit;
                }
            }
        }
        if !(-15..=15).contains(&charge) {
            return Err(syntax(open, "charge out of range"));
        }
        let mut map = 0;
        if self.peek() == Some(b':') {
            self.pos += 1;
            map = self.read_number().ok_or_else(|| syntax(self.pos, "missing atom-map number"))?;
        }
        if self.pos != close {
            return Err(syntax(self.pos, "unexpected content in bracket atom"));
        }
        self.pos = close + 1;

        let mut atom = Atom::new(element);
        atom.isotope = isotope as u16;
        atom.aromatic = aromatic;
        atom.explicit_h = hcount;
        atom.formal_charge = charge as i8;
        atom.map_number = map;
        atom.chirality = chirality;
        let h_slot = chirality != Chirality::None && hcount > 0;
        self.add_atom(atom, true, h_slot);
        Ok(())
    }

    fn ring_bond(&mut self) -> Result<(), SmilesError> {
        let start = self.pos;
        let current = self.prev.ok_or_else(|| syntax(start, "ring bond without atom"))?;
        let digit = if self.peek() == Some(b'%') {
            self.pos += 1;
            let d = self.text.get(self.pos..self.pos + 2).filter(|s| {
                s.bytes().all(|b| b.is_ascii_digit())
            });
            let d = d.ok_or_else(|| syntax(start, "'%' must be followed by two digits"))?;
            self.pos += 2;
            d.parse::<u32>().unwrap_or(0)
        } else {
            let d = (self.bytes[self.pos] - b'0') as u32;
            self.pos += 1;
            d
        };
        let sym = self.pending.take().map(|(s, _)| s);
        match self.rings.remove(&digit) {
            Some(open) => {
                if open.atom == current {
                    return Err(syntax(start, "ring bond to itself"));
                }
                let resolved = match (open.sym, sym) {
                    (Some(a), Some(b)) if !compatible(a, b) => {
                        return Err(syntax(start, "conflicting ring-closure bond symbols"))
                    }
                    (Some(a), _) => Some((a, open.atom)),
                    (None, Some(b)) => Some((b, current)),
                    (None, None) => None,
                };
                self.bonds.push(RawBond {
                    a: open.atom,
                    b: current,
                    sym: resolved.map(|(s, _)| s),
                    written_from: resolved.map_or(open.atom, |(_, from)| from),
                });
                self.slots[open.atom][open.slot] = Slot::Atom(current);
                self.slots[current].push(Slot::Atom(open.atom));
            }
            None => {
                let slot = self.slots[current].len();
                self.slots[current].push(Slot::Pending);
                self.rings.insert(digit, OpenRing { atom: current, sym, slot, pos: start });
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<Molecule, SmilesError> {
        if let Some((_, pos)) = self.branches.first() {
            return Err(syntax(*pos, "unclosed branch"));
        }
        if let Some(open) = self.rings.values().min_by_key(|r| r.pos) {
            return Err(syntax(open.pos, "unclosed ring bond"));
        }
        if let Some((_, pos)) = self.pending {
            return Err(syntax(pos, "dangling bond symbol"));
        }
        if self.atoms.is_empty() {
            return Err(syntax(0, "no atoms"));
        }
        let n = self.atoms.len();
        let edges: Vec<(usize, usize)> = self.bonds.iter().map(|b| (b.a, b.b)).collect();
        let cyclic = rings::cyclic_edges(n, &edges);

        let mut bonds: Vec<Bond> = Vec::with_capacity(self.bonds.len());
        for (i, raw) in self.bonds.iter().enumerate() {
            let both_aromatic = self.atoms[raw.a].aromatic && self.atoms[raw.b].aromatic;
            let order = match raw.sym {
                None if both_aromatic && cyclic[i] => BondOrder::Aromatic,
                None | Some(BondSym::Single | BondSym::Up | BondSym::Down) => BondOrder::Single,
                Some(BondSym::Double) => BondOrder::Double,
                Some(BondSym::Triple) => BondOrder::Triple,
                Some(BondSym::Aromatic) => BondOrder::Aromatic,
            };
            bonds.push(Bond::new(raw.a, raw.b, order));
        }

        // hydrogens and valence
        let mut bond_valence = vec![0u32; n];
        let mut aromatic_bonds = vec![0u32; n];
        for b in &bonds {
            for end in [b.a, b.b] {
                if b.order == BondOrder::Aromatic {
                    aromatic_bonds[end] += 1;
                } else {
                    bond_valence[end] += b.order.valence() as u32;
                }
            }
        }
        for i in 0..n {
            let atom = &mut self.atoms[i];
            let used = bond_valence[i] + aromatic_bonds[i];
            if !self.bracket[i] {
                if atom.element == Element::WILDCARD {
                    continue;
                }
                atom.explicit_h = implicit_hydrogens(
                    atom.element,
                    atom.aromatic,
                    bond_valence[i],
                    aromatic_bonds[i],
                )
                .ok_or_else(|| SmilesError::Valence {
                    atom: i,
                    element: atom.element.symbol().to_string(),
                    valence: used,
                })?;
            } else if atom.formal_charge == 0 && !atom.aromatic {
                if let Some(max) = atom.element.default_valences().and_then(|v| v.last()) {
                    let total = used + atom.explicit_h as u32;
                    if total > *max as u32 {
                        return Err(SmilesError::Valence {
                            atom: i,
                            element: atom.element.symbol().to_string(),
                            valence: total,
                        });
                    }
                }
            }
        }

        // tetrahedral parity relative to [H, ascending neighbor indices]
        for i in 0..n {
            if self.atoms[i].chirality == Chirality::None {
                continue;
            }
            let written: Vec<Option<usize>> = self.slots[i]
                .iter()
                .map(|s| match s {
                    Slot::Atom(a) => Some(*a),
                    _ => None,
                })
                .collect();
            let h_count = self.atoms[i].explicit_h;
            if h_count > 1 || written.len() < 3 {
                self.atoms[i].chirality = Chirality::None;
                continue;
            }
            let mut reference = written.clone();
            reference.sort_unstable(); // None (the hydrogen) sorts first
            let odd = permutation_is_odd(&written, &reference);
            self.atoms[i].chirality = self.atoms[i].chirality.flipped_if(odd);
        }

        // double-bond cis/trans from directional single bonds
        let directional: Vec<(usize, usize, i8)> = self
            .bonds
            .iter()
            .zip(&bonds)
            .filter_map(|(raw, b)| match (raw.sym, b.order) {
                (Some(BondSym::Up), BondOrder::Single) => Some((raw.written_from, b.other(raw.written_from), 1)),
                (Some(BondSym::Down), BondOrder::Single) => Some((raw.written_from, b.other(raw.written_from), -1)),
                _ => None,
            })
            .collect();
        if !directional.is_empty() {
            // d(u, x): +s when x is written before u, -s otherwise
            let side = |u: usize, exclude: usize| -> Option<(usize, i8)> {
                directional.iter().find_map(|&(from, to, s)| {
                    if to == u && from != exclude {
                        Some((from, s))
                    } else if from == u && to != exclude {
                        Some((to, -s))
                    } else {
                        None
                    }
                })
            };
            for bond in bonds.iter_mut() {
                if bond.order != BondOrder::Double {
                    continue;
                }
                if let (Some((x, dx)), Some((y, dy))) = (side(bond.a, bond.b), side(bond.b, bond.a))
                {
                    bond.stereo = Some(BondStereo { ref_a: x, ref_b: y, cis: dx == dy });
                }
            }
        }

        Ok(Molecule::from_parts(self.atoms, bonds, self.text)?)
    }
}

fn compatible(a: BondSym, b: BondSym) -> bool {
    a == b
        || matches!(
            (a, b),
            (BondSym::Up | BondSym::Down | BondSym::Single, BondSym::Up | BondSym::Down | BondSym::Single)
        )
}

fn bracket_symbol(rest: &str) -> Option<(Element, bool, usize)> {
    let mut chars = rest.chars();
    let first = chars.next()?;
    if first == '*' {
        return Some((Element::WILDCARD, false, 1));
    }
    if first.is_ascii_lowercase() {
        for two in ["se", "as", "te"] {
            if rest.starts_with(two) {
                let e = Element::from_symbol(&format!("{}{}", two[..1].to_uppercase(), &two[1..]))?;
                return Some((e, true, 2));
            }
        }
        let e = Element::from_symbol(&first.to_ascii_uppercase().to_string())?;
        return e.can_be_aromatic().then_some((e, true, 1));
    }
    if !first.is_ascii_uppercase() {
        return None;
    }
    if let Some(second) = chars.next().filter(|c| c.is_ascii_lowercase()) {
        if let Some(e) = Element::from_symbol(&format!("{first}{second}")) {
            return Some((e, false, 2));
        }
    }
    Element::from_symbol(&first.to_string()).map(|e| (e, false, 1))
}

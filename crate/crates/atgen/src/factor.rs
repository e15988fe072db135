//! Sum-of-products expressions over an idempotent semiring without
//! multiplicative identity, and a greedy factorisation heuristic.
//!
//! The carrier is a semigroup of atoms under a product that is either
//! commutative or not; sums are set unions, so addition is idempotent and
//! there is no subtraction. Division is weak: dividing `f` by `d` yields the
//! largest quotient `q` with `f = d·q + r` (left) or `f = q·d + r` (right).
//!
//! Factorisation builds the set `R` of all two-way splits of the cubes of
//! `f`, then greedily grows a divisor sum `X` and quotient sum `Y` by
//! maximal projection cardinality. The growth direction (divisor side vs
//! quotient side) is fixed by the first comparison; alternating sides can
//! produce products not covered by `f`, which an idempotent sum cannot
//! repair. Sub-expressions are factorised recursively and their factor
//! chains spliced in only when they factor completely.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FactorError {
    #[error("empty cube")]
    EmptyCube,
    #[error("empty expression")]
    EmptyExpression,
    #[error("mode mismatch between expressions")]
    ModeMismatch,
}

/// Whether the semigroup product commutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mode {
    Commutative,
    NonCommutative,
}

/// How commutative cubes are split into R-pairs: `Full` enumerates every
/// two-way multiset split, `Lex` only prefix/suffix splits of the sorted
/// atom list (an approximation that sidesteps the exponential pair count).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitStrategy {
    Full,
    Lex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivisionSide {
    Left,
    Right,
}

/// A product of atoms. Commutative cubes store their atoms sorted, so the
/// derived ordering and equality coincide with multiset semantics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cube<A: Ord + Clone>(Vec<A>);

impl<A: Ord + Clone> Cube<A> {
    fn new(mode: Mode, mut atoms: Vec<A>) -> Result<Self, FactorError> {
        if atoms.is_empty() {
            return Err(FactorError::EmptyCube);
        }
        if mode == Mode::Commutative {
            atoms.sort();
        }
        Ok(Cube(atoms))
    }

    pub fn atoms(&self) -> &[A] {
        &self.0
    }

    /// Number of atoms; never zero.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    fn mul(&self, other: &Self, mode: Mode) -> Self {
        let mut atoms = self.0.clone();
        atoms.extend(other.0.iter().cloned());
        if mode == Mode::Commutative {
            atoms.sort();
        }
        Cube(atoms)
    }

    /// Remove `sub` as a multiset from this cube, if contained.
    fn multiset_difference(&self, sub: &Self) -> Option<Vec<A>> {
        let mut rest = self.0.clone();
        for a in &sub.0 {
            let i = rest.iter().position(|b| b == a)?;
            rest.remove(i);
        }
        (!rest.is_empty()).then_some(rest)
    }
}

/// An expression in sum-of-products form: a non-empty, deduplicated set of
/// cubes. Addition is union, hence idempotent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SopExpr<A: Ord + Clone> {
    mode: Mode,
    cubes: BTreeSet<Cube<A>>,
}

/// A product chain `g1 ⋯ gn` plus an optional remainder, with
/// `expand() == ` the factorised expression. Factor order is significant in
/// non-commutative mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorisation<A: Ord + Clone> {
    pub factors: Vec<SopExpr<A>>,
    pub remainder: Option<SopExpr<A>>,
}

impl<A: Ord + Clone> Factorisation<A> {
    /// True when the expression factored into a genuine product (two or more
    /// factors) with nothing left over.
    pub fn is_complete_product(&self) -> bool {
        self.factors.len() >= 2 && self.remainder.is_none()
    }

    /// Distribute the factor chain back into sum-of-products form and add
    /// the remainder.
    pub fn expand(&self) -> SopExpr<A> {
        let mut product = self.factors[0].clone();
        for f in &self.factors[1..] {
            product = product.mul(f);
        }
        match &self.remainder {
            None => product,
            Some(r) => product.add(r),
        }
    }
}

impl<A: Ord + Clone> SopExpr<A> {
    pub fn new(mode: Mode, cubes: Vec<Vec<A>>) -> Result<Self, FactorError> {
        if cubes.is_empty() {
            return Err(FactorError::EmptyExpression);
        }
        let cubes = cubes
            .into_iter()
            .map(|c| Cube::new(mode, c))
            .collect::<Result<BTreeSet<_>, _>>()?;
        Ok(SopExpr { mode, cubes })
    }

    fn from_cubes(mode: Mode, cubes: BTreeSet<Cube<A>>) -> Option<Self> {
        (!cubes.is_empty()).then_some(SopExpr { mode, cubes })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn cubes(&self) -> impl Iterator<Item = &Cube<A>> {
        self.cubes.iter()
    }

    pub fn cube_count(&self) -> usize {
        self.cubes.len()
    }

    /// Union of two expressions.
    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.mode, other.mode);
        let mut cubes = self.cubes.clone();
        cubes.extend(other.cubes.iter().cloned());
        SopExpr {
            mode: self.mode,
            cubes,
        }
    }

    /// Distributed product of two expressions.
    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.mode, other.mode);
        let mut cubes = BTreeSet::new();
        for a in &self.cubes {
            for b in &other.cubes {
                cubes.insert(a.mul(b, self.mode));
            }
        }
        SopExpr {
            mode: self.mode,
            cubes,
        }
    }

    /// All pairs `(x, y)` with `x·y` a cube of this expression. Cubes of
    /// length one contribute nothing.
    pub fn r_pairs(&self, strategy: SplitStrategy) -> BTreeSet<(Cube<A>, Cube<A>)> {
        let mut pairs = BTreeSet::new();
        for cube in &self.cubes {
            if cube.len() < 2 {
                continue;
            }
            match (self.mode, strategy) {
                (Mode::NonCommutative, _) | (Mode::Commutative, SplitStrategy::Lex) => {
                    for i in 1..cube.len() {
                        let x = Cube(cube.0[..i].to_vec());
                        let y = Cube(cube.0[i..].to_vec());
                        pairs.insert((x, y));
                    }
                }
                (Mode::Commutative, SplitStrategy::Full) => {
                    for (x, y) in multiset_splits(&cube.0) {
                        pairs.insert((Cube(x), Cube(y)));
                    }
                }
            }
        }
        pairs
    }

    /// Weak division: the largest quotient `q` and remainder `r` such that
    /// `f = d·q + r` (left) or `f = q·d + r` (right) under set expansion.
    pub fn divide(&self, d: &Self, side: DivisionSide) -> (Option<Self>, Option<Self>) {
        debug_assert_eq!(self.mode, d.mode);
        let mut quotient: Option<BTreeSet<Cube<A>>> = None;
        for divisor in &d.cubes {
            let mut per_cube = BTreeSet::new();
            for cube in &self.cubes {
                if let Some(q) = split_off(cube, divisor, side, self.mode) {
                    per_cube.insert(q);
                }
            }
            quotient = Some(match quotient {
                None => per_cube,
                Some(acc) => acc.intersection(&per_cube).cloned().collect(),
            });
        }
        let quotient = quotient.and_then(|q| SopExpr::from_cubes(self.mode, q));
        let covered = match &quotient {
            None => BTreeSet::new(),
            Some(q) => match side {
                DivisionSide::Left => d.mul(q).cubes,
                DivisionSide::Right => q.mul(d).cubes,
            },
        };
        let rest: BTreeSet<Cube<A>> = self
            .cubes
            .iter()
            .filter(|c| !covered.contains(*c))
            .cloned()
            .collect();
        (quotient, SopExpr::from_cubes(self.mode, rest))
    }

    /// Greedy factorisation into a chain of irreducible-or-unfactorable
    /// factors plus a remainder. The expression is returned unchanged (a
    /// single factor, no remainder) when no split exists.
    pub fn factorise(&self, strategy: SplitStrategy) -> Factorisation<A> {
        let unchanged = Factorisation {
            factors: vec![self.clone()],
            remainder: None,
        };
        let Some((x_expr, y_expr)) = self.split_once(strategy) else {
            return unchanged;
        };
        let covered = x_expr.mul(&y_expr);
        debug_assert!(covered.cubes.is_subset(&self.cubes));
        let rest: BTreeSet<Cube<A>> = self
            .cubes
            .iter()
            .filter(|c| !covered.cubes.contains(*c))
            .cloned()
            .collect();
        let remainder = SopExpr::from_cubes(self.mode, rest);

        let mut factors = Vec::new();
        for part in [x_expr, y_expr] {
            let sub = part.factorise(strategy);
            if sub.remainder.is_none() {
                factors.extend(sub.factors);
            } else {
                // A partially factorable sub-expression stays whole; its
                // structure is rediscovered by the tree recursion instead.
                factors.push(part);
            }
        }
        Factorisation { factors, remainder }
    }

    /// One level of the greedy split: a divisor sum `x` and quotient sum `y`
    /// with every product of their cubes a cube of `self`. The side that
    /// wins the first projection-cardinality comparison keeps growing;
    /// committing to it preserves the coverage invariant.
    fn split_once(&self, strategy: SplitStrategy) -> Option<(Self, Self)> {
        let mut pairs = self.r_pairs(strategy);
        if pairs.is_empty() {
            return None;
        }
        let (x_max, x_card) = best_projection(&pairs, Projection::First)?;
        let (y_max, y_card) = best_projection(&pairs, Projection::Second)?;

        let mut xs: BTreeSet<Cube<A>> = BTreeSet::new();
        let mut ys: BTreeSet<Cube<A>> = BTreeSet::new();
        if x_card >= y_card {
            let mut pick = x_max;
            loop {
                let quotients: BTreeSet<Cube<A>> = pairs
                    .iter()
                    .filter(|(x, _)| *x == pick)
                    .map(|(_, y)| y.clone())
                    .collect();
                xs.insert(pick.clone());
                ys = quotients;
                pairs.retain(|(x, y)| ys.contains(y) && *x != pick);
                match best_projection(&pairs, Projection::First) {
                    Some((next, _)) => pick = next,
                    None => break,
                }
            }
        } else {
            let mut pick = y_max;
            loop {
                let divisors: BTreeSet<Cube<A>> = pairs
                    .iter()
                    .filter(|(_, y)| *y == pick)
                    .map(|(x, _)| x.clone())
                    .collect();
                ys.insert(pick.clone());
                xs = divisors;
                pairs.retain(|(x, y)| xs.contains(x) && *y != pick);
                match best_projection(&pairs, Projection::Second) {
                    Some((next, _)) => pick = next,
                    None => break,
                }
            }
        }
        let x_expr = SopExpr::from_cubes(self.mode, xs)?;
        let y_expr = SopExpr::from_cubes(self.mode, ys)?;
        Some((x_expr, y_expr))
    }
}

enum Projection {
    First,
    Second,
}

/// The cube with the largest projection set, ties broken by cube order.
fn best_projection<A: Ord + Clone>(
    pairs: &BTreeSet<(Cube<A>, Cube<A>)>,
    side: Projection,
) -> Option<(Cube<A>, usize)> {
    let mut counts: BTreeMap<&Cube<A>, usize> = BTreeMap::new();
    for (x, y) in pairs {
        let key = match side {
            Projection::First => x,
            Projection::Second => y,
        };
        *counts.entry(key).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .max_by(|(c1, n1), (c2, n2)| n1.cmp(n2).then_with(|| c2.cmp(c1)))
        .map(|(c, n)| (c.clone(), n))
}

/// Strip `divisor` off one side of `cube`, returning the other side.
fn split_off<A: Ord + Clone>(
    cube: &Cube<A>,
    divisor: &Cube<A>,
    side: DivisionSide,
    mode: Mode,
) -> Option<Cube<A>> {
    if divisor.len() >= cube.len() {
        return None;
    }
    match mode {
        Mode::Commutative => cube.multiset_difference(divisor).map(Cube),
        Mode::NonCommutative => match side {
            DivisionSide::Left => cube
                .0
                .starts_with(&divisor.0)
                .then(|| Cube(cube.0[divisor.len()..].to_vec())),
            DivisionSide::Right => cube
                .0
                .ends_with(&divisor.0)
                .then(|| Cube(cube.0[..cube.len() - divisor.len()].to_vec())),
        },
    }
}

/// All ordered two-way splits of a multiset into non-empty parts.
fn multiset_splits<A: Ord + Clone>(atoms: &[A]) -> Vec<(Vec<A>, Vec<A>)> {
    // Group into (atom, multiplicity) and enumerate sub-multiplicity vectors.
    let mut groups: Vec<(A, usize)> = Vec::new();
    for a in atoms {
        match groups.last_mut() {
            Some((g, n)) if g == a => *n += 1,
            _ => groups.push((a.clone(), 1)),
        }
    }
    let mut counts = vec![0usize; groups.len()];
    let mut splits = Vec::new();
    loop {
        // Advance the multiplicity vector (odometer order).
        let mut i = 0;
        loop {
            if i == groups.len() {
                return splits;
            }
            counts[i] += 1;
            if counts[i] <= groups[i].1 {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
        let total: usize = counts.iter().sum();
        if total == atoms.len() {
            continue;
        }
        let mut left = Vec::new();
        let mut right = Vec::new();
        for ((a, n), k) in groups.iter().zip(&counts) {
            left.extend(std::iter::repeat_n(a.clone(), *k));
            right.extend(std::iter::repeat_n(a.clone(), n - k));
        }
        splits.push((left, right));
    }
}

impl<A: Ord + Clone + fmt::Display> fmt::Display for Cube<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl<A: Ord + Clone + fmt::Display> fmt::Display for SopExpr<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.cubes.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl<A: Ord + Clone + fmt::Display> fmt::Display for Factorisation<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            if factor.cube_count() == 1 && factor.cubes.iter().next().expect("non-empty").len() == 1
            {
                write!(f, "{factor}")?;
            } else {
                write!(f, "({factor})")?;
            }
        }
        if let Some(r) = &self.remainder {
            write!(f, " + {r}")?;
        }
        Ok(())
    }
}

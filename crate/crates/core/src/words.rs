//! Words over `{1..N}`, symbol permutations, matrix tuples and the
//! word-indexed product tree that every level sum is built on.

use std::fmt;

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::linalg::{exterior_power, kronecker, Matrix};

/// Default cap on the number of words a single enumeration may visit.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Environment variable that overrides [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "SELFAFFINE_BUDGET";

/// Products whose largest entry leaves this range are reported as non-finite.
const PRODUCT_RANGE: (f64, f64) = (1e-300, 1e300);

/// Target number of independent subtrees when splitting a walk by prefix.
const MIN_PARTITIONS: u128 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    /// Reads [`BUDGET_ENV`], falling back to the default when unset or malformed.
    pub fn from_env() -> Self {
        std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()).map(Budget).unwrap_or_default()
    }

    /// Fails with [`Error::Overflow`] if `alphabet^level` words exceed the budget.
    pub fn check(self, alphabet: usize, level: usize) -> Result<u64> {
        let count = (alphabet as u128).checked_pow(level as u32).unwrap_or(u128::MAX);
        if count > self.0 as u128 {
            Err(Error::Overflow { count, budget: self.0 })
        } else {
            Ok(count as u64)
        }
    }
}

/// A finite word. Symbols are stored zero-based; the public notation is
/// one-based, so `Word::from_symbols(&[1, 2])` is the word `12`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    /// Builds a word from one-based symbols.
    pub fn from_symbols(symbols: &[usize]) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidInput("words have length at least 1".into()));
        }
        symbols
            .iter()
            .map(|&s| {
                if (1..=256).contains(&s) {
                    Ok((s - 1) as u8)
                } else {
                    Err(Error::InvalidInput(format!("symbol {s} is not in 1..=256")))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// Word of the given lexicographic rank among all `alphabet^level` words.
    pub fn from_rank(alphabet: usize, level: usize, mut rank: u64) -> Self {
        let mut symbols = vec![0u8; level];
        for slot in symbols.iter_mut().rev() {
            *slot = (rank % alphabet as u64) as u8;
            rank /= alphabet as u64;
        }
        Word(symbols)
    }

    /// Lexicographic rank among words of the same length.
    pub fn rank(&self, alphabet: usize) -> u64 {
        self.0.iter().fold(0u64, |acc, &s| acc * alphabet as u64 + s as u64)
    }

    /// Parses `"112"` or `"1.1.12"` (dot separated for alphabets above 9).
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let symbols: Vec<usize> = if text.contains('.') {
            text.split('.')
                .map(|p| p.parse().map_err(|_| Error::InvalidInput(format!("bad word {text:?}"))))
                .collect::<Result<_>>()?
        } else {
            text.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| Error::InvalidInput(format!("bad word {text:?}"))))
                .collect::<Result<_>>()?
        };
        Word::from_symbols(&symbols)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Zero-based symbol indices.
    pub fn indices(&self) -> &[u8] {
        &self.0
    }

    /// One-based symbols.
    pub fn symbols(&self) -> Vec<usize> {
        self.0.iter().map(|&s| s as usize + 1).collect()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `self` repeated `times` times.
    pub fn repeat(&self, times: usize) -> Word {
        Word(self.0.repeat(times))
    }

    pub fn max_symbol(&self) -> usize {
        self.0.iter().copied().max().map_or(0, |m| m as usize + 1)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 9) {
            for s in &self.0 {
                write!(f, "{}", s + 1)?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| (s + 1).to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// Lexicographic iterator over all words of a fixed length.
pub struct WordIter {
    alphabet: usize,
    current: Option<Vec<u8>>,
}

impl Iterator for WordIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().expect("checked above");
        let mut pos = cur.len();
        loop {
            if pos == 0 {
                self.current = None;
                break;
            }
            pos -= 1;
            if (cur[pos] as usize) + 1 < self.alphabet {
                cur[pos] += 1;
                break;
            }
            cur[pos] = 0;
        }
        Some(Word(out))
    }
}

/// All `alphabet^level` words in lexicographic order.
pub fn enumerate_words(alphabet: usize, level: usize, budget: Budget) -> Result<WordIter> {
    check_alphabet(alphabet)?;
    if level == 0 {
        return Err(Error::InvalidInput("word length must be at least 1".into()));
    }
    budget.check(alphabet, level)?;
    Ok(WordIter { alphabet, current: Some(vec![0; level]) })
}

/// Words of length `level` that start with `prefix`, in lexicographic order.
/// Distinct prefixes of equal length give disjoint ranges covering all words.
pub fn enumerate_with_prefix(alphabet: usize, level: usize, prefix: &Word) -> Result<impl Iterator<Item = Word>> {
    check_alphabet(alphabet)?;
    if prefix.len() > level || prefix.max_symbol() > alphabet {
        return Err(Error::InvalidInput("prefix does not fit the requested words".into()));
    }
    let tail = level - prefix.len();
    let base = prefix.rank(alphabet) * (alphabet as u64).pow(tail as u32);
    let count = (alphabet as u64).pow(tail as u32);
    Ok((0..count).map(move |r| Word::from_rank(alphabet, level, base + r)))
}

fn check_alphabet(alphabet: usize) -> Result<()> {
    if !(2..=256).contains(&alphabet) {
        return Err(Error::InvalidInput(format!("alphabet size {alphabet} is not in 2..=256")));
    }
    Ok(())
}

/// A bijection of `{1..N}` acting symbol-wise on words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolPermutation {
    mapping: Vec<usize>,
}

impl SymbolPermutation {
    /// From one-based images: `[2, 1]` swaps the two symbols.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        let mut mapping = Vec::with_capacity(n);
        for &img in images {
            if img == 0 || img > n || seen[img - 1] {
                return Err(Error::InvalidInput(format!("{images:?} is not a permutation of 1..={n}")));
            }
            seen[img - 1] = true;
            mapping.push(img - 1);
        }
        Ok(SymbolPermutation { mapping })
    }

    pub fn identity(n: usize) -> Self {
        SymbolPermutation { mapping: (0..n).collect() }
    }

    /// Transposition of one-based symbols `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        let mut images: Vec<usize> = (1..=n).collect();
        if a == 0 || b == 0 || a > n || b > n {
            return Err(Error::InvalidInput("transposition symbols out of range".into()));
        }
        images.swap(a - 1, b - 1);
        Self::from_one_based(&images)
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m)
    }

    /// Image of a zero-based symbol.
    pub fn image(&self, symbol: usize) -> usize {
        self.mapping[symbol]
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.mapping.iter().map(|m| m + 1).collect()
    }

    pub fn compose(&self, other: &SymbolPermutation) -> SymbolPermutation {
        SymbolPermutation { mapping: other.mapping.iter().map(|&m| self.mapping[m]).collect() }
    }

    /// Least `m ≥ 1` with `ι^m = id`.
    pub fn order(&self) -> usize {
        let mut power = self.clone();
        let mut m = 1;
        while !power.is_identity() {
            power = power.compose(self);
            m += 1;
        }
        m
    }
}

/// Symbol-wise image `ι[(i_k)] = (ι(i_k))`.
pub fn apply_permutation(iota: &SymbolPermutation, word: &Word) -> Result<Word> {
    if word.max_symbol() > iota.len() {
        return Err(Error::InvalidInput(format!("word {word} uses symbols outside 1..={}", iota.len())));
    }
    Ok(Word(word.0.iter().map(|&s| iota.image(s as usize) as u8).collect()))
}

/// An `N`-tuple of invertible `d × d` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTuple {
    matrices: Vec<Matrix>,
}

impl MatrixTuple {
    pub fn new(matrices: Vec<Matrix>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::InvalidInput("a tuple needs at least one matrix".into()));
        };
        let dim = first.dim();
        for (i, m) in matrices.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {} is {}×{}, expected {dim}×{dim}",
                    i + 1,
                    m.dim(),
                    m.dim()
                )));
            }
            m.check_invertible()?;
        }
        Ok(MatrixTuple { matrices })
    }

    pub fn alphabet(&self) -> usize {
        self.matrices.len()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    /// Matrix for a zero-based symbol.
    pub fn get(&self, symbol: usize) -> &Matrix {
        &self.matrices[symbol]
    }

    pub fn max_norm(&self) -> f64 {
        self.matrices.iter().map(Matrix::norm).fold(0.0, f64::max)
    }

    /// The tuple `(C_i) = (B_{ι(i)})`, so that `C_w = B_{ι(w)}`.
    pub fn permuted(&self, iota: &SymbolPermutation) -> Result<Self> {
        self.check_permutation(iota)?;
        Ok(MatrixTuple { matrices: (0..self.alphabet()).map(|i| self.matrices[iota.image(i)].clone()).collect() })
    }

    /// `A_i = B_i ⊗ B_{ι(i)}`.
    pub fn kronecker_with(&self, iota: &SymbolPermutation) -> Result<Self> {
        self.check_permutation(iota)?;
        MatrixTuple::new((0..self.alphabet()).map(|i| kronecker(&self.matrices[i], &self.matrices[iota.image(i)])).collect())
    }

    pub fn exterior_power(&self, k: usize) -> Result<Self> {
        MatrixTuple::new(self.matrices.iter().map(|m| exterior_power(m, k)).collect::<Result<_>>()?)
    }

    pub fn map(&self, f: impl Fn(&Matrix) -> Matrix) -> Result<Self> {
        MatrixTuple::new(self.matrices.iter().map(f).collect())
    }

    pub(crate) fn check_permutation(&self, iota: &SymbolPermutation) -> Result<()> {
        if iota.len() != self.alphabet() {
            return Err(Error::DimensionMismatch(format!(
                "permutation acts on {} symbols, tuple has {}",
                iota.len(),
                self.alphabet()
            )));
        }
        Ok(())
    }
}

fn check_range(m: &Matrix) -> Result<()> {
    let amax = m.as_dmatrix().amax();
    if !amax.is_finite() || amax > PRODUCT_RANGE.1 || (amax < PRODUCT_RANGE.0) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Left-to-right product `A_{i_1} ⋯ A_{i_n}`.
pub fn word_matrix(tuple: &MatrixTuple, word: &Word) -> Result<Matrix> {
    if word.max_symbol() > tuple.alphabet() {
        return Err(Error::InvalidInput(format!("word {word} uses symbols outside 1..={}", tuple.alphabet())));
    }
    let mut symbols = word.indices().iter();
    let Some(&first) = symbols.next() else {
        return Ok(Matrix::identity(tuple.dim()));
    };
    let mut acc = tuple.get(first as usize).clone();
    for &s in symbols {
        acc = &acc * tuple.get(s as usize);
        check_range(&acc)?;
    }
    Ok(acc)
}

/// Depth-first walk of the tree of words of length `1..=level`, carrying the
/// prefix products of several tuples that share one alphabet.
///
/// The split into subtrees depends only on the alphabet and level, and the
/// subtree results are merged in lexicographic order, so sums are
/// bit-identical under any [`Exec`].
pub struct ProductTree<'a> {
    tuples: &'a [MatrixTuple],
    level: usize,
    exec: Exec,
}

impl<'a> ProductTree<'a> {
    pub fn new(tuples: &'a [MatrixTuple], level: usize, budget: Budget) -> Result<Self> {
        let Some(first) = tuples.first() else {
            return Err(Error::InvalidInput("product tree needs at least one tuple".into()));
        };
        let alphabet = first.alphabet();
        if tuples.iter().any(|t| t.alphabet() != alphabet) {
            return Err(Error::DimensionMismatch("tuples must share one alphabet".into()));
        }
        check_alphabet(alphabet)?;
        if level == 0 {
            return Err(Error::InvalidInput("level must be at least 1".into()));
        }
        budget.check(alphabet, level)?;
        Ok(ProductTree { tuples, level, exec: Exec::default() })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn alphabet(&self) -> usize {
        self.tuples[0].alphabet()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    fn split_depth(&self) -> usize {
        let n = self.alphabet() as u128;
        let mut depth = 1;
        while n.pow(depth as u32) < MIN_PARTITIONS && depth < self.level {
            depth += 1;
        }
        depth.min(self.level)
    }

    /// Products for all words of length `depth`, in lexicographic order.
    fn prefix_products(&self, depth: usize) -> Result<Vec<Vec<Matrix>>> {
        let mut layer: Vec<Vec<Matrix>> = vec![Vec::new()];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(layer.len() * self.alphabet());
            for prods in &layer {
                for s in 0..self.alphabet() {
                    next.push(self.extend(prods, s)?);
                }
            }
            layer = next;
        }
        Ok(layer)
    }

    fn extend(&self, prods: &[Matrix], symbol: usize) -> Result<Vec<Matrix>> {
        if prods.is_empty() {
            return Ok(self.tuples.iter().map(|t| t.get(symbol).clone()).collect());
        }
        prods
            .iter()
            .zip(self.tuples)
            .map(|(p, t)| {
                let m = p * t.get(symbol);
                check_range(&m)?;
                Ok(m)
            })
            .collect()
    }

    /// `Σ_{|w| = m} f(products of w)` for every `m = 1..=level`.
    pub fn level_sums<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&[Matrix]) -> f64 + Sync + Send,
    {
        let split = self.split_depth();
        let mut sums = vec![0.0; self.level];
        let mut layer: Vec<Vec<Matrix>> = vec![Vec::new()];
        for depth in 1..=split {
            let mut next = Vec::with_capacity(layer.len() * self.alphabet());
            for prods in &layer {
                for s in 0..self.alphabet() {
                    next.push(self.extend(prods, s)?);
                }
            }
            let values: Vec<f64> = next.iter().map(|p| f(p)).collect();
            sums[depth - 1] = pairwise_sum(&values);
            layer = next;
        }
        if split == self.level {
            return Ok(sums);
        }
        let below = self.level - split;
        let parts: Vec<Result<Vec<f64>>> = self.exec.map(layer.len(), |i| {
            let mut acc = vec![0.0; below];
            self.walk_sums(&layer[i], 0, &mut acc, &f)?;
            Ok(acc)
        });
        let parts: Vec<Vec<f64>> = parts.into_iter().collect::<Result<_>>()?;
        let mut column = vec![0.0; parts.len()];
        for k in 0..below {
            for (c, p) in column.iter_mut().zip(&parts) {
                *c = p[k];
            }
            sums[split + k] = pairwise_sum(&column);
        }
        Ok(sums)
    }

    fn walk_sums<F>(&self, prods: &[Matrix], offset: usize, acc: &mut [f64], f: &F) -> Result<()>
    where
        F: Fn(&[Matrix]) -> f64,
    {
        if offset == acc.len() {
            return Ok(());
        }
        for s in 0..self.alphabet() {
            let child = self.extend(prods, s)?;
            acc[offset] += f(&child);
            self.walk_sums(&child, offset + 1, acc, f)?;
        }
        Ok(())
    }

    /// `f(products of w)` for every word of length `level`, in lexicographic order.
    pub fn leaves<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&[Matrix]) -> T + Sync + Send,
    {
        let split = self.split_depth();
        let layer = self.prefix_products(split)?;
        if split == self.level {
            return Ok(layer.iter().map(|p| f(p)).collect());
        }
        let parts: Vec<Result<Vec<T>>> = self.exec.map(layer.len(), |i| {
            let mut out = Vec::new();
            self.walk_leaves(&layer[i], split, &mut out, &f)?;
            Ok(out)
        });
        let mut out = Vec::new();
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }

    fn walk_leaves<T, F>(&self, prods: &[Matrix], depth: usize, out: &mut Vec<T>, f: &F) -> Result<()>
    where
        F: Fn(&[Matrix]) -> T,
    {
        for s in 0..self.alphabet() {
            let child = self.extend(prods, s)?;
            if depth + 1 == self.level {
                out.push(f(&child));
            } else {
                self.walk_leaves(&child, depth + 1, out, f)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn w(s: &[usize]) -> Word {
        Word::from_symbols(s).unwrap()
    }

    #[test]
    fn enumerates_small_cases() {
        let words: Vec<Word> = enumerate_words(2, 2, Budget::default()).unwrap().collect();
        assert_eq!(words, vec![w(&[1, 1]), w(&[1, 2]), w(&[2, 1]), w(&[2, 2])]);
        let words: Vec<Word> = enumerate_words(4, 1, Budget::default()).unwrap().collect();
        assert_eq!(words, vec![w(&[1]), w(&[2]), w(&[3]), w(&[4])]);
    }

    #[test]
    fn enumeration_count_and_uniqueness() {
        assert_eq!(enumerate_words(4, 10, Budget::default()).unwrap().count(), 1_048_576);
        let set: HashSet<Word> = enumerate_words(3, 6, Budget::default()).unwrap().collect();
        assert_eq!(set.len(), 729);
    }

    #[test]
    fn budget_overflow() {
        assert!(matches!(enumerate_words(4, 14, Budget::default()), Err(Error::Overflow { count: 268_435_456, .. })));
        assert!(enumerate_words(2, 3, Budget(7)).is_err());
        assert!(enumerate_words(2, 3, Budget(8)).is_ok());
    }

    #[test]
    fn prefix_partition_covers_everything_once() {
        let all: Vec<Word> = enumerate_words(3, 4, Budget::default()).unwrap().collect();
        let mut joined = Vec::new();
        for p in enumerate_words(3, 2, Budget::default()).unwrap() {
            joined.extend(enumerate_with_prefix(3, 4, &p).unwrap());
        }
        assert_eq!(all, joined);
    }

    #[test]
    fn rank_round_trip() {
        for (r, word) in enumerate_words(3, 4, Budget::default()).unwrap().enumerate() {
            assert_eq!(word.rank(3), r as u64);
            assert_eq!(Word::from_rank(3, 4, r as u64), word);
        }
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(w(&[1, 1, 2]).to_string(), "112");
        assert_eq!(Word::parse("112").unwrap(), w(&[1, 1, 2]));
        assert_eq!(w(&[10, 2]).to_string(), "10.2");
        assert_eq!(Word::parse("10.2").unwrap(), w(&[10, 2]));
        assert!(Word::parse("").is_err());
        assert!(Word::parse("1a").is_err());
    }

    #[test]
    fn permutation_examples() {
        let swap = SymbolPermutation::from_one_based(&[2, 1]).unwrap();
        assert_eq!(apply_permutation(&swap, &w(&[1, 1, 2])).unwrap(), w(&[2, 2, 1]));
        let id = SymbolPermutation::identity(2);
        assert_eq!(apply_permutation(&id, &w(&[1, 2, 2])).unwrap(), w(&[1, 2, 2]));
        let twice = apply_permutation(&swap, &apply_permutation(&swap, &w(&[1, 2, 1])).unwrap()).unwrap();
        assert_eq!(twice, w(&[1, 2, 1]));
        assert_eq!(swap.order(), 2);
        assert_eq!(SymbolPermutation::from_one_based(&[2, 3, 1]).unwrap().order(), 3);
        assert!(SymbolPermutation::from_one_based(&[1, 1]).is_err());
        assert!(apply_permutation(&swap, &w(&[3])).is_err());
    }

    #[test]
    fn permutation_is_bijective_on_words() {
        let iota = SymbolPermutation::from_one_based(&[3, 1, 2]).unwrap();
        for n in 1..=6 {
            let words: Vec<Word> = enumerate_words(3, n, Budget::default()).unwrap().collect();
            let images: HashSet<Word> = words.iter().map(|x| apply_permutation(&iota, x).unwrap()).collect();
            assert_eq!(images.len(), words.len());
            assert!(images.iter().all(|x| x.len() == n));
        }
    }

    #[test]
    fn word_matrix_single_symbol() {
        let t = MatrixTuple::new(vec![Matrix::diag(&[0.5, 0.25]), Matrix::rotation(0.3)]).unwrap();
        assert_eq!(word_matrix(&t, &w(&[2])).unwrap(), Matrix::rotation(0.3));
        let p = word_matrix(&t, &w(&[1, 2])).unwrap();
        assert!(p.max_abs_diff(&(&Matrix::diag(&[0.5, 0.25]) * &Matrix::rotation(0.3))) < 1e-15);
    }

    #[test]
    fn word_matrix_flags_underflow() {
        let t = MatrixTuple::new(vec![Matrix::diag(&[1e-20, 1e-20]), Matrix::identity(2)]).unwrap();
        assert_eq!(word_matrix(&t, &w(&[1; 20])), Err(Error::NonFinite));
    }

    #[test]
    fn tuple_validation() {
        let sing = Matrix::from_row_slice(2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(MatrixTuple::new(vec![Matrix::identity(2), sing]), Err(Error::Singular { .. })));
        assert!(matches!(MatrixTuple::new(vec![Matrix::identity(2), Matrix::identity(3)]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn product_tree_level_sums_match_enumeration() {
        let t = MatrixTuple::new(vec![
            Matrix::from_row_slice(2, &[0.3, 0.1, -0.2, 0.4]).unwrap(),
            Matrix::from_row_slice(2, &[0.5, 0.0, 0.1, 0.2]).unwrap(),
            Matrix::rotation(0.7).scale(0.3),
        ])
        .unwrap();
        let tuples = [t.clone()];
        let tree = ProductTree::new(&tuples, 6, Budget::default()).unwrap();
        let sums = tree.level_sums(|p| p[0].as_dmatrix().sum()).unwrap();
        for n in 1..=6 {
            let direct: f64 =
                enumerate_words(3, n, Budget::default()).unwrap().map(|x| word_matrix(&t, &x).unwrap().as_dmatrix().sum()).sum();
            assert!((sums[n - 1] - direct).abs() < 1e-12, "level {n}");
        }
        let leaves = tree.leaves(|p| p[0].clone()).unwrap();
        for (x, m) in enumerate_words(3, 6, Budget::default()).unwrap().zip(&leaves) {
            assert!(word_matrix(&t, &x).unwrap().max_abs_diff(m) < 1e-15);
        }
    }

    #[test]
    fn product_tree_is_schedule_independent() {
        let t =
            MatrixTuple::new(vec![Matrix::from_row_slice(2, &[0.3, 0.1, -0.2, 0.4]).unwrap(), Matrix::rotation(0.7).scale(0.6)])
                .unwrap();
        let tuples = [t];
        let seq = ProductTree::new(&tuples, 12, Budget::default())
            .unwrap()
            .with_exec(Exec::Sequential)
            .level_sums(|p| p[0].norm())
            .unwrap();
        let par = ProductTree::new(&tuples, 12, Budget::default())
            .unwrap()
            .with_exec(Exec::Parallel)
            .level_sums(|p| p[0].norm())
            .unwrap();
        assert_eq!(seq.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), par.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }
}

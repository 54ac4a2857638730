//! Words over a finite alphabet and their cyclic equivalence classes.

use std::fmt;

/// A finite word over the alphabet `{0, ..., N-1}`; rendered 1-based.
///
/// The associated matrix product is `A_{i_n} ... A_{i_1}`: the first letter
/// acts first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    pub letters: Vec<usize>,
}

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Self { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn reversed(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().copied().collect(),
        }
    }

    /// Smallest `p` such that the word is invariant under rotation by `p`.
    pub fn minimal_period(&self) -> usize {
        let n = self.letters.len();
        (1..=n)
            .find(|&p| n.is_multiple_of(p) && (0..n).all(|i| self.letters[i] == self.letters[(i + p) % n]))
            .unwrap_or(n)
    }

    /// Lexicographically least rotation.
    pub fn canonical_rotation(&self) -> Self {
        let n = self.letters.len();
        (0..n)
            .map(|r| Word::new((0..n).map(|i| self.letters[(i + r) % n]).collect()))
            .min()
            .unwrap_or_else(|| self.clone())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.letters.iter().any(|&l| l >= 9);
        for (pos, l) in self.letters.iter().enumerate() {
            if wide && pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", l + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// A cyclic equivalence class of words of a fixed length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NecklaceClass {
    /// Lexicographically minimal rotation.
    pub representative: Word,
    /// Number of distinct words in the class, equal to the minimal period.
    pub class_size: usize,
}

/// Every necklace of length `n` over `alphabet` letters, in lexicographic
/// order of representatives.
///
/// Uses the Fredricksen–Kessler–Maiorana successor rule: pre-necklaces are
/// visited in lexicographic order and a pre-necklace whose length is a
/// multiple of its Lyndon-prefix period `p` is a necklace of period `p`.
pub fn enumerate_necklaces(alphabet: usize, n: usize) -> Vec<NecklaceClass> {
    let mut out = Vec::new();
    if alphabet == 0 || n == 0 {
        return out;
    }
    let mut a = vec![0usize; n + 1];
    let mut i = n;
    let mut p = 1;
    // a[1..=n] holds the current pre-necklace, a[0] is a sentinel
    loop {
        if n.is_multiple_of(p) {
            out.push(NecklaceClass {
                representative: Word::new(a[1..=n].to_vec()),
                class_size: p,
            });
        }
        // successor: bump the rightmost non-maximal letter, then extend periodically
        while i > 0 && a[i] == alphabet - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        a[i] += 1;
        p = i;
        for j in i + 1..=n {
            a[j] = a[j - p];
        }
        i = n;
    }
    out
}

/// Every word of length `n` in lexicographic order.
pub fn enumerate_words(alphabet: usize, n: usize) -> Vec<Word> {
    let total = alphabet.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut letters = vec![0; n];
            for slot in letters.iter_mut().rev() {
                *slot = idx % alphabet;
                idx /= alphabet;
            }
            Word::new(letters)
        })
        .collect()
}

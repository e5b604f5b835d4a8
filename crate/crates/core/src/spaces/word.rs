//! Reduced-word arithmetic for the free group F_N.
//!
//! A word is a sequence of nonzero signed generator indices in
//! -N..=-1, 1..=N; the letter -i is the inverse of i. A word is reduced when
//! no adjacent pair cancels. All operations reduce eagerly at the
//! concatenation seam, so group arithmetic is exact.

/// True when `w` uses only letters valid for the given rank and has no
/// adjacent cancelling pair.
pub fn is_reduced(w: &[i32], rank: usize) -> bool {
    let r = rank as i32;
    for (idx, &l) in w.iter().enumerate() {
        if l == 0 || l.abs() > r {
            return false;
        }
        if idx > 0 && w[idx - 1] == -l {
            return false;
        }
    }
    true
}

/// Push one letter onto a reduced word, cancelling at the seam.
#[inline]
pub fn push_letter(w: &mut Vec<i32>, letter: i32) {
    if let Some(&last) = w.last() {
        if last == -letter {
            w.pop();
            return;
        }
    }
    w.push(letter);
}

/// Reduced concatenation a * b of two reduced words.
pub fn concat(a: &[i32], b: &[i32]) -> Vec<i32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    for &l in b {
        push_letter(&mut out, l);
    }
    out
}

/// Inverse of a reduced word: reverse order, flip signs.
pub fn invert(w: &[i32]) -> Vec<i32> {
    w.iter().rev().map(|&l| -l).collect()
}

/// Length of the longest common prefix of two words.
pub fn common_prefix_len(a: &[i32], b: &[i32]) -> usize {
    a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count()
}

/// Word metric d(a, b) = |a^{-1} b|, computed by reduce-and-count.
pub fn distance(a: &[i32], b: &[i32]) -> usize {
    concat(&invert(a), b).len()
}

/// Word metric through the tree identity |a| + |b| - 2 lcp(a, b).
/// Kept as an independent route for cross-checks and fast scans.
pub fn distance_via_prefix(a: &[i32], b: &[i32]) -> usize {
    a.len() + b.len() - 2 * common_prefix_len(a, b)
}

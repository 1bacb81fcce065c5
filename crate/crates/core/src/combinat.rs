//! Small combinatorial helpers shared by the enumeration routines.

/// Advance `subset` to the next size-|subset| combination of `{0..n}` in
/// lexicographic order. Returns false when the last combination has been
/// passed.
pub(crate) fn next_subset(subset: &mut [usize], n: usize) -> bool {
    let size = subset.len();
    let mut i = size;
    while i > 0 {
        i -= 1;
        if subset[i] != i + n - size {
            subset[i] += 1;
            for j in i + 1..size {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// All size-`size` combinations of `{0..n}` in lexicographic order.
pub(crate) fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    if size > n {
        return vec![];
    }
    let mut out = Vec::new();
    let mut subset: Vec<usize> = (0..size).collect();
    loop {
        out.push(subset.clone());
        if !next_subset(&mut subset, n) {
            break;
        }
    }
    out
}

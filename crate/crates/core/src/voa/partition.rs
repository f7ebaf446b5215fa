use std::fmt;

/// Weakly decreasing list of positive parts, e.g. the word `a(-3)a(-1)a(-1)` is `[3, 1, 1]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(pub Vec<u32>);

impl Partition {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn size(&self) -> usize {
        self.0.iter().map(|&p| p as usize).sum()
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn multiplicity(&self, part: u32) -> usize {
        self.0.iter().filter(|&&p| p == part).count()
    }

    /// Inserts `part`, keeping the parts sorted in decreasing order.
    pub fn with_part(&self, part: u32) -> Self {
        let mut v = self.0.clone();
        let pos = v.iter().position(|&p| p < part).unwrap_or(v.len());
        v.insert(pos, part);
        Self(v)
    }

    pub fn without_part(&self, part: u32) -> Option<Self> {
        let pos = self.0.iter().position(|&p| p == part)?;
        let mut v = self.0.clone();
        v.remove(pos);
        Some(Self(v))
    }

    /// Formats as a product of creation modes, `sym(-3)sym(-1)`.
    pub fn word(&self, sym: &str) -> String {
        self.0.iter().map(|p| format!("{sym}(-{p})")).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Partitions of `n` with every part at least `min_part`, in graded-lex order:
/// larger leading parts first, e.g. `[2], [1,1]`.
pub fn partitions(n: usize, min_part: u32) -> Vec<Partition> {
    fn go(n: u32, max: u32, min: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        let mut p = max.min(n);
        while p >= min {
            prefix.push(p);
            go(n - p, p, min, prefix, out);
            prefix.pop();
            p -= 1;
        }
    }
    let mut out = Vec::new();
    go(n as u32, n as u32, min_part.max(1), &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_graded_lex() {
        let p: Vec<String> = partitions(4, 1).iter().map(|p| p.to_string()).collect();
        assert_eq!(p, ["[4]", "[3,1]", "[2,2]", "[2,1,1]", "[1,1,1,1]"]);
        assert_eq!(partitions(0, 1), vec![Partition::empty()]);
        assert!(partitions(1, 2).is_empty());
    }

    #[test]
    fn counts_match_partition_numbers() {
        let counts: Vec<usize> = (0..10).map(|n| partitions(n, 1).len()).collect();
        assert_eq!(counts, [1, 1, 2, 3, 5, 7, 11, 15, 22, 30]);
        let counts: Vec<usize> = (0..8).map(|n| partitions(n, 2).len()).collect();
        assert_eq!(counts, [1, 0, 1, 1, 2, 2, 4, 4]);
    }

    #[test]
    fn insert_and_remove_parts() {
        let p = Partition(vec![3, 1]);
        assert_eq!(p.with_part(2), Partition(vec![3, 2, 1]));
        assert_eq!(p.with_part(1).without_part(1), Some(p.clone()));
        assert_eq!(p.without_part(2), None);
    }
}

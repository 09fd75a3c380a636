//! Finite groups given by multiplication tables.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A finite group on the element indices `0..order`, validated at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
    generators: Vec<usize>,
}

impl FiniteGroup {
    /// Checks closure, associativity, the identity and inverses.
    pub fn new(table: Vec<Vec<usize>>, identity: usize) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        if identity >= n {
            return Err(Error::InvalidGroup(format!("identity {identity} out of range")));
        }
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGroup(format!("row {a} has length {}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(Error::InvalidGroup(format!("entry {bad} in row {a} out of range")));
            }
        }
        for a in 0..n {
            if table[identity][a] != a || table[a][identity] != a {
                return Err(Error::InvalidGroup(format!("{identity} is not a two-sided identity")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let mut inverses = Vec::with_capacity(n);
        for a in 0..n {
            match (0..n).find(|&b| table[a][b] == identity && table[b][a] == identity) {
                Some(b) => inverses.push(b),
                None => return Err(Error::InvalidGroup(format!("element {a} has no inverse"))),
            }
        }
        let mut group = FiniteGroup {
            table,
            identity,
            inverses,
            generators: Vec::new(),
        };
        group.generators = group.greedy_generators();
        Ok(group)
    }

    pub fn trivial() -> Self {
        FiniteGroup::new(vec![vec![0]], 0).expect("trivial group")
    }

    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group needs positive order");
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup::new(table, 0).expect("cyclic group")
    }

    /// Symmetric group on `n` letters; elements are permutations in
    /// lexicographic order (index 0 is the identity), `(ab)(i) = a(b(i))`.
    pub fn symmetric(n: usize) -> Self {
        let perms = permutations(n);
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed");
        let table = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| index(&b.iter().map(|&i| a[i]).collect()))
                    .collect()
            })
            .collect();
        FiniteGroup::new(table, 0).expect("symmetric group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// A small generating set, chosen greedily in index order.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    /// Subgroup generated by `gens`.
    pub fn closure(&self, gens: &[usize]) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = BTreeSet::from([self.identity]);
        let mut frontier: Vec<usize> = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set
    }

    pub fn is_subgroup(&self, elements: &[usize]) -> bool {
        let set: BTreeSet<usize> = elements.iter().copied().collect();
        !set.is_empty()
            && set.iter().all(|&x| x < self.order())
            && set.contains(&self.identity)
            && set
                .iter()
                .all(|&a| set.iter().all(|&b| set.contains(&self.mul(a, self.inverse(b)))))
    }

    /// Left cosets `gH`, ordered by their smallest element.
    pub fn left_cosets(&self, subgroup: &[usize]) -> Result<Vec<Vec<usize>>> {
        if !self.is_subgroup(subgroup) {
            return Err(Error::InvalidGroup(format!("{subgroup:?} is not a subgroup")));
        }
        let mut seen = vec![false; self.order()];
        let mut cosets = Vec::new();
        for g in 0..self.order() {
            if seen[g] {
                continue;
            }
            let mut coset: Vec<usize> = subgroup.iter().map(|&h| self.mul(g, h)).collect();
            coset.sort_unstable();
            coset.dedup();
            for &x in &coset {
                seen[x] = true;
            }
            cosets.push(coset);
        }
        Ok(cosets)
    }

    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order()];
        let mut classes = Vec::new();
        for g in 0..self.order() {
            if seen[g] {
                continue;
            }
            let mut class: Vec<usize> = (0..self.order())
                .map(|h| self.mul(self.mul(h, g), self.inverse(h)))
                .collect();
            class.sort_unstable();
            class.dedup();
            for &x in &class {
                seen[x] = true;
            }
            classes.push(class);
        }
        classes
    }

    fn greedy_generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut generated = self.closure(&gens);
        for g in 0..self.order() {
            if generated.len() == self.order() {
                break;
            }
            if !generated.contains(&g) {
                gens.push(g);
                generated = self.closure(&gens);
            }
        }
        gens
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_three_has_expected_structure() {
        let s3 = FiniteGroup::symmetric(3);
        assert_eq!(s3.order(), 6);
        assert_eq!(s3.identity(), 0);
        assert_eq!(s3.conjugacy_classes().len(), 3);
        assert_eq!(s3.closure(s3.generators()).len(), 6);
        assert!(s3.generators().len() <= 2);
    }

    #[test]
    fn order_two_subgroup_has_three_cosets() {
        let s3 = FiniteGroup::symmetric(3);
        // index 1 is the transposition swapping the last two letters
        assert_eq!(s3.mul(1, 1), 0);
        let cosets = s3.left_cosets(&[0, 1]).unwrap();
        assert_eq!(cosets.len(), 3);
        assert!(cosets.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn rejects_non_associative_table() {
        // a Latin square with identity 0 that is not a group
        let table = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(FiniteGroup::new(table, 0), Err(Error::InvalidGroup(_))));
    }

    #[test]
    fn rejects_missing_identity() {
        let table = vec![vec![1, 0], vec![0, 1]];
        assert!(FiniteGroup::new(table, 0).is_err());
    }

    #[test]
    fn rejects_non_subgroup() {
        let s3 = FiniteGroup::symmetric(3);
        assert!(s3.left_cosets(&[1]).is_err());
    }
}

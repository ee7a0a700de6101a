//! Exhaustive enumeration helpers for small-instance sweeps.

use crate::election::Election;

/// All permutations of `0..len` in lexicographic order.
pub fn permutations(len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..len).collect();
    let mut chosen = Vec::with_capacity(len);
    fn recurse(items: &mut Vec<usize>, chosen: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if items.is_empty() {
            out.push(chosen.clone());
            return;
        }
        for i in 0..items.len() {
            let x = items.remove(i);
            chosen.push(x);
            recurse(items, chosen, out);
            chosen.pop();
            items.insert(i, x);
        }
    }
    recurse(&mut items, &mut chosen, &mut out);
    out
}

/// Every election with exactly `n` voters over `m` candidates named
/// `c1..cm`: all `(m!)^n` ranking profiles. Only sensible for tiny sizes.
pub fn all_elections(m: usize, n: usize) -> Vec<Election> {
    let perms = permutations(m);
    let names: Vec<String> = (1..=m).map(|i| format!("c{i}")).collect();
    let mut profiles: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(profiles.len() * perms.len());
        for profile in &profiles {
            for perm in &perms {
                let mut extended = profile.clone();
                extended.push(perm.clone());
                next.push(extended);
            }
        }
        profiles = next;
    }
    profiles
        .into_iter()
        .map(|rankings| Election::new(names.clone(), rankings).expect("valid by construction"))
        .collect()
}

//! Seeded random instances with ground-truth labels.
//!
//! Every kind writes one algebra named `A` and records in the metadata labels
//! what the construction guarantees: `separable`, `connected` and `special`
//! always, `cstar_frobenius` when known, and the Wedderburn `blocks` of
//! semisimple algebras on the trivial group.
//!
//! | kind | params |
//! |------|--------|
//! | `scrambled-semisimple` | `blocks=1,2` (required), `spread=2` |
//! | `group-algebra` | `group=S3`, `action=conjugation\|trivial` |
//! | `coset-algebra` | `group=S3`, `subgroup=<generators>` or `subgroup-order=2` |
//! | `dual-numbers` | `k=2`, `spread=2` (`spread=1` leaves it unscrambled) |
//! | `frobenius-nonspecial` | `blocks=1,2` (required) |
//! | `mixed` | `max-dim=6`, `spread=2` |
//!
//! Groups are written `trivial`, `C<n>` or `S<n>`.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::algebra::{direct_sum_algebra, transport_algebra, AlgebraObject};
use crate::category::Category;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::io::InstanceFile;
use crate::linalg::{random, Matrix, ONE};

pub const KINDS: [&str; 6] = [
    "scrambled-semisimple",
    "group-algebra",
    "coset-algebra",
    "dual-numbers",
    "frobenius-nonspecial",
    "mixed",
];

/// Largest group order accepted by `group=...`.
const MAX_GROUP_ORDER: usize = 120;

struct Params<'a> {
    map: &'a BTreeMap<String, String>,
    used: BTreeSet<&'a str>,
}

fn bad_param(key: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        location: format!("params.{key}"),
        message: message.into(),
    }
}

impl<'a> Params<'a> {
    fn new(map: &'a BTreeMap<String, String>) -> Self {
        Params {
            map,
            used: BTreeSet::new(),
        }
    }

    fn raw(&mut self, key: &'a str) -> Option<&'a str> {
        self.used.insert(key);
        self.map.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &'a str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| bad_param(key, format!("cannot parse `{v}`"))),
        }
    }

    fn list(&mut self, key: &'a str) -> Result<Option<Vec<usize>>> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| bad_param(key, format!("cannot parse `{v}` as a list")))
            })
            .collect::<Result<Vec<usize>>>()
            .map(Some)
    }

    fn blocks(&mut self) -> Result<Vec<usize>> {
        let blocks = self
            .list("blocks")?
            .ok_or_else(|| bad_param("blocks", "required, e.g. blocks=1,2"))?;
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(bad_param("blocks", "block sizes must be positive"));
        }
        if blocks.iter().map(|n| n * n).sum::<usize>() > 64 {
            return Err(bad_param("blocks", "total dimension above 64"));
        }
        Ok(blocks)
    }

    fn spread(&mut self) -> Result<f64> {
        let s: f64 = self.parse("spread", 2.0)?;
        if !(1.0..=1e3).contains(&s) {
            return Err(bad_param("spread", "must lie in [1, 1000]"));
        }
        Ok(s)
    }

    fn finish(&self) -> Result<()> {
        match self.map.keys().find(|k| !self.used.contains(k.as_str())) {
            Some(k) => Err(bad_param(k, "unknown parameter")),
            None => Ok(()),
        }
    }
}

/// Parses `trivial`, `C<n>` or `S<n>`.
pub fn parse_group(name: &str) -> Result<FiniteGroup> {
    let err = || bad_param("group", format!("unknown group `{name}`"));
    if name == "trivial" {
        return Ok(FiniteGroup::trivial());
    }
    let (family, n) = name.split_at(1.min(name.len()));
    let n: usize = n.parse().map_err(|_| err())?;
    let group = match family {
        "C" if (1..=MAX_GROUP_ORDER).contains(&n) => FiniteGroup::cyclic(n),
        "S" if (1..=5).contains(&n) => FiniteGroup::symmetric(n),
        _ => return Err(err()),
    };
    Ok(group)
}

fn order_of(g: &FiniteGroup, x: usize) -> usize {
    g.closure(&[x]).len()
}

/// Builds an instance of the given kind; identical arguments give identical
/// files.
pub fn generate(kind: &str, params: &BTreeMap<String, String>, seed: u64) -> Result<InstanceFile> {
    let mut p = Params::new(params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: BTreeMap<String, Value> = BTreeMap::new();
    let (cat, a) = match kind {
        "scrambled-semisimple" => {
            let blocks = p.blocks()?;
            let spread = p.spread()?;
            let cat = Category::hilb();
            let a = scramble(&cat, &semisimple(&cat, &blocks, |_| 1.0)?, spread, &mut rng)?;
            label_semisimple(&mut labels, &blocks);
            labels.insert("special".into(), false.into());
            (cat, a)
        }
        "group-algebra" => {
            let group = parse_group(p.raw("group").unwrap_or("S3"))?;
            let action = p.raw("action").unwrap_or("conjugation");
            let n = group.order();
            let classes = group.conjugacy_classes().len();
            let cat = Category::rep_g(group);
            let (carrier, invariants) = match action {
                "conjugation" => (cat.conjugation_rep()?, classes),
                "trivial" => (cat.trivial_rep(n)?, n),
                other => return Err(bad_param("action", format!("unknown action `{other}`"))),
            };
            let a = AlgebraObject::group_algebra(&cat, &carrier)?;
            labels.insert("separable".into(), true.into());
            labels.insert("connected".into(), (invariants == 1).into());
            labels.insert("special".into(), (n == 1).into());
            labels.insert("cstar_frobenius".into(), true.into());
            (cat, a)
        }
        "coset-algebra" => {
            let group = parse_group(p.raw("group").unwrap_or("S3"))?;
            let subgroup: Vec<usize> = match p.list("subgroup")? {
                Some(gens) => {
                    if gens.iter().any(|&g| g >= group.order()) {
                        return Err(bad_param("subgroup", "generator out of range"));
                    }
                    group.closure(&gens).into_iter().collect()
                }
                None => {
                    let k: usize = p.parse("subgroup-order", 2)?;
                    let g = (0..group.order())
                        .find(|&x| order_of(&group, x) == k)
                        .ok_or_else(|| bad_param("subgroup-order", format!("no element of order {k}")))?;
                    group.closure(&[g]).into_iter().collect()
                }
            };
            let cat = Category::rep_g(group);
            let carrier = cat.coset_rep(&subgroup)?;
            let a = AlgebraObject::pointwise(&cat, &carrier)?;
            labels.insert("separable".into(), true.into());
            labels.insert("connected".into(), true.into());
            labels.insert("special".into(), true.into());
            labels.insert("cstar_frobenius".into(), true.into());
            labels.insert("subgroup".into(), subgroup.into());
            (cat, a)
        }
        "dual-numbers" => {
            let k: usize = p.parse("k", 2)?;
            if !(2..=8).contains(&k) {
                return Err(bad_param("k", "must lie in 2..=8"));
            }
            let spread = p.spread()?;
            let cat = Category::hilb();
            let a = AlgebraObject::truncated_polynomial(&cat, k)?;
            let a = if spread > 1.0 { scramble(&cat, &a, spread, &mut rng)? } else { a };
            labels.insert("separable".into(), false.into());
            labels.insert("connected".into(), false.into());
            labels.insert("special".into(), false.into());
            (cat, a)
        }
        "frobenius-nonspecial" => {
            let blocks = p.blocks()?;
            let cat = Category::hilb();
            // Block scales away from the special value n^{-1/2}.
            let scales: Vec<f64> = blocks
                .iter()
                .map(|&n| {
                    let factor = rng.random_range(1.5..3.0);
                    let factor = if rng.random_bool(0.5) { factor } else { 1.0 / factor };
                    factor / (n as f64).sqrt()
                })
                .collect();
            let a = semisimple(&cat, &blocks, |k| scales[k])?;
            let u = random::unitary(a.dim(), &mut rng);
            let u = cat.mor(&a.carrier, &a.carrier, u)?;
            let (a, _) = transport_algebra(&cat, &a, &u)?;
            label_semisimple(&mut labels, &blocks);
            labels.insert("special".into(), false.into());
            labels.insert("cstar_frobenius".into(), true.into());
            (cat, a)
        }
        "mixed" => {
            let max_dim: usize = p.parse("max-dim", 6)?;
            if !(1..=16).contains(&max_dim) {
                return Err(bad_param("max-dim", "must lie in 1..=16"));
            }
            let spread = p.spread()?;
            let cat = Category::hilb();
            let (a, separable) = mixed(&cat, max_dim, &mut rng)?;
            let a = scramble(&cat, &a, spread, &mut rng)?;
            labels.insert("separable".into(), separable.into());
            labels.insert("connected".into(), (a.dim() == 1).into());
            labels.insert("special".into(), false.into());
            (cat, a)
        }
        other => {
            return Err(Error::Parse {
                location: "kind".into(),
                message: format!("unknown kind `{other}`, expected one of {}", KINDS.join(", ")),
            })
        }
    };
    p.finish()?;
    labels.insert("dim".into(), a.dim().into());
    labels.insert("kind".into(), kind.into());

    let mut file = InstanceFile::new(&cat);
    file.insert_algebra("A", &a);
    file.metadata.seed = Some(seed);
    let rendered: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    file.metadata.provenance = format!("gen {kind} {}", rendered.join(" ")).trim_end().to_string();
    file.metadata.labels = labels;
    Ok(file)
}

fn label_semisimple(labels: &mut BTreeMap<String, Value>, blocks: &[usize]) {
    let mut sorted = blocks.to_vec();
    sorted.sort_unstable();
    labels.insert("separable".into(), true.into());
    labels.insert("connected".into(), (sorted == [1]).into());
    labels.insert("blocks".into(), sorted.into());
}

/// `⊕ M_{n_k}` on a trivial carrier, block `k` with product scaled by
/// `scale(k)`.
fn semisimple(cat: &Category, blocks: &[usize], scale: impl Fn(usize) -> f64) -> Result<AlgebraObject> {
    let parts = blocks
        .iter()
        .enumerate()
        .map(|(k, &n)| AlgebraObject::matrix_algebra(cat, &cat.trivial_rep(n * n)?, n, scale(k)))
        .collect::<Result<Vec<_>>>()?;
    direct_sum_algebra(cat, &parts)
}

/// Transport along a random invertible map with singular values in
/// `[1/spread, spread]`; trivial group only.
fn scramble(cat: &Category, a: &AlgebraObject, spread: f64, rng: &mut ChaCha8Rng) -> Result<AlgebraObject> {
    let t = random::invertible(a.dim(), 1.0 / spread, spread, rng);
    let t = cat.mor(&a.carrier, &a.carrier, t)?;
    Ok(transport_algebra(cat, a, &t)?.0)
}

/// Incidence algebra of a preorder on `n` points: basis `E_pq` for related
/// pairs, `E_pq E_qs = E_ps`. Semisimple exactly when the preorder is
/// symmetric.
fn incidence(cat: &Category, related: &[Vec<bool>]) -> Result<AlgebraObject> {
    let n = related.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|p| (0..n).map(move |q| (p, q)))
        .filter(|&(p, q)| related[p][q])
        .collect();
    let d = pairs.len();
    let index = |p: usize, q: usize| pairs.iter().position(|&x| x == (p, q));
    let mut m = Matrix::zeros(d, d * d);
    for (a, &(p, q)) in pairs.iter().enumerate() {
        for (b, &(q2, s)) in pairs.iter().enumerate() {
            if q == q2 {
                let c = index(p, s).expect("transitive");
                m[(c, a * d + b)] = ONE;
            }
        }
    }
    let mut iota = Matrix::zeros(d, 1);
    for p in 0..n {
        iota[(index(p, p).expect("reflexive"), 0)] = ONE;
    }
    AlgebraObject::from_matrices(cat, &cat.trivial_rep(d)?, m, iota)
}

fn random_preorder(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<bool>> {
    let density = rng.random_range(0.2..0.7);
    let mut r: Vec<Vec<bool>> = (0..n)
        .map(|p| (0..n).map(|q| p == q || rng.random_bool(density)).collect())
        .collect();
    for k in 0..n {
        for p in 0..n {
            for q in 0..n {
                if r[p][k] && r[k][q] {
                    r[p][q] = true;
                }
            }
        }
    }
    r
}

/// A random algebra of dimension at most `max_dim` mixing semisimple and
/// non-semisimple pieces; returns it with its separability.
fn mixed(cat: &Category, max_dim: usize, rng: &mut ChaCha8Rng) -> Result<(AlgebraObject, bool)> {
    let mut parts = Vec::new();
    let mut separable = true;
    let mut room = max_dim;
    loop {
        let choice = rng.random_range(0..4);
        let piece = match choice {
            0 => {
                let n = rng.random_range(1..=3);
                let r = random_preorder(n, rng);
                let symmetric = (0..n).all(|p| (0..n).all(|q| r[p][q] == r[q][p]));
                let a = incidence(cat, &r)?;
                (a, symmetric)
            }
            1 => {
                let k = rng.random_range(2..=3);
                (AlgebraObject::truncated_polynomial(cat, k)?, false)
            }
            2 => {
                let n = if rng.random_bool(0.3) { 2 } else { 1 };
                (semisimple(cat, &[n], |_| 1.0)?, true)
            }
            _ => {
                // C[x, y] / (x, y)²
                let mut m = Matrix::zeros(3, 9);
                m[(0, 0)] = ONE;
                m[(1, 1)] = ONE;
                m[(1, 3)] = ONE;
                m[(2, 2)] = ONE;
                m[(2, 6)] = ONE;
                let mut iota = Matrix::zeros(3, 1);
                iota[(0, 0)] = ONE;
                (AlgebraObject::from_matrices(cat, &cat.trivial_rep(3)?, m, iota)?, false)
            }
        };
        if piece.0.dim() > room {
            if parts.is_empty() {
                continue;
            }
            break;
        }
        room -= piece.0.dim();
        separable &= piece.1;
        parts.push(piece.0);
        if room == 0 || rng.random_bool(0.5) {
            break;
        }
    }
    let a = if parts.len() == 1 {
        parts.pop().expect("one part")
    } else {
        direct_sum_algebra(cat, &parts)?
    };
    Ok((a, separable))
}

/// Splits `key=value` words.
pub fn parse_params<S: AsRef<str>>(words: &[S]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for w in words {
        let w = w.as_ref();
        let (k, v) = w.split_once('=').ok_or_else(|| Error::Parse {
            location: "params".into(),
            message: format!("expected key=value, found `{w}`"),
        })?;
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(bad_param(k, "given twice"));
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests;

//! The family of transitive IIA constitutions: normal forms, membership,
//! single-voter classification and projection onto the family.
//!
//! A member orders its alternatives in blocks `A_1 > A_2 > … > A_r`; a
//! block of three or more alternatives follows one voter (or that voter's
//! reversal), a two-alternative block may use any non-constant function, and
//! everything between blocks is fixed.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::boolfn::{nearest_simple_biased, BooleanFunction, SimpleFunction};
use crate::constitution::{find_paradox_profile, is_transitive, mask_is_transitive, Constitution};
use crate::distribution::VoteDistribution;
use crate::enumerate::check_budget;
use crate::error::{Error, Result};
use crate::io::TruthTableFile;
use crate::quantity::Quantity;
use crate::ranking::{all_rankings, canonical_pairs, pair_index, Profile, Ranking, RankingTable};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// Every pair inside the block follows `sign · x_voter`.
    Dictator { voter: usize, sign: i8 },
    /// The block's canonical pair function; never constant.
    FreePair(BooleanFunction),
    Singleton,
}

/// The normal form of a family member.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FamilyStructure {
    k: usize,
    n: usize,
    /// Top block first; alternatives sorted within a block.
    blocks: Vec<Vec<usize>>,
    kinds: Vec<BlockKind>,
}

impl FamilyStructure {
    pub fn new(k: usize, n: usize, blocks: Vec<Vec<usize>>, kinds: Vec<BlockKind>) -> Result<Self> {
        if blocks.len() != kinds.len() {
            return Err(Error::ShapeMismatch("one kind per block".into()));
        }
        let mut seen = vec![false; k];
        for alt in blocks.iter().flatten() {
            if *alt >= k || std::mem::replace(&mut seen[*alt], true) {
                return Err(Error::InvalidParameter("blocks must partition the alternatives".into()));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParameter("blocks must partition the alternatives".into()));
        }
        for (block, kind) in blocks.iter().zip(&kinds) {
            let ok = match (block.len(), kind) {
                (1, BlockKind::Singleton) => true,
                (2, BlockKind::FreePair(f)) => f.n() == n && f.constant_value().is_none(),
                (s, BlockKind::Dictator { voter, sign }) => s >= 3 && *voter < n && sign.abs() == 1,
                _ => false,
            };
            if !ok {
                return Err(Error::InvalidParameter(format!("block {block:?} cannot have kind {kind:?}")));
            }
        }
        let blocks = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        Ok(FamilyStructure { k, n, blocks, kinds })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn kinds(&self) -> &[BlockKind] {
        &self.kinds
    }

    /// Block sizes from the top, e.g. `"2+1"`.
    pub fn shape(&self) -> String {
        self.blocks.iter().map(|b| b.len().to_string()).collect::<Vec<_>>().join("+")
    }

    pub fn to_constitution(&self) -> Result<Constitution> {
        let mut block_of = vec![0; self.k];
        for (s, block) in self.blocks.iter().enumerate() {
            for &alt in block {
                block_of[alt] = s;
            }
        }
        let n = self.n;
        Constitution::from_fn(self.k, n, |a, b| {
            let (sa, sb) = (block_of[a], block_of[b]);
            if sa != sb {
                return BooleanFunction::constant(n, if sa < sb { 1 } else { -1 }).expect("n validated");
            }
            match &self.kinds[sa] {
                BlockKind::Dictator { voter, sign } => BooleanFunction::dictator(n, *voter, *sign).expect("voter validated"),
                BlockKind::FreePair(f) => f.clone(),
                BlockKind::Singleton => unreachable!("a singleton block holds no pair"),
            }
        })
    }
}

impl Serialize for FamilyStructure {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let kinds: Vec<serde_json::Value> = self
            .kinds
            .iter()
            .zip(&self.blocks)
            .map(|(kind, block)| match kind {
                BlockKind::Dictator { voter, sign } => {
                    serde_json::json!({"type": "dictator", "voter": voter, "sign": sign})
                }
                BlockKind::FreePair(f) => serde_json::json!({
                    "type": "free_pair",
                    "pair": [block[0], block[1]],
                    "table": TruthTableFile::boolean(f),
                }),
                BlockKind::Singleton => serde_json::json!({"type": "singleton"}),
            })
            .collect();
        let mut s = serializer.serialize_struct("FamilyStructure", 2)?;
        s.serialize_field("blocks", &self.blocks)?;
        s.serialize_field("kinds", &kinds)?;
        s.end()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Membership {
    Member(FamilyStructure),
    /// A profile on which the constitution is not transitive.
    NotInFamily(Profile),
}

impl Membership {
    pub fn structure(&self) -> Option<&FamilyStructure> {
        match self {
            Membership::Member(s) => Some(s),
            Membership::NotInFamily(_) => None,
        }
    }
}

/// A paradox profile, if any, found by checking each 3-subset of
/// alternatives separately (a tournament is transitive iff all its triples
/// are). The witness for a triple is lifted by ranking the remaining
/// alternatives below it in increasing order.
fn find_paradox_by_triples(f: &Constitution, budget: u64) -> Result<Option<Profile>> {
    let k = f.k();
    if k < 3 {
        return Ok(None);
    }
    check_budget(6, f.n(), budget)?;
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                let triple = [a, b, c];
                let Some(p3) = find_paradox_profile(&f.restrict(&triple)?, budget)? else { continue };
                let voters = p3
                    .voters()
                    .iter()
                    .map(|r| {
                        let mut order: Vec<usize> = r.order().into_iter().map(|x| triple[x]).collect();
                        order.extend((0..k).filter(|x| !triple.contains(x)));
                        Ranking::from_order(&order)
                    })
                    .collect::<Result<Vec<_>>>()?;
                return Ok(Some(Profile::new(voters)?));
            }
        }
    }
    Ok(None)
}

fn normal_form_violation(detail: String) -> Error {
    Error::ConstructionFailed(format!("transitive constitution has no normal form: {detail}"))
}

/// Membership in the family, with the normal form or a paradox profile.
///
/// Membership is a property of all profiles, so no vote distribution is
/// involved; the budget caps the `6^n` profiles examined per triple.
pub fn structure_of(f: &Constitution, budget: u64) -> Result<Membership> {
    if let Some(p) = find_paradox_by_triples(f, budget)? {
        debug_assert!(!is_transitive(&f.evaluate(&p)?));
        return Ok(Membership::NotInFamily(p));
    }
    let (k, n) = (f.k(), f.n());
    let pairs = canonical_pairs(k);
    let funcs = f.pair_functions();

    // Blocks: connected components of the non-constant pairs.
    let mut parent: Vec<usize> = (0..k).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (p, &(a, b)) in pairs.iter().enumerate() {
        if funcs[p].constant_value().is_none() {
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for alt in 0..k {
        let r = root(&mut parent, alt);
        groups.entry(r).or_default().push(alt);
    }
    let mut blocks: Vec<Vec<usize>> = groups.into_values().collect();

    // Between blocks every pair is constant; order by how many alternatives a block beats.
    let beats = |a: usize, b: usize| {
        let v = funcs[pair_index(k, a, b)].constant_value();
        if a < b {
            v == Some(1)
        } else {
            v == Some(-1)
        }
    };
    let wins = |block: &Vec<usize>| block.iter().map(|&a| (0..k).filter(|&b| b != a && beats(a, b)).count()).sum::<usize>() as f64 / block.len() as f64;
    blocks.sort_by(|x, y| wins(y).total_cmp(&wins(x)));
    for s in 0..blocks.len() {
        for t in s + 1..blocks.len() {
            for &a in &blocks[s] {
                for &b in &blocks[t] {
                    if !beats(a, b) {
                        return Err(normal_form_violation(format!("{a} is not always above {b}")));
                    }
                }
            }
        }
    }

    let kinds = blocks
        .iter()
        .map(|block| match block.len() {
            1 => Ok(BlockKind::Singleton),
            2 => Ok(BlockKind::FreePair(funcs[pair_index(k, block[0], block[1])].clone())),
            _ => {
                let first = &funcs[pair_index(k, block[0], block[1])];
                let dictator = SimpleFunction::candidates(n)
                    .into_iter()
                    .filter_map(|c| match c {
                        SimpleFunction::Dictator { voter, sign } => Some((voter, sign)),
                        SimpleFunction::Constant(_) => None,
                    })
                    .find(|&(voter, sign)| first == &BooleanFunction::dictator(n, voter, sign).expect("voter < n"))
                    .ok_or_else(|| normal_form_violation(format!("block {block:?} is not a dictator")))?;
                let g = BooleanFunction::dictator(n, dictator.0, dictator.1)?;
                for (x, &a) in block.iter().enumerate() {
                    for &b in &block[x + 1..] {
                        if funcs[pair_index(k, a, b)] != g {
                            return Err(normal_form_violation(format!("block {block:?} mixes dictators")));
                        }
                    }
                }
                Ok(BlockKind::Dictator { voter: dictator.0, sign: dictator.1 })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Membership::Member(FamilyStructure::new(k, n, blocks, kinds)?))
}

/// Ordered set partitions of `items`.
fn ordered_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    // Choose the top block as any nonempty subset.
    for mask in 1..(1usize << items.len()) {
        let top: Vec<usize> = (0..items.len()).filter(|i| mask >> i & 1 == 1).map(|i| items[i]).collect();
        let rest: Vec<usize> = (0..items.len()).filter(|i| mask >> i & 1 == 0).map(|i| items[i]).collect();
        for mut tail in ordered_partitions(&rest) {
            tail.insert(0, top.clone());
            out.push(tail);
        }
    }
    out
}

fn non_constant_functions(n: usize) -> Result<Vec<BooleanFunction>> {
    if n > 4 {
        return Err(Error::InvalidParameter(format!("free pair blocks enumerate all functions; n = {n} is too large")));
    }
    let len = 1u64 << n;
    let total = 1u64 << len;
    (1..total - 1).map(|code| BooleanFunction::from_fn(n, |x| code >> x & 1 == 1)).collect()
}

/// Every member of the family, generated from normal forms.
pub fn generate_family(k: usize, n: usize, budget: u64) -> Result<Vec<FamilyStructure>> {
    let free = if k >= 2 { non_constant_functions(n)? } else { Vec::new() };
    let partitions = ordered_partitions(&(0..k).collect::<Vec<_>>());
    let count: u128 = partitions
        .iter()
        .map(|blocks| {
            blocks
                .iter()
                .map(|b| match b.len() {
                    1 => 1u128,
                    2 => free.len() as u128,
                    _ => 2 * n as u128,
                })
                .product::<u128>()
        })
        .sum();
    if count > budget as u128 {
        return Err(Error::BudgetExceeded { required: count, budget });
    }
    let mut out = Vec::with_capacity(count as usize);
    for blocks in partitions {
        let options: Vec<Vec<BlockKind>> = blocks
            .iter()
            .map(|b| match b.len() {
                1 => vec![BlockKind::Singleton],
                2 => free.iter().cloned().map(BlockKind::FreePair).collect(),
                _ => (0..n)
                    .flat_map(|voter| [1, -1].map(|sign| BlockKind::Dictator { voter, sign }))
                    .collect(),
            })
            .collect();
        let mut choice = vec![0usize; blocks.len()];
        'outer: loop {
            let kinds = choice.iter().zip(&options).map(|(&c, o)| o[c].clone()).collect();
            out.push(FamilyStructure::new(k, n, blocks.clone(), kinds)?);
            for (c, o) in choice.iter_mut().zip(&options) {
                *c += 1;
                if *c < o.len() {
                    continue 'outer;
                }
                *c = 0;
            }
            break;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyEnumeration {
    pub k: usize,
    pub n: usize,
    /// Number of IIA constitutions checked exhaustively, when feasible.
    pub iia_total: Option<u64>,
    pub transitive: Option<u64>,
    pub generated: u64,
    /// Whether the exhaustive survivors equal the generated set.
    pub sets_equal: Option<bool>,
    /// Generated members by block shape.
    pub shapes: BTreeMap<String, u64>,
    /// Every generated member is paradox-free and its normal form round-trips.
    pub generated_verified: bool,
}

/// The transitive IIA constitutions on three alternatives, enumerated from
/// normal forms and, when `(2^{2^n})^3 · 6^n` fits the budget, cross-checked
/// against an exhaustive filter of all IIA constitutions.
pub fn enumerate_family(n: usize, budget: u64) -> Result<FamilyEnumeration> {
    let k = 3;
    let members = generate_family(k, n, budget)?;
    let generated_verified = members.par_iter().all(|s| {
        s.to_constitution()
            .and_then(|f| structure_of(&f, budget))
            .map(|m| m.structure() == Some(s))
            .unwrap_or(false)
    });
    let mut shapes = BTreeMap::new();
    for s in &members {
        *shapes.entry(s.shape()).or_insert(0) += 1;
    }

    let tables = 1u128 << (1u32 << n.min(6));
    let iia = if n <= 4 { tables.checked_pow(3) } else { None };
    let work = iia.and_then(|t| t.checked_mul(6u128.pow(n as u32)));
    let (iia_total, transitive, sets_equal) = match (iia, work) {
        (Some(total), Some(w)) if w <= budget as u128 => {
            let survivors = transitive_iia(n, total as u64)?;
            let generated: HashSet<Constitution> =
                members.iter().map(FamilyStructure::to_constitution).collect::<Result<_>>()?;
            let equal = survivors.len() == generated.len() && survivors.iter().all(|f| generated.contains(f));
            (Some(total as u64), Some(survivors.len() as u64), Some(equal))
        }
        _ => (None, None, None),
    };
    Ok(FamilyEnumeration {
        k,
        n,
        iia_total,
        transitive,
        generated: members.len() as u64,
        sets_equal,
        shapes,
        generated_verified,
    })
}

/// All `k = 3` IIA constitutions on `n` voters that are transitive on every
/// profile.
pub fn transitive_iia(n: usize, total: u64) -> Result<HashSet<Constitution>> {
    let table = RankingTable::new(3);
    let per_table = 1u64 << (1u32 << n);
    // Per-profile pair indices, shared by every candidate.
    let profiles: Vec<[usize; 3]> = (0..6usize.pow(n as u32))
        .map(|code| {
            let mut idx = [0usize; 3];
            for m in 0..n {
                let mask = table.pair_mask(code / 6usize.pow(m as u32) % 6);
                for (p, slot) in idx.iter_mut().enumerate() {
                    *slot |= ((mask >> p & 1) as usize) << m;
                }
            }
            idx
        })
        .collect();
    let found: Vec<Constitution> = (0..total)
        .into_par_iter()
        .filter_map(|code| {
            let t = [code % per_table, code / per_table % per_table, code / per_table / per_table];
            let ok = profiles.iter().all(|idx| {
                let mask = (0..3).fold(0u64, |m, p| m | (t[p] >> idx[p] & 1) << p);
                mask_is_transitive(3, mask)
            });
            ok.then(|| {
                let pairs = t.iter().map(|&c| BooleanFunction::from_fn(n, |x| c >> x & 1 == 1).expect("small n")).collect();
                Constitution::new(3, n, pairs).expect("shape")
            })
        })
        .collect();
    Ok(found.into_iter().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    Top,
    Bottom,
}

/// The four kinds of transitive single-voter constitutions on three
/// alternatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SingleVoterClass {
    Constant(Ranking),
    /// `alternative` is always at `position`; the other pair follows
    /// `sign · x`.
    TopOrBottomFixed { alternative: usize, position: Position, pair: (usize, usize), sign: i8 },
    Identity,
    Antidictator,
}

pub fn classify_single_voter(f: &Constitution) -> Result<SingleVoterClass> {
    if f.k() != 3 {
        return Err(Error::UnsupportedK { k: f.k(), expected: 3 });
    }
    if f.n() != 1 {
        return Err(Error::ShapeMismatch(format!("single-voter classification needs n = 1, got {}", f.n())));
    }
    let mut outcomes = Vec::with_capacity(6);
    for r in all_rankings(3) {
        let t = f.evaluate(&Profile::new(vec![r.clone()])?)?;
        match t.ranking() {
            Some(out) => outcomes.push(out),
            None => return Err(Error::NotTransitive { ranking: r.order() }),
        }
    }
    let funcs = f.pair_functions();
    let ident = BooleanFunction::dictator(1, 0, 1)?;
    let anti = BooleanFunction::dictator(1, 0, -1)?;
    if funcs.iter().all(|g| g.constant_value().is_some()) {
        return Ok(SingleVoterClass::Constant(outcomes[0].clone()));
    }
    if funcs.iter().all(|g| *g == ident) {
        return Ok(SingleVoterClass::Identity);
    }
    if funcs.iter().all(|g| *g == anti) {
        return Ok(SingleVoterClass::Antidictator);
    }
    for c in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&x| x != c).collect();
        let position = if outcomes.iter().all(|o| o.rank(c) == 0) {
            Position::Top
        } else if outcomes.iter().all(|o| o.rank(c) == 2) {
            Position::Bottom
        } else {
            continue;
        };
        let g = &funcs[pair_index(3, others[0], others[1])];
        let sign = if *g == ident {
            1
        } else if *g == anti {
            -1
        } else {
            continue;
        };
        return Ok(SingleVoterClass::TopOrBottomFixed { alternative: c, position, pair: (others[0], others[1]), sign });
    }
    Err(normal_form_violation("single-voter constitution fits none of the four cases".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairProjection {
    pub pair: (usize, usize),
    pub candidate: String,
    /// Distance to the nearest candidate under the pair's bit distribution.
    pub candidate_distance: f64,
    pub replaced: bool,
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub projected: Constitution,
    /// Exact when the vote distribution is rational.
    pub distance: Quantity,
    pub radius: f64,
    pub pairs: Vec<PairProjection>,
    pub membership: Membership,
}

pub fn describe_simple(c: SimpleFunction) -> String {
    match c {
        SimpleFunction::Constant(s) => format!("constant({s:+})"),
        SimpleFunction::Dictator { voter, sign: 1 } => format!("x_{voter}"),
        SimpleFunction::Dictator { voter, .. } => format!("-x_{voter}"),
    }
}

/// Replaces each pair function by its nearest constant or (negated)
/// dictator when that candidate lies within `10 ε`, then reports the exact
/// `D(F, G)` and whether `G` belongs to the family.
pub fn project_to_family(f: &Constitution, epsilon: f64, mu: &VoteDistribution, budget: u64) -> Result<Projection> {
    if f.k() < 3 {
        return Err(Error::TooFewAlternatives(f.k()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    let radius = 10.0 * epsilon;
    let mut g = f.clone();
    let mut pairs = Vec::new();
    for (p, (a, b)) in canonical_pairs(f.k()).into_iter().enumerate() {
        let p_plus = (1.0 + mu.pair_marginal(a, b).to_f64()) / 2.0;
        let (candidate, d) = nearest_simple_biased(&f.pair_functions()[p], p_plus);
        let replaced = d <= radius;
        if replaced {
            g.set_pair(a, b, candidate.to_boolean(f.n())?)?;
        }
        pairs.push(PairProjection { pair: (a, b), candidate: describe_simple(candidate), candidate_distance: d, replaced });
    }
    let distance = f.distance(&g, mu, budget)?;
    let membership = structure_of(&g, budget)?;
    Ok(Projection { projected: g, distance, radius, pairs, membership })
}

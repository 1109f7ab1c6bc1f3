//! The compressed multi-view graph and block-level mass bookkeeping.
//!
//! Each attribute induces one *view*: a similarity graph whose edge weight
//! between two entities is the summed IEF weight of their shared values in
//! that attribute. Views are never materialized as adjacency matrices;
//! instead each view keeps a value→entities index and an entity→values index,
//! and all mass queries run through per-value frequency counts:
//!
//! ```text
//! mass(block, view) = Σ_value ief(value) · J(value) · (J(value) − 1) / 2
//! ```
//!
//! where `J(value)` counts block members carrying the value. Pair counting is
//! over *unordered* pairs throughout, matching the volume convention
//! `v = n(n−1)/2`.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use thiserror::Error;

use crate::ingest::{AttributeTable, IefWeights};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown entity index {0}")]
    UnknownEntity(usize),
    #[error("unknown view index {0}")]
    UnknownView(usize),
    #[error("pair weight requires two distinct entities")]
    IdenticalPair,
    #[error("node {0} is already in the block")]
    AlreadyMember(usize),
    #[error("node {0} is not in the block")]
    NotMember(usize),
    #[error("snapshot: bad magic bytes")]
    SnapshotMagic,
    #[error("snapshot: unsupported version {0} (expected {expected})", expected = SNAPSHOT_VERSION)]
    SnapshotVersion(u32),
    #[error("snapshot: truncated or corrupt stream")]
    SnapshotCorrupt,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One view: the similarity structure induced by a single attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct View {
    name: String,
    /// Value tokens, sorted; a value id is a position in this vector.
    tokens: Vec<String>,
    /// IEF weight per value id.
    ief: Vec<f64>,
    /// Sorted entity indices carrying each value id.
    value_entities: Vec<Vec<u32>>,
    /// Sorted value ids carried by each entity.
    entity_values: Vec<Vec<u32>>,
    /// Value ids carried by at least two entities.
    shared_values: Vec<u32>,
    /// Total view mass C.
    mass: f64,
}

impl View {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn value_count(&self) -> usize {
        self.tokens.len()
    }

    pub fn token(&self, value: u32) -> &str {
        &self.tokens[value as usize]
    }

    pub fn ief(&self, value: u32) -> f64 {
        self.ief[value as usize]
    }

    /// Entities carrying a value, ascending.
    pub fn entities_of(&self, value: u32) -> &[u32] {
        &self.value_entities[value as usize]
    }

    /// Values carried by an entity, ascending.
    pub fn values_of(&self, entity: usize) -> &[u32] {
        &self.entity_values[entity]
    }

    /// Values carried by at least two entities, ascending.
    pub fn shared_values(&self) -> &[u32] {
        &self.shared_values
    }

    /// Entity frequency of every value, in value-id order.
    pub fn value_frequencies(&self) -> impl Iterator<Item = usize> + '_ {
        self.value_entities.iter().map(|post| post.len())
    }
}

/// Multi-view graph over `N` entities and `K` attribute views.
///
/// Immutable after construction; meant to be shared read-only across worker
/// threads while each worker owns its own [`BlockState`].
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewGraph {
    entity_ids: Vec<String>,
    id_index: HashMap<String, usize>,
    views: Vec<View>,
}

/// Build the per-view indexes and total masses from a weighted table.
///
/// `ief` must come from the same table (or at least cover its attributes in
/// the same order). Values with zero weight are dropped entirely: a
/// stopworded overlap produces no edge. View masses are computed through the
/// frequency identity, never by pairwise enumeration, accumulating in sorted
/// token order so rebuilds are bit-for-bit reproducible.
pub fn build_graph(table: &AttributeTable, ief: &IefWeights) -> MultiViewGraph {
    assert_eq!(
        table.attribute_count(),
        ief.attribute_count(),
        "weights must cover the table's attributes"
    );
    let n = table.entity_count();
    let mut views = Vec::with_capacity(table.attribute_count());
    for (attribute, name) in table.attributes().iter().enumerate() {
        let mut postings: HashMap<&str, Vec<u32>> = HashMap::new();
        for entity in 0..n {
            for token in table.values(entity, attribute) {
                postings.entry(token.as_str()).or_default().push(entity as u32);
            }
        }
        let mut tokens: Vec<&str> = postings
            .keys()
            .copied()
            .filter(|t| ief.weight(attribute, t) > 0.0)
            .collect();
        tokens.sort_unstable();

        let mut value_entities = Vec::with_capacity(tokens.len());
        let mut weights = Vec::with_capacity(tokens.len());
        let mut shared_values = Vec::new();
        let mut entity_values = vec![Vec::new(); n];
        let mut mass = 0.0;
        for (value_id, token) in tokens.iter().enumerate() {
            let entities = postings.remove(*token).expect("token came from postings");
            let weight = ief.weight(attribute, token);
            let freq = entities.len() as f64;
            mass += weight * freq * (freq - 1.0) / 2.0;
            if entities.len() >= 2 {
                shared_values.push(value_id as u32);
            }
            for &entity in &entities {
                entity_values[entity as usize].push(value_id as u32);
            }
            value_entities.push(entities);
            weights.push(weight);
        }
        views.push(View {
            name: name.clone(),
            tokens: tokens.into_iter().map(str::to_string).collect(),
            ief: weights,
            value_entities,
            entity_values,
            shared_values,
            mass,
        });
    }
    let id_index = table
        .entity_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), i))
        .collect();
    MultiViewGraph {
        entity_ids: table.entity_ids().to_vec(),
        id_index,
        views,
    }
}

impl MultiViewGraph {
    pub fn entity_count(&self) -> usize {
        self.entity_ids.len()
    }

    pub fn view_count(&self) -> usize {
        self.views.len()
    }

    pub fn entity_id(&self, entity: usize) -> &str {
        &self.entity_ids[entity]
    }

    pub fn entity_index(&self, id: &str) -> Option<usize> {
        self.id_index.get(id).copied()
    }

    pub fn view(&self, view: usize) -> &View {
        &self.views[view]
    }

    pub fn views(&self) -> &[View] {
        &self.views
    }

    pub fn view_named(&self, name: &str) -> Option<usize> {
        self.views.iter().position(|v| v.name == name)
    }

    /// Graph volume `V = N(N−1)/2`.
    pub fn volume(&self) -> f64 {
        let n = self.entity_count() as f64;
        n * (n - 1.0) / 2.0
    }

    /// Total mass `C` of one view.
    pub fn view_mass(&self, view: usize) -> f64 {
        self.views[view].mass
    }

    /// Background density `P = C/V` of one view (0 when the graph has fewer
    /// than two entities).
    pub fn view_density(&self, view: usize) -> f64 {
        let volume = self.volume();
        if volume == 0.0 {
            0.0
        } else {
            self.views[view].mass / volume
        }
    }

    /// A view is eligible for seeding and selection only if it has any mass.
    pub fn is_eligible(&self, view: usize) -> bool {
        self.views[view].mass > 0.0
    }

    /// Indices of eligible views, ascending.
    pub fn eligible_views(&self) -> Vec<usize> {
        (0..self.views.len())
            .filter(|&i| self.is_eligible(i))
            .collect()
    }

    /// Edge weight between two distinct entities in one view: the summed IEF
    /// weight of their shared values (0 when they share nothing).
    pub fn pair_weight(&self, view: usize, a: usize, b: usize) -> Result<f64, GraphError> {
        if view >= self.views.len() {
            return Err(GraphError::UnknownView(view));
        }
        let n = self.entity_count();
        if a >= n {
            return Err(GraphError::UnknownEntity(a));
        }
        if b >= n {
            return Err(GraphError::UnknownEntity(b));
        }
        if a == b {
            return Err(GraphError::IdenticalPair);
        }
        let v = &self.views[view];
        let (mut lhs, mut rhs) = (v.values_of(a).iter(), v.values_of(b).iter());
        let (mut x, mut y) = (lhs.next(), rhs.next());
        let mut sum = 0.0;
        while let (Some(&vx), Some(&vy)) = (x, y) {
            match vx.cmp(&vy) {
                std::cmp::Ordering::Less => x = lhs.next(),
                std::cmp::Ordering::Greater => y = rhs.next(),
                std::cmp::Ordering::Equal => {
                    sum += v.ief(vx);
                    x = lhs.next();
                    y = rhs.next();
                }
            }
        }
        Ok(sum)
    }

    /// Mass of an arbitrary node set in one view, via the frequency identity.
    ///
    /// Runs in time linear in the block's total value count, independent of
    /// the pair count.
    pub fn block_mass(&self, nodes: &[usize], view: usize) -> Result<f64, GraphError> {
        if view >= self.views.len() {
            return Err(GraphError::UnknownView(view));
        }
        let v = &self.views[view];
        let mut freq: HashMap<u32, u32> = HashMap::new();
        for &node in nodes {
            if node >= self.entity_count() {
                return Err(GraphError::UnknownEntity(node));
            }
            for &value in v.values_of(node) {
                *freq.entry(value).or_insert(0) += 1;
            }
        }
        let mut values: Vec<u32> = freq.keys().copied().collect();
        values.sort_unstable();
        let mut mass = 0.0;
        for value in values {
            let count = freq[&value] as f64;
            mass += v.ief(value) * count * (count - 1.0) / 2.0;
        }
        Ok(mass)
    }
}

/// A candidate node set under search, with per-view value-frequency maps and
/// cached masses kept incrementally in sync.
///
/// Worker-local: one expansion owns one `BlockState`; the shared graph stays
/// read-only.
#[derive(Debug, Clone)]
pub struct BlockState {
    members: BTreeSet<u32>,
    /// Per view: value id → number of members carrying it.
    freq: Vec<HashMap<u32, u32>>,
    /// Per view: cached block mass c.
    mass: Vec<f64>,
}

impl BlockState {
    pub fn new(graph: &MultiViewGraph) -> Self {
        Self {
            members: BTreeSet::new(),
            freq: vec![HashMap::new(); graph.view_count()],
            mass: vec![0.0; graph.view_count()],
        }
    }

    pub fn from_nodes(graph: &MultiViewGraph, nodes: &[usize]) -> Result<Self, GraphError> {
        let mut state = Self::new(graph);
        for &node in nodes {
            state.add(graph, node)?;
        }
        Ok(state)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.members.contains(&(node as u32))
    }

    /// Member indices, ascending.
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().map(|&m| m as usize)
    }

    /// Block volume `v = n(n−1)/2`.
    pub fn volume(&self) -> f64 {
        let n = self.members.len() as f64;
        n * (n - 1.0) / 2.0
    }

    /// Cached mass of one view.
    pub fn mass(&self, view: usize) -> f64 {
        self.mass[view]
    }

    /// Block density `ρ = c/v` (0 while the block has fewer than two nodes).
    pub fn density(&self, view: usize) -> f64 {
        let volume = self.volume();
        if volume == 0.0 {
            0.0
        } else {
            self.mass[view] / volume
        }
    }

    /// Mass gained in `view` if `node` joined, without mutating.
    ///
    /// Every value the candidate shares with `J` current members contributes
    /// `ief · J` new pairs' worth of weight.
    pub fn add_delta(&self, graph: &MultiViewGraph, view: usize, node: usize) -> f64 {
        let v = graph.view(view);
        let freq = &self.freq[view];
        let mut delta = 0.0;
        for value in v.values_of(node) {
            if let Some(&count) = freq.get(value) {
                delta += v.ief(*value) * count as f64;
            }
        }
        delta
    }

    /// Mass lost in `view` if `node` left, without mutating.
    pub fn remove_delta(&self, graph: &MultiViewGraph, view: usize, node: usize) -> f64 {
        let v = graph.view(view);
        let freq = &self.freq[view];
        let mut delta = 0.0;
        for value in v.values_of(node) {
            if let Some(&count) = freq.get(value) {
                delta += v.ief(*value) * (count as f64 - 1.0);
            }
        }
        delta
    }

    /// Add a node, updating frequencies and cached masses incrementally.
    pub fn add(&mut self, graph: &MultiViewGraph, node: usize) -> Result<(), GraphError> {
        if node >= graph.entity_count() {
            return Err(GraphError::UnknownEntity(node));
        }
        if self.contains(node) {
            return Err(GraphError::AlreadyMember(node));
        }
        for (view_idx, view) in graph.views().iter().enumerate() {
            let freq = &mut self.freq[view_idx];
            let mut delta = 0.0;
            for &value in view.values_of(node) {
                let count = freq.entry(value).or_insert(0);
                delta += view.ief(value) * *count as f64;
                *count += 1;
            }
            self.mass[view_idx] += delta;
        }
        self.members.insert(node as u32);
        Ok(())
    }

    /// Remove a node; exact inverse of [`BlockState::add`].
    pub fn remove(&mut self, graph: &MultiViewGraph, node: usize) -> Result<(), GraphError> {
        if !self.contains(node) {
            return Err(GraphError::NotMember(node));
        }
        for (view_idx, view) in graph.views().iter().enumerate() {
            let freq = &mut self.freq[view_idx];
            let mut delta = 0.0;
            for &value in view.values_of(node) {
                let count = freq.get_mut(&value).expect("member value must be counted");
                *count -= 1;
                delta += view.ief(value) * *count as f64;
                if *count == 0 {
                    freq.remove(&value);
                }
            }
            self.mass[view_idx] -= delta;
        }
        self.members.remove(&(node as u32));
        Ok(())
    }

    /// Recompute every cached mass from scratch. Drift reference for tests
    /// and the search's final-consistency check.
    pub fn recompute_masses(&self, graph: &MultiViewGraph) -> Vec<f64> {
        let nodes: Vec<usize> = self.members().collect();
        (0..graph.view_count())
            .map(|view| graph.block_mass(&nodes, view).expect("members are valid"))
            .collect()
    }
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"MVGS";
const SNAPSHOT_VERSION: u32 = 1;

// Snapshot layout (all integers little-endian):
//   magic "MVGS" | version u32
//   entity count u64 | each id as len-prefixed utf-8 (u32 + bytes)
//   view count u64 | per view:
//     name (u32 + bytes)
//     value count u64 | per value:
//       token (u32 + bytes) | ief f64 bits | posting count u64 | entity u32 ×
// Entity→value indexes, shared-value lists and view masses are rebuilt on
// load, so a snapshot cannot go internally inconsistent.
impl MultiViewGraph {
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<(), GraphError> {
        out.write_all(SNAPSHOT_MAGIC)?;
        out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        write_u64(&mut out, self.entity_ids.len() as u64)?;
        for id in &self.entity_ids {
            write_str(&mut out, id)?;
        }
        write_u64(&mut out, self.views.len() as u64)?;
        for view in &self.views {
            write_str(&mut out, &view.name)?;
            write_u64(&mut out, view.tokens.len() as u64)?;
            for (value, token) in view.tokens.iter().enumerate() {
                write_str(&mut out, token)?;
                out.write_all(&view.ief[value].to_bits().to_le_bytes())?;
                write_u64(&mut out, view.value_entities[value].len() as u64)?;
                for &entity in &view.value_entities[value] {
                    out.write_all(&entity.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut input: R) -> Result<Self, GraphError> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic).map_err(map_eof)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(GraphError::SnapshotMagic);
        }
        let mut version = [0u8; 4];
        input.read_exact(&mut version).map_err(map_eof)?;
        let version = u32::from_le_bytes(version);
        if version != SNAPSHOT_VERSION {
            return Err(GraphError::SnapshotVersion(version));
        }
        let entity_count = read_u64(&mut input)? as usize;
        let mut entity_ids = Vec::with_capacity(entity_count);
        for _ in 0..entity_count {
            entity_ids.push(read_str(&mut input)?);
        }
        let view_count = read_u64(&mut input)? as usize;
        let mut views = Vec::with_capacity(view_count);
        for _ in 0..view_count {
            let name = read_str(&mut input)?;
            let value_count = read_u64(&mut input)? as usize;
            let mut tokens = Vec::with_capacity(value_count);
            let mut ief = Vec::with_capacity(value_count);
            let mut value_entities = Vec::with_capacity(value_count);
            let mut shared_values = Vec::new();
            let mut entity_values = vec![Vec::new(); entity_count];
            let mut mass = 0.0;
            for value in 0..value_count {
                tokens.push(read_str(&mut input)?);
                let mut bits = [0u8; 8];
                input.read_exact(&mut bits).map_err(map_eof)?;
                let weight = f64::from_bits(u64::from_le_bytes(bits));
                ief.push(weight);
                let posting_len = read_u64(&mut input)? as usize;
                let mut postings = Vec::with_capacity(posting_len);
                for _ in 0..posting_len {
                    let mut raw = [0u8; 4];
                    input.read_exact(&mut raw).map_err(map_eof)?;
                    let entity = u32::from_le_bytes(raw);
                    if entity as usize >= entity_count {
                        return Err(GraphError::SnapshotCorrupt);
                    }
                    postings.push(entity);
                }
                let freq = postings.len() as f64;
                mass += weight * freq * (freq - 1.0) / 2.0;
                if postings.len() >= 2 {
                    shared_values.push(value as u32);
                }
                for &entity in &postings {
                    entity_values[entity as usize].push(value as u32);
                }
                value_entities.push(postings);
            }
            views.push(View {
                name,
                tokens,
                ief,
                value_entities,
                entity_values,
                shared_values,
                mass,
            });
        }
        let id_index = entity_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        Ok(Self {
            entity_ids,
            id_index,
            views,
        })
    }
}

fn map_eof(err: std::io::Error) -> GraphError {
    if err.kind() == std::io::ErrorKind::UnexpectedEof {
        GraphError::SnapshotCorrupt
    } else {
        GraphError::Io(err)
    }
}

fn write_u64<W: Write>(out: &mut W, value: u64) -> std::io::Result<()> {
    out.write_all(&value.to_le_bytes())
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64, GraphError> {
    let mut raw = [0u8; 8];
    input.read_exact(&mut raw).map_err(map_eof)?;
    Ok(u64::from_le_bytes(raw))
}

fn write_str<W: Write>(out: &mut W, s: &str) -> std::io::Result<()> {
    out.write_all(&(s.len() as u32).to_le_bytes())?;
    out.write_all(s.as_bytes())
}

fn read_str<R: Read>(input: &mut R) -> Result<String, GraphError> {
    let mut raw = [0u8; 4];
    input.read_exact(&mut raw).map_err(map_eof)?;
    let len = u32::from_le_bytes(raw) as usize;
    let mut bytes = vec![0u8; len];
    input.read_exact(&mut bytes).map_err(map_eof)?;
    String::from_utf8(bytes).map_err(|_| GraphError::SnapshotCorrupt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{compute_ief, load_attribute_table, TableSchema};

    fn graph_from_csv(csv: &str) -> MultiViewGraph {
        let table = load_attribute_table(csv.as_bytes(), &TableSchema::default()).unwrap();
        let ief = compute_ief(&table).unwrap();
        build_graph(&table, &ief)
    }

    /// Quadratic reference: sum pair_weight over all unordered pairs.
    fn brute_force_mass(graph: &MultiViewGraph, nodes: &[usize], view: usize) -> f64 {
        let mut total = 0.0;
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                total += graph.pair_weight(view, nodes[i], nodes[j]).unwrap();
            }
        }
        total
    }

    #[test]
    fn triangle_mass_is_three_pairs() {
        let graph = graph_from_csv("id,ip\na,x\nb,x\nc,x\nd,other\n");
        let w = graph.view(0).ief(graph.view(0).shared_values()[0]);
        let mass = graph.block_mass(&[0, 1, 2], 0).unwrap();
        assert!((mass - 3.0 * w).abs() < 1e-12);
        // The whole-view mass only has those same three pairs.
        assert!((graph.view_mass(0) - 3.0 * w).abs() < 1e-12);
    }

    #[test]
    fn no_shared_values_means_empty_views() {
        let graph = graph_from_csv("id,a,b\ne1,1,x\ne2,2,y\ne3,3,z\n");
        for view in 0..graph.view_count() {
            assert_eq!(graph.view_mass(view), 0.0);
            assert!(!graph.is_eligible(view));
        }
        assert!(graph.eligible_views().is_empty());
    }

    #[test]
    fn view_mass_matches_pairwise_oracle() {
        // One value shared by 2 entities, another by 3, with overlapping members.
        let graph = graph_from_csv("id,a\ne1,p|q\ne2,p|q\ne3,q\ne4,\n");
        let all: Vec<usize> = (0..4).collect();
        let brute = brute_force_mass(&graph, &all, 0);
        assert!((graph.view_mass(0) - brute).abs() < 1e-12 * brute.max(1.0));
        // w(p)·1 pair + w(q)·3 pairs.
        let view = graph.view(0);
        let p = view.tokens.iter().position(|t| t == "p").unwrap() as u32;
        let q = view.tokens.iter().position(|t| t == "q").unwrap() as u32;
        let expect = view.ief(p) + 3.0 * view.ief(q);
        assert!((graph.view_mass(0) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn pair_weight_sums_shared_values() {
        let graph = graph_from_csv("id,a\ne1,x|y\ne2,x|y\ne3,x\n");
        let view = graph.view(0);
        let x = view.tokens.iter().position(|t| t == "x").unwrap() as u32;
        let y = view.tokens.iter().position(|t| t == "y").unwrap() as u32;
        let expect = view.ief(x) + view.ief(y);
        assert!((graph.pair_weight(0, 0, 1).unwrap() - expect).abs() < 1e-12);
        assert_eq!(graph.pair_weight(0, 1, 2).unwrap(), view.ief(x));
    }

    #[test]
    fn pair_weight_zero_when_disjoint() {
        let graph = graph_from_csv("id,a\ne1,x\ne2,y\n");
        assert_eq!(graph.pair_weight(0, 0, 1).unwrap(), 0.0);
    }

    #[test]
    fn pair_weight_rejects_bad_arguments() {
        let graph = graph_from_csv("id,a\ne1,x\ne2,x\n");
        assert!(matches!(
            graph.pair_weight(0, 0, 0),
            Err(GraphError::IdenticalPair)
        ));
        assert!(matches!(
            graph.pair_weight(0, 0, 9),
            Err(GraphError::UnknownEntity(9))
        ));
        assert!(matches!(
            graph.pair_weight(7, 0, 1),
            Err(GraphError::UnknownView(7))
        ));
    }

    #[test]
    fn stopworded_overlap_has_zero_weight() {
        use crate::ingest::{apply_stopwords, Stopwords};
        let csv = "id,a\ne1,common|rare1\ne2,common|rare2\n";
        let table = load_attribute_table(csv.as_bytes(), &TableSchema::default()).unwrap();
        let mut stop = Stopwords::empty();
        stop.insert("a", "common");
        let cleaned = apply_stopwords(&table, &stop);
        let ief = compute_ief(&cleaned).unwrap();
        let graph = build_graph(&cleaned, &ief);
        assert_eq!(graph.pair_weight(0, 0, 1).unwrap(), 0.0);
        assert_eq!(graph.view_mass(0), 0.0);
    }

    #[test]
    fn singleton_block_has_zero_mass_and_volume() {
        let graph = graph_from_csv("id,a\ne1,x\ne2,x\n");
        assert_eq!(graph.block_mass(&[0], 0).unwrap(), 0.0);
        let state = BlockState::from_nodes(&graph, &[0]).unwrap();
        assert_eq!(state.volume(), 0.0);
        assert_eq!(state.density(0), 0.0);
    }

    #[test]
    fn add_remove_round_trip_restores_state() {
        let graph = graph_from_csv("id,a,b\ne1,x|y,1\ne2,x,1\ne3,y,2\ne4,x|y,2\n");
        let mut state = BlockState::from_nodes(&graph, &[0, 1]).unwrap();
        let before: Vec<f64> = (0..graph.view_count()).map(|v| state.mass(v)).collect();
        state.add(&graph, 3).unwrap();
        state.remove(&graph, 3).unwrap();
        for (view, &mass) in before.iter().enumerate() {
            let diff = (state.mass(view) - mass).abs();
            assert!(diff <= 1e-9 * mass.abs().max(1.0));
        }
        assert_eq!(state.len(), 2);
    }

    #[test]
    fn add_rejects_member_and_remove_rejects_stranger() {
        let graph = graph_from_csv("id,a\ne1,x\ne2,x\n");
        let mut state = BlockState::from_nodes(&graph, &[0]).unwrap();
        assert!(matches!(
            state.add(&graph, 0),
            Err(GraphError::AlreadyMember(0))
        ));
        assert!(matches!(
            state.remove(&graph, 1),
            Err(GraphError::NotMember(1))
        ));
    }

    #[test]
    fn zero_overlap_add_leaves_masses_unchanged() {
        let graph = graph_from_csv("id,a\ne1,x\ne2,x\ne3,z\n");
        let mut state = BlockState::from_nodes(&graph, &[0, 1]).unwrap();
        let before = state.mass(0);
        state.add(&graph, 2).unwrap();
        assert_eq!(state.mass(0), before);
        assert_eq!(state.len(), 3);
        assert_eq!(state.volume(), 3.0);
    }

    #[test]
    fn deltas_match_actual_moves() {
        let graph = graph_from_csv("id,a,b\ne1,x|y,1\ne2,x,1|2\ne3,y|z,2\ne4,x|z,1\n");
        let mut state = BlockState::from_nodes(&graph, &[0, 2]).unwrap();
        for view in 0..graph.view_count() {
            let predicted = state.add_delta(&graph, view, 3);
            let before = state.mass(view);
            state.add(&graph, 3).unwrap();
            assert!((state.mass(view) - before - predicted).abs() < 1e-12);
            let predicted_back = state.remove_delta(&graph, view, 3);
            state.remove(&graph, 3).unwrap();
            assert!((predicted_back - predicted).abs() < 1e-12);
        }
    }

    #[test]
    fn whole_graph_block_mass_equals_view_mass() {
        let graph = graph_from_csv("id,a,b\ne1,x|y,1\ne2,x,1|2\ne3,y|z,2\ne4,x|z,1\ne5,,\n");
        let all: Vec<usize> = (0..graph.entity_count()).collect();
        for view in 0..graph.view_count() {
            let mass = graph.block_mass(&all, view).unwrap();
            let c = graph.view_mass(view);
            assert!((mass - c).abs() <= 1e-12 * c.max(1.0));
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let graph = graph_from_csv("id,a,b\ne1,x|y,1\ne2,x,1|2\ne3,y|z,2\ne4,x|z,1\n");
        let mut buffer = Vec::new();
        graph.write_snapshot(&mut buffer).unwrap();
        let restored = MultiViewGraph::read_snapshot(buffer.as_slice()).unwrap();
        assert_eq!(graph, restored);
    }

    #[test]
    fn snapshot_rejects_bad_magic_and_version() {
        let graph = graph_from_csv("id,a\ne1,x\ne2,x\n");
        let mut buffer = Vec::new();
        graph.write_snapshot(&mut buffer).unwrap();

        let mut wrong_magic = buffer.clone();
        wrong_magic[0] = b'X';
        assert!(matches!(
            MultiViewGraph::read_snapshot(wrong_magic.as_slice()),
            Err(GraphError::SnapshotMagic)
        ));

        let mut wrong_version = buffer.clone();
        wrong_version[4] = 99;
        assert!(matches!(
            MultiViewGraph::read_snapshot(wrong_version.as_slice()),
            Err(GraphError::SnapshotVersion(99))
        ));

        let truncated = &buffer[..buffer.len() - 3];
        assert!(matches!(
            MultiViewGraph::read_snapshot(truncated),
            Err(GraphError::SnapshotCorrupt)
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arbitrary_table() -> impl Strategy<Value = String> {
            // Up to 12 entities, 3 attributes, values drawn from a small pool
            // so overlaps are common.
            (2usize..12, proptest::collection::vec(0u8..6, 2..36)).prop_map(|(n, raw)| {
                let mut csv = String::from("id,a,b,c\n");
                let mut cursor = raw.iter().cycle();
                for entity in 0..n {
                    csv.push_str(&format!("e{entity}"));
                    for _ in 0..3 {
                        csv.push(',');
                        let count = *cursor.next().unwrap() % 4;
                        let vals: Vec<String> = (0..count)
                            .map(|_| format!("v{}", cursor.next().unwrap()))
                            .collect();
                        csv.push_str(&vals.join("|"));
                    }
                    csv.push('\n');
                }
                csv
            })
        }

        proptest! {
            #[test]
            fn block_mass_equals_brute_force(csv in arbitrary_table(), picks in proptest::collection::vec(0usize..12, 0..8)) {
                let graph = graph_from_csv(&csv);
                let nodes: Vec<usize> = {
                    let mut set: Vec<usize> = picks
                        .into_iter()
                        .map(|p| p % graph.entity_count())
                        .collect();
                    set.sort_unstable();
                    set.dedup();
                    set
                };
                for view in 0..graph.view_count() {
                    let fast = graph.block_mass(&nodes, view).unwrap();
                    let brute = brute_force_mass(&graph, &nodes, view);
                    prop_assert!((fast - brute).abs() <= 1e-12 * brute.max(1.0));
                }
            }

            #[test]
            fn adding_never_decreases_mass(csv in arbitrary_table()) {
                let graph = graph_from_csv(&csv);
                let mut state = BlockState::new(&graph);
                for node in 0..graph.entity_count() {
                    let before: Vec<f64> = (0..graph.view_count()).map(|v| state.mass(v)).collect();
                    state.add(&graph, node).unwrap();
                    for (view, &mass) in before.iter().enumerate() {
                        prop_assert!(state.mass(view) >= mass - 1e-12);
                    }
                }
            }
        }
    }
}

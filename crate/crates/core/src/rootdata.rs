//! Root data, affine diagrams with finite automorphism actions, and the
//! parahoric indexing set.
//!
//! Only the rank-1 data is load-bearing for the rest of the laboratory; the
//! other diagram types are table entries with golden tests. Automorphism
//! groups are computed by brute-force permutation search on the labeled
//! diagram, not read from a table.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A root datum with lattices Z^rank, roots in the character side, coroots in
/// the cocharacter side, and the pairing given by the dot product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootDatum {
    pub rank: usize,
    pub roots: Vec<Vec<i64>>,
    pub coroots: Vec<Vec<i64>>,
}

impl RootDatum {
    /// The sl2 datum: X* = Z with root 2, X_* = Z with coroot 1.
    pub fn sl2() -> Self {
        RootDatum { rank: 1, roots: vec![vec![2], vec![-2]], coroots: vec![vec![1], vec![-1]] }
    }

    /// The trivial datum of a torus of the given rank.
    pub fn torus(rank: usize) -> Self {
        RootDatum { rank, roots: Vec::new(), coroots: Vec::new() }
    }

    pub fn pairing(&self, root: &[i64], coroot: &[i64]) -> i64 {
        root.iter().zip(coroot).map(|(a, b)| a * b).sum()
    }

    /// Checks `<alpha, alpha^vee> = 2` and that each reflection permutes the
    /// root set.
    pub fn validate(&self) -> Result<()> {
        if self.roots.len() != self.coroots.len() {
            return Err(Error::Domain("roots and coroots must biject".into()));
        }
        for (a, av) in self.roots.iter().zip(&self.coroots) {
            if self.pairing(a, av) != 2 {
                return Err(Error::Domain(format!("<{a:?}, {av:?}> != 2")));
            }
        }
        for (_, av) in self.roots.iter().zip(&self.coroots) {
            for b in &self.roots {
                let refl: Vec<i64> = b
                    .iter()
                    .zip(self.reflect_direction(b, av))
                    .map(|(x, d)| x - d)
                    .collect();
                if !self.roots.contains(&refl) {
                    return Err(Error::Domain(format!("reflection of {b:?} leaves the root set")));
                }
            }
        }
        Ok(())
    }

    fn reflect_direction(&self, b: &[i64], av: &[i64]) -> Vec<i64> {
        let c = self.pairing(b, av);
        // s(b) = b - <b, a^vee> a, with a recovered as the root paired to av.
        let a = self
            .roots
            .iter()
            .zip(&self.coroots)
            .find(|(_, v)| *v == av)
            .map(|(r, _)| r.clone())
            .unwrap_or_else(|| vec![0; self.rank]);
        a.iter().map(|x| x * c).collect()
    }
}

/// Connected Dynkin types accepted by the diagram table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DynkinType {
    A(u8),
    B(u8),
    C(u8),
    D(u8),
    E(u8),
    F4,
    G2,
}

impl DynkinType {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::Domain(format!("unknown Dynkin type `{text}`"));
        if text == "F4" {
            return Ok(DynkinType::F4);
        }
        if text == "G2" {
            return Ok(DynkinType::G2);
        }
        let (letter, num) = text.split_at(1);
        let n: u8 = num.parse().map_err(|_| bad())?;
        match letter {
            "A" if n >= 1 => Ok(DynkinType::A(n)),
            "B" if n >= 2 => Ok(DynkinType::B(n)),
            "C" if n >= 2 => Ok(DynkinType::C(n)),
            "D" if n >= 3 => Ok(DynkinType::D(n)),
            "E" if (6..=8).contains(&n) => Ok(DynkinType::E(n)),
            _ => Err(bad()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            DynkinType::A(n) => format!("A{n}"),
            DynkinType::B(n) => format!("B{n}"),
            DynkinType::C(n) => format!("C{n}"),
            DynkinType::D(n) => format!("D{n}"),
            DynkinType::E(n) => format!("E{n}"),
            DynkinType::F4 => "F4".into(),
            DynkinType::G2 => "G2".into(),
        }
    }

    pub fn simple_node_count(&self) -> usize {
        match self {
            DynkinType::A(n) | DynkinType::B(n) | DynkinType::C(n) | DynkinType::D(n) | DynkinType::E(n) => {
                *n as usize
            }
            DynkinType::F4 => 4,
            DynkinType::G2 => 2,
        }
    }
}

/// A bond of the affine diagram. `label` is the bond multiplicity
/// (1 single, 2 double, 3 triple, 4 the A1-affine / twisted-A2 bond);
/// directed bonds record the arrow as `a -> b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub label: u8,
    pub directed: bool,
}

impl Edge {
    fn undirected(a: usize, b: usize, label: u8) -> Self {
        Edge { a: a.min(b), b: a.max(b), label, directed: false }
    }

    fn arrow(a: usize, b: usize, label: u8) -> Self {
        Edge { a, b, label, directed: true }
    }
}

/// Affine diagram: node 0 is the extended node, nodes `1..` index the
/// tame-inertia orbits of simple roots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineDiagram {
    pub name: String,
    pub node_count: usize,
    pub edges: Vec<Edge>,
}

impl AffineDiagram {
    fn edge_key(&self, perm: &[usize], e: &Edge) -> Edge {
        let (a, b) = (perm[e.a], perm[e.b]);
        if e.directed {
            Edge { a, b, label: e.label, directed: true }
        } else {
            Edge::undirected(a, b, e.label)
        }
    }

    fn is_automorphism(&self, perm: &[usize]) -> bool {
        let mut mapped: Vec<Edge> = self.edges.iter().map(|e| self.edge_key(perm, e)).collect();
        let mut orig = self.edges.clone();
        let key = |e: &Edge| (e.a, e.b, e.label, e.directed);
        mapped.sort_by_key(key);
        orig.sort_by_key(key);
        mapped == orig
    }

    /// All node permutations preserving labeled, directed bonds.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let n = self.node_count;
        assert!(n <= 10, "automorphism search is for desk-scale diagrams");
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..n).collect();
        permute_search(&mut perm, 0, &mut |p: &[usize]| {
            if self.is_automorphism(p) {
                out.push(p.to_vec());
            }
        });
        out.sort();
        out
    }

    /// Orbits of the nodes under a declared automorphism.
    pub fn node_orbits(&self, phi: &[usize]) -> Result<Vec<Vec<usize>>> {
        if phi.len() != self.node_count || !self.is_automorphism(phi) {
            return Err(Error::Domain(format!(
                "{phi:?} is not an automorphism of {}",
                self.name
            )));
        }
        let mut seen = vec![false; self.node_count];
        let mut orbits = Vec::new();
        for start in 0..self.node_count {
            if seen[start] {
                continue;
            }
            let mut orbit = Vec::new();
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                orbit.push(cur);
                cur = phi[cur];
            }
            orbit.sort();
            orbits.push(orbit);
        }
        Ok(orbits)
    }

    pub fn identity(&self) -> Vec<usize> {
        (0..self.node_count).collect()
    }
}

fn permute_search(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute_search(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

/// Builds the affine diagram `e-R(type)` for a legal `(type, e)` pair.
/// Node 0 is the extended node; for e > 1 the remaining nodes are the
/// tame-orbit classes of simple roots in the standard order.
pub fn build_affine_diagram(ty: DynkinType, e: u8) -> Result<AffineDiagram> {
    let bad = || Error::Domain(format!("({}, e={e}) is not in the affine diagram table", ty.label()));
    let name = if e == 1 { format!("{}~", ty.label()) } else { format!("{e}{}~", ty.label()) };
    let mut edges = Vec::new();
    let node_count;
    match (ty, e) {
        (DynkinType::A(1), 1) => {
            node_count = 2;
            edges.push(Edge::undirected(0, 1, 4));
        }
        (DynkinType::A(n), 1) => {
            let n = n as usize;
            node_count = n + 1;
            for i in 0..=n {
                edges.push(Edge::undirected(i, (i + 1) % (n + 1), 1));
            }
        }
        (DynkinType::B(n), 1) if n >= 3 => {
            let n = n as usize;
            node_count = n + 1;
            edges.push(Edge::undirected(0, 2, 1));
            edges.push(Edge::undirected(1, 2, 1));
            for i in 2..n - 1 {
                edges.push(Edge::undirected(i, i + 1, 1));
            }
            edges.push(Edge::arrow(n - 1, n, 2));
        }
        (DynkinType::C(n), 1) if n >= 2 => {
            let n = n as usize;
            node_count = n + 1;
            edges.push(Edge::arrow(0, 1, 2));
            for i in 1..n - 1 {
                edges.push(Edge::undirected(i, i + 1, 1));
            }
            edges.push(Edge::arrow(n, n - 1, 2));
        }
        (DynkinType::D(n), 1) if n >= 4 => {
            let n = n as usize;
            node_count = n + 1;
            edges.push(Edge::undirected(0, 2, 1));
            edges.push(Edge::undirected(1, 2, 1));
            for i in 2..n - 2 {
                edges.push(Edge::undirected(i, i + 1, 1));
            }
            edges.push(Edge::undirected(n - 2, n - 1, 1));
            edges.push(Edge::undirected(n - 2, n, 1));
        }
        (DynkinType::E(6), 1) => {
            node_count = 7;
            // chain 1-2-3-4-5 with 6 attached to 3 and the extended node on 6.
            for i in 1..5 {
                edges.push(Edge::undirected(i, i + 1, 1));
            }
            edges.push(Edge::undirected(3, 6, 1));
            edges.push(Edge::undirected(6, 0, 1));
        }
        (DynkinType::E(7), 1) => {
            node_count = 8;
            // 0-1-2-3-4-5-6 chain with 7 attached to 3.
            for i in 0..6 {
                edges.push(Edge::undirected(i, i + 1, 1));
            }
            edges.push(Edge::undirected(3, 7, 1));
        }
        (DynkinType::E(8), 1) => {
            node_count = 9;
            for i in 0..7 {
                edges.push(Edge::undirected(i, i + 1, 1));
            }
            edges.push(Edge::undirected(5, 8, 1));
        }
        (DynkinType::F4, 1) => {
            node_count = 5;
            edges.push(Edge::undirected(0, 1, 1));
            edges.push(Edge::undirected(1, 2, 1));
            edges.push(Edge::arrow(2, 3, 2));
            edges.push(Edge::undirected(3, 4, 1));
        }
        (DynkinType::G2, 1) => {
            node_count = 3;
            edges.push(Edge::undirected(0, 1, 1));
            edges.push(Edge::arrow(1, 2, 3));
        }
        (DynkinType::A(2), 2) => {
            node_count = 2;
            edges.push(Edge::arrow(0, 1, 4));
        }
        (DynkinType::A(n), 2) if n >= 3 => {
            let n = n as usize;
            let orbits = n.div_ceil(2);
            node_count = orbits + 1;
            if n % 2 == 0 {
                // A_{2k}^{(2)}: 0 <= 1 - 2 - ... - k with double bonds at both ends.
                edges.push(Edge::arrow(1, 0, 2));
                for i in 1..orbits - 1 {
                    edges.push(Edge::undirected(i, i + 1, 1));
                }
                edges.push(Edge::arrow(orbits - 1, orbits, 2));
            } else {
                // A_{2k-1}^{(2)}: fork 0,1 -> 2, chain, double bond at the end.
                edges.push(Edge::undirected(0, 2, 1));
                edges.push(Edge::undirected(1, 2, 1));
                for i in 2..orbits - 1 {
                    edges.push(Edge::undirected(i, i + 1, 1));
                }
                edges.push(Edge::arrow(orbits, orbits - 1, 2));
            }
        }
        (DynkinType::D(n), 2) if n >= 3 => {
            let n = n as usize;
            node_count = n;
            edges.push(Edge::arrow(0, 1, 2));
            for i in 1..n - 2 {
                edges.push(Edge::undirected(i, i + 1, 1));
            }
            edges.push(Edge::arrow(n - 1, n - 2, 2));
        }
        (DynkinType::E(6), 2) => {
            node_count = 5;
            edges.push(Edge::undirected(0, 1, 1));
            edges.push(Edge::undirected(1, 2, 1));
            edges.push(Edge::arrow(2, 3, 2));
            edges.push(Edge::undirected(3, 4, 1));
        }
        (DynkinType::D(4), 3) => {
            node_count = 3;
            edges.push(Edge::undirected(0, 1, 1));
            edges.push(Edge::arrow(1, 2, 3));
        }
        _ => return Err(bad()),
    }
    let d = AffineDiagram { name, node_count, edges };
    Ok(d)
}

/// A finite group given by an explicit multiplication table with element 0 the
/// identity, playing the role of the Galois group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumeratedGroup {
    pub table: Vec<Vec<usize>>,
}

impl EnumeratedGroup {
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        EnumeratedGroup { table }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        for (i, row) in self.table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Domain("ragged multiplication table".into()));
            }
            if row[0] != i || self.table[0][i] != i {
                return Err(Error::Domain("element 0 must be the identity".into()));
            }
        }
        // closure under composition and associativity on the table
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.table[self.table[i][j]][k] != self.table[i][self.table[j][k]] {
                        return Err(Error::Domain("multiplication table is not associative".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One Dynkin component orbit representative with its affine diagram and the
/// chosen unramified action on it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentChoice {
    pub diagram: AffineDiagram,
    /// phi_tau: a declared automorphism of the affine diagram.
    pub action: Vec<usize>,
}

/// The bundle of fixed choices: the abstract Galois group with its tame/
/// unramified structure, and one diagram-with-action per component orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedChoices {
    pub sigma: EnumeratedGroup,
    pub tame_order: usize,
    pub unramified_order: usize,
    /// Index of the chosen quasi-Frobenius generator of the unramified
    /// quotient (informational; the index set depends only on the actions).
    pub qfr: usize,
    pub components: Vec<ComponentChoice>,
}

impl FixedChoices {
    /// Split SL2 with trivial Galois action: the one fixed choice the sl2
    /// machinery needs.
    pub fn sl2_split() -> Self {
        let diagram = build_affine_diagram(DynkinType::A(1), 1).unwrap();
        let action = diagram.identity();
        FixedChoices {
            sigma: EnumeratedGroup::cyclic(1),
            tame_order: 1,
            unramified_order: 1,
            qfr: 0,
            components: vec![ComponentChoice { diagram, action }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sigma.validate()?;
        if self.tame_order * self.unramified_order != self.sigma.order() {
            return Err(Error::Domain(
                "tame and unramified orders must multiply to |Sigma|".into(),
            ));
        }
        if self.qfr >= self.unramified_order.max(1) {
            return Err(Error::Domain("qFr is not an element of the unramified quotient".into()));
        }
        for c in &self.components {
            if !c.diagram.is_automorphism_pub(&c.action) {
                return Err(Error::Domain(format!(
                    "declared action {:?} is not an automorphism of {}",
                    c.action, c.diagram.name
                )));
            }
        }
        Ok(())
    }
}

impl AffineDiagram {
    pub fn is_automorphism_pub(&self, perm: &[usize]) -> bool {
        perm.len() == self.node_count && self.is_automorphism(perm)
    }
}

/// Which reading of "subsets of S with nonempty projection to each factor".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexSetReading {
    /// Arbitrary nonempty subsets of the product set S (the literal reading:
    /// a nonempty subset of a product always projects onto something nonempty
    /// in each factor).
    Literal,
    /// Products of nonempty per-factor subsets (the rectangle reading).
    Rectangles,
}

/// The parahoric indexing set: S and its admissible subsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParahoricIndexSet {
    /// Per component: the node orbits under the declared action.
    pub factor_orbits: Vec<Vec<Vec<usize>>>,
    /// Elements of S: tuples of per-factor orbit indices.
    pub elements: Vec<Vec<usize>>,
    /// The admissible subsets, each a sorted list of indices into `elements`.
    pub subsets: Vec<Vec<usize>>,
}

pub fn parahoric_index_set(fc: &FixedChoices, reading: IndexSetReading) -> Result<ParahoricIndexSet> {
    fc.validate()?;
    let mut factor_orbits = Vec::new();
    for c in &fc.components {
        factor_orbits.push(c.diagram.node_orbits(&c.action)?);
    }
    let sizes: Vec<usize> = factor_orbits.iter().map(|o| o.len()).collect();
    let total: usize = sizes.iter().product();
    if total > 16 {
        return Err(Error::Domain(format!("|S| = {total} too large to enumerate subsets")));
    }
    // S in lexicographic tuple order.
    let mut elements = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut tuple = Vec::with_capacity(sizes.len());
        for &s in sizes.iter().rev() {
            tuple.push(idx % s);
            idx /= s;
        }
        tuple.reverse();
        elements.push(tuple);
    }
    let subsets = match reading {
        IndexSetReading::Literal => {
            let mut out = Vec::new();
            for mask in 1u32..(1u32 << total) {
                let subset: Vec<usize> = (0..total).filter(|i| mask & (1 << i) != 0).collect();
                out.push(subset);
            }
            out.sort_by_key(|s| (s.len(), s.clone()));
            out
        }
        IndexSetReading::Rectangles => {
            // Products of nonempty subsets of each factor.
            let mut rects: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
            for &s in &sizes {
                let mut next = Vec::new();
                for mask in 1u32..(1u32 << s) {
                    let choice: Vec<usize> = (0..s).filter(|i| mask & (1 << i) != 0).collect();
                    for prefix in &rects {
                        let mut np = prefix.clone();
                        np.push(choice.clone());
                        next.push(np);
                    }
                }
                rects = next;
            }
            let mut out = Vec::new();
            for rect in rects {
                let subset: Vec<usize> = elements
                    .iter()
                    .enumerate()
                    .filter(|(_, tuple)| tuple.iter().zip(&rect).all(|(t, choice)| choice.contains(t)))
                    .map(|(i, _)| i)
                    .collect();
                out.push(subset);
            }
            out.sort_by_key(|s| (s.len(), s.clone()));
            out.dedup();
            out
        }
    };
    Ok(ParahoricIndexSet { factor_orbits, elements, subsets })
}

/// Upper bound on the number of nilpotent conjugacy classes over any local
/// field of odd residual characteristic, from the implemented table.
pub fn nilpotent_class_bound(datum: &RootDatum, p: u64) -> Result<usize> {
    if p < 3 || p % 2 == 0 {
        return Err(Error::Domain("the bound table needs an odd prime".into()));
    }
    if datum.roots.is_empty() {
        // A torus has only the zero orbit.
        return Ok(1);
    }
    if *datum == RootDatum::sl2() {
        // Zero plus one regular orbit per square class of F^x.
        return Ok(5);
    }
    Err(Error::Domain("datum outside the implemented class-bound table".into()))
}

// --- TOML-facing configuration -----------------------------------------------

#[derive(Debug, Clone, Deserialize)]
pub struct FixedChoicesConfig {
    #[serde(default)]
    pub sigma: Option<SigmaConfig>,
    pub component: Vec<ComponentConfig>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SigmaConfig {
    pub tame: usize,
    pub unramified: usize,
    #[serde(default)]
    pub qfr: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ComponentConfig {
    #[serde(rename = "type")]
    pub dynkin: String,
    #[serde(default = "default_e")]
    pub e: u8,
    /// Node permutation; omitted means the trivial action.
    #[serde(default)]
    pub action: Option<Vec<usize>>,
}

fn default_e() -> u8 {
    1
}

/// Builds fixed choices from a TOML document.
pub fn fixed_choices_from_toml(text: &str) -> Result<FixedChoices> {
    let cfg: FixedChoicesConfig =
        toml::from_str(text).map_err(|e| Error::Parse { pos: 0, msg: e.to_string() })?;
    let sigma_cfg = cfg.sigma.unwrap_or(SigmaConfig { tame: 1, unramified: 1, qfr: 0 });
    let order = sigma_cfg.tame * sigma_cfg.unramified;
    let mut components = Vec::new();
    for c in &cfg.component {
        let ty = DynkinType::parse(&c.dynkin)?;
        let diagram = build_affine_diagram(ty, c.e)?;
        let action = c.action.clone().unwrap_or_else(|| diagram.identity());
        components.push(ComponentChoice { diagram, action });
    }
    let fc = FixedChoices {
        sigma: EnumeratedGroup::cyclic(order.max(1)),
        tame_order: sigma_cfg.tame.max(1),
        unramified_order: sigma_cfg.unramified.max(1),
        qfr: sigma_cfg.qfr,
        components,
    };
    fc.validate()?;
    Ok(fc)
}

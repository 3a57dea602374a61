//! Partitions a contract into facets from its function/state dependency
//! graph, extracts shared internal functions into a library, and assigns
//! each facet a diamond-storage namespace.

use crate::diagnostics::{codes, Diagnostic};
use crate::frontend::ast::{SourceUnit, Visibility};
use crate::layout::{compute_namespace_layout, LayoutError, StorageLayout};
use crate::types::{TypeDesc, TypeTable};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub const DEFAULT_NAMESPACE_PREFIX: &str = "seam.storage.v1.";
pub const SHARED_LIBRARY_NAME: &str = "SharedLib";

#[derive(Debug, Error)]
pub enum FacetizerError {
    #[error("{0}")]
    Layout(#[from] LayoutError),
    #[error("invalid facet map: {0}")]
    FacetMap(String),
    #[error("failed to read facet map: {0}")]
    FacetMapIo(String),
}

// ---------------------------------------------------------------------------
// Union-find
// ---------------------------------------------------------------------------

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(len: usize) -> Self {
        UnionFind { parent: (0..len).collect(), size: vec![1; len] }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

// ---------------------------------------------------------------------------
// Access graph
// ---------------------------------------------------------------------------

/// Function/state dependency graph with call-closure edges: an edge
/// `f -> v` exists iff `f` touches `v` directly or through internal calls.
#[derive(Debug, Clone, Serialize)]
pub struct AccessGraph {
    /// Externally callable functions in source order; the constructor
    /// participates under its own name.
    pub entry_functions: Vec<String>,
    pub internal_functions: Vec<String>,
    pub state_vars: Vec<String>,
    /// Per function: state vars read/written including transitive access
    /// via internal calls.
    pub closure_reads: BTreeMap<String, BTreeSet<String>>,
    pub closure_writes: BTreeMap<String, BTreeSet<String>>,
    /// Direct call edges.
    pub calls: BTreeMap<String, BTreeSet<String>>,
}

impl AccessGraph {
    pub fn closure_access(&self, func: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if let Some(r) = self.closure_reads.get(func) {
            out.extend(r.iter().cloned());
        }
        if let Some(w) = self.closure_writes.get(func) {
            out.extend(w.iter().cloned());
        }
        out
    }

    /// Functions (by name) reachable from `func` through call edges,
    /// excluding `func` itself unless it is part of a cycle.
    pub fn call_closure(&self, func: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&str> = self
            .calls
            .get(func)
            .map(|s| s.iter().map(|x| x.as_str()).collect())
            .unwrap_or_default();
        while let Some(next) = stack.pop() {
            if seen.insert(next.to_string()) {
                if let Some(more) = self.calls.get(next) {
                    stack.extend(more.iter().map(|x| x.as_str()));
                }
            }
        }
        seen
    }
}

/// Build the access graph from a resolved contract.
pub fn build_access_graph(unit: &SourceUnit) -> AccessGraph {
    let mut graph = AccessGraph {
        entry_functions: Vec::new(),
        internal_functions: Vec::new(),
        state_vars: unit
            .contract
            .state_vars
            .iter()
            .map(|v| v.name.name.clone())
            .collect(),
        closure_reads: BTreeMap::new(),
        closure_writes: BTreeMap::new(),
        calls: BTreeMap::new(),
    };
    for f in &unit.contract.functions {
        let name = f.name.name.clone();
        if f.is_constructor || matches!(f.visibility, Visibility::External | Visibility::Public)
        {
            graph.entry_functions.push(name.clone());
        } else {
            graph.internal_functions.push(name.clone());
        }
        graph.calls.insert(name, f.calls.clone());
    }
    // Transitive closure of state access over the call graph.
    for f in &unit.contract.functions {
        let name = &f.name.name;
        let mut reads = f.reads.clone();
        let mut writes = f.writes.clone();
        for callee in graph.call_closure(name) {
            if let Some(g) = unit.find_function(&callee) {
                reads.extend(g.reads.iter().cloned());
                writes.extend(g.writes.iter().cloned());
            }
        }
        graph.closure_reads.insert(name.clone(), reads);
        graph.closure_writes.insert(name.clone(), writes);
    }
    graph
}

// ---------------------------------------------------------------------------
// Facet plan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Facet {
    pub name: String,
    /// External/public functions in source order. The constructor appears
    /// under its post-conversion name `initialize`.
    pub external_functions: Vec<String>,
    /// Internal functions embedded in this facet (reachable only from it).
    pub internal_functions: Vec<String>,
    /// State variables owned by this facet, declaration order preserved.
    pub owned_state_vars: Vec<String>,
    pub storage_namespace: String,
    pub storage_layout: StorageLayout,
}

#[derive(Debug, Clone, Serialize)]
pub struct SharedLibrary {
    pub name: String,
    pub internal_functions: Vec<String>,
}

/// Constructor conversion record: the constructor body becomes an
/// externally callable `initialize` guarded by a flag in the owning
/// facet's namespace.
#[derive(Debug, Clone, Serialize)]
pub struct InitFunction {
    pub facet: String,
    pub function_name: String,
    pub guard_var: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FacetPlan {
    pub contract_name: String,
    pub namespace_prefix: String,
    pub facets: Vec<Facet>,
    pub shared_library: SharedLibrary,
    pub init_function: Option<InitFunction>,
}

impl FacetPlan {
    pub fn facet(&self, name: &str) -> Option<&Facet> {
        self.facets.iter().find(|f| f.name == name)
    }

    /// Facet owning a state variable, if any.
    pub fn owner_of(&self, var: &str) -> Option<&Facet> {
        self.facets
            .iter()
            .find(|f| f.owned_state_vars.iter().any(|v| v == var))
    }

    /// Canonical serialized form used for determinism checks and tests.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("plan serializes");
        serde_json::to_string_pretty(&value).expect("plan serializes")
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FacetizerConfig {
    #[serde(default)]
    pub max_facets: Option<usize>,
    /// Facet name -> function names. Must cover every external function.
    #[serde(default)]
    pub facet_map: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default)]
    pub namespace_prefix: Option<String>,
}

impl FacetizerConfig {
    pub fn namespace_prefix(&self) -> &str {
        self.namespace_prefix.as_deref().unwrap_or(DEFAULT_NAMESPACE_PREFIX)
    }

    /// Load the facet-map override from a TOML or JSON file keyed by
    /// facet name.
    pub fn load_facet_map(path: &std::path::Path) -> Result<BTreeMap<String, Vec<String>>, FacetizerError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FacetizerError::FacetMapIo(format!("{}: {e}", path.display())))?;
        let is_toml = path.extension().map(|e| e == "toml").unwrap_or(false);
        if is_toml {
            toml::from_str(&text).map_err(|e| FacetizerError::FacetMap(e.to_string()))
        } else {
            serde_json::from_str(&text).map_err(|e| FacetizerError::FacetMap(e.to_string()))
        }
    }
}

/// Derive a facet name from its first external function, deduplicated
/// with a numeric suffix.
pub fn name_facet(first_function: Option<&str>, taken: &BTreeSet<String>) -> String {
    let base = match first_function {
        Some(f) if f != "constructor" => {
            let mut chars = f.chars();
            match chars.next() {
                Some(c) => format!("{}{}Facet", c.to_ascii_uppercase(), chars.as_str()),
                None => "Facet".to_string(),
            }
        }
        _ => "InitFacet".to_string(),
    };
    if !taken.contains(&base) {
        return base;
    }
    let mut n = 2usize;
    loop {
        let candidate = format!("{base}{n}");
        if !taken.contains(&candidate) {
            return candidate;
        }
        n += 1;
    }
}

/// Partition the contract into facets.
///
/// Facets are the connected components of the access-closure graph over
/// functions and state variables. Internal functions reachable from two
/// or more facets move to the shared library; by construction such
/// functions touch no state (state access would have merged the facets).
pub fn partition_facets(
    unit: &SourceUnit,
    graph: &AccessGraph,
    config: &FacetizerConfig,
) -> Result<(FacetPlan, Vec<Diagnostic>), FacetizerError> {
    let mut diags = Vec::new();

    if graph.entry_functions.is_empty() {
        diags.push(Diagnostic::info(
            codes::EMPTY_CONTRACT,
            format!(
                "contract `{}` has no external or public functions; nothing to facetize",
                unit.name()
            ),
        ));
    }

    let groups = match &config.facet_map {
        Some(map) => override_groups(graph, map)?,
        None => component_groups(graph, config.max_facets),
    };

    build_plan(unit, graph, config, groups, &mut diags).map(|plan| (plan, diags))
}

/// Grouping of entry functions into facets; each group lists entry
/// function indices (into `graph.entry_functions`), plus an optional
/// fixed name (facet-map overrides carry user names).
struct Group {
    entry_indices: Vec<usize>,
    fixed_name: Option<String>,
}

fn component_groups(graph: &AccessGraph, max_facets: Option<usize>) -> Vec<Group> {
    // Union-find over entry functions, internal functions and state vars.
    // Internal functions participate so that state touched only by dead
    // internal code still merges into one ownership component.
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    let mut next = 0usize;
    for f in graph
        .entry_functions
        .iter()
        .chain(graph.internal_functions.iter())
        .chain(graph.state_vars.iter())
    {
        ids.insert(f.as_str(), next);
        next += 1;
    }
    let mut uf = UnionFind::new(next);
    for f in graph.entry_functions.iter().chain(graph.internal_functions.iter()) {
        let fid = ids[f.as_str()];
        for v in graph.closure_access(f) {
            if let Some(&vid) = ids.get(v.as_str()) {
                uf.union(fid, vid);
            }
        }
    }

    // Components keyed by root, ordered by first entry function.
    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (idx, f) in graph.entry_functions.iter().enumerate() {
        let root = uf.find(ids[f.as_str()]);
        components.entry(root).or_default().push(idx);
    }
    let mut groups: Vec<Group> = components
        .into_values()
        .map(|mut entry_indices| {
            entry_indices.sort_unstable();
            Group { entry_indices, fixed_name: None }
        })
        .collect();
    groups.sort_by_key(|g| g.entry_indices[0]);

    if let Some(max) = max_facets {
        merge_smallest(&mut groups, graph, max.max(1));
    }
    groups
}

/// Merge the smallest groups (by entry-function count, ties by derived
/// name) until at most `max` remain.
fn merge_smallest(groups: &mut Vec<Group>, graph: &AccessGraph, max: usize) {
    while groups.len() > max {
        let mut order: Vec<usize> = (0..groups.len()).collect();
        order.sort_by_key(|&i| {
            (
                groups[i].entry_indices.len(),
                graph.entry_functions[groups[i].entry_indices[0]].clone(),
            )
        });
        let (a, b) = (order[0].min(order[1]), order[0].max(order[1]));
        let merged = groups.remove(b);
        groups[a].entry_indices.extend(merged.entry_indices);
        groups[a].entry_indices.sort_unstable();
        groups.sort_by_key(|g| g.entry_indices[0]);
    }
}

fn override_groups(
    graph: &AccessGraph,
    map: &BTreeMap<String, Vec<String>>,
) -> Result<Vec<Group>, FacetizerError> {
    let mut assigned: BTreeMap<&str, &str> = BTreeMap::new();
    for (facet, funcs) in map {
        for f in funcs {
            let known = graph.entry_functions.iter().any(|g| g == f);
            if !known {
                return Err(FacetizerError::FacetMap(format!(
                    "`{f}` is not an external or public function"
                )));
            }
            if let Some(previous) = assigned.insert(f.as_str(), facet.as_str()) {
                return Err(FacetizerError::FacetMap(format!(
                    "function `{f}` assigned to both `{previous}` and `{facet}`"
                )));
            }
        }
    }
    for f in &graph.entry_functions {
        if f != "constructor" && !assigned.contains_key(f.as_str()) {
            return Err(FacetizerError::FacetMap(format!(
                "function `{f}` is not assigned to any facet"
            )));
        }
    }
    // The constructor, when unlisted, joins the facet that accesses the
    // state it writes; leave it unassigned here and let ownership
    // validation place it.
    let mut groups: Vec<Group> = map
        .iter()
        .map(|(facet, funcs)| {
            let mut entry_indices: Vec<usize> = funcs
                .iter()
                .map(|f| graph.entry_functions.iter().position(|g| g == f).unwrap())
                .collect();
            entry_indices.sort_unstable();
            Group { entry_indices, fixed_name: Some(facet.clone()) }
        })
        .filter(|g| !g.entry_indices.is_empty())
        .collect();
    groups.sort_by_key(|g| g.entry_indices[0]);

    if let Some(ctor_idx) = graph.entry_functions.iter().position(|f| f == "constructor") {
        if !assigned.contains_key("constructor") {
            let writes = graph
                .closure_writes
                .get("constructor")
                .cloned()
                .unwrap_or_default();
            let mut target: Option<usize> = None;
            for (gi, group) in groups.iter().enumerate() {
                let touches = group.entry_indices.iter().any(|&ei| {
                    let f = &graph.entry_functions[ei];
                    graph.closure_access(f).intersection(&writes).next().is_some()
                });
                if touches {
                    match target {
                        None => target = Some(gi),
                        Some(prev) if prev != gi => {
                            return Err(FacetizerError::FacetMap(
                                "constructor writes state owned by multiple facets; assign it explicitly"
                                    .to_string(),
                            ));
                        }
                        _ => {}
                    }
                }
            }
            let gi = target.unwrap_or(0);
            if groups.is_empty() {
                groups.push(Group { entry_indices: vec![ctor_idx], fixed_name: None });
            } else {
                groups[gi].entry_indices.push(ctor_idx);
                groups[gi].entry_indices.sort_unstable();
            }
        }
    }
    Ok(groups)
}

fn build_plan(
    unit: &SourceUnit,
    graph: &AccessGraph,
    config: &FacetizerConfig,
    groups: Vec<Group>,
    diags: &mut Vec<Diagnostic>,
) -> Result<FacetPlan, FacetizerError> {
    let table = TypeTable::from_contract(&unit.contract).map_err(LayoutError::from)?;
    let overridden = config.facet_map.is_some();

    // Names.
    let mut taken = BTreeSet::new();
    let mut names = Vec::with_capacity(groups.len());
    for group in &groups {
        let name = match &group.fixed_name {
            Some(n) => n.clone(),
            None => {
                let first = group
                    .entry_indices
                    .iter()
                    .map(|&i| graph.entry_functions[i].as_str())
                    .find(|f| *f != "constructor");
                name_facet(first, &taken)
            }
        };
        taken.insert(name.clone());
        names.push(name);
    }

    // Variable ownership: the unique facet whose functions access it.
    let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
    for (gi, group) in groups.iter().enumerate() {
        for &ei in &group.entry_indices {
            let f = &graph.entry_functions[ei];
            for v in graph.closure_access(f) {
                if let Some(&prev) = owner.get(v.as_str()) {
                    if prev != gi && overridden {
                        let (kind_a, kind_b) = access_kinds(graph, &groups[prev], &groups[gi], &v);
                        return Err(FacetizerError::FacetMap(format!(
                            "state variable `{v}` is {kind_a} by facet `{}` and {kind_b} by facet `{}`; each variable must live in exactly one namespace",
                            names[prev], names[gi]
                        )));
                    }
                } else {
                    let key = graph
                        .state_vars
                        .iter()
                        .find(|sv| sv.as_str() == v)
                        .map(|sv| sv.as_str());
                    if let Some(key) = key {
                        owner.insert(key, gi);
                    }
                }
            }
        }
    }

    // Internal function placement, by the set of facets reaching them.
    let mut internal_placement: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for (gi, group) in groups.iter().enumerate() {
        for &ei in &group.entry_indices {
            let f = &graph.entry_functions[ei];
            for callee in graph.call_closure(f) {
                if graph.internal_functions.iter().any(|i| *i == callee) {
                    let key = graph
                        .internal_functions
                        .iter()
                        .find(|i| i.as_str() == callee)
                        .unwrap();
                    internal_placement.entry(key.as_str()).or_default().insert(gi);
                }
            }
        }
    }

    let mut facet_internal: Vec<Vec<String>> = vec![Vec::new(); groups.len()];
    let mut shared: Vec<String> = Vec::new();
    for internal in &graph.internal_functions {
        let reachers = internal_placement.get(internal.as_str());
        match reachers.map(|s| s.len()).unwrap_or(0) {
            0 => {
                // Dead internal code: keep it next to the state it touches,
                // or share it when stateless.
                let touched = graph.closure_access(internal);
                let owning: BTreeSet<usize> = touched
                    .iter()
                    .filter_map(|v| owner.get(v.as_str()).copied())
                    .collect();
                match owning.len() {
                    0 if touched.is_empty() => shared.push(internal.clone()),
                    0 => {
                        if !groups.is_empty() {
                            facet_internal[0].push(internal.clone());
                        }
                    }
                    1 => facet_internal[*owning.iter().next().unwrap()].push(internal.clone()),
                    _ => {
                        // Cannot happen for component grouping (access
                        // merges components); overrides were validated.
                        facet_internal[*owning.iter().next().unwrap()].push(internal.clone())
                    }
                }
            }
            1 => {
                let gi = *reachers.unwrap().iter().next().unwrap();
                facet_internal[gi].push(internal.clone());
            }
            _ => shared.push(internal.clone()),
        }
    }

    // Keep internal function lists in source order.
    for list in &mut facet_internal {
        list.sort_by_key(|f| graph.internal_functions.iter().position(|g| g == f));
    }
    shared.sort_by_key(|f| graph.internal_functions.iter().position(|g| g == f));

    // Unreferenced state attaches to the first facet with a warning.
    let mut unassigned: Vec<&str> = Vec::new();
    for v in &graph.state_vars {
        if !owner.contains_key(v.as_str()) {
            unassigned.push(v);
        }
    }
    if !unassigned.is_empty() {
        if groups.is_empty() {
            for v in &unassigned {
                diags.push(Diagnostic::warning(
                    codes::UNREFERENCED_STATE,
                    format!("state variable `{v}` is not accessed by any function and no facet exists to own it"),
                ));
            }
        } else {
            for v in &unassigned {
                diags.push(Diagnostic::warning(
                    codes::UNREFERENCED_STATE,
                    format!(
                        "state variable `{v}` is not accessed by any function; attaching it to facet `{}`",
                        names[0]
                    ),
                ));
                owner.insert(v, 0);
            }
        }
    }

    // Constructor conversion.
    let ctor_group = groups.iter().position(|g| {
        g.entry_indices
            .iter()
            .any(|&i| graph.entry_functions[i] == "constructor")
    });
    let mut init_function = None;
    if let Some(gi) = ctor_group {
        let existing: BTreeSet<&str> = graph
            .entry_functions
            .iter()
            .chain(graph.internal_functions.iter())
            .map(|s| s.as_str())
            .chain(graph.state_vars.iter().map(|s| s.as_str()))
            .collect();
        let mut init_name = "initialize".to_string();
        let mut n = 2;
        while existing.contains(init_name.as_str()) {
            init_name = format!("initialize{n}");
            n += 1;
        }
        let mut guard = "seamInitialized".to_string();
        n = 2;
        while existing.contains(guard.as_str()) {
            guard = format!("seamInitialized{n}");
            n += 1;
        }
        init_function = Some(InitFunction {
            facet: names[gi].clone(),
            function_name: init_name,
            guard_var: guard,
        });
    }

    // Assemble facets.
    let mut facets = Vec::with_capacity(groups.len());
    for (gi, group) in groups.iter().enumerate() {
        let external_functions: Vec<String> = group
            .entry_indices
            .iter()
            .map(|&i| {
                let f = &graph.entry_functions[i];
                if f == "constructor" {
                    init_function.as_ref().unwrap().function_name.clone()
                } else {
                    f.clone()
                }
            })
            .collect();
        let owned_state_vars: Vec<String> = graph
            .state_vars
            .iter()
            .filter(|v| owner.get(v.as_str()) == Some(&gi))
            .cloned()
            .collect();

        let namespace = format!("{}{}", config.namespace_prefix(), names[gi]);
        let mut members: Vec<(String, TypeDesc)> = owned_state_vars
            .iter()
            .map(|v| {
                let decl = unit.find_state_var(v).expect("owned var exists");
                Ok((v.clone(), table.resolve(&decl.ty)?))
            })
            .collect::<Result<Vec<_>, LayoutError>>()?;
        if let Some(init) = &init_function {
            if init.facet == names[gi] {
                members.push((
                    init.guard_var.clone(),
                    TypeDesc::Elementary(crate::frontend::ast::ElementaryType::Bool),
                ));
            }
        }
        let storage_layout = compute_namespace_layout(&members, &table, &namespace)?;

        facets.push(Facet {
            name: names[gi].clone(),
            external_functions,
            internal_functions: facet_internal[gi].clone(),
            owned_state_vars,
            storage_namespace: namespace,
            storage_layout,
        });
    }

    Ok(FacetPlan {
        contract_name: unit.name().to_string(),
        namespace_prefix: config.namespace_prefix().to_string(),
        facets,
        shared_library: SharedLibrary {
            name: SHARED_LIBRARY_NAME.to_string(),
            internal_functions: shared,
        },
        init_function,
    })
}

fn access_kinds(
    graph: &AccessGraph,
    a: &Group,
    b: &Group,
    var: &str,
) -> (&'static str, &'static str) {
    let kind = |group: &Group| {
        let writes = group.entry_indices.iter().any(|&ei| {
            let f = &graph.entry_functions[ei];
            graph
                .closure_writes
                .get(f)
                .map(|w| w.contains(var))
                .unwrap_or(false)
        });
        if writes {
            "written"
        } else {
            "read"
        }
    };
    (kind(a), kind(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, resolve};

    fn plan_for(src: &str) -> (FacetPlan, Vec<Diagnostic>) {
        plan_with_config(src, &FacetizerConfig::default())
    }

    fn plan_with_config(src: &str, config: &FacetizerConfig) -> (FacetPlan, Vec<Diagnostic>) {
        let unit = resolve(parse(src).unwrap()).unwrap();
        let graph = build_access_graph(&unit);
        partition_facets(&unit, &graph, config).unwrap()
    }

    const TWO_CLUSTERS: &str = r#"
        contract Bank {
            mapping(address => uint256) balances;
            string name;
            function deposit(uint256 amount) public { balances[msg.sender] += amount; }
            function withdraw(uint256 amount) public { balances[msg.sender] -= amount; }
            function setName(string memory newName) public { name = newName; }
        }
    "#;

    #[test]
    fn independent_clusters_become_facets() {
        let (plan, _) = plan_for(TWO_CLUSTERS);
        assert_eq!(plan.facets.len(), 2);
        assert_eq!(plan.facets[0].name, "DepositFacet");
        assert_eq!(
            plan.facets[0].external_functions,
            vec!["deposit", "withdraw"]
        );
        assert_eq!(plan.facets[0].owned_state_vars, vec!["balances"]);
        assert_eq!(plan.facets[1].name, "SetNameFacet");
        assert_eq!(plan.facets[1].owned_state_vars, vec!["name"]);
    }

    #[test]
    fn shared_variable_merges_into_one_facet() {
        let (plan, _) = plan_for(
            r#"
            contract C {
                uint256 x;
                function f() public { x = 1; }
                function g() public view returns (uint256) { return x; }
            }
            "#,
        );
        assert_eq!(plan.facets.len(), 1);
        assert_eq!(plan.facets[0].external_functions, vec!["f", "g"]);
    }

    #[test]
    fn closure_attributes_state_through_internal_calls() {
        let (plan, _) = plan_for(
            r#"
            contract C {
                uint256 y;
                function helper() internal { y = 2; }
                function f() public { helper(); }
                function g() public view returns (uint256) { return y; }
            }
            "#,
        );
        // f touches y via helper, so f and g share a facet.
        assert_eq!(plan.facets.len(), 1);
        assert_eq!(plan.facets[0].internal_functions, vec!["helper"]);
        assert!(plan.shared_library.internal_functions.is_empty());
    }

    #[test]
    fn shared_internal_goes_to_library() {
        let (plan, _) = plan_for(
            r#"
            contract C {
                uint256 a;
                uint256 b;
                function check(uint256 v) internal pure returns (bool) { return v > 0; }
                function setA(uint256 v) public { require(check(v)); a = v; }
                function setB(uint256 v) public { require(check(v)); b = v; }
            }
            "#,
        );
        assert_eq!(plan.facets.len(), 2);
        assert_eq!(plan.shared_library.internal_functions, vec!["check"]);
        for f in &plan.facets {
            assert!(f.internal_functions.is_empty());
        }
    }

    #[test]
    fn facet_naming_capitalizes_and_dedups() {
        let taken: BTreeSet<String> = ["TransferFacet".to_string()].into_iter().collect();
        assert_eq!(name_facet(Some("transfer"), &BTreeSet::new()), "TransferFacet");
        assert_eq!(name_facet(Some("transfer"), &taken), "TransferFacet2");
        assert_eq!(name_facet(None, &BTreeSet::new()), "InitFacet");
    }

    #[test]
    fn constructor_becomes_initialize_in_owning_facet() {
        let (plan, _) = plan_for(
            r#"
            contract C {
                uint256 supply;
                string name;
                constructor(uint256 initial) { supply = initial; }
                function mint(uint256 amount) public { supply += amount; }
                function setName(string memory n) public { name = n; }
            }
            "#,
        );
        let init = plan.init_function.as_ref().unwrap();
        assert_eq!(init.facet, "MintFacet");
        assert_eq!(init.function_name, "initialize");
        assert_eq!(init.guard_var, "seamInitialized");
        let facet = plan.facet("MintFacet").unwrap();
        assert!(facet.external_functions.contains(&"initialize".to_string()));
        // Guard flag appended after owned vars in the namespace layout.
        let labels: Vec<_> = facet
            .storage_layout
            .entries
            .iter()
            .map(|e| e.label.as_str())
            .collect();
        assert_eq!(labels, vec!["supply", "seamInitialized"]);
    }

    #[test]
    fn initialize_name_collision_gets_suffix() {
        let (plan, _) = plan_for(
            r#"
            contract C {
                uint256 x;
                constructor() { x = 1; }
                function initialize() public { x = 2; }
            }
            "#,
        );
        let init = plan.init_function.as_ref().unwrap();
        assert_eq!(init.function_name, "initialize2");
    }

    #[test]
    fn unreferenced_state_attaches_with_warning() {
        let (plan, diags) = plan_for(
            r#"
            contract C {
                uint256 used;
                uint256 orphan;
                function f() public { used = 1; }
            }
            "#,
        );
        assert_eq!(plan.facets.len(), 1);
        assert!(plan.facets[0].owned_state_vars.contains(&"orphan".to_string()));
        assert!(diags.iter().any(|d| d.code == "UNREFERENCED_STATE"));
    }

    #[test]
    fn empty_contract_reports_not_fatal() {
        let (plan, diags) = plan_for("contract C { }");
        assert!(plan.facets.is_empty());
        assert!(diags.iter().any(|d| d.code == "EMPTY_CONTRACT"));
    }

    #[test]
    fn max_facets_merges_smallest() {
        let config = FacetizerConfig { max_facets: Some(2), ..Default::default() };
        let (plan, _) = plan_with_config(
            r#"
            contract C {
                uint256 a;
                uint256 b;
                uint256 c;
                function fa() public { a = 1; }
                function fb() public { b = 1; }
                function fc1() public { c = 1; }
                function fc2() public { c = 2; }
            }
            "#,
            &config,
        );
        assert_eq!(plan.facets.len(), 2);
        // fa and fb (single-function components) merged together.
        assert_eq!(plan.facets[0].external_functions, vec!["fa", "fb"]);
        assert_eq!(
            plan.facets[0]
                .owned_state_vars
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>(),
            vec!["a", "b"]
        );
    }

    #[test]
    fn facet_map_override_groups_functions() {
        let mut map = BTreeMap::new();
        map.insert("Admin".to_string(), vec!["setName".to_string()]);
        map.insert(
            "Vault".to_string(),
            vec!["deposit".to_string(), "withdraw".to_string()],
        );
        let config = FacetizerConfig { facet_map: Some(map), ..Default::default() };
        let (plan, _) = plan_with_config(TWO_CLUSTERS, &config);
        assert_eq!(plan.facets.len(), 2);
        assert_eq!(plan.facets[0].name, "Vault");
        assert_eq!(plan.facets[1].name, "Admin");
    }

    #[test]
    fn facet_map_rejects_shared_variable() {
        let mut map = BTreeMap::new();
        map.insert("A".to_string(), vec!["deposit".to_string()]);
        map.insert(
            "B".to_string(),
            vec!["withdraw".to_string(), "setName".to_string()],
        );
        let config = FacetizerConfig { facet_map: Some(map), ..Default::default() };
        let unit = resolve(parse(TWO_CLUSTERS).unwrap()).unwrap();
        let graph = build_access_graph(&unit);
        let err = partition_facets(&unit, &graph, &config).unwrap_err();
        assert!(err.to_string().contains("balances"));
    }

    #[test]
    fn facet_map_requires_full_coverage() {
        let mut map = BTreeMap::new();
        map.insert("A".to_string(), vec!["deposit".to_string()]);
        let config = FacetizerConfig { facet_map: Some(map), ..Default::default() };
        let unit = resolve(parse(TWO_CLUSTERS).unwrap()).unwrap();
        let graph = build_access_graph(&unit);
        let err = partition_facets(&unit, &graph, &config).unwrap_err();
        assert!(err.to_string().contains("not assigned"));
    }

    #[test]
    fn deterministic_plans() {
        let (p1, _) = plan_for(TWO_CLUSTERS);
        let (p2, _) = plan_for(TWO_CLUSTERS);
        assert_eq!(p1.to_canonical_json(), p2.to_canonical_json());
    }

    #[test]
    fn namespaces_use_prefix_and_facet_name() {
        let (plan, _) = plan_for(TWO_CLUSTERS);
        assert_eq!(
            plan.facets[0].storage_namespace,
            "seam.storage.v1.DepositFacet"
        );
        assert_eq!(plan.facets[0].storage_layout.namespace, "seam.storage.v1.DepositFacet");
    }
}

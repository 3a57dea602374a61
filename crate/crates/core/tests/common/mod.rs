//! Shared test helpers: a seeded random-contract generator and
//! independent brute-force oracles for the partition properties.

use rand::Rng;
use seam_core::facetizer::FacetPlan;
use seam_core::frontend::SourceUnit;
use std::collections::{BTreeMap, BTreeSet};

/// Generate a small contract over uint256 state vars, external functions
/// and internal helpers with random access and call patterns. The output
/// always parses and resolves cleanly.
pub fn random_contract<R: Rng>(rng: &mut R) -> String {
    let n_vars = rng.gen_range(1..=6);
    let n_ext = rng.gen_range(1..=5);
    let n_int = rng.gen_range(0..=4);
    let with_ctor = rng.gen_bool(0.25);

    let mut out = String::from("contract Generated {\n");
    for v in 0..n_vars {
        out.push_str(&format!("    uint256 v{v};\n"));
    }
    let mut body = |rng: &mut R, can_call: bool, out: &mut String| {
        let stmts = rng.gen_range(1..=3);
        for s in 0..stmts {
            match rng.gen_range(0..4u8) {
                0 => {
                    let v = rng.gen_range(0..n_vars);
                    out.push_str(&format!("        v{v} = v{v} + 1;\n"));
                }
                1 => {
                    let v = rng.gen_range(0..n_vars);
                    out.push_str(&format!("        uint256 tmp{s} = v{v};\n        v{v} = tmp{s} * 2;\n"));
                }
                2 if can_call && n_int > 0 => {
                    let h = rng.gen_range(0..n_int);
                    out.push_str(&format!("        h{h}();\n"));
                }
                _ => {
                    let v = rng.gen_range(0..n_vars);
                    out.push_str(&format!("        v{v} += 3;\n"));
                }
            }
        }
    };
    if with_ctor {
        out.push_str("    constructor() {\n");
        body(rng, false, &mut out);
        out.push_str("    }\n");
    }
    for e in 0..n_ext {
        let vis = if rng.gen_bool(0.5) { "public" } else { "external" };
        out.push_str(&format!("    function e{e}() {vis} {{\n"));
        body(rng, true, &mut out);
        out.push_str("    }\n");
    }
    for h in 0..n_int {
        let stateless = rng.gen_bool(0.4);
        if stateless {
            out.push_str(&format!(
                "    function h{h}() internal pure returns (uint256) {{\n        return {h} + 1;\n    }}\n"
            ));
        } else {
            out.push_str(&format!("    function h{h}() internal {{\n"));
            body(rng, true, &mut out);
            out.push_str("    }\n");
        }
    }
    out.push_str("}\n");
    out
}

/// Independent reachability oracle: functions (by name) transitively
/// callable from `from`, walking the resolver's direct call sets.
pub fn call_closure_oracle(unit: &SourceUnit, from: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![from.to_string()];
    while let Some(cur) = stack.pop() {
        let Some(f) = unit.contract.functions.iter().find(|f| f.name.name == cur) else {
            continue;
        };
        for callee in &f.calls {
            if seen.insert(callee.clone()) {
                stack.push(callee.clone());
            }
        }
    }
    seen
}

/// State variables touched by `from`, directly or via calls.
pub fn access_closure_oracle(unit: &SourceUnit, from: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut funcs = call_closure_oracle(unit, from);
    funcs.insert(from.to_string());
    for name in funcs {
        if let Some(f) = unit.contract.functions.iter().find(|f| f.name.name == name) {
            out.extend(f.reads.iter().cloned());
            out.extend(f.writes.iter().cloned());
        }
    }
    out
}

/// Union-find oracle: do two externally callable functions belong to the
/// same component of the access graph?
pub struct ComponentOracle {
    component: BTreeMap<String, usize>,
}

impl ComponentOracle {
    pub fn build(unit: &SourceUnit) -> ComponentOracle {
        // Nodes: every function and state var; edges: f -> touched vars.
        let mut parent: BTreeMap<String, String> = BTreeMap::new();
        let node = |f: &str| format!("f:{f}");
        let vnode = |v: &str| format!("v:{v}");
        fn find(parent: &mut BTreeMap<String, String>, x: String) -> String {
            let p = parent.get(&x).cloned().unwrap_or_else(|| x.clone());
            if p == x {
                parent.insert(x.clone(), p.clone());
                return p;
            }
            let root = find(parent, p);
            parent.insert(x, root.clone());
            root
        }
        fn union(parent: &mut BTreeMap<String, String>, a: String, b: String) {
            let ra = find(parent, a);
            let rb = find(parent, b);
            if ra != rb {
                parent.insert(ra, rb);
            }
        }
        for f in &unit.contract.functions {
            for v in access_closure_oracle(unit, &f.name.name) {
                union(&mut parent, node(&f.name.name), vnode(&v));
            }
        }
        let mut component = BTreeMap::new();
        let mut roots: BTreeMap<String, usize> = BTreeMap::new();
        let keys: Vec<String> = unit
            .contract
            .functions
            .iter()
            .map(|f| node(&f.name.name))
            .chain(unit.contract.state_vars.iter().map(|v| vnode(&v.name.name)))
            .collect();
        for key in keys {
            let root = find(&mut parent, key.clone());
            let next = roots.len();
            let id = *roots.entry(root).or_insert(next);
            component.insert(key, id);
        }
        ComponentOracle { component }
    }

    pub fn same_component_fn(&self, a: &str, b: &str) -> bool {
        self.component.get(&format!("f:{a}")) == self.component.get(&format!("f:{b}"))
    }

    pub fn var_with_fn(&self, v: &str, f: &str) -> bool {
        self.component.get(&format!("v:{v}")) == self.component.get(&format!("f:{f}"))
    }
}

/// Facets (by name) whose external functions reach `internal_fn`.
pub fn reaching_facets_oracle(
    unit: &SourceUnit,
    plan: &FacetPlan,
    internal_fn: &str,
) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for facet in &plan.facets {
        for ext in &facet.external_functions {
            let source_name = match &plan.init_function {
                Some(init) if &init.function_name == ext => "constructor",
                _ => ext.as_str(),
            };
            if call_closure_oracle(unit, source_name).contains(internal_fn) {
                out.insert(facet.name.clone());
            }
        }
    }
    out
}

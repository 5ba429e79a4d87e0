//! Textual graph specifications shared by the command line and the HTTP API.
//!
//! Generators: `path:n`, `cycle:n`, `clique:n`, `star:m`, `kml:m:l`,
//! `er:n:p[:seed]`, `ba:n:m[:seed]`, `rr:n:d[:seed]` (graph seed defaults to 0).
//! Scenarios: `cospectral[:1|:2]`, `p5slow:δ`, `chain:k:δ`, `singlecomp`,
//! `union:k:δ[:chain_len]`. A string starting with `{` is read as graph JSON.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constructions::{
    cospectral_pair, cospectral_scenario, expected_slow_union, p5_slow_scenario, reshuffle_chain,
    single_component_reshuffle, ScenarioBundle,
};
use crate::error::{input, Error, Result};
use crate::graph::{generate_random, Graph, GraphJson, RandomModel};

pub const DEFAULT_UNION_CHAIN_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    Path(usize),
    Cycle(usize),
    Clique(usize),
    Star(usize),
    CompleteBipartite(usize, usize),
    Random { model: RandomModel, n: usize, seed: u64 },
    /// 0 for the whole pair scenario (first graph), 1 or 2 for one member.
    Cospectral(u8),
    P5Slow(f64),
    Chain { k: usize, delta: f64 },
    SingleComponent,
    Union { k: usize, delta: f64, chain_len: usize },
    Inline(GraphJson),
}

/// A built graph, plus the scenario it came from when the spec named one.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedGraph {
    pub graph: Graph,
    pub scenario: Option<ScenarioBundle>,
}

fn num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Input(format!("cannot parse {what} from '{s}'")))
}

fn arity(kind: &str, args: &[&str], min: usize, max: usize) -> Result<()> {
    if args.len() < min || args.len() > max {
        return input(format!("'{kind}' takes {min}..={max} arguments, got {}", args.len()));
    }
    Ok(())
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            let json: GraphJson = serde_json::from_str(s)
                .map_err(|e| Error::Input(format!("bad graph JSON: {e}")))?;
            return Ok(GraphSpec::Inline(json));
        }
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let args: Vec<&str> = parts.collect();
        let seed = |i: usize| -> Result<u64> {
            args.get(i).map_or(Ok(0), |v| num(v, "seed"))
        };
        let spec = match kind.as_str() {
            "path" | "cycle" | "clique" | "star" => {
                arity(&kind, &args, 1, 1)?;
                let n = num(args[0], "size")?;
                match kind.as_str() {
                    "path" => GraphSpec::Path(n),
                    "cycle" => GraphSpec::Cycle(n),
                    "clique" => GraphSpec::Clique(n),
                    _ => GraphSpec::Star(n),
                }
            }
            "kml" => {
                arity(&kind, &args, 2, 2)?;
                GraphSpec::CompleteBipartite(num(args[0], "m")?, num(args[1], "l")?)
            }
            "er" => {
                arity(&kind, &args, 2, 3)?;
                GraphSpec::Random {
                    model: RandomModel::ErdosRenyi { p: num(args[1], "p")? },
                    n: num(args[0], "n")?,
                    seed: seed(2)?,
                }
            }
            "ba" => {
                arity(&kind, &args, 2, 3)?;
                GraphSpec::Random {
                    model: RandomModel::BarabasiAlbert { m: num(args[1], "m")? },
                    n: num(args[0], "n")?,
                    seed: seed(2)?,
                }
            }
            "rr" => {
                arity(&kind, &args, 2, 3)?;
                GraphSpec::Random {
                    model: RandomModel::RandomRegular { d: num(args[1], "d")? },
                    n: num(args[0], "n")?,
                    seed: seed(2)?,
                }
            }
            "cospectral" => {
                arity(&kind, &args, 0, 1)?;
                let which = args.first().map_or(Ok(0), |v| num::<u8>(v, "member"))?;
                if which > 2 {
                    return input("cospectral member must be 1 or 2");
                }
                GraphSpec::Cospectral(which)
            }
            "p5slow" => {
                arity(&kind, &args, 1, 1)?;
                GraphSpec::P5Slow(num(args[0], "delta")?)
            }
            "chain" => {
                arity(&kind, &args, 2, 2)?;
                GraphSpec::Chain {
                    k: num(args[0], "k")?,
                    delta: num(args[1], "delta")?,
                }
            }
            "singlecomp" => {
                arity(&kind, &args, 0, 0)?;
                GraphSpec::SingleComponent
            }
            "union" => {
                arity(&kind, &args, 2, 3)?;
                GraphSpec::Union {
                    k: num(args[0], "k")?,
                    delta: num(args[1], "delta")?,
                    chain_len: args
                        .get(2)
                        .map_or(Ok(DEFAULT_UNION_CHAIN_LEN), |v| num(v, "chain length"))?,
                }
            }
            other => return input(format!("unknown graph kind '{other}'")),
        };
        Ok(spec)
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Path(n) => write!(f, "path:{n}"),
            GraphSpec::Cycle(n) => write!(f, "cycle:{n}"),
            GraphSpec::Clique(n) => write!(f, "clique:{n}"),
            GraphSpec::Star(m) => write!(f, "star:{m}"),
            GraphSpec::CompleteBipartite(m, l) => write!(f, "kml:{m}:{l}"),
            GraphSpec::Random { model, n, seed } => match model {
                RandomModel::ErdosRenyi { p } => write!(f, "er:{n}:{p}:{seed}"),
                RandomModel::BarabasiAlbert { m } => write!(f, "ba:{n}:{m}:{seed}"),
                RandomModel::RandomRegular { d } => write!(f, "rr:{n}:{d}:{seed}"),
            },
            GraphSpec::Cospectral(0) => write!(f, "cospectral"),
            GraphSpec::Cospectral(w) => write!(f, "cospectral:{w}"),
            GraphSpec::P5Slow(d) => write!(f, "p5slow:{d}"),
            GraphSpec::Chain { k, delta } => write!(f, "chain:{k}:{delta}"),
            GraphSpec::SingleComponent => write!(f, "singlecomp"),
            GraphSpec::Union { k, delta, chain_len } => write!(f, "union:{k}:{delta}:{chain_len}"),
            GraphSpec::Inline(json) => {
                write!(f, "{}", serde_json::to_string(json).map_err(|_| fmt::Error)?)
            }
        }
    }
}

/// Turns errors raised while building a syntactically valid spec into domain
/// errors: the parameters were readable but do not describe a graph.
fn infeasible(e: Error) -> Error {
    match e {
        Error::Input(msg) => Error::Domain(msg),
        other => other,
    }
}

impl GraphSpec {
    /// Number of vertices the spec will produce, computed without building it.
    pub fn vertex_count(&self) -> usize {
        match *self {
            GraphSpec::Path(n) | GraphSpec::Cycle(n) | GraphSpec::Clique(n) => n,
            GraphSpec::Star(m) => m.saturating_add(1),
            GraphSpec::CompleteBipartite(m, l) => m.saturating_add(l),
            GraphSpec::Random { n, .. } => n,
            GraphSpec::Cospectral(_) | GraphSpec::P5Slow(_) => 5,
            GraphSpec::Chain { k, .. } => k.saturating_mul(5),
            GraphSpec::SingleComponent => 7,
            GraphSpec::Union { k, chain_len, .. } => k.saturating_mul(chain_len).saturating_mul(5),
            GraphSpec::Inline(ref json) => json.n,
        }
    }

    pub fn is_scenario(&self) -> bool {
        matches!(
            self,
            GraphSpec::Cospectral(0)
                | GraphSpec::P5Slow(_)
                | GraphSpec::Chain { .. }
                | GraphSpec::SingleComponent
                | GraphSpec::Union { .. }
        )
    }

    pub fn build(&self) -> Result<ResolvedGraph> {
        let plain = |g: Result<Graph>| -> Result<ResolvedGraph> {
            Ok(ResolvedGraph {
                graph: g.map_err(infeasible)?,
                scenario: None,
            })
        };
        let scenario = |b: Result<ScenarioBundle>| -> Result<ResolvedGraph> {
            let b = b.map_err(infeasible)?;
            Ok(ResolvedGraph {
                graph: b.graph.clone(),
                scenario: Some(b),
            })
        };
        match self {
            GraphSpec::Path(n) => plain(Graph::path(*n)),
            GraphSpec::Cycle(n) => plain(Graph::cycle(*n)),
            GraphSpec::Clique(n) => plain(Graph::clique(*n)),
            GraphSpec::Star(m) => plain(Graph::star(*m)),
            GraphSpec::CompleteBipartite(m, l) => plain(Graph::complete_bipartite(*m, *l)),
            GraphSpec::Random { model, n, seed } => plain(generate_random(*model, *n, *seed)),
            GraphSpec::Cospectral(1) => plain(Ok(cospectral_pair().0)),
            GraphSpec::Cospectral(2) => plain(Ok(cospectral_pair().1)),
            GraphSpec::Cospectral(_) => scenario(Ok(cospectral_scenario())),
            GraphSpec::P5Slow(d) => scenario(p5_slow_scenario(*d)),
            GraphSpec::Chain { k, delta } => scenario(reshuffle_chain(*k, *delta)),
            GraphSpec::SingleComponent => scenario(Ok(single_component_reshuffle())),
            GraphSpec::Union { k, delta, chain_len } => {
                scenario(expected_slow_union(*k, *delta, *chain_len))
            }
            GraphSpec::Inline(json) => Ok(ResolvedGraph {
                graph: Graph::from_json(json)?,
                scenario: None,
            }),
        }
    }
}

/// Parses and builds in one go.
pub fn resolve_graph(spec: &str) -> Result<ResolvedGraph> {
    spec.parse::<GraphSpec>()?.build()
}

/// A graph given either as a spec string or as inline JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphRef {
    Spec(String),
    Inline(GraphJson),
}

impl GraphRef {
    pub fn parse(&self) -> Result<GraphSpec> {
        match self {
            GraphRef::Spec(s) => s.parse(),
            GraphRef::Inline(json) => Ok(GraphSpec::Inline(json.clone())),
        }
    }
}

impl From<&str> for GraphRef {
    fn from(s: &str) -> Self {
        GraphRef::Spec(s.to_string())
    }
}

impl fmt::Display for GraphRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphRef::Spec(s) => f.write_str(s),
            GraphRef::Inline(json) => {
                write!(f, "{}", serde_json::to_string(json).map_err(|_| fmt::Error)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_specs() {
        assert_eq!(resolve_graph("path:5").unwrap().graph, Graph::path(5).unwrap());
        assert_eq!(resolve_graph("cycle:4").unwrap().graph.edge_count(), 4);
        assert_eq!(resolve_graph("clique:4").unwrap().graph.edge_count(), 6);
        assert_eq!(resolve_graph("star:4").unwrap().graph.n(), 5);
        assert_eq!(resolve_graph("kml:4:1").unwrap().graph.edge_count(), 4);
        let rr = resolve_graph("rr:20:3:7").unwrap().graph;
        assert!((0..20).all(|i| rr.degree(i) == 3));
        assert_eq!(resolve_graph("rr:20:3:7").unwrap(), resolve_graph("rr:20:3:7").unwrap());
        assert_eq!(resolve_graph("er:10:1").unwrap().graph.edge_count(), 45);
        assert_eq!(resolve_graph("ba:30:2").unwrap().graph.n(), 30);
    }

    #[test]
    fn scenario_specs() {
        let r = resolve_graph("chain:3:0.99").unwrap();
        assert_eq!(r.graph.n(), 15);
        assert!(r.scenario.unwrap().schedule.is_some());
        let r = resolve_graph("singlecomp").unwrap();
        assert_eq!(r.scenario.unwrap().delta_hint, 0.55);
        assert_eq!(resolve_graph("union:2:0.9").unwrap().graph.n(), 30);
        assert_eq!(resolve_graph("union:2:0.9:1").unwrap().graph.n(), 10);
        assert_eq!(resolve_graph("p5slow:0.9").unwrap().graph.n(), 5);
        let c = resolve_graph("cospectral").unwrap();
        assert!(c.scenario.unwrap().companion.is_some());
        assert_eq!(resolve_graph("cospectral:2").unwrap().graph.edge_count(), 4);
    }

    #[test]
    fn inline_json() {
        let r = resolve_graph(r#"{"n":3,"edges":[[0,1],[1,2]]}"#).unwrap();
        assert_eq!(r.graph, Graph::path(3).unwrap());
        assert!(resolve_graph(r#"{"n":3,"edges":[[0,3]]}"#).is_err());
    }

    #[test]
    fn syntax_errors_are_input_errors() {
        for bad in ["", "path", "path:x", "hexagon:3", "kml:3", "er:10", "path:1:2", "{"] {
            assert!(matches!(resolve_graph(bad), Err(Error::Input(_))), "{bad}");
        }
    }

    #[test]
    fn infeasible_parameters_are_domain_errors() {
        for bad in ["path:0", "rr:5:3", "rr:4:4", "ba:3:3", "er:5:1.5", "chain:2:0.5", "p5slow:0.3"] {
            assert!(matches!(resolve_graph(bad), Err(Error::Domain(_))), "{bad}");
        }
    }

    #[test]
    fn vertex_counts_without_building() {
        for s in ["path:7", "star:4", "kml:3:2", "chain:4:0.9", "union:2:0.9", "singlecomp"] {
            let spec: GraphSpec = s.parse().unwrap();
            assert_eq!(spec.vertex_count(), spec.build().unwrap().graph.n(), "{s}");
        }
        let huge: GraphSpec = "path:1000000000".parse().unwrap();
        assert_eq!(huge.vertex_count(), 1_000_000_000);
    }

    #[test]
    fn display_round_trips() {
        for s in ["path:5", "kml:4:1", "rr:100:5:1", "chain:3:0.99", "union:2:0.9:3", "cospectral:1"] {
            let spec: GraphSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
    }

    #[test]
    fn graph_ref_untagged() {
        let r: GraphRef = serde_json::from_str(r#""path:4""#).unwrap();
        assert_eq!(r.parse().unwrap(), GraphSpec::Path(4));
        let r: GraphRef = serde_json::from_str(r#"{"n":2,"edges":[[0,1]]}"#).unwrap();
        assert_eq!(r.parse().unwrap().vertex_count(), 2);
    }
}

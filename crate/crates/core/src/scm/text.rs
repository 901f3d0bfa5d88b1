//! Line-oriented text form of [`FiniteSCM`] and compact generator specs.
//!
//! ```text
//! scm class=cf n=2
//! exo name=U_S role=s pmf=0.5,0.5
//! exo name=U role=shared pmf=0.25,0.75
//! mech var=S reads=U_S table=0,1
//! mech var=D reads=U table=0,1,1,1
//! mech var=A reads=U table=0,1,1,0,0,1,1,0
//! ```
//!
//! `reads=-` marks a mechanism without exogenous inputs. Blank lines and
//! lines starting with `#` are ignored.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::{
    example1, example2, random_model_with, ExoRole, Exogenous, FiniteSCM, Mechanism, ModelClass, ModelConstraints,
    Positivity, Var,
};
use crate::error::{Error, Result};

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for FiniteSCM {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scm class={} n={}", self.class, self.n)?;
        for e in &self.exogenous {
            writeln!(f, "exo name={} role={} pmf={}", e.name, e.role.tag(), join(&e.pmf))?;
        }
        for var in [Var::S, Var::D, Var::A] {
            let mech = self.mechanism(var);
            let reads = if mech.reads.is_empty() {
                "-".to_string()
            } else {
                join(mech.reads.iter().map(|&r| &self.exogenous[r].name))
            };
            writeln!(f, "mech var={var} reads={reads} table={}", join(&mech.table))?;
        }
        Ok(())
    }
}

fn fields(line: &str, number: u64) -> Result<(String, HashMap<String, String>)> {
    let mut parts = line.split_whitespace();
    let head = parts.next().unwrap_or_default().to_string();
    let mut map = HashMap::new();
    for part in parts {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: number, message: format!("expected key=value, found {part:?}") })?;
        map.insert(k.to_string(), v.to_string());
    }
    Ok((head, map))
}

fn take<'a>(map: &'a HashMap<String, String>, key: &str, line: u64) -> Result<&'a str> {
    map.get(key).map(String::as_str).ok_or_else(|| Error::Parse { line, message: format!("missing {key}=") })
}

fn list<T: FromStr>(text: &str, line: u64) -> Result<Vec<T>> {
    text.split(',')
        .map(|v| v.trim().parse().map_err(|_| Error::Parse { line, message: format!("bad list entry {v:?}") }))
        .collect()
}

impl FromStr for FiniteSCM {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut header: Option<(ModelClass, usize)> = None;
        let mut exogenous: Vec<Exogenous> = Vec::new();
        let mut mechs: HashMap<&'static str, Mechanism> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let number = i as u64 + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, map) = fields(line, number)?;
            match head.as_str() {
                "scm" => {
                    let class: ModelClass = take(&map, "class", number)?.parse()?;
                    let n = take(&map, "n", number)?
                        .parse()
                        .map_err(|_| Error::Parse { line: number, message: "n is not an integer".into() })?;
                    header = Some((class, n));
                }
                "exo" => {
                    let role: ExoRole = take(&map, "role", number)?.parse()?;
                    let pmf = list(take(&map, "pmf", number)?, number)?;
                    exogenous.push(Exogenous::new(take(&map, "name", number)?, role, pmf));
                }
                "mech" => {
                    let var = match take(&map, "var", number)? {
                        "S" => "S",
                        "D" => "D",
                        "A" => "A",
                        other => {
                            return Err(Error::Parse { line: number, message: format!("unknown variable {other:?}") })
                        }
                    };
                    let reads = match take(&map, "reads", number)? {
                        "-" => Vec::new(),
                        names => names
                            .split(',')
                            .map(|name| {
                                exogenous.iter().position(|e| e.name == name).ok_or_else(|| Error::Parse {
                                    line: number,
                                    message: format!("mechanism reads undeclared exogenous {name:?}"),
                                })
                            })
                            .collect::<Result<_>>()?,
                    };
                    let table = list(take(&map, "table", number)?, number)?;
                    if mechs.insert(var, Mechanism::new(reads, table)).is_some() {
                        return Err(Error::Parse { line: number, message: format!("second mechanism for {var}") });
                    }
                }
                other => return Err(Error::Parse { line: number, message: format!("unknown record {other:?}") }),
            }
        }
        let (class, n) = header.ok_or_else(|| Error::Model("missing `scm class=.. n=..` header".into()))?;
        let mut get = |var| mechs.remove(var).ok_or_else(|| Error::Model(format!("missing mechanism for {var}")));
        let (f_s, f_d, f_a) = (get("S")?, get("D")?, get("A")?);
        FiniteSCM::new(class, n, exogenous, f_s, f_d, f_a)
    }
}

/// Builds a model from a generator spec:
///
/// * `random:<class>:n=<n>:seed=<seed>` with optional `:graph-fair`,
///   `:kusner-fair` and `:positivity=s|sd`;
/// * `example1:delta=<p>:eps=<p>`;
/// * `example2:eps=<p>`.
pub fn parse_generator(spec: &str) -> Result<FiniteSCM> {
    let mut parts = spec.trim().split(':');
    let kind = parts.next().unwrap_or_default();
    let bad = |why: String| Error::Model(format!("generator {spec:?}: {why}"));
    let mut flags = Vec::new();
    let mut values = HashMap::new();
    let mut class = None;
    for (i, part) in parts.enumerate() {
        match part.split_once('=') {
            Some((k, v)) => {
                values.insert(k, v);
            }
            None if i == 0 && kind == "random" => class = Some(part.parse::<ModelClass>()?),
            None => flags.push(part),
        }
    }
    let number = |key: &str| -> Result<f64> {
        values
            .get(key)
            .ok_or_else(|| bad(format!("missing {key}=")))?
            .parse()
            .map_err(|_| bad(format!("{key} is not a number")))
    };
    match kind {
        "example1" => example1(number("delta")?, number("eps")?),
        "example2" => example2(number("eps")?),
        "random" => {
            let class = class.ok_or_else(|| bad("missing model class".into()))?;
            let int = |key: &str| -> Result<u64> {
                values
                    .get(key)
                    .ok_or_else(|| bad(format!("missing {key}=")))?
                    .parse()
                    .map_err(|_| bad(format!("{key} is not a non-negative integer")))
            };
            let mut constraints = ModelConstraints::default();
            for flag in flags {
                match flag {
                    "graph-fair" => constraints.graph_fair = true,
                    "kusner-fair" => constraints.kusner_fair = true,
                    other => return Err(bad(format!("unknown flag {other:?}"))),
                }
            }
            if let Some(p) = values.get("positivity") {
                constraints.positivity = match *p {
                    "s" => Positivity::S,
                    "sd" => Positivity::Sd,
                    "any" => Positivity::Any,
                    other => return Err(bad(format!("unknown positivity {other:?}"))),
                };
            }
            random_model_with(class, int("n")? as usize, int("seed")?, constraints)
        }
        other => Err(bad(format!("unknown generator {other:?}"))),
    }
}

//! SMT-LIB 2 script interpreter: declarations, assertions, check-sat,
//! get-model. One-shot solving (no push/pop), which is all the planning
//! pipeline needs.

use std::collections::BTreeMap;

use num_traits::Signed;

use crate::sexpr::{parse_all, SExpr};
use crate::solver::{solve, Model, ModelValue, SmtOutcome, SolveInput};
use crate::term::{AtomTable, BTerm, Decl, Sort, TermBuilder};

pub struct Interpreter {
    decls: Vec<Decl>,
    bool_vars: BTreeMap<String, usize>,
    num_vars: BTreeMap<String, usize>,
    atoms: AtomTable,
    assertions: Vec<BTerm>,
    last: Option<SmtOutcome>,
    pub bb_budget: u64,
}

impl Default for Interpreter {
    fn default() -> Self {
        Self::new()
    }
}

impl Interpreter {
    pub fn new() -> Self {
        Interpreter {
            decls: Vec::new(),
            bool_vars: BTreeMap::new(),
            num_vars: BTreeMap::new(),
            atoms: AtomTable::default(),
            assertions: Vec::new(),
            last: None,
            bb_budget: 2_000_000,
        }
    }

    /// Runs a whole script, returning the text the solver prints.
    pub fn run(&mut self, script: &str) -> Result<String, String> {
        let mut out = String::new();
        for cmd in parse_all(script)? {
            if !self.command(&cmd, &mut out)? {
                break;
            }
        }
        Ok(out)
    }

    /// Returns false when the script requested exit.
    fn command(&mut self, cmd: &SExpr, out: &mut String) -> Result<bool, String> {
        let items = cmd.list().ok_or_else(|| format!("expected command, got {cmd}"))?;
        let head = items
            .first()
            .and_then(|h| h.atom())
            .ok_or_else(|| format!("expected command, got {cmd}"))?;
        match head {
            "set-logic" | "set-info" | "set-option" => Ok(true),
            "declare-const" => {
                if items.len() != 3 {
                    return Err("declare-const expects a name and a sort".into());
                }
                let name = items[1].atom().ok_or("declaration name must be a symbol")?;
                self.declare(name, sort_of(&items[2])?)?;
                Ok(true)
            }
            "declare-fun" => {
                if items.len() != 4 || items[2].list().map(|l| l.len()) != Some(0) {
                    return Err("only 0-ary declare-fun is supported".into());
                }
                let name = items[1].atom().ok_or("declaration name must be a symbol")?;
                self.declare(name, sort_of(&items[3])?)?;
                Ok(true)
            }
            "assert" => {
                if items.len() != 2 {
                    return Err("assert expects one term".into());
                }
                if self.last.is_some() {
                    return Err("assert after check-sat is not supported".into());
                }
                let mut builder = TermBuilder {
                    decls: &self.decls,
                    bool_vars: &self.bool_vars,
                    num_vars: &self.num_vars,
                    atoms: &mut self.atoms,
                };
                let t = builder.bool_term(&items[1])?;
                self.assertions.push(t);
                Ok(true)
            }
            "check-sat" => {
                let outcome = solve(&SolveInput {
                    decls: &self.decls,
                    bool_vars: &self.bool_vars,
                    num_vars: &self.num_vars,
                    atoms: &self.atoms,
                    assertions: &self.assertions,
                    bb_budget: self.bb_budget,
                });
                out.push_str(match &outcome {
                    SmtOutcome::Sat(_) => "sat\n",
                    SmtOutcome::Unsat => "unsat\n",
                    SmtOutcome::Unknown(_) => "unknown\n",
                });
                self.last = Some(outcome);
                Ok(true)
            }
            "get-model" => match &self.last {
                Some(SmtOutcome::Sat(model)) => {
                    out.push_str(&render_model(model, &self.decls));
                    Ok(true)
                }
                _ => {
                    out.push_str("(error \"model is not available\")\n");
                    Ok(true)
                }
            },
            "echo" => {
                if let Some(s) = items.get(1).and_then(|s| s.atom()) {
                    out.push_str(s.trim_matches('"'));
                    out.push('\n');
                }
                Ok(true)
            }
            "exit" => Ok(false),
            "push" | "pop" => Err("incremental solving (push/pop) is not supported".into()),
            other => Err(format!("unsupported command '{other}'")),
        }
    }

    fn declare(&mut self, name: &str, sort: Sort) -> Result<(), String> {
        if self.bool_vars.contains_key(name) || self.num_vars.contains_key(name) {
            return Err(format!("duplicate declaration of '{name}'"));
        }
        match sort {
            Sort::Bool => {
                self.bool_vars.insert(name.to_string(), self.bool_vars.len());
            }
            Sort::Int | Sort::Real => {
                self.num_vars.insert(name.to_string(), self.num_vars.len());
            }
        }
        self.decls.push(Decl { name: name.to_string(), sort });
        Ok(())
    }
}

fn sort_of(e: &SExpr) -> Result<Sort, String> {
    match e.atom() {
        Some("Bool") => Ok(Sort::Bool),
        Some("Int") => Ok(Sort::Int),
        Some("Real") => Ok(Sort::Real),
        _ => Err(format!("unsupported sort {e}")),
    }
}

fn render_model(model: &Model, decls: &[Decl]) -> String {
    let mut s = String::from("(\n");
    for decl in decls {
        let Some(value) = model.values.get(&decl.name) else { continue };
        let sort = match decl.sort {
            Sort::Bool => "Bool",
            Sort::Int => "Int",
            Sort::Real => "Real",
        };
        s.push_str(&format!("  (define-fun {} () {} {})\n", decl.name, sort, render_value(value)));
    }
    s.push_str(")\n");
    s
}

fn render_value(v: &ModelValue) -> String {
    match v {
        ModelValue::Bool(b) => b.to_string(),
        ModelValue::Int(i) => {
            if i.is_negative() {
                format!("(- {})", -i)
            } else {
                i.to_string()
            }
        }
        ModelValue::Real(r) => {
            let neg = r.is_negative();
            let abs = r.abs();
            let body = if abs.is_integer() {
                format!("{}.0", abs.numer())
            } else {
                format!("(/ {} {})", abs.numer(), abs.denom())
            };
            if neg {
                format!("(- {body})")
            } else {
                body
            }
        }
    }
}

/// Convenience entry point: run a script in a fresh interpreter.
pub fn run_script(script: &str) -> Result<String, String> {
    Interpreter::new().run(script)
}

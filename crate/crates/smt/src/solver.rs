//! Lazy SMT core: CDCL over the boolean skeleton, an exact simplex for
//! the conjunction of asserted theory atoms, and branch-and-bound for
//! integer feasibility. Theory conflicts come back as small explanations
//! and are learned as clauses.

use std::collections::{BTreeMap, BTreeSet};

use ltlk_lp::{DRat, Rat, Simplex, Tag, VarId};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use varisat::{ExtendFormula, Lit};

use crate::term::{AtomTable, BTerm, Decl, Sort};

const TAG_BRANCH: Tag = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelValue {
    Bool(bool),
    Int(BigInt),
    Real(Rat),
}

#[derive(Debug, Clone, Default)]
pub struct Model {
    pub values: BTreeMap<String, ModelValue>,
}

#[derive(Debug)]
pub enum SmtOutcome {
    Sat(Model),
    Unsat,
    Unknown(String),
}

pub struct SolveInput<'a> {
    pub decls: &'a [Decl],
    /// Declared name -> boolean variable index.
    pub bool_vars: &'a BTreeMap<String, usize>,
    /// Declared name -> numeric variable index.
    pub num_vars: &'a BTreeMap<String, usize>,
    pub atoms: &'a AtomTable,
    pub assertions: &'a [BTerm],
    /// Branch-and-bound node budget before giving up with `unknown`.
    pub bb_budget: u64,
}

pub fn solve(input: &SolveInput<'_>) -> SmtOutcome {
    let mut sat = varisat::Solver::new();

    let bool_lits: Vec<Lit> =
        (0..input.bool_vars.len()).map(|_| sat.new_lit()).collect();
    let atom_lits: Vec<Lit> = (0..input.atoms.atoms.len()).map(|_| sat.new_lit()).collect();

    let mut cnf = Tseitin { sat: &mut sat, bool_lits: &bool_lits, atom_lits: &atom_lits };
    for a in input.assertions {
        cnf.assert_true(a);
    }
    drop(cnf);

    add_bound_lattice_clauses(&mut sat, input.atoms, &atom_lits);

    // Simplex: one variable per numeric declaration, one slack per
    // distinct linear expression occurring in atoms.
    let mut simplex = Simplex::new();
    let n_num = input.num_vars.len();
    let num_simplex: Vec<VarId> = (0..n_num).map(|_| simplex.new_var()).collect();
    let expr_slacks: Vec<VarId> = input
        .atoms
        .exprs
        .iter()
        .map(|terms| {
            let expr: Vec<(VarId, Rat)> =
                terms.iter().map(|(v, c)| (num_simplex[*v], c.clone())).collect();
            simplex.add_row(&expr)
        })
        .collect();
    let int_vars: Vec<(usize, VarId)> = input
        .num_vars
        .iter()
        .filter(|(name, _)| {
            input.decls.iter().any(|d| &d.name == *name && d.sort == Sort::Int)
        })
        .map(|(_, idx)| (*idx, num_simplex[*idx]))
        .collect();

    loop {
        match sat.solve() {
            Err(e) => return SmtOutcome::Unknown(format!("sat core failure: {e}")),
            Ok(false) => return SmtOutcome::Unsat,
            Ok(true) => {}
        }
        let model_lits = sat.model().expect("sat solver reported a model");
        let mut assignment = vec![false; model_lits.len() + bool_lits.len() + atom_lits.len()];
        for lit in &model_lits {
            let idx = lit.var().index();
            if idx >= assignment.len() {
                assignment.resize(idx + 1, false);
            }
            assignment[idx] = lit.is_positive();
        }
        let atom_value = |i: usize| assignment[atom_lits[i].var().index()];

        // Assert every atom with its model polarity.
        simplex.push_scope();
        let mut conflict: Option<BTreeSet<Tag>> = None;
        for (i, atom) in input.atoms.atoms.iter().enumerate() {
            let pol = atom_value(i);
            let tag = (i * 2 + pol as usize) as Tag;
            let slack = expr_slacks[atom.expr_id];
            let res = if pol {
                let val = if atom.strict {
                    DRat::strictly_below(atom.bound.clone())
                } else {
                    DRat::from_rat(atom.bound.clone())
                };
                simplex.assert_upper(slack, val, tag)
            } else {
                // ¬(e <= b) is e > b; ¬(e < b) is e >= b.
                let val = if atom.strict {
                    DRat::from_rat(atom.bound.clone())
                } else {
                    DRat::strictly_above(atom.bound.clone())
                };
                simplex.assert_lower(slack, val, tag)
            };
            if let Err(c) = res {
                conflict = Some(c.0.into_iter().collect());
                break;
            }
        }

        let outcome = if let Some(tags) = conflict {
            BbOutcome::Conflict(tags)
        } else {
            let mut budget = input.bb_budget;
            branch_and_bound(&mut simplex, &int_vars, &mut budget)
        };
        simplex.pop_scope();

        match outcome {
            BbOutcome::Sat(values) => {
                let mut model = Model::default();
                for (name, idx) in input.bool_vars {
                    model
                        .values
                        .insert(name.clone(), ModelValue::Bool(assignment[bool_lits[*idx].var().index()]));
                }
                for (name, idx) in input.num_vars {
                    let v = values[num_simplex[*idx].0 as usize].clone();
                    let is_int =
                        input.decls.iter().any(|d| &d.name == name && d.sort == Sort::Int);
                    if is_int {
                        debug_assert!(v.is_integer());
                        model.values.insert(name.clone(), ModelValue::Int(v.to_integer()));
                    } else {
                        model.values.insert(name.clone(), ModelValue::Real(v));
                    }
                }
                return SmtOutcome::Sat(model);
            }
            BbOutcome::Conflict(tags) => {
                // Learn: not all of these theory literals together.
                let clause: Vec<Lit> = tags
                    .iter()
                    .filter(|t| **t != TAG_BRANCH)
                    .map(|t| {
                        let atom = (*t / 2) as usize;
                        let pol = *t % 2 == 1;
                        if pol {
                            !atom_lits[atom]
                        } else {
                            atom_lits[atom]
                        }
                    })
                    .collect();
                sat.add_clause(&clause);
            }
            BbOutcome::Budget => {
                return SmtOutcome::Unknown("branch-and-bound budget exhausted".into())
            }
        }
    }
}

enum BbOutcome {
    /// Concrete values for every simplex variable.
    Sat(Vec<Rat>),
    Conflict(BTreeSet<Tag>),
    Budget,
}

fn branch_and_bound(
    simplex: &mut Simplex,
    int_vars: &[(usize, VarId)],
    budget: &mut u64,
) -> BbOutcome {
    if *budget == 0 {
        return BbOutcome::Budget;
    }
    *budget -= 1;
    if let Err(c) = simplex.check() {
        return BbOutcome::Conflict(c.0.into_iter().collect());
    }
    // Find an integer variable without an integer value.
    let fractional = int_vars.iter().find_map(|(_, v)| {
        let beta = simplex.value(*v);
        let integral = beta.d.is_zero() && beta.r.is_integer();
        if integral {
            None
        } else {
            Some((*v, beta.clone()))
        }
    });
    let Some((var, beta)) = fractional else {
        return BbOutcome::Sat(simplex.concretize());
    };
    // Split below/above the current relaxation value.
    let (down, up) = integer_split(&beta);

    let mut all_tags: BTreeSet<Tag> = BTreeSet::new();
    for (is_down, bound) in [(true, down), (false, up)] {
        simplex.push_scope();
        let res = if is_down {
            simplex.assert_upper(var, DRat::from_rat(bound), TAG_BRANCH)
        } else {
            simplex.assert_lower(var, DRat::from_rat(bound), TAG_BRANCH)
        };
        let outcome = match res {
            Err(c) => BbOutcome::Conflict(c.0.into_iter().collect()),
            Ok(()) => branch_and_bound(simplex, int_vars, budget),
        };
        match outcome {
            BbOutcome::Sat(values) => {
                simplex.pop_scope();
                return BbOutcome::Sat(values);
            }
            BbOutcome::Budget => {
                simplex.pop_scope();
                return BbOutcome::Budget;
            }
            BbOutcome::Conflict(tags) => {
                all_tags.extend(tags);
                simplex.pop_scope();
            }
        }
    }
    all_tags.remove(&TAG_BRANCH);
    BbOutcome::Conflict(all_tags)
}

/// Bounds for the two integer branches around a non-integral value.
fn integer_split(beta: &DRat) -> (Rat, Rat) {
    if beta.r.is_integer() {
        // Value is n ± δ: exclude the open gap next to n.
        if beta.d.is_positive() {
            (beta.r.clone(), &beta.r + Rat::one())
        } else {
            (&beta.r - Rat::one(), beta.r.clone())
        }
    } else {
        let fl = beta.r.floor();
        (fl.clone(), fl + Rat::one())
    }
}

struct Tseitin<'a> {
    sat: &'a mut varisat::Solver<'static>,
    bool_lits: &'a [Lit],
    atom_lits: &'a [Lit],
}

impl<'a> Tseitin<'a> {
    /// Asserts a term at the top level, flattening conjunctions so the
    /// common big-And shape produces unit clauses directly.
    fn assert_true(&mut self, t: &BTerm) {
        match t {
            BTerm::And(items) => {
                for item in items {
                    self.assert_true(item);
                }
            }
            BTerm::Const(true) => {}
            BTerm::Const(false) => {
                self.sat.add_clause(&[]);
            }
            other => {
                let lit = self.lit_of(other);
                self.sat.add_clause(&[lit]);
            }
        }
    }

    fn lit_of(&mut self, t: &BTerm) -> Lit {
        match t {
            BTerm::Const(b) => {
                // A fresh literal pinned to the constant.
                let l = self.sat.new_lit();
                self.sat.add_clause(&[if *b { l } else { !l }]);
                l
            }
            BTerm::Var(v) => self.bool_lits[*v],
            BTerm::Atom(a) => self.atom_lits[*a],
            BTerm::Not(inner) => !self.lit_of(inner),
            BTerm::And(items) => {
                let lits: Vec<Lit> = items.iter().map(|i| self.lit_of(i)).collect();
                let out = self.sat.new_lit();
                // out <-> AND lits
                let mut long = Vec::with_capacity(lits.len() + 1);
                for l in &lits {
                    self.sat.add_clause(&[!out, *l]);
                    long.push(!*l);
                }
                long.push(out);
                self.sat.add_clause(&long);
                out
            }
            BTerm::Or(items) => {
                let lits: Vec<Lit> = items.iter().map(|i| self.lit_of(i)).collect();
                let out = self.sat.new_lit();
                // out <-> OR lits
                let mut long = Vec::with_capacity(lits.len() + 1);
                for l in &lits {
                    self.sat.add_clause(&[out, !*l]);
                    long.push(*l);
                }
                long.push(!out);
                self.sat.add_clause(&long);
                out
            }
            BTerm::Iff(a, b) => {
                let la = self.lit_of(a);
                let lb = self.lit_of(b);
                let out = self.sat.new_lit();
                self.sat.add_clause(&[!out, !la, lb]);
                self.sat.add_clause(&[!out, la, !lb]);
                self.sat.add_clause(&[out, la, lb]);
                self.sat.add_clause(&[out, !la, !lb]);
                out
            }
        }
    }
}

/// For atoms over the same expression, add the implication chain along
/// increasing bounds, e.g. (e <= 1) -> (e <= 2) -> (e < 3). This spares
/// the lazy loop from discovering the bound order one conflict at a time.
fn add_bound_lattice_clauses(
    sat: &mut varisat::Solver<'static>,
    atoms: &AtomTable,
    atom_lits: &[Lit],
) {
    let mut by_expr: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, atom) in atoms.atoms.iter().enumerate() {
        by_expr.entry(atom.expr_id).or_default().push(i);
    }
    for group in by_expr.values() {
        if group.len() < 2 {
            continue;
        }
        let mut sorted = group.clone();
        sorted.sort_by(|a, b| {
            let ka = upper_key(&atoms.atoms[*a]);
            let kb = upper_key(&atoms.atoms[*b]);
            ka.cmp(&kb)
        });
        for pair in sorted.windows(2) {
            sat.add_clause(&[!atom_lits[pair[0]], atom_lits[pair[1]]]);
        }
    }
}

fn upper_key(atom: &crate::term::LinAtom) -> DRat {
    if atom.strict {
        DRat::strictly_below(atom.bound.clone())
    } else {
        DRat::from_rat(atom.bound.clone())
    }
}

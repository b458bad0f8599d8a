//! Typed terms over the script's declarations: boolean structure over
//! theory atoms, and linear arithmetic combinations.

use std::collections::BTreeMap;

use ltlk_lp::Rat;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::sexpr::SExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Bool,
    Int,
    Real,
}

#[derive(Debug, Clone)]
pub struct Decl {
    pub name: String,
    pub sort: Sort,
}

/// Boolean skeleton. Leaves are boolean constants, declared boolean
/// variables, or theory atoms.
#[derive(Debug, Clone)]
pub enum BTerm {
    Const(bool),
    Var(usize),
    Atom(usize),
    Not(Box<BTerm>),
    And(Vec<BTerm>),
    Or(Vec<BTerm>),
    Iff(Box<BTerm>, Box<BTerm>),
}

/// Σ coeff·var + constant over numeric declarations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinComb {
    pub terms: BTreeMap<usize, Rat>,
    pub constant: Rat,
}

impl LinComb {
    fn zero() -> Self {
        LinComb { terms: BTreeMap::new(), constant: Rat::zero() }
    }

    fn constant(c: Rat) -> Self {
        LinComb { terms: BTreeMap::new(), constant: c }
    }

    fn var(v: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(v, Rat::one());
        LinComb { terms, constant: Rat::zero() }
    }

    fn add(&mut self, other: &LinComb, factor: &Rat) {
        for (v, c) in &other.terms {
            let entry = self.terms.entry(*v).or_insert_with(Rat::zero);
            *entry += c * factor;
            if entry.is_zero() {
                self.terms.remove(v);
            }
        }
        self.constant += &other.constant * factor;
    }

    fn scale(&mut self, factor: &Rat) {
        for c in self.terms.values_mut() {
            *c *= factor;
        }
        self.constant *= factor;
        self.terms.retain(|_, c| !c.is_zero());
    }
}

/// Canonical theory atom: `expr ⋈ bound` where ⋈ ∈ {<=, <} and `expr` is
/// a scaled expression shared through `expr_id`. Negation flips to a
/// lower bound on the same expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinAtom {
    pub expr_id: usize,
    pub strict: bool,
    pub bound: Rat,
}

/// Interns linear expressions and atoms so that atoms over the same
/// expression share a simplex slack variable.
#[derive(Debug, Default)]
pub struct AtomTable {
    pub exprs: Vec<BTreeMap<usize, Rat>>,
    expr_index: BTreeMap<Vec<(usize, String)>, usize>,
    pub atoms: Vec<LinAtom>,
    atom_index: BTreeMap<(usize, bool, String), usize>,
}

impl AtomTable {
    /// Interns `terms ⋈ bound` after canonical scaling (leading
    /// coefficient becomes ±1 -> +1, adjusting the relation side).
    fn intern(&mut self, mut expr: LinComb, strict: bool) -> BTerm {
        // expr ⋈ 0 with the constant folded into the bound.
        let bound = -std::mem::replace(&mut expr.constant, Rat::zero());
        if expr.terms.is_empty() {
            let holds = if strict { Rat::zero() < bound } else { Rat::zero() <= bound };
            return BTerm::Const(holds);
        }
        // Scale so the first coefficient is +1; a negative leading
        // coefficient flips the relation to a lower bound, which we
        // express as the negation of an upper-bound atom.
        let lead = expr.terms.values().next().unwrap().clone();
        let bound = bound / &lead;
        let inv = Rat::one() / &lead;
        expr.scale(&inv);
        let negated = lead.is_negative();
        let expr_id = self.intern_expr(expr.terms);
        // For a flipped relation: expr >= bound (or > bound). Encode as
        // ¬(expr < bound) / ¬(expr <= bound).
        let (upper_strict, negate) =
            if negated { (!strict, true) } else { (strict, false) };
        let key = (expr_id, upper_strict, bound.to_string());
        let idx = match self.atom_index.get(&key) {
            Some(i) => *i,
            None => {
                let i = self.atoms.len();
                self.atoms.push(LinAtom { expr_id, strict: upper_strict, bound });
                self.atom_index.insert(key, i);
                i
            }
        };
        if negate {
            BTerm::Not(Box::new(BTerm::Atom(idx)))
        } else {
            BTerm::Atom(idx)
        }
    }

    fn intern_expr(&mut self, terms: BTreeMap<usize, Rat>) -> usize {
        let key: Vec<(usize, String)> =
            terms.iter().map(|(v, c)| (*v, c.to_string())).collect();
        match self.expr_index.get(&key) {
            Some(i) => *i,
            None => {
                let i = self.exprs.len();
                self.exprs.push(terms);
                self.expr_index.insert(key, i);
                i
            }
        }
    }
}

pub struct TermBuilder<'a> {
    pub decls: &'a [Decl],
    pub bool_vars: &'a BTreeMap<String, usize>,
    pub num_vars: &'a BTreeMap<String, usize>,
    pub atoms: &'a mut AtomTable,
}

impl<'a> TermBuilder<'a> {
    pub fn bool_term(&mut self, e: &SExpr) -> Result<BTerm, String> {
        match e {
            SExpr::Atom(s) => match s.as_str() {
                "true" => Ok(BTerm::Const(true)),
                "false" => Ok(BTerm::Const(false)),
                name => match self.bool_vars.get(name) {
                    Some(v) => Ok(BTerm::Var(*v)),
                    None => Err(format!("unknown boolean symbol '{name}'")),
                },
            },
            SExpr::List(items) => {
                let head = items
                    .first()
                    .and_then(|h| h.atom())
                    .ok_or_else(|| format!("expected operator application, got {e}"))?;
                let args = &items[1..];
                match head {
                    "not" => {
                        expect_arity(args, 1, "not")?;
                        Ok(BTerm::Not(Box::new(self.bool_term(&args[0])?)))
                    }
                    "and" => Ok(BTerm::And(self.bool_args(args)?)),
                    "or" => Ok(BTerm::Or(self.bool_args(args)?)),
                    "=>" => {
                        if args.is_empty() {
                            return Err("'=>' needs arguments".into());
                        }
                        // Right-associative chain.
                        let mut parts = self.bool_args(args)?;
                        let mut acc = parts.pop().unwrap();
                        while let Some(lhs) = parts.pop() {
                            acc = BTerm::Or(vec![BTerm::Not(Box::new(lhs)), acc]);
                        }
                        Ok(acc)
                    }
                    "xor" => {
                        expect_arity(args, 2, "xor")?;
                        let a = self.bool_term(&args[0])?;
                        let b = self.bool_term(&args[1])?;
                        Ok(BTerm::Not(Box::new(BTerm::Iff(Box::new(a), Box::new(b)))))
                    }
                    "ite" => {
                        expect_arity(args, 3, "ite")?;
                        let c = self.bool_term(&args[0])?;
                        let t = self.bool_term(&args[1])?;
                        let f = self.bool_term(&args[2])?;
                        Ok(BTerm::And(vec![
                            BTerm::Or(vec![BTerm::Not(Box::new(c.clone())), t]),
                            BTerm::Or(vec![c, f]),
                        ]))
                    }
                    "=" => {
                        expect_arity(args, 2, "=")?;
                        if self.is_bool_sorted(&args[0])? {
                            let a = self.bool_term(&args[0])?;
                            let b = self.bool_term(&args[1])?;
                            Ok(BTerm::Iff(Box::new(a), Box::new(b)))
                        } else {
                            // e1 = e2  ≡  e1 - e2 <= 0  ∧  e1 - e2 >= 0
                            let diff = self.diff(&args[0], &args[1])?;
                            let le = self.atoms.intern(diff.clone(), false);
                            let ge =
                                BTerm::Not(Box::new(self.atoms.intern(diff, true)));
                            Ok(BTerm::And(vec![le, ge]))
                        }
                    }
                    "<=" => self.relation(args, false, false),
                    "<" => self.relation(args, true, false),
                    ">=" => self.relation(args, false, true),
                    ">" => self.relation(args, true, true),
                    _ => Err(format!("unsupported boolean operator '{head}'")),
                }
            }
        }
    }

    fn bool_args(&mut self, args: &[SExpr]) -> Result<Vec<BTerm>, String> {
        args.iter().map(|a| self.bool_term(a)).collect()
    }

    /// lhs ⋈ rhs as an upper-bound atom on lhs - rhs (or rhs - lhs when
    /// flipped).
    fn relation(&mut self, args: &[SExpr], strict: bool, flip: bool) -> Result<BTerm, String> {
        expect_arity(args, 2, "relation")?;
        let diff = if flip {
            self.diff(&args[1], &args[0])?
        } else {
            self.diff(&args[0], &args[1])?
        };
        Ok(self.atoms.intern(diff, strict))
    }

    fn diff(&mut self, a: &SExpr, b: &SExpr) -> Result<LinComb, String> {
        let mut lhs = self.lin_term(a)?;
        let rhs = self.lin_term(b)?;
        lhs.add(&rhs, &-Rat::one());
        Ok(lhs)
    }

    fn is_bool_sorted(&self, e: &SExpr) -> Result<bool, String> {
        match e {
            SExpr::Atom(s) => Ok(matches!(s.as_str(), "true" | "false")
                || self.bool_vars.contains_key(s.as_str())),
            SExpr::List(items) => {
                let head = items.first().and_then(|h| h.atom()).unwrap_or("");
                Ok(matches!(
                    head,
                    "not" | "and" | "or" | "=>" | "xor" | "=" | "<=" | "<" | ">=" | ">" | "ite"
                ) && {
                    // `=` and `ite` are sort-polymorphic: peek at the
                    // first argument.
                    if head == "=" || head == "ite" {
                        let probe = if head == "ite" { &items[2] } else { &items[1] };
                        self.is_bool_sorted(probe)?
                    } else {
                        true
                    }
                })
            }
        }
    }

    pub fn lin_term(&mut self, e: &SExpr) -> Result<LinComb, String> {
        match e {
            SExpr::Atom(s) => {
                if let Some(v) = self.num_vars.get(s.as_str()) {
                    return Ok(LinComb::var(*v));
                }
                parse_numeral(s).map(LinComb::constant).ok_or_else(|| {
                    format!("unknown numeric symbol or literal '{s}'")
                })
            }
            SExpr::List(items) => {
                let head = items
                    .first()
                    .and_then(|h| h.atom())
                    .ok_or_else(|| format!("expected arithmetic operator, got {e}"))?;
                let args = &items[1..];
                match head {
                    "+" => {
                        let mut acc = LinComb::zero();
                        for a in args {
                            let t = self.lin_term(a)?;
                            acc.add(&t, &Rat::one());
                        }
                        Ok(acc)
                    }
                    "-" => {
                        if args.is_empty() {
                            return Err("'-' needs arguments".into());
                        }
                        let mut acc = self.lin_term(&args[0])?;
                        if args.len() == 1 {
                            acc.scale(&-Rat::one());
                            return Ok(acc);
                        }
                        for a in &args[1..] {
                            let t = self.lin_term(a)?;
                            acc.add(&t, &-Rat::one());
                        }
                        Ok(acc)
                    }
                    "*" => {
                        let mut combs: Vec<LinComb> =
                            args.iter().map(|a| self.lin_term(a)).collect::<Result<_, _>>()?;
                        let mut acc = combs.remove(0);
                        for c in combs {
                            if c.terms.is_empty() {
                                acc.scale(&c.constant);
                            } else if acc.terms.is_empty() {
                                let factor = acc.constant.clone();
                                acc = c;
                                acc.scale(&factor);
                            } else {
                                return Err("nonlinear multiplication is not supported".into());
                            }
                        }
                        Ok(acc)
                    }
                    "/" => {
                        expect_arity(args, 2, "/")?;
                        let num = self.lin_term(&args[0])?;
                        let den = self.lin_term(&args[1])?;
                        if !den.terms.is_empty() || den.constant.is_zero() {
                            return Err("division must be by a nonzero constant".into());
                        }
                        let mut acc = num;
                        acc.scale(&(Rat::one() / &den.constant));
                        Ok(acc)
                    }
                    "to_real" => {
                        expect_arity(args, 1, "to_real")?;
                        self.lin_term(&args[0])
                    }
                    _ => Err(format!("unsupported arithmetic operator '{head}'")),
                }
            }
        }
    }
}

fn expect_arity(args: &[SExpr], n: usize, what: &str) -> Result<(), String> {
    if args.len() == n {
        Ok(())
    } else {
        Err(format!("'{what}' expects {n} argument(s), got {}", args.len()))
    }
}

/// Parses SMT-LIB numerals and decimals: `7`, `1.25`.
pub fn parse_numeral(s: &str) -> Option<Rat> {
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let int_part: BigInt = int_part.parse().ok()?;
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let digits = frac_part.len() as u32;
        let frac: BigInt = frac_part.parse().ok()?;
        let denom = BigInt::from(10u32).pow(digits);
        let whole = Rat::from_integer(int_part);
        let fraction = Rat::new(frac, denom);
        Some(if whole < Rat::zero() { whole - fraction } else { whole + fraction })
    } else {
        let i: BigInt = s.parse().ok()?;
        Some(Rat::from_integer(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexpr::parse_all;

    fn setup() -> (Vec<Decl>, BTreeMap<String, usize>, BTreeMap<String, usize>) {
        let decls = vec![
            Decl { name: "x".into(), sort: Sort::Real },
            Decl { name: "b".into(), sort: Sort::Bool },
        ];
        let mut num = BTreeMap::new();
        num.insert("x".to_string(), 0);
        let mut boolean = BTreeMap::new();
        boolean.insert("b".to_string(), 0);
        (decls, boolean, num)
    }

    #[test]
    fn interns_same_expression_once() {
        let (decls, bools, nums) = setup();
        let mut atoms = AtomTable::default();
        let mut builder =
            TermBuilder { decls: &decls, bool_vars: &bools, num_vars: &nums, atoms: &mut atoms };
        let exprs = parse_all("(<= x 1) (<= x 2) (>= x 0)").unwrap();
        for e in &exprs {
            builder.bool_term(e).unwrap();
        }
        assert_eq!(atoms.exprs.len(), 1);
        assert_eq!(atoms.atoms.len(), 3);
    }

    #[test]
    fn numerals_parse_exactly() {
        assert_eq!(parse_numeral("1.25"), Some(Rat::new(5.into(), 4.into())));
        assert_eq!(parse_numeral("-2"), Some(Rat::from_integer((-2).into())));
        assert_eq!(parse_numeral("0.1"), Some(Rat::new(1.into(), 10.into())));
        assert!(parse_numeral("x1").is_none());
    }
}

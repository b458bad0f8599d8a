//! Exact linear-arithmetic kernel shared by the geometry checks and the
//! bundled SMT backend.
//!
//! Everything here is computed over arbitrary-precision rationals; strict
//! inequalities are handled symbolically with [`DRat`] (rationals extended
//! by an infinitesimal), so feasibility answers need no tolerance tuning.

mod delta;
mod simplex;

pub use delta::DRat;
pub use simplex::{Conflict, Simplex, Tag, VarId};

use num_traits::Zero;

pub type Rat = num_rational::BigRational;

/// Relation of a linear constraint `expr ⋈ bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

/// Outcome of a one-shot feasibility check.
#[derive(Debug, Clone)]
pub enum LpResult {
    /// A satisfying point, one value per variable.
    Feasible(Vec<Rat>),
    Infeasible,
}

impl LpResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpResult::Feasible(_))
    }
}

/// Decides feasibility of a conjunction of linear constraints over
/// `n_vars` real variables. Terms are `(variable index, coefficient)`.
pub fn check_conjunction(n_vars: usize, constraints: &[(Vec<(usize, Rat)>, Cmp, Rat)]) -> LpResult {
    let mut s = Simplex::new();
    let vars: Vec<VarId> = (0..n_vars).map(|_| s.new_var()).collect();
    for (i, (terms, cmp, bound)) in constraints.iter().enumerate() {
        let expr: Vec<(VarId, Rat)> = terms
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(v, c)| (vars[*v], c.clone()))
            .collect();
        let tag = i as Tag;
        let ok = if expr.is_empty() {
            // Constant constraint: 0 ⋈ bound.
            let zero = Rat::zero();
            let holds = match cmp {
                Cmp::Le => zero <= *bound,
                Cmp::Lt => zero < *bound,
                Cmp::Ge => zero >= *bound,
                Cmp::Gt => zero > *bound,
                Cmp::Eq => zero == *bound,
            };
            if holds {
                Ok(())
            } else {
                return LpResult::Infeasible;
            }
        } else {
            let slack = s.add_row(&expr);
            match cmp {
                Cmp::Le => s.assert_upper(slack, DRat::from_rat(bound.clone()), tag),
                Cmp::Lt => s.assert_upper(slack, DRat::strictly_below(bound.clone()), tag),
                Cmp::Ge => s.assert_lower(slack, DRat::from_rat(bound.clone()), tag),
                Cmp::Gt => s.assert_lower(slack, DRat::strictly_above(bound.clone()), tag),
                Cmp::Eq => s
                    .assert_upper(slack, DRat::from_rat(bound.clone()), tag)
                    .and_then(|_| s.assert_lower(slack, DRat::from_rat(bound.clone()), tag)),
            }
        };
        if ok.is_err() {
            return LpResult::Infeasible;
        }
    }
    if s.check().is_err() {
        return LpResult::Infeasible;
    }
    let values = s.concretize();
    LpResult::Feasible(vars.iter().map(|v| values[v.0 as usize].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    #[test]
    fn empty_system_is_feasible() {
        assert!(check_conjunction(2, &[]).is_feasible());
    }

    #[test]
    fn unit_square_point() {
        // 0 <= x <= 1, 0 <= y <= 1
        let cs = vec![
            (vec![(0, Rat::one())], Cmp::Ge, r(0, 1)),
            (vec![(0, Rat::one())], Cmp::Le, r(1, 1)),
            (vec![(1, Rat::one())], Cmp::Ge, r(0, 1)),
            (vec![(1, Rat::one())], Cmp::Le, r(1, 1)),
        ];
        match check_conjunction(2, &cs) {
            LpResult::Feasible(p) => {
                assert!(p[0] >= r(0, 1) && p[0] <= r(1, 1));
                assert!(p[1] >= r(0, 1) && p[1] <= r(1, 1));
            }
            LpResult::Infeasible => panic!("square should be feasible"),
        }
    }

    #[test]
    fn contradictory_bounds() {
        let cs = vec![
            (vec![(0, Rat::one())], Cmp::Ge, r(2, 1)),
            (vec![(0, Rat::one())], Cmp::Le, r(1, 1)),
        ];
        assert!(!check_conjunction(1, &cs).is_feasible());
    }

    #[test]
    fn strict_boundary_contact() {
        // x <= 1 and x >= 1 is feasible (x = 1); x < 1 and x >= 1 is not.
        let sat = vec![
            (vec![(0, Rat::one())], Cmp::Le, r(1, 1)),
            (vec![(0, Rat::one())], Cmp::Ge, r(1, 1)),
        ];
        assert!(check_conjunction(1, &sat).is_feasible());
        let unsat = vec![
            (vec![(0, Rat::one())], Cmp::Lt, r(1, 1)),
            (vec![(0, Rat::one())], Cmp::Ge, r(1, 1)),
        ];
        assert!(!check_conjunction(1, &unsat).is_feasible());
    }

    #[test]
    fn strict_open_interval_has_witness() {
        // 0 < x < 1/1000000: feasible, witness must be strictly inside.
        let cs = vec![
            (vec![(0, Rat::one())], Cmp::Gt, r(0, 1)),
            (vec![(0, Rat::one())], Cmp::Lt, r(1, 1_000_000)),
        ];
        match check_conjunction(1, &cs) {
            LpResult::Feasible(p) => {
                assert!(p[0] > r(0, 1) && p[0] < r(1, 1_000_000), "witness {}", p[0]);
            }
            LpResult::Infeasible => panic!("open interval is nonempty"),
        }
    }

    #[test]
    fn equality_chain() {
        // x + y = 1, x - y = 0 => x = y = 1/2
        let cs = vec![
            (vec![(0, Rat::one()), (1, Rat::one())], Cmp::Eq, r(1, 1)),
            (vec![(0, Rat::one()), (1, -Rat::one())], Cmp::Eq, r(0, 1)),
        ];
        match check_conjunction(2, &cs) {
            LpResult::Feasible(p) => {
                assert_eq!(p[0], r(1, 2));
                assert_eq!(p[1], r(1, 2));
            }
            LpResult::Infeasible => panic!("system is feasible"),
        }
    }
}

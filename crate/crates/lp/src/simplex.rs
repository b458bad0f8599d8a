use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::{DRat, Rat};

/// Caller-chosen label attached to an asserted bound; conflicts are
/// reported as sets of these.
pub type Tag = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

/// An infeasible subset of the asserted bounds, by tag.
#[derive(Debug, Clone)]
pub struct Conflict(pub Vec<Tag>);

#[derive(Debug, Clone)]
struct Bound {
    val: DRat,
    tag: Tag,
}

#[derive(Debug)]
struct VarState {
    lower: Option<Bound>,
    upper: Option<Bound>,
    beta: DRat,
    basic_row: Option<usize>,
}

#[derive(Debug)]
struct Row {
    basic: u32,
    terms: BTreeMap<u32, Rat>,
}

enum TrailEntry {
    Lower(u32, Option<Bound>),
    Upper(u32, Option<Bound>),
}

/// Incremental simplex over delta-rationals in the style used by modern
/// SMT theory solvers: all variables carry optional lower/upper bounds,
/// rows define slack variables for linear expressions, and `check`
/// restores bound consistency by pivoting (Bland's rule, so it always
/// terminates). Infeasibility comes with an explanation: the set of
/// bound tags that cannot hold together.
pub struct Simplex {
    vars: Vec<VarState>,
    rows: Vec<Row>,
    /// For each var, the rows in which it occurs as a nonbasic term.
    occurs: Vec<BTreeSet<usize>>,
    trail: Vec<TrailEntry>,
    scopes: Vec<usize>,
}

impl Default for Simplex {
    fn default() -> Self {
        Self::new()
    }
}

impl Simplex {
    pub fn new() -> Self {
        Simplex { vars: Vec::new(), rows: Vec::new(), occurs: Vec::new(), trail: Vec::new(), scopes: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn new_var(&mut self) -> VarId {
        self.vars.push(VarState { lower: None, upper: None, beta: DRat::zero(), basic_row: None });
        self.occurs.push(BTreeSet::new());
        VarId(self.vars.len() as u32 - 1)
    }

    /// Introduces a slack variable `s` constrained to equal the given
    /// linear expression, and returns it. Basic variables appearing in
    /// the expression are substituted away, so this is safe to call at
    /// any point.
    pub fn add_row(&mut self, expr: &[(VarId, Rat)]) -> VarId {
        let mut comb: BTreeMap<u32, Rat> = BTreeMap::new();
        for (v, c) in expr {
            if c.is_zero() {
                continue;
            }
            if let Some(ri) = self.vars[v.0 as usize].basic_row {
                let terms: Vec<(u32, Rat)> =
                    self.rows[ri].terms.iter().map(|(w, cw)| (*w, cw.clone())).collect();
                for (w, cw) in terms {
                    add_term(&mut comb, w, &(c * &cw));
                }
            } else {
                add_term(&mut comb, v.0, c);
            }
        }
        let mut beta = DRat::zero();
        for (w, cw) in &comb {
            beta += &self.vars[*w as usize].beta.scaled(cw);
        }
        let s = self.new_var();
        self.vars[s.0 as usize].beta = beta;
        let ri = self.rows.len();
        for w in comb.keys() {
            self.occurs[*w as usize].insert(ri);
        }
        self.rows.push(Row { basic: s.0, terms: comb });
        self.vars[s.0 as usize].basic_row = Some(ri);
        s
    }

    pub fn push_scope(&mut self) {
        self.scopes.push(self.trail.len());
    }

    /// Restores the bounds of the most recent scope. Variable values are
    /// left as they are; they remain within the loosened bounds.
    pub fn pop_scope(&mut self) {
        let mark = self.scopes.pop().expect("pop_scope without matching push_scope");
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                TrailEntry::Lower(v, old) => self.vars[v as usize].lower = old,
                TrailEntry::Upper(v, old) => self.vars[v as usize].upper = old,
            }
        }
    }

    pub fn assert_upper(&mut self, x: VarId, val: DRat, tag: Tag) -> Result<(), Conflict> {
        let xi = x.0 as usize;
        if let Some(u) = &self.vars[xi].upper {
            if val >= u.val {
                return Ok(());
            }
        }
        if let Some(l) = &self.vars[xi].lower {
            if val < l.val {
                return Err(Conflict(vec![tag, l.tag]));
            }
        }
        self.trail.push(TrailEntry::Upper(x.0, self.vars[xi].upper.clone()));
        self.vars[xi].upper = Some(Bound { val: val.clone(), tag });
        if self.vars[xi].basic_row.is_none() && self.vars[xi].beta > val {
            self.update_nonbasic(x.0, val);
        }
        Ok(())
    }

    pub fn assert_lower(&mut self, x: VarId, val: DRat, tag: Tag) -> Result<(), Conflict> {
        let xi = x.0 as usize;
        if let Some(l) = &self.vars[xi].lower {
            if val <= l.val {
                return Ok(());
            }
        }
        if let Some(u) = &self.vars[xi].upper {
            if val > u.val {
                return Err(Conflict(vec![tag, u.tag]));
            }
        }
        self.trail.push(TrailEntry::Lower(x.0, self.vars[xi].lower.clone()));
        self.vars[xi].lower = Some(Bound { val: val.clone(), tag });
        if self.vars[xi].basic_row.is_none() && self.vars[xi].beta < val {
            self.update_nonbasic(x.0, val);
        }
        Ok(())
    }

    fn update_nonbasic(&mut self, x: u32, val: DRat) {
        let delta = val.clone() - &self.vars[x as usize].beta;
        for ri in self.occurs[x as usize].clone() {
            let c = self.rows[ri].terms[&x].clone();
            let b = self.rows[ri].basic as usize;
            let adj = delta.scaled(&c);
            self.vars[b].beta += &adj;
        }
        self.vars[x as usize].beta = val;
    }

    /// Repairs the assignment by pivoting until all bounds hold, or
    /// reports an infeasible bound set.
    pub fn check(&mut self) -> Result<(), Conflict> {
        loop {
            // Violated basic variable with the smallest id (Bland).
            let mut viol: Option<(usize, bool)> = None; // (row, below)
            for (ri, row) in self.rows.iter().enumerate() {
                let st = &self.vars[row.basic as usize];
                let below = st.lower.as_ref().is_some_and(|l| st.beta < l.val);
                let above = st.upper.as_ref().is_some_and(|u| st.beta > u.val);
                if below || above {
                    match viol {
                        Some((prev, _)) if self.rows[prev].basic <= row.basic => {}
                        _ => viol = Some((ri, below)),
                    }
                }
            }
            let Some((ri, below)) = viol else {
                return Ok(());
            };
            let target = {
                let st = &self.vars[self.rows[ri].basic as usize];
                if below {
                    st.lower.as_ref().unwrap().val.clone()
                } else {
                    st.upper.as_ref().unwrap().val.clone()
                }
            };
            // Entering variable: smallest eligible nonbasic id (Bland).
            let mut entering: Option<u32> = None;
            for (n, a) in &self.rows[ri].terms {
                let st = &self.vars[*n as usize];
                let positive = a > &Rat::zero();
                // To move the basic var up (below) we may increase n when
                // a > 0 or decrease it when a < 0; mirrored for above.
                let can_use = if below == positive {
                    st.upper.as_ref().is_none_or(|u| st.beta < u.val)
                } else {
                    st.lower.as_ref().is_none_or(|l| st.beta > l.val)
                };
                if can_use {
                    entering = Some(*n);
                    break;
                }
            }
            let Some(n) = entering else {
                return Err(self.explain(ri, below));
            };
            self.pivot_and_update(ri, n, target);
        }
    }

    fn explain(&self, ri: usize, below: bool) -> Conflict {
        let row = &self.rows[ri];
        let st = &self.vars[row.basic as usize];
        let mut tags = Vec::new();
        tags.push(if below {
            st.lower.as_ref().unwrap().tag
        } else {
            st.upper.as_ref().unwrap().tag
        });
        for (n, a) in &row.terms {
            let nst = &self.vars[*n as usize];
            let positive = a > &Rat::zero();
            let bound = if below == positive { &nst.upper } else { &nst.lower };
            tags.push(bound.as_ref().expect("blocked direction must have a bound").tag);
        }
        tags.sort_unstable();
        tags.dedup();
        Conflict(tags)
    }

    fn pivot_and_update(&mut self, ri: usize, n: u32, target: DRat) {
        let b = self.rows[ri].basic;
        let a = self.rows[ri].terms[&n].clone();
        let theta = (target.clone() - &self.vars[b as usize].beta).scaled(&(Rat::one() / &a));
        self.vars[b as usize].beta = target;
        // Adjust the entering variable and every other row it feeds.
        let new_n = self.vars[n as usize].beta.clone() + &theta;
        for rj in self.occurs[n as usize].clone() {
            if rj == ri {
                continue;
            }
            let c = self.rows[rj].terms[&n].clone();
            let bj = self.rows[rj].basic as usize;
            let adj = theta.scaled(&c);
            self.vars[bj].beta += &adj;
        }
        self.vars[n as usize].beta = new_n;
        self.pivot(ri, n);
    }

    /// Swaps basic variable of row `ri` with nonbasic `n` and eliminates
    /// `n` from every other row.
    fn pivot(&mut self, ri: usize, n: u32) {
        let b = self.rows[ri].basic;
        let a = self.rows[ri].terms.remove(&n).unwrap();
        self.occurs[n as usize].remove(&ri);
        let inv = Rat::one() / &a;
        // Row currently reads b = a·n + Σ c_w·w. Rewrite as
        // n = (1/a)·b − Σ (c_w/a)·w.
        let mut new_terms: BTreeMap<u32, Rat> = BTreeMap::new();
        new_terms.insert(b, inv.clone());
        let old: Vec<(u32, Rat)> = self.rows[ri].terms.iter().map(|(w, c)| (*w, c.clone())).collect();
        for (w, c) in &old {
            new_terms.insert(*w, -(c * &inv));
        }
        self.occurs[b as usize].insert(ri);
        self.rows[ri].terms = new_terms;
        self.rows[ri].basic = n;
        self.vars[n as usize].basic_row = Some(ri);
        self.vars[b as usize].basic_row = None;

        // Substitute n out of the other rows.
        for rj in self.occurs[n as usize].clone() {
            let c = self.rows[rj].terms.remove(&n).unwrap();
            self.occurs[n as usize].remove(&rj);
            let sub: Vec<(u32, Rat)> =
                self.rows[ri].terms.iter().map(|(w, cw)| (*w, cw.clone())).collect();
            for (w, cw) in sub {
                let coeff = &c * &cw;
                let entry = self.rows[rj].terms.entry(w).or_insert_with(Rat::zero);
                *entry += coeff;
                if entry.is_zero() {
                    self.rows[rj].terms.remove(&w);
                    self.occurs[w as usize].remove(&rj);
                } else {
                    self.occurs[w as usize].insert(rj);
                }
            }
        }
        debug_assert!(self.occurs[n as usize].is_empty());
    }

    pub fn value(&self, x: VarId) -> &DRat {
        &self.vars[x.0 as usize].beta
    }

    pub fn lower_of(&self, x: VarId) -> Option<&DRat> {
        self.vars[x.0 as usize].lower.as_ref().map(|b| &b.val)
    }

    pub fn upper_of(&self, x: VarId) -> Option<&DRat> {
        self.vars[x.0 as usize].upper.as_ref().map(|b| &b.val)
    }

    /// Chooses a concrete positive rational for δ small enough that every
    /// asserted bound still holds, and returns the resulting values for
    /// all variables (index = var id).
    pub fn concretize(&self) -> Vec<Rat> {
        let mut delta = Rat::one();
        for st in &self.vars {
            if let Some(l) = &st.lower {
                cap_delta(&mut delta, &l.val, &st.beta);
            }
            if let Some(u) = &st.upper {
                cap_delta(&mut delta, &st.beta, &u.val);
            }
        }
        self.vars.iter().map(|st| st.beta.at_delta(&delta)).collect()
    }
}

/// Tightens `delta` so that `lo <= hi` keeps holding concretely.
/// Precondition: lo <= hi as delta-rationals.
fn cap_delta(delta: &mut Rat, lo: &DRat, hi: &DRat) {
    debug_assert!(lo <= hi);
    if lo.r < hi.r && lo.d > hi.d {
        let cap = (&hi.r - &lo.r) / (&lo.d - &hi.d);
        if cap < *delta {
            *delta = cap;
        }
    }
}

fn add_term(comb: &mut BTreeMap<u32, Rat>, w: u32, c: &Rat) {
    let entry = comb.entry(w).or_insert_with(Rat::zero);
    *entry += c;
    if entry.is_zero() {
        comb.remove(&w);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    #[test]
    fn pivot_restores_bounds() {
        let mut s = Simplex::new();
        let x = s.new_var();
        let y = s.new_var();
        // s1 = x + y, s2 = x - y
        let s1 = s.add_row(&[(x, r(1, 1)), (y, r(1, 1))]);
        let s2 = s.add_row(&[(x, r(1, 1)), (y, r(-1, 1))]);
        s.assert_lower(s1, DRat::from_rat(r(2, 1)), 0).unwrap();
        s.assert_upper(s2, DRat::from_rat(r(0, 1)), 1).unwrap();
        s.assert_upper(x, DRat::from_rat(r(1, 1)), 2).unwrap();
        s.check().unwrap();
        let v = s.concretize();
        assert!(&v[s1.0 as usize] >= &r(2, 1));
        assert!(&v[s2.0 as usize] <= &r(0, 1));
        assert!(&v[x.0 as usize] <= &r(1, 1));
        // Row consistency.
        assert_eq!(v[s1.0 as usize], &v[x.0 as usize] + &v[y.0 as usize]);
        assert_eq!(v[s2.0 as usize], &v[x.0 as usize] - &v[y.0 as usize]);
    }

    #[test]
    fn conflict_reports_involved_tags_only() {
        let mut s = Simplex::new();
        let x = s.new_var();
        let y = s.new_var();
        let z = s.new_var();
        let sum = s.add_row(&[(x, r(1, 1)), (y, r(1, 1))]);
        s.assert_upper(x, DRat::from_rat(r(1, 1)), 10).unwrap();
        s.assert_upper(y, DRat::from_rat(r(1, 1)), 11).unwrap();
        s.assert_lower(z, DRat::from_rat(r(5, 1)), 12).unwrap();
        let res = s.assert_lower(sum, DRat::from_rat(r(3, 1)), 13).and_then(|_| s.check());
        let conflict = res.expect_err("x + y >= 3 with x,y <= 1 is infeasible");
        let mut tags = conflict.0;
        tags.sort_unstable();
        assert_eq!(tags, vec![10, 11, 13], "unrelated bound on z must not appear");
    }

    #[test]
    fn scopes_restore_feasibility() {
        let mut s = Simplex::new();
        let x = s.new_var();
        s.assert_lower(x, DRat::from_rat(r(0, 1)), 0).unwrap();
        s.push_scope();
        assert!(s.assert_upper(x, DRat::strictly_below(r(0, 1)), 1).is_err());
        s.pop_scope();
        s.assert_upper(x, DRat::from_rat(r(0, 1)), 2).unwrap();
        s.check().unwrap();
        assert_eq!(s.concretize()[x.0 as usize], r(0, 1));
    }
}

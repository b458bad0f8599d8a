//! Randomized validation of the full solver against brute-force
//! enumeration over small bounded-integer/boolean instances, plus a
//! model-replay check on the sat side.

use std::collections::BTreeMap;

use ltlk_smt::run_script;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A tiny random formula over ints in [0..3] and bools, in both SMT-LIB
/// text and an evaluatable closure form.
#[derive(Debug, Clone)]
enum F {
    Atom { coeffs: Vec<(usize, i64)>, strict: bool, bound: i64 },
    BoolVar(usize),
    Not(Box<F>),
    And(Box<F>, Box<F>),
    Or(Box<F>, Box<F>),
}

impl F {
    fn random(rng: &mut ChaCha8Rng, n_int: usize, n_bool: usize, depth: usize) -> F {
        if depth == 0 || rng.gen_bool(0.35) {
            if n_bool > 0 && rng.gen_bool(0.3) {
                return F::BoolVar(rng.gen_range(0..n_bool));
            }
            let n_terms = rng.gen_range(1..=n_int.min(2));
            let mut coeffs = Vec::new();
            for _ in 0..n_terms {
                coeffs.push((rng.gen_range(0..n_int), rng.gen_range(-2i64..=2)));
            }
            coeffs.retain(|(_, c)| *c != 0);
            if coeffs.is_empty() {
                coeffs.push((0, 1));
            }
            return F::Atom { coeffs, strict: rng.gen_bool(0.4), bound: rng.gen_range(-3i64..=6) };
        }
        match rng.gen_range(0..3) {
            0 => F::Not(Box::new(F::random(rng, n_int, n_bool, depth - 1))),
            1 => F::And(
                Box::new(F::random(rng, n_int, n_bool, depth - 1)),
                Box::new(F::random(rng, n_int, n_bool, depth - 1)),
            ),
            _ => F::Or(
                Box::new(F::random(rng, n_int, n_bool, depth - 1)),
                Box::new(F::random(rng, n_int, n_bool, depth - 1)),
            ),
        }
    }

    fn smt(&self) -> String {
        match self {
            F::Atom { coeffs, strict, bound } => {
                let sum = coeffs
                    .iter()
                    .map(|(v, c)| format!("(* {} x{})", lit(*c), v))
                    .collect::<Vec<_>>()
                    .join(" ");
                let lhs = if coeffs.len() == 1 { sum } else { format!("(+ {sum})") };
                format!("({} {} {})", if *strict { "<" } else { "<=" }, lhs, lit(*bound))
            }
            F::BoolVar(v) => format!("b{v}"),
            F::Not(f) => format!("(not {})", f.smt()),
            F::And(a, b) => format!("(and {} {})", a.smt(), b.smt()),
            F::Or(a, b) => format!("(or {} {})", a.smt(), b.smt()),
        }
    }

    fn eval(&self, ints: &[i64], bools: &[bool]) -> bool {
        match self {
            F::Atom { coeffs, strict, bound } => {
                let lhs: i64 = coeffs.iter().map(|(v, c)| c * ints[*v]).sum();
                if *strict {
                    lhs < *bound
                } else {
                    lhs <= *bound
                }
            }
            F::BoolVar(v) => bools[*v],
            F::Not(f) => !f.eval(ints, bools),
            F::And(a, b) => a.eval(ints, bools) && b.eval(ints, bools),
            F::Or(a, b) => a.eval(ints, bools) || b.eval(ints, bools),
        }
    }
}

fn lit(c: i64) -> String {
    if c < 0 {
        format!("(- {})", -c)
    } else {
        c.to_string()
    }
}

fn brute_force(f: &F, n_int: usize, n_bool: usize) -> bool {
    let dom = 0..=3i64;
    let mut ints = vec![0i64; n_int];
    let mut bools = vec![false; n_bool];
    fn rec(f: &F, ints: &mut Vec<i64>, bools: &mut Vec<bool>, i: usize, nb: usize) -> bool {
        if i < ints.len() {
            for v in 0..=3i64 {
                ints[i] = v;
                if rec(f, ints, bools, i + 1, nb) {
                    return true;
                }
            }
            return false;
        }
        if i - ints.len() < nb {
            let bi = i - ints.len();
            for v in [false, true] {
                bools[bi] = v;
                if rec(f, ints, bools, i + 1, nb) {
                    return true;
                }
            }
            return false;
        }
        f.eval(ints, bools)
    }
    let _ = dom;
    rec(f, &mut ints, &mut bools, 0, n_bool)
}

fn parse_model(out: &str) -> (BTreeMap<String, i64>, BTreeMap<String, bool>) {
    let mut ints = BTreeMap::new();
    let mut bools = BTreeMap::new();
    for line in out.lines() {
        let line = line.trim();
        if !line.starts_with("(define-fun") {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let name = parts[1].to_string();
        let value = parts[4].trim_end_matches(')');
        if parts[3] == "Bool" {
            bools.insert(name, value == "true");
        } else if value == "(-" {
            let v: i64 = parts[5].trim_end_matches(')').parse().unwrap();
            ints.insert(name, -v);
        } else {
            ints.insert(name, value.parse().unwrap());
        }
    }
    (ints, bools)
}

#[test]
fn matches_brute_force_on_bounded_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xabcde);
    let mut sat_count = 0usize;
    for case in 0..300 {
        let n_int = rng.gen_range(1..=3);
        let n_bool = rng.gen_range(0..=2);
        let f = F::random(&mut rng, n_int, n_bool, 3);
        let mut script = String::new();
        for v in 0..n_int {
            script.push_str(&format!("(declare-const x{v} Int)\n"));
            script.push_str(&format!("(assert (<= 0 x{v}))\n(assert (<= x{v} 3))\n"));
        }
        for v in 0..n_bool {
            script.push_str(&format!("(declare-const b{v} Bool)\n"));
        }
        script.push_str(&format!("(assert {})\n(check-sat)\n(get-model)\n", f.smt()));
        let expected = brute_force(&f, n_int, n_bool);
        let out = match run_script(&script) {
            Ok(o) => o,
            Err(e) => panic!("case {case}: solver error {e}\nscript:\n{script}"),
        };
        let got_sat = out.starts_with("sat");
        assert_eq!(got_sat, expected, "case {case} mismatch\nscript:\n{script}");
        if got_sat {
            sat_count += 1;
            let (ints, bools) = parse_model(&out);
            let int_vals: Vec<i64> = (0..n_int).map(|v| ints[&format!("x{v}")]).collect();
            let bool_vals: Vec<bool> =
                (0..n_bool).map(|v| *bools.get(&format!("b{v}")).unwrap_or(&false)).collect();
            assert!(
                f.eval(&int_vals, &bool_vals),
                "case {case}: model does not satisfy formula\nscript:\n{script}\nmodel:\n{out}"
            );
            for v in &int_vals {
                assert!((0..=3).contains(v), "case {case}: model out of declared bounds");
            }
        }
    }
    assert!(sat_count > 60 && sat_count < 295, "degenerate mix: {sat_count}/300");
}

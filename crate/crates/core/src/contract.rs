//! Conjunction-of-atoms contracts and an exact implication check.
//!
//! Numeric atoms constrain one variable against a rational constant, so a
//! contract's feasible set per variable is an interval with finitely many
//! excluded points. Implication reduces to syntactic membership for
//! non-numeric atoms plus interval subsumption for numeric ones.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn from_token(text: &str) -> Option<CmpOp> {
        Some(match text {
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            "==" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            _ => return None,
        })
    }

    pub fn eval(self, value: Rational64, k: Rational64) -> bool {
        match self {
            CmpOp::Lt => value < k,
            CmpOp::Le => value <= k,
            CmpOp::Gt => value > k,
            CmpOp::Ge => value >= k,
            CmpOp::Eq => value == k,
            CmpOp::Ne => value != k,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One conjunct of a contract.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// `nonnull(v)`: the variable holds a non-null value.
    NonNull(String),
    /// `v OP k`: a numeric comparison against a rational constant.
    Cmp {
        var: String,
        op: CmpOp,
        k: Rational64,
    },
    /// `pred(v)`: an uninterpreted predicate applied to a variable.
    Opaque { pred: String, var: String },
}

impl Atom {
    pub fn cmp(var: &str, op: CmpOp, k: impl Into<Rational64>) -> Atom {
        Atom::Cmp {
            var: var.to_string(),
            op,
            k: k.into(),
        }
    }

    pub fn opaque(pred: &str, var: &str) -> Atom {
        Atom::Opaque {
            pred: pred.to_string(),
            var: var.to_string(),
        }
    }

    pub fn var(&self) -> &str {
        match self {
            Atom::NonNull(v) => v,
            Atom::Cmp { var, .. } => var,
            Atom::Opaque { var, .. } => var,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::NonNull(v) => write!(f, "nonnull({v})"),
            Atom::Cmp { var, op, k } => write!(f, "{var} {op} {}", render_decimal(*k)),
            Atom::Opaque { pred, var } => write!(f, "{pred}({var})"),
        }
    }
}

/// A conjunction of atoms. The empty contract is trivially true.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Contract {
    pub atoms: BTreeSet<Atom>,
}

impl Contract {
    pub fn new<I: IntoIterator<Item = Atom>>(atoms: I) -> Contract {
        Contract {
            atoms: atoms.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Variables constrained by at least one atom.
    pub fn vars(&self) -> BTreeSet<&str> {
        self.atoms.iter().map(Atom::var).collect()
    }

    /// The feasible interval (with excluded points) for `var` under this
    /// contract's numeric atoms.
    fn region(&self, var: &str) -> Region {
        let mut region = Region::full();
        for atom in &self.atoms {
            if let Atom::Cmp { var: v, op, k } = atom {
                if v == var {
                    region.constrain(*op, *k);
                }
            }
        }
        region.normalize();
        region
    }

    /// False iff some variable's numeric constraints admit no value.
    /// Non-numeric atoms are independent positive literals and can always
    /// be satisfied.
    pub fn is_satisfiable(&self) -> bool {
        let mut regions: BTreeMap<&str, Region> = BTreeMap::new();
        for atom in &self.atoms {
            if let Atom::Cmp { var, op, k } = atom {
                regions
                    .entry(var)
                    .or_insert_with(Region::full)
                    .constrain(*op, *k);
            }
        }
        regions.into_values().all(|mut r| {
            r.normalize();
            !r.is_empty()
        })
    }
}

/// How a contract changed between two revisions of a declaration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContractRelation {
    Equal,
    /// The new contract is strictly stronger (new implies old).
    Strengthened,
    /// The new contract is strictly weaker (old implies new).
    Weakened,
    Incomparable,
}

/// Verdict strategy. Entailment itself is identical under both; the two
/// bundled policy files differ only in how `Incomparable` contract
/// relations are classified, so the mode travels with the diff
/// configuration rather than changing any answer here.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    #[default]
    Pessimistic,
    Optimistic,
}

/// True iff every assignment satisfying `c1` also satisfies `c2`.
///
/// An unsatisfiable `c1` implies everything. Otherwise `NonNull` and
/// `Opaque` atoms of `c2` must appear verbatim in `c1`, and each numeric
/// atom's region must contain the region `c1` allows for that variable.
pub fn implies(c1: &Contract, c2: &Contract) -> bool {
    if !c1.is_satisfiable() {
        return true;
    }
    c2.atoms.iter().all(|atom| match atom {
        Atom::NonNull(_) | Atom::Opaque { .. } => c1.atoms.contains(atom),
        Atom::Cmp { var, op, k } => {
            let mut target = Region::full();
            target.constrain(*op, *k);
            target.normalize();
            c1.region(var).subset_of(&target)
        }
    })
}

fn relate(old: &Contract, new: &Contract) -> ContractRelation {
    match (implies(old, new), implies(new, old)) {
        (true, true) => ContractRelation::Equal,
        (false, true) => ContractRelation::Strengthened,
        (true, false) => ContractRelation::Weakened,
        (false, false) => ContractRelation::Incomparable,
    }
}

/// Relates an old precondition to a new one. `Strengthened` means callers
/// now face a stricter obligation.
pub fn compare_pre(old: &Contract, new: &Contract) -> ContractRelation {
    relate(old, new)
}

/// Relates an old postcondition to a new one. `Weakened` means the
/// function now promises less.
pub fn compare_post(old: &Contract, new: &Contract) -> ContractRelation {
    relate(old, new)
}

///// One bound of an interval: the constant plus whether it is strict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Bound {
    k: Rational64,
    strict: bool,
}

/// An interval over the rationals with finitely many excluded points.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Region {
    lo: Option<Bound>,
    hi: Option<Bound>,
    excluded: BTreeSet<Rational64>,
}

impl Region {
    fn full() -> Region {
        Region {
            lo: None,
            hi: None,
            excluded: BTreeSet::new(),
        }
    }

    fn constrain(&mut self, op: CmpOp, k: Rational64) {
        match op {
            CmpOp::Lt => self.tighten_hi(Bound { k, strict: true }),
            CmpOp::Le => self.tighten_hi(Bound { k, strict: false }),
            CmpOp::Gt => self.tighten_lo(Bound { k, strict: true }),
            CmpOp::Ge => self.tighten_lo(Bound { k, strict: false }),
            CmpOp::Eq => {
                self.tighten_lo(Bound { k, strict: false });
                self.tighten_hi(Bound { k, strict: false });
            }
            CmpOp::Ne => {
                self.excluded.insert(k);
            }
        }
    }

    fn tighten_lo(&mut self, b: Bound) {
        let replace = match self.lo {
            None => true,
            Some(cur) => b.k > cur.k || (b.k == cur.k && b.strict && !cur.strict),
        };
        if replace {
            self.lo = Some(b);
        }
    }

    fn tighten_hi(&mut self, b: Bound) {
        let replace = match self.hi {
            None => true,
            Some(cur) => b.k < cur.k || (b.k == cur.k && b.strict && !cur.strict),
        };
        if replace {
            self.hi = Some(b);
        }
    }

    fn admits_interval(&self, x: Rational64) -> bool {
        let lo_ok = match self.lo {
            None => true,
            Some(b) => x > b.k || (!b.strict && x == b.k),
        };
        let hi_ok = match self.hi {
            None => true,
            Some(b) => x < b.k || (!b.strict && x == b.k),
        };
        lo_ok && hi_ok
    }

    fn contains(&self, x: Rational64) -> bool {
        self.admits_interval(x) && !self.excluded.contains(&x)
    }

    /// Folds endpoint exclusions into strict bounds and drops exclusions
    /// that fall outside the interval, so that afterwards every excluded
    /// point is strictly interior.
    fn normalize(&mut self) {
        loop {
            let mut changed = false;
            if let Some(b) = self.lo {
                if !b.strict && self.excluded.remove(&b.k) {
                    self.lo = Some(Bound {
                        k: b.k,
                        strict: true,
                    });
                    changed = true;
                }
            }
            if let Some(b) = self.hi {
                if !b.strict && self.excluded.remove(&b.k) {
                    self.hi = Some(Bound {
                        k: b.k,
                        strict: true,
                    });
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let keep: BTreeSet<Rational64> = self
            .excluded
            .iter()
            .copied()
            .filter(|x| self.admits_interval(*x))
            .collect();
        self.excluded = keep;
    }

    /// Requires `normalize` to have run.
    fn is_empty(&self) -> bool {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) => lo.k > hi.k || (lo.k == hi.k && (lo.strict || hi.strict)),
            _ => false,
        }
    }

    /// The single admitted point, if the region is one. Requires
    /// `normalize` to have run.
    fn singleton(&self) -> Option<Rational64> {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) if lo.k == hi.k && !lo.strict && !hi.strict => Some(lo.k),
            _ => None,
        }
    }

    /// True iff every point of `self` lies in `other`. Both regions must
    /// be normalized. Sound over the rationals: a non-degenerate interval
    /// is dense, so finitely many excluded points never close a gap.
    fn subset_of(&self, other: &Region) -> bool {
        if self.is_empty() {
            return true;
        }
        if let Some(x) = self.singleton() {
            return other.contains(x);
        }
        let lo_ok = match (&self.lo, &other.lo) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a.k > b.k || (a.k == b.k && (a.strict || !b.strict)),
        };
        let hi_ok = match (&self.hi, &other.hi) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a.k < b.k || (a.k == b.k && (a.strict || !b.strict)),
        };
        lo_ok && hi_ok && other.excluded.iter().all(|x| !self.contains(*x))
    }
}

/// Parses a decimal literal (`42`, `-3`, `1.25`) into an exact rational.
pub fn parse_decimal(text: &str) -> Option<Rational64> {
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty()
        || !int_part.bytes().all(|b| b.is_ascii_digit())
        || (digits.contains('.') && frac_part.is_empty())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
        || frac_part.len() > 12
    {
        return None;
    }
    let mut units: i64 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        units = units.checked_mul(10)?.checked_add((b - b'0') as i64)?;
    }
    if negative {
        units = -units;
    }
    Some(Rational64::new(units, 10i64.pow(frac_part.len() as u32)))
}

/// Renders a rational whose reduced denominator divides a power of ten as
/// the shortest exact decimal literal; anything else falls back to `n/d`.
pub fn render_decimal(q: Rational64) -> String {
    let n = *q.numer();
    let d = *q.denom();
    if d == 1 {
        return n.to_string();
    }
    let (mut twos, mut fives, mut rest) = (0u32, 0u32, d);
    while rest % 2 == 0 {
        rest /= 2;
        twos += 1;
    }
    while rest % 5 == 0 {
        rest /= 5;
        fives += 1;
    }
    if rest != 1 {
        return format!("{n}/{d}");
    }
    let scale = twos.max(fives);
    let scaled = (n as i128) * (10i128.pow(scale) / d as i128);
    let sign = if scaled < 0 { "-" } else { "" };
    let digits = format!("{:0>width$}", scaled.abs(), width = scale as usize + 1);
    let split = digits.len() - scale as usize;
    format!("{sign}{}.{}", &digits[..split], &digits[split..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    fn cmp(var: &str, op: CmpOp, k: i64) -> Atom {
        Atom::cmp(var, op, q(k))
    }

    fn con(atoms: Vec<Atom>) -> Contract {
        Contract::new(atoms)
    }

    #[test]
    fn wider_bound_is_implied() {
        let c1 = con(vec![cmp("a", CmpOp::Ge, 1)]);
        let c2 = con(vec![cmp("a", CmpOp::Ge, 0)]);
        assert!(implies(&c1, &c2));
        assert!(!implies(&c2, &c1));
    }

    #[test]
    fn empty_contract_implies_nothing_but_truth() {
        let empty = Contract::default();
        let nn = con(vec![Atom::NonNull("a".into())]);
        assert!(!implies(&empty, &nn));
        assert!(implies(&nn, &empty));
        assert!(implies(&empty, &empty));
    }

    #[test]
    fn bounded_interval_implies_wider_interval() {
        let c1 = con(vec![cmp("a", CmpOp::Ge, 0), cmp("a", CmpOp::Le, 10)]);
        let c2 = con(vec![cmp("a", CmpOp::Ge, -5)]);
        assert!(implies(&c1, &c2));
    }

    #[test]
    fn unsatisfiable_contract_implies_everything() {
        let c1 = con(vec![cmp("a", CmpOp::Ge, 5), cmp("a", CmpOp::Le, 3)]);
        assert!(!c1.is_satisfiable());
        assert!(implies(&c1, &con(vec![Atom::NonNull("b".into())])));
        assert!(implies(&c1, &con(vec![cmp("c", CmpOp::Eq, 7)])));
    }

    #[test]
    fn equality_is_a_degenerate_interval() {
        let c1 = con(vec![cmp("a", CmpOp::Eq, 5)]);
        assert!(implies(&c1, &con(vec![cmp("a", CmpOp::Ge, 5)])));
        assert!(implies(&c1, &con(vec![cmp("a", CmpOp::Le, 5)])));
        assert!(implies(&c1, &con(vec![cmp("a", CmpOp::Ne, 4)])));
        assert!(!implies(&c1, &con(vec![cmp("a", CmpOp::Gt, 5)])));
    }

    #[test]
    fn excluded_endpoint_tightens_the_bound() {
        // a in [0,1] with 1 excluded is exactly [0,1), so a < 1 follows.
        let c1 = con(vec![
            cmp("a", CmpOp::Ge, 0),
            cmp("a", CmpOp::Le, 1),
            cmp("a", CmpOp::Ne, 1),
        ]);
        assert!(implies(&c1, &con(vec![cmp("a", CmpOp::Lt, 1)])));
        assert!(!implies(&c1, &con(vec![cmp("a", CmpOp::Lt, 0)])));
    }

    #[test]
    fn interior_exclusion_blocks_subsumption() {
        // [0,10] is not a subset of [0,10] minus {5}.
        let c1 = con(vec![cmp("a", CmpOp::Ge, 0), cmp("a", CmpOp::Le, 10)]);
        let c2 = con(vec![cmp("a", CmpOp::Ne, 5)]);
        assert!(!implies(&c1, &c2));
        // But [6,10] is.
        let c3 = con(vec![cmp("a", CmpOp::Ge, 6), cmp("a", CmpOp::Le, 10)]);
        assert!(implies(&c3, &c2));
    }

    #[test]
    fn singleton_point_respects_exclusions() {
        let c1 = con(vec![cmp("a", CmpOp::Eq, 5)]);
        let c2 = con(vec![cmp("a", CmpOp::Ne, 5)]);
        assert!(!implies(&c1, &c2));
        // a == 5 and a != 5 together are unsatisfiable.
        let both = con(vec![cmp("a", CmpOp::Eq, 5), cmp("a", CmpOp::Ne, 5)]);
        assert!(!both.is_satisfiable());
        assert!(implies(&both, &c2));
    }

    #[test]
    fn opaque_atoms_match_syntactically() {
        let valid = Atom::Opaque {
            pred: "valid".into(),
            var: "a".into(),
        };
        let sorted = Atom::Opaque {
            pred: "sorted".into(),
            var: "a".into(),
        };
        let c1 = con(vec![valid.clone()]);
        assert!(implies(&c1, &con(vec![valid])));
        assert!(!implies(&c1, &con(vec![sorted.clone()])));
        assert_eq!(
            compare_pre(&c1, &con(vec![sorted])),
            ContractRelation::Incomparable
        );
    }

    #[test]
    fn pre_example_relations() {
        let ge0 = con(vec![cmp("a", CmpOp::Ge, 0)]);
        let ge1 = con(vec![cmp("a", CmpOp::Ge, 1)]);
        assert_eq!(compare_pre(&ge0, &ge1), ContractRelation::Strengthened);
        assert_eq!(compare_pre(&ge1, &ge0), ContractRelation::Weakened);
        let range = con(vec![cmp("a", CmpOp::Ge, 0), cmp("a", CmpOp::Le, 10)]);
        assert_eq!(compare_pre(&range, &ge0), ContractRelation::Weakened);
        assert_eq!(compare_pre(&ge0, &ge0.clone()), ContractRelation::Equal);
    }

    #[test]
    fn post_dropping_nonnull_weakens() {
        let nn = con(vec![Atom::NonNull("result".into())]);
        let empty = Contract::default();
        assert_eq!(compare_post(&nn, &empty), ContractRelation::Weakened);
        assert_eq!(compare_post(&empty, &nn), ContractRelation::Strengthened);
    }

    #[test]
    fn decimal_parse_and_render() {
        assert_eq!(parse_decimal("42"), Some(q(42)));
        assert_eq!(parse_decimal("-3"), Some(q(-3)));
        assert_eq!(parse_decimal("1.25"), Some(Rational64::new(5, 4)));
        assert_eq!(parse_decimal("-0.5"), Some(Rational64::new(-1, 2)));
        assert_eq!(parse_decimal(""), None);
        assert_eq!(parse_decimal("1."), None);
        assert_eq!(parse_decimal("1.2.3"), None);
        assert_eq!(parse_decimal("x"), None);

        assert_eq!(render_decimal(q(42)), "42");
        assert_eq!(render_decimal(Rational64::new(5, 4)), "1.25");
        assert_eq!(render_decimal(Rational64::new(-1, 2)), "-0.5");
        assert_eq!(render_decimal(Rational64::new(1, 3)), "1/3");
    }

    #[test]
    fn atom_display_forms() {
        assert_eq!(Atom::NonNull("a".into()).to_string(), "nonnull(a)");
        assert_eq!(cmp("a", CmpOp::Ge, -5).to_string(), "a >= -5");
        assert_eq!(
            Atom::Opaque {
                pred: "valid".into(),
                var: "xs".into()
            }
            .to_string(),
            "valid(xs)"
        );
    }

    fn arb_atom() -> impl Strategy<Value = Atom> {
        let var = prop_oneof![Just("a"), Just("b"), Just("c")];
        let op = prop_oneof![
            Just(CmpOp::Lt),
            Just(CmpOp::Le),
            Just(CmpOp::Gt),
            Just(CmpOp::Ge),
            Just(CmpOp::Eq),
            Just(CmpOp::Ne),
        ];
        prop_oneof![
            3 => (var.clone(), op, -20i64..=20).prop_map(|(v, op, k)| Atom::cmp(v, op, q(k))),
            1 => var.clone().prop_map(|v| Atom::NonNull(v.to_string())),
            1 => (prop_oneof![Just("valid"), Just("sorted")], var)
                .prop_map(|(p, v)| Atom::Opaque { pred: p.into(), var: v.into() }),
        ]
    }

    fn arb_contract() -> impl Strategy<Value = Contract> {
        proptest::collection::vec(arb_atom(), 0..4).prop_map(Contract::new)
    }

    proptest! {
        #[test]
        fn implication_is_reflexive(c in arb_contract()) {
            prop_assert!(implies(&c, &c));
        }

        #[test]
        fn implication_is_transitive(
            a in arb_contract(),
            b in arb_contract(),
            c in arb_contract(),
        ) {
            if implies(&a, &b) && implies(&b, &c) {
                prop_assert!(implies(&a, &c));
            }
        }

        #[test]
        fn compare_is_antisymmetric(a in arb_contract(), b in arb_contract()) {
            let forward = compare_pre(&a, &b);
            let backward = compare_pre(&b, &a);
            let mirrored = match forward {
                ContractRelation::Strengthened => ContractRelation::Weakened,
                ContractRelation::Weakened => ContractRelation::Strengthened,
                other => other,
            };
            prop_assert_eq!(backward, mirrored);
        }

        #[test]
        fn compare_self_is_equal(c in arb_contract()) {
            prop_assert_eq!(compare_pre(&c, &c), ContractRelation::Equal);
        }

        #[test]
        fn adding_atoms_strengthens(c in arb_contract(), extra in arb_atom()) {
            let mut atoms = c.atoms.clone();
            atoms.insert(extra);
            let stronger = Contract { atoms };
            prop_assert!(implies(&stronger, &c));
        }
    }
}

//! The abstraction lattice shared by every domain: built-in top, bottom and
//! abstract variables around domain elements, bounds environments, and the
//! narrowing partial order.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::ast::{Op, Sort, Value};
use crate::solver::{LinExpr, SolverCtx, SolverVar};

/// Identifies one of the registered domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DomainId {
    Prefix,
    Suffix,
    Length,
    /// Slot for domains defined outside this crate.
    Custom(u16),
}

impl DomainId {
    pub fn name(self) -> String {
        match self {
            DomainId::Prefix => "prefix".into(),
            DomainId::Suffix => "suffix".into(),
            DomainId::Length => "length".into(),
            DomainId::Custom(n) => format!("custom{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "α{}", self.0)
    }
}

/// Domain-specific content of an element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Payload {
    Str(Arc<str>),
    Int(i64),
    Bool(bool),
    Lin(LinExpr),
    /// Opaque tag for custom domains.
    Tag(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Elem {
    pub domain: DomainId,
    pub payload: Payload,
}

impl Elem {
    pub fn new(domain: DomainId, payload: Payload) -> Elem {
        Elem { domain, payload }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.domain.name();
        match &self.payload {
            Payload::Str(s) => write!(f, "{d}:{s:?}"),
            Payload::Int(n) => write!(f, "{d}:{n}"),
            Payload::Bool(b) => write!(f, "{d}:{b}"),
            Payload::Lin(e) => write!(f, "{d}:{e}"),
            Payload::Tag(t) => write!(f, "{d}:#{t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Abstraction {
    Top,
    Bot,
    Var(VarId),
    Elem(Elem),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    Top,
    Bot,
    Var,
    Val,
}

impl Abstraction {
    pub fn elem(domain: DomainId, payload: Payload) -> Abstraction {
        Abstraction::Elem(Elem::new(domain, payload))
    }

    pub fn classify(&self) -> Class {
        match self {
            Abstraction::Top => Class::Top,
            Abstraction::Bot => Class::Bot,
            Abstraction::Var(_) => Class::Var,
            Abstraction::Elem(_) => Class::Val,
        }
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Abstraction::Top)
    }

    pub fn as_elem(&self) -> Option<&Elem> {
        match self {
            Abstraction::Elem(e) => Some(e),
            _ => None,
        }
    }
}

impl fmt::Display for Abstraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Abstraction::Top => f.write_str("⊤"),
            Abstraction::Bot => f.write_str("⊥"),
            Abstraction::Var(v) => write!(f, "{v}"),
            Abstraction::Elem(e) => write!(f, "{e}"),
        }
    }
}

/// One abstraction per active domain, in the product's domain order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductAbs(pub Vec<Abstraction>);

impl ProductAbs {
    pub fn new(components: Vec<Abstraction>) -> ProductAbs {
        ProductAbs(components)
    }

    pub fn top(n: usize) -> ProductAbs {
        ProductAbs(vec![Abstraction::Top; n])
    }

    pub fn is_all_top(&self) -> bool {
        self.0.iter().all(Abstraction::is_top)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for ProductAbs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Range of an abstract variable. Neither bound is ever a `Var`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bounds {
    pub lo: Abstraction,
    pub hi: Abstraction,
}

impl Bounds {
    pub fn fresh() -> Bounds {
        Bounds {
            lo: Abstraction::Bot,
            hi: Abstraction::Top,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("no bounds recorded for abstract variable {0}")]
    MissingBounds(VarId),
    #[error("cannot compare elements of {0:?} and {1:?}")]
    DomainMismatch(DomainId, DomainId),
    #[error("product arity mismatch: {0} vs {1}")]
    Arity(usize, usize),
    #[error("unbound source variable `{0}`")]
    Unbound(String),
}

/// Bounds of abstract variables, plus the linear-constraint context that
/// solver-backed domains use to interpret symbolic elements.
///
/// Cloning is the persistence mechanism: an update on a clone never affects
/// the original.
#[derive(Clone, Debug, Default)]
pub struct BoundsEnv {
    entries: BTreeMap<VarId, Bounds>,
    pub solver: SolverCtx,
    /// Symbolic stand-ins for abstract variables in solver-backed domains.
    symbols: BTreeMap<VarId, SolverVar>,
    /// Upper bound on any string length the solver will consider.
    pub max_len: i64,
}

impl BoundsEnv {
    pub fn new(max_len: i64) -> BoundsEnv {
        BoundsEnv {
            max_len,
            ..BoundsEnv::default()
        }
    }

    /// Registers `v` with bounds (Bot, Top).
    pub fn introduce(&mut self, v: VarId) {
        self.entries.insert(v, Bounds::fresh());
    }

    /// Drops the bounds of variables `keep` rejects. Solver state is kept,
    /// since constraints may still mention their symbols.
    pub fn retain(&mut self, mut keep: impl FnMut(VarId) -> bool) {
        self.entries.retain(|v, _| keep(*v));
        self.symbols.retain(|v, _| keep(*v));
    }

    /// Same bounds, symbols and constraints, without a deep comparison of
    /// the solver.
    pub fn same_as(&self, other: &BoundsEnv) -> bool {
        self.max_len == other.max_len
            && self.solver.constraints().len() == other.solver.constraints().len()
            && self.solver.num_vars() == other.solver.num_vars()
            && self.symbols == other.symbols
            && self.entries == other.entries
    }

    pub fn get(&self, v: VarId) -> Result<&Bounds, LatticeError> {
        self.entries.get(&v).ok_or(LatticeError::MissingBounds(v))
    }

    pub fn set(&mut self, v: VarId, b: Bounds) {
        self.entries.insert(v, b);
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.entries.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &Bounds)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    /// Bound on integer magnitudes the solver will consider.
    pub fn int_bound(&self) -> i64 {
        4 * (self.max_len + 1)
    }

    /// The solver variable standing for `v` in a solver-backed domain,
    /// created on first use with the range of `sort`.
    pub fn symbol_for(&mut self, v: VarId, sort: Sort) -> SolverVar {
        if let Some(s) = self.symbols.get(&v) {
            return *s;
        }
        let s = match sort {
            Sort::String => self.solver.new_var(0, self.max_len),
            _ => {
                let b = self.int_bound();
                self.solver.new_var(-b, b)
            }
        };
        self.symbols.insert(v, s);
        s
    }

    /// A solver variable not tied to any abstract variable.
    pub fn fresh_symbol(&mut self, sort: Sort) -> SolverVar {
        match sort {
            Sort::String => self.solver.new_var(0, self.max_len),
            _ => {
                let b = self.int_bound();
                self.solver.new_var(-b, b)
            }
        }
    }

    pub fn symbol(&self, v: VarId) -> Option<SolverVar> {
        self.symbols.get(&v).copied()
    }
}

/// Interface every abstract domain implements.
///
/// `leq`, `join` and `compatible` only ever see elements of this domain.
/// Solver-backed domains read the constraint context from the bounds
/// environment and record assumptions through [`Domain::assume_leq`].
pub trait Domain: fmt::Debug + Send + Sync {
    fn id(&self) -> DomainId;

    fn leq(&self, a: &Elem, b: &Elem, benv: &BoundsEnv) -> bool;

    /// Least upper bound; `Top` when the domain has nothing tighter.
    fn join(&self, a: &Elem, b: &Elem, benv: &BoundsEnv) -> Abstraction {
        if self.leq(a, b, benv) {
            Abstraction::Elem(b.clone())
        } else if self.leq(b, a, benv) {
            Abstraction::Elem(a.clone())
        } else {
            Abstraction::Top
        }
    }

    /// Whether the concretizations may overlap. Must return true whenever
    /// some concrete value is a member of both.
    fn compatible(&self, a: &Elem, b: &Elem, benv: &BoundsEnv) -> bool;

    fn alpha(&self, v: &Value) -> Abstraction;

    fn member(&self, v: &Value, e: &Elem) -> bool;

    fn transfer(&self, op: Op, args: &[Abstraction], benv: &mut BoundsEnv) -> Abstraction;

    /// All elements below `upper` for values of `sort`, when that set is
    /// finite and small.
    fn finite_enum(&self, _upper: &Abstraction, _sort: Sort) -> Option<Vec<Elem>> {
        None
    }

    fn solver_backed(&self) -> bool {
        false
    }

    /// Commits to `a ⊑ b` after a successful `leq` check.
    fn assume_leq(&self, _a: &Elem, _b: &Elem, _benv: &mut BoundsEnv) {}
}

/// The active domains, in product order.
pub type DomainSet = Vec<Arc<dyn Domain>>;

fn check_domain(dom: &dyn Domain, e: &Elem) -> Result<(), LatticeError> {
    if e.domain != dom.id() {
        return Err(LatticeError::DomainMismatch(dom.id(), e.domain));
    }
    Ok(())
}

/// Order on variable-free abstractions.
pub fn const_leq(
    dom: &dyn Domain,
    a: &Abstraction,
    b: &Abstraction,
    benv: &BoundsEnv,
) -> Result<bool, LatticeError> {
    use Abstraction::*;
    Ok(match (a, b) {
        (Bot, _) | (_, Top) => true,
        (Top, _) | (_, Bot) => false,
        (Elem(x), Elem(y)) => {
            check_domain(dom, x)?;
            check_domain(dom, y)?;
            dom.leq(x, y, benv)
        }
        (Var(v), _) | (_, Var(v)) => return Err(LatticeError::MissingBounds(*v)),
    })
}

/// Join on variable-free abstractions.
pub fn const_join(dom: &dyn Domain, a: &Abstraction, b: &Abstraction, benv: &BoundsEnv) -> Abstraction {
    use Abstraction::*;
    match (a, b) {
        (Bot, x) | (x, Bot) => x.clone(),
        (Top, _) | (_, Top) => Top,
        (Elem(x), Elem(y)) => dom.join(x, y, benv),
        _ => Top,
    }
}

/// Commits an Elem-vs-Elem `leq` for solver-backed domains.
fn commit(dom: &dyn Domain, a: &Abstraction, b: &Abstraction, benv: &mut BoundsEnv) {
    if let (Abstraction::Elem(x), Abstraction::Elem(y)) = (a, b) {
        dom.assume_leq(x, y, benv);
    }
}

/// `a1 ⊑ a2`, narrowing variable bounds so that the relation holds over the
/// remaining range. On `false` the environment is left as it was.
pub fn leq_narrow(
    benv: &mut BoundsEnv,
    a1: &Abstraction,
    a2: &Abstraction,
    dom: &dyn Domain,
) -> Result<bool, LatticeError> {
    use Abstraction::*;
    match (a1, a2) {
        (Bot, _) | (_, Top) => {
            for a in [a1, a2] {
                if let Var(v) = a {
                    benv.get(*v)?;
                }
            }
            Ok(true)
        }
        (Var(v), Var(w)) => var_var(benv, *v, *w, dom),
        (Var(v), c) => {
            let Bounds { lo, hi } = benv.get(*v)?.clone();
            if const_leq(dom, &hi, c, benv)? {
                commit(dom, &hi, c, benv);
                return Ok(true);
            }
            if const_leq(dom, &lo, c, benv)? && const_leq(dom, c, &hi, benv)? {
                commit(dom, &lo, c, benv);
                benv.set(*v, Bounds { lo, hi: c.clone() });
                return Ok(true);
            }
            Ok(false)
        }
        (c, Var(v)) => {
            let Bounds { lo, hi } = benv.get(*v)?.clone();
            if const_leq(dom, c, &lo, benv)? {
                commit(dom, c, &lo, benv);
                return Ok(true);
            }
            if !const_leq(dom, c, &hi, benv)? {
                return Ok(false);
            }
            let new_lo = if const_leq(dom, &lo, c, benv)? {
                c.clone()
            } else {
                let j = const_join(dom, &lo, c, benv);
                if !const_leq(dom, &j, &hi, benv)? {
                    return Ok(false);
                }
                j
            };
            commit(dom, c, &hi, benv);
            benv.set(*v, Bounds { lo: new_lo, hi });
            Ok(true)
        }
        (x, y) => {
            let r = const_leq(dom, x, y, benv)?;
            if r {
                commit(dom, x, y, benv);
            }
            Ok(r)
        }
    }
}

/// Var-vs-var comparison: with Δ[v1] = (a1, a2) and Δ[v2] = (a3, a4),
/// containment of v2's range in v1's narrows v1 to v2's range, an overlap
/// clips both to the shared part, and `a1 ⋢ a4` fails.
fn var_var(benv: &mut BoundsEnv, v1: VarId, v2: VarId, dom: &dyn Domain) -> Result<bool, LatticeError> {
    let Bounds { lo: a1, hi: a2 } = benv.get(v1)?.clone();
    let Bounds { lo: a3, hi: a4 } = benv.get(v2)?.clone();
    if v1 == v2 {
        return Ok(true);
    }
    if const_leq(dom, &a1, &a3, benv)? && const_leq(dom, &a4, &a2, benv)? {
        benv.set(
            v1,
            Bounds {
                lo: a3.clone(),
                hi: a4.clone(),
            },
        );
        return Ok(true);
    }
    if const_leq(dom, &a3, &a2, benv)? && const_leq(dom, &a2, &a4, benv)? {
        let lo = if const_leq(dom, &a1, &a3, benv)? {
            a3
        } else if const_leq(dom, &a3, &a1, benv)? {
            a1
        } else {
            const_join(dom, &a1, &a3, benv)
        };
        if !const_leq(dom, &lo, &a2, benv)? {
            return Ok(false);
        }
        let b = Bounds { lo, hi: a2 };
        benv.set(v1, b.clone());
        benv.set(v2, b);
        return Ok(true);
    }
    if !const_leq(dom, &a1, &a4, benv)? {
        return Ok(false);
    }
    Ok(true)
}

/// Componentwise `leq_narrow`, stopping at the first failing component.
/// On `false` the environment may hold narrowing from earlier components;
/// callers discard it.
pub fn product_leq_narrow(
    benv: &mut BoundsEnv,
    p1: &ProductAbs,
    p2: &ProductAbs,
    domains: &[Arc<dyn Domain>],
) -> Result<bool, LatticeError> {
    if p1.len() != p2.len() || p1.len() != domains.len() {
        return Err(LatticeError::Arity(p1.len(), p2.len()));
    }
    for ((a, b), d) in p1.0.iter().zip(&p2.0).zip(domains) {
        if !leq_narrow(benv, a, b, d.as_ref())? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Source-variable abstractions.
#[derive(Clone, Debug, Default)]
pub struct AbsEnv {
    entries: BTreeMap<String, ProductAbs>,
}

impl AbsEnv {
    pub fn new() -> AbsEnv {
        AbsEnv::default()
    }

    pub fn bind(&mut self, name: impl Into<String>, abs: ProductAbs) {
        self.entries.insert(name.into(), abs);
    }

    pub fn lookup(&self, name: &str) -> Result<&ProductAbs, LatticeError> {
        self.entries
            .get(name)
            .ok_or_else(|| LatticeError::Unbound(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ProductAbs)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{LengthDomain, PrefixDomain};

    fn pre(s: &str) -> Abstraction {
        Abstraction::elem(DomainId::Prefix, Payload::Str(s.into()))
    }

    fn len(n: i64) -> Abstraction {
        Abstraction::elem(DomainId::Length, Payload::Lin(LinExpr::constant(n)))
    }

    #[test]
    fn elem_vs_elem_defers_to_domain() {
        let mut b = BoundsEnv::new(10);
        assert!(leq_narrow(&mut b, &pre("foo"), &pre("fo"), &PrefixDomain).unwrap());
        assert!(!leq_narrow(&mut b, &pre("fo"), &pre("foo"), &PrefixDomain).unwrap());
        assert!(b.is_empty());
    }

    #[test]
    fn var_below_constant_narrows_upper_bound() {
        let mut b = BoundsEnv::new(10);
        let v = VarId(1);
        b.introduce(v);
        assert!(leq_narrow(&mut b, &Abstraction::Var(v), &pre("Dr. "), &PrefixDomain).unwrap());
        assert_eq!(b.get(v).unwrap().lo, Abstraction::Bot);
        assert_eq!(b.get(v).unwrap().hi, pre("Dr. "));
    }

    #[test]
    fn constant_below_var_narrows_lower_bound() {
        let mut b = BoundsEnv::new(10);
        let v = VarId(1);
        b.introduce(v);
        assert!(leq_narrow(&mut b, &pre("ab"), &Abstraction::Var(v), &PrefixDomain).unwrap());
        assert_eq!(b.get(v).unwrap().lo, pre("ab"));
        // "ac" and "ab" are incomparable and join to "a", still below Top.
        assert!(leq_narrow(&mut b, &pre("ac"), &Abstraction::Var(v), &PrefixDomain).unwrap());
        assert_eq!(b.get(v).unwrap().lo, pre("a"));
    }

    #[test]
    fn bottom_is_below_everything() {
        let mut b = BoundsEnv::new(10);
        for a in [Abstraction::Top, Abstraction::Bot, pre("x")] {
            assert!(leq_narrow(&mut b, &Abstraction::Bot, &a, &PrefixDomain).unwrap());
            assert!(leq_narrow(&mut b, &a, &Abstraction::Top, &PrefixDomain).unwrap());
        }
        assert!(!leq_narrow(&mut b, &Abstraction::Top, &pre("x"), &PrefixDomain).unwrap());
    }

    #[test]
    fn singleton_length_var_rejects_other_constant() {
        let mut b = BoundsEnv::new(10);
        let v = VarId(1);
        b.set(v, Bounds { lo: len(5), hi: len(5) });
        let before = b.get(v).unwrap().clone();
        assert!(!leq_narrow(&mut b, &Abstraction::Var(v), &len(3), &LengthDomain).unwrap());
        assert_eq!(b.get(v).unwrap(), &before);
    }

    #[test]
    fn errors() {
        let mut b = BoundsEnv::new(10);
        assert_eq!(
            leq_narrow(&mut b, &Abstraction::Var(VarId(9)), &pre("a"), &PrefixDomain),
            Err(LatticeError::MissingBounds(VarId(9)))
        );
        assert_eq!(
            leq_narrow(&mut b, &len(1), &pre("a"), &PrefixDomain),
            Err(LatticeError::DomainMismatch(DomainId::Prefix, DomainId::Length))
        );
    }

    #[test]
    fn var_var_cases() {
        let d = PrefixDomain;
        // containment: v2's range inside v1's narrows v1
        let mut b = BoundsEnv::new(10);
        b.introduce(VarId(1));
        b.set(VarId(2), Bounds { lo: pre("abc"), hi: pre("a") });
        assert!(leq_narrow(&mut b, &Abstraction::Var(VarId(1)), &Abstraction::Var(VarId(2)), &d).unwrap());
        assert_eq!(b.get(VarId(1)).unwrap(), b.get(VarId(2)).unwrap());

        // overlap: v1 = (abcd, ab), v2 = (abc, a): a3 ⊑ a2 ⊑ a4
        let mut b = BoundsEnv::new(10);
        b.set(VarId(1), Bounds { lo: pre("abcd"), hi: pre("ab") });
        b.set(VarId(2), Bounds { lo: pre("abc"), hi: pre("a") });
        assert!(leq_narrow(&mut b, &Abstraction::Var(VarId(1)), &Abstraction::Var(VarId(2)), &d).unwrap());
        let want = Bounds { lo: pre("abc"), hi: pre("ab") };
        assert_eq!(b.get(VarId(1)).unwrap(), &want);
        assert_eq!(b.get(VarId(2)).unwrap(), &want);

        // disjoint: v1 = (x, x), v2 = (y, y)
        let mut b = BoundsEnv::new(10);
        b.set(VarId(1), Bounds { lo: pre("x"), hi: pre("x") });
        b.set(VarId(2), Bounds { lo: pre("y"), hi: pre("y") });
        assert!(!leq_narrow(&mut b, &Abstraction::Var(VarId(1)), &Abstraction::Var(VarId(2)), &d).unwrap());
        assert_eq!(b.get(VarId(1)).unwrap().lo, pre("x"));
    }

    #[test]
    fn product_is_componentwise() {
        let ds: DomainSet = vec![Arc::new(PrefixDomain), Arc::new(LengthDomain)];
        let mut b = BoundsEnv::new(10);
        let p1 = ProductAbs::new(vec![pre("foo"), len(3)]);
        let p2 = ProductAbs::new(vec![pre("fo"), Abstraction::Top]);
        assert!(product_leq_narrow(&mut b, &p1, &p2, &ds).unwrap());
        let p1 = ProductAbs::new(vec![Abstraction::Bot, len(3)]);
        let p2 = ProductAbs::new(vec![pre("a"), len(2)]);
        assert!(!product_leq_narrow(&mut b, &p1, &p2, &ds).unwrap());
        assert!(product_leq_narrow(&mut b, &p1, &ProductAbs::top(2), &ds).unwrap());
        assert!(matches!(
            product_leq_narrow(&mut b, &p1, &ProductAbs::top(3), &ds),
            Err(LatticeError::Arity(2, 3))
        ));
    }

    #[test]
    fn classify_tags() {
        assert_eq!(Abstraction::Top.classify(), Class::Top);
        assert_eq!(Abstraction::Var(VarId(1)).classify(), Class::Var);
        assert_eq!(len(3).classify(), Class::Val);
    }

    #[test]
    fn unbound_lookup_is_an_error() {
        let env = AbsEnv::new();
        assert!(matches!(env.lookup("x"), Err(LatticeError::Unbound(_))));
    }
}

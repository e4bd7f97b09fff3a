use std::sync::Arc;

use super::resolve_upper;
use crate::ast::{Op, Value};
use crate::lattice::{Abstraction, BoundsEnv, Domain, DomainId, Elem, Payload};

/// Strings that start with a given prefix. The empty prefix is the
/// greatest element below `Top`.
///
/// Integer constants are kept as exact elements so that `str.substr` from
/// index 0 with a constant length can truncate the receiver's prefix.
/// Integer- and boolean-valued operations carry no prefix information and
/// evaluate to `Bot`.
#[derive(Clone, Copy, Debug, Default)]
pub struct PrefixDomain;

pub(crate) fn str_elem(d: DomainId, s: &str) -> Abstraction {
    Abstraction::elem(d, Payload::Str(Arc::from(s)))
}

fn common_prefix<'a>(a: &'a str, b: &str) -> &'a str {
    let n = a.bytes().zip(b.bytes()).take_while(|(x, y)| x == y).count();
    &a[..n]
}

impl Domain for PrefixDomain {
    fn id(&self) -> DomainId {
        DomainId::Prefix
    }

    fn leq(&self, a: &Elem, b: &Elem, _: &BoundsEnv) -> bool {
        match (&a.payload, &b.payload) {
            (Payload::Str(x), Payload::Str(y)) => x.starts_with(&**y),
            (x, y) => x == y,
        }
    }

    fn join(&self, a: &Elem, b: &Elem, _: &BoundsEnv) -> Abstraction {
        match (&a.payload, &b.payload) {
            (Payload::Str(x), Payload::Str(y)) => str_elem(DomainId::Prefix, common_prefix(x, y)),
            (x, y) if x == y => Abstraction::Elem(a.clone()),
            _ => Abstraction::Top,
        }
    }

    fn compatible(&self, a: &Elem, b: &Elem, _: &BoundsEnv) -> bool {
        match (&a.payload, &b.payload) {
            (Payload::Str(x), Payload::Str(y)) => x.starts_with(&**y) || y.starts_with(&**x),
            (x, y) => x == y,
        }
    }

    fn alpha(&self, v: &Value) -> Abstraction {
        match v {
            Value::Str(s) => str_elem(DomainId::Prefix, s),
            Value::Int(n) => Abstraction::elem(DomainId::Prefix, Payload::Int(*n)),
            Value::Bool(_) => Abstraction::Bot,
        }
    }

    fn member(&self, v: &Value, e: &Elem) -> bool {
        match (v, &e.payload) {
            (Value::Str(s), Payload::Str(p)) => s.starts_with(&**p),
            (Value::Int(n), Payload::Int(m)) => n == m,
            _ => false,
        }
    }

    fn transfer(&self, op: Op, args: &[Abstraction], benv: &mut BoundsEnv) -> Abstraction {
        match op {
            Op::Concat => match resolve_upper(&args[0], benv) {
                a @ Abstraction::Elem(_) => a,
                _ => Abstraction::Top,
            },
            Op::Substr => {
                let s = resolve_upper(&args[0], benv);
                let i = resolve_upper(&args[1], benv);
                let j = resolve_upper(&args[2], benv);
                match (s.as_elem(), i.as_elem(), j.as_elem()) {
                    (Some(s), Some(i), Some(j)) => match (&s.payload, &i.payload, &j.payload) {
                        (Payload::Str(p), Payload::Int(0), Payload::Int(k)) => {
                            let n = p.len().min((*k).max(0) as usize);
                            str_elem(DomainId::Prefix, &p[..n])
                        }
                        _ => Abstraction::Top,
                    },
                    _ => Abstraction::Top,
                }
            }
            Op::Replace | Op::At | Op::IntToStr => Abstraction::Top,
            Op::Len | Op::IndexOf | Op::StrToInt | Op::Add | Op::Sub => Abstraction::Bot,
            Op::Contains | Op::PrefixOf | Op::SuffixOf => Abstraction::Bot,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Bounds, VarId};

    fn p(s: &str) -> Abstraction {
        str_elem(DomainId::Prefix, s)
    }

    fn e(s: &str) -> Elem {
        p(s).as_elem().unwrap().clone()
    }

    #[test]
    fn order_and_join() {
        let b = BoundsEnv::new(8);
        let d = PrefixDomain;
        assert!(d.leq(&e("foo"), &e("fo"), &b));
        assert!(d.leq(&e("foo"), &e(""), &b));
        assert!(!d.leq(&e("fo"), &e("foo"), &b));
        assert_eq!(d.join(&e("abc"), &e("abd"), &b), p("ab"));
        assert!(d.compatible(&e("ab"), &e("abc"), &b));
        assert!(!d.compatible(&e("ab"), &e("ac"), &b));
    }

    #[test]
    fn concat_keeps_left_prefix() {
        let mut b = BoundsEnv::new(8);
        b.introduce(VarId(0));
        let r = PrefixDomain.transfer(Op::Concat, &[p("Dr. "), Abstraction::Var(VarId(0))], &mut b);
        assert_eq!(r, p("Dr. "));
        let r = PrefixDomain.transfer(Op::Concat, &[Abstraction::Var(VarId(0)), p("x")], &mut b);
        assert_eq!(r, Abstraction::Top);
        b.set(VarId(0), Bounds { lo: Abstraction::Bot, hi: p("M") });
        let r = PrefixDomain.transfer(Op::Concat, &[Abstraction::Var(VarId(0)), p("x")], &mut b);
        assert_eq!(r, p("M"));
    }

    #[test]
    fn int_ops_are_bottom() {
        let mut b = BoundsEnv::new(8);
        assert_eq!(PrefixDomain.transfer(Op::Len, &[p("ab")], &mut b), Abstraction::Bot);
        let top = Abstraction::Top;
        assert_eq!(
            PrefixDomain.transfer(Op::Substr, &[top.clone(), top.clone(), top], &mut b),
            Abstraction::Top
        );
    }

    #[test]
    fn substr_from_zero_truncates() {
        let mut b = BoundsEnv::new(8);
        let int = |n| PrefixDomain.alpha(&Value::Int(n));
        assert_eq!(
            PrefixDomain.transfer(Op::Substr, &[p("Hello"), int(0), int(3)], &mut b),
            p("Hel")
        );
        assert_eq!(
            PrefixDomain.transfer(Op::Substr, &[p("He"), int(0), int(3)], &mut b),
            p("He")
        );
        assert_eq!(
            PrefixDomain.transfer(Op::Substr, &[p("He"), int(0), int(-3)], &mut b),
            p("")
        );
        assert_eq!(
            PrefixDomain.transfer(Op::Substr, &[p("He"), int(1), int(3)], &mut b),
            Abstraction::Top
        );
    }
}

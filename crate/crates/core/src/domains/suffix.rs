use super::prefix::str_elem;
use super::resolve_upper;
use crate::ast::{Op, Value};
use crate::lattice::{Abstraction, BoundsEnv, Domain, DomainId, Elem, Payload};

/// Strings that end with a given suffix; the mirror image of
/// [`PrefixDomain`](super::PrefixDomain).
///
/// `str.substr` always evaluates to `Top`: whether a substring reaches the
/// end of its receiver depends on lengths this domain does not track.
#[derive(Clone, Copy, Debug, Default)]
pub struct SuffixDomain;

fn common_suffix<'a>(a: &'a str, b: &str) -> &'a str {
    let n = a
        .bytes()
        .rev()
        .zip(b.bytes().rev())
        .take_while(|(x, y)| x == y)
        .count();
    &a[a.len() - n..]
}

impl Domain for SuffixDomain {
    fn id(&self) -> DomainId {
        DomainId::Suffix
    }

    fn leq(&self, a: &Elem, b: &Elem, _: &BoundsEnv) -> bool {
        match (&a.payload, &b.payload) {
            (Payload::Str(x), Payload::Str(y)) => x.ends_with(&**y),
            (x, y) => x == y,
        }
    }

    fn join(&self, a: &Elem, b: &Elem, _: &BoundsEnv) -> Abstraction {
        match (&a.payload, &b.payload) {
            (Payload::Str(x), Payload::Str(y)) => str_elem(DomainId::Suffix, common_suffix(x, y)),
            (x, y) if x == y => Abstraction::Elem(a.clone()),
            _ => Abstraction::Top,
        }
    }

    fn compatible(&self, a: &Elem, b: &Elem, _: &BoundsEnv) -> bool {
        match (&a.payload, &b.payload) {
            (Payload::Str(x), Payload::Str(y)) => x.ends_with(&**y) || y.ends_with(&**x),
            (x, y) => x == y,
        }
    }

    fn alpha(&self, v: &Value) -> Abstraction {
        match v {
            Value::Str(s) => str_elem(DomainId::Suffix, s),
            Value::Int(n) => Abstraction::elem(DomainId::Suffix, Payload::Int(*n)),
            Value::Bool(_) => Abstraction::Bot,
        }
    }

    fn member(&self, v: &Value, e: &Elem) -> bool {
        match (v, &e.payload) {
            (Value::Str(s), Payload::Str(p)) => s.ends_with(&**p),
            (Value::Int(n), Payload::Int(m)) => n == m,
            _ => false,
        }
    }

    fn transfer(&self, op: Op, args: &[Abstraction], benv: &mut BoundsEnv) -> Abstraction {
        match op {
            Op::Concat => match resolve_upper(&args[1], benv) {
                a @ Abstraction::Elem(_) => a,
                _ => Abstraction::Top,
            },
            Op::Substr | Op::Replace | Op::At | Op::IntToStr => Abstraction::Top,
            Op::Len | Op::IndexOf | Op::StrToInt | Op::Add | Op::Sub => Abstraction::Bot,
            Op::Contains | Op::PrefixOf | Op::SuffixOf => Abstraction::Bot,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Abstraction {
        str_elem(DomainId::Suffix, x)
    }

    #[test]
    fn order_and_join() {
        let b = BoundsEnv::new(8);
        let d = SuffixDomain;
        let e = |x: &str| s(x).as_elem().unwrap().clone();
        assert!(d.leq(&e("Doe"), &e("oe"), &b));
        assert!(!d.leq(&e("oe"), &e("Doe"), &b));
        assert_eq!(d.join(&e("abc"), &e("xbc"), &b), s("bc"));
        assert!(!d.compatible(&e("ab"), &e("bb"), &b));
    }

    #[test]
    fn concat_keeps_right_suffix() {
        let mut b = BoundsEnv::new(8);
        let r = SuffixDomain.transfer(Op::Concat, &[Abstraction::Top, s(" Esq")], &mut b);
        assert_eq!(r, s(" Esq"));
        let r = SuffixDomain.transfer(Op::Concat, &[s("x"), Abstraction::Top], &mut b);
        assert_eq!(r, Abstraction::Top);
        assert_eq!(SuffixDomain.transfer(Op::IntToStr, &[Abstraction::Top], &mut b), Abstraction::Top);
        assert_eq!(SuffixDomain.alpha(&Value::Str("Doe".into())), s("Doe"));
    }
}

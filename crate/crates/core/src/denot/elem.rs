use std::cmp::Ordering;
use std::fmt;
use std::rc::Rc;

use super::DenotError;

/// A function on an infinite domain, compared by identity.
#[derive(Clone)]
pub struct Closure(pub Rc<dyn Fn(&Elem) -> Result<Elem, DenotError>>);

impl PartialEq for Closure {
    fn eq(&self, other: &Closure) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Closure {}

impl PartialOrd for Closure {
    fn partial_cmp(&self, other: &Closure) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Closure {
    fn cmp(&self, other: &Closure) -> Ordering {
        (Rc::as_ptr(&self.0) as *const u8).cmp(&(Rc::as_ptr(&other.0) as *const u8))
    }
}

/// Elements of denotations. Equality and order are structural, so finite
/// sets of elements have a canonical order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Elem {
    Unit,
    Pair(Rc<Elem>, Rc<Elem>),
    Tag(String, Rc<Elem>),
    /// The `i`-th element of the set assigned to a type variable.
    Atom(String, usize),
    /// A function with a finite domain, sorted by argument.
    Table(Rc<[(Elem, Elem)]>),
    Closure(Closure),
    /// A leaf of an operation tree.
    Leaf(Rc<Elem>),
    /// `op(param)` with one subtree per possible result.
    Node { op: String, param: Rc<Elem>, children: Rc<[(Elem, Elem)]> },
}

impl Elem {
    pub fn pair(a: Elem, b: Elem) -> Elem {
        Elem::Pair(Rc::new(a), Rc::new(b))
    }

    pub fn tag(l: &str, e: Elem) -> Elem {
        Elem::Tag(l.to_string(), Rc::new(e))
    }

    pub fn bit(b: bool) -> Elem {
        Elem::tag(if b { "True" } else { "False" }, Elem::Unit)
    }

    pub fn table(rows: Vec<(Elem, Elem)>) -> Elem {
        Elem::Table(rows.into())
    }

    pub fn leaf(e: Elem) -> Elem {
        Elem::Leaf(Rc::new(e))
    }

    /// Apply a function element.
    pub fn apply(&self, arg: &Elem) -> Result<Elem, DenotError> {
        match self {
            Elem::Table(rows) => rows
                .binary_search_by(|(k, _)| k.cmp(arg))
                .map(|i| rows[i].1.clone())
                .map_err(|_| DenotError::Ill(format!("argument {arg} outside the table's domain"))),
            Elem::Closure(c) => (c.0)(arg),
            e => Err(DenotError::Ill(format!("{e} is not a function"))),
        }
    }

    pub fn split(&self) -> Result<(&Elem, &Elem), DenotError> {
        match self {
            Elem::Pair(a, b) => Ok((a, b)),
            e => Err(DenotError::Ill(format!("{e} is not a pair"))),
        }
    }

    /// Number of operation nodes on the longest path of a tree.
    pub fn depth(&self) -> usize {
        match self {
            Elem::Node { children, .. } => 1 + children.iter().map(|(_, t)| t.depth()).max().unwrap_or(0),
            _ => 0,
        }
    }

    /// Whether the element contains a closure (and so has no decidable equality).
    pub fn is_opaque(&self) -> bool {
        match self {
            Elem::Closure(_) => true,
            Elem::Unit | Elem::Atom(..) => false,
            Elem::Pair(a, b) => a.is_opaque() || b.is_opaque(),
            Elem::Tag(_, e) | Elem::Leaf(e) => e.is_opaque(),
            Elem::Table(rows) => rows.iter().any(|(k, v)| k.is_opaque() || v.is_opaque()),
            Elem::Node { param, children, .. } => param.is_opaque() || children.iter().any(|(k, v)| k.is_opaque() || v.is_opaque()),
        }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Unit => write!(f, "()"),
            Elem::Pair(a, b) => write!(f, "<{a}, {b}>"),
            Elem::Tag(l, e) if **e == Elem::Unit && l == "True" => write!(f, "tru"),
            Elem::Tag(l, e) if **e == Elem::Unit && l == "False" => write!(f, "fls"),
            Elem::Tag(l, e) => write!(f, "{l} {e}"),
            Elem::Atom(v, i) => write!(f, "{v}#{i}"),
            Elem::Table(rows) => {
                write!(f, "{{")?;
                for (i, (k, v)) in rows.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{k} -> {v}")?;
                }
                write!(f, "}}")
            }
            Elem::Closure(_) => write!(f, "<function>"),
            Elem::Leaf(e) => write!(f, "return {e}"),
            Elem::Node { op, param, children } => {
                write!(f, "{op}({param}")?;
                if !children.is_empty() {
                    write!(f, "; ")?;
                    if children.len() == 1 && children[0].0 == Elem::Unit {
                        write!(f, "{}", children[0].1)?;
                    } else {
                        write!(f, "{}", Elem::Table(children.clone()))?;
                    }
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
